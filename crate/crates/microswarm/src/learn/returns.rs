//! Return and advantage estimators over single-agent episodes.

use super::LearnError;

/// Discounted returns G_t = sum_{t'=t}^{T} gamma^{t'-t} r_{t'}.
pub fn expected_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut returns = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (t, &r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        returns[t] = acc;
    }
    returns
}

/// Baseline advantages A_t = G_t - V_t.
pub fn advantages_expected(returns: &[f64], values: &[f64]) -> Result<Vec<f64>, LearnError> {
    if returns.len() != values.len() {
        return Err(LearnError::LengthMismatch {
            left: returns.len(),
            right: values.len(),
        });
    }
    Ok(returns.iter().zip(values).map(|(g, v)| g - v).collect())
}

/// Generalized advantage estimation:
/// delta_t = r_t + gamma V_{t+1} - V_t, A_t = sum_l (gamma lambda)^l delta_{t+l},
/// with V_T supplied as the terminal bootstrap (0 for episodes that end by
/// design).
pub fn advantages_gae(
    rewards: &[f64],
    values: &[f64],
    gamma: f64,
    lambda: f64,
    terminal_value: f64,
) -> Result<Vec<f64>, LearnError> {
    if rewards.len() != values.len() {
        return Err(LearnError::LengthMismatch {
            left: rewards.len(),
            right: values.len(),
        });
    }
    let n = rewards.len();
    let mut advantages = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let next_value = if t + 1 < n { values[t + 1] } else { terminal_value };
        let delta = rewards[t] + gamma * next_value - values[t];
        acc = delta + gamma * lambda * acc;
        advantages[t] = acc;
    }
    Ok(advantages)
}

/// Standardizes to mean 0, standard deviation 1 (std floored at 1e-8).
pub fn normalize_in_place(values: &mut [f64]) {
    if values.is_empty() {
        return;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt().max(1e-8);
    for v in values.iter_mut() {
        *v = (*v - mean) / std;
    }
}
