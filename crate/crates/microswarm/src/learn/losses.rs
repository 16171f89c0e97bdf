//! Policy-gradient and critic losses, each in two forms: the scalar value
//! and the exact gradient with respect to the network outputs (logits or
//! values), ready to feed the reverse pass.
//!
//! All losses are written so that gradient *descent* on them performs
//! ascent on the policy objective.

use ndarray::{Array1, Array2};

use super::LearnError;

/// Numerically stable row-wise log-softmax.
pub fn log_softmax(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|&l| (l - max).exp()).sum::<f64>().ln() + max;
        row.mapv_inplace(|l| l - log_sum);
    }
    out
}

/// Row-wise softmax.
pub fn softmax(logits: &Array2<f64>) -> Array2<f64> {
    log_softmax(logits).mapv(f64::exp)
}

/// Actor loss of the vanilla policy gradient:
/// loss = -mean_t(log pi(a_t | s_t) * A_t), advantages detached.
pub fn vpg_loss(log_probs: &[f64], advantages: &[f64]) -> f64 {
    let n = log_probs.len().max(1) as f64;
    -log_probs
        .iter()
        .zip(advantages)
        .map(|(lp, a)| lp * a)
        .sum::<f64>()
        / n
}

/// Clipped-surrogate actor loss:
/// rho = exp(log pi_new - log pi_old),
/// loss = -mean(min(rho A, clamp(rho, 1 - eps, 1 + eps) A)).
pub fn ppo_loss(log_probs_new: &[f64], log_probs_old: &[f64], advantages: &[f64], clip: f64) -> f64 {
    let n = log_probs_new.len().max(1) as f64;
    let mut total = 0.0;
    for ((lp_new, lp_old), a) in log_probs_new.iter().zip(log_probs_old).zip(advantages) {
        let ratio = (lp_new - lp_old).exp();
        let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
        total += (ratio * a).min(clipped * a);
    }
    -total / n
}

/// Critic regression loss: 0.5 * mean((V_t - G_t)^2).
pub fn critic_loss(values: &[f64], returns: &[f64]) -> f64 {
    let n = values.len().max(1) as f64;
    values
        .iter()
        .zip(returns)
        .map(|(v, g)| 0.5 * (v - g).powi(2))
        .sum::<f64>()
        / n
}

/// Mean policy entropy over the batch.
pub fn entropy_mean(logits: &Array2<f64>) -> f64 {
    let logp = log_softmax(logits);
    let mut total = 0.0;
    for row in logp.rows() {
        total -= row.iter().map(|&lp| lp.exp() * lp).sum::<f64>();
    }
    total / logits.nrows().max(1) as f64
}

/// Scalar loss plus its gradient with respect to the logits.
pub struct ActorGrad {
    pub loss: f64,
    pub dlogits: Array2<f64>,
}

/// VPG actor loss and d(loss)/d(logits).
///
/// d log pi(a)/d logit_j = delta_{j,a} - pi_j, so each included row
/// contributes -(A/n) (delta - pi).
pub fn vpg_actor_grad(
    logits: &Array2<f64>,
    actions: &[usize],
    advantages: &[f64],
) -> Result<ActorGrad, LearnError> {
    let n = logits.nrows();
    if actions.len() != n || advantages.len() != n {
        return Err(LearnError::LengthMismatch {
            left: n,
            right: actions.len().min(advantages.len()),
        });
    }
    let logp = log_softmax(logits);
    let probs = logp.mapv(f64::exp);
    let scale = 1.0 / n.max(1) as f64;
    let mut loss = 0.0;
    let mut dlogits = Array2::zeros(logits.raw_dim());
    for (i, (&a, &adv)) in actions.iter().zip(advantages).enumerate() {
        loss -= logp[[i, a]] * adv * scale;
        for j in 0..logits.ncols() {
            let indicator = if j == a { 1.0 } else { 0.0 };
            dlogits[[i, j]] = -adv * scale * (indicator - probs[[i, j]]);
        }
    }
    Ok(ActorGrad { loss, dlogits })
}

/// PPO clipped-surrogate loss and d(loss)/d(logits).
///
/// Gradient flows through the likelihood ratio only where the unclipped
/// branch is active (or the ratio sits inside the clip interval, where both
/// branches coincide).
pub fn ppo_actor_grad(
    logits: &Array2<f64>,
    actions: &[usize],
    advantages: &[f64],
    log_probs_old: &[f64],
    clip: f64,
) -> Result<ActorGrad, LearnError> {
    let n = logits.nrows();
    if actions.len() != n || advantages.len() != n || log_probs_old.len() != n {
        return Err(LearnError::LengthMismatch {
            left: n,
            right: actions.len().min(advantages.len()).min(log_probs_old.len()),
        });
    }
    let logp = log_softmax(logits);
    let probs = logp.mapv(f64::exp);
    let scale = 1.0 / n.max(1) as f64;
    let mut loss = 0.0;
    let mut dlogits = Array2::zeros(logits.raw_dim());
    for i in 0..n {
        let a = actions[i];
        let adv = advantages[i];
        let ratio = (logp[[i, a]] - log_probs_old[i]).exp();
        let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
        let surr_unclipped = ratio * adv;
        let surr_clipped = clipped * adv;
        loss -= surr_unclipped.min(surr_clipped) * scale;
        // d surr / d log pi_new: A * rho on the active branch, 0 when the
        // clipped branch is active and saturated
        let d_obj_d_logp = if surr_unclipped <= surr_clipped {
            adv * ratio
        } else if ratio > 1.0 - clip && ratio < 1.0 + clip {
            adv * ratio
        } else {
            0.0
        };
        let coeff = -d_obj_d_logp * scale;
        for j in 0..logits.ncols() {
            let indicator = if j == a { 1.0 } else { 0.0 };
            dlogits[[i, j]] = coeff * (indicator - probs[[i, j]]);
        }
    }
    Ok(ActorGrad { loss, dlogits })
}

/// Critic MSE loss and d(loss)/d(values).
pub fn critic_value_grad(
    values: &Array1<f64>,
    returns: &[f64],
) -> Result<(f64, Array1<f64>), LearnError> {
    if values.len() != returns.len() {
        return Err(LearnError::LengthMismatch {
            left: values.len(),
            right: returns.len(),
        });
    }
    let n = values.len().max(1) as f64;
    let mut loss = 0.0;
    let mut dvalues = Array1::zeros(values.len());
    for (i, (&v, &g)) in values.iter().zip(returns).enumerate() {
        loss += 0.5 * (v - g).powi(2) / n;
        dvalues[i] = (v - g) / n;
    }
    Ok((loss, dvalues))
}

/// Mean entropy and d(-mean entropy)/d(logits), for an entropy bonus
/// subtracted from the total loss.
pub fn entropy_grad(logits: &Array2<f64>) -> (f64, Array2<f64>) {
    let logp = log_softmax(logits);
    let probs = logp.mapv(f64::exp);
    let n = logits.nrows().max(1) as f64;
    let mut mean_entropy = 0.0;
    let mut dlogits = Array2::zeros(logits.raw_dim());
    for i in 0..logits.nrows() {
        let h: f64 = -(0..logits.ncols())
            .map(|j| probs[[i, j]] * logp[[i, j]])
            .sum::<f64>();
        mean_entropy += h / n;
        // dH/d logit_j = -p_j (log p_j + H); loss term is -H so negate
        for j in 0..logits.ncols() {
            dlogits[[i, j]] = probs[[i, j]] * (logp[[i, j]] + h) / n;
        }
    }
    (mean_entropy, dlogits)
}
