//! Gradient-ascent parameter updates: plain theta' = theta - eta * grad(loss)
//! (descent on the loss is ascent on the objective), with an adaptive-moment
//! variant behind a config switch.

use serde::{Deserialize, Serialize};

use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OptimizerKind {
    #[default]
    Sgd,
    Adam,
}

/// Optimizer state; `m`/`v` are only populated for the adaptive variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub eta: f64,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl OptimizerState {
    pub fn new(kind: OptimizerKind, eta: f64, param_count: usize) -> Self {
        let (m, v) = match kind {
            OptimizerKind::Sgd => (Vec::new(), Vec::new()),
            OptimizerKind::Adam => (vec![0.0; param_count], vec![0.0; param_count]),
        };
        Self {
            kind,
            eta,
            step: 0,
            m,
            v,
        }
    }
}

/// Applies one update in place. A non-finite gradient aborts before any
/// parameter is touched.
pub fn gradient_ascent_update(
    params: &mut [f64],
    grads: &[f64],
    opt: &mut OptimizerState,
) -> Result<(), LearnError> {
    if params.len() != grads.len() {
        return Err(LearnError::LengthMismatch {
            left: params.len(),
            right: grads.len(),
        });
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(LearnError::NonFinite("gradient"));
    }
    match opt.kind {
        OptimizerKind::Sgd => {
            for (p, g) in params.iter_mut().zip(grads) {
                *p -= opt.eta * g;
            }
        }
        OptimizerKind::Adam => {
            if opt.m.len() != params.len() {
                return Err(LearnError::LengthMismatch {
                    left: opt.m.len(),
                    right: params.len(),
                });
            }
            opt.step += 1;
            let t = opt.step as i32;
            let bias1 = 1.0 - ADAM_BETA1.powi(t);
            let bias2 = 1.0 - ADAM_BETA2.powi(t);
            for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
                opt.m[i] = ADAM_BETA1 * opt.m[i] + (1.0 - ADAM_BETA1) * g;
                opt.v[i] = ADAM_BETA2 * opt.v[i] + (1.0 - ADAM_BETA2) * g * g;
                let m_hat = opt.m[i] / bias1;
                let v_hat = opt.v[i] / bias2;
                *p -= opt.eta * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_keeps_parameters() {
        let mut params = vec![1.0, -2.0];
        let mut opt = OptimizerState::new(OptimizerKind::Sgd, 0.1, 2);
        gradient_ascent_update(&mut params, &[0.0, 0.0], &mut opt).unwrap();
        assert_eq!(params, vec![1.0, -2.0]);
    }

    #[test]
    fn sgd_hand_case() {
        // theta = 1, grad = 2, eta = 0.1 -> theta' = 0.8
        let mut params = vec![1.0];
        let mut opt = OptimizerState::new(OptimizerKind::Sgd, 0.1, 1);
        gradient_ascent_update(&mut params, &[2.0], &mut opt).unwrap();
        assert!((params[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn sgd_updates_commute_with_summed_gradients() {
        let mut twice = vec![0.5, -0.25];
        let mut opt = OptimizerState::new(OptimizerKind::Sgd, 0.05, 2);
        gradient_ascent_update(&mut twice, &[1.0, 2.0], &mut opt).unwrap();
        gradient_ascent_update(&mut twice, &[-0.5, 0.75], &mut opt).unwrap();

        let mut once = vec![0.5, -0.25];
        let mut opt2 = OptimizerState::new(OptimizerKind::Sgd, 0.05, 2);
        gradient_ascent_update(&mut once, &[0.5, 2.75], &mut opt2).unwrap();
        for (a, b) in twice.iter().zip(&once) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_gradient_aborts_unchanged() {
        let mut params = vec![1.0, 2.0];
        let mut opt = OptimizerState::new(OptimizerKind::Adam, 0.1, 2);
        let err = gradient_ascent_update(&mut params, &[f64::NAN, 0.0], &mut opt).unwrap_err();
        assert_eq!(err, LearnError::NonFinite("gradient"));
        assert_eq!(params, vec![1.0, 2.0]);
        assert_eq!(opt.step, 0);
    }

    #[test]
    fn adam_first_step_moves_by_roughly_eta() {
        // bias correction makes the first Adam step ~ eta * sign(grad)
        let mut params = vec![0.0];
        let mut opt = OptimizerState::new(OptimizerKind::Adam, 0.01, 1);
        gradient_ascent_update(&mut params, &[3.0], &mut opt).unwrap();
        assert!((params[0] + 0.01).abs() < 1e-6);
    }
}
