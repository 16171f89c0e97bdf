//! Exploration probability decay: zeta(t) = zeta0 * exp(-decay * t / T).

use serde::{Deserialize, Serialize};

/// Evaluates the decay at simulation time `t` within an episode of
/// duration `episode_time`.
pub fn exploration_schedule(zeta0: f64, decay: f64, t: f64, episode_time: f64) -> f64 {
    zeta0 * (-decay * t / episode_time).exp()
}

/// Random-exploration settings: with probability zeta(t) the policy action
/// is replaced by a uniformly random one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplorationState {
    /// Initial exploration probability.
    pub zeta0: f64,
    /// Decay rate epsilon.
    pub decay: f64,
    /// Duration of a single training episode, in simulation time.
    pub episode_time: f64,
}

impl ExplorationState {
    pub fn zeta(&self, t: f64) -> f64 {
        exploration_schedule(self.zeta0, self.decay, t, self.episode_time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_zeta0() {
        assert_eq!(exploration_schedule(0.2, 1.0, 0.0, 10.0), 0.2);
    }

    #[test]
    fn no_decay_is_constant() {
        for t in [0.0, 5.0, 50.0] {
            assert_eq!(exploration_schedule(0.2, 0.0, t, 10.0), 0.2);
        }
    }

    #[test]
    fn full_episode_decays_by_e() {
        let z = exploration_schedule(0.2, 1.0, 10.0, 10.0);
        assert!((z - 0.2 / std::f64::consts::E).abs() < 1e-12);
        assert!((z - 0.073_575_888_234_288_46).abs() < 1e-12);
    }

    #[test]
    fn bounded_by_zeta0() {
        let state = ExplorationState {
            zeta0: 0.3,
            decay: 2.0,
            episode_time: 4.0,
        };
        for k in 0..100 {
            let z = state.zeta(k as f64 * 0.5);
            assert!(z >= 0.0 && z <= state.zeta0);
        }
    }
}
