//! Actor-critic policy networks: one forward pass maps an observable batch
//! to action logits and state values, in either a disjoint (separate actor
//! and critic stacks) or shared-trunk arrangement.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::rng::RngStream;

use super::mlp::{Mlp, MlpCache, MlpGrads};
use super::LearnError;

/// How the actor and critic share parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// Independent actor and critic stacks (the default).
    #[default]
    Disjoint,
    /// One rectified trunk feeding a linear actor head and critic head.
    SharedTrunk,
}

enum Body {
    Disjoint { actor: Mlp, critic: Mlp },
    Shared { trunk: Mlp, actor_head: Mlp, critic_head: Mlp },
}

/// Parameterized map from observable vectors to (action logits, state value).
pub struct PolicyNetwork {
    input_dim: usize,
    n_actions: usize,
    hidden: Vec<usize>,
    body: Body,
}

/// Cached activations from `forward_cached`.
pub struct PolicyCache {
    actor: MlpCache,
    critic: MlpCache,
    trunk: Option<(MlpCache, Array2<f64>)>,
}

/// Gradients for every parameter, in flat-parameter order.
pub struct PolicyGrads {
    parts: Vec<MlpGrads>,
}

impl PolicyGrads {
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for part in &self.parts {
            part.write_flat(&mut out);
        }
        out
    }
}

impl PolicyNetwork {
    /// Builds a network with the given hidden widths; parameters are drawn
    /// from the seed-controlled stream.
    pub fn new(
        arch: Architecture,
        input_dim: usize,
        hidden: &[usize],
        n_actions: usize,
        rng: &mut RngStream,
    ) -> Self {
        let body = match arch {
            Architecture::Disjoint => {
                let mut actor_shape = vec![input_dim];
                actor_shape.extend_from_slice(hidden);
                actor_shape.push(n_actions);
                let mut critic_shape = vec![input_dim];
                critic_shape.extend_from_slice(hidden);
                critic_shape.push(1);
                Body::Disjoint {
                    actor: Mlp::init(&actor_shape, false, rng),
                    critic: Mlp::init(&critic_shape, false, rng),
                }
            }
            Architecture::SharedTrunk => {
                let mut trunk_shape = vec![input_dim];
                trunk_shape.extend_from_slice(hidden);
                let trunk_out = *trunk_shape.last().unwrap();
                Body::Shared {
                    trunk: Mlp::init(&trunk_shape, true, rng),
                    actor_head: Mlp::init(&[trunk_out, n_actions], false, rng),
                    critic_head: Mlp::init(&[trunk_out, 1], false, rng),
                }
            }
        };
        Self {
            input_dim,
            n_actions,
            hidden: hidden.to_vec(),
            body,
        }
    }

    /// All-zero parameters; logits become uniform and values zero.
    pub fn zeros(
        arch: Architecture,
        input_dim: usize,
        hidden: &[usize],
        n_actions: usize,
    ) -> Self {
        let mut net = Self::new(arch, input_dim, hidden, n_actions, &mut RngStream::new(0, 0));
        let zeroed = vec![0.0; net.param_count()];
        net.set_params(&zeroed).unwrap();
        net
    }

    pub fn architecture(&self) -> Architecture {
        match self.body {
            Body::Disjoint { .. } => Architecture::Disjoint,
            Body::Shared { .. } => Architecture::SharedTrunk,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    /// Deterministic forward pass; the softmax of each logits row is a
    /// probability vector.
    pub fn forward(&self, x: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>), LearnError> {
        let (logits, values, _) = self.forward_cached(x)?;
        Ok((logits, values))
    }

    pub fn forward_cached(
        &self,
        x: &Array2<f64>,
    ) -> Result<(Array2<f64>, Array1<f64>, PolicyCache), LearnError> {
        if x.ncols() != self.input_dim {
            return Err(LearnError::WidthMismatch {
                expected: self.input_dim,
                got: x.ncols(),
            });
        }
        match &self.body {
            Body::Disjoint { actor, critic } => {
                let (logits, actor_cache) = actor.forward_cached(x)?;
                let (value_col, critic_cache) = critic.forward_cached(x)?;
                Ok((
                    logits,
                    value_col.index_axis(Axis(1), 0).to_owned(),
                    PolicyCache {
                        actor: actor_cache,
                        critic: critic_cache,
                        trunk: None,
                    },
                ))
            }
            Body::Shared {
                trunk,
                actor_head,
                critic_head,
            } => {
                let (h, trunk_cache) = trunk.forward_cached(x)?;
                let (logits, actor_cache) = actor_head.forward_cached(&h)?;
                let (value_col, critic_cache) = critic_head.forward_cached(&h)?;
                Ok((
                    logits,
                    value_col.index_axis(Axis(1), 0).to_owned(),
                    PolicyCache {
                        actor: actor_cache,
                        critic: critic_cache,
                        trunk: Some((trunk_cache, h)),
                    },
                ))
            }
        }
    }

    /// Reverse pass: given d(loss)/d(logits) and d(loss)/d(values), returns
    /// gradients for every parameter.
    pub fn backward(
        &self,
        cache: &PolicyCache,
        dlogits: &Array2<f64>,
        dvalues: &Array1<f64>,
    ) -> PolicyGrads {
        let n = dvalues.len();
        let dvalue_col = dvalues.clone().into_shape_with_order((n, 1)).unwrap();
        match &self.body {
            Body::Disjoint { actor, critic } => {
                let (actor_grads, _) = actor.backward(&cache.actor, dlogits);
                let (critic_grads, _) = critic.backward(&cache.critic, &dvalue_col);
                PolicyGrads {
                    parts: vec![actor_grads, critic_grads],
                }
            }
            Body::Shared {
                trunk,
                actor_head,
                critic_head,
            } => {
                let (actor_grads, dh_actor) = actor_head.backward(&cache.actor, dlogits);
                let (critic_grads, dh_critic) = critic_head.backward(&cache.critic, &dvalue_col);
                let dh = dh_actor + dh_critic;
                let trunk_cache = &cache.trunk.as_ref().unwrap().0;
                let (trunk_grads, _) = trunk.backward(trunk_cache, &dh);
                PolicyGrads {
                    parts: vec![trunk_grads, actor_grads, critic_grads],
                }
            }
        }
    }

    fn mlps(&self) -> Vec<&Mlp> {
        match &self.body {
            Body::Disjoint { actor, critic } => vec![actor, critic],
            Body::Shared {
                trunk,
                actor_head,
                critic_head,
            } => vec![trunk, actor_head, critic_head],
        }
    }

    fn mlps_mut(&mut self) -> Vec<&mut Mlp> {
        match &mut self.body {
            Body::Disjoint { actor, critic } => vec![actor, critic],
            Body::Shared {
                trunk,
                actor_head,
                critic_head,
            } => vec![trunk, actor_head, critic_head],
        }
    }

    pub fn param_count(&self) -> usize {
        self.mlps().iter().map(|m| m.param_count()).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for mlp in self.mlps() {
            mlp.write_params(&mut out);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<(), LearnError> {
        if params.len() != self.param_count() {
            return Err(LearnError::ParamCountMismatch);
        }
        let mut iter = params.iter().copied();
        for mlp in self.mlps_mut() {
            mlp.read_params(&mut iter)?;
        }
        Ok(())
    }

    /// Layer shapes of each component, used by checkpoints.
    pub fn component_shapes(&self) -> Vec<Vec<usize>> {
        self.mlps().iter().map(|m| m.shape()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_network_is_uniform_with_zero_value() {
        let net = PolicyNetwork::zeros(Architecture::Disjoint, 3, &[12, 12], 4);
        let x = array![[0.4, -1.0, 2.0]];
        let (logits, values) = net.forward(&x).unwrap();
        let probs = super::super::softmax(&logits);
        for k in 0..4 {
            assert!((probs[[0, k]] - 0.25).abs() < 1e-12);
        }
        assert_eq!(values[0], 0.0);
    }

    #[test]
    fn softmax_rows_normalize() {
        let mut rng = RngStream::new(31, 0);
        for arch in [Architecture::Disjoint, Architecture::SharedTrunk] {
            let net = PolicyNetwork::new(arch, 5, &[12, 12], 3, &mut rng);
            let x = Array2::from_shape_fn((4, 5), |_| rng.next_gaussian());
            let (logits, _) = net.forward(&x).unwrap();
            let probs = super::super::softmax(&logits);
            for row in probs.rows() {
                assert!((row.sum() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn batch_of_identical_inputs_gives_identical_rows() {
        let mut rng = RngStream::new(32, 0);
        let net = PolicyNetwork::new(Architecture::SharedTrunk, 2, &[8], 3, &mut rng);
        let x = array![[1.0, -1.0], [1.0, -1.0]];
        let (logits, values) = net.forward(&x).unwrap();
        assert_eq!(logits.row(0), logits.row(1));
        assert_eq!(values[0], values[1]);
    }

    #[test]
    fn width_mismatch_rejected() {
        let net = PolicyNetwork::zeros(Architecture::Disjoint, 3, &[4], 2);
        let x = Array2::zeros((1, 5));
        assert!(matches!(
            net.forward(&x),
            Err(LearnError::WidthMismatch { expected: 3, got: 5 })
        ));
    }

    #[test]
    fn params_round_trip_both_architectures() {
        let mut rng = RngStream::new(33, 0);
        for arch in [Architecture::Disjoint, Architecture::SharedTrunk] {
            let net = PolicyNetwork::new(arch, 4, &[12, 12], 3, &mut rng);
            let params = net.params();
            assert_eq!(params.len(), net.param_count());
            let mut copy = PolicyNetwork::zeros(arch, 4, &[12, 12], 3);
            copy.set_params(&params).unwrap();
            assert_eq!(copy.params(), params);
        }
    }

    #[test]
    fn backward_shapes_match_parameters() {
        let mut rng = RngStream::new(34, 0);
        for arch in [Architecture::Disjoint, Architecture::SharedTrunk] {
            let net = PolicyNetwork::new(arch, 3, &[6], 4, &mut rng);
            let x = Array2::from_shape_fn((5, 3), |_| rng.next_gaussian());
            let (_, _, cache) = net.forward_cached(&x).unwrap();
            let dlogits = Array2::from_elem((5, 4), 0.1);
            let dvalues = Array1::from_elem(5, 0.2);
            let grads = net.backward(&cache, &dlogits, &dvalues);
            assert_eq!(grads.to_flat().len(), net.param_count());
        }
    }
}
