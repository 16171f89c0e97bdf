//! Versioned JSON checkpoints for policy networks: shapes, parameters
//! (binary64, exact through the decimal round-trip), optimizer state, and
//! the update count. Loading rejects shape mismatches.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::optimizer::OptimizerState;
use super::policy::{Architecture, PolicyNetwork};
use super::LearnError;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyCheckpoint {
    pub version: u32,
    pub species: u32,
    pub architecture: Architecture,
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub n_actions: usize,
    pub params: Vec<f64>,
    pub optimizer: OptimizerState,
    pub update_count: u64,
}

impl PolicyCheckpoint {
    pub fn capture(
        species: u32,
        net: &PolicyNetwork,
        optimizer: &OptimizerState,
        update_count: u64,
    ) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            species,
            architecture: net.architecture(),
            input_dim: net.input_dim(),
            hidden: net.hidden().to_vec(),
            n_actions: net.n_actions(),
            params: net.params(),
            optimizer: optimizer.clone(),
            update_count,
        }
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        fs::write(path, serde_json::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self, io::Error> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn shape_signature(&self) -> String {
        format!(
            "{:?}/{}x{:?}x{}",
            self.architecture, self.input_dim, self.hidden, self.n_actions
        )
    }

    /// Restores parameters and optimizer state into an existing network;
    /// errors if the network's shape differs from the checkpoint's.
    pub fn restore(
        &self,
        net: &mut PolicyNetwork,
        optimizer: &mut OptimizerState,
    ) -> Result<u64, LearnError> {
        if self.version != CHECKPOINT_VERSION {
            return Err(LearnError::CheckpointVersion(self.version));
        }
        let expected = format!(
            "{:?}/{}x{:?}x{}",
            net.architecture(),
            net.input_dim(),
            net.hidden(),
            net.n_actions()
        );
        let found = self.shape_signature();
        if expected != found || self.params.len() != net.param_count() {
            return Err(LearnError::ShapeMismatch { expected, found });
        }
        net.set_params(&self.params)?;
        *optimizer = self.optimizer.clone();
        Ok(self.update_count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::optimizer::OptimizerKind;
    use crate::rng::RngStream;

    #[test]
    fn checkpoint_round_trips_exactly() {
        let mut rng = RngStream::new(44, 0);
        let net = PolicyNetwork::new(Architecture::Disjoint, 4, &[12, 12], 3, &mut rng);
        let opt = OptimizerState::new(OptimizerKind::Adam, 0.01, net.param_count());
        let ck = PolicyCheckpoint::capture(2, &net, &opt, 17);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.json");
        ck.save(&path).unwrap();
        let loaded = PolicyCheckpoint::load(&path).unwrap();

        let mut restored = PolicyNetwork::zeros(Architecture::Disjoint, 4, &[12, 12], 3);
        let mut opt2 = OptimizerState::new(OptimizerKind::Sgd, 1.0, restored.param_count());
        let count = loaded.restore(&mut restored, &mut opt2).unwrap();
        assert_eq!(count, 17);
        assert_eq!(opt2, opt);
        // binary64 values survive the decimal round-trip bit for bit
        let a = net.params();
        let b = restored.params();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut rng = RngStream::new(45, 0);
        let net = PolicyNetwork::new(Architecture::Disjoint, 4, &[12], 3, &mut rng);
        let opt = OptimizerState::new(OptimizerKind::Sgd, 0.01, net.param_count());
        let ck = PolicyCheckpoint::capture(0, &net, &opt, 1);

        let mut other = PolicyNetwork::zeros(Architecture::Disjoint, 4, &[8], 3);
        let mut opt2 = OptimizerState::new(OptimizerKind::Sgd, 0.01, other.param_count());
        assert!(matches!(
            ck.restore(&mut other, &mut opt2),
            Err(LearnError::ShapeMismatch { .. })
        ));
    }
}
