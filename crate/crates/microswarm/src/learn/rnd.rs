//! Random network distillation: an intrinsic reward that pushes agents
//! toward unseen regions of their state space. A fixed, randomly drawn
//! target network embeds each state; a trainable predictor regresses onto
//! the target, so its squared error is large exactly where the agent has
//! not been.

use ndarray::Array2;

use crate::rng::{RngStream, StreamPurpose};

use super::mlp::Mlp;
use super::LearnError;

/// Running standard deviation (Welford), used to normalize the intrinsic
/// reward scale. Reports 1 until two samples exist; floored at 1e-8.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunningStd {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStd {
    pub fn new() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn std(&self) -> f64 {
        if self.count < 2 {
            return 1.0;
        }
        (self.m2 / (self.count - 1) as f64).sqrt().max(1e-8)
    }
}

impl Default for RunningStd {
    fn default() -> Self {
        Self::new()
    }
}

/// RND state: frozen target, trainable predictor, reward normalizer.
pub struct RndState {
    target: Mlp,
    predictor: Mlp,
    normalizer: RunningStd,
}

impl RndState {
    /// Both networks share the shape input -> hidden -> embedding; their
    /// parameters come from separate seed-derived streams so the initial
    /// prediction error is nonzero.
    pub fn new(input_dim: usize, hidden: &[usize], embedding_dim: usize, seed: u64, tag: u32) -> Self {
        let mut shape = vec![input_dim];
        shape.extend_from_slice(hidden);
        shape.push(embedding_dim);
        let mut target_rng = RngStream::for_species(seed, StreamPurpose::RndTarget, tag);
        let mut predictor_rng = RngStream::for_species(seed, StreamPurpose::RndPredictor, tag);
        Self {
            target: Mlp::init(&shape, false, &mut target_rng),
            predictor: Mlp::init(&shape, false, &mut predictor_rng),
            normalizer: RunningStd::new(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.target.input_dim()
    }

    pub fn target_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.target.write_params(&mut out);
        out
    }

    /// Test hook: makes the predictor an exact copy of the target.
    pub fn copy_target_to_predictor(&mut self) {
        self.predictor = self.target.clone();
    }

    /// Raw squared embedding error for one state.
    pub fn novelty(&self, state: &[f64]) -> Result<f64, LearnError> {
        if state.len() != self.input_dim() {
            return Err(LearnError::WidthMismatch {
                expected: self.input_dim(),
                got: state.len(),
            });
        }
        let x = Array2::from_shape_vec((1, state.len()), state.to_vec()).unwrap();
        let t = self.target.forward(&x)?;
        let p = self.predictor.forward(&x)?;
        Ok((&t - &p).iter().map(|d| d * d).sum())
    }

    /// Intrinsic reward: raw novelty divided by the running standard
    /// deviation of past raw novelties. Nonnegative; updates the normalizer.
    pub fn reward(&mut self, state: &[f64]) -> Result<f64, LearnError> {
        let raw = self.novelty(state)?;
        let normalizer = self.normalizer.std();
        self.normalizer.push(raw);
        Ok(raw / normalizer)
    }

    /// One gradient step minimizing the mean squared embedding error over
    /// the batch; the target never changes. Returns the pre-step loss.
    pub fn train(&mut self, states: &Array2<f64>, eta: f64) -> Result<f64, LearnError> {
        if states.nrows() == 0 {
            return Err(LearnError::EmptyBatch);
        }
        let n = states.nrows() as f64;
        let targets = self.target.forward(states)?;
        let (preds, cache) = self.predictor.forward_cached(states)?;
        let diff = &preds - &targets;
        let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;
        let dpred = diff.mapv(|d| 2.0 * d / n);
        let (grads, _) = self.predictor.backward(&cache, &dpred);
        if grads
            .layers
            .iter()
            .any(|l| l.w.iter().chain(l.b.iter()).any(|g| !g.is_finite()))
        {
            return Err(LearnError::NonFinite("gradient"));
        }
        for (layer, grad) in self.predictor.layers.iter_mut().zip(&grads.layers) {
            layer.w.zip_mut_with(&grad.w, |p, &g| *p -= eta * g);
            layer.b.zip_mut_with(&grad.b, |p, &g| *p -= eta * g);
        }
        Ok(loss)
    }

    /// Mean raw novelty over a batch of states, without touching the
    /// normalizer. Useful for train-and-compare experiments.
    pub fn mean_novelty(&self, states: &Array2<f64>) -> Result<f64, LearnError> {
        let mut total = 0.0;
        for row in states.rows() {
            total += self.novelty(row.as_slice().unwrap())?;
        }
        Ok(total / states.nrows().max(1) as f64)
    }
}
