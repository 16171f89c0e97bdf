//! Brownian-dynamics engine: Euler-Maruyama integration of the overdamped
//! translational and rotational Langevin equations, with optional WCA
//! pair repulsion and the two-method environment contract
//! (`integrate` / `particle_data`) that control models are written against.

use thiserror::Error;

use crate::geometry::{minimum_image_displacement, rotate_about_axis, Vec3};
use crate::rng::{RngStream, StreamPurpose};
use crate::types::{Action, Boundary, Colloid, ParamsError, SimParams, DIRECTOR_TOL};

/// WCA (purely repulsive truncated Lennard-Jones) interaction settings.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WcaConfig {
    pub enabled: bool,
    pub sigma: f64,
    pub epsilon: f64,
    /// Neighbor-search cutoff; the force itself vanishes beyond 2^(1/6) sigma.
    pub cutoff: f64,
}

impl WcaConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            sigma: 1.0,
            epsilon: 1.0,
            cutoff: wca_cutoff(1.0),
        }
    }

    pub fn new(sigma: f64, epsilon: f64) -> Self {
        Self {
            enabled: true,
            sigma,
            epsilon,
            cutoff: wca_cutoff(sigma),
        }
    }
}

/// 2^(1/6) sigma, the minimum of the LJ potential and the WCA cutoff.
pub fn wca_cutoff(sigma: f64) -> f64 {
    2f64.powf(1.0 / 6.0) * sigma
}

/// WCA force on particle i given the separation vector from i to j.
///
/// Returns zero at and beyond the cutoff; inside it the force has magnitude
/// 24 eps (2 (sigma/r)^13 - (sigma/r)^7) / sigma and points from j toward i.
/// Separations below 1e-6 sigma are clamped and counted via the returned flag.
pub fn wca_pair_force(r_vec: Vec3, sigma: f64, epsilon: f64) -> (Vec3, bool) {
    let mut r = r_vec.norm();
    let mut overlap = false;
    let floor = 1e-6 * sigma;
    if r < floor {
        r = floor;
        overlap = true;
    }
    if r >= wca_cutoff(sigma) {
        return (Vec3::ZERO, overlap);
    }
    let sr = sigma / r;
    let sr6 = sr.powi(6);
    let magnitude = 24.0 * epsilon * (2.0 * sr6 * sr6 * sr - sr6 * sr) / sigma;
    // unit vector from j to i is -r_vec / |r_vec|; guard the exact-overlap case
    let direction = (-r_vec).normalized().unwrap_or(Vec3::new(1.0, 0.0, 0.0));
    (direction * magnitude, overlap)
}

/// Full system state owned by the engine.
#[derive(Debug, Clone)]
pub struct EngineState {
    pub colloids: Vec<Colloid>,
    pub time: f64,
    pub params: SimParams,
    pub interactions: WcaConfig,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("n_slices must be >= 1")]
    ZeroSlices,
    #[error("action/colloid cardinality: got {got} actions for {expected} colloids")]
    ActionCardinality { got: usize, expected: usize },
    #[error("numerical blow-up at step {step}")]
    NumericalBlowUp { step: u64 },
    #[error("invalid action: {0}")]
    InvalidAction(#[from] ParamsError),
    #[error("force model failed: {0}")]
    ForceModel(String),
    #[error("duplicate colloid id {id}")]
    DuplicateId { id: u32 },
    #[error("engine transport failed: {0}")]
    Transport(String),
}

/// Provider of one action per colloid, queried once per time slice. The
/// engine polls `kill_switch` after each query and terminates the run early
/// once it latches.
pub trait ActionSource {
    fn calc_action(&mut self, colloids: &[Colloid], time: f64) -> Result<Vec<Action>, EngineError>;

    fn kill_switch(&self) -> bool {
        false
    }
}

/// No-op source: every particle drifts passively.
pub struct PassiveSource;

impl ActionSource for PassiveSource {
    fn calc_action(&mut self, colloids: &[Colloid], _time: f64) -> Result<Vec<Action>, EngineError> {
        Ok(vec![Action::default(); colloids.len()])
    }
}

/// The environment contract shared by the local engine and the remote
/// client: step forward in slices, hand back uniform particle snapshots.
pub trait Environment {
    /// Runs `n_slices` iterations of (query actions once, integrate
    /// `steps_per_slice` steps). Returns true if the run terminated early
    /// via the kill switch.
    fn integrate(
        &mut self,
        n_slices: u32,
        source: &mut dyn ActionSource,
    ) -> Result<bool, EngineError>;

    /// Deep snapshot of all particles; mutations never reach the engine.
    fn particle_data(&mut self) -> Result<Vec<Colloid>, EngineError>;

    fn time(&self) -> f64;
}

/// Local Brownian-dynamics engine.
pub struct Engine {
    state: EngineState,
    seed: u64,
    step_count: u64,
    trans_streams: Vec<RngStream>,
    rot_streams: Vec<RngStream>,
    overlap_warnings: u64,
}

impl Engine {
    pub fn new(
        params: SimParams,
        interactions: WcaConfig,
        colloids: Vec<Colloid>,
        seed: u64,
    ) -> Result<Self, EngineError> {
        params.validate()?;
        let mut seen = std::collections::HashSet::new();
        for c in &colloids {
            if !seen.insert(c.id) {
                return Err(EngineError::DuplicateId { id: c.id });
            }
        }
        let trans_streams = colloids
            .iter()
            .map(|c| RngStream::for_particle(seed, StreamPurpose::Translation, c.id))
            .collect();
        let rot_streams = colloids
            .iter()
            .map(|c| RngStream::for_particle(seed, StreamPurpose::Rotation, c.id))
            .collect();
        Ok(Self {
            state: EngineState {
                colloids,
                time: 0.0,
                params,
                interactions,
            },
            seed,
            step_count: 0,
            trans_streams,
            rot_streams,
            overlap_warnings: 0,
        })
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Count of pair separations clamped at the overlap floor so far.
    pub fn overlap_warnings(&self) -> u64 {
        self.overlap_warnings
    }

    /// Interaction forces on every particle from the WCA pair loop.
    /// Forces are accumulated action/reaction symmetric, so the total
    /// momentum transferred per step is zero to rounding.
    fn pair_forces(&mut self) -> Vec<Vec3> {
        let n = self.state.colloids.len();
        let mut forces = vec![Vec3::ZERO; n];
        if !self.state.interactions.enabled {
            return forces;
        }
        let wca = self.state.interactions;
        let cutoff_sq = wca.cutoff * wca.cutoff;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = minimum_image_displacement(
                    self.state.colloids[i].pos,
                    self.state.colloids[j].pos,
                    self.state.params.box_lengths,
                    self.state.params.boundary,
                );
                if d.norm_squared() >= cutoff_sq {
                    continue;
                }
                let (f, overlap) = wca_pair_force(d, wca.sigma, wca.epsilon);
                if overlap {
                    self.overlap_warnings += 1;
                }
                forces[i] += f;
                forces[j] += -f;
            }
        }
        forces
    }

    /// One Euler-Maruyama step for every particle under the given actions.
    fn step(&mut self, actions: &[Action]) -> Result<(), EngineError> {
        self.step_count += 1;
        let forces = self.pair_forces();
        let params = self.state.params;
        for (i, colloid) in self.state.colloids.iter_mut().enumerate() {
            let new_pos = step_translation(
                colloid,
                &actions[i],
                forces[i],
                &params,
                &mut self.trans_streams[i],
            );
            let new_director =
                step_rotation(colloid, &actions[i], Vec3::ZERO, &params, &mut self.rot_streams[i]);
            colloid.velocity = (new_pos - colloid.pos) / params.dt;
            let (folded_pos, folded_dir) = apply_boundary(new_pos, new_director, &params);
            colloid.pos = folded_pos;
            colloid.director = folded_dir;
            if !colloid.pos.is_finite() || !colloid.director.is_finite() {
                return Err(EngineError::NumericalBlowUp {
                    step: self.step_count,
                });
            }
            debug_assert!((colloid.director.norm() - 1.0).abs() <= DIRECTOR_TOL);
        }
        self.state.time += params.dt;
        Ok(())
    }
}

impl Environment for Engine {
    fn integrate(
        &mut self,
        n_slices: u32,
        source: &mut dyn ActionSource,
    ) -> Result<bool, EngineError> {
        if n_slices == 0 {
            return Err(EngineError::ZeroSlices);
        }
        for _ in 0..n_slices {
            let snapshot = self.state.colloids.clone();
            let actions = source.calc_action(&snapshot, self.state.time)?;
            if actions.len() != snapshot.len() {
                return Err(EngineError::ActionCardinality {
                    got: actions.len(),
                    expected: snapshot.len(),
                });
            }
            for action in &actions {
                action.validate()?;
            }
            if source.kill_switch() {
                return Ok(true);
            }
            for _ in 0..self.state.params.steps_per_slice {
                self.step(&actions)?;
            }
        }
        Ok(false)
    }

    fn particle_data(&mut self) -> Result<Vec<Colloid>, EngineError> {
        Ok(self.state.colloids.clone())
    }

    fn time(&self) -> f64 {
        self.state.time
    }
}

/// Translational update:
/// r' = r + dt/gamma_t (F_act e + F_int) + sqrt(2 kT dt / gamma_t) xi,
/// with xi standard normal per axis (x, y and, in 3D, z). Boundary handling
/// is applied by the caller.
pub fn step_translation(
    colloid: &Colloid,
    action: &Action,
    interaction_force: Vec3,
    params: &SimParams,
    rng: &mut RngStream,
) -> Vec3 {
    let drift = (colloid.director * action.force + interaction_force) * (params.dt / params.gamma_t);
    let sigma = (2.0 * params.kt * params.dt / params.gamma_t).sqrt();
    let mut noise = Vec3::ZERO;
    if sigma > 0.0 {
        noise.x = sigma * rng.next_gaussian();
        noise.y = sigma * rng.next_gaussian();
        if params.dim == 3 {
            noise.z = sigma * rng.next_gaussian();
        }
    }
    colloid.pos + drift + noise
}

/// Rotational update: the angular velocity
/// w = torque / gamma_r + sqrt(2 kT / gamma_r) xi_r
/// is projected perpendicular to the director (2D: z axis only) and the
/// director is rotated about it by |w| dt. A `new_direction` override
/// replaces the director outright; torque and noise are skipped that step.
pub fn step_rotation(
    colloid: &Colloid,
    action: &Action,
    interaction_torque: Vec3,
    params: &SimParams,
    rng: &mut RngStream,
) -> Vec3 {
    if let Some(direction) = action.new_direction {
        // validated unit norm upstream
        return direction;
    }
    let sigma = (2.0 * params.kt / params.gamma_r).sqrt();
    let mut omega = (action.torque + interaction_torque) / params.gamma_r;
    if params.dim == 2 {
        // rotation in-plane: only the z component acts
        omega.x = 0.0;
        omega.y = 0.0;
        if sigma > 0.0 {
            omega.z += sigma * rng.next_gaussian();
        }
    } else {
        if sigma > 0.0 {
            omega.x += sigma * rng.next_gaussian();
            omega.y += sigma * rng.next_gaussian();
            omega.z += sigma * rng.next_gaussian();
        }
        // only the component perpendicular to the director steers
        omega = omega - colloid.director * omega.dot(colloid.director);
    }
    let angle = omega.norm() * params.dt;
    if angle == 0.0 {
        return colloid.director;
    }
    let rotated = rotate_about_axis(colloid.director, omega, angle)
        .expect("nonzero angle implies nonzero axis");
    rotated.normalized().unwrap_or(colloid.director)
}

/// Folds a position back into the box. Periodic wraps into [0, L);
/// reflecting mirrors position and flips the director component on each
/// violated axis.
pub fn apply_boundary(pos: Vec3, director: Vec3, params: &SimParams) -> (Vec3, Vec3) {
    let mut p = pos;
    let mut d = director;
    let axes = if params.dim == 2 { 2 } else { 3 };
    for axis in 0..axes {
        let length = params.box_lengths.component(axis);
        if length <= 0.0 {
            continue;
        }
        match params.boundary {
            Boundary::Periodic => {
                let x = p.component(axis);
                p.set_component(axis, x - length * (x / length).floor());
            }
            Boundary::Reflecting => {
                let mut x = p.component(axis);
                let mut flips = 0u32;
                while x < 0.0 || x > length {
                    if x < 0.0 {
                        x = -x;
                    } else {
                        x = 2.0 * length - x;
                    }
                    flips += 1;
                }
                if flips % 2 == 1 {
                    d.set_component(axis, -d.component(axis));
                }
                p.set_component(axis, x);
            }
        }
    }
    (p, d)
}
