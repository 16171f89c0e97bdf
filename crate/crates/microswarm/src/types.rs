//! Shared domain types: particle snapshots, control actions, and the
//! physical/numerical parameter set.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

/// Director-norm tolerance enforced after every engine step.
pub const DIRECTOR_TOL: f64 = 1e-9;

/// Boundary handling at the box walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Reflecting,
    Periodic,
}

/// Per-particle state snapshot, the sole currency between engines and
/// control models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Colloid {
    pub id: u32,
    #[serde(rename = "type")]
    pub species: u32,
    pub pos: Vec3,
    pub director: Vec3,
    pub velocity: Vec3,
}

impl Colloid {
    pub fn new(id: u32, species: u32, pos: Vec3, director: Vec3) -> Self {
        Self {
            id,
            species,
            pos,
            director,
            velocity: Vec3::ZERO,
        }
    }
}

/// A control decision for one particle over one time slice.
///
/// `force` acts along the particle's director; `torque` steers it;
/// `new_direction`, when set, replaces the director outright and the torque
/// is ignored for that step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    pub force: f64,
    pub torque: Vec3,
    pub new_direction: Option<Vec3>,
}

impl Action {
    pub fn with_force(force: f64) -> Self {
        Self {
            force,
            ..Self::default()
        }
    }

    pub fn with_torque(torque: Vec3) -> Self {
        Self {
            torque,
            ..Self::default()
        }
    }

    pub fn with_direction(direction: Vec3, force: f64) -> Self {
        Self {
            force,
            torque: Vec3::ZERO,
            new_direction: Some(direction),
        }
    }

    pub fn is_noop(&self) -> bool {
        self.force == 0.0 && self.torque == Vec3::ZERO && self.new_direction.is_none()
    }

    /// Checks the direction-override unit-norm invariant.
    pub fn validate(&self) -> Result<(), ParamsError> {
        if let Some(d) = self.new_direction {
            if !d.is_finite() || (d.norm() - 1.0).abs() > DIRECTOR_TOL {
                return Err(ParamsError::NonUnitDirection { norm: d.norm() });
            }
        }
        if !self.force.is_finite() || !self.torque.is_finite() {
            return Err(ParamsError::NonFiniteAction);
        }
        Ok(())
    }
}

/// Physical and numerical constants of one simulation, in reduced units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Translational friction coefficient.
    pub gamma_t: f64,
    /// Rotational friction coefficient.
    pub gamma_r: f64,
    /// Thermal energy k_B * T.
    pub kt: f64,
    /// Integrator timestep.
    pub dt: f64,
    /// Spatial dimension, 2 or 3.
    pub dim: usize,
    /// Per-axis box lengths; z is ignored in 2D.
    pub box_lengths: Vec3,
    /// Integrator steps between successive action queries.
    pub steps_per_slice: u32,
    pub boundary: Boundary,
}

impl SimParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(self.gamma_t > 0.0) {
            return Err(ParamsError::NonPositive { field: "gamma_t" });
        }
        if !(self.gamma_r > 0.0) {
            return Err(ParamsError::NonPositive { field: "gamma_r" });
        }
        if !(self.dt > 0.0) {
            return Err(ParamsError::NonPositive { field: "dt" });
        }
        if !(self.kt >= 0.0) {
            return Err(ParamsError::NegativeKt { value: self.kt });
        }
        if self.dim != 2 && self.dim != 3 {
            return Err(ParamsError::BadDimension { dim: self.dim });
        }
        if self.steps_per_slice < 1 {
            return Err(ParamsError::NonPositive {
                field: "steps_per_slice",
            });
        }
        if !(self.box_lengths.x > 0.0) || !(self.box_lengths.y > 0.0) {
            return Err(ParamsError::NonPositive { field: "box" });
        }
        if self.dim == 3 && !(self.box_lengths.z > 0.0) {
            return Err(ParamsError::NonPositive { field: "box.z" });
        }
        Ok(())
    }

    /// Translational diffusion coefficient kT / gamma_t.
    pub fn diffusion_t(&self) -> f64 {
        self.kt / self.gamma_t
    }

    /// Rotational diffusion coefficient kT / gamma_r.
    pub fn diffusion_r(&self) -> f64 {
        self.kt / self.gamma_r
    }
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            gamma_t: 1.0,
            gamma_r: 1.0,
            kt: 1.0,
            dt: 1e-3,
            dim: 2,
            box_lengths: Vec3::new(10.0, 10.0, 0.0),
            steps_per_slice: 1,
            boundary: Boundary::Periodic,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("{field} must be strictly positive")]
    NonPositive { field: &'static str },
    #[error("kT must be non-negative, got {value}")]
    NegativeKt { value: f64 },
    #[error("dim must be 2 or 3, got {dim}")]
    BadDimension { dim: usize },
    #[error("new_direction must have unit norm, got |d| = {norm}")]
    NonUnitDirection { norm: f64 },
    #[error("action contains non-finite values")]
    NonFiniteAction,
}
