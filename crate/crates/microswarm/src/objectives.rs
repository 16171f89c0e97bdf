//! Tasks: reward-producing objectives and the kill switch that ends a run.
//!
//! A task scores the current system state for the species it supervises;
//! large positive rewards mean the task is being achieved. Once a task
//! raises its kill switch the flag latches until the environment resets.

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::Vec3;
use crate::sensing::ConcentrationField;
use crate::types::Colloid;

/// Per-slice task result: one reward per supervised particle plus the
/// (latched) kill flag.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutput {
    pub rewards: Vec<f64>,
    pub kill: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum TaskError {
    #[error("rod species {species} has fewer than 2 particles")]
    RodMissing { species: u32 },
    #[error("tasks and weights differ in length: {tasks} vs {weights}")]
    WeightMismatch { tasks: usize, weights: usize },
    #[error("cannot aggregate an empty reward list")]
    EmptyRewards,
    #[error("sub-tasks disagree on reward count: {0} vs {1}")]
    RewardCountMismatch(usize, usize),
}

/// Objective for one controlled species. `evaluate` returns one reward per
/// colloid of `species`, in colloid order; history-carrying tasks reset
/// with the environment.
pub trait Task: Send {
    fn evaluate(
        &mut self,
        colloids: &[Colloid],
        species: u32,
        time: f64,
    ) -> Result<TaskOutput, TaskError>;

    fn reset(&mut self) {}
}

fn count_species(colloids: &[Colloid], species: u32) -> usize {
    colloids.iter().filter(|c| c.species == species).count()
}

// ---------------------------------------------------------------------------
// Reward aggregation
// ---------------------------------------------------------------------------

/// How per-agent rewards are shared within a species.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardAggregation {
    /// Every agent keeps its own reward.
    Individual,
    /// Every agent receives the arithmetic mean of all rewards.
    TeamAverage,
}

/// Applies the aggregation mode; errors on an empty list.
pub fn aggregate_rewards(
    rewards: &[f64],
    mode: RewardAggregation,
) -> Result<Vec<f64>, TaskError> {
    if rewards.is_empty() {
        return Err(TaskError::EmptyRewards);
    }
    match mode {
        RewardAggregation::Individual => Ok(rewards.to_vec()),
        RewardAggregation::TeamAverage => {
            let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
            Ok(vec![mean; rewards.len()])
        }
    }
}

// ---------------------------------------------------------------------------
// RotateRod
// ---------------------------------------------------------------------------

/// Rewards agents for rotating a rod: a designated passive species whose
/// orientation is taken as the principal axis of its particle positions
/// (in the xy plane). Reward per agent is `scale * sign * d(theta)` since
/// the previous slice; the first evaluation yields 0.
pub struct RotateRod {
    pub rod_species: u32,
    pub scale: f64,
    /// +1.0 rewards counterclockwise rotation, -1.0 clockwise.
    pub sign: f64,
    prev_angle: Option<f64>,
    latched: bool,
}

impl RotateRod {
    pub fn new(rod_species: u32, scale: f64) -> Self {
        Self {
            rod_species,
            scale,
            sign: 1.0,
            prev_angle: None,
            latched: false,
        }
    }

    /// Orientation of the principal axis of the rod particle positions,
    /// modulo pi (the axis has no head).
    pub fn rod_axis_angle(colloids: &[Colloid], rod_species: u32) -> Option<f64> {
        let rod: Vec<Vec3> = colloids
            .iter()
            .filter(|c| c.species == rod_species)
            .map(|c| c.pos)
            .collect();
        if rod.len() < 2 {
            return None;
        }
        let n = rod.len() as f64;
        let mean = rod.iter().fold(Vec3::ZERO, |acc, &p| acc + p) / n;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for p in &rod {
            let d = *p - mean;
            sxx += d.x * d.x;
            syy += d.y * d.y;
            sxy += d.x * d.y;
        }
        // eigenvector angle of the 2x2 covariance's leading eigenvalue
        Some(0.5 * (2.0 * sxy).atan2(sxx - syy))
    }
}

/// Wraps an axis-angle difference into (-pi/2, pi/2].
fn wrap_half_pi(delta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut d = delta % pi;
    if d > pi / 2.0 {
        d -= pi;
    } else if d <= -pi / 2.0 {
        d += pi;
    }
    d
}

impl Task for RotateRod {
    fn evaluate(
        &mut self,
        colloids: &[Colloid],
        species: u32,
        _time: f64,
    ) -> Result<TaskOutput, TaskError> {
        let n_agents = count_species(colloids, species);
        let angle = Self::rod_axis_angle(colloids, self.rod_species).ok_or(
            TaskError::RodMissing {
                species: self.rod_species,
            },
        )?;
        let reward = match self.prev_angle {
            Some(prev) => self.scale * self.sign * wrap_half_pi(angle - prev),
            None => 0.0,
        };
        self.prev_angle = Some(angle);
        Ok(TaskOutput {
            rewards: vec![reward; n_agents],
            kill: self.latched,
        })
    }

    fn reset(&mut self) {
        self.prev_angle = None;
        self.latched = false;
    }
}

// ---------------------------------------------------------------------------
// GradientTask
// ---------------------------------------------------------------------------

/// Chemotaxis objective: rewards each agent for moving up a concentration
/// field, `scale * max(0, dc)` per slice, or the signed difference when
/// `signed` is set. The first evaluation per particle yields 0.
pub struct GradientTask {
    pub field: ConcentrationField,
    pub scale: f64,
    pub signed: bool,
    history: HashMap<u32, f64>,
    latched: bool,
}

impl GradientTask {
    pub fn new(field: ConcentrationField, scale: f64) -> Self {
        Self {
            field,
            scale,
            signed: false,
            history: HashMap::new(),
            latched: false,
        }
    }

    pub fn signed(field: ConcentrationField, scale: f64) -> Self {
        Self {
            signed: true,
            ..Self::new(field, scale)
        }
    }
}

impl Task for GradientTask {
    fn evaluate(
        &mut self,
        colloids: &[Colloid],
        species: u32,
        _time: f64,
    ) -> Result<TaskOutput, TaskError> {
        let mut rewards = Vec::new();
        for c in colloids.iter().filter(|c| c.species == species) {
            let now = self.field.value(c.pos);
            let reward = match self.history.insert(c.id, now) {
                Some(prev) => {
                    let delta = now - prev;
                    if self.signed {
                        self.scale * delta
                    } else {
                        self.scale * delta.max(0.0)
                    }
                }
                None => 0.0,
            };
            rewards.push(reward);
        }
        Ok(TaskOutput {
            rewards,
            kill: self.latched,
        })
    }

    fn reset(&mut self) {
        self.history.clear();
        self.latched = false;
    }
}

// ---------------------------------------------------------------------------
// Multitasking
// ---------------------------------------------------------------------------

/// Weighted sum of several tasks; the combined kill switch is the OR over
/// the sub-tasks.
pub struct Multitasking {
    tasks: Vec<Box<dyn Task>>,
    weights: Vec<f64>,
}

impl Multitasking {
    pub fn new(tasks: Vec<Box<dyn Task>>, weights: Vec<f64>) -> Result<Self, TaskError> {
        if tasks.len() != weights.len() {
            return Err(TaskError::WeightMismatch {
                tasks: tasks.len(),
                weights: weights.len(),
            });
        }
        Ok(Self { tasks, weights })
    }
}

impl Task for Multitasking {
    fn evaluate(
        &mut self,
        colloids: &[Colloid],
        species: u32,
        time: f64,
    ) -> Result<TaskOutput, TaskError> {
        let mut combined: Option<Vec<f64>> = None;
        let mut kill = false;
        for (task, &weight) in self.tasks.iter_mut().zip(&self.weights) {
            let out = task.evaluate(colloids, species, time)?;
            kill |= out.kill;
            match combined.as_mut() {
                None => {
                    combined = Some(out.rewards.iter().map(|r| r * weight).collect());
                }
                Some(acc) => {
                    if acc.len() != out.rewards.len() {
                        return Err(TaskError::RewardCountMismatch(acc.len(), out.rewards.len()));
                    }
                    for (a, r) in acc.iter_mut().zip(&out.rewards) {
                        *a += r * weight;
                    }
                }
            }
        }
        Ok(TaskOutput {
            rewards: combined.unwrap_or_default(),
            kill,
        })
    }

    fn reset(&mut self) {
        for task in self.tasks.iter_mut() {
            task.reset();
        }
    }
}

// ---------------------------------------------------------------------------
// Kill switch
// ---------------------------------------------------------------------------

/// Predicate that ends the current run when it holds.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KillCondition {
    /// Simulation time exceeds the limit.
    MaxTime { limit: f64 },
    /// Any particle leaves the axis-aligned safe region.
    OutsideRegion { min: Vec3, max: Vec3 },
    /// Mean field value over the supervised particles exceeds the threshold.
    FieldSuccess {
        field: ConcentrationField,
        threshold: f64,
    },
}

/// Evaluates a kill predicate against the current state.
pub fn kill_switch_condition(colloids: &[Colloid], condition: &KillCondition, time: f64) -> bool {
    match condition {
        KillCondition::MaxTime { limit } => time > *limit,
        KillCondition::OutsideRegion { min, max } => colloids.iter().any(|c| {
            c.pos.x < min.x
                || c.pos.y < min.y
                || c.pos.z < min.z
                || c.pos.x > max.x
                || c.pos.y > max.y
                || c.pos.z > max.z
        }),
        KillCondition::FieldSuccess { field, threshold } => {
            if colloids.is_empty() {
                return false;
            }
            let mean = colloids.iter().map(|c| field.value(c.pos)).sum::<f64>()
                / colloids.len() as f64;
            mean > *threshold
        }
    }
}

/// Task adapter for a kill predicate: zero rewards, latched kill.
pub struct KillSwitchTask {
    pub condition: KillCondition,
    latched: bool,
}

impl KillSwitchTask {
    pub fn new(condition: KillCondition) -> Self {
        Self {
            condition,
            latched: false,
        }
    }
}

impl Task for KillSwitchTask {
    fn evaluate(
        &mut self,
        colloids: &[Colloid],
        species: u32,
        time: f64,
    ) -> Result<TaskOutput, TaskError> {
        if kill_switch_condition(colloids, &self.condition, time) {
            self.latched = true;
        }
        Ok(TaskOutput {
            rewards: vec![0.0; count_species(colloids, species)],
            kill: self.latched,
        })
    }

    fn reset(&mut self) {
        self.latched = false;
    }
}
