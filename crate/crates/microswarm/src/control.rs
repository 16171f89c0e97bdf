//! Control layer: per-species agents bundling network, task, observable and
//! action set, the force-function dispatcher the engine queries each slice,
//! classical rule-based agents, and the trajectory buffer feeding updates.

use std::collections::HashSet;

use thiserror::Error;

use crate::engine::{ActionSource, EngineError};
use crate::geometry::Vec3;
use crate::learn::{
    sample_from_logits, ExplorationState, OptimizerState, PolicyNetwork, RndState, UpdateConfig,
};
use crate::objectives::{aggregate_rewards, RewardAggregation, Task, TaskError};
use crate::rng::{RngStream, StreamPurpose};
use crate::sensing::{Observable, SensingError};
use crate::types::{Action, Colloid};

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("uncontrolled species {species}")]
    UncontrolledSpecies { species: u32 },
    #[error("duplicate agent for species {species}")]
    DuplicateSpecies { species: u32 },
    #[error("actor-critic agent needs a non-empty action set")]
    EmptyActions,
    #[error("actor-critic agent needs an observable")]
    MissingObservable,
    #[error("buffer misalignment: {0}")]
    Buffer(String),
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Learn(#[from] crate::learn::LearnError),
}

impl From<ControlError> for EngineError {
    fn from(e: ControlError) -> Self {
        EngineError::ForceModel(e.to_string())
    }
}

/// Where each dispatched action came from; recorded per colloid for
/// diagnostics and trajectory output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Passive,
    Classical { species: u32 },
    Policy {
        species: u32,
        action_index: usize,
        explored: bool,
    },
}

impl Provenance {
    /// Action index for trajectory records; -1 for anything but a policy.
    pub fn action_index(&self) -> i64 {
        match self {
            Provenance::Policy { action_index, .. } => *action_index as i64,
            _ => -1,
        }
    }
}

// ---------------------------------------------------------------------------
// Trajectory buffer
// ---------------------------------------------------------------------------

/// Per-species episode record. Entries are laid out slice-major: slice t
/// holds one row per agent, in colloid order. Rewards for the actions of
/// slice t arrive one query later (the consequence state), so mid-episode
/// the reward arrays trail the others by exactly one slice.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryBuffer {
    pub n_agents: usize,
    pub obs_dim: usize,
    pub observations: Vec<f64>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub rewards_ext: Vec<f64>,
    pub rewards_int: Vec<f64>,
    pub explored: Vec<bool>,
}

impl TrajectoryBuffer {
    pub fn new(n_agents: usize, obs_dim: usize) -> Self {
        Self {
            n_agents,
            obs_dim,
            ..Self::default()
        }
    }

    pub fn n_entries(&self) -> usize {
        self.actions.len()
    }

    pub fn n_slices(&self) -> usize {
        if self.n_agents == 0 {
            0
        } else {
            self.actions.len() / self.n_agents
        }
    }

    /// True when an action slice is still waiting for its reward.
    pub fn has_pending(&self) -> bool {
        self.rewards_ext.len() < self.actions.len()
    }

    /// All per-slice arrays share their length.
    pub fn is_aligned(&self) -> bool {
        let n = self.actions.len();
        self.observations.len() == n * self.obs_dim
            && self.log_probs.len() == n
            && self.values.len() == n
            && self.rewards_ext.len() == n
            && self.rewards_int.len() == n
            && self.explored.len() == n
    }

    pub fn push_step(
        &mut self,
        observations: &[Vec<f64>],
        actions: &[usize],
        log_probs: &[f64],
        values: &[f64],
        explored: &[bool],
    ) -> Result<(), ControlError> {
        if observations.len() != self.n_agents
            || actions.len() != self.n_agents
            || log_probs.len() != self.n_agents
            || values.len() != self.n_agents
            || explored.len() != self.n_agents
        {
            return Err(ControlError::Buffer(format!(
                "push_step expects {} rows",
                self.n_agents
            )));
        }
        if self.has_pending() {
            return Err(ControlError::Buffer(
                "previous slice still awaits rewards".into(),
            ));
        }
        for obs in observations {
            if obs.len() != self.obs_dim {
                return Err(ControlError::Buffer(format!(
                    "observation width {} != {}",
                    obs.len(),
                    self.obs_dim
                )));
            }
            self.observations.extend_from_slice(obs);
        }
        self.actions.extend_from_slice(actions);
        self.log_probs.extend_from_slice(log_probs);
        self.values.extend_from_slice(values);
        self.explored.extend_from_slice(explored);
        Ok(())
    }

    pub fn push_rewards(&mut self, ext: &[f64], int: &[f64]) -> Result<(), ControlError> {
        if !self.has_pending() {
            return Err(ControlError::Buffer("no pending slice to reward".into()));
        }
        if ext.len() != self.n_agents || int.len() != self.n_agents {
            return Err(ControlError::Buffer(format!(
                "push_rewards expects {} rows",
                self.n_agents
            )));
        }
        self.rewards_ext.extend_from_slice(ext);
        self.rewards_int.extend_from_slice(int);
        Ok(())
    }

    pub fn clear(&mut self) {
        self.observations.clear();
        self.actions.clear();
        self.log_probs.clear();
        self.values.clear();
        self.rewards_ext.clear();
        self.rewards_int.clear();
        self.explored.clear();
    }
}

// ---------------------------------------------------------------------------
// Exploration
// ---------------------------------------------------------------------------

/// With probability `zeta`, replaces the policy's action index by a
/// uniformly random one. Returns the executed index and whether it was an
/// exploration override.
pub fn apply_exploration(
    policy_index: usize,
    zeta: f64,
    n_actions: usize,
    rng: &mut RngStream,
) -> (usize, bool) {
    if rng.next_uniform() < zeta {
        (rng.next_index(n_actions), true)
    } else {
        (policy_index, false)
    }
}

// ---------------------------------------------------------------------------
// Classical rules
// ---------------------------------------------------------------------------

/// A fixed rule computing one action for the focal particle from the global
/// state. Classical rules never touch network state.
pub trait ClassicalRule: Send {
    fn act(&self, colloids: &[Colloid], focal: usize) -> Action;
}

/// Swarming rule with alignment, short-range repulsion, attraction, and a
/// homing pull, in the style of force-based flocking drones:
///
/// F = a_align sum(v_j - v_i)
///   + sum[a_repulse r_ij_hat (r_ij < r_repulse) - a_attract r_ij_hat]
///   + a_home (home - r_i),
///
/// summed over same-species neighbors within `r_sense`, with r_ij_hat the
/// unit vector from the neighbor toward the focal particle. The action sets
/// the director straight to F's direction with force min(|F|, f_max).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LymburnSwarm {
    pub home: Vec3,
    pub a_align: f64,
    pub a_repulse: f64,
    pub a_attract: f64,
    pub a_home: f64,
    pub r_sense: f64,
    /// Repulsion range r_c; defaults to half the sensing radius.
    pub r_repulse: f64,
    pub f_max: f64,
}

impl LymburnSwarm {
    pub fn new(home: Vec3, r_sense: f64) -> Self {
        Self {
            home,
            a_align: 1.0,
            a_repulse: 5.0,
            a_attract: 0.5,
            a_home: 0.2,
            r_sense,
            r_repulse: 0.5 * r_sense,
            f_max: 10.0,
        }
    }

    /// Net steering force on the focal particle.
    pub fn net_force(&self, colloids: &[Colloid], focal: usize) -> Vec3 {
        let me = &colloids[focal];
        let mut force = (self.home - me.pos) * self.a_home;
        for (j, other) in colloids.iter().enumerate() {
            if j == focal || other.species != me.species {
                continue;
            }
            let separation = me.pos - other.pos;
            let dist = separation.norm();
            if dist > self.r_sense || dist == 0.0 {
                continue;
            }
            force += (other.velocity - me.velocity) * self.a_align;
            let away = separation / dist;
            if dist < self.r_repulse {
                force += away * self.a_repulse;
            }
            force += away * (-self.a_attract);
        }
        force
    }
}

impl ClassicalRule for LymburnSwarm {
    fn act(&self, colloids: &[Colloid], focal: usize) -> Action {
        let force = self.net_force(colloids, focal);
        match force.normalized() {
            Some(direction) => Action::with_direction(direction, force.norm().min(self.f_max)),
            // zero net force: keep the current director, no propulsion
            None => Action::default(),
        }
    }
}

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

/// Trainable actor-critic state for one species.
pub struct ActorCriticAgent {
    pub policy: PolicyNetwork,
    pub optimizer: OptimizerState,
    pub update: UpdateConfig,
    /// Ordered action set; the policy's output index selects from it.
    pub actions: Vec<(String, Action)>,
    pub exploration: Option<ExplorationState>,
    pub rnd: Option<RndState>,
    pub buffer: TrajectoryBuffer,
    pub update_count: u64,
    policy_stream: RngStream,
    explore_stream: RngStream,
    /// Observables computed while settling rewards, consumed by the
    /// sampling pass of the same query.
    pending_obs: Option<Vec<crate::sensing::ObservableVector>>,
}

impl ActorCriticAgent {
    pub fn new(
        species: u32,
        seed: u64,
        policy: PolicyNetwork,
        update: UpdateConfig,
        actions: Vec<(String, Action)>,
        obs_dim: usize,
    ) -> Result<Self, ControlError> {
        if actions.is_empty() {
            return Err(ControlError::EmptyActions);
        }
        let optimizer = OptimizerState::new(update.optimizer, update.eta, policy.param_count());
        Ok(Self {
            policy,
            optimizer,
            update,
            actions,
            exploration: None,
            rnd: None,
            buffer: TrajectoryBuffer::new(0, obs_dim),
            update_count: 0,
            policy_stream: RngStream::for_species(seed, StreamPurpose::Policy, species),
            explore_stream: RngStream::for_species(seed, StreamPurpose::Exploration, species),
            pending_obs: None,
        })
    }
}

/// How one species is controlled.
pub enum AgentKind {
    ActorCritic(ActorCriticAgent),
    Classical(Box<dyn ClassicalRule>),
}

/// One species' full control bundle: kind, sensing, objective, reward
/// sharing.
pub struct Agent {
    pub species: u32,
    pub kind: AgentKind,
    pub observable: Option<Box<dyn Observable>>,
    pub task: Option<Box<dyn Task>>,
    pub aggregation: RewardAggregation,
    /// Per-slice aggregated task rewards (classical agents have no buffer
    /// but their task progress is still reported).
    pub reward_log: Vec<f64>,
    steps_taken: u64,
}

impl Agent {
    pub fn actor_critic(
        species: u32,
        agent: ActorCriticAgent,
        observable: Box<dyn Observable>,
        task: Option<Box<dyn Task>>,
    ) -> Self {
        Self {
            species,
            kind: AgentKind::ActorCritic(agent),
            observable: Some(observable),
            task,
            aggregation: RewardAggregation::Individual,
            reward_log: Vec::new(),
            steps_taken: 0,
        }
    }

    pub fn classical(species: u32, rule: Box<dyn ClassicalRule>, task: Option<Box<dyn Task>>) -> Self {
        Self {
            species,
            kind: AgentKind::Classical(rule),
            observable: None,
            task,
            aggregation: RewardAggregation::Individual,
            reward_log: Vec::new(),
            steps_taken: 0,
        }
    }

    pub fn is_trainable(&self) -> bool {
        matches!(self.kind, AgentKind::ActorCritic(_))
    }
}

// ---------------------------------------------------------------------------
// ForceFunction
// ---------------------------------------------------------------------------

/// The dispatcher the engine talks to: one query per slice turns the global
/// colloid list into one action per colloid, routing each species to its
/// agent (or a no-op for passive species), while recording trajectories and
/// task rewards for the trainable ones.
pub struct ForceFunction {
    agents: Vec<Agent>,
    passive_species: HashSet<u32>,
    kill: bool,
    episode_origin: f64,
    last_provenance: Vec<Provenance>,
}

impl ForceFunction {
    pub fn new(agents: Vec<Agent>, passive_species: HashSet<u32>) -> Result<Self, ControlError> {
        let mut seen = HashSet::new();
        for agent in &agents {
            if !seen.insert(agent.species) {
                return Err(ControlError::DuplicateSpecies {
                    species: agent.species,
                });
            }
            if let AgentKind::ActorCritic(_) = agent.kind {
                if agent.observable.is_none() {
                    return Err(ControlError::MissingObservable);
                }
            }
        }
        Ok(Self {
            agents,
            passive_species,
            kill: false,
            episode_origin: 0.0,
            last_provenance: Vec::new(),
        })
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [Agent] {
        &mut self.agents
    }

    pub fn killed(&self) -> bool {
        self.kill
    }

    /// Provenance of the most recent dispatch, aligned with the colloid
    /// order passed to `calc_action`.
    pub fn last_provenance(&self) -> &[Provenance] {
        &self.last_provenance
    }

    /// Evaluates tasks against the current state and attaches the rewards
    /// to the previous slice's actions. Called internally at every query
    /// and by the trainer once more after the final slice of an episode.
    pub fn settle_rewards(&mut self, colloids: &[Colloid], time: f64) -> Result<(), ControlError> {
        for agent in self.agents.iter_mut() {
            // observables are computed first: they update their own history
            // once per slice and feed the intrinsic reward of the state the
            // previous action produced
            let obs = match (&mut agent.observable, &agent.kind) {
                (Some(observable), AgentKind::ActorCritic(_)) => {
                    Some(observable.compute(colloids, agent.species)?)
                }
                _ => None,
            };
            let task_output = match agent.task.as_mut() {
                Some(task) => {
                    let out = task.evaluate(colloids, agent.species, time)?;
                    self.kill |= out.kill;
                    Some(out)
                }
                None => None,
            };
            if agent.steps_taken == 0 {
                // nothing to credit yet; stash observables for sampling
                if let (AgentKind::ActorCritic(ac), Some(obs)) = (&mut agent.kind, obs) {
                    ac.pending_obs = Some(obs);
                }
                continue;
            }
            let rewards = match task_output {
                Some(out) if !out.rewards.is_empty() => {
                    aggregate_rewards(&out.rewards, agent.aggregation)?
                }
                _ => Vec::new(),
            };
            match &mut agent.kind {
                AgentKind::ActorCritic(ac) => {
                    if ac.buffer.has_pending() {
                        let n = ac.buffer.n_agents;
                        let ext = if rewards.len() == n {
                            rewards.clone()
                        } else {
                            vec![0.0; n]
                        };
                        let int = match (&mut ac.rnd, &obs) {
                            (Some(rnd), Some(obs_rows)) => {
                                let mut out = Vec::with_capacity(n);
                                for row in obs_rows {
                                    out.push(rnd.reward(&row.values)?);
                                }
                                out
                            }
                            _ => vec![0.0; n],
                        };
                        ac.buffer.push_rewards(&ext, &int)?;
                    }
                    ac.pending_obs = obs;
                }
                AgentKind::Classical(_) => {}
            }
            if !rewards.is_empty() {
                agent.reward_log.push(rewards.iter().sum::<f64>() / rewards.len() as f64);
            }
        }
        Ok(())
    }

    /// Full environment reset: clears buffers, task and observable
    /// histories, the kill latch, and restarts the exploration clock.
    pub fn reset(&mut self, time: f64) {
        self.kill = false;
        self.episode_origin = time;
        for agent in self.agents.iter_mut() {
            agent.steps_taken = 0;
            agent.reward_log.clear();
            if let Some(observable) = agent.observable.as_mut() {
                observable.reset();
            }
            if let Some(task) = agent.task.as_mut() {
                task.reset();
            }
            if let AgentKind::ActorCritic(ac) = &mut agent.kind {
                ac.buffer.clear();
                ac.pending_obs = None;
            }
        }
    }

    /// Clears trajectory buffers and reward logs after an update, without
    /// touching histories or the kill latch.
    pub fn clear_buffers(&mut self) {
        for agent in self.agents.iter_mut() {
            agent.reward_log.clear();
            if let AgentKind::ActorCritic(ac) = &mut agent.kind {
                ac.buffer.clear();
            }
        }
    }
}

impl ActionSource for ForceFunction {
    fn calc_action(&mut self, colloids: &[Colloid], time: f64) -> Result<Vec<Action>, EngineError> {
        // settle previous slice's rewards and refresh observables
        self.settle_rewards(colloids, time).map_err(EngineError::from)?;
        let elapsed = time - self.episode_origin;

        let mut actions = vec![Action::default(); colloids.len()];
        let mut provenance = vec![Provenance::Passive; colloids.len()];

        if self.kill {
            // terminated: dispatch no-ops, record nothing further
            self.last_provenance = provenance;
            return Ok(actions);
        }

        let mut controlled: HashSet<u32> = self.passive_species.iter().copied().collect();
        for agent in self.agents.iter_mut() {
            controlled.insert(agent.species);
            let members: Vec<usize> = colloids
                .iter()
                .enumerate()
                .filter(|(_, c)| c.species == agent.species)
                .map(|(i, _)| i)
                .collect();
            if members.is_empty() {
                continue;
            }
            match &mut agent.kind {
                AgentKind::Classical(rule) => {
                    for &i in &members {
                        actions[i] = rule.act(colloids, i);
                        provenance[i] = Provenance::Classical {
                            species: agent.species,
                        };
                    }
                }
                AgentKind::ActorCritic(ac) => {
                    let obs = ac
                        .pending_obs
                        .take()
                        .ok_or_else(|| EngineError::ForceModel("observable missing".into()))?;
                    if obs.len() != members.len() {
                        return Err(EngineError::ForceModel(format!(
                            "observable count {} != {} agents",
                            obs.len(),
                            members.len()
                        )));
                    }
                    let obs_dim = ac.buffer.obs_dim;
                    let x = ndarray::Array2::from_shape_fn(
                        (members.len(), obs_dim),
                        |(r, c)| obs[r].values[c],
                    );
                    let (logits, values) =
                        ac.policy.forward(&x).map_err(ControlError::from)?;
                    let zeta = ac
                        .exploration
                        .map(|e| e.zeta(elapsed))
                        .unwrap_or(0.0);
                    let n_actions = ac.actions.len();
                    let logp_rows = crate::learn::log_softmax(&logits);

                    let mut step_actions = Vec::with_capacity(members.len());
                    let mut step_logps = Vec::with_capacity(members.len());
                    let mut step_explored = Vec::with_capacity(members.len());
                    for (row, &i) in members.iter().enumerate() {
                        let logits_row: Vec<f64> = logits.row(row).to_vec();
                        let (sampled, _) =
                            sample_from_logits(&logits_row, ac.update.sampler, &mut ac.policy_stream)
                                .map_err(ControlError::from)?;
                        let (executed, explored) = match zeta > 0.0 {
                            true => apply_exploration(
                                sampled,
                                zeta,
                                n_actions,
                                &mut ac.explore_stream,
                            ),
                            false => (sampled, false),
                        };
                        // buffer keeps the policy's log-probability of the
                        // executed action, exploration override or not
                        step_actions.push(executed);
                        step_logps.push(logp_rows[[row, executed]]);
                        step_explored.push(explored);
                        actions[i] = ac.actions[executed].1;
                        provenance[i] = Provenance::Policy {
                            species: agent.species,
                            action_index: executed,
                            explored,
                        };
                    }
                    if ac.buffer.n_agents != members.len() {
                        ac.buffer = TrajectoryBuffer::new(members.len(), obs_dim);
                    }
                    let obs_rows: Vec<Vec<f64>> = obs.iter().map(|o| o.values.clone()).collect();
                    ac.buffer
                        .push_step(
                            &obs_rows,
                            &step_actions,
                            &step_logps,
                            &values.to_vec(),
                            &step_explored,
                        )
                        .map_err(EngineError::from)?;
                }
            }
            agent.steps_taken += 1;
        }

        if let Some(c) = colloids.iter().find(|c| !controlled.contains(&c.species)) {
            return Err(ControlError::UncontrolledSpecies { species: c.species }.into());
        }

        self.last_provenance = provenance;
        Ok(actions)
    }

    fn kill_switch(&self) -> bool {
        self.kill
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::Architecture;
    use crate::sensing::PositionDirector;

    fn colloid(id: u32, species: u32, x: f64, y: f64) -> Colloid {
        Colloid::new(id, species, Vec3::xy(x, y), Vec3::new(1.0, 0.0, 0.0))
    }

    fn ac_agent(species: u32, one_hot: Option<usize>) -> Agent {
        let obs_dim = 4;
        let mut policy = PolicyNetwork::zeros(Architecture::Disjoint, obs_dim, &[6], 2);
        if let Some(hot) = one_hot {
            // bias the favored logit enormously: a one-hot policy
            let mut params = policy.params();
            // last actor layer biases sit right before the critic block
            let shapes = policy.component_shapes();
            let actor_count: usize = shapes[0].windows(2).map(|p| p[0] * p[1] + p[1]).sum();
            params[actor_count - 2 + hot] = 1e3;
            policy.set_params(&params).unwrap();
        }
        let actions = vec![
            ("forward".to_string(), Action::with_force(1.0)),
            ("spin".to_string(), Action::with_torque(Vec3::new(0.0, 0.0, 1.0))),
        ];
        let ac = ActorCriticAgent::new(
            species,
            42,
            policy,
            UpdateConfig::default(),
            actions,
            obs_dim,
        )
        .unwrap();
        Agent::actor_critic(
            species,
            ac,
            Box::new(PositionDirector::new(Vec3::xy(10.0, 10.0), 2)),
            None,
        )
    }

    #[test]
    fn all_passive_species_get_noops() {
        let mut ff = ForceFunction::new(vec![], HashSet::from([0, 1])).unwrap();
        let colloids = vec![colloid(0, 0, 1.0, 1.0), colloid(1, 1, 2.0, 2.0)];
        let actions = ff.calc_action(&colloids, 0.0).unwrap();
        assert_eq!(actions.len(), 2);
        assert!(actions.iter().all(Action::is_noop));
        assert!(ff.last_provenance().iter().all(|p| *p == Provenance::Passive));
    }

    #[test]
    fn uncontrolled_species_is_an_error() {
        let mut ff = ForceFunction::new(vec![], HashSet::from([0])).unwrap();
        let colloids = vec![colloid(0, 3, 1.0, 1.0)];
        let err = ff.calc_action(&colloids, 0.0).unwrap_err();
        assert!(err.to_string().contains("uncontrolled species 3"));
    }

    #[test]
    fn one_hot_policy_always_picks_its_action() {
        let mut ff = ForceFunction::new(vec![ac_agent(0, Some(1))], HashSet::new()).unwrap();
        let colloids = vec![colloid(0, 0, 1.0, 1.0), colloid(1, 0, 2.0, 2.0)];
        for _ in 0..20 {
            let actions = ff.calc_action(&colloids, 0.0).unwrap();
            for (a, p) in actions.iter().zip(ff.last_provenance()) {
                assert_eq!(a.torque.z, 1.0, "expected the spin action");
                assert!(matches!(p, Provenance::Policy { action_index: 1, .. }));
            }
        }
    }

    #[test]
    fn mixed_system_dispatches_per_species() {
        let classical = Agent::classical(
            1,
            Box::new(LymburnSwarm::new(Vec3::xy(5.0, 5.0), 2.5)),
            None,
        );
        let mut ff =
            ForceFunction::new(vec![ac_agent(0, Some(0)), classical], HashSet::from([2])).unwrap();
        let colloids = vec![
            colloid(0, 0, 1.0, 1.0),
            colloid(1, 1, 2.0, 2.0),
            colloid(2, 2, 3.0, 3.0),
            colloid(3, 0, 4.0, 4.0),
        ];
        let actions = ff.calc_action(&colloids, 0.0).unwrap();
        assert_eq!(actions.len(), 4);
        let prov = ff.last_provenance();
        assert!(matches!(prov[0], Provenance::Policy { species: 0, .. }));
        assert!(matches!(prov[1], Provenance::Classical { species: 1 }));
        assert_eq!(prov[2], Provenance::Passive);
        assert!(matches!(prov[3], Provenance::Policy { species: 0, .. }));
    }

    #[test]
    fn buffer_alignment_after_n_slices() {
        let mut ff = ForceFunction::new(vec![ac_agent(0, None)], HashSet::new()).unwrap();
        let colloids = vec![colloid(0, 0, 1.0, 1.0), colloid(1, 0, 2.0, 2.0)];
        let n = 5;
        for k in 0..n {
            ff.calc_action(&colloids, k as f64).unwrap();
        }
        ff.settle_rewards(&colloids, n as f64).unwrap();
        let AgentKind::ActorCritic(ac) = &ff.agents()[0].kind else {
            panic!()
        };
        assert_eq!(ac.buffer.n_slices(), n);
        assert!(ac.buffer.is_aligned());
    }

    #[test]
    fn exploration_zeta_zero_keeps_policy_action() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..100 {
            let (idx, explored) = apply_exploration(3, 0.0, 5, &mut rng);
            assert_eq!(idx, 3);
            assert!(!explored);
        }
    }

    #[test]
    fn exploration_zeta_one_is_uniform() {
        // chi-square against uniform over 5 actions at 1e5 draws
        let mut rng = RngStream::new(6, 0);
        let n = 100_000;
        let k = 5;
        let mut counts = vec![0usize; k];
        for _ in 0..n {
            let (idx, explored) = apply_exploration(0, 1.0, k, &mut rng);
            assert!(explored);
            counts[idx] += 1;
        }
        let expected = n as f64 / k as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 99.9th percentile of chi-square with 4 dof is 18.47
        assert!(chi2 < 18.47, "chi-square {chi2}");
    }

    #[test]
    fn exploration_frequency_tracks_zeta() {
        let mut rng = RngStream::new(7, 0);
        let n = 100_000;
        let zeta: f64 = 0.5;
        let mut replaced = 0;
        for _ in 0..n {
            let (_, explored) = apply_exploration(0, zeta, 4, &mut rng);
            replaced += explored as usize;
        }
        let freq = replaced as f64 / n as f64;
        let se = (zeta * (1.0 - zeta) / n as f64).sqrt();
        assert!((freq - zeta).abs() < 3.0 * se, "frequency {freq}");
    }

    #[test]
    fn lymburn_homing_points_home() {
        let rule = LymburnSwarm::new(Vec3::xy(5.0, 5.0), 2.0);
        let colloids = vec![colloid(0, 1, 1.0, 5.0)];
        let action = rule.act(&colloids, 0);
        let d = action.new_direction.unwrap();
        assert!((d - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((action.force - 0.2 * 4.0).abs() < 1e-12);
    }

    #[test]
    fn lymburn_symmetric_pair_cancels_interactions() {
        // agents mirrored about home with mirrored velocities: the pairwise
        // terms are equal and opposite, so the summed force is pure homing
        let home = Vec3::xy(5.0, 5.0);
        let rule = LymburnSwarm::new(home, 10.0);
        let mut a = colloid(0, 1, 4.0, 4.4);
        let mut b = colloid(1, 1, 6.0, 5.6);
        a.velocity = Vec3::new(0.3, 1.0, 0.0);
        b.velocity = Vec3::new(-0.3, -1.0, 0.0);
        let colloids = vec![a, b];
        let total = rule.net_force(&colloids, 0) + rule.net_force(&colloids, 1);
        let homing = (home - a.pos) * rule.a_home + (home - b.pos) * rule.a_home;
        assert!((total - homing).norm() < 1e-12);
    }

    #[test]
    fn lymburn_matches_brute_force_oracle() {
        // three-agent configuration, every term re-summed independently
        let home = Vec3::xy(3.0, 4.0);
        let rule = LymburnSwarm {
            home,
            a_align: 1.3,
            a_repulse: 4.0,
            a_attract: 0.6,
            a_home: 0.25,
            r_sense: 5.0,
            r_repulse: 2.0,
            f_max: 10.0,
        };
        let mut c0 = colloid(0, 1, 1.0, 1.0);
        let mut c1 = colloid(1, 1, 2.0, 1.5);
        let mut c2 = colloid(2, 1, 1.5, 3.0);
        c0.velocity = Vec3::new(0.5, -0.2, 0.0);
        c1.velocity = Vec3::new(-0.1, 0.3, 0.0);
        c2.velocity = Vec3::new(0.2, 0.2, 0.0);
        let colloids = vec![c0, c1, c2];

        let mut expected = (home - c0.pos) * 0.25;
        for other in [&c1, &c2] {
            let sep = c0.pos - other.pos;
            let dist = sep.norm();
            assert!(dist <= 5.0);
            expected += (other.velocity - c0.velocity) * 1.3;
            let away = sep / dist;
            if dist < 2.0 {
                expected += away * 4.0;
            }
            expected += away * (-0.6);
        }
        let got = rule.net_force(&colloids, 0);
        assert!((got - expected).norm() < 1e-12);
    }

    #[test]
    fn lymburn_zero_force_keeps_director() {
        let rule = LymburnSwarm::new(Vec3::xy(1.0, 1.0), 2.0);
        let colloids = vec![colloid(0, 1, 1.0, 1.0)]; // exactly at home
        let action = rule.act(&colloids, 0);
        assert!(action.is_noop());
    }
}
