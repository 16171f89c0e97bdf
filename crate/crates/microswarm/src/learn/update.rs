//! One policy update from a trajectory buffer: returns, advantages, actor
//! and critic losses, and the parameter step.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::control::TrajectoryBuffer;

use super::losses::{critic_value_grad, entropy_grad, ppo_actor_grad, vpg_actor_grad};
use super::optimizer::{gradient_ascent_update, OptimizerKind, OptimizerState};
use super::policy::PolicyNetwork;
use super::returns::{advantages_gae, expected_returns, normalize_in_place};
use super::sampler::SamplerKind;
use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Vpg,
    Ppo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReturnsMode {
    #[default]
    Expected,
    Gae,
}

/// Terminal value V_T used by the estimators. Episodes that end by design
/// bootstrap with zero; truncated rollouts may bootstrap with the critic's
/// last value estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Bootstrap {
    #[default]
    Zero,
    LastValue,
}

/// Everything that parameterizes a policy update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UpdateConfig {
    pub algorithm: Algorithm,
    pub returns: ReturnsMode,
    pub sampler: SamplerKind,
    /// Discount factor, in [0, 1].
    pub gamma: f64,
    /// GAE interpolation, in [0, 1].
    pub lambda: f64,
    /// Learning rate.
    pub eta: f64,
    /// PPO clip half-width.
    pub clip_epsilon: f64,
    /// Optimization passes per buffer (PPO only; VPG always takes one).
    pub epochs: u32,
    pub normalize_advantages: bool,
    /// Entropy bonus coefficient; 0 keeps the plain objective.
    pub entropy_coef: f64,
    /// Weight of the intrinsic reward in r = r_ext + beta * r_int.
    pub intrinsic_beta: f64,
    pub optimizer: OptimizerKind,
    pub bootstrap: Bootstrap,
    /// Drop exploration-overridden transitions from the update.
    pub exclude_explored: bool,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Vpg,
            returns: ReturnsMode::Expected,
            sampler: SamplerKind::Categorical,
            gamma: 0.99,
            lambda: 0.95,
            eta: 0.01,
            clip_epsilon: 0.2,
            epochs: 4,
            normalize_advantages: false,
            entropy_coef: 0.0,
            intrinsic_beta: 1.0,
            optimizer: OptimizerKind::Sgd,
            bootstrap: Bootstrap::Zero,
            exclude_explored: false,
        }
    }
}

impl UpdateConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(LearnError::InvalidConfig("gamma must be in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(LearnError::InvalidConfig("lambda must be in [0, 1]".into()));
        }
        if !(self.eta > 0.0) {
            return Err(LearnError::InvalidConfig("eta must be positive".into()));
        }
        if !(self.clip_epsilon > 0.0) {
            return Err(LearnError::InvalidConfig(
                "clip_epsilon must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Scalars reported from one update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateDiagnostics {
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub entropy: f64,
    /// Mean discounted return over the buffer.
    pub mean_return: f64,
    /// Mean combined per-step reward.
    pub mean_reward: f64,
    /// Extrinsic reward summed over the episode, averaged over agents.
    pub cum_reward_per_agent: f64,
    pub samples: usize,
}

/// Computes returns and advantages per agent trajectory, then applies the
/// configured policy-gradient update (VPG: one pass; PPO: `epochs` clipped
/// passes against the rollout log-probabilities). The critic always
/// regresses on the discounted returns.
pub fn update_policy(
    net: &mut PolicyNetwork,
    optimizer: &mut OptimizerState,
    buffer: &TrajectoryBuffer,
    cfg: &UpdateConfig,
) -> Result<UpdateDiagnostics, LearnError> {
    cfg.validate()?;
    let entries = buffer.n_entries();
    if entries == 0 {
        return Err(LearnError::EmptyBatch);
    }
    if !buffer.is_aligned() {
        return Err(LearnError::Misaligned(format!(
            "{} entries vs {} rewards",
            entries,
            buffer.rewards_ext.len()
        )));
    }

    let n_agents = buffer.n_agents;
    let rewards: Vec<f64> = buffer
        .rewards_ext
        .iter()
        .zip(&buffer.rewards_int)
        .map(|(e, i)| e + cfg.intrinsic_beta * i)
        .collect();

    // estimators run along each agent's own trajectory (entries are laid
    // out slice-major: slice * n_agents + agent)
    let mut returns = vec![0.0; entries];
    let mut advantages = vec![0.0; entries];
    for agent in 0..n_agents {
        let idx: Vec<usize> = (agent..entries).step_by(n_agents).collect();
        let agent_rewards: Vec<f64> = idx.iter().map(|&i| rewards[i]).collect();
        let agent_values: Vec<f64> = idx.iter().map(|&i| buffer.values[i]).collect();
        let agent_returns = expected_returns(&agent_rewards, cfg.gamma);
        let terminal = match cfg.bootstrap {
            Bootstrap::Zero => 0.0,
            Bootstrap::LastValue => *agent_values.last().unwrap(),
        };
        let agent_adv = match cfg.returns {
            ReturnsMode::Expected => agent_returns
                .iter()
                .zip(&agent_values)
                .map(|(g, v)| g - v)
                .collect::<Vec<f64>>(),
            ReturnsMode::Gae => advantages_gae(
                &agent_rewards,
                &agent_values,
                cfg.gamma,
                cfg.lambda,
                terminal,
            )?,
        };
        for (k, &i) in idx.iter().enumerate() {
            returns[i] = agent_returns[k];
            advantages[i] = agent_adv[k];
        }
    }
    if cfg.normalize_advantages {
        normalize_in_place(&mut advantages);
    }

    let keep: Vec<usize> = (0..entries)
        .filter(|&i| !(cfg.exclude_explored && buffer.explored[i]))
        .collect();

    let mean_return = returns.iter().sum::<f64>() / entries as f64;
    let mean_reward = rewards.iter().sum::<f64>() / entries as f64;
    let cum_reward_per_agent = buffer.rewards_ext.iter().sum::<f64>() / n_agents as f64;

    if keep.is_empty() {
        // every transition was exploration-overridden and excluded
        return Ok(UpdateDiagnostics {
            mean_return,
            mean_reward,
            cum_reward_per_agent,
            ..UpdateDiagnostics::default()
        });
    }

    let obs_dim = buffer.obs_dim;
    let obs = Array2::from_shape_fn((keep.len(), obs_dim), |(r, c)| {
        buffer.observations[keep[r] * obs_dim + c]
    });
    let actions: Vec<usize> = keep.iter().map(|&i| buffer.actions[i]).collect();
    let logp_old: Vec<f64> = keep.iter().map(|&i| buffer.log_probs[i]).collect();
    let adv: Vec<f64> = keep.iter().map(|&i| advantages[i]).collect();
    let targets: Vec<f64> = keep.iter().map(|&i| returns[i]).collect();

    let epochs = match cfg.algorithm {
        Algorithm::Vpg => 1,
        Algorithm::Ppo => cfg.epochs.max(1),
    };

    let mut diag = UpdateDiagnostics {
        mean_return,
        mean_reward,
        cum_reward_per_agent,
        samples: keep.len(),
        ..UpdateDiagnostics::default()
    };

    for _ in 0..epochs {
        let (logits, values, cache) = net.forward_cached(&obs)?;
        let actor = match cfg.algorithm {
            Algorithm::Vpg => vpg_actor_grad(&logits, &actions, &adv)?,
            Algorithm::Ppo => {
                ppo_actor_grad(&logits, &actions, &adv, &logp_old, cfg.clip_epsilon)?
            }
        };
        let (critic, dvalues) = critic_value_grad(&values, &targets)?;
        let (entropy, dentropy) = entropy_grad(&logits);
        if !actor.loss.is_finite() || !critic.is_finite() {
            return Err(LearnError::NonFinite("loss"));
        }
        let dlogits = &actor.dlogits + &(dentropy * cfg.entropy_coef);
        let grads = net.backward(&cache, &dlogits, &dvalues);
        let mut params = net.params();
        gradient_ascent_update(&mut params, &grads.to_flat(), optimizer)?;
        net.set_params(&params)?;
        diag.actor_loss = actor.loss;
        diag.critic_loss = critic;
        diag.entropy = entropy;
    }
    Ok(diag)
}
