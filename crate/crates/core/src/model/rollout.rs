use serde::{Deserialize, Serialize};

use super::{Action, AgentSpec, EnvSpec, Environment, Percept};
use crate::reward::Reward;

/// One `(r_i, o_i, a_i)` triple of a rollout.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub reward: Reward,
    #[serde(rename = "obs")]
    pub observation: u64,
    pub action: Action,
}

/// The reward-observation-action sequence of an agent playing in an
/// environment, cut after `truncated_at` steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InteractionRecord {
    pub steps: Vec<Step>,
    pub truncated_at: usize,
}

impl InteractionRecord {
    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action).collect()
    }

    pub fn percepts(&self) -> Vec<Percept> {
        self.steps
            .iter()
            .map(|s| Percept::new(s.reward.clone(), s.observation))
            .collect()
    }

    pub fn total(&self) -> Reward {
        self.steps.iter().map(|s| &s.reward).sum()
    }
}

/// Lets `agent` play in `env` for `steps` steps:
/// `r_1, o_1 = e()`, `a_i = A(r_1, o_1, ..., r_i, o_i)`,
/// `r_{i+1}, o_{i+1} = e(a_1, ..., a_i)`.
pub fn rollout(agent: &AgentSpec, env: &EnvSpec, steps: usize) -> InteractionRecord {
    let mut history: Vec<Percept> = Vec::with_capacity(steps);
    let mut out = Vec::with_capacity(steps);
    let mut cursor = env.cursor();
    if steps > 0 {
        history.push(env.initial().clone());
    }
    for i in 0..steps {
        let action = agent.act(&history);
        let percept = &history[i];
        out.push(Step {
            reward: percept.reward.clone(),
            observation: percept.observation,
            action,
        });
        if i + 1 < steps {
            history.push(cursor.advance(action));
        }
    }
    InteractionRecord {
        steps: out,
        truncated_at: steps,
    }
}

/// The exact total reward `r_1 + r_2 + ...`. Every reward past
/// `horizon + 1` is zero, so the finite sum is the series value.
pub fn total_reward(agent: &AgentSpec, env: &Environment) -> Reward {
    rollout(agent, env.spec(), env.decisive_steps()).total()
}

/// Outcome of comparing two agents on a single environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Performance {
    Outperforms,
    Underperforms,
    EqualReward,
}

impl Performance {
    pub fn from_totals(a: &Reward, b: &Reward) -> Performance {
        match a.cmp(b) {
            std::cmp::Ordering::Greater => Performance::Outperforms,
            std::cmp::Ordering::Less => Performance::Underperforms,
            std::cmp::Ordering::Equal => Performance::EqualReward,
        }
    }

    pub fn flip(self) -> Performance {
        match self {
            Performance::Outperforms => Performance::Underperforms,
            Performance::Underperforms => Performance::Outperforms,
            Performance::EqualReward => Performance::EqualReward,
        }
    }
}

pub fn compare_on(a: &AgentSpec, b: &AgentSpec, env: &Environment) -> Performance {
    Performance::from_totals(&total_reward(a, env), &total_reward(b, env))
}

/// An agent that blindly replays the actions `agent` takes in `env`.
///
/// Returns `None` when `steps` does not cover the horizon, since the replay
/// would then diverge from the original inside the rewarded window.
pub fn regurgitator_of(agent: &AgentSpec, env: &Environment, steps: usize) -> Option<AgentSpec> {
    if steps < env.decisive_steps() {
        return None;
    }
    Some(AgentSpec::Regurgitator {
        actions: rollout(agent, env.spec(), steps).actions(),
    })
}
