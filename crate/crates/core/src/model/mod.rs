//! Deterministic agents, environments and the rollouts that connect them.

mod agent;
mod env;
mod rollout;

use std::fmt;
use std::ops::Deref;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::reward::Reward;

pub use agent::{agent_act, AgentSpec, Edge, Transducer};
pub use env::{
    env_respond, validate_env, EnvCursor, EnvFlags, EnvReport, EnvSpec, EnvTransition,
    EnvViolation, Environment, ValidationError,
};
pub use rollout::{
    compare_on, regurgitator_of, rollout, total_reward, InteractionRecord, Performance, Step,
};

/// An action. `0` is the reserved skip action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Action(pub u64);

impl Action {
    pub const SKIP: Action = Action(0);

    pub fn is_skip(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One reward-observation pair emitted by an environment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Percept {
    pub reward: Reward,
    #[serde(rename = "obs")]
    pub observation: u64,
}

impl Percept {
    pub fn new(reward: Reward, observation: u64) -> Self {
        Percept {
            reward,
            observation,
        }
    }

    pub fn zero() -> Self {
        Percept::new(Reward::zero(), 0)
    }
}

/// An immutable reward-observation history `r_1, o_1, ..., r_n, o_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct History(Vec<Percept>);

impl History {
    pub fn new(percepts: Vec<Percept>) -> Self {
        History(percepts)
    }

    pub fn extended(&self, percept: Percept) -> History {
        let mut v = self.0.clone();
        v.push(percept);
        History(v)
    }

    pub fn cumulative_reward(&self) -> Reward {
        cumulative_reward(&self.0)
    }
}

impl Deref for History {
    type Target = [Percept];

    fn deref(&self) -> &[Percept] {
        &self.0
    }
}

impl From<Vec<Percept>> for History {
    fn from(v: Vec<Percept>) -> Self {
        History(v)
    }
}

pub(crate) fn cumulative_reward(percepts: &[Percept]) -> Reward {
    percepts.iter().map(|p| &p.reward).sum()
}

/// A cell of the finite partition `{0, 1, ..., k, other}` of the naturals.
///
/// Environments partition actions this way and transducer agents partition
/// observations this way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    Value(u64),
    Other,
}

impl Class {
    pub fn of(value: u64, bound: u64) -> Class {
        if value <= bound {
            Class::Value(value)
        } else {
            Class::Other
        }
    }
}

/// Column index of `value` in a table over `{0..=bound, other}`.
pub(crate) fn class_index(value: u64, bound: u64) -> usize {
    if value <= bound {
        value as usize
    } else {
        bound as usize + 1
    }
}

impl Serialize for Class {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Class::Value(v) => serializer.serialize_u64(*v),
            Class::Other => serializer.serialize_str("other"),
        }
    }
}

impl<'de> Deserialize<'de> for Class {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ClassVisitor;

        impl Visitor<'_> for ClassVisitor {
            type Value = Class;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a natural number or \"other\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Class, E> {
                Ok(Class::Value(v))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Class, E> {
                if v == "other" {
                    Ok(Class::Other)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }

        deserializer.deserialize_any(ClassVisitor)
    }
}
