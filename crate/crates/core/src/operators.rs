//! Agent-transforming operators: the parity team, the predicate-split team,
//! and the quitter.

use serde::{Deserialize, Serialize};

use crate::model::{cumulative_reward, AgentSpec, Class, History, Percept};
use crate::reward::Reward;

/// A decidable set of reward-observation sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "PredicateDoc", into = "PredicateDoc")]
pub enum PrefixPredicate {
    FirstObsEven,
    LengthAtLeast(usize),
    CumulativeRewardAtLeast(Reward),
    /// The `index`-th observation (1-based) falls in `class` of the
    /// partition `{0..=bound, other}`. False when the prefix is shorter.
    ObservationAtIndexInClass {
        index: usize,
        bound: u64,
        class: Class,
    },
    All,
    None,
    And(Vec<PrefixPredicate>),
    Or(Vec<PrefixPredicate>),
    Not(Box<PrefixPredicate>),
}

impl PrefixPredicate {
    pub fn eval(&self, prefix: &[Percept]) -> bool {
        match self {
            PrefixPredicate::FirstObsEven => prefix.first().is_some_and(|p| p.observation % 2 == 0),
            PrefixPredicate::LengthAtLeast(m) => prefix.len() >= *m,
            PrefixPredicate::CumulativeRewardAtLeast(q) => cumulative_reward(prefix) >= *q,
            PrefixPredicate::ObservationAtIndexInClass { index, bound, class } => index
                .checked_sub(1)
                .and_then(|i| prefix.get(i))
                .is_some_and(|p| Class::of(p.observation, *bound) == *class),
            PrefixPredicate::All => true,
            PrefixPredicate::None => false,
            PrefixPredicate::And(xs) => xs.iter().all(|x| x.eval(prefix)),
            PrefixPredicate::Or(xs) => xs.iter().any(|x| x.eval(prefix)),
            PrefixPredicate::Not(x) => !x.eval(prefix),
        }
    }

    pub fn reads_reward_magnitudes(&self) -> bool {
        match self {
            PrefixPredicate::CumulativeRewardAtLeast(_) => true,
            PrefixPredicate::And(xs) | PrefixPredicate::Or(xs) => {
                xs.iter().any(PrefixPredicate::reads_reward_magnitudes)
            }
            PrefixPredicate::Not(x) => x.reads_reward_magnitudes(),
            _ => false,
        }
    }
}

pub fn eval_predicate(x: &PrefixPredicate, prefix: &History) -> bool {
    x.eval(prefix)
}

/// Acts as `a` when the first observation is even and as `b` when it is odd.
pub fn team_parity(a: AgentSpec, b: AgentSpec) -> AgentSpec {
    AgentSpec::TeamParity {
        left: Box::new(a),
        right: Box::new(b),
    }
}

/// Acts as `a` while `a` and `b` agree on every prefix. From the first
/// prefix where they disagree it follows `a` if `x` holds on that prefix
/// and `b` otherwise.
pub fn team_split(a: AgentSpec, b: AgentSpec, x: PrefixPredicate) -> AgentSpec {
    AgentSpec::TeamSplit {
        left: Box::new(a),
        right: Box::new(b),
        predicate: x,
    }
}

/// Acts as `a` until the cumulative reward reaches `r`, then skips forever.
pub fn restrict(a: AgentSpec, r: Reward) -> AgentSpec {
    AgentSpec::Restrict {
        inner: Box::new(a),
        threshold: r,
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PredicateDoc {
    And { and: Vec<PrefixPredicate> },
    Or { or: Vec<PrefixPredicate> },
    Not { not: Box<PrefixPredicate> },
    Atom(AtomDoc),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "atom", rename_all = "camelCase", deny_unknown_fields)]
enum AtomDoc {
    FirstObsEven,
    LengthAtLeast { m: usize },
    CumRewardAtLeast { q: Reward },
    ObsAtIndexInClass { index: usize, bound: u64, class: Class },
    All,
    None,
}

impl From<PredicateDoc> for PrefixPredicate {
    fn from(d: PredicateDoc) -> Self {
        match d {
            PredicateDoc::And { and } => PrefixPredicate::And(and),
            PredicateDoc::Or { or } => PrefixPredicate::Or(or),
            PredicateDoc::Not { not } => PrefixPredicate::Not(not),
            PredicateDoc::Atom(a) => match a {
                AtomDoc::FirstObsEven => PrefixPredicate::FirstObsEven,
                AtomDoc::LengthAtLeast { m } => PrefixPredicate::LengthAtLeast(m),
                AtomDoc::CumRewardAtLeast { q } => PrefixPredicate::CumulativeRewardAtLeast(q),
                AtomDoc::ObsAtIndexInClass { index, bound, class } => {
                    PrefixPredicate::ObservationAtIndexInClass { index, bound, class }
                }
                AtomDoc::All => PrefixPredicate::All,
                AtomDoc::None => PrefixPredicate::None,
            },
        }
    }
}

impl From<PrefixPredicate> for PredicateDoc {
    fn from(p: PrefixPredicate) -> Self {
        match p {
            PrefixPredicate::And(and) => PredicateDoc::And { and },
            PrefixPredicate::Or(or) => PredicateDoc::Or { or },
            PrefixPredicate::Not(not) => PredicateDoc::Not { not },
            PrefixPredicate::FirstObsEven => PredicateDoc::Atom(AtomDoc::FirstObsEven),
            PrefixPredicate::LengthAtLeast(m) => PredicateDoc::Atom(AtomDoc::LengthAtLeast { m }),
            PrefixPredicate::CumulativeRewardAtLeast(q) => PredicateDoc::Atom(AtomDoc::CumRewardAtLeast { q }),
            PrefixPredicate::ObservationAtIndexInClass { index, bound, class } => {
                PredicateDoc::Atom(AtomDoc::ObsAtIndexInClass { index, bound, class })
            }
            PrefixPredicate::All => PredicateDoc::Atom(AtomDoc::All),
            PrefixPredicate::None => PredicateDoc::Atom(AtomDoc::None),
        }
    }
}
