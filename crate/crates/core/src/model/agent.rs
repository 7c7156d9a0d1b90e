use serde::{Deserialize, Serialize};

use super::{class_index, cumulative_reward, Action, Percept};
use crate::error::SpecError;
use crate::operators::PrefixPredicate;
use crate::reward::Reward;

/// Largest observation bound a transducer may declare.
const MAX_OBS_BOUND: u64 = 1 << 12;

/// A deterministic agent: a total function from reward-observation
/// histories to actions.
///
/// The combinator variants (`TeamParity`, `TeamSplit`, `Restrict`) are
/// evaluated directly by [`AgentSpec::act`]; the `operators` module only
/// builds them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum AgentSpec {
    /// Ignores its input and always plays `action`.
    Constant { action: Action },
    /// Plays `prefix` in order, then repeats `cycle` forever (skip if empty).
    Scripted { prefix: Vec<Action>, cycle: Vec<Action> },
    /// Mealy machine over observation classes and reward signs.
    Transducer(Transducer),
    /// Acts as `left` when the first observation is even, `right` otherwise.
    TeamParity {
        left: Box<AgentSpec>,
        right: Box<AgentSpec>,
    },
    /// Defers to `left` or `right` from their first disagreement onwards,
    /// choosing by `predicate` on the disagreement prefix.
    TeamSplit {
        left: Box<AgentSpec>,
        right: Box<AgentSpec>,
        predicate: PrefixPredicate,
    },
    /// Acts as `inner` until the cumulative reward reaches `threshold`,
    /// then skips.
    Restrict {
        inner: Box<AgentSpec>,
        threshold: Reward,
    },
    /// Plays `actions[i - 1]` on every history of length `i`, whatever the
    /// percepts; the last action repeats past the end of the list.
    Regurgitator { actions: Vec<Action> },
}

impl AgentSpec {
    pub fn constant(action: u64) -> AgentSpec {
        AgentSpec::Constant {
            action: Action(action),
        }
    }

    pub fn scripted(prefix: &[u64], cycle: &[u64]) -> AgentSpec {
        AgentSpec::Scripted {
            prefix: prefix.iter().copied().map(Action).collect(),
            cycle: cycle.iter().copied().map(Action).collect(),
        }
    }

    pub fn regurgitator(actions: &[u64]) -> AgentSpec {
        AgentSpec::Regurgitator {
            actions: actions.iter().copied().map(Action).collect(),
        }
    }

    /// The action this agent takes after seeing `history`.
    pub fn act(&self, history: &[Percept]) -> Action {
        let index = history.len().saturating_sub(1);
        match self {
            AgentSpec::Constant { action } => *action,
            AgentSpec::Scripted { prefix, cycle } => {
                if let Some(a) = prefix.get(index) {
                    *a
                } else if cycle.is_empty() {
                    Action::SKIP
                } else {
                    cycle[(index - prefix.len()) % cycle.len()]
                }
            }
            AgentSpec::Transducer(t) => t.act(history),
            AgentSpec::TeamParity { left, right } => match history.first() {
                Some(p) if p.observation % 2 == 1 => right.act(history),
                _ => left.act(history),
            },
            AgentSpec::TeamSplit {
                left,
                right,
                predicate,
            } => {
                for m in 1..=history.len() {
                    let prefix = &history[..m];
                    if left.act(prefix) != right.act(prefix) {
                        return if predicate.eval(prefix) {
                            left.act(history)
                        } else {
                            right.act(history)
                        };
                    }
                }
                left.act(history)
            }
            AgentSpec::Restrict { inner, threshold } => {
                if cumulative_reward(history) >= *threshold {
                    Action::SKIP
                } else {
                    inner.act(history)
                }
            }
            AgentSpec::Regurgitator { actions } => actions
                .get(index)
                .or(actions.last())
                .copied()
                .unwrap_or(Action::SKIP),
        }
    }

    /// Nesting depth of combinators; leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            AgentSpec::TeamParity { left, right } | AgentSpec::TeamSplit { left, right, .. } => {
                1 + left.depth().max(right.depth())
            }
            AgentSpec::Restrict { inner, .. } => 1 + inner.depth(),
            _ => 1,
        }
    }

    /// Whether behaviour can change when every reward is multiplied by a
    /// positive constant. Only reward thresholds are sensitive to that;
    /// transducers read reward signs, which scaling preserves.
    pub fn reads_reward_magnitudes(&self) -> bool {
        match self {
            AgentSpec::Restrict { .. } => true,
            AgentSpec::TeamSplit {
                left,
                right,
                predicate,
            } => {
                predicate.reads_reward_magnitudes()
                    || left.reads_reward_magnitudes()
                    || right.reads_reward_magnitudes()
            }
            AgentSpec::TeamParity { left, right } => {
                left.reads_reward_magnitudes() || right.reads_reward_magnitudes()
            }
            _ => false,
        }
    }
}

/// `agent(history)`.
pub fn agent_act(agent: &AgentSpec, history: &[Percept]) -> Action {
    agent.act(history)
}

/// One transducer edge: the state to move to and the action to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub next: usize,
    pub action: Action,
}

/// A finite-state agent.
///
/// Each percept moves the machine along `table[state][obs_class][reward_sign]`
/// where observation classes are `{0, ..., obs_bound, other}` and reward signs
/// are `{negative, zero, positive}`. The agent plays the action on the last
/// edge taken; on the empty history it skips.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TransducerDoc", into = "TransducerDoc")]
pub struct Transducer {
    obs_bound: u64,
    initial: usize,
    table: Vec<Vec<[Edge; 3]>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct TransducerDoc {
    obs_bound: u64,
    initial: usize,
    table: Vec<Vec<[Edge; 3]>>,
}

impl TryFrom<TransducerDoc> for Transducer {
    type Error = SpecError;

    fn try_from(doc: TransducerDoc) -> Result<Self, SpecError> {
        Transducer::new(doc.obs_bound, doc.initial, doc.table)
    }
}

impl From<Transducer> for TransducerDoc {
    fn from(t: Transducer) -> Self {
        TransducerDoc {
            obs_bound: t.obs_bound,
            initial: t.initial,
            table: t.table,
        }
    }
}

impl Transducer {
    pub fn new(obs_bound: u64, initial: usize, table: Vec<Vec<[Edge; 3]>>) -> Result<Self, SpecError> {
        let err = |m: String| Err(SpecError::Transducer(m));
        if obs_bound > MAX_OBS_BOUND {
            return err(format!("obsBound {obs_bound} exceeds {MAX_OBS_BOUND}"));
        }
        if table.is_empty() {
            return err("no states".into());
        }
        if initial >= table.len() {
            return err(format!("initial state {initial} out of range"));
        }
        let width = obs_bound as usize + 2;
        for (s, row) in table.iter().enumerate() {
            if row.len() != width {
                return err(format!(
                    "state {s} has {} observation classes, expected {width}",
                    row.len()
                ));
            }
            for edge in row.iter().flatten() {
                if edge.next >= table.len() {
                    return err(format!("state {s} points to missing state {}", edge.next));
                }
            }
        }
        Ok(Transducer {
            obs_bound,
            initial,
            table,
        })
    }

    pub fn obs_bound(&self) -> u64 {
        self.obs_bound
    }

    pub fn states(&self) -> usize {
        self.table.len()
    }

    pub fn act(&self, history: &[Percept]) -> Action {
        let mut state = self.initial;
        let mut action = Action::SKIP;
        for p in history {
            let edge = self.table[state][class_index(p.observation, self.obs_bound)][p.reward.sign().index()];
            state = edge.next;
            action = edge.action;
        }
        action
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: i64, o: u64) -> Percept {
        Percept::new(Reward::from_integer(r), o)
    }

    fn pq(n: i64, d: i64, o: u64) -> Percept {
        Percept::new(Reward::new(n, d), o)
    }

    #[test]
    fn constant_ignores_history() {
        let a = AgentSpec::constant(1);
        assert_eq!(a.act(&[]), Action(1));
        assert_eq!(a.act(&[p(5, 2), p(-1, 9)]), Action(1));
    }

    #[test]
    fn regurgitator_plays_ith_action() {
        let a = AgentSpec::regurgitator(&[3, 1, 4]);
        assert_eq!(a.act(&[p(0, 0), p(0, 0)]), Action(1));
        assert_eq!(a.act(&[p(0, 0)]), Action(3));
        assert_eq!(a.act(&vec![p(0, 0); 7]), Action(4));
        assert_eq!(AgentSpec::regurgitator(&[]).act(&[p(0, 0)]), Action::SKIP);
    }

    #[test]
    fn restrict_skips_once_threshold_met() {
        let a = AgentSpec::Restrict {
            inner: Box::new(AgentSpec::constant(1)),
            threshold: Reward::zero(),
        };
        assert_eq!(a.act(&[pq(1, 2, 0)]), Action::SKIP);
        let b = AgentSpec::Restrict {
            inner: Box::new(AgentSpec::constant(1)),
            threshold: Reward::one(),
        };
        assert_eq!(b.act(&[pq(1, 2, 0)]), Action(1));
        assert_eq!(b.act(&[pq(1, 2, 0), pq(1, 2, 0)]), Action::SKIP);
    }

    #[test]
    fn scripted_prefix_then_cycle() {
        let a = AgentSpec::scripted(&[7], &[1, 2]);
        let acts: Vec<u64> = (1..=5).map(|n| a.act(&vec![p(0, 0); n]).0).collect();
        assert_eq!(acts, vec![7, 1, 2, 1, 2]);
        let b = AgentSpec::scripted(&[5], &[]);
        assert_eq!(b.act(&[p(0, 0), p(0, 0)]), Action::SKIP);
    }

    fn echo_parity() -> Transducer {
        // state 0 only; observation classes {0, 1, other}; plays 1 after an
        // even class and 2 otherwise, regardless of reward sign
        let e = |a| Edge {
            next: 0,
            action: Action(a),
        };
        Transducer::new(1, 0, vec![vec![[e(1); 3], [e(2); 3], [e(2); 3]]]).unwrap()
    }

    #[test]
    fn transducer_follows_table() {
        let t = echo_parity();
        assert_eq!(t.act(&[]), Action::SKIP);
        assert_eq!(t.act(&[p(0, 0)]), Action(1));
        assert_eq!(t.act(&[p(0, 0), p(3, 1)]), Action(2));
        assert_eq!(t.act(&[p(0, 9)]), Action(2));
    }

    #[test]
    fn transducer_reads_reward_sign() {
        let e = |n, a| Edge {
            next: n,
            action: Action(a),
        };
        // two states: a negative reward latches into state 1 which plays 9
        let row0 = vec![[e(1, 9), e(0, 1), e(0, 1)]; 2];
        let row1 = vec![[e(1, 9); 3]; 2];
        let t = Transducer::new(0, 0, vec![row0, row1]).unwrap();
        assert_eq!(t.act(&[p(1, 0), p(0, 0)]), Action(1));
        assert_eq!(t.act(&[p(-1, 0), p(1, 0)]), Action(9));
    }

    #[test]
    fn transducer_rejects_partial_tables() {
        let e = Edge {
            next: 0,
            action: Action(0),
        };
        assert!(Transducer::new(1, 0, vec![vec![[e; 3]; 2]]).is_err());
        assert!(Transducer::new(0, 1, vec![vec![[e; 3]; 2]]).is_err());
        let dangling = Edge {
            next: 3,
            action: Action(0),
        };
        assert!(Transducer::new(0, 0, vec![vec![[dangling; 3]; 2]]).is_err());
        assert!(Transducer::new(0, 0, vec![]).is_err());
    }

    #[test]
    fn team_parity_branches_on_first_observation() {
        let t = AgentSpec::TeamParity {
            left: Box::new(AgentSpec::constant(1)),
            right: Box::new(AgentSpec::constant(2)),
        };
        assert_eq!(t.act(&[p(0, 4), p(0, 5)]), Action(1));
        assert_eq!(t.act(&[p(0, 5), p(0, 4)]), Action(2));
    }

    #[test]
    fn serde_round_trip_nested() {
        let a = AgentSpec::Restrict {
            inner: Box::new(AgentSpec::TeamSplit {
                left: Box::new(AgentSpec::Transducer(echo_parity())),
                right: Box::new(AgentSpec::scripted(&[1], &[2, 0])),
                predicate: PrefixPredicate::FirstObsEven,
            }),
            threshold: Reward::new(5, 2),
        };
        let json = serde_json::to_string(&a).unwrap();
        let back: AgentSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert_eq!(a.depth(), 3);
    }

    #[test]
    fn serde_rejects_bad_transducer() {
        let json = r#"{"kind":"transducer","obsBound":0,"initial":0,"table":[[[{"next":0,"action":1},{"next":0,"action":1},{"next":0,"action":1}]]]}"#;
        let err = serde_json::from_str::<AgentSpec>(json).unwrap_err();
        assert!(err.to_string().contains("observation classes"), "{err}");
    }
}
