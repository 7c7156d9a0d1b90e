use std::fmt;

use serde::{Deserialize, Serialize};

use super::{class_index, Action, Percept};
use crate::error::SpecError;
use crate::reward::Reward;

const MAX_ACTION_BOUND: u64 = 1 << 12;

/// A single entry of an environment's transition map.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvTransition {
    pub next: usize,
    pub reward: Reward,
    pub obs: u64,
}

impl EnvTransition {
    pub fn new(next: usize, reward: Reward, obs: u64) -> Self {
        EnvTransition { next, reward, obs }
    }

    pub fn percept(&self) -> Percept {
        Percept::new(self.reward.clone(), self.obs)
    }
}

/// A deterministic pre-environment given as a finite transducer.
///
/// The empty action sequence yields `initial`. Each action moves along
/// `states[state][action_class]`, where action classes are
/// `{0, ..., action_bound, other}`. When a horizon `T` is declared, every
/// action sequence of length at least `T` yields `(0, 0)`.
///
/// A spec without a horizon is still a valid pre-environment; it only
/// becomes an [`Environment`] after [`validate_env`] finds no violations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EnvDoc", into = "EnvDoc")]
pub struct EnvSpec {
    action_bound: u64,
    initial_state: usize,
    initial: Percept,
    states: Vec<Vec<EnvTransition>>,
    horizon: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct EnvDoc {
    action_bound: u64,
    #[serde(default)]
    initial_state: usize,
    initial: Percept,
    states: Vec<Vec<EnvTransition>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<u32>,
}

impl TryFrom<EnvDoc> for EnvSpec {
    type Error = SpecError;

    fn try_from(d: EnvDoc) -> Result<Self, SpecError> {
        EnvSpec::new(d.action_bound, d.initial_state, d.initial, d.states, d.horizon)
    }
}

impl From<EnvSpec> for EnvDoc {
    fn from(e: EnvSpec) -> Self {
        EnvDoc {
            action_bound: e.action_bound,
            initial_state: e.initial_state,
            initial: e.initial,
            states: e.states,
            horizon: e.horizon,
        }
    }
}

impl EnvSpec {
    /// Builds a spec, rejecting transition maps that are not total.
    pub fn new(
        action_bound: u64,
        initial_state: usize,
        initial: Percept,
        states: Vec<Vec<EnvTransition>>,
        horizon: Option<u32>,
    ) -> Result<Self, SpecError> {
        let err = |m: String| Err(SpecError::Environment(m));
        if action_bound > MAX_ACTION_BOUND {
            return err(format!("actionBound {action_bound} exceeds {MAX_ACTION_BOUND}"));
        }
        if states.is_empty() {
            return err("no states".into());
        }
        if initial_state >= states.len() {
            return err(format!("initial state {initial_state} out of range"));
        }
        let width = action_bound as usize + 2;
        for (s, row) in states.iter().enumerate() {
            if row.len() != width {
                return err(format!(
                    "state {s} has {} action classes, expected {width}",
                    row.len()
                ));
            }
            if let Some(t) = row.iter().find(|t| t.next >= states.len()) {
                return err(format!("state {s} points to missing state {}", t.next));
            }
        }
        Ok(EnvSpec {
            action_bound,
            initial_state,
            initial,
            states,
            horizon,
        })
    }

    /// One state, every action answered with `percept`.
    pub fn constant(percept: Percept, horizon: Option<u32>) -> EnvSpec {
        let t = EnvTransition::new(0, percept.reward.clone(), percept.observation);
        EnvSpec::new(0, 0, percept, vec![vec![t.clone(), t]], horizon).expect("constant env is total")
    }

    /// The environment that answers `(0, 0)` to everything.
    pub fn zero(horizon: u32) -> EnvSpec {
        EnvSpec::constant(Percept::zero(), Some(horizon))
    }

    pub fn action_bound(&self) -> u64 {
        self.action_bound
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn initial(&self) -> &Percept {
        &self.initial
    }

    pub fn states(&self) -> &[Vec<EnvTransition>] {
        &self.states
    }

    pub fn horizon(&self) -> Option<u32> {
        self.horizon
    }

    pub fn cursor(&self) -> EnvCursor<'_> {
        EnvCursor {
            env: self,
            state: self.initial_state,
            taken: 0,
        }
    }

    /// Every emitted reward, initial emission included, multiplied by `factor`.
    pub fn scale_rewards(&self, factor: &Reward) -> EnvSpec {
        let mut out = self.clone();
        out.initial.reward = &out.initial.reward * factor;
        for t in out.states.iter_mut().flatten() {
            t.reward = &t.reward * factor;
        }
        out
    }

    /// Every reward this spec can emit, post-horizon zeros excluded.
    fn emitted_rewards(&self) -> impl Iterator<Item = &Reward> {
        std::iter::once(&self.initial.reward).chain(self.states.iter().flatten().map(|t| &t.reward))
    }
}

/// Incremental evaluation of `e(a_1, ..., a_n)` along one action sequence.
#[derive(Debug, Clone)]
pub struct EnvCursor<'a> {
    env: &'a EnvSpec,
    state: usize,
    taken: usize,
}

impl EnvCursor<'_> {
    /// Feeds the next action and returns the environment's response to the
    /// whole action sequence so far.
    pub fn advance(&mut self, action: Action) -> Percept {
        self.taken += 1;
        if let Some(h) = self.env.horizon {
            if self.taken >= h as usize {
                return Percept::zero();
            }
        }
        let t = &self.env.states[self.state][class_index(action.0, self.env.action_bound)];
        self.state = t.next;
        t.percept()
    }
}

/// `e(a_1, ..., a_n)`, evaluated from scratch.
pub fn env_respond(env: &EnvSpec, actions: &[Action]) -> Percept {
    let mut cursor = env.cursor();
    let mut out = env.initial.clone();
    for &a in actions {
        out = cursor.advance(a);
    }
    out
}

/// Structural properties checked by enumerating every state and action class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnvFlags {
    /// Every response to a skip action carries reward 0.
    pub respects_skipping: bool,
    /// No emitted reward exceeds 1.
    pub bounded_rewards: bool,
    /// No emitted reward is negative.
    pub merciful: bool,
}

impl EnvFlags {
    pub fn all() -> Self {
        EnvFlags {
            respects_skipping: true,
            bounded_rewards: true,
            merciful: true,
        }
    }

    pub fn and(self, other: EnvFlags) -> EnvFlags {
        EnvFlags {
            respects_skipping: self.respects_skipping && other.respects_skipping,
            bounded_rewards: self.bounded_rewards && other.bounded_rewards,
            merciful: self.merciful && other.merciful,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum EnvViolation {
    MissingHorizon,
    ZeroHorizon,
}

impl fmt::Display for EnvViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvViolation::MissingHorizon => f.write_str(
                "no horizon declared: total reward must converge for every agent, \
                 and only a finite horizon with an absorbing zero-reward state guarantees it",
            ),
            EnvViolation::ZeroHorizon => f.write_str("horizon must be a positive integer"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnvReport {
    pub violations: Vec<EnvViolation>,
    pub flags: EnvFlags,
}

impl EnvReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks convergence and computes the skip/bounded/merciful flags.
pub fn validate_env(env: &EnvSpec) -> EnvReport {
    let mut violations = Vec::new();
    match env.horizon {
        None => violations.push(EnvViolation::MissingHorizon),
        Some(0) => violations.push(EnvViolation::ZeroHorizon),
        Some(_) => {}
    }
    let zero = Reward::zero();
    let one = Reward::one();
    let flags = EnvFlags {
        respects_skipping: env.states.iter().all(|row| row[0].reward.is_zero()),
        bounded_rewards: env.emitted_rewards().all(|r| *r <= one),
        merciful: env.emitted_rewards().all(|r| *r >= zero),
    };
    EnvReport { violations, flags }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not an environment: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub violations: Vec<EnvViolation>,
}

/// A pre-environment whose total reward provably converges for every agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Environment {
    spec: EnvSpec,
    horizon: u32,
    flags: EnvFlags,
}

impl Environment {
    pub fn new(spec: EnvSpec) -> Result<Self, ValidationError> {
        let report = validate_env(&spec);
        if !report.is_ok() {
            return Err(ValidationError {
                violations: report.violations,
            });
        }
        let horizon = spec.horizon.expect("validated");
        Ok(Environment {
            spec,
            horizon,
            flags: report.flags,
        })
    }

    pub fn zero(horizon: u32) -> Self {
        Environment::new(EnvSpec::zero(horizon.max(1))).expect("zero env is valid")
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn flags(&self) -> EnvFlags {
        self.flags
    }

    /// Number of percepts that can carry nonzero reward, plus one.
    pub fn decisive_steps(&self) -> usize {
        self.horizon as usize + 1
    }

    pub fn scale_rewards(&self, factor: &Reward) -> Environment {
        assert!(factor.is_positive(), "scale factor must be positive");
        Environment::new(self.spec.scale_rewards(factor)).expect("scaling preserves validity")
    }
}

impl Serialize for Environment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.spec.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Environment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let spec = EnvSpec::deserialize(d)?;
        Environment::new(spec).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(next: usize, r: Reward, o: u64) -> EnvTransition {
        EnvTransition::new(next, r, o)
    }

    /// Initial (0,5); after action class 1 on the first step (1,0), else (0,0).
    fn e1() -> EnvSpec {
        let z = Reward::zero;
        EnvSpec::new(
            1,
            0,
            Percept::new(z(), 5),
            vec![
                vec![t(1, z(), 0), t(1, Reward::one(), 0), t(1, z(), 0)],
                vec![t(1, z(), 0), t(1, z(), 0), t(1, z(), 0)],
            ],
            Some(2),
        )
        .unwrap()
    }

    #[test]
    fn zero_env_always_answers_zero() {
        let e = EnvSpec::zero(4);
        for n in 0..10 {
            let actions: Vec<Action> = (0..n).map(Action).collect();
            assert_eq!(env_respond(&e, &actions), Percept::zero());
        }
    }

    #[test]
    fn empty_sequence_gives_initial_emission() {
        assert_eq!(env_respond(&e1(), &[]), Percept::new(Reward::zero(), 5));
    }

    #[test]
    fn post_horizon_is_zero() {
        let e = EnvSpec::constant(Percept::new(Reward::one(), 3), Some(3));
        assert_eq!(env_respond(&e, &[Action(1), Action(1)]).reward, Reward::one());
        for n in 3..8 {
            let p = env_respond(&e, &vec![Action(1); n]);
            assert_eq!(p, Percept::zero());
        }
    }

    #[test]
    fn e1_transitions() {
        let e = e1();
        assert_eq!(env_respond(&e, &[Action(1)]), Percept::new(Reward::one(), 0));
        assert_eq!(env_respond(&e, &[Action(0)]), Percept::zero());
        assert_eq!(env_respond(&e, &[Action(7)]), Percept::zero());
        assert_eq!(env_respond(&e, &[Action(1), Action(1)]), Percept::zero());
    }

    #[test]
    fn constant_emitter_without_horizon_is_rejected() {
        let e = EnvSpec::constant(Percept::new(Reward::one(), 0), None);
        let report = validate_env(&e);
        assert_eq!(report.violations, vec![EnvViolation::MissingHorizon]);
        assert!(Environment::new(e).is_err());
        let zero_h = EnvSpec::constant(Percept::zero(), Some(0));
        assert_eq!(validate_env(&zero_h).violations, vec![EnvViolation::ZeroHorizon]);
    }

    #[test]
    fn zero_env_has_all_flags() {
        let report = validate_env(&EnvSpec::zero(3));
        assert!(report.is_ok());
        assert_eq!(report.flags, EnvFlags::all());
    }

    #[test]
    fn flags_detect_each_property() {
        let big = EnvSpec::constant(Percept::new(Reward::new(3, 2), 0), Some(2));
        let f = validate_env(&big).flags;
        assert!(!f.bounded_rewards);
        assert!(f.merciful);
        assert!(!f.respects_skipping);

        let neg = EnvSpec::constant(Percept::new(Reward::new(-1, 2), 0), Some(2));
        assert!(!validate_env(&neg).flags.merciful);

        let f1 = validate_env(&e1()).flags;
        assert_eq!(f1, EnvFlags::all());
    }

    #[test]
    fn non_total_maps_are_rejected() {
        let z = Reward::zero;
        assert!(EnvSpec::new(1, 0, Percept::zero(), vec![vec![t(0, z(), 0); 2]], Some(1)).is_err());
        assert!(EnvSpec::new(0, 0, Percept::zero(), vec![vec![t(2, z(), 0); 2]], Some(1)).is_err());
        assert!(EnvSpec::new(0, 3, Percept::zero(), vec![vec![t(0, z(), 0); 2]], Some(1)).is_err());
    }

    #[test]
    fn json_round_trip_and_missing_horizon() {
        let e = e1();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<EnvSpec>(&json).unwrap(), e);
        let no_h = r#"{"actionBound":0,"initial":{"reward":"1","obs":0},
            "states":[[{"next":0,"reward":"1","obs":0},{"next":0,"reward":"1","obs":0}]]}"#;
        let spec: EnvSpec = serde_json::from_str(no_h).unwrap();
        assert_eq!(spec.horizon(), None);
        assert!(serde_json::from_str::<Environment>(no_h).is_err());
    }

    #[test]
    fn scaling_multiplies_every_reward() {
        let e = e1().scale_rewards(&Reward::new(1, 3));
        assert_eq!(env_respond(&e, &[Action(1)]).reward, Reward::new(1, 3));
    }
}
