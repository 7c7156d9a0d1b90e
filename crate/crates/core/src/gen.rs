//! Seeded random instances for the property suites.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::electorate::{Electorate, Sigma};
use crate::model::{Action, AgentSpec, Class, Edge, EnvSpec, EnvTransition, Environment, Percept, Transducer};
use crate::operators::{restrict, team_parity, team_split, PrefixPredicate};
use crate::reward::Reward;
use crate::ultrafilter::UltrafilterOracle;
use crate::upset::UpSet;

/// Flags every generated environment must satisfy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnvConstraints {
    pub respects_skipping: bool,
    pub bounded_rewards: bool,
    pub merciful: bool,
}

impl EnvConstraints {
    pub const NONE: EnvConstraints = EnvConstraints {
        respects_skipping: false,
        bounded_rewards: false,
        merciful: false,
    };
}

/// Size limits for generated electorates.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_pool: usize,
    pub min_horizon: u32,
    pub max_horizon: u32,
    pub max_states: usize,
    pub max_pre: usize,
    pub max_cycle: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_pool: 8,
            min_horizon: 1,
            max_horizon: 8,
            max_states: 4,
            max_pre: 4,
            max_cycle: 12,
        }
    }
}

const REWARDS: [(i64, i64); 9] = [(-1, 1), (-1, 2), (0, 1), (0, 1), (1, 3), (1, 2), (1, 1), (3, 2), (2, 1)];
const MAX_ACTION: u64 = 4;
const MAX_OBS: u64 = 5;

pub fn reward<R: Rng>(rng: &mut R, c: EnvConstraints) -> Reward {
    loop {
        let &(n, d) = REWARDS.choose(rng).expect("nonempty");
        let r = Reward::new(n, d);
        if c.bounded_rewards && r > Reward::one() {
            continue;
        }
        if c.merciful && r.is_negative() {
            continue;
        }
        return r;
    }
}

pub fn env_spec<R: Rng>(rng: &mut R, c: EnvConstraints, limits: &Limits) -> EnvSpec {
    let action_bound = rng.random_range(0..=3u64);
    let n_states = rng.random_range(1..=limits.max_states);
    let states = (0..n_states)
        .map(|_| {
            (0..action_bound as usize + 2)
                .map(|class| {
                    let r = if class == 0 && c.respects_skipping {
                        Reward::zero()
                    } else {
                        reward(rng, c)
                    };
                    EnvTransition::new(rng.random_range(0..n_states), r, rng.random_range(0..=MAX_OBS))
                })
                .collect()
        })
        .collect();
    let initial = Percept::new(reward(rng, c), rng.random_range(0..=MAX_OBS));
    let horizon = rng.random_range(limits.min_horizon..=limits.max_horizon);
    EnvSpec::new(action_bound, rng.random_range(0..n_states), initial, states, Some(horizon))
        .expect("generated envs are total")
}

pub fn environment<R: Rng>(rng: &mut R, c: EnvConstraints, limits: &Limits) -> Environment {
    Environment::new(env_spec(rng, c, limits)).expect("generated envs have a horizon")
}

fn action<R: Rng>(rng: &mut R) -> u64 {
    rng.random_range(0..=MAX_ACTION)
}

pub fn transducer<R: Rng>(rng: &mut R) -> Transducer {
    let obs_bound = rng.random_range(0..=3u64);
    let n = rng.random_range(1..=3usize);
    let table = (0..n)
        .map(|_| {
            (0..obs_bound as usize + 2)
                .map(|_| {
                    std::array::from_fn(|_| Edge {
                        next: rng.random_range(0..n),
                        action: Action(action(rng)),
                    })
                })
                .collect()
        })
        .collect();
    Transducer::new(obs_bound, rng.random_range(0..n), table).expect("generated tables are total")
}

pub fn leaf_agent<R: Rng>(rng: &mut R) -> AgentSpec {
    match rng.random_range(0..4) {
        0 => AgentSpec::constant(action(rng)),
        1 => {
            let prefix: Vec<u64> = (0..rng.random_range(0..=3)).map(|_| action(rng)).collect();
            let cycle: Vec<u64> = (0..rng.random_range(1..=3)).map(|_| action(rng)).collect();
            AgentSpec::scripted(&prefix, &cycle)
        }
        _ => AgentSpec::Transducer(transducer(rng)),
    }
}

/// A random agent of combinator depth at most `depth`.
///
/// With `magnitude_blind` set, no part of the agent compares reward sums
/// against a threshold.
pub fn agent<R: Rng>(rng: &mut R, depth: usize, magnitude_blind: bool) -> AgentSpec {
    if depth <= 1 || rng.random_bool(0.5) {
        return leaf_agent(rng);
    }
    let sub = |rng: &mut R| agent(rng, depth - 1, magnitude_blind);
    match rng.random_range(0..if magnitude_blind { 2 } else { 3 }) {
        0 => team_parity(sub(rng), sub(rng)),
        1 => {
            let x = predicate(rng, 2, magnitude_blind);
            team_split(sub(rng), sub(rng), x)
        }
        _ => {
            let r = reward(rng, EnvConstraints::NONE) + reward(rng, EnvConstraints::NONE);
            restrict(sub(rng), r)
        }
    }
}

pub fn predicate<R: Rng>(rng: &mut R, depth: usize, magnitude_blind: bool) -> PrefixPredicate {
    if depth <= 1 || rng.random_bool(0.6) {
        return loop {
            let atom = match rng.random_range(0..6) {
                0 => PrefixPredicate::FirstObsEven,
                1 => PrefixPredicate::LengthAtLeast(rng.random_range(0..=4)),
                2 => PrefixPredicate::CumulativeRewardAtLeast(reward(rng, EnvConstraints::NONE)),
                3 => {
                    let bound = rng.random_range(0..=3);
                    let class = if rng.random_bool(0.2) {
                        Class::Other
                    } else {
                        Class::Value(rng.random_range(0..=bound))
                    };
                    PrefixPredicate::ObservationAtIndexInClass {
                        index: rng.random_range(1..=3),
                        bound,
                        class,
                    }
                }
                4 => PrefixPredicate::All,
                _ => PrefixPredicate::None,
            };
            if !(magnitude_blind && atom.reads_reward_magnitudes()) {
                break atom;
            }
        };
    }
    let sub = |rng: &mut R| predicate(rng, depth - 1, magnitude_blind);
    match rng.random_range(0..3) {
        0 => PrefixPredicate::And(vec![sub(rng), sub(rng)]),
        1 => PrefixPredicate::Or(vec![sub(rng), sub(rng)]),
        _ => PrefixPredicate::Not(Box::new(sub(rng))),
    }
}

pub fn sigma<R: Rng>(rng: &mut R, pool: usize, limits: &Limits) -> Sigma {
    let pre = (0..rng.random_range(0..=limits.max_pre)).map(|_| rng.random_range(0..pool)).collect();
    let cycle = (0..rng.random_range(1..=limits.max_cycle)).map(|_| rng.random_range(0..pool)).collect();
    Sigma::new(pre, cycle).expect("nonempty cycle")
}

pub fn oracle<R: Rng>(rng: &mut R) -> UltrafilterOracle {
    if rng.random_bool(0.3) {
        UltrafilterOracle::Principal {
            at: rng.random_range(0..40),
        }
    } else {
        UltrafilterOracle::Generic { seed: rng.random() }
    }
}

pub fn electorate_with<R: Rng>(rng: &mut R, c: EnvConstraints, limits: &Limits, oracle: UltrafilterOracle) -> Electorate {
    let n = rng.random_range(1..=limits.max_pool);
    let pool = (0..n).map(|_| environment(rng, c, limits)).collect();
    let s = sigma(rng, n, limits);
    Electorate::new(pool, s, oracle).expect("sigma indexes the pool")
}

pub fn electorate<R: Rng>(rng: &mut R, c: EnvConstraints, limits: &Limits) -> Electorate {
    let u = oracle(rng);
    electorate_with(rng, c, limits, u)
}

/// A random ultimately periodic set with threshold below 20 and period at
/// most 64, small periods being more likely.
pub fn upset<R: Rng>(rng: &mut R) -> UpSet {
    let period = if rng.random_bool(0.75) {
        rng.random_range(1..=12)
    } else {
        rng.random_range(1..=64)
    };
    let threshold = rng.random_range(0..20);
    let density = rng.random_range(0.0..=1.0);
    let residues: Vec<u64> = (0..period).filter(|_| rng.random_bool(density)).collect();
    let exceptions: Vec<u64> = (0..threshold).filter(|_| rng.random_bool(0.3)).collect();
    UpSet::new(threshold, period, residues, exceptions).expect("generated sets are well formed")
}

pub fn finite_set<R: Rng>(rng: &mut R) -> UpSet {
    let n = rng.random_range(0..=8);
    UpSet::finite((0..n).map(|_| rng.random_range(0..200)))
}

pub fn cofinite_set<R: Rng>(rng: &mut R) -> UpSet {
    let n = rng.random_range(0..=8);
    UpSet::cofinite((0..n).map(|_| rng.random_range(0..200)))
}

/// A random history of `len` percepts with rewards from the full table.
pub fn history<R: Rng>(rng: &mut R, len: usize) -> Vec<Percept> {
    (0..len)
        .map(|_| Percept::new(reward(rng, EnvConstraints::NONE), rng.random_range(0..=MAX_OBS)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_env;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constraints_are_honoured() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = EnvConstraints {
            respects_skipping: true,
            bounded_rewards: true,
            merciful: true,
        };
        for _ in 0..200 {
            let f = validate_env(&env_spec(&mut rng, c, &Limits::default())).flags;
            assert!(f.respects_skipping && f.bounded_rewards && f.merciful);
        }
    }

    #[test]
    fn blind_agents_do_not_read_magnitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            assert!(!agent(&mut rng, 3, true).reads_reward_magnitudes());
        }
    }

    #[test]
    fn same_seed_same_instances() {
        let a = electorate(&mut ChaCha8Rng::seed_from_u64(9), EnvConstraints::NONE, &Limits::default());
        let b = electorate(&mut ChaCha8Rng::seed_from_u64(9), EnvConstraints::NONE, &Limits::default());
        assert_eq!(a, b);
    }

    #[test]
    fn upsets_within_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let s = upset(&mut rng);
            assert!(s.period() <= 64 && s.threshold() < 20);
            assert!(finite_set(&mut rng).is_finite());
            assert!(cofinite_set(&mut rng).is_cofinite());
        }
    }
}
