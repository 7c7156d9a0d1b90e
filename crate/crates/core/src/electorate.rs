//! Electorates: an environment sequence paired with an ultrafilter, and the
//! intelligence comparator they induce.
//!
//! The sequence is `e_n = pool[sigma(n)]` for an eventually periodic index
//! map `sigma`, so every verdict set `{n : A outperforms B on e_n}` is
//! ultimately periodic and the ultrafilter can decide it.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SpecError;
use crate::model::{total_reward, AgentSpec, EnvFlags, Environment, Performance};
use crate::reward::Reward;
use crate::ultrafilter::{SetFilter, UltrafilterOracle};
use crate::upset::UpSet;

/// An eventually periodic map `n ↦ pool index`: `pre[n]` for
/// `n < pre.len()`, then `cycle[(n - pre.len()) mod cycle.len()]`.
///
/// Kept canonical: the cycle has minimal length and the pre-period is as
/// short as possible.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SigmaDoc", into = "SigmaDoc")]
pub struct Sigma {
    pre: Vec<usize>,
    cycle: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SigmaDoc {
    #[serde(default)]
    pre: Vec<usize>,
    period: Vec<usize>,
}

impl TryFrom<SigmaDoc> for Sigma {
    type Error = SpecError;

    fn try_from(d: SigmaDoc) -> Result<Self, SpecError> {
        Sigma::new(d.pre, d.period)
    }
}

impl From<Sigma> for SigmaDoc {
    fn from(s: Sigma) -> Self {
        SigmaDoc {
            pre: s.pre,
            period: s.cycle,
        }
    }
}

impl Sigma {
    pub fn new(mut pre: Vec<usize>, mut cycle: Vec<usize>) -> Result<Sigma, SpecError> {
        if cycle.is_empty() {
            return Err(SpecError::Electorate("sigma period must be nonempty".into()));
        }
        let p = cycle.len();
        let q = (1..=p)
            .filter(|q| p.is_multiple_of(*q))
            .find(|&q| (q..p).all(|i| cycle[i] == cycle[i % q]))
            .unwrap_or(p);
        cycle.truncate(q);
        while pre.last().is_some_and(|&x| Some(&x) == cycle.last()) {
            pre.pop();
            cycle.rotate_right(1);
        }
        Ok(Sigma { pre, cycle })
    }

    /// The constant map to `index`.
    pub fn constant(index: usize) -> Sigma {
        Sigma {
            pre: Vec::new(),
            cycle: vec![index],
        }
    }

    pub fn at(&self, n: u64) -> usize {
        let n0 = self.pre.len() as u64;
        if n < n0 {
            self.pre[n as usize]
        } else {
            self.cycle[((n - n0) % self.cycle.len() as u64) as usize]
        }
    }

    pub fn threshold(&self) -> u64 {
        self.pre.len() as u64
    }

    pub fn period(&self) -> u64 {
        self.cycle.len() as u64
    }

    pub fn pre(&self) -> &[usize] {
        &self.pre
    }

    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }

    fn max_index(&self) -> usize {
        self.pre.iter().chain(&self.cycle).copied().max().unwrap_or(0)
    }

    /// `{n : pred(sigma(n))}` as an ultimately periodic set.
    pub fn preimage(&self, pred: impl Fn(usize) -> bool) -> UpSet {
        UpSet::from_rule(self.threshold(), self.period(), |n| pred(self.at(n)))
    }
}

/// The three-way verdict of an electorate on a pair of agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Verdict {
    MoreIntelligent,
    LessIntelligent,
    EquallyIntelligent,
}

impl Verdict {
    /// `"A>B"`, `"A<B"` or `"A=B"`.
    pub fn token(self) -> &'static str {
        match self {
            Verdict::MoreIntelligent => "A>B",
            Verdict::LessIntelligent => "A<B",
            Verdict::EquallyIntelligent => "A=B",
        }
    }

    pub fn flip(self) -> Verdict {
        match self {
            Verdict::MoreIntelligent => Verdict::LessIntelligent,
            Verdict::LessIntelligent => Verdict::MoreIntelligent,
            Verdict::EquallyIntelligent => Verdict::EquallyIntelligent,
        }
    }
}

impl From<Performance> for Verdict {
    fn from(p: Performance) -> Verdict {
        match p {
            Performance::Outperforms => Verdict::MoreIntelligent,
            Performance::Underperforms => Verdict::LessIntelligent,
            Performance::EqualReward => Verdict::EquallyIntelligent,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Index sets where `A` outperforms, underperforms, or ties `B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictSets {
    pub outperforms: UpSet,
    pub underperforms: UpSet,
    pub equal: UpSet,
}

impl VerdictSets {
    pub fn get(&self, v: Verdict) -> &UpSet {
        match v {
            Verdict::MoreIntelligent => &self.outperforms,
            Verdict::LessIntelligent => &self.underperforms,
            Verdict::EquallyIntelligent => &self.equal,
        }
    }

    /// The unique verdict whose set `filter` contains, or `None` if the
    /// filter accepts zero or several of them.
    pub fn decide(&self, filter: &impl SetFilter) -> Option<Verdict> {
        let hits: Vec<Verdict> = [
            Verdict::MoreIntelligent,
            Verdict::LessIntelligent,
            Verdict::EquallyIntelligent,
        ]
        .into_iter()
        .filter(|&v| filter.contains(self.get(v)))
        .collect();
        match hits.as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }
}

/// Serializes with every pool environment inline; see [`crate::io`] for
/// the file form that may reference environments by path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ElectorateDoc", into = "ElectorateDoc")]
pub struct Electorate {
    pool: Vec<Environment>,
    sigma: Sigma,
    oracle: UltrafilterOracle,
    flags: EnvFlags,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElectorateDoc {
    pool: Vec<Environment>,
    sigma: Sigma,
    ultrafilter: UltrafilterOracle,
}

impl TryFrom<ElectorateDoc> for Electorate {
    type Error = SpecError;

    fn try_from(d: ElectorateDoc) -> Result<Self, SpecError> {
        Electorate::new(d.pool, d.sigma, d.ultrafilter)
    }
}

impl From<Electorate> for ElectorateDoc {
    fn from(e: Electorate) -> Self {
        ElectorateDoc {
            pool: e.pool,
            sigma: e.sigma,
            ultrafilter: e.oracle,
        }
    }
}

impl Electorate {
    pub fn new(pool: Vec<Environment>, sigma: Sigma, oracle: UltrafilterOracle) -> Result<Self, SpecError> {
        if pool.is_empty() {
            return Err(SpecError::Electorate("environment pool is empty".into()));
        }
        if sigma.max_index() >= pool.len() {
            return Err(SpecError::Electorate(format!(
                "sigma refers to pool index {} but the pool has {} environments",
                sigma.max_index(),
                pool.len()
            )));
        }
        let flags = pool.iter().fold(EnvFlags::all(), |acc, e| acc.and(e.flags()));
        Ok(Electorate {
            pool,
            sigma,
            oracle,
            flags,
        })
    }

    pub fn pool(&self) -> &[Environment] {
        &self.pool
    }

    pub fn sigma(&self) -> &Sigma {
        &self.sigma
    }

    pub fn oracle(&self) -> &UltrafilterOracle {
        &self.oracle
    }

    /// Conjunction of the pool's flags.
    pub fn flags(&self) -> EnvFlags {
        self.flags
    }

    pub fn with_oracle(&self, oracle: UltrafilterOracle) -> Electorate {
        Electorate {
            oracle,
            ..self.clone()
        }
    }

    pub fn scale_rewards(&self, factor: &Reward) -> Electorate {
        let pool = self.pool.iter().map(|e| e.scale_rewards(factor)).collect();
        Electorate::new(pool, self.sigma.clone(), self.oracle).expect("same shape")
    }

    /// `e_n`.
    pub fn env_at(&self, n: u64) -> &Environment {
        &self.pool[self.sigma.at(n)]
    }

    /// Total reward of `agent` on every pool environment.
    pub fn scores(&self, agent: &AgentSpec) -> Vec<Reward> {
        self.pool.iter().map(|e| total_reward(agent, e)).collect()
    }

    /// Verdict sets lifted from per-pool scores through `sigma`.
    pub fn verdict_sets_from_scores(&self, a: &[Reward], b: &[Reward]) -> VerdictSets {
        let outcome: Vec<Performance> = a.iter().zip(b).map(|(x, y)| Performance::from_totals(x, y)).collect();
        let lift = |p: Performance| self.sigma.preimage(|i| outcome[i] == p);
        VerdictSets {
            outperforms: lift(Performance::Outperforms),
            underperforms: lift(Performance::Underperforms),
            equal: lift(Performance::EqualReward),
        }
    }

    pub fn verdict_sets(&self, a: &AgentSpec, b: &AgentSpec) -> VerdictSets {
        self.verdict_sets_from_scores(&self.scores(a), &self.scores(b))
    }

    pub fn compare(&self, a: &AgentSpec, b: &AgentSpec) -> Verdict {
        self.decide(&self.verdict_sets(a, b))
    }

    /// The verdict for two agents given their per-pool scores.
    pub fn compare_scores(&self, a: &[Reward], b: &[Reward]) -> Verdict {
        self.decide(&self.verdict_sets_from_scores(a, b))
    }

    fn decide(&self, sets: &VerdictSets) -> Verdict {
        sets.decide(&self.oracle)
            .expect("an ultrafilter contains exactly one block of a partition")
    }

    /// Groups agents into equally intelligent classes, most intelligent
    /// class first. Classes list agent indices in input order.
    pub fn rank(&self, agents: &[AgentSpec]) -> Vec<Vec<usize>> {
        let scores: Vec<Vec<Reward>> = agents.par_iter().map(|a| self.scores(a)).collect();
        let cmp = |i: usize, j: usize| self.compare_scores(&scores[i], &scores[j]);
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..agents.len() {
            match classes
                .iter_mut()
                .find(|c| cmp(c[0], i) == Verdict::EquallyIntelligent)
            {
                Some(c) => c.push(i),
                None => classes.push(vec![i]),
            }
        }
        classes.sort_by(|x, y| match cmp(x[0], y[0]) {
            Verdict::MoreIntelligent => Ordering::Less,
            Verdict::LessIntelligent => Ordering::Greater,
            Verdict::EquallyIntelligent => Ordering::Equal,
        });
        classes
    }

    /// The pool index whose fibre `{n : sigma(n) = i}` the ultrafilter
    /// contains. The fibres partition the naturals, so exactly one is chosen.
    pub fn decisive_pool_index(&self) -> usize {
        (0..self.pool.len())
            .find(|&i| self.oracle.contains(&self.sigma.preimage(|j| j == i)))
            .expect("an ultrafilter contains exactly one block of a partition")
    }
}

/// `e_n` of electorate `e`.
pub fn env_at(e: &Electorate, n: u64) -> &Environment {
    e.env_at(n)
}

pub fn verdict_sets(e: &Electorate, a: &AgentSpec, b: &AgentSpec) -> VerdictSets {
    e.verdict_sets(a, b)
}

pub fn compare(e: &Electorate, a: &AgentSpec, b: &AgentSpec) -> Verdict {
    e.compare(a, b)
}

pub fn rank(e: &Electorate, agents: &[AgentSpec]) -> Vec<Vec<usize>> {
    e.rank(agents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{compare_on, regurgitator_of, EnvSpec, EnvTransition, Percept};

    /// Rewards action class `target` with 1; initial observation `obs`.
    fn reward_for(target: u64, obs: u64) -> Environment {
        let row: Vec<EnvTransition> = (0..4)
            .map(|c| EnvTransition::new(0, if c == target { Reward::one() } else { Reward::zero() }, obs))
            .collect();
        Environment::new(EnvSpec::new(2, 0, Percept::new(Reward::zero(), obs), vec![row], Some(3)).unwrap()).unwrap()
    }

    fn alternating(oracle: UltrafilterOracle) -> Electorate {
        Electorate::new(
            vec![reward_for(1, 0), reward_for(2, 1)],
            Sigma::new(vec![], vec![0, 1]).unwrap(),
            oracle,
        )
        .unwrap()
    }

    #[test]
    fn sigma_lookup() {
        let s = Sigma::new(vec![], vec![0, 1]).unwrap();
        assert_eq!(s.at(4), 0);
        assert_eq!(s.at(7), 1);
        let s = Sigma::new(vec![2], vec![0, 1]).unwrap();
        assert_eq!(s.at(0), 2);
        assert_eq!(s.at(1), 0);
        assert_eq!(s.at(2), 1);
    }

    #[test]
    fn sigma_canonicalizes() {
        let s = Sigma::new(vec![3, 0, 1], vec![0, 1, 0, 1]).unwrap();
        assert_eq!(s.pre(), &[3]);
        assert_eq!(s.cycle(), &[0, 1]);
        let raw = |n: u64| if n < 3 { [3usize, 0, 1][n as usize] } else { [0, 1, 0, 1][((n - 3) % 4) as usize] };
        assert!((0..40).all(|n| s.at(n) == raw(n)));
        let t = Sigma::new(vec![1, 1], vec![1]).unwrap();
        assert!(t.pre().is_empty());
        assert!(Sigma::new(vec![0], vec![]).is_err());
    }

    #[test]
    fn env_at_follows_sigma() {
        let pool = vec![Environment::zero(1), Environment::zero(2), Environment::zero(3)];
        let e = Electorate::new(pool, Sigma::new(vec![2], vec![0, 1]).unwrap(), UltrafilterOracle::Generic { seed: 0 }).unwrap();
        assert_eq!(e.env_at(0).horizon(), 3);
        assert_eq!(e.env_at(1).horizon(), 1);
        assert_eq!(e.env_at(2).horizon(), 2);
    }

    #[test]
    fn bad_pool_reference_rejected() {
        let err = Electorate::new(vec![Environment::zero(1)], Sigma::new(vec![], vec![0, 1]).unwrap(), UltrafilterOracle::Principal { at: 0 });
        assert!(err.is_err());
        assert!(Electorate::new(vec![], Sigma::constant(0), UltrafilterOracle::Principal { at: 0 }).is_err());
    }

    #[test]
    fn verdict_sets_on_alternating_sigma() {
        let e = alternating(UltrafilterOracle::Principal { at: 0 });
        let a = AgentSpec::constant(1);
        let b = AgentSpec::constant(2);
        let sets = e.verdict_sets(&a, &b);
        assert_eq!(sets.outperforms, UpSet::residue_class(0, 2));
        assert_eq!(sets.underperforms, UpSet::residue_class(1, 2));
        assert!(sets.equal.is_empty());
        // brute force over one pre-period plus two periods
        for n in 0..4 {
            let expect = compare_on(&a, &b, e.env_at(n));
            assert_eq!(sets.outperforms.member(n), expect == Performance::Outperforms);
            assert_eq!(sets.underperforms.member(n), expect == Performance::Underperforms);
        }
        let same = e.verdict_sets(&a, &a);
        assert_eq!(same.equal, UpSet::naturals());
        assert!(same.outperforms.is_empty() && same.underperforms.is_empty());
    }

    #[test]
    fn principal_at_zero_is_dictatorship_of_first_env() {
        let e = alternating(UltrafilterOracle::Principal { at: 0 });
        assert_eq!(e.compare(&AgentSpec::constant(1), &AgentSpec::constant(2)), Verdict::MoreIntelligent);
        let e = alternating(UltrafilterOracle::Principal { at: 3 });
        assert_eq!(e.compare(&AgentSpec::constant(1), &AgentSpec::constant(2)), Verdict::LessIntelligent);
    }

    #[test]
    fn generic_verdict_follows_r2_parity() {
        let a = AgentSpec::constant(1);
        let b = AgentSpec::constant(2);
        for seed in 0..16 {
            let g = crate::ultrafilter::GenericPoint::new(seed);
            let r2 = g.residue_path(2);
            let expected = if r2 == 0u32.into() { Verdict::MoreIntelligent } else { Verdict::LessIntelligent };
            assert_eq!(alternating(UltrafilterOracle::Generic { seed }).compare(&a, &b), expected);
        }
    }

    #[test]
    fn reflexive_and_symmetric() {
        let e = alternating(UltrafilterOracle::Generic { seed: 9 });
        let a = AgentSpec::constant(1);
        let b = AgentSpec::scripted(&[2], &[1]);
        assert_eq!(e.compare(&a, &a), Verdict::EquallyIntelligent);
        assert_eq!(e.compare(&a, &b), e.compare(&b, &a).flip());
    }

    fn ladder() -> Electorate {
        // rewards equal to the first action taken, capped at 3
        let row: Vec<EnvTransition> = (0..5)
            .map(|c| EnvTransition::new(1, Reward::from_integer(c.min(3) as i64), 0))
            .collect();
        let rest = vec![EnvTransition::new(1, Reward::zero(), 0); 5];
        let env = Environment::new(EnvSpec::new(3, 0, Percept::zero(), vec![row, rest], Some(4)).unwrap()).unwrap();
        Electorate::new(vec![env], Sigma::constant(0), UltrafilterOracle::Generic { seed: 1 }).unwrap()
    }

    #[test]
    fn rank_orders_constants() {
        let e = ladder();
        let agents = vec![AgentSpec::constant(1), AgentSpec::constant(3), AgentSpec::constant(2)];
        let classes = e.rank(&agents);
        assert_eq!(classes, vec![vec![1], vec![2], vec![0]]);
        // consistency with the pairwise comparator
        for w in classes.windows(2) {
            assert_eq!(e.compare(&agents[w[0][0]], &agents[w[1][0]]), Verdict::MoreIntelligent);
        }
    }

    #[test]
    fn rank_single_and_ties() {
        let e = ladder();
        assert_eq!(e.rank(&[AgentSpec::constant(2)]), vec![vec![0]]);
        let agents = vec![AgentSpec::constant(3), AgentSpec::constant(4), AgentSpec::constant(0)];
        assert_eq!(e.rank(&agents), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn regurgitators_tie_under_dictatorship() {
        let e = alternating(UltrafilterOracle::Principal { at: 5 });
        let a = AgentSpec::scripted(&[1, 2], &[0]);
        let reg = regurgitator_of(&a, e.env_at(5), 8).unwrap();
        let classes = e.rank(&[a, reg, AgentSpec::constant(0)]);
        assert!(classes.iter().any(|c| c.contains(&0) && c.contains(&1)));
    }

    #[test]
    fn decisive_index_matches_compare() {
        for seed in 0..8 {
            let e = alternating(UltrafilterOracle::Generic { seed });
            let d = e.decisive_pool_index();
            let (a, b) = (AgentSpec::constant(1), AgentSpec::constant(2));
            assert_eq!(e.compare(&a, &b), Verdict::from(compare_on(&a, &b, &e.pool()[d])));
        }
    }

    #[test]
    fn serde_round_trip() {
        let e = alternating(UltrafilterOracle::Generic { seed: 3 });
        let json = serde_json::to_string(&e).unwrap();
        assert!(json.contains("\"period\":[0,1]"));
        assert_eq!(serde_json::from_str::<Electorate>(&json).unwrap(), e);
        let bad = json.replace("\"period\":[0,1]", "\"period\":[0,2]");
        assert!(serde_json::from_str::<Electorate>(&bad).is_err());
    }

    #[test]
    fn electorate_flags_are_conjunction() {
        let neg = Environment::new(EnvSpec::constant(Percept::new(Reward::from_integer(-1), 0), Some(2))).unwrap();
        let e = Electorate::new(vec![Environment::zero(2), neg], Sigma::constant(0), UltrafilterOracle::Principal { at: 0 }).unwrap();
        assert!(!e.flags().merciful);
        assert!(e.flags().bounded_rewards);
    }
}
