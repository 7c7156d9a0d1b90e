//! Randomized property suites for the comparator theory.
//!
//! Every suite draws its instances from a ChaCha stream keyed by
//! `(seed, suite, trial)`, so reports are reproducible and independent of
//! thread scheduling. A failing trial is captured as a [`CaseFile`] that
//! [`CaseFile::check`] re-evaluates on its own.

use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::electorate::{Electorate, Verdict};
use crate::gen::{self, EnvConstraints, Limits};
use crate::io;
use crate::model::{
    compare_on, regurgitator_of, rollout, total_reward, AgentSpec, EnvSpec, Environment, EnvViolation, Percept,
};
use crate::operators::{restrict, team_parity, team_split, PrefixPredicate};
use crate::reward::Reward;
use crate::ultrafilter::{GenericPoint, SetFilter, UltrafilterOracle};
use crate::upset::UpSet;

pub const SUITES: &[&str] = &[
    "ultrafilter-axioms",
    "freeness",
    "regurgitator",
    "trichotomy",
    "transitivity",
    "dictatorship",
    "team-parity",
    "team-split",
    "team-dominance",
    "quitter-bound",
    "quitter-safe",
    "scale-invariance",
    "examples",
    "representation-independence",
];

/// Trial count used when none is given.
pub fn default_trials(suite: &str) -> usize {
    match suite {
        "ultrafilter-axioms" => 1000,
        "dictatorship" | "team-parity" | "team-split" | "quitter-safe" => 300,
        "regurgitator" | "team-dominance" | "quitter-bound" | "scale-invariance" => 200,
        "examples" => 50,
        _ => 500,
    }
}

/// Minimum share of generator attempts that must yield an instance
/// satisfying the hypotheses, for suites that enforce one.
pub fn min_construction_rate(suite: &str) -> Option<f64> {
    (suite == "team-parity").then_some(0.9)
}

/// Attempts a generator may spend on one trial.
const ATTEMPT_BUDGET: usize = 32;
const CANDIDATES: usize = 8;
const AGENT_DEPTH: usize = 2;

/// Deliberate defects used as negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Accepts every nonempty set.
    BrokenOracle,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "broken-oracle" => Ok(Fault::BrokenOracle),
            _ => Err(format!("unknown fault {s:?}")),
        }
    }
}

struct Judged<'a> {
    oracle: &'a UltrafilterOracle,
    fault: Option<Fault>,
}

impl SetFilter for Judged<'_> {
    fn contains(&self, s: &UpSet) -> bool {
        match self.fault {
            None => self.oracle.contains(s),
            Some(Fault::BrokenOracle) => !s.is_empty(),
        }
    }
}

fn judged(oracle: &UltrafilterOracle, fault: Option<Fault>) -> Judged<'_> {
    Judged { oracle, fault }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "detail", rename_all = "camelCase")]
pub enum Outcome {
    Holds,
    /// The hypotheses of the property do not hold for this instance.
    Vacuous(String),
    Violated(String),
}

enum Failure {
    Vacuous(String),
    Violated(String),
}

type Check = Result<(), Failure>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(Failure::Violated(msg()))
    }
}

fn assume(cond: bool, msg: &str) -> Check {
    if cond {
        Ok(())
    } else {
        Err(Failure::Vacuous(msg.to_owned()))
    }
}

fn verdict(e: &Electorate, fault: Option<Fault>, a: &AgentSpec, b: &AgentSpec) -> Result<Verdict, Failure> {
    let sets = e.verdict_sets(a, b);
    sets.decide(&judged(e.oracle(), fault)).ok_or_else(|| {
        Failure::Violated(format!(
            "not exactly one verdict set accepted: X1={} X2={} X3={}",
            sets.outperforms, sets.underperforms, sets.equal
        ))
    })
}

/// One generated instance of a suite's property.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "kebab-case")]
pub enum Case {
    UltrafilterAxioms {
        oracles: Vec<UltrafilterOracle>,
        a: UpSet,
        b: UpSet,
    },
    Freeness {
        seed: u64,
        finite: UpSet,
        cofinite: UpSet,
    },
    Regurgitator {
        agent: AgentSpec,
        env: Environment,
        perturb_seed: u64,
    },
    Trichotomy {
        electorate: Electorate,
        a: AgentSpec,
        b: AgentSpec,
    },
    Transitivity {
        electorate: Electorate,
        a: AgentSpec,
        b: AgentSpec,
        c: AgentSpec,
    },
    Dictatorship {
        electorate: Electorate,
        a: AgentSpec,
        b: AgentSpec,
    },
    TeamParity {
        electorate: Electorate,
        a: AgentSpec,
        a2: AgentSpec,
        b: AgentSpec,
        b2: AgentSpec,
    },
    TeamSplit {
        electorate: Electorate,
        a: AgentSpec,
        b: AgentSpec,
        predicate: PrefixPredicate,
    },
    TeamDominance {
        electorate: Electorate,
        a: AgentSpec,
        a2: AgentSpec,
        b: AgentSpec,
        b2: AgentSpec,
        predicate: PrefixPredicate,
    },
    QuitterBound {
        electorate: Electorate,
        a: AgentSpec,
        b: AgentSpec,
        r: Reward,
    },
    QuitterSafe {
        electorate: Electorate,
        a: AgentSpec,
        r: Reward,
    },
    ScaleInvariance {
        electorate: Electorate,
        a: AgentSpec,
        b: AgentSpec,
        factors: Vec<Reward>,
    },
    Examples {
        agent: AgentSpec,
        horizon: u32,
    },
    RepresentationIndependence {
        seed: u64,
        set: UpSet,
        inflate: u64,
    },
}

impl Case {
    pub fn suite(&self) -> &'static str {
        match self {
            Case::UltrafilterAxioms { .. } => "ultrafilter-axioms",
            Case::Freeness { .. } => "freeness",
            Case::Regurgitator { .. } => "regurgitator",
            Case::Trichotomy { .. } => "trichotomy",
            Case::Transitivity { .. } => "transitivity",
            Case::Dictatorship { .. } => "dictatorship",
            Case::TeamParity { .. } => "team-parity",
            Case::TeamSplit { .. } => "team-split",
            Case::TeamDominance { .. } => "team-dominance",
            Case::QuitterBound { .. } => "quitter-bound",
            Case::QuitterSafe { .. } => "quitter-safe",
            Case::ScaleInvariance { .. } => "scale-invariance",
            Case::Examples { .. } => "examples",
            Case::RepresentationIndependence { .. } => "representation-independence",
        }
    }

    pub fn check(&self, fault: Option<Fault>) -> Outcome {
        match self.run(fault) {
            Ok(()) => Outcome::Holds,
            Err(Failure::Vacuous(m)) => Outcome::Vacuous(m),
            Err(Failure::Violated(m)) => Outcome::Violated(m),
        }
    }

    fn run(&self, fault: Option<Fault>) -> Check {
        match self {
            Case::UltrafilterAxioms { oracles, a, b } => {
                for u in oracles {
                    check_axioms(&judged(u, fault), a, b).map_err(|f| match f {
                        Failure::Violated(m) => Failure::Violated(format!("{u:?}: {m}")),
                        v => v,
                    })?;
                }
                Ok(())
            }
            Case::Freeness { seed, finite, cofinite } => {
                let u = UltrafilterOracle::Generic { seed: *seed };
                let f = judged(&u, fault);
                ensure(!f.contains(finite), || format!("finite set {finite} accepted"))?;
                ensure(f.contains(cofinite), || format!("cofinite set {cofinite} rejected"))
            }
            Case::Regurgitator {
                agent,
                env,
                perturb_seed,
            } => check_regurgitator(agent, env, *perturb_seed),
            Case::Trichotomy { electorate, a, b } => check_trichotomy(electorate, fault, a, b),
            Case::Transitivity { electorate, a, b, c } => check_transitivity(electorate, fault, [a, b, c]),
            Case::Dictatorship { electorate, a, b } => {
                let UltrafilterOracle::Principal { at } = *electorate.oracle() else {
                    return assume(false, "oracle is not principal");
                };
                let v = verdict(electorate, fault, a, b)?;
                let local = Verdict::from(compare_on(a, b, electorate.env_at(at)));
                ensure(v == local, || format!("compare gave {v} but e_{at} gives {local}"))
            }
            Case::TeamParity {
                electorate,
                a,
                a2,
                b,
                b2,
            } => {
                let e = electorate;
                assume(verdict(e, fault, a, a2)? == Verdict::MoreIntelligent, "A > A' fails")?;
                assume(verdict(e, fault, b, b2)? == Verdict::MoreIntelligent, "B > B' fails")?;
                let v = verdict(e, fault, &team_parity(a.clone(), b.clone()), &team_parity(a2.clone(), b2.clone()))?;
                ensure(v == Verdict::MoreIntelligent, || format!("team comparison gave {v}"))
            }
            Case::TeamSplit {
                electorate,
                a,
                b,
                predicate,
            } => {
                let t = team_split(a.clone(), b.clone(), predicate.clone());
                let va = verdict(electorate, fault, &t, a)?;
                let vb = verdict(electorate, fault, &t, b)?;
                ensure(
                    va == Verdict::EquallyIntelligent || vb == Verdict::EquallyIntelligent,
                    || format!("team vs A gave {va}, team vs B gave {vb}"),
                )
            }
            Case::TeamDominance {
                electorate,
                a,
                a2,
                b,
                b2,
                predicate,
            } => {
                let e = electorate;
                for (x, y, name) in [(a, a2, "A > A'"), (a, b2, "A > B'"), (b, a2, "B > A'"), (b, b2, "B > B'")] {
                    assume(verdict(e, fault, x, y)? == Verdict::MoreIntelligent, name)?;
                }
                let t = team_split(a.clone(), b.clone(), predicate.clone());
                let t2 = team_split(a2.clone(), b2.clone(), predicate.clone());
                let v = verdict(e, fault, &t, &t2)?;
                ensure(v == Verdict::MoreIntelligent, || format!("team comparison gave {v}"))
            }
            Case::QuitterBound { electorate, a, b, r } => {
                let e = electorate;
                assume(e.flags().bounded_rewards && e.flags().respects_skipping, "electorate flags")?;
                assume(r.is_positive(), "threshold must be positive")?;
                assume(verdict(e, fault, a, b)? == Verdict::MoreIntelligent, "A > B fails")?;
                let b_r = restrict(b.clone(), r.clone());
                assume(verdict(e, fault, &b_r, b)? == Verdict::EquallyIntelligent, "B|r = B fails")?;
                let a_r1 = restrict(a.clone(), r.clone() + Reward::one());
                let v = verdict(e, fault, &a_r1, b)?;
                ensure(v == Verdict::MoreIntelligent, || format!("A|(r+1) vs B gave {v}"))
            }
            Case::QuitterSafe { electorate, a, r } => {
                let e = electorate;
                assume(e.flags().merciful && e.flags().respects_skipping, "electorate flags")?;
                let v = verdict(e, fault, a, &restrict(a.clone(), r.clone()))?;
                ensure(v != Verdict::LessIntelligent, || "A < A|r".to_owned())
            }
            Case::ScaleInvariance {
                electorate,
                a,
                b,
                factors,
            } => {
                assume(
                    !a.reads_reward_magnitudes() && !b.reads_reward_magnitudes(),
                    "agents compare rewards against thresholds",
                )?;
                let base = verdict(electorate, fault, a, b)?;
                for f in factors {
                    assume(f.is_positive(), "factor must be positive")?;
                    let v = verdict(&electorate.scale_rewards(f), fault, a, b)?;
                    ensure(v == base, || format!("verdict {base} became {v} after scaling by {f}"))?;
                }
                Ok(())
            }
            Case::Examples { agent, horizon } => {
                let emitter = EnvSpec::constant(Percept::new(Reward::one(), 0), None);
                match Environment::new(emitter) {
                    Ok(_) => return Err(Failure::Violated("constant (1,0) emitter accepted".into())),
                    Err(e) => ensure(e.violations.contains(&EnvViolation::MissingHorizon), || {
                        format!("emitter rejected for the wrong reason: {e}")
                    })?,
                }
                let total = total_reward(agent, &Environment::zero(*horizon));
                ensure(total.is_zero(), || format!("zero environment paid {total}"))
            }
            Case::RepresentationIndependence { seed, set, inflate } => {
                let g = GenericPoint::new(*seed);
                let u = UltrafilterOracle::Generic { seed: *seed };
                let f = judged(&u, fault);
                let base = f.contains(set);
                let p = set.period();
                let doubled: Vec<u64> = set.residues().iter().flat_map(|&r| [r, r + p]).collect();
                let raw = fault.is_none().then(|| g.accepts_tail(2 * p, &doubled));
                ensure(raw.is_none_or(|x| x == base), || {
                    format!("period-{} description of {set} answers differently", 2 * p)
                })?;
                let re = UpSet::from_rule(set.threshold() + inflate, 2 * p, |n| set.member(n));
                ensure(re == *set, || format!("re-expression canonicalized to {re}, not {set}"))?;
                ensure(f.contains(&re) == base, || format!("membership of {set} changed on re-expression"))
            }
        }
    }

    /// Spec files that reproduce the instance with the CLI, keyed by file
    /// name.
    fn artifacts(&self) -> (Option<&Electorate>, Vec<(&'static str, AgentSpec)>, Option<&Environment>) {
        let c = |a: &AgentSpec| a.clone();
        match self {
            Case::Regurgitator { agent, env, .. } => (None, vec![("a", c(agent))], Some(env)),
            Case::Trichotomy { electorate, a, b }
            | Case::Dictatorship { electorate, a, b }
            | Case::ScaleInvariance { electorate, a, b, .. } => (Some(electorate), vec![("a", c(a)), ("b", c(b))], None),
            Case::Transitivity { electorate, a, b, c: x } => {
                (Some(electorate), vec![("a", c(a)), ("b", c(b)), ("c", c(x))], None)
            }
            Case::TeamParity {
                electorate,
                a,
                a2,
                b,
                b2,
            } => (
                Some(electorate),
                vec![
                    ("team", team_parity(c(a), c(b))),
                    ("team-primed", team_parity(c(a2), c(b2))),
                ],
                None,
            ),
            Case::TeamSplit {
                electorate,
                a,
                b,
                predicate,
            } => (
                Some(electorate),
                vec![("team", team_split(c(a), c(b), predicate.clone())), ("a", c(a)), ("b", c(b))],
                None,
            ),
            Case::TeamDominance {
                electorate,
                a,
                a2,
                b,
                b2,
                predicate,
            } => (
                Some(electorate),
                vec![
                    ("team", team_split(c(a), c(b), predicate.clone())),
                    ("team-primed", team_split(c(a2), c(b2), predicate.clone())),
                ],
                None,
            ),
            Case::QuitterBound { electorate, a, b, r } => (
                Some(electorate),
                vec![("a-quitter", restrict(c(a), r.clone() + Reward::one())), ("b", c(b))],
                None,
            ),
            Case::QuitterSafe { electorate, a, r } => (
                Some(electorate),
                vec![("a", c(a)), ("a-quitter", restrict(c(a), r.clone()))],
                None,
            ),
            Case::Examples { agent, .. } => (None, vec![("a", c(agent))], None),
            _ => (None, vec![], None),
        }
    }
}

fn check_axioms(f: &impl SetFilter, a: &UpSet, b: &UpSet) -> Check {
    ensure(!f.contains(&UpSet::empty()), || "contains the empty set".into())?;
    ensure(f.contains(&UpSet::naturals()), || "rejects the naturals".into())?;
    for s in [a, b] {
        ensure(f.contains(s) != f.contains(&s.complement()), || {
            format!("maximality fails for {s}")
        })?;
    }
    if f.contains(a) && f.contains(b) {
        ensure(f.contains(&a.inter(b)), || format!("intersection of {a} and {b} rejected"))?;
    }
    let (meet, join) = (a.inter(b), a.union(b));
    for (x, y) in [(a, b), (b, a), (a, &join), (b, &join), (&meet, a), (&meet, b)] {
        if x.inter(&y.complement()).is_empty() && f.contains(x) {
            ensure(f.contains(y), || format!("superset {y} of accepted {x} rejected"))?;
        }
    }
    Ok(())
}

fn check_regurgitator(agent: &AgentSpec, env: &Environment, perturb_seed: u64) -> Check {
    let steps = env.decisive_steps();
    let Some(reg) = regurgitator_of(agent, env, steps) else {
        return Err(Failure::Violated("no regurgitator at the decisive horizon".into()));
    };
    let (ta, tb) = (total_reward(agent, env), total_reward(&reg, env));
    ensure(ta == tb, || format!("totals differ: {ta} vs {tb}"))?;
    let (ra, rb) = (rollout(agent, env.spec(), steps), rollout(&reg, env.spec(), steps));
    ensure(ra.actions() == rb.actions(), || "action traces differ".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(perturb_seed);
    for len in 1..=steps + 2 {
        let h = if rng.random_bool(0.5) && len <= steps {
            ra.percepts()[..len].to_vec()
        } else {
            gen::history(&mut rng, len)
        };
        let h2 = gen::history(&mut rng, len);
        ensure(reg.act(&h) == reg.act(&h2), || {
            format!("output at length {len} depends on percepts")
        })?;
    }
    Ok(())
}

fn check_trichotomy(e: &Electorate, fault: Option<Fault>, a: &AgentSpec, b: &AgentSpec) -> Check {
    let sets = e.verdict_sets(a, b);
    let all = [&sets.outperforms, &sets.underperforms, &sets.equal];
    ensure(all[0].union(all[1]).union(all[2]) == UpSet::naturals(), || "verdict sets do not cover".into())?;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        ensure(all[i].inter(all[j]).is_empty(), || "verdict sets overlap".into())?;
    }
    let sigma = e.sigma();
    for s in all {
        ensure(sigma.period().is_multiple_of(s.period()), || {
            format!("period of {s} does not divide {}", sigma.period())
        })?;
    }
    for n in 0..sigma.threshold() + 2 * sigma.period() {
        let p = Verdict::from(compare_on(a, b, e.env_at(n)));
        ensure(sets.get(p).member(n), || format!("verdict sets disagree with e_{n}"))?;
    }
    let vab = verdict(e, fault, a, b)?;
    let vba = verdict(e, fault, b, a)?;
    ensure(vba == vab.flip(), || format!("A vs B gave {vab} but B vs A gave {vba}"))?;
    for x in [a, b] {
        let v = verdict(e, fault, x, x)?;
        ensure(v == Verdict::EquallyIntelligent, || format!("an agent compared to itself gave {v}"))?;
    }
    Ok(())
}

fn check_transitivity(e: &Electorate, fault: Option<Fault>, agents: [&AgentSpec; 3]) -> Check {
    let mut v = [[Verdict::EquallyIntelligent; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                v[i][j] = verdict(e, fault, agents[i], agents[j])?;
            }
        }
    }
    for (x, y, z) in [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)] {
        for rel in [Verdict::MoreIntelligent, Verdict::LessIntelligent, Verdict::EquallyIntelligent] {
            if v[x][y] == rel && v[y][z] == rel {
                ensure(v[x][z] == rel, || {
                    format!("agents {x},{y},{z}: {rel} twice but {} between the ends", v[x][z])
                })?;
            }
        }
    }
    Ok(())
}

/// Pairwise verdicts among `agents` under the electorate's own oracle.
fn verdict_matrix(e: &Electorate, agents: &[AgentSpec]) -> Vec<Vec<Verdict>> {
    let scores: Vec<Vec<Reward>> = agents.iter().map(|a| e.scores(a)).collect();
    (0..agents.len())
        .map(|i| {
            (0..agents.len())
                .map(|j| e.compare_scores(&scores[i], &scores[j]))
                .collect()
        })
        .collect()
}

fn strict_pairs(m: &[Vec<Verdict>]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if *v == Verdict::MoreIntelligent {
                out.push((i, j));
            }
        }
    }
    out
}

fn candidates<R: Rng>(rng: &mut R, magnitude_blind: bool) -> Vec<AgentSpec> {
    (0..CANDIDATES).map(|_| gen::agent(rng, AGENT_DEPTH, magnitude_blind)).collect()
}

/// Largest partial reward sum `b` reaches on any pool environment.
fn max_partial_sum(e: &Electorate, b: &AgentSpec) -> Reward {
    let mut best = Reward::zero();
    for env in e.pool() {
        let mut acc = Reward::zero();
        for s in rollout(b, env.spec(), env.decisive_steps()).steps {
            acc += &s.reward;
            best = best.max(acc.clone());
        }
    }
    best
}

struct Generated {
    case: Option<Case>,
    attempts: usize,
    successes: usize,
}

fn constructed<R: Rng>(rng: &mut R, mut attempt: impl FnMut(&mut R) -> Option<Case>) -> Generated {
    let mut attempts = 0;
    while attempts < ATTEMPT_BUDGET {
        attempts += 1;
        if let Some(case) = attempt(rng) {
            return Generated {
                case: Some(case),
                attempts,
                successes: 1,
            };
        }
    }
    Generated {
        case: None,
        attempts,
        successes: 0,
    }
}

fn direct(case: Case) -> Generated {
    Generated {
        case: Some(case),
        attempts: 1,
        successes: 1,
    }
}

fn generate<R: Rng>(suite: &str, rng: &mut R) -> Generated {
    let limits = Limits::default();
    // with horizon 1 only the action-independent first reward counts, so
    // no two agents can be separated
    let separating = Limits {
        min_horizon: 2,
        ..limits
    };
    let any = EnvConstraints::NONE;
    let agent = |rng: &mut R| gen::agent(rng, AGENT_DEPTH, false);
    match suite {
        "ultrafilter-axioms" => direct(Case::UltrafilterAxioms {
            oracles: vec![
                UltrafilterOracle::Principal {
                    at: rng.random_range(0..64),
                },
                UltrafilterOracle::Generic { seed: rng.random() },
            ],
            a: gen::upset(rng),
            b: gen::upset(rng),
        }),
        "freeness" => direct(Case::Freeness {
            seed: rng.random(),
            finite: gen::finite_set(rng),
            cofinite: gen::cofinite_set(rng),
        }),
        "regurgitator" => direct(Case::Regurgitator {
            agent: agent(rng),
            env: gen::environment(rng, any, &limits),
            perturb_seed: rng.random(),
        }),
        "trichotomy" => direct(Case::Trichotomy {
            electorate: gen::electorate(rng, any, &limits),
            a: agent(rng),
            b: agent(rng),
        }),
        "transitivity" => direct(Case::Transitivity {
            electorate: gen::electorate(rng, any, &limits),
            a: agent(rng),
            b: agent(rng),
            c: agent(rng),
        }),
        "dictatorship" => {
            let at = rng.random_range(0..40);
            direct(Case::Dictatorship {
                electorate: gen::electorate_with(rng, any, &limits, UltrafilterOracle::Principal { at }),
                a: agent(rng),
                b: agent(rng),
            })
        }
        "team-parity" => constructed(rng, |rng| {
            let e = gen::electorate(rng, any, &separating);
            let c = candidates(rng, false);
            let pairs = strict_pairs(&verdict_matrix(&e, &c));
            let &(a, a2) = pairs.choose(rng)?;
            let &(b, b2) = pairs.choose(rng)?;
            Some(Case::TeamParity {
                electorate: e,
                a: c[a].clone(),
                a2: c[a2].clone(),
                b: c[b].clone(),
                b2: c[b2].clone(),
            })
        }),
        "team-split" => direct(Case::TeamSplit {
            electorate: gen::electorate(rng, any, &limits),
            a: agent(rng),
            b: agent(rng),
            predicate: gen::predicate(rng, 2, false),
        }),
        "team-dominance" => constructed(rng, |rng| {
            let e = gen::electorate(rng, any, &separating);
            let c = candidates(rng, false);
            let classes = e.rank(&c);
            if classes.len() < 2 {
                return None;
            }
            let cut = rng.random_range(1..classes.len());
            let top: Vec<usize> = classes[..cut].concat();
            let bottom: Vec<usize> = classes[cut..].concat();
            let pick_two = |rng: &mut R, xs: &[usize]| -> (usize, usize) {
                let first = *xs.choose(rng).expect("nonempty");
                let others: Vec<usize> = xs.iter().copied().filter(|&x| x != first).collect();
                (first, others.choose(rng).copied().unwrap_or(first))
            };
            let (a, b) = pick_two(rng, &top);
            let (a2, b2) = pick_two(rng, &bottom);
            Some(Case::TeamDominance {
                electorate: e,
                a: c[a].clone(),
                a2: c[a2].clone(),
                b: c[b].clone(),
                b2: c[b2].clone(),
                predicate: gen::predicate(rng, 2, false),
            })
        }),
        "quitter-bound" => constructed(rng, |rng| {
            let flags = EnvConstraints {
                respects_skipping: true,
                bounded_rewards: true,
                merciful: false,
            };
            let e = gen::electorate(rng, flags, &separating);
            let c = candidates(rng, false);
            let pairs = strict_pairs(&verdict_matrix(&e, &c));
            let &(a, b) = pairs.choose(rng)?;
            let (a, b) = (c[a].clone(), c[b].clone());
            let safe = {
                let offsets = [Reward::new(1, 4), Reward::new(1, 2), Reward::one(), Reward::new(3, 2)];
                max_partial_sum(&e, &b) + offsets.choose(rng).expect("nonempty").clone()
            };
            let r = if rng.random_bool(0.5) {
                // a tighter threshold, kept only if the quitter still ties B
                let r = Reward::new(rng.random_range(1..=8), 2);
                if e.compare(&restrict(b.clone(), r.clone()), &b) == Verdict::EquallyIntelligent {
                    r
                } else {
                    safe
                }
            } else {
                safe
            };
            Some(Case::QuitterBound { electorate: e, a, b, r })
        }),
        "quitter-safe" => {
            let flags = EnvConstraints {
                respects_skipping: true,
                bounded_rewards: false,
                merciful: true,
            };
            direct(Case::QuitterSafe {
                electorate: gen::electorate(rng, flags, &limits),
                a: agent(rng),
                r: gen::reward(rng, any) + gen::reward(rng, any),
            })
        }
        "scale-invariance" => direct(Case::ScaleInvariance {
            electorate: gen::electorate(rng, any, &limits),
            a: gen::agent(rng, AGENT_DEPTH, true),
            b: gen::agent(rng, AGENT_DEPTH, true),
            factors: vec![Reward::from_integer(2), Reward::new(1, 3)],
        }),
        "examples" => direct(Case::Examples {
            agent: agent(rng),
            horizon: rng.random_range(1..=16),
        }),
        "representation-independence" => direct(Case::RepresentationIndependence {
            seed: rng.random(),
            set: gen::upset(rng),
            inflate: rng.random_range(0..24),
        }),
        other => panic!("unknown suite {other}"),
    }
}

/// A self-contained failing (or replayable) trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseFile {
    pub seed: u64,
    pub trial: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
    pub case: Case,
}

impl CaseFile {
    pub fn check(&self) -> Outcome {
        self.case.check(self.fault)
    }

    pub fn load(path: &Path) -> Result<CaseFile, io::LoadError> {
        let text = fs::read_to_string(path).map_err(|source| io::LoadError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| io::LoadError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    /// Writes `case.json` plus spec files for the instance into `dir`.
    pub fn write_reproducer(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(dir.join("case.json"), text)?;
        let (electorate, agents, env) = self.case.artifacts();
        if let Some(e) = electorate {
            io::write_electorate_split(&dir.join("electorate.json"), e)?;
        }
        if let Some(env) = env {
            io::write_env(&dir.join("env.json"), env.spec())?;
        }
        for (name, a) in agents {
            io::write_agent(&dir.join(format!("{name}.json")), &a)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Construction {
    pub attempts: usize,
    pub successes: usize,
}

impl Construction {
    pub fn rate(&self) -> f64 {
        if self.attempts == 0 {
            1.0
        } else {
            self.successes as f64 / self.attempts as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    pub message: String,
    pub case: CaseFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    /// Trials whose instance was built and whose hypotheses held.
    pub checked: usize,
    pub violations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Construction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_construction_rate: Option<f64>,
    /// Lowest-numbered failing trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<Violation>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
            && self.checked == self.trials
            && match (&self.construction, self.min_construction_rate) {
                (Some(c), Some(min)) => c.rate() >= min,
                _ => true,
            }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// The rng for one trial of one suite.
pub fn trial_rng(seed: u64, suite: &str, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(suite));
    rng.set_stream(trial as u64);
    rng
}

pub fn run_suite(suite: &str, trials: usize, seed: u64, fault: Option<Fault>) -> SuiteReport {
    assert!(SUITES.contains(&suite), "unknown suite {suite}");
    let results: Vec<(Generated, Option<Outcome>)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let g = generate(suite, &mut trial_rng(seed, suite, trial));
            let outcome = g.case.as_ref().map(|c| c.check(fault));
            (g, outcome)
        })
        .collect();
    let is_constructed = matches!(suite, "team-parity" | "team-dominance" | "quitter-bound");
    let mut report = SuiteReport {
        suite: suite.to_owned(),
        trials,
        checked: 0,
        violations: 0,
        construction: is_constructed.then_some(Construction {
            attempts: 0,
            successes: 0,
        }),
        min_construction_rate: min_construction_rate(suite),
        first_violation: None,
    };
    for (trial, (g, outcome)) in results.into_iter().enumerate() {
        if let Some(c) = report.construction.as_mut() {
            c.attempts += g.attempts;
            c.successes += g.successes;
        }
        match outcome {
            Some(Outcome::Holds) => report.checked += 1,
            Some(Outcome::Violated(message)) => {
                report.checked += 1;
                report.violations += 1;
                if report.first_violation.is_none() {
                    report.first_violation = Some(Violation {
                        message,
                        case: CaseFile {
                            seed,
                            trial,
                            fault,
                            case: g.case.expect("checked cases exist"),
                        },
                    });
                }
            }
            Some(Outcome::Vacuous(_)) | None => {}
        }
    }
    report
}

/// Runs `suites` in order; `trials` overrides every suite's default.
pub fn run_suites(suites: &[&str], trials: Option<usize>, seed: u64, fault: Option<Fault>) -> Vec<SuiteReport> {
    suites
        .iter()
        .map(|s| run_suite(s, trials.unwrap_or_else(|| default_trials(s)), seed, fault))
        .collect()
}
