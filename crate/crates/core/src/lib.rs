//! Deterministic agents, finite-horizon environments, and the intelligence
//! comparators induced by ultrafilters over environment sequences.

pub mod electorate;
pub mod error;
pub mod gen;
pub mod io;
pub mod model;
pub mod operators;
pub mod reward;
pub mod ultrafilter;
pub mod upset;
pub mod verify;

pub use electorate::{Electorate, Sigma, Verdict, VerdictSets};
pub use error::SpecError;
pub use model::{
    Action, AgentSpec, Class, EnvFlags, EnvSpec, EnvTransition, Environment, History, InteractionRecord, Percept,
    Performance, Step, Transducer,
};
pub use operators::{restrict, team_parity, team_split, PrefixPredicate};
pub use reward::Reward;
pub use ultrafilter::{GenericPoint, SetFilter, UltrafilterOracle};
pub use upset::UpSet;
pub use verify::{run_suite, run_suites, CaseFile, Fault, Outcome, SuiteReport, SUITES};
