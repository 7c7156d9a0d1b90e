//! `ultracomp`: rollouts, electorate comparisons, spec validation and the
//! property suites.
//!
//! Exit codes: 0 success, 1 property violation, 2 usage, I/O or schema
//! error, 3 a well-formed spec that fails validation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ultracomp_core::io::{self, LoadError};
use ultracomp_core::model::{rollout, validate_env, EnvFlags, EnvReport};
use ultracomp_core::ultrafilter::{residue_path, GenericPoint};
use ultracomp_core::verify::{self, CaseFile, Fault, Outcome, SuiteReport};
use ultracomp_core::UltrafilterOracle;

#[derive(Parser)]
#[command(name = "ultracomp", version, about = "Compare deterministic agents across environment electorates")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Play an agent in an environment and print the trace.
    Rollout {
        #[arg(long)]
        agent: PathBuf,
        #[arg(long)]
        env: PathBuf,
        /// Number of steps; defaults to horizon + 1.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Compare two agents under an electorate.
    Compare {
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
        agents: Vec<PathBuf>,
        #[arg(long)]
        electorate: PathBuf,
    },
    /// Sort agents into equally intelligent classes, best first.
    Rank {
        #[arg(long, num_args = 1.., required = true)]
        agents: Vec<PathBuf>,
        #[arg(long)]
        electorate: PathBuf,
    },
    /// Check spec files and report convergence and reward flags.
    Validate(ValidateArgs),
    /// Print the residue path of a generic-point ultrafilter.
    InspectFilter {
        #[arg(long, conflicts_with = "electorate", required_unless_present = "electorate")]
        seed: Option<u64>,
        #[arg(long)]
        electorate: Option<PathBuf>,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=64))]
        depth: u64,
    },
    /// Run the property suites.
    Verify {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Trials per suite; each suite has its own default.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: Option<u64>,
        #[arg(long, env = "ULTRACOMP_SEED", default_value_t = 0)]
        seed: u64,
        /// Directory for reproducers of failing suites.
        #[arg(long, default_value = "ultracomp-repro")]
        out: PathBuf,
        /// Re-check a single `case.json` reproducer instead.
        #[arg(long, conflicts_with_all = ["suite", "trials"])]
        replay: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = true)]
struct ValidateArgs {
    #[arg(long)]
    env: Option<PathBuf>,
    #[arg(long)]
    agent: Option<PathBuf>,
    #[arg(long)]
    electorate: Option<PathBuf>,
}

enum Failure {
    Load(LoadError),
    Other(u8, String),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::Load(e)
    }
}

type Outcomes = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Load(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 3 } else { 2 })
        }
        Err(Failure::Other(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn emit(format: Format, value: Value, text: impl FnOnce() -> String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&value).expect("json values serialize")),
        Format::Text => print!("{}", text()),
    }
}

fn run(cli: &Cli) -> Outcomes {
    let f = cli.format;
    match &cli.command {
        Command::Rollout { agent, env, steps } => cmd_rollout(f, agent, env, *steps),
        Command::Compare { agents, electorate } => cmd_compare(f, &agents[0], &agents[1], electorate),
        Command::Rank { agents, electorate } => cmd_rank(f, agents, electorate),
        Command::Validate(args) => cmd_validate(f, args),
        Command::InspectFilter { seed, electorate, depth } => cmd_inspect_filter(f, *seed, electorate.as_deref(), *depth),
        Command::Verify {
            suite,
            trials,
            seed,
            out,
            replay,
            inject_fault,
        } => match replay {
            Some(path) => cmd_replay(f, path),
            None => cmd_verify(f, suite, trials.map(|t| t as usize), *seed, out, *inject_fault),
        },
    }
}

fn cmd_rollout(f: Format, agent: &Path, env: &Path, steps: Option<usize>) -> Outcomes {
    let agent = io::load_agent(agent)?;
    let env = io::load_env(env)?;
    let steps = steps.unwrap_or(env.decisive_steps());
    if steps == 0 {
        return Err(Failure::Other(2, "--steps must be positive".into()));
    }
    let rec = rollout(&agent, env.spec(), steps);
    let total = rec.total();
    let mut value = serde_json::to_value(&rec).expect("records serialize");
    value["total"] = json!(total.to_string());
    emit(f, value, || {
        let mut s = format!("{:>4}  {:>8}  {:>6}  {:>6}\n", "step", "reward", "obs", "action");
        for (i, st) in rec.steps.iter().enumerate() {
            s += &format!(
                "{:>4}  {:>8}  {:>6}  {:>6}\n",
                i + 1,
                st.reward.to_string(),
                st.observation,
                st.action.to_string()
            );
        }
        s + &format!("total {total}\n")
    });
    Ok(0)
}

fn cmd_compare(f: Format, a: &Path, b: &Path, electorate: &Path) -> Outcomes {
    let a = io::load_agent(a)?;
    let b = io::load_agent(b)?;
    let e = io::load_electorate(electorate)?;
    let sets = e.verdict_sets(&a, &b);
    let v = e.compare(&a, &b);
    emit(
        f,
        json!({
            "verdict": v.token(),
            "outperforms": sets.outperforms.to_string(),
            "underperforms": sets.underperforms.to_string(),
            "equal": sets.equal.to_string(),
        }),
        || {
            format!(
                "{v}\nX1 outperforms   {}\nX2 underperforms {}\nX3 equal reward  {}\n",
                sets.outperforms, sets.underperforms, sets.equal
            )
        },
    );
    Ok(0)
}

fn cmd_rank(f: Format, paths: &[PathBuf], electorate: &Path) -> Outcomes {
    let agents = paths.iter().map(|p| io::load_agent(p)).collect::<Result<Vec<_>, _>>()?;
    let e = io::load_electorate(electorate)?;
    let classes: Vec<Vec<String>> = e
        .rank(&agents)
        .into_iter()
        .map(|c| c.into_iter().map(|i| paths[i].display().to_string()).collect())
        .collect();
    emit(f, json!({ "classes": classes }), || {
        classes
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{}: {}\n", i + 1, c.join(" ")))
            .collect()
    });
    Ok(0)
}

fn flags_text(flags: &EnvFlags) -> String {
    format!(
        "respectsSkipping {}\nboundedRewards {}\nmerciful {}\n",
        flags.respects_skipping, flags.bounded_rewards, flags.merciful
    )
}

fn cmd_validate(f: Format, args: &ValidateArgs) -> Outcomes {
    let mut out = serde_json::Map::new();
    let mut text = String::new();
    let mut code = 0;
    if let Some(p) = &args.agent {
        let a = io::load_agent(p)?;
        out.insert("agent".into(), json!({ "ok": true, "depth": a.depth() }));
        text += &format!("agent {}: ok (depth {})\n", p.display(), a.depth());
    }
    if let Some(p) = &args.env {
        let report: EnvReport = validate_env(&io::load_env_spec(p)?);
        out.insert("env".into(), serde_json::to_value(&report).expect("reports serialize"));
        text += &format!("env {}:\n", p.display());
        if report.is_ok() {
            text += "convergence ok\n";
        } else {
            code = 3;
            for v in &report.violations {
                text += &format!("convergence violated: {v}\n");
            }
        }
        text += &flags_text(&report.flags);
    }
    if let Some(p) = &args.electorate {
        let e = io::load_electorate(p)?;
        out.insert(
            "electorate".into(),
            json!({
                "ok": true,
                "pool": e.pool().len(),
                "sigma": e.sigma(),
                "ultrafilter": e.oracle(),
                "flags": e.flags(),
            }),
        );
        text += &format!(
            "electorate {}: ok\npool {} environments\nsigma pre {:?} period {:?}\n",
            p.display(),
            e.pool().len(),
            e.sigma().pre(),
            e.sigma().cycle()
        );
        text += &flags_text(&e.flags());
    }
    emit(f, Value::Object(out), || text);
    Ok(code)
}

fn cmd_inspect_filter(f: Format, seed: Option<u64>, electorate: Option<&Path>, depth: u64) -> Outcomes {
    let seed = match (seed, electorate) {
        (Some(s), _) => s,
        (None, Some(p)) => match *io::load_electorate(p)?.oracle() {
            UltrafilterOracle::Generic { seed } => seed,
            UltrafilterOracle::Principal { at } => {
                emit(f, json!({ "type": "principal", "at": at }), || {
                    format!("principal ultrafilter at {at}: no residue path\n")
                });
                return Ok(0);
            }
        },
        (None, None) => unreachable!("clap requires --seed or --electorate"),
    };
    let g = GenericPoint::new(seed);
    let path: Vec<(u64, String, String)> = (1..=depth)
        .map(|k| {
            let (r, m) = residue_path(&g, k);
            (k, r.to_string(), m.to_string())
        })
        .collect();
    emit(
        f,
        json!({
            "type": "generic",
            "seed": seed,
            "path": path.iter().map(|(k, r, m)| json!({"k": k, "residue": r, "modulus": m})).collect::<Vec<_>>(),
        }),
        || {
            path.iter()
                .map(|(k, r, m)| format!("k={k} r={r} mod {m}\n"))
                .collect()
        },
    );
    Ok(0)
}

fn report_line(r: &SuiteReport) -> String {
    let mut s = format!(
        "{:<28} trials={} checked={} violations={}",
        r.suite, r.trials, r.checked, r.violations
    );
    if let Some(c) = &r.construction {
        s += &format!(" construction={}/{}", c.successes, c.attempts);
    }
    s += if r.passed() { " PASS" } else { " FAIL" };
    s
}

fn cmd_verify(f: Format, suite: &str, trials: Option<usize>, seed: u64, out: &Path, fault: Option<Fault>) -> Outcomes {
    let suites: Vec<&str> = if suite == "all" {
        verify::SUITES.to_vec()
    } else if let Some(s) = verify::SUITES.iter().find(|s| **s == suite) {
        vec![*s]
    } else {
        return Err(Failure::Other(
            2,
            format!("unknown suite {suite:?}; expected all or one of {}", verify::SUITES.join(", ")),
        ));
    };
    let reports = verify::run_suites(&suites, trials, seed, fault);
    let mut text = String::new();
    let mut repros = Vec::new();
    for r in &reports {
        text += &report_line(r);
        text.push('\n');
        if let Some(v) = &r.first_violation {
            let dir = out.join(&r.suite);
            v.case
                .write_reproducer(&dir)
                .map_err(|e| Failure::Other(2, format!("{}: {e}", dir.display())))?;
            text += &format!("  violation at trial {}: {}\n  reproducer {}\n", v.case.trial, v.message, dir.display());
            repros.push(dir.display().to_string());
        }
    }
    let ok = reports.iter().all(SuiteReport::passed);
    emit(
        f,
        json!({ "seed": seed, "passed": ok, "suites": reports, "reproducers": repros }),
        || text,
    );
    Ok(if ok { 0 } else { 1 })
}

fn cmd_replay(f: Format, path: &Path) -> Outcomes {
    let case = CaseFile::load(path)?;
    let outcome = case.check();
    let code = u8::from(matches!(outcome, Outcome::Violated(_)));
    emit(
        f,
        json!({ "suite": case.case.suite(), "trial": case.trial, "result": outcome }),
        || match &outcome {
            Outcome::Holds => format!("{} trial {}: holds\n", case.case.suite(), case.trial),
            Outcome::Vacuous(m) => format!("{} trial {}: vacuous ({m})\n", case.case.suite(), case.trial),
            Outcome::Violated(m) => format!("{} trial {}: violated: {m}\n", case.case.suite(), case.trial),
        },
    );
    Ok(code)
}

