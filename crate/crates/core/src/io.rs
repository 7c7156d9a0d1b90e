//! Spec files in the `ultracomp-spec/1` JSON format.
//!
//! ```json
//! {"schema": "ultracomp-spec/1", "agent": {"kind": "constant", "action": 1}}
//! {"schema": "ultracomp-spec/1", "env": {"actionBound": 0, "initial": {...}, "states": [...], "horizon": 3}}
//! {"schema": "ultracomp-spec/1", "pool": ["a.json", {...}], "sigma": {"pre": [], "period": [0, 1]},
//!  "ultrafilter": {"type": "generic", "seed": 7}}
//! ```
//!
//! Electorate pool entries are either paths to env files, resolved relative
//! to the electorate file, or inline env objects.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::electorate::{Electorate, Sigma};
use crate::error::SpecError;
use crate::model::{AgentSpec, EnvSpec, Environment, ValidationError};
use crate::ultrafilter::UltrafilterOracle;

pub const SCHEMA: &str = "ultracomp-spec/1";

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: unsupported schema {found:?}, expected {SCHEMA:?}")]
    Schema { path: PathBuf, found: String },
    #[error("{path}: {source}")]
    Validation {
        path: PathBuf,
        #[source]
        source: ValidationError,
    },
    #[error("{path}: {source}")]
    Electorate {
        path: PathBuf,
        #[source]
        source: SpecError,
    },
}

impl LoadError {
    /// Whether the file was well-formed but describes an invalid object.
    pub fn is_validation(&self) -> bool {
        matches!(self, LoadError::Validation { .. } | LoadError::Electorate { .. })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentFile {
    schema: String,
    agent: AgentSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvFile {
    schema: String,
    env: EnvSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PoolEntry {
    Path(PathBuf),
    Inline(EnvSpec),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElectorateFile {
    schema: String,
    pool: Vec<PoolEntry>,
    sigma: Sigma,
    ultrafilter: UltrafilterOracle,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| LoadError::Parse {
        path: path.to_owned(),
        source,
    })
}

fn check_schema(path: &Path, found: &str) -> Result<(), LoadError> {
    if found == SCHEMA {
        Ok(())
    } else {
        Err(LoadError::Schema {
            path: path.to_owned(),
            found: found.to_owned(),
        })
    }
}

pub fn load_agent(path: &Path) -> Result<AgentSpec, LoadError> {
    let f: AgentFile = read_json(path)?;
    check_schema(path, &f.schema)?;
    Ok(f.agent)
}

/// Loads a pre-environment without checking convergence.
pub fn load_env_spec(path: &Path) -> Result<EnvSpec, LoadError> {
    let f: EnvFile = read_json(path)?;
    check_schema(path, &f.schema)?;
    Ok(f.env)
}

pub fn load_env(path: &Path) -> Result<Environment, LoadError> {
    let spec = load_env_spec(path)?;
    Environment::new(spec).map_err(|source| LoadError::Validation {
        path: path.to_owned(),
        source,
    })
}

pub fn load_electorate(path: &Path) -> Result<Electorate, LoadError> {
    let f: ElectorateFile = read_json(path)?;
    check_schema(path, &f.schema)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut pool = Vec::with_capacity(f.pool.len());
    for entry in f.pool {
        let env = match entry {
            PoolEntry::Path(p) => load_env(&base.join(p))?,
            PoolEntry::Inline(spec) => Environment::new(spec).map_err(|source| LoadError::Validation {
                path: path.to_owned(),
                source,
            })?,
        };
        pool.push(env);
    }
    Electorate::new(pool, f.sigma, f.ultrafilter).map_err(|source| LoadError::Electorate {
        path: path.to_owned(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

pub fn agent_to_json(agent: &AgentSpec) -> serde_json::Value {
    serde_json::to_value(AgentFile {
        schema: SCHEMA.into(),
        agent: agent.clone(),
    })
    .expect("agents serialize")
}

pub fn write_agent(path: &Path, agent: &AgentSpec) -> std::io::Result<()> {
    write_json(path, &agent_to_json(agent))
}

pub fn write_env(path: &Path, env: &EnvSpec) -> std::io::Result<()> {
    write_json(
        path,
        &EnvFile {
            schema: SCHEMA.into(),
            env: env.clone(),
        },
    )
}

/// Writes an electorate file with every environment inline.
pub fn write_electorate(path: &Path, e: &Electorate) -> std::io::Result<()> {
    write_json(
        path,
        &ElectorateFile {
            schema: SCHEMA.into(),
            pool: e.pool().iter().map(|env| PoolEntry::Inline(env.spec().clone())).collect(),
            sigma: e.sigma().clone(),
            ultrafilter: *e.oracle(),
        },
    )
}

/// Writes `pool-<i>.json` for each environment next to `path` and an
/// electorate file referencing them.
pub fn write_electorate_split(path: &Path, e: &Electorate) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("electorate");
    let mut pool = Vec::new();
    for (i, env) in e.pool().iter().enumerate() {
        let name = format!("{stem}-pool-{i}.json");
        write_env(&dir.join(&name), env.spec())?;
        pool.push(PoolEntry::Path(name.into()));
    }
    write_json(
        path,
        &ElectorateFile {
            schema: SCHEMA.into(),
            pool,
            sigma: e.sigma().clone(),
            ultrafilter: *e.oracle(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Percept;
    use crate::reward::Reward;

    fn sample() -> Electorate {
        let one = Environment::new(EnvSpec::constant(Percept::new(Reward::new(1, 2), 3), Some(2))).unwrap();
        Electorate::new(
            vec![Environment::zero(3), one],
            Sigma::new(vec![1], vec![0, 1]).unwrap(),
            UltrafilterOracle::Generic { seed: 11 },
        )
        .unwrap()
    }

    #[test]
    fn agent_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.json");
        let a = AgentSpec::scripted(&[1, 2], &[3]);
        write_agent(&p, &a).unwrap();
        assert_eq!(load_agent(&p).unwrap(), a);
    }

    #[test]
    fn electorate_round_trips_inline_and_split() {
        let dir = tempfile::tempdir().unwrap();
        let e = sample();
        let inline = dir.path().join("inline.json");
        write_electorate(&inline, &e).unwrap();
        assert_eq!(load_electorate(&inline).unwrap(), e);
        let sub = dir.path().join("sub");
        fs::create_dir(&sub).unwrap();
        let split = sub.join("el.json");
        write_electorate_split(&split, &e).unwrap();
        assert!(sub.join("el-pool-1.json").exists());
        assert_eq!(load_electorate(&split).unwrap(), e);
    }

    #[test]
    fn error_kinds() {
        let dir = tempfile::tempdir().unwrap();
        let missing = load_agent(&dir.path().join("nope.json")).unwrap_err();
        assert!(matches!(missing, LoadError::Io { .. }));

        let p = dir.path().join("bad.json");
        fs::write(&p, r#"{"schema":"ultracomp-spec/1","agent":{"kind":"warp"}}"#).unwrap();
        assert!(matches!(load_agent(&p).unwrap_err(), LoadError::Parse { .. }));

        fs::write(&p, r#"{"schema":"ultracomp-spec/9","agent":{"kind":"constant","action":1}}"#).unwrap();
        assert!(matches!(load_agent(&p).unwrap_err(), LoadError::Schema { .. }));

        let no_horizon = EnvSpec::constant(Percept::new(Reward::one(), 0), None);
        write_env(&p, &no_horizon).unwrap();
        assert_eq!(load_env_spec(&p).unwrap(), no_horizon);
        let err = load_env(&p).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("converge"));
    }

    #[test]
    fn electorate_index_out_of_range_is_validation() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.json");
        write_env(&dir.path().join("z.json"), &EnvSpec::zero(1)).unwrap();
        fs::write(
            &p,
            r#"{"schema":"ultracomp-spec/1","pool":["z.json"],"sigma":{"pre":[],"period":[0,1]},"ultrafilter":{"type":"principal","at":0}}"#,
        )
        .unwrap();
        assert!(load_electorate(&p).unwrap_err().is_validation());
    }
}
