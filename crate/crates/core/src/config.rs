//! Run configuration.
//!
//! A configuration is a flat TOML table. Values are layered: file, then
//! `LQG_*` environment variables (`LQG_Q=2`, `LQG_DEPTH_CAP=20`, …), then
//! explicit overrides such as command line flags. Every key is validated and
//! all problems are reported together.
//!
//! | key            | type                  | default                |
//! |----------------|-----------------------|------------------------|
//! | `q` / `c_m`    | float, exactly one    | required               |
//! | `epsilon`      | float, `ε_0`          | `2^-10`                |
//! | `ladder_steps` | int, `ε_k = ε_0 2^-k` | `0`                    |
//! | `replicas`     | int                   | `1`                    |
//! | `seed`         | int                   | `0`                    |
//! | `depth_cap`    | int                   | `24`                   |
//! | `backend`      | `exact\|octave\|stub` | `octave`               |
//! | `domain_level` | int                   | `0`                    |
//! | `fractal`      | table, `kind = …`     | segment `y = 1/2`      |
//! | `radii`        | int array             | `[4, 8, …, 256]`       |
//! | `center`       | `[x, y]`              | `[0.5, 0.5]`           |
//! | `z`, `w`       | `[x, y]`              | `[0.25, 0.5]`, `[0.75, 0.5]` |
//! | `node_budget`  | int                   | `4000000`              |
//! | `threads`      | int, `0` = all cores  | `0`                    |
//! | `out`          | path                  | none                   |
//!
//! `out` and `threads` do not change results and are left out of the
//! configuration hash.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::dyadic::{DyadicSquare, Point};
use crate::error::{Error, Result};
use crate::experiment::{Ladder, Setup, DEFAULT_NODE_BUDGET};
use crate::field::Backend;
use crate::fractal::FractalSet;
use crate::params::Params;
use crate::tiling::DEFAULT_DEPTH_CAP;

pub const ENV_PREFIX: &str = "LQG_";

pub const KEYS: &[&str] = &[
    "q",
    "c_m",
    "epsilon",
    "ladder_steps",
    "replicas",
    "seed",
    "depth_cap",
    "backend",
    "domain_level",
    "fractal",
    "radii",
    "center",
    "z",
    "w",
    "node_budget",
    "threads",
    "out",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: Params,
    pub epsilon: f64,
    pub ladder_steps: u32,
    pub replicas: u32,
    pub seed: u64,
    pub depth_cap: i32,
    pub backend: Backend,
    pub domain_level: i32,
    pub fractal: FractalSet,
    pub radii: Vec<u32>,
    pub center: [f64; 2],
    pub z: [f64; 2],
    pub w: [f64; 2],
    pub node_budget: usize,
    #[serde(skip)]
    pub threads: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Hex digest (128 bits) of the canonical form of the fields above.
    #[serde(skip)]
    pub config_hash: String,
}

struct Reader {
    table: Table,
    problems: Vec<String>,
}

impl Reader {
    fn get<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        let v = self.table.remove(key)?;
        match v.try_into() {
            Ok(t) => Some(t),
            Err(e) => {
                self.problems.push(format!("{key}: {}", e.to_string().trim()));
                None
            }
        }
    }

    fn check(&mut self, key: &str, ok: bool, msg: &str) {
        if !ok {
            self.problems.push(format!("{key}: {msg}"));
        }
    }
}

/// Parse a TOML document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    RunConfig::from_table(parse_table(text)?)
}

pub fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>()
        .map_err(|e| Error::config(format!("cannot parse configuration: {}", e.to_string().trim())))
}

/// A value from the environment or the command line: TOML syntax when it
/// parses as such, a plain string otherwise.
pub fn parse_value(text: &str) -> Value {
    format!("v = {text}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(text.to_string()))
}

/// `LQG_*` variables as a table, with keys lower-cased.
pub fn env_table(vars: impl IntoIterator<Item = (String, String)>) -> Table {
    vars.into_iter()
        .filter_map(|(k, v)| {
            let key = k.strip_prefix(ENV_PREFIX)?.to_ascii_lowercase();
            Some((key, parse_value(&v)))
        })
        .collect()
}

/// Overlay `top` onto `base`; a `q` or `c_m` in `top` replaces both in `base`.
pub fn merge(mut base: Table, top: Table) -> Table {
    if top.contains_key("q") || top.contains_key("c_m") {
        base.remove("q");
        base.remove("c_m");
    }
    base.extend(top);
    base
}

impl RunConfig {
    pub fn from_table(table: Table) -> Result<Self> {
        let mut unknown: Vec<&String> = table.keys().filter(|k| !KEYS.contains(&k.as_str())).collect();
        unknown.sort();
        let mut problems: Vec<String> = unknown.iter().map(|k| format!("{k}: unknown key")).collect();
        let mut r = Reader { table: table.clone(), problems: Vec::new() };

        let q: Option<f64> = r.get("q");
        let c_m: Option<f64> = r.get("c_m");
        let epsilon = r.get("epsilon").unwrap_or(2f64.powi(-10));
        let ladder_steps = r.get("ladder_steps").unwrap_or(0);
        let replicas = r.get("replicas").unwrap_or(1);
        let seed = r.get("seed").unwrap_or(0);
        let depth_cap = r.get("depth_cap").unwrap_or(DEFAULT_DEPTH_CAP);
        let backend = r.get::<String>("backend").map_or(Ok(Backend::Octave), |s| s.parse());
        let domain_level = r.get("domain_level").unwrap_or(0);
        let fractal = r.get("fractal").unwrap_or_else(FractalSet::unit_segment);
        let radii: Vec<u32> = r.get("radii").unwrap_or_else(|| (2..=8).map(|k| 1u32 << k).collect());
        let center = r.get("center").unwrap_or([0.5, 0.5]);
        let z = r.get("z").unwrap_or([0.25, 0.5]);
        let w = r.get("w").unwrap_or([0.75, 0.5]);
        let node_budget = r.get("node_budget").unwrap_or(DEFAULT_NODE_BUDGET);
        let threads = r.get("threads").unwrap_or(0);
        let out = r.get::<PathBuf>("out");

        r.check("epsilon", epsilon > 0.0 && epsilon.is_finite(), "must be positive and finite");
        r.check("replicas", replicas >= 1, "must be at least 1");
        r.check("domain_level", (0..40).contains(&domain_level), "must be in 0..40");
        r.check("depth_cap", depth_cap > domain_level && depth_cap <= 40, "must exceed domain_level and be at most 40");
        r.check("node_budget", node_budget >= 1, "must be at least 1");
        r.check(
            "radii",
            !radii.is_empty() && radii[0] >= 2 && radii.windows(2).all(|w| w[0] < w[1]),
            "must be increasing and at least 2",
        );
        if let Err(e) = fractal.validate() {
            r.problems.push(format!("fractal: {e}"));
        }
        let backend = backend.unwrap_or_else(|e| {
            r.problems.push(format!("backend: {e}"));
            Backend::Octave
        });
        let params = match (q, c_m) {
            (Some(_), Some(_)) => {
                r.problems.push("q, c_m: give exactly one of the two".into());
                None
            }
            (None, None) if !table.contains_key("q") && !table.contains_key("c_m") => {
                r.problems.push("q, c_m: one of the two is required".into());
                None
            }
            (Some(q), None) => Params::from_q(q).map_err(|e| r.problems.push(format!("q: {e}"))).ok(),
            (None, Some(c)) => Params::from_cm(c).map_err(|e| r.problems.push(format!("c_m: {e}"))).ok(),
            _ => None,
        };
        problems.append(&mut r.problems);
        if !problems.is_empty() {
            return Err(Error::config(problems.join("; ")));
        }
        let mut cfg = RunConfig {
            params: params.expect("checked above"),
            epsilon,
            ladder_steps,
            replicas,
            seed,
            depth_cap,
            backend,
            domain_level,
            fractal,
            radii,
            center,
            z,
            w,
            node_budget,
            threads,
            out,
            config_hash: String::new(),
        };
        cfg.config_hash = cfg.compute_hash();
        Ok(cfg)
    }

    fn compute_hash(&self) -> String {
        // serde_json maps are ordered by key, which makes the form canonical
        let canonical = serde_json::to_value(self).expect("serializable").to_string();
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..16])
    }

    pub fn domain(&self) -> DyadicSquare {
        DyadicSquare::new(self.domain_level, 0, 0)
    }

    pub fn ladder(&self) -> Result<Ladder> {
        Ladder::geometric(self.epsilon, self.ladder_steps, self.replicas, self.seed)
    }

    pub fn setup(&self) -> Setup {
        Setup {
            params: self.params,
            backend: self.backend,
            domain: self.domain(),
            depth_cap: self.depth_cap,
            node_budget: self.node_budget,
        }
    }

    pub fn center(&self) -> Point {
        Point::new(self.center[0], self.center[1])
    }

    pub fn z(&self) -> Point {
        Point::new(self.z[0], self.z[1])
    }

    pub fn w(&self) -> Point {
        Point::new(self.w[0], self.w[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let a = parse_config("q = 2\nepsilon = 2e-3\nseed = 7").unwrap();
        assert_eq!(a.depth_cap, DEFAULT_DEPTH_CAP);
        assert_eq!(a.backend, Backend::Octave);
        assert_eq!(a.replicas, 1);
        assert_eq!(a.config_hash.len(), 32);
        let b = parse_config("seed = 7\nepsilon = 0.002\nq = 2.0").unwrap();
        assert_eq!(a.config_hash, b.config_hash);
        let c = parse_config("q = 2\nepsilon = 2e-3\nseed = 8").unwrap();
        assert_ne!(a.config_hash, c.config_hash);
    }

    #[test]
    fn hash_ignores_output_path_and_threads() {
        let a = parse_config("q = 2\nout = \"a.csv\"\nthreads = 1").unwrap();
        let b = parse_config("q = 2\nout = \"b.csv\"").unwrap();
        assert_eq!(a.config_hash, b.config_hash);
    }

    #[test]
    fn central_charge_resolves_q() {
        let c = parse_config("c_m = 19").unwrap();
        assert!((c.params.q - 1.0).abs() < 1e-15);
        assert_eq!(c.config_hash, parse_config("q = 1").unwrap().config_hash);
    }

    #[test]
    fn rejections() {
        assert!(matches!(parse_config("c_m = 30"), Err(Error::Config(m)) if m.contains("c_m")));
        assert!(matches!(parse_config("c_m = 19\nq = 1"), Err(Error::Config(m)) if m.contains("exactly one")));
        assert!(parse_config("epsilon = 0.1").is_err());
        let Err(Error::Config(m)) = parse_config("q = 1\nfoo = 1\nbar = 2\nreplicas = \"x\"\nbackend = \"gpu\"") else {
            panic!("expected a config error");
        };
        for key in ["foo", "bar", "replicas", "backend"] {
            assert!(m.contains(key), "{m}");
        }
    }

    #[test]
    fn fractal_descriptor() {
        let c = parse_config("q = 2\n[fractal]\nkind = \"cantor-dust\"\nk = 3\ndepth = 30").unwrap();
        assert_eq!(c.fractal, FractalSet::CantorDust { k: 3, depth: 30 });
        assert!(parse_config("q = 2\n[fractal]\nkind = \"cantor-dust\"\nk = 2\ndepth = 30").is_err());
    }

    #[test]
    fn layering() {
        let file = parse_table("q = 2\nseed = 1").unwrap();
        let env = env_table([("LQG_SEED".to_string(), "5".to_string()), ("HOME".to_string(), "/".to_string())]);
        let mut flags = Table::new();
        flags.insert("c_m".into(), parse_value("19"));
        flags.insert("backend".into(), parse_value("stub"));
        let c = RunConfig::from_table(merge(merge(file, env), flags)).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.backend, Backend::Stub);
        assert!((c.params.q - 1.0).abs() < 1e-15);
    }
}
