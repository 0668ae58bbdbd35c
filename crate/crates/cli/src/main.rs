//! `lqg`: tilings, graph distances and KPZ campaigns from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dyadic_lqg::config::{env_table, merge, parse_table, parse_value, RunConfig};
use dyadic_lqg::experiment::{run_ball_growth, run_kpz, run_measure, run_ptp_distance, KpzPrediction};
use dyadic_lqg::field::check::{covariance_check, octave_variance_check};
use dyadic_lqg::graph::AdjacencyGraph;
use dyadic_lqg::io::{dump_tiling, emit_csv, load_tiling, write_plot, OutputMeta, Series};
use dyadic_lqg::rng::derive_seed;
use dyadic_lqg::tiling::{subdivide_where, Tiling};
use dyadic_lqg::{Error, Result, VERSION};
use toml::{Table, Value};

#[derive(Parser)]
#[command(name = "lqg", version = VERSION, about = "Dyadic LQG tilings, distances and KPZ measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Subdivide the domain at ε and optionally dump the tiling.
    Tile(Common),
    /// Graph distance between `z` and `w` in one tiling.
    Distance {
        #[command(flatten)]
        common: Common,
        /// Read the tiling from a dump instead of building it.
        #[arg(long)]
        tiling: Option<PathBuf>,
    },
    /// Ball volumes around `center` at the configured radii.
    Ball(Common),
    /// Quantum box counts of the fractal along the ε ladder.
    Kpz(Common),
    /// Rescaled quantum box counts `N^ε ε^{d_Q}`.
    Measure(Common),
    /// Point-to-point distances along the ε ladder.
    Ptp(Common),
    /// Check the covariance kernel and the octave sampler.
    FieldCheck(Common),
}

#[derive(Args, Default)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    q: Option<f64>,
    /// Matter central charge.
    #[arg(long = "cm")]
    c_m: Option<f64>,
    /// Largest threshold ε_0 of the ladder.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    ladder_steps: Option<u32>,
    #[arg(long)]
    replicas: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    depth_cap: Option<i32>,
    /// exact | octave | stub
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    domain_level: Option<i32>,
    /// Output file (CSV, or the tiling dump for `tile`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Fractal descriptor as an inline TOML table, e.g. `{kind = "cantor-dust", k = 3, depth = 30}`.
    #[arg(long)]
    fractal: Option<String>,
    /// Comma-separated ball radii.
    #[arg(long)]
    radii: Option<String>,
    /// Ball center `x,y`.
    #[arg(long)]
    center: Option<String>,
    /// First point `x,y`.
    #[arg(long)]
    z: Option<String>,
    /// Second point `x,y`.
    #[arg(long)]
    w: Option<String>,
    #[arg(long)]
    node_budget: Option<usize>,
}

fn list(text: &str) -> Value {
    parse_value(&format!("[{text}]"))
}

impl Common {
    fn overrides(&self) -> Table {
        let mut t = Table::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                t.insert(k.to_string(), v);
            }
        };
        put("q", self.q.map(Value::Float));
        put("c_m", self.c_m.map(Value::Float));
        put("epsilon", self.epsilon.map(Value::Float));
        put("ladder_steps", self.ladder_steps.map(|v| Value::Integer(v.into())));
        put("replicas", self.replicas.map(|v| Value::Integer(v.into())));
        put("seed", self.seed.map(|v| parse_value(&v.to_string())));
        put("depth_cap", self.depth_cap.map(|v| Value::Integer(v.into())));
        put("backend", self.backend.clone().map(Value::String));
        put("domain_level", self.domain_level.map(|v| Value::Integer(v.into())));
        put("out", self.out.as_ref().map(|p| Value::String(p.display().to_string())));
        put("threads", self.threads.map(|v| Value::Integer(v as i64)));
        put("fractal", self.fractal.as_deref().map(parse_value));
        put("radii", self.radii.as_deref().map(list));
        put("center", self.center.as_deref().map(list));
        put("z", self.z.as_deref().map(list));
        put("w", self.w.as_deref().map(list));
        put("node_budget", self.node_budget.map(|v| Value::Integer(v as i64)));
        t
    }

    fn resolve(&self) -> Result<RunConfig> {
        self.resolve_with(Table::new())
    }

    /// Like `resolve`, with `defaults` sitting below the file layer.
    fn resolve_with(&self, defaults: Table) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
                parse_table(&text)?
            }
            None => Table::new(),
        };
        let env = env_table(std::env::vars());
        RunConfig::from_table(merge(merge(merge(defaults, file), env), self.overrides()))
    }
}

fn plot_beside(out: &Path, meta: &OutputMeta, labels: (&str, &str), series: &[Series]) -> Result<()> {
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    write_plot(dir, stem, meta, labels, series)
}

fn build_tiling(cfg: &RunConfig) -> Result<Tiling> {
    let field = cfg.setup().field(derive_seed(cfg.seed, 0))?;
    let mut visited = 0usize;
    let t = subdivide_where(cfg.domain(), cfg.epsilon, &field, &cfg.params, cfg.depth_cap, |_| {
        visited += 1;
        visited <= cfg.node_budget
    })?;
    if visited > cfg.node_budget {
        return Err(Error::Capacity(format!(
            "the tiling needs more than {} squares; raise node_budget or ε, or lower depth_cap",
            cfg.node_budget
        )));
    }
    Ok(t)
}

fn tile(cfg: &RunConfig, meta: &OutputMeta) -> Result<()> {
    let t = build_tiling(cfg)?;
    println!("squares {}", t.squares.len());
    println!("unresolved {}", t.unresolved.len());
    if let Ok(side) = t.max_side() {
        println!("max_side {side}");
    }
    if let Some(out) = &cfg.out {
        dump_tiling(&t, meta, out)?;
    }
    Ok(())
}

fn distance(cfg: &RunConfig, loaded: Option<Tiling>) -> Result<()> {
    let t = match loaded {
        Some(t) => t,
        None => build_tiling(cfg)?,
    };
    let g = AdjacencyGraph::build(&t);
    println!("{}", g.distance(cfg.z(), cfg.w()));
    Ok(())
}

fn ball(cfg: &RunConfig, meta: &OutputMeta) -> Result<()> {
    let ladder = cfg.ladder()?;
    let out = run_ball_growth(cfg.center(), &cfg.radii, cfg.epsilon, &ladder, &cfg.setup())?;
    println!("radius median_e(r)");
    for (r, e) in out.radii.iter().zip(&out.median_exponent) {
        println!("{r} {e}");
    }
    println!("censored {}/{}", out.censored, cfg.replicas);
    if let Some(rf) = out.reference {
        println!("reference gamma_q_guess {} watabiki {}", rf.gamma_q_guess, rf.watabiki);
    }
    if let Some(path) = &cfg.out {
        emit_csv(path, meta, &out.records)?;
        let mut series = vec![Series {
            name: "median e(r)".into(),
            points: out.radii.iter().map(|&r| r as f64).zip(out.median_exponent.iter().copied()).collect(),
        }];
        if let Some(rf) = out.reference {
            for (name, v) in [("gamma Q + gamma/sqrt 6", rf.gamma_q_guess), ("Watabiki", rf.watabiki)] {
                series.push(Series { name: name.into(), points: out.radii.iter().map(|&r| (r as f64, v)).collect() });
            }
        }
        plot_beside(path, meta, ("r", "log #B_r / log r"), &series)?;
    }
    Ok(())
}

fn kpz(cfg: &RunConfig, meta: &OutputMeta) -> Result<()> {
    let out = run_kpz(&cfg.fractal, &cfg.ladder()?, &cfg.setup())?;
    match out.prediction {
        KpzPrediction::Finite(v) => println!("prediction {v}"),
        KpzPrediction::AtBoundary(v) => println!("prediction {v} (boundary case)"),
        KpzPrediction::Infinite => println!("prediction infinite"),
    }
    if let Some(fit) = &out.fit {
        println!("slope {} stderr {} r2 {}", fit.slope, fit.stderr, fit.r2);
        println!("censored {}/{} reportable {}", fit.censored, fit.replicas, fit.reportable());
    }
    for (eps, f) in cfg.ladder()?.epsilons.iter().zip(&out.unresolved_fraction) {
        println!("epsilon {eps} unresolved_fraction {f}");
    }
    if let Some(path) = &cfg.out {
        emit_csv(path, meta, &out.records)?;
        if let Some(fit) = &out.fit {
            let series = [Series { name: "log mean N".into(), points: fit.points.clone() }];
            plot_beside(path, meta, ("log 1/epsilon", "log N"), &series)?;
        }
    }
    Ok(())
}

fn measure(cfg: &RunConfig, meta: &OutputMeta) -> Result<()> {
    let out = run_measure(&cfg.fractal, &cfg.ladder()?, &cfg.setup())?;
    println!("exponent {}", out.exponent);
    println!("epsilon mean min max");
    for p in &out.series {
        println!("{} {} {} {}", p.epsilon, p.mean, p.min, p.max);
    }
    println!("censored {}/{}", out.censored, cfg.replicas);
    if let Some(path) = &cfg.out {
        emit_csv(path, meta, &out.records)?;
        let series = [Series {
            name: "mean N eps^d".into(),
            points: out.series.iter().map(|p| (-p.epsilon.ln(), p.mean)).collect(),
        }];
        plot_beside(path, meta, ("log 1/epsilon", "N eps^d"), &series)?;
    }
    Ok(())
}

fn ptp(cfg: &RunConfig, meta: &OutputMeta) -> Result<()> {
    let out = run_ptp_distance(cfg.z(), cfg.w(), &cfg.ladder()?, &cfg.setup())?;
    println!("slope {} stderr {} r2 {}", out.fit.slope, out.fit.stderr, out.fit.r2);
    println!("lower_exponent {}", out.lower_exponent);
    println!("censored {}/{} reportable {}", out.fit.censored, out.fit.replicas, out.fit.reportable());
    if let Some(path) = &cfg.out {
        emit_csv(path, meta, &out.records)?;
        let series = [Series { name: "log mean D".into(), points: out.fit.points.clone() }];
        plot_beside(path, meta, ("log 1/epsilon", "log D"), &series)?;
    }
    Ok(())
}

fn field_check(cfg: &RunConfig) -> Result<()> {
    let mut lines = covariance_check(cfg.seed, 50)?;
    lines.push(octave_variance_check(cfg.seed, cfg.replicas.max(400), 4..=12)?);
    let mut failed = false;
    for l in &lines {
        println!("{} {}: worst {:e} tolerance {:e}", if l.passed() { "PASS" } else { "FAIL" }, l.name, l.worst, l.tolerance);
        failed |= !l.passed();
    }
    if failed {
        return Err(Error::Numeric("field self-check failed".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let (name, common) = match &cli.command {
        Command::Tile(c) => ("tile", c),
        Command::Distance { common, .. } => ("distance", common),
        Command::Ball(c) => ("ball", c),
        Command::Kpz(c) => ("kpz", c),
        Command::Measure(c) => ("measure", c),
        Command::Ptp(c) => ("ptp", c),
        Command::FieldCheck(c) => ("field-check", c),
    };
    let loaded = match &cli.command {
        Command::Distance { tiling: Some(p), .. } => Some(load_tiling(p)?),
        _ => None,
    };
    let cfg = match &loaded {
        Some(t) => {
            let mut defaults = Table::new();
            defaults.insert("q".into(), Value::Float(t.params.q));
            common.resolve_with(defaults)?
        }
        None if matches!(cli.command, Command::FieldCheck(_)) => {
            // the field does not depend on the coupling
            let mut defaults = Table::new();
            defaults.insert("q".into(), Value::Float(2.0));
            common.resolve_with(defaults)?
        }
        None => common.resolve()?,
    };
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| Error::Config(format!("threads: {e}")))?;
    }
    let meta = OutputMeta::new(name, cfg.config_hash.clone());
    println!("# {name} config_hash {}", cfg.config_hash);
    match &cli.command {
        Command::Tile(_) => tile(&cfg, &meta),
        Command::Distance { .. } => distance(&cfg, loaded),
        Command::Ball(_) => ball(&cfg, &meta),
        Command::Kpz(_) => kpz(&cfg, &meta),
        Command::Measure(_) => measure(&cfg, &meta),
        Command::Ptp(_) => ptp(&cfg, &meta),
        Command::FieldCheck(_) => field_check(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
