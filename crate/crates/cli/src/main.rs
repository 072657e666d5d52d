use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use skewlab::attractor::{
    pullback_grid, pullback_table, verify_attractor, verify_preinvariance, GraphFunction, GraphRepr, PullbackOptions,
};
use skewlab::base::{BasePoint, BaseSystem};
use skewlab::nonautonomous::{iterate_pair, MapSequence, BOUND_SLACK};
use skewlab::{catalog, certify, Error, FiberFamily, SkewSystem, SystemConfig};

mod demo;

#[derive(Parser)]
#[command(name = "skewlab", version, about = "Fiberwise attractors of concave skew products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify alpha-concavity of the fiber map at one base point.
    Certify {
        /// System config (JSON file) or `@name` for a catalog entry.
        config: String,
        #[arg(long)]
        grid: Option<usize>,
        /// Base point; defaults to the first sample point.
        #[arg(long)]
        theta: Option<String>,
    },
    /// Iterate two fiber orbits along the base orbit of theta and emit the trace.
    OrbitPair {
        config: String,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        y0: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pullback graph phi_K on a circle grid, a finite base, or sampled shift orbits.
    Pullback {
        config: String,
        /// Circle grid nodes, or number of sampled shift seeds.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        depth: Option<usize>,
        /// Early-stop threshold; 0 disables early stopping.
        #[arg(long)]
        stop: Option<f64>,
        /// Forward orbit length stored per shift seed.
        #[arg(long, default_value_t = 100)]
        horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a graph (CSV from `pullback` or user-supplied) for attraction and preinvariance.
    Verify {
        config: String,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run a bundled reproduction and print each claim with PASS/FAIL.
    Demo {
        #[arg(value_parser = ["noinvattr", "coinflip-one", "coinflip-two", "keller", "product-hump"])]
        name: String,
    },
    /// Print the config of a catalog entry, or list the entries.
    Catalog { name: Option<String> },
}

enum Failure {
    Lib(Error),
    BoundViolation(String),
    DemoFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::Registry(_)
        | Error::Representation(_)
        | Error::Domain(_)
        | Error::Io(_)
        | Error::Csv(_)
        | Error::Json(_) => 2,
        Error::Capability(_) => 5,
        _ => 3,
    }
}

fn load(config: &str) -> Result<(SystemConfig, SkewSystem), Error> {
    let cfg = match config.strip_prefix('@') {
        Some(name) => (catalog::lookup(name)?.config)(),
        None => {
            let text = std::fs::read_to_string(config).map_err(|e| Error::Config {
                path: config.to_string(),
                message: e.to_string(),
            })?;
            SystemConfig::from_json(&text)?
        }
    };
    let sys = cfg.build()?;
    Ok((cfg, sys))
}

fn output(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn require_analyzable(sys: &SkewSystem) -> Result<(), Error> {
    if sys.analyzable() {
        Ok(())
    } else {
        Err(Error::Capability(format!("{}: concavity analysis is disabled for this fiber family", sys.name())))
    }
}

fn run_certify(config: &str, grid: Option<usize>, theta: Option<String>) -> Result<(), Failure> {
    let (cfg, sys) = load(config)?;
    require_analyzable(&sys)?;
    let point = match theta {
        Some(t) => sys.base().parse_point(&t)?,
        None => sys.base().sample_points(1, cfg.analysis.seed).remove(0),
    };
    let cert = certify(&sys.fiber_map(&point), grid.unwrap_or(cfg.analysis.grid_size))?;
    print_json(&json!({
        "system": sys.name(),
        "theta": sys.base().key(&point),
        "certificate": cert,
    }));
    Ok(())
}

fn run_orbit_pair(
    config: &str,
    theta: &str,
    x0: f64,
    y0: f64,
    steps: usize,
    out: &Option<PathBuf>,
) -> Result<(), Failure> {
    let (_, sys) = load(config)?;
    require_analyzable(&sys)?;
    let point = sys.base().parse_point(theta)?;
    let seq = MapSequence::along_orbit(&sys, &point, steps)?;
    let trace = iterate_pair(&seq, x0, y0, steps)?;
    let mut w = output(out)?;
    trace.write_csv(&mut w)?;
    w.flush()?;
    let bad = trace.violations(BOUND_SLACK);
    if !bad.is_empty() {
        return Err(Failure::BoundViolation(format!("ratio exceeds its bound at steps {bad:?}")));
    }
    Ok(())
}

fn run_pullback(
    config: &str,
    grid: Option<usize>,
    depth: Option<usize>,
    stop: Option<f64>,
    horizon: usize,
    out: &Option<PathBuf>,
) -> Result<(), Failure> {
    let (cfg, sys) = load(config)?;
    if !sys.base().is_invertible() {
        return Err(Error::Capability(format!("{} base not invertible", sys.base().variant_name())).into());
    }
    let stop = stop.unwrap_or(cfg.analysis.stop_delta);
    let opts = PullbackOptions {
        depth: depth.unwrap_or(cfg.analysis.depth).max(1),
        stop: (stop > 0.0).then_some(stop),
    };
    let (graph, summary) = match sys.base() {
        BaseSystem::Circle { .. } => pullback_grid(&sys, grid.unwrap_or(skewlab::attractor::DEFAULT_GRID_NODES), &opts)?,
        BaseSystem::FiniteOrbit(_) => pullback_table(&sys, &[], 0, &opts)?,
        BaseSystem::Shift { .. } => {
            let seeds = sys.base().sample_points(grid.unwrap_or(cfg.analysis.samples), cfg.analysis.seed);
            pullback_table(&sys, &seeds, horizon, &opts)?
        }
    };
    let mut w = output(out)?;
    graph.write_csv(&mut w)?;
    w.flush()?;
    let mut report = json!({ "system": sys.name(), "depth": opts.depth, "summary": summary });
    if let BaseSystem::FiniteOrbit(b) = sys.base() {
        if let Some(i) = b.noinvattr_index(0) {
            let v = graph.eval(sys.base(), &BasePoint::Finite(i))?;
            report["phi_at_theta0"] = json!(v);
            report["two_pow_minus_depth"] = json!(0.5f64.powi(opts.depth as i32));
        }
    }
    // the CSV owns stdout unless it went to a file
    let text = serde_json::to_string_pretty(&report).expect("json");
    if out.is_some() {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
    Ok(())
}

/// Starts whose forward orbits stay inside a table graph for `steps` steps.
fn covered_starts(sys: &SkewSystem, graph: &GraphFunction, steps: usize) -> Result<Vec<BasePoint>, Error> {
    let GraphRepr::Table(t) = &graph.repr else { unreachable!() };
    let mut out = Vec::new();
    for key in t.keys() {
        let p = sys.base().parse_point(key)?;
        let orbit = sys.base_orbit(&p, steps)?;
        if orbit.iter().all(|q| t.contains_key(&sys.base().key(q))) {
            out.push(p);
        }
    }
    Ok(out)
}

fn run_verify(config: &str, phi: &Path, samples: Option<usize>, steps: usize, tol: Option<f64>) -> Result<(), Failure> {
    let (cfg, sys) = load(config)?;
    let graph = GraphFunction::read_csv(File::open(phi)?)?;
    graph.check_range(sys.endpoint())?;
    let samples = samples.unwrap_or(cfg.analysis.samples).max(1);
    let tol = tol.unwrap_or(cfg.analysis.tolerance);
    let mut thetas = match &graph.repr {
        GraphRepr::Table(_) => covered_starts(&sys, &graph, steps)?,
        _ => sys.base().sample_points(samples, cfg.analysis.seed),
    };
    if thetas.is_empty() {
        return Err(Error::Coverage(format!("no base point of {} has its {steps}-step orbit in the graph", phi.display())).into());
    }
    if thetas.len() > samples {
        let stride = thetas.len() as f64 / samples as f64;
        thetas = (0..samples).map(|i| thetas[(i as f64 * stride) as usize].clone()).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.analysis.seed);
    let a = sys.endpoint();
    let starts: Vec<(BasePoint, f64)> = thetas
        .iter()
        .map(|t| {
            let x = match sys.family() {
                FiberFamily::CoinFlip => rng.random_range(0..2) as f64,
                _ => a * (1.0 - rng.random::<f64>()),
            };
            (t.clone(), x)
        })
        .collect();
    let verdict = verify_attractor(&sys, &graph, &starts, steps, tol)?;
    let mut pre = Vec::new();
    for t in &thetas {
        let r = verify_preinvariance(&sys, &graph, t, steps, tol)?;
        pre.push(json!({
            "theta": r.theta,
            "settled_from": r.settled_from,
            "first_violation": r.first_violation,
            "max_residual_after": r.max_residual_after,
        }));
    }
    print_json(&json!({
        "system": sys.name(),
        "attractor": verdict,
        "preinvariance": pre,
        "grid_modulus": graph.grid_modulus(),
    }));
    Ok(())
}

fn run_catalog(name: Option<String>) -> Result<(), Failure> {
    match name {
        Some(n) => println!("{}", (catalog::lookup(&n)?.config)().to_json()),
        None => {
            for e in catalog::entries() {
                println!("{:<14} {}", e.name, e.doc);
            }
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("SKEWLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Error::Config {
        path: "SKEWLAB_THREADS".into(),
        message: format!("expected a positive integer, got {v:?}"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config { path: "SKEWLAB_THREADS".into(), message: e.to_string() })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().map_err(Failure::from).and_then(|_| match cli.command {
        Command::Certify { config, grid, theta } => run_certify(&config, grid, theta),
        Command::OrbitPair { config, theta, x0, y0, steps, out } => run_orbit_pair(&config, &theta, x0, y0, steps, &out),
        Command::Pullback { config, grid, depth, stop, horizon, out } => {
            run_pullback(&config, grid, depth, stop, horizon, &out)
        }
        Command::Verify { config, phi, samples, steps, tol } => run_verify(&config, &phi, samples, steps, tol),
        Command::Demo { name } => {
            if demo::run(&name)? {
                Ok(())
            } else {
                Err(Failure::DemoFailed)
            }
        }
        Command::Catalog { name } => run_catalog(name),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::BoundViolation(msg)) => {
            eprintln!("bound violation: {msg}");
            ExitCode::from(4)
        }
        Err(Failure::DemoFailed) => ExitCode::from(3),
    }
}
