//! Attractor graphs `phi: B -> [0, a]`: the preinvariant construction over
//! full orbits, the pullback graph, and empirical verification of
//! attraction, preinvariance and uniqueness.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use crate::base::{BasePoint, BaseSystem, Sided};
use crate::error::{Error, Result};
use crate::fiber::{FiberMap, ZERO_MAP_THRESHOLD};
use crate::nonautonomous::csv_float;
use crate::skew::SkewSystem;

pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_STEPS: usize = 1_000_000;
pub const DEFAULT_PULLBACK_DEPTH: usize = 1000;
pub const DEFAULT_PULLBACK_STOP: f64 = 1e-12;
/// Consecutive small deltas needed before the pullback stops early. A single
/// small delta is common when the fiber map is flat near `a`.
pub const PULLBACK_STOP_RUN: usize = 20;
pub const DEFAULT_GRID_NODES: usize = 1 << 14;
pub const POSITIVE_THRESHOLD: f64 = 1e-9;
const ZERO_GRID: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ConstructedPreinvariant,
    Pullback,
    UserSupplied,
}

/// Closed-form graphs that need no table.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphRule {
    /// `phi(x) = x_{-1}` on the two-sided shift.
    PastSymbol,
    Constant(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum GraphRepr {
    /// Values keyed by [`BaseSystem::key`].
    Table(BTreeMap<String, f64>),
    /// Values at the circle nodes `i / n`, read by nearest node.
    Grid(Vec<f64>),
    Rule(GraphRule),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphFunction {
    pub repr: GraphRepr,
    pub provenance: Provenance,
}

impl GraphFunction {
    pub fn table(values: BTreeMap<String, f64>, provenance: Provenance) -> Self {
        Self { repr: GraphRepr::Table(values), provenance }
    }

    pub fn grid(values: Vec<f64>, provenance: Provenance) -> Self {
        Self { repr: GraphRepr::Grid(values), provenance }
    }

    pub fn rule(rule: GraphRule) -> Self {
        Self { repr: GraphRepr::Rule(rule), provenance: Provenance::UserSupplied }
    }

    pub fn eval(&self, base: &BaseSystem, theta: &BasePoint) -> Result<f64> {
        match (&self.repr, theta) {
            (GraphRepr::Table(t), _) => {
                let key = base.key(theta);
                t.get(&key).copied().ok_or(Error::Coverage(key))
            }
            (GraphRepr::Grid(values), BasePoint::Circle(t)) if !values.is_empty() => {
                let n = values.len();
                let i = (t * n as f64).round() as usize % n;
                Ok(values[i])
            }
            (GraphRepr::Rule(GraphRule::Constant(c)), _) => Ok(*c),
            (GraphRepr::Rule(GraphRule::PastSymbol), BasePoint::Shift(s)) if s.past.is_some() => {
                Ok(s.past_symbol(0).unwrap_or(0) as f64)
            }
            _ => Err(Error::Coverage(base.key(theta))),
        }
    }

    /// Checks that every stored value lies in `[0, a]`.
    pub fn check_range(&self, a: f64) -> Result<()> {
        let bad = |v: f64| !(v >= 0.0 && v <= a);
        let offending = match &self.repr {
            GraphRepr::Table(t) => t.iter().find(|(_, v)| bad(**v)).map(|(k, v)| format!("{k} -> {v}")),
            GraphRepr::Grid(g) => g.iter().enumerate().find(|(_, v)| bad(**v)).map(|(i, v)| format!("node {i} -> {v}")),
            GraphRepr::Rule(GraphRule::Constant(c)) if bad(*c) => Some(format!("constant {c}")),
            GraphRepr::Rule(_) => None,
        };
        match offending {
            Some(s) => Err(Error::Invariant(format!("graph value outside [0, {a}]: {s}"))),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            GraphRepr::Table(t) => t.len(),
            GraphRepr::Grid(g) => g.len(),
            GraphRepr::Rule(_) => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fraction of stored values above [`POSITIVE_THRESHOLD`].
    pub fn positive_fraction(&self) -> f64 {
        let values: Vec<f64> = match &self.repr {
            GraphRepr::Table(t) => t.values().copied().collect(),
            GraphRepr::Grid(g) => g.clone(),
            GraphRepr::Rule(GraphRule::Constant(c)) => vec![*c],
            GraphRepr::Rule(_) => return f64::NAN,
        };
        if values.is_empty() {
            return f64::NAN;
        }
        values.iter().filter(|&&v| v > POSITIVE_THRESHOLD).count() as f64 / values.len() as f64
    }

    /// Largest jump between neighbouring grid nodes: the slack to allow for
    /// nearest-node lookup.
    pub fn grid_modulus(&self) -> Option<f64> {
        match &self.repr {
            GraphRepr::Grid(g) if g.len() > 1 => {
                let n = g.len();
                Some((0..n).map(|i| (g[(i + 1) % n] - g[i]).abs()).fold(0.0, f64::max))
            }
            _ => None,
        }
    }

    /// Writes `key,value` rows (tables) or `theta,value` rows (grids).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        match &self.repr {
            GraphRepr::Table(t) => {
                w.write_record(["key", "value"])?;
                for (k, v) in t {
                    w.write_record([k.clone(), csv_float(*v)])?;
                }
            }
            GraphRepr::Grid(g) => {
                w.write_record(["theta", "value"])?;
                let n = g.len() as f64;
                for (i, v) in g.iter().enumerate() {
                    w.write_record([csv_float(i as f64 / n), csv_float(*v)])?;
                }
            }
            GraphRepr::Rule(_) => {
                return Err(Error::Capability("rule graphs have no CSV form".into()));
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = r.headers()?.clone();
        let is_grid = match (headers.get(0), headers.get(1)) {
            (Some("theta"), Some("value")) => true,
            (Some("key"), Some("value")) => false,
            _ => {
                return Err(Error::Config {
                    path: "csv header".into(),
                    message: "expected `key,value` or `theta,value`".into(),
                })
            }
        };
        let mut keys = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<&str> {
                rec.get(i).ok_or_else(|| Error::Config {
                    path: format!("csv line {}", line + 2),
                    message: "missing column".into(),
                })
            };
            let v: f64 = parse(1)?.trim().parse().map_err(|_| Error::Config {
                path: format!("csv line {}", line + 2),
                message: "value is not a number".into(),
            })?;
            keys.push(parse(0)?.to_string());
            values.push(v);
        }
        if is_grid {
            let n = values.len() as f64;
            for (i, k) in keys.iter().enumerate() {
                let t: f64 = k.trim().parse().unwrap_or(f64::NAN);
                if !((t - i as f64 / n).abs() < 1e-9) {
                    return Err(Error::Config {
                        path: format!("csv line {}", i + 2),
                        message: format!("grid node {k} is not {i}/{n}"),
                    });
                }
            }
            Ok(Self::grid(values, Provenance::UserSupplied))
        } else {
            Ok(Self::table(keys.into_iter().zip(values).collect(), Provenance::UserSupplied))
        }
    }
}

/// Largest fixed point of a nondecreasing concave `g` with `g(0) = 0`,
/// reached by iterating down from `a`.
pub fn largest_fixed_point(g: &FiberMap) -> f64 {
    let a = g.endpoint();
    if g.eval(a) >= a {
        return a;
    }
    // g(x)/x decreases for concave g, so a positive fixed point needs slope > 1 at 0
    let delta = a * 1e-9;
    if g.eval(delta) <= delta {
        return 0.0;
    }
    let mut x = a;
    for _ in 0..FIXED_POINT_MAX_STEPS {
        let next = g.eval(x);
        if (next - x).abs() < FIXED_POINT_TOL {
            return next;
        }
        x = next;
    }
    x
}

/// Forward orbit of a seed: either it closes into a cycle (`cycle_start`
/// indexes the first periodic point) or it is a window of a non-periodic
/// orbit.
struct OrbitWindow {
    points: Vec<BasePoint>,
    keys: Vec<String>,
    cycle_start: Option<usize>,
}

fn forward_window(sys: &SkewSystem, seed: &BasePoint, horizon: usize) -> Result<OrbitWindow> {
    let base = sys.base();
    let mut points = vec![seed.clone()];
    let mut keys = vec![base.key(seed)];
    let mut seen: HashMap<String, usize> = HashMap::from([(keys[0].clone(), 0)]);
    for _ in 0..horizon {
        let next = base.successor(points.last().unwrap())?;
        let key = base.key(&next);
        if let Some(&i) = seen.get(&key) {
            return Ok(OrbitWindow { points, keys, cycle_start: Some(i) });
        }
        seen.insert(key.clone(), points.len());
        points.push(next);
        keys.push(key);
    }
    Ok(OrbitWindow { points, keys, cycle_start: None })
}

fn is_zero_fiber(sys: &SkewSystem, theta: &BasePoint) -> bool {
    sys.analyzable() && sys.fiber_map(theta).is_zero_on_grid(ZERO_GRID)
}

/// Per-orbit construction of a preinvariant graph.
///
/// * pinched cycle (a zero fiber map on the periodic part): `phi = 0` on the
///   whole orbit;
/// * periodic or preperiodic orbit: at the cycle point with the smallest key,
///   `a0` is the largest fixed point of the fiber composition around the
///   cycle, pushed forward around the cycle; transient points get `a`;
/// * non-periodic window: `phi(R^n theta_0) = pi_2 F^n(theta_0, a)` from the
///   first point after the last zero map; earlier points get `a`.
///
/// On finite bases every point is a seed and `seeds` is ignored. Values
/// already assigned by an earlier seed are kept.
pub fn build_preinvariant(sys: &SkewSystem, seeds: &[BasePoint], horizon: usize) -> Result<GraphFunction> {
    let a = sys.endpoint();
    let base = sys.base();
    let all_seeds: Vec<BasePoint>;
    let (seeds, horizon) = match base {
        BaseSystem::FiniteOrbit(b) => {
            all_seeds = (0..b.len()).map(BasePoint::Finite).collect();
            (&all_seeds[..], b.len())
        }
        BaseSystem::Shift { sided: Sided::One } | BaseSystem::Shift { sided: Sided::Two } | BaseSystem::Circle { .. } => {
            if seeds.is_empty() {
                return Err(Error::Capability(format!(
                    "orbits of the {} base are not enumerable without seeds",
                    base.variant_name()
                )));
            }
            (seeds, horizon)
        }
    };

    let mut table: BTreeMap<String, f64> = BTreeMap::new();
    for seed in seeds {
        let w = forward_window(sys, seed, horizon)?;
        match w.cycle_start {
            Some(start) => {
                let cycle = &w.points[start..];
                let pinched = cycle.iter().any(|t| is_zero_fiber(sys, t));
                if pinched {
                    for k in &w.keys {
                        table.entry(k.clone()).or_insert(0.0);
                    }
                    continue;
                }
                let rot = (0..cycle.len()).min_by_key(|&i| &w.keys[start + i]).unwrap();
                let ordered: Vec<BasePoint> = (0..cycle.len()).map(|j| cycle[(rot + j) % cycle.len()].clone()).collect();
                let composition = {
                    let sys = sys.clone();
                    let ordered = ordered.clone();
                    FiberMap::from_fn(a, "cycle composition", move |x| {
                        ordered.iter().fold(x, |acc, t| sys.apply(t, acc))
                    })
                };
                let mut value = largest_fixed_point(&composition);
                for t in &ordered {
                    table.entry(base.key(t)).or_insert(value);
                    value = sys.apply(t, value);
                }
                for k in &w.keys[..start] {
                    table.entry(k.clone()).or_insert(a);
                }
            }
            None => {
                let last_zero = (0..w.points.len()).rev().find(|&i| is_zero_fiber(sys, &w.points[i]));
                let start = last_zero.map_or(0, |i| i + 1);
                for k in &w.keys[..start.min(w.keys.len())] {
                    table.entry(k.clone()).or_insert(a);
                }
                let mut value = a;
                for i in start..w.points.len() {
                    table.entry(w.keys[i].clone()).or_insert(value);
                    value = sys.apply(&w.points[i], value);
                }
            }
        }
    }
    Ok(GraphFunction::table(table, Provenance::ConstructedPreinvariant))
}

#[derive(Clone, Debug, Serialize)]
pub struct PullbackSeries {
    /// `phi_1(theta), ..., phi_n(theta)`.
    pub values: Vec<f64>,
    /// `|phi_n - phi_{n-1}|` at the last recorded depth.
    pub delta: f64,
    pub converged: bool,
}

impl PullbackSeries {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("depth >= 1")
    }

    /// True when the series never increases by more than `slack`.
    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

/// `phi_n(theta) = pi_2 F^n(R^{-n}(theta), a)` for `n = 1..=depth`; stops
/// early once successive values differ by less than `stop` for
/// [`PULLBACK_STOP_RUN`] steps in a row.
pub fn pullback_phi(sys: &SkewSystem, theta: &BasePoint, depth: usize, stop: Option<f64>) -> Result<PullbackSeries> {
    if depth == 0 {
        return Err(Error::domain("pullback depth must be >= 1"));
    }
    let base = sys.base();
    if !base.is_invertible() {
        return Err(Error::Capability(format!("{} base is not invertible", base.variant_name())));
    }
    let a = sys.endpoint();
    let mut back = vec![theta.clone()];
    let mut values = Vec::with_capacity(depth.min(4096));
    let mut converged = false;
    let mut run = 0;
    for n in 1..=depth {
        back.push(base.predecessor(&back[n - 1])?);
        let v = (1..=n).rev().fold(a, |x, j| sys.apply(&back[j], x));
        values.push(v);
        if let (Some(stop), [.., p, q]) = (stop, values.as_slice()) {
            run = if (p - q).abs() < stop { run + 1 } else { 0 };
            if run >= PULLBACK_STOP_RUN {
                converged = true;
                break;
            }
        }
    }
    let delta = match values.as_slice() {
        [.., p, q] => (p - q).abs(),
        [only] => (a - only).abs(),
        [] => unreachable!(),
    };
    Ok(PullbackSeries { values, delta, converged })
}

/// `phi_depth(theta)` alone, in `O(depth)`.
pub fn pullback_value(sys: &SkewSystem, theta: &BasePoint, depth: usize) -> Result<f64> {
    let base = sys.base();
    let mut back = Vec::with_capacity(depth);
    let mut t = theta.clone();
    for _ in 0..depth {
        t = base.predecessor(&t)?;
        back.push(t.clone());
    }
    Ok(back.iter().rev().fold(sys.endpoint(), |x, t| sys.apply(t, x)))
}

#[derive(Clone, Debug)]
pub struct PullbackOptions {
    pub depth: usize,
    /// Early-stop threshold on successive values; `None` runs to full depth.
    pub stop: Option<f64>,
}

impl Default for PullbackOptions {
    fn default() -> Self {
        Self { depth: DEFAULT_PULLBACK_DEPTH, stop: Some(DEFAULT_PULLBACK_STOP) }
    }
}

fn pullback_at(sys: &SkewSystem, theta: &BasePoint, opts: &PullbackOptions) -> Result<(f64, f64, bool)> {
    match opts.stop {
        Some(_) => {
            let s = pullback_phi(sys, theta, opts.depth, opts.stop)?;
            Ok((s.last(), s.delta, s.is_nonincreasing(1e-14)))
        }
        None => {
            let v = pullback_value(sys, theta, opts.depth)?;
            let prev = pullback_value(sys, theta, opts.depth - 1)?;
            Ok((v, (prev - v).abs(), v <= prev + 1e-14))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PullbackSummary {
    pub points: usize,
    pub max_delta: f64,
    pub nonmonotone_points: usize,
    pub positive_fraction: f64,
}

/// Pullback graph on `n` circle nodes, evaluated in parallel.
pub fn pullback_grid(sys: &SkewSystem, nodes: usize, opts: &PullbackOptions) -> Result<(GraphFunction, PullbackSummary)> {
    if !matches!(sys.base(), BaseSystem::Circle { .. }) {
        return Err(Error::Capability("grid pullback needs a circle base".into()));
    }
    let results: Vec<(f64, f64, bool)> = (0..nodes)
        .into_par_iter()
        .map(|i| pullback_at(sys, &BasePoint::Circle(i as f64 / nodes as f64), opts))
        .collect::<Result<_>>()?;
    let graph = GraphFunction::grid(results.iter().map(|r| r.0).collect(), Provenance::Pullback);
    let summary = PullbackSummary {
        points: nodes,
        max_delta: results.iter().map(|r| r.1).fold(0.0, f64::max),
        nonmonotone_points: results.iter().filter(|r| !r.2).count(),
        positive_fraction: graph.positive_fraction(),
    };
    Ok((graph, summary))
}

/// Pullback graph stored on the exact forward orbits `R^j(seed)`,
/// `0 <= j <= horizon`, of each seed (all points of a finite base when
/// `seeds` is empty).
pub fn pullback_table(
    sys: &SkewSystem,
    seeds: &[BasePoint],
    horizon: usize,
    opts: &PullbackOptions,
) -> Result<(GraphFunction, PullbackSummary)> {
    let base = sys.base();
    let points: Vec<BasePoint> = match (base, seeds.is_empty()) {
        (BaseSystem::FiniteOrbit(b), true) => (0..b.len()).map(BasePoint::Finite).collect(),
        _ => {
            let mut pts = Vec::new();
            for s in seeds {
                pts.extend(sys.base_orbit(s, horizon)?);
            }
            pts
        }
    };
    let results: Vec<(String, f64, f64, bool)> = points
        .par_iter()
        .map(|p| pullback_at(sys, p, opts).map(|(v, d, m)| (base.key(p), v, d, m)))
        .collect::<Result<_>>()?;
    let summary = PullbackSummary {
        points: results.len(),
        max_delta: results.iter().map(|r| r.2).fold(0.0, f64::max),
        nonmonotone_points: results.iter().filter(|r| !r.3).count(),
        positive_fraction: f64::NAN,
    };
    let graph = GraphFunction::table(results.into_iter().map(|r| (r.0, r.1)).collect(), Provenance::Pullback);
    let summary = PullbackSummary { positive_fraction: graph.positive_fraction(), ..summary };
    Ok((graph, summary))
}

#[derive(Clone, Debug, Serialize)]
pub struct AttractorRecord {
    pub start: String,
    pub fiber: f64,
    /// First `N` with `d_n < tol` for all sampled `n >= N`.
    pub first_n: Option<usize>,
    pub max_deviation_after: Option<f64>,
    pub final_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AttractorVerdict {
    pub records: Vec<AttractorRecord>,
    pub attracting: bool,
    pub tolerance: f64,
    pub steps: usize,
}

/// Follows each start for `steps` iterations and measures
/// `d_n = |pi_2 F^n(start) - phi(R^n(theta))|`.
pub fn verify_attractor(
    sys: &SkewSystem,
    graph: &GraphFunction,
    starts: &[(BasePoint, f64)],
    steps: usize,
    tol: f64,
) -> Result<AttractorVerdict> {
    let base = sys.base();
    let records: Vec<AttractorRecord> = starts
        .par_iter()
        .map(|(theta, x)| -> Result<AttractorRecord> {
            let mut dev = Vec::with_capacity(steps + 1);
            let (mut t, mut y) = (theta.clone(), *x);
            dev.push((y - graph.eval(base, &t)?).abs());
            for _ in 0..steps {
                (t, y) = sys.step(&t, y)?;
                dev.push((y - graph.eval(base, &t)?).abs());
            }
            let tail_ok = dev.iter().rposition(|&d| !(d < tol)).map_or(0, |i| i + 1);
            let first_n = (tail_ok <= steps).then_some(tail_ok);
            let max_after = first_n.map(|n| dev[n..].iter().copied().fold(0.0, f64::max));
            Ok(AttractorRecord {
                start: base.key(theta),
                fiber: *x,
                first_n,
                max_deviation_after: max_after,
                final_deviation: *dev.last().unwrap(),
            })
        })
        .collect::<Result<_>>()?;
    let attracting = records.iter().all(|r| r.first_n.is_some());
    Ok(AttractorVerdict { records, attracting, tolerance: tol, steps })
}

#[derive(Clone, Debug, Serialize)]
pub struct PreinvarianceReport {
    pub theta: String,
    pub horizon: usize,
    /// Smallest `N` with residual `<= tol` for all `N <= n < horizon`.
    pub settled_from: Option<usize>,
    pub first_violation: Option<usize>,
    pub max_residual_after: f64,
    pub residuals: Vec<f64>,
}

/// Residuals `|psi_{R^n theta}(phi(R^n theta)) - phi(R^{n+1} theta)|` for
/// `0 <= n < horizon`.
pub fn verify_preinvariance(
    sys: &SkewSystem,
    graph: &GraphFunction,
    theta: &BasePoint,
    horizon: usize,
    tol: f64,
) -> Result<PreinvarianceReport> {
    let base = sys.base();
    let orbit = sys.base_orbit(theta, horizon)?;
    let mut residuals = Vec::with_capacity(horizon);
    for n in 0..horizon {
        let here = graph.eval(base, &orbit[n])?;
        let there = graph.eval(base, &orbit[n + 1])?;
        residuals.push((sys.apply(&orbit[n], here) - there).abs());
    }
    let settle = residuals.iter().rposition(|&r| !(r <= tol)).map_or(0, |i| i + 1);
    let settled_from = (settle < horizon || horizon == 0).then_some(settle);
    let max_residual_after = residuals[settle.min(residuals.len())..].iter().copied().fold(0.0, f64::max);
    Ok(PreinvarianceReport {
        theta: base.key(theta),
        horizon,
        settled_from,
        first_violation: residuals.iter().position(|&r| !(r <= tol)),
        max_residual_after,
        residuals,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitGap {
    pub theta: String,
    pub tail_max_gap: f64,
    pub eventually_close: bool,
    /// Gap of at least `eps` recurs in the second half of the window: the
    /// two graphs cannot both attract along this orbit.
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub eps: f64,
    pub steps: usize,
    pub orbits: Vec<OrbitGap>,
    pub flagged: usize,
}

pub fn uniqueness_probe(
    sys: &SkewSystem,
    g1: &GraphFunction,
    g2: &GraphFunction,
    thetas: &[BasePoint],
    steps: usize,
    eps: f64,
) -> Result<UniquenessReport> {
    let base = sys.base();
    let mut orbits = Vec::with_capacity(thetas.len());
    for theta in thetas {
        let orbit = sys.base_orbit(theta, steps)?;
        let mut tail = 0.0f64;
        for (n, t) in orbit.iter().enumerate() {
            let gap = (g1.eval(base, t)? - g2.eval(base, t)?).abs();
            if n >= steps / 2 {
                tail = tail.max(gap);
            }
        }
        orbits.push(OrbitGap {
            theta: base.key(theta),
            tail_max_gap: tail,
            eventually_close: tail < eps,
            flagged: tail >= eps,
        });
    }
    let flagged = orbits.iter().filter(|o| o.flagged).count();
    Ok(UniquenessReport { eps, steps, orbits, flagged })
}

/// Fraction of starts with `pi_2 F^n(start) = phi(R^n(theta))` exactly.
pub fn graph_match_frequency(
    sys: &SkewSystem,
    graph: &GraphFunction,
    starts: &[(BasePoint, f64)],
    n: usize,
) -> Result<f64> {
    if starts.is_empty() {
        return Err(Error::domain("no starts given"));
    }
    let mut hits = 0usize;
    for (theta, x) in starts {
        let (t, y) = sys.iterate(theta, *x, n)?;
        if (y - graph.eval(sys.base(), &t)?).abs() < ZERO_MAP_THRESHOLD {
            hits += 1;
        }
    }
    Ok(hits as f64 / starts.len() as f64)
}
