//! Nonautonomous iteration `x_n = f_n(x_{n-1})` of a sequence of fiber
//! maps, paired-orbit traces, and checks of the per-step contraction bounds.

use serde::Serialize;
use std::io::Write;
use std::sync::Arc;

use crate::base::BasePoint;
use crate::error::{Error, Result};
use crate::fiber::{certify, kappa, FiberMap, ZERO_MAP_THRESHOLD};
use crate::skew::SkewSystem;

/// Slack used when comparing a recorded ratio with its bound.
pub const BOUND_SLACK: f64 = 1e-9;
/// Below this relative gap the step ratio is dominated by roundoff and is
/// not recorded.
pub const KAPPA_FLOOR: f64 = 1e-10;
const ENVELOPE_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceKind {
    Pinched,
    Equiconcave,
    Unknown,
}

type Supplier = Arc<dyn Fn(usize) -> FiberMap + Send + Sync>;

/// A sequence `(f_n)_{n >= 1}` of maps of a common interval `[0, a]`.
#[derive(Clone)]
pub struct MapSequence {
    endpoint: f64,
    supplier: Supplier,
    declared_beta: Option<f64>,
    kind: SequenceKind,
}

impl std::fmt::Debug for MapSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MapSequence")
            .field("endpoint", &self.endpoint)
            .field("declared_beta", &self.declared_beta)
            .field("kind", &self.kind)
            .finish()
    }
}

impl MapSequence {
    /// `supplier(n)` must return `f_n` for every `n >= 1`.
    pub fn from_fn(endpoint: f64, supplier: impl Fn(usize) -> FiberMap + Send + Sync + 'static) -> Self {
        Self {
            endpoint,
            supplier: Arc::new(supplier),
            declared_beta: None,
            kind: SequenceKind::Unknown,
        }
    }

    pub fn constant(map: FiberMap) -> Self {
        let a = map.endpoint();
        Self::from_fn(a, move |_| map.clone())
    }

    /// `f_n = maps[n - 1]`; the last map repeats past the end.
    pub fn from_maps(maps: Vec<FiberMap>) -> Result<Self> {
        let a = maps.first().ok_or_else(|| Error::domain("empty map list"))?.endpoint();
        if maps.iter().any(|m| m.endpoint() != a) {
            return Err(Error::domain("all maps must share the same domain endpoint"));
        }
        Ok(Self::from_fn(a, move |n| maps[(n.max(1) - 1).min(maps.len() - 1)].clone()))
    }

    /// The fiber maps met along the forward base orbit of `theta`:
    /// `f_n = psi_{R^{n-1}(theta)}`.
    pub fn along_orbit(sys: &SkewSystem, theta: &BasePoint, steps: usize) -> Result<Self> {
        let orbit = sys.base_orbit(theta, steps.max(1))?;
        let maps: Vec<FiberMap> = orbit[..steps.max(1)].iter().map(|t| sys.fiber_map(t)).collect();
        Self::from_maps(maps)
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.declared_beta = Some(beta);
        self.kind = SequenceKind::Equiconcave;
        self
    }

    pub fn with_kind(mut self, kind: SequenceKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn endpoint(&self) -> f64 {
        self.endpoint
    }

    pub fn declared_beta(&self) -> Option<f64> {
        self.declared_beta
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn map(&self, n: usize) -> FiberMap {
        (self.supplier)(n)
    }

    /// Checks the declared equiconcavity on the given indices: each `f_n`
    /// certifies with `alpha* >= beta gamma_n - tol`.
    pub fn validate_equiconcave(&self, indices: impl IntoIterator<Item = usize>, grid_size: usize, tol: f64) -> Result<()> {
        let beta = self
            .declared_beta
            .ok_or_else(|| Error::precondition("sequence declares no beta"))?;
        for n in indices {
            let f = self.map(n);
            if f.endpoint() != self.endpoint {
                return Err(Error::precondition(format!("f_{n} has a different domain endpoint")));
            }
            let c = certify(&f, grid_size)?;
            if c.alpha_star < beta * c.gamma - tol {
                return Err(Error::precondition(format!(
                    "f_{n} is only {}-concave, below beta*gamma = {}",
                    c.alpha_star,
                    beta * c.gamma
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// The map kept the order of the pair.
    OrderPreserving,
    /// The map reversed the order of the pair.
    OrderReversing,
}

/// One row of a paired trajectory. Row `n` holds `(x_n, y_n)`; the ratio,
/// bound and isoclinic point describe the step from `n - 1` to `n` made by
/// `f_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairStep {
    pub n: usize,
    pub x: f64,
    pub y: f64,
    pub kappa: Option<f64>,
    pub ratio: Option<f64>,
    pub bound: Option<f64>,
    pub b: Option<f64>,
    pub bound_kind: Option<BoundKind>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    Merged,
    Pinched,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitPairTrace {
    pub endpoint: f64,
    pub records: Vec<PairStep>,
    pub termination: Termination,
}

impl OrbitPairTrace {
    /// Steps whose recorded ratio exceeds the recorded bound by more than `slack`.
    pub fn violations(&self, slack: f64) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| matches!((r.ratio, r.bound), (Some(q), Some(b)) if q > b + slack))
            .map(|r| r.n)
            .collect()
    }

    /// First `n` with `|x_n - y_n| < tol`.
    pub fn first_within(&self, tol: f64) -> Option<usize> {
        self.records.iter().find(|r| (r.x - r.y).abs() < tol).map(|r| r.n)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["n", "x", "y", "kappa", "ratio", "bound", "b"])?;
        let cell = |v: Option<f64>| v.map(csv_float).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                r.n.to_string(),
                csv_float(r.x),
                csv_float(r.y),
                cell(r.kappa),
                cell(r.ratio),
                cell(r.bound),
                cell(r.b),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or large magnitudes.
pub(crate) fn csv_float(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Clone, Debug)]
pub struct TraceOptions {
    /// Grid used to certify each `f_n`.
    pub grid_size: usize,
    pub isoclinic_tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { grid_size: 2048, isoclinic_tol: 1e-10 }
    }
}

struct MapFacts {
    alpha: f64,
    gamma: f64,
    b: Option<f64>,
}

fn map_facts(f: &FiberMap, beta: Option<f64>, opts: &TraceOptions) -> Result<MapFacts> {
    let c = certify(f, opts.grid_size)?;
    let alpha = match beta {
        Some(beta) => beta * c.gamma,
        None => c.alpha_star,
    };
    Ok(MapFacts { alpha, gamma: c.gamma, b: c.isoclinic_point })
}

fn kappa_opt(x: f64, y: f64) -> Option<f64> {
    kappa(x, y).ok()
}

pub fn iterate_pair(seq: &MapSequence, x0: f64, y0: f64, steps: usize) -> Result<OrbitPairTrace> {
    iterate_pair_with(seq, x0, y0, steps, &TraceOptions::default())
}

/// Iterates both orbits through `f_1, f_2, ...` for at most `steps` maps.
///
/// The pair is handled as `(lo, hi)` at every step, so a swap of the two
/// coordinates is a role swap and never changes `kappa`. The recorded bound
/// is `f(hi)/(f(hi) + alpha hi^2)` when the order is kept and
/// `1 - beta a (b - lo)/2` when it is reversed with both points below `b`;
/// no bound is recorded on ties or when the reversed pair is not below `b`.
pub fn iterate_pair_with(
    seq: &MapSequence,
    x0: f64,
    y0: f64,
    steps: usize,
    opts: &TraceOptions,
) -> Result<OrbitPairTrace> {
    let a = seq.endpoint;
    for (name, v) in [("x0", x0), ("y0", y0)] {
        if !(v > 0.0 && v <= a) {
            return Err(Error::domain(format!("{name} = {v} outside (0, {a}]")));
        }
    }
    let mut trace = OrbitPairTrace { endpoint: a, records: Vec::new(), termination: Termination::Completed };
    if steps == 0 {
        return Ok(trace);
    }
    trace.records.push(PairStep {
        n: 0,
        x: x0,
        y: y0,
        kappa: kappa_opt(x0, y0),
        ratio: None,
        bound: None,
        b: None,
        bound_kind: None,
    });
    if x0 == y0 {
        trace.termination = Termination::Merged;
        return Ok(trace);
    }

    let (mut x, mut y) = (x0, y0);
    for n in 1..=steps {
        let f = seq.map(n);
        let facts = map_facts(&f, seq.declared_beta, opts)?;
        let (nx, ny) = (f.eval(x), f.eval(y));
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        let (flo, fhi) = (f.eval(lo), f.eval(hi));

        let (bound, kind) = if flo < fhi {
            if flo > 0.0 {
                (Some(fhi / (fhi + facts.alpha * hi * hi)), Some(BoundKind::OrderPreserving))
            } else {
                (None, None)
            }
        } else if fhi < flo && fhi > 0.0 {
            match facts.b {
                Some(b) if hi < b && facts.alpha > 0.0 && facts.gamma > 0.0 => {
                    let beta = facts.alpha / facts.gamma;
                    (Some(1.0 - beta * a * (b - lo) / 2.0), Some(BoundKind::OrderReversing))
                }
                _ => (None, Some(BoundKind::OrderReversing)),
            }
        } else {
            (None, None)
        };

        let k_prev = kappa_opt(x, y);
        let k_next = kappa_opt(nx, ny);
        let ratio = match (k_prev, k_next) {
            (Some(p), Some(q)) if p > KAPPA_FLOOR => Some(q / p),
            _ => None,
        };
        let (bound, kind) = if ratio.is_some() { (bound, kind) } else { (None, None) };
        trace.records.push(PairStep { n, x: nx, y: ny, kappa: k_next, ratio, bound, b: facts.b, bound_kind: kind });
        x = nx;
        y = ny;
        if x == y {
            trace.termination = if x == 0.0 && facts.gamma < ZERO_MAP_THRESHOLD {
                Termination::Pinched
            } else {
                Termination::Merged
            };
            break;
        }
    }
    Ok(trace)
}

#[derive(Clone, Debug, Serialize)]
pub struct StepCheck {
    pub n: usize,
    pub ratio: f64,
    pub bound: f64,
    /// `1/(1 + beta eps^2)` when `min(x_{n-1}, y_{n-1}) >= eps`.
    pub uniform_factor: Option<f64>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Violation { step: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub beta: f64,
    pub eps: f64,
    pub tolerance: f64,
    pub checks: Vec<StepCheck>,
    /// `a kappa(x_0, y_0) prod_{k <= n} bound_k`, indexed by `n`; continued
    /// with the uniform factor past a merge.
    pub envelope: Vec<f64>,
    /// First `n` where the envelope drops below the tolerance.
    pub predicted_steps: Option<usize>,
    /// First `n` with `|x_n - y_n| < tolerance`.
    pub first_within: Option<usize>,
    pub verdict: Verdict,
}

/// Checks a trace against the monotone contraction bounds and derives the
/// geometric envelope on `|x_n - y_n|`.
pub fn convergence_certificate(trace: &OrbitPairTrace, beta: f64, eps: f64, tolerance: f64) -> Result<ConvergenceReport> {
    if !trace.records.iter().any(|r| r.bound.is_some()) {
        return Err(Error::MissingBounds);
    }
    let a = trace.endpoint;
    let uniform = 1.0 / (1.0 + beta * eps * eps);
    let mut checks = Vec::new();
    let mut verdict = Verdict::Consistent;
    let k0 = trace.records[0].kappa.unwrap_or(0.0);
    let mut envelope = vec![a * k0];

    for w in trace.records.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let fallback = if prev.x.min(prev.y) >= eps { uniform } else { 1.0 };
        let factor = cur.bound.unwrap_or(fallback);
        envelope.push(envelope.last().unwrap() * factor);
        let (Some(ratio), Some(bound)) = (cur.ratio, cur.bound) else {
            continue;
        };
        let uniform_factor = (prev.x.min(prev.y) >= eps).then_some(uniform);
        let ok = ratio <= bound + BOUND_SLACK && uniform_factor.is_none_or(|u| ratio <= u + BOUND_SLACK);
        if !ok && verdict == Verdict::Consistent {
            verdict = Verdict::Violation { step: cur.n };
        }
        checks.push(StepCheck { n: cur.n, ratio, bound, uniform_factor, ok });
    }

    // a merged pair stays merged; past the trace the uniform factor applies
    let last = trace.records.last().unwrap();
    if trace.termination == Termination::Merged && last.x.min(last.y) >= eps {
        while *envelope.last().unwrap() >= tolerance && envelope.len() < ENVELOPE_CAP {
            envelope.push(envelope.last().unwrap() * uniform);
        }
    }
    let predicted_steps = envelope.iter().position(|&e| e < tolerance);
    Ok(ConvergenceReport {
        beta,
        eps,
        tolerance,
        checks,
        envelope,
        predicted_steps,
        first_within: trace.first_within(tolerance),
        verdict,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FlipCheck {
    pub n: usize,
    pub ratio: f64,
    /// `1 - beta a (b_n - min(x_{n-1}, y_{n-1}))/2`
    pub bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum GuardVerdict {
    Holds,
    HypothesisViolated { n: usize, x: f64, y: f64, b: Option<f64> },
    FlipBoundViolated { n: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct GuardReport {
    pub beta: Option<f64>,
    pub steps_checked: usize,
    pub flips: Vec<FlipCheck>,
    pub verdict: GuardVerdict,
}

/// Verifies that both orbits stay below the isoclinic point of the next
/// map, and that every order-reversing step respects the normalized bound.
/// Never fails on a hypothesis violation; reports it instead.
pub fn isoclinic_guard(seq: &MapSequence, trace: &OrbitPairTrace) -> GuardReport {
    let a = seq.endpoint;
    let mut report = GuardReport { beta: seq.declared_beta, steps_checked: 0, flips: Vec::new(), verdict: GuardVerdict::Holds };
    for w in trace.records.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        report.steps_checked += 1;
        let hi = prev.x.max(prev.y);
        let lo = prev.x.min(prev.y);
        let below = match cur.b {
            Some(b) => hi < b || (b >= a && hi <= a),
            // zero map: everything collapses to 0
            None => true,
        };
        if !below {
            if report.verdict == GuardVerdict::Holds {
                report.verdict = GuardVerdict::HypothesisViolated { n: cur.n, x: prev.x, y: prev.y, b: cur.b };
            }
            continue;
        }
        if cur.bound_kind != Some(BoundKind::OrderReversing) {
            continue;
        }
        let (Some(ratio), Some(b)) = (cur.ratio, cur.b) else {
            continue;
        };
        let beta = match seq.declared_beta {
            Some(beta) => beta,
            None => {
                let c = certify(&seq.map(cur.n), 2048).ok();
                match c {
                    Some(c) if c.gamma > 0.0 => c.alpha_star / c.gamma,
                    _ => continue,
                }
            }
        };
        let bound = 1.0 - beta * a * (b - lo) / 2.0;
        let ok = ratio <= bound + BOUND_SLACK;
        if !ok && report.verdict == GuardVerdict::Holds {
            report.verdict = GuardVerdict::FlipBoundViolated { n: cur.n };
        }
        report.flips.push(FlipCheck { n: cur.n, ratio, bound, ok });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::MapSpec;

    fn logistic_half() -> MapSequence {
        let f = FiberMap::from_spec(MapSpec::LogisticScaled { k: 0.5 }, 1.0).unwrap();
        MapSequence::constant(f).with_beta(1.0)
    }

    #[test]
    fn logistic_contracts_to_positive_fixed_point() {
        let f = FiberMap::from_spec(MapSpec::LogisticScaled { k: 0.9 }, 1.0).unwrap();
        let seq = MapSequence::constant(f).with_beta(1.0);
        let t = iterate_pair(&seq, 0.2, 0.8, 60).unwrap();
        let gaps: Vec<f64> = t.records.iter().map(|r| (r.x - r.y).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        let kappas: Vec<f64> = t.records.iter().filter_map(|r| r.kappa).collect();
        assert!(kappas.windows(2).all(|w| w[1] <= w[0]));
        assert!(t.violations(BOUND_SLACK).is_empty());
        assert!(gaps.last().unwrap() < &1e-6);
    }

    #[test]
    fn pinched_sequence_collapses() {
        let f = FiberMap::from_spec(MapSpec::LogisticScaled { k: 1.0 }, 1.0).unwrap();
        let seq = MapSequence::from_fn(1.0, move |n| if n == 3 { FiberMap::zero(1.0) } else { f.clone() });
        let t = iterate_pair(&seq, 0.2, 0.7, 10).unwrap();
        assert_eq!(t.termination, Termination::Pinched);
        let last = t.records.last().unwrap();
        assert_eq!((last.n, last.x, last.y), (3, 0.0, 0.0));
    }

    #[test]
    fn equal_start_merges_immediately() {
        let t = iterate_pair(&logistic_half(), 0.5, 0.5, 10).unwrap();
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.termination, Termination::Merged);
        assert_eq!(t.records[0].kappa, Some(0.0));
    }

    #[test]
    fn zero_steps_gives_empty_trace() {
        let t = iterate_pair(&logistic_half(), 0.2, 0.5, 0).unwrap();
        assert!(t.records.is_empty());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,x,y,kappa,ratio,bound,b\n");
    }

    #[test]
    fn rejects_starts_outside_domain() {
        assert!(matches!(iterate_pair(&logistic_half(), 0.0, 0.5, 3), Err(Error::Domain(_))));
        assert!(matches!(iterate_pair(&logistic_half(), 0.2, 1.5, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn certificate_uniform_factor() {
        let t = iterate_pair(&logistic_half(), 0.2, 0.8, 5).unwrap();
        let r = convergence_certificate(&t, 1.0, 0.1, 1e-6).unwrap();
        let first = &r.checks[0];
        assert_eq!(first.uniform_factor, Some(1.0 / 1.01));
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn certificate_flags_injected_violation() {
        let mut t = iterate_pair(&logistic_half(), 0.2, 0.8, 5).unwrap();
        t.records[3].ratio = Some(t.records[3].bound.unwrap() + 0.1);
        let r = convergence_certificate(&t, 1.0, 0.1, 1e-6).unwrap();
        assert_eq!(r.verdict, Verdict::Violation { step: 3 });
    }

    #[test]
    fn certificate_needs_bounds() {
        let t = iterate_pair(&logistic_half(), 0.5, 0.5, 5).unwrap();
        assert!(matches!(convergence_certificate(&t, 1.0, 0.1, 1e-6), Err(Error::MissingBounds)));
    }

    #[test]
    fn guard_on_scaled_hump() {
        let g = FiberMap::from_spec(MapSpec::QuadraticHump { k: 2.4 }, 1.0).unwrap();
        let seq = MapSequence::constant(g).with_beta(1.0);
        let t = iterate_pair(&seq, 0.2, 0.6, 80).unwrap();
        let r = isoclinic_guard(&seq, &t);
        assert_eq!(r.verdict, GuardVerdict::Holds);
        assert!(!r.flips.is_empty());
        assert!(t.violations(BOUND_SLACK).is_empty());
        assert!((t.records.last().unwrap().x - t.records.last().unwrap().y).abs() < 1e-9);
    }

    #[test]
    fn guard_on_full_hump_reports_violation() {
        let g = FiberMap::from_spec(MapSpec::QuadraticHump { k: 4.0 }, 1.0).unwrap();
        let seq = MapSequence::constant(g).with_beta(1.0);
        let t = iterate_pair(&seq, 0.2, 0.3, 20).unwrap();
        let r = isoclinic_guard(&seq, &t);
        assert!(matches!(r.verdict, GuardVerdict::HypothesisViolated { .. }), "{:?}", r.verdict);
    }

    #[test]
    fn guard_passes_monotone_sequences() {
        let t = iterate_pair(&logistic_half(), 0.3, 1.0, 20).unwrap();
        let r = isoclinic_guard(&logistic_half(), &t);
        assert_eq!(r.verdict, GuardVerdict::Holds);
        assert!(r.flips.is_empty());
    }
}
