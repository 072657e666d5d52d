//! Single-map analysis on `[0, a]`: the relative gap `kappa`, grid
//! certification of alpha-concavity, one-sided derivatives, the isoclinic
//! point, and the two contraction-ratio inequalities.

use serde::Serialize;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::registry::MapSpec;

/// Absolute tolerance for `f(0) = 0` and for the range check.
pub const ORIGIN_TOL: f64 = 1e-12;
/// Slack on the discrete second derivative when testing concavity.
pub const CONCAVITY_SLACK: f64 = 1e-9;
/// Maximum grid value below which a map counts as identically zero.
pub const ZERO_MAP_THRESHOLD: f64 = 1e-12;
/// Slack in the strict isoclinic predicate.
pub const ISOCLINIC_SLACK: f64 = 1e-12;
pub const ISOCLINIC_BISECTION_DEPTH: usize = 60;
pub const ISOCLINIC_SCAN: usize = 4096;

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A map of `[0, a]` into itself with `f(0) = 0`.
///
/// Invariants are checked lazily on a grid (see [`FiberMap::validate`]) since
/// the evaluator may be an arbitrary closure.
#[derive(Clone)]
pub struct FiberMap {
    endpoint: f64,
    eval: Evaluator,
    label: String,
}

impl fmt::Debug for FiberMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiberMap")
            .field("endpoint", &self.endpoint)
            .field("label", &self.label)
            .finish()
    }
}

impl FiberMap {
    pub fn from_spec(spec: MapSpec, endpoint: f64) -> Result<Self> {
        spec.validate(endpoint)?;
        let label = spec.describe();
        Ok(Self {
            endpoint,
            eval: Arc::new(move |x| spec.eval(x)),
            label,
        })
    }

    pub fn from_fn(
        endpoint: f64,
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            endpoint,
            eval: Arc::new(f),
            label: label.into(),
        }
    }

    pub fn zero(endpoint: f64) -> Self {
        Self::from_fn(endpoint, "0", |_| 0.0)
    }

    /// `c * f`, sharing the underlying evaluator.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = Arc::clone(&self.eval);
        Self {
            endpoint: self.endpoint,
            eval: Arc::new(move |x| c * inner(x)),
            label: format!("{c}*({})", self.label),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn endpoint(&self) -> f64 {
        self.endpoint
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn grid_values(&self, grid_size: usize) -> Vec<f64> {
        let h = self.endpoint / grid_size as f64;
        (0..=grid_size).map(|i| self.eval(i as f64 * h)).collect()
    }

    /// Checks `f(0) = 0` and `0 <= f(x) <= a` on a uniform grid.
    pub fn validate(&self, grid_size: usize) -> Result<()> {
        let values = self.grid_values(grid_size);
        check_values(&values, self.endpoint)
    }

    /// True when the map is identically zero on the grid.
    pub fn is_zero_on_grid(&self, grid_size: usize) -> bool {
        let h = self.endpoint / grid_size as f64;
        (0..=grid_size).all(|i| self.eval(i as f64 * h).abs() < ZERO_MAP_THRESHOLD)
    }

    /// Nondecreasing on the grid.
    pub fn is_monotone_on_grid(&self, grid_size: usize) -> bool {
        is_nondecreasing(&self.grid_values(grid_size))
    }

    pub fn sup_on_grid(&self, grid_size: usize) -> f64 {
        self.grid_values(grid_size).into_iter().fold(0.0, f64::max)
    }
}

fn check_values(values: &[f64], a: f64) -> Result<()> {
    let h = a / (values.len() - 1) as f64;
    if values[0].abs() > ORIGIN_TOL {
        return Err(Error::Invariant(format!("f(0) = {} is not 0", values[0])));
    }
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() || *v < -ORIGIN_TOL || *v > a + ORIGIN_TOL {
            return Err(Error::Invariant(format!(
                "f({}) = {v} lies outside [0, {a}]",
                i as f64 * h
            )));
        }
    }
    Ok(())
}

fn is_nondecreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] - 1e-15)
}

/// Relative gap `|v - u| / min(u, v)` of two positive reals.
pub fn kappa(u: f64, v: f64) -> Result<f64> {
    if !(u > 0.0 && v > 0.0) {
        return Err(Error::domain(format!("kappa needs u, v > 0 (got {u}, {v})")));
    }
    Ok((v - u).abs() / u.min(v))
}

/// Result of grid certification of alpha-concavity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcavityCertificate {
    pub alpha_star: f64,
    pub gamma: f64,
    pub peak_point: f64,
    /// `None` when the isoclinic point is undefined: the zero map, or a
    /// nonmonotone map without strict concavity.
    pub isoclinic_point: Option<f64>,
    pub grid_size: usize,
    pub monotone: bool,
}

/// Discrete second derivatives `(f(x-h) - 2f(x) + f(x+h)) / h^2` at the
/// interior grid points.
pub fn second_derivative_estimates(f: &FiberMap, grid_size: usize) -> Vec<f64> {
    let values = f.grid_values(grid_size);
    let h = f.endpoint / grid_size as f64;
    let h2 = h * h;
    values
        .windows(3)
        .map(|w| (w[0] - 2.0 * w[1] + w[2]) / h2)
        .collect()
}

/// Grid test for concavity of `f + alpha x^2`: every discrete second
/// derivative of `f` plus `2 alpha` is at most `slack`.
pub fn passes_concavity_test(f: &FiberMap, alpha: f64, grid_size: usize, slack: f64) -> bool {
    second_derivative_estimates(f, grid_size)
        .into_iter()
        .all(|d| d + 2.0 * alpha <= slack)
}

pub fn certify(f: &FiberMap, grid_size: usize) -> Result<ConcavityCertificate> {
    if grid_size < 8 {
        return Err(Error::domain(format!("grid size must be >= 8, got {grid_size}")));
    }
    let a = f.endpoint;
    let values = f.grid_values(grid_size);
    check_values(&values, a)?;
    let h = a / grid_size as f64;
    let h2 = h * h;

    let alpha_star = values
        .windows(3)
        .map(|w| -(w[0] - 2.0 * w[1] + w[2]) / h2 / 2.0)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);

    let (peak_idx, gamma) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    let gamma = gamma.max(0.0);
    let peak_point = peak_idx as f64 * h;
    let monotone = is_nondecreasing(&values);

    let isoclinic = if gamma < ZERO_MAP_THRESHOLD {
        None
    } else if monotone {
        Some(a)
    } else if alpha_star > 0.0 {
        Some(isoclinic_point(f, 1e-10)?)
    } else {
        None
    };

    Ok(ConcavityCertificate {
        alpha_star,
        gamma,
        peak_point,
        isoclinic_point: isoclinic,
        grid_size,
        monotone,
    })
}

/// Backward difference quotient `(f(x) - f(x - h)) / h`.
pub fn left_derivative(f: &FiberMap, x: f64, h: f64) -> Result<f64> {
    if !(x > 0.0 && x <= f.endpoint * (1.0 + 1e-15)) {
        return Err(Error::domain(format!("x = {x} outside (0, {}]", f.endpoint)));
    }
    if !(h > 0.0 && h < x) {
        return Err(Error::domain(format!("step h = {h} must satisfy 0 < h < x = {x}")));
    }
    Ok((f.eval(x) - f.eval(x - h)) / h)
}

/// Left derivative estimate from the geometric schedule
/// `h0 = min(a / 10^4, x / 2)`, ratio 1/4, six steps; the last quotient.
pub fn left_derivative_limit(f: &FiberMap, x: f64) -> Result<f64> {
    let mut h = (f.endpoint / 1e4).min(x / 2.0);
    let mut last = left_derivative(f, x, h)?;
    for _ in 1..6 {
        h /= 4.0;
        last = left_derivative(f, x, h)?;
    }
    Ok(last)
}

fn isoclinic_predicate(f: &FiberMap, x: f64) -> Result<bool> {
    let slope = left_derivative_limit(f, x)?;
    Ok(slope.abs() + ISOCLINIC_SLACK < f.eval(x) / x)
}

/// `sup { x : |f'_-(x)| < f(x)/x }`, located by a coarse scan and then
/// bisection on the last sign change of the predicate.
pub fn isoclinic_point(f: &FiberMap, tol: f64) -> Result<f64> {
    let a = f.endpoint;
    let values = f.grid_values(ISOCLINIC_SCAN);
    if values.iter().all(|v| v.abs() < ZERO_MAP_THRESHOLD) {
        return Err(Error::Undefined(
            "isoclinic point of the zero map (f(b) > 0 impossible)".into(),
        ));
    }
    if is_nondecreasing(&values) {
        return Ok(a);
    }

    let h = a / ISOCLINIC_SCAN as f64;
    let mut last_true = None;
    for i in 1..=ISOCLINIC_SCAN {
        if isoclinic_predicate(f, i as f64 * h)? {
            last_true = Some(i);
        }
    }
    let i = last_true.ok_or_else(|| {
        Error::Undefined("isoclinic predicate never holds; map is not strictly concave".into())
    })?;
    if i == ISOCLINIC_SCAN {
        return Ok(a);
    }

    let (mut lo, mut hi) = (i as f64 * h, (i + 1) as f64 * h);
    for _ in 0..ISOCLINIC_BISECTION_DEPTH {
        if hi - lo < tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if isoclinic_predicate(f, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A contraction ratio `kappa(f(x), f(y)) / kappa(x, y)` with the bound the
/// corresponding lemma places on it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioBound {
    pub ratio: f64,
    pub bound: f64,
}

impl RatioBound {
    pub fn respected(&self, slack: f64) -> bool {
        self.ratio <= self.bound + slack
    }
}

/// Ratio bound when `f` keeps the order of `x < y`:
/// `ratio <= f(y) / (f(y) + alpha y^2)`.
pub fn ratio_bound_monotone(f: &FiberMap, alpha: f64, x: f64, y: f64) -> Result<RatioBound> {
    if !(alpha >= 0.0) {
        return Err(Error::precondition(format!("alpha >= 0 fails (alpha = {alpha})")));
    }
    if !(0.0 < x && x < y && y <= f.endpoint) {
        return Err(Error::precondition(format!(
            "0 < x < y <= a fails (x = {x}, y = {y}, a = {})",
            f.endpoint
        )));
    }
    let (fx, fy) = (f.eval(x), f.eval(y));
    if !(0.0 < fx && fx < fy) {
        return Err(Error::precondition(format!("0 < f(x) < f(y) fails (f(x) = {fx}, f(y) = {fy})")));
    }
    let ratio = kappa(fx, fy)? / kappa(x, y)?;
    let bound = fy / (fy + alpha * y * y);
    Ok(RatioBound { ratio, bound })
}

/// Ratio bound when `f` reverses the order of `x < y < b`:
/// `ratio < 1 - alpha b (b - x) / f(b)`.
pub fn ratio_bound_nonmonotone(
    f: &FiberMap,
    alpha: f64,
    b: f64,
    x: f64,
    y: f64,
) -> Result<RatioBound> {
    if !(alpha > 0.0) {
        return Err(Error::precondition(format!("alpha > 0 fails (alpha = {alpha})")));
    }
    if !(0.0 < x && x < y && y < b && b <= f.endpoint) {
        return Err(Error::precondition(format!(
            "0 < x < y < b <= a fails (x = {x}, y = {y}, b = {b})"
        )));
    }
    let (fx, fy, fb) = (f.eval(x), f.eval(y), f.eval(b));
    if !(0.0 < fy && fy < fx) {
        return Err(Error::precondition(format!("0 < f(y) < f(x) fails (f(x) = {fx}, f(y) = {fy})")));
    }
    if !(fb > 0.0) {
        return Err(Error::precondition(format!("f(b) > 0 fails (f(b) = {fb})")));
    }
    let ratio = kappa(fx, fy)? / kappa(x, y)?;
    let bound = 1.0 - alpha * b * (b - x) / fb;
    Ok(RatioBound { ratio, bound })
}
