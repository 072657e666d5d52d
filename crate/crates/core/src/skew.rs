//! The skew product `F(theta, x) = (R(theta), psi_theta(x))`, its
//! classification as an equiconcave system, and pinching detection.

use serde::{Deserialize, Serialize};

use crate::base::{BasePoint, BaseSystem};
use crate::error::{Error, Result};
use crate::fiber::{certify, FiberMap, ZERO_MAP_THRESHOLD};
use crate::registry::{BaseFn, MapSpec};

/// Fiber family `theta -> psi_theta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FiberFamily {
    /// The same map over every base point.
    Uniform { map: MapSpec },
    /// `psi(theta, x) = f(x) g(coordinate(theta))`.
    Product { f: MapSpec, g: BaseFn },
    /// Two-point fiber `{0, 1}`: every fiber value is sent to the current
    /// symbol `x_0` of the base word. Not concave; analysis is disabled.
    CoinFlip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    MonotoneEquiconcave,
    IsoclinicEquiconcave,
    Unclassified,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewSystem {
    name: String,
    base: BaseSystem,
    family: FiberFamily,
    endpoint: f64,
    declared: Classification,
}

impl SkewSystem {
    pub fn new(
        name: impl Into<String>,
        base: BaseSystem,
        family: FiberFamily,
        endpoint: f64,
        declared: Classification,
    ) -> Result<Self> {
        if !(endpoint > 0.0 && endpoint.is_finite()) {
            return Err(Error::domain(format!("domain endpoint must be positive, got {endpoint}")));
        }
        match &family {
            FiberFamily::Uniform { map } => map.validate(endpoint)?,
            FiberFamily::Product { f, g } => {
                f.validate(endpoint)?;
                g.validate()?;
                let f_sup = FiberMap::from_spec(f.clone(), endpoint)?.sup_on_grid(4096);
                if f_sup * g.sup() > endpoint * (1.0 + 1e-12) {
                    return Err(Error::Registry(format!(
                        "product range sup(f) sup(g) = {} exceeds a = {endpoint}",
                        f_sup * g.sup()
                    )));
                }
            }
            FiberFamily::CoinFlip => {
                if !matches!(base, BaseSystem::Shift { .. }) || endpoint != 1.0 {
                    return Err(Error::Registry("coin-flip fibers need a shift base and a = 1".into()));
                }
            }
        }
        Ok(Self { name: name.into(), base, family, endpoint, declared })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &BaseSystem {
        &self.base
    }

    pub fn family(&self) -> &FiberFamily {
        &self.family
    }

    pub fn endpoint(&self) -> f64 {
        self.endpoint
    }

    pub fn declared(&self) -> Classification {
        self.declared
    }

    /// False for families outside the concave interval theory.
    pub fn analyzable(&self) -> bool {
        !matches!(self.family, FiberFamily::CoinFlip)
    }

    /// `psi_theta(x)` without materializing a [`FiberMap`].
    #[inline]
    pub fn apply(&self, theta: &BasePoint, x: f64) -> f64 {
        match &self.family {
            FiberFamily::Uniform { map } => map.eval(x),
            FiberFamily::Product { f, g } => f.eval(x) * g.eval(self.base.coordinate(theta)),
            FiberFamily::CoinFlip => match theta {
                BasePoint::Shift(s) => s.symbol(0) as f64,
                _ => 0.0,
            },
        }
    }

    pub fn fiber_map(&self, theta: &BasePoint) -> FiberMap {
        let a = self.endpoint;
        match &self.family {
            FiberFamily::Uniform { map } => {
                let m = map.clone();
                FiberMap::from_fn(a, map.describe(), move |x| m.eval(x))
            }
            FiberFamily::Product { f, g } => {
                let c = g.eval(self.base.coordinate(theta));
                let m = f.clone();
                FiberMap::from_fn(a, format!("{c}*({})", f.describe()), move |x| c * m.eval(x))
            }
            FiberFamily::CoinFlip => {
                let v = self.apply(theta, 0.0);
                FiberMap::from_fn(a, format!("const {v}"), move |_| v)
            }
        }
    }

    /// One application of `F`.
    pub fn step(&self, theta: &BasePoint, x: f64) -> Result<(BasePoint, f64)> {
        if !(0.0..=self.endpoint).contains(&x) {
            return Err(Error::domain(format!("fiber coordinate {x} outside [0, {}]", self.endpoint)));
        }
        let next = self.base.successor(theta)?;
        Ok((next, self.apply(theta, x)))
    }

    /// `F^n(theta, x)`.
    pub fn iterate(&self, theta: &BasePoint, x: f64, n: usize) -> Result<(BasePoint, f64)> {
        let mut state = (theta.clone(), x);
        for _ in 0..n {
            state = self.step(&state.0, state.1)?;
        }
        Ok(state)
    }

    /// `theta, R(theta), ..., R^n(theta)`.
    pub fn base_orbit(&self, theta: &BasePoint, n: usize) -> Result<Vec<BasePoint>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(theta.clone());
        for i in 0..n {
            let next = self.base.successor(&out[i])?;
            out.push(next);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyReport {
    pub classification: Classification,
    /// `min alpha*/gamma` over sampled nonzero maps.
    pub beta: Option<f64>,
    pub samples: usize,
    pub zero_maps: usize,
    pub all_monotone: bool,
    pub diagnostics: Vec<String>,
}

/// Certifies sampled fiber maps and decides which equiconcave class the
/// samples support.
pub fn classify(sys: &SkewSystem, sample_count: usize, grid_size: usize) -> ClassifyReport {
    let mut report = ClassifyReport {
        classification: Classification::Unclassified,
        beta: None,
        samples: 0,
        zero_maps: 0,
        all_monotone: true,
        diagnostics: Vec::new(),
    };
    if !sys.analyzable() {
        report.diagnostics.push("fiber family is outside the concave interval setting".into());
        return report;
    }
    let points = sys.base.sample_points(sample_count.max(1), 0x5eed);
    let mut range_ok = true;
    let mut range_notes = Vec::new();
    let mut equiconcave = true;

    for theta in &points {
        report.samples += 1;
        let key = sys.base.key(theta);
        let cert = match certify(&sys.fiber_map(theta), grid_size) {
            Ok(c) => c,
            Err(e) => {
                report.diagnostics.push(format!("psi at {key}: {e}"));
                return report;
            }
        };
        report.all_monotone &= cert.monotone;
        if cert.gamma < ZERO_MAP_THRESHOLD {
            report.zero_maps += 1;
            continue;
        }
        if cert.alpha_star <= 0.0 {
            equiconcave = false;
            report.diagnostics.push(format!("psi at {key} is not strictly concave on the grid"));
            continue;
        }
        let beta = cert.alpha_star / cert.gamma;
        report.beta = Some(report.beta.map_or(beta, |b: f64| b.min(beta)));

        if range_ok {
            let next = match sys.base.successor(theta) {
                Ok(p) => p,
                Err(e) => {
                    report.diagnostics.push(format!("successor of {key}: {e}"));
                    return report;
                }
            };
            // The zero map sends everything to 0; treat its isoclinic point as a.
            let next_b = match certify(&sys.fiber_map(&next), grid_size) {
                Ok(c) => c.isoclinic_point.or((c.gamma < ZERO_MAP_THRESHOLD).then_some(sys.endpoint)),
                Err(_) => None,
            };
            match next_b {
                Some(b) if cert.gamma < b => {}
                Some(b) => {
                    range_ok = false;
                    range_notes.push(format!(
                        "range of psi at {key} reaches {} >= isoclinic point {b} of the next map",
                        cert.gamma
                    ));
                }
                None => {
                    range_ok = false;
                    range_notes.push(format!("isoclinic point after {key} is undefined"));
                }
            }
        }
    }

    if !report.all_monotone {
        report.diagnostics.extend(range_notes);
    }
    report.classification = if !equiconcave {
        Classification::Unclassified
    } else if report.all_monotone {
        Classification::MonotoneEquiconcave
    } else if range_ok {
        Classification::IsoclinicEquiconcave
    } else {
        Classification::Unclassified
    };
    report
}

#[derive(Clone, Debug, Serialize)]
pub struct PinchingReport {
    pub theta: String,
    pub horizon: usize,
    /// Every `n` in `1..=horizon` with `psi_{R^n(theta)}` identically zero.
    pub zero_steps: Vec<usize>,
    pub verdict: String,
}

pub fn detect_pinching(
    sys: &SkewSystem,
    theta: &BasePoint,
    horizon: usize,
    grid_size: usize,
) -> Result<PinchingReport> {
    let orbit = sys.base_orbit(theta, horizon)?;
    let zero_steps: Vec<usize> = (1..=horizon)
        .filter(|&n| sys.fiber_map(&orbit[n]).is_zero_on_grid(grid_size))
        .collect();
    let verdict = if zero_steps.is_empty() {
        "no pinching observed within horizon".to_string()
    } else {
        format!("{} zero fiber maps within horizon", zero_steps.len())
    };
    Ok(PinchingReport { theta: sys.base.key(theta), horizon, zero_steps, verdict })
}
