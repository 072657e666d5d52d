//! Closed-form fiber maps and base modulation functions.
//!
//! Every concrete map the library ships is expressed through [`MapSpec`]
//! (functions of the fiber coordinate) and [`BaseFn`] (scalar functions of
//! a base-point coordinate). Both serialize with a `kind` tag so system
//! configurations stay diffable.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

const RANGE_SLACK: f64 = 1e-12;
const VALIDATION_GRID: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapSpec {
    /// `c[0] + c[1] x + c[2] x^2 + ...`; `c[0]` must be zero.
    Poly { coeffs: Vec<f64> },
    /// `k x (2 - x)`
    LogisticScaled { k: f64 },
    /// `k x (1 - x)`
    QuadraticHump { k: f64 },
    /// `scale * tanh(rate * x)`, bounded increasing and strictly concave.
    TanhLike { scale: f64, rate: f64 },
}

impl MapSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            MapSpec::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            MapSpec::LogisticScaled { k } => k * x * (2.0 - x),
            MapSpec::QuadraticHump { k } => k * x * (1.0 - x),
            MapSpec::TanhLike { scale, rate } => scale * (rate * x).tanh(),
        }
    }

    /// Registry name, as used in configuration files.
    pub fn name(&self) -> &'static str {
        match self {
            MapSpec::Poly { .. } => "poly",
            MapSpec::LogisticScaled { .. } => "logistic-scaled",
            MapSpec::QuadraticHump { .. } => "quadratic-hump",
            MapSpec::TanhLike { .. } => "tanh-like",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            MapSpec::Poly { coeffs } => {
                let terms: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(i, c)| match i {
                        0 => format!("{c}"),
                        1 => format!("{c}*x"),
                        _ => format!("{c}*x^{i}"),
                    })
                    .collect();
                if terms.is_empty() {
                    "0".to_string()
                } else {
                    terms.join(" + ")
                }
            }
            MapSpec::LogisticScaled { k } => format!("{k}*x*(2-x)"),
            MapSpec::QuadraticHump { k } => format!("{k}*x*(1-x)"),
            MapSpec::TanhLike { scale, rate } => format!("{scale}*tanh({rate}*x)"),
        }
    }

    /// Largest alpha for which `f + alpha x^2` is concave on `[0, a]`,
    /// when it is available in closed form.
    pub fn analytic_alpha(&self, a: f64) -> Option<f64> {
        match self {
            MapSpec::LogisticScaled { k } | MapSpec::QuadraticHump { k } => Some(k.max(0.0)),
            MapSpec::Poly { coeffs } if coeffs.len() <= 4 => {
                // f'' is affine for degree <= 3, so its max sits at an endpoint
                let c2 = coeffs.get(2).copied().unwrap_or(0.0);
                let c3 = coeffs.get(3).copied().unwrap_or(0.0);
                let second = |x: f64| 2.0 * c2 + 6.0 * c3 * x;
                let worst = second(0.0).max(second(a));
                Some((-worst / 2.0).max(0.0))
            }
            _ => None,
        }
    }

    /// Checks the parameter domain: `f(0) = 0` and `0 <= f <= a` on `[0, a]`.
    pub fn validate(&self, a: f64) -> Result<()> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Registry(format!("domain endpoint must be positive, got {a}")));
        }
        match self {
            MapSpec::Poly { coeffs } => {
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Registry("poly: non-finite coefficient".into()));
                }
                if coeffs.first().copied().unwrap_or(0.0) != 0.0 {
                    return Err(Error::Registry("poly: constant coefficient must be 0".into()));
                }
            }
            MapSpec::LogisticScaled { k } | MapSpec::QuadraticHump { k } => {
                if !k.is_finite() || *k < 0.0 {
                    return Err(Error::Registry(format!("{}: k must be >= 0, got {k}", self.name())));
                }
            }
            MapSpec::TanhLike { scale, rate } => {
                if !(scale.is_finite() && rate.is_finite() && *scale >= 0.0 && *rate > 0.0) {
                    return Err(Error::Registry(
                        "tanh-like: need scale >= 0 and rate > 0".into(),
                    ));
                }
            }
        }
        check_range(|x| self.eval(x), a).map_err(|e| Error::Registry(format!("{}: {e}", self.name())))
    }
}

pub(crate) fn check_range(f: impl Fn(f64) -> f64, a: f64) -> std::result::Result<(), String> {
    let h = a / VALIDATION_GRID as f64;
    for i in 0..=VALIDATION_GRID {
        let x = i as f64 * h;
        let v = f(x);
        if !v.is_finite() || v < -RANGE_SLACK || v > a + RANGE_SLACK {
            return Err(format!("value {v} at x = {x} leaves [0, {a}]"));
        }
    }
    Ok(())
}

/// Scalar modulation `g(theta)` used by product fiber families
/// `psi(theta, x) = f(x) g(theta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaseFn {
    Constant { c: f64 },
    /// `c (eps + (1 - eps) sin^2(pi theta))`
    SinSquared { c: f64, eps: f64 },
    /// `below` for `theta < threshold`, `above` otherwise.
    Step { threshold: f64, below: f64, above: f64 },
}

impl BaseFn {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            BaseFn::Constant { c } => *c,
            BaseFn::SinSquared { c, eps } => {
                let s = (PI * theta).sin();
                c * (eps + (1.0 - eps) * s * s)
            }
            BaseFn::Step { threshold, below, above } => {
                if theta < *threshold {
                    *below
                } else {
                    *above
                }
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            BaseFn::Constant { c } => *c,
            BaseFn::SinSquared { c, eps } => c * eps.max(1.0),
            BaseFn::Step { below, above, .. } => below.max(*above),
        }
    }

    pub fn inf(&self) -> f64 {
        match self {
            BaseFn::Constant { c } => *c,
            BaseFn::SinSquared { c, eps } => c * eps.min(1.0),
            BaseFn::Step { below, above, .. } => below.min(*above),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            BaseFn::Constant { c } => c.is_finite(),
            BaseFn::SinSquared { c, eps } => c.is_finite() && (0.0..=1.0).contains(eps),
            BaseFn::Step { threshold, below, above } => {
                threshold.is_finite() && below.is_finite() && above.is_finite()
            }
        };
        if !ok || self.inf() < 0.0 {
            return Err(Error::Registry(format!("invalid modulation {self:?}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_horner_matches_direct_sum() {
        let spec = MapSpec::Poly { coeffs: vec![0.0, 1.5, -0.5, 0.25] };
        let x: f64 = 0.3;
        let direct = 1.5 * x - 0.5 * x * x + 0.25 * x.powi(3);
        assert!((spec.eval(x) - direct).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonzero_constant_term() {
        let spec = MapSpec::Poly { coeffs: vec![0.1, 0.5] };
        assert!(matches!(spec.validate(1.0), Err(Error::Registry(_))));
    }

    #[test]
    fn rejects_range_overflow() {
        assert!(MapSpec::QuadraticHump { k: 4.5 }.validate(1.0).is_err());
        assert!(MapSpec::QuadraticHump { k: 4.0 }.validate(1.0).is_ok());
        assert!(MapSpec::LogisticScaled { k: 1.0 }.validate(1.0).is_ok());
    }

    #[test]
    fn analytic_alpha_for_cubic_uses_worst_endpoint() {
        // f'' = -1 - 3x on [0,1], weakest concavity at x = 0
        let spec = MapSpec::Poly { coeffs: vec![0.0, 2.0, -0.5, -0.5] };
        assert_eq!(spec.analytic_alpha(1.0), Some(0.5));
    }

    #[test]
    fn sin_squared_bounds() {
        let g = BaseFn::SinSquared { c: 1.0, eps: 0.5 };
        assert_eq!(g.eval(0.0), 0.5);
        assert!((g.eval(0.5) - 1.0).abs() < 1e-15);
        assert_eq!(g.sup(), 1.0);
        assert_eq!(g.inf(), 0.5);
    }
}
