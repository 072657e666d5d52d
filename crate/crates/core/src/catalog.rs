//! Ready-made systems: the truncated non-invertible example, the coin-flip
//! model, Keller-type circle systems, and general products.

use serde_json::json;

use crate::attractor::{GraphFunction, GraphRule};
use crate::base::{BaseSystem, Sided};
use crate::config::{AnalysisDefaults, BaseConfig, SystemConfig};
use crate::error::{Error, Result};
use crate::fiber::FiberMap;
use crate::registry::{BaseFn, MapSpec};
use crate::skew::{classify, Classification, FiberFamily, SkewSystem};

pub const GOLDEN_MEAN: f64 = 0.618_033_988_749_894_9;
pub const DEFAULT_NOINVATTR_WINDOW: usize = 64;
pub const KELLER_DEFAULT_C: f64 = 1.0;
pub const KELLER_DEFAULT_EPS: f64 = 0.5;
const CLASSIFY_SAMPLES: usize = 32;
const CLASSIFY_GRID: usize = 2048;

pub fn noinvattr_config(window: usize) -> SystemConfig {
    SystemConfig {
        name: format!("noinvattr-{window}"),
        base: BaseConfig::NoinvattrWindow { window },
        fiber: FiberFamily::Product {
            f: MapSpec::LogisticScaled { k: 1.0 },
            g: BaseFn::Step { threshold: 0.0, below: 0.25, above: 1.0 },
        },
        endpoint: 1.0,
        classification: Some(Classification::MonotoneEquiconcave),
        analysis: AnalysisDefaults::default(),
    }
}

/// `x(2-x)` over base points with label `>= 0` and `x(2-x)/4` below, on
/// `[0, 1]`.
pub fn make_noinvattr(window: usize) -> Result<SkewSystem> {
    noinvattr_config(window).build()
}

pub fn coinflip_config(sided: Sided) -> SystemConfig {
    SystemConfig {
        name: match sided {
            Sided::One => "coinflip-one".into(),
            Sided::Two => "coinflip-two".into(),
        },
        base: BaseConfig::Shift { two_sided: sided == Sided::Two },
        fiber: FiberFamily::CoinFlip,
        endpoint: 1.0,
        classification: Some(Classification::Unclassified),
        analysis: AnalysisDefaults::default(),
    }
}

pub fn make_coinflip(sided: Sided) -> Result<SkewSystem> {
    coinflip_config(sided).build()
}

/// `phi(x) = x_{-1}`, the exact attractor of the two-sided coin model.
pub fn coinflip_canonical_graph() -> GraphFunction {
    GraphFunction::rule(GraphRule::PastSymbol)
}

fn scale_base_fn(g: &BaseFn, factor: f64) -> BaseFn {
    match g {
        BaseFn::Constant { c } => BaseFn::Constant { c: c * factor },
        BaseFn::SinSquared { c, eps } => BaseFn::SinSquared { c: c * factor, eps: *eps },
        BaseFn::Step { threshold, below, above } => BaseFn::Step {
            threshold: *threshold,
            below: below * factor,
            above: above * factor,
        },
    }
}

fn derive_classification(sys: &SkewSystem) -> Classification {
    classify(sys, CLASSIFY_SAMPLES, CLASSIFY_GRID).classification
}

pub fn keller_config(p: MapSpec, q: BaseFn, omega: f64, endpoint: f64) -> Result<SystemConfig> {
    p.validate(endpoint)?;
    q.validate()?;
    let p_sup = FiberMap::from_spec(p.clone(), endpoint)?.sup_on_grid(4096);
    let top = p_sup * q.sup();
    let q = if top > endpoint { scale_base_fn(&q, endpoint / top) } else { q };
    let mut cfg = SystemConfig {
        name: "keller".into(),
        base: BaseConfig::Circle { omega },
        fiber: FiberFamily::Product { f: p, g: q },
        endpoint,
        classification: None,
        analysis: AnalysisDefaults::default(),
    };
    let sys = cfg.build()?;
    cfg.classification = Some(sys.declared());
    Ok(cfg)
}

/// Circle rotation by `omega` with `psi_theta(x) = p(x) q(theta)`; `q` is
/// scaled down when needed so the range stays inside `[0, a]`.
pub fn make_keller(p: MapSpec, q: BaseFn, omega: f64) -> Result<SkewSystem> {
    keller_config(p, q, omega, 1.0)?.build()
}

pub fn keller_default_config() -> SystemConfig {
    keller_with(KELLER_DEFAULT_C, KELLER_DEFAULT_EPS).expect("default parameters are valid")
}

/// Default Keller system with modulation `c (eps + (1 - eps) sin^2(pi theta))`.
pub fn keller_with(c: f64, eps: f64) -> Result<SystemConfig> {
    keller_config(MapSpec::LogisticScaled { k: 1.0 }, BaseFn::SinSquared { c, eps }, GOLDEN_MEAN, 1.0)
}

pub fn make_keller_default() -> Result<SkewSystem> {
    keller_default_config().build()
}

/// `psi(theta, x) = f(x) g(theta)` over any base, with `g` divided by its
/// supremum when that exceeds 1. The classification is derived.
pub fn make_product(f: MapSpec, g: BaseFn, base: BaseSystem, endpoint: f64) -> Result<SkewSystem> {
    f.validate(endpoint)?;
    g.validate()?;
    let g = if g.sup() > 1.0 { scale_base_fn(&g, 1.0 / g.sup()) } else { g };
    let sys = SkewSystem::new("product", base, FiberFamily::Product { f, g }, endpoint, Classification::Unclassified)?;
    let class = derive_classification(&sys);
    SkewSystem::new("product", sys.base().clone(), sys.family().clone(), endpoint, class)
}

pub fn product_hump_config() -> SystemConfig {
    SystemConfig {
        name: "product-hump".into(),
        base: BaseConfig::Circle { omega: GOLDEN_MEAN },
        fiber: FiberFamily::Product {
            f: MapSpec::QuadraticHump { k: 4.0 },
            g: BaseFn::Constant { c: 0.6 },
        },
        endpoint: 1.0,
        classification: Some(Classification::IsoclinicEquiconcave),
        analysis: AnalysisDefaults::default(),
    }
}

pub struct CatalogEntry {
    pub name: &'static str,
    pub doc: &'static str,
    pub params: serde_json::Value,
    pub config: fn() -> SystemConfig,
}

impl CatalogEntry {
    pub fn build(&self) -> Result<SkewSystem> {
        (self.config)().build()
    }
}

pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "noinvattr",
            doc: "Truncated orbit between two fixed points; x(2-x) on the right, x(2-x)/4 on the left. \
                  No invariant graph exists over the full base.",
            params: json!({ "window": DEFAULT_NOINVATTR_WINDOW }),
            config: || noinvattr_config(DEFAULT_NOINVATTR_WINDOW),
        },
        CatalogEntry {
            name: "coinflip-one",
            doc: "One-sided coin shift with fiber value set to the current symbol.",
            params: json!({ "two_sided": false }),
            config: || coinflip_config(Sided::One),
        },
        CatalogEntry {
            name: "coinflip-two",
            doc: "Two-sided coin shift; the graph of the previous symbol is an exact attractor.",
            params: json!({ "two_sided": true }),
            config: || coinflip_config(Sided::Two),
        },
        CatalogEntry {
            name: "keller",
            doc: "Golden-mean rotation with psi(theta, x) = x(2-x) c (eps + (1-eps) sin^2(pi theta)).",
            params: json!({ "c": KELLER_DEFAULT_C, "eps": KELLER_DEFAULT_EPS, "omega": GOLDEN_MEAN }),
            config: keller_default_config,
        },
        CatalogEntry {
            name: "product-hump",
            doc: "4x(1-x) scaled by 0.6: range stays below the isoclinic point 2/3.",
            params: json!({ "k": 4.0, "c": 0.6 }),
            config: product_hump_config,
        },
    ]
}

pub fn lookup(name: &str) -> Result<CatalogEntry> {
    entries().into_iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = entries().iter().map(|e| e.name).collect();
        Error::Registry(format!("unknown catalog entry {name:?}; known: {}", names.join(", ")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BasePoint;

    #[test]
    fn noinvattr_fiber_values() {
        let sys = make_noinvattr(4).unwrap();
        let BaseSystem::FiniteOrbit(b) = sys.base() else { panic!() };
        let right = BasePoint::Finite(b.index_of(0.5).unwrap());
        let left = BasePoint::Finite(b.index_of(-1.5).unwrap());
        assert_eq!(sys.apply(&right, 0.5), 0.75);
        assert_eq!(sys.apply(&left, 0.5), 0.1875);
    }

    #[test]
    fn every_entry_matches_its_classification() {
        for e in entries() {
            let sys = e.build().unwrap();
            let got = classify(&sys, CLASSIFY_SAMPLES, CLASSIFY_GRID).classification;
            assert_eq!(got, sys.declared(), "{}", e.name);
        }
    }

    #[test]
    fn product_examples() {
        let base = || BaseSystem::circle(GOLDEN_MEAN).unwrap();
        let hump = || MapSpec::QuadraticHump { k: 4.0 };
        let s = make_product(hump(), BaseFn::Constant { c: 0.6 }, base(), 1.0).unwrap();
        assert_eq!(s.declared(), Classification::IsoclinicEquiconcave);
        let s = make_product(hump(), BaseFn::Constant { c: 1.0 }, base(), 1.0).unwrap();
        assert_eq!(s.declared(), Classification::Unclassified);
        let s = make_product(
            MapSpec::TanhLike { scale: 1.0, rate: 2.0 },
            BaseFn::SinSquared { c: 1.0, eps: 0.2 },
            base(),
            1.0,
        )
        .unwrap();
        assert_eq!(s.declared(), Classification::MonotoneEquiconcave);
    }

    #[test]
    fn keller_examples() {
        let s = make_keller(MapSpec::LogisticScaled { k: 1.0 }, BaseFn::Constant { c: 1.0 }, 0.3).unwrap();
        assert_eq!(s.apply(&BasePoint::Circle(0.7), 0.5), 0.75);
        let s = make_keller(MapSpec::LogisticScaled { k: 1.0 }, BaseFn::SinSquared { c: 1.0, eps: 0.0 }, 0.3).unwrap();
        assert!(s.fiber_map(&BasePoint::Circle(0.0)).is_zero_on_grid(1024));
        assert!(!s.fiber_map(&BasePoint::Circle(0.1)).is_zero_on_grid(1024));
        // oversized modulation is scaled back into range
        let s = make_keller(MapSpec::LogisticScaled { k: 1.0 }, BaseFn::Constant { c: 3.0 }, 0.3).unwrap();
        assert!((s.apply(&BasePoint::Circle(0.0), 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coinflip_invertibility() {
        assert!(!make_coinflip(Sided::One).unwrap().base().is_invertible());
        assert!(make_coinflip(Sided::Two).unwrap().base().is_invertible());
        assert!(lookup("nope").is_err());
    }
}
