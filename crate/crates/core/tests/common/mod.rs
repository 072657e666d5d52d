#![allow(dead_code)]

use rand::Rng;
use skewlab::FiberMap;

/// A random strictly concave map with an alpha it is known to satisfy.
pub struct ConcaveSample {
    pub map: FiberMap,
    pub alpha: f64,
}

/// `p = p_ratio a`, `f = s (lam x (p - x) + (1 - lam)(1 - exp(-r x)))`, scaled so that
/// `max f = top`. `f + s lam x^2` is concave, so `alpha = s lam` is valid.
pub fn concave_map(a: f64, lam: f64, p_ratio: f64, r: f64, top: f64) -> ConcaveSample {
    let p = p_ratio * a;
    let h = move |x: f64| lam * x * (p - x) + (1.0 - lam) * (1.0 - (-r * x).exp());
    let n = 8192;
    let hmax = (0..=n).map(|i| h(a * i as f64 / n as f64)).fold(0.0, f64::max);
    let s = top / hmax;
    let map = FiberMap::from_fn(a, "random concave", move |x| s * h(x));
    ConcaveSample { map, alpha: s * lam }
}

pub fn random_concave<R: Rng>(rng: &mut R, a: f64) -> ConcaveSample {
    let lam = rng.random_range(0.2..=1.0);
    let p = rng.random_range(1.0..3.0);
    let r = rng.random_range(0.5..5.0);
    let top = a * rng.random_range(0.2..0.999);
    concave_map(a, lam, p, r, top)
}

/// Peak strictly inside `(0, a)`: `p < 2a` and a dominant quadratic part.
pub fn random_hump<R: Rng>(rng: &mut R, a: f64) -> ConcaveSample {
    let lam = rng.random_range(0.85..=1.0);
    let p = rng.random_range(1.0..1.3);
    let r = rng.random_range(0.5..2.0);
    let top = a * rng.random_range(0.3..0.999);
    concave_map(a, lam, p, r, top)
}

/// `c (lam x(2 - x) + (1 - lam)(3x - x^3)/2)` on `[0, 1]`: increasing,
/// `gamma = c`, `alpha = c lam`, so the family is `lam`-equiconcave.
pub fn monotone_member(c: f64, lam: f64) -> FiberMap {
    FiberMap::from_fn(1.0, format!("{c}*mix({lam})"), move |x| {
        c * (lam * x * (2.0 - x) + (1.0 - lam) * (3.0 * x - x * x * x) / 2.0)
    })
}

pub fn hump(k: f64) -> FiberMap {
    FiberMap::from_fn(1.0, format!("{k}*x*(1-x)"), move |x| k * x * (1.0 - x))
}
