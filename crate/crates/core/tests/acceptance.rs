//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skewlab::attractor::{
    build_preinvariant, graph_match_frequency, pullback_grid, pullback_phi, pullback_table, uniqueness_probe,
    verify_attractor, verify_preinvariance, GraphFunction, GraphRule, PullbackOptions,
};
use skewlab::base::{BasePoint, BaseSystem, ShiftPoint, Sided, Word};
use skewlab::catalog::{coinflip_canonical_graph, make_coinflip, make_keller_default, make_noinvattr};
use skewlab::fiber::{certify, isoclinic_point, kappa, ratio_bound_monotone, ratio_bound_nonmonotone};
use skewlab::nonautonomous::{
    convergence_certificate, isoclinic_guard, iterate_pair, GuardVerdict, MapSequence, Verdict, BOUND_SLACK,
};
use skewlab::{FiberMap, MapSpec};

use common::{hump, monotone_member, random_concave, random_hump};

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn kappa_algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let u: f64 = rng.random_range(1e-6..1e6);
        let v: f64 = rng.random_range(1e-6..1e6);
        let c = 2f64.powi(rng.random_range(-30..30));
        let k = kappa(u, v).unwrap();
        if kappa(v, u).unwrap() != k || kappa(u, u).unwrap() != 0.0 || kappa(c * u, c * v).unwrap() != k {
            return Err(format!("identity failed at u = {u}, v = {v}, c = {c}"));
        }
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(1), format!("10^4 pairs exact in {t:?}"), format!("too slow: {t:?}"))
}

fn concavity_certification() -> Outcome {
    let logistic = FiberMap::from_spec(MapSpec::LogisticScaled { k: 1.0 }, 1.0).unwrap();
    let hump4 = FiberMap::from_spec(MapSpec::QuadraticHump { k: 4.0 }, 1.0).unwrap();
    let a1 = certify(&logistic, 10_000).unwrap().alpha_star;
    let a4 = certify(&hump4, 10_000).unwrap().alpha_star;
    check(
        (a1 - 1.0).abs() <= 1e-3 && (a4 - 4.0).abs() <= 4e-3,
        format!("alpha*(x(2-x)) = {a1:.6}, alpha*(4x(1-x)) = {a4:.6}"),
        format!("alpha* off: {a1}, {a4}"),
    )
}

fn isoclinic() -> Outcome {
    let b = isoclinic_point(&hump(4.0), 1e-12).unwrap();
    if (b - 2.0 / 3.0).abs() > 1e-6 {
        return Err(format!("b(4x(1-x)) = {b}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    for _ in 0..500 {
        let a = rng.random_range(0.5..3.0);
        let m = random_concave(&mut rng, a);
        let b = certify(&m.map, 2048).unwrap().isoclinic_point.unwrap();
        worst = worst.min(b / a);
        if b < a / 2.0 - 1e-6 {
            return Err(format!("b = {b} < a/2 with a = {a}"));
        }
    }
    Ok(format!("b(4x(1-x)) = {b:.9}; min b/a over 500 maps = {worst:.4}"))
}

fn lemma_increasing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut done, mut worst) = (0, f64::NEG_INFINITY);
    while done < 1000 {
        let m = random_concave(&mut rng, 1.0);
        let peak = certify(&m.map, 2048).unwrap().peak_point;
        let x = rng.random_range(1e-4..peak.max(2e-4));
        let y = rng.random_range(x..=peak.max(x + 1e-6));
        if !(x < y && m.map.eval(x) < m.map.eval(y)) {
            continue;
        }
        let alpha = m.alpha * rng.random_range(0.0..=1.0);
        let rb = ratio_bound_monotone(&m.map, alpha, x, y).unwrap();
        worst = worst.max(rb.ratio - rb.bound);
        if !rb.respected(1e-9) {
            return Err(format!("violation {rb:?} at x = {x}, y = {y}"));
        }
        done += 1;
    }
    Ok(format!("1000 instances, max(ratio - bound) = {worst:.3e}"))
}

fn lemma_decreasing() -> Outcome {
    let f = hump(4.0);
    let b = isoclinic_point(&f, 1e-12).unwrap();
    let rb = ratio_bound_nonmonotone(&f, 4.0, b, 0.45, 0.66).unwrap();
    if (rb.ratio - 0.2206).abs() > 1e-4 || (rb.bound - 0.35).abs() > 1e-4 {
        return Err(format!("reference instance gave {rb:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    while done < 1000 {
        let m = random_hump(&mut rng, 1.0);
        let c = certify(&m.map, 2048).unwrap();
        let Some(b) = c.isoclinic_point else { continue };
        if c.monotone {
            continue;
        }
        let y = c.peak_point + rng.random_range(0.001..0.999) * (b - c.peak_point);
        let x = c.peak_point * rng.random_range(0.3..1.0);
        if !(x < y && y < b && m.map.eval(y) < m.map.eval(x)) {
            continue;
        }
        let rb = ratio_bound_nonmonotone(&m.map, m.alpha, b, x, y).unwrap();
        if !(rb.ratio < rb.bound) {
            return Err(format!("violation {rb:?} at x = {x}, y = {y}, b = {b}"));
        }
        done += 1;
    }
    Ok(format!("reference ratio {:.4} vs bound {:.4}; 1000 random instances strict", rb.ratio, rb.bound))
}

fn monotone_sequences() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_margin = usize::MAX;
    for trial in 0..100 {
        let lam = rng.random_range(0.3..=1.0);
        let cs: Vec<f64> = (0..400).map(|_| rng.random_range(0.85..=1.0)).collect();
        let seq = MapSequence::from_fn(1.0, move |n| monotone_member(cs[n % cs.len()], lam)).with_beta(lam);
        let (x0, y0) = (rng.random_range(0.1..1.0), rng.random_range(0.1..1.0));
        let t = iterate_pair(&seq, x0, y0, 400).unwrap();
        if t.records.iter().any(|r| r.x.min(r.y) < 0.1) {
            return Err(format!("trial {trial}: orbit left [0.1, 1]"));
        }
        let report = convergence_certificate(&t, lam, 0.1, 1e-6).unwrap();
        if report.verdict != Verdict::Consistent {
            return Err(format!("trial {trial}: {:?}", report.verdict));
        }
        let (Some(hit), Some(predicted)) = (report.first_within, report.predicted_steps) else {
            return Err(format!("trial {trial}: tolerance not reached"));
        };
        if hit > predicted {
            return Err(format!("trial {trial}: reached at {hit}, bound predicted {predicted}"));
        }
        worst_margin = worst_margin.min(predicted - hit);
        let ks: Vec<f64> = t.records[..=hit].iter().filter_map(|r| r.kappa).collect();
        if !ks.windows(2).all(|w| w[1] < w[0]) {
            return Err(format!("trial {trial}: kappa not strictly decreasing"));
        }
    }
    let t = start.elapsed();
    check(
        t < Duration::from_secs(10),
        format!("100 sequences converge inside the product bound (min slack {worst_margin} steps) in {t:?}"),
        format!("too slow: {t:?}"),
    )
}

fn nonmonotone_sequences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut flips = 0;
    for trial in 0..50 {
        let cs: Vec<f64> = (0..300).map(|_| rng.random_range(0.5..0.65)).collect();
        let seq = MapSequence::from_fn(1.0, move |n| hump(4.0 * cs[n % cs.len()])).with_beta(4.0);
        let (x0, y0) = (rng.random_range(0.05..0.65), rng.random_range(0.05..0.65));
        let t = iterate_pair(&seq, x0, y0, 300).unwrap();
        let g = isoclinic_guard(&seq, &t);
        if g.verdict != GuardVerdict::Holds {
            return Err(format!("trial {trial}: {:?}", g.verdict));
        }
        if !t.violations(BOUND_SLACK).is_empty() || t.first_within(1e-6).is_none() {
            return Err(format!("trial {trial}: no convergence or bound violation"));
        }
        flips += g.flips.len();
    }
    let full = MapSequence::constant(hump(4.0)).with_beta(4.0);
    let t = iterate_pair(&full, 0.2, 0.3, 20).unwrap();
    let g = isoclinic_guard(&full, &t);
    check(
        matches!(g.verdict, GuardVerdict::HypothesisViolated { .. }),
        format!("50 scaled sequences converge, {flips} flip steps within bound; 4x(1-x) flagged"),
        format!("unscaled hump not flagged: {:?}", g.verdict),
    )
}

fn noinvattr() -> Outcome {
    let sys = make_noinvattr(64).unwrap();
    let BaseSystem::FiniteOrbit(b) = sys.base() else { unreachable!() };
    let t0 = BasePoint::Finite(b.noinvattr_index(0).unwrap());
    let (_, x5) = sys.iterate(&t0, 0.5, 5).unwrap();
    if !(1.0 - x5 < 1e-9) {
        return Err(format!("x_5 = {x5}"));
    }
    let series = pullback_phi(&sys, &t0, 40, None).unwrap();
    if let Some(n) = (1..=40).find(|&n| series.values[n - 1] > 2f64.powi(-(n as i32))) {
        return Err(format!("phi_{n}(theta_0) = {} exceeds 2^-{n}", series.values[n - 1]));
    }
    // the pullback graph vanishes on the orbit yet forward orbits go to 1:
    // no graph is both invariant and attracting
    let graph = build_preinvariant(&sys, &[], 0).unwrap();
    let v = verify_attractor(&sys, &graph, &[(t0.clone(), 0.5)], 5, 1e-9).unwrap();
    let left_edge = BasePoint::Finite(b.noinvattr_index(-64).unwrap());
    let inv = verify_preinvariance(&sys, &graph, &left_edge, 130, 1e-9).unwrap();
    check(
        v.attracting && series.last() < 1e-12 && inv.settled_from.is_some_and(|n| n > 0),
        format!("1 - x_5 = {:.2e}; phi_40(theta_0) = {:.2e} <= 2^-40; attractor is not invariant", 1.0 - x5, series.last()),
        "preinvariant graph did not attract (theta_0, 0.5)".into(),
    )
}

fn words_up_to(len: usize) -> Vec<Vec<u8>> {
    (1..=len)
        .flat_map(|l| (0..1u32 << l).map(move |bits| (0..l).map(|i| ((bits >> i) & 1) as u8).collect()))
        .collect()
}

fn coinflip() -> Outcome {
    let two = make_coinflip(Sided::Two).unwrap();
    let graph = coinflip_canonical_graph();
    let mut starts = Vec::new();
    for w in words_up_to(10) {
        let mut past = w.clone();
        past.reverse();
        let p = ShiftPoint::two_sided(Word::new(past, vec![1]).unwrap(), Word::new(w, vec![0]).unwrap());
        let off_graph = 1.0 - p.past_symbol(0).unwrap() as f64;
        starts.push((BasePoint::Shift(p), off_graph));
    }
    let v = verify_attractor(&two, &graph, &starts, 12, f64::MIN_POSITIVE).unwrap();
    let exact = v.records.iter().all(|r| r.first_n == Some(1) && r.max_deviation_after == Some(0.0));
    if !exact {
        return Err("some two-sided start not captured exactly at N = 1".into());
    }
    let one = make_coinflip(Sided::One).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let random: Vec<(BasePoint, f64)> = (0..10_000)
        .map(|_| {
            let w: Vec<u8> = (0..20).map(|_| rng.random_range(0..2)).collect();
            let block = vec![rng.random_range(0..2)];
            (BasePoint::Shift(ShiftPoint::one_sided(Word::new(w, block).unwrap())), rng.random_range(0..2) as f64)
        })
        .collect();
    let freq = graph_match_frequency(&one, &GraphFunction::rule(GraphRule::Constant(0.0)), &random, 20).unwrap();
    check(
        (freq - 0.5).abs() <= 0.05,
        format!("{} two-sided starts exact at N = 1; one-sided match frequency {freq:.4}", starts.len()),
        format!("one-sided match frequency {freq}"),
    )
}

fn keller_pullback() -> Outcome {
    let sys = make_keller_default().unwrap();
    let opts = PullbackOptions::default();
    let (grid, summary) = pullback_grid(&sys, 1024, &opts).unwrap();
    if summary.nonmonotone_points > 0 {
        return Err(format!("{} grid nodes with increasing phi_n", summary.nonmonotone_points));
    }
    let seeds: Vec<BasePoint> = (0..1000).map(|i| BasePoint::Circle((i as f64 + 0.5) / 1000.0)).collect();
    let (table, tsum) = pullback_table(&sys, &seeds, 1, &opts).unwrap();
    let mut worst = 0.0f64;
    for s in &seeds {
        let r = verify_preinvariance(&sys, &table, s, 1, 1e-6).unwrap();
        worst = worst.max(r.residuals[0]);
        if r.settled_from != Some(0) {
            return Err(format!("residual {} at {s:?}", r.residuals[0]));
        }
    }
    let frac = grid.positive_fraction();
    check(
        !(0.05..=0.95).contains(&frac),
        format!(
            "phi_n nonincreasing on 1024 nodes; max residual {worst:.2e} (max delta {:.1e}); positive fraction {frac:.3}",
            tsum.max_delta
        ),
        format!("positive fraction {frac} is neither near 0 nor near 1"),
    )
}

fn uniqueness() -> Outcome {
    let sys = make_keller_default().unwrap();
    let seeds: Vec<BasePoint> = (0..100).map(|i| BasePoint::Circle((i as f64 * 0.377).fract())).collect();
    let shallow = PullbackOptions { depth: 500, stop: None };
    let deep = PullbackOptions { depth: 1000, stop: None };
    let horizon = 20;
    let (g1, _) = pullback_table(&sys, &seeds, horizon, &shallow).unwrap();
    let (g2, _) = pullback_table(&sys, &seeds, horizon, &deep).unwrap();
    let r = uniqueness_probe(&sys, &g1, &g2, &seeds, horizon, 1e-6).unwrap();
    let worst = r.orbits.iter().map(|o| o.tail_max_gap).fold(0.0, f64::max);
    check(
        r.flagged == 0,
        format!("depth 500 vs 1000 agree on 100 orbits, max tail gap {worst:.2e}"),
        format!("{} orbits flagged", r.flagged),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("kappa algebra", kappa_algebra),
        ("concavity certification", concavity_certification),
        ("isoclinic point", isoclinic),
        ("order-preserving ratio bound", lemma_increasing),
        ("order-reversing ratio bound", lemma_decreasing),
        ("monotone equiconcave convergence", monotone_sequences),
        ("nonmonotone convergence below isoclinic point", nonmonotone_sequences),
        ("truncated non-invertible example", noinvattr),
        ("coin-flip model", coinflip),
        ("pullback and preinvariance", keller_pullback),
        ("uniqueness probe", uniqueness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{t:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{t:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
