//! Bundled reproductions. Each prints the claim it checks and PASS/FAIL.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skewlab::attractor::{
    build_preinvariant, graph_match_frequency, pullback_grid, pullback_phi, pullback_table, verify_attractor,
    verify_preinvariance, GraphFunction, GraphRule, PullbackOptions,
};
use skewlab::base::{BasePoint, BaseSystem, ShiftPoint, Sided, Word};
use skewlab::catalog::{self, coinflip_canonical_graph, make_coinflip, make_product};
use skewlab::nonautonomous::{isoclinic_guard, iterate_pair, GuardVerdict, MapSequence};
use skewlab::{classify, BaseFn, Classification, MapSpec, Result};

struct Report {
    passed: bool,
}

impl Report {
    fn claim(&mut self, ok: bool, text: &str, detail: String) {
        println!("[{}] {text}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.passed &= ok;
    }
}

pub fn run(name: &str) -> Result<bool> {
    let entry = catalog::lookup(name)?;
    println!("{}: {}", entry.name, entry.doc);
    let mut r = Report { passed: true };
    match name {
        "noinvattr" => noinvattr(&mut r)?,
        "coinflip-one" => coinflip_one(&mut r)?,
        "coinflip-two" => coinflip_two(&mut r)?,
        "keller" => keller(&mut r)?,
        "product-hump" => product_hump(&mut r)?,
        _ => unreachable!("clap restricts names"),
    }
    Ok(r.passed)
}

fn noinvattr(r: &mut Report) -> Result<()> {
    let sys = catalog::make_noinvattr(catalog::DEFAULT_NOINVATTR_WINDOW)?;
    let BaseSystem::FiniteOrbit(b) = sys.base() else { unreachable!() };
    let t0 = BasePoint::Finite(b.noinvattr_index(0).expect("window"));
    let (_, x5) = sys.iterate(&t0, 0.5, 5)?;
    r.claim(1.0 - x5 < 1e-9, "forward orbit of (theta_0, 0.5) is within 1e-9 of 1 by step 5", format!("1 - x_5 = {:.3e}", 1.0 - x5));

    let s = pullback_phi(&sys, &t0, 40, None)?;
    let ok = s.values.iter().enumerate().all(|(i, v)| *v <= 0.5f64.powi(i as i32 + 1));
    r.claim(ok, "pullback phi_n(theta_0) <= 2^-n for n <= 40", format!("phi_40 = {:.3e}", s.last()));

    let graph = build_preinvariant(&sys, &[], 0)?;
    let v = verify_attractor(&sys, &graph, &[(t0.clone(), 0.5)], 5, 1e-9)?;
    let edge = BasePoint::Finite(b.noinvattr_index(-(catalog::DEFAULT_NOINVATTR_WINDOW as i64)).expect("window"));
    let inv = verify_preinvariance(&sys, &graph, &edge, 2 * catalog::DEFAULT_NOINVATTR_WINDOW + 2, 1e-9)?;
    let transient = inv.settled_from.unwrap_or(0);
    r.claim(
        v.attracting && transient > 0 && s.last() < 1e-9,
        "no invariant graph exists over the truncated base",
        format!(
            "an invariant graph would need phi(theta_0) <= 2^-n phi(theta_-n), i.e. 0, while fiber orbits over theta_0 \
             converge to 1; the attracting graph is only preinvariant (settles after {transient} steps from theta_-N)"
        ),
    );
    Ok(())
}

fn random_word<R: Rng>(rng: &mut R, len: usize) -> Word {
    let w: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
    Word::new(w, vec![rng.random_range(0..2)]).expect("binary symbols")
}

fn coinflip_one(r: &mut Report) -> Result<()> {
    let sys = make_coinflip(Sided::One)?;
    r.claim(!sys.base().is_invertible(), "one-sided shift is not invertible", "pullback unavailable".into());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let starts: Vec<(BasePoint, f64)> = (0..10_000)
        .map(|_| {
            let p = ShiftPoint::one_sided(random_word(&mut rng, 20));
            (BasePoint::Shift(p), rng.random_range(0..2) as f64)
        })
        .collect();
    let zero = GraphFunction::rule(GraphRule::Constant(0.0));
    let freq = graph_match_frequency(&sys, &zero, &starts, 20)?;
    r.claim(
        (freq - 0.5).abs() <= 0.05,
        "constant candidate graph matches the fiber at step 20 about half the time",
        format!("frequency {freq:.4} over 10^4 random words"),
    );
    Ok(())
}

fn coinflip_two(r: &mut Report) -> Result<()> {
    let sys = make_coinflip(Sided::Two)?;
    let mut starts = Vec::new();
    for len in 1..=10usize {
        for bits in 0..1u32 << len {
            let w: Vec<u8> = (0..len).map(|i| ((bits >> i) & 1) as u8).collect();
            let past: Vec<u8> = w.iter().rev().copied().collect();
            let p = ShiftPoint::two_sided(Word::new(past, vec![1])?, Word::new(w, vec![0])?);
            let y = 1.0 - p.past_symbol(0).unwrap_or(0) as f64;
            starts.push((BasePoint::Shift(p), y));
        }
    }
    let v = verify_attractor(&sys, &coinflip_canonical_graph(), &starts, 12, f64::MIN_POSITIVE)?;
    let ok = v.records.iter().all(|rec| rec.first_n == Some(1) && rec.max_deviation_after == Some(0.0));
    r.claim(
        ok,
        "phi(x) = x_-1 captures every start after one step",
        format!("{} words up to length 10, deviation exactly 0 from step 1", starts.len()),
    );
    Ok(())
}

fn keller(r: &mut Report) -> Result<()> {
    let sys = catalog::make_keller_default()?;
    let opts = PullbackOptions::default();
    let (grid, summary) = pullback_grid(&sys, 4096, &opts)?;
    r.claim(
        summary.nonmonotone_points == 0,
        "phi_n is nonincreasing in n at every grid node",
        format!("{} nodes, max delta {:.1e}", summary.points, summary.max_delta),
    );
    let seeds: Vec<BasePoint> = (0..1000).map(|i| BasePoint::Circle((i as f64 + 0.5) / 1000.0)).collect();
    let (table, _) = pullback_table(&sys, &seeds, 1, &opts)?;
    let mut worst = 0.0f64;
    for s in &seeds {
        worst = worst.max(verify_preinvariance(&sys, &table, s, 1, 1e-6)?.residuals[0]);
    }
    r.claim(worst < 1e-6, "converged pullback graph is invariant", format!("max residual {worst:.2e} at 10^3 nodes"));
    let frac = grid.positive_fraction();
    let side = if frac > 0.95 { "near 1" } else if frac < 0.05 { "near 0" } else { "in between" };
    r.claim(
        !(0.05..=0.95).contains(&frac),
        "positive-fraction statistic falls on one side of the dichotomy",
        format!("{frac:.4} ({side}); observed, not a theorem"),
    );
    Ok(())
}

fn product_hump(r: &mut Report) -> Result<()> {
    let sys = (catalog::lookup("product-hump")?.config)().build()?;
    let got = classify(&sys, 32, 2048).classification;
    r.claim(
        got == Classification::IsoclinicEquiconcave,
        "0.6 * 4x(1-x) stays below its isoclinic point 2/3",
        format!("classified {got:?}"),
    );
    let theta = BasePoint::Circle(0.0);
    let seq = MapSequence::along_orbit(&sys, &theta, 200)?;
    let t = iterate_pair(&seq, 0.1, 0.55, 200)?;
    let g = isoclinic_guard(&seq, &t);
    let merged = t.first_within(1e-9);
    r.claim(
        g.verdict == GuardVerdict::Holds && merged.is_some(),
        "orbits converge with every order-reversing step inside its bound",
        format!("{} flip steps, within 1e-9 at step {merged:?}", g.flips.len()),
    );
    let base = sys.base().clone();
    let full = make_product(MapSpec::QuadraticHump { k: 4.0 }, BaseFn::Constant { c: 1.0 }, base, 1.0)?;
    r.claim(
        full.declared() == Classification::Unclassified,
        "unscaled 4x(1-x) is not classified",
        "range reaches 1 > 2/3".into(),
    );
    let seq = MapSequence::along_orbit(&full, &theta, 20)?;
    let g = isoclinic_guard(&seq, &iterate_pair(&seq, 0.2, 0.3, 20)?);
    r.claim(
        matches!(g.verdict, GuardVerdict::HypothesisViolated { .. }),
        "guard reports the violated isoclinic hypothesis",
        format!("{:?}", g.verdict),
    );
    Ok(())
}

