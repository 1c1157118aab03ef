//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the PASS/FAIL lines are always printed; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use herzscope::verify::families::seeded_bump;
use herzscope::verify::{
    ball_lower_constant, check_atom_decay, check_main_theorem, check_sobolev_exponent, fit_izuki, holder_battery,
    split_equivalence, subadditivity_battery, DecayOptions, FamilySelection, TheoremSetup, DEFAULT_DRIFT_CAP,
};
use herzscope::{
    luxemburg_norm, make_central_atom, make_exponent, verify_atom, Descriptor, Exponent, ExponentMode, Grid,
    GridFunction, HerzParams, RieszOperator,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn lebesgue(d: Descriptor<f64>, g: &Grid<f64>) -> Exponent<f64> {
    make_exponent(d, g, ExponentMode::Lebesgue).unwrap()
}

fn herz(d: Descriptor<f64>, g: &Grid<f64>) -> Exponent<f64> {
    make_exponent(d, g, ExponentMode::Herz).unwrap()
}

fn constant(v: f64) -> Descriptor<f64> {
    Descriptor::Constant { value: v }
}

fn seeded_wave(g: Grid<f64>, seed: u64) -> GridFunction<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (k, c, w) = (rng.gen_range(0.5..6.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.2..3.0));
    GridFunction::from_fn(g, |[x, _]| ((k * x).sin() + c) * (-(x / w) * (x / w)).exp()).unwrap()
}

fn luxemburg_oracle() -> Outcome {
    let g = Grid::new(1, -4, 3, 4096).unwrap();
    let mut worst: f64 = 0.0;
    for p in [1.5, 2.0, 3.0] {
        let e = Exponent::constant(p, &g, ExponentMode::Lebesgue).unwrap();
        for seed in 0..20 {
            let f = seeded_wave(g, seed);
            let direct = (g.cell_volume() * f.values().iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p);
            let got = luxemburg_norm(&f, &e, 1e-10).unwrap().value;
            worst = worst.max((got - direct).abs() / direct);
        }
    }
    outcome(worst <= 1e-8, format!("max rel err {worst:.3e} over 60 functions (bound 1e-8)"))
}

fn holder() -> Outcome {
    let g = Grid::new(1, -4, 3, 1024).unwrap();
    let exps = [
        ("constant", constant(2.5)),
        ("log_radial", Descriptor::LogRadial { a: 1.5, b: 1.0 }),
        ("two_level", Descriptor::TwoLevel { inner: 3.0, outer: 1.5, radius: 1.0, width: 0.5 }),
    ];
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for (i, (_, d)) in exps.iter().enumerate() {
        let p = lebesgue(d.clone(), &g);
        let b = holder_battery(&p, 100, 100 * i as u64, 1e-10).unwrap();
        violations += b.violations;
        worst = worst.max(b.max_ratio);
    }
    outcome(violations == 0, format!("{violations} violations in 300 pairs, max lhs/rhs {worst:.4}"))
}

fn izuki() -> Outcome {
    let g = Grid::new(1, -5, 3, 4096).unwrap();
    let c2 = fit_izuki(&Exponent::constant(2.0, &g, ExponentMode::Lebesgue).unwrap()).unwrap();
    let c3 = fit_izuki(&Exponent::constant(3.0, &g, ExponentMode::Lebesgue).unwrap()).unwrap();
    let lr = fit_izuki(&lebesgue(Descriptor::LogRadial { a: 2.0, b: 1.0 }, &g)).unwrap();
    let deltas_ok = (c2.delta1 - 0.5).abs() <= 0.01 && (c2.delta2 - 0.5).abs() <= 0.01;
    let dual_ok = [&c2, &c3].iter().all(|f| (f.c_duality - 1.0).abs() <= 0.01 && (f.c_duality_min - 1.0).abs() <= 0.01);
    let lr_ok = lr.holds_on_all_pairs() && lr.c1 <= 3.0 && lr.c2 <= 3.0;
    outcome(
        deltas_ok && dual_ok && lr_ok,
        format!(
            "p=2: delta1 {:.6} delta2 {:.6} duality {:.6}; log-radial: c1 {:.4} c2 {:.4} on {} pairs",
            c2.delta1, c2.delta2, c2.c_duality, lr.c1, lr.c2, lr.pair_count
        ),
    )
}

fn riesz_oracle() -> Outcome {
    let g = Grid::new(1, -4, 3, 4096).unwrap();
    let op = RieszOperator::new(&g, 0.5).unwrap();
    let chi = GridFunction::from_fn(g, |[x, _]: [f64; 2]| if x.abs() <= 1.0 { 1.0 } else { 0.0 }).unwrap();
    let fft = op.apply_fft(&chi, 2).unwrap();
    let direct = op.apply_direct(&chi).unwrap();
    // int_{-1}^{1} |x - y|^{-1/2} dy
    let exact = |x: f64| {
        let a = x.abs();
        if a <= 1.0 {
            2.0 * ((1.0 + a).sqrt() + (1.0 - a).sqrt())
        } else {
            2.0 * ((a + 1.0).sqrt() - (a - 1.0).sqrt())
        }
    };
    let mut oracle_err: f64 = 0.0;
    for (i, v) in fft.values().iter().enumerate() {
        let e = exact(g.center(i)[0]);
        oracle_err = oracle_err.max((v - e).abs() / e);
    }
    let scale = direct.max_abs();
    let agree = direct.values().iter().zip(fft.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
    let cs: Vec<f64> = (-2..=2).map(|j| ball_lower_constant(&op, &g, j).unwrap()).collect();
    let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    let spread = hi / lo - 1.0;
    outcome(
        oracle_err <= 1e-3 && agree <= 1e-10 && spread < 0.2,
        format!("oracle rel err {oracle_err:.3e}, direct/fft {agree:.3e}, ball constant spread {spread:.4}"),
    )
}

fn atom_suite() -> Outcome {
    let g1 = Grid::new(1, -4, 3, 2048).unwrap();
    let g2 = Grid::new(2, -3, 3, 128).unwrap();
    let mut failures = 0;
    let mut worst_moment: f64 = 0.0;
    let mut deterministic = true;
    for i in 0..20u64 {
        let g = if i < 14 { &g1 } else { &g2 };
        let r = -2 + (i % 5) as i32;
        let s = (i % 3) as u32;
        let p = if i % 2 == 0 {
            Exponent::constant(2.0, g, ExponentMode::Lebesgue).unwrap()
        } else {
            lebesgue(Descriptor::LogRadial { a: 1.5, b: 1.0 }, g)
        };
        let a = herz(Descriptor::LogRadial { a: 0.5, b: 0.5 }, g);
        let atom = make_central_atom(g, r, &p, &a, s, 31 * i).unwrap();
        let rep = verify_atom(&atom, &p, &a).unwrap();
        failures += usize::from(!rep.passed());
        worst_moment = worst_moment.max(rep.max_moment_residual);
        let again = make_central_atom(g, r, &p, &a, s, 31 * i).unwrap();
        deterministic &= serde_json::to_vec(&atom).unwrap() == serde_json::to_vec(&again).unwrap();
    }
    outcome(
        failures == 0 && worst_moment <= 1e-8 && deterministic,
        format!("{failures} failing atoms of 20, max moment residual {worst_moment:.3e}, byte-identical rebuilds {deterministic}"),
    )
}

fn calibration_grid() -> Grid<f64> {
    Grid::new(1, -5, 3, 2048).unwrap()
}

fn atom_decay() -> Outcome {
    let g = calibration_grid();
    let p1 = Exponent::constant(2.0, &g, ExponentMode::Lebesgue).unwrap();
    let alpha = Exponent::constant(1.0, &g, ExponentMode::Herz).unwrap();
    let p2 = check_sobolev_exponent(&p1, 0.25).unwrap();
    let fit = fit_izuki(&p1).unwrap();
    let mut worst_slope = f64::NEG_INFINITY;
    let mut bound = 0.0;
    let mut all = true;
    for j in g.l_min() + 1..=g.l_max() - 2 {
        let r = check_atom_decay(j, 0.25, &p1, &p2, &alpha, &fit, &DecayOptions { seed: (40 + j) as u64, ..Default::default() })
            .unwrap();
        all &= r.slope_ok && r.flat_ok;
        worst_slope = worst_slope.max(r.slope);
        bound = r.slope_bound + r.slope_tol;
    }
    outcome(all, format!("max fitted slope {worst_slope:.4} (bound {bound:.4}), flat bound held for all j"))
}

fn main_theorem() -> Outcome {
    let setup = TheoremSetup {
        grid: calibration_grid(),
        p1: constant(2.0),
        alpha: constant(1.0),
        beta: 0.25,
        q1: 1.0,
        q2: 1.0,
        lambda: 0.25,
        seed: 2024,
        family: FamilySelection::default(),
        drift_cap: DEFAULT_DRIFT_CAP,
        refine: true,
    };
    let rep = check_main_theorem(&setup).unwrap();
    let fine = rep.fine.as_ref().unwrap();
    outcome(
        rep.passed() && rep.coarse.members.len() >= 30,
        format!(
            "{} members, sup R {:.5} at 2048 / {:.5} at 4096, drift {:.4} (cap 0.15), scale dev {:.2e}",
            rep.coarse.members.len(),
            rep.coarse.sup,
            fine.sup,
            rep.drift.unwrap(),
            rep.coarse.scale_deviation.max(fine.scale_deviation)
        ),
    )
}

fn subadditivity() -> Outcome {
    let mut violations = 0;
    for (i, q) in [0.3, 0.5, 1.0].into_iter().enumerate() {
        violations += subadditivity_battery(1000, q, 11 + i as u64).unwrap();
    }
    outcome(violations == 0, format!("{violations} violations in 3000 lists"))
}

fn split_equivalence_check() -> Outcome {
    let fit_on = |g: &Grid<f64>, alpha: Descriptor<f64>| {
        let hp = HerzParams::new(herz(alpha, g), Exponent::constant(2.0, g, ExponentMode::Lebesgue).unwrap(), 1.0, 0.25)
            .unwrap();
        let fs: Vec<GridFunction<f64>> = (0..30).map(|i| seeded_bump(g, i, 900 + i as u64).unwrap()).collect();
        split_equivalence(&fs, &hp).unwrap()
    };
    let g = Grid::new(1, -5, 3, 2048).unwrap();
    let flat = fit_on(&g, constant(0.8));
    let flat_dev = (flat.max_ratio - 1.0).abs().max((flat.min_ratio - 1.0).abs());
    let lr = Descriptor::LogRadial { a: 1.0, b: 1.0 };
    let k = fit_on(&g, lr.clone()).k;
    let k_fine = fit_on(&g.refined(2).unwrap(), lr).k;
    let drift = (k_fine / k - 1.0).abs();
    outcome(
        flat_dev <= 1e-10 && k.is_finite() && drift < 0.1,
        format!("constant alpha dev {flat_dev:.2e}; log-radial K {k:.5} -> {k_fine:.5}, drift {drift:.4}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 9] = [
        ("luxemburg norm oracle", luxemburg_oracle, 5),
        ("generalized Hoelder inequality", holder, 10),
        ("ball-ratio exponent fit", izuki, 20),
        ("Riesz potential oracle", riesz_oracle, 30),
        ("central atom suite", atom_suite, 20),
        ("atom decay", atom_decay, 60),
        ("main theorem ratio stability", main_theorem, 600),
        ("q-subadditivity", subadditivity, 2),
        ("Herz split equivalence", split_equivalence_check, 60),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(budget);
        let pass = out.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "{} criterion {}: {name}: {} [{:.2} s of {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
