use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::decay::{check_atom_decay, DecayOptions, DEFAULT_SLOPE_TOL};
use super::estimates::{
    ball_lower_constant, check_sobolev_exponent, holder_battery, split_equivalence, subadditivity_battery,
};
use super::families::seeded_bump;
use super::izuki::{fit_izuki, IzukiFit};
use super::report::VerificationReport;
use super::theorem::{run_ratio_experiment, validate_hypotheses, TheoremSetup};
use crate::error::{Error, Result};
use crate::exponents::{make_exponent, Exponent, ExponentMode};
use crate::grid::{GridFunction, Grid};
use crate::herz::HerzParams;
use crate::operators::RieszOperator;
use crate::scalar::{lit, Real};

/// Upper cap on the ball duality product.
pub const DEFAULT_DUALITY_CAP: f64 = 10.0;
/// Largest allowed spread `max C_j / min C_j - 1` of the ball lower-bound constants.
pub const BALL_CONSTANT_SPREAD: f64 = 0.2;
/// Largest allowed relative drift of the split-equivalence constant.
pub const SPLIT_DRIFT_CAP: f64 = 0.1;

/// The full verification battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct SuiteConfig<T> {
    pub theorem: TheoremSetup<T>,
    /// Atom levels for the decay check; empty means every level with two annuli beyond it.
    pub decay_levels: Vec<i32>,
    pub slope_tol: T,
    pub rel_tol: T,
    pub holder_pairs: usize,
    pub subadditivity_lists: usize,
    pub split_members: usize,
    pub duality_cap: T,
}

impl<T: Real> SuiteConfig<T> {
    pub fn new(theorem: TheoremSetup<T>) -> Self {
        Self {
            theorem,
            decay_levels: Vec::new(),
            slope_tol: lit(DEFAULT_SLOPE_TOL),
            rel_tol: lit(1e-10),
            holder_pairs: 100,
            subadditivity_lists: 1000,
            split_members: 30,
            duality_cap: lit(DEFAULT_DUALITY_CAP),
        }
    }
}

fn f<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

struct Ctx<'a, T> {
    cfg: &'a SuiteConfig<T>,
    report: VerificationReport,
}

impl<T: Real> Ctx<'_, T> {
    fn params(&self, extra: Value) -> BTreeMap<String, Value> {
        let t = &self.cfg.theorem;
        let mut p = BTreeMap::new();
        p.insert("seed".into(), json!(t.seed));
        p.insert("grid".into(), serde_json::to_value(t.grid).expect("grid serializes"));
        if let Value::Object(map) = extra {
            p.extend(map);
        }
        p
    }

    fn push(&mut self, name: &str, extra: Value, measured: T, bound: T, pass: bool) {
        let p = self.params(extra);
        self.report.push(name, p, f(measured), f(bound), pass);
    }

    fn fail(&mut self, name: &str, extra: Value, err: &Error) {
        let p = self.params(extra);
        self.report.push_error(name, p, err);
    }
}

/// Runs every check and collects the records. Hypothesis violations are
/// returned as errors before anything is computed; failures of individual
/// checks are recorded in the report.
pub fn run_suite<T: Real>(cfg: &SuiteConfig<T>) -> Result<VerificationReport> {
    let t = &cfg.theorem;
    let hyp = validate_hypotheses(t)?;
    let grid = t.grid;
    let p1 = make_exponent(t.p1.clone(), &grid, ExponentMode::Lebesgue)?;
    let alpha = make_exponent(t.alpha.clone(), &grid, ExponentMode::Herz)?;
    let p2 = check_sobolev_exponent(&p1, t.beta)?;
    let mut cx = Ctx { cfg, report: VerificationReport::default() };

    cx.push(
        "theorem_branch_alpha_inf_gt_lambda",
        json!({"alpha_infinity": f(hyp.alpha_infinity), "lambda": f(t.lambda)}),
        hyp.alpha_infinity,
        t.lambda,
        true,
    );
    cx.push(
        "sobolev_exponent",
        json!({"beta": f(t.beta)}),
        p2.p_minus(),
        p1.p_minus(),
        p2.p_minus() > p1.p_minus(),
    );

    let fit = match fit_izuki(&p1) {
        Ok(fit) => {
            izuki_records(&mut cx, &fit, "p1");
            if t.refine {
                if let Ok(fine) = make_exponent(t.p1.clone(), &grid.refined(2)?, ExponentMode::Lebesgue)
                    .and_then(|p| fit_izuki(&p))
                {
                    cx.report.push_drift("izuki_delta1", f(fit.delta1), f(fine.delta1));
                    cx.report.push_drift("izuki_delta2", f(fit.delta2), f(fine.delta2));
                }
            }
            Some(fit)
        }
        Err(e) => {
            cx.fail("izuki_fit", json!({}), &e);
            None
        }
    };

    for q in subadditivity_exponents(t.q1) {
        let extra = json!({"q1": q, "lists": cfg.subadditivity_lists});
        match subadditivity_battery(cfg.subadditivity_lists, q, t.seed) {
            Ok(v) => cx.push("q_subadditivity", extra, lit::<T>(v as f64), T::zero(), v == 0),
            Err(e) => cx.fail("q_subadditivity", extra, &e),
        }
    }

    let extra = json!({"pairs": cfg.holder_pairs, "exponent": "p1"});
    match holder_battery(&p1, cfg.holder_pairs, t.seed, cfg.rel_tol) {
        Ok(b) => cx.push("holder_violations", extra, lit::<T>(b.violations as f64), T::zero(), b.violations == 0),
        Err(e) => cx.fail("holder_violations", extra, &e),
    }

    ball_constant_records(&mut cx, &grid, t.beta);

    if let Some(fit) = &fit {
        decay_records(&mut cx, &p1, &p2, &alpha, fit);
    }

    split_records(&mut cx, &grid, &alpha, &p1)?;

    match run_ratio_experiment(t) {
        Ok(rep) => {
            let base = json!({"beta": f(t.beta), "q1": f(t.q1), "q2": f(t.q2), "lambda": f(t.lambda),
                              "members": rep.coarse.members.len(), "refine": t.refine});
            cx.push("main_theorem_sup_ratio", base.clone(), rep.coarse.sup, T::infinity(), rep.sup_finite);
            for (kind, sup) in &rep.coarse.per_family {
                let mut extra = base.clone();
                extra["family"] = json!(kind.name());
                cx.push("main_theorem_family_sup", extra, *sup, T::infinity(), sup.is_finite());
            }
            let scale_dev = rep
                .fine
                .as_ref()
                .map_or(rep.coarse.scale_deviation, |fr| fr.scale_deviation.max(rep.coarse.scale_deviation));
            cx.push("main_theorem_scale_invariance", base.clone(), scale_dev, lit(1e-8), rep.scale_invariant);
            if let (Some(fine), Some(drift)) = (&rep.fine, rep.drift) {
                cx.report.push_drift("main_theorem_sup_ratio", f(rep.coarse.sup), f(fine.sup));
                cx.push("main_theorem_drift", base, drift, t.drift_cap, rep.drift_ok);
            }
        }
        Err(e) => cx.fail("main_theorem", json!({}), &e),
    }
    Ok(cx.report)
}

/// The configured `q1` when it lies in `(0, 1]`, plus a fixed sweep.
fn subadditivity_exponents<T: Real>(q1: T) -> Vec<f64> {
    let mut qs = vec![0.3, 0.5, 1.0];
    let q = f(q1);
    if q > 0.0 && q <= 1.0 && !qs.contains(&q) {
        qs.push(q);
    }
    qs
}

fn izuki_records<T: Real>(cx: &mut Ctx<'_, T>, fit: &IzukiFit<T>, which: &str) {
    let extra = json!({"exponent": which, "pairs": fit.pair_count});
    let unit = |d: T| d > T::zero() && d < T::one();
    cx.push("izuki_delta1", extra.clone(), fit.delta1, T::one(), unit(fit.delta1));
    cx.push("izuki_delta2", extra.clone(), fit.delta2, T::one(), unit(fit.delta2));
    cx.push("izuki_pair_inequality", extra.clone(), fit.max_violation(), T::one(), fit.holds_on_all_pairs());
    let cap = cx.cfg.duality_cap;
    cx.push(
        "izuki_duality_max",
        extra.clone(),
        fit.c_duality,
        cap,
        fit.c_duality <= cap,
    );
    cx.push(
        "izuki_duality_min",
        extra,
        fit.c_duality_min,
        lit(0.9),
        fit.c_duality_min >= lit(0.9),
    );
}

fn ball_constant_records<T: Real>(cx: &mut Ctx<'_, T>, grid: &Grid<T>, beta: T) {
    let levels: Vec<i32> = (-2..=2).filter(|&j| j >= grid.l_min() && j <= grid.l_max()).collect();
    let extra = json!({"beta": f(beta), "levels": levels});
    let constants: Result<Vec<T>> = RieszOperator::new(grid, beta)
        .and_then(|op| levels.iter().map(|&j| ball_lower_constant(&op, grid, j)).collect());
    match constants {
        Ok(c) if !c.is_empty() => {
            let (lo, hi) = c.iter().fold((T::infinity(), T::zero()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let spread = hi / lo - T::one();
            let bound = lit::<T>(BALL_CONSTANT_SPREAD);
            cx.push("riesz_ball_lower_bound", extra, spread, bound, lo > T::zero() && spread < bound);
        }
        Ok(_) => cx.fail(
            "riesz_ball_lower_bound",
            extra,
            &Error::InsufficientData("no ball level in -2..=2".into()),
        ),
        Err(e) => cx.fail("riesz_ball_lower_bound", extra, &e),
    }
}

fn decay_records<T: Real>(cx: &mut Ctx<'_, T>, p1: &Exponent<T>, p2: &Exponent<T>, alpha: &Exponent<T>, fit: &IzukiFit<T>) {
    let t = &cx.cfg.theorem;
    let grid = p1.grid();
    let levels = if cx.cfg.decay_levels.is_empty() {
        (grid.l_min() + 1..=grid.l_max() - 2).collect()
    } else {
        cx.cfg.decay_levels.clone()
    };
    let opts = DecayOptions {
        slope_tol: cx.cfg.slope_tol,
        rel_tol: cx.cfg.rel_tol,
        seed: t.seed,
        s: None,
    };
    for j in levels {
        let extra = json!({"j": j, "beta": f(t.beta), "slope_tol": f(cx.cfg.slope_tol)});
        match check_atom_decay(j, t.beta, p1, p2, alpha, fit, &opts) {
            Ok(r) => {
                let mut e = extra.clone();
                e["s"] = json!(r.s);
                cx.push("atom_decay_slope", e.clone(), r.slope, r.slope_bound + r.slope_tol, r.slope_ok);
                cx.push("atom_decay_flat_bound", e.clone(), r.flat_ratio, lit(1.0 + 1e-6), r.flat_ok);
                cx.push(
                    "atom_decay_far_field_monotone",
                    e.clone(),
                    r.far_field_max_rise,
                    lit(1.0 + 1e-9),
                    r.far_field_monotone,
                );
                cx.push("atom_decay_far_constant", e.clone(), r.c_fit, T::infinity(), r.c_fit.is_finite());
                cx.push("atom_decay_near_constant", e, r.c_near, T::infinity(), r.c_near.is_finite());
            }
            Err(err) => cx.fail("atom_decay", extra, &err),
        }
    }
}

fn split_family<T: Real>(grid: &Grid<T>, count: usize, seed: u64) -> Result<Vec<GridFunction<T>>> {
    (0..count).map(|i| seeded_bump(grid, i, seed.wrapping_add(7000 + i as u64))).collect()
}

fn split_records<T: Real>(cx: &mut Ctx<'_, T>, grid: &Grid<T>, alpha: &Exponent<T>, p1: &Exponent<T>) -> Result<()> {
    let t = &cx.cfg.theorem;
    let extra = json!({"q": f(t.q1), "lambda": f(t.lambda), "members": cx.cfg.split_members});
    let run = |g: &Grid<T>, a: &Exponent<T>, p: &Exponent<T>| -> Result<T> {
        let hp = HerzParams::new(a.clone(), p.clone(), t.q1, t.lambda)?;
        Ok(split_equivalence(&split_family(g, cx.cfg.split_members, t.seed)?, &hp)?.k)
    };
    let k = match run(grid, alpha, p1) {
        Ok(k) => k,
        Err(e) => {
            cx.fail("herz_split_equivalence", extra, &e);
            return Ok(());
        }
    };
    if alpha.is_constant() {
        let dev = k - T::one();
        cx.push("herz_split_equivalence", extra.clone(), dev, lit(1e-10), dev <= lit(1e-10));
    } else {
        cx.push("herz_split_equivalence", extra.clone(), k, T::infinity(), k.is_finite());
    }
    if t.refine {
        let fine_grid = grid.refined(2)?;
        let fine = make_exponent(t.alpha.clone(), &fine_grid, ExponentMode::Herz).and_then(|a| {
            let p = make_exponent(t.p1.clone(), &fine_grid, ExponentMode::Lebesgue)?;
            run(&fine_grid, &a, &p)
        });
        match fine {
            Ok(kf) => {
                cx.report.push_drift("herz_split_k", f(k), f(kf));
                let drift = (kf / k - T::one()).abs();
                let cap = lit::<T>(SPLIT_DRIFT_CAP);
                cx.push("herz_split_drift", extra, drift, cap, drift < cap);
            }
            Err(e) => cx.fail("herz_split_drift", extra, &e),
        }
    }
    Ok(())
}
