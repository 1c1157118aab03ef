use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::BumpParams;
use crate::error::{Error, Result};
use crate::exponents::Exponent;
use crate::grid::{ball_mask, Grid, GridFunction};
use crate::herz::{herz_morrey_norm, herz_morrey_norm_split, HerzParams};
use crate::lebesgue::{holder_pairing, norm_value};
use crate::operators::RieszOperator;
use crate::scalar::{from_usize, lit, pow2, Real};

/// `p2` with `1/p2 = 1/p1 - beta/n` at every sample and at both limits.
pub fn check_sobolev_exponent<T: Real>(p1: &Exponent<T>, beta: T) -> Result<Exponent<T>> {
    let n = from_usize::<T>(p1.grid().dim());
    if !(beta > T::zero()) {
        return Err(Error::Domain(format!("beta = {beta} must be positive")));
    }
    let p2 = p1.sobolev(beta / n)?;
    if !(p2.p_minus() > p1.p_minus()) {
        return Err(Error::Domain(format!(
            "p2_minus = {} does not exceed p1_minus = {}",
            p2.p_minus(),
            p1.p_minus()
        )));
    }
    Ok(p2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subadditivity<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

/// `(sum c_j)^q1` against `sum c_j^q1` for `0 < q1 <= 1`.
pub fn check_q_subadditivity<T: Real>(values: &[T], q1: T) -> Result<Subadditivity<T>> {
    if !(q1 > T::zero() && q1 <= T::one()) {
        return Err(Error::Domain(format!("q1 = {q1} must lie in (0, 1]")));
    }
    if let Some(v) = values.iter().find(|v| !(**v >= T::zero())) {
        return Err(Error::Domain(format!("negative or undefined entry {v}")));
    }
    let lhs = values.iter().copied().sum::<T>().powf(q1);
    let rhs = values.iter().map(|v| v.powf(q1)).sum::<T>();
    Ok(Subadditivity {
        lhs,
        rhs,
        holds: lhs <= rhs * (T::one() + lit(1e-12)),
    })
}

/// Violation count of the subadditivity inequality over `lists` seeded random
/// nonnegative lists of length 1..=20, some entries exactly zero.
pub fn subadditivity_battery(lists: usize, q1: f64, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..lists {
        let len = rng.gen_range(1..=20);
        let values: Vec<f64> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.1) {
                    0.0
                } else {
                    10f64.powf(rng.gen_range(-6.0..6.0))
                }
            })
            .collect();
        if !check_q_subadditivity(&values, q1)?.holds {
            violations += 1;
        }
    }
    Ok(violations)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderBattery<T> {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` observed.
    pub max_ratio: T,
}

/// Generalized Hölder inequality on `pairs` seeded pairs of smooth bumps.
pub fn holder_battery<T: Real>(p: &Exponent<T>, pairs: usize, seed: u64, rel_tol: T) -> Result<HolderBattery<T>> {
    let grid = p.grid();
    let top = pow2::<f64>(grid.l_max() - 1);
    let results: Vec<Result<(bool, T)>> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(2 * i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let rf = top * rng.gen_range(0.05..1.0);
            let rg = top * rng.gen_range(0.05..1.0);
            let f = BumpParams::seeded(s, rf).sample(grid)?;
            let g = BumpParams::seeded(s.wrapping_add(1), rg).sample(grid)?;
            let h = holder_pairing(&f, &g, p, rel_tol)?;
            Ok((h.holds, if h.rhs > T::zero() { h.lhs / h.rhs } else { T::zero() }))
        })
        .collect();
    let mut violations = 0;
    let mut max_ratio = T::zero();
    for r in results {
        let (holds, ratio) = r?;
        violations += usize::from(!holds);
        max_ratio = max_ratio.max(ratio);
    }
    Ok(HolderBattery {
        pairs,
        violations,
        max_ratio,
    })
}

/// `||I^beta f||_{p2} / ||f||_{p1}`.
pub fn operator_ratio<T: Real>(
    op: &RieszOperator<T>,
    f: &GridFunction<T>,
    p1: &Exponent<T>,
    p2: &Exponent<T>,
    rel_tol: T,
) -> Result<T> {
    let denom = norm_value(f, p1, rel_tol)?;
    if denom.is_zero() {
        return Err(Error::Domain("operator ratio of the zero function".into()));
    }
    let image = op.apply_fft(f, 2)?;
    Ok(norm_value(&image, p2, rel_tol)? / denom)
}

/// `min_{x in B_j} I^beta chi_{B_j}(x) / 2^{beta j}`.
pub fn ball_lower_constant<T: Real>(op: &RieszOperator<T>, grid: &Grid<T>, j: i32) -> Result<T> {
    let chi = ball_mask(grid, j)?;
    if chi.is_zero() {
        return Err(Error::InsufficientData(format!("ball B_{j} holds no cell centre")));
    }
    let image = op.apply_fft(&chi, 2)?;
    let min = chi
        .values()
        .iter()
        .zip(image.values())
        .filter(|(c, _)| !c.is_zero())
        .map(|(_, &v)| v)
        .fold(T::infinity(), T::min);
    Ok(min * pow2::<T>(j).powf(-op.beta()))
}

/// Spread of the split/exact Herz norm ratio over a set of functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFit<T> {
    pub min_ratio: T,
    pub max_ratio: T,
    /// Smallest `K` with every ratio in `[1/K, K]`.
    pub k: T,
}

pub fn split_equivalence<T: Real>(functions: &[GridFunction<T>], hp: &HerzParams<T>) -> Result<SplitFit<T>> {
    let ratios: Vec<Result<Option<T>>> = functions
        .par_iter()
        .map(|f| {
            let exact = herz_morrey_norm(f, hp)?;
            if exact.is_zero() {
                return Ok(None);
            }
            Ok(Some(herz_morrey_norm_split(f, hp)? / exact))
        })
        .collect();
    let mut min_ratio = T::infinity();
    let mut max_ratio = T::zero();
    for r in ratios {
        if let Some(v) = r? {
            min_ratio = min_ratio.min(v);
            max_ratio = max_ratio.max(v);
        }
    }
    if max_ratio.is_zero() {
        return Err(Error::InsufficientData("every function has zero Herz norm".into()));
    }
    Ok(SplitFit {
        min_ratio,
        max_ratio,
        k: max_ratio.max(min_ratio.recip()),
    })
}
