//! Homogeneous variable-exponent Herz–Morrey norms with their origin/infinity
//! split form. The Hardy variant applies the norm to the maximal proxy.
//!
//! The dyadic sums run over `l_min..=l_max`. The innermost term covers the
//! whole ball `B_{l_min}`, absorbing the truncated tail `l < l_min`, so a
//! function vanishes in the norm only if it vanishes on `B_{l_max}`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponents::{Exponent, ExponentMode};
use crate::grid::{Grid, GridFunction};
use crate::lebesgue::{check_rel_tol, luxemburg_on_cells};
use crate::operators::grand_maximal_proxy;
use crate::scalar::{from_i64, lit, pow2, Real};

/// Default bisection tolerance for the annulus norms.
pub const HERZ_REL_TOL: f64 = 1e-13;

/// Parameters `(alpha(.), p(.), q, lambda)` of a Herz–Morrey space on a grid.
#[derive(Debug, Clone)]
pub struct HerzParams<T> {
    alpha: Exponent<T>,
    p: Exponent<T>,
    q: T,
    lambda: T,
    rel_tol: T,
}

impl<T: Real> HerzParams<T> {
    /// `q` may be `T::infinity()`.
    pub fn new(alpha: Exponent<T>, p: Exponent<T>, q: T, lambda: T) -> Result<Self> {
        if !(q > T::zero()) {
            return Err(Error::Domain(format!("q = {q} must be positive")));
        }
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda = {lambda} must be finite and >= 0")));
        }
        if alpha.mode() != ExponentMode::Herz {
            return Err(Error::Domain("alpha must be a Herz-mode exponent".into()));
        }
        if p.mode() != ExponentMode::Lebesgue {
            return Err(Error::Domain("p must be a Lebesgue-mode exponent".into()));
        }
        alpha.grid().same_as(p.grid())?;
        Ok(Self {
            alpha,
            p,
            q,
            lambda,
            rel_tol: lit::<T>(HERZ_REL_TOL).max(T::tolerance_floor()),
        })
    }

    pub fn with_rel_tol(mut self, rel_tol: T) -> Result<Self> {
        check_rel_tol(rel_tol)?;
        self.rel_tol = rel_tol;
        Ok(self)
    }

    /// Same exponents and `q`, different `lambda`.
    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Ok(Self::new(self.alpha.clone(), self.p.clone(), self.q, lambda)?.with_rel_tol(self.rel_tol)?)
    }

    /// Same exponents and `lambda`, different `q`.
    pub fn with_q(&self, q: T) -> Result<Self> {
        Ok(Self::new(self.alpha.clone(), self.p.clone(), q, self.lambda)?.with_rel_tol(self.rel_tol)?)
    }

    pub fn alpha(&self) -> &Exponent<T> {
        &self.alpha
    }

    pub fn p(&self) -> &Exponent<T> {
        &self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn grid(&self) -> &Grid<T> {
        self.p.grid()
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<i32> {
        self.grid().l_min()..=self.grid().l_max()
    }
}

/// Cell indices grouped by dyadic level `l_min..=l_max`; level `l_min` holds
/// all of `B_{l_min}`.
pub(crate) fn level_cells<T: Real>(grid: &Grid<T>) -> Vec<Vec<usize>> {
    let (lo, hi) = (grid.l_min(), grid.l_max());
    let radii: Vec<T> = (lo..=hi).map(pow2::<T>).collect();
    let mut out = vec![Vec::new(); radii.len()];
    for i in 0..grid.cell_count() {
        let r = grid.radius(i);
        if let Some(k) = radii.iter().position(|&b| r <= b) {
            out[k].push(i);
        }
    }
    out
}

/// Per-level Luxemburg norms of `weight(l, x) * f(x)` restricted to each level.
fn level_norms<T: Real>(
    f: &GridFunction<T>,
    hp: &HerzParams<T>,
    weight: impl Fn(i32, usize) -> T + Sync,
) -> Result<Vec<T>> {
    f.grid().same_as(hp.grid())?;
    let grid = hp.grid();
    let cells = level_cells(grid);
    let (cv, vol) = (grid.cell_volume(), grid.box_volume());
    let values = f.values();
    let exps = hp.p.samples();
    cells
        .par_iter()
        .enumerate()
        .map(|(k, idx)| {
            let l = grid.l_min() + k as i32;
            let r = luxemburg_on_cells(
                idx.iter().map(|&i| (weight(l, i) * values[i], exps[i])),
                cv,
                vol,
                hp.rel_tol,
            );
            if r.converged {
                Ok(r.value)
            } else {
                Err(Error::NoConvergence {
                    iterations: r.iterations,
                    context: format!("annulus norm at level {l}"),
                })
            }
        })
        .collect()
}

/// `t_l = || 2^{l alpha(.)} f chi_l ||_{L^{p(.)}}` for `l = l_min..=l_max`.
pub fn weighted_annulus_norms<T: Real>(f: &GridFunction<T>, hp: &HerzParams<T>) -> Result<Vec<T>> {
    let alpha = hp.alpha.samples();
    level_norms(f, hp, |l, i| (from_i64::<T>(l as i64) * alpha[i]).exp2())
}

/// `u_l = || f chi_l ||_{L^{p(.)}}` for `l = l_min..=l_max`.
pub fn annulus_norms<T: Real>(f: &GridFunction<T>, hp: &HerzParams<T>) -> Result<Vec<T>> {
    level_norms(f, hp, |_, _| T::one())
}

/// `sup_L 2^{-L lambda} (sum_{l <= L} t_l^q)^{1/q}` over the truncated range,
/// with the inner sum replaced by a max when `q` is infinite.
pub fn herz_morrey_norm<T: Real>(f: &GridFunction<T>, hp: &HerzParams<T>) -> Result<T> {
    let t = weighted_annulus_norms(f, hp)?;
    Ok(sup_over_levels(&t, hp.grid().l_min(), hp.q, hp.lambda))
}

pub(crate) fn sup_over_levels<T: Real>(terms: &[T], l_min: i32, q: T, lambda: T) -> T {
    let mut best = T::zero();
    let mut acc = T::zero();
    for (k, &t) in terms.iter().enumerate() {
        let level = from_i64::<T>((l_min + k as i32) as i64);
        let damp = (-level * lambda).exp2();
        let agg = if q.is_infinite() {
            acc = acc.max(t);
            acc
        } else {
            acc = acc + t.powf(q);
            acc.powf(q.recip())
        };
        best = best.max(damp * agg);
    }
    best
}

/// The q-th root of the origin/infinity split: levels `l <= -1` (and every
/// level of the `L <= 0` branch) weighted by `2^{l alpha(0)}`, levels `l >= 0`
/// of the `L > 0` branch by `2^{l alpha_inf}`.
pub fn herz_morrey_norm_split<T: Real>(f: &GridFunction<T>, hp: &HerzParams<T>) -> Result<T> {
    if hp.q.is_infinite() {
        return Err(Error::Domain("the split form is defined for finite q only".into()));
    }
    let u = annulus_norms(f, hp)?;
    let q = hp.q;
    let a0 = hp.alpha.value_at_origin();
    let ainf = hp.alpha.value_at_infinity();
    let l_min = hp.grid().l_min();
    let term = |l: i32, a: T| (from_i64::<T>(l as i64) * q * a).exp2() * u[(l - l_min) as usize].powf(q);

    let mut best = T::zero();
    for big_l in hp.levels() {
        let sum: T = if big_l <= 0 {
            (l_min..=big_l).map(|l| term(l, a0)).sum()
        } else {
            (l_min..=-1).map(|l| term(l, a0)).sum::<T>()
                + (l_min.max(0)..=big_l).map(|l| term(l, ainf)).sum::<T>()
        };
        let damp = (-from_i64::<T>(big_l as i64) * hp.lambda * q).exp2();
        best = best.max(damp * sum);
    }
    Ok(best.powf(q.recip()))
}

/// `|| M f ||` in the Herz–Morrey norm, with the Hardy–Littlewood maximal
/// function standing in for the grand maximal function.
pub fn herz_morrey_hardy_norm<T: Real>(f: &GridFunction<T>, hp: &HerzParams<T>) -> Result<T> {
    herz_morrey_norm(&grand_maximal_proxy(f), hp)
}
