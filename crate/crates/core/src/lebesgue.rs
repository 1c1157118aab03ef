//! Variable-exponent Lebesgue spaces: the Luxemburg norm as the root of the
//! modular, and the generalized Hölder pairing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{conjugate, Exponent};
use crate::grid::GridFunction;
use crate::scalar::{lit, Real};

pub const DEFAULT_REL_TOL: f64 = 1e-8;
const MAX_BISECTIONS: usize = 400;
const MAX_BRACKET_STEPS: usize = 4000;

/// Outcome of a Luxemburg norm solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult<T> {
    /// The norm; equal to `eta`.
    pub value: T,
    /// Accepted scaling: the upper end of the final bracket, so the modular there is `<= 1`.
    pub eta: T,
    pub modular_at_eta: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> NormResult<T> {
    fn zero() -> Self {
        Self {
            value: T::zero(),
            eta: T::zero(),
            modular_at_eta: T::zero(),
            iterations: 0,
            converged: true,
        }
    }
}

/// `cell_volume * sum_i (|f_i| / eta)^{p_i}`.
pub fn modular<T: Real>(f: &GridFunction<T>, p: &Exponent<T>, eta: T) -> Result<T> {
    if !(eta > T::zero()) {
        return Err(Error::Domain(format!("modular scaling eta = {eta} must be positive")));
    }
    f.grid().same_as(p.grid())?;
    let sum: T = f
        .values()
        .iter()
        .zip(p.samples())
        .filter(|(v, _)| !v.is_zero())
        .map(|(&v, &e)| (v.abs() / eta).powf(e))
        .sum();
    Ok(f.grid().cell_volume() * sum)
}

/// A nonzero sample prepared for repeated modular evaluation: `ln(|f_i| / max|f|)`
/// and its exponent.
#[derive(Clone, Copy)]
struct Term<T> {
    log_ratio: T,
    exponent: T,
}

/// Bracket-and-bisect solver for `inf {eta > 0 : modular(eta) <= 1}` over the
/// cells yielded by `cells` as `(value, exponent)` pairs.
pub(crate) fn luxemburg_on_cells<T: Real>(
    cells: impl Iterator<Item = (T, T)>,
    cell_volume: T,
    box_volume: T,
    rel_tol: T,
) -> NormResult<T> {
    let raw: Vec<(T, T)> = cells.filter(|(v, _)| !v.is_zero()).map(|(v, e)| (v.abs(), e)).collect();
    if raw.is_empty() {
        return NormResult::zero();
    }
    let peak = raw.iter().fold(T::zero(), |m, &(v, _)| m.max(v));
    let (e_min, e_max) = raw
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &(_, e)| (lo.min(e), hi.max(e)));
    let terms: Vec<Term<T>> = raw
        .iter()
        .map(|&(v, e)| Term {
            log_ratio: (v / peak).ln(),
            exponent: e,
        })
        .collect();
    let rel_tol = rel_tol.max(T::tolerance_floor());

    // Solve in units of `peak`, then scale back; this keeps c*f and f on
    // identical bisection paths.
    let modular_scaled = |eta: T| -> T {
        let log_eta = eta.ln();
        cell_volume
            * terms
                .iter()
                .map(|t| (t.exponent * (t.log_ratio - log_eta)).exp())
                .sum::<T>()
    };

    let mut lo = cell_volume.powf(e_min.recip()).min(cell_volume.powf(e_max.recip())) * lit(1e-3);
    let mut hi = box_volume + T::one();
    let two = lit::<T>(2.0);
    let mut iterations = 0;
    while modular_scaled(hi) > T::one() && iterations < MAX_BRACKET_STEPS {
        hi = hi * two;
        iterations += 1;
    }
    while modular_scaled(lo) <= T::one() && iterations < MAX_BRACKET_STEPS {
        lo = lo / two;
        iterations += 1;
    }
    let mut converged = iterations < MAX_BRACKET_STEPS;
    if converged {
        converged = false;
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= rel_tol * hi {
                converged = true;
                break;
            }
            let mid = lo + (hi - lo) / two;
            if mid <= lo || mid >= hi {
                // bracket is at floating-point resolution
                converged = true;
                break;
            }
            iterations += 1;
            if modular_scaled(mid) <= T::one() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    NormResult {
        value: hi * peak,
        eta: hi * peak,
        modular_at_eta: modular_scaled(hi),
        iterations,
        converged,
    }
}

/// The Luxemburg norm `||f||_{L^{p(.)}}`, bracketed and then bisected to
/// relative width `rel_tol`. The zero function short-circuits to 0.
pub fn luxemburg_norm<T: Real>(f: &GridFunction<T>, p: &Exponent<T>, rel_tol: T) -> Result<NormResult<T>> {
    f.grid().same_as(p.grid())?;
    check_rel_tol(rel_tol)?;
    let g = f.grid();
    Ok(luxemburg_on_cells(
        f.values().iter().copied().zip(p.samples().iter().copied()),
        g.cell_volume(),
        g.box_volume(),
        rel_tol,
    ))
}

pub(crate) fn check_rel_tol<T: Real>(rel_tol: T) -> Result<()> {
    if !(rel_tol > T::zero() && rel_tol < lit(1e-2)) {
        return Err(Error::Domain(format!("rel_tol = {rel_tol} must lie in (0, 1e-2)")));
    }
    Ok(())
}

/// Luxemburg norm value, failing if the solver did not converge.
pub fn norm_value<T: Real>(f: &GridFunction<T>, p: &Exponent<T>, rel_tol: T) -> Result<T> {
    let r = luxemburg_norm(f, p, rel_tol)?;
    if !r.converged {
        return Err(Error::NoConvergence {
            iterations: r.iterations,
            context: "Luxemburg norm bisection".into(),
        });
    }
    Ok(r.value)
}

/// Both sides of the generalized Hölder inequality
/// `int |f g| <= r_p ||f||_{p(.)} ||g||_{p'(.)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderPairing<T> {
    pub lhs: T,
    pub rhs: T,
    pub r_p: T,
    pub holds: bool,
}

pub fn holder_pairing<T: Real>(
    f: &GridFunction<T>,
    g: &GridFunction<T>,
    p: &Exponent<T>,
    rel_tol: T,
) -> Result<HolderPairing<T>> {
    let p_conj = conjugate(p)?;
    let lhs = f.pointwise_mul(g)?.abs().integrate();
    let r_p = p.holder_constant();
    let rhs = r_p * norm_value(f, p, rel_tol)? * norm_value(g, &p_conj, rel_tol)?;
    Ok(HolderPairing {
        lhs,
        rhs,
        r_p,
        holds: lhs <= rhs * (T::one() + lit::<T>(10.0) * rel_tol),
    })
}
