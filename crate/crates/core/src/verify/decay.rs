use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimates::operator_ratio;
use super::families::{moment_order_for, seeded_bump};
use super::izuki::IzukiFit;
use super::linear_fit;
use crate::atoms::make_central_atom;
use crate::error::{Error, Result};
use crate::exponents::Exponent;
use crate::grid::{annulus_mask, ball_mask, GridFunction};
use crate::lebesgue::norm_value;
use crate::operators::RieszOperator;
use crate::scalar::{from_i64, from_usize, lit, Real};

pub const DEFAULT_SLOPE_TOL: f64 = 0.15;
const FLAT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayOptions<T> {
    pub slope_tol: T,
    pub rel_tol: T,
    pub seed: u64,
    /// Moment order; `None` uses `max(0, floor(alpha_j - n delta2))`.
    pub s: Option<u32>,
}

impl<T: Real> Default for DecayOptions<T> {
    fn default() -> Self {
        Self {
            slope_tol: lit(DEFAULT_SLOPE_TOL),
            rel_tol: lit(1e-10),
            seed: 0,
            s: None,
        }
    }
}

/// Annulus norms `t_k = ||(I^beta a_j) chi_k||_{p2}` of one atom and the
/// estimates they are checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDecayReport<T> {
    pub j: i32,
    pub s: u32,
    pub seed: u64,
    pub beta: T,
    pub alpha_j: T,
    pub delta1: T,
    pub delta2: T,
    /// `(k, t_k)` for `k = j+1 ..= l_max`.
    pub far: Vec<(i32, T)>,
    /// Least-squares slope of `log2 t_k` against `k - j` over `far`.
    pub slope: T,
    /// `beta - n delta2`.
    pub slope_bound: T,
    pub slope_tol: T,
    pub slope_ok: bool,
    /// `max_k t_k / 2^{(beta - n delta2)(k - j) - alpha_j j}` over `far`.
    pub c_fit: T,
    /// `||a_j||_{p1}`.
    pub atom_norm: T,
    /// Largest measured `||I^beta g||_{p2} / ||g||_{p1}` over a family containing the atom.
    pub c_op: T,
    /// `max_k t_k / (c_op ||a_j||_{p1})` over all `k`.
    pub flat_ratio: T,
    pub flat_ok: bool,
    /// Largest `t_{k+1} / t_k` with `k - j >= 2`.
    pub far_field_max_rise: T,
    pub far_field_monotone: bool,
    /// `(k, t_k)` for `k = l_min ..= j`.
    pub near: Vec<(i32, T)>,
    /// `max_k t_k / 2^{(beta - n delta1)(j - k) - alpha_j j}` over `near`.
    pub c_near: T,
}

impl<T: Real> AtomDecayReport<T> {
    pub fn passed(&self) -> bool {
        self.slope_ok && self.flat_ok && self.far_field_monotone && self.c_fit.is_finite() && self.c_near.is_finite()
    }
}

/// Builds a central `(alpha, p1)`-atom in `B_j` and measures how `I^beta` of
/// it spreads over the annuli of the grid.
pub fn check_atom_decay<T: Real>(
    j: i32,
    beta: T,
    p1: &Exponent<T>,
    p2: &Exponent<T>,
    alpha: &Exponent<T>,
    fit: &IzukiFit<T>,
    opts: &DecayOptions<T>,
) -> Result<AtomDecayReport<T>> {
    let grid = p1.grid();
    grid.same_as(p2.grid())?;
    if j > grid.l_max() - 2 {
        return Err(Error::InsufficientData(format!(
            "atom level {j} leaves fewer than two annuli beyond it (l_max = {})",
            grid.l_max()
        )));
    }
    let n = from_usize::<T>(grid.dim());
    let s = opts.s.unwrap_or_else(|| moment_order_for(grid, alpha, fit.delta2, j));
    let atom = make_central_atom(grid, j, p1, alpha, s, opts.seed)?;
    let op = RieszOperator::new(grid, beta)?;
    let image = op.apply_fft(&atom.function, 2)?;

    let levels: Vec<i32> = (grid.l_min()..=grid.l_max()).collect();
    let norms: Vec<Result<(i32, T)>> = levels
        .par_iter()
        .map(|&k| {
            let part = image.pointwise_mul(&annulus_mask(grid, k)?)?;
            Ok((k, norm_value(&part, p2, opts.rel_tol)?))
        })
        .collect();
    let norms: Vec<(i32, T)> = norms.into_iter().collect::<Result<_>>()?;
    let far: Vec<(i32, T)> = norms.iter().copied().filter(|&(k, _)| k > j).collect();
    let near: Vec<(i32, T)> = norms.iter().copied().filter(|&(k, t)| k <= j && t > T::zero()).collect();

    let alpha_j = atom.alpha_r;
    let jt = from_i64::<T>(j as i64);
    let slope_bound = beta - n * fit.delta2;
    let xs: Vec<T> = far.iter().map(|&(k, _)| from_i64::<T>((k - j) as i64)).collect();
    let ys: Vec<T> = far.iter().map(|&(_, t)| t.log2()).collect();
    let (slope, _) = linear_fit(&xs, &ys);
    let c_fit = far
        .iter()
        .map(|&(k, t)| t / (slope_bound * from_i64::<T>((k - j) as i64) - alpha_j * jt).exp2())
        .fold(T::zero(), T::max);
    let near_rate = beta - n * fit.delta1;
    let c_near = near
        .iter()
        .map(|&(k, t)| t / (near_rate * from_i64::<T>((j - k) as i64) - alpha_j * jt).exp2())
        .fold(T::zero(), T::max);

    let atom_norm = norm_value(&atom.function, p1, opts.rel_tol)?;
    let c_op = operator_constant(&op, &atom.function, p1, p2, opts.rel_tol)?;
    let flat_ratio = norms.iter().map(|&(_, t)| t).fold(T::zero(), T::max) / (c_op * atom_norm);

    let tail: Vec<T> = far.iter().filter(|&&(k, _)| k - j >= 2).map(|&(_, t)| t).collect();
    let far_field_max_rise = tail.windows(2).map(|w| w[1] / w[0]).fold(T::zero(), T::max);

    Ok(AtomDecayReport {
        j,
        s,
        seed: atom.seed,
        beta,
        alpha_j,
        delta1: fit.delta1,
        delta2: fit.delta2,
        far,
        slope,
        slope_bound,
        slope_tol: opts.slope_tol,
        slope_ok: slope <= slope_bound + opts.slope_tol,
        c_fit,
        atom_norm,
        c_op,
        flat_ratio,
        flat_ok: flat_ratio <= T::one() + lit(FLAT_TOL),
        far_field_max_rise,
        far_field_monotone: far_field_max_rise <= T::one() + lit(1e-9),
        near,
        c_near,
    })
}

/// Largest `||I^beta g||_{p2} / ||g||_{p1}` over `extra`, the ball indicators
/// `chi_{B_l}` and a few seeded bumps.
pub fn operator_constant<T: Real>(
    op: &RieszOperator<T>,
    extra: &GridFunction<T>,
    p1: &Exponent<T>,
    p2: &Exponent<T>,
    rel_tol: T,
) -> Result<T> {
    let grid = p1.grid();
    let mut family = vec![extra.clone()];
    for l in grid.l_min()..=grid.l_max() {
        let chi = ball_mask(grid, l)?;
        if !chi.is_zero() {
            family.push(chi);
        }
    }
    for i in 0..4 {
        family.push(seeded_bump(grid, 2 * i, 500 + i as u64)?);
    }
    let ratios: Vec<Result<T>> = family.par_iter().map(|g| operator_ratio(op, g, p1, p2, rel_tol)).collect();
    ratios.into_iter().try_fold(T::zero(), |m, r| Ok(m.max(r?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::ExponentMode;
    use crate::grid::Grid;
    use crate::verify::{check_sobolev_exponent, fit_izuki};

    #[test]
    fn calibration_atom_decays() {
        let g = Grid::<f64>::new(1, -5, 3, 2048).unwrap();
        let p1 = Exponent::constant(2.0, &g, ExponentMode::Lebesgue).unwrap();
        let alpha = Exponent::constant(1.0, &g, ExponentMode::Herz).unwrap();
        let p2 = check_sobolev_exponent(&p1, 0.25).unwrap();
        let fit = fit_izuki(&p1).unwrap();
        let rep = check_atom_decay(-1, 0.25, &p1, &p2, &alpha, &fit, &DecayOptions::default()).unwrap();
        assert_eq!(rep.far.len(), 4);
        assert!(rep.slope < 0.0);
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn top_level_atom_is_rejected() {
        let g = Grid::<f64>::new(1, -3, 2, 256).unwrap();
        let p1 = Exponent::constant(2.0, &g, ExponentMode::Lebesgue).unwrap();
        let alpha = Exponent::constant(1.0, &g, ExponentMode::Herz).unwrap();
        let p2 = check_sobolev_exponent(&p1, 0.25).unwrap();
        let fit = fit_izuki(&p1).unwrap();
        let opts = DecayOptions::default();
        assert!(matches!(
            check_atom_decay(1, 0.25, &p1, &p2, &alpha, &fit, &opts),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            check_atom_decay(-3, 0.25, &p1, &p2, &alpha, &fit, &opts),
            Err(Error::Range { .. })
        ));
    }
}
