use serde::{Deserialize, Serialize};

use super::linear_fit;
use crate::error::{Error, Result};
use crate::exponents::{conjugate, Exponent};
use crate::grid::ball_mask;
use crate::lebesgue::norm_value;
use crate::scalar::{lit, Real};

const BALL_NORM_TOL: f64 = 1e-12;

/// One nested pair `S = B_small`, `B = B_big` of the ball scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IzukiPair<T> {
    pub small: i32,
    pub big: i32,
    /// `|S| / |B|` in grid measure.
    pub measure_ratio: T,
    /// `||chi_S||_p / ||chi_B||_p`.
    pub ratio1: T,
    /// `||chi_S||_{p'} / ||chi_B||_{p'}`.
    pub ratio2: T,
}

/// Fitted ball-ratio exponents and prefactors of an exponent `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IzukiFit<T> {
    pub delta1: T,
    pub delta2: T,
    /// Raw least-squares slopes before clamping.
    pub slope1: T,
    pub slope2: T,
    pub c1: T,
    pub c2: T,
    /// `max_B ||chi_B||_p ||chi_B||_{p'} / |B|`.
    pub c_duality: T,
    /// `min_B ||chi_B||_p ||chi_B||_{p'} / |B|`.
    pub c_duality_min: T,
    pub pair_count: usize,
    pub pairs: Vec<IzukiPair<T>>,
}

impl<T: Real> IzukiFit<T> {
    /// Largest `ratio / (c (|S|/|B|)^delta)` over both ratio families; at most 1
    /// when the fitted inequalities hold on every pair.
    pub fn max_violation(&self) -> T {
        self.pairs.iter().fold(T::zero(), |m, pr| {
            let a = pr.ratio1 / (self.c1 * pr.measure_ratio.powf(self.delta1));
            let b = pr.ratio2 / (self.c2 * pr.measure_ratio.powf(self.delta2));
            m.max(a).max(b)
        })
    }

    pub fn holds_on_all_pairs(&self) -> bool {
        self.max_violation() <= T::one() + lit(1e-12)
    }
}

/// Scans every nested pair of nonempty balls `B_{l'} ⊂ B_l`, `l_min <= l' < l <= l_max`.
///
/// The least-squares slope of `log(ratio)` against `log(|S|/|B|)` is clamped
/// to the smallest pointwise exponent `log(ratio) / log(|S|/|B|)`, so the
/// fitted inequality holds on every pair with the reported prefactor.
pub fn fit_izuki<T: Real>(p: &Exponent<T>) -> Result<IzukiFit<T>> {
    let grid = p.grid();
    let p_conj = conjugate(p)?;
    let tol = lit::<T>(BALL_NORM_TOL).max(T::tolerance_floor());
    let mut balls = Vec::new();
    for l in grid.l_min()..=grid.l_max() {
        let chi = ball_mask(grid, l)?;
        if chi.is_zero() {
            continue;
        }
        let measure = chi.integrate();
        let n1 = norm_value(&chi, p, tol)?;
        let n2 = norm_value(&chi, &p_conj, tol)?;
        balls.push((l, measure, n1, n2));
    }
    let mut pairs = Vec::new();
    for (a, s) in balls.iter().enumerate() {
        for b in &balls[a + 1..] {
            pairs.push(IzukiPair {
                small: s.0,
                big: b.0,
                measure_ratio: s.1 / b.1,
                ratio1: s.2 / b.2,
                ratio2: s.3 / b.3,
            });
        }
    }
    if pairs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} nested ball pairs in range, at least 3 needed",
            pairs.len()
        )));
    }
    let xs: Vec<T> = pairs.iter().map(|pr| pr.measure_ratio.ln()).collect();
    let fit = |ys: Vec<T>| {
        let (slope, _) = linear_fit(&xs, &ys);
        let floor = xs.iter().zip(&ys).map(|(&x, &y)| y / x).fold(T::infinity(), T::min);
        let delta = slope.min(floor);
        let c = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| (y - delta * x).exp())
            .fold(T::zero(), T::max);
        (slope, delta, c)
    };
    let (slope1, delta1, c1) = fit(pairs.iter().map(|pr| pr.ratio1.ln()).collect());
    let (slope2, delta2, c2) = fit(pairs.iter().map(|pr| pr.ratio2.ln()).collect());
    let products = balls.iter().map(|&(_, m, n1, n2)| n1 * n2 / m);
    let (c_duality, c_duality_min) = products.fold((T::zero(), T::infinity()), |(hi, lo), v| (hi.max(v), lo.min(v)));
    Ok(IzukiFit {
        delta1,
        delta2,
        slope1,
        slope2,
        c1,
        c2,
        c_duality,
        c_duality_min,
        pair_count: pairs.len(),
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{make_exponent, Descriptor, ExponentMode};
    use crate::grid::Grid;

    #[test]
    fn constant_exponents_recover_reciprocals() {
        let g = Grid::new(1, -5, 3, 4096).unwrap();
        for (p, d1, d2) in [(2.0f64, 0.5f64, 0.5f64), (3.0, 1.0 / 3.0, 2.0 / 3.0)] {
            let e = Exponent::constant(p, &g, ExponentMode::Lebesgue).unwrap();
            let fit = fit_izuki(&e).unwrap();
            assert!((fit.delta1 - d1).abs() <= 0.02 * d1, "{fit:?}");
            assert!((fit.delta2 - d2).abs() <= 0.02 * d2);
            assert!((fit.c_duality - 1.0).abs() <= 0.01);
            assert!(fit.holds_on_all_pairs());
            assert_eq!(fit.pair_count, 36);
        }
    }

    #[test]
    fn log_radial_fit_holds_on_every_pair() {
        let g = Grid::new(1, -5, 3, 2048).unwrap();
        let e = make_exponent(Descriptor::LogRadial { a: 2.0, b: 1.0 }, &g, ExponentMode::Lebesgue).unwrap();
        let fit = fit_izuki(&e).unwrap();
        assert!(fit.delta1 > 0.0 && fit.delta1 < 1.0);
        assert!(fit.delta2 > 0.0 && fit.delta2 < 1.0);
        assert!(fit.c1 <= 3.0 && fit.c2 <= 3.0);
        assert!(fit.holds_on_all_pairs());
        assert!(fit.c_duality >= 0.9);
    }

    #[test]
    fn too_few_pairs() {
        let g = Grid::new(1, 0, 1, 16).unwrap();
        let e = Exponent::constant(2.0, &g, ExponentMode::Lebesgue).unwrap();
        assert!(matches!(fit_izuki(&e), Err(Error::InsufficientData(_))));
        let one = Exponent::constant(1.0, &g, ExponentMode::Lebesgue).unwrap();
        assert!(matches!(fit_izuki(&one), Err(Error::Domain(_))));
    }
}
