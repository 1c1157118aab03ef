//! Central `(alpha(.), p(.))`-atoms, atomic synthesis and the coefficient
//! functional of a decomposition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{alpha_at_radius, Exponent};
use crate::grid::{Grid, GridFunction};
use crate::lebesgue::norm_value;
use crate::linalg::cholesky_solve;
use crate::scalar::{from_i64, from_usize, lit, pow2, Real};

/// Relative tolerance of the norm solves used to rescale and verify atoms.
const ATOM_NORM_TOL: f64 = 1e-12;
/// Rescaling margin below the target norm.
const NORM_MARGIN: f64 = 1e-9;
/// Verification slack on the norm condition.
pub const NORM_CHECK_TOL: f64 = 1e-6;
/// Verification bound on the L1-normalized moment residuals.
pub const MOMENT_CHECK_TOL: f64 = 1e-8;
const SEED_RETRIES: u64 = 8;
/// Degree of the random polynomial modulating the bump.
const PROFILE_DEGREE: u32 = 3;

/// A central atom together with the data needed to re-check it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct AtomSpec<T> {
    /// Support radius exponent: `supp a` lies in `B(0, 2^r)`.
    pub r: i32,
    /// Moment order: `int a(x) x^beta dx = 0` for `|beta| <= s`.
    pub s: u32,
    pub limited_type: bool,
    /// The seed that produced the atom, after any degenerate-seed retries.
    pub seed: u64,
    pub alpha_r: T,
    /// `|B(0, 2^r)|^{-alpha_r / n}` with the grid measure of the ball.
    pub target_norm: T,
    pub function: GridFunction<T>,
    /// `|int a x^beta| / ||a||_1` in the order of [`multi_indices`].
    pub moment_residuals: Vec<T>,
    pub norm_achieved: T,
}

/// Outcome of re-checking the three atom conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomReport<T> {
    pub support_violations: usize,
    pub norm_ratio: T,
    pub max_moment_residual: T,
    pub support_ok: bool,
    pub norm_ok: bool,
    pub moments_ok: bool,
}

impl<T> AtomReport<T> {
    pub fn passed(&self) -> bool {
        self.support_ok && self.norm_ok && self.moments_ok
    }
}

/// Multi-indices `beta` with `|beta| <= s`, ordered by total degree and then
/// by decreasing first component. In 1D the second component is zero.
pub fn multi_indices(dim: usize, s: u32) -> Vec<[u32; 2]> {
    let mut out = Vec::new();
    for d in 0..=s {
        if dim == 1 {
            out.push([d, 0]);
        } else {
            for a in (0..=d).rev() {
                out.push([a, d - a]);
            }
        }
    }
    out
}

/// `s = max(0, floor(alpha_r - n * delta2))`.
pub fn default_moment_order<T: Real>(alpha_r: T, dim: usize, delta2: T) -> u32 {
    let v = (alpha_r - from_usize::<T>(dim) * delta2).floor();
    if v > T::zero() {
        v.to_u32().unwrap_or(u32::MAX)
    } else {
        0
    }
}

fn monomial<T: Real>([x, y]: [T; 2], [a, b]: [u32; 2]) -> T {
    x.powi(a as i32) * y.powi(b as i32)
}

fn support_cells<T: Real>(grid: &Grid<T>, r: i32) -> Vec<usize> {
    let radius = pow2::<T>(r);
    (0..grid.cell_count()).filter(|&i| grid.radius(i) <= radius).collect()
}

/// `|int f x^beta| / ||f||_1` for each multi-index.
fn moment_residuals<T: Real>(f: &GridFunction<T>, s: u32) -> Vec<T> {
    let grid = f.grid();
    let l1: T = f.values().iter().map(|v| v.abs()).sum();
    multi_indices(grid.dim(), s)
        .into_iter()
        .map(|beta| {
            let m: T = f
                .values()
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, &v)| v * monomial(grid.center(i), beta))
                .sum();
            if l1.is_zero() {
                T::zero()
            } else {
                m.abs() / l1
            }
        })
        .collect()
}

/// Removes the component of `values` (restricted to `cells`) lying in the
/// span of the scaled monomials `(x / R)^beta`, `|beta| <= s`.
fn project_out_moments<T: Real>(grid: &Grid<T>, cells: &[usize], radius: T, s: u32, values: &mut [T]) -> Result<()> {
    let betas = multi_indices(grid.dim(), s);
    let k = betas.len();
    let basis: Vec<Vec<T>> = cells
        .iter()
        .map(|&i| {
            let [x, y] = grid.center(i);
            let z = [x / radius, y / radius];
            betas.iter().map(|&b| monomial(z, b)).collect()
        })
        .collect();
    let mut gram = vec![T::zero(); k * k];
    for row in &basis {
        for a in 0..k {
            for b in 0..k {
                gram[a * k + b] = gram[a * k + b] + row[a] * row[b];
            }
        }
    }
    let mut rhs = vec![T::zero(); k];
    for (row, &i) in basis.iter().zip(cells) {
        for a in 0..k {
            rhs[a] = rhs[a] + row[a] * values[i];
        }
    }
    let coef = cholesky_solve(&gram, &rhs)?;
    for (row, &i) in basis.iter().zip(cells) {
        let fit: T = row.iter().zip(&coef).map(|(&m, &c)| m * c).sum();
        values[i] = values[i] - fit;
    }
    Ok(())
}

/// Radial `cos^2(pi |x| / (2R))` times a seeded cubic in `x / R`. The
/// coefficients depend only on the seed, so the profile is the same function
/// at every resolution.
fn seeded_profile<T: Real>(grid: &Grid<T>, cells: &[usize], radius: T, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let betas = multi_indices(grid.dim(), PROFILE_DEGREE);
    let coef: Vec<T> = betas.iter().map(|_| lit(rng.gen_range(-1.0..1.0))).collect();
    let mut values = vec![T::zero(); grid.cell_count()];
    let half_pi = T::FRAC_PI_2();
    for &i in cells {
        let [x, y] = grid.center(i);
        let z = [x / radius, y / radius];
        let rho = grid.radius(i) / radius;
        let bump = (half_pi * rho).cos().powi(2);
        let poly: T = betas.iter().zip(&coef).map(|(&b, &c)| c * monomial(z, b)).sum();
        values[i] = bump * poly;
    }
    values
}

/// Builds a central atom supported in `B(0, 2^r)` with vanishing moments up to
/// order `s` and `L^{p(.)}` norm just below `|B(0, 2^r)|^{-alpha_r / n}`.
pub fn make_central_atom<T: Real>(
    grid: &Grid<T>,
    r: i32,
    p: &Exponent<T>,
    alpha: &Exponent<T>,
    s: u32,
    seed: u64,
) -> Result<AtomSpec<T>> {
    build_atom(grid, r, p, alpha, s, seed, false)
}

/// The limited-type variant, which requires `r >= 1`.
pub fn make_limited_atom<T: Real>(
    grid: &Grid<T>,
    r: i32,
    p: &Exponent<T>,
    alpha: &Exponent<T>,
    s: u32,
    seed: u64,
) -> Result<AtomSpec<T>> {
    if r < 1 {
        return Err(Error::Range {
            what: "limited-type atom radius exponent",
            value: r as i64,
            min: 1,
            max: grid.l_max() as i64 - 1,
        });
    }
    build_atom(grid, r, p, alpha, s, seed, true)
}

fn build_atom<T: Real>(
    grid: &Grid<T>,
    r: i32,
    p: &Exponent<T>,
    alpha: &Exponent<T>,
    s: u32,
    seed: u64,
    limited_type: bool,
) -> Result<AtomSpec<T>> {
    grid.same_as(p.grid())?;
    grid.same_as(alpha.grid())?;
    if r <= grid.l_min() || r > grid.l_max() - 1 {
        return Err(Error::Range {
            what: "atom radius exponent",
            value: r as i64,
            min: grid.l_min() as i64 + 1,
            max: grid.l_max() as i64 - 1,
        });
    }
    let radius = pow2::<T>(r);
    let cells = support_cells(grid, r);
    let ball_measure = from_usize::<T>(cells.len()) * grid.cell_volume();
    let alpha_r = alpha_at_radius(alpha, from_i64(r as i64));
    let target_norm = ball_measure.powf(-alpha_r / from_usize::<T>(grid.dim()));
    let tol = lit::<T>(ATOM_NORM_TOL).max(T::tolerance_floor());

    for attempt in 0..SEED_RETRIES {
        let used = seed.wrapping_add(attempt);
        let mut values = seeded_profile(grid, &cells, radius, used);
        let before = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        // a second pass removes the round-off left by the first
        project_out_moments(grid, &cells, radius, s, &mut values)?;
        project_out_moments(grid, &cells, radius, s, &mut values)?;
        let after = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if !(after > lit::<T>(1e-8) * before) {
            continue;
        }
        let f = GridFunction::new(*grid, values)?;
        let norm = norm_value(&f, p, tol)?;
        let f = f.scale(target_norm * (T::one() - lit(NORM_MARGIN)) / norm);
        let norm_achieved = norm_value(&f, p, tol)?;
        let moment_residuals = moment_residuals(&f, s);
        return Ok(AtomSpec {
            r,
            s,
            limited_type,
            seed: used,
            alpha_r,
            target_norm,
            function: f,
            moment_residuals,
            norm_achieved,
        });
    }
    Err(Error::Atom(format!(
        "moment projection annihilated seeds {seed}..{} (r = {r}, s = {s})",
        seed.wrapping_add(SEED_RETRIES - 1)
    )))
}

/// Re-checks support, norm and moment conditions of `a` against `p` and `alpha`.
pub fn verify_atom<T: Real>(a: &AtomSpec<T>, p: &Exponent<T>, alpha: &Exponent<T>) -> Result<AtomReport<T>> {
    let grid = a.function.grid();
    grid.same_as(p.grid())?;
    grid.same_as(alpha.grid())?;
    let radius = pow2::<T>(a.r);
    let mut inside = 0usize;
    let mut support_violations = 0usize;
    for (i, v) in a.function.values().iter().enumerate() {
        if grid.radius(i) <= radius {
            inside += 1;
        } else if !v.is_zero() {
            support_violations += 1;
        }
    }
    let ball_measure = from_usize::<T>(inside) * grid.cell_volume();
    let alpha_r = alpha_at_radius(alpha, from_i64(a.r as i64));
    let target = ball_measure.powf(-alpha_r / from_usize::<T>(grid.dim()));
    let tol = lit::<T>(ATOM_NORM_TOL).max(T::tolerance_floor());
    let norm_ratio = norm_value(&a.function, p, tol)? / target;
    let max_moment_residual = moment_residuals(&a.function, a.s)
        .into_iter()
        .fold(T::zero(), T::max);
    Ok(AtomReport {
        support_violations,
        norm_ratio,
        max_moment_residual,
        support_ok: support_violations == 0 && (!a.limited_type || a.r >= 1),
        norm_ok: norm_ratio <= T::one() + lit(NORM_CHECK_TOL),
        moments_ok: max_moment_residual <= lit(MOMENT_CHECK_TOL),
    })
}

/// One term `lambda_j * a_j` of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Term<T> {
    pub j: i32,
    pub coefficient: T,
    pub atom: AtomSpec<T>,
}

/// A finite atomic decomposition `f = sum_j lambda_j a_j`, atom `a_j` supported in `B_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Decomposition<T> {
    pub grid: Grid<T>,
    pub terms: Vec<Term<T>>,
    pub q1: T,
    pub lambda: T,
}

impl<T: Real> Decomposition<T> {
    pub fn new(grid: Grid<T>, terms: Vec<Term<T>>, q1: T, lambda: T) -> Result<Self> {
        let d = Self { grid, terms, q1, lambda };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q1 > T::zero()) || !self.q1.is_finite() {
            return Err(Error::Domain(format!("q1 = {} must be positive and finite", self.q1)));
        }
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(Error::Domain(format!("lambda = {} must be finite and >= 0", self.lambda)));
        }
        for t in &self.terms {
            self.grid.same_as(t.atom.function.grid())?;
            if t.atom.r != t.j {
                return Err(Error::Domain(format!(
                    "atom of term j = {} is supported in B_{}, not B_{}",
                    t.j, t.atom.r, t.j
                )));
            }
            if !t.coefficient.is_finite() {
                return Err(Error::Domain(format!("non-finite coefficient at j = {}", t.j)));
            }
        }
        Ok(())
    }

    pub fn coefficients(&self) -> Vec<(i32, T)> {
        self.terms.iter().map(|t| (t.j, t.coefficient)).collect()
    }
}

/// `sum_j lambda_j a_j`, accumulated in ascending `j`.
pub fn synthesize<T: Real>(d: &Decomposition<T>) -> Result<GridFunction<T>> {
    d.validate()?;
    let mut order: Vec<&Term<T>> = d.terms.iter().collect();
    order.sort_by_key(|t| t.j);
    let mut acc = vec![T::zero(); d.grid.cell_count()];
    for t in order {
        for (s, &v) in acc.iter_mut().zip(t.atom.function.values()) {
            *s = *s + t.coefficient * v;
        }
    }
    GridFunction::new(d.grid, acc)
}

/// The coefficient functional and its rooted quasi-norm counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFunctional<T> {
    /// `max_L 2^{-L lambda} sum_{j <= L} |lambda_j|^q1`.
    pub big_lambda: T,
    /// `max_L 2^{-L lambda} (sum_{j <= L} |lambda_j|^q1)^{1/q1}`.
    pub rooted: T,
}

/// Both coefficient functionals over `L in [l_min, l_max]`.
pub fn coefficient_functional<T: Real>(
    coefficients: &[(i32, T)],
    q1: T,
    lambda: T,
    l_min: i32,
    l_max: i32,
) -> Result<CoefficientFunctional<T>> {
    if !(q1 > T::zero()) {
        return Err(Error::Domain(format!("q1 = {q1} must be positive")));
    }
    let mut big_lambda = T::zero();
    let mut rooted = T::zero();
    for big_l in l_min..=l_max {
        let sum: T = coefficients
            .iter()
            .filter(|(j, _)| *j <= big_l)
            .map(|(_, c)| c.abs().powf(q1))
            .sum();
        let damp = (-from_i64::<T>(big_l as i64) * lambda).exp2();
        big_lambda = big_lambda.max(damp * sum);
        rooted = rooted.max(damp * sum.powf(q1.recip()));
    }
    Ok(CoefficientFunctional { big_lambda, rooted })
}

/// [`coefficient_functional`] of a decomposition over its grid's dyadic range.
pub fn coefficient_lambda<T: Real>(d: &Decomposition<T>) -> Result<CoefficientFunctional<T>> {
    coefficient_functional(&d.coefficients(), d.q1, d.lambda, d.grid.l_min(), d.grid.l_max())
}
