//! Variable exponents `p(.)` (Lebesgue) and `alpha(.)` (Herz weights):
//! closed-form radial descriptors, tabulated samples, conjugates, and
//! log-Hölder diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{shell_indices, Grid};
use crate::scalar::{lit, Real};

/// Symbolic form of an exponent. All closed forms are radial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Descriptor<T> {
    /// `c` everywhere.
    Constant { value: T },
    /// `a + b / log(e + |x|)`: equals `a + b` at the origin and tends to `a`.
    LogRadial { a: T, b: T },
    /// `inner` for `|x| <= radius - width/2`, `outer` for `|x| >= radius + width/2`,
    /// joined by a C-infinity step. `width = 0` gives a sharp jump at `radius`
    /// (the jump point belongs to the inner value).
    TwoLevel {
        inner: T,
        outer: T,
        radius: T,
        width: T,
    },
    /// Samples at the cell centres of the grid, in flat index order.
    Table { values: Vec<T> },
    /// Pointwise conjugate `p / (p - 1)` of another descriptor.
    Conjugate { of: Box<Descriptor<T>> },
    /// `1 / (1/p - shift)`, the target exponent of a fractional integral.
    Sobolev { of: Box<Descriptor<T>>, shift: T },
}

/// Smooth step on `[0, 1]`: 0 at `t <= 0`, 1 at `t >= 1`, C-infinity everywhere.
fn smooth_step<T: Real>(t: T) -> T {
    let psi = |s: T| {
        if s <= T::zero() {
            T::zero()
        } else {
            (-s.recip()).exp()
        }
    };
    if t <= T::zero() {
        return T::zero();
    }
    if t >= T::one() {
        return T::one();
    }
    let a = psi(t);
    a / (a + psi(T::one() - t))
}

fn conj<T: Real>(p: T) -> T {
    p / (p - T::one())
}

impl<T: Real> Descriptor<T> {
    /// Value at radius `rho`, or `None` for tabulated data.
    pub fn radial_value(&self, rho: T) -> Option<T> {
        match self {
            Self::Constant { value } => Some(*value),
            Self::LogRadial { a, b } => Some(*a + *b / (T::E() + rho).ln()),
            Self::TwoLevel {
                inner,
                outer,
                radius,
                width,
            } => {
                let t = if width.is_zero() {
                    if rho <= *radius {
                        T::zero()
                    } else {
                        T::one()
                    }
                } else {
                    smooth_step((rho - (*radius - *width * lit(0.5))) / *width)
                };
                Some(*inner + (*outer - *inner) * t)
            }
            Self::Table { .. } => None,
            Self::Conjugate { of } => of.radial_value(rho).map(conj),
            Self::Sobolev { of, shift } => of.radial_value(rho).map(|p| (p.recip() - *shift).recip()),
        }
    }

    /// Limit as `|x| -> infinity`, or `None` for tabulated data.
    pub fn limit_at_infinity(&self) -> Option<T> {
        match self {
            Self::Constant { value } => Some(*value),
            Self::LogRadial { a, .. } => Some(*a),
            Self::TwoLevel { outer, .. } => Some(*outer),
            Self::Table { .. } => None,
            Self::Conjugate { of } => of.limit_at_infinity().map(conj),
            Self::Sobolev { of, shift } => of.limit_at_infinity().map(|p| (p.recip() - *shift).recip()),
        }
    }
}

/// Which hypothesis the samples must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMode {
    /// `1 <= p(x) < infinity`.
    Lebesgue,
    /// Any bounded real function (Herz weight `alpha(.)`).
    Herz,
}

/// A sampled variable exponent with cached extremes and limits.
///
/// `p_minus`/`p_plus` are the extremes of the samples together with the
/// origin and infinity values, so that the essential range of a closed-form
/// exponent is not understated by the finite sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exponent<T> {
    descriptor: Descriptor<T>,
    mode: ExponentMode,
    grid: Grid<T>,
    samples: Vec<T>,
    p_minus: T,
    p_plus: T,
    value_at_origin: T,
    value_at_infinity: T,
}

fn check_values<T: Real>(mode: ExponentMode, values: impl IntoIterator<Item = T>) -> Result<()> {
    for (i, v) in values.into_iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite exponent value at entry {i}")));
        }
        if mode == ExponentMode::Lebesgue && v < T::one() {
            return Err(Error::Domain(format!(
                "Lebesgue exponent {v} < 1 at entry {i}"
            )));
        }
    }
    Ok(())
}

/// Samples `descriptor` on `grid` and validates it for `mode`.
pub fn make_exponent<T: Real>(
    descriptor: Descriptor<T>,
    grid: &Grid<T>,
    mode: ExponentMode,
) -> Result<Exponent<T>> {
    let (samples, origin, infinity) = match &descriptor {
        Descriptor::Table { values } => {
            if values.len() != grid.cell_count() {
                return Err(Error::Shape(format!(
                    "table has {} values for {} cells",
                    values.len(),
                    grid.cell_count()
                )));
            }
            check_values(mode, values.iter().copied())?;
            (values.clone(), table_origin(grid, values), table_infinity(grid, values))
        }
        d => {
            let samples: Vec<T> = (0..grid.cell_count())
                .map(|i| d.radial_value(grid.radius(i)).expect("closed form"))
                .collect();
            let origin = d.radial_value(T::zero()).expect("closed form");
            let infinity = d.limit_at_infinity().expect("closed form");
            (samples, origin, infinity)
        }
    };
    Exponent::from_parts(descriptor, mode, *grid, samples, origin, infinity)
}

/// Mean of the samples on the cells closest to the origin.
fn table_origin<T: Real>(grid: &Grid<T>, values: &[T]) -> T {
    let rmin = (0..grid.cell_count())
        .map(|i| grid.radius(i))
        .fold(T::infinity(), T::min);
    let tol = grid.spacing() * lit(1e-9);
    let (sum, n) = (0..grid.cell_count())
        .filter(|&i| grid.radius(i) <= rmin + tol)
        .fold((T::zero(), 0usize), |(s, n), i| (s + values[i], n + 1));
    sum / T::from_usize(n).unwrap()
}

/// Mean of the samples on the outermost annulus `F_{l_max}`.
fn table_infinity<T: Real>(grid: &Grid<T>, values: &[T]) -> T {
    let idx = shell_indices(grid, grid.l_max(), false);
    let sum: T = idx.iter().map(|&i| values[i]).sum();
    sum / T::from_usize(idx.len()).unwrap()
}

impl<T: Real> Exponent<T> {
    fn from_parts(
        descriptor: Descriptor<T>,
        mode: ExponentMode,
        grid: Grid<T>,
        samples: Vec<T>,
        value_at_origin: T,
        value_at_infinity: T,
    ) -> Result<Self> {
        check_values(mode, samples.iter().copied())?;
        check_values(mode, [value_at_origin, value_at_infinity])?;
        let extremes = samples
            .iter()
            .copied()
            .chain([value_at_origin, value_at_infinity]);
        let (p_minus, p_plus) = extremes.fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        Ok(Self {
            descriptor,
            mode,
            grid,
            samples,
            p_minus,
            p_plus,
            value_at_origin,
            value_at_infinity,
        })
    }

    pub fn constant(value: T, grid: &Grid<T>, mode: ExponentMode) -> Result<Self> {
        make_exponent(Descriptor::Constant { value }, grid, mode)
    }

    pub fn descriptor(&self) -> &Descriptor<T> {
        &self.descriptor
    }

    pub fn mode(&self) -> ExponentMode {
        self.mode
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn p_minus(&self) -> T {
        self.p_minus
    }

    pub fn p_plus(&self) -> T {
        self.p_plus
    }

    pub fn value_at_origin(&self) -> T {
        self.value_at_origin
    }

    pub fn value_at_infinity(&self) -> T {
        self.value_at_infinity
    }

    pub fn is_constant(&self) -> bool {
        self.p_minus == self.p_plus
    }

    /// `r_p = 1 + 1/p_minus - 1/p_plus`, the generalized Hölder constant.
    pub fn holder_constant(&self) -> T {
        T::one() + self.p_minus.recip() - self.p_plus.recip()
    }

    /// Applies a pointwise map to samples and limits, producing a new exponent.
    fn derive(&self, descriptor: Descriptor<T>, mode: ExponentMode, f: impl Fn(T) -> T) -> Result<Self> {
        Self::from_parts(
            descriptor,
            mode,
            self.grid,
            self.samples.iter().map(|&v| f(v)).collect(),
            f(self.value_at_origin),
            f(self.value_at_infinity),
        )
    }

    /// The target exponent `p2` with `1/p2 = 1/p - shift` at every sample.
    pub fn sobolev(&self, shift: T) -> Result<Self> {
        if self.mode != ExponentMode::Lebesgue {
            return Err(Error::Domain("Sobolev exponent of a Herz-mode exponent".into()));
        }
        let check = |what: String, p: T| {
            if p.recip() - shift <= T::zero() {
                Err(Error::Domain(format!(
                    "1/p - beta/n = {} <= 0 at {what} (p = {p}, beta/n = {shift})",
                    p.recip() - shift
                )))
            } else {
                Ok(())
            }
        };
        for (i, &p) in self.samples.iter().enumerate() {
            check(format!("sample {i}"), p)?;
        }
        check("the origin".into(), self.value_at_origin)?;
        check("infinity".into(), self.value_at_infinity)?;
        check("p_plus".into(), self.p_plus)?;
        let descriptor = Descriptor::Sobolev {
            of: Box::new(self.descriptor.clone()),
            shift,
        };
        self.derive(descriptor, ExponentMode::Lebesgue, |p| (p.recip() - shift).recip())
    }
}

/// Pointwise conjugate exponent `p' = p / (p - 1)`.
pub fn conjugate<T: Real>(p: &Exponent<T>) -> Result<Exponent<T>> {
    if p.mode != ExponentMode::Lebesgue {
        return Err(Error::Domain("conjugate of a Herz-mode exponent".into()));
    }
    if p.p_minus <= T::one() {
        return Err(Error::Domain(format!(
            "p_minus = {} <= 1: the conjugate exponent is unbounded",
            p.p_minus
        )));
    }
    let descriptor = match &p.descriptor {
        Descriptor::Conjugate { of } => (**of).clone(),
        d => Descriptor::Conjugate { of: Box::new(d.clone()) },
    };
    p.derive(descriptor, ExponentMode::Lebesgue, conj)
}

/// `alpha_r`: the origin value for `r < 1`, the value at infinity otherwise.
pub fn alpha_at_radius<T: Real>(alpha: &Exponent<T>, r: T) -> T {
    if r < T::one() {
        alpha.value_at_origin
    } else {
        alpha.value_at_infinity
    }
}

/// Empirical log-Hölder constants of an exponent over a finite set of samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogHolderDiagnostics<T> {
    pub c_local: T,
    pub c_origin: T,
    pub c_infinity: T,
    pub cap: T,
    pub pass_local: bool,
    pub pass_origin: bool,
    pub pass_infinity: bool,
}

pub const DEFAULT_LOG_HOLDER_CAP: f64 = 10.0;
const PAIR_SEED: u64 = 0x6c6f_6748_6f6c_6465;

/// Fits the smallest constants for local, origin and infinity log-Hölder
/// continuity over all axis-neighbour pairs plus `pair_budget` seeded random
/// pairs (at least 1000).
pub fn log_holder_diagnostics<T: Real>(
    alpha: &Exponent<T>,
    pair_budget: usize,
    cap: T,
) -> LogHolderDiagnostics<T> {
    let grid = alpha.grid;
    let s = &alpha.samples;
    let n = grid.points_per_axis();
    let cells = grid.cell_count();
    let half = lit::<T>(0.5);

    let local = |i: usize, j: usize| -> T {
        let [xi, yi] = grid.center(i);
        let [xj, yj] = grid.center(j);
        let d = (xi - xj).hypot(yi - yj);
        if d > half || d.is_zero() {
            return T::zero();
        }
        (s[i] - s[j]).abs() * (-d.ln())
    };

    let mut c_local = T::zero();
    for i in 0..cells {
        if grid.dim() == 1 {
            if i + 1 < n {
                c_local = c_local.max(local(i, i + 1));
            }
        } else {
            let (row, col) = (i / n, i % n);
            if col + 1 < n {
                c_local = c_local.max(local(i, i + 1));
            }
            if row + 1 < n {
                c_local = c_local.max(local(i, i + n));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SEED);
    for _ in 0..pair_budget.max(1000) {
        let i = rng.gen_range(0..cells);
        let j = rng.gen_range(0..cells);
        c_local = c_local.max(local(i, j));
    }

    let mut c_origin = T::zero();
    let mut c_infinity = T::zero();
    for (i, &a) in s.iter().enumerate() {
        let r = grid.radius(i);
        c_origin = c_origin.max((a - alpha.value_at_origin).abs() * (T::E() + r.recip()).ln());
        c_infinity = c_infinity.max((a - alpha.value_at_infinity).abs() * (T::E() + r).ln());
    }

    LogHolderDiagnostics {
        c_local,
        c_origin,
        c_infinity,
        cap,
        pass_local: c_local <= cap,
        pass_origin: c_origin <= cap,
        pass_infinity: c_infinity <= cap,
    }
}
