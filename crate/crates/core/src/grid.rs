//! Uniform cell-centred grids on the truncated box `[-2^l_max, 2^l_max]^n`
//! and the sampled functions living on them. Dyadic balls are
//! `B_l = {|x| <= 2^l}`, annuli `F_l = B_l \ B_{l-1}`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, pow2, Real};

/// A uniform grid of `points_per_axis^dim` cells covering the closed box of
/// half-width `2^l_max`. Values are sampled at cell centres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", bound(deserialize = "T: Real"))]
pub struct Grid<T> {
    dim: usize,
    l_min: i32,
    l_max: i32,
    points_per_axis: usize,
    #[serde(skip_serializing)]
    spacing: T,
    #[serde(skip_serializing)]
    cell_volume: T,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    dim: usize,
    l_min: i32,
    l_max: i32,
    points_per_axis: usize,
}

impl<T: Real> TryFrom<GridSpec> for Grid<T> {
    type Error = Error;

    fn try_from(s: GridSpec) -> Result<Self> {
        Grid::new(s.dim, s.l_min, s.l_max, s.points_per_axis)
    }
}

impl<T: Real> Grid<T> {
    pub fn new(dim: usize, l_min: i32, l_max: i32, points_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Domain(format!("dimension must be 1 or 2, got {dim}")));
        }
        if l_min >= l_max {
            return Err(Error::Domain(format!(
                "l_min ({l_min}) must be smaller than l_max ({l_max})"
            )));
        }
        if points_per_axis < 16 || points_per_axis % 2 != 0 {
            return Err(Error::Domain(format!(
                "points_per_axis must be even and >= 16, got {points_per_axis}"
            )));
        }
        let spacing = lit::<T>(2.0) * pow2::<T>(l_max) / from_usize::<T>(points_per_axis);
        Ok(Self {
            dim,
            l_min,
            l_max,
            points_per_axis,
            spacing,
            cell_volume: spacing.powi(dim as i32),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn l_min(&self) -> i32 {
        self.l_min
    }

    pub fn l_max(&self) -> i32 {
        self.l_max
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Cell width `h`.
    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn cell_volume(&self) -> T {
        self.cell_volume
    }

    pub fn half_width(&self) -> T {
        pow2(self.l_max)
    }

    /// Volume of the whole box, `(2 * 2^l_max)^n`.
    pub fn box_volume(&self) -> T {
        (lit::<T>(2.0) * self.half_width()).powi(self.dim as i32)
    }

    pub fn cell_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Same box and dyadic range with `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.dim, self.l_min, self.l_max, self.points_per_axis * factor)
    }

    /// Centre coordinate of cell `i` along one axis.
    #[inline]
    pub fn axis_coord(&self, i: usize) -> T {
        -self.half_width() + (from_usize::<T>(i) + lit(0.5)) * self.spacing
    }

    /// Cell centre of the flat index `idx`; the second component is zero in 1D.
    #[inline]
    pub fn center(&self, idx: usize) -> [T; 2] {
        if self.dim == 1 {
            [self.axis_coord(idx), T::zero()]
        } else {
            let n = self.points_per_axis;
            [self.axis_coord(idx / n), self.axis_coord(idx % n)]
        }
    }

    /// Euclidean norm of the cell centre.
    #[inline]
    pub fn radius(&self, idx: usize) -> T {
        let [x, y] = self.center(idx);
        x.hypot(y)
    }

    pub fn centers(&self) -> impl Iterator<Item = [T; 2]> + '_ {
        (0..self.cell_count()).map(move |i| self.center(i))
    }

    fn check_level(&self, what: &'static str, l: i32, min: i32, max: i32) -> Result<()> {
        if l < min || l > max {
            return Err(Error::Range {
                what,
                value: l as i64,
                min: min as i64,
                max: max as i64,
            });
        }
        Ok(())
    }

    pub(crate) fn same_as(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!("grid {self:?} differs from {other:?}")));
        }
        Ok(())
    }
}

/// A real-valued function sampled at the cell centres of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridFunction<T>", bound(deserialize = "T: Real"))]
pub struct GridFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
struct RawGridFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> TryFrom<RawGridFunction<T>> for GridFunction<T> {
    type Error = Error;

    fn try_from(raw: RawGridFunction<T>) -> Result<Self> {
        GridFunction::new(raw.grid, raw.values)
    }
}

impl<T: Real> GridFunction<T> {
    /// Wraps samples, rejecting wrong lengths and non-finite values.
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::Shape(format!(
                "{} samples for a grid of {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample at cell {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.cell_count()],
        }
    }

    pub fn constant(grid: Grid<T>, c: T) -> Self {
        Self {
            grid,
            values: vec![c; grid.cell_count()],
        }
    }

    /// Samples `f` at every cell centre. `f` receives `[x, y]` (with `y = 0` in 1D).
    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 2]) -> T) -> Result<Self> {
        let values = grid.centers().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Mutable access for in-place edits. Callers must keep samples finite.
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    /// Pointwise product; the grids must agree.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// Midpoint quadrature `cell_volume * sum(values)`.
    pub fn integrate(&self) -> T {
        integrate(self)
    }

    /// Number of cells with a nonzero sample.
    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }
}

impl<'a, T: Real> Add for &'a GridFunction<T> {
    type Output = GridFunction<T>;

    fn add(self, rhs: Self) -> GridFunction<T> {
        self.zip_with(rhs, |a, b| a + b).expect("grid mismatch in addition")
    }
}

impl<'a, T: Real> Sub for &'a GridFunction<T> {
    type Output = GridFunction<T>;

    fn sub(self, rhs: Self) -> GridFunction<T> {
        self.zip_with(rhs, |a, b| a - b).expect("grid mismatch in subtraction")
    }
}

impl<'a, T: Real> Mul<T> for &'a GridFunction<T> {
    type Output = GridFunction<T>;

    fn mul(self, c: T) -> GridFunction<T> {
        self.scale(c)
    }
}

fn indicator<T: Real>(grid: &Grid<T>, inside: impl Fn(T) -> bool) -> GridFunction<T> {
    let values = (0..grid.cell_count())
        .map(|i| if inside(grid.radius(i)) { T::one() } else { T::zero() })
        .collect();
    GridFunction { grid: *grid, values }
}

/// `chi_{B_l}` with the closed ball `|x| <= 2^l`; admissible for `l_min - 1 <= l <= l_max`.
pub fn ball_mask<T: Real>(grid: &Grid<T>, l: i32) -> Result<GridFunction<T>> {
    grid.check_level("ball level", l, grid.l_min - 1, grid.l_max)?;
    let r = pow2::<T>(l);
    Ok(indicator(grid, |rho| rho <= r))
}

/// `chi_{F_l}` for `F_l = B_l \ B_{l-1}`; admissible for `l_min <= l <= l_max`.
pub fn annulus_mask<T: Real>(grid: &Grid<T>, l: i32) -> Result<GridFunction<T>> {
    grid.check_level("annulus level", l, grid.l_min, grid.l_max)?;
    let (inner, outer) = (pow2::<T>(l - 1), pow2::<T>(l));
    Ok(indicator(grid, |rho| rho > inner && rho <= outer))
}

/// The non-negative-index mask: `chi_{B_0}` for `m = 0`, `chi_{F_m}` for `m >= 1`.
pub fn nonneg_mask<T: Real>(grid: &Grid<T>, m: u32) -> Result<GridFunction<T>> {
    let m = i32::try_from(m).unwrap_or(i32::MAX);
    grid.check_level("nonnegative mask index", m, 0, grid.l_max)?;
    if m == 0 {
        ball_mask(grid, 0)
    } else {
        annulus_mask(grid, m)
    }
}

/// Midpoint quadrature `cell_volume * sum(values)`.
pub fn integrate<T: Real>(f: &GridFunction<T>) -> T {
    f.grid.cell_volume * f.values.iter().copied().sum::<T>()
}

/// Indices of the cells lying in `F_l`, or in `B_l` when `whole_ball` is set.
pub(crate) fn shell_indices<T: Real>(grid: &Grid<T>, l: i32, whole_ball: bool) -> Vec<usize> {
    let outer = pow2::<T>(l);
    let inner = pow2::<T>(l - 1);
    (0..grid.cell_count())
        .filter(|&i| {
            let r = grid.radius(i);
            r <= outer && (whole_ball || r > inner)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g1() -> Grid<f64> {
        Grid::new(1, -3, 2, 64).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::<f64>::new(3, 0, 1, 16).is_err());
        assert!(Grid::<f64>::new(1, 1, 1, 16).is_err());
        assert!(Grid::<f64>::new(1, 0, 1, 15).is_err());
        assert!(Grid::<f64>::new(1, 0, 1, 8).is_err());
    }

    #[test]
    fn cell_centers_lie_inside_the_box() {
        let g = Grid::<f64>::new(2, -2, 1, 16).unwrap();
        let w = g.half_width();
        for [x, y] in g.centers() {
            assert!(x.abs() < w && y.abs() < w);
        }
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.cell_volume(), 0.0625);
    }

    #[test]
    fn outer_ball_is_whole_box_in_1d() {
        let g = g1();
        let m = ball_mask(&g, g.l_max()).unwrap();
        assert!(m.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn innermost_ball_can_be_empty() {
        // h = 16/16 = 1, nearest centre at 0.5 > 2^(l_min-1) = 0.25
        let g = Grid::<f64>::new(1, -1, 3, 16).unwrap();
        assert!(ball_mask(&g, -2).unwrap().is_zero());
    }

    #[test]
    fn out_of_range_levels() {
        let g = g1();
        assert!(matches!(ball_mask(&g, -5), Err(Error::Range { .. })));
        assert!(matches!(ball_mask(&g, 3), Err(Error::Range { .. })));
        assert!(annulus_mask(&g, -4).is_err());
        assert!(nonneg_mask(&g, 3).is_err());
    }

    #[test]
    fn disc_area_matches_lattice_count() {
        // 2^l = 8h with h = 1/16 on a 2D grid
        let g = Grid::<f64>::new(2, -3, 2, 128).unwrap();
        let h = g.spacing();
        assert_eq!(h, 1.0 / 16.0);
        let m = ball_mask(&g, -1).unwrap();
        let area = m.integrate();
        let disc = std::f64::consts::PI * (8.0 * h).powi(2);
        assert!((area - disc).abs() / disc < 0.15, "area {area} disc {disc}");
    }

    #[test]
    fn annulus_length_in_1d() {
        let g = Grid::<f64>::new(1, -3, 3, 1024).unwrap();
        let h = g.spacing();
        for l in -1..=3 {
            let len = annulus_mask(&g, l).unwrap().integrate();
            let want = 2.0 * (2f64.powi(l) - 2f64.powi(l - 1));
            assert!((len - want).abs() <= 2.0 * h);
        }
    }

    #[test]
    fn nonneg_masks_match_definition() {
        let g = g1();
        assert_eq!(nonneg_mask(&g, 0).unwrap(), ball_mask(&g, 0).unwrap());
        assert_eq!(nonneg_mask(&g, 2).unwrap(), annulus_mask(&g, 2).unwrap());
        let mut acc = GridFunction::zeros(g);
        for m in 0..=g.l_max() as u32 {
            acc = &acc + &nonneg_mask(&g, m).unwrap();
        }
        assert_eq!(acc, ball_mask(&g, g.l_max()).unwrap());
    }

    #[test]
    fn integrate_basics() {
        let g = Grid::<f64>::new(2, -1, 1, 32).unwrap();
        assert_eq!(GridFunction::zeros(g).integrate(), 0.0);
        assert_eq!(GridFunction::constant(g, 1.0).integrate(), 16.0);
        let g = Grid::<f64>::new(1, -4, 2, 512).unwrap();
        // 2^0 = 64 h
        let b = ball_mask(&g, 0).unwrap().integrate();
        assert!((b - 2.0).abs() <= g.spacing());
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = g1();
        let mut v = vec![0.0; g.cell_count()];
        v[3] = f64::NAN;
        assert!(matches!(GridFunction::new(g, v), Err(Error::Domain(_))));
        assert!(matches!(GridFunction::new(g, vec![0.0; 3]), Err(Error::Shape(_))));
    }

    #[test]
    fn serde_round_trip_validates() {
        let g = g1();
        let f = ball_mask(&g, 0).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let back: GridFunction<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let bad = r#"{"grid":{"dim":1,"l_min":0,"l_max":1,"points_per_axis":16},"values":[1.0]}"#;
        assert!(serde_json::from_str::<GridFunction<f64>>(bad).is_err());
    }

    fn grids() -> impl Strategy<Value = Grid<f64>> {
        (1usize..=2, -4i32..0, 1i32..4, 8usize..40)
            .prop_map(|(d, lo, hi, half)| Grid::new(d, lo, hi, 2 * half).unwrap())
    }

    proptest! {
        #[test]
        fn partition_and_monotonicity(g in grids()) {
            let mut acc = ball_mask(&g, g.l_min() - 1).unwrap();
            for l in g.l_min()..=g.l_max() {
                let a = annulus_mask(&g, l).unwrap();
                prop_assert!(a.values().iter().all(|&v| v == 0.0 || v == 1.0));
                let diff = &ball_mask(&g, l).unwrap() - &ball_mask(&g, l - 1).unwrap();
                prop_assert_eq!(&a, &diff);
                for l2 in g.l_min()..l {
                    let other = annulus_mask(&g, l2).unwrap();
                    prop_assert!(a.pointwise_mul(&other).unwrap().is_zero());
                }
                acc = &acc + &a;
            }
            prop_assert_eq!(acc, ball_mask(&g, g.l_max()).unwrap());
            for l in g.l_min() - 1..g.l_max() {
                let inner = ball_mask(&g, l).unwrap();
                let outer = ball_mask(&g, l + 1).unwrap();
                prop_assert!(inner.values().iter().zip(outer.values()).all(|(a, b)| a <= b));
            }
        }

        #[test]
        fn integrate_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, seed in 0u64..1000) {
            let g = Grid::<f64>::new(1, -2, 2, 64).unwrap();
            let f = GridFunction::from_fn(g, |[x, _]| (x * (seed as f64 + 1.0)).sin()).unwrap();
            let h = GridFunction::from_fn(g, |[x, _]| x * x - 1.0).unwrap();
            let lhs = (&f.scale(a) + &h.scale(b)).integrate();
            let rhs = a * f.integrate() + b * h.integrate();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs()) + a.abs() * 20.0 + b.abs() * 100.0));
        }
    }
}
