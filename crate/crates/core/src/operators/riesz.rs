use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::kernel::KernelTable;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::scalar::{from_usize, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RieszMethod {
    Direct,
    Fft,
}

/// Order and evaluation strategy of the Riesz potential `I^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszParams<T> {
    pub beta: T,
    pub method: RieszMethod,
    /// Zero-padding multiple of the FFT path, at least 2.
    pub pad_factor: usize,
}

impl<T: Real> RieszParams<T> {
    pub fn new(beta: T, method: RieszMethod) -> Self {
        Self {
            beta,
            method,
            pad_factor: 2,
        }
    }
}

/// `I^beta f(x) = int f(y) |x - y|^{beta - n} dy` on a fixed grid.
///
/// Sources are frozen at their cell value and integrated exactly against the
/// kernel over each cell (the self cell included), so the direct and FFT
/// paths evaluate the same finite sum.
#[derive(Debug, Clone)]
pub struct RieszOperator<T> {
    grid: Grid<T>,
    kernel: KernelTable<T>,
}

impl<T: Real> RieszOperator<T> {
    pub fn new(grid: &Grid<T>, beta: T) -> Result<Self> {
        let n = grid.dim();
        if !(beta > T::zero() && beta < from_usize::<T>(n)) {
            return Err(Error::Domain(format!("Riesz order beta = {beta} must lie in (0, {n})")));
        }
        Ok(Self {
            grid: *grid,
            kernel: KernelTable::new(grid, beta),
        })
    }

    pub fn beta(&self) -> T {
        self.kernel.beta()
    }

    pub fn kernel(&self) -> &KernelTable<T> {
        &self.kernel
    }

    pub fn apply(&self, f: &GridFunction<T>, params: &RieszParams<T>) -> Result<GridFunction<T>> {
        match params.method {
            RieszMethod::Direct => self.apply_direct(f),
            RieszMethod::Fft => self.apply_fft(f, params.pad_factor),
        }
    }

    /// Direct summation over the nonzero sources.
    pub fn apply_direct(&self, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.grid.same_as(f.grid())?;
        let n = self.grid.points_per_axis();
        let sources: Vec<(usize, T)> = f
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, &v)| (i, v))
            .collect();
        let k = &self.kernel;
        let values: Vec<T> = if self.grid.dim() == 1 {
            (0..n)
                .into_par_iter()
                .map(|i| {
                    sources
                        .iter()
                        .map(|&(j, v)| v * k.weight(i.abs_diff(j), 0))
                        .sum()
                })
                .collect()
        } else {
            (0..n * n)
                .into_par_iter()
                .map(|t| {
                    let (ti, tj) = (t / n, t % n);
                    sources
                        .iter()
                        .map(|&(s, v)| v * k.weight(ti.abs_diff(s / n), tj.abs_diff(s % n)))
                        .sum()
                })
                .collect()
        };
        GridFunction::new(self.grid, values)
    }

    /// Zero-padded circular convolution on a `pad_factor`-times larger grid.
    pub fn apply_fft(&self, f: &GridFunction<T>, pad_factor: usize) -> Result<GridFunction<T>> {
        self.grid.same_as(f.grid())?;
        if pad_factor < 2 {
            return Err(Error::Domain(format!("pad_factor = {pad_factor} must be at least 2")));
        }
        let n = self.grid.points_per_axis();
        let m = n * pad_factor;
        let mut planner = FftPlanner::<T>::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let zero = Complex::new(T::zero(), T::zero());
        let w = self.kernel.raw();

        if self.grid.dim() == 1 {
            let mut kern = vec![zero; m];
            for k in 0..n {
                kern[k] = Complex::new(w[k], T::zero());
                if k > 0 {
                    kern[m - k] = kern[k];
                }
            }
            let mut sig = vec![zero; m];
            for (s, &v) in sig.iter_mut().zip(f.values()) {
                *s = Complex::new(v, T::zero());
            }
            forward.process(&mut kern);
            forward.process(&mut sig);
            for (s, k) in sig.iter_mut().zip(&kern) {
                *s = *s * *k;
            }
            inverse.process(&mut sig);
            let scale = from_usize::<T>(m).recip();
            let values = sig[..n].iter().map(|c| c.re * scale).collect();
            return GridFunction::new(self.grid, values);
        }

        let mut kern = vec![zero; m * m];
        for a in 0..n {
            for b in 0..n {
                let v = Complex::new(w[a * n + b], T::zero());
                let rows = if a == 0 { vec![0] } else { vec![a, m - a] };
                let cols = if b == 0 { vec![0] } else { vec![b, m - b] };
                for &r in &rows {
                    for &c in &cols {
                        kern[r * m + c] = v;
                    }
                }
            }
        }
        let mut sig = vec![zero; m * m];
        for i in 0..n {
            for j in 0..n {
                sig[i * m + j] = Complex::new(f.values()[i * n + j], T::zero());
            }
        }
        fft_2d(&mut kern, m, &forward);
        fft_2d(&mut sig, m, &forward);
        for (s, k) in sig.iter_mut().zip(&kern) {
            *s = *s * *k;
        }
        fft_2d(&mut sig, m, &inverse);
        let scale = from_usize::<T>(m * m).recip();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            values.extend(sig[i * m..i * m + n].iter().map(|c| c.re * scale));
        }
        GridFunction::new(self.grid, values)
    }
}

/// In-place 2D transform of a row-major `m x m` array: rows, then columns.
fn fft_2d<T: Real>(data: &mut [Complex<T>], m: usize, plan: &Arc<dyn Fft<T>>) {
    data.par_chunks_mut(m).for_each(|row| plan.process(row));
    let mut cols = vec![Complex::new(T::zero(), T::zero()); m * m];
    for i in 0..m {
        for j in 0..m {
            cols[j * m + i] = data[i * m + j];
        }
    }
    cols.par_chunks_mut(m).for_each(|col| plan.process(col));
    for i in 0..m {
        for j in 0..m {
            data[i * m + j] = cols[j * m + i];
        }
    }
}

/// `I^beta f` by direct summation.
pub fn riesz_direct<T: Real>(f: &GridFunction<T>, params: &RieszParams<T>) -> Result<GridFunction<T>> {
    RieszOperator::new(f.grid(), params.beta)?.apply_direct(f)
}

/// `I^beta f` through the zero-padded FFT convolution.
pub fn riesz_fft<T: Real>(f: &GridFunction<T>, params: &RieszParams<T>) -> Result<GridFunction<T>> {
    RieszOperator::new(f.grid(), params.beta)?.apply_fft(f, params.pad_factor)
}

/// `I^beta f` with the method selected in `params`.
pub fn riesz<T: Real>(f: &GridFunction<T>, params: &RieszParams<T>) -> Result<GridFunction<T>> {
    RieszOperator::new(f.grid(), params.beta)?.apply(f, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ball_mask;

    fn seeded(g: Grid<f64>, seed: u64) -> GridFunction<f64> {
        let s = seed as f64;
        GridFunction::from_fn(g, |[x, y]| {
            let r2 = x * x + y * y;
            if r2 < 4.0 {
                ((1.3 + s) * x).sin() + (0.7 * y + s).cos() * (4.0 - r2)
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn rejects_out_of_range_order() {
        let g = Grid::<f64>::new(1, -2, 2, 32).unwrap();
        assert!(RieszOperator::new(&g, 0.0).is_err());
        assert!(RieszOperator::new(&g, 1.0).is_err());
        let g2 = Grid::<f64>::new(2, -2, 2, 32).unwrap();
        assert!(RieszOperator::new(&g2, 1.5).is_ok());
        assert!(RieszOperator::new(&g2, 2.0).is_err());
        let f = GridFunction::zeros(g);
        let op = RieszOperator::new(&g, 0.5).unwrap();
        assert!(op.apply_fft(&f, 1).is_err());
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = Grid::<f64>::new(2, -2, 2, 32).unwrap();
        let op = RieszOperator::new(&g, 0.7).unwrap();
        let z = GridFunction::zeros(g);
        assert!(op.apply_direct(&z).unwrap().is_zero());
        assert!(op.apply_fft(&z, 2).unwrap().max_abs() < 1e-300);
    }

    #[test]
    fn direct_and_fft_agree_in_1d_and_2d() {
        for (dim, n, beta) in [(1, 1024, 0.3), (2, 48, 1.2)] {
            let g = Grid::<f64>::new(dim, -2, 2, n).unwrap();
            let op = RieszOperator::new(&g, beta).unwrap();
            for seed in 0..3 {
                let f = seeded(g, seed);
                let d = op.apply_direct(&f).unwrap();
                let q = op.apply_fft(&f, 2 + seed as usize).unwrap();
                let scale = d.max_abs();
                let dev = d.values().iter().zip(q.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(dev <= 1e-10 * scale, "dim {dim} seed {seed}: {dev}");
            }
        }
    }

    #[test]
    fn positivity_and_linearity() {
        let g = Grid::<f64>::new(1, -2, 2, 256).unwrap();
        let op = RieszOperator::new(&g, 0.4).unwrap();
        let a = ball_mask(&g, 0).unwrap();
        let b = seeded(g, 4);
        let ia = op.apply_direct(&a).unwrap();
        assert!(ia.values().iter().all(|&v| v > 0.0));
        let combo = op.apply_direct(&(&a.scale(2.5) + &b.scale(-0.75))).unwrap();
        let ib = op.apply_direct(&b).unwrap();
        let want = &ia.scale(2.5) + &ib.scale(-0.75);
        let scale = want.max_abs();
        for (x, y) in combo.values().iter().zip(want.values()) {
            assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn point_mass_reproduces_the_kernel() {
        let g = Grid::<f64>::new(2, -2, 1, 32).unwrap();
        let beta = 0.8;
        let op = RieszOperator::new(&g, beta).unwrap();
        let n = g.points_per_axis();
        let c = (n / 2) * n + n / 2;
        let mut f = GridFunction::zeros(g);
        f.values_mut()[c] = 1.0 / g.cell_volume();
        let out = op.apply_fft(&f, 2).unwrap();
        let [cx, cy] = g.center(c);
        for idx in [c + 5, c + 3 * n, c + 7 * n + 9] {
            let [x, y] = g.center(idx);
            let point = (x - cx).hypot(y - cy).powf(beta - 2.0);
            let rel = (out.values()[idx] - point).abs() / point;
            assert!(rel < 1e-2, "offset {} rel {rel}", idx - c);
        }
    }
}
