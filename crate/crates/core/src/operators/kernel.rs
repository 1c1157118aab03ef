//! Cell-integrated Riesz kernel `K(k) = int_{cell k} |z|^{beta - n} dz`,
//! tabulated by absolute cell offset.

use crate::grid::Grid;
use crate::quadrature::GaussLegendre;
use crate::scalar::{from_usize, lit, Real};

/// Kernel weights for every cell offset on a grid. In 1D entry `k` is the
/// weight for offset `±k`; in 2D entry `a * n + b` is the weight for offset
/// `(±a, ±b)`.
#[derive(Debug, Clone)]
pub struct KernelTable<T> {
    dim: usize,
    n: usize,
    beta: T,
    weights: Vec<T>,
}

impl<T: Real> KernelTable<T> {
    pub fn new(grid: &Grid<T>, beta: T) -> Self {
        let n = grid.points_per_axis();
        let h = grid.spacing();
        let weights = if grid.dim() == 1 {
            (0..n).map(|k| cell_integral_1d(k, h, beta)).collect()
        } else {
            table_2d(n, h, beta)
        };
        Self {
            dim: grid.dim(),
            n,
            beta,
            weights,
        }
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Weight for the (absolute) offset; `b` is ignored in 1D.
    #[inline]
    pub fn weight(&self, a: usize, b: usize) -> T {
        if self.dim == 1 {
            self.weights[a]
        } else {
            self.weights[a * self.n + b]
        }
    }

    /// The self-cell integral `S_self`.
    pub fn self_weight(&self) -> T {
        self.weights[0]
    }

    pub(crate) fn raw(&self) -> &[T] {
        &self.weights
    }
}

/// `int_{(k-1/2)h}^{(k+1/2)h} |z|^{beta-1} dz`, doubled-half-cell for `k = 0`.
fn cell_integral_1d<T: Real>(k: usize, h: T, beta: T) -> T {
    let half = h * lit(0.5);
    if k == 0 {
        return lit::<T>(2.0) * half.powf(beta) / beta;
    }
    let a = (from_usize::<T>(k) - lit(0.5)) * h;
    // (b^beta - a^beta) with b = a + h, written without cancellation
    a.powf(beta) * (beta * (h / a).ln_1p()).exp_m1() / beta
}

/// Exact integral of `|z|^{beta-2}` over the square `[-a, a]^2`:
/// `(8 / beta) a^beta int_0^{pi/4} sec^beta`.
pub(crate) fn square_integral_2d<T: Real>(half_width: T, beta: T) -> T {
    let rule = GaussLegendre::<T>::new(32);
    let angular = rule.integrate(T::zero(), T::FRAC_PI_4(), |t| t.cos().powf(-beta));
    lit::<T>(8.0) / beta * half_width.powf(beta) * angular
}

fn table_2d<T: Real>(n: usize, h: T, beta: T) -> Vec<T> {
    let fine = GaussLegendre::<T>::new(8);
    let coarse = GaussLegendre::<T>::new(6);
    let expo = (beta - lit(2.0)) * lit(0.5);
    let kernel = |x: T, y: T| (x * x + y * y).powf(expo);

    let cell = |a: usize, b: usize| -> T {
        if a == 0 && b == 0 {
            return square_integral_2d(h * lit(0.5), beta);
        }
        let x0 = (from_usize::<T>(a) - lit(0.5)) * h;
        let y0 = (from_usize::<T>(b) - lit(0.5)) * h;
        let (split, rule) = match a.max(b) {
            0..=2 => (8, &fine),
            3..=8 => (2, &fine),
            _ => (1, &coarse),
        };
        let sub = h / from_usize::<T>(split);
        let mut acc = T::zero();
        for i in 0..split {
            for j in 0..split {
                let ax = x0 + from_usize::<T>(i) * sub;
                let ay = y0 + from_usize::<T>(j) * sub;
                acc = acc + rule.integrate_2d(ax, ax + sub, ay, ay + sub, kernel);
            }
        }
        acc
    };

    let mut w = vec![T::zero(); n * n];
    for a in 0..n {
        for b in 0..=a {
            let v = cell(a, b);
            w[a * n + b] = v;
            w[b * n + a] = v;
        }
    }
    w
}
