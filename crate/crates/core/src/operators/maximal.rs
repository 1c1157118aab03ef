use rayon::prelude::*;

use crate::grid::{Grid, GridFunction};
use crate::scalar::{from_usize, Real};

/// Number of radii in the dyadic ladder `h * 2^k`, `k = 0..=ceil(log2(width / h))`.
fn ladder_len<T: Real>(grid: &Grid<T>) -> usize {
    let n = grid.points_per_axis();
    (usize::BITS - (n - 1).leading_zeros()) as usize + 1
}

/// Centred Hardy–Littlewood maximal function on the dyadic radius ladder,
/// normalized by `r^{-n}` (no ball-volume constant):
/// `M f(x) = max_r r^{-n} int_{|y - x| < r} |f(y)| dy`.
pub fn maximal_function<T: Real>(f: &GridFunction<T>) -> GridFunction<T> {
    let grid = *f.grid();
    let n = grid.points_per_axis();
    let levels = ladder_len(&grid);
    let h = grid.spacing();
    let cv = grid.cell_volume();
    let abs: Vec<T> = f.values().iter().map(|v| v.abs()).collect();

    let values: Vec<T> = if grid.dim() == 1 {
        let mut prefix = vec![T::zero(); n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + abs[i];
        }
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = T::zero();
                for k in 0..levels {
                    let m = 1usize << k;
                    // |dx| h < m h  <=>  |dx| <= m - 1
                    let lo = i.saturating_sub(m - 1);
                    let hi = (i + m).min(n);
                    let r = h * from_usize::<T>(m);
                    best = best.max((prefix[hi] - prefix[lo]) * cv / r);
                }
                best
            })
            .collect()
    } else {
        let mut prefix = vec![T::zero(); n * (n + 1)];
        for row in 0..n {
            let base = row * (n + 1);
            for c in 0..n {
                prefix[base + c + 1] = prefix[base + c] + abs[row * n + c];
            }
        }
        // half-widths: largest w with w^2 + dy^2 < m^2
        let widths: Vec<Vec<usize>> = (0..levels)
            .map(|k| {
                let m = 1usize << k;
                (0..m)
                    .map(|dy| {
                        let lim = m * m - dy * dy;
                        let mut w = (lim as f64).sqrt() as usize;
                        while w * w >= lim {
                            w -= 1;
                        }
                        while (w + 1) * (w + 1) < lim {
                            w += 1;
                        }
                        w
                    })
                    .collect()
            })
            .collect();
        (0..n * n)
            .into_par_iter()
            .map(|t| {
                let (ti, tj) = (t / n, t % n);
                let mut best = T::zero();
                for (k, ws) in widths.iter().enumerate() {
                    let m = 1usize << k;
                    let mut sum = T::zero();
                    for (dy, &w) in ws.iter().enumerate() {
                        let lo = tj.saturating_sub(w);
                        let hi = (tj + w + 1).min(n);
                        let mut add_row = |row: usize| {
                            let base = row * (n + 1);
                            sum = sum + prefix[base + hi] - prefix[base + lo];
                        };
                        if ti + dy < n {
                            add_row(ti + dy);
                        }
                        if dy > 0 && ti >= dy {
                            add_row(ti - dy);
                        }
                    }
                    let r = h * from_usize::<T>(m);
                    best = best.max(sum * cv / (r * r));
                }
                best
            })
            .collect()
    };
    GridFunction::new(grid, values).expect("maximal function of finite samples is finite")
}

/// Stand-in for the grand maximal function `G_N f`, which is pointwise
/// dominated by `C * M f`; norm-level estimates use `M f` directly.
pub fn grand_maximal_proxy<T: Real>(f: &GridFunction<T>) -> GridFunction<T> {
    maximal_function(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force maximal function over the same radius ladder.
    fn brute(f: &GridFunction<f64>) -> Vec<f64> {
        let g = f.grid();
        let levels = ladder_len(g);
        (0..g.cell_count())
            .map(|i| {
                let [xi, yi] = g.center(i);
                (0..levels)
                    .map(|k| {
                        let r = g.spacing() * (1u64 << k) as f64;
                        let s: f64 = (0..g.cell_count())
                            .filter(|&j| {
                                let [xj, yj] = g.center(j);
                                (xi - xj).hypot(yi - yj) < r * (1.0 - 1e-12)
                            })
                            .map(|j| f.values()[j].abs())
                            .sum();
                        s * g.cell_volume() / r.powi(g.dim() as i32)
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    fn bumpy(g: Grid<f64>, seed: u64) -> GridFunction<f64> {
        let s = seed as f64;
        GridFunction::from_fn(g, |[x, y]| ((2.0 + s) * x).sin() * (y - 0.3 * s).cos() + if x > 0.5 { 1.0 } else { 0.0 })
            .unwrap()
    }

    #[test]
    fn matches_brute_force() {
        for (dim, n) in [(1, 64), (2, 16)] {
            let g = Grid::<f64>::new(dim, -1, 1, n).unwrap();
            for seed in 0..3 {
                let f = bumpy(g, seed);
                let m = maximal_function(&f);
                for (a, b) in m.values().iter().zip(brute(&f)) {
                    assert!((a - b).abs() <= 1e-12 * b.max(1.0));
                }
            }
        }
    }

    #[test]
    fn constant_at_centre_approaches_unit_ball_volume() {
        for (dim, n, vn) in [(1, 256, 2.0), (2, 128, std::f64::consts::PI)] {
            let g = Grid::<f64>::new(dim, -1, 2, n).unwrap();
            let c = 2.5;
            let m = maximal_function(&GridFunction::constant(g, c));
            let centre = if dim == 1 { n / 2 } else { (n / 2) * n + n / 2 };
            let v = m.values()[centre];
            assert!((v - c * vn).abs() <= 0.1 * c * vn, "dim {dim}: {v}");
            assert!(m.values().iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn zero_and_proxy() {
        let g = Grid::<f64>::new(2, -1, 1, 16).unwrap();
        assert!(maximal_function(&GridFunction::zeros(g)).is_zero());
        let f = bumpy(g, 1);
        assert_eq!(grand_maximal_proxy(&f), maximal_function(&f));
        let scaled = grand_maximal_proxy(&f.scale(-3.0));
        for (a, b) in scaled.values().iter().zip(maximal_function(&f).values()) {
            assert!((a - 3.0 * b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    proptest! {
        #[test]
        fn sublinear_and_monotone(seed in 0u64..500, a in 0.1f64..3.0) {
            let g = Grid::<f64>::new(1, -1, 1, 64).unwrap();
            let f = bumpy(g, seed);
            let h = GridFunction::from_fn(g, |[x, _]| (x * a).cos()).unwrap();
            let mf = maximal_function(&f);
            let mh = maximal_function(&h);
            let msum = maximal_function(&(&f + &h));
            for i in 0..g.cell_count() {
                prop_assert!(msum.values()[i] <= mf.values()[i] + mh.values()[i] + 1e-12);
            }
            // |f| <= |f| + |h| pointwise
            let bigger = maximal_function(&(&f.abs() + &h.abs()));
            for i in 0..g.cell_count() {
                prop_assert!(mf.values()[i] <= bigger.values()[i] + 1e-12);
            }
        }
    }
}
