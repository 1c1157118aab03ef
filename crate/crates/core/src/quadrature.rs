//! Gauss–Legendre rules for the smooth integrals behind the Riesz kernel table.

use crate::scalar::{from_usize, lit, Real};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = from_usize::<T>(n);
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (T::PI() * (from_usize::<T>(i) + lit(0.75)) / (nf + lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x = x - dx;
            if dx.abs() <= T::epsilon() * lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d.is_zero() { dp } else { d };
        let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = from_usize::<T>(k);
        let p2 = ((lit::<T>(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf = from_usize::<T>(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// A Gauss–Legendre rule mapped onto arbitrary intervals.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn integrate(&self, a: T, b: T, f: impl Fn(T) -> T) -> T {
        let half = (b - a) * lit(0.5);
        let mid = (a + b) * lit(0.5);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<T>()
    }

    /// Tensor-product rule over `[ax, bx] x [ay, by]`.
    pub fn integrate_2d(&self, ax: T, bx: T, ay: T, by: T, f: impl Fn(T, T) -> T) -> T {
        self.integrate(ax, bx, |x| self.integrate(ay, by, |y| f(x, y)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre::<f64>(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for i in 0..n {
                assert!((x[i] + x[n - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let rule = GaussLegendre::<f64>::new(6);
        for k in 0..12 {
            let got = rule.integrate(0.0, 1.0, |x| x.powi(k));
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn secant_integral() {
        // int_0^{pi/4} sec = ln(1 + sqrt 2)
        let rule = GaussLegendre::<f64>::new(24);
        let got = rule.integrate(0.0, std::f64::consts::FRAC_PI_4, |t| 1.0 / t.cos());
        assert!((got - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-14);
    }
}
