//! Quadrature helpers: periodic trapezoid with nested doubling, and
//! composite Gauss-Legendre for smooth finite intervals.

use std::f64::consts::PI;

use crate::error::{Result, RingError};

/// Result of a converged periodic average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicMean {
    pub value: f64,
    pub nodes: usize,
}

/// Mean of `f` over one period of the drive phase, `(1/2pi) int_0^{2pi} f`,
/// using `nodes` equispaced trapezoid nodes.
pub fn periodic_mean_fixed<F: Fn(f64) -> f64>(f: F, nodes: usize) -> f64 {
    let h = 2.0 * PI / nodes as f64;
    let sum: f64 = (0..nodes).map(|j| f(j as f64 * h)).sum();
    sum / nodes as f64
}

/// Mean of `f` over one drive period with node doubling until two successive
/// estimates agree to `rel_tol` of the mean absolute integrand.
///
/// Each doubling only evaluates the new (odd) nodes.
pub fn periodic_mean<F: Fn(f64) -> f64>(
    f: F,
    rel_tol: f64,
    start_nodes: usize,
    max_nodes: usize,
) -> Result<PeriodicMean> {
    let mut nodes = start_nodes.max(4);
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for j in 0..nodes {
        let v = f(2.0 * PI * j as f64 / nodes as f64);
        sum += v;
        abs_sum += v.abs();
    }
    let mut prev = sum / nodes as f64;
    let mut change = f64::INFINITY;
    while nodes < max_nodes {
        let h = 2.0 * PI / (2 * nodes) as f64;
        for j in 0..nodes {
            let v = f((2 * j + 1) as f64 * h);
            sum += v;
            abs_sum += v.abs();
        }
        nodes *= 2;
        let value = sum / nodes as f64;
        let scale = (abs_sum / nodes as f64).max(f64::MIN_POSITIVE);
        change = (value - prev).abs() / scale;
        if change <= rel_tol {
            return Ok(PeriodicMean { value, nodes });
        }
        prev = value;
    }
    Err(RingError::QuadratureFailure { nodes, change })
}

// 8-point Gauss-Legendre on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_48,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_48,
    0.101_228_536_290_376_26,
];

/// Composite 8-point Gauss-Legendre rule on `[a, b]` with `panels` panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * w;
        let half = 0.5 * w;
        let s: f64 = GL_NODES
            .iter()
            .zip(GL_WEIGHTS.iter())
            .map(|(x, wt)| wt * f(mid + half * x))
            .sum();
        total += half * s;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand_is_exact() {
        let m = periodic_mean(|_| 3.5, 1e-12, 8, 1 << 10).unwrap();
        assert_eq!(m.value, 3.5);
    }

    #[test]
    fn abs_sin_mean_is_two_over_pi() {
        // kinked integrand: converges only algebraically
        let m = periodic_mean(|t: f64| t.sin().abs(), 1e-10, 64, 1 << 24).unwrap();
        assert!((m.value - 2.0 / PI).abs() < 1e-9, "{}", m.value);
    }

    #[test]
    fn smooth_integrand_converges_fast() {
        // mean of exp(cos t) is I0(1)
        let i0_1 = 1.266_065_877_752_008_4;
        let m = periodic_mean(|t: f64| t.cos().exp(), 1e-13, 8, 1 << 12).unwrap();
        assert!((m.value - i0_1).abs() < 1e-14);
        assert!(m.nodes <= 64);
    }

    #[test]
    fn failure_is_reported() {
        let r = periodic_mean(|t: f64| t.sin().abs(), 1e-14, 8, 64);
        assert!(matches!(r, Err(RingError::QuadratureFailure { .. })));
    }

    #[test]
    fn gauss_legendre_polynomial_and_trig() {
        let v = gauss_legendre(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1);
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        let s = gauss_legendre(f64::sin, 0.0, PI, 8);
        assert!((s - 2.0).abs() < 1e-14);
    }
}
