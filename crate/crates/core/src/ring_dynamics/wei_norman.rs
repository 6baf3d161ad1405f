use num_complex::Complex64;

use super::gauge::GaugeProfile;
use super::packet::{grid_point, wavenumber, wrap_angle, Spectral, WavePacket};
use crate::error::{Result, RingError};
use crate::quadrature::gauss_legendre;

const PANELS: usize = 32;

/// Scalar parameters of `U(t) = exp(-i a P^2) exp(-i b P) exp(-i c phi) exp(-i d)`
/// for `H = P^2 / 2 + V0(t) + V1(t) phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeiNormanParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// `a = t/2`, `b = int s V1`, `c = int V1`,
/// `d = int V0 + int_0^t V1(s) b(s) ds`, by Gauss-Legendre quadrature.
pub fn wei_norman_params(v0: &dyn Fn(f64) -> f64, v1: &dyn Fn(f64) -> f64, t: f64) -> WeiNormanParams {
    if t == 0.0 {
        return WeiNormanParams { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
    }
    let b_of = |s: f64| gauss_legendre(|u| u * v1(u), 0.0, s, 8);
    WeiNormanParams {
        a: t / 2.0,
        b: gauss_legendre(|u| u * v1(u), 0.0, t, PANELS),
        c: gauss_legendre(v1, 0.0, t, PANELS),
        d: gauss_legendre(v0, 0.0, t, PANELS) + gauss_legendre(|s| v1(s) * b_of(s), 0.0, t, PANELS),
    }
}

/// Closed-form propagation under the linear potential
/// `V0(t) + V1(t) phi`, `phi` on the branch `(branch - pi, branch + pi]`,
/// with gauge potential `a` handled by the same periodic gauge transform as
/// the split-step propagator.
///
/// Fails with `UnwrapNeeded` if the packet would come within eight widths of
/// the branch jump at any time up to `t_final`.
pub fn wei_norman_propagate(
    p: &WavePacket,
    a: &GaugeProfile,
    v0: &dyn Fn(f64) -> f64,
    v1: &dyn Fn(f64) -> f64,
    branch: f64,
    t_final: f64,
) -> Result<WavePacket> {
    if !(t_final >= 0.0) {
        return Err(RingError::InvalidInput("t_final must be >= 0".into()));
    }
    let sigma = p.width();
    let u0 = wrap_angle(p.phi_bar - branch);
    for k in 0..=64 {
        let t = t_final * k as f64 / 64.0;
        let w = wei_norman_params(v0, v1, t);
        let center = u0 + p.v_bar * t - (t * w.c - w.b);
        let spread = (sigma * sigma + (t / (2.0 * sigma)).powi(2)).sqrt();
        if center.abs() + 8.0 * spread >= std::f64::consts::PI {
            return Err(RingError::UnwrapNeeded);
        }
    }
    let w = wei_norman_params(v0, v1, t_final);
    let n = p.len();
    let abar = a.mean;
    let fft = Spectral::new(n);
    let mut buf: Vec<Complex64> = (0..n)
        .map(|j| {
            let x = grid_point(j, n);
            let chi = a.periodic_phase(x);
            let xu = branch + wrap_angle(x - branch);
            p.amplitudes[j] * Complex64::from_polar(1.0, -chi - w.c * xu - w.d)
        })
        .collect();
    fft.forward(&mut buf);
    for (j, z) in buf.iter_mut().enumerate() {
        let k = wavenumber(j, n) - abar;
        *z *= Complex64::from_polar(1.0, -(w.a * k * k + w.b * k));
    }
    fft.inverse(&mut buf);
    let mut out = p.clone();
    for (j, z) in buf.into_iter().enumerate() {
        out.amplitudes[j] = z * Complex64::from_polar(1.0, a.periodic_phase(grid_point(j, n)));
    }
    out.time = p.time + t_final;
    out.refresh_moments(a);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::packet::{fidelity, init_packet};
    use super::super::potential::{FreePotential, LinearPotential};
    use super::super::propagate::split_step_evolve;
    use super::super::RingUnits;
    use super::*;
    use crate::units::Atom;
    use std::f64::consts::PI;

    fn units() -> RingUnits {
        RingUnits::new(Atom::rb87().mass, 0.13)
    }

    #[test]
    fn params_vanish_at_zero_and_a_is_half_t() {
        let w = wei_norman_params(&|_| 1.0, &|t| t.sin(), 0.0);
        assert_eq!(w, WeiNormanParams { a: 0.0, b: 0.0, c: 0.0, d: 0.0 });
        assert_eq!(wei_norman_params(&|_| 1.0, &|t| t.sin(), 0.37).a, 0.185);
    }

    #[test]
    fn constant_force_closed_forms() {
        let (v1, t) = (2.5, 0.8);
        let w = wei_norman_params(&|_| 0.0, &|_| v1, t);
        assert!((w.b - v1 * t * t / 2.0).abs() < 1e-14);
        assert!((w.c - v1 * t).abs() < 1e-14);
        // int_0^t V1 * V1 s^2 / 2 ds
        assert!((w.d - v1 * v1 * t.powi(3) / 6.0).abs() < 1e-14);
    }

    #[test]
    fn constant_offset_is_a_global_phase() {
        let a = GaugeProfile::zero();
        let p = init_packet(PI, 3.0, 0.2, &a, 512, units()).unwrap();
        let t = 0.05;
        let q = wei_norman_propagate(&p, &a, &|_| 7.0, &|_| 0.0, PI, t).unwrap();
        let free = split_step_evolve(&p, &a, &FreePotential, t / 1000.0, 1000).unwrap();
        let s: Complex64 = free.amplitudes.iter().zip(&q.amplitudes).map(|(x, y)| x.conj() * y).sum::<Complex64>() * p.dphi();
        assert!((s - Complex64::from_polar(1.0, -7.0 * t)).norm() < 1e-10, "{s}");
    }

    #[test]
    fn time_dependent_force_matches_split_step() {
        let a = GaugeProfile::constant(0.2);
        let p = init_packet(PI, 10.0, 0.2, &a, 512, units()).unwrap();
        let (v0, v1) = (|t: f64| 0.3 * t, |t: f64| 40.0 * (30.0 * t).sin());
        let t = 0.02;
        let q = wei_norman_propagate(&p, &a, &v0, &v1, PI, t).unwrap();
        let pot = LinearPotential::new(v0, v1, PI);
        let r = split_step_evolve(&p, &a, &pot, t / 4000.0, 4000).unwrap();
        let f = fidelity(&q, &r).unwrap();
        assert!(1.0 - f < 1e-8, "{}", 1.0 - f);
    }

    #[test]
    fn seam_crossing_is_refused() {
        let a = GaugeProfile::zero();
        let p = init_packet(2.5, 10.0, 0.2, &a, 512, units()).unwrap();
        let r = wei_norman_propagate(&p, &a, &|_| 0.0, &|_| 0.0, 0.0, 0.1);
        assert!(matches!(r, Err(RingError::UnwrapNeeded)));
    }
}
