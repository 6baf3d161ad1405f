use num_complex::Complex64;

use super::classical::ClassicalTrajectory;
use super::gauge::GaugeProfile;
use super::packet::{grid_point, wavenumber, wrap_angle, Spectral, WavePacket};
use super::potential::RingPotential;
use crate::error::{Result, RingError};

const MAX_GROWTH: f64 = 0.05;

/// Relative width growth of a free Gaussian of RMS width `sigma` after
/// natural time `t`: `sqrt(1 + (t / (2 sigma^2))^2) - 1`.
pub fn width_growth(sigma: f64, t: f64) -> f64 {
    (1.0 + (t / (2.0 * sigma * sigma)).powi(2)).sqrt() - 1.0
}

/// Translate-boost-phase approximation of the evolved packet:
///
/// `exp(i S_cl) exp(i (p_t - p_0)(phi - phi_t)) exp(-i (phi_t - phi_0) P) psi_0`
///
/// with `S_cl = int (v^2/2 + A v - V) dt` along `traj`, which must start at
/// the packet's center. Valid while diffusion is negligible; refuses to run
/// when the width would grow by more than 5%.
pub fn semiclassical_propagate(
    p: &WavePacket,
    traj: &ClassicalTrajectory,
    a: &GaugeProfile,
    v: &dyn RingPotential,
) -> Result<WavePacket> {
    let k_last = traj.times.len().checked_sub(1).ok_or_else(|| RingError::InvalidInput("empty trajectory".into()))?;
    let t = traj.times[k_last] - traj.times[0];
    let growth = width_growth(p.width(), t);
    if growth > MAX_GROWTH {
        return Err(RingError::SemiclassicalInvalid(growth));
    }
    let shift = traj.phi[k_last] - traj.phi[0];
    let boost = traj.p[k_last] - traj.p[0];
    let lagr: Vec<f64> = (0..=k_last)
        .map(|k| {
            let (x, u) = (traj.phi[k], traj.v[k]);
            0.5 * u * u + a.value(x) * u - v.value(x, p.time + traj.times[k])
        })
        .collect();
    let action: f64 = lagr
        .windows(2)
        .zip(traj.times.windows(2))
        .map(|(l, t)| 0.5 * (l[0] + l[1]) * (t[1] - t[0]))
        .sum();

    let n = p.len();
    let fft = Spectral::new(n);
    let mut buf = p.amplitudes.clone();
    fft.forward(&mut buf);
    for (j, z) in buf.iter_mut().enumerate() {
        *z *= Complex64::from_polar(1.0, -wavenumber(j, n) * shift);
    }
    fft.inverse(&mut buf);
    let center = traj.phi[k_last];
    let mut out = p.clone();
    for (j, z) in buf.into_iter().enumerate() {
        let d = wrap_angle(grid_point(j, n) - center);
        out.amplitudes[j] = z * Complex64::from_polar(1.0, action + boost * d);
    }
    out.time = p.time + t;
    out.refresh_moments(a);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::classical::classical_trajectory;
    use super::super::packet::{fidelity, init_packet};
    use super::super::potential::{FreePotential, LinearPotential};
    use super::super::propagate::split_step_evolve;
    use super::super::wei_norman::wei_norman_propagate;
    use super::super::RingUnits;
    use super::*;
    use crate::units::Atom;
    use std::f64::consts::PI;

    fn units() -> RingUnits {
        RingUnits::new(Atom::rb87().mass, 0.13)
    }

    #[test]
    fn zero_time_is_identity() {
        let a = GaugeProfile::constant(0.1);
        let p = init_packet(1.0, 4.0, 0.2, &a, 256, units()).unwrap();
        let tr = classical_trajectory(1.0, 4.0, &FreePotential, &a, 0.0, 1e-3).unwrap();
        let q = semiclassical_propagate(&p, &tr, &a, &FreePotential).unwrap();
        let err = p.amplitudes.iter().zip(&q.amplitudes).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn free_motion_is_translation_with_free_action() {
        let a = GaugeProfile::zero();
        let p = init_packet(1.0, 10.0, 0.3, &a, 512, units()).unwrap();
        let t = 0.01;
        let tr = classical_trajectory(1.0, 10.0, &FreePotential, &a, t, 1e-4).unwrap();
        let q = semiclassical_propagate(&p, &tr, &a, &FreePotential).unwrap();
        assert!(wrap_angle(q.phi_bar - 1.1).abs() < 1e-9);
        let exact = split_step_evolve(&p, &a, &FreePotential, t / 100.0, 100).unwrap();
        assert!(fidelity(&q, &exact).unwrap() > 0.999);
    }

    #[test]
    fn linear_potential_agrees_with_wei_norman() {
        let a = GaugeProfile::constant(0.1);
        let p = init_packet(PI, 8.0, 0.25, &a, 512, units()).unwrap();
        // short enough that spreading costs less than 1e-3 of overlap
        let t = 0.01;
        let (v0, v1) = (|_: f64| 1.0, |t: f64| 30.0 + 10.0 * t);
        let pot = LinearPotential::new(v0, v1, PI);
        let tr = classical_trajectory(p.phi_bar, p.v_bar, &pot, &a, t, 1e-4).unwrap();
        let q = semiclassical_propagate(&p, &tr, &a, &pot).unwrap();
        let w = wei_norman_propagate(&p, &a, &v0, &v1, PI, t).unwrap();
        let f = fidelity(&q, &w).unwrap();
        assert!(f > 0.999, "{f}");
    }

    #[test]
    fn diffusion_guard() {
        let a = GaugeProfile::zero();
        let p = init_packet(1.0, 0.0, 0.1, &a, 512, units()).unwrap();
        let tr = classical_trajectory(1.0, 0.0, &FreePotential, &a, 0.01, 1e-3).unwrap();
        assert!(matches!(
            semiclassical_propagate(&p, &tr, &a, &FreePotential),
            Err(RingError::SemiclassicalInvalid(_))
        ));
    }
}
