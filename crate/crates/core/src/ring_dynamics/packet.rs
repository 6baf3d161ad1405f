use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlannerScalar};

use super::gauge::GaugeProfile;
use super::RingUnits;
use crate::error::{Result, RingError};

/// Angle mapped into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Forward/inverse FFT pair; the inverse is normalized.
#[derive(Clone)]
pub(crate) struct Spectral {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    n: usize,
}

impl Spectral {
    pub(crate) fn new(n: usize) -> Self {
        // the SIMD kernels round with a slight bias that drifts the norm over long runs
        let mut planner = FftPlannerScalar::new();
        Spectral {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            n,
        }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|x| *x *= s);
    }
}

/// Integer angular momentum of FFT bin `j`.
pub(crate) fn wavenumber(j: usize, n: usize) -> f64 {
    if j < n / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    }
}

pub(crate) fn grid_point(j: usize, n: usize) -> f64 {
    2.0 * PI * j as f64 / n as f64
}

/// Wave function on a uniform periodic grid over `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    pub amplitudes: Vec<Complex64>,
    pub units: RingUnits,
    /// Natural time of the state.
    pub time: f64,
    /// Circular mean position in `[0, 2 pi)`.
    pub phi_bar: f64,
    /// Mean canonical angular momentum (units of hbar).
    pub p_bar: f64,
    /// Mean kinetic angular velocity `<p - A>` (natural units).
    pub v_bar: f64,
}

impl WavePacket {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn dphi(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `sum |psi|^2 dphi`.
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dphi()
    }

    /// RMS angular width about the circular mean.
    pub fn width(&self) -> f64 {
        let n = self.len();
        let m: f64 = (0..n)
            .map(|j| self.amplitudes[j].norm_sqr() * wrap_angle(grid_point(j, n) - self.phi_bar).powi(2))
            .sum::<f64>()
            * self.dphi();
        (m / self.norm()).sqrt()
    }

    /// Mean velocity in rad/s.
    pub fn v_bar_physical(&self) -> f64 {
        self.units.to_rad_per_second(self.v_bar)
    }

    /// Mean canonical momentum along the ring, `hbar p_bar / rho_c` (g cm/s).
    pub fn p_bar_physical(&self) -> f64 {
        crate::units::HBAR * self.p_bar / self.units.radius
    }

    /// Recompute `phi_bar`, `p_bar` and `v_bar` for gauge potential `a`.
    pub fn refresh_moments(&mut self, a: &GaugeProfile) {
        let n = self.len();
        let norm = self.norm();
        let dphi = self.dphi();
        let mut circ = Complex64::new(0.0, 0.0);
        let mut a_mean = 0.0;
        for (j, amp) in self.amplitudes.iter().enumerate() {
            let phi = grid_point(j, n);
            let w = amp.norm_sqr() * dphi / norm;
            circ += Complex64::from_polar(w, phi);
            a_mean += w * a.value(phi);
        }
        self.phi_bar = circ.arg().rem_euclid(2.0 * PI);
        let mut spec = self.amplitudes.clone();
        Spectral::new(n).forward(&mut spec);
        let total: f64 = spec.iter().map(|c| c.norm_sqr()).sum();
        let p: f64 = spec
            .iter()
            .enumerate()
            .map(|(j, c)| wavenumber(j, n) * c.norm_sqr())
            .sum::<f64>()
            / total;
        self.p_bar = p;
        self.v_bar = p - a_mean;
    }
}

/// Overlap modulus `|<a|b>|` of two normalized states on the same grid.
pub fn fidelity(a: &WavePacket, b: &WavePacket) -> Result<f64> {
    if a.len() != b.len() {
        return Err(RingError::GridMismatch(format!("{} vs {} points", a.len(), b.len())));
    }
    let s: Complex64 = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum();
    Ok(s.norm() * a.dphi())
}

/// Gaussian packet centered at `phi0` with mean velocity `v0` (natural
/// units) and RMS width `width` (rad), carrying the gauge factor
/// `exp(i int_{phi0}^{phi} A)` so that `v_bar = v0` for any `A`.
pub fn init_packet(
    phi0: f64,
    v0: f64,
    width: f64,
    a: &GaugeProfile,
    n: usize,
    units: RingUnits,
) -> Result<WavePacket> {
    if n < 16 || !n.is_multiple_of(2) {
        return Err(RingError::GridMismatch(format!("grid size {n} must be even and >= 16")));
    }
    let dphi = 2.0 * PI / n as f64;
    if !(width >= 4.0 * dphi) {
        return Err(RingError::GridMismatch(format!(
            "width {width} not resolved by grid spacing {dphi:.3e}"
        )));
    }
    if !(width <= PI / 8.0) {
        return Err(RingError::GridMismatch(format!("width {width} is not localized on the ring")));
    }
    // momentum content out to ten standard deviations must fit the grid
    let k_reach = v0.abs() + a.max_abs() + 10.0 / (2.0 * width);
    if k_reach >= (n / 2) as f64 {
        return Err(RingError::GridMismatch(format!(
            "momentum reach {k_reach:.1} exceeds Nyquist {}",
            n / 2
        )));
    }
    if !(units.mass > 0.0 && units.radius > 0.0) {
        return Err(RingError::InvalidInput("mass and radius must be > 0".into()));
    }
    let amplitudes: Vec<Complex64> = (0..n)
        .map(|j| {
            let d = wrap_angle(grid_point(j, n) - phi0);
            let env = (-d * d / (4.0 * width * width)).exp();
            let phase = v0 * d + a.integral(phi0, phi0 + d);
            Complex64::from_polar(env, phase)
        })
        .collect();
    let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>() * dphi;
    let s = 1.0 / norm.sqrt();
    let mut p = WavePacket {
        amplitudes: amplitudes.into_iter().map(|c| c * s).collect(),
        units,
        time: 0.0,
        phi_bar: 0.0,
        p_bar: 0.0,
        v_bar: 0.0,
    };
    p.refresh_moments(a);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::Atom;

    fn units() -> RingUnits {
        RingUnits::new(Atom::rb87().mass, 0.13)
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn resting_packet_is_real_and_centered() {
        let p = init_packet(1.0, 0.0, 0.2, &GaugeProfile::zero(), 512, units()).unwrap();
        assert!(p.amplitudes.iter().all(|c| c.im.abs() < 1e-15 && c.re >= 0.0));
        assert!(p.p_bar.abs() < 1e-12 && (p.phi_bar - 1.0).abs() < 1e-12);
        assert!((p.norm() - 1.0).abs() < 1e-13);
        assert!((p.width() - 0.2).abs() < 1e-9);
    }

    #[test]
    fn gauge_shifts_canonical_but_not_kinetic_momentum() {
        let a = GaugeProfile::constant(0.3);
        let p = init_packet(2.0, 12.0, 0.2, &a, 512, units()).unwrap();
        assert!((p.v_bar - 12.0).abs() < 1e-6 && (p.p_bar - 12.3).abs() < 1e-6, "{p:?}");
        assert!((p.phi_bar - 2.0).abs() < 1e-6);
        let varying = GaugeProfile::custom(0.1, vec![(1, 0.4, 0.2)]);
        let q = init_packet(2.0, -5.0, 0.15, &varying, 512, units()).unwrap();
        assert!((q.v_bar + 5.0).abs() < 1e-6 && (q.phi_bar - 2.0).abs() < 1e-6, "{q:?}");
    }

    #[test]
    fn grid_checks() {
        let a = GaugeProfile::zero();
        assert!(matches!(init_packet(0.0, 0.0, 0.01, &a, 256, units()), Err(RingError::GridMismatch(_))));
        assert!(matches!(init_packet(0.0, 0.0, 1.0, &a, 256, units()), Err(RingError::GridMismatch(_))));
        assert!(matches!(init_packet(0.0, 120.0, 0.2, &a, 256, units()), Err(RingError::GridMismatch(_))));
    }

    #[test]
    fn physical_velocity_round_trip() {
        let u = units();
        let p = init_packet(0.0, 40.0, 0.15, &GaugeProfile::zero(), 2048, u).unwrap();
        assert!((u.to_natural_velocity(p.v_bar_physical()) - 40.0).abs() < 1e-9);
    }
}
