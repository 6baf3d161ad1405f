use num_complex::Complex64;

use super::gauge::GaugeProfile;
use super::packet::{grid_point, wavenumber, Spectral, WavePacket};
use super::potential::RingPotential;
use crate::error::{Result, RingError};

const STEP_LIMIT: f64 = 0.1;
// spectral bins below this fraction of the peak do not count as occupied
const BAND_FLOOR: f64 = 1e-16;

/// Largest kinetic energy `(k - A_mean)^2 / 2` over the occupied momentum band.
fn band_energy(psi: &[Complex64], mean_a: f64, fft: &Spectral) -> f64 {
    let n = psi.len();
    let mut spec = psi.to_vec();
    fft.forward(&mut spec);
    let peak = spec.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    spec.iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > BAND_FLOOR * peak)
        .map(|(j, _)| 0.5 * (wavenumber(j, n) - mean_a).powi(2))
        .fold(0.0, f64::max)
}

// A phase factor is applied thousands of times, so a modulus off by one
// ulp drifts the norm linearly. Pick the neighbouring representation whose
// modulus is closest to one.
fn unit_phase(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    let excess = |re: f64, im: f64| {
        let p = im * im;
        re.mul_add(re, -1.0) + p + im.mul_add(im, -p)
    };
    let mut best = (c, s, excess(c, s).abs());
    for dr in [-1i64, 0, 1] {
        for di in [-1i64, 0, 1] {
            let re = f64::from_bits(c.to_bits().wrapping_add(dr as u64));
            let im = f64::from_bits(s.to_bits().wrapping_add(di as u64));
            let e = excess(re, im).abs();
            if e < best.2 {
                best = (re, im, e);
            }
        }
    }
    Complex64::new(best.0, best.1)
}

/// Largest step the accuracy guard accepts for this packet.
pub fn max_step(p: &WavePacket, a: &GaugeProfile) -> f64 {
    let e = band_energy(&p.amplitudes, a.mean, &Spectral::new(p.len()));
    if e > 0.0 {
        STEP_LIMIT / e
    } else {
        f64::INFINITY
    }
}

/// Strang-split spectral propagator.
///
/// A position-dependent gauge potential is removed exactly by the periodic
/// gauge transformation `exp(i int (A - A_mean))`; the remaining constant
/// part enters the kinetic factor `exp(-i (k - A_mean)^2 dt / 2)`.
pub struct SplitStepper<'a> {
    psi: Vec<Complex64>,
    chi: Vec<f64>,
    phis: Vec<f64>,
    gauge: &'a GaugeProfile,
    potential: &'a dyn RingPotential,
    fft: Spectral,
    kinetic: Option<(f64, Vec<Complex64>)>,
    static_half: Option<(f64, Vec<Complex64>)>,
    pub time: f64,
    template: WavePacket,
}

impl<'a> SplitStepper<'a> {
    pub fn new(p: &WavePacket, gauge: &'a GaugeProfile, potential: &'a dyn RingPotential) -> Self {
        let n = p.len();
        let phis: Vec<f64> = (0..n).map(|j| grid_point(j, n)).collect();
        let chi: Vec<f64> = phis.iter().map(|&x| gauge.periodic_phase(x)).collect();
        let psi = p
            .amplitudes
            .iter()
            .zip(&chi)
            .map(|(a, c)| a * Complex64::from_polar(1.0, -c))
            .collect();
        SplitStepper {
            psi,
            chi,
            phis,
            gauge,
            potential,
            fft: Spectral::new(n),
            kinetic: None,
            static_half: None,
            time: p.time,
            template: p.clone(),
        }
    }

    /// Reject `dt` when `dt` times the occupied kinetic energy reaches 0.1.
    pub fn check_step(&self, dt: f64) -> Result<()> {
        let e = band_energy(&self.psi, self.gauge.mean, &self.fft);
        if !(dt > 0.0) || dt * e >= STEP_LIMIT {
            return Err(RingError::StepTooLarge(dt * e));
        }
        Ok(())
    }

    fn kinetic_factors(&mut self, dt: f64) -> &[Complex64] {
        let stale = self.kinetic.as_ref().is_none_or(|(d, _)| *d != dt);
        if stale {
            let n = self.phis.len();
            let a = self.gauge.mean;
            let f = (0..n)
                .map(|j| unit_phase(-0.5 * (wavenumber(j, n) - a).powi(2) * dt))
                .collect();
            self.kinetic = Some((dt, f));
        }
        &self.kinetic.as_ref().unwrap().1
    }

    fn potential_half(&mut self, dt: f64, tau: f64) -> Vec<Complex64> {
        if self.potential.is_static() {
            if let Some((d, f)) = &self.static_half {
                if *d == dt {
                    return f.clone();
                }
            }
        }
        let f: Vec<Complex64> = self
            .phis
            .iter()
            .map(|&x| unit_phase(-0.5 * dt * self.potential.value(x, tau)))
            .collect();
        if self.potential.is_static() {
            self.static_half = Some((dt, f.clone()));
        }
        f
    }

    /// One Strang step of length `dt`; the potential is sampled at the
    /// midpoint time.
    pub fn step(&mut self, dt: f64) {
        let half = self.potential_half(dt, self.time + 0.5 * dt);
        self.psi.iter_mut().zip(&half).for_each(|(a, f)| *a *= f);
        let mut buf = std::mem::take(&mut self.psi);
        self.fft.forward(&mut buf);
        let kin = self.kinetic_factors(dt).to_vec();
        buf.iter_mut().zip(&kin).for_each(|(a, f)| *a *= f);
        self.fft.inverse(&mut buf);
        buf.iter_mut().zip(&half).for_each(|(a, f)| *a *= f);
        self.psi = buf;
        self.time += dt;
    }

    /// Current state with the gauge factor restored and moments refreshed.
    pub fn packet(&self) -> WavePacket {
        let mut p = self.template.clone();
        p.amplitudes = self
            .psi
            .iter()
            .zip(&self.chi)
            .map(|(a, c)| a * Complex64::from_polar(1.0, *c))
            .collect();
        p.time = self.time;
        p.refresh_moments(self.gauge);
        p
    }

    pub(crate) fn raw(&self) -> &[Complex64] {
        &self.psi
    }

    pub(crate) fn snapshot(&self) -> (Vec<Complex64>, f64) {
        (self.psi.clone(), self.time)
    }

    pub(crate) fn restore(&mut self, state: (Vec<Complex64>, f64)) {
        self.psi = state.0;
        self.time = state.1;
    }
}

/// Evolve `p` for `steps` steps of `dt` (natural units) under
/// `(p - A)^2 / 2 + V`.
pub fn split_step_evolve(
    p: &WavePacket,
    a: &GaugeProfile,
    v: &dyn RingPotential,
    dt: f64,
    steps: usize,
) -> Result<WavePacket> {
    let mut s = SplitStepper::new(p, a, v);
    s.check_step(dt)?;
    for _ in 0..steps {
        s.step(dt);
    }
    Ok(s.packet())
}
