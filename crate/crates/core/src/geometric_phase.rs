//! Time-averaged Berry connection `cos beta0`, its harmonic content, the
//! closed-loop phase and its spread over the transverse extent of the cloud.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Result, RingError};
use crate::field_model::{FieldWaveform, TrapMode};
use crate::quadrature::periodic_mean;
use crate::trap_analysis::{find_trap_center, min_field_over_period, ring_center, trap_frequencies};
use crate::units::{Atom, HBAR};

const FFT_SAMPLES: usize = 4096;
const RETAIN_BELOW: f64 = 1e-12;

/// `B_z / |B|` at drive phase `theta`.
pub fn cos_beta_at_phase(w: &FieldWaveform, rho: f64, z: f64, theta: f64) -> Result<f64> {
    let b = w.field_at_phase(rho, z, theta)?;
    let m = b.magnitude();
    if !(m > 0.0) {
        return Err(RingError::ConnectionSingular { rho, z });
    }
    Ok(b.b_z / m)
}

fn check_nonzero(w: &FieldWaveform, rho: f64, z: f64) -> Result<()> {
    let min = min_field_over_period(w, rho, z)?;
    let typical = w.field_at_phase(rho, z, 0.0)?.magnitude().max(w.field_at_phase(rho, z, PI)?.magnitude());
    if !(min > 1e-9 * typical) {
        return Err(RingError::ConnectionSingular { rho, z });
    }
    Ok(())
}

fn cos_beta0_unchecked(w: &FieldWaveform, rho: f64, z: f64, tol: f64, max_nodes: usize) -> Result<f64> {
    if !w.is_time_dependent() {
        return cos_beta_at_phase(w, rho, z, 0.0);
    }
    let f = |th: f64| {
        let b = w.field_at_phase(rho, z, th).unwrap_or_default();
        let m = b.magnitude();
        if m > 0.0 {
            b.b_z / m
        } else {
            0.0
        }
    };
    Ok(periodic_mean(f, tol, 64, max_nodes)?.value)
}

/// Period average of `B_z / |B|` at `(rho, z)`: the effective gauge
/// potential of one ring circuit in units of the full-loop value `2 pi`.
pub fn cos_beta0(w: &FieldWaveform, rho: f64, z: f64) -> Result<f64> {
    w.validate()?;
    if rho < 0.0 {
        return Err(RingError::InvalidInput(format!("rho = {rho} < 0")));
    }
    check_nonzero(w, rho, z)?;
    cos_beta0_unchecked(w, rho, z, 1e-10, 1 << 22)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub n: usize,
    /// `C_n >= 0`.
    pub amplitude: f64,
    /// `varphi_n` in `C_n cos(n theta + varphi_n)` (rad).
    pub phase: f64,
}

/// `cos beta(theta) = cos_beta0 + sum_n C_n cos(n theta + varphi_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionSpectrum {
    pub cos_beta0: f64,
    /// Harmonics with `C_n` above 1e-12, ascending in `n`.
    pub harmonics: Vec<Harmonic>,
    /// Drive angular frequency the spectrum refers to (rad/s).
    pub omega: f64,
    /// Mean square of the samples minus the retained power.
    pub parseval_residual: f64,
    /// RMS difference between the samples and the retained series.
    pub reconstruction_rms: f64,
}

impl ConnectionSpectrum {
    pub fn amplitude(&self, n: usize) -> f64 {
        self.harmonics.iter().find(|h| h.n == n).map_or(0.0, |h| h.amplitude)
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        self.cos_beta0
            + self
                .harmonics
                .iter()
                .map(|h| h.amplitude * (h.n as f64 * theta + h.phase).cos())
                .sum::<f64>()
    }
}

/// Spectrum of one period of uniformly sampled data, up to harmonic `n_max`.
pub fn spectrum_from_samples(samples: &[f64], n_max: usize, omega: f64) -> Result<ConnectionSpectrum> {
    let n = samples.len();
    if n < 2 * n_max + 2 {
        return Err(RingError::InvalidInput(format!("{n} samples cannot resolve harmonic {n_max}")));
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let cos_beta0 = buf[0].re * scale;
    let harmonics: Vec<Harmonic> = (1..=n_max)
        .map(|k| {
            let c = buf[k] * scale;
            Harmonic {
                n: k,
                amplitude: 2.0 * c.norm(),
                phase: c.arg(),
            }
        })
        .filter(|h| h.amplitude > RETAIN_BELOW)
        .collect();
    let mut spec = ConnectionSpectrum {
        cos_beta0,
        harmonics,
        omega,
        parseval_residual: 0.0,
        reconstruction_rms: 0.0,
    };
    let power: f64 = samples.iter().map(|x| x * x).sum::<f64>() * scale;
    let kept = cos_beta0 * cos_beta0 + spec.harmonics.iter().map(|h| 0.5 * h.amplitude * h.amplitude).sum::<f64>();
    spec.parseval_residual = power - kept;
    let sq: f64 = samples
        .iter()
        .enumerate()
        .map(|(j, x)| (x - spec.evaluate(2.0 * PI * j as f64 / n as f64)).powi(2))
        .sum();
    spec.reconstruction_rms = (sq * scale).sqrt();
    Ok(spec)
}

/// Harmonic content of `cos beta(t)` at `(rho, z)` from 4096 samples per period.
pub fn fourier_spectrum(w: &FieldWaveform, rho: f64, z: f64, n_max: usize) -> Result<ConnectionSpectrum> {
    w.validate()?;
    check_nonzero(w, rho, z)?;
    let samples = (0..FFT_SAMPLES)
        .map(|j| cos_beta_at_phase(w, rho, z, 2.0 * PI * j as f64 / FFT_SAMPLES as f64))
        .collect::<Result<Vec<_>>>()?;
    let omega = if w.mode == TrapMode::Tort { w.omega } else { 0.0 };
    spectrum_from_samples(&samples, n_max, omega)
}

/// `gamma_C = 2 pi q cos_beta0` (rad).
pub fn berry_phase_closed(cos_beta0: f64, q: i64) -> Result<f64> {
    if !(cos_beta0.abs() <= 1.0) {
        return Err(RingError::InvalidInput(format!("|cos beta0| = {} > 1", cos_beta0.abs())));
    }
    Ok(2.0 * PI * cos_beta0 * q as f64)
}

/// Upper bound `sum_n 2 C_n Omega / (n omega)` on the oscillatory part of
/// the geometric phase neglected by the time average, for an atom circling
/// the ring at angular velocity `big_omega`.
pub fn residual_phase_bound(spectrum: &ConnectionSpectrum, big_omega: f64) -> Result<f64> {
    if !(big_omega >= 0.0) {
        return Err(RingError::InvalidInput("Omega must be >= 0".into()));
    }
    if spectrum.harmonics.is_empty() || big_omega == 0.0 {
        return Ok(0.0);
    }
    if !(spectrum.omega > 0.0) {
        return Err(RingError::InvalidInput("spectrum has no drive frequency".into()));
    }
    Ok(spectrum
        .harmonics
        .iter()
        .map(|h| 2.0 * h.amplitude * big_omega / (h.n as f64 * spectrum.omega))
        .sum())
}

/// Transverse sampling of the region around the ring center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampler {
    /// Cell midpoints of a square grid over `[-delta, delta]^2`.
    FlatGrid,
    /// Uniform random points over `[-delta, delta]^2`.
    FlatRandom,
    /// Ground-state Gaussian with the given standard deviations (cm);
    /// `delta` is not used.
    Gaussian { sigma_rho: f64, sigma_z: f64 },
}

impl Sampler {
    pub fn name(&self) -> &'static str {
        match self {
            Sampler::FlatGrid => "flat_grid",
            Sampler::FlatRandom => "flat_random",
            Sampler::Gaussian { .. } => "gaussian",
        }
    }
}

/// Position standard deviations of the harmonic ground state,
/// `sqrt(hbar / (2 m omega))`, for trap frequencies in Hz.
pub fn ground_state_widths(f_rho: f64, f_z: f64, atom: &Atom) -> (f64, f64) {
    let s = |f: f64| (HBAR / (2.0 * atom.mass * 2.0 * PI * f)).sqrt();
    (s(f_rho), s(f_z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationReport {
    /// RMS of `cos beta0(r) - cos beta0(r_c)` over the region.
    pub f: f64,
    /// Standard error of `f` treating the samples as independent.
    pub stderr: f64,
    pub delta: f64,
    pub samples: usize,
    /// `|<exp(2 pi i [cos beta0(r) - cos beta0(r_c)])>|`: single-winding
    /// dephasing estimate, model dependent.
    pub contrast: f64,
    /// The zero locus passes through the sampled square.
    pub touches_zero_locus: bool,
}

// Per-sample accuracy: looser than the single-point tolerance, since the
// spread being measured is many orders larger.
const SAMPLE_TOL: f64 = 1e-8;
const SAMPLE_MAX_NODES: usize = 1 << 25;

fn sample_points(center: (f64, f64), delta: f64, sampler: Sampler, samples: usize, seed: u64) -> Vec<(f64, f64)> {
    match sampler {
        Sampler::FlatGrid => {
            let k = (samples as f64).sqrt().ceil() as usize;
            let cell = 2.0 * delta / k as f64;
            (0..k * k)
                .map(|i| {
                    let (a, b) = (i / k, i % k);
                    (
                        center.0 - delta + (a as f64 + 0.5) * cell,
                        center.1 - delta + (b as f64 + 0.5) * cell,
                    )
                })
                .collect()
        }
        Sampler::FlatRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples)
                .map(|_| {
                    (
                        center.0 + rng.random_range(-delta..delta),
                        center.1 + rng.random_range(-delta..delta),
                    )
                })
                .collect()
        }
        Sampler::Gaussian { sigma_rho, sigma_z } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let nr = Normal::new(center.0, sigma_rho).expect("validated width");
            let nz = Normal::new(center.1, sigma_z).expect("validated width");
            (0..samples).map(|_| (nr.sample(&mut rng), nz.sample(&mut rng))).collect()
        }
    }
}

fn locus_enters(w: &FieldWaveform, lo: (f64, f64), hi: (f64, f64)) -> bool {
    if !w.is_time_dependent() {
        return false;
    }
    let n = 4096;
    let pts: Vec<Option<(f64, f64)>> = (0..=n)
        .map(|j| crate::field_model::zero_locus_at_phase(w, 2.0 * PI * j as f64 / n as f64).ok())
        .collect();
    let inside = |p: (f64, f64)| p.0 >= lo.0 && p.0 <= hi.0 && p.1 >= lo.1 && p.1 <= hi.1;
    // points, plus a midpoint check on each segment for fast-moving stretches
    pts.windows(2).any(|s| match (s[0], s[1]) {
        (Some(a), Some(b)) => inside(a) || inside(((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0)),
        (Some(a), None) | (None, Some(a)) => inside(a),
        _ => false,
    })
}

/// Spread of `cos beta0` over the transverse region around `center`.
///
/// Sample points are generated deterministically from `seed`. When the
/// region reaches the zero locus the report is flagged rather than
/// rejected; only a sample whose period average cannot be converged is an
/// error.
pub fn fluctuation(
    w: &FieldWaveform,
    center: (f64, f64),
    delta: f64,
    sampler: Sampler,
    samples: usize,
    seed: u64,
) -> Result<FluctuationReport> {
    w.validate()?;
    if !(delta > 0.0) || samples == 0 {
        return Err(RingError::InvalidInput("delta must be > 0 and samples > 0".into()));
    }
    let reach = match sampler {
        Sampler::Gaussian { sigma_rho, sigma_z } => {
            if !(sigma_rho > 0.0 && sigma_z > 0.0) {
                return Err(RingError::InvalidInput("Gaussian widths must be > 0".into()));
            }
            (6.0 * sigma_rho, 6.0 * sigma_z)
        }
        _ => (delta, delta),
    };
    if center.0 - reach.0 <= 0.0 {
        return Err(RingError::InvalidInput("sampled region reaches the axis".into()));
    }
    let reference = cos_beta0(w, center.0, center.1)?;
    let points = sample_points(center, delta, sampler, samples, seed);
    let values = points
        .par_iter()
        .map(|&(r, z)| cos_beta0_unchecked(w, r, z, SAMPLE_TOL, SAMPLE_MAX_NODES))
        .collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    let sq: Vec<f64> = values.iter().map(|v| (v - reference).powi(2)).collect();
    let mean_sq = sq.iter().sum::<f64>() / n;
    let var_sq = if values.len() > 1 {
        sq.iter().map(|s| (s - mean_sq).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let f = mean_sq.sqrt();
    let stderr = if f > 0.0 { (var_sq / n).sqrt() / (2.0 * f) } else { 0.0 };
    let phasor: Complex64 = values
        .iter()
        .map(|v| Complex64::from_polar(1.0, 2.0 * PI * (v - reference)))
        .sum::<Complex64>()
        / n;
    let touches = locus_enters(
        w,
        (center.0 - reach.0, center.1 - reach.1),
        (center.0 + reach.0, center.1 + reach.1),
    );
    Ok(FluctuationReport {
        f,
        stderr,
        delta,
        samples: values.len(),
        contrast: phasor.norm().min(1.0),
        touches_zero_locus: touches,
    })
}

/// Which transverse sampler a sweep uses; Gaussian widths follow from the
/// trap frequencies at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    FlatGrid,
    FlatRandom,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    /// Region half-widths in units of `L`; empty skips the fluctuation.
    pub deltas: Vec<f64>,
    pub sampler: SamplerKind,
    pub samples: usize,
    pub seed: u64,
    /// Highest harmonic kept in the spectrum.
    pub n_max: usize,
    pub atom: Atom,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            deltas: vec![0.001, 0.005, 0.015],
            sampler: SamplerKind::FlatRandom,
            samples: 10_000,
            seed: 1,
            n_max: 8,
            atom: Atom::rb87(),
        }
    }
}

/// Observables at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub rho_c: f64,
    pub z_c: f64,
    pub cos_beta0: f64,
    pub c2: f64,
    pub c4: f64,
    /// One report per requested delta, in order.
    pub fluctuation: Vec<FluctuationReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub l_over_l: f64,
    pub n_over_l: f64,
    pub outcome: std::result::Result<SweepPoint, RingError>,
}

fn sweep_point(w: &FieldWaveform, opts: &SweepOptions, seed: u64) -> Result<SweepPoint> {
    let (rho_c, z_c) = ring_center(w)?;
    let spec = fourier_spectrum(w, rho_c, z_c, opts.n_max.max(4))?;
    let cb0 = cos_beta0(w, rho_c, z_c)?;
    let sampler = match opts.sampler {
        SamplerKind::FlatGrid => Sampler::FlatGrid,
        SamplerKind::FlatRandom => Sampler::FlatRandom,
        SamplerKind::Gaussian => {
            let fr = trap_frequencies(w, (rho_c, z_c), &opts.atom)?;
            let (sigma_rho, sigma_z) = ground_state_widths(fr.f_rho, fr.f_z, &opts.atom);
            Sampler::Gaussian { sigma_rho, sigma_z }
        }
    };
    let fluctuation = opts
        .deltas
        .iter()
        .enumerate()
        .map(|(k, d)| {
            fluctuation(
                w,
                (rho_c, z_c),
                d * w.length_l,
                sampler,
                opts.samples,
                seed.wrapping_add(k as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepPoint {
        rho_c,
        z_c,
        cos_beta0: cb0,
        c2: spec.amplitude(2),
        c4: spec.amplitude(4),
        fluctuation,
    })
}

/// Evaluate the observables on a grid of `(l/L, n/L)` values derived from
/// `base`. Points run in parallel; rows come back in grid order and a failed
/// point carries its error instead of aborting the sweep.
pub fn sweep(base: &FieldWaveform, grid: &[(f64, f64)], opts: &SweepOptions) -> Vec<SweepRow> {
    grid.par_iter()
        .enumerate()
        .map(|(i, &(lr, nr))| {
            let w = base.with_ratios(lr, nr);
            // independent deterministic stream per point
            let seed = opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add((i as u64) << 8);
            SweepRow {
                l_over_l: lr,
                n_over_l: nr,
                outcome: w.validate().and_then(|_| sweep_point(&w, opts, seed)),
            }
        })
        .collect()
}

/// Least-squares polynomial fit; returns coefficients in ascending order
/// and the RMS residual.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<(Vec<f64>, f64)> {
    if xs.len() != ys.len() || xs.len() <= degree {
        return Err(RingError::InvalidInput("need more points than coefficients".into()));
    }
    let a = DMatrix::from_fn(xs.len(), degree + 1, |i, j| xs[i].powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&b, 1e-14)
        .map_err(|e| RingError::FitFailed(e.to_string()))?;
    let r = &a * &coef - &b;
    let rms = (r.norm_squared() / xs.len() as f64).sqrt();
    Ok((coef.iter().copied().collect(), rms))
}

/// Convenience: ring center and `cos beta0` in one call.
pub fn center_cos_beta0(w: &FieldWaveform) -> Result<((f64, f64), f64)> {
    let c = match w.mode {
        TrapMode::Tort => find_trap_center(w)?.position(),
        TrapMode::StaticAzimuthalBias => ring_center(w)?,
    };
    Ok((c, cos_beta0(w, c.0, c.1)?))
}

/// Rotation-induced phase of a ring interferometer,
/// `2 pi m Omega rho_c^2 cos(theta) / hbar` (rad), with `theta` the angle
/// between the rotation axis and the ring normal.
pub fn sagnac_phase(mass: f64, omega_rot: f64, rho_c: f64, theta: f64) -> f64 {
    2.0 * PI * mass * omega_rot * rho_c * rho_c * theta.cos() / HBAR
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    fn n0(l: f64) -> FieldWaveform {
        FieldWaveform::tort(7800.0, 0.1, 0.0, l * 0.1, 2.0 * PI * 5000.0)
    }

    // oracle: Gauss-Legendre over the period, independent of the trapezoid
    fn gl_cos_beta0(w: &FieldWaveform, rho: f64, z: f64) -> f64 {
        gauss_legendre(
            |th| {
                let b = w.field_at_phase(rho, z, th).unwrap();
                b.b_z / b.magnitude()
            },
            0.0,
            2.0 * PI,
            256,
        ) / (2.0 * PI)
    }

    #[test]
    fn static_bias_ring_has_no_connection() {
        let w = FieldWaveform::static_bias(7800.0, 0.1, 0.05, 10.0);
        let ((r, z), c) = center_cos_beta0(&w).unwrap();
        assert!(c.abs() < 1e-12, "{c}");
        assert_eq!(berry_phase_closed(c, 1).unwrap(), 0.0);
        let spec = fourier_spectrum(&w, r, z, 8).unwrap();
        assert!(spec.harmonics.is_empty());
    }

    #[test]
    fn half_drive_matches_quadrature_oracle() {
        let w = n0(0.5);
        let (r, z) = find_trap_center(&w).unwrap().position();
        let c = cos_beta0(&w, r, z).unwrap();
        assert!((c - gl_cos_beta0(&w, r, z)).abs() < 1e-10);
        assert!((c - 0.1605).abs() < 5e-4, "{c}");
    }

    #[test]
    fn small_drive_is_linear_with_slope_near_point_three() {
        let xs = [0.1, 0.2];
        let ys: Vec<f64> = xs
            .iter()
            .map(|&l| center_cos_beta0(&n0(l)).unwrap().1)
            .collect();
        let slope = ys[0] / xs[0];
        assert!((slope - 0.3).abs() < 0.03, "{slope}");
        assert!((ys[1] / ys[0] - 2.0).abs() < 0.02);
    }

    #[test]
    fn zero_crossing_is_singular() {
        let w = n0(0.5);
        let p = crate::field_model::zero_locus_at_phase(&w, 1.0).unwrap();
        assert!(matches!(cos_beta0(&w, p.0, p.1), Err(RingError::ConnectionSingular { .. })));
        assert!(matches!(fourier_spectrum(&w, p.0, p.1, 4), Err(RingError::ConnectionSingular { .. })));
    }

    #[test]
    fn synthetic_spectrum_is_recovered() {
        let n = 4096;
        let s: Vec<f64> = (0..n)
            .map(|j| 0.1 + 0.05 * (2.0 * 2.0 * PI * j as f64 / n as f64).cos())
            .collect();
        let spec = spectrum_from_samples(&s, 8, 1.0).unwrap();
        assert!((spec.cos_beta0 - 0.1).abs() < 1e-15);
        assert_eq!(spec.harmonics.len(), 1);
        assert_eq!(spec.harmonics[0].n, 2);
        assert!((spec.harmonics[0].amplitude - 0.05).abs() < 1e-15);
        assert!(spec.harmonics[0].phase.abs() < 1e-12);
        assert!(spec.parseval_residual.abs() < 1e-15);
    }

    #[test]
    fn full_drive_spectrum_is_even_and_reconstructs() {
        let w = n0(1.0);
        let (r, z) = find_trap_center(&w).unwrap().position();
        let spec = fourier_spectrum(&w, r, z, 2047).unwrap();
        let c0 = cos_beta0(&w, r, z).unwrap();
        assert!((spec.cos_beta0 - c0).abs() < 1e-10);
        assert!(spec.reconstruction_rms < 1e-8, "{}", spec.reconstruction_rms);
        let mut by_size = spec.harmonics.clone();
        by_size.sort_by(|a, b| b.amplitude.total_cmp(&a.amplitude));
        assert_eq!((by_size[0].n, by_size[1].n), (2, 4));
        // odd harmonics vanish by the theta -> theta + pi symmetry of n = 0
        assert!(spec.amplitude(1) < 1e-10 && spec.amplitude(3) < 1e-10);
    }

    #[test]
    fn closed_phase_examples() {
        assert_eq!(berry_phase_closed(0.3, 0).unwrap(), 0.0);
        let one = berry_phase_closed(0.1, 1).unwrap();
        assert!((one - 0.2 * PI).abs() < 1e-15);
        assert!((berry_phase_closed(0.1, 3).unwrap() - 3.0 * one).abs() < 1e-15);
        assert!(berry_phase_closed(1.2, 1).is_err());
    }

    #[test]
    fn residual_bound_formula() {
        let spec = ConnectionSpectrum {
            cos_beta0: 0.2,
            harmonics: vec![Harmonic { n: 2, amplitude: 0.1, phase: 0.0 }],
            omega: 1000.0,
            parseval_residual: 0.0,
            reconstruction_rms: 0.0,
        };
        assert!((residual_phase_bound(&spec, 1.0).unwrap() - 1e-4).abs() < 1e-18);
        assert_eq!(residual_phase_bound(&spec, 0.0).unwrap(), 0.0);
        let flat = ConnectionSpectrum { harmonics: vec![], ..spec };
        assert_eq!(residual_phase_bound(&flat, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn fluctuation_vanishes_with_the_region() {
        let w = n0(0.5);
        let c = find_trap_center(&w).unwrap().position();
        let tiny = fluctuation(&w, c, 1e-7, Sampler::FlatGrid, 100, 0).unwrap();
        let small = fluctuation(&w, c, 1e-4, Sampler::FlatGrid, 100, 0).unwrap();
        assert!(tiny.f < 1e-5 && tiny.f < small.f);
        assert!(1.0 - tiny.contrast < 1e-9);
        assert!(!tiny.touches_zero_locus);
    }

    #[test]
    fn fluctuation_grows_with_delta() {
        let w = n0(0.5);
        let c = find_trap_center(&w).unwrap().position();
        let f: Vec<f64> = [0.001, 0.005, 0.015]
            .iter()
            .map(|d| fluctuation(&w, c, d * 0.1, Sampler::FlatRandom, 2000, 7).unwrap().f)
            .collect();
        assert!(f[2] > f[1] && f[1] > f[0], "{f:?}");
    }

    #[test]
    fn random_sampling_is_reproducible() {
        let w = n0(0.5);
        let c = find_trap_center(&w).unwrap().position();
        let a = fluctuation(&w, c, 5e-4, Sampler::FlatRandom, 300, 42).unwrap();
        let b = fluctuation(&w, c, 5e-4, Sampler::FlatRandom, 300, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_widths_follow_the_oscillator_length() {
        let atom = Atom::rb87();
        let (sr, sz) = ground_state_widths(40.0, 160.0, &atom);
        assert!((sr / sz - 2.0).abs() < 1e-12);
        assert!((sr - (HBAR / (2.0 * atom.mass * 2.0 * PI * 40.0)).sqrt()).abs() < 1e-18);
    }

    #[test]
    fn sweep_keeps_order_and_records_failures() {
        let base = n0(0.1);
        let opts = SweepOptions {
            deltas: vec![],
            ..SweepOptions::default()
        };
        assert!(sweep(&base, &[], &opts).is_empty());
        let rows = sweep(&base, &[(0.2, 0.0), (0.1, 0.0), (0.5, -1.0)], &opts);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].l_over_l, 0.2);
        assert!(rows[0].outcome.as_ref().unwrap().cos_beta0 > rows[1].outcome.as_ref().unwrap().cos_beta0);
        assert!(matches!(rows[2].outcome, Err(RingError::InvalidInput(_))));
    }

    #[test]
    fn n_changes_cos_beta0() {
        let a = center_cos_beta0(&n0(0.5)).unwrap().1;
        let b = center_cos_beta0(&n0(0.5).with_ratios(0.5, 1.0)).unwrap().1;
        assert!((a - b).abs() > 1e-3, "{a} {b}");
    }

    #[test]
    fn polyfit_recovers_exact_quadratic() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x - 0.16 * x * x).collect();
        let (c, rms) = polyfit(&xs, &ys, 2).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[1] + 0.5).abs() < 1e-12 && (c[2] + 0.16).abs() < 1e-12);
        assert!(rms < 1e-13);
    }

    #[test]
    fn sagnac_matches_area_form() {
        let m = Atom::rb87().mass;
        let (omega, rho) = (7.3e-5, 0.12);
        let area = PI * rho * rho;
        let oracle = 2.0 * m * omega * area / HBAR;
        assert!((sagnac_phase(m, omega, rho, 0.0) - oracle).abs() < 1e-12 * oracle);
        assert_eq!(sagnac_phase(m, 0.0, rho, 0.3), 0.0);
        assert!(sagnac_phase(m, omega, rho, PI / 2.0).abs() < 1e-15 * oracle);
    }
}
