use std::f64::consts::PI;

use num_complex::Complex64;

use super::gauge::GaugeProfile;
use super::packet::{grid_point, init_packet, wrap_angle, Spectral, WavePacket};
use super::potential::RingPotential;
use super::propagate::{max_step, SplitStepper};
use super::RingUnits;
use crate::error::{Result, RingError};

const MIN_CONTRAST: f64 = 0.05;
const ENVELOPE_TOL: f64 = 1e-8;
// points whose envelope weight is below this fraction of the peak are not fitted
const FIT_FLOOR: f64 = 1e-3;
// half-width of the wavenumber bracket around the FFT seed
const KAPPA_BRACKET: f64 = 1.5;

/// Parameters of the two-packet experiment, in natural ring units.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceConfig {
    /// Common starting point of both packets (rad).
    pub phi0: f64,
    /// Launch velocity; the packets start at `+v0` and `-v0`.
    pub v0: f64,
    /// RMS width (rad).
    pub width: f64,
    /// Grid points.
    pub n: usize,
    /// Step; half the largest accepted step when `None`.
    pub dt: Option<f64>,
    /// Give up after this time; two half-circuit times when `None`.
    pub t_max: Option<f64>,
    pub units: RingUnits,
}

impl InterferenceConfig {
    pub fn new(units: RingUnits) -> Self {
        InterferenceConfig {
            phi0: 0.0,
            v0: 40.0,
            width: 0.15,
            n: 2048,
            dt: None,
            t_max: None,
            units,
        }
    }

    fn t_max(&self) -> f64 {
        self.t_max
            .unwrap_or(if self.v0 != 0.0 { 2.0 * PI / self.v0.abs() } else { 1.0 })
    }
}

/// Density at overlap and the fitted fringe model
/// `n = n+ + n- + 2 sqrt(n+ n-) C cos(kappa (phi - phi_ref) + theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceResult {
    pub phi: Vec<f64>,
    /// Total density, integrating to 1.
    pub density: Vec<f64>,
    /// Separate packet densities on the same normalization.
    pub n_plus: Vec<f64>,
    pub n_minus: Vec<f64>,
    /// Overlap time, natural units and seconds.
    pub overlap_time: f64,
    pub overlap_time_seconds: f64,
    pub steps: usize,
    pub dt: f64,
    /// Point where the packet centers meet; fringe phases refer to it.
    pub phi_ref: f64,
    /// Fitted fringe wavenumber (rad^-1).
    pub fringe_wavenumber: f64,
    /// `v+ - v-` at overlap.
    pub predicted_wavenumber: f64,
    /// Fitted `theta` (rad, in `(-pi, pi]`).
    pub fringe_phase: f64,
    pub contrast: f64,
    /// RMS fit residual relative to the peak fringe amplitude.
    pub fit_rms: f64,
    /// Fringe phase of the matching run without gauge potential.
    pub xi: f64,
    /// Shift relative to that run, unwrapped toward `loop_integral`.
    pub extracted_gamma: f64,
    /// The same shift reduced into `(-pi, pi]`.
    pub gamma_mod_2pi: f64,
    /// Whole turns added while unwrapping.
    pub winding: i64,
    /// `oint A dphi` of the gauge used.
    pub loop_integral: f64,
}

/// Fitted fringe parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FringeFit {
    pub kappa: f64,
    pub theta: f64,
    pub contrast: f64,
    pub rms: f64,
}

fn circular_center(psi: &[Complex64], phase: &[Complex64]) -> f64 {
    psi.iter()
        .zip(phase)
        .map(|(a, e)| e * a.norm_sqr())
        .sum::<Complex64>()
        .arg()
}

/// Root in `[t1, t2]` of the quadratic through three samples, refined from
/// the secant guess.
fn crossing_root(t: [f64; 3], d: [f64; 3]) -> f64 {
    let s21 = (d[2] - d[1]) / (t[2] - t[1]);
    let mut root = t[2] - d[2] / s21;
    if t[1] > t[0] {
        let s10 = (d[1] - d[0]) / (t[1] - t[0]);
        let c = (s21 - s10) / (t[2] - t[0]);
        for _ in 0..20 {
            let f = d[2] + s21 * (root - t[2]) + c * (root - t[2]) * (root - t[1]);
            let df = s21 + c * (2.0 * root - t[2] - t[1]);
            if df == 0.0 {
                break;
            }
            let next = root - f / df;
            if (next - root).abs() < 1e-16 * t[2].abs().max(1.0) {
                root = next;
                break;
            }
            root = next;
        }
    }
    root.clamp(t[1], t[2])
}

/// Weighted least squares of `i ~ w (alpha cos kappa u + beta sin kappa u)`
/// for fixed `kappa`; returns `(alpha, beta, residual)`.
fn linear_fit(kappa: f64, u: &[f64], w: &[f64], i: &[f64]) -> (f64, f64, f64) {
    let (mut scc, mut sss, mut scs, mut rc, mut rs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&u, &w), &y) in u.iter().zip(w).zip(i) {
        let (s, c) = (kappa * u).sin_cos();
        let (wc, ws) = (w * c, w * s);
        scc += wc * wc;
        sss += ws * ws;
        scs += wc * ws;
        rc += y * wc;
        rs += y * ws;
    }
    let det = scc * sss - scs * scs;
    if det.abs() <= f64::MIN_POSITIVE {
        return (0.0, 0.0, i.iter().map(|y| y * y).sum());
    }
    let alpha = (rc * sss - rs * scs) / det;
    let beta = (rs * scc - rc * scs) / det;
    let res = u
        .iter()
        .zip(w)
        .zip(i)
        .map(|((&u, &w), &y)| {
            let (s, c) = (kappa * u).sin_cos();
            (y - w * (alpha * c + beta * s)).powi(2)
        })
        .sum();
    (alpha, beta, res)
}

/// Fit the cross term `i = n - n+ - n-` with envelope `2 sqrt(n+ n-)`.
/// The wavenumber is seeded from the FFT peak of `i`, signed by
/// `kappa_sign`, and refined by golden-section search.
pub(crate) fn fit_fringes(
    phi: &[f64],
    n_plus: &[f64],
    n_minus: &[f64],
    density: &[f64],
    phi_ref: f64,
    kappa_sign: f64,
) -> Result<FringeFit> {
    let n = phi.len();
    let cross: Vec<f64> = (0..n).map(|j| density[j] - n_plus[j] - n_minus[j]).collect();
    let weight: Vec<f64> = (0..n).map(|j| 2.0 * (n_plus[j] * n_minus[j]).sqrt()).collect();
    let w_max = weight.iter().cloned().fold(0.0, f64::max);
    if !(w_max > 0.0) {
        return Err(RingError::Unfittable(0.0));
    }
    let keep: Vec<usize> = (0..n).filter(|&j| weight[j] > FIT_FLOOR * w_max).collect();
    let u: Vec<f64> = keep.iter().map(|&j| wrap_angle(phi[j] - phi_ref)).collect();
    let w: Vec<f64> = keep.iter().map(|&j| weight[j]).collect();
    let y: Vec<f64> = keep.iter().map(|&j| cross[j]).collect();

    let mut spec: Vec<Complex64> = cross.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    Spectral::new(n).forward(&mut spec);
    let peak = (1..n / 2)
        .max_by(|&a, &b| spec[a].norm_sqr().total_cmp(&spec[b].norm_sqr()))
        .unwrap_or(1);
    let sign = if kappa_sign < 0.0 { -1.0 } else { 1.0 };
    let seed = sign * peak as f64;

    let cost = |k: f64| linear_fit(k, &u, &w, &y).2;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (seed - KAPPA_BRACKET, seed + KAPPA_BRACKET);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = cost(x2);
        }
    }
    let kappa = 0.5 * (lo + hi);
    let (alpha, beta, res) = linear_fit(kappa, &u, &w, &y);
    let contrast = alpha.hypot(beta);
    if !(contrast >= MIN_CONTRAST) {
        return Err(RingError::Unfittable(contrast));
    }
    let amp = y.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    Ok(FringeFit {
        kappa,
        theta: (-beta).atan2(alpha),
        contrast,
        rms: (res / y.len() as f64).sqrt() / amp,
    })
}

/// Evolve both packets with gauge `a` until their centers meet on the far
/// side, then fit the fringes. `xi` and `extracted_gamma` are left for the
/// caller.
fn single_run(a: &GaugeProfile, v: &dyn RingPotential, cfg: &InterferenceConfig) -> Result<InterferenceResult> {
    let plus = init_packet(cfg.phi0, cfg.v0, cfg.width, a, cfg.n, cfg.units)?;
    let minus = init_packet(cfg.phi0, -cfg.v0, cfg.width, a, cfg.n, cfg.units)?;
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => 0.5 * max_step(&plus, a).min(max_step(&minus, a)),
    };
    let mut sp = SplitStepper::new(&plus, a, v);
    let mut sm = SplitStepper::new(&minus, a, v);
    sp.check_step(dt)?;
    sm.check_step(dt)?;

    let n = cfg.n;
    let phi: Vec<f64> = (0..n).map(|j| grid_point(j, n)).collect();
    let phase: Vec<Complex64> = phi.iter().map(|&x| Complex64::from_polar(1.0, x)).collect();
    let (mut cp, mut cm) = (circular_center(sp.raw(), &phase), circular_center(sm.raw(), &phase));
    let t_max = cfg.t_max();
    let mut hist_t = [0.0, 0.0, sp.time];
    let mut hist_d = [f64::NAN, f64::NAN, cp - cm - 2.0 * PI];
    let mut steps = 0usize;
    loop {
        if sp.time - plus.time >= t_max {
            return Err(RingError::NoOverlap(cfg.units.to_seconds(t_max)));
        }
        let saved = (sp.snapshot(), sm.snapshot(), cp, cm);
        sp.step(dt);
        sm.step(dt);
        steps += 1;
        cp += wrap_angle(circular_center(sp.raw(), &phase) - cp);
        cm += wrap_angle(circular_center(sm.raw(), &phase) - cm);
        hist_t = [hist_t[1], hist_t[2], sp.time];
        hist_d = [hist_d[1], hist_d[2], cp - cm - 2.0 * PI];
        if hist_d[2] >= 0.0 {
            let tt = if hist_d[0].is_nan() { [hist_t[1], hist_t[1], hist_t[2]] } else { hist_t };
            let root = crossing_root(tt, hist_d);
            let (s_plus, s_minus, c_plus, c_minus) = saved;
            sp.restore(s_plus);
            sm.restore(s_minus);
            let h = root - sp.time;
            if h > 0.0 {
                sp.step(h);
                sm.step(h);
            }
            cp = c_plus + wrap_angle(circular_center(sp.raw(), &phase) - c_plus);
            cm = c_minus + wrap_angle(circular_center(sm.raw(), &phase) - c_minus);
            break;
        }
    }

    let pp = sp.packet();
    let pm = sm.packet();
    finish(a, cfg, &phi, &pp, &pm, cp, cm, dt, steps)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    a: &GaugeProfile,
    cfg: &InterferenceConfig,
    phi: &[f64],
    pp: &WavePacket,
    pm: &WavePacket,
    cp: f64,
    cm: f64,
    dt: f64,
    steps: usize,
) -> Result<InterferenceResult> {
    let dphi = pp.dphi();
    let raw: Vec<f64> = pp
        .amplitudes
        .iter()
        .zip(&pm.amplitudes)
        .map(|(x, y)| 0.5 * (x + y).norm_sqr())
        .collect();
    let total: f64 = raw.iter().sum::<f64>() * dphi;
    let density: Vec<f64> = raw.iter().map(|d| d / total).collect();
    let n_plus: Vec<f64> = pp.amplitudes.iter().map(|x| 0.5 * x.norm_sqr() / total).collect();
    let n_minus: Vec<f64> = pm.amplitudes.iter().map(|x| 0.5 * x.norm_sqr() / total).collect();
    let phi_ref = (0.5 * (cp + cm + 2.0 * PI)).rem_euclid(2.0 * PI);
    let predicted = pp.v_bar - pm.v_bar;
    let fit = fit_fringes(phi, &n_plus, &n_minus, &density, phi_ref, predicted)?;
    let time = pp.time;
    Ok(InterferenceResult {
        phi: phi.to_vec(),
        density,
        n_plus,
        n_minus,
        overlap_time: time,
        overlap_time_seconds: cfg.units.to_seconds(time),
        steps,
        dt,
        phi_ref,
        fringe_wavenumber: fit.kappa,
        predicted_wavenumber: predicted,
        fringe_phase: fit.theta,
        contrast: fit.contrast,
        fit_rms: fit.rms,
        xi: fit.theta,
        extracted_gamma: 0.0,
        gamma_mod_2pi: 0.0,
        winding: 0,
        loop_integral: a.loop_integral(),
    })
}

/// Run the two-packet experiment with gauge `a` and, concurrently, without
/// it; the fringe shift between the two is the extracted geometric phase.
pub fn run_interference(
    a: &GaugeProfile,
    v: &dyn RingPotential,
    cfg: &InterferenceConfig,
) -> Result<InterferenceResult> {
    let zero = GaugeProfile::zero();
    let (with_a, without) = rayon::join(|| single_run(a, v, cfg), || single_run(&zero, v, cfg));
    let (mut with_a, without) = (with_a?, without?);
    let gamma = extract_fringe_shift(&with_a, &without)?;
    let reduced = wrap_angle(gamma);
    with_a.xi = without.fringe_phase;
    with_a.extracted_gamma = gamma;
    with_a.gamma_mod_2pi = reduced;
    with_a.winding = ((gamma - reduced) / (2.0 * PI)).round() as i64;
    Ok(with_a)
}

/// Fringe phase of `with_a` relative to `without_a`, unwrapped to the
/// branch nearest the difference of their loop integrals.
///
/// Fails with `InconsistentRuns` unless both runs used the same grid and
/// their separate packet densities agree to 1e-8.
pub fn extract_fringe_shift(with_a: &InterferenceResult, without_a: &InterferenceResult) -> Result<f64> {
    if with_a.phi.len() != without_a.phi.len() {
        return Err(RingError::GridMismatch(format!(
            "{} vs {} points",
            with_a.phi.len(),
            without_a.phi.len()
        )));
    }
    let mismatch = with_a
        .n_plus
        .iter()
        .zip(&without_a.n_plus)
        .chain(with_a.n_minus.iter().zip(&without_a.n_minus))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if !(mismatch <= ENVELOPE_TOL) {
        return Err(RingError::InconsistentRuns(mismatch));
    }
    let raw = with_a.fringe_phase - without_a.fringe_phase;
    let target = with_a.loop_integral - without_a.loop_integral;
    Ok(raw + 2.0 * PI * ((target - raw) / (2.0 * PI)).round())
}

/// Extracted phase at `(N, dt)` and at `(2N, dt/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub base: InterferenceResult,
    pub refined: InterferenceResult,
    pub change: f64,
}

/// Repeat the experiment with twice the grid and half the step.
pub fn convergence_check(
    a: &GaugeProfile,
    v: &dyn RingPotential,
    cfg: &InterferenceConfig,
) -> Result<ConvergenceReport> {
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => {
            let p = init_packet(cfg.phi0, cfg.v0, cfg.width, a, cfg.n, cfg.units)?;
            let m = init_packet(cfg.phi0, -cfg.v0, cfg.width, a, cfg.n, cfg.units)?;
            0.5 * max_step(&p, a).min(max_step(&m, a))
        }
    };
    let base_cfg = InterferenceConfig { dt: Some(dt), ..cfg.clone() };
    let fine_cfg = InterferenceConfig {
        dt: Some(dt / 2.0),
        n: 2 * cfg.n,
        ..cfg.clone()
    };
    let (base, refined) = rayon::join(
        || run_interference(a, v, &base_cfg),
        || run_interference(a, v, &fine_cfg),
    );
    let (base, refined) = (base?, refined?);
    let change = (refined.extracted_gamma - base.extracted_gamma).abs();
    Ok(ConvergenceReport { base, refined, change })
}
