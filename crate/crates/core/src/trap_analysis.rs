//! Time-averaged trapping potential: ring center, trap frequencies and
//! adiabaticity ratios.
//!
//! The potential of the m_F = -1 low-field seeker is
//! `U = -mu_B g_F <|B|>`, positive curvature at the ring center.

use std::f64::consts::PI;

use log::warn;
use rayon::prelude::*;

use crate::error::{Result, RingError};
use crate::field_model::{trace_zero_locus, zero_locus_at_phase, FieldVector, FieldWaveform, TrapMode};
use crate::quadrature::{periodic_mean, periodic_mean_fixed};
use crate::units::Atom;

const AVG_TOL: f64 = 1e-10;
const AVG_MAX_NODES: usize = 1 << 22;

/// Mean of `|B(theta)|` over one drive period, converged to `rel_tol`.
fn mean_magnitude<F>(field: F, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> FieldVector,
{
    Ok(periodic_mean(|th| field(th).magnitude(), rel_tol, 64, AVG_MAX_NODES)?.value)
}

/// `(omega/2pi) int |B(rho, z, t)| dt` over one drive period (G).
///
/// Static configurations return `|B|` at the point.
pub fn time_avg_field_magnitude(w: &FieldWaveform, rho: f64, z: f64) -> Result<f64> {
    w.validate()?;
    if rho < 0.0 {
        return Err(RingError::InvalidInput(format!("rho = {rho} < 0")));
    }
    // also surfaces the wire singularity before entering the quadrature
    let b = w.field_at_phase(rho, z, 0.0)?;
    if !w.is_time_dependent() {
        return Ok(b.magnitude());
    }
    mean_magnitude(|th| w.field_at_phase(rho, z, th).unwrap_or_default(), AVG_TOL)
}

/// Time-averaged magnitude on a fixed node set. Neighbouring evaluations
/// share the discretization, which keeps finite differences smooth.
/// The field is mirrored to `|rho|`, which is exact without a bias wire.
fn avg_fixed(w: &FieldWaveform, rho: f64, z: f64, nodes: usize) -> f64 {
    let rho = rho.abs();
    periodic_mean_fixed(|th| w.field_at_phase(rho, z, th).map(|b| b.magnitude()).unwrap_or(f64::INFINITY), nodes)
}

/// Node count that resolves the time average at `(rho, z)` to well below
/// the tolerances used for derivatives.
fn objective_nodes(w: &FieldWaveform, rho: f64, z: f64) -> Result<usize> {
    if !w.is_time_dependent() {
        return Ok(1);
    }
    let m = periodic_mean(
        |th| w.field_at_phase(rho.abs(), z, th).map(|b| b.magnitude()).unwrap_or(0.0),
        1e-13,
        32,
        1 << 18,
    )?;
    Ok((2 * m.nodes).max(128))
}

/// Search region and starting points for [`find_trap_center_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterSearch {
    /// Box center; defaults to the centroid of the zero locus.
    pub center: Option<(f64, f64)>,
    /// Box half-width in units of `L`.
    pub half_width: f64,
    /// Number of simplex starts (at least 5).
    pub starts: usize,
}

impl Default for CenterSearch {
    fn default() -> Self {
        CenterSearch {
            center: None,
            half_width: 2.0,
            starts: 5,
        }
    }
}

/// Located ring center together with convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapCenter {
    pub rho: f64,
    pub z: f64,
    /// `<|B|>` at the center (G).
    pub avg_field: f64,
    /// `|grad <|B|>| L / <|B|>` at the center.
    pub gradient_rel: f64,
    /// Starts that converged onto the reported center.
    pub agreeing_starts: usize,
    /// Trapezoid nodes per period used by the objective.
    pub nodes: usize,
}

impl TrapCenter {
    pub fn position(&self) -> (f64, f64) {
        (self.rho, self.z)
    }
}

/// Local minimizer of the time-averaged field magnitude with default search
/// settings.
pub fn find_trap_center(w: &FieldWaveform) -> Result<TrapCenter> {
    find_trap_center_with(w, &CenterSearch::default())
}

pub fn find_trap_center_with(w: &FieldWaveform, search: &CenterSearch) -> Result<TrapCenter> {
    w.validate()?;
    if w.mode != TrapMode::Tort {
        return Err(RingError::InvalidInput("center search needs TORT mode; use ring_center".into()));
    }
    if search.starts < 5 || !(search.half_width > 0.0) {
        return Err(RingError::InvalidInput("need >= 5 starts and a positive box".into()));
    }
    let len = w.length_l;
    let c = match search.center {
        Some(c) => c,
        None => {
            let trace = trace_zero_locus(w, 256, None)?;
            trace.centroid().ok_or_else(|| RingError::TrapNotFormed("zero locus never exists".into()))?
        }
    };
    let half = search.half_width * len;
    let nodes = objective_nodes(w, c.0, c.1)?;
    let inside = |p: (f64, f64)| (p.0 - c.0).abs() < half && (p.1 - c.1).abs() < half;
    let objective = |p: [f64; 2]| -> f64 {
        if inside((p[0], p[1])) {
            avg_fixed(w, p[0], p[1], nodes)
        } else {
            f64::INFINITY
        }
    };

    let starts: Vec<[f64; 2]> = (0..search.starts)
        .map(|k| {
            if k == 0 {
                [c.0, c.1]
            } else {
                let a = 2.0 * PI * (k - 1) as f64 / (search.starts - 1) as f64;
                [c.0 + 0.25 * len * a.cos(), c.1 + 0.25 * len * a.sin()]
            }
        })
        .collect();

    let h = 1e-4 * len;
    let results: Vec<[f64; 2]> = starts
        .par_iter()
        .map(|s| {
            let p = nelder_mead(&objective, *s, 0.2 * len, 1e-11 * len, 4000);
            newton_polish(&objective, p, h)
        })
        .collect();

    let mut scored: Vec<([f64; 2], f64)> = results.iter().map(|p| (*p, objective(*p))).collect();
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0[0].abs().total_cmp(&b.0[0].abs())));
    let (best, value) = scored[0];
    if !value.is_finite() {
        return Err(RingError::TrapNotFormed("no finite objective in search box".into()));
    }
    let margin = 1e-3 * half;
    if (best[0] - c.0).abs() > half - margin || (best[1] - c.1).abs() > half - margin {
        return Err(RingError::TrapNotFormed(format!(
            "minimum at box boundary ({:.6}, {:.6})",
            best[0], best[1]
        )));
    }
    let agree_tol = 1e-6 * len;
    let agreeing = scored
        .iter()
        .filter(|(p, _)| ((p[0] - best[0]).powi(2) + (p[1] - best[1]).powi(2)).sqrt() < agree_tol)
        .count();
    if agreeing < 3 {
        return Err(RingError::TrapNotFormed(format!(
            "only {agreeing} of {} starts agree on the minimum",
            search.starts
        )));
    }
    let g = gradient(&objective, best, h);
    let gradient_rel = g[0].hypot(g[1]) * len / value.max(f64::MIN_POSITIVE);
    Ok(TrapCenter {
        rho: best[0].abs(),
        z: best[1],
        avg_field: value,
        gradient_rel,
        agreeing_starts: agreeing,
        nodes,
    })
}

/// Center of the ring in either mode. TORT: minimum of `<|B|>`. Static bias
/// ring: the poloidal zero, where the remaining field is purely azimuthal.
pub fn ring_center(w: &FieldWaveform) -> Result<(f64, f64)> {
    match w.mode {
        TrapMode::Tort => Ok(find_trap_center(w)?.position()),
        TrapMode::StaticAzimuthalBias => {
            w.validate()?;
            zero_locus_at_phase(w, 0.0)
        }
    }
}

fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: &F, start: [f64; 2], scale: f64, xtol: f64, max_iter: usize) -> [f64; 2] {
    let mut simplex = [start, [start[0] + scale, start[1]], [start[0], start[1] + scale]];
    let mut values = simplex.map(f);
    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        let size = (1..3)
            .map(|i| (simplex[i][0] - simplex[0][0]).hypot(simplex[i][1] - simplex[0][1]))
            .fold(0.0, f64::max);
        if size < xtol {
            break;
        }
        let centroid = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                simplex[2] = xe;
                values[2] = fe;
            } else {
                simplex[2] = xr;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = xr;
            values[2] = fr;
        } else {
            let xc = if fr < values[2] { along(-0.5) } else { along(0.5) };
            let fc = f(xc);
            if fc < values[2].min(fr) {
                simplex[2] = xc;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        simplex[0][0] + 0.5 * (simplex[i][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[i][1] - simplex[0][1]),
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    simplex[best]
}

/// Richardson-extrapolated central-difference gradient.
fn gradient<F: Fn([f64; 2]) -> f64>(f: &F, p: [f64; 2], h: f64) -> [f64; 2] {
    let d = |i: usize, h: f64| {
        let mut a = p;
        let mut b = p;
        a[i] += h;
        b[i] -= h;
        (f(a) - f(b)) / (2.0 * h)
    };
    let r = |i: usize| (4.0 * d(i, 0.5 * h) - d(i, h)) / 3.0;
    [r(0), r(1)]
}

/// Hessian of `f` at `p` by Richardson-extrapolated central differences.
///
/// The mixed derivative is formed twice, differencing in rho first and in z
/// first; the two agree up to roundoff.
pub fn hessian<F: Fn([f64; 2]) -> f64>(f: &F, p: [f64; 2], h: f64) -> Hessian {
    let at = |dx: f64, dy: f64| f([p[0] + dx, p[1] + dy]);
    let f0 = f(p);
    let second = |ex: f64, ey: f64, h: f64| (at(ex * h, ey * h) - 2.0 * f0 + at(-ex * h, -ey * h)) / (h * h);
    let rich = |ex: f64, ey: f64| (4.0 * second(ex, ey, 0.5 * h) - second(ex, ey, h)) / 3.0;
    let mixed = |h: f64| {
        let (pp, pm, mp, mm) = (at(h, h), at(h, -h), at(-h, h), at(-h, -h));
        let rho_first = ((pp - mp) - (pm - mm)) / (4.0 * h * h);
        let z_first = ((pp - pm) - (mp - mm)) / (4.0 * h * h);
        (rho_first, z_first)
    };
    let (a1, b1) = mixed(h);
    let (a2, b2) = mixed(0.5 * h);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Hessian {
        rr: rich(1.0, 0.0),
        zz: rich(0.0, 1.0),
        rz: (4.0 * a2 - a1) / 3.0,
        zr: (4.0 * b2 - b1) / 3.0,
        polarization: (rich(s, s) - rich(s, -s)) / 2.0,
    }
}

/// Finite-difference curvature matrix of a function of `(rho, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hessian {
    pub rr: f64,
    pub zz: f64,
    /// Mixed derivative, rho difference taken first.
    pub rz: f64,
    /// Mixed derivative, z difference taken first.
    pub zr: f64,
    /// Mixed derivative from second differences along `(1, 1)` and `(1, -1)`;
    /// an independent stencil, accurate to the truncation and roundoff level.
    pub polarization: f64,
}

impl Hessian {
    /// `|H_rz - H_zr|` relative to the largest diagonal curvature.
    pub fn asymmetry(&self) -> f64 {
        (self.rz - self.zr).abs() / self.rr.abs().max(self.zz.abs())
    }

    fn det(&self) -> f64 {
        self.rr * self.zz - self.rz * self.zr
    }
}

fn newton_polish<F: Fn([f64; 2]) -> f64>(f: &F, start: [f64; 2], h: f64) -> [f64; 2] {
    let mut p = start;
    for _ in 0..8 {
        if !f(p).is_finite() {
            break;
        }
        let g = gradient(f, p, h);
        let hm = hessian(f, p, h);
        let det = hm.det();
        if !(hm.rr > 0.0 && det > 0.0) {
            break;
        }
        let step = [(hm.zz * g[0] - hm.rz * g[1]) / det, (hm.rr * g[1] - hm.zr * g[0]) / det];
        // a genuine polish step is tiny; anything larger means the quadratic
        // model does not hold (e.g. a cusp on the zero locus)
        if step[0].hypot(step[1]) > 100.0 * h {
            break;
        }
        let next = [p[0] - step[0], p[1] - step[1]];
        if f(next) > f(p) + 1e-13 * f(p).abs() {
            break;
        }
        p = next;
        if step[0].hypot(step[1]) < 1e-13 * h.max(1e-300) / 1e-4 {
            break;
        }
    }
    p
}

/// Transverse trap frequencies and the curvature matrix behind them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapFrequencies {
    /// Radial frequency (Hz).
    pub f_rho: f64,
    /// Axial frequency (Hz).
    pub f_z: f64,
    /// Curvature of `<|B|>` (G/cm^2).
    pub hessian: Hessian,
}

fn frequencies_of<F: Fn([f64; 2]) -> f64>(avg: &F, center: (f64, f64), h: f64, atom: &Atom) -> Result<TrapFrequencies> {
    let hm = hessian(avg, [center.0, center.1], h);
    for k in [hm.rr, hm.zz] {
        if !(k > 0.0) {
            return Err(RingError::NotAMinimum(k));
        }
    }
    let slope = atom.zeeman_slope();
    if !(slope > 0.0) {
        return Err(RingError::InvalidInput("atom is not a low-field seeker".into()));
    }
    let freq = |curv: f64| (slope * curv / atom.mass).sqrt() / (2.0 * PI);
    Ok(TrapFrequencies {
        f_rho: freq(hm.rr),
        f_z: freq(hm.zz),
        hessian: hm,
    })
}

/// `f = sqrt(k/m) / 2pi` along rho and z, with `k` the curvature of
/// `U = -mu_B g_F <|B|>` at `center`.
pub fn trap_frequencies(w: &FieldWaveform, center: (f64, f64), atom: &Atom) -> Result<TrapFrequencies> {
    w.validate()?;
    let nodes = objective_nodes(w, center.0, center.1)?;
    let avg = |p: [f64; 2]| avg_fixed_wire_safe(w, p[0], p[1], nodes);
    frequencies_of(&avg, center, 1e-4 * w.length_l, atom)
}

fn avg_fixed_wire_safe(w: &FieldWaveform, rho: f64, z: f64, nodes: usize) -> f64 {
    if w.bias_wire_current.is_some() && rho <= 0.0 {
        return f64::INFINITY;
    }
    avg_fixed(w, rho, z, nodes)
}

/// Dimensionless adiabaticity ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adiabaticity {
    /// Drive frequency over the smallest Larmor frequency at the center.
    pub omega_over_larmor: f64,
    /// Largest trap frequency over the drive frequency; `None` without a drive.
    pub trap_over_omega: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapCharacterization {
    pub rho_c: f64,
    pub z_c: f64,
    pub f_rho: f64,
    pub f_z: f64,
    /// `U` at the center (erg).
    pub potential_at_center: f64,
    /// Smallest `|B|` at the center over one drive period (G).
    pub min_field: f64,
    /// Larmor frequency at `min_field` (Hz).
    pub larmor_frequency_min: f64,
    pub adiabaticity: Adiabaticity,
    pub hessian_cross: f64,
}

/// Smallest `|B|` at a point over one drive period: dense scan followed by
/// golden-section refinement of the best bracket.
pub fn min_field_over_period(w: &FieldWaveform, rho: f64, z: f64) -> Result<f64> {
    let mag = |th: f64| -> Result<f64> { Ok(w.field_at_phase(rho, z, th)?.magnitude()) };
    if !w.is_time_dependent() {
        return mag(0.0);
    }
    let n = 4096;
    let step = 2.0 * PI / n as f64;
    let mut best = (0usize, f64::INFINITY);
    for j in 0..n {
        let v = mag(j as f64 * step)?;
        if v < best.1 {
            best = (j, v);
        }
    }
    let (mut a, mut b) = ((best.0 as f64 - 1.0) * step, (best.0 as f64 + 1.0) * step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (mag(x1)?, mag(x2)?);
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = mag(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = mag(x2)?;
        }
    }
    Ok(best.1.min(f1).min(f2))
}

/// Trap frequencies, center potential, Larmor frequency and adiabaticity
/// ratios at `center`. Logs a warning when either ratio exceeds 0.1.
pub fn adiabaticity_report(w: &FieldWaveform, center: (f64, f64), atom: &Atom) -> Result<TrapCharacterization> {
    w.validate()?;
    let (rho, z) = center;
    let min_field = min_field_over_period(w, rho, z)?;
    let max_field = if w.is_time_dependent() {
        (0..64)
            .map(|j| w.field_at_phase(rho, z, 2.0 * PI * j as f64 / 64.0).map(|b| b.magnitude()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max)
    } else {
        min_field
    };
    if !(min_field > 1e-9 * max_field) {
        return Err(RingError::MajoranaRisk(min_field));
    }
    let freqs = trap_frequencies(w, center, atom)?;
    let avg = time_avg_field_magnitude(w, rho, z)?;
    let larmor = atom.larmor_frequency(min_field);
    let drive = if w.mode == TrapMode::Tort { w.omega / (2.0 * PI) } else { 0.0 };
    let omega_over_larmor = drive / larmor;
    let trap_over_omega = (drive > 0.0).then(|| freqs.f_rho.max(freqs.f_z) / drive);
    if omega_over_larmor > 0.1 {
        warn!("drive frequency is {omega_over_larmor:.3} of the minimum Larmor frequency");
    }
    if let Some(r) = trap_over_omega {
        if r > 0.1 {
            warn!("trap frequency is {r:.3} of the drive frequency");
        }
    }
    Ok(TrapCharacterization {
        rho_c: rho,
        z_c: z,
        f_rho: freqs.f_rho,
        f_z: freqs.f_z,
        potential_at_center: atom.zeeman_slope() * avg,
        min_field,
        larmor_frequency_min: larmor,
        adiabaticity: Adiabaticity {
            omega_over_larmor,
            trap_over_omega,
        },
        hessian_cross: freqs.hessian.rz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    fn worked(b1_phase: f64) -> FieldWaveform {
        FieldWaveform::tort(7800.0, 0.1, 0.1, 0.1, 2.0 * PI * 5000.0).with_b1_phase(b1_phase)
    }

    fn gl_average(w: &FieldWaveform, rho: f64, z: f64, panels: usize) -> f64 {
        gauss_legendre(|th| w.field_at_phase(rho, z, th).unwrap().magnitude(), 0.0, 2.0 * PI, panels) / (2.0 * PI)
    }

    #[test]
    fn static_field_average_is_the_magnitude() {
        let w = FieldWaveform::tort(7800.0, 0.1, 0.0, 0.0, 1.0);
        let b = w.field_at_phase(0.15, 0.02, 0.0).unwrap().magnitude();
        assert_eq!(time_avg_field_magnitude(&w, 0.15, 0.02).unwrap(), b);
    }

    #[test]
    fn mean_of_rectified_sine() {
        let b0 = 3.0;
        let m = mean_magnitude(|th| FieldVector::new(0.0, 0.0, b0 * th.sin()), 1e-10).unwrap();
        assert!((m - 2.0 * b0 / PI).abs() < 1e-9);
    }

    #[test]
    fn worked_example_average_matches_gauss_legendre() {
        let w = worked(0.0);
        let (rho, z) = (0.13383, 0.0);
        let v = time_avg_field_magnitude(&w, rho, z).unwrap();
        let oracle = gl_average(&w, rho, z, 400);
        assert!((v - oracle).abs() < 1e-10 * oracle, "{v} {oracle}");
        assert!((v - 72.37).abs() < 0.05, "{v}");
    }

    #[test]
    fn on_locus_average_needs_many_nodes_but_converges() {
        let w = FieldWaveform::tort(7800.0, 0.1, 0.0, 0.05, 1.0);
        let (rho, z) = zero_locus_at_phase(&w, 0.0).unwrap();
        let v = time_avg_field_magnitude(&w, rho, z).unwrap();
        let oracle = gl_average(&w, rho, z, 20000);
        assert!((v - oracle).abs() < 1e-8 * oracle, "{v} {oracle}");
    }

    #[test]
    fn worked_example_center_matches_dense_grid() {
        let w = worked(0.0);
        let c = find_trap_center(&w).unwrap();
        assert!(c.gradient_rel < 1e-9, "{c:?}");
        assert!(c.agreeing_starts >= 3);
        // oracle: brute-force grid, then a parabola through the best row/column
        let (n, span) = (81usize, 0.004);
        let mut best = (0.0, 0.0, f64::INFINITY);
        for i in 0..n {
            for j in 0..n {
                let r = 0.1338 - span / 2.0 + span * i as f64 / (n - 1) as f64;
                let z = -span / 2.0 + span * j as f64 / (n - 1) as f64;
                let v = gl_average(&w, r, z, 64);
                if v < best.2 {
                    best = (r, z, v);
                }
            }
        }
        let cell = span / (n - 1) as f64;
        assert!((c.rho - best.0).abs() <= cell && (c.z - best.1).abs() <= cell, "{c:?} {best:?}");
        assert!((c.rho - 0.13383).abs() < 2e-5 && c.z.abs() < 1e-7, "{c:?}");
    }

    #[test]
    fn small_drive_recovers_zero_circle() {
        let w = FieldWaveform::tort(7800.0, 0.1, 0.0, 0.001, 1.0);
        let c = find_trap_center(&w).unwrap();
        assert!((c.rho - 0.2).abs() < 1e-5 && c.z.abs() < 1e-5, "{c:?}");
    }

    #[test]
    fn static_ring_center_is_the_poloidal_zero() {
        let w = FieldWaveform::static_bias(7800.0, 0.1, 0.05, 10.0);
        let (r, z) = ring_center(&w).unwrap();
        let b = w.field_at_phase(r, z, 0.0).unwrap();
        assert!(b.b_rho.abs() < 1e-9 && b.b_z.abs() < 1e-9);
        assert!(find_trap_center(&w).is_err());
    }

    #[test]
    fn synthetic_quadratic_gives_closed_form_frequency() {
        let atom = Atom::rb87();
        let (c0, c1, c2) = (400.0, 900.0, 150.0);
        let f = |p: [f64; 2]| {
            let (x, y) = (p[0] - 0.12, p[1] + 0.01);
            50.0 + c0 * x * x + c1 * y * y + c2 * x * y
        };
        let fr = frequencies_of(&f, (0.12, -0.01), 1e-5, &atom).unwrap();
        let expect = |c: f64| (atom.zeeman_slope() * 2.0 * c / atom.mass).sqrt() / (2.0 * PI);
        assert!((fr.f_rho - expect(c0)).abs() < 1e-6 * expect(c0));
        assert!((fr.f_z - expect(c1)).abs() < 1e-6 * expect(c1));
        assert!((fr.hessian.rz - c2).abs() < 1e-3 * c2);
        assert!((fr.hessian.polarization - c2).abs() < 1e-3 * c2);
    }

    #[test]
    fn concave_curvature_is_rejected() {
        let f = |p: [f64; 2]| 1.0 - p[0] * p[0] + p[1] * p[1];
        let r = frequencies_of(&f, (0.0, 0.0), 1e-4, &Atom::rb87());
        assert!(matches!(r, Err(RingError::NotAMinimum(_))));
    }

    #[test]
    fn frequencies_halve_for_four_times_the_mass() {
        let w = worked(0.0);
        let c = find_trap_center(&w).unwrap().position();
        let atom = Atom::rb87();
        let heavy = Atom { mass: 4.0 * atom.mass, ..atom };
        let a = trap_frequencies(&w, c, &atom).unwrap();
        let b = trap_frequencies(&w, c, &heavy).unwrap();
        assert!((a.f_rho / b.f_rho - 2.0).abs() < 1e-12);
        assert!((a.f_z / b.f_z - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hessian_is_symmetric_at_worked_example() {
        let w = worked(0.0);
        let c = find_trap_center(&w).unwrap().position();
        let f = trap_frequencies(&w, c, &Atom::rb87()).unwrap();
        assert!(f.hessian.asymmetry() < 1e-8, "{f:?}");
        let scale = f.hessian.zz;
        assert!((f.hessian.rz - f.hessian.polarization).abs() < 1e-6 * scale, "{f:?}");
        assert!((f.f_rho - 39.16).abs() < 0.1 && (f.f_z - 76.14).abs() < 0.1, "{f:?}");
    }

    #[test]
    fn worked_example_report() {
        let w = worked(0.0);
        let atom = Atom::rb87();
        let c = find_trap_center(&w).unwrap().position();
        let rep = adiabaticity_report(&w, c, &atom).unwrap();
        // oracle: minimum over a fine uniform scan
        let scan = (0..200_000)
            .map(|j| w.field_at_phase(c.0, c.1, 2.0 * PI * j as f64 / 200_000.0).unwrap().magnitude())
            .fold(f64::INFINITY, f64::min);
        assert!((rep.min_field - scan).abs() < 1e-8 * scan && rep.min_field <= scan * (1.0 + 1e-14), "{} {scan}", rep.min_field);
        let larmor = atom.larmor_frequency(scan);
        assert!((rep.larmor_frequency_min - larmor).abs() < 1e-6 * larmor);
        assert!((rep.adiabaticity.omega_over_larmor - 5000.0 / larmor).abs() < 1e-9);
        let ratio = rep.adiabaticity.trap_over_omega.unwrap();
        assert!((ratio - rep.f_z / 5000.0).abs() < 1e-15);
        assert!(rep.adiabaticity.omega_over_larmor < 1e-3);
        assert!(rep.potential_at_center > 0.0);
    }

    #[test]
    fn static_ring_has_no_drive_ratio() {
        let w = FieldWaveform::static_bias(7800.0, 0.1, 0.05, 10.0);
        let c = ring_center(&w).unwrap();
        let rep = adiabaticity_report(&w, c, &Atom::rb87()).unwrap();
        assert_eq!(rep.adiabaticity.trap_over_omega, None);
        assert_eq!(rep.adiabaticity.omega_over_larmor, 0.0);
        assert!((rep.min_field - 0.2 * 10.0 / c.0).abs() < 1e-9);
    }

    #[test]
    fn center_on_zero_locus_is_a_majorana_risk() {
        let w = FieldWaveform::tort(7800.0, 0.1, 0.0, 0.05, 1.0);
        let p = zero_locus_at_phase(&w, 0.0).unwrap();
        let r = adiabaticity_report(&w, p, &Atom::rb87());
        assert!(matches!(r, Err(RingError::MajoranaRisk(_))), "{r:?}");
    }
}
