//! Trap magnetic field: second-order axisymmetric expansion with a
//! time-orbiting drive, and a circular-coil realization.
//!
//! Coordinates are cylindrical `(rho, phi, z)` in cm, fields in gauss.
//! The drive is described by its phase `theta = omega t`; every quantity the
//! rest of the crate averages over a period is a function of `theta` only.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, RingError};
use crate::units::{LOOP_FIELD_PER_AMP, WIRE_FIELD_PER_AMP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrapMode {
    /// Time-orbiting ring trap: coefficients oscillate at `omega`.
    Tort,
    /// Static ring with an azimuthal bias from an axial wire.
    StaticAzimuthalBias,
}

/// Expansion coefficients of the axisymmetric field about the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansion {
    /// Uniform axial field (G).
    pub b0: f64,
    /// Quadrupole gradient (G/cm).
    pub b1: f64,
    /// Curvature (G/cm^2).
    pub b2: f64,
}

/// Time-periodic trap parameterization
///
/// `B0 = B2 (L^2 + n^2 sin(wt))`, `B1 = B2 l cos(wt - b1_phase)`.
///
/// `b1_phase = 0` is the cosine drive; `b1_phase = pi/2` gives the
/// `B1 ~ sin(wt)` variant in which both coefficients share the same phase.
/// In static mode the coefficients are frozen at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldWaveform {
    pub b2: f64,
    pub length_l: f64,
    pub n: f64,
    pub l: f64,
    /// Drive angular frequency (rad/s).
    pub omega: f64,
    pub b1_phase: f64,
    /// Current in an axial wire producing `B_phi = 0.2 I / rho` (A).
    pub bias_wire_current: Option<f64>,
    pub mode: TrapMode,
}

impl FieldWaveform {
    pub fn tort(b2: f64, length_l: f64, n: f64, l: f64, omega: f64) -> Self {
        FieldWaveform {
            b2,
            length_l,
            n,
            l,
            omega,
            b1_phase: 0.0,
            bias_wire_current: None,
            mode: TrapMode::Tort,
        }
    }

    pub fn static_bias(b2: f64, length_l: f64, l: f64, wire_current: f64) -> Self {
        FieldWaveform {
            b2,
            length_l,
            n: 0.0,
            l,
            omega: 0.0,
            b1_phase: 0.0,
            bias_wire_current: Some(wire_current),
            mode: TrapMode::StaticAzimuthalBias,
        }
    }

    pub fn with_b1_phase(mut self, phase: f64) -> Self {
        self.b1_phase = phase;
        self
    }

    pub fn with_bias_wire(mut self, current: f64) -> Self {
        self.bias_wire_current = Some(current);
        self
    }

    /// Same waveform with `l` and `n` replaced by the given multiples of `L`.
    pub fn with_ratios(mut self, l_over_l: f64, n_over_l: f64) -> Self {
        self.l = l_over_l * self.length_l;
        self.n = n_over_l * self.length_l;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(RingError::InvalidInput(m.to_string()));
        if !(self.length_l > 0.0) {
            return bad("L must be > 0");
        }
        if !(self.n >= 0.0) || !(self.l >= 0.0) {
            return bad("n and l must be >= 0");
        }
        if !self.b2.is_finite() || self.b2 == 0.0 {
            return bad("B2 must be finite and non-zero");
        }
        match self.mode {
            TrapMode::Tort if !(self.omega > 0.0) => bad("omega must be > 0 in TORT mode"),
            TrapMode::StaticAzimuthalBias if self.bias_wire_current.is_none() => {
                bad("static azimuthal-bias mode needs a wire current")
            }
            _ => Ok(()),
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        self.mode == TrapMode::Tort && (self.n != 0.0 || self.l != 0.0)
    }

    /// Expansion coefficients at drive phase `theta = omega t`.
    pub fn expansion_at_phase(&self, theta: f64) -> Expansion {
        let theta = match self.mode {
            TrapMode::Tort => theta,
            TrapMode::StaticAzimuthalBias => 0.0,
        };
        Expansion {
            b0: self.b2 * (self.length_l * self.length_l + self.n * self.n * theta.sin()),
            b1: self.b2 * self.l * (theta - self.b1_phase).cos(),
            b2: self.b2,
        }
    }

    pub fn expansion_at(&self, t: f64) -> Expansion {
        self.expansion_at_phase(self.omega * t)
    }

    /// Field at drive phase `theta`.
    pub fn field_at_phase(&self, rho: f64, z: f64, theta: f64) -> Result<FieldVector> {
        eval_expansion(&self.expansion_at_phase(theta), self.bias_wire_current, rho, z)
    }
}

/// Field components in the local cylindrical basis (G).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldVector {
    pub b_rho: f64,
    pub b_phi: f64,
    pub b_z: f64,
}

impl FieldVector {
    pub fn new(b_rho: f64, b_phi: f64, b_z: f64) -> Self {
        FieldVector { b_rho, b_phi, b_z }
    }

    pub fn magnitude(&self) -> f64 {
        (self.b_rho * self.b_rho + self.b_phi * self.b_phi + self.b_z * self.b_z).sqrt()
    }

    fn add(self, o: FieldVector) -> FieldVector {
        FieldVector::new(self.b_rho + o.b_rho, self.b_phi + o.b_phi, self.b_z + o.b_z)
    }
}

/// Evaluate the second-order expansion plus an optional axial-wire bias.
pub fn eval_expansion(c: &Expansion, wire_current: Option<f64>, rho: f64, z: f64) -> Result<FieldVector> {
    let (b_rho, b_z) = if c.b2 != 0.0 {
        // vertex form about the poloidal zero, so that the field evaluated at
        // the point returned by zero_point vanishes without roundoff
        let (radicand, z0) = vertex(c);
        let u = z - z0;
        let radial = if radicand >= 0.0 {
            let r0 = radicand.sqrt();
            (rho - r0) * (rho + r0)
        } else {
            rho * rho - radicand
        };
        (-0.5 * c.b2 * rho * u, 0.5 * c.b2 * u * u - 0.25 * c.b2 * radial)
    } else {
        (-0.5 * c.b1 * rho, c.b0 + c.b1 * z)
    };
    let b_phi = match wire_current {
        Some(i) => {
            if rho == 0.0 {
                return Err(RingError::SingularPoint);
            }
            WIRE_FIELD_PER_AMP * i / rho
        }
        None => 0.0,
    };
    Ok(FieldVector { b_rho, b_phi, b_z })
}

/// Trap field at `(rho, z)` and time `t` (s).
pub fn eval_analytic_field(w: &FieldWaveform, rho: f64, z: f64, t: f64) -> Result<FieldVector> {
    if rho < 0.0 {
        return Err(RingError::InvalidInput(format!("rho = {rho} < 0")));
    }
    eval_expansion(&w.expansion_at(t), w.bias_wire_current, rho, z)
}

/// Point where the poloidal (rho, z) field of the expansion vanishes.
pub fn zero_point(c: &Expansion) -> Result<(f64, f64)> {
    let prod = c.b0 * c.b2;
    if !(prod > 0.0) {
        return Err(RingError::NoZeroExists(prod));
    }
    let (radicand, z0) = vertex(c);
    if radicand < 0.0 {
        return Err(RingError::LocusVanished(radicand));
    }
    Ok((radicand.sqrt(), z0))
}

// rho0^2 and z0 of the poloidal zero; requires b2 != 0
fn vertex(c: &Expansion) -> (f64, f64) {
    let radicand = 4.0 * c.b0 / c.b2 - 2.0 * c.b1 * c.b1 / (c.b2 * c.b2);
    (radicand, -c.b1 / c.b2)
}

/// Zero of the poloidal field at time `t`.
pub fn zero_locus(w: &FieldWaveform, t: f64) -> Result<(f64, f64)> {
    zero_point(&w.expansion_at(t))
}

pub fn zero_locus_at_phase(w: &FieldWaveform, theta: f64) -> Result<(f64, f64)> {
    zero_point(&w.expansion_at_phase(theta))
}

/// Zero-locus curve sampled over one drive period.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroLocusTrace {
    /// Drive phase of each sample.
    pub phases: Vec<f64>,
    /// `None` where the locus does not exist at that phase.
    pub points: Vec<Option<(f64, f64)>>,
    /// Winding number of the curve around the reference point.
    pub winding: i32,
    /// Curve is complete and encircles the reference point.
    pub closed: bool,
    /// Every sample coincides (no drive).
    pub stationary: bool,
    pub reference: (f64, f64),
}

impl ZeroLocusTrace {
    pub fn present(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().flatten().copied()
    }

    /// Mean of the present samples.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        centroid(&self.points)
    }
}

fn centroid(points: &[Option<(f64, f64)>]) -> Option<(f64, f64)> {
    let (mut sr, mut sz, mut k) = (0.0, 0.0, 0usize);
    for (r, z) in points.iter().flatten() {
        sr += r;
        sz += z;
        k += 1;
    }
    (k > 0).then(|| (sr / k as f64, sz / k as f64))
}

/// Sample the zero locus over one period and test whether it encircles
/// `reference` (the trap center); the centroid of the curve is used when
/// no reference is given.
pub fn trace_zero_locus(
    w: &FieldWaveform,
    samples: usize,
    reference: Option<(f64, f64)>,
) -> Result<ZeroLocusTrace> {
    if w.mode != TrapMode::Tort {
        return Err(RingError::InvalidInput("zero-locus trace needs TORT mode".into()));
    }
    if samples < 3 {
        return Err(RingError::InvalidInput("need at least 3 samples".into()));
    }
    let mut phases = Vec::with_capacity(samples);
    let mut points = Vec::with_capacity(samples);
    for j in 0..samples {
        // half-step offset keeps samples off the special phases where B0 or B1 vanish
        let theta = 2.0 * PI * (j as f64 + 0.5) / samples as f64;
        phases.push(theta);
        match zero_locus_at_phase(w, theta) {
            Ok(p) => points.push(Some(p)),
            Err(RingError::NoZeroExists(_)) | Err(RingError::LocusVanished(_)) => points.push(None),
            Err(e) => return Err(e),
        }
    }
    let reference = reference
        .or_else(|| centroid(&points))
        .unwrap_or((0.0, 0.0));
    let complete = points.iter().all(Option::is_some);
    let stationary = complete && {
        let p0 = points[0].unwrap();
        points.iter().flatten().all(|p| (p.0 - p0.0).abs() < 1e-14 * (1.0 + p0.0.abs()) && (p.1 - p0.1).abs() < 1e-14 * (1.0 + p0.1.abs()))
    };
    let winding = if complete && !stationary {
        winding_number(points.iter().flatten().copied(), reference)
    } else {
        0
    };
    Ok(ZeroLocusTrace {
        phases,
        points,
        winding,
        closed: complete && winding != 0,
        stationary,
        reference,
    })
}

fn winding_number(curve: impl Iterator<Item = (f64, f64)>, center: (f64, f64)) -> i32 {
    let angles: Vec<f64> = curve.map(|(r, z)| (z - center.1).atan2(r - center.0)).collect();
    let mut total = 0.0;
    for k in 0..angles.len() {
        let next = angles[(k + 1) % angles.len()];
        let mut d = next - angles[k];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        total += d;
    }
    (total / (2.0 * PI)).round() as i32
}

/// Central-difference divergence of an axisymmetric field,
/// `(1/rho) d(rho B_rho)/drho + dB_z/dz`, with step `h` (Richardson-extrapolated).
pub fn divergence<F>(field: F, rho: f64, z: f64, h: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<FieldVector>,
{
    let d = |h: f64| -> Result<f64> {
        let rp = field(rho + h, z)?;
        let rm = field(rho - h, z)?;
        let zp = field(rho, z + h)?;
        let zm = field(rho, z - h)?;
        let drho = ((rho + h) * rp.b_rho - (rho - h) * rm.b_rho) / (2.0 * h * rho);
        let dz = (zp.b_z - zm.b_z) / (2.0 * h);
        Ok(drho + dz)
    };
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

// ---------------------------------------------------------------------------
// Circular coils

/// A single circular current loop coaxial with z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coil {
    /// Loop radius (cm).
    pub radius: f64,
    /// Axial position of the loop plane (cm).
    pub axial_position: f64,
    /// Current (A), positive counter-clockwise seen from +z.
    pub current: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoilSet {
    pub coils: Vec<Coil>,
}

impl CoilSet {
    pub fn new() -> Self {
        CoilSet::default()
    }

    pub fn push(&mut self, coil: Coil) -> &mut Self {
        self.coils.push(coil);
        self
    }

    /// Two loops at `+-separation_half` carrying `current` in the same sense
    /// (`anti = false`) or opposite senses (`anti = true`, the loop at
    /// negative z carries `-current`).
    pub fn push_pair(&mut self, radius: f64, half_separation: f64, current: f64, anti: bool) -> &mut Self {
        self.push(Coil { radius, axial_position: half_separation, current });
        self.push(Coil {
            radius,
            axial_position: -half_separation,
            current: if anti { -current } else { current },
        })
    }

    /// The three-pair realization of the worked 7800 G/cm^2 example.
    pub fn worked_example() -> Self {
        let mut set = CoilSet::new();
        set.push_pair(0.3, 0.1, 289.0, false)
            .push_pair(0.5, 0.25, -550.0, false)
            .push_pair(0.6, 0.5, 335.0, true);
        set
    }

    pub fn validate(&self) -> Result<()> {
        for (k, c) in self.coils.iter().enumerate() {
            if !(c.radius > 0.0) {
                return Err(RingError::InvalidInput(format!("coil {k}: radius must be > 0")));
            }
        }
        Ok(())
    }
}

/// Complete elliptic integrals `(K(m), E(m))` with parameter `m = k^2`,
/// by the arithmetic-geometric mean.
pub fn elliptic_ke(m: f64) -> (f64, f64) {
    assert!((0.0..1.0).contains(&m), "elliptic parameter {m} outside [0, 1)");
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    for _ in 0..64 {
        if c.abs() <= 1e-15 * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        pow *= 2.0;
        sum += pow * c * c;
        a = an;
        b = bn;
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

fn loop_field(coil: &Coil, rho: f64, z: f64, index: usize) -> Result<FieldVector> {
    let r = coil.radius;
    let dz = z - coil.axial_position;
    let near_sq = (r - rho) * (r - rho) + dz * dz;
    if near_sq <= (1e-12 * r) * (1e-12 * r) {
        return Err(RingError::OnWire(index));
    }
    if rho.abs() < 1e-3 * r {
        Ok(loop_field_near_axis(coil, rho, z))
    } else {
        Ok(loop_field_elliptic(coil, rho, z))
    }
}

// Paraxial expansion to third order in rho, with b(z) the on-axis field:
// B_z = b - rho^2 b''/4, B_rho = -rho b'/2 + rho^3 b'''/16.
fn loop_field_near_axis(coil: &Coil, rho: f64, z: f64) -> FieldVector {
    let r2 = coil.radius * coil.radius;
    let d = z - coil.axial_position;
    let s = r2 + d * d;
    let c = PI * LOOP_FIELD_PER_AMP * coil.current * r2;
    let b = c / s.powf(1.5);
    let b1 = -3.0 * c * d / s.powf(2.5);
    let b2 = 3.0 * c * (4.0 * d * d - r2) / s.powf(3.5);
    let b3 = 15.0 * c * d * (3.0 * r2 - 4.0 * d * d) / s.powf(4.5);
    let rho2 = rho * rho;
    FieldVector::new(-0.5 * rho * b1 + rho * rho2 * b3 / 16.0, 0.0, b - 0.25 * rho2 * b2)
}

fn loop_field_elliptic(coil: &Coil, rho: f64, z: f64) -> FieldVector {
    let r = coil.radius;
    let dz = z - coil.axial_position;
    let pref = LOOP_FIELD_PER_AMP * coil.current;
    let near_sq = (r - rho) * (r - rho) + dz * dz;
    let far_sq = (r + rho) * (r + rho) + dz * dz;
    let m = 4.0 * r * rho / far_sq;
    let (kk, ee) = elliptic_ke(m);
    let root = far_sq.sqrt();
    let bz = pref / root * (kk + (r * r - rho * rho - dz * dz) / near_sq * ee);
    let b_rho = pref * dz / (rho * root) * (-kk + (r * r + rho * rho + dz * dz) / near_sq * ee);
    FieldVector::new(b_rho, 0.0, bz)
}

/// Superposed field of the coil set at `(rho, z)`.
pub fn eval_coil_field(c: &CoilSet, rho: f64, z: f64) -> Result<FieldVector> {
    c.coils
        .iter()
        .enumerate()
        .try_fold(FieldVector::default(), |acc, (k, coil)| Ok(acc.add(loop_field(coil, rho, z, k)?)))
}

/// On-axis field of a single loop (G).
pub fn loop_on_axis(coil: &Coil, z: f64) -> f64 {
    let r = coil.radius;
    let d = z - coil.axial_position;
    PI * LOOP_FIELD_PER_AMP * coil.current * r * r / (r * r + d * d).powf(1.5)
}

// ---------------------------------------------------------------------------
// Expansion fit

/// Least-squares estimate of `(B0, B1, B2)` from sampled fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionFit {
    pub coefficients: Expansion,
    /// Euclidean norm of the component residuals (G).
    pub residual_norm: f64,
    /// Ratio of extreme singular values of the scaled design matrix.
    pub condition: f64,
}

/// Sample points on a `(rho, z)` stencil of half-width `radius` about the
/// origin: `k x k` grid with rho in `(0, radius]`, z in `[-radius, radius]`.
pub fn stencil(radius: f64, k: usize) -> Vec<(f64, f64)> {
    let k = k.max(2);
    let mut pts = Vec::with_capacity(k * k);
    for i in 0..k {
        let rho = radius * (i + 1) as f64 / k as f64;
        for j in 0..k {
            let z = -radius + 2.0 * radius * j as f64 / (k - 1) as f64;
            pts.push((rho, z));
        }
    }
    pts
}

/// Fit the second-order form to `(rho, z, field)` samples.
///
/// Uses the rows `B_rho = -B1 rho/2 - B2 rho z/2` and
/// `B_z = B0 + B1 z + B2 (z^2 - rho^2/2)/2`; columns are scaled by the
/// stencil size so the conditioning check is unit-independent.
pub fn fit_field_expansion(samples: &[(f64, f64, FieldVector)]) -> Result<ExpansionFit> {
    if samples.len() < 2 {
        return Err(RingError::FitFailed("need at least two sample points".into()));
    }
    let scale = samples
        .iter()
        .map(|(r, z, _)| r.abs().max(z.abs()))
        .fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(RingError::FitFailed("degenerate stencil".into()));
    }
    let rows = 2 * samples.len();
    let mut a = DMatrix::<f64>::zeros(rows, 3);
    let mut y = DVector::<f64>::zeros(rows);
    for (k, (rho, z, f)) in samples.iter().enumerate() {
        let (r, zz) = (rho / scale, z / scale);
        // unknowns: B0, B1*scale, B2*scale^2
        a[(2 * k, 0)] = 0.0;
        a[(2 * k, 1)] = -0.5 * r;
        a[(2 * k, 2)] = -0.5 * r * zz;
        y[2 * k] = f.b_rho;
        a[(2 * k + 1, 0)] = 1.0;
        a[(2 * k + 1, 1)] = zz;
        a[(2 * k + 1, 2)] = 0.5 * (zz * zz - 0.5 * r * r);
        y[2 * k + 1] = f.b_z;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < 1e10) {
        return Err(RingError::FitFailed(format!("ill-conditioned stencil (condition {condition:e})")));
    }
    let x = svd
        .solve(&y, 1e-14 * smax)
        .map_err(|e| RingError::FitFailed(e.to_string()))?;
    let residual_norm = (&a * &x - &y).norm();
    Ok(ExpansionFit {
        coefficients: Expansion {
            b0: x[0],
            b1: x[1] / scale,
            b2: x[2] / (scale * scale),
        },
        residual_norm,
        condition,
    })
}

/// Fit the expansion of a coil set on a stencil of half-width `radius`.
pub fn fit_coil_expansion(coils: &CoilSet, radius: f64, k: usize) -> Result<ExpansionFit> {
    let samples = stencil(radius, k)
        .into_iter()
        .map(|(r, z)| Ok((r, z, eval_coil_field(coils, r, z)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_field_expansion(&samples)
}
