//! Spin-1 machinery for the field-aligned low-field-seeking state.
//!
//! Basis ordering is `(m = +1, 0, -1)` along z.

use num_complex::Complex64;

use crate::error::{Result, RingError};
use crate::field_model::{FieldVector, FieldWaveform};
use crate::units::MU_B;

pub type Mat3 = [[Complex64; 3]; 3];
pub type Vec3 = [Complex64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// F = 1 angular momentum matrices together with the Zeeman constants.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub fx: Mat3,
    pub fy: Mat3,
    pub fz: Mat3,
    pub mu_b: f64,
    pub g_f: f64,
}

impl SpinOperators {
    pub fn spin1(g_f: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = |x: f64| Complex64::new(x, 0.0);
        let i = |x: f64| Complex64::new(0.0, x);
        SpinOperators {
            fx: [[ZERO, r(s), ZERO], [r(s), ZERO, r(s)], [ZERO, r(s), ZERO]],
            fy: [[ZERO, i(-s), ZERO], [i(s), ZERO, i(-s)], [ZERO, i(s), ZERO]],
            fz: [[ONE, ZERO, ZERO], [ZERO, ZERO, ZERO], [ZERO, ZERO, -ONE]],
            mu_b: MU_B,
            g_f,
        }
    }

    /// `F . n` for a real direction `n` (Cartesian).
    pub fn along(&self, n: [f64; 3]) -> Mat3 {
        let mut m = [[ZERO; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] = self.fx[a][b] * n[0] + self.fy[a][b] * n[1] + self.fz[a][b] * n[2];
            }
        }
        m
    }

    /// Zeeman Hamiltonian `mu_B g_F F . B` for a Cartesian field (erg).
    pub fn zeeman(&self, b: [f64; 3]) -> Mat3 {
        scale(&self.along(b), Complex64::new(self.mu_b * self.g_f, 0.0))
    }

    /// `exp(-i angle F.n)` for unit `n`, exact for spin 1:
    /// `1 - i sin(a) (F.n) + (cos(a) - 1) (F.n)^2`.
    pub fn rotation(&self, angle: f64, n: [f64; 3]) -> Mat3 {
        let f = self.along(n);
        let f2 = matmul(&f, &f);
        let mut out = [[ZERO; 3]; 3];
        let (s, c) = angle.sin_cos();
        for a in 0..3 {
            for b in 0..3 {
                let id = if a == b { ONE } else { ZERO };
                out[a][b] = id - Complex64::new(0.0, s) * f[a][b] + f2[a][b] * (c - 1.0);
            }
        }
        out
    }
}

pub fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn apply(a: &Mat3, v: &Vec3) -> Vec3 {
    let mut out = [ZERO; 3];
    for i in 0..3 {
        out[i] = (0..3).map(|k| a[i][k] * v[k]).sum();
    }
    out
}

fn scale(a: &Mat3, s: Complex64) -> Mat3 {
    let mut out = *a;
    for row in out.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    out
}

/// `<u|v>`.
pub fn inner(u: &Vec3, v: &Vec3) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// `|(-1)>_z`.
pub fn down_z() -> Vec3 {
    [ZERO, ZERO, ONE]
}

/// Low-field-seeking state aligned with a field tilted by `beta` from z
/// inside the meridian plane at azimuth `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticState {
    pub amplitudes: Vec3,
    pub beta: f64,
    pub phi: f64,
}

impl AdiabaticState {
    /// Cartesian unit vector of the local field direction,
    /// `cos(beta) z + sin(beta) e_rho(phi)`.
    pub fn field_direction(&self) -> [f64; 3] {
        let (sb, cb) = self.beta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [sb * cp, sb * sp, cb]
    }

    pub fn norm(&self) -> f64 {
        inner(&self.amplitudes, &self.amplitudes).re.sqrt()
    }

    /// `|| (F.B) psi + psi ||`: zero for an exact -1 eigenvector.
    pub fn eigen_residual(&self, ops: &SpinOperators) -> f64 {
        let f = ops.along(self.field_direction());
        let v = apply(&f, &self.amplitudes);
        v.iter()
            .zip(self.amplitudes.iter())
            .map(|(a, b)| (a + b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Tilt of the field from the z axis, in `[0, pi]`.
pub fn beta_angle(b: &FieldVector) -> Result<f64> {
    let m = b.magnitude();
    if !(m > 0.0) {
        return Err(RingError::UndefinedAngle);
    }
    Ok((b.b_z / m).clamp(-1.0, 1.0).acos())
}

/// Signed tilt in the meridian plane, `atan2(B_rho, B_z)`; the rotation
/// angle about `e_phi` that carries z onto a poloidal field direction.
pub fn signed_tilt(b: &FieldVector) -> Result<f64> {
    if !(b.b_rho != 0.0 || b.b_z != 0.0) {
        return Err(RingError::UndefinedAngle);
    }
    Ok(b.b_rho.atan2(b.b_z))
}

/// The m = -1 state along the tilted field: `exp(-i phi F_z) exp(-i beta F_y) |(-1)>_z`.
///
/// This equals the rotation about `e_phi = (-sin phi, cos phi, 0)` applied to
/// `|(-1)>_z`, times `exp(i phi)`. That phase makes the state single valued
/// in the frame-rotating gauge in which `<psi| d_phi |psi> = i cos(beta)`; the
/// bare rotation gives `i (cos(beta) - 1)`, which differs by a constant and
/// by exactly 2 pi per closed loop.
pub fn lfs_state(beta: f64, phi: f64) -> AdiabaticState {
    let ops = SpinOperators::spin1(-0.5);
    let tilt = ops.rotation(beta, [0.0, 1.0, 0.0]);
    let v = apply(&tilt, &down_z());
    // exp(-i phi F_z) is diagonal: exp(-i phi m)
    let amplitudes = [
        v[0] * Complex64::from_polar(1.0, -phi),
        v[1],
        v[2] * Complex64::from_polar(1.0, phi),
    ];
    AdiabaticState { amplitudes, beta, phi }
}

/// Central finite-difference estimate of `<psi| d_phi |psi>`.
pub fn berry_connection_check(beta: f64, phi: f64, dphi: f64) -> Result<Complex64> {
    if !(dphi > 0.0 && dphi <= 1e-5) {
        return Err(RingError::InvalidInput(format!("dphi = {dphi} outside (0, 1e-5]")));
    }
    let c = lfs_state(beta, phi).amplitudes;
    let p = lfs_state(beta, phi + dphi).amplitudes;
    let m = lfs_state(beta, phi - dphi).amplitudes;
    let d: Vec3 = [
        (p[0] - m[0]) / (2.0 * dphi),
        (p[1] - m[1]) / (2.0 * dphi),
        (p[2] - m[2]) / (2.0 * dphi),
    ];
    Ok(inner(&c, &d))
}

/// Central finite-difference estimate of the time connection for the state
/// following the poloidal field of `w` at `point = (rho, z, phi)`.
///
/// Reported per radian of drive phase, `<psi| d_t |psi> / omega`, so the
/// value is dimensionless (static fields: per second).
pub fn time_derivative_check(w: &FieldWaveform, point: (f64, f64, f64), t: f64, dt: f64) -> Result<Complex64> {
    if !(dt > 0.0) {
        return Err(RingError::InvalidInput("dt must be > 0".into()));
    }
    if w.omega > 0.0 && dt * w.omega > 1e-2 {
        return Err(RingError::InvalidInput("dt must be much shorter than the drive period".into()));
    }
    let (rho, z, phi) = point;
    let state = |t: f64| -> Result<Vec3> {
        let b = w.field_at_phase(rho, z, w.omega * t)?;
        Ok(lfs_state(signed_tilt(&b)?, phi).amplitudes)
    };
    let c = state(t)?;
    let p = state(t + dt)?;
    let m = state(t - dt)?;
    let step = if w.omega > 0.0 { 2.0 * dt * w.omega } else { 2.0 * dt };
    let d: Vec3 = [(p[0] - m[0]) / step, (p[1] - m[1]) / step, (p[2] - m[2]) / step];
    Ok(inner(&c, &d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn commutator(a: &Mat3, b: &Mat3) -> Mat3 {
        let ab = matmul(a, b);
        let ba = matmul(b, a);
        let mut out = ab;
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = ab[i][j] - ba[i][j];
            }
        }
        out
    }

    #[test]
    fn commutation_relations() {
        let s = SpinOperators::spin1(-0.5);
        let i = Complex64::new(0.0, 1.0);
        for (a, b, c) in [(&s.fx, &s.fy, &s.fz), (&s.fy, &s.fz, &s.fx), (&s.fz, &s.fx, &s.fy)] {
            let comm = commutator(a, b);
            for r in 0..3 {
                for k in 0..3 {
                    assert!(close(comm[r][k], i * c[r][k], 1e-14));
                }
            }
        }
        let casimir = [matmul(&s.fx, &s.fx), matmul(&s.fy, &s.fy), matmul(&s.fz, &s.fz)];
        for r in 0..3 {
            for k in 0..3 {
                let v = casimir[0][r][k] + casimir[1][r][k] + casimir[2][r][k];
                let expect = if r == k { 2.0 } else { 0.0 };
                assert!(close(v, Complex64::new(expect, 0.0), 1e-14));
            }
        }
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_angle(&FieldVector::new(0.0, 0.0, 3.0)).unwrap(), 0.0);
        assert!((beta_angle(&FieldVector::new(2.0, 0.0, 0.0)).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((beta_angle(&FieldVector::new(1.0, 0.0, 1.0)).unwrap() - PI / 4.0).abs() < 1e-15);
        assert_eq!(beta_angle(&FieldVector::default()), Err(RingError::UndefinedAngle));
    }

    #[test]
    fn lfs_limits() {
        let s = lfs_state(0.0, 0.0);
        assert_eq!(s.amplitudes, down_z());
        let flipped = lfs_state(PI, 0.3);
        assert!(flipped.amplitudes[0].norm() > 1.0 - 1e-15);
        assert!(flipped.amplitudes[1].norm() < 1e-15 && flipped.amplitudes[2].norm() < 1e-15);
    }

    /// Oracle: power iteration on (F.B + 2) isolates the -1 eigenvector of
    /// F.B, computed independently of the rotation formula.
    fn eigen_oracle(dir: [f64; 3]) -> Vec3 {
        let s = SpinOperators::spin1(-0.5);
        let f = s.along(dir);
        // (1 - F.B)/2 ... shift so -1 dominates: M = 1 - F.B has eigenvalues 2, 1, 0
        let mut m = [[ZERO; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = if i == j { ONE } else { ZERO } - f[i][j];
            }
        }
        let mut v = [Complex64::new(0.3, 0.1), Complex64::new(0.5, -0.2), Complex64::new(0.7, 0.4)];
        for _ in 0..200 {
            v = apply(&m, &v);
            let n = inner(&v, &v).re.sqrt();
            v.iter_mut().for_each(|x| *x /= n);
        }
        v
    }

    #[test]
    fn generic_beta_matches_eigen_oracle() {
        for &(beta, phi) in &[(0.7, 0.2), (2.1, -1.3), (1.0, 3.0)] {
            let s = lfs_state(beta, phi);
            let o = eigen_oracle(s.field_direction());
            let ov = inner(&o, &s.amplitudes).norm();
            assert!((ov - 1.0).abs() < 1e-12, "overlap {ov}");
            let ops = SpinOperators::spin1(-0.5);
            let fb = apply(&ops.along(s.field_direction()), &s.amplitudes);
            assert!(close(inner(&s.amplitudes, &fb), Complex64::new(-1.0, 0.0), 1e-12));
        }
    }

    #[test]
    fn zeeman_energy_of_lfs_state() {
        let ops = SpinOperators::spin1(-0.5);
        let (beta, phi, bmag) = (0.8, 0.4, 50.0);
        let s = lfs_state(beta, phi);
        let d = s.field_direction();
        let h = ops.zeeman([d[0] * bmag, d[1] * bmag, d[2] * bmag]);
        let e = inner(&s.amplitudes, &apply(&h, &s.amplitudes));
        let expect = -MU_B * -0.5 * bmag;
        assert!((e.re - expect).abs() < 1e-12 * expect.abs() && e.im.abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn connection_examples() {
        let a = berry_connection_check(PI / 2.0, 0.3, 1e-6).unwrap();
        assert!(a.norm() < 1e-8);
        let b = berry_connection_check(0.0, 0.3, 1e-6).unwrap();
        assert!(close(b, Complex64::new(0.0, 1.0), 1e-8));
        let c = berry_connection_check(1.0, -0.7, 1e-6).unwrap();
        assert!(close(c, Complex64::new(0.0, 1f64.cos()), 1e-8));
        assert!(berry_connection_check(1.0, 0.0, 1e-3).is_err());
    }

    #[test]
    fn rotation_composition() {
        let ops = SpinOperators::spin1(-0.5);
        let phi: f64 = 0.9;
        let axis = [-phi.sin(), phi.cos(), 0.0];
        let (b1, b2) = (0.4, 1.1);
        let seq = apply(&ops.rotation(b2, axis), &apply(&ops.rotation(b1, axis), &down_z()));
        let direct = apply(&ops.rotation(b1 + b2, axis), &down_z());
        for k in 0..3 {
            assert!(close(seq[k], direct[k], 1e-12));
        }
        // the state is the e_phi rotation up to exp(i phi)
        let s = lfs_state(b1 + b2, phi);
        for k in 0..3 {
            assert!(close(s.amplitudes[k], direct[k] * Complex64::from_polar(1.0, phi), 1e-12));
        }
    }

    #[test]
    fn static_field_has_no_time_connection() {
        let w = FieldWaveform::tort(7800.0, 0.1, 0.0, 0.0, 2.0 * PI * 5000.0);
        let v = time_derivative_check(&w, (0.15, 0.01, 0.2), 1e-5, 1e-11).unwrap();
        assert_eq!(v, ZERO);
    }

    #[test]
    fn driven_field_has_no_time_connection() {
        let w = FieldWaveform::tort(7800.0, 0.1, 0.1, 0.1, 2.0 * PI * 5000.0);
        let period = 2.0 * PI / w.omega;
        let v = time_derivative_check(&w, (0.1338, 0.0, 0.0), 0.37 * period, 1e-6 / w.omega).unwrap();
        assert!(v.norm() < 1e-8, "{v}");
    }
}
