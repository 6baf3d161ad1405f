use super::gauge::GaugeProfile;
use super::potential::RingPotential;
use crate::error::{Result, RingError};

/// Center-of-mass path sampled at uniform times (natural units). `phi` is
/// unwrapped, `p` is the canonical and `v` the kinetic angular momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub phi: Vec<f64>,
    pub p: Vec<f64>,
    pub v: Vec<f64>,
}

impl ClassicalTrajectory {
    pub fn last(&self) -> (f64, f64, f64, f64) {
        let k = self.times.len() - 1;
        (self.times[k], self.phi[k], self.p[k], self.v[k])
    }
}

/// Fourth-order symplectic (Yoshida) integration of
/// `dphi/dt = v`, `dv/dt = -dV/dphi`, with `p = v + A(phi)`.
///
/// The motion does not depend on `A`; it only enters the reported `p`.
pub fn classical_trajectory(
    phi0: f64,
    v0: f64,
    v: &dyn RingPotential,
    a: &GaugeProfile,
    t_final: f64,
    dt: f64,
) -> Result<ClassicalTrajectory> {
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(RingError::InvalidInput("need dt > 0 and t_final >= 0".into()));
    }
    let steps = (t_final / dt).ceil().max(0.0) as usize;
    let h = if steps > 0 { t_final / steps as f64 } else { 0.0 };
    let cbrt2 = 2f64.cbrt();
    let w1 = 1.0 / (2.0 - cbrt2);
    let w0 = -cbrt2 * w1;
    let drifts = [w1 / 2.0, (w0 + w1) / 2.0, (w0 + w1) / 2.0, w1 / 2.0];
    let kicks = [w1, w0, w1];

    let mut out = ClassicalTrajectory {
        times: Vec::with_capacity(steps + 1),
        phi: Vec::with_capacity(steps + 1),
        p: Vec::with_capacity(steps + 1),
        v: Vec::with_capacity(steps + 1),
    };
    let (mut x, mut u, mut t) = (phi0, v0, 0.0);
    let record = |t: f64, x: f64, u: f64, out: &mut ClassicalTrajectory| {
        out.times.push(t);
        out.phi.push(x);
        out.v.push(u);
        out.p.push(u + a.value(x));
    };
    record(0.0, x, u, &mut out);
    for s in 0..steps {
        for k in 0..4 {
            x += drifts[k] * h * u;
            t += drifts[k] * h;
            if k < 3 {
                u -= kicks[k] * h * v.derivative(x, t);
            }
        }
        // pin the clock to the grid to avoid drift in long runs
        t = (s + 1) as f64 * h;
        record(t, x, u, &mut out);
    }
    Ok(out)
}
