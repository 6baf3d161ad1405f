use super::packet::wrap_angle;

/// Potential along the ring in natural energy units.
pub trait RingPotential: Sync {
    fn value(&self, phi: f64, tau: f64) -> f64;
    fn derivative(&self, phi: f64, tau: f64) -> f64;
    /// No explicit time dependence.
    fn is_static(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FreePotential;

impl RingPotential for FreePotential {
    fn value(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn derivative(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn is_static(&self) -> bool {
        true
    }
}

/// `V = omega^2 d^2 / 2` with `d` the wrapped distance from `center`.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicPotential {
    pub center: f64,
    pub omega: f64,
}

impl RingPotential for HarmonicPotential {
    fn value(&self, phi: f64, _: f64) -> f64 {
        let d = wrap_angle(phi - self.center);
        0.5 * self.omega * self.omega * d * d
    }
    fn derivative(&self, phi: f64, _: f64) -> f64 {
        self.omega * self.omega * wrap_angle(phi - self.center)
    }
    fn is_static(&self) -> bool {
        true
    }
}

type Coefficient = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// `V = V0(tau) + V1(tau) phi`, with `phi` taken on the branch
/// `(branch - pi, branch + pi]`; the jump sits opposite `branch`.
pub struct LinearPotential {
    pub v0: Coefficient,
    pub v1: Coefficient,
    pub branch: f64,
}

impl LinearPotential {
    pub fn new<F0, F1>(v0: F0, v1: F1, branch: f64) -> Self
    where
        F0: Fn(f64) -> f64 + Send + Sync + 'static,
        F1: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        LinearPotential {
            v0: Box::new(v0),
            v1: Box::new(v1),
            branch,
        }
    }

    /// Coordinate on the branch.
    pub fn unwrap(&self, phi: f64) -> f64 {
        self.branch + wrap_angle(phi - self.branch)
    }
}

impl RingPotential for LinearPotential {
    fn value(&self, phi: f64, tau: f64) -> f64 {
        (self.v0)(tau) + (self.v1)(tau) * self.unwrap(phi)
    }
    fn derivative(&self, _: f64, tau: f64) -> f64 {
        (self.v1)(tau)
    }
}
