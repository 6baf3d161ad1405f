use std::f64::consts::PI;

/// Where a gauge profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeProvenance {
    /// Constant equal to `cos beta0` at the ring center.
    FromCosBeta0,
    Constant,
    Custom,
}

/// Periodic gauge potential `A(phi) = mean + sum_k (a_k cos k phi + b_k sin k phi)`
/// in units of `hbar` per radian.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeProfile {
    pub mean: f64,
    /// `(k, a_k, b_k)` with `k >= 1`.
    pub harmonics: Vec<(u32, f64, f64)>,
    pub provenance: GaugeProvenance,
}

impl GaugeProfile {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(a: f64) -> Self {
        GaugeProfile {
            mean: a,
            harmonics: Vec::new(),
            provenance: GaugeProvenance::Constant,
        }
    }

    pub fn from_cos_beta0(cos_beta0: f64) -> Self {
        GaugeProfile {
            provenance: GaugeProvenance::FromCosBeta0,
            ..Self::constant(cos_beta0)
        }
    }

    pub fn custom(mean: f64, harmonics: Vec<(u32, f64, f64)>) -> Self {
        GaugeProfile {
            mean,
            harmonics: harmonics.into_iter().filter(|h| h.0 >= 1).collect(),
            provenance: GaugeProvenance::Custom,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.harmonics.iter().all(|&(_, a, b)| a == 0.0 && b == 0.0)
    }

    pub fn value(&self, phi: f64) -> f64 {
        self.mean
            + self
                .harmonics
                .iter()
                .map(|&(k, a, b)| {
                    let x = k as f64 * phi;
                    a * x.cos() + b * x.sin()
                })
                .sum::<f64>()
    }

    /// `int_{from}^{to} A dphi` along the unwrapped path.
    pub fn integral(&self, from: f64, to: f64) -> f64 {
        self.mean * (to - from)
            + self
                .harmonics
                .iter()
                .map(|&(k, a, b)| {
                    let k = k as f64;
                    a / k * ((k * to).sin() - (k * from).sin()) - b / k * ((k * to).cos() - (k * from).cos())
                })
                .sum::<f64>()
    }

    /// Periodic part of the phase, `int_0^phi (A - mean) dphi`.
    pub fn periodic_phase(&self, phi: f64) -> f64 {
        self.integral(0.0, phi) - self.mean * phi
    }

    /// `oint A dphi = 2 pi mean`.
    pub fn loop_integral(&self) -> f64 {
        2.0 * PI * self.mean
    }

    /// Largest `|A|` bound from the coefficients.
    pub fn max_abs(&self) -> f64 {
        self.mean.abs() + self.harmonics.iter().map(|&(_, a, b)| a.hypot(b)).sum::<f64>()
    }
}
