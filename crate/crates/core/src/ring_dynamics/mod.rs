//! One-dimensional motion on the ring with an induced gauge potential.
//!
//! Everything here works in natural ring units: angle in rad, time
//! `tau = hbar t / (m rho_c^2)`, energy `hbar^2 / (m rho_c^2)` and angular
//! momentum in units of `hbar`. The effective Hamiltonian is then
//!
//! ```text
//! H = (p - A(phi))^2 / 2 + V(phi, tau),   p = -i d/dphi
//! ```
//!
//! with integer eigenvalues of `p` on the periodic grid. [`RingUnits`]
//! converts to and from CGS.

mod classical;
mod gauge;
mod interference;
mod packet;
mod potential;
mod propagate;
mod semiclassical;
mod wei_norman;

pub use classical::{classical_trajectory, ClassicalTrajectory};
pub use gauge::{GaugeProfile, GaugeProvenance};
pub use interference::{
    convergence_check, extract_fringe_shift, run_interference, ConvergenceReport, InterferenceConfig,
    InterferenceResult,
};
pub use packet::{fidelity, init_packet, wrap_angle, WavePacket};
pub use potential::{FreePotential, HarmonicPotential, LinearPotential, RingPotential};
pub use propagate::{max_step, split_step_evolve, SplitStepper};
pub use semiclassical::{semiclassical_propagate, width_growth};
pub use wei_norman::{wei_norman_params, wei_norman_propagate, WeiNormanParams};

use crate::units::HBAR;

/// Mass and ring radius that fix the natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingUnits {
    /// Atomic mass (g).
    pub mass: f64,
    /// Ring radius `rho_c` (cm).
    pub radius: f64,
}

impl RingUnits {
    pub fn new(mass: f64, radius: f64) -> Self {
        RingUnits { mass, radius }
    }

    /// Seconds per natural time unit, `m rho_c^2 / hbar`.
    pub fn time_scale(&self) -> f64 {
        self.mass * self.radius * self.radius / HBAR
    }

    /// Energy unit `hbar^2 / (m rho_c^2)` (erg).
    pub fn energy_scale(&self) -> f64 {
        HBAR / self.time_scale()
    }

    pub fn to_natural_time(&self, seconds: f64) -> f64 {
        seconds / self.time_scale()
    }

    pub fn to_seconds(&self, tau: f64) -> f64 {
        tau * self.time_scale()
    }

    /// Angular velocity in rad/s to natural units (equal to the carrier
    /// angular-momentum quantum number of a packet with that velocity).
    pub fn to_natural_velocity(&self, rad_per_s: f64) -> f64 {
        rad_per_s * self.time_scale()
    }

    pub fn to_rad_per_second(&self, natural: f64) -> f64 {
        natural / self.time_scale()
    }
}
