//! Physical constants and atom presets, Gaussian-CGS (G, cm, g, s, erg).

/// Reduced Planck constant (erg s).
pub const HBAR: f64 = 1.054_571_817e-27;

/// Bohr magneton (erg/G).
pub const MU_B: f64 = 9.274_010_078_3e-21;

/// Atomic mass unit (g).
pub const AMU: f64 = 1.660_539_066_60e-24;

/// Field of a straight wire: B[G] = WIRE_FIELD_PER_AMP * I[A] / rho[cm].
pub const WIRE_FIELD_PER_AMP: f64 = 0.2;

/// Coil field prefactor mu0/(2 pi) expressed in G cm / A.
pub const LOOP_FIELD_PER_AMP: f64 = 0.2;

/// Trapped atomic species. The internal state is always the m_F = -1
/// member of the F = 1 manifold, so the Zeeman energy is -mu_B g_F |B|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    /// Mass (g).
    pub mass: f64,
    /// Lande factor of the hyperfine manifold.
    pub g_f: f64,
}

impl Atom {
    /// 87Rb, F = 1, g_F = -1/2.
    pub fn rb87() -> Self {
        Atom {
            mass: 86.909_180_527 * AMU,
            g_f: -0.5,
        }
    }

    /// Energy per unit field of the m_F = -1 state (erg/G). Positive for a
    /// low-field seeker.
    pub fn zeeman_slope(&self) -> f64 {
        -MU_B * self.g_f
    }

    /// Larmor frequency (Hz) at field magnitude `b` (G).
    pub fn larmor_frequency(&self, b: f64) -> f64 {
        MU_B * self.g_f.abs() * b / (2.0 * std::f64::consts::PI * HBAR)
    }
}
