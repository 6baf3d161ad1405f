//! Adiabatic geometric phase of magnetically trapped atoms in storage rings.
//!
//! The crate follows the physics pipeline bottom-up:
//!
//! * [`field_model`]: second-order trap field with a time-orbiting drive,
//!   zero locus, and a circular-coil realization.
//! * [`spin_adiabatic`]: the F = 1 low-field-seeking state and numerical
//!   checks of its Berry connection.
//! * [`trap_analysis`]: time-averaged potential, ring center, trap
//!   frequencies and adiabaticity ratios.
//! * [`geometric_phase`]: `cos beta0`, its Fourier spectrum, closed-loop phase,
//!   transverse fluctuations and parameter sweeps.
//! * [`ring_dynamics`]: 1-D quantum and semiclassical motion on the ring with
//!   an induced gauge potential and the two-packet interference experiment.
//!
//! Units are Gaussian-CGS throughout: G, cm, g, s, erg.

// `!(x > 0.0)` is used on purpose so NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops read better for the small matrix algebra
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod field_model;
pub mod geometric_phase;
pub mod quadrature;
pub mod ring_dynamics;
pub mod spin_adiabatic;
pub mod trap_analysis;
pub mod units;

pub use error::{Result, RingError};
