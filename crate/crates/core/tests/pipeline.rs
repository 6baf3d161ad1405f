//! End-to-end runs across modules.

use std::f64::consts::PI;

use ringberry::field_model::{trace_zero_locus, FieldWaveform};
use ringberry::geometric_phase::{
    cos_beta0, fluctuation, ground_state_widths, sweep, Sampler, SamplerKind, SweepOptions,
};
use ringberry::ring_dynamics::{run_interference, FreePotential, GaugeProfile, GaugeProvenance, InterferenceConfig, RingUnits};
use ringberry::trap_analysis::{adiabaticity_report, find_trap_center};
use ringberry::units::Atom;
use ringberry::RingError;

fn worked() -> FieldWaveform {
    FieldWaveform::tort(7800.0, 0.1, 0.1, 0.1, 2.0 * PI * 5000.0)
}

#[test]
fn trap_connection_and_interference_chain() {
    let w = worked();
    let atom = Atom::rb87();
    let center = find_trap_center(&w).unwrap();
    let (rho, z) = center.position();
    let report = adiabaticity_report(&w, (rho, z), &atom).unwrap();
    assert!(report.min_field > 0.0 && report.f_rho > 0.0 && report.f_z > report.f_rho);
    let cb = cos_beta0(&w, rho, z).unwrap();
    let gauge = GaugeProfile::from_cos_beta0(cb);
    assert_eq!(gauge.provenance, GaugeProvenance::FromCosBeta0);
    assert_eq!(gauge.mean, cb);

    let cfg = InterferenceConfig { n: 1024, ..InterferenceConfig::new(RingUnits::new(atom.mass, rho)) };
    let r = run_interference(&gauge, &FreePotential, &cfg).unwrap();
    // the extracted phase is the loop integral, not its reduction mod 2 pi
    assert!((r.extracted_gamma - 2.0 * PI * cb).abs() < 1e-2, "{} vs {}", r.extracted_gamma, 2.0 * PI * cb);
    assert!((r.gamma_mod_2pi - (2.0 * PI * cb - 2.0 * PI * r.winding as f64)).abs() < 1e-2);
    assert!(r.overlap_time_seconds > 0.0);
}

#[test]
fn zero_locus_is_an_open_curve_beside_the_center() {
    let w = FieldWaveform::tort(7800.0, 0.1, 0.0, 0.1, 2.0 * PI * 5000.0);
    let c = find_trap_center(&w).unwrap().position();
    let trace = trace_zero_locus(&w, 512, Some(c)).unwrap();
    let present: Vec<_> = trace.present().collect();
    assert!(!present.is_empty());
    assert!(!trace.closed && trace.winding == 0);
    assert!(present.iter().all(|p| (p.0 - c.0).hypot(p.1 - c.1) > 1e-4));
}

#[test]
fn grid_and_random_sampling_agree() {
    let w = FieldWaveform::tort(7800.0, 0.1, 0.0, 0.05, 2.0 * PI * 5000.0);
    let c = find_trap_center(&w).unwrap().position();
    let delta = 0.005 * 0.1;
    let grid = fluctuation(&w, c, delta, Sampler::FlatGrid, 10_000, 0).unwrap();
    let random = fluctuation(&w, c, delta, Sampler::FlatRandom, 10_000, 7).unwrap();
    assert!(
        (grid.f - random.f).abs() < 3.0 * random.stderr,
        "grid {} random {} +- {}",
        grid.f,
        random.f,
        random.stderr
    );
}

#[test]
fn ground_state_sampling_is_narrower_than_the_widest_region() {
    let w = worked();
    let atom = Atom::rb87();
    let c = find_trap_center(&w).unwrap().position();
    let rep = adiabaticity_report(&w, c, &atom).unwrap();
    let (sr, sz) = ground_state_widths(rep.f_rho, rep.f_z, &atom);
    // about a micron: a few percent of the flat regions
    assert!(sr < 0.01 * 0.1 && sz < sr);
    let g = fluctuation(&w, c, 1.0, Sampler::Gaussian { sigma_rho: sr, sigma_z: sz }, 2000, 3).unwrap();
    let flat = fluctuation(&w, c, 0.015 * 0.1, Sampler::FlatRandom, 2000, 3).unwrap();
    assert!(g.f < flat.f);
    assert!(g.contrast > 0.99);
}

#[test]
fn sweep_keeps_invalid_points_as_errors() {
    let opts = SweepOptions {
        deltas: vec![0.001],
        sampler: SamplerKind::FlatGrid,
        samples: 100,
        ..SweepOptions::default()
    };
    let rows = sweep(&worked(), &[(0.5, 0.0), (0.5, 0.5)], &opts);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.outcome.is_ok()));
    let rows = sweep(&worked(), &[(0.5, 0.0), (-0.5, 0.0)], &opts);
    assert!(rows[0].outcome.is_ok());
    assert!(matches!(rows[1].outcome, Err(RingError::InvalidInput(_))));
}
