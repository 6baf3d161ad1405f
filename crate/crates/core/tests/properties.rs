use std::f64::consts::PI;

use proptest::prelude::*;

use ringberry::field_model::{eval_expansion, fit_field_expansion, stencil, Expansion, FieldWaveform};
use ringberry::geometric_phase::{berry_phase_closed, cos_beta0, spectrum_from_samples};
use ringberry::ring_dynamics::{
    classical_trajectory, init_packet, split_step_evolve, wrap_angle, GaugeProfile, HarmonicPotential, RingUnits,
};
use ringberry::spin_adiabatic::{berry_connection_check, lfs_state};
use ringberry::units::Atom;

fn units() -> RingUnits {
    RingUnits::new(Atom::rb87().mass, 0.13)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cos_beta0_is_a_cosine(rho in 0.05f64..0.3, z in -0.1f64..0.1, l in 0.0f64..1.0, n in 0.0f64..1.0) {
        let w = FieldWaveform::tort(7800.0, 0.1, n * 0.1, l * 0.1, 2.0 * PI * 5000.0);
        // points on the zero locus are rejected, anything else is bounded
        if let Ok(c) = cos_beta0(&w, rho, z) {
            prop_assert!(c.abs() <= 1.0);
        }
    }

    #[test]
    fn berry_phase_is_additive_in_windings(c in -1.0f64..1.0, q1 in -50i64..50, q2 in -50i64..50) {
        let sum = berry_phase_closed(c, q1 + q2).unwrap();
        let parts = berry_phase_closed(c, q1).unwrap() + berry_phase_closed(c, q2).unwrap();
        prop_assert!((sum - parts).abs() <= 1e-12 * (1.0 + sum.abs()));
    }

    #[test]
    fn connection_matches_cos_beta(beta in 0.0f64..PI, phi in -PI..PI) {
        let c = berry_connection_check(beta, phi, 1e-6).unwrap();
        prop_assert!(c.re.abs() < 1e-8 && (c.im - beta.cos()).abs() < 1e-8);
        prop_assert!((lfs_state(beta, phi).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn expansion_fit_recovers_coefficients(b0 in -100.0f64..100.0, b1 in -1000.0f64..1000.0, b2 in 1000.0f64..10000.0) {
        let c = Expansion { b0, b1, b2 };
        let samples: Vec<_> = stencil(0.02, 5)
            .into_iter()
            .map(|(r, z)| (r, z, eval_expansion(&c, None, r, z).unwrap()))
            .collect();
        let e = fit_field_expansion(&samples).unwrap().coefficients;
        prop_assert!((e.b0 - b0).abs() < 1e-9 * (1.0 + b0.abs()) + 1e-9 * b2);
        prop_assert!((e.b1 - b1).abs() < 1e-7 * (b1.abs() + b2));
        prop_assert!((e.b2 - b2).abs() < 1e-7 * b2);
    }

    #[test]
    fn spectrum_recovers_trig_polynomials(a0 in -1.0f64..1.0, a2 in 0.0f64..0.5, p2 in -3.0f64..3.0, a5 in 0.0f64..0.5, p5 in -3.0f64..3.0) {
        let n = 256;
        let samples: Vec<f64> = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                a0 + a2 * (2.0 * t + p2).cos() + a5 * (5.0 * t + p5).cos()
            })
            .collect();
        let s = spectrum_from_samples(&samples, 8, 1.0).unwrap();
        prop_assert!((s.cos_beta0 - a0).abs() < 1e-13);
        prop_assert!((s.amplitude(2) - a2).abs() < 1e-12 && (s.amplitude(5) - a5).abs() < 1e-12);
        prop_assert!(s.amplitude(3) < 1e-12);
        prop_assert!(s.reconstruction_rms < 1e-12);
    }

    #[test]
    fn wrapped_angles_are_half_open(x in -100.0f64..100.0) {
        let y = wrap_angle(x);
        prop_assert!(y > -PI && y <= PI);
        prop_assert!(((x - y) / (2.0 * PI) - ((x - y) / (2.0 * PI)).round()).abs() < 1e-12);
    }

    #[test]
    fn gauge_profiles_are_periodic(mean in -1.0f64..1.0, a1 in -0.2f64..0.2, b3 in -0.2f64..0.2, x in 0.0f64..6.0, y in 0.0f64..6.0) {
        let g = GaugeProfile::custom(mean, vec![(1, a1, 0.0), (3, 0.0, b3)]);
        prop_assert!((g.value(0.0) - g.value(2.0 * PI)).abs() < 1e-14);
        prop_assert!((g.integral(x, x + 2.0 * PI) - g.loop_integral()).abs() < 1e-12);
        prop_assert!((g.integral(0.0, x) + g.integral(x, y) - g.integral(0.0, y)).abs() < 1e-12);
    }

    #[test]
    fn packets_are_normalized(phi0 in 0.0f64..(2.0 * PI), v0 in -30.0f64..30.0, width in 0.1f64..0.3, a in -0.5f64..0.5) {
        let g = GaugeProfile::constant(a);
        let p = init_packet(phi0, v0, width, &g, 512, units()).unwrap();
        prop_assert!((p.norm() - 1.0).abs() < 1e-12);
        prop_assert!((p.v_bar - v0).abs() < 1e-6);
        prop_assert!(wrap_angle(p.phi_bar - phi0).abs() < 1e-6);
    }

    #[test]
    fn evolution_preserves_the_norm(v0 in -10.0f64..10.0, omega in 0.0f64..5.0, a in -0.5f64..0.5) {
        let g = GaugeProfile::custom(a, vec![(2, 0.05, 0.0)]);
        let p = init_packet(1.0, v0, 0.2, &g, 256, units()).unwrap();
        let v = HarmonicPotential { center: 1.0, omega };
        let q = split_step_evolve(&p, &g, &v, 1e-4, 500).unwrap();
        prop_assert!((q.norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn trajectories_satisfy_the_momentum_relation(v0 in -5.0f64..5.0, a in -1.0f64..1.0) {
        let g = GaugeProfile::custom(a, vec![(1, 0.1, 0.0)]);
        let v = HarmonicPotential { center: 0.0, omega: 2.0 };
        let tr = classical_trajectory(0.3, v0, &v, &g, 0.5, 1e-3).unwrap();
        for k in 0..tr.times.len() {
            prop_assert!((tr.v[k] - (tr.p[k] - g.value(tr.phi[k]))).abs() < 1e-12);
        }
    }
}
