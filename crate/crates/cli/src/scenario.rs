//! One function per subcommand, each turning a config into tables.

use std::f64::consts::PI;

use ringberry::error::RingError;
use ringberry::field_model::{fit_coil_expansion, trace_zero_locus, CoilSet, FieldWaveform, TrapMode};
use ringberry::geometric_phase::{
    berry_phase_closed, center_cos_beta0, fourier_spectrum, polyfit, residual_phase_bound, sagnac_phase, sweep,
    SweepOptions, SweepRow,
};
use ringberry::ring_dynamics::{
    convergence_check, run_interference, FreePotential, GaugeProfile, InterferenceConfig, RingUnits,
};
use ringberry::trap_analysis::adiabaticity_report;

use crate::config::{Convention, Duration, FieldMode, GaugeSpec, ScenarioConfig, Velocity};
use crate::table::{Cell, Table, TableError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    /// Trap center, frequencies and adiabaticity.
    Trap,
    /// cos beta0 and ring radius over the (l/L, n/L) grid.
    Sweep,
    /// Geometric phase and connection spectrum at the trap center.
    Phase,
    /// Transverse fluctuation of cos beta0 over the grid.
    Fluct,
    /// Two-packet ring interferometer.
    Interfere,
    /// Expansion coefficients of a coil set.
    Coils,
    /// Rotation phase against the geometric phase.
    Sagnac,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Trap => "trap",
            Subcommand::Sweep => "sweep",
            Subcommand::Phase => "phase",
            Subcommand::Fluct => "fluct",
            Subcommand::Interfere => "interfere",
            Subcommand::Coils => "coils",
            Subcommand::Sagnac => "sagnac",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{stage}: {source} [{}]", source.code())]
    Numerical {
        stage: &'static str,
        #[source]
        source: RingError,
    },
    #[error(transparent)]
    Table(#[from] TableError),
}

trait Stage<T> {
    fn at(self, stage: &'static str) -> Result<T, ScenarioError>;
}

impl<T> Stage<T> for Result<T, RingError> {
    fn at(self, stage: &'static str) -> Result<T, ScenarioError> {
        self.map_err(|source| ScenarioError::Numerical { stage, source })
    }
}

/// The configured waveform.
pub fn waveform(cfg: &ScenarioConfig) -> FieldWaveform {
    let f = &cfg.field;
    match f.mode {
        FieldMode::Tort => {
            let phase = match f.convention {
                Convention::Cos => 0.0,
                Convention::Sin => PI / 2.0,
            };
            let w = FieldWaveform::tort(f.b2, f.length_l, f.n, f.l, 2.0 * PI * f.drive_frequency).with_b1_phase(phase);
            match f.wire_current {
                Some(i) => w.with_bias_wire(i),
                None => w,
            }
        }
        FieldMode::Static => FieldWaveform::static_bias(f.b2, f.length_l, f.l, f.wire_current.unwrap_or(0.0)),
    }
}

pub fn run_scenario(cfg: &ScenarioConfig, cmd: Subcommand) -> Result<Vec<Table>, ScenarioError> {
    match cmd {
        Subcommand::Trap => trap(cfg),
        Subcommand::Sweep => sweep_tables(cfg),
        Subcommand::Phase => phase(cfg),
        Subcommand::Fluct => fluct(cfg),
        Subcommand::Interfere => interfere(cfg),
        Subcommand::Coils => coils(cfg),
        Subcommand::Sagnac => sagnac(cfg),
    }
}

fn trap(cfg: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let w = waveform(cfg);
    let ((rho, z), cb0) = center_cos_beta0(&w).at("trap center")?;
    let rep = adiabaticity_report(&w, (rho, z), &cfg.atom()).at("trap characterization")?;
    let locus = if w.mode == TrapMode::Tort {
        Some(trace_zero_locus(&w, 256, Some((rho, z))).at("zero locus")?)
    } else {
        None
    };
    let mut t = Table::new(
        "trap",
        &[
            "rho_c [cm]",
            "z_c [cm]",
            "f_rho [Hz]",
            "f_z [Hz]",
            "potential_at_center [erg]",
            "min_field [G]",
            "larmor_frequency_min [Hz]",
            "omega_over_larmor [1]",
            "trap_over_omega [1]",
            "hessian_cross [G/cm2]",
            "cos_beta0 [1]",
            "berry_phase [rad]",
            "locus_winding [1]",
            "locus_closed [1]",
        ],
    );
    let gamma = berry_phase_closed(cb0, cfg.analysis.windings).at("berry phase")?;
    t.push(vec![
        rep.rho_c.into(),
        rep.z_c.into(),
        rep.f_rho.into(),
        rep.f_z.into(),
        rep.potential_at_center.into(),
        rep.min_field.into(),
        rep.larmor_frequency_min.into(),
        rep.adiabaticity.omega_over_larmor.into(),
        rep.adiabaticity.trap_over_omega.into(),
        rep.hessian_cross.into(),
        cb0.into(),
        gamma.into(),
        locus.as_ref().map_or(Cell::Empty, |l| (l.winding as i64).into()),
        locus.as_ref().map_or(Cell::Empty, |l| l.closed.into()),
    ])?;
    let mut tables = vec![t];
    if let Some(locus) = locus {
        let mut lt = Table::new("trap_locus", &["theta [rad]", "rho [cm]", "z [cm]", "error"]);
        for (theta, p) in locus.phases.iter().zip(&locus.points) {
            lt.push(match p {
                Some((r, z)) => vec![(*theta).into(), (*r).into(), (*z).into(), Cell::Empty],
                None => vec![(*theta).into(), Cell::Empty, Cell::Empty, "locus-vanished".into()],
            })?;
        }
        tables.push(lt);
    }
    Ok(tables)
}

fn grid(cfg: &ScenarioConfig) -> Vec<(f64, f64)> {
    let a = &cfg.analysis;
    a.n_over_l
        .iter()
        .flat_map(|&n| a.l_over_l.iter().map(move |&l| (l, n)))
        .collect()
}

fn run_sweep(cfg: &ScenarioConfig, deltas: Vec<f64>) -> Vec<SweepRow> {
    let a = &cfg.analysis;
    let opts = SweepOptions {
        deltas,
        sampler: a.sampler,
        samples: a.samples,
        seed: a.seed,
        n_max: a.n_max,
        atom: cfg.atom(),
    };
    sweep(&waveform(cfg), &grid(cfg), &opts)
}

fn sweep_tables(cfg: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let rows = run_sweep(cfg, Vec::new());
    let big_l = cfg.field.length_l;
    let mut t = Table::new(
        "sweep",
        &[
            "n_over_L [1]",
            "l_over_L [1]",
            "rho_c [cm]",
            "z_c [cm]",
            "rho_c_over_L [1]",
            "cos_beta0 [1]",
            "berry_phase [rad]",
            "C2 [1]",
            "C4 [1]",
            "error",
        ],
    )
    .with_series(&[0]);
    for r in &rows {
        let head = vec![r.n_over_l.into(), r.l_over_l.into()];
        let tail = match &r.outcome {
            Ok(p) => vec![
                p.rho_c.into(),
                p.z_c.into(),
                (p.rho_c / big_l).into(),
                p.cos_beta0.into(),
                (2.0 * PI * cfg.analysis.windings as f64 * p.cos_beta0).into(),
                p.c2.into(),
                p.c4.into(),
                Cell::Empty,
            ],
            Err(e) => {
                let mut v = vec![Cell::Empty; 7];
                v.push(e.code().into());
                v
            }
        };
        t.push([head, tail].concat())?;
    }

    let mut fit = Table::new(
        "sweep_fit",
        &[
            "n_over_L [1]",
            "slope [1]",
            "intercept [1]",
            "slope_rms [1]",
            "slope_points [1]",
            "rho_quad_c0 [1]",
            "rho_quad_c1 [1]",
            "rho_quad_c2 [1]",
            "rho_quad_rms_over_range [1]",
            "error",
        ],
    );
    for &n in &cfg.analysis.n_over_l {
        let mut pts: Vec<(f64, f64, f64)> = rows
            .iter()
            .filter(|r| r.n_over_l == n)
            .filter_map(|r| r.outcome.as_ref().ok().map(|p| (r.l_over_l, p.cos_beta0, p.rho_c / big_l)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        // the linear law holds at small l/L: fit the lower half of the grid
        let half = &pts[..pts.len().div_ceil(2)];
        let xs: Vec<f64> = half.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = half.iter().map(|p| p.1).collect();
        let all_x: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let rho: Vec<f64> = pts.iter().map(|p| p.2).collect();
        let lin = if xs.len() >= 2 { polyfit(&xs, &ys, 1) } else { Err(too_few()) };
        let quad = if rho.len() >= 3 { polyfit(&all_x, &rho, 2) } else { Err(too_few()) };
        let range = rho.iter().cloned().fold(f64::MIN, f64::max) - rho.iter().cloned().fold(f64::MAX, f64::min);
        let mut row: Vec<Cell> = vec![n.into()];
        let mut error = Cell::Empty;
        match lin {
            Ok((c, rms)) => row.extend([c[1].into(), c[0].into(), rms.into(), xs.len().into()]),
            Err(e) => {
                row.extend(vec![Cell::Empty; 4]);
                error = e.code().into();
            }
        }
        match quad {
            Ok((c, rms)) => {
                row.extend([c[0].into(), c[1].into(), c[2].into()]);
                row.push(if range > 0.0 { (rms / range).into() } else { Cell::Empty });
            }
            Err(e) => {
                row.extend(vec![Cell::Empty; 4]);
                error = e.code().into();
            }
        }
        row.push(error);
        fit.push(row)?;
    }
    Ok(vec![t, fit])
}

fn too_few() -> RingError {
    RingError::InvalidInput("too few successful grid points to fit".into())
}

fn phase(cfg: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let w = waveform(cfg);
    let ((rho, z), cb0) = center_cos_beta0(&w).at("trap center")?;
    let n_max = cfg.analysis.n_max;
    let spec = fourier_spectrum(&w, rho, z, n_max).at("connection spectrum")?;
    let q = cfg.analysis.windings;
    let gamma = berry_phase_closed(cb0, q).at("berry phase")?;
    let units = RingUnits::new(cfg.atom.mass, cfg.dynamics.ring_radius.unwrap_or(rho));
    let big_omega = match cfg.dynamics.v0 {
        Velocity::RadPerSecond(v) => v,
        Velocity::Natural(v) => units.to_rad_per_second(v),
    }
    .abs();
    let bound = residual_phase_bound(&spec, big_omega).at("residual phase bound")?;
    let mut t = Table::new(
        "phase",
        &[
            "rho_c [cm]",
            "z_c [cm]",
            "cos_beta0 [1]",
            "windings [1]",
            "berry_phase [rad]",
            "berry_phase_over_pi [1]",
            "atom_angular_velocity [rad/s]",
            "residual_bound [rad]",
        ],
    );
    t.push(vec![
        rho.into(),
        z.into(),
        cb0.into(),
        q.into(),
        gamma.into(),
        (gamma / PI).into(),
        big_omega.into(),
        bound.into(),
    ])?;
    let mut s = Table::new("phase_spectrum", &["n [1]", "C_n [1]", "varphi_n [rad]"]);
    s.push(vec![0usize.into(), spec.cos_beta0.into(), 0.0.into()])?;
    for n in 1..=n_max {
        let h = spec.harmonics.iter().find(|h| h.n == n);
        s.push(vec![
            n.into(),
            h.map_or(0.0, |h| h.amplitude).into(),
            h.map_or(Cell::Empty, |h| h.phase.into()),
        ])?;
    }
    Ok(vec![t, s])
}

fn fluct(cfg: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let deltas = cfg.analysis.deltas.clone();
    let rows = run_sweep(cfg, deltas.clone());
    let sampler = match cfg.analysis.sampler {
        ringberry::geometric_phase::SamplerKind::FlatGrid => "flat_grid",
        ringberry::geometric_phase::SamplerKind::FlatRandom => "flat_random",
        ringberry::geometric_phase::SamplerKind::Gaussian => "gaussian",
    };
    let mut t = Table::new(
        "fluct",
        &[
            "delta_over_L [1]",
            "n_over_L [1]",
            "l_over_L [1]",
            "f [1]",
            "stderr [1]",
            "contrast [1]",
            "touches_zero_locus [1]",
            "samples [1]",
            "sampler",
            "error",
        ],
    )
    .with_series(&[0, 1]);
    for (k, &d) in deltas.iter().enumerate() {
        for &n in &cfg.analysis.n_over_l {
            for r in rows.iter().filter(|r| r.n_over_l == n) {
                let head = vec![d.into(), n.into(), r.l_over_l.into()];
                let tail = match &r.outcome {
                    Ok(p) => {
                        let f = &p.fluctuation[k];
                        vec![
                            f.f.into(),
                            f.stderr.into(),
                            f.contrast.into(),
                            f.touches_zero_locus.into(),
                            f.samples.into(),
                            sampler.into(),
                            Cell::Empty,
                        ]
                    }
                    Err(e) => {
                        let mut v = vec![Cell::Empty; 5];
                        v.push(sampler.into());
                        v.push(e.code().into());
                        v
                    }
                };
                t.push([head, tail].concat())?;
            }
        }
    }
    Ok(vec![t])
}

fn interfere(cfg: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let d = &cfg.dynamics;
    let needs_center = d.ring_radius.is_none() || d.gauge == GaugeSpec::CosBeta0;
    let center = if needs_center {
        Some(center_cos_beta0(&waveform(cfg)).at("trap center")?)
    } else {
        None
    };
    let radius = d.ring_radius.or(center.map(|c| c.0 .0)).expect("radius or center");
    let gauge = match &d.gauge {
        GaugeSpec::CosBeta0 => GaugeProfile::from_cos_beta0(center.expect("center computed").1),
        GaugeSpec::Profile(p) => p.clone(),
    };
    let units = RingUnits::new(cfg.atom.mass, radius);
    let natural = |x: Duration| match x {
        Duration::Seconds(s) => units.to_natural_time(s),
        Duration::Natural(t) => t,
    };
    let mut ic = InterferenceConfig::new(units);
    ic.phi0 = d.phi0;
    ic.width = d.width;
    ic.n = d.grid;
    ic.v0 = match d.v0 {
        Velocity::RadPerSecond(v) => units.to_natural_velocity(v),
        Velocity::Natural(v) => v,
    };
    ic.dt = d.dt.map(natural);
    ic.t_max = d.t_max.map(natural);

    let (res, refined) = if d.convergence {
        let rep = convergence_check(&gauge, &FreePotential, &ic).at("interference")?;
        (rep.base, Some((rep.refined.extracted_gamma, rep.change)))
    } else {
        (run_interference(&gauge, &FreePotential, &ic).at("interference")?, None)
    };

    let mut t = Table::new(
        "interfere",
        &[
            "gauge_mean [1]",
            "loop_integral [rad]",
            "extracted_gamma [rad]",
            "gamma_mod_2pi [rad]",
            "winding [1]",
            "xi [rad]",
            "fringe_phase [rad]",
            "contrast [1]",
            "fringe_wavenumber [1/rad]",
            "predicted_wavenumber [1/rad]",
            "fit_rms [1]",
            "phi_ref [rad]",
            "overlap_time [tau]",
            "overlap_time_s [s]",
            "steps [1]",
            "dt [tau]",
            "grid [1]",
            "ring_radius [cm]",
            "refined_gamma [rad]",
            "convergence_change [rad]",
        ],
    );
    t.push(vec![
        gauge.mean.into(),
        res.loop_integral.into(),
        res.extracted_gamma.into(),
        res.gamma_mod_2pi.into(),
        res.winding.into(),
        res.xi.into(),
        res.fringe_phase.into(),
        res.contrast.into(),
        res.fringe_wavenumber.into(),
        res.predicted_wavenumber.into(),
        res.fit_rms.into(),
        res.phi_ref.into(),
        res.overlap_time.into(),
        res.overlap_time_seconds.into(),
        res.steps.into(),
        res.dt.into(),
        res.phi.len().into(),
        radius.into(),
        refined.map(|r| r.0).into(),
        refined.map(|r| r.1).into(),
    ])?;
    let mut dens = Table::new(
        "interfere_density",
        &["phi [rad]", "density [1/rad]", "n_plus [1/rad]", "n_minus [1/rad]"],
    );
    for k in 0..res.phi.len() {
        dens.push(vec![
            res.phi[k].into(),
            res.density[k].into(),
            res.n_plus[k].into(),
            res.n_minus[k].into(),
        ])?;
    }
    Ok(vec![t, dens])
}

fn coils(cfg: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let set = cfg.coils.clone().unwrap_or_else(CoilSet::worked_example);
    set.validate().at("coil set")?;
    let a = &cfg.analysis;
    let fit = fit_coil_expansion(&set, a.fit_radius, a.fit_points).at("expansion fit")?;
    let f = &cfg.field;
    let c = fit.coefficients;
    let mut t = Table::new(
        "coils",
        &[
            "coils [1]",
            "B0 [G]",
            "B1 [G/cm]",
            "B2 [G/cm2]",
            "target_B0 [G]",
            "target_B1 [G/cm]",
            "target_B2 [G/cm2]",
            "residual_norm [G]",
            "condition [1]",
        ],
    );
    t.push(vec![
        set.coils.len().into(),
        c.b0.into(),
        c.b1.into(),
        c.b2.into(),
        (f.b2 * f.length_l * f.length_l).into(),
        (f.b2 * f.l).into(),
        f.b2.into(),
        fit.residual_norm.into(),
        fit.condition.into(),
    ])?;
    let mut list = Table::new("coil_set", &["radius [cm]", "axial_position [cm]", "current [A]"]);
    for coil in &set.coils {
        list.push(vec![coil.radius.into(), coil.axial_position.into(), coil.current.into()])?;
    }
    Ok(vec![t, list])
}

fn sagnac(cfg: &ScenarioConfig) -> Result<Vec<Table>, ScenarioError> {
    let ((rho, _), cb0) = center_cos_beta0(&waveform(cfg)).at("trap center")?;
    let radius = cfg.dynamics.ring_radius.unwrap_or(rho);
    let s = &cfg.sagnac;
    let phase = sagnac_phase(cfg.atom.mass, s.rotation_rate, radius, s.tilt);
    let berry = berry_phase_closed(cb0, cfg.analysis.windings).at("berry phase")?;
    let mut t = Table::new(
        "sagnac",
        &[
            "ring_radius [cm]",
            "rotation_rate [rad/s]",
            "tilt [rad]",
            "sagnac_phase [rad]",
            "cos_beta0 [1]",
            "berry_phase [rad]",
            "sagnac_over_berry [1]",
        ],
    );
    t.push(vec![
        radius.into(),
        s.rotation_rate.into(),
        s.tilt.into(),
        phase.into(),
        cb0.into(),
        berry.into(),
        if berry != 0.0 { (phase / berry).into() } else { Cell::Empty },
    ])?;
    Ok(vec![t])
}
