//! The two laboratory scenarios as parameter sweeps.
//!
//! Experiment 1 ramps Alice's noise with Bob idle, then holds Alice at the
//! maximum and ramps Bob. Its x axis is the cumulative path difference
//! `x_a + x_b`, so the Bob segment starts by repeating the Alice endpoint.
//! Experiment 2 ramps both sides together and reports `x = x_a + x_b = 2·x_a`.

pub mod config;
pub mod presets;

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::dephasing::{path_axis_to_time, PathLengthAxis};
use crate::error::{Error, Result};
use crate::protocol::{teleport, ProtocolRun, QubitInput};
use crate::qstate::{fidelity, BellOutcome};
use crate::spectrum::GaussianSpectrum;
use crate::tomography::{derive_seed, mc_error_bar, reconstruct, simulate_counts};

pub use config::{ExperimentConfig, Scenario, TomographySettings};
pub use presets::{all_presets, preset, InputPreset};

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub x: PathLengthAxis,
    pub outcome: BellOutcome,
    pub input_label: String,
    pub fidelity: f64,
    pub error_bar: Option<f64>,
}

/// Path differences `(x_a, x_b)` on each side, in sweep order.
fn schedule(cfg: &ExperimentConfig) -> Vec<(f64, f64)> {
    let n = cfg.n_points;
    let step = |i: usize| cfg.x_max_units * i as f64 / (n - 1) as f64;
    match cfg.scenario {
        Scenario::AliceThenBob => (0..n)
            .map(|i| (step(i), 0.0))
            .chain((0..n).map(|i| (cfg.x_max_units, step(i))))
            .collect(),
        Scenario::EqualRamp => (0..n).map(|i| (step(i), step(i))).collect(),
    }
}

pub fn run_experiment1(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    expect_scenario(cfg, Scenario::AliceThenBob)?;
    run(cfg)
}

pub fn run_experiment2(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    expect_scenario(cfg, Scenario::EqualRamp)?;
    run(cfg)
}

/// Runs whichever scenario `cfg` names.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    run(cfg)
}

fn expect_scenario(cfg: &ExperimentConfig, want: Scenario) -> Result<()> {
    if cfg.scenario != want {
        return Err(Error::config(
            "scenario",
            format!("expected {}, got {}", want.label(), cfg.scenario.label()),
        ));
    }
    Ok(())
}

fn run(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let spectrum = GaussianSpectrum::from_physical(&cfg.physical, cfg.k)?;
    let dn = cfg.physical.delta_n;
    let sched = schedule(cfg);

    let mut jobs = Vec::new();
    for input in &cfg.inputs {
        for &outcome in &cfg.outcomes {
            for &(xa, xb) in &sched {
                jobs.push((input, outcome, xa, xb));
            }
        }
    }

    let mut points = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(input, outcome, xa, xb))| {
            let t_a = path_axis_to_time(PathLengthAxis::new(xa)?, dn)?;
            let t_b = path_axis_to_time(PathLengthAxis::new(xb)?, dn)?;
            let run = ProtocolRun::new(QubitInput::Mixed(input.rho), &spectrum, dn, t_a, t_b, outcome)
                .with_compensation(cfg.compensate_phase);
            let rho_out = teleport(&run)?;
            let (fidelity, error_bar) = match cfg.tomography {
                None => (fidelity(&input.rho, &rho_out), None),
                Some(t) => {
                    let point_seed = derive_seed(t.seed, idx as u64);
                    let counts = simulate_counts(&rho_out, t.shots, derive_seed(point_seed, 0))?;
                    let rho_hat = reconstruct(&counts)?.rho_hat;
                    let err = mc_error_bar(&input.rho, &rho_hat, t.shots, t.resamples, derive_seed(point_seed, 1))?;
                    (fidelity(&input.rho, &rho_hat), Some(err))
                }
            };
            Ok(CurvePoint {
                x: PathLengthAxis::new(xa + xb)?,
                outcome,
                input_label: input.name.to_string(),
                fidelity,
                error_bar,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_points(&mut points);
    Ok(points)
}

fn outcome_rank(o: BellOutcome) -> usize {
    BellOutcome::ALL.iter().position(|&a| a == o).expect("outcome listed")
}

/// Stable sort by (input label, outcome, x).
pub fn sort_points(points: &mut [CurvePoint]) {
    points.sort_by(|a, b| {
        a.input_label
            .cmp(&b.input_label)
            .then(outcome_rank(a.outcome).cmp(&outcome_rank(b.outcome)))
            .then(a.x.units().total_cmp(&b.x.units()))
    });
}

pub const CSV_HEADER: &str = "x_units_808nm,outcome,input,fidelity,error_bar";

/// Plain decimal with 12 significant digits.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 {
        return format!("{:.11}", 0.0);
    }
    // Scientific formatting rounds first, so the exponent already accounts
    // for values like 9.9999999999996 rounding up to 10.
    let sci = format!("{v:.11e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).expect("exponent");
    let decimals = (11 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn write_points<W: Write>(points: &[CurvePoint], mut out: W) -> std::io::Result<()> {
    let mut sorted = points.to_vec();
    sort_points(&mut sorted);
    writeln!(out, "{CSV_HEADER}")?;
    for p in &sorted {
        let err = p.error_bar.map(format_sig12).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            format_sig12(p.x.units()),
            p.outcome.label(),
            p.input_label,
            format_sig12(p.fidelity),
            err
        )?;
    }
    out.flush()
}

pub fn emit_csv(points: &[CurvePoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let file = std::fs::File::create(path).map_err(io)?;
    write_points(points, std::io::BufWriter::new(file)).map_err(io)
}
