use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nmtele::dephasing::{path_axis_to_time, PathLengthAxis};
use nmtele::experiments::config::config_keys_help;
use nmtele::experiments::{self, preset, ExperimentConfig, Scenario};
use nmtele::nonmarkov::{detect_revival, distance_trace};
use nmtele::oracle::{self, VERIFY_KS};
use nmtele::protocol::{teleport, ProtocolRun, QubitInput};
use nmtele::qstate::{fidelity, purity, BellOutcome};
use nmtele::spectrum::{GaussianSpectrum, JointSpectrum, PhysicalParams};
use nmtele::{Error, Result};

/// Quantum teleportation through correlated (non-Markovian) dephasing noise.
#[derive(Parser)]
#[command(name = "nmtele", version, after_help = config_keys_help(), allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decoherence function of Bob's qubit after noise on both sides.
    Kappa {
        /// Frequency correlation coefficient in [-1, 1].
        #[arg(long, allow_negative_numbers = true)]
        k: f64,
        /// Alice's optical path difference, in units of 808 nm.
        #[arg(long, default_value_t = 0.0)]
        ta_units: f64,
        /// Bob's optical path difference, in units of 808 nm.
        #[arg(long, default_value_t = 0.0)]
        tb_units: f64,
        #[command(flatten)]
        physical: PhysicalArgs,
    },
    /// Teleport one input preset for one Bell outcome and print the fidelity.
    Teleport {
        /// rho_plus, rho_1, rho_2 or rho_i.
        #[arg(long, default_value = "rho_plus")]
        input: String,
        /// phi_plus, phi_minus, psi_plus or psi_minus.
        #[arg(long, default_value = "phi_plus")]
        outcome: String,
        #[arg(long, allow_negative_numbers = true, default_value_t = -0.98)]
        k: f64,
        /// Alice's optical path difference, in units of 808 nm.
        #[arg(long, default_value_t = 0.0)]
        ta_units: f64,
        /// Bob's optical path difference, in units of 808 nm.
        #[arg(long, default_value_t = 0.0)]
        tb_units: f64,
        /// Keep Bob's deterministic pump phase instead of removing it.
        #[arg(long)]
        no_compensate: bool,
        #[command(flatten)]
        physical: PhysicalArgs,
    },
    /// Experiment 1: Alice's noise ramp, then Bob's ramp (CSV).
    #[command(after_help = config_keys_help())]
    Exp1(ExperimentArgs),
    /// Experiment 2: equal simultaneous ramps on both sides (CSV).
    #[command(after_help = config_keys_help())]
    Exp2(ExperimentArgs),
    /// Trace distance of the {Phi+, Phi-} pair through Alice's then Bob's noise.
    Revival {
        #[arg(long, allow_negative_numbers = true, default_value_t = -1.0)]
        k: f64,
        /// Path difference at the end of each side's ramp, in units of 808 nm.
        #[arg(long, default_value_t = 237.6)]
        x_max_units: f64,
        /// Samples per side.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// CSV destination for the trace (time_fs,distance,segment).
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        physical: PhysicalArgs,
    },
    /// Closed-form characteristic function against quadrature and Monte-Carlo.
    Verify {
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct PhysicalArgs {
    /// Pump wavelength [nm].
    #[arg(long, default_value_t = 404.0)]
    pump_nm: f64,
    /// Filter FWHM [nm].
    #[arg(long, default_value_t = 3.0)]
    filter_fwhm_nm: f64,
    /// Filter center wavelength [nm].
    #[arg(long, default_value_t = 808.0)]
    filter_center_nm: f64,
    /// Birefringence n_V - n_H.
    #[arg(long, default_value_t = 0.00889)]
    delta_n: f64,
}

impl PhysicalArgs {
    fn params(&self) -> Result<PhysicalParams> {
        let p = PhysicalParams {
            pump_wavelength_nm: self.pump_nm,
            filter_fwhm_nm: self.filter_fwhm_nm,
            filter_center_nm: self.filter_center_nm,
            delta_n: self.delta_n,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML file of configuration keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. --set k=-0.997 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_key_val)]
    overrides: Vec<(String, String)>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed for tomography mode (same as --set seed=N).
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_key_val(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn units_to_time(x: f64, delta_n: f64, flag: &str) -> Result<f64> {
    let axis = PathLengthAxis::new(x).map_err(|e| Error::Config { key: flag.into(), reason: e.to_string() })?;
    path_axis_to_time(axis, delta_n)
}

fn spectrum(p: &PhysicalParams, k: f64) -> Result<GaussianSpectrum> {
    if !(-1.0..=1.0).contains(&k) {
        return Err(Error::Config { key: "k".into(), reason: format!("{k} is outside [-1, 1]") });
    }
    GaussianSpectrum::from_physical(p, k)
}

fn run(cli: Cli) -> Result<bool> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let io_err = |source| Error::Io { path: "<stdout>".into(), source };
    match cli.command {
        Command::Kappa { k, ta_units, tb_units, physical } => {
            let p = physical.params()?;
            let s = spectrum(&p, k)?;
            let t_a = units_to_time(ta_units, p.delta_n, "ta-units")?;
            let t_b = units_to_time(tb_units, p.delta_n, "tb-units")?;
            let kappa = s.characteristic(p.delta_n * t_a, p.delta_n * t_b);
            writeln!(out, "|κ|={:.12}", kappa.norm().min(1.0)).map_err(io_err)?;
            writeln!(out, "phase={:.12} rad", kappa.arg()).map_err(io_err)?;
            writeln!(out, "t_a={t_a:.6} fs t_b={t_b:.6} fs").map_err(io_err)?;
        }
        Command::Teleport { input, outcome, k, ta_units, tb_units, no_compensate, physical } => {
            let p = physical.params()?;
            let s = spectrum(&p, k)?;
            let input = preset(&input).map_err(|e| match e {
                Error::Config { reason, .. } => Error::Config { key: "input".into(), reason },
                other => other,
            })?;
            let outcome: BellOutcome = outcome.parse()?;
            let t_a = units_to_time(ta_units, p.delta_n, "ta-units")?;
            let t_b = units_to_time(tb_units, p.delta_n, "tb-units")?;
            let run = ProtocolRun::new(QubitInput::Mixed(input.rho), &s, p.delta_n, t_a, t_b, outcome)
                .with_compensation(!no_compensate);
            let rho_out = teleport(&run)?;
            writeln!(out, "fidelity={:.12}", fidelity(&input.rho, &rho_out)).map_err(io_err)?;
            writeln!(out, "purity_out={:.12}", purity(&rho_out)).map_err(io_err)?;
            writeln!(out, "rho_out=\n{rho_out}").map_err(io_err)?;
        }
        Command::Exp1(args) => experiment(Scenario::AliceThenBob, args, &mut out)?,
        Command::Exp2(args) => experiment(Scenario::EqualRamp, args, &mut out)?,
        Command::Revival { k, x_max_units, steps, output, physical } => {
            let p = physical.params()?;
            let s = spectrum(&p, k)?;
            let t = units_to_time(x_max_units, p.delta_n, "x-max-units")?;
            let trace = distance_trace(&s, p.delta_n, t, t, steps)?;
            let rev = detect_revival(&trace);
            let min = trace.distances.iter().cloned().fold(1.0, f64::min);
            writeln!(out, "non_markovian={}", rev.is_non_markovian).map_err(io_err)?;
            writeln!(out, "revival_magnitude={:.12}", rev.magnitude).map_err(io_err)?;
            writeln!(out, "min_distance={min:.12}").map_err(io_err)?;
            if let Some(path) = output {
                trace.write_csv(path)?;
            }
        }
        Command::Verify { samples, seed } => {
            if samples < 2 {
                return Err(Error::Config { key: "samples".into(), reason: "need at least 2".into() });
            }
            let base = GaussianSpectrum::from_physical(&PhysicalParams::default(), 0.0)?;
            let rows = oracle::verify(&base, &VERIFY_KS, samples, seed);
            let tol = 1e-8;
            writeln!(out, "k,max_rel_quadrature,max_abs_mc,mc_bound,pass").map_err(io_err)?;
            let mut ok = true;
            for r in &rows {
                let pass = r.passes(tol);
                ok &= pass;
                writeln!(out, "{},{:.3e},{:.3e},{:.3e},{}", r.k, r.quadrature_rel, r.mc_abs, r.mc_bound, pass)
                    .map_err(io_err)?;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn experiment(scenario: Scenario, args: ExperimentArgs, out: &mut impl Write) -> Result<()> {
    let mut overrides = args.overrides;
    if let Some(seed) = args.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    let cfg = ExperimentConfig::load(scenario, args.config.as_deref(), &overrides)?;
    let points = experiments::run_experiment(&cfg)?;
    match args.output {
        Some(path) => experiments::emit_csv(&points, path),
        None => experiments::write_points(&points, out)
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
