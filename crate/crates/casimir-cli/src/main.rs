//! `casimir` — command-line front end for the Casimir force-fluctuation
//! toolkit.
//!
//! Subcommands: `predict` (noise/damping from a measured spring shift),
//! `geometry` (sphere-over-half-space totals, optionally cross-checked by
//! Monte Carlo), `simulate` / `fit` (time-domain measurement pipeline), and
//! `verify` (the oracle suites).
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error. All reports are JSON on stdout.

use casimir_core::error::Error as CoreError;
use casimir_core::geometry::{
    any_transverse, total_force, total_force_mc, total_noise, total_noise_mc, total_spring,
    total_spring_mc, DipoleCoupling, MaterialSpec, TipSampleGeometry,
};
use casimir_core::predict::{
    casimir_damping_normal, casimir_damping_transverse, casimir_noise_normal,
    casimir_noise_transverse,
};
use casimir_core::quad::QuadratureSettings;
use casimir_core::simulate::{
    estimate_autocorrelation, extract_force_psd, fit_autocorrelation, simulate_brownian,
    SimulationConfig, TimeSeries,
};
use casimir_core::verify::{run_suite, Suite, VerifyOptions};
use casimir_core::{CantileverParams, HBAR, K_B};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

const DEFAULT_SEED: u64 = 0x00c1_5a7e_5eed;

#[derive(Parser)]
#[command(
    name = "casimir",
    version,
    about = "Casimir force-fluctuation predictions for force microscopy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict the Casimir force noise and damping shift from a measured
    /// spring-constant change.
    Predict {
        #[command(subcommand)]
        geometry: PredictGeometry,
    },
    /// Total force, spring, and noise tensors for a spherical tip over a
    /// half-space sample.
    Geometry(GeometryArgs),
    /// Simulate cantilever Brownian motion and write a t,x CSV.
    Simulate {
        /// JSON run configuration (cantilever.* and simulation.* sections).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the damped-cosine autocorrelation model to a t,x CSV.
    Fit {
        /// Input CSV path.
        #[arg(long = "in")]
        input: PathBuf,
        /// Maximum autocorrelation lag in seconds (ignored with --acf).
        #[arg(long, default_value_t = 0.0)]
        max_lag: f64,
        /// Motional mass in kg (needed to extract the force density).
        #[arg(long)]
        mass: f64,
        /// Ambient temperature in K (adds the equipartition ratio).
        #[arg(long)]
        temperature: Option<f64>,
        /// Treat the input as a precomputed tau,c autocorrelation instead of
        /// a t,x time series.
        #[arg(long)]
        acf: bool,
    },
    /// Run the oracle verification suites.
    Verify {
        /// Suite name: specfun|oscillator|pair|ensemble|geometry|predict|simulate|all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Reduced sample counts and grids.
        #[arg(long)]
        fast: bool,
        /// Seed override (also settable via CASIMIR_SEED).
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum PredictGeometry {
    /// Tip vibration normal to the sample: delta-k must be <= 0.
    Normal {
        #[arg(long = "delta-k", allow_hyphen_values = true)]
        delta_k: f64,
        #[arg(long)]
        temperature: Option<f64>,
    },
    /// Tip vibration in the sample plane (end-on): delta-k must be >= 0.
    Transverse {
        #[arg(long = "delta-k", allow_hyphen_values = true)]
        delta_k: f64,
        /// Effective cantilever mode length l, m.
        #[arg(long = "mode-length")]
        mode_length: f64,
        /// Tip-sample gap h, m.
        #[arg(long)]
        gap: f64,
        #[arg(long)]
        temperature: Option<f64>,
    },
}

#[derive(Args)]
struct GeometryArgs {
    /// Tip radius r, m.
    #[arg(long)]
    radius: f64,
    /// Tip-sample gap h, m.
    #[arg(long)]
    gap: f64,
    /// Tip atomic number density, 1/m^3.
    #[arg(long = "rho-a")]
    rho_a: f64,
    /// Sample atomic number density, 1/m^3.
    #[arg(long = "rho-b")]
    rho_b: f64,
    /// Dipole coupling strength kappa, m^3/s.
    #[arg(long, allow_hyphen_values = true)]
    kappa: f64,
    /// Debye frequency omega_D, rad/s.
    #[arg(long = "debye-frequency")]
    debye_frequency: f64,
    /// Cross-check the closed forms against the Monte Carlo oracle
    /// (exit 1 on a >3 sigma deviation).
    #[arg(long)]
    oracle: bool,
    /// Monte Carlo sample count for --oracle.
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: u64,
    /// Seed override (also settable via CASIMIR_SEED).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("CASIMIR_SEED").ok().and_then(|s| s.parse().ok())
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(env_seed).unwrap_or(DEFAULT_SEED)
}

fn run(cli: Cli) -> Result<ExitCode, CoreError> {
    match cli.command {
        Command::Predict { geometry } => cmd_predict(geometry),
        Command::Geometry(args) => cmd_geometry(args),
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::Fit { input, max_lag, mass, temperature, acf } => {
            cmd_fit(&input, max_lag, mass, temperature, acf)
        }
        Command::Verify { suite, fast, seed } => cmd_verify(&suite, fast, seed),
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn cmd_predict(geometry: PredictGeometry) -> Result<ExitCode, CoreError> {
    let report = match geometry {
        PredictGeometry::Normal { delta_k, temperature } => {
            let delta_sf = casimir_noise_normal(delta_k)?;
            let delta_damping = match temperature {
                Some(t) => Some(casimir_damping_normal(delta_k, t)?),
                None => None,
            };
            json!({
                "geometry": "normal",
                "delta_k": delta_k,
                "temperature": temperature,
                "delta_sf": delta_sf,
                "sqrt_delta_sf": delta_sf.sqrt(),
                "delta_damping": delta_damping,
            })
        }
        PredictGeometry::Transverse { delta_k, mode_length, gap, temperature } => {
            let delta_sf = casimir_noise_transverse(delta_k, mode_length, gap)?;
            let delta_damping = match temperature {
                Some(t) => Some(casimir_damping_transverse(delta_k, mode_length, gap, t)?),
                None => None,
            };
            json!({
                "geometry": "transverse",
                "delta_k": delta_k,
                "mode_length": mode_length,
                "gap": gap,
                "temperature": temperature,
                "delta_sf": delta_sf,
                "sqrt_delta_sf": delta_sf.sqrt(),
                "delta_damping": delta_damping,
            })
        }
    };
    print_json(&report);
    Ok(ExitCode::SUCCESS)
}

fn cmd_geometry(args: GeometryArgs) -> Result<ExitCode, CoreError> {
    let geom = TipSampleGeometry::new(args.radius, args.gap, [0.0, 0.0, 1.0])?;
    let dist = casimir_core::SpectralDistribution::debye(args.debye_frequency)?;
    let material = MaterialSpec::new(args.rho_a, args.rho_b, DipoleCoupling::new(args.kappa)?, dist)?;
    let settings = QuadratureSettings {
        mc_samples: args.mc_samples,
        seed: resolve_seed(args.seed),
        ..QuadratureSettings::default()
    };

    let force = total_force(&geom, &material, &settings)?;
    let spring = total_spring(&geom, &material, &settings)?;
    let noise = total_noise(&geom, &material)?;
    let n = geom.normal();
    let t = any_transverse(&n);
    let snn = noise.component(&n, &n);
    let stt = noise.component(&t, &t);
    let knn = spring[2][2];

    let mut report = json!({
        "radius": args.radius,
        "gap": args.gap,
        "force": force,
        "spring": spring,
        "noise": noise.matrix(),
        "normal_spring": knn,
        "normal_noise": snn,
        "transverse_noise": stt,
        "noise_stiffness_ratio_hbar": snn / knn.abs() / HBAR,
    });

    let mut failed = false;
    if args.oracle {
        let (f_mc, f_se) = total_force_mc(&geom, &material, &settings)?;
        let (k_mc, k_se) = total_spring_mc(&geom, &material, &settings)?;
        let (t_mc, t_se) = total_noise_mc(&geom, &material, &settings)?;
        let checks = [
            ("force_normal", force[2], f_mc[2], f_se),
            ("spring_normal", knn, k_mc[2][2], k_se),
            ("noise_normal", snn, t_mc.component(&n, &n), t_se[0]),
            ("noise_transverse", stt, t_mc.component(&t, &t), t_se[1]),
        ];
        let mut oracle = serde_json::Map::new();
        for (name, closed, mc, se) in checks {
            let sigmas = (mc - closed).abs() / se;
            let pass = sigmas <= 3.0;
            failed |= !pass;
            oracle.insert(
                name.into(),
                json!({ "closed_form": closed, "monte_carlo": mc, "std_error": se, "sigmas": sigmas, "pass": pass }),
            );
        }
        report["oracle"] = serde_json::Value::Object(oracle);
        report["oracle_pass"] = json!(!failed);
    }
    print_json(&report);
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

/// On-disk run configuration: nested cantilever.* and simulation.* keys.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    cantilever: CantileverSection,
    simulation: SimulationSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CantileverSection {
    mass: f64,
    omega0: f64,
    quality: f64,
    temperature: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulationSection {
    dt: f64,
    duration: f64,
    seed: Option<u64>,
    #[serde(default)]
    extra_force_psd: f64,
    #[serde(default)]
    extra_damping: f64,
}

impl RunConfig {
    fn build(&self) -> Result<SimulationConfig, CoreError> {
        let c = &self.cantilever;
        for (path, v) in [
            ("cantilever.mass", c.mass),
            ("cantilever.omega0", c.omega0),
            ("cantilever.quality", c.quality),
            ("cantilever.temperature", c.temperature),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::InvalidSpec(format!("{path}: must be positive, got {v}")));
            }
        }
        let params = CantileverParams::new(c.mass, c.omega0, c.quality, c.temperature)?;
        let s = &self.simulation;
        for (path, v) in [("simulation.dt", s.dt), ("simulation.duration", s.duration)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CoreError::InvalidSpec(format!("{path}: must be positive, got {v}")));
            }
        }
        for (path, v) in [
            ("simulation.extra_force_psd", s.extra_force_psd),
            ("simulation.extra_damping", s.extra_damping),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(CoreError::InvalidSpec(format!("{path}: must be nonnegative, got {v}")));
            }
        }
        let config = SimulationConfig {
            dt: s.dt,
            duration: s.duration,
            seed: s.seed.or_else(env_seed).unwrap_or(DEFAULT_SEED),
            params,
            extra_force_psd: s.extra_force_psd,
            extra_damping: s.extra_damping,
        };
        config.validate()?;
        Ok(config)
    }
}

fn cmd_simulate(config_path: &PathBuf, out: &PathBuf) -> Result<ExitCode, CoreError> {
    let file = File::open(config_path)
        .map_err(|e| CoreError::Parse(format!("cannot open {}: {e}", config_path.display())))?;
    let run: RunConfig = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CoreError::Parse(format!("{}: {e}", config_path.display())))?;
    let config = run.build()?;

    let series = simulate_brownian(&config)?;
    let out_file = File::create(out)
        .map_err(|e| CoreError::Parse(format!("cannot create {}: {e}", out.display())))?;
    let mut writer = BufWriter::new(out_file);
    series.write_csv(&mut writer)?;
    writer.flush()?;

    let variance = series.variance();
    let k = config.params.spring_constant();
    print_json(&json!({
        "out": out.display().to_string(),
        "samples": series.samples.len(),
        "dt": series.dt,
        "duration": series.duration(),
        "seed": config.seed,
        "variance": variance,
        "equipartition_ratio": k * variance / (K_B * config.params.temperature),
    }));
    Ok(ExitCode::SUCCESS)
}

fn read_acf_csv(input: &PathBuf) -> Result<Vec<(f64, f64)>, CoreError> {
    use std::io::BufRead;
    let file = File::open(input)
        .map_err(|e| CoreError::Parse(format!("cannot open {}: {e}", input.display())))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Parse("empty autocorrelation file".into()))?
        .map_err(CoreError::Io)?;
    if header.trim() != "tau,c" {
        return Err(CoreError::Parse(format!("expected header 'tau,c', got '{header}'")));
    }
    let mut acf = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(CoreError::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let parse = |field: Option<&str>, name: &str| -> Result<f64, CoreError> {
            field
                .ok_or_else(|| CoreError::Parse(format!("row {}: missing column '{name}'", i + 2)))?
                .trim()
                .parse()
                .map_err(|e| CoreError::Parse(format!("row {}: bad {name} value ({e})", i + 2)))
        };
        acf.push((parse(cols.next(), "tau")?, parse(cols.next(), "c")?));
    }
    Ok(acf)
}

fn cmd_fit(
    input: &PathBuf,
    max_lag: f64,
    mass: f64,
    temperature: Option<f64>,
    acf_input: bool,
) -> Result<ExitCode, CoreError> {
    let acf = if acf_input {
        read_acf_csv(input)?
    } else {
        if !(max_lag > 0.0) {
            return Err(CoreError::InvalidSpec("--max-lag must be positive for time-series input".into()));
        }
        let file = File::open(input)
            .map_err(|e| CoreError::Parse(format!("cannot open {}: {e}", input.display())))?;
        let series = TimeSeries::read_csv(BufReader::new(file))?;
        estimate_autocorrelation(&series, max_lag)?
    };
    let mut fit = fit_autocorrelation(&acf)?;
    fit.sf_extracted = Some(extract_force_psd(&fit, mass)?);

    let mut report = serde_json::to_value(fit).expect("fit serializes");
    if let Some(t) = temperature {
        if !(t > 0.0) {
            return Err(CoreError::InvalidSpec("temperature must be positive".into()));
        }
        let k = mass * fit.omega0_fit * fit.omega0_fit;
        report["equipartition_ratio"] = json!(k * fit.x2_mean / (K_B * t));
    }
    report["mass"] = json!(mass);
    report["n_lags"] = json!(acf.len());
    print_json(&report);
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(suite: &str, fast: bool, seed: Option<u64>) -> Result<ExitCode, CoreError> {
    let suite: Suite = suite.parse().map_err(CoreError::InvalidSpec)?;
    let opts = VerifyOptions { fast, seed: resolve_seed(seed) };
    let checks = run_suite(suite, &opts)?;
    let failed: usize = checks.iter().filter(|c| !c.pass).count();
    for c in &checks {
        eprintln!(
            "{} {} (got {:.6e}, expected {:.6e}, tolerance {:.2e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.got,
            c.expected,
            c.tolerance
        );
    }
    print_json(&json!({
        "suite": format!("{suite:?}").to_lowercase(),
        "fast": fast,
        "seed": opts.seed,
        "checks": checks,
        "passed": checks.len() - failed,
        "failed": failed,
    }));
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
