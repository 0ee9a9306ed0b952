//! Command-line front end: load spin systems and pulse sequences, run
//! simulations, sweeps and fits, and emit CSV/JSON for plotting and
//! regression.
//!
//! Exit status: 0 on success, 1 on input errors (missing files, parse
//! errors, bad flags), 2 on internal invariant violations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinsim::experiments::{
    dq_coherence, fit_sinusoid, inject_noise, scenario_multi_env_dq, scenario_n_environment,
    scenario_one_qubit, sweep, EnvCoupling, FitComponent, GridSpec, SweepMetadata, SweepResult,
    SweepSample,
};
use spinsim::seq::{apply_propagators, compile, parse, Binding};
use spinsim::{peak_amplitudes, pseudo_pure_down, Complex64, DensityMatrix, SpinSystem};

/// Tolerance for the closed-form-versus-brute-force check suites.
const ORACLE_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "spinsim",
    about = "Pulse-level spin-1/2 simulator: compile sequences, sweep scenarios, fit sinusoids",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a sequence, run it on the all-down initial state, and print
    /// the final density matrix plus the first spin's peak amplitudes.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        sequence: PathBuf,
        /// Symbol bindings, e.g. --bind theta=50.3deg (repeatable).
        #[arg(long = "bind")]
        bind: Vec<String>,
        /// Optional JSON copy of the printed result.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a scenario over a parameter grid and write the samples.
    Sweep {
        /// one-qubit | n-env | product | dq
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        system: PathBuf,
        /// start:stop:step with an optional unit (deg, ms, s), e.g.
        /// 0:360:5deg or 0ms:20ms:0.5ms.
        #[arg(long)]
        grid: String,
        #[arg(long = "bind")]
        bind: Vec<String>,
        /// Relative noise fraction to inject (deterministic per seed).
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Fit y = A cos(2 pi x / T + phi) + c to a sweep file.
    Fit {
        /// Sweep file written by `sweep` (CSV or JSON).
        input: PathBuf,
        /// Which component of the complex samples to fit: re | im | abs.
        #[arg(long = "use", default_value = "re")]
        component: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Run the closed-form-versus-brute-force suites and report the
    /// largest deviation.
    OracleCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum CliError {
    Input(String),
    Internal(String),
}

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn internal_err(msg: impl std::fmt::Display) -> CliError {
    CliError::Internal(msg.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            system,
            sequence,
            bind,
            out,
        } => cmd_simulate(&system, &sequence, &bind, out.as_deref()),
        Command::Sweep {
            scenario,
            system,
            grid,
            bind,
            noise,
            seed,
            out,
            format,
        } => cmd_sweep(&scenario, &system, &grid, &bind, noise, seed, out.as_deref(), format),
        Command::Fit {
            input,
            component,
            out,
            format,
        } => cmd_fit(&input, &component, out.as_deref(), format),
        Command::OracleCheck { seed } => cmd_oracle_check(seed),
    }
}

// ---------------------------------------------------------------------------
// simulate

fn cmd_simulate(
    system: &Path,
    sequence: &Path,
    bind: &[String],
    out: Option<&Path>,
) -> Result<(), CliError> {
    let sys = SpinSystem::from_path(system).map_err(|e| input_err(e.to_string()))?;
    let text = std::fs::read_to_string(sequence)
        .map_err(|e| input_err(format!("failed to read {}: {e}", sequence.display())))?;
    let seq = parse(&text).map_err(|e| input_err(format!("{}: {e}", sequence.display())))?;
    let binding = parse_bindings(bind)?;

    let props = compile(&seq, &sys, &binding).map_err(|e| input_err(e.to_string()))?;
    let initial = pseudo_pure_down(sys.spin_count()).map_err(internal_err)?;
    let rho = apply_propagators(&props, &initial).map_err(internal_err)?;

    let mut report = String::new();
    let _ = writeln!(report, "# system: {}", system.display());
    let _ = writeln!(report, "# sequence: {}", seq.format());
    let _ = writeln!(report, "# final density matrix, real part");
    write_matrix_part(&mut report, &rho, |v| v.re);
    let _ = writeln!(report, "# final density matrix, imaginary part");
    write_matrix_part(&mut report, &rho, |v| v.im);

    let mut peaks_json = serde_json::Value::Null;
    if sys.spin_count() >= 2 {
        let observed = sys.label(0).to_string();
        let partner = sys.label(1).to_string();
        let reduced = if sys.spin_count() > 2 {
            rho.partial_trace(&[1, 2]).map_err(internal_err)?
        } else {
            rho.clone()
        };
        let peaks = peak_amplitudes(&reduced, &sys, &observed, &partner).map_err(internal_err)?;
        let _ = writeln!(
            report,
            "# peak amplitudes of {observed} (partner {partner}): low = {} + {}i, high = {} + {}i",
            sig12(peaks.low.re),
            sig12(peaks.low.im),
            sig12(peaks.high.re),
            sig12(peaks.high.im)
        );
        peaks_json = serde_json::json!({
            "observed": observed,
            "partner": partner,
            "low_re": peaks.low.re,
            "low_im": peaks.low.im,
            "high_re": peaks.high.re,
            "high_im": peaks.high.im,
        });
    }
    print!("{report}");

    if let Some(path) = out {
        let dim = rho.dim();
        let re: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| rho.mat()[(i, j)].re).collect())
            .collect();
        let im: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| rho.mat()[(i, j)].im).collect())
            .collect();
        let doc = serde_json::json!({
            "system": system.display().to_string(),
            "sequence": seq.format(),
            "dim": dim,
            "re": re,
            "im": im,
            "peaks": peaks_json,
        });
        write_atomic(path, &format!("{:#}\n", doc))?;
    }
    Ok(())
}

fn write_matrix_part(out: &mut String, rho: &DensityMatrix, part: impl Fn(Complex64) -> f64) {
    let dim = rho.dim();
    for i in 0..dim {
        let row: Vec<String> = (0..dim).map(|j| sig12(part(rho.mat()[(i, j)]))).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

// ---------------------------------------------------------------------------
// sweep

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    scenario: &str,
    system: &Path,
    grid: &str,
    bind: &[String],
    noise: Option<f64>,
    seed: u64,
    out: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let sys = SpinSystem::from_path(system).map_err(|e| input_err(e.to_string()))?;
    let grid = parse_grid(grid)?;
    let binding = parse_bindings(bind)?;
    let label = system.display().to_string();

    let mut result =
        sweep(scenario, &sys, &label, &grid, &binding).map_err(|e| input_err(e.to_string()))?;
    if let Some(sigma) = noise {
        result = inject_noise(&result, sigma, seed).map_err(|e| input_err(e.to_string()))?;
    }

    let rendered = match format {
        OutputFormat::Csv => sweep_to_csv(&result),
        OutputFormat::Json => sweep_to_json(&result),
    };
    emit(out, &rendered)
}

fn sweep_to_csv(result: &SweepResult) -> String {
    let mut out = String::from("param,value_re,value_im\n");
    for s in &result.samples {
        let _ = writeln!(
            out,
            "{},{},{}",
            sig12(s.param),
            sig12(s.value.re),
            sig12(s.value.im)
        );
    }
    out
}

fn sweep_to_json(result: &SweepResult) -> String {
    let samples: Vec<serde_json::Value> = result
        .samples
        .iter()
        .map(|s| {
            serde_json::json!({
                "param": s.param,
                "value_re": s.value.re,
                "value_im": s.value.im,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "scenario": result.scenario,
        "param_name": result.param_name,
        "samples": samples,
        "metadata": {
            "system": result.metadata.system,
            "sequence": result.metadata.sequence,
            "bindings": result.metadata.bindings,
        },
    });
    format!("{:#}\n", doc)
}

// ---------------------------------------------------------------------------
// fit

fn cmd_fit(
    input: &Path,
    component: &str,
    out: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let component: FitComponent = component.parse().map_err(input_err)?;
    let text = std::fs::read_to_string(input)
        .map_err(|e| input_err(format!("failed to read {}: {e}", input.display())))?;
    let data = read_sweep_file(&text, input)?;
    let fit = fit_sinusoid(&data, component).map_err(|e| input_err(e.to_string()))?;

    let rendered = match format {
        OutputFormat::Json => format!(
            "{:#}\n",
            serde_json::json!({
                "amplitude": fit.amplitude,
                "period": fit.period,
                "phase": fit.phase,
                "offset": fit.offset,
                "rms_residual": fit.rms_residual,
            })
        ),
        OutputFormat::Csv => format!(
            "amplitude,period,phase,offset,rms_residual\n{},{},{},{},{}\n",
            sig12(fit.amplitude),
            sig12(fit.period),
            sig12(fit.phase),
            sig12(fit.offset),
            sig12(fit.rms_residual)
        ),
    };
    emit(out, &rendered)
}

fn read_sweep_file(text: &str, path: &Path) -> Result<SweepResult, CliError> {
    let samples = if text.trim_start().starts_with('{') {
        read_sweep_json(text, path)?
    } else {
        read_sweep_csv(text, path)?
    };
    SweepResult::new(
        "file".into(),
        "param".into(),
        samples,
        SweepMetadata {
            system: path.display().to_string(),
            sequence: None,
            bindings: BTreeMap::new(),
        },
    )
    .map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn read_sweep_csv(text: &str, path: &Path) -> Result<Vec<SweepSample>, CliError> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| input_err(format!("{}: empty sweep file", path.display())))?;
    if header.1.trim() != "param,value_re,value_im" {
        return Err(input_err(format!(
            "{}: expected header param,value_re,value_im",
            path.display()
        )));
    }
    let mut samples = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(input_err(format!(
                "{}: line {} has {} fields, expected 3",
                path.display(),
                lineno + 1,
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| input_err(format!("{}: line {}: {e}", path.display(), lineno + 1)))
        };
        samples.push(SweepSample {
            param: parse(fields[0])?,
            value: Complex64::new(parse(fields[1])?, parse(fields[2])?),
        });
    }
    Ok(samples)
}

fn read_sweep_json(text: &str, path: &Path) -> Result<Vec<SweepSample>, CliError> {
    let doc: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let samples = doc
        .get("samples")
        .and_then(|s| s.as_array())
        .ok_or_else(|| input_err(format!("{}: missing samples array", path.display())))?;
    samples
        .iter()
        .map(|s| {
            let field = |name: &str| {
                s.get(name)
                    .and_then(|v| v.as_f64())
                    .ok_or_else(|| input_err(format!("{}: sample missing {name}", path.display())))
            };
            Ok(SweepSample {
                param: field("param")?,
                value: Complex64::new(field("value_re")?, field("value_im")?),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// oracle-check

fn cmd_oracle_check(seed: u64) -> Result<(), CliError> {
    let mut worst = 0.0f64;

    // Reduced one-qubit coherence against -sin(theta).
    let mut dev = 0.0f64;
    for i in 0..=72 {
        let theta = (i as f64 * 5.0).to_radians();
        let out = scenario_one_qubit(theta);
        dev = dev.max((out.coherence - Complex64::new(-theta.sin(), 0.0)).norm());
    }
    println!("one-qubit vs -sin(theta):        max deviation {}", sig12(dev));
    worst = worst.max(dev);

    // N environment spins against -sin^N(theta).
    let mut dev = 0.0f64;
    for n_env in 1..=8 {
        for i in 0..37 {
            let theta = (i as f64 * 10.0).to_radians();
            let out = scenario_n_environment(theta, n_env).map_err(internal_err)?;
            dev = dev.max(
                (out.coherence_bruteforce - Complex64::new(out.coherence_closed, 0.0)).norm(),
            );
        }
    }
    println!("n-env vs -sin^N(theta):          max deviation {}", sig12(dev));
    worst = worst.max(dev);

    // Double-quantum decay against cos(pi*(J13+J23)*t).
    let mut dev = 0.0f64;
    for i in 0..41 {
        let t = i as f64 * 0.0005;
        let expected = (std::f64::consts::PI * (9.23 + 201.3) * t).cos();
        let got = dq_coherence(t).map_err(internal_err)?;
        dev = dev.max((got - Complex64::new(expected, 0.0)).norm());
    }
    println!("dq vs cos(pi*(J13+J23)*t):       max deviation {}", sig12(dev));
    worst = worst.max(dev);

    // Multi-environment product law with randomized couplings.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dev = 0.0f64;
    for k in 2..=4 {
        let envs: Vec<EnvCoupling> = (0..k)
            .map(|_| EnvCoupling {
                j1k_hz: rng.random_range(5.0..250.0),
                j2k_hz: rng.random_range(5.0..250.0),
            })
            .collect();
        for i in 0..21 {
            let t = i as f64 * 0.00025;
            let out = scenario_multi_env_dq(t, &envs).map_err(internal_err)?;
            dev = dev.max((out.closed - out.bruteforce).abs());
        }
    }
    println!("multi-env vs prod cos(...):      max deviation {}", sig12(dev));
    worst = worst.max(dev);

    println!("overall maximum deviation:       {}", sig12(worst));
    if worst > ORACLE_TOL {
        return Err(CliError::Internal(format!(
            "oracle deviation {worst:e} exceeds tolerance {ORACLE_TOL:e}"
        )));
    }
    println!("all oracle suites within {ORACLE_TOL:e}");
    Ok(())
}

// ---------------------------------------------------------------------------
// shared plumbing

/// 12 significant digits, '.' decimal separator.
fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

fn parse_bindings(pairs: &[String]) -> Result<Binding, CliError> {
    let mut binding = Binding::new();
    for pair in pairs {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| input_err(format!("binding {pair:?} is not of the form sym=value")))?;
        let (value, unit) = split_unit(value.trim());
        let raw: f64 = value
            .parse()
            .map_err(|e| input_err(format!("binding {pair:?}: {e}")))?;
        let converted = convert_unit(raw, unit)
            .ok_or_else(|| input_err(format!("binding {pair:?}: unknown unit {unit:?}")))?;
        binding.insert(name.trim().to_string(), converted);
    }
    Ok(binding)
}

/// start:stop:step with one optional unit suffix shared by the components.
fn parse_grid(spec: &str) -> Result<GridSpec, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(input_err(format!(
            "grid {spec:?} is not of the form start:stop:step"
        )));
    }
    let mut values = [0.0f64; 3];
    let mut shared_unit: Option<&str> = None;
    let mut raw = [(0.0f64, ""); 3];
    for (i, part) in parts.iter().enumerate() {
        let (num, unit) = split_unit(part.trim());
        let value: f64 = num
            .parse()
            .map_err(|e| input_err(format!("grid component {part:?}: {e}")))?;
        if !unit.is_empty() {
            match shared_unit {
                None => shared_unit = Some(unit),
                Some(u) if u == unit => {}
                Some(u) => {
                    return Err(input_err(format!(
                        "grid {spec:?} mixes units {u:?} and {unit:?}"
                    )))
                }
            }
        }
        raw[i] = (value, unit);
    }
    for (i, (value, unit)) in raw.iter().enumerate() {
        let unit = if unit.is_empty() {
            shared_unit.unwrap_or("")
        } else {
            unit
        };
        values[i] = convert_unit(*value, unit)
            .ok_or_else(|| input_err(format!("grid {spec:?}: unknown unit {unit:?}")))?;
    }
    Ok(GridSpec {
        start: values[0],
        stop: values[1],
        step: values[2],
    })
}

fn split_unit(text: &str) -> (&str, &str) {
    let cut = text
        .char_indices()
        .find(|(_, c)| c.is_ascii_alphabetic())
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    (&text[..cut], &text[cut..])
}

fn convert_unit(value: f64, unit: &str) -> Option<f64> {
    match unit {
        "" => Some(value),
        "deg" => Some(value.to_radians()),
        "ms" => Some(value / 1000.0),
        "s" => Some(value),
        _ => None,
    }
}

fn emit(out: Option<&Path>, rendered: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, rendered),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

/// Write via a temp file in the same directory, then rename.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let file_name = path
        .file_name()
        .ok_or_else(|| input_err(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!("{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, contents)
        .map_err(|e| input_err(format!("failed to write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| input_err(format!("failed to rename onto {}: {e}", path.display())))?;
    Ok(())
}
