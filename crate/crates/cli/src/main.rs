use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hybridsim::algorithms::{
    bloch_state, build_active_reset_prepared, build_rwpe, build_teleport, teleport_fidelity, teleport_input, RwpeParams,
};
use hybridsim::bayes::{refit, RefitConfig};
use hybridsim::hir::{lower_to_native, parse, validate, HybridProgram, Profile};
use hybridsim::histogram::Histogram;
use hybridsim::sim::{
    read_jsonl, write_jsonl, ClassicalMode, ExecConfig, Executor, NoiseModel, Scalar, ShotRecord, DEFAULT_STEP_LIMIT,
};

const STEP_LIMIT_VAR: &str = "HYBRIDSIM_STEP_LIMIT";

#[derive(Parser)]
#[command(name = "hybridsim", version, about = "Simulate hybrid quantum-classical programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an IR program and write one JSON record per shot.
    Run(RunArgs),
    /// Random-walk phase estimation: records, 2*mu histogram and summary.
    Rwpe(RwpeArgs),
    /// Check a program against a profile; exit 0 iff no diagnostics.
    Validate(ProfileArgs),
    /// Rewrite a program into a profile's native gates.
    Lower(LowerArgs),
    /// Bayesian refit of recorded phase-estimation evidence.
    Refit(RefitArgs),
    /// Active qubit reset statistics.
    DemoReset(ResetArgs),
    /// Teleport a single-qubit state through mid-circuit measurements.
    DemoTeleport(TeleportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Real,
    Fixed,
}

impl From<Mode> for ClassicalMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Real => ClassicalMode::ExactReal,
            Mode::Fixed => ClassicalMode::FixedPoint,
        }
    }
}

#[derive(Args)]
struct ExecArgs {
    #[arg(long, default_value_t = 1000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Real)]
    mode: Mode,
    /// `p_gate1,p_gate2,p_readout`, or `default`. Omit for an ideal run.
    #[arg(long)]
    noise: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    program: PathBuf,
    #[command(flatten)]
    exec: ExecArgs,
    /// Entry parameter binding `name=value`; repeatable.
    #[arg(long = "input", value_name = "NAME=VALUE")]
    inputs: Vec<String>,
    /// Profile the program must satisfy before running.
    #[arg(long, default_value = "permissive")]
    profile: String,
    /// JSON-lines output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RwpeArgs {
    #[command(flatten)]
    exec: ExecArgs,
    #[arg(long, default_value_t = RwpeParams::default().mu0, allow_hyphen_values = true)]
    mu0: f64,
    #[arg(long, default_value_t = RwpeParams::default().sigma0)]
    sigma0: f64,
    #[arg(long, default_value_t = RwpeParams::default().n_iter)]
    iters: u32,
    #[arg(long, default_value_t = RwpeParams::default().refresh_period)]
    refresh: u32,
    #[arg(long, default_value_t = RwpeParams::default().oracle_coeff, allow_hyphen_values = true)]
    coeff: f64,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    /// Output prefix: writes PREFIX.jsonl, PREFIX.hist.csv and PREFIX.summary.json.
    #[arg(long, default_value = "rwpe")]
    out: PathBuf,
    /// Also write the generated program as IR text.
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    program: PathBuf,
    #[arg(long, default_value = "native")]
    profile: String,
    /// Print diagnostics as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct LowerArgs {
    program: PathBuf,
    #[arg(long, default_value = "native")]
    profile: String,
    /// Lowered IR output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RefitArgs {
    records: PathBuf,
    #[arg(long, default_value_t = 2001)]
    grid: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    hi: f64,
    /// Known eigenphase (units of pi) for error statistics.
    #[arg(long, allow_hyphen_values = true)]
    true_phi: Option<f64>,
    /// Output prefix: writes PREFIX.json and PREFIX.csv.
    #[arg(long, default_value = "refit")]
    out: PathBuf,
}

#[derive(Args)]
struct ResetArgs {
    #[command(flatten)]
    exec: ExecArgs,
    #[arg(long, default_value_t = 1)]
    qubits: u32,
    /// Qubits flipped to |1> before the reset, comma separated.
    #[arg(long, value_delimiter = ',')]
    excite: Vec<u32>,
    /// JSON-lines records.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TeleportArgs {
    #[command(flatten)]
    exec: ExecArgs,
    /// Input polar angle, radians.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    theta: f64,
    /// Input azimuth, radians.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    phi: f64,
    /// Write the control-flow graph in Graphviz format.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Also write the program as IR text.
    #[arg(long)]
    emit: Option<PathBuf>,
}

/// Exit 1 for bad input, 2 for failures while executing.
enum Failure {
    Input(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn parse_noise(text: &str) -> anyhow::Result<NoiseModel> {
    if text == "default" {
        return Ok(NoiseModel::default());
    }
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad probability `{p}`")))
        .collect::<anyhow::Result<_>>()?;
    let [p1, p2, pr] = parts[..] else { bail!("--noise expects p_gate1,p_gate2,p_readout") };
    Ok(NoiseModel::new(p1, p2, pr)?)
}

fn step_limit() -> anyhow::Result<u64> {
    match std::env::var(STEP_LIMIT_VAR) {
        Ok(v) => v.trim().parse().with_context(|| format!("{STEP_LIMIT_VAR}={v} is not a step count")),
        Err(_) => Ok(DEFAULT_STEP_LIMIT),
    }
}

fn exec_config(args: &ExecArgs) -> anyhow::Result<ExecConfig> {
    let mut cfg = ExecConfig::new(args.mode.into(), args.seed, args.shots);
    cfg.step_limit = step_limit()?;
    if let Some(text) = &args.noise {
        cfg.noise = Some(parse_noise(text)?);
    }
    Ok(cfg)
}

fn read_program(path: &Path) -> anyhow::Result<HybridProgram> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn profile(name: &str) -> anyhow::Result<Profile> {
    Profile::by_name(name).ok_or_else(|| anyhow!("unknown profile `{name}` (expected native or permissive)"))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_records(out: Option<&Path>, records: &[ShotRecord]) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_jsonl(io::BufWriter::new(file), records)?;
        }
        None => write_jsonl(io::stdout().lock(), records)?,
    }
    Ok(())
}

fn print_json(value: &impl Serialize) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run_shots(program: &HybridProgram, cfg: &ExecConfig) -> Result<Vec<ShotRecord>, Failure> {
    Executor::new(program, cfg).and_then(|e| e.run_shots()).map_err(runtime)
}

fn cmd_run(args: RunArgs) -> CmdResult {
    let program = read_program(&args.program)?;
    let diagnostics = validate(&program, &profile(&args.profile)?);
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("{d}");
        }
        return Err(Failure::Input(anyhow!("{} diagnostics against profile `{}`", diagnostics.len(), args.profile)));
    }
    let mut cfg = exec_config(&args.exec)?;
    for binding in &args.inputs {
        let (name, value) =
            binding.split_once('=').ok_or_else(|| anyhow!("--input expects NAME=VALUE, got `{binding}`"))?;
        let value: f64 = value.parse().with_context(|| format!("bad value for input `{name}`"))?;
        cfg.inputs.insert(name.to_string(), value);
    }
    let records = run_shots(&program, &cfg)?;
    write_records(args.out.as_deref(), &records)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct RwpeSummary {
    shots: u64,
    bins: usize,
    interval: (f64, f64),
    mode_bin_center: f64,
    peak_height: u64,
    overflow: u64,
}

fn cmd_rwpe(args: RwpeArgs) -> CmdResult {
    let params = RwpeParams {
        mu0: args.mu0,
        sigma0: args.sigma0,
        n_iter: args.iters,
        refresh_period: args.refresh,
        oracle_coeff: args.coeff,
    };
    let program = build_rwpe(&params).map_err(anyhow::Error::from)?;
    if let Some(path) = &args.emit {
        write_file(path, program.emit().as_bytes())?;
    }
    let cfg = exec_config(&args.exec)?;
    let records = run_shots(&program, &cfg)?;
    let estimates = records.iter().map(|r| 2.0 * r.output("mu").map(|m| m.as_f64()).unwrap_or(f64::NAN));
    let hist = Histogram::from_values(estimates, args.bins, -2.0, 2.0).map_err(anyhow::Error::from)?;
    let summary = RwpeSummary {
        shots: args.exec.shots,
        bins: args.bins,
        interval: (hist.lo, hist.hi),
        mode_bin_center: hist.mode_bin_center(),
        peak_height: hist.peak_height(),
        overflow: hist.overflow,
    };
    write_records(Some(&with_suffix(&args.out, ".jsonl")), &records)?;
    write_file(&with_suffix(&args.out, ".hist.csv"), hist.to_csv().as_bytes())?;
    write_file(
        &with_suffix(&args.out, ".summary.json"),
        &serde_json::to_vec_pretty(&summary).map_err(anyhow::Error::from)?,
    )?;
    print_json(&summary)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: ProfileArgs) -> CmdResult {
    let program = read_program(&args.program)?;
    let diagnostics = validate(&program, &profile(&args.profile)?);
    if args.json {
        print_json(&diagnostics)?;
    } else {
        for d in &diagnostics {
            println!("{d}");
        }
    }
    Ok(if diagnostics.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_lower(args: LowerArgs) -> CmdResult {
    let program = read_program(&args.program)?;
    let lowered = lower_to_native(&program, &profile(&args.profile)?).map_err(anyhow::Error::from)?;
    match &args.out {
        Some(path) => write_file(path, lowered.emit().as_bytes())?,
        None => print!("{}", lowered.emit()),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_refit(args: RefitArgs) -> CmdResult {
    let file = fs::File::open(&args.records).with_context(|| format!("opening {}", args.records.display()))?;
    let records = read_jsonl(BufReader::new(file)).with_context(|| format!("reading {}", args.records.display()))?;
    if records.is_empty() {
        return Err(Failure::Input(anyhow!("{} holds no shot records", args.records.display())));
    }
    let config = RefitConfig { grid_size: args.grid, interval: (args.lo, args.hi), true_phi: args.true_phi };
    let summary = refit(&records, &config).map_err(anyhow::Error::from)?;
    write_file(&with_suffix(&args.out, ".json"), &serde_json::to_vec_pretty(&summary).map_err(anyhow::Error::from)?)?;
    write_file(&with_suffix(&args.out, ".csv"), summary.to_csv().as_bytes())?;
    print_json(&serde_json::json!({
        "shots": summary.shots.len(),
        "pooled": summary.pooled,
        "mean_refit": summary.mean_refit,
        "mean_raw": summary.mean_raw,
        "mse_refit": summary.mse_refit,
        "mse_raw": summary.mse_raw,
        "mse_pooled": summary.mse_pooled,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_demo_reset(args: ResetArgs) -> CmdResult {
    let program = build_active_reset_prepared(args.qubits, &args.excite).map_err(anyhow::Error::from)?;
    let cfg = exec_config(&args.exec)?;
    let records = run_shots(&program, &cfg)?;
    let n = records.len() as f64;
    let successes = records.iter().filter(|r| r.output("success") == Some(Scalar::Bit(true))).count();
    let measurements: f64 = records.iter().filter_map(|r| r.output("num_measurements")).map(|m| m.as_f64()).sum();
    if let Some(path) = &args.out {
        write_records(Some(path), &records)?;
    }
    print_json(&serde_json::json!({
        "shots": records.len(),
        "success_rate": successes as f64 / n,
        "mean_measurements": measurements / n,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_demo_teleport(args: TeleportArgs) -> CmdResult {
    let program = build_teleport();
    if let Some(path) = &args.dot {
        write_file(path, program.cfg().to_dot().as_bytes())?;
    }
    if let Some(path) = &args.emit {
        write_file(path, program.emit().as_bytes())?;
    }
    let cfg = exec_config(&args.exec)?;
    let psi = bloch_state(args.theta, args.phi);
    let executor = Executor::new(&program, &cfg).map_err(runtime)?;
    let mut fidelity = 0.0;
    let mut branches = [0u64; 4];
    for shot in 0..cfg.shots {
        let (record, state) = executor.run_shot_from(shot, teleport_input(psi)).map_err(runtime)?;
        fidelity += teleport_fidelity(&state, psi);
        let bit = |name| (record.output(name) == Some(Scalar::Bit(true))) as usize;
        branches[2 * bit("m0") + bit("m1")] += 1;
    }
    print_json(&serde_json::json!({
        "shots": cfg.shots,
        "mean_fidelity": fidelity / cfg.shots as f64,
        "branches": { "00": branches[0], "01": branches[1], "10": branches[2], "11": branches[3] },
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Rwpe(a) => cmd_rwpe(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Lower(a) => cmd_lower(a),
        Command::Refit(a) => cmd_refit(a),
        Command::DemoReset(a) => cmd_demo_reset(a),
        Command::DemoTeleport(a) => cmd_demo_teleport(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("runtime error: {e:#}");
            ExitCode::from(2)
        }
    }
}
