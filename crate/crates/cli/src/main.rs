//! `rcm`: command-line driver for the protocol toolkit.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 protocol
//! rejection, 4 I/O failure.

mod trace;

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use rcm_core::accounting::{account_overheads, notation};
use rcm_core::adversary::{run_attack_suite, write_summary_csv, SuiteConfig, Testbed};
use rcm_core::backend::{EquivalenceStore, SnapshotError, StoreConfig};
use rcm_core::crypto::{Bls12Dual, PairingGroup, ToyGroup};
use rcm_core::protocol::{
    GridCell, RoadCondition, RoadConditionInfo, SecurityProfile, SizingProfile, Timestamp,
    DEFAULT_DELTA_T_MS,
};
use rcm_core::sim::{
    load_scenario, run, summarize, sweep, write_csv, RunRecord, Scenario, ScenarioError,
    CONFIG_ENV, SWEEP_COUNTS,
};

use trace::{run_trace, Tamper};

#[derive(Debug)]
enum CliError {
    Config(String),
    Rejected(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Rejected(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io { .. } => Self::Io(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "rcm",
    version,
    about = "Secure road-condition monitoring toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate system parameters and print them.
    Setup(SetupArgs),
    /// Print every token of one honest run with the result of each check.
    Trace(TraceArgs),
    /// Run the street simulation and write per-run metrics as CSV.
    Simulate(SimulateArgs),
    /// Run the attack suite and write one CSV row per attack.
    Attack(AttackArgs),
    /// Write per-phase operation and byte totals as CSV.
    Overhead(OverheadArgs),
    /// Write or read cloud store snapshots.
    #[command(subcommand)]
    Store(StoreCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    #[value(name = "bls12-381")]
    Bls12_381,
    Toy,
}

impl From<Backend> for SecurityProfile {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Bls12_381 => SecurityProfile::Bls12_381,
            Backend::Toy => SecurityProfile::Toy,
        }
    }
}

/// Runs `$body` with `$g` bound to the selected group backend.
macro_rules! with_group {
    ($profile:expr, |$g:ident| $body:expr) => {
        match SecurityProfile::from($profile) {
            SecurityProfile::Bls12_381 => {
                let $g = Bls12Dual;
                $body
            }
            SecurityProfile::Toy => {
                let $g = ToyGroup::default();
                $body
            }
        }
    };
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Output {
    fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(create(p)?),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[derive(Args)]
struct SetupArgs {
    #[arg(long, value_enum, default_value = "bls12-381")]
    backend: Backend,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    tau: u32,
    #[arg(long, default_value_t = DEFAULT_DELTA_T_MS)]
    delta_t_ms: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long, value_enum, default_value = "bls12-381")]
    backend: Backend,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Flip one bit of a field in transit, e.g. `m2.Y1`.
    #[arg(long)]
    tamper: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file; defaults to the file named by RCM_CONFIG, then to
    /// built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    vehicles: Option<usize>,
    #[arg(long)]
    duration_s: Option<f64>,
    /// Run every vehicle count in `--counts` with `--seeds` seeds each.
    #[arg(long)]
    sweep: bool,
    #[arg(long, value_delimiter = ',', default_values_t = SWEEP_COUNTS)]
    counts: Vec<usize>,
    /// Seeds per sweep point, starting at the scenario seed.
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    /// Write the event log of a single run as CSV.
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, value_enum, default_value = "bls12-381")]
    backend: Backend,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Skip the per-bit tamper sweeps.
    #[arg(long)]
    no_tamper: bool,
    /// Trials for the linking game; 0 skips it.
    #[arg(long, default_value_t = 10_000)]
    unlink_trials: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    /// 128-byte elements, 20-byte digests, 4-byte timestamps.
    Nominal,
    /// Actual BLS12-381 encoding widths.
    Wire,
}

#[derive(Args)]
struct OverheadArgs {
    #[arg(long, value_enum, default_value = "nominal")]
    profile: Profile,
    /// Classes the cloud scans for the processing row.
    #[arg(long, default_value_t = 4)]
    classes: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum StoreCommand {
    /// Ingest honest reports into a fresh store and write its snapshot.
    Dump(StoreDumpArgs),
    /// Restore a snapshot and list its classes as CSV.
    Load(StoreLoadArgs),
}

#[derive(Args)]
struct StoreParams {
    #[arg(long, value_enum, default_value = "bls12-381")]
    backend: Backend,
    /// Parameter seed; must match between dump and load.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct StoreDumpArgs {
    #[command(flatten)]
    params: StoreParams,
    #[arg(long, default_value_t = 2)]
    tau: u32,
    #[arg(long, default_value_t = 12)]
    reports: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct StoreLoadArgs {
    file: PathBuf,
    #[command(flatten)]
    params: StoreParams,
    #[command(flatten)]
    output: Output,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Setup(a) => setup(a),
        Command::Trace(a) => trace_cmd(a),
        Command::Simulate(a) => simulate(a),
        Command::Attack(a) => attack(a),
        Command::Overhead(a) => overhead(a),
        Command::Store(StoreCommand::Dump(a)) => store_dump(a),
        Command::Store(StoreCommand::Load(a)) => store_load(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, msg) = match &e {
                CliError::Config(m) => ("configuration error", m),
                CliError::Rejected(m) => ("protocol rejection", m),
                CliError::Io(m) => ("i/o error", m),
            };
            eprintln!("rcm: {kind}: {msg}");
            ExitCode::from(e.code())
        }
    }
}

fn setup(a: SetupArgs) -> Result<()> {
    let lines = with_group!(a.backend, |g| {
        let tb = Testbed::new(g, a.tau, a.delta_t_ms, a.seed)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let p = &tb.params;
        vec![
            format!("group={}", p.group.group_id()),
            format!("order={}", hex::encode(p.order_be_bytes())),
            format!("generator={}", hex::encode(tb.ctx.encode(&p.generator))),
            format!("p_pub={}", hex::encode(tb.ctx.encode(&p.p_pub))),
            format!("hash_family={}", p.hash_family()),
            format!("tau={}", p.tau),
            format!("delta_t_ms={}", p.delta_t_ms),
            format!("params_sha256={}", {
                use sha2::Digest as _;
                hex::encode(sha2::Sha256::digest(p.to_bytes()))
            }),
        ]
    });
    let mut out = a.output.open()?;
    for l in lines {
        writeln!(out, "{l}")?;
    }
    Ok(())
}

fn trace_cmd(a: TraceArgs) -> Result<()> {
    let tamper = a
        .tamper
        .as_deref()
        .map(str::parse::<Tamper>)
        .transpose()
        .map_err(CliError::Config)?;
    let tr = with_group!(a.backend, |g| run_trace(g, a.seed, tamper));
    write!(a.output.open()?, "{tr}")?;
    match tr.rejection {
        Some(r) => Err(CliError::Rejected(r)),
        None => Ok(()),
    }
}

fn resolve_scenario(a: &SimulateArgs) -> Result<Scenario> {
    let path = a
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut sc = match path {
        Some(p) => load_scenario(p)?,
        None => Scenario::default(),
    };
    if let Some(b) = a.backend {
        sc.protocol.backend = b.into();
    }
    if let Some(s) = a.seed {
        sc.sim.seed = s;
    }
    if let Some(n) = a.vehicles {
        sc.vehicles.count = n;
    }
    if let Some(d) = a.duration_s {
        sc.sim.duration_s = d;
    }
    sc.validate()?;
    Ok(sc)
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let sc = resolve_scenario(&a)?;
    if a.sweep {
        if a.log.is_some() {
            return Err(CliError::Config(
                "--log applies to a single run, not --sweep".into(),
            ));
        }
        if a.seeds == 0 || a.counts.is_empty() {
            return Err(CliError::Config(
                "--sweep needs at least one count and one seed".into(),
            ));
        }
        let seeds: Vec<u64> = (0..a.seeds).map(|k| sc.sim.seed + k).collect();
        let records = sweep(&sc, &a.counts, &seeds)?;
        write_csv(&records, a.output.open()?)?;
        for p in summarize(&records) {
            eprintln!(
                "vehicles={} runs={} mean_pdr={:.4} mean_delay_ms={:.3}",
                p.vehicles, p.runs, p.mean_pdr, p.mean_delay_ms
            );
        }
        return Ok(());
    }
    let out = run(&sc)?;
    if let Some(path) = &a.log {
        out.log.write_csv(create(path)?)?;
    }
    let record = RunRecord::new(&sc, &out.metrics, out.log.digest_hex());
    write_csv(&[record], a.output.open()?)?;
    Ok(())
}

fn attack(a: AttackArgs) -> Result<()> {
    let config = SuiteConfig {
        trials: a.trials,
        seed: a.seed,
        tamper: !a.no_tamper,
        unlinkability_trials: a.unlink_trials,
    };
    let rows = with_group!(a.backend, |g| {
        let tb = Testbed::new(g, 2, DEFAULT_DELTA_T_MS, a.seed)
            .map_err(|e| CliError::Config(e.to_string()))?;
        run_attack_suite(&tb, config).map_err(|e| CliError::Config(e.to_string()))?
    });
    write_summary_csv(&rows, a.output.open()?)?;
    for r in rows.iter().filter(|r| !r.as_expected()) {
        eprintln!(
            "unexpected: {} expected {} but {} of {} trials succeeded",
            r.attack, r.expected, r.successes, r.trials
        );
    }
    Ok(())
}

fn overhead(a: OverheadArgs) -> Result<()> {
    let profile = match a.profile {
        Profile::Nominal => SizingProfile::NOMINAL,
        Profile::Wire => SizingProfile::wire(&Bls12Dual),
    };
    let report = account_overheads(profile, a.classes);
    report.write_csv(a.output.open()?)?;
    for (phase, entity, what) in report.divergences() {
        let r = report
            .record(phase, entity)
            .expect("divergence names a record");
        let (measured, reference) = match what {
            "ops" => (
                notation(&r.folded_ops()),
                r.reference.ops.map_or("-".into(), |o| notation(&o)),
            ),
            "transmitted" => (
                r.transmitted_bytes.to_string(),
                fmt_opt(r.reference.transmitted),
            ),
            "received" => (r.received_bytes.to_string(), fmt_opt(r.reference.received)),
            _ => (r.stored_bytes.to_string(), fmt_opt(r.reference.stored)),
        };
        eprintln!(
            "divergence: {}/{entity} {what}: measured {measured}, reference {reference}",
            phase.name()
        );
    }
    Ok(())
}

fn fmt_opt(v: Option<usize>) -> String {
    v.map_or_else(|| "-".into(), |b| b.to_string())
}

fn store_dump(a: StoreDumpArgs) -> Result<()> {
    if a.tau == 0 {
        return Err(CliError::Config("--tau must be positive".into()));
    }
    with_group!(a.params.backend, |g| {
        let tb = Testbed::new(g, a.tau, DEFAULT_DELTA_T_MS, a.params.seed)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let rsu = tb.rsu("store-rsu");
        let mut store = tb.store();
        let mut rng = ChaCha20Rng::seed_from_u64(a.params.seed);
        let conditions = [
            RoadCondition::Accident,
            RoadCondition::Ice,
            RoadCondition::Flood,
        ];
        for k in 0..a.reports {
            let info = RoadConditionInfo::new(conditions[k % 3], GridCell { x: 4, y: 0 });
            let v = tb.vehicle(&format!("store-veh-{k}"));
            let now = Timestamp(1_000 + 10 * k as u64);
            let run = tb
                .honest_run(&v, &rsu, &info, &mut rng, now)
                .map_err(|e| CliError::Rejected(e.to_string()))?;
            store.ingest(&tb.ctx, &tb.params, run.m4, now.plus(4));
        }
        store.dump(&tb.params.group, a.output.open()?)?;
    });
    Ok(())
}

fn store_load(a: StoreLoadArgs) -> Result<()> {
    let file =
        File::open(&a.file).map_err(|e| CliError::Io(format!("{}: {e}", a.file.display())))?;
    with_group!(a.params.backend, |g| {
        let tb = Testbed::new(g, 1, DEFAULT_DELTA_T_MS, a.params.seed)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let config = StoreConfig::from_params(&tb.params);
        let store = EquivalenceStore::load(&tb.ctx, &tb.params, config, BufReader::new(file))
            .map_err(|e| match e {
                SnapshotError::Io(e) => CliError::Io(e.to_string()),
                SnapshotError::Header(_) => CliError::Config(e.to_string()),
                SnapshotError::Record { .. } => CliError::Rejected(e.to_string()),
            })?;
        let mut w = csv::Writer::from_writer(a.output.open()?);
        w.write_record(["class", "reports", "alerted", "created_at_ms"])?;
        for c in store.classes() {
            w.write_record([
                c.id.to_string(),
                c.len().to_string(),
                c.alerted.to_string(),
                c.created_at.millis().to_string(),
            ])?;
        }
        w.flush()?;
    });
    Ok(())
}
