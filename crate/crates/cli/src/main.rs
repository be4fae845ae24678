//! `fronttouch` command-line driver.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 when input data is
//! unreadable or invalid.

mod report;
mod serve;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use fronttouch::mapping::{fit_linear_map, FittedMap, MappingMode};
use fronttouch::protocol::MappingModeName;
use fronttouch::sim::calibration::{calibration_to_jsonl, generate_cohort, parse_calibration};
use fronttouch::sim::{run_study, NoiseModel, StudyConfig, UserModel};
use fronttouch::task::{latin_square, read_records, write_records, TaskKind};
use fronttouch::technique::Technique;
use fronttouch::trace::{replay, Trace};

#[derive(Parser)]
#[command(
    name = "fronttouch",
    version,
    about = "Front-touch VR selection engine and study harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a touch-to-view mapping from calibration samples (JSONL).
    Calibrate { trace: PathBuf },
    /// Run simulated participants and write their trial records and traces.
    Simulate(SimulateArgs),
    /// Re-run a recorded trace and print its trial records as CSV.
    Replay {
        trace: PathBuf,
        /// Print every server message as JSON lines instead of the CSV.
        #[arg(long)]
        messages: bool,
    },
    /// Aggregates and within-subject tests for a trial-record CSV.
    Stats { csv: PathBuf },
    /// Balanced Latin square of technique orders.
    Latinsquare {
        #[arg(long)]
        n: usize,
    },
    /// Serve live sessions over websocket.
    Serve {
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Write the trace of every session into this directory.
        #[arg(long)]
        record: Option<PathBuf>,
        /// Mapping model JSON (as written by `calibrate`).
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimTask {
    Binary,
    Menu15,
    Keyboard,
    Calibration,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    task: SimTask,
    /// Comma-separated techniques; defaults to the task's usual set.
    #[arg(long, value_delimiter = ',', value_parser = parse_technique)]
    technique: Vec<Technique>,
    #[arg(long, default_value_t = 1)]
    participants: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write records.csv and one trace per participant and technique here
    /// instead of printing the CSV.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    mapping_mode: Option<ModeArg>,
    #[arg(long)]
    correction_fraction: Option<f64>,
    /// Mapping model JSON used by every session.
    #[arg(long)]
    model: Option<PathBuf>,
    /// JSON object with optional `user` and `noise` overrides.
    #[arg(long)]
    sim_config: Option<PathBuf>,
    /// Zero every noise source.
    #[arg(long)]
    noise_free: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Absolute,
    Relative,
    Hybrid,
}

fn parse_technique(s: &str) -> std::result::Result<Technique, String> {
    s.parse::<Technique>().map_err(|e| e.to_string())
}

/// Failure classes that map to exit codes.
enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Calibrate { trace } => calibrate(&trace),
        Command::Simulate(args) => simulate(args),
        Command::Replay { trace, messages } => replay_cmd(&trace, messages),
        Command::Stats { csv } => stats(&csv),
        Command::Latinsquare { n } => {
            if n == 0 {
                return Err(Failure::Usage("--n must be at least 1".into()));
            }
            let mut out = String::new();
            for row in latin_square(n) {
                let cells: Vec<String> = row.iter().map(usize::to_string).collect();
                out.push_str(&cells.join(" "));
                out.push('\n');
            }
            emit(&out)
        }
        Command::Serve {
            port,
            host,
            record,
            model,
        } => {
            let fit = match model {
                Some(p) => read_model(&p)?,
                None => fronttouch::config::default_model(),
            };
            serve::run(&host, port, record, fit).map_err(Failure::Data)
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(s: &str) -> Result<()> {
    io::stdout()
        .lock()
        .write_all(s.as_bytes())
        .context("writing to stdout")?;
    Ok(())
}

fn read_model(path: &Path) -> Result<FittedMap> {
    let text = read(path)?;
    let m: FittedMap = serde_json::from_str(&text)
        .with_context(|| format!("{}: not a mapping model", path.display()))?;
    Ok(m)
}

fn calibrate(path: &Path) -> Result<()> {
    let text = read(path)?;
    let samples = parse_calibration(&text).with_context(|| path.display().to_string())?;
    let fit = fit_linear_map(&samples).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    let mut s = serde_json::to_string_pretty(&fit).context("serializing model")?;
    s.push('\n');
    emit(&s)
}

fn default_techniques(task: TaskKind) -> Vec<Technique> {
    match task {
        TaskKind::Binary => vec![
            Technique::SideGaze,
            Technique::FrontGaze,
            Technique::FrontWorld,
            Technique::FrontView,
        ],
        TaskKind::Menu15 | TaskKind::Keyboard => vec![
            Technique::SideGaze,
            Technique::TwoFingers,
            Technique::DragNTap,
        ],
    }
}

fn overrides(args: &SimulateArgs) -> Result<(UserModel, NoiseModel)> {
    let (mut user, mut noise) = (UserModel::default(), NoiseModel::default());
    if let Some(p) = &args.sim_config {
        let v: serde_json::Value = serde_json::from_str(&read(p)?)
            .with_context(|| format!("{}: invalid JSON", p.display()))?;
        if let Some(u) = v.get("user") {
            user = serde_json::from_value(u.clone()).context("invalid `user` overrides")?;
        }
        if let Some(n) = v.get("noise") {
            noise = serde_json::from_value(n.clone()).context("invalid `noise` overrides")?;
        }
    }
    if args.noise_free {
        noise = NoiseModel::zero();
    }
    Ok((user, noise))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let (user, noise) = overrides(&args)?;
    let task = match args.task {
        SimTask::Binary => TaskKind::Binary,
        SimTask::Menu15 => TaskKind::Menu15,
        SimTask::Keyboard => TaskKind::Keyboard,
        SimTask::Calibration => {
            if !args.technique.is_empty() || args.mapping_mode.is_some() {
                return Err(Failure::Usage(
                    "calibration takes no technique or mapping mode".into(),
                ));
            }
            noise.validate().map_err(|e| anyhow!(e))?;
            let jsonl = calibration_to_jsonl(
                &generate_cohort(args.participants, args.seed, &noise),
                args.seed,
            );
            return match &args.out_dir {
                Some(dir) => {
                    fs::create_dir_all(dir)
                        .with_context(|| format!("cannot create {}", dir.display()))?;
                    let p = dir.join("calibration.jsonl");
                    fs::write(&p, jsonl)
                        .with_context(|| format!("cannot write {}", p.display()))?;
                    Ok(())
                }
                None => emit(&jsonl),
            };
        }
    };
    let techniques = if args.technique.is_empty() {
        default_techniques(task)
    } else {
        args.technique.clone()
    };
    let mut seen = techniques.clone();
    seen.sort();
    seen.dedup();
    if seen.len() != techniques.len() {
        return Err(Failure::Usage("a technique is listed twice".into()));
    }
    let mapping_mode = match (args.mapping_mode, args.correction_fraction) {
        (None, None) => None,
        (Some(ModeArg::Hybrid), f) => Some(MappingModeName::Hybrid.resolve(f)),
        (Some(_), Some(_)) | (None, Some(_)) => {
            return Err(Failure::Usage(
                "--correction-fraction needs --mapping-mode hybrid".into(),
            ))
        }
        (Some(ModeArg::Absolute), None) => Some(MappingMode::Absolute),
        (Some(ModeArg::Relative), None) => Some(MappingMode::Relative),
    };
    if mapping_mode.is_some() && techniques.iter().all(|t| t.is_gaze()) {
        return Err(Failure::Usage(
            "gaze techniques take no mapping mode".into(),
        ));
    }
    let mut config = StudyConfig::new(task, &techniques, args.participants, args.seed);
    config.user = user;
    config.noise = noise;
    config.mapping_mode = mapping_mode;
    config.fit = match &args.model {
        Some(p) => read_model(p)?,
        None => fronttouch::config::default_model(),
    };
    let outcome = run_study(&config).map_err(|e| anyhow!(e))?;
    let records = outcome.records();
    let abandoned = outcome.abandoned();
    if abandoned > 0 {
        eprintln!("warning: {abandoned} trials abandoned by the simulated participants");
    }
    let Some(dir) = args.out_dir else {
        let mut out = io::stdout().lock();
        write_records(&mut out, &records).context("writing CSV")?;
        return Ok(());
    };
    let traces = dir.join("traces");
    fs::create_dir_all(&traces).with_context(|| format!("cannot create {}", traces.display()))?;
    for run in &outcome.runs {
        for (t, o) in run.order.iter().zip(&run.outcomes) {
            let p = traces.join(format!("p{:02}-{}.jsonl", run.participant, t));
            fs::write(&p, o.trace.to_jsonl())
                .with_context(|| format!("cannot write {}", p.display()))?;
        }
    }
    let csv = dir.join("records.csv");
    let file =
        fs::File::create(&csv).with_context(|| format!("cannot create {}", csv.display()))?;
    write_records(file, &records).context("writing CSV")?;
    eprintln!("{} records, traces in {}", records.len(), traces.display());
    Ok(())
}

fn replay_cmd(path: &Path, messages: bool) -> Result<()> {
    let text = read(path)?;
    let trace = Trace::parse(&text).with_context(|| path.display().to_string())?;
    let out = replay(&trace).with_context(|| path.display().to_string())?;
    if messages {
        let mut s = String::new();
        for m in &out.messages {
            s.push_str(&serde_json::to_string(m).context("serializing message")?);
            s.push('\n');
        }
        return emit(&s);
    }
    let mut stdout = io::stdout().lock();
    write_records(&mut stdout, &out.records).context("writing CSV")?;
    Ok(())
}

fn stats(path: &Path) -> Result<()> {
    let file = fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let records = read_records(file).with_context(|| format!("{}: invalid CSV", path.display()))?;
    let report = report::build(&records)?;
    let mut s = serde_json::to_string_pretty(&report).context("serializing report")?;
    s.push('\n');
    emit(&s)
}
