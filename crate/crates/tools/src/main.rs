//! The `scenarium` command line: validate, derive, predict, score, fixtures
//! and config inspection. Exit codes: 0 success, 1 domain violation or parse
//! error, 2 I/O or usage error.

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use scenarium_core::evaluation::score_understanding;
use scenarium_core::model::validate::{validate_description, ValidationReport};
use scenarium_core::physics::anticipate;
use scenarium_core::ScenarioAnticipation;
use scenarium_core::ScenarioDescription;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use scenarium_tools::config::{RunConfig, CONFIG_ENV_VAR};
use scenarium_tools::report::{validation_json, validation_text, ScoreReport};
use scenarium_tools::{dsl, fixtures, json, scene::SceneFile, trajlog};

const EXIT_DOMAIN: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "scenarium",
    about = "Derive, anticipate and score typed traffic-scenario descriptions",
    version
)]
struct Cli {
    /// Config file (TOML). Falls back to $SCENARIUM_CONFIG, then defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scenario description file (.json or .scd).
    Validate(ValidateArgs),
    /// Derive a ground-truth description from a trajectory log plus scene file.
    Derive(DeriveArgs),
    /// Predict the future of a described scenario.
    Predict(PredictArgs),
    /// Score a candidate description against ground truth.
    Score(ScoreArgs),
    /// Emit the bundled reference scenarios.
    Fixtures(FixturesArgs),
    /// Inspect the effective configuration.
    Config(ConfigArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Description file; `.scd` parses as annotation DSL, anything else as JSON.
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DeriveArgs {
    /// Trajectory log (`t,id,class,x,y,z,yaw,speed` rows).
    #[arg(long)]
    log: PathBuf,
    /// Scene file with context and element metadata (JSON).
    #[arg(long)]
    scene: PathBuf,
    /// Output description path (canonical JSON).
    #[arg(long)]
    out: PathBuf,
    /// Also serialise the description as annotation DSL to this path.
    #[arg(long)]
    dsl: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Description file (canonical JSON).
    #[arg(long)]
    desc: PathBuf,
    /// Horizon T_e in seconds; defaults from config.
    #[arg(long)]
    horizon: Option<f64>,
    /// Step in seconds; defaults from config.
    #[arg(long)]
    dt: Option<f64>,
    /// Output anticipation path (canonical JSON).
    #[arg(long)]
    out: PathBuf,
    /// Also serialise description plus anticipation as annotation DSL.
    #[arg(long)]
    dsl: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    /// Ground-truth description (canonical JSON).
    #[arg(long, required_unless_present = "dir")]
    gt: Option<PathBuf>,
    /// Ground-truth anticipation (canonical JSON).
    #[arg(long)]
    gt_anticipation: Option<PathBuf>,
    /// Candidate description (.scd annotation DSL or .json).
    #[arg(long, required_unless_present = "dir")]
    candidate: Option<PathBuf>,
    /// Candidate anticipation (JSON); `.scd` candidates carry theirs inline.
    #[arg(long)]
    candidate_anticipation: Option<PathBuf>,
    /// Batch mode: a directory of scenario subdirectories, each holding
    /// gt.json / candidate.(scd|json) and optional *_anticipation.json.
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Worker threads for batch mode (0 = one per CPU).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Where to write report files; stdout when omitted (single-pair mode).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FixturesArgs {
    /// `scenario1`, `scenario2` or `all`.
    id: String,
    /// Output directory; one subdirectory per scenario.
    #[arg(long)]
    out: PathBuf,
    /// Verify checksums of an existing fixture directory instead of writing.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct ConfigArgs {
    /// Print the effective configuration as TOML.
    #[arg(long)]
    show: bool,
}

fn load_config(flag: &Option<PathBuf>) -> anyhow::Result<RunConfig> {
    if let Some(path) = flag {
        return RunConfig::load(path);
    }
    if let Ok(path) = std::env::var(CONFIG_ENV_VAR) {
        if !path.is_empty() {
            return RunConfig::load(Path::new(&path));
        }
    }
    Ok(RunConfig::default())
}

/// Writes to stdout, treating a closed pipe as a normal end of output.
fn emit(content: &str) {
    use std::io::Write as _;
    let stdout = std::io::stdout();
    let mut handle = stdout.lock();
    if let Err(e) = handle.write_all(content.as_bytes()) {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("cannot write to stdout: {e}");
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(path: &Path, content: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("cannot create {}", parent.display()))?;
        }
    }
    std::fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
}

/// Loads a description from `.scd` (DSL) or `.json`, together with any inline
/// anticipation and file-level violations.
fn load_any_description(
    path: &Path,
) -> anyhow::Result<Result<(ScenarioDescription, Option<ScenarioAnticipation>, Vec<scenarium_core::Violation>), String>> {
    let text = read(path)?;
    if path.extension().map(|e| e == "scd").unwrap_or(false) {
        match dsl::parse_annotation_text(&text) {
            Ok(parsed) => Ok(Ok((parsed.description, parsed.anticipation, Vec::new()))),
            Err(errors) => {
                let mut msg = format!("{} parse errors in {}:\n", errors.len(), path.display());
                for e in &errors {
                    msg.push_str(&format!("  {e}\n"));
                }
                Ok(Err(msg))
            }
        }
    } else {
        let loaded = json::load_description(&text);
        match loaded.description {
            Some(desc) => Ok(Ok((desc, None, loaded.violations))),
            None => {
                let mut msg = format!("{} does not parse:\n", path.display());
                for v in &loaded.violations {
                    msg.push_str(&format!("  {} {}: {}\n", v.code, v.path, v.message));
                }
                Ok(Err(msg))
            }
        }
    }
}

fn cmd_validate(args: &ValidateArgs) -> anyhow::Result<u8> {
    let loaded = load_any_description(&args.path)?;
    let report = match loaded {
        Ok((desc, _, mut file_violations)) => {
            let report = validate_description(&desc);
            file_violations.extend(report.violations);
            ValidationReport {
                violations: file_violations,
            }
        }
        Err(msg) => {
            eprint!("{msg}");
            return Ok(EXIT_DOMAIN);
        }
    };
    let rendered = match args.format {
        Format::Text => validation_text(&report),
        Format::Json => validation_json(&report),
    };
    match &args.out {
        Some(path) => write_out(path, &rendered)?,
        None => emit(&rendered),
    }
    Ok(if report.is_empty() { 0 } else { EXIT_DOMAIN })
}

fn cmd_derive(args: &DeriveArgs, config: &RunConfig) -> anyhow::Result<u8> {
    let log_text = read(&args.log)?;
    let log = match trajlog::parse_trajectory_log(&log_text) {
        Ok(log) => log,
        Err(errors) => {
            for e in &errors {
                eprintln!("{}: {e}", args.log.display());
            }
            return Ok(EXIT_DOMAIN);
        }
    };
    let scene = SceneFile::from_json(&read(&args.scene)?)
        .with_context(|| format!("invalid scene file {}", args.scene.display()))?;
    let input = scene.derive_input(&log, config);
    let desc = match scenarium_core::describe::derive_description(&input, &config.engine) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("derive failed: {e}");
            return Ok(EXIT_DOMAIN);
        }
    };
    write_out(&args.out, &json::description_to_string(&desc))?;
    if let Some(path) = &args.dsl {
        write_out(path, &dsl::serialize(&desc))?;
    }
    Ok(0)
}

fn cmd_predict(args: &PredictArgs, config: &RunConfig) -> anyhow::Result<u8> {
    let loaded = load_any_description(&args.desc)?;
    let (desc, _, violations) = match loaded {
        Ok(parts) => parts,
        Err(msg) => {
            eprint!("{msg}");
            return Ok(EXIT_DOMAIN);
        }
    };
    let mut report = validate_description(&desc);
    report.violations.splice(0..0, violations);
    if !report.is_empty() {
        eprint!("{}", validation_text(&report));
        return Ok(EXIT_DOMAIN);
    }
    let horizon = args.horizon.unwrap_or(config.predict.horizon);
    let dt = args.dt.unwrap_or(config.predict.dt);
    let ant = match anticipate(&desc, horizon, dt, &config.engine) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("predict failed: {e}");
            return Ok(EXIT_DOMAIN);
        }
    };
    write_out(&args.out, &json::anticipation_to_string(&ant))?;
    if let Some(path) = &args.dsl {
        write_out(path, &dsl::serialize_bundle(&desc, Some(&ant), &[]))?;
    }
    Ok(0)
}

struct ScorePair {
    name: String,
    gt: PathBuf,
    gt_ant: Option<PathBuf>,
    candidate: PathBuf,
    candidate_ant: Option<PathBuf>,
}

fn score_pair(pair: &ScorePair, config: &RunConfig) -> anyhow::Result<Result<ScoreReport, String>> {
    let gt_loaded = load_any_description(&pair.gt)?;
    let (gt, _, gt_violations) = match gt_loaded {
        Ok(parts) => parts,
        Err(msg) => return Ok(Err(msg)),
    };
    if !gt_violations.is_empty() || !validate_description(&gt).is_empty() {
        return Ok(Err(format!(
            "ground truth {} does not validate",
            pair.gt.display()
        )));
    }
    let cand_loaded = load_any_description(&pair.candidate)?;
    let (cand, inline_ant, _) = match cand_loaded {
        Ok(parts) => parts,
        Err(msg) => return Ok(Err(msg)),
    };
    let gt_ant = match &pair.gt_ant {
        Some(path) => Some(
            json::load_anticipation(&read(path)?)
                .map_err(|e| anyhow::anyhow!("invalid anticipation {}: {e}", path.display()))?,
        ),
        None => None,
    };
    let cand_ant = match &pair.candidate_ant {
        Some(path) => Some(
            json::load_anticipation(&read(path)?)
                .map_err(|e| anyhow::anyhow!("invalid anticipation {}: {e}", path.display()))?,
        ),
        None => inline_ant,
    };
    let score = score_understanding(
        &gt,
        gt_ant.as_ref(),
        &cand,
        cand_ant.as_ref(),
        &config.engine,
    );
    Ok(Ok(ScoreReport {
        gt_id: gt.id.clone(),
        candidate_id: format!("{} ({})", cand.id, pair.name),
        config_hash: config.hash(),
        score,
    }))
}

fn find_candidate(dir: &Path) -> Option<PathBuf> {
    for name in ["candidate.scd", "candidate.json"] {
        let p = dir.join(name);
        if p.exists() {
            return Some(p);
        }
    }
    None
}

fn cmd_score(args: &ScoreArgs, config: &RunConfig) -> anyhow::Result<u8> {
    let mut pairs: Vec<ScorePair> = Vec::new();
    if let Some(dir) = &args.dir {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .with_context(|| format!("cannot read {}", dir.display()))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_dir())
            .collect();
        entries.sort();
        for entry in entries {
            let gt = entry.join("gt.json");
            let Some(candidate) = find_candidate(&entry) else {
                continue;
            };
            if !gt.exists() {
                continue;
            }
            let optional = |name: &str| {
                let p = entry.join(name);
                p.exists().then_some(p)
            };
            pairs.push(ScorePair {
                name: entry
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                gt,
                gt_ant: optional("gt_anticipation.json"),
                candidate,
                candidate_ant: optional("candidate_anticipation.json"),
            });
        }
        if pairs.is_empty() {
            eprintln!("no scenario pairs under {}", dir.display());
            return Ok(EXIT_USAGE);
        }
    } else {
        let candidate = args.candidate.clone().expect("clap enforces");
        let name = candidate
            .file_stem()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| String::from("pair"));
        pairs.push(ScorePair {
            name,
            gt: args.gt.clone().expect("clap enforces"),
            gt_ant: args.gt_anticipation.clone(),
            candidate,
            candidate_ant: args.candidate_anticipation.clone(),
        });
    }

    let run = |pair: &ScorePair| score_pair(pair, config);
    let results: Vec<anyhow::Result<Result<ScoreReport, String>>> = if pairs.len() > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.workers)
            .build()
            .context("thread pool")?;
        pool.install(|| pairs.par_iter().map(run).collect())
    } else {
        pairs.iter().map(run).collect()
    };

    let mut failed = false;
    let mut csv = String::from(scenarium_tools::report::CSV_HEADER);
    csv.push('\n');
    for (pair, result) in pairs.iter().zip(results) {
        match result? {
            Ok(report) => {
                let rendered = match args.format {
                    Format::Text => report.to_text(),
                    Format::Json => report.to_json(),
                };
                csv.push_str(&report.csv_rows());
                match &args.out_dir {
                    Some(dir) => {
                        let ext = if args.format == Format::Json { "json" } else { "txt" };
                        write_out(&dir.join(format!("{}.{ext}", pair.name)), &rendered)?;
                    }
                    None => emit(&rendered),
                }
            }
            Err(msg) => {
                eprint!("{msg}");
                failed = true;
            }
        }
    }
    if let Some(dir) = &args.out_dir {
        write_out(&dir.join("scores.csv"), &csv)?;
    }
    Ok(if failed { EXIT_DOMAIN } else { 0 })
}

fn cmd_fixtures(args: &FixturesArgs, config: &RunConfig) -> anyhow::Result<u8> {
    let ids: Vec<&str> = if args.id == "all" {
        fixtures::SCENARIO_IDS.to_vec()
    } else {
        vec![args.id.as_str()]
    };
    for id in ids {
        if args.check {
            match fixtures::verify_fixture_dir(&args.out.join(id)) {
                Ok(_) => println!("{id}: checksums ok"),
                Err(e) => {
                    eprintln!("{id}: {e}");
                    return Ok(EXIT_DOMAIN);
                }
            }
            continue;
        }
        match fixtures::emit_fixture(id, &args.out, config) {
            Ok(manifest) => {
                println!(
                    "{id}: {} files under {}",
                    manifest.checksums.len() + 1,
                    args.out.join(id).display()
                );
            }
            Err(fixtures::FixtureError::UnknownId(other)) => {
                eprintln!("unknown fixture id `{other}`");
                return Ok(EXIT_USAGE);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(0)
}

fn cmd_config(args: &ConfigArgs, config: &RunConfig) -> anyhow::Result<u8> {
    if args.show {
        emit(&config.to_toml());
        emit(&format!("# config hash: {}\n", config.hash()));
    } else {
        emit(&format!("config hash: {}\n", config.hash()));
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcome = match &cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Derive(args) => cmd_derive(args, &config),
        Command::Predict(args) => cmd_predict(args, &config),
        Command::Score(args) => cmd_score(args, &config),
        Command::Fixtures(args) => cmd_fixtures(args, &config),
        Command::Config(args) => cmd_config(args, &config),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
