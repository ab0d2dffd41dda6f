//! Command-line entry point.
//!
//! Exit codes: 0 on success, 1 for usage or validation errors, 2 for I/O errors.
//! Each subcommand prints one summary line on stdout (`report` prints its table);
//! diagnostics go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use crate::dataio::{self, DataIoError};
use crate::filter::{self, ConsensusConfig, FilterError};
use crate::probe::{self, ProbeError, TrainConfig};
use crate::score::{self, ScoreError};
use crate::stub::StubExtractor;
use crate::synth::{self, AxisChoice, Manifest, RenderParams, SpecParams, SynthError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Data(#[from] DataIoError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let io = match self {
            CliError::Usage(_) => false,
            CliError::Synth(e) => e.is_io(),
            CliError::Data(e) => e.is_io(),
            CliError::Probe(e) => e.is_io(),
            CliError::Score(e) => e.is_io(),
            CliError::Filter(e) => e.is_io(),
            CliError::Io { .. } => true,
        };
        if io {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hpuzzle",
    version,
    about = "Puzzle-distortion probing of frozen image encoders"
)]
struct Cli {
    /// Seed for every random choice made by the subcommand.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for synthesis (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Suppress diagnostics on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// TOML file of default flag values; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    Both,
    Horizontal,
    Vertical,
}

impl From<AxisArg> for AxisChoice {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Both => AxisChoice::Both,
            AxisArg::Horizontal => AxisChoice::Horizontal,
            AxisArg::Vertical => AxisChoice::Vertical,
        }
    }
}

fn parse_resolution(s: &str) -> Result<(u32, u32), String> {
    let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("{v:?}: {e}"));
    let (w, h) = match s.split_once(['x', 'X']) {
        Some((w, h)) => (parse(w)?, parse(h)?),
        None => {
            let n = parse(s)?;
            (n, n)
        }
    };
    if w == 0 || h == 0 {
        return Err("resolution must be non-zero".into());
    }
    Ok((w, h))
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render paired normal/distorted composites and a manifest.
    Synth {
        #[arg(long)]
        figures: PathBuf,
        #[arg(long)]
        backgrounds: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Distorted specs per figure; each is paired with every background.
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        max_cuts: u32,
        #[arg(long, default_value_t = 32)]
        min_segment: u32,
        #[arg(long, value_enum, default_value = "both")]
        axis: AxisArg,
        /// WIDTHxHEIGHT or a single side length.
        #[arg(long, value_parser = parse_resolution, default_value = "512")]
        resolution: (u32, u32),
        #[arg(long)]
        no_reflect: bool,
        #[arg(long)]
        no_permute: bool,
    },
    /// Embed a manifest's images with the built-in random-projection stub encoder.
    ExtractStub {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        dim: usize,
        #[arg(long, default_value_t = 16)]
        grid: u32,
    },
    /// Train a linear probe on an embedding file.
    Train {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        #[arg(long, default_value_t = 200)]
        epochs: u32,
        #[arg(long, default_value_t = 64)]
        batch: usize,
        #[arg(long, default_value_t = 1e-4)]
        l2: f64,
        /// Fraction of each class used for training; the rest goes to --test-out.
        #[arg(long, default_value_t = 0.8, conflicts_with = "no_split")]
        split: f64,
        /// Train on every record.
        #[arg(long)]
        no_split: bool,
        /// Where the held-out split is written (default: MODEL.test.hpemb).
        #[arg(long, conflicts_with = "no_split")]
        test_out: Option<PathBuf>,
        /// Cross-check ids and labels against a synthesis manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Predict every record of an embedding file.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, required_unless_present = "stub_extractor")]
        embeddings: Option<PathBuf>,
        /// Embed --manifest images with the stub encoder instead of reading --embeddings.
        #[arg(long, requires = "manifest", conflicts_with = "embeddings")]
        stub_extractor: bool,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Thumbnail side for --stub-extractor; the projection width comes from the model.
        #[arg(long, default_value_t = 16)]
        grid: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Entropy, accuracy and equivariance score of a predictions file.
    Score {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, default_value = "model")]
        model_tag: String,
        #[arg(long, default_value = "-")]
        pretrain_tag: String,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Select samples misclassified by at least THRESHOLD of the given probes.
    Filter {
        #[arg(long, num_args = 1.., required = true)]
        predictions: Vec<PathBuf>,
        #[arg(long, default_value_t = 2)]
        threshold: usize,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge score reports into one table.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        reports: Vec<PathBuf>,
        /// Order rows by equivariance score, highest first.
        #[arg(long)]
        sort: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn toml_to_args(flag: &str, value: &toml::Value) -> Result<Vec<String>, CliError> {
    let scalar = |v: &toml::Value| -> Result<String, CliError> {
        Ok(match v {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            other => return Err(CliError::Usage(format!("config key {flag}: unsupported value {other}"))),
        })
    };
    Ok(match value {
        toml::Value::Boolean(true) => vec![format!("--{flag}")],
        toml::Value::Boolean(false) => vec![],
        toml::Value::Array(items) => {
            let mut out = vec![format!("--{flag}")];
            for item in items {
                out.push(scalar(item)?);
            }
            out
        }
        v => vec![format!("--{flag}"), scalar(v)?],
    })
}

/// Insert flags from the config file that the command line does not already set.
/// Top-level keys apply to any subcommand accepting them; a `[name]` table applies
/// to that subcommand only.
fn apply_config(args: Vec<String>, config: &Path, subcommand: &str) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(config).map_err(io_err(config))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("{}: {e}", config.display())))?;
    let cmd = Cli::command();
    let sub = cmd
        .find_subcommand(subcommand)
        .ok_or_else(|| CliError::Usage(format!("unknown subcommand {subcommand}")))?;
    let known: Vec<String> = sub
        .get_arguments()
        .chain(cmd.get_arguments())
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    let present = |flag: &str| {
        args.iter()
            .any(|a| a == &format!("--{flag}") || a.starts_with(&format!("--{flag}=")))
    };

    let mut entries: Vec<(String, toml::Value)> = Vec::new();
    for (key, value) in &table {
        match value {
            toml::Value::Table(t) if key == subcommand => {
                entries.extend(t.iter().map(|(k, v)| (k.clone(), v.clone())));
            }
            toml::Value::Table(_) => {}
            v => entries.push((key.clone(), v.clone())),
        }
    }
    let mut extra = Vec::new();
    for (key, value) in entries {
        let flag = key.replace('_', "-");
        if flag == "config" || !known.contains(&flag) || present(&flag) {
            continue;
        }
        extra.extend(toml_to_args(&flag, &value)?);
    }
    let pos = args.iter().position(|a| a == subcommand).map_or(args.len(), |p| p + 1);
    let mut out = args;
    out.splice(pos..pos, extra);
    Ok(out)
}

struct Ctx<'a> {
    seed: u64,
    threads: usize,
    quiet: bool,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn warn(&mut self, msg: &str) {
        if !self.quiet {
            let _ = writeln!(self.err, "warning: {msg}");
        }
    }
}

fn default_test_out(model: &Path) -> PathBuf {
    let mut name = model.file_name().map(OsString::from).unwrap_or_default();
    name.push(".test.hpemb");
    model.with_file_name(name)
}

fn execute(command: Command, ctx: &mut Ctx<'_>, out: &mut dyn Write) -> Result<String, CliError> {
    match command {
        Command::Synth {
            figures,
            backgrounds,
            out: out_dir,
            count,
            max_cuts,
            min_segment,
            axis,
            resolution,
            no_reflect,
            no_permute,
        } => {
            if count == 0 {
                return Err(CliError::Usage("--count must be at least 1".into()));
            }
            let figs = synth::load_figures(&figures)?;
            let bgs = synth::load_backgrounds(&backgrounds)?;
            let params = RenderParams {
                resolution,
                specs_per_figure: count,
                spec_params: SpecParams {
                    max_cuts,
                    min_segment_px: min_segment,
                    allow_reflect: !no_reflect,
                    allow_permute: !no_permute,
                    axes: axis.into(),
                },
                threads: ctx.threads,
                ..RenderParams::default()
            };
            std::fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
            let m = synth::render_dataset(&figs, &bgs, &params, ctx.seed, &out_dir)?;
            let normal = m.records.iter().filter(|r| r.label).count();
            Ok(format!(
                "synth samples={} normal={} distorted={} manifest={}",
                m.records.len(),
                normal,
                m.records.len() - normal,
                out_dir.join("manifest.jsonl").display()
            ))
        }
        Command::ExtractStub {
            manifest,
            out: path,
            dim,
            grid,
        } => {
            if dim == 0 || grid == 0 {
                return Err(CliError::Usage("--dim and --grid must be positive".into()));
            }
            let m = Manifest::read(&manifest)?;
            let set = StubExtractor::new(dim, grid, ctx.seed).extract(&m, &manifest)?;
            dataio::write_embeddings(&set, &path)?;
            Ok(format!(
                "extract-stub records={} dim={} out={}",
                set.records.len(),
                dim,
                path.display()
            ))
        }
        Command::Train {
            embeddings,
            out: model_path,
            lr,
            epochs,
            batch,
            l2,
            split,
            no_split,
            test_out,
            manifest,
        } => {
            let set = dataio::read_embeddings(&embeddings)?;
            if let Some(mpath) = manifest {
                let m = Manifest::read(&mpath)?;
                for w in dataio::cross_check(&set, &m)? {
                    ctx.warn(&w);
                }
            }
            let cfg = TrainConfig {
                learning_rate: lr,
                epochs,
                batch_size: batch,
                l2,
                seed: ctx.seed,
            };
            let (train_set, held_out) = if no_split {
                (set, None)
            } else {
                let (tr, te) = dataio::split(&set, split, ctx.seed)?;
                let path = test_out.unwrap_or_else(|| default_test_out(&model_path));
                dataio::write_embeddings(&te, &path)?;
                (tr, Some((te.records.len(), path)))
            };
            let model = probe::train(&train_set, &cfg)?;
            probe::write_model(&model, &model_path)?;
            let train_acc = probe::evaluate(&model, &train_set)?.accuracy;
            let mut line = format!(
                "train samples={} train_accuracy={:.4} model={}",
                train_set.records.len(),
                train_acc,
                model_path.display()
            );
            if let Some((n, path)) = held_out {
                line.push_str(&format!(" test_samples={n} test_out={}", path.display()));
            }
            Ok(line)
        }
        Command::Eval {
            model,
            embeddings,
            stub_extractor,
            manifest,
            grid,
            out: path,
        } => {
            let model = probe::read_model(&model)?;
            let set = match (embeddings, manifest) {
                (Some(e), _) if !stub_extractor => dataio::read_embeddings(&e)?,
                (_, Some(mpath)) => {
                    if grid == 0 {
                        return Err(CliError::Usage("--grid must be positive".into()));
                    }
                    let m = Manifest::read(&mpath)?;
                    StubExtractor::new(model.dim, grid, ctx.seed).extract(&m, &mpath)?
                }
                _ => {
                    return Err(CliError::Usage(
                        "eval needs --embeddings or --stub-extractor --manifest".into(),
                    ))
                }
            };
            if set.model_tag != model.model_tag || set.feature_source != model.feature_source {
                ctx.warn(&format!(
                    "model was trained on {}/{} but embeddings are {}/{}",
                    model.model_tag, model.feature_source, set.model_tag, set.feature_source
                ));
            }
            let ev = probe::evaluate(&model, &set)?;
            probe::write_predictions(&ev.predictions, &path)?;
            Ok(format!(
                "eval samples={} accuracy={:.4} predictions={}",
                ev.predictions.len(),
                ev.accuracy,
                path.display()
            ))
        }
        Command::Score {
            predictions,
            model_tag,
            pretrain_tag,
            json,
        } => {
            let preds = probe::read_predictions(&predictions)?;
            let mut rep = score::report(&preds, &model_tag, &pretrain_tag)?;
            rep.source = Some(predictions.display().to_string());
            if let Some(path) = &json {
                score::write_report(&rep, path)?;
            }
            Ok(format!(
                "score model={} n={} mean_entropy={} accuracy={} equivariance_score={}",
                rep.model_tag,
                preds.len(),
                score::format_entropy(rep.mean_entropy),
                score::format_accuracy(rep.accuracy),
                score::format_score(rep.equivariance_score)
            ))
        }
        Command::Filter {
            predictions,
            threshold,
            manifest,
            out: out_dir,
        } => {
            let panels = predictions
                .iter()
                .map(|p| probe::read_predictions(p))
                .collect::<Result<Vec<_>, _>>()?;
            let cfg = ConsensusConfig {
                threshold,
                panel_size: panels.len(),
            };
            let result = filter::consensus_filter(&panels, cfg)?;
            let m = Manifest::read(&manifest)?;
            std::fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
            let rows = filter::review_export(&result, &m, &manifest, &out_dir)?;
            Ok(format!(
                "filter panels={} threshold={} samples={} selected={} review={}",
                panels.len(),
                threshold,
                result.table.len(),
                rows,
                out_dir.join("review.csv").display()
            ))
        }
        Command::Report {
            reports,
            sort,
            out: path,
        } => {
            let mut reps = reports
                .iter()
                .map(|p| score::read_report(p))
                .collect::<Result<Vec<_>, _>>()?;
            if sort {
                score::sort_by_score(&mut reps);
            }
            let table = score::render_table(&reps);
            if let Some(path) = &path {
                std::fs::write(path, &table).map_err(io_err(path))?;
            }
            out.write_all(table.as_bytes()).map_err(io_err(Path::new("<stdout>")))?;
            Ok(String::new())
        }
    }
}

fn parse(args: &[String]) -> Result<Cli, clap::Error> {
    Cli::try_parse_from(args)
}

/// Run the CLI on `args` (including the program name), writing to the given streams.
pub fn run_with(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let first = match parse(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let cli = match &first.config {
        None => first,
        Some(path) => {
            let sub = Cli::command()
                .get_subcommands()
                .map(|c| c.get_name().to_string())
                .find(|n| args.iter().any(|a| a == n))
                .unwrap_or_default();
            let merged = match apply_config(args.clone(), path, &sub) {
                Ok(a) => a,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return e.exit_code();
                }
            };
            match parse(&merged) {
                Ok(cli) => cli,
                Err(e) => {
                    let _ = write!(err, "{}", e.render());
                    return 1;
                }
            }
        }
    };
    let mut ctx = Ctx {
        seed: cli.seed,
        threads: cli.threads,
        quiet: cli.quiet,
        err,
    };
    match execute(cli.command, &mut ctx, out) {
        Ok(summary) => {
            if !summary.is_empty() {
                let _ = writeln!(out, "{summary}");
            }
            0
        }
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Run against the process's stdout and stderr.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args.into_iter().collect(), &mut stdout.lock(), &mut stderr.lock())
}
