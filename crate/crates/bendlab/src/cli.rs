//! The `bendlab` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use bendlab_core::evalstats::{label_counts, SplitSpec};

use crate::dump::write_dump;
use crate::modelfile::Preset;
use crate::pipeline::{self, PipelineError, Selector};
use crate::report;
use crate::tabio::Format;

#[derive(Debug, Parser)]
#[command(name = "bendlab", version, about = "Guitar bend analysis and prediction on tablature")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Files or glob patterns.
    #[arg(required = true)]
    inputs: Vec<String>,
    /// Force the tablature format instead of detecting it per file.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate tablature files, then print corpus totals.
    Ingest(InputArgs),
    /// Label and featurize tablature files into a CSV feature dump.
    Featurize {
        #[command(flatten)]
        input: InputArgs,
        /// Destination of the feature dump.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a model on a feature dump with a track-grouped train/test split.
    Train {
        /// Feature dump written by `featurize`.
        dump: PathBuf,
        /// Seed of the split and of any randomized fitting (required).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Preset::Full)]
        preset: Preset,
        #[arg(long, default_value_t = SplitSpec::DEFAULT_TEST_FRACTION)]
        test_fraction: f64,
        /// Allowed per-class proportion gap between train and test.
        #[arg(long, default_value_t = SplitSpec::DEFAULT_TOLERANCE)]
        tolerance: f64,
        /// Destination of the model file.
        #[arg(long)]
        out: PathBuf,
        /// Also write the training report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Strip bends from a tab and write it back with predicted bends.
    Annotate {
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Output format (defaults to the input's).
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the decision path of selected events (N or TRACK@EVENT).
    Explain {
        /// Feature dump (.csv) or tablature file.
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(required = true)]
        selectors: Vec<Selector>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Write label counts, fretboard heatmaps and distributions.
    Stats {
        #[command(flatten)]
        input: InputArgs,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                1
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let mut warnings = Vec::new();
    let result = dispatch(cli.command, stdout, &mut warnings);
    for w in &warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn out(stdout: &mut dyn Write, text: &str) -> pipeline::Result<()> {
    stdout.write_all(text.as_bytes()).map_err(|e| PipelineError::Other(format!("stdout: {e}")))
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, warnings: &mut Vec<String>) -> pipeline::Result<i32> {
    match cmd {
        Command::Ingest(input) => ingest(&input, stdout),
        Command::Featurize { input, out: path } => {
            let paths = pipeline::expand_inputs(&input.inputs)?;
            let files = pipeline::load_corpus(&paths, input.format)?;
            let events = pipeline::label_corpus(&files, warnings)?;
            let records = pipeline::featurize(&events);
            let mut buf = Vec::new();
            write_dump(&records, &mut buf)?;
            pipeline::write_file(&path, &buf)?;
            out(stdout, &report::label_counts_table(&label_counts(&events)))?;
            out(stdout, &format!("wrote {} to {}\n", plural(records.len(), "record"), path.display()))?;
            Ok(0)
        }
        Command::Train {
            dump,
            seed,
            preset,
            test_fraction,
            tolerance,
            out: path,
            report: report_path,
        } => {
            let seed = seed.ok_or_else(|| PipelineError::Other("train needs an explicit --seed".to_string()))?;
            let file = fs::File::open(&dump).map_err(|e| pipeline::io_error(&dump, e))?;
            let records = crate::dump::read_dump(std::io::BufReader::new(file))?;
            let spec = SplitSpec {
                test_fraction,
                imbalance_tolerance: tolerance,
                seed,
            };
            let outcome = pipeline::train(&records, preset, &spec, &mut |_| {})?;
            warnings.extend(outcome.split.warnings.iter().map(|w| w.to_string()));
            warnings.extend(outcome.smote_warnings.iter().map(|w| format!("SMOTE: {w:?}")));
            pipeline::write_file(&path, outcome.model.to_json().as_bytes())?;
            let text = pipeline::train_report_text(&outcome);
            if let Some(rp) = report_path {
                pipeline::write_file(&rp, text.as_bytes())?;
            }
            out(stdout, &text)?;
            Ok(0)
        }
        Command::Annotate {
            input,
            model,
            format,
            out: path,
        } => {
            let model = pipeline::load_model(&model)?;
            let (in_format, score) = pipeline::load_score(&input, None)?;
            pipeline::check_score(&input, &score)?;
            let annotated = pipeline::annotate(&score, &model.model)?;
            if annotated.stripped > 0 {
                warnings.push(format!(
                    "{}: removed {} existing bend annotation(s) before prediction",
                    input.display(),
                    annotated.stripped
                ));
            }
            let text = pipeline::render_annotated(&annotated.score, format.unwrap_or(in_format))?;
            pipeline::write_file(&path, text.as_bytes())?;
            out(stdout, "predicted labels\n")?;
            out(stdout, &report::label_counts_table(&annotated.predicted))?;
            Ok(0)
        }
        Command::Explain {
            input,
            model,
            selectors,
            format,
        } => {
            let model = pipeline::load_model(&model)?;
            let tree = pipeline::explain_tree(&model.model)?;
            let records = pipeline::load_records(&input, format, warnings)?;
            out(stdout, &pipeline::explain(&records, tree, &selectors)?)?;
            Ok(0)
        }
        Command::Stats { input, out: dir } => {
            let paths = pipeline::expand_inputs(&input.inputs)?;
            let files = pipeline::load_corpus(&paths, input.format)?;
            let events = pipeline::label_corpus(&files, warnings)?;
            if events.is_empty() {
                warnings.push("corpus has no events; all tables are empty".to_string());
            }
            fs::create_dir_all(&dir).map_err(|e| pipeline::io_error(&dir, e))?;
            for (name, contents) in pipeline::stats_bundle(&events) {
                pipeline::write_file(&dir.join(&name), contents.as_bytes())?;
            }
            out(stdout, &report::label_counts_table(&label_counts(&events)))?;
            out(stdout, &format!("wrote statistics to {}\n", dir.display()))?;
            Ok(0)
        }
    }
}

/// Per-file results, then totals. Every file is examined; the exit code is
/// 2 if any file failed to parse, else 3 if any failed validation.
fn ingest(input: &InputArgs, stdout: &mut dyn Write) -> pipeline::Result<i32> {
    let paths = pipeline::expand_inputs(&input.inputs)?;
    let (mut tracks, mut events, mut measures) = (0, 0, 0);
    let mut code = 0;
    for path in &paths {
        let line = match pipeline::load_score(path, input.format) {
            Err(e) => {
                if !matches!(e, PipelineError::Parse { .. }) {
                    return Err(e);
                }
                code = 2;
                format!("{}: parse error: {}\n", path.display(), parse_detail(&e))
            }
            Ok((_, score)) => {
                let t = score.tracks.len();
                let e: usize = score.tracks.iter().map(|t| t.events.len()).sum();
                let m: usize = score.tracks.iter().map(|t| t.measures.len()).sum();
                match pipeline::check_score(path, &score) {
                    Ok(()) => {
                        tracks += t;
                        events += e;
                        measures += m;
                        format!("{}: ok, {}, {}, {}\n", path.display(), plural(t, "track"), plural(e, "event"), plural(m, "measure"))
                    }
                    Err(PipelineError::Validation { violations, .. }) => {
                        if code != 2 {
                            code = 3;
                        }
                        let mut s = format!("{}: {} validation error(s)\n", path.display(), violations.len());
                        for v in violations {
                            s.push_str(&format!("  {v}\n"));
                        }
                        s
                    }
                    Err(other) => return Err(other),
                }
            }
        };
        out(stdout, &line)?;
    }
    out(
        stdout,
        &format!(
            "total: {}, {}, {}, {}\n",
            plural(paths.len(), "file"),
            plural(tracks, "track"),
            plural(events, "event"),
            plural(measures, "measure")
        ),
    )?;
    Ok(code)
}

fn parse_detail(e: &PipelineError) -> String {
    match e {
        PipelineError::Parse { error, .. } => error.to_string(),
        other => other.to_string(),
    }
}
