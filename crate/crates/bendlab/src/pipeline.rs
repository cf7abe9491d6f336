//! File-level pipeline shared by the subcommands: input expansion, corpus
//! loading, featurization, training, annotation, explanation and statistics.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bendlab_core::bendsem::{collapse_ties_detailed, label_events, strip_bends};
use bendlab_core::evalstats::{
    dedup_trackwise, distribution, evaluate, fretboard_heatmap, label_counts, split_by_track, EvalReport,
    HeatmapFilter, LabelCounts, Quantity, Split, SplitSpec,
};
use bendlab_core::featex::extract_features;
use bendlab_core::learn::{
    decision_path, fit_forest, fit_tree, shared_prefix_len, smote_detailed, Direction, Node, SmoteParams,
    SmoteWarning,
};
use bendlab_core::model::{validate_score, Violation};
use bendlab_core::{BendAnnotation, BendKind, DecisionTree, FeatureRecord, Label, LabeledEvent, Score, Seed};

use crate::dump::DumpError;
use crate::modelfile::{registry_names, Classifier, ModelError, ModelFile, Preset};
use crate::report;
use crate::tabio::{Format, ParseError, SerializeError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("no input files")]
    NoInputs,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {error}")]
    Parse { path: String, error: ParseError },
    #[error("{0}")]
    Dump(#[from] DumpError),
    #[error("{path}: {} validation error(s); first: {}", .violations.len(), .violations[0])]
    Validation { path: String, violations: Vec<Violation> },
    #[error("{path}: {error}")]
    Labeling { path: String, error: bendlab_core::Error },
    #[error("split failed: {0}")]
    Split(bendlab_core::Error),
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Selection(String),
    #[error("{0}")]
    Serialize(#[from] SerializeError),
    #[error("{0}")]
    Other(String),
}

impl PipelineError {
    /// Process exit code: 2 parse, 3 validation, 4 split, 5 model mismatch,
    /// 6 selection, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::NoInputs | PipelineError::Parse { .. } | PipelineError::Dump(_) => 2,
            PipelineError::Validation { .. } | PipelineError::Labeling { .. } => 3,
            PipelineError::Split(_) => 4,
            PipelineError::Model(_) => 5,
            PipelineError::Selection(_) => 6,
            PipelineError::Io { .. } | PipelineError::Serialize(_) | PipelineError::Other(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

pub fn io_error(path: &Path, e: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

/// Expands file names and glob patterns. Matches of each pattern are sorted;
/// repeated paths keep their first position. An empty result is an error.
pub fn expand_inputs(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for pat in patterns {
        let mut matches: Vec<PathBuf> = if pat.contains(['*', '?', '[']) {
            glob::glob(pat)
                .map_err(|e| PipelineError::Other(format!("invalid pattern \"{pat}\": {e}")))?
                .filter_map(|p| p.ok())
                .filter(|p| p.is_file())
                .collect()
        } else {
            vec![PathBuf::from(pat)]
        };
        matches.sort();
        for m in matches {
            if seen.insert(m.clone()) {
                out.push(m);
            }
        }
    }
    if out.is_empty() {
        return Err(PipelineError::NoInputs);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct LoadedFile {
    pub path: PathBuf,
    /// Prefix of the track ids of this file.
    pub name: String,
    pub format: Format,
    pub score: Score,
}

impl LoadedFile {
    pub fn track_id(&self, track_index: usize) -> String {
        format!("{}#{}", self.name, track_index)
    }
}

/// Reads and parses one file (format from `forced`, else detected).
pub fn load_score(path: &Path, forced: Option<Format>) -> Result<(Format, Score)> {
    let source = read_to_string(path)?;
    let format = forced.unwrap_or_else(|| Format::detect(path, &source));
    let score = format.parse(&source).map_err(|error| PipelineError::Parse {
        path: path.display().to_string(),
        error,
    })?;
    Ok((format, score))
}

pub fn check_score(path: &Path, score: &Score) -> Result<()> {
    let violations = validate_score(score);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(PipelineError::Validation {
            path: path.display().to_string(),
            violations,
        })
    }
}

/// File names become track-id prefixes; when two inputs share a file name
/// the full path is used instead.
pub fn file_names(paths: &[PathBuf]) -> Vec<String> {
    let base = |p: &PathBuf| p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
    let bases: Vec<String> = paths.iter().map(base).collect();
    bases
        .iter()
        .zip(paths)
        .map(|(b, p)| {
            if bases.iter().filter(|x| *x == b).count() > 1 {
                p.display().to_string()
            } else {
                b.clone()
            }
        })
        .collect()
}

/// Parses and validates every file, in order.
pub fn load_corpus(paths: &[PathBuf], forced: Option<Format>) -> Result<Vec<LoadedFile>> {
    let names = file_names(paths);
    paths
        .iter()
        .zip(names)
        .map(|(path, name)| {
            let (format, score) = load_score(path, forced)?;
            check_score(path, &score)?;
            Ok(LoadedFile {
                path: path.clone(),
                name,
                format,
                score,
            })
        })
        .collect()
}

/// Tie collapsing and labeling of every track, in corpus order. Tie chains
/// that had to be cut are reported as warnings.
pub fn label_corpus(files: &[LoadedFile], warnings: &mut Vec<String>) -> Result<Vec<LabeledEvent>> {
    let mut out = Vec::new();
    for f in files {
        for (ti, track) in f.score.tracks.iter().enumerate() {
            let id = f.track_id(ti);
            let collapsed = collapse_ties_detailed(track);
            for w in &collapsed.warnings {
                warnings.push(format!("{id}: event {}: {}", w.event + 1, w.reason));
            }
            let events = label_events(&collapsed.track, &id).map_err(|error| PipelineError::Labeling {
                path: f.path.display().to_string(),
                error,
            })?;
            out.extend(events);
        }
    }
    Ok(out)
}

pub fn featurize(events: &[LabeledEvent]) -> Vec<FeatureRecord> {
    extract_features(events)
}

pub struct TrainOutcome {
    pub model: ModelFile,
    pub input_records: usize,
    pub dedup_records: usize,
    pub split: Split,
    /// Records passed to fitting (training side, plus synthetic ones).
    pub fitted_records: usize,
    pub smote_warnings: Vec<SmoteWarning>,
    pub train_report: EvalReport,
    pub test_report: EvalReport,
    pub importance: Vec<(String, f64)>,
}

/// Dedup, track-grouped split and preset-selected fitting. `audit` sees every
/// record handed to the fitting routine, before any prediction is made.
pub fn train(
    records: &[FeatureRecord],
    preset: Preset,
    spec: &SplitSpec,
    audit: &mut dyn FnMut(&FeatureRecord),
) -> Result<TrainOutcome> {
    spec.validate().map_err(|e| PipelineError::Other(e.to_string()))?;
    let deduped = dedup_trackwise(records);
    let split = split_by_track(&deduped, spec).map_err(|e| match e {
        bendlab_core::Error::TooFewTracks(_) => PipelineError::Split(e),
        other => PipelineError::Other(format!("split failed: {other}")),
    })?;
    let seed: Seed = spec.seed;
    let params = preset.tree_params();
    let mut smote_warnings = Vec::new();
    let fitting: Vec<FeatureRecord> = match preset {
        Preset::Smote => {
            let sp = SmoteParams::for_dims(registry_names().len(), Preset::SMOTE_K, Preset::SMOTE_RATIO);
            let out = smote_detailed(&split.train, &sp, seed).map_err(|e| PipelineError::Other(format!("SMOTE: {e}")))?;
            smote_warnings = out.warnings;
            out.records
        }
        _ => split.train.clone(),
    };
    for r in &fitting {
        audit(r);
    }
    let fit_err = |e: bendlab_core::Error| PipelineError::Other(format!("fitting failed: {e}"));
    let classifier = match preset {
        Preset::Forest => Classifier::Forest(fit_forest(&fitting, &params, Preset::FOREST_TREES, seed).map_err(fit_err)?),
        _ => Classifier::Tree(fit_tree(&fitting, &params).map_err(fit_err)?),
    };
    let train_report = score_records(&classifier, &split.train)?;
    let test_report = score_records(&classifier, &split.test)?;
    let importance = report::top_importances(&registry_names(), &classifier.feature_importance(), 10);
    Ok(TrainOutcome {
        model: ModelFile::new(preset, seed, classifier),
        input_records: records.len(),
        dedup_records: deduped.len(),
        fitted_records: fitting.len(),
        split,
        smote_warnings,
        train_report,
        test_report,
        importance,
    })
}

pub fn predict_all(model: &Classifier, records: &[FeatureRecord]) -> Result<Vec<Label>> {
    records
        .iter()
        .map(|r| model.predict(&r.values))
        .collect::<bendlab_core::Result<Vec<_>>>()
        .map_err(|e| PipelineError::Other(format!("prediction failed: {e}")))
}

fn score_records(model: &Classifier, records: &[FeatureRecord]) -> Result<EvalReport> {
    let predicted = predict_all(model, records)?;
    let truth: Vec<Label> = records.iter().map(|r| r.label).collect();
    if truth.is_empty() {
        return Ok(EvalReport::from_confusion(Default::default()));
    }
    evaluate(&truth, &predicted).map_err(|e| PipelineError::Other(e.to_string()))
}

pub fn train_report_text(o: &TrainOutcome) -> String {
    let mut s = String::new();
    writeln!(s, "# training report").unwrap();
    writeln!(s, "preset\t{}", o.model.preset).unwrap();
    writeln!(s, "seed\t{}", o.model.seed).unwrap();
    writeln!(s, "records\t{}", o.input_records).unwrap();
    writeln!(s, "after dedup\t{}", o.dedup_records).unwrap();
    writeln!(s, "train records\t{}", o.split.train.len()).unwrap();
    writeln!(s, "test records\t{}", o.split.test.len()).unwrap();
    writeln!(s, "fitted records\t{}", o.fitted_records).unwrap();
    let test_tracks: Vec<&str> = o.split.test_tracks.iter().map(|t| t.as_deref().unwrap_or("-")).collect();
    writeln!(s, "test tracks\t{}", test_tracks.join(" ")).unwrap();
    writeln!(s, "class proportion gap\t{:.4}", o.split.imbalance).unwrap();
    s.push('\n');
    s.push_str(&report::eval_report_table("train", &o.train_report));
    s.push('\n');
    s.push_str(&report::eval_report_table("test", &o.test_report));
    s.push('\n');
    s.push_str("## top feature importances\n");
    s.push_str(&report::importance_table(&o.importance));
    s
}

pub struct Annotated {
    pub score: Score,
    /// Bend annotations removed from the input.
    pub stripped: usize,
    pub predicted: LabelCounts,
}

/// Strips bends, predicts a label for every labeled event and writes
/// `{up:4}` / `{held:4}` / `{rel:4}` on the lowest-numbered string of the
/// event each prediction came from. Ties in the input are kept; the bend goes
/// on the first event of the chain.
pub fn annotate(score: &Score, model: &Classifier) -> Result<Annotated> {
    let mut out = score.clone();
    let mut stripped_total = 0;
    let mut labels = Vec::new();
    for (ti, track) in score.tracks.iter().enumerate() {
        let (stripped, n) = strip_bends(track);
        stripped_total += n;
        let collapsed = collapse_ties_detailed(&stripped);
        let events = label_events(&collapsed.track, &ti.to_string()).map_err(|error| PipelineError::Labeling {
            path: format!("track {}", ti + 1),
            error,
        })?;
        let predicted = predict_all(model, &featurize(&events))?;
        let mut annotated = stripped;
        for (ev, label) in events.iter().zip(&predicted) {
            labels.push(*label);
            let kind = match label {
                Label::None => continue,
                Label::Up => BendKind::Basic,
                Label::Held => BendKind::Held,
                Label::Down => BendKind::Reverse,
            };
            let target = &mut annotated.events[collapsed.origins[ev.source_event]];
            if let Some(note) = target.notes.iter_mut().min_by_key(|n| n.string) {
                note.bend = Some(BendAnnotation::simple(kind, 4));
            }
        }
        out.tracks[ti] = annotated;
    }
    Ok(Annotated {
        score: out,
        stripped: stripped_total,
        predicted: LabelCounts::from_labels(&labels),
    })
}

pub const ANNOTATION_NOTE: &str =
    "# bends suggested by bendlab; each sits on the chord's lowest-numbered string with a fixed 4 quarter-tone amplitude\n";

/// Serialized annotation; text output carries a leading comment saying how
/// bends were placed.
pub fn render_annotated(score: &Score, format: Format) -> Result<String> {
    let body = format.serialize(score)?;
    Ok(match format {
        Format::Text => format!("{ANNOTATION_NOTE}{body}"),
        Format::Structured => body,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    /// 0-based position in the record list.
    Ordinal(usize),
    /// `TRACK@EVENT`: track id and event index.
    Event { track: String, event_index: usize },
}

impl std::str::FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("invalid selector \"{s}\" (expected N or TRACK@EVENT)");
        match s.rsplit_once('@') {
            Some((track, ev)) => Ok(Selector::Event {
                track: track.to_string(),
                event_index: ev.parse().map_err(|_| bad())?,
            }),
            None => s.parse().map(Selector::Ordinal).map_err(|_| bad()),
        }
    }
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selector::Ordinal(i) => write!(f, "{i}"),
            Selector::Event { track, event_index } => write!(f, "{track}@{event_index}"),
        }
    }
}

impl Selector {
    fn find(&self, records: &[FeatureRecord]) -> Option<usize> {
        match self {
            Selector::Ordinal(i) => (*i < records.len()).then_some(*i),
            Selector::Event { track, event_index } => records
                .iter()
                .position(|r| r.track_id.as_deref() == Some(track.as_str()) && r.event_index == *event_index),
        }
    }
}

/// Decision-path listing of the selected records; with two or more
/// selections, the shared prefix of consecutive paths is reported too.
pub fn explain(records: &[FeatureRecord], tree: &DecisionTree, selectors: &[Selector]) -> Result<String> {
    if selectors.is_empty() {
        return Err(PipelineError::Selection("no event selected".to_string()));
    }
    let mut s = String::new();
    let mut paths = Vec::new();
    for sel in selectors {
        let i = sel
            .find(records)
            .ok_or_else(|| PipelineError::Selection(format!("selector \"{sel}\" matches no event")))?;
        let r = &records[i];
        let err = |e: bendlab_core::Error| PipelineError::Other(e.to_string());
        let path = decision_path(tree, &r.values).map_err(err)?;
        let leaf = tree.leaf_index(&r.values).map_err(err)?;
        let Node::Leaf { counts, label } = &tree.nodes[leaf] else {
            unreachable!("leaf_index returns a leaf")
        };
        writeln!(
            s,
            "event {}@{} (record {i})",
            r.track_id.as_deref().unwrap_or("synthetic"),
            r.event_index
        )
        .unwrap();
        if path.is_empty() {
            s.push_str("  path: (empty)\n");
        }
        for (k, step) in path.iter().enumerate() {
            let op = match step.direction {
                Direction::Left => "<=",
                Direction::Right => ">",
            };
            writeln!(
                s,
                "  {}. {} {op} {} (value {})",
                k + 1,
                step.name,
                report::num(step.threshold),
                report::num(step.value)
            )
            .unwrap();
        }
        writeln!(s, "  predicted: {} ({})", label.symbol(), label.code()).unwrap();
        let counts: Vec<String> = Label::ALL
            .iter()
            .map(|l| format!("{}={}", l.symbol(), counts[l.index()]))
            .collect();
        writeln!(s, "  leaf counts: {}", counts.join(" ")).unwrap();
        writeln!(s, "  recorded label: {} ({})", r.label.symbol(), r.label.code()).unwrap();
        paths.push(path);
    }
    for w in paths.windows(2).enumerate() {
        let (k, pair) = w;
        writeln!(
            s,
            "shared prefix of selections {} and {}: {} of {} / {} tests",
            k + 1,
            k + 2,
            shared_prefix_len(&pair[0], &pair[1]),
            pair[0].len(),
            pair[1].len()
        )
        .unwrap();
    }
    Ok(s)
}

pub fn explain_tree(model: &Classifier) -> Result<&DecisionTree> {
    match model {
        Classifier::Tree(t) => Ok(t),
        Classifier::Forest(_) => Err(PipelineError::Other(
            "explain needs a single-tree model; forests have no single decision path".to_string(),
        )),
    }
}

/// Named output files of `stats`, in a fixed order.
pub fn stats_bundle(events: &[LabeledEvent]) -> Vec<(String, String)> {
    let mut files = vec![(
        "label_counts.tsv".to_string(),
        report::label_counts_table(&label_counts(events)),
    )];
    for (name, filter, title) in [
        ("heatmap_all", HeatmapFilter::All, "All notes"),
        ("heatmap_bent", HeatmapFilter::BentOnly, "Bent notes"),
    ] {
        let h = fretboard_heatmap(events, filter);
        files.push((format!("{name}.tsv"), report::heatmap_tsv(&h)));
        files.push((format!("{name}.svg"), report::heatmap_svg(&h, title)));
    }
    for q in Quantity::ALL {
        let h = distribution(events, q, true);
        files.push((format!("dist_{}.tsv", q.name()), report::histogram_tsv(&h)));
    }
    files
}

/// Reads either a feature dump (`.csv`) or a tablature file, returning
/// feature records.
pub fn load_records(path: &Path, forced: Option<Format>, warnings: &mut Vec<String>) -> Result<Vec<FeatureRecord>> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let file = fs::File::open(path).map_err(|e| io_error(path, e))?;
        return Ok(crate::dump::read_dump(std::io::BufReader::new(file))?);
    }
    let files = load_corpus(&[path.to_path_buf()], forced)?;
    Ok(featurize(&label_corpus(&files, warnings)?))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    Ok(ModelFile::from_json(&read_to_string(path)?)?)
}
