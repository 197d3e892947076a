//! The `moodfuse` command line: argument definitions and the subcommand
//! drivers. Data goes to files in `--out`; diagnostics go to stderr.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::eval::{confusion, metrics, Average, ConfusionMatrix, MetricsReport, ZeroDivision};
use crate::fusion::{
    fuse_all, selection_proportions, sweep_weights, Choice, FusionConfig, FusionPair, SelectionProportions, Strategy,
    SweepConfig, SweepPoint, TieBreak, DEFAULT_GRID_STEP,
};
use crate::ingest::{
    join_modalities, load_manifest_with, load_predictions, normalize_categorical_annotations, normalize_va_annotations,
    JoinReport, PredictionRecord, QuadrantRemap, RecordFlag, SongRecord,
};
use crate::lexicon::{
    build_mapping_table, load_lexicon, map_mirex_cluster_terms, ClusterMode, LexiconSchema, MappingTable, MoodCluster,
};
use crate::model::{LabelSpace, Modality};
use crate::report::{metrics_svg, sweep_svg};
use crate::{Diagnostic, Execution};

#[derive(Debug, Parser)]
#[command(
    name = "moodfuse",
    version,
    about = "Music sentiment: quadrant mapping, audio/text fusion and evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Map a mood-tag vocabulary onto quadrants through an affective lexicon.
    MapTags(MapTagsArgs),
    /// Derive gold quadrants for every manifest record.
    Normalize(NormalizeArgs),
    /// Per-class precision, recall and F-score of one or two prediction files.
    Evaluate(EvaluateArgs),
    /// Fuse audio and text predictions with one strategy and evaluate.
    Fuse(FuseArgs),
    /// Score weighted fusion over a grid of audio weights.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct MapTagsArgs {
    #[arg(long)]
    pub lexicon: PathBuf,
    /// One term per line; blank lines and lines starting with '#' are skipped.
    #[arg(long, required_unless_present = "mirex")]
    pub vocabulary: Option<PathBuf>,
    /// Map the adjectives of the five MIREX mood clusters instead of a vocabulary file.
    #[arg(long, conflicts_with = "vocabulary")]
    pub mirex: bool,
    /// With --mirex, give every adjective its cluster's mean quadrant.
    #[arg(long, requires = "mirex")]
    pub per_cluster: bool,
    /// Override/exclusion table (term,decision,provenance).
    #[arg(long)]
    pub overrides: Option<PathBuf>,
    /// Use the built-in overrides (epic, heavy → Q2; meditative → Q4; love, sexy excluded).
    #[arg(long, conflicts_with = "overrides")]
    pub published_overrides: bool,
    #[arg(long, default_value = "word")]
    pub word_column: String,
    #[arg(long, default_value = "valence_mean")]
    pub valence_column: String,
    #[arg(long, default_value = "arousal_mean")]
    pub arousal_column: String,
    #[arg(long, default_value_t = 1.0)]
    pub scale_min: f64,
    #[arg(long, default_value_t = 9.0)]
    pub scale_max: f64,
    /// Neutral point of the lexicon rating scale.
    #[arg(long, default_value_t = 5.0)]
    pub midpoint: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GoldArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Neutral point of the manifest's valence/arousal scale; required when
    /// the manifest carries valence and arousal values.
    #[arg(long, allow_negative_numbers = true)]
    pub midpoint: Option<f64>,
    /// Mapping table used to turn `mood_terms` into quadrants.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Renaming of the manifest's quadrant column, e.g. "Q1=Q2,Q2=Q1".
    #[arg(long)]
    pub quadrant_remap: Option<QuadrantRemap>,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    #[command(flatten)]
    pub gold: GoldArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub gold: GoldArgs,
    #[arg(long, required_unless_present = "text_preds")]
    pub audio_preds: Option<PathBuf>,
    #[arg(long)]
    pub text_preds: Option<PathBuf>,
    /// Defaults to the label set of the predictions.
    #[arg(long)]
    pub label_space: Option<LabelSpace>,
    #[arg(long, default_value = "zero", value_parser = parse_zero_division)]
    pub zero_division: ZeroDivision,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FusionInputArgs {
    #[command(flatten)]
    pub gold: GoldArgs,
    #[arg(long)]
    pub audio_preds: PathBuf,
    #[arg(long)]
    pub text_preds: PathBuf,
    /// Defaults to the label set both modalities can share.
    #[arg(long)]
    pub label_space: Option<LabelSpace>,
    #[arg(long, default_value = "prefer-text")]
    pub tie_break: TieBreak,
    #[arg(long, default_value = "zero", value_parser = parse_zero_division)]
    pub zero_division: ZeroDivision,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[command(flatten)]
    pub inputs: FusionInputArgs,
    /// max | average | weighted
    #[arg(long)]
    pub strategy: Strategy,
    /// Audio weight in [0, 1]; weighted strategy only.
    #[arg(long)]
    pub weight: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub inputs: FusionInputArgs,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    #[arg(long, default_value = "macro")]
    pub average: Average,
    /// Evaluate grid points on one thread.
    #[arg(long)]
    pub sequential: bool,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_zero_division(s: &str) -> Result<ZeroDivision, String> {
    match s {
        "zero" => Ok(ZeroDivision::Zero),
        "skip" => Ok(ZeroDivision::Skip),
        _ => Err(format!("expected zero or skip, got {s:?}")),
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::MapTags(args) => map_tags(&args),
        Command::Normalize(args) => normalize(&args),
        Command::Evaluate(args) => evaluate(&args),
        Command::Fuse(args) => fuse(&args),
        Command::Sweep(args) => sweep(&args),
    }
}

fn warn_all(diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprintln!("warning: {d}");
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    write_file(dir, name, &json)
}

fn read_vocabulary(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading vocabulary {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

pub fn map_tags(args: &MapTagsArgs) -> anyhow::Result<()> {
    let schema = LexiconSchema {
        word: args.word_column.clone(),
        valence_mean: args.valence_column.clone(),
        arousal_mean: args.arousal_column.clone(),
        delimiter: crate::delimiter_for(&args.lexicon),
        scale_min: args.scale_min,
        scale_max: args.scale_max,
        midpoint: args.midpoint,
        ..LexiconSchema::default()
    };
    let lex =
        load_lexicon(&args.lexicon, &schema).with_context(|| format!("loading lexicon {}", args.lexicon.display()))?;
    let overrides = match (&args.overrides, args.published_overrides) {
        (Some(path), _) => MappingTable::load(path).with_context(|| format!("loading overrides {}", path.display()))?,
        (None, true) => MappingTable::published_overrides(),
        (None, false) => MappingTable::default(),
    };
    let outcome = if args.mirex {
        let mode = if args.per_cluster {
            ClusterMode::PerCluster
        } else {
            ClusterMode::PerAdjective
        };
        map_mirex_cluster_terms(&MoodCluster::mirex(), &lex, &overrides, mode)
    } else {
        let path = args.vocabulary.as_ref().expect("clap requires a vocabulary");
        build_mapping_table(&read_vocabulary(path)?, &lex, &overrides)
    };
    warn_all(&outcome.diagnostics);

    let mut buf = Vec::new();
    outcome.table.write(&mut buf, b',')?;
    write_file(&args.out, "mapping.csv", &String::from_utf8(buf)?)
}

/// Manifest records with gold quadrants derived from whichever annotations
/// they carry.
pub fn prepare_songs(gold: &GoldArgs) -> anyhow::Result<Vec<SongRecord>> {
    let remap = gold.quadrant_remap.clone().unwrap_or_default();
    let mut songs = load_manifest_with(&gold.manifest, &remap)
        .with_context(|| format!("loading manifest {}", gold.manifest.display()))?;
    if songs.iter().any(|s| s.gold_va.is_some()) {
        let Some(midpoint) = gold.midpoint else {
            bail!("manifest has valence/arousal annotations; --midpoint is required");
        };
        warn_all(&normalize_va_annotations(&mut songs, midpoint));
    }
    if let Some(path) = &gold.mapping {
        let table = MappingTable::load(path).with_context(|| format!("loading mapping {}", path.display()))?;
        warn_all(&normalize_categorical_annotations(&mut songs, &table));
    }
    Ok(songs)
}

pub fn normalize(args: &NormalizeArgs) -> anyhow::Result<()> {
    let songs = prepare_songs(&args.gold)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["song_id", "quadrant", "flag"])?;
    for s in &songs {
        let flag = s.flag.map(|f| flag_name(f).to_string()).unwrap_or_default();
        let quadrant = s.gold_quadrant.map(|q| q.to_string()).unwrap_or_default();
        w.write_record([s.song_id.as_str(), &quadrant, &flag])?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    write_file(&args.out, "normalized.csv", &String::from_utf8(bytes)?)
}

fn flag_name(flag: RecordFlag) -> &'static str {
    match flag {
        RecordFlag::Ambiguous => "ambiguous",
        RecordFlag::Excluded => "excluded",
        RecordFlag::Unmapped => "unmapped",
        RecordFlag::Tie => "tie",
    }
}

#[derive(Debug, Serialize)]
struct Skipped {
    unknown_song: usize,
    unlabelled: usize,
    wrong_label_set: usize,
    other_modality: usize,
}

#[derive(Debug, Serialize)]
struct EvaluationOutput<'a> {
    modality: Modality,
    label_space: LabelSpace,
    evaluated: usize,
    skipped: Skipped,
    confusion: &'a ConfusionMatrix,
    metrics: &'a MetricsReport,
}

fn modality_records(path: &Path, modality: Modality) -> anyhow::Result<(Vec<PredictionRecord>, usize)> {
    let preds = load_predictions(path).with_context(|| format!("loading predictions {}", path.display()))?;
    warn_all(&preds.warnings);
    let total = preds.records.len();
    let records: Vec<PredictionRecord> = preds.records.into_iter().filter(|r| r.modality == modality).collect();
    let other = total - records.len();
    if other > 0 {
        eprintln!(
            "warning: {}: ignoring {other} record(s) that are not {modality}",
            path.display()
        );
    }
    Ok((records, other))
}

pub fn evaluate(args: &EvaluateArgs) -> anyhow::Result<()> {
    let songs = prepare_songs(&args.gold)?;
    let by_id: BTreeMap<&str, &SongRecord> = songs.iter().map(|s| (s.song_id.as_str(), s)).collect();

    let inputs = [(Modality::Audio, &args.audio_preds), (Modality::Text, &args.text_preds)];
    for (modality, path) in inputs.into_iter().filter_map(|(m, p)| p.as_ref().map(|p| (m, p))) {
        let (records, other_modality) = modality_records(path, modality)?;
        let space = match args.label_space {
            Some(space) => space,
            None => records
                .iter()
                .find_map(|r| LabelSpace::detect(r.labels()))
                .with_context(|| format!("{}: no record has a quadrant or binary label set", path.display()))?,
        };
        let mut skipped = Skipped {
            unknown_song: 0,
            unlabelled: 0,
            wrong_label_set: 0,
            other_modality,
        };
        let mut golds = Vec::new();
        let mut predicted = Vec::new();
        for r in &records {
            let Some(song) = by_id.get(r.song_id.as_str()) else {
                skipped.unknown_song += 1;
                continue;
            };
            let Some(gold) = song.gold_label(space) else {
                skipped.unlabelled += 1;
                continue;
            };
            match r.distribution.project_to(space) {
                Ok(d) => {
                    golds.push(gold);
                    predicted.push(d.argmax_label().to_string());
                }
                Err(_) => skipped.wrong_label_set += 1,
            }
        }
        if golds.is_empty() {
            bail!(
                "{}: no evaluable {modality} records in label space {space}",
                path.display()
            );
        }
        let cm = confusion(&golds, &predicted, &space.labels())?;
        let report = metrics(&cm, args.zero_division);
        let output = EvaluationOutput {
            modality,
            label_space: space,
            evaluated: golds.len(),
            skipped,
            confusion: &cm,
            metrics: &report,
        };
        write_json(&args.out, &format!("metrics_{modality}.json"), &output)?;
        let title = format!("{modality} only, {space}");
        write_file(
            &args.out,
            &format!("metrics_{modality}.svg"),
            &metrics_svg(&report, &title),
        )?;
    }
    Ok(())
}

/// Joined audio/text pairs for fusion, with the join report.
pub fn prepare_pairs(inputs: &FusionInputArgs) -> anyhow::Result<(Vec<FusionPair>, JoinReport)> {
    let songs = prepare_songs(&inputs.gold)?;
    let (mut records, _) = modality_records(&inputs.audio_preds, Modality::Audio)?;
    records.extend(modality_records(&inputs.text_preds, Modality::Text)?.0);
    let joined = join_modalities(&songs, &records, inputs.label_space);
    let r = &joined.report;
    for (what, ids) in [
        ("audio only", &r.audio_only),
        ("text only", &r.text_only),
        ("not in manifest", &r.unknown_songs),
        ("no shared label set", &r.incompatible),
        ("no gold label", &r.unlabelled),
    ] {
        if !ids.is_empty() {
            eprintln!("warning: {} song(s) {what}: {}", ids.len(), ids.join(", "));
        }
    }
    if joined.pairs.is_empty() {
        bail!("no song has both audio and text predictions");
    }
    Ok((joined.pairs, joined.report))
}

#[derive(Debug, Serialize)]
struct FusedRecord<'a> {
    song_id: &'a str,
    label: &'a str,
    chosen: Choice,
    #[serde(skip_serializing_if = "Option::is_none")]
    probs: Option<&'a [f64]>,
}

#[derive(Debug, Serialize)]
struct FusedFile<'a> {
    config: &'a FusionConfig,
    labels: &'a [String],
    records: Vec<FusedRecord<'a>>,
}

#[derive(Debug, Serialize)]
struct FusionMetricsOutput<'a> {
    config: &'a FusionConfig,
    join: &'a JoinReport,
    evaluated: usize,
    confusion: &'a ConfusionMatrix,
    metrics: &'a MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    selection: Option<SelectionProportions>,
}

pub fn fuse(args: &FuseArgs) -> anyhow::Result<()> {
    let config = FusionConfig::new(args.strategy, args.weight, args.inputs.tie_break)?;
    let (pairs, join) = prepare_pairs(&args.inputs)?;
    let outcomes = fuse_all(&pairs, &config, Execution::default())?;
    let labels = pairs[0].audio.labels();

    let fused = FusedFile {
        config: &config,
        labels,
        records: pairs
            .iter()
            .zip(&outcomes)
            .map(|(p, o)| FusedRecord {
                song_id: &p.song_id,
                label: &o.label,
                chosen: o.chosen,
                probs: o.fused.as_ref().map(|d| d.probs()),
            })
            .collect(),
    };
    write_json(&args.out, "fused.json", &fused)?;

    let (golds, predicted): (Vec<&str>, Vec<&str>) = pairs
        .iter()
        .zip(&outcomes)
        .filter_map(|(p, o)| p.gold.as_deref().map(|g| (g, o.label.as_str())))
        .unzip();
    if golds.is_empty() {
        bail!("no fused record has a gold label");
    }
    let cm = confusion(&golds, &predicted, labels)?;
    let report = metrics(&cm, args.inputs.zero_division);
    let selection = match config.strategy() {
        Strategy::MaxProbability => Some(selection_proportions(&pairs, config.tie_break())?),
        _ => None,
    };
    if let Some(s) = &selection {
        eprintln!(
            "audio chosen for {:.1}% of songs, text for {:.1}%",
            100.0 * s.audio,
            100.0 * s.text
        );
    }
    let output = FusionMetricsOutput {
        config: &config,
        join: &join,
        evaluated: golds.len(),
        confusion: &cm,
        metrics: &report,
        selection,
    };
    write_json(&args.out, "fusion_metrics.json", &output)?;
    let title = match config.audio_weight() {
        Some(w) => format!(
            "weighted fusion, audio {:.0}% / text {:.0}%",
            100.0 * w,
            100.0 * (1.0 - w)
        ),
        None => format!("{:?} fusion", config.strategy()).to_lowercase(),
    };
    write_file(&args.out, "fusion_metrics.svg", &metrics_svg(&report, &title))
}

#[derive(Debug, Serialize)]
struct SweepOutput<'a> {
    label_space: Option<LabelSpace>,
    average: Average,
    grid_step: f64,
    tie_break: TieBreak,
    scored: usize,
    best_weight: f64,
    best_score: f64,
    curve: &'a [SweepPoint],
}

pub fn sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let (pairs, join) = prepare_pairs(&args.inputs)?;
    let config = SweepConfig {
        grid_step: args.grid_step,
        average: args.average,
        zero_division: args.inputs.zero_division,
        tie_break: args.inputs.tie_break,
        execution: if args.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        },
    };
    let result = sweep_weights(&pairs, &config)?;
    let output = SweepOutput {
        label_space: join.label_space,
        average: args.average,
        grid_step: args.grid_step,
        tie_break: args.inputs.tie_break,
        scored: pairs.iter().filter(|p| p.gold.is_some()).count(),
        best_weight: result.best_weight,
        best_score: result.best_score,
        curve: &result.curve,
    };
    write_json(&args.out, "sweep.json", &output)?;

    let mut csv = String::from("audio_weight,score\n");
    for p in &result.curve {
        csv.push_str(&format!("{},{}\n", p.audio_weight, p.score));
    }
    write_file(&args.out, "sweep.csv", &csv)?;
    let title = format!("{:?} F1 by audio weight", args.average).to_lowercase();
    write_file(&args.out, "sweep.svg", &sweep_svg(&result, &title))?;
    eprintln!(
        "best audio weight {} ({:?} F1 {:.4})",
        result.best_weight, args.average, result.best_score
    );
    Ok(())
}
