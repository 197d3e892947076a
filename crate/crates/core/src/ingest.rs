//! Dataset manifests, gold-label normalization, model prediction files and
//! the per-song join of audio and text predictions.
//!
//! # Predictions file
//!
//! ```json
//! {
//!   "schema_version": "1",
//!   "records": [
//!     {
//!       "song_id": "s1",
//!       "modality": "text",
//!       "model_id": "lyrics-distilbert",
//!       "labels": ["positive", "negative"],
//!       "probs": [0.7, 0.3],
//!       "chunks": [{"start": 0, "end": 512, "probs": [0.8, 0.2]},
//!                  {"start": 512, "end": 700, "probs": [0.6, 0.4]}],
//!       "tokenizer_id": "distilbert-base-uncased"
//!     }
//!   ]
//! }
//! ```
//!
//! `probs` align with `labels` by index. `chunks` and `tokenizer_id` are
//! optional and only meaningful for text records.

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chunker::{aggregate_chunks, ChunkPlan, ChunkWeighting};
use crate::error::{Error, Result};
use crate::fusion::FusionPair;
use crate::lexicon::{Decision, MappingTable};
use crate::model::{
    marginalize, quadrant_of, ClassDistribution, LabelSpace, Modality, Quadrant, VaPoint, MASS_TOLERANCE,
};
use crate::Diagnostic;

pub const SCHEMA_VERSION: &str = "1";

/// Why a record has no usable gold label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordFlag {
    /// Annotation sits on a midline.
    Ambiguous,
    /// Every mapped mood term is excluded.
    Excluded,
    /// No mood term could be mapped.
    Unmapped,
    /// Mood terms vote for several quadrants equally.
    Tie,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SongRecord {
    pub song_id: String,
    pub title: Option<String>,
    pub artist: Option<String>,
    pub gold_quadrant: Option<Quadrant>,
    pub gold_va: Option<VaPoint>,
    pub mood_terms: Vec<String>,
    pub audio_path: Option<String>,
    pub lyrics_path: Option<String>,
    pub genre: Option<String>,
    pub year: Option<String>,
    pub has_audio: bool,
    pub has_lyrics: bool,
    pub flag: Option<RecordFlag>,
}

impl SongRecord {
    pub fn new(song_id: impl Into<String>) -> Self {
        Self {
            song_id: song_id.into(),
            title: None,
            artist: None,
            gold_quadrant: None,
            gold_va: None,
            mood_terms: Vec::new(),
            audio_path: None,
            lyrics_path: None,
            genre: None,
            year: None,
            has_audio: false,
            has_lyrics: false,
            flag: None,
        }
    }

    pub fn is_evaluable(&self) -> bool {
        self.gold_quadrant.is_some() && self.flag.is_none()
    }

    /// Gold label in `space`, when the record is evaluable.
    pub fn gold_label(&self, space: LabelSpace) -> Option<&'static str> {
        if !self.is_evaluable() {
            return None;
        }
        self.gold_quadrant.map(|q| space.label_of(q))
    }
}

/// Renames the quadrants of a dataset whose numbering differs from the
/// Q1 = (+,+), Q2 = (−,+), Q3 = (−,−), Q4 = (+,−) convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadrantRemap {
    map: BTreeMap<Quadrant, Quadrant>,
}

impl QuadrantRemap {
    pub fn identity() -> Self {
        Self {
            map: Quadrant::ALL.iter().map(|&q| (q, q)).collect(),
        }
    }

    pub fn apply(&self, q: Quadrant) -> Quadrant {
        self.map[&q]
    }
}

impl Default for QuadrantRemap {
    fn default() -> Self {
        Self::identity()
    }
}

impl FromStr for QuadrantRemap {
    type Err = Error;

    /// `"Q1=Q2,Q2=Q1"`; unlisted quadrants map to themselves. The result
    /// must be a permutation.
    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidValue {
            what: "quadrant remap",
            value: s.to_string(),
        };
        let mut remap = Self::identity();
        for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (from, to) = pair.split_once('=').ok_or_else(invalid)?;
            remap.map.insert(from.parse()?, to.parse()?);
        }
        let targets: BTreeSet<_> = remap.map.values().collect();
        if targets.len() != 4 {
            return Err(invalid());
        }
        Ok(remap)
    }
}

const MANIFEST_COLUMNS: [&str; 11] = [
    "song_id",
    "title",
    "artist",
    "valence",
    "arousal",
    "quadrant",
    "mood_terms",
    "audio_path",
    "lyrics_path",
    "genre",
    "year",
];

/// Reads a manifest with a header row. `song_id` is required; the other
/// recognized columns are `title`, `artist`, `valence`, `arousal`,
/// `quadrant`, `mood_terms` (semicolon-separated), `audio_path`,
/// `lyrics_path`, `genre` and `year`. Unknown columns are ignored.
pub fn read_manifest<R: io::Read>(reader: R, delimiter: u8, remap: &QuadrantRemap) -> Result<Vec<SongRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col: BTreeMap<&str, usize> = MANIFEST_COLUMNS
        .iter()
        .filter_map(|&name| headers.iter().position(|h| h == name).map(|i| (name, i)))
        .collect();
    if !col.contains_key("song_id") {
        return Err(Error::Parse {
            path: "header".into(),
            message: "missing column \"song_id\"".into(),
        });
    }

    let mut seen = BTreeSet::new();
    let mut songs = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let at = |column: &str, message: String| Error::Parse {
            path: format!("line {line}, column {column:?}"),
            message,
        };
        let field = |name: &str| -> Option<String> {
            col.get(name)
                .and_then(|&c| row.get(c))
                .filter(|v| !v.is_empty())
                .map(str::to_string)
        };
        let number = |name: &str| -> Result<Option<f64>> {
            field(name)
                .map(|raw| {
                    raw.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| at(name, format!("not a number: {raw:?}")))
                })
                .transpose()
        };

        let song_id = field("song_id").ok_or_else(|| at("song_id", "empty song id".into()))?;
        if !seen.insert(song_id.clone()) {
            return Err(Error::DuplicateSongId(song_id));
        }
        let mut song = SongRecord::new(song_id);
        song.gold_va = match (number("valence")?, number("arousal")?) {
            (Some(v), Some(a)) => Some(VaPoint::new(v, a)?),
            (None, None) => None,
            _ => return Err(at("valence", "valence and arousal must be given together".into())),
        };
        song.gold_quadrant = field("quadrant")
            .map(|q| q.parse::<Quadrant>().map(|q| remap.apply(q)))
            .transpose()
            .map_err(|e| at("quadrant", e.to_string()))?;
        song.mood_terms = field("mood_terms")
            .map(|t| {
                t.split(';')
                    .map(|s| s.trim().to_lowercase())
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .unwrap_or_default();
        song.title = field("title");
        song.artist = field("artist");
        song.audio_path = field("audio_path");
        song.lyrics_path = field("lyrics_path");
        song.genre = field("genre");
        song.year = field("year");
        song.has_audio = song.audio_path.is_some();
        song.has_lyrics = song.lyrics_path.is_some();
        songs.push(song);
    }
    Ok(songs)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<SongRecord>> {
    load_manifest_with(path, &QuadrantRemap::identity())
}

pub fn load_manifest_with(path: impl AsRef<Path>, remap: &QuadrantRemap) -> Result<Vec<SongRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_manifest(file, crate::delimiter_for(path), remap)
}

/// Sets `gold_quadrant` from `gold_va`. Records on a midline lose their
/// quadrant and are flagged ambiguous; they stay in the dataset.
pub fn normalize_va_annotations(records: &mut [SongRecord], midpoint: f64) -> Vec<Diagnostic> {
    let mut diagnostics = Vec::new();
    for r in records.iter_mut() {
        let Some(point) = r.gold_va else { continue };
        match quadrant_of(point, midpoint) {
            Ok(q) => {
                r.gold_quadrant = Some(q);
                r.flag = None;
            }
            Err(e) => {
                r.gold_quadrant = None;
                r.flag = Some(RecordFlag::Ambiguous);
                diagnostics.push(Diagnostic::new(&r.song_id, e.to_string()));
            }
        }
    }
    diagnostics
}

/// Sets `gold_quadrant` of records with mood terms to the majority quadrant
/// of their mapped terms. Excluded terms do not vote; equal top votes flag
/// the record as a tie.
pub fn normalize_categorical_annotations(records: &mut [SongRecord], mapping: &MappingTable) -> Vec<Diagnostic> {
    let mut diagnostics = Vec::new();
    for r in records.iter_mut().filter(|r| !r.mood_terms.is_empty()) {
        let mut votes: BTreeMap<Quadrant, usize> = BTreeMap::new();
        let mut excluded = 0;
        for term in &r.mood_terms {
            match mapping.decision(term) {
                Some(Decision::Quadrant(q)) => *votes.entry(q).or_default() += 1,
                Some(Decision::Excluded) => excluded += 1,
                Some(Decision::Unmapped) | None => diagnostics.push(Diagnostic::new(
                    &r.song_id,
                    format!("mood term {term:?} has no quadrant"),
                )),
            }
        }
        let top = votes.values().copied().max().unwrap_or(0);
        let leaders: Vec<Quadrant> = votes.iter().filter(|(_, &n)| n == top).map(|(&q, _)| q).collect();
        let (quadrant, flag) = match leaders.as_slice() {
            [q] => (Some(*q), None),
            [] if excluded > 0 => (None, Some(RecordFlag::Excluded)),
            [] => (None, Some(RecordFlag::Unmapped)),
            _ => (None, Some(RecordFlag::Tie)),
        };
        if let Some(flag) = flag {
            diagnostics.push(Diagnostic::new(
                &r.song_id,
                format!("record flagged {flag:?}").to_lowercase(),
            ));
        }
        r.gold_quadrant = quadrant;
        r.flag = flag;
    }
    diagnostics
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    schema_version: String,
    records: Vec<RawRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    song_id: String,
    modality: Modality,
    model_id: String,
    labels: Vec<String>,
    probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chunks: Option<Vec<RawChunk>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tokenizer_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChunk {
    start: usize,
    end: usize,
    probs: Vec<f64>,
}

/// Per-chunk predictions of a long text.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkDetail {
    pub ranges: Vec<Range<usize>>,
    pub distributions: Vec<ClassDistribution>,
}

impl ChunkDetail {
    pub fn lengths(&self) -> Vec<usize> {
        self.ranges.iter().map(|r| r.len()).collect()
    }

    /// The plan the ranges describe; overlap is read off the first two chunks.
    pub fn plan(&self) -> ChunkPlan {
        let overlap = match self.ranges.as_slice() {
            [a, b, ..] => a.end.saturating_sub(b.start),
            _ => 0,
        };
        ChunkPlan {
            chunks: self.ranges.clone(),
            max_tokens: self.ranges.iter().map(|r| r.len()).max().unwrap_or(0),
            overlap,
        }
    }

    pub fn aggregate(&self, weighting: ChunkWeighting) -> Result<ClassDistribution> {
        aggregate_chunks(&self.distributions, weighting, Some(&self.lengths()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub song_id: String,
    pub modality: Modality,
    pub model_id: String,
    pub distribution: ClassDistribution,
    pub chunk_detail: Option<ChunkDetail>,
    pub tokenizer_id: Option<String>,
}

impl PredictionRecord {
    pub fn labels(&self) -> &[String] {
        self.distribution.labels()
    }
}

/// Records of a predictions file plus non-fatal findings.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub records: Vec<PredictionRecord>,
    pub warnings: Vec<Diagnostic>,
}

const AGGREGATE_TOLERANCE: f64 = 1e-9;

pub fn parse_predictions(json: &str) -> Result<Predictions> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let raw: RawFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(if path == "." { "$".to_string() } else { path }, e.inner().to_string())
    })?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(Error::schema(
            "schema_version",
            format!(
                "unsupported version {:?}, expected {SCHEMA_VERSION:?}",
                raw.schema_version
            ),
        ));
    }

    let mut records = Vec::with_capacity(raw.records.len());
    let mut warnings = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, r) in raw.records.into_iter().enumerate() {
        let at = format!("records[{i}]");
        if r.song_id.trim().is_empty() {
            return Err(Error::schema(format!("{at}.song_id"), "empty song id"));
        }
        if r.model_id.trim().is_empty() {
            return Err(Error::schema(format!("{at}.model_id"), "empty model id"));
        }
        if !seen.insert((r.song_id.clone(), r.modality)) {
            return Err(Error::schema(
                format!("{at}.song_id"),
                format!("second {} record for song {:?}", r.modality, r.song_id),
            ));
        }
        check_labels(&r.labels, &format!("{at}.labels"))?;
        let distribution = distribution_at(&r.labels, r.probs, &format!("{at}.probs"))?;

        let chunk_detail = match r.chunks {
            None => None,
            Some(_) if r.modality == Modality::Audio => {
                return Err(Error::schema(
                    format!("{at}.chunks"),
                    "chunks are only allowed on text records",
                ));
            }
            Some(chunks) => {
                let detail = chunk_detail_at(&r.labels, chunks, &format!("{at}.chunks"))?;
                let matches = |w| {
                    detail.aggregate(w).is_ok_and(|agg| {
                        agg.probs()
                            .iter()
                            .zip(distribution.probs())
                            .all(|(x, y)| (x - y).abs() <= AGGREGATE_TOLERANCE)
                    })
                };
                if !matches(ChunkWeighting::Uniform)
                    && !matches(ChunkWeighting::TokenCount)
                    && !matches(ChunkWeighting::MajorityVote)
                {
                    warnings.push(Diagnostic::new(
                        format!("{at}.probs"),
                        "distribution matches no aggregate of its chunks",
                    ));
                }
                Some(detail)
            }
        };
        records.push(PredictionRecord {
            song_id: r.song_id,
            modality: r.modality,
            model_id: r.model_id,
            distribution,
            chunk_detail,
            tokenizer_id: r.tokenizer_id,
        });
    }
    Ok(Predictions { records, warnings })
}

fn check_labels(labels: &[String], at: &str) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::schema(at, "empty label set"));
    }
    for (j, l) in labels.iter().enumerate() {
        if l.is_empty() {
            return Err(Error::schema(format!("{at}[{j}]"), "empty label"));
        }
        if labels[..j].contains(l) {
            return Err(Error::schema(format!("{at}[{j}]"), format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

fn distribution_at(labels: &[String], probs: Vec<f64>, at: &str) -> Result<ClassDistribution> {
    if probs.len() != labels.len() {
        return Err(Error::schema(
            at,
            format!("{} probabilities for {} labels", probs.len(), labels.len()),
        ));
    }
    if let Some(j) = probs
        .iter()
        .position(|p| !p.is_finite() || *p < 0.0 || *p > 1.0 + MASS_TOLERANCE)
    {
        return Err(Error::DistributionInvalid(format!(
            "{at}[{j}]: probability {} outside [0, 1]",
            probs[j]
        )));
    }
    ClassDistribution::new(labels.to_vec(), probs).map_err(|e| match e {
        Error::DistributionInvalid(msg) => Error::DistributionInvalid(format!("{at}: {msg}")),
        other => other,
    })
}

fn chunk_detail_at(labels: &[String], chunks: Vec<RawChunk>, at: &str) -> Result<ChunkDetail> {
    if chunks.is_empty() {
        return Err(Error::schema(at, "empty chunk list"));
    }
    let mut ranges: Vec<Range<usize>> = Vec::with_capacity(chunks.len());
    let mut distributions = Vec::with_capacity(chunks.len());
    for (k, c) in chunks.into_iter().enumerate() {
        let here = format!("{at}[{k}]");
        if c.start >= c.end {
            return Err(Error::schema(
                format!("{here}.end"),
                format!("end {} not after start {}", c.end, c.start),
            ));
        }
        match ranges.last() {
            None if c.start != 0 => {
                return Err(Error::schema(
                    format!("{here}.start"),
                    "first chunk must start at token 0",
                ));
            }
            Some(prev) if c.start <= prev.start || c.start > prev.end || c.end <= prev.end => {
                return Err(Error::schema(
                    format!("{here}.start"),
                    format!(
                        "chunk {}..{} does not continue {}..{}",
                        c.start, c.end, prev.start, prev.end
                    ),
                ));
            }
            _ => {}
        }
        ranges.push(c.start..c.end);
        distributions.push(distribution_at(labels, c.probs, &format!("{here}.probs"))?);
    }
    Ok(ChunkDetail { ranges, distributions })
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Predictions> {
    let path = path.as_ref();
    let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&json)
}

/// Pretty-printed predictions JSON, field order as in the schema.
pub fn predictions_to_json(records: &[PredictionRecord]) -> String {
    let raw = RawFile {
        schema_version: SCHEMA_VERSION.into(),
        records: records
            .iter()
            .map(|r| RawRecord {
                song_id: r.song_id.clone(),
                modality: r.modality,
                model_id: r.model_id.clone(),
                labels: r.labels().to_vec(),
                probs: r.distribution.probs().to_vec(),
                chunks: r.chunk_detail.as_ref().map(|d| {
                    d.ranges
                        .iter()
                        .zip(&d.distributions)
                        .map(|(range, dist)| RawChunk {
                            start: range.start,
                            end: range.end,
                            probs: dist.probs().to_vec(),
                        })
                        .collect()
                }),
                tokenizer_id: r.tokenizer_id.clone(),
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&raw).expect("predictions serialize");
    json.push('\n');
    json
}

/// What happened to each song and prediction during the join.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct JoinReport {
    pub paired: usize,
    pub audio_only: Vec<String>,
    pub text_only: Vec<String>,
    /// Predictions whose song is not in the manifest.
    pub unknown_songs: Vec<String>,
    /// Songs whose two sides share no label set.
    pub incompatible: Vec<String>,
    /// Paired songs without a usable gold label.
    pub unlabelled: Vec<String>,
    pub label_space: Option<LabelSpace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joined {
    pub pairs: Vec<FusionPair>,
    pub report: JoinReport,
}

/// Brings an audio and a text distribution onto one label set. With a
/// target space both sides are projected onto it; without one, a quadrant
/// side is marginalized onto the binary axis of the other side.
pub fn reconcile(
    audio: &ClassDistribution,
    text: &ClassDistribution,
    target: Option<LabelSpace>,
) -> Result<(ClassDistribution, ClassDistribution, Option<LabelSpace>)> {
    if let Some(space) = target {
        return Ok((audio.project_to(space)?, text.project_to(space)?, Some(space)));
    }
    let mixed = || Error::MixedLabelSets {
        left: audio.labels().to_vec(),
        right: text.labels().to_vec(),
    };
    match (LabelSpace::detect(audio.labels()), LabelSpace::detect(text.labels())) {
        (Some(a), Some(t)) if a == t => Ok((audio.project_to(a)?, text.project_to(a)?, Some(a))),
        (Some(LabelSpace::Quadrants), Some(t)) => Ok((
            marginalize(audio, t.axis().expect("binary"))?,
            text.project_to(t)?,
            Some(t),
        )),
        (Some(a), Some(LabelSpace::Quadrants)) => Ok((
            audio.project_to(a)?,
            marginalize(text, a.axis().expect("binary"))?,
            Some(a),
        )),
        (None, None) if audio.same_label_set(text) => Ok((audio.clone(), text.reordered(audio.labels())?, None)),
        _ => Err(mixed()),
    }
}

/// Pairs the audio and text prediction of every manifest song that has
/// both, in manifest order.
pub fn join_modalities(songs: &[SongRecord], predictions: &[PredictionRecord], target: Option<LabelSpace>) -> Joined {
    let known: BTreeSet<&str> = songs.iter().map(|s| s.song_id.as_str()).collect();
    let mut audio: BTreeMap<&str, &PredictionRecord> = BTreeMap::new();
    let mut text: BTreeMap<&str, &PredictionRecord> = BTreeMap::new();
    let mut report = JoinReport::default();
    let mut unknown = BTreeSet::new();
    for p in predictions {
        if !known.contains(p.song_id.as_str()) {
            unknown.insert(p.song_id.clone());
            continue;
        }
        let side = match p.modality {
            Modality::Audio => &mut audio,
            Modality::Text => &mut text,
        };
        side.entry(p.song_id.as_str()).or_insert(p);
    }
    report.unknown_songs = unknown.into_iter().collect();

    let mut pairs = Vec::new();
    let mut spaces = BTreeSet::new();
    for song in songs {
        let id = song.song_id.as_str();
        match (audio.get(id), text.get(id)) {
            (Some(a), Some(t)) => match reconcile(&a.distribution, &t.distribution, target) {
                Ok((a, t, space)) => {
                    let gold = space.and_then(|s| song.gold_label(s)).map(str::to_string);
                    if gold.is_none() {
                        report.unlabelled.push(id.to_string());
                    }
                    spaces.insert(space.map(|s| s.to_string()));
                    if space.is_some() {
                        report.label_space = space;
                    }
                    pairs.push(FusionPair {
                        song_id: id.to_string(),
                        audio: a,
                        text: t,
                        gold,
                    });
                }
                Err(_) => report.incompatible.push(id.to_string()),
            },
            (Some(_), None) => report.audio_only.push(id.to_string()),
            (None, Some(_)) => report.text_only.push(id.to_string()),
            (None, None) => {}
        }
    }
    if spaces.len() > 1 {
        report.label_space = None;
    }
    report.paired = pairs.len();
    Joined { pairs, report }
}
