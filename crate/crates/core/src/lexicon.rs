//! Affective word ratings and the term → quadrant mapping tables built from
//! them.
//!
//! A lexicon is a delimiter-separated file with a header row; the column
//! names are configurable through [`LexiconSchema`] since the published
//! redistributions of the ratings disagree on layout. Terms made of several
//! words (`"good-natured"`, `"feel good"`) are placed at the unweighted mean
//! of the ratings of the words the lexicon knows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{quadrant_of, Quadrant, VaPoint};
use crate::Diagnostic;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LexiconEntry {
    pub word: String,
    pub valence_mean: f64,
    pub arousal_mean: f64,
    pub valence_sd: Option<f64>,
    pub arousal_sd: Option<f64>,
}

impl LexiconEntry {
    pub fn point(&self) -> VaPoint {
        VaPoint {
            valence: self.valence_mean,
            arousal: self.arousal_mean,
        }
    }
}

/// Column names, delimiter and rating scale of a lexicon file.
#[derive(Debug, Clone, PartialEq)]
pub struct LexiconSchema {
    pub word: String,
    pub valence_mean: String,
    pub arousal_mean: String,
    /// Read when the column exists.
    pub valence_sd: Option<String>,
    pub arousal_sd: Option<String>,
    pub delimiter: u8,
    pub scale_min: f64,
    pub scale_max: f64,
    pub midpoint: f64,
}

impl Default for LexiconSchema {
    /// 1–9 rating scale with neutral point 5.
    fn default() -> Self {
        Self {
            word: "word".into(),
            valence_mean: "valence_mean".into(),
            arousal_mean: "arousal_mean".into(),
            valence_sd: Some("valence_sd".into()),
            arousal_sd: Some("arousal_sd".into()),
            delimiter: b',',
            scale_min: 1.0,
            scale_max: 9.0,
            midpoint: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, LexiconEntry>,
    scale_min: f64,
    scale_max: f64,
    midpoint: f64,
}

impl Lexicon {
    pub fn new(scale_min: f64, scale_max: f64, midpoint: f64) -> Result<Self> {
        if !(scale_min < midpoint && midpoint < scale_max) {
            return Err(Error::InvalidScale {
                min: scale_min,
                midpoint,
                max: scale_max,
            });
        }
        Ok(Self {
            entries: BTreeMap::new(),
            scale_min,
            scale_max,
            midpoint,
        })
    }

    /// Adds one word, lowercasing it and checking ratings against the scale.
    pub fn insert(&mut self, mut entry: LexiconEntry) -> Result<()> {
        entry.word = entry.word.trim().to_lowercase();
        if entry.word.is_empty() {
            return Err(Error::InvalidValue {
                what: "lexicon word",
                value: String::new(),
            });
        }
        for value in [entry.valence_mean, entry.arousal_mean] {
            if !(self.scale_min..=self.scale_max).contains(&value) {
                return Err(Error::OutOfScaleRating {
                    word: entry.word,
                    value,
                    min: self.scale_min,
                    max: self.scale_max,
                });
            }
        }
        if self.entries.contains_key(&entry.word) {
            return Err(Error::DuplicateWord(entry.word));
        }
        self.entries.insert(entry.word.clone(), entry);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&LexiconEntry> {
        self.entries.get(&word.trim().to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn midpoint(&self) -> f64 {
        self.midpoint
    }

    pub fn scale(&self) -> (f64, f64) {
        (self.scale_min, self.scale_max)
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.values()
    }

    pub fn from_reader<R: io::Read>(reader: R, schema: &LexiconSchema) -> Result<Self> {
        let mut lex = Lexicon::new(schema.scale_min, schema.scale_max, schema.midpoint)?;
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(schema.delimiter)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let column = |name: &str| headers.iter().position(|h| h == name);
        let required = |name: &str| {
            column(name).ok_or_else(|| Error::Parse {
                path: "header".into(),
                message: format!("missing column {name:?}"),
            })
        };
        let word_col = required(&schema.word)?;
        let v_col = required(&schema.valence_mean)?;
        let a_col = required(&schema.arousal_mean)?;
        let vsd_col = schema.valence_sd.as_deref().and_then(column);
        let asd_col = schema.arousal_sd.as_deref().and_then(column);

        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            // header is line 1
            let line = i + 2;
            let number = |col: usize, name: &str| -> Result<f64> {
                let raw = row.get(col).unwrap_or("");
                raw.parse::<f64>().map_err(|_| Error::Parse {
                    path: format!("line {line}, column {name:?}"),
                    message: format!("not a number: {raw:?}"),
                })
            };
            let optional = |col: Option<usize>, name: &Option<String>| -> Result<Option<f64>> {
                match col {
                    Some(c) if !row.get(c).unwrap_or("").is_empty() => {
                        number(c, name.as_deref().unwrap_or_default()).map(Some)
                    }
                    _ => Ok(None),
                }
            };
            lex.insert(LexiconEntry {
                word: row.get(word_col).unwrap_or("").to_string(),
                valence_mean: number(v_col, &schema.valence_mean)?,
                arousal_mean: number(a_col, &schema.arousal_mean)?,
                valence_sd: optional(vsd_col, &schema.valence_sd)?,
                arousal_sd: optional(asd_col, &schema.arousal_sd)?,
            })?;
        }
        Ok(lex)
    }
}

pub fn load_lexicon(path: impl AsRef<Path>, schema: &LexiconSchema) -> Result<Lexicon> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Lexicon::from_reader(file, schema)
}

/// Lowercased words of a term; hyphens and underscores separate words.
pub fn term_words(term: &str) -> Vec<String> {
    term.split(|c: char| c.is_whitespace() || c == '-' || c == '_')
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Mean rating of the term's words found in the lexicon, with the words used.
pub fn term_point(lex: &Lexicon, term: &str) -> Result<(VaPoint, Vec<String>)> {
    let found: Vec<&LexiconEntry> = term_words(term).iter().filter_map(|w| lex.get(w)).collect();
    if found.is_empty() {
        return Err(Error::NotInLexicon(term.to_string()));
    }
    let n = found.len() as f64;
    let valence = found.iter().map(|e| e.valence_mean).sum::<f64>() / n;
    let arousal = found.iter().map(|e| e.arousal_mean).sum::<f64>() / n;
    let words = found.iter().map(|e| e.word.clone()).collect();
    Ok((VaPoint::new(valence, arousal)?, words))
}

pub fn term_quadrant(lex: &Lexicon, term: &str) -> Result<Quadrant> {
    let (point, _) = term_point(lex, term)?;
    quadrant_of(point, lex.midpoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Quadrant(Quadrant),
    Excluded,
    Unmapped,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Quadrant(q) => write!(f, "{q}"),
            Decision::Excluded => f.write_str("excluded"),
            Decision::Unmapped => f.write_str("unmapped"),
        }
    }
}

impl FromStr for Decision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "excluded" => Ok(Decision::Excluded),
            "unmapped" => Ok(Decision::Unmapped),
            other => other.parse().map(Decision::Quadrant),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    LexiconDerived,
    ManualOverride,
    ManualExclusion,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::LexiconDerived => "lexicon-derived",
            Provenance::ManualOverride => "manual-override",
            Provenance::ManualExclusion => "manual-exclusion",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lexicon-derived" => Ok(Provenance::LexiconDerived),
            "manual-override" => Ok(Provenance::ManualOverride),
            "manual-exclusion" => Ok(Provenance::ManualExclusion),
            _ => Err(Error::InvalidValue {
                what: "provenance",
                value: s.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingRule {
    pub term: String,
    pub decision: Decision,
    pub provenance: Provenance,
}

impl MappingRule {
    pub fn new(term: &str, decision: Decision, provenance: Provenance) -> Self {
        Self {
            term: normalize_term(term),
            decision,
            provenance,
        }
    }
}

fn normalize_term(term: &str) -> String {
    term.trim().to_lowercase()
}

/// Ordered term → decision rules; each term appears once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappingTable {
    rules: Vec<MappingRule>,
}

impl MappingTable {
    pub fn new(rules: Vec<MappingRule>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for rule in &rules {
            if !seen.insert(rule.term.as_str()) {
                return Err(Error::DuplicateTerm(rule.term.clone()));
            }
        }
        Ok(Self { rules })
    }

    /// Manual decisions for mood tags whose lexicon placement was judged
    /// unreliable: "epic" and "heavy" sit in Q2, "meditative" (absent from
    /// the lexicon) in Q4, and "love" and "sexy", spread across all four
    /// quadrants, are excluded.
    pub fn published_overrides() -> Self {
        let overridden = |term, q| MappingRule::new(term, Decision::Quadrant(q), Provenance::ManualOverride);
        let excluded = |term| MappingRule::new(term, Decision::Excluded, Provenance::ManualExclusion);
        Self {
            rules: vec![
                overridden("epic", Quadrant::Q2),
                overridden("heavy", Quadrant::Q2),
                excluded("love"),
                overridden("meditative", Quadrant::Q4),
                excluded("sexy"),
            ],
        }
    }

    pub fn rules(&self) -> &[MappingRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<&MappingRule> {
        let term = normalize_term(term);
        self.rules.iter().find(|r| r.term == term)
    }

    pub fn decision(&self, term: &str) -> Option<Decision> {
        self.get(term).map(|r| r.decision)
    }

    pub fn unmapped(&self) -> impl Iterator<Item = &str> {
        self.rules
            .iter()
            .filter(|r| r.decision == Decision::Unmapped)
            .map(|r| r.term.as_str())
    }

    /// Reads `term,decision,provenance` rows.
    pub fn from_reader<R: io::Read>(reader: R, delimiter: u8) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let column = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
                path: "header".into(),
                message: format!("missing column {name:?}"),
            })
        };
        let (t, d, p) = (column("term")?, column("decision")?, column("provenance")?);
        let mut rules = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let at = |message: String| Error::Parse {
                path: format!("line {}", i + 2),
                message,
            };
            let term = row.get(t).unwrap_or("");
            if term.is_empty() {
                return Err(at("empty term".into()));
            }
            let decision = row.get(d).unwrap_or("").parse().map_err(|e: Error| at(e.to_string()))?;
            let provenance = row.get(p).unwrap_or("").parse().map_err(|e: Error| at(e.to_string()))?;
            rules.push(MappingRule::new(term, decision, provenance));
        }
        Self::new(rules)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, crate::delimiter_for(path))
    }

    pub fn write<W: io::Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
        w.write_record(["term", "decision", "provenance"])?;
        for r in &self.rules {
            w.write_record([r.term.clone(), r.decision.to_string(), r.provenance.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<mapping table>", e))?;
        Ok(())
    }
}

/// A mapping table with the per-term problems met while building it.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingOutcome {
    pub table: MappingTable,
    pub diagnostics: Vec<Diagnostic>,
}

fn derive_rule(term: &str, lex: &Lexicon, diagnostics: &mut Vec<Diagnostic>) -> MappingRule {
    let decision = match term_quadrant(lex, term) {
        Ok(q) => Decision::Quadrant(q),
        Err(e) => {
            diagnostics.push(Diagnostic::new(term, e.to_string()));
            Decision::Unmapped
        }
    };
    MappingRule::new(term, decision, Provenance::LexiconDerived)
}

fn collect_overrides(terms: &BTreeSet<String>, overrides: &MappingTable, diagnostics: &mut Vec<Diagnostic>) {
    for rule in overrides.rules() {
        if !terms.contains(&rule.term) {
            diagnostics.push(Diagnostic::new(
                &rule.term,
                "override term is not part of the vocabulary; ignored",
            ));
        }
    }
}

/// Maps every vocabulary term to a quadrant. Override and exclusion rules
/// win over the lexicon; terms the lexicon cannot place are emitted as
/// unmapped with a diagnostic. Output is sorted by term.
pub fn build_mapping_table<S: AsRef<str>>(vocabulary: &[S], lex: &Lexicon, overrides: &MappingTable) -> MappingOutcome {
    let terms: BTreeSet<String> = vocabulary
        .iter()
        .map(|t| normalize_term(t.as_ref()))
        .filter(|t| !t.is_empty())
        .collect();
    let mut diagnostics = Vec::new();
    collect_overrides(&terms, overrides, &mut diagnostics);
    let rules = terms
        .iter()
        .map(|term| match overrides.get(term) {
            Some(rule) => rule.clone(),
            None => derive_rule(term, lex, &mut diagnostics),
        })
        .collect();
    MappingOutcome {
        table: MappingTable { rules },
        diagnostics,
    }
}

/// A named group of mood adjectives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoodCluster {
    pub name: String,
    pub adjectives: Vec<String>,
}

const MIREX_CLUSTERS: [(&str, &str); 5] = [
    ("Cluster 1", "passionate, rousing, confident, boisterous, rowdy"),
    ("Cluster 2", "rollicking, cheerful, fun, sweet, amiable/good-natured"),
    (
        "Cluster 3",
        "literate, poignant, wistful, bittersweet, autumnal, brooding",
    ),
    ("Cluster 4", "humorous, silly, campy, quirky, whimsical, witty, wry"),
    (
        "Cluster 5",
        "aggressive, fiery, tense/anxious, intense, volatile, visceral",
    ),
];

impl MoodCluster {
    /// Parses a comma-separated adjective list; entries joined by "/" become
    /// separate adjectives.
    pub fn parse(name: &str, adjectives: &str) -> Self {
        Self {
            name: name.to_string(),
            adjectives: adjectives
                .split(',')
                .flat_map(|a| a.split('/'))
                .map(normalize_term)
                .filter(|a| !a.is_empty())
                .collect(),
        }
    }

    /// The five MIREX audio mood clusters.
    pub fn mirex() -> Vec<MoodCluster> {
        MIREX_CLUSTERS.iter().map(|(n, a)| Self::parse(n, a)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ClusterMode {
    /// Each adjective placed by its own ratings.
    #[default]
    PerAdjective,
    /// Every adjective of a cluster gets the quadrant of the mean of the
    /// cluster's placeable adjectives.
    PerCluster,
}

pub fn map_mirex_cluster_terms(
    clusters: &[MoodCluster],
    lex: &Lexicon,
    overrides: &MappingTable,
    mode: ClusterMode,
) -> MappingOutcome {
    let terms: BTreeSet<String> = clusters.iter().flat_map(|c| c.adjectives.iter().cloned()).collect();
    let mut diagnostics = Vec::new();
    collect_overrides(&terms, overrides, &mut diagnostics);

    let mut derived: BTreeMap<String, MappingRule> = BTreeMap::new();
    for cluster in clusters {
        match mode {
            ClusterMode::PerAdjective => {
                for adj in &cluster.adjectives {
                    if overrides.get(adj).is_none() && !derived.contains_key(adj) {
                        let rule = derive_rule(adj, lex, &mut diagnostics);
                        derived.insert(adj.clone(), rule);
                    }
                }
            }
            ClusterMode::PerCluster => {
                let decision = cluster_decision(cluster, lex, &mut diagnostics);
                for adj in &cluster.adjectives {
                    if overrides.get(adj).is_none() {
                        derived
                            .entry(adj.clone())
                            .or_insert_with(|| MappingRule::new(adj, decision, Provenance::LexiconDerived));
                    }
                }
            }
        }
    }

    let rules = terms
        .iter()
        .map(|t| match overrides.get(t) {
            Some(rule) => rule.clone(),
            None => derived.remove(t).expect("every non-override term derived"),
        })
        .collect();
    MappingOutcome {
        table: MappingTable { rules },
        diagnostics,
    }
}

fn cluster_decision(cluster: &MoodCluster, lex: &Lexicon, diagnostics: &mut Vec<Diagnostic>) -> Decision {
    let points: Vec<VaPoint> = cluster
        .adjectives
        .iter()
        .filter_map(|a| term_point(lex, a).ok().map(|(p, _)| p))
        .collect();
    if points.is_empty() {
        diagnostics.push(Diagnostic::new(
            &cluster.name,
            "no adjective of the cluster is in the lexicon",
        ));
        return Decision::Unmapped;
    }
    let n = points.len() as f64;
    let mean = VaPoint {
        valence: points.iter().map(|p| p.valence).sum::<f64>() / n,
        arousal: points.iter().map(|p| p.arousal).sum::<f64>() / n,
    };
    match quadrant_of(mean, lex.midpoint()) {
        Ok(q) => Decision::Quadrant(q),
        Err(e) => {
            diagnostics.push(Diagnostic::new(&cluster.name, e.to_string()));
            Decision::Unmapped
        }
    }
}
