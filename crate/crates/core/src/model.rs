//! Circumplex geometry, label sets and the probability container shared by
//! every other module.
//!
//! Quadrants follow the sign convention
//!
//! | quadrant | valence | arousal |
//! |----------|---------|---------|
//! | Q1       | +       | +       |
//! | Q2       | −       | +       |
//! | Q3       | −       | −       |
//! | Q4       | +       | −       |
//!
//! Binary labels are named `positive`/`negative` on the valence axis and
//! `high`/`low` on the arousal axis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest deviation of an input probability mass from 1 that is accepted
/// (and then normalized away).
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Mass tolerance guaranteed for every constructed [`ClassDistribution`].
pub const NORMALIZED_TOLERANCE: f64 = 1e-9;

// Below this deviation the vector is stored as given, which keeps
// normalization idempotent across serialization round trips.
const RENORMALIZE_ABOVE: f64 = 1e-12;

/// A (valence, arousal) coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VaPoint {
    pub valence: f64,
    pub arousal: f64,
}

impl VaPoint {
    pub fn new(valence: f64, arousal: f64) -> Result<Self> {
        if !valence.is_finite() || !arousal.is_finite() {
            return Err(Error::NonFinitePoint { valence, arousal });
        }
        Ok(Self { valence, arousal })
    }

    pub fn coordinate(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Valence => self.valence,
            Axis::Arousal => self.arousal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quadrant {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4];

    pub fn from_signs(valence: Sign, arousal: Sign) -> Self {
        match (valence, arousal) {
            (Sign::Positive, Sign::Positive) => Quadrant::Q1,
            (Sign::Negative, Sign::Positive) => Quadrant::Q2,
            (Sign::Negative, Sign::Negative) => Quadrant::Q3,
            (Sign::Positive, Sign::Negative) => Quadrant::Q4,
        }
    }

    pub fn sign(self, axis: Axis) -> Sign {
        match (self, axis) {
            (Quadrant::Q1 | Quadrant::Q4, Axis::Valence) => Sign::Positive,
            (Quadrant::Q2 | Quadrant::Q3, Axis::Valence) => Sign::Negative,
            (Quadrant::Q1 | Quadrant::Q2, Axis::Arousal) => Sign::Positive,
            (Quadrant::Q3 | Quadrant::Q4, Axis::Arousal) => Sign::Negative,
        }
    }

    /// Binary component of this quadrant on one axis.
    pub fn project(self, axis: Axis) -> BinaryLabel {
        BinaryLabel {
            axis,
            sign: self.sign(axis),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quadrant::Q1 => "Q1",
            Quadrant::Q2 => "Q2",
            Quadrant::Q3 => "Q3",
            Quadrant::Q4 => "Q4",
        }
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quadrant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "Q1" => Ok(Quadrant::Q1),
            "Q2" => Ok(Quadrant::Q2),
            "Q3" => Ok(Quadrant::Q3),
            "Q4" => Ok(Quadrant::Q4),
            _ => Err(Error::InvalidValue {
                what: "quadrant",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Valence,
    Arousal,
}

/// For arousal, `Positive` means high arousal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryLabel {
    pub axis: Axis,
    pub sign: Sign,
}

impl BinaryLabel {
    pub fn as_str(self) -> &'static str {
        match (self.axis, self.sign) {
            (Axis::Valence, Sign::Positive) => "positive",
            (Axis::Valence, Sign::Negative) => "negative",
            (Axis::Arousal, Sign::Positive) => "high",
            (Axis::Arousal, Sign::Negative) => "low",
        }
    }
}

impl fmt::Display for BinaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Audio,
    Text,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Audio => "audio",
            Modality::Text => "text",
        })
    }
}

/// The canonical label sets the pipeline knows how to derive gold labels for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSpace {
    Quadrants,
    Valence,
    Arousal,
}

impl LabelSpace {
    /// Labels in canonical order.
    pub fn labels(self) -> Vec<String> {
        let names: &[&str] = match self {
            LabelSpace::Quadrants => &["Q1", "Q2", "Q3", "Q4"],
            LabelSpace::Valence => &["positive", "negative"],
            LabelSpace::Arousal => &["high", "low"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn axis(self) -> Option<Axis> {
        match self {
            LabelSpace::Quadrants => None,
            LabelSpace::Valence => Some(Axis::Valence),
            LabelSpace::Arousal => Some(Axis::Arousal),
        }
    }

    pub fn of_axis(axis: Axis) -> Self {
        match axis {
            Axis::Valence => LabelSpace::Valence,
            Axis::Arousal => LabelSpace::Arousal,
        }
    }

    /// Recognizes a canonical label set regardless of storage order.
    pub fn detect<S: AsRef<str>>(labels: &[S]) -> Option<Self> {
        [LabelSpace::Quadrants, LabelSpace::Valence, LabelSpace::Arousal]
            .into_iter()
            .find(|space| same_set(&space.labels(), labels))
    }

    /// Gold label of a quadrant within this space.
    pub fn label_of(self, q: Quadrant) -> &'static str {
        match self.axis() {
            None => q.as_str(),
            Some(axis) => q.project(axis).as_str(),
        }
    }
}

impl fmt::Display for LabelSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelSpace::Quadrants => "quadrants",
            LabelSpace::Valence => "valence",
            LabelSpace::Arousal => "arousal",
        })
    }
}

impl FromStr for LabelSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrants" => Ok(LabelSpace::Quadrants),
            "valence" => Ok(LabelSpace::Valence),
            "arousal" => Ok(LabelSpace::Arousal),
            _ => Err(Error::InvalidValue {
                what: "label space",
                value: s.to_string(),
            }),
        }
    }
}

fn same_set<A: AsRef<str>, B: AsRef<str>>(a: &[A], b: &[B]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| y.as_ref() == x.as_ref()))
}

/// Assigns a point to its quadrant relative to the neutral point of the
/// rating scale. Points on either midline are rejected.
pub fn quadrant_of(p: VaPoint, midpoint: f64) -> Result<Quadrant> {
    let p = VaPoint::new(p.valence, p.arousal)?;
    if !midpoint.is_finite() {
        return Err(Error::InvalidValue {
            what: "midpoint",
            value: midpoint.to_string(),
        });
    }
    let sign = |x: f64| {
        if x > midpoint {
            Some(Sign::Positive)
        } else if x < midpoint {
            Some(Sign::Negative)
        } else {
            None
        }
    };
    match (sign(p.valence), sign(p.arousal)) {
        (Some(v), Some(a)) => Ok(Quadrant::from_signs(v, a)),
        _ => Err(Error::AmbiguousPoint {
            valence: p.valence,
            arousal: p.arousal,
            midpoint,
        }),
    }
}

/// A normalized probability vector over an ordered, duplicate-free label set.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl ClassDistribution {
    /// Builds a distribution from probabilities that already sum to 1 within
    /// [`MASS_TOLERANCE`].
    pub fn new<L: Into<String>>(labels: impl IntoIterator<Item = L>, probs: Vec<f64>) -> Result<Self> {
        let labels = check_labels(labels)?;
        check_lengths(&labels, &probs)?;
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0 + MASS_TOLERANCE).contains(&p) {
                return Err(Error::DistributionInvalid(format!(
                    "probability {p} at index {i} outside [0, 1]"
                )));
            }
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::DistributionInvalid(format!(
                "probabilities sum to {mass}, not 1"
            )));
        }
        Ok(Self::normalize(labels, probs, mass))
    }

    /// Builds a distribution from non-negative scores with positive total.
    pub fn from_scores<L: Into<String>>(labels: impl IntoIterator<Item = L>, scores: Vec<f64>) -> Result<Self> {
        let labels = check_labels(labels)?;
        check_lengths(&labels, &scores)?;
        if scores.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::DistributionInvalid(
                "scores must be finite and non-negative".into(),
            ));
        }
        let mass: f64 = scores.iter().sum();
        if mass <= 0.0 {
            return Err(Error::DistributionInvalid("scores sum to zero".into()));
        }
        Ok(Self::normalize(labels, scores, mass))
    }

    pub fn uniform<L: Into<String>>(labels: impl IntoIterator<Item = L>) -> Result<Self> {
        let labels = check_labels(labels)?;
        let n = labels.len();
        Ok(Self {
            labels,
            probs: vec![1.0 / n as f64; n],
        })
    }

    /// Point mass on one label.
    pub fn one_hot<L: Into<String>>(labels: impl IntoIterator<Item = L>, index: usize) -> Result<Self> {
        let labels = check_labels(labels)?;
        if index >= labels.len() {
            return Err(Error::DistributionInvalid(format!(
                "one-hot index {index} out of range"
            )));
        }
        let mut probs = vec![0.0; labels.len()];
        probs[index] = 1.0;
        Ok(Self { labels, probs })
    }

    fn normalize(labels: Vec<String>, mut probs: Vec<f64>, mass: f64) -> Self {
        if (mass - 1.0).abs() > RENORMALIZE_ABOVE {
            probs.iter_mut().for_each(|p| *p /= mass);
        }
        Self { labels, probs }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, label: &str) -> Option<f64> {
        self.index_of(label).map(|i| self.probs[i])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Index of the largest probability; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn max_prob(&self) -> f64 {
        self.probs[self.argmax()]
    }

    pub fn argmax_label(&self) -> &str {
        &self.labels[self.argmax()]
    }

    /// Same labels in the same order.
    pub fn same_labels(&self, other: &ClassDistribution) -> bool {
        self.labels == other.labels
    }

    /// Same labels, any order.
    pub fn same_label_set(&self, other: &ClassDistribution) -> bool {
        same_set(&self.labels, &other.labels)
    }

    /// Re-expresses the distribution in another storage order of the same
    /// label set.
    pub fn reordered<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        if !same_set(&self.labels, order) {
            return Err(Error::MixedLabelSets {
                left: self.labels.clone(),
                right: order.iter().map(|s| s.as_ref().to_string()).collect(),
            });
        }
        let probs = order
            .iter()
            .map(|l| self.prob(l.as_ref()).expect("label present"))
            .collect();
        Ok(Self {
            labels: order.iter().map(|s| s.as_ref().to_string()).collect(),
            probs,
        })
    }

    /// Expresses the distribution in `space`, marginalizing quadrant-valued
    /// distributions onto a binary axis when needed.
    pub fn project_to(&self, space: LabelSpace) -> Result<Self> {
        match LabelSpace::detect(&self.labels) {
            Some(found) if found == space => self.reordered(&space.labels()),
            Some(LabelSpace::Quadrants) => marginalize(self, space.axis().expect("binary space has an axis")),
            _ => Err(Error::WrongLabelSet {
                expected: space.to_string(),
                found: self.labels.clone(),
            }),
        }
    }
}

fn check_labels<L: Into<String>>(labels: impl IntoIterator<Item = L>) -> Result<Vec<String>> {
    let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
    if labels.is_empty() {
        return Err(Error::DistributionInvalid("empty label set".into()));
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::DistributionInvalid(format!("duplicate label {l:?}")));
        }
    }
    Ok(labels)
}

fn check_lengths(labels: &[String], probs: &[f64]) -> Result<()> {
    if labels.len() != probs.len() {
        return Err(Error::LengthMismatch {
            what: "labels vs probabilities",
            left: labels.len(),
            right: probs.len(),
        });
    }
    Ok(())
}

/// Collapses a quadrant distribution onto one axis by summing the two
/// quadrants that share each sign.
pub fn marginalize(d: &ClassDistribution, axis: Axis) -> Result<ClassDistribution> {
    if LabelSpace::detect(d.labels()) != Some(LabelSpace::Quadrants) {
        return Err(Error::WrongLabelSet {
            expected: LabelSpace::Quadrants.to_string(),
            found: d.labels().to_vec(),
        });
    }
    let mass_for = |sign: Sign| -> f64 {
        Quadrant::ALL
            .iter()
            .filter(|q| q.sign(axis) == sign)
            .map(|q| d.prob(q.as_str()).expect("quadrant label present"))
            .sum()
    };
    let space = LabelSpace::of_axis(axis);
    ClassDistribution::from_scores(space.labels(), vec![mass_for(Sign::Positive), mass_for(Sign::Negative)])
}
