//! Late fusion of audio and text class distributions: max-probability
//! selection, averaging and weighted blending, plus the grid sweep over the
//! audio weight.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{confusion, metrics, Average, ZeroDivision};
use crate::model::ClassDistribution;
use crate::par::{self, Execution};

pub const DEFAULT_GRID_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    MaxProbability,
    Average,
    Weighted,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" | "max-probability" => Ok(Strategy::MaxProbability),
            "average" => Ok(Strategy::Average),
            "weighted" => Ok(Strategy::Weighted),
            _ => Err(Error::InvalidValue {
                what: "fusion strategy",
                value: s.into(),
            }),
        }
    }
}

/// Resolves equal maxima. Under max-probability fusion the tie is between
/// the two modalities; under average and weighted fusion it is between
/// classes of the fused distribution, and the preferred modality's
/// probabilities decide among the tied classes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    PreferText,
    PreferAudio,
    Error,
}

impl FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prefer-text" => Ok(TieBreak::PreferText),
            "prefer-audio" => Ok(TieBreak::PreferAudio),
            "error" => Ok(TieBreak::Error),
            _ => Err(Error::InvalidValue {
                what: "tie break",
                value: s.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FusionConfig {
    strategy: Strategy,
    audio_weight: Option<f64>,
    tie_break: TieBreak,
}

impl FusionConfig {
    pub fn max_probability(tie_break: TieBreak) -> Self {
        Self {
            strategy: Strategy::MaxProbability,
            audio_weight: None,
            tie_break,
        }
    }

    pub fn average(tie_break: TieBreak) -> Self {
        Self {
            strategy: Strategy::Average,
            audio_weight: None,
            tie_break,
        }
    }

    pub fn weighted(audio_weight: f64, tie_break: TieBreak) -> Result<Self> {
        check_weight(audio_weight)?;
        Ok(Self {
            strategy: Strategy::Weighted,
            audio_weight: Some(audio_weight),
            tie_break,
        })
    }

    /// `audio_weight` is required for, and only accepted with, weighted fusion.
    pub fn new(strategy: Strategy, audio_weight: Option<f64>, tie_break: TieBreak) -> Result<Self> {
        match (strategy, audio_weight) {
            (Strategy::Weighted, Some(w)) => Self::weighted(w, tie_break),
            (Strategy::Weighted, None) => Err(Error::InvalidValue {
                what: "fusion config",
                value: "weighted fusion needs an audio weight".into(),
            }),
            (_, Some(w)) => Err(Error::InvalidValue {
                what: "fusion config",
                value: format!("audio weight {w} given for {strategy:?} fusion"),
            }),
            (Strategy::MaxProbability, None) => Ok(Self::max_probability(tie_break)),
            (Strategy::Average, None) => Ok(Self::average(tie_break)),
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn audio_weight(&self) -> Option<f64> {
        self.audio_weight
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Choice {
    Audio,
    Text,
    Combined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionOutcome {
    pub label: String,
    pub label_index: usize,
    /// Present for average and weighted fusion.
    pub fused: Option<ClassDistribution>,
    pub chosen: Choice,
}

/// One song's audio and text distributions over a shared label set, with
/// the gold label when known.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionPair {
    pub song_id: String,
    pub audio: ClassDistribution,
    pub text: ClassDistribution,
    pub gold: Option<String>,
}

fn check_weight(w: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::WeightOutOfRange(w));
    }
    Ok(())
}

/// Returns `text` in the label order of `audio`.
fn aligned_text(audio: &ClassDistribution, text: &ClassDistribution) -> Result<ClassDistribution> {
    if audio.same_labels(text) {
        return Ok(text.clone());
    }
    if !audio.same_label_set(text) {
        return Err(Error::MixedLabelSets {
            left: audio.labels().to_vec(),
            right: text.labels().to_vec(),
        });
    }
    text.reordered(audio.labels())
}

pub fn fuse_max(audio: &ClassDistribution, text: &ClassDistribution, tie_break: TieBreak) -> Result<FusionOutcome> {
    let text = aligned_text(audio, text)?;
    let (a, t) = (audio.max_prob(), text.max_prob());
    let chosen = if a > t {
        Choice::Audio
    } else if t > a {
        Choice::Text
    } else {
        match tie_break {
            TieBreak::PreferText => Choice::Text,
            TieBreak::PreferAudio => Choice::Audio,
            TieBreak::Error => return Err(Error::Tie(a)),
        }
    };
    let index = match chosen {
        Choice::Audio => audio.argmax(),
        _ => text.argmax(),
    };
    Ok(FusionOutcome {
        label: audio.labels()[index].clone(),
        label_index: index,
        fused: None,
        chosen,
    })
}

pub fn fuse_average(audio: &ClassDistribution, text: &ClassDistribution, tie_break: TieBreak) -> Result<FusionOutcome> {
    let text = aligned_text(audio, text)?;
    let mean = audio
        .probs()
        .iter()
        .zip(text.probs())
        .map(|(a, t)| (a + t) / 2.0)
        .collect();
    blended_outcome(audio, &text, mean, tie_break)
}

/// `audio_weight * audio + (1 - audio_weight) * text`, per class.
pub fn fuse_weighted(
    audio: &ClassDistribution,
    text: &ClassDistribution,
    audio_weight: f64,
    tie_break: TieBreak,
) -> Result<FusionOutcome> {
    check_weight(audio_weight)?;
    let text = aligned_text(audio, text)?;
    let text_weight = 1.0 - audio_weight;
    let blend = audio
        .probs()
        .iter()
        .zip(text.probs())
        .map(|(a, t)| audio_weight * a + text_weight * t)
        .collect();
    blended_outcome(audio, &text, blend, tie_break)
}

pub fn fuse(audio: &ClassDistribution, text: &ClassDistribution, config: &FusionConfig) -> Result<FusionOutcome> {
    match config.strategy {
        Strategy::MaxProbability => fuse_max(audio, text, config.tie_break),
        Strategy::Average => fuse_average(audio, text, config.tie_break),
        Strategy::Weighted => fuse_weighted(
            audio,
            text,
            config.audio_weight.expect("weighted config carries a weight"),
            config.tie_break,
        ),
    }
}

fn blended_outcome(
    audio: &ClassDistribution,
    text: &ClassDistribution,
    scores: Vec<f64>,
    tie_break: TieBreak,
) -> Result<FusionOutcome> {
    let fused = ClassDistribution::from_scores(audio.labels().to_vec(), scores)?;
    let top = fused.max_prob();
    let tied: Vec<usize> = (0..fused.len()).filter(|&i| fused.probs()[i] == top).collect();
    let index = if tied.len() == 1 {
        tied[0]
    } else {
        let by = match tie_break {
            TieBreak::PreferText => text,
            TieBreak::PreferAudio => audio,
            TieBreak::Error => return Err(Error::Tie(top)),
        };
        // first of the tied classes with the highest preferred-modality probability
        tied.iter().copied().fold(
            tied[0],
            |best, i| if by.probs()[i] > by.probs()[best] { i } else { best },
        )
    };
    Ok(FusionOutcome {
        label: fused.labels()[index].clone(),
        label_index: index,
        fused: Some(fused),
        chosen: Choice::Combined,
    })
}

/// Fuses every pair, in input order.
pub fn fuse_all(pairs: &[FusionPair], config: &FusionConfig, exec: Execution) -> Result<Vec<FusionOutcome>> {
    par::map(exec, pairs, |p| fuse(&p.audio, &p.text, config))
        .into_iter()
        .collect()
}

/// How often max-probability fusion took its label from each modality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionProportions {
    pub audio: f64,
    pub text: f64,
    pub audio_count: usize,
    pub text_count: usize,
    pub total: usize,
}

pub fn selection_proportions(pairs: &[FusionPair], tie_break: TieBreak) -> Result<SelectionProportions> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut audio_count = 0;
    for p in pairs {
        if fuse_max(&p.audio, &p.text, tie_break)?.chosen == Choice::Audio {
            audio_count += 1;
        }
    }
    let total = pairs.len();
    let text_count = total - audio_count;
    Ok(SelectionProportions {
        audio: audio_count as f64 / total as f64,
        text: text_count as f64 / total as f64,
        audio_count,
        text_count,
        total,
    })
}

/// Uniform grid over [0, 1] including both endpoints. The step must divide
/// the interval into a whole number of steps.
pub fn weight_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidGridStep(step));
    }
    let n = (1.0 / step).round();
    if (n * step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidGridStep(step));
    }
    let n = n as usize;
    Ok((0..=n).map(|i| i as f64 / n as f64).collect())
}

/// Macro or micro F-score of fused labels against gold.
pub fn score_labels<G: AsRef<str>, P: AsRef<str>>(
    golds: &[G],
    preds: &[P],
    labels: &[String],
    average: Average,
    zero_division: ZeroDivision,
) -> Result<f64> {
    let cm = confusion(golds, preds, labels)?;
    Ok(metrics(&cm, zero_division).averages(average).f1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub grid_step: f64,
    pub average: Average,
    pub zero_division: ZeroDivision,
    pub tie_break: TieBreak,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid_step: DEFAULT_GRID_STEP,
            average: Average::Macro,
            zero_division: ZeroDivision::Zero,
            tie_break: TieBreak::PreferText,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub audio_weight: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub best_weight: f64,
    pub best_score: f64,
    pub curve: Vec<SweepPoint>,
}

/// Scores weighted fusion at every grid weight over the gold-labelled
/// pairs and returns the best weight (the lowest one on ties).
pub fn sweep_weights(pairs: &[FusionPair], config: &SweepConfig) -> Result<SweepResult> {
    let labelled: Vec<&FusionPair> = pairs.iter().filter(|p| p.gold.is_some()).collect();
    let first = labelled.first().ok_or(Error::EmptyDataset)?;
    let labels = first.audio.labels().to_vec();
    let golds: Vec<&str> = labelled.iter().map(|p| p.gold.as_deref().unwrap()).collect();
    let grid = weight_grid(config.grid_step)?;

    let scores: Vec<Result<f64>> = par::map(config.execution, &grid, |&w| {
        let preds = labelled
            .iter()
            .map(|p| fuse_weighted(&p.audio, &p.text, w, config.tie_break).map(|o| o.label))
            .collect::<Result<Vec<_>>>()?;
        score_labels(&golds, &preds, &labels, config.average, config.zero_division)
    });

    let mut curve = Vec::with_capacity(grid.len());
    for (&w, score) in grid.iter().zip(scores) {
        curve.push(SweepPoint {
            audio_weight: w,
            score: score?,
        });
    }
    let best = curve
        .iter()
        .copied()
        .reduce(|best, p| if p.score > best.score { p } else { best })
        .expect("grid has at least two points");
    Ok(SweepResult {
        best_weight: best.audio_weight,
        best_score: best.score,
        curve,
    })
}
