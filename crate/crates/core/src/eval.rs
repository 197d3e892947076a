//! Confusion matrices and per-class precision, recall and F-score.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are gold labels, columns are predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn count(&self, gold: &str, predicted: &str) -> Option<u64> {
        let g = self.labels.iter().position(|l| l == gold)?;
        let p = self.labels.iter().position(|l| l == predicted)?;
        Some(self.counts[g][p])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }
}

pub fn confusion<G, P, L>(golds: &[G], preds: &[P], labels: &[L]) -> Result<ConfusionMatrix>
where
    G: AsRef<str>,
    P: AsRef<str>,
    L: AsRef<str>,
{
    if golds.len() != preds.len() {
        return Err(Error::LengthMismatch {
            what: "gold vs predicted labels",
            left: golds.len(),
            right: preds.len(),
        });
    }
    let labels: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
    let index = |l: &str| {
        labels
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| Error::UnknownLabel(l.to_string()))
    };
    let mut counts = vec![vec![0u64; labels.len()]; labels.len()];
    for (g, p) in golds.iter().zip(preds) {
        counts[index(g.as_ref())?][index(p.as_ref())?] += 1;
    }
    Ok(ConfusionMatrix { labels, counts })
}

/// What to do with a precision or recall whose denominator is zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroDivision {
    /// Report 0 and flag the class.
    #[default]
    Zero,
    /// Report 0, flag the class and leave the value out of macro averages.
    Skip,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Average {
    #[default]
    Macro,
    Micro,
}

impl FromStr for Average {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "macro" => Ok(Average::Macro),
            "micro" => Ok(Average::Micro),
            _ => Err(Error::InvalidValue {
                what: "average",
                value: s.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    pub predicted: u64,
    /// Precision or recall had a zero denominator.
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub per_class: Vec<ClassMetrics>,
    #[serde(rename = "macro")]
    pub macro_avg: Averages,
    #[serde(rename = "micro")]
    pub micro_avg: Averages,
    pub records: u64,
    pub zero_division: ZeroDivision,
}

impl MetricsReport {
    pub fn class(&self, label: &str) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.label == label)
    }

    pub fn averages(&self, average: Average) -> Averages {
        match average {
            Average::Macro => self.macro_avg,
            Average::Micro => self.micro_avg,
        }
    }

    pub fn flagged(&self) -> impl Iterator<Item = &str> {
        self.per_class.iter().filter(|c| c.flagged).map(|c| c.label.as_str())
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn metrics(cm: &ConfusionMatrix, zero_division: ZeroDivision) -> MetricsReport {
    let k = cm.labels.len();
    let mut per_class = Vec::with_capacity(k);
    // (precision, recall, f1) where None marks an undefined value
    let mut defined: Vec<(Option<f64>, Option<f64>, Option<f64>)> = Vec::with_capacity(k);

    for c in 0..k {
        let tp = cm.counts[c][c];
        let support: u64 = cm.counts[c].iter().sum();
        let predicted: u64 = (0..k).map(|g| cm.counts[g][c]).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let p = precision.unwrap_or(0.0);
        let r = recall.unwrap_or(0.0);
        let f1 = harmonic(p, r);
        let f1_defined = precision.and(recall).map(|_| f1);
        defined.push((precision, recall, f1_defined));
        per_class.push(ClassMetrics {
            label: cm.labels[c].clone(),
            precision: p,
            recall: r,
            f1,
            support,
            predicted,
            flagged: precision.is_none() || recall.is_none(),
        });
    }

    let macro_avg = match zero_division {
        ZeroDivision::Zero => Averages {
            precision: mean(per_class.iter().map(|c| c.precision)),
            recall: mean(per_class.iter().map(|c| c.recall)),
            f1: mean(per_class.iter().map(|c| c.f1)),
        },
        ZeroDivision::Skip => Averages {
            precision: mean(defined.iter().filter_map(|d| d.0)),
            recall: mean(defined.iter().filter_map(|d| d.1)),
            f1: mean(defined.iter().filter_map(|d| d.2)),
        },
    };

    // single-label classification: every FP of one class is an FN of another
    let total = cm.total();
    let accuracy = ratio(cm.trace(), total).unwrap_or(0.0);
    let micro_avg = Averages {
        precision: accuracy,
        recall: accuracy,
        f1: accuracy,
    };

    MetricsReport {
        per_class,
        macro_avg,
        micro_avg,
        records: total,
        zero_division,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction_is_diagonal() {
        let cm = confusion(&["Q1", "Q2"], &["Q1", "Q2"], &["Q1", "Q2", "Q3", "Q4"]).unwrap();
        assert_eq!(cm.trace(), 2);
        assert_eq!(cm.total(), 2);
        let r = metrics(&cm, ZeroDivision::Zero);
        for label in ["Q1", "Q2"] {
            let c = r.class(label).unwrap();
            assert_eq!((c.precision, c.recall, c.f1), (1.0, 1.0, 1.0));
        }
        // Q3/Q4 never occur, so they are flagged
        assert_eq!(r.flagged().collect::<Vec<_>>(), ["Q3", "Q4"]);
        assert_eq!(r.class("Q3").unwrap().precision, 0.0);
    }

    #[test]
    fn total_confusion() {
        let cm = confusion(&["Q1", "Q1"], &["Q2", "Q2"], &["Q1", "Q2"]).unwrap();
        assert_eq!(cm.count("Q1", "Q2"), Some(2));
        assert_eq!(cm.trace(), 0);
    }

    #[test]
    fn hand_counted_two_class_case() {
        // gold A: 2 as A, 1 as B; gold B: 1 as A, 2 as B
        let golds = ["A", "A", "A", "B", "B", "B"];
        let preds = ["A", "A", "B", "A", "B", "B"];
        let r = metrics(&confusion(&golds, &preds, &["A", "B"]).unwrap(), ZeroDivision::Zero);
        let a = r.class("A").unwrap();
        assert!((a.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.micro_avg.f1 - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn six_record_mixed_case() {
        let labels = ["Q1", "Q2", "Q3", "Q4"];
        let golds = ["Q1", "Q1", "Q2", "Q3", "Q4", "Q4"];
        let preds = ["Q1", "Q2", "Q2", "Q4", "Q4", "Q1"];
        let cm = confusion(&golds, &preds, &labels).unwrap();
        // brute-force pair counting
        for g in labels {
            for p in labels {
                let n = golds.iter().zip(&preds).filter(|(x, y)| **x == g && **y == p).count() as u64;
                assert_eq!(cm.count(g, p), Some(n), "{g}->{p}");
            }
        }
    }

    #[test]
    fn skip_excludes_undefined_from_macro() {
        let cm = confusion(&["A", "A"], &["A", "A"], &["A", "B"]).unwrap();
        let zero = metrics(&cm, ZeroDivision::Zero);
        let skip = metrics(&cm, ZeroDivision::Skip);
        assert_eq!(zero.macro_avg.f1, 0.5);
        assert_eq!(skip.macro_avg.f1, 1.0);
        assert!(skip.class("B").unwrap().flagged);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            confusion(&["A"], &["A", "B"], &["A", "B"]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            confusion(&["A"], &["C"], &["A", "B"]),
            Err(Error::UnknownLabel(l)) if l == "C"
        ));
    }
}
