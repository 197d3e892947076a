//! Splitting over-long token sequences into bounded chunks and folding the
//! per-chunk class distributions back into one per-song distribution.

use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ClassDistribution;

/// Token budget of BERT-family text classifiers.
pub const DEFAULT_MAX_TOKENS: usize = 512;

pub const WHITESPACE_TOKENIZER: &str = "whitespace";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedText {
    pub tokens: Vec<String>,
    pub tokenizer_id: String,
}

impl TokenizedText {
    pub fn new(tokens: Vec<String>, tokenizer_id: impl Into<String>) -> Self {
        Self {
            tokens,
            tokenizer_id: tokenizer_id.into(),
        }
    }

    /// Splits on Unicode whitespace.
    pub fn whitespace(text: &str) -> Self {
        Self::new(
            text.split_whitespace().map(str::to_string).collect(),
            WHITESPACE_TOKENIZER,
        )
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn chunk_tokens(&self, range: &Range<usize>) -> &[String] {
        &self.tokens[range.clone()]
    }
}

/// Half-open token ranges covering a text in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPlan {
    pub chunks: Vec<Range<usize>>,
    pub max_tokens: usize,
    pub overlap: usize,
}

impl ChunkPlan {
    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.chunks.iter().map(|r| r.len()).collect()
    }
}

pub fn plan_chunks(text: &TokenizedText, max_tokens: usize, overlap: usize) -> Result<ChunkPlan> {
    plan_ranges(text.len(), max_tokens, overlap)
}

/// Greedy left-to-right packing of `n_tokens` tokens; each chunk after the
/// first starts `overlap` tokens before the previous one ended.
pub fn plan_ranges(n_tokens: usize, max_tokens: usize, overlap: usize) -> Result<ChunkPlan> {
    if max_tokens == 0 || overlap >= max_tokens {
        return Err(Error::InvalidChunking { max_tokens, overlap });
    }
    if n_tokens == 0 {
        return Err(Error::EmptyText);
    }
    let mut chunks = Vec::with_capacity(n_tokens.div_ceil(max_tokens - overlap));
    let mut start = 0;
    loop {
        let end = (start + max_tokens).min(n_tokens);
        chunks.push(start..end);
        if end == n_tokens {
            break;
        }
        start = end - overlap;
    }
    Ok(ChunkPlan {
        chunks,
        max_tokens,
        overlap,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChunkWeighting {
    /// Plain mean of the chunk probability vectors.
    #[default]
    Uniform,
    /// Mean weighted by chunk length in tokens.
    TokenCount,
    /// Fraction of chunks whose argmax is each label.
    MajorityVote,
}

impl FromStr for ChunkWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(ChunkWeighting::Uniform),
            "token-count" => Ok(ChunkWeighting::TokenCount),
            "majority-vote" => Ok(ChunkWeighting::MajorityVote),
            _ => Err(Error::InvalidValue {
                what: "chunk weighting",
                value: s.into(),
            }),
        }
    }
}

/// Combines per-chunk distributions into one distribution over the same
/// label set. `chunk_lengths` is only consulted for token-count weighting.
pub fn aggregate_chunks(
    dists: &[ClassDistribution],
    weighting: ChunkWeighting,
    chunk_lengths: Option<&[usize]>,
) -> Result<ClassDistribution> {
    let first = dists.first().ok_or(Error::NoChunks)?;
    if let Some(other) = dists.iter().find(|d| !d.same_labels(first)) {
        return Err(Error::MixedLabelSets {
            left: first.labels().to_vec(),
            right: other.labels().to_vec(),
        });
    }

    let weights: Vec<f64> = match weighting {
        ChunkWeighting::Uniform | ChunkWeighting::MajorityVote => vec![1.0; dists.len()],
        ChunkWeighting::TokenCount => {
            let lengths = chunk_lengths.ok_or(Error::LengthMismatch {
                what: "chunk lengths vs distributions",
                left: 0,
                right: dists.len(),
            })?;
            if lengths.len() != dists.len() {
                return Err(Error::LengthMismatch {
                    what: "chunk lengths vs distributions",
                    left: lengths.len(),
                    right: dists.len(),
                });
            }
            lengths.iter().map(|&n| n as f64).collect()
        }
    };

    let mut scores = vec![0.0; first.len()];
    for (d, w) in dists.iter().zip(&weights) {
        match weighting {
            ChunkWeighting::MajorityVote => scores[d.argmax()] += w,
            _ => {
                for (s, p) in scores.iter_mut().zip(d.probs()) {
                    *s += w * p;
                }
            }
        }
    }
    ClassDistribution::from_scores(first.labels().to_vec(), scores)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: f64, b: f64) -> ClassDistribution {
        ClassDistribution::new(["x", "y"], vec![a, b]).unwrap()
    }

    #[test]
    fn short_text_is_one_chunk() {
        let plan = plan_ranges(100, 512, 0).unwrap();
        assert_eq!(plan.chunks, vec![0..100]);
    }

    #[test]
    fn greedy_split() {
        assert_eq!(plan_ranges(1000, 512, 0).unwrap().chunks, vec![0..512, 512..1000]);
    }

    #[test]
    fn overlapping_split() {
        // start advances by max - overlap = 448
        assert_eq!(
            plan_ranges(1000, 512, 64).unwrap().chunks,
            vec![0..512, 448..960, 896..1000]
        );
    }

    #[test]
    fn exact_multiple_has_no_trailing_empty_chunk() {
        assert_eq!(plan_ranges(1024, 512, 0).unwrap().chunks, vec![0..512, 512..1024]);
    }

    #[test]
    fn planning_errors() {
        assert!(matches!(plan_ranges(0, 512, 0), Err(Error::EmptyText)));
        assert!(matches!(plan_ranges(10, 0, 0), Err(Error::InvalidChunking { .. })));
        assert!(matches!(plan_ranges(10, 8, 8), Err(Error::InvalidChunking { .. })));
        assert!(matches!(
            plan_chunks(&TokenizedText::whitespace("  \n "), 8, 0),
            Err(Error::EmptyText)
        ));
    }

    #[test]
    fn whitespace_plan_from_text() {
        let text = TokenizedText::whitespace("one two three four five");
        let plan = plan_chunks(&text, 2, 0).unwrap();
        assert_eq!(plan.lengths(), vec![2, 2, 1]);
        assert_eq!(text.chunk_tokens(&plan.chunks[2]), ["five"]);
    }

    #[test]
    fn aggregation_examples() {
        let d = pair(0.3, 0.7);
        assert_eq!(
            aggregate_chunks(std::slice::from_ref(&d), ChunkWeighting::Uniform, None).unwrap(),
            d
        );

        let u = aggregate_chunks(&[pair(0.8, 0.2), pair(0.4, 0.6)], ChunkWeighting::Uniform, None).unwrap();
        assert!((u.probs()[0] - 0.6).abs() < 1e-12);
        assert!((u.probs()[1] - 0.4).abs() < 1e-12);

        let t = aggregate_chunks(
            &[pair(1.0, 0.0), pair(0.0, 1.0)],
            ChunkWeighting::TokenCount,
            Some(&[300, 100]),
        )
        .unwrap();
        assert_eq!(t.probs(), [0.75, 0.25]);
    }

    #[test]
    fn majority_vote_counts_argmax() {
        let v = aggregate_chunks(
            &[pair(0.9, 0.1), pair(0.6, 0.4), pair(0.2, 0.8)],
            ChunkWeighting::MajorityVote,
            None,
        )
        .unwrap();
        assert!((v.probs()[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn aggregation_errors() {
        assert!(matches!(
            aggregate_chunks(&[], ChunkWeighting::Uniform, None),
            Err(Error::NoChunks)
        ));
        let other = ClassDistribution::new(["x", "z"], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            aggregate_chunks(&[pair(0.5, 0.5), other], ChunkWeighting::Uniform, None),
            Err(Error::MixedLabelSets { .. })
        ));
        assert!(matches!(
            aggregate_chunks(&[pair(0.5, 0.5)], ChunkWeighting::TokenCount, Some(&[1, 2])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            aggregate_chunks(&[pair(0.5, 0.5)], ChunkWeighting::TokenCount, None),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
