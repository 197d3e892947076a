mod common;

use common::VALENCE;
use moodfuse::chunker::{aggregate_chunks, plan_chunks, plan_ranges, ChunkWeighting, TokenizedText};
use moodfuse::{ClassDistribution, Error};
use proptest::prelude::*;

fn dist(p: f64) -> ClassDistribution {
    ClassDistribution::new(VALENCE, vec![p, 1.0 - p]).unwrap()
}

proptest! {
    #[test]
    fn concatenation_reconstructs_input(n in 1usize..3000, max in prop_oneof![Just(8usize), Just(512usize), 1usize..40]) {
        let tokens: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
        let text = TokenizedText::new(tokens.clone(), "test");
        let plan = plan_chunks(&text, max, 0).unwrap();
        let joined: Vec<String> = plan.chunks.iter().flat_map(|r| text.chunk_tokens(r).to_vec()).collect();
        prop_assert_eq!(joined, tokens);
        prop_assert_eq!(plan.len(), n.div_ceil(max));
        prop_assert!(plan.lengths().iter().all(|&l| l >= 1 && l <= max));
    }

    #[test]
    fn overlapping_chunks_cover_everything_once_advanced(n in 1usize..2000, max in 2usize..64, frac in 0.0f64..1.0) {
        let overlap = ((max - 1) as f64 * frac) as usize;
        let plan = plan_ranges(n, max, overlap).unwrap();
        prop_assert_eq!(plan.chunks[0].start, 0);
        prop_assert_eq!(plan.chunks.last().unwrap().end, n);
        for w in plan.chunks.windows(2) {
            prop_assert_eq!(w[1].start, w[0].end - overlap);
            prop_assert!(w[1].start > w[0].start);
        }
    }

    #[test]
    fn identical_chunks_aggregate_to_themselves(p in 0.01f64..0.99, k in 1usize..20, lens in prop::collection::vec(1usize..600, 20)) {
        let d = dist(p);
        let chunks = vec![d.clone(); k];
        for w in [ChunkWeighting::Uniform, ChunkWeighting::TokenCount] {
            let agg = aggregate_chunks(&chunks, w, Some(&lens[..k])).unwrap();
            for (x, y) in agg.probs().iter().zip(d.probs()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn aggregation_ignores_chunk_order(ps in prop::collection::vec((0.01f64..0.99, 1usize..600), 1..12)) {
        let dists: Vec<ClassDistribution> = ps.iter().map(|(p, _)| dist(*p)).collect();
        let lens: Vec<usize> = ps.iter().map(|(_, l)| *l).collect();
        let mut rd = dists.clone();
        rd.reverse();
        let mut rl = lens.clone();
        rl.reverse();
        for w in [ChunkWeighting::Uniform, ChunkWeighting::TokenCount, ChunkWeighting::MajorityVote] {
            let a = aggregate_chunks(&dists, w, Some(&lens)).unwrap();
            let b = aggregate_chunks(&rd, w, Some(&rl)).unwrap();
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn token_weights_are_scale_invariant(ps in prop::collection::vec((0.01f64..0.99, 1usize..100), 1..12), s in 2usize..9) {
        let dists: Vec<ClassDistribution> = ps.iter().map(|(p, _)| dist(*p)).collect();
        let lens: Vec<usize> = ps.iter().map(|(_, l)| *l).collect();
        let scaled: Vec<usize> = lens.iter().map(|l| l * s).collect();
        let a = aggregate_chunks(&dists, ChunkWeighting::TokenCount, Some(&lens)).unwrap();
        let b = aggregate_chunks(&dists, ChunkWeighting::TokenCount, Some(&scaled)).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn short_text_is_one_chunk() {
    let text = TokenizedText::whitespace("la la la");
    let plan = plan_chunks(&text, 512, 0).unwrap();
    assert_eq!(plan.chunks, vec![0..3]);
}

#[test]
fn invalid_plans_rejected() {
    let text = TokenizedText::whitespace("");
    assert!(matches!(plan_chunks(&text, 8, 0), Err(Error::EmptyText)));
    assert!(matches!(plan_ranges(10, 0, 0), Err(Error::InvalidChunking { .. })));
    assert!(matches!(plan_ranges(10, 4, 4), Err(Error::InvalidChunking { .. })));
}

#[test]
fn token_count_weighting_worked_example() {
    // 512 tokens at 0.8 and 288 at 0.4: (512*0.8 + 288*0.4) / 800
    let agg = aggregate_chunks(&[dist(0.8), dist(0.4)], ChunkWeighting::TokenCount, Some(&[512, 288])).unwrap();
    assert!((agg.probs()[0] - 0.656).abs() < 1e-12);
}

#[test]
fn majority_vote_counts_argmaxes() {
    let agg = aggregate_chunks(&[dist(0.8), dist(0.6), dist(0.2)], ChunkWeighting::MajorityVote, None).unwrap();
    assert!((agg.probs()[0] - 2.0 / 3.0).abs() < 1e-12);
    assert!(matches!(
        aggregate_chunks(&[], ChunkWeighting::Uniform, None),
        Err(Error::NoChunks)
    ));
}
