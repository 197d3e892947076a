mod common;

use common::{first_argmax, fixture, oracle_sweep, random_dist, valence_cases, QUADRANTS, VALENCE};
use moodfuse::cli::{prepare_pairs, FusionInputArgs, GoldArgs};
use moodfuse::fusion::{
    fuse, fuse_all, fuse_average, fuse_max, fuse_weighted, selection_proportions, sweep_weights, weight_grid, Choice,
    FusionConfig, FusionPair, SweepConfig, TieBreak,
};
use moodfuse::{ClassDistribution, Error, Execution, LabelSpace};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn probs(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn pair() -> impl Strategy<Value = (ClassDistribution, ClassDistribution)> {
    prop_oneof![Just(&QUADRANTS[..]), Just(&VALENCE[..])].prop_flat_map(|labels| {
        (probs(labels.len()), probs(labels.len())).prop_map(move |(a, t)| {
            (
                ClassDistribution::new(labels.iter().copied(), a).unwrap(),
                ClassDistribution::new(labels.iter().copied(), t).unwrap(),
            )
        })
    })
}

proptest! {
    #[test]
    fn weighted_endpoints_follow_one_modality((a, t) in pair()) {
        let one = fuse_weighted(&a, &t, 1.0, TieBreak::PreferText).unwrap();
        let zero = fuse_weighted(&a, &t, 0.0, TieBreak::PreferText).unwrap();
        prop_assert_eq!(one.label_index, first_argmax(a.probs()));
        prop_assert_eq!(zero.label_index, first_argmax(t.probs()));
    }

    #[test]
    fn half_weight_is_average_bit_for_bit((a, t) in pair()) {
        let w = fuse_weighted(&a, &t, 0.5, TieBreak::PreferText).unwrap();
        let avg = fuse_average(&a, &t, TieBreak::PreferText).unwrap();
        let wb: Vec<u64> = w.fused.as_ref().unwrap().probs().iter().map(|x| x.to_bits()).collect();
        let ab: Vec<u64> = avg.fused.as_ref().unwrap().probs().iter().map(|x| x.to_bits()).collect();
        prop_assert_eq!(wb, ab);
        prop_assert_eq!(w.label, avg.label);
    }

    #[test]
    fn fused_mass_is_one((a, t) in pair(), w in 0.0f64..=1.0) {
        let o = fuse_weighted(&a, &t, w, TieBreak::PreferText).unwrap();
        let s: f64 = o.fused.unwrap().probs().iter().sum();
        prop_assert!((s - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn max_picks_the_more_confident_side((a, t) in pair()) {
        let o = fuse_max(&a, &t, TieBreak::PreferText).unwrap();
        if a.max_prob() > t.max_prob() {
            prop_assert_eq!(o.chosen, Choice::Audio);
            prop_assert_eq!(o.label_index, a.argmax());
        } else {
            prop_assert_eq!(o.chosen, Choice::Text);
            prop_assert_eq!(o.label_index, t.argmax());
        }
        prop_assert!(o.fused.is_none());
    }

    #[test]
    fn average_label_invariant_under_common_scaling((a, t) in pair(), s in 0.1f64..10.0) {
        // argmax of (a + t) is the argmax of s * (a + t)
        let o = fuse_average(&a, &t, TieBreak::PreferText).unwrap();
        let scaled: Vec<f64> = a.probs().iter().zip(t.probs()).map(|(x, y)| s * (x + y)).collect();
        prop_assert_eq!(o.label_index, first_argmax(&scaled));
    }

    #[test]
    fn text_label_order_is_irrelevant((a, t) in pair()) {
        let mut rev: Vec<String> = t.labels().to_vec();
        rev.reverse();
        let t2 = t.reordered(&rev).unwrap();
        for config in [FusionConfig::max_probability(TieBreak::PreferText), FusionConfig::average(TieBreak::PreferText)] {
            prop_assert_eq!(fuse(&a, &t, &config).unwrap().label, fuse(&a, &t2, &config).unwrap().label);
        }
    }
}

#[test]
fn tie_handling() {
    let a = ClassDistribution::new(VALENCE, vec![0.7, 0.3]).unwrap();
    let t = ClassDistribution::new(VALENCE, vec![0.3, 0.7]).unwrap();
    assert_eq!(fuse_max(&a, &t, TieBreak::PreferText).unwrap().label, "negative");
    assert_eq!(fuse_max(&a, &t, TieBreak::PreferAudio).unwrap().label, "positive");
    assert!(matches!(fuse_max(&a, &t, TieBreak::Error), Err(Error::Tie(_))));
    // average is [0.5, 0.5]: the preferred side settles it
    assert_eq!(fuse_average(&a, &t, TieBreak::PreferText).unwrap().label, "negative");
    assert_eq!(fuse_average(&a, &t, TieBreak::PreferAudio).unwrap().label, "positive");
    assert!(matches!(fuse_average(&a, &t, TieBreak::Error), Err(Error::Tie(_))));
}

#[test]
fn mismatched_label_sets_rejected() {
    let a = ClassDistribution::uniform(QUADRANTS).unwrap();
    let t = ClassDistribution::uniform(VALENCE).unwrap();
    assert!(matches!(
        fuse_average(&a, &t, TieBreak::PreferText),
        Err(Error::MixedLabelSets { .. })
    ));
    assert!(matches!(
        fuse_weighted(&a, &a, 1.5, TieBreak::PreferText),
        Err(Error::WeightOutOfRange(_))
    ));
}

#[test]
fn grid_sizes() {
    assert_eq!(weight_grid(0.05).unwrap().len(), 21);
    assert_eq!(weight_grid(0.5).unwrap(), vec![0.0, 0.5, 1.0]);
    assert_eq!(weight_grid(0.1).unwrap()[3], 0.3);
    assert!(weight_grid(0.3).is_err());
    assert!(weight_grid(0.0).is_err());
}

fn random_pairs(n: usize, seed: u64) -> Vec<FusionPair> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let gold = random_dist(&mut rng, &QUADRANTS).argmax_label().to_string();
            FusionPair {
                song_id: format!("r{i}"),
                audio: random_dist(&mut rng, &QUADRANTS),
                text: random_dist(&mut rng, &QUADRANTS),
                gold: Some(gold),
            }
        })
        .collect()
}

#[test]
fn sequential_and_parallel_agree() {
    let pairs = random_pairs(500, 11);
    let config = FusionConfig::weighted(0.35, TieBreak::PreferText).unwrap();
    assert_eq!(
        fuse_all(&pairs, &config, Execution::Sequential).unwrap(),
        fuse_all(&pairs, &config, Execution::Parallel).unwrap()
    );
    let seq = sweep_weights(
        &pairs,
        &SweepConfig {
            execution: Execution::Sequential,
            ..SweepConfig::default()
        },
    )
    .unwrap();
    let par = sweep_weights(
        &pairs,
        &SweepConfig {
            execution: Execution::Parallel,
            ..SweepConfig::default()
        },
    )
    .unwrap();
    assert_eq!(seq, par);
    assert_eq!(seq.curve.len(), 21);
}

#[test]
fn sweep_best_is_lowest_maximizer() {
    let pairs = random_pairs(200, 3);
    let r = sweep_weights(&pairs, &SweepConfig::default()).unwrap();
    let top = r.curve.iter().map(|p| p.score).fold(f64::MIN, f64::max);
    let first = r.curve.iter().find(|p| p.score == top).unwrap();
    assert_eq!(r.best_weight, first.audio_weight);
    assert_eq!(r.best_score, top);
}

#[test]
fn sweep_without_gold_is_an_error() {
    let mut pairs = random_pairs(5, 1);
    for p in &mut pairs {
        p.gold = None;
    }
    assert!(matches!(
        sweep_weights(&pairs, &SweepConfig::default()),
        Err(Error::EmptyDataset)
    ));
}

fn fixture_inputs(dir: &str) -> FusionInputArgs {
    FusionInputArgs {
        gold: GoldArgs {
            manifest: fixture(&format!("{dir}/manifest.csv")),
            midpoint: Some(0.0),
            mapping: None,
            quadrant_remap: None,
        },
        audio_preds: fixture(&format!("{dir}/audio.json")),
        text_preds: fixture(&format!("{dir}/text.json")),
        label_space: None,
        tie_break: TieBreak::PreferText,
        zero_division: Default::default(),
    }
}

#[test]
fn sweep_fixture_matches_exhaustive_oracle() {
    let (pairs, report) = prepare_pairs(&fixture_inputs("sweep")).unwrap();
    assert_eq!(report.label_space, Some(LabelSpace::Valence));
    assert_eq!(pairs.len(), 20);
    let r = sweep_weights(&pairs, &SweepConfig::default()).unwrap();
    let (weights, scores) = oracle_sweep(&valence_cases("sweep"), 20);
    for (p, (w, s)) in r.curve.iter().zip(weights.iter().zip(&scores)) {
        assert_eq!(p.audio_weight, *w);
        assert!((p.score - s).abs() <= 1e-12, "w={w}: {} vs {s}", p.score);
    }
    assert_eq!(r.best_weight, 0.6);
    assert_eq!(scores.iter().filter(|&&s| s == 1.0).count(), 1);
}

#[test]
fn endpoint_fixture_optimum_at_zero() {
    let (pairs, _) = prepare_pairs(&fixture_inputs("endpoint")).unwrap();
    let r = sweep_weights(&pairs, &SweepConfig::default()).unwrap();
    assert_eq!(r.best_weight, 0.0);
    assert_eq!(r.best_score, 1.0);
    assert_eq!(r.curve.last().unwrap().score, 0.0);
}

#[test]
fn selection_fixture_proportions() {
    let (pairs, _) = prepare_pairs(&fixture_inputs("selection")).unwrap();
    let s = selection_proportions(&pairs, TieBreak::PreferText).unwrap();
    assert_eq!((s.audio, s.text), (0.19, 0.81));
    assert_eq!((s.audio_count, s.text_count, s.total), (19, 81, 100));
}
