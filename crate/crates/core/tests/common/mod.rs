//! Helpers shared by the integration tests: fixture paths, random inputs and
//! brute-force oracles that do not go through the library.

#![allow(dead_code)]

use std::path::PathBuf;

use moodfuse::ClassDistribution;
use rand::Rng;

pub const QUADRANTS: [&str; 4] = ["Q1", "Q2", "Q3", "Q4"];
pub const VALENCE: [&str; 2] = ["positive", "negative"];

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

/// Random probability vector of length `k` with strictly positive entries.
pub fn random_probs<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.001..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn random_dist<R: Rng>(rng: &mut R, labels: &[&str]) -> ClassDistribution {
    ClassDistribution::new(labels.iter().copied(), random_probs(rng, labels.len())).unwrap()
}

pub fn first_argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Per-class (precision, recall, f1, flagged) and the macro/micro F1,
/// counted record by record. Undefined ratios are 0 and flag the class.
pub struct OracleMetrics {
    pub per_class: Vec<(f64, f64, f64, bool)>,
    pub macro_p: f64,
    pub macro_r: f64,
    pub macro_f1: f64,
    pub micro_f1: f64,
}

pub fn oracle_metrics(golds: &[usize], preds: &[usize], k: usize) -> OracleMetrics {
    let mut per_class = Vec::new();
    for c in 0..k {
        let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
        for (&g, &p) in golds.iter().zip(preds) {
            match (g == c, p == c) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        let p = if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let r = if tp + fn_ == 0 {
            0.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        per_class.push((p, r, f1, tp + fp == 0 || tp + fn_ == 0));
    }
    let kf = k as f64;
    let correct = golds.iter().zip(preds).filter(|(g, p)| g == p).count();
    OracleMetrics {
        macro_p: per_class.iter().map(|c| c.0).sum::<f64>() / kf,
        macro_r: per_class.iter().map(|c| c.1).sum::<f64>() / kf,
        macro_f1: per_class.iter().map(|c| c.2).sum::<f64>() / kf,
        micro_f1: if golds.is_empty() {
            0.0
        } else {
            correct as f64 / golds.len() as f64
        },
        per_class,
    }
}

/// Binary-valence view of one fixture song, read straight from the JSON.
pub struct ValenceCase {
    pub song_id: String,
    pub gold_positive: bool,
    pub audio_positive: f64,
    pub text_positive: f64,
}

fn positive_mass(record: &serde_json::Value) -> f64 {
    let labels = record["labels"].as_array().unwrap();
    let probs = record["probs"].as_array().unwrap();
    labels
        .iter()
        .zip(probs)
        .filter(|(l, _)| matches!(l.as_str().unwrap(), "positive" | "Q1" | "Q4"))
        .map(|(_, p)| p.as_f64().unwrap())
        .sum()
}

/// Reads a fusion fixture directory (manifest with signed valence, audio and
/// text predictions) without the library.
pub fn valence_cases(dir: &str) -> Vec<ValenceCase> {
    let manifest = std::fs::read_to_string(fixture(&format!("{dir}/manifest.csv"))).unwrap();
    let mut gold = std::collections::HashMap::new();
    for line in manifest.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        gold.insert(cols[0].to_string(), cols[3].parse::<f64>().unwrap() > 0.0);
    }
    let load = |name: &str| -> std::collections::HashMap<String, f64> {
        let text = std::fs::read_to_string(fixture(&format!("{dir}/{name}"))).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        doc["records"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| (r["song_id"].as_str().unwrap().to_string(), positive_mass(r)))
            .collect()
    };
    let audio = load("audio.json");
    let text = load("text.json");
    let mut ids: Vec<&String> = gold.keys().collect();
    ids.sort();
    ids.into_iter()
        .map(|id| ValenceCase {
            song_id: id.clone(),
            gold_positive: gold[id],
            audio_positive: audio[id],
            text_positive: text[id],
        })
        .collect()
}

/// Exhaustive weighted-fusion sweep over `n + 1` weights i/n, scored with
/// the brute-force macro F1. Returns (weights, scores).
pub fn oracle_sweep(cases: &[ValenceCase], n: usize) -> (Vec<f64>, Vec<f64>) {
    let golds: Vec<usize> = cases.iter().map(|c| usize::from(!c.gold_positive)).collect();
    let mut weights = Vec::new();
    let mut scores = Vec::new();
    for i in 0..=n {
        let w = i as f64 / n as f64;
        let preds: Vec<usize> = cases
            .iter()
            .map(|c| {
                let pos = w * c.audio_positive + (1.0 - w) * c.text_positive;
                let neg = w * (1.0 - c.audio_positive) + (1.0 - w) * (1.0 - c.text_positive);
                usize::from(neg > pos)
            })
            .collect();
        weights.push(w);
        scores.push(oracle_metrics(&golds, &preds, 2).macro_f1);
    }
    (weights, scores)
}

/// Path of a schema or distribution error: the text before the first ": "
/// once the error kind prefix is stripped.
pub fn error_path(e: &moodfuse::Error) -> Option<String> {
    match e {
        moodfuse::Error::Schema { path, .. } => Some(path.clone()),
        moodfuse::Error::DistributionInvalid(msg) => msg.split(": ").next().map(str::to_string),
        _ => None,
    }
}
