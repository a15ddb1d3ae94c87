use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::DatasetRecord;

pub const SHINGLE_K: usize = 8;

/// Hashed character k-grams; a nonempty text shorter than `k` is one shingle.
pub fn shingles(text: &str, k: usize) -> BTreeSet<u64> {
    let chars: Vec<char> = text.chars().collect();
    let hash = |s: &[char]| {
        let d = Sha256::digest(s.iter().collect::<String>().as_bytes());
        u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
    };
    if chars.is_empty() {
        return BTreeSet::new();
    }
    if chars.len() < k {
        return BTreeSet::from([hash(&chars)]);
    }
    chars.windows(k).map(hash).collect()
}

fn set_cosine(a: &BTreeSet<u64>, b: &BTreeSet<u64>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 1.0 } else { 0.0 };
    }
    let common = a.intersection(b).count() as f64;
    common / ((a.len() as f64) * (b.len() as f64)).sqrt()
}

pub fn shingle_cosine(a: &str, b: &str) -> f64 {
    set_cosine(&shingles(a, SHINGLE_K), &shingles(b, SHINGLE_K))
}

pub trait SimilarityMeasure {
    fn name(&self) -> String;
    fn similarity(&mut self, a: &str, b: &str) -> f64;
}

#[derive(Default)]
pub struct ShingleCosine {
    cache: HashMap<String, BTreeSet<u64>>,
}

impl SimilarityMeasure for ShingleCosine {
    fn name(&self) -> String {
        format!("shingle-cosine-k{SHINGLE_K}")
    }

    fn similarity(&mut self, a: &str, b: &str) -> f64 {
        for t in [a, b] {
            if !self.cache.contains_key(t) {
                self.cache.insert(t.to_string(), shingles(t, SHINGLE_K));
            }
        }
        set_cosine(&self.cache[a], &self.cache[b])
    }
}

/// Text embedding model, e.g. a subprocess wrapping a sentence encoder.
pub trait Embedder {
    fn name(&self) -> String;
    fn embed(&mut self, text: &str) -> Result<Vec<f64>, String>;
}

pub struct EmbeddingMeasure<E: Embedder> {
    pub embedder: E,
    cache: HashMap<String, Option<Vec<f64>>>,
}

impl<E: Embedder> EmbeddingMeasure<E> {
    pub fn new(embedder: E) -> Self {
        EmbeddingMeasure { embedder, cache: HashMap::new() }
    }

    fn vector(&mut self, t: &str) -> Option<Vec<f64>> {
        if !self.cache.contains_key(t) {
            let v = self.embedder.embed(t).map_err(|e| log::warn!("embedding failed: {e}")).ok();
            self.cache.insert(t.to_string(), v);
        }
        self.cache[t].clone()
    }
}

impl<E: Embedder> SimilarityMeasure for EmbeddingMeasure<E> {
    fn name(&self) -> String {
        format!("embedding:{}", self.embedder.name())
    }

    fn similarity(&mut self, a: &str, b: &str) -> f64 {
        let (Some(x), Some(y)) = (self.vector(a), self.vector(b)) else { return 0.0 };
        let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
        let n = x.iter().map(|p| p * p).sum::<f64>().sqrt() * y.iter().map(|q| q * q).sum::<f64>().sqrt();
        if n == 0.0 {
            0.0
        } else {
            (dot / n).clamp(0.0, 1.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordScore {
    pub id: String,
    pub max_similarity: f64,
    /// Index of the most similar benchmark item.
    pub nearest: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub measure: String,
    pub threshold: f64,
    pub scores: Vec<RecordScore>,
    /// Ten equal-width bins over [0, 1]; 1.0 falls in the last.
    pub histogram: [usize; 10],
    pub flagged: Vec<String>,
}

pub fn similarity_report(dataset: &[DatasetRecord], benchmark: &[String], threshold: f64) -> SimilarityReport {
    similarity_report_with(dataset, benchmark, threshold, &mut ShingleCosine::default())
}

pub fn similarity_report_with(
    dataset: &[DatasetRecord],
    benchmark: &[String],
    threshold: f64,
    measure: &mut dyn SimilarityMeasure,
) -> SimilarityReport {
    let mut scores = Vec::with_capacity(dataset.len());
    let mut histogram = [0usize; 10];
    let mut flagged = Vec::new();
    for r in dataset {
        let mut best = (0.0f64, None);
        for (j, b) in benchmark.iter().enumerate() {
            let s = measure.similarity(&r.text, b);
            if best.1.is_none() || s > best.0 {
                best = (s, Some(j));
            }
        }
        histogram[((best.0 * 10.0) as usize).min(9)] += 1;
        if best.0 > threshold {
            flagged.push(r.id.clone());
        }
        scores.push(RecordScore { id: r.id.clone(), max_similarity: best.0, nearest: best.1 });
    }
    SimilarityReport { measure: measure.name(), threshold, scores, histogram, flagged }
}
