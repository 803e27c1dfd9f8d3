//! Planted-signal corpus generator. Confused posts draw words from five
//! signal categories at a multiple of the non-confused rate; everything else
//! (topic words, politeness, filler) is class-independent. Two variants
//! share the signal but differ in filler vocabulary and topic noise, which
//! stands in for a change of subject domain.

use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Domain, NeutralPolicy, Post};
use crate::error::{Error, Result};

/// Categories whose rate differs between the classes.
pub const PLANTED_CATEGORIES: [&str; 5] = [
    "negations",
    "question_bigram",
    "first_person_singular",
    "confusion_expressions",
    "problem_solving",
];

/// Phrases that hit exactly their own signal category in the seed lexicons
/// (first-person words also count towards all_pronouns).
const SIGNAL: [&[&str]; 5] = [
    &["never", "nobody", "neither", "nowhere", "cannot", "won't", "isn't", "aren't", "wasn't", "hasn't"],
    &["can anyone", "could someone", "any suggestions", "does anyone", "any ideas", "anyone else", "any help", "can anybody"],
    &["i", "me", "my", "myself", "i'm", "i've"],
    &["confused", "puzzled", "baffled", "perplexed", "clueless", "unclear", "stuck", "struggling"],
    &["issue", "issues", "solution", "solve", "workaround", "troubleshoot", "resolve", "doubts"],
];

const FUNCTION_WORDS: &[&str] = &["the", "a", "of", "and", "to", "in", "for", "on", "with", "about", "from", "at", "as", "by"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Course-material vocabulary with heavier pedagogical noise.
    #[default]
    A,
    /// Clinical vocabulary with heavier politeness/sentiment noise.
    B,
}

struct VariantVocab {
    filler: &'static [&'static str],
    /// (phrases, per-slot probability), identical for both classes.
    noise: &'static [(&'static [&'static str], f64)],
    domain: Domain,
}

const VOCAB_A: VariantVocab = VariantVocab {
    filler: &[
        "material", "section", "notes", "chapter", "topic", "example", "concept", "page", "student", "students",
        "formula", "table", "figure", "graph", "data", "model", "theory", "method", "step", "steps", "part",
        "values", "result", "results", "definition", "case", "point", "line", "sample", "variable",
    ],
    noise: &[
        (&["lecture", "syllabus", "assignment", "exam", "module", "professor", "slides", "homework"], 0.06),
        (&["thanks", "please", "cheers", "appreciate"], 0.02),
        (&["this", "that", "these", "those"], 0.04),
        (&["great", "interesting", "helpful", "nice"], 0.02),
        (&["they", "their", "them"], 0.02),
        (&["tomorrow", "soon", "later", "next"], 0.01),
    ],
    domain: Domain::Education,
};

const VOCAB_B: VariantVocab = VariantVocab {
    filler: &[
        "patient", "patients", "dose", "symptom", "symptoms", "clinic", "treatment", "blood", "heart", "cells",
        "tissue", "drug", "therapy", "nurse", "ward", "diagnosis", "pressure", "infection", "organ", "muscle",
        "bone", "skin", "brain", "protein", "enzyme", "vein", "artery", "lung", "liver", "kidney",
    ],
    noise: &[
        (&["lecture", "course", "reading", "textbook"], 0.02),
        (&["thanks", "thank you", "please", "much appreciated", "kindly"], 0.05),
        (&["this", "that"], 0.03),
        (&["good", "excellent", "useful", "wonderful", "clear"], 0.04),
        (&["you", "your"], 0.03),
        (&["worried", "anxious", "nervous"], 0.01),
        (&["feel", "urgent", "eager"], 0.01),
    ],
    domain: Domain::Medicine,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_posts: usize,
    /// Share of confused posts (1:3 imbalance is 0.25).
    pub confused_fraction: f64,
    /// Per-word probability of each signal category in non-confused posts.
    pub base_rate: f64,
    /// Confused posts use `base_rate × enrichment`.
    pub enrichment: f64,
    pub min_words: usize,
    pub max_words: usize,
    pub variant: Variant,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_posts: 2000,
            confused_fraction: 0.25,
            base_rate: 0.04,
            enrichment: 3.0,
            min_words: 25,
            max_words: 60,
            variant: Variant::A,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    fn validate(&self) -> Result<()> {
        let top = self.base_rate * self.enrichment.max(1.0) * SIGNAL.len() as f64;
        if !(0.0..=1.0).contains(&self.confused_fraction) || self.base_rate < 0.0 || top > 0.8 {
            return Err(Error::InvalidParameter(
                "generator rates must leave room for noise and filler words".into(),
            ));
        }
        if self.min_words == 0 || self.min_words > self.max_words {
            return Err(Error::InvalidParameter("need 1 <= min_words <= max_words".into()));
        }
        Ok(())
    }
}

fn vocab(v: Variant) -> &'static VariantVocab {
    match v {
        Variant::A => &VOCAB_A,
        Variant::B => &VOCAB_B,
    }
}

fn compose(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig, confused: bool) -> String {
    let vocab = vocab(cfg.variant);
    let rate = if confused { cfg.base_rate * cfg.enrichment } else { cfg.base_rate };
    let n_slots = rng.random_range(cfg.min_words..=cfg.max_words);
    let mut words: Vec<&str> = Vec::with_capacity(n_slots + 8);
    for _ in 0..n_slots {
        let mut u: f64 = rng.random();
        let mut picked = None;
        for phrases in SIGNAL {
            if u < rate {
                picked = phrases.choose(rng).copied();
                break;
            }
            u -= rate;
        }
        if picked.is_none() {
            for (phrases, p) in vocab.noise {
                if u < *p {
                    picked = phrases.choose(rng).copied();
                    break;
                }
                u -= p;
            }
        }
        let word = picked.unwrap_or_else(|| {
            if rng.random_bool(0.45) {
                FUNCTION_WORDS.choose(rng).unwrap()
            } else {
                vocab.filler.choose(rng).unwrap()
            }
        });
        words.push(word);
    }

    let mut text = String::new();
    let mut i = 0;
    while i < words.len() {
        let len = rng.random_range(6..=14).min(words.len() - i);
        let sentence = words[i..i + len].join(" ");
        let mut chars = sentence.chars();
        if let Some(first) = chars.next() {
            text.extend(first.to_uppercase());
            text.push_str(chars.as_str());
        }
        text.push_str(if rng.random_bool(0.2) { "? " } else { ". " });
        i += len;
    }
    text.truncate(text.trim_end().len());
    text
}

/// Posts with exactly round(n × confused_fraction) confused ones, in a
/// shuffled order. Confused posts get scores 5 to 7, the rest 1 to 3.
pub fn generate_posts(cfg: &GeneratorConfig) -> Result<Vec<Post>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_confused = (cfg.n_posts as f64 * cfg.confused_fraction).round() as usize;
    let mut flags: Vec<bool> = (0..cfg.n_posts).map(|i| i < n_confused).collect();
    flags.shuffle(&mut rng);
    let domain = vocab(cfg.variant).domain.clone();
    Ok(flags
        .into_iter()
        .enumerate()
        .map(|(i, confused)| {
            let text = compose(&mut rng, cfg, confused);
            let score = if confused { rng.random_range(5..=7) } else { rng.random_range(1..=3) };
            Post {
                id: format!("{}-{i}", domain.to_string().to_lowercase()),
                text,
                confusion_score: score as f64,
                domain: domain.clone(),
            }
        })
        .collect())
}

pub fn generate_corpus(cfg: &GeneratorConfig) -> Result<Corpus> {
    Corpus::from_posts(generate_posts(cfg)?, NeutralPolicy::IncludeAsConfused)
}

/// Writes posts as a CSV readable with the default manifest
/// (`Text`, `Confusion`, `Domain`, plus an `id` column).
pub fn write_posts_csv(posts: &[Post], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["id", "Text", "Confusion", "Domain"]).map_err(csv_err)?;
    for p in posts {
        w.write_record([p.id.as_str(), &p.text, &p.confusion_score.to_string(), &p.domain.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
