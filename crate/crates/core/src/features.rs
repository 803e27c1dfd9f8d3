//! Feature schema, per-post feature vectors and the feature matrix.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{BinaryLabel, Corpus, Post};
use crate::error::{Error, Result};
use crate::lexicon::{match_category, LexiconRegistry};
use crate::textproc::{descriptive_features, TokenizedPost};

pub const N_WORDS: &str = "n_words";
pub const N_SENTENCES: &str = "n_sentences";
pub const WORDS_PER_SENTENCE: &str = "words_per_sentence";
pub const LETTERS_PER_WORD: &str = "letters_per_word";
pub const TTR: &str = "ttr";
pub const QUESTION_MARK_COUNT: &str = "question_mark_count";
pub const NEUTRAL_SENTIMENT_RATE: &str = "neutral_sentiment_rate";

const DESCRIPTIVE: [&str; 5] = [N_WORDS, N_SENTENCES, WORDS_PER_SENTENCE, LETTERS_PER_WORD, TTR];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// Non-negative integer count.
    Count,
    /// Non-negative real ratio without an upper bound.
    Ratio,
    /// Proportion in [0, 1].
    Rate,
}

impl FeatureKind {
    pub fn of(name: &str) -> Self {
        match name {
            N_WORDS | N_SENTENCES | QUESTION_MARK_COUNT => FeatureKind::Count,
            WORDS_PER_SENTENCE | LETTERS_PER_WORD => FeatureKind::Ratio,
            _ => FeatureKind::Rate,
        }
    }
}

/// Ordered feature names plus a content hash of that order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    names: Vec<String>,
    hash: String,
}

pub(crate) fn schema_hash<S: AsRef<str>>(names: &[S]) -> String {
    let mut h = Sha256::new();
    h.update(b"feature-schema/v1");
    for n in names {
        h.update([0u8]);
        h.update(n.as_ref().as_bytes());
    }
    hex::encode(h.finalize())
}

impl FeatureSchema {
    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::Matrix(format!("duplicate feature name {n:?}")));
            }
        }
        let hash = schema_hash(&names);
        Ok(FeatureSchema { names, hash })
    }

    /// Descriptive features, one rate per registry category, then the
    /// question-mark count and the neutral-sentiment rate.
    pub fn for_registry(registry: &LexiconRegistry) -> Self {
        let names = DESCRIPTIVE
            .iter()
            .map(|s| s.to_string())
            .chain(registry.names().map(|n| format!("{n}_rate")))
            .chain([QUESTION_MARK_COUNT.to_string(), NEUTRAL_SENTIMENT_RATE.to_string()])
            .collect();
        FeatureSchema::from_names(names).expect("registry names are unique")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn kind(&self, index: usize) -> FeatureKind {
        FeatureKind::of(&self.names[index])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub post_id: String,
    pub values: Vec<f64>,
    pub label: Option<BinaryLabel>,
    pub is_synthetic: bool,
    /// The post had no tokens; all values are zero.
    #[serde(default)]
    pub degenerate: bool,
}

/// Raw lexicon hit counts for a post, in registry order.
pub fn lexicon_hits(tokenized: &TokenizedPost, registry: &LexiconRegistry) -> Vec<(String, usize)> {
    registry
        .lexicons()
        .iter()
        .map(|lex| (lex.name().to_string(), match_category(&tokenized.tokens, lex)))
        .collect()
}

fn check_schema(registry: &LexiconRegistry, schema: &FeatureSchema) -> Result<()> {
    let expected = FeatureSchema::for_registry(registry);
    if expected.hash != schema.hash {
        return Err(Error::SchemaMismatch {
            expected: expected.hash,
            found: schema.hash.clone(),
        });
    }
    Ok(())
}

fn featurize_unchecked(
    post_id: &str,
    tokenized: &TokenizedPost,
    registry: &LexiconRegistry,
    schema: &FeatureSchema,
) -> FeatureVector {
    let desc = descriptive_features(tokenized);
    let mut values = vec![0.0; schema.len()];
    let degenerate = desc.n_words == 0;
    if !degenerate {
        let n = desc.n_words as f64;
        values[0] = desc.n_words as f64;
        values[1] = desc.n_sentences as f64;
        values[2] = desc.words_per_sentence;
        values[3] = desc.letters_per_word;
        values[4] = desc.ttr.unwrap_or(0.0);
        let base = DESCRIPTIVE.len();
        let mut pos = 0.0;
        let mut neg = 0.0;
        for (i, lex) in registry.lexicons().iter().enumerate() {
            let rate = match_category(&tokenized.tokens, lex) as f64 / n;
            values[base + i] = rate;
            match lex.name() {
                "positive_sentiment" => pos = rate,
                "negative_sentiment" => neg = rate,
                _ => {}
            }
        }
        let tail = base + registry.lexicons().len();
        values[tail] = tokenized.question_marks as f64;
        values[tail + 1] = (1.0 - pos - neg).max(0.0);
    }
    FeatureVector {
        post_id: post_id.to_string(),
        values,
        label: None,
        is_synthetic: false,
        degenerate,
    }
}

/// Feature vector for one post. Category features are match counts divided
/// by the word count; word, sentence and question-mark features are raw
/// counts. A post without tokens yields an all-zero, degenerate vector.
pub fn featurize(
    post: &Post,
    tokenized: &TokenizedPost,
    registry: &LexiconRegistry,
    schema: &FeatureSchema,
) -> Result<FeatureVector> {
    check_schema(registry, schema)?;
    Ok(featurize_unchecked(&post.id, tokenized, registry, schema))
}

/// Featurizes raw text under the registry's own schema.
pub fn featurize_text(id: &str, text: &str, registry: &LexiconRegistry) -> (FeatureSchema, FeatureVector) {
    let schema = FeatureSchema::for_registry(registry);
    let v = featurize_unchecked(id, &TokenizedPost::new(text), registry, &schema);
    (schema, v)
}

/// One row per labelled post, in corpus order.
pub fn featurize_corpus(
    corpus: &Corpus,
    registry: &LexiconRegistry,
    schema: &FeatureSchema,
) -> Result<FeatureMatrix> {
    check_schema(registry, schema)?;
    let labelled: Vec<(&Post, BinaryLabel)> = corpus.labelled().collect();
    let rows: Vec<FeatureVector> = labelled
        .par_iter()
        .map(|(post, label)| {
            let tok = TokenizedPost::new(&post.text);
            let mut v = featurize_unchecked(&post.id, &tok, registry, schema);
            v.label = Some(*label);
            v
        })
        .collect();
    let degenerate = rows.iter().filter(|r| r.degenerate).count();
    if degenerate > 0 {
        log::warn!("{degenerate} posts had no tokens and were featurized as zero vectors");
    }
    FeatureMatrix::new(schema.clone(), rows)
}

/// Rows of feature vectors under one schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    schema: FeatureSchema,
    rows: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn new(schema: FeatureSchema, rows: Vec<FeatureVector>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.values.len() != schema.len()) {
            return Err(Error::Matrix(format!(
                "row {} has {} values, schema has {}",
                bad.post_id,
                bad.values.len(),
                schema.len()
            )));
        }
        Ok(FeatureMatrix { schema, rows })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn rows(&self) -> &[FeatureVector] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<FeatureVector> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[index]).collect()
    }

    pub fn labels(&self) -> Vec<Option<BinaryLabel>> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// (confused, non-confused) row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        self.rows.iter().fold((0, 0), |(c, n), r| match r.label {
            Some(BinaryLabel::Confused) => (c + 1, n),
            Some(BinaryLabel::NonConfused) => (c, n + 1),
            None => (c, n),
        })
    }

    /// Subset of rows by index, preserving the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Keeps only the named columns, in the given order.
    pub fn project<S: AsRef<str>>(&self, names: &[S]) -> Result<FeatureMatrix> {
        let idx = names
            .iter()
            .map(|n| {
                self.schema
                    .index_of(n.as_ref())
                    .ok_or_else(|| Error::UnknownFeature(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let schema =
            FeatureSchema::from_names(names.iter().map(|n| n.as_ref().to_string()).collect())?;
        let rows = self
            .rows
            .iter()
            .map(|r| FeatureVector {
                values: idx.iter().map(|&i| r.values[i]).collect(),
                ..r.clone()
            })
            .collect();
        Ok(FeatureMatrix { schema, rows })
    }

    /// Appends rows under the same schema.
    pub fn extend(&mut self, rows: impl IntoIterator<Item = FeatureVector>) -> Result<()> {
        for r in rows {
            if r.values.len() != self.schema.len() {
                return Err(Error::Matrix(format!("row {} has wrong width", r.post_id)));
            }
            self.rows.push(r);
        }
        Ok(())
    }

    /// Content digest over schema, ids, labels, flags and exact value bits.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.schema.hash.as_bytes());
        for r in &self.rows {
            h.update(r.post_id.as_bytes());
            h.update([0u8]);
            h.update([match r.label {
                Some(BinaryLabel::Confused) => 1u8,
                Some(BinaryLabel::NonConfused) => 2,
                None => 0,
            }]);
            h.update([r.is_synthetic as u8]);
            for v in &r.values {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    /// CSV with `post_id`, the schema columns, then `label` and `is_synthetic`.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |source| Error::Csv {
            path: "<feature matrix>".into(),
            source,
        };
        let mut header = vec!["post_id".to_string()];
        header.extend(self.schema.names.iter().cloned());
        header.push("label".into());
        header.push("is_synthetic".into());
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = Vec::with_capacity(header.len());
            rec.push(r.post_id.clone());
            rec.extend(r.values.iter().map(|v| format!("{v:?}")));
            rec.push(r.label.map(|l| l.as_str().to_string()).unwrap_or_default());
            rec.push(r.is_synthetic.to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("<feature matrix>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(io::BufWriter::new(file))
    }

    pub fn read_csv<R: io::Read>(reader: R) -> Result<Self> {
        let csv_err = |source| Error::Csv {
            path: "<feature matrix>".into(),
            source,
        };
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
        if header.len() < 3
            || header[0] != "post_id"
            || header[header.len() - 2] != "label"
            || header[header.len() - 1] != "is_synthetic"
        {
            return Err(Error::Matrix(
                "header must be post_id,<features>,label,is_synthetic".into(),
            ));
        }
        let names = header[1..header.len() - 2].to_vec();
        let schema = FeatureSchema::from_names(names)?;
        let n_words_idx = schema.index_of(N_WORDS);
        let mut rows = Vec::new();
        for (lineno, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != header.len() {
                return Err(Error::Matrix(format!("line {}: wrong field count", lineno + 2)));
            }
            let values = (1..=schema.len())
                .map(|i| {
                    rec[i].parse::<f64>().map_err(|_| {
                        Error::Matrix(format!("line {}: bad value {:?}", lineno + 2, &rec[i]))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let label = match &rec[header.len() - 2] {
                "" => None,
                s => Some(s.parse()?),
            };
            let is_synthetic = match &rec[header.len() - 1] {
                "true" | "1" => true,
                "false" | "0" => false,
                other => return Err(Error::Matrix(format!("bad is_synthetic {other:?}"))),
            };
            let degenerate = !is_synthetic && n_words_idx.is_some_and(|i| values[i] == 0.0);
            rows.push(FeatureVector {
                post_id: rec[0].to_string(),
                values,
                label,
                is_synthetic,
                degenerate,
            });
        }
        FeatureMatrix::new(schema, rows)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(io::BufReader::new(file))
    }
}

impl fmt::Display for FeatureSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} features [{}]", self.names.len(), &self.hash[..12])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Domain, NeutralPolicy};

    fn post(id: &str, text: &str, score: f64) -> Post {
        Post {
            id: id.into(),
            text: text.into(),
            confusion_score: score,
            domain: Domain::Education,
        }
    }

    fn value(schema: &FeatureSchema, v: &FeatureVector, name: &str) -> f64 {
        v.values[schema.index_of(name).unwrap_or_else(|| panic!("{name}"))]
    }

    #[test]
    fn worked_example_rates() {
        let reg = LexiconRegistry::seed();
        let schema = FeatureSchema::for_registry(&reg);
        let p = post("p", "Can someone help? I don't understand this assignment.", 6.0);
        let tok = TokenizedPost::new(&p.text);
        assert_eq!(tok.tokens.len(), 8);
        let v = featurize(&p, &tok, &reg, &schema).unwrap();
        let eighth = 1.0 / 8.0;
        assert_eq!(value(&schema, &v, QUESTION_MARK_COUNT), 1.0);
        assert_eq!(value(&schema, &v, N_WORDS), 8.0);
        assert_eq!(value(&schema, &v, N_SENTENCES), 2.0);
        for cat in [
            "question_bigram",
            "first_person_singular",
            "demonstrative_determiners",
            "pedagogical",
            "confusion_expressions",
            "negations",
            "all_pronouns",
        ] {
            assert_eq!(value(&schema, &v, &format!("{cat}_rate")), eighth, "{cat}");
        }
        for cat in ["question_stem", "opinion", "positive_sentiment", "negative_sentiment"] {
            assert_eq!(value(&schema, &v, &format!("{cat}_rate")), 0.0, "{cat}");
        }
        assert_eq!(value(&schema, &v, NEUTRAL_SENTIMENT_RATE), 1.0);
        assert!(!v.degenerate);
    }

    #[test]
    fn empty_post_is_degenerate_zero_vector() {
        let reg = LexiconRegistry::seed();
        let schema = FeatureSchema::for_registry(&reg);
        let p = post("e", "?!", 2.0);
        let v = featurize(&p, &TokenizedPost::new(&p.text), &reg, &schema).unwrap();
        assert!(v.degenerate);
        assert!(v.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn no_hits_leaves_only_descriptive() {
        let reg = LexiconRegistry::seed();
        let schema = FeatureSchema::for_registry(&reg);
        let p = post("n", "Photosynthesis converts sunlight", 2.0);
        let v = featurize(&p, &TokenizedPost::new(&p.text), &reg, &schema).unwrap();
        for (i, name) in schema.names().iter().enumerate() {
            let nonzero = v.values[i] != 0.0;
            let descriptive = DESCRIPTIVE.contains(&name.as_str()) || name == NEUTRAL_SENTIMENT_RATE;
            assert_eq!(nonzero, descriptive, "{name}");
        }
    }

    #[test]
    fn single_token_single_hit_rate_is_one() {
        let reg = LexiconRegistry::seed();
        let (schema, v) = featurize_text("x", "Please", &reg);
        assert_eq!(value(&schema, &v, "gratitude_politeness_rate"), 1.0);
    }

    #[test]
    fn schema_mismatch_detected() {
        let reg = LexiconRegistry::seed();
        let other = FeatureSchema::from_names(vec!["a".into()]).unwrap();
        let p = post("p", "hi", 1.0);
        assert!(matches!(
            featurize(&p, &TokenizedPost::new("hi"), &reg, &other),
            Err(Error::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn schema_hash_is_pinned() {
        let schema = FeatureSchema::for_registry(&LexiconRegistry::seed());
        assert_eq!(schema.len(), 5 + 21 + 2);
        assert_eq!(schema.hash(), schema_hash(schema.names()));
        let mut swapped = schema.names().to_vec();
        swapped.swap(0, 1);
        assert_ne!(schema_hash(&swapped), schema.hash());
        // Frozen digest; changes here change every saved model's schema guard.
        assert_eq!(
            schema.hash(),
            "9dc9ab3f28524e3c33443fba4e16aeae1bda1522b0286c5439393d3da2b43af3"
        );
    }

    #[test]
    fn corpus_featurization_skips_excluded_and_is_deterministic() {
        let posts = vec![
            post("a", "I don't get it?", 6.0),
            post("b", "Not sure, neutral.", 4.0),
            post("c", "Great lecture, thanks.", 2.0),
        ];
        let corpus = Corpus::from_posts(posts, NeutralPolicy::Exclude).unwrap();
        let reg = LexiconRegistry::seed();
        let schema = FeatureSchema::for_registry(&reg);
        let m = featurize_corpus(&corpus, &reg, &schema).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.rows()[1].post_id, "c");
        let again = featurize_corpus(&corpus, &reg, &schema).unwrap();
        assert_eq!(m, again);
        let inc = featurize_corpus(&corpus.with_policy(NeutralPolicy::IncludeAsConfused), &reg, &schema)
            .unwrap();
        assert_eq!(inc.len(), 3);
    }

    #[test]
    fn csv_round_trip() {
        let posts = vec![post("a", "I don't get it? Help.", 6.0), post("b", "Thanks, great.", 2.0)];
        let corpus = Corpus::from_posts(posts, NeutralPolicy::default()).unwrap();
        let reg = LexiconRegistry::seed();
        let m = featurize_corpus(&corpus, &reg, &FeatureSchema::for_registry(&reg)).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = FeatureMatrix::read_csv(&buf[..]).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.fingerprint(), m.fingerprint());
        let header = String::from_utf8(buf).unwrap();
        assert!(header.starts_with("post_id,n_words,"));
        assert!(header.lines().next().unwrap().ends_with(",label,is_synthetic"));
    }

    #[test]
    fn projection() {
        let reg = LexiconRegistry::seed();
        let (schema, v) = featurize_text("x", "what if I fail?", &reg);
        let m = FeatureMatrix::new(schema, vec![v]).unwrap();
        let p = m.project(&["ttr", "n_words"]).unwrap();
        assert_eq!(p.rows()[0].values, vec![1.0, 4.0]);
        assert!(matches!(m.project(&["nope"]), Err(Error::UnknownFeature(_))));
    }
}
