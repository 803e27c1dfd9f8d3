//! Labelled forum posts: ingest from delimited files, binarization of the
//! 1–7 confusion score, and per-class descriptive statistics.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::mean_and_sd;
use crate::textproc::DescriptiveFeatures;

/// Lowest and highest confusion score a coder can assign.
pub const MIN_SCORE: f64 = 1.0;
pub const MAX_SCORE: f64 = 7.0;
/// The neutral score.
pub const NEUTRAL_SCORE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Domain {
    Education,
    Humanities,
    Medicine,
    Other(String),
}

impl From<String> for Domain {
    fn from(s: String) -> Self {
        match s.trim().to_ascii_lowercase().as_str() {
            "education" | "edu" => Domain::Education,
            "humanities" | "hm" | "hum" => Domain::Humanities,
            "medicine" | "med" => Domain::Medicine,
            _ => Domain::Other(s.trim().to_string()),
        }
    }
}

impl From<Domain> for String {
    fn from(d: Domain) -> Self {
        d.to_string()
    }
}

impl FromStr for Domain {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(Domain::from(s.to_string()))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Education => f.write_str("Education"),
            Domain::Humanities => f.write_str("Humanities"),
            Domain::Medicine => f.write_str("Medicine"),
            Domain::Other(name) => f.write_str(name),
        }
    }
}

/// One forum message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub text: String,
    /// Coder score in [1, 7]. Stored as a real so averaged coder scores
    /// (e.g. 4.5) survive ingest.
    pub confusion_score: f64,
    pub domain: Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryLabel {
    Confused,
    NonConfused,
}

impl BinaryLabel {
    /// Confused iff `p_confused >= 0.5`; the tie goes to Confused so that
    /// borderline posts are surfaced rather than missed.
    pub fn from_probability(p_confused: f64) -> Self {
        if p_confused >= 0.5 {
            BinaryLabel::Confused
        } else {
            BinaryLabel::NonConfused
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BinaryLabel::Confused => "confused",
            BinaryLabel::NonConfused => "non_confused",
        }
    }

    pub fn other(self) -> Self {
        match self {
            BinaryLabel::Confused => BinaryLabel::NonConfused,
            BinaryLabel::NonConfused => BinaryLabel::Confused,
        }
    }
}

impl fmt::Display for BinaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BinaryLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "confused" | "1" => Ok(BinaryLabel::Confused),
            "non_confused" | "nonconfused" | "non-confused" | "0" => Ok(BinaryLabel::NonConfused),
            other => Err(Error::Matrix(format!("unknown label {other:?}"))),
        }
    }
}

/// What to do with score-4 posts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeutralPolicy {
    #[default]
    IncludeAsConfused,
    Exclude,
}

impl FromStr for NeutralPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "include" | "include_as_confused" => Ok(NeutralPolicy::IncludeAsConfused),
            "exclude" => Ok(NeutralPolicy::Exclude),
            other => Err(Error::InvalidParameter(format!(
                "neutral policy must be `include` or `exclude`, got {other:?}"
            ))),
        }
    }
}

/// Maps a confusion score onto the binary task. Scores above 4 are
/// confused, below 4 non-confused; exactly 4 depends on `policy`.
pub fn binarize(score: f64, policy: NeutralPolicy) -> Result<Option<BinaryLabel>> {
    if !(MIN_SCORE..=MAX_SCORE).contains(&score) {
        return Err(Error::ScoreOutOfRange(score));
    }
    let label = if score > NEUTRAL_SCORE {
        Some(BinaryLabel::Confused)
    } else if score < NEUTRAL_SCORE {
        Some(BinaryLabel::NonConfused)
    } else {
        match policy {
            NeutralPolicy::IncludeAsConfused => Some(BinaryLabel::Confused),
            NeutralPolicy::Exclude => None,
        }
    };
    Ok(label)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Delimiter {
    Comma,
    Tab,
}

impl Delimiter {
    fn byte(self) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainSource {
    Fixed(Domain),
    Column(String),
}

/// Column mapping for a delimited corpus file.
///
/// The on-disk form is a small `key=value` file:
///
/// ```text
/// # Education forum export
/// text_col=Text
/// score_col=Confusion(1-7)
/// domain=Education
/// delimiter=tab
/// ```
///
/// `id_col` is optional; without it posts are numbered `row-<n>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub text_col: String,
    pub score_col: String,
    pub domain: DomainSource,
    pub id_col: Option<String>,
    pub delimiter: Delimiter,
    /// The domain column was not named explicitly; a missing `Domain` header
    /// is then tolerated.
    #[serde(skip)]
    domain_is_default: bool,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            text_col: "Text".into(),
            score_col: "Confusion".into(),
            domain: DomainSource::Column("Domain".into()),
            id_col: None,
            delimiter: Delimiter::Comma,
            domain_is_default: true,
        }
    }
}

impl Manifest {
    pub fn parse(src: &str) -> Result<Self> {
        let mut m = Manifest::default();
        for (lineno, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Manifest(format!("line {}: expected key=value, got {line:?}", lineno + 1))
            })?;
            let value = value.trim();
            match key.trim() {
                "text_col" => m.text_col = value.to_string(),
                "score_col" => m.score_col = value.to_string(),
                "id_col" => m.id_col = Some(value.to_string()),
                "domain" => {
                    m.domain = DomainSource::Fixed(Domain::from(value.to_string()));
                    m.domain_is_default = false;
                }
                "domain_col" => {
                    m.domain = DomainSource::Column(value.to_string());
                    m.domain_is_default = false;
                }
                "delimiter" => {
                    m.delimiter = match value {
                        "," | "comma" | "csv" => Delimiter::Comma,
                        "\\t" | "tab" | "tsv" => Delimiter::Tab,
                        other => {
                            return Err(Error::Manifest(format!(
                                "delimiter must be comma or tab, got {other:?}"
                            )))
                        }
                    }
                }
                other => {
                    return Err(Error::Manifest(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(m)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCounts {
    pub empty_text: usize,
    pub bad_score: usize,
    pub bad_row: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub skipped: SkipCounts,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub confused: usize,
    pub non_confused: usize,
    /// Posts kept in the corpus but carrying no label under the policy.
    pub excluded: usize,
}

/// An ordered, immutable set of posts with their policy-derived labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    posts: Vec<Post>,
    labels: Vec<Option<BinaryLabel>>,
    domain: Domain,
    policy: NeutralPolicy,
    summary: IngestSummary,
}

impl Corpus {
    /// Builds a corpus from in-memory posts. Every score must be in range.
    pub fn from_posts(posts: Vec<Post>, policy: NeutralPolicy) -> Result<Self> {
        let labels = posts
            .iter()
            .map(|p| binarize(p.confusion_score, policy))
            .collect::<Result<Vec<_>>>()?;
        let domain = common_domain(&posts);
        let summary = IngestSummary {
            rows_read: posts.len(),
            rows_kept: posts.len(),
            skipped: SkipCounts::default(),
        };
        Ok(Corpus {
            posts,
            labels,
            domain,
            policy,
            summary,
        })
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn labels(&self) -> &[Option<BinaryLabel>] {
        &self.labels
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn policy(&self) -> NeutralPolicy {
        self.policy
    }

    pub fn summary(&self) -> &IngestSummary {
        &self.summary
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    /// Posts that carry a label, in corpus order.
    pub fn labelled(&self) -> impl Iterator<Item = (&Post, BinaryLabel)> {
        self.posts
            .iter()
            .zip(&self.labels)
            .filter_map(|(p, l)| l.map(|l| (p, l)))
    }

    pub fn class_counts(&self) -> ClassCounts {
        let mut c = ClassCounts::default();
        for l in &self.labels {
            match l {
                Some(BinaryLabel::Confused) => c.confused += 1,
                Some(BinaryLabel::NonConfused) => c.non_confused += 1,
                None => c.excluded += 1,
            }
        }
        c
    }

    /// Same posts relabelled under another policy.
    pub fn with_policy(&self, policy: NeutralPolicy) -> Self {
        let labels = self
            .posts
            .iter()
            .map(|p| binarize(p.confusion_score, policy).expect("scores validated at ingest"))
            .collect();
        Corpus {
            posts: self.posts.clone(),
            labels,
            domain: self.domain.clone(),
            policy,
            summary: self.summary.clone(),
        }
    }
}

fn common_domain(posts: &[Post]) -> Domain {
    match posts.first() {
        Some(first) if posts.iter().all(|p| p.domain == first.domain) => first.domain.clone(),
        Some(_) => Domain::Other("mixed".into()),
        None => Domain::Other("empty".into()),
    }
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Manifest(format!("column {name:?} not found in header")))
}

/// Reads a delimited corpus file. Invalid rows are skipped and counted in
/// the corpus' [`IngestSummary`].
pub fn load_corpus(
    path: impl AsRef<Path>,
    manifest: &Manifest,
    policy: NeutralPolicy,
) -> Result<Corpus> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(manifest.delimiter.byte())
        .flexible(true)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();

    let text_idx = column_index(&headers, &manifest.text_col)?;
    let score_idx = column_index(&headers, &manifest.score_col)?;
    let id_idx = manifest
        .id_col
        .as_deref()
        .map(|c| column_index(&headers, c))
        .transpose()?;
    let domain_idx = match &manifest.domain {
        DomainSource::Column(c) => match column_index(&headers, c) {
            Ok(i) => Some(i),
            Err(_) if manifest.domain_is_default => None,
            Err(e) => return Err(e),
        },
        DomainSource::Fixed(_) => None,
    };
    let fixed_domain = match &manifest.domain {
        DomainSource::Fixed(d) => d.clone(),
        DomainSource::Column(_) => Domain::Other("unspecified".into()),
    };

    let mut summary = IngestSummary::default();
    let mut posts = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        summary.rows_read += 1;
        let Ok(record) = record else {
            summary.skipped.bad_row += 1;
            continue;
        };
        let (Some(text), Some(score)) = (record.get(text_idx), record.get(score_idx)) else {
            summary.skipped.bad_row += 1;
            continue;
        };
        if text.trim().is_empty() {
            summary.skipped.empty_text += 1;
            continue;
        }
        let Some((score, label)) = score
            .trim()
            .parse::<f64>()
            .ok()
            .and_then(|s| binarize(s, policy).ok().map(|l| (s, l)))
        else {
            summary.skipped.bad_score += 1;
            continue;
        };
        let domain = match domain_idx {
            Some(i) => match record.get(i) {
                Some(d) => Domain::from(d.to_string()),
                None => {
                    summary.skipped.bad_row += 1;
                    continue;
                }
            },
            None => fixed_domain.clone(),
        };
        let id = match id_idx.and_then(|i| record.get(i)) {
            Some(id) if !id.trim().is_empty() => id.trim().to_string(),
            _ => format!("row-{}", row + 1),
        };
        posts.push(Post {
            id,
            text: text.to_string(),
            confusion_score: score,
            domain,
        });
        labels.push(label);
    }
    summary.rows_kept = posts.len();
    let skipped = summary.rows_read - summary.rows_kept;
    if skipped > 0 {
        log::warn!(
            "{}: skipped {skipped} of {} rows ({:?})",
            path.display(),
            summary.rows_read,
            summary.skipped
        );
    }
    if posts.is_empty() {
        return Err(Error::NoValidRows(path.to_path_buf()));
    }
    let domain = common_domain(&posts);
    Ok(Corpus {
        posts,
        labels,
        domain,
        policy,
        summary,
    })
}

/// Per-class means and sample standard deviations of post shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n_posts: usize,
    pub mean_sentences_per_post: f64,
    pub sd_sentences_per_post: f64,
    pub mean_words_per_post: f64,
    pub sd_words_per_post: f64,
    pub mean_words_per_sentence: f64,
    pub sd_words_per_sentence: f64,
    pub mean_letters_per_word: f64,
    pub sd_letters_per_word: f64,
}

/// Table-style descriptive statistics per class. `features` is parallel to
/// `corpus.posts()`. Classes without posts have no entry.
pub fn corpus_stats(
    corpus: &Corpus,
    features: &[DescriptiveFeatures],
) -> Result<BTreeMap<BinaryLabel, DescriptiveStats>> {
    if corpus.is_empty() {
        return Err(Error::InsufficientData("empty corpus".into()));
    }
    if features.len() != corpus.len() {
        return Err(Error::InvalidParameter(format!(
            "{} descriptive records for {} posts",
            features.len(),
            corpus.len()
        )));
    }
    let mut out = BTreeMap::new();
    for class in [BinaryLabel::Confused, BinaryLabel::NonConfused] {
        let group: Vec<&DescriptiveFeatures> = corpus
            .labels()
            .iter()
            .zip(features)
            .filter(|(l, _)| **l == Some(class))
            .map(|(_, f)| f)
            .collect();
        if group.is_empty() {
            continue;
        }
        let col = |f: fn(&DescriptiveFeatures) -> f64| -> (f64, f64) {
            mean_and_sd(&group.iter().map(|d| f(d)).collect::<Vec<_>>())
        };
        let (ms, ss) = col(|d| d.n_sentences as f64);
        let (mw, sw) = col(|d| d.n_words as f64);
        let (mwps, swps) = col(|d| d.words_per_sentence);
        let (ml, sl) = col(|d| d.letters_per_word);
        out.insert(
            class,
            DescriptiveStats {
                n_posts: group.len(),
                mean_sentences_per_post: ms,
                sd_sentences_per_post: ss,
                mean_words_per_post: mw,
                sd_words_per_post: sw,
                mean_words_per_sentence: mwps,
                sd_words_per_sentence: swps,
                mean_letters_per_word: ml,
                sd_letters_per_word: sl,
            },
        );
    }
    Ok(out)
}
