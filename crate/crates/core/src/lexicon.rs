//! Named word/phrase lists and category counting.
//!
//! A registry directory holds one `<category>.txt` file per category: UTF-8,
//! one phrase of 1–4 tokens per line, `#` starting a comment line. A comment
//! of the form `# polarity: confused|non_confused|neutral` overrides the
//! category's polarity hint.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::tokenize;

/// Longest phrase, in tokens, a lexicon entry may have.
pub const MAX_PHRASE_TOKENS: usize = 4;

/// Categories every registry must provide, in schema order.
pub const REQUIRED_CATEGORIES: [&str; 21] = [
    "negations",
    "question_stem",
    "question_bigram",
    "confusion_expressions",
    "incompleteness",
    "error_words",
    "problem_solving",
    "pedagogical",
    "gratitude_politeness",
    "first_person_singular",
    "second_person_pronouns",
    "third_person_pronouns",
    "all_pronouns",
    "demonstrative_determiners",
    "opinion",
    "future_words",
    "positive_sentiment",
    "negative_sentiment",
    "arousal",
    "positive_emotion",
    "negative_emotion",
];

/// Categories whose predictive direction was found to flip between subject
/// domains; cross-domain runs can leave them out.
pub const DOMAIN_INCOMPATIBLE: [&str; 4] = [
    "question_stem",
    "confusion_expressions",
    "incompleteness",
    "opinion",
];

/// Which class a category tends to indicate. Metadata only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    ConfusedIndicator,
    NonConfusedIndicator,
    Neutral,
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "confused" | "confused_indicator" => Ok(Polarity::ConfusedIndicator),
            "non_confused" | "non_confused_indicator" => Ok(Polarity::NonConfusedIndicator),
            "neutral" => Ok(Polarity::Neutral),
            other => Err(format!("unknown polarity {other:?}")),
        }
    }
}

fn default_polarity(category: &str) -> Polarity {
    use Polarity::*;
    match category {
        "negations" | "question_stem" | "question_bigram" | "confusion_expressions"
        | "incompleteness" | "problem_solving" | "pedagogical" | "gratitude_politeness"
        | "first_person_singular" | "all_pronouns" | "negative_sentiment"
        | "negative_emotion" => ConfusedIndicator,
        "second_person_pronouns" | "third_person_pronouns" | "demonstrative_determiners"
        | "opinion" | "future_words" | "positive_sentiment" | "arousal"
        | "positive_emotion" => NonConfusedIndicator,
        _ => Neutral,
    }
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    name: String,
    polarity: Polarity,
    phrases: HashSet<Vec<String>>,
    first_tokens: HashSet<String>,
    max_len: usize,
}

impl Lexicon {
    /// Builds a lexicon from raw phrases. Phrases are normalized with the
    /// post tokenizer, so matching sees exactly what featurization sees.
    pub fn new<I, S>(name: &str, polarity: Polarity, phrases: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = HashSet::new();
        for raw in phrases {
            let raw = raw.as_ref();
            let tokens = tokenize(raw);
            if tokens.is_empty()
                || tokens.len() > MAX_PHRASE_TOKENS
                || raw.chars().any(|c| matches!(c, '.' | '?' | '!'))
            {
                return Err(Error::InvalidLexiconEntry {
                    category: name.to_string(),
                    entry: raw.to_string(),
                });
            }
            set.insert(tokens);
        }
        if set.is_empty() {
            return Err(Error::EmptyLexicon(name.to_string()));
        }
        let first_tokens = set.iter().map(|p| p[0].clone()).collect();
        let max_len = set.iter().map(Vec::len).max().unwrap_or(1);
        Ok(Lexicon {
            name: name.to_string(),
            polarity,
            phrases: set,
            first_tokens,
            max_len,
        })
    }

    /// Parses the lexicon file format.
    pub fn parse(name: &str, src: &str) -> Result<Self> {
        let mut polarity = default_polarity(name);
        let mut phrases = Vec::new();
        for line in src.lines() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(p) = comment.trim().strip_prefix("polarity:") {
                    polarity = p.parse().map_err(|_| Error::InvalidLexiconEntry {
                        category: name.to_string(),
                        entry: line.to_string(),
                    })?;
                }
                continue;
            }
            if !line.is_empty() {
                phrases.push(line);
            }
        }
        Lexicon::new(name, polarity, phrases)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.phrases.contains(&tokenize(phrase))
    }

    /// Entries as space-joined phrases, sorted.
    pub fn entries(&self) -> BTreeSet<String> {
        self.phrases.iter().map(|p| p.join(" ")).collect()
    }
}

/// Counts non-overlapping matches of `lexicon` in `tokens`, scanning left to
/// right and taking the longest entry that matches at each position.
pub fn match_category<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> usize {
    let tokens: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    let mut key: Vec<String> = Vec::with_capacity(lexicon.max_len);
    let mut count = 0;
    let mut i = 0;
    while i < tokens.len() {
        if !lexicon.first_tokens.contains(tokens[i]) {
            i += 1;
            continue;
        }
        let longest = lexicon.max_len.min(tokens.len() - i);
        key.clear();
        key.extend(tokens[i..i + longest].iter().map(|t| t.to_string()));
        let mut matched = 0;
        for len in (1..=longest).rev() {
            if lexicon.phrases.contains(&key[..len]) {
                matched = len;
                break;
            }
        }
        if matched > 0 {
            count += 1;
            i += matched;
        } else {
            i += 1;
        }
    }
    count
}

/// An immutable set of uniquely named lexicons. Required categories come
/// first in [`REQUIRED_CATEGORIES`] order; any extra categories follow in
/// name order.
#[derive(Debug, Clone)]
pub struct LexiconRegistry {
    lexicons: Vec<Lexicon>,
}

macro_rules! seed_files {
    ($($name:literal),* $(,)?) => {
        [$(($name, include_str!(concat!("../lexicons/", $name, ".txt")))),*]
    };
}

const SEED: [(&str, &str); 21] = seed_files![
    "negations",
    "question_stem",
    "question_bigram",
    "confusion_expressions",
    "incompleteness",
    "error_words",
    "problem_solving",
    "pedagogical",
    "gratitude_politeness",
    "first_person_singular",
    "second_person_pronouns",
    "third_person_pronouns",
    "all_pronouns",
    "demonstrative_determiners",
    "opinion",
    "future_words",
    "positive_sentiment",
    "negative_sentiment",
    "arousal",
    "positive_emotion",
    "negative_emotion",
];

impl LexiconRegistry {
    pub fn from_lexicons(lexicons: Vec<Lexicon>) -> Result<Self> {
        let mut required = Vec::new();
        let mut extra = Vec::new();
        let mut seen = HashSet::new();
        for lex in lexicons {
            if !seen.insert(lex.name.clone()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate lexicon name {:?}",
                    lex.name
                )));
            }
            if REQUIRED_CATEGORIES.contains(&lex.name.as_str()) {
                required.push(lex);
            } else {
                extra.push(lex);
            }
        }
        if let Some(missing) = REQUIRED_CATEGORIES.iter().find(|c| !seen.contains(**c)) {
            return Err(Error::MissingCategory(missing.to_string()));
        }
        required.sort_by_key(|l| {
            REQUIRED_CATEGORIES
                .iter()
                .position(|c| *c == l.name)
                .expect("required")
        });
        extra.sort_by(|a, b| a.name.cmp(&b.name));
        required.extend(extra);
        Ok(LexiconRegistry { lexicons: required })
    }

    /// The lexicons shipped in the crate's `lexicons/` directory.
    pub fn seed() -> Self {
        let lexicons = SEED
            .iter()
            .map(|(name, src)| Lexicon::parse(name, src).expect("seed lexicon is valid"))
            .collect();
        Self::from_lexicons(lexicons).expect("seed registry is complete")
    }

    pub fn lexicons(&self) -> &[Lexicon] {
        &self.lexicons
    }

    pub fn get(&self, name: &str) -> Option<&Lexicon> {
        self.lexicons.iter().find(|l| l.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.lexicons.iter().map(|l| l.name.as_str())
    }
}

/// Loads every `*.txt` file in `dir` as a category named after the file stem.
pub fn load_registry(dir: impl AsRef<Path>) -> Result<LexiconRegistry> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    let present: HashSet<String> = paths
        .iter()
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    if let Some(missing) = REQUIRED_CATEGORIES.iter().find(|c| !present.contains(**c)) {
        return Err(Error::MissingCategory(missing.to_string()));
    }
    let mut lexicons = Vec::with_capacity(paths.len());
    for path in &paths {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        lexicons.push(Lexicon::parse(&name, &src)?);
    }
    LexiconRegistry::from_lexicons(lexicons)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tokens(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn seed_contains_listed_examples() {
        let reg = LexiconRegistry::seed();
        let must = [
            ("negations", &["not", "couldn't", "do not", "don't"][..]),
            ("question_bigram", &["can someone", "what if", "any suggestion"]),
            (
                "pedagogical",
                &["lecture", "class", "lecturer", "grade", "video", "assessment", "quiz", "assignment"],
            ),
            ("question_stem", &["what", "how", "who", "why"]),
            ("confusion_expressions", &["exhaust", "don't understand"]),
            ("incompleteness", &["missing", "incomplete"]),
            ("error_words", &["wrong", "incorrect"]),
            ("problem_solving", &["problem", "issue", "question", "doubt"]),
            ("gratitude_politeness", &["appreciate", "please", "sorry"]),
            ("first_person_singular", &["i", "me"]),
            ("second_person_pronouns", &["you", "your"]),
            ("third_person_pronouns", &["he", "she", "them"]),
            ("demonstrative_determiners", &["this", "these"]),
            ("opinion", &["i believe", "probably", "i think"]),
            ("future_words", &["will", "might", "would"]),
            ("positive_sentiment", &["love", "like", "excite"]),
            ("negative_sentiment", &["dislike", "hate", "unable", "awful", "stress"]),
            ("arousal", &["feel", "excite", "impatient"]),
            ("positive_emotion", &["pleasure", "enjoyment"]),
            ("negative_emotion", &["anger", "fear", "disgust"]),
        ];
        for (cat, words) in must {
            let lex = reg.get(cat).unwrap();
            for w in words {
                assert!(lex.contains(w), "{cat} lacks {w}");
            }
        }
        let names: Vec<&str> = reg.names().collect();
        assert_eq!(names, REQUIRED_CATEGORIES);
    }

    #[test]
    fn matching_examples() {
        let reg = LexiconRegistry::seed();
        let conf = reg.get("confusion_expressions").unwrap();
        assert_eq!(match_category(&tokens("I don't understand this"), conf), 1);
        assert_eq!(match_category::<&str>(&[], conf), 0);

        let neg = Lexicon::new("neg", Polarity::Neutral, ["do not", "not"]).unwrap();
        assert_eq!(match_category(&tokens("do not do not"), &neg), 2);
        assert_eq!(match_category(&tokens("not do"), &neg), 1);
    }

    #[test]
    fn longest_match_wins() {
        let lex = Lexicon::new("x", Polarity::Neutral, ["a", "a b", "a b c d"]).unwrap();
        assert_eq!(match_category(&tokens("a b c d a b a"), &lex), 3);
        assert_eq!(match_category(&tokens("a b c"), &lex), 1);
    }

    #[test]
    fn parse_dedups_and_lowercases() {
        let lex = Lexicon::parse("politeness", "# thanks\nplease\nplease\n\nPlease\n").unwrap();
        assert_eq!(lex.len(), 1);
        assert!(lex.contains("please"));
        assert_eq!(lex.polarity(), Polarity::Neutral);
        let lex = Lexicon::parse("x", "# polarity: confused\nfoo").unwrap();
        assert_eq!(lex.polarity(), Polarity::ConfusedIndicator);
    }

    #[test]
    fn invalid_entries() {
        assert!(matches!(
            Lexicon::parse("x", "# only a comment\n"),
            Err(Error::EmptyLexicon(_))
        ));
        assert!(Lexicon::new("x", Polarity::Neutral, ["end."]).is_err());
        assert!(Lexicon::new("x", Polarity::Neutral, ["one two three four five"]).is_err());
        assert!(Lexicon::new("x", Polarity::Neutral, ["???"]).is_err());
    }

    fn write_seed_dir(skip: Option<&str>) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for (name, src) in SEED {
            if Some(name) != skip {
                fs::write(dir.path().join(format!("{name}.txt")), src).unwrap();
            }
        }
        dir
    }

    #[test]
    fn load_from_directory() {
        let dir = write_seed_dir(None);
        fs::write(dir.path().join("hedges.txt"), "kind of\nsort of\n").unwrap();
        let reg = load_registry(dir.path()).unwrap();
        assert!(reg.get("negations").unwrap().contains("do not"));
        assert_eq!(reg.lexicons().last().unwrap().name(), "hedges");
    }

    #[test]
    fn missing_category_is_named() {
        let dir = write_seed_dir(Some("pedagogical"));
        match load_registry(dir.path()) {
            Err(Error::MissingCategory(c)) => assert_eq!(c, "pedagogical"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_category_file_is_error() {
        let dir = write_seed_dir(None);
        fs::write(dir.path().join("opinion.txt"), "\n# nothing\n").unwrap();
        assert!(matches!(load_registry(dir.path()), Err(Error::EmptyLexicon(_))));
    }

    #[test]
    fn adding_single_tokens_never_decreases_counts() {
        let small = Lexicon::new("n", Polarity::Neutral, ["not", "no", "do not"]).unwrap();
        let large = Lexicon::new("n", Polarity::Neutral, ["not", "no", "do not", "never", "do"]).unwrap();
        for text in ["not now no", "do not ever never", "no no no", "nothing", "do do not"] {
            let t = tokens(text);
            assert!(match_category(&t, &large) >= match_category(&t, &small), "{text}");
        }
    }

    #[test]
    fn adding_a_phrase_can_merge_matches() {
        // Longest-match counting is not monotone under phrase additions:
        // "a b" swallows what used to be two single-token hits.
        let small = Lexicon::new("x", Polarity::Neutral, ["a", "b"]).unwrap();
        let large = Lexicon::new("x", Polarity::Neutral, ["a", "b", "a b"]).unwrap();
        let t = tokens("a b");
        assert_eq!(match_category(&t, &small), 2);
        assert_eq!(match_category(&t, &large), 1);
    }
}
