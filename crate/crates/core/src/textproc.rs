//! Tokenization, sentence segmentation and shallow text metrics.
//!
//! Tokens are maximal runs of Unicode letters and digits, lowercased. An
//! apostrophe (`'` or `’`) between two alphanumerics stays inside the token,
//! so `don't` is a single token. Everything else, emoji included, separates
//! tokens and is discarded.

use std::collections::HashSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if is_apostrophe(c)
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

pub fn count_question_marks(text: &str) -> usize {
    text.chars().filter(|&c| c == '?').count()
}

/// Byte spans of the sentences in `text`. A sentence ends at a run of
/// `.`, `?` or `!` (the run counts as one boundary) or at end of text.
/// Spans without any alphanumeric character are not sentences.
pub fn split_sentences(text: &str) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut in_run = false;
    for (i, c) in text.char_indices() {
        if is_terminator(c) {
            in_run = true;
        } else if in_run {
            spans.push(start..i);
            start = i;
            in_run = false;
        }
    }
    if start < text.len() {
        spans.push(start..text.len());
    }
    spans.retain(|r| text[r.clone()].chars().any(char::is_alphanumeric));
    spans
}

/// Distinct tokens over total tokens for the whole token list.
pub fn type_token_ratio<S: AsRef<str>>(tokens: &[S]) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::UndefinedTtr);
    }
    let types: HashSet<&str> = tokens.iter().map(AsRef::as_ref).collect();
    Ok(types.len() as f64 / tokens.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedPost {
    pub tokens: Vec<String>,
    /// Token-index ranges, one per sentence; disjoint, ordered, covering.
    pub sentences: Vec<Range<usize>>,
    pub n_letters: usize,
    pub question_marks: usize,
}

impl TokenizedPost {
    pub fn new(text: &str) -> Self {
        let mut tokens = Vec::new();
        let mut sentences = Vec::new();
        for span in split_sentences(text) {
            let start = tokens.len();
            tokens.extend(tokenize(&text[span]));
            sentences.push(start..tokens.len());
        }
        let n_letters = tokens
            .iter()
            .map(|t| t.chars().filter(|c| c.is_alphabetic()).count())
            .sum();
        TokenizedPost {
            tokens,
            sentences,
            n_letters,
            question_marks: count_question_marks(text),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveFeatures {
    pub n_words: usize,
    pub n_sentences: usize,
    pub words_per_sentence: f64,
    pub letters_per_word: f64,
    /// `None` for a post without tokens.
    pub ttr: Option<f64>,
}

pub fn descriptive_features(post: &TokenizedPost) -> DescriptiveFeatures {
    let n_words = post.tokens.len();
    let n_sentences = post.sentences.len();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    DescriptiveFeatures {
        n_words,
        n_sentences,
        words_per_sentence: ratio(n_words, n_sentences),
        letters_per_word: ratio(post.n_letters, n_words),
        ttr: type_token_ratio(&post.tokens).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("I don't understand."), ["i", "don't", "understand"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("?!... ☹").is_empty());
        let text = "Can someone help?? Thanks!";
        assert_eq!(tokenize(text), ["can", "someone", "help", "thanks"]);
        assert_eq!(count_question_marks(text), 2);
    }

    #[test]
    fn apostrophes() {
        assert_eq!(tokenize("couldn\u{2019}t"), ["couldn't"]);
        assert_eq!(tokenize("'quoted' students' work"), ["quoted", "students", "work"]);
        assert_eq!(tokenize("It's 2nd-year"), ["it's", "2nd", "year"]);
    }

    #[test]
    fn emoji_are_dropped() {
        assert_eq!(tokenize("so sad ☹ 🙂grade"), ["so", "sad", "grade"]);
    }

    #[test]
    fn sentence_examples() {
        assert_eq!(split_sentences("Hello world. Hi.").len(), 2);
        assert_eq!(split_sentences("no terminator here").len(), 1);
        assert_eq!(split_sentences("Really?! Yes.").len(), 2);
        assert!(split_sentences("").is_empty());
        assert_eq!(split_sentences("Hi. ?! ...").len(), 1);
    }

    #[test]
    fn descriptive_example() {
        let d = descriptive_features(&TokenizedPost::new("Hello world. Hi."));
        assert_eq!(d.n_words, 3);
        assert_eq!(d.n_sentences, 2);
        assert_eq!(d.words_per_sentence, 1.5);
        assert_eq!(d.letters_per_word, 4.0);
    }

    #[test]
    fn empty_post_has_undefined_ttr() {
        let d = descriptive_features(&TokenizedPost::new("  ?? "));
        assert_eq!(d.n_words, 0);
        assert_eq!(d.words_per_sentence, 0.0);
        assert_eq!(d.ttr, None);
    }

    #[test]
    fn ttr_examples() {
        let d = descriptive_features(&TokenizedPost::new("one two three four five six"));
        assert_eq!(d.ttr, Some(1.0));
        assert_eq!(type_token_ratio(&["the", "cat", "the"]).unwrap(), 2.0 / 3.0);
        assert_eq!(type_token_ratio(&["a", "b", "c", "d"]).unwrap(), 1.0);
        assert_eq!(type_token_ratio(&["a", "a", "a", "a"]).unwrap(), 0.25);
        let t = tokenize("I don't understand, I don't know");
        assert!((type_token_ratio(&t).unwrap() - 4.0 / 6.0).abs() < 1e-15);
        assert!(matches!(type_token_ratio::<&str>(&[]), Err(Error::UndefinedTtr)));
    }

    #[test]
    fn sentence_ranges_cover_tokens() {
        let p = TokenizedPost::new("First one. Second, longer sentence?! third");
        assert_eq!(p.sentences, vec![0..2, 2..5, 5..6]);
    }

    fn forum_text() -> impl Strategy<Value = String> {
        proptest::string::string_regex("[A-Za-z0-9 .,?!'\\-]{0,80}").unwrap()
    }

    proptest! {
        #[test]
        fn token_additivity(text in forum_text()) {
            let joined: Vec<String> = split_sentences(&text)
                .into_iter()
                .flat_map(|r| tokenize(&text[r]))
                .collect();
            prop_assert_eq!(joined, tokenize(&text));
        }

        #[test]
        fn case_invariance(text in forum_text()) {
            prop_assert_eq!(tokenize(&text.to_uppercase()), tokenize(&text));
        }

        #[test]
        fn ttr_bounds(words in proptest::collection::vec("[a-e]{1,2}", 1..40)) {
            let n = words.len() as f64;
            let ttr = type_token_ratio(&words).unwrap();
            prop_assert!(ttr <= 1.0 && ttr >= 1.0 / n);
            let doubled: Vec<String> = words.iter().chain(&words).cloned().collect();
            prop_assert!(type_token_ratio(&doubled).unwrap() <= ttr);
        }

        #[test]
        fn sentence_ranges_partition(text in forum_text()) {
            let p = TokenizedPost::new(&text);
            let mut next = 0;
            for r in &p.sentences {
                prop_assert_eq!(r.start, next);
                prop_assert!(r.end > r.start);
                next = r.end;
            }
            prop_assert_eq!(next, p.tokens.len());
            prop_assert!(p.tokens.iter().all(|t| !t.is_empty()));
        }
    }
}
