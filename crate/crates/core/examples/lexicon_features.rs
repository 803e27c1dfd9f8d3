//! Lexicon matching and the feature vector of a single post.
//!
//! Pass a lexicon directory (one `<category>.txt` per category) to use it
//! instead of the built-in seed lexicons.

use confusion_detect::features::{featurize_text, lexicon_hits};
use confusion_detect::lexicon::{load_registry, match_category, Lexicon, LexiconRegistry};
use confusion_detect::textproc::{tokenize, TokenizedPost};

fn main() -> confusion_detect::Result<()> {
    let registry = match std::env::args().nth(1) {
        Some(dir) => load_registry(dir)?,
        None => LexiconRegistry::seed(),
    };

    // Longest match wins and matches never overlap.
    let custom = Lexicon::parse("demo", "not sure\nsure\nnot\n")?;
    let toks = tokenize("I'm not sure, but I'm sure it's not that");
    println!("demo lexicon hits: {}", match_category(&toks, &custom));

    let text = "I'm confused about the quiz. Can anyone help me with question 2? I never got it.";
    let post = TokenizedPost::new(text);
    println!("\ncategory hits:");
    for (cat, n) in lexicon_hits(&post, &registry).into_iter().filter(|(_, n)| *n > 0) {
        println!("  {cat:<28} {n}");
    }

    let (schema, v) = featurize_text("example", text, &registry);
    println!("\n{} features, schema {}", schema.len(), &schema.hash()[..16]);
    for (name, value) in schema.names().iter().zip(&v.values).filter(|(_, x)| **x != 0.0) {
        println!("  {name:<33} {value:.4}");
    }
    Ok(())
}
