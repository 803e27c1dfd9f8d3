//! Tokenization, sentence splitting and the descriptive post-shape features,
//! then per-class descriptive statistics over a generated corpus.

use confusion_detect::corpus::corpus_stats;
use confusion_detect::synth::{generate_corpus, GeneratorConfig};
use confusion_detect::textproc::{descriptive_features, split_sentences, tokenize, TokenizedPost};

fn main() -> confusion_detect::Result<()> {
    let text = "I don't get it. Can anyone explain step 3?? It's the part after the quiz!";
    println!("tokens:    {:?}", tokenize(text));
    for span in split_sentences(text) {
        println!("sentence:  {:?}", &text[span]);
    }
    let post = TokenizedPost::new(text);
    let d = descriptive_features(&post);
    println!(
        "words={} sentences={} words/sentence={:.2} letters/word={:.2} ttr={:?} question marks={}",
        d.n_words, d.n_sentences, d.words_per_sentence, d.letters_per_word, d.ttr, post.question_marks
    );

    let corpus = generate_corpus(&GeneratorConfig { n_posts: 400, ..Default::default() })?;
    let features: Vec<_> = corpus
        .posts()
        .iter()
        .map(|p| descriptive_features(&TokenizedPost::new(&p.text)))
        .collect();
    println!("\n{:<12} {:>6} {:>16} {:>16} {:>16}", "class", "posts", "sentences/post", "words/post", "letters/word");
    for (label, s) in corpus_stats(&corpus, &features)? {
        println!(
            "{:<12} {:>6} {:>8.2} ± {:<5.2} {:>8.2} ± {:<5.2} {:>8.2} ± {:<5.2}",
            label.as_str(),
            s.n_posts,
            s.mean_sentences_per_post,
            s.sd_sentences_per_post,
            s.mean_words_per_post,
            s.sd_words_per_post,
            s.mean_letters_per_word,
            s.sd_letters_per_word
        );
    }
    Ok(())
}
