//! Load a delimited corpus through a manifest and compare the two neutral
//! policies.
//!
//! ```text
//! cargo run --example ingest_corpus -- [data.csv] [manifest.cfg]
//! ```
//!
//! Without arguments a small synthetic file is written to a temp dir first.

use confusion_detect::corpus::{load_corpus, Manifest, NeutralPolicy};
use confusion_detect::synth::{generate_posts, write_posts_csv, GeneratorConfig};

fn main() -> confusion_detect::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let tmp = tempfile::tempdir().expect("temp dir");
    let (data, manifest) = match args.as_slice() {
        [data, manifest, ..] => (data.into(), Manifest::from_file(manifest)?),
        [data] => (data.into(), Manifest::default()),
        [] => {
            let path = tmp.path().join("posts.csv");
            let mut posts = generate_posts(&GeneratorConfig { n_posts: 200, ..Default::default() })?;
            // A handful of neutral (score 4) posts so the policies differ.
            for p in posts.iter_mut().step_by(10) {
                p.confusion_score = 4.0;
            }
            write_posts_csv(&posts, &path)?;
            (path, Manifest::parse("id_col = id")?)
        }
    };

    for policy in [NeutralPolicy::IncludeAsConfused, NeutralPolicy::Exclude] {
        let corpus = load_corpus(&data, &manifest, policy)?;
        let c = corpus.class_counts();
        println!(
            "{policy:?}: {} posts from {}, confused {}, non-confused {}, unlabelled {}",
            corpus.len(),
            corpus.domain(),
            c.confused,
            c.non_confused,
            c.excluded
        );
        let s = corpus.summary();
        println!(
            "  rows read {}, kept {}, skipped empty={} bad_score={} bad_row={}",
            s.rows_read, s.rows_kept, s.skipped.empty_text, s.skipped.bad_score, s.skipped.bad_row
        );
    }
    Ok(())
}
