//! The whole pipeline through the command-line layer: ingest, featurize,
//! select, cross-validate and train, writing every artifact to one
//! directory.
//!
//! ```text
//! cargo run --release --example full_pipeline -- [data.tsv manifest.cfg] [out-dir]
//! ```
//!
//! With a local copy of the Stanford MOOCPosts export, pass it together with
//! a manifest such as
//!
//! ```text
//! text_col=Text
//! score_col=Confusion(1-7)
//! domain=Education
//! delimiter=tab
//! ```
//!
//! Without a dataset a 2,000-post synthetic corpus is generated.

use std::path::PathBuf;

use clap::Parser;
use confusion_detect::cli::{run, Cli, CV_JSON};
use confusion_detect::eval::EvaluationReport;
use confusion_detect::synth::{generate_posts, write_posts_csv, GeneratorConfig};

fn main() -> confusion_detect::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let tmp = tempfile::tempdir().expect("temp dir");
    let (data, manifest, out) = match args.as_slice() {
        [data, manifest, rest @ ..] => (
            PathBuf::from(data),
            Some(PathBuf::from(manifest)),
            rest.first().map_or_else(|| PathBuf::from("confusion-out"), PathBuf::from),
        ),
        _ => {
            let data = tmp.path().join("synthetic.csv");
            write_posts_csv(&generate_posts(&GeneratorConfig { seed: 5, ..Default::default() })?, &data)?;
            let out = args.first().map_or_else(|| tmp.path().join("out"), PathBuf::from);
            (data, None, out)
        }
    };

    let mut argv = vec!["confusion".to_string(), "run".into(), "--data".into(), data.display().to_string()];
    if let Some(m) = &manifest {
        argv.extend(["--manifest".into(), m.display().to_string()]);
    }
    argv.extend(["--seed".into(), "42".into(), "--out".into(), out.display().to_string()]);
    run(&Cli::parse_from(&argv))?;

    let report: EvaluationReport = serde_json::from_slice(&std::fs::read(out.join(CV_JSON)).expect("cv report"))?;
    println!("\nartifacts in {}:", out.display());
    let mut names: Vec<_> = std::fs::read_dir(&out).expect("out dir").flatten().map(|e| e.file_name()).collect();
    names.sort();
    for n in names {
        println!("  {}", n.to_string_lossy());
    }
    println!("features used: {}", report.config.features.join(", "));
    Ok(())
}
