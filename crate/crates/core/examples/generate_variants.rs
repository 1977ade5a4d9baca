//! Generate all eight dataset variants from the bundled desk corpus.
//!
//! cargo run --example generate_variants -- OUT_DIR

use std::path::{Path, PathBuf};

use chemalgebra::benchgen::{load_corpus, make_dataset, write_variant, DistributionConfig, VariantConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("chemalgebra-example"));
    let corpus = load_corpus(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/desk_corpus"))?;
    println!("corpus: {} train, {} valid, {} test", corpus.train.len(), corpus.valid.len(), corpus.test.len());

    for cfg in VariantConfig::all(DistributionConfig::with_seed(7)) {
        let v = make_dataset(&corpus, &cfg)?;
        let dir = write_variant(&v, &out)?;
        let first = &v.file("src-train.txt").unwrap()[0];
        println!("{:<22} {:>4} training pairs  e.g. {first}", cfg.name(), v.file("src-train.txt").unwrap().len());
        debug_assert!(dir.starts_with(&out));
    }
    println!("written under {}", out.display());
    Ok(())
}
