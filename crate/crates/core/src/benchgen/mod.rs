//! Benchmark generation: task instantiation, dataset variants, splits and
//! corpus ingestion.

mod dataset;
mod ingest;
mod tasks;

use std::fmt;
use std::str::FromStr;

use crate::reaction::{Encoding, ReactionError};

pub use dataset::{
    cross_sources, load_corpus, make_cross_split, make_dataset, swap_sources, write_variant, Corpus,
    GeneratedVariant, LineRecord, Source, SPLIT_FILES,
};
pub use ingest::{ingest_pairs, ingest_reaction_lines, IngestOutcome, IngestReport, LineOutcome};
pub use tasks::{distinct_molecules, type1_instance, type2_instance, Type2Draws};

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("{file} line {line}: {source}")]
    Line { file: String, line: usize, source: ReactionError },
    #[error("{file} line {line}: base reaction is not balanced ({report})")]
    Unbalanced { file: String, line: usize, report: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Closed integer interval with `1 ≤ lo ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
}

impl Interval {
    pub fn new(lo: u64, hi: u64) -> Result<Self, GenError> {
        if lo == 0 || lo > hi {
            return Err(GenError::Config(format!("interval [{lo},{hi}] must satisfy 1 <= lo <= hi")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, k: u64) -> bool {
        (self.lo..=self.hi).contains(&k)
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

impl FromStr for Interval {
    type Err = GenError;

    /// `LO-HI`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GenError::Config(format!("interval `{s}` is not of the form LO-HI"));
        let (lo, hi) = s.split_once('-').ok_or_else(bad)?;
        Interval::new(lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DistributionConfig {
    pub s_in: Interval,
    pub s_out: Interval,
    pub seed: u64,
}

impl DistributionConfig {
    pub fn new(s_in: Interval, s_out: Interval, seed: u64) -> Result<Self, GenError> {
        if s_in.overlaps(&s_out) {
            return Err(GenError::Config(format!("s_in {s_in} and s_out {s_out} overlap")));
        }
        Ok(DistributionConfig { s_in, s_out, seed })
    }

    /// `[1,5]` and `[6,10]`.
    pub fn with_seed(seed: u64) -> Self {
        DistributionConfig { s_in: Interval { lo: 1, hi: 5 }, s_out: Interval { lo: 6, hi: 10 }, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    T1,
    T2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VariantConfig {
    pub encoding: Encoding,
    pub task: Task,
    /// Instantiations per training reaction: 1 or 5.
    pub augmentation: u8,
    pub distribution: DistributionConfig,
}

impl VariantConfig {
    pub fn new(encoding: Encoding, task: Task, augmentation: u8, distribution: DistributionConfig) -> Result<Self, GenError> {
        if !matches!(augmentation, 1 | 5) {
            return Err(GenError::Config(format!("augmentation must be 1 or 5, got {augmentation}")));
        }
        Ok(VariantConfig { encoding, task, augmentation, distribution })
    }

    /// Short form `F_T1_x1`.
    pub fn short_name(&self) -> String {
        let t = match self.task {
            Task::T1 => 1,
            Task::T2 => 2,
        };
        format!("{}_T{}_x{}", self.encoding.tag(), t, self.augmentation)
    }

    /// Directory name `ChemAlgebra_F_T1_x1`.
    pub fn name(&self) -> String {
        format!("ChemAlgebra_{}", self.short_name())
    }

    /// Parse `F_T1_x1` or `ChemAlgebra_F_T1_x1`.
    pub fn parse(name: &str, distribution: DistributionConfig) -> Result<Self, GenError> {
        let bad = || GenError::Config(format!("unknown variant `{name}` (expected e.g. F_T1_x1)"));
        let short = name.strip_prefix("ChemAlgebra_").unwrap_or(name);
        let parts: Vec<&str> = short.split('_').collect();
        let [enc, task, aug] = parts.as_slice() else {
            return Err(bad());
        };
        let encoding = match *enc {
            "F" => Encoding::Formula,
            "S" => Encoding::Smiles,
            _ => return Err(bad()),
        };
        let task = match *task {
            "T1" => Task::T1,
            "T2" => Task::T2,
            _ => return Err(bad()),
        };
        let augmentation = match *aug {
            "x1" => 1,
            "x5" => 5,
            _ => return Err(bad()),
        };
        VariantConfig::new(encoding, task, augmentation, distribution)
    }

    /// The eight combinations of encoding, task and augmentation.
    pub fn all(distribution: DistributionConfig) -> Vec<VariantConfig> {
        let mut out = Vec::new();
        for encoding in [Encoding::Formula, Encoding::Smiles] {
            for task in [Task::T1, Task::T2] {
                for augmentation in [1, 5] {
                    out.push(VariantConfig { encoding, task, augmentation, distribution });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intervals() {
        assert_eq!("1-5".parse::<Interval>().unwrap(), Interval { lo: 1, hi: 5 });
        assert!("0-5".parse::<Interval>().is_err());
        assert!("5-1".parse::<Interval>().is_err());
        assert!("x".parse::<Interval>().is_err());
        let a = Interval::new(1, 5).unwrap();
        assert!(DistributionConfig::new(a, Interval::new(5, 9).unwrap(), 0).is_err());
        assert!(DistributionConfig::new(a, Interval::new(6, 10).unwrap(), 0).is_ok());
    }

    #[test]
    fn variant_names() {
        let d = DistributionConfig::with_seed(7);
        let all = VariantConfig::all(d);
        assert_eq!(all.len(), 8);
        for v in &all {
            assert_eq!(VariantConfig::parse(&v.name(), d).unwrap(), *v);
            assert_eq!(VariantConfig::parse(&v.short_name(), d).unwrap(), *v);
        }
        assert_eq!(all[0].name(), "ChemAlgebra_F_T1_x1");
        assert!(VariantConfig::parse("F_T3_x1", d).is_err());
        assert!(VariantConfig::parse("F_T1_x2", d).is_err());
    }
}
