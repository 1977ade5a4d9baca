//! Turn a raw reaction corpus into a balanced one: keep balanced lines,
//! complete the rest with byproducts where the completion is unique.

use rayon::prelude::*;
use serde::Serialize;

use crate::balance::{check_balance, infer_byproducts, BalanceStatus, Lexicon};
use crate::reaction::{parse_reaction_smiles, StoichReaction};

use super::GenError;

#[derive(Debug, Clone)]
pub enum LineOutcome {
    Balanced(StoichReaction),
    Rebalanced(StoichReaction),
    Unfixable(String),
    Failed(String),
}

impl LineOutcome {
    pub fn reaction(&self) -> Option<&StoichReaction> {
        match self {
            LineOutcome::Balanced(r) | LineOutcome::Rebalanced(r) => Some(r),
            _ => None,
        }
    }

    /// Classify one `R>G>P` line. Only its first whitespace-separated token
    /// is read, which drops trailing annotations.
    pub fn classify(line: &str, lexicon: &Lexicon) -> LineOutcome {
        let token = line.split_whitespace().next().unwrap_or("");
        let reaction = match parse_reaction_smiles(token) {
            Ok(r) => r,
            Err(e) => return LineOutcome::Failed(e.to_string()),
        };
        if check_balance(&reaction, false).status == BalanceStatus::Balanced {
            return LineOutcome::Balanced(reaction);
        }
        match infer_byproducts(&reaction, lexicon) {
            Ok(r) => LineOutcome::Rebalanced(r),
            Err(e) => LineOutcome::Unfixable(e.to_string()),
        }
    }

    /// Classify a source/target pair. A source holding `R>G` keeps its reagents.
    pub fn classify_pair(src: &str, tgt: &str, lexicon: &Lexicon) -> LineOutcome {
        let src = src.split_whitespace().next().unwrap_or("");
        let tgt = tgt.split_whitespace().next().unwrap_or("");
        let joined = if src.contains('>') { format!("{src}>{tgt}") } else { format!("{src}>>{tgt}") };
        LineOutcome::classify(&joined, lexicon)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub split: String,
    pub total: usize,
    pub balanced: usize,
    pub rebalanced: usize,
    pub unfixable: usize,
    pub failed: usize,
}

impl IngestReport {
    pub fn new(split: &str) -> Self {
        IngestReport { split: split.to_string(), ..Default::default() }
    }

    pub fn absorb(&mut self, outcome: &LineOutcome) {
        self.total += 1;
        match outcome {
            LineOutcome::Balanced(_) => self.balanced += 1,
            LineOutcome::Rebalanced(_) => self.rebalanced += 1,
            LineOutcome::Unfixable(_) => self.unfixable += 1,
            LineOutcome::Failed(_) => self.failed += 1,
        }
    }

    fn pct(&self, n: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * n as f64 / self.total as f64
        }
    }

    /// Share of lines already balanced, in percent.
    pub fn balanced_pct(&self) -> f64 {
        self.pct(self.balanced)
    }

    pub fn rebalanced_pct(&self) -> f64 {
        self.pct(self.rebalanced)
    }

    /// Share of lines kept (balanced or rebalanced), in percent.
    pub fn kept_pct(&self) -> f64 {
        self.pct(self.balanced + self.rebalanced)
    }
}

#[derive(Debug, Clone)]
pub struct IngestOutcome {
    pub report: IngestReport,
    /// Kept reactions in input order.
    pub corpus: Vec<StoichReaction>,
    /// `line N: reason` for every dropped line.
    pub diagnostics: Vec<String>,
}

fn collect(split: &str, outcomes: Vec<LineOutcome>) -> IngestOutcome {
    let mut report = IngestReport::new(split);
    let mut corpus = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        report.absorb(&o);
        match o {
            LineOutcome::Balanced(r) | LineOutcome::Rebalanced(r) => corpus.push(r),
            LineOutcome::Unfixable(e) => diagnostics.push(format!("line {}: unfixable: {e}", i + 1)),
            LineOutcome::Failed(e) => diagnostics.push(format!("line {}: parse error: {e}", i + 1)),
        }
    }
    IngestOutcome { report, corpus, diagnostics }
}

pub fn ingest_reaction_lines(split: &str, lines: &[String], lexicon: &Lexicon) -> IngestOutcome {
    collect(split, lines.par_iter().map(|l| LineOutcome::classify(l, lexicon)).collect())
}

pub fn ingest_pairs(split: &str, src: &[String], tgt: &[String], lexicon: &Lexicon) -> Result<IngestOutcome, GenError> {
    if src.len() != tgt.len() {
        return Err(GenError::Config(format!(
            "split {split}: {} source lines but {} target lines",
            src.len(),
            tgt.len()
        )));
    }
    let outcomes = src.par_iter().zip(tgt).map(|(s, t)| LineOutcome::classify_pair(s, t, lexicon)).collect();
    Ok(collect(split, outcomes))
}
