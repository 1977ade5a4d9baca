//! Scoring predicted product bags against targets.
//!
//! Per sample: exact match, coefficient-aware and molecule-only multiset
//! Jaccard and F1, at-least-one (every target molecule predicted), validity
//! (every predicted molecule parses) and the balance status of the
//! prediction against the source line. Aggregates are means over samples,
//! kept as exact rationals until rendering.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::balance::{compare_sides, BalanceStatus};
use crate::reaction::{parse_stoich_line, print_stoich_line, Encoding, ReactionError, StoichBag};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("line counts differ: src {src}, tgt {tgt}, pred {pred}")]
    LineCountMismatch { src: usize, tgt: usize, pred: usize },
    #[error("{file} line {line}: {source}")]
    Parse { file: &'static str, line: usize, source: ReactionError },
}

/// Multiset true positives, false positives and false negatives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl MatchCounts {
    /// `tp / (tp + fp + fn)`; two empty bags score 1.
    pub fn jaccard(&self) -> BigRational {
        ratio(self.tp, self.tp + self.fp + self.fn_)
    }

    /// `2tp / (2tp + fp + fn)`; two empty bags score 1.
    pub fn f1(&self) -> BigRational {
        ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }
}

fn ratio(num: u64, den: u64) -> BigRational {
    if den == 0 {
        BigRational::from_integer(1.into())
    } else {
        BigRational::new(num.into(), den.into())
    }
}

fn count_with(pred: &StoichBag, truth: &StoichBag, presence: bool) -> MatchCounts {
    let (p, t) = (pred.multiset(), truth.multiset());
    let clip = |v: u64| if presence { v.min(1) } else { v };
    let mut c = MatchCounts::default();
    for (k, pv) in &p {
        let (pv, tv) = (clip(*pv), clip(t.get(k).copied().unwrap_or(0)));
        c.tp += pv.min(tv);
        c.fp += pv.saturating_sub(tv);
    }
    for (k, tv) in &t {
        let (pv, tv) = (clip(p.get(k).copied().unwrap_or(0)), clip(*tv));
        c.fn_ += tv.saturating_sub(pv);
    }
    c
}

/// Coefficient-aware counts: per molecule, `min`, and the two overshoots.
pub fn match_bags(pred: &StoichBag, truth: &StoichBag) -> MatchCounts {
    count_with(pred, truth, false)
}

/// Counts with every coefficient collapsed to presence.
pub fn match_molecules_only(pred: &StoichBag, truth: &StoichBag) -> MatchCounts {
    count_with(pred, truth, true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleScore {
    pub exact: bool,
    pub counts: MatchCounts,
    pub mol_counts: MatchCounts,
    pub alo: bool,
    pub valid: bool,
    pub balance: BalanceStatus,
}

/// Parse a prediction item by item, keeping what parses.
pub fn parse_prediction(line: &str, encoding: Encoding) -> (StoichBag, bool) {
    let mut bag = StoichBag::new();
    let mut valid = !line.trim().is_empty();
    for item in line.split('.') {
        match parse_stoich_line(item, encoding) {
            Ok(b) => bag.extend(&b),
            Err(_) => valid = false,
        }
    }
    (bag.normalized(), valid)
}

pub fn score_sample(src: &StoichBag, truth: &StoichBag, pred_line: &str, encoding: Encoding) -> SampleScore {
    let (pred, valid) = parse_prediction(pred_line, encoding);
    let counts = match_bags(&pred, truth);
    let mol_counts = match_molecules_only(&pred, truth);
    SampleScore {
        exact: valid && counts.fp == 0 && counts.fn_ == 0,
        alo: truth.iter().all(|e| pred.coefficient_of(&e.molecule) > 0),
        counts,
        mol_counts,
        valid,
        balance: compare_sides(src, &pred, false).status,
    }
}

/// Dataset-level rates in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub n: usize,
    pub em: BigRational,
    pub jac: BigRational,
    pub f1: BigRational,
    pub mol_jac: BigRational,
    pub mol_f1: BigRational,
    pub alo: BigRational,
    pub val: BigRational,
    pub bal: BigRational,
    pub def: BigRational,
    pub exc: BigRational,
    pub d_e: BigRational,
}

/// Exact percentage with two decimals, rounded half up.
pub fn percent(rate: &BigRational) -> String {
    let scaled = rate * BigRational::from_integer(10_000.into());
    let (num, den) = (scaled.numer().clone(), scaled.denom().clone());
    let twice: BigInt = num * 2 + &den;
    let rounded = twice.div_floor(&(den * 2));
    let (whole, frac) = rounded.div_mod_floor(&BigInt::from(100));
    format!("{whole}.{:02}", frac.to_u32().unwrap_or(0))
}

impl Report {
    fn rows(&self) -> [(&'static str, &BigRational); 11] {
        [
            ("em", &self.em),
            ("jac", &self.jac),
            ("f1", &self.f1),
            ("mol_jac", &self.mol_jac),
            ("mol_f1", &self.mol_f1),
            ("alo", &self.alo),
            ("val", &self.val),
            ("bal", &self.bal),
            ("def", &self.def),
            ("exc", &self.exc),
            ("d_e", &self.d_e),
        ]
    }

    /// `{"n": …, "em": 57.14, …}` with rates as percentages.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("n".into(), self.n.into());
        for (name, rate) in self.rows() {
            let pct: f64 = percent(rate).parse().expect("decimal");
            map.insert(name.into(), serde_json::Number::from_f64(pct).expect("finite").into());
        }
        serde_json::Value::Object(map)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<8} {:>8}", "metric", "value")?;
        writeln!(f, "{:<8} {:>8}", "n", self.n)?;
        for (name, rate) in self.rows() {
            writeln!(f, "{:<8} {:>7}%", name.to_uppercase(), percent(rate))?;
        }
        Ok(())
    }
}

/// Running sums over samples.
#[derive(Debug, Clone, Default)]
pub struct Aggregator {
    n: usize,
    em: usize,
    jac: BigRational,
    f1: BigRational,
    mol_jac: BigRational,
    mol_f1: BigRational,
    alo: usize,
    val: usize,
    status: [usize; 4],
}

impl Aggregator {
    pub fn absorb(&mut self, s: &SampleScore) {
        self.n += 1;
        self.em += usize::from(s.exact);
        self.jac += s.counts.jaccard();
        self.f1 += s.counts.f1();
        self.mol_jac += s.mol_counts.jaccard();
        self.mol_f1 += s.mol_counts.f1();
        self.alo += usize::from(s.alo);
        self.val += usize::from(s.valid);
        self.status[s.balance as usize] += 1;
    }

    pub fn finish(&self) -> Report {
        let n = self.n.max(1);
        let mean = |sum: &BigRational| sum / BigRational::from_integer(n.into());
        let rate = |k: usize| BigRational::new(k.into(), n.into());
        Report {
            n: self.n,
            em: rate(self.em),
            jac: mean(&self.jac),
            f1: mean(&self.f1),
            mol_jac: mean(&self.mol_jac),
            mol_f1: mean(&self.mol_f1),
            alo: rate(self.alo),
            val: rate(self.val),
            bal: rate(self.status[BalanceStatus::Balanced as usize]),
            def: rate(self.status[BalanceStatus::Deficitary as usize]),
            exc: rate(self.status[BalanceStatus::Exceeding as usize]),
            d_e: rate(self.status[BalanceStatus::DeficitaryAndExceeding as usize]),
        }
    }
}

fn parse_file(file: &'static str, lines: &[String], encoding: Encoding) -> Result<Vec<StoichBag>, EvalError> {
    lines
        .par_iter()
        .enumerate()
        .map(|(i, l)| parse_stoich_line(l, encoding).map_err(|source| EvalError::Parse { file, line: i + 1, source }))
        .collect()
}

/// Score aligned source, target and prediction lines.
pub fn score_dataset(
    src: &[String],
    tgt: &[String],
    pred: &[String],
    encoding: Encoding,
) -> Result<(Report, Vec<SampleScore>), EvalError> {
    if src.len() != tgt.len() || tgt.len() != pred.len() {
        return Err(EvalError::LineCountMismatch { src: src.len(), tgt: tgt.len(), pred: pred.len() });
    }
    let src_bags = parse_file("src", src, encoding)?;
    let tgt_bags = parse_file("tgt", tgt, encoding)?;
    let scores: Vec<SampleScore> = (0..pred.len())
        .into_par_iter()
        .map(|i| score_sample(&src_bags[i], &tgt_bags[i], &pred[i], encoding))
        .collect();
    let mut agg = Aggregator::default();
    scores.iter().for_each(|s| agg.absorb(s));
    Ok((agg.finish(), scores))
}

/// Predict each source line reprinted canonically.
pub fn identity_baseline(src: &[String], encoding: Encoding) -> Result<Vec<String>, EvalError> {
    src.par_iter()
        .enumerate()
        .map(|(i, l)| {
            let err = |source| EvalError::Parse { file: "src", line: i + 1, source };
            let bag = parse_stoich_line(l, encoding).map_err(err)?;
            print_stoich_line(&bag, encoding, None).map_err(err)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(s: &str) -> StoichBag {
        parse_stoich_line(s, Encoding::Formula).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn worked_example() {
        let pred = bag("{3}H2O.{2}HCl.{1}CO2");
        let truth = bag("{2}H2O.{2}HCl.{1}CH4");
        let c = match_bags(&pred, &truth);
        assert_eq!(c, MatchCounts { tp: 4, fp: 2, fn_: 1 });
        assert_eq!((c.jaccard(), c.f1()), (q(4, 7), q(8, 11)));
        let m = match_molecules_only(&pred, &truth);
        assert_eq!(m, MatchCounts { tp: 2, fp: 1, fn_: 1 });
        assert_eq!((m.jaccard(), m.f1()), (q(1, 2), q(2, 3)));
    }

    #[test]
    fn trivial_counts() {
        let a = bag("{2}H2O.{1}HCl");
        assert_eq!(match_bags(&a, &a), MatchCounts { tp: 3, fp: 0, fn_: 0 });
        assert_eq!(match_bags(&a, &bag("CO2")).tp, 0);
        assert_eq!(match_molecules_only(&bag("{5}H2O"), &bag("H2O")), MatchCounts { tp: 1, fp: 0, fn_: 0 });
        assert_eq!(match_molecules_only(&bag("{5}H2O"), &bag("{2}H2O.CO2")).fn_, 1);
    }

    #[test]
    fn single_sample_dataset() {
        let l = |s: &str| vec![s.to_string()];
        let (r, _) = score_dataset(
            &l("{1}CH4.{2}O2"),
            &l("{2}H2O.{2}HCl.{1}CH4"),
            &l("{3}H2O.{2}HCl.{1}CO2"),
            Encoding::Formula,
        )
        .unwrap();
        assert_eq!((r.em.clone(), r.jac.clone(), r.f1.clone()), (q(0, 1), q(4, 7), q(8, 11)));
        assert_eq!(percent(&r.jac), "57.14");
        assert_eq!(percent(&r.f1), "72.73");
        assert_eq!(r.to_json()["jac"], serde_json::json!(57.14));
    }

    #[test]
    fn invalid_predictions() {
        let src = bag("{1}CH4.{2}O2");
        let truth = bag("{1}CO2.{2}H2O");
        let s = score_sample(&src, &truth, "{1}CO2.{2}Qq", Encoding::Formula);
        assert!(!s.valid && !s.exact && !s.alo);
        assert_eq!(s.counts, MatchCounts { tp: 1, fp: 0, fn_: 2 });
        let s = score_sample(&src, &truth, "garbage!", Encoding::Formula);
        assert_eq!(s.counts, MatchCounts { tp: 0, fp: 0, fn_: 3 });
        assert_eq!(s.balance, BalanceStatus::Deficitary);
        assert!(!score_sample(&src, &truth, "", Encoding::Formula).valid);
    }

    #[test]
    fn statuses_and_alo() {
        let src = bag("{1}CH4.{2}O2");
        let truth = bag("{1}CO2.{2}H2O");
        let s = score_sample(&src, &truth, "{2}H2O.{1}CO2", Encoding::Formula);
        assert!(s.exact && s.alo && s.valid);
        assert_eq!(s.balance, BalanceStatus::Balanced);
        let s = score_sample(&src, &truth, "{1}CO2.{1}H2O.{1}H2.{1}O", Encoding::Formula);
        assert!(s.alo && !s.exact);
        assert_eq!(s.balance, BalanceStatus::Balanced);
        assert_eq!(score_sample(&src, &truth, "{1}SO2.{2}H2O", Encoding::Formula).balance, BalanceStatus::DeficitaryAndExceeding);
        assert_eq!(score_sample(&src, &truth, "{2}CO2.{2}H2O", Encoding::Formula).balance, BalanceStatus::Exceeding);
    }

    #[test]
    fn percent_rounding() {
        assert_eq!(percent(&q(1, 1)), "100.00");
        assert_eq!(percent(&q(0, 1)), "0.00");
        assert_eq!(percent(&q(1, 8)), "12.50");
        assert_eq!(percent(&q(1, 80000)), "0.00");
        assert_eq!(percent(&q(1, 20000)), "0.01");
        assert_eq!(percent(&q(2, 3)), "66.67");
    }

    #[test]
    fn baseline_and_mismatch() {
        let src = vec!["{2}O.{1}C(=O)=O".to_string(), "[HH].[HH]".to_string()];
        let pred = identity_baseline(&src, Encoding::Smiles).unwrap();
        assert_eq!(pred, ["{2}O.{1}O=C=O", "{2}[HH]"]);
        let (r, _) = score_dataset(&src, &src, &pred, Encoding::Smiles).unwrap();
        assert_eq!(r.em, q(1, 1));
        assert!(matches!(
            score_dataset(&src, &src[..1], &pred, Encoding::Smiles),
            Err(EvalError::LineCountMismatch { .. })
        ));
        let bad = vec!["{2}O".to_string(), "C1".to_string()];
        assert!(matches!(score_dataset(&bad, &bad, &bad, Encoding::Smiles), Err(EvalError::Parse { line: 2, .. })));
    }
}
