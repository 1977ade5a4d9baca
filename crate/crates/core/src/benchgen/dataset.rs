//! Split files for one dataset variant.
//!
//! Every output line draws from its own stream keyed by
//! `(seed, split, reaction index, augmentation index)`, so lines are
//! generated in parallel and any one of them can be reproduced alone.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::balance::{check_balance, BalanceStatus};
use crate::reaction::{parse_reaction_smiles, print_stoich_line, Encoding, StoichBag, StoichReaction};
use crate::rng::StreamRng;

use super::tasks::{type1_instance, type2_instance, Type2Draws};
use super::{GenError, Interval, Task, VariantConfig};

/// Split stems in emission order; each yields `src-STEM.txt` and `tgt-STEM.txt`.
pub const SPLIT_FILES: [&str; 7] =
    ["train", "valid", "test_in", "test_out", "train_cross", "valid_cross", "test_cross"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Source {
    In,
    Out,
}

impl Source {
    pub fn swapped(self) -> Source {
        match self {
            Source::In => Source::Out,
            Source::Out => Source::In,
        }
    }
}

/// First `⌈n/2⌉` reactions from the in-distribution interval, the rest from
/// the out-of-distribution one.
pub fn cross_sources(n: usize) -> Vec<Source> {
    let half = n.div_ceil(2);
    (0..n).map(|i| if i < half { Source::In } else { Source::Out }).collect()
}

pub fn swap_sources(sources: &[Source]) -> Vec<Source> {
    sources.iter().map(|s| s.swapped()).collect()
}

/// Balanced base reactions, already split.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub train: Vec<StoichReaction>,
    pub valid: Vec<StoichReaction>,
    pub test: Vec<StoichReaction>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn read_split(path: &Path) -> Result<Vec<StoichReaction>, GenError> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| GenError::Io { path: file.clone(), source })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r = parse_reaction_smiles(line).map_err(|source| GenError::Line { file: file.clone(), line: i + 1, source })?;
        let report = check_balance(&r, false);
        if report.status != BalanceStatus::Balanced {
            return Err(GenError::Unbalanced { file, line: i + 1, report: report.to_string() });
        }
        out.push(r);
    }
    Ok(out)
}

/// Read `train.txt`, `valid.txt` and `test.txt` of reaction lines.
pub fn load_corpus(dir: &Path) -> Result<Corpus, GenError> {
    Ok(Corpus {
        train: read_split(&dir.join("train.txt"))?,
        valid: read_split(&dir.join("valid.txt"))?,
        test: read_split(&dir.join("test.txt"))?,
    })
}

/// Draws behind one emitted line.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct LineRecord {
    pub split: &'static str,
    pub line: usize,
    pub interval: Interval,
    /// The single factor for T1, one draw per distinct molecule for T2.
    pub draws: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct GeneratedVariant {
    pub config: VariantConfig,
    /// `(file name, lines)` in emission order.
    pub files: Vec<(String, Vec<String>)>,
    pub records: Vec<LineRecord>,
}

impl GeneratedVariant {
    pub fn file(&self, name: &str) -> Option<&[String]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, l)| l.as_slice())
    }
}

struct Job<'a> {
    split: &'static str,
    index: usize,
    aug: u8,
    reaction: &'a StoichReaction,
    source: Source,
}

fn jobs<'a>(split: &'static str, reactions: &'a [StoichReaction], sources: &[Source], aug: u8) -> Vec<Job<'a>> {
    let mut out = Vec::with_capacity(reactions.len() * aug as usize);
    for (index, (reaction, source)) in reactions.iter().zip(sources).enumerate() {
        for a in 0..aug {
            out.push(Job { split, index, aug: a, reaction, source: *source });
        }
    }
    out
}

fn shuffled(bag: &StoichBag, rng: &mut StreamRng) -> StoichBag {
    let mut entries = bag.entries().to_vec();
    rng.shuffle(&mut entries);
    entries.into_iter().collect()
}

fn render_line(job: &Job, cfg: &VariantConfig) -> Result<(String, String, Vec<u64>, Interval), GenError> {
    let d = &cfg.distribution;
    let mut rng = StreamRng::derive(&[
        b"chemalgebra-line",
        &d.seed.to_le_bytes(),
        job.split.as_bytes(),
        &(job.index as u64).to_le_bytes(),
        &[job.aug],
    ]);
    let interval = match job.source {
        Source::In => d.s_in,
        Source::Out => d.s_out,
    };
    let (instance, draws) = match cfg.task {
        Task::T1 => {
            let k = rng.in_range(interval.lo, interval.hi);
            (type1_instance(job.reaction, k), vec![k])
        }
        Task::T2 => {
            let draws = Type2Draws::sample(job.reaction, &mut rng, interval);
            (type2_instance(job.reaction, &draws), draws.draws)
        }
    };
    let (mut left, mut right) = (instance.left_side(), instance.right_side());
    if cfg.encoding == Encoding::Formula {
        left = left.to_formula_level();
        right = right.to_formula_level();
    }
    let err = |source| GenError::Line { file: job.split.to_string(), line: job.index + 1, source };
    let src = print_stoich_line(&shuffled(&left, &mut rng), cfg.encoding, None).map_err(err)?;
    let tgt = print_stoich_line(&shuffled(&right, &mut rng), cfg.encoding, None).map_err(err)?;
    Ok((src, tgt, draws, interval))
}

fn generate(plan: Vec<(&'static str, Vec<Job>)>, cfg: &VariantConfig) -> Result<GeneratedVariant, GenError> {
    let mut files = Vec::new();
    let mut records = Vec::new();
    for (split, jobs) in plan {
        let lines: Vec<_> = jobs.par_iter().map(|j| render_line(j, cfg)).collect::<Result<_, _>>()?;
        let mut src = Vec::with_capacity(lines.len());
        let mut tgt = Vec::with_capacity(lines.len());
        for (line, (s, t, draws, interval)) in lines.into_iter().enumerate() {
            src.push(s);
            tgt.push(t);
            records.push(LineRecord { split, line, interval, draws });
        }
        files.push((format!("src-{split}.txt"), src));
        files.push((format!("tgt-{split}.txt"), tgt));
    }
    Ok(GeneratedVariant { config: *cfg, files, records })
}

fn cross_plan<'a>(corpus: &'a Corpus, cfg: &VariantConfig) -> Vec<(&'static str, Vec<Job<'a>>)> {
    let train_sources = cross_sources(corpus.train.len());
    vec![
        ("train_cross", jobs("train_cross", &corpus.train, &train_sources, cfg.augmentation)),
        ("valid_cross", jobs("valid_cross", &corpus.valid, &cross_sources(corpus.valid.len()), 1)),
        ("test_cross", jobs("test_cross", &corpus.train, &swap_sources(&train_sources), 1)),
    ]
}

/// The three `_cross` splits: training and validation reactions with the
/// first half drawn in-distribution and the rest out-of-distribution, and a
/// test split of the training reactions with the two halves swapped.
pub fn make_cross_split(corpus: &Corpus, cfg: &VariantConfig) -> Result<GeneratedVariant, GenError> {
    generate(cross_plan(corpus, cfg), cfg)
}

/// All seven splits of one variant. Only training splits are augmented.
pub fn make_dataset(corpus: &Corpus, cfg: &VariantConfig) -> Result<GeneratedVariant, GenError> {
    let all_in = |n| vec![Source::In; n];
    let mut plan = vec![
        ("train", jobs("train", &corpus.train, &all_in(corpus.train.len()), cfg.augmentation)),
        ("valid", jobs("valid", &corpus.valid, &all_in(corpus.valid.len()), 1)),
        ("test_in", jobs("test_in", &corpus.test, &all_in(corpus.test.len()), 1)),
        ("test_out", jobs("test_out", &corpus.test, &vec![Source::Out; corpus.test.len()], 1)),
    ];
    plan.extend(cross_plan(corpus, cfg));
    generate(plan, cfg)
}

/// Write under `out/<variant name>/`; returns that directory.
pub fn write_variant(variant: &GeneratedVariant, out: &Path) -> Result<PathBuf, GenError> {
    let dir = out.join(variant.config.name());
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| GenError::Io { path, source }
    };
    fs::create_dir_all(&dir).map_err(io(&dir))?;
    for (name, lines) in &variant.files {
        let path = dir.join(name);
        let mut text = lines.join("\n");
        if !lines.is_empty() {
            text.push('\n');
        }
        fs::write(&path, text).map_err(io(&path))?;
    }
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchgen::DistributionConfig;
    use crate::reaction::{parse_stoich_line, StoichReaction};

    fn corpus() -> Corpus {
        let p = |s: &str| parse_reaction_smiles(s).unwrap();
        Corpus {
            train: vec![p("O=C=O.[HH].[HH].[HH].[HH]>[Ni]>C.O.O"), p("[HH].[HH].O=O>>O.O"), p("C=C.O>>CCO")],
            valid: vec![p("CC(=O)O.OCC>>CCOC(C)=O.O")],
            test: vec![p("C.ClCl>>CCl.Cl"), p("CC(=O)O.NC>>CC(=O)NC.O")],
        }
    }

    fn cfg(name: &str) -> VariantConfig {
        VariantConfig::parse(name, DistributionConfig::with_seed(11)).unwrap()
    }

    #[test]
    fn cross_halves() {
        use Source::*;
        assert_eq!(cross_sources(2), [In, Out]);
        assert_eq!(cross_sources(3), [In, In, Out]);
        assert_eq!(cross_sources(0), []);
        let s = cross_sources(5);
        assert_eq!(swap_sources(&swap_sources(&s)), s);
        assert_eq!(swap_sources(&[In, Out]), [Out, In]);
    }

    #[test]
    fn line_counts() {
        let c = corpus();
        let x1 = make_dataset(&c, &cfg("S_T1_x1")).unwrap();
        assert_eq!(x1.files.len(), 14);
        assert_eq!(x1.file("src-train.txt").unwrap().len(), 3);
        assert_eq!(x1.file("tgt-test_out.txt").unwrap().len(), 2);
        assert_eq!(x1.file("src-test_cross.txt").unwrap().len(), 3);
        let x5 = make_dataset(&c, &cfg("F_T2_x5")).unwrap();
        assert_eq!(x5.file("src-train.txt").unwrap().len(), 15);
        assert_eq!(x5.file("src-train_cross.txt").unwrap().len(), 15);
        assert_eq!(x5.file("src-valid.txt").unwrap().len(), 1);
    }

    #[test]
    fn x5_keeps_the_molecules() {
        let v = make_dataset(&corpus(), &cfg("S_T1_x5")).unwrap();
        let src = v.file("src-train.txt").unwrap();
        let keys = |line: &str| {
            let b = parse_stoich_line(line, Encoding::Smiles).unwrap();
            let mut k: Vec<Vec<u8>> = b.iter().map(|e| e.molecule.key().to_vec()).collect();
            k.sort();
            k
        };
        for i in 1..5 {
            assert_eq!(keys(&src[0]), keys(&src[i]));
        }
    }

    #[test]
    fn every_pair_balances_and_reagents_match() {
        for name in ["S_T1_x1", "S_T2_x5", "F_T1_x5", "F_T2_x1"] {
            let c = cfg(name);
            let v = make_dataset(&corpus(), &c).unwrap();
            for stem in SPLIT_FILES {
                let src = v.file(&format!("src-{stem}.txt")).unwrap();
                let tgt = v.file(&format!("tgt-{stem}.txt")).unwrap();
                for (s, t) in src.iter().zip(tgt) {
                    let l = parse_stoich_line(s, c.encoding).unwrap();
                    let r = parse_stoich_line(t, c.encoding).unwrap();
                    let rx = StoichReaction::from_sides(&l, &r, c.encoding);
                    assert_eq!(check_balance(&rx, false).status, BalanceStatus::Balanced, "{name} {s} >> {t}");
                }
            }
        }
    }

    #[test]
    fn intervals_follow_the_split() {
        let c = cfg("F_T2_x1");
        let v = make_dataset(&corpus(), &c).unwrap();
        let d = c.distribution;
        for r in &v.records {
            let expected = match r.split {
                "test_out" => d.s_out,
                "train_cross" | "valid_cross" | "test_cross" => r.interval,
                _ => d.s_in,
            };
            assert_eq!(r.interval, expected);
            assert!(r.draws.iter().all(|k| r.interval.contains(*k)));
        }
        let of = |split: &str| -> Vec<Interval> {
            v.records.iter().filter(|r| r.split == split).map(|r| r.interval).collect()
        };
        assert_eq!(of("train_cross"), [d.s_in, d.s_in, d.s_out]);
        assert_eq!(of("test_cross"), [d.s_out, d.s_out, d.s_in]);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = make_dataset(&corpus(), &cfg("S_T2_x5")).unwrap();
        let b = make_dataset(&corpus(), &cfg("S_T2_x5")).unwrap();
        assert_eq!(a.files, b.files);
        let other = VariantConfig::parse("S_T2_x5", DistributionConfig::with_seed(12)).unwrap();
        assert_ne!(make_dataset(&corpus(), &other).unwrap().files, a.files);
    }

    #[test]
    fn write_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let v = make_dataset(&corpus(), &cfg("F_T1_x1")).unwrap();
        let out = write_variant(&v, dir.path()).unwrap();
        assert!(out.ends_with("ChemAlgebra_F_T1_x1"));
        let text = fs::read_to_string(out.join("src-valid.txt")).unwrap();
        assert!(text.ends_with('\n') && !text.contains('\r'));

        let cdir = dir.path().join("corpus");
        fs::create_dir(&cdir).unwrap();
        fs::write(cdir.join("train.txt"), "C=C.O>>CCO\n\n").unwrap();
        fs::write(cdir.join("valid.txt"), "").unwrap();
        fs::write(cdir.join("test.txt"), "C>>CC\n").unwrap();
        assert!(matches!(load_corpus(&cdir), Err(GenError::Unbalanced { line: 1, .. })));
        fs::write(cdir.join("test.txt"), "C>>C\n").unwrap();
        assert_eq!(load_corpus(&cdir).unwrap().len(), 2);
    }
}
