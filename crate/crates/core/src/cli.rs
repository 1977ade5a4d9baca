//! Command-line entry point. Exit codes: 0 success, 1 data error, 2 usage error.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::balance::{build_system, check_balance, infer_byproducts, solve_stoichiometry, Lexicon, DEFAULT_MAX_COEFF};
use crate::benchgen::{
    load_corpus, make_dataset, write_variant, DistributionConfig, IngestReport, Interval, LineOutcome, VariantConfig,
};
use crate::eval::{identity_baseline, score_dataset};
use crate::reaction::{parse_reaction_lenient, parse_stoich_line_lenient, Encoding, Molecule, StoichReaction};
use crate::smiles::formula_of;

/// Lines processed per parallel batch when streaming a corpus.
const CHUNK: usize = 20_000;

#[derive(Parser, Debug)]
#[command(name = "chemalgebra", version, about = "Stoichiometric reaction benchmarks: parse, balance, generate, evaluate")]
struct Cli {
    /// Worker threads for data-parallel subcommands (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the canonical SMILES of each molecule (arguments or stdin lines).
    Canon { molecules: Vec<String> },
    /// Print the formula of each SMILES molecule (arguments or stdin lines).
    Formula { molecules: Vec<String> },
    /// Report the mass balance of an `R>G>P` reaction.
    Check {
        reaction: String,
        /// Also require the net charge to balance.
        #[arg(long)]
        charge: bool,
    },
    /// Print the minimum-norm positive integer coefficients of a reaction.
    Solve {
        reaction: String,
        /// Largest coefficient searched when the solution set is not a single ray.
        #[arg(long, default_value_t = DEFAULT_MAX_COEFF)]
        max_coeff: u64,
    },
    /// Complete an unbalanced reaction with a unique set of byproducts.
    Rebalance {
        reaction: String,
        /// Byproduct lexicon, one `FORMULA [SMILES]` per line.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Classify and rebalance a raw corpus into a balanced one.
    ///
    /// DATA holds, per split (train, valid, test), either `SPLIT.txt` with
    /// one `R>G>P` reaction per line or a `src-SPLIT.txt`/`tgt-SPLIT.txt` pair.
    Ingest {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Generate dataset variants from a balanced corpus directory.
    Generate {
        /// Directory with train.txt, valid.txt and test.txt reaction lines.
        #[arg(long)]
        corpus: PathBuf,
        /// Variant such as F_T1_x1, repeatable; `all` selects all eight.
        #[arg(long, required = true)]
        variant: Vec<String>,
        #[arg(long)]
        seed: u64,
        /// In-distribution coefficient interval.
        #[arg(long, default_value = "1-5")]
        s_in: String,
        /// Out-of-distribution coefficient interval.
        #[arg(long, default_value = "6-10")]
        s_out: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against targets.
    Evaluate {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        tgt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        encoding: Encoding,
        /// Directory for report.json; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the identity-baseline predictions for a source file.
    Baseline {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        encoding: Encoding,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize the line files of a directory.
    Stats { dir: PathBuf },
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn data<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Data(e.to_string())
}

/// Run with process stdio.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut io::stdout(), &mut io::stderr())
}

/// Run with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command, out, err)),
            Err(e) => Err(data(e)),
        },
        None => dispatch(cli.command, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Data(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}

fn dispatch(cmd: Command, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Outcome {
    match cmd {
        Command::Canon { molecules } => per_molecule(molecules, out, err, |m| {
            Molecule::from_smiles(m).map(|x| x.smiles().expect("parsed from SMILES").to_string()).map_err(data)
        }),
        Command::Formula { molecules } => {
            per_molecule(molecules, out, err, |m| formula_of(m).map(|f| f.to_string()).map_err(data))
        }
        Command::Check { reaction, charge } => {
            let r = parse_reaction_lenient(&reaction).map_err(data)?;
            writeln!(out, "{}", check_balance(&r, charge))?;
            Ok(())
        }
        Command::Solve { reaction, max_coeff } => {
            let r = parse_reaction_lenient(&reaction).map_err(data)?;
            let sol = solve_stoichiometry(&build_system(&r), max_coeff).map_err(data)?;
            writeln!(out, "{sol}")?;
            Ok(())
        }
        Command::Rebalance { reaction, lexicon } => {
            let lex = load_lexicon(lexicon.as_deref())?;
            let r = parse_reaction_lenient(&reaction).map_err(data)?;
            let fixed = infer_byproducts(&r, &lex).map_err(data)?;
            writeln!(out, "{}", reaction_line(&fixed)?)?;
            Ok(())
        }
        Command::Ingest { data: dir, out: out_dir, lexicon } => ingest(&dir, &out_dir, lexicon.as_deref(), out, err),
        Command::Generate { corpus, variant, seed, s_in, s_out, out: out_dir } => {
            let s_in: Interval = s_in.parse().map_err(|e| Failure::Usage(format!("--s-in: {e}")))?;
            let s_out: Interval = s_out.parse().map_err(|e| Failure::Usage(format!("--s-out: {e}")))?;
            let dist = DistributionConfig::new(s_in, s_out, seed).map_err(|e| Failure::Usage(e.to_string()))?;
            let mut variants = Vec::new();
            for v in &variant {
                if v == "all" {
                    variants.extend(VariantConfig::all(dist));
                } else {
                    variants.push(VariantConfig::parse(v, dist).map_err(|e| Failure::Usage(e.to_string()))?);
                }
            }
            let corpus = load_corpus(&corpus).map_err(data)?;
            for cfg in variants {
                let generated = make_dataset(&corpus, &cfg).map_err(data)?;
                let dir = write_variant(&generated, &out_dir).map_err(data)?;
                let lines: usize = generated.files.iter().map(|(_, l)| l.len()).sum::<usize>() / 2;
                writeln!(out, "{}\t{} pairs", dir.display(), lines)?;
            }
            Ok(())
        }
        Command::Evaluate { src, tgt, pred, encoding, out: out_dir } => {
            let (src, tgt, pred) = (read_lines(&src)?, read_lines(&tgt)?, read_lines(&pred)?);
            let (report, _) = score_dataset(&src, &tgt, &pred, encoding).map_err(data)?;
            let json = serde_json::to_string_pretty(&report.to_json()).map_err(data)?;
            write!(out, "{report}")?;
            match out_dir {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("report.json"), json + "\n")?;
                }
                None => writeln!(out, "{json}")?,
            }
            Ok(())
        }
        Command::Baseline { src, encoding, out: out_dir } => {
            let lines = read_lines(&src)?;
            let pred = identity_baseline(&lines, encoding).map_err(data)?;
            let name = src.file_name().and_then(|n| n.to_str()).unwrap_or("input.txt");
            let name = format!("pred-{}", name.strip_prefix("src-").unwrap_or(name));
            fs::create_dir_all(&out_dir)?;
            let path = out_dir.join(name);
            write_lines(&path, &pred)?;
            writeln!(out, "{}", path.display())?;
            Ok(())
        }
        Command::Stats { dir } => stats(&dir, out),
    }
}

fn per_molecule(
    molecules: Vec<String>,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
    f: impl Fn(&str) -> Result<String, Failure> + Sync,
) -> Outcome {
    let inputs = if molecules.is_empty() {
        io::stdin().lock().lines().collect::<io::Result<Vec<_>>>()?
    } else {
        molecules
    };
    let results: Vec<_> = inputs.par_iter().map(|m| f(m.trim())).collect();
    let mut failed = 0;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => writeln!(out, "{s}")?,
            Err(Failure::Data(m) | Failure::Usage(m)) => {
                failed += 1;
                writeln!(out)?;
                writeln!(err, "input {}: {m}", i + 1)?;
            }
        }
    }
    if failed > 0 {
        return Err(Failure::Data(format!("{failed} of {} inputs failed", inputs.len())));
    }
    Ok(())
}

fn reaction_line(r: &StoichReaction) -> Result<String, Failure> {
    r.to_line(Encoding::Smiles).or_else(|_| r.to_line(Encoding::Formula)).map_err(data)
}

fn load_lexicon(path: Option<&Path>) -> Result<Lexicon, Failure> {
    match path {
        None => Ok(Lexicon::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            Lexicon::parse(&text).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))
        }
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn write_lines(path: &Path, lines: &[String]) -> Outcome {
    let mut w = BufWriter::new(File::create(path)?);
    for l in lines {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

enum SplitInput {
    Reactions(BufReader<File>),
    Pairs(BufReader<File>, BufReader<File>),
}

fn open_split(dir: &Path, split: &str) -> Result<Option<SplitInput>, Failure> {
    let open = |p: PathBuf| File::open(&p).map(BufReader::new).map_err(|e| Failure::Data(format!("{}: {e}", p.display())));
    let single = dir.join(format!("{split}.txt"));
    if single.exists() {
        return Ok(Some(SplitInput::Reactions(open(single)?)));
    }
    let (src, tgt) = (dir.join(format!("src-{split}.txt")), dir.join(format!("tgt-{split}.txt")));
    if src.exists() && tgt.exists() {
        return Ok(Some(SplitInput::Pairs(open(src)?, open(tgt)?)));
    }
    Ok(None)
}

fn next_chunk(reader: &mut BufReader<File>) -> io::Result<Vec<String>> {
    let mut lines = Vec::with_capacity(CHUNK);
    let mut buf = String::new();
    while lines.len() < CHUNK {
        buf.clear();
        if reader.read_line(&mut buf)? == 0 {
            break;
        }
        lines.push(buf.trim_end_matches(['\n', '\r']).to_string());
    }
    Ok(lines)
}

fn ingest(dir: &Path, out_dir: &Path, lexicon: Option<&Path>, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Outcome {
    let lex = load_lexicon(lexicon)?;
    let mut inputs = Vec::new();
    for split in ["train", "valid", "test"] {
        match open_split(dir, split)? {
            Some(input) => inputs.push((split, input)),
            None => writeln!(err, "note: no input for split {split}")?,
        }
    }
    if inputs.is_empty() {
        return Err(Failure::Data(format!("{}: no split files found", dir.display())));
    }
    fs::create_dir_all(out_dir)?;
    let mut reports = Vec::new();
    for (split, mut input) in inputs {
        let mut kept = BufWriter::new(File::create(out_dir.join(format!("{split}.txt")))?);
        let mut diag = BufWriter::new(File::create(out_dir.join(format!("diagnostics-{split}.txt")))?);
        let mut report = IngestReport::new(split);
        let mut offset = 0;
        loop {
            let outcomes: Vec<LineOutcome> = match &mut input {
                SplitInput::Reactions(r) => {
                    let lines = next_chunk(r)?;
                    lines.par_iter().map(|l| LineOutcome::classify(l, &lex)).collect()
                }
                SplitInput::Pairs(s, t) => {
                    let (src, tgt) = (next_chunk(s)?, next_chunk(t)?);
                    if src.len() != tgt.len() {
                        return Err(Failure::Data(format!("split {split}: source and target line counts differ")));
                    }
                    src.par_iter().zip(&tgt).map(|(a, b)| LineOutcome::classify_pair(a, b, &lex)).collect()
                }
            };
            if outcomes.is_empty() {
                break;
            }
            for (i, o) in outcomes.iter().enumerate() {
                report.absorb(o);
                match o {
                    LineOutcome::Balanced(r) | LineOutcome::Rebalanced(r) => writeln!(kept, "{}", reaction_line(r)?)?,
                    LineOutcome::Unfixable(e) => writeln!(diag, "line {}: unfixable: {e}", offset + i + 1)?,
                    LineOutcome::Failed(e) => writeln!(diag, "line {}: parse error: {e}", offset + i + 1)?,
                }
            }
            offset += outcomes.len();
        }
        kept.flush()?;
        diag.flush()?;
        reports.push(report);
    }
    writeln!(out, "{:<6} {:>9} {:>16} {:>16} {:>16} {:>7}", "split", "total", "balanced", "rebalanced", "kept", "failed")?;
    for r in &reports {
        writeln!(
            out,
            "{:<6} {:>9} {:>8} ({:>5.2}) {:>8} ({:>5.2}) {:>8} ({:>5.2}) {:>7}",
            r.split,
            r.total,
            r.balanced,
            r.balanced_pct(),
            r.rebalanced,
            r.rebalanced_pct(),
            r.balanced + r.rebalanced,
            r.kept_pct(),
            r.failed
        )?;
    }
    let json = serde_json::to_string_pretty(&reports).map_err(data)?;
    fs::write(out_dir.join("report.json"), json + "\n")?;
    Ok(())
}

fn coefficients(line: &str) -> Vec<u64> {
    line.split(['.', '>'])
        .filter(|s| !s.is_empty())
        .map(|item| {
            item.strip_prefix('{')
                .and_then(|r| r.split_once('}'))
                .and_then(|(k, _)| k.parse().ok())
                .unwrap_or(1)
        })
        .collect()
}

fn stats(dir: &Path, out: &mut (dyn Write + Send)) -> Outcome {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| Failure::Data(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().map(str::to_string))
        .filter(|n| n.ends_with(".txt"))
        .collect();
    names.sort();
    writeln!(out, "{:<24} {:>8} {:>10} {:>8} {:>8}", "file", "lines", "mol/line", "min k", "max k")?;
    for name in &names {
        let lines = read_lines(&dir.join(name))?;
        let per_line: Vec<Vec<u64>> = lines.iter().map(|l| coefficients(l)).collect();
        let items: usize = per_line.iter().map(Vec::len).sum();
        let all = per_line.iter().flatten();
        let (lo, hi) = (all.clone().min(), all.max());
        let show = |v: Option<&u64>| v.map_or("-".to_string(), u64::to_string);
        let mean = if lines.is_empty() { 0.0 } else { items as f64 / lines.len() as f64 };
        writeln!(out, "{:<24} {:>8} {:>10.2} {:>8} {:>8}", name, lines.len(), mean, show(lo), show(hi))?;
    }
    // balance of aligned src/tgt pairs
    for name in names.iter().filter(|n| n.starts_with("src-")) {
        let tgt = format!("tgt-{}", &name[4..]);
        if !names.contains(&tgt) {
            continue;
        }
        let (s, t) = (read_lines(&dir.join(name))?, read_lines(&dir.join(&tgt))?);
        let balanced = s
            .par_iter()
            .zip(&t)
            .filter(|(a, b)| {
                match (parse_stoich_line_lenient(a), parse_stoich_line_lenient(b)) {
                    (Ok(l), Ok(r)) => crate::balance::compare_sides(&l, &r, false).status
                        == crate::balance::BalanceStatus::Balanced,
                    _ => false,
                }
            })
            .count();
        writeln!(out, "{} balanced pairs: {}/{}", &name[4..name.len() - 4], balanced, s.len().min(t.len()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("chemalgebra").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn solve_sabatier() {
        let (code, out, _) = call(&["solve", "CO2.[HH]>[Ni]>C.O"]);
        assert_eq!((code, out.as_str()), (0, "r=[1,4,1] p=[1,2,1]\n"));
    }

    #[test]
    fn canon_and_formula() {
        let (code, out, _) = call(&["canon", "C(=O)=O", "O=C=O"]);
        assert_eq!((code, out.as_str()), (0, "O=C=O\nO=C=O\n"));
        let (code, out, _) = call(&["formula", "CCCCC(CO)c1ccc(C)cc1C"]);
        assert_eq!((code, out.as_str()), (0, "C14H22O\n"));
        let (code, _, err) = call(&["canon", "C1CC"]);
        assert_eq!(code, 1);
        assert!(err.contains("input 1"));
    }

    #[test]
    fn check_and_rebalance() {
        let (_, out, _) = call(&["check", "O=C=O.[HH].[HH].[HH].[HH]>[Ni]>C.O"]);
        assert_eq!(out, "DEF missing [H:2 O:1]\n");
        let (code, out, _) = call(&["rebalance", "CC(=O)O.OCC>>CCOC(C)=O"]);
        assert_eq!(code, 0);
        assert!(out.trim().ends_with(".{1}O"), "{out}");
        let (code, _, _) = call(&["rebalance", "CS>>CO"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&[]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["generate", "--corpus", "x", "--variant", "F_T1_x1", "--out", "y"]).0, 2);
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let (code, _, _) =
            call(&["generate", "--corpus", "missing", "--variant", "F_T9_x1", "--seed", "1", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 2);
        assert!(!out.exists());
        assert_eq!(call(&["--help"]).0, 0);
        assert_eq!(call(&["--jobs", "0", "canon", "C"]).0, 2);
    }
}
