//! Score predictions with exact match, Jaccard, F1 and balance classes.

use chemalgebra::eval::{match_bags, score_dataset};
use chemalgebra::reaction::{parse_stoich_line, Encoding};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pred = parse_stoich_line("{3}H2O.{2}HCl.{1}CO2", Encoding::Formula)?;
    let truth = parse_stoich_line("{2}H2O.{2}HCl.{1}CH4", Encoding::Formula)?;
    let c = match_bags(&pred, &truth);
    println!("tp={} fp={} fn={}  JAC={}  F1={}", c.tp, c.fp, c.fn_, c.jaccard(), c.f1());

    let lines = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let src = lines(&["{1}CO2.{4}H2.{1}Ni", "{2}H2.{1}O2", "{1}CH4.{2}O2"]);
    let tgt = lines(&["{1}CH4.{2}H2O.{1}Ni", "{2}H2O", "{1}CO2.{2}H2O"]);
    let pred = lines(&["{1}CH4.{2}H2O.{1}Ni", "{1}H2O", "{1}CO2.{2}H2O.{1}Au"]);
    let (report, samples) = score_dataset(&src, &tgt, &pred, Encoding::Formula)?;
    for (i, s) in samples.iter().enumerate() {
        println!("sample {i}: exact={} balance={}", s.exact, s.balance);
    }
    print!("{report}");
    println!("{}", serde_json::to_string_pretty(&report.to_json())?);
    Ok(())
}
