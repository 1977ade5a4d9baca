//! Atom bags: parse, add, scale and subtract molecular formulas.

use chemalgebra::formula::{parse_formula, AtomBag};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let adduct = parse_formula("C14H22O")?.into_bag();
    let xylene = parse_formula("C8H10")?.into_bag();
    let epoxide = parse_formula("C6H12O")?.into_bag();

    let sum = &xylene + &epoxide;
    println!("C8H10 + C6H12O = {}", sum.to_formula_string()?);
    println!("equal to C14H22O: {}", sum == adduct);

    let three = adduct.scale(3)?;
    println!("3 x C14H22O = {}", three.to_formula_string()?);

    let deficit = adduct.diff(&parse_formula("C14H20")?.into_bag());
    println!("C14H22O - C14H20 = {deficit}");

    let bicarbonate = parse_formula("CHO3-")?;
    println!("{} has charge {}", bicarbonate, bicarbonate.bag().charge());

    let total: AtomBag = [&xylene, &xylene].into_iter().sum();
    println!("2 x C8H10 = {}", total.to_formula_string()?);
    Ok(())
}
