//! Parse SMILES, derive formulas, and compare molecules by canonical form.
//!
//! cargo run --example parse_and_canonicalize -- "OCC" "C(O)C" "c1ccccc1"

use chemalgebra::smiles::{canonicalize, formula_of, parse_smiles};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut inputs: Vec<String> = std::env::args().skip(1).collect();
    if inputs.is_empty() {
        inputs = ["OCC", "C(O)C", "CCCCC1CO1", "C1OC1CCCC", "O=C(O)c1ccc(Cl)c([N+](=O)[O-])c1", "[Na+]"]
            .map(String::from)
            .to_vec();
    }
    let mut seen = Vec::new();
    for s in &inputs {
        let canon = canonicalize(&parse_smiles(s)?)?;
        let twin = seen.iter().position(|c: &Vec<u8>| *c == canon.certificate);
        println!("{s:<40} {:<12} {}", formula_of(s)?, canon.smiles);
        if let Some(i) = twin {
            println!("{:<40} same molecule as {}", "", inputs[i]);
        }
        seen.push(canon.certificate);
    }
    Ok(())
}
