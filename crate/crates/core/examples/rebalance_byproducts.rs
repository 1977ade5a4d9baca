//! Complete unbalanced reactions with small byproducts from a lexicon.

use chemalgebra::balance::{check_balance, infer_byproducts, Lexicon};
use chemalgebra::reaction::{parse_reaction_smiles, Encoding};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lexicon = Lexicon::default();
    let lines = [
        "CC(=O)O.OCC>>CCOC(C)=O",
        "CC(=O)Cl.NCc1ccccc1>CCN(CC)CC>CC(=O)NCc1ccccc1",
        "CC(=O)OCC.O>>CC(=O)O",
        "C[Si](C)(C)C>>C",
    ];
    for line in lines {
        let r = parse_reaction_smiles(line)?;
        print!("{line}\n  {}\n  ", check_balance(&r, false));
        match infer_byproducts(&r, &lexicon) {
            Ok(fixed) => println!("-> {}", fixed.to_line(Encoding::Smiles)?),
            Err(e) => println!("-> {e}"),
        }
    }

    let custom = Lexicon::parse("# formula and optional SMILES\nH2O O\nCH3OH CO\n")?;
    println!("custom lexicon holds {} entries", custom.entries().len());
    Ok(())
}
