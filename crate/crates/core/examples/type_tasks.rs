//! Type-1 and Type-2 instances of one balanced base reaction.

use chemalgebra::balance::check_balance;
use chemalgebra::benchgen::{type1_instance, type2_instance, Interval, Type2Draws};
use chemalgebra::reaction::{parse_reaction_smiles, print_stoich_line, Encoding, StoichReaction};
use chemalgebra::rng::StreamRng;

fn show(label: &str, r: &StoichReaction) -> Result<(), Box<dyn std::error::Error>> {
    let f = r.to_formula_level();
    println!(
        "{label:<6} {} >> {}   [{}]",
        print_stoich_line(&f.left_side(), Encoding::Formula, None)?,
        print_stoich_line(&f.right_side(), Encoding::Formula, None)?,
        check_balance(r, false)
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = parse_reaction_smiles("O=C=O.[HH].[HH].[HH].[HH]>[Ni]>C.O.O")?;
    show("base", &base)?;
    show("T1 x3", &type1_instance(&base, 3))?;

    let fixed = Type2Draws::from_fn(&base, |m| match m.formula().as_str() {
        "CO2" => 3,
        "H2" => 4,
        "Ni" => 3,
        "CH4" => 1,
        _ => 2,
    });
    show("T2", &type2_instance(&base, &fixed))?;

    let mut rng = StreamRng::derive(&[b"example", &7u64.to_le_bytes()]);
    for _ in 0..3 {
        let draws = Type2Draws::sample(&base, &mut rng, Interval::new(1, 5)?);
        show("T2 rnd", &type2_instance(&base, &draws))?;
    }
    Ok(())
}
