//! Build the stoichiometric system of a reaction and find its minimum-norm
//! positive integer coefficients.

use chemalgebra::balance::{build_system, check_balance, solve_stoichiometry, DEFAULT_MAX_COEFF};
use chemalgebra::reaction::parse_reaction_lenient;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "O=C=O.[HH]>[Ni]>C.O".to_string());
    let reaction = parse_reaction_lenient(&text)?;
    println!("unscaled: {}", check_balance(&reaction, false));

    let system = build_system(&reaction);
    let rows: Vec<&str> = system.element_index.iter().map(|e| e.symbol()).collect();
    println!("rows {rows:?}");
    for (i, sym) in rows.iter().enumerate() {
        println!("  {sym:<2} A {:?}  B {:?}", system.lhs_matrix[i], system.rhs_matrix[i]);
    }
    println!("ties {:?}", system.tie_constraints);

    let sol = solve_stoichiometry(&system, DEFAULT_MAX_COEFF)?;
    println!("{sol}  (norm {})", sol.norm);
    Ok(())
}
