pub mod balance;
pub mod element;
pub mod formula;
pub mod reaction;
pub mod rng;
pub mod smiles;
pub mod benchgen;
pub mod eval;
pub mod cli;
