//! Exact minimum-norm positive integer solutions of `A·r = B·p`.
//!
//! The null space of `[A | -B]` (plus reagent tie rows) is computed in exact
//! rational arithmetic. A one-dimensional null space has a single primitive
//! integer generator. Larger null spaces are searched over the free
//! variables with bound propagation on the pivot variables.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::StoichSystem;

pub const DEFAULT_MAX_COEFF: u64 = 50;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("the system has no molecule columns")]
    EmptySystem,
    #[error("malformed system: {0}")]
    Shape(String),
    #[error("the reaction cannot be balanced with positive coefficients")]
    NoPositiveSolution,
    #[error("no positive solution with every coefficient at most {max_coeff}")]
    SearchExhausted { max_coeff: u64 },
    #[error("intermediate value exceeds the supported range")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoichSolution {
    pub r: Vec<u64>,
    pub p: Vec<u64>,
    /// Σ r² + Σ p².
    pub norm: u128,
}

impl fmt::Display for StoichSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "r=[{}] p=[{}]", list(&self.r), list(&self.p))
    }
}

pub fn solve_stoichiometry(system: &StoichSystem, max_coeff: u64) -> Result<StoichSolution, SolveError> {
    let (m, q) = (system.lhs_cols(), system.rhs_cols());
    validate(system, m, q)?;
    let n = m + q;
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for (a, b) in system.lhs_matrix.iter().zip(&system.rhs_matrix) {
        let row = a
            .iter()
            .map(|v| rational(i128::from(*v)))
            .chain(b.iter().map(|v| rational(-i128::from(*v))))
            .collect();
        rows.push(row);
    }
    for &(l, r) in &system.tie_constraints {
        let mut row = vec![BigRational::zero(); n];
        row[l] = BigRational::one();
        row[m + r] = -BigRational::one();
        rows.push(row);
    }
    let pivots = rref(&mut rows, n);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.iter().any(|(_, pc)| pc == c)).collect();

    let x = match free.len() {
        0 => return Err(SolveError::NoPositiveSolution),
        1 => generator(&rows, &pivots, free[0], n)?,
        _ => search(&rows, &pivots, &free, n, max_coeff)?,
    };
    let sol = StoichSolution {
        norm: x.iter().map(|v| u128::from(*v) * u128::from(*v)).sum(),
        r: x[..m].to_vec(),
        p: x[m..].to_vec(),
    };
    assert!(verify(system, &sol), "solver produced an unbalanced solution");
    Ok(sol)
}

/// Exact check of `A·r == B·p`, the ties, and positivity.
pub fn verify(system: &StoichSystem, sol: &StoichSolution) -> bool {
    let dot = |row: &[u64], v: &[u64]| -> Option<u128> {
        row.iter().zip(v).try_fold(0u128, |acc, (a, x)| acc.checked_add(u128::from(*a) * u128::from(*x)))
    };
    sol.r.len() == system.lhs_cols()
        && sol.p.len() == system.rhs_cols()
        && sol.r.iter().chain(&sol.p).all(|v| *v >= 1)
        && system
            .lhs_matrix
            .iter()
            .zip(&system.rhs_matrix)
            .all(|(a, b)| matches!((dot(a, &sol.r), dot(b, &sol.p)), (Some(x), Some(y)) if x == y))
        && system.tie_constraints.iter().all(|&(l, r)| sol.r[l] == sol.p[r])
}

fn validate(system: &StoichSystem, m: usize, q: usize) -> Result<(), SolveError> {
    if m == 0 && q == 0 {
        return Err(SolveError::EmptySystem);
    }
    let rows = system.element_index.len();
    if system.lhs_matrix.len() != rows || system.rhs_matrix.len() != rows {
        return Err(SolveError::Shape("row count differs from the element index".into()));
    }
    if system.lhs_matrix.iter().any(|r| r.len() != m) || system.rhs_matrix.iter().any(|r| r.len() != q) {
        return Err(SolveError::Shape("ragged matrix".into()));
    }
    if system.tie_constraints.iter().any(|&(l, r)| l >= m || r >= q) {
        return Err(SolveError::Shape("tie constraint out of range".into()));
    }
    Ok(())
}

fn rational(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Reduced row echelon form in place; returns `(row, column)` of each pivot.
fn rref(rows: &mut Vec<Vec<BigRational>>, n: usize) -> Vec<(usize, usize)> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows.len()).find(|i| !rows[*i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot) {
                    *v -= &factor * pv;
                }
            }
        }
        pivots.push((r, c));
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// Primitive integer generator of a one-dimensional null space.
fn generator(rows: &[Vec<BigRational>], pivots: &[(usize, usize)], free: usize, n: usize) -> Result<Vec<u64>, SolveError> {
    let mut v = vec![BigRational::zero(); n];
    v[free] = BigRational::one();
    for &(row, col) in pivots {
        v[col] = -rows[row][free].clone();
    }
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign = if ints.iter().all(|x| x.is_negative()) { -BigInt::one() } else { BigInt::one() };
    ints.iter()
        .map(|x| {
            let y = x / &gcd * &sign;
            if !y.is_positive() {
                return Err(SolveError::NoPositiveSolution);
            }
            y.to_u64().ok_or(SolveError::Overflow)
        })
        .collect()
}

/// Pivot variable `col` satisfies `denom · x_col = Σ coefs[f] · x_free[f]`.
struct PivotRow {
    col: usize,
    denom: i128,
    coefs: Vec<i128>,
}

struct Search<'a> {
    rows: &'a [PivotRow],
    free: &'a [usize],
    n: usize,
    max: i128,
    bound: i128,
    /// Per row, per depth: min and max of the not-yet-assigned contribution.
    suffix: Vec<Vec<(i128, i128)>>,
    values: Vec<i128>,
    partial: Vec<i128>,
    best: Option<(u128, Vec<u64>)>,
    first_only: bool,
}

fn search(
    rows: &[Vec<BigRational>],
    pivots: &[(usize, usize)],
    free: &[usize],
    n: usize,
    max_coeff: u64,
) -> Result<Vec<u64>, SolveError> {
    if max_coeff == 0 {
        return Err(SolveError::SearchExhausted { max_coeff });
    }
    let max = i128::from(max_coeff);
    let mut prows = Vec::with_capacity(pivots.len());
    for &(row, col) in pivots {
        let lcm = free.iter().fold(BigInt::one(), |acc, f| acc.lcm(rows[row][*f].denom()));
        let scale = BigRational::from_integer(lcm.clone());
        let coefs = free
            .iter()
            .map(|f| (-&rows[row][*f] * &scale).to_integer().to_i128().ok_or(SolveError::Overflow))
            .collect::<Result<Vec<_>, _>>()?;
        prows.push(PivotRow { col, denom: lcm.to_i128().ok_or(SolveError::Overflow)?, coefs });
    }

    let mut s = Search {
        rows: &prows,
        free,
        n,
        max,
        bound: 1,
        suffix: Vec::new(),
        values: Vec::new(),
        partial: vec![0; prows.len()],
        best: None,
        first_only: true,
    };
    // widen the box until some solution appears, then search the full box
    // with its norm as the pruning bound
    let mut bound = 1;
    loop {
        s.run(bound);
        if s.best.is_some() || bound >= max {
            break;
        }
        bound = (bound * 2).min(max);
    }
    if s.best.is_none() {
        return Err(SolveError::SearchExhausted { max_coeff });
    }
    s.first_only = false;
    s.run(max);
    Ok(s.best.expect("solution kept").1)
}

impl Search<'_> {
    fn run(&mut self, bound: i128) {
        self.bound = bound;
        let d = self.free.len();
        self.suffix = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = vec![(0i128, 0i128); d + 1];
                for k in (0..d).rev() {
                    let (a, b) = (row.coefs[k], row.coefs[k] * bound);
                    acc[k] = (acc[k + 1].0 + a.min(b), acc[k + 1].1 + a.max(b));
                }
                acc
            })
            .collect();
        self.values.clear();
        self.partial.iter_mut().for_each(|p| *p = 0);
        self.dfs(0, 0);
    }

    fn done(&self) -> bool {
        self.first_only && self.best.is_some()
    }

    fn norm_floor(&self, depth: usize, sq: i128) -> i128 {
        sq + (self.free.len() - depth) as i128 + self.rows.len() as i128
    }

    fn dfs(&mut self, depth: usize, sq: i128) {
        for (i, row) in self.rows.iter().enumerate() {
            let (lo, hi) = self.suffix[i][depth];
            if self.partial[i] + hi < row.denom || self.partial[i] + lo > row.denom * self.max {
                return;
            }
        }
        if depth == self.free.len() {
            self.leaf();
            return;
        }
        for x in 1..=self.bound {
            if let Some((best, _)) = &self.best {
                if self.norm_floor(depth + 1, sq + x * x) as u128 > *best {
                    break;
                }
            }
            for (i, row) in self.rows.iter().enumerate() {
                self.partial[i] += row.coefs[depth] * x;
            }
            self.values.push(x);
            self.dfs(depth + 1, sq + x * x);
            self.values.pop();
            for (i, row) in self.rows.iter().enumerate() {
                self.partial[i] -= row.coefs[depth] * x;
            }
            if self.done() {
                return;
            }
        }
    }

    fn leaf(&mut self) {
        let mut x = vec![0u64; self.n];
        for (k, f) in self.free.iter().enumerate() {
            x[*f] = self.values[k] as u64;
        }
        for (i, row) in self.rows.iter().enumerate() {
            let num = self.partial[i];
            if num % row.denom != 0 {
                return;
            }
            let v = num / row.denom;
            if v < 1 || v > self.max {
                return;
            }
            x[row.col] = v as u64;
        }
        let norm: u128 = x.iter().map(|v| u128::from(*v) * u128::from(*v)).sum();
        let better = match &self.best {
            None => true,
            Some((bn, bx)) => match norm.cmp(bn) {
                Ordering::Less => true,
                Ordering::Equal => x < *bx,
                Ordering::Greater => false,
            },
        };
        if better {
            self.best = Some((norm, x));
        }
    }
}
