//! Oracle-3-SAT, the sumcheck protocol, and the two-prover protocol that
//! checks an oracle through its multilinear extension, in the classic
//! single-verifier form and in the locality-explicit rewrite.

mod provers;
mod questions;
mod runs;
mod sumcheck;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{arithmetize, mle_values, ArithPoly, BoolTable, Cnf3, FieldError, FieldSpec};
use crate::runtime::RuntimeError;

pub use provers::{best_constant, solve_non_boolean_oracle, BflProver, BflResponder, BflStrategy};
pub use questions::{multilinearity_test, BflCoins, LineTest, QueryPlan, VerifierProgram};
pub use runs::{
    amplification_rounds, run_bfl_amplified, run_bfl_classic, run_bfl_lemip, run_bfl_reference, BflFailure, BflMode,
    BflOutcome, LABEL_CROSS_ANSWER,
};
pub use sumcheck::{
    honest_round, run_sumcheck, run_sumcheck_with, sumcheck_rounds, HonestSumcheck, OracleSum, PlainSum, PointSet, RootPlanting,
    ShiftProver, SumPoly, SumcheckOutcome, SumcheckProver, SumcheckState,
};

#[derive(Debug, Error)]
pub enum BflError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("instance too large for exhaustive search: {0}")]
    SizeGuard(String),
    #[error("instance: {0}")]
    Instance(String),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("this cheat needs an odd prime field")]
    NeedsOddPrime,
    #[error("no non-Boolean zero-sum oracle found after {0} attempts")]
    NoSolution(usize),
}

/// Instance file layout: variables `1..=r` are `z`, then three blocks of `s`
/// oracle-argument variables, then `t1, t2, t3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub r: usize,
    pub s: usize,
    pub clauses: Vec<Vec<i32>>,
}

/// A 3-CNF `B(z, b1, b2, b3, t1, t2, t3)`; it is oracle-satisfiable when some
/// `A: {0,1}^s -> {0,1}` makes `B(z, b, A(b1), A(b2), A(b3))` hold everywhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Oracle3SatInstance {
    r: usize,
    s: usize,
    formula: Cnf3,
    arith: ArithPoly,
}

impl Oracle3SatInstance {
    pub fn new(r: usize, s: usize, clauses: Vec<Vec<i32>>) -> Result<Self, BflError> {
        if s == 0 {
            return Err(BflError::Instance("oracle arity s must be at least 1".into()));
        }
        let formula = Cnf3::new(r + 3 * s + 3, clauses)?;
        let arith = arithmetize(&formula);
        Ok(Self { r, s, formula, arith })
    }

    pub fn from_file(file: InstanceFile) -> Result<Self, BflError> {
        Self::new(file.r, file.s, file.clauses)
    }

    pub fn from_json(text: &str) -> Result<Self, BflError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| BflError::Instance(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn to_file(&self) -> InstanceFile {
        let clauses = self.formula.clauses().iter().map(|c| c.iter().map(|l| l.0).collect()).collect();
        InstanceFile { r: self.r, s: self.s, clauses }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Sumcheck variables `m = r + 3s`.
    pub fn m(&self) -> usize {
        self.r + 3 * self.s
    }

    /// All variables `k = r + 3s + 3`.
    pub fn k(&self) -> usize {
        self.m() + 3
    }

    pub fn formula(&self) -> &Cnf3 {
        &self.formula
    }

    pub fn arith(&self) -> &ArithPoly {
        &self.arith
    }

    /// 0-based index of `t_j`, `j in 0..3`.
    pub fn t_var(&self, j: usize) -> usize {
        self.m() + j
    }

    /// 0-based range of the oracle-argument block `b_j`.
    pub fn block(&self, j: usize) -> std::ops::Range<usize> {
        let start = self.r + j * self.s;
        start..start + self.s
    }

    /// Whether `t_j` occurs in some clause.
    pub fn uses_t(&self, j: usize) -> bool {
        self.arith.var_degree(self.t_var(j)) > 0
    }

    /// Per-round degree bound for `sum F^2` where
    /// `F(z, b) = f(z, b, A^(b1), A^(b2), A^(b3))`.
    pub fn round_degree(&self) -> usize {
        let f = &self.arith;
        let per_var = |v: usize| -> usize {
            let owner = (0..3).find(|&j| self.block(j).contains(&v));
            f.terms()
                .iter()
                .map(|t| {
                    let own = t.iter().filter(|l| l.var() == v).count();
                    let via = owner.map_or(0, |j| t.iter().filter(|l| l.var() == self.t_var(j)).count());
                    own + via
                })
                .max()
                .unwrap_or(0)
        };
        2 * (0..self.m()).map(per_var).max().unwrap_or(0)
    }

    /// `F` at a point of length `m`, with oracle values read from the
    /// multilinear extension of `table` (which may hold any field values).
    pub fn oracle_f(&self, field: &FieldSpec, table: &[u64], point: &[u64]) -> u64 {
        let mut full = Vec::with_capacity(self.k());
        full.extend_from_slice(point);
        for j in 0..3 {
            full.push(mle_values(field, table, &point[self.block(j)]).expect("table matches s"));
        }
        self.arith.eval(field, &full)
    }

    /// `f` at `(z, b)` with explicit oracle values `t`.
    pub fn f_with(&self, field: &FieldSpec, point: &[u64], t: [u64; 3]) -> u64 {
        let mut full = point.to_vec();
        full.extend_from_slice(&t);
        self.arith.eval(field, &full)
    }

    /// Number of `(z, b)` cube points where `B` fails under `oracle`.
    pub fn falsified(&self, oracle: &BoolTable) -> u64 {
        let m = self.m();
        let mut z = vec![false; self.k()];
        let mut count = 0;
        for x in 0u64..(1 << m) {
            for (v, slot) in z.iter_mut().enumerate().take(m) {
                *slot = (x >> v) & 1 == 1;
            }
            for j in 0..3 {
                z[self.t_var(j)] = oracle.get(&z[self.block(j)]);
            }
            if !self.formula.eval(&z) {
                count += 1;
            }
        }
        count
    }
}

/// Exhaustive search over all `2^(2^s)` oracles; the first 3-satisfying one
/// in code order, or `None`.
pub fn brute_force_oracle(inst: &Oracle3SatInstance) -> Result<Option<BoolTable>, BflError> {
    if inst.s > 4 || inst.r > 4 {
        return Err(BflError::SizeGuard(format!("need 2^s <= 16 and r <= 4, got s={} r={}", inst.s, inst.r)));
    }
    let codes = 1u64 << (1 << inst.s);
    Ok((0..codes).map(|c| BoolTable::from_code(inst.s, c)).find(|a| inst.falsified(a) == 0))
}
