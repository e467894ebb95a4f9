use serde::{Deserialize, Serialize};

use super::{FieldError, FieldSpec};

/// A signed 1-based variable index; negative means negated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal(pub i32);

impl Literal {
    /// 0-based variable index.
    pub fn var(self) -> usize {
        self.0.unsigned_abs() as usize - 1
    }

    pub fn negated(self) -> bool {
        self.0 < 0
    }
}

/// A CNF formula with at most three literals per clause.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cnf3 {
    vars: usize,
    clauses: Vec<Vec<Literal>>,
}

impl Cnf3 {
    /// Validates indices and clause sizes. Repeated literals inside a clause
    /// are collapsed before the size check.
    pub fn new(vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, FieldError> {
        let mut out = Vec::with_capacity(clauses.len());
        for (ci, clause) in clauses.into_iter().enumerate() {
            if clause.is_empty() {
                return Err(FieldError::Formula(format!("clause {ci} is empty")));
            }
            let mut lits: Vec<Literal> = Vec::with_capacity(3);
            for l in clause {
                if l == 0 || l.unsigned_abs() as usize > vars {
                    return Err(FieldError::Formula(format!("clause {ci}: literal {l} outside 1..={vars}")));
                }
                if !lits.contains(&Literal(l)) {
                    lits.push(Literal(l));
                }
            }
            if lits.len() > 3 {
                return Err(FieldError::Formula(format!("clause {ci} has {} distinct literals", lits.len())));
            }
            out.push(lits);
        }
        Ok(Self { vars, clauses: out })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn eval(&self, z: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| z[l.var()] != l.negated()))
    }
}

/// Arithmetization in clause-term form: `f = sum_c prod_{l in c} (1 - val(l))`
/// with `val(x) = x` and `val(!x) = 1 - x`. On Boolean points `f` counts
/// falsified clauses, so `f(z) = 0` exactly when the formula holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArithPoly {
    vars: usize,
    terms: Vec<Vec<Literal>>,
}

pub fn arithmetize(phi: &Cnf3) -> ArithPoly {
    ArithPoly { vars: phi.vars, terms: phi.clauses.clone() }
}

impl ArithPoly {
    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn clause_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Vec<Literal>] {
        &self.terms
    }

    /// Total degree `d`.
    pub fn total_degree(&self) -> usize {
        self.terms.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Degree of `f` in variable `v` (0-based).
    pub fn var_degree(&self, v: usize) -> usize {
        self.terms.iter().map(|t| t.iter().filter(|l| l.var() == v).count()).max().unwrap_or(0)
    }

    /// Degree bound for the round polynomials of a sum of `f^2`.
    pub fn square_round_degree(&self) -> usize {
        2 * (0..self.vars).map(|v| self.var_degree(v)).max().unwrap_or(0)
    }

    /// Value of a single literal factor `1 - val(l)` at a field point.
    #[inline]
    pub fn factor(field: &FieldSpec, l: Literal, point: &[u64]) -> u64 {
        let x = point[l.var()];
        if l.negated() {
            x
        } else {
            field.sub(1, x)
        }
    }

    pub fn term_value(&self, field: &FieldSpec, term: usize, point: &[u64]) -> u64 {
        self.terms[term].iter().fold(1, |acc, &l| field.mul(acc, Self::factor(field, l, point)))
    }

    pub fn eval(&self, field: &FieldSpec, point: &[u64]) -> u64 {
        debug_assert_eq!(point.len(), self.vars);
        (0..self.terms.len()).fold(0, |acc, t| field.add(acc, self.term_value(field, t, point)))
    }

    /// Integer value on a Boolean point: the number of falsified clauses.
    pub fn eval_bool(&self, z: &[bool]) -> u64 {
        self.terms.iter().filter(|t| t.iter().all(|l| z[l.var()] == l.negated())).count() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(x: usize, m: usize) -> Vec<bool> {
        (0..m).map(|i| (x >> i) & 1 == 1).collect()
    }

    #[test]
    fn clause_term_examples() {
        let f = FieldSpec::prime(7).unwrap();
        let phi = Cnf3::new(3, vec![vec![1, 2, 3]]).unwrap();
        let a = arithmetize(&phi);
        assert_eq!(a.eval(&f, &[0, 0, 0]), 1);
        assert_eq!(a.eval(&f, &[1, 0, 0]), 0);
    }

    #[test]
    fn tautological_clause_vanishes_on_cube() {
        // (x1 | !x1 | x2) gives (1 - x1) * x1 * (1 - x2)
        let f = FieldSpec::prime(7).unwrap();
        let a = arithmetize(&Cnf3::new(2, vec![vec![1, -1, 2]]).unwrap());
        for z in 0..4u64 {
            let p = [z & 1, z >> 1];
            assert_eq!(a.eval(&f, &p), 0);
            let expect = f.mul(f.mul(f.sub(1, p[0]), p[0]), f.sub(1, p[1]));
            assert_eq!(a.eval(&f, &p), expect);
        }
        // off the cube it is not identically zero
        assert_ne!(a.eval(&f, &[3, 4]), 0);
        assert_eq!(a.var_degree(0), 2);
        assert_eq!(a.square_round_degree(), 4);
    }

    #[test]
    fn malformed_formulas() {
        assert!(Cnf3::new(2, vec![vec![]]).is_err());
        assert!(Cnf3::new(2, vec![vec![3]]).is_err());
        assert!(Cnf3::new(2, vec![vec![0]]).is_err());
        assert!(Cnf3::new(4, vec![vec![1, 2, 3, 4]]).is_err());
        let padded = Cnf3::new(2, vec![vec![1, 1, 2, 2]]).unwrap();
        assert_eq!(padded.clauses()[0].len(), 2);
    }

    proptest! {
        #[test]
        fn arithmetization_zero_iff_satisfied(
            m in 1usize..=12,
            raw in prop::collection::vec(prop::collection::vec((1i32..=12, any::<bool>()), 1..=3), 1..8),
        ) {
            let clauses: Vec<Vec<i32>> = raw
                .into_iter()
                .map(|c| c.into_iter().map(|(v, neg)| {
                    let v = (v - 1) % m as i32 + 1;
                    if neg { -v } else { v }
                }).collect())
                .collect();
            let phi = Cnf3::new(m, clauses).unwrap();
            let a = arithmetize(&phi);
            let f = FieldSpec::prime(65521).unwrap();
            for x in 0..(1usize << m) {
                let z = bits(x, m);
                let point: Vec<u64> = z.iter().map(|&b| b as u64).collect();
                let v = a.eval(&f, &point);
                prop_assert_eq!(v == 0, phi.eval(&z));
                prop_assert_eq!(v, a.eval_bool(&z));
            }
        }
    }
}
