use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sumcheck::{honest_round, OracleSum, PointSet, RootPlanting, ShiftProver, SumcheckProver};
use super::{BflError, Oracle3SatInstance};
use crate::fields::{interpolate, mle_values, sqrt_mod, BoolTable, FieldSpec};
use crate::runtime::derive_seed;

/// The first prover: sumcheck rounds, the three oracle values at the final
/// point, and answers to line questions.
pub trait BflProver {
    fn sumcheck_round(&mut self, prefix: &[u64], claim: u64) -> Vec<u64>;
    fn endpoint(&mut self, point: &[u64], claim: u64) -> [u64; 3];
    fn answer(&mut self, q: &[u64]) -> u64;
}

/// The second prover, asked a single question.
pub trait BflResponder {
    fn answer(&mut self, q: &[u64]) -> u64;
}

/// Prover pairs for the protocol.
#[derive(Clone, Debug, PartialEq)]
pub enum BflStrategy {
    /// Both provers answer from the multilinear extension of a table.
    Honest(BoolTable),
    /// The constant oracle with fewest violations, with root-planting
    /// sumcheck lies.
    BestConstant,
    /// Both provers answer from one keyed random function; sumcheck
    /// polynomials are random.
    RandomAnswers,
    /// Round checks kept true by shifting, then one oracle value at the
    /// final point solved so the final check passes.
    EndpointLie,
    /// An honest run on a non-Boolean table whose squared sum vanishes.
    NonBoolean(Vec<u64>),
    /// Honest first prover; the second answers off by one.
    Inconsistent(BoolTable),
}

impl BflStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            BflStrategy::Honest(_) => "honest",
            BflStrategy::BestConstant => "best-constant",
            BflStrategy::RandomAnswers => "random-answers",
            BflStrategy::EndpointLie => "endpoint-lie",
            BflStrategy::NonBoolean(_) => "non-boolean",
            BflStrategy::Inconsistent(_) => "inconsistent",
        }
    }

    /// Both provers, built from the shared prover string seed.
    pub fn build(
        &self,
        field: FieldSpec,
        inst: &Oracle3SatInstance,
        prover_seed: u64,
    ) -> Result<(Box<dyn BflProver>, Box<dyn BflResponder>), BflError> {
        let bits = |t: &BoolTable| t.bits().iter().map(|&b| b as u64).collect::<Vec<u64>>();
        let table_pair = |table: Vec<u64>, rounds: RoundMode, lie: bool, offset: u64| {
            let sum = OracleSum { field, inst: inst.clone(), table: table.clone() };
            let p1: Box<dyn BflProver> = Box::new(TableProver { sum, rounds, lie });
            let p2: Box<dyn BflResponder> = Box::new(TableResponder { field, table, offset });
            (p1, p2)
        };
        Ok(match self {
            BflStrategy::Honest(t) => table_pair(bits(t), RoundMode::Honest, false, 0),
            BflStrategy::Inconsistent(t) => table_pair(bits(t), RoundMode::Honest, false, 1),
            BflStrategy::NonBoolean(table) => {
                if table.len() != 1 << inst.s() {
                    return Err(BflError::Instance("table size must be 2^s".into()));
                }
                table_pair(table.clone(), RoundMode::Honest, false, 0)
            }
            BflStrategy::BestConstant => {
                let rng = ChaCha8Rng::seed_from_u64(prover_seed);
                table_pair(bits(&best_constant(inst)), RoundMode::Planting(rng), false, 0)
            }
            BflStrategy::EndpointLie => {
                if field.is_binary() || field.order() == 2 {
                    return Err(BflError::NeedsOddPrime);
                }
                table_pair(bits(&best_constant(inst)), RoundMode::Shift, true, 0)
            }
            BflStrategy::RandomAnswers => {
                let bound = inst.round_degree();
                let p1: Box<dyn BflProver> =
                    Box::new(RandomProver { field, key: prover_seed, bound, rng: ChaCha8Rng::seed_from_u64(prover_seed) });
                (p1, Box::new(RandomResponder { field, key: prover_seed }))
            }
        })
    }
}

/// The constant oracle violating the fewest cube points (ties go to 0).
pub fn best_constant(inst: &Oracle3SatInstance) -> BoolTable {
    let zero = BoolTable::constant(inst.s(), false);
    let one = BoolTable::constant(inst.s(), true);
    if inst.falsified(&one) < inst.falsified(&zero) {
        one
    } else {
        zero
    }
}

enum RoundMode {
    Honest,
    Planting(ChaCha8Rng),
    Shift,
}

struct TableProver {
    sum: OracleSum,
    rounds: RoundMode,
    lie: bool,
}

impl TableProver {
    fn extension(&self, q: &[u64]) -> u64 {
        mle_values(&self.sum.field, &self.sum.table, q).expect("table matches s")
    }
}

impl BflProver for TableProver {
    fn sumcheck_round(&mut self, prefix: &[u64], claim: u64) -> Vec<u64> {
        match &mut self.rounds {
            RoundMode::Honest => honest_round(&self.sum, prefix).coeffs().to_vec(),
            RoundMode::Shift => ShiftProver { poly: &self.sum }.round(prefix, claim),
            RoundMode::Planting(rng) => {
                RootPlanting { poly: &self.sum, set: PointSet::Field, rng: &mut *rng }.round(prefix, claim)
            }
        }
    }

    fn endpoint(&mut self, point: &[u64], claim: u64) -> [u64; 3] {
        let inst = &self.sum.inst;
        let honest = [0, 1, 2].map(|j| self.extension(&point[inst.block(j)]));
        if self.lie {
            solve_endpoint(&self.sum.field, inst, point, claim, honest).unwrap_or(honest)
        } else {
            honest
        }
    }

    fn answer(&mut self, q: &[u64]) -> u64 {
        self.extension(q)
    }
}

struct TableResponder {
    field: FieldSpec,
    table: Vec<u64>,
    offset: u64,
}

impl BflResponder for TableResponder {
    fn answer(&mut self, q: &[u64]) -> u64 {
        self.field.add(mle_values(&self.field, &self.table, q).expect("table matches s"), self.offset)
    }
}

fn keyed_answer(field: &FieldSpec, key: u64, q: &[u64]) -> u64 {
    let h = q.iter().fold(key, |h, &x| derive_seed(h, x));
    field.random(&mut ChaCha8Rng::seed_from_u64(h))
}

struct RandomProver {
    field: FieldSpec,
    key: u64,
    bound: usize,
    rng: ChaCha8Rng,
}

impl BflProver for RandomProver {
    fn sumcheck_round(&mut self, _prefix: &[u64], _claim: u64) -> Vec<u64> {
        (0..=self.bound).map(|_| self.field.random(&mut self.rng)).collect()
    }

    fn endpoint(&mut self, _point: &[u64], _claim: u64) -> [u64; 3] {
        [0; 3].map(|_| self.field.random(&mut self.rng))
    }

    fn answer(&mut self, q: &[u64]) -> u64 {
        keyed_answer(&self.field, self.key, q)
    }
}

struct RandomResponder {
    field: FieldSpec,
    key: u64,
}

impl BflResponder for RandomResponder {
    fn answer(&mut self, q: &[u64]) -> u64 {
        keyed_answer(&self.field, self.key, q)
    }
}

/// Roots of `c0 + c1 x + c2 x^2` over an odd prime field.
fn quadratic_roots(field: &FieldSpec, [c0, c1, c2]: [u64; 3]) -> Vec<u64> {
    let f = field;
    if c2 == 0 {
        return match (c1, c0) {
            (0, 0) => vec![0],
            (0, _) => vec![],
            _ => vec![f.div(f.neg(c0), c1).expect("nonzero")],
        };
    }
    let disc = f.sub(f.mul(c1, c1), f.mul(4, f.mul(c2, c0)));
    let Some(root) = sqrt_mod(disc, f.order()) else { return vec![] };
    let two_a = f.mul(2, c2);
    [root, f.neg(root)].iter().map(|&r| f.div(f.sub(r, c1), two_a).expect("nonzero")).collect()
}

/// Replaces one oracle value (the last `t_j` present in `B`) so that
/// `f(point, t)^2 = claim`, keeping the others at `honest`.
fn solve_endpoint(
    field: &FieldSpec,
    inst: &Oracle3SatInstance,
    point: &[u64],
    claim: u64,
    honest: [u64; 3],
) -> Option<[u64; 3]> {
    let root = sqrt_mod(claim, field.order())?;
    for j in (0..3).rev().filter(|&j| inst.uses_t(j)) {
        let at = |x: u64| {
            let mut t = honest;
            t[j] = x;
            inst.f_with(field, point, t)
        };
        let poly = interpolate(*field, &[0, 1, 2], &[at(0), at(1), at(2)]).ok()?;
        let c = poly.padded(3);
        for y in [root, field.neg(root)] {
            if let Some(&x) = quadratic_roots(field, [field.sub(c[0], y), c[1], c[2]]).first() {
                let mut t = honest;
                t[j] = x;
                return Some(t);
            }
        }
    }
    None
}

/// Searches for a table `G` on `{0,1}^s`, not all Boolean, with
/// `sum_{z,b} f(z, b, G(b1), G(b2), G(b3))^2 = 0` in the field. All entries
/// but the last are random; the last solves a univariate equation of degree
/// at most 6, found by scanning the field.
pub fn solve_non_boolean_oracle<R: Rng + ?Sized>(
    field: &FieldSpec,
    inst: &Oracle3SatInstance,
    rng: &mut R,
    attempts: usize,
) -> Result<Vec<u64>, BflError> {
    if field.order() > 1 << 24 {
        return Err(BflError::SizeGuard("field scan limited to 2^24 elements".into()));
    }
    let n = 1usize << inst.s();
    let m = inst.m();
    let total = |table: &[u64]| -> u64 {
        let mut point = vec![0u64; m];
        let mut acc = 0;
        for x in 0u64..(1 << m) {
            for (v, slot) in point.iter_mut().enumerate() {
                *slot = (x >> v) & 1;
            }
            let t = [0, 1, 2].map(|j| {
                let idx = inst.block(j).enumerate().fold(0, |a, (bit, v)| a | ((point[v] as usize) << bit));
                table[idx]
            });
            let v = inst.f_with(field, &point, t);
            acc = field.add(acc, field.mul(v, v));
        }
        acc
    };
    for _ in 0..attempts {
        let mut table: Vec<u64> = (0..n).map(|_| field.random(rng)).collect();
        let xs: Vec<u64> = (0..7).collect();
        let ys: Vec<u64> = xs
            .iter()
            .map(|&x| {
                table[n - 1] = x;
                total(&table)
            })
            .collect();
        let poly = interpolate(*field, &xs, &ys)?;
        if poly.degree().is_none() {
            continue;
        }
        if let Some(x) = field.elements().find(|&x| poly.eval(x) == 0) {
            table[n - 1] = x;
            if table.iter().any(|&v| v > 1) {
                return Ok(table);
            }
        }
    }
    Err(BflError::NoSolution(attempts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bfl::sumcheck::run_sumcheck_with;

    fn f() -> FieldSpec {
        FieldSpec::prime(65521).unwrap()
    }

    #[test]
    fn quadratic_roots_solve() {
        let f = f();
        // (x - 3)(x - 10) = x^2 - 13x + 30
        let mut r = quadratic_roots(&f, [30, f.neg(13), 1]);
        r.sort();
        assert_eq!(r, vec![3, 10]);
        assert_eq!(quadratic_roots(&f, [4, 2, 0]), vec![f.neg(2)]);
    }

    #[test]
    fn endpoint_solution_meets_the_claim() {
        let f = f();
        let inst = Oracle3SatInstance::new(0, 1, vec![vec![4], vec![-5]]).unwrap();
        let point = vec![11, 22, 33];
        let claim = 16;
        let t = solve_endpoint(&f, &inst, &point, claim, [5, 6, 7]).unwrap();
        let v = inst.f_with(&f, &point, t);
        assert_eq!(f.mul(v, v), claim);
        assert_eq!(t[0], 5);
    }

    #[test]
    fn non_boolean_oracle_zeroes_an_unsatisfiable_sum() {
        let f = f();
        let inst = Oracle3SatInstance::new(0, 1, vec![vec![4], vec![-5]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let table = solve_non_boolean_oracle(&f, &inst, &mut rng, 16).unwrap();
        // the cube sum is 2·(4 + 2(g1 - g0)^2), so (g1 - g0)^2 = -2
        let d = f.sub(table[1], table[0]);
        assert_eq!(f.mul(d, d), f.neg(2));
        let sum = OracleSum { field: f, inst: inst.clone(), table };
        let challenges = vec![123, 456, 789];
        let out = run_sumcheck_with(&sum, &mut crate::bfl::HonestSumcheck { poly: &sum }, &challenges);
        assert!(out.accepted);
    }

    #[test]
    fn best_constant_prefers_fewer_violations() {
        let inst = Oracle3SatInstance::new(0, 1, vec![vec![4], vec![5, 1]]).unwrap();
        assert_eq!(best_constant(&inst), BoolTable::constant(1, true));
    }
}
