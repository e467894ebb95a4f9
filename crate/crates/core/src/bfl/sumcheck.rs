use rand::seq::index::sample;
use rand::Rng;

use super::Oracle3SatInstance;
use crate::fields::{interpolate, ArithPoly, FieldSpec, UnivariatePoly};

/// A polynomial whose squares are summed over the Boolean cube.
pub trait SumPoly {
    fn field(&self) -> FieldSpec;
    fn vars(&self) -> usize;
    /// Degree bound of every round polynomial of `sum F^2`.
    fn round_degree(&self) -> usize;
    fn eval(&self, point: &[u64]) -> u64;
}

/// `F = f` for an arithmetized formula.
#[derive(Clone, Debug)]
pub struct PlainSum {
    pub field: FieldSpec,
    pub poly: ArithPoly,
}

impl SumPoly for PlainSum {
    fn field(&self) -> FieldSpec {
        self.field
    }
    fn vars(&self) -> usize {
        self.poly.vars()
    }
    fn round_degree(&self) -> usize {
        self.poly.square_round_degree()
    }
    fn eval(&self, point: &[u64]) -> u64 {
        self.poly.eval(&self.field, point)
    }
}

/// `F(z, b) = f(z, b, A^(b1), A^(b2), A^(b3))` for an oracle table.
#[derive(Clone, Debug)]
pub struct OracleSum {
    pub field: FieldSpec,
    pub inst: Oracle3SatInstance,
    pub table: Vec<u64>,
}

impl SumPoly for OracleSum {
    fn field(&self) -> FieldSpec {
        self.field
    }
    fn vars(&self) -> usize {
        self.inst.m()
    }
    fn round_degree(&self) -> usize {
        self.inst.round_degree()
    }
    fn eval(&self, point: &[u64]) -> u64 {
        self.inst.oracle_f(&self.field, &self.table, point)
    }
}

/// The set `I` the verifier draws its challenges from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointSet {
    Field,
    Subset(Vec<u64>),
}

impl PointSet {
    pub fn sample<R: Rng + ?Sized>(&self, field: &FieldSpec, rng: &mut R) -> u64 {
        match self {
            PointSet::Field => field.random(rng),
            PointSet::Subset(v) => v[rng.gen_range(0..v.len())],
        }
    }

    pub fn size(&self, field: &FieldSpec) -> u64 {
        match self {
            PointSet::Field => field.order(),
            PointSet::Subset(v) => v.len() as u64,
        }
    }

    /// `n` distinct members.
    fn distinct<R: Rng + ?Sized>(&self, field: &FieldSpec, n: usize, rng: &mut R) -> Vec<u64> {
        match self {
            PointSet::Field => {
                let mut out: Vec<u64> = Vec::with_capacity(n);
                while out.len() < n {
                    let x = field.random(rng);
                    if !out.contains(&x) {
                        out.push(x);
                    }
                }
                out
            }
            PointSet::Subset(v) => sample(rng, v.len(), n.min(v.len())).into_iter().map(|i| v[i]).collect(),
        }
    }
}

/// `g_i(x) = sum over the remaining cube of F(prefix, x, rest)^2`, found by
/// evaluating at `0..=D` and interpolating.
pub fn honest_round(sp: &dyn SumPoly, prefix: &[u64]) -> UnivariatePoly {
    let field = sp.field();
    let m = sp.vars();
    let rest = m - prefix.len() - 1;
    let d = sp.round_degree();
    let xs: Vec<u64> = (0..=d as u64).map(|x| field.reduce(x)).collect();
    let mut point = prefix.to_vec();
    point.resize(m, 0);
    let ys: Vec<u64> = xs
        .iter()
        .map(|&x| {
            point[prefix.len()] = x;
            let mut acc = 0;
            for bits in 0u64..(1 << rest) {
                for j in 0..rest {
                    point[prefix.len() + 1 + j] = (bits >> j) & 1;
                }
                let v = sp.eval(&point);
                acc = field.add(acc, field.mul(v, v));
            }
            acc
        })
        .collect();
    interpolate(field, &xs, &ys).expect("distinct points")
}

/// One sumcheck prover: given the challenges so far and the current claim,
/// return the next round polynomial as coefficients.
pub trait SumcheckProver {
    fn round(&mut self, prefix: &[u64], claim: u64) -> Vec<u64>;
}

pub struct HonestSumcheck<'a> {
    pub poly: &'a dyn SumPoly,
}

impl SumcheckProver for HonestSumcheck<'_> {
    fn round(&mut self, prefix: &[u64], _claim: u64) -> Vec<u64> {
        honest_round(self.poly, prefix).coeffs().to_vec()
    }
}

/// Lies while the claim is false, sending `g + lambda·prod (x - a_j)` with
/// `D` distinct roots `a_j` drawn from `I`, so the lie turns true exactly
/// when the challenge hits a root.
pub struct RootPlanting<'a, R: Rng> {
    pub poly: &'a dyn SumPoly,
    pub set: PointSet,
    pub rng: R,
}

impl<R: Rng> SumcheckProver for RootPlanting<'_, R> {
    fn round(&mut self, prefix: &[u64], claim: u64) -> Vec<u64> {
        let f = self.poly.field();
        let g = honest_round(self.poly, prefix);
        let diff = f.sub(claim, f.add(g.eval(0), g.eval(1)));
        if diff == 0 {
            return g.coeffs().to_vec();
        }
        let d = self.poly.round_degree().max(1);
        loop {
            let roots = self.set.distinct(&f, d, &mut self.rng);
            let planted = UnivariatePoly::from_roots(f, &roots);
            let ends = f.add(planted.eval(0), planted.eval(1));
            if let Ok(lambda) = f.div(diff, ends) {
                return g.add(&planted.scale(lambda)).coeffs().to_vec();
            }
        }
    }
}

/// Keeps every round check true by sending `g + (claim - g(0) - g(1))·x`;
/// the error is pushed to the final claim.
pub struct ShiftProver<'a> {
    pub poly: &'a dyn SumPoly,
}

impl SumcheckProver for ShiftProver<'_> {
    fn round(&mut self, prefix: &[u64], claim: u64) -> Vec<u64> {
        let f = self.poly.field();
        let g = honest_round(self.poly, prefix);
        let diff = f.sub(claim, f.add(g.eval(0), g.eval(1)));
        let shift = UnivariatePoly::new(f, vec![0, diff]).expect("canonical");
        g.add(&shift).coeffs().to_vec()
    }
}

/// Verifier-side record of one sumcheck: the running claims `s_0..s_i`
/// and the challenges used so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumcheckState {
    pub round: usize,
    pub claims: Vec<u64>,
    pub challenges: Vec<u64>,
    pub bound: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumcheckOutcome {
    pub accepted: bool,
    /// The round that failed (1-based), `m + 1` for the final check.
    pub failed_at: Option<usize>,
    pub state: SumcheckState,
}

/// Runs the rounds against pre-drawn challenges and returns the state. The
/// final claim `s_m` is `state.claims[m]` when no round failed.
pub fn sumcheck_rounds(
    field: &FieldSpec,
    bound: usize,
    challenges: &[u64],
    mut next: impl FnMut(&[u64], u64) -> Vec<u64>,
) -> (SumcheckState, Option<usize>) {
    let mut st = SumcheckState { round: 0, claims: vec![0], challenges: Vec::new(), bound };
    for (i, &r) in challenges.iter().enumerate() {
        st.round = i + 1;
        let claim = *st.claims.last().expect("s_0");
        let g = match UnivariatePoly::with_bound(*field, next(&st.challenges, claim), bound) {
            Ok(g) => g,
            Err(_) => return (st, Some(i + 1)),
        };
        if field.add(g.eval(0), g.eval(1)) != claim {
            return (st, Some(i + 1));
        }
        st.challenges.push(r);
        st.claims.push(g.eval(r));
    }
    (st, None)
}

/// The full protocol for `sum F^2 = 0`: rounds, then `s_m = F(r)^2`.
pub fn run_sumcheck<R: Rng + ?Sized>(
    sp: &dyn SumPoly,
    prover: &mut dyn SumcheckProver,
    set: &PointSet,
    verifier_rng: &mut R,
) -> SumcheckOutcome {
    let field = sp.field();
    let challenges: Vec<u64> = (0..sp.vars()).map(|_| set.sample(&field, verifier_rng)).collect();
    run_sumcheck_with(sp, prover, &challenges)
}

/// [`run_sumcheck`] with explicit challenges.
pub fn run_sumcheck_with(sp: &dyn SumPoly, prover: &mut dyn SumcheckProver, challenges: &[u64]) -> SumcheckOutcome {
    let field = sp.field();
    let (state, failed) = sumcheck_rounds(&field, sp.round_degree(), challenges, |p, c| prover.round(p, c));
    if failed.is_some() {
        return SumcheckOutcome { accepted: false, failed_at: failed, state };
    }
    let v = sp.eval(&state.challenges);
    let ok = state.claims[sp.vars()] == field.mul(v, v);
    SumcheckOutcome { accepted: ok, failed_at: (!ok).then_some(sp.vars() + 1), state }
}
