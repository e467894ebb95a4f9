//! Exact view distributions, real against simulated, by enumerating every
//! random choice of the pieces the verifiers see: commitments with one
//! opened combination, multiplication masks, and the hashed consistency
//! answers.

use std::collections::BTreeMap;

use super::SimulatorKind;
use crate::boxes::PrBox;
use crate::commitments::{equivocate, hom_linear, pr_commit_full, pr_unveil_verify, CommitKeys, Mode, Opening, PrCommitment};
use crate::fields::{mle_values, FieldSpec};
use crate::zk_protocol::{su2_hash, HashKey};

/// Outcome tuple to number of random choices producing it.
pub type Histogram = BTreeMap<Vec<u64>, u64>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExactComparison {
    pub real: Histogram,
    pub sim: Histogram,
}

impl ExactComparison {
    fn total(h: &Histogram) -> u128 {
        h.values().map(|&c| c as u128).sum()
    }

    /// Same support and same probabilities (compared as cross products so
    /// the two enumerations may differ in size).
    pub fn equal(&self) -> bool {
        let (tr, ts) = (Self::total(&self.real), Self::total(&self.sim));
        self.real.len() == self.sim.len()
            && self.real.iter().all(|(k, &c)| self.sim.get(k).is_some_and(|&d| c as u128 * ts == d as u128 * tr))
    }
}

/// Two committed values and one opened combination `a0·v0 + a1·v1`. The
/// verifiers see `(z1, z2, c0, c1, d0, d1, w1, w2)` where `(w1, w2)` opens
/// the combination. The real side enumerates keys and openings; the
/// simulator enumerates keys, uniform `c`s and box outputs, and
/// equivocates the combination to its value (or, broken, enumerates
/// uniform openings as well).
pub fn opening_histograms(field: &FieldSpec, values: [u64; 2], coeffs: [u64; 2], kind: SimulatorKind) -> ExactComparison {
    let target = field.add(field.mul(coeffs[0], values[0]), field.mul(coeffs[1], values[1]));
    let elems: Vec<u64> = field.elements().collect();
    let keys: Vec<u64> = elems.iter().copied().filter(|&z| z != 0).collect();
    let mut out = ExactComparison::default();
    for &z1 in &keys {
        for &z2 in &keys {
            let k = CommitKeys { z1, z2 };
            for_each_tuple(&elems, 4, |w| {
                let a = pr_commit_full(field, k, values[0], Opening { w1: w[0], w2: w[1] }).expect("canonical");
                let b = pr_commit_full(field, k, values[1], Opening { w1: w[2], w2: w[3] }).expect("canonical");
                let (_, o) = hom_linear(field, &[(a, Opening { w1: w[0], w2: w[1] }), (b, Opening { w1: w[2], w2: w[3] })], &coeffs)
                    .expect("same keys");
                *out.real.entry(vec![z1, z2, a.c, b.c, a.d, b.d, o.w1, o.w2]).or_default() += 1;
            });
            for_each_tuple(&elems, 4, |r| {
                let (c, x) = ([r[0], r[1]], [r[2], r[3]]);
                let lin = |v: [u64; 2]| field.add(field.mul(coeffs[0], v[0]), field.mul(coeffs[1], v[1]));
                let com = PrCommitment { keys: k, c: lin(c), d: lin(x) };
                match kind {
                    SimulatorKind::Faithful => {
                        let mut bx = PrBox::with_output(*field, com.d).expect("canonical");
                        bx.input_b(z2).expect("fresh box");
                        let o = equivocate(field, &mut bx, target, com.c, z1).expect("side B has input");
                        let shown = pr_unveil_verify(field, &com, o, Mode::Field).expect("equivocation verifies");
                        assert_eq!(shown, target);
                        *out.sim.entry(vec![z1, z2, c[0], c[1], x[0], x[1], o.w1, o.w2]).or_default() += 1;
                    }
                    SimulatorKind::Broken => {
                        for_each_tuple(&elems, 2, |o| {
                            *out.sim.entry(vec![z1, z2, c[0], c[1], x[0], x[1], o[0], o[1]]).or_default() += 1;
                        });
                    }
                }
            });
        }
    }
    out
}

/// The opened masks `(x - alpha, y - beta)` of one multiplication, over a
/// uniform triple. The simulator multiplies its fake inputs `(0, 0)`.
pub fn mask_histograms(field: &FieldSpec, x: u64, y: u64) -> ExactComparison {
    let mut out = ExactComparison::default();
    for alpha in field.elements() {
        for beta in field.elements() {
            *out.real.entry(vec![field.sub(x, alpha), field.sub(y, beta)]).or_default() += 1;
            *out.sim.entry(vec![field.sub(0, alpha), field.sub(0, beta)]).or_default() += 1;
        }
    }
    out
}

/// `(Omega_1, Omega_2)` over every hash key, when V1's question is `q` and
/// V2 asks `q2`. The real provers add the oracle's multilinear extension
/// `table`; the simulators' fake oracle is all zero.
pub fn consistency_histograms(field: &FieldSpec, table: &[u64], q: &[u64], q2: &[u64]) -> ExactComparison {
    let s = q.len();
    let elems: Vec<u64> = field.elements().collect();
    let zero = vec![0; table.len()];
    let mut out = ExactComparison::default();
    for_each_tuple(&elems, s + 1, |g| {
        let key = HashKey { a: g[..s].to_vec(), b: g[s] };
        for (oracle, hist) in [(table, &mut out.real), (&zero[..], &mut out.sim)] {
            let omega = |point: &[u64]| {
                let answer = mle_values(field, oracle, point).expect("point in field");
                field.add(answer, su2_hash(field, &key, point).expect("matching dimension"))
            };
            *hist.entry(vec![omega(q), omega(q2)]).or_default() += 1;
        }
    });
    out
}

/// Calls `f` on every length-`n` tuple over `elems`.
fn for_each_tuple(elems: &[u64], n: usize, mut f: impl FnMut(&[u64])) {
    let mut idx = vec![0usize; n];
    let mut cur: Vec<u64> = vec![elems[0]; n];
    loop {
        f(&cur);
        let mut j = 0;
        loop {
            if j == n {
                return;
            }
            idx[j] += 1;
            if idx[j] < elems.len() {
                cur[j] = elems[idx[j]];
                break;
            }
            idx[j] = 0;
            cur[j] = elems[0];
            j += 1;
        }
    }
}
