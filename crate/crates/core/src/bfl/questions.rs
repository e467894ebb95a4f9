use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Oracle3SatInstance;
use crate::fields::FieldSpec;

/// Three questions on one axis-parallel line: indices into the question
/// list and their coordinates along `axis`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineTest {
    pub axis: usize,
    pub members: [usize; 3],
    pub coords: [u64; 3],
}

/// The questions `Q_1..Q_{k+3}` and the line tests among `Q_1..Q_k`.
/// `Q_{k+1..k+3}` are the oracle points of the sumcheck's final check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryPlan {
    pub questions: Vec<Vec<u64>>,
    pub lines: Vec<LineTest>,
}

impl QueryPlan {
    /// The `k` questions of the multilinearity test.
    pub fn line_questions(&self) -> &[Vec<u64>] {
        &self.questions[..self.questions.len() - 3]
    }

    pub fn endpoint_questions(&self) -> &[Vec<u64>] {
        &self.questions[self.questions.len() - 3..]
    }
}

/// The verifier's question circuit: a deterministic map from the random
/// strings `R_1..R_{k+3}` to questions in `F^s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifierProgram {
    pub field: FieldSpec,
    pub s: usize,
    pub k: usize,
}

impl VerifierProgram {
    pub fn for_instance(field: FieldSpec, inst: &Oracle3SatInstance) -> Self {
        Self { field, s: inst.s(), k: inst.k() }
    }

    pub fn line_count(&self) -> usize {
        self.k / 3
    }

    /// Line `j` uses `R_{3j+1..3j+3}`: the first fixes the base point, axis
    /// and first coordinate, the next two the remaining distinct
    /// coordinates. Every other question is a uniform point from its own
    /// string.
    pub fn questions(&self, randomness: &[u64]) -> QueryPlan {
        assert_eq!(randomness.len(), self.k + 3, "one random string per question");
        let f = self.field;
        let mut questions = Vec::with_capacity(self.k + 3);
        let mut lines = Vec::new();
        for j in 0..self.line_count() {
            let mut first = ChaCha8Rng::seed_from_u64(randomness[3 * j]);
            let base: Vec<u64> = (0..self.s).map(|_| f.random(&mut first)).collect();
            let axis = first.gen_range(0..self.s);
            let mut coords = [f.random(&mut first), 0, 0];
            for t in 1..3 {
                let mut rng = ChaCha8Rng::seed_from_u64(randomness[3 * j + t]);
                coords[t] = loop {
                    let c = f.random(&mut rng);
                    if !coords[..t].contains(&c) {
                        break c;
                    }
                };
            }
            for &c in &coords {
                let mut q = base.clone();
                q[axis] = c;
                questions.push(q);
            }
            lines.push(LineTest { axis, members: [3 * j, 3 * j + 1, 3 * j + 2], coords });
        }
        for &r in &randomness[3 * self.line_count()..] {
            let mut rng = ChaCha8Rng::seed_from_u64(r);
            questions.push((0..self.s).map(|_| f.random(&mut rng)).collect());
        }
        QueryPlan { questions, lines }
    }
}

/// Degree-1 collinearity of the answers on every line. `Err(j)` names the
/// first failing line.
pub fn multilinearity_test(field: &FieldSpec, answers: &[u64], plan: &QueryPlan) -> Result<(), usize> {
    for (j, line) in plan.lines.iter().enumerate() {
        let [y1, y2, y3] = line.members.map(|i| answers[i]);
        let [c1, c2, c3] = line.coords;
        let slope = field.div(field.sub(y2, y1), field.sub(c2, c1)).expect("distinct coordinates");
        if field.add(y1, field.mul(slope, field.sub(c3, c1))) != y3 {
            return Err(j);
        }
    }
    Ok(())
}

/// Everything the verifiers draw from `S` for one run: the `z` part of the
/// sumcheck challenges, the strings `R_i`, the questions, and the
/// cross-check index `i` (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BflCoins {
    pub z: Vec<u64>,
    pub randomness: Vec<u64>,
    pub plan: QueryPlan,
    pub index: usize,
}

impl BflCoins {
    pub fn draw<R: RngCore + ?Sized>(field: &FieldSpec, inst: &Oracle3SatInstance, rng: &mut R) -> Self {
        let z = (0..inst.r()).map(|_| field.random(rng)).collect();
        let randomness: Vec<u64> = (0..inst.k() + 3).map(|_| rng.next_u64()).collect();
        let plan = VerifierProgram::for_instance(*field, inst).questions(&randomness);
        let index = rng.gen_range(0..inst.k() + 3);
        Self { z, randomness, plan, index }
    }

    /// `(z, Q_{k+1}, Q_{k+2}, Q_{k+3})`.
    pub fn sumcheck_challenges(&self) -> Vec<u64> {
        let mut out = self.z.clone();
        for q in self.plan.endpoint_questions() {
            out.extend_from_slice(q);
        }
        out
    }

    pub fn cross_question(&self) -> &[u64] {
        &self.plan.questions[self.index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{multilinear_extension, BoolTable};

    fn program() -> VerifierProgram {
        VerifierProgram { field: FieldSpec::prime(65521).unwrap(), s: 2, k: 11 }
    }

    #[test]
    fn deterministic_and_complete() {
        let p = program();
        let rs: Vec<u64> = (0..14).map(|i| i * 7919).collect();
        let a = p.questions(&rs);
        assert_eq!(a, p.questions(&rs));
        assert_eq!(a.questions.len(), 14);
        assert_eq!(a.lines.len(), 3);
        assert_eq!(a.line_questions().len(), 11);
        for line in &a.lines {
            let [i, j, l] = line.members;
            for (x, y) in [(i, j), (j, l)] {
                let differ: Vec<usize> = (0..2).filter(|&c| a.questions[x][c] != a.questions[y][c]).collect();
                assert_eq!(differ, vec![line.axis]);
            }
        }
    }

    #[test]
    fn multilinear_answers_pass_and_corruption_fails() {
        let p = program();
        let f = p.field;
        let rs: Vec<u64> = (0..14).map(|i| i + 100).collect();
        let plan = p.questions(&rs);
        let table = BoolTable::from_code(2, 0b1011);
        let mut answers: Vec<u64> =
            plan.line_questions().iter().map(|q| multilinear_extension(&f, &table, q).unwrap()).collect();
        assert_eq!(multilinearity_test(&f, &answers, &plan), Ok(()));
        let constant = vec![9; answers.len()];
        assert_eq!(multilinearity_test(&f, &constant, &plan), Ok(()));
        answers[4] = f.add(answers[4], 1);
        assert_eq!(multilinearity_test(&f, &answers, &plan), Err(1));
    }
}
