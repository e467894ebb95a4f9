use std::collections::BTreeMap;

use super::{CommitError, Opening};
use crate::boxes::Functional;
use crate::fields::FieldSpec;
use crate::runtime::wire::{Reader, Writer};
use crate::runtime::RuntimeError;

/// `constant + sum coeff · [index]` over base commitments. Every party
/// evaluates the same combination on its own view: the committer on
/// `(c, opening)`, the other side on `d`, and a checker on plain values.
///
/// A public constant `k` commits as `c = k·z1` with a zero opening and adds
/// nothing to `d`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lin {
    terms: BTreeMap<usize, u64>,
    constant: u64,
}

impl Lin {
    pub fn var(index: usize) -> Self {
        Self { terms: BTreeMap::from([(index, 1)]), constant: 0 }
    }

    pub fn constant(k: u64) -> Self {
        Self { terms: BTreeMap::new(), constant: k }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.terms.iter().map(|(&i, &c)| (i, c))
    }

    pub fn constant_term(&self) -> u64 {
        self.constant
    }

    pub fn add(&self, f: &FieldSpec, other: &Lin) -> Lin {
        self.axpy(f, 1, other)
    }

    pub fn sub(&self, f: &FieldSpec, other: &Lin) -> Lin {
        self.axpy(f, f.neg(1), other)
    }

    /// `self + a · other`.
    pub fn axpy(&self, f: &FieldSpec, a: u64, other: &Lin) -> Lin {
        let mut out = self.clone();
        for (&i, &c) in &other.terms {
            let e = out.terms.entry(i).or_insert(0);
            *e = f.add(*e, f.mul(a, c));
            if *e == 0 {
                out.terms.remove(&i);
            }
        }
        out.constant = f.add(out.constant, f.mul(a, other.constant));
        out
    }

    pub fn scale(&self, f: &FieldSpec, a: u64) -> Lin {
        Lin::default().axpy(f, a, self)
    }

    pub fn add_const(&self, f: &FieldSpec, k: u64) -> Lin {
        let mut out = self.clone();
        out.constant = f.add(out.constant, k);
        out
    }

    fn fold(&self, f: &FieldSpec, xs: &[u64]) -> Result<u64, CommitError> {
        self.terms.iter().try_fold(0, |acc, (&i, &c)| {
            let x = *xs.get(i).ok_or(CommitError::Arity(i + 1, xs.len()))?;
            Ok(f.add(acc, f.mul(c, x)))
        })
    }

    /// The committed value, given the plain base values.
    pub fn value(&self, f: &FieldSpec, values: &[u64]) -> Result<u64, CommitError> {
        Ok(f.add(self.fold(f, values)?, self.constant))
    }

    pub fn c(&self, f: &FieldSpec, cs: &[u64], z1: u64) -> Result<u64, CommitError> {
        Ok(f.add(self.fold(f, cs)?, f.mul(self.constant, z1)))
    }

    pub fn d(&self, f: &FieldSpec, ds: &[u64]) -> Result<u64, CommitError> {
        self.fold(f, ds)
    }

    pub fn opening(&self, f: &FieldSpec, openings: &[Opening]) -> Result<Opening, CommitError> {
        let w1: Vec<u64> = openings.iter().map(|o| o.w1).collect();
        let w2: Vec<u64> = openings.iter().map(|o| o.w2).collect();
        Ok(Opening { w1: self.fold(f, &w1)?, w2: self.fold(f, &w2)? })
    }

    /// The box functional whose combined output is this commitment's `d`.
    pub fn functional(&self, f: &FieldSpec) -> Functional {
        let terms: Vec<(u64, u64)> = self.terms.iter().map(|(&i, &c)| (i as u64, c)).collect();
        Functional::new(f, &terms)
    }

    pub fn write(&self, w: Writer) -> Writer {
        let flat: Vec<u64> = self.terms.iter().flat_map(|(&i, &c)| [i as u64, c]).collect();
        w.elems(&flat).u64(self.constant)
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, RuntimeError> {
        let flat = r.elems()?;
        let constant = r.u64()?;
        if flat.len() % 2 != 0 {
            return Err(RuntimeError::Decode("odd combination length".into()));
        }
        let terms = flat.chunks_exact(2).filter(|c| c[1] != 0).map(|c| (c[0] as usize, c[1])).collect();
        Ok(Self { terms, constant })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commitments::{pr_commit_full, pr_unveil_verify, CommitKeys, Mode, PrCommitment};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn derived_commitments_verify() {
        let f = FieldSpec::prime(65521).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (keys, _) = CommitKeys::sample(&f, &mut rng);
        let vals: Vec<u64> = (0..4).map(|_| f.random(&mut rng)).collect();
        let ops: Vec<Opening> =
            (0..4).map(|_| Opening { w1: f.random(&mut rng), w2: f.random(&mut rng) }).collect();
        let coms: Vec<PrCommitment> = vals.iter().zip(&ops).map(|(&v, &o)| pr_commit_full(&f, keys, v, o).unwrap()).collect();
        let cs: Vec<u64> = coms.iter().map(|c| c.c).collect();
        let ds: Vec<u64> = coms.iter().map(|c| c.d).collect();
        let l = Lin::var(0).axpy(&f, 5, &Lin::var(2)).sub(&f, &Lin::var(3)).add_const(&f, 77);
        let com = PrCommitment { keys, c: l.c(&f, &cs, keys.z1).unwrap(), d: l.d(&f, &ds).unwrap() };
        let got = pr_unveil_verify(&f, &com, l.opening(&f, &ops).unwrap(), Mode::Field).unwrap();
        assert_eq!(got, l.value(&f, &vals).unwrap());
        // a - a is the zero combination
        assert_eq!(Lin::var(1).sub(&f, &Lin::var(1)), Lin::default());
    }

    #[test]
    fn wire_roundtrip() {
        let f = FieldSpec::prime(13).unwrap();
        let l = Lin::var(4).axpy(&f, 3, &Lin::var(9)).add_const(&f, 2);
        let buf = l.write(Writer::new(1)).finish();
        let mut r = Reader::expect(&buf, 1).unwrap();
        assert_eq!(Lin::read(&mut r).unwrap(), l);
    }
}
