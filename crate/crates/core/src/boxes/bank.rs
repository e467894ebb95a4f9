use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{BoxError, Side};
use crate::fields::FieldSpec;

/// A linear combination `sum coeff · [index]` of box indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Functional(BTreeMap<u64, u64>);

impl Functional {
    pub fn unit(index: u64) -> Self {
        Self(BTreeMap::from([(index, 1)]))
    }

    /// Merges repeated indices and drops zero coefficients.
    pub fn new(field: &FieldSpec, terms: &[(u64, u64)]) -> Self {
        let mut m: BTreeMap<u64, u64> = BTreeMap::new();
        for &(i, c) in terms {
            let e = m.entry(i).or_insert(0);
            *e = field.add(*e, c);
        }
        m.retain(|_, c| *c != 0);
        Self(m)
    }

    /// From terms with distinct indices, as produced by [`Functional::terms`].
    pub(crate) fn from_canonical(terms: Vec<(u64, u64)>) -> Self {
        Self(terms.into_iter().filter(|&(_, c)| c != 0).collect())
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.0.iter().map(|(&i, &c)| (i, c))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn axpy(&mut self, field: &FieldSpec, lambda: u64, other: &Functional) {
        for (&i, &c) in &other.0 {
            let e = self.0.entry(i).or_insert(0);
            *e = field.sub(*e, field.mul(lambda, c));
            if *e == 0 {
                self.0.remove(&i);
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Row {
    pivot: u64,
    vec: Functional,
    a: u64,
    u: u64,
}

/// A lazily indexed family of PR boxes sharing one field.
///
/// Side B queries single indices. Side A may query any linear functional
/// over indices whose side-B inputs agree: the answer is `a·b + sum c_j x_j`.
/// A functional independent of earlier A-queries is answered fresh; a
/// dependent one is answered by linearity only when its input is the same
/// combination of earlier inputs. Any other input would expose `b`, so it is
/// refused. The output `x_j` of index `j` is a keyed function of `j`, so
/// answers do not depend on query order.
#[derive(Clone, Debug)]
pub struct PrBoxBank {
    field: FieldSpec,
    seed: u64,
    b_inputs: BTreeMap<u64, u64>,
    x_cache: HashMap<u64, u64>,
    basis: Vec<Row>,
}

impl PrBoxBank {
    pub fn new(field: FieldSpec, seed: u64) -> Self {
        Self { field, seed, b_inputs: BTreeMap::new(), x_cache: HashMap::new(), basis: Vec::new() }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    fn x(&mut self, index: u64) -> u64 {
        let (field, seed) = (self.field, self.seed);
        *self.x_cache.entry(index).or_insert_with(|| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(index);
            field.random(&mut rng)
        })
    }

    pub fn query_b(&mut self, index: u64, b: u64) -> Result<u64, BoxError> {
        self.field.check(b)?;
        if self.b_inputs.contains_key(&index) {
            return Err(BoxError::DoubleQuery(Side::B, index));
        }
        self.b_inputs.insert(index, b);
        Ok(self.x(index))
    }

    /// `Ok(None)` means some index still lacks its side-B input; nothing is
    /// recorded and the query may be repeated later.
    pub fn query_a(&mut self, phi: &Functional, a: u64) -> Result<Option<u64>, BoxError> {
        let f = self.field;
        f.check(a)?;
        let mut b = None;
        for (i, _) in phi.terms() {
            match (self.b_inputs.get(&i), b) {
                (None, _) => return Ok(None),
                (Some(&bi), None) => b = Some(bi),
                (Some(&bi), Some(b0)) if bi != b0 => return Err(BoxError::MixedInputs(i)),
                _ => {}
            }
        }
        let mut residual = phi.clone();
        let (mut a_c, mut u_c) = (0, 0);
        for row in &self.basis {
            if let Some(&lambda) = residual.0.get(&row.pivot) {
                residual.axpy(&f, lambda, &row.vec);
                a_c = f.add(a_c, f.mul(lambda, row.a));
                u_c = f.add(u_c, f.mul(lambda, row.u));
            }
        }
        if residual.is_empty() {
            return if a == a_c { Ok(Some(u_c)) } else { Err(BoxError::Inconsistent) };
        }
        let b = b.expect("non-empty functional");
        let mut u = f.mul(a, b);
        for (i, c) in phi.terms() {
            let xi = self.x(i);
            u = f.add(u, f.mul(c, xi));
        }
        let (&pivot, &pc) = residual.0.iter().next().expect("non-empty");
        let inv = f.inv(pc)?;
        let vec = Functional(residual.0.iter().map(|(&i, &c)| (i, f.mul(c, inv))).collect());
        self.basis.push(Row { pivot, vec, a: f.mul(f.sub(a, a_c), inv), u: f.mul(f.sub(u, u_c), inv) });
        Ok(Some(u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_queries_follow_the_box_law() {
        let f = FieldSpec::prime(65521).unwrap();
        let mut bank = PrBoxBank::new(f, 1);
        for i in 0..50 {
            let x = bank.query_b(i, 777).unwrap();
            let u = bank.query_a(&Functional::unit(i), i * 3).unwrap().unwrap();
            assert_eq!(f.sub(u, x), f.mul(i * 3, 777));
        }
        assert!(bank.query_b(3, 1).is_err());
    }

    #[test]
    fn order_independent_outputs() {
        let f = FieldSpec::binary(16).unwrap();
        let mut one = PrBoxBank::new(f, 4);
        let mut two = PrBoxBank::new(f, 4);
        let a: Vec<u64> = (0..10).map(|i| one.query_b(i, 5).unwrap()).collect();
        let b: Vec<u64> = (0..10).rev().map(|i| two.query_b(i, 5).unwrap()).collect();
        assert_eq!(a, b.into_iter().rev().collect::<Vec<_>>());
    }

    #[test]
    fn deferred_until_b_inputs() {
        let f = FieldSpec::prime(13).unwrap();
        let mut bank = PrBoxBank::new(f, 2);
        assert_eq!(bank.query_a(&Functional::unit(0), 4).unwrap(), None);
        let x = bank.query_b(0, 6).unwrap();
        assert_eq!(bank.query_a(&Functional::unit(0), 4).unwrap(), Some((24 + x) % 13));
    }

    #[test]
    fn dependent_queries() {
        let f = FieldSpec::prime(101).unwrap();
        let z2 = 17;
        let mut bank = PrBoxBank::new(f, 3);
        let x: Vec<u64> = (0..3).map(|i| bank.query_b(i, z2).unwrap()).collect();
        let u0 = bank.query_a(&Functional::unit(0), 5).unwrap().unwrap();
        let u1 = bank.query_a(&Functional::unit(1), 9).unwrap().unwrap();
        // 2·[0] + 3·[1] is dependent: consistent input 2·5 + 3·9 = 37
        let phi = Functional::new(&f, &[(0, 2), (1, 3)]);
        assert_eq!(bank.query_a(&phi, 37).unwrap(), Some(f.add(f.mul(2, u0), f.mul(3, u1))));
        assert_eq!(bank.query_a(&phi, 38), Err(BoxError::Inconsistent));
        // [1] + [2] is independent: answered by the box law
        let psi = Functional::new(&f, &[(1, 1), (2, 1)]);
        let u = bank.query_a(&psi, 11).unwrap().unwrap();
        assert_eq!(u, f.add(f.mul(11, z2), f.add(x[1], x[2])));
        // now [2] alone is dependent with input 11 - 9 = 2
        assert_eq!(bank.query_a(&Functional::unit(2), 2).unwrap(), Some(f.sub(u, u1)));
        assert_eq!(bank.query_a(&Functional::unit(2), 3), Err(BoxError::Inconsistent));
    }

    #[test]
    fn mixed_b_inputs_refused() {
        let f = FieldSpec::prime(13).unwrap();
        let mut bank = PrBoxBank::new(f, 0);
        bank.query_b(0, 1).unwrap();
        bank.query_b(1, 2).unwrap();
        assert!(matches!(bank.query_a(&Functional::new(&f, &[(0, 1), (1, 1)]), 0), Err(BoxError::MixedInputs(_))));
    }
}
