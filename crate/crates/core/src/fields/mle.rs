use serde::{Deserialize, Serialize};

use super::{FieldError, FieldSpec};

/// A Boolean function on `{0,1}^s`. Entry `i` holds `A(b)` where `b_j` is bit
/// `j-1` of `i` (first coordinate is the least significant bit).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoolTable {
    s: usize,
    bits: Vec<bool>,
}

impl BoolTable {
    pub fn new(s: usize, bits: Vec<bool>) -> Result<Self, FieldError> {
        if bits.len() != 1 << s {
            return Err(FieldError::Dimension { expected: 1 << s, got: bits.len() });
        }
        Ok(Self { s, bits })
    }

    pub fn constant(s: usize, value: bool) -> Self {
        Self { s, bits: vec![value; 1 << s] }
    }

    /// The table whose bit pattern is the integer `code`.
    pub fn from_code(s: usize, code: u64) -> Self {
        Self { s, bits: (0..1usize << s).map(|i| (code >> i) & 1 == 1).collect() }
    }

    pub fn arity(&self) -> usize {
        self.s
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, b: &[bool]) -> bool {
        let idx = b.iter().enumerate().fold(0usize, |acc, (j, &x)| acc | ((x as usize) << j));
        self.bits[idx]
    }

    pub fn eval(&self, field: &FieldSpec, q: &[u64]) -> Result<u64, FieldError> {
        multilinear_extension(field, self, q)
    }
}

/// `A^(Q) = sum_b A(b) prod_j (b_j Q_j + (1 - b_j)(1 - Q_j))`, evaluated by
/// folding one coordinate at a time.
pub fn multilinear_extension(field: &FieldSpec, table: &BoolTable, q: &[u64]) -> Result<u64, FieldError> {
    let values: Vec<u64> = table.bits.iter().map(|&b| b as u64).collect();
    mle_values(field, &values, q)
}

/// Multilinear extension of a field-valued table on `{0,1}^s`, indexed as
/// in [`BoolTable`].
pub fn mle_values(field: &FieldSpec, values: &[u64], q: &[u64]) -> Result<u64, FieldError> {
    if values.len() != 1 << q.len() {
        return Err(FieldError::Dimension { expected: values.len().trailing_zeros() as usize, got: q.len() });
    }
    let mut layer = values.to_vec();
    for &qj in q {
        field.check(qj)?;
        let one_minus = field.sub(1, qj);
        layer = layer
            .chunks_exact(2)
            .map(|pair| field.add(field.mul(one_minus, pair[0]), field.mul(qj, pair[1])))
            .collect();
    }
    Ok(layer[0])
}
