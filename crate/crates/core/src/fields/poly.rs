use super::{FieldElement, FieldError, FieldSpec};

/// Dense univariate polynomial, coefficients low-to-high degree.
/// The coefficient vector never carries trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnivariatePoly {
    field: FieldSpec,
    coeffs: Vec<u64>,
}

impl UnivariatePoly {
    pub fn zero(field: FieldSpec) -> Self {
        Self { field, coeffs: Vec::new() }
    }

    pub fn new(field: FieldSpec, mut coeffs: Vec<u64>) -> Result<Self, FieldError> {
        for &c in &coeffs {
            field.check(c)?;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Ok(Self { field, coeffs })
    }

    /// Like [`UnivariatePoly::new`] but rejects anything above `bound`.
    pub fn with_bound(field: FieldSpec, coeffs: Vec<u64>, bound: usize) -> Result<Self, FieldError> {
        let p = Self::new(field, coeffs)?;
        match p.degree() {
            Some(d) if d > bound => Err(FieldError::DegreeBound { degree: d, bound }),
            _ => Ok(p),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficients padded with zeros to exactly `len` entries.
    pub fn padded(&self, len: usize) -> Vec<u64> {
        let mut v = self.coeffs.clone();
        v.resize(len.max(v.len()), 0);
        v
    }

    pub fn eval(&self, x: u64) -> u64 {
        let f = self.field;
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let f = self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| f.add(*self.coeffs.get(i).unwrap_or(&0), *other.coeffs.get(i).unwrap_or(&0)))
            .collect();
        Self::new(f, coeffs).expect("canonical")
    }

    pub fn scale(&self, s: u64) -> Self {
        let f = self.field;
        Self::new(f, self.coeffs.iter().map(|&c| f.mul(c, s)).collect()).expect("canonical")
    }

    pub fn mul(&self, other: &Self) -> Self {
        let f = self.field;
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero(f);
        }
        let mut out = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::new(f, out).expect("canonical")
    }

    /// `prod (x - r)` over the given roots.
    pub fn from_roots(field: FieldSpec, roots: &[u64]) -> Self {
        roots.iter().fold(Self { field, coeffs: vec![1] }, |acc, &r| {
            acc.mul(&Self { field, coeffs: vec![field.neg(r), 1] })
        })
    }
}

/// Horner evaluation with spec checking.
pub fn poly_eval(p: &UnivariatePoly, x: FieldElement) -> Result<FieldElement, FieldError> {
    if x.spec() != p.field {
        return Err(FieldError::Mismatch(p.field, x.spec()));
    }
    FieldElement::new(p.field, p.eval(x.value()))
}

/// Lagrange interpolation through `(xs[i], ys[i])`, returned in coefficient
/// form. The `xs` must be distinct.
pub fn interpolate(field: FieldSpec, xs: &[u64], ys: &[u64]) -> Result<UnivariatePoly, FieldError> {
    if xs.len() != ys.len() {
        return Err(FieldError::Dimension { expected: xs.len(), got: ys.len() });
    }
    let mut acc = UnivariatePoly::zero(field);
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        if yi == 0 {
            continue;
        }
        let others: Vec<u64> = xs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
        let basis = UnivariatePoly::from_roots(field, &others);
        let denom = others.iter().fold(1, |d, &xj| field.mul(d, field.sub(xi, xj)));
        acc = acc.add(&basis.scale(field.div(yi, denom)?));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f7() -> FieldSpec {
        FieldSpec::prime(7).unwrap()
    }

    #[test]
    fn zero_poly_evaluates_to_zero() {
        let z = UnivariatePoly::zero(f7());
        assert_eq!(z.degree(), None);
        for x in 0..7 {
            assert_eq!(poly_eval(&z, f7().elem(x).unwrap()).unwrap().value(), 0);
        }
    }

    #[test]
    fn linear_example() {
        let p = UnivariatePoly::new(f7(), vec![3, 2]).unwrap();
        assert_eq!(poly_eval(&p, f7().elem(2).unwrap()).unwrap().value(), 0);
        let other = FieldSpec::prime(11).unwrap().elem(2).unwrap();
        assert!(poly_eval(&p, other).is_err());
    }

    #[test]
    fn quadratic_fit_reproduces_fourth_point() {
        // q(x) = 4x^2 + 5x + 1 over F_13, evaluated directly as the oracle
        let f = FieldSpec::prime(13).unwrap();
        let q = |x: u64| (4 * x * x + 5 * x + 1) % 13;
        let xs = [2, 7, 11];
        let ys: Vec<u64> = xs.iter().map(|&x| q(x)).collect();
        let p = interpolate(f, &xs, &ys).unwrap();
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.eval(5), q(5));
        assert_eq!(p.coeffs(), &[1, 5, 4]);
    }

    #[test]
    fn degree_bound_and_normalisation() {
        assert!(UnivariatePoly::with_bound(f7(), vec![1, 2, 3], 1).is_err());
        let p = UnivariatePoly::with_bound(f7(), vec![1, 2, 0, 0], 1).unwrap();
        assert_eq!(p.degree(), Some(1));
        assert!(UnivariatePoly::new(f7(), vec![9]).is_err());
    }
}
