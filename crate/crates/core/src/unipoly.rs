//! Dense univariate polynomials, Laurent polynomials and polynomial vectors
//! over a prime field.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::field::{Fe, Field, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("interpolation nodes are not pairwise distinct (repeated x = {0})")]
    DuplicateNode(u64),
    #[error("cannot evaluate a polynomial with negative exponents at zero")]
    ZeroEvaluation,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Polynomial `c_0 + c_1 z + ... + c_d z^d` with `c_d != 0`; the zero
/// polynomial has no coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    field: Field,
    coeffs: Vec<Fe>,
}

impl UniPoly {
    pub fn zero(field: Field) -> Self {
        UniPoly { field, coeffs: Vec::new() }
    }

    pub fn constant(c: Fe) -> Self {
        Self::from_coeffs(c.field(), vec![c])
    }

    /// `c * z^deg`
    pub fn monomial(c: Fe, deg: usize) -> Self {
        let mut coeffs = vec![c.field().zero(); deg + 1];
        coeffs[deg] = c;
        Self::from_coeffs(c.field(), coeffs)
    }

    /// The polynomial `z`.
    pub fn identity(field: Field) -> Self {
        Self::monomial(field.one(), 1)
    }

    pub fn from_coeffs(field: Field, mut coeffs: Vec<Fe>) -> Self {
        debug_assert!(coeffs.iter().all(|c| c.field() == field));
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { field, coeffs }
    }

    pub fn from_u64s(field: Field, coeffs: &[u64]) -> Self {
        Self::from_coeffs(field, coeffs.iter().map(|&c| field.elem(c)).collect())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `z^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or_else(|| self.field.zero())
    }

    pub fn eval(&self, x: Fe) -> Fe {
        self.coeffs.iter().rev().fold(self.field.zero(), |acc, &c| acc * x + c)
    }

    pub fn eval_many(&self, xs: &[Fe]) -> Vec<Fe> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    pub fn scale(&self, c: Fe) -> Self {
        Self::from_coeffs(self.field, self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Schoolbook product.
    pub fn mul_poly(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero(self.field);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::from_coeffs(self.field, out)
    }

    pub fn add_poly(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        UniPoly::from_coeffs(self.field, coeffs)
    }

    pub fn sub_poly(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - other.coeff(i)).collect();
        UniPoly::from_coeffs(self.field, coeffs)
    }

    /// Euclidean division, returning `(quotient, remainder)`.
    ///
    /// Panics if `divisor` is zero.
    pub fn div_rem(&self, divisor: &UniPoly) -> (UniPoly, UniPoly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = divisor.coeffs[dd].inv().expect("leading coefficient is nonzero");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (UniPoly::zero(self.field), self.clone());
        }
        let mut quot = vec![self.field.zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd] * lead_inv;
            quot[i] = c;
            if c.is_zero() {
                continue;
            }
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
        rem.truncate(dd);
        (UniPoly::from_coeffs(self.field, quot), UniPoly::from_coeffs(self.field, rem))
    }

    /// Unique polynomial of degree `< points.len()` through `points`.
    pub fn interpolate(field: Field, points: &[(Fe, Fe)]) -> Result<UniPoly, PolyError> {
        let xs: Vec<Fe> = points.iter().map(|p| p.0).collect();
        let weights = barycentric_weights(field, &xs)?;
        // master(z) = prod (z - x_i); each basis numerator is master / (z - x_i)
        let mut master = UniPoly::constant(field.one());
        for &x in &xs {
            master = master.mul_poly(&UniPoly::from_coeffs(field, vec![-x, field.one()]));
        }
        let mut acc = vec![field.zero(); points.len()];
        for (i, &(x, y)) in points.iter().enumerate() {
            let scale = y * weights[i];
            if scale.is_zero() {
                continue;
            }
            // synthetic division of master by (z - x)
            let m = &master.coeffs;
            let mut carry = field.zero();
            for d in (0..m.len() - 1).rev() {
                carry = m[d + 1] + carry * x;
                acc[d] += scale * carry;
            }
        }
        Ok(UniPoly::from_coeffs(field, acc))
    }

    pub fn to_laurent(&self) -> LaurentPoly {
        LaurentPoly::from_coeffs(self.field, 0, self.coeffs.clone())
    }
}

/// `w_i = 1 / prod_{j != i} (x_i - x_j)`, failing on repeated nodes.
pub(crate) fn barycentric_weights(field: Field, xs: &[Fe]) -> Result<Vec<Fe>, PolyError> {
    xs.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let mut den = field.one();
            for (j, &xj) in xs.iter().enumerate() {
                if i != j {
                    let d = xi - xj;
                    if d.is_zero() {
                        return Err(PolyError::DuplicateNode(xi.value()));
                    }
                    den *= d;
                }
            }
            Ok(den.inv()?)
        })
        .collect()
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_laurent())
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_laurent())
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        self.add_poly(rhs)
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        self.sub_poly(rhs)
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        self.mul_poly(rhs)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        self.scale(-self.field.one())
    }
}

/// Polynomial in `z` and `z^{-1}`: `sum_i coeffs[i] z^{lo + i}`.
///
/// Normalized so the first and last stored coefficients are nonzero; the
/// zero polynomial has `lo = 0` and no coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    field: Field,
    lo: i64,
    coeffs: Vec<Fe>,
}

impl LaurentPoly {
    pub fn zero(field: Field) -> Self {
        LaurentPoly { field, lo: 0, coeffs: Vec::new() }
    }

    /// `c * z^exp`
    pub fn monomial(c: Fe, exp: i64) -> Self {
        Self::from_coeffs(c.field(), exp, vec![c])
    }

    pub fn from_coeffs(field: Field, lo: i64, coeffs: Vec<Fe>) -> Self {
        let Some(first) = coeffs.iter().position(|c| !c.is_zero()) else {
            return Self::zero(field);
        };
        let last = coeffs.iter().rposition(|c| !c.is_zero()).unwrap();
        LaurentPoly { field, lo: lo + first as i64, coeffs: coeffs[first..=last].to_vec() }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn low_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.lo)
    }

    /// Highest exponent with a nonzero coefficient.
    pub fn high_exponent(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.lo + self.coeffs.len() as i64 - 1)
    }

    /// Coefficient of `z^exp`.
    pub fn coeff(&self, exp: i64) -> Fe {
        let i = exp - self.lo;
        if i < 0 {
            return self.field.zero();
        }
        self.coeffs.get(i as usize).copied().unwrap_or_else(|| self.field.zero())
    }

    /// Nonzero `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Fe)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, &c)| (self.lo + i as i64, c))
    }

    pub fn eval(&self, x: Fe) -> Result<Fe, PolyError> {
        if self.is_zero() {
            return Ok(self.field.zero());
        }
        if self.lo < 0 && x.is_zero() {
            return Err(PolyError::ZeroEvaluation);
        }
        let horner = self.coeffs.iter().rev().fold(self.field.zero(), |acc, &c| acc * x + c);
        Ok(horner * x.pow_signed(self.lo)?)
    }

    pub fn eval_many(&self, xs: &[Fe]) -> Result<Vec<Fe>, PolyError> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// `z^h * self`
    pub fn shift(&self, h: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        LaurentPoly { field: self.field, lo: self.lo + h, coeffs: self.coeffs.clone() }
    }

    pub fn scale(&self, c: Fe) -> Self {
        Self::from_coeffs(self.field, self.lo, self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn add_poly(&self, other: &LaurentPoly) -> LaurentPoly {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub_poly(&self, other: &LaurentPoly) -> LaurentPoly {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &LaurentPoly, op: impl Fn(Fe, Fe) -> Fe) -> LaurentPoly {
        let (lo, hi) = match (self.low_exponent(), other.low_exponent()) {
            (None, None) => return Self::zero(self.field),
            (Some(_), None) => (self.lo, self.high_exponent().unwrap()),
            (None, Some(_)) => (other.lo, other.high_exponent().unwrap()),
            (Some(a), Some(b)) => {
                (a.min(b), self.high_exponent().unwrap().max(other.high_exponent().unwrap()))
            }
        };
        let coeffs = (lo..=hi).map(|e| op(self.coeff(e), other.coeff(e))).collect();
        Self::from_coeffs(self.field, lo, coeffs)
    }

    pub fn mul_poly(&self, other: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.field);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(self.field, self.lo + other.lo, out)
    }

    /// The ordinary polynomial, if no negative exponents are present.
    pub fn to_unipoly(&self) -> Option<UniPoly> {
        if self.is_zero() {
            return Some(UniPoly::zero(self.field));
        }
        if self.lo < 0 {
            return None;
        }
        let mut coeffs = vec![self.field.zero(); self.lo as usize];
        coeffs.extend_from_slice(&self.coeffs);
        Some(UniPoly::from_coeffs(self.field, coeffs))
    }
}

impl From<&UniPoly> for LaurentPoly {
    fn from(p: &UniPoly) -> Self {
        p.to_laurent()
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.add_poly(rhs)
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.sub_poly(rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.mul_poly(rhs)
    }
}

/// Renders as e.g. `3*z^-2 + z + 4`, highest exponent first, or `0`.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<(i64, Fe)> = self.terms().collect();
        for (idx, (e, c)) in terms.iter().rev().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            let unit = c.value() == 1;
            match (e, unit) {
                (0, _) => write!(f, "{c}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{c}*z")?,
                (e, true) => write!(f, "z^{e}")?,
                (e, false) => write!(f, "{c}*z^{e}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A vector of `M` polynomials sharing one field, e.g. the data
/// interpolation polynomial `u_X(z)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyVector {
    field: Field,
    components: Vec<UniPoly>,
}

impl PolyVector {
    pub fn new(field: Field, components: Vec<UniPoly>) -> Self {
        assert!(components.iter().all(|c| c.field() == field), "mixed fields in PolyVector");
        PolyVector { field, components }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[UniPoly] {
        &self.components
    }

    pub fn degree(&self) -> Option<usize> {
        self.components.iter().filter_map(UniPoly::degree).max()
    }

    pub fn eval(&self, x: Fe) -> Vec<Fe> {
        self.components.iter().map(|p| p.eval(x)).collect()
    }

    /// Coordinate-wise interpolation: the returned vector maps `nodes[i]` to
    /// `values[i]` (each of length `dim`).
    pub fn interpolate(
        field: Field,
        dim: usize,
        nodes: &[Fe],
        values: &[Vec<Fe>],
    ) -> Result<PolyVector, PolyError> {
        if nodes.len() != values.len() {
            return Err(PolyError::LengthMismatch { expected: nodes.len(), got: values.len() });
        }
        if let Some(bad) = values.iter().find(|v| v.len() != dim) {
            return Err(PolyError::LengthMismatch { expected: dim, got: bad.len() });
        }
        let components = (0..dim)
            .map(|m| {
                let pts: Vec<(Fe, Fe)> =
                    nodes.iter().zip(values).map(|(&x, v)| (x, v[m])).collect();
                UniPoly::interpolate(field, &pts)
            })
            .collect::<Result<_, _>>()?;
        Ok(PolyVector { field, components })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(q: u64) -> Field {
        Field::new(q).unwrap()
    }

    fn random_poly(field: Field, deg: usize, rng: &mut ChaCha8Rng) -> UniPoly {
        UniPoly::from_coeffs(field, field.sample_vec(deg + 1, rng))
    }

    #[test]
    fn interpolate_single_node_is_constant() {
        let f7 = f(7);
        let p = UniPoly::interpolate(f7, &[(f7.elem(1), f7.elem(4))]).unwrap();
        assert_eq!(p, UniPoly::from_u64s(f7, &[4]));
    }

    #[test]
    fn interpolate_three_nodes() {
        let f7 = f(7);
        let pts: Vec<(Fe, Fe)> =
            [(1, 1), (2, 4), (3, 2)].iter().map(|&(x, y)| (f7.elem(x), f7.elem(y))).collect();
        let p = UniPoly::interpolate(f7, &pts).unwrap();
        assert!(p.degree().unwrap() <= 2);
        for (x, y) in pts {
            assert_eq!(p.eval(x), y);
        }
    }

    #[test]
    fn interpolate_rejects_duplicates() {
        let f7 = f(7);
        let pts = [(f7.elem(2), f7.elem(1)), (f7.elem(2), f7.elem(3))];
        assert_eq!(UniPoly::interpolate(f7, &pts), Err(PolyError::DuplicateNode(2)));
    }

    /// Solves the Vandermonde system by Gaussian elimination.
    fn vandermonde_solve(field: Field, xs: &[Fe], ys: &[Fe]) -> Vec<Fe> {
        let n = xs.len();
        let mut a: Vec<Vec<Fe>> = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let mut row: Vec<Fe> = (0..n).map(|j| x.pow(j as u64)).collect();
                row.push(y);
                row
            })
            .collect();
        for col in 0..n {
            let piv = (col..n).find(|&r| !a[r][col].is_zero()).unwrap();
            a.swap(col, piv);
            let inv = a[col][col].inv().unwrap();
            for v in a[col].iter_mut() {
                *v *= inv;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let factor = a[r][col];
                    let pivot_row = a[col].clone();
                    for (v, p) in a[r].iter_mut().zip(pivot_row) {
                        *v -= factor * p;
                    }
                }
            }
        }
        let _ = field;
        a.into_iter().map(|row| row[n]).collect()
    }

    #[test]
    fn polyvector_interpolation_matches_vandermonde() {
        let f11 = f(11);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let betas: Vec<Fe> = [2, 5, 7, 9].iter().map(|&b| f11.elem(b)).collect();
        let rows: Vec<Vec<Fe>> = (0..4).map(|_| f11.sample_vec(3, &mut rng)).collect();
        let u = PolyVector::interpolate(f11, 3, &betas, &rows).unwrap();
        for m in 0..3 {
            let ys: Vec<Fe> = rows.iter().map(|r| r[m]).collect();
            let expect = UniPoly::from_coeffs(f11, vandermonde_solve(f11, &betas, &ys));
            assert_eq!(u.components()[m], expect);
        }
        for (b, row) in betas.iter().zip(&rows) {
            assert_eq!(&u.eval(*b), row);
        }
    }

    #[test]
    fn eval_examples() {
        let f7 = f(7);
        assert_eq!(UniPoly::from_u64s(f7, &[1, 0, 1]).eval(f7.elem(3)).value(), 3);
        let inv_z = LaurentPoly::monomial(f7.one(), -1);
        assert_eq!(inv_z.eval(f7.elem(2)).unwrap().value(), 4);
        assert_eq!(inv_z.eval(f7.zero()), Err(PolyError::ZeroEvaluation));
        let alphas: Vec<Fe> = (1..=3).map(|v| f7.elem(v)).collect();
        assert_eq!(UniPoly::constant(f7.one()).eval_many(&alphas), vec![f7.one(); 3]);
        assert_eq!(UniPoly::identity(f7).eval_many(&alphas), alphas);
    }

    #[test]
    fn eval_matches_power_sum() {
        let f13 = f(13);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_poly(f13, 6, &mut rng);
        for x in 0..13 {
            let x = f13.elem(x);
            let naive = p
                .coeffs()
                .iter()
                .enumerate()
                .fold(f13.zero(), |acc, (i, &c)| acc + c * x.pow(i as u64));
            assert_eq!(p.eval(x), naive);
        }
    }

    #[test]
    fn ring_examples() {
        let f5 = f(5);
        let a = UniPoly::from_u64s(f5, &[1, 1]);
        let b = UniPoly::from_u64s(f5, &[4, 1]);
        assert_eq!(&a * &b, UniPoly::from_u64s(f5, &[4, 0, 1]));
        let z2 = LaurentPoly::monomial(f5.one(), 2);
        assert_eq!(z2.shift(-3), LaurentPoly::monomial(f5.one(), -1));
        assert_eq!((&a - &a).degree(), None);
    }

    #[test]
    fn mul_matches_convolution() {
        let f31 = f(31);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = random_poly(f31, 8, &mut rng);
            let b = random_poly(f31, 8, &mut rng);
            let mut conv = vec![0u64; 17];
            for i in 0..=8 {
                for j in 0..=8 {
                    conv[i + j] += a.coeff(i).value() * b.coeff(j).value();
                }
            }
            assert_eq!(&a * &b, UniPoly::from_u64s(f31, &conv));
            let la = a.to_laurent().shift(-5);
            let lb = b.to_laurent().shift(2);
            assert_eq!(la.mul_poly(&lb), (&a * &b).to_laurent().shift(-3));
        }
    }

    #[test]
    fn div_rem_reconstructs() {
        let f17 = f(17);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random_poly(f17, 9, &mut rng);
            let mut b = random_poly(f17, 3, &mut rng);
            if b.is_zero() {
                b = UniPoly::constant(f17.one());
            }
            let (qq, r) = a.div_rem(&b);
            assert_eq!(&(&qq * &b) + &r, a);
            assert!(r.degree().map_or(true, |d| d < b.degree().unwrap()));
        }
    }

    #[test]
    fn laurent_display() {
        let f7 = f(7);
        assert_eq!(LaurentPoly::monomial(f7.one(), -4).to_string(), "z^-4");
        assert_eq!(LaurentPoly::monomial(f7.one(), 1).to_string(), "z");
        assert_eq!(LaurentPoly::monomial(f7.one(), 0).to_string(), "1");
        assert_eq!(LaurentPoly::zero(f7).to_string(), "0");
        let p = LaurentPoly::from_coeffs(f7, -1, vec![f7.elem(3), f7.zero(), f7.elem(2)]);
        assert_eq!(p.to_string(), "2*z + 3*z^-1");
    }

    #[test]
    fn laurent_roundtrip_and_coeffs() {
        let f7 = f(7);
        let p = UniPoly::from_u64s(f7, &[0, 0, 3, 1]);
        let l = p.to_laurent();
        assert_eq!(l.low_exponent(), Some(2));
        assert_eq!(l.high_exponent(), Some(3));
        assert_eq!(l.to_unipoly(), Some(p));
        assert_eq!(l.shift(-3).to_unipoly(), None);
        assert_eq!(l.shift(-3).coeff(-1).value(), 3);
    }

    proptest! {
        #[test]
        fn interpolate_inverts_evaluation(coeffs in prop::collection::vec(0u64..101, 0..8), extra in 0usize..4) {
            let f101 = f(101);
            let p = UniPoly::from_u64s(f101, &coeffs);
            let nodes: Vec<Fe> = (0..coeffs.len() + extra).map(|i| f101.elem(3 * i as u64 + 1)).collect();
            let pts: Vec<(Fe, Fe)> = nodes.iter().map(|&x| (x, p.eval(x))).collect();
            prop_assert_eq!(UniPoly::interpolate(f101, &pts).unwrap(), p);
        }

        #[test]
        fn eval_is_ring_homomorphism(a in prop::collection::vec(0u64..97, 0..7),
                                     b in prop::collection::vec(0u64..97, 0..7),
                                     x in 1u64..97, shift in -4i64..4) {
            let f97 = f(97);
            let pa = UniPoly::from_u64s(f97, &a);
            let pb = UniPoly::from_u64s(f97, &b);
            let x = f97.elem(x);
            let prod = &pa * &pb;
            prop_assert_eq!(prod.eval(x), pa.eval(x) * pb.eval(x));
            prop_assert_eq!((&pa + &pb).eval(x), pa.eval(x) + pb.eval(x));
            if let (Some(da), Some(db)) = (pa.degree(), pb.degree()) {
                prop_assert_eq!(prod.degree(), Some(da + db));
            }
            let la = pa.to_laurent().shift(shift);
            let lb = pb.to_laurent().shift(-shift - 1);
            prop_assert_eq!(la.mul_poly(&lb).eval(x).unwrap(), la.eval(x).unwrap() * lb.eval(x).unwrap());
        }
    }
}
