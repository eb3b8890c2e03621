//! The space `P_{M,G}` of `M`-variate polynomials of total degree at most `G`.
//!
//! Monomials are ordered graded-lexicographically: by total degree first,
//! then lexicographically with higher powers of earlier variables first
//! (`1, X1, X2, X1^2, X1*X2, X2^2, ...`). This order fixes the coefficient
//! vector of a polynomial, the order random coefficients are drawn in, and
//! the canonical text form.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use thiserror::Error;

use crate::field::{Fe, Field};
use crate::unipoly::{PolyVector, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MvPolyError {
    #[error("expected {expected} variables, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("polynomials do not share (M, G, q): {0}")]
    ShapeMismatch(String),
    #[error("monomial {monomial} exceeds the total degree bound {bound}")]
    DegreeBound { monomial: String, bound: u32 },
    #[error("cannot parse polynomial term `{0}`")]
    Parse(String),
}

/// Exponent vector of a monomial `X1^e1 * ... * XM^eM`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(arity: usize) -> Self {
        Monomial(vec![0; arity])
    }

    /// The variable `X_{i+1}`.
    pub fn var(arity: usize, i: usize) -> Self {
        let mut e = vec![0; arity];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn eval(&self, x: &[Fe]) -> Fe {
        let one = x.first().map(|v| v.field().one());
        self.0
            .iter()
            .zip(x)
            .fold(one, |acc, (&e, &xi)| acc.map(|a| a * xi.pow(e as u64)))
            .expect("monomial evaluated on an empty point")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "X{}", i + 1)?;
            } else {
                write!(f, "X{}^{}", i + 1, e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// All monomials in `arity` variables of total degree `<= degree`, in
/// graded-lex order. Its length is `C(arity + degree, degree)`.
pub fn basis(arity: usize, degree: u32) -> Vec<Monomial> {
    fn fill(prefix: &mut Vec<u32>, remaining_vars: usize, budget: u32, out: &mut Vec<Monomial>) {
        if remaining_vars == 0 {
            if budget == 0 {
                out.push(Monomial(prefix.clone()));
            }
            return;
        }
        for e in (0..=budget).rev() {
            prefix.push(e);
            fill(prefix, remaining_vars - 1, budget - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=degree {
        fill(&mut Vec::with_capacity(arity), arity, d, &mut out);
    }
    out
}

/// Dimension of `P_{M,G}`, i.e. `C(M+G, G)`.
pub fn dimension(arity: usize, degree: u32) -> usize {
    let (n, k) = (arity as u128 + degree as u128, degree as u128);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc as usize
}

/// A member of `P_{M,G}`, stored sparsely without zero coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    field: Field,
    arity: usize,
    degree_bound: u32,
    terms: BTreeMap<Monomial, Fe>,
}

impl MultiPoly {
    pub fn zero(field: Field, arity: usize, degree_bound: u32) -> Self {
        MultiPoly { field, arity, degree_bound, terms: BTreeMap::new() }
    }

    pub fn from_terms(
        field: Field,
        arity: usize,
        degree_bound: u32,
        terms: impl IntoIterator<Item = (Monomial, Fe)>,
    ) -> Result<Self, MvPolyError> {
        let mut p = Self::zero(field, arity, degree_bound);
        for (mono, c) in terms {
            if mono.arity() != arity {
                return Err(MvPolyError::ArityMismatch { expected: arity, got: mono.arity() });
            }
            if mono.degree() > degree_bound {
                return Err(MvPolyError::DegreeBound {
                    monomial: mono.to_string(),
                    bound: degree_bound,
                });
            }
            p.add_term(mono, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, mono: Monomial, c: Fe) {
        let entry = self.terms.entry(mono).or_insert_with(|| self.field.zero());
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    /// `X_{i+1}` as an element of `P_{M,G}` (requires `G >= 1`).
    pub fn projection(field: Field, arity: usize, degree_bound: u32, i: usize) -> Self {
        assert!(degree_bound >= 1 && i < arity);
        Self::from_terms(field, arity, degree_bound, [(Monomial::var(arity, i), field.one())])
            .expect("projection fits the degree bound")
    }

    /// Builds a polynomial from its coefficients in [`basis`] order.
    pub fn from_coeff_vector(
        field: Field,
        arity: usize,
        degree_bound: u32,
        coeffs: &[Fe],
    ) -> Result<Self, MvPolyError> {
        let b = basis(arity, degree_bound);
        if coeffs.len() != b.len() {
            return Err(MvPolyError::ShapeMismatch(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                b.len()
            )));
        }
        Ok(MultiPoly {
            field,
            arity,
            degree_bound,
            terms: b.into_iter().zip(coeffs.iter().copied()).filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// Coefficients in [`basis`] order.
    pub fn coeff_vector(&self) -> Vec<Fe> {
        basis(self.arity, self.degree_bound).iter().map(|m| self.coeff(m)).collect()
    }

    /// Draws each basis coefficient i.i.d. uniformly, in basis order.
    pub fn sample_uniform<R: RngCore + ?Sized>(
        field: Field,
        arity: usize,
        degree_bound: u32,
        rng: &mut R,
    ) -> Self {
        let coeffs = field.sample_vec(dimension(arity, degree_bound), rng);
        Self::from_coeff_vector(field, arity, degree_bound, &coeffs).expect("sized by dimension")
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, Fe)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, mono: &Monomial) -> Fe {
        self.terms.get(mono).copied().unwrap_or_else(|| self.field.zero())
    }

    /// Actual total degree, `None` for zero.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    fn same_shape(&self, other: &MultiPoly) -> Result<(), MvPolyError> {
        if self.field != other.field
            || self.arity != other.arity
            || self.degree_bound != other.degree_bound
        {
            return Err(MvPolyError::ShapeMismatch(format!(
                "(M={}, G={}, {}) vs (M={}, G={}, {})",
                self.arity,
                self.degree_bound,
                self.field,
                other.arity,
                other.degree_bound,
                other.field
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[Fe]) -> Result<Fe, MvPolyError> {
        if x.len() != self.arity {
            return Err(MvPolyError::ArityMismatch { expected: self.arity, got: x.len() });
        }
        // powers[i][e] = x_i^e
        let powers: Vec<Vec<Fe>> = x
            .iter()
            .map(|&xi| {
                std::iter::successors(Some(self.field.one()), |&p| Some(p * xi))
                    .take(self.degree_bound as usize + 1)
                    .collect()
            })
            .collect();
        Ok(self.terms.iter().fold(self.field.zero(), |acc, (m, &c)| {
            let mono = m
                .exponents()
                .iter()
                .enumerate()
                .fold(c, |t, (i, &e)| t * powers[i][e as usize]);
            acc + mono
        }))
    }

    pub fn scale(&self, c: Fe) -> Self {
        let mut out = Self::zero(self.field, self.arity, self.degree_bound);
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(m, &v)| (m.clone(), v * c)).collect();
        }
        out
    }

    pub fn add(&self, other: &MultiPoly) -> Result<Self, MvPolyError> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    /// `sum_i coeffs[i] * polys[i]`.
    pub fn linear_combine(coeffs: &[Fe], polys: &[&MultiPoly]) -> Result<Self, MvPolyError> {
        if coeffs.len() != polys.len() {
            return Err(MvPolyError::ShapeMismatch(format!(
                "{} coefficients for {} polynomials",
                coeffs.len(),
                polys.len()
            )));
        }
        let Some(first) = polys.first() else {
            return Err(MvPolyError::ShapeMismatch("empty linear combination".into()));
        };
        let mut acc: HashMap<&Monomial, Fe> = HashMap::new();
        for (&c, p) in coeffs.iter().zip(polys) {
            first.same_shape(p)?;
            if c.is_zero() {
                continue;
            }
            for (m, &v) in &p.terms {
                let e = acc.entry(m).or_insert_with(|| first.field.zero());
                *e += c * v;
            }
        }
        let mut out = Self::zero(first.field, first.arity, first.degree_bound);
        out.terms = acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|(m, v)| (m.clone(), v)).collect();
        Ok(out)
    }

    /// `phi(u(z))`: substitutes the polynomial vector `u` for the variables.
    pub fn compose(&self, u: &PolyVector) -> Result<UniPoly, MvPolyError> {
        if u.len() != self.arity {
            return Err(MvPolyError::ArityMismatch { expected: self.arity, got: u.len() });
        }
        // powers[i][e] = u_i^e, built up to the largest exponent actually used
        let max_exp: Vec<u32> = (0..self.arity)
            .map(|i| self.terms.keys().map(|m| m.exponents()[i]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<UniPoly>> = u
            .components()
            .iter()
            .zip(&max_exp)
            .map(|(ui, &top)| {
                let mut v = vec![UniPoly::constant(self.field.one())];
                for _ in 0..top {
                    let next = v.last().unwrap().mul_poly(ui);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = UniPoly::zero(self.field);
        for (m, &c) in &self.terms {
            let mut term = UniPoly::constant(c);
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    term = term.mul_poly(&powers[i][e as usize]);
                }
            }
            acc = acc.add_poly(&term);
        }
        Ok(acc)
    }

    /// Parses the canonical text form produced by `Display`.
    pub fn parse(
        field: Field,
        arity: usize,
        degree_bound: u32,
        text: &str,
    ) -> Result<Self, MvPolyError> {
        let text = text.trim();
        if text == "0" {
            return Ok(Self::zero(field, arity, degree_bound));
        }
        let mut terms = Vec::new();
        for raw in text.split('+') {
            let term = raw.trim();
            let bad = || MvPolyError::Parse(term.to_string());
            let mut coeff = field.one();
            let mut exps = vec![0u32; arity];
            for factor in term.split('*').map(str::trim) {
                if let Some(var) = factor.strip_prefix('X') {
                    let (idx, e) = match var.split_once('^') {
                        Some((i, e)) => (i, e.parse::<u32>().map_err(|_| bad())?),
                        None => (var, 1),
                    };
                    let idx: usize = idx.parse().map_err(|_| bad())?;
                    if idx == 0 || idx > arity {
                        return Err(bad());
                    }
                    exps[idx - 1] += e;
                } else {
                    let v = u64::from_str(factor).map_err(|_| bad())?;
                    coeff *= field.elem(v);
                }
            }
            terms.push((Monomial(exps), coeff));
        }
        Self::from_terms(field, arity, degree_bound, terms)
    }
}

/// Canonical text: terms in graded-lex order joined by ` + `, each
/// `coeff*X1^e1*X2^e2...` with unit exponents written bare (`X1`) and zero
/// exponents omitted. The zero polynomial is `0`.
impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.degree() == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
