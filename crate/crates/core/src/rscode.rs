//! Reed-Solomon codes `RS_K(alpha)`: generator matrices, star products and
//! decoding of erasures plus errors.

use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::field::{Fe, Field};
use crate::linalg;
use crate::unipoly::{barycentric_weights, PolyError, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("evaluation points are not pairwise distinct (repeated {0})")]
    DuplicateAlpha(u64),
    #[error("interpolation points are not pairwise distinct (repeated {0})")]
    DuplicateBeta(u64),
    #[error("invalid code parameters: {0}")]
    Parameters(String),
    #[error("expected vectors of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(
        "decoding failed: no polynomial of degree < {k} agrees with the word \
         on all but {max_errors} of the {kept} non-erased positions"
    )]
    DecodeFailure { k: usize, kept: usize, max_errors: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A received symbol: a field element or the absorbing erasure `?`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Value(Fe),
    Erased,
}

impl Symbol {
    pub fn value(self) -> Option<Fe> {
        match self {
            Symbol::Value(v) => Some(v),
            Symbol::Erased => None,
        }
    }

    pub fn is_erased(self) -> bool {
        matches!(self, Symbol::Erased)
    }

    /// Applies `f` to a value; erasures stay erased.
    pub fn map(self, f: impl FnOnce(Fe) -> Fe) -> Symbol {
        match self {
            Symbol::Value(v) => Symbol::Value(f(v)),
            Symbol::Erased => Symbol::Erased,
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Value(v) => write!(f, "{v}"),
            Symbol::Erased => write!(f, "?"),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A length-`N` word over `F_q ∪ {?}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceivedWord(pub Vec<Symbol>);

impl ReceivedWord {
    pub fn from_values(values: &[Fe]) -> Self {
        ReceivedWord(values.iter().map(|&v| Symbol::Value(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn erasures(&self) -> usize {
        self.0.iter().filter(|s| s.is_erased()).count()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }
}

/// Rows of a `K x N` generator matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenMatrix {
    pub rows: Vec<Vec<Fe>>,
}

impl GenMatrix {
    pub fn rank(&self) -> usize {
        linalg::rank(&self.rows)
    }

    /// `message * G`
    pub fn encode(&self, message: &[Fe]) -> Vec<Fe> {
        assert_eq!(message.len(), self.rows.len());
        let n = self.rows.first().map_or(0, Vec::len);
        let zero = message.first().map(|m| m.field().zero());
        (0..n)
            .map(|j| {
                message
                    .iter()
                    .zip(&self.rows)
                    .fold(zero.unwrap(), |acc, (&m, row)| acc + m * row[j])
            })
            .collect()
    }
}

/// `RS_K(alpha) = { (f(alpha_1), ..., f(alpha_N)) : deg f < K }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsCode {
    field: Field,
    alphas: Vec<Fe>,
    k: usize,
}

impl RsCode {
    pub fn new(field: Field, alphas: Vec<Fe>, k: usize) -> Result<Self, CodeError> {
        let n = alphas.len();
        if n as u64 > field.modulus() {
            return Err(CodeError::Parameters(format!("N = {n} exceeds q = {}", field.modulus())));
        }
        if k > n {
            return Err(CodeError::Parameters(format!("dimension K = {k} exceeds length N = {n}")));
        }
        let mut seen = std::collections::HashSet::new();
        for a in &alphas {
            if !seen.insert(*a) {
                return Err(CodeError::DuplicateAlpha(a.value()));
            }
        }
        Ok(RsCode { field, alphas, k })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn alphas(&self) -> &[Fe] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn min_distance(&self) -> usize {
        self.len() - self.k + 1
    }

    /// Row `i` is `(alpha_1^i, ..., alpha_N^i)`.
    pub fn canonical_generator(&self) -> GenMatrix {
        GenMatrix {
            rows: (0..self.k)
                .map(|i| self.alphas.iter().map(|a| a.pow(i as u64)).collect())
                .collect(),
        }
    }

    /// Lagrange generator `G(alpha, beta)`: entry `(k, n)` is
    /// `prod_{j != k} (beta_j - alpha_n) / (beta_j - beta_k)`, i.e. the
    /// Lagrange basis polynomial for node `beta_k` evaluated at `alpha_n`.
    pub fn lagrange_generator(&self, betas: &[Fe]) -> Result<GenMatrix, CodeError> {
        if betas.len() != self.k {
            return Err(CodeError::LengthMismatch { expected: self.k, got: betas.len() });
        }
        let weights = barycentric_weights(self.field, betas).map_err(|e| match e {
            PolyError::DuplicateNode(v) => CodeError::DuplicateBeta(v),
            other => other.into(),
        })?;
        let rows = (0..self.k)
            .map(|k| {
                self.alphas
                    .iter()
                    .map(|&a| {
                        betas
                            .iter()
                            .enumerate()
                            .filter(|&(j, _)| j != k)
                            .fold(weights[k], |acc, (_, &bj)| acc * (a - bj))
                    })
                    .collect()
            })
            .collect();
        Ok(GenMatrix { rows })
    }

    /// `ev(f) = (f(alpha_1), ..., f(alpha_N))`.
    pub fn encode(&self, f: &UniPoly) -> Vec<Fe> {
        debug_assert!(f.degree().is_none_or(|d| d < self.k.max(1)));
        f.eval_many(&self.alphas)
    }

    pub fn random_codeword<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<Fe> {
        let f = UniPoly::from_coeffs(self.field, self.field.sample_vec(self.k, rng));
        self.encode(&f)
    }

    /// Whether `word` lies in the code: interpolate through the first `K`
    /// positions and compare the rest.
    pub fn contains(&self, word: &[Fe]) -> bool {
        if word.len() != self.len() {
            return false;
        }
        let pts: Vec<(Fe, Fe)> = self.alphas.iter().copied().zip(word.iter().copied()).collect();
        let f = UniPoly::interpolate(self.field, &pts[..self.k]).expect("alphas are distinct");
        pts[self.k..].iter().all(|&(a, y)| f.eval(a) == y)
    }

    /// Recovers the message polynomial `f` (`deg f < K`) from a word with
    /// erasures and at most `max_errors` wrong symbols.
    ///
    /// Erased positions are punctured away, then Berlekamp-Welch corrects
    /// up to `max_errors` errors on the remaining positions. Requires
    /// `erasures + 2 * max_errors <= N - K`. Any result is re-checked
    /// against the received word, so a word that is not within
    /// `max_errors` of a codeword on the kept positions is reported as
    /// [`CodeError::DecodeFailure`].
    pub fn decode(&self, received: &ReceivedWord, max_errors: usize) -> Result<UniPoly, CodeError> {
        if received.len() != self.len() {
            return Err(CodeError::LengthMismatch { expected: self.len(), got: received.len() });
        }
        let kept: Vec<(Fe, Fe)> = self
            .alphas
            .iter()
            .zip(received.symbols())
            .filter_map(|(&a, s)| s.value().map(|v| (a, v)))
            .collect();
        let failure = CodeError::DecodeFailure { k: self.k, kept: kept.len(), max_errors };
        if kept.len() < self.k + 2 * max_errors {
            return Err(CodeError::Parameters(format!(
                "{} erasures plus {} correctable errors exceed the redundancy N - K = {}",
                received.erasures(),
                max_errors,
                self.len() - self.k
            )));
        }
        if self.k == 0 {
            return if kept.iter().filter(|(_, y)| !y.is_zero()).count() <= max_errors {
                Ok(UniPoly::zero(self.field))
            } else {
                Err(failure)
            };
        }
        let f = berlekamp_welch(self.field, &kept, self.k, max_errors).ok_or(failure.clone())?;
        let disagreements = kept.iter().filter(|&&(a, y)| f.eval(a) != y).count();
        if disagreements > max_errors {
            return Err(failure);
        }
        Ok(f)
    }
}

/// Solves `Q(x_i) = y_i E(x_i)` with `E` monic of degree `e` and
/// `deg Q < k + e`, returning `Q / E` when the division is exact.
fn berlekamp_welch(field: Field, pts: &[(Fe, Fe)], k: usize, e: usize) -> Option<UniPoly> {
    if e == 0 {
        let f = UniPoly::interpolate(field, &pts[..k]).ok()?;
        return Some(f);
    }
    // unknowns: q_0..q_{k+e-1}, then e_0..e_{e-1}; E's leading coefficient is 1
    let rows: Vec<Vec<Fe>> = pts
        .iter()
        .map(|&(x, y)| {
            let mut row = Vec::with_capacity(k + 2 * e);
            let mut p = field.one();
            for _ in 0..k + e {
                row.push(p);
                p *= x;
            }
            let mut p = field.one();
            for _ in 0..e {
                row.push(-(y * p));
                p *= x;
            }
            row
        })
        .collect();
    let rhs: Vec<Fe> = pts.iter().map(|&(x, y)| y * x.pow(e as u64)).collect();
    let sol = linalg::solve(&rows, &rhs)?;
    let q = UniPoly::from_coeffs(field, sol[..k + e].to_vec());
    let mut e_coeffs = sol[k + e..].to_vec();
    e_coeffs.push(field.one());
    let locator = UniPoly::from_coeffs(field, e_coeffs);
    let (f, rem) = q.div_rem(&locator);
    if !rem.is_zero() || f.degree().is_some_and(|d| d >= k) {
        return None;
    }
    Some(f)
}

/// Componentwise (Schur) product `x ⋆ y`.
pub fn star(x: &[Fe], y: &[Fe]) -> Result<Vec<Fe>, CodeError> {
    if x.len() != y.len() {
        return Err(CodeError::LengthMismatch { expected: x.len(), got: y.len() });
    }
    Ok(x.iter().zip(y).map(|(&a, &b)| a * b).collect())
}

/// Dimension of `RS_K ⋆ RS_T`: `min{K + T - 1, N}`.
pub fn star_product_dim(n: usize, k: usize, t: usize) -> usize {
    if k == 0 || t == 0 {
        return 0;
    }
    (k + t - 1).min(n)
}

/// Dimension of the `G`-fold star power `RS_K^{⋆G}`: `min{G(K-1) + 1, N}`.
pub fn star_power_dim(n: usize, k: usize, g: usize) -> usize {
    if k == 0 {
        return 0;
    }
    if g == 0 {
        return 1.min(n);
    }
    (g * (k - 1) + 1).min(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools_free::combinations;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    mod itertools_free {
        /// All `r`-subsets of `0..n`, in lexicographic order.
        pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
            let mut out = Vec::new();
            let mut cur = Vec::new();
            fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
                if cur.len() == r {
                    out.push(cur.clone());
                    return;
                }
                for i in start..n {
                    cur.push(i);
                    go(i + 1, n, r, cur, out);
                    cur.pop();
                }
            }
            go(0, n, r, &mut cur, &mut out);
            out
        }
    }

    fn f(q: u64) -> Field {
        Field::new(q).unwrap()
    }

    fn els(field: Field, vals: &[u64]) -> Vec<Fe> {
        vals.iter().map(|&v| field.elem(v)).collect()
    }

    #[test]
    fn canonical_generator_examples() {
        let f7 = f(7);
        let code = RsCode::new(f7, els(f7, &[1, 2, 3]), 1).unwrap();
        assert_eq!(code.canonical_generator().rows, vec![els(f7, &[1, 1, 1])]);
        let code = RsCode::new(f7, els(f7, &[1, 2, 3]), 2).unwrap();
        assert_eq!(code.canonical_generator().rows, vec![els(f7, &[1, 1, 1]), els(f7, &[1, 2, 3])]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 1..=6 {
            let code = RsCode::new(f(13), els(f(13), &[0, 1, 3, 4, 7, 9, 12]), k).unwrap();
            assert_eq!(code.canonical_generator().rank(), k);
            let _ = code.random_codeword(&mut rng);
        }
    }

    #[test]
    fn constructor_validation() {
        let f7 = f(7);
        assert_eq!(RsCode::new(f7, els(f7, &[1, 1]), 1), Err(CodeError::DuplicateAlpha(1)));
        assert!(RsCode::new(f7, els(f7, &[1, 2]), 3).is_err());
        let code = RsCode::new(f7, els(f7, &[1, 2, 3]), 2).unwrap();
        assert_eq!(code.lagrange_generator(&els(f7, &[4, 4])), Err(CodeError::DuplicateBeta(4)));
    }

    #[test]
    fn lagrange_generator_examples() {
        let f11 = f(11);
        let alphas = els(f11, &[1, 2, 3, 4, 5, 6]);
        let code = RsCode::new(f11, alphas.clone(), 1).unwrap();
        assert_eq!(code.lagrange_generator(&els(f11, &[9])).unwrap().rows, vec![vec![f11.one(); 6]]);
        // systematic when beta is a prefix of alpha
        let code = RsCode::new(f11, alphas.clone(), 3).unwrap();
        let g = code.lagrange_generator(&alphas[..3]).unwrap();
        for k in 0..3 {
            for j in 0..3 {
                assert_eq!(g.rows[k][j], if k == j { f11.one() } else { f11.zero() });
            }
        }
    }

    #[test]
    fn lagrange_row_space_is_the_code() {
        let f31 = f(31);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut pts: Vec<u64> = (0..31).collect();
            // random distinct alphas and betas
            for i in (1..pts.len()).rev() {
                let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                pts.swap(i, j);
            }
            let alphas = els(f31, &pts[..9]);
            let betas = els(f31, &pts[9..13]);
            let code = RsCode::new(f31, alphas.clone(), 4).unwrap();
            let lg = code.lagrange_generator(&betas).unwrap();
            let cg = code.canonical_generator();
            assert_eq!(lg.rank(), 4);
            let stacked: Vec<Vec<Fe>> = lg.rows.iter().chain(&cg.rows).cloned().collect();
            assert_eq!(linalg::rank(&stacked), 4);
            // a G(alpha, beta) = ev(u_{a,beta}) with u(beta_k) = a_k
            let a = f31.sample_vec(4, &mut rng);
            let u = UniPoly::interpolate(f31, &betas.iter().copied().zip(a.iter().copied()).collect::<Vec<_>>()).unwrap();
            assert_eq!(lg.encode(&a), code.encode(&u));
        }
    }

    #[test]
    fn star_examples() {
        let f13 = f(13);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = f13.sample_vec(8, &mut rng);
        assert_eq!(star(&x, &vec![f13.one(); 8]).unwrap(), x);
        assert_eq!(star(&x, &vec![f13.zero(); 8]).unwrap(), vec![f13.zero(); 8]);
        assert!(star(&x, &x[..3]).is_err());
        let alphas = els(f13, &[1, 2, 3, 4, 5, 6, 7, 8]);
        let fp = UniPoly::from_coeffs(f13, f13.sample_vec(3, &mut rng));
        let gp = UniPoly::from_coeffs(f13, f13.sample_vec(4, &mut rng));
        assert_eq!(
            star(&fp.eval_many(&alphas), &gp.eval_many(&alphas)).unwrap(),
            (&fp * &gp).eval_many(&alphas)
        );
    }

    #[test]
    fn star_dimensions_formula() {
        assert_eq!(star_power_dim(14, 2, 2), 3);
        for k in 1..6 {
            assert_eq!(star_power_dim(20, k, 1), k);
        }
        assert_eq!(star_power_dim(5, 4, 3), 5);
        assert_eq!(star_product_dim(8, 3, 2), 4);
    }

    fn empirical_power_dim(field: Field, n: usize, k: usize, g: usize, samples: usize, seed: u64) -> usize {
        let alphas: Vec<Fe> = (1..=n as u64).map(|v| field.elem(v)).collect();
        let code = RsCode::new(field, alphas, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<Fe>> = (0..samples)
            .map(|_| {
                (1..g).fold(code.random_codeword(&mut rng), |acc, _| {
                    star(&acc, &code.random_codeword(&mut rng)).unwrap()
                })
            })
            .collect();
        linalg::rank(&rows)
    }

    #[test]
    fn star_power_dimension_empirical() {
        let f101 = f(101);
        for (n, k, g) in [(8, 3, 2), (10, 2, 3)] {
            assert_eq!(empirical_power_dim(f101, n, k, g, 200, 11), star_power_dim(n, k, g));
        }
    }

    #[test]
    fn mds_by_weight_enumeration() {
        // [6,3] over F_7: every nonzero codeword has weight >= 4
        let f7 = f(7);
        let code = RsCode::new(f7, els(f7, &[0, 1, 2, 3, 4, 5]), 3).unwrap();
        let g = code.canonical_generator();
        let mut min_w = usize::MAX;
        for m in 1..7u64.pow(3) {
            let msg = els(f7, &[m % 7, (m / 7) % 7, m / 49]);
            let w = g.encode(&msg).iter().filter(|c| !c.is_zero()).count();
            min_w = min_w.min(w);
        }
        assert_eq!(min_w, code.min_distance());
    }

    #[test]
    fn decode_clean_word() {
        let f11 = f(11);
        let code = RsCode::new(f11, els(f11, &[1, 2, 3, 4, 5, 6, 7]), 3).unwrap();
        let msg = UniPoly::from_u64s(f11, &[4, 0, 9]);
        let word = ReceivedWord::from_values(&code.encode(&msg));
        assert_eq!(code.decode(&word, 0).unwrap(), msg);
        assert_eq!(code.decode(&word, 2).unwrap(), msg);
    }

    #[test]
    fn decode_two_erasures_one_error() {
        let f11 = f(11);
        let code = RsCode::new(f11, els(f11, &[1, 2, 3, 4, 5, 6, 7]), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let msg = UniPoly::from_coeffs(f11, f11.sample_vec(3, &mut rng));
            let mut word = ReceivedWord::from_values(&code.encode(&msg));
            word.0[0] = Symbol::Erased;
            word.0[4] = Symbol::Erased;
            word.0[2] = word.0[2].map(|v| v + f11.sample_nonzero(&mut rng));
            assert_eq!(code.decode(&word, 1).unwrap(), msg);
        }
    }

    #[test]
    fn decode_14_11_one_erasure_one_error() {
        let f23 = f(23);
        let code = RsCode::new(f23, (1..=14).map(|v| f23.elem(v)).collect(), 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let msg = UniPoly::from_coeffs(f23, f23.sample_vec(11, &mut rng));
            let mut word = ReceivedWord::from_values(&code.encode(&msg));
            let pos = combinations(14, 2);
            let p = &pos[(rng.next_u64() % pos.len() as u64) as usize];
            word.0[p[0]] = Symbol::Erased;
            word.0[p[1]] = word.0[p[1]].map(|v| v + f23.sample_nonzero(&mut rng));
            assert_eq!(code.decode(&word, 1).unwrap(), msg);
        }
    }

    #[test]
    fn decode_rejects_overbudget_parameters() {
        let f11 = f(11);
        let code = RsCode::new(f11, els(f11, &[1, 2, 3, 4, 5, 6, 7]), 3).unwrap();
        let mut word = ReceivedWord::from_values(&code.encode(&UniPoly::zero(f11)));
        word.0[0] = Symbol::Erased;
        word.0[1] = Symbol::Erased;
        word.0[2] = Symbol::Erased;
        assert!(matches!(code.decode(&word, 1), Err(CodeError::Parameters(_))));
    }

    #[test]
    fn decode_detects_uncorrectable_with_slack() {
        // [7,3] with one erasure: radius 1, one symbol of slack, so any two
        // errors are at distance >= 4 - 2 > 1 from every other codeword
        let f11 = f(11);
        let code = RsCode::new(f11, els(f11, &[1, 2, 3, 4, 5, 6, 7]), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for errs in combinations(6, 2) {
            let msg = UniPoly::from_coeffs(f11, f11.sample_vec(3, &mut rng));
            let mut word = ReceivedWord::from_values(&code.encode(&msg));
            word.0[6] = Symbol::Erased;
            for &p in &errs {
                word.0[p] = word.0[p].map(|v| v + f11.sample_nonzero(&mut rng));
            }
            assert!(matches!(code.decode(&word, 1), Err(CodeError::DecodeFailure { .. })));
        }
    }

    #[test]
    fn membership() {
        let f11 = f(11);
        let code = RsCode::new(f11, els(f11, &[1, 2, 3, 4, 5]), 2).unwrap();
        let mut w = code.encode(&UniPoly::from_u64s(f11, &[3, 7]));
        assert!(code.contains(&w));
        w[4] += f11.one();
        assert!(!code.contains(&w));
    }
}
