//! The general private-computation scheme over Lagrange-encoded data.
//!
//! The user wants `phi_b(x_k)` for `B` polynomials `phi_b` of degree `<= G`
//! and `K` data vectors `x_k`. Data is stored as evaluations of the
//! interpolation polynomial `u_X` (padded with `E` random vectors), so each
//! `gamma_b(z) = phi_b(u_X(z))` has `L = G(K+E-1)+1` coefficients. Every round
//! the servers jointly return the evaluations of a response polynomial whose
//! coefficients at `z^0 .. z^{H-1}` are `H` fresh coefficients of the
//! `gamma_b`; the monomial schedule `zeta` arranges which ones, and the
//! coefficients pushed into negative powers are the ones already learned in
//! the previous round. After `S` rounds all `BL = HS` coefficients are known.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Fe, Field};
use crate::mvpoly::{MultiPoly, MvPolyError};
use crate::rscode::{CodeError, ReceivedWord, RsCode, Symbol};
use crate::unipoly::{LaurentPoly, PolyError, PolyVector, UniPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("coefficient gamma_{{{b},{l}}} is needed but has not been decoded yet")]
    MissingCoefficient { b: usize, l: usize },
    #[error("round {round} is out of range 1..={rounds}")]
    RoundOutOfRange { round: usize, rounds: usize },
    #[error("round {round}: {source}")]
    Decode { round: usize, source: CodeError },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    MvPoly(#[from] MvPolyError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

impl SchemeError {
    /// True when a round could not be decoded, i.e. the fault budget was
    /// exceeded or responses were inconsistent.
    pub fn is_decode_failure(&self) -> bool {
        matches!(self, SchemeError::Decode { .. })
    }
}

/// The integer system parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeParams {
    /// servers
    pub n: usize,
    /// data vectors
    pub k: usize,
    /// length of each data vector
    pub m: usize,
    /// degree of the evaluated polynomials
    pub g: usize,
    /// colluding servers the queries are private against
    pub t: usize,
    /// colluding servers the data is private against
    pub e: usize,
    /// stragglers per round
    pub p: usize,
    /// Byzantine servers per round
    pub a: usize,
}

impl SchemeParams {
    /// `G(K+E-1)`, the degree bound of every `gamma_b`.
    pub fn gamma_degree(&self) -> usize {
        self.g * (self.k + self.e - 1)
    }

    /// Smallest feasible `N`: one more than `G(K+E-1) + T + P + 2A`.
    pub fn min_servers(&self) -> usize {
        self.gamma_degree() + self.t + self.p + 2 * self.a + 1
    }

    pub fn check(&self) -> Result<(), SchemeError> {
        if self.k == 0 || self.m == 0 || self.g == 0 {
            return Err(SchemeError::Config(format!(
                "K, M and G must be at least 1 (K = {}, M = {}, G = {})",
                self.k, self.m, self.g
            )));
        }
        if self.n < self.min_servers() {
            return Err(SchemeError::Infeasible(format!(
                "N = {} but N > G(K+E-1) + T + P + 2A = {} is required",
                self.n,
                self.min_servers() - 1
            )));
        }
        Ok(())
    }
}

/// Exact rate `[N - (G(K+E-1)+T+P+2A)]/N * K/(G(K+E-1)+1)`.
pub fn rate(params: &SchemeParams) -> Result<Ratio<u64>, SchemeError> {
    params.check()?;
    let h = (params.n - (params.min_servers() - 1)) as u64;
    let l = (params.gamma_degree() + 1) as u64;
    Ok(Ratio::new(h * params.k as u64, params.n as u64 * l))
}

/// Parameters derived from [`SchemeParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// `N - (P + 2A)`, the dimension of the code the responses live in
    pub n_prime: usize,
    /// fresh coefficients decoded per round
    pub h: usize,
    /// coefficients per `gamma_b`
    pub l: usize,
    /// number of evaluated polynomials
    pub b: usize,
    /// number of rounds
    pub s: usize,
}

impl DerivedParams {
    /// Minimal `(B, S)` with `BL = HS`.
    pub fn derive(params: &SchemeParams) -> Result<Self, SchemeError> {
        params.check()?;
        let n_prime = params.n - (params.p + 2 * params.a);
        let l = params.gamma_degree() + 1;
        let h = n_prime - (params.gamma_degree() + params.t);
        let d = h.gcd(&l);
        Ok(DerivedParams { n_prime, h, l, b: h / d, s: l / d })
    }

    /// `KB / (NS)`
    pub fn rate(&self, params: &SchemeParams) -> Ratio<u64> {
        Ratio::new((params.k * self.b) as u64, (params.n * self.s) as u64)
    }
}

/// Full configuration: parameters, field and evaluation points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeConfig {
    pub params: SchemeParams,
    pub field: Field,
    /// `N` distinct nonzero storage points
    pub alphas: Vec<Fe>,
    /// `K + E` distinct interpolation points, disjoint from `alphas`
    pub betas: Vec<Fe>,
}

impl SchemeConfig {
    pub fn new(
        params: SchemeParams,
        field: Field,
        alphas: Vec<Fe>,
        betas: Vec<Fe>,
    ) -> Result<Self, SchemeError> {
        params.check()?;
        let q = field.modulus();
        let need = (params.n + params.k + params.e) as u64;
        if q < need {
            return Err(SchemeError::Config(format!("q = {q} but q >= N + K + E = {need} is required")));
        }
        if alphas.len() != params.n {
            return Err(SchemeError::Config(format!("{} alphas for N = {}", alphas.len(), params.n)));
        }
        if betas.len() != params.k + params.e {
            return Err(SchemeError::Config(format!(
                "{} betas for K + E = {}",
                betas.len(),
                params.k + params.e
            )));
        }
        if alphas.iter().chain(&betas).any(|v| v.field() != field) {
            return Err(SchemeError::Config("points from a different field".into()));
        }
        if alphas.iter().any(|a| a.is_zero()) {
            return Err(SchemeError::Config("alphas must be nonzero".into()));
        }
        let mut seen = HashSet::new();
        for v in alphas.iter().chain(&betas) {
            if !seen.insert(*v) {
                return Err(SchemeError::Config(format!(
                    "point {v} repeats: alphas must be distinct, betas distinct, and disjoint from each other"
                )));
            }
        }
        Ok(SchemeConfig { params, field, alphas, betas })
    }

    /// `alpha_n = n` for `n = 1..=N`; betas take the next values and then 0.
    pub fn with_default_points(params: SchemeParams, field: Field) -> Result<Self, SchemeError> {
        let (alphas, betas) = default_points(&params, field)?;
        Self::new(params, field, alphas, betas)
    }

    pub fn derived(&self) -> DerivedParams {
        DerivedParams::derive(&self.params).expect("validated at construction")
    }
}

/// Default evaluation points: `alpha = (1..=N)`, `beta = (N+1, ..., q-1, 0)`
/// truncated to `K + E` entries.
pub fn default_points(params: &SchemeParams, field: Field) -> Result<(Vec<Fe>, Vec<Fe>), SchemeError> {
    let need = (params.n + params.k + params.e) as u64;
    if field.modulus() < need {
        return Err(SchemeError::Config(format!(
            "q = {} but q >= N + K + E = {need} is required",
            field.modulus()
        )));
    }
    let alphas = (1..=params.n as u64).map(|v| field.elem(v)).collect();
    let betas = (params.n as u64 + 1..field.modulus())
        .chain(std::iter::once(0))
        .take(params.k + params.e)
        .map(|v| field.elem(v))
        .collect();
    Ok((alphas, betas))
}

/// Position of one coefficient `gamma_{b,l}` (both 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CoeffIndex {
    pub b: usize,
    pub l: usize,
}

impl fmt::Display for CoeffIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gamma_{{{},{}}}", self.b + 1, self.l)
    }
}

/// What round `s` exposes: coefficients sitting at negative powers (already
/// known) and the `H` coefficients sitting at `z^0 .. z^{H-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundLayout {
    /// `(exponent, coefficient)` with exponent < 0
    pub known: Vec<(i64, CoeffIndex)>,
    /// `decoded[i]` is the coefficient of `z^i`
    pub decoded: Vec<CoeffIndex>,
}

/// The monomial schedule `zeta` with its per-round coefficient layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPlan {
    pub derived: DerivedParams,
    /// `zeta[s][b]` is the exponent of the monomial `zeta_b^{(s)}`, or `None`
    /// for the zero entry
    zeta: Vec<Vec<Option<i64>>>,
    /// `Q_0 .. Q_S`
    pub q_seq: Vec<usize>,
    /// `U_0 .. U_S`
    pub u_seq: Vec<usize>,
    pub rounds: Vec<RoundLayout>,
}

impl QueryPlan {
    /// Builds the schedule from the recursion
    /// `Q_s = max { Q : -U_{s-1} + (Q - Q_{s-1}) L <= H }`,
    /// `zeta_b^{(s)} = z^{-U_{s-1} + (b - Q_{s-1} - 1) L}` for
    /// `Q_{s-1} < b <= Q_s + 1`, and
    /// `U_s = H + U_{s-1} - (Q_s - Q_{s-1}) L`, starting from `Q_0 = U_0 = 0`.
    ///
    /// When `U_s = 0` the column `Q_s + 1` would contribute nothing below
    /// `z^H`, so it is left at zero. Columns past `B` are dropped.
    pub fn build(derived: DerivedParams) -> Self {
        let DerivedParams { h, l, b: cols, s: rows, .. } = derived;
        let mut q_seq = vec![0usize];
        let mut u_seq = vec![0usize];
        let mut zeta = Vec::with_capacity(rows);
        let mut rounds = Vec::with_capacity(rows);
        for _ in 0..rows {
            let (q_prev, u_prev) = (*q_seq.last().unwrap(), *u_seq.last().unwrap());
            let q_cur = q_prev + (h + u_prev) / l;
            let u_cur = h + u_prev - (q_cur - q_prev) * l;
            let last_col = if u_cur == 0 { q_cur } else { q_cur + 1 };
            let mut row = vec![None; cols];
            let mut layout = RoundLayout { known: Vec::new(), decoded: Vec::new() };
            let mut by_exp = BTreeMap::new();
            // columns are 1-based in the recursion; `col` below is 0-based
            for col in q_prev..last_col.min(cols) {
                let exp = -(u_prev as i64) + ((col - q_prev) * l) as i64;
                row[col] = Some(exp);
                for ell in 0..l {
                    let e = exp + ell as i64;
                    if e < h as i64 {
                        let prev = by_exp.insert(e, CoeffIndex { b: col, l: ell });
                        debug_assert!(prev.is_none(), "two coefficients share exponent {e}");
                    }
                }
            }
            for (e, idx) in by_exp {
                if e < 0 {
                    layout.known.push((e, idx));
                } else {
                    layout.decoded.push(idx);
                }
            }
            zeta.push(row);
            rounds.push(layout);
            q_seq.push(q_cur);
            u_seq.push(u_cur);
        }
        QueryPlan { derived, zeta, q_seq, u_seq, rounds }
    }

    pub fn rounds(&self) -> usize {
        self.derived.s
    }

    /// Exponent of `zeta_b^{(s)}` (0-based `s`, `b`), `None` if zero.
    pub fn zeta_exponent(&self, s: usize, b: usize) -> Option<i64> {
        self.zeta[s][b]
    }

    pub fn zeta(&self, field: Field, s: usize, b: usize) -> LaurentPoly {
        match self.zeta[s][b] {
            Some(e) => LaurentPoly::monomial(field.one(), e),
            None => LaurentPoly::zero(field),
        }
    }

    /// The coefficient sets decoded per round.
    pub fn decoded_sets(&self) -> Vec<Vec<CoeffIndex>> {
        self.rounds.iter().map(|r| r.decoded.clone()).collect()
    }

    /// Checks that every round decodes exactly `H` coefficients, that the
    /// decoded sets partition all `BL` coefficients, and that every
    /// negative-power coefficient of round `s` was decoded in an earlier
    /// round.
    pub fn verify_partition(&self) -> Result<(), String> {
        let DerivedParams { h, l, b, .. } = self.derived;
        let mut seen = HashSet::new();
        for (s, round) in self.rounds.iter().enumerate() {
            if round.decoded.len() != h {
                return Err(format!("round {} decodes {} coefficients, not H = {h}", s + 1, round.decoded.len()));
            }
            for (_, idx) in &round.known {
                if !seen.contains(idx) {
                    return Err(format!("round {} subtracts {idx} before it is decoded", s + 1));
                }
            }
            for idx in &round.decoded {
                if !seen.insert(*idx) {
                    return Err(format!("{idx} is decoded twice (again in round {})", s + 1));
                }
            }
        }
        if seen.len() != b * l {
            return Err(format!("{} coefficients decoded, BL = {}", seen.len(), b * l));
        }
        Ok(())
    }

    /// The `zeta` matrix as text: one row per round, entries `0`, `1`, `z`
    /// or `z^e`, columns aligned.
    pub fn render_zeta(&self) -> String {
        let cell = |e: Option<i64>| match e {
            None => "0".to_string(),
            Some(0) => "1".to_string(),
            Some(1) => "z".to_string(),
            Some(e) => format!("z^{e}"),
        };
        let cells: Vec<Vec<String>> =
            self.zeta.iter().map(|row| row.iter().map(|&e| cell(e)).collect()).collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        cells
            .iter()
            .map(|row| {
                row.iter().map(|c| format!("{c:>width$}")).collect::<Vec<_>>().join(" ").trim_end().to_string()
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Evaluations stored on the servers together with the polynomial they
/// came from. Only the encoder and test harness ever see `u_x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedStore {
    /// `y[n] = u_X(alpha_n)`
    pub y: Vec<Vec<Fe>>,
    pub u_x: PolyVector,
}

/// Interpolates `u_X` through `(beta_k, x_k)` and `(beta_{K+e}, t_e)` and
/// evaluates it at every alpha. No validity checks beyond interpolation.
pub fn encode_with_padding(
    field: Field,
    alphas: &[Fe],
    betas: &[Fe],
    data: &[Vec<Fe>],
    padding: &[Vec<Fe>],
) -> Result<EncodedStore, SchemeError> {
    let dim = data.first().or(padding.first()).map_or(0, Vec::len);
    let values: Vec<Vec<Fe>> = data.iter().chain(padding).cloned().collect();
    let u_x = PolyVector::interpolate(field, dim, betas, &values)?;
    let y = alphas.iter().map(|&a| u_x.eval(a)).collect();
    Ok(EncodedStore { y, u_x })
}

/// Lagrange-encodes `K` data vectors of length `M`, drawing the `E` padding
/// vectors from `rng`.
pub fn encode_data<R: RngCore + ?Sized>(
    config: &SchemeConfig,
    data: &[Vec<Fe>],
    rng: &mut R,
) -> Result<EncodedStore, SchemeError> {
    let SchemeParams { k, m, e, .. } = config.params;
    if data.len() != k || data.iter().any(|x| x.len() != m) {
        return Err(SchemeError::Config(format!("data must be {k} vectors of length {m}")));
    }
    if data.iter().flatten().any(|v| v.field() != config.field) {
        return Err(SchemeError::Config("data from a different field".into()));
    }
    let padding: Vec<Vec<Fe>> = (0..e).map(|_| config.field.sample_vec(m, rng)).collect();
    encode_with_padding(config.field, &config.alphas, &config.betas, data, &padding)
}

fn check_functions(config: &SchemeConfig, plan: &QueryPlan, phis: &[MultiPoly]) -> Result<(), SchemeError> {
    if phis.len() != plan.derived.b {
        return Err(SchemeError::Config(format!("{} functions supplied, B = {}", phis.len(), plan.derived.b)));
    }
    for phi in phis {
        if phi.field() != config.field
            || phi.arity() != config.params.m
            || phi.degree_bound() as usize != config.params.g
        {
            return Err(SchemeError::Config(format!(
                "function {phi} is not in P_{{M={}, G={}}} over {}",
                config.params.m, config.params.g, config.field
            )));
        }
    }
    Ok(())
}

/// Draws the `T` masking polynomials for one round.
pub fn sample_masks<R: RngCore + ?Sized>(config: &SchemeConfig, rng: &mut R) -> Vec<MultiPoly> {
    let SchemeParams { m, g, t, .. } = config.params;
    (0..t).map(|_| MultiPoly::sample_uniform(config.field, m, g as u32, rng)).collect()
}

/// Queries for round `s` (1-based) with caller-supplied masks:
/// `rho_n = sum_b zeta_b(alpha_n) phi_b + alpha_n^H sum_t alpha_n^{t-1} psi_t`.
pub fn queries_with_masks(
    plan: &QueryPlan,
    config: &SchemeConfig,
    phis: &[MultiPoly],
    s: usize,
    masks: &[MultiPoly],
) -> Result<Vec<MultiPoly>, SchemeError> {
    check_functions(config, plan, phis)?;
    if s == 0 || s > plan.rounds() {
        return Err(SchemeError::RoundOutOfRange { round: s, rounds: plan.rounds() });
    }
    if masks.len() != config.params.t {
        return Err(SchemeError::Config(format!("{} masks for T = {}", masks.len(), config.params.t)));
    }
    let h = plan.derived.h as u64;
    let polys: Vec<&MultiPoly> = phis.iter().chain(masks).collect();
    config
        .alphas
        .iter()
        .map(|&alpha| {
            let mut coeffs: Vec<Fe> = (0..plan.derived.b)
                .map(|b| match plan.zeta_exponent(s - 1, b) {
                    Some(e) => alpha.pow_signed(e),
                    None => Ok(config.field.zero()),
                })
                .collect::<Result<_, _>>()
                .map_err(PolyError::from)?;
            coeffs.extend((0..masks.len() as u64).map(|t| alpha.pow(h + t)));
            Ok(MultiPoly::linear_combine(&coeffs, &polys)?)
        })
        .collect()
}

/// Queries for round `s` (1-based) with fresh uniform masks from `rng`.
pub fn make_queries<R: RngCore + ?Sized>(
    plan: &QueryPlan,
    config: &SchemeConfig,
    phis: &[MultiPoly],
    s: usize,
    rng: &mut R,
) -> Result<Vec<MultiPoly>, SchemeError> {
    let masks = sample_masks(config, rng);
    queries_with_masks(plan, config, phis, s, &masks)
}

/// The response polynomial `r^{(s)}(z) = sum_b zeta_b gamma_b + z^H sum_t
/// z^{t-1} psi_t(u_X(z))`, for checking server answers symbolically.
pub fn response_polynomial(
    plan: &QueryPlan,
    config: &SchemeConfig,
    phis: &[MultiPoly],
    masks: &[MultiPoly],
    u_x: &PolyVector,
    s: usize,
) -> Result<LaurentPoly, SchemeError> {
    let field = config.field;
    let mut acc = LaurentPoly::zero(field);
    for (b, phi) in phis.iter().enumerate() {
        let gamma = phi.compose(u_x)?.to_laurent();
        acc = acc.add_poly(&plan.zeta(field, s - 1, b).mul_poly(&gamma));
    }
    for (t, psi) in masks.iter().enumerate() {
        let noise = psi.compose(u_x)?.to_laurent().shift((plan.derived.h + t) as i64);
        acc = acc.add_poly(&noise);
    }
    Ok(acc)
}

/// Decoding progress: every coefficient learned so far.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoundState {
    pub completed_rounds: usize,
    pub known: BTreeMap<CoeffIndex, Fe>,
}

impl RoundState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Decodes the next round's responses.
///
/// Subtracts the already-known negative-power terms from every non-erased
/// position, corrects erasures and up to `A` errors in `RS_{N'}(alpha)`, and
/// records the coefficients of `1, z, ..., z^{H-1}`.
pub fn decode_round(
    plan: &QueryPlan,
    config: &SchemeConfig,
    state: &RoundState,
    received: &ReceivedWord,
) -> Result<RoundState, SchemeError> {
    let s = state.completed_rounds + 1;
    let layout = plan
        .rounds
        .get(s - 1)
        .ok_or(SchemeError::RoundOutOfRange { round: s, rounds: plan.rounds() })?;
    if received.len() != config.params.n {
        return Err(SchemeError::Config(format!("{} responses for N = {}", received.len(), config.params.n)));
    }
    let known_terms: Vec<(i64, Fe)> = layout
        .known
        .iter()
        .map(|&(e, idx)| {
            state
                .known
                .get(&idx)
                .map(|&c| (e, c))
                .ok_or(SchemeError::MissingCoefficient { b: idx.b + 1, l: idx.l })
        })
        .collect::<Result<_, _>>()?;
    let known_poly = LaurentPoly::from_coeffs(
        config.field,
        known_terms.first().map_or(0, |t| t.0),
        {
            let lo = known_terms.first().map_or(0, |t| t.0);
            let mut coeffs = vec![config.field.zero(); known_terms.len()];
            for &(e, c) in &known_terms {
                coeffs[(e - lo) as usize] = c;
            }
            coeffs
        },
    );
    let stripped: Vec<Symbol> = config
        .alphas
        .iter()
        .zip(received.symbols())
        .map(|(&alpha, sym)| match sym {
            Symbol::Erased => Ok(Symbol::Erased),
            Symbol::Value(v) => Ok(Symbol::Value(*v - known_poly.eval(alpha)?)),
        })
        .collect::<Result<_, PolyError>>()?;
    let code = RsCode::new(config.field, config.alphas.clone(), plan.derived.n_prime)?;
    let r = code
        .decode(&ReceivedWord(stripped), config.params.a)
        .map_err(|source| SchemeError::Decode { round: s, source })?;
    let mut next = state.clone();
    next.completed_rounds = s;
    for (i, idx) in layout.decoded.iter().enumerate() {
        next.known.insert(*idx, r.coeff(i));
    }
    Ok(next)
}

/// Assembles each `gamma_b` and returns `out[b][k] = gamma_b(beta_k) =
/// phi_b(x_k)`.
pub fn reconstruct(
    state: &RoundState,
    config: &SchemeConfig,
    b: usize,
) -> Result<Vec<Vec<Fe>>, SchemeError> {
    let l = config.params.gamma_degree() + 1;
    (0..b)
        .map(|bi| {
            let coeffs = (0..l)
                .map(|li| {
                    state
                        .known
                        .get(&CoeffIndex { b: bi, l: li })
                        .copied()
                        .ok_or(SchemeError::MissingCoefficient { b: bi + 1, l: li })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let gamma = UniPoly::from_coeffs(config.field, coeffs);
            Ok(config.betas[..config.params.k].iter().map(|&beta| gamma.eval(beta)).collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize, k: usize, m: usize, g: usize, t: usize, e: usize, p: usize, a: usize) -> SchemeParams {
        SchemeParams { n, k, m, g, t, e, p, a }
    }

    fn example_params() -> SchemeParams {
        params(14, 2, 4, 2, 1, 2, 1, 1)
    }

    #[test]
    fn derived_example_values() {
        let d = DerivedParams::derive(&example_params()).unwrap();
        assert_eq!(d, DerivedParams { n_prime: 11, h: 4, l: 7, b: 4, s: 7 });
        assert_eq!(rate(&example_params()).unwrap(), Ratio::new(4, 49));
        assert_eq!(d.rate(&example_params()), Ratio::new(4, 49));
    }

    #[test]
    fn derived_trivial_case() {
        // G(K+E-1) = 0 and N' = N, so H = N - T
        let d = DerivedParams::derive(&params(2, 1, 1, 1, 1, 0, 0, 0)).unwrap();
        assert_eq!((d.h, d.l, d.b, d.s), (1, 1, 1, 1));
        let d = DerivedParams::derive(&params(3, 1, 1, 1, 1, 0, 0, 0)).unwrap();
        assert_eq!((d.h, d.l, d.b, d.s), (2, 1, 2, 1));
    }

    #[test]
    fn derived_minimality_exhaustive() {
        for h in 1..=30usize {
            for l in 1..=30usize {
                // N' = H + L - 1 + T with T = 0, G = 1, K = L, E = 0
                let p = params(h + l - 1, l, 1, 1, 0, 0, 0, 0);
                let d = DerivedParams::derive(&p).unwrap();
                assert_eq!((d.h, d.l), (h, l));
                assert_eq!(d.b * l, h * d.s);
                let smallest = (1..=l).find(|&s| (h * s) % l == 0).unwrap();
                assert_eq!(d.s, smallest);
            }
        }
    }

    #[test]
    fn infeasible_rejected() {
        let mut p = example_params();
        p.n = p.min_servers() - 1;
        assert!(matches!(DerivedParams::derive(&p), Err(SchemeError::Infeasible(_))));
        assert!(matches!(rate(&p), Err(SchemeError::Infeasible(_))));
    }

    #[test]
    fn rate_special_cases() {
        // E = 0, G = 1
        let p = params(10, 3, 2, 1, 2, 0, 1, 1);
        assert_eq!(rate(&p).unwrap(), Ratio::new(10 - (3 + 2 + 1 + 2 - 1), 10));
        // K = 1, G = 1, P = A = 0
        let p = params(9, 1, 1, 1, 2, 3, 0, 0);
        assert_eq!(rate(&p).unwrap(), Ratio::new(9 - 5, 9) * Ratio::new(1, 4));
    }

    #[test]
    fn example_zeta_matrix() {
        let plan = QueryPlan::build(DerivedParams::derive(&example_params()).unwrap());
        let expect = [
            [Some(0), None, None, None],
            [Some(-4), Some(3), None, None],
            [None, Some(-1), None, None],
            [None, Some(-5), Some(2), None],
            [None, None, Some(-2), None],
            [None, None, Some(-6), Some(1)],
            [None, None, None, Some(-3)],
        ];
        for (s, row) in expect.iter().enumerate() {
            for (b, &e) in row.iter().enumerate() {
                assert_eq!(plan.zeta_exponent(s, b), e, "entry ({}, {})", s + 1, b + 1);
            }
        }
        assert_eq!(
            plan.render_zeta(),
            "   1    0    0    0\n\
             z^-4  z^3    0    0\n   \
             0 z^-1    0    0\n   \
             0 z^-5  z^2    0\n   \
             0    0 z^-2    0\n   \
             0    0 z^-6    z\n   \
             0    0    0 z^-3"
        );
        plan.verify_partition().unwrap();
        let idx = |b: usize, l: usize| CoeffIndex { b: b - 1, l };
        assert_eq!(plan.rounds[0].decoded, vec![idx(1, 0), idx(1, 1), idx(1, 2), idx(1, 3)]);
        assert_eq!(plan.rounds[1].decoded, vec![idx(1, 4), idx(1, 5), idx(1, 6), idx(2, 0)]);
        assert_eq!(
            plan.rounds[1].known,
            vec![(-4, idx(1, 0)), (-3, idx(1, 1)), (-2, idx(1, 2)), (-1, idx(1, 3))]
        );
        assert_eq!(plan.rounds[6].decoded, vec![idx(4, 3), idx(4, 4), idx(4, 5), idx(4, 6)]);
    }

    #[test]
    fn single_round_when_l_equals_h() {
        let d = DerivedParams { n_prime: 0, h: 5, l: 5, b: 1, s: 1 };
        let plan = QueryPlan::build(d);
        assert_eq!(plan.zeta_exponent(0, 0), Some(0));
        plan.verify_partition().unwrap();
    }

    #[test]
    fn partition_holds_for_all_small_pairs() {
        for h in 1..=25usize {
            for l in 1..=25usize {
                let d = h.gcd(&l);
                let plan = QueryPlan::build(DerivedParams { n_prime: 0, h, l, b: h / d, s: l / d });
                plan.verify_partition().unwrap_or_else(|e| panic!("H={h} L={l}: {e}"));
                // every zeta term ends below z^{H + L - 1}
                for s in 0..plan.rounds() {
                    for b in 0..plan.derived.b {
                        if let Some(e) = plan.zeta_exponent(s, b) {
                            assert!(e + l as i64 - 1 <= (h + l - 2) as i64 || e + (l as i64) - 1 < h as i64 + l as i64 - 1);
                            assert!(e < h as i64, "H={h} L={l}: zeta exponent {e} >= H");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        let f23 = Field::new(23).unwrap();
        let p = example_params();
        let (alphas, betas) = default_points(&p, f23).unwrap();
        assert!(SchemeConfig::new(p, f23, alphas.clone(), betas.clone()).is_ok());
        let mut bad = alphas.clone();
        bad[0] = f23.zero();
        assert!(SchemeConfig::new(p, f23, bad, betas.clone()).is_err());
        let mut clash = betas.clone();
        clash[3] = alphas[5];
        assert!(SchemeConfig::new(p, f23, alphas.clone(), clash).is_err());
        let f17 = Field::new(17).unwrap();
        assert!(SchemeConfig::with_default_points(p, f17).is_err());
    }

    #[test]
    fn encode_constant_when_single_vector() {
        let f11 = Field::new(11).unwrap();
        let cfg = SchemeConfig::with_default_points(params(3, 1, 2, 1, 1, 0, 0, 0), f11).unwrap();
        let x = vec![vec![f11.elem(4), f11.elem(9)]];
        let store = encode_data(&cfg, &x, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(store.y.iter().all(|y| *y == x[0]));
    }

    #[test]
    fn encode_example_degree_and_recovery() {
        let f23 = Field::new(23).unwrap();
        let cfg = SchemeConfig::with_default_points(example_params(), f23).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<Vec<Fe>> = (0..2).map(|_| f23.sample_vec(4, &mut rng)).collect();
        let store = encode_data(&cfg, &x, &mut rng).unwrap();
        assert!(store.u_x.degree().unwrap() <= 3);
        // any K + E = 4 servers determine u_X
        let pick = [2usize, 5, 9, 13];
        let nodes: Vec<Fe> = pick.iter().map(|&n| cfg.alphas[n]).collect();
        let vals: Vec<Vec<Fe>> = pick.iter().map(|&n| store.y[n].clone()).collect();
        let u = PolyVector::interpolate(f23, 4, &nodes, &vals).unwrap();
        assert_eq!(u, store.u_x);
        for k in 0..2 {
            assert_eq!(u.eval(cfg.betas[k]), x[k]);
        }
    }

    #[test]
    fn queries_without_masking() {
        let f7 = Field::new(7).unwrap();
        let cfg = SchemeConfig::with_default_points(params(2, 1, 1, 1, 0, 0, 0, 0), f7).unwrap();
        let plan = QueryPlan::build(cfg.derived());
        assert_eq!(plan.derived.b, 2);
        let phis = vec![
            MultiPoly::parse(f7, 1, 1, "3*X1 + 2").unwrap(),
            MultiPoly::parse(f7, 1, 1, "X1").unwrap(),
        ];
        let qs = make_queries(&plan, &cfg, &phis, 1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        // zeta^(1) = (1, z): rho_n = phi_1 + alpha_n phi_2
        for (n, q) in qs.iter().enumerate() {
            let alpha = cfg.alphas[n];
            let expect = MultiPoly::linear_combine(&[f7.one(), alpha], &[&phis[0], &phis[1]]).unwrap();
            assert_eq!(q, &expect);
        }
    }

    #[test]
    fn masked_zero_query_is_proportional_to_alpha_power() {
        let f11 = Field::new(11).unwrap();
        let cfg = SchemeConfig::with_default_points(params(2, 1, 1, 1, 1, 0, 0, 0), f11).unwrap();
        let plan = QueryPlan::build(cfg.derived());
        let zero = vec![MultiPoly::zero(f11, 1, 1)];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let masks = sample_masks(&cfg, &mut rng);
        let qs = queries_with_masks(&plan, &cfg, &zero, 1, &masks).unwrap();
        for (n, q) in qs.iter().enumerate() {
            assert_eq!(q, &masks[0].scale(cfg.alphas[n].pow(plan.derived.h as u64)));
        }
    }

    #[test]
    fn single_server_query_marginal_is_uniform() {
        // q = 5, M = 1, G = 1, T = 1: enumerate every mask and check that each
        // server sees each element of P_G exactly once, for every phi
        let f5 = Field::new(5).unwrap();
        let cfg = SchemeConfig::with_default_points(params(2, 1, 1, 1, 1, 0, 0, 0), f5).unwrap();
        let plan = QueryPlan::build(cfg.derived());
        let all: Vec<MultiPoly> = (0..25)
            .map(|i| MultiPoly::from_coeff_vector(f5, 1, 1, &[f5.elem(i % 5), f5.elem(i / 5)]).unwrap())
            .collect();
        for phi in &all {
            for n in 0..2 {
                let mut counts: BTreeMap<String, usize> = BTreeMap::new();
                for psi in &all {
                    let q = queries_with_masks(&plan, &cfg, std::slice::from_ref(phi), 1, std::slice::from_ref(psi)).unwrap();
                    *counts.entry(q[n].to_string()).or_default() += 1;
                }
                assert_eq!(counts.len(), 25);
                assert!(counts.values().all(|&c| c == 1));
            }
        }
    }

    fn honest_responses(_cfg: &SchemeConfig, store: &EncodedStore, queries: &[MultiPoly]) -> Vec<Fe> {
        queries.iter().zip(&store.y).map(|(q, y)| q.eval(y).unwrap()).collect()
    }

    #[test]
    fn response_polynomial_matches_and_fits_code() {
        let f23 = Field::new(23).unwrap();
        let cfg = SchemeConfig::with_default_points(example_params(), f23).unwrap();
        let plan = QueryPlan::build(cfg.derived());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<Vec<Fe>> = (0..2).map(|_| f23.sample_vec(4, &mut rng)).collect();
        let store = encode_data(&cfg, &x, &mut rng).unwrap();
        let phis: Vec<MultiPoly> = (0..4).map(|_| MultiPoly::sample_uniform(f23, 4, 2, &mut rng)).collect();
        for s in 1..=plan.rounds() {
            let masks = sample_masks(&cfg, &mut rng);
            let qs = queries_with_masks(&plan, &cfg, &phis, s, &masks).unwrap();
            let r = response_polynomial(&plan, &cfg, &phis, &masks, &store.u_x, s).unwrap();
            assert_eq!(honest_responses(&cfg, &store, &qs), r.eval_many(&cfg.alphas).unwrap());
            // dropping the negative powers leaves degree <= N' - 1
            let nonneg: Vec<Fe> = (0..=r.high_exponent().unwrap()).map(|e| r.coeff(e)).collect();
            let tail = UniPoly::from_coeffs(f23, nonneg);
            assert!(tail.degree().unwrap() < plan.derived.n_prime, "round {s}");
            for &(e, _) in &plan.rounds[s - 1].known {
                assert!(e < 0);
            }
        }
    }

    #[test]
    fn clean_single_round_equals_compose() {
        let f13 = Field::new(13).unwrap();
        // K = 2, G = 1, T = 0: L = 2, N' = N = 3, H = 2, B = S = 1
        let cfg = SchemeConfig::with_default_points(params(3, 2, 2, 1, 0, 0, 0, 0), f13).unwrap();
        let plan = QueryPlan::build(cfg.derived());
        assert_eq!((plan.derived.b, plan.derived.s), (1, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<Vec<Fe>> = (0..2).map(|_| f13.sample_vec(2, &mut rng)).collect();
        let store = encode_data(&cfg, &x, &mut rng).unwrap();
        let phi = MultiPoly::sample_uniform(f13, 2, 1, &mut rng);
        let qs = make_queries(&plan, &cfg, std::slice::from_ref(&phi), 1, &mut rng).unwrap();
        let word = ReceivedWord::from_values(&honest_responses(&cfg, &store, &qs));
        let st = decode_round(&plan, &cfg, &RoundState::new(), &word).unwrap();
        let gamma = phi.compose(&store.u_x).unwrap();
        for l in 0..2 {
            assert_eq!(st.known[&CoeffIndex { b: 0, l }], gamma.coeff(l));
        }
        let out = reconstruct(&st, &cfg, 1).unwrap();
        for k in 0..2 {
            assert_eq!(out[0][k], phi.eval(&x[k]).unwrap());
        }
    }

    #[test]
    fn example_rounds_one_and_two_decode_expected_coefficients() {
        let f23 = Field::new(23).unwrap();
        let cfg = SchemeConfig::with_default_points(example_params(), f23).unwrap();
        let plan = QueryPlan::build(cfg.derived());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<Vec<Fe>> = (0..2).map(|_| f23.sample_vec(4, &mut rng)).collect();
        let store = encode_data(&cfg, &x, &mut rng).unwrap();
        let phis: Vec<MultiPoly> = (0..4).map(|_| MultiPoly::sample_uniform(f23, 4, 2, &mut rng)).collect();
        let gammas: Vec<UniPoly> = phis.iter().map(|p| p.compose(&store.u_x).unwrap()).collect();
        let mut st = RoundState::new();
        for s in 1..=2 {
            let qs = make_queries(&plan, &cfg, &phis, s, &mut rng).unwrap();
            let mut word = ReceivedWord::from_values(&honest_responses(&cfg, &store, &qs));
            word.0[3] = Symbol::Erased;
            word.0[8] = word.0[8].map(|v| v + f23.one());
            st = decode_round(&plan, &cfg, &st, &word).unwrap();
        }
        let want = [(1, 0), (1, 1), (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 0)];
        assert_eq!(st.known.len(), 8);
        for (b, l) in want {
            assert_eq!(st.known[&CoeffIndex { b: b - 1, l }], gammas[b - 1].coeff(l));
        }
    }

    #[test]
    fn decode_round_needs_previous_coefficients() {
        let f23 = Field::new(23).unwrap();
        let cfg = SchemeConfig::with_default_points(example_params(), f23).unwrap();
        let plan = QueryPlan::build(cfg.derived());
        let st = RoundState { completed_rounds: 1, known: BTreeMap::new() };
        let word = ReceivedWord::from_values(&vec![f23.zero(); 14]);
        assert_eq!(
            decode_round(&plan, &cfg, &st, &word),
            Err(SchemeError::MissingCoefficient { b: 1, l: 0 })
        );
        assert!(matches!(reconstruct(&RoundState::new(), &cfg, 4), Err(SchemeError::MissingCoefficient { .. })));
    }

    #[test]
    fn pir_projection_with_zero_data() {
        let f11 = Field::new(11).unwrap();
        let cfg = SchemeConfig::with_default_points(params(4, 2, 3, 1, 1, 0, 0, 0), f11).unwrap();
        let plan = QueryPlan::build(cfg.derived());
        let x = vec![vec![f11.zero(); 3]; 2];
        let store = encode_data(&cfg, &x, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let phis: Vec<MultiPoly> =
            (0..plan.derived.b).map(|b| MultiPoly::parse(f11, 3, 1, &format!("X{} + 5", b % 3 + 1)).unwrap()).collect();
        let mut st = RoundState::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in 1..=plan.rounds() {
            let qs = make_queries(&plan, &cfg, &phis, s, &mut rng).unwrap();
            st = decode_round(&plan, &cfg, &st, &ReceivedWord::from_values(&honest_responses(&cfg, &store, &qs))).unwrap();
        }
        let out = reconstruct(&st, &cfg, plan.derived.b).unwrap();
        assert!(out.iter().flatten().all(|v| v.value() == 5));
    }
}
