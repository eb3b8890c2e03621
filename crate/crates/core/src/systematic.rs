//! The systematic scheme for `P = A = E = 0`.
//!
//! Data is stored with systematic Lagrange encoding (`beta_k = alpha_k`), so
//! server `k <= K` holds `x_k` itself. In round `s` every server receives a
//! query `psi_n` masked by random codewords of the retrieval code
//! `RS_T(alpha)`; servers in `I^(s,b)` additionally get `phi_b`. The masked
//! part of the responses is a codeword of `RS_{G(K-1)+T}(alpha)` and the
//! desired part is supported on the known set `I^(s)`, so it is recovered by
//! erasure decoding.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::field::{Fe, Field};
use crate::general::{encode_with_padding, EncodedStore, SchemeError};
use crate::mvpoly::{self, MultiPoly};
use crate::rscode::{ReceivedWord, RsCode, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SysParams {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub g: usize,
    pub t: usize,
}

impl SysParams {
    pub fn new(n: usize, k: usize, m: usize, g: usize, t: usize) -> Result<Self, SchemeError> {
        let p = SysParams { n, k, m, g, t };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<(), SchemeError> {
        if self.k == 0 || self.m == 0 || self.g == 0 {
            return Err(SchemeError::Config(format!(
                "K, M and G must be at least 1 (K = {}, M = {}, G = {})",
                self.k, self.m, self.g
            )));
        }
        if self.n < self.g * (self.k - 1) + self.t + 1 {
            return Err(SchemeError::Infeasible(format!(
                "N = {} but N > G(K-1) + T = {} is required",
                self.n,
                self.g * (self.k - 1) + self.t
            )));
        }
        Ok(())
    }

    /// `N - G(K-1) - T`: the number of erasures the response code absorbs.
    pub fn f(&self) -> usize {
        self.n - self.g * (self.k - 1) - self.t
    }

    /// Evaluations retrieved per round, `min{F, K}`.
    pub fn per_round(&self) -> usize {
        self.f().min(self.k)
    }

    /// Number of rounds `lcm(K, min{F,K}) / min{F,K}`.
    pub fn s(&self) -> usize {
        self.k.lcm(&self.per_round()) / self.per_round()
    }

    /// Number of functions `lcm(K, min{F,K}) / K`.
    pub fn b(&self) -> usize {
        self.k.lcm(&self.per_round()) / self.k
    }

    /// Dimension of the response code, `G(K-1) + T`.
    pub fn response_dim(&self) -> usize {
        self.g * (self.k - 1) + self.t
    }
}

/// `min{F, K} / N`
pub fn sys_rate(params: &SysParams) -> Result<Ratio<u64>, SchemeError> {
    params.check()?;
    Ok(Ratio::new(params.per_round() as u64, params.n as u64))
}

/// The sets `I^(s,b)`, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSchedule {
    k: usize,
    sets: Vec<Vec<Vec<usize>>>,
}

impl IndexSchedule {
    pub fn rounds(&self) -> usize {
        self.sets.len()
    }

    pub fn functions(&self) -> usize {
        self.sets.first().map_or(0, Vec::len)
    }

    /// `I^(s,b)` with 0-based `s`, `b` and elements.
    pub fn set(&self, s: usize, b: usize) -> &[usize] {
        &self.sets[s][b]
    }

    /// The function served at position `n` in round `s`, if any.
    pub fn owner(&self, s: usize, n: usize) -> Option<usize> {
        self.sets[s].iter().position(|set| set.contains(&n))
    }

    /// `I^(s)`
    pub fn union(&self, s: usize) -> Vec<usize> {
        let mut all: Vec<usize> = self.sets[s].iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    /// Checks per-round disjointness, `|I^(s)| = per_round` and that every
    /// `b` covers `[K]` exactly once across rounds.
    pub fn verify(&self, per_round: usize) -> Result<(), String> {
        for (s, row) in self.sets.iter().enumerate() {
            let mut seen = HashSet::new();
            for set in row {
                for &i in set {
                    if i >= self.k || !seen.insert(i) {
                        return Err(format!("round {}: index {} repeats or is out of range", s + 1, i + 1));
                    }
                }
            }
            if seen.len() != per_round {
                return Err(format!("round {}: |I^(s)| = {}, expected {per_round}", s + 1, seen.len()));
            }
        }
        for b in 0..self.functions() {
            let mut all: Vec<usize> = self.sets.iter().flat_map(|row| row[b].iter().copied()).collect();
            all.sort_unstable();
            if all != (0..self.k).collect::<Vec<_>>() {
                return Err(format!("function {} covers {:?}", b + 1, all));
            }
        }
        Ok(())
    }
}

impl fmt::Display for IndexSchedule {
    /// One line per round, e.g. `s=2: I(2,1)={5,6} I(2,2)={1,2}`, 1-based,
    /// empty sets omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, row) in self.sets.iter().enumerate() {
            write!(f, "s={}:", s + 1)?;
            for (b, set) in row.iter().enumerate().filter(|(_, set)| !set.is_empty()) {
                let items: Vec<String> = set.iter().map(|i| (i + 1).to_string()).collect();
                write!(f, " I({},{})={{{}}}", s + 1, b + 1, items.join(","))?;
            }
            if s + 1 < self.sets.len() {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Row filling: lay out `B` copies of `1..K` (one per function) in order and
/// hand each round the next `min{F,K}` of them.
pub fn build_schedule(params: &SysParams) -> IndexSchedule {
    let (k, per, b, s) = (params.k, params.per_round(), params.b(), params.s());
    let mut sets = vec![vec![Vec::new(); b]; s];
    for pos in 0..b * k {
        sets[pos / per][pos / k].push(pos % k);
    }
    IndexSchedule { k, sets }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SysConfig {
    pub params: SysParams,
    pub field: Field,
    /// `N` distinct points; the first `K` double as interpolation points
    pub alphas: Vec<Fe>,
}

impl SysConfig {
    pub fn new(params: SysParams, field: Field, alphas: Vec<Fe>) -> Result<Self, SchemeError> {
        params.check()?;
        if alphas.len() != params.n {
            return Err(SchemeError::Config(format!("{} alphas for N = {}", alphas.len(), params.n)));
        }
        if alphas.iter().any(|a| a.field() != field) {
            return Err(SchemeError::Config("points from a different field".into()));
        }
        if alphas.iter().collect::<HashSet<_>>().len() != alphas.len() {
            return Err(SchemeError::Config("alphas must be distinct".into()));
        }
        Ok(SysConfig { params, field, alphas })
    }

    /// `alpha_n = n` for `n = 1..=N`, or `n - 1` when `q = N`.
    pub fn with_default_points(params: SysParams, field: Field) -> Result<Self, SchemeError> {
        let q = field.modulus();
        if q < params.n as u64 {
            return Err(SchemeError::Config(format!("q = {q} but q >= N = {} is required", params.n)));
        }
        let start = if q == params.n as u64 { 0 } else { 1 };
        let alphas = (start..start + params.n as u64).map(|v| field.elem(v)).collect();
        Self::new(params, field, alphas)
    }

    pub fn response_code(&self) -> RsCode {
        RsCode::new(self.field, self.alphas.clone(), self.params.response_dim()).expect("validated at construction")
    }

    pub fn retrieval_code(&self) -> RsCode {
        RsCode::new(self.field, self.alphas.clone(), self.params.t).expect("validated at construction")
    }
}

/// Systematic Lagrange encoding: `u_X(alpha_k) = x_k` for `k <= K`.
pub fn sys_encode(config: &SysConfig, data: &[Vec<Fe>]) -> Result<EncodedStore, SchemeError> {
    let SysParams { k, m, .. } = config.params;
    if data.len() != k || data.iter().any(|x| x.len() != m) {
        return Err(SchemeError::Config(format!("data must be {k} vectors of length {m}")));
    }
    encode_with_padding(config.field, &config.alphas, &config.alphas[..k], data, &[])
}

/// `Q = dim P_{M,G}` random codewords of `RS_T(alpha)`, one per monomial.
pub fn sample_codewords<R: RngCore + ?Sized>(config: &SysConfig, rng: &mut R) -> Vec<Vec<Fe>> {
    let q = mvpoly::dimension(config.params.m, config.params.g as u32);
    let code = config.retrieval_code();
    (0..q).map(|_| code.random_codeword(rng)).collect()
}

/// Queries for round `s` (1-based) from the given mask codewords:
/// `psi_n = sum_j d^j(n) psi^j`, plus `phi_b` when `n` is in `I^(s,b)`.
pub fn sys_queries_with_codewords(
    config: &SysConfig,
    schedule: &IndexSchedule,
    phis: &[MultiPoly],
    s: usize,
    codewords: &[Vec<Fe>],
) -> Result<Vec<MultiPoly>, SchemeError> {
    let SysParams { n, m, g, .. } = config.params;
    if s == 0 || s > schedule.rounds() {
        return Err(SchemeError::RoundOutOfRange { round: s, rounds: schedule.rounds() });
    }
    if phis.len() != schedule.functions() {
        return Err(SchemeError::Config(format!("{} functions supplied, B = {}", phis.len(), schedule.functions())));
    }
    if phis.iter().any(|p| p.field() != config.field || p.arity() != m || p.degree_bound() as usize != g) {
        return Err(SchemeError::Config(format!("functions must lie in P_{{M={m}, G={g}}}")));
    }
    let q = mvpoly::dimension(m, g as u32);
    if codewords.len() != q || codewords.iter().any(|d| d.len() != n) {
        return Err(SchemeError::Config(format!("{q} mask codewords of length {n} are required")));
    }
    (0..n)
        .map(|pos| {
            let coeffs: Vec<Fe> = codewords.iter().map(|d| d[pos]).collect();
            let psi = MultiPoly::from_coeff_vector(config.field, m, g as u32, &coeffs)?;
            Ok(match schedule.owner(s - 1, pos) {
                Some(b) => psi.add(&phis[b])?,
                None => psi,
            })
        })
        .collect()
}

pub fn make_sys_queries<R: RngCore + ?Sized>(
    config: &SysConfig,
    schedule: &IndexSchedule,
    phis: &[MultiPoly],
    s: usize,
    rng: &mut R,
) -> Result<Vec<MultiPoly>, SchemeError> {
    let codewords = sample_codewords(config, rng);
    sys_queries_with_codewords(config, schedule, phis, s, &codewords)
}

/// Evaluations recovered in one round, keyed by 0-based `(b, k)`.
pub type SysRoundOutput = BTreeMap<(usize, usize), Fe>;

/// Erases the positions `I^(s)`, rebuilds the masking codeword of
/// `RS_{G(K-1)+T}(alpha)` from the rest, and reads
/// `phi_b(x_k) = rho_k - psi(alpha_k)` for every `k` in `I^(s,b)`.
pub fn decode_sys_round(
    config: &SysConfig,
    schedule: &IndexSchedule,
    s: usize,
    responses: &[Fe],
) -> Result<SysRoundOutput, SchemeError> {
    if s == 0 || s > schedule.rounds() {
        return Err(SchemeError::RoundOutOfRange { round: s, rounds: schedule.rounds() });
    }
    if responses.len() != config.params.n {
        return Err(SchemeError::Config(format!("{} responses for N = {}", responses.len(), config.params.n)));
    }
    let support = schedule.union(s - 1);
    let word = ReceivedWord(
        responses
            .iter()
            .enumerate()
            .map(|(pos, &v)| if support.contains(&pos) { Symbol::Erased } else { Symbol::Value(v) })
            .collect(),
    );
    let psi = config
        .response_code()
        .decode(&word, 0)
        .map_err(|source| SchemeError::Decode { round: s, source })?;
    let mut out = BTreeMap::new();
    for b in 0..schedule.functions() {
        for &k in schedule.set(s - 1, b) {
            out.insert((b, k), responses[k] - psi.eval(config.alphas[k]));
        }
    }
    Ok(out)
}

/// Collects the round outputs into `out[b][k]`.
pub fn sys_reconstruct(
    schedule: &IndexSchedule,
    k: usize,
    rounds: &[SysRoundOutput],
) -> Result<Vec<Vec<Fe>>, SchemeError> {
    let mut merged = BTreeMap::new();
    for r in rounds {
        merged.extend(r.iter().map(|(&key, &v)| (key, v)));
    }
    (0..schedule.functions())
        .map(|b| {
            (0..k)
                .map(|kk| merged.get(&(b, kk)).copied().ok_or(SchemeError::MissingCoefficient { b: b + 1, l: kk }))
                .collect()
        })
        .collect()
}

/// Limiting rates for `K = alpha N`, `T = beta N`, `N -> infinity`:
/// `((1-beta)/G - alpha, min{1 - alpha G - beta, alpha})` for the general
/// and systematic schemes.
pub fn asymptotic_rates(alpha: f64, beta: f64, g: usize) -> Result<(f64, f64), SchemeError> {
    let gf = g as f64;
    if g == 0 || alpha.is_nan() || alpha <= 0.0 || beta.is_nan() || beta < 0.0 || alpha * gf + beta > 1.0 {
        return Err(SchemeError::Infeasible(format!(
            "need alpha > 0, beta >= 0, G >= 1 and alpha G + beta <= 1 (alpha = {alpha}, beta = {beta}, G = {g})"
        )));
    }
    Ok(((1.0 - beta) / gf - alpha, (1.0 - alpha * gf - beta).min(alpha)))
}

/// The `alpha` solving `1 - alpha G - beta = alpha`, where the systematic
/// rate switches from `alpha` to `1 - alpha G - beta`.
pub fn systematic_kink(beta: f64, g: usize) -> f64 {
    (1.0 - beta) / (g as f64 + 1.0)
}

/// The `alpha` where both asymptotic rates coincide, `(1-beta)/(2G)`.
/// Below it the general scheme wins.
pub fn rate_crossover(beta: f64, g: usize) -> f64 {
    (1.0 - beta) / (2.0 * g as f64)
}
