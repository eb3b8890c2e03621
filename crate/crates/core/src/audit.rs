//! Exhaustive privacy audits on tiny instances.
//!
//! Every secret (all function tuples, or all data matrices) is paired with
//! every possible draw of the scheme's randomness. Draws are fed to the
//! production code paths through [`ReplayRng`], so the audit covers exactly
//! the randomness the implementation consumes. For each server subset the
//! observed transcripts are tabulated per secret; the scheme is private for
//! that subset iff all secrets induce the same distribution.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Fe, Field, ReplayRng};
use crate::general::{
    encode_with_padding, make_queries, queries_with_masks, sample_masks, QueryPlan, SchemeConfig, SchemeError,
};
use crate::mvpoly::{self, MultiPoly};
use crate::par::Execution;
use crate::rscode::GenMatrix;
use crate::simnet::CollusionTap;
use crate::systematic::{build_schedule, make_sys_queries, sys_queries_with_codewords, SysConfig};

/// Default bound on `secrets x draws`.
pub const DEFAULT_GUARD: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("enumeration needs {states} states ({secrets} secrets x {draws} draws), above the guard of {guard}")]
    GuardExceeded { states: u128, secrets: u128, draws: u128, guard: u128 },
    #[error("invalid audit: {0}")]
    Invalid(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// the tapped servers must learn nothing about the functions
    Function,
    /// the tapped servers' storage must reveal nothing about the data
    Data,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// all rounds' queries as one transcript
    Joint,
    /// each round on its own
    PerRound,
}

/// Deliberate breakage, to show the audit notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    None,
    /// the general scheme draws its masks once and reuses them every round
    PsiReuse,
    /// the first data point `beta_1` is moved onto `alpha_1`
    BetaCollision,
    /// the systematic retrieval code loses its first column, leaving server 1
    /// unmasked
    NonMdsRetrieval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditScheme {
    General(SchemeConfig),
    Systematic(SysConfig),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subsets {
    /// every subset of this size
    All(usize),
    /// these subsets (0-based server indices)
    Given(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditSpec {
    pub scheme: AuditScheme,
    pub target: Target,
    pub subsets: Subsets,
    pub mode: Mode,
    pub control: Control,
    pub guard: u128,
}

impl AuditSpec {
    /// All subsets of the privacy threshold (`T` or `E`), joint transcript,
    /// no control.
    pub fn new(scheme: AuditScheme, target: Target) -> Self {
        let size = match (&scheme, target) {
            (AuditScheme::General(c), Target::Function) => c.params.t,
            (AuditScheme::General(c), Target::Data) => c.params.e,
            (AuditScheme::Systematic(c), Target::Function) => c.params.t,
            (AuditScheme::Systematic(_), Target::Data) => 0,
        };
        AuditSpec { scheme, target, subsets: Subsets::All(size), mode: Mode::Joint, control: Control::None, guard: DEFAULT_GUARD }
    }

    fn n(&self) -> usize {
        match &self.scheme {
            AuditScheme::General(c) => c.params.n,
            AuditScheme::Systematic(c) => c.params.n,
        }
    }

    fn field(&self) -> Field {
        match &self.scheme {
            AuditScheme::General(c) => c.field,
            AuditScheme::Systematic(c) => c.field,
        }
    }

    fn subset_list(&self) -> Result<Vec<Vec<usize>>, AuditError> {
        let n = self.n();
        match &self.subsets {
            Subsets::All(size) => Ok(combinations(n, *size)),
            Subsets::Given(sets) => {
                for set in sets {
                    if set.iter().any(|&i| i >= n) || set.iter().collect::<BTreeSet<_>>().len() != set.len() {
                        return Err(AuditError::Invalid(format!("subset {set:?} is not a set of servers in 0..{n}")));
                    }
                }
                Ok(sets.clone())
            }
        }
    }
}

/// All `r`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..r).rev().find(|&i| cur[i] < n - r + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..r {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Verdict for one subset (and one round in per-round mode).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetVerdict {
    /// 1-based
    pub subset: Vec<usize>,
    /// 1-based; `None` for the joint transcript
    pub round: Option<usize>,
    /// every secret induces the same transcript distribution
    pub identical: bool,
    /// largest total-variation distance between two secrets' distributions
    pub max_tv: Ratio<u64>,
    /// every secret's distribution is uniform over all possible transcripts
    pub uniform: bool,
    /// distinct transcripts seen under the first secret
    pub support: usize,
}

impl SubsetVerdict {
    pub fn passed(&self) -> bool {
        self.identical
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub target: Target,
    pub mode: Mode,
    pub control: Control,
    pub secrets: u128,
    pub draws: u128,
    pub verdicts: Vec<SubsetVerdict>,
    pub warnings: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(SubsetVerdict::passed)
    }

    pub fn failing(&self) -> Vec<&SubsetVerdict> {
        self.verdicts.iter().filter(|v| !v.passed()).collect()
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "audit target={:?} mode={:?} control={:?} secrets={} draws={}",
            self.target, self.mode, self.control, self.secrets, self.draws
        )?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        for v in &self.verdicts {
            let round = v.round.map_or(String::from("all"), |r| r.to_string());
            writeln!(
                f,
                "subset={:?} round={} identical={} max_tv={} uniform={} support={} {}",
                v.subset,
                round,
                if v.identical { "yes" } else { "no" },
                v.max_tv,
                if v.uniform { "yes" } else { "no" },
                v.support,
                if v.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        write!(f, "verdict: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// `index` written in base `q` with `len` digits, least significant first.
fn digits(mut index: u128, q: u64, len: usize) -> Vec<u64> {
    (0..len)
        .map(|_| {
            let d = (index % q as u128) as u64;
            index /= q as u128;
            d
        })
        .collect()
}

fn checked_pow(q: u64, e: usize) -> Option<u128> {
    (q as u128).checked_pow(u32::try_from(e).ok()?)
}

/// Tabulated transcripts for one secret: one histogram per slot.
type Tables = Vec<HashMap<String, u64>>;

struct Plan {
    secrets: u128,
    draws: u128,
    /// symbols per transcript in a slot
    symbols: Vec<usize>,
    slots: Vec<(Vec<usize>, Option<usize>)>,
    warnings: Vec<String>,
}

fn slots(subsets: &[Vec<usize>], mode: Mode, rounds: usize) -> Vec<(Vec<usize>, Option<usize>)> {
    match mode {
        Mode::Joint => subsets.iter().map(|s| (s.clone(), None)).collect(),
        Mode::PerRound => {
            subsets.iter().flat_map(|s| (0..rounds).map(move |r| (s.clone(), Some(r)))).collect()
        }
    }
}

/// Runs the audit described by `spec`, parallelising over secrets.
pub fn audit(spec: &AuditSpec, exec: Execution) -> Result<AuditReport, AuditError> {
    match spec.target {
        Target::Function => audit_function_privacy(spec, exec),
        Target::Data => audit_data_privacy(spec, exec),
    }
}

fn finish(spec: &AuditSpec, plan: Plan, tables: Vec<Tables>) -> AuditReport {
    let q = spec.field().modulus();
    let verdicts = plan
        .slots
        .iter()
        .enumerate()
        .map(|(i, (subset, round))| {
            let dists: Vec<&HashMap<String, u64>> = tables.iter().map(|t| &t[i]).collect();
            let mut unique: Vec<&HashMap<String, u64>> = Vec::new();
            for d in &dists {
                if !unique.contains(d) {
                    unique.push(d);
                }
            }
            let mut max_tv = Ratio::from_integer(0u64);
            for (a, x) in unique.iter().enumerate() {
                for y in &unique[a + 1..] {
                    max_tv = max_tv.max(tv(x, y, plan.draws as u64));
                }
            }
            let outcomes = checked_pow(q, plan.symbols[i]);
            let uniform = unique.iter().all(|d| {
                Some(d.len() as u128) == outcomes && d.values().all(|&c| c as u128 * d.len() as u128 == plan.draws)
            });
            SubsetVerdict {
                subset: subset.iter().map(|s| s + 1).collect(),
                round: round.map(|r| r + 1),
                identical: unique.len() <= 1,
                max_tv,
                uniform,
                support: dists.first().map_or(0, |d| d.len()),
            }
        })
        .collect();
    AuditReport {
        target: spec.target,
        mode: spec.mode,
        control: spec.control,
        secrets: plan.secrets,
        draws: plan.draws,
        verdicts,
        warnings: plan.warnings,
    }
}

fn tv(x: &HashMap<String, u64>, y: &HashMap<String, u64>, total: u64) -> Ratio<u64> {
    let keys: BTreeSet<&String> = x.keys().chain(y.keys()).collect();
    let diff: u64 = keys
        .into_iter()
        .map(|k| {
            let (a, b) = (x.get(k).copied().unwrap_or(0), y.get(k).copied().unwrap_or(0));
            a.abs_diff(b)
        })
        .sum();
    Ratio::new(diff, 2 * total)
}

fn check_guard(spec: &AuditSpec, secrets: Option<u128>, draws: Option<u128>) -> Result<(u128, u128), AuditError> {
    let (secrets, draws) = match (secrets, draws) {
        (Some(s), Some(d)) => (s, d),
        _ => {
            return Err(AuditError::GuardExceeded { states: u128::MAX, secrets: secrets.unwrap_or(u128::MAX), draws: draws.unwrap_or(u128::MAX), guard: spec.guard })
        }
    };
    match secrets.checked_mul(draws) {
        Some(states) if states <= spec.guard => Ok((secrets, draws)),
        states => Err(AuditError::GuardExceeded { states: states.unwrap_or(u128::MAX), secrets, draws, guard: spec.guard }),
    }
}

/// Enumerates every function tuple against every mask draw and compares the
/// query transcripts seen by each subset.
pub fn audit_function_privacy(spec: &AuditSpec, exec: Execution) -> Result<AuditReport, AuditError> {
    let field = spec.field();
    let q = field.modulus();
    let subsets = spec.subset_list()?;
    let mut warnings = Vec::new();
    let (m, g, b, rounds, words) = match &spec.scheme {
        AuditScheme::General(c) => {
            let d = QueryPlan::build(c.derived()).derived;
            let dim = mvpoly::dimension(c.params.m, c.params.g as u32);
            let per_round = c.params.t * dim;
            let words = if spec.control == Control::PsiReuse { per_round } else { per_round * d.s };
            if c.params.t == 0 {
                warnings.push("T = 0: no function privacy is claimed".into());
            }
            (c.params.m, c.params.g, d.b, d.s, words)
        }
        AuditScheme::Systematic(c) => {
            let p = c.params;
            let dim = mvpoly::dimension(p.m, p.g as u32);
            if p.t == 0 {
                warnings.push("T = 0: no function privacy is claimed".into());
            }
            (p.m, p.g, p.b(), p.s(), dim * p.t * p.s())
        }
    };
    if spec.control == Control::PsiReuse && !matches!(spec.scheme, AuditScheme::General(_)) {
        return Err(AuditError::Invalid("mask reuse applies to the general scheme".into()));
    }
    if spec.control == Control::BetaCollision {
        return Err(AuditError::Invalid("the beta collision control applies to data privacy".into()));
    }
    if subsets.iter().any(Vec::is_empty) {
        warnings.push("empty subset: the transcript is empty and the audit is vacuous".into());
    }
    let dim = mvpoly::dimension(m, g as u32);
    let (secrets, draws) = check_guard(spec, checked_pow(q, dim * b), checked_pow(q, words))?;
    let slot_list = slots(&subsets, spec.mode, rounds);
    let symbols = slot_list
        .iter()
        .map(|(s, r)| s.len() * dim * if r.is_some() { 1 } else { rounds })
        .collect();

    let retrieval = match (&spec.scheme, spec.control) {
        (AuditScheme::Systematic(c), Control::NonMdsRetrieval) => {
            let mut gen = c.retrieval_code().canonical_generator();
            for row in &mut gen.rows {
                row[0] = field.zero();
            }
            Some(gen)
        }
        (AuditScheme::General(_), Control::NonMdsRetrieval) => {
            return Err(AuditError::Invalid("the retrieval-code control applies to the systematic scheme".into()))
        }
        _ => None,
    };

    let tables: Vec<Tables> = exec.try_map_range(secrets as usize, |si| -> Result<Tables, AuditError> {
        let coeffs: Vec<Fe> = digits(si as u128, q, dim * b).into_iter().map(|v| field.elem(v)).collect();
        let phis: Vec<MultiPoly> = coeffs
            .chunks(dim)
            .map(|c| MultiPoly::from_coeff_vector(field, m, g as u32, c))
            .collect::<Result<_, _>>()
            .map_err(SchemeError::from)?;
        let mut tables: Tables = vec![HashMap::new(); slot_list.len()];
        for di in 0..draws {
            let mut rng = ReplayRng::new(digits(di, q, words));
            let queries = function_round_queries(spec, &phis, rounds, retrieval.as_ref(), &mut rng)?;
            debug_assert_eq!(rng.consumed(), words);
            for (table, (subset, round)) in tables.iter_mut().zip(&slot_list) {
                let mut tap = CollusionTap::new(subset.iter().copied());
                match round {
                    Some(r) => tap.record(r + 1, &queries[*r]),
                    None => {
                        for (r, qs) in queries.iter().enumerate() {
                            tap.record(r + 1, qs);
                        }
                    }
                }
                *table.entry(tap.transcript()).or_default() += 1;
            }
        }
        Ok(tables)
    })?;
    Ok(finish(spec, Plan { secrets, draws, symbols, slots: slot_list, warnings }, tables))
}

fn function_round_queries(
    spec: &AuditSpec,
    phis: &[MultiPoly],
    rounds: usize,
    retrieval: Option<&GenMatrix>,
    rng: &mut ReplayRng,
) -> Result<Vec<Vec<MultiPoly>>, AuditError> {
    match &spec.scheme {
        AuditScheme::General(c) => {
            let plan = QueryPlan::build(c.derived());
            if spec.control == Control::PsiReuse {
                let masks = sample_masks(c, rng);
                (1..=rounds).map(|s| Ok(queries_with_masks(&plan, c, phis, s, &masks)?)).collect()
            } else {
                (1..=rounds).map(|s| Ok(make_queries(&plan, c, phis, s, rng)?)).collect()
            }
        }
        AuditScheme::Systematic(c) => {
            let schedule = build_schedule(&c.params);
            (1..=rounds)
                .map(|s| match retrieval {
                    Some(gen) => {
                        let dim = mvpoly::dimension(c.params.m, c.params.g as u32);
                        let d: Vec<Vec<Fe>> =
                            (0..dim).map(|_| gen.encode(&c.field.sample_vec(gen.rows.len(), rng))).collect();
                        Ok(sys_queries_with_codewords(c, &schedule, phis, s, &d)?)
                    }
                    None => Ok(make_sys_queries(c, &schedule, phis, s, rng)?),
                })
                .collect()
        }
    }
}

/// Enumerates every data matrix against every padding draw and compares the
/// stored values seen by each subset.
pub fn audit_data_privacy(spec: &AuditSpec, exec: Execution) -> Result<AuditReport, AuditError> {
    let field = spec.field();
    let q = field.modulus();
    let subsets = spec.subset_list()?;
    let mut warnings = Vec::new();
    let (k, m, e, alphas, betas) = match &spec.scheme {
        AuditScheme::General(c) => {
            let mut betas = c.betas.clone();
            if spec.control == Control::BetaCollision {
                betas[0] = c.alphas[0];
            }
            (c.params.k, c.params.m, c.params.e, c.alphas.clone(), betas)
        }
        AuditScheme::Systematic(c) => {
            (c.params.k, c.params.m, 0, c.alphas.clone(), c.alphas[..c.params.k].to_vec())
        }
    };
    if !matches!(spec.control, Control::None | Control::BetaCollision) {
        return Err(AuditError::Invalid(format!("{:?} applies to function privacy", spec.control)));
    }
    if e == 0 {
        warnings.push("E = 0: no data privacy is claimed; only empty subsets are private".into());
    }
    let (secrets, draws) = check_guard(spec, checked_pow(q, k * m), checked_pow(q, e * m))?;
    let slot_list = slots(&subsets, Mode::Joint, 1);
    let symbols = slot_list.iter().map(|(s, _)| s.len() * m).collect();
    let tables: Vec<Tables> = exec.try_map_range(secrets as usize, |si| -> Result<Tables, AuditError> {
        let flat: Vec<Fe> = digits(si as u128, q, k * m).into_iter().map(|v| field.elem(v)).collect();
        let data: Vec<Vec<Fe>> = flat.chunks(m).map(<[Fe]>::to_vec).collect();
        let mut tables: Tables = vec![HashMap::new(); slot_list.len()];
        for di in 0..draws {
            let mut rng = ReplayRng::new(digits(di, q, e * m));
            let padding: Vec<Vec<Fe>> = (0..e).map(|_| field.sample_vec(m, &mut rng)).collect();
            let store = encode_with_padding(field, &alphas, &betas, &data, &padding)?;
            for (table, (subset, _)) in tables.iter_mut().zip(&slot_list) {
                let key: String = subset
                    .iter()
                    .map(|&n| {
                        let ys: Vec<String> = store.y[n].iter().map(|v| v.to_string()).collect();
                        format!("server={} y=[{}]\n", n + 1, ys.join(","))
                    })
                    .collect();
                *table.entry(key).or_default() += 1;
            }
        }
        Ok(tables)
    })?;
    Ok(finish(spec, Plan { secrets, draws, symbols, slots: slot_list, warnings }, tables))
}
