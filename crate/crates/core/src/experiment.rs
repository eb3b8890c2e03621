//! End-to-end runs of either scheme through the simulated servers, the
//! experiment configuration they are driven by, and the result record.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Fe, Field, FieldError};
use crate::general::{
    decode_round, encode_data, queries_with_masks, rate, reconstruct, sample_masks, QueryPlan, RoundState,
    SchemeConfig, SchemeError, SchemeParams,
};
use crate::mvpoly::{MultiPoly, MvPolyError};
use crate::par::Execution;
use crate::simnet::{honest_answers, round_trip, CollusionTap, Corruption, FaultPlan, RoundFaults, Seeds, SimError, Stream};
use crate::systematic::{
    build_schedule, decode_sys_round, sample_codewords, sys_encode, sys_queries_with_codewords, sys_rate,
    sys_reconstruct, SysConfig, SysParams,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("decoding failed: {0}")]
    Decode(SchemeError),
}

impl From<SchemeError> for ExperimentError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::Config(m) | SchemeError::Infeasible(m) => ExperimentError::Invalid(m),
            e if e.is_decode_failure() => ExperimentError::Decode(e),
            e => ExperimentError::Invalid(e.to_string()),
        }
    }
}

impl From<SimError> for ExperimentError {
    fn from(e: SimError) -> Self {
        ExperimentError::Invalid(e.to_string())
    }
}

impl From<MvPolyError> for ExperimentError {
    fn from(e: MvPolyError) -> Self {
        ExperimentError::Invalid(e.to_string())
    }
}

impl From<FieldError> for ExperimentError {
    fn from(e: FieldError) -> Self {
        ExperimentError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    #[default]
    General,
    Systematic,
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SchemeKind::General => "general",
            SchemeKind::Systematic => "systematic",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// no faults
    #[default]
    None,
    /// `P` stragglers and `A` Byzantine servers at random positions each round
    Random,
    /// positions listed in `rounds`
    Explicit,
}

/// Faulty servers of one round, 1-based as written in a config file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundFaultSpec {
    #[serde(default)]
    pub stragglers: Vec<usize>,
    #[serde(default)]
    pub byzantine: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    #[serde(default)]
    pub placement: Placement,
    #[serde(default = "default_strategy")]
    pub strategy: Corruption,
    #[serde(default)]
    pub rounds: Vec<RoundFaultSpec>,
    /// accept explicit rounds beyond the `P`/`A` budget, to watch decoding
    /// fail
    #[serde(default)]
    pub over_budget: bool,
}

fn default_strategy() -> Corruption {
    Corruption::RandomValue
}

impl Default for FaultSpec {
    fn default() -> Self {
        FaultSpec { placement: Placement::None, strategy: default_strategy(), rounds: Vec::new(), over_budget: false }
    }
}

/// A complete experiment description, read from TOML by the command-line
/// tool. Points, data and functions are drawn from the seeded streams when
/// omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub scheme: SchemeKind,
    pub q: u64,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub g: usize,
    pub t: usize,
    #[serde(default)]
    pub e: usize,
    #[serde(default)]
    pub p: usize,
    #[serde(default)]
    pub a: usize,
    #[serde(default)]
    pub alphas: Option<Vec<u64>>,
    #[serde(default)]
    pub betas: Option<Vec<u64>>,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub faults: FaultSpec,
    /// one polynomial per function, e.g. `"3*X1^2 + X2"`
    #[serde(default)]
    pub functions: Option<Vec<String>>,
    /// `K` rows of `M` values
    #[serde(default)]
    pub data: Option<Vec<Vec<u64>>>,
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn scheme_params(&self) -> SchemeParams {
        SchemeParams { n: self.n, k: self.k, m: self.m, g: self.g, t: self.t, e: self.e, p: self.p, a: self.a }
    }

    pub fn field(&self) -> Result<Field, ExperimentError> {
        Field::new(self.q).map_err(|_| ExperimentError::Invalid(format!("q = {} is not prime", self.q)))
    }

    fn points(&self, field: Field, v: &Option<Vec<u64>>) -> Result<Option<Vec<Fe>>, ExperimentError> {
        let Some(xs) = v else { return Ok(None) };
        xs.iter()
            .map(|&x| {
                if x < field.modulus() {
                    Ok(field.elem(x))
                } else {
                    Err(ExperimentError::Invalid(format!("point {x} is not below q = {}", field.modulus())))
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn general_config(&self) -> Result<SchemeConfig, ExperimentError> {
        let field = self.field()?;
        let params = self.scheme_params();
        let (da, db) = crate::general::default_points(&params, field)
            .or_else(|e| if self.alphas.is_some() && self.betas.is_some() { Ok((vec![], vec![])) } else { Err(e) })?;
        let alphas = self.points(field, &self.alphas)?.unwrap_or(da);
        let betas = self.points(field, &self.betas)?.unwrap_or(db);
        Ok(SchemeConfig::new(params, field, alphas, betas)?)
    }

    pub fn systematic_config(&self) -> Result<SysConfig, ExperimentError> {
        if self.e != 0 || self.p != 0 || self.a != 0 {
            return Err(ExperimentError::Invalid(format!(
                "the systematic scheme requires E = P = A = 0 (E = {}, P = {}, A = {})",
                self.e, self.p, self.a
            )));
        }
        if self.betas.is_some() {
            return Err(ExperimentError::Invalid("the systematic scheme takes no betas".into()));
        }
        let field = self.field()?;
        let params = SysParams::new(self.n, self.k, self.m, self.g, self.t)?;
        Ok(match self.points(field, &self.alphas)? {
            Some(alphas) => SysConfig::new(params, field, alphas)?,
            None => SysConfig::with_default_points(params, field)?,
        })
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ExperimentError::Invalid(format!(
                "schema_version = {} but this build reads version {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        let field = self.field()?;
        self.faults.strategy.check(field)?;
        let (rounds, functions) = match self.scheme {
            SchemeKind::General => {
                let d = self.general_config()?.derived();
                (d.s, d.b)
            }
            SchemeKind::Systematic => {
                let c = self.systematic_config()?;
                if self.faults.placement != Placement::None {
                    return Err(ExperimentError::Invalid("the systematic scheme runs without faults".into()));
                }
                (c.params.s(), c.params.b())
            }
        };
        self.fault_plan(rounds)?;
        self.data(field)?;
        self.functions(field, functions)?;
        Ok(())
    }

    pub fn fault_plan(&self, rounds: usize) -> Result<FaultPlan, ExperimentError> {
        let strategy = Arc::new(self.faults.strategy);
        match self.faults.placement {
            Placement::None => {
                if !self.faults.rounds.is_empty() {
                    return Err(ExperimentError::Invalid("fault rounds given but placement = \"none\"".into()));
                }
                Ok(FaultPlan { strategy, ..FaultPlan::none() })
            }
            Placement::Random => {
                Ok(FaultPlan::random(self.n, self.p, self.a, rounds, strategy, &mut self.seeds.rng(Stream::Faults))?)
            }
            Placement::Explicit => {
                if self.faults.rounds.len() > rounds {
                    return Err(ExperimentError::Invalid(format!(
                        "{} fault rounds listed but the scheme has {rounds} rounds",
                        self.faults.rounds.len()
                    )));
                }
                let to_set = |xs: &[usize]| -> Result<BTreeSet<usize>, ExperimentError> {
                    xs.iter()
                        .map(|&i| {
                            if i == 0 || i > self.n {
                                Err(ExperimentError::Invalid(format!("server {i} is not in 1..={}", self.n)))
                            } else {
                                Ok(i - 1)
                            }
                        })
                        .collect()
                };
                let per_round = self
                    .faults
                    .rounds
                    .iter()
                    .map(|r| Ok(RoundFaults { stragglers: to_set(&r.stragglers)?, byzantine: to_set(&r.byzantine)? }))
                    .collect::<Result<Vec<_>, ExperimentError>>()?;
                let (p, a) = if self.faults.over_budget {
                    let most = |f: fn(&RoundFaults) -> usize| per_round.iter().map(f).max().unwrap_or(0);
                    (most(|r| r.stragglers.len()).max(self.p), most(|r| r.byzantine.len()).max(self.a))
                } else {
                    (self.p, self.a)
                };
                Ok(FaultPlan::explicit(self.n, p, a, per_round, strategy)?)
            }
        }
    }

    pub fn data(&self, field: Field) -> Result<Vec<Vec<Fe>>, ExperimentError> {
        match &self.data {
            Some(rows) => {
                if rows.len() != self.k || rows.iter().any(|r| r.len() != self.m) {
                    return Err(ExperimentError::Invalid(format!("data must be {} rows of {} values", self.k, self.m)));
                }
                Ok(rows.iter().map(|r| r.iter().map(|&v| field.elem(v)).collect()).collect())
            }
            None => {
                let mut rng = self.seeds.rng(Stream::Data);
                Ok((0..self.k).map(|_| field.sample_vec(self.m, &mut rng)).collect())
            }
        }
    }

    pub fn functions(&self, field: Field, b: usize) -> Result<Vec<MultiPoly>, ExperimentError> {
        match &self.functions {
            Some(texts) => {
                if texts.len() != b {
                    return Err(ExperimentError::Invalid(format!(
                        "{} functions given but the scheme evaluates B = {b}",
                        texts.len()
                    )));
                }
                texts
                    .iter()
                    .map(|t| Ok(MultiPoly::parse(field, self.m, self.g as u32, t)?))
                    .collect()
            }
            None => {
                let mut rng = self.seeds.rng(Stream::Functions);
                Ok((0..b).map(|_| MultiPoly::sample_uniform(field, self.m, self.g as u32, &mut rng)).collect())
            }
        }
    }
}

/// What happened in one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// 1-based
    pub stragglers: Vec<usize>,
    /// 1-based
    pub byzantine: Vec<usize>,
    /// coefficients (general) or evaluations (systematic) recovered
    pub decoded: Vec<String>,
}

/// Outcome of a run: the recovered `phi_b(x_k)` next to a direct evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub scheme: SchemeKind,
    pub q: u64,
    pub params: SchemeParams,
    /// `(N', H, L, B, S)` for the general scheme, `(F, min{F,K}, B, S)` for
    /// the systematic one
    pub derived: Vec<(String, usize)>,
    pub rate: String,
    pub rate_decimal: f64,
    pub rounds: Vec<RoundRecord>,
    /// `evaluations[b][k]`
    pub evaluations: Vec<Vec<u64>>,
    pub expected: Vec<Vec<u64>>,
    pub correct: bool,
}

impl RunRecord {
    /// Plain-text summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let derived: Vec<String> = self.derived.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let p = &self.params;
        out += &format!(
            "scheme={} q={} N={} K={} M={} G={} T={} E={} P={} A={}\n",
            self.scheme, self.q, p.n, p.k, p.m, p.g, p.t, p.e, p.p, p.a
        );
        out += &format!("{}\nrate={} ({:.6})\n", derived.join(" "), self.rate, self.rate_decimal);
        for r in &self.rounds {
            out += &format!(
                "round {}: stragglers={:?} byzantine={:?} decoded=[{}]\n",
                r.round,
                r.stragglers,
                r.byzantine,
                r.decoded.join(", ")
            );
        }
        for (b, row) in self.evaluations.iter().enumerate() {
            out += &format!("phi_{}(x_k) = {:?}\n", b + 1, row);
        }
        out += if self.correct { "result: correct\n" } else { "result: MISMATCH\n" };
        out
    }
}

fn ratio_string(r: Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn values(m: &[Vec<Fe>]) -> Vec<Vec<u64>> {
    m.iter().map(|row| row.iter().map(|v| v.value()).collect()).collect()
}

fn direct(phis: &[MultiPoly], data: &[Vec<Fe>]) -> Result<Vec<Vec<Fe>>, ExperimentError> {
    phis.iter().map(|p| data.iter().map(|x| Ok(p.eval(x)?)).collect()).collect()
}

fn one_based(s: &BTreeSet<usize>) -> Vec<usize> {
    s.iter().map(|i| i + 1).collect()
}

/// A finished general-scheme run.
#[derive(Debug, Clone)]
pub struct GeneralRun {
    pub plan: QueryPlan,
    pub state: RoundState,
    pub evaluations: Vec<Vec<Fe>>,
    pub rounds: Vec<RoundRecord>,
}

/// Runs every round of the general scheme with fresh masks from the
/// `Masks` stream, padding from `Padding` and Byzantine values from
/// `Byzantine`.
pub fn run_general(
    config: &SchemeConfig,
    data: &[Vec<Fe>],
    phis: &[MultiPoly],
    faults: &FaultPlan,
    seeds: &Seeds,
    mut tap: Option<&mut CollusionTap>,
    exec: Execution,
) -> Result<GeneralRun, ExperimentError> {
    let plan = QueryPlan::build(config.derived());
    let store = encode_data(config, data, &mut seeds.rng(Stream::Padding))?;
    let mut mask_rng = seeds.rng(Stream::Masks);
    let mut byz_rng = seeds.rng(Stream::Byzantine);
    let mut state = RoundState::new();
    let mut rounds = Vec::new();
    for s in 1..=plan.rounds() {
        let masks = sample_masks(config, &mut mask_rng);
        let queries = queries_with_masks(&plan, config, phis, s, &masks)?;
        if let Some(t) = tap.as_deref_mut() {
            t.record(s, &queries);
        }
        let word = round_trip(&store.y, &queries, faults, s, &mut byz_rng, exec)?;
        state = decode_round(&plan, config, &state, &word)?;
        let f = faults.round(s);
        rounds.push(RoundRecord {
            round: s,
            stragglers: one_based(&f.stragglers),
            byzantine: one_based(&f.byzantine),
            decoded: plan.rounds[s - 1].decoded.iter().map(|c| c.to_string()).collect(),
        });
    }
    let evaluations = reconstruct(&state, config, plan.derived.b)?;
    Ok(GeneralRun { plan, state, evaluations, rounds })
}

/// A finished systematic-scheme run.
#[derive(Debug, Clone)]
pub struct SystematicRun {
    pub evaluations: Vec<Vec<Fe>>,
    pub rounds: Vec<RoundRecord>,
}

/// Runs every round of the systematic scheme with mask codewords from the
/// `Masks` stream. Rounds are independent and run with `exec`.
pub fn run_systematic(
    config: &SysConfig,
    data: &[Vec<Fe>],
    phis: &[MultiPoly],
    seeds: &Seeds,
    tap: Option<&mut CollusionTap>,
    exec: Execution,
) -> Result<SystematicRun, ExperimentError> {
    let schedule = build_schedule(&config.params);
    let store = sys_encode(config, data)?;
    let mut mask_rng = seeds.rng(Stream::Masks);
    let queries: Vec<Vec<MultiPoly>> = (1..=schedule.rounds())
        .map(|s| {
            let d = sample_codewords(config, &mut mask_rng);
            sys_queries_with_codewords(config, &schedule, phis, s, &d)
        })
        .collect::<Result<_, _>>()?;
    if let Some(t) = tap {
        for (i, q) in queries.iter().enumerate() {
            t.record(i + 1, q);
        }
    }
    let outputs = exec.try_map_range(schedule.rounds(), |i| -> Result<_, ExperimentError> {
        let resp = honest_answers(&store.y, &queries[i], Execution::Sequential)?;
        Ok(decode_sys_round(config, &schedule, i + 1, &resp)?)
    })?;
    let rounds = outputs
        .iter()
        .enumerate()
        .map(|(i, out)| RoundRecord {
            round: i + 1,
            stragglers: Vec::new(),
            byzantine: Vec::new(),
            decoded: out.keys().map(|(b, k)| format!("phi_{}(x_{})", b + 1, k + 1)).collect(),
        })
        .collect();
    let evaluations = sys_reconstruct(&schedule, config.params.k, &outputs)?;
    Ok(SystematicRun { evaluations, rounds })
}

/// Validates and runs a configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<RunRecord, ExperimentError> {
    cfg.validate()?;
    let field = cfg.field()?;
    let data = cfg.data(field)?;
    let (derived, rate_value, evaluations, phis, rounds) = match cfg.scheme {
        SchemeKind::General => {
            let config = cfg.general_config()?;
            let d = config.derived();
            let phis = cfg.functions(field, d.b)?;
            let faults = cfg.fault_plan(d.s)?;
            let run = run_general(&config, &data, &phis, &faults, &cfg.seeds, None, exec)?;
            let derived =
                vec![("N'".into(), d.n_prime), ("H".into(), d.h), ("L".into(), d.l), ("B".into(), d.b), ("S".into(), d.s)];
            (derived, rate(&config.params)?, run.evaluations, phis, run.rounds)
        }
        SchemeKind::Systematic => {
            let config = cfg.systematic_config()?;
            let p = config.params;
            let phis = cfg.functions(field, p.b())?;
            let run = run_systematic(&config, &data, &phis, &cfg.seeds, None, exec)?;
            let derived =
                vec![("F".into(), p.f()), ("min(F,K)".into(), p.per_round()), ("B".into(), p.b()), ("S".into(), p.s())];
            (derived, sys_rate(&p)?, run.evaluations, phis, run.rounds)
        }
    };
    let expected = direct(&phis, &data)?;
    Ok(RunRecord {
        schema_version: SCHEMA_VERSION,
        scheme: cfg.scheme,
        q: cfg.q,
        params: cfg.scheme_params(),
        derived,
        rate: ratio_string(rate_value),
        rate_decimal: *rate_value.numer() as f64 / *rate_value.denom() as f64,
        rounds,
        correct: evaluations == expected,
        evaluations: values(&evaluations),
        expected: values(&expected),
    })
}
