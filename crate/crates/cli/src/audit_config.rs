//! The audit specification file.

use anyhow::{bail, Result};
use serde::Deserialize;

use lagrange_pc::audit::{AuditScheme, AuditSpec, Control, Mode, Subsets, Target, DEFAULT_GUARD};
use lagrange_pc::experiment::{ExperimentConfig, SchemeKind, SCHEMA_VERSION};
use lagrange_pc::simnet::Seeds;

/// Which server subsets to audit: a size (every subset of it) or explicit
/// 1-based subsets.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SubsetSpec {
    Size(usize),
    Lists(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub scheme: SchemeKind,
    pub q: u64,
    pub n: usize,
    pub k: usize,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default = "one")]
    pub g: usize,
    #[serde(default)]
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
    pub target: Target,
    #[serde(default = "joint")]
    pub mode: Mode,
    /// defaults to every subset of size `T` (function) or `E` (data)
    #[serde(default)]
    pub subsets: Option<SubsetSpec>,
    #[serde(default = "no_control")]
    pub control: Control,
    #[serde(default)]
    pub guard: Option<u128>,
}

fn one() -> usize {
    1
}

fn joint() -> Mode {
    Mode::Joint
}

fn no_control() -> Control {
    Control::None
}

impl AuditConfig {
    pub fn to_spec(&self) -> Result<AuditSpec> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("schema_version = {} but this build reads version {SCHEMA_VERSION}", self.schema_version);
        }
        let exp = ExperimentConfig {
            schema_version: self.schema_version,
            scheme: self.scheme,
            q: self.q,
            n: self.n,
            k: self.k,
            m: self.m,
            g: self.g,
            t: self.t,
            e: self.e,
            p: self.p,
            a: self.a,
            alphas: self.alphas.clone(),
            betas: self.betas.clone(),
            seeds: Seeds::default(),
            faults: Default::default(),
            functions: None,
            data: None,
            output: None,
        };
        let scheme = match self.scheme {
            SchemeKind::General => AuditScheme::General(exp.general_config()?),
            SchemeKind::Systematic => AuditScheme::Systematic(exp.systematic_config()?),
        };
        let mut spec = AuditSpec::new(scheme, self.target);
        spec.mode = self.mode;
        spec.control = self.control;
        spec.guard = self.guard.unwrap_or(DEFAULT_GUARD);
        match &self.subsets {
            None => {}
            Some(SubsetSpec::Size(s)) => spec.subsets = Subsets::All(*s),
            Some(SubsetSpec::Lists(lists)) => {
                let mut sets = Vec::new();
                for l in lists {
                    if l.iter().any(|&i| i == 0 || i > self.n) {
                        bail!("subset {l:?} must list servers in 1..={}", self.n);
                    }
                    sets.push(l.iter().map(|i| i - 1).collect());
                }
                spec.subsets = Subsets::Given(sets);
            }
        }
        Ok(spec)
    }
}
