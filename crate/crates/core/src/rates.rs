//! Rate tables: exact rates of both schemes over a parameter sweep, and the
//! limiting rates as `N` grows with `K/N` and `T/N` fixed.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::general::{rate, DerivedParams, SchemeError, SchemeParams};
use crate::par::Execution;
use crate::systematic::{asymptotic_rates, sys_rate, SysParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepBounds {
    pub n_max: usize,
    pub k_max: usize,
    pub g_max: usize,
    pub t_max: usize,
    pub e_max: usize,
    pub p_max: usize,
    pub a_max: usize,
}

impl Default for SweepBounds {
    fn default() -> Self {
        SweepBounds { n_max: 30, k_max: 5, g_max: 3, t_max: 3, e_max: 2, p_max: 2, a_max: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    General,
    Systematic,
    Tie,
    /// the systematic scheme does not apply (`E`, `P` or `A` nonzero)
    GeneralOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateRow {
    pub params: SchemeParams,
    /// closed form
    pub general: Ratio<u64>,
    /// `KB/(NS)` from the derived `B` and `S`
    pub general_kb_ns: Ratio<u64>,
    pub systematic: Option<Ratio<u64>>,
    pub winner: Winner,
}

fn decimal(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn frac(r: Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl RateRow {
    pub fn for_params(params: SchemeParams) -> Result<Self, SchemeError> {
        let general = rate(&params)?;
        let general_kb_ns = DerivedParams::derive(&params)?.rate(&params);
        let systematic = if params.e == 0 && params.p == 0 && params.a == 0 {
            Some(sys_rate(&SysParams::new(params.n, params.k, params.m, params.g, params.t)?)?)
        } else {
            None
        };
        let winner = match systematic {
            None => Winner::GeneralOnly,
            Some(s) if s > general => Winner::Systematic,
            Some(s) if s < general => Winner::General,
            Some(_) => Winner::Tie,
        };
        Ok(RateRow { params, general, general_kb_ns, systematic, winner })
    }

    pub const CSV_HEADER: &'static str =
        "n,k,g,t,e,p,a,general,general_decimal,systematic,systematic_decimal,winner";

    pub fn csv(&self) -> String {
        let p = &self.params;
        let (sys, sys_dec) = match self.systematic {
            Some(s) => (frac(s), format!("{:.12}", decimal(s))),
            None => (String::new(), String::new()),
        };
        let winner = match self.winner {
            Winner::General => "general",
            Winner::Systematic => "systematic",
            Winner::Tie => "tie",
            Winner::GeneralOnly => "general_only",
        };
        format!(
            "{},{},{},{},{},{},{},{},{:.12},{},{},{}",
            p.n,
            p.k,
            p.g,
            p.t,
            p.e,
            p.p,
            p.a,
            frac(self.general),
            decimal(self.general),
            sys,
            sys_dec,
            winner
        )
    }
}

/// Every feasible parameter set within `bounds` (with `M = 1`), in
/// lexicographic order of `(K, G, T, E, P, A, N)`.
pub fn sweep(bounds: &SweepBounds, exec: Execution) -> Vec<RateRow> {
    let mut all = Vec::new();
    for k in 1..=bounds.k_max {
        for g in 1..=bounds.g_max {
            for t in 0..=bounds.t_max {
                for e in 0..=bounds.e_max {
                    for p in 0..=bounds.p_max {
                        for a in 0..=bounds.a_max {
                            let base = SchemeParams { n: 0, k, m: 1, g, t, e, p, a };
                            all.extend((base.min_servers()..=bounds.n_max).map(|n| SchemeParams { n, ..base }));
                        }
                    }
                }
            }
        }
    }
    exec.map(&all, |p| RateRow::for_params(*p).expect("swept parameters are feasible"))
}

/// `N` from which the general scheme is at least as good as the systematic
/// one, `2G(K-1) + T + 1`.
pub fn crossover_servers(k: usize, g: usize, t: usize) -> usize {
    2 * g * (k - 1) + t + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub alpha: f64,
    pub beta: f64,
    pub g: usize,
    pub general: f64,
    pub systematic: f64,
}

impl AsymptoticRow {
    pub const CSV_HEADER: &'static str = "alpha,beta,g,general,systematic";

    pub fn csv(&self) -> String {
        format!("{},{},{},{:.15},{:.15}", self.alpha, self.beta, self.g, self.general, self.systematic)
    }
}

pub fn asymptotic_table(g: usize, beta: f64, alphas: &[f64]) -> Result<Vec<AsymptoticRow>, SchemeError> {
    alphas
        .iter()
        .map(|&alpha| {
            let (general, systematic) = asymptotic_rates(alpha, beta, g)?;
            Ok(AsymptoticRow { alpha, beta, g, general, systematic })
        })
        .collect()
}

/// `alpha = step, 2 step, ...` while `alpha G + beta <= 1`.
pub fn alpha_grid(g: usize, beta: f64, step: f64) -> Vec<f64> {
    (1..)
        .map(|i| (i as f64 * step * 1e12).round() / 1e12)
        .take_while(|a| a * g as f64 + beta <= 1.0 + 1e-12)
        .collect()
}
