//! In-process simulation of the storage servers: honest evaluation,
//! stragglers, Byzantine corruption, collusion taps and seeded randomness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Fe, Field};
use crate::mvpoly::{MultiPoly, MvPolyError};
use crate::par::Execution;
use crate::rscode::{ReceivedWord, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("round {round}: {stragglers} stragglers and {byzantine} Byzantine servers exceed the budget P = {p}, A = {a}")]
    FaultBudget { round: usize, stragglers: usize, byzantine: usize, p: usize, a: usize },
    #[error("round {round}: server {server} is both straggler and Byzantine")]
    Overlap { round: usize, server: usize },
    #[error("server index {server} out of range for N = {n}")]
    ServerOutOfRange { server: usize, n: usize },
    #[error("{queries} queries for {servers} servers")]
    QueryCount { queries: usize, servers: usize },
    #[error("additive offset must be nonzero mod {0}")]
    ZeroOffset(u64),
    #[error(transparent)]
    Eval(#[from] MvPolyError),
}

/// One storage server.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerNode {
    pub index: usize,
    pub y: Vec<Fe>,
}

impl ServerNode {
    pub fn answer(&self, query: &MultiPoly) -> Result<Fe, MvPolyError> {
        query.eval(&self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Behavior {
    Honest,
    Straggler,
    Byzantine,
}

/// Produces the value a Byzantine server sends instead of `honest`.
///
/// Returning `honest` itself is allowed; [`round_trip`] then sends
/// `honest + 1`, so every Byzantine answer is a real error.
pub trait ByzantineStrategy: fmt::Debug + Send + Sync {
    fn corrupt(&self, honest: Fe, server: usize, round: usize, rng: &mut dyn RngCore) -> Fe;
}

/// The built-in strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Corruption {
    /// uniform over the `q - 1` wrong values
    RandomValue,
    /// always this value
    FixedValue(u64),
    /// honest value plus a nonzero constant
    AdditiveOffset(u64),
}

impl Corruption {
    pub fn check(&self, field: Field) -> Result<(), SimError> {
        match self {
            Corruption::AdditiveOffset(d) if field.elem(*d).is_zero() => Err(SimError::ZeroOffset(field.modulus())),
            _ => Ok(()),
        }
    }
}

impl ByzantineStrategy for Corruption {
    fn corrupt(&self, honest: Fe, _server: usize, _round: usize, rng: &mut dyn RngCore) -> Fe {
        let field = honest.field();
        match *self {
            Corruption::RandomValue => honest + field.sample_nonzero(rng),
            Corruption::FixedValue(v) => field.elem(v),
            Corruption::AdditiveOffset(d) => honest + field.elem(d),
        }
    }
}

impl fmt::Display for Corruption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Corruption::RandomValue => write!(f, "random"),
            Corruption::FixedValue(v) => write!(f, "fixed({v})"),
            Corruption::AdditiveOffset(d) => write!(f, "offset({d})"),
        }
    }
}

/// Faulty servers in one round (0-based indices).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundFaults {
    pub stragglers: BTreeSet<usize>,
    pub byzantine: BTreeSet<usize>,
}

impl RoundFaults {
    pub fn behavior(&self, server: usize) -> Behavior {
        if self.stragglers.contains(&server) {
            Behavior::Straggler
        } else if self.byzantine.contains(&server) {
            Behavior::Byzantine
        } else {
            Behavior::Honest
        }
    }
}

/// Per-round straggler and Byzantine sets plus the corruption strategy.
/// Rounds past the end of `rounds` are fault-free.
#[derive(Debug, Clone)]
pub struct FaultPlan {
    pub p: usize,
    pub a: usize,
    pub rounds: Vec<RoundFaults>,
    pub strategy: Arc<dyn ByzantineStrategy>,
}

impl FaultPlan {
    pub fn none() -> Self {
        FaultPlan { p: 0, a: 0, rounds: Vec::new(), strategy: Arc::new(Corruption::RandomValue) }
    }

    /// Uses the full budget every round: `p` stragglers and `a` Byzantine
    /// servers at uniformly random distinct positions.
    pub fn random<R: RngCore + ?Sized>(
        n: usize,
        p: usize,
        a: usize,
        rounds: usize,
        strategy: Arc<dyn ByzantineStrategy>,
        rng: &mut R,
    ) -> Result<Self, SimError> {
        if p + a > n {
            return Err(SimError::FaultBudget { round: 1, stragglers: p, byzantine: a, p, a });
        }
        let rounds = (0..rounds)
            .map(|_| {
                let picks = sample(rng, n, p + a).into_vec();
                RoundFaults {
                    stragglers: picks[..p].iter().copied().collect(),
                    byzantine: picks[p..].iter().copied().collect(),
                }
            })
            .collect();
        Ok(FaultPlan { p, a, rounds, strategy })
    }

    pub fn explicit(
        n: usize,
        p: usize,
        a: usize,
        rounds: Vec<RoundFaults>,
        strategy: Arc<dyn ByzantineStrategy>,
    ) -> Result<Self, SimError> {
        let plan = FaultPlan { p, a, rounds, strategy };
        plan.validate(n)?;
        Ok(plan)
    }

    pub fn validate(&self, n: usize) -> Result<(), SimError> {
        for (i, r) in self.rounds.iter().enumerate() {
            let round = i + 1;
            if r.stragglers.len() > self.p || r.byzantine.len() > self.a {
                return Err(SimError::FaultBudget {
                    round,
                    stragglers: r.stragglers.len(),
                    byzantine: r.byzantine.len(),
                    p: self.p,
                    a: self.a,
                });
            }
            if let Some(&server) = r.stragglers.intersection(&r.byzantine).next() {
                return Err(SimError::Overlap { round, server });
            }
            if let Some(&server) = r.stragglers.iter().chain(&r.byzantine).find(|&&s| s >= n) {
                return Err(SimError::ServerOutOfRange { server, n });
            }
        }
        Ok(())
    }

    /// Faults for round `s` (1-based).
    pub fn round(&self, s: usize) -> RoundFaults {
        self.rounds.get(s - 1).cloned().unwrap_or_default()
    }
}

/// Honest answers of every server, evaluated with `exec`.
pub fn honest_answers(
    stored: &[Vec<Fe>],
    queries: &[MultiPoly],
    exec: Execution,
) -> Result<Vec<Fe>, SimError> {
    if stored.len() != queries.len() {
        return Err(SimError::QueryCount { queries: queries.len(), servers: stored.len() });
    }
    let pairs: Vec<(&MultiPoly, &Vec<Fe>)> = queries.iter().zip(stored).collect();
    Ok(exec.try_map(&pairs, |(q, y)| q.eval(y))?)
}

/// Sends round `s` (1-based) of `queries` to the servers holding `stored`
/// and collects the answers after applying the fault plan. Byzantine values
/// are drawn from `rng` in increasing server order.
pub fn round_trip<R: RngCore>(
    stored: &[Vec<Fe>],
    queries: &[MultiPoly],
    faults: &FaultPlan,
    s: usize,
    rng: &mut R,
    exec: Execution,
) -> Result<ReceivedWord, SimError> {
    faults.validate(stored.len())?;
    let honest = honest_answers(stored, queries, exec)?;
    let round = faults.round(s);
    let symbols = honest
        .into_iter()
        .enumerate()
        .map(|(n, v)| match round.behavior(n) {
            Behavior::Honest => Symbol::Value(v),
            Behavior::Straggler => Symbol::Erased,
            Behavior::Byzantine => {
                let bad = faults.strategy.corrupt(v, n, s, rng);
                Symbol::Value(if bad == v { v + v.field().one() } else { bad })
            }
        })
        .collect();
    Ok(ReceivedWord(symbols))
}

/// Records every query delivered to a subset of servers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollusionTap {
    subset: BTreeSet<usize>,
    log: BTreeMap<(usize, usize), String>,
}

impl CollusionTap {
    pub fn new(subset: impl IntoIterator<Item = usize>) -> Self {
        CollusionTap { subset: subset.into_iter().collect(), log: BTreeMap::new() }
    }

    pub fn subset(&self) -> &BTreeSet<usize> {
        &self.subset
    }

    /// Logs round `s` (1-based) of `queries`.
    pub fn record(&mut self, s: usize, queries: &[MultiPoly]) {
        for &n in &self.subset {
            if let Some(q) = queries.get(n) {
                self.log.insert((s, n), q.to_string());
            }
        }
    }

    /// One line `round=<s> server=<n> query=<poly>` per delivered query,
    /// ordered by round and then server (both 1-based).
    pub fn transcript(&self) -> String {
        self.log
            .iter()
            .map(|((s, n), q)| format!("round={s} server={} query={q}\n", n + 1))
            .collect()
    }
}

/// The independent random streams of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stream {
    /// the data matrix `X`
    Data,
    /// the evaluated functions `phi_b`
    Functions,
    /// the `E` padding vectors
    Padding,
    /// query masks
    Masks,
    /// straggler and Byzantine positions
    Faults,
    /// values sent by Byzantine servers
    Byzantine,
}

impl Stream {
    pub const ALL: [Stream; 6] =
        [Stream::Data, Stream::Functions, Stream::Padding, Stream::Masks, Stream::Faults, Stream::Byzantine];

    fn id(self) -> u64 {
        self as u64
    }
}

/// Seeds for all streams: one master seed, with optional per-stream
/// overrides so a single stream can be varied while the rest stay fixed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    #[serde(default)]
    pub overrides: BTreeMap<Stream, u64>,
}

impl Seeds {
    pub fn new(master: u64) -> Self {
        Seeds { master, overrides: BTreeMap::new() }
    }

    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.overrides.get(&stream).copied().unwrap_or(self.master));
        rng.set_stream(stream.id());
        rng
    }
}
