//! Round generation.
//!
//! Each round draws from its own generator, `round_rng(seed, round)`, in a
//! fixed order:
//!
//! 1. c-SSKD only: Charlie's control action from the policy.
//! 2. One computational/conjugate coin per party, in party order. Charlie's
//!    coin is drawn and then overridden by his action. In Protocols II/IV
//!    Alice's coin selects the preparation set.
//! 3. Protocols II/IV: the symbol `k ∈ 0..4`. Decoy rounds: one pulse per
//!    receiver (basis, then symbol).
//! 4. The measurement outcome.
//!
//! Step 4 samples from the exact outcome distribution of the round's
//! scenario, which the engine computes once per session with
//! [`channel_distribution`] (Eve's branches mixed by probability).
//! [`Session::run_round_state_vector`] replays steps 1–3 and then
//! evolves the state explicitly through the channel and the measurement;
//! both paths sample the same law.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::resource::{build_resource_with, BasisBank, PreparedSampler, Resource};
use super::{sift, Basis, ProtocolError, ProtocolId, Result, SessionConfig, SiftParams};
use crate::adversary::{
    apply_intercept_resend, channel_distribution, decoy_round, DecoyPulse, EveBasis, Interception,
};
use crate::qudit::{measure, project_subsystem, tensor_product, DistributionTable, PureState};

/// Per-round generator: ChaCha8 keyed by the session seed, stream selected
/// by the round index.
pub fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

/// Charlie's private control choice in a c-SSKD round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CharlieAction {
    /// Projection `π_i`, `i ∈ {0, 1, 2}`: the key symbol.
    Key(u8),
    /// Projection `π₃`.
    Secret,
    ConjugateCheck,
    Decoy,
}

/// What Charlie announces about a round. The key index stays private.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionClass {
    Key,
    Secret,
    #[serde(rename = "conj-check")]
    ConjugateCheck,
    Decoy,
}

impl ActionClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionClass::Key => "key",
            ActionClass::Secret => "secret",
            ActionClass::ConjugateCheck => "conj-check",
            ActionClass::Decoy => "decoy",
        }
    }
}

impl fmt::Display for ActionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl CharlieAction {
    pub fn class(self) -> ActionClass {
        match self {
            CharlieAction::Key(_) => ActionClass::Key,
            CharlieAction::Secret => ActionClass::Secret,
            CharlieAction::ConjugateCheck => ActionClass::ConjugateCheck,
            CharlieAction::Decoy => ActionClass::Decoy,
        }
    }

    /// Charlie's measurement basis, or `None` for a decoy round.
    pub fn basis(self) -> Option<Basis> {
        match self {
            CharlieAction::Key(_) | CharlieAction::Secret => Some(Basis::Comp),
            CharlieAction::ConjugateCheck => Some(Basis::Conj),
            CharlieAction::Decoy => None,
        }
    }

    /// Projector index for `π_i` actions.
    pub fn projector(self) -> Option<usize> {
        match self {
            CharlieAction::Key(i) => Some(i as usize),
            CharlieAction::Secret => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for CharlieAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharlieAction::Key(i) => write!(f, "key{i}"),
            other => f.write_str(other.class().as_str()),
        }
    }
}

impl FromStr for CharlieAction {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "key0" => Ok(CharlieAction::Key(0)),
            "key1" => Ok(CharlieAction::Key(1)),
            "key2" => Ok(CharlieAction::Key(2)),
            "secret" => Ok(CharlieAction::Secret),
            "conj-check" => Ok(CharlieAction::ConjugateCheck),
            "decoy" => Ok(CharlieAction::Decoy),
            _ => Err(ProtocolError::Config(format!("unknown charlie action `{s}`"))),
        }
    }
}

impl Serialize for CharlieAction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CharlieAction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "pending")]
    Pending,
    #[serde(rename = "key_L1")]
    KeyL1,
    #[serde(rename = "key_L2")]
    KeyL2,
    #[serde(rename = "key_all")]
    KeyAll,
    #[serde(rename = "secret")]
    Secret,
    #[serde(rename = "secret_L1")]
    SecretL1,
    #[serde(rename = "secret_L2")]
    SecretL2,
    #[serde(rename = "check")]
    Check,
    #[serde(rename = "decoy")]
    Decoy,
    #[serde(rename = "discard")]
    Discard,
}

impl Classification {
    pub const ALL: [Classification; 10] = [
        Classification::Pending,
        Classification::KeyL1,
        Classification::KeyL2,
        Classification::KeyAll,
        Classification::Secret,
        Classification::SecretL1,
        Classification::SecretL2,
        Classification::Check,
        Classification::Decoy,
        Classification::Discard,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Pending => "pending",
            Classification::KeyL1 => "key_L1",
            Classification::KeyL2 => "key_L2",
            Classification::KeyAll => "key_all",
            Classification::Secret => "secret",
            Classification::SecretL1 => "secret_L1",
            Classification::SecretL2 => "secret_L2",
            Classification::Check => "check",
            Classification::Decoy => "decoy",
            Classification::Discard => "discard",
        }
    }

    pub fn is_key(self) -> bool {
        matches!(self, Classification::KeyL1 | Classification::KeyL2 | Classification::KeyAll)
    }

    pub fn is_secret(self) -> bool {
        matches!(
            self,
            Classification::Secret | Classification::SecretL1 | Classification::SecretL2
        )
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One protocol round as written to the record stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub protocol: ProtocolId,
    /// Announced basis per party; `None` for Charlie in decoy rounds.
    pub bases: [Option<Basis>; 3],
    pub action: Option<CharlieAction>,
    /// Outcome symbol per party. For Protocols II/IV Alice's entry is the
    /// prepared symbol `k`.
    pub outcomes: [Option<u8>; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoy: Option<[DecoyPulse; 2]>,
    pub class: Classification,
}

impl RoundRecord {
    /// Outcome of party `p`; panics if the party produced none.
    pub fn outcome(&self, p: usize) -> u8 {
        self.outcomes[p].expect("party outcome")
    }

    pub fn basis(&self, p: usize) -> Option<Basis> {
        self.bases[p]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

// ---------------------------------------------------------------------------
// Cached scenario distributions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Scenario {
    Shared {
        action: Option<CharlieAction>,
        bases: [Basis; 3],
    },
    Prepared {
        symbol: u8,
        bases: [Basis; 3],
    },
    Decoy {
        pulses: [(Basis, u8); 2],
        bases: [Basis; 2],
    },
}

/// Exact outcome law of one scenario over party symbols.
#[derive(Debug, Clone)]
pub(crate) struct OutcomeLaw {
    outcomes: Vec<[u8; 3]>,
    probs: Vec<f64>,
    cum: Vec<f64>,
}

impl OutcomeLaw {
    fn from_table(table: &DistributionTable, fold: impl Fn(&[usize]) -> [u8; 3]) -> Self {
        let mut merged: Vec<([u8; 3], f64)> = Vec::new();
        for (outcome, p) in table.iter() {
            let party = fold(outcome);
            match merged.iter_mut().find(|(o, _)| *o == party) {
                Some(entry) => entry.1 += p,
                None => merged.push((party, p)),
            }
        }
        merged.sort_by_key(|a| a.0);
        let mut acc = 0.0;
        let mut cum = Vec::with_capacity(merged.len());
        for (_, p) in &merged {
            acc += p;
            cum.push(acc);
        }
        OutcomeLaw {
            outcomes: merged.iter().map(|(o, _)| *o).collect(),
            probs: merged.iter().map(|(_, p)| *p).collect(),
            cum,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [u8; 3] {
        let total = *self.cum.last().expect("nonempty law");
        let u = rng.gen::<f64>() * total;
        let i = self.cum.partition_point(|&c| c <= u).min(self.outcomes.len() - 1);
        self.outcomes[i]
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = ([u8; 3], f64)> + '_ {
        self.outcomes.iter().copied().zip(self.probs.iter().copied())
    }
}

fn fold_by_labels(dims: &[usize], labels: &[usize], outcome: &[usize]) -> [u8; 3] {
    let mut party = [0u8; 3];
    for ((&d, &p), &o) in dims.iter().zip(labels).zip(outcome) {
        party[p] = party[p] * d as u8 + o as u8;
    }
    party
}

const BOTH: [Basis; 2] = [Basis::Comp, Basis::Conj];

/// Precomputed scenario laws for one configuration.
#[derive(Debug, Clone)]
pub(crate) struct Engine {
    protocol: ProtocolId,
    resource: Resource,
    bank: BasisBank,
    eve_parties: Vec<usize>,
    eve_basis: EveBasis,
    laws: HashMap<Scenario, OutcomeLaw>,
}

impl Engine {
    pub(crate) fn new(config: &SessionConfig, with_eve: bool) -> Result<Self> {
        let resource = build_resource_with(
            config.protocol,
            config.basis_probabilities[0],
            config.conjugate4,
        );
        let mut engine = Engine {
            protocol: config.protocol,
            resource,
            bank: BasisBank::new(config.conjugate4),
            eve_parties: if with_eve { config.eve_parties()? } else { Vec::new() },
            eve_basis: config.eve.basis,
            laws: HashMap::new(),
        };
        for scenario in engine.scenarios() {
            let law = engine.compute(&scenario)?;
            engine.laws.insert(scenario, law);
        }
        Ok(engine)
    }

    fn scenarios(&self) -> Vec<Scenario> {
        let mut out = Vec::new();
        let triples = || {
            BOTH.into_iter().flat_map(|a| {
                BOTH.into_iter()
                    .flat_map(move |b| BOTH.into_iter().map(move |c| [a, b, c]))
            })
        };
        match self.protocol {
            ProtocolId::P1 | ProtocolId::P3 | ProtocolId::BdSsskd => {
                out.extend(triples().map(|bases| Scenario::Shared { action: None, bases }));
            }
            ProtocolId::P2 | ProtocolId::P4 => {
                for bases in triples() {
                    for symbol in 0..4 {
                        out.push(Scenario::Prepared { symbol, bases });
                    }
                }
            }
            ProtocolId::CSskd => {
                let actions = [
                    CharlieAction::Key(0),
                    CharlieAction::Key(1),
                    CharlieAction::Key(2),
                    CharlieAction::Secret,
                    CharlieAction::ConjugateCheck,
                ];
                for action in actions {
                    let c = action.basis().expect("quantum action");
                    for a in BOTH {
                        for b in BOTH {
                            out.push(Scenario::Shared {
                                action: Some(action),
                                bases: [a, c, b],
                            });
                        }
                    }
                }
                for pa in BOTH {
                    for ka in 0..4 {
                        for pb in BOTH {
                            for kb in 0..4 {
                                for a in BOTH {
                                    for b in BOTH {
                                        out.push(Scenario::Decoy {
                                            pulses: [(pa, ka), (pb, kb)],
                                            bases: [a, b],
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn attack(&self, s: &PureState) -> Interception {
        if self.eve_parties.is_empty() {
            Interception::none()
        } else {
            Interception::on_parties(s, &self.eve_parties, self.eve_basis, self.bank.conjugate4())
        }
    }

    fn sampler(&self) -> &PreparedSampler {
        match &self.resource {
            Resource::Prepared(p) => p,
            Resource::Shared(_) => unreachable!("prepared scenario on a shared resource"),
        }
    }

    /// The state entering the channel, with per-party bases for its
    /// subsystems.
    fn scenario_state(&self, scenario: &Scenario) -> Result<(PureState, [Basis; 3])> {
        match *scenario {
            Scenario::Shared { action, bases } => {
                let s = self.resource.shared_state().expect("shared resource");
                let s = match action.and_then(CharlieAction::projector) {
                    // Charlie holds his subsystem at the source, so his
                    // projection precedes the channel.
                    Some(i) => {
                        let comp4 = self.bank.get(Basis::Comp, 4);
                        project_subsystem(s, self.protocol.source(), comp4, i)?.1
                    }
                    None => s.clone(),
                };
                Ok((s, bases))
            }
            Scenario::Prepared { symbol, bases } => {
                Ok((self.sampler().preparation(bases[0], symbol).state, bases))
            }
            Scenario::Decoy { pulses, bases } => {
                let conj4 = self.bank.conjugate4();
                let pulse = |(basis, symbol): (Basis, u8), target| {
                    DecoyPulse { basis, symbol, target }.state(conj4)
                };
                let s = tensor_product(&pulse(pulses[0], 0), &pulse(pulses[1], 2))
                    .with_labels(vec![0, 2])?;
                Ok((s, [bases[0], Basis::Comp, bases[1]]))
            }
        }
    }

    fn compute(&self, scenario: &Scenario) -> Result<OutcomeLaw> {
        let (state, bases) = self.scenario_state(scenario)?;
        let sets = self.bank.for_state(&state, &bases);
        let table = channel_distribution(&state, &self.attack(&state), &sets)?;
        let (dims, labels) = (state.dims().to_vec(), state.labels().to_vec());
        let mut law = OutcomeLaw::from_table(&table, |o| fold_by_labels(&dims, &labels, o));
        if let Scenario::Prepared { symbol, .. } = scenario {
            law.outcomes.iter_mut().for_each(|o| o[0] = *symbol);
        }
        Ok(law)
    }

    pub(crate) fn law(&self, scenario: &Scenario) -> &OutcomeLaw {
        &self.laws[scenario]
    }

    pub(crate) fn protocol(&self) -> ProtocolId {
        self.protocol
    }
}

// ---------------------------------------------------------------------------
// Session

/// Classical choices of one round, drawn before any quantum sampling.
struct Choices {
    action: Option<CharlieAction>,
    bases: [Basis; 3],
    symbol: u8,
    decoy: Option<[DecoyPulse; 2]>,
}

impl Choices {
    fn scenario(&self, protocol: ProtocolId) -> Scenario {
        match (&self.decoy, protocol.is_prepare_and_measure()) {
            (Some(p), _) => Scenario::Decoy {
                pulses: [(p[0].basis, p[0].symbol), (p[1].basis, p[1].symbol)],
                bases: [self.bases[0], self.bases[2]],
            },
            (None, true) => Scenario::Prepared {
                symbol: self.symbol,
                bases: self.bases,
            },
            (None, false) => Scenario::Shared {
                action: self.action,
                bases: self.bases,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    engine: Engine,
}

impl Session {
    pub fn new(config: SessionConfig) -> Result<Self> {
        config.validate()?;
        let engine = Engine::new(&config, true)?;
        Ok(Session { config, engine })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    fn choices<R: Rng + ?Sized>(&self, rng: &mut R) -> Choices {
        let protocol = self.config.protocol;
        let action = (protocol == ProtocolId::CSskd).then(|| self.config.charlie_policy.sample(rng));
        let mut bases = [Basis::Comp; 3];
        for (b, &p) in bases.iter_mut().zip(&self.config.basis_probabilities) {
            *b = if rng.gen_bool(p) { Basis::Comp } else { Basis::Conj };
        }
        if let Some(c) = action.and_then(CharlieAction::basis) {
            bases[protocol.source()] = c;
        }
        let symbol = if protocol.is_prepare_and_measure() {
            rng.gen_range(0..4u8)
        } else {
            0
        };
        let decoy = (action == Some(CharlieAction::Decoy)).then(|| decoy_round([0, 2], rng));
        Choices {
            action,
            bases,
            symbol,
            decoy,
        }
    }

    fn record(&self, round: u64, choices: &Choices, outcome: [u8; 3]) -> RoundRecord {
        let mut bases = choices.bases.map(Some);
        let mut outcomes = outcome.map(Some);
        if choices.decoy.is_some() {
            bases[1] = None;
            outcomes[1] = None;
        }
        RoundRecord {
            round,
            protocol: self.config.protocol,
            bases,
            action: choices.action,
            outcomes,
            decoy: choices.decoy,
            class: Classification::Pending,
        }
    }

    /// One unsifted round.
    pub fn run_round(&self, round: u64) -> RoundRecord {
        let mut rng = round_rng(self.config.seed, round);
        let choices = self.choices(&mut rng);
        let law = self.engine.law(&choices.scenario(self.config.protocol));
        let outcome = law.sample(&mut rng);
        self.record(round, &choices, outcome)
    }

    /// Same choices as [`Session::run_round`], then explicit evolution:
    /// intercept-resend on the state, then a Born-rule measurement of every
    /// subsystem.
    pub fn run_round_state_vector(&self, round: u64) -> Result<RoundRecord> {
        let mut rng = round_rng(self.config.seed, round);
        let choices = self.choices(&mut rng);
        let scenario = choices.scenario(self.config.protocol);
        let (state, bases) = self.engine.scenario_state(&scenario)?;
        let attack = self.engine.attack(&state);
        let (state, _eve) = apply_intercept_resend(&state, &attack, &mut rng)?;
        let sets = self.engine.bank.for_state(&state, &bases);
        let (digits, _) = measure(&state, &sets, &mut rng)?;
        let mut outcome = fold_by_labels(state.dims(), state.labels(), &digits);
        if self.config.protocol.is_prepare_and_measure() && choices.decoy.is_none() {
            outcome[0] = choices.symbol;
        }
        Ok(self.record(round, &choices, outcome))
    }

    /// All rounds, unsifted. `workers > 1` shards rounds over a thread pool;
    /// the output does not depend on `workers`.
    pub fn run(&self, workers: usize) -> Result<Vec<RoundRecord>> {
        let rounds = 0..self.config.rounds;
        if workers <= 1 {
            return Ok(rounds.map(|r| self.run_round(r)).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| ProtocolError::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(|| rounds.into_par_iter().map(|r| self.run_round(r)).collect()))
    }

    /// Runs and sifts.
    pub fn execute(&self, workers: usize) -> Result<Vec<RoundRecord>> {
        let mut records = self.run(workers)?;
        sift(
            &mut records,
            &SiftParams {
                check_fraction: self.config.check_fraction,
                seed: self.config.seed,
            },
        )?;
        Ok(records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    type Cell = (Option<CharlieAction>, [Option<Basis>; 3], [Option<u8>; 3]);

    fn counts(records: &[RoundRecord]) -> BTreeMap<Cell, usize> {
        let mut m = BTreeMap::new();
        for r in records {
            *m.entry((r.action, r.bases, r.outcomes)).or_insert(0) += 1;
        }
        m
    }

    #[test]
    fn action_json_names() {
        for a in [
            CharlieAction::Key(0),
            CharlieAction::Key(2),
            CharlieAction::Secret,
            CharlieAction::ConjugateCheck,
            CharlieAction::Decoy,
        ] {
            let s = serde_json::to_string(&a).unwrap();
            assert_eq!(serde_json::from_str::<CharlieAction>(&s).unwrap(), a);
        }
        assert_eq!(CharlieAction::ConjugateCheck.to_string(), "conj-check");
        assert!("key3".parse::<CharlieAction>().is_err());
        assert_eq!(serde_json::to_string(&Classification::KeyL1).unwrap(), "\"key_L1\"");
    }

    #[test]
    fn record_shape() {
        let s = Session::new(SessionConfig::new(ProtocolId::BdSsskd, 3, 42)).unwrap();
        let r = s.run_round(0);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["action", "bases", "class", "outcomes", "protocol", "round"]);
        assert_eq!(v["protocol"], "bd-ssskd");
        assert!(v["action"].is_null());
        let back: RoundRecord = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn bd_computational_rounds_hit_table_support() {
        let mut c = SessionConfig::new(ProtocolId::BdSsskd, 500, 3);
        c.basis_probabilities = [1.0; 3];
        let s = Session::new(c).unwrap();
        for r in s.run(1).unwrap() {
            let [a, b1, b2] = r.outcomes.map(Option::unwrap);
            assert_eq!(a, b1);
            assert_eq!(b2, a & 1);
        }
    }

    #[test]
    fn csskd_key_rounds_share_charlies_index() {
        let mut c = SessionConfig::new(ProtocolId::CSskd, 3000, 8);
        c.basis_probabilities = [0.0, 0.5, 0.0];
        let s = Session::new(c).unwrap();
        let mut seen = 0;
        for r in s.run(1).unwrap() {
            if let Some(CharlieAction::Key(i)) = r.action {
                assert_eq!(r.outcomes, [Some(i), Some(i), Some(i)]);
                seen += 1;
            }
            if r.action == Some(CharlieAction::Decoy) {
                assert_eq!(r.outcomes[1], None);
                assert_eq!(r.bases[1], None);
                assert!(r.decoy.is_some());
            }
        }
        assert!(seen > 700);
    }

    #[test]
    fn prepared_rounds_agree_in_matching_basis() {
        for p in [ProtocolId::P2, ProtocolId::P4] {
            let s = Session::new(SessionConfig::new(p, 2000, 1)).unwrap();
            for r in s.run(1).unwrap() {
                let [a, b1, b2] = r.outcomes.map(Option::unwrap);
                let [sa, s1, s2] = r.bases.map(Option::unwrap);
                if sa == s1 {
                    assert_eq!(a, b1, "{p} {r:?}");
                }
                if sa == s2 {
                    assert_eq!(a & 1, b2, "{p} {r:?}");
                }
            }
        }
    }

    #[test]
    fn workers_do_not_change_output() {
        let c = SessionConfig::new(ProtocolId::CSskd, 4000, 99)
            .with_eve("intercept-resend:alice,bob:random".parse().unwrap());
        let s = Session::new(c).unwrap();
        assert_eq!(s.run(1).unwrap(), s.run(4).unwrap());
    }

    #[test]
    fn cached_and_state_vector_paths_agree() {
        // Both paths draw identical choices, so per-choice outcome counts
        // must agree up to sampling noise.
        let cases = [
            SessionConfig::new(ProtocolId::BdSsskd, 40_000, 5)
                .with_eve("intercept-resend:bob1,bob2:computational".parse().unwrap()),
            SessionConfig::new(ProtocolId::CSskd, 40_000, 6)
                .with_eve("intercept-resend:alice,bob:conjugate".parse().unwrap()),
            SessionConfig::new(ProtocolId::P4, 40_000, 7)
                .with_eve("intercept-resend:bob2:random".parse().unwrap()),
        ];
        for config in cases {
            let s = Session::new(config).unwrap();
            let fast = s.run(1).unwrap();
            let slow: Vec<_> = (0..s.config().rounds)
                .map(|r| s.run_round_state_vector(r).unwrap())
                .collect();
            let (cf, cs) = (counts(&fast), counts(&slow));
            let n = fast.len() as f64;
            let keys: std::collections::BTreeSet<_> = cf.keys().chain(cs.keys()).collect();
            let tv: f64 = keys
                .iter()
                .map(|k| {
                    let a = *cf.get(*k).unwrap_or(&0) as f64;
                    let b = *cs.get(*k).unwrap_or(&0) as f64;
                    (a - b).abs() / n
                })
                .sum::<f64>()
                / 2.0;
            let bound = 5.0 * (keys.len() as f64 / n).sqrt();
            assert!(tv < bound, "{}: tv {tv} bound {bound}", s.config().protocol);
        }
    }
}
