//! Intercept-resend eavesdropping and decoy pulses.
//!
//! Eve sits on the quantum channels between the source and the receiving
//! parties. She measures each targeted subsystem in her basis and forwards
//! the collapsed system. Her outcomes are returned as an [`EveLog`] that
//! the protocol engine never exposes to the parties.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::protocol::Basis;
use crate::qudit::{
    self, basis, joint_distribution, measure_subsystem, project_subsystem, BasisKind, BasisSet,
    DistributionTable, PureState, QuditError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversaryError {
    #[error("malformed eve spec `{0}`: expected `none` or `intercept-resend:<targets>:<basis>`")]
    InvalidSpec(String),
    #[error("invalid eve target: {0}")]
    InvalidTarget(String),
    #[error(transparent)]
    Qudit(#[from] QuditError),
}

pub type Result<T> = std::result::Result<T, AdversaryError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EveKind {
    None,
    InterceptResend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EveBasis {
    Computational,
    Conjugate,
    /// One fair coin per round picks computational or conjugate for every
    /// target.
    RandomPerRound,
}

impl fmt::Display for EveBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EveBasis::Computational => "computational",
            EveBasis::Conjugate => "conjugate",
            EveBasis::RandomPerRound => "random",
        })
    }
}

/// Protocol-level attack description; targets are party names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EveStrategy {
    pub kind: EveKind,
    pub targets: Vec<String>,
    pub basis: EveBasis,
}

impl EveStrategy {
    pub fn none() -> Self {
        EveStrategy {
            kind: EveKind::None,
            targets: Vec::new(),
            basis: EveBasis::Computational,
        }
    }

    pub fn intercept_resend(targets: &[&str], basis: EveBasis) -> Self {
        EveStrategy {
            kind: EveKind::InterceptResend,
            targets: targets.iter().map(|t| t.to_string()).collect(),
            basis,
        }
    }

    pub fn is_active(&self) -> bool {
        self.kind == EveKind::InterceptResend && !self.targets.is_empty()
    }
}

impl Default for EveStrategy {
    fn default() -> Self {
        EveStrategy::none()
    }
}

impl FromStr for EveStrategy {
    type Err = AdversaryError;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.eq_ignore_ascii_case("none") || spec.is_empty() {
            return Ok(EveStrategy::none());
        }
        let bad = || AdversaryError::InvalidSpec(spec.to_string());
        let mut parts = spec.split(':');
        let (Some(kind), Some(targets), Some(basis), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        if !kind.eq_ignore_ascii_case("intercept-resend") {
            return Err(bad());
        }
        let targets: Vec<String> = targets
            .split(',')
            .map(|t| t.trim().to_ascii_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        if targets.is_empty() {
            return Err(bad());
        }
        let basis = match basis.to_ascii_lowercase().as_str() {
            "computational" | "comp" | "z" => EveBasis::Computational,
            "conjugate" | "conj" | "x" => EveBasis::Conjugate,
            "random" | "random-per-round" => EveBasis::RandomPerRound,
            _ => return Err(bad()),
        };
        Ok(EveStrategy {
            kind: EveKind::InterceptResend,
            targets,
            basis,
        })
    }
}

impl fmt::Display for EveStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EveKind::None => f.write_str("none"),
            EveKind::InterceptResend => write!(
                f,
                "intercept-resend:{}:{}",
                self.targets.join(","),
                self.basis
            ),
        }
    }
}

impl Serialize for EveStrategy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EveStrategy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// State-level attack: which subsystems Eve measures and how.
#[derive(Debug, Clone, PartialEq)]
pub struct Interception {
    pub subsystems: Vec<usize>,
    pub basis: EveBasis,
    /// Conjugate basis Eve uses on four-level systems.
    pub conjugate4: BasisKind,
}

impl Interception {
    pub fn none() -> Self {
        Interception {
            subsystems: Vec::new(),
            basis: EveBasis::Computational,
            conjugate4: BasisKind::Mub4,
        }
    }

    pub fn new(subsystems: Vec<usize>, basis: EveBasis) -> Self {
        Interception {
            subsystems,
            basis,
            conjugate4: BasisKind::Mub4,
        }
    }

    /// Targets every subsystem whose party label is in `parties`.
    pub fn on_parties(s: &PureState, parties: &[usize], basis: EveBasis, conjugate4: BasisKind) -> Self {
        let subsystems = s
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, l)| parties.contains(l))
            .map(|(k, _)| k)
            .collect();
        Interception {
            subsystems,
            basis,
            conjugate4,
        }
    }

    fn validate(&self, s: &PureState) -> Result<()> {
        let mut seen = vec![false; s.num_subsystems()];
        for &k in &self.subsystems {
            if k >= s.num_subsystems() {
                return Err(AdversaryError::InvalidTarget(format!(
                    "subsystem {k} of a {}-subsystem state",
                    s.num_subsystems()
                )));
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(AdversaryError::InvalidTarget(format!("subsystem {k} listed twice")));
            }
        }
        Ok(())
    }

    fn basis_for(&self, conjugate: bool, d: usize) -> Result<BasisSet> {
        let kind = match (conjugate, d) {
            (false, _) => BasisKind::Computational,
            (true, 4) => self.conjugate4,
            (true, _) => BasisKind::Fourier,
        };
        Ok(basis(kind, d)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EveObservation {
    pub subsystem: usize,
    pub basis: BasisKind,
    pub outcome: usize,
}

/// Eve's private record of one round. Ground truth for tests only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EveLog {
    pub observations: Vec<EveObservation>,
}

/// Measure-and-resend on every targeted subsystem.
pub fn apply_intercept_resend<R: Rng + ?Sized>(
    s: &PureState,
    attack: &Interception,
    rng: &mut R,
) -> Result<(PureState, EveLog)> {
    attack.validate(s)?;
    let mut log = EveLog::default();
    if attack.subsystems.is_empty() {
        return Ok((s.clone(), log));
    }
    let conjugate = match attack.basis {
        EveBasis::Computational => false,
        EveBasis::Conjugate => true,
        EveBasis::RandomPerRound => rng.gen_bool(0.5),
    };
    let mut state = s.clone();
    for &k in &attack.subsystems {
        let b = attack.basis_for(conjugate, state.dims()[k])?;
        let (outcome, collapsed) = measure_subsystem(&state, k, &b, rng)?;
        state = collapsed;
        log.observations.push(EveObservation {
            subsystem: k,
            basis: b.kind(),
            outcome,
        });
    }
    Ok((state, log))
}

/// Every branch of Eve's measurement with its probability.
pub fn eve_branches(s: &PureState, attack: &Interception) -> Result<Vec<(f64, PureState)>> {
    attack.validate(s)?;
    if attack.subsystems.is_empty() {
        return Ok(vec![(1.0, s.clone())]);
    }
    let choices: &[(bool, f64)] = match attack.basis {
        EveBasis::Computational => &[(false, 1.0)],
        EveBasis::Conjugate => &[(true, 1.0)],
        EveBasis::RandomPerRound => &[(false, 0.5), (true, 0.5)],
    };
    let mut out = Vec::new();
    for &(conjugate, weight) in choices {
        let mut frontier = vec![(weight, s.clone())];
        for &k in &attack.subsystems {
            let b = attack.basis_for(conjugate, s.dims()[k])?;
            let mut next = Vec::new();
            for (w, state) in &frontier {
                for (o, p) in qudit::subsystem_weights(state, k, &b)?.into_iter().enumerate() {
                    if p <= qudit::SUPPORT_TOLERANCE {
                        continue;
                    }
                    let (_, collapsed) = project_subsystem(state, k, &b, o)?;
                    next.push((w * p, collapsed));
                }
            }
            frontier = next;
        }
        out.extend(frontier);
    }
    Ok(out)
}

/// Exact outcome distribution after the measure-and-resend channel: the
/// branch-probability mixture of per-branch distributions.
pub fn channel_distribution(
    s: &PureState,
    attack: &Interception,
    bases: &[&BasisSet],
) -> Result<DistributionTable> {
    let mut table = DistributionTable::new(bases.iter().map(|b| b.kind().to_string()).collect());
    for (w, branch) in eve_branches(s, attack)? {
        table.accumulate(&joint_distribution(&branch, bases)?, w);
    }
    Ok(table.pruned())
}

/// A known single-qudit preparation sent by the controller to one party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoyPulse {
    pub basis: Basis,
    pub symbol: u8,
    /// Party index of the receiver.
    pub target: usize,
}

pub const DECOY_DIM: usize = 4;

impl DecoyPulse {
    pub fn state(&self, conjugate4: BasisKind) -> PureState {
        let kind = match self.basis {
            Basis::Comp => BasisKind::Computational,
            Basis::Conj => conjugate4,
        };
        let b = basis(kind, DECOY_DIM).expect("four-level basis");
        PureState::from_amplitudes(vec![DECOY_DIM], b.vector(self.symbol as usize).to_vec())
            .expect("basis vector")
            .with_labels(vec![self.target])
            .expect("one label")
    }

    /// The outcome an untouched channel must produce, or `None` when the
    /// receiver measured in the other basis and the report is discarded.
    pub fn expected(&self, measured: Basis) -> Option<u8> {
        (measured == self.basis).then_some(self.symbol)
    }
}

/// Draws one decoy for each target: uniform basis, uniform symbol.
pub fn decoy_round<R: Rng + ?Sized>(targets: [usize; 2], rng: &mut R) -> [DecoyPulse; 2] {
    targets.map(|target| DecoyPulse {
        basis: if rng.gen_bool(0.5) { Basis::Comp } else { Basis::Conj },
        symbol: rng.gen_range(0..DECOY_DIM as u8),
        target,
    })
}
