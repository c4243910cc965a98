use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CharlieAction, ProtocolError, ProtocolId, Result};
use crate::adversary::EveStrategy;
use crate::qudit::BasisKind;

/// Fraction of every sifted class diverted to the eavesdropping check.
pub const DEFAULT_CHECK_FRACTION: f64 = 0.5;

/// Charlie's control policy in c-SSKD. `key` is split evenly across
/// `π₀, π₁, π₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CharliePolicy {
    pub key: f64,
    pub secret: f64,
    pub conjugate_check: f64,
    pub decoy: f64,
}

impl Default for CharliePolicy {
    fn default() -> Self {
        CharliePolicy {
            key: 0.3,
            secret: 0.3,
            conjugate_check: 0.3,
            decoy: 0.1,
        }
    }
}

impl CharliePolicy {
    fn validate(&self) -> Result<()> {
        let parts = [self.key, self.secret, self.conjugate_check, self.decoy];
        if parts.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(ProtocolError::Config(format!(
                "charlie policy entries must lie in [0, 1]: {parts:?}"
            )));
        }
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ProtocolError::Config(format!(
                "charlie policy sums to {total}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CharlieAction {
        let u: f64 = rng.gen();
        if u < self.key {
            // uniform over the three key projections
            let i = ((u / self.key) * 3.0).floor().min(2.0) as u8;
            CharlieAction::Key(i)
        } else if u < self.key + self.secret {
            CharlieAction::Secret
        } else if u < self.key + self.secret + self.conjugate_check {
            CharlieAction::ConjugateCheck
        } else {
            CharlieAction::Decoy
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub protocol: ProtocolId,
    pub rounds: u64,
    pub seed: u64,
    /// Per-party probability of choosing the computational basis. For
    /// Protocols II/IV Alice's entry is the probability of preparing from
    /// the computational set.
    pub basis_probabilities: [f64; 3],
    pub charlie_policy: CharliePolicy,
    pub eve: EveStrategy,
    pub check_fraction: f64,
    /// Conjugate basis on four-level subsystems (`mub4` or `fourier`).
    pub conjugate4: BasisKind,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            protocol: ProtocolId::BdSsskd,
            rounds: 10_000,
            seed: 0,
            basis_probabilities: [0.5; 3],
            charlie_policy: CharliePolicy::default(),
            eve: EveStrategy::none(),
            check_fraction: DEFAULT_CHECK_FRACTION,
            conjugate4: BasisKind::Mub4,
        }
    }
}

impl SessionConfig {
    pub fn new(protocol: ProtocolId, rounds: u64, seed: u64) -> Self {
        SessionConfig {
            protocol,
            rounds,
            seed,
            ..Default::default()
        }
    }

    pub fn with_eve(mut self, eve: EveStrategy) -> Self {
        self.eve = eve;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(ProtocolError::Config("rounds must be at least 1".into()));
        }
        if self
            .basis_probabilities
            .iter()
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(ProtocolError::Config(format!(
                "basis probabilities must lie in [0, 1]: {:?}",
                self.basis_probabilities
            )));
        }
        if !(self.check_fraction > 0.0 && self.check_fraction < 1.0) {
            return Err(ProtocolError::Config(format!(
                "check fraction must lie in (0, 1), got {}",
                self.check_fraction
            )));
        }
        if self.conjugate4 == BasisKind::Computational {
            return Err(ProtocolError::Config(
                "conjugate basis cannot be the computational basis".into(),
            ));
        }
        self.charlie_policy.validate()?;
        self.eve_parties()?;
        Ok(())
    }

    /// Party indices Eve attacks. The source party never transmits its own
    /// share, so it is not a valid target.
    pub fn eve_parties(&self) -> Result<Vec<usize>> {
        if !self.eve.is_active() {
            return Ok(Vec::new());
        }
        let mut parties = Vec::new();
        for name in &self.eve.targets {
            let idx = self.protocol.party_index(name).ok_or_else(|| {
                ProtocolError::Config(format!(
                    "eve target `{name}` is not a party of {} ({})",
                    self.protocol,
                    self.protocol.party_names().join(", ")
                ))
            })?;
            if idx == self.protocol.source() {
                return Err(ProtocolError::Config(format!(
                    "eve target `{name}` is the source and has no channel to intercept"
                )));
            }
            if !parties.contains(&idx) {
                parties.push(idx);
            }
        }
        Ok(parties)
    }
}
