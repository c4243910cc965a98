//! Round-by-round protocol state machines, sifting, and key/secret
//! extraction.
//!
//! Party order is fixed per protocol: `alice, bob1, bob2` for the layered
//! protocols and bd-SSSKD, `alice, charlie, bob` for c-SSKD (subsystem
//! order of its resource state). Party outcomes are integers; a party that
//! holds several subsystems reads them as one big-endian number, so in
//! Protocols III/IV Alice's symbol is `2·bell + ghz`.

mod config;
mod extract;
pub mod oracle;
mod resource;
mod session;
mod sift;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::AdversaryError;
use crate::qudit::QuditError;

pub use config::{CharliePolicy, SessionConfig, DEFAULT_CHECK_FRACTION};
pub use extract::{
    binary_decompose, bd_mode, extract_bd, extract_csskd_secrets, extract_layer_keys,
    extract_secret_mod4, BdMode, KeyMaterial, Layer, SecretMaterial,
};
pub use resource::{build_resource, build_resource_with, BasisBank, Preparation, PreparedSampler, Resource, SharedResource};
pub use session::{round_rng, ActionClass, CharlieAction, Classification, RoundRecord, Session};
pub use sift::{classify, sift, SiftParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("unknown protocol `{0}`")]
    UnknownProtocol(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no records to process")]
    EmptyRecords,
    #[error("symbol {0} out of range")]
    OutOfRange(u8),
    #[error("round {round} does not belong to mode {mode}")]
    ModeMismatch { round: u64, mode: BdMode },
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Qudit(#[from] QuditError),
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolId {
    P1,
    P2,
    P3,
    P4,
    CSskd,
    BdSsskd,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 6] = [
        ProtocolId::P1,
        ProtocolId::P2,
        ProtocolId::P3,
        ProtocolId::P4,
        ProtocolId::CSskd,
        ProtocolId::BdSsskd,
    ];

    pub fn party_names(self) -> [&'static str; 3] {
        match self {
            ProtocolId::CSskd => ["alice", "charlie", "bob"],
            _ => ["alice", "bob1", "bob2"],
        }
    }

    pub fn party_index(self, name: &str) -> Option<usize> {
        self.party_names()
            .iter()
            .position(|p| p.eq_ignore_ascii_case(name))
    }

    /// The party that prepares the resource and keeps (or knows) its share.
    pub fn source(self) -> usize {
        match self {
            ProtocolId::CSskd => 1,
            _ => 0,
        }
    }

    /// Number of outcome symbols per party.
    pub fn party_dims(self) -> [usize; 3] {
        match self {
            ProtocolId::CSskd => [4, 4, 4],
            _ => [4, 4, 2],
        }
    }

    pub fn is_prepare_and_measure(self) -> bool {
        matches!(self, ProtocolId::P2 | ProtocolId::P4)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolId::P1 => "p1",
            ProtocolId::P2 => "p2",
            ProtocolId::P3 => "p3",
            ProtocolId::P4 => "p4",
            ProtocolId::CSskd => "c-sskd",
            ProtocolId::BdSsskd => "bd-ssskd",
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolId {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect();
        match norm.as_str() {
            "p1" | "i" | "protocoli" => Ok(ProtocolId::P1),
            "p2" | "ii" | "protocolii" => Ok(ProtocolId::P2),
            "p3" | "iii" | "protocoliii" => Ok(ProtocolId::P3),
            "p4" | "iv" | "protocoliv" => Ok(ProtocolId::P4),
            "csskd" => Ok(ProtocolId::CSskd),
            "bdssskd" => Ok(ProtocolId::BdSsskd),
            _ => Err(ProtocolError::UnknownProtocol(s.to_string())),
        }
    }
}

impl Serialize for ProtocolId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ProtocolId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A party's measurement basis choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Comp,
    Conj,
}

impl Basis {
    pub fn as_str(self) -> &'static str {
        match self {
            Basis::Comp => "comp",
            Basis::Conj => "conj",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
