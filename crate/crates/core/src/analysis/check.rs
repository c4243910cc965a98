//! Eavesdropping decision from check rounds.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};
use crate::protocol::oracle::{observations, CheckKey, Oracle};
use crate::protocol::RoundRecord;
use crate::qudit::DistributionTable;

pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const DEFAULT_MIN_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckParams {
    pub threshold: f64,
    pub min_samples: usize,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            threshold: DEFAULT_THRESHOLD,
            min_samples: DEFAULT_MIN_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Abort,
    Inconclusive,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Accept => "accept",
            Decision::Abort => "abort",
            Decision::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupVerdict {
    pub group: String,
    pub samples: usize,
    pub tv: f64,
    /// `samples >= min_samples`; only sufficient groups can abort.
    pub sufficient: bool,
    pub exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EavesdropVerdict {
    pub decision: Decision,
    pub threshold: f64,
    pub min_samples: usize,
    pub groups: Vec<GroupVerdict>,
}

impl EavesdropVerdict {
    /// Verdict for a run that produced no check data at all.
    pub fn empty(params: &CheckParams) -> Self {
        EavesdropVerdict {
            decision: Decision::Inconclusive,
            threshold: params.threshold,
            min_samples: params.min_samples,
            groups: Vec::new(),
        }
    }

    pub fn max_tv(&self) -> f64 {
        self.groups
            .iter()
            .filter(|g| g.sufficient)
            .map(|g| g.tv)
            .fold(0.0, f64::max)
    }
}

/// Per check group, the total-variation distance between observed
/// frequencies and the no-Eve oracle. Abort if any group with enough
/// samples exceeds the threshold; otherwise inconclusive if some group is
/// short of samples; otherwise accept.
pub fn empirical_check(records: &[RoundRecord], oracle: &Oracle, params: &CheckParams) -> Result<EavesdropVerdict> {
    let mut counts: BTreeMap<CheckKey, BTreeMap<Vec<usize>, usize>> = BTreeMap::new();
    for r in records {
        for (key, outcome) in observations(r) {
            *counts.entry(key).or_default().entry(outcome).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(AnalysisError::EmptyCheckSet);
    }
    let mut groups = Vec::with_capacity(counts.len());
    for (key, hist) in &counts {
        let n: usize = hist.values().sum();
        let mut empirical = DistributionTable::new(Vec::new());
        for (o, c) in hist {
            empirical.add(o.clone(), *c as f64 / n as f64);
        }
        let tv = empirical.tv_distance(&oracle.table(key)?);
        let sufficient = n >= params.min_samples;
        groups.push(GroupVerdict {
            group: key.to_string(),
            samples: n,
            tv,
            sufficient,
            exceeds: sufficient && tv > params.threshold,
        });
    }
    let decision = if groups.iter().any(|g| g.exceeds) {
        Decision::Abort
    } else if groups.iter().any(|g| !g.sufficient) {
        Decision::Inconclusive
    } else {
        Decision::Accept
    };
    Ok(EavesdropVerdict {
        decision,
        threshold: params.threshold,
        min_samples: params.min_samples,
        groups,
    })
}
