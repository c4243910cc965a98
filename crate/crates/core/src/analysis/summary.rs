//! Whole-session summary shared by the CLI and the C interface.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{empirical_check, key_rate, AnalysisError, CheckParams, EavesdropVerdict, RateRow, Result};
use crate::protocol::oracle::Oracle;
use crate::protocol::{
    bd_mode, extract_bd, extract_csskd_secrets, extract_layer_keys, BdMode, Classification,
    KeyMaterial, ProtocolId, RoundRecord, SecretMaterial, SessionConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionSummary {
    pub protocol: ProtocolId,
    pub rounds: u64,
    pub seed: u64,
    pub eve: String,
    pub class_counts: BTreeMap<String, usize>,
    pub rates: Vec<RateRow>,
    pub verdict: EavesdropVerdict,
}

pub fn summarize(config: &SessionConfig, records: &[RoundRecord], params: &CheckParams) -> Result<SessionSummary> {
    let mut class_counts = BTreeMap::new();
    for r in records {
        *class_counts.entry(r.class.as_str().to_string()).or_insert(0) += 1;
    }
    let oracle = Oracle::new(config)?;
    let verdict = match empirical_check(records, &oracle, params) {
        Ok(v) => v,
        Err(AnalysisError::EmptyCheckSet) => EavesdropVerdict::empty(params),
        Err(e) => return Err(e),
    };
    Ok(SessionSummary {
        protocol: config.protocol,
        rounds: config.rounds,
        seed: config.seed,
        eve: config.eve.to_string(),
        class_counts,
        rates: key_rate(records, config.protocol)?,
        verdict,
    })
}

/// One row per (layer, class, sub-population).
pub fn summary_csv(s: &SessionSummary) -> String {
    let mut out = String::from("layer,class,kind,subpopulation,rounds,alphabet,bits,rate,bits_per_round,qber\n");
    for r in &s.rates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.layer,
            r.class,
            r.kind,
            r.subpopulation.as_deref().unwrap_or(""),
            r.rounds,
            r.alphabet,
            r.bits,
            r.rate,
            r.bits_per_round,
            r.qber.map(|q| q.to_string()).unwrap_or_default()
        );
    }
    out
}

/// Extracted strings, each tagged with a file-name stem.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Materials {
    pub keys: Vec<(String, KeyMaterial)>,
    pub secrets: Vec<(String, SecretMaterial)>,
}

impl Materials {
    pub fn collect(records: &[RoundRecord], protocol: ProtocolId) -> Result<Self> {
        let mut m = Materials::default();
        if protocol == ProtocolId::BdSsskd {
            for mode in BdMode::ALL {
                let sel: Vec<_> = records
                    .iter()
                    .filter(|r| !matches!(r.class, Classification::Check | Classification::Discard))
                    .filter(|r| bd_mode(&r.bases) == Some(mode))
                    .cloned()
                    .collect();
                let (keys, secrets) = extract_bd(&sel, mode)?;
                m.keys.extend(keys.into_iter().map(|k| (format!("{}_key_{mode}", k.layer), k)));
                m.secrets
                    .extend(secrets.into_iter().map(|s| (format!("{}_secret_{mode}", s.layer), s)));
            }
        } else {
            let mut classes: Vec<_> = records.iter().map(|r| r.class).filter(|c| c.is_key()).collect();
            classes.sort();
            classes.dedup();
            for class in classes {
                let sel: Vec<_> = records.iter().filter(|r| r.class == class).cloned().collect();
                for k in extract_layer_keys(&sel, protocol)? {
                    if !k.is_empty() {
                        m.keys.push((format!("{}_{class}", k.layer), k));
                    }
                }
            }
            if protocol == ProtocolId::CSskd {
                for s in extract_csskd_secrets(records)? {
                    m.secrets.push((format!("{}_secret_{}", s.layer, s.subpopulation), s));
                }
            }
        }
        Ok(m)
    }
}
