//! Sifted key/secret rates and error fractions.

use serde::{Deserialize, Serialize};

use super::{AnalysisError, Result};
use crate::protocol::{
    bd_mode, binary_decompose, extract_bd, extract_csskd_secrets, extract_layer_keys, BdMode,
    Classification, KeyMaterial, Layer, ProtocolId, RoundRecord, SecretMaterial,
};

/// One (layer, class) line of the rate report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RateRow {
    pub layer: Layer,
    pub class: String,
    /// `key` or `secret`.
    pub kind: String,
    /// bd-SSSKD mode or c-SSKD secret basis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subpopulation: Option<String>,
    pub rounds: usize,
    pub alphabet: u8,
    pub bits: f64,
    /// Bits per total session round.
    pub rate: f64,
    /// Bits per contributing sifted round.
    pub bits_per_round: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qber: Option<f64>,
    /// For recorded `claimedEqual` relations: fraction of rounds where the
    /// claim held.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim_agreement: Option<f64>,
}

fn per(total: f64, n: f64) -> f64 {
    if n > 0.0 {
        total / n
    } else {
        0.0
    }
}

fn key_row(k: &KeyMaterial, class: &str, sub: Option<&str>, total: usize) -> RateRow {
    let bits = k.bits();
    RateRow {
        layer: k.layer,
        class: class.to_string(),
        kind: "key".into(),
        subpopulation: sub.map(str::to_string),
        rounds: k.len(),
        alphabet: k.alphabet,
        bits,
        rate: per(bits, total as f64),
        bits_per_round: per(bits, k.len() as f64),
        qber: Some(per(k.mismatches() as f64, k.len() as f64)),
        claim_agreement: None,
    }
}

fn secret_row(s: &SecretMaterial, class: &str, total: usize) -> RateRow {
    let bits = s.len() as f64 * (s.alphabet as f64).log2();
    RateRow {
        layer: s.layer,
        class: class.to_string(),
        kind: "secret".into(),
        subpopulation: Some(s.subpopulation.clone()),
        rounds: s.len(),
        alphabet: s.alphabet,
        bits,
        rate: per(bits, total as f64),
        bits_per_round: per(bits, s.len() as f64),
        qber: None,
        claim_agreement: s.claim_agreement(),
    }
}

fn classes_present(records: &[RoundRecord], pred: impl Fn(Classification) -> bool) -> Vec<Classification> {
    let mut out: Vec<_> = records.iter().map(|r| r.class).filter(|c| pred(*c)).collect();
    out.sort();
    out.dedup();
    out
}

/// Rates per layer and class over the sifted records. `rate` divides by
/// the total number of records, including discarded and check rounds.
pub fn key_rate(records: &[RoundRecord], protocol: ProtocolId) -> Result<Vec<RateRow>> {
    let total = records.len();
    let mut rows = Vec::new();
    if protocol == ProtocolId::BdSsskd {
        for mode in BdMode::ALL {
            let sel: Vec<_> = records
                .iter()
                .filter(|r| !matches!(r.class, Classification::Check | Classification::Discard))
                .filter(|r| bd_mode(&r.bases) == Some(mode))
                .cloned()
                .collect();
            if sel.is_empty() {
                continue;
            }
            let class = sel[0].class.as_str();
            let (keys, secrets) = extract_bd(&sel, mode)?;
            rows.extend(keys.iter().map(|k| key_row(k, class, Some(mode.as_str()), total)));
            rows.extend(secrets.iter().map(|s| secret_row(s, class, total)));
        }
        return Ok(rows);
    }
    for class in classes_present(records, Classification::is_key) {
        let sel: Vec<_> = records.iter().filter(|r| r.class == class).cloned().collect();
        for k in extract_layer_keys(&sel, protocol)? {
            if !k.is_empty() {
                rows.push(key_row(&k, class.as_str(), None, total));
            }
        }
    }
    if protocol == ProtocolId::CSskd {
        for s in extract_csskd_secrets(records)? {
            if !s.is_empty() {
                rows.push(secret_row(&s, Classification::Secret.as_str(), total));
            }
        }
    }
    Ok(rows)
}

/// Fraction of rounds where a layer's participants disagree, computed
/// over the given rounds whatever their class. L1 compares the two's-place
/// bits of Alice and Bob₁; L2 compares the unit's-place bits with Bob₂'s
/// outcome; `All` compares the three c-SSKD symbols.
pub fn disagreement<'a>(records: impl IntoIterator<Item = &'a RoundRecord>, layer: Layer) -> Result<f64> {
    let (mut n, mut bad) = (0usize, 0usize);
    for r in records {
        let differs = match layer {
            Layer::L1 => {
                let (a, _) = binary_decompose(r.outcome(0))?;
                let (b, _) = binary_decompose(r.outcome(1))?;
                a != b
            }
            Layer::L2 => {
                let (_, a) = binary_decompose(r.outcome(0))?;
                let (_, b) = binary_decompose(r.outcome(1))?;
                a != b || a != r.outcome(2)
            }
            Layer::All => r.outcome(0) != r.outcome(1) || r.outcome(1) != r.outcome(2),
            Layer::AliceBob => r.outcome(0) != r.outcome(2),
        };
        n += 1;
        bad += differs as usize;
    }
    Ok(per(bad as f64, n as f64))
}

/// Error fraction of a layer's sifted key strings.
pub fn qber(records: &[RoundRecord], protocol: ProtocolId, layer: Layer) -> Result<f64> {
    let keys = extract_layer_keys(records, protocol)?;
    let Some(k) = keys.iter().find(|k| k.layer == layer) else {
        return Ok(0.0);
    };
    if k.strings.iter().any(|s| s.len() != k.len()) {
        return Err(AnalysisError::LengthMismatch(layer));
    }
    Ok(per(k.mismatches() as f64, k.len() as f64))
}
