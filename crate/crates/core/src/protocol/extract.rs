//! Key and secret extraction from sifted rounds.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Basis, Classification, ProtocolError, ProtocolId, Result, RoundRecord};

/// `symbol = 2·hi + lo`.
pub fn binary_decompose(symbol: u8) -> Result<(u8, u8)> {
    if symbol > 3 {
        return Err(ProtocolError::OutOfRange(symbol));
    }
    Ok((symbol >> 1, symbol & 1))
}

pub fn extract_secret_mod4(a: u8, b: u8) -> Result<u8> {
    for x in [a, b] {
        if x > 3 {
            return Err(ProtocolError::OutOfRange(x));
        }
    }
    Ok((a + b) % 4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Layer {
    L1,
    L2,
    /// All three parties (c-SSKD key).
    #[serde(rename = "all")]
    All,
    /// Alice and Bob (c-SSKD secret).
    #[serde(rename = "alice-bob")]
    AliceBob,
}

impl Layer {
    pub fn as_str(self) -> &'static str {
        match self {
            Layer::L1 => "L1",
            Layer::L2 => "L2",
            Layer::All => "all",
            Layer::AliceBob => "alice-bob",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The four bd-SSSKD task modes, named by (Alice/Bob₁ basis, Bob₂ basis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BdMode {
    #[serde(rename = "CC-C")]
    CcC,
    #[serde(rename = "JJ-J")]
    JjJ,
    #[serde(rename = "CC-J")]
    CcJ,
    #[serde(rename = "JJ-C")]
    JjC,
}

impl BdMode {
    pub const ALL: [BdMode; 4] = [BdMode::CcC, BdMode::JjJ, BdMode::CcJ, BdMode::JjC];

    pub fn as_str(self) -> &'static str {
        match self {
            BdMode::CcC => "CC-C",
            BdMode::JjJ => "JJ-J",
            BdMode::CcJ => "CC-J",
            BdMode::JjC => "JJ-C",
        }
    }
}

impl fmt::Display for BdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mode of a bd-SSSKD round; `None` when Alice and Bob₁ disagree on basis.
pub fn bd_mode(bases: &[Option<Basis>; 3]) -> Option<BdMode> {
    use Basis::{Comp, Conj};
    match *bases {
        [Some(Comp), Some(Comp), Some(Comp)] => Some(BdMode::CcC),
        [Some(Conj), Some(Conj), Some(Conj)] => Some(BdMode::JjJ),
        [Some(Comp), Some(Comp), Some(Conj)] => Some(BdMode::CcJ),
        [Some(Conj), Some(Conj), Some(Comp)] => Some(BdMode::JjC),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyMaterial {
    pub layer: Layer,
    pub parties: Vec<String>,
    pub rounds: Vec<u64>,
    /// One symbol string per party, aligned with `rounds`.
    pub strings: Vec<Vec<u8>>,
    pub alphabet: u8,
}

fn bits_per_symbol(alphabet: u8) -> usize {
    (alphabet as f64).log2().ceil().max(1.0) as usize
}

/// Packs symbols MSB first at `ceil(log2 alphabet)` bits each; the last
/// byte is zero padded.
fn pack_hex(symbols: &[u8], alphabet: u8) -> String {
    let width = bits_per_symbol(alphabet);
    let mut bytes = Vec::with_capacity(symbols.len() * width / 8 + 1);
    let (mut acc, mut filled) = (0u8, 0usize);
    for &s in symbols {
        for bit in (0..width).rev() {
            acc = (acc << 1) | ((s >> bit) & 1);
            filled += 1;
            if filled == 8 {
                bytes.push(acc);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        bytes.push(acc << (8 - filled));
    }
    hex::encode(bytes)
}

impl KeyMaterial {
    fn new(layer: Layer, parties: &[&str], alphabet: u8) -> Self {
        KeyMaterial {
            layer,
            parties: parties.iter().map(|p| p.to_string()).collect(),
            rounds: Vec::new(),
            strings: vec![Vec::new(); parties.len()],
            alphabet,
        }
    }

    fn push(&mut self, round: u64, symbols: &[u8]) {
        self.rounds.push(round);
        for (s, &x) in self.strings.iter_mut().zip(symbols) {
            s.push(x);
        }
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn hex(&self, party: usize) -> String {
        pack_hex(&self.strings[party], self.alphabet)
    }

    /// Positions where some participant differs from the first.
    pub fn mismatches(&self) -> usize {
        (0..self.len())
            .filter(|&i| self.strings.iter().any(|s| s[i] != self.strings[0][i]))
            .count()
    }

    pub fn bits(&self) -> f64 {
        self.len() as f64 * (self.alphabet as f64).log2()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretMaterial {
    pub layer: Layer,
    /// Sub-population tag, e.g. the basis of a c-SSKD secret round.
    pub subpopulation: String,
    pub rounds: Vec<u64>,
    pub symbols: Vec<u8>,
    /// Share holders and their contributed shares, aligned with `rounds`.
    pub parties: Vec<String>,
    pub shares: Vec<Vec<u8>>,
    /// Value a third party is claimed to hold equal to the secret.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_equal: Option<Vec<u8>>,
    pub alphabet: u8,
}

impl SecretMaterial {
    fn new(layer: Layer, subpopulation: &str, parties: &[&str], alphabet: u8, claimed: bool) -> Self {
        SecretMaterial {
            layer,
            subpopulation: subpopulation.to_string(),
            rounds: Vec::new(),
            symbols: Vec::new(),
            parties: parties.iter().map(|p| p.to_string()).collect(),
            shares: vec![Vec::new(); parties.len()],
            claimed_equal: claimed.then(Vec::new),
            alphabet,
        }
    }

    fn push(&mut self, round: u64, symbol: u8, shares: &[u8], claimed: Option<u8>) {
        self.rounds.push(round);
        self.symbols.push(symbol);
        for (s, &x) in self.shares.iter_mut().zip(shares) {
            s.push(x);
        }
        if let (Some(c), Some(v)) = (self.claimed_equal.as_mut(), claimed) {
            c.push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Fraction of rounds where the claimed-equal value matches the secret.
    pub fn claim_agreement(&self) -> Option<f64> {
        let c = self.claimed_equal.as_ref()?;
        if c.is_empty() {
            return None;
        }
        let hits = c.iter().zip(&self.symbols).filter(|(a, b)| a == b).count();
        Some(hits as f64 / c.len() as f64)
    }

    pub fn hex(&self) -> String {
        pack_hex(&self.symbols, self.alphabet)
    }
}

const L1_PARTIES: [&str; 2] = ["alice", "bob1"];
const L2_PARTIES: [&str; 3] = ["alice", "bob1", "bob2"];

/// Layer keys from key-classified rounds. For the layered protocols and
/// bd-SSSKD the two's-place bits of Alice and Bob₁ form the L1 key and the
/// unit's-place bits with Bob₂'s bit form the L2 key (`key_all` feeds
/// both, `key_L1` only L1). For c-SSKD every party holds Charlie's index.
pub fn extract_layer_keys(records: &[RoundRecord], protocol: ProtocolId) -> Result<Vec<KeyMaterial>> {
    let keyed = records.iter().filter(|r| r.protocol == protocol && r.class.is_key());
    if protocol == ProtocolId::CSskd {
        let mut key = KeyMaterial::new(Layer::All, &["alice", "charlie", "bob"], 3);
        for r in keyed {
            key.push(r.round, &[r.outcome(0), r.outcome(1), r.outcome(2)]);
        }
        return Ok(vec![key]);
    }
    let mut l1 = KeyMaterial::new(Layer::L1, &L1_PARTIES, 2);
    let mut l2 = KeyMaterial::new(Layer::L2, &L2_PARTIES, 2);
    for r in keyed {
        let (a1, a0) = binary_decompose(r.outcome(0))?;
        let (b1, b0) = binary_decompose(r.outcome(1))?;
        if matches!(r.class, Classification::KeyAll | Classification::KeyL1) {
            l1.push(r.round, &[a1, b1]);
        }
        if matches!(r.class, Classification::KeyAll | Classification::KeyL2) {
            l2.push(r.round, &[a0, b0, r.outcome(2)]);
        }
    }
    Ok(vec![l1, l2])
}

/// c-SSKD secrets `s = a ⊕₄ b`, split by the common basis of Alice and Bob.
pub fn extract_csskd_secrets(records: &[RoundRecord]) -> Result<Vec<SecretMaterial>> {
    let mut comp = SecretMaterial::new(Layer::AliceBob, "comp", &["alice", "bob"], 4, false);
    let mut conj = SecretMaterial::new(Layer::AliceBob, "conj", &["alice", "bob"], 4, false);
    for r in records.iter().filter(|r| r.class == Classification::Secret) {
        let (a, b) = (r.outcome(0), r.outcome(2));
        let s = extract_secret_mod4(a, b)?;
        match r.bases[0] {
            Some(Basis::Comp) => comp.push(r.round, s, &[a, b], None),
            _ => conj.push(r.round, s, &[a, b], None),
        }
    }
    Ok(vec![comp, conj])
}

/// Mode-specific bd-SSSKD extraction. Every record must belong to `mode`.
///
/// * CC-C: keys in both layers.
/// * JJ-J: `s₁ = a₁⊕b₁₁`, `s₂ = a₀⊕b₁₀⊕b₂`.
/// * CC-J: L1 key `a₁`; claimed L2 secret `a₀⊕b₁₀` recorded against `b₂`.
/// * JJ-C: L1 secret `a₀⊕b₁₀`; L2 secret `a₁⊕b₁₁` recorded against `b₂`.
pub fn extract_bd(records: &[RoundRecord], mode: BdMode) -> Result<(Vec<KeyMaterial>, Vec<SecretMaterial>)> {
    let tag = mode.as_str();
    let mut keys = Vec::new();
    let mut secrets = Vec::new();
    let mut l1_key = KeyMaterial::new(Layer::L1, &L1_PARTIES, 2);
    let mut l2_key = KeyMaterial::new(Layer::L2, &L2_PARTIES, 2);
    let mut s1 = SecretMaterial::new(Layer::L1, tag, &L1_PARTIES, 2, false);
    let mut s2 = match mode {
        BdMode::JjJ => SecretMaterial::new(Layer::L2, tag, &L2_PARTIES, 2, false),
        _ => SecretMaterial::new(Layer::L2, tag, &L1_PARTIES, 2, true),
    };
    for r in records {
        if r.protocol != ProtocolId::BdSsskd || bd_mode(&r.bases) != Some(mode) {
            return Err(ProtocolError::ModeMismatch { round: r.round, mode });
        }
        let (a1, a0) = binary_decompose(r.outcome(0))?;
        let (b1, b0) = binary_decompose(r.outcome(1))?;
        let b2 = r.outcome(2);
        match mode {
            BdMode::CcC => {
                l1_key.push(r.round, &[a1, b1]);
                l2_key.push(r.round, &[a0, b0, b2]);
            }
            BdMode::JjJ => {
                s1.push(r.round, a1 ^ b1, &[a1, b1], None);
                s2.push(r.round, a0 ^ b0 ^ b2, &[a0, b0, b2], None);
            }
            BdMode::CcJ => {
                l1_key.push(r.round, &[a1, b1]);
                s2.push(r.round, a0 ^ b0, &[a0, b0], Some(b2));
            }
            BdMode::JjC => {
                s1.push(r.round, a0 ^ b0, &[a0, b0], None);
                s2.push(r.round, a1 ^ b1, &[a1, b1], Some(b2));
            }
        }
    }
    match mode {
        BdMode::CcC => keys.extend([l1_key, l2_key]),
        BdMode::JjJ | BdMode::JjC => secrets.extend([s1, s2]),
        BdMode::CcJ => {
            keys.push(l1_key);
            secrets.push(s2);
        }
    }
    Ok((keys, secrets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const C: Option<Basis> = Some(Basis::Comp);
    const J: Option<Basis> = Some(Basis::Conj);

    fn bd(bases: [Option<Basis>; 3], outcomes: [u8; 3], class: Classification) -> RoundRecord {
        RoundRecord {
            round: 7,
            protocol: ProtocolId::BdSsskd,
            bases,
            action: None,
            outcomes: outcomes.map(Some),
            decoy: None,
            class,
        }
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(binary_decompose(3).unwrap(), (1, 1));
        assert_eq!(binary_decompose(0).unwrap(), (0, 0));
        assert_eq!(binary_decompose(2).unwrap(), (1, 0));
        assert_eq!(binary_decompose(4), Err(ProtocolError::OutOfRange(4)));
    }

    #[test]
    fn mod4_examples() {
        assert_eq!(extract_secret_mod4(3, 3).unwrap(), 2);
        assert_eq!(extract_secret_mod4(0, 0).unwrap(), 0);
        assert_eq!(extract_secret_mod4(1, 2).unwrap(), 3);
        assert!(extract_secret_mod4(4, 0).is_err());
    }

    #[test]
    fn layer_keys_from_table_rows() {
        let recs = [
            bd([C, C, C], [2, 2, 0], Classification::KeyAll),
            bd([C, C, C], [1, 1, 1], Classification::KeyAll),
        ];
        let keys = extract_layer_keys(&recs, ProtocolId::BdSsskd).unwrap();
        assert_eq!(keys[0].strings, vec![vec![1, 0], vec![1, 0]]);
        assert_eq!(keys[1].strings, vec![vec![0, 1], vec![0, 1], vec![0, 1]]);
        assert_eq!(keys[0].mismatches(), 0);
        assert_eq!(keys[0].hex(0), "80");
    }

    #[test]
    fn bd_modes() {
        let (_, s) = extract_bd(&[bd([J, J, C], [3, 0, 1], Classification::SecretL1)], BdMode::JjC).unwrap();
        assert_eq!(s[0].symbols, vec![1]);
        assert_eq!(s[1].symbols, vec![1]);
        assert_eq!(s[1].claimed_equal, Some(vec![1]));
        assert_eq!(s[1].claim_agreement(), Some(1.0));

        let (_, s) = extract_bd(&[bd([J, J, J], [2, 1, 0], Classification::Secret)], BdMode::JjJ).unwrap();
        assert_eq!((s[0].symbols[0], s[1].symbols[0]), (1, 1));

        for b2 in [0, 1] {
            let (k, s) = extract_bd(&[bd([C, C, J], [1, 1, b2], Classification::KeyL1)], BdMode::CcJ).unwrap();
            assert_eq!(k[0].strings[0], vec![0]);
            assert_eq!(s[0].symbols, vec![0]);
        }

        let err = extract_bd(&[bd([C, J, C], [0, 0, 0], Classification::Discard)], BdMode::CcC);
        assert_eq!(err, Err(ProtocolError::ModeMismatch { round: 7, mode: BdMode::CcC }));
    }

    #[test]
    fn hex_packing() {
        assert_eq!(pack_hex(&[1, 0, 1, 1, 0, 0, 0, 1, 1], 2), "b180");
        // base-3 symbols use two bits each
        assert_eq!(pack_hex(&[2, 1, 0, 2], 3), "92");
        assert_eq!(pack_hex(&[3, 0], 4), "c0");
        assert_eq!(pack_hex(&[], 2), "");
    }

    proptest! {
        #[test]
        fn decompose_recomposes(s in 0u8..4) {
            let (hi, lo) = binary_decompose(s).unwrap();
            prop_assert_eq!(2 * hi + lo, s);
        }

        #[test]
        fn mod4_is_commutative_group_op(a in 0u8..4, b in 0u8..4) {
            let s = extract_secret_mod4(a, b).unwrap();
            prop_assert!(s < 4);
            prop_assert_eq!(s, extract_secret_mod4(b, a).unwrap());
            prop_assert_eq!(extract_secret_mod4(s, (4 - b) % 4).unwrap(), a);
        }
    }
}
