//! Basis sifting and check-round diversion.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{bd_mode, ActionClass, Basis, BdMode, Classification, ProtocolError, ProtocolId, Result, RoundRecord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftParams {
    pub check_fraction: f64,
    /// Session seed; the diversion shuffle derives its own generator.
    pub seed: u64,
}

const DIVERSION_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Classification from the public announcements alone.
pub fn classify(r: &RoundRecord) -> Classification {
    use Classification as C;
    let b = r.bases;
    match r.protocol {
        ProtocolId::P1 | ProtocolId::P3 => match b {
            [Some(Basis::Comp), Some(Basis::Comp), Some(Basis::Comp)] => C::KeyAll,
            [Some(Basis::Conj), Some(Basis::Conj), Some(Basis::Conj)] => C::Check,
            _ => C::Discard,
        },
        ProtocolId::P2 | ProtocolId::P4 => {
            if b[0] != b[1] {
                C::Discard
            } else if b[0] == b[2] {
                C::KeyAll
            } else {
                C::KeyL1
            }
        }
        ProtocolId::CSskd => match r.action.map(|a| a.class()) {
            Some(ActionClass::ConjugateCheck) => C::Check,
            Some(ActionClass::Decoy) => C::Decoy,
            Some(ActionClass::Secret) if b[0] == b[2] => C::Secret,
            Some(ActionClass::Key) if b[0] == Some(Basis::Conj) && b[2] == Some(Basis::Conj) => {
                C::KeyAll
            }
            _ => C::Discard,
        },
        ProtocolId::BdSsskd => match bd_mode(&b) {
            Some(BdMode::CcC) => C::KeyAll,
            Some(BdMode::JjJ) => C::Secret,
            Some(BdMode::CcJ) => C::KeyL1,
            Some(BdMode::JjC) => C::SecretL1,
            None => C::Discard,
        },
    }
}

fn stratum_code(r: &RoundRecord) -> u64 {
    let class = Classification::ALL
        .iter()
        .position(|c| *c == r.class)
        .expect("known class") as u64;
    let bases = r.bases.iter().fold(0u64, |acc, b| {
        acc * 3
            + match b {
                None => 0,
                Some(Basis::Comp) => 1,
                Some(Basis::Conj) => 2,
            }
    });
    let action = r.action.map_or(0, |a| a.class() as u64 + 1);
    (class << 16) | (action << 8) | bases
}

/// Classifies every record, then moves `round(f·n)` rounds of each key or
/// secret stratum (same class, bases, and announced action) to `check`.
pub fn sift(records: &mut [RoundRecord], params: &SiftParams) -> Result<()> {
    if records.is_empty() {
        return Err(ProtocolError::EmptyRecords);
    }
    let mut strata: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter_mut().enumerate() {
        r.class = classify(r);
        if r.class.is_key() || r.class.is_secret() {
            strata.entry(stratum_code(r)).or_default().push(i);
        }
    }
    for (code, mut members) in strata {
        let take = (params.check_fraction * members.len() as f64).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ DIVERSION_SALT);
        rng.set_stream(code);
        members.shuffle(&mut rng);
        for &i in &members[..take] {
            records[i].class = Classification::Check;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{CharlieAction, Session, SessionConfig};

    fn record(protocol: ProtocolId, bases: [Option<Basis>; 3], action: Option<CharlieAction>) -> RoundRecord {
        RoundRecord {
            round: 0,
            protocol,
            bases,
            action,
            outcomes: [Some(0); 3],
            decoy: None,
            class: Classification::Pending,
        }
    }

    const C: Option<Basis> = Some(Basis::Comp);
    const J: Option<Basis> = Some(Basis::Conj);

    #[test]
    fn classification_rules() {
        assert_eq!(classify(&record(ProtocolId::BdSsskd, [C, J, C], None)), Classification::Discard);
        assert_eq!(classify(&record(ProtocolId::BdSsskd, [J, J, C], None)), Classification::SecretL1);
        assert_eq!(classify(&record(ProtocolId::P1, [C, C, C], None)), Classification::KeyAll);
        assert_eq!(classify(&record(ProtocolId::P1, [J, J, J], None)), Classification::Check);
        assert_eq!(classify(&record(ProtocolId::P3, [J, C, J], None)), Classification::Discard);
        assert_eq!(classify(&record(ProtocolId::P2, [J, J, C], None)), Classification::KeyL1);
        assert_eq!(classify(&record(ProtocolId::P4, [C, J, C], None)), Classification::Discard);
        assert_eq!(
            classify(&record(ProtocolId::CSskd, [C, C, J], Some(CharlieAction::Key(2)))),
            Classification::Discard
        );
        assert_eq!(
            classify(&record(ProtocolId::CSskd, [J, C, J], Some(CharlieAction::Key(2)))),
            Classification::KeyAll
        );
        assert_eq!(
            classify(&record(ProtocolId::CSskd, [C, C, C], Some(CharlieAction::Secret))),
            Classification::Secret
        );
        assert_eq!(
            classify(&record(ProtocolId::CSskd, [J, J, C], Some(CharlieAction::Secret))),
            Classification::Discard
        );
    }

    #[test]
    fn empty_is_error() {
        let params = SiftParams { check_fraction: 0.2, seed: 0 };
        assert_eq!(sift(&mut [], &params), Err(ProtocolError::EmptyRecords));
    }

    #[test]
    fn diversion_is_stratified() {
        let s = Session::new(SessionConfig::new(ProtocolId::BdSsskd, 8000, 4)).unwrap();
        let mut records = s.run(1).unwrap();
        let params = SiftParams { check_fraction: 0.25, seed: 4 };
        sift(&mut records, &params).unwrap();
        let mut per: BTreeMap<[Option<Basis>; 3], (usize, usize)> = BTreeMap::new();
        for r in &records {
            if r.class == Classification::Discard {
                continue;
            }
            let e = per.entry(r.bases).or_default();
            e.0 += 1;
            e.1 += (r.class == Classification::Check) as usize;
        }
        assert_eq!(per.len(), 4);
        for (n, checks) in per.values() {
            assert_eq!(*checks, (0.25 * *n as f64).round() as usize);
        }
        let mut again = s.run(1).unwrap();
        sift(&mut again, &params).unwrap();
        assert_eq!(again, records);
    }
}
