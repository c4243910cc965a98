//! Exact no-Eve outcome laws for the public check groups.
//!
//! A check group is what the parties can condition on after the
//! announcements: the basis choices and, in c-SSKD, Charlie's announced
//! action class. Hidden choices (Charlie's key index, Alice's prepared
//! symbol, decoy symbols) are mixed out with their prior weights.

use std::fmt;

use super::session::{Engine, Scenario};
use super::{ActionClass, Basis, CharlieAction, Classification, ProtocolError, ProtocolId, Result, RoundRecord, SessionConfig};
use crate::qudit::DistributionTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckKey {
    Bases {
        action: Option<ActionClass>,
        bases: [Option<Basis>; 3],
    },
    /// Decoy pulses received by `party` and measured in the pulse basis.
    /// Outcomes are `(prepared, measured)`.
    Decoy { party: usize, basis: Basis },
}

impl fmt::Display for CheckKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckKey::Bases { action, bases } => {
                if let Some(a) = action {
                    write!(f, "{a}|")?;
                }
                let names: Vec<_> = bases
                    .iter()
                    .map(|b| b.map_or("-", Basis::as_str))
                    .collect();
                f.write_str(&names.join(","))
            }
            CheckKey::Decoy { party, basis } => {
                let name = ProtocolId::CSskd.party_names()[*party];
                write!(f, "decoy:{name}:{basis}")
            }
        }
    }
}

/// The (group, outcome) pairs a sifted record contributes to the
/// eavesdropping check.
pub fn observations(r: &RoundRecord) -> Vec<(CheckKey, Vec<usize>)> {
    match r.class {
        Classification::Check => vec![(
            CheckKey::Bases {
                action: r.action.map(CharlieAction::class),
                bases: r.bases,
            },
            r.outcomes.iter().flatten().map(|&o| o as usize).collect(),
        )],
        Classification::Decoy => r
            .decoy
            .iter()
            .flatten()
            .filter(|p| r.bases[p.target] == Some(p.basis))
            .filter_map(|p| {
                let measured = r.outcomes[p.target]?;
                Some((
                    CheckKey::Decoy {
                        party: p.target,
                        basis: p.basis,
                    },
                    vec![p.symbol as usize, measured as usize],
                ))
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// Exact laws under an identity channel for one configuration.
#[derive(Debug, Clone)]
pub struct Oracle {
    engine: Engine,
}

impl Oracle {
    pub fn new(config: &SessionConfig) -> Result<Self> {
        config.validate()?;
        Ok(Oracle {
            engine: Engine::new(config, false)?,
        })
    }

    fn mix(&self, labels: Vec<String>, parts: &[(f64, Scenario)], project: impl Fn([u8; 3]) -> Vec<usize>) -> DistributionTable {
        let mut table = DistributionTable::new(labels);
        for (w, scenario) in parts {
            for (o, p) in self.engine.law(scenario).iter() {
                table.add(project(o), w * p);
            }
        }
        table.pruned()
    }

    pub fn table(&self, key: &CheckKey) -> Result<DistributionTable> {
        let protocol = self.engine.protocol();
        match *key {
            CheckKey::Bases { action, bases } => {
                let full = match bases {
                    [Some(a), Some(b), Some(c)] => [a, b, c],
                    _ => return Err(ProtocolError::Config(format!("check group {key} lacks a basis"))),
                };
                let labels = full.iter().map(|b| b.to_string()).collect();
                let parts: Vec<(f64, Scenario)> = match (protocol, action) {
                    (ProtocolId::CSskd, Some(ActionClass::Key)) => (0..3)
                        .map(|i| {
                            let action = Some(CharlieAction::Key(i));
                            (1.0 / 3.0, Scenario::Shared { action, bases: full })
                        })
                        .collect(),
                    (ProtocolId::CSskd, Some(ActionClass::Secret)) => vec![(
                        1.0,
                        Scenario::Shared { action: Some(CharlieAction::Secret), bases: full },
                    )],
                    (ProtocolId::CSskd, Some(ActionClass::ConjugateCheck)) => vec![(
                        1.0,
                        Scenario::Shared { action: Some(CharlieAction::ConjugateCheck), bases: full },
                    )],
                    (ProtocolId::P2 | ProtocolId::P4, None) => (0..4)
                        .map(|symbol| (0.25, Scenario::Prepared { symbol, bases: full }))
                        .collect(),
                    (ProtocolId::P1 | ProtocolId::P3 | ProtocolId::BdSsskd, None) => {
                        vec![(1.0, Scenario::Shared { action: None, bases: full })]
                    }
                    _ => {
                        return Err(ProtocolError::Config(format!(
                            "check group {key} does not occur in {protocol}"
                        )))
                    }
                };
                Ok(self.mix(labels, &parts, |o| o.iter().map(|&x| x as usize).collect()))
            }
            CheckKey::Decoy { party, basis } => {
                if protocol != ProtocolId::CSskd || !(party == 0 || party == 2) {
                    return Err(ProtocolError::Config(format!("check group {key} does not occur in {protocol}")));
                }
                let idle = (Basis::Comp, 0u8);
                let parts: Vec<(f64, Scenario)> = (0..4u8)
                    .map(|k| {
                        let mine = (basis, k);
                        let (pulses, bases) = if party == 0 {
                            ([mine, idle], [basis, Basis::Comp])
                        } else {
                            ([idle, mine], [Basis::Comp, basis])
                        };
                        (0.25, Scenario::Decoy { pulses, bases })
                    })
                    .collect();
                let mut table = DistributionTable::new(vec![format!("decoy-{basis}"), basis.to_string()]);
                for (w, scenario) in &parts {
                    let Scenario::Decoy { pulses, .. } = scenario else { unreachable!() };
                    let k = pulses[if party == 0 { 0 } else { 1 }].1 as usize;
                    for (o, p) in self.engine.law(scenario).iter() {
                        table.add(vec![k, o[party] as usize], w * p);
                    }
                }
                Ok(table.pruned())
            }
        }
    }
}
