//! bd-SSSKD correlation tables checked against the exact oracle.
//!
//! Tuples are `(a, b₁, b₂)` with `a, b₁ ∈ 0..4` and `b₂ ∈ 0..2`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::qudit::{basis, builtin, joint_distribution, BasisKind, DistributionTable};

const EXACT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TableId {
    T3,
    T4,
    T5,
}

impl TableId {
    pub const ALL: [TableId; 3] = [TableId::T3, TableId::T4, TableId::T5];
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableId::T3 => "T3",
            TableId::T4 => "T4",
            TableId::T5 => "T5",
        })
    }
}

impl FromStr for TableId {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().trim_start_matches(['T', 't']) {
            "3" => Ok(TableId::T3),
            "4" => Ok(TableId::T4),
            "5" => Ok(TableId::T5),
            _ => Err(AnalysisError::UnknownTable(s.to_string())),
        }
    }
}

type Fx = fn(&[usize]) -> usize;

#[derive(Debug, Clone, Copy)]
enum RelationKind {
    /// `lhs(t) = rhs(t)` on every supported tuple.
    Equal(Fx, Fx),
    /// `P(x, y) = P(x)·P(y)` exactly.
    Independent(Fx, Fx),
}

/// A named claim about outcome tuples.
#[derive(Debug, Clone, Copy)]
pub struct Relation {
    pub name: &'static str,
    kind: RelationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationResult {
    pub name: String,
    pub holds: bool,
    /// Offending tuples (`Equal`) or offending `(x, y)` value pairs
    /// (`Independent`).
    pub counterexamples: Vec<Vec<usize>>,
}

impl Relation {
    fn evaluate(&self, table: &DistributionTable) -> RelationResult {
        let counterexamples = match self.kind {
            RelationKind::Equal(lhs, rhs) => table
                .iter()
                .filter(|(t, p)| *p > EXACT && lhs(t) != rhs(t))
                .map(|(t, _)| t.clone())
                .collect(),
            RelationKind::Independent(fx, fy) => {
                let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
                let mut px: BTreeMap<usize, f64> = BTreeMap::new();
                let mut py: BTreeMap<usize, f64> = BTreeMap::new();
                for (t, p) in table.iter() {
                    let (x, y) = (fx(t), fy(t));
                    *joint.entry((x, y)).or_default() += p;
                    *px.entry(x).or_default() += p;
                    *py.entry(y).or_default() += p;
                }
                let mut bad = Vec::new();
                for (&x, &p) in &px {
                    for (&y, &q) in &py {
                        let j = joint.get(&(x, y)).copied().unwrap_or(0.0);
                        if (j - p * q).abs() > EXACT {
                            bad.push(vec![x, y]);
                        }
                    }
                }
                bad
            }
        };
        RelationResult {
            name: self.name.to_string(),
            holds: counterexamples.is_empty(),
            counterexamples,
        }
    }
}

fn a(t: &[usize]) -> usize {
    t[0]
}
fn b1(t: &[usize]) -> usize {
    t[1]
}
fn b2(t: &[usize]) -> usize {
    t[2]
}
fn a_hi(t: &[usize]) -> usize {
    t[0] >> 1
}
fn a_lo(t: &[usize]) -> usize {
    t[0] & 1
}
fn b1_hi(t: &[usize]) -> usize {
    t[1] >> 1
}
fn lo_xor(t: &[usize]) -> usize {
    (t[0] ^ t[1]) & 1
}
fn hi_xor(t: &[usize]) -> usize {
    (t[0] ^ t[1]) >> 1
}
fn pair(t: &[usize]) -> usize {
    4 * t[0] + t[1]
}

#[derive(Debug, Clone)]
pub struct TableSpec {
    pub id: TableId,
    pub caption: &'static str,
    pub bases: [BasisKind; 3],
    pub claimed_support: Vec<Vec<usize>>,
    pub relations: Vec<Relation>,
    /// Oracle-side properties reported alongside, not claimed by the table.
    pub probes: Vec<Relation>,
}

impl TableSpec {
    pub fn builtin(id: TableId) -> Self {
        use BasisKind::{Computational as Comp, Fourier, Mub4};
        let rows = |v: &[[usize; 3]]| v.iter().map(|r| r.to_vec()).collect();
        match id {
            TableId::T3 => TableSpec {
                id,
                caption: "Correlations in the outcome of Alice, Bob1, and Bob2 in the computational basis",
                bases: [Comp, Comp, Comp],
                claimed_support: rows(&[[0, 0, 0], [1, 1, 1], [2, 2, 0], [3, 3, 1]]),
                relations: vec![
                    Relation { name: "a = b1", kind: RelationKind::Equal(a, b1) },
                    Relation { name: "b2 = a(0)", kind: RelationKind::Equal(b2, a_lo) },
                ],
                probes: vec![Relation {
                    name: "L1 key a(1) independent of b2",
                    kind: RelationKind::Independent(a_hi, b2),
                }],
            },
            TableId::T4 => TableSpec {
                id,
                caption: "Correlations in the outcome of Alice, and Bob1 choose the computational basis, and Bob2 choose the conjugate basis",
                bases: [Comp, Comp, Fourier],
                claimed_support: rows(&[
                    [0, 0, 0],
                    [1, 1, 0],
                    [2, 2, 0],
                    [3, 3, 0],
                    [0, 1, 1],
                    [1, 0, 1],
                    [2, 3, 1],
                    [3, 2, 1],
                ]),
                relations: vec![
                    Relation { name: "a(1) = b1(1)", kind: RelationKind::Equal(a_hi, b1_hi) },
                    Relation { name: "s = a(0) xor b1(0) = b2", kind: RelationKind::Equal(lo_xor, b2) },
                ],
                probes: vec![
                    Relation { name: "a = b1", kind: RelationKind::Equal(a, b1) },
                    Relation {
                        name: "b2 independent of (a, b1)",
                        kind: RelationKind::Independent(pair, b2),
                    },
                ],
            },
            TableId::T5 => TableSpec {
                id,
                caption: "Correlations in the outcomes when Alice and Bob1 choose the conjugate basis, and Bob2 choose the computational basis",
                bases: [Mub4, Mub4, Comp],
                claimed_support: rows(&[
                    [0, 0, 0],
                    [0, 1, 0],
                    [1, 0, 0],
                    [1, 1, 0],
                    [2, 2, 0],
                    [2, 3, 0],
                    [3, 2, 0],
                    [3, 3, 0],
                    [0, 2, 1],
                    [0, 3, 1],
                    [1, 2, 1],
                    [1, 3, 1],
                    [2, 1, 1],
                    [3, 0, 1],
                    [3, 1, 1],
                    [2, 0, 1],
                ]),
                relations: vec![
                    Relation { name: "s2 = a(1) xor b1(1) = b2", kind: RelationKind::Equal(hi_xor, b2) },
                    Relation {
                        name: "s1 = a(0) xor b1(0) independent of b2",
                        kind: RelationKind::Independent(lo_xor, b2),
                    },
                ],
                probes: vec![],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub table: TableId,
    pub caption: String,
    pub bases: Vec<String>,
    pub support_match: bool,
    pub relation_match: bool,
    pub relations: Vec<RelationResult>,
    pub findings: Vec<RelationResult>,
    pub distributions: DistributionTable,
    pub oracle_support: Vec<Vec<usize>>,
    pub claimed_support: Vec<Vec<usize>>,
    pub discrepancies: Vec<String>,
}

impl VerificationReport {
    pub fn is_consistent(&self) -> bool {
        self.support_match && self.relation_match
    }
}

fn tuple(t: &[usize]) -> String {
    let parts: Vec<_> = t.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Compares a table against the oracle for the bd-SSSKD resource. Claimed
/// relations are evaluated on the oracle distribution, not on the claimed
/// rows.
pub fn verify_table(spec: &TableSpec) -> VerificationReport {
    let state = builtin::eq8();
    let sets: Vec<_> = spec
        .bases
        .iter()
        .zip(state.dims())
        .map(|(&k, &d)| basis(k, d).expect("table basis"))
        .collect();
    let refs: Vec<_> = sets.iter().collect();
    let dist = joint_distribution(&state, &refs).expect("dims match");
    let oracle_support = dist.support();
    let mut claimed = spec.claimed_support.clone();
    claimed.sort();
    claimed.dedup();

    let mut discrepancies = Vec::new();
    for t in &claimed {
        if dist.probability(t) <= EXACT {
            discrepancies.push(format!("claimed outcome {} has oracle probability 0", tuple(t)));
        }
    }
    for t in &oracle_support {
        if claimed.binary_search(t).is_err() {
            discrepancies.push(format!(
                "oracle outcome {} (p = {}) is absent from the table",
                tuple(t),
                dist.probability(t)
            ));
        }
    }
    let relations: Vec<_> = spec.relations.iter().map(|r| r.evaluate(&dist)).collect();
    for r in relations.iter().filter(|r| !r.holds) {
        discrepancies.push(format!(
            "relation `{}` fails on {} oracle case(s)",
            r.name,
            r.counterexamples.len()
        ));
    }
    VerificationReport {
        table: spec.id,
        caption: spec.caption.to_string(),
        bases: spec.bases.iter().map(|b| b.to_string()).collect(),
        support_match: oracle_support == claimed,
        relation_match: relations.iter().all(|r| r.holds),
        findings: spec.probes.iter().map(|r| r.evaluate(&dist)).collect(),
        relations,
        distributions: dist,
        oracle_support,
        claimed_support: claimed,
        discrepancies,
    }
}
