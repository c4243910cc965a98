use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::state::unflatten;
use super::{BasisSet, PureState, QuditError, Result};

/// Probabilities at or below this are treated as outside the support.
pub const SUPPORT_TOLERANCE: f64 = 1e-14;

/// Exact joint outcome probabilities for one basis assignment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DistributionTable {
    /// Basis tag per subsystem (or per party for party-level tables).
    pub bases: Vec<String>,
    probs: BTreeMap<Vec<usize>, f64>,
}

impl DistributionTable {
    pub fn new(bases: Vec<String>) -> Self {
        DistributionTable {
            bases,
            probs: BTreeMap::new(),
        }
    }

    pub fn from_map(bases: Vec<String>, probs: BTreeMap<Vec<usize>, f64>) -> Self {
        DistributionTable { bases, probs }
    }

    /// Adds `p` to the entry for `outcome`.
    pub fn add(&mut self, outcome: Vec<usize>, p: f64) {
        *self.probs.entry(outcome).or_insert(0.0) += p;
    }

    pub fn probability(&self, outcome: &[usize]) -> f64 {
        self.probs.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, f64)> {
        self.probs.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Outcomes with probability above [`SUPPORT_TOLERANCE`].
    pub fn support(&self) -> Vec<Vec<usize>> {
        self.probs
            .iter()
            .filter(|(_, &p)| p > SUPPORT_TOLERANCE)
            .map(|(k, _)| k.clone())
            .collect()
    }

    /// Drops entries at or below [`SUPPORT_TOLERANCE`].
    pub fn pruned(mut self) -> Self {
        self.probs.retain(|_, p| *p > SUPPORT_TOLERANCE);
        self
    }

    /// Marginal distribution of position `k` of the outcome tuple.
    pub fn marginal(&self, k: usize) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (o, p) in &self.probs {
            *out.entry(o[k]).or_insert(0.0) += p;
        }
        out
    }

    /// Pushes every outcome through `f`, merging collisions.
    pub fn map_outcomes(&self, bases: Vec<String>, mut f: impl FnMut(&[usize]) -> Vec<usize>) -> Self {
        let mut out = DistributionTable::new(bases);
        for (o, p) in &self.probs {
            out.add(f(o), *p);
        }
        out
    }

    /// Adds `weight · other` into `self`.
    pub fn accumulate(&mut self, other: &DistributionTable, weight: f64) {
        for (o, p) in &other.probs {
            self.add(o.clone(), weight * p);
        }
    }

    /// Total-variation distance `½ Σ |p − q|` over the union of supports.
    pub fn tv_distance(&self, other: &DistributionTable) -> f64 {
        let mut sum = 0.0;
        for (o, p) in &self.probs {
            sum += (p - other.probability(o)).abs();
        }
        for (o, q) in &other.probs {
            if !self.probs.contains_key(o) {
                sum += q.abs();
            }
        }
        0.5 * sum
    }
}

#[derive(Serialize, Deserialize)]
struct TableEntry {
    outcome: Vec<usize>,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    bases: Vec<String>,
    entries: Vec<TableEntry>,
}

impl Serialize for DistributionTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TableRepr {
            bases: self.bases.clone(),
            entries: self
                .probs
                .iter()
                .map(|(o, p)| TableEntry {
                    outcome: o.clone(),
                    p: *p,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DistributionTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = TableRepr::deserialize(deserializer)?;
        Ok(DistributionTable {
            bases: repr.bases,
            probs: repr.entries.into_iter().map(|e| (e.outcome, e.p)).collect(),
        })
    }
}

fn check_bases(s: &PureState, bases: &[&BasisSet]) -> Result<()> {
    if bases.len() != s.num_subsystems() {
        return Err(QuditError::DimensionMismatch(format!(
            "{} bases for {} subsystems",
            bases.len(),
            s.num_subsystems()
        )));
    }
    for (k, (b, d)) in bases.iter().zip(s.dims()).enumerate() {
        if b.dim() != *d {
            return Err(QuditError::DimensionMismatch(format!(
                "subsystem {k} has dimension {d}, basis has {}",
                b.dim()
            )));
        }
    }
    Ok(())
}

// new[o, x, r] = Σ_i bras[x][i] · old[o, i, r]
fn apply_axis(amps: &[Complex64], dims: &[usize], axis: usize, bras: &[Complex64]) -> Vec<Complex64> {
    let d = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer = amps.len() / (d * inner);
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for o in 0..outer {
        let base = o * d * inner;
        for x in 0..d {
            let row = &bras[x * d..(x + 1) * d];
            let dst = &mut out[base + x * inner..base + (x + 1) * inner];
            for (i, &m) in row.iter().enumerate() {
                if m.re == 0.0 && m.im == 0.0 {
                    continue;
                }
                let src = &amps[base + i * inner..base + (i + 1) * inner];
                for (t, s) in dst.iter_mut().zip(src) {
                    *t += m * s;
                }
            }
        }
    }
    out
}

fn product_basis_amplitudes(s: &PureState, bases: &[&BasisSet]) -> Vec<Complex64> {
    let mut amps = s.amplitudes().to_vec();
    for (axis, b) in bases.iter().enumerate() {
        if !b.is_computational() {
            amps = apply_axis(&amps, s.dims(), axis, b.bras());
        }
    }
    amps
}

/// Flat Born-rule probabilities in the product basis, row-major like the
/// state's amplitudes.
pub fn born_probabilities(s: &PureState, bases: &[&BasisSet]) -> Result<Vec<f64>> {
    check_bases(s, bases)?;
    Ok(product_basis_amplitudes(s, bases)
        .iter()
        .map(|a| a.norm_sqr())
        .collect())
}

/// Exact outcome distribution of measuring every subsystem in its basis.
pub fn joint_distribution(s: &PureState, bases: &[&BasisSet]) -> Result<DistributionTable> {
    let probs = born_probabilities(s, bases)?;
    let mut table = DistributionTable::new(bases.iter().map(|b| b.kind().to_string()).collect());
    for (flat, p) in probs.into_iter().enumerate() {
        if p > SUPPORT_TOLERANCE {
            table.add(unflatten(s.dims(), flat), p);
        }
    }
    Ok(table)
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}

fn product_vector(bases: &[&BasisSet], outcome: &[usize]) -> Vec<Complex64> {
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for (b, &o) in bases.iter().zip(outcome) {
        let v = b.vector(o);
        amps = amps
            .iter()
            .flat_map(|a| v.iter().map(move |x| a * x))
            .collect();
    }
    amps
}

/// Samples a full measurement by the Born rule. The collapsed state is the
/// product basis vector of the outcome.
pub fn measure<R: Rng + ?Sized>(
    s: &PureState,
    bases: &[&BasisSet],
    rng: &mut R,
) -> Result<(Vec<usize>, PureState)> {
    let probs = born_probabilities(s, bases)?;
    let outcome = unflatten(s.dims(), sample_index(&probs, rng));
    let collapsed = PureState::from_parts_unchecked(
        s.dims().to_vec(),
        product_vector(bases, &outcome),
        s.labels().to_vec(),
    );
    Ok((outcome, collapsed))
}

fn check_subsystem(s: &PureState, subsystem: usize, basis: &BasisSet) -> Result<()> {
    match s.dims().get(subsystem) {
        None => Err(QuditError::DimensionMismatch(format!(
            "subsystem {subsystem} of {}",
            s.num_subsystems()
        ))),
        Some(&d) if d != basis.dim() => Err(QuditError::DimensionMismatch(format!(
            "subsystem {subsystem} has dimension {d}, basis has {}",
            basis.dim()
        ))),
        Some(_) => Ok(()),
    }
}

// Per-outcome branch weights for one subsystem, plus the rotated amplitudes
// they came from.
fn subsystem_branches(s: &PureState, subsystem: usize, basis: &BasisSet) -> (Vec<f64>, Vec<Complex64>) {
    let rotated = apply_axis(s.amplitudes(), s.dims(), subsystem, basis.bras());
    let d = basis.dim();
    let inner: usize = s.dims()[subsystem + 1..].iter().product();
    let mut weights = vec![0.0; d];
    for (flat, a) in rotated.iter().enumerate() {
        weights[(flat / inner) % d] += a.norm_sqr();
    }
    (weights, rotated)
}

fn collapse_branch(
    s: &PureState,
    subsystem: usize,
    basis: &BasisSet,
    outcome: usize,
    weight: f64,
    rotated: &[Complex64],
) -> PureState {
    let d = basis.dim();
    let inner: usize = s.dims()[subsystem + 1..].iter().product();
    let outer = s.len() / (d * inner);
    let scale = 1.0 / weight.sqrt();
    let ket = basis.vector(outcome);
    let mut amps = vec![Complex64::new(0.0, 0.0); s.len()];
    for o in 0..outer {
        let base = o * d * inner;
        let branch = &rotated[base + outcome * inner..base + (outcome + 1) * inner];
        for (i, k) in ket.iter().enumerate() {
            let dst = &mut amps[base + i * inner..base + (i + 1) * inner];
            for (t, b) in dst.iter_mut().zip(branch) {
                *t = k * b * scale;
            }
        }
    }
    PureState::from_parts_unchecked(s.dims().to_vec(), amps, s.labels().to_vec())
}

/// Projects one subsystem onto `basis[outcome]`. Returns the branch
/// probability and the renormalized post-measurement state; a zero-weight
/// branch is an error.
pub fn project_subsystem(
    s: &PureState,
    subsystem: usize,
    basis: &BasisSet,
    outcome: usize,
) -> Result<(f64, PureState)> {
    check_subsystem(s, subsystem, basis)?;
    if outcome >= basis.dim() {
        return Err(QuditError::IndexOutOfRange {
            index: vec![outcome],
            dims: vec![basis.dim()],
        });
    }
    let (weights, rotated) = subsystem_branches(s, subsystem, basis);
    let w = weights[outcome];
    if w <= SUPPORT_TOLERANCE {
        return Err(QuditError::ZeroProbability { subsystem, outcome });
    }
    Ok((w, collapse_branch(s, subsystem, basis, outcome, w, &rotated)))
}

/// Samples a measurement of one subsystem and collapses the state.
pub fn measure_subsystem<R: Rng + ?Sized>(
    s: &PureState,
    subsystem: usize,
    basis: &BasisSet,
    rng: &mut R,
) -> Result<(usize, PureState)> {
    check_subsystem(s, subsystem, basis)?;
    let (weights, rotated) = subsystem_branches(s, subsystem, basis);
    let outcome = sample_index(&weights, rng);
    let collapsed = collapse_branch(s, subsystem, basis, outcome, weights[outcome], &rotated);
    Ok((outcome, collapsed))
}

/// Branch weights of measuring one subsystem, without collapsing.
pub(crate) fn subsystem_weights(s: &PureState, subsystem: usize, basis: &BasisSet) -> Result<Vec<f64>> {
    check_subsystem(s, subsystem, basis)?;
    Ok(subsystem_branches(s, subsystem, basis).0)
}
