use num_complex::Complex64;

use super::{QuditError, Result};

/// Normalized pure state over a register of qudits.
///
/// Amplitudes are stored row-major: the first subsystem is the most
/// significant digit of the flat index. `labels[k]` names the party holding
/// subsystem `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
    labels: Vec<usize>,
}

impl PureState {
    /// Builds a state from a full amplitude vector and normalizes it.
    /// Labels default to one party per subsystem.
    pub fn from_amplitudes(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        validate_dims(&dims)?;
        let expected: usize = dims.iter().product();
        if amps.len() != expected {
            return Err(QuditError::LengthMismatch {
                expected,
                got: amps.len(),
            });
        }
        let labels = (0..dims.len()).collect();
        let mut state = PureState { dims, amps, labels };
        state.normalize()?;
        Ok(state)
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis_state(dims: Vec<usize>, index: &[usize]) -> Result<Self> {
        make_state(dims, &[(index.to_vec(), Complex64::new(1.0, 0.0))])
    }

    pub(crate) fn from_parts_unchecked(
        dims: Vec<usize>,
        amps: Vec<Complex64>,
        labels: Vec<usize>,
    ) -> Self {
        debug_assert_eq!(amps.len(), dims.iter().product::<usize>());
        debug_assert_eq!(labels.len(), dims.len());
        PureState { dims, amps, labels }
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(QuditError::DimensionMismatch(format!(
                "{} labels for {} subsystems",
                labels.len(),
                self.dims.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    /// Total Hilbert-space dimension.
    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if n <= f64::MIN_POSITIVE {
            return Err(QuditError::ZeroState);
        }
        let scale = 1.0 / n.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= scale);
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dims.iter().product::<usize>() != other.dims.iter().product::<usize>() {
            return Err(QuditError::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn amplitude(&self, index: &[usize]) -> Result<Complex64> {
        Ok(self.amps[flat_index(&self.dims, index)?])
    }

    /// Splits a flat index into per-subsystem digits.
    pub fn digits(&self, flat: usize) -> Vec<usize> {
        unflatten(&self.dims, flat)
    }
}

fn validate_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(QuditError::InvalidDims(dims.to_vec()));
    }
    Ok(())
}

pub(crate) fn flat_index(dims: &[usize], index: &[usize]) -> Result<usize> {
    if index.len() != dims.len() || index.iter().zip(dims).any(|(i, d)| i >= d) {
        return Err(QuditError::IndexOutOfRange {
            index: index.to_vec(),
            dims: dims.to_vec(),
        });
    }
    Ok(index.iter().zip(dims).fold(0, |acc, (i, d)| acc * d + i))
}

pub(crate) fn unflatten(dims: &[usize], mut flat: usize) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, d) in digits.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
    digits
}

/// Sums the given terms into a dense, unnormalized amplitude vector.
/// Repeated index tuples add.
pub fn accumulate_amplitudes(
    dims: &[usize],
    entries: &[(Vec<usize>, Complex64)],
) -> Result<Vec<Complex64>> {
    validate_dims(dims)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); dims.iter().product()];
    for (index, value) in entries {
        amps[flat_index(dims, index)?] += value;
    }
    Ok(amps)
}

/// Builds a normalized state from sparse `(index-tuple, amplitude)` terms.
pub fn make_state(dims: Vec<usize>, entries: &[(Vec<usize>, Complex64)]) -> Result<PureState> {
    let amps = accumulate_amplitudes(&dims, entries)?;
    PureState::from_amplitudes(dims, amps)
}

/// `a ⊗ b`; subsystems of `b` follow those of `a`. Labels of `b` are shifted
/// past the largest label of `a` so the two factors stay distinguishable;
/// callers that want shared parties relabel afterwards.
pub fn tensor_product(a: &PureState, b: &PureState) -> PureState {
    let mut amps = Vec::with_capacity(a.len() * b.len());
    for x in &a.amps {
        amps.extend(b.amps.iter().map(|y| x * y));
    }
    let offset = a.labels.iter().max().map_or(0, |m| m + 1);
    let mut labels = a.labels.clone();
    labels.extend(b.labels.iter().map(|l| l + offset));
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    PureState { dims, amps, labels }
}
