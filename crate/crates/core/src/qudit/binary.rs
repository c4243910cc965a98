use super::state::{flat_index, unflatten};
use super::{PureState, QuditError, Result};

/// Replaces every `d = 2^k` subsystem by `k` qubits, most significant bit
/// first (`|2⟩ ≡ |10⟩`). Party labels are copied onto the new qubits.
///
/// With MSB-first qubits and row-major storage the flat amplitude vector is
/// unchanged; only the register layout is refined.
pub fn decimal_to_binary_map(s: &PureState) -> Result<PureState> {
    let mut dims = Vec::new();
    let mut labels = Vec::new();
    for (&d, &label) in s.dims().iter().zip(s.labels()) {
        if !d.is_power_of_two() {
            return Err(QuditError::NotPowerOfTwo(d));
        }
        let bits = d.trailing_zeros() as usize;
        dims.extend(std::iter::repeat_n(2, bits));
        labels.extend(std::iter::repeat_n(label, bits));
    }
    if dims.is_empty() {
        // every subsystem was one-dimensional
        dims.push(1);
        labels.push(s.labels().first().copied().unwrap_or(0));
    }
    Ok(PureState::from_parts_unchecked(
        dims,
        s.amplitudes().to_vec(),
        labels,
    ))
}

/// Reorders subsystems: subsystem `order[k]` of `s` becomes subsystem `k`.
pub fn permute_subsystems(s: &PureState, order: &[usize]) -> Result<PureState> {
    let n = s.num_subsystems();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
        return Err(QuditError::InvalidPartition(format!(
            "{order:?} is not a permutation of 0..{n}"
        )));
    }
    let dims: Vec<usize> = order.iter().map(|&k| s.dims()[k]).collect();
    let labels: Vec<usize> = order.iter().map(|&k| s.labels()[k]).collect();
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); s.len()];
    for (flat, a) in s.amplitudes().iter().enumerate() {
        let old = unflatten(s.dims(), flat);
        let new: Vec<usize> = order.iter().map(|&k| old[k]).collect();
        amps[flat_index(&dims, &new)?] = *a;
    }
    Ok(PureState::from_parts_unchecked(dims, amps, labels))
}
