use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::unflatten;
use super::{PureState, QuditError, Result};

/// `σ₂/σ₁` at or below this counts as a product across the cut.
pub const PRODUCT_TOLERANCE: f64 = 1e-10;
/// Every cut of the irreducible built-in states clears this ratio.
pub const IRREDUCIBILITY_MARGIN: f64 = 1e-3;

/// Split of the subsystem indices into two nonempty groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    group_a: Vec<usize>,
    group_b: Vec<usize>,
}

impl Bipartition {
    pub fn new(mut group_a: Vec<usize>, mut group_b: Vec<usize>, n: usize) -> Result<Self> {
        group_a.sort_unstable();
        group_b.sort_unstable();
        if group_a.is_empty() || group_b.is_empty() {
            return Err(QuditError::InvalidPartition("empty group".into()));
        }
        let mut all: Vec<usize> = group_a.iter().chain(&group_b).copied().collect();
        all.sort_unstable();
        if all != (0..n).collect::<Vec<_>>() {
            return Err(QuditError::InvalidPartition(format!(
                "{group_a:?} | {group_b:?} does not partition 0..{n}"
            )));
        }
        Ok(Bipartition { group_a, group_b })
    }

    pub fn group_a(&self) -> &[usize] {
        &self.group_a
    }

    pub fn group_b(&self) -> &[usize] {
        &self.group_b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FactorizationResult {
    pub bipartition: Bipartition,
    /// Party labels of the subsystems in each group.
    pub labels_a: Vec<usize>,
    pub labels_b: Vec<usize>,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// `σ₂/σ₁`, zero when the amplitude matrix has rank one.
    pub ratio: f64,
    pub is_product: bool,
}

pub fn product_test(s: &PureState, cut: &Bipartition) -> Result<FactorizationResult> {
    product_test_with_tolerance(s, cut, PRODUCT_TOLERANCE)
}

/// Reshapes the amplitudes into a `(group A) × (group B)` matrix and checks
/// whether it has rank one.
pub fn product_test_with_tolerance(
    s: &PureState,
    cut: &Bipartition,
    tolerance: f64,
) -> Result<FactorizationResult> {
    let n = s.num_subsystems();
    if cut.group_a.iter().chain(&cut.group_b).any(|&k| k >= n)
        || cut.group_a.len() + cut.group_b.len() != n
    {
        return Err(QuditError::InvalidPartition(format!(
            "cut {:?} | {:?} does not match {n} subsystems",
            cut.group_a, cut.group_b
        )));
    }
    let dims = s.dims();
    let rows: usize = cut.group_a.iter().map(|&k| dims[k]).product();
    let cols: usize = cut.group_b.iter().map(|&k| dims[k]).product();
    let mut m = DMatrix::<Complex64>::zeros(rows, cols);
    for (flat, a) in s.amplitudes().iter().enumerate() {
        let digits = unflatten(dims, flat);
        let r = cut.group_a.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
        let c = cut.group_b.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
        m[(r, c)] = *a;
    }
    let mut singular_values: Vec<f64> = m.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let ratio = match singular_values.as_slice() {
        [s1, s2, ..] if *s1 > 0.0 => s2 / s1,
        _ => 0.0,
    };
    let labels = s.labels();
    Ok(FactorizationResult {
        labels_a: cut.group_a.iter().map(|&k| labels[k]).collect(),
        labels_b: cut.group_b.iter().map(|&k| labels[k]).collect(),
        bipartition: cut.clone(),
        singular_values,
        ratio,
        is_product: ratio <= tolerance,
    })
}

/// All `2^{n−1} − 1` bipartitions of `n` subsystems; subsystem 0 is always
/// in group A.
pub fn all_bipartitions(n: usize) -> Vec<Bipartition> {
    if n < 2 {
        return Vec::new();
    }
    let rest = n - 1;
    (0..(1usize << rest) - 1)
        .map(|mask| {
            let mut a = vec![0];
            let mut b = Vec::new();
            for k in 1..n {
                if mask >> (k - 1) & 1 == 1 {
                    a.push(k);
                } else {
                    b.push(k);
                }
            }
            Bipartition {
                group_a: a,
                group_b: b,
            }
        })
        .collect()
}

/// Product test across every bipartition of the (binary-mapped) register.
pub fn reducibility_scan(s: &PureState) -> Vec<FactorizationResult> {
    reducibility_scan_with_tolerance(s, PRODUCT_TOLERANCE)
}

pub fn reducibility_scan_with_tolerance(s: &PureState, tolerance: f64) -> Vec<FactorizationResult> {
    all_bipartitions(s.num_subsystems())
        .iter()
        .map(|cut| product_test_with_tolerance(s, cut, tolerance).expect("generated cut is valid"))
        .collect()
}

/// A state is irreducible iff no cut factorizes.
pub fn is_irreducible(scan: &[FactorizationResult]) -> bool {
    !scan.iter().any(|r| r.is_product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::{builtin, decimal_to_binary_map, make_state, tensor_product};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn cut_counts() {
        assert_eq!(all_bipartitions(5).len(), 15);
        assert_eq!(all_bipartitions(3).len(), 3);
        assert!(all_bipartitions(1).is_empty());
    }

    #[test]
    fn invalid_partitions() {
        assert!(Bipartition::new(vec![], vec![0, 1], 2).is_err());
        assert!(Bipartition::new(vec![0], vec![0, 1], 2).is_err());
        assert!(Bipartition::new(vec![0], vec![2], 2).is_err());
        let s = builtin::ghz3();
        let cut = Bipartition::new(vec![0], vec![1], 2).unwrap();
        assert!(product_test(&s, &cut).is_err());
    }

    #[test]
    fn eq1_factors_across_high_bits() {
        let m = decimal_to_binary_map(&builtin::eq1()).unwrap();
        let cut = Bipartition::new(vec![0, 2], vec![1, 3, 4], 5).unwrap();
        let r = product_test(&m, &cut).unwrap();
        assert!(r.is_product);
        assert!(r.ratio <= PRODUCT_TOLERANCE);
        assert_abs_diff_eq!(r.singular_values[0], 1.0, epsilon = 1e-12);
        assert_eq!(r.labels_a, vec![0, 1]);
    }

    #[test]
    fn eq3_same_cut_is_maximally_entangled() {
        let m = decimal_to_binary_map(&builtin::eq3()).unwrap();
        let cut = Bipartition::new(vec![0, 2], vec![1, 3, 4], 5).unwrap();
        let r = product_test(&m, &cut).unwrap();
        assert!(!r.is_product);
        assert_abs_diff_eq!(r.ratio, 1.0, epsilon = 1e-12);
        let h = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(r.singular_values[0], h, epsilon = 1e-12);
        assert_abs_diff_eq!(r.singular_values[1], h, epsilon = 1e-12);
    }

    #[test]
    fn product_state_every_cut() {
        let s = PureState::basis_state(vec![2; 5], &[0; 5]).unwrap();
        let scan = reducibility_scan(&s);
        assert!(scan.iter().all(|r| r.is_product));
    }

    #[test]
    fn ghz_is_irreducible() {
        let scan = reducibility_scan(&builtin::ghz3());
        assert_eq!(scan.len(), 3);
        assert!(is_irreducible(&scan));
    }

    fn arb_state(dims: Vec<usize>) -> impl Strategy<Value = PureState> {
        let n: usize = dims.iter().product();
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
            .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
            .prop_map(move |v| {
                PureState::from_amplitudes(
                    dims.clone(),
                    v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(),
                )
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn tensor_products_pass_matching_cut(x in arb_state(vec![2, 2]), y in arb_state(vec![2, 2, 2])) {
            let p = tensor_product(&x, &y);
            let cut = Bipartition::new(vec![0, 1], vec![2, 3, 4], 5).unwrap();
            prop_assert!(product_test(&p, &cut).unwrap().is_product);
        }
    }

    #[test]
    fn singular_values_descending() {
        let s = make_state(
            vec![2, 2],
            &[(vec![0, 0], Complex64::new(0.3, 0.0)), (vec![1, 1], Complex64::new(0.9, 0.0))],
        )
        .unwrap();
        let cut = Bipartition::new(vec![0], vec![1], 2).unwrap();
        let r = product_test(&s, &cut).unwrap();
        assert!(r.singular_values[0] >= r.singular_values[1]);
        assert_abs_diff_eq!(r.ratio, 1.0 / 3.0, epsilon = 1e-12);
    }
}
