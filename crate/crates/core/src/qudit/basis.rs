use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{QuditError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Computational,
    Fourier,
    /// The real mutually unbiased basis `{u_j}` for `d = 4`.
    Mub4,
}

impl BasisKind {
    pub fn tag(self) -> &'static str {
        match self {
            BasisKind::Computational => "comp",
            BasisKind::Fourier => "fourier",
            BasisKind::Mub4 => "mub4",
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BasisKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "comp" | "computational" | "z" => Ok(BasisKind::Computational),
            "fourier" | "f" => Ok(BasisKind::Fourier),
            "mub4" | "mub" | "u" => Ok(BasisKind::Mub4),
            other => Err(format!("unknown basis kind `{other}`")),
        }
    }
}

/// Orthonormal measurement basis for one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    kind: BasisKind,
    dim: usize,
    vectors: Vec<Vec<Complex64>>,
    // Row-major conjugated vectors, i.e. the change-of-basis matrix.
    bras: Vec<Complex64>,
}

impl BasisSet {
    fn from_vectors(kind: BasisKind, vectors: Vec<Vec<Complex64>>) -> Self {
        let dim = vectors.len();
        let bras = vectors.iter().flatten().map(|z| z.conj()).collect();
        BasisSet {
            kind,
            dim,
            vectors,
            bras,
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i]
    }

    pub(crate) fn bras(&self) -> &[Complex64] {
        &self.bras
    }

    pub(crate) fn is_computational(&self) -> bool {
        self.kind == BasisKind::Computational
    }

    /// Largest entry-wise deviation of the Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let g: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// Constructs a basis of the given kind.
///
/// Fourier vectors are `|f_i⟩ = Σ_j ω^{ij}|j⟩/√d` with `ω = exp(2πi/d)`.
/// `Mub4` is defined only for `d = 4` and coincides with the two-qubit
/// products `|++⟩, |+−⟩, |−+⟩, |−−⟩` under `|0⟩=|00⟩, …, |3⟩=|11⟩`.
pub fn basis(kind: BasisKind, d: usize) -> Result<BasisSet> {
    if d == 0 {
        return Err(QuditError::UnsupportedBasis {
            kind: kind.to_string(),
            dim: d,
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let vectors = match kind {
        BasisKind::Computational => (0..d)
            .map(|i| (0..d).map(|j| if i == j { one } else { zero }).collect())
            .collect(),
        BasisKind::Fourier => {
            let norm = 1.0 / (d as f64).sqrt();
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            // reduce the exponent first so ω^{ij} stays exact for small d
                            let phase = 2.0 * PI * ((i * j) % d) as f64 / d as f64;
                            Complex64::from_polar(norm, phase)
                        })
                        .collect()
                })
                .collect()
        }
        BasisKind::Mub4 => {
            if d != 4 {
                return Err(QuditError::UnsupportedBasis {
                    kind: kind.to_string(),
                    dim: d,
                });
            }
            const SIGNS: [[f64; 4]; 4] = [
                [1.0, 1.0, 1.0, 1.0],
                [1.0, -1.0, 1.0, -1.0],
                [1.0, 1.0, -1.0, -1.0],
                [1.0, -1.0, -1.0, 1.0],
            ];
            SIGNS
                .iter()
                .map(|row| row.iter().map(|s| Complex64::new(s / 2.0, 0.0)).collect())
                .collect()
        }
    };
    let mut set = BasisSet::from_vectors(kind, vectors);
    if kind == BasisKind::Fourier {
        snap_exact(&mut set);
    }
    Ok(set)
}

// cos/sin of multiples of π/2 leave ~1e-17 residue; zero it so d = 2, 4
// Fourier vectors are exactly ±1/√d, ±i/√d.
fn snap_exact(set: &mut BasisSet) {
    let clean = |z: &mut Complex64| {
        if z.re.abs() < 1e-15 {
            z.re = 0.0;
        }
        if z.im.abs() < 1e-15 {
            z.im = 0.0;
        }
    };
    set.vectors.iter_mut().flatten().for_each(clean);
    set.bras.iter_mut().for_each(clean);
}

/// `max_{i,j} | |⟨e_i|f_j⟩|² − 1/d |`.
pub fn mutual_unbiasedness(b1: &BasisSet, b2: &BasisSet) -> Result<f64> {
    if b1.dim != b2.dim {
        return Err(QuditError::DimensionMismatch(format!(
            "bases of dimension {} and {}",
            b1.dim, b2.dim
        )));
    }
    let target = 1.0 / b1.dim as f64;
    let mut worst = 0.0f64;
    for e in &b1.vectors {
        for f in &b2.vectors {
            let overlap: Complex64 = e.iter().zip(f).map(|(x, y)| x.conj() * y).sum();
            worst = worst.max((overlap.norm_sqr() - target).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fourier_two_is_plus_minus() {
        let f = basis(BasisKind::Fourier, 2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(f.vector(0)[0].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(f.vector(0)[1].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(f.vector(1)[0].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(f.vector(1)[1].re, -h, epsilon = 1e-15);
        assert_eq!(f.vector(1)[1].im, 0.0);
    }

    #[test]
    fn mub4_u1() {
        let u = basis(BasisKind::Mub4, 4).unwrap();
        let got: Vec<f64> = u.vector(1).iter().map(|z| z.re).collect();
        assert_eq!(got, vec![0.5, -0.5, 0.5, -0.5]);
    }

    #[test]
    fn mub4_matches_plus_minus_products() {
        // |±⟩ components indexed by bit value.
        let h = 1.0 / 2f64.sqrt();
        let pm = [[h, h], [h, -h]];
        let u = basis(BasisKind::Mub4, 4).unwrap();
        for (j, (hi, lo)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            for k in 0..4 {
                let expected = pm[hi][k >> 1] * pm[lo][k & 1];
                assert_abs_diff_eq!(u.vector(j)[k].re, expected, epsilon = 1e-15);
                assert_eq!(u.vector(j)[k].im, 0.0);
            }
        }
    }

    #[test]
    fn mub4_requires_dimension_four() {
        assert!(matches!(
            basis(BasisKind::Mub4, 2),
            Err(QuditError::UnsupportedBasis { dim: 2, .. })
        ));
    }

    #[test]
    fn unbiasedness_values() {
        let c4 = basis(BasisKind::Computational, 4).unwrap();
        let u = basis(BasisKind::Mub4, 4).unwrap();
        assert!(mutual_unbiasedness(&c4, &u).unwrap() < 1e-12);
        assert_abs_diff_eq!(mutual_unbiasedness(&c4, &c4).unwrap(), 0.75, epsilon = 1e-15);
        for d in 2..=8 {
            let c = basis(BasisKind::Computational, d).unwrap();
            let f = basis(BasisKind::Fourier, d).unwrap();
            assert!(mutual_unbiasedness(&c, &f).unwrap() < 1e-12, "d={d}");
        }
        let c2 = basis(BasisKind::Computational, 2).unwrap();
        assert!(mutual_unbiasedness(&c2, &u).is_err());
    }

    #[test]
    fn all_bases_orthonormal() {
        for d in 1..=8 {
            for kind in [BasisKind::Computational, BasisKind::Fourier] {
                assert!(basis(kind, d).unwrap().gram_deviation() < 1e-12);
            }
        }
        assert!(basis(BasisKind::Mub4, 4).unwrap().gram_deviation() < 1e-12);
    }

    #[test]
    fn fourier_components() {
        let d = 5;
        let f = basis(BasisKind::Fourier, d).unwrap();
        for i in 0..d {
            for j in 0..d {
                let w = Complex64::from_polar(1.0, 2.0 * PI * (i * j) as f64 / d as f64)
                    / (d as f64).sqrt();
                assert!((f.vector(i)[j] - w).norm() < 1e-12);
            }
        }
    }
}
