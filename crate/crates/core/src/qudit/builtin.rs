//! Named resource states.
//!
//! | id     | dims      | state                                                   |
//! |--------|-----------|---------------------------------------------------------|
//! | `eq1`  | (4, 4, 2) | ½[(|00⟩+|22⟩)|0⟩ + (|11⟩+|33⟩)|1⟩]                      |
//! | `eq3`  | (4, 4, 2) | ½[(|00⟩+|22⟩)|0⟩ + (|11⟩−|33⟩)|1⟩]                      |
//! | `eq6`  | (4, 4, 4) | (Σ_j |u_j⟩|j⟩|u_j⟩ − 2|333⟩)/√7                         |
//! | `eq8`  | (4, 4, 2) | ½(|000⟩ + |111⟩ + |220⟩ − |331⟩)                        |
//! | `bell` | (2, 2)    | (|00⟩+|11⟩)/√2                                          |
//! | `ghz3` | (2, 2, 2) | (|000⟩+|111⟩)/√2                                        |
//!
//! `eq3` and `eq8` carry the same amplitudes; both ids are kept because
//! they play different roles (irreducibility example vs. bd-SSSKD resource).

use num_complex::Complex64;

use super::{basis, make_state, BasisKind, PureState, QuditError, Result};

pub const NAMES: [&str; 6] = ["eq1", "eq3", "eq6", "eq8", "bell", "ghz3"];

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn layered(sign_33: f64) -> PureState {
    make_state(
        vec![4, 4, 2],
        &[
            (vec![0, 0, 0], re(1.0)),
            (vec![1, 1, 1], re(1.0)),
            (vec![2, 2, 0], re(1.0)),
            (vec![3, 3, 1], re(sign_33)),
        ],
    )
    .expect("static state")
}

pub fn eq1() -> PureState {
    layered(1.0)
}

pub fn eq3() -> PureState {
    layered(-1.0)
}

pub fn eq8() -> PureState {
    layered(-1.0)
}

/// Unnormalized terms of `Σ_j |u_j⟩|j⟩|u_j⟩ − 2|333⟩`, expanded in the
/// computational basis (duplicates are summed by [`make_state`]).
pub fn eq6_terms() -> Vec<(Vec<usize>, Complex64)> {
    let u = basis(BasisKind::Mub4, 4).expect("mub4");
    let mut terms = Vec::with_capacity(65);
    for j in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                terms.push((vec![a, j, b], u.vector(j)[a] * u.vector(j)[b]));
            }
        }
    }
    terms.push((vec![3, 3, 3], re(-2.0)));
    terms
}

pub fn eq6() -> PureState {
    make_state(vec![4, 4, 4], &eq6_terms()).expect("static state")
}

pub fn bell() -> PureState {
    make_state(vec![2, 2], &[(vec![0, 0], re(1.0)), (vec![1, 1], re(1.0))]).expect("static state")
}

pub fn ghz3() -> PureState {
    make_state(
        vec![2, 2, 2],
        &[(vec![0, 0, 0], re(1.0)), (vec![1, 1, 1], re(1.0))],
    )
    .expect("static state")
}

pub fn by_name(id: &str) -> Result<PureState> {
    match id.to_ascii_lowercase().as_str() {
        "eq1" => Ok(eq1()),
        "eq3" => Ok(eq3()),
        "eq6" => Ok(eq6()),
        "eq8" => Ok(eq8()),
        "bell" => Ok(bell()),
        "ghz3" | "ghz" => Ok(ghz3()),
        _ => Err(QuditError::UnknownState(id.to_string())),
    }
}
