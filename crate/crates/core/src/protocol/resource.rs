//! Resource states and prepare-and-measure samplers.

use rand::Rng;

use super::{Basis, ProtocolId};
use crate::qudit::{basis, builtin, tensor_product, BasisKind, BasisSet, PureState};

/// The four measurement bases a party can need: computational and
/// conjugate, for qubits and for four-level systems.
#[derive(Debug, Clone)]
pub struct BasisBank {
    comp2: BasisSet,
    comp4: BasisSet,
    conj2: BasisSet,
    conj4: BasisSet,
}

impl BasisBank {
    pub fn new(conjugate4: BasisKind) -> Self {
        BasisBank {
            comp2: basis(BasisKind::Computational, 2).expect("comp2"),
            comp4: basis(BasisKind::Computational, 4).expect("comp4"),
            conj2: basis(BasisKind::Fourier, 2).expect("fourier2"),
            conj4: basis(conjugate4, 4).expect("conjugate basis on d = 4"),
        }
    }

    pub fn conjugate4(&self) -> BasisKind {
        self.conj4.kind()
    }

    /// Basis for one subsystem of local dimension `d` (2 or 4).
    pub fn get(&self, b: Basis, d: usize) -> &BasisSet {
        match (b, d) {
            (Basis::Comp, 2) => &self.comp2,
            (Basis::Comp, _) => &self.comp4,
            (Basis::Conj, 2) => &self.conj2,
            (Basis::Conj, _) => &self.conj4,
        }
    }

    /// Per-subsystem bases for a state whose subsystems are labelled by
    /// party; `party_bases[p]` is party `p`'s choice.
    pub fn for_state(&self, s: &PureState, party_bases: &[Basis]) -> Vec<&BasisSet> {
        s.dims()
            .iter()
            .zip(s.labels())
            .map(|(&d, &p)| self.get(party_bases[p], d))
            .collect()
    }
}

/// One prepare-and-measure emission: the set Alice drew from, the index of
/// the state within it, and the state sent to the Bobs.
#[derive(Debug, Clone, PartialEq)]
pub struct Preparation {
    pub set: Basis,
    pub symbol: u8,
    pub state: PureState,
}

/// Alice's source in Protocols II and IV. Set `S₁` is drawn with
/// probability `comp_probability`, then one of its four states uniformly.
#[derive(Debug, Clone)]
pub struct PreparedSampler {
    protocol: ProtocolId,
    comp_probability: f64,
    bank: BasisBank,
}

impl PreparedSampler {
    pub fn new(protocol: ProtocolId, comp_probability: f64, conjugate4: BasisKind) -> Self {
        assert!(protocol.is_prepare_and_measure());
        PreparedSampler {
            protocol,
            comp_probability,
            bank: BasisBank::new(conjugate4),
        }
    }

    /// Draws the set, then the symbol.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Basis, u8) {
        let set = if rng.gen_bool(self.comp_probability) {
            Basis::Comp
        } else {
            Basis::Conj
        };
        (set, rng.gen_range(0..4u8))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Preparation {
        let (set, symbol) = self.draw(rng);
        self.preparation(set, symbol)
    }

    /// Protocol II sends `|k⟩|k mod 2⟩` from `S₁` or `|k′⟩|±⟩` from `S₂`
    /// over (Bob₁: d = 4, Bob₂: d = 2). Protocol IV sends the same symbol as
    /// three qubits: Bob₁ receives the layer-1 qubit `k₁` and his layer-2
    /// qubit `k₀`, Bob₂ receives `k₀`.
    pub fn preparation(&self, set: Basis, symbol: u8) -> Preparation {
        let k = symbol as usize;
        let (hi, lo) = (k >> 1, k & 1);
        let state = match self.protocol {
            ProtocolId::P2 => {
                let b1 = vector_state(self.bank.get(set, 4), k);
                let b2 = vector_state(self.bank.get(set, 2), lo);
                tensor_product(&b1, &b2)
            }
            _ => {
                let q = self.bank.get(set, 2);
                let two = tensor_product(&vector_state(q, hi), &vector_state(q, lo));
                tensor_product(&two, &vector_state(q, lo))
            }
        };
        let labels = match self.protocol {
            ProtocolId::P2 => vec![1, 2],
            _ => vec![1, 1, 2],
        };
        Preparation {
            set,
            symbol,
            state: state.with_labels(labels).expect("label count"),
        }
    }

    /// Every preparation in `S₁ ∪ S₂`.
    pub fn all(&self) -> Vec<Preparation> {
        [Basis::Comp, Basis::Conj]
            .into_iter()
            .flat_map(|set| (0..4).map(move |k| (set, k)))
            .map(|(set, k)| self.preparation(set, k))
            .collect()
    }

    pub fn set_probability(&self, set: Basis) -> f64 {
        match set {
            Basis::Comp => self.comp_probability,
            Basis::Conj => 1.0 - self.comp_probability,
        }
    }
}

fn vector_state(b: &BasisSet, i: usize) -> PureState {
    PureState::from_amplitudes(vec![b.dim()], b.vector(i).to_vec()).expect("basis vector")
}

/// A shared entangled resource with party labels per subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedResource {
    pub state: PureState,
}

#[derive(Debug, Clone)]
pub enum Resource {
    Shared(SharedResource),
    Prepared(PreparedSampler),
}

impl Resource {
    pub fn shared_state(&self) -> Option<&PureState> {
        match self {
            Resource::Shared(r) => Some(&r.state),
            Resource::Prepared(_) => None,
        }
    }
}

pub fn build_resource(protocol: ProtocolId) -> Resource {
    build_resource_with(protocol, 0.5, BasisKind::Mub4)
}

/// `comp_probability` is Alice's probability of drawing from `S₁` in the
/// prepare-and-measure protocols; it is ignored otherwise.
pub fn build_resource_with(protocol: ProtocolId, comp_probability: f64, conjugate4: BasisKind) -> Resource {
    let shared = |state: PureState, labels: Vec<usize>| {
        Resource::Shared(SharedResource {
            state: state.with_labels(labels).expect("label count"),
        })
    };
    match protocol {
        ProtocolId::P1 => shared(builtin::eq1(), vec![0, 1, 2]),
        ProtocolId::P3 => shared(
            tensor_product(&builtin::bell(), &builtin::ghz3()),
            vec![0, 1, 0, 1, 2],
        ),
        ProtocolId::CSskd => shared(builtin::eq6(), vec![0, 1, 2]),
        ProtocolId::BdSsskd => shared(builtin::eq8(), vec![0, 1, 2]),
        ProtocolId::P2 | ProtocolId::P4 => {
            Resource::Prepared(PreparedSampler::new(protocol, comp_probability, conjugate4))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::make_state;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shared_resources() {
        let p1 = build_resource(ProtocolId::P1);
        let s = p1.shared_state().unwrap();
        assert_eq!(s.dims(), &[4, 4, 2]);
        for idx in [[0, 0, 0], [1, 1, 1], [2, 2, 0], [3, 3, 1]] {
            assert_abs_diff_eq!(s.amplitude(&idx).unwrap().re, 0.5, epsilon = 1e-15);
        }
        let bd = build_resource(ProtocolId::BdSsskd);
        let s = bd.shared_state().unwrap();
        assert_abs_diff_eq!(s.amplitude(&[3, 3, 1]).unwrap().re, -0.5, epsilon = 1e-15);
        let p3 = build_resource(ProtocolId::P3);
        assert_eq!(p3.shared_state().unwrap().labels(), &[0, 1, 0, 1, 2]);
        assert!(build_resource(ProtocolId::P2).shared_state().is_none());
    }

    #[test]
    fn p2_sets_match_table() {
        let sampler = PreparedSampler::new(ProtocolId::P2, 0.5, BasisKind::Mub4);
        let s1 = sampler.preparation(Basis::Comp, 2).state;
        assert_eq!(s1.dims(), &[4, 2]);
        assert_abs_diff_eq!(s1.amplitude(&[2, 0]).unwrap().re, 1.0);
        // |3′−⟩ = |−−−⟩ on three qubits
        let s2 = sampler.preparation(Basis::Conj, 3).state;
        let h = 0.5f64.sqrt();
        let minus = make_state(vec![2], &[(vec![0], Complex64::new(h, 0.0)), (vec![1], Complex64::new(-h, 0.0))]).unwrap();
        let expected = tensor_product(&tensor_product(&minus, &minus), &minus);
        let expected = PureState::from_amplitudes(vec![4, 2], expected.amplitudes().to_vec()).unwrap();
        assert_abs_diff_eq!(s2.inner(&expected).unwrap().norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn p4_qubit_layout() {
        let sampler = PreparedSampler::new(ProtocolId::P4, 0.5, BasisKind::Mub4);
        let p = sampler.preparation(Basis::Comp, 2);
        assert_eq!(p.state.labels(), &[1, 1, 2]);
        assert_abs_diff_eq!(p.state.amplitude(&[1, 0, 0]).unwrap().re, 1.0);
        assert_eq!(sampler.all().len(), 8);
    }

    #[test]
    fn p2_draws_uniform_over_eight() {
        let sampler = PreparedSampler::new(ProtocolId::P2, 0.5, BasisKind::Mub4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 80_000;
        let hits = (0..n)
            .filter(|_| sampler.draw(&mut rng) == (Basis::Comp, 2))
            .count();
        let p = hits as f64 / n as f64;
        let sigma = (0.125f64 * 0.875 / n as f64).sqrt();
        assert!((p - 0.125).abs() < 4.0 * sigma, "{p}");
    }

    #[test]
    fn bank_picks_by_dimension() {
        let bank = BasisBank::new(BasisKind::Mub4);
        assert_eq!(bank.get(Basis::Conj, 2).kind(), BasisKind::Fourier);
        assert_eq!(bank.get(Basis::Conj, 4).kind(), BasisKind::Mub4);
        let s = build_resource(ProtocolId::P3);
        let bases = bank.for_state(s.shared_state().unwrap(), &[Basis::Comp, Basis::Conj, Basis::Comp]);
        let dims: Vec<_> = bases.iter().map(|b| (b.dim(), b.kind())).collect();
        assert_eq!(dims[1], (2, BasisKind::Fourier));
        assert_eq!(dims[2], (2, BasisKind::Computational));
    }
}
