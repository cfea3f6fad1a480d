//! Jordan–Wigner mapping and the qubit Hamiltonian container.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::pauli::{PauliString, RawSum, C64};
use super::FermionHamiltonian;
use crate::error::{Error, Result};

/// Layout of spin orbitals on qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpinOrdering {
    /// Qubit 2p is spatial orbital p with α spin, 2p+1 with β spin.
    #[default]
    Interleaved,
    /// Qubits 0..n are α orbitals, n..2n β orbitals.
    Blocked,
}

impl SpinOrdering {
    pub fn qubit(&self, n_spatial: usize, p: usize, spin: usize) -> usize {
        match self {
            SpinOrdering::Interleaved => 2 * p + spin,
            SpinOrdering::Blocked => p + spin * n_spatial,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermOrder {
    Unordered,
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub pauli: PauliString,
    pub coeff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QubitHamiltonian {
    pub n_qubits: usize,
    pub terms: Vec<PauliTerm>,
    pub order: TermOrder,
    pub spin_ordering: SpinOrdering,
}

const DROP: f64 = 1e-12;

/// Creation (dagger = true) or annihilation operator on qubit `j`:
/// Z_0⋯Z_{j−1} ½(X ∓ iY).
fn ladder(j: usize, dagger: bool) -> RawSum {
    let chain = (1u64 << j) - 1;
    let bit = 1u64 << j;
    let half = C64::new(0.5, 0.0);
    // X − iY = X + XZ and X + iY = X − XZ in the raw X^x Z^z basis.
    let s = if dagger { half } else { -half };
    RawSum {
        terms: vec![(bit, chain, half), (bit, chain | bit, s)],
    }
}

/// Maps the fermionic operator onto Pauli strings.
pub fn jordan_wigner(h: &FermionHamiltonian) -> QubitHamiltonian {
    jordan_wigner_with(h, SpinOrdering::Interleaved)
}

pub fn jordan_wigner_with(h: &FermionHamiltonian, ordering: SpinOrdering) -> QubitHamiltonian {
    let n = h.n_orb;
    let nq = 2 * n;
    assert!(nq <= 64, "at most 32 spatial orbitals");
    let creators: Vec<RawSum> = (0..nq).map(|j| ladder(j, true)).collect();
    let annihilators: Vec<RawSum> = (0..nq).map(|j| ladder(j, false)).collect();
    let q = |p: usize, s: usize| ordering.qubit(n, p, s);

    let mut acc: BTreeMap<PauliString, C64> = BTreeMap::new();
    let mut add = |sum: RawSum, scale: f64| {
        for (p, c) in sum.into_pauli() {
            *acc.entry(p).or_insert(C64::new(0.0, 0.0)) += c * scale;
        }
    };
    add(RawSum::scalar(C64::new(1.0, 0.0)), h.e_scalar);
    for p in 0..n {
        for r in 0..n {
            let v = h.h[(p, r)];
            if v == 0.0 {
                continue;
            }
            for s in 0..2 {
                add(creators[q(p, s)].mul(&annihilators[q(r, s)]), v);
            }
        }
    }
    // ½ Σ (ps|qr) a†_{pσ} a†_{qτ} a_{rτ} a_{sσ}
    for p in 0..n {
        for qq in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = 0.5 * h.eri.get(p, s, qq, r);
                    if v == 0.0 {
                        continue;
                    }
                    for sa in 0..2 {
                        for sb in 0..2 {
                            let (i, j, k, l) = (q(p, sa), q(qq, sb), q(r, sb), q(s, sa));
                            if i == j || k == l {
                                continue;
                            }
                            let prod = creators[i].mul(&creators[j]).mul(&annihilators[k]).mul(&annihilators[l]);
                            add(prod, v);
                        }
                    }
                }
            }
        }
    }
    let terms = acc
        .into_iter()
        .filter(|(_, c)| c.norm() >= DROP)
        .map(|(pauli, c)| {
            debug_assert!(c.im.abs() < 1e-10, "non-Hermitian coefficient {c} on {pauli}");
            PauliTerm { pauli, coeff: c.re }
        })
        .collect();
    QubitHamiltonian {
        n_qubits: nq,
        terms,
        order: TermOrder::Unordered,
        spin_ordering: ordering,
    }
}

impl QubitHamiltonian {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn identity_coeff(&self) -> f64 {
        self.terms.iter().filter(|t| t.pauli.is_identity()).map(|t| t.coeff).sum()
    }

    /// Adds `offset` to the identity coefficient (creating the term if needed).
    pub fn with_offset(&self, offset: f64) -> Self {
        let mut out = self.clone();
        match out.terms.iter_mut().find(|t| t.pauli.is_identity()) {
            Some(t) => t.coeff += offset,
            None => out.terms.insert(
                0,
                PauliTerm {
                    pauli: PauliString::IDENTITY,
                    coeff: offset,
                },
            ),
        }
        out
    }

    /// Identity first, then descending |ω|, ties by dense Pauli text.
    pub fn magnitude_order(&self) -> Self {
        let mut out = self.clone();
        let n = self.n_qubits;
        out.terms.sort_by(|a, b| {
            b.pauli
                .is_identity()
                .cmp(&a.pauli.is_identity())
                .then(b.coeff.abs().total_cmp(&a.coeff.abs()))
                .then_with(|| a.pauli.to_text(n).cmp(&b.pauli.to_text(n)))
        });
        out.order = TermOrder::Magnitude;
        out
    }

    /// H|b⟩ as a list of (basis index, amplitude).
    pub fn apply_to_basis(&self, b: u64) -> Vec<(u64, C64)> {
        self.terms
            .iter()
            .map(|t| {
                let (b2, ph) = t.pauli.apply_to_basis(b);
                (b2, ph * t.coeff)
            })
            .collect()
    }

    /// Dense matrix restricted to the basis states in `sector` (ascending).
    pub fn sector_matrix(&self, sector: &[u64]) -> Result<DMatrix<f64>> {
        let index: std::collections::HashMap<u64, usize> = sector.iter().enumerate().map(|(i, &b)| (b, i)).collect();
        let n = sector.len();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for (col, &b) in sector.iter().enumerate() {
            for (b2, amp) in self.apply_to_basis(b) {
                if let Some(&row) = index.get(&b2) {
                    m[(row, col)] += amp;
                }
            }
        }
        if m.iter().any(|c| c.im.abs() > 1e-10) {
            return Err(Error::Numerical("qubit Hamiltonian has complex matrix elements in this sector".into()));
        }
        Ok(m.map(|c| c.re))
    }

    /// Basis states with `n_alpha` α and `n_beta` β electrons.
    pub fn particle_sector(&self, n_alpha: usize, n_beta: usize) -> Vec<u64> {
        let n = self.n_qubits / 2;
        let mut alpha_mask = 0u64;
        for p in 0..n {
            alpha_mask |= 1 << self.spin_ordering.qubit(n, p, 0);
        }
        let beta_mask = if self.n_qubits == 64 { !alpha_mask } else { ((1u64 << self.n_qubits) - 1) & !alpha_mask };
        (0..(1u64 << self.n_qubits))
            .filter(|b| (b & alpha_mask).count_ones() as usize == n_alpha && (b & beta_mask).count_ones() as usize == n_beta)
            .collect()
    }

    /// Basis index of the determinant with the lowest `n_alpha`/`n_beta`
    /// spatial orbitals occupied.
    pub fn hartree_fock_state(&self, n_alpha: usize, n_beta: usize) -> u64 {
        let n = self.n_qubits / 2;
        let mut b = 0u64;
        for p in 0..n_alpha {
            b |= 1 << self.spin_ordering.qubit(n, p, 0);
        }
        for p in 0..n_beta {
            b |= 1 << self.spin_ordering.qubit(n, p, 1);
        }
        b
    }

    /// Histogram of Pauli weights for non-identity terms.
    pub fn weight_histogram(&self) -> BTreeMap<u32, usize> {
        let mut h = BTreeMap::new();
        for t in self.terms.iter().filter(|t| !t.pauli.is_identity()) {
            *h.entry(t.pauli.weight()).or_insert(0) += 1;
        }
        h
    }

    /// Terms as (dense text, coefficient) pairs.
    pub fn to_text_terms(&self) -> Vec<(String, f64)> {
        self.terms.iter().map(|t| (t.pauli.to_text(self.n_qubits), t.coeff)).collect()
    }
}
