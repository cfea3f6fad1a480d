//! Pauli exponentials and second-order Trotter slices on dense state vectors.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::pauli::C64;
use crate::hamiltonian::{PauliString, QubitHamiltonian};

/// Largest system register for which dense unitaries are built.
pub const MAX_DENSE_QUBITS: usize = 14;

/// ψ ← exp(−iθP) ψ = cos θ ψ − i sin θ Pψ.
pub fn apply_pauli_exponential(state: &mut [C64], pauli: PauliString, theta: f64) {
    let (c, s) = (theta.cos(), theta.sin());
    let minus_i_s = C64::new(0.0, -s);
    if pauli.x == 0 {
        for (b, amp) in state.iter_mut().enumerate() {
            let (_, ph) = pauli.apply_to_basis(b as u64);
            *amp *= C64::new(c, 0.0) + minus_i_s * ph;
        }
        return;
    }
    // Pair every b with b ⊕ x; P maps each member of the pair onto the other.
    let pivot = 1usize << (63 - pauli.x.leading_zeros());
    for b in 0..state.len() {
        if b & pivot != 0 {
            continue;
        }
        let b2 = b ^ pauli.x as usize;
        let (_, ph_b) = pauli.apply_to_basis(b as u64);
        let (_, ph_b2) = pauli.apply_to_basis(b2 as u64);
        let (u, v) = (state[b], state[b2]);
        state[b] = u * c + minus_i_s * ph_b2 * v;
        state[b2] = v * c + minus_i_s * ph_b * u;
    }
}

/// One symmetric slice: forward then reverse product of exp(−iω_l P_l τ/2)
/// with τ = t/M, applied in place.
pub fn apply_trotter_slice(state: &mut [C64], h: &QubitHamiltonian, t: f64, m: usize) {
    let half = t / (2.0 * m as f64);
    for term in h.terms.iter().chain(h.terms.iter().rev()) {
        apply_pauli_exponential(state, term.pauli, term.coeff * half);
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            qubits: n_qubits,
            limit: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// Dense matrix of one second-order Trotter slice in the term order given.
pub fn trotter_slice_unitary(h: &QubitHamiltonian, t: f64, m: usize) -> Result<DMatrix<C64>> {
    check_size(h.n_qubits)?;
    if !(t > 0.0) || m == 0 {
        return Err(Error::Invalid(format!("need t > 0 and M ≥ 1 (got t = {t}, M = {m})")));
    }
    let dim = 1usize << h.n_qubits;
    let columns: Vec<Vec<C64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut col = vec![C64::new(0.0, 0.0); dim];
            col[j] = C64::new(1.0, 0.0);
            apply_trotter_slice(&mut col, h, t, m);
            col
        })
        .collect();
    Ok(DMatrix::from_fn(dim, dim, |i, j| columns[j][i]))
}

/// Dense matrix of Σ ω_l P_l.
pub fn dense_hamiltonian(h: &QubitHamiltonian) -> Result<DMatrix<C64>> {
    check_size(h.n_qubits)?;
    let dim = 1usize << h.n_qubits;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for b in 0..dim {
        for (b2, amp) in h.apply_to_basis(b as u64) {
            m[(b2 as usize, b)] += amp;
        }
    }
    Ok(m)
}

/// exp(−iHt) through the Hermitian eigendecomposition.
pub fn exact_propagator(h: &QubitHamiltonian, t: f64) -> Result<DMatrix<C64>> {
    let eig = dense_hamiltonian(h)?.symmetric_eigen();
    let phases = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&e| C64::new(0.0, -e * t).exp()));
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&phases) * v.adjoint())
}

/// Computational basis vector |b⟩ on `n_qubits`.
pub fn basis_state(n_qubits: usize, b: u64) -> DVector<C64> {
    let mut v = DVector::from_element(1 << n_qubits, C64::new(0.0, 0.0));
    v[b as usize] = C64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{PauliTerm, TermOrder};
    use crate::hamiltonian::SpinOrdering;

    fn single(text: &str, w: f64) -> QubitHamiltonian {
        QubitHamiltonian {
            n_qubits: text.len(),
            terms: vec![PauliTerm {
                pauli: PauliString::from_text(text).unwrap(),
                coeff: w,
            }],
            order: TermOrder::Magnitude,
            spin_ordering: SpinOrdering::Interleaved,
        }
    }

    #[test]
    fn single_term_slice_power_is_exact() {
        for text in ["XZY", "ZIZ", "IYI", "III"] {
            let h = single(text, 0.37);
            let (t, m) = (5.0, 7);
            let s = trotter_slice_unitary(&h, t, m).unwrap();
            let u = s.pow(m as u32);
            let exact = exact_propagator(&h, t).unwrap();
            assert!((u - exact).camax() < 1e-12, "{text}");
        }
    }

    #[test]
    fn exponential_matches_matrix_exponential() {
        let h = single("YXZ", 1.0);
        let theta = 0.813;
        let mut v: Vec<C64> = (0..8).map(|k| C64::new(k as f64 * 0.1 + 0.2, 0.05 * k as f64 - 0.1)).collect();
        let expected = exact_propagator(&h, theta).unwrap() * DVector::from_vec(v.clone());
        apply_pauli_exponential(&mut v, h.terms[0].pauli, theta);
        for k in 0..8 {
            assert!((v[k] - expected[k]).norm() < 1e-13);
        }
    }

    #[test]
    fn slice_is_unitary() {
        let h = crate::hamiltonian::jordan_wigner(&crate::hamiltonian::tests::random_hamiltonian(2, 9)).magnitude_order();
        let u = trotter_slice_unitary(&h, 3.0, 2).unwrap();
        let dev = (&u.adjoint() * &u - DMatrix::<C64>::identity(16, 16)).camax();
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn qubit_limit() {
        let h = single(&"I".repeat(15), 1.0);
        assert!(matches!(trotter_slice_unitary(&h, 1.0, 1), Err(Error::TooManyQubits { .. })));
    }
}
