//! Gate counts and depth for the controlled Trotterized evolution.
//!
//! Each controlled exp(−iωPθ) of weight w compiles to: basis changes on the
//! support (H for X, Rx(π/2) for Y), a CNOT ladder up the support (w−1),
//! a controlled Rz from the ancilla onto the last support qubit
//! (Rz, CNOT, Rz, CNOT), the ladder down (w−1) and the inverse basis
//! changes. The identity term becomes a phase gate on the control.

use serde::Serialize;

use crate::hamiltonian::{PauliString, QubitHamiltonian};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gate {
    One(usize),
    Two(usize, usize),
}

fn compile_term(p: &PauliString, control: usize, out: &mut Vec<Gate>) {
    let support = p.support();
    if support.is_empty() {
        out.push(Gate::One(control));
        return;
    }
    let changed: Vec<usize> = support.iter().copied().filter(|&q| p.x >> q & 1 == 1).collect();
    out.extend(changed.iter().map(|&q| Gate::One(q)));
    for w in support.windows(2) {
        out.push(Gate::Two(w[0], w[1]));
    }
    let last = *support.last().unwrap();
    out.extend([Gate::One(last), Gate::Two(control, last), Gate::One(last), Gate::Two(control, last)]);
    for w in support.windows(2).rev() {
        out.push(Gate::Two(w[0], w[1]));
    }
    out.extend(changed.iter().map(|&q| Gate::One(q)));
}

/// Gate list of one controlled slice (forward then reverse term order).
fn slice_gates(h: &QubitHamiltonian) -> Vec<Gate> {
    let control = h.n_qubits;
    let mut gates = Vec::new();
    for term in h.terms.iter().chain(h.terms.iter().rev()) {
        compile_term(&term.pauli, control, &mut gates);
    }
    gates
}

/// As-soon-as-possible layering of a gate list over `n_qubits` wires.
/// Consecutive single-qubit gates on one wire fuse into a single layer;
/// with `two_qubit_only` they take no layer at all.
fn asap_depth(gates: &[Gate], n_qubits: usize, two_qubit_only: bool) -> usize {
    let mut level = vec![0usize; n_qubits];
    let mut open_single = vec![false; n_qubits];
    for g in gates {
        match *g {
            Gate::One(q) => {
                if !two_qubit_only && !open_single[q] {
                    level[q] += 1;
                    open_single[q] = true;
                }
            }
            Gate::Two(a, b) => {
                let l = level[a].max(level[b]) + 1;
                level[a] = l;
                level[b] = l;
                open_single[a] = false;
                open_single[b] = false;
            }
        }
    }
    level.into_iter().max().unwrap_or(0)
}

/// Two-qubit gates of one controlled exp(−iωPθ) with Pauli weight `w`.
pub fn two_qubit_gates_per_exponential(weight: u32) -> usize {
    if weight == 0 {
        0
    } else {
        2 * (weight as usize - 1) + 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceEstimate {
    pub slice_two_qubit_gates: usize,
    pub slice_total_gates: usize,
    pub slice_depth: usize,
    /// Layers counting two-qubit gates only.
    pub slice_two_qubit_depth: usize,
    /// One controlled U = M slices.
    pub controlled_u_two_qubit_gates: usize,
    pub controlled_u_depth: usize,
    /// Whole register: Σ_k 2^k controlled U applications.
    pub total_two_qubit_gates: usize,
    pub total_depth: usize,
    pub m: usize,
    pub n_ancilla: usize,
}

/// Counts for one slice, one controlled U = slice^M and the Σ_k 2^k
/// repetitions of the full register. Depths of repeated blocks are the
/// block depth times the repetition count (slices sharing a control do not
/// overlap).
pub fn estimate_resources(h: &QubitHamiltonian, m: usize, n_ancilla: usize) -> ResourceEstimate {
    let gates = slice_gates(h);
    let two = gates.iter().filter(|g| matches!(g, Gate::Two(..))).count();
    let depth = asap_depth(&gates, h.n_qubits + 1, false);
    let reps = (1usize << n_ancilla) - 1;
    ResourceEstimate {
        slice_two_qubit_gates: two,
        slice_total_gates: gates.len(),
        slice_depth: depth,
        slice_two_qubit_depth: asap_depth(&gates, h.n_qubits + 1, true),
        controlled_u_two_qubit_gates: two * m,
        controlled_u_depth: depth * m,
        total_two_qubit_gates: two * m * reps,
        total_depth: depth * m * reps,
        m,
        n_ancilla,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{PauliTerm, SpinOrdering, TermOrder};

    fn ham(texts: &[&str]) -> QubitHamiltonian {
        QubitHamiltonian {
            n_qubits: texts[0].len(),
            terms: texts
                .iter()
                .map(|t| PauliTerm {
                    pauli: PauliString::from_text(t).unwrap(),
                    coeff: 1.0,
                })
                .collect(),
            order: TermOrder::Magnitude,
            spin_ordering: SpinOrdering::Interleaved,
        }
    }

    #[test]
    fn weight_two_term() {
        assert_eq!(two_qubit_gates_per_exponential(2), 4);
        let r = estimate_resources(&ham(&["XZ"]), 1, 1);
        assert_eq!(r.slice_two_qubit_gates, 8);
        // Per exponential: H, CNOT, Rz, CNOT, Rz, CNOT, CNOT, H on the chain;
        // the closing H of the first copy fuses with the opening H of the second.
        assert_eq!(r.slice_depth, 15);
        assert_eq!(r.slice_two_qubit_depth, 8);
    }

    #[test]
    fn scaling_with_m_and_ancillas() {
        let h = ham(&["III", "ZII", "XYZ", "IXX"]);
        let a = estimate_resources(&h, 4, 3);
        let b = estimate_resources(&h, 8, 3);
        assert_eq!(2 * a.controlled_u_two_qubit_gates, b.controlled_u_two_qubit_gates);
        assert_eq!(2 * a.controlled_u_depth, b.controlled_u_depth);
        assert_eq!(a.total_two_qubit_gates, a.controlled_u_two_qubit_gates * 7);
        let expected: usize = h.terms.iter().map(|t| 2 * two_qubit_gates_per_exponential(t.pauli.weight())).sum();
        assert_eq!(a.slice_two_qubit_gates, expected);
    }

    #[test]
    fn depth_never_exceeds_gate_count() {
        let h = ham(&["XXYY", "ZIIZ", "IYZX"]);
        let r = estimate_resources(&h, 1, 1);
        assert!(r.slice_depth <= r.slice_total_gates);
        assert!(r.slice_depth >= r.slice_two_qubit_gates / 2);
    }
}
