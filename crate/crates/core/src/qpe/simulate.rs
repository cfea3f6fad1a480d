//! Ancilla-register phase distributions: the spectral method and a literal
//! state-vector simulation of the circuit.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::pauli::C64;

/// Largest ancilla + system register simulated as a state vector.
pub const MAX_STATEVECTOR_QUBITS: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct QpeDistribution {
    pub probabilities: Vec<f64>,
    pub n_ancilla: usize,
    pub m: usize,
    pub t: f64,
}

impl QpeDistribution {
    pub fn n_bins(&self) -> usize {
        self.probabilities.len()
    }

    pub fn phase(&self, x: usize) -> f64 {
        x as f64 / self.n_bins() as f64
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// |(1/N) Σ_y e^{iδy}|² over N = 2^n points.
pub fn dirichlet_kernel(delta: f64, n_points: usize) -> f64 {
    let n = n_points as f64;
    let half = 0.5 * delta;
    let s = half.sin();
    if s.abs() < 1e-5 {
        let sum: C64 = (0..n_points).map(|y| C64::new(0.0, delta * y as f64).exp()).sum();
        return (sum / n).norm_sqr();
    }
    let num = (n * half).sin();
    (num * num) / (n * n * s * s)
}

/// Eigen-decomposition of a unitary: (eigenvalues, orthonormal eigenvectors
/// as columns).
///
/// The Hermitian combination K = (U − U†)/2i + α(U + U†)/2 shares U's
/// eigenvectors. Each cluster of nearly equal K eigenvalues is projected out,
/// shifted and rescaled to unit spread, and decomposed again; a block whose
/// spread is below 10⁻¹² is taken as one degenerate eigenvalue.
pub fn unitary_eigen(u: &DMatrix<C64>) -> Result<(Vec<C64>, DMatrix<C64>)> {
    let (values, vectors) = normal_eigen(u, 0)?;
    let residual = (u * &vectors - &vectors * DMatrix::from_diagonal(&DVector::from_vec(values.clone())))
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if residual > 1e-9 {
        return Err(Error::Numerical(format!("unitary eigendecomposition residual {residual:.2e}")));
    }
    Ok((values, vectors))
}

fn normal_eigen(u: &DMatrix<C64>, depth: usize) -> Result<(Vec<C64>, DMatrix<C64>)> {
    const ALPHAS: [f64; 5] = [0.618_033_988_749_894_9, -1.414_213_562_373_095, 2.718_281_828_459_045, 0.123_456_789, -3.302_775_637_731_995];
    const CLUSTER: f64 = 1e-6;
    let n = u.nrows();
    let mean = u.trace() / C64::new(n as f64, 0.0);
    let shifted = u - DMatrix::<C64>::identity(n, n) * mean;
    let spread = shifted.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if n == 1 || spread < 1e-12 {
        return Ok((vec![mean; n], DMatrix::identity(n, n)));
    }
    let a = shifted / C64::new(spread, 0.0);
    let aa = a.adjoint();
    for (attempt, &alpha) in ALPHAS.iter().enumerate() {
        let k = (&a - &aa) * C64::new(0.0, -0.5) + (&a + &aa) * C64::new(0.5 * alpha, 0.0);
        let k = (&k + k.adjoint()) * C64::new(0.5, 0.0);
        let eig = k.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let mut clusters = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] < CLUSTER {
                end += 1;
            }
            clusters.push(start..end);
            start = end;
        }
        if clusters.len() == 1 && attempt + 1 < ALPHAS.len() {
            continue;
        }
        if clusters.len() == 1 || depth > 8 {
            return Err(Error::Numerical("could not separate eigenvalues of the slice unitary".into()));
        }
        let mut values = Vec::with_capacity(n);
        let mut vectors = DMatrix::<C64>::zeros(n, n);
        for range in clusters {
            let v = eig.eigenvectors.select_columns(order[range.clone()].iter());
            let (vals, q) = normal_eigen(&(v.adjoint() * u * &v), depth + 1)?;
            let w = &v * q;
            for (j, col) in range.enumerate() {
                values.push(vals[j]);
                vectors.set_column(col, &w.column(j));
            }
        }
        return Ok((values, vectors));
    }
    unreachable!("the last attempt always returns")
}

fn check_normalized(state: &DVector<C64>) -> Result<()> {
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Invalid(format!("input state is not normalized (norm {norm})")));
    }
    Ok(())
}

/// P(x) = Σ_j |c_j|² K(Mθ_j − 2πx/N) where slice eigenvalues are e^{iθ_j}
/// and c_j the overlaps of the input state with the eigenvectors.
pub fn qpe_distribution(slice: &DMatrix<C64>, m: usize, state: &DVector<C64>, n_ancilla: usize, t: f64) -> Result<QpeDistribution> {
    check_normalized(state)?;
    if slice.nrows() != state.len() {
        return Err(Error::Dimension(format!("unitary is {0}×{0} but the state has {1} amplitudes", slice.nrows(), state.len())));
    }
    let (vals, vecs) = unitary_eigen(slice)?;
    let weights = vecs.adjoint() * state;
    let n_points = 1usize << n_ancilla;
    let mut p = vec![0.0; n_points];
    for (lambda, c) in vals.iter().zip(weights.iter()) {
        let w = c.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let theta = m as f64 * lambda.arg();
        for (x, px) in p.iter_mut().enumerate() {
            *px += w * dirichlet_kernel(theta - 2.0 * PI * x as f64 / n_points as f64, n_points);
        }
    }
    Ok(QpeDistribution {
        probabilities: p,
        n_ancilla,
        m,
        t,
    })
}

/// Eigenphase (in (−π, π]) of the slice eigenvector with the largest
/// overlap with `state`, and that overlap weight.
pub fn dominant_eigenphase(slice: &DMatrix<C64>, state: &DVector<C64>) -> Result<(f64, f64)> {
    let (vals, vecs) = unitary_eigen(slice)?;
    let weights = vecs.adjoint() * state;
    let (j, w) = weights
        .iter()
        .map(|c| c.norm_sqr())
        .enumerate()
        .fold((0, -1.0), |best, (j, w)| if w > best.1 + 1e-12 { (j, w) } else { best });
    Ok((vals[j].arg(), w))
}

fn apply_hadamard(state: &mut [C64], bit: usize) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mask = 1usize << bit;
    for i in 0..state.len() {
        if i & mask == 0 {
            let (a, b) = (state[i], state[i | mask]);
            state[i] = (a + b) * r;
            state[i | mask] = (a - b) * r;
        }
    }
}

fn apply_controlled_phase(state: &mut [C64], a: usize, b: usize, angle: f64) {
    let mask = (1usize << a) | (1usize << b);
    let ph = C64::new(0.0, angle).exp();
    for (i, amp) in state.iter_mut().enumerate() {
        if i & mask == mask {
            *amp *= ph;
        }
    }
}

fn apply_swap(state: &mut [C64], a: usize, b: usize) {
    let (ma, mb) = (1usize << a, 1usize << b);
    for i in 0..state.len() {
        if i & ma != 0 && i & mb == 0 {
            state.swap(i, i ^ ma ^ mb);
        }
    }
}

/// Inverse quantum Fourier transform on bits `offset..offset+n`, built from
/// Hadamards, controlled phases and the final bit-reversal swaps.
pub fn inverse_qft(state: &mut [C64], offset: usize, n: usize) {
    for j in 0..n / 2 {
        apply_swap(state, offset + j, offset + n - 1 - j);
    }
    for i in (0..n).rev() {
        let target = n - 1 - i;
        for m in (1..n - i).rev() {
            apply_controlled_phase(state, offset + target, offset + target - m, -2.0 * PI / (1u64 << (m + 1)) as f64);
        }
        apply_hadamard(state, offset + target);
    }
}

/// Literal circuit: Hadamards on the ancillas, controlled U^{2^k} from
/// ancilla k, inverse QFT, then ancilla marginals. `u` is the full
/// controlled-evolution unitary (slice^M); powers are formed by squaring.
pub fn statevector_qpe(u: &DMatrix<C64>, state: &DVector<C64>, n_ancilla: usize, m: usize, t: f64) -> Result<QpeDistribution> {
    check_normalized(state)?;
    let dim_s = state.len();
    if !dim_s.is_power_of_two() || u.nrows() != dim_s {
        return Err(Error::Dimension(format!("unitary is {0}×{0} but the state has {dim_s} amplitudes", u.nrows())));
    }
    let n_s = dim_s.trailing_zeros() as usize;
    if n_s + n_ancilla > MAX_STATEVECTOR_QUBITS {
        return Err(Error::TooManyQubits {
            qubits: n_s + n_ancilla,
            limit: MAX_STATEVECTOR_QUBITS,
        });
    }
    // Index = system + dim_s · ancilla, so each ancilla value owns a
    // contiguous system block.
    let n_points = 1usize << n_ancilla;
    let mut psi = vec![C64::new(0.0, 0.0); dim_s * n_points];
    psi[..dim_s].copy_from_slice(state.as_slice());
    for k in 0..n_ancilla {
        apply_hadamard(&mut psi, n_s + k);
    }
    let mut power = u.clone();
    for k in 0..n_ancilla {
        for a in (0..n_points).filter(|a| a >> k & 1 == 1) {
            let block = DVector::from_column_slice(&psi[a * dim_s..(a + 1) * dim_s]);
            let out = &power * block;
            psi[a * dim_s..(a + 1) * dim_s].copy_from_slice(out.as_slice());
        }
        if k + 1 < n_ancilla {
            power = &power * &power;
        }
    }
    inverse_qft(&mut psi, n_s, n_ancilla);
    let probabilities = (0..n_points).map(|a| psi[a * dim_s..(a + 1) * dim_s].iter().map(|c| c.norm_sqr()).sum()).collect();
    Ok(QpeDistribution {
        probabilities,
        n_ancilla,
        m,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_unitary(phases: &[f64]) -> DMatrix<C64> {
        DMatrix::from_diagonal(&DVector::from_iterator(phases.len(), phases.iter().map(|&p| C64::new(0.0, p).exp())))
    }

    #[test]
    fn inverse_qft_inverts_the_fourier_transform() {
        let n = 4;
        let big_n = 1 << n;
        for y in [0usize, 3, 9, 15] {
            // (1/√N) Σ_x e^{2πixy/N} |x⟩ must map back to |y⟩.
            let mut v: Vec<C64> = (0..big_n).map(|x| C64::new(0.0, 2.0 * PI * (x * y) as f64 / big_n as f64).exp() / (big_n as f64).sqrt()).collect();
            inverse_qft(&mut v, 0, n);
            for (x, a) in v.iter().enumerate() {
                let expect = if x == y { 1.0 } else { 0.0 };
                assert!((a - C64::new(expect, 0.0)).norm() < 1e-12, "y={y} x={x} {a}");
            }
        }
    }

    #[test]
    fn grid_phase_gives_delta() {
        let n_a = 5;
        let u = diag_unitary(&[2.0 * PI * 7.0 / 32.0, 0.3]);
        let psi = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let d = qpe_distribution(&u, 1, &psi, n_a, 1.0).unwrap();
        for (x, p) in d.probabilities.iter().enumerate() {
            let expect = if x == 7 { 1.0 } else { 0.0 };
            assert!((p - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn mid_bin_leakage_is_dirichlet() {
        let n_a = 6;
        let n = 64.0;
        let theta = 2.0 * PI * 10.5 / n;
        let u = diag_unitary(&[theta]);
        let psi = DVector::from_vec(vec![C64::new(1.0, 0.0)]);
        let d = qpe_distribution(&u, 1, &psi, n_a, 1.0).unwrap();
        for (x, p) in d.probabilities.iter().enumerate() {
            let delta = theta - 2.0 * PI * x as f64 / n;
            let closed = ((n * delta / 2.0).sin() / (n * (delta / 2.0).sin())).powi(2);
            assert!((p - closed).abs() < 1e-12);
        }
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hadamard_test_limit() {
        let theta = 1.234;
        let u = diag_unitary(&[theta]);
        let psi = DVector::from_vec(vec![C64::new(1.0, 0.0)]);
        for d in [qpe_distribution(&u, 1, &psi, 1, 1.0).unwrap(), statevector_qpe(&u, &psi, 1, 1, 1.0).unwrap()] {
            assert!((d.probabilities[0] - (theta / 2.0).cos().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn statevector_matches_spectral_on_random_unitary() {
        let phases = [0.1, 2.3, -1.7, 4.0];
        // Rotate the eigenbasis with a fixed non-trivial unitary.
        let a = DMatrix::from_fn(4, 4, |i, j| C64::new(((i * 3 + j) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 - 1.0));
        let w = nalgebra::linalg::QR::new(a).q();
        let u = &w * diag_unitary(&phases) * w.adjoint();
        let psi = DVector::from_vec(vec![C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(0.0, 0.5), C64::new(0.0, -0.5)]);
        let s = qpe_distribution(&u, 3, &psi, 5, 1.0).unwrap();
        let v = statevector_qpe(&u.pow(3), &psi, 5, 3, 1.0).unwrap();
        for (a, b) in s.probabilities.iter().zip(&v.probabilities) {
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn eigen_resolves_degenerate_and_nearly_degenerate_phases() {
        let phases = [0.3, 0.3, 0.3 + 1e-8, 1.2, -2.0, -2.0 + 3e-7, 3.1, 0.3];
        let n = phases.len();
        let a = DMatrix::from_fn(n, n, |i, j| C64::new(((i * 5 + 3 * j) % 7) as f64 - 3.0, ((2 * i + j) % 4) as f64 - 1.5));
        let w = nalgebra::linalg::QR::new(a).q();
        let u = &w * diag_unitary(&phases) * w.adjoint();
        let (vals, vecs) = unitary_eigen(&u).unwrap();
        let mut got: Vec<f64> = vals.iter().map(|l| l.arg()).collect();
        let mut want = phases.to_vec();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(&want) {
            assert!((g - e).abs() < 1e-10, "{g} {e}");
        }
        let gram = vecs.adjoint() * &vecs - DMatrix::<C64>::identity(n, n);
        assert!(gram.camax() < 1e-10);
    }

    #[test]
    fn rejects_unnormalized_input() {
        let u = diag_unitary(&[0.0]);
        let psi = DVector::from_vec(vec![C64::new(2.0, 0.0)]);
        assert!(matches!(qpe_distribution(&u, 1, &psi, 3, 1.0), Err(Error::Invalid(_))));
    }
}
