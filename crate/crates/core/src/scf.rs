//! Closed-shell restricted Hartree–Fock with DIIS acceleration.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrals::{AoIntegrals, Eri};

#[derive(Debug, Clone, Serialize)]
pub struct ScfOptions {
    pub max_iterations: usize,
    pub energy_tolerance: f64,
    pub density_tolerance: f64,
    pub diis: bool,
    pub diis_size: usize,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            energy_tolerance: 1e-12,
            density_tolerance: 1e-10,
            diis: true,
            diis_size: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScfResult {
    /// MO coefficients, columns sorted by ascending orbital energy.
    pub c: DMatrix<f64>,
    pub eps: DVector<f64>,
    pub fock: DMatrix<f64>,
    pub density: DMatrix<f64>,
    pub energy: f64,
    pub n_occ: usize,
    pub iterations: usize,
}

/// Total density P = 2 C_occ C_occᵀ.
pub fn density(c: &DMatrix<f64>, n_occ: usize) -> DMatrix<f64> {
    let occ = c.columns(0, n_occ);
    2.0 * &occ * occ.transpose()
}

/// F = H + Σ_rs P_rs [(pq|rs) − ½(pr|qs)].
pub fn fock_matrix(hcore: &DMatrix<f64>, eri: &Eri, p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = hcore.nrows();
    let mut f = hcore.clone();
    for a in 0..n {
        for b in 0..=a {
            let mut g = 0.0;
            for r in 0..n {
                for s in 0..n {
                    g += p[(r, s)] * (eri.get(a, b, r, s) - 0.5 * eri.get(a, r, b, s));
                }
            }
            f[(a, b)] += g;
            if a != b {
                f[(b, a)] += g;
            }
        }
    }
    f
}

/// E = ½ Tr[P (H + F)] + E_nuc.
pub fn electronic_energy(hcore: &DMatrix<f64>, fock: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    0.5 * p.component_mul(&(hcore + fock)).sum()
}

/// Eigen-decomposition with eigenvalues ascending.
pub(crate) fn sorted_eigh(m: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Flips each column so its largest-magnitude entry is positive (ties: lowest row).
pub fn fix_signs(c: &mut DMatrix<f64>) {
    for mut col in c.column_iter_mut() {
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() + 1e-12 {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Symmetric orthogonalizer S^(−1/2).
pub fn inverse_sqrt(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = sorted_eigh(s.clone());
    if vals[0] < 1e-8 {
        return Err(Error::Numerical(format!(
            "overlap matrix is numerically singular (smallest eigenvalue {:.3e})",
            vals[0]
        )));
    }
    let d = DMatrix::from_diagonal(&vals.map(|v| 1.0 / v.sqrt()));
    Ok(&vecs * d * vecs.transpose())
}

fn diis_extrapolate(focks: &VecDeque<DMatrix<f64>>, errors: &VecDeque<DMatrix<f64>>) -> Option<DMatrix<f64>> {
    let m = focks.len();
    let mut b = DMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..=i {
            let v = errors[i].dot(&errors[j]);
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
        b[(i, m)] = -1.0;
        b[(m, i)] = -1.0;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = -1.0;
    let coef = b.lu().solve(&rhs)?;
    if coef.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let mut f = DMatrix::zeros(focks[0].nrows(), focks[0].ncols());
    for i in 0..m {
        f += &focks[i] * coef[i];
    }
    Some(f)
}

/// Runs closed-shell RHF from the core-Hamiltonian guess.
pub fn run_rhf(ints: &AoIntegrals, n_electrons: usize, opts: &ScfOptions) -> Result<ScfResult> {
    if n_electrons == 0 || n_electrons % 2 != 0 {
        return Err(Error::Invalid(format!(
            "closed-shell RHF needs a positive even electron count, got {n_electrons}"
        )));
    }
    let n_occ = n_electrons / 2;
    if n_occ > ints.n_ao {
        return Err(Error::Invalid(format!("{n_electrons} electrons do not fit into {} orbitals", ints.n_ao)));
    }
    let s = &ints.overlap;
    let x = inverse_sqrt(s)?;
    let xt = x.transpose();

    let diagonalize = |f: &DMatrix<f64>| {
        let (eps, cp) = sorted_eigh(&xt * f * &x);
        (eps, &x * cp)
    };

    let (_, c_guess) = diagonalize(&ints.hcore);
    let mut p = density(&c_guess, n_occ);
    let mut energy = f64::NAN;
    let mut focks = VecDeque::new();
    let mut errors = VecDeque::new();
    let mut last_de = f64::INFINITY;
    let mut last_dp = f64::INFINITY;

    for iter in 1..=opts.max_iterations {
        let f = fock_matrix(&ints.hcore, &ints.eri, &p);
        let e_new = electronic_energy(&ints.hcore, &f, &p) + ints.e_nuc;

        let mut f_use = f.clone();
        if opts.diis {
            let err = &xt * (&f * &p * s - s * &p * &f) * &x;
            focks.push_back(f.clone());
            errors.push_back(err);
            while focks.len() > opts.diis_size.max(1) {
                focks.pop_front();
                errors.pop_front();
            }
            if focks.len() >= 2 {
                if let Some(fx) = diis_extrapolate(&focks, &errors) {
                    f_use = fx;
                }
            }
        }

        let (_, c_new) = diagonalize(&f_use);
        let p_new = density(&c_new, n_occ);
        last_dp = (&p_new - &p).amax();
        last_de = (e_new - energy).abs();
        energy = e_new;
        p = p_new;
        log::trace!("scf iter {iter}: E = {energy:.12} dE = {last_de:.3e} dP = {last_dp:.3e}");

        if last_de < opts.energy_tolerance && last_dp < opts.density_tolerance {
            // Final consistent Fock build and diagonalization from the converged density.
            let fock = fock_matrix(&ints.hcore, &ints.eri, &p);
            let energy = electronic_energy(&ints.hcore, &fock, &p) + ints.e_nuc;
            let (eps, mut c) = diagonalize(&fock);
            fix_signs(&mut c);
            let density = density(&c, n_occ);
            return Ok(ScfResult {
                c,
                eps,
                fock,
                density,
                energy,
                n_occ,
                iterations: iter,
            });
        }
    }
    Err(Error::ScfNotConverged {
        iterations: opts.max_iterations,
        last_energy: energy,
        last_delta_e: last_de,
        last_delta_p: last_dp,
    })
}

/// Largest deviation of CᵀSC from the identity.
pub fn orthonormality_error(c: &DMatrix<f64>, s: &DMatrix<f64>) -> f64 {
    let m = c.transpose() * s * c;
    (m - DMatrix::identity(c.ncols(), c.ncols())).amax()
}

/// ε_p = c_pᵀ F c_p for every column of an S-orthonormal coefficient matrix.
pub fn fock_expectations(fock: &DMatrix<f64>, c: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<DVector<f64>> {
    if fock.nrows() != c.nrows() || s.nrows() != c.nrows() {
        return Err(Error::Dimension(format!(
            "Fock {}×{}, overlap {}×{}, coefficients {}×{}",
            fock.nrows(),
            fock.ncols(),
            s.nrows(),
            s.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    let err = orthonormality_error(c, s);
    if err > 1e-8 {
        return Err(Error::Invalid(format!("orbitals are not orthonormal (max |CᵀSC − I| = {err:.3e})")));
    }
    Ok(DVector::from_iterator(
        c.ncols(),
        c.column_iter().map(|col| (col.transpose() * fock * col)[(0, 0)]),
    ))
}

/// RHF energy from an arbitrary set of doubly occupied orbitals.
pub fn energy_from_orbitals(ints: &AoIntegrals, c_occ: &DMatrix<f64>) -> f64 {
    let p = 2.0 * c_occ * c_occ.transpose();
    let f = fock_matrix(&ints.hcore, &ints.eri, &p);
    electronic_energy(&ints.hcore, &f, &p) + ints.e_nuc
}
