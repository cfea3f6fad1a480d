//! Configuration interaction: dense CASCI and direct full-CI by Davidson.

pub mod strings;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_active_hamiltonian, FermionHamiltonian};
use crate::mointegrals::{ActiveSpace, MoIntegrals};
use crate::scf::sorted_eigh;
use strings::{enumerate_strings, single_excitations, Excitation};

/// Largest determinant space handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 6000;
/// Full spectra are returned only up to this dimension.
pub const SPECTRUM_LIMIT: usize = 4096;

/// Determinants |α⟩|β⟩ in α-major order with strings ascending.
#[derive(Debug, Clone)]
pub struct DeterminantSpace {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub alpha: Vec<u64>,
    pub beta: Vec<u64>,
}

impl DeterminantSpace {
    pub fn new(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_alpha > n_orb || n_beta > n_orb || n_orb > 63 {
            return Err(Error::Invalid(format!("cannot place {n_alpha}α/{n_beta}β electrons in {n_orb} orbitals")));
        }
        Ok(Self {
            n_orb,
            n_alpha,
            n_beta,
            alpha: enumerate_strings(n_orb, n_alpha),
            beta: enumerate_strings(n_orb, n_beta),
        })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    /// Spin-orbital occupation: α orbital p is bit p, β orbital p is bit n+p.
    pub fn determinant(&self, index: usize) -> u128 {
        let a = self.alpha[index / self.beta.len()];
        let b = self.beta[index % self.beta.len()];
        a as u128 | (b as u128) << self.n_orb
    }
}

/// Antisymmetrized ⟨pq||rs⟩ over spin orbitals (index < n is α, ≥ n is β).
fn antisym(h: &FermionHamiltonian, p: usize, q: usize, r: usize, s: usize) -> f64 {
    let n = h.n_orb;
    let (sp, sq, sr, ss) = (p / n, q / n, r / n, s / n);
    let (p, q, r, s) = (p % n, q % n, r % n, s % n);
    let direct = if sp == sr && sq == ss { h.eri.get(p, r, q, s) } else { 0.0 };
    let exchange = if sp == ss && sq == sr { h.eri.get(p, s, q, r) } else { 0.0 };
    direct - exchange
}

fn one_body(h: &FermionHamiltonian, p: usize, q: usize) -> f64 {
    let n = h.n_orb;
    if p / n == q / n {
        h.h[(p % n, q % n)]
    } else {
        0.0
    }
}

fn bits(d: u128) -> Vec<usize> {
    (0..128).filter(|&k| d >> k & 1 == 1).collect()
}

fn parity128(d: u128, p: usize) -> f64 {
    if (d & ((1u128 << p) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// ⟨bra|H|ket⟩ by the Slater–Condon rules (scalar excluded).
pub fn slater_condon(h: &FermionHamiltonian, bra: u128, ket: u128) -> f64 {
    let diff = bra ^ ket;
    match diff.count_ones() {
        0 => {
            let occ = bits(ket);
            let mut e = 0.0;
            for (k, &i) in occ.iter().enumerate() {
                e += one_body(h, i, i);
                for &j in &occ[..k] {
                    e += antisym(h, i, j, i, j);
                }
            }
            e
        }
        2 => {
            let i = (ket & diff).trailing_zeros() as usize;
            let a = (bra & diff).trailing_zeros() as usize;
            let k1 = ket ^ (1 << i);
            let sign = parity128(ket, i) * parity128(k1, a);
            let mut v = one_body(h, a, i);
            for j in bits(k1) {
                v += antisym(h, a, j, i, j);
            }
            sign * v
        }
        4 => {
            let holes = bits(ket & diff);
            let parts = bits(bra & diff);
            let (i, j, a, b) = (holes[0], holes[1], parts[0], parts[1]);
            // ⟨bra| a†_a a†_b a_j a_i |ket⟩
            let d1 = ket ^ (1 << i);
            let d2 = d1 ^ (1 << j);
            let d3 = d2 | (1 << b);
            let sign = parity128(ket, i) * parity128(d1, j) * parity128(d2, b) * parity128(d3, a);
            sign * antisym(h, a, b, i, j)
        }
        _ => 0.0,
    }
}

#[derive(Debug, Clone)]
pub struct CasciResult {
    /// Lowest eigenvalue including the scalar part.
    pub energy: f64,
    pub vector: DVector<f64>,
    /// All eigenvalues (scalar included) when the space is small.
    pub spectrum: Option<Vec<f64>>,
}

/// Dense Hamiltonian matrix in the determinant basis (scalar excluded).
pub fn dense_matrix(h: &FermionHamiltonian, space: &DeterminantSpace) -> DMatrix<f64> {
    let dim = space.dim();
    let dets: Vec<u128> = (0..dim).map(|i| space.determinant(i)).collect();
    let cols: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|j| (0..dim).map(|i| slater_condon(h, dets[i], dets[j])).collect())
        .collect();
    DMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Exact diagonalization of the active Hamiltonian in one (n_α, n_β) sector.
pub fn casci_energy(h: &FermionHamiltonian, n_alpha: usize, n_beta: usize) -> Result<CasciResult> {
    let space = DeterminantSpace::new(h.n_orb, n_alpha, n_beta)?;
    let dim = space.dim();
    if dim > DENSE_LIMIT {
        return Err(Error::DimensionOverflow { dim, limit: DENSE_LIMIT });
    }
    let (vals, vecs) = sorted_eigh(dense_matrix(h, &space));
    let mut vector = vecs.column(0).clone_owned();
    let imax = vector.iamax();
    if vector[imax] < 0.0 {
        vector.neg_mut();
    }
    Ok(CasciResult {
        energy: vals[0] + h.e_scalar,
        vector,
        spectrum: (dim <= SPECTRUM_LIMIT).then(|| vals.iter().map(|v| v + h.e_scalar).collect()),
    })
}

/// Sparse operator over one spin's strings:
/// Σ k_pq E_pq + ½ Σ (pq|rs) E_pq E_rs with k_pq = h_pq − ½ Σ_r (pr|rq).
struct StringOperator {
    rows: Vec<Vec<(u32, f64)>>,
}

impl StringOperator {
    fn new(h: &FermionHamiltonian, singles: &[Vec<Excitation>]) -> Self {
        let n = h.n_orb;
        let k = DMatrix::from_fn(n, n, |p, q| h.h[(p, q)] - 0.5 * (0..n).map(|r| h.eri.get(p, r, r, q)).sum::<f64>());
        let n_str = singles.len();
        let rows = (0..n_str)
            .into_par_iter()
            .map(|i| {
                // Column i of the operator, i.e. H|I⟩, gathered then transposed
                // by symmetry (the operator is Hermitian and real).
                let mut acc: std::collections::BTreeMap<u32, f64> = std::collections::BTreeMap::new();
                for e1 in &singles[i] {
                    let (r, s) = (e1.pq as usize / n, e1.pq as usize % n);
                    *acc.entry(e1.target).or_insert(0.0) += k[(r, s)] * e1.sign;
                    for e2 in &singles[e1.target as usize] {
                        let (p, q) = (e2.pq as usize / n, e2.pq as usize % n);
                        *acc.entry(e2.target).or_insert(0.0) += 0.5 * h.eri.get(p, q, r, s) * e1.sign * e2.sign;
                    }
                }
                acc.into_iter().filter(|(_, v)| *v != 0.0).collect()
            })
            .collect();
        Self { rows }
    }

    fn diagonal(&self, i: usize) -> f64 {
        self.rows[i].iter().find(|(j, _)| *j as usize == i).map_or(0.0, |x| x.1)
    }
}

/// Direct CI sigma builder over α/β strings.
pub struct DirectCi<'a> {
    h: &'a FermionHamiltonian,
    space: DeterminantSpace,
    op_a: StringOperator,
    op_b: StringOperator,
    /// Reverse single lists: for each string J, all (pq, I, sign) with E_pq|I⟩ = sign|J⟩.
    into_a: Vec<Vec<Excitation>>,
    into_b: Vec<Vec<Excitation>>,
}

fn reverse(singles: &[Vec<Excitation>], n: usize) -> Vec<Vec<Excitation>> {
    // E_pq|I⟩ = s|J⟩ ⇔ E_qp|J⟩ = s|I⟩, so transposing pq turns the forward
    // table of J into the reverse table.
    singles
        .iter()
        .map(|list| {
            list.iter()
                .map(|e| {
                    let (p, q) = (e.pq as usize / n, e.pq as usize % n);
                    Excitation {
                        pq: (q * n + p) as u32,
                        target: e.target,
                        sign: e.sign,
                    }
                })
                .collect()
        })
        .collect()
}

impl<'a> DirectCi<'a> {
    pub fn new(h: &'a FermionHamiltonian, n_alpha: usize, n_beta: usize) -> Result<Self> {
        let space = DeterminantSpace::new(h.n_orb, n_alpha, n_beta)?;
        let sa = single_excitations(&space.alpha, h.n_orb);
        let sb = single_excitations(&space.beta, h.n_orb);
        let op_a = StringOperator::new(h, &sa);
        let op_b = StringOperator::new(h, &sb);
        let into_a = reverse(&sa, h.n_orb);
        let into_b = reverse(&sb, h.n_orb);
        Ok(Self {
            h,
            space,
            op_a,
            op_b,
            into_a,
            into_b,
        })
    }

    pub fn space(&self) -> &DeterminantSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Diagonal of H (scalar excluded).
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.h.n_orb;
        let nb = self.space.beta.len();
        (0..self.dim())
            .into_par_iter()
            .map(|idx| {
                let (ia, ib) = (idx / nb, idx % nb);
                let (a, b) = (self.space.alpha[ia], self.space.beta[ib]);
                let mut d = self.op_a.diagonal(ia) + self.op_b.diagonal(ib);
                for p in (0..n).filter(|p| a >> p & 1 == 1) {
                    for q in (0..n).filter(|q| b >> q & 1 == 1) {
                        d += self.h.eri.get(p, p, q, q);
                    }
                }
                d
            })
            .collect()
    }

    /// σ = H c (scalar excluded). Parallel over α strings of the output;
    /// every output element is summed in a fixed order.
    pub fn sigma(&self, c: &[f64]) -> Vec<f64> {
        let n = self.h.n_orb;
        let nb = self.space.beta.len();
        let na = self.space.alpha.len();
        let eri = self.h.eri.as_slice();
        let n2 = n * n;
        let mut out = vec![0.0; na * nb];
        out.par_chunks_mut(nb).enumerate().for_each(|(ja, row)| {
            // αα
            for &(ia, v) in &self.op_a.rows[ja] {
                let src = &c[ia as usize * nb..(ia as usize + 1) * nb];
                for (o, &x) in row.iter_mut().zip(src) {
                    *o += v * x;
                }
            }
            // ββ
            let src = &c[ja * nb..(ja + 1) * nb];
            for (jb, o) in row.iter_mut().enumerate() {
                let mut s = 0.0;
                for &(ib, v) in &self.op_b.rows[jb] {
                    s += v * src[ib as usize];
                }
                *o += s;
            }
            // αβ: Σ (pq|rs) ⟨J_α|E_pq|I_α⟩⟨J_β|E_rs|I_β⟩ c(I_α, I_β)
            for ea in &self.into_a[ja] {
                let src = &c[ea.target as usize * nb..(ea.target as usize + 1) * nb];
                let g = &eri[ea.pq as usize * n2..(ea.pq as usize + 1) * n2];
                for (jb, o) in row.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for eb in &self.into_b[jb] {
                        s += g[eb.pq as usize] * eb.sign * src[eb.target as usize];
                    }
                    *o += ea.sign * s;
                }
            }
        });
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DavidsonOptions {
    pub max_subspace: usize,
    pub max_iterations: usize,
    pub residual_tolerance: f64,
}

impl Default for DavidsonOptions {
    fn default() -> Self {
        Self {
            max_subspace: 24,
            max_iterations: 300,
            residual_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DavidsonResult {
    /// Lowest eigenvalue including the scalar part.
    pub energy: f64,
    pub iterations: usize,
    pub residual: f64,
    pub dimension: usize,
    /// Ritz value (scalar included) after every iteration.
    pub history: Vec<f64>,
    #[serde(skip)]
    pub vector: Vec<f64>,
}

/// Deterministic dot product: fixed-size chunks reduced in order.
fn dot_fixed(a: &[f64], b: &[f64]) -> f64 {
    const CHUNK: usize = 1 << 14;
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// Lowest eigenpair of the CI Hamiltonian by Davidson iteration starting
/// from the lowest-string determinant.
pub fn davidson(h: &FermionHamiltonian, n_alpha: usize, n_beta: usize, opts: &DavidsonOptions) -> Result<DavidsonResult> {
    let ci = DirectCi::new(h, n_alpha, n_beta)?;
    let dim = ci.dim();
    let diag = ci.diagonal();
    let mut x0 = vec![0.0; dim];
    x0[0] = 1.0;
    let mut basis: Vec<Vec<f64>> = vec![x0];
    let mut sigmas: Vec<Vec<f64>> = vec![ci.sigma(&basis[0])];
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;

    for iter in 1..=opts.max_iterations {
        let k = basis.len();
        let g = DMatrix::from_fn(k, k, |i, j| dot_fixed(&basis[i], &sigmas[j]));
        let g = (&g + g.transpose()) * 0.5;
        let (vals, vecs) = sorted_eigh(g);
        let theta = vals[0];
        let y = vecs.column(0);
        let combine = |vs: &Vec<Vec<f64>>| -> Vec<f64> {
            let mut out = vec![0.0; dim];
            out.par_iter_mut().enumerate().for_each(|(i, o)| {
                *o = (0..k).map(|m| y[m] * vs[m][i]).sum();
            });
            out
        };
        let x = combine(&basis);
        let sx = combine(&sigmas);
        let r: Vec<f64> = sx.par_iter().zip(&x).map(|(s, xi)| s - theta * xi).collect();
        residual = dot_fixed(&r, &r).sqrt();
        history.push(theta + h.e_scalar);
        log::debug!("davidson iter {iter}: E = {:.12} |r| = {residual:.3e} (subspace {k})", theta + h.e_scalar);
        if residual < opts.residual_tolerance {
            return Ok(DavidsonResult {
                energy: theta + h.e_scalar,
                iterations: iter,
                residual,
                dimension: dim,
                history,
                vector: x,
            });
        }
        if k >= opts.max_subspace {
            basis = vec![x];
            sigmas = vec![sx];
        }
        // Diagonal-preconditioned correction, orthogonalized twice.
        let mut t: Vec<f64> = r
            .par_iter()
            .zip(&diag)
            .map(|(ri, di)| {
                let d = theta - di;
                let d = if d.abs() < 1e-8 { 1e-8f64.copysign(d) } else { d };
                ri / d
            })
            .collect();
        for _ in 0..2 {
            for v in &basis {
                let ov = dot_fixed(v, &t);
                t.par_iter_mut().zip(v).for_each(|(ti, vi)| *ti -= ov * vi);
            }
        }
        let norm = dot_fixed(&t, &t).sqrt();
        if norm < 1e-14 {
            return Err(Error::DavidsonNotConverged { iterations: iter, residual });
        }
        t.par_iter_mut().for_each(|ti| *ti /= norm);
        let st = ci.sigma(&t);
        basis.push(t);
        sigmas.push(st);
    }
    Err(Error::DavidsonNotConverged {
        iterations: opts.max_iterations,
        residual,
    })
}

/// Full CI over every orbital not in `frozen` (frozen orbitals doubly occupied).
pub fn fci_davidson(
    mo: &MoIntegrals,
    frozen: &[usize],
    n_alpha: usize,
    n_beta: usize,
    opts: &DavidsonOptions,
) -> Result<DavidsonResult> {
    let active: Vec<usize> = (0..mo.n_mo()).filter(|p| !frozen.contains(p)).collect();
    let n_act_el = n_alpha + n_beta;
    let space = ActiveSpace {
        active,
        frozen: frozen.to_vec(),
        n_active_electrons: n_act_el,
    };
    let h = build_active_hamiltonian(mo, &space)?;
    davidson(&h, n_alpha, n_beta, opts)
}

/// Ground-state energy by the dense solver when small enough, else Davidson.
pub fn ground_state_energy(h: &FermionHamiltonian, n_alpha: usize, n_beta: usize) -> Result<f64> {
    let dim = DeterminantSpace::new(h.n_orb, n_alpha, n_beta)?.dim();
    if dim <= DENSE_LIMIT {
        Ok(casci_energy(h, n_alpha, n_beta)?.energy)
    } else {
        Ok(davidson(h, n_alpha, n_beta, &DavidsonOptions::default())?.energy)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExclusionPoint {
    /// 1-based orbital removed from the space.
    pub orbital: usize,
    pub energy: f64,
    pub abs_difference: f64,
}

/// |E(space without p) − E(space)| where an occupied p becomes doubly
/// occupied and frozen, and a virtual p is discarded.
pub fn casci_orbital_exclusion_scan(mo: &MoIntegrals, base: &ActiveSpace, p: usize, e_reference: f64) -> Result<ExclusionPoint> {
    if base.frozen.contains(&p) {
        return Err(Error::AlreadyFrozen(p + 1));
    }
    if !base.active.contains(&p) {
        return Err(Error::Invalid(format!("orbital {} is not in the base space", p + 1)));
    }
    let mut active = base.active.clone();
    active.retain(|&q| q != p);
    let mut frozen = base.frozen.clone();
    let mut n_el = base.n_active_electrons;
    if mo.is_occupied(p) {
        frozen.push(p);
        frozen.sort_unstable();
        n_el -= 2;
    }
    let space = ActiveSpace {
        active,
        frozen,
        n_active_electrons: n_el,
    };
    let h = build_active_hamiltonian(mo, &space)?;
    let e = ground_state_energy(&h, n_el / 2, n_el / 2)?;
    Ok(ExclusionPoint {
        orbital: p + 1,
        energy: e,
        abs_difference: (e - e_reference).abs(),
    })
}

/// ⟨HF|H|HF⟩ with the lowest orbitals occupied, via the determinant rules.
pub fn reference_energy(h: &FermionHamiltonian, n_alpha: usize, n_beta: usize) -> Result<f64> {
    let space = DeterminantSpace::new(h.n_orb, n_alpha, n_beta)?;
    let d = space.determinant(0);
    Ok(slater_condon(h, d, d) + h.e_scalar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::tests::random_hamiltonian;
    use crate::hamiltonian::{jordan_wigner, jordan_wigner_with, SpinOrdering};
    use nalgebra::SymmetricEigen;

    fn sorted(v: impl IntoIterator<Item = f64>) -> Vec<f64> {
        let mut v: Vec<f64> = v.into_iter().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn two_electrons_in_two_orbitals_closed_form() {
        let h = random_hamiltonian(2, 21);
        let space = DeterminantSpace::new(2, 1, 1).unwrap();
        let m = dense_matrix(&h, &space);
        // Singlet: {|0α0β⟩, |1α1β⟩, (|0α1β⟩ + |1α0β⟩)/√2} and the triplet
        // component; check the lowest root against the 3×3 singlet problem
        // written from integrals directly.
        let (h00, h11, h01) = (h.h[(0, 0)], h.h[(1, 1)], h.h[(0, 1)]);
        let g = |p, q, r, s| h.eri.get(p, q, r, s);
        let e_a = 2.0 * h00 + g(0, 0, 0, 0);
        let e_b = 2.0 * h11 + g(1, 1, 1, 1);
        let e_s = h00 + h11 + g(0, 0, 1, 1) + g(0, 1, 1, 0);
        let k = g(0, 1, 0, 1);
        let t_a = 2f64.sqrt() * (h01 + g(0, 1, 0, 0));
        let t_b = 2f64.sqrt() * (h01 + g(0, 1, 1, 1));
        let singlet = DMatrix::from_row_slice(3, 3, &[e_a, k, t_a, k, e_b, t_b, t_a, t_b, e_s]);
        let lowest_singlet = sorted(SymmetricEigen::new(singlet).eigenvalues.iter().copied())[0];
        let triplet = h00 + h11 + g(0, 0, 1, 1) - g(0, 1, 1, 0);
        let all = sorted(SymmetricEigen::new(m).eigenvalues.iter().copied());
        let expect = lowest_singlet.min(triplet);
        assert!((all[0] - expect).abs() < 1e-12, "{} vs {expect}", all[0]);
    }

    #[test]
    fn sigma_matches_dense() {
        for (n, na, nb, seed) in [(3, 2, 2, 1), (4, 2, 1, 2), (5, 3, 2, 3), (4, 0, 2, 4)] {
            let h = random_hamiltonian(n, seed);
            let ci = DirectCi::new(&h, na, nb).unwrap();
            let m = dense_matrix(&h, ci.space());
            let c: Vec<f64> = (0..ci.dim()).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
            let s = ci.sigma(&c);
            let s_ref = &m * DVector::from_vec(c.clone());
            for i in 0..ci.dim() {
                assert!((s[i] - s_ref[i]).abs() < 1e-12, "n={n} i={i}: {} vs {}", s[i], s_ref[i]);
            }
            let d = ci.diagonal();
            for i in 0..ci.dim() {
                assert!((d[i] - m[(i, i)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qubit_sector_spectrum_equals_ci() {
        for (seed, ordering) in [(5, SpinOrdering::Interleaved), (6, SpinOrdering::Blocked), (7, SpinOrdering::Interleaved)] {
            let h = random_hamiltonian(3, seed);
            let q = jordan_wigner_with(&h, ordering);
            for (na, nb) in [(2, 2), (1, 2), (1, 1)] {
                let qs = sorted(SymmetricEigen::new(q.sector_matrix(&q.particle_sector(na, nb)).unwrap()).eigenvalues.iter().copied());
                let spec = casci_energy(&h, na, nb).unwrap().spectrum.unwrap();
                assert_eq!(qs.len(), spec.len());
                for (a, b) in qs.iter().zip(&spec) {
                    assert!((a - b).abs() < 1e-10, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn qubit_matrix_elements_match_determinants() {
        // Determinant |αβ⟩ ↔ qubit basis state with interleaved layout; the
        // two sign conventions differ per determinant by a fixed ±1, so
        // compare |⟨i|H|j⟩|.
        let h = random_hamiltonian(3, 31);
        let q = jordan_wigner(&h);
        let space = DeterminantSpace::new(3, 2, 1).unwrap();
        let to_qubits = |d: u128| -> u64 {
            let mut b = 0u64;
            for p in 0..3 {
                if d >> p & 1 == 1 {
                    b |= 1 << (2 * p);
                }
                if d >> (3 + p) & 1 == 1 {
                    b |= 1 << (2 * p + 1);
                }
            }
            b
        };
        let sector: Vec<u64> = (0..space.dim()).map(|i| to_qubits(space.determinant(i))).collect();
        let mut sorted_sector = sector.clone();
        sorted_sector.sort_unstable();
        let qm = q.sector_matrix(&sorted_sector).unwrap();
        let pos = |b: u64| sorted_sector.binary_search(&b).unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 4), (2, 5), (3, 8), (6, 7)] {
            let (di, dj) = (space.determinant(i), space.determinant(j));
            let sc = slater_condon(&h, di, dj) + if i == j { h.e_scalar } else { 0.0 };
            let qv = qm[(pos(sector[i]), pos(sector[j]))];
            assert!((sc.abs() - qv.abs()).abs() < 1e-12, "({i},{j}) {sc} vs {qv}");
        }
    }

    #[test]
    fn davidson_equals_dense() {
        let h = random_hamiltonian(6, 17);
        let dense = casci_energy(&h, 3, 3).unwrap().energy;
        let dav = davidson(&h, 3, 3, &DavidsonOptions::default()).unwrap();
        assert!((dense - dav.energy).abs() < 1e-9, "{dense} {}", dav.energy);
        for w in dav.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
    }

    #[test]
    fn reference_energy_is_closed_shell_energy() {
        let h = random_hamiltonian(4, 3);
        let e = reference_energy(&h, 2, 2).unwrap();
        assert!((e - h.closed_shell_energy(2)).abs() < 1e-12);
    }

    #[test]
    fn dense_limit_enforced() {
        let h = random_hamiltonian(10, 1);
        assert!(matches!(casci_energy(&h, 5, 5), Err(Error::DimensionOverflow { .. })));
    }
}
