//! AO→MO transformation, MP2 energy decompositions, and active-space selection.
//!
//! Orbital indices are 0-based throughout the library. Reports and
//! configuration files use 1-based labels.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrals::{AoIntegrals, Eri};
use crate::units::to_kcal;

/// One- and two-electron integrals over a set of orthonormal orbitals.
#[derive(Debug, Clone)]
pub struct MoIntegrals {
    pub h: DMatrix<f64>,
    /// (pq|rs) in chemists' notation. The physicists' form of the
    /// Hamiltonian uses ⟨pq|rs⟩ = (pr|qs).
    pub eri: Eri,
    /// Fock expectation value per orbital, used as MP2 denominators.
    pub eps: DVector<f64>,
    pub n_core: usize,
    pub n_occ: usize,
    pub e_nuc: f64,
}

impl MoIntegrals {
    pub fn n_mo(&self) -> usize {
        self.h.nrows()
    }

    /// Physicists' ⟨pq|rs⟩.
    pub fn phys(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.eri.get(p, r, q, s)
    }

    /// Closed-shell determinant energy with orbitals 0..n_occ doubly occupied.
    pub fn hf_energy(&self) -> f64 {
        let mut e = self.e_nuc;
        for i in 0..self.n_occ {
            e += 2.0 * self.h[(i, i)];
            for j in 0..self.n_occ {
                e += 2.0 * self.eri.get(i, i, j, j) - self.eri.get(i, j, j, i);
            }
        }
        e
    }

    pub fn is_occupied(&self, p: usize) -> bool {
        p < self.n_occ
    }
}

/// Staged four-index transformation (pq|rs) → (ij|kl), O(N⁵).
pub fn transform_eri(eri: &Eri, c: &DMatrix<f64>) -> Eri {
    let n = eri.dim();
    let m = c.ncols();
    let src = eri.as_slice();
    // Transform the last index, then cyclically rotate index order so each
    // stage works on the trailing axis. Four stages restore the order.
    let mut cur: Vec<f64> = src.to_vec();
    let mut dims = [n, n, n, n];
    for _ in 0..4 {
        let lead = dims[0] * dims[1] * dims[2];
        let inner = dims[3];
        let mut next = vec![0.0; lead * m];
        for a in 0..lead {
            let row = &cur[a * inner..(a + 1) * inner];
            let out = &mut next[a * m..(a + 1) * m];
            for (k, o) in out.iter_mut().enumerate() {
                let mut s = 0.0;
                for (x, &v) in row.iter().enumerate() {
                    s += v * c[(x, k)];
                }
                *o = s;
            }
        }
        // Rotate axes (a, b, c, k) → (k, a, b, c).
        let (d0, d1, d2) = (dims[0], dims[1], dims[2]);
        let mut rotated = vec![0.0; lead * m];
        for i0 in 0..d0 {
            for i1 in 0..d1 {
                for i2 in 0..d2 {
                    for k in 0..m {
                        rotated[((k * d0 + i0) * d1 + i1) * d2 + i2] = next[((i0 * d1 + i1) * d2 + i2) * m + k];
                    }
                }
            }
        }
        cur = rotated;
        dims = [m, d0, d1, d2];
    }
    Eri::from_vec(m, cur).expect("consistent dimensions")
}

/// Transforms AO integrals into the orbital basis `c`.
pub fn ao_to_mo(ints: &AoIntegrals, c: &DMatrix<f64>, eps: DVector<f64>, n_core: usize, n_occ: usize) -> Result<MoIntegrals> {
    if c.nrows() != ints.n_ao {
        return Err(Error::Dimension(format!(
            "coefficients have {} rows but the basis has {} functions",
            c.nrows(),
            ints.n_ao
        )));
    }
    if eps.len() != c.ncols() || n_core > n_occ || n_occ > c.ncols() {
        return Err(Error::Dimension("orbital partition does not match coefficients".into()));
    }
    Ok(MoIntegrals {
        h: c.transpose() * &ints.hcore * c,
        eri: transform_eri(&ints.eri, c),
        eps,
        n_core,
        n_occ,
        e_nuc: ints.e_nuc,
    })
}

/// MP2 correlation energy and its partial sums, all in hartree.
#[derive(Debug, Clone)]
pub struct Mp2Analysis {
    pub total: f64,
    /// Per-orbital contribution; zero for frozen cores.
    pub orbitalwise: DVector<f64>,
    /// Entry (i, a) for occupied i and virtual a; zero elsewhere.
    pub excitationwise: DMatrix<f64>,
}

impl Mp2Analysis {
    pub fn orbitalwise_kcal(&self) -> Vec<f64> {
        self.orbitalwise.iter().map(|&e| to_kcal(e)).collect()
    }
}

/// Spin-summed MP2 over a window of orbitals (frozen cores excluded):
/// E = Σ (ia|jb)[2(ia|jb) − (ib|ja)] / (ε_i + ε_j − ε_a − ε_b).
pub fn mp2_analysis_window(mo: &MoIntegrals, window: &[usize]) -> Result<Mp2Analysis> {
    let n = mo.n_mo();
    if let Some(&p) = window.iter().find(|&&p| p >= n) {
        return Err(Error::Invalid(format!("orbital index {} out of range", p + 1)));
    }
    if let Some(&p) = window.iter().find(|&&p| p < mo.n_core) {
        return Err(Error::AlreadyFrozen(p + 1));
    }
    let occ: Vec<usize> = window.iter().copied().filter(|&p| mo.is_occupied(p)).collect();
    let virt: Vec<usize> = window.iter().copied().filter(|&p| !mo.is_occupied(p)).collect();
    let mut ow = DVector::zeros(n);
    let mut ex = DMatrix::zeros(n, n);
    let mut total = 0.0;
    for &i in &occ {
        for &j in &occ {
            for &a in &virt {
                for &b in &virt {
                    let d = mo.eps[i] + mo.eps[j] - mo.eps[a] - mo.eps[b];
                    if d > -1e-8 {
                        return Err(Error::VanishingDenominator {
                            i: i + 1,
                            j: j + 1,
                            a: a + 1,
                            b: b + 1,
                            denominator: d,
                        });
                    }
                    let iajb = mo.eri.get(i, a, j, b);
                    let ibja = mo.eri.get(i, b, j, a);
                    let term = iajb * (2.0 * iajb - ibja) / d;
                    total += term;
                    ow[i] += term;
                    ow[a] += term;
                    ex[(i, a)] += term;
                }
            }
        }
    }
    Ok(Mp2Analysis {
        total,
        orbitalwise: ow,
        excitationwise: ex,
    })
}

/// Window of every non-core orbital.
pub fn valence_window(mo: &MoIntegrals) -> Vec<usize> {
    (mo.n_core..mo.n_mo()).collect()
}

pub fn mp2_analysis(mo: &MoIntegrals) -> Result<Mp2Analysis> {
    mp2_analysis_window(mo, &valence_window(mo))
}

pub fn mp2_energy(mo: &MoIntegrals, window: &[usize]) -> Result<f64> {
    Ok(mp2_analysis_window(mo, window)?.total)
}

pub fn orbitalwise(mo: &MoIntegrals) -> Result<DVector<f64>> {
    Ok(mp2_analysis(mo)?.orbitalwise)
}

pub fn excitationwise(mo: &MoIntegrals) -> Result<DMatrix<f64>> {
    Ok(mp2_analysis(mo)?.excitationwise)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActiveSpace {
    /// Active orbitals, ascending, 0-based.
    pub active: Vec<usize>,
    /// Doubly occupied orbitals outside the active space (cores included).
    pub frozen: Vec<usize>,
    pub n_active_electrons: usize,
}

impl ActiveSpace {
    /// Builds an active space from chosen orbitals and the occupied count.
    pub fn new(mut active: Vec<usize>, n_occ: usize, n_mo: usize) -> Result<Self> {
        active.sort_unstable();
        active.dedup();
        if let Some(&p) = active.iter().find(|&&p| p >= n_mo) {
            return Err(Error::Invalid(format!("active orbital {} out of range", p + 1)));
        }
        let frozen: Vec<usize> = (0..n_occ).filter(|p| !active.contains(p)).collect();
        let n_active_electrons = 2 * active.iter().filter(|&&p| p < n_occ).count();
        Ok(Self {
            active,
            frozen,
            n_active_electrons,
        })
    }

    pub fn n_orbitals(&self) -> usize {
        self.active.len()
    }

    pub fn n_alpha(&self) -> usize {
        self.n_active_electrons / 2
    }

    pub fn label(&self) -> String {
        format!("({}e,{}o)", self.n_active_electrons, self.active.len())
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.active.iter().map(|p| p + 1).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitalVariation {
    pub orbital: usize,
    pub max_kcal: f64,
    pub min_kcal: f64,
    pub difference_kcal: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport {
    pub theta_var_kcal: f64,
    pub theta_exc_kcal: f64,
    pub variations: Vec<OrbitalVariation>,
    /// 1-based orbitals passing the variation threshold.
    pub step1: Vec<usize>,
    /// (occupied, virtual, |E(i,a)| in kcal/mol) pairs added in step 2.
    pub step2: Vec<(usize, usize, f64)>,
    pub active: Vec<usize>,
    pub label: String,
}

/// Variation of |orbital-wise MP2| (kcal/mol) across geometries.
pub fn orbital_variations(tables: &[DVector<f64>], n_core: usize) -> Vec<OrbitalVariation> {
    let n = tables.first().map_or(0, |t| t.len());
    (n_core..n)
        .map(|p| {
            let vals: Vec<f64> = tables.iter().map(|t| to_kcal(t[p].abs())).collect();
            let max = vals.iter().copied().fold(f64::MIN, f64::max);
            let min = vals.iter().copied().fold(f64::MAX, f64::min);
            OrbitalVariation {
                orbital: p + 1,
                max_kcal: max,
                min_kcal: min,
                difference_kcal: max - min,
            }
        })
        .collect()
}

/// Two-step MP2-based selection. `tables` holds orbital-wise energies per
/// geometry (hartree, same index convention); `exc_ref` is the
/// excitation-wise matrix at the reference geometry.
pub fn select_active(
    tables: &[DVector<f64>],
    exc_ref: &DMatrix<f64>,
    n_core: usize,
    n_occ: usize,
    theta_var_kcal: f64,
    theta_exc_kcal: f64,
) -> Result<(ActiveSpace, SelectionReport)> {
    if tables.is_empty() {
        return Err(Error::Invalid("no orbital-wise tables supplied".into()));
    }
    let n = tables[0].len();
    if tables.iter().any(|t| t.len() != n) || exc_ref.nrows() != n || exc_ref.ncols() != n {
        return Err(Error::Dimension("orbital-wise tables disagree in size".into()));
    }
    let variations = orbital_variations(tables, n_core);
    let step1: Vec<usize> = variations
        .iter()
        .filter(|v| v.difference_kcal > theta_var_kcal)
        .map(|v| v.orbital - 1)
        .collect();
    if step1.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut active = step1.clone();
    let mut step2 = Vec::new();
    for &i in step1.iter().filter(|&&i| i < n_occ) {
        for a in n_occ..n {
            let e = to_kcal(exc_ref[(i, a)].abs());
            if e >= theta_exc_kcal {
                step2.push((i + 1, a + 1, e));
                active.push(a);
            }
        }
    }
    let space = ActiveSpace::new(active, n_occ, n)?;
    let report = SelectionReport {
        theta_var_kcal,
        theta_exc_kcal,
        variations,
        step1: step1.iter().map(|p| p + 1).collect(),
        step2,
        active: space.one_based(),
        label: space.label(),
    };
    Ok((space, report))
}
