//! Boys localization, deterministic orbital ordering, and overlap diagnostics.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrals::AoIntegrals;
use crate::scf::{fix_signs, fock_expectations, orthonormality_error, ScfResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitalBlock {
    FrozenCore,
    OccupiedValence,
    Virtual,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoysOptions {
    pub max_sweeps: usize,
    pub tolerance: f64,
    /// Additional randomly rotated starting points besides the input orbitals.
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for BoysOptions {
    fn default() -> Self {
        Self {
            max_sweeps: 200,
            tolerance: 1e-10,
            random_starts: 8,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoysResult {
    pub c: DMatrix<f64>,
    /// D = Σ_i |⟨i|r|i⟩|² in bohr².
    pub functional: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone)]
pub struct LocalizedOrbitals {
    pub c: DMatrix<f64>,
    pub blocks: Vec<OrbitalBlock>,
    /// Fock expectation value of every column (hartree).
    pub fock_diagonal: DVector<f64>,
    pub functional_occupied: f64,
    pub functional_virtual: f64,
    pub n_core: usize,
    pub n_occ: usize,
}

impl LocalizedOrbitals {
    pub fn n_mo(&self) -> usize {
        self.c.ncols()
    }

    /// Index ranges (0-based) of the three blocks.
    pub fn block_ranges(&self) -> [std::ops::Range<usize>; 3] {
        [0..self.n_core, self.n_core..self.n_occ, self.n_occ..self.n_mo()]
    }
}

/// Orbital dipole matrices ⟨i| r_k |j⟩.
fn mo_dipoles(c: &DMatrix<f64>, dipole: &[DMatrix<f64>; 3]) -> [DMatrix<f64>; 3] {
    [0, 1, 2].map(|k| c.transpose() * &dipole[k] * c)
}

pub fn boys_functional(c: &DMatrix<f64>, dipole: &[DMatrix<f64>; 3]) -> f64 {
    let r = mo_dipoles(c, dipole);
    (0..c.ncols())
        .map(|i| (0..3).map(|k| r[k][(i, i)].powi(2)).sum::<f64>())
        .sum()
}

fn rotate_pair(m: &mut DMatrix<f64>, i: usize, j: usize, cos: f64, sin: f64) {
    // Columns then rows of a symmetric matrix.
    for r in 0..m.nrows() {
        let (a, b) = (m[(r, i)], m[(r, j)]);
        m[(r, i)] = cos * a + sin * b;
        m[(r, j)] = -sin * a + cos * b;
    }
    for c in 0..m.ncols() {
        let (a, b) = (m[(i, c)], m[(j, c)]);
        m[(i, c)] = cos * a + sin * b;
        m[(j, c)] = -sin * a + cos * b;
    }
}

/// Jacobi-sweep maximization of the Boys functional from one starting point.
fn jacobi_boys(c0: &DMatrix<f64>, dipole: &[DMatrix<f64>; 3], opts: &BoysOptions) -> Result<BoysResult> {
    let n = c0.ncols();
    let mut c = c0.clone();
    let mut r = mo_dipoles(&c, dipole);
    let functional = |r: &[DMatrix<f64>; 3]| -> f64 {
        (0..n).map(|i| (0..3).map(|k| r[k][(i, i)].powi(2)).sum::<f64>()).sum()
    };
    let mut d = functional(&r);
    let mut trajectory = vec![d];
    for sweep in 1..=opts.max_sweeps {
        for i in 0..n {
            for j in (i + 1)..n {
                let mut a = 0.0;
                let mut b = 0.0;
                for rk in &r {
                    let diff = rk[(i, i)] - rk[(j, j)];
                    a += rk[(i, j)].powi(2) - 0.25 * diff * diff;
                    b += rk[(i, j)] * diff;
                }
                // Gain of a rotation by θ is A(1 − cos 4θ) + B sin 4θ.
                let norm = a.hypot(b);
                if a + norm < 1e-14 {
                    continue;
                }
                let theta = 0.25 * b.atan2(-a);
                let (sin, cos) = theta.sin_cos();
                for rk in r.iter_mut() {
                    rotate_pair(rk, i, j, cos, sin);
                }
                for row in 0..c.nrows() {
                    let (x, y) = (c[(row, i)], c[(row, j)]);
                    c[(row, i)] = cos * x + sin * y;
                    c[(row, j)] = -sin * x + cos * y;
                }
            }
        }
        let d_new = functional(&r);
        if d_new < d - 1e-9 * d.abs().max(1.0) {
            return Err(Error::Numerical(format!(
                "Boys functional decreased during sweep {sweep}: {d} -> {d_new}"
            )));
        }
        trajectory.push(d_new);
        let gain = d_new - d;
        d = d_new;
        if gain < opts.tolerance {
            return Ok(BoysResult {
                c,
                functional: d,
                sweeps: sweep,
            });
        }
    }
    let tail = trajectory[trajectory.len().saturating_sub(5)..].to_vec();
    Err(Error::LocalizationNotConverged {
        sweeps: opts.max_sweeps,
        trajectory: tail,
    })
}

/// Random orthogonal matrix from Gram–Schmidt on uniform entries.
fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

/// Maximizes the Boys functional within the span of `c_block`.
///
/// The Jacobi iteration is started from the input orbitals and from
/// `opts.random_starts` random rotations of them; the best optimum wins.
/// Single starts can stall in local maxima when several lone-pair-like
/// orbitals are nearly equivalent.
pub fn boys_localize(c_block: &DMatrix<f64>, dipole: &[DMatrix<f64>; 3], opts: &BoysOptions) -> Result<BoysResult> {
    let n = c_block.ncols();
    if n <= 1 {
        return Ok(BoysResult {
            c: c_block.clone(),
            functional: boys_functional(c_block, dipole),
            sweeps: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = jacobi_boys(c_block, dipole, opts)?;
    for _ in 0..opts.random_starts {
        let q = random_orthogonal(n, &mut rng);
        let trial = jacobi_boys(&(c_block * q), dipole, opts)?;
        if trial.functional > best.functional + 1e-9 {
            best = trial;
        }
    }
    Ok(best)
}

/// Sorts a block by ascending Fock expectation and fixes column signs.
fn sort_block(c: &DMatrix<f64>, fock: &DMatrix<f64>) -> DMatrix<f64> {
    let e: Vec<f64> = c.column_iter().map(|col| (col.transpose() * fock * col)[(0, 0)]).collect();
    let mut order: Vec<usize> = (0..c.ncols()).collect();
    order.sort_by(|&a, &b| e[a].total_cmp(&e[b]).then(a.cmp(&b)));
    let mut out = c.select_columns(order.iter());
    fix_signs(&mut out);
    out
}

/// Imposes the global index convention: cores, occupied valence, virtuals;
/// ascending Fock expectation inside each block; positive largest coefficient.
pub fn order_and_sign(
    c: &DMatrix<f64>,
    n_core: usize,
    n_occ: usize,
    fock: &DMatrix<f64>,
    s: &DMatrix<f64>,
) -> Result<LocalizedOrbitals> {
    let n = c.ncols();
    if n_core > n_occ || n_occ > n {
        return Err(Error::Dimension(format!("blocks {n_core}/{n_occ}/{n}")));
    }
    let mut out = DMatrix::zeros(c.nrows(), n);
    for range in [0..n_core, n_core..n_occ, n_occ..n] {
        let sorted = sort_block(&c.columns(range.start, range.len()).clone_owned(), fock);
        out.columns_mut(range.start, range.len()).copy_from(&sorted);
    }
    let fock_diagonal = fock_expectations(fock, &out, s)?;
    let blocks = (0..n)
        .map(|p| {
            if p < n_core {
                OrbitalBlock::FrozenCore
            } else if p < n_occ {
                OrbitalBlock::OccupiedValence
            } else {
                OrbitalBlock::Virtual
            }
        })
        .collect();
    Ok(LocalizedOrbitals {
        c: out,
        blocks,
        fock_diagonal,
        functional_occupied: 0.0,
        functional_virtual: 0.0,
        n_core,
        n_occ,
    })
}

/// Localizes occupied-valence and virtual blocks separately, keeping the
/// `n_core` lowest canonical orbitals untouched.
pub fn localize_orbitals(
    scf: &ScfResult,
    ints: &AoIntegrals,
    n_core: usize,
    opts: &BoysOptions,
) -> Result<LocalizedOrbitals> {
    let n = scf.c.ncols();
    let n_occ = scf.n_occ;
    if n_core > n_occ {
        return Err(Error::Invalid(format!("{n_core} core orbitals but only {n_occ} occupied")));
    }
    let occ = scf.c.columns(n_core, n_occ - n_core).clone_owned();
    let virt = scf.c.columns(n_occ, n - n_occ).clone_owned();
    let (lo, lv) = rayon::join(
        || boys_localize(&occ, &ints.dipole, opts),
        || boys_localize(&virt, &ints.dipole, opts),
    );
    let (lo, lv) = (lo?, lv?);
    let mut c = scf.c.clone();
    c.columns_mut(n_core, n_occ - n_core).copy_from(&lo.c);
    c.columns_mut(n_occ, n - n_occ).copy_from(&lv.c);
    let mut out = order_and_sign(&c, n_core, n_occ, &scf.fock, &ints.overlap)?;
    // Cores come straight from the canonical set (order_and_sign keeps them
    // sorted by energy and applies the same sign rule as the SCF).
    out.functional_occupied = lo.functional;
    out.functional_virtual = lv.functional;
    Ok(out)
}

/// |⟨ψ_j^left|ψ_k^right⟩| in a common AO basis with overlap `s`.
pub fn overlap_diagnostic(left: &DMatrix<f64>, right: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if left.nrows() != s.nrows() || right.nrows() != s.nrows() {
        return Err(Error::Dimension(format!(
            "orbital sets with {} and {} AO rows against a {}×{} overlap",
            left.nrows(),
            right.nrows(),
            s.nrows(),
            s.ncols()
        )));
    }
    Ok((left.transpose() * s * right).map(f64::abs))
}

/// Places monomer coefficients into the rows of a larger AO list.
/// `ao_map[i]` is the super-system AO index of monomer AO `i`.
pub fn embed_coefficients(c: &DMatrix<f64>, ao_map: &[usize], n_ao_super: usize) -> Result<DMatrix<f64>> {
    if ao_map.len() != c.nrows() || ao_map.iter().any(|&i| i >= n_ao_super) {
        return Err(Error::Dimension("AO map does not fit the super-system".into()));
    }
    let mut out = DMatrix::zeros(n_ao_super, c.ncols());
    for (i, &row) in ao_map.iter().enumerate() {
        out.row_mut(row).copy_from(&c.row(i));
    }
    Ok(out)
}

/// Maximum-weight perfect assignment (Hungarian algorithm). Returns
/// `assign[row] = column` for a square weight matrix.
pub fn max_weight_assignment(w: &DMatrix<f64>) -> Vec<usize> {
    let n = w.nrows();
    assert_eq!(n, w.ncols(), "assignment needs a square matrix");
    // Minimize cost = −w with the potential-based O(n³) method.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = -w[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Result of matching one orbital set onto a reference set.
#[derive(Debug, Clone, Serialize)]
pub struct Alignment {
    /// `permutation[i]` is the original column placed at index `i`.
    pub permutation: Vec<usize>,
    /// |overlap| of every matched pair.
    pub matched_overlaps: Vec<f64>,
}

/// Relabels `other` so each block matches `reference` by maximum total
/// overlap. Both sets must be expressed over the same AO labels; `s` is
/// the AO overlap used to compare them.
pub fn align_to_reference(
    reference: &LocalizedOrbitals,
    other: &LocalizedOrbitals,
    s: &DMatrix<f64>,
) -> Result<(LocalizedOrbitals, Alignment)> {
    if reference.n_mo() != other.n_mo() || reference.n_core != other.n_core || reference.n_occ != other.n_occ {
        return Err(Error::Dimension("orbital partitions differ".into()));
    }
    let o = overlap_diagnostic(&reference.c, &other.c, s)?;
    let mut perm: Vec<usize> = (0..reference.n_mo()).collect();
    for range in reference.block_ranges() {
        let sub = o.view((range.start, range.start), (range.len(), range.len())).clone_owned();
        if sub.nrows() == 0 {
            continue;
        }
        let assign = max_weight_assignment(&sub);
        for (k, &j) in assign.iter().enumerate() {
            perm[range.start + k] = range.start + j;
        }
    }
    let matched = (0..perm.len()).map(|i| o[(i, perm[i])]).collect();
    let mut out = other.clone();
    out.c = other.c.select_columns(perm.iter());
    out.fock_diagonal = DVector::from_iterator(perm.len(), perm.iter().map(|&j| other.fock_diagonal[j]));
    Ok((
        out,
        Alignment {
            permutation: perm,
            matched_overlaps: matched,
        },
    ))
}

/// Checks that a coefficient matrix is orthonormal and block-diagonal with
/// respect to a canonical occupied/virtual split.
pub fn check_block_structure(loc: &LocalizedOrbitals, canonical: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<()> {
    let err = orthonormality_error(&loc.c, s);
    if err > 1e-10 {
        return Err(Error::Numerical(format!("localized orbitals not orthonormal ({err:.2e})")));
    }
    let mixing = canonical.transpose() * s * &loc.c;
    let n_occ = loc.n_occ;
    let n = loc.n_mo();
    let ov = mixing.view((0, n_occ), (n_occ, n - n_occ)).amax();
    if ov > 1e-10 {
        return Err(Error::Numerical(format!("occupied–virtual mixing {ov:.2e}")));
    }
    Ok(())
}
