//! McMurchie–Davidson evaluation of one- and two-electron integrals over
//! contracted Cartesian Gaussians with s and p angular momentum.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::basis::{AoBasis, BasisFunction, BasisSet};
use super::boys::boys_array;
use super::Geometry;
use crate::error::{Error, Result};

/// Two-electron integrals (pq|rs) in chemists' notation, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Eri {
    n: usize,
    data: Vec<f64>,
}

impl Eri {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n * n * n {
            return Err(Error::Dimension(format!(
                "ERI buffer of length {} for n = {n}",
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.idx(p, q, r, s)]
    }

    #[inline]
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        let i = self.idx(p, q, r, s);
        self.data[i] = v;
    }

    /// Writes `v` to all eight permutation-equivalent positions.
    pub fn set_sym(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            self.set(a, b, c, d, v);
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Largest deviation from 8-fold permutational symmetry.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.get(p, q, r, s);
                        for w in [
                            self.get(q, p, r, s),
                            self.get(p, q, s, r),
                            self.get(r, s, p, q),
                        ] {
                            worst = worst.max((v - w).abs());
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Everything the electronic-structure stages need from the AO basis.
#[derive(Debug, Clone)]
pub struct AoIntegrals {
    pub n_ao: usize,
    pub overlap: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    pub hcore: DMatrix<f64>,
    pub eri: Eri,
    /// ⟨χ_p| x, y, z |χ_q⟩ about the coordinate origin, in bohr.
    pub dipole: [DMatrix<f64>; 3],
    pub e_nuc: f64,
    /// Owning atom of every AO.
    pub ao_atoms: Vec<usize>,
}

impl AoIntegrals {
    /// Smallest eigenvalue of the overlap matrix.
    pub fn min_overlap_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.overlap.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// An unnormalized primitive Cartesian Gaussian x^i y^j z^k exp(−α|r−A|²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub exponent: f64,
    pub center: [f64; 3],
    pub powers: [u32; 3],
}

const MAX_L: usize = 3;
type ETable = [[[f64; 2 * MAX_L + 1]; MAX_L + 1]; MAX_L + 1];

/// Hermite expansion coefficients E_t^{ij} for one Cartesian direction.
fn hermite_e(imax: usize, jmax: usize, a: f64, b: f64, xab: f64) -> ETable {
    let p = a + b;
    let mu = a * b / p;
    let xpa = -b / p * xab;
    let xpb = a / p * xab;
    let h = 0.5 / p;
    let mut e: ETable = [[[0.0; 2 * MAX_L + 1]; MAX_L + 1]; MAX_L + 1];
    e[0][0][0] = (-mu * xab * xab).exp();
    let at = |row: &[f64; 2 * MAX_L + 1], t: isize| -> f64 {
        if t < 0 || t as usize > 2 * MAX_L {
            0.0
        } else {
            row[t as usize]
        }
    };
    for i in 0..imax {
        let prev = e[i][0];
        for t in 0..=(i + 1) {
            let ti = t as isize;
            e[i + 1][0][t] = h * at(&prev, ti - 1) + xpa * at(&prev, ti) + (t + 1) as f64 * at(&prev, ti + 1);
        }
    }
    for i in 0..=imax {
        for j in 0..jmax {
            let prev = e[i][j];
            for t in 0..=(i + j + 1) {
                let ti = t as isize;
                e[i][j + 1][t] =
                    h * at(&prev, ti - 1) + xpb * at(&prev, ti) + (t + 1) as f64 * at(&prev, ti + 1);
            }
        }
    }
    e
}

/// Hermite Coulomb integrals R_{tuv}(α, PC) for t+u+v ≤ l_max.
struct HermiteR {
    dim: usize,
    data: Vec<f64>,
}

impl HermiteR {
    fn new(l_max: usize, alpha: f64, pc: [f64; 3]) -> Self {
        let dim = l_max + 1;
        let r2 = pc[0] * pc[0] + pc[1] * pc[1] + pc[2] * pc[2];
        let mut f = vec![0.0; l_max + 1];
        boys_array(alpha * r2, &mut f);
        let idx = |t: usize, u: usize, v: usize| (t * dim + u) * dim + v;
        // Work downward in the auxiliary index n, keeping one level at a time.
        let mut upper = vec![0.0; dim * dim * dim];
        let mut lower = vec![0.0; dim * dim * dim];
        let mut fac = (-2.0 * alpha).powi(l_max as i32);
        for n in (0..=l_max).rev() {
            let budget = l_max - n;
            lower.iter_mut().for_each(|x| *x = 0.0);
            lower[0] = fac * f[n];
            for t in 0..=budget {
                for u in 0..=(budget - t) {
                    for v in 0..=(budget - t - u) {
                        if t + u + v == 0 {
                            continue;
                        }
                        let val = if t > 0 {
                            let a = if t > 1 { (t - 1) as f64 * upper[idx(t - 2, u, v)] } else { 0.0 };
                            a + pc[0] * upper[idx(t - 1, u, v)]
                        } else if u > 0 {
                            let a = if u > 1 { (u - 1) as f64 * upper[idx(t, u - 2, v)] } else { 0.0 };
                            a + pc[1] * upper[idx(t, u - 1, v)]
                        } else {
                            let a = if v > 1 { (v - 1) as f64 * upper[idx(t, u, v - 2)] } else { 0.0 };
                            a + pc[2] * upper[idx(t, u, v - 1)]
                        };
                        lower[idx(t, u, v)] = val;
                    }
                }
            }
            std::mem::swap(&mut upper, &mut lower);
            fac /= -2.0 * alpha;
        }
        Self { dim, data: upper }
    }

    #[inline]
    fn get(&self, t: usize, u: usize, v: usize) -> f64 {
        self.data[(t * self.dim + u) * self.dim + v]
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn gaussian_center(a: f64, ca: [f64; 3], b: f64, cb: [f64; 3]) -> [f64; 3] {
    let p = a + b;
    [
        (a * ca[0] + b * cb[0]) / p,
        (a * ca[1] + b * cb[1]) / p,
        (a * ca[2] + b * cb[2]) / p,
    ]
}

/// Overlap of two primitives.
pub fn primitive_overlap(ga: &Primitive, gb: &Primitive) -> f64 {
    let (a, b) = (ga.exponent, gb.exponent);
    let ab = sub(ga.center, gb.center);
    let mut s = (PI / (a + b)).powf(1.5);
    for k in 0..3 {
        let (i, j) = (ga.powers[k] as usize, gb.powers[k] as usize);
        s *= hermite_e(i, j, a, b, ab[k])[i][j][0];
    }
    s
}

/// Kinetic energy −½⟨a|∇²|b⟩ of two primitives.
pub fn primitive_kinetic(ga: &Primitive, gb: &Primitive) -> f64 {
    let (a, b) = (ga.exponent, gb.exponent);
    let ab = sub(ga.center, gb.center);
    let mut s1 = [0.0; 3];
    let mut d2 = [0.0; 3];
    for k in 0..3 {
        let (i, j) = (ga.powers[k] as usize, gb.powers[k] as usize);
        let e = hermite_e(i, j + 2, a, b, ab[k]);
        let s = |jj: isize| if jj < 0 { 0.0 } else { e[i][jj as usize][0] };
        let jf = j as f64;
        s1[k] = s(j as isize);
        d2[k] = jf * (jf - 1.0) * s(j as isize - 2) - 2.0 * b * (2.0 * jf + 1.0) * s(j as isize)
            + 4.0 * b * b * s(j as isize + 2);
    }
    let pref = (PI / (a + b)).powf(1.5);
    -0.5 * pref * (d2[0] * s1[1] * s1[2] + s1[0] * d2[1] * s1[2] + s1[0] * s1[1] * d2[2])
}

/// ⟨a| 1/|r − C| |b⟩ for unit charge at `c` (positive; multiply by −Z).
pub fn primitive_potential(ga: &Primitive, gb: &Primitive, c: [f64; 3]) -> f64 {
    let (a, b) = (ga.exponent, gb.exponent);
    let p = a + b;
    let ab = sub(ga.center, gb.center);
    let pc = sub(gaussian_center(a, ga.center, b, gb.center), c);
    let l = [0, 1, 2].map(|k| (ga.powers[k] + gb.powers[k]) as usize);
    let ex = [0, 1, 2].map(|k| hermite_e(ga.powers[k] as usize, gb.powers[k] as usize, a, b, ab[k]));
    let r = HermiteR::new(l[0] + l[1] + l[2], p, pc);
    let (i, j) = (ga.powers, gb.powers);
    let mut v = 0.0;
    for t in 0..=l[0] {
        let et = ex[0][i[0] as usize][j[0] as usize][t];
        for u in 0..=l[1] {
            let eu = ex[1][i[1] as usize][j[1] as usize][u];
            for w in 0..=l[2] {
                let ev = ex[2][i[2] as usize][j[2] as usize][w];
                v += et * eu * ev * r.get(t, u, w);
            }
        }
    }
    2.0 * PI / p * v
}

/// ⟨a| x_k |b⟩ about the origin.
pub fn primitive_dipole(ga: &Primitive, gb: &Primitive) -> [f64; 3] {
    let (a, b) = (ga.exponent, gb.exponent);
    let ab = sub(ga.center, gb.center);
    let pcen = gaussian_center(a, ga.center, b, gb.center);
    let mut s1 = [0.0; 3];
    let mut m1 = [0.0; 3];
    for k in 0..3 {
        let (i, j) = (ga.powers[k] as usize, gb.powers[k] as usize);
        let e = hermite_e(i, j, a, b, ab[k]);
        s1[k] = e[i][j][0];
        m1[k] = e[i][j][1] + pcen[k] * e[i][j][0];
    }
    let pref = (PI / (a + b)).powf(1.5);
    [
        pref * m1[0] * s1[1] * s1[2],
        pref * s1[0] * m1[1] * s1[2],
        pref * s1[0] * s1[1] * m1[2],
    ]
}

/// Electron-repulsion integral (ab|cd) over four primitives.
pub fn primitive_coulomb(ga: &Primitive, gb: &Primitive, gc: &Primitive, gd: &Primitive) -> f64 {
    let bra = PairData::new(ga, gb, 1.0);
    let ket = PairData::new(gc, gd, 1.0);
    pair_coulomb(&bra, &ket)
}

/// A primitive product expanded in Hermite Gaussians.
struct PairData {
    p: f64,
    center: [f64; 3],
    /// Hermite coefficients per direction, already selected for the powers.
    e: [[f64; 2 * MAX_L + 1]; 3],
    l: [usize; 3],
    coef: f64,
}

impl PairData {
    fn new(ga: &Primitive, gb: &Primitive, coef: f64) -> Self {
        let (a, b) = (ga.exponent, gb.exponent);
        let ab = sub(ga.center, gb.center);
        let mut e = [[0.0; 2 * MAX_L + 1]; 3];
        let mut l = [0; 3];
        for k in 0..3 {
            let (i, j) = (ga.powers[k] as usize, gb.powers[k] as usize);
            e[k] = hermite_e(i, j, a, b, ab[k])[i][j];
            l[k] = i + j;
        }
        Self {
            p: a + b,
            center: gaussian_center(a, ga.center, b, gb.center),
            e,
            l,
            coef,
        }
    }
}

fn pair_coulomb(bra: &PairData, ket: &PairData) -> f64 {
    let (p, q) = (bra.p, ket.p);
    let alpha = p * q / (p + q);
    let pq = sub(bra.center, ket.center);
    let lsum: usize = bra.l.iter().sum::<usize>() + ket.l.iter().sum::<usize>();
    let r = HermiteR::new(lsum, alpha, pq);
    let mut total = 0.0;
    for t in 0..=bra.l[0] {
        for u in 0..=bra.l[1] {
            for v in 0..=bra.l[2] {
                let eb = bra.e[0][t] * bra.e[1][u] * bra.e[2][v];
                if eb == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for tau in 0..=ket.l[0] {
                    for nu in 0..=ket.l[1] {
                        for phi in 0..=ket.l[2] {
                            let ek = ket.e[0][tau] * ket.e[1][nu] * ket.e[2][phi];
                            let sign = if (tau + nu + phi) % 2 == 0 { 1.0 } else { -1.0 };
                            inner += sign * ek * r.get(t + tau, u + nu, v + phi);
                        }
                    }
                }
                total += eb * inner;
            }
        }
    }
    2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt()) * total
}

fn primitives(f: &BasisFunction) -> Vec<(Primitive, f64)> {
    f.exponents
        .iter()
        .zip(&f.coefficients)
        .map(|(&e, &c)| {
            (
                Primitive {
                    exponent: e,
                    center: f.center,
                    powers: f.powers,
                },
                c,
            )
        })
        .collect()
}

fn contracted<F: Fn(&Primitive, &Primitive) -> f64>(fa: &BasisFunction, fb: &BasisFunction, op: F) -> f64 {
    let pa = primitives(fa);
    let pb = primitives(fb);
    let mut s = 0.0;
    for (ga, ca) in &pa {
        for (gb, cb) in &pb {
            s += ca * cb * op(ga, gb);
        }
    }
    s
}

/// Overlap between two (possibly different) AO sets.
pub fn cross_overlap(left: &AoBasis, right: &AoBasis) -> DMatrix<f64> {
    DMatrix::from_fn(left.len(), right.len(), |i, j| {
        contracted(&left.functions[i], &right.functions[j], primitive_overlap)
    })
}

fn symmetric_one_body<F: Fn(&BasisFunction, &BasisFunction) -> f64>(ao: &AoBasis, f: F) -> DMatrix<f64> {
    let n = ao.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = f(&ao.functions[i], &ao.functions[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Computes every AO integral for `geometry` in `basis`.
pub fn compute_ao_integrals(geometry: &Geometry, basis: &BasisSet) -> Result<AoIntegrals> {
    let ao = AoBasis::build(geometry, basis)?;
    let n = ao.len();
    let nuclei: Vec<(f64, [f64; 3])> = geometry
        .atoms
        .iter()
        .map(|a| (a.z as f64, a.position_bohr()))
        .collect();

    let overlap = symmetric_one_body(&ao, |a, b| contracted(a, b, primitive_overlap));
    let kinetic = symmetric_one_body(&ao, |a, b| contracted(a, b, primitive_kinetic));
    let nuclear = symmetric_one_body(&ao, |a, b| {
        contracted(a, b, |ga, gb| {
            nuclei
                .iter()
                .map(|&(z, c)| -z * primitive_potential(ga, gb, c))
                .sum()
        })
    });
    let dipole = [0, 1, 2].map(|k| symmetric_one_body(&ao, |a, b| contracted(a, b, |ga, gb| primitive_dipole(ga, gb)[k])));
    let hcore = &kinetic + &nuclear;

    // Primitive pair data for every AO pair p ≥ q.
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (0..=p).map(move |q| (p, q))).collect();
    let pair_data: Vec<Vec<PairData>> = pairs
        .iter()
        .map(|&(p, q)| {
            let mut v = Vec::new();
            for (ga, ca) in primitives(&ao.functions[p]) {
                for (gb, cb) in primitives(&ao.functions[q]) {
                    v.push(PairData::new(&ga, &gb, ca * cb));
                }
            }
            v
        })
        .collect();

    // Each unique pair-of-pairs is evaluated exactly once; results land in
    // fixed slots so the outcome does not depend on scheduling.
    let rows: Vec<Vec<f64>> = (0..pairs.len())
        .into_par_iter()
        .map(|ij| {
            (0..=ij)
                .map(|kl| {
                    let mut s = 0.0;
                    for bra in &pair_data[ij] {
                        for ket in &pair_data[kl] {
                            s += bra.coef * ket.coef * pair_coulomb(bra, ket);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    let mut eri = Eri::zeros(n);
    for (ij, row) in rows.iter().enumerate() {
        let (p, q) = pairs[ij];
        for (kl, &v) in row.iter().enumerate() {
            let (r, s) = pairs[kl];
            eri.set_sym(p, q, r, s, v);
        }
    }

    let finite = overlap.iter().chain(hcore.iter()).chain(eri.as_slice()).all(|x| x.is_finite());
    if !finite {
        return Err(Error::Numerical("non-finite AO integral (pathological exponents?)".into()));
    }

    let ints = AoIntegrals {
        n_ao: n,
        overlap,
        kinetic,
        nuclear,
        hcore,
        eri,
        dipole,
        e_nuc: geometry.nuclear_repulsion(),
        ao_atoms: ao.functions.iter().map(|f| f.atom).collect(),
    };
    let smin = ints.min_overlap_eigenvalue();
    if smin < 1e-8 {
        log::warn!("near linear dependence in the AO basis: smallest overlap eigenvalue {smin:.3e}");
    }
    Ok(ints)
}
