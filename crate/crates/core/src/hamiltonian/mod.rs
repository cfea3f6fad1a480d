//! Active-space fermionic Hamiltonians and their qubit encodings.

mod jw;
pub mod pauli;

pub use jw::{jordan_wigner, jordan_wigner_with, PauliTerm, QubitHamiltonian, SpinOrdering, TermOrder};
pub use pauli::PauliString;

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::integrals::Eri;
use crate::mointegrals::{ActiveSpace, MoIntegrals};

/// H = E_scalar + Σ h_pq E_pq + ½ Σ (pq|rs) (E_pq E_rs − δ_qr E_ps) over
/// active spatial orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionHamiltonian {
    pub n_orb: usize,
    /// One-electron integrals with the frozen orbitals folded in.
    pub h: DMatrix<f64>,
    /// Active (pq|rs), chemists' notation.
    pub eri: Eri,
    /// Nuclear repulsion plus frozen-orbital energy.
    pub e_scalar: f64,
}

impl FermionHamiltonian {
    /// Expectation value of the closed-shell determinant with the lowest
    /// `n_docc` active orbitals doubly occupied.
    pub fn closed_shell_energy(&self, n_docc: usize) -> f64 {
        let mut e = self.e_scalar;
        for i in 0..n_docc {
            e += 2.0 * self.h[(i, i)];
            for j in 0..n_docc {
                e += 2.0 * self.eri.get(i, i, j, j) - self.eri.get(i, j, j, i);
            }
        }
        e
    }

    /// Number of non-zero coefficients in the spin-orbital second-quantized
    /// operator Σ h a†a + ½ Σ (ps|qr) a†a†aa, counting every spin-orbital
    /// index tuple of both tensors; the scalar is not counted.
    pub fn coefficient_count(&self) -> usize {
        let one = self.h.iter().filter(|&&v| v != 0.0).count();
        let two = self.eri.as_slice().iter().filter(|&&v| v != 0.0).count();
        2 * one + 4 * two
    }
}

/// Folds frozen orbitals into an effective Hamiltonian over the active set.
pub fn build_active_hamiltonian(mo: &MoIntegrals, space: &ActiveSpace) -> Result<FermionHamiltonian> {
    let n_mo = mo.n_mo();
    if let Some(&p) = space.active.iter().chain(&space.frozen).find(|&&p| p >= n_mo) {
        return Err(Error::Invalid(format!("orbital {} out of range (n_mo = {n_mo})", p + 1)));
    }
    if space.active.iter().any(|p| space.frozen.contains(p)) {
        return Err(Error::Invalid("an orbital is both active and frozen".into()));
    }
    let act = &space.active;
    let fz = &space.frozen;
    let n = act.len();
    let h = DMatrix::from_fn(n, n, |a, b| {
        let (p, q) = (act[a], act[b]);
        mo.h[(p, q)] + fz.iter().map(|&i| 2.0 * mo.eri.get(p, q, i, i) - mo.eri.get(p, i, i, q)).sum::<f64>()
    });
    let mut eri = Eri::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    eri.set(a, b, c, d, mo.eri.get(act[a], act[b], act[c], act[d]));
                }
            }
        }
    }
    let mut e_scalar = mo.e_nuc;
    for &i in fz {
        e_scalar += 2.0 * mo.h[(i, i)];
        for &j in fz {
            e_scalar += 2.0 * mo.eri.get(i, i, j, j) - mo.eri.get(i, j, j, i);
        }
    }
    Ok(FermionHamiltonian { n_orb: n, h, eri, e_scalar })
}

/// Zeroes one-body entries with |h_pq| < δ and two-body entries whose
/// spin-orbital coefficient |½(pq|rs)| < δ. Permutation-equivalent entries
/// share one value, so symmetry is preserved.
pub fn truncate_fermionic(h: &FermionHamiltonian, delta: f64) -> FermionHamiltonian {
    let mut out = h.clone();
    out.h.iter_mut().filter(|v| v.abs() < delta).for_each(|v| *v = 0.0);
    out.eri.as_mut_slice().iter_mut().filter(|v| (0.5 * **v).abs() < delta).for_each(|v| *v = 0.0);
    out
}

/// FCIDUMP text: namelist header, unique (ij|kl), h_ij, then the scalar.
pub fn to_fcidump(h: &FermionHamiltonian, n_electrons: usize, ms2: i32) -> String {
    let n = h.n_orb;
    let mut s = String::new();
    let _ = writeln!(s, " &FCI NORB={n},NELEC={n_electrons},MS2={ms2},");
    let _ = writeln!(s, "  ORBSYM={}", vec!["1"; n].join(","));
    let _ = writeln!(s, "  ISYM=1,");
    let _ = writeln!(s, " &END");
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                        continue;
                    }
                    let v = h.eri.get(i, j, k, l);
                    if v != 0.0 {
                        let _ = writeln!(s, "{v:24.16e} {:4} {:4} {:4} {:4}", i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = h.h[(i, j)];
            if v != 0.0 {
                let _ = writeln!(s, "{v:24.16e} {:4} {:4} {:4} {:4}", i + 1, j + 1, 0, 0);
            }
        }
    }
    let _ = writeln!(s, "{:24.16e} {:4} {:4} {:4} {:4}", h.e_scalar, 0, 0, 0, 0);
    s
}

/// Parses FCIDUMP text (real orbitals, 8-fold symmetry). Returns the
/// Hamiltonian and the electron count from the header.
pub fn from_fcidump(text: &str) -> Result<(FermionHamiltonian, usize)> {
    let upper = text.to_ascii_uppercase();
    let end = upper.find("&END").or_else(|| upper.find('/')).ok_or(Error::Parse {
        line: 1,
        msg: "FCIDUMP header not terminated".into(),
    })?;
    let header = &upper[..end];
    let field = |key: &str| -> Option<usize> {
        let pos = header.find(&format!("{key}="))?;
        header[pos + key.len() + 1..]
            .chars()
            .take_while(|c| c.is_ascii_digit())
            .collect::<String>()
            .parse()
            .ok()
    };
    let n = field("NORB").ok_or(Error::Parse { line: 1, msg: "NORB missing".into() })?;
    let nelec = field("NELEC").ok_or(Error::Parse { line: 1, msg: "NELEC missing".into() })?;
    let body_start = end + upper[end..].find('\n').unwrap_or(upper.len() - end);
    let mut h = FermionHamiltonian {
        n_orb: n,
        h: DMatrix::zeros(n, n),
        eri: Eri::zeros(n),
        e_scalar: 0.0,
    };
    let first_line = text[..body_start].lines().count();
    for (k, line) in text[body_start..].lines().enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        let bad = || Error::Parse {
            line: first_line + k + 1,
            msg: format!("bad integral line '{line}'"),
        };
        if f.len() != 5 {
            return Err(bad());
        }
        let v: f64 = f[0].replace(['D', 'd'], "E").parse().map_err(|_| bad())?;
        let idx: Vec<usize> = f[1..].iter().map(|x| x.parse().map_err(|_| bad())).collect::<Result<_>>()?;
        if idx.iter().any(|&i| i > n) {
            return Err(bad());
        }
        match (idx[0], idx[1], idx[2], idx[3]) {
            (0, 0, 0, 0) => h.e_scalar = v,
            (i, j, 0, 0) => {
                h.h[(i - 1, j - 1)] = v;
                h.h[(j - 1, i - 1)] = v;
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => h.eri.set_sym(i - 1, j - 1, k - 1, l - 1, v),
            _ => return Err(bad()),
        }
    }
    Ok((h, nelec))
}
