//! On-disk cache of AO integrals keyed by a content hash of the inputs.
//!
//! Layout (all little-endian):
//!
//! | field        | type            |
//! |--------------|-----------------|
//! | magic        | `b"HBQPEAO\0"`  |
//! | version      | u32 (= 1)       |
//! | n_ao         | u32             |
//! | ao_atoms     | n_ao × u32      |
//! | e_nuc        | f64             |
//! | S, T, V      | 3 × n_ao² f64   |
//! | dipole x,y,z | 3 × n_ao² f64   |
//! | ERI          | n_ao⁴ f64       |
//!
//! Matrices are row-major.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use super::{compute_ao_integrals, AoIntegrals, BasisSet, Eri, Geometry};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"HBQPEAO\0";
const VERSION: u32 = 1;

/// Hex SHA-256 over the exact coordinates, charges and basis text.
pub fn cache_key(geometry: &Geometry, basis_text: &str) -> String {
    let mut h = Sha256::new();
    h.update(MAGIC);
    h.update(VERSION.to_le_bytes());
    for a in &geometry.atoms {
        h.update(a.z.to_le_bytes());
        for x in a.position {
            h.update(x.to_bits().to_le_bytes());
        }
    }
    h.update(geometry.charge.to_le_bytes());
    h.update(basis_text.as_bytes());
    hex::encode(h.finalize())
}

fn put_matrix(buf: &mut Vec<u8>, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            buf.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
}

pub fn write(path: &Path, ints: &AoIntegrals) -> Result<()> {
    let n = ints.n_ao;
    let mut buf = Vec::with_capacity(16 + 8 * (7 * n * n + n.pow(4)));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    for &a in &ints.ao_atoms {
        buf.extend_from_slice(&(a as u32).to_le_bytes());
    }
    buf.extend_from_slice(&ints.e_nuc.to_le_bytes());
    for m in [&ints.overlap, &ints.kinetic, &ints.nuclear] {
        put_matrix(&mut buf, m);
    }
    for m in &ints.dipole {
        put_matrix(&mut buf, m);
    }
    for v in ints.eri.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    // Write to a sibling temp file first so a crash never leaves a torn cache.
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)?.write_all(&buf)?;
    fs::rename(tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.data.len() {
            return Err(Error::Invalid("truncated AO integral cache".into()));
        }
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn matrix(&mut self, n: usize) -> Result<DMatrix<f64>> {
        let mut v = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            v.push(self.f64()?);
        }
        Ok(DMatrix::from_row_slice(n, n, &v))
    }
}

pub fn read(path: &Path) -> Result<AoIntegrals> {
    let mut data = Vec::new();
    fs::File::open(path)?.read_to_end(&mut data)?;
    let mut r = Reader { data: &data, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(Error::Invalid(format!("{} is not an AO integral cache", path.display())));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Invalid(format!("unsupported cache version {version}")));
    }
    let n = r.u32()? as usize;
    let ao_atoms = (0..n).map(|_| r.u32().map(|a| a as usize)).collect::<Result<Vec<_>>>()?;
    let e_nuc = r.f64()?;
    let overlap = r.matrix(n)?;
    let kinetic = r.matrix(n)?;
    let nuclear = r.matrix(n)?;
    let dipole = [r.matrix(n)?, r.matrix(n)?, r.matrix(n)?];
    let mut eri = Vec::with_capacity(n.pow(4));
    for _ in 0..n.pow(4) {
        eri.push(r.f64()?);
    }
    if r.pos != data.len() {
        return Err(Error::Invalid("trailing bytes in AO integral cache".into()));
    }
    let hcore = &kinetic + &nuclear;
    Ok(AoIntegrals {
        n_ao: n,
        overlap,
        kinetic,
        nuclear,
        hcore,
        eri: Eri::from_vec(n, eri)?,
        dipole,
        e_nuc,
        ao_atoms,
    })
}

pub fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.aoint"))
}

/// Returns cached integrals when present, otherwise computes and stores them.
pub fn load_or_compute(
    dir: Option<&Path>,
    geometry: &Geometry,
    basis: &BasisSet,
    basis_text: &str,
) -> Result<AoIntegrals> {
    let Some(dir) = dir else {
        return compute_ao_integrals(geometry, basis);
    };
    let path = cache_path(dir, &cache_key(geometry, basis_text));
    if path.exists() {
        match read(&path) {
            Ok(ints) => {
                log::debug!("AO integrals loaded from {}", path.display());
                return Ok(ints);
            }
            Err(e) => log::warn!("ignoring unreadable cache {}: {e}", path.display()),
        }
    }
    let ints = compute_ao_integrals(geometry, basis)?;
    fs::create_dir_all(dir)?;
    write(&path, &ints)?;
    Ok(ints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::{sto3g, water_dimer, STO3G_TEXT};

    #[test]
    fn roundtrip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let g = water_dimer().subset(&[3, 4, 5], "donor").unwrap();
        let a = load_or_compute(Some(dir.path()), &g, &sto3g(), STO3G_TEXT).unwrap();
        let b = load_or_compute(Some(dir.path()), &g, &sto3g(), STO3G_TEXT).unwrap();
        assert_eq!(a.overlap, b.overlap);
        assert_eq!(a.hcore, b.hcore);
        assert_eq!(a.eri, b.eri);
        assert_eq!(a.dipole, b.dipole);
        assert_eq!(a.e_nuc.to_bits(), b.e_nuc.to_bits());
        assert_eq!(a.ao_atoms, b.ao_atoms);
    }

    #[test]
    fn key_depends_on_coordinates() {
        let g = water_dimer();
        let k1 = cache_key(&g, STO3G_TEXT);
        let k2 = cache_key(&g.translated([1e-12, 0.0, 0.0]), STO3G_TEXT);
        assert_ne!(k1, k2);
        assert_eq!(k1.len(), 64);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.aoint");
        fs::write(&p, b"not a cache").unwrap();
        assert!(read(&p).is_err());
    }
}
