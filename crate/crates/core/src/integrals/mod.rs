//! Geometry and basis-set input plus the atomic-orbital integral engine.

mod basis;
pub mod boys;
pub mod cache;
mod engine;

pub use basis::{parse_basis, sto3g, AoBasis, BasisFunction, BasisSet, Shell, STO3G_TEXT};
pub use engine::{compute_ao_integrals, cross_overlap, primitive_coulomb, AoIntegrals, Eri};

use crate::error::{Error, Result};
use crate::units::ANGSTROM_TO_BOHR;
use serde::{Deserialize, Serialize};

/// Element symbols indexed by nuclear charge minus one.
const ELEMENTS: [&str; 18] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar",
];

pub fn atomic_number(symbol: &str) -> Option<u32> {
    ELEMENTS
        .iter()
        .position(|s| s.eq_ignore_ascii_case(symbol))
        .map(|i| i as u32 + 1)
}

pub fn element_symbol(z: u32) -> Option<&'static str> {
    ELEMENTS.get((z as usize).checked_sub(1)?).copied()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub symbol: String,
    pub z: u32,
    /// Position in ångström.
    pub position: [f64; 3],
}

impl Atom {
    pub fn new(symbol: &str, position: [f64; 3]) -> Result<Self> {
        let z = atomic_number(symbol).ok_or_else(|| Error::UnknownElement(symbol.to_string()))?;
        if position.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid(format!("non-finite coordinate for {symbol}")));
        }
        Ok(Self {
            symbol: element_symbol(z).unwrap().to_string(),
            z,
            position,
        })
    }

    pub fn position_bohr(&self) -> [f64; 3] {
        self.position.map(|x| x * ANGSTROM_TO_BOHR)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub atoms: Vec<Atom>,
    pub charge: i32,
    pub label: String,
}

impl Geometry {
    pub fn new(atoms: Vec<Atom>, charge: i32, label: impl Into<String>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::NoAtoms);
        }
        Ok(Self {
            atoms,
            charge,
            label: label.into(),
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn n_electrons(&self) -> i64 {
        self.atoms.iter().map(|a| a.z as i64).sum::<i64>() - self.charge as i64
    }

    /// Number of 1s core orbitals (one per atom beyond helium).
    pub fn n_core_orbitals(&self) -> usize {
        self.atoms.iter().filter(|a| a.z > 2).count()
    }

    /// Nuclear repulsion Σ_{a<b} Z_a Z_b / r_ab in hartree.
    pub fn nuclear_repulsion(&self) -> f64 {
        let mut e = 0.0;
        for (i, a) in self.atoms.iter().enumerate() {
            let pa = a.position_bohr();
            for b in &self.atoms[..i] {
                let pb = b.position_bohr();
                let r = dist(&pa, &pb);
                e += (a.z * b.z) as f64 / r;
            }
        }
        e
    }

    /// Interatomic distance in ångström.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(&self.atoms[i].position, &self.atoms[j].position)
    }

    /// Sub-geometry made of the given atoms, in the given order.
    pub fn subset(&self, indices: &[usize], label: impl Into<String>) -> Result<Self> {
        let atoms = indices
            .iter()
            .map(|&i| {
                self.atoms
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::Invalid(format!("atom index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Geometry::new(atoms, 0, label)
    }

    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let mut g = self.clone();
        for a in &mut g.atoms {
            for k in 0..3 {
                a.position[k] += shift[k];
            }
        }
        g
    }

    pub fn to_xyz(&self) -> String {
        let mut s = format!("{}\n{}\n", self.atoms.len(), self.label);
        for a in &self.atoms {
            s.push_str(&format!(
                "{:<3}{:>16.10}{:>16.10}{:>16.10}\n",
                a.symbol, a.position[0], a.position[1], a.position[2]
            ));
        }
        s
    }
}

pub(crate) fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Parses XYZ text (ångström).
///
/// Accepts the standard form (atom count, comment line, atom lines) as well as
/// bare atom lines. Blank lines and `#` comments are ignored in the bare form.
pub fn parse_geometry(text: &str) -> Result<Geometry> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    if lines.is_empty() {
        return Err(Error::NoAtoms);
    }

    let (body, label, expected) = match lines[0].1.parse::<usize>() {
        Ok(n) => {
            // The comment line may be blank, so take it from the raw text.
            let raw: Vec<&str> = text.lines().collect();
            let header_idx = lines[0].0 - 1;
            let label = raw.get(header_idx + 1).map(|s| s.trim()).unwrap_or("");
            let body: Vec<(usize, &str)> = lines
                .iter()
                .copied()
                .filter(|(no, _)| *no > header_idx + 2)
                .collect();
            (body, label.to_string(), Some(n))
        }
        Err(_) => (lines, String::new(), None),
    };

    let mut atoms = Vec::new();
    for (no, line) in body {
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(Error::Parse {
                line: no,
                msg: format!("expected symbol and three coordinates, got '{line}'"),
            });
        }
        let mut pos = [0.0; 3];
        for k in 0..3 {
            pos[k] = fields[k + 1].parse::<f64>().map_err(|_| Error::Parse {
                line: no,
                msg: format!("bad coordinate '{}'", fields[k + 1]),
            })?;
        }
        atoms.push(Atom::new(fields[0], pos)?);
    }
    if let Some(n) = expected {
        if n != atoms.len() {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {n} atoms but {} were read", atoms.len()),
            });
        }
    }
    Geometry::new(atoms, 0, label)
}

/// The hydrogen-bonded water dimer used throughout the tests and default config.
pub const WATER_DIMER_XYZ: &str = include_str!("../../data/water_dimer.xyz");

pub fn water_dimer() -> Geometry {
    parse_geometry(WATER_DIMER_XYZ).expect("bundled geometry parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimer_block() {
        let g = water_dimer();
        assert_eq!(g.n_atoms(), 6);
        assert_eq!(g.atoms.iter().filter(|a| a.z == 8).count(), 2);
        assert_eq!(g.atoms.iter().filter(|a| a.z == 1).count(), 4);
        assert_eq!(g.atoms[0].position, [-2.54176, 0.57839, -0.53932]);
        assert_eq!(g.n_electrons(), 20);
        assert_eq!(g.n_core_orbitals(), 2);
    }

    #[test]
    fn single_line() {
        let g = parse_geometry("H 0 0 0").unwrap();
        assert_eq!(g.n_atoms(), 1);
        assert_eq!(g.atoms[0].z, 1);
    }

    #[test]
    fn empty_is_error() {
        assert!(matches!(parse_geometry(""), Err(Error::NoAtoms)));
        assert!(matches!(parse_geometry("\n  \n"), Err(Error::NoAtoms)));
    }

    #[test]
    fn bad_symbol_and_line() {
        assert!(matches!(
            parse_geometry("Xx 0 0 0"),
            Err(Error::UnknownElement(_))
        ));
        assert!(matches!(
            parse_geometry("H 0 0"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_geometry("H 0 zero 0"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn header_count_checked() {
        assert!(parse_geometry("2\n\nH 0 0 0\n").is_err());
        let g = parse_geometry("1\n\nH 0 0 0.74\n").unwrap();
        assert_eq!(g.label, "");
        assert_eq!(g.atoms[0].position[2], 0.74);
    }

    #[test]
    fn hydrogen_bond_distances() {
        // The H-bonded donor hydrogen is atom 5 and the acceptor oxygen atom 0.
        let g = water_dimer();
        let h_o = g.distance(5, 0);
        let o_o = g.distance(0, 3);
        assert!((h_o - 1.929).abs() < 1e-3, "{h_o}");
        assert!((o_o - 2.889).abs() < 1e-3, "{o_o}");
    }

    #[test]
    fn nuclear_repulsion_pairwise() {
        // Independent pairwise sum straight from the ångström table.
        let raw = [
            (8.0, [-2.54176, 0.57839, -0.53932]),
            (1.0, [-1.81161, 1.15639, -0.76640]),
            (1.0, [-2.99305, 1.01380, 0.18562]),
            (8.0, [-1.47125, -1.92083, 0.43805]),
            (1.0, [-1.80326, -2.65320, -0.08029]),
            (1.0, [-1.87142, -1.13254, 0.04768]),
        ];
        let mut e = 0.0;
        for i in 0..6 {
            for j in 0..i {
                let d: f64 = (0..3)
                    .map(|k| (raw[i].1[k] - raw[j].1[k]) * (raw[i].1[k] - raw[j].1[k]))
                    .sum::<f64>()
                    .sqrt();
                e += raw[i].0 * raw[j].0 / (d / 0.52917721092);
            }
        }
        let g = water_dimer();
        assert!((g.nuclear_repulsion() - e).abs() < 1e-10);
        assert!((e - 36.775008).abs() < 1e-5, "{e}");
    }
}
