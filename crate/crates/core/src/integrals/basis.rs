use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{atomic_number, element_symbol, Geometry};
use crate::error::{Error, Result};

/// STO-3G for H, He, C, N, O in Basis Set Exchange "Gaussian" format.
pub const STO3G_TEXT: &str = include_str!("../../data/sto-3g.gbs");

/// A contracted shell as read from the file (coefficients unnormalized).
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub l: usize,
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
}

/// Per-element shell lists, keyed by nuclear charge.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BasisSet {
    pub name: String,
    pub shells: BTreeMap<u32, Vec<Shell>>,
}

impl BasisSet {
    /// Parses every element block in a Gaussian-format basis file.
    pub fn parse(text: &str) -> Result<Self> {
        let mut set = BasisSet {
            name: String::new(),
            shells: BTreeMap::new(),
        };
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .collect();
        let mut i = 0;
        let mut current: Option<u32> = None;
        while i < lines.len() {
            let (no, line) = lines[i];
            i += 1;
            if line.is_empty() {
                continue;
            }
            if line.starts_with('!') {
                if set.name.is_empty() {
                    if let Some(w) = line.trim_start_matches('!').split_whitespace().next() {
                        set.name = w.to_string();
                    }
                }
                continue;
            }
            if line.starts_with("****") {
                current = None;
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match current {
                None => {
                    // Element header: "O     0"
                    let z = atomic_number(fields[0]).ok_or_else(|| Error::Parse {
                        line: no,
                        msg: format!("unknown element '{}' in basis file", fields[0]),
                    })?;
                    set.shells.entry(z).or_default();
                    current = Some(z);
                }
                Some(z) => {
                    if fields.len() < 2 {
                        return Err(Error::Parse {
                            line: no,
                            msg: format!("bad shell header '{line}'"),
                        });
                    }
                    let kind = fields[0].to_ascii_uppercase();
                    let nprim: usize = fields[1].parse().map_err(|_| Error::Parse {
                        line: no,
                        msg: format!("bad primitive count '{}'", fields[1]),
                    })?;
                    if nprim == 0 {
                        return Err(Error::Parse {
                            line: no,
                            msg: "shell without primitives".into(),
                        });
                    }
                    let ls: Vec<usize> = match kind.as_str() {
                        "SP" => vec![0, 1],
                        k => vec![shell_l(k).ok_or_else(|| Error::Parse {
                            line: no,
                            msg: format!("unknown shell type '{k}'"),
                        })?],
                    };
                    let mut exps = Vec::with_capacity(nprim);
                    let mut coefs = vec![Vec::with_capacity(nprim); ls.len()];
                    for _ in 0..nprim {
                        let (pno, pline) = *lines.get(i).ok_or(Error::Parse {
                            line: no,
                            msg: "truncated shell".into(),
                        })?;
                        i += 1;
                        let nums: Vec<f64> = pline
                            .split_whitespace()
                            .map(parse_fortran_float)
                            .collect::<Option<_>>()
                            .ok_or_else(|| Error::Parse {
                                line: pno,
                                msg: format!("bad primitive line '{pline}'"),
                            })?;
                        if nums.len() != 1 + ls.len() {
                            return Err(Error::Parse {
                                line: pno,
                                msg: format!("expected {} numbers", 1 + ls.len()),
                            });
                        }
                        if nums[0] <= 0.0 {
                            return Err(Error::Parse {
                                line: pno,
                                msg: "non-positive exponent".into(),
                            });
                        }
                        exps.push(nums[0]);
                        for (k, c) in coefs.iter_mut().enumerate() {
                            c.push(nums[k + 1]);
                        }
                    }
                    let entry = set.shells.get_mut(&z).unwrap();
                    for (l, c) in ls.into_iter().zip(coefs) {
                        entry.push(Shell {
                            l,
                            exponents: exps.clone(),
                            coefficients: c,
                        });
                    }
                }
            }
        }
        Ok(set)
    }

    /// Checks that every element of `geometry` is present with s/p shells only.
    pub fn validate_for(&self, geometry: &Geometry) -> Result<()> {
        for atom in &geometry.atoms {
            let shells = self
                .shells
                .get(&atom.z)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::MissingElement(atom.symbol.clone()))?;
            if let Some(s) = shells.iter().find(|s| s.l > 1) {
                return Err(Error::UnsupportedShell {
                    element: atom.symbol.clone(),
                    l: s.l,
                });
            }
        }
        Ok(())
    }

    /// Number of Cartesian basis functions for one element.
    pub fn n_functions(&self, z: u32) -> usize {
        self.shells
            .get(&z)
            .map(|s| s.iter().map(|sh| (sh.l + 1) * (sh.l + 2) / 2).sum())
            .unwrap_or(0)
    }
}

fn shell_l(kind: &str) -> Option<usize> {
    ["S", "P", "D", "F", "G", "H"].iter().position(|&k| k == kind)
}

fn parse_fortran_float(s: &str) -> Option<f64> {
    s.replace(['D', 'd'], "E").parse().ok()
}

/// Parses a basis file and checks it covers `geometry`.
pub fn parse_basis(text: &str, geometry: &Geometry) -> Result<BasisSet> {
    let set = BasisSet::parse(text)?;
    set.validate_for(geometry)?;
    Ok(set)
}

pub fn sto3g() -> BasisSet {
    BasisSet::parse(STO3G_TEXT).expect("bundled basis parses")
}

/// One contracted Cartesian Gaussian centred on an atom.
#[derive(Debug, Clone)]
pub struct BasisFunction {
    pub atom: usize,
    /// Centre in bohr.
    pub center: [f64; 3],
    pub powers: [u32; 3],
    pub exponents: Vec<f64>,
    /// Contraction coefficients with primitive normalization folded in,
    /// rescaled so that the contracted function has unit norm.
    pub coefficients: Vec<f64>,
}

impl BasisFunction {
    pub fn l(&self) -> u32 {
        self.powers.iter().sum()
    }
}

/// The AO list for one geometry: atoms in input order, shells in file order,
/// p components in (x, y, z) order.
#[derive(Debug, Clone)]
pub struct AoBasis {
    pub functions: Vec<BasisFunction>,
}

impl AoBasis {
    pub fn build(geometry: &Geometry, basis: &BasisSet) -> Result<Self> {
        basis.validate_for(geometry)?;
        let mut functions = Vec::new();
        for (ia, atom) in geometry.atoms.iter().enumerate() {
            let center = atom.position_bohr();
            for shell in &basis.shells[&atom.z] {
                let comps: &[[u32; 3]] = match shell.l {
                    0 => &[[0, 0, 0]],
                    1 => &[[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                    l => {
                        return Err(Error::UnsupportedShell {
                            element: element_symbol(atom.z).unwrap_or("?").into(),
                            l,
                        })
                    }
                };
                let coefs = normalized_contraction(shell);
                for &powers in comps {
                    functions.push(BasisFunction {
                        atom: ia,
                        center,
                        powers,
                        exponents: shell.exponents.clone(),
                        coefficients: coefs.clone(),
                    });
                }
            }
        }
        Ok(Self { functions })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// AO index ranges belonging to each atom.
    pub fn atom_ranges(&self, n_atoms: usize) -> Vec<std::ops::Range<usize>> {
        (0..n_atoms)
            .map(|a| {
                let idx: Vec<usize> = self
                    .functions
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| f.atom == a)
                    .map(|(i, _)| i)
                    .collect();
                match (idx.first(), idx.last()) {
                    (Some(&s), Some(&e)) => s..e + 1,
                    _ => 0..0,
                }
            })
            .collect()
    }
}

fn double_factorial(n: i64) -> f64 {
    if n <= 0 {
        1.0
    } else {
        (1..=n).rev().step_by(2).map(|k| k as f64).product()
    }
}

/// Normalization of x^l e^{-a r²} (single Cartesian power l along one axis).
fn primitive_norm(alpha: f64, l: usize) -> f64 {
    (2.0 * alpha / PI).powf(0.75) * (4.0 * alpha).powf(l as f64 / 2.0)
        / double_factorial(2 * l as i64 - 1).sqrt()
}

fn normalized_contraction(shell: &Shell) -> Vec<f64> {
    let l = shell.l;
    let mut c: Vec<f64> = shell
        .exponents
        .iter()
        .zip(&shell.coefficients)
        .map(|(&a, &d)| d * primitive_norm(a, l))
        .collect();
    // Self-overlap of the contraction, using normalized primitive overlaps.
    let mut s = 0.0;
    for (i, &ai) in shell.exponents.iter().enumerate() {
        for (j, &aj) in shell.exponents.iter().enumerate() {
            let ov = (2.0 * (ai * aj).sqrt() / (ai + aj)).powf(l as f64 + 1.5);
            s += c[i] * c[j] / (primitive_norm(ai, l) * primitive_norm(aj, l)) * ov;
        }
    }
    let scale = 1.0 / s.sqrt();
    for x in &mut c {
        *x *= scale;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::{parse_geometry, water_dimer};

    #[test]
    fn sto3g_function_counts() {
        let b = sto3g();
        assert_eq!(b.n_functions(1), 1);
        assert_eq!(b.n_functions(8), 5);
        let ao = AoBasis::build(&water_dimer(), &b).unwrap();
        assert_eq!(ao.len(), 14);
    }

    #[test]
    fn hydrogen_entry() {
        let b = sto3g();
        let h = &b.shells[&1];
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].l, 0);
        assert_eq!(h[0].exponents.len(), 3);
        assert_eq!(h[0].exponents[0], 3.42525091);
    }

    #[test]
    fn oxygen_ordering() {
        let g = parse_geometry("O 0 0 0").unwrap();
        let ao = AoBasis::build(&g, &sto3g()).unwrap();
        let powers: Vec<[u32; 3]> = ao.functions.iter().map(|f| f.powers).collect();
        assert_eq!(
            powers,
            vec![[0, 0, 0], [0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
        );
    }

    #[test]
    fn missing_element() {
        let text = STO3G_TEXT.split("O     0").next().unwrap();
        let err = parse_basis(text, &water_dimer()).unwrap_err();
        assert_eq!(err.to_string(), "missing element O in basis set");
    }

    #[test]
    fn d_shells_rejected() {
        let text = "****\nH 0\nS 1 1.00\n 1.0 1.0\nD 1 1.00\n 0.8 1.0\n****\n";
        let g = parse_geometry("H 0 0 0").unwrap();
        let err = parse_basis(text, &g).unwrap_err();
        assert!(matches!(err, Error::UnsupportedShell { l: 2, .. }));
        assert!(err.to_string().contains("only s and p"));
    }

    #[test]
    fn fortran_exponents() {
        assert_eq!(parse_fortran_float("0.15D+01"), Some(1.5));
        assert_eq!(parse_fortran_float("-0.5d-01"), Some(-0.05));
    }
}
