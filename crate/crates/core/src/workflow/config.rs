//! TOML run configuration. Atom and orbital indices are 1-based here.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ci::DavidsonOptions;
use crate::error::{Error, Result};
use crate::hamiltonian::SpinOrdering;
use crate::integrals::{parse_geometry, sto3g, water_dimer, BasisSet, Geometry, STO3G_TEXT};
use crate::localize::BoysOptions;
use crate::qpe::{QpeConfig, Readout};
use crate::scf::ScfOptions;
use crate::workflow::scan::GeometryScanSpec;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub geometry: GeometrySection,
    pub basis: BasisSection,
    pub scan: ScanSection,
    pub monomers: MonomerSection,
    pub scf: ScfSection,
    pub localize: LocalizeSection,
    pub selection: SelectionSection,
    pub hamiltonian: HamiltonianSection,
    pub qpe: QpeSection,
    pub fci: FciSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    /// XYZ file in ångström; the bundled water dimer when absent.
    pub xyz: Option<PathBuf>,
    pub charge: i32,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisSection {
    /// Gaussian-format basis file; bundled STO-3G when absent.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub donor_h: usize,
    pub acceptor_o: usize,
    pub moving: Vec<usize>,
    /// Å; the first entry equal to `reference` defines orbital labels.
    pub displacements: Vec<f64>,
    pub reference: f64,
    /// Displacement treated as the non-interacting limit.
    pub separated: f64,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            donor_h: 6,
            acceptor_o: 1,
            moving: vec![1, 2, 3],
            displacements: vec![100.0, 1.0, 0.75, 0.5, 0.25, 0.0, -0.25],
            reference: 0.0,
            separated: 100.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonomerSection {
    /// Atoms of monomer 1 and monomer 2.
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    /// Minimum |overlap| for assigning a dimer orbital to a monomer.
    pub min_overlap: f64,
}

impl Default for MonomerSection {
    fn default() -> Self {
        Self {
            first: vec![1, 2, 3],
            second: vec![4, 5, 6],
            min_overlap: 0.9,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScfSection {
    pub max_iterations: usize,
    pub energy_tolerance: f64,
    pub density_tolerance: f64,
    pub diis: bool,
    pub diis_size: usize,
}

impl Default for ScfSection {
    fn default() -> Self {
        let d = ScfOptions::default();
        Self {
            max_iterations: d.max_iterations,
            energy_tolerance: d.energy_tolerance,
            density_tolerance: d.density_tolerance,
            diis: d.diis,
            diis_size: d.diis_size,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalizeSection {
    pub max_sweeps: usize,
    pub tolerance: f64,
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for LocalizeSection {
    fn default() -> Self {
        let d = BoysOptions::default();
        Self {
            max_sweeps: d.max_sweeps,
            tolerance: d.tolerance,
            random_starts: d.random_starts,
            seed: d.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionSection {
    pub theta_var: f64,
    pub theta_exc: f64,
    /// Explicit 1-based active orbitals; bypasses the MP2 selection.
    pub active: Option<Vec<usize>>,
}

impl Default for SelectionSection {
    fn default() -> Self {
        Self {
            theta_var: 0.5,
            theta_exc: 0.6,
            active: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HamiltonianSection {
    /// Truncation thresholds for the term-count study (hartree).
    pub deltas: Vec<f64>,
    pub spin_ordering: SpinOrdering,
}

impl Default for HamiltonianSection {
    fn default() -> Self {
        Self {
            deltas: vec![0.01, 0.005, 0.001, 0.0005],
            spin_ordering: SpinOrdering::Interleaved,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QpeSection {
    pub t: f64,
    pub ancilla: usize,
    pub m: Vec<usize>,
    pub readout: Readout,
}

impl Default for QpeSection {
    fn default() -> Self {
        Self {
            t: 128.0,
            ancilla: 6,
            m: vec![128, 256, 512],
            readout: Readout::WgtAve,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FciSection {
    pub enabled: bool,
    pub frozen_core: bool,
    pub all_electron: bool,
    /// Dimer CASCI-minus-one-orbital curve against the frozen-core full CI.
    pub exclusion_scan: bool,
    pub max_iterations: usize,
    pub residual_tolerance: f64,
}

impl Default for FciSection {
    fn default() -> Self {
        Self {
            enabled: false,
            frozen_core: true,
            all_electron: true,
            exclusion_scan: false,
            max_iterations: 300,
            residual_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// AO integral cache; disabled when absent.
    pub cache_dir: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("hbqpe-out"),
            cache_dir: None,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a configuration file; relative paths inside it resolve
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.geometry.xyz.as_mut() {
            fix(p);
        }
        if let Some(p) = cfg.basis.file.as_mut() {
            fix(p);
        }
        if let Some(p) = cfg.output.cache_dir.as_mut() {
            fix(p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.scan.displacements.is_empty() {
            return bad("scan.displacements must not be empty".into());
        }
        if !self.scan.displacements.contains(&self.scan.reference) {
            return bad(format!("scan.reference = {} is not among scan.displacements", self.scan.reference));
        }
        if self.scan.donor_h == 0 || self.scan.acceptor_o == 0 || self.scan.moving.contains(&0) {
            return bad("atom indices are 1-based".into());
        }
        if self.monomers.first.is_empty() || self.monomers.second.is_empty() || self.monomers.first.iter().any(|a| self.monomers.second.contains(a)) {
            return bad("monomers.first and monomers.second must be non-empty and disjoint".into());
        }
        if self.monomers.first.contains(&0) || self.monomers.second.contains(&0) {
            return bad("atom indices are 1-based".into());
        }
        if self.selection.theta_var < 0.0 || self.selection.theta_exc < 0.0 {
            return bad("selection thresholds must be non-negative".into());
        }
        if let Some(a) = &self.selection.active {
            if a.is_empty() || a.contains(&0) {
                return bad("selection.active must list 1-based orbitals".into());
            }
        }
        if self.hamiltonian.deltas.iter().any(|d| *d < 0.0) {
            return bad("hamiltonian.deltas must be non-negative".into());
        }
        self.qpe_config(0.0).validate()
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let mut g = match &self.geometry.xyz {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                parse_geometry(&text)?
            }
            None => water_dimer(),
        };
        g.charge = self.geometry.charge;
        Ok(g)
    }

    /// Basis set and the text it was parsed from (the text keys the cache).
    pub fn basis(&self) -> Result<(BasisSet, String)> {
        match &self.basis.file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                Ok((BasisSet::parse(&text)?, text))
            }
            None => Ok((sto3g(), STO3G_TEXT.to_string())),
        }
    }

    pub fn scan_spec(&self, base: Geometry) -> Result<GeometryScanSpec> {
        let n = base.n_atoms();
        let idx = |a: usize| -> Result<usize> {
            if a == 0 || a > n {
                Err(Error::Config(format!("atom index {a} out of range 1..={n}")))
            } else {
                Ok(a - 1)
            }
        };
        Ok(GeometryScanSpec {
            base,
            donor_h: idx(self.scan.donor_h)?,
            acceptor_o: idx(self.scan.acceptor_o)?,
            moving: self.scan.moving.iter().map(|&a| idx(a)).collect::<Result<_>>()?,
            displacements: self.scan.displacements.clone(),
        })
    }

    pub fn scf_options(&self) -> ScfOptions {
        ScfOptions {
            max_iterations: self.scf.max_iterations,
            energy_tolerance: self.scf.energy_tolerance,
            density_tolerance: self.scf.density_tolerance,
            diis: self.scf.diis,
            diis_size: self.scf.diis_size,
        }
    }

    pub fn boys_options(&self) -> BoysOptions {
        BoysOptions {
            max_sweeps: self.localize.max_sweeps,
            tolerance: self.localize.tolerance,
            random_starts: self.localize.random_starts,
            seed: self.localize.seed,
        }
    }

    pub fn davidson_options(&self) -> DavidsonOptions {
        DavidsonOptions {
            max_iterations: self.fci.max_iterations,
            residual_tolerance: self.fci.residual_tolerance,
            ..DavidsonOptions::default()
        }
    }

    pub fn qpe_config(&self, offset: f64) -> QpeConfig {
        QpeConfig {
            t: self.qpe.t,
            n_ancilla: self.qpe.ancilla,
            m_list: self.qpe.m.clone(),
            offset,
            readout: self.qpe.readout,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = Config::from_toml("").unwrap();
        assert_eq!(cfg.qpe.m, vec![128, 256, 512]);
        assert_eq!(cfg.scan.displacements.len(), 7);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::from_toml("[qpe]\nancillas = 6\n").unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("ancillas"), "{err}");
        let err = Config::from_toml("bogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn sections_parse() {
        let cfg = Config::from_toml("[qpe]\nt = 64.0\nm = [64, 128]\nreadout = \"max-prob\"\n[selection]\nactive = [6, 7, 14]\n").unwrap();
        assert_eq!(cfg.qpe.readout, Readout::MaxProb);
        assert_eq!(cfg.selection.active, Some(vec![6, 7, 14]));
        assert!(Config::from_toml("[scan]\nreference = 0.3\n").unwrap_err().is_config());
        assert!(Config::from_toml("[qpe]\nm = [0]\n").unwrap_err().is_config());
    }
}
