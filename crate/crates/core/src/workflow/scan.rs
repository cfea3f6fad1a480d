//! Rigid-fragment displacement along the hydrogen-bond axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::Geometry;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryScanSpec {
    pub base: Geometry,
    /// Donor hydrogen (0-based atom index).
    pub donor_h: usize,
    /// Acceptor oxygen (0-based atom index).
    pub acceptor_o: usize,
    /// Atoms translated during the scan.
    pub moving: Vec<usize>,
    /// Displacements in ångström.
    pub displacements: Vec<f64>,
}

impl GeometryScanSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.base.n_atoms();
        if self.displacements.is_empty() {
            return Err(Error::Config("scan needs at least one displacement".into()));
        }
        if self.donor_h >= n || self.acceptor_o >= n || self.moving.iter().any(|&a| a >= n) {
            return Err(Error::Config("scan atom index out of range".into()));
        }
        if self.moving.contains(&self.donor_h) == self.moving.contains(&self.acceptor_o) {
            return Err(Error::Config(
                "the donor hydrogen and acceptor oxygen must lie in different fragments".into(),
            ));
        }
        Ok(())
    }

    /// Unit vector from the donor H towards the acceptor O.
    pub fn axis(&self) -> [f64; 3] {
        let h = self.base.atoms[self.donor_h].position;
        let o = self.base.atoms[self.acceptor_o].position;
        let d = [o[0] - h[0], o[1] - h[1], o[2] - h[2]];
        let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        d.map(|x| x / len)
    }
}

/// Moves `spec.moving` rigidly by each Δr so the H···O distance grows by Δr.
pub fn scan_geometries(spec: &GeometryScanSpec) -> Result<Vec<Geometry>> {
    spec.validate()?;
    // Displacing the fragment holding the acceptor moves it along +axis;
    // the donor side moves the opposite way.
    let sign = if spec.moving.contains(&spec.acceptor_o) { 1.0 } else { -1.0 };
    let axis = spec.axis();
    spec.displacements
        .iter()
        .map(|&dr| {
            let mut g = spec.base.clone();
            for &a in &spec.moving {
                for k in 0..3 {
                    g.atoms[a].position[k] += sign * dr * axis[k];
                }
            }
            g.label = format!("{} dr={dr}", spec.base.label).trim().to_string();
            for i in 0..g.n_atoms() {
                for j in 0..i {
                    if g.distance(i, j) < 1e-3 {
                        return Err(Error::Invalid(format!(
                            "displacement {dr} Å makes atoms {} and {} coincide",
                            j + 1,
                            i + 1
                        )));
                    }
                }
            }
            Ok(g)
        })
        .collect()
}
