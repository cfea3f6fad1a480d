//! Per-geometry electronic-structure chain: integrals → RHF → Boys → MO → MP2.

use std::path::Path;

use crate::error::Result;
use crate::integrals::{cache, AoIntegrals, BasisSet, Geometry};
use crate::localize::{align_to_reference, localize_orbitals, Alignment, BoysOptions, LocalizedOrbitals};
use crate::mointegrals::{ao_to_mo, mp2_analysis, MoIntegrals, Mp2Analysis};
use crate::scf::{run_rhf, ScfOptions, ScfResult};

#[derive(Debug, Clone)]
pub struct GeometryAnalysis {
    pub geometry: Geometry,
    pub ints: AoIntegrals,
    pub scf: ScfResult,
    pub orbitals: LocalizedOrbitals,
    pub mo: MoIntegrals,
    pub mp2: Mp2Analysis,
    /// Present when the orbitals were relabelled against a reference geometry.
    pub alignment: Option<Alignment>,
}

pub struct StageOptions<'a> {
    pub basis: &'a BasisSet,
    pub basis_text: &'a str,
    pub scf: &'a ScfOptions,
    pub boys: &'a BoysOptions,
    pub cache_dir: Option<&'a Path>,
}

pub fn integrals(geometry: &Geometry, opts: &StageOptions) -> Result<AoIntegrals> {
    cache::load_or_compute(opts.cache_dir, geometry, opts.basis, opts.basis_text).map_err(|e| e.at("integrals"))
}

pub fn rhf(geometry: &Geometry, ints: &AoIntegrals, opts: &StageOptions) -> Result<ScfResult> {
    let n_el = geometry.n_electrons();
    if n_el < 0 {
        return Err(crate::error::Error::Invalid("negative electron count".into()).at("scf"));
    }
    run_rhf(ints, n_el as usize, opts.scf).map_err(|e| e.at("scf"))
}

/// Runs the full chain for one geometry. When `reference` is given, orbital
/// labels are matched to it using the reference AO overlap; the AO lists of
/// both geometries must correspond one to one.
pub fn analyze(geometry: &Geometry, opts: &StageOptions, reference: Option<&GeometryAnalysis>) -> Result<GeometryAnalysis> {
    let ints = integrals(geometry, opts)?;
    let scf = rhf(geometry, &ints, opts)?;
    let n_core = geometry.n_core_orbitals();
    let mut orbitals = localize_orbitals(&scf, &ints, n_core, opts.boys).map_err(|e| e.at("localize"))?;
    let mut alignment = None;
    if let Some(r) = reference {
        let (aligned, al) = align_to_reference(&r.orbitals, &orbitals, &r.ints.overlap).map_err(|e| e.at("localize"))?;
        orbitals = aligned;
        alignment = Some(al);
    }
    let mo = ao_to_mo(&ints, &orbitals.c, orbitals.fock_diagonal.clone(), n_core, scf.n_occ).map_err(|e| e.at("mointegrals"))?;
    let mp2 = mp2_analysis(&mo).map_err(|e| e.at("mp2"))?;
    Ok(GeometryAnalysis {
        geometry: geometry.clone(),
        ints,
        scf,
        orbitals,
        mo,
        mp2,
        alignment,
    })
}
