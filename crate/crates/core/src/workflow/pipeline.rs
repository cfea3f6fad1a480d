//! Supramolecular interaction-energy pipeline over a geometry scan.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::ci::{casci_energy, fci_davidson, ground_state_energy, casci_orbital_exclusion_scan, ExclusionPoint};
use crate::error::{Error, Result};
use crate::hamiltonian::pauli::C64;
use crate::hamiltonian::{build_active_hamiltonian, jordan_wigner_with, truncate_fermionic, FermionHamiltonian, QubitHamiltonian};
use crate::integrals::{BasisSet, Geometry};
use crate::localize::{embed_coefficients, overlap_diagnostic, BoysOptions};
use crate::mointegrals::{mp2_energy, select_active, ActiveSpace, SelectionReport};
use crate::qpe::{basis_state, estimate_resources, run_qpe_aem, QpeAemResult, Readout, ResourceEstimate};
use crate::scf::ScfOptions;
use crate::units::to_kcal;
use crate::workflow::config::Config;
use crate::workflow::scan::scan_geometries;
use crate::workflow::stages::{analyze, GeometryAnalysis, StageOptions};

/// An energy in hartree with its kcal/mol mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energy {
    pub hartree: f64,
    pub kcal_mol: f64,
}

impl Energy {
    pub fn new(hartree: f64) -> Self {
        Self {
            hartree,
            kcal_mol: to_kcal(hartree),
        }
    }
}

pub struct Pipeline {
    pub config: Config,
    pub dimer: Geometry,
    basis: BasisSet,
    basis_text: String,
    scf: ScfOptions,
    boys: BoysOptions,
}

/// All geometries of the scan, orbitals aligned to the reference.
pub struct ScanAnalysis {
    pub displacements: Vec<f64>,
    pub analyses: Vec<GeometryAnalysis>,
    pub reference: usize,
}

impl ScanAnalysis {
    pub fn at(&self, dr: f64) -> Option<&GeometryAnalysis> {
        self.displacements.iter().position(|&d| d == dr).map(|i| &self.analyses[i])
    }

    pub fn reference(&self) -> &GeometryAnalysis {
        &self.analyses[self.reference]
    }
}

/// A dimer active orbital mapped onto a monomer orbital.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitalAssignment {
    /// 1-based dimer orbital.
    pub dimer_orbital: usize,
    /// 1 or 2.
    pub monomer: usize,
    /// 1-based monomer orbital.
    pub monomer_orbital: usize,
    pub overlap: f64,
}

pub struct MonomerSystem {
    pub label: String,
    pub atoms: Vec<usize>,
    pub analysis: GeometryAnalysis,
    pub space: ActiveSpace,
    /// |⟨dimer|monomer⟩| with dimer orbitals as rows.
    pub overlap: DMatrix<f64>,
}

/// Energies of one system (a dimer geometry or a monomer) within an active space.
#[derive(Debug, Clone, Serialize)]
pub struct SystemResult {
    pub label: String,
    pub active_space: String,
    pub active_orbitals: Vec<usize>,
    pub e_hf: f64,
    pub e_casci: f64,
    pub e_corr_casci: Energy,
    /// MP2 correlation restricted to the active orbitals.
    pub e_mp2_window: f64,
    pub fermionic_terms: usize,
    pub pauli_terms: usize,
    pub qpe: Option<QpeSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QpeSummary {
    pub result: QpeAemResult,
    /// AEM energy with the configured readout.
    pub e_aem: f64,
    /// E(AEM) − E(CASCI) for each readout.
    pub error_max_prob: Energy,
    pub error_wgt_ave: Energy,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationRow {
    pub delta: f64,
    pub fermionic_terms: usize,
    pub pauli_terms: usize,
    pub e_casci: f64,
    pub shift: Energy,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryRecord {
    pub displacement: f64,
    pub h_o_distance: f64,
    pub o_o_distance: f64,
    pub rhf_scf_iterations: usize,
    /// Smallest matched |overlap| with the reference orbitals.
    pub min_reference_overlap: f64,
    pub system: SystemResult,
    pub truncation: Vec<TruncationRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionEnergies {
    pub rhf: Energy,
    pub casci: Energy,
    pub qpe_aem: Option<Energy>,
    pub qpe_aem_max_prob: Option<Energy>,
    pub qpe_aem_wgt_ave: Option<Energy>,
    /// E(reference) − E(separated) with QPE+AEM.
    pub qpe_aem_vs_separated: Option<Energy>,
    pub casci_vs_separated: Option<Energy>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeConsistency {
    pub e_separated_casci: f64,
    pub e_monomers_casci: f64,
    pub casci_delta: Energy,
    pub e_separated_qpe: Option<f64>,
    pub e_monomers_qpe: Option<f64>,
    pub qpe_delta: Option<Energy>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FciRecord {
    pub treatment: String,
    pub dimer: f64,
    pub monomers: [f64; 2],
    pub dimer_determinants: usize,
    pub dimer_iterations: usize,
    pub interaction: Energy,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: Config,
    pub reference_displacement: f64,
    pub h_o_distance: f64,
    pub o_o_distance: f64,
    pub selection: Option<SelectionReport>,
    pub active_space: String,
    pub active_orbitals: Vec<usize>,
    pub geometries: Vec<GeometryRecord>,
    pub assignments: Vec<OrbitalAssignment>,
    pub monomers: Vec<SystemResult>,
    pub interaction: InteractionEnergies,
    pub size_consistency: Option<SizeConsistency>,
    pub rounding_bound: Energy,
    pub resources: Vec<ResourceEstimate>,
    pub fci: Vec<FciRecord>,
    pub exclusion_scan: Vec<ExclusionPoint>,
}

impl Pipeline {
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        let dimer = config.geometry()?;
        let (basis, basis_text) = config.basis()?;
        basis.validate_for(&dimer)?;
        let scf = config.scf_options();
        let boys = config.boys_options();
        Ok(Self {
            config,
            dimer,
            basis,
            basis_text,
            scf,
            boys,
        })
    }

    fn stage_options(&self) -> StageOptions<'_> {
        StageOptions {
            basis: &self.basis,
            basis_text: &self.basis_text,
            scf: &self.scf,
            boys: &self.boys,
            cache_dir: self.config.output.cache_dir.as_deref(),
        }
    }

    pub fn geometries(&self) -> Result<Vec<Geometry>> {
        scan_geometries(&self.config.scan_spec(self.dimer.clone())?)
    }

    /// Reference geometry only, without alignment.
    pub fn analyze_reference(&self) -> Result<GeometryAnalysis> {
        let geoms = self.geometries()?;
        let i = self.reference_index();
        analyze(&geoms[i], &self.stage_options(), None)
    }

    fn reference_index(&self) -> usize {
        self.config.scan.displacements.iter().position(|&d| d == self.config.scan.reference).expect("validated")
    }

    /// Every geometry of the scan, labels aligned to the reference.
    pub fn analyze_scan(&self) -> Result<ScanAnalysis> {
        let geoms = self.geometries()?;
        let r = self.reference_index();
        let opts = self.stage_options();
        let reference = analyze(&geoms[r], &opts, None)?;
        let others: Vec<Option<GeometryAnalysis>> = geoms
            .par_iter()
            .enumerate()
            .map(|(i, g)| if i == r { Ok(None) } else { analyze(g, &opts, Some(&reference)).map(Some) })
            .collect::<Result<_>>()?;
        let mut reference = Some(reference);
        let analyses = others.into_iter().map(|a| a.unwrap_or_else(|| reference.take().unwrap())).collect();
        Ok(ScanAnalysis {
            displacements: self.config.scan.displacements.clone(),
            analyses,
            reference: r,
        })
    }

    /// MP2-based selection over the scan, or the configured explicit space.
    pub fn active_space(&self, scan: &ScanAnalysis) -> Result<(ActiveSpace, Option<SelectionReport>)> {
        let reference = scan.reference();
        let (n_occ, n_mo) = (reference.mo.n_occ, reference.mo.n_mo());
        if let Some(active) = &self.config.selection.active {
            let space = ActiveSpace::new(active.iter().map(|p| p - 1).collect(), n_occ, n_mo).map_err(|e| e.at("selection"))?;
            if let Some(&p) = space.active.iter().find(|&&p| p < reference.mo.n_core) {
                return Err(Error::Config(format!("selection.active contains frozen core orbital {}", p + 1)));
            }
            return Ok((space, None));
        }
        let tables: Vec<DVector<f64>> = scan.analyses.iter().map(|a| a.mp2.orbitalwise.clone()).collect();
        let (space, report) = select_active(
            &tables,
            &reference.mp2.excitationwise,
            reference.mo.n_core,
            n_occ,
            self.config.selection.theta_var,
            self.config.selection.theta_exc,
        )
        .map_err(|e| e.at("selection"))?;
        Ok((space, Some(report)))
    }

    /// Monomers cut from the reference geometry, each with the active space
    /// inherited from the dimer orbitals it overlaps most.
    pub fn monomers(&self, reference: &GeometryAnalysis, space: &ActiveSpace) -> Result<(Vec<MonomerSystem>, Vec<OrbitalAssignment>)> {
        let opts = self.stage_options();
        let groups = [&self.config.monomers.first, &self.config.monomers.second];
        let mut systems = Vec::new();
        for (k, atoms) in groups.iter().enumerate() {
            let mut idx: Vec<usize> = atoms.iter().map(|a| a - 1).collect();
            idx.sort_unstable();
            if idx.iter().any(|&a| a >= reference.geometry.n_atoms()) {
                return Err(Error::Config(format!("monomer atom index out of range for {} atoms", reference.geometry.n_atoms())));
            }
            let label = format!("monomer {}", k + 1);
            let geom = reference.geometry.subset(&idx, label.clone())?;
            let analysis = analyze(&geom, &opts, None).map_err(|e| e.at("monomer"))?;
            let ao_map: Vec<usize> = (0..reference.ints.n_ao).filter(|&i| idx.contains(&reference.ints.ao_atoms[i])).collect();
            let embedded = embed_coefficients(&analysis.orbitals.c, &ao_map, reference.ints.n_ao)?;
            let overlap = overlap_diagnostic(&reference.orbitals.c, &embedded, &reference.ints.overlap)?;
            systems.push((label, atoms.to_vec(), analysis, overlap));
        }

        let mut assignments = Vec::new();
        let mut actives: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for &p in &space.active {
            let mut best = (0usize, 0usize, -1.0f64);
            for (k, sys) in systems.iter().enumerate() {
                let row = sys.3.row(p);
                let (j, v) = row.iter().enumerate().fold((0, -1.0), |b, (j, &v)| if v > b.1 { (j, v) } else { b });
                if v > best.2 {
                    best = (k, j, v);
                }
            }
            if best.2 < self.config.monomers.min_overlap {
                return Err(Error::AmbiguousAssignment { orbital: p + 1, best: best.2 });
            }
            let mono = &systems[best.0].2;
            if mono.mo.is_occupied(best.1) != reference.mo.is_occupied(p) {
                return Err(Error::Numerical(format!(
                    "dimer orbital {} matched monomer {} orbital {} of different occupation",
                    p + 1,
                    best.0 + 1,
                    best.1 + 1
                )));
            }
            actives[best.0].push(best.1);
            assignments.push(OrbitalAssignment {
                dimer_orbital: p + 1,
                monomer: best.0 + 1,
                monomer_orbital: best.1 + 1,
                overlap: best.2,
            });
        }
        let mut out = Vec::new();
        for ((label, atoms, analysis, overlap), active) in systems.into_iter().zip(actives) {
            let space = ActiveSpace::new(active, analysis.mo.n_occ, analysis.mo.n_mo())?;
            out.push(MonomerSystem {
                label,
                atoms,
                analysis,
                space,
                overlap,
            });
        }
        Ok((out, assignments))
    }

    pub fn qubit_hamiltonian(&self, h: &FermionHamiltonian) -> QubitHamiltonian {
        jordan_wigner_with(h, self.config.hamiltonian.spin_ordering).magnitude_order()
    }

    /// Hartree–Fock determinant on the system register.
    pub fn hf_state(&self, q: &QubitHamiltonian, space: &ActiveSpace) -> DVector<C64> {
        let n = space.n_alpha();
        basis_state(q.n_qubits, q.hartree_fock_state(n, n))
    }

    /// CASCI, MP2 window, term counts and (optionally) QPE+AEM for one system.
    pub fn system_result(&self, label: &str, analysis: &GeometryAnalysis, space: &ActiveSpace, with_qpe: bool) -> Result<SystemResult> {
        let e_hf = analysis.scf.energy;
        let window: Vec<usize> = space.active.clone();
        let (h, e_casci, fermionic_terms, pauli_terms, e_mp2) = if space.active.is_empty() {
            (None, e_hf, 0, 0, 0.0)
        } else {
            let h = build_active_hamiltonian(&analysis.mo, space).map_err(|e| e.at("hamiltonian"))?;
            let na = space.n_alpha();
            let e = ground_state_energy(&h, na, na).map_err(|e| e.at("casci"))?;
            let q = self.qubit_hamiltonian(&h);
            let e_mp2 = mp2_energy(&analysis.mo, &window).map_err(|e| e.at("mp2"))?;
            let (fc, pc) = (h.coefficient_count(), q.len());
            (Some((h, q)), e, fc, pc, e_mp2)
        };
        let qpe = match (&h, with_qpe) {
            (Some((_, q)), true) => {
                let cfg = self.config.qpe_config(e_hf);
                let state = self.hf_state(q, space);
                let result = run_qpe_aem(q, &cfg, &state).map_err(|e| e.at("qpe"))?;
                Some(summarize(result, cfg.readout, e_casci))
            }
            (None, true) => None,
            _ => None,
        };
        Ok(SystemResult {
            label: label.to_string(),
            active_space: space.label(),
            active_orbitals: space.one_based(),
            e_hf,
            e_casci,
            e_corr_casci: Energy::new(e_casci - e_hf),
            e_mp2_window: e_mp2,
            fermionic_terms,
            pauli_terms,
            qpe,
        })
    }

    /// Term counts and CASCI shifts after truncating at each δ.
    pub fn truncation_study(&self, analysis: &GeometryAnalysis, space: &ActiveSpace, e_reference: f64) -> Result<Vec<TruncationRow>> {
        if space.active.is_empty() {
            return Ok(Vec::new());
        }
        let h = build_active_hamiltonian(&analysis.mo, space)?;
        let na = space.n_alpha();
        self.config
            .hamiltonian
            .deltas
            .iter()
            .map(|&delta| {
                let ht = truncate_fermionic(&h, delta);
                let e = casci_energy(&ht, na, na)?.energy;
                Ok(TruncationRow {
                    delta,
                    fermionic_terms: ht.coefficient_count(),
                    pauli_terms: self.qubit_hamiltonian(&ht).len(),
                    e_casci: e,
                    shift: Energy::new(e - e_reference),
                })
            })
            .collect()
    }

    /// Full CI of the dimer and both monomers at the reference geometry.
    pub fn full_ci(&self, reference: &GeometryAnalysis, monomers: &[MonomerSystem], frozen_core: bool) -> Result<FciRecord> {
        let opts = self.config.davidson_options();
        let run = |a: &GeometryAnalysis| {
            let frozen: Vec<usize> = if frozen_core { (0..a.mo.n_core).collect() } else { Vec::new() };
            let n = a.mo.n_occ - frozen.len();
            fci_davidson(&a.mo, &frozen, n, n, &opts).map_err(|e| e.at("fci"))
        };
        let d = run(reference)?;
        let m1 = run(&monomers[0].analysis)?.energy;
        let m2 = run(&monomers[1].analysis)?.energy;
        Ok(FciRecord {
            treatment: if frozen_core { "frozen-core" } else { "all-electron" }.into(),
            dimer: d.energy,
            monomers: [m1, m2],
            dimer_determinants: d.dimension,
            dimer_iterations: d.iterations,
            interaction: Energy::new(d.energy - m1 - m2),
        })
    }

    /// |E(CASCI without p) − E(full CI)| for every non-core orbital p, in the
    /// space of all non-core orbitals.
    pub fn exclusion_scan(&self, reference: &GeometryAnalysis, e_full: f64) -> Result<Vec<ExclusionPoint>> {
        let mo = &reference.mo;
        let base = ActiveSpace::new((mo.n_core..mo.n_mo()).collect(), mo.n_occ, mo.n_mo())?;
        (mo.n_core..mo.n_mo()).map(|p| casci_orbital_exclusion_scan(mo, &base, p, e_full)).collect()
    }

    pub fn resources(&self, reference: &GeometryAnalysis, space: &ActiveSpace) -> Result<Vec<ResourceEstimate>> {
        let h = build_active_hamiltonian(&reference.mo, space)?;
        let q = self.qubit_hamiltonian(&h).with_offset(-reference.scf.energy);
        Ok(self.config.qpe.m.iter().map(|&m| estimate_resources(&q, m, self.config.qpe.ancilla)).collect())
    }

    /// The whole chain: scan, selection, per-geometry CASCI and QPE+AEM,
    /// monomers, interaction energies, size consistency, optional full CI.
    pub fn run(&self) -> Result<(RunReport, Artifacts)> {
        let scan = self.analyze_scan()?;
        let (space, selection) = self.active_space(&scan)?;
        log::info!("active space {} = {:?}", space.label(), space.one_based());
        let reference = scan.reference();

        let records: Vec<GeometryRecord> = scan
            .analyses
            .par_iter()
            .zip(&scan.displacements)
            .map(|(a, &dr)| {
                let sys = self.system_result(&a.geometry.label, a, &space, true)?;
                let truncation = self.truncation_study(a, &space, sys.e_casci)?;
                let spec = self.config.scan_spec(a.geometry.clone())?;
                let o_donor = self.donor_oxygen(&a.geometry, spec.donor_h);
                Ok(GeometryRecord {
                    displacement: dr,
                    h_o_distance: a.geometry.distance(spec.donor_h, spec.acceptor_o),
                    o_o_distance: a.geometry.distance(o_donor, spec.acceptor_o),
                    rhf_scf_iterations: a.scf.iterations,
                    min_reference_overlap: a.alignment.as_ref().map_or(1.0, |al| al.matched_overlaps.iter().copied().fold(1.0, f64::min)),
                    system: sys,
                    truncation,
                })
            })
            .collect::<Result<_>>()?;

        let (monomers, assignments) = self.monomers(reference, &space)?;
        let mono_results: Vec<SystemResult> = monomers
            .iter()
            .map(|m| self.system_result(&m.label, &m.analysis, &m.space, true))
            .collect::<Result<_>>()?;

        let r = scan.reference;
        let dimer = &records[r].system;
        let e_qpe = |s: &SystemResult, ro: Readout| s.qpe.as_ref().map(|q| q.result.fit(ro).b).unwrap_or(s.e_casci);
        let readout = self.config.qpe.readout;
        let diff3 = |a: f64, b: f64, c: f64| Energy::new(a - b - c);
        let separated = scan.displacements.iter().position(|&d| d == self.config.scan.separated);
        let interaction = InteractionEnergies {
            rhf: diff3(dimer.e_hf, mono_results[0].e_hf, mono_results[1].e_hf),
            casci: diff3(dimer.e_casci, mono_results[0].e_casci, mono_results[1].e_casci),
            qpe_aem: Some(diff3(e_qpe(dimer, readout), e_qpe(&mono_results[0], readout), e_qpe(&mono_results[1], readout))),
            qpe_aem_max_prob: Some(diff3(e_qpe(dimer, Readout::MaxProb), e_qpe(&mono_results[0], Readout::MaxProb), e_qpe(&mono_results[1], Readout::MaxProb))),
            qpe_aem_wgt_ave: Some(diff3(e_qpe(dimer, Readout::WgtAve), e_qpe(&mono_results[0], Readout::WgtAve), e_qpe(&mono_results[1], Readout::WgtAve))),
            qpe_aem_vs_separated: separated.map(|s| Energy::new(e_qpe(dimer, readout) - e_qpe(&records[s].system, readout))),
            casci_vs_separated: separated.map(|s| Energy::new(dimer.e_casci - records[s].system.e_casci)),
        };
        let size_consistency = separated.map(|s| {
            let sep = &records[s].system;
            let mono_cas = mono_results[0].e_casci + mono_results[1].e_casci;
            let mono_qpe = e_qpe(&mono_results[0], readout) + e_qpe(&mono_results[1], readout);
            SizeConsistency {
                e_separated_casci: sep.e_casci,
                e_monomers_casci: mono_cas,
                casci_delta: Energy::new((sep.e_casci - mono_cas).abs()),
                e_separated_qpe: Some(e_qpe(sep, readout)),
                e_monomers_qpe: Some(mono_qpe),
                qpe_delta: Some(Energy::new((e_qpe(sep, readout) - mono_qpe).abs())),
            }
        });

        let mut fci = Vec::new();
        let mut exclusion = Vec::new();
        if self.config.fci.enabled {
            if self.config.fci.all_electron {
                fci.push(self.full_ci(reference, &monomers, false)?);
            }
            if self.config.fci.frozen_core || self.config.fci.exclusion_scan {
                let rec = self.full_ci(reference, &monomers, true)?;
                if self.config.fci.exclusion_scan {
                    exclusion = self.exclusion_scan(reference, rec.dimer)?;
                }
                if self.config.fci.frozen_core {
                    fci.push(rec);
                }
            }
        }

        let spec = self.config.scan_spec(reference.geometry.clone())?;
        let o_donor = self.donor_oxygen(&reference.geometry, spec.donor_h);
        let report = RunReport {
            config: self.config.clone(),
            reference_displacement: self.config.scan.reference,
            h_o_distance: reference.geometry.distance(spec.donor_h, spec.acceptor_o),
            o_o_distance: reference.geometry.distance(o_donor, spec.acceptor_o),
            selection,
            active_space: space.label(),
            active_orbitals: space.one_based(),
            geometries: records,
            assignments,
            monomers: mono_results,
            interaction,
            size_consistency,
            rounding_bound: Energy::new(crate::qpe::rounding_bound(self.config.qpe.t, self.config.qpe.ancilla)),
            resources: self.resources(reference, &space)?,
            fci,
            exclusion_scan: exclusion,
        };
        let artifacts = Artifacts {
            fcidump: crate::hamiltonian::to_fcidump(&build_active_hamiltonian(&reference.mo, &space)?, space.n_active_electrons, 0),
            pauli_terms: self.qubit_hamiltonian(&build_active_hamiltonian(&reference.mo, &space)?).to_text_terms(),
            scan,
            monomers,
        };
        Ok((report, artifacts))
    }

    /// Oxygen bonded to the donor hydrogen (nearest O atom).
    fn donor_oxygen(&self, g: &Geometry, donor_h: usize) -> usize {
        (0..g.n_atoms())
            .filter(|&i| g.atoms[i].z == 8 && i != donor_h)
            .min_by(|&a, &b| g.distance(donor_h, a).total_cmp(&g.distance(donor_h, b)))
            .unwrap_or(donor_h)
    }
}

/// Bulky intermediate data kept for CSV and FCIDUMP emission.
pub struct Artifacts {
    pub fcidump: String,
    pub pauli_terms: Vec<(String, f64)>,
    pub scan: ScanAnalysis,
    pub monomers: Vec<MonomerSystem>,
}

fn summarize(result: QpeAemResult, readout: Readout, e_casci: f64) -> QpeSummary {
    QpeSummary {
        e_aem: result.fit(readout).b,
        error_max_prob: Energy::new(result.fit_max_prob.b - e_casci),
        error_wgt_ave: Energy::new(result.fit_wgt_ave.b - e_casci),
        result,
    }
}
