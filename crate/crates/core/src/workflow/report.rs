//! JSON and CSV emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::Result;
use crate::qpe::QpeDistribution;
use crate::units::to_kcal;
use crate::workflow::pipeline::{Artifacts, RunReport};

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn matrix_csv(m: &DMatrix<f64>, row_label: &str, col_label: &str) -> String {
    let mut s = format!("{row_label}\\{col_label}");
    for j in 0..m.ncols() {
        write!(s, ",{}", j + 1).unwrap();
    }
    s.push('\n');
    for i in 0..m.nrows() {
        write!(s, "{}", i + 1).unwrap();
        for j in 0..m.ncols() {
            write!(s, ",{:.10}", m[(i, j)]).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn distribution_csv(rows: &[(String, f64, &QpeDistribution)]) -> String {
    let mut s = String::from("system,displacement,m,bin,phase,probability\n");
    for (label, dr, d) in rows {
        for (x, p) in d.probabilities.iter().enumerate() {
            writeln!(s, "{label},{dr},{},{x},{:.10},{:.12e}", d.m, d.phase(x), p).unwrap();
        }
    }
    s
}

/// Writes `report.json` and the CSV tables into `dir`; returns the files written.
pub fn write_run(dir: &Path, report: &RunReport, artifacts: &Artifacts) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, text)?;
        written.push(p);
        Ok(())
    };

    let mut s = String::from("displacement,orbital,e_hartree,e_kcal_mol\n");
    for (a, dr) in artifacts.scan.analyses.iter().zip(&artifacts.scan.displacements) {
        for (p, &v) in a.mp2.orbitalwise.iter().enumerate() {
            writeln!(s, "{dr},{},{v:.12e},{:.6}", p + 1, to_kcal(v)).unwrap();
        }
    }
    put("orbitalwise.csv", s)?;

    let mut s = String::from("displacement,i,a,e_hartree,e_kcal_mol\n");
    for (a, dr) in artifacts.scan.analyses.iter().zip(&artifacts.scan.displacements) {
        let exc = &a.mp2.excitationwise;
        for i in 0..exc.nrows() {
            for j in 0..exc.ncols() {
                if exc[(i, j)] != 0.0 {
                    writeln!(s, "{dr},{},{},{:.12e},{:.6}", i + 1, j + 1, exc[(i, j)], to_kcal(exc[(i, j)])).unwrap();
                }
            }
        }
    }
    put("excitationwise.csv", s)?;

    if let Some(sel) = &report.selection {
        let mut s = String::from("orbital,max_kcal_mol,min_kcal_mol,difference_kcal_mol\n");
        for v in &sel.variations {
            writeln!(s, "{},{:.4},{:.4},{:.4}", v.orbital, v.max_kcal, v.min_kcal, v.difference_kcal).unwrap();
        }
        put("orbital_variation.csv", s)?;
    }

    let mut s = String::from("displacement,delta,fermionic_terms,pauli_terms,e_casci,shift_kcal_mol\n");
    for g in &report.geometries {
        writeln!(s, "{},0,{},{},{:.10},0.0000", g.displacement, g.system.fermionic_terms, g.system.pauli_terms, g.system.e_casci).unwrap();
        for t in &g.truncation {
            writeln!(s, "{},{},{},{},{:.10},{:.4}", g.displacement, t.delta, t.fermionic_terms, t.pauli_terms, t.e_casci, t.shift.kcal_mol).unwrap();
        }
    }
    put("truncation.csv", s)?;

    let mut s = String::from("system,displacement,e_hf,e_casci,e_aem_max_prob,e_aem_wgt_ave,error_max_prob_kcal_mol,error_wgt_ave_kcal_mol\n");
    let mut qrows = String::from("system,displacement,m,phase_max_prob,phase_wgt_ave,e_max_prob,e_wgt_ave,e_trotter\n");
    let mut dists = Vec::new();
    let systems = report
        .geometries
        .iter()
        .map(|g| (g.system.label.clone(), g.displacement, &g.system))
        .chain(report.monomers.iter().map(|m| (m.label.clone(), f64::NAN, m)));
    for (label, dr, sys) in systems {
        if let Some(q) = &sys.qpe {
            writeln!(
                s,
                "{label},{dr},{:.10},{:.10},{:.10},{:.10},{:.4},{:.4}",
                sys.e_hf, sys.e_casci, q.result.fit_max_prob.b, q.result.fit_wgt_ave.b, q.error_max_prob.kcal_mol, q.error_wgt_ave.kcal_mol
            )
            .unwrap();
            for r in &q.result.runs {
                writeln!(qrows, "{label},{dr},{},{:.10},{:.10},{:.10},{:.10},{:.10}", r.m, r.phase_max_prob, r.phase_wgt_ave, r.energy_max_prob, r.energy_wgt_ave, r.trotter_energy).unwrap();
                dists.push((label.clone(), dr, &r.distribution));
            }
        }
    }
    put("qpe_errors.csv", s)?;
    put("qpe_runs.csv", qrows)?;
    put("distributions.csv", distribution_csv(&dists))?;

    for m in &artifacts.monomers {
        put(&format!("overlap_dimer_{}.csv", m.label.replace(' ', "")), matrix_csv(&m.overlap, "dimer", "monomer"))?;
    }
    for (a, dr) in artifacts.scan.analyses.iter().zip(&artifacts.scan.displacements) {
        if let Some(al) = &a.alignment {
            let mut s = String::from("orbital,matched_original,overlap\n");
            for (i, (&p, &o)) in al.permutation.iter().zip(&al.matched_overlaps).enumerate() {
                writeln!(s, "{},{},{o:.10}", i + 1, p + 1).unwrap();
            }
            put(&format!("alignment_dr_{dr}.csv"), s)?;
        }
    }

    if !report.exclusion_scan.is_empty() {
        let mut s = String::from("orbital,energy,abs_difference_hartree,abs_difference_kcal_mol\n");
        for p in &report.exclusion_scan {
            writeln!(s, "{},{:.10},{:.6e},{:.6}", p.orbital, p.energy, p.abs_difference, to_kcal(p.abs_difference)).unwrap();
        }
        put("exclusion_scan.csv", s)?;
    }

    put("active.fcidump", artifacts.fcidump.clone())?;
    put("pauli_terms.json", serde_json::to_string_pretty(&artifacts.pauli_terms)? + "\n")?;
    put("report.json", serde_json::to_string_pretty(report)? + "\n")?;
    Ok(written)
}
