use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hbqpe::ci::casci_energy;
use hbqpe::hamiltonian::{build_active_hamiltonian, to_fcidump, truncate_fermionic};
use hbqpe::qpe::{estimate_resources, run_qpe, run_qpe_aem, Readout};
use hbqpe::workflow::pipeline::ScanAnalysis;
use hbqpe::workflow::report::{distribution_csv, matrix_csv, write_json, write_run};
use hbqpe::workflow::{Config, Energy, Pipeline};
use hbqpe::{Error, Result};

#[derive(Parser)]
#[command(name = "hbqpe", version, about = "Hydrogen-bond interaction energies from simulated QPE-CASCI")]
struct Cli {
    /// TOML configuration; built-in water-dimer defaults when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GeometryArg {
    /// Scan displacement in Å; the reference geometry when omitted.
    #[arg(long, allow_hyphen_values = true)]
    dr: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// RHF energies of the dimer and monomers at the reference geometry.
    Scf,
    /// Boys orbitals, reference alignment and monomer overlaps.
    Localize,
    /// Orbital-wise MP2 variation over the scan and the selected active space.
    Mp2Select,
    /// Active-space Hamiltonian, term counts, optional truncation and FCIDUMP.
    Hamiltonian {
        #[command(flatten)]
        geometry: GeometryArg,
        /// Truncation threshold in hartree.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long)]
        export_fcidump: Option<PathBuf>,
    },
    /// CASCI energies for every geometry of the scan.
    Casci,
    /// Full CI of the dimer and monomers by Davidson iteration.
    Fci {
        /// Freeze the oxygen 1s orbitals.
        #[arg(long)]
        frozen_core: bool,
    },
    /// One QPE run and its phase distribution.
    Qpe {
        #[command(flatten)]
        geometry: GeometryArg,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        ancilla: Option<usize>,
        #[arg(long)]
        readout: Option<String>,
    },
    /// QPE over the configured slice counts and the 1/M² extrapolation.
    Aem {
        #[command(flatten)]
        geometry: GeometryArg,
    },
    /// Interaction energies (RHF, CASCI, QPE+AEM) and size consistency.
    Interact,
    /// Per-geometry CASCI and QPE+AEM errors.
    Scan,
    /// Everything, with all JSON/CSV artifacts.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    Ok(cfg)
}

fn print_line(text: &str) -> Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(dir: &Path, name: &str, value: &Value) -> Result<()> {
    write_json(&dir.join(format!("{name}.json")), value)?;
    print_line(&serde_json::to_string_pretty(value)?)
}

fn analysis_at<'a>(scan: &'a ScanAnalysis, dr: Option<f64>) -> Result<&'a hbqpe::workflow::stages::GeometryAnalysis> {
    match dr {
        None => Ok(scan.reference()),
        Some(d) => scan.at(d).ok_or_else(|| Error::Config(format!("displacement {d} is not part of scan.displacements"))),
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let dir = cfg.output.dir.clone();
    let pipeline = Pipeline::new(cfg)?;
    match cli.command {
        Command::Scf => {
            let reference = pipeline.analyze_reference()?;
            let space = hbqpe::mointegrals::ActiveSpace::new(Vec::new(), reference.mo.n_occ, reference.mo.n_mo())?;
            let (monomers, _) = pipeline.monomers(&reference, &space)?;
            let (e1, e2) = (monomers[0].analysis.scf.energy, monomers[1].analysis.scf.energy);
            let value = json!({
                "dimer": {"energy": reference.scf.energy, "iterations": reference.scf.iterations, "orbital_energies": reference.scf.eps.as_slice()},
                "monomer_1": {"atoms": monomers[0].atoms, "energy": e1},
                "monomer_2": {"atoms": monomers[1].atoms, "energy": e2},
                "interaction": Energy::new(reference.scf.energy - e1 - e2),
            });
            emit(&dir, "scf", &value)
        }
        Command::Localize => {
            let scan = pipeline.analyze_scan()?;
            let reference = scan.reference();
            let space = hbqpe::mointegrals::ActiveSpace::new(Vec::new(), reference.mo.n_occ, reference.mo.n_mo())?;
            let (monomers, _) = pipeline.monomers(reference, &space)?;
            std::fs::create_dir_all(&dir)?;
            for m in &monomers {
                std::fs::write(dir.join(format!("overlap_dimer_{}.csv", m.label.replace(' ', ""))), matrix_csv(&m.overlap, "dimer", "monomer"))?;
            }
            for (a, dr) in scan.analyses.iter().zip(&scan.displacements) {
                let o = hbqpe::localize::overlap_diagnostic(&reference.orbitals.c, &a.orbitals.c, &reference.ints.overlap)?;
                std::fs::write(dir.join(format!("overlap_reference_dr_{dr}.csv")), matrix_csv(&o, "reference", "geometry"))?;
            }
            let geoms: Vec<Value> = scan
                .analyses
                .iter()
                .zip(&scan.displacements)
                .map(|(a, dr)| {
                    json!({
                        "displacement": dr,
                        "fock_diagonal": a.orbitals.fock_diagonal.as_slice(),
                        "boys_occupied": a.orbitals.functional_occupied,
                        "boys_virtual": a.orbitals.functional_virtual,
                        "alignment": a.alignment,
                    })
                })
                .collect();
            emit(&dir, "localize", &json!({ "n_core": reference.orbitals.n_core, "n_occ": reference.orbitals.n_occ, "geometries": geoms }))
        }
        Command::Mp2Select => {
            let scan = pipeline.analyze_scan()?;
            let (space, selection) = pipeline.active_space(&scan)?;
            let reference = scan.reference();
            let window = hbqpe::mointegrals::mp2_energy(&reference.mo, &space.active)?;
            emit(
                &dir,
                "mp2-select",
                &json!({
                    "active_space": space.label(),
                    "active_orbitals": space.one_based(),
                    "mp2_window": Energy::new(window),
                    "mp2_total_reference": Energy::new(reference.mp2.total),
                    "selection": selection,
                }),
            )
        }
        Command::Hamiltonian { geometry, delta, export_fcidump } => {
            if delta < 0.0 {
                return Err(Error::Config("--delta must be non-negative".into()));
            }
            let scan = pipeline.analyze_scan()?;
            let (space, _) = pipeline.active_space(&scan)?;
            let a = analysis_at(&scan, geometry.dr)?;
            let h = truncate_fermionic(&build_active_hamiltonian(&a.mo, &space)?, delta);
            let q = pipeline.qubit_hamiltonian(&h);
            if let Some(path) = export_fcidump {
                std::fs::write(&path, to_fcidump(&h, space.n_active_electrons, 0))?;
            }
            let na = space.n_alpha();
            let value = json!({
                "displacement": geometry.dr.unwrap_or(pipeline.config.scan.reference),
                "active_space": space.label(),
                "delta": delta,
                "fermionic_terms": h.coefficient_count(),
                "pauli_terms": q.len(),
                "pauli_weight_histogram": q.weight_histogram(),
                "e_scalar": h.e_scalar,
                "e_casci": casci_energy(&h, na, na)?.energy,
                "terms": q.to_text_terms(),
            });
            emit(&dir, "hamiltonian", &value)
        }
        Command::Casci => {
            let scan = pipeline.analyze_scan()?;
            let (space, _) = pipeline.active_space(&scan)?;
            let rows: Vec<Value> = scan
                .analyses
                .iter()
                .zip(&scan.displacements)
                .map(|(a, dr)| {
                    let s = pipeline.system_result(&a.geometry.label, a, &space, false)?;
                    Ok(json!({"displacement": dr, "e_hf": s.e_hf, "e_casci": s.e_casci, "e_corr": s.e_corr_casci, "e_mp2_window": s.e_mp2_window}))
                })
                .collect::<Result<_>>()?;
            emit(&dir, "casci", &json!({"active_space": space.label(), "active_orbitals": space.one_based(), "geometries": rows}))
        }
        Command::Fci { frozen_core } => {
            let reference = pipeline.analyze_reference()?;
            let space = hbqpe::mointegrals::ActiveSpace::new(Vec::new(), reference.mo.n_occ, reference.mo.n_mo())?;
            let (monomers, _) = pipeline.monomers(&reference, &space)?;
            let rec = pipeline.full_ci(&reference, &monomers, frozen_core)?;
            emit(&dir, "fci", &serde_json::to_value(rec)?)
        }
        Command::Qpe { geometry, m, t, ancilla, readout } => {
            let scan = pipeline.analyze_scan()?;
            let (space, _) = pipeline.active_space(&scan)?;
            let a = analysis_at(&scan, geometry.dr)?;
            let mut qcfg = pipeline.config.qpe_config(a.scf.energy);
            if let Some(t) = t {
                qcfg.t = t;
            }
            if let Some(n) = ancilla {
                qcfg.n_ancilla = n;
            }
            if let Some(r) = readout {
                qcfg.readout = r.parse()?;
            }
            let m = m.unwrap_or(qcfg.m_list[0]);
            qcfg.m_list = vec![m];
            qcfg.validate()?;
            let h = build_active_hamiltonian(&a.mo, &space)?;
            let q = pipeline.qubit_hamiltonian(&h);
            let state = pipeline.hf_state(&q, &space);
            let run = run_qpe(&q, &qcfg, m, &state)?;
            std::fs::create_dir_all(&dir)?;
            let dr = geometry.dr.unwrap_or(pipeline.config.scan.reference);
            std::fs::write(dir.join(format!("distribution_dr_{dr}_m_{m}.csv")), distribution_csv(&[(a.geometry.label.clone(), dr, &run.distribution)]))?;
            let e_casci = casci_energy(&h, space.n_alpha(), space.n_alpha())?.energy;
            let e = run.energy(qcfg.readout);
            let value = json!({
                "displacement": dr,
                "config": qcfg,
                "run": run,
                "energy": e,
                "e_casci": e_casci,
                "error": Energy::new(e - e_casci),
                "resources": estimate_resources(&q.with_offset(-a.scf.energy), m, qcfg.n_ancilla),
            });
            emit(&dir, "qpe", &value)
        }
        Command::Aem { geometry } => {
            let scan = pipeline.analyze_scan()?;
            let (space, _) = pipeline.active_space(&scan)?;
            let a = analysis_at(&scan, geometry.dr)?;
            let qcfg = pipeline.config.qpe_config(a.scf.energy);
            let h = build_active_hamiltonian(&a.mo, &space)?;
            let q = pipeline.qubit_hamiltonian(&h);
            let result = run_qpe_aem(&q, &qcfg, &pipeline.hf_state(&q, &space))?;
            let e_casci = casci_energy(&h, space.n_alpha(), space.n_alpha())?.energy;
            let value = json!({
                "displacement": geometry.dr.unwrap_or(pipeline.config.scan.reference),
                "e_casci": e_casci,
                "e_aem": result.fit(qcfg.readout).b,
                "error_max_prob": Energy::new(result.fit(Readout::MaxProb).b - e_casci),
                "error_wgt_ave": Energy::new(result.fit(Readout::WgtAve).b - e_casci),
                "fit_max_prob": result.fit_max_prob,
                "fit_wgt_ave": result.fit_wgt_ave,
            });
            emit(&dir, "aem", &value)
        }
        Command::Interact => {
            let (report, _) = pipeline.run()?;
            emit(
                &dir,
                "interact",
                &json!({
                    "interaction": report.interaction,
                    "size_consistency": report.size_consistency,
                    "monomers": report.monomers.iter().map(|m| json!({"label": m.label, "active_space": m.active_space, "e_hf": m.e_hf, "e_casci": m.e_casci, "e_aem": m.qpe.as_ref().map(|q| q.e_aem)})).collect::<Vec<_>>(),
                    "assignments": report.assignments,
                }),
            )
        }
        Command::Scan => {
            let (report, _) = pipeline.run()?;
            let rows: Vec<Value> = report
                .geometries
                .iter()
                .map(|g| {
                    json!({
                        "displacement": g.displacement,
                        "h_o_distance": g.h_o_distance,
                        "e_hf": g.system.e_hf,
                        "e_casci": g.system.e_casci,
                        "e_aem": g.system.qpe.as_ref().map(|q| q.e_aem),
                        "error_max_prob": g.system.qpe.as_ref().map(|q| q.error_max_prob),
                        "error_wgt_ave": g.system.qpe.as_ref().map(|q| q.error_wgt_ave),
                    })
                })
                .collect();
            emit(&dir, "scan", &json!({ "active_space": report.active_space, "geometries": rows }))
        }
        Command::Report => {
            let (report, artifacts) = pipeline.run()?;
            let files = write_run(&dir, &report, &artifacts)?;
            for f in files {
                print_line(&f.display().to_string())?;
            }
            Ok(())
        }
    }
}
