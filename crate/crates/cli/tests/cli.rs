use std::path::Path;
use std::process::{Command, Output};

fn hbqpe(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbqpe"))
        .args(["--out", out.to_str().unwrap()])
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[qpe]\nancillas = 7\n").unwrap();
    let out = hbqpe(&["--config", cfg.to_str().unwrap(), "scf"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ancillas"));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = hbqpe(&["--config", "/nonexistent/run.toml", "scf"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scf_reports_rhf_energies() {
    let dir = tempfile::tempdir().unwrap();
    let out = hbqpe(&["scf"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let e1 = v["monomer_1"]["energy"].as_f64().unwrap();
    assert!((e1 + 74.962844).abs() < 1e-5, "{e1}");
    let e_int = v["interaction"]["kcal_mol"].as_f64().unwrap();
    assert!((e_int + 5.7017).abs() < 0.005, "{e_int}");
    assert!(dir.path().join("scf.json").exists());
}

#[test]
fn hamiltonian_exports_fcidump_and_validates_displacement() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("active.fcidump");
    let out = hbqpe(&["hamiltonian", "--delta", "0.01", "--export-fcidump", dump.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["fermionic_terms"], 150);
    assert_eq!(v["active_space"], "(4e,3o)");
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.contains("NORB=3") && text.contains("NELEC=4"));

    let bad = hbqpe(&["hamiltonian", "--dr", "0.3"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn qpe_rejects_unknown_readout() {
    let dir = tempfile::tempdir().unwrap();
    let out = hbqpe(&["qpe", "--readout", "median"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
