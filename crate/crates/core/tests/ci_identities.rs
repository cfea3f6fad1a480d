use hbqpe::ci::{casci_energy, casci_orbital_exclusion_scan, davidson, fci_davidson, reference_energy, DavidsonOptions};
use hbqpe::hamiltonian::build_active_hamiltonian;
use hbqpe::integrals::{sto3g, water_dimer, STO3G_TEXT};
use hbqpe::localize::BoysOptions;
use hbqpe::mointegrals::{ao_to_mo, ActiveSpace};
use hbqpe::scf::ScfOptions;
use hbqpe::workflow::stages::{analyze, GeometryAnalysis, StageOptions};
use hbqpe::Error;

fn analyzed(atoms: &[usize]) -> GeometryAnalysis {
    let basis = sto3g();
    let scf = ScfOptions::default();
    let boys = BoysOptions::default();
    let opts = StageOptions {
        basis: &basis,
        basis_text: STO3G_TEXT,
        scf: &scf,
        boys: &boys,
        cache_dir: None,
    };
    let g = water_dimer().subset(atoms, "fragment").unwrap();
    analyze(&g, &opts, None).unwrap()
}

fn tight() -> DavidsonOptions {
    DavidsonOptions {
        residual_tolerance: 1e-9,
        ..DavidsonOptions::default()
    }
}

#[test]
fn occupied_only_active_space_reproduces_rhf() {
    let a = analyzed(&[0, 1, 2]);
    let mo = &a.mo;
    let space = ActiveSpace::new(vec![2, 3, 4], mo.n_occ, mo.n_mo()).unwrap();
    let h = build_active_hamiltonian(mo, &space).unwrap();
    let e = casci_energy(&h, 3, 3).unwrap().energy;
    assert!((e - a.scf.energy).abs() < 1e-9, "{e} vs {}", a.scf.energy);
}

#[test]
fn hf_determinant_expectation_is_the_scf_energy() {
    let a = analyzed(&[0, 1, 2, 3, 4, 5]);
    let mo = &a.mo;
    let space = ActiveSpace::new((mo.n_core..mo.n_mo()).collect(), mo.n_occ, mo.n_mo()).unwrap();
    let h = build_active_hamiltonian(mo, &space).unwrap();
    let n = space.n_alpha();
    let e_ref = reference_energy(&h, n, n).unwrap();
    assert!((e_ref - a.scf.energy).abs() < 1e-9, "{e_ref} vs {}", a.scf.energy);
    assert!((mo.hf_energy() - a.scf.energy).abs() < 1e-9);
}

#[test]
fn monomer_davidson_matches_dense_in_both_core_treatments() {
    let a = analyzed(&[3, 4, 5]);
    let mo = &a.mo;
    for frozen in [vec![], vec![0]] {
        let space = ActiveSpace::new((frozen.len()..mo.n_mo()).collect(), mo.n_occ, mo.n_mo()).unwrap();
        let h = build_active_hamiltonian(mo, &space).unwrap();
        let n = space.n_alpha();
        let dense = casci_energy(&h, n, n).unwrap();
        let iterative = davidson(&h, n, n, &tight()).unwrap();
        let expected_dim = if frozen.is_empty() { 441 } else { 225 };
        assert_eq!(iterative.dimension, expected_dim);
        assert!((dense.energy - iterative.energy).abs() < 1e-9, "{} vs {}", dense.energy, iterative.energy);
    }
}

#[test]
fn full_ci_is_invariant_to_the_orbital_basis() {
    let a = analyzed(&[0, 1, 2]);
    let canonical = ao_to_mo(&a.ints, &a.scf.c, a.scf.eps.clone(), a.mo.n_core, a.mo.n_occ).unwrap();
    let boys = fci_davidson(&a.mo, &[], 5, 5, &tight()).unwrap().energy;
    let canon = fci_davidson(&canonical, &[], 5, 5, &tight()).unwrap().energy;
    assert!((boys - canon).abs() < 1e-8, "{boys} vs {canon}");
    assert!(boys < a.scf.energy);
}

#[test]
fn exclusion_scan_edge_cases() {
    let a = analyzed(&[0, 1, 2]);
    let mo = &a.mo;
    let base = ActiveSpace::new((mo.n_core..mo.n_mo()).collect(), mo.n_occ, mo.n_mo()).unwrap();
    let h = build_active_hamiltonian(mo, &base).unwrap();
    let n = base.n_alpha();
    let full = casci_energy(&h, n, n).unwrap().energy;
    assert!(matches!(casci_orbital_exclusion_scan(mo, &base, 0, full), Err(Error::AlreadyFrozen(1))));
    let occupied = casci_orbital_exclusion_scan(mo, &base, 2, full).unwrap();
    let virtual_ = casci_orbital_exclusion_scan(mo, &base, 6, full).unwrap();
    for p in [occupied, virtual_] {
        assert!(p.energy >= full - 1e-10);
        assert!((p.abs_difference - (p.energy - full).abs()).abs() < 1e-14);
    }
}
