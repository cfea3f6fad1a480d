use hbqpe::integrals::{compute_ao_integrals, sto3g, water_dimer};
use hbqpe::scf::{run_rhf, ScfOptions};
use hbqpe::units::to_kcal;

fn rhf(atoms: &[usize]) -> f64 {
    let g = water_dimer().subset(atoms, "fragment").unwrap();
    let ints = compute_ao_integrals(&g, &sto3g()).unwrap();
    run_rhf(&ints, g.n_electrons() as usize, &ScfOptions::default()).unwrap().energy
}

#[test]
fn dimer_and_monomer_energies() {
    let dimer = rhf(&[0, 1, 2, 3, 4, 5]);
    let acceptor = rhf(&[0, 1, 2]);
    let donor = rhf(&[3, 4, 5]);
    assert!((dimer + 149.935138497).abs() < 2e-6, "{dimer}");
    assert!((acceptor + 74.962843567).abs() < 2e-6, "{acceptor}");
    assert!((donor + 74.963208737).abs() < 2e-6, "{donor}");
    let e_int = to_kcal(dimer - acceptor - donor);
    assert!((e_int + 5.7017).abs() < 0.005, "{e_int}");
}

#[test]
fn energy_is_translation_invariant() {
    let g = water_dimer();
    let a = compute_ao_integrals(&g, &sto3g()).unwrap();
    let b = compute_ao_integrals(&g.translated([2.0, -1.0, 0.5]), &sto3g()).unwrap();
    let ea = run_rhf(&a, 20, &ScfOptions::default()).unwrap().energy;
    let eb = run_rhf(&b, 20, &ScfOptions::default()).unwrap().energy;
    assert!((ea - eb).abs() < 1e-10, "{ea} {eb}");
}
