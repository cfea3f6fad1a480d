use hbqpe::mointegrals::select_active;
use hbqpe::units::to_kcal;
use hbqpe::workflow::{Config, Pipeline};
use hbqpe::Error;

#[test]
fn mp2_selection_over_the_scan() {
    let pipeline = Pipeline::new(Config::default()).unwrap();
    let scan = pipeline.analyze_scan().unwrap();
    let reference = scan.reference();
    let tables: Vec<_> = scan.analyses.iter().map(|a| a.mp2.orbitalwise.clone()).collect();
    let exc = &reference.mp2.excitationwise;
    let (n_core, n_occ) = (reference.mo.n_core, reference.mo.n_occ);

    let (space, report) = select_active(&tables, exc, n_core, n_occ, 0.5, 0.6).unwrap();
    assert_eq!(space.one_based(), vec![6, 7, 14]);
    assert_eq!(report.label, "(4e,3o)");
    assert_eq!(report.step1, vec![6, 7]);

    let row7 = report.variations.iter().find(|v| v.orbital == 7).unwrap();
    assert!((row7.max_kcal - 2.288).abs() < 0.05, "{row7:?}");
    assert!((row7.min_kcal - 1.273).abs() < 0.05, "{row7:?}");
    assert!((row7.difference_kcal - 1.015).abs() < 0.05, "{row7:?}");
    let row6 = report.variations.iter().find(|v| v.orbital == 6).unwrap();
    assert!((row6.difference_kcal - 0.639).abs() < 0.05, "{row6:?}");

    // A looser step-2 threshold pulls in the acceptor σ* pair as well.
    let (wide, _) = select_active(&tables, exc, n_core, n_occ, 0.5, 0.5).unwrap();
    assert_eq!(wide.one_based(), vec![6, 7, 11, 12, 14]);
    assert_eq!(wide.label(), "(4e,5o)");

    assert!(matches!(select_active(&tables, exc, n_core, n_occ, f64::INFINITY, 0.6), Err(Error::EmptySelection)));

    let e714 = to_kcal(exc[(6, 13)].abs());
    assert!((e714 - 0.58).abs() < 0.05, "{e714}");
    for p in n_core..exc.nrows() {
        let partial: f64 = if p < n_occ { exc.row(p).sum() } else { exc.column(p).sum() };
        assert!((partial - reference.mp2.orbitalwise[p]).abs() < 1e-10);
    }
}
