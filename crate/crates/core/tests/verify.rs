use std::f64::consts::TAU;

use wdlab_core::verify::{
    blowup_correspondence_experiment, convergence_study, equivalence_experiment, hs_oracle_experiment,
    reverse_experiment, BlowupCase, DecayClass,
};
use wdlab_core::{Case, Equation, Field, Grid, HsData, Kappa, MKind, Series};

fn case(spec: Equation, times: &[f64]) -> Case {
    let grid = Grid::new(64, TAU).unwrap();
    Case {
        grid,
        v0: Series::smooth().sample(&grid),
        sigma0: Some(Field::from_fn(&grid, |x| 0.3 * x.cos())),
        spec,
        check_times: times.to_vec(),
        dt: 1e-3,
        tolerance: 1e-8,
    }
}

#[test]
fn both_directions_agree_for_every_kind() {
    for mkind in MKind::ALL {
        for kappa in [Kappa::Plus, Kappa::Minus] {
            let spec = Equation::b_family(mkind, 2.0, kappa, 0.5).unwrap();
            let forward = equivalence_experiment(&case(spec, &[0.25, 0.5])).unwrap();
            assert!(forward.verdict.passed(), "{mkind:?} {kappa:?}: {}", forward.max_error());
            let reverse = reverse_experiment(&case(spec, &[0.2, 0.4])).unwrap();
            assert!(reverse.verdict.passed(), "{mkind:?} {kappa:?}: {}", reverse.max_error());
        }
    }
    let novikov = equivalence_experiment(&case(Equation::novikov(0.5).unwrap(), &[0.25, 0.5])).unwrap();
    assert!(novikov.verdict.passed());
}

#[test]
fn equivalence_error_is_time_discretization_only() {
    let spec = Equation::camassa_holm(0.5).unwrap();
    let coarse = equivalence_experiment(&Case { dt: 4e-3, ..case(spec, &[0.5]) }).unwrap();
    let fine = equivalence_experiment(&Case { dt: 2e-3, ..case(spec, &[0.5]) }).unwrap();
    assert!(fine.max_error() < coarse.max_error() / 8.0, "{} vs {}", fine.max_error(), coarse.max_error());
}

#[test]
fn smooth_data_converges_spectrally() {
    let spec = Equation::camassa_holm(0.5).unwrap();
    let report = convergence_study(&Series::smooth(), None, &spec, TAU, 0.25, &[64, 128], 1e-3).unwrap();
    assert!(report.verdict.passed());
    assert_eq!(report.classification, DecayClass::Spectral);
}

#[test]
fn hs_solver_tracks_the_closed_form() {
    let grid = Grid::unit(128).unwrap();
    let v0x = Field::from_fn(&grid, |x| (TAU * x).cos() + 0.5 * (2.0 * TAU * x).sin());
    let rho0 = Field::from_fn(&grid, |x| 1.5 + 0.3 * (TAU * x).sin());
    let data = HsData::normalized(v0x, rho0, Kappa::Plus, 0.4, grid).unwrap();
    let report = hs_oracle_experiment(&data, &[0.0, 0.25], 1e-3, 1e-5).unwrap();
    assert!(report.verdict.passed(), "{}", report.max_error());
}

#[test]
fn blowup_times_follow_the_existence_map() {
    let grid = Grid::unit(128).unwrap();
    let blowup = |lambda: f64| BlowupCase {
        grid,
        v0: Field::from_fn(&grid, |x| 6.0 * (TAU * x).sin() / TAU),
        sigma0: Some(Field::constant(128, 1.0)),
        spec: Equation::b_family(MKind::NegLaplacian, 2.0, Kappa::Minus, lambda).unwrap(),
        dt: 5e-4,
        reference_horizon: 3.0,
    };
    let probe = blowup_correspondence_experiment(&blowup(0.1)).unwrap();
    let s = probe.s_measured.expect("steep data breaks");
    let report = blowup_correspondence_experiment(&blowup(0.5 / s)).unwrap();
    assert!(report.verdict.passed(), "{report:?}");
    assert!(report.relative_mismatch.unwrap() <= 0.1);
}
