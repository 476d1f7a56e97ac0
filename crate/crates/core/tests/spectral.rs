use std::f64::consts::TAU;

use proptest::prelude::*;
use wdlab_core::{Field, Grid, Ops};

fn ops(n: usize, length: f64) -> Ops {
    Ops::new(Grid::new(n, length).unwrap())
}

fn field(values: &[f64]) -> Field {
    Field::new(values.to_vec()).unwrap()
}

fn diff(a: &Field, b: &Field) -> f64 {
    (a - b).max_abs()
}

/// Round-off budget for applying an operator whose largest symbol is
/// `symbol` to data of size `scale`.
fn conditioned(symbol: f64, scale: f64) -> f64 {
    64.0 * f64::EPSILON * symbol.max(1.0) * scale.max(1.0)
}

fn largest_symbol(ops: &Ops) -> f64 {
    let k = ops.grid().wavenumber(ops.n() / 2);
    1.0 + k * k
}

type Op<'a> = dyn Fn(&Field) -> Field + 'a;

fn sizes() -> impl Strategy<Value = (usize, f64)> {
    (prop::sample::select(vec![16usize, 32, 64, 128]), 0.5f64..8.0)
}

fn samples(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn sized_fields() -> impl Strategy<Value = (usize, f64, Vec<f64>, Vec<f64>)> {
    sizes().prop_flat_map(|(n, l)| (Just(n), Just(l), samples(n), samples(n)))
}

#[test]
fn derivative_error_decays_spectrally() {
    let error = |n: usize| {
        let length = 2.0;
        let w = TAU / length;
        let ops = ops(n, length);
        let f = Field::from_fn(ops.grid(), |x| (w * x).sin().exp());
        let exact = Field::from_fn(ops.grid(), |x| w * (w * x).cos() * (w * x).sin().exp());
        diff(&ops.dx(&f), &exact)
    };
    assert!(error(64) <= 1e-6 * error(16), "{} vs {}", error(64), error(16));
}

#[test]
fn second_derivative_is_first_twice_on_resolved_data() {
    let ops = ops(64, 3.0);
    let w = TAU / 3.0;
    let f = Field::from_fn(ops.grid(), |x| (w * x).sin() + 0.2 * (5.0 * w * x).cos());
    let twice = ops.dx(&ops.dx(&f));
    assert!(diff(&ops.derivative(&f, 2).unwrap(), &twice) <= 1e-11);
    let thrice = ops.dx(&twice);
    assert!(diff(&ops.derivative(&f, 3).unwrap(), &thrice) <= 1e-10);
}

#[test]
fn translate_then_back_is_identity() {
    let ops = ops(64, 1.0);
    let f = Field::from_fn(ops.grid(), |x| (TAU * x).cos() + 0.3 * (3.0 * TAU * x).sin());
    assert!(diff(&ops.translate(&ops.translate(&f, 0.137), -0.137), &f) <= 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivatives_annihilate_constants(c in -10.0f64..10.0, (n, l) in sizes()) {
        let ops = ops(n, l);
        for order in 1..=3 {
            prop_assert_eq!(ops.derivative(&Field::constant(n, c), order).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn derivative_has_zero_mean((n, l, a, _) in sized_fields()) {
        let ops = ops(n, l);
        prop_assert!(ops.mean(&ops.dx(&field(&a))).abs() <= 1e-13 * ops.dx(&field(&a)).max_abs().max(1.0));
    }

    #[test]
    fn operators_are_linear((n, l, a, b) in sized_fields(), alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let ops = ops(n, l);
        let (f, g) = (field(&a), field(&b));
        let combo = f.scaled(alpha).add_scaled(beta, &g);
        let scale = conditioned(largest_symbol(&ops), 4.0);
        let cases: [(&str, &Op); 6] = [
            ("dx", &|x| ops.dx(x)),
            ("helmholtz", &|x| ops.helmholtz_inverse(x)),
            ("apply helmholtz", &|x| ops.apply_helmholtz(x)),
            ("mu helmholtz", &|x| ops.mu_helmholtz_inverse(x)),
            ("apply neg laplacian", &|x| ops.apply_neg_laplacian(x)),
            ("dealias", &|x| ops.dealias(x)),
        ];
        for (name, op) in cases {
            let lhs = op(&combo);
            let rhs = op(&f).scaled(alpha).add_scaled(beta, &op(&g));
            prop_assert!(diff(&lhs, &rhs) <= scale, "{name}: {}", diff(&lhs, &rhs));
        }
    }

    #[test]
    fn inversions_round_trip_within_conditioning((n, l, a, _) in sized_fields(), gauge in -2.0f64..2.0) {
        let ops = ops(n, l);
        let m = field(&a);
        let symbol = largest_symbol(&ops);
        let back = ops.apply_helmholtz(&ops.helmholtz_inverse(&m));
        prop_assert!(diff(&back, &m) <= conditioned(symbol, 1.0));
        let back = ops.apply_mu_helmholtz(&ops.mu_helmholtz_inverse(&m));
        prop_assert!(diff(&back, &m) <= conditioned(symbol, 1.0));
        let mean = ops.mean(&m);
        let m0 = m.map(|x| x - mean);
        let v = ops.neg_laplacian_inverse(&m0, gauge).unwrap();
        prop_assert!(diff(&ops.apply_neg_laplacian(&v), &m0) <= conditioned(symbol, v.max_abs()));
        prop_assert!((ops.mean(&v) - gauge).abs() <= 1e-13 * gauge.abs().max(1.0));
    }

    #[test]
    fn small_grids_meet_the_absolute_round_trip_bound(a in samples(64), gauge in -1.0f64..1.0) {
        let ops = ops(64, TAU);
        let m = field(&a);
        prop_assert!(diff(&ops.apply_helmholtz(&ops.helmholtz_inverse(&m)), &m) <= 1e-11);
        prop_assert!(diff(&ops.apply_mu_helmholtz(&ops.mu_helmholtz_inverse(&m)), &m) <= 1e-11);
        let mean = ops.mean(&m);
        let m0 = m.map(|x| x - mean);
        let v = ops.neg_laplacian_inverse(&m0, gauge).unwrap();
        prop_assert!(diff(&ops.apply_neg_laplacian(&v), &m0) <= 1e-11);
    }

    #[test]
    fn dealias_is_idempotent((n, l, a, _) in sized_fields()) {
        let ops = ops(n, l);
        let once = ops.dealias(&field(&a));
        prop_assert!(diff(&ops.dealias(&once), &once) <= 1e-15);
    }
}
