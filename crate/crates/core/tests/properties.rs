use num_complex::Complex64;
use proptest::prelude::*;

use gauge_lab::dynamics::{cross_gauge_check, evolve, EvolutionConfig};
use gauge_lab::expr::{Bindings, Expr, Var};
use gauge_lab::fields::{
    classify_gauge_function, reconstruct_gauge, same_fields, GaugeClass, GaugeFunction, PotentialPair,
};
use gauge_lab::gauge_engine::apply_gauge_unitary;
use gauge_lab::hamiltonian::{assemble, predicted_shift, spectrum};
use gauge_lab::lattice::{inner_product, Grid, Wavefunction};
use gauge_lab::model::{Model, PhysicalParams};

fn consts() -> Bindings {
    Bindings::new().with("k", 0.1).with("w", 1.0).with("m", 1.0)
}

fn coeff() -> impl Strategy<Value = f64> {
    (-20i32..=20).prop_map(|c| c as f64 / 10.0)
}

/// Source text of a random expression in x, t and the constant k.
fn expr_src() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("t".to_string()),
        Just("k".to_string()),
        coeff().prop_map(|c| format!("({c})")),
    ];
    leaf.prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            (inner.clone(), 1i32..=3).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.prop_map(|a| format!("exp(0.3 * sin({a}))")),
        ]
    })
}

/// Random polynomial `Σ c x^i t^j` with `i ≤ 3`, `j ≤ 2`.
fn poly_src() -> impl Strategy<Value = String> {
    prop::collection::vec((coeff(), 0i32..=3, 0i32..=2), 1..=5).prop_map(|terms| {
        terms
            .iter()
            .map(|(c, i, j)| format!("({c})*x^{i}*t^{j}"))
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

fn parse(s: &str) -> Expr {
    Expr::parse(s).unwrap()
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-1.5f64..1.5, -1.5f64..1.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn derivative_matches_central_difference(src in expr_src(), (x, t) in point()) {
        let e = parse(&src);
        let c = consts();
        let step = 1e-5;
        let fd_x = (e.evaluate_at(x + step, t, &c).unwrap() - e.evaluate_at(x - step, t, &c).unwrap()) / (2.0 * step);
        let fd_t = (e.evaluate_at(x, t + step, &c).unwrap() - e.evaluate_at(x, t - step, &c).unwrap()) / (2.0 * step);
        let dx = e.differentiate(Var::X).evaluate_at(x, t, &c).unwrap();
        let dt = e.differentiate(Var::T).evaluate_at(x, t, &c).unwrap();
        prop_assert!((dx - fd_x).abs() <= 1e-6 * dx.abs().max(1.0), "{src}: d/dx {dx} vs {fd_x}");
        prop_assert!((dt - fd_t).abs() <= 1e-6 * dt.abs().max(1.0), "{src}: d/dt {dt} vs {fd_t}");
    }

    #[test]
    fn simplify_preserves_value_and_is_idempotent(src in expr_src(), (x, t) in point()) {
        let e = parse(&src);
        let s = e.simplify();
        let c = consts();
        let before = e.evaluate_at(x, t, &c).unwrap();
        let after = s.evaluate_at(x, t, &c).unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0), "{src}: {before} vs {after}");
        prop_assert_eq!(s.simplify(), s);
    }

    #[test]
    fn rendered_form_reparses_to_same_value(src in expr_src(), (x, t) in point()) {
        let e = parse(&src).simplify();
        let again = parse(&e.to_string());
        let c = consts();
        let a = e.evaluate_at(x, t, &c).unwrap();
        let b = again.evaluate_at(x, t, &c).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn fields_are_gauge_invariant(chi in expr_src(), phi in poly_src(), a in poly_src()) {
        let p = PotentialPair::parse(&phi, &a).unwrap();
        let q = p.gauge_transform(&parse(&chi));
        prop_assert!(same_fields(&p, &q, &consts()).unwrap().is_zero, "chi = {chi}");
    }

    #[test]
    fn successive_transforms_compose_additively(c1 in expr_src(), c2 in expr_src(), (x, t) in point()) {
        let p = PotentialPair::parse("0.5*x^2", "0.2*x*t").unwrap();
        let (chi1, chi2) = (parse(&c1), parse(&c2));
        let twice = p.gauge_transform(&chi1).gauge_transform(&chi2);
        let once = p.gauge_transform(&Expr::add([chi1, chi2]));
        let c = consts();
        for (u, v) in [(&twice.phi, &once.phi), (&twice.a, &once.a)] {
            let (u, v) = (u.evaluate_at(x, t, &c).unwrap(), v.evaluate_at(x, t, &c).unwrap());
            prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
        }
    }

    #[test]
    fn space_function_plus_linear_time_is_invariant(f in poly_src(), k in coeff()) {
        // Keep only the x-dependent part so that f is a function of x alone.
        let f = parse(&f).substitute("t", &Expr::constant(0.7));
        let chi = Expr::add([f, Expr::mul([Expr::constant(k), Expr::var(Var::T)])]);
        let c = classify_gauge_function(&chi, &consts()).unwrap();
        prop_assert_eq!(c.class, GaugeClass::Invariant, "{}", chi);
    }

    #[test]
    fn time_polynomial_is_separable(f in poly_src(), g in poly_src()) {
        let f = parse(&f).substitute("t", &Expr::constant(0.0));
        let g = parse(&g).substitute("x", &Expr::constant(0.0));
        let chi = Expr::add([f, g]);
        let c = classify_gauge_function(&chi, &consts()).unwrap();
        prop_assert!(c.class.is_separable(), "{}", chi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn reconstruction_recovers_gauge_function(src in poly_src()) {
        let grid = Grid::new(-2.0, 2.0, 100).unwrap();
        let times = [0.0, 0.5, 1.0];
        let base = PotentialPair::parse("0.5*x^2 + cos(t)", "0.3*sin(x)*t").unwrap();
        let chi = parse(&src);
        let c = consts();
        let r = reconstruct_gauge(&base, &base.gauge_transform(&chi), &grid, &times, &c).unwrap();
        let dev = r.max_deviation(|x, t| chi.evaluate_at(x, t, &c)).unwrap();
        prop_assert!(dev < 1e-8, "{src}: {dev}");
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(
        c1 in -3.0f64..3.0, s1 in 0.3f64..2.0, k1 in -2.0f64..2.0,
        c2 in -3.0f64..3.0, s2 in 0.3f64..2.0, k2 in -2.0f64..2.0,
    ) {
        let grid = Grid::new(-10.0, 10.0, 200).unwrap();
        let a = Wavefunction::gaussian(grid, 0.0, c1, s1, k1).unwrap();
        let b = Wavefunction::gaussian(grid, 0.0, c2, s2, k2).unwrap();
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-14);
        prop_assert!(inner_product(&a, &a).unwrap().im.abs() < 1e-15);
    }

    #[test]
    fn gauge_unitary_preserves_inner_products(chi in expr_src(), c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
        let grid = Grid::new(-10.0, 10.0, 200).unwrap();
        let model = Model::new(grid, PhysicalParams::default()).unwrap().with_constants(&consts());
        let a = Wavefunction::gaussian(grid, 0.5, c1, 1.0, 0.7).unwrap();
        let b = Wavefunction::gaussian(grid, 0.5, c2, 0.8, -0.3).unwrap();
        let chi = parse(&chi);
        let ua = apply_gauge_unitary(&model, &a, &chi).unwrap();
        let ub = apply_gauge_unitary(&model, &b, &chi).unwrap();
        let before = inner_product(&a, &b).unwrap();
        let after = inner_product(&ua, &ub).unwrap();
        prop_assert!((before - after).norm() < 1e-12);
        prop_assert!((ua.norm() - a.norm()).abs() < 1e-12);
    }

    #[test]
    fn crank_nicolson_conserves_norm(
        center in -2.0f64..2.0, sigma in 0.5f64..1.5, k0 in -2.0f64..2.0,
        phi in poly_src(), a in poly_src(),
    ) {
        let grid = Grid::new(-10.0, 10.0, 128).unwrap();
        let model = Model::new(grid, PhysicalParams::default()).unwrap();
        // Damp the polynomial potentials so they stay moderate on the whole grid.
        let p = PotentialPair::parse(&format!("({phi})*exp(-x^2/20)"), &format!("({a})*exp(-x^2/20)")).unwrap();
        let psi = Wavefunction::gaussian(grid, 0.0, center, sigma, k0).unwrap();
        let cfg = EvolutionConfig { dt: 0.01, steps: 50, record_every: 50 };
        let tr = evolve(&model, &psi, &p, &cfg).unwrap();
        prop_assert!(tr.max_norm_drift < 1e-12, "drift {}", tr.max_norm_drift);
        prop_assert!((tr.last().norm() - psi.norm()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn spectrum_shift_matches_prediction(f in poly_src(), g in poly_src(), t in 0.0f64..2.0) {
        let grid = Grid::new(-8.0, 8.0, 96).unwrap();
        let model = Model::new(grid, PhysicalParams::default()).unwrap().with_constants(&consts());
        let f = parse(&f).substitute("t", &Expr::constant(0.0));
        let g = parse(&g).substitute("x", &Expr::constant(0.0));
        let chi = Expr::add([Expr::mul([Expr::constant(0.1), f]), g]);
        let gauge = GaugeFunction::new(chi.clone(), model.constants()).unwrap();
        let shift = predicted_shift(&model, &gauge, t).unwrap();
        let p = PotentialPair::parse("0.5*x^2", "0").unwrap();
        let e0 = spectrum(&assemble(&model, &p, t).unwrap(), 6).unwrap().eigenvalues;
        let e1 = spectrum(&assemble(&model, &p.gauge_transform(&chi), t).unwrap(), 6).unwrap().eigenvalues;
        for (a, b) in e0.iter().zip(&e1) {
            prop_assert!((b - a - shift).abs() < 1e-9, "{chi}: {a} -> {b}, shift {shift}");
        }
    }
}

/// Cross-gauge mismatch of Crank-Nicolson shrinks as dt².
#[test]
fn cross_gauge_error_is_second_order_in_dt() {
    let grid = Grid::new(-10.0, 10.0, 256).unwrap();
    let model = Model::new(grid, PhysicalParams::default()).unwrap();
    let psi = Wavefunction::gaussian(grid, 0.0, 0.0, 1.0, 0.5).unwrap();
    let p = PotentialPair::parse("0.5*x^2", "0").unwrap();
    let chi = GaugeFunction::parse("2*t^3", &Bindings::new()).unwrap();
    let err = |dt: f64, steps| {
        let cfg = EvolutionConfig { dt, steps, record_every: steps };
        cross_gauge_check(&model, &psi, &p, &chi, &cfg).unwrap().l2_distance
    };
    let coarse = err(0.02, 50);
    let fine = err(0.01, 100);
    let ratio = coarse / fine;
    assert!((ratio - 4.0).abs() < 0.6, "{coarse:e} / {fine:e} = {ratio}");
}

#[test]
fn gauge_phase_of_zero_is_identity() {
    let grid = Grid::new(-5.0, 5.0, 64).unwrap();
    let model = Model::new(grid, PhysicalParams::default()).unwrap();
    let psi = Wavefunction::from_fn(grid, 0.0, |x| Complex64::new((-x * x).exp(), 0.1 * x)).unwrap();
    let out = apply_gauge_unitary(&model, &psi, &Expr::zero()).unwrap();
    assert_eq!(out.amplitudes(), psi.amplitudes());
}
