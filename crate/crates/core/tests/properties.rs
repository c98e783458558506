use std::f64::consts::TAU;

use nalgebra::Matrix2;
use num_complex::Complex64;
use proptest::prelude::*;

use tanglebound::bound::{
    certify_decomposition, ghz_w_mixture, noisy_ghz_fidelity, BoundProblem, Decomposition, LegendreSolver, SearchSpace,
};
use tanglebound::charcurve::{restricted_bound_analytic, tau3_closed_form, z_state, GhzwPoint};
use tanglebound::envelope::{envelope_eval, lower_convex_envelope, SampledCurve};
use tanglebound::qstate::{apply_local_unitary, three_tangle, Measure, PureState};

fn state() -> impl Strategy<Value = PureState> {
    prop::array::uniform16(-1.0f64..1.0)
        .prop_filter("nonzero", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|a| PureState::normalized(std::array::from_fn(|i| Complex64::new(a[2 * i], a[2 * i + 1]))).unwrap())
}

fn unitary() -> impl Strategy<Value = Matrix2<Complex64>> {
    prop::array::uniform4(0.0f64..TAU).prop_map(|[t, a, b, g]| {
        let e = |x: f64| Complex64::from_polar(1.0, x);
        Matrix2::new(e(a) * t.cos(), -e(b) * t.sin(), e(g - b) * t.sin(), e(g - a) * t.cos())
    })
}

fn curve() -> impl Strategy<Value = SampledCurve> {
    prop::collection::vec((0.001f64..1.0, -5.0f64..5.0), 2..40).prop_map(|steps| {
        let mut x = 0.0;
        let (xs, ys): (Vec<f64>, Vec<f64>) = steps
            .into_iter()
            .map(|(dx, y)| {
                x += dx;
                (x, y)
            })
            .unzip();
        SampledCurve::new(xs, ys).unwrap()
    })
}

proptest! {
    #[test]
    fn tangle_in_unit_interval(s in state()) {
        let t = three_tangle(&s);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&t.tau3));
        prop_assert!((t.tau3_sq - t.tau3 * t.tau3).abs() < 1e-14);
    }

    #[test]
    fn tangle_is_permutation_invariant(s in state()) {
        let t = three_tangle(&s).tau3;
        for perm in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            prop_assert!((three_tangle(&s.permute_qubits(perm).unwrap()).tau3 - t).abs() < 1e-12);
        }
    }

    #[test]
    fn tangle_is_local_unitary_invariant(s in state(), a in unitary(), b in unitary(), c in unitary()) {
        let rotated = apply_local_unitary(&s, &a, &b, &c).unwrap();
        prop_assert!((three_tangle(&rotated).tau3 - three_tangle(&s).tau3).abs() < 1e-10);
    }

    #[test]
    fn closed_form_on_the_ghz_w_family(q in 0.0f64..=1.0, phi in 0.0f64..TAU) {
        let point = GhzwPoint::new(q, phi).unwrap();
        prop_assert!((three_tangle(&z_state(point)).tau3 - tau3_closed_form(point)).abs() < 1e-12);
    }

    #[test]
    fn envelope_is_convex_dominated_and_idempotent(c in curve()) {
        let env = lower_convex_envelope(&c);
        let values = env.values();
        for (e, y) in values.iter().zip(c.ys()) {
            prop_assert!(*e <= *y + 1e-12);
        }
        let xs = c.xs();
        for i in 1..xs.len() - 1 {
            let chord = values[i - 1] + (values[i + 1] - values[i - 1]) * (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
            prop_assert!(values[i] <= chord + 1e-9);
        }
        let again = lower_convex_envelope(&env.as_curve()).values();
        for (a, b) in values.iter().zip(&again) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        // evaluation at the samples reproduces the sampled hull
        for (x, e) in c.points().map(|(x, _)| x).zip(&values) {
            prop_assert!((envelope_eval(&env, x).unwrap() - e).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_averaged_decompositions_bound_the_roof_from_above(q in 0.0f64..=1.0, phi in 0.0f64..TAU) {
        // three equally weighted phases cancel the GHZ-W coherences
        let states: Vec<PureState> = (0..3).map(|k| z_state(GhzwPoint::new(q, phi + TAU * k as f64 / 3.0).unwrap())).collect();
        let dec = Decomposition::new(vec![1.0 / 3.0; 3], states).unwrap();
        let cert = certify_decomposition(&dec, &ghz_w_mixture(q), Measure::Tau3);
        prop_assert!(cert.valid, "residual {}", cert.residual);
        prop_assert!(cert.upper_bound >= restricted_bound_analytic(q).unwrap() - 1e-9);
    }

    #[test]
    fn noisy_ghz_fidelity_is_affine(gamma in 0.0f64..=1.0) {
        prop_assert!((noisy_ghz_fidelity(gamma).unwrap() - (1.0 + 7.0 * gamma) / 8.0).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn skew_degrades_the_bound(p in 0.6f64..=1.0) {
        let eps = |omega: f64| {
            let problem = BoundProblem::skew(omega, p, Measure::Tau3, SearchSpace::ghz_w_span()).unwrap();
            LegendreSolver::new(&problem).unwrap().solve(problem.measured()).unwrap().epsilon
        };
        let (none, plus, minus) = (eps(0.0), eps(1.0), eps(-1.0));
        prop_assert!(plus <= none + 1e-6, "omega = 1: {plus} > {none}");
        prop_assert!(minus <= plus + 1e-6, "omega = -1: {minus} > {plus}");
    }

    #[test]
    fn identity_shift_leaves_the_bound_unchanged(p in 0.5f64..=1.0, c in -2.0f64..2.0) {
        let base = BoundProblem::projector(
            &tanglebound::qstate::NamedState::Ghz.state(), 0.5, p, Measure::Tau3, SearchSpace::ghz_w_span(),
        ).unwrap();
        let shifted = BoundProblem::new(
            vec![base.witnesses()[0].shifted(c)],
            vec![base.measured()[0] + c],
            Measure::Tau3,
            SearchSpace::ghz_w_span(),
            base.settings().clone(),
        ).unwrap();
        let solve = |pr: &BoundProblem| LegendreSolver::new(pr).unwrap().solve(pr.measured()).unwrap().epsilon;
        prop_assert!((solve(&base) - solve(&shifted)).abs() <= base.settings().outer_tolerance);
    }
}
