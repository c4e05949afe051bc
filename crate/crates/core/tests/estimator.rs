use std::f64::consts::PI;

use anigrowth_core::angle::wrap_pi;
use anigrowth_core::estimator::{estimate_observed, update_beta, update_gamma, update_lambda, update_tau};
use anigrowth_core::{center_pattern, distance_functional, estimate, Coordinates, GrowthParams, MatchedPair, MinutiaPattern, SolverConfig};
use num_complex::Complex64;
use proptest::prelude::*;

fn pattern_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-150.0..150.0f64, -150.0..150.0f64), 5..30)
        .prop_filter("non-collinear", |xy| !MinutiaPattern::from_xy(xy, 1, 0).unwrap().is_collinear())
}

fn params_strategy() -> impl Strategy<Value = GrowthParams> {
    (-PI / 2.0..PI / 2.0, -PI..PI, 0.02..0.5f64, 0.5..2.0f64)
        .prop_map(|(g, b, t, l)| GrowthParams::new(g, b, t, l).unwrap())
}

fn grown_pair(xy: &[(f64, f64)], truth: &GrowthParams, jitter: f64) -> MatchedPair {
    let z = MinutiaPattern::from_xy(xy, 1, 0).unwrap().centered();
    let q: Vec<Complex64> = z
        .points()
        .iter()
        .enumerate()
        .map(|(j, &p)| truth.apply(p) + jitter * Complex64::new((j as f64 * 1.7).sin(), (j as f64 * 2.3).cos()))
        .collect();
    MatchedPair::new(z, MinutiaPattern::new(q, 1, 1).unwrap()).unwrap()
}

/// `F` evaluated directly from its definition, independent of the solver's moments.
fn objective_by_definition(pair: &MatchedPair, p: &GrowthParams) -> f64 {
    let u = Complex64::cis(2.0 * p.gamma);
    let r = Complex64::cis(p.beta);
    pair.template
        .points()
        .iter()
        .zip(pair.query.points())
        .map(|(&z, &q)| {
            let w = z + 0.5 * p.tau * (z + u * z.conj());
            (q - p.lambda * r * w).norm_sqr()
        })
        .sum()
}

proptest! {
    #[test]
    fn centering_is_idempotent(xy in pattern_strategy()) {
        let once = center_pattern(&MinutiaPattern::from_xy(&xy, 1, 0).unwrap());
        let twice = center_pattern(&once);
        prop_assert_eq!(once.points(), twice.points());
        prop_assert!(once.mean().norm() < 1e-9);
    }

    #[test]
    fn centering_commutes_with_rotation(xy in pattern_strategy(), phi in -PI..PI) {
        let p = MinutiaPattern::from_xy(&xy, 1, 0).unwrap();
        let rot = Complex64::cis(phi);
        let a = p.centered().map(|z| rot * z);
        let b = p.map(|z| rot * z).centered();
        for (x, y) in a.points().iter().zip(b.points()) {
            prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
        }
    }

    #[test]
    fn functional_matches_definition(xy in pattern_strategy(), truth in params_strategy(), probe in params_strategy()) {
        let pair = grown_pair(&xy, &truth, 2.0);
        let f = distance_functional(&pair, &probe);
        let g = objective_by_definition(&pair, &probe);
        prop_assert!((f - g).abs() <= 1e-9 * g.max(1.0));
    }

    #[test]
    fn noise_free_recovery(xy in pattern_strategy(), truth in params_strategy()) {
        let est = estimate(&grown_pair(&xy, &truth, 0.0), &SolverConfig::default()).unwrap();
        prop_assume!(est.converged);
        let p = est.params;
        prop_assert!(wrap_pi(2.0 * (p.gamma - truth.gamma)).abs() < 2e-6);
        prop_assert!(wrap_pi(p.beta - truth.beta).abs() < 1e-6);
        prop_assert!((p.tau - truth.tau).abs() < 1e-6);
        prop_assert!((p.lambda - truth.lambda).abs() < 1e-6);
    }

    #[test]
    fn rotating_the_query_shifts_beta(xy in pattern_strategy(), truth in params_strategy(), phi in -1.0..1.0f64) {
        let pair = grown_pair(&xy, &truth, 3.0);
        let rot = Complex64::cis(phi);
        let turned = MatchedPair::new(pair.template.clone(), pair.query.map(|z| rot * z)).unwrap();
        let solver = SolverConfig::default();
        let a = estimate(&pair, &solver).unwrap();
        let b = estimate(&turned, &solver).unwrap();
        prop_assume!(a.converged && b.converged);
        prop_assert!(wrap_pi(b.params.beta - a.params.beta - phi).abs() < 1e-8);
        prop_assert!(wrap_pi(2.0 * (b.params.gamma - a.params.gamma)).abs() < 1e-8);
        prop_assert!((b.params.tau - a.params.tau).abs() < 1e-8);
        prop_assert!((b.params.lambda - a.params.lambda).abs() < 1e-8);
        prop_assert!((b.objective - a.objective).abs() <= 1e-6 * a.objective.max(1.0));
    }

    #[test]
    fn scaling_the_query_scales_lambda(xy in pattern_strategy(), truth in params_strategy(), s in 0.5..3.0f64) {
        let pair = grown_pair(&xy, &truth, 3.0);
        let scaled = MatchedPair::new(pair.template.clone(), pair.query.map(|z| s * z)).unwrap();
        let solver = SolverConfig::default();
        let a = estimate(&pair, &solver).unwrap();
        let b = estimate(&scaled, &solver).unwrap();
        prop_assume!(a.converged && b.converged);
        prop_assert!((b.params.lambda - s * a.params.lambda).abs() < 1e-8 * s);
        prop_assert!(wrap_pi(2.0 * (b.params.gamma - a.params.gamma)).abs() < 1e-8);
        prop_assert!(wrap_pi(b.params.beta - a.params.beta).abs() < 1e-8);
        prop_assert!((b.params.tau - a.params.tau).abs() < 1e-8);
        prop_assert!(b.params.tau >= 0.0 && (0.0..PI).contains(&b.params.gamma));
    }

    #[test]
    fn every_update_descends(xy in pattern_strategy(), truth in params_strategy()) {
        let pair = grown_pair(&xy, &truth, 5.0);
        let mut worst: f64 = f64::NEG_INFINITY;
        let mut observer = |_: usize, before: f64, after: f64| worst = worst.max(after - before - 1e-10 * before.max(1.0));
        estimate_observed(&pair, &SolverConfig::default(), Some(&mut observer)).unwrap();
        prop_assert!(worst <= 0.0);
    }

    #[test]
    fn conditional_updates_beat_perturbations(xy in pattern_strategy(), truth in params_strategy(), start in params_strategy(), h in 1e-3..1e-1f64) {
        let pair = grown_pair(&xy, &truth, 4.0).centered();
        let c = Coordinates {
            axis: Complex64::cis(2.0 * start.gamma),
            rotation: Complex64::cis(start.beta),
            tau: start.tau,
            lambda: start.lambda,
        };
        let f = |c: &Coordinates| anigrowth_core::estimator::distance_at(&pair, c);
        let no_worse = |at: &Coordinates, other: Coordinates| {
            let v = f(&other);
            f(at) <= v + 1e-10 * v.max(1.0)
        };

        let rot = update_beta(&pair, &c).unwrap();
        let at = Coordinates { rotation: rot, ..c };
        for d in [-h, h] {
            prop_assert!(no_worse(&at, Coordinates { rotation: rot * Complex64::cis(d), ..c }), "update is not a conditional minimum");
        }
        let axis = update_gamma(&pair, &c).unwrap();
        let at = Coordinates { axis, ..c };
        for d in [-h, h] {
            prop_assert!(no_worse(&at, Coordinates { axis: axis * Complex64::cis(d), ..c }), "update is not a conditional minimum");
        }
        let lambda = update_lambda(&pair, &c).unwrap();
        let at = Coordinates { lambda, ..c };
        prop_assert!(no_worse(&at, Coordinates { lambda: lambda + h, ..c }), "update is not a conditional minimum");
        if lambda > h {
            prop_assert!(no_worse(&at, Coordinates { lambda: lambda - h, ..c }), "update is not a conditional minimum");
        }
        let tau = update_tau(&pair, &c).unwrap();
        let at = Coordinates { tau, ..c };
        prop_assert!(no_worse(&at, Coordinates { tau: tau + h, ..c }), "update is not a conditional minimum");
        if tau > h {
            prop_assert!(no_worse(&at, Coordinates { tau: tau - h, ..c }), "update is not a conditional minimum");
        }
    }
}

#[test]
fn identity_pairs_estimate_identity() {
    let xy = [(10.0, 3.0), (-20.0, 15.0), (4.0, -30.0), (25.0, 22.0), (-13.0, -9.0)];
    let z = MinutiaPattern::from_xy(&xy, 1, 0).unwrap();
    let est = estimate(&MatchedPair::new(z.clone(), z).unwrap(), &SolverConfig::default()).unwrap();
    assert!(est.params.beta.abs() < 1e-9);
    assert!((est.params.lambda - 1.0).abs() < 1e-9);
    assert!(est.params.tau < 1e-9);
}
