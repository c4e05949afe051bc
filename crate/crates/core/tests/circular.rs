use std::f64::consts::PI;

use anigrowth_core::angle::wrap_pi;
use anigrowth_core::circular::{extrinsic_mean, kappa_hat, resultant_length, von_mises_halfcircle_density, AngleSample, VonMises};
use anigrowth_core::special::{bessel_i0, bessel_i0e};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

fn angles() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-PI..PI, 2..60)
}

proptest! {
    #[test]
    fn resultant_is_rotation_invariant(v in angles(), c in -10.0..10.0f64) {
        let a = AngleSample::new(v.clone()).unwrap();
        let b = AngleSample::new(v.iter().map(|x| x + c).collect()).unwrap();
        let (ra, rb) = (resultant_length(&a), resultant_length(&b));
        prop_assert!((ra - rb).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&ra));
        if ra > 1e-6 {
            let shift = wrap_pi(extrinsic_mean(&b).unwrap() - extrinsic_mean(&a).unwrap() - c);
            prop_assert!(shift.abs() < 1e-9);
        }
    }

    #[test]
    fn mean_matches_grid_argmax(v in angles()) {
        let s = AngleSample::new(v.clone()).unwrap();
        prop_assume!(resultant_length(&s) > 1e-3);
        let score = |m: f64| v.iter().map(|x| (x - m).cos()).sum::<f64>();
        let step = 1e-4;
        let best = (0..(2.0 * PI / step) as usize)
            .map(|i| -PI + i as f64 * step)
            .max_by(|a, b| score(*a).total_cmp(&score(*b)))
            .unwrap();
        prop_assert!(wrap_pi(extrinsic_mean(&s).unwrap() - best).abs() <= step);
    }
}

#[test]
fn resultant_is_one_only_for_equal_angles() {
    let same = AngleSample::new(vec![0.4, 0.4 + 2.0 * PI, 0.4 - 4.0 * PI]).unwrap();
    assert!((resultant_length(&same) - 1.0).abs() < 1e-12);
    let spread = AngleSample::new(vec![0.4, 0.4 + 1e-4]).unwrap();
    assert!(resultant_length(&spread) < 1.0 - 1e-10);
}

#[test]
fn kappa_hat_is_monotone_within_each_branch() {
    // the three-branch approximation is continuous only up to a drop at 0.85
    for (lo, hi) in [(0, 530), (530, 850), (850, 999)] {
        let ks: Vec<f64> = (lo..hi).map(|i| kappa_hat(i as f64 * 1e-3).unwrap()).collect();
        assert!(ks.windows(2).all(|w| w[1] >= w[0]), "branch [{lo}, {hi})");
    }
    assert!(kappa_hat(0.53).unwrap() >= kappa_hat(0.529_999).unwrap());
}

#[test]
fn kappa_hat_branch_values() {
    let r: f64 = 0.3;
    assert!((kappa_hat(r).unwrap() - (2.0 * r + r.powi(3) + 5.0 / 6.0 * r.powi(5))).abs() < 1e-15);
    assert!((kappa_hat(0.7).unwrap() - (-0.4 + 1.39 * 0.7 + 0.43 / 0.3)).abs() < 1e-12);
    assert!((kappa_hat(0.9).unwrap() - 5.0).abs() < 1e-12);
    assert!(kappa_hat(1.0).is_err());
}

fn i0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..1000 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }
    sum
}

#[test]
fn bessel_matches_power_series() {
    for i in 0..=2000 {
        let k = i as f64 * 0.05;
        let want = i0_series(k);
        assert!(((bessel_i0(k).unwrap() - want) / want).abs() < 1e-10, "κ = {k}");
        assert!(((bessel_i0e(k).unwrap() - want * (-k).exp()) / (want * (-k).exp())).abs() < 1e-10, "κ = {k}");
    }
}

#[test]
fn halfcircle_density_has_unit_mass() {
    for kappa in [0.0, 0.5, 2.0, 10.0, 50.0] {
        let n = 40_000;
        let h = PI / n as f64;
        let mass: f64 = (0..n)
            .map(|i| von_mises_halfcircle_density(-PI / 2.0 + (i as f64 + 0.5) * h, 1.0, kappa).unwrap() * h)
            .sum::<f64>()
            / PI;
        assert!((mass - 1.0).abs() < 1e-8, "κ = {kappa}: {mass}");
    }
}

#[test]
fn von_mises_sampler_moments() {
    // E cos(θ − μ) = I₁(κ)/I₀(κ); for κ = 2 this is 0.697774657964
    let law = VonMises::new(0.7, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 200_000;
    let draws: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
    let c = draws.iter().map(|t| (t - 0.7).cos()).sum::<f64>() / n as f64;
    let s = draws.iter().map(|t| (t - 0.7).sin()).sum::<f64>() / n as f64;
    assert!((c - 0.697_774_657_964).abs() < 5e-3, "{c}");
    assert!(s.abs() < 5e-3);
    assert!(draws.iter().all(|t| (-PI..PI).contains(t)));
}
