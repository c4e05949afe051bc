use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::special::kolmogorov_sf;

use super::{check_alpha, TestId, TestReport};

fn sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(invalid("Kolmogorov-Smirnov test needs non-empty samples"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("Kolmogorov-Smirnov sample contains a non-finite value"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample statistic `sup_x |F̂₁(x) − F̂₂(x)|` over right-continuous ECDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        // consume every tie at x before comparing
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic p-value with the effective-size correction
/// `(√nₑ + 0.12 + 0.11/√nₑ) D`, `nₑ = n₁n₂/(n₁+n₂)`.
pub fn ks_p_value(d: f64, n1: usize, n2: usize) -> f64 {
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let s = libm::sqrt(ne);
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// Rejects equality of the `τ̂` and reference distributions when `p < α`.
pub fn test_tau_ks(tau_hat: &[f64], tau_ref: &[f64], alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let d = ks_statistic(tau_hat, tau_ref)?;
    let p = ks_p_value(d, tau_hat.len(), tau_ref.len());
    let mut report = TestReport::new(TestId::TauKs, d, alpha, p < alpha, alpha)
        .with("n_sample", tau_hat.len() as f64)
        .with("n_reference", tau_ref.len() as f64);
    report.p_value = Some(p);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [0.1, 0.4, 0.2, 0.9, 0.4];
        let r = test_tau_ks(&a, &a, 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(!r.rejects());
        assert_eq!(r.p_value, Some(1.0));
    }

    #[test]
    fn disjoint_supports() {
        let a: Vec<f64> = (0..100).map(|k| k as f64).collect();
        let b: Vec<f64> = (0..100).map(|k| 1000.0 + k as f64).collect();
        let r = test_tau_ks(&a, &b, 0.05).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.rejects());
    }

    #[test]
    fn ties_are_consumed_together() {
        // ECDFs: a jumps 0 → 1 at 0, b jumps 0 → 1/2 at 0, 1/2 → 1 at 1
        assert!((ks_statistic(&[0.0, 0.0], &[0.0, 1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(ks_statistic(&[], &[1.0]).is_err());
        assert!(ks_statistic(&[f64::NAN], &[1.0]).is_err());
    }
}
