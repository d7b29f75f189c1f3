//! Asymptotic covariance, standardization, and the quasi-likelihood ratio test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::EstimateResult;
use crate::filters::{Threshold, ThresholdConfig};
use crate::likelihood::{qll_joint, QllContext};
use crate::model::{LevyOuParams, ParamVector};
use crate::numeric::compensated_sum;
use crate::simulate::Path;

pub use crate::stats::{chi2_cdf, chi2_quantile};

/// Diagonal Fisher-type information of the Lévy-OU adaptive estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticInfo {
    /// (2/α², μ₂/α², 1/λ, λ/σ², λ/(2σ⁴)).
    pub k_diag: [f64; 5],
    pub mu2: f64,
}

impl AsymptoticInfo {
    /// √n for α, √(nh) for the rest.
    pub fn rates(n: usize, h: f64) -> [f64; 5] {
        let a = (n as f64).sqrt();
        let b = (n as f64 * h).sqrt();
        [a, b, b, b, b]
    }

    /// Asymptotic variances of the rate-scaled estimators, 1 / K_ii.
    pub fn variances(&self) -> [f64; 5] {
        self.k_diag.map(|k| 1.0 / k)
    }
}

pub fn asymptotic_covariance_levy_ou(theta0: &ParamVector, mu2: f64) -> Result<AsymptoticInfo> {
    let p = LevyOuParams::from_vector(theta0)?;
    if !(mu2 > 0.0 && mu2.is_finite()) {
        return Err(Error::InvalidParameter(format!("second moment must be positive, got {mu2}")));
    }
    if !(p.alpha > 0.0 && p.lambda > 0.0 && p.sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "asymptotic covariance needs alpha, lambda, sigma2 > 0, got {theta0}"
        )));
    }
    let a2 = p.alpha * p.alpha;
    let k_diag = [
        2.0 / a2,
        mu2 / a2,
        1.0 / p.lambda,
        p.lambda / p.sigma2,
        p.lambda / (2.0 * p.sigma2 * p.sigma2),
    ];
    Ok(AsymptoticInfo { k_diag, mu2 })
}

/// Time average n⁻¹ Σ_{i=0}^{n−1} X²_{t_i}.
pub fn estimate_mu2(path: &Path) -> Result<f64> {
    if path.dim() != 1 {
        return Err(Error::DimensionMismatch {
            what: "second-moment path dimension",
            expected: 1,
            got: path.dim(),
        });
    }
    let x = &path.values()[..path.n()];
    Ok(compensated_sum(x.iter().map(|v| v * v)) / path.n() as f64)
}

/// Rate-scaled, K-whitened deviations; asymptotically iid N(0, 1).
pub fn standardize(result: &EstimateResult, theta0: &ParamVector, info: &AsymptoticInfo, n: usize, h: f64) -> Result<[f64; 5]> {
    if result.theta_hat.len() != 5 || theta0.len() != 5 {
        return Err(Error::DimensionMismatch {
            what: "standardized parameter vector",
            expected: 5,
            got: result.theta_hat.len().min(theta0.len()),
        });
    }
    let rates = AsymptoticInfo::rates(n, h);
    let mut z = [0.0; 5];
    for (k, zk) in z.iter_mut().enumerate() {
        *zk = rates[k] * (result.theta_hat.get(k) - theta0.get(k)) * info.k_diag[k].sqrt();
    }
    Ok(z)
}

/// Λ = −2 (l(θ*) − l(θ)) with the joint likelihood at (th1_bar, th2_bar).
pub fn qlr_statistic(
    ctx: &QllContext<'_>,
    unconstrained: &ParamVector,
    constrained: &ParamVector,
    th1_bar: &Threshold,
    th2_bar: &Threshold,
) -> Result<f64> {
    let l_free = qll_joint(ctx, unconstrained, th1_bar, th2_bar)?;
    let l_null = qll_joint(ctx, constrained, th1_bar, th2_bar)?;
    Ok(-2.0 * (l_null - l_free))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub lambda_n: f64,
    pub df: u32,
    pub eps: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ThresholdConfig>,
}

/// Rejects when Λ strictly exceeds the upper `eps` point of χ²_df.
pub fn decide_test(lambda_n: f64, df: u32, eps: f64) -> Result<TestResult> {
    if lambda_n.is_nan() {
        return Err(Error::InvalidParameter("test statistic is NaN".into()));
    }
    let critical_value = chi2_quantile(eps, df)?;
    let p_value = (1.0 - chi2_cdf(lambda_n, df)?).clamp(0.0, 1.0);
    Ok(TestResult {
        lambda_n,
        df,
        eps,
        critical_value,
        p_value,
        reject: lambda_n > critical_value,
        thresholds: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::levy_ou_model;

    fn theta0() -> ParamVector {
        LevyOuParams::new(2.0, 2.5, 6.0, 0.0, 20.25).to_vector()
    }

    #[test]
    fn k_diag_values() {
        let info = asymptotic_covariance_levy_ou(&theta0(), 25.1).unwrap();
        assert_eq!(info.k_diag[0], 0.5);
        assert!((info.k_diag[1] - 25.1 / 4.0).abs() < 1e-15);
        assert!((info.k_diag[2] - 1.0 / 6.0).abs() < 1e-15);
        assert!((info.k_diag[3] - 0.296296296).abs() < 1e-8);
        assert!((info.k_diag[4] - 0.0073159579).abs() < 1e-9);
        let doubled = asymptotic_covariance_levy_ou(&theta0(), 50.2).unwrap();
        for k in [0, 2, 3, 4] {
            assert_eq!(info.k_diag[k], doubled.k_diag[k]);
        }
        assert!((doubled.k_diag[1] - 2.0 * info.k_diag[1]).abs() < 1e-12);
        let root2 = LevyOuParams::new(2f64.sqrt(), 2.5, 6.0, 0.0, 20.25).to_vector();
        let k0 = asymptotic_covariance_levy_ou(&root2, 1.0).unwrap().k_diag[0];
        assert!((k0 - 1.0).abs() < 1e-15);
        assert!(asymptotic_covariance_levy_ou(&theta0(), 0.0).is_err());
    }

    #[test]
    fn mu2_simple_paths() {
        let c = Path::from_values_1d(0.1, vec![1.5; 6]).unwrap();
        assert_eq!(estimate_mu2(&c).unwrap(), 2.25);
        let alt = Path::from_values_1d(0.1, vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(estimate_mu2(&alt).unwrap(), 1.0);
    }

    #[test]
    fn decision_boundaries() {
        let r = decide_test(0.0, 5, 0.05).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject);
        let cv = chi2_quantile(0.05, 5).unwrap();
        assert!(!decide_test(cv, 5, 0.05).unwrap().reject);
        let r = decide_test(20.0, 5, 0.05).unwrap();
        assert!(r.reject);
        assert!(r.p_value < 0.05);
    }

    #[test]
    fn qlr_of_identical_estimates_is_zero() {
        let model = levy_ou_model();
        let path = Path::from_values_1d(0.01, vec![1.0, 0.9, 0.95, 3.95]).unwrap();
        let ctx = QllContext::new(&model, &path).unwrap();
        let th = Threshold::unit(0.3).unwrap();
        let t = LevyOuParams::new(0.7906, 3.0387, 33.333, 3.0, 1.0).to_vector();
        assert_eq!(qlr_statistic(&ctx, &t, &t, &th, &th).unwrap(), 0.0);
    }
}
