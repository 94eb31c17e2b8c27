//! Efficiency metrics for estimator comparisons: the fitted variance decay
//! rate, the variance reduction factor, and its work-normalized variant.

use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("rate fit needs at least 3 pairs, got {0}")]
    InsufficientData(usize),
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
}

/// Least-squares fit of log2 variance against log2 n, summarizing a variance
/// series as Var = kappa * n^(-beta_hat).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub beta_hat: f64,
    pub kappa: f64,
    /// Coefficient of determination of the log-log fit.
    pub r2: f64,
}

/// Fits the decay rate of a variance series. Order of the pairs is
/// irrelevant. Every pair must have n >= 1 and variance > 0.
pub fn fit_beta(pairs: &[(u64, f64)]) -> Result<FitResult, MetricsError> {
    if pairs.len() < 3 {
        return Err(MetricsError::InsufficientData(pairs.len()));
    }
    for &(n, var) in pairs {
        if n == 0 {
            return Err(MetricsError::NonPositive {
                what: "n",
                value: 0.0,
            });
        }
        if !(var > 0.0 && var.is_finite()) {
            return Err(MetricsError::NonPositive {
                what: "variance",
                value: var,
            });
        }
    }

    let xs: Vec<f64> = pairs.iter().map(|&(n, _)| (n as f64).log2()).collect();
    let ys: Vec<f64> = pairs.iter().map(|&(_, v)| v.log2()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(MetricsError::NonPositive {
            what: "spread of n values",
            value: 0.0,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;

    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };

    Ok(FitResult {
        beta_hat: -slope,
        kappa: intercept.exp2(),
        r2,
    })
}

/// Variance reduction factor against plain MC at matched path count:
/// per-run MC variance divided by n times the replicate variance.
pub fn vrf(mc_var_per_run: f64, n: u64, var_mu_hat: f64) -> Result<f64, MetricsError> {
    check_positive("mc_var_per_run", mc_var_per_run)?;
    check_positive("var_mu_hat", var_mu_hat)?;
    if n == 0 {
        return Err(MetricsError::NonPositive {
            what: "n",
            value: 0.0,
        });
    }
    Ok(mc_var_per_run / (n as f64 * var_mu_hat))
}

/// Work-normalized variance reduction: VRF scaled by the CPU-time ratio at
/// equal path count.
pub fn eif(vrf: f64, mc_time: f64, method_time: f64) -> Result<f64, MetricsError> {
    check_positive("vrf", vrf)?;
    check_positive("mc_time", mc_time)?;
    check_positive("method_time", method_time)?;
    Ok(vrf * mc_time / method_time)
}

fn check_positive(what: &'static str, value: f64) -> Result<(), MetricsError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(MetricsError::NonPositive { what, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric_series(c: f64, beta: f64) -> Vec<(u64, f64)> {
        (10..=16)
            .map(|k| {
                let n = 1u64 << k;
                (n, c * (n as f64).powf(-beta))
            })
            .collect()
    }

    #[test]
    fn exact_mc_rate() {
        let fit = fit_beta(&geometric_series(107.8, 1.0)).unwrap();
        assert!((fit.beta_hat - 1.0).abs() < 1e-12);
        assert!((fit.kappa - 107.8).abs() < 1e-9);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_quadratic_rate() {
        let fit = fit_beta(&geometric_series(3.0, 2.0)).unwrap();
        assert!((fit.beta_hat - 2.0).abs() < 1e-12);
    }

    #[test]
    fn measured_lattice_series_rate() {
        // Empirical 7-point log2 variance series for the two-species
        // isomerization model with lattice + shift, n = 2^13..2^19.
        let log2_vars: [f64; 7] = [
            -16.340588574087693,
            -17.741717596128925,
            -19.598164279319864,
            -21.64858120492211,
            -22.95924957640198,
            -25.20985723049743,
            -27.013037523077085,
        ];
        let pairs: Vec<(u64, f64)> = log2_vars
            .iter()
            .enumerate()
            .map(|(i, &lv)| (1u64 << (13 + i), lv.exp2()))
            .collect();
        let fit = fit_beta(&pairs).unwrap();
        assert!(
            (fit.beta_hat - 1.80).abs() <= 0.02,
            "beta_hat {:.4}",
            fit.beta_hat
        );
        assert!(fit.r2 > 0.99);
    }

    #[test]
    fn fit_ignores_pair_order() {
        let mut pairs = geometric_series(5.0, 1.5);
        let fwd = fit_beta(&pairs).unwrap();
        pairs.reverse();
        pairs.swap(0, 3);
        let shuffled = fit_beta(&pairs).unwrap();
        assert_eq!(fwd, shuffled);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert_eq!(
            fit_beta(&[(1024, 1.0), (2048, 0.5)]),
            Err(MetricsError::InsufficientData(2))
        );
        assert!(matches!(
            fit_beta(&[(1024, 1.0), (2048, 0.0), (4096, 0.25)]),
            Err(MetricsError::NonPositive { .. })
        ));
        assert!(matches!(
            fit_beta(&[(1024, 1.0), (1024, 1.0), (1024, 1.0)]),
            Err(MetricsError::NonPositive { .. })
        ));
    }

    #[test]
    fn vrf_parity_and_scaling() {
        let mc_var = 107.8;
        let n = 1u64 << 19;
        assert!((vrf(mc_var, n, mc_var / n as f64).unwrap() - 1.0).abs() < 1e-12);

        let target = 27_844.0;
        let var_mu_hat = mc_var / (n as f64 * target);
        assert!((vrf(mc_var, n, var_mu_hat).unwrap() - target).abs() / target < 1e-12);

        let v1 = vrf(mc_var, n, 1e-7).unwrap();
        let v2 = vrf(mc_var, n, 2e-7).unwrap();
        assert!((v1 / v2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eif_scales_by_time_ratio() {
        assert!((eif(100.0, 2.0, 2.0).unwrap() - 100.0).abs() < 1e-12);
        assert!((eif(100.0, 1.0, 2.0).unwrap() - 50.0).abs() < 1e-12);
        let got = eif(27_844.0, 14_900.0, 27_844.0).unwrap();
        assert!((got - 14_900.0).abs() / 14_900.0 < 1e-12);
    }

    #[test]
    fn errors_on_nonpositive_inputs() {
        assert!(vrf(0.0, 10, 1.0).is_err());
        assert!(vrf(1.0, 0, 1.0).is_err());
        assert!(vrf(1.0, 10, f64::NAN).is_err());
        assert!(eif(1.0, 0.0, 1.0).is_err());
        assert!(eif(-1.0, 1.0, 1.0).is_err());
    }
}
