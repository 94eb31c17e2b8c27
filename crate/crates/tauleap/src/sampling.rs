//! Inverse-CDF generation of reaction counts from uniforms.
//!
//! Everything here is an exact monotone inversion: the smallest x with
//! F(x) >= u. That map is what lets low-discrepancy uniforms carry their
//! structure through to the sampled counts.

use crate::math;
use crate::model::Mode;

/// Errors from the variate generators.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleError {
    /// Poisson mean must be >= 0.
    NegativeMean(f64),
    /// Uniform argument must lie strictly inside (0,1).
    UniformOutOfRange(f64),
}

impl core::fmt::Display for SampleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SampleError::NegativeMean(l) => write!(f, "negative Poisson mean {l}"),
            SampleError::UniformOutOfRange(u) => write!(f, "uniform {u} outside (0,1)"),
        }
    }
}

/// Ascending search is cheap enough below this mean; above it a quantile seed
/// plus local walk keeps the scan O(sqrt(lambda)).
const DIRECT_SUM_CUTOFF: f64 = 50.0;

/// Smallest integer x with P(Poisson(lambda) <= x) >= u, as f64 (exact for the
/// count magnitudes that arise here, far below 2^53).
pub fn poisson_inverse(lambda: f64, u: f64) -> Result<f64, SampleError> {
    if !(lambda >= 0.0) {
        return Err(SampleError::NegativeMean(lambda));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(SampleError::UniformOutOfRange(u));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    if lambda <= DIRECT_SUM_CUTOFF {
        // Bottom-up accumulation: p(0) = e^-lambda is representable here.
        let mut p = math::exp(-lambda);
        let mut cdf = p;
        let mut x = 0.0f64;
        while cdf < u {
            x += 1.0;
            p *= lambda / x;
            cdf += p;
            if p == 0.0 {
                // Far-tail underflow: the remaining mass is below resolution.
                break;
            }
        }
        return Ok(x);
    }
    Ok(poisson_inverse_large(lambda, u))
}

/// Large-mean path: seed near the u-quantile, evaluate the CDF there through
/// the regularized incomplete gamma function, then walk with the pmf
/// recurrence to the exact crossing.
fn poisson_inverse_large(lambda: f64, u: f64) -> f64 {
    let z = norminv_raw(u);
    let mut x = math::floor(lambda + math::sqrt(lambda) * z + 0.5);
    if x < 0.0 {
        x = 0.0;
    }
    // F(x) = Q(x+1, lambda) for the Poisson CDF.
    let mut cdf = reg_gamma_q(x + 1.0, lambda);
    let mut pmf = poisson_pmf(x, lambda);
    if cdf >= u {
        // Walk down while the predecessor still covers u.
        while x > 0.0 {
            let below = cdf - pmf;
            if below >= u {
                cdf = below;
                pmf *= x / lambda;
                x -= 1.0;
            } else {
                break;
            }
        }
        x
    } else {
        // Walk up until the CDF first reaches u.
        loop {
            x += 1.0;
            pmf *= lambda / x;
            cdf += pmf;
            if cdf >= u || pmf == 0.0 {
                return x;
            }
        }
    }
}

#[inline]
fn poisson_pmf(x: f64, lambda: f64) -> f64 {
    math::exp(x * math::ln(lambda) - lambda - math::lgamma(x + 1.0))
}

/// Standard normal CDF via the complementary error function.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * math::erfc(-z * core::f64::consts::FRAC_1_SQRT_2)
}

/// Inverse standard normal CDF; |Phi(result) - u| <= 1e-9.
pub fn normal_inverse(u: f64) -> Result<f64, SampleError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(SampleError::UniformOutOfRange(u));
    }
    let mut z = norminv_raw(u);
    // One Halley polish against the erfc-based CDF pins the residual far
    // below the 1e-9 contract.
    for _ in 0..2 {
        let e = normal_cdf(z) - u;
        let pdf = math::exp(-0.5 * z * z) * 0.3989422804014327;
        if pdf <= 0.0 {
            break;
        }
        let w = e / pdf;
        z -= w / (1.0 + 0.5 * z * w);
    }
    Ok(z)
}

/// Rational approximation to the normal quantile (absolute error ~1e-9),
/// used directly as the Poisson search seed and as the polish start.
fn norminv_raw(u: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if u < P_LOW {
        let q = math::sqrt(-2.0 * math::ln(u));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - P_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = math::sqrt(-2.0 * math::ln(1.0 - u));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).
///
/// Series for x < a+1, Lentz continued fraction otherwise; both converge well
/// past the ranges used here (a up to ~1e5).
pub fn reg_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if a <= 0.0 {
        return 0.0;
    }
    let lg = math::lgamma(a);
    let prefix = math::exp(a * math::ln(x) - x - lg);
    if x < a + 1.0 {
        // P by series, Q = 1 - P.
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if math::abs(term) < math::abs(sum) * 1e-16 {
                break;
            }
        }
        1.0 - prefix * sum
    } else {
        // Q by continued fraction (modified Lentz).
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if math::abs(d) < tiny {
                d = tiny;
            }
            c = b + an / c;
            if math::abs(c) < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if math::abs(del - 1.0) < 1e-16 {
                break;
            }
        }
        prefix * h
    }
}

/// Reaction count for one uniform: exact Poisson inversion in integer mode, a
/// moment-matched normal in real mode (may go negative).
#[inline]
pub fn count_variate(lambda: f64, u: f64, mode: Mode) -> Result<f64, SampleError> {
    match mode {
        Mode::Integer => poisson_inverse(lambda, u),
        Mode::Real => {
            if !(lambda >= 0.0) {
                return Err(SampleError::NegativeMean(lambda));
            }
            if lambda == 0.0 {
                return Ok(0.0);
            }
            Ok(lambda + math::sqrt(lambda) * normal_inverse(u)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    /// Brute-force CDF accumulation, log-seeded so it also works for means
    /// where e^-lambda underflows.
    fn poisson_inverse_oracle(lambda: f64, u: f64) -> f64 {
        if lambda == 0.0 {
            return 0.0;
        }
        let mut x;
        let mut p;
        if lambda <= 600.0 {
            x = 0.0;
            p = math::exp(-lambda);
        } else {
            // First index whose log-pmf is representable.
            x = math::floor(lambda - 12.0 * math::sqrt(lambda)).max(0.0);
            loop {
                let lp = x * math::ln(lambda) - lambda - math::lgamma(x + 1.0);
                if lp > -700.0 {
                    p = math::exp(lp);
                    break;
                }
                x += 1.0;
            }
        }
        let mut cdf = p;
        while cdf < u {
            x += 1.0;
            p *= lambda / x;
            cdf += p;
            if p == 0.0 {
                break;
            }
        }
        x
    }

    #[test]
    fn zero_mean_maps_to_zero() {
        for &u in &[1e-9, 0.3, 0.999999] {
            assert_eq!(poisson_inverse(0.0, u).unwrap(), 0.0);
        }
    }

    #[test]
    fn unit_mean_hand_value() {
        // F(0) = e^-1 = 0.3679 < 0.73 <= F(1) = 2e^-1 = 0.7358.
        assert_eq!(poisson_inverse(1.0, 0.73).unwrap(), 1.0);
        assert_eq!(poisson_inverse(1.0, 0.36).unwrap(), 0.0);
        assert_eq!(poisson_inverse(1.0, 0.74).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(poisson_inverse(-1.0, 0.5).is_err());
        assert!(poisson_inverse(1.0, 0.0).is_err());
        assert!(poisson_inverse(1.0, 1.0).is_err());
        assert!(normal_inverse(0.0).is_err());
        assert!(normal_inverse(1.0).is_err());
    }

    #[test]
    fn oracle_equivalence_across_means() {
        for &lambda in &[0.1, 1.0, 10.0, 1e3] {
            let mut rng = RngStream::new(1000 + lambda as u64);
            for _ in 0..10_000 {
                let u = rng.next_f64();
                let got = poisson_inverse(lambda, u).unwrap();
                let want = poisson_inverse_oracle(lambda, u);
                assert_eq!(got, want, "lambda={lambda} u={u}");
            }
        }
    }

    #[test]
    fn oracle_equivalence_large_mean() {
        let lambda = 9234.0;
        let mut rng = RngStream::new(77);
        for _ in 0..1000 {
            let u = rng.next_f64();
            let got = poisson_inverse(lambda, u).unwrap();
            let want = poisson_inverse_oracle(lambda, u);
            assert_eq!(got, want, "u={u}");
        }
    }

    #[test]
    fn monotone_in_u() {
        for &lambda in &[0.1, 1.0, 20.0, 1e3, 1e4] {
            let mut rng = RngStream::new(5 + lambda as u64);
            let mut us: alloc::vec::Vec<f64> = (0..10_000).map(|_| rng.next_f64()).collect();
            us.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut prev = -1.0;
            for &u in &us {
                let x = poisson_inverse(lambda, u).unwrap();
                assert!(x >= prev, "lambda={lambda}: x({u}) = {x} < {prev}");
                prev = x;
            }
        }
    }

    #[test]
    fn sample_mean_matches_poisson_mean() {
        for &lambda in &[1.0, 100.0] {
            let n = 1_000_000u64;
            let mut rng = RngStream::new(lambda as u64);
            let mut sum = 0.0;
            for _ in 0..n {
                sum += poisson_inverse(lambda, rng.next_f64()).unwrap();
            }
            let mean = sum / n as f64;
            let tol = 4.0 * math::sqrt(lambda / n as f64);
            assert!(
                (mean - lambda).abs() < tol,
                "lambda={lambda}: mean {mean} off by more than {tol}"
            );
        }
    }

    #[test]
    fn extreme_u_terminates() {
        let x = poisson_inverse(4.0, 1.0 - 1e-15).unwrap();
        assert!(x > 4.0 && x.is_finite());
        let x = poisson_inverse(4.0, 1e-15).unwrap();
        assert_eq!(x, 0.0);
        let x = poisson_inverse(5000.0, 1.0 - 1e-15).unwrap();
        assert!(x > 5000.0 && x.is_finite());
        let x = poisson_inverse(5000.0, 1e-15).unwrap();
        assert!(x < 5000.0);
    }

    #[test]
    fn normal_inverse_reference_points() {
        assert_eq!(normal_inverse(0.5).unwrap(), 0.0);
        let z = normal_inverse(0.975).unwrap();
        assert!((z - 1.959964).abs() < 1e-6, "z = {z}");
        // Bisection oracle on the erfc-based CDF.
        for &u in &[0.001, 0.023, 0.31, 0.5, 0.77, 0.992, 0.9999] {
            let mut lo = -10.0;
            let mut hi = 10.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if normal_cdf(mid) < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let want = 0.5 * (lo + hi);
            let got = normal_inverse(u).unwrap();
            assert!((got - want).abs() < 1e-8, "u={u}: {got} vs {want}");
        }
    }

    #[test]
    fn normal_inverse_is_symmetric_and_accurate() {
        let mut u = 0.01;
        while u < 0.50 {
            let a = normal_inverse(u).unwrap();
            let b = normal_inverse(1.0 - u).unwrap();
            assert!((a + b).abs() < 1e-9, "asymmetry at u={u}");
            assert!((normal_cdf(a) - u).abs() < 1e-9, "residual at u={u}");
            u += 0.01;
        }
    }

    #[test]
    fn normal_inverse_strictly_increasing() {
        let mut prev = f64::NEG_INFINITY;
        let mut u = 1e-6;
        while u < 1.0 {
            let z = normal_inverse(u).unwrap();
            assert!(z > prev, "not increasing at u={u}");
            prev = z;
            u += 1e-3;
        }
    }

    #[test]
    fn count_variate_modes() {
        assert_eq!(count_variate(4.0, 0.5, Mode::Real).unwrap(), 4.0);
        assert_eq!(count_variate(0.0, 0.9, Mode::Real).unwrap(), 0.0);
        assert_eq!(
            count_variate(4.0, 0.7, Mode::Integer).unwrap(),
            poisson_inverse(4.0, 0.7).unwrap()
        );
        // Real mode can go negative in the lower tail.
        assert!(count_variate(1.0, 1e-6, Mode::Real).unwrap() < 0.0);
    }

    #[test]
    fn reg_gamma_q_reference_values() {
        // Q(1, x) = e^-x.
        for &x in &[0.1, 1.0, 5.0, 30.0] {
            assert!((reg_gamma_q(1.0, x) - math::exp(-x)).abs() < 1e-13);
        }
        // Q(a, 0) = 1.
        assert_eq!(reg_gamma_q(3.0, 0.0), 1.0);
        // Poisson CDF identity at a knife-edge-free point: F_lambda(x) = Q(x+1, lambda).
        let lambda = 100.0;
        let mut p = math::exp(-lambda);
        let mut cdf = p;
        for x in 0..110 {
            let q = reg_gamma_q(x as f64 + 1.0, lambda);
            assert!(
                (q - cdf).abs() < 1e-12,
                "x={x}: gamma {q} vs summed {cdf}"
            );
            p *= lambda / (x as f64 + 1.0);
            cdf += p;
        }
    }
}
