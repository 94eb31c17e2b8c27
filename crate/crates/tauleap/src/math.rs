//! Float math shims. `erfc` and `lgamma` always come from `libm` (std has
//! neither); the elementary functions use std intrinsics when available.

#[cfg(feature = "std")]
mod imp {
    #[inline(always)]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline(always)]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline(always)]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline(always)]
    pub fn floor(x: f64) -> f64 {
        x.floor()
    }
    #[inline(always)]
    pub fn ceil(x: f64) -> f64 {
        x.ceil()
    }
    #[inline(always)]
    pub fn round(x: f64) -> f64 {
        x.round()
    }
    #[inline(always)]
    pub fn abs(x: f64) -> f64 {
        x.abs()
    }
    #[inline(always)]
    pub fn powf(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline(always)]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline(always)]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline(always)]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline(always)]
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    #[inline(always)]
    pub fn ceil(x: f64) -> f64 {
        libm::ceil(x)
    }
    #[inline(always)]
    pub fn round(x: f64) -> f64 {
        libm::round(x)
    }
    #[inline(always)]
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    #[inline(always)]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
}

pub use imp::{abs, ceil, exp, floor, ln, powf, round, sqrt};

/// Complementary error function.
#[inline(always)]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Natural log of the absolute value of the gamma function.
#[inline(always)]
pub fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// x^p for small non-negative integer exponents, by repeated multiplication.
#[inline]
pub fn powi(x: f64, p: u32) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// Fractional part mapped to [0, 1).
#[inline(always)]
pub fn frac(x: f64) -> f64 {
    let f = x - floor(x);
    // Rounding can push x - floor(x) to exactly 1.0 for x just below an integer.
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_powf() {
        for &x in &[0.0, 0.5, 1.0, 2.0, 3.7, 10.0] {
            for p in 0..8u32 {
                let want = powf(x, p as f64);
                let got = powi(x, p);
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{x}^{p}");
            }
        }
    }

    #[test]
    fn frac_stays_in_unit_interval() {
        for &x in &[-2.75, -1.0, -0.25, 0.0, 0.25, 1.0, 7.999999999, 1e9 + 0.5] {
            let f = frac(x);
            assert!((0.0..1.0).contains(&f), "frac({x}) = {f}");
        }
    }

    #[test]
    fn erfc_reference_points() {
        // erfc(0) = 1, erfc(1) = 0.157299207050285..., erfc(-1) = 2 - erfc(1).
        assert!((erfc(0.0) - 1.0).abs() < 1e-15);
        assert!((erfc(1.0) - 0.15729920705028513).abs() < 1e-14);
        assert!((erfc(-1.0) + erfc(1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lgamma_factorials() {
        // lgamma(n+1) = ln(n!).
        let mut lnfact = 0.0;
        for n in 1..20u32 {
            lnfact += ln(n as f64);
            assert!((lgamma(n as f64 + 1.0) - lnfact).abs() < 1e-10 * lnfact.max(1.0));
        }
    }
}
