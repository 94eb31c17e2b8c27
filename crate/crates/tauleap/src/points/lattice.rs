//! Rank-1 lattice rules, the weighted squared discrepancy used to rate them,
//! and a greedy component-by-component search for generating vectors.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::PointsError;

const PI: f64 = core::f64::consts::PI;

/// Rank-1 lattice: point i, coordinate j is `(i * a_j mod n) / n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeRule {
    n: u64,
    a: Vec<u64>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl LatticeRule {
    /// Validates the generating vector: first component 1, every component in
    /// [1, n) and coprime with n. `n = 1` is the degenerate single-point rule.
    pub fn new(n: u64, a: Vec<u64>) -> Result<Self, PointsError> {
        if n == 0 {
            return Err(PointsError::BadLattice("n must be positive".into()));
        }
        if a.is_empty() {
            return Err(PointsError::BadLattice(
                "generating vector must be nonempty".into(),
            ));
        }
        if a[0] != 1 {
            return Err(PointsError::BadLattice(format!(
                "first component must be 1, got {}",
                a[0]
            )));
        }
        if n > 1 {
            for (j, &aj) in a.iter().enumerate() {
                if aj == 0 || aj >= n {
                    return Err(PointsError::BadLattice(format!(
                        "component {j} = {aj} outside [1, {n})"
                    )));
                }
                if gcd(aj, n) != 1 {
                    return Err(PointsError::BadLattice(format!(
                        "component {j} = {aj} shares a factor with n = {n}"
                    )));
                }
            }
        }
        Ok(LatticeRule { n, a })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn generating_vector(&self) -> &[u64] {
        &self.a
    }

    /// Unrandomized coordinate in [0, 1).
    #[inline]
    pub fn coordinate(&self, i: u64, j: usize) -> f64 {
        let r = (i % self.n) * self.a[j] % self.n;
        r as f64 / self.n as f64
    }
}

/// Order-dependent weights for the discrepancy: a coordinate subset of
/// cardinality c carries weight rho^c, which factors as rho per dimension in
/// the product form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightsSpec {
    pub rho: f64,
    /// Smoothness of the figure of merit; only 2 is implemented.
    pub alpha: u32,
}

impl WeightsSpec {
    pub fn new(rho: f64) -> Result<Self, PointsError> {
        if !(rho > 0.0 && rho <= 1.0 && rho.is_finite()) {
            return Err(PointsError::BadParameter(format!(
                "rho must be in (0, 1], got {rho}"
            )));
        }
        Ok(WeightsSpec { rho, alpha: 2 })
    }

    fn validate(&self) -> Result<(), PointsError> {
        if self.alpha != 2 {
            return Err(PointsError::BadParameter(format!(
                "alpha {} not supported (only 2)",
                self.alpha
            )));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0 && self.rho.is_finite()) {
            return Err(PointsError::BadParameter(format!(
                "rho must be in (0, 1], got {}",
                self.rho
            )));
        }
        Ok(())
    }
}

impl Default for WeightsSpec {
    fn default() -> Self {
        WeightsSpec {
            rho: 0.6,
            alpha: 2,
        }
    }
}

/// Bernoulli-polynomial kernel for alpha = 2: `2 pi^2 (u^2 - u + 1/6)`.
#[inline]
fn phi(u: f64) -> f64 {
    2.0 * PI * PI * (u * u - u + 1.0 / 6.0)
}

/// Kernel table over the residues r/n, r = 0..n.
fn phi_table(n: u64) -> Vec<f64> {
    let inv = 1.0 / n as f64;
    (0..n).map(|r| phi(r as f64 * inv)).collect()
}

/// Weighted squared discrepancy of a lattice rule.
///
/// `D^2 = (1/n) sum_i [ prod_j (1 + rho * phi(u_ij)) - 1 ]`, which expands to
/// the subset sum `sum_{u != empty} rho^|u| (1/n) sum_i prod_{j in u} phi`.
pub fn p_alpha_discrepancy(rule: &LatticeRule, weights: &WeightsSpec) -> Result<f64, PointsError> {
    weights.validate()?;
    let n = rule.n;
    let rho = weights.rho;
    let table = phi_table(n);
    let mut prod = vec![1.0f64; n as usize];
    for &aj in rule.a.iter() {
        let step = aj as usize;
        let n_us = n as usize;
        let mut r = 0usize;
        for p in prod.iter_mut() {
            *p *= 1.0 + rho * table[r];
            r += step;
            if r >= n_us {
                r -= n_us;
            }
        }
    }
    let mut acc = 0.0;
    for &p in &prod {
        acc += p - 1.0;
    }
    Ok(acc / n as f64)
}

/// Greedy component-by-component search minimizing the weighted discrepancy.
///
/// The first component is fixed at 1; each later component scans the odd
/// integers coprime with n and keeps the smallest score, breaking ties toward
/// the smallest candidate. Deterministic for given (n, s_dim, weights).
pub fn lattice_search(
    n: u64,
    s_dim: usize,
    weights: &WeightsSpec,
) -> Result<LatticeRule, PointsError> {
    weights.validate()?;
    if n < 2 {
        return Err(PointsError::BadParameter(format!(
            "search needs n >= 2, got {n}"
        )));
    }
    if s_dim == 0 {
        return Err(PointsError::BadParameter("s_dim must be >= 1".into()));
    }
    let n_us = n as usize;
    let rho = weights.rho;
    let table = phi_table(n);
    let mut a: Vec<u64> = vec![1];

    // Running products over points for the dimensions fixed so far.
    let mut prod = vec![1.0f64; n_us];
    for (r, p) in prod.iter_mut().enumerate() {
        *p *= 1.0 + rho * table[r];
    }

    for _ in 1..s_dim {
        let mut best_score = f64::INFINITY;
        let mut best_cand = 0u64;
        let mut cand = 1u64;
        while cand < n {
            if cand % 2 == 1 && gcd(cand, n) == 1 {
                let step = cand as usize;
                let mut r = 0usize;
                let mut acc = 0.0;
                for &p in prod.iter() {
                    acc += p * (1.0 + rho * table[r]);
                    r += step;
                    if r >= n_us {
                        r -= n_us;
                    }
                }
                if acc < best_score {
                    best_score = acc;
                    best_cand = cand;
                }
            }
            cand += 1;
        }
        let step = best_cand as usize;
        let mut r = 0usize;
        for p in prod.iter_mut() {
            *p *= 1.0 + rho * table[r];
            r += step;
            if r >= n_us {
                r -= n_us;
            }
        }
        a.push(best_cand);
    }
    LatticeRule::new(n, a)
}
