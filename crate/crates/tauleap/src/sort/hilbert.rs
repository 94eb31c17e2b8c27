//! Hilbert-curve ordering: each state coordinate is rescaled by a logistic
//! map, discretized to an m-bit grid, and the cells are ranked by the
//! Butz/Skilling reflected-Gray-code Hilbert index.

use alloc::format;
use alloc::vec::Vec;

use super::{SortError, SIGMA_FLOOR};
use crate::math;

/// Largest double below 1, the saturation value of the logistic map.
const ONE_MINUS: f64 = 1.0 - f64::EPSILON / 2.0;

/// Rescaled logistic map Psi(x) = 1/(1 + exp(-(x - mu + 2*sigma)/(4*sigma))),
/// clamped into the open unit interval so saturated inputs stay sortable.
pub fn logistic_map(x: f64, mu: f64, sigma: f64) -> f64 {
    let s = sigma.max(SIGMA_FLOOR);
    let v = 1.0 / (1.0 + math::exp(-(x - mu + 2.0 * s) / (4.0 * s)));
    v.clamp(f64::MIN_POSITIVE, ONE_MINUS)
}

/// Default grid resolution min(ceil(log2(n)/l) + 4, 62/l): enough cells that
/// collisions among n spread-out states are rare, within the 62-bit index.
pub fn hilbert_default_bits(n: u64, l: usize) -> u32 {
    let log2n = 64 - n.max(1).saturating_sub(1).leading_zeros();
    let wanted = (log2n as usize).div_ceil(l) as u32 + 4;
    wanted.min((62 / l) as u32).max(1)
}

/// Hilbert index of a grid cell, `bits` per axis, most significant digit
/// first (Skilling's transpose form, interleaved).
pub fn hilbert_index(axes: &[u64], bits: u32) -> u64 {
    let l = axes.len();
    let mut x: Vec<u64> = axes.to_vec();
    let m = 1u64 << (bits - 1);

    // Fold axes into the transposed index (Skilling's AxesToTranspose).
    let mut q = m;
    while q > 1 {
        let p = q - 1;
        for i in 0..l {
            if x[i] & q != 0 {
                x[0] ^= p;
            } else {
                let t = (x[0] ^ x[i]) & p;
                x[0] ^= t;
                x[i] ^= t;
            }
        }
        q >>= 1;
    }
    for i in 1..l {
        x[i] ^= x[i - 1];
    }
    let mut t = 0u64;
    let mut q = m;
    while q > 1 {
        if x[l - 1] & q != 0 {
            t ^= q - 1;
        }
        q >>= 1;
    }
    for word in x.iter_mut() {
        *word ^= t;
    }

    // Interleave the transposed digits, most significant plane first.
    let mut h = 0u64;
    for b in (0..bits).rev() {
        for word in &x {
            h = (h << 1) | ((word >> b) & 1);
        }
    }
    h
}

/// Grid geometry plus the per-coordinate logistic parameters for one step.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertSpec {
    bits: u32,
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl HilbertSpec {
    /// `mu`/`sigma` hold one entry per sorted coordinate; sigmas are floored
    /// at the minimum scale.
    pub fn new(bits: u32, mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self, SortError> {
        let l = mu.len();
        if l < 2 {
            return Err(SortError::BadSpec(
                "Hilbert sort needs >= 2 coordinates; use an importance sort for one".into(),
            ));
        }
        if sigma.len() != l {
            return Err(SortError::BadSpec(format!(
                "{l} means vs {} standard deviations",
                sigma.len()
            )));
        }
        if bits == 0 {
            return Err(SortError::BadSpec("grid needs at least one bit".into()));
        }
        if bits as usize * l > 62 {
            return Err(SortError::BadSpec(format!(
                "grid overflow: {bits} bits x {l} axes exceeds the 62-bit index"
            )));
        }
        for (j, v) in mu.iter().chain(sigma.iter()).enumerate() {
            if !v.is_finite() {
                return Err(SortError::BadSpec(format!(
                    "non-finite pilot statistic at position {j}"
                )));
            }
        }
        let sigma = sigma.into_iter().map(|s| s.max(SIGMA_FLOOR)).collect();
        Ok(HilbertSpec { bits, mu, sigma })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Grid cell of one state: floor(2^bits * Psi(x_j)) per axis.
    fn cell(&self, x: &[f64]) -> Vec<u64> {
        let scale = (1u64 << self.bits) as f64;
        let top = (1u64 << self.bits) - 1;
        (0..self.mu.len())
            .map(|j| {
                let u = logistic_map(x[j], self.mu[j], self.sigma[j]);
                ((scale * u) as u64).min(top)
            })
            .collect()
    }
}

/// Permutation ordering states along the Hilbert curve of their grid cells;
/// states in one cell keep original order.
pub fn hilbert_sort(states: &[Vec<f64>], spec: &HilbertSpec) -> Result<Vec<usize>, SortError> {
    let l = spec.dim();
    let mut keys = Vec::with_capacity(states.len());
    for (index, x) in states.iter().enumerate() {
        if x.len() < l {
            return Err(SortError::BadSpec(format!(
                "state has {} coordinates, spec sorts {l}",
                x.len()
            )));
        }
        if x[..l].iter().any(|v| !v.is_finite()) {
            return Err(SortError::NonFinite { index });
        }
        keys.push(hilbert_index(&spec.cell(x), spec.bits()));
    }
    let mut perm: Vec<usize> = (0..states.len()).collect();
    perm.sort_unstable_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
    Ok(perm)
}
