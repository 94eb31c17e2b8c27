//! State-ordering strategies for array-style RQMC: importance-function sorts
//! (including the one-step look-ahead construction), recursive batch sort,
//! and the Hilbert-curve sort with pilot statistics.

mod hilbert;

pub use hilbert::{hilbert_default_bits, hilbert_index, hilbert_sort, logistic_map, HilbertSpec};

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::chain::{Functional, SimConfig};
use crate::math;
use crate::model::{ModelError, ReactionNetwork, StateVector};
use crate::points::PointSet;
use crate::rng::RngStream;

/// Sorting errors.
#[derive(Clone, Debug, PartialEq)]
pub enum SortError {
    /// h evaluated to NaN or infinity on the state at this index.
    NonFinite { index: usize },
    Model(ModelError),
    BadSpec(String),
}

impl core::fmt::Display for SortError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SortError::NonFinite { index } => {
                write!(f, "importance value for state {index} is not finite")
            }
            SortError::Model(e) => write!(f, "model: {e}"),
            SortError::BadSpec(msg) => write!(f, "bad sorter spec: {msg}"),
        }
    }
}

impl From<ModelError> for SortError {
    fn from(e: ModelError) -> Self {
        SortError::Model(e)
    }
}

/// Scalar sorting function h over states; sorters built on one of these use a
/// single point coordinate (l = 1).
#[derive(Clone, Debug)]
pub enum ImportanceFunction {
    /// h(x) = x_i.
    Coordinate { i: usize },
    /// One-step conditional mean of coordinate i:
    /// h(x) = x_i + tau * sum_k zeta_{k,i} a_k(x).
    OneStepMean {
        net: ReactionNetwork,
        i: usize,
        tau: f64,
    },
    /// Exact one-step conditional moment E[(X'_i)^p], p in {2, 3}, from the
    /// independent-Poisson counts (mean, variance, and third central moment
    /// of a Poisson all equal lambda).
    OneStepPower {
        net: ReactionNetwork,
        i: usize,
        p: u32,
        tau: f64,
    },
    /// Continuity-corrected normal surrogate of P[X'_i > threshold]:
    /// h(x) = 1 - Phi((threshold + 1/2 - mu_1(x)) / sigma_1(x)).
    OneStepTail {
        net: ReactionNetwork,
        i: usize,
        threshold: i64,
        tau: f64,
    },
    /// Mean of component importance values (shared sort for several outputs).
    Average(Vec<ImportanceFunction>),
}

/// Floor applied to one-step standard deviations before dividing.
pub const SIGMA_FLOOR: f64 = 1e-9;

/// One-step mean and variance of coordinate i given the current state.
fn one_step_moments(
    net: &ReactionNetwork,
    i: usize,
    tau: f64,
    x: &[f64],
) -> Result<(f64, f64), ModelError> {
    let mut mean = x[i];
    let mut var = 0.0;
    for k in 0..net.n_reactions() {
        let z = net.effective_zeta(k)[i];
        if z != 0.0 {
            let lambda = net.propensity(k, x)? * tau;
            mean += z * lambda;
            var += z * z * lambda;
        }
    }
    Ok((mean, var))
}

impl ImportanceFunction {
    pub fn eval(&self, x: &[f64]) -> Result<f64, SortError> {
        match self {
            ImportanceFunction::Coordinate { i } => Ok(x[*i]),
            ImportanceFunction::OneStepMean { net, i, tau } => {
                Ok(one_step_moments(net, *i, *tau, x)?.0)
            }
            ImportanceFunction::OneStepPower { net, i, p, tau } => {
                let mut mean = x[*i];
                let mut var = 0.0;
                let mut third = 0.0;
                for k in 0..net.n_reactions() {
                    let z = net.effective_zeta(k)[*i];
                    if z != 0.0 {
                        let lambda = net.propensity(k, x)? * *tau;
                        mean += z * lambda;
                        var += z * z * lambda;
                        third += z * z * z * lambda;
                    }
                }
                Ok(match p {
                    2 => mean * mean + var,
                    _ => mean * mean * mean + 3.0 * mean * var + third,
                })
            }
            ImportanceFunction::OneStepTail {
                net,
                i,
                threshold,
                tau,
            } => {
                let (mean, var) = one_step_moments(net, *i, *tau, x)?;
                let sigma = math::sqrt(var).max(SIGMA_FLOOR);
                let z = (*threshold as f64 + 0.5 - mean) / sigma;
                // Upper tail via erfc directly; 1 - Phi(z) would round to 0
                // far out in the tail and destroy the ordering there.
                Ok(0.5 * math::erfc(z / core::f64::consts::SQRT_2))
            }
            ImportanceFunction::Average(parts) => {
                let mut acc = 0.0;
                for part in parts {
                    acc += part.eval(x)?;
                }
                Ok(acc / parts.len() as f64)
            }
        }
    }
}

/// One-step look-ahead importance function for a functional: the conditional
/// expectation of g after one step, exact for Coordinate and Power, a normal
/// surrogate for Indicator.
pub fn oslaif(
    net: &ReactionNetwork,
    g: &Functional,
    tau: f64,
) -> Result<ImportanceFunction, SortError> {
    g.validate(net.n_species())
        .map_err(|e| SortError::BadSpec(format!("{e}")))?;
    Ok(match *g {
        Functional::Coordinate(i) => ImportanceFunction::OneStepMean {
            net: net.clone(),
            i,
            tau,
        },
        Functional::Power(i, p) => ImportanceFunction::OneStepPower {
            net: net.clone(),
            i,
            p,
            tau,
        },
        Functional::Indicator(i, threshold) => ImportanceFunction::OneStepTail {
            net: net.clone(),
            i,
            threshold,
            tau,
        },
    })
}

/// Mean of the per-functional look-ahead functions: one shared sorting key
/// for estimating several outputs at once.
pub fn average_oslaif(
    net: &ReactionNetwork,
    gs: &[Functional],
    tau: f64,
) -> Result<ImportanceFunction, SortError> {
    if gs.is_empty() {
        return Err(SortError::BadSpec("no functionals to average".into()));
    }
    let parts = gs
        .iter()
        .map(|g| oslaif(net, g, tau))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ImportanceFunction::Average(parts))
}

/// Stable argsort of finite values: ascending, ties in original index order.
pub(crate) fn argsort_stable(values: &[f64]) -> Result<Vec<usize>, SortError> {
    for (index, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(SortError::NonFinite { index });
        }
    }
    let mut perm: Vec<usize> = (0..values.len()).collect();
    // (value, index) keys are all distinct, so an unstable sort yields the
    // stable order.
    perm.sort_unstable_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("finite values compare")
            .then(a.cmp(&b))
    });
    Ok(perm)
}

/// Permutation ordering states by h, ascending; ties keep original order.
pub fn sort_by_importance(
    states: &[Vec<f64>],
    h: &ImportanceFunction,
) -> Result<Vec<usize>, SortError> {
    let mut values = Vec::with_capacity(states.len());
    for x in states {
        values.push(h.eval(x)?);
    }
    argsort_stable(&values)
}

/// Recursive batch sort parameters: which coordinate each level sorts by and
/// the batch-count exponents (n_j = ceil(n^alpha_j)).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSpec {
    pub coord_order: Vec<usize>,
    pub exponents: Vec<f64>,
}

impl BatchSpec {
    pub fn new(coord_order: Vec<usize>, exponents: Vec<f64>) -> Result<Self, SortError> {
        let spec = BatchSpec {
            coord_order,
            exponents,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn levels(&self) -> usize {
        self.coord_order.len()
    }

    fn validate(&self) -> Result<(), SortError> {
        if self.coord_order.is_empty() {
            return Err(SortError::BadSpec("batch spec needs >= 1 level".into()));
        }
        if self.coord_order.len() != self.exponents.len() {
            return Err(SortError::BadSpec(format!(
                "{} coordinates vs {} exponents",
                self.coord_order.len(),
                self.exponents.len()
            )));
        }
        let mut total = 0.0;
        for &a in &self.exponents {
            if !(a > 0.0 && a.is_finite()) {
                return Err(SortError::BadSpec(format!("exponent {a} not positive")));
            }
            total += a;
        }
        if math::abs(total - 1.0) > 1e-9 {
            return Err(SortError::BadSpec(format!(
                "exponents sum to {total}, need 1"
            )));
        }
        Ok(())
    }

    /// Batch counts n_j = ceil(n^alpha_j) for a population of size n.
    fn batch_counts(&self, n: u64) -> Vec<u64> {
        self.exponents
            .iter()
            .map(|&a| {
                let c = math::ceil(math::powf(n as f64, a)) as u64;
                c.max(1)
            })
            .collect()
    }
}

fn batch_sort_level(
    states: &[Vec<f64>],
    spec: &BatchSpec,
    counts: &[u64],
    perm: &mut [usize],
    level: usize,
) -> Result<(), SortError> {
    if level == spec.levels() || perm.len() <= 1 {
        return Ok(());
    }
    let coord = spec.coord_order[level];
    for &i in perm.iter() {
        let v = states[i][coord];
        if !v.is_finite() {
            return Err(SortError::NonFinite { index: i });
        }
    }
    perm.sort_unstable_by(|&a, &b| {
        states[a][coord]
            .partial_cmp(&states[b][coord])
            .expect("finite values compare")
            .then(a.cmp(&b))
    });
    let batches = counts[level] as usize;
    let block = perm.len().div_ceil(batches);
    for chunk in perm.chunks_mut(block) {
        batch_sort_level(states, spec, counts, chunk, level + 1)?;
    }
    Ok(())
}

/// Recursive batch sort: split into n_1 = ceil(n^alpha_1) blocks ordered by
/// the first coordinate, recurse on the remaining coordinates within blocks.
/// `n` is the population size the batch counts are computed from.
pub fn batch_sort(states: &[Vec<f64>], spec: &BatchSpec, n: u64) -> Result<Vec<usize>, SortError> {
    spec.validate()?;
    if let Some(x) = states.first() {
        for &c in &spec.coord_order {
            if c >= x.len() {
                return Err(SortError::BadSpec(format!(
                    "batch coordinate {c} out of range for {}-dimensional states",
                    x.len()
                )));
            }
        }
    }
    let counts = spec.batch_counts(n);
    let mut perm: Vec<usize> = (0..states.len()).collect();
    batch_sort_level(states, spec, &counts, &mut perm, 0)?;
    Ok(perm)
}

/// Per-time-index state statistics from pilot MC runs: `means[t]` and
/// `sds[t]` describe the state after t steps (t = 0 is the initial state).
#[derive(Clone, Debug, PartialEq)]
pub struct PilotStats {
    pub means: Vec<Vec<f64>>,
    pub sds: Vec<Vec<f64>>,
}

/// Estimates per-step means and standard deviations from n_pilot plain MC
/// paths on stream (seed, 0). SDs are floored at SIGMA_FLOOR.
pub fn pilot_stats(
    net: &ReactionNetwork,
    x0: &StateVector,
    config: &SimConfig,
    n_pilot: u64,
    seed: u64,
) -> Result<PilotStats, crate::chain::SimError> {
    if n_pilot < 2 {
        return Err(crate::chain::SimError::Config(format!(
            "pilot runs need n_pilot >= 2, got {n_pilot}"
        )));
    }
    let steps = config.steps() as usize;
    let dim = net.n_species();
    let mut mean = vec![vec![0.0f64; dim]; steps + 1];
    let mut m2 = vec![vec![0.0f64; dim]; steps + 1];
    mean[0].copy_from_slice(&x0.x);

    let mut base = RngStream::stream(seed, 0);
    let mut x = vec![0.0f64; dim];
    let mut u = vec![0.0f64; net.n_reactions()];
    let mut scratch = vec![0.0f64; net.n_reactions()];
    for path in 0..n_pilot {
        let mut rng = base.clone();
        x.copy_from_slice(&x0.x);
        for j in 0..steps {
            for slot in u.iter_mut() {
                *slot = rng.next_f64();
            }
            crate::chain::step_in_place(net, &mut x, &u, config.tau(), &mut scratch)?;
            let c = (path + 1) as f64;
            for (i, &v) in x.iter().enumerate() {
                let delta = v - mean[j + 1][i];
                mean[j + 1][i] += delta / c;
                m2[j + 1][i] += delta * (v - mean[j + 1][i]);
            }
        }
        base.advance_substream();
    }
    let sds: Vec<Vec<f64>> = m2
        .iter()
        .enumerate()
        .map(|(t, row)| {
            row.iter()
                .map(|&s| {
                    if t == 0 {
                        SIGMA_FLOOR
                    } else {
                        math::sqrt(s / (n_pilot - 1) as f64).max(SIGMA_FLOOR)
                    }
                })
                .collect()
        })
        .collect();
    Ok(PilotStats { means: mean, sds })
}

/// How states are ordered before each step; `l` is how many leading point
/// coordinates the ordering consumes.
#[derive(Clone, Debug)]
pub enum Sorter {
    /// Scalar key, l = 1.
    Importance(ImportanceFunction),
    /// Recursive multivariate blocks, l = number of levels.
    Batch(BatchSpec),
    /// Hilbert curve position of the logistic-mapped state, l = 1.
    Hilbert(HilbertConfig),
}

/// Hilbert sorter configuration; per-step statistics come from pilot runs at
/// plan setup.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertConfig {
    /// Grid bits per axis; default min(ceil(log2 n / l) + 4, 62 / l).
    pub bits: Option<u32>,
    pub pilot_n: u64,
}

impl Default for HilbertConfig {
    fn default() -> Self {
        HilbertConfig {
            bits: None,
            pilot_n: 1 << 12,
        }
    }
}

impl Sorter {
    /// Leading point coordinates consumed by the pre-ordering.
    pub fn l(&self) -> usize {
        match self {
            Sorter::Importance(_) | Sorter::Hilbert(_) => 1,
            Sorter::Batch(spec) => spec.levels(),
        }
    }
}

/// Serializable sorter description; resolved against a model into a `Sorter`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SortSpec {
    /// One-step look-ahead for the plan's functional; the average over all
    /// functionals when several outputs share the sort.
    Oslaif,
    /// Raw state coordinate.
    Coordinate { coord: usize },
    Batch {
        order: Vec<usize>,
        exponents: Vec<f64>,
    },
    Hilbert {
        #[serde(skip_serializing_if = "Option::is_none")]
        bits: Option<u32>,
        #[serde(skip_serializing_if = "Option::is_none")]
        pilot_n: Option<u64>,
    },
}

/// Resolves a sorter description for a model and step size.
pub fn build_sorter(
    spec: &SortSpec,
    net: &ReactionNetwork,
    gs: &[Functional],
    tau: f64,
) -> Result<Sorter, SortError> {
    Ok(match spec {
        SortSpec::Oslaif => {
            if gs.len() == 1 {
                Sorter::Importance(oslaif(net, &gs[0], tau)?)
            } else {
                Sorter::Importance(average_oslaif(net, gs, tau)?)
            }
        }
        SortSpec::Coordinate { coord } => {
            if *coord >= net.n_species() {
                return Err(SortError::BadSpec(format!(
                    "coordinate {coord} out of range for {} species",
                    net.n_species()
                )));
            }
            Sorter::Importance(ImportanceFunction::Coordinate { i: *coord })
        }
        SortSpec::Batch { order, exponents } => {
            let spec = BatchSpec::new(order.clone(), exponents.clone())?;
            if let Some(&c) = spec.coord_order.iter().find(|&&c| c >= net.n_species()) {
                return Err(SortError::BadSpec(format!(
                    "batch coordinate {c} out of range for {} species",
                    net.n_species()
                )));
            }
            Sorter::Batch(spec)
        }
        SortSpec::Hilbert { bits, pilot_n } => Sorter::Hilbert(HilbertConfig {
            bits: *bits,
            pilot_n: pilot_n.unwrap_or(1 << 12),
        }),
    })
}

/// Orders the points of a set by their first l coordinates, matching how the
/// sorter orders states. One-dimensional sorters order by the first
/// coordinate (identity for u_{i,1} = i/n); batch sorters batch-sort the
/// first l coordinates with the same spec.
pub fn presort_points(pointset: &PointSet, sorter: &Sorter) -> Result<Vec<usize>, SortError> {
    let l = sorter.l();
    if l >= pointset.dim() {
        return Err(SortError::BadSpec(format!(
            "sorter consumes {l} coordinates but the point set has only {} \
             (no room for advance coordinates)",
            pointset.dim()
        )));
    }
    let n = pointset.n();
    match sorter {
        Sorter::Importance(_) | Sorter::Hilbert(_) => {
            let values: Vec<f64> = (0..n).map(|i| pointset.coordinate(i, 0)).collect();
            argsort_stable(&values)
        }
        Sorter::Batch(spec) => {
            let coords: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..l).map(|j| pointset.coordinate(i, j)).collect())
                .collect();
            // Point columns are consumed in order, so the batch levels read
            // coordinates 0..l regardless of the state coordinates they sort.
            let point_spec = BatchSpec {
                coord_order: (0..l).collect(),
                exponents: spec.exponents.clone(),
            };
            batch_sort(&coords, &point_spec, n)
        }
    }
}
