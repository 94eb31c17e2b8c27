//! Fixed-step tau-leaping chains: the one-step transition, whole-path
//! simulation, and the plain Monte Carlo and classical RQMC estimators.
//!
//! Reaction counts come from exact inverse-CDF sampling, so every estimator
//! is a deterministic function of (seed, configuration).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::model::{Mode, ModelError, ReactionNetwork, StateVector};
use crate::points::{PointSet, PointsError, Randomization};
use crate::rng::RngStream;
use crate::sampling::{count_variate, SampleError};

#[cfg(feature = "std")]
mod clock {
    pub struct Stopwatch(std::time::Instant);
    impl Stopwatch {
        pub fn start() -> Self {
            Stopwatch(std::time::Instant::now())
        }
        pub fn seconds(&self) -> f64 {
            self.0.elapsed().as_secs_f64()
        }
    }
}
#[cfg(not(feature = "std"))]
mod clock {
    pub struct Stopwatch;
    impl Stopwatch {
        pub fn start() -> Self {
            Stopwatch
        }
        pub fn seconds(&self) -> f64 {
            0.0
        }
    }
}
pub(crate) use clock::Stopwatch;

/// Simulation and estimation errors.
#[derive(Clone, Debug, PartialEq)]
pub enum SimError {
    Model(ModelError),
    Sample(SampleError),
    Points(PointsError),
    Config(String),
    /// Point set does not provide enough coordinates per point.
    Dimension { needed: u64, available: u64 },
    /// A coordinate went negative under the abort_replication policy.
    NegativeState { step: u32 },
}

impl core::fmt::Display for SimError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SimError::Model(e) => write!(f, "model: {e}"),
            SimError::Sample(e) => write!(f, "sampling: {e}"),
            SimError::Points(e) => write!(f, "points: {e}"),
            SimError::Config(msg) => write!(f, "config: {msg}"),
            SimError::Dimension { needed, available } => write!(
                f,
                "point set provides {available} coordinates per point, need {needed}"
            ),
            SimError::NegativeState { step } => {
                write!(f, "state went negative at step {step}")
            }
        }
    }
}

impl From<ModelError> for SimError {
    fn from(e: ModelError) -> Self {
        SimError::Model(e)
    }
}
impl From<SampleError> for SimError {
    fn from(e: SampleError) -> Self {
        SimError::Sample(e)
    }
}
impl From<PointsError> for SimError {
    fn from(e: PointsError) -> Self {
        SimError::Points(e)
    }
}

/// What to do when a tau-leap step drives a coordinate negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NegativePolicy {
    /// Count the event, mark the path invalid, keep going.
    FlagAndContinue,
    /// Fail the replication with an error.
    AbortReplication,
}

/// Horizon, step count, arithmetic mode, and negativity handling for one
/// simulation. tau = t_end / steps exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    t_end: f64,
    steps: u32,
    mode: Mode,
    negative_policy: NegativePolicy,
}

impl SimConfig {
    /// `steps = 0` is allowed as the degenerate empty path.
    pub fn new(
        t_end: f64,
        steps: u32,
        mode: Mode,
        negative_policy: NegativePolicy,
    ) -> Result<Self, SimError> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(SimError::Config(alloc::format!(
                "t_end must be positive and finite, got {t_end}"
            )));
        }
        Ok(SimConfig {
            t_end,
            steps,
            mode,
            negative_policy,
        })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.t_end / self.steps as f64
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn negative_policy(&self) -> NegativePolicy {
        self.negative_policy
    }

    pub fn with_steps(mut self, steps: u32) -> Self {
        self.steps = steps;
        self
    }
}

/// The scalar output g(X(T)) an estimator targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Functional {
    /// g(x) = x_i.
    Coordinate(usize),
    /// g(x) = x_i^p for p in {2, 3}.
    Power(usize, u32),
    /// g(x) = 1 when x_i > threshold, else 0.
    Indicator(usize, i64),
}

impl Functional {
    pub fn coordinate_index(&self) -> usize {
        match *self {
            Functional::Coordinate(i) | Functional::Power(i, _) | Functional::Indicator(i, _) => i,
        }
    }

    pub fn validate(&self, n_species: usize) -> Result<(), SimError> {
        let i = self.coordinate_index();
        if i >= n_species {
            return Err(SimError::Config(alloc::format!(
                "functional coordinate {i} out of range for {n_species} species"
            )));
        }
        if let Functional::Power(_, p) = *self {
            if p != 2 && p != 3 {
                return Err(SimError::Config(alloc::format!(
                    "power functional supports p in {{2, 3}}, got {p}"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Functional::Coordinate(i) => x[i],
            Functional::Power(i, p) => math::powi(x[i], p),
            Functional::Indicator(i, t) => {
                if x[i] > t as f64 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Estimator result.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorOutput {
    pub mean: f64,
    /// Per-run sample variance for plain MC; empirical variance of the m
    /// replicate means for randomized methods. Divisor n-1 resp. m-1.
    pub variance: f64,
    /// Paths per replicate.
    pub n: u64,
    /// Replicates (1 for plain MC).
    pub m: u32,
    /// Wall-clock seconds for simulation plus randomization, excluding
    /// point-set construction. Zero without the std feature.
    pub elapsed: f64,
    /// Steps that left some coordinate negative, summed over all paths.
    pub negative_events: u64,
}

// Inverse CDFs need open-interval arguments, but randomized coordinates can
// land exactly on 0 (digital shift of the origin) or 1 (baker fold at 1/2).
const U_MIN: f64 = 1e-15;
const U_MAX: f64 = 1.0 - 1e-15;

#[inline]
pub(crate) fn clamp_unit(u: f64) -> f64 {
    u.clamp(U_MIN, U_MAX)
}

/// One tau-leap transition. Reaction k fires `count_variate(a_k(x) tau, u_k)`
/// times; uniform k belongs to reaction k, in reaction order. Uniforms are
/// clamped into the open unit interval.
pub fn step(
    net: &ReactionNetwork,
    x: &StateVector,
    u: &[f64],
    tau: f64,
) -> Result<StateVector, SimError> {
    let d = net.n_reactions();
    if u.len() != d {
        return Err(SimError::Dimension {
            needed: d as u64,
            available: u.len() as u64,
        });
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(SimError::Config(alloc::format!(
            "tau must be nonnegative and finite, got {tau}"
        )));
    }
    let mut counts = vec![0.0; d];
    fill_counts(net, &x.x, u, tau, &mut counts)?;
    Ok(net.apply_reactions(x, &counts))
}

/// Draws all reaction counts for one step at the pre-step state.
#[inline]
fn fill_counts(
    net: &ReactionNetwork,
    x: &[f64],
    u: &[f64],
    tau: f64,
    counts: &mut [f64],
) -> Result<(), SimError> {
    for k in 0..net.n_reactions() {
        let lambda = net.propensity(k, x)? * tau;
        counts[k] = count_variate(lambda, clamp_unit(u[k]), net.mode())?;
    }
    Ok(())
}

/// In-place transition for the estimator loops; `scratch` holds the counts.
/// Returns false when the step left a negative coordinate.
pub(crate) fn step_in_place(
    net: &ReactionNetwork,
    x: &mut [f64],
    u: &[f64],
    tau: f64,
    scratch: &mut [f64],
) -> Result<bool, SimError> {
    fill_counts(net, x, u, tau, scratch)?;
    Ok(net.apply_counts_in_place(x, scratch))
}

/// Final state of one path plus how many steps went negative along the way.
#[derive(Clone, Debug, PartialEq)]
pub struct PathOutcome {
    pub x: StateVector,
    pub negative_steps: u32,
}

pub(crate) fn check_mode(net: &ReactionNetwork, config: &SimConfig) -> Result<(), SimError> {
    if net.mode() != config.mode() {
        return Err(SimError::Config(
            "model mode and config mode differ; call set_mode to align them".into(),
        ));
    }
    Ok(())
}

/// Runs `config.steps()` transitions from x0, drawing the uniform for
/// (step j, reaction k) from `coords(j, k)`; calls arrive time-major,
/// reaction-minor.
pub fn simulate_path<F: FnMut(u32, usize) -> f64>(
    net: &ReactionNetwork,
    x0: &StateVector,
    config: &SimConfig,
    mut coords: F,
) -> Result<PathOutcome, SimError> {
    check_mode(net, config)?;
    let d = net.n_reactions();
    let mut x = x0.x.clone();
    let mut valid = x0.valid;
    let mut u = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    let mut negative_steps = 0u32;
    let tau = config.tau();
    for j in 0..config.steps() {
        for (k, slot) in u.iter_mut().enumerate() {
            *slot = coords(j, k);
        }
        if !step_in_place(net, &mut x, &u, tau, &mut scratch)? {
            negative_steps += 1;
            valid = false;
            if config.negative_policy() == NegativePolicy::AbortReplication {
                return Err(SimError::NegativeState { step: j });
            }
        }
    }
    Ok(PathOutcome {
        x: StateVector { x, valid },
        negative_steps,
    })
}

pub(crate) struct Welford {
    mean: Vec<f64>,
    m2: Vec<f64>,
    count: u64,
}

impl Welford {
    pub(crate) fn new(width: usize) -> Self {
        Welford {
            mean: vec![0.0; width],
            m2: vec![0.0; width],
            count: 0,
        }
    }

    pub(crate) fn push(&mut self, values: &[f64]) {
        self.count += 1;
        let c = self.count as f64;
        for (t, &v) in values.iter().enumerate() {
            let delta = v - self.mean[t];
            self.mean[t] += delta / c;
            self.m2[t] += delta * (v - self.mean[t]);
        }
    }

    /// Sample variance of entry t, divisor count-1.
    pub(crate) fn variance(&self, t: usize) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2[t] / (self.count - 1) as f64
        }
    }

    pub(crate) fn mean(&self, t: usize) -> f64 {
        self.mean[t]
    }
}

pub(crate) fn validate_functionals(net: &ReactionNetwork, gs: &[Functional]) -> Result<(), SimError> {
    if gs.is_empty() {
        return Err(SimError::Config("no functionals given".into()));
    }
    for g in gs {
        g.validate(net.n_species())?;
    }
    Ok(())
}

/// Plain Monte Carlo over n independent paths, one RNG substream per path.
pub fn mc_estimate(
    net: &ReactionNetwork,
    x0: &StateVector,
    config: &SimConfig,
    g: &Functional,
    n: u64,
    seed: u64,
) -> Result<EstimatorOutput, SimError> {
    let mut out = mc_estimate_multi(net, x0, config, core::slice::from_ref(g), n, seed)?;
    Ok(out.pop().expect("one functional in, one output out"))
}

/// Multi-output variant: all functionals are evaluated on the same paths, so
/// the path draws are identical to the single-output run with the same seed.
pub fn mc_estimate_multi(
    net: &ReactionNetwork,
    x0: &StateVector,
    config: &SimConfig,
    gs: &[Functional],
    n: u64,
    seed: u64,
) -> Result<Vec<EstimatorOutput>, SimError> {
    check_mode(net, config)?;
    validate_functionals(net, gs)?;
    if n < 2 {
        return Err(SimError::Config(alloc::format!("mc needs n >= 2, got {n}")));
    }
    let sw = Stopwatch::start();
    // Path i runs on substream i of stream (seed, 0); the base never draws.
    let mut base = RngStream::stream(seed, 0);
    let mut acc = Welford::new(gs.len());
    let mut values = vec![0.0; gs.len()];
    let mut negative_events = 0u64;
    for _ in 0..n {
        let mut rng = base.clone();
        let outcome = simulate_path(net, x0, config, |_, _| rng.next_f64())?;
        negative_events += outcome.negative_steps as u64;
        for (t, g) in gs.iter().enumerate() {
            values[t] = g.eval(&outcome.x.x);
        }
        acc.push(&values);
        base.advance_substream();
    }
    let elapsed = sw.seconds();
    Ok(gs
        .iter()
        .enumerate()
        .map(|(t, _)| EstimatorOutput {
            mean: acc.mean[t],
            variance: acc.variance(t),
            n,
            m: 1,
            elapsed,
            negative_events,
        })
        .collect())
}

/// Classical RQMC: m independent randomizations of an (s*d)-dimensional
/// point set; replicate r draws its randomization from stream (seed, r).
/// Point coordinate j*d + k drives reaction k at step j.
pub fn crqmc_estimate(
    net: &ReactionNetwork,
    x0: &StateVector,
    config: &SimConfig,
    g: &Functional,
    points: &PointSet,
    m: u32,
    seed: u64,
) -> Result<EstimatorOutput, SimError> {
    let mut out = crqmc_estimate_multi(net, x0, config, core::slice::from_ref(g), points, m, seed)?;
    Ok(out.pop().expect("one functional in, one output out"))
}

/// Multi-output variant of `crqmc_estimate`.
pub fn crqmc_estimate_multi(
    net: &ReactionNetwork,
    x0: &StateVector,
    config: &SimConfig,
    gs: &[Functional],
    points: &PointSet,
    m: u32,
    seed: u64,
) -> Result<Vec<EstimatorOutput>, SimError> {
    if m < 2 {
        return Err(SimError::Config(alloc::format!(
            "classical RQMC needs m >= 2 randomizations, got {m}"
        )));
    }
    let mut rands = Vec::with_capacity(m as usize);
    for r in 0..m {
        let mut rng = RngStream::stream(seed, r as u64);
        rands.push(points.draw_randomization(&mut rng));
    }
    crqmc_estimate_with_randomizations(net, x0, config, gs, points, &rands)
}

/// Core of the classical RQMC estimator with caller-supplied randomization
/// records, one per replicate. Exposed so a fixed randomization can be
/// replayed (two identical records must give zero variance).
pub fn crqmc_estimate_with_randomizations(
    net: &ReactionNetwork,
    x0: &StateVector,
    config: &SimConfig,
    gs: &[Functional],
    points: &PointSet,
    rands: &[Randomization],
) -> Result<Vec<EstimatorOutput>, SimError> {
    check_mode(net, config)?;
    validate_functionals(net, gs)?;
    if rands.len() < 2 {
        return Err(SimError::Config(alloc::format!(
            "classical RQMC needs m >= 2 randomizations, got {}",
            rands.len()
        )));
    }
    let d = net.n_reactions();
    let needed = config.steps() as u64 * d as u64;
    if (points.dim() as u64) < needed {
        return Err(SimError::Dimension {
            needed,
            available: points.dim() as u64,
        });
    }
    let n = points.n();
    let sw = Stopwatch::start();
    let mut reps = Welford::new(gs.len());
    let mut sums = vec![0.0; gs.len()];
    let mut means = vec![0.0; gs.len()];
    let mut negative_events = 0u64;
    for rand in rands {
        let prep = points.prepare(rand)?;
        sums.iter_mut().for_each(|s| *s = 0.0);
        for i in 0..n {
            let outcome =
                simulate_path(net, x0, config, |j, k| prep.coord(i, j as usize * d + k))?;
            negative_events += outcome.negative_steps as u64;
            for (t, g) in gs.iter().enumerate() {
                sums[t] += g.eval(&outcome.x.x);
            }
        }
        for (t, &s) in sums.iter().enumerate() {
            means[t] = s / n as f64;
        }
        reps.push(&means);
    }
    let elapsed = sw.seconds();
    Ok(gs
        .iter()
        .enumerate()
        .map(|(t, _)| EstimatorOutput {
            mean: reps.mean[t],
            variance: reps.variance(t),
            n,
            m: rands.len() as u32,
            elapsed,
            negative_events,
        })
        .collect())
}
