//! Array-RQMC estimator: n chains advance in lockstep, and before every step
//! the population is re-sorted and paired with a pre-ordered RQMC point set
//! whose last d coordinates are freshly randomized.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::chain::{
    check_mode, step_in_place, validate_functionals, EstimatorOutput, Functional, NegativePolicy,
    SimConfig, SimError, Stopwatch, Welford,
};
use crate::math;
use crate::model::{ReactionNetwork, StateVector};
use crate::points::{baker_fold, word_to_unit, LmsMatrix, PointSet};
use crate::rng::RngStream;
use crate::sort::{
    batch_sort, hilbert_default_bits, hilbert_sort, pilot_stats, presort_points,
    sort_by_importance, HilbertSpec, SortError, Sorter,
};

fn sort_to_sim(e: SortError) -> SimError {
    SimError::Config(format!("sorter: {e}"))
}

/// Everything needed to run the array estimator: model, functionals, sorter,
/// a point set with sorter.l() + d dimensions, and the replication layout.
///
/// Construction does the one-time work: the point pre-ordering and, for the
/// Hilbert sorter, the pilot runs (drawn from stream 0 of the plan seed;
/// replication r randomizes from stream r + 1).
#[derive(Clone, Debug)]
pub struct ArrayRqmcPlan {
    net: ReactionNetwork,
    x0: StateVector,
    config: SimConfig,
    gs: Vec<Functional>,
    sorter: Sorter,
    points: PointSet,
    m: u32,
    seed: u64,
    point_order: Vec<usize>,
    hilbert_specs: Option<Vec<HilbertSpec>>,
}

impl ArrayRqmcPlan {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        net: ReactionNetwork,
        x0: StateVector,
        config: SimConfig,
        g: Functional,
        sorter: Sorter,
        points: PointSet,
        m: u32,
        seed: u64,
    ) -> Result<Self, SimError> {
        Self::with_outputs(net, x0, config, vec![g], sorter, points, m, seed)
    }

    /// Multi-output plan: all functionals are evaluated on the same chains,
    /// sharing one sorter and one set of randomizations.
    #[allow(clippy::too_many_arguments)]
    pub fn with_outputs(
        net: ReactionNetwork,
        x0: StateVector,
        config: SimConfig,
        gs: Vec<Functional>,
        sorter: Sorter,
        points: PointSet,
        m: u32,
        seed: u64,
    ) -> Result<Self, SimError> {
        check_mode(&net, &config)?;
        validate_functionals(&net, &gs)?;
        if x0.x.len() != net.n_species() {
            return Err(SimError::Config(format!(
                "x0 has {} coordinates, model has {} species",
                x0.x.len(),
                net.n_species()
            )));
        }
        if m < 2 {
            return Err(SimError::Config(format!(
                "variance estimation needs m >= 2 replications, got {m}"
            )));
        }
        let needed = (sorter.l() + net.n_reactions()) as u64;
        if points.dim() as u64 != needed {
            return Err(SimError::Dimension {
                needed,
                available: points.dim() as u64,
            });
        }
        let point_order = presort_points(&points, &sorter).map_err(sort_to_sim)?;
        let hilbert_specs = match &sorter {
            Sorter::Hilbert(cfg) => {
                let stats = pilot_stats(&net, &x0, &config, cfg.pilot_n, seed)?;
                let bits = cfg
                    .bits
                    .unwrap_or_else(|| hilbert_default_bits(points.n(), net.n_species()));
                let mut specs = Vec::with_capacity(config.steps() as usize);
                for j in 0..config.steps() as usize {
                    specs.push(
                        HilbertSpec::new(bits, stats.means[j].clone(), stats.sds[j].clone())
                            .map_err(sort_to_sim)?,
                    );
                }
                Some(specs)
            }
            _ => None,
        };
        Ok(ArrayRqmcPlan {
            net,
            x0,
            config,
            gs,
            sorter,
            points,
            m,
            seed,
            point_order,
            hilbert_specs,
        })
    }

    pub fn n(&self) -> u64 {
        self.points.n()
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn outputs(&self) -> &[Functional] {
        &self.gs
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }
}

struct RunOutcome {
    means: Vec<f64>,
    negative_events: u64,
}

/// Ordering of the population before one advance; Hilbert plans read the
/// pilot statistics for the current time index.
fn sorter_permutation(
    sorter: &Sorter,
    specs: Option<&[HilbertSpec]>,
    states: &[Vec<f64>],
    n: u64,
    j: usize,
) -> Result<Vec<usize>, SortError> {
    match sorter {
        Sorter::Importance(h) => sort_by_importance(states, h),
        Sorter::Batch(spec) => batch_sort(states, spec, n),
        Sorter::Hilbert(_) => {
            hilbert_sort(states, &specs.expect("hilbert plans carry pilot specs")[j])
        }
    }
}

// Referenced from debug_assert only, so release builds see it as dead.
#[allow(dead_code)]
fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &i in perm {
        if i >= seen.len() || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    true
}

fn run_once_with_stream(plan: &ArrayRqmcPlan, rng: &mut RngStream) -> Result<RunOutcome, SimError> {
    let n = plan.points.n() as usize;
    let d = plan.net.n_reactions();
    let l = plan.sorter.l();
    let steps = plan.config.steps() as usize;
    let tau = plan.config.tau();
    let abort = plan.config.negative_policy() == NegativePolicy::AbortReplication;

    // LMS scramble of the advance columns is drawn once per replication; the
    // digital shift below is fresh at every step.
    let scrambled: Option<Vec<Vec<u32>>> = match &plan.points {
        PointSet::Net(net) => {
            let k = net.k() as usize;
            let mut per_dim = Vec::with_capacity(d);
            for c in 0..d {
                let lms = LmsMatrix::draw(rng);
                per_dim.push(
                    (0..k)
                        .map(|b| lms.apply(net.column(l + c, b)))
                        .collect::<Vec<u32>>(),
                );
            }
            Some(per_dim)
        }
        PointSet::Lattice { .. } => None,
    };

    let mut states = vec![plan.x0.x.clone(); n];
    let mut next = vec![vec![0.0f64; plan.net.n_species()]; n];
    let mut u = vec![0.0f64; d];
    let mut counts = vec![0.0f64; d];
    let mut shift_f = vec![0.0f64; d];
    let mut shift_w = vec![0u32; d];
    let mut negative_events = 0u64;

    for j in 0..steps {
        match &plan.points {
            PointSet::Lattice { .. } => {
                for s in shift_f.iter_mut() {
                    *s = rng.next_f64();
                }
            }
            PointSet::Net(_) => {
                for w in shift_w.iter_mut() {
                    *w = rng.next_bits(31);
                }
            }
        }

        let perm = sorter_permutation(
            &plan.sorter,
            plan.hilbert_specs.as_deref(),
            &states,
            n as u64,
            j,
        )
        .map_err(sort_to_sim)?;
        debug_assert!(is_permutation(&perm), "sorter output must be a bijection");

        for i in 0..n {
            next[i].copy_from_slice(&states[perm[i]]);
            let pt = plan.point_order[i] as u64;
            match &plan.points {
                PointSet::Lattice { rule, baker } => {
                    for c in 0..d {
                        let v = math::frac(rule.coordinate(pt, l + c) + shift_f[c]);
                        u[c] = if *baker { baker_fold(v) } else { v };
                    }
                }
                PointSet::Net(_) => {
                    let cols = scrambled.as_ref().expect("net plans carry scrambled columns");
                    for (c, col) in cols.iter().enumerate() {
                        let mut word = shift_w[c];
                        let mut bits = pt;
                        let mut b = 0usize;
                        while bits != 0 {
                            if bits & 1 == 1 {
                                word ^= col[b];
                            }
                            bits >>= 1;
                            b += 1;
                        }
                        u[c] = word_to_unit(word);
                    }
                }
            }
            let ok = step_in_place(&plan.net, &mut next[i], &u, tau, &mut counts)?;
            if !ok {
                negative_events += 1;
                if abort {
                    return Err(SimError::NegativeState { step: j as u32 });
                }
            }
        }
        core::mem::swap(&mut states, &mut next);
    }

    let inv_n = 1.0 / n as f64;
    let means = plan
        .gs
        .iter()
        .map(|g| states.iter().map(|x| g.eval(x)).sum::<f64>() * inv_n)
        .collect();
    Ok(RunOutcome {
        means,
        negative_events,
    })
}

/// One randomized pass over the array; returns the estimate for the plan's
/// first functional. `run_once(plan, s)` reproduces replication 0 of a plan
/// seeded with `s`.
pub fn run_once(plan: &ArrayRqmcPlan, seed: u64) -> Result<f64, SimError> {
    let mut rng = RngStream::stream(seed, 1);
    Ok(run_once_with_stream(plan, &mut rng)?.means[0])
}

/// m independent replications; mean and empirical variance of the replicate
/// estimates for the plan's first functional.
pub fn run_replicated(plan: &ArrayRqmcPlan) -> Result<EstimatorOutput, SimError> {
    Ok(run_replicated_multi(plan)?.swap_remove(0))
}

/// Replicated run reporting one estimator per plan functional; all outputs
/// share the same chains, randomizations, and elapsed time.
pub fn run_replicated_multi(plan: &ArrayRqmcPlan) -> Result<Vec<EstimatorOutput>, SimError> {
    let sw = Stopwatch::start();
    let mut acc = Welford::new(plan.gs.len());
    let mut negative_events = 0u64;
    for r in 0..plan.m {
        let mut rng = RngStream::stream(plan.seed, r as u64 + 1);
        let outcome = run_once_with_stream(plan, &mut rng)?;
        acc.push(&outcome.means);
        negative_events += outcome.negative_events;
    }
    let elapsed = sw.seconds();
    Ok((0..plan.gs.len())
        .map(|t| EstimatorOutput {
            mean: acc.mean(t),
            variance: acc.variance(t),
            n: plan.points.n(),
            m: plan.m,
            elapsed,
            negative_events,
        })
        .collect())
}
