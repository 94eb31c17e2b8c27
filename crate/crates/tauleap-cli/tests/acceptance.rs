//! Acceptance gate for the estimator stack: one test per shipped guarantee,
//! each printing `ACCEPTANCE <k> (<label>): PASS|FAIL - <details>` before
//! asserting. The runs are deterministic (fixed seeds) but heavy; run the
//! gate alone with
//!
//! ```text
//! cargo test -p tauleap-cli --test acceptance -- --nocapture --test-threads=1
//! ```

use std::fs;
use std::path::PathBuf;

use tauleap::arrayrqmc::{run_replicated, run_replicated_multi, ArrayRqmcPlan};
use tauleap::chain::{crqmc_estimate, mc_estimate, mc_estimate_multi};
use tauleap::model::{builtin_model, BuiltinModel, StateVector};
use tauleap::points::{
    lattice_search, rng_stream, DigitalNetB2, LatticeRule, PointSet, WeightsSpec,
};
use tauleap::sampling::poisson_inverse;
use tauleap::sort::{
    average_oslaif, hilbert_index, oslaif, sort_by_importance, ImportanceFunction, Sorter,
};
use tauleap::{EstimatorOutput, Functional};
use tauleap_cli::experiment::{
    rows_to_csv, run_experiment, ExperimentConfig, Family, Method, RunOptions,
};
use tauleap_cli::metrics::{fit_beta, vrf};

fn check(k: u32, label: &str, pass: bool, details: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {k} ({label}): {verdict} - {details}");
    assert!(pass, "ACCEPTANCE {k} ({label}) failed: {details}");
}

fn directions_text() -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sobol-directions.txt");
    fs::read_to_string(&path).expect("shipped direction-number file")
}

/// CBC-searched generating vectors (product weights, rho = 0.6), frozen so
/// the gate does not repeat the searches at large n.
const LAT3: [(u32, [u64; 3]); 7] = [
    (10, [1, 275, 167]),
    (11, [1, 857, 269]),
    (12, [1, 1557, 1741]),
    (13, [1, 2431, 3739]),
    (14, [1, 6229, 2691]),
    (15, [1, 12031, 14297]),
    (16, [1, 19463, 8279]),
];
const LAT7: [u64; 7] = [1, 12031, 14297, 677, 6719, 15787, 10149];

fn lat3(k: u32, baker: bool) -> PointSet {
    let (_, a) = LAT3.iter().find(|(kk, _)| *kk == k).expect("frozen k");
    PointSet::Lattice {
        rule: LatticeRule::new(1 << k, a.to_vec()).unwrap(),
        baker,
    }
}

fn net(text: &str, dim: usize, k: u32) -> PointSet {
    PointSet::Net(DigitalNetB2::from_direction_text(text, dim, k).unwrap())
}

fn model(name: &str) -> BuiltinModel {
    builtin_model(name).unwrap()
}

fn mc(m: &BuiltinModel, n: u64, seed: u64) -> EstimatorOutput {
    let x0 = StateVector::new(m.x0.clone());
    mc_estimate(&m.net, &x0, &m.config, &m.g, n, seed).unwrap()
}

/// Array plan sorted by the one-step conditional mean of the model's output.
fn importance_plan(m: &BuiltinModel, points: PointSet, reps: u32, seed: u64) -> ArrayRqmcPlan {
    let h = oslaif(&m.net, &m.g, m.config.tau()).unwrap();
    ArrayRqmcPlan::new(
        m.net.clone(),
        StateVector::new(m.x0.clone()),
        m.config,
        m.g,
        Sorter::Importance(h),
        points,
        reps,
        seed,
    )
    .unwrap()
}

fn rate_over_grid(m: &BuiltinModel, points: impl Fn(u32) -> PointSet, seed0: u64) -> f64 {
    let mut pairs = Vec::new();
    for k in 10..=16u32 {
        let out = run_replicated(&importance_plan(m, points(k), 20, seed0 + k as u64)).unwrap();
        assert!(out.variance > 0.0, "zero variance at k={k}");
        pairs.push((1u64 << k, out.variance));
    }
    fit_beta(&pairs).unwrap().beta_hat
}

#[test]
fn a1_mc_baselines_match_reference_statistics() {
    let mut fails = Vec::new();
    let mut parts = Vec::new();

    // Two-species isomerization: mean 100 within 3 SE, variance 107.8 +- 10%.
    let out = mc(&model("rev-iso"), 1_000_000, 1);
    let se = (out.variance / out.n as f64).sqrt();
    if (out.mean - 100.0).abs() > 3.0 * se {
        fails.push(format!("rev-iso mean {:.4} off 100 by >3 SE", out.mean));
    }
    if (out.variance / 107.8 - 1.0).abs() > 0.10 {
        fails.push(format!("rev-iso variance {:.1} outside 107.8 +- 10%", out.variance));
    }
    parts.push(format!("rev-iso {:.3}/{:.1}", out.mean, out.variance));

    // Bistable production-degradation: mean 309.0 within 4 SE, variance
    // 44575 +- 10%.
    let out = mc(&model("schloegl-1d"), 1_000_000, 1);
    let se = (out.variance / out.n as f64).sqrt();
    if (out.mean - 309.0).abs() > 4.0 * se {
        fails.push(format!("schloegl-1d mean {:.3} off 309.0 by >4 SE", out.mean));
    }
    if (out.variance / 44_575.0 - 1.0).abs() > 0.10 {
        fails.push(format!("schloegl-1d variance {:.0} outside 44575 +- 10%", out.variance));
    }
    parts.push(format!("schloegl-1d {:.2}/{:.0}", out.mean, out.variance));

    // Kinase cascade: mean 19663 within 1%, variance 1775 +- 10%.
    let out = mc(&model("pka"), 100_000, 1);
    if (out.mean / 19_663.0 - 1.0).abs() > 0.01 {
        fails.push(format!("pka mean {:.1} outside 19663 +- 1%", out.mean));
    }
    if (out.variance / 1_775.0 - 1.0).abs() > 0.10 {
        fails.push(format!("pka variance {:.0} outside 1775 +- 10%", out.variance));
    }
    parts.push(format!("pka {:.1}/{:.0}", out.mean, out.variance));

    // Saturating production: mean 61512 within 1%, variance 55398 +- 10%.
    let out = mc(&model("enzyme-qssa"), 100_000, 1);
    if (out.mean / 61_512.0 - 1.0).abs() > 0.01 {
        fails.push(format!("enzyme-qssa mean {:.1} outside 61512 +- 1%", out.mean));
    }
    if (out.variance / 55_398.0 - 1.0).abs() > 0.10 {
        fails.push(format!("enzyme-qssa variance {:.0} outside 55398 +- 10%", out.variance));
    }
    parts.push(format!("enzyme-qssa {:.1}/{:.0}", out.mean, out.variance));

    let details = if fails.is_empty() {
        format!("mean/variance: {}", parts.join(", "))
    } else {
        fails.join("; ")
    };
    check(1, "mc baselines", fails.is_empty(), details);
}

#[test]
fn a2_array_variance_anchors() {
    let m = model("rev-iso");
    let dirs = directions_text();

    let lat = run_replicated(&importance_plan(&m, lat3(13, false), 100, 2107))
        .unwrap()
        .variance
        .log2();
    let sob = run_replicated(&importance_plan(&m, net(&dirs, 3, 13), 100, 2113))
        .unwrap()
        .variance
        .log2();

    let pass = (lat - (-16.34)).abs() <= 0.6 && (sob - (-16.56)).abs() <= 0.6;
    check(
        2,
        "variance anchors at n=2^13",
        pass,
        format!("lat+s log2 var {lat:.3} (target -16.34 +- 0.6), net+lms+s {sob:.3} (target -16.56 +- 0.6)"),
    );
}

#[test]
fn a3_convergence_rates_beat_monte_carlo() {
    let dirs = directions_text();

    let beta_lat = rate_over_grid(&model("rev-iso"), |k| lat3(k, false), 3301);
    let beta_net = rate_over_grid(&model("schloegl-1d"), |k| net(&dirs, 5, k), 3601);

    // The analytic MC series decays at rate 1 exactly, by construction.
    let config = ExperimentConfig {
        model: "rev-iso".to_string(),
        g: None,
        methods: vec![Method::Mc],
        families: vec![],
        sorts: vec![],
        ns: (10..=16).map(|k| 1u64 << k).collect(),
        m: 20,
        mc_baseline_n: 20_000,
        seed: 11,
        rho: None,
    };
    let rows = run_experiment(&config, &RunOptions::default()).unwrap().rows;
    let mc_exact = rows.iter().all(|r| r.beta_hat == Some(1.0))
        && rows
            .iter()
            .all(|r| r.var_mu_hat * r.n as f64 == rows[0].var_mu_hat * rows[0].n as f64);

    let pass = beta_lat >= 1.5 && beta_net >= 1.3 && mc_exact;
    check(
        3,
        "convergence rates",
        pass,
        format!(
            "rev-iso lat+s beta {beta_lat:.3} (>= 1.5), schloegl-1d net+lms+s beta {beta_net:.3} (>= 1.3), mc series exact rate 1: {mc_exact}"
        ),
    );
}

#[test]
fn a4_vrf_ordering_at_n_2_16() {
    let dirs = directions_text();
    let n = 1u64 << 16;
    let mut parts = Vec::new();
    let mut pass = true;

    for name in ["rev-iso", "schloegl-1d"] {
        let m = model(name);
        let d = m.net.n_reactions();
        let baseline = mc(&m, 100_000, 4700);

        let arr = run_replicated(&importance_plan(&m, net(&dirs, 1 + d, 16), 20, 4701)).unwrap();
        let vrf_arr = vrf(baseline.variance, n, arr.variance).unwrap();

        let crq_dim = m.config.steps() as usize * d;
        let x0 = StateVector::new(m.x0.clone());
        let crq = crqmc_estimate(
            &m.net,
            &x0,
            &m.config,
            &m.g,
            &net(&dirs, crq_dim, 16),
            20,
            4702,
        )
        .unwrap();
        let vrf_crq = vrf(baseline.variance, n, crq.variance).unwrap();

        pass &= vrf_arr >= 100.0 && vrf_arr > vrf_crq;
        parts.push(format!("{name} array {vrf_arr:.0} vs classical {vrf_crq:.0}"));
    }

    check(
        4,
        "vrf ordering at n=2^16",
        pass,
        format!("VRF {} (array >= 100 and > classical)", parts.join(", ")),
    );
}

#[test]
fn a5_normal_mode_rates_and_vrf() {
    let m = model("rev-iso-normal");
    let dirs = directions_text();

    let beta_sob = rate_over_grid(&m, |k| net(&dirs, 3, k), 5501);
    let beta_bak = rate_over_grid(&m, |k| lat3(k, true), 5601);

    let baseline = mc(&m, 100_000, 5700);
    let out = run_replicated(&importance_plan(&m, lat3(16, true), 20, 5777)).unwrap();
    let vrf_bak = vrf(baseline.variance, 1u64 << 16, out.variance).unwrap();

    let pass = beta_sob >= 1.8 && beta_bak >= 1.8 && vrf_bak >= 1e4;
    check(
        5,
        "normal-mode rates",
        pass,
        format!(
            "net+lms+s beta {beta_sob:.3}, lat+s+b beta {beta_bak:.3} (both >= 1.8), lat+s+b VRF at 2^16 {vrf_bak:.0} (>= 10000)"
        ),
    );
}

/// Reference inversion by direct CDF summation.
fn poisson_inverse_by_summation(lambda: f64, u: f64) -> f64 {
    let mut x = 0.0f64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while cdf < u {
        x += 1.0;
        p *= lambda / x;
        cdf += p;
    }
    x
}

/// phi(x) for the alpha = 2 discrepancy kernel: 2 pi^2 B_2(x).
fn phi2(x: f64) -> f64 {
    2.0 * std::f64::consts::PI.powi(2) * (x * x - x + 1.0 / 6.0)
}

fn d2_subset_sum(rule: &LatticeRule, rho: f64) -> f64 {
    let (n, dim) = (rule.n(), rule.dim());
    let mut acc = 0.0;
    for mask in 1u32..(1 << dim) {
        let mut inner = 0.0;
        for i in 0..n {
            let mut prod = 1.0;
            for j in 0..dim {
                if (mask >> j) & 1 == 1 {
                    prod *= phi2(rule.coordinate(i, j));
                }
            }
            inner += prod;
        }
        acc += rho.powi(mask.count_ones() as i32) * inner / n as f64;
    }
    acc
}

/// A shifted lattice marginal stays equispaced: circular gaps all exactly
/// 1/n.
fn equidistant_marginal(points: &PointSet, seed: u64) -> bool {
    let n = points.n();
    let r = points.draw_randomization(&mut rng_stream(seed, 0));
    for j in 0..points.dim() {
        let mut col: Vec<f64> = (0..n).map(|i| points.randomize(&r, i, j).unwrap()).collect();
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for i in 0..n as usize {
            let gap = if i + 1 < n as usize {
                col[i + 1] - col[i]
            } else {
                col[0] + 1.0 - col[i]
            };
            if (gap - 1.0 / n as f64).abs() > 1e-12 {
                return false;
            }
        }
    }
    true
}

/// Scrambling moves points within their cells, so the marginal law is one
/// point per cell of width 1/n in every dimension.
fn stratified_marginal(points: &PointSet, seed: u64) -> bool {
    let n = points.n();
    let r = points.draw_randomization(&mut rng_stream(seed, 0));
    for j in 0..points.dim() {
        let mut cells: Vec<u64> = (0..n)
            .map(|i| {
                let u = points.randomize(&r, i, j).unwrap();
                ((u * n as f64) as u64).min(n - 1)
            })
            .collect();
        cells.sort_unstable();
        if cells.iter().enumerate().any(|(i, &c)| c != i as u64) {
            return false;
        }
    }
    true
}

#[test]
fn a6_property_suites() {
    let dirs = directions_text();
    let mut fails: Vec<String> = Vec::new();

    // Poisson inversion agrees with direct CDF summation.
    'poisson: for lambda in [0.25, 1.0, 4.0, 19.37, 101.7] {
        for i in 1..400u32 {
            let u = i as f64 / 400.0;
            let got = poisson_inverse(lambda, u).unwrap();
            let want = poisson_inverse_by_summation(lambda, u);
            if got != want {
                fails.push(format!("poisson inversion: lambda={lambda} u={u} {got} != {want}"));
                break 'poisson;
            }
        }
    }

    // Unrandomized one-dimensional projections are exactly {0, 1/n, ..}.
    let rule = lattice_search(64, 3, &WeightsSpec::default()).unwrap();
    let lat = PointSet::Lattice { rule, baker: false };
    let sob = net(&dirs, 3, 6);
    for (label, points) in [("lattice", &lat), ("net", &sob)] {
        for j in 0..3 {
            let mut col: Vec<f64> = (0..64).map(|i| points.coordinate(i, j)).collect();
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if (0..64).any(|i| (col[i as usize] - i as f64 / 64.0).abs() > 1e-15) {
                fails.push(format!("{label} projection law violated in dim {j}"));
            }
        }
    }
    // Randomization keeps marginals stratified (one point per cell).
    if !equidistant_marginal(&lat, 606) {
        fails.push("shifted lattice marginal not equidistant".to_string());
    }
    if !stratified_marginal(&sob, 607) {
        fails.push("scrambled net marginal not stratified".to_string());
    }

    // Discrepancy product form equals the subset sum.
    let w = WeightsSpec::default();
    for (n, a) in [
        (8u64, vec![1u64, 5, 3]),
        (16, vec![1, 7, 5, 11]),
        (64, vec![1, 19, 27]),
        (63, vec![1, 11, 40, 23]),
    ] {
        let rule = LatticeRule::new(n, a).unwrap();
        let fast = tauleap::points::p_alpha_discrepancy(&rule, &w).unwrap();
        let slow = d2_subset_sum(&rule, w.rho);
        if (fast - slow).abs() / slow.abs() > 1e-12 {
            fails.push(format!("discrepancy mismatch at n={n}: {fast} vs {slow}"));
        }
    }

    // Sorter laws: permutation, tie stability, monotone-transform invariance.
    let m = model("rev-iso");
    let states: Vec<Vec<f64>> = (0..40)
        .map(|i| vec![60.0 + ((i * 17) % 40) as f64, 1.0e6 - i as f64])
        .collect();
    let h = oslaif(&m.net, &m.g, m.config.tau()).unwrap();
    let perm = sort_by_importance(&states, &h).unwrap();
    let mut seen = perm.clone();
    seen.sort_unstable();
    if seen != (0..states.len()).collect::<Vec<_>>() {
        fails.push("sorter output is not a permutation".to_string());
    }
    let values: Vec<f64> = states.iter().map(|x| h.eval(x).unwrap()).collect();
    if perm.windows(2).any(|w| values[w[0]] > values[w[1]]) {
        fails.push("sorter output not ascending in importance".to_string());
    }
    let argmax = (0..values.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    if *perm.last().unwrap() != argmax {
        fails.push("argmax state not last after sorting".to_string());
    }
    let ties: Vec<Vec<f64>> = [5.0, 5.0, 3.0, 3.0, 9.0].iter().map(|&v| vec![v]).collect();
    let tie_perm = sort_by_importance(&ties, &ImportanceFunction::Coordinate { i: 0 }).unwrap();
    if tie_perm != vec![2, 3, 0, 1, 4] {
        fails.push(format!("tie stability violated: {tie_perm:?}"));
    }
    // Squaring nonnegative keys is monotone, so the order is unchanged.
    let first: Vec<f64> = states.iter().map(|x| x[0]).collect();
    let by_first = sort_by_importance(&states, &ImportanceFunction::Coordinate { i: 0 }).unwrap();
    let mut by_square: Vec<usize> = (0..first.len()).collect();
    by_square.sort_by(|&a, &b| (first[a] * first[a]).total_cmp(&(first[b] * first[b])).then(a.cmp(&b)));
    if by_first != by_square {
        fails.push("order changed under monotone transform of keys".to_string());
    }

    // One-step look-ahead values match the moment formulas exactly.
    let tau = m.config.tau();
    let h2 = oslaif(&m.net, &Functional::Power(0, 2), tau).unwrap();
    for x1 in [60.0, 83.0, 100.0, 141.0] {
        let x = vec![x1, 1.0e6];
        let (mut mean, mut var) = (x[0], 0.0);
        for k in 0..m.net.n_reactions() {
            let z = m.net.effective_zeta(k)[0];
            let lambda = m.net.propensity(k, &x).unwrap() * tau;
            mean += z * lambda;
            var += z * z * lambda;
        }
        if (h.eval(&x).unwrap() - mean).abs() > 1e-9 {
            fails.push(format!("one-step mean mismatch at x1={x1}"));
        }
        if (h2.eval(&x).unwrap() - (mean * mean + var)).abs() > 1e-6 {
            fails.push(format!("one-step second moment mismatch at x1={x1}"));
        }
    }

    // Space-filling curve: consecutive indices land in adjacent cells.
    for (dim, bits) in [(2usize, 5u32), (3, 3), (3, 5)] {
        let cells = 1u64 << (dim as u32 * bits);
        let side = 1u64 << bits;
        let mut axes_of = vec![None; cells as usize];
        let mut coords = vec![0u64; dim];
        for cell in 0..cells {
            for (j, c) in coords.iter_mut().enumerate() {
                *c = (cell >> (j as u32 * bits)) & (side - 1);
            }
            let idx = hilbert_index(&coords, bits);
            if axes_of[idx as usize].replace(coords.clone()).is_some() {
                fails.push(format!("curve index collision, dim={dim} bits={bits}"));
            }
        }
        for pair in axes_of.windows(2) {
            let (Some(a), Some(b)) = (&pair[0], &pair[1]) else {
                fails.push(format!("curve not a bijection, dim={dim} bits={bits}"));
                break;
            };
            let l1: u64 = a.iter().zip(b).map(|(x, y)| x.abs_diff(*y)).sum();
            if l1 != 1 {
                fails.push(format!("non-adjacent curve step, dim={dim} bits={bits}"));
                break;
            }
        }
    }

    // The array estimator agrees with plain MC on every built-in model.
    let builtin_runs: [(&str, u64); 7] = [
        ("rev-iso", 20_000),
        ("rev-iso-normal", 20_000),
        ("schloegl-1d", 20_000),
        ("schloegl-2d", 20_000),
        ("pka", 20_000),
        ("enzyme-qssa", 10_000),
        ("enzyme-qssa-unit", 10_000),
    ];
    for (i, (name, n_mc)) in builtin_runs.iter().enumerate() {
        let m = model(name);
        let seed = 6601 + i as u64;
        let x0 = StateVector::new(m.x0.clone());
        let mc = mc_estimate(&m.net, &x0, &m.config, &m.g, *n_mc, seed ^ 0x5555).unwrap();
        let points = net(&dirs, 1 + m.net.n_reactions(), 10);
        let out = run_replicated(&importance_plan(&m, points, 8, seed)).unwrap();
        let se = (mc.variance / *n_mc as f64 + out.variance / 8.0).sqrt();
        if (out.mean - mc.mean).abs() > 4.0 * se {
            fails.push(format!(
                "{name}: array mean {:.4} vs MC {:.4} beyond 4 SE ({:.4})",
                out.mean, mc.mean, se
            ));
        }
    }

    // Identical output regardless of worker-pool size.
    let config = ExperimentConfig {
        model: "rev-iso".to_string(),
        g: None,
        methods: vec![Method::Mc, Method::Arrayrqmc],
        families: vec![Family::Lat],
        sorts: vec![tauleap::sort::SortSpec::Oslaif],
        ns: vec![64, 128, 256],
        m: 4,
        mc_baseline_n: 2_000,
        seed: 99,
        rho: None,
    };
    let base = rows_to_csv(&run_experiment(&config, &RunOptions::default()).unwrap().rows).unwrap();
    for threads in [1usize, 2] {
        let opts = RunOptions {
            threads: Some(threads),
            ..RunOptions::default()
        };
        let again = rows_to_csv(&run_experiment(&config, &opts).unwrap().rows).unwrap();
        if base != again {
            fails.push(format!("output differs with {threads} worker threads"));
        }
    }

    let details = if fails.is_empty() {
        "inversion oracle, projections, marginals, discrepancy, sorter laws, look-ahead \
         exactness, curve adjacency, unbiasedness on 7 models, thread reproducibility"
            .to_string()
    } else {
        fails.join("; ")
    };
    check(6, "property suites", fails.is_empty(), details);
}

#[test]
fn a7_multi_output_shared_sort() {
    let m = model("pka");
    let gs: Vec<Functional> = (0..6usize).map(Functional::Coordinate).collect();
    let x0 = StateVector::new(m.x0.clone());
    let n = 1u64 << 15;

    let baseline = mc_estimate_multi(&m.net, &x0, &m.config, &gs, 100_000, 7700).unwrap();

    let points = || PointSet::Lattice {
        rule: LatticeRule::new(n, LAT7.to_vec()).unwrap(),
        baker: false,
    };

    let shared_h = average_oslaif(&m.net, &gs, m.config.tau()).unwrap();
    let shared_plan = ArrayRqmcPlan::with_outputs(
        m.net.clone(),
        x0.clone(),
        m.config,
        gs.clone(),
        Sorter::Importance(shared_h),
        points(),
        12,
        7701,
    )
    .unwrap();
    let shared = run_replicated_multi(&shared_plan).unwrap();
    let shared_vrf: Vec<f64> = (0..6)
        .map(|j| vrf(baseline[j].variance, n, shared[j].variance).unwrap())
        .collect();

    let mut adapted_vrf = Vec::new();
    for (j, g) in gs.iter().enumerate() {
        let h = oslaif(&m.net, g, m.config.tau()).unwrap();
        let plan = ArrayRqmcPlan::new(
            m.net.clone(),
            x0.clone(),
            m.config,
            *g,
            Sorter::Importance(h),
            points(),
            12,
            7711 + j as u64,
        )
        .unwrap();
        let out = run_replicated(&plan).unwrap();
        adapted_vrf.push(vrf(baseline[j].variance, n, out.variance).unwrap());
    }

    let min_shared = shared_vrf.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean_shared = shared_vrf.iter().sum::<f64>() / 6.0;
    let mean_adapted = adapted_vrf.iter().sum::<f64>() / 6.0;
    let ratio = mean_adapted / mean_shared;

    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.0}"))
            .collect::<Vec<_>>()
            .join("/")
    };
    let pass = min_shared >= 10.0 && (1.2..=10.0).contains(&ratio);
    check(
        7,
        "multi-output shared sort",
        pass,
        format!(
            "shared VRF {} (min {min_shared:.0} >= 10), adapted VRF {}, adapted/shared mean ratio {ratio:.2} in [1.2, 10]",
            fmt(&shared_vrf),
            fmt(&adapted_vrf)
        ),
    );
}
