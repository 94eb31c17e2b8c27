//! Experiment grids: expands a method x point-family x sorter x n
//! configuration into cells, runs the cells on a worker pool, and assembles
//! a CSV table plus a JSON summary.
//!
//! All randomness derives from the config seed and the cell's position in
//! the expanded grid, so results do not depend on worker count or
//! scheduling. Wall-clock timing is off by default for the same reason:
//! with `timing` disabled a rerun of the same config is byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tauleap::arrayrqmc::{run_replicated, ArrayRqmcPlan};
use tauleap::chain::{crqmc_estimate, mc_estimate};
use tauleap::model::StateVector;
use tauleap::points::{DigitalNetB2, PointSet, WeightsSpec};
use tauleap::sort::{build_sorter, SortSpec};
use tauleap::EstimatorOutput;

use crate::io::{lattice_for, load_directions, GSpec, ResolvedModel};
use crate::metrics::{fit_beta, vrf, FitResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[derive(clap::ValueEnum)]
pub enum Method {
    Mc,
    Crqmc,
    Arrayrqmc,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Crqmc => "crqmc",
            Method::Arrayrqmc => "arrayrqmc",
        }
    }
}

/// Point family plus its randomization, fixed per family: lattices get a
/// random shift (optionally followed by the baker fold), nets get a linear
/// matrix scramble plus digital shifts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[derive(clap::ValueEnum)]
pub enum Family {
    #[serde(rename = "lat")]
    Lat,
    #[serde(rename = "lat-baker")]
    LatBaker,
    #[serde(rename = "net")]
    Net,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Lat => "lat+s",
            Family::LatBaker => "lat+s+b",
            Family::Net => "net+lms+s",
        }
    }
}

/// Short column label for a sorter config.
pub fn sort_label(spec: &SortSpec) -> String {
    match spec {
        SortSpec::Oslaif => "oslaif".to_string(),
        SortSpec::Coordinate { coord } => format!("coord:{coord}"),
        SortSpec::Batch { order, exponents } => {
            let o: Vec<String> = order.iter().map(|v| v.to_string()).collect();
            let e: Vec<String> = exponents.iter().map(|v| v.to_string()).collect();
            format!("batch:{}:{}", o.join(","), e.join(","))
        }
        SortSpec::Hilbert { bits, pilot_n } => {
            let mut label = "hilbert".to_string();
            if let Some(b) = bits {
                label.push_str(&format!(":bits={b}"));
            }
            if let Some(p) = pilot_n {
                label.push_str(&format!(":pilot={p}"));
            }
            label
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Built-in model name or model document path.
    pub model: String,
    /// Output functional; defaults to the model's own.
    #[serde(default)]
    pub g: Option<GSpec>,
    pub methods: Vec<Method>,
    /// Point families for crqmc and arrayrqmc cells.
    #[serde(default)]
    pub families: Vec<Family>,
    /// Sorter configurations for arrayrqmc cells.
    #[serde(default)]
    pub sorts: Vec<SortSpec>,
    /// Path counts, each >= 2; nets additionally need powers of two.
    pub ns: Vec<u64>,
    /// Replications per randomized cell.
    pub m: u32,
    /// Path count for the plain-MC reference run.
    pub mc_baseline_n: u64,
    pub seed: u64,
    /// Weight parameter for lattice searches; defaults to the library's.
    #[serde(default)]
    pub rho: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            bail!("methods list is empty");
        }
        if self.ns.is_empty() {
            bail!("n list is empty");
        }
        if let Some(&n) = self.ns.iter().find(|&&n| n < 2) {
            bail!("every n must be >= 2, got {n}");
        }
        if self.m < 2 {
            bail!("m must be >= 2, got {}", self.m);
        }
        if self.mc_baseline_n < 2 {
            bail!("mc_baseline_n must be >= 2, got {}", self.mc_baseline_n);
        }
        let needs_points = self
            .methods
            .iter()
            .any(|m| matches!(m, Method::Crqmc | Method::Arrayrqmc));
        if needs_points && self.families.is_empty() {
            bail!("crqmc/arrayrqmc methods need at least one point family");
        }
        if self.methods.contains(&Method::Arrayrqmc) && self.sorts.is_empty() {
            bail!("arrayrqmc needs at least one sorter config");
        }
        Ok(())
    }

    pub fn weights(&self) -> Result<WeightsSpec> {
        match self.rho {
            None => Ok(WeightsSpec::default()),
            Some(rho) => WeightsSpec::new(rho).map_err(|e| anyhow::anyhow!("{e}")),
        }
    }
}

/// One line of the results table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Row {
    pub model: String,
    pub g: String,
    pub method: String,
    pub pointset: String,
    pub sort: String,
    pub n: u64,
    pub m: u32,
    pub mean: f64,
    pub var_mu_hat: f64,
    pub beta_hat: Option<f64>,
    pub vrf: Option<f64>,
    pub eif: Option<f64>,
    pub elapsed: f64,
    pub negative_events: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BaselineSummary {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub elapsed: f64,
    pub negative_events: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesSummary {
    pub method: String,
    pub pointset: String,
    pub sort: String,
    /// Present when >= 3 cells of the series produced positive variance.
    pub fit: Option<FitResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellFailure {
    pub method: String,
    pub pointset: String,
    pub sort: String,
    pub n: u64,
    pub error: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub model: String,
    pub g: String,
    pub seed: u64,
    pub m: u32,
    pub timing: bool,
    pub mc_baseline: BaselineSummary,
    pub series: Vec<SeriesSummary>,
    pub failures: Vec<CellFailure>,
}

pub struct RunArtifacts {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Record wall-clock timing and EIF. Off by default so reruns of the
    /// same config produce byte-identical output.
    pub timing: bool,
    /// Worker threads; None uses the global pool.
    pub threads: Option<usize>,
    /// Direction-number file override.
    pub directions: Option<PathBuf>,
    /// Lattice cache directory.
    pub lattice_cache: Option<PathBuf>,
}

/// Identity of a variance series within the grid.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct SeriesKey {
    method: &'static str,
    pointset: String,
    sort: String,
}

struct Cell {
    idx: usize,
    series: SeriesKey,
    method: Method,
    family: Option<Family>,
    sort: Option<SortSpec>,
    n: u64,
}

/// Mixes a cell index into the config seed. The baseline runs on the config
/// seed itself; grid cells get distinct nonzero offsets.
fn cell_seed(seed: u64, idx: usize) -> u64 {
    seed ^ (idx as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn expand_cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    let mut idx = 0;
    for &method in &config.methods {
        match method {
            Method::Mc => {} // derived from the baseline, no cells
            Method::Crqmc => {
                for &family in &config.families {
                    for &n in &config.ns {
                        cells.push(Cell {
                            idx,
                            series: SeriesKey {
                                method: method.label(),
                                pointset: family.label().to_string(),
                                sort: "-".to_string(),
                            },
                            method,
                            family: Some(family),
                            sort: None,
                            n,
                        });
                        idx += 1;
                    }
                }
            }
            Method::Arrayrqmc => {
                for &family in &config.families {
                    for sort in &config.sorts {
                        for &n in &config.ns {
                            cells.push(Cell {
                                idx,
                                series: SeriesKey {
                                    method: method.label(),
                                    pointset: family.label().to_string(),
                                    sort: sort_label(sort),
                                },
                                method,
                                family: Some(family),
                                sort: Some(sort.clone()),
                                n,
                            });
                            idx += 1;
                        }
                    }
                }
            }
        }
    }
    cells
}

fn build_points(
    family: Family,
    n: u64,
    dim: usize,
    weights: &WeightsSpec,
    directions: Option<&str>,
    cache_dir: Option<&Path>,
) -> Result<PointSet> {
    match family {
        Family::Lat | Family::LatBaker => {
            let rule = lattice_for(n, dim, weights, cache_dir)?;
            Ok(PointSet::Lattice {
                rule,
                baker: family == Family::LatBaker,
            })
        }
        Family::Net => {
            if !n.is_power_of_two() {
                bail!("digital nets need a power-of-two n, got {n}");
            }
            let text = directions.expect("directions loaded for net cells");
            let k = n.trailing_zeros();
            let net = DigitalNetB2::from_direction_text(text, dim, k)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            Ok(PointSet::Net(net))
        }
    }
}

fn run_cell(
    cell: &Cell,
    model: &ResolvedModel,
    config: &ExperimentConfig,
    weights: &WeightsSpec,
    directions: Option<&str>,
    cache_dir: Option<&Path>,
) -> Result<EstimatorOutput> {
    let d = model.net.n_reactions();
    let seed = cell_seed(config.seed, cell.idx);
    let x0 = StateVector::new(model.x0.clone());
    match cell.method {
        Method::Mc => unreachable!("mc has no cells"),
        Method::Crqmc => {
            let dim = model.config.steps() as usize * d;
            let points = build_points(
                cell.family.expect("crqmc cell has a family"),
                cell.n,
                dim,
                weights,
                directions,
                cache_dir,
            )?;
            crqmc_estimate(
                &model.net,
                &x0,
                &model.config,
                &model.g,
                &points,
                config.m,
                seed,
            )
            .map_err(|e| anyhow::anyhow!("{e}"))
        }
        Method::Arrayrqmc => {
            let spec = cell.sort.as_ref().expect("arrayrqmc cell has a sorter");
            let sorter = build_sorter(spec, &model.net, &[model.g], model.config.tau())
                .map_err(|e| anyhow::anyhow!("sorter: {e}"))?;
            let dim = sorter.l() + d;
            let points = build_points(
                cell.family.expect("arrayrqmc cell has a family"),
                cell.n,
                dim,
                weights,
                directions,
                cache_dir,
            )?;
            let plan = ArrayRqmcPlan::new(
                model.net.clone(),
                x0,
                model.config,
                model.g,
                sorter,
                points,
                config.m,
                seed,
            )
            .map_err(|e| anyhow::anyhow!("{e}"))?;
            run_replicated(&plan).map_err(|e| anyhow::anyhow!("{e}"))
        }
    }
}

/// Runs the whole grid. The MC baseline runs first (once); each remaining
/// cell runs independently on the worker pool, and a cell failure is
/// reported in the summary without aborting the rest.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunArtifacts> {
    config.validate()?;
    let model = crate::io::resolve_model(&config.model)?;
    let model = ResolvedModel {
        g: config.g.map(GSpec::to_functional).unwrap_or(model.g),
        ..model
    };
    let weights = config.weights()?;
    let g_label = GSpec::from_functional(model.g).label();

    let needs_directions = config.families.contains(&Family::Net)
        && config
            .methods
            .iter()
            .any(|m| matches!(m, Method::Crqmc | Method::Arrayrqmc));
    let directions = if needs_directions {
        Some(load_directions(opts.directions.as_deref())?)
    } else {
        None
    };
    let cache_dir = opts.lattice_cache.as_deref();

    let x0 = StateVector::new(model.x0.clone());
    let baseline = mc_estimate(
        &model.net,
        &x0,
        &model.config,
        &model.g,
        config.mc_baseline_n,
        config.seed,
    )
    .map_err(|e| anyhow::anyhow!("mc baseline: {e}"))?;
    let per_path_time = baseline.elapsed / config.mc_baseline_n as f64;

    let cells = expand_cells(config);
    let run_all = || -> Vec<(usize, Result<EstimatorOutput>)> {
        cells
            .par_iter()
            .map(|cell| {
                (
                    cell.idx,
                    run_cell(cell, &model, config, &weights, directions.as_deref(), cache_dir),
                )
            })
            .collect()
    };
    let mut outcomes = match opts.threads {
        None => run_all(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .context("building worker pool")?
            .install(run_all),
    };
    outcomes.sort_by_key(|(idx, _)| *idx);

    let mut rows = Vec::new();
    let mut failures = Vec::new();

    // Derived MC series: the baseline mean with variance split analytically
    // across the n grid, so its decay rate is 1 by construction.
    if config.methods.contains(&Method::Mc) {
        for &n in &config.ns {
            let mc_var_mu = baseline.variance / n as f64;
            rows.push(Row {
                model: model.name.clone(),
                g: g_label.clone(),
                method: "mc".to_string(),
                pointset: "-".to_string(),
                sort: "-".to_string(),
                n,
                m: 1,
                mean: baseline.mean,
                var_mu_hat: mc_var_mu,
                beta_hat: Some(1.0),
                vrf: Some(1.0),
                eif: if opts.timing { Some(1.0) } else { None },
                elapsed: if opts.timing {
                    per_path_time * n as f64
                } else {
                    0.0
                },
                negative_events: baseline.negative_events,
            });
        }
    }

    for (cell, (idx, outcome)) in cells.iter().zip(&outcomes) {
        debug_assert_eq!(cell.idx, *idx);
        match outcome {
            Err(e) => failures.push(CellFailure {
                method: cell.series.method.to_string(),
                pointset: cell.series.pointset.clone(),
                sort: cell.series.sort.clone(),
                n: cell.n,
                error: format!("{e:#}"),
            }),
            Ok(out) => {
                let row_vrf = vrf(baseline.variance, cell.n, out.variance).ok();
                let eif = if opts.timing && out.elapsed > 0.0 {
                    let mc_time = per_path_time * cell.n as f64;
                    let method_time = out.elapsed / out.m as f64;
                    row_vrf.map(|v| v * mc_time / method_time)
                } else {
                    None
                };
                rows.push(Row {
                    model: model.name.clone(),
                    g: g_label.clone(),
                    method: cell.series.method.to_string(),
                    pointset: cell.series.pointset.clone(),
                    sort: cell.series.sort.clone(),
                    n: cell.n,
                    m: out.m,
                    mean: out.mean,
                    var_mu_hat: out.variance,
                    beta_hat: None,
                    vrf: row_vrf,
                    eif,
                    elapsed: if opts.timing { out.elapsed } else { 0.0 },
                    negative_events: out.negative_events,
                });
            }
        }
    }

    // Per-series decay rate, written onto every row of the series.
    let mut series_pairs: BTreeMap<SeriesKey, Vec<(u64, f64)>> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.method != "mc") {
        let key = SeriesKey {
            method: match row.method.as_str() {
                "crqmc" => "crqmc",
                _ => "arrayrqmc",
            },
            pointset: row.pointset.clone(),
            sort: row.sort.clone(),
        };
        if row.var_mu_hat > 0.0 {
            series_pairs.entry(key).or_default().push((row.n, row.var_mu_hat));
        }
    }
    let mut series = Vec::new();
    for (key, pairs) in &series_pairs {
        let fit = if pairs.len() >= 3 {
            fit_beta(pairs).ok()
        } else {
            None
        };
        if let Some(f) = fit {
            for row in rows.iter_mut().filter(|r| {
                r.method == key.method && r.pointset == key.pointset && r.sort == key.sort
            }) {
                row.beta_hat = Some(f.beta_hat);
            }
        }
        series.push(SeriesSummary {
            method: key.method.to_string(),
            pointset: key.pointset.clone(),
            sort: key.sort.clone(),
            fit,
        });
    }

    Ok(RunArtifacts {
        rows,
        summary: Summary {
            model: model.name.clone(),
            g: g_label,
            seed: config.seed,
            m: config.m,
            timing: opts.timing,
            mc_baseline: BaselineSummary {
                n: baseline.n,
                mean: baseline.mean,
                variance: baseline.variance,
                elapsed: if opts.timing { baseline.elapsed } else { 0.0 },
                negative_events: baseline.negative_events,
            },
            series,
            failures,
        },
    })
}

/// Serializes rows in the fixed column order used everywhere.
pub fn rows_to_csv(rows: &[Row]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    Ok(writer.into_inner()?)
}

/// Writes results.csv and summary.json under out_dir.
pub fn write_artifacts(artifacts: &RunArtifacts, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("results.csv");
    fs::write(&csv_path, rows_to_csv(&artifacts.rows)?)?;
    let json_path = out_dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&artifacts.summary)?;
    text.push('\n');
    fs::write(&json_path, text)?;
    Ok((csv_path, json_path))
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesRefit {
    pub method: String,
    pub pointset: String,
    pub sort: String,
    pub fit: FitResult,
    /// Largest relative disagreement between the emitted vrf column and the
    /// value recomputed from the MC rows in the same file; None without MC
    /// rows.
    pub vrf_discrepancy: Option<f64>,
}

/// Recomputes per-series fits (and audits the vrf column) from a results
/// file, independently of the summary written next to it.
pub fn refit_csv(path: &Path) -> Result<Vec<SeriesRefit>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {path:?}"))?;
    let rows: Vec<Row> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("parsing {path:?}"))?;

    let mc_var_by_n: BTreeMap<u64, f64> = rows
        .iter()
        .filter(|r| r.method == "mc")
        .map(|r| (r.n, r.var_mu_hat * r.n as f64))
        .collect();

    let mut grouped: BTreeMap<(String, String, String), Vec<&Row>> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.method != "mc") {
        grouped
            .entry((row.method.clone(), row.pointset.clone(), row.sort.clone()))
            .or_default()
            .push(row);
    }

    let mut out = Vec::new();
    for ((method, pointset, sort), series_rows) in grouped {
        let pairs: Vec<(u64, f64)> = series_rows
            .iter()
            .filter(|r| r.var_mu_hat > 0.0)
            .map(|r| (r.n, r.var_mu_hat))
            .collect();
        if pairs.len() < 3 {
            continue;
        }
        let fit = fit_beta(&pairs)?;
        let mut vrf_discrepancy = None;
        for row in &series_rows {
            let (Some(emitted), Some(mc_var)) = (row.vrf, mc_var_by_n.get(&row.n)) else {
                continue;
            };
            if let Ok(recomputed) = vrf(*mc_var, row.n, row.var_mu_hat) {
                let rel = (emitted - recomputed).abs() / recomputed;
                if vrf_discrepancy.is_none_or(|d| rel > d) {
                    vrf_discrepancy = Some(rel);
                }
            }
        }
        out.push(SeriesRefit {
            method,
            pointset,
            sort,
            fit,
            vrf_discrepancy,
        });
    }
    Ok(out)
}
