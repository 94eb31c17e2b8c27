//! Command-line front end: one-off estimator runs, experiment grids,
//! point-set inspection, series refitting, and direction-number generation.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tauleap::arrayrqmc::{run_replicated, ArrayRqmcPlan};
use tauleap::chain::{crqmc_estimate, mc_estimate};
use tauleap::model::StateVector;
use tauleap::points::{p_alpha_discrepancy, DigitalNetB2, PointSet, WeightsSpec};
use tauleap::sort::build_sorter;

use tauleap_cli::directions::{generate_directions, GenSpec};
use tauleap_cli::experiment::{
    refit_csv, rows_to_csv, run_experiment, sort_label, write_artifacts, ExperimentConfig, Family,
    Method, Row, RunOptions,
};
use tauleap_cli::io::{
    lattice_for, load_directions, parse_sort_spec, resolve_model, write_lattice_cache, GSpec,
    LATTICE_CACHE_DEFAULT,
};

#[derive(Parser)]
#[command(name = "tauleap", version, about = "Tau-leaping estimator experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct PointSources {
    /// Direction-number file (default: TAULEAP_DIRECTIONS or data/sobol-directions.txt).
    #[arg(long)]
    directions: Option<PathBuf>,
    /// Lattice cache directory; searched vectors are read from here.
    #[arg(long, default_value = LATTICE_CACHE_DEFAULT)]
    lattice_cache: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one estimator cell and print its CSV row.
    Simulate {
        /// Built-in model name or model document path.
        #[arg(long)]
        model: String,
        /// Output functional (coord:i, pow:i:p, ind:i:t); defaults to the model's.
        #[arg(long)]
        g: Option<String>,
        #[arg(long, value_enum)]
        method: Method,
        /// Point family for crqmc/arrayrqmc.
        #[arg(long, value_enum)]
        points: Option<Family>,
        /// Sorter for arrayrqmc (oslaif, coord:i, batch:..., hilbert[:bits[:pilot]]).
        #[arg(long, default_value = "oslaif")]
        sort: String,
        /// Path count (power of two for nets).
        #[arg(long)]
        n: u64,
        /// Replications (randomized methods).
        #[arg(long, default_value_t = 20)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Record wall-clock timing in the output.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        sources: PointSources,
    },
    /// Run a method x pointset x sorter x n grid from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for results.csv and summary.json.
        #[arg(long)]
        out: PathBuf,
        /// Record wall-clock timing and EIF (makes reruns non-identical).
        #[arg(long)]
        timing: bool,
        /// Worker threads (default: one per CPU).
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        sources: PointSources,
    },
    /// Construct a point set and print its parameters.
    Points {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        dim: usize,
        /// Print the weighted discrepancy criterion (lattices only).
        #[arg(long)]
        criterion: bool,
        /// Persist a searched lattice vector into the cache directory.
        #[arg(long)]
        write_cache: bool,
        /// Print the first COUNT points as CSV.
        #[arg(long, value_name = "COUNT")]
        emit: Option<u64>,
        #[command(flatten)]
        sources: PointSources,
    },
    /// Refit variance series from a results.csv and audit its vrf column.
    Fit {
        #[arg(long)]
        csv: PathBuf,
    },
    /// Generate a direction-number file for the digital net construction.
    GenDirections {
        #[arg(long)]
        out: PathBuf,
        /// Highest dimension the file provides.
        #[arg(long, default_value_t = 2100)]
        max_dim: usize,
        /// Pseudorandom candidates screened per dimension.
        #[arg(long, default_value_t = 64)]
        candidates: u32,
        /// Candidates are compared on the net with 2^SCREEN_K points.
        #[arg(long, default_value_t = 16)]
        screen_k: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Simulate {
            model,
            g,
            method,
            points,
            sort,
            n,
            m,
            seed,
            timing,
            sources,
        } => simulate(model, g, method, points, sort, n, m, seed, timing, sources),
        Cmd::Experiment {
            config,
            out,
            timing,
            threads,
            sources,
        } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading config {config:?}"))?;
            let config: ExperimentConfig =
                serde_json::from_str(&text).context("parsing experiment config")?;
            let opts = RunOptions {
                timing,
                threads,
                directions: sources.directions,
                lattice_cache: Some(sources.lattice_cache),
            };
            let artifacts = run_experiment(&config, &opts)?;
            let (csv_path, json_path) = write_artifacts(&artifacts, &out)?;
            eprintln!(
                "wrote {} rows to {} ({} series, {} failed cells); summary at {}",
                artifacts.rows.len(),
                csv_path.display(),
                artifacts.summary.series.len(),
                artifacts.summary.failures.len(),
                json_path.display()
            );
            if !artifacts.summary.failures.is_empty() {
                for f in &artifacts.summary.failures {
                    eprintln!(
                        "  failed: {} {} {} n={}: {}",
                        f.method, f.pointset, f.sort, f.n, f.error
                    );
                }
            }
            Ok(())
        }
        Cmd::Points {
            family,
            n,
            dim,
            criterion,
            write_cache,
            emit,
            sources,
        } => cmd_points(family, n, dim, criterion, write_cache, emit, sources),
        Cmd::Fit { csv } => {
            let refits = refit_csv(&csv)?;
            if refits.is_empty() {
                bail!("no series with >= 3 positive-variance rows in {csv:?}");
            }
            println!("{}", serde_json::to_string_pretty(&refits)?);
            Ok(())
        }
        Cmd::GenDirections {
            out,
            max_dim,
            candidates,
            screen_k,
            seed,
        } => {
            let spec = GenSpec {
                max_dim,
                candidates,
                screen_k,
                seed,
            };
            let text = generate_directions(&spec)?;
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            fs::write(&out, &text)?;
            eprintln!(
                "wrote direction numbers for dimensions 2..={max_dim} to {}",
                out.display()
            );
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    model_name: String,
    g: Option<String>,
    method: Method,
    family: Option<Family>,
    sort: String,
    n: u64,
    m: u32,
    seed: u64,
    timing: bool,
    sources: PointSources,
) -> Result<()> {
    let mut model = resolve_model(&model_name)?;
    if let Some(text) = g {
        model.g = GSpec::parse(&text)?.to_functional();
    }
    let g_label = GSpec::from_functional(model.g).label();
    let x0 = StateVector::new(model.x0.clone());
    let weights = WeightsSpec::default();
    let d = model.net.n_reactions();

    let (out, pointset_label, sort_column, m_column) = match method {
        Method::Mc => {
            let out = mc_estimate(&model.net, &x0, &model.config, &model.g, n, seed)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            (out, "-".to_string(), "-".to_string(), 1)
        }
        Method::Crqmc | Method::Arrayrqmc => {
            let family = family.context("--points is required for crqmc/arrayrqmc")?;
            let (sorter, sort_column, dim) = if method == Method::Arrayrqmc {
                let spec = parse_sort_spec(&sort)?;
                let sorter = build_sorter(&spec, &model.net, &[model.g], model.config.tau())
                    .map_err(|e| anyhow::anyhow!("sorter: {e}"))?;
                let dim = sorter.l() + d;
                (Some(sorter), sort_label(&spec), dim)
            } else {
                (None, "-".to_string(), model.config.steps() as usize * d)
            };

            let points = match family {
                Family::Lat | Family::LatBaker => PointSet::Lattice {
                    rule: lattice_for(n, dim, &weights, Some(&sources.lattice_cache))?,
                    baker: family == Family::LatBaker,
                },
                Family::Net => {
                    if !n.is_power_of_two() {
                        bail!("digital nets need a power-of-two n, got {n}");
                    }
                    let text = load_directions(sources.directions.as_deref())?;
                    let net = DigitalNetB2::from_direction_text(&text, dim, n.trailing_zeros())
                        .map_err(|e| anyhow::anyhow!("{e}"))?;
                    PointSet::Net(net)
                }
            };

            let out = match sorter {
                Some(sorter) => {
                    let plan = ArrayRqmcPlan::new(
                        model.net.clone(),
                        x0,
                        model.config,
                        model.g,
                        sorter,
                        points,
                        m,
                        seed,
                    )
                    .map_err(|e| anyhow::anyhow!("{e}"))?;
                    run_replicated(&plan).map_err(|e| anyhow::anyhow!("{e}"))?
                }
                None => crqmc_estimate(
                    &model.net,
                    &x0,
                    &model.config,
                    &model.g,
                    &points,
                    m,
                    seed,
                )
                .map_err(|e| anyhow::anyhow!("{e}"))?,
            };
            (out, family.label().to_string(), sort_column, m)
        }
    };

    // Plain MC reports the variance of the mean so the column is comparable
    // across methods.
    let var_mu_hat = if method == Method::Mc {
        out.variance / n as f64
    } else {
        out.variance
    };
    let row = Row {
        model: model.name,
        g: g_label,
        method: method.label().to_string(),
        pointset: pointset_label,
        sort: sort_column,
        n,
        m: m_column,
        mean: out.mean,
        var_mu_hat,
        beta_hat: None,
        vrf: None,
        eif: None,
        elapsed: if timing { out.elapsed } else { 0.0 },
        negative_events: out.negative_events,
    };
    print!("{}", String::from_utf8(rows_to_csv(&[row])?)?);
    Ok(())
}

fn cmd_points(
    family: Family,
    n: u64,
    dim: usize,
    criterion: bool,
    write_cache: bool,
    emit: Option<u64>,
    sources: PointSources,
) -> Result<()> {
    let weights = WeightsSpec::default();
    let points = match family {
        Family::Lat | Family::LatBaker => {
            let rule = lattice_for(n, dim, &weights, Some(&sources.lattice_cache))?;
            println!(
                "{}",
                serde_json::json!({
                    "family": family_name(family),
                    "n": rule.n(),
                    "dim": rule.dim(),
                    "generating_vector": rule.generating_vector(),
                })
            );
            if criterion {
                let d2 = p_alpha_discrepancy(&rule, &weights).map_err(|e| anyhow::anyhow!("{e}"))?;
                println!("criterion: {d2:e}");
            }
            if write_cache {
                let path = write_lattice_cache(&sources.lattice_cache, &rule, &weights)?;
                eprintln!("cached at {}", path.display());
            }
            PointSet::Lattice {
                rule,
                baker: family == Family::LatBaker,
            }
        }
        Family::Net => {
            if criterion {
                bail!("--criterion applies to lattices only");
            }
            if write_cache {
                bail!("--write-cache applies to lattices only");
            }
            if !n.is_power_of_two() {
                bail!("digital nets need a power-of-two n, got {n}");
            }
            let text = load_directions(sources.directions.as_deref())?;
            let net = DigitalNetB2::from_direction_text(&text, dim, n.trailing_zeros())
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            println!(
                "{}",
                serde_json::json!({
                    "family": "net",
                    "n": net.n(),
                    "dim": net.dim(),
                    "k": net.k(),
                })
            );
            PointSet::Net(net)
        }
    };

    if let Some(count) = emit {
        let count = count.min(points.n());
        for i in 0..count {
            let line: Vec<String> = (0..points.dim())
                .map(|j| format!("{:.12}", points.coordinate(i, j)))
                .collect();
            println!("{}", line.join(","));
        }
    }
    Ok(())
}

fn family_name(family: Family) -> &'static str {
    match family {
        Family::Lat => "lat",
        Family::LatBaker => "lat-baker",
        Family::Net => "net",
    }
}
