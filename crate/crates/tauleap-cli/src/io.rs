//! Input resolution: models by name or document path, output functionals,
//! direction-number files, and the on-disk lattice cache.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tauleap::chain::NegativePolicy;
use tauleap::model::{builtin_model, parse_network, Mode, ReactionNetwork};
use tauleap::points::{lattice_search, LatticeRule, WeightsSpec};
use tauleap::{Functional, SimConfig};

/// Environment variable overriding the default direction-number file path.
pub const DIRECTIONS_ENV: &str = "TAULEAP_DIRECTIONS";

/// Default direction-number file, relative to the working directory.
pub const DIRECTIONS_DEFAULT: &str = "data/sobol-directions.txt";

/// Default lattice cache directory, relative to the working directory.
pub const LATTICE_CACHE_DEFAULT: &str = "data/lattices";

/// Output functional in a serializable form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GSpec {
    Coordinate { i: usize },
    Power { i: usize, p: u32 },
    Indicator { i: usize, threshold: i64 },
}

impl GSpec {
    /// Parses the compact command-line form: `coord:i`, `pow:i:p`, or
    /// `ind:i:threshold`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let spec = match parts.as_slice() {
            ["coord", i] => GSpec::Coordinate { i: i.parse()? },
            ["pow", i, p] => GSpec::Power {
                i: i.parse()?,
                p: p.parse()?,
            },
            ["ind", i, t] => GSpec::Indicator {
                i: i.parse()?,
                threshold: t.parse()?,
            },
            _ => bail!("bad functional '{text}'; expected coord:i, pow:i:p, or ind:i:t"),
        };
        Ok(spec)
    }

    pub fn to_functional(self) -> Functional {
        match self {
            GSpec::Coordinate { i } => Functional::Coordinate(i),
            GSpec::Power { i, p } => Functional::Power(i, p),
            GSpec::Indicator { i, threshold } => Functional::Indicator(i, threshold),
        }
    }

    pub fn from_functional(g: Functional) -> Self {
        match g {
            Functional::Coordinate(i) => GSpec::Coordinate { i },
            Functional::Power(i, p) => GSpec::Power { i, p },
            Functional::Indicator(i, threshold) => GSpec::Indicator { i, threshold },
        }
    }

    /// Short label for report columns.
    pub fn label(self) -> String {
        match self {
            GSpec::Coordinate { i } => format!("x{i}"),
            GSpec::Power { i, p } => format!("x{i}^{p}"),
            GSpec::Indicator { i, threshold } => format!("x{i}>{threshold}"),
        }
    }
}

/// A model ready to simulate, from either a built-in name or a JSON document.
#[derive(Clone, Debug)]
pub struct ResolvedModel {
    pub name: String,
    pub net: ReactionNetwork,
    pub x0: Vec<f64>,
    pub config: SimConfig,
    pub g: Functional,
}

/// Model document: the network schema of `parse_network` under "network",
/// plus the run configuration.
#[derive(Deserialize)]
struct ModelDoc {
    network: serde_json::Value,
    x0: Vec<f64>,
    t_end: f64,
    steps: u32,
    mode: Mode,
    #[serde(default)]
    g: Option<GSpec>,
    #[serde(default)]
    negative_policy: Option<String>,
}

/// Resolves a built-in model name, or any other string as a document path.
pub fn resolve_model(name_or_path: &str) -> Result<ResolvedModel> {
    if let Ok(m) = builtin_model(name_or_path) {
        return Ok(ResolvedModel {
            name: m.name.to_string(),
            net: m.net,
            x0: m.x0,
            config: m.config,
            g: m.g,
        });
    }

    let path = Path::new(name_or_path);
    let text = fs::read_to_string(path)
        .with_context(|| format!("'{name_or_path}' is not a built-in model or a readable file"))?;
    let doc: ModelDoc =
        serde_json::from_str(&text).with_context(|| format!("parsing model document {path:?}"))?;

    let net_text = serde_json::to_string(&doc.network)?;
    let mut net = parse_network(&net_text)
        .map_err(|e| anyhow::anyhow!("network in {path:?}: {e}"))?;
    net.set_mode(doc.mode);

    let policy = match doc.negative_policy.as_deref() {
        None | Some("flag") => NegativePolicy::FlagAndContinue,
        Some("abort") => NegativePolicy::AbortReplication,
        Some(other) => bail!("bad negative_policy '{other}'; expected flag or abort"),
    };
    let config = SimConfig::new(doc.t_end, doc.steps, doc.mode, policy)
        .map_err(|e| anyhow::anyhow!("config in {path:?}: {e}"))?;
    if doc.x0.len() != net.n_species() {
        bail!(
            "x0 has {} entries but the network has {} species",
            doc.x0.len(),
            net.n_species()
        );
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| name_or_path.to_string());
    Ok(ResolvedModel {
        name,
        net,
        x0: doc.x0,
        config,
        g: doc.g.map(GSpec::to_functional).unwrap_or(Functional::Coordinate(0)),
    })
}

/// Loads direction numbers, trying the explicit path, then the environment
/// variable, then the default location.
pub fn load_directions(explicit: Option<&Path>) -> Result<String> {
    let path: PathBuf = if let Some(p) = explicit {
        p.to_path_buf()
    } else if let Ok(env_path) = std::env::var(DIRECTIONS_ENV) {
        PathBuf::from(env_path)
    } else {
        PathBuf::from(DIRECTIONS_DEFAULT)
    };
    fs::read_to_string(&path).with_context(|| {
        format!(
            "direction numbers not found at {path:?}; pass --directions, set {DIRECTIONS_ENV}, \
             or generate the default file with `tauleap gen-directions --out {DIRECTIONS_DEFAULT}`"
        )
    })
}

/// Parses the compact command-line sorter form: `oslaif`, `coord:i`,
/// `batch:i,j,..:a,b,..`, or `hilbert[:bits[:pilot_n]]`.
pub fn parse_sort_spec(text: &str) -> Result<tauleap::sort::SortSpec> {
    use tauleap::sort::SortSpec;
    let parts: Vec<&str> = text.split(':').collect();
    let spec = match parts.as_slice() {
        ["oslaif"] => SortSpec::Oslaif,
        ["coord", i] => SortSpec::Coordinate { coord: i.parse()? },
        ["batch", order, exponents] => SortSpec::Batch {
            order: order
                .split(',')
                .map(|v| v.parse().map_err(anyhow::Error::from))
                .collect::<Result<_>>()?,
            exponents: exponents
                .split(',')
                .map(|v| v.parse().map_err(anyhow::Error::from))
                .collect::<Result<_>>()?,
        },
        ["hilbert"] => SortSpec::Hilbert {
            bits: None,
            pilot_n: None,
        },
        ["hilbert", bits] => SortSpec::Hilbert {
            bits: Some(bits.parse()?),
            pilot_n: None,
        },
        ["hilbert", bits, pilot] => SortSpec::Hilbert {
            bits: Some(bits.parse()?),
            pilot_n: Some(pilot.parse()?),
        },
        _ => bail!(
            "bad sorter '{text}'; expected oslaif, coord:i, batch:i,j,..:a,b,.., \
             or hilbert[:bits[:pilot_n]]"
        ),
    };
    Ok(spec)
}

/// One cached generating vector. `rho` records the weight parameter the
/// search was run with; a cache entry is only valid for matching parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeCacheFile {
    pub n: u64,
    pub dim: usize,
    pub rho: f64,
    pub a: Vec<u64>,
}

pub fn lattice_cache_path(dir: &Path, n: u64, dim: usize) -> PathBuf {
    dir.join(format!("lat-d{dim}-n{n}.json"))
}

/// Returns the generating vector for (n, dim), from the cache when a valid
/// entry exists, otherwise by running the search. The cache is read-only
/// here; `write_lattice_cache` persists new entries.
pub fn lattice_for(
    n: u64,
    dim: usize,
    weights: &WeightsSpec,
    cache_dir: Option<&Path>,
) -> Result<LatticeRule> {
    if let Some(dir) = cache_dir {
        let path = lattice_cache_path(dir, n, dim);
        if let Ok(text) = fs::read_to_string(&path) {
            let entry: LatticeCacheFile =
                serde_json::from_str(&text).with_context(|| format!("parsing {path:?}"))?;
            if entry.n != n || entry.dim != dim {
                bail!(
                    "cache file {path:?} is for n={}, dim={}, expected n={n}, dim={dim}",
                    entry.n,
                    entry.dim
                );
            }
            if entry.rho != weights.rho {
                bail!(
                    "cache file {path:?} was searched with rho={}, expected rho={}",
                    entry.rho,
                    weights.rho
                );
            }
            return LatticeRule::new(n, entry.a)
                .map_err(|e| anyhow::anyhow!("cache file {path:?}: {e}"));
        }
    }
    lattice_search(n, dim, weights).map_err(|e| anyhow::anyhow!("lattice search: {e}"))
}

pub fn write_lattice_cache(dir: &Path, rule: &LatticeRule, weights: &WeightsSpec) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let entry = LatticeCacheFile {
        n: rule.n(),
        dim: rule.dim(),
        rho: weights.rho,
        a: rule.generating_vector().to_vec(),
    };
    let path = lattice_cache_path(dir, entry.n, entry.dim);
    fs::write(&path, serde_json::to_string_pretty(&entry)?)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gspec_compact_forms() {
        assert_eq!(GSpec::parse("coord:0").unwrap(), GSpec::Coordinate { i: 0 });
        assert_eq!(
            GSpec::parse("pow:1:2").unwrap(),
            GSpec::Power { i: 1, p: 2 }
        );
        assert_eq!(
            GSpec::parse("ind:0:350").unwrap(),
            GSpec::Indicator {
                i: 0,
                threshold: 350
            }
        );
        assert!(GSpec::parse("coord").is_err());
        assert!(GSpec::parse("pow:1").is_err());
        assert!(GSpec::parse("mean:0").is_err());

        assert_eq!(GSpec::parse("ind:2:7").unwrap().label(), "x2>7");
        assert_eq!(GSpec::parse("pow:0:3").unwrap().label(), "x0^3");
    }

    #[test]
    fn gspec_round_trips_through_functional() {
        for text in ["coord:3", "pow:2:2", "ind:1:10"] {
            let spec = GSpec::parse(text).unwrap();
            assert_eq!(GSpec::from_functional(spec.to_functional()), spec);
        }
    }

    #[test]
    fn resolves_builtin_names() {
        let m = resolve_model("rev-iso").unwrap();
        assert_eq!(m.name, "rev-iso");
        assert_eq!(m.net.n_reactions(), 2);
        assert_eq!(m.g, Functional::Coordinate(0));
    }

    #[test]
    fn resolves_model_documents() {
        let doc = r#"{
            "network": {
                "species": ["A", "B"],
                "reactions": [
                    {"alpha": [1, 0], "beta": [0, 1], "c": 2.0, "propensity": "mass_action"}
                ]
            },
            "x0": [50, 0],
            "t_end": 1.0,
            "steps": 4,
            "mode": "integer",
            "g": {"kind": "coordinate", "i": 1}
        }"#;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("decay.json");
        fs::write(&path, doc).unwrap();

        let m = resolve_model(path.to_str().unwrap()).unwrap();
        assert_eq!(m.name, "decay");
        assert_eq!(m.net.n_species(), 2);
        assert_eq!(m.g, Functional::Coordinate(1));
        assert_eq!(m.x0, vec![50.0, 0.0]);

        assert!(resolve_model("no-such-model").is_err());
    }

    #[test]
    fn model_document_rejects_bad_x0_length() {
        let doc = r#"{
            "network": {
                "species": ["A"],
                "reactions": [
                    {"alpha": [1], "beta": [0], "c": 1.0, "propensity": "mass_action"}
                ]
            },
            "x0": [1, 2],
            "t_end": 1.0,
            "steps": 1,
            "mode": "integer"
        }"#;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, doc).unwrap();
        let err = resolve_model(path.to_str().unwrap()).unwrap_err();
        assert!(err.to_string().contains("species"));
    }

    #[test]
    fn direction_lookup_prefers_explicit_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dirs.txt");
        fs::write(&path, "2 1 0 1\n").unwrap();
        assert_eq!(load_directions(Some(&path)).unwrap(), "2 1 0 1\n");
        assert!(load_directions(Some(Path::new("/nonexistent/x.txt"))).is_err());
    }

    #[test]
    fn sort_spec_compact_forms() {
        use tauleap::sort::SortSpec;
        assert_eq!(parse_sort_spec("oslaif").unwrap(), SortSpec::Oslaif);
        assert_eq!(
            parse_sort_spec("coord:1").unwrap(),
            SortSpec::Coordinate { coord: 1 }
        );
        assert_eq!(
            parse_sort_spec("batch:0,1:0.5,0.5").unwrap(),
            SortSpec::Batch {
                order: vec![0, 1],
                exponents: vec![0.5, 0.5],
            }
        );
        assert_eq!(
            parse_sort_spec("hilbert").unwrap(),
            SortSpec::Hilbert {
                bits: None,
                pilot_n: None,
            }
        );
        assert_eq!(
            parse_sort_spec("hilbert:9:2048").unwrap(),
            SortSpec::Hilbert {
                bits: Some(9),
                pilot_n: Some(2048),
            }
        );
        assert!(parse_sort_spec("sorted").is_err());
        assert!(parse_sort_spec("batch:0,1").is_err());
    }

    #[test]
    fn lattice_cache_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let w = WeightsSpec::default();
        let rule = lattice_search(64, 3, &w).unwrap();
        let path = write_lattice_cache(dir.path(), &rule, &w).unwrap();
        assert!(path.ends_with("lat-d3-n64.json"));

        let cached = lattice_for(64, 3, &w, Some(dir.path())).unwrap();
        assert_eq!(cached.generating_vector(), rule.generating_vector());

        // A different rho must not silently reuse the entry.
        let other = WeightsSpec::new(0.3).unwrap();
        assert!(lattice_for(64, 3, &other, Some(dir.path())).is_err());

        // A miss falls back to searching.
        let searched = lattice_for(32, 3, &w, Some(dir.path())).unwrap();
        assert_eq!(searched.n(), 32);
    }
}
