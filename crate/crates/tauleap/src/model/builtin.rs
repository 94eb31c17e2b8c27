//! Built-in benchmark models with their standard configurations.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{parse_network, Mode, ModelError, ReactionNetwork};
use crate::chain::{Functional, NegativePolicy, SimConfig};

/// A built-in model: network, initial state, default run configuration, and
/// default output functional.
#[derive(Clone, Debug)]
pub struct BuiltinModel {
    pub name: &'static str,
    pub net: ReactionNetwork,
    pub x0: Vec<f64>,
    pub config: SimConfig,
    pub g: Functional,
}

/// Names accepted by `builtin_model`.
pub fn builtin_names() -> &'static [&'static str] {
    &[
        "rev-iso",
        "rev-iso-normal",
        "schloegl-1d",
        "schloegl-2d",
        "pka",
        "enzyme-qssa",
        "enzyme-qssa-unit",
    ]
}

const REV_ISO: &str = r#"{
  "species": ["S1", "S2"],
  "reactions": [
    {"alpha": [1, 0], "beta": [0, 1], "c": 1.0, "propensity": "mass_action"},
    {"alpha": [0, 1], "beta": [1, 0], "c": 1e-4, "propensity": "mass_action"}
  ]
}"#;

// Trimolecular autocatalysis with two reservoir species; the reservoirs are
// frozen so only the first coordinate moves.
const SCHLOEGL_3SPECIES: &str = r#"{
  "species": ["S1", "S2", "S3"],
  "frozen": ["S2", "S3"],
  "reactions": [
    {"alpha": [2, 1, 0], "beta": [3, 0, 0], "c": 3e-7, "propensity": "mass_action"},
    {"alpha": [3, 0, 0], "beta": [2, 1, 0], "c": 1e-4, "propensity": "mass_action"},
    {"alpha": [0, 0, 1], "beta": [1, 0, 0], "c": 1e-3, "propensity": "mass_action"},
    {"alpha": [1, 0, 0], "beta": [0, 0, 1], "c": 3.5, "propensity": "mass_action"}
  ]
}"#;

// Two-species reduction: the third species is eliminated through the
// conservation law x3 = N0 - x1 - x2, which turns reaction 3 into an
// expression propensity.
const SCHLOEGL_2D: &str = r#"{
  "species": ["S1", "S2"],
  "conserved_total": 300250,
  "reactions": [
    {"alpha": [2, 1], "beta": [3, 0], "c": 3e-7, "propensity": "mass_action"},
    {"alpha": [3, 0], "beta": [2, 1], "c": 1e-4, "propensity": "mass_action"},
    {"alpha": [0, 0], "beta": [1, 0], "c": 1e-3, "propensity": "300250 - x1 - x2"},
    {"alpha": [1, 0], "beta": [0, 0], "c": 3.5, "propensity": "mass_action"}
  ]
}"#;

// Cooperative two-stage binding of cAMP to PKA followed by dissociation of
// the holoenzyme into regulatory and catalytic subunits.
const PKA: &str = r#"{
  "species": ["PKA", "cAMP", "PKAcAMP2", "PKAcAMP4", "PKAr", "PKAc"],
  "reactions": [
    {"alpha": [1, 2, 0, 0, 0, 0], "beta": [0, 0, 1, 0, 0, 0], "c": 2.6255e-6, "propensity": "mass_action"},
    {"alpha": [0, 0, 1, 0, 0, 0], "beta": [1, 2, 0, 0, 0, 0], "c": 0.02,      "propensity": "mass_action"},
    {"alpha": [0, 2, 1, 0, 0, 0], "beta": [0, 0, 0, 1, 0, 0], "c": 3.8481e-6, "propensity": "mass_action"},
    {"alpha": [0, 0, 0, 1, 0, 0], "beta": [0, 2, 1, 0, 0, 0], "c": 0.02,      "propensity": "mass_action"},
    {"alpha": [0, 0, 0, 1, 0, 0], "beta": [0, 0, 0, 0, 1, 2], "c": 0.016,     "propensity": "mass_action"},
    {"alpha": [0, 0, 0, 0, 1, 2], "beta": [0, 0, 0, 1, 0, 0], "c": 5.1325e-5, "propensity": "mass_action"}
  ]
}"#;

// Production plus Hill-type conversion. The source that states this model
// gives both "rate 1" and "c1 = 0.5" for the production channel; 0.5 is the
// reading consistent with its reported means (see the -unit variant).
const ENZYME_QSSA: &str = r#"{
  "species": ["S1", "S2"],
  "constants": {"Km": 2.02e5},
  "reactions": [
    {"alpha": [0, 0], "beta": [1, 0], "c": 0.5, "propensity": "mass_action"},
    {"alpha": [1, 0], "beta": [0, 1], "c": 1.0, "propensity": "x1^2 / (Km^2 + x1^2)"}
  ]
}"#;

const ENZYME_QSSA_UNIT: &str = r#"{
  "species": ["S1", "S2"],
  "constants": {"Km": 2.02e5},
  "reactions": [
    {"alpha": [0, 0], "beta": [1, 0], "c": 1.0, "propensity": "mass_action"},
    {"alpha": [1, 0], "beta": [0, 1], "c": 1.0, "propensity": "x1^2 / (Km^2 + x1^2)"}
  ]
}"#;

/// Returns the named built-in model with its standard parameterization.
pub fn builtin_model(name: &str) -> Result<BuiltinModel, ModelError> {
    let (doc, x0, t_end, steps, mode): (&str, Vec<f64>, f64, u32, Mode) = match name {
        "rev-iso" => (REV_ISO, vec![100.0, 1e6], 1.6, 8, Mode::Integer),
        "rev-iso-normal" => (REV_ISO, vec![100.0, 1e6], 1.6, 8, Mode::Real),
        "schloegl-1d" => (
            SCHLOEGL_3SPECIES,
            vec![250.0, 1e5, 2e5],
            4.0,
            16,
            Mode::Integer,
        ),
        "schloegl-2d" => (SCHLOEGL_2D, vec![250.0, 1e5], 4.0, 16, Mode::Integer),
        "pka" => (
            PKA,
            vec![33000.0, 33030.0, 1100.0, 1100.0, 1100.0, 1100.0],
            0.05,
            256,
            Mode::Integer,
        ),
        "enzyme-qssa" => (ENZYME_QSSA, vec![0.0, 0.0], 131072.0, 1024, Mode::Integer),
        "enzyme-qssa-unit" => (
            ENZYME_QSSA_UNIT,
            vec![0.0, 0.0],
            131072.0,
            1024,
            Mode::Integer,
        ),
        other => return Err(ModelError::UnknownBuiltin(other.to_string())),
    };
    let mut net = parse_network(doc).expect("built-in model document must parse");
    net.set_mode(mode);
    let config = SimConfig::new(t_end, steps, mode, NegativePolicy::FlagAndContinue)
        .expect("built-in config is valid");
    let name: &'static str = builtin_names()
        .iter()
        .find(|&&n| n == name)
        .expect("name matched above");
    Ok(BuiltinModel {
        name,
        net,
        x0,
        config,
        g: Functional::Coordinate(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_names_build() {
        for name in builtin_names() {
            let m = builtin_model(name).unwrap();
            assert_eq!(m.name, *name);
            assert_eq!(m.x0.len(), m.net.n_species());
        }
    }

    #[test]
    fn two_species_isomerization_parameters() {
        let m = builtin_model("rev-iso").unwrap();
        assert_eq!(m.net.n_reactions(), 2);
        assert_eq!(m.net.reactions()[0].c, 1.0);
        assert_eq!(m.net.reactions()[1].c, 1e-4);
        assert_eq!(m.x0, vec![100.0, 1e6]);
        assert_eq!(m.config.t_end(), 1.6);
        assert_eq!(m.config.steps(), 8);
        assert!((m.config.tau() - 0.2).abs() < 1e-15);
        assert_eq!(m.config.mode(), Mode::Integer);

        let normal = builtin_model("rev-iso-normal").unwrap();
        assert_eq!(normal.config.mode(), Mode::Real);
        assert_eq!(normal.net.mode(), Mode::Real);
    }

    #[test]
    fn pka_parameters() {
        let m = builtin_model("pka").unwrap();
        assert_eq!(m.net.n_species(), 6);
        assert_eq!(m.net.n_reactions(), 6);
        let cs: Vec<f64> = m.net.reactions().iter().map(|r| r.c).collect();
        assert_eq!(cs, vec![2.6255e-6, 0.02, 3.8481e-6, 0.02, 0.016, 5.1325e-5]);
        assert_eq!(m.x0, vec![33000.0, 33030.0, 1100.0, 1100.0, 1100.0, 1100.0]);
        assert_eq!(m.config.t_end(), 0.05);
        assert_eq!(m.config.steps(), 256);

        // First channel fires with a large mean per step from the start.
        let a1 = m.net.propensity(0, &m.x0).unwrap();
        let lambda = a1 * m.config.tau();
        assert!((9000.0..9400.0).contains(&lambda), "lambda_1 = {lambda}");
    }

    #[test]
    fn schloegl_variants() {
        let m1 = builtin_model("schloegl-1d").unwrap();
        assert_eq!(m1.net.frozen(), &[false, true, true]);
        assert_eq!(m1.x0, vec![250.0, 1e5, 2e5]);
        assert_eq!(m1.config.steps(), 16);
        assert!((m1.config.tau() - 0.25).abs() < 1e-15);

        let m2 = builtin_model("schloegl-2d").unwrap();
        assert_eq!(m2.net.n_species(), 2);
        assert_eq!(m2.net.conserved_total(), Some(300250.0));
        // Eliminated-species propensity matches the frozen 3-species value at x0.
        let a3_full = m1.net.propensity(2, &m1.x0).unwrap();
        let a3_reduced = m2.net.propensity(2, &m2.x0).unwrap();
        assert!((a3_full - a3_reduced).abs() < 1e-9);
        assert!((a3_full - 200.0).abs() < 1e-9);
    }

    #[test]
    fn enzyme_variants_differ_only_in_production_rate() {
        let half = builtin_model("enzyme-qssa").unwrap();
        let unit = builtin_model("enzyme-qssa-unit").unwrap();
        assert_eq!(half.net.reactions()[0].c, 0.5);
        assert_eq!(unit.net.reactions()[0].c, 1.0);
        assert_eq!(half.net.reactions()[1], unit.net.reactions()[1]);
        assert_eq!(half.config.t_end(), 131072.0);
        assert_eq!(half.config.steps(), 1024);
        assert!((half.config.tau() - 128.0).abs() < 1e-12);
        // Production propensity is state-independent.
        assert_eq!(half.net.propensity(0, &[5.0, 7.0]).unwrap(), 0.5);
    }
}
