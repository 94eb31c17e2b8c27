//! Reaction networks: species, reactions, propensities, stoichiometric
//! updates, and the built-in benchmark models.

mod builtin;
mod expr;

pub use builtin::{builtin_model, builtin_names, BuiltinModel};
pub use expr::{parse_expr, ExprAst, ExprError};

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Arithmetic mode of the chain: exact integer counts, or the real-valued
/// normal-approximation variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Integer,
    Real,
}

/// Errors from network construction, parsing, and propensity evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    /// Document syntax error with 1-based line and column.
    Syntax { line: usize, col: usize, msg: String },
    /// Expression syntax error with byte offset into the expression.
    Expr { reaction: usize, inner: ExprError },
    /// Structural validation failure.
    Invalid(String),
    /// Name not found among the species.
    UnknownSpecies(String),
    /// No built-in model with this name.
    UnknownBuiltin(String),
    /// Expression propensity divided by zero at the evaluated state.
    DivideByZero { reaction: usize },
}

impl core::fmt::Display for ModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelError::Syntax { line, col, msg } => {
                write!(f, "syntax error at line {line}, column {col}: {msg}")
            }
            ModelError::Expr { reaction, inner } => {
                write!(f, "reaction {reaction}: {inner}")
            }
            ModelError::Invalid(msg) => write!(f, "invalid network: {msg}"),
            ModelError::UnknownSpecies(name) => write!(f, "unknown species `{name}`"),
            ModelError::UnknownBuiltin(name) => write!(f, "unknown built-in model `{name}`"),
            ModelError::DivideByZero { reaction } => {
                write!(f, "reaction {reaction}: propensity divides by zero at this state")
            }
        }
    }
}

/// How a reaction's rate is computed from the state.
#[derive(Clone, Debug, PartialEq)]
pub enum Propensity {
    /// c_k times the number of distinct reactant combinations.
    MassAction,
    /// c_k times a rational expression of the state (clamped at zero).
    Expression(ExprAst),
}

/// One reaction channel: reactant/product coefficients and a rate law.
#[derive(Clone, Debug, PartialEq)]
pub struct Reaction {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub c: f64,
    pub propensity: Propensity,
}

/// Copy-number vector with a validity flag; the flag drops when any entry
/// goes negative.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub x: Vec<f64>,
    pub valid: bool,
}

impl StateVector {
    pub fn new(x: Vec<f64>) -> Self {
        let valid = x.iter().all(|&v| v >= 0.0 && v.is_finite());
        StateVector { x, valid }
    }
}

/// A validated reaction network.
///
/// Stoichiometric change vectors are precomputed; `effective_zeta` carries
/// zeros in frozen coordinates so frozen species never move.
#[derive(Clone, Debug, PartialEq)]
pub struct ReactionNetwork {
    species_names: Vec<String>,
    reactions: Vec<Reaction>,
    zeta: Vec<Vec<f64>>,
    effective_zeta: Vec<Vec<f64>>,
    frozen: Vec<bool>,
    conserved_total: Option<f64>,
    mode: Mode,
}

impl ReactionNetwork {
    pub fn new(species_names: Vec<String>, reactions: Vec<Reaction>) -> Result<Self, ModelError> {
        let l = species_names.len();
        if l == 0 {
            return Err(ModelError::Invalid("species list is empty".to_owned()));
        }
        if reactions.is_empty() {
            return Err(ModelError::Invalid("d >= 1 violated: no reactions".to_owned()));
        }
        for i in 0..l {
            for j in (i + 1)..l {
                if species_names[i] == species_names[j] {
                    return Err(ModelError::Invalid(format!(
                        "duplicate species name `{}`",
                        species_names[i]
                    )));
                }
            }
        }
        for (k, r) in reactions.iter().enumerate() {
            if r.alpha.len() != l || r.beta.len() != l {
                return Err(ModelError::Invalid(format!(
                    "reaction {k}: alpha/beta length must equal species count {l}"
                )));
            }
            if !(r.c >= 0.0) || !r.c.is_finite() {
                return Err(ModelError::Invalid(format!(
                    "reaction {k}: rate constant {} must be finite and nonnegative",
                    r.c
                )));
            }
            if let Propensity::Expression(ast) = &r.propensity {
                if let Some(bad) = ast.max_var_index().filter(|&v| v >= l) {
                    return Err(ModelError::Invalid(format!(
                        "reaction {k}: expression references x{} beyond species count {l}",
                        bad + 1
                    )));
                }
            }
        }
        let zeta: Vec<Vec<f64>> = reactions
            .iter()
            .map(|r| {
                (0..l)
                    .map(|i| r.beta[i] as f64 - r.alpha[i] as f64)
                    .collect()
            })
            .collect();
        Ok(ReactionNetwork {
            species_names,
            effective_zeta: zeta.clone(),
            zeta,
            frozen: alloc::vec![false; l],
            reactions,
            conserved_total: None,
            mode: Mode::Integer,
        })
    }

    /// Marks a species as frozen: its copy number never changes, though
    /// propensities still read it.
    pub fn freeze(&mut self, name: &str) -> Result<(), ModelError> {
        let i = self.species_index(name)?;
        self.frozen[i] = true;
        for row in self.effective_zeta.iter_mut() {
            row[i] = 0.0;
        }
        Ok(())
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn set_conserved_total(&mut self, total: f64) {
        self.conserved_total = Some(total);
    }

    pub fn species_index(&self, name: &str) -> Result<usize, ModelError> {
        self.species_names
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| ModelError::UnknownSpecies(name.to_owned()))
    }

    pub fn n_species(&self) -> usize {
        self.species_names.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn species_names(&self) -> &[String] {
        &self.species_names
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    /// Raw stoichiometric change vector beta_k - alpha_k.
    pub fn zeta(&self, k: usize) -> &[f64] {
        &self.zeta[k]
    }

    /// Change vector with frozen coordinates zeroed; this is what updates use.
    pub fn effective_zeta(&self, k: usize) -> &[f64] {
        &self.effective_zeta[k]
    }

    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }

    pub fn conserved_total(&self) -> Option<f64> {
        self.conserved_total
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Propensity a_k(x) >= 0.
    pub fn propensity(&self, k: usize, x: &[f64]) -> Result<f64, ModelError> {
        let r = &self.reactions[k];
        let raw = match &r.propensity {
            Propensity::MassAction => {
                let mut h = 1.0;
                for i in 0..x.len() {
                    let a = r.alpha[i];
                    if a > 0 {
                        h *= binomial(x[i], a);
                        if h == 0.0 {
                            break;
                        }
                    }
                }
                h
            }
            Propensity::Expression(ast) => ast
                .eval(x)
                .ok_or(ModelError::DivideByZero { reaction: k })?,
        };
        let a = r.c * raw;
        Ok(if a > 0.0 { a } else { 0.0 })
    }

    /// All propensities at once, into a caller-provided buffer.
    pub fn propensities_into(&self, x: &[f64], out: &mut [f64]) -> Result<(), ModelError> {
        for k in 0..self.reactions.len() {
            out[k] = self.propensity(k, x)?;
        }
        Ok(())
    }

    /// In-place stoichiometric update; returns false when any coordinate went
    /// negative.
    pub fn apply_counts_in_place(&self, x: &mut [f64], counts: &[f64]) -> bool {
        for (k, &d) in counts.iter().enumerate() {
            if d != 0.0 {
                let z = &self.effective_zeta[k];
                for i in 0..x.len() {
                    x[i] += d * z[i];
                }
            }
        }
        x.iter().all(|&v| v >= 0.0)
    }

    /// Functional form of the update: x' = x + sum_k counts_k * zeta_k.
    pub fn apply_reactions(&self, x: &StateVector, counts: &[f64]) -> StateVector {
        let mut out = x.x.clone();
        let ok = self.apply_counts_in_place(&mut out, counts);
        StateVector {
            x: out,
            valid: x.valid && ok,
        }
    }

    /// Serializes to the network-document JSON format.
    pub fn to_document(&self) -> String {
        let doc = NetworkDoc {
            species: self.species_names.clone(),
            reactions: self
                .reactions
                .iter()
                .map(|r| ReactionDoc {
                    alpha: r.alpha.clone(),
                    beta: r.beta.clone(),
                    c: r.c,
                    propensity: match &r.propensity {
                        Propensity::MassAction => "mass_action".to_owned(),
                        Propensity::Expression(ast) => ast.to_src(),
                    },
                })
                .collect(),
            frozen: self
                .species_names
                .iter()
                .zip(&self.frozen)
                .filter(|(_, &f)| f)
                .map(|(n, _)| n.clone())
                .collect(),
            conserved_total: self.conserved_total,
            mode: Some(self.mode),
            constants: BTreeMap::new(),
        };
        serde_json::to_string_pretty(&doc).expect("document serialization cannot fail")
    }
}

/// Generalized binomial coefficient C(x, a) via falling factorial.
///
/// Integer states small enough for exact u128 arithmetic take the exact path;
/// everything else (including real-mode states) uses floating point.
fn binomial(x: f64, a: u32) -> f64 {
    if a == 0 {
        return 1.0;
    }
    let exact_ok = x >= 0.0
        && x == crate::math::floor(x)
        && x < (1u64 << 40) as f64
        && a <= 20;
    if exact_ok {
        let xi = x as u128;
        let ai = a as u128;
        if xi < ai {
            return 0.0;
        }
        let mut num: u128 = 1;
        let mut den: u128 = 1;
        for t in 0..ai {
            num *= xi - t;
            den *= t + 1;
        }
        (num / den) as f64
    } else {
        let mut h = 1.0;
        for t in 0..a {
            h *= (x - t as f64) / (t as f64 + 1.0);
        }
        h
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    species: Vec<String>,
    reactions: Vec<ReactionDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    frozen: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    conserved_total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<Mode>,
    /// Named constants usable in propensity expressions; inlined at parse time.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    constants: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct ReactionDoc {
    alpha: Vec<u32>,
    beta: Vec<u32>,
    c: f64,
    propensity: String,
}

/// Parses a network-document (JSON) into a validated network.
pub fn parse_network(text: &str) -> Result<ReactionNetwork, ModelError> {
    let doc: NetworkDoc = serde_json::from_str(text).map_err(|e| ModelError::Syntax {
        line: e.line(),
        col: e.column(),
        msg: e.to_string(),
    })?;
    let mut reactions = Vec::with_capacity(doc.reactions.len());
    for (k, rd) in doc.reactions.iter().enumerate() {
        let propensity = if rd.propensity == "mass_action" {
            Propensity::MassAction
        } else {
            let ast = parse_expr(&rd.propensity, &doc.species, &doc.constants)
                .map_err(|inner| ModelError::Expr { reaction: k, inner })?;
            Propensity::Expression(ast)
        };
        reactions.push(Reaction {
            alpha: rd.alpha.clone(),
            beta: rd.beta.clone(),
            c: rd.c,
            propensity,
        });
    }
    let mut net = ReactionNetwork::new(doc.species, reactions)?;
    for name in &doc.frozen {
        net.freeze(name)?;
    }
    if let Some(t) = doc.conserved_total {
        net.set_conserved_total(t);
    }
    if let Some(m) = doc.mode {
        net.set_mode(m);
    }
    Ok(net)
}
