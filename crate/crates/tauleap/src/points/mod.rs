//! Low-discrepancy point sets and their randomizations: rank-1 lattices
//! (random shift, optional baker fold) and base-2 digital nets (linear matrix
//! scramble plus digital shift), with the uniform generator re-exported for
//! stream management.

mod dnet;
mod lattice;

pub use dnet::{rank_gf2, DigitalNetB2, LmsMatrix, W_DIGITS};
pub use lattice::{lattice_search, p_alpha_discrepancy, LatticeRule, WeightsSpec};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::math;
use crate::rng::RngStream;

/// Uniform source for stream `index` under `seed` (jump-ahead separated).
pub fn rng_stream(seed: u64, index: u64) -> RngStream {
    RngStream::stream(seed, index)
}

/// Point-set construction and randomization errors.
#[derive(Clone, Debug, PartialEq)]
pub enum PointsError {
    /// Generating vector fails a lattice constraint.
    BadLattice(String),
    /// Direction-number file problem (line is 1-based).
    BadDirections { line: usize, msg: String },
    /// More dimensions requested than the direction file provides.
    DimensionExceedsFile { requested: usize, available: usize },
    /// Randomization kind does not match the point-set construction.
    IncompatibleRandomization,
    /// Parameter out of range.
    BadParameter(String),
}

impl core::fmt::Display for PointsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PointsError::BadLattice(msg) => write!(f, "bad lattice rule: {msg}"),
            PointsError::BadDirections { line, msg } => {
                write!(f, "direction file line {line}: {msg}")
            }
            PointsError::DimensionExceedsFile {
                requested,
                available,
            } => write!(
                f,
                "requested dimension {requested} exceeds file capacity {available}"
            ),
            PointsError::IncompatibleRandomization => {
                write!(f, "randomization kind incompatible with point construction")
            }
            PointsError::BadParameter(msg) => write!(f, "bad parameter: {msg}"),
        }
    }
}

/// A randomization record. Holds everything needed to replay the randomized
/// points deterministically.
#[derive(Clone, Debug)]
pub enum Randomization {
    /// Independent uniform shift per coordinate, modulo 1.
    ShiftMod1 { shift: Vec<f64> },
    /// Shift modulo 1 followed by the tent fold v = min(2u, 2-2u).
    ShiftMod1Baker { shift: Vec<f64> },
    /// Digit-wise XOR with one word per coordinate.
    DigitalShift { words: Vec<u32> },
    /// Left matrix scramble (per-dimension lower-triangular, unit diagonal)
    /// followed by a digital shift.
    LmsPlusShift {
        lms: Vec<LmsMatrix>,
        words: Vec<u32>,
    },
}

impl Randomization {
    pub fn dim(&self) -> usize {
        match self {
            Randomization::ShiftMod1 { shift } | Randomization::ShiftMod1Baker { shift } => {
                shift.len()
            }
            Randomization::DigitalShift { words } => words.len(),
            Randomization::LmsPlusShift { words, .. } => words.len(),
        }
    }
}

/// Baker (tent) fold on a shifted coordinate: doubles then reflects, so the
/// output stays in [0, 1].
#[inline]
pub fn baker_fold(u: f64) -> f64 {
    let v = 2.0 * u;
    if v <= 1.0 {
        v
    } else {
        2.0 - v
    }
}

/// A point-set family ready to be randomized: construction plus the
/// randomization flavor it takes.
#[derive(Clone, Debug)]
pub enum PointSet {
    Lattice { rule: LatticeRule, baker: bool },
    Net(DigitalNetB2),
}

impl PointSet {
    pub fn n(&self) -> u64 {
        match self {
            PointSet::Lattice { rule, .. } => rule.n(),
            PointSet::Net(net) => net.n(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PointSet::Lattice { rule, .. } => rule.dim(),
            PointSet::Net(net) => net.dim(),
        }
    }

    /// Unrandomized coordinate.
    pub fn coordinate(&self, i: u64, j: usize) -> f64 {
        match self {
            PointSet::Lattice { rule, .. } => rule.coordinate(i, j),
            PointSet::Net(net) => net.coordinate(i, j),
        }
    }

    /// Draws a full fresh randomization for this construction.
    ///
    /// Draw order is fixed: lattices take one uniform per coordinate; nets
    /// take 30 row draws per dimension (scramble) and then one 31-bit shift
    /// word per dimension.
    pub fn draw_randomization(&self, rng: &mut RngStream) -> Randomization {
        match self {
            PointSet::Lattice { rule, baker } => {
                let shift: Vec<f64> = (0..rule.dim()).map(|_| rng.next_f64()).collect();
                if *baker {
                    Randomization::ShiftMod1Baker { shift }
                } else {
                    Randomization::ShiftMod1 { shift }
                }
            }
            PointSet::Net(net) => {
                let lms: Vec<LmsMatrix> =
                    (0..net.dim()).map(|_| LmsMatrix::draw(rng)).collect();
                let words: Vec<u32> = (0..net.dim()).map(|_| rng.next_bits(W_DIGITS)).collect();
                Randomization::LmsPlusShift { lms, words }
            }
        }
    }

    /// One randomized coordinate, straight from the records (slow path; use
    /// `prepare` for whole-set evaluation).
    pub fn randomize(&self, r: &Randomization, i: u64, j: usize) -> Result<f64, PointsError> {
        match (self, r) {
            (PointSet::Lattice { rule, .. }, Randomization::ShiftMod1 { shift }) => {
                Ok(math::frac(rule.coordinate(i, j) + shift[j]))
            }
            (PointSet::Lattice { rule, .. }, Randomization::ShiftMod1Baker { shift }) => {
                Ok(baker_fold(math::frac(rule.coordinate(i, j) + shift[j])))
            }
            (PointSet::Net(net), Randomization::DigitalShift { words }) => {
                Ok(word_to_unit(net.word(i, j) ^ words[j]))
            }
            (PointSet::Net(net), Randomization::LmsPlusShift { lms, words }) => {
                let col_count = net.k() as usize;
                let mut w = 0u32;
                for b in 0..col_count {
                    if (i >> b) & 1 == 1 {
                        w ^= lms[j].apply(net.column(j, b));
                    }
                }
                Ok(word_to_unit(w ^ words[j]))
            }
            _ => Err(PointsError::IncompatibleRandomization),
        }
    }

    /// Precomputes whatever the randomization needs so that per-coordinate
    /// evaluation is cheap.
    pub fn prepare<'a>(&'a self, r: &'a Randomization) -> Result<PreparedPoints<'a>, PointsError> {
        if r.dim() != self.dim() {
            return Err(PointsError::BadParameter(format!(
                "randomization dimension {} != point dimension {}",
                r.dim(),
                self.dim()
            )));
        }
        match (self, r) {
            (PointSet::Lattice { rule, .. }, Randomization::ShiftMod1 { shift }) => {
                Ok(PreparedPoints::Shift {
                    rule,
                    shift,
                    baker: false,
                })
            }
            (PointSet::Lattice { rule, .. }, Randomization::ShiftMod1Baker { shift }) => {
                Ok(PreparedPoints::Shift {
                    rule,
                    shift,
                    baker: true,
                })
            }
            (PointSet::Net(net), Randomization::DigitalShift { words }) => {
                Ok(PreparedPoints::Net {
                    net,
                    scrambled: None,
                    words,
                })
            }
            (PointSet::Net(net), Randomization::LmsPlusShift { lms, words }) => {
                let mut scrambled = Vec::with_capacity(net.dim());
                for j in 0..net.dim() {
                    let cols: Vec<u32> = (0..net.k() as usize)
                        .map(|b| lms[j].apply(net.column(j, b)))
                        .collect();
                    scrambled.push(cols);
                }
                Ok(PreparedPoints::Net {
                    net,
                    scrambled: Some(scrambled),
                    words,
                })
            }
            _ => Err(PointsError::IncompatibleRandomization),
        }
    }
}

#[inline]
pub(crate) fn word_to_unit(w: u32) -> f64 {
    w as f64 * (1.0 / (1u64 << W_DIGITS) as f64)
}

/// A randomized point set with precomputed scramble state.
pub enum PreparedPoints<'a> {
    Shift {
        rule: &'a LatticeRule,
        shift: &'a [f64],
        baker: bool,
    },
    Net {
        net: &'a DigitalNetB2,
        /// Scrambled generating columns per dimension, when an LMS applies.
        scrambled: Option<Vec<Vec<u32>>>,
        words: &'a [u32],
    },
}

impl PreparedPoints<'_> {
    /// Randomized coordinate j of point i.
    #[inline]
    pub fn coord(&self, i: u64, j: usize) -> f64 {
        match self {
            PreparedPoints::Shift { rule, shift, baker } => {
                let u = math::frac(rule.coordinate(i, j) + shift[j]);
                if *baker {
                    baker_fold(u)
                } else {
                    u
                }
            }
            PreparedPoints::Net {
                net,
                scrambled,
                words,
            } => {
                let w = match scrambled {
                    Some(cols) => {
                        let mut w = 0u32;
                        let mut bits = i & (net.n() - 1);
                        let col = &cols[j];
                        let mut b = 0usize;
                        while bits != 0 {
                            if bits & 1 == 1 {
                                w ^= col[b];
                            }
                            bits >>= 1;
                            b += 1;
                        }
                        w
                    }
                    None => net.word(i, j),
                };
                word_to_unit(w ^ words[j])
            }
        }
    }
}
