//! Base-2 digital nets built from Sobol-style direction numbers, plus the
//! left matrix scramble used to randomize them.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::PointsError;
use crate::rng::RngStream;

/// Output digits per coordinate. Words fit in a u32 with the top bit clear.
pub const W_DIGITS: u32 = 31;

/// Digital net in base 2 with n = 2^k points.
///
/// `cols[j][b]` is the direction word applied when input bit b of the point
/// index is set; digit r of a word lives at word bit `30 - r`. Dimension 1 is
/// the reflected identity, so its first coordinate is exactly i/n.
#[derive(Clone, Debug)]
pub struct DigitalNetB2 {
    k: u32,
    cols: Vec<Vec<u32>>,
}

impl DigitalNetB2 {
    /// Builds `dim` dimensions from direction numbers in the standard text
    /// format: one line per dimension >= 2, `d s a m_1 .. m_s`, optional
    /// header line. Dimension 1 is synthesized as the reflected identity.
    pub fn from_direction_text(text: &str, dim: usize, k: u32) -> Result<Self, PointsError> {
        if k == 0 || k > W_DIGITS {
            return Err(PointsError::BadParameter(format!(
                "k must be in [1, {W_DIGITS}], got {k}"
            )));
        }
        if dim == 0 {
            return Err(PointsError::BadParameter("dim must be >= 1".into()));
        }

        let mut cols: Vec<Vec<u32>> = Vec::with_capacity(dim);
        cols.push((0..k).map(|b| 1u32 << (W_DIGITS - k + b)).collect());

        let mut lines = text.lines().enumerate();
        while cols.len() < dim {
            let (idx, line) = loop {
                match lines.next() {
                    Some((idx, raw)) => {
                        let t = raw.trim();
                        if t.is_empty() {
                            continue;
                        }
                        // A header line (no leading digit) is allowed once at
                        // the top of the file.
                        if idx == 0 && !t.starts_with(|c: char| c.is_ascii_digit()) {
                            continue;
                        }
                        break (idx, t);
                    }
                    None => {
                        return Err(PointsError::DimensionExceedsFile {
                            requested: dim,
                            available: cols.len(),
                        })
                    }
                }
            };
            let line_no = idx + 1;
            let v = direction_line_to_columns(line, k).map_err(|msg| {
                PointsError::BadDirections { line: line_no, msg }
            })?;
            cols.push(v);
        }
        Ok(DigitalNetB2 { k, cols })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> u64 {
        1u64 << self.k
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    /// Direction word for input bit b of dimension j.
    #[inline]
    pub fn column(&self, j: usize, b: usize) -> u32 {
        self.cols[j][b]
    }

    /// Output word of point i, dimension j (point index taken mod n).
    #[inline]
    pub fn word(&self, i: u64, j: usize) -> u32 {
        let mut bits = i & (self.n() - 1);
        let col = &self.cols[j];
        let mut w = 0u32;
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

    /// Unrandomized coordinate in [0, 1).
    #[inline]
    pub fn coordinate(&self, i: u64, j: usize) -> f64 {
        super::word_to_unit(self.word(i, j))
    }
}

/// Parses `d s a m_1 .. m_s` and returns the k direction words of that
/// dimension, extending by the Sobol recurrence when s < k.
fn direction_line_to_columns(line: &str, k: u32) -> Result<Vec<u32>, alloc::string::String> {
    let mut tok = line.split_whitespace();
    let _d: u64 = tok
        .next()
        .ok_or("missing dimension index")?
        .parse()
        .map_err(|_| "dimension index is not an integer".to_string())?;
    let s: usize = tok
        .next()
        .ok_or("missing polynomial degree")?
        .parse()
        .map_err(|_| "polynomial degree is not an integer".to_string())?;
    if s == 0 {
        return Err("polynomial degree must be >= 1".into());
    }
    let a: u64 = tok
        .next()
        .ok_or("missing coefficient word")?
        .parse()
        .map_err(|_| "coefficient word is not an integer".to_string())?;
    if s >= 2 && a >> (s - 1) != 0 {
        return Err(format!("coefficient word {a} too wide for degree {s}"));
    }
    let mut m: Vec<u64> = Vec::with_capacity(s);
    for c in 1..=s {
        let v: u64 = tok
            .next()
            .ok_or_else(|| format!("expected {s} direction numbers, found {}", c - 1))?
            .parse()
            .map_err(|_| format!("direction number {c} is not an integer"))?;
        if v % 2 == 0 {
            return Err(format!("direction number m_{c} = {v} must be odd"));
        }
        if v >> c != 0 {
            return Err(format!("direction number m_{c} = {v} must be below 2^{c}"));
        }
        m.push(v);
    }
    if tok.next().is_some() {
        return Err("trailing tokens after direction numbers".into());
    }

    // v_c = m_c << (31 - c) for given entries, then the bitwise recurrence
    // v_c = v_{c-s} ^ (v_{c-s} >> s) ^ sum_t a_t v_{c-t} for c > s.
    let mut v: Vec<u32> = Vec::with_capacity(k as usize);
    for c in 1..=k as usize {
        if c <= s {
            v.push((m[c - 1] as u32) << (W_DIGITS - c as u32));
        } else {
            let mut w = v[c - 1 - s] ^ (v[c - 1 - s] >> s);
            for t in 1..s {
                if (a >> (s - 1 - t)) & 1 == 1 {
                    w ^= v[c - 1 - t];
                }
            }
            v.push(w);
        }
    }
    Ok(v)
}

/// GF(2) rank of a set of binary words.
pub fn rank_gf2(words: &[u32]) -> u32 {
    let mut pivots: Vec<u32> = Vec::new();
    let mut rank = 0;
    for &wd in words {
        let mut w = wd;
        for &p in &pivots {
            let hi = 31 - p.leading_zeros();
            if w >> hi & 1 == 1 {
                w ^= p;
            }
        }
        if w != 0 {
            pivots.push(w);
            rank += 1;
        }
    }
    rank
}

/// Left matrix scramble: a random lower-triangular binary matrix with unit
/// diagonal, in digit space. `rows[r]` is row r as a word mask over input
/// digits (digit t at word bit `30 - t`), so nonzero entries sit at digits
/// 0..=r only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmsMatrix {
    rows: [u32; W_DIGITS as usize],
}

impl LmsMatrix {
    /// Draws the strictly-lower part uniformly; the diagonal is forced to 1
    /// so the matrix is nonsingular. Row r consumes one `next_bits(r)` call,
    /// r = 1..31, in that order.
    pub fn draw(rng: &mut RngStream) -> Self {
        let mut rows = [0u32; W_DIGITS as usize];
        rows[0] = 1 << 30;
        for r in 1..W_DIGITS as usize {
            let strict = rng.next_bits(r as u32) << (31 - r);
            rows[r] = strict | 1 << (30 - r);
        }
        LmsMatrix { rows }
    }

    pub fn identity() -> Self {
        let mut rows = [0u32; W_DIGITS as usize];
        for (r, row) in rows.iter_mut().enumerate() {
            *row = 1 << (30 - r);
        }
        LmsMatrix { rows }
    }

    pub fn rows(&self) -> &[u32; W_DIGITS as usize] {
        &self.rows
    }

    /// Applies the scramble to one direction word: output digit r is the
    /// GF(2) inner product of row r with the word.
    #[inline]
    pub fn apply(&self, col: u32) -> u32 {
        let mut out = 0u32;
        for (r, &row) in self.rows.iter().enumerate() {
            let parity = (row & col).count_ones() & 1;
            out |= parity << (30 - r);
        }
        out
    }
}
