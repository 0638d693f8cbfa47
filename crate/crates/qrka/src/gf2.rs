//! Bit-packed linear algebra over the binary field.
//!
//! [`BitVec`] is a fixed-width vector of bits packed into 64-bit words, with
//! word-parallel XOR and inner products. [`BitMatrix`] keeps a set of linearly
//! independent rows in reduced row-echelon form, maintained eagerly so that
//! feeding it vectors one at a time ([`BitMatrix::add_if_independent`]) costs
//! O(k²/w) per call and kernel extraction is a direct read-off. This is the
//! classical post-processing behind period recovery: collect vectors until the
//! rank reaches k−1, then take the one-dimensional kernel.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },
}

const WORD_BITS: usize = 64;

fn words_for(width: usize) -> usize {
    width.div_ceil(WORD_BITS)
}

/// Fixed-width vector over GF(2).
///
/// Bit `i` is the coefficient of coordinate `i` and doubles as bit `i` of the
/// unsigned-integer interpretation, so `from_u64(4, 0b1100)` has bits 2 and 3
/// set. The width is fixed at construction; all binary operations require
/// equal widths. Unused high bits of the backing words are kept at zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    width: usize,
    words: Vec<u64>,
}

impl BitVec {
    /// All-zero vector of the given width.
    pub fn zeros(width: usize) -> Self {
        assert!(width > 0, "BitVec width must be positive");
        BitVec {
            width,
            words: vec![0; words_for(width)],
        }
    }

    /// Vector whose integer value is `value`.
    ///
    /// Panics if `value` does not fit in `width` bits.
    pub fn from_u64(width: usize, value: u64) -> Self {
        assert!(
            width >= WORD_BITS || value >> width == 0,
            "value 0x{value:x} does not fit in {width} bits"
        );
        let mut v = Self::zeros(width);
        v.words[0] = value;
        v
    }

    /// Uniformly random vector.
    pub fn random<R: Rng + ?Sized>(width: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(width);
        for w in v.words.iter_mut() {
            *w = rng.random();
        }
        v.mask_top();
        v
    }

    fn mask_top(&mut self) {
        let rem = self.width % WORD_BITS;
        if rem != 0 {
            *self.words.last_mut().unwrap() &= (1u64 << rem) - 1;
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.width, "bit index {index} out of range");
        self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, index: usize, value: bool) {
        assert!(index < self.width, "bit index {index} out of range");
        let mask = 1u64 << (index % WORD_BITS);
        if value {
            self.words[index / WORD_BITS] |= mask;
        } else {
            self.words[index / WORD_BITS] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the highest set bit, if any.
    pub fn leading_one(&self) -> Option<usize> {
        for (i, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some(i * WORD_BITS + (WORD_BITS - 1 - w.leading_zeros() as usize));
            }
        }
        None
    }

    fn check_width(&self, other: &BitVec) -> Result<(), Gf2Error> {
        if self.width == other.width {
            Ok(())
        } else {
            Err(Gf2Error::WidthMismatch {
                left: self.width,
                right: other.width,
            })
        }
    }

    pub fn xor_assign(&mut self, other: &BitVec) -> Result<(), Gf2Error> {
        self.check_width(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn xor(&self, other: &BitVec) -> Result<BitVec, Gf2Error> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    /// Integer value; the width must not exceed 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.width <= 64, "width {} exceeds u64", self.width);
        self.words[0]
    }

    /// Integer value; the width must not exceed 128 bits.
    pub fn to_u128(&self) -> u128 {
        assert!(self.width <= 128, "width {} exceeds u128", self.width);
        let hi = self.words.get(1).copied().unwrap_or(0);
        (hi as u128) << 64 | self.words[0] as u128
    }

    /// Integer value as an index; the value must fit in `usize`.
    pub fn to_usize(&self) -> usize {
        let v = self.to_u128();
        usize::try_from(v).expect("BitVec value does not fit in usize")
    }

    /// Big-endian concatenation: the first part occupies the most significant
    /// bits of the result.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BitVec>) -> BitVec {
        let parts: Vec<&BitVec> = parts.into_iter().collect();
        let total: usize = parts.iter().map(|p| p.width).sum();
        let mut out = BitVec::zeros(total);
        let mut pos = total;
        for part in parts {
            pos -= part.width;
            for i in 0..part.width {
                if part.get(i) {
                    out.set(pos + i, true);
                }
            }
        }
        out
    }
}

/// Inner product over GF(2): the parity of the bitwise AND.
pub fn dot(a: &BitVec, b: &BitVec) -> Result<bool, Gf2Error> {
    a.check_width(b)?;
    let mut acc = 0u64;
    for (x, y) in a.words.iter().zip(&b.words) {
        acc ^= x & y;
    }
    Ok(acc.count_ones() % 2 == 1)
}

impl fmt::Display for BitVec {
    /// Bit string, most significant bit first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.width).rev() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParseBitVecError {
    #[error("empty bit string")]
    Empty,
    #[error("invalid bit character {0:?}")]
    InvalidChar(char),
}

impl FromStr for BitVec {
    type Err = ParseBitVecError;

    /// Parses a bit string written most significant bit first, so `"1100"`
    /// equals `from_u64(4, 0b1100)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(ParseBitVecError::Empty);
        }
        let mut v = BitVec::zeros(s.chars().count());
        let width = v.width;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(width - 1 - i, true),
                other => return Err(ParseBitVecError::InvalidChar(other)),
            }
        }
        Ok(v)
    }
}

impl Ord for BitVec {
    /// Unsigned-integer order for equal widths; shorter widths sort first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.width
            .cmp(&other.width)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for BitVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A set of linearly independent rows over GF(2), held in reduced row-echelon
/// form. Dependent (and zero) candidate rows are rejected on insertion, so
/// `rank == rows().len()` always holds.
#[derive(Clone, Debug)]
pub struct BitMatrix {
    width: usize,
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
}

impl BitMatrix {
    pub fn new(width: usize) -> Self {
        assert!(width > 0, "BitMatrix width must be positive");
        BitMatrix {
            width,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Builds a matrix by inserting each row in turn; dependent rows are
    /// dropped. The kernel is unchanged by the reduction.
    pub fn from_rows<'a>(
        width: usize,
        rows: impl IntoIterator<Item = &'a BitVec>,
    ) -> Result<Self, Gf2Error> {
        let mut m = Self::new(width);
        for row in rows {
            m.add_if_independent(row)?;
        }
        Ok(m)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    fn reduce(&self, v: &BitVec) -> BitVec {
        let mut v = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v.get(p) {
                v.xor_assign(row).expect("equal widths by invariant");
            }
        }
        v
    }

    /// True iff `v` lies in the row span. The zero vector is always in span.
    pub fn in_span(&self, v: &BitVec) -> Result<bool, Gf2Error> {
        if v.width() != self.width {
            return Err(Gf2Error::WidthMismatch {
                left: self.width,
                right: v.width(),
            });
        }
        Ok(self.reduce(v).is_zero())
    }

    /// Inserts `v` iff it is independent of the current rows; returns whether
    /// it was accepted. Zero vectors are always rejected.
    pub fn add_if_independent(&mut self, v: &BitVec) -> Result<bool, Gf2Error> {
        if v.width() != self.width {
            return Err(Gf2Error::WidthMismatch {
                left: self.width,
                right: v.width(),
            });
        }
        let reduced = self.reduce(v);
        let Some(pivot) = reduced.leading_one() else {
            return Ok(false);
        };
        // Keep the form fully reduced: clear the new pivot column everywhere.
        for row in self.rows.iter_mut() {
            if row.get(pivot) {
                row.xor_assign(&reduced).expect("equal widths by invariant");
            }
        }
        let at = self.pivots.partition_point(|&p| p > pivot);
        self.pivots.insert(at, pivot);
        self.rows.insert(at, reduced);
        Ok(true)
    }

    /// Basis of the right kernel `{v : row · v = 0 for every row}`, one basis
    /// vector per non-pivot column, in ascending column order. The basis has
    /// exactly `width − rank` elements.
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let mut basis = Vec::with_capacity(self.width - self.rank());
        for col in 0..self.width {
            if self.pivots.contains(&col) {
                continue;
            }
            let mut v = BitVec::zeros(self.width);
            v.set(col, true);
            for (row, &p) in self.rows.iter().zip(&self.pivots) {
                if row.get(col) {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }
}
