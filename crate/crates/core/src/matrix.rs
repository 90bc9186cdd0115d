//! Binary pooling matrices with bitset column supports.
//!
//! Each column's support `C_j` (the set of rows holding a 1) is stored as a
//! little-endian block of `u64` words, so the support intersections and
//! unions behind `Z` and `Y` reduce to word-wise AND/OR plus popcount.

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PoolingMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    // column-major: column j occupies bits[j * words .. (j + 1) * words]
    bits: Vec<u64>,
}

impl PoolingMatrix {
    /// All-zero `rows x cols` matrix.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::input(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let words = rows.div_ceil(WORD);
        Ok(PoolingMatrix {
            rows,
            cols,
            words,
            bits: vec![0; words * cols],
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    pub fn ones(rows: usize, cols: usize) -> Result<Self> {
        Self::from_fn(rows, cols, |_, _| true)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| i == j)
    }

    /// Builds a matrix from row vectors; all rows must have equal length.
    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Result<Self> {
        let t = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some(bad) = rows.iter().position(|r| r.as_ref().len() != n) {
            return Err(Error::input(format!("row {bad} has inconsistent length")));
        }
        Self::from_fn(t, n, |i, j| rows[i].as_ref()[j])
    }

    /// Parses rows written as `0`/`1` strings, e.g. `["1010", "0110"]`.
    pub fn from_bit_strings(rows: &[&str]) -> Result<Self> {
        let parsed: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| {
                r.chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(Error::input(format!("unexpected character {other:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Self::from_rows(&parsed)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of `u64` words per column support.
    #[inline]
    pub fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.bits[j * self.words + i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = &mut self.bits[j * self.words + i / WORD];
        let mask = 1u64 << (i % WORD);
        if v {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Support of column `j` as a bitset over rows.
    #[inline]
    pub fn support_bits(&self, j: usize) -> &[u64] {
        &self.bits[j * self.words..(j + 1) * self.words]
    }

    /// Support of column `j` as a sorted row list.
    pub fn support(&self, j: usize) -> Vec<usize> {
        (0..self.rows).filter(|&i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> Vec<bool> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    /// Submatrix keeping the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyAfterDeletion);
        }
        let mut bits = Vec::with_capacity(keep.len() * self.words);
        for &j in keep {
            if j >= self.cols {
                return Err(Error::input(format!("column {j} out of range")));
            }
            bits.extend_from_slice(self.support_bits(j));
        }
        Ok(PoolingMatrix {
            rows: self.rows,
            cols: keep.len(),
            words: self.words,
            bits,
        })
    }

    /// Checks that `a` and `b` are disjoint, duplicate-free and in range,
    /// and that `b` is nonempty.
    pub fn check_pair(&self, a: &[usize], b: &[usize]) -> Result<()> {
        if b.is_empty() {
            return Err(Error::input("B must be nonempty"));
        }
        let mut seen = vec![false; self.cols];
        for &j in a.iter().chain(b) {
            if j >= self.cols {
                return Err(Error::input(format!(
                    "column {j} out of range for {} columns",
                    self.cols
                )));
            }
            if seen[j] {
                return Err(Error::input(format!(
                    "column {j} repeated or shared by A and B"
                )));
            }
            seen[j] = true;
        }
        Ok(())
    }

    /// `Z_T(A, B)`: rows where every column of `B` is 1 and every column of
    /// `A` is 0. An empty `A` counts the whole intersection.
    pub fn z_count(&self, a: &[usize], b: &[usize]) -> Result<usize> {
        self.check_pair(a, b)?;
        Ok(self.z_y_unchecked(a, b).0)
    }

    /// `Y_T(A, B)`: rows where every column of `B` is 1 and some column of
    /// `A` is 1. An empty `A` gives 0.
    pub fn y_count(&self, a: &[usize], b: &[usize]) -> Result<usize> {
        self.check_pair(a, b)?;
        Ok(self.z_y_unchecked(a, b).1)
    }

    /// `(Z, Y)` without argument validation.
    pub fn z_y_unchecked(&self, a: &[usize], b: &[usize]) -> (usize, usize) {
        let mut z = 0usize;
        let mut y = 0usize;
        for w in 0..self.words {
            let mut inter = !0u64;
            for &j in b {
                inter &= self.bits[j * self.words + w];
            }
            let mut union = 0u64;
            for &j in a {
                union |= self.bits[j * self.words + w];
            }
            z += (inter & !union).count_ones() as usize;
            y += (inter & union).count_ones() as usize;
        }
        (z, y)
    }

    /// Bitset of rows in `∩_{j∈B} C_j`, written into `out`.
    pub fn intersect_into(&self, b: &[usize], out: &mut Vec<u64>) {
        out.clear();
        out.resize(self.words, !0u64);
        for &j in b {
            for (o, s) in out.iter_mut().zip(self.support_bits(j)) {
                *o &= s;
            }
        }
        if b.is_empty() {
            self.mask_tail(out);
        }
    }

    fn mask_tail(&self, v: &mut [u64]) {
        let rem = self.rows % WORD;
        if rem != 0 {
            if let Some(last) = v.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Number of ones in the matrix.
    pub fn weight(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// `log2(n) / t` for a `t x n` matrix.
pub fn rate(m: &PoolingMatrix) -> f64 {
    (m.cols() as f64).log2() / m.rows() as f64
}
