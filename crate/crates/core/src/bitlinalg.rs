//! Dense linear algebra over GF(2).
//!
//! Matrices and vectors store one element per byte in row-major order;
//! products are XOR-accumulated ANDs. Provides Gauss-Jordan inversion and
//! samplers for random invertible and column-permutation matrices, the raw
//! material for code-based key generation.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("dimension mismatch: {left_rows}x{left_cols} incompatible with {right_rows}x{right_cols}")]
    ShapeMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
}

/// Vector over GF(2). Index 0 is the least-significant position when the
/// vector carries an integer's bits.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitVector {
    bits: Vec<u8>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "BitVector must be nonempty");
        Self { bits: vec![0; len] }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        assert!(!bits.is_empty(), "BitVector must be nonempty");
        assert!(bits.iter().all(|&b| b <= 1), "entries must be 0 or 1");
        Self {
            bits: bits.to_vec(),
        }
    }

    /// Little-endian bit decomposition of `value`, padded or asserted to `len` bits.
    pub fn from_int(value: u64, len: usize) -> Self {
        assert!(len > 0, "BitVector must be nonempty");
        if len < 64 {
            assert!(value >> len == 0, "value {value} does not fit in {len} bits");
        }
        let bits = (0..len).map(|i| ((value >> i) & 1) as u8).collect();
        Self { bits }
    }

    /// Reassembles the bits as a little-endian integer. Requires length <= 64.
    pub fn to_int(&self) -> u64 {
        assert!(self.bits.len() <= 64, "vector too long for u64");
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: u8) {
        assert!(value <= 1, "entries must be 0 or 1");
        self.bits[i] = value;
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector, LinAlgError> {
        if self.len() != other.len() {
            return Err(LinAlgError::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(BitVector {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    /// Row-vector times matrix over GF(2).
    pub fn mul_mat(&self, m: &BitMatrix) -> Result<BitVector, LinAlgError> {
        if self.len() != m.rows {
            return Err(LinAlgError::ShapeMismatch {
                left_rows: 1,
                left_cols: self.len(),
                right_rows: m.rows,
                right_cols: m.cols,
            });
        }
        let mut out = vec![0u8; m.cols];
        for (k, &b) in self.bits.iter().enumerate() {
            if b == 1 {
                for (j, o) in out.iter_mut().enumerate() {
                    *o ^= m.get(k, j);
                }
            }
        }
        Ok(BitVector { bits: out })
    }
}

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        assert!(!rows.is_empty(), "matrix must have at least one row");
        let cols = rows[0].len();
        assert!(cols > 0, "matrix must have at least one column");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            assert!(row.iter().all(|&b| b <= 1), "entries must be 0 or 1");
            data.extend_from_slice(row);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: u8) {
        assert!(value <= 1, "entries must be 0 or 1");
        self.data[r * self.cols + c] = value;
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Matrix product over GF(2): out[i][j] = XOR_k self[i][k] AND rhs[k][j].
    pub fn matmul(&self, rhs: &BitMatrix) -> Result<BitMatrix, LinAlgError> {
        if self.cols != rhs.rows {
            return Err(LinAlgError::ShapeMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) == 1 {
                    for j in 0..rhs.cols {
                        let v = out.get(i, j) ^ rhs.get(k, j);
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Inverse by Gauss-Jordan elimination on the augmented system [self | I].
    pub fn invert(&self) -> Result<BitMatrix, LinAlgError> {
        if self.rows != self.cols {
            return Err(LinAlgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut work = self.clone();
        let mut inv = BitMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| work.get(r, col) == 1)
                .ok_or(LinAlgError::Singular)?;
            if pivot != col {
                work.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            for r in 0..n {
                if r != col && work.get(r, col) == 1 {
                    work.xor_row_into(col, r);
                    inv.xor_row_into(col, r);
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            let (va, vb) = (self.get(a, c), self.get(b, c));
            self.set(a, c, vb);
            self.set(b, c, va);
        }
    }

    /// XORs row `src` into row `dst`.
    fn xor_row_into(&mut self, src: usize, dst: usize) {
        for c in 0..self.cols {
            let v = self.get(dst, c) ^ self.get(src, c);
            self.set(dst, c, v);
        }
    }
}

/// Samples a uniform n x n matrix and retries until it is invertible.
/// Over GF(2) a uniform matrix is invertible with probability ~0.29, so the
/// expected number of tries is below four.
pub fn random_invertible<R: Rng>(n: usize, rng: &mut R) -> BitMatrix {
    assert!(n >= 1);
    loop {
        let mut m = BitMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, u8::from(rng.random::<bool>()));
            }
        }
        if m.invert().is_ok() {
            return m;
        }
    }
}

/// Identity matrix with its columns shuffled: exactly one 1 per row and
/// column, and the inverse equals the transpose.
pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> BitMatrix {
    assert!(n >= 1);
    let mut targets: Vec<usize> = (0..n).collect();
    targets.shuffle(rng);
    let mut m = BitMatrix::zeros(n, n);
    for (row, &col) in targets.iter().enumerate() {
        m.set(row, col, 1);
    }
    m
}
