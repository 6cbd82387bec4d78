//! XOR-homomorphic encryption over Hamming codes in the McEliece style.
//!
//! Key generation hides a systematic Hamming-code generator G between a
//! random invertible scrambler S and a column permutation P; the public key
//! is psi = S*G*P. A plaintext is cut into n-bit segments (n = 4 by
//! default, Hamming(7,4)), each encrypted as segment * psi. XOR of
//! ciphertexts decrypts to the XOR of plaintexts, and integer addition is
//! recovered by adding the plaintext carry (x1 AND x2) << 1 computed before
//! encryption.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::bitlinalg::{random_invertible, random_permutation, BitMatrix, BitVector, LinAlgError};
use crate::cloud::{AdditionService, CloudError};
use crate::wire::{ProcessRequest, ProcessResponse};

#[derive(Debug, Error)]
pub enum ChenError {
    #[error("invalid code parameters: N = {codeword_bits}, k = {parity_bits}")]
    InvalidParams {
        codeword_bits: usize,
        parity_bits: usize,
    },
    #[error("message width must be at least 2, got {n}")]
    MessageWidthTooSmall { n: usize },
    #[error("segment {index} has {got} bits, expected {expected}")]
    SegmentLength {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("segment counts differ: {left} vs {right}")]
    SegmentCount { left: usize, right: usize },
    #[error("decrypted value spills past 64 bits at segment {index}")]
    ValueOverflow { index: usize },
    #[error("summand {value} exceeds the 63-bit input bound")]
    InputTooLarge { value: u64 },
    #[error("cloud returned a non-chen response")]
    SchemeMismatch,
    #[error(transparent)]
    Cloud(#[from] CloudError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// Hamming-code shape: n message bits, k parity bits, N = n + k codeword bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChenParams {
    pub n: usize,
    pub k: usize,
    pub codeword_bits: usize,
}

impl ChenParams {
    /// Derives k = floor(log2(n)) + 1 and N = n + k from the segment width.
    pub fn new(n: usize) -> Result<Self, ChenError> {
        if n < 2 {
            return Err(ChenError::MessageWidthTooSmall { n });
        }
        let k = (usize::BITS - 1 - n.leading_zeros()) as usize + 1;
        Ok(Self {
            n,
            k,
            codeword_bits: n + k,
        })
    }
}

impl ChenParams {
    /// Number of n-bit segments `value` occupies, at least one.
    pub fn segments_for(&self, value: u64) -> usize {
        let bits = (64 - value.leading_zeros()) as usize;
        bits.div_ceil(self.n).max(1)
    }
}

impl Default for ChenParams {
    /// Hamming(7,4): 4 message bits, 3 parity bits.
    fn default() -> Self {
        ChenParams::new(4).expect("4 is a valid width")
    }
}

/// The four key-generation matrices before they are combined into psi.
#[derive(Clone, Debug)]
pub struct CodeMatrices {
    /// Random invertible n x n scrambler.
    pub s: BitMatrix,
    /// n x N generator holding every identity column plus k complemented ones.
    pub g: BitMatrix,
    /// N x N column permutation.
    pub p: BitMatrix,
    /// N x n selector with G * R = I_n.
    pub r: BitMatrix,
}

/// Public encryption matrix plus the private decryption chain.
#[derive(Clone, Debug)]
pub struct ChenKeys {
    pub params: ChenParams,
    /// Public n x N encryption matrix psi = S*G*P.
    pub psi: BitMatrix,
    /// N x n selector undoing G.
    pub r: BitMatrix,
    /// Inverse of the scrambler.
    pub s_inv: BitMatrix,
    /// Inverse of the permutation.
    pub p_inv: BitMatrix,
}

/// Ciphertext: one N-bit codeword per n-bit plaintext segment, segment 0
/// least significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChenCiphertext {
    segments: Vec<BitVector>,
}

impl ChenCiphertext {
    pub fn from_segments(segments: Vec<BitVector>) -> Self {
        assert!(!segments.is_empty(), "ciphertext must have at least one segment");
        Self { segments }
    }

    pub fn segments(&self) -> &[BitVector] {
        &self.segments
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// Segment-wise XOR; both operands must already have equal segment counts.
    pub fn xor_add(&self, other: &ChenCiphertext) -> Result<ChenCiphertext, ChenError> {
        if self.segment_count() != other.segment_count() {
            return Err(ChenError::SegmentCount {
                left: self.segment_count(),
                right: other.segment_count(),
            });
        }
        let segments = self
            .segments
            .iter()
            .zip(&other.segments)
            .map(|(a, b)| a.xor(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChenCiphertext { segments })
    }
}

/// Builds the Hamming-code matrices.
///
/// G's columns are the n identity columns e_0..e_{n-1} plus k columns picked
/// from the ones-complemented identity, all in one random order. R records
/// where each identity column landed so that G * R = I_n. The selector is
/// tracked by construction, not by value: for n = 2 a complemented column
/// coincides with an identity column and value-matching would be ambiguous.
pub fn hamming_code_gen<R: Rng>(
    codeword_bits: usize,
    parity_bits: usize,
    rng: &mut R,
) -> Result<CodeMatrices, ChenError> {
    if parity_bits == 0 || codeword_bits <= parity_bits {
        return Err(ChenError::InvalidParams {
            codeword_bits,
            parity_bits,
        });
    }
    let n = codeword_bits - parity_bits;

    // Column pool: (column bits, identity index it descends from, if any).
    let mut columns: Vec<(Vec<u8>, Option<usize>)> = Vec::with_capacity(codeword_bits);
    for i in 0..n {
        let mut col = vec![0u8; n];
        col[i] = 1;
        columns.push((col, Some(i)));
    }
    let picks = if parity_bits <= n {
        sample(rng, n, parity_bits).into_vec()
    } else {
        (0..parity_bits).map(|_| rng.random_range(0..n)).collect()
    };
    for i in picks {
        let col: Vec<u8> = (0..n).map(|row| u8::from(row != i)).collect();
        columns.push((col, None));
    }
    columns.shuffle(rng);

    let mut g = BitMatrix::zeros(n, codeword_bits);
    let mut r = BitMatrix::zeros(codeword_bits, n);
    for (j, (col, origin)) in columns.iter().enumerate() {
        for (row, &bit) in col.iter().enumerate() {
            g.set(row, j, bit);
        }
        if let Some(i) = origin {
            r.set(j, *i, 1);
        }
    }

    let s = random_invertible(n, rng);
    let p = random_permutation(codeword_bits, rng);
    Ok(CodeMatrices { s, g, p, r })
}

/// Generates a full key set for segment width n: psi = S*G*P public, and
/// (R, S^-1, P^-1) private.
pub fn keygen<R: Rng>(n: usize, rng: &mut R) -> Result<ChenKeys, ChenError> {
    let params = ChenParams::new(n)?;
    let code = hamming_code_gen(params.codeword_bits, params.k, rng)?;
    let psi = code.s.matmul(&code.g)?.matmul(&code.p)?;
    let s_inv = code.s.invert()?;
    // A permutation's inverse is its transpose.
    let p_inv = code.p.transpose();
    Ok(ChenKeys {
        params,
        psi,
        r: code.r,
        s_inv,
        p_inv,
    })
}

impl ChenKeys {
    fn encrypt_segment(&self, segment_value: u64) -> BitVector {
        let segment = BitVector::from_int(segment_value, self.params.n);
        segment
            .mul_mat(&self.psi)
            .expect("psi has n rows by construction")
    }

    /// Encrypts `x` split little-endian into n-bit segments.
    pub fn encrypt(&self, x: u64) -> ChenCiphertext {
        self.encrypt_padded(x, 1)
    }

    /// Encrypts `x` with at least `min_segments` segments, padding with
    /// encryptions of zero so two operands can be XOR-aligned.
    pub fn encrypt_padded(&self, x: u64, min_segments: usize) -> ChenCiphertext {
        let n = self.params.n;
        let count = self.params.segments_for(x).max(min_segments);
        let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        let segments = (0..count)
            .map(|i| {
                let shift = i * n;
                let value = if shift >= 64 { 0 } else { (x >> shift) & mask };
                self.encrypt_segment(value)
            })
            .collect();
        ChenCiphertext { segments }
    }

    /// Decrypts segment-wise via seg * P^-1 * R * S^-1 and reassembles the
    /// integer little-endian with n-bit shifts combined by XOR.
    pub fn decrypt(&self, ciphertext: &ChenCiphertext) -> Result<u64, ChenError> {
        let n = self.params.n;
        let mut result = 0u64;
        for (i, segment) in ciphertext.segments.iter().enumerate() {
            if segment.len() != self.params.codeword_bits {
                return Err(ChenError::SegmentLength {
                    index: i,
                    expected: self.params.codeword_bits,
                    got: segment.len(),
                });
            }
            let decoded = segment
                .mul_mat(&self.p_inv)?
                .mul_mat(&self.r)?
                .mul_mat(&self.s_inv)?
                .to_int();
            let shift = i * n;
            if shift >= 64 {
                if decoded != 0 {
                    return Err(ChenError::ValueOverflow { index: i });
                }
                continue;
            }
            result ^= decoded << shift;
        }
        Ok(result)
    }
}

/// Full arithmetic addition through the cloud: the XOR part is homomorphic,
/// the carry (x1 AND x2) << 1 is computed on the plaintexts before
/// encryption and added back after decryption.
pub fn he_add(
    x1: u64,
    x2: u64,
    keys: &ChenKeys,
    cloud: &dyn AdditionService,
) -> Result<u64, ChenError> {
    for value in [x1, x2] {
        if value >> 63 != 0 {
            return Err(ChenError::InputTooLarge { value });
        }
    }
    let carry = (x1 & x2) << 1;
    let segments = keys.params.segments_for(x1).max(keys.params.segments_for(x2));
    let c1 = keys.encrypt_padded(x1, segments);
    let c2 = keys.encrypt_padded(x2, segments);
    let response = cloud.process(&ProcessRequest::Chen { a: c1, b: c2 })?;
    let ProcessResponse::Chen { segments: sum } = response else {
        return Err(ChenError::SchemeMismatch);
    };
    Ok(keys.decrypt(&sum)? + carry)
}
