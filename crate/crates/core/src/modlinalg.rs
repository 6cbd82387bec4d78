//! Arithmetic modulo q at desk scale: dense matrices and vectors, exact
//! primality testing, Sophie-Germain prime search, and the sparse ternary
//! noise used in place of a discrete Gaussian.
//!
//! Moduli are capped at 32 bits; products are accumulated in 128-bit
//! intermediates and reduced once per entry.

use rand::Rng;
use thiserror::Error;

/// Largest admissible modulus bit width. Keeps every entry below 2^32 so a
/// single product fits comfortably in u128 accumulation.
pub const MAX_MODULUS_BITS: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModArithError {
    #[error("dimension mismatch: {left_rows}x{left_cols} incompatible with {right_rows}x{right_cols}")]
    ShapeMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("bit width {bits} outside supported range 2..={max}", max = MAX_MODULUS_BITS)]
    BitsOutOfRange { bits: u32 },
    #[error("no Sophie-Germain prime of {bits} bits found")]
    PrimeSearchExhausted { bits: u32 },
}

/// Vector with entries in [0, q-1].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ZqVector {
    q: u64,
    entries: Vec<u64>,
}

impl ZqVector {
    pub fn zeros(len: usize, q: u64) -> Self {
        assert!(q >= 2, "modulus must be at least 2");
        Self {
            q,
            entries: vec![0; len],
        }
    }

    pub fn from_entries(entries: &[u64], q: u64) -> Self {
        assert!(q >= 2, "modulus must be at least 2");
        assert!(entries.iter().all(|&e| e < q), "entries must be below q");
        Self {
            q,
            entries: entries.to_vec(),
        }
    }

    pub fn uniform<R: Rng>(len: usize, q: u64, rng: &mut R) -> Self {
        assert!(q >= 2, "modulus must be at least 2");
        Self {
            q,
            entries: (0..len).map(|_| rng.random_range(0..q)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> u64 {
        self.entries[i]
    }

    /// Appends one entry, e.g. the constant 1 completing a secret key.
    pub fn append(&self, value: u64) -> ZqVector {
        assert!(value < self.q);
        let mut entries = self.entries.clone();
        entries.push(value);
        ZqVector {
            q: self.q,
            entries,
        }
    }

    pub fn add(&self, other: &ZqVector) -> Result<ZqVector, ModArithError> {
        if self.q != other.q {
            return Err(ModArithError::ModulusMismatch {
                left: self.q,
                right: other.q,
            });
        }
        if self.len() != other.len() {
            return Err(ModArithError::ShapeMismatch {
                left_rows: 1,
                left_cols: self.len(),
                right_rows: 1,
                right_cols: other.len(),
            });
        }
        Ok(ZqVector {
            q: self.q,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| (a + b) % self.q)
                .collect(),
        })
    }

    /// Row-vector times matrix, every entry reduced mod q.
    pub fn mul_mat(&self, m: &ZqMatrix) -> Result<ZqVector, ModArithError> {
        if self.q != m.q {
            return Err(ModArithError::ModulusMismatch {
                left: self.q,
                right: m.q,
            });
        }
        if self.len() != m.rows {
            return Err(ModArithError::ShapeMismatch {
                left_rows: 1,
                left_cols: self.len(),
                right_rows: m.rows,
                right_cols: m.cols,
            });
        }
        let mut out = vec![0u64; m.cols];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc: u128 = 0;
            for (k, &v) in self.entries.iter().enumerate() {
                acc += u128::from(v) * u128::from(m.get(k, j));
            }
            *o = (acc % u128::from(self.q)) as u64;
        }
        Ok(ZqVector {
            q: self.q,
            entries: out,
        })
    }
}

/// Dense row-major matrix with entries in [0, q-1].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ZqMatrix {
    rows: usize,
    cols: usize,
    q: u64,
    data: Vec<u64>,
}

impl ZqMatrix {
    pub fn zeros(rows: usize, cols: usize, q: u64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert!(q >= 2, "modulus must be at least 2");
        Self {
            rows,
            cols,
            q,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, q: u64) -> Self {
        let mut m = Self::zeros(n, n, q);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u64>], q: u64) -> Self {
        assert!(!rows.is_empty(), "matrix must have at least one row");
        assert!(q >= 2, "modulus must be at least 2");
        let cols = rows[0].len();
        assert!(cols > 0, "matrix must have at least one column");
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged rows");
            assert!(row.iter().all(|&e| e < q), "entries must be below q");
            data.extend_from_slice(row);
        }
        Self {
            rows: rows.len(),
            cols,
            q,
            data,
        }
    }

    pub fn uniform<R: Rng>(rows: usize, cols: usize, q: u64, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols, q);
        for v in m.data.iter_mut() {
            *v = rng.random_range(0..q);
        }
        m
    }

    /// Uniform matrix over {0, 1}, stored mod q.
    pub fn uniform_binary<R: Rng>(rows: usize, cols: usize, q: u64, rng: &mut R) -> Self {
        let mut m = Self::zeros(rows, cols, q);
        for v in m.data.iter_mut() {
            *v = u64::from(rng.random::<bool>());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: u64) {
        assert!(value < self.q, "entries must be below q");
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Entry-wise additive inverse mod q.
    pub fn neg(&self) -> ZqMatrix {
        ZqMatrix {
            rows: self.rows,
            cols: self.cols,
            q: self.q,
            data: self
                .data
                .iter()
                .map(|&v| if v == 0 { 0 } else { self.q - v })
                .collect(),
        }
    }

    /// Entry-wise scaling by `factor` mod q.
    pub fn scale(&self, factor: u64) -> ZqMatrix {
        let q = u128::from(self.q);
        ZqMatrix {
            rows: self.rows,
            cols: self.cols,
            q: self.q,
            data: self
                .data
                .iter()
                .map(|&v| ((u128::from(v) * u128::from(factor)) % q) as u64)
                .collect(),
        }
    }

    pub fn add(&self, other: &ZqMatrix) -> Result<ZqMatrix, ModArithError> {
        if self.q != other.q {
            return Err(ModArithError::ModulusMismatch {
                left: self.q,
                right: other.q,
            });
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(ModArithError::ShapeMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(ZqMatrix {
            rows: self.rows,
            cols: self.cols,
            q: self.q,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a + b) % self.q)
                .collect(),
        })
    }

    /// Matrix product with every entry reduced mod q.
    pub fn matmul(&self, rhs: &ZqMatrix) -> Result<ZqMatrix, ModArithError> {
        if self.q != rhs.q {
            return Err(ModArithError::ModulusMismatch {
                left: self.q,
                right: rhs.q,
            });
        }
        if self.cols != rhs.rows {
            return Err(ModArithError::ShapeMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let q = u128::from(self.q);
        let mut out = ZqMatrix::zeros(self.rows, rhs.cols, self.q);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc: u128 = 0;
                for k in 0..self.cols {
                    acc += u128::from(self.get(i, k)) * u128::from(rhs.get(k, j));
                }
                out.set(i, j, (acc % q) as u64);
            }
        }
        Ok(out)
    }

    /// Stacks `self` on top of `bottom`.
    pub fn vstack(&self, bottom: &ZqMatrix) -> Result<ZqMatrix, ModArithError> {
        if self.q != bottom.q {
            return Err(ModArithError::ModulusMismatch {
                left: self.q,
                right: bottom.q,
            });
        }
        if self.cols != bottom.cols {
            return Err(ModArithError::ShapeMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: bottom.rows,
                right_cols: bottom.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&bottom.data);
        Ok(ZqMatrix {
            rows: self.rows + bottom.rows,
            cols: self.cols,
            q: self.q,
            data,
        })
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin. The fixed witness set decides primality
/// exactly for every n < 2^64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    // n - 1 = 2^s * d with d odd
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Sampling attempts before falling back to an exhaustive range scan (small
// bit widths) or reporting exhaustion.
const PRIME_SEARCH_ATTEMPTS: u32 = 100_000;
const EXHAUSTIVE_SCAN_MAX_BITS: u32 = 20;

/// Uniformly samples `bits`-bit candidates until one is a Sophie-Germain
/// prime: q prime with 2q+1 prime as well. Deterministic for a fixed seed.
pub fn generate_sophie_germain_prime<R: Rng>(
    bits: u32,
    rng: &mut R,
) -> Result<u64, ModArithError> {
    if !(2..=MAX_MODULUS_BITS).contains(&bits) {
        return Err(ModArithError::BitsOutOfRange { bits });
    }
    let lo = 1u64 << (bits - 1);
    let hi = 1u64 << bits;
    for _ in 0..PRIME_SEARCH_ATTEMPTS {
        let q = rng.random_range(lo..hi);
        if is_prime(q) && is_prime(2 * q + 1) {
            return Ok(q);
        }
    }
    if bits <= EXHAUSTIVE_SCAN_MAX_BITS {
        for q in lo..hi {
            if is_prime(q) && is_prime(2 * q + 1) {
                return Ok(q);
            }
        }
    }
    Err(ModArithError::PrimeSearchExhausted { bits })
}

/// Sparse ternary noise: each entry is 0 with probability 1-p, otherwise
/// +1 or -1 (equiprobable) reduced mod q. Stands in for the LWE error
/// distribution with a hard +-1 magnitude bound.
pub fn sample_noise_vector<R: Rng>(m: usize, q: u64, density: f64, rng: &mut R) -> ZqVector {
    assert!(q >= 2, "modulus must be at least 2");
    assert!((0.0..=1.0).contains(&density), "density must be in [0, 1]");
    let entries = (0..m)
        .map(|_| {
            if rng.random_bool(density) {
                if rng.random_bool(0.5) {
                    1
                } else {
                    q - 1
                }
            } else {
                0
            }
        })
        .collect();
    ZqVector { q, entries }
}

/// Representative of x mod q in [-floor(q/2), floor(q/2)], the signed
/// distance used by nearest-candidate decoding.
pub fn centered_residue(x: i64, q: u64) -> i64 {
    let q = i64::try_from(q).expect("modulus exceeds i64");
    let r = x.rem_euclid(q);
    if 2 * r > q {
        r - q
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    // Independent oracle: trial division.
    fn trial_division_is_prime(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2u64;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn is_prime_small_cases() {
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(is_prime(2));
        assert!(is_prime(11));
        assert!(is_prime(359)); // 2q+1 for q = 179
        assert!(!is_prime(360));
    }

    #[test]
    fn is_prime_matches_trial_division_below_10000() {
        for n in 0..10_000u64 {
            assert_eq!(is_prime(n), trial_division_is_prime(n), "n = {n}");
        }
    }

    #[test]
    fn is_prime_handles_large_values() {
        assert!(is_prime(18_446_744_073_709_551_557)); // largest u64 prime
        assert!(!is_prime(18_446_744_073_709_551_555));
        assert!(is_prime((1 << 31) - 1)); // Mersenne prime 2^31 - 1
    }

    #[test]
    fn sophie_germain_3_bits_is_5() {
        // 3-bit primes are {5, 7}; 2*7+1 = 15 is composite, so 5 is forced.
        for seed in 0..10 {
            assert_eq!(generate_sophie_germain_prime(3, &mut rng(seed)).unwrap(), 5);
        }
    }

    #[test]
    fn sophie_germain_4_bits_is_11() {
        // 4-bit primes are {11, 13}; 2*13+1 = 27 is composite, so 11 is forced.
        for seed in 0..10 {
            assert_eq!(generate_sophie_germain_prime(4, &mut rng(seed)).unwrap(), 11);
        }
    }

    #[test]
    fn sophie_germain_contract_holds_up_to_16_bits() {
        for bits in 2..=16u32 {
            for seed in 0..5 {
                let q = generate_sophie_germain_prime(bits, &mut rng(seed)).unwrap();
                assert!(trial_division_is_prime(q), "q = {q}");
                assert!(trial_division_is_prime(2 * q + 1), "2q+1 for q = {q}");
                assert_eq!(64 - q.leading_zeros(), bits, "bit length of {q}");
            }
        }
    }

    #[test]
    fn sophie_germain_deterministic_per_seed() {
        let a = generate_sophie_germain_prime(12, &mut rng(42)).unwrap();
        let b = generate_sophie_germain_prime(12, &mut rng(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sophie_germain_rejects_bad_bit_counts() {
        assert!(matches!(
            generate_sophie_germain_prime(1, &mut rng(0)),
            Err(ModArithError::BitsOutOfRange { bits: 1 })
        ));
        assert!(matches!(
            generate_sophie_germain_prime(33, &mut rng(0)),
            Err(ModArithError::BitsOutOfRange { bits: 33 })
        ));
    }

    #[test]
    fn noise_density_zero_is_zero_vector() {
        let v = sample_noise_vector(64, 17, 0.0, &mut rng(0));
        assert!(v.entries().iter().all(|&e| e == 0));
    }

    #[test]
    fn noise_density_one_is_all_plus_minus_one() {
        let v = sample_noise_vector(64, 5, 1.0, &mut rng(1));
        assert!(v.entries().iter().all(|&e| e == 1 || e == 4));
    }

    #[test]
    fn noise_fraction_concentrates() {
        let v = sample_noise_vector(10_000, 97, 0.05, &mut rng(2));
        let nonzero = v.entries().iter().filter(|&&e| e != 0).count() as f64;
        let fraction = nonzero / 10_000.0;
        assert!((0.03..=0.07).contains(&fraction), "fraction = {fraction}");
    }

    #[test]
    fn noise_entries_stay_in_support() {
        for seed in 0..10 {
            let v = sample_noise_vector(200, 11, 0.3, &mut rng(seed));
            assert!(v.entries().iter().all(|&e| e == 0 || e == 1 || e == 10));
        }
    }

    #[test]
    fn matmul_identity_is_noop() {
        let m = ZqMatrix::uniform(4, 4, 13, &mut rng(3));
        assert_eq!(ZqMatrix::identity(4, 13).matmul(&m).unwrap(), m);
    }

    #[test]
    fn vector_matmul_hand_case() {
        // [1,2] * [[3],[4]] = [11] = [1] mod 5
        let v = ZqVector::from_entries(&[1, 2], 5);
        let m = ZqMatrix::from_rows(&[vec![3], vec![4]], 5);
        assert_eq!(v.mul_mat(&m).unwrap().entries(), &[1]);
    }

    #[test]
    fn matmul_entries_stay_reduced() {
        let mut r = rng(4);
        let a = ZqMatrix::uniform(6, 5, 251, &mut r);
        let b = ZqMatrix::uniform(5, 7, 251, &mut r);
        let c = a.matmul(&b).unwrap();
        for i in 0..6 {
            for j in 0..7 {
                assert!(c.get(i, j) < 251);
            }
        }
    }

    #[test]
    fn matmul_mismatches_error() {
        let a = ZqMatrix::zeros(2, 3, 5);
        let b = ZqMatrix::zeros(2, 2, 5);
        assert!(matches!(a.matmul(&b), Err(ModArithError::ShapeMismatch { .. })));
        let c = ZqMatrix::zeros(3, 2, 7);
        assert!(matches!(a.matmul(&c), Err(ModArithError::ModulusMismatch { .. })));
    }

    #[test]
    fn matmul_associates_and_distributes() {
        for seed in 0..20 {
            let mut r = rng(seed);
            let a = ZqMatrix::uniform(3, 4, 23, &mut r);
            let b = ZqMatrix::uniform(4, 5, 23, &mut r);
            let c = ZqMatrix::uniform(5, 2, 23, &mut r);
            let ab_c = a.matmul(&b).unwrap().matmul(&c).unwrap();
            let a_bc = a.matmul(&b.matmul(&c).unwrap()).unwrap();
            assert_eq!(ab_c, a_bc);

            let d = ZqMatrix::uniform(4, 5, 23, &mut r);
            let lhs = a.matmul(&b.add(&d).unwrap()).unwrap();
            let rhs = a.matmul(&b).unwrap().add(&a.matmul(&d).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn centered_residue_cases() {
        assert_eq!(centered_residue(4, 5), -1);
        assert_eq!(centered_residue(2, 5), 2);
        assert_eq!(centered_residue(7, 5), 2);
        assert_eq!(centered_residue(-1, 5), -1);
        assert_eq!(centered_residue(0, 2), 0);
        // Even modulus: q/2 maps to +q/2, q/2 + 1 wraps negative.
        assert_eq!(centered_residue(2, 4), 2);
        assert_eq!(centered_residue(3, 4), -1);
    }

    #[test]
    fn neg_and_scale_are_consistent() {
        let m = ZqMatrix::uniform(3, 3, 19, &mut rng(5));
        let sum = m.add(&m.neg()).unwrap();
        assert_eq!(sum, ZqMatrix::zeros(3, 3, 19));
        assert_eq!(m.scale(1), m);
        assert_eq!(m.scale(0), ZqMatrix::zeros(3, 3, 19));
    }
}
