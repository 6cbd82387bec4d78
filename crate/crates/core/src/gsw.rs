//! Gentry-Sahai-Waters style additive encryption over LWE.
//!
//! Key generation draws the modulus q as a Sophie-Germain prime of k bits
//! and publishes B = (-A over s^T*A + e^T), so that t^T*B = e^T for the
//! secret t = (s || 1). A message mu < M is encrypted as C = B*R + mu*G with
//! a fresh binary R and the powers-of-two gadget G; ciphertext addition is
//! entry-wise, and decryption scans the message space for the candidate
//! whose shifted residues are closest to zero in L1.

use rand::Rng;
use thiserror::Error;

use crate::cloud::{AdditionService, CloudError};
use crate::modlinalg::{
    centered_residue, generate_sophie_germain_prime, sample_noise_vector, ModArithError, ZqMatrix,
    ZqVector,
};
use crate::wire::{ProcessRequest, ProcessResponse};

#[derive(Debug, Error)]
pub enum GswError {
    #[error("security parameter k = {k} outside supported range 3..=16")]
    SecurityParamOutOfRange { k: usize },
    #[error("noise density {density} outside [0, 1]")]
    NoiseDensityOutOfRange { density: f64 },
    #[error("message bound {bound} must be in 1..={q}")]
    MessageBoundOutOfRange { bound: u64, q: u64 },
    #[error("message {message} outside message space [0, {bound})")]
    MessageOutOfRange { message: u64, bound: u64 },
    #[error("sum {x1} + {x2} would leave the message space [0, {bound})")]
    SumOutOfRange { x1: u64, x2: u64, bound: u64 },
    #[error("cloud returned a non-gsw response")]
    SchemeMismatch,
    #[error(transparent)]
    Cloud(#[from] CloudError),
    #[error(transparent)]
    ModArith(#[from] ModArithError),
}

/// Derived lattice dimensions: n = k, l = ceil(log2 q), m = n*l.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GswParams {
    /// Security parameter: the bit width of q.
    pub k: usize,
    /// Sophie-Germain prime modulus of exactly k bits.
    pub q: u64,
    /// Lattice dimension, equal to k.
    pub n: usize,
    /// Bits per gadget block, ceil(log2 q).
    pub l: usize,
    /// Ciphertext columns, n*l.
    pub m: usize,
    /// Probability that a noise entry is nonzero.
    pub noise_density: f64,
    /// Exclusive upper bound of the message space; at most q.
    pub msg_bound: u64,
}

/// Secret key t = (s || 1).
#[derive(Clone, Debug)]
pub struct GswSecretKey {
    pub t: ZqVector,
}

/// Public key B with t^T * B = e^T. The generating noise is kept only as a
/// diagnostic; it never leaves the process.
#[derive(Clone, Debug)]
pub struct GswPublicKey {
    pub b: ZqMatrix,
    noise: ZqVector,
}

impl GswPublicKey {
    /// The noise vector e used to build B. Diagnostic only.
    pub fn noise(&self) -> &ZqVector {
        &self.noise
    }
}

/// n x m ciphertext. The encryption randomness R rides along as a
/// diagnostic (addition accumulates it) and is never serialized.
#[derive(Clone, Debug)]
pub struct GswCiphertext {
    pub c: ZqMatrix,
    randomness: ZqMatrix,
}

impl GswCiphertext {
    /// The accumulated randomness R. Diagnostic only.
    pub fn randomness(&self) -> &ZqMatrix {
        &self.randomness
    }

    pub fn from_matrix(c: ZqMatrix) -> Self {
        let randomness = ZqMatrix::zeros(c.cols(), c.cols(), c.modulus());
        Self { c, randomness }
    }
}

/// Everything keygen produces.
#[derive(Clone, Debug)]
pub struct GswKeys {
    pub params: GswParams,
    pub secret: GswSecretKey,
    pub public: GswPublicKey,
}

/// Block-diagonal gadget matrix: row i carries (1, 2, ..., 2^{l-1}) in
/// block i, zeros elsewhere. Shape n x (n*l).
pub fn gadget_matrix(n: usize, l: usize, q: u64) -> ZqMatrix {
    assert!(n >= 1 && l >= 1);
    let mut g = ZqMatrix::zeros(n, n * l, q);
    for i in 0..n {
        for b in 0..l {
            g.set(i, i * l + b, (1u64 << b) % q);
        }
    }
    g
}

/// Samples the modulus, the secret, and the LWE public key.
pub fn keygen<R: Rng>(
    k: usize,
    noise_density: f64,
    msg_bound: u64,
    rng: &mut R,
) -> Result<GswKeys, GswError> {
    if !(3..=16).contains(&k) {
        return Err(GswError::SecurityParamOutOfRange { k });
    }
    if !(0.0..=1.0).contains(&noise_density) {
        return Err(GswError::NoiseDensityOutOfRange {
            density: noise_density,
        });
    }
    let q = generate_sophie_germain_prime(k as u32, rng)?;
    if msg_bound == 0 || msg_bound > q {
        return Err(GswError::MessageBoundOutOfRange { bound: msg_bound, q });
    }
    let n = k;
    let l = (64 - (q - 1).leading_zeros()) as usize; // ceil(log2 q) for q >= 2
    let m = n * l;

    let s = ZqVector::uniform(n - 1, q, rng);
    let a = ZqMatrix::uniform(n - 1, m, q, rng);
    let e = sample_noise_vector(m, q, noise_density, rng);
    let sa = s.mul_mat(&a)?.add(&e)?;
    let b = a.neg().vstack(&ZqMatrix::from_rows(&[sa.entries().to_vec()], q))?;
    let t = s.append(1);

    Ok(GswKeys {
        params: GswParams {
            k,
            q,
            n,
            l,
            m,
            noise_density,
            msg_bound,
        },
        secret: GswSecretKey { t },
        public: GswPublicKey { b, noise: e },
    })
}

/// C = B*R + mu*G with fresh binary R.
pub fn encrypt<R: Rng>(
    public: &GswPublicKey,
    params: &GswParams,
    mu: u64,
    rng: &mut R,
) -> Result<GswCiphertext, GswError> {
    if mu >= params.msg_bound {
        return Err(GswError::MessageOutOfRange {
            message: mu,
            bound: params.msg_bound,
        });
    }
    let r = ZqMatrix::uniform_binary(params.m, params.m, params.q, rng);
    let g = gadget_matrix(params.n, params.l, params.q);
    let c = public.b.matmul(&r)?.add(&g.scale(mu))?;
    Ok(GswCiphertext { c, randomness: r })
}

/// Entry-wise ciphertext sum mod q.
pub fn add(c1: &GswCiphertext, c2: &GswCiphertext) -> Result<GswCiphertext, GswError> {
    Ok(GswCiphertext {
        c: c1.c.add(&c2.c)?,
        randomness: c1.randomness.add(&c2.randomness)?,
    })
}

/// Nearest-candidate decoding: returns the mu in [0, msg_bound) minimizing
/// the L1 norm of the centered residues of t^T*C - mu*(t^T*G), ties to the
/// smallest mu.
pub fn decrypt(
    secret: &GswSecretKey,
    params: &GswParams,
    ciphertext: &GswCiphertext,
) -> Result<u64, GswError> {
    let w = secret.t.mul_mat(&ciphertext.c)?;
    let tg = secret
        .t
        .mul_mat(&gadget_matrix(params.n, params.l, params.q))?;
    let q = params.q;
    let mut best_mu = 0u64;
    let mut best_score = u128::MAX;
    for mu in 0..params.msg_bound {
        let mut score: u128 = 0;
        for j in 0..params.m {
            let shifted = (u128::from(w.get(j)) + u128::from(q)
                - (u128::from(mu) * u128::from(tg.get(j))) % u128::from(q))
                % u128::from(q);
            score += centered_residue(shifted as i64, q).unsigned_abs() as u128;
        }
        if score < best_score {
            best_score = score;
            best_mu = mu;
        }
    }
    Ok(best_mu)
}

/// Remote addition round-trip: encrypt both summands, let the cloud add the
/// ciphertexts entry-wise, decrypt the sum locally.
pub fn he_add<R: Rng>(
    x1: u64,
    x2: u64,
    keys: &GswKeys,
    cloud: &dyn AdditionService,
    rng: &mut R,
) -> Result<u64, GswError> {
    let bound = keys.params.msg_bound;
    if x1.checked_add(x2).is_none_or(|sum| sum >= bound) {
        return Err(GswError::SumOutOfRange { x1, x2, bound });
    }
    let c1 = encrypt(&keys.public, &keys.params, x1, rng)?;
    let c2 = encrypt(&keys.public, &keys.params, x2, rng)?;
    let response = cloud.process(&ProcessRequest::Gsw {
        c1: c1.c.clone(),
        c2: c2.c.clone(),
    })?;
    let ProcessResponse::Gsw { c } = response else {
        return Err(GswError::SchemeMismatch);
    };
    decrypt(&keys.secret, &keys.params, &GswCiphertext::from_matrix(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::LocalCloud;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    #[test]
    fn keygen_k3_derives_documented_shape() {
        let keys = keygen(3, 0.0, 5, &mut rng(0)).unwrap();
        assert_eq!(keys.params.q, 5); // the only 3-bit Sophie-Germain prime
        assert_eq!(keys.params.l, 3);
        assert_eq!(keys.params.m, 9);
        assert_eq!(keys.public.b.rows(), 3);
        assert_eq!(keys.public.b.cols(), 9);
        assert_eq!(keys.secret.t.len(), 3);
        assert_eq!(keys.secret.t.get(2), 1);
    }

    #[test]
    fn keygen_rejects_bad_parameters() {
        assert!(matches!(
            keygen(2, 0.0, 4, &mut rng(0)),
            Err(GswError::SecurityParamOutOfRange { k: 2 })
        ));
        assert!(matches!(
            keygen(8, 1.5, 4, &mut rng(0)),
            Err(GswError::NoiseDensityOutOfRange { .. })
        ));
        // k = 3 forces q = 5, so a bound of 16 cannot fit.
        assert!(matches!(
            keygen(3, 0.0, 16, &mut rng(0)),
            Err(GswError::MessageBoundOutOfRange { bound: 16, q: 5 })
        ));
    }

    #[test]
    fn key_identity_tb_equals_noise() {
        for seed in 0..20 {
            let keys = keygen(8, 0.05, 16, &mut rng(seed)).unwrap();
            let tb = keys.secret.t.mul_mat(&keys.public.b).unwrap();
            assert_eq!(&tb, keys.public.noise());
        }
    }

    #[test]
    fn key_identity_noiseless_is_zero() {
        let keys = keygen(8, 0.0, 16, &mut rng(3)).unwrap();
        let tb = keys.secret.t.mul_mat(&keys.public.b).unwrap();
        assert!(tb.entries().iter().all(|&v| v == 0));
    }

    #[test]
    fn gadget_matrix_layout() {
        let g = gadget_matrix(2, 2, 17);
        assert_eq!(g.row(0), &[1, 2, 0, 0]);
        assert_eq!(g.row(1), &[0, 0, 1, 2]);
        let g = gadget_matrix(1, 3, 17);
        assert_eq!(g.row(0), &[1, 2, 4]);
    }

    #[test]
    fn gadget_row_sums_are_geometric() {
        let l = 4;
        let g = gadget_matrix(3, l, 251);
        for i in 0..3 {
            let sum: u64 = g.row(i).iter().sum();
            assert_eq!(sum, (1 << l) - 1);
        }
    }

    #[test]
    fn encrypt_shape_and_range() {
        let keys = keygen(8, 0.02, 16, &mut rng(4)).unwrap();
        let ct = encrypt(&keys.public, &keys.params, 7, &mut rng(5)).unwrap();
        assert_eq!(ct.c.rows(), keys.params.n);
        assert_eq!(ct.c.cols(), keys.params.m);
        for i in 0..ct.c.rows() {
            assert!(ct.c.row(i).iter().all(|&v| v < keys.params.q));
        }
    }

    #[test]
    fn encrypt_rejects_out_of_range_message() {
        let keys = keygen(8, 0.0, 16, &mut rng(6)).unwrap();
        assert!(matches!(
            encrypt(&keys.public, &keys.params, 16, &mut rng(7)),
            Err(GswError::MessageOutOfRange { message: 16, bound: 16 })
        ));
    }

    #[test]
    fn noiseless_roundtrip_is_exact() {
        // k = 3 forces q = 5, so the bound is min(16, q) = 5; every 8-bit
        // Sophie-Germain prime exceeds 16.
        for (k, bound) in [(3usize, 5u64), (8, 16)] {
            let mut r = rng(8);
            let keys = keygen(k, 0.0, bound, &mut r).unwrap();
            for mu in 0..keys.params.msg_bound {
                let ct = encrypt(&keys.public, &keys.params, mu, &mut r).unwrap();
                assert_eq!(decrypt(&keys.secret, &keys.params, &ct).unwrap(), mu);
            }
        }
    }

    #[test]
    fn noiseless_addition_is_exact() {
        let keys = keygen(8, 0.0, 16, &mut rng(9)).unwrap();
        let mut r = rng(10);
        for mu1 in 0..8u64 {
            for mu2 in 0..8u64 {
                let c1 = encrypt(&keys.public, &keys.params, mu1, &mut r).unwrap();
                let c2 = encrypt(&keys.public, &keys.params, mu2, &mut r).unwrap();
                let sum = add(&c1, &c2).unwrap();
                assert_eq!(decrypt(&keys.secret, &keys.params, &sum).unwrap(), mu1 + mu2);
            }
        }
    }

    #[test]
    fn homomorphism_identity_with_retained_randomness() {
        // t^T (C1 + C2) = e^T (R1 + R2) + (mu1 + mu2) t^T G mod q.
        let keys = keygen(8, 0.05, 16, &mut rng(11)).unwrap();
        let mut r = rng(12);
        let (mu1, mu2) = (5u64, 9u64);
        let c1 = encrypt(&keys.public, &keys.params, mu1, &mut r).unwrap();
        let c2 = encrypt(&keys.public, &keys.params, mu2, &mut r).unwrap();
        let sum = add(&c1, &c2).unwrap();

        let lhs = keys.secret.t.mul_mat(&sum.c).unwrap();
        let g = gadget_matrix(keys.params.n, keys.params.l, keys.params.q);
        let tg = keys.secret.t.mul_mat(&g).unwrap();
        let e_r = keys.public.noise().mul_mat(sum.randomness()).unwrap();
        let scaled_tg = ZqVector::from_entries(
            &tg.entries()
                .iter()
                .map(|&v| ((u128::from(v) * u128::from(mu1 + mu2)) % u128::from(keys.params.q)) as u64)
                .collect::<Vec<_>>(),
            keys.params.q,
        );
        let rhs = e_r.add(&scaled_tg).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn decrypt_prefers_smallest_mu_on_ties() {
        // With msg_bound = 1 the scan has a single candidate.
        let keys = keygen(3, 0.0, 1, &mut rng(13)).unwrap();
        let ct = encrypt(&keys.public, &keys.params, 0, &mut rng(14)).unwrap();
        assert_eq!(decrypt(&keys.secret, &keys.params, &ct).unwrap(), 0);
    }

    #[test]
    fn noisy_roundtrip_mostly_succeeds() {
        let mut failures = 0;
        for seed in 0..100 {
            let mut r = rng(1000 + seed);
            let keys = keygen(8, 0.02, 16, &mut r).unwrap();
            let mu = r.random_range(0..16u64);
            let ct = encrypt(&keys.public, &keys.params, mu, &mut r).unwrap();
            if decrypt(&keys.secret, &keys.params, &ct).unwrap() != mu {
                failures += 1;
            }
        }
        assert!(failures <= 1, "{failures} failures out of 100");
    }

    #[test]
    fn he_add_noiseless_exact() {
        let keys = keygen(8, 0.0, 16, &mut rng(15)).unwrap();
        let cloud = LocalCloud;
        assert_eq!(he_add(0, 0, &keys, &cloud, &mut rng(16)).unwrap(), 0);
        assert_eq!(he_add(3, 4, &keys, &cloud, &mut rng(17)).unwrap(), 7);
    }

    #[test]
    fn he_add_guards_message_space() {
        let keys = keygen(8, 0.0, 15, &mut rng(18)).unwrap();
        // 7 + 7 = 14 still fits below the bound; 8 + 8 does not.
        assert_eq!(he_add(7, 7, &keys, &LocalCloud, &mut rng(19)).unwrap(), 14);
        assert!(matches!(
            he_add(8, 8, &keys, &LocalCloud, &mut rng(19)),
            Err(GswError::SumOutOfRange { bound: 15, .. })
        ));
        assert!(matches!(
            he_add(u64::MAX, 1, &keys, &LocalCloud, &mut rng(19)),
            Err(GswError::SumOutOfRange { .. })
        ));
    }

    #[test]
    fn ciphertext_addition_preserves_shape_and_modulus() {
        let keys = keygen(6, 0.02, 16, &mut rng(20)).unwrap();
        let mut r = rng(21);
        let c1 = encrypt(&keys.public, &keys.params, 1, &mut r).unwrap();
        let c2 = encrypt(&keys.public, &keys.params, 2, &mut r).unwrap();
        let sum = add(&c1, &c2).unwrap();
        assert_eq!(sum.c.rows(), keys.params.n);
        assert_eq!(sum.c.cols(), keys.params.m);
        assert_eq!(sum.c.modulus(), keys.params.q);
    }
}
