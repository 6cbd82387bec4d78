//! Quantum one-time-pad homomorphic addition.
//!
//! Each summand register is masked qubit-by-qubit with Pauli X and Z gates
//! keyed by fresh classical bits (a, b for the first register, c, d for the
//! second). The cloud applies a transversal CNOT, which XORs the encrypted
//! bit strings without learning the plaintexts; the client undoes the mask
//! with X^(a[i] xor c[i]) and Z^(d[i]) and adds the carry it precomputed
//! with per-position Toffoli gates.

use rand::Rng;
use thiserror::Error;

use crate::cloud::{AdditionService, CloudError};
use crate::qsim::{apply_mcx_between, BasisRegister, QsimError, Sign};
use crate::wire::{ProcessRequest, ProcessResponse};

#[derive(Debug, Error)]
pub enum QotpError {
    #[error("width must be at least 1, got {width}")]
    InvalidWidth { width: usize },
    #[error("value {value} does not fit in {width} bits")]
    WidthOverflow { value: u64, width: usize },
    #[error("expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("summand {value} exceeds the 63-bit input bound")]
    InputTooLarge { value: u64 },
    #[error("cloud returned a non-qotp response")]
    SchemeMismatch,
    #[error(transparent)]
    Cloud(#[from] CloudError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// Four key bit lists of equal width: a/b mask the first register (X and Z
/// gates), c/d the second. b never enters result decryption but is part of
/// the key material.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QotpKeys {
    pub a: Vec<u8>,
    pub b: Vec<u8>,
    pub c: Vec<u8>,
    pub d: Vec<u8>,
}

impl QotpKeys {
    pub fn width(&self) -> usize {
        self.a.len()
    }
}

/// The two encrypted summand registers: basis bits plus each register's sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QotpCipherPair {
    pub x_bits: Vec<u8>,
    pub y_bits: Vec<u8>,
    pub x_phase: Sign,
    pub y_phase: Sign,
}

impl QotpCipherPair {
    pub fn width(&self) -> usize {
        self.x_bits.len()
    }
}

/// 4w independent uniform bits, deterministic per seed.
pub fn keygen<R: Rng>(width: usize, rng: &mut R) -> Result<QotpKeys, QotpError> {
    if width == 0 {
        return Err(QotpError::InvalidWidth { width });
    }
    let mut draw = |_: usize| (0..width).map(|_| u8::from(rng.random::<bool>())).collect();
    Ok(QotpKeys {
        a: draw(0),
        b: draw(1),
        c: draw(2),
        d: draw(3),
    })
}

/// Computes the arithmetic carry on quantum registers: per bit position a
/// multi-controlled X with the two summand bits as controls writes
/// m1[i] AND m2[i] into a carry register, whose measured value is shifted
/// left once. Equals (m1 AND m2) << 1.
pub fn bit_carry(m1: u64, m2: u64, width: usize) -> Result<u64, QotpError> {
    if width == 0 {
        return Err(QotpError::InvalidWidth { width });
    }
    for value in [m1, m2] {
        if width < 64 && value >> width != 0 {
            return Err(QotpError::WidthOverflow { value, width });
        }
    }
    let reg1 = BasisRegister::from_value(m1, width)?;
    let reg2 = BasisRegister::from_value(m2, width)?;
    let mut carry = BasisRegister::new(width)?;
    for i in 0..width {
        apply_mcx_between(&[(&reg1, i), (&reg2, i)], (&mut carry, i))?;
    }
    Ok(carry.measure() << 1)
}

/// Masks both summand registers, gate order X then Z per qubit.
pub fn encrypt(m1: u64, m2: u64, keys: &QotpKeys) -> Result<QotpCipherPair, QotpError> {
    let width = keys.width();
    for value in [m1, m2] {
        if width < 64 && value >> width != 0 {
            return Err(QotpError::WidthOverflow { value, width });
        }
    }
    let mut reg1 = BasisRegister::from_value(m1, width)?;
    let mut reg2 = BasisRegister::from_value(m2, width)?;
    for i in 0..width {
        if keys.a[i] == 1 {
            reg1.apply_x(i)?;
        }
        if keys.b[i] == 1 {
            reg1.apply_z(i)?;
        }
        if keys.c[i] == 1 {
            reg2.apply_x(i)?;
        }
        if keys.d[i] == 1 {
            reg2.apply_z(i)?;
        }
    }
    Ok(QotpCipherPair {
        x_bits: reg1.bits().to_vec(),
        y_bits: reg2.bits().to_vec(),
        x_phase: reg1.phase(),
        y_phase: reg2.phase(),
    })
}

/// Reference for what the cloud does: transversal CNOT from register 1 onto
/// register 2. On basis states CNOT leaves each register's sign alone, so
/// the returned sign is the product state's overall sign.
pub fn cloud_parity_add(pair: &QotpCipherPair) -> (Vec<u8>, Sign) {
    let bits = pair
        .x_bits
        .iter()
        .zip(&pair.y_bits)
        .map(|(x, y)| x ^ y)
        .collect();
    (bits, pair.x_phase * pair.y_phase)
}

/// Unmasks the parity-addition result with X^(a[i] xor c[i]) and Z^(d[i]),
/// measures m1 xor m2, and adds the precomputed carry.
pub fn decrypt(
    result_bits: &[u8],
    result_phase: Sign,
    keys: &QotpKeys,
    carry: u64,
) -> Result<u64, QotpError> {
    if result_bits.len() != keys.width() {
        return Err(QotpError::LengthMismatch {
            expected: keys.width(),
            got: result_bits.len(),
        });
    }
    let mut reg = BasisRegister::from_bits(result_bits, result_phase)?;
    for i in 0..keys.width() {
        if keys.a[i] ^ keys.c[i] == 1 {
            reg.apply_x(i)?;
        }
        if keys.d[i] == 1 {
            reg.apply_z(i)?;
        }
    }
    Ok(reg.measure() + carry)
}

/// Full pipeline: width from the summands, carry via Toffoli gates, fresh
/// keys, masking, one cloud round-trip, unmasking plus carry.
pub fn he_add<R: Rng>(
    m1: u64,
    m2: u64,
    cloud: &dyn AdditionService,
    rng: &mut R,
) -> Result<u64, QotpError> {
    for value in [m1, m2] {
        if value >> 63 != 0 {
            return Err(QotpError::InputTooLarge { value });
        }
    }
    let bits = |v: u64| (64 - v.leading_zeros()) as usize;
    let width = bits(m1).max(bits(m2)).max(1);
    let carry = bit_carry(m1, m2, width)?;
    let keys = keygen(width, rng)?;
    let pair = encrypt(m1, m2, &keys)?;
    let response = cloud.process(&ProcessRequest::Qotp { pair })?;
    let ProcessResponse::Qotp { bits, phase } = response else {
        return Err(QotpError::SchemeMismatch);
    };
    decrypt(&bits, phase, &keys, carry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::LocalCloud;
    use crate::qsim::apply_cnot_between;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    #[test]
    fn keygen_shape_and_determinism() {
        let keys = keygen(3, &mut rng(0)).unwrap();
        assert_eq!(keys.a.len(), 3);
        assert_eq!(keys.b.len(), 3);
        assert_eq!(keys.c.len(), 3);
        assert_eq!(keys.d.len(), 3);
        assert_eq!(keys, keygen(3, &mut rng(0)).unwrap());
        assert!(matches!(keygen(0, &mut rng(0)), Err(QotpError::InvalidWidth { .. })));
    }

    #[test]
    fn keygen_bits_are_roughly_balanced() {
        let mut ones = [0u32; 4];
        let mut r = rng(1);
        let draws = 2500; // 2500 keys x 4 bits per list = 10000 draws per list
        for _ in 0..draws {
            let keys = keygen(4, &mut r).unwrap();
            for (i, list) in [&keys.a, &keys.b, &keys.c, &keys.d].iter().enumerate() {
                ones[i] += list.iter().map(|&b| u32::from(b)).sum::<u32>();
            }
        }
        for count in ones {
            let mean = f64::from(count) / (draws as f64 * 4.0);
            assert!((0.45..=0.55).contains(&mean), "mean = {mean}");
        }
    }

    #[test]
    fn bit_carry_cases() {
        assert_eq!(bit_carry(5, 3, 3).unwrap(), 2);
        assert_eq!(bit_carry(12, 0, 4).unwrap(), 0);
        assert_eq!(bit_carry(0b11, 0b11, 2).unwrap(), 0b110);
    }

    #[test]
    fn bit_carry_matches_and_shift_oracle() {
        let mut r = rng(2);
        for _ in 0..200 {
            let m1 = u64::from(r.random::<u16>());
            let m2 = u64::from(r.random::<u16>());
            assert_eq!(bit_carry(m1, m2, 16).unwrap(), (m1 & m2) << 1);
        }
    }

    #[test]
    fn bit_carry_rejects_overflow() {
        assert!(matches!(
            bit_carry(8, 0, 3),
            Err(QotpError::WidthOverflow { value: 8, width: 3 })
        ));
    }

    #[test]
    fn encrypt_with_identity_keys_is_transparent() {
        let keys = QotpKeys {
            a: vec![0; 4],
            b: vec![0; 4],
            c: vec![0; 4],
            d: vec![0; 4],
        };
        let pair = encrypt(0b1010, 0b0110, &keys).unwrap();
        assert_eq!(pair.x_bits, vec![0, 1, 0, 1]);
        assert_eq!(pair.y_bits, vec![0, 1, 1, 0]);
        assert_eq!(pair.x_phase, Sign::Plus);
        assert_eq!(pair.y_phase, Sign::Plus);
    }

    #[test]
    fn encrypted_bit_is_plain_bit_xor_key_bit() {
        let mut r = rng(3);
        for _ in 0..100 {
            let keys = keygen(8, &mut r).unwrap();
            let m1 = u64::from(r.random::<u8>());
            let m2 = u64::from(r.random::<u8>());
            let pair = encrypt(m1, m2, &keys).unwrap();
            for i in 0..8 {
                assert_eq!(pair.x_bits[i], (((m1 >> i) & 1) as u8) ^ keys.a[i]);
                assert_eq!(pair.y_bits[i], (((m2 >> i) & 1) as u8) ^ keys.c[i]);
            }
        }
    }

    #[test]
    fn single_x_key_flips_bit() {
        let keys = QotpKeys {
            a: vec![1],
            b: vec![0],
            c: vec![0],
            d: vec![0],
        };
        let pair = encrypt(0, 0, &keys).unwrap();
        assert_eq!(pair.x_bits, vec![1]);
    }

    #[test]
    fn z_key_on_set_qubit_flips_sign() {
        let keys = QotpKeys {
            a: vec![0],
            b: vec![1],
            c: vec![0],
            d: vec![0],
        };
        let pair = encrypt(1, 0, &keys).unwrap();
        assert_eq!(pair.x_phase, Sign::Minus);
        assert_eq!(pair.y_phase, Sign::Plus);
    }

    #[test]
    fn double_encryption_restores_bits() {
        let mut r = rng(4);
        for _ in 0..50 {
            let keys = keygen(6, &mut r).unwrap();
            let m1 = r.random_range(0..64u64);
            let m2 = r.random_range(0..64u64);
            let once = encrypt(m1, m2, &keys).unwrap();
            let x_again: Vec<u8> = once
                .x_bits
                .iter()
                .enumerate()
                .map(|(i, &b)| b ^ keys.a[i])
                .collect();
            let restored = x_again
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i));
            assert_eq!(restored, m1);
        }
    }

    #[test]
    fn parity_add_matches_qsim_cnot_loop() {
        let mut r = rng(5);
        for _ in 0..100 {
            let keys = keygen(5, &mut r).unwrap();
            let m1 = r.random_range(0..32u64);
            let m2 = r.random_range(0..32u64);
            let pair = encrypt(m1, m2, &keys).unwrap();
            let (bits, _) = cloud_parity_add(&pair);

            let control = BasisRegister::from_bits(&pair.x_bits, pair.x_phase).unwrap();
            let mut target = BasisRegister::from_bits(&pair.y_bits, pair.y_phase).unwrap();
            for i in 0..5 {
                apply_cnot_between((&control, i), (&mut target, i)).unwrap();
            }
            assert_eq!(bits, target.bits());
        }
    }

    #[test]
    fn parity_add_xor_cases() {
        let pair = QotpCipherPair {
            x_bits: vec![1, 0, 1],
            y_bits: vec![0, 1, 1],
            x_phase: Sign::Plus,
            y_phase: Sign::Minus,
        };
        let (bits, phase) = cloud_parity_add(&pair);
        assert_eq!(bits, vec![1, 1, 0]);
        assert_eq!(phase, Sign::Minus);
    }

    #[test]
    fn decrypt_identity_keys_returns_raw_bits_plus_carry() {
        let keys = QotpKeys {
            a: vec![0; 3],
            b: vec![0; 3],
            c: vec![0; 3],
            d: vec![0; 3],
        };
        assert_eq!(decrypt(&[1, 0, 1], Sign::Plus, &keys, 0).unwrap(), 5);
        assert_eq!(decrypt(&[1, 0, 1], Sign::Plus, &keys, 4).unwrap(), 9);
    }

    #[test]
    fn full_protocol_on_known_pair() {
        // 6 xor 3 = 5, carry = (6 and 3) << 1 = 4, total 9.
        let mut r = rng(6);
        let keys = keygen(3, &mut r).unwrap();
        let carry = bit_carry(6, 3, 3).unwrap();
        assert_eq!(carry, 4);
        let pair = encrypt(6, 3, &keys).unwrap();
        let (bits, phase) = cloud_parity_add(&pair);
        assert_eq!(decrypt(&bits, phase, &keys, carry).unwrap(), 9);
    }

    #[test]
    fn exhaustive_3bit_pairs_over_many_keys() {
        let mut r = rng(7);
        for _ in 0..50 {
            let keys = keygen(3, &mut r).unwrap();
            for m1 in 0..8u64 {
                for m2 in 0..8u64 {
                    let carry = bit_carry(m1, m2, 3).unwrap();
                    let pair = encrypt(m1, m2, &keys).unwrap();
                    let (bits, phase) = cloud_parity_add(&pair);
                    assert_eq!(decrypt(&bits, phase, &keys, carry).unwrap(), m1 + m2);
                }
            }
        }
    }

    #[test]
    fn decrypt_rejects_length_mismatch() {
        let keys = keygen(4, &mut rng(8)).unwrap();
        assert!(matches!(
            decrypt(&[0, 1], Sign::Plus, &keys, 0),
            Err(QotpError::LengthMismatch { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn he_add_small_cases() {
        let cloud = LocalCloud;
        assert_eq!(he_add(0, 0, &cloud, &mut rng(9)).unwrap(), 0);
        assert_eq!(he_add(5, 3, &cloud, &mut rng(10)).unwrap(), 8);
        assert_eq!(he_add(6, 3, &cloud, &mut rng(11)).unwrap(), 9);
    }

    #[test]
    fn he_add_matches_integer_addition_randomized() {
        let cloud = LocalCloud;
        let mut r = rng(12);
        for _ in 0..200 {
            let a = u64::from(r.random::<u32>());
            let b = u64::from(r.random::<u32>());
            assert_eq!(he_add(a, b, &cloud, &mut r).unwrap(), a + b);
        }
    }

    #[test]
    fn he_add_rejects_oversized_inputs() {
        assert!(matches!(
            he_add(1 << 63, 1, &LocalCloud, &mut rng(13)),
            Err(QotpError::InputTooLarge { .. })
        ));
    }
}
