//! Additive homomorphic encryption at desk scale, plus the client/cloud
//! protocol for outsourcing the addition itself.
//!
//! Three schemes share one pipeline shape: the client generates keys and
//! encrypts two integers, a stateless service combines the ciphertexts, and
//! the client decrypts and (where the scheme is XOR-homomorphic rather than
//! arithmetic) adds a carry it computed on the plaintexts before encryption.
//!
//! - [`chen`]: McEliece-style encryption over Hamming(7,4) codewords;
//!   ciphertext XOR decrypts to plaintext XOR.
//! - [`gsw`]: LWE encryption with a powers-of-two gadget matrix; ciphertext
//!   addition decrypts to message addition inside a bounded message space.
//! - [`qotp`]: per-qubit Pauli masking of basis-state registers; the cloud
//!   applies a transversal CNOT.
//!
//! Substrate modules: [`bitlinalg`] (GF(2) matrices), [`modlinalg`]
//! (arithmetic mod q, primes, noise), [`qsim`] (basis-state register
//! simulation). The [`wire`] module freezes the canonical JSON protocol and
//! [`cloud`] defines the service abstraction with an in-process loopback.
//!
//! ```
//! use hecloud_core::chen;
//! use hecloud_core::cloud::LocalCloud;
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
//! let keys = chen::keygen(4, &mut rng).unwrap();
//! let sum = chen::he_add(200, 100, &keys, &LocalCloud).unwrap();
//! assert_eq!(sum, 300);
//! ```

pub mod bitlinalg;
pub mod chen;
pub mod cloud;
pub mod gsw;
pub mod modlinalg;
pub mod qotp;
pub mod qsim;
pub mod wire;

pub use cloud::{AdditionService, CloudError, LocalCloud};
pub use wire::{ProcessRequest, ProcessResponse, Scheme};
