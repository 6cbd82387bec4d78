//! The addition-service abstraction the schemes talk to.
//!
//! `combine` is the single homomorphic-combine routine: segment-wise XOR for
//! chen, entry-wise sum mod q for gsw, transversal XOR plus sign product for
//! qotp. The HTTP service wraps it behind `/process`; `LocalCloud` runs it
//! in-process so the client-side pipeline can be exercised and benchmarked
//! without serialization or transport.

use thiserror::Error;

use crate::wire::{ProcessRequest, ProcessResponse, WireError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CloudError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("service returned status {status}: {body}")]
    Http { status: u16, body: String },
    #[error(transparent)]
    Wire(#[from] WireError),
}

/// One blocking homomorphic-addition round trip.
pub trait AdditionService {
    fn process(&self, request: &ProcessRequest) -> Result<ProcessResponse, CloudError>;
}

/// Performs the scheme-appropriate combine on a validated request. The
/// service holds no keys; every branch is pure ciphertext arithmetic.
pub fn combine(request: &ProcessRequest) -> Result<ProcessResponse, WireError> {
    match request {
        ProcessRequest::Chen { a, b } => {
            let segments = a.xor_add(b).map_err(|e| WireError::Validation {
                path: "payload".into(),
                reason: e.to_string(),
            })?;
            Ok(ProcessResponse::Chen { segments })
        }
        ProcessRequest::Gsw { c1, c2 } => {
            let c = c1.add(c2).map_err(|e| WireError::Validation {
                path: "payload".into(),
                reason: e.to_string(),
            })?;
            Ok(ProcessResponse::Gsw { c })
        }
        ProcessRequest::Qotp { pair } => {
            if pair.x_bits.len() != pair.y_bits.len() {
                return Err(WireError::Validation {
                    path: "payload.y".into(),
                    reason: format!(
                        "length {} does not match payload.x length {}",
                        pair.y_bits.len(),
                        pair.x_bits.len()
                    ),
                });
            }
            let (bits, phase) = crate::qotp::cloud_parity_add(pair);
            Ok(ProcessResponse::Qotp { bits, phase })
        }
    }
}

/// In-process combine with no codec or network in the path.
#[derive(Clone, Copy, Debug, Default)]
pub struct LocalCloud;

impl AdditionService for LocalCloud {
    fn process(&self, request: &ProcessRequest) -> Result<ProcessResponse, CloudError> {
        Ok(combine(request)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitlinalg::BitVector;
    use crate::chen::ChenCiphertext;
    use crate::modlinalg::ZqMatrix;
    use crate::qotp::QotpCipherPair;
    use crate::qsim::Sign;

    #[test]
    fn combine_chen_is_segmentwise_xor() {
        let request = ProcessRequest::Chen {
            a: ChenCiphertext::from_segments(vec![BitVector::from_bits(&[1, 0, 1, 0, 1, 0, 1])]),
            b: ChenCiphertext::from_segments(vec![BitVector::from_bits(&[0, 1, 1, 0, 0, 1, 1])]),
        };
        let ProcessResponse::Chen { segments } = combine(&request).unwrap() else {
            panic!("wrong scheme");
        };
        assert_eq!(segments.segments()[0].bits(), &[1, 1, 0, 0, 1, 1, 0]);
    }

    #[test]
    fn combine_gsw_is_entrywise_sum_mod_q() {
        let request = ProcessRequest::Gsw {
            c1: ZqMatrix::from_rows(&[vec![3, 1]], 5),
            c2: ZqMatrix::from_rows(&[vec![4, 2]], 5),
        };
        let ProcessResponse::Gsw { c } = combine(&request).unwrap() else {
            panic!("wrong scheme");
        };
        assert_eq!(c.row(0), &[2, 3]);
    }

    #[test]
    fn combine_qotp_is_xor_with_phase_product() {
        let request = ProcessRequest::Qotp {
            pair: QotpCipherPair {
                x_bits: vec![1, 0, 1],
                y_bits: vec![1, 1, 0],
                x_phase: Sign::Minus,
                y_phase: Sign::Minus,
            },
        };
        let ProcessResponse::Qotp { bits, phase } = combine(&request).unwrap() else {
            panic!("wrong scheme");
        };
        assert_eq!(bits, vec![0, 1, 1]);
        assert_eq!(phase, Sign::Plus);
    }

    #[test]
    fn combine_rejects_mismatched_operands() {
        let request = ProcessRequest::Gsw {
            c1: ZqMatrix::from_rows(&[vec![3, 1]], 5),
            c2: ZqMatrix::from_rows(&[vec![4, 2]], 7),
        };
        assert!(matches!(
            combine(&request),
            Err(WireError::Validation { .. })
        ));
    }

    #[test]
    fn local_cloud_delegates_to_combine() {
        let request = ProcessRequest::Qotp {
            pair: QotpCipherPair {
                x_bits: vec![1],
                y_bits: vec![1],
                x_phase: Sign::Plus,
                y_phase: Sign::Plus,
            },
        };
        let ProcessResponse::Qotp { bits, .. } = LocalCloud.process(&request).unwrap() else {
            panic!("wrong scheme");
        };
        assert_eq!(bits, vec![0]);
    }
}
