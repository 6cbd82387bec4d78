//! Scheme-tagged, bit-exact serialization for the `/process` protocol.
//!
//! Documents are canonical JSON: object keys sorted, no insignificant
//! whitespace, integers decimal and unquoted (at most 2^63 - 1), no floats.
//! Requests carry two ciphertexts under `payload`, responses one result
//! under `result`; both are tagged with `scheme`. Decoding is strict:
//! unknown fields, ragged rows, out-of-range entries, and shape mismatches
//! are rejected with the offending field path.

use serde_json::{Map, Value};
use thiserror::Error;

use crate::bitlinalg::BitVector;
use crate::chen::ChenCiphertext;
use crate::modlinalg::ZqMatrix;
use crate::qotp::QotpCipherPair;
use crate::qsim::Sign;

/// Segment width fixed by the wire format: Hamming(7,4) codewords.
pub const CHEN_SEGMENT_BITS: usize = 7;

/// Largest integer allowed on the wire.
pub const MAX_WIRE_INT: u64 = i64::MAX as u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error("{path}: {reason}")]
    Validation { path: String, reason: String },
    #[error("encode error: {0}")]
    Encode(String),
}

fn validation(path: impl Into<String>, reason: impl Into<String>) -> WireError {
    WireError::Validation {
        path: path.into(),
        reason: reason.into(),
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Scheme {
    Chen,
    Gsw,
    Qotp,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Chen => "chen",
            Scheme::Gsw => "gsw",
            Scheme::Qotp => "qotp",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        match s {
            "chen" => Some(Scheme::Chen),
            "gsw" => Some(Scheme::Gsw),
            "qotp" => Some(Scheme::Qotp),
            _ => None,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A request to the addition service: two ciphertexts of one scheme.
#[derive(Clone, Debug)]
pub enum ProcessRequest {
    Chen { a: ChenCiphertext, b: ChenCiphertext },
    Gsw { c1: ZqMatrix, c2: ZqMatrix },
    Qotp { pair: QotpCipherPair },
}

/// The service's answer: one combined ciphertext.
#[derive(Clone, Debug)]
pub enum ProcessResponse {
    Chen { segments: ChenCiphertext },
    Gsw { c: ZqMatrix },
    Qotp { bits: Vec<u8>, phase: Sign },
}

/// What a response must look like to match the request it answers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResponseContext {
    Chen { segments: usize },
    Gsw { n: usize, m: usize, q: u64 },
    Qotp { width: usize },
}

impl ResponseContext {
    pub fn scheme(&self) -> Scheme {
        match self {
            ResponseContext::Chen { .. } => Scheme::Chen,
            ResponseContext::Gsw { .. } => Scheme::Gsw,
            ResponseContext::Qotp { .. } => Scheme::Qotp,
        }
    }
}

impl ProcessRequest {
    pub fn scheme(&self) -> Scheme {
        match self {
            ProcessRequest::Chen { .. } => Scheme::Chen,
            ProcessRequest::Gsw { .. } => Scheme::Gsw,
            ProcessRequest::Qotp { .. } => Scheme::Qotp,
        }
    }

    pub fn response_context(&self) -> ResponseContext {
        match self {
            ProcessRequest::Chen { a, .. } => ResponseContext::Chen {
                segments: a.segment_count(),
            },
            ProcessRequest::Gsw { c1, .. } => ResponseContext::Gsw {
                n: c1.rows(),
                m: c1.cols(),
                q: c1.modulus(),
            },
            ProcessRequest::Qotp { pair } => ResponseContext::Qotp {
                width: pair.width(),
            },
        }
    }
}

impl ProcessResponse {
    pub fn scheme(&self) -> Scheme {
        match self {
            ProcessResponse::Chen { .. } => Scheme::Chen,
            ProcessResponse::Gsw { .. } => Scheme::Gsw,
            ProcessResponse::Qotp { .. } => Scheme::Qotp,
        }
    }
}

// --- canonical value construction ---------------------------------------

/// Builds an object from key/value pairs that must already be in sorted key
/// order, so the output is canonical whether or not the underlying map
/// preserves insertion order.
fn obj(pairs: Vec<(&str, Value)>) -> Value {
    debug_assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0), "keys must be sorted");
    let mut map = Map::new();
    for (k, v) in pairs {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

fn bits_value(bits: &[u8]) -> Value {
    Value::Array(bits.iter().map(|&b| Value::from(u64::from(b))).collect())
}

fn segments_value(ct: &ChenCiphertext) -> Result<Value, WireError> {
    let mut rows = Vec::with_capacity(ct.segment_count());
    for segment in ct.segments() {
        if segment.len() != CHEN_SEGMENT_BITS {
            return Err(WireError::Encode(format!(
                "chen segment has {} bits, wire format requires {}",
                segment.len(),
                CHEN_SEGMENT_BITS
            )));
        }
        rows.push(bits_value(segment.bits()));
    }
    Ok(Value::Array(rows))
}

fn matrix_value(m: &ZqMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|r| Value::Array(m.row(r).iter().map(|&v| Value::from(v)).collect()))
            .collect(),
    )
}

fn phase_value(sign: Sign) -> Value {
    Value::from(i64::from(sign.as_i8()))
}

fn canonical(value: &Value) -> String {
    serde_json::to_string(value).expect("canonical values always serialize")
}

fn check_gsw_pair(c1: &ZqMatrix, c2: &ZqMatrix) -> Result<(), WireError> {
    if c1.modulus() != c2.modulus() {
        return Err(WireError::Encode(format!(
            "gsw ciphertext moduli differ: {} vs {}",
            c1.modulus(),
            c2.modulus()
        )));
    }
    if c1.rows() != c2.rows() || c1.cols() != c2.cols() {
        return Err(WireError::Encode(format!(
            "gsw ciphertext shapes differ: {}x{} vs {}x{}",
            c1.rows(),
            c1.cols(),
            c2.rows(),
            c2.cols()
        )));
    }
    if c1.modulus() > MAX_WIRE_INT {
        return Err(WireError::Encode(format!(
            "modulus {} exceeds the wire integer bound",
            c1.modulus()
        )));
    }
    Ok(())
}

/// Canonical document for a request.
pub fn encode_request(request: &ProcessRequest) -> Result<String, WireError> {
    let payload = match request {
        ProcessRequest::Chen { a, b } => {
            if a.segment_count() != b.segment_count() {
                return Err(WireError::Encode(format!(
                    "chen ciphertext segment counts differ: {} vs {}",
                    a.segment_count(),
                    b.segment_count()
                )));
            }
            obj(vec![("a", segments_value(a)?), ("b", segments_value(b)?)])
        }
        ProcessRequest::Gsw { c1, c2 } => {
            check_gsw_pair(c1, c2)?;
            obj(vec![
                ("c1", matrix_value(c1)),
                ("c2", matrix_value(c2)),
                ("m", Value::from(c1.cols() as u64)),
                ("n", Value::from(c1.rows() as u64)),
                ("q", Value::from(c1.modulus())),
            ])
        }
        ProcessRequest::Qotp { pair } => {
            if pair.x_bits.len() != pair.y_bits.len() {
                return Err(WireError::Encode(format!(
                    "qotp register widths differ: {} vs {}",
                    pair.x_bits.len(),
                    pair.y_bits.len()
                )));
            }
            obj(vec![
                ("x", bits_value(&pair.x_bits)),
                ("x_phase", phase_value(pair.x_phase)),
                ("y", bits_value(&pair.y_bits)),
                ("y_phase", phase_value(pair.y_phase)),
            ])
        }
    };
    Ok(canonical(&obj(vec![
        ("payload", payload),
        ("scheme", Value::from(request.scheme().as_str())),
    ])))
}

/// Canonical document for a response.
pub fn encode_response(response: &ProcessResponse) -> Result<String, WireError> {
    let result = match response {
        ProcessResponse::Chen { segments } => obj(vec![("segments", segments_value(segments)?)]),
        ProcessResponse::Gsw { c } => {
            if c.modulus() > MAX_WIRE_INT {
                return Err(WireError::Encode(format!(
                    "modulus {} exceeds the wire integer bound",
                    c.modulus()
                )));
            }
            obj(vec![("c", matrix_value(c))])
        }
        ProcessResponse::Qotp { bits, phase } => obj(vec![
            ("bits", bits_value(bits)),
            ("phase", phase_value(*phase)),
        ]),
    };
    Ok(canonical(&obj(vec![
        ("result", result),
        ("scheme", Value::from(response.scheme().as_str())),
    ])))
}

// --- strict decoding -----------------------------------------------------

fn decode_envelope(document: &str, content_key: &str) -> Result<(Scheme, Value), WireError> {
    let root: Value =
        serde_json::from_str(document).map_err(|e| WireError::Parse(e.to_string()))?;
    let Value::Object(map) = root else {
        return Err(WireError::Parse("document root must be an object".into()));
    };
    for key in map.keys() {
        if key != "scheme" && key != content_key {
            return Err(WireError::Parse(format!("unexpected field `{key}`")));
        }
    }
    let scheme_value = map
        .get("scheme")
        .ok_or_else(|| WireError::Parse("missing field `scheme`".into()))?;
    let scheme_str = scheme_value
        .as_str()
        .ok_or_else(|| WireError::Parse("`scheme` must be a string".into()))?;
    let scheme =
        Scheme::parse(scheme_str).ok_or_else(|| WireError::UnknownScheme(scheme_str.into()))?;
    let content = map
        .get(content_key)
        .cloned()
        .ok_or_else(|| WireError::Parse(format!("missing field `{content_key}`")))?;
    Ok((scheme, content))
}

fn expect_object<'a>(value: &'a Value, path: &str) -> Result<&'a Map<String, Value>, WireError> {
    value
        .as_object()
        .ok_or_else(|| validation(path, "expected an object"))
}

fn expect_keys(map: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<(), WireError> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(validation(format!("{path}.{key}"), "unknown field"));
        }
    }
    for key in allowed {
        if !map.contains_key(*key) {
            return Err(validation(format!("{path}.{key}"), "missing field"));
        }
    }
    Ok(())
}

fn expect_array<'a>(value: &'a Value, path: &str) -> Result<&'a Vec<Value>, WireError> {
    value
        .as_array()
        .ok_or_else(|| validation(path, "expected an array"))
}

fn expect_bit(value: &Value, path: &str) -> Result<u8, WireError> {
    match value.as_u64() {
        Some(0) => Ok(0),
        Some(1) => Ok(1),
        _ => Err(validation(path, "expected 0 or 1")),
    }
}

fn expect_int_in(value: &Value, lo: u64, hi: u64, path: &str) -> Result<u64, WireError> {
    let v = value
        .as_u64()
        .ok_or_else(|| validation(path, "expected a non-negative integer"))?;
    if v < lo || v > hi {
        return Err(validation(path, format!("value {v} outside range {lo}..={hi}")));
    }
    Ok(v)
}

fn decode_bit_list(value: &Value, path: &str) -> Result<Vec<u8>, WireError> {
    let arr = expect_array(value, path)?;
    if arr.is_empty() {
        return Err(validation(path, "must not be empty"));
    }
    arr.iter()
        .enumerate()
        .map(|(i, v)| expect_bit(v, &format!("{path}[{i}]")))
        .collect()
}

fn decode_phase(value: &Value, path: &str) -> Result<Sign, WireError> {
    value
        .as_i64()
        .and_then(|v| i8::try_from(v).ok())
        .and_then(Sign::from_i8)
        .ok_or_else(|| validation(path, "expected 1 or -1"))
}

fn decode_chen_ciphertext(value: &Value, path: &str) -> Result<ChenCiphertext, WireError> {
    let arr = expect_array(value, path)?;
    if arr.is_empty() {
        return Err(validation(path, "must contain at least one segment"));
    }
    let mut segments = Vec::with_capacity(arr.len());
    for (i, segment) in arr.iter().enumerate() {
        let seg_path = format!("{path}[{i}]");
        let seg = expect_array(segment, &seg_path)?;
        if seg.len() != CHEN_SEGMENT_BITS {
            return Err(validation(
                seg_path,
                format!("expected {CHEN_SEGMENT_BITS} entries, got {}", seg.len()),
            ));
        }
        let bits = seg
            .iter()
            .enumerate()
            .map(|(j, v)| expect_bit(v, &format!("{seg_path}[{j}]")))
            .collect::<Result<Vec<u8>, _>>()?;
        segments.push(BitVector::from_bits(&bits));
    }
    Ok(ChenCiphertext::from_segments(segments))
}

fn decode_zq_matrix(
    value: &Value,
    n: usize,
    m: usize,
    q: u64,
    path: &str,
) -> Result<ZqMatrix, WireError> {
    let arr = expect_array(value, path)?;
    if arr.len() != n {
        return Err(validation(
            path,
            format!("expected {n} rows, got {}", arr.len()),
        ));
    }
    let mut rows = Vec::with_capacity(n);
    for (i, row_value) in arr.iter().enumerate() {
        let row_path = format!("{path}[{i}]");
        let row = expect_array(row_value, &row_path)?;
        if row.len() != m {
            return Err(validation(
                row_path,
                format!("expected {m} entries, got {}", row.len()),
            ));
        }
        let entries = row
            .iter()
            .enumerate()
            .map(|(j, v)| expect_int_in(v, 0, q - 1, &format!("{row_path}[{j}]")))
            .collect::<Result<Vec<u64>, _>>()?;
        rows.push(entries);
    }
    Ok(ZqMatrix::from_rows(&rows, q))
}

/// Parses and validates a request document into typed ciphertexts.
pub fn decode_request(document: &str) -> Result<ProcessRequest, WireError> {
    let (scheme, payload) = decode_envelope(document, "payload")?;
    let map = expect_object(&payload, "payload")?;
    match scheme {
        Scheme::Chen => {
            expect_keys(map, &["a", "b"], "payload")?;
            let a = decode_chen_ciphertext(&map["a"], "payload.a")?;
            let b = decode_chen_ciphertext(&map["b"], "payload.b")?;
            if a.segment_count() != b.segment_count() {
                return Err(validation(
                    "payload.b",
                    format!(
                        "segment count {} does not match payload.a ({})",
                        b.segment_count(),
                        a.segment_count()
                    ),
                ));
            }
            Ok(ProcessRequest::Chen { a, b })
        }
        Scheme::Gsw => {
            expect_keys(map, &["c1", "c2", "m", "n", "q"], "payload")?;
            let q = expect_int_in(&map["q"], 2, MAX_WIRE_INT, "payload.q")?;
            let n = expect_int_in(&map["n"], 1, MAX_WIRE_INT, "payload.n")? as usize;
            let m = expect_int_in(&map["m"], 1, MAX_WIRE_INT, "payload.m")? as usize;
            let c1 = decode_zq_matrix(&map["c1"], n, m, q, "payload.c1")?;
            let c2 = decode_zq_matrix(&map["c2"], n, m, q, "payload.c2")?;
            Ok(ProcessRequest::Gsw { c1, c2 })
        }
        Scheme::Qotp => {
            expect_keys(map, &["x", "x_phase", "y", "y_phase"], "payload")?;
            let x_bits = decode_bit_list(&map["x"], "payload.x")?;
            let y_bits = decode_bit_list(&map["y"], "payload.y")?;
            if y_bits.len() != x_bits.len() {
                return Err(validation(
                    "payload.y",
                    format!(
                        "length {} does not match payload.x length {}",
                        y_bits.len(),
                        x_bits.len()
                    ),
                ));
            }
            let x_phase = decode_phase(&map["x_phase"], "payload.x_phase")?;
            let y_phase = decode_phase(&map["y_phase"], "payload.y_phase")?;
            Ok(ProcessRequest::Qotp {
                pair: QotpCipherPair {
                    x_bits,
                    y_bits,
                    x_phase,
                    y_phase,
                },
            })
        }
    }
}

/// Parses and validates a response document against the request's context.
pub fn decode_response(
    document: &str,
    context: &ResponseContext,
) -> Result<ProcessResponse, WireError> {
    let (scheme, result) = decode_envelope(document, "result")?;
    if scheme != context.scheme() {
        return Err(validation(
            "scheme",
            format!("expected {}, got {scheme}", context.scheme()),
        ));
    }
    let map = expect_object(&result, "result")?;
    match *context {
        ResponseContext::Chen { segments } => {
            expect_keys(map, &["segments"], "result")?;
            let ct = decode_chen_ciphertext(&map["segments"], "result.segments")?;
            if ct.segment_count() != segments {
                return Err(validation(
                    "result.segments",
                    format!("expected {segments} segments, got {}", ct.segment_count()),
                ));
            }
            Ok(ProcessResponse::Chen { segments: ct })
        }
        ResponseContext::Gsw { n, m, q } => {
            expect_keys(map, &["c"], "result")?;
            let c = decode_zq_matrix(&map["c"], n, m, q, "result.c")?;
            Ok(ProcessResponse::Gsw { c })
        }
        ResponseContext::Qotp { width } => {
            expect_keys(map, &["bits", "phase"], "result")?;
            let bits = decode_bit_list(&map["bits"], "result.bits")?;
            if bits.len() != width {
                return Err(validation(
                    "result.bits",
                    format!("expected {width} bits, got {}", bits.len()),
                ));
            }
            let phase = decode_phase(&map["phase"], "result.phase")?;
            Ok(ProcessResponse::Qotp { bits, phase })
        }
    }
}
