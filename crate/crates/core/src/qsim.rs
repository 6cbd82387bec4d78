//! Minimal quantum register simulator for computational basis states.
//!
//! The gate set here (X, Z, CNOT, multi-controlled X) maps basis states to
//! basis states up to a global sign, so a register is exactly a bit string
//! plus a sign. No amplitudes are stored; Z contributes a global phase flip
//! when its qubit is 1 and everything else is classical reversible logic.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QsimError {
    #[error("register width must be between 1 and 64, got {width}")]
    InvalidWidth { width: usize },
    #[error("value {value} does not fit in {width} bits")]
    WidthOverflow { value: u64, width: usize },
    #[error("qubit index {index} out of range for width {width}")]
    IndexOutOfRange { index: usize, width: usize },
    #[error("control and target collide at index {index}")]
    IndexCollision { index: usize },
    #[error("multi-controlled X needs at least one control")]
    NoControls,
}

/// Global sign of a basis state.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i8(value: i8) -> Option<Sign> {
        match value {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// A w-qubit register in a computational basis state. Index 0 is the least
/// significant qubit; measurement is deterministic and returns the bits.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BasisRegister {
    bits: Vec<u8>,
    phase: Sign,
}

impl BasisRegister {
    /// All-zero register of the given width.
    pub fn new(width: usize) -> Result<Self, QsimError> {
        if width == 0 || width > 64 {
            return Err(QsimError::InvalidWidth { width });
        }
        Ok(Self {
            bits: vec![0; width],
            phase: Sign::Plus,
        })
    }

    /// Register loaded with `value`, little-endian.
    pub fn from_value(value: u64, width: usize) -> Result<Self, QsimError> {
        if width == 0 || width > 64 {
            return Err(QsimError::InvalidWidth { width });
        }
        if width < 64 && value >> width != 0 {
            return Err(QsimError::WidthOverflow { value, width });
        }
        Ok(Self {
            bits: (0..width).map(|i| ((value >> i) & 1) as u8).collect(),
            phase: Sign::Plus,
        })
    }

    pub fn from_bits(bits: &[u8], phase: Sign) -> Result<Self, QsimError> {
        if bits.is_empty() || bits.len() > 64 {
            return Err(QsimError::InvalidWidth { width: bits.len() });
        }
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        Ok(Self {
            bits: bits.to_vec(),
            phase,
        })
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn phase(&self) -> Sign {
        self.phase
    }

    /// Deterministic measurement: the bits as a little-endian integer.
    pub fn measure(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    fn check_index(&self, index: usize) -> Result<(), QsimError> {
        if index >= self.bits.len() {
            return Err(QsimError::IndexOutOfRange {
                index,
                width: self.bits.len(),
            });
        }
        Ok(())
    }

    /// Pauli X: flips bit i, leaves the sign alone.
    pub fn apply_x(&mut self, i: usize) -> Result<(), QsimError> {
        self.check_index(i)?;
        self.bits[i] ^= 1;
        Ok(())
    }

    /// Pauli Z: negates the global sign when bit i is 1.
    pub fn apply_z(&mut self, i: usize) -> Result<(), QsimError> {
        self.check_index(i)?;
        if self.bits[i] == 1 {
            self.phase = self.phase.flip();
        }
        Ok(())
    }

    /// CNOT within one register: target ^= control. Sign unchanged.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<(), QsimError> {
        self.check_index(control)?;
        self.check_index(target)?;
        if control == target {
            return Err(QsimError::IndexCollision { index: control });
        }
        self.bits[target] ^= self.bits[control];
        Ok(())
    }

    /// Multi-controlled X within one register: target ^= AND of all controls.
    pub fn apply_mcx(&mut self, controls: &[usize], target: usize) -> Result<(), QsimError> {
        if controls.is_empty() {
            return Err(QsimError::NoControls);
        }
        self.check_index(target)?;
        for &c in controls {
            self.check_index(c)?;
            if c == target {
                return Err(QsimError::IndexCollision { index: c });
            }
        }
        if controls.iter().all(|&c| self.bits[c] == 1) {
            self.bits[target] ^= 1;
        }
        Ok(())
    }
}

/// CNOT between two registers: the target register and control register keep
/// their own signs, which CNOT never touches on basis states.
pub fn apply_cnot_between(
    control: (&BasisRegister, usize),
    target: (&mut BasisRegister, usize),
) -> Result<(), QsimError> {
    let (creg, ci) = control;
    let (treg, ti) = target;
    creg.check_index(ci)?;
    treg.check_index(ti)?;
    treg.bits[ti] ^= creg.bits[ci];
    Ok(())
}

/// Multi-controlled X with controls possibly drawn from several registers
/// and the target in another: target ^= AND of all control bits.
pub fn apply_mcx_between(
    controls: &[(&BasisRegister, usize)],
    target: (&mut BasisRegister, usize),
) -> Result<(), QsimError> {
    if controls.is_empty() {
        return Err(QsimError::NoControls);
    }
    let (treg, ti) = target;
    treg.check_index(ti)?;
    for &(creg, ci) in controls {
        creg.check_index(ci)?;
    }
    if controls.iter().all(|&(creg, ci)| creg.bits[ci] == 1) {
        treg.bits[ti] ^= 1;
    }
    Ok(())
}
