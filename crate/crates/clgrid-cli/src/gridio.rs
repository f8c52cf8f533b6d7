//! Binary grid dumps and CSV formatting.
//!
//! Dump layout: a 40-byte header (the magic `CLGRID01`, two little-endian
//! `u64` dimension counts for rows and columns, two little-endian IEEE-754
//! `f64` grid spacings for the row and column steps) followed by the samples
//! in row-major order as interleaved `(re, im)` `f64` pairs. Axes are
//! symmetric about zero and endpoint-exclusive, so the spacings fix the
//! coordinates.

use num_complex::Complex64 as C64;

pub const MAGIC: &[u8; 8] = b"CLGRID01";
pub const HEADER_LEN: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct GridDump {
    pub rows: u64,
    pub cols: u64,
    pub row_step: f64,
    pub col_step: f64,
    pub values: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeError {
    TooShort,
    BadMagic,
    SizeMismatch { expected: u64, actual: u64 },
}

impl std::fmt::Display for DecodeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecodeError::TooShort => write!(f, "grid dump shorter than the 40-byte header"),
            DecodeError::BadMagic => write!(f, "grid dump magic is not CLGRID01"),
            DecodeError::SizeMismatch { expected, actual } => write!(
                f,
                "grid dump payload holds {actual} bytes but the header implies {expected}"
            ),
        }
    }
}

impl std::error::Error for DecodeError {}

pub fn encode_grid(rows: u64, cols: u64, row_step: f64, col_step: f64, values: &[C64]) -> Vec<u8> {
    assert_eq!(rows as u128 * cols as u128, values.len() as u128);
    let mut out = Vec::with_capacity(HEADER_LEN + values.len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.extend_from_slice(&row_step.to_le_bytes());
    out.extend_from_slice(&col_step.to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_grid(bytes: &[u8]) -> Result<GridDump, DecodeError> {
    if bytes.len() < HEADER_LEN {
        return Err(DecodeError::TooShort);
    }
    if &bytes[..8] != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let row_step = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
    let col_step = f64::from_le_bytes(bytes[32..40].try_into().unwrap());
    let payload = (bytes.len() - HEADER_LEN) as u64;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(16))
        .ok_or(DecodeError::SizeMismatch {
            expected: u64::MAX,
            actual: payload,
        })?;
    if expected != payload {
        return Err(DecodeError::SizeMismatch {
            expected,
            actual: payload,
        });
    }
    let mut values = Vec::with_capacity((rows * cols) as usize);
    for chunk in bytes[HEADER_LEN..].chunks_exact(16) {
        values.push(C64::new(
            f64::from_le_bytes(chunk[..8].try_into().unwrap()),
            f64::from_le_bytes(chunk[8..].try_into().unwrap()),
        ));
    }
    Ok(GridDump {
        rows,
        cols,
        row_step,
        col_step,
        values,
    })
}

/// Round-trip float formatting for CSV cells: 17 significant digits.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let values: Vec<C64> = (0..12)
            .map(|i| C64::new(i as f64 * 0.25, -(i as f64) * 0.5))
            .collect();
        let bytes = encode_grid(3, 4, 0.125, 0.5, &values);
        assert_eq!(bytes.len(), HEADER_LEN + 12 * 16);
        let dump = decode_grid(&bytes).unwrap();
        assert_eq!(dump.rows, 3);
        assert_eq!(dump.cols, 4);
        assert_eq!(dump.row_step, 0.125);
        assert_eq!(dump.col_step, 0.5);
        assert_eq!(dump.values, values);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert_eq!(decode_grid(b"short").unwrap_err(), DecodeError::TooShort);
        let mut bytes = encode_grid(1, 1, 1.0, 1.0, &[C64::new(0.0, 0.0)]);
        bytes[0] = b'X';
        assert_eq!(decode_grid(&bytes).unwrap_err(), DecodeError::BadMagic);
        let mut bytes = encode_grid(1, 1, 1.0, 1.0, &[C64::new(0.0, 0.0)]);
        bytes.truncate(bytes.len() - 8);
        assert!(matches!(
            decode_grid(&bytes).unwrap_err(),
            DecodeError::SizeMismatch { .. }
        ));
        // header implying an absurd size must fail before any allocation
        let mut huge = Vec::new();
        huge.extend_from_slice(MAGIC);
        huge.extend_from_slice(&u64::MAX.to_le_bytes());
        huge.extend_from_slice(&u64::MAX.to_le_bytes());
        huge.extend_from_slice(&1.0f64.to_le_bytes());
        huge.extend_from_slice(&1.0f64.to_le_bytes());
        assert!(matches!(
            decode_grid(&huge).unwrap_err(),
            DecodeError::SizeMismatch { .. }
        ));
    }

    #[test]
    fn csv_floats_round_trip() {
        for &v in &[
            0.0,
            1.0,
            -1.0 / 3.0,
            std::f64::consts::PI,
            1.234_567_890_123_456_7e-300,
            f64::MAX,
        ] {
            let s = csv_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert!(csv_float(f64::NAN).contains("NaN"));
    }
}
