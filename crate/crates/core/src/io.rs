//! Fixed-precision number formatting for CSV and JSON output.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// `x` with 17 significant digits, enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Serializes an `f64` as a JSON number with 17 significant digits;
/// non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl From<f64> for Sig17 {
    fn from(x: f64) -> Self {
        Sig17(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for &x in &[0.1, -1.0 / 3.0, 1.375, 2.0, 5e-324, f64::MAX, -0.0] {
            assert_eq!(sig17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(sig17(1.375), "1.3750000000000000e0");
    }

    #[test]
    fn json_numbers() {
        let v = serde_json::to_string(&[Sig17(0.5), Sig17(f64::NAN), Sig17(f64::NEG_INFINITY)])
            .unwrap();
        assert_eq!(v, "[5.0000000000000000e-1,null,null]");
        let back: Vec<Option<f64>> = serde_json::from_str(&v).unwrap();
        assert_eq!(back, vec![Some(0.5), None, None]);
    }
}
