//! Stable number formatting for data files: scientific notation with nine
//! significant digits.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// `x` with nine significant digits, e.g. `3.92500000e-2`.
pub fn sci(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.8e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A float that serializes to JSON as a [`sci`] literal (or `null` when not finite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sci(pub f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(sci(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl From<f64> for Sci {
    fn from(x: f64) -> Self {
        Sci(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sci(39.25e-3), "3.92500000e-2");
        assert_eq!(sci(2.0e5), "2.00000000e5");
        assert_eq!(sci(0.0), "0.00000000e0");
        assert_eq!(sci(f64::INFINITY), "inf");
    }

    #[test]
    fn json_literal_round_trips() {
        let text = serde_json::to_string(&vec![Sci(1500.0), Sci(f64::NAN)]).unwrap();
        assert_eq!(text, "[1.50000000e3,null]");
        let back: Vec<Option<f64>> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, [Some(1500.0), None]);
    }
}
