use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A complex number strictly inside the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if z.re.is_finite() && z.im.is_finite() && z.norm_sqr() < 1.0 {
            Ok(DiskPoint(z))
        } else {
            Err(Error::OutsideDisk(z))
        }
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(r, theta))
    }

    pub const ORIGIN: DiskPoint = DiskPoint(Complex64::new(0.0, 0.0));

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.0.norm()
    }

    #[inline]
    pub fn conj(self) -> Complex64 {
        self.0.conj()
    }
}

impl TryFrom<Complex64> for DiskPoint {
    type Error = Error;

    fn try_from(z: Complex64) -> Result<Self> {
        DiskPoint::new(z)
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

impl fmt::Display for DiskPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_complex(self.0))
    }
}

impl FromStr for DiskPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DiskPoint::new(parse_complex(s)?)
    }
}

/// Formats a complex number in the `re+imi` text form accepted by [`parse_complex`].
pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses `re`, `imi`, `re+imi` or `re-imi` (Unicode minus accepted).
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text
        .trim()
        .chars()
        .map(|c| if c == '\u{2212}' { '-' } else { c })
        .filter(|c| !c.is_whitespace())
        .collect();
    let bad = || Error::Parse(format!("invalid complex number '{text}'"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let parse_im = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, parse_im(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, parse_im(body)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complex_forms() {
        let cases = [
            ("0.5", Complex64::new(0.5, 0.0)),
            ("0.5+0i", Complex64::new(0.5, 0.0)),
            ("\u{2212}0.3+0.2i", Complex64::new(-0.3, 0.2)),
            ("-0.3-0.2i", Complex64::new(-0.3, -0.2)),
            ("0.3i", Complex64::new(0.0, 0.3)),
            ("-i", Complex64::new(0.0, -1.0)),
            ("1e-3-2e-2i", Complex64::new(1e-3, -2e-2)),
            ("2.5E+1+1e+0i", Complex64::new(25.0, 1.0)),
        ];
        for (text, want) in cases {
            assert_eq!(parse_complex(text).unwrap(), want, "{text}");
        }
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn format_round_trips() {
        let z = Complex64::new(-0.25, -1.5e-7);
        assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
    }

    #[test]
    fn rejects_boundary() {
        assert!(DiskPoint::real(1.0).is_err());
        assert!(DiskPoint::new(Complex64::new(0.8, 0.6)).is_err());
        assert!(DiskPoint::real(0.999).is_ok());
        assert!(DiskPoint::new(Complex64::new(f64::NAN, 0.0)).is_err());
    }
}
