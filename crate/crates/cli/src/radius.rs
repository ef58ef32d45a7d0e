//! Radius specifications: absolute values or symbolic q-powers, so sweeps
//! can track regimes like `R = q^(-3/4)` across moduli.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusSpec {
    Absolute(f64),
    /// `coeff * q^exponent`, evaluated per modulus.
    Power { coeff: f64, exponent: f64 },
}

impl RadiusSpec {
    pub fn eval(&self, q: u64) -> f64 {
        match *self {
            RadiusSpec::Absolute(r) => r,
            RadiusSpec::Power { coeff, exponent } => coeff * (q as f64).powf(exponent),
        }
    }
}

impl FromStr for RadiusSpec {
    type Err = String;

    /// Accepts `0.05`, `q^-0.75`, and `1.5*q^-0.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(idx) = s.find("q^") {
            let coeff = match s[..idx].trim_end_matches('*').trim() {
                "" => 1.0,
                c => c
                    .parse::<f64>()
                    .map_err(|e| format!("bad coefficient in radius spec {s:?}: {e}"))?,
            };
            let exponent = s[idx + 2..]
                .parse::<f64>()
                .map_err(|e| format!("bad exponent in radius spec {s:?}: {e}"))?;
            if !(coeff.is_finite() && exponent.is_finite()) || coeff <= 0.0 {
                return Err(format!("radius spec {s:?} must have a positive coefficient"));
            }
            Ok(RadiusSpec::Power { coeff, exponent })
        } else {
            let r = s
                .parse::<f64>()
                .map_err(|e| format!("bad radius {s:?}: {e}"))?;
            if !r.is_finite() || r <= 0.0 {
                return Err(format!("radius must be positive, got {s:?}"));
            }
            Ok(RadiusSpec::Absolute(r))
        }
    }
}

impl fmt::Display for RadiusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RadiusSpec::Absolute(r) => write!(f, "{r}"),
            RadiusSpec::Power { coeff, exponent } => {
                if coeff == 1.0 {
                    write!(f, "q^{exponent}")
                } else {
                    write!(f, "{coeff}*q^{exponent}")
                }
            }
        }
    }
}

impl serde::Serialize for RadiusSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
