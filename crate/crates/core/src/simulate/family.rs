//! The scedasis shapes used in the simulation study.
//!
//! * `c1(s) = β + 2(1-β)s`, the line from `(0, β)` to `(1, 2-β)`;
//! * `c2(s)`, the polygon through `(0, β)`, `(1/2, 2-β)` and `(1, β)`.
//!
//! The threshold variants apply the scale factor only to base values at or
//! above the 80% quantile of the stationary law; their scedasis function is the
//! same `c`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantile level above which the threshold variants rescale.
pub const THRESHOLD_LEVEL: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    C1,
    C2,
    C1Threshold,
    C2Threshold,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] = [
        FamilyKind::C1,
        FamilyKind::C2,
        FamilyKind::C1Threshold,
        FamilyKind::C2Threshold,
    ];

    pub fn is_threshold(self) -> bool {
        matches!(self, FamilyKind::C1Threshold | FamilyKind::C2Threshold)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::C1 => "c1",
            FamilyKind::C2 => "c2",
            FamilyKind::C1Threshold => "c1-threshold",
            FamilyKind::C2Threshold => "c2-threshold",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown scedasis family '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScedasisFamily {
    kind: FamilyKind,
    beta: f64,
}

impl ScedasisFamily {
    pub fn new(kind: FamilyKind, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::param(format!("beta must lie in (0, 1], got {beta}")));
        }
        Ok(ScedasisFamily { kind, beta })
    }

    /// `c ≡ 1`.
    pub fn homoscedastic() -> Self {
        ScedasisFamily {
            kind: FamilyKind::C1,
            beta: 1.0,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The scedasis function `c(s)`.
    pub fn value(&self, s: f64) -> f64 {
        let b = self.beta;
        match self.kind {
            FamilyKind::C1 | FamilyKind::C1Threshold => b + 2.0 * (1.0 - b) * s,
            FamilyKind::C2 | FamilyKind::C2Threshold => {
                if s <= 0.5 {
                    b + 4.0 * (1.0 - b) * s
                } else {
                    4.0 - 3.0 * b - 4.0 * (1.0 - b) * s
                }
            }
        }
    }

    /// `C(s) = ∫_0^s c(u) du`, closed form.
    pub fn integral(&self, s: f64) -> f64 {
        let b = self.beta;
        let s = s.clamp(0.0, 1.0);
        match self.kind {
            FamilyKind::C1 | FamilyKind::C1Threshold => b * s + (1.0 - b) * s * s,
            FamilyKind::C2 | FamilyKind::C2Threshold => {
                if s <= 0.5 {
                    b * s + 2.0 * (1.0 - b) * s * s
                } else {
                    let half = 0.5 * b + 0.5 * (1.0 - b);
                    half + (4.0 - 3.0 * b) * (s - 0.5) - 2.0 * (1.0 - b) * (s * s - 0.25)
                }
            }
        }
    }

    pub fn max_value(&self) -> f64 {
        2.0 - self.beta
    }

    /// The factor multiplying base value `w` at time `s` (before any tail-index exponent).
    ///
    /// Threshold kinds need the base value and the threshold `p`; they return 1
    /// below `p` and `c(s)` at or above it.
    pub fn scedasis_value(&self, s: f64, base: Option<(f64, f64)>) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::param(format!("s must lie in [0, 1], got {s}")));
        }
        if !self.kind.is_threshold() {
            return Ok(self.value(s));
        }
        match base {
            Some((w, p)) if w < p => Ok(1.0),
            Some(_) => Ok(self.value(s)),
            None => Err(Error::param(format!(
                "family {} needs the base value and threshold",
                self.kind
            ))),
        }
    }
}

impl fmt::Display for ScedasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(beta={})", self.kind, self.beta)
    }
}
