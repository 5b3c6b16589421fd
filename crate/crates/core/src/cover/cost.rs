// SPDX-License-Identifier: Apache-2.0

//! Exact arithmetic for the weighted conflict + stitch objective.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::MpldError;

/// Non-negative rational stitch weight.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alpha(Ratio<i64>);

impl Alpha {
    pub const DEFAULT: Alpha = Alpha(Ratio::new_raw(1, 10));

    pub fn new(numer: i64, denom: i64) -> Result<Self, MpldError> {
        if denom == 0 {
            return Err(MpldError::Parameter("alpha denominator is zero".into()));
        }
        let r = Ratio::new(numer, denom);
        if r < Ratio::from_integer(0) {
            return Err(MpldError::Parameter(format!("alpha must be non-negative, got {r}")));
        }
        Ok(Alpha(r))
    }

    pub fn ratio(self) -> Ratio<i64> {
        self.0
    }

    /// Cost of `conflicts` same-mask edges and `stitches` used stitches.
    pub fn cost(self, conflicts: usize, stitches: usize) -> Ratio<i64> {
        Ratio::from_integer(conflicts as i64) + self.0 * Ratio::from_integer(stitches as i64)
    }

    /// Integer scaling of the objective: `scaled = conflicts * denom + stitches * numer`.
    ///
    /// Comparing scaled values is equivalent to comparing exact costs.
    pub fn scale(self) -> CostScale {
        CostScale { conflict: *self.0.denom(), stitch: *self.0.numer() }
    }
}

impl Default for Alpha {
    fn default() -> Self {
        Alpha::DEFAULT
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct CostScale {
    pub conflict: i64,
    pub stitch: i64,
}

impl CostScale {
    #[inline]
    pub fn of(self, conflicts: i64, stitches: i64) -> i64 {
        conflicts * self.conflict + stitches * self.stitch
    }
}

impl FromStr for Alpha {
    type Err = MpldError;

    /// Accepts plain decimals (`0.1`, `2`, `.25`) and fractions (`1/10`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MpldError::Parameter(format!("malformed alpha value '{s}'"));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            return Alpha::new(n, d);
        }
        let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
        if int_part.starts_with('-') {
            return Err(MpldError::Parameter(format!("alpha must be non-negative, got {s}")));
        }
        let digits_ok = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if (int_part.is_empty() && frac_part.is_empty())
            || !digits_ok(int_part)
            || !digits_ok(frac_part)
            || frac_part.len() > 12
        {
            return Err(bad());
        }
        let denom = 10i64.pow(frac_part.len() as u32);
        let int_val: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
        let frac_val: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
        let numer = int_val.checked_mul(denom).and_then(|v| v.checked_add(frac_val)).ok_or_else(bad)?;
        Alpha::new(numer, denom)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ratio(f, self.0)
    }
}

/// Formats a non-negative ratio as an exact decimal when possible, else `n/d`.
pub fn format_ratio(r: Ratio<i64>) -> String {
    struct D(Ratio<i64>);
    impl fmt::Display for D {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_ratio(f, self.0)
        }
    }
    D(r).to_string()
}

fn write_ratio(f: &mut fmt::Formatter<'_>, r: Ratio<i64>) -> fmt::Result {
    let (n, d) = (*r.numer(), *r.denom());
    if d == 1 {
        return write!(f, "{n}");
    }
    let mut rest = d;
    let mut places = 0u32;
    let mut pow = 1i64;
    while rest % 10 == 0 || rest % 2 == 0 || rest % 5 == 0 {
        if rest % 10 == 0 {
            rest /= 10;
        } else if rest % 2 == 0 {
            rest /= 2;
        } else {
            rest /= 5;
        }
        places += 1;
        pow = pow.saturating_mul(10);
    }
    if rest != 1 || places > 18 {
        return write!(f, "{n}/{d}");
    }
    // d divides 10^places; trim trailing zeros after scaling
    let scaled = n * (pow / d);
    let int = scaled / pow;
    let mut frac = (scaled % pow).abs();
    let mut width = places as usize;
    while width > 0 && frac % 10 == 0 {
        frac /= 10;
        width -= 1;
    }
    if width == 0 {
        write!(f, "{int}")
    } else {
        write!(f, "{int}.{frac:0width$}")
    }
}
