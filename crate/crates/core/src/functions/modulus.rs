use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A modulus of continuity `m`: `|x − y| ≤ 2^{-m(r)}` implies `|f(x) − f(y)| ≤ 2^{-r}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ModulusSpec {
    /// `m(r) = r + s`.
    Linear { s: i64 },
    /// `m(r) = ⌈(r + s)/α⌉` with `α ∈ (0, 1]` given as `"p/q"`.
    Holder { alpha: String, s: i64 },
    /// `m(r)` listed for `r = 0, 1, …`; undefined past the end.
    Table { values: Vec<i64> },
}

impl ModulusSpec {
    pub fn linear(s: i64) -> Self {
        ModulusSpec::Linear { s }
    }

    pub fn holder(alpha: &str, s: i64) -> Self {
        ModulusSpec::Holder { alpha: alpha.to_string(), s }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModulusSpec::Linear { .. } => Ok(()),
            ModulusSpec::Holder { alpha, .. } => parse_alpha(alpha).map(|_| ()),
            ModulusSpec::Table { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidSpec("empty modulus table".into()));
                }
                if values.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::InvalidSpec("modulus table must be nondecreasing".into()));
                }
                Ok(())
            }
        }
    }

    /// `m(r)`.
    pub fn at(&self, r: u32) -> Result<i64> {
        let r = r as i64;
        match self {
            ModulusSpec::Linear { s } => Ok(r + s),
            ModulusSpec::Holder { alpha, s } => {
                let a = parse_alpha(alpha)?;
                let v = BigRational::from_integer((r + s).into()) / a;
                v.ceil().to_integer().to_i64().ok_or_else(|| Error::ResourceExceeded("modulus overflow".into()))
            }
            ModulusSpec::Table { values } => values
                .get(r as usize)
                .copied()
                .ok_or_else(|| Error::Precondition(format!("modulus table has no entry for r = {r}"))),
        }
    }

    /// `α` of the form, 1 for linear and tabulated moduli.
    pub fn alpha(&self) -> Result<BigRational> {
        match self {
            ModulusSpec::Holder { alpha, .. } => parse_alpha(alpha),
            _ => Ok(BigRational::one()),
        }
    }

    /// An exponent `b` with `|f(x) − f(y)| ≤ 2^b` whenever `|x − y| ≤ 2^{-e}`.
    ///
    /// For `e ≥ m(0)` this is `−r` for the largest `r` with `m(r) ≤ e`. Larger distances are cut
    /// into `2^{m(0) − e}` steps of length `2^{-m(0)}`, each moving `f` by at most 1.
    pub fn variation_exp(&self, e: i64) -> Result<i64> {
        let m0 = self.at(0)?;
        if e < m0 {
            return Ok(m0 - e);
        }
        let (mut lo, mut hi) = (0u32, 1u32);
        while self.at(hi).is_ok_and(|m| m <= e) {
            lo = hi;
            if hi >= 1 << 30 {
                break;
            }
            hi *= 2;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.at(mid).is_ok_and(|m| m <= e) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(-(lo as i64))
    }
}

impl fmt::Display for ModulusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModulusSpec::Linear { s } => write!(f, "r{s:+}"),
            ModulusSpec::Holder { alpha, s } => write!(f, "ceil((r{s:+})/({alpha}))"),
            ModulusSpec::Table { values } => write!(f, "table{values:?}"),
        }
    }
}

pub(crate) fn parse_alpha(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidSpec(format!("alpha must be a rational in (0, 1], got {s:?}"));
    let q: BigRational = match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            BigRational::new(p.into(), q.into())
        }
        None => BigRational::from_integer(s.trim().parse::<i64>().map_err(|_| bad())?.into()),
    };
    if !q.is_positive() || q > BigRational::one() || q.is_zero() {
        return Err(bad());
    }
    Ok(q)
}
