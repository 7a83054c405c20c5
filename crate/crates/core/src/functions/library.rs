use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{project, ComputableFunction, ModulusSpec, SSelector};
use crate::codec::{DyadicRational, RationalPoint};
use crate::error::{Error, Result};
use crate::geometry::half_log_ceil;

/// JSON description of a library function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FunctionSpec {
    Identity {
        #[serde(default = "one")]
        n: usize,
    },
    Scale {
        c: DyadicRational,
        #[serde(default = "one")]
        n: usize,
    },
    Sum { n: usize },
    Affine { a: Vec<Vec<DyadicRational>>, b: Vec<DyadicRational> },
    Projection { n: usize, s: Vec<usize> },
    Hilbert2d,
}

fn one() -> usize {
    1
}

const NAMES: [&str; 6] = ["identity", "scale", "sum", "affine", "projection", "hilbert2d"];

impl FunctionSpec {
    pub fn build(&self) -> Result<ComputableFunction> {
        match self {
            FunctionSpec::Identity { n } => Ok(identity(*n)),
            FunctionSpec::Scale { c, n } => Ok(scale(c.clone(), *n)),
            FunctionSpec::Sum { n } => sum(*n),
            FunctionSpec::Affine { a, b } => affine(a.clone(), b.clone()),
            FunctionSpec::Projection { n, s } => projection(SSelector::new(*n, s.clone())?),
            FunctionSpec::Hilbert2d => Ok(hilbert2d()),
        }
    }
}

/// Looks a function up by name with JSON parameters.
pub fn library_function(name: &str, params: &serde_json::Value) -> Result<ComputableFunction> {
    if !NAMES.contains(&name) {
        return Err(Error::UnknownName(name.to_string()));
    }
    let mut obj = match params {
        serde_json::Value::Object(m) => m.clone(),
        serde_json::Value::Null => serde_json::Map::new(),
        other => return Err(Error::InvalidSpec(format!("parameters must be an object, got {other}"))),
    };
    obj.insert("name".into(), name.into());
    let spec: FunctionSpec =
        serde_json::from_value(serde_json::Value::Object(obj)).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    spec.build()
}

fn finer(r: u32, s: i64) -> u32 {
    (r as i64 + s).max(0) as u32
}

pub fn identity(n: usize) -> ComputableFunction {
    ComputableFunction::new(format!("identity{n}"), n, n, |x, r| Ok(x(r)))
        .with_modulus(ModulusSpec::linear(0))
        .with_inverse_modulus(SSelector::all(n), ModulusSpec::linear(0))
}

/// Smallest `t` with `2^t ≥ v`, for `v > 0`.
fn ceil_log2(v: &BigRational) -> i64 {
    let mut t = (v.numer().bits() as i64) - (v.denom().bits() as i64) - 1;
    while pow2(t) < *v {
        t += 1;
    }
    while pow2(t - 1) >= *v {
        t -= 1;
    }
    t
}

/// Largest `t` with `2^t ≤ v`, for `v > 0`.
fn floor_log2(v: &BigRational) -> i64 {
    let t = ceil_log2(v);
    if pow2(t) == *v {
        t
    } else {
        t - 1
    }
}

/// Smallest `t` with `4^t ≥ v`, i.e. `⌈½ log₂ v⌉`, for `v > 0`.
fn ceil_half_log2(v: &BigRational) -> i64 {
    let t = ceil_log2(v);
    (t + 1).div_euclid(2)
}

fn pow2(t: i64) -> BigRational {
    if t >= 0 {
        BigRational::from_integer(BigInt::one() << t as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-t) as usize)
    }
}

/// `x ↦ c·x` on `ℝⁿ`.
pub fn scale(c: DyadicRational, n: usize) -> ComputableFunction {
    let name = format!("scale({c})");
    if c.is_zero() {
        return ComputableFunction::new(name, n, n, move |_, _| Ok(RationalPoint::origin(n)))
            .with_modulus(ModulusSpec::linear(0));
    }
    let abs = c.to_rational().abs();
    let s = ceil_log2(&abs);
    let f = {
        let c = c.clone();
        ComputableFunction::new(name, n, n, move |x, r| {
            let p = x(finer(r, s));
            RationalPoint::new(p.coords().iter().map(|v| &c * v).collect())
        })
    };
    f.with_modulus(ModulusSpec::linear(s))
        .with_inverse_modulus(SSelector::all(n), ModulusSpec::linear(-floor_log2(&abs)))
}

/// `(x₁, …, xₙ) ↦ Σ xᵢ`. Each singleton `S = {i}` carries the inverse modulus `r + 1`.
pub fn sum(n: usize) -> Result<ComputableFunction> {
    if n == 0 {
        return Err(Error::InvalidSpec("sum needs n ≥ 1".into()));
    }
    let l = half_log_ceil(n) as i64;
    let mut f = ComputableFunction::new(format!("sum{n}"), n, 1, move |x, r| {
        // Σ|eᵢ| ≤ √n·|e|, so √n·2^{-(r+l)} ≤ 2^{-r}.
        let p = x(r + l as u32);
        let total = p.coords().iter().fold(DyadicRational::zero(), |acc, v| &acc + v);
        RationalPoint::new(vec![total])
    })
    .with_modulus(ModulusSpec::linear(l));
    for i in 1..=n {
        f = f.with_inverse_modulus(SSelector::new(n, vec![i])?, ModulusSpec::linear(1));
    }
    Ok(f)
}

fn frobenius_sq(a: &[Vec<BigRational>]) -> BigRational {
    a.iter().flatten().fold(BigRational::zero(), |acc, v| acc + v * v)
}

/// Inverse of a square matrix by Gauss–Jordan elimination; `None` if singular.
fn invert(a: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut row = row.clone();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, pivot);
        let inv = BigRational::one() / &m[col][col];
        for v in m[col].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..n {
            if i != col && !m[i][col].is_zero() {
                let factor = m[i][col].clone();
                let pivot_row = m[col].clone();
                for (v, p) in m[i].iter_mut().zip(&pivot_row) {
                    *v = &*v - &factor * p;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// `x ↦ Ax + b`. The modulus comes from the Frobenius bound on the operator norm; a square
/// invertible `A` also gets the inverse modulus `r + ⌈½ log₂ ‖A⁻¹‖_F²⌉` for `S = [n]`.
pub fn affine(a: Vec<Vec<DyadicRational>>, b: Vec<DyadicRational>) -> Result<ComputableFunction> {
    let k = a.len();
    let n = a.first().map_or(0, Vec::len);
    if k == 0 || n == 0 || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidSpec("affine matrix must be a nonempty rectangle".into()));
    }
    if b.len() != k {
        return Err(Error::ArityMismatch { expected: k, got: b.len() });
    }
    let exact: Vec<Vec<BigRational>> = a.iter().map(|row| row.iter().map(|v| v.to_rational()).collect()).collect();
    let norm = frobenius_sq(&exact);
    let s = if norm.is_zero() { 0 } else { ceil_half_log2(&norm) };
    let rows: Vec<String> = a
        .iter()
        .map(|row| format!("[{}]", row.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")))
        .collect();
    let shift: Vec<String> = b.iter().map(ToString::to_string).collect();
    let name = format!("affine([{}],[{}])", rows.join(","), shift.join(","));
    let f = ComputableFunction::new(name, n, k, move |x, r| {
        let p = x(finer(r, s));
        let out = a
            .iter()
            .zip(&b)
            .map(|(row, bi)| row.iter().zip(p.coords()).fold(bi.clone(), |acc, (aij, xj)| &acc + &(aij * xj)))
            .collect();
        RationalPoint::new(out)
    })
    .with_modulus(ModulusSpec::linear(s));
    if k == n {
        if let Some(inv) = invert(&exact) {
            let t = ceil_half_log2(&frobenius_sq(&inv));
            return Ok(f.with_inverse_modulus(SSelector::all(n), ModulusSpec::linear(t)));
        }
    }
    Ok(f)
}

/// `x ↦ x_S`.
pub fn projection(sel: SSelector) -> Result<ComputableFunction> {
    if sel.size() == 0 {
        return Err(Error::InvalidSpec("projection onto the empty set".into()));
    }
    let name = format!("projection{:?}", sel.members());
    let n = sel.n();
    let k = sel.size();
    let s = sel.clone();
    Ok(ComputableFunction::new(name, n, k, move |x, r| {
        let p = x(r);
        RationalPoint::new(project(p.coords(), &s)?.0)
    })
    .with_modulus(ModulusSpec::linear(0)))
}

/// Lower-left corner (in units of `2^{-k}`) of the `d`-th cell of the level-`k` Hilbert curve.
///
/// Digits of `d` are read from the most significant end through a four-state automaton; the
/// curve starts at `(0,0)` and ends in the cell touching `(1,0)`.
pub fn hilbert_cell(d: &BigInt, k: u32) -> (BigInt, BigInt) {
    let mut xs = Vec::with_capacity(k as usize);
    let mut ys = Vec::with_capacity(k as usize);
    let mut state = 0u32;
    for i in (0..k as u64).rev() {
        let digit = (d.bit(2 * i + 1) as u32) << 1 | d.bit(2 * i) as u32;
        let row = (4 * state) | digit;
        xs.push(((0x936Cu32 >> row) & 1) as u8);
        ys.push(((0x39C6u32 >> row) & 1) as u8);
        state = (0x3E6B94C1u32 >> (2 * row)) & 3;
    }
    let from_bits = |b: &[u8]| BigInt::from_radix_be(Sign::Plus, b, 2).unwrap_or_default();
    (from_bits(&xs), from_bits(&ys))
}

/// The Hilbert curve `[0,1] → [0,1]²` anchored at `f(0) = (0,0)` and extended constantly
/// outside `[0,1]`.
///
/// At precision `r` the level `k = r + 2` cell of a `4^{-k}`-accurate parameter is reported by
/// its lower-left corner. The true point lies in that cell or an edge-adjacent one, so the error
/// is at most `√5·2^{-k} < 2^{-r}`. Parameters within `4^{-j}` land in the same or adjacent
/// level-`j` cells, which gives the Hölder modulus `2r + 4`.
pub fn hilbert2d() -> ComputableFunction {
    ComputableFunction::new("hilbert2d", 1, 2, |x, r| {
        let k = r + 2;
        let q = x(2 * k);
        let t = &q.coords()[0];
        if t.is_negative() {
            return Ok(RationalPoint::origin(2));
        }
        let d = t.floor_scaled(2 * k);
        if d >= BigInt::one() << (2 * k as usize) {
            return Ok(RationalPoint::from_ints(&[1, 0]));
        }
        let (cx, cy) = hilbert_cell(&d, k);
        RationalPoint::new(vec![DyadicRational::new(cx, k), DyadicRational::new(cy, k)])
    })
    .with_modulus(ModulusSpec::holder("1/2", 2))
}
