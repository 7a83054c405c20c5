//! Exact dyadic numbers and the frozen bit-level wire format.
//!
//! Wire format (machine version `v0`):
//!
//! * `encode_int(z)`: zigzag `z ↦ 2z` (z ≥ 0) or `-2z-1` (z < 0), then Elias gamma of `zz + 1`
//!   (`⌊log₂(zz+1)⌋` zeros followed by the binary expansion of `zz + 1`).
//! * `encode_point(p)`: `encode_int(n) · encode_int(r*) · encode_int(m₁) ··· encode_int(mₙ)` where
//!   `r*` is the largest canonical exponent among the coordinates and `mᵢ = pᵢ·2^{r*}`.
//! * `pair(a, b)`: `encode_int(|a|) · a · b`.
//!
//! Any change to this layout changes every machine-relative K value and must bump
//! [`crate::machine::MACHINE_VERSION`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::{BitReader, BitString};
use crate::error::{Error, Result};

/// An exact dyadic rational `m·2^{-r}` kept in canonical form (`r = 0` or `m` odd).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    mantissa: BigInt,
    exponent: u32,
}

impl DyadicRational {
    pub fn new(mantissa: impl Into<BigInt>, exponent: u32) -> Self {
        let mut d = DyadicRational { mantissa: mantissa.into(), exponent };
        d.canonicalize();
        d
    }

    pub fn zero() -> Self {
        DyadicRational { mantissa: BigInt::zero(), exponent: 0 }
    }

    pub fn from_int(z: impl Into<BigInt>) -> Self {
        DyadicRational { mantissa: z.into(), exponent: 0 }
    }

    /// `2^{-r}`.
    pub fn pow2_neg(r: u32) -> Self {
        DyadicRational { mantissa: BigInt::one(), exponent: r }
    }

    /// `2^k` for any integer `k`.
    pub fn pow2(k: i64) -> Self {
        if k >= 0 {
            DyadicRational::from_int(BigInt::one() << (k as usize))
        } else {
            DyadicRational::pow2_neg((-k) as u32)
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_canonical(&self) -> bool {
        self.exponent == 0 || self.mantissa.is_odd()
    }

    fn canonicalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exponent as u64) as u32;
        if shift > 0 {
            self.mantissa >>= shift as usize;
            self.exponent -= shift;
        }
    }

    pub fn canonical(&self) -> Self {
        let mut c = self.clone();
        c.canonicalize();
        c
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn abs(&self) -> Self {
        DyadicRational { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }

    /// Mantissa rescaled to exponent `r ≥ self.exponent`.
    pub fn mantissa_at(&self, r: u32) -> BigInt {
        debug_assert!(r >= self.exponent);
        &self.mantissa << ((r - self.exponent) as usize)
    }

    /// `⌊self · 2^r⌋`.
    pub fn floor_scaled(&self, r: u32) -> BigInt {
        if r >= self.exponent {
            self.mantissa_at(r)
        } else {
            self.mantissa.div_floor(&(BigInt::one() << ((self.exponent - r) as usize)))
        }
    }

    /// `⌊self · 2^r + 1/2⌋`, i.e. the nearest multiple of `2^{-r}` (ties upward).
    pub fn round_scaled(&self, r: u32) -> BigInt {
        let half = DyadicRational::pow2_neg(r + 1);
        (self + &half).floor_scaled(r)
    }

    /// Truncate toward `-∞` onto the grid `2^{-r}ℤ`.
    pub fn truncate(&self, r: u32) -> Self {
        DyadicRational::new(self.floor_scaled(r), r)
    }

    pub fn floor(&self) -> BigInt {
        self.floor_scaled(0)
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if k >= 0 {
            let k = k as u32;
            if k <= self.exponent {
                DyadicRational::new(self.mantissa.clone(), self.exponent - k)
            } else {
                DyadicRational::new(&self.mantissa << ((k - self.exponent) as usize), 0)
            }
        } else {
            DyadicRational::new(self.mantissa.clone(), self.exponent + (-k) as u32)
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), BigInt::one() << (self.exponent as usize))
    }

    /// Exact conversion from a rational whose reduced denominator is a power of two.
    pub fn from_rational(q: &BigRational) -> Option<Self> {
        let den = q.denom();
        if den.is_zero() || den.is_negative() {
            return None;
        }
        let bits = den.bits();
        if den != &(BigInt::one() << ((bits - 1) as usize)) {
            return None;
        }
        Some(DyadicRational::new(q.numer().clone(), (bits - 1) as u32))
    }

    pub fn to_f64(&self) -> f64 {
        let m = self.mantissa.to_f64().unwrap_or(f64::NAN);
        if m.is_finite() {
            return m * 2f64.powi(-(self.exponent as i32));
        }
        // Mantissa too wide for f64: drop low bits first.
        let excess = self.mantissa.bits().saturating_sub(1000) as u32;
        let shifted = DyadicRational::new(&self.mantissa >> (excess as usize), 0);
        shifted.mantissa.to_f64().unwrap_or(f64::NAN) * 2f64.powi(excess as i32 - self.exponent as i32)
    }

    /// Exact `⌈log₂ self⌉` for `self > 0`.
    pub fn ceil_log2(&self) -> Option<i64> {
        if !self.mantissa.is_positive() {
            return None;
        }
        let m = &self.mantissa;
        let up = if m.is_one() { 0 } else { (m - BigInt::one()).bits() as i64 };
        Some(up - self.exponent as i64)
    }

    pub fn log2_f64(&self) -> f64 {
        let bits = self.mantissa.bits() as i64;
        let shift = (bits - 60).max(0);
        let top = (&self.mantissa >> (shift as usize)).to_f64().unwrap_or(f64::NAN);
        top.log2() + shift as f64 - self.exponent as f64
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let r = self.exponent.max(other.exponent);
        self.mantissa_at(r).cmp(&other.mantissa_at(r))
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let r = self.exponent.max(rhs.exponent);
        DyadicRational::new(self.mantissa_at(r) + rhs.mantissa_at(r), r)
    }
}

impl<'a> Sub<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        let r = self.exponent.max(rhs.exponent);
        DyadicRational::new(self.mantissa_at(r) - rhs.mantissa_at(r), r)
    }
}

impl<'a> Mul<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational { mantissa: -&self.mantissa, exponent: self.exponent }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<DyadicRational> for DyadicRational {
            type Output = DyadicRational;
            fn $m(self, rhs: DyadicRational) -> DyadicRational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.mantissa)
        } else {
            write!(f, "{}/2^{}", self.mantissa, self.exponent)
        }
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for DyadicRational {
    type Err = Error;

    /// Accepts `m`, `m/2^r`, `p/q` with `q` a power of two, and finite decimals with a
    /// terminating binary expansion (`0.375`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Malformed(format!("not a dyadic rational: {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den = den.trim();
            if let Some(exp) = den.strip_prefix("2^") {
                let r: u32 = exp.parse().map_err(|_| bad())?;
                return Ok(DyadicRational::new(num, r));
            }
            let den: BigInt = den.parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            return DyadicRational::from_rational(&BigRational::new(num, den)).ok_or_else(bad);
        }
        if let Some((int, frac)) = s.split_once('.') {
            let neg = int.starts_with('-');
            let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
            let num: BigInt = digits.parse().map_err(|_| bad())?;
            let num = if neg { -num } else { num };
            let den = num_traits::pow(BigInt::from(10u32), frac.len());
            return DyadicRational::from_rational(&BigRational::new(num, den)).ok_or_else(bad);
        }
        let z: BigInt = s.parse().map_err(|_| bad())?;
        Ok(DyadicRational::from_int(z))
    }
}

impl Serialize for DyadicRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DyadicRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(z) => Ok(DyadicRational::from_int(z)),
        }
    }
}

/// A point of `ℚⁿ` with dyadic coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RationalPoint {
    coords: Vec<DyadicRational>,
}

impl RationalPoint {
    pub fn new(coords: Vec<DyadicRational>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Malformed("a rational point needs dimension n ≥ 1".into()));
        }
        Ok(RationalPoint { coords: coords.into_iter().map(|c| c.canonical()).collect() })
    }

    /// Zero-dimensional points are only used as the empty side of an interleave.
    pub(crate) fn from_coords_unchecked(coords: Vec<DyadicRational>) -> Self {
        RationalPoint { coords }
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        RationalPoint { coords: coords.iter().map(|&z| DyadicRational::from_int(z)).collect() }
    }

    pub fn origin(n: usize) -> Self {
        RationalPoint { coords: vec![DyadicRational::zero(); n] }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[DyadicRational] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<DyadicRational> {
        self.coords
    }

    /// Largest canonical exponent among the coordinates.
    pub fn common_exponent(&self) -> u32 {
        self.coords.iter().map(|c| c.exponent()).max().unwrap_or(0)
    }

    pub fn sub(&self, other: &RationalPoint) -> RationalPoint {
        debug_assert_eq!(self.dimension(), other.dimension());
        RationalPoint { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect() }
    }

    pub fn add(&self, other: &RationalPoint) -> RationalPoint {
        debug_assert_eq!(self.dimension(), other.dimension());
        RationalPoint { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn scale_pow2(&self, k: i64) -> RationalPoint {
        RationalPoint { coords: self.coords.iter().map(|c| c.mul_pow2(k)).collect() }
    }

    pub fn norm_sq(&self) -> DyadicRational {
        self.coords.iter().fold(DyadicRational::zero(), |acc, c| &acc + &(c * c))
    }

    pub fn dist_sq(&self, other: &RationalPoint) -> DyadicRational {
        self.sub(other).norm_sq()
    }

    /// Concatenation `(self, other)` as a point of `ℚ^{n+t}`.
    pub fn join(&self, other: &RationalPoint) -> RationalPoint {
        let mut coords = self.coords.clone();
        coords.extend(other.coords.iter().cloned());
        RationalPoint { coords }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.to_f64()).collect()
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn zigzag(z: &BigInt) -> BigUint {
    match z.sign() {
        Sign::Minus => (z.magnitude() << 1usize) - BigUint::one(),
        _ => z.magnitude() << 1usize,
    }
}

fn unzigzag(u: BigUint) -> BigInt {
    if u.is_odd() {
        -BigInt::from((u + BigUint::one()) >> 1usize)
    } else {
        BigInt::from(u >> 1usize)
    }
}

/// Elias gamma code of `v ≥ 1`.
pub fn write_gamma(out: &mut BitString, v: &BigUint) {
    debug_assert!(!v.is_zero());
    let width = v.bits() as usize;
    for _ in 0..width - 1 {
        out.push(false);
    }
    for k in (0..width).rev() {
        out.push(v.bit(k as u64));
    }
}

pub fn write_gamma_u64(out: &mut BitString, v: u64) {
    write_gamma(out, &BigUint::from(v));
}

pub fn gamma_len(v: u64) -> usize {
    debug_assert!(v >= 1);
    2 * (63 - v.leading_zeros() as usize) + 1
}

pub fn read_gamma(rd: &mut BitReader<'_>) -> Result<BigUint> {
    let mut zeros = 0usize;
    loop {
        match rd.read_bit() {
            Some(false) => zeros += 1,
            Some(true) => break,
            None => return Err(Error::Malformed("truncated gamma code".into())),
        }
    }
    let tail = rd
        .read_slice(zeros)
        .ok_or_else(|| Error::Malformed("truncated gamma code".into()))?;
    let mut v = BigUint::one();
    for &b in tail {
        v <<= 1usize;
        if b {
            v += BigUint::one();
        }
    }
    Ok(v)
}

/// Gamma value that must fit in a `u64`; used by the machine decoder.
pub fn read_gamma_u64(rd: &mut BitReader<'_>) -> Option<u64> {
    let mut zeros = 0usize;
    while !rd.read_bit()? {
        zeros += 1;
        if zeros > 62 {
            return None;
        }
    }
    let tail = rd.read_slice(zeros)?;
    Some(tail.iter().fold(1u64, |acc, &b| (acc << 1) | b as u64))
}

pub fn write_int(out: &mut BitString, z: &BigInt) {
    write_gamma(out, &(zigzag(z) + BigUint::one()));
}

pub fn encode_int(z: impl Into<BigInt>) -> BitString {
    let mut out = BitString::new();
    write_int(&mut out, &z.into());
    out
}

pub fn read_int(rd: &mut BitReader<'_>) -> Result<BigInt> {
    let v = read_gamma(rd)?;
    Ok(unzigzag(v - BigUint::one()))
}

/// Prefix decode: returns the integer and the number of bits consumed.
pub fn decode_int(bits: &BitString) -> Result<(BigInt, usize)> {
    let mut rd = BitReader::new(bits.bits());
    let z = read_int(&mut rd)?;
    Ok((z, rd.position()))
}

pub fn encode_point(p: &RationalPoint) -> BitString {
    let mut out = BitString::new();
    write_point(&mut out, p);
    out
}

pub fn write_point(out: &mut BitString, p: &RationalPoint) {
    let r = p.common_exponent();
    write_int(out, &BigInt::from(p.dimension()));
    write_int(out, &BigInt::from(r));
    for c in p.coords() {
        write_int(out, &c.mantissa_at(r));
    }
}

pub fn read_point(rd: &mut BitReader<'_>) -> Result<RationalPoint> {
    let n = read_int(rd)?;
    let n = n
        .to_usize()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Malformed(format!("bad point dimension {n}")))?;
    // Every coordinate costs at least one bit; reject absurd headers before allocating.
    if n > rd.remaining() {
        return Err(Error::Malformed("point dimension exceeds input".into()));
    }
    let r = read_int(rd)?;
    let r = r
        .to_u32()
        .ok_or_else(|| Error::Malformed(format!("bad common exponent {r}")))?;
    let mut coords = Vec::with_capacity(n);
    let mut any_odd = false;
    for _ in 0..n {
        let m = read_int(rd)?;
        any_odd |= m.is_odd();
        coords.push(m);
    }
    if r > 0 && !any_odd {
        return Err(Error::Malformed("non-canonical common exponent".into()));
    }
    Ok(RationalPoint::from_coords_unchecked(
        coords.into_iter().map(|m| DyadicRational::new(m, r)).collect(),
    ))
}

/// Prefix decode: returns the point and the number of bits consumed.
pub fn decode_point(bits: &BitString) -> Result<(RationalPoint, usize)> {
    let mut rd = BitReader::new(bits.bits());
    let p = read_point(&mut rd)?;
    Ok((p, rd.position()))
}

/// Decode a string that must be exactly one canonical point encoding.
pub fn decode_point_exact(bits: &BitString) -> Option<RationalPoint> {
    let mut rd = BitReader::new(bits.bits());
    let p = read_point(&mut rd).ok()?;
    (rd.remaining() == 0).then_some(p)
}

/// Self-delimiting pairing `⟨a, b⟩ = encode_int(|a|) · a · b`.
pub fn pair(a: &BitString, b: &BitString) -> BitString {
    let mut out = encode_int(a.len() as u64);
    out.extend_from(a);
    out.extend_from(b);
    out
}

pub fn unpair(s: &BitString) -> Result<(BitString, BitString)> {
    let mut rd = BitReader::new(s.bits());
    let len = read_int(&mut rd)?;
    let len = len
        .to_usize()
        .ok_or_else(|| Error::Malformed(format!("bad pair length {len}")))?;
    let a = rd
        .read_slice(len)
        .ok_or_else(|| Error::Malformed("pair shorter than its length header".into()))?;
    Ok((BitString::from(a), BitString::from(rd.rest())))
}
