//! Finite binary strings with length-lexicographic ordering.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite binary string. Ordered length-lexicographically, so `λ < 0 < 1 < 00 < ...`.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn with_capacity(n: usize) -> Self {
        BitString(Vec::with_capacity(n))
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn extend_bits(&mut self, bits: &[bool]) {
        self.0.extend_from_slice(bits);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = Vec::with_capacity(self.len() + other.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(&other.0);
        BitString(out)
    }

    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.len() < other.len() && other.0[..self.len()] == self.0[..]
    }

    /// The `i`-th string `s_i` in the standard enumeration `λ, 0, 1, 00, 01, ...`:
    /// the binary expansion of `i + 1` with its leading one removed.
    pub fn standard(i: u64) -> BitString {
        let v = i + 1;
        let width = 64 - v.leading_zeros() as usize;
        let bits = (0..width - 1).rev().map(|k| (v >> k) & 1 == 1).collect();
        BitString(bits)
    }

    /// Big-endian value of `width` bits taken from `value`.
    pub fn from_u64(value: u64, width: usize) -> BitString {
        BitString((0..width).rev().map(|k| (value >> k) & 1 == 1).collect())
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("λ");
        }
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "λ" {
            return Ok(BitString::new());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Malformed(format!("not a bit: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl From<&[bool]> for BitString {
    fn from(bits: &[bool]) -> Self {
        BitString(bits.to_vec())
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let text: String = self.0.iter().map(|&b| if b { '1' } else { '0' }).collect();
        s.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.is_empty() {
            return Ok(BitString::new());
        }
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Cursor over a bit slice used by the prefix decoders.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn read_bit(&mut self) -> Option<bool> {
        let b = *self.bits.get(self.pos)?;
        self.pos += 1;
        Some(b)
    }

    pub fn read_slice(&mut self, n: usize) -> Option<&'a [bool]> {
        if self.remaining() < n {
            return None;
        }
        let s = &self.bits[self.pos..self.pos + n];
        self.pos += n;
        Some(s)
    }

    pub fn rest(&self) -> &'a [bool] {
        &self.bits[self.pos..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_enumeration() {
        let names: Vec<String> = (0..7).map(|i| BitString::standard(i).to_string()).collect();
        assert_eq!(names, ["λ", "0", "1", "00", "01", "10", "11"]);
    }

    #[test]
    fn length_lex_order() {
        let a: BitString = "11".parse().unwrap();
        let b: BitString = "000".parse().unwrap();
        assert!(a < b);
        assert!(BitString::new() < "0".parse().unwrap());
    }

    #[test]
    fn prefix_relation() {
        let a: BitString = "01".parse().unwrap();
        let b: BitString = "011".parse().unwrap();
        assert!(a.is_proper_prefix_of(&b));
        assert!(!b.is_proper_prefix_of(&a));
        assert!(!a.is_proper_prefix_of(&a));
    }
}
