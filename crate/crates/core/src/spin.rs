//! Packed assignments shared by the binary and spin forms of a model.
//!
//! A set bit is `x = 1` in the binary reading and `s = +1` in the spin
//! reading; a cleared bit is `x = 0` / `s = -1`, so `s = 2x - 1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SpinKind {
    #[default]
    Binary,
    Spin,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SpinVector {
    words: Vec<u64>,
    len: usize,
    kind: SpinKind,
}

impl SpinVector {
    pub fn zeros(len: usize, kind: SpinKind) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
            kind,
        }
    }

    pub fn from_bools(bits: &[bool], kind: SpinKind) -> Self {
        let mut v = Self::zeros(bits.len(), kind);
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Binary assignment from 0/1 values; anything nonzero counts as 1.
    pub fn from_binary(values: &[u8]) -> Self {
        let mut v = Self::zeros(values.len(), SpinKind::Binary);
        for (i, &b) in values.iter().enumerate() {
            v.set(i, b != 0);
        }
        v
    }

    pub fn from_spins(values: &[i8]) -> Result<Self> {
        let mut v = Self::zeros(values.len(), SpinKind::Spin);
        for (i, &s) in values.iter().enumerate() {
            match s {
                1 => v.set(i, true),
                -1 => {}
                other => return Err(Error::SpinDomain(other)),
            }
        }
        Ok(v)
    }

    /// Low `len` bits of `state`, bit `i` is variable `i`.
    pub fn from_index(state: u64, len: usize, kind: SpinKind) -> Self {
        assert!(len <= 64, "from_index supports at most 64 variables");
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        let mut v = Self::zeros(len, kind);
        if len > 0 {
            v.words[0] = state & mask;
        }
        v
    }

    /// Inverse of [`SpinVector::from_index`]; `None` past 64 variables.
    pub fn to_index(&self) -> Option<u64> {
        match self.len {
            0 => Some(0),
            1..=64 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn kind(&self) -> SpinKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: SpinKind) -> Self {
        self.kind = kind;
        self
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    #[inline]
    pub fn binary(&self, i: usize) -> f64 {
        if self.get(i) {
            1.0
        } else {
            0.0
        }
    }

    #[inline]
    pub fn spin(&self, i: usize) -> f64 {
        if self.get(i) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for SpinVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpinVector({:?}, {})", self.kind, self.to_bit_string())
    }
}

impl fmt::Display for SpinVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

impl FromStr for SpinVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = Self::zeros(s.len(), SpinKind::Binary);
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => v.set(i, true),
                '0' => {}
                other => return Err(Error::Argument(format!("invalid bit character {other:?}"))),
            }
        }
        Ok(v)
    }
}

impl Serialize for SpinVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_bit_string())
    }
}

impl<'de> Deserialize<'de> for SpinVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spins_reject_out_of_domain() {
        assert!(matches!(SpinVector::from_spins(&[1, 0, -1]), Err(Error::SpinDomain(0))));
        let v = SpinVector::from_spins(&[1, -1, 1]).unwrap();
        assert_eq!(v.to_bit_string(), "101");
        assert_eq!(v.spin(1), -1.0);
        assert_eq!(v.binary(2), 1.0);
    }

    #[test]
    fn index_round_trip_and_wide_vectors() {
        let v = SpinVector::from_index(0b1011, 5, SpinKind::Binary);
        assert_eq!(v.to_bit_string(), "11010");
        assert_eq!(v.to_index(), Some(0b1011));

        let mut wide = SpinVector::zeros(130, SpinKind::Binary);
        wide.set(129, true);
        wide.flip(64);
        assert_eq!(wide.count_ones(), 2);
        assert!(wide.get(64) && wide.get(129) && !wide.get(0));
        assert_eq!(wide.to_index(), None);
        let parsed: SpinVector = wide.to_bit_string().parse().unwrap();
        assert_eq!(parsed, wide);
    }
}
