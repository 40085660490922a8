//! Occupation-number configurations and particle-number sectors.
//!
//! Spin orbitals are interleaved: bit `2k` is spatial orbital `k` with spin
//! alpha, bit `2k + 1` is the same orbital with spin beta. Bit `i` is also the
//! `i`-th token of the autoregressive sequence.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Maximum number of spin orbitals representable in one machine word.
pub const MAX_ORBITALS: usize = 64;

/// An occupation bitstring over `n_orbitals` spin orbitals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Configuration {
    bits: u64,
    n_orbitals: usize,
}

impl Configuration {
    pub fn new(bits: u64, n_orbitals: usize) -> Result<Self> {
        if n_orbitals == 0 || n_orbitals > MAX_ORBITALS {
            return Err(Error::Argument(format!(
                "n_orbitals must be in [1, {MAX_ORBITALS}], got {n_orbitals}"
            )));
        }
        if n_orbitals < 64 && bits >> n_orbitals != 0 {
            return Err(Error::Argument(format!(
                "bits {bits:#x} exceed width {n_orbitals}"
            )));
        }
        Ok(Self { bits, n_orbitals })
    }

    /// Construct without validation; callers guarantee `bits < 2^n_orbitals`.
    #[inline]
    pub(crate) fn from_raw(bits: u64, n_orbitals: usize) -> Self {
        debug_assert!(n_orbitals == 64 || bits >> n_orbitals == 0);
        Self { bits, n_orbitals }
    }

    /// Build from a slice of 0/1 occupations, index 0 first.
    pub fn from_occupations(occ: &[u8]) -> Result<Self> {
        let mut bits = 0u64;
        for (i, &o) in occ.iter().enumerate() {
            match o {
                0 => {}
                1 => bits |= 1 << i,
                _ => return Err(Error::Argument(format!("occupation {o} at {i}"))),
            }
        }
        Self::new(bits, occ.len())
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    #[inline]
    pub fn occupied(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    #[inline]
    pub fn n_electrons(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn n_alpha(&self) -> u32 {
        (self.bits & ALPHA_MASK).count_ones()
    }

    pub fn n_beta(&self) -> u32 {
        (self.bits & !ALPHA_MASK).count_ones()
    }

    pub fn occupations(&self) -> Vec<u8> {
        (0..self.n_orbitals).map(|i| self.occupied(i) as u8).collect()
    }
}

/// Even bit positions (alpha spin orbitals).
pub const ALPHA_MASK: u64 = 0x5555_5555_5555_5555;

impl fmt::Display for Configuration {
    /// Orbital 0 is printed first, e.g. `1100` has orbitals 0 and 1 occupied.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n_orbitals {
            f.write_str(if self.occupied(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let occ = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Argument(format!("invalid occupation character {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_occupations(&occ)
    }
}

/// Fixed alpha/beta electron counts.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, serde::Serialize, serde::Deserialize)]
pub struct SectorSpec {
    pub n_alpha: usize,
    pub n_beta: usize,
}

impl SectorSpec {
    pub fn new(n_alpha: usize, n_beta: usize) -> Self {
        Self { n_alpha, n_beta }
    }

    /// Derive from total electron count and twice the spin projection.
    pub fn from_nelec_ms2(n_electrons: usize, ms2: i64) -> Result<Self> {
        let n = n_electrons as i64;
        if ms2.abs() > n || (n + ms2) % 2 != 0 {
            return Err(Error::Argument(format!(
                "inconsistent NELEC={n_electrons}, MS2={ms2}"
            )));
        }
        Ok(Self {
            n_alpha: ((n + ms2) / 2) as usize,
            n_beta: ((n - ms2) / 2) as usize,
        })
    }

    pub fn n_electrons(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    pub fn ms2(&self) -> i64 {
        self.n_alpha as i64 - self.n_beta as i64
    }

    pub fn check_feasible(&self, n_orbitals: usize) -> Result<()> {
        if !n_orbitals.is_multiple_of(2) {
            return Err(Error::Argument(format!(
                "spin-orbital count {n_orbitals} is odd"
            )));
        }
        let n_spatial = n_orbitals / 2;
        if self.n_alpha > n_spatial || self.n_beta > n_spatial {
            return Err(Error::Argument(format!(
                "sector ({}, {}) infeasible with {n_spatial} spatial orbitals",
                self.n_alpha, self.n_beta
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: &Configuration) -> bool {
        x.n_alpha() as usize == self.n_alpha && x.n_beta() as usize == self.n_beta
    }

    /// Number of sector configurations on `n_orbitals` spin orbitals.
    pub fn dimension(&self, n_orbitals: usize) -> u128 {
        let n_spatial = (n_orbitals / 2) as u64;
        binomial(n_spatial, self.n_alpha as u64) * binomial(n_spatial, self.n_beta as u64)
    }

    /// Lowest-index filling of each spin channel.
    pub fn reference(&self, n_orbitals: usize) -> Configuration {
        let mut bits = 0u64;
        for k in 0..self.n_alpha {
            bits |= 1 << (2 * k);
        }
        for k in 0..self.n_beta {
            bits |= 1 << (2 * k + 1);
        }
        Configuration::from_raw(bits, n_orbitals)
    }

    /// Electron quota of the spin channel that position `i` belongs to.
    #[inline]
    pub fn channel_target(&self, i: usize) -> usize {
        if i.is_multiple_of(2) {
            self.n_alpha
        } else {
            self.n_beta
        }
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Which of the two tokens may be emitted at a position.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TokenMask {
    pub allow_zero: bool,
    pub allow_one: bool,
}

impl TokenMask {
    pub const ANY: TokenMask = TokenMask {
        allow_zero: true,
        allow_one: true,
    };

    #[inline]
    pub fn allows(&self, token: u8) -> bool {
        if token == 0 {
            self.allow_zero
        } else {
            self.allow_one
        }
    }

    #[inline]
    pub fn is_free(&self) -> bool {
        self.allow_zero && self.allow_one
    }
}

/// Tokens allowed at position `len` after the prefix `prefix_bits` (bits `0..len`)
/// so that the completed string can still land in `sector`.
pub fn sector_mask(prefix_bits: u64, len: usize, n_orbitals: usize, sector: SectorSpec) -> TokenMask {
    let channel = len % 2;
    let channel_bits = if channel == 0 { ALPHA_MASK } else { !ALPHA_MASK };
    let below = if len == 0 { 0 } else { u64::MAX >> (64 - len) };
    let placed = (prefix_bits & below & channel_bits).count_ones() as usize;
    let target = sector.channel_target(len);
    // positions j > len with j < n_orbitals and j % 2 == channel
    let remaining_after = n_orbitals.saturating_sub(len + 1) / 2;
    TokenMask {
        allow_zero: placed + remaining_after >= target,
        allow_one: placed < target,
    }
}

/// Mask for a prefix given as a partial configuration.
pub fn prefix_mask(prefix: &[u8], n_orbitals: usize, sector: SectorSpec) -> TokenMask {
    let bits = prefix
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &t)| acc | ((t as u64 & 1) << i));
    sector_mask(bits, prefix.len(), n_orbitals, sector)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_of(s: &str, n: usize, sector: SectorSpec) -> TokenMask {
        let occ: Vec<u8> = s.bytes().map(|b| b - b'0').collect();
        prefix_mask(&occ, n, sector)
    }

    #[test]
    fn alpha_quota_reached_forbids_one() {
        let m = mask_of("10", 4, SectorSpec::new(1, 1));
        assert_eq!(
            m,
            TokenMask {
                allow_zero: true,
                allow_one: false
            }
        );
    }

    #[test]
    fn feasibility_forces_one() {
        let m = mask_of("00", 4, SectorSpec::new(1, 1));
        assert_eq!(
            m,
            TokenMask {
                allow_zero: false,
                allow_one: true
            }
        );
    }

    #[test]
    fn empty_sector_only_zero() {
        let sector = SectorSpec::new(0, 0);
        let mut bits = 0u64;
        for i in 0..6 {
            let m = sector_mask(bits, i, 6, sector);
            assert!(m.allow_zero && !m.allow_one);
            bits &= !(1 << i);
        }
        assert_eq!(bits, 0);
    }

    #[test]
    fn display_roundtrip() {
        let x: Configuration = "1100".parse().unwrap();
        assert_eq!(x.bits(), 0b0011);
        assert_eq!(x.to_string(), "1100");
        assert_eq!(x.n_alpha(), 1);
        assert_eq!(x.n_beta(), 1);
    }

    #[test]
    fn sector_from_ms2() {
        assert_eq!(SectorSpec::from_nelec_ms2(4, 0).unwrap(), SectorSpec::new(2, 2));
        assert_eq!(SectorSpec::from_nelec_ms2(3, 1).unwrap(), SectorSpec::new(2, 1));
        assert!(SectorSpec::from_nelec_ms2(3, 0).is_err());
        assert!(SectorSpec::from_nelec_ms2(2, 4).is_err());
    }

    #[test]
    fn dimensions() {
        assert_eq!(SectorSpec::new(1, 1).dimension(4), 4);
        assert_eq!(SectorSpec::new(2, 2).dimension(12), 225);
        assert_eq!(SectorSpec::new(5, 5).dimension(14), 441);
        assert_eq!(SectorSpec::new(0, 0).dimension(8), 1);
    }

    #[test]
    fn width_checked() {
        assert!(Configuration::new(0b10000, 4).is_err());
        assert!(Configuration::new(0, 0).is_err());
        assert!(Configuration::new(u64::MAX, 64).is_ok());
    }
}
