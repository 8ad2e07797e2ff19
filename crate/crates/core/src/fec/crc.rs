//! Cyclic redundancy checks over bit vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A CRC of `width` bits. `polynomial` lists the generator coefficients
/// below the implicit leading `x^width` term, highest degree in the most
/// significant bit (the usual "normal" representation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrcSpec {
    pub width: u32,
    pub polynomial: u64,
    #[serde(default)]
    pub init_ones: bool,
    #[serde(default)]
    pub xorout_ones: bool,
}

impl CrcSpec {
    pub fn new(width: u32, polynomial: u64) -> Result<Self> {
        let spec = Self {
            width,
            polynomial,
            init_ones: false,
            xorout_ones: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.width > 32 {
            return Err(Error::domain(format!(
                "CRC width {} not in 1..=32",
                self.width
            )));
        }
        if self.polynomial >> self.width != 0 {
            return Err(Error::domain(
                "CRC polynomial has terms at or above x^width",
            ));
        }
        if self.polynomial & 1 == 0 {
            return Err(Error::domain("CRC polynomial must have a constant term"));
        }
        Ok(())
    }

    /// x^8 + x^2 + x + 1.
    pub fn crc8() -> Self {
        Self::new(8, 0x07).expect("valid preset")
    }

    /// (x + 1)(x^10 + x^3 + 1) = x^11 + x^10 + x^4 + x^3 + x + 1.
    ///
    /// The primitive degree-10 factor has period 1023 and the (x + 1) factor
    /// catches every odd-weight error, so Hamming distance is at least 4 for
    /// codewords up to 1023 bits.
    pub fn crc11() -> Self {
        Self::new(11, 0x41B).expect("valid preset")
    }

    /// CRC-16/CCITT polynomial 0x1021.
    pub fn crc16() -> Self {
        Self::new(16, 0x1021).expect("valid preset")
    }

    /// CRC24A of 3GPP (0x864CFB).
    pub fn crc24a() -> Self {
        Self::new(24, 0x86_4CFB).expect("valid preset")
    }

    fn mask(&self) -> u64 {
        (1u64 << self.width) - 1
    }

    /// Checksum of `data`, MSB-first long division.
    pub fn checksum(&self, data: &[u8]) -> u64 {
        let top = 1u64 << (self.width - 1);
        let mut reg = if self.init_ones { self.mask() } else { 0 };
        for &b in data {
            let feedback = ((reg & top) != 0) ^ (b & 1 == 1);
            reg = (reg << 1) & self.mask();
            if feedback {
                reg ^= self.polynomial;
            }
        }
        if self.xorout_ones {
            reg ^= self.mask();
        }
        reg
    }
}

/// `u` followed by its `width` checksum bits, most significant first.
pub fn crc_append(u: &[u8], spec: &CrcSpec) -> Vec<u8> {
    let crc = spec.checksum(u);
    let mut out = Vec::with_capacity(u.len() + spec.width as usize);
    out.extend_from_slice(u);
    out.extend((0..spec.width).rev().map(|i| ((crc >> i) & 1) as u8));
    out
}

pub fn crc_check(v: &[u8], spec: &CrcSpec) -> Result<bool> {
    let w = spec.width as usize;
    if v.len() <= w {
        return Err(Error::shape(
            "crc_check (needs more than width bits)",
            w + 1,
            v.len(),
        ));
    }
    let (data, tail) = v.split_at(v.len() - w);
    let crc = spec.checksum(data);
    Ok(tail
        .iter()
        .enumerate()
        .all(|(i, &b)| ((crc >> (w - 1 - i)) & 1) as u8 == b))
}
