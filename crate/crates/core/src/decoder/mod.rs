//! Code-agnostic decoding: hard and soft GRAND on component codes and an
//! iterative row/column schedule for product codes.

mod grand;
mod product;

pub use grand::{grand_hard, grand_soft_list, DEFAULT_MAX_QUERIES};
pub use product::{decode_product, ComponentDecoder, ProductInput, DEFAULT_ITERATIONS};

pub use crate::fec::extract_info;

use crate::error::Result;
use crate::fec::{crc_check, CrcSpec};

/// One entry of a decoder's candidate list.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub codeword: Vec<u8>,
    /// Posterior weight normalised over the returned list.
    pub probability: f64,
    /// Sum of `|llr|` over flipped positions (Hamming weight for hard input).
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Best candidate; the raw hard decisions when the search was abandoned.
    pub codeword: Vec<u8>,
    pub info_bits: Vec<u8>,
    /// Sorted by non-increasing probability; `candidates[0].codeword == codeword`.
    pub candidates: Vec<Candidate>,
    /// Set by [`DecodeOutcome::check_crc`].
    pub crc_pass: Option<bool>,
    pub abandoned: bool,
    pub queries_used: u64,
}

impl DecodeOutcome {
    pub(crate) fn single(
        codeword: Vec<u8>,
        info_bits: Vec<u8>,
        cost: f64,
        abandoned: bool,
        queries_used: u64,
    ) -> Self {
        Self {
            candidates: vec![Candidate {
                codeword: codeword.clone(),
                probability: 1.0,
                cost,
            }],
            codeword,
            info_bits,
            crc_pass: None,
            abandoned,
            queries_used,
        }
    }

    /// Evaluates the CRC on the decoded information bits.
    pub fn check_crc(&mut self, crc: &CrcSpec) -> Result<bool> {
        let pass = crc_check(&self.info_bits, crc)?;
        self.crc_pass = Some(pass);
        Ok(pass)
    }
}

/// Hard decisions on LLRs; a non-negative LLR favours bit 0.
pub fn hard_from_llrs(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| u8::from(l < 0.0)).collect()
}
