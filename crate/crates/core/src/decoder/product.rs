use crate::error::{Error, Result};
use crate::fec::{column_word, extract_info, CodeSpec, CodeStructure};

use super::grand::{column_syndromes, soft_search, HardGrand};
use super::{hard_from_llrs, DecodeOutcome};

pub const DEFAULT_ITERATIONS: usize = 4;

/// Channel observation handed to [`decode_product`].
#[derive(Debug, Clone, Copy)]
pub enum ProductInput<'a> {
    Hard(&'a [u8]),
    Soft(&'a [f64]),
}

/// Decoder applied to every row and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentDecoder {
    Hard {
        max_queries: u64,
    },
    /// Single-candidate soft GRAND. Reliabilities are the channel `|llr|`;
    /// the hard word is the current state of the array.
    Soft {
        max_queries: u64,
    },
}

/// Iterative product decoding: each pass decodes all rows, then all
/// columns, and the loop stops after `iterations` passes or once a pass
/// leaves the array unchanged. Abandoned component decodes leave their
/// line untouched.
pub fn decode_product(
    input: ProductInput<'_>,
    code: &CodeSpec,
    decoder: ComponentDecoder,
    iterations: usize,
) -> Result<DecodeOutcome> {
    let (rows, cols) = match code.structure() {
        CodeStructure::Product { rows, cols } => (rows, cols),
        CodeStructure::Single => return Err(Error::domain("decode_product needs a product code")),
    };
    let n = rows * cols;
    let (mut bits, rel): (Vec<u8>, Option<Vec<f64>>) = match input {
        ProductInput::Hard(y) => {
            if y.len() != n {
                return Err(Error::shape("decode_product", n, y.len()));
            }
            (y.to_vec(), None)
        }
        ProductInput::Soft(l) => {
            if l.len() != n {
                return Err(Error::shape("decode_product", n, l.len()));
            }
            (hard_from_llrs(l), Some(l.iter().map(|x| x.abs()).collect()))
        }
    };
    let comp = code.component();
    let hard = HardGrand::new(comp);
    let columns = column_syndromes(comp);
    let mut queries = 0u64;

    let mut decode_line = |word: u128, line_rel: &[f64]| -> u128 {
        match decoder {
            ComponentDecoder::Hard { max_queries } => {
                let r = hard.decode(word, max_queries);
                queries += r.queries;
                r.word
            }
            ComponentDecoder::Soft { max_queries } => {
                let r = soft_search(comp, &columns, word, line_rel, 1, max_queries);
                queries += r.queries;
                r.found.first().map_or(word, |&(w, _)| w)
            }
        }
    };
    let ones = vec![1.0; rows.max(cols)];

    for _ in 0..iterations.max(1) {
        let mut changed = false;
        for r in 0..rows {
            let line = &mut bits[r * cols..(r + 1) * cols];
            let word = line
                .iter()
                .enumerate()
                .fold(0u128, |acc, (c, &b)| acc | ((b as u128) << c));
            let line_rel: Vec<f64> = match &rel {
                Some(rel) => rel[r * cols..(r + 1) * cols].to_vec(),
                None => ones[..cols].to_vec(),
            };
            let out = decode_line(word, &line_rel);
            if out != word {
                changed = true;
                for (c, b) in line.iter_mut().enumerate() {
                    *b = ((out >> c) & 1) as u8;
                }
            }
        }
        for c in 0..cols {
            let word = column_word(&bits, c, rows, cols);
            let line_rel: Vec<f64> = match &rel {
                Some(rel) => (0..rows).map(|r| rel[r * cols + c]).collect(),
                None => ones[..rows].to_vec(),
            };
            let out = decode_line(word, &line_rel);
            if out != word {
                changed = true;
                for r in 0..rows {
                    bits[r * cols + c] = ((out >> r) & 1) as u8;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let abandoned = !code.is_codeword(&bits);
    let info = extract_info(&bits, code)?;
    Ok(DecodeOutcome::single(bits, info, 0.0, abandoned, queries))
}
