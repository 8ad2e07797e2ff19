//! Linear block codes over GF(2): extended BCH / Hamming components, their
//! two-dimensional products, non-systematic variants and CRC framing.

pub mod bch;
mod code;
pub mod crc;
pub mod gf2;

pub(crate) use code::column_word;
pub use code::{
    encode, extract_info, make_ebch, make_ebch_distance6, make_extended_hamming,
    make_nonsystematic, make_nonsystematic_with, make_product, CodeSpec, CodeStructure,
    ComponentCode,
};
pub use crc::{crc_append, crc_check, CrcSpec};
