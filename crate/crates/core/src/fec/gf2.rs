//! Dense GF(2) matrices with at most 128 columns, one `u128` per row.
//! Bit `j` of a row word is column `j`.

use crate::error::{Error, Result};

pub fn bits_to_word(bits: &[u8]) -> u128 {
    debug_assert!(bits.len() <= 128);
    bits.iter()
        .enumerate()
        .fold(0u128, |acc, (j, &b)| acc | (((b & 1) as u128) << j))
}

pub fn word_to_bits(word: u128, n: usize) -> Vec<u8> {
    (0..n).map(|j| ((word >> j) & 1) as u8).collect()
}

#[inline]
pub fn parity(word: u128) -> u8 {
    (word.count_ones() & 1) as u8
}

/// `u * M` for a row vector `u` (bit i selects row i).
pub fn vec_mul(u: u128, rows: &[u128]) -> u128 {
    let mut acc = 0u128;
    let mut rest = u;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        acc ^= rows[i];
        rest &= rest - 1;
    }
    acc
}

/// `A * B` where `a` has `b.len()` columns.
pub fn mat_mul(a: &[u128], b: &[u128]) -> Vec<u128> {
    a.iter().map(|&row| vec_mul(row, b)).collect()
}

pub fn rank(rows: &[u128]) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for col in 0..128 {
        let bit = 1u128 << col;
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & bit != 0 {
                *row ^= p;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Inverse of a `k x k` matrix, or `None` when singular.
pub fn inverse(rows: &[u128], k: usize) -> Option<Vec<u128>> {
    let mut a = rows.to_vec();
    let mut inv: Vec<u128> = (0..k).map(|i| 1u128 << i).collect();
    for col in 0..k {
        let bit = 1u128 << col;
        let pivot = (col..k).find(|&r| a[r] & bit != 0)?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        for r in 0..k {
            if r != col && a[r] & bit != 0 {
                a[r] ^= a[col];
                inv[r] ^= inv[col];
            }
        }
    }
    Some(inv)
}

/// Row-reduces a full-rank `k x n` generator so that columns `0..k` hold the
/// identity. Fails if those columns are not an information set.
pub fn systematic_form(rows: &[u128]) -> Result<Vec<u128>> {
    let k = rows.len();
    let mut g = rows.to_vec();
    for col in 0..k {
        let bit = 1u128 << col;
        let pivot = (col..k)
            .find(|&r| g[r] & bit != 0)
            .ok_or_else(|| Error::domain("leading columns are not an information set"))?;
        g.swap(col, pivot);
        for r in 0..k {
            if r != col && g[r] & bit != 0 {
                g[r] ^= g[col];
            }
        }
    }
    Ok(g)
}

/// Parity-check matrix `[P^T | I]` of a systematic generator `[I | P]`.
pub fn parity_check_of_systematic(g: &[u128], n: usize) -> Vec<u128> {
    let k = g.len();
    (0..n - k)
        .map(|r| {
            let col = k + r;
            let mut h = 1u128 << col;
            for (i, &row) in g.iter().enumerate() {
                if (row >> col) & 1 == 1 {
                    h |= 1u128 << i;
                }
            }
            h
        })
        .collect()
}
