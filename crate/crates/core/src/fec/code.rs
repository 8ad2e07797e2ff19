use std::sync::Arc;

use crate::error::{Error, Result};
use rand::RngCore;

use crate::rng::RandomStream;

use super::bch::generator_poly;
use super::gf2::{
    bits_to_word, inverse, parity, parity_check_of_systematic, rank, systematic_form, vec_mul,
    word_to_bits,
};

/// A binary linear block code of length at most 128, stored as packed
/// generator and parity-check rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentCode {
    n: usize,
    k: usize,
    generator: Vec<u128>,
    parity_check: Vec<u128>,
    systematic: bool,
    /// Rows of `A^-1` when the generator is `A * G_sys`.
    recovery: Option<Vec<u128>>,
    name: String,
}

impl ComponentCode {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_systematic(&self) -> bool {
        self.systematic
    }

    pub fn generator(&self) -> &[u128] {
        &self.generator
    }

    pub fn parity_check(&self) -> &[u128] {
        &self.parity_check
    }

    pub fn info_mask(&self) -> u128 {
        mask(self.k)
    }

    pub fn encode_word(&self, u: u128) -> u128 {
        vec_mul(u, &self.generator)
    }

    /// Bit `r` is the r-th parity check evaluated on `word`.
    pub fn syndrome(&self, word: u128) -> u128 {
        self.parity_check
            .iter()
            .enumerate()
            .fold(0u128, |acc, (r, &h)| {
                acc | ((parity(h & word) as u128) << r)
            })
    }

    pub fn is_codeword(&self, word: u128) -> bool {
        self.parity_check.iter().all(|&h| parity(h & word) == 0)
    }

    /// Information word of a codeword. Systematic codes read the leading `k`
    /// positions; otherwise the `k x k` system is solved with the stored inverse.
    pub fn extract_word(&self, codeword: u128) -> u128 {
        let lead = codeword & self.info_mask();
        match &self.recovery {
            None => lead,
            Some(inv) => vec_mul(lead, inv),
        }
    }

    /// Minimum distance by enumerating all `2^k` codewords.
    pub fn min_distance_exhaustive(&self) -> Result<u32> {
        if self.k > 24 {
            return Err(Error::domain("exhaustive distance only for k <= 24"));
        }
        Ok((1u128..(1u128 << self.k))
            .map(|u| self.encode_word(u).count_ones())
            .min()
            .unwrap_or(0))
    }
}

fn mask(bits: usize) -> u128 {
    if bits >= 128 {
        u128::MAX
    } else {
        (1u128 << bits) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeStructure {
    Single,
    /// Two-dimensional product of a component with itself.
    Product {
        rows: usize,
        cols: usize,
    },
}

/// A code as used by the link: a component code, optionally squared into a
/// product code. Product generators are never materialised; encoding runs
/// row and column passes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    component: Arc<ComponentCode>,
    structure: CodeStructure,
}

impl CodeSpec {
    pub fn single(component: ComponentCode) -> Self {
        Self {
            component: Arc::new(component),
            structure: CodeStructure::Single,
        }
    }

    pub fn component(&self) -> &ComponentCode {
        &self.component
    }

    pub fn structure(&self) -> CodeStructure {
        self.structure
    }

    pub fn is_product(&self) -> bool {
        matches!(self.structure, CodeStructure::Product { .. })
    }

    pub fn n(&self) -> usize {
        match self.structure {
            CodeStructure::Single => self.component.n,
            CodeStructure::Product { rows, cols } => rows * cols,
        }
    }

    pub fn k(&self) -> usize {
        let k = self.component.k;
        match self.structure {
            CodeStructure::Single => k,
            CodeStructure::Product { .. } => k * k,
        }
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    pub fn is_systematic(&self) -> bool {
        self.component.systematic
    }

    pub fn label(&self) -> String {
        match self.structure {
            CodeStructure::Single => format!("{}[{},{}]", self.component.name, self.n(), self.k()),
            CodeStructure::Product { .. } => format!(
                "{}[{},{}]^2=[{},{}]",
                self.component.name,
                self.component.n,
                self.component.k,
                self.n(),
                self.k()
            ),
        }
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        if word.len() != self.n() {
            return false;
        }
        let comp = &self.component;
        match self.structure {
            CodeStructure::Single => comp.is_codeword(bits_to_word(word)),
            CodeStructure::Product { rows, cols } => {
                (0..rows).all(|r| comp.is_codeword(bits_to_word(&word[r * cols..(r + 1) * cols])))
                    && (0..cols).all(|c| comp.is_codeword(column_word(word, c, rows, cols)))
            }
        }
    }

    /// Explicit `k x n` generator rows as bit vectors (products are built by
    /// encoding unit vectors, so keep them small).
    pub fn generator_rows(&self) -> Vec<Vec<u8>> {
        match self.structure {
            CodeStructure::Single => self
                .component
                .generator
                .iter()
                .map(|&g| word_to_bits(g, self.component.n))
                .collect(),
            CodeStructure::Product { .. } => (0..self.k())
                .map(|i| {
                    let mut u = vec![0u8; self.k()];
                    u[i] = 1;
                    encode(&u, self).expect("unit vector has length k")
                })
                .collect(),
        }
    }
}

pub(crate) fn column_word(word: &[u8], c: usize, rows: usize, cols: usize) -> u128 {
    (0..rows).fold(0u128, |acc, r| acc | ((word[r * cols + c] as u128) << r))
}

/// Systematic extended BCH code `[2^m, 2^m - 1 - deg g, 2t + 2]`: the
/// narrow-sense BCH code extended by an overall parity bit.
pub fn make_ebch(m: u32, t: u32) -> Result<CodeSpec> {
    let g = generator_poly(m, t)?;
    let n0 = (1usize << m) - 1;
    let degree = (127 - g.leading_zeros()) as usize;
    let k = n0 - degree;
    let shifts: Vec<u128> = (0..k).map(|i| g << i).collect();
    let sys = systematic_form(&shifts)?;
    let extended: Vec<u128> = sys
        .iter()
        .map(|&row| row | ((parity(row) as u128) << n0))
        .collect();
    let n = n0 + 1;
    let parity_check = parity_check_of_systematic(&extended, n);
    let name = if t == 1 { "eHamming" } else { "eBCH" };
    Ok(CodeSpec::single(ComponentCode {
        n,
        k,
        generator: extended,
        parity_check,
        systematic: true,
        recovery: None,
        name: name.to_string(),
    }))
}

/// `[2^m, 2^m - m - 1, 4]` extended Hamming code (the distance-4 eBCH code).
pub fn make_extended_hamming(m: u32) -> Result<CodeSpec> {
    if m < 3 {
        return Err(Error::domain(format!(
            "extended Hamming needs m >= 3, got {m}"
        )));
    }
    make_ebch(m, 1)
}

/// `[2^m, 2^m - 2m - 1, 6]` double-error-correcting eBCH code, e.g. `[64,51]`
/// for m = 6 and `[128,113]` for m = 7.
pub fn make_ebch_distance6(m: u32) -> Result<CodeSpec> {
    if m < 4 {
        return Err(Error::domain(format!(
            "distance-6 eBCH needs m >= 4, got {m}"
        )));
    }
    make_ebch(m, 2)
}

/// Two-dimensional product of `component` with itself.
pub fn make_product(component: &CodeSpec) -> Result<CodeSpec> {
    if component.is_product() {
        return Err(Error::domain(
            "product construction expects a single component code",
        ));
    }
    let n = component.component.n;
    Ok(CodeSpec {
        component: Arc::clone(&component.component),
        structure: CodeStructure::Product { rows: n, cols: n },
    })
}

/// `u * G`. Products fill a `k x k` array row-major, encode rows, then columns.
pub fn encode(u: &[u8], code: &CodeSpec) -> Result<Vec<u8>> {
    if u.len() != code.k() {
        return Err(Error::shape("encode", code.k(), u.len()));
    }
    let comp = &code.component;
    match code.structure {
        CodeStructure::Single => Ok(word_to_bits(comp.encode_word(bits_to_word(u)), comp.n)),
        CodeStructure::Product { rows, cols } => {
            let k = comp.k;
            let row_words: Vec<u128> = u
                .chunks_exact(k)
                .map(|r| comp.encode_word(bits_to_word(r)))
                .collect();
            let mut out = vec![0u8; rows * cols];
            for c in 0..cols {
                let info = row_words
                    .iter()
                    .enumerate()
                    .fold(0u128, |acc, (r, w)| acc | (((w >> c) & 1) << r));
                let col = comp.encode_word(info);
                for r in 0..rows {
                    out[r * cols + c] = ((col >> r) & 1) as u8;
                }
            }
            Ok(out)
        }
    }
}

/// Information bits of `codeword` (best effort when it is not a codeword).
pub fn extract_info(codeword: &[u8], code: &CodeSpec) -> Result<Vec<u8>> {
    if codeword.len() != code.n() {
        return Err(Error::shape("extract_info", code.n(), codeword.len()));
    }
    let comp = &code.component;
    match code.structure {
        CodeStructure::Single => Ok(word_to_bits(
            comp.extract_word(bits_to_word(codeword)),
            comp.k,
        )),
        CodeStructure::Product { rows, cols } => {
            let k = comp.k;
            if comp.systematic {
                return Ok((0..k)
                    .flat_map(|r| codeword[r * cols..r * cols + k].iter().copied())
                    .collect());
            }
            // columns first: recover the k x n array of row codewords
            let partial: Vec<u128> = (0..cols)
                .map(|c| comp.extract_word(column_word(codeword, c, rows, cols)))
                .collect();
            Ok((0..k)
                .flat_map(|r| {
                    let row = partial
                        .iter()
                        .enumerate()
                        .fold(0u128, |acc, (c, w)| acc | (((w >> r) & 1) << c));
                    word_to_bits(comp.extract_word(row), k)
                })
                .collect())
        }
    }
}

/// Same codebook with generator `A * G` for a uniformly random invertible
/// `k x k` matrix `A`.
pub fn make_nonsystematic(code: &CodeSpec, rng: &mut RandomStream) -> Result<CodeSpec> {
    let k = code.component.k;
    loop {
        let a: Vec<u128> = (0..k)
            .map(|_| {
                let hi = rng.next_u64() as u128;
                ((hi << 64) | rng.next_u64() as u128) & mask(k)
            })
            .collect();
        if rank(&a) == k {
            return make_nonsystematic_with(code, &a);
        }
    }
}

/// Non-systematic variant with a caller-chosen scrambler `A` (rows packed).
pub fn make_nonsystematic_with(code: &CodeSpec, a: &[u128]) -> Result<CodeSpec> {
    let comp = &code.component;
    if !comp.systematic {
        return Err(Error::domain(
            "make_nonsystematic expects a systematic code",
        ));
    }
    if a.len() != comp.k {
        return Err(Error::shape(
            "make_nonsystematic (scrambler rows)",
            comp.k,
            a.len(),
        ));
    }
    let inv = inverse(a, comp.k).ok_or_else(|| Error::domain("scrambler matrix is singular"))?;
    let generator = a.iter().map(|&row| vec_mul(row, &comp.generator)).collect();
    Ok(CodeSpec {
        component: Arc::new(ComponentCode {
            n: comp.n,
            k: comp.k,
            generator,
            parity_check: comp.parity_check.clone(),
            systematic: false,
            recovery: Some(inv),
            name: format!("ns-{}", comp.name),
        }),
        structure: code.structure,
    })
}
