use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::fec::gf2::{bits_to_word, word_to_bits};
use crate::fec::{CodeSpec, ComponentCode};

use super::product::{decode_product, ComponentDecoder, ProductInput, DEFAULT_ITERATIONS};
use super::{hard_from_llrs, Candidate, DecodeOutcome};

pub const DEFAULT_MAX_QUERIES: u64 = 1_000_000;

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Lexicographic rank of the sorted index tuple `combo` among all
/// `combo.len()`-subsets of `0..n`.
fn lex_rank(combo: &[usize], n: usize) -> u64 {
    let w = combo.len();
    let mut rank = 0u64;
    let mut prev: isize = -1;
    for (i, &c) in combo.iter().enumerate() {
        for j in (prev + 1) as usize..c {
            rank = rank.saturating_add(binomial(n - 1 - j, w - 1 - i));
        }
        prev = c as isize;
    }
    rank
}

/// Hard-decision GRAND state for one component code.
pub(crate) struct HardGrand<'a> {
    code: &'a ComponentCode,
    columns: Vec<u128>,
    by_syndrome: HashMap<u128, Vec<usize>>,
}

pub(crate) struct HardResult {
    pub word: u128,
    pub weight: u32,
    pub abandoned: bool,
    pub queries: u64,
}

impl<'a> HardGrand<'a> {
    pub fn new(code: &'a ComponentCode) -> Self {
        let columns: Vec<u128> = (0..code.n()).map(|i| code.syndrome(1u128 << i)).collect();
        let mut by_syndrome: HashMap<u128, Vec<usize>> = HashMap::new();
        for (i, &s) in columns.iter().enumerate() {
            by_syndrome.entry(s).or_default().push(i);
        }
        Self {
            code,
            columns,
            by_syndrome,
        }
    }

    /// Patterns are tested by increasing weight, lexicographically within a
    /// weight. Only the queries up to the first hit are counted; the search
    /// itself jumps straight to it through a syndrome table.
    pub fn decode(&self, y: u128, max_queries: u64) -> HardResult {
        let n = self.code.n();
        let max_queries = max_queries.max(1);
        let s = self.code.syndrome(y);
        if s == 0 {
            return HardResult {
                word: y,
                weight: 0,
                abandoned: false,
                queries: 1,
            };
        }
        let mut before = 1u64;
        for w in 1..=n {
            if before >= max_queries {
                break;
            }
            let mut prefix = Vec::with_capacity(w);
            if let Some(combo) = self.first_pattern(s, w, 0, &mut prefix) {
                let q = before.saturating_add(lex_rank(&combo, n)).saturating_add(1);
                if q > max_queries {
                    break;
                }
                let e = combo.iter().fold(0u128, |acc, &i| acc | (1u128 << i));
                return HardResult {
                    word: y ^ e,
                    weight: w as u32,
                    abandoned: false,
                    queries: q,
                };
            }
            before = before.saturating_add(binomial(n, w));
        }
        HardResult {
            word: y,
            weight: 0,
            abandoned: true,
            queries: max_queries,
        }
    }

    /// Lexicographically first `w`-subset with positions `>= start` whose
    /// column syndromes sum to `target`, extending `prefix`.
    fn first_pattern(
        &self,
        target: u128,
        w: usize,
        start: usize,
        prefix: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        let n = self.code.n();
        if w == 1 {
            let hit = self
                .by_syndrome
                .get(&target)?
                .iter()
                .copied()
                .find(|&p| p >= start)?;
            let mut combo = prefix.clone();
            combo.push(hit);
            return Some(combo);
        }
        for p in start..n.saturating_sub(w - 1) {
            prefix.push(p);
            let found = self.first_pattern(target ^ self.columns[p], w - 1, p + 1, prefix);
            prefix.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

/// Hard-decision GRAND. Product codes are decoded with the iterative
/// row/column schedule using this decoder on every component.
pub fn grand_hard(y_hard: &[u8], code: &CodeSpec, max_queries: u64) -> Result<DecodeOutcome> {
    if code.is_product() {
        return decode_product(
            ProductInput::Hard(y_hard),
            code,
            ComponentDecoder::Hard { max_queries },
            DEFAULT_ITERATIONS,
        );
    }
    if y_hard.len() != code.n() {
        return Err(Error::shape("grand_hard", code.n(), y_hard.len()));
    }
    let comp = code.component();
    let r = HardGrand::new(comp).decode(bits_to_word(y_hard), max_queries);
    let codeword = word_to_bits(r.word, comp.n());
    let info = word_to_bits(comp.extract_word(r.word), comp.k());
    Ok(DecodeOutcome::single(
        codeword,
        info,
        r.weight as f64,
        r.abandoned,
        r.queries,
    ))
}

#[derive(Debug, Clone)]
struct Node {
    cost: f64,
    weight: u32,
    /// Flipped ranks in the reliability order.
    mask: u128,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}

impl Ord for Node {
    /// Reversed so that `BinaryHeap` pops the cheapest node first.
    fn cmp(&self, other: &Self) -> Ordering {
        let natural = self
            .cost
            .total_cmp(&other.cost)
            .then(self.weight.cmp(&other.weight))
            .then_with(|| {
                let diff = self.mask ^ other.mask;
                if diff == 0 {
                    Ordering::Equal
                } else if self.mask & (diff & diff.wrapping_neg()) != 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            });
        natural.reverse()
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) struct SoftResult {
    /// `(word, cost)` in discovery order, costs non-decreasing.
    pub found: Vec<(u128, f64)>,
    pub queries: u64,
}

/// Exact ordered-reliability search on one component code.
pub(crate) fn soft_search(
    code: &ComponentCode,
    columns: &[u128],
    hard: u128,
    rel: &[f64],
    list_size: usize,
    max_queries: u64,
) -> SoftResult {
    let n = code.n();
    let max_queries = max_queries.max(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| rel[a].total_cmp(&rel[b]));
    let sorted_rel: Vec<f64> = order.iter().map(|&i| rel[i]).collect();
    let cost_of = |mask: u128| -> f64 {
        let mut m = mask;
        let mut c = 0.0;
        while m != 0 {
            c += sorted_rel[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        c
    };

    let s0 = code.syndrome(hard);
    let mut found = Vec::new();
    let mut queries = 0u64;
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        cost: 0.0,
        weight: 0,
        mask: 0,
    });
    while let Some(node) = heap.pop() {
        queries += 1;
        let mut m = node.mask;
        let mut s = s0;
        let mut e = 0u128;
        while m != 0 {
            let pos = order[m.trailing_zeros() as usize];
            s ^= columns[pos];
            e |= 1u128 << pos;
            m &= m - 1;
        }
        if s == 0 {
            found.push((hard ^ e, node.cost));
            if found.len() >= list_size {
                break;
            }
        }
        if queries >= max_queries {
            break;
        }
        let next = if node.mask == 0 {
            0
        } else {
            128 - node.mask.leading_zeros() as usize
        };
        if next < n {
            let bit = 1u128 << next;
            let grown = node.mask | bit;
            heap.push(Node {
                cost: cost_of(grown),
                weight: node.weight + 1,
                mask: grown,
            });
            if node.mask != 0 {
                let shifted = (node.mask ^ (bit >> 1)) | bit;
                heap.push(Node {
                    cost: cost_of(shifted),
                    weight: node.weight,
                    mask: shifted,
                });
            }
        }
    }
    SoftResult { found, queries }
}

pub(crate) fn column_syndromes(code: &ComponentCode) -> Vec<u128> {
    (0..code.n()).map(|i| code.syndrome(1u128 << i)).collect()
}

/// Soft-input GRAND returning up to `list_size` codewords in order of
/// increasing flip cost. Product codes fall back to the iterative schedule
/// with a single-candidate soft component decoder.
pub fn grand_soft_list(
    llrs: &[f64],
    code: &CodeSpec,
    list_size: usize,
    max_queries: u64,
) -> Result<DecodeOutcome> {
    if list_size == 0 {
        return Err(Error::domain("list_size must be at least 1"));
    }
    if code.is_product() {
        return decode_product(
            ProductInput::Soft(llrs),
            code,
            ComponentDecoder::Soft { max_queries },
            DEFAULT_ITERATIONS,
        );
    }
    if llrs.len() != code.n() {
        return Err(Error::shape("grand_soft_list", code.n(), llrs.len()));
    }
    let comp = code.component();
    let hard_bits = hard_from_llrs(llrs);
    let hard = bits_to_word(&hard_bits);
    let rel: Vec<f64> = llrs.iter().map(|l| l.abs()).collect();
    let columns = column_syndromes(comp);
    let r = soft_search(comp, &columns, hard, &rel, list_size, max_queries);
    if r.found.is_empty() {
        let info = word_to_bits(comp.extract_word(hard), comp.k());
        return Ok(DecodeOutcome::single(hard_bits, info, 0.0, true, r.queries));
    }
    let c0 = r.found[0].1;
    let weights: Vec<f64> = r.found.iter().map(|&(_, c)| (-(c - c0)).exp()).collect();
    let total: f64 = weights.iter().sum();
    let candidates: Vec<Candidate> = r
        .found
        .iter()
        .zip(&weights)
        .map(|(&(w, c), &p)| Candidate {
            codeword: word_to_bits(w, comp.n()),
            probability: p / total,
            cost: c,
        })
        .collect();
    let best = r.found[0].0;
    Ok(DecodeOutcome {
        codeword: candidates[0].codeword.clone(),
        info_bits: word_to_bits(comp.extract_word(best), comp.k()),
        candidates,
        crc_pass: None,
        abandoned: false,
        queries_used: r.queries,
    })
}
