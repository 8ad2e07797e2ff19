//! Gray-labelled unit-energy constellations and soft demapping.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ComplexVec;

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    /// `points[label]` is the point carrying `label`, bits MSB-first.
    points: ComplexVec,
}

impl Constellation {
    /// Supported orders: 2 (BPSK), 4 (QPSK / 4-QAM) and 16 (16-QAM).
    pub fn new(order: usize) -> Result<Self> {
        match order {
            2 => Ok(Self::bpsk()),
            4 => Ok(Self::qam4()),
            16 => Ok(Self::qam16()),
            _ => Err(Error::domain(format!(
                "unsupported modulation order {order}"
            ))),
        }
    }

    /// Bit 0 maps to +1.
    pub fn bpsk() -> Self {
        Self {
            order: 2,
            bits_per_symbol: 1,
            points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
        }
    }

    /// Label `b0 b1`: `b0` selects the in-phase sign, `b1` the quadrature sign.
    pub fn qam4() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let points = (0..4u32)
            .map(|label| {
                let i = if label & 0b10 == 0 { s } else { -s };
                let q = if label & 0b01 == 0 { s } else { -s };
                Complex64::new(i, q)
            })
            .collect();
        Self {
            order: 4,
            bits_per_symbol: 2,
            points,
        }
    }

    /// Label `b0 b1 b2 b3`: `b0 b1` Gray-code the in-phase level, `b2 b3` the
    /// quadrature level (00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3).
    pub fn qam16() -> Self {
        let scale = 1.0 / 10f64.sqrt();
        let level = |two_bits: u32| match two_bits {
            0b00 => 3.0,
            0b01 => 1.0,
            0b11 => -1.0,
            _ => -3.0,
        };
        let points = (0..16u32)
            .map(|label| Complex64::new(level(label >> 2) * scale, level(label & 0b11) * scale))
            .collect();
        Self {
            order: 16,
            bits_per_symbol: 4,
            points,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Bit `j` (0 = most significant) of `label`.
    #[inline]
    pub fn label_bit(&self, label: usize, j: usize) -> u8 {
        ((label >> (self.bits_per_symbol - 1 - j)) & 1) as u8
    }

    pub fn label_bits(&self, label: usize) -> Vec<u8> {
        (0..self.bits_per_symbol)
            .map(|j| self.label_bit(label, j))
            .collect()
    }

    fn label_of(&self, bits: &[u8]) -> usize {
        bits.iter()
            .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)
    }

    /// Index of the nearest point; ties go to the lowest label.
    pub fn nearest(&self, y: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }
}

pub fn modulate(bits: &[u8], constellation: &Constellation) -> Result<ComplexVec> {
    let m = constellation.bits_per_symbol();
    if bits.len() % m != 0 {
        return Err(Error::shape(
            "modulate (bit count multiple of log2 M)",
            bits.len().div_ceil(m) * m,
            bits.len(),
        ));
    }
    Ok(bits
        .chunks_exact(m)
        .map(|chunk| constellation.points[constellation.label_of(chunk)])
        .collect())
}

/// Per-symbol demapper output.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftSymbolInfo {
    /// One LLR per label bit; positive favours bit 0.
    pub llrs: Vec<f64>,
    /// Smallest |LLR| among the symbol's bits.
    pub symbol_reliability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlrMode {
    /// Log-sum-exp over each bit's point subsets.
    #[default]
    Exact,
    /// Nearest point of each subset only.
    MaxLog,
}

pub fn compute_llrs(
    y_eq: &[Complex64],
    effective_var: &[f64],
    constellation: &Constellation,
) -> Result<Vec<SoftSymbolInfo>> {
    compute_llrs_with(y_eq, effective_var, constellation, LlrMode::Exact)
}

pub fn compute_llrs_with(
    y_eq: &[Complex64],
    effective_var: &[f64],
    constellation: &Constellation,
    mode: LlrMode,
) -> Result<Vec<SoftSymbolInfo>> {
    if y_eq.len() != effective_var.len() {
        return Err(Error::shape(
            "compute_llrs",
            y_eq.len(),
            effective_var.len(),
        ));
    }
    let m = constellation.bits_per_symbol();
    let mut metrics = vec![0.0; constellation.order()];
    y_eq.iter()
        .zip(effective_var)
        .map(|(&y, &var)| {
            if !(var > 0.0) {
                return Err(Error::domain(format!(
                    "effective variance must be > 0, got {var}"
                )));
            }
            for (metric, p) in metrics.iter_mut().zip(constellation.points()) {
                *metric = -(y - p).norm_sqr() / var;
            }
            let llrs: Vec<f64> = (0..m)
                .map(|j| {
                    let zero = subset_score(&metrics, |l| constellation.label_bit(l, j) == 0, mode);
                    let one = subset_score(&metrics, |l| constellation.label_bit(l, j) == 1, mode);
                    zero - one
                })
                .collect();
            let symbol_reliability = llrs.iter().fold(f64::INFINITY, |acc, l| acc.min(l.abs()));
            Ok(SoftSymbolInfo {
                llrs,
                symbol_reliability,
            })
        })
        .collect()
}

fn subset_score(metrics: &[f64], member: impl Fn(usize) -> bool, mode: LlrMode) -> f64 {
    let max = metrics
        .iter()
        .enumerate()
        .filter(|(l, _)| member(*l))
        .fold(f64::NEG_INFINITY, |acc, (_, &v)| acc.max(v));
    match mode {
        LlrMode::MaxLog => max,
        LlrMode::Exact => {
            let sum: f64 = metrics
                .iter()
                .enumerate()
                .filter(|(l, _)| member(*l))
                .map(|(_, &v)| (v - max).exp())
                .sum();
            max + sum.ln()
        }
    }
}

pub fn flatten_llrs(info: &[SoftSymbolInfo]) -> Vec<f64> {
    info.iter().flat_map(|s| s.llrs.iter().copied()).collect()
}

/// Label bits of the nearest constellation point, per symbol.
pub fn hard_decision(y_eq: &[Complex64], constellation: &Constellation) -> Vec<u8> {
    let m = constellation.bits_per_symbol();
    let mut out = Vec::with_capacity(y_eq.len() * m);
    for &y in y_eq {
        let label = constellation.nearest(y);
        out.extend((0..m).map(|j| constellation.label_bit(label, j)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all() -> Vec<Constellation> {
        vec![
            Constellation::bpsk(),
            Constellation::qam4(),
            Constellation::qam16(),
        ]
    }

    #[test]
    fn unit_mean_energy() {
        for c in all() {
            let e: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / c.order() as f64;
            assert!((e - 1.0).abs() < 1e-12, "order {}", c.order());
        }
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for c in all() {
            let pts = c.points();
            let dmin = (0..pts.len())
                .flat_map(|a| (0..pts.len()).filter(move |&b| b != a).map(move |b| (a, b)))
                .map(|(a, b)| (pts[a] - pts[b]).norm())
                .fold(f64::INFINITY, f64::min);
            for a in 0..pts.len() {
                for b in 0..pts.len() {
                    if a != b && (pts[a] - pts[b]).norm() < dmin + 1e-9 {
                        assert_eq!(
                            (a ^ b).count_ones(),
                            1,
                            "order {} labels {a} {b}",
                            c.order()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn modulate_examples() {
        let y = modulate(&[0, 1], &Constellation::bpsk()).unwrap();
        assert_eq!(y, vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let y = modulate(&[0, 0], &Constellation::qam4()).unwrap();
        assert!((y[0] - Complex64::new(s, s)).norm() < 1e-15);
        let c16 = Constellation::qam16();
        let bits: Vec<u8> = (0..16).flat_map(|l| c16.label_bits(l)).collect();
        let pts = modulate(&bits, &c16).unwrap();
        for i in 0..16 {
            for j in 0..i {
                assert!((pts[i] - pts[j]).norm() > 0.1);
            }
        }
        assert!(modulate(&[0, 1, 0], &Constellation::qam4()).is_err());
    }

    #[test]
    fn bpsk_llr_hand_value() {
        let out =
            compute_llrs(&[Complex64::new(0.5, 0.0)], &[1.0], &Constellation::bpsk()).unwrap();
        // (y+1)^2 - (y-1)^2 = 4y
        assert!((out[0].llrs[0] - 2.0).abs() < 1e-12);
        assert!((out[0].symbol_reliability - 2.0).abs() < 1e-12);
    }

    #[test]
    fn equidistant_point_has_zero_llr() {
        let out =
            compute_llrs(&[Complex64::new(0.0, 0.3)], &[0.7], &Constellation::bpsk()).unwrap();
        assert!(out[0].llrs[0].abs() < 1e-12);
        let out =
            compute_llrs(&[Complex64::new(0.0, 0.0)], &[0.7], &Constellation::qam16()).unwrap();
        assert!(out[0].llrs[0].abs() < 1e-12);
        assert!(out[0].llrs[2].abs() < 1e-12);
    }

    #[test]
    fn llr_signs_recover_labels() {
        for c in all() {
            for label in 0..c.order() {
                let bits = c.label_bits(label);
                let y = modulate(&bits, &c).unwrap();
                for var in [1.0, 0.1, 1e-3] {
                    let out = compute_llrs(&y, &[var], &c).unwrap();
                    for (l, b) in out[0].llrs.iter().zip(&bits) {
                        assert_eq!(*l > 0.0, *b == 0, "order {} label {label}", c.order());
                    }
                }
            }
        }
    }

    #[test]
    fn llr_magnitude_grows_as_variance_shrinks() {
        let c = Constellation::qam16();
        let y = modulate(&c.label_bits(6), &c).unwrap();
        let loose = compute_llrs(&y, &[0.5], &c).unwrap()[0].symbol_reliability;
        let tight = compute_llrs(&y, &[1e-4], &c).unwrap()[0].symbol_reliability;
        assert!(tight > 1e3 && tight > loose);
    }

    #[test]
    fn bpsk_exact_equals_max_log() {
        let c = Constellation::bpsk();
        for y in [-2.0, -0.3, 0.0, 0.7, 1.9] {
            let y = [Complex64::new(y, 0.4)];
            let a = compute_llrs_with(&y, &[0.8], &c, LlrMode::Exact).unwrap();
            let b = compute_llrs_with(&y, &[0.8], &c, LlrMode::MaxLog).unwrap();
            assert!((a[0].llrs[0] - b[0].llrs[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn nonpositive_variance_rejected() {
        let c = Constellation::bpsk();
        assert!(compute_llrs(&[Complex64::new(1.0, 0.0)], &[0.0], &c).is_err());
    }

    #[test]
    fn hard_decision_examples() {
        assert_eq!(
            hard_decision(&[Complex64::new(-0.1, 0.0)], &Constellation::bpsk()),
            vec![1]
        );
        // exact midpoint of labels 0 (+1) and 1 (-1)
        assert_eq!(
            hard_decision(&[Complex64::new(0.0, 0.0)], &Constellation::bpsk()),
            vec![0]
        );
        let c = Constellation::qam16();
        let mid = (c.points()[0] + c.points()[1]) * 0.5;
        assert_eq!(hard_decision(&[mid], &c), c.label_bits(0));
    }

    proptest! {
        #[test]
        fn hard_decision_inverts_modulate(raw in proptest::collection::vec(0u8..2, 0..64), pick in 0usize..3) {
            let c = all().swap_remove(pick);
            let m = c.bits_per_symbol();
            let bits = &raw[..raw.len() / m * m];
            let y = modulate(bits, &c).unwrap();
            prop_assert_eq!(hard_decision(&y, &c), bits.to_vec());
        }

        #[test]
        fn llrs_independent_of_subset_enumeration(re in -1.5f64..1.5, im in -1.5f64..1.5, var in 0.05f64..2.0) {
            // Reversing the point order (and relabelling accordingly) must not change the LLRs.
            let c = Constellation::qam16();
            let mut rev = c.clone();
            rev.points.reverse();
            let y = Complex64::new(re, im);
            let a = compute_llrs(&[y], &[var], &c).unwrap();
            let b = compute_llrs(&[y], &[var], &rev).unwrap();
            for j in 0..4 {
                // label l in `rev` is label 15 - l in `c`: every bit is complemented
                prop_assert!((a[0].llrs[j] + b[0].llrs[j]).abs() < 1e-9);
            }
        }
    }
}
