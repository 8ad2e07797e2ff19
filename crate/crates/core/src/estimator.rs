//! Pilot-based least-squares channel estimation and MMSE equalization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelLayout, ChannelState};
use crate::error::{Error, Result};
use crate::ComplexVec;

/// Minimum block length, as a multiple of the tap count, for multi-tap LS.
pub const MIN_SYMBOLS_PER_TAP: usize = 4;

/// Where the pilot sequence behind an estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PilotSource {
    Designated,
    Demodulator,
    Decoder,
    CrcGated,
    /// OFDM update where only some subcarriers were refreshed.
    ThresholdedPartial,
    WeightedIq,
    MinDelta,
    Free,
}

/// The estimate currently held by the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimateRecord {
    pub estimate: ComplexVec,
    /// Index of the block whose pilot produced the estimate.
    pub source_block: u64,
    pub source_kind: PilotSource,
}

/// Time-domain LS estimate of `num_taps` taps from a known pilot block.
///
/// One tap uses `sum(conj(x) y) / sum(|x|^2)`. More taps solve the normal
/// equations of the convolution model over the rows not touched by the
/// previous block.
pub fn estimate_ls(x_pilot: &[Complex64], y: &[Complex64], num_taps: usize) -> Result<ComplexVec> {
    if y.len() != x_pilot.len() {
        return Err(Error::shape("estimate_ls", x_pilot.len(), y.len()));
    }
    if num_taps == 0 {
        return Err(Error::domain("num_taps must be at least 1"));
    }
    if num_taps == 1 {
        let energy: f64 = x_pilot.iter().map(|x| x.norm_sqr()).sum();
        if !(energy > 0.0) {
            return Err(Error::Estimation("pilot block has zero energy".into()));
        }
        let corr: Complex64 = x_pilot.iter().zip(y).map(|(x, y)| x.conj() * y).sum();
        return Ok(vec![corr / energy]);
    }
    let n = x_pilot.len();
    if n < MIN_SYMBOLS_PER_TAP * num_taps {
        return Err(Error::domain(format!(
            "multi-tap LS needs at least {} symbols for {num_taps} taps, got {n}",
            MIN_SYMBOLS_PER_TAP * num_taps
        )));
    }
    let rows = n - num_taps + 1;
    let x_conv = DMatrix::from_fn(rows, num_taps, |r, l| x_pilot[r + num_taps - 1 - l]);
    let obs = DVector::from_iterator(rows, y[num_taps - 1..].iter().copied());
    let xh = x_conv.adjoint();
    let gram = &xh * &x_conv;
    let rhs = &xh * obs;
    let sol = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Estimation("singular normal equations".into()))?;
    if sol.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Estimation("singular normal equations".into()));
    }
    Ok(sol.iter().copied().collect())
}

/// Per-subcarrier LS estimate `y_s / x_s`.
pub fn estimate_ls_ofdm(x_pilot: &[Complex64], y: &[Complex64]) -> Result<ComplexVec> {
    if y.len() != x_pilot.len() {
        return Err(Error::shape("estimate_ls_ofdm", x_pilot.len(), y.len()));
    }
    x_pilot
        .iter()
        .zip(y)
        .map(|(x, y)| {
            if x.norm_sqr() > 0.0 {
                Ok(y / x)
            } else {
                Err(Error::Estimation("zero pilot on a subcarrier".into()))
            }
        })
        .collect()
}

/// LS estimate in the representation used by `layout`.
pub fn estimate_for_layout(
    x_pilot: &[Complex64],
    y: &[Complex64],
    layout: ChannelLayout,
    num_taps: usize,
) -> Result<ComplexVec> {
    match layout {
        ChannelLayout::Taps => estimate_ls(x_pilot, y, num_taps),
        ChannelLayout::Subcarriers => estimate_ls_ofdm(x_pilot, y),
    }
}

/// MMSE equalizer output and the per-sample variance handed to the demapper.
#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    pub y_eq: ComplexVec,
    pub effective_var: Vec<f64>,
}

fn scalar_mmse(y: Complex64, f: Complex64, noise_var: f64) -> (Complex64, f64) {
    let den = f.norm_sqr() + noise_var;
    if den > 0.0 && f.norm_sqr() > 0.0 {
        (f.conj() * y / den, noise_var / den)
    } else {
        (Complex64::new(0.0, 0.0), 1.0)
    }
}

/// Equalizes one block with the held estimate.
///
/// Single-tap and per-subcarrier estimates use the scalar MMSE filter. A
/// multi-tap estimate uses the block filter `(H^H H + s I)^-1 H^H y` where
/// `H` is the truncated convolution matrix of the taps; the variance of each
/// output is `s` times the matching diagonal entry of the inverse.
pub fn mmse_equalize(
    y: &[Complex64],
    estimate: &[Complex64],
    layout: ChannelLayout,
    noise_var: f64,
) -> Result<Equalized> {
    if !(noise_var >= 0.0) {
        return Err(Error::domain(format!(
            "noise variance must be >= 0, got {noise_var}"
        )));
    }
    let pairs: Vec<(Complex64, f64)> = match layout {
        ChannelLayout::Subcarriers => {
            if estimate.len() != y.len() {
                return Err(Error::shape(
                    "mmse_equalize (OFDM)",
                    y.len(),
                    estimate.len(),
                ));
            }
            y.iter()
                .zip(estimate)
                .map(|(&y, &f)| scalar_mmse(y, f, noise_var))
                .collect()
        }
        ChannelLayout::Taps if estimate.len() == 1 => y
            .iter()
            .map(|&y| scalar_mmse(y, estimate[0], noise_var))
            .collect(),
        ChannelLayout::Taps => return banded_mmse(y, estimate, noise_var),
    };
    let (y_eq, effective_var) = pairs.into_iter().unzip();
    Ok(Equalized {
        y_eq,
        effective_var,
    })
}

/// Entry `H[r][c]` of the truncated convolution matrix.
fn conv_entry(taps: &[Complex64], r: usize, c: usize) -> Complex64 {
    if r >= c && r - c < taps.len() {
        taps[r - c]
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Block MMSE via a banded LDL^H factorisation of `H^H H + s I`.
fn banded_mmse(y: &[Complex64], taps: &[Complex64], noise_var: f64) -> Result<Equalized> {
    let n = y.len();
    let p = taps.len() - 1;
    if n == 0 {
        return Ok(Equalized {
            y_eq: Vec::new(),
            effective_var: Vec::new(),
        });
    }
    let zero = Complex64::new(0.0, 0.0);
    // a(i, d) = A[i + d][i] for d = 0..=p
    let a_entry = |i: usize, d: usize| -> Complex64 {
        let j = i + d;
        let mut s = zero;
        for r in j..(j + p + 1).min(n) {
            s += conv_entry(taps, r, j).conj() * conv_entry(taps, r, i);
        }
        if d == 0 {
            s += noise_var;
        }
        s
    };
    // l[i][d] = L[i][i - d] for d = 1..=p
    let mut l = vec![vec![zero; p + 1]; n];
    let mut dvec = vec![0.0f64; n];
    for j in 0..n {
        let mut dj = a_entry(j, 0).re;
        for k in j.saturating_sub(p)..j {
            dj -= l[j][j - k].norm_sqr() * dvec[k];
        }
        if !(dj > 0.0) {
            // all-zero estimate with no noise: declare every sample pure noise
            return Ok(Equalized {
                y_eq: vec![zero; n],
                effective_var: vec![1.0; n],
            });
        }
        dvec[j] = dj;
        for i in j + 1..(j + p + 1).min(n) {
            let mut v = a_entry(j, i - j);
            for k in i.saturating_sub(p)..j {
                v -= l[i][i - k] * l[j][j - k].conj() * dvec[k];
            }
            l[i][i - j] = v / dj;
        }
    }

    // b = H^H y, then forward, diagonal and backward substitution
    let mut z: Vec<Complex64> = (0..n)
        .map(|i| {
            (0..=p)
                .filter(|&t| i + t < n)
                .map(|t| taps[t].conj() * y[i + t])
                .sum()
        })
        .collect();
    for i in 0..n {
        for d in 1..=p.min(i) {
            let prev = z[i - d];
            z[i] -= l[i][d] * prev;
        }
    }
    for i in 0..n {
        z[i] /= dvec[i];
    }
    for i in (0..n).rev() {
        for d in 1..=p {
            if i + d < n {
                let next = z[i + d];
                z[i] -= l[i + d][d].conj() * next;
            }
        }
    }

    // diagonal band of the inverse: zb[i][d] = Z[i][i + d]
    let mut zb = vec![vec![zero; p + 1]; n];
    let z_at = |zb: &Vec<Vec<Complex64>>, r: usize, c: usize| -> Complex64 {
        if c >= r {
            zb[r][c - r]
        } else {
            zb[c][r - c].conj()
        }
    };
    for i in (0..n).rev() {
        for d in (0..=p).rev() {
            let j = i + d;
            if j >= n {
                continue;
            }
            let mut v = if d == 0 {
                Complex64::new(1.0 / dvec[i], 0.0)
            } else {
                zero
            };
            for k in i + 1..(i + p + 1).min(n) {
                v -= l[k][k - i].conj() * z_at(&zb, k, j);
            }
            zb[i][d] = v;
        }
    }
    let effective_var = (0..n).map(|i| noise_var * zb[i][0].re).collect();
    Ok(Equalized {
        y_eq: z,
        effective_var,
    })
}

/// Mean squared estimation error `|F - F_bar|^2` over blocks, averaged over
/// taps. Returns 0 for fewer than two samples.
pub fn estimation_error_stats(
    estimates: &[ChannelEstimateRecord],
    truth: &[ChannelState],
) -> Result<f64> {
    if estimates.len() != truth.len() {
        return Err(Error::shape(
            "estimation_error_stats",
            truth.len(),
            estimates.len(),
        ));
    }
    if estimates.len() < 2 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (est, state) in estimates.iter().zip(truth) {
        if est.estimate.len() != state.taps.len() {
            return Err(Error::shape(
                "estimation_error_stats (taps)",
                state.taps.len(),
                est.estimate.len(),
            ));
        }
        total += squared_error(&est.estimate, &state.taps);
    }
    Ok(total / estimates.len() as f64)
}

/// `|F - F_bar|^2` averaged over taps for a single block.
pub fn squared_error(estimate: &[Complex64], truth: &[Complex64]) -> f64 {
    let sum: f64 = estimate
        .iter()
        .zip(truth)
        .map(|(e, t)| (t - e).norm_sqr())
        .sum();
    sum / truth.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, init_channel, FadingProcessParams};
    use crate::modem::{modulate, Constellation};
    use crate::rng::RandomStream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_qpsk(n: usize, rng: &mut RandomStream) -> ComplexVec {
        modulate(&rng.bits(2 * n), &Constellation::qam4()).unwrap()
    }

    #[test]
    fn ls_noiseless_single_tap() {
        let mut rng = RandomStream::new(1);
        let x = random_qpsk(64, &mut rng);
        let g = c(0.3, -1.2);
        let y: ComplexVec = x.iter().map(|x| x * g).collect();
        let est = estimate_ls(&x, &y, 1).unwrap();
        assert!((est[0] - g).norm() < 1e-12);
    }

    #[test]
    fn ls_noiseless_dicode() {
        let mut rng = RandomStream::new(2);
        let params = FadingProcessParams::dicode(100.0, 0.25);
        let mut state =
            ChannelState::from_taps(vec![c(1.0, 0.0), c(0.25, 0.0)], ChannelLayout::Taps);
        let _ = init_channel(&params, &mut rng).unwrap();
        // leave ISI from a previous block in the history
        let prev = random_qpsk(64, &mut rng);
        apply_channel(&prev, &mut state, 0.0, &mut rng).unwrap();
        let x = random_qpsk(64, &mut rng);
        let y = apply_channel(&x, &mut state, 0.0, &mut rng).unwrap();
        let est = estimate_ls(&x, &y, 2).unwrap();
        assert!((est[0] - c(1.0, 0.0)).norm() < 1e-9);
        assert!((est[1] - c(0.25, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn ls_degenerate_inputs() {
        let zeros = vec![c(0.0, 0.0); 16];
        assert!(matches!(
            estimate_ls(&zeros, &zeros, 1),
            Err(Error::Estimation(_))
        ));
        assert!(matches!(
            estimate_ls(&zeros, &zeros, 2),
            Err(Error::Estimation(_))
        ));
        assert!(estimate_ls(&zeros[..4], &zeros[..4], 2).is_err());
        assert!(estimate_ls(&zeros, &zeros[..3], 1).is_err());
        assert!(estimate_ls_ofdm(&zeros, &zeros).is_err());
    }

    #[test]
    fn ofdm_ls_divides() {
        let x = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        let y = vec![c(0.5, 0.5), c(2.0, 0.0)];
        let est = estimate_ls_ofdm(&x, &y).unwrap();
        assert_eq!(est, vec![c(0.5, 0.5), c(-2.0, 0.0)]);
    }

    #[test]
    fn mmse_hand_values() {
        let out = mmse_equalize(&[c(4.0, 0.0)], &[c(2.0, 0.0)], ChannelLayout::Taps, 1.0).unwrap();
        assert!((out.y_eq[0] - c(1.6, 0.0)).norm() < 1e-12);
        assert!((out.effective_var[0] - 0.2).abs() < 1e-12);
        let zf = mmse_equalize(&[c(3.0, 1.0)], &[c(0.0, 2.0)], ChannelLayout::Taps, 0.0).unwrap();
        assert!((zf.y_eq[0] - c(3.0, 1.0) / c(0.0, 2.0)).norm() < 1e-12);
        let dead = mmse_equalize(&[c(3.0, 1.0)], &[c(0.0, 0.0)], ChannelLayout::Taps, 0.5).unwrap();
        assert_eq!(dead.y_eq[0], c(0.0, 0.0));
        assert_eq!(dead.effective_var[0], 1.0);
    }

    #[test]
    fn mmse_shrinks_and_variance_monotone() {
        let y = c(0.7, -0.4);
        let mut last = f64::INFINITY;
        for k in 1..50 {
            let f = c(0.1 * k as f64, 0.05 * k as f64);
            let out = mmse_equalize(&[y], &[f], ChannelLayout::Taps, 0.3).unwrap();
            assert!(out.y_eq[0].norm() <= y.norm() / f.norm() + 1e-15);
            let v = out.effective_var[0];
            assert!(v > 0.0 && v <= 1.0 && v < last);
            last = v;
        }
    }

    fn dense_mmse(y: &[Complex64], taps: &[Complex64], s: f64) -> (Vec<Complex64>, Vec<f64>) {
        let n = y.len();
        let h = DMatrix::from_fn(n, n, |r, c| conv_entry(taps, r, c));
        let a = h.adjoint() * &h + DMatrix::<Complex64>::identity(n, n) * c(s, 0.0);
        let inv = a.try_inverse().unwrap();
        let yv = DVector::from_column_slice(y);
        let x = &inv * h.adjoint() * yv;
        (
            x.iter().copied().collect(),
            (0..n).map(|i| s * inv[(i, i)].re).collect(),
        )
    }

    #[test]
    fn banded_mmse_matches_dense_inverse() {
        let mut rng = RandomStream::new(3);
        for taps_len in 2..=4 {
            for _ in 0..5 {
                let taps: ComplexVec = (0..taps_len).map(|_| rng.complex_gaussian(1.0)).collect();
                let y: ComplexVec = (0..24).map(|_| rng.complex_gaussian(1.0)).collect();
                let s = 0.05 + rng.uniform();
                let fast = mmse_equalize(&y, &taps, ChannelLayout::Taps, s).unwrap();
                let (x, v) = dense_mmse(&y, &taps, s);
                for i in 0..y.len() {
                    assert!((fast.y_eq[i] - x[i]).norm() < 1e-9);
                    assert!((fast.effective_var[i] - v[i]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn error_stats_cases() {
        let truth = vec![
            ChannelState::from_taps(vec![c(1.0, 0.0)], ChannelLayout::Taps),
            ChannelState::from_taps(vec![c(0.0, 1.0)], ChannelLayout::Taps),
        ];
        let exact: Vec<ChannelEstimateRecord> = truth
            .iter()
            .map(|s| ChannelEstimateRecord {
                estimate: s.taps.clone(),
                source_block: 0,
                source_kind: PilotSource::Designated,
            })
            .collect();
        assert_eq!(estimation_error_stats(&exact, &truth).unwrap(), 0.0);
        assert_eq!(
            estimation_error_stats(&exact[..1], &truth[..1]).unwrap(),
            0.0
        );
        assert!(estimation_error_stats(&exact[..1], &truth).is_err());
        let frozen = vec![exact[0].clone(), exact[0].clone()];
        assert!((estimation_error_stats(&frozen, &truth).unwrap() - 1.0).abs() < 1e-12);
    }
}
