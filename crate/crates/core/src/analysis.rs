//! Closed-form rate, capacity and covariance expressions for channels whose
//! estimate ages between pilots.
//!
//! Differential entropies are in nats internally; capacities, `H(X)` and the
//! `H(X|Y)` arguments of the rate checks are in bits.

use std::f64::consts::{E, LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs of the scalar (diagonal covariance) entropy bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Source entropy `H(X)` in bits per symbol.
    pub source_entropy_hx: f64,
    pub sigma_x_sq: f64,
    pub sigma_n_sq: f64,
    pub sigma_f_sq: f64,
    /// Residual estimation error right after a fresh estimate.
    pub sigma_e_sq: f64,
    /// Channel power gain `|F_bar|^2` used in the bound.
    pub fbar_gain: f64,
    /// Sequence length `k`.
    pub seq_len: usize,
}

impl BoundInputs {
    /// Binary source, unit source and channel power, at `snr_db`, with the
    /// State-1 error of an LS estimate over `pilot_symbols` unit-energy symbols.
    pub fn binary_rayleigh(snr_db: f64, pilot_symbols: usize) -> Self {
        let sigma_n_sq = 10f64.powf(-snr_db / 10.0);
        Self {
            source_entropy_hx: 1.0,
            sigma_x_sq: 1.0,
            sigma_n_sq,
            sigma_f_sq: 1.0,
            sigma_e_sq: sigma_n_sq / pilot_symbols.max(1) as f64,
            fbar_gain: 1.0,
            seq_len: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let vars = [
            ("sigma_x_sq", self.sigma_x_sq),
            ("sigma_n_sq", self.sigma_n_sq),
            ("sigma_f_sq", self.sigma_f_sq),
            ("sigma_e_sq", self.sigma_e_sq),
            ("fbar_gain", self.fbar_gain),
        ];
        for (name, v) in vars {
            if !(v >= 0.0) {
                return Err(Error::domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.source_entropy_hx > 0.0) {
            return Err(Error::domain("source entropy must be positive"));
        }
        if self.seq_len == 0 {
            return Err(Error::domain("sequence length must be positive"));
        }
        Ok(())
    }
}

/// Estimation-error variance in state 1 (fresh), 2 (partially correlated)
/// or 3 (uncorrelated).
pub fn error_state_variance(
    state: u8,
    sigma_e_sq: f64,
    sigma_f_sq: f64,
    cov_f_fbar: f64,
) -> Result<f64> {
    match state {
        1 => Ok(sigma_e_sq),
        2 => {
            if !(0.0..=sigma_f_sq).contains(&cov_f_fbar) {
                return Err(Error::domain(format!(
                    "covariance {cov_f_fbar} outside [0, {sigma_f_sq}]"
                )));
            }
            Ok(2.0 * sigma_f_sq - 2.0 * cov_f_fbar)
        }
        3 => Ok(2.0 * sigma_f_sq),
        s => Err(Error::domain(format!(
            "error state must be 1, 2 or 3, got {s}"
        ))),
    }
}

/// Covariance between a stationary AR(1) gain and its value `lag` steps earlier.
pub fn gauss_markov_cov(beta: f64, sigma_f_sq: f64, lag: u64) -> f64 {
    beta.powf(lag as f64) * sigma_f_sq
}

/// Upper bound on `H(X|Y)` in nats for `k` independent dimensions.
pub fn hxy_upper_bound(inputs: &BoundInputs, sigma_ftilde_sq: f64) -> Result<f64> {
    inputs.validate()?;
    if !(sigma_ftilde_sq >= 0.0) {
        return Err(Error::domain("estimation-error variance must be >= 0"));
    }
    let k = inputs.seq_len as f64;
    let arg = 1.0 / inputs.sigma_x_sq
        + inputs.fbar_gain / (sigma_ftilde_sq * inputs.sigma_x_sq + inputs.sigma_n_sq);
    if !(arg > 0.0) || !arg.is_finite() {
        return Err(Error::domain(format!(
            "non-positive or infinite determinant argument {arg}"
        )));
    }
    Ok(k * (2.0 * PI * E).ln() - 0.5 * k * arg.ln())
}

fn state_variance(inputs: &BoundInputs, state: u8, cov_f_fbar: f64) -> Result<f64> {
    error_state_variance(state, inputs.sigma_e_sq, inputs.sigma_f_sq, cov_f_fbar)
}

/// `H(X) - max(0, H(X|Y))` in bits, floored at zero, for the representative
/// gain `inputs.fbar_gain`.
pub fn capacity_bound(inputs: &BoundInputs, state: u8, cov_f_fbar: f64) -> Result<f64> {
    let var = state_variance(inputs, state, cov_f_fbar)?;
    let hxy_bits = hxy_upper_bound(inputs, var)? / LN_2;
    Ok((inputs.source_entropy_hx - hxy_bits.max(0.0)).max(0.0))
}

/// [`capacity_bound`] averaged over a Rayleigh channel, i.e. over
/// `|F_bar|^2 ~ Exp(sigma_f_sq)`.
///
/// The capacity is zero below a gain `g1`, rises between `g1` and `g2`, and is
/// `H(X)` above `g2`. The middle part is integrated with Simpson's rule
/// relative to `exp(-g1 / sigma_f_sq)` so that deep tails stay representable.
pub fn fading_capacity_bound(inputs: &BoundInputs, state: u8, cov_f_fbar: f64) -> Result<f64> {
    inputs.validate()?;
    let var = state_variance(inputs, state, cov_f_fbar)?;
    if !(inputs.sigma_f_sq > 0.0) {
        return Err(Error::domain("Rayleigh average needs sigma_f_sq > 0"));
    }
    let k = inputs.seq_len as f64;
    let a = 1.0 / inputs.sigma_x_sq;
    let b = 1.0 / (var * inputs.sigma_x_sq + inputs.sigma_n_sq);
    if !(b > 0.0) || !b.is_finite() || !a.is_finite() {
        return Err(Error::domain("degenerate variances in the capacity bound"));
    }
    let log_2pie = (2.0 * PI * E).ln();
    // gain at which H(X|Y) (nats) equals `h`
    let gain_for = |h: f64| ((2.0 * (k * log_2pie - h) / k).exp() - a).max(0.0) / b;
    let g1 = gain_for(inputs.source_entropy_hx * LN_2);
    let g2 = gain_for(0.0);
    let mean = inputs.sigma_f_sq;
    let capacity_at = |g: f64| -> Result<f64> {
        let at = BoundInputs {
            fbar_gain: g,
            ..*inputs
        };
        capacity_bound(&at, state, cov_f_fbar)
    };

    let span = (g2 - g1).min(60.0 * mean);
    let mut middle = 0.0;
    if span > 0.0 {
        const INTERVALS: usize = 4000;
        let h = span / INTERVALS as f64;
        for i in 0..=INTERVALS {
            let t = i as f64 * h;
            let w = if i == 0 || i == INTERVALS {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            middle += w * capacity_at(g1 + t)? * (-t / mean).exp() / mean;
        }
        middle *= h / 3.0;
    }
    let tail = inputs.source_entropy_hx * (-(g2 - g1) / mean).exp();
    Ok((-g1 / mean).exp() * (middle + tail))
}

/// One row of the State-1 / State-3 capacity curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityPoint {
    pub snr_db: f64,
    pub capacity_state1: f64,
    pub capacity_state3: f64,
}

/// Rayleigh-averaged capacity bounds for a binary source with a fresh
/// (State 1) and a stale (State 3) estimate.
pub fn capacity_curves(snr_db: &[f64], pilot_symbols: usize) -> Result<Vec<CapacityPoint>> {
    snr_db
        .iter()
        .map(|&snr| {
            let inputs = BoundInputs::binary_rayleigh(snr, pilot_symbols);
            Ok(CapacityPoint {
                snr_db: snr,
                capacity_state1: fading_capacity_bound(&inputs, 1, 0.0)?,
                capacity_state3: fading_capacity_bound(&inputs, 3, 0.0)?,
            })
        })
        .collect()
}

/// Probability of correct decoding `(1 - 2^(n(R - H(X))))^(2^(n H(X|Y)))`,
/// evaluated in the log domain. Rates and entropies in bits.
pub fn prob_correct(n: usize, r_code: f64, hx: f64, hxy: f64) -> Result<f64> {
    if !(r_code > 0.0) || !(hx > 0.0) || !(hxy >= 0.0) {
        return Err(Error::domain(
            "prob_correct needs r_code > 0, hx > 0, hxy >= 0",
        ));
    }
    if r_code >= hx {
        return Ok(0.0);
    }
    let n = n as f64;
    let log_x = n * (r_code - hx) * LN_2;
    // ln P = 2^(n hxy) * ln(1 - x), and -ln(1 - x) ~ x for tiny x
    let log_neg_ln_base = if log_x < -30.0 {
        log_x
    } else {
        (-(-log_x.exp()).ln_1p()).ln()
    };
    let log_neg_ln_p = n * hxy * LN_2 + log_neg_ln_base;
    Ok((-log_neg_ln_p.exp()).exp().clamp(0.0, 1.0))
}

/// `(1 - BLER) (T_I - 1) / T_I * k / n`.
pub fn effective_rate(bler: f64, t_i_blocks: u64, k: usize, n: usize) -> f64 {
    let t = t_i_blocks as f64;
    (1.0 - bler) * ((t - 1.0) / t) * (k as f64 / n as f64)
}

/// Strict inequality `R_code (1 - 1/T_I) log2(M) < H(X) - H(X|Y)`.
pub fn rate_bound_check(r_code: f64, t_i_blocks: u64, mod_order: usize, hx: f64, hxy: f64) -> bool {
    let lhs = r_code * (1.0 - 1.0 / t_i_blocks as f64) * (mod_order as f64).log2();
    lhs < hx - hxy
}

/// `((1 - P_c) / n, 1 - P_c)`.
pub fn bit_error_bounds(p_c: f64, n: usize) -> (f64, f64) {
    let miss = 1.0 - p_c;
    (miss / n as f64, miss)
}

/// Covariance between the gain at block `i` and the estimate taken at
/// `i_m`, when fresh estimates arrive every `T_I` blocks, or, with gating,
/// every `min(T_I, ceil(1 / p_c))` blocks.
pub fn covariance_with_pilots(
    beta: f64,
    sigma_f_sq: f64,
    i: u64,
    i_m: u64,
    t_i: u64,
    p_c: f64,
    gated: bool,
) -> Result<f64> {
    if i < i_m {
        return Err(Error::domain("block index precedes the estimate"));
    }
    if t_i < 2 {
        return Err(Error::domain("training interval must be >= 2"));
    }
    if !(0.0..=1.0).contains(&p_c) {
        return Err(Error::domain(format!("p_c must lie in [0,1], got {p_c}")));
    }
    let period = if gated && p_c > 0.0 {
        t_i.min((1.0 / p_c).ceil() as u64)
    } else {
        t_i
    };
    Ok(gauss_markov_cov(beta, sigma_f_sq, (i - i_m) % period))
}
