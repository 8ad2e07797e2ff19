//! Auto-regressive Rayleigh block-fading channels.
//!
//! Each tap (or OFDM subcarrier) follows an independent first-order
//! Gauss-Markov recursion `g <- beta * g + z` whose stationary variance is
//! `sigma_f_sq * profile[tap]^2`. The channel is held constant over a block
//! and stepped between blocks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::ComplexVec;

/// Parameters of the fading process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingProcessParams {
    /// Stationary channel-gain variance.
    #[serde(default = "default_sigma_f_sq")]
    pub sigma_f_sq: f64,
    /// Correlation level at which the coherence time is defined.
    #[serde(default = "default_phi")]
    pub phi: f64,
    /// Decorrelation interval in symbols (OFDM symbols in OFDM mode).
    pub decorrelation_interval: f64,
    /// Per-tap amplitude weights; the first entry is 1.
    #[serde(default = "default_profile")]
    pub delay_profile: Vec<f64>,
}

fn default_sigma_f_sq() -> f64 {
    1.0
}
fn default_phi() -> f64 {
    0.5
}
fn default_profile() -> Vec<f64> {
    vec![1.0]
}

impl FadingProcessParams {
    /// Single-tap Rayleigh channel with unit power and `phi = 0.5`.
    pub fn flat(decorrelation_interval: f64) -> Self {
        Self {
            sigma_f_sq: 1.0,
            phi: 0.5,
            decorrelation_interval,
            delay_profile: vec![1.0],
        }
    }

    pub fn with_profile(mut self, profile: Vec<f64>) -> Self {
        self.delay_profile = profile;
        self
    }

    /// Two-tap `[1, rho]` channel.
    pub fn dicode(decorrelation_interval: f64, rho: f64) -> Self {
        Self::flat(decorrelation_interval).with_profile(vec![1.0, rho])
    }

    pub fn num_taps(&self) -> usize {
        self.delay_profile.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(Error::domain(format!(
                "phi must lie in (0,1), got {}",
                self.phi
            )));
        }
        if !(self.decorrelation_interval > 0.0) || !self.decorrelation_interval.is_finite() {
            return Err(Error::domain(format!(
                "decorrelation interval must be positive, got {}",
                self.decorrelation_interval
            )));
        }
        if !(self.sigma_f_sq > 0.0) || !self.sigma_f_sq.is_finite() {
            return Err(Error::domain(format!(
                "sigma_f_sq must be positive, got {}",
                self.sigma_f_sq
            )));
        }
        match self.delay_profile.first() {
            None => return Err(Error::domain("delay profile is empty")),
            Some(&w) if w != 1.0 => {
                return Err(Error::domain("delay profile must start with weight 1"))
            }
            _ => {}
        }
        if self
            .delay_profile
            .iter()
            .any(|w| !(*w >= 0.0) || !w.is_finite())
        {
            return Err(Error::domain("delay profile weights must be non-negative"));
        }
        Ok(())
    }

    /// Stationary variance of tap `tap`.
    pub fn tap_variance(&self, tap: usize) -> f64 {
        let w = self.delay_profile[tap];
        self.sigma_f_sq * w * w
    }
}

/// Per-symbol AR coefficient `phi^(1 / decorrelation_interval)`.
pub fn derive_beta(params: &FadingProcessParams) -> Result<f64> {
    params.validate()?;
    Ok(params.phi.powf(1.0 / params.decorrelation_interval))
}

/// AR coefficient for one channel step spanning `symbols_per_step` symbols.
pub fn step_beta(params: &FadingProcessParams, symbols_per_step: f64) -> Result<f64> {
    params.validate()?;
    if !(symbols_per_step > 0.0) {
        return Err(Error::domain("symbols per step must be positive"));
    }
    Ok(params
        .phi
        .powf(symbols_per_step / params.decorrelation_interval))
}

/// How the channel gains act on a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelLayout {
    /// Time-domain tapped delay line (a single tap is flat fading).
    Taps,
    /// One independent gain per OFDM subcarrier.
    Subcarriers,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub taps: ComplexVec,
    pub block_index: u64,
    pub layout: ChannelLayout,
    /// Tail of the previously transmitted block, most recent last; feeds
    /// inter-block ISI in multi-tap mode.
    history: ComplexVec,
}

impl ChannelState {
    /// State with explicit gains, e.g. for deterministic tests.
    pub fn from_taps(taps: ComplexVec, layout: ChannelLayout) -> Self {
        let memory = match layout {
            ChannelLayout::Taps => taps.len().saturating_sub(1),
            ChannelLayout::Subcarriers => 0,
        };
        Self {
            taps,
            block_index: 0,
            layout,
            history: vec![Complex64::new(0.0, 0.0); memory],
        }
    }

    fn variance(&self, params: &FadingProcessParams, idx: usize) -> f64 {
        match self.layout {
            ChannelLayout::Taps => params.tap_variance(idx),
            ChannelLayout::Subcarriers => params.tap_variance(0),
        }
    }
}

/// Draws a tapped-delay-line channel from the stationary distribution.
pub fn init_channel(params: &FadingProcessParams, rng: &mut RandomStream) -> Result<ChannelState> {
    params.validate()?;
    let taps = (0..params.num_taps())
        .map(|t| rng.complex_gaussian(params.tap_variance(t)))
        .collect();
    Ok(ChannelState::from_taps(taps, ChannelLayout::Taps))
}

/// Draws `num_subcarriers` independent stationary subcarrier gains.
pub fn init_subcarrier_channel(
    params: &FadingProcessParams,
    num_subcarriers: usize,
    rng: &mut RandomStream,
) -> Result<ChannelState> {
    params.validate()?;
    if params.num_taps() != 1 {
        return Err(Error::domain(
            "OFDM mode expects a single-weight delay profile",
        ));
    }
    if num_subcarriers == 0 {
        return Err(Error::domain("OFDM mode needs at least one subcarrier"));
    }
    let var = params.tap_variance(0);
    let taps = (0..num_subcarriers)
        .map(|_| rng.complex_gaussian(var))
        .collect();
    Ok(ChannelState::from_taps(taps, ChannelLayout::Subcarriers))
}

/// Advances every gain by one AR(1) step and bumps the block index.
pub fn step_channel(
    mut state: ChannelState,
    beta: f64,
    params: &FadingProcessParams,
    rng: &mut RandomStream,
) -> Result<ChannelState> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::domain(format!("beta must lie in [0,1], got {beta}")));
    }
    let innovation = 1.0 - beta * beta;
    for idx in 0..state.taps.len() {
        let var = innovation * state.variance(params, idx);
        let z = rng.complex_gaussian(var);
        state.taps[idx] = state.taps[idx] * beta + z;
    }
    state.block_index += 1;
    Ok(state)
}

/// Passes one block through the channel and adds white Gaussian noise of
/// total variance `noise_var` per sample.
///
/// In multi-tap mode the output has the block's length: the linear
/// convolution is truncated, and the previous block's tail contributes ISI to
/// the first samples.
pub fn apply_channel(
    x: &[Complex64],
    state: &mut ChannelState,
    noise_var: f64,
    rng: &mut RandomStream,
) -> Result<ComplexVec> {
    if !(noise_var >= 0.0) {
        return Err(Error::domain(format!(
            "noise variance must be >= 0, got {noise_var}"
        )));
    }
    let mut y = match state.layout {
        ChannelLayout::Subcarriers => {
            if x.len() != state.taps.len() {
                return Err(Error::shape(
                    "apply_channel (OFDM)",
                    state.taps.len(),
                    x.len(),
                ));
            }
            x.iter()
                .zip(&state.taps)
                .map(|(xi, g)| xi * g)
                .collect::<Vec<_>>()
        }
        ChannelLayout::Taps if state.taps.len() == 1 => {
            let g = state.taps[0];
            x.iter().map(|xi| xi * g).collect()
        }
        ChannelLayout::Taps => convolve_with_memory(x, state),
    };
    if noise_var > 0.0 {
        for yi in y.iter_mut() {
            *yi += rng.complex_gaussian(noise_var);
        }
    }
    Ok(y)
}

fn convolve_with_memory(x: &[Complex64], state: &mut ChannelState) -> ComplexVec {
    let memory = state.history.len();
    let sample = |idx: isize| -> Complex64 {
        if idx >= 0 {
            x[idx as usize]
        } else {
            // history is ordered oldest..newest, idx = -1 is the newest
            let h = memory as isize + idx;
            if h >= 0 {
                state.history[h as usize]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let y = (0..x.len())
        .map(|k| {
            state
                .taps
                .iter()
                .enumerate()
                .map(|(l, h)| h * sample(k as isize - l as isize))
                .sum()
        })
        .collect();
    if memory > 0 {
        let mut tail: Vec<Complex64> = state.history.clone();
        tail.extend_from_slice(x);
        state.history = tail[tail.len() - memory..].to_vec();
    }
    y
}

/// Noise variance per complex sample for unit-energy symbols at the given
/// Eb/N0, where Eb is the energy per information bit.
pub fn noise_var_from_ebn0(ebn0_db: f64, code_rate: f64, bits_per_symbol: usize) -> f64 {
    1.0 / (code_rate * bits_per_symbol as f64 * 10f64.powf(ebn0_db / 10.0))
}

pub fn ebn0_from_noise_var(noise_var: f64, code_rate: f64, bits_per_symbol: usize) -> f64 {
    10.0 * (1.0 / (noise_var * code_rate * bits_per_symbol as f64)).log10()
}
