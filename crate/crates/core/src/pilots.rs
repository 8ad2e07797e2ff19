//! Pilot policies: what, after each received block, is fed back to the
//! channel estimator.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelLayout;
use crate::decoder::DecodeOutcome;
use crate::error::{Error, Result};
use crate::estimator::{estimate_for_layout, ChannelEstimateRecord, PilotSource};
use crate::modem::{hard_decision, modulate, Constellation, SoftSymbolInfo};
use crate::ComplexVec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyKind {
    /// Only the periodic training blocks refresh the estimate.
    DesignatedOnly,
    /// Re-modulated hard demodulator decisions, no decoding.
    Demodulator,
    /// Re-modulated decoder output, used unconditionally.
    Decoder,
    /// Decoder output, used only when the CRC passes.
    CrcGated,
    /// OFDM: refresh only subcarriers whose symbol reliability reaches `tau`.
    Threshold { tau: f64 },
    /// Probability-weighted average of the candidate symbols.
    WeightedIq,
    /// Candidate whose estimate moves least from the held one.
    MinDelta,
    /// Genie: the true transmitted block.
    Free,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::DesignatedOnly => f.write_str("designated_only"),
            PolicyKind::Demodulator => f.write_str("demodulator"),
            PolicyKind::Decoder => f.write_str("decoder"),
            PolicyKind::CrcGated => f.write_str("crc_gated"),
            PolicyKind::Threshold { tau } => write!(f, "threshold({tau})"),
            PolicyKind::WeightedIq => f.write_str("weighted_iq"),
            PolicyKind::MinDelta => f.write_str("min_delta"),
            PolicyKind::Free => f.write_str("free"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotPolicy {
    #[serde(flatten)]
    pub kind: PolicyKind,
    /// Training period `T_I` in blocks.
    pub training_interval: u64,
    /// Gate on actual decoding success instead of the CRC. Test-only.
    #[doc(hidden)]
    #[serde(skip)]
    pub genie_crc: bool,
}

impl PilotPolicy {
    pub fn new(kind: PolicyKind, training_interval: u64) -> Result<Self> {
        let p = Self {
            kind,
            training_interval,
            genie_crc: false,
        };
        p.validate()?;
        Ok(p)
    }

    #[doc(hidden)]
    pub fn with_genie_crc(mut self) -> Self {
        self.genie_crc = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.training_interval < 2 {
            return Err(Error::domain(format!(
                "training interval must be >= 2, got {}",
                self.training_interval
            )));
        }
        if let PolicyKind::Threshold { tau } = self.kind {
            if !(tau >= 0.0) {
                return Err(Error::domain(format!(
                    "threshold tau must be >= 0, got {tau}"
                )));
            }
        }
        Ok(())
    }

    /// Name used in result files.
    pub fn label(&self) -> String {
        if self.genie_crc {
            format!("{}+genie", self.kind)
        } else {
            self.kind.to_string()
        }
    }
}

/// True iff `block_index` carries the designated training sequence.
pub fn schedule_is_training(block_index: u64, training_interval: u64) -> bool {
    block_index % training_interval == 0
}

/// Everything a policy may look at after one block has been received.
#[derive(Debug, Clone, Copy)]
pub struct BlockContext<'a> {
    pub block_index: u64,
    pub y: &'a [Complex64],
    pub y_eq: &'a [Complex64],
    pub soft: &'a [SoftSymbolInfo],
    pub decoded: &'a DecodeOutcome,
    pub constellation: &'a Constellation,
    pub layout: ChannelLayout,
    pub num_taps: usize,
    pub previous: &'a ChannelEstimateRecord,
    /// Known symbols on a training block.
    pub training: Option<&'a [Complex64]>,
    /// Genie: the transmitted symbols of this block (`free` only).
    pub true_block: Option<&'a [Complex64]>,
    /// Genie: whether the decoder returned the transmitted codeword.
    pub decoded_correctly: Option<bool>,
}

/// New estimate to hold from the next block on, or `None` to keep the
/// current one. Degenerate pilots that make LS fail count as no-update.
pub fn policy_update(
    policy: &PilotPolicy,
    ctx: &BlockContext<'_>,
) -> Result<Option<ChannelEstimateRecord>> {
    let record = |estimate: ComplexVec, kind: PilotSource| ChannelEstimateRecord {
        estimate,
        source_block: ctx.block_index,
        source_kind: kind,
    };
    let ls = |pilot: &[Complex64]| -> Result<Option<ComplexVec>> {
        match estimate_for_layout(pilot, ctx.y, ctx.layout, ctx.num_taps) {
            Ok(e) => Ok(Some(e)),
            Err(Error::Estimation(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let remodulate = |bits: &[u8]| modulate(bits, ctx.constellation);

    if let Some(pilot) = ctx.training {
        return Ok(ls(pilot)?.map(|e| record(e, PilotSource::Designated)));
    }

    match policy.kind {
        PolicyKind::DesignatedOnly => Ok(None),
        PolicyKind::Demodulator => {
            let x = remodulate(&hard_decision(ctx.y_eq, ctx.constellation))?;
            Ok(ls(&x)?.map(|e| record(e, PilotSource::Demodulator)))
        }
        PolicyKind::Decoder => {
            let x = remodulate(&ctx.decoded.codeword)?;
            Ok(ls(&x)?.map(|e| record(e, PilotSource::Decoder)))
        }
        PolicyKind::CrcGated => {
            let open = if policy.genie_crc {
                ctx.decoded_correctly
            } else {
                ctx.decoded.crc_pass
            };
            match open {
                Some(true) => {
                    let x = remodulate(&ctx.decoded.codeword)?;
                    Ok(ls(&x)?.map(|e| record(e, PilotSource::CrcGated)))
                }
                Some(false) => Ok(None),
                None => Err(Error::config("crc_gated policy needs a CRC")),
            }
        }
        PolicyKind::Threshold { tau } => {
            if ctx.layout != ChannelLayout::Subcarriers {
                return Err(Error::config("threshold policy is only defined for OFDM"));
            }
            let x = remodulate(&ctx.decoded.codeword)?;
            let mut estimate = ctx.previous.estimate.clone();
            let mut updated = 0usize;
            for (s, (info, (&xs, &ys))) in ctx.soft.iter().zip(x.iter().zip(ctx.y)).enumerate() {
                if info.symbol_reliability >= tau && xs.norm_sqr() > 0.0 {
                    estimate[s] = ys / xs;
                    updated += 1;
                }
            }
            Ok((updated > 0).then(|| record(estimate, PilotSource::ThresholdedPartial)))
        }
        PolicyKind::WeightedIq => {
            let cands = &ctx.decoded.candidates;
            let total: f64 = cands.iter().map(|c| c.probability).sum();
            let mut pilot = vec![Complex64::new(0.0, 0.0); ctx.y.len()];
            for c in cands {
                let x = remodulate(&c.codeword)?;
                for (p, xi) in pilot.iter_mut().zip(x) {
                    *p += xi * (c.probability / total);
                }
            }
            let estimate = match ctx.layout {
                ChannelLayout::Taps => ls(&pilot)?,
                // subcarriers whose averaged symbol vanished keep their estimate
                ChannelLayout::Subcarriers => Some(
                    pilot
                        .iter()
                        .zip(ctx.y)
                        .zip(&ctx.previous.estimate)
                        .map(|((&p, &y), &prev)| if p.norm_sqr() > 1e-24 { y / p } else { prev })
                        .collect(),
                ),
            };
            Ok(estimate.map(|e| record(e, PilotSource::WeightedIq)))
        }
        PolicyKind::MinDelta => {
            let mut best: Option<(f64, ComplexVec)> = None;
            for c in &ctx.decoded.candidates {
                let x = remodulate(&c.codeword)?;
                if let Some(e) = ls(&x)? {
                    let dist: f64 = e
                        .iter()
                        .zip(&ctx.previous.estimate)
                        .map(|(a, b)| (a - b).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                        best = Some((dist, e));
                    }
                }
            }
            Ok(best.map(|(_, e)| record(e, PilotSource::MinDelta)))
        }
        PolicyKind::Free => {
            let x = ctx
                .true_block
                .ok_or_else(|| Error::config("free policy needs the transmitted block"))?;
            Ok(ls(x)?.map(|e| record(e, PilotSource::Free)))
        }
    }
}
