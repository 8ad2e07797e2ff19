use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::effective_rate;
use crate::channel::{
    apply_channel, init_channel, init_subcarrier_channel, noise_var_from_ebn0, step_beta,
    step_channel, ChannelLayout, ChannelState,
};
use crate::decoder::{
    decode_product, grand_hard, grand_soft_list, hard_from_llrs, ComponentDecoder, DecodeOutcome,
    ProductInput,
};
use crate::error::{Error, Result};
use crate::estimator::{mmse_equalize, squared_error, ChannelEstimateRecord, PilotSource};
use crate::fec::{crc_append, encode, CodeSpec, CrcSpec};
use crate::modem::{compute_llrs_with, flatten_llrs, modulate, Constellation};
use crate::pilots::{policy_update, schedule_is_training, BlockContext, PilotPolicy};
use crate::rng::{RandomStream, StreamPurpose};
use crate::Complex64;

use super::config::{DecoderConfig, LinkConfig, Waveform};

/// One row of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub policy: String,
    pub ebn0_db: f64,
    pub ber: f64,
    pub bler: f64,
    pub effective_rate: f64,
    pub est_error_variance: f64,
    pub blocks_run: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub crc_accept_rate: Option<f64>,
}

/// Outcome of one measured data block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockTally {
    pub block_index: u64,
    pub bit_errors: u32,
    pub block_error: bool,
    /// Bit errors over the whole codeword (information and parity).
    pub codeword_bit_errors: u32,
    pub crc_pass: Option<bool>,
    /// The policy refreshed the estimate from this block.
    pub updated: bool,
    /// `|F - F_bar|^2` for the estimate used on this block.
    pub est_error: f64,
}

/// Everything measured at one (policy, Eb/N0) point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub record: MetricRecord,
    pub blocks: Vec<BlockTally>,
    /// Information bits per block (payload minus CRC).
    pub k_info: usize,
    pub n: usize,
    /// FNV-1a hash of every channel gain the point consumed.
    pub realization_checksum: u64,
    /// Estimate refreshes on data blocks.
    pub updates: u64,
}

impl PointReport {
    pub fn data_blocks(&self) -> usize {
        self.blocks.len()
    }
}

/// Static pieces of a link shared by every block of a point.
pub struct Link {
    pub code: CodeSpec,
    pub crc: Option<CrcSpec>,
    pub constellation: Constellation,
    pub layout: ChannelLayout,
    pub symbols: usize,
    pub k_info: usize,
}

impl Link {
    pub fn new(config: &LinkConfig) -> Result<Self> {
        config.validate()?;
        let code = config.code.build(config.seed)?;
        let crc = config.crc_spec()?;
        let constellation = Constellation::new(config.modulation)?;
        let symbols = code.n() / constellation.bits_per_symbol();
        let layout = match config.waveform {
            Waveform::SingleCarrier => ChannelLayout::Taps,
            Waveform::Ofdm { .. } => ChannelLayout::Subcarriers,
        };
        let k_info = code.k() - crc.map_or(0, |c| c.width as usize);
        Ok(Self {
            code,
            crc,
            constellation,
            layout,
            symbols,
            k_info,
        })
    }

    fn payload(&self, info: &[u8]) -> Vec<u8> {
        match &self.crc {
            Some(c) => crc_append(info, c),
            None => info.to_vec(),
        }
    }

    fn decode(&self, llrs: &[f64], cfg: &DecoderConfig) -> Result<DecodeOutcome> {
        let mut out = match (self.code.is_product(), cfg.soft) {
            (true, true) => decode_product(
                ProductInput::Soft(llrs),
                &self.code,
                ComponentDecoder::Soft {
                    max_queries: cfg.max_queries,
                },
                cfg.iterations,
            )?,
            (true, false) => decode_product(
                ProductInput::Hard(&hard_from_llrs(llrs)),
                &self.code,
                ComponentDecoder::Hard {
                    max_queries: cfg.max_queries,
                },
                cfg.iterations,
            )?,
            (false, true) => grand_soft_list(llrs, &self.code, cfg.list_size, cfg.max_queries)?,
            (false, false) => grand_hard(&hard_from_llrs(llrs), &self.code, cfg.max_queries)?,
        };
        if let Some(c) = &self.crc {
            out.check_crc(c)?;
        }
        Ok(out)
    }
}

fn fnv1a(hash: &mut u64, taps: &[Complex64]) {
    for t in taps {
        for word in [t.re.to_bits(), t.im.to_bits()] {
            for byte in word.to_le_bytes() {
                *hash ^= byte as u64;
                *hash = hash.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
}

/// Simulates one policy at one Eb/N0 and returns the summary row.
pub fn run_point(config: &LinkConfig, policy: &PilotPolicy, ebn0_db: f64) -> Result<MetricRecord> {
    Ok(run_point_detailed(config, policy, ebn0_db)?.record)
}

/// Simulates one policy at one Eb/N0, keeping per-block tallies.
///
/// The first `T_I` blocks warm the estimator up and are not counted; the
/// next `blocks_per_point` blocks are measured, and their data blocks feed
/// the error counters. Channel, noise and data streams depend only on
/// `(seed, ebn0_db)`, so every policy at a point sees the same realization.
pub fn run_point_detailed(
    config: &LinkConfig,
    policy: &PilotPolicy,
    ebn0_db: f64,
) -> Result<PointReport> {
    let link = Link::new(config)?;
    simulate(config, &link, policy, ebn0_db)
}

fn simulate(
    config: &LinkConfig,
    link: &Link,
    policy: &PilotPolicy,
    ebn0_db: f64,
) -> Result<PointReport> {
    policy.validate()?;
    let params = &config.channel;
    let n = link.code.n();
    let t_i = policy.training_interval;
    let noise_var = noise_var_from_ebn0(
        ebn0_db,
        link.code.rate(),
        link.constellation.bits_per_symbol(),
    );
    let symbols_per_step = match link.layout {
        ChannelLayout::Taps => link.symbols as f64,
        ChannelLayout::Subcarriers => 1.0,
    };
    let beta = step_beta(params, symbols_per_step)?;
    let num_taps = params.num_taps();

    let key = ebn0_db.to_bits();
    let mut channel_rng = RandomStream::for_trial(config.seed, key, StreamPurpose::Channel);
    let mut noise_rng = RandomStream::for_trial(config.seed, key, StreamPurpose::Noise);
    let mut data_rng = RandomStream::for_trial(config.seed, key, StreamPurpose::Data);
    // the training codeword is fixed for the whole run
    let mut pilot_rng = RandomStream::for_trial(config.seed, 0, StreamPurpose::Pilot);
    let pilot_info = pilot_rng.bits(link.k_info);
    let pilot_codeword = encode(&link.payload(&pilot_info), &link.code)?;
    let pilot_symbols = modulate(&pilot_codeword, &link.constellation)?;

    let mut state = match link.layout {
        ChannelLayout::Taps => init_channel(params, &mut channel_rng)?,
        ChannelLayout::Subcarriers => {
            init_subcarrier_channel(params, link.symbols, &mut channel_rng)?
        }
    };
    let est_len = match link.layout {
        ChannelLayout::Taps => num_taps,
        ChannelLayout::Subcarriers => link.symbols,
    };
    let mut held = ChannelEstimateRecord {
        estimate: vec![Complex64::new(0.0, 0.0); est_len],
        source_block: 0,
        source_kind: PilotSource::Designated,
    };

    let total_blocks = t_i + config.blocks_per_point;
    let mut checksum = 0xcbf2_9ce4_8422_2325u64;
    let mut tallies = Vec::new();
    let mut updates = 0u64;
    let mut crc_accepts = 0u64;

    for block in 0..total_blocks {
        if block > 0 {
            state = step_channel(state, beta, params, &mut channel_rng)?;
        }
        fnv1a(&mut checksum, &state.taps);
        let info = data_rng.bits(link.k_info);
        let training = schedule_is_training(block, t_i);
        let measured = block >= t_i;

        if training {
            let y = apply_channel(&pilot_symbols, &mut state, noise_var, &mut noise_rng)?;
            let empty = DecodeOutcome {
                codeword: Vec::new(),
                info_bits: Vec::new(),
                candidates: Vec::new(),
                crc_pass: None,
                abandoned: false,
                queries_used: 0,
            };
            let ctx = BlockContext {
                block_index: block,
                y: &y,
                y_eq: &y,
                soft: &[],
                decoded: &empty,
                constellation: &link.constellation,
                layout: link.layout,
                num_taps,
                previous: &held,
                training: Some(&pilot_symbols),
                true_block: Some(&pilot_symbols),
                decoded_correctly: None,
            };
            if let Some(rec) = policy_update(policy, &ctx)? {
                held = rec;
            }
            continue;
        }

        let payload = link.payload(&info);
        let codeword = encode(&payload, &link.code)?;
        let x = modulate(&codeword, &link.constellation)?;
        let y = apply_channel(&x, &mut state, noise_var, &mut noise_rng)?;
        let est_error = squared_error(&held.estimate, &state.taps);
        let eq = mmse_equalize(&y, &held.estimate, link.layout, noise_var)?;
        let soft = compute_llrs_with(
            &eq.y_eq,
            &eq.effective_var,
            &link.constellation,
            config.llr_mode,
        )?;
        let llrs = flatten_llrs(&soft);
        let decoded = link.decode(&llrs, &config.decoder)?;

        let ctx = BlockContext {
            block_index: block,
            y: &y,
            y_eq: &eq.y_eq,
            soft: &soft,
            decoded: &decoded,
            constellation: &link.constellation,
            layout: link.layout,
            num_taps,
            previous: &held,
            training: None,
            true_block: Some(&x),
            decoded_correctly: Some(decoded.codeword == codeword),
        };
        let update = policy_update(policy, &ctx)?;
        let updated = update.is_some();
        if let Some(rec) = update {
            held = rec;
        }

        if measured {
            let bit_errors = decoded.info_bits[..link.k_info]
                .iter()
                .zip(&info)
                .filter(|(a, b)| a != b)
                .count() as u32;
            let codeword_bit_errors = decoded
                .codeword
                .iter()
                .zip(&codeword)
                .filter(|(a, b)| a != b)
                .count() as u32;
            if decoded.crc_pass == Some(true) {
                crc_accepts += 1;
            }
            updates += u64::from(updated);
            tallies.push(BlockTally {
                block_index: block,
                bit_errors,
                block_error: decoded.info_bits != payload,
                codeword_bit_errors,
                crc_pass: decoded.crc_pass,
                updated,
                est_error,
            });
        }
    }

    let data_blocks = tallies.len() as u64;
    let bit_errors: u64 = tallies.iter().map(|t| t.bit_errors as u64).sum();
    let block_errors = tallies.iter().filter(|t| t.block_error).count() as u64;
    let denom = data_blocks.max(1) as f64;
    let ber = bit_errors as f64 / (denom * link.k_info as f64);
    let bler = block_errors as f64 / denom;
    let est_error_variance = tallies.iter().map(|t| t.est_error).sum::<f64>() / denom;
    let record = MetricRecord {
        policy: policy.label(),
        ebn0_db,
        ber,
        bler,
        effective_rate: effective_rate(bler, t_i, link.k_info, n),
        est_error_variance,
        blocks_run: config.blocks_per_point,
        bit_errors,
        block_errors,
        crc_accept_rate: link.crc.map(|_| crc_accepts as f64 / denom),
    };
    Ok(PointReport {
        record,
        blocks: tallies,
        k_info: link.k_info,
        n,
        realization_checksum: checksum,
        updates,
    })
}

/// Every (Eb/N0, policy) pair of the config, points outer, policies inner.
pub fn run_sweep_detailed(config: &LinkConfig, jobs: Option<usize>) -> Result<Vec<PointReport>> {
    config.validate()?;
    let link = Link::new(config)?;
    let work: Vec<(f64, PilotPolicy)> = config
        .ebn0_db
        .iter()
        .flat_map(|&e| config.policies.iter().map(move |p| (e, *p)))
        .collect();
    let run = || -> Result<Vec<PointReport>> {
        work.par_iter()
            .map(|(e, p)| simulate(config, &link, p, *e))
            .collect()
    };
    match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Records for every (Eb/N0, policy) pair, in deterministic order.
pub fn run_sweep(config: &LinkConfig) -> Result<Vec<MetricRecord>> {
    run_sweep_with_jobs(config, None)
}

pub fn run_sweep_with_jobs(config: &LinkConfig, jobs: Option<usize>) -> Result<Vec<MetricRecord>> {
    Ok(run_sweep_detailed(config, jobs)?
        .into_iter()
        .map(|r| r.record)
        .collect())
}

/// Mean and standard error of `a_i - b_i` over blocks present in both
/// reports (matched by block index).
pub fn paired_difference(
    a: &PointReport,
    b: &PointReport,
    metric: impl Fn(&BlockTally) -> f64,
) -> (f64, f64) {
    let mut diffs = Vec::new();
    let mut j = 0;
    for ta in &a.blocks {
        while j < b.blocks.len() && b.blocks[j].block_index < ta.block_index {
            j += 1;
        }
        if j < b.blocks.len() && b.blocks[j].block_index == ta.block_index {
            diffs.push(metric(ta) - metric(&b.blocks[j]));
        }
    }
    mean_and_se(&diffs)
}

/// Sample mean and its standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Per-block BER contribution, for paired comparisons.
pub fn block_ber(report: &PointReport) -> impl Fn(&BlockTally) -> f64 + '_ {
    move |t| t.bit_errors as f64 / report.k_info as f64
}

/// Notes for points with too few error events to trust the BER.
pub fn advisories(records: &[MetricRecord]) -> Vec<String> {
    records
        .iter()
        .filter(|r| r.bit_errors < 100)
        .map(|r| {
            format!(
                "policy {} at {} dB: only {} bit errors; BER has a wide confidence interval",
                r.policy, r.ebn0_db, r.bit_errors
            )
        })
        .collect()
}

/// Channel states of a point, block by block, as the simulator draws them.
pub fn channel_trace(config: &LinkConfig, ebn0_db: f64, blocks: u64) -> Result<Vec<ChannelState>> {
    let link = Link::new(config)?;
    let params = &config.channel;
    let symbols_per_step = match link.layout {
        ChannelLayout::Taps => link.symbols as f64,
        ChannelLayout::Subcarriers => 1.0,
    };
    let beta = step_beta(params, symbols_per_step)?;
    let mut rng = RandomStream::for_trial(config.seed, ebn0_db.to_bits(), StreamPurpose::Channel);
    let mut state = match link.layout {
        ChannelLayout::Taps => init_channel(params, &mut rng)?,
        ChannelLayout::Subcarriers => init_subcarrier_channel(params, link.symbols, &mut rng)?,
    };
    let mut out: Vec<ChannelState> = Vec::with_capacity(blocks as usize);
    for b in 0..blocks {
        if b > 0 {
            state = step_channel(state, beta, params, &mut rng)?;
        }
        out.push(state.clone());
    }
    Ok(out)
}

/// Effective rate of one policy at one training interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub training_interval: u64,
    pub policy: String,
    pub ebn0_db: f64,
    pub ber: f64,
    pub bler: f64,
    pub effective_rate: f64,
    pub blocks_run: u64,
}

/// Re-runs every policy of `config` at one Eb/N0 for each training
/// interval, overriding the intervals set in the config.
pub fn run_rate_sweep(
    config: &LinkConfig,
    intervals: &[u64],
    ebn0_db: f64,
    jobs: Option<usize>,
) -> Result<Vec<RatePoint>> {
    if intervals.is_empty() {
        return Err(Error::config("no training intervals given"));
    }
    let mut out = Vec::new();
    for &t_i in intervals {
        let mut cfg = config.clone();
        cfg.ebn0_db = vec![ebn0_db];
        for p in &mut cfg.policies {
            p.training_interval = t_i;
        }
        for report in run_sweep_detailed(&cfg, jobs)? {
            let r = report.record;
            out.push(RatePoint {
                training_interval: t_i,
                policy: r.policy,
                ebn0_db: r.ebn0_db,
                ber: r.ber,
                bler: r.bler,
                effective_rate: r.effective_rate,
                blocks_run: r.blocks_run,
            });
        }
    }
    Ok(out)
}
