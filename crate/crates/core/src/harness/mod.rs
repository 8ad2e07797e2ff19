//! Monte Carlo link simulation, sweep orchestration and result files.

mod config;
mod output;
mod selftest;
mod sim;

pub use config::{CodeConfig, CodeFamily, CrcConfig, DecoderConfig, LinkConfig, Waveform};
pub use output::{
    emit_results, manifest_path, parse_results, read_results, render_results, render_table,
    write_manifest, OutputFormat, RunManifest, CSV_HEADER,
};
pub use selftest::{run_selftest, SelfTestResult};
pub use sim::{
    advisories, block_ber, channel_trace, mean_and_se, paired_difference, run_point,
    run_point_detailed, run_rate_sweep, run_sweep, run_sweep_detailed, run_sweep_with_jobs,
    BlockTally, Link, MetricRecord, PointReport, RatePoint,
};
