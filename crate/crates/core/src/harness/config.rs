use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::FadingProcessParams;
use crate::decoder::{DEFAULT_ITERATIONS, DEFAULT_MAX_QUERIES};
use crate::error::{Error, Result};
use crate::fec::{
    make_ebch, make_extended_hamming, make_nonsystematic, make_product, CodeSpec, CrcSpec,
};
use crate::modem::{Constellation, LlrMode};
use crate::pilots::{PilotPolicy, PolicyKind};
use crate::rng::{RandomStream, StreamPurpose};

/// Component code family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CodeFamily {
    /// `[2^m, 2^m - m - 1, 4]`.
    ExtendedHamming { m: u32 },
    /// Extended BCH correcting `t` errors, e.g. `m = 6, t = 2` for `[64,51]`.
    Ebch { m: u32, t: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeConfig {
    #[serde(flatten)]
    pub family: CodeFamily,
    /// Square the component into a product code.
    #[serde(default)]
    pub product: bool,
    /// Scramble the generator with a random invertible matrix.
    #[serde(default)]
    pub nonsystematic: bool,
}

impl CodeConfig {
    /// Builds the code. The non-systematic scrambler depends only on `seed`.
    pub fn build(&self, seed: u64) -> Result<CodeSpec> {
        let base = match self.family {
            CodeFamily::ExtendedHamming { m } => make_extended_hamming(m)?,
            CodeFamily::Ebch { m, t } => make_ebch(m, t)?,
        };
        let code = if self.product {
            make_product(&base)?
        } else {
            base
        };
        if self.nonsystematic {
            let mut rng = RandomStream::for_trial(seed, 0, StreamPurpose::Code);
            make_nonsystematic(&code, &mut rng)
        } else {
            Ok(code)
        }
    }
}

/// Either a preset name (`crc8`, `crc11`, `crc16`, `crc24a`) or an explicit spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CrcConfig {
    Preset(String),
    Custom(CrcSpec),
}

impl CrcConfig {
    pub fn spec(&self) -> Result<CrcSpec> {
        match self {
            CrcConfig::Preset(name) => match name.as_str() {
                "crc8" => Ok(CrcSpec::crc8()),
                "crc11" => Ok(CrcSpec::crc11()),
                "crc16" => Ok(CrcSpec::crc16()),
                "crc24a" => Ok(CrcSpec::crc24a()),
                other => Err(Error::config(format!("unknown CRC preset `{other}`"))),
            },
            CrcConfig::Custom(spec) => {
                spec.validate()?;
                Ok(*spec)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Waveform {
    SingleCarrier,
    /// One codeword per OFDM symbol, one symbol per subcarrier.
    Ofdm {
        num_subcarriers: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderConfig {
    /// Soft-input GRAND on LLRs; hard-decision GRAND otherwise.
    #[serde(default = "default_true")]
    pub soft: bool,
    #[serde(default = "default_list_size")]
    pub list_size: usize,
    #[serde(default = "default_max_queries")]
    pub max_queries: u64,
    /// Row/column passes for product codes.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

fn default_true() -> bool {
    true
}
fn default_list_size() -> usize {
    1
}
fn default_max_queries() -> u64 {
    DEFAULT_MAX_QUERIES
}
fn default_iterations() -> usize {
    DEFAULT_ITERATIONS
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            soft: true,
            list_size: 1,
            max_queries: DEFAULT_MAX_QUERIES,
            iterations: DEFAULT_ITERATIONS,
        }
    }
}

/// One experiment: a link, the policies to compare and the Eb/N0 grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub seed: u64,
    pub code: CodeConfig,
    #[serde(default)]
    pub crc: Option<CrcConfig>,
    /// Constellation order M (2, 4 or 16).
    pub modulation: usize,
    #[serde(default)]
    pub llr_mode: LlrMode,
    pub waveform: Waveform,
    pub channel: FadingProcessParams,
    pub policies: Vec<PilotPolicy>,
    pub ebn0_db: Vec<f64>,
    /// Measured blocks per point, training blocks included.
    pub blocks_per_point: u64,
    #[serde(default)]
    pub decoder: DecoderConfig,
}

impl LinkConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: LinkConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("cannot parse config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot serialise config: {e}")))
    }

    pub fn crc_spec(&self) -> Result<Option<CrcSpec>> {
        self.crc.as_ref().map(CrcConfig::spec).transpose()
    }

    /// Checks every cross-field constraint; all failures are config errors.
    pub fn validate(&self) -> Result<()> {
        let as_config = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::config(other.to_string()),
        };
        self.channel.validate().map_err(as_config)?;
        let constellation = Constellation::new(self.modulation).map_err(as_config)?;
        let code = self.code.build(self.seed).map_err(as_config)?;
        let crc = self.crc_spec().map_err(as_config)?;
        let crc_width = crc.map_or(0, |c| c.width as usize);
        if crc_width >= code.k() {
            return Err(Error::config(format!(
                "CRC width {crc_width} leaves no information bits in k = {}",
                code.k()
            )));
        }
        let m = constellation.bits_per_symbol();
        if code.n() % m != 0 {
            return Err(Error::config(format!(
                "codeword length {} is not a multiple of {m} bits per symbol",
                code.n()
            )));
        }
        let symbols = code.n() / m;
        match self.waveform {
            Waveform::Ofdm { num_subcarriers } => {
                if num_subcarriers != symbols {
                    return Err(Error::config(format!(
                        "OFDM needs n / log2(M) = {symbols} subcarriers, got {num_subcarriers}"
                    )));
                }
                if self.channel.num_taps() != 1 {
                    return Err(Error::config(
                        "OFDM uses per-subcarrier gains; delay profile must be [1]",
                    ));
                }
            }
            Waveform::SingleCarrier => {
                let taps = self.channel.num_taps();
                if taps > 1 && symbols < crate::estimator::MIN_SYMBOLS_PER_TAP * taps {
                    return Err(Error::config(format!(
                        "{symbols} symbols per block are too few to estimate {taps} taps"
                    )));
                }
            }
        }
        if self.policies.is_empty() {
            return Err(Error::config("policy list is empty"));
        }
        if self.ebn0_db.is_empty() {
            return Err(Error::config("Eb/N0 list is empty"));
        }
        if let Some(bad) = self.ebn0_db.iter().find(|e| !e.is_finite()) {
            return Err(Error::config(format!("Eb/N0 value {bad} is not finite")));
        }
        if self.decoder.list_size == 0 {
            return Err(Error::config("decoder list_size must be >= 1"));
        }
        if self.decoder.max_queries == 0 {
            return Err(Error::config("decoder max_queries must be >= 1"));
        }
        if self.decoder.iterations == 0 {
            return Err(Error::config("decoder iterations must be >= 1"));
        }
        for policy in &self.policies {
            policy.validate().map_err(as_config)?;
            if self.blocks_per_point < 10 * policy.training_interval {
                return Err(Error::config(format!(
                    "blocks_per_point = {} is below 10 * T_I = {} for policy {}",
                    self.blocks_per_point,
                    10 * policy.training_interval,
                    policy.label()
                )));
            }
            match policy.kind {
                PolicyKind::Threshold { .. } if !matches!(self.waveform, Waveform::Ofdm { .. }) => {
                    return Err(Error::config("threshold policy is only defined for OFDM"));
                }
                PolicyKind::CrcGated if crc.is_none() => {
                    return Err(Error::config("crc_gated policy needs a CRC"));
                }
                PolicyKind::WeightedIq | PolicyKind::MinDelta
                    if code.is_product() || !self.decoder.soft || self.decoder.list_size < 2 =>
                {
                    return Err(Error::config(format!(
                        "{} needs a soft list decoder (list_size >= 2) on a single code",
                        policy.kind
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seed = 7
modulation = 4
ebn0_db = [6.0, 8.0]
blocks_per_point = 1000
crc = "crc8"

[code]
family = "extended_hamming"
m = 3
product = true

[waveform]
type = "single_carrier"

[channel]
decorrelation_interval = 800.0

[[policies]]
kind = "designated_only"
training_interval = 100

[[policies]]
kind = "crc_gated"
training_interval = 100
"#;

    #[test]
    fn parses_example() {
        let cfg = LinkConfig::from_toml_str(BASE).unwrap();
        assert_eq!(cfg.code.build(7).unwrap().n(), 64);
        assert_eq!(cfg.crc_spec().unwrap(), Some(CrcSpec::crc8()));
        assert_eq!(cfg.channel.phi, 0.5);
        assert_eq!(cfg.decoder, DecoderConfig::default());
        let back = LinkConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    fn valid() -> LinkConfig {
        LinkConfig::from_toml_str(BASE).unwrap()
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = valid();
        c.policies.clear();
        assert!(c.validate().unwrap_err().is_config());

        let mut c = valid();
        c.crc = None;
        assert!(c.validate().is_err());

        let mut c = valid();
        c.blocks_per_point = 999;
        assert!(c.validate().is_err());

        let mut c = valid();
        c.modulation = 8;
        assert!(c.validate().is_err());

        let mut c = valid();
        c.waveform = Waveform::Ofdm {
            num_subcarriers: 16,
        };
        assert!(c.validate().is_err());
        c.waveform = Waveform::Ofdm {
            num_subcarriers: 32,
        };
        assert!(c.validate().is_ok());

        let mut c = valid();
        c.policies[0].kind = PolicyKind::Threshold { tau: 1.0 };
        assert!(c.validate().is_err());

        let mut c = valid();
        c.policies[0].kind = PolicyKind::WeightedIq;
        assert!(c.validate().is_err());

        let mut c = valid();
        c.crc = Some(CrcConfig::Preset("crc99".into()));
        assert!(c.validate().is_err());

        assert!(LinkConfig::from_toml_str("seed = 1")
            .unwrap_err()
            .is_config());
        assert!(
            LinkConfig::from_toml_str(&BASE.replace("seed = 7", "seed = 7\nbogus = 1")).is_err()
        );
    }

    #[test]
    fn nonsystematic_scrambler_depends_on_seed_only() {
        let cfg = CodeConfig {
            family: CodeFamily::Ebch { m: 6, t: 2 },
            product: false,
            nonsystematic: true,
        };
        assert_eq!(cfg.build(3).unwrap(), cfg.build(3).unwrap());
        assert_ne!(cfg.build(3).unwrap(), cfg.build(4).unwrap());
        assert_eq!(cfg.build(3).unwrap().k(), 51);
    }
}
