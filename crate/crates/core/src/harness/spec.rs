//! Experiment descriptions and their validation.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channel::Modulation;
use crate::code::{CodeDesc, GrsCode, Multipliers, Shift};
use crate::error::{Error, Result};
use crate::field::{parse_poly, Field};
use crate::osd::packing::packed_len;
use crate::osd::OsdConfig;

/// Where the code comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeSource {
    /// A fully pinned code.
    Pinned(CodeDesc),
    /// Path to a pinned code JSON, relative to the spec file.
    Path(PathBuf),
    /// Construct from parameters and a seed.
    Generate(CodeRecipe),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierKind {
    #[default]
    Random,
    Ones,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    Zero,
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeRecipe {
    pub p: u32,
    pub m: u32,
    /// Coefficients `f_0,...,f_{m-1},1`; the shipped default when absent.
    #[serde(default)]
    pub f: Option<String>,
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub info_digits: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub extended: bool,
    #[serde(default)]
    pub multipliers: MultiplierKind,
    /// Zero for p = 2 and random otherwise when absent.
    #[serde(default)]
    pub shift: Option<ShiftKind>,
}

impl CodeRecipe {
    pub fn build(&self) -> Result<GrsCode> {
        let field = match &self.f {
            Some(f) => Field::new(self.p, self.m, &parse_poly(f)?)?,
            None => Field::with_default(self.p, self.m)?,
        };
        let mult = match self.multipliers {
            MultiplierKind::Random => Multipliers::Random,
            MultiplierKind::Ones => Multipliers::Zero,
        };
        let shift = match self.shift.unwrap_or(if self.p == 2 { ShiftKind::Zero } else { ShiftKind::Random }) {
            ShiftKind::Zero => Shift::Zero,
            ShiftKind::Random => Shift::Random,
        };
        let kd = self.info_digits.unwrap_or(self.k * self.m as usize);
        GrsCode::with_info_digits(Arc::new(field), self.n, self.k, kd, mult, shift, self.seed, self.extended)
    }
}

impl CodeSource {
    pub fn load(&self, base: &Path) -> Result<GrsCode> {
        let res = match self {
            CodeSource::Pinned(d) => GrsCode::from_desc(d),
            CodeSource::Path(p) => {
                let full = base.join(p);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| Error::config("code.path", format!("{}: {e}", full.display())))?;
                let desc: CodeDesc = parse_json(&text, "code.path")?;
                GrsCode::from_desc(&desc)
            }
            CodeSource::Generate(r) => r.build(),
        };
        res.map_err(|e| match e {
            Error::Config { .. } => e,
            other => Error::config("code", other.to_string()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    /// Grid of erasure probabilities.
    Bec { eps: Vec<f64> },
    /// Grid of `E_b/N_0` in dB.
    Awgn { modulation: Modulation, ebn0_db: Vec<f64> },
}

impl ChannelSpec {
    pub fn grid(&self) -> &[f64] {
        match self {
            ChannelSpec::Bec { eps } => eps,
            ChannelSpec::Awgn { ebn0_db, .. } => ebn0_db,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BecPath {
    /// Dual path when `n-k < k` and nothing is frozen.
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecoderSpec {
    BecMl {
        #[serde(default)]
        path: BecPath,
        /// Also count iterations of the offline-form baseline.
        #[serde(default)]
        baseline: bool,
    },
    LcOsd(OsdConfig),
}

/// Per grid point: stop after `min_errors` errors once `min_trials` trials
/// have run, and never run more than `max_trials`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialPolicy {
    #[serde(default)]
    pub min_trials: u64,
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
}

fn default_min_errors() -> u64 {
    100
}

fn default_max_trials() -> u64 {
    10_000_000
}

impl Default for TrialPolicy {
    fn default() -> Self {
        TrialPolicy { min_trials: 0, min_errors: default_min_errors(), max_trials: default_max_trials() }
    }
}

impl TrialPolicy {
    /// Exactly `n` trials.
    pub fn fixed(n: u64) -> Self {
        TrialPolicy { min_trials: n, min_errors: u64::MAX, max_trials: n }
    }
}

/// How information bits reach the code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SourceMode {
    BinaryOnBinary,
    TernaryOnTernary,
    /// `bits` binary digits packed three-to-two into the ternary message.
    TernaryForBinary { bits: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub code: CodeSource,
    pub channel: ChannelSpec,
    pub decoder: DecoderSpec,
    #[serde(default)]
    pub trials: TrialPolicy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub source: Option<SourceMode>,
    /// Keep one record per trial.
    #[serde(default)]
    pub record_trials: bool,
}

/// Parses JSON, reporting the path of the first offending field.
pub fn parse_json<T: DeserializeOwned>(text: &str, root: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { root.to_string() } else if root.is_empty() { path } else { format!("{root}.{path}") };
        Error::config(path, e.into_inner().to_string())
    })
}

fn check_grid(path: &str, grid: &[f64], ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config(path, "parameter grid is empty"));
    }
    for (i, &x) in grid.iter().enumerate() {
        if !x.is_finite() || !ok(x) {
            return Err(Error::config(format!("{path}[{i}]"), format!("{x} {what}")));
        }
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text, "")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config("spec", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks everything that does not need the code.
    pub fn validate_shape(&self) -> Result<()> {
        match &self.channel {
            ChannelSpec::Bec { eps } => check_grid("channel.eps", eps, |x| (0.0..=1.0).contains(&x), "is not in [0, 1]")?,
            ChannelSpec::Awgn { ebn0_db, .. } => check_grid("channel.ebn0_db", ebn0_db, |_| true, "is not finite")?,
        }
        let t = &self.trials;
        if t.min_errors == 0 {
            return Err(Error::config("trials.min_errors", "must be at least 1"));
        }
        if t.max_trials == 0 {
            return Err(Error::config("trials.max_trials", "must be at least 1"));
        }
        if t.max_trials < t.min_trials {
            return Err(Error::config("trials.max_trials", "is below trials.min_trials"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        match (&self.decoder, &self.channel) {
            (DecoderSpec::BecMl { .. }, ChannelSpec::Bec { .. }) | (DecoderSpec::LcOsd(_), ChannelSpec::Awgn { .. }) => Ok(()),
            (DecoderSpec::BecMl { .. }, _) => Err(Error::config("decoder.kind", "bec_ml needs a bec channel")),
            (DecoderSpec::LcOsd(_), _) => Err(Error::config("decoder.kind", "lc_osd needs an awgn channel")),
        }
    }

    /// Checks the spec against its code.
    pub fn validate_with(&self, code: &GrsCode) -> Result<()> {
        self.validate_shape()?;
        if let ChannelSpec::Awgn { modulation, .. } = &self.channel {
            if modulation.p() as u32 != code.p() {
                return Err(Error::config("channel.modulation", format!("{}-ary modulation on a code over p = {}", modulation.p(), code.p())));
            }
        }
        if let DecoderSpec::LcOsd(cfg) = &self.decoder {
            let red = code.len_p() - code.info_digits();
            if cfg.delta > red {
                return Err(Error::config("decoder.delta", format!("delta {} exceeds N-K = {red}", cfg.delta)));
            }
            if cfg.max_queries == 0 {
                return Err(Error::config("decoder.max_queries", "must be at least 1"));
            }
        }
        if let DecoderSpec::BecMl { path: BecPath::Dual, .. } = &self.decoder {
            if code.frozen() > 0 {
                return Err(Error::config("decoder.path", "the dual path needs a code without frozen digits"));
            }
        }
        match self.source {
            None => {}
            Some(SourceMode::BinaryOnBinary) if code.p() != 2 => return Err(Error::config("source.mode", "binary_on_binary needs p = 2")),
            Some(SourceMode::TernaryOnTernary) if code.p() != 3 => return Err(Error::config("source.mode", "ternary_on_ternary needs p = 3")),
            Some(SourceMode::TernaryForBinary { bits }) => {
                if code.p() != 3 {
                    return Err(Error::config("source.mode", "ternary_for_binary needs p = 3"));
                }
                if packed_len(bits) != code.info_digits() {
                    return Err(Error::config(
                        "source.bits",
                        format!("{bits} bits pack into {} trits but the code carries {}", packed_len(bits), code.info_digits()),
                    ));
                }
            }
            Some(_) => {}
        }
        Ok(())
    }

    /// Information bits per channel use.
    pub fn bits_per_use(&self, code: &GrsCode) -> f64 {
        match self.source {
            Some(SourceMode::TernaryForBinary { bits }) => bits as f64 / code.len_p() as f64,
            _ => code.bits_per_use(),
        }
    }
}
