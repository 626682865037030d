//! Bound curves over a channel-parameter grid.

use serde::{Deserialize, Serialize};

use crate::bounds::{approx_ub_bec, ensemble_union_bound, er, rcu_bound_grs, DmcModel, RcuChannel, RcuConfig};
use crate::channel::{sigma2_from_ebn0, Modulation};
use crate::code::{ln_big, ln_weight_class_bound, mds_weight_distribution};
use crate::error::{Error, Result};
use crate::field::{parse_poly, Field};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeParams {
    pub p: u32,
    pub m: u32,
    #[serde(default)]
    pub f: Option<String>,
    pub n: usize,
    pub k: usize,
}

impl CodeParams {
    fn q(&self) -> u64 {
        (self.p as u64).pow(self.m)
    }

    fn check(&self) -> Result<()> {
        if self.k == 0 || self.k >= self.n || self.n as u64 > self.q() {
            return Err(Error::config("code", format!("need 0 < k < n <= q, got n = {}, k = {}", self.n, self.k)));
        }
        Ok(())
    }

    fn bits_per_use(&self) -> f64 {
        self.k as f64 / self.n as f64 * (self.p as f64).log2()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// `q^{k-(n-w)} C(n,w)`.
    #[default]
    ClassBound,
    /// The exact MDS weight distribution.
    Mds,
}

/// Natural-log spectrum `ln A_w`, `w = 0..=n`.
pub fn ln_spectrum(n: usize, k: usize, q: u64, kind: SpectrumKind) -> Vec<f64> {
    match kind {
        SpectrumKind::ClassBound => (0..=n).map(|w| ln_weight_class_bound(n, k, q, w)).collect(),
        SpectrumKind::Mds => mds_weight_distribution(n, k, q).iter().map(ln_big).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundChannel {
    Bec { eps: Vec<f64> },
    Awgn { modulation: Modulation, ebn0_db: Vec<f64> },
}

impl BoundChannel {
    fn grid(&self) -> &[f64] {
        match self {
            BoundChannel::Bec { eps } => eps,
            BoundChannel::Awgn { ebn0_db, .. } => ebn0_db,
        }
    }
}

/// A single channel for exponent curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Bec { eps: f64 },
    Symmetric { p: usize, eps: f64 },
    Awgn { modulation: Modulation, sigma2: f64 },
}

impl ModelSpec {
    pub fn model(&self) -> Result<DmcModel> {
        match *self {
            ModelSpec::Bec { eps } => DmcModel::bec(eps),
            ModelSpec::Symmetric { p, eps } => DmcModel::symmetric(p, eps),
            ModelSpec::Awgn { modulation, sigma2 } => DmcModel::awgn(modulation, sigma2),
        }
        .map_err(|e| Error::config("model", e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundSpec {
    /// Binary images only.
    ApproxUb { m: u32, n: usize, k: usize, eps: Vec<f64> },
    Union {
        code: CodeParams,
        channel: BoundChannel,
        #[serde(default)]
        spectrum: SpectrumKind,
    },
    Rcu {
        code: CodeParams,
        channel: BoundChannel,
        #[serde(default)]
        spectrum: SpectrumKind,
        trials: usize,
        pep_samples: usize,
        #[serde(default)]
        seed: u64,
        /// Defaults to a random shift for odd p.
        #[serde(default)]
        random_shift: Option<bool>,
    },
    Exponent { model: ModelSpec, rates: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub kind: String,
    pub param: f64,
    pub value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

fn check_grid(path: &str, grid: &[f64], ok: impl Fn(f64) -> bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config(path, "parameter grid is empty"));
    }
    match grid.iter().position(|&x| !x.is_finite() || !ok(x)) {
        Some(i) => Err(Error::config(format!("{path}[{i}]"), format!("{} is out of range", grid[i]))),
        None => Ok(()),
    }
}

fn check_channel(ch: &BoundChannel, p: u32) -> Result<()> {
    match ch {
        BoundChannel::Bec { eps } => {
            if p != 2 {
                return Err(Error::config("channel.kind", "the erasure channel here is binary"));
            }
            check_grid("channel.eps", eps, |x| (0.0..=1.0).contains(&x))
        }
        BoundChannel::Awgn { modulation, ebn0_db } => {
            if modulation.p() as u32 != p {
                return Err(Error::config("channel.modulation", format!("{}-ary modulation for p = {p}", modulation.p())));
            }
            check_grid("channel.ebn0_db", ebn0_db, |_| true)
        }
    }
}

fn row(kind: &str, param: f64, value: f64) -> BoundRow {
    BoundRow { kind: kind.into(), param, value, ci_low: None, ci_high: None }
}

/// Evaluates a bound over its grid.
pub fn bound_curve(spec: &BoundSpec) -> Result<Vec<BoundRow>> {
    match spec {
        BoundSpec::ApproxUb { m, n, k, eps } => {
            if *k == 0 || k >= n {
                return Err(Error::config("k", "need 0 < k < n"));
            }
            check_grid("eps", eps, |x| (0.0..=1.0).contains(&x))?;
            let mm = *m as usize;
            Ok(eps.iter().map(|&e| row("approx_ub", e, approx_ub_bec(n * mm, k * mm, *n, *k, e))).collect())
        }
        BoundSpec::Union { code, channel, spectrum } => {
            code.check()?;
            check_channel(channel, code.p)?;
            let spec_ln = ln_spectrum(code.n, code.k, code.q(), *spectrum);
            channel
                .grid()
                .iter()
                .map(|&x| {
                    let model = match channel {
                        BoundChannel::Bec { .. } => DmcModel::bec(x)?,
                        BoundChannel::Awgn { modulation, .. } => DmcModel::awgn(*modulation, sigma2_from_ebn0(x, code.bits_per_use()))?,
                    };
                    Ok(row("union", x, ensemble_union_bound(&spec_ln, code.q(), code.m, &model)))
                })
                .collect()
        }
        BoundSpec::Rcu { code, channel, spectrum, trials, pep_samples, seed, random_shift } => {
            code.check()?;
            check_channel(channel, code.p)?;
            let field = match &code.f {
                Some(f) => Field::new(code.p, code.m, &parse_poly(f)?),
                None => Field::with_default(code.p, code.m),
            }
            .map_err(|e| Error::config("code.f", e.to_string()))?;
            let spec_ln = ln_spectrum(code.n, code.k, code.q(), *spectrum);
            let cfg = RcuConfig { trials: *trials, pep_samples: *pep_samples, seed: *seed, random_shift: random_shift.unwrap_or(code.p != 2) };
            channel
                .grid()
                .iter()
                .enumerate()
                .map(|(g, &x)| {
                    let ch = match channel {
                        BoundChannel::Bec { .. } => RcuChannel::Bec { eps: x },
                        BoundChannel::Awgn { modulation, .. } => {
                            RcuChannel::Awgn { modulation: *modulation, sigma2: sigma2_from_ebn0(x, code.bits_per_use()) }
                        }
                    };
                    // Distinct seeds per grid point.
                    let cfg = RcuConfig { seed: crate::channel::splitmix64(cfg.seed ^ g as u64), ..cfg };
                    let e = rcu_bound_grs(&field, code.n, &spec_ln, ch, &cfg)?;
                    Ok(BoundRow { kind: "rcu".into(), param: x, value: e.mean, ci_low: Some(e.ci_low), ci_high: Some(e.ci_high) })
                })
                .collect()
        }
        BoundSpec::Exponent { model, rates } => {
            let m = model.model()?;
            check_grid("rates", rates, |r| r >= 0.0)?;
            Ok(rates.iter().map(|&r| row("er", r, er(&m, r))).collect())
        }
    }
}
