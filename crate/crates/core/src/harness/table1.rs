//! Mean elimination iterations over the erasure channel: change-of-basis
//! after interpolation against repair of a fixed offline systematic form.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pool;
use crate::channel::{bec_transmit_rng, trial_rng};
use crate::code::{GrsCode, Multipliers, Shift};
use crate::erasure::{BecDecoder, GeBaseline};
use crate::error::{Error, Result};
use crate::field::{parse_poly, Field};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Spec {
    #[serde(default = "d_p")]
    pub p: u32,
    #[serde(default = "d_m")]
    pub m: u32,
    #[serde(default)]
    pub f: Option<String>,
    /// Symbol length.
    #[serde(default = "d_n")]
    pub n: usize,
    /// Information digits `K`; each must be a multiple of `m`.
    #[serde(default = "d_k")]
    pub k_digits: Vec<usize>,
    #[serde(default = "d_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "d_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_code_seed")]
    pub code_seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn d_p() -> u32 {
    2
}
fn d_m() -> u32 {
    8
}
fn d_n() -> usize {
    128
}
fn d_k() -> Vec<usize> {
    vec![256, 512, 768]
}
fn d_eps() -> Vec<f64> {
    vec![0.1, 0.2, 0.3]
}
fn d_trials() -> u64 {
    10_000
}
fn d_code_seed() -> u64 {
    1
}

impl Default for Table1Spec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub k_digits: usize,
    pub eps: f64,
    pub trials: u64,
    pub cob_mean: f64,
    pub ge_mean: f64,
    /// `1 - cob_mean / ge_mean`.
    pub reduction: f64,
    pub rank_deficient_frac: f64,
}

impl Table1Spec {
    pub fn validate(&self) -> Result<()> {
        if self.k_digits.is_empty() {
            return Err(Error::config("k_digits", "parameter grid is empty"));
        }
        for (i, &k) in self.k_digits.iter().enumerate() {
            if k == 0 || k % self.m as usize != 0 || k / self.m as usize >= self.n {
                return Err(Error::config(format!("k_digits[{i}]"), format!("{k} is not a multiple of m below n*m")));
            }
        }
        if self.eps.is_empty() {
            return Err(Error::config("eps", "parameter grid is empty"));
        }
        for (i, &e) in self.eps.iter().enumerate() {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::config(format!("eps[{i}]"), format!("{e} is not in [0, 1]")));
            }
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        Ok(())
    }

    fn field(&self) -> Result<Arc<Field>> {
        let f = match &self.f {
            Some(s) => Field::new(self.p, self.m, &parse_poly(s)?),
            None => Field::with_default(self.p, self.m),
        };
        f.map(Arc::new).map_err(|e| Error::config("f", e.to_string()))
    }
}

/// Both iteration means for every `(K, ε)` cell. Both decoders see the same
/// erasure pattern in each trial and use the primal form.
pub fn table1(spec: &Table1Spec) -> Result<Vec<Table1Row>> {
    spec.validate()?;
    let field = spec.field()?;
    let pool = pool(spec.workers.unwrap_or_else(super::default_workers))?;
    let mut rows = Vec::new();
    for (ki, &kd) in spec.k_digits.iter().enumerate() {
        let k = kd / spec.m as usize;
        let code = GrsCode::new(field.clone(), spec.n, k, Multipliers::Random, Shift::Zero, spec.code_seed, false)?;
        let dec = BecDecoder::new(&code);
        let ge = GeBaseline::new(&code, false);
        for (ei, &eps) in spec.eps.iter().enumerate() {
            let grid = (ki * spec.eps.len() + ei) as u64;
            let per: Vec<(u64, u64, bool)> = pool.install(|| {
                (0..spec.trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = trial_rng(spec.seed, grid, t);
                        let v: Vec<u8> = (0..code.info_digits()).map(|_| rng.random_range(0..spec.p as u8)).collect();
                        let out = bec_transmit_rng(&code.encode_p(&v).expect("message length"), eps, &mut rng);
                        let d = dec.decode_primal(&out);
                        (d.stats.iterations as u64, ge.iterations(&out).iterations as u64, d.stats.rank_deficient)
                    })
                    .collect()
            });
            let t = spec.trials as f64;
            let cob: u64 = per.iter().map(|x| x.0).sum();
            let gei: u64 = per.iter().map(|x| x.1).sum();
            let def = per.iter().filter(|x| x.2).count() as f64;
            let (cob_mean, ge_mean) = (cob as f64 / t, gei as f64 / t);
            rows.push(Table1Row {
                k_digits: kd,
                eps,
                trials: spec.trials,
                cob_mean,
                ge_mean,
                reduction: if ge_mean > 0.0 { 1.0 - cob_mean / ge_mean } else { 0.0 },
                rank_deficient_frac: def / t,
            });
        }
    }
    Ok(rows)
}
