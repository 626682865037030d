//! Seeded Monte Carlo driver.
//!
//! Every trial draws its randomness from `trial_rng(seed, grid_index, trial_index)`.
//! Trials run in fixed-size batches and are reduced in index order, and the
//! stopping rule is evaluated trial by trial, so results do not depend on the
//! worker count.

pub mod curves;
pub mod spec;
pub mod stats;
pub mod table1;

use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{awgn_transmit_rng, bec_exact_erasures_rng, bec_transmit_rng, es_n0_db, sigma2_from_ebn0, trial_rng, Modulation};
use crate::code::GrsCode;
use crate::erasure::{BecDecoder, GeBaseline};
use crate::error::{Error, Result};
use crate::osd::packing::{pack_bits_to_trits, unpack_trits_to_bits};
use crate::osd::LcOsd;
pub use spec::{BecPath, ChannelSpec, CodeRecipe, CodeSource, DecoderSpec, ExperimentSpec, SourceMode, TrialPolicy};
use stats::{clopper_pearson, Tally};

/// Version of the CSV column sets.
pub const SCHEMA_VERSION: u32 = 1;

/// Summary of one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub channel_param: f64,
    pub trials: u64,
    pub errors: u64,
    pub fer: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_iters: Option<f64>,
    pub mean_queries: Option<f64>,
    pub certified_frac: Option<f64>,
    pub es_n0_db: Option<f64>,
    #[serde(skip)]
    pub mean_ge_iters: Option<f64>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// One trial, for the per-trial CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub channel_param: f64,
    pub trial: u64,
    pub success: bool,
    pub erasures: Option<u64>,
    pub iterations: Option<u64>,
    pub rank_deficient: Option<bool>,
    pub queries_used: Option<u64>,
    pub ml_certified: Option<bool>,
    pub soft_weight_of_output: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub library_version: String,
    pub kind: String,
    pub seed: u64,
    pub workers: usize,
    pub bits_per_use: Option<f64>,
    pub spec: serde_json::Value,
    pub wall_time_s: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub points: Vec<PointResult>,
    pub trials: Vec<TrialRecord>,
    pub manifest: Manifest,
}

struct Outcome {
    success: bool,
    erasures: u64,
    iterations: u64,
    ge_iterations: u64,
    rank_deficient: bool,
    queries: u64,
    certified: bool,
    soft_weight: f64,
}

enum Engine<'a> {
    Bec { dec: BecDecoder<'a>, path: BecPath, baseline: Option<GeBaseline> },
    Osd { dec: LcOsd<'a>, modulation: Modulation },
}

/// Draws a message; returns the information digits and the source bits for packed modes.
fn draw_message(code: &GrsCode, source: Option<SourceMode>, rng: &mut ChaCha8Rng) -> (Vec<u8>, Option<Vec<u8>>) {
    match source {
        Some(SourceMode::TernaryForBinary { bits }) => {
            let b: Vec<u8> = (0..bits).map(|_| rng.random_range(0..2u8)).collect();
            (pack_bits_to_trits(&b), Some(b))
        }
        _ => {
            let p = code.p() as u8;
            ((0..code.info_digits()).map(|_| rng.random_range(0..p)).collect(), None)
        }
    }
}

fn same_message(decoded: &[u8], sent: &[u8], bits: &Option<Vec<u8>>) -> bool {
    match bits {
        Some(b) => unpack_trits_to_bits(decoded, b.len()).is_ok_and(|d| &d == b),
        None => decoded == sent,
    }
}

impl Engine<'_> {
    fn trial(&self, code: &GrsCode, spec: &ExperimentSpec, param: f64, sigma2: f64, mut rng: ChaCha8Rng) -> Result<Outcome> {
        let (v, bits) = draw_message(code, spec.source, &mut rng);
        let x = code.encode_p(&v)?;
        match self {
            Engine::Bec { dec, path, baseline } => {
                let out = bec_transmit_rng(&x, param, &mut rng);
                let d = match path {
                    BecPath::Auto => dec.decode(&out),
                    BecPath::Primal => dec.decode_primal(&out),
                    BecPath::Dual => dec.decode_dual(&out),
                };
                let ge = baseline.as_ref().map_or(0, |b| b.iterations(&out).iterations as u64);
                Ok(Outcome {
                    success: same_message(&d.message, &v, &bits),
                    erasures: out.iter().filter(|o| o.is_none()).count() as u64,
                    iterations: d.stats.iterations as u64,
                    ge_iterations: ge,
                    rank_deficient: d.stats.rank_deficient,
                    queries: 0,
                    certified: false,
                    soft_weight: 0.0,
                })
            }
            Engine::Osd { dec, modulation } => {
                let soft = awgn_transmit_rng(&x, &code.shift_p(), *modulation, sigma2, &mut rng);
                let d = dec.decode(&soft)?;
                Ok(Outcome {
                    success: same_message(&d.message, &v, &bits),
                    erasures: 0,
                    iterations: 0,
                    ge_iterations: 0,
                    rank_deficient: false,
                    queries: d.queries as u64,
                    certified: d.certified,
                    soft_weight: d.soft_weight,
                })
            }
        }
    }
}

/// Worker count used when neither the spec nor the caller sets one.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))
}

/// Loads the code relative to `base` and runs the spec.
pub fn run(spec: &ExperimentSpec, base: &Path) -> Result<RunResult> {
    spec.validate_shape()?;
    let code = spec.code.load(base)?;
    run_with_code(spec, &code)
}

pub fn run_with_code(spec: &ExperimentSpec, code: &GrsCode) -> Result<RunResult> {
    spec.validate_with(code)?;
    let workers = spec.workers.unwrap_or_else(default_workers);
    let pool = pool(workers)?;
    let bc = spec.bits_per_use(code);
    let engine = match (&spec.decoder, &spec.channel) {
        (DecoderSpec::BecMl { path, baseline }, _) => {
            let dual = match path {
                BecPath::Auto => BecDecoder::new(code).prefers_dual(),
                BecPath::Primal => false,
                BecPath::Dual => true,
            };
            Engine::Bec { dec: BecDecoder::new(code), path: *path, baseline: baseline.then(|| GeBaseline::new(code, dual)) }
        }
        (DecoderSpec::LcOsd(cfg), ChannelSpec::Awgn { modulation, .. }) => {
            Engine::Osd { dec: LcOsd::new(code, cfg.clone())?, modulation: *modulation }
        }
        (DecoderSpec::LcOsd(_), _) => unreachable!("validated"),
    };
    let is_awgn = matches!(spec.channel, ChannelSpec::Awgn { .. });
    let batch = (64 * workers).max(256) as u64;
    let mut points = Vec::new();
    let mut records = Vec::new();
    let mut walls = Vec::new();
    for (g, &param) in spec.channel.grid().iter().enumerate() {
        let start = Instant::now();
        let sigma2 = if is_awgn { sigma2_from_ebn0(param, bc) } else { 0.0 };
        let policy = spec.trials;
        let mut tally = Tally::default();
        'outer: while tally.trials < policy.max_trials {
            let lo = tally.trials;
            let hi = (lo + batch).min(policy.max_trials);
            let outs: Vec<Result<Outcome>> = pool.install(|| {
                (lo..hi)
                    .into_par_iter()
                    .map(|t| engine.trial(code, spec, param, sigma2, trial_rng(spec.seed, g as u64, t)))
                    .collect()
            });
            for (t, o) in (lo..hi).zip(outs) {
                let o = o?;
                tally.trials += 1;
                tally.errors += u64::from(!o.success);
                tally.iterations += o.iterations;
                tally.ge_iterations += o.ge_iterations;
                tally.queries += o.queries;
                tally.certified += u64::from(o.certified);
                if spec.record_trials {
                    records.push(TrialRecord {
                        channel_param: param,
                        trial: t,
                        success: o.success,
                        erasures: (!is_awgn).then_some(o.erasures),
                        iterations: (!is_awgn).then_some(o.iterations),
                        rank_deficient: (!is_awgn).then_some(o.rank_deficient),
                        queries_used: is_awgn.then_some(o.queries),
                        ml_certified: is_awgn.then_some(o.certified),
                        soft_weight_of_output: is_awgn.then_some(o.soft_weight),
                    });
                }
                if tally.trials >= policy.min_trials && tally.errors >= policy.min_errors {
                    break 'outer;
                }
            }
        }
        let (ci_lo, ci_hi) = clopper_pearson(tally.errors, tally.trials, 0.95);
        let wall = start.elapsed().as_secs_f64();
        walls.push(wall);
        let baseline = matches!(spec.decoder, DecoderSpec::BecMl { baseline: true, .. });
        points.push(PointResult {
            channel_param: param,
            trials: tally.trials,
            errors: tally.errors,
            fer: tally.fer(),
            ci_lo,
            ci_hi,
            mean_iters: (!is_awgn).then(|| tally.mean(tally.iterations)),
            mean_queries: is_awgn.then(|| tally.mean(tally.queries)),
            certified_frac: is_awgn.then(|| tally.mean(tally.certified)),
            es_n0_db: is_awgn.then(|| es_n0_db(param, bc)),
            mean_ge_iters: baseline.then(|| tally.mean(tally.ge_iterations)),
            wall_time_s: wall,
        });
    }
    let mut resolved = spec.clone();
    resolved.code = CodeSource::Pinned(code.to_desc());
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        kind: "simulate".into(),
        seed: spec.seed,
        workers,
        bits_per_use: Some(bc),
        spec: serde_json::to_value(&resolved)?,
        wall_time_s: walls,
    };
    Ok(RunResult { points, trials: records, manifest })
}

/// Serializes rows as CSV with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::config("csv", e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::config("csv", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Header for an empty row set.
fn header_only(cols: &[&str]) -> String {
    format!("{}\n", cols.join(","))
}

pub const SIMULATE_COLUMNS: &[&str] =
    &["channel_param", "trials", "errors", "fer", "ci_lo", "ci_hi", "mean_iters", "mean_queries", "certified_frac", "es_n0_db"];

pub fn points_csv(points: &[PointResult]) -> Result<String> {
    if points.is_empty() {
        return Ok(header_only(SIMULATE_COLUMNS));
    }
    to_csv(points)
}

/// Writes `text` to `path` and the manifest next to it as `<path>.manifest.json`.
pub fn write_with_manifest(path: &Path, text: &str, manifest: &Manifest) -> Result<()> {
    std::fs::write(path, text)?;
    let mut mpath = path.as_os_str().to_owned();
    mpath.push(".manifest.json");
    std::fs::write(mpath, serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

/// Two curves on a shared `E_b/N_0` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub ebn0_db: Vec<f64>,
    pub first: ExperimentSpec,
    pub second: ExperimentSpec,
    /// Largest allowed `|b_c1 - b_c2|`.
    #[serde(default = "default_bc_tolerance")]
    pub bc_tolerance: f64,
}

fn default_bc_tolerance() -> f64 {
    0.02
}

/// Both curves in one CSV with a leading `curve` column.
pub fn compare_csv(curves: &[(&str, &[PointResult])]) -> Result<String> {
    let mut out = format!("curve,{}\n", SIMULATE_COLUMNS.join(","));
    for (label, points) in curves {
        if label.contains([',', '"', '\n']) {
            return Err(Error::config("label", "curve labels must not need CSV quoting"));
        }
        for line in points_csv(points)?.lines().skip(1) {
            out.push_str(&format!("{label},{line}\n"));
        }
    }
    Ok(out)
}

/// Runs both curves of a pairing over the shared grid.
pub fn compare_sources(cmp: &CompareSpec, base: &Path) -> Result<(RunResult, RunResult)> {
    let mut specs = [cmp.first.clone(), cmp.second.clone()];
    let mut codes = Vec::new();
    for (i, s) in specs.iter_mut().enumerate() {
        let name = if i == 0 { "first" } else { "second" };
        let ChannelSpec::Awgn { ebn0_db, .. } = &mut s.channel else {
            return Err(Error::config(format!("{name}.channel.kind"), "comparisons need an awgn channel"));
        };
        *ebn0_db = cmp.ebn0_db.clone();
        if s.source.is_none() {
            return Err(Error::config(format!("{name}.source"), "comparisons need an explicit source mode"));
        }
        let code = s.code.load(base).map_err(|e| prefix(e, name))?;
        s.validate_with(&code).map_err(|e| prefix(e, name))?;
        codes.push(code);
    }
    let (b1, b2) = (specs[0].bits_per_use(&codes[0]), specs[1].bits_per_use(&codes[1]));
    if (b1 - b2).abs() > cmp.bc_tolerance {
        return Err(Error::config("bc_tolerance", format!("bits per channel use differ: {b1:.4} vs {b2:.4}")));
    }
    let r1 = run_with_code(&specs[0], &codes[0]).map_err(|e| prefix(e, "first"))?;
    let r2 = run_with_code(&specs[1], &codes[1]).map_err(|e| prefix(e, "second"))?;
    Ok((r1, r2))
}

fn prefix(e: Error, name: &str) -> Error {
    match e {
        Error::Config { path, msg } => Error::Config { path: format!("{name}.{path}"), msg },
        other => other,
    }
}

/// Stratified FER estimate over the erasure channel.
///
/// `FER = Σ_ℓ P(L = ℓ) P(fail | L = ℓ)` with `L ~ Bin(N, 1-ε)` known digits.
/// Levels with `ℓ < K` fail surely. Each level `ℓ ≥ K` whose probability is at
/// least `1e-30` is simulated with `per_level` trials erasing exactly `N - ℓ`
/// uniformly chosen digits.
pub fn stratified_bec_fer(code: &GrsCode, eps: f64, per_level: u64, seed: u64, workers: usize) -> Result<StratifiedFer> {
    let pool = pool(workers)?;
    let big_n = code.len_p();
    let big_k = code.info_digits();
    let dec = BecDecoder::new(code);
    let ln_pmf = |l: usize| {
        let term = |cnt: usize, pr: f64| if cnt == 0 { 0.0 } else { cnt as f64 * pr.ln() };
        crate::code::ln_binomial(big_n, l) + term(l, 1.0 - eps) + term(big_n - l, eps)
    };
    let surely: f64 = (0..big_k.min(big_n + 1)).map(|l| ln_pmf(l).exp()).sum();
    let mut fer = surely;
    let mut var = 0.0;
    let mut levels = Vec::new();
    for l in big_k..=big_n {
        let w = ln_pmf(l).exp();
        if w < 1e-30 {
            continue;
        }
        let fails: u64 = pool.install(|| {
            (0..per_level)
                .into_par_iter()
                .map(|t| -> Result<u64> {
                    let mut rng = trial_rng(seed, l as u64, t);
                    let (v, _) = draw_message(code, None, &mut rng);
                    let out = bec_exact_erasures_rng(&code.encode_p(&v)?, big_n - l, &mut rng);
                    Ok(u64::from(dec.decode(&out).message != v))
                })
                .collect::<Result<Vec<u64>>>()
                .map(|v| v.iter().sum())
        })?;
        let ph = fails as f64 / per_level as f64;
        fer += w * ph;
        var += w * w * ph * (1.0 - ph) / per_level as f64;
        levels.push((l, fails));
    }
    Ok(StratifiedFer { fer, std_err: var.sqrt(), surely_failing: surely, levels })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StratifiedFer {
    pub fer: f64,
    pub std_err: f64,
    /// `P(L < K)`.
    pub surely_failing: f64,
    /// `(ℓ, failures)` per simulated level.
    pub levels: Vec<(usize, u64)>,
}
