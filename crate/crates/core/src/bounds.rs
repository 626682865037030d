//! Random-coding exponents, ensemble union bounds, the BEC rank approximation
//! and a Monte Carlo RCU bound for GRS coset ensembles.
//!
//! Exponents and rates use base-p logarithms; everything else is natural log.

use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{trial_rng, Modulation};
use crate::code::{ln_a_tilde, ln_binomial};
use crate::error::{Error, Result};
use crate::field::{Field, Gf};

/// Default Gauss–Hermite node count for continuous outputs.
pub const GH_NODES: usize = 64;

/// A memoryless channel with input alphabet `F_p`.
#[derive(Clone, Debug)]
pub enum DmcModel {
    /// `trans[i][j] = P(j | i)`.
    Discrete { q: Vec<f64>, trans: Vec<Vec<f64>> },
    /// Real output `y = amplitudes[i] + N(0, sigma2)`.
    Gaussian { q: Vec<f64>, amplitudes: Vec<f64>, sigma2: f64, nodes: usize },
}

fn check_dist(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (v.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidModel(format!("{what} is not a probability vector")));
    }
    Ok(())
}

impl DmcModel {
    pub fn discrete(q: Vec<f64>, trans: Vec<Vec<f64>>) -> Result<Self> {
        check_dist(&q, "input distribution")?;
        if trans.len() != q.len() || trans.is_empty() {
            return Err(Error::InvalidModel("one transition row per input required".into()));
        }
        let width = trans[0].len();
        for row in &trans {
            if row.len() != width {
                return Err(Error::InvalidModel("ragged transition matrix".into()));
            }
            check_dist(row, "transition row")?;
        }
        Ok(DmcModel::Discrete { q, trans })
    }

    pub fn uniform_discrete(trans: Vec<Vec<f64>>) -> Result<Self> {
        let p = trans.len();
        Self::discrete(vec![1.0 / p as f64; p], trans)
    }

    /// Binary erasure channel with outputs `{0, 1, e}`.
    pub fn bec(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidModel(format!("erasure probability {eps}")));
        }
        Self::uniform_discrete(vec![vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps]])
    }

    /// p-ary symmetric channel: correct with probability `1 - eps`.
    pub fn symmetric(p: usize, eps: f64) -> Result<Self> {
        let off = if p > 1 { eps / (p - 1) as f64 } else { 0.0 };
        let trans = (0..p).map(|i| (0..p).map(|j| if i == j { 1.0 - eps } else { off }).collect()).collect();
        Self::uniform_discrete(trans)
    }

    pub fn noiseless(p: usize) -> Self {
        Self::symmetric(p, 0.0).expect("identity channel")
    }

    pub fn awgn(modulation: Modulation, sigma2: f64) -> Result<Self> {
        Self::gaussian(modulation.amplitudes().to_vec(), sigma2)
    }

    pub fn gaussian(amplitudes: Vec<f64>, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidModel(format!("noise variance {sigma2}")));
        }
        let p = amplitudes.len();
        Ok(DmcModel::Gaussian { q: vec![1.0 / p as f64; p], amplitudes, sigma2, nodes: GH_NODES })
    }

    /// AWGN output quantized at the given increasing thresholds.
    pub fn quantized_awgn(modulation: Modulation, sigma2: f64, edges: &[f64]) -> Result<Self> {
        let sigma = sigma2.sqrt();
        let phi = |x: f64| 0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2);
        let trans = modulation
            .amplitudes()
            .iter()
            .map(|&a| {
                let mut cdf: Vec<f64> = edges.iter().map(|&t| phi((t - a) / sigma)).collect();
                cdf.insert(0, 0.0);
                cdf.push(1.0);
                let mut row: Vec<f64> = cdf.windows(2).map(|w| w[1] - w[0]).collect();
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= s);
                row
            })
            .collect();
        Self::uniform_discrete(trans)
    }

    /// Overrides the quadrature node count of a Gaussian model.
    pub fn with_nodes(self, n: usize) -> Self {
        match self {
            DmcModel::Gaussian { q, amplitudes, sigma2, .. } => DmcModel::Gaussian { q, amplitudes, sigma2, nodes: n },
            other => other,
        }
    }

    pub fn p(&self) -> usize {
        match self {
            DmcModel::Discrete { q, .. } | DmcModel::Gaussian { q, .. } => q.len(),
        }
    }

    /// `Σ_{i0} Q(i0) E_{y|i0}[g(ln r)]` with `ln r_i = ln f(y|i) - ln f(y|i0)`.
    fn gauss_expect(q: &[f64], amps: &[f64], sigma2: f64, nodes: usize, g: impl Fn(&[f64]) -> f64) -> f64 {
        let quad = GaussHermite::new(NonZeroUsize::new(nodes).expect("nodes > 0"));
        let scale = (2.0 * sigma2).sqrt();
        let mut lr = vec![0.0; amps.len()];
        let mut total = 0.0;
        for (i0, &a0) in amps.iter().enumerate() {
            if q[i0] == 0.0 {
                continue;
            }
            let e = quad.integrate(|t| {
                let y = a0 + scale * t;
                for (l, &a) in lr.iter_mut().zip(amps) {
                    *l = ((y - a0).powi(2) - (y - a).powi(2)) / (2.0 * sigma2);
                }
                g(&lr)
            });
            total += q[i0] * e / std::f64::consts::PI.sqrt();
        }
        total
    }
}

fn log_sum_exp(it: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = it.collect();
    let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + v.iter().map(|&x| (x - mx).exp()).sum::<f64>().ln()
}

/// Gallager function `E_0(ρ) = -log_p Σ_y (Σ_x Q(x) P(y|x)^{1/(1+ρ)})^{1+ρ}`.
pub fn e0(model: &DmcModel, rho: f64) -> f64 {
    let lnp = (model.p() as f64).ln();
    let s = 1.0 / (1.0 + rho);
    let inner = match model {
        DmcModel::Discrete { q, trans } => {
            let width = trans[0].len();
            (0..width)
                .map(|j| {
                    let a: f64 = q.iter().zip(trans).map(|(&qi, row)| if row[j] > 0.0 { qi * row[j].powf(s) } else { 0.0 }).sum();
                    a.powf(1.0 + rho)
                })
                .sum::<f64>()
        }
        DmcModel::Gaussian { q, amplitudes, sigma2, nodes } => {
            let lq: Vec<f64> = q.iter().map(|x| x.ln()).collect();
            DmcModel::gauss_expect(q, amplitudes, *sigma2, *nodes, |lr| {
                let num = (1.0 + rho) * log_sum_exp(lq.iter().zip(lr).map(|(a, l)| a + s * l));
                let den = log_sum_exp(lq.iter().zip(lr).map(|(a, l)| a + l));
                (num - den).exp()
            })
        }
    };
    (-inner.ln() / lnp).max(0.0)
}

/// `E_r(R) = max_{0≤ρ≤1} E_0(ρ) - ρR` by golden-section search.
pub fn er(model: &DmcModel, rate: f64) -> f64 {
    er_with_rho(model, rate).0
}

/// Exponent and maximizing ρ.
pub fn er_with_rho(model: &DmcModel, rate: f64) -> (f64, f64) {
    let f = |rho: f64| e0(model, rho) - rho * rate;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-9 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(f(mid), mid), (f(1.0), 1.0), (0.0, 0.0)]
        .into_iter()
        .fold((f64::NEG_INFINITY, 0.0), |best, x| if x.0 > best.0 { x } else { best })
}

/// Mutual information in base-p units under the model's input distribution.
pub fn mutual_information(model: &DmcModel) -> f64 {
    let lnp = (model.p() as f64).ln();
    let nats = match model {
        DmcModel::Discrete { q, trans } => {
            let width = trans[0].len();
            (0..width)
                .map(|j| {
                    let py: f64 = q.iter().zip(trans).map(|(&qi, r)| qi * r[j]).sum();
                    q.iter()
                        .zip(trans)
                        .filter(|(&qi, r)| qi > 0.0 && r[j] > 0.0)
                        .map(|(&qi, r)| qi * r[j] * (r[j] / py).ln())
                        .sum::<f64>()
                })
                .sum::<f64>()
        }
        DmcModel::Gaussian { q, amplitudes, sigma2, nodes } => {
            let lq: Vec<f64> = q.iter().map(|x| x.ln()).collect();
            DmcModel::gauss_expect(q, amplitudes, *sigma2, *nodes, |lr| -log_sum_exp(lq.iter().zip(lr).map(|(a, l)| a + l)))
        }
    };
    (nats / lnp).max(0.0)
}

pub fn bec_capacity(eps: f64) -> f64 {
    1.0 - eps
}

/// `ln Ã_w` over `w = 0..=n` for a spectrum given as natural logs (`-inf` for empty classes).
fn ln_tilde_spectrum(ln_spectrum: &[f64], q: u64) -> Vec<f64> {
    let n = ln_spectrum.len() - 1;
    ln_spectrum.iter().enumerate().map(|(w, &la)| ln_a_tilde(la, n, q, w)).collect()
}

/// `R̃_w = (1/N) log_p Ã_w` for every class, `N = n m`.
pub fn r_tilde_spectrum(ln_spectrum: &[f64], q: u64, m: u32) -> Vec<f64> {
    let n = ln_spectrum.len() - 1;
    let p = (q as f64).powf(1.0 / m as f64).round();
    let big_n = (n * m as usize) as f64;
    ln_tilde_spectrum(ln_spectrum, q).into_iter().map(|x| x / (big_n * p.ln())).collect()
}

/// `min{1, Σ_{w≥1} p^{-N E_r(R̃_w)}}` over the nonempty classes.
pub fn ensemble_union_bound(ln_spectrum: &[f64], q: u64, m: u32, model: &DmcModel) -> f64 {
    ln_ensemble_union_bound(ln_spectrum, q, m, model).exp().min(1.0)
}

/// Natural log of the unclipped union bound.
pub fn ln_ensemble_union_bound(ln_spectrum: &[f64], q: u64, m: u32, model: &DmcModel) -> f64 {
    let n = ln_spectrum.len() - 1;
    let big_n = (n * m as usize) as f64;
    let lnp = (model.p() as f64).ln();
    let rates = r_tilde_spectrum(ln_spectrum, q, m);
    log_sum_exp((1..=n).filter(|&w| ln_spectrum[w].is_finite()).map(|w| -big_n * er(model, rates[w]) * lnp))
}

/// BEC rank approximation:
/// `P(L < K) + Σ_{ℓ=K}^{N-(n-k+1)} P(L=ℓ) 2^{-(ℓ-K)}`, `L ~ Bin(N, 1-ε)` unerased bits.
pub fn approx_ub_bec(big_n: usize, big_k: usize, n: usize, k: usize, eps: f64) -> f64 {
    let ln_pmf = |l: usize| -> f64 {
        let term = |cnt: usize, pr: f64| if cnt == 0 { 0.0 } else { cnt as f64 * pr.ln() };
        ln_binomial(big_n, l) + term(l, 1.0 - eps) + term(big_n - l, eps)
    };
    let upper = big_n.saturating_sub(n - k + 1);
    let terms = (0..big_k.min(big_n + 1))
        .map(ln_pmf)
        .chain((big_k..=upper).map(|l| ln_pmf(l) - (l - big_k) as f64 * std::f64::consts::LN_2));
    log_sum_exp(terms).exp().clamp(0.0, 1.0)
}

/// Channel for the RCU estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RcuChannel {
    Bec { eps: f64 },
    Awgn { modulation: Modulation, sigma2: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RcuConfig {
    pub trials: usize,
    /// Samples of `C_w` per weight class and trial.
    pub pep_samples: usize,
    pub seed: u64,
    /// Draw a uniform coset shift per trial.
    pub random_shift: bool,
}

/// Sample mean with a 95% normal confidence interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: usize,
}

impl Estimate {
    pub fn from_samples(v: &[f64]) -> Estimate {
        let t = v.len() as f64;
        let mean = v.iter().sum::<f64>() / t;
        let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0) } else { 0.0 };
        let half = 1.96 * (var / t).sqrt();
        Estimate { mean, ci_low: (mean - half).max(0.0), ci_high: (mean + half).min(1.0), trials: v.len() }
    }
}

/// Monte Carlo estimate of `E[min{1, Σ_w A_w PEP_w(a, Y)}]`.
///
/// `ln_spectrum[w]` is `ln A_w` (or an upper bound), `-inf` for empty classes;
/// `w = 0` is ignored.
pub fn rcu_bound_grs(field: &Field, n: usize, ln_spectrum: &[f64], channel: RcuChannel, cfg: &RcuConfig) -> Result<Estimate> {
    if ln_spectrum.len() != n + 1 {
        return Err(Error::LengthMismatch { expected: n + 1, got: ln_spectrum.len() });
    }
    if cfg.trials == 0 || cfg.pep_samples == 0 {
        return Err(Error::config("rcu.trials", "trials and pep_samples must be positive"));
    }
    let p = field.p();
    let q = field.q() as usize;
    if let RcuChannel::Awgn { modulation, .. } = channel {
        if modulation.p() as u32 != p {
            return Err(Error::config("channel.modulation", format!("modulation is {}-ary but the field has p = {p}", modulation.p())));
        }
    }
    if n * q > 1 << 24 {
        return Err(Error::config("code", "n*q too large for the per-symbol metric table"));
    }
    let values: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| rcu_trial(field, n, ln_spectrum, channel, cfg, t as u64))
        .collect();
    Ok(Estimate::from_samples(&values))
}

fn rcu_trial(field: &Field, n: usize, ln_spectrum: &[f64], channel: RcuChannel, cfg: &RcuConfig, t: u64) -> f64 {
    let mut rng = trial_rng(cfg.seed, 0, t);
    let q = field.q();
    let m = field.m();
    let a: Vec<Gf> = (0..n).map(|_| if cfg.random_shift { rng.random_range(0..q) } else { 0 }).collect();
    // Per-digit log-likelihood of each input value.
    let p = field.p() as usize;
    let mut ll = vec![0f64; n * m as usize * p];
    for i in 0..n {
        for d in 0..m {
            let x = field.digit(a[i], d) as usize;
            let slot = &mut ll[(i * m as usize + d as usize) * p..][..p];
            match channel {
                RcuChannel::Bec { eps } => {
                    if !rng.random_bool(eps) {
                        slot.iter_mut().enumerate().for_each(|(b, v)| *v = if b == x { 0.0 } else { f64::NEG_INFINITY });
                    }
                }
                RcuChannel::Awgn { modulation, sigma2 } => {
                    let amps = modulation.amplitudes();
                    let g: f64 = rng.sample(StandardNormal);
                    let y = amps[x] + sigma2.sqrt() * g;
                    slot.iter_mut().enumerate().for_each(|(b, v)| *v = -(y - amps[b]).powi(2) / (2.0 * sigma2));
                }
            }
        }
    }
    // diff[i][c-1]: metric change when symbol i moves from a_i to a_i + c.
    let mut diff = vec![0f64; n * (q as usize - 1)];
    for i in 0..n {
        for c in 1..q {
            let b = field.add(a[i], c);
            let mut s = 0.0;
            for d in 0..m {
                let slot = &ll[(i * m as usize + d as usize) * p..][..p];
                s += slot[field.digit(b, d) as usize] - slot[field.digit(a[i], d) as usize];
            }
            diff[i * (q as usize - 1) + (c - 1) as usize] = s;
        }
    }
    let mut total = 0.0;
    for (w, &la) in ln_spectrum.iter().enumerate().skip(1) {
        if !la.is_finite() {
            continue;
        }
        let mut hits = 0usize;
        for _ in 0..cfg.pep_samples {
            let s: f64 = sample(&mut rng, n, w)
                .iter()
                .map(|i| diff[i * (q as usize - 1) + rng.random_range(0..q as usize - 1)])
                .sum();
            hits += usize::from(s >= 0.0);
        }
        total += la.exp() * hits as f64 / cfg.pep_samples as f64;
        if total >= 1.0 {
            return 1.0;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{ln_weight_class_bound, r_tilde_w};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};
    use proptest::prelude::*;

    #[test]
    fn e0_zero_at_rho_zero() {
        for m in [DmcModel::bec(0.3).unwrap(), DmcModel::symmetric(3, 0.2).unwrap(), DmcModel::awgn(Modulation::Pam3, 0.7).unwrap()] {
            assert!(e0(&m, 0.0).abs() < 1e-12);
        }
    }

    #[test]
    fn e0_bec_closed_form() {
        let m = DmcModel::bec(0.35).unwrap();
        for rho in [0.1, 0.4, 0.77, 1.0] {
            let want = -(2f64.powf(-rho) * 0.65 + 0.35).log2();
            assert!((e0(&m, rho) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn e0_slope_is_mutual_information() {
        for m in [DmcModel::bec(0.2).unwrap(), DmcModel::symmetric(3, 0.1).unwrap(), DmcModel::awgn(Modulation::Bpsk, 0.8).unwrap()] {
            let h = 1e-7;
            let slope = (e0(&m, h) - e0(&m, 0.0)) / h;
            assert!((slope - mutual_information(&m)).abs() < 1e-6, "{slope}");
        }
        assert!((mutual_information(&DmcModel::bec(0.2).unwrap()) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn er_matches_dense_grid() {
        let m = DmcModel::bec(0.5).unwrap();
        let grid = (0..=100_000).map(|i| i as f64 / 1e5).map(|r| e0(&m, r) - 0.25 * r).fold(0.0, f64::max);
        assert!((er(&m, 0.25) - grid).abs() < 1e-9);
    }

    #[test]
    fn er_vanishes_at_capacity() {
        for m in [DmcModel::bec(0.4).unwrap(), DmcModel::awgn(Modulation::Pam3, 0.5).unwrap()] {
            let i = mutual_information(&m);
            assert!(er(&m, i) <= 1e-6);
            assert!(er(&m, i - 1e-3) > 0.0);
            assert_eq!(er(&m, 1.5), 0.0);
        }
    }

    #[test]
    fn e0_concave_nondecreasing() {
        let edges = [-1.0, -0.3, 0.0, 0.3, 1.0];
        for m in [DmcModel::bec(0.25).unwrap(), DmcModel::quantized_awgn(Modulation::Bpsk, 0.9, &edges).unwrap()] {
            let v: Vec<f64> = (0..=50).map(|i| e0(&m, i as f64 / 50.0)).collect();
            for w in v.windows(3) {
                assert!(w[1] >= w[0] - 1e-12);
                assert!(w[1] - w[0] >= w[2] - w[1] - 1e-12);
            }
        }
    }

    #[test]
    fn mutual_information_limits() {
        assert!((mutual_information(&DmcModel::noiseless(3)) - 1.0).abs() < 1e-12);
        assert!((mutual_information(&DmcModel::noiseless(2)) - 1.0).abs() < 1e-12);
        assert!(mutual_information(&DmcModel::awgn(Modulation::Bpsk, 1e4).unwrap()) < 1e-3);
        // Unit SNR binary-input AWGN capacity.
        assert!((mutual_information(&DmcModel::awgn(Modulation::Bpsk, 1.0).unwrap()) - 0.4859).abs() < 1e-3);
        assert_eq!(bec_capacity(0.3), 0.7);
    }

    #[test]
    fn quadrature_converges_on_doubling() {
        for (modu, s2) in [(Modulation::Bpsk, 0.3), (Modulation::Pam3, 0.2), (Modulation::Pam3, 2.0)] {
            let a = DmcModel::awgn(modu, s2).unwrap();
            let b = a.clone().with_nodes(2 * GH_NODES);
            assert!((mutual_information(&a) - mutual_information(&b)).abs() < 1e-6);
            for rho in [0.3, 1.0] {
                assert!((e0(&a, rho) - e0(&b, rho)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rows_must_sum_to_one() {
        assert!(DmcModel::uniform_discrete(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).is_err());
        assert!(DmcModel::bec(1.2).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn er_is_nonincreasing(eps in 0.0f64..0.9, r1 in 0.0f64..1.0, r2 in 0.0f64..1.0) {
            let m = DmcModel::bec(eps).unwrap();
            let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            prop_assert!(er(&m, lo) >= er(&m, hi) - 1e-9);
        }
    }

    fn class_bounds(n: usize, k: usize, q: u64) -> Vec<f64> {
        (0..=n).map(|w| ln_weight_class_bound(n, k, q, w)).collect()
    }

    #[test]
    fn union_bound_empty_spectrum() {
        let mut s = vec![f64::NEG_INFINITY; 8];
        s[0] = 0.0;
        assert_eq!(ensemble_union_bound(&s, 8, 3, &DmcModel::bec(0.2).unwrap()), 0.0);
    }

    #[test]
    fn union_bound_below_max_rate_form() {
        let (n, k, q, m) = (15usize, 5usize, 16u64, 4u32);
        let spec = class_bounds(n, k, q);
        let model = DmcModel::bec(0.1).unwrap();
        let rates = r_tilde_spectrum(&spec, q, m);
        let rmax = (1..=n).filter(|&w| spec[w].is_finite()).map(|w| rates[w]).fold(f64::NEG_INFINITY, f64::max);
        for w in n - k + 1..=n {
            assert!((rates[w] - r_tilde_w(n, k, q, m, w)).abs() < 1e-12);
        }
        let simple = n as f64 * 2f64.powf(-((n * m as usize) as f64) * er(&model, rmax));
        let ub = ensemble_union_bound(&spec, q, m, &model);
        assert!(ub <= simple.min(1.0) + 1e-15);
        assert!(ub > 0.0);
    }

    fn approx_ub_exact(big_n: usize, big_k: usize, n: usize, k: usize, eps: BigRational) -> BigRational {
        let one = BigRational::one();
        let keep = &one - &eps;
        let pmf = |l: usize| -> BigRational {
            let c = crate::code::binomial(big_n, l);
            BigRational::from_integer(BigInt::from(c)) * num_traits::pow(keep.clone(), l) * num_traits::pow(eps.clone(), big_n - l)
        };
        let mut acc = BigRational::zero();
        for l in 0..big_k {
            acc += pmf(l);
        }
        for l in big_k..=big_n - (n - k + 1) {
            acc += pmf(l) / BigRational::from_integer(BigInt::from(2u32).pow((l - big_k) as u32));
        }
        acc
    }

    #[test]
    fn approx_ub_matches_rational_sum() {
        let eps = BigRational::new(BigInt::from(1), BigInt::from(10));
        let want = approx_ub_exact(8, 4, 4, 2, eps).to_f64().unwrap();
        assert!((approx_ub_bec(8, 4, 4, 2, 0.1) - want).abs() < 1e-12 * want);
        let eps = BigRational::new(BigInt::from(9), BigInt::from(20));
        let want = approx_ub_exact(60, 30, 15, 5, eps).to_f64().unwrap();
        assert!(((approx_ub_bec(60, 30, 15, 5, 0.45) - want) / want).abs() < 1e-10);
    }

    #[test]
    fn approx_ub_endpoints() {
        assert_eq!(approx_ub_bec(1024, 512, 128, 64, 0.0), 0.0);
        assert_eq!(approx_ub_bec(1024, 512, 128, 64, 1.0), 1.0);
        let v: Vec<f64> = (1..20).map(|i| approx_ub_bec(256, 128, 32, 16, i as f64 / 20.0)).collect();
        assert!(v.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }

    #[test]
    fn rcu_noiseless_and_clamped() {
        let f = Field::with_default(2, 3).unwrap();
        let spec = class_bounds(7, 3, 8);
        let cfg = RcuConfig { trials: 50, pep_samples: 20, seed: 1, random_shift: false };
        let e = rcu_bound_grs(&f, 7, &spec, RcuChannel::Bec { eps: 0.0 }, &cfg).unwrap();
        assert_eq!(e.mean, 0.0);
        let e = rcu_bound_grs(&f, 7, &spec, RcuChannel::Awgn { modulation: Modulation::Bpsk, sigma2: 1e-6 }, &cfg).unwrap();
        assert_eq!(e.mean, 0.0);
        let e = rcu_bound_grs(&f, 7, &spec, RcuChannel::Bec { eps: 0.9 }, &cfg).unwrap();
        assert!(e.mean <= 1.0 && e.mean > 0.9);
        assert!(rcu_bound_grs(&f, 7, &spec, RcuChannel::Awgn { modulation: Modulation::Pam3, sigma2: 1.0 }, &cfg).is_err());
    }

    #[test]
    fn rcu_is_deterministic() {
        let f = Field::with_default(3, 2).unwrap();
        let spec = class_bounds(8, 4, 9);
        let cfg = RcuConfig { trials: 40, pep_samples: 50, seed: 9, random_shift: true };
        let ch = RcuChannel::Awgn { modulation: Modulation::Pam3, sigma2: 0.4 };
        assert_eq!(rcu_bound_grs(&f, 8, &spec, ch, &cfg).unwrap(), rcu_bound_grs(&f, 8, &spec, ch, &cfg).unwrap());
    }
}
