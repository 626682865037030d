//! Erasure and Gaussian channels with hard decisions and reliabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Cap applied to log-likelihood ratios and per-position costs.
pub const LLR_CAP: f64 = 300.0;

/// 3PAM amplitude giving unit average energy, `sqrt(3/2)`.
pub const PAM3_A: f64 = 1.224_744_871_391_589;

/// Per-digit BEC output; `None` marks an erasure.
pub type BecOutput = Vec<Option<u8>>;

/// Digit-to-amplitude mapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulation {
    /// 0 -> +1, 1 -> -1.
    Bpsk,
    /// 0 -> -A, 1 -> 0, 2 -> +A.
    Pam3,
    /// 0 -> -A, 1 -> +A, 2 -> 0.
    Pam3Swapped,
}

impl Modulation {
    pub fn p(self) -> u8 {
        match self {
            Modulation::Bpsk => 2,
            Modulation::Pam3 | Modulation::Pam3Swapped => 3,
        }
    }

    pub fn amplitudes(self) -> &'static [f64] {
        match self {
            Modulation::Bpsk => &[1.0, -1.0],
            Modulation::Pam3 => &[-PAM3_A, 0.0, PAM3_A],
            Modulation::Pam3Swapped => &[-PAM3_A, PAM3_A, 0.0],
        }
    }
}

/// Soft channel output with decisions folded against the coset shift.
///
/// `z` is the hard decision on the unshifted word, so `z - e` is a codeword of
/// the linear part for the right error pattern `e`.
#[derive(Clone, Debug)]
pub struct SoftOutput {
    pub p: u8,
    pub y: Vec<f64>,
    pub z: Vec<u8>,
    /// For p = 2 the signed LLR of the unshifted digit (`z = 0` iff `r >= 0`);
    /// for p > 2 the best-to-second-best log-likelihood ratio (non-negative).
    pub r: Vec<f64>,
    /// `costs[i*(p-1) + e-1] = γ_i(e)` for `e = 1..p`.
    pub costs: Vec<f64>,
    pub sigma2: f64,
}

impl SoftOutput {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Non-negative reliability of position `i`.
    #[inline]
    pub fn reliability(&self, i: usize) -> f64 {
        self.r[i].abs()
    }

    /// `γ_i(e)`, zero for `e = 0`.
    #[inline]
    pub fn cost(&self, i: usize, e: u8) -> f64 {
        if e == 0 {
            0.0
        } else {
            self.costs[i * (self.p as usize - 1) + e as usize - 1]
        }
    }
}

/// Noise variance for E_b/N_0 in dB at `bc` information bits per channel use.
pub fn sigma2_from_ebn0(ebn0_db: f64, bc: f64) -> f64 {
    1.0 / (2.0 * bc * 10f64.powf(ebn0_db / 10.0))
}

/// E_s/N_0 in dB for a given E_b/N_0 and rate.
pub fn es_n0_db(ebn0_db: f64, bc: f64) -> f64 {
    ebn0_db + 10.0 * bc.log10()
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of trial `trial` at grid point `grid` under `master`.
pub fn trial_seed(master: u64, grid: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ grid) ^ trial)
}

pub fn trial_rng(master: u64, grid: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, grid, trial))
}

/// Erases each digit independently with probability `eps`.
pub fn bec_transmit_rng<R: Rng + ?Sized>(x: &[u8], eps: f64, rng: &mut R) -> BecOutput {
    x.iter().map(|&b| if rng.random::<f64>() < eps { None } else { Some(b) }).collect()
}

/// Erases exactly `count` positions chosen uniformly.
pub fn bec_exact_erasures_rng<R: Rng + ?Sized>(x: &[u8], count: usize, rng: &mut R) -> BecOutput {
    let mut out: BecOutput = x.iter().map(|&b| Some(b)).collect();
    for i in rand::seq::index::sample(rng, x.len(), count) {
        out[i] = None;
    }
    out
}

pub fn bec_transmit(x: &[u8], eps: f64, seed: u64) -> BecOutput {
    bec_transmit_rng(x, eps, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Hard decisions, reliabilities and costs from observations `y`.
pub fn soft_from_observation(y: Vec<f64>, a_p: &[u8], modulation: Modulation, sigma2: f64) -> SoftOutput {
    let p = modulation.p();
    let amps = modulation.amplitudes();
    let n = y.len();
    let mut z = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    let mut costs = Vec::with_capacity(n * (p as usize - 1));
    let mut ll = [0f64; 8];
    for (i, &yi) in y.iter().enumerate() {
        let a = a_p.get(i).copied().unwrap_or(0);
        for beta in 0..p {
            let s = amps[((beta + a) % p) as usize];
            ll[beta as usize] = -(yi - s) * (yi - s) / (2.0 * sigma2);
        }
        let mut best = 0u8;
        for beta in 1..p {
            if ll[beta as usize] > ll[best as usize] {
                best = beta;
            }
        }
        z.push(best);
        if p == 2 {
            r.push((ll[0] - ll[1]).clamp(-LLR_CAP, LLR_CAP));
        } else {
            let second = (0..p).filter(|&b| b != best).map(|b| ll[b as usize]).fold(f64::NEG_INFINITY, f64::max);
            r.push((ll[best as usize] - second).min(LLR_CAP));
        }
        for e in 1..p {
            let other = (best + p - e) % p;
            costs.push((ll[best as usize] - ll[other as usize]).min(LLR_CAP));
        }
    }
    SoftOutput { p, y, z, r, costs, sigma2 }
}

/// Modulates `x` (already shifted), adds Gaussian noise of variance `sigma2`.
pub fn awgn_transmit_rng<R: Rng + ?Sized>(
    x: &[u8],
    a_p: &[u8],
    modulation: Modulation,
    sigma2: f64,
    rng: &mut R,
) -> SoftOutput {
    let amps = modulation.amplitudes();
    let sigma = sigma2.sqrt();
    let y = x
        .iter()
        .map(|&b| {
            let g: f64 = rng.sample(StandardNormal);
            amps[b as usize] + sigma * g
        })
        .collect();
    soft_from_observation(y, a_p, modulation, sigma2)
}

pub fn bpsk_awgn_transmit(x: &[u8], a_p: &[u8], ebn0_db: f64, bc: f64, seed: u64) -> SoftOutput {
    let s2 = sigma2_from_ebn0(ebn0_db, bc);
    awgn_transmit_rng(x, a_p, Modulation::Bpsk, s2, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn pam3_awgn_transmit(x: &[u8], a_p: &[u8], ebn0_db: f64, bc: f64, seed: u64) -> SoftOutput {
    let s2 = sigma2_from_ebn0(ebn0_db, bc);
    awgn_transmit_rng(x, a_p, Modulation::Pam3, s2, &mut ChaCha8Rng::seed_from_u64(seed))
}
