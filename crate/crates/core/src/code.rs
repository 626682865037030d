//! Generalized Reed–Solomon coset codes and their p-ary images.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{format_poly, parse_poly, Field, Gf};
use crate::linalg::FpMatrix;

/// Column multiplier exponents `j_i` (multiplier `α^{j_i}`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Multipliers {
    Zero,
    Random,
    Explicit(Vec<u32>),
}

/// Coset shift vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shift {
    Zero,
    Random,
    Explicit(Vec<Gf>),
}

/// A GRS coset code `c_i = v_i u(x_i) + a_i` with `deg u < k`.
///
/// The p-ary message has `info_digits` digits. When that is less than `k*m`
/// the top coordinates of the leading coefficient `u_{k-1}` are frozen to zero.
#[derive(Clone, Debug)]
pub struct GrsCode {
    field: Arc<Field>,
    n: usize,
    k: usize,
    info_digits: usize,
    extended: bool,
    seed: u64,
    j: Vec<u32>,
    v: Vec<Gf>,
    a: Vec<Gf>,
    x: Vec<Gf>,
}

/// The p-ary image: generator, parity-check and shift over F_p.
#[derive(Clone, Debug)]
pub struct PAryImage {
    pub g: FpMatrix,
    pub h: FpMatrix,
    pub a_p: Vec<u8>,
}

/// Serializable code description; pins a code exactly across runs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDesc {
    pub p: u32,
    pub m: u32,
    pub f: String,
    pub n: usize,
    pub k: usize,
    pub j: Vec<u32>,
    pub a: Vec<Gf>,
    pub seed: u64,
    #[serde(default)]
    pub extended: bool,
    #[serde(default)]
    pub info_digits: Option<usize>,
}

impl GrsCode {
    /// Builds a code with `k*m` information digits.
    pub fn new(
        field: Arc<Field>,
        n: usize,
        k: usize,
        j: Multipliers,
        a: Shift,
        seed: u64,
        extended: bool,
    ) -> Result<GrsCode> {
        let m = field.m() as usize;
        Self::with_info_digits(field, n, k, k * m, j, a, seed, extended)
    }

    /// Builds a code whose p-ary message has `info_digits` digits, `(k-1)m < info_digits <= km`.
    #[allow(clippy::too_many_arguments)]
    pub fn with_info_digits(
        field: Arc<Field>,
        n: usize,
        k: usize,
        info_digits: usize,
        j: Multipliers,
        a: Shift,
        seed: u64,
        extended: bool,
    ) -> Result<GrsCode> {
        let q = field.q() as usize;
        let m = field.m() as usize;
        if k == 0 || k >= n {
            return Err(Error::Dimension(format!("need 0 < k < n, got n={n}, k={k}")));
        }
        let max_n = if extended { q } else { q - 1 };
        if n > max_n {
            return Err(Error::FieldTooSmall(format!(
                "n={n} exceeds {max_n} evaluation points of GF({q}){}",
                if extended { "" } else { " (enable the x=0 extension for n = q)" }
            )));
        }
        if info_digits > k * m || info_digits <= (k - 1) * m {
            return Err(Error::Dimension(format!(
                "info digits {info_digits} must lie in ({}, {}]",
                (k - 1) * m,
                k * m
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = match j {
            Multipliers::Zero => vec![0; n],
            Multipliers::Random => (0..n).map(|_| rng.random_range(0..field.q() - 1)).collect(),
            Multipliers::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::LengthMismatch { expected: n, got: v.len() });
                }
                if let Some(&bad) = v.iter().find(|&&e| e >= field.q() - 1) {
                    return Err(Error::Dimension(format!("multiplier exponent {bad} not below q-1")));
                }
                v
            }
        };
        let a = match a {
            Shift::Zero => vec![0; n],
            Shift::Random => (0..n).map(|_| rng.random_range(0..field.q())).collect(),
            Shift::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::LengthMismatch { expected: n, got: v.len() });
                }
                if let Some(&bad) = v.iter().find(|&&e| e >= field.q()) {
                    return Err(Error::Dimension(format!("shift component {bad} not in the field")));
                }
                v
            }
        };
        let v = j.iter().map(|&e| field.alpha_pow(e as i64)).collect();
        let x = (0..n)
            .map(|i| if extended && i == n - 1 { 0 } else { field.alpha_pow(i as i64) })
            .collect();
        Ok(GrsCode { field, n, k, info_digits, extended, seed, j, v, a, x })
    }

    pub fn from_desc(desc: &CodeDesc) -> Result<GrsCode> {
        let poly = parse_poly(&desc.f)?;
        let field = Arc::new(Field::new(desc.p, desc.m, &poly)?);
        let kd = desc.info_digits.unwrap_or(desc.k * desc.m as usize);
        GrsCode::with_info_digits(
            field,
            desc.n,
            desc.k,
            kd,
            Multipliers::Explicit(desc.j.clone()),
            Shift::Explicit(desc.a.clone()),
            desc.seed,
            desc.extended,
        )
    }

    pub fn to_desc(&self) -> CodeDesc {
        CodeDesc {
            p: self.field.p(),
            m: self.field.m(),
            f: format_poly(self.field.poly()),
            n: self.n,
            k: self.k,
            j: self.j.clone(),
            a: self.a.clone(),
            seed: self.seed,
            extended: self.extended,
            info_digits: Some(self.info_digits),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<Field> {
        self.field.clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.field.m() as usize
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    /// Number of p-ary information digits.
    pub fn info_digits(&self) -> usize {
        self.info_digits
    }

    /// Number of frozen message digits.
    pub fn frozen(&self) -> usize {
        self.k * self.m() - self.info_digits
    }

    /// p-ary length `n*m`.
    pub fn len_p(&self) -> usize {
        self.n * self.m()
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn exponents(&self) -> &[u32] {
        &self.j
    }

    pub fn multipliers(&self) -> &[Gf] {
        &self.v
    }

    pub fn shift(&self) -> &[Gf] {
        &self.a
    }

    pub fn points(&self) -> &[Gf] {
        &self.x
    }

    /// Information digits per channel digit times log2 p.
    pub fn bits_per_use(&self) -> f64 {
        self.info_digits as f64 * (self.p() as f64).log2() / self.len_p() as f64
    }

    /// The shift as p-ary digits.
    pub fn shift_p(&self) -> Vec<u8> {
        self.symbols_to_digits(&self.a)
    }

    pub fn symbols_to_digits(&self, c: &[Gf]) -> Vec<u8> {
        c.iter().flat_map(|&s| self.field.phi_inv(s)).collect()
    }

    pub fn digits_to_symbols(&self, d: &[u8]) -> Vec<Gf> {
        d.chunks(self.m()).map(|ch| self.field.phi(ch).expect("digit chunk")).collect()
    }

    /// Codeword of the linear part (no shift).
    pub fn encode_linear(&self, u: &[Gf]) -> Result<Vec<Gf>> {
        if u.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: u.len() });
        }
        let f = &*self.field;
        Ok((0..self.n)
            .map(|i| {
                let ux = u.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, self.x[i]), c));
                f.mul(self.v[i], ux)
            })
            .collect())
    }

    /// `c_i = α^{j_i} u(x_i) + a_i`.
    pub fn encode(&self, u: &[Gf]) -> Result<Vec<Gf>> {
        let f = &*self.field;
        let mut c = self.encode_linear(u)?;
        for (ci, &ai) in c.iter_mut().zip(&self.a) {
            *ci = f.add(*ci, ai);
        }
        Ok(c)
    }

    /// Message polynomial from p-ary information digits; frozen digits are zero.
    pub fn message_from_digits(&self, v: &[u8]) -> Result<Vec<Gf>> {
        if v.len() != self.info_digits {
            return Err(Error::LengthMismatch { expected: self.info_digits, got: v.len() });
        }
        let m = self.m();
        let mut padded = v.to_vec();
        padded.resize(self.k * m, 0);
        padded.chunks(m).map(|ch| self.field.phi(ch)).collect()
    }

    /// Information digits of a message polynomial (frozen digits dropped).
    pub fn digits_from_message(&self, u: &[Gf]) -> Vec<u8> {
        let mut d = self.symbols_to_digits(u);
        d.truncate(self.info_digits);
        d
    }

    /// `phi_inv(encode(phi(v)))` on p-ary digits.
    pub fn encode_p(&self, v: &[u8]) -> Result<Vec<u8>> {
        let u = self.message_from_digits(v)?;
        Ok(self.symbols_to_digits(&self.encode(&u)?))
    }

    /// Recovers the message polynomial from a codeword of the linear part,
    /// interpolating on the first k symbols.
    pub fn unencode_linear(&self, c: &[Gf]) -> Vec<Gf> {
        let idx: Vec<usize> = (0..self.k).collect();
        let vals: Vec<Gf> = idx.iter().map(|&i| c[i]).collect();
        self.interpolate(&idx, &vals)
    }

    /// Message polynomial u with `v_i u(x_i) = vals[t]` at `i = idx[t]`; needs `|idx| = k`.
    pub fn interpolate(&self, idx: &[usize], vals: &[Gf]) -> Vec<Gf> {
        assert_eq!(idx.len(), self.k);
        let f = &*self.field;
        let k = self.k;
        let xs: Vec<Gf> = idx.iter().map(|&i| self.x[i]).collect();
        let ys: Vec<Gf> = idx.iter().zip(vals).map(|(&i, &c)| f.mul(c, f.inv_nz(self.v[i]))).collect();

        // master[d] is the coefficient of x^d in Π (x - x_t).
        let mut master = vec![0 as Gf; k + 1];
        master[0] = 1;
        for (deg, &xt) in xs.iter().enumerate() {
            for d in (0..=deg + 1).rev() {
                let lower = if d > 0 { master[d - 1] } else { 0 };
                master[d] = f.sub(lower, f.mul(xt, master[d]));
            }
        }
        let mut u = vec![0 as Gf; k];
        let mut quot = vec![0 as Gf; k];
        for t in 0..k {
            if ys[t] == 0 {
                continue;
            }
            // master / (x - x_t) by synthetic division.
            let mut carry = 0;
            for d in (0..k).rev() {
                carry = f.add(master[d + 1], f.mul(carry, xs[t]));
                quot[d] = carry;
            }
            let denom = quot.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, xs[t]), c));
            let w = f.mul(ys[t], f.inv_nz(denom));
            for d in 0..k {
                u[d] = f.add(u[d], f.mul(w, quot[d]));
            }
        }
        u
    }

    /// Dual code multipliers `1 / (v_i Π_{j≠i}(x_i - x_j))`.
    pub fn dual_multipliers(&self) -> Vec<Gf> {
        let f = &*self.field;
        (0..self.n)
            .map(|i| {
                let prod = (0..self.n)
                    .filter(|&j| j != i)
                    .fold(self.v[i], |acc, j| f.mul(acc, f.sub(self.x[i], self.x[j])));
                f.inv_nz(prod)
            })
            .collect()
    }

    /// The dual GRS code (linear part only).
    pub fn dual(&self) -> GrsCode {
        let dv = self.dual_multipliers();
        let j = dv.iter().map(|&v| self.field.log(v).expect("nonzero")).collect();
        GrsCode::new(
            self.field.clone(),
            self.n,
            self.n - self.k,
            Multipliers::Explicit(j),
            Shift::Zero,
            self.seed,
            self.extended,
        )
        .expect("dual dimensions are valid")
    }

    /// Symbol-level generator matrix: row i is the codeword of `u = x^i`.
    pub fn generator(&self) -> Vec<Vec<Gf>> {
        let f = &*self.field;
        (0..self.k)
            .map(|i| (0..self.n).map(|j| f.mul(self.v[j], f.pow(self.x[j], i as u64))).collect())
            .collect()
    }

    /// p-ary generator and parity-check matrices and the shift digits.
    pub fn image_matrices(&self) -> PAryImage {
        let f = &*self.field;
        let m = self.m();
        let p = f.p() as u8;
        let big_n = self.len_p();
        let gen = self.generator();
        let mut g = FpMatrix::zeros(p, self.info_digits, big_n);
        for d in 0..self.info_digits {
            let (i, t) = (d / m, d % m);
            let at = f.alpha_pow(t as i64);
            for j in 0..self.n {
                let s = f.mul(at, gen[i][j]);
                for c in 0..m {
                    g.set(d, j * m + c, f.digit(s, c as u32));
                }
            }
        }
        let h = if self.frozen() == 0 {
            let dual = self.dual().generator();
            let mut h = FpMatrix::zeros(p, (self.n - self.k) * m, big_n);
            // Transposed blocks make the digit inner product match the field product.
            for (r, row) in dual.iter().enumerate() {
                for (j, &hs) in row.iter().enumerate() {
                    let mut cur = hs;
                    for c in 0..m {
                        for t in 0..m {
                            h.set(r * m + t, j * m + c, f.digit(cur, t as u32));
                        }
                        cur = f.mul(cur, f.alpha_pow(1));
                    }
                }
            }
            h
        } else {
            g.nullspace()
        };
        PAryImage { g, h, a_p: self.shift_p() }
    }
}

/// Binomial coefficient as a big integer.
pub fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Natural logarithm of a big integer (`-inf` for zero).
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("finite");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of C(n, r) via the log-gamma function.
pub fn ln_binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return f64::NEG_INFINITY;
    }
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
        - statrs::function::gamma::ln_gamma(r as f64 + 1.0)
        - statrs::function::gamma::ln_gamma((n - r) as f64 + 1.0)
}

/// Upper bound `q^{k-(n-w)} C(n,w)` on the number of weight-w codewords.
///
/// Returns zero for `1 <= w <= n-k` (below the minimum distance) and for `w = 0`
/// returns 1 (the zero word).
pub fn weight_class_bound(n: usize, k: usize, q: u64, w: usize) -> Result<BigUint> {
    if w > n {
        return Err(Error::OutOfRange { w, n });
    }
    if w == 0 {
        return Ok(BigUint::one());
    }
    if w + k <= n {
        return Ok(BigUint::zero());
    }
    Ok(BigUint::from(q).pow((k + w - n) as u32) * binomial(n, w))
}

/// Natural log of the class bound, `-inf` for empty classes.
pub fn ln_weight_class_bound(n: usize, k: usize, q: u64, w: usize) -> f64 {
    if w == 0 {
        return 0.0;
    }
    if w > n || w + k <= n {
        return f64::NEG_INFINITY;
    }
    (k + w - n) as f64 * (q as f64).ln() + ln_binomial(n, w)
}

/// Exact MDS weight distribution `A_w` for an `[n,k]` MDS code over GF(q).
pub fn mds_weight_distribution(n: usize, k: usize, q: u64) -> Vec<BigUint> {
    let d = n - k + 1;
    let mut out = vec![BigUint::zero(); n + 1];
    out[0] = BigUint::one();
    for (w, slot) in out.iter_mut().enumerate().skip(d) {
        // A_w = C(n,w) Σ_{j=0}^{w-d} (-1)^j C(w,j) (q^{w-d+1-j} - 1)
        let (mut pos, mut neg) = (BigUint::zero(), BigUint::zero());
        for j in 0..=w - d {
            let term = binomial(w, j) * (BigUint::from(q).pow((w - d + 1 - j) as u32) - BigUint::one());
            if j % 2 == 0 {
                pos += term;
            } else {
                neg += term;
            }
        }
        *slot = binomial(n, w) * (pos - neg);
    }
    out
}

/// Exact weight spectrum of the linear part by enumerating all `q^k` messages.
///
/// Refuses codes with more than `2^24` codewords.
pub fn exact_spectrum(code: &GrsCode) -> Result<Vec<u64>> {
    let q = code.field().q() as u64;
    let total = q.checked_pow(code.k() as u32).filter(|&t| t <= 1 << 24);
    let Some(total) = total else {
        return Err(Error::Dimension("code too large for exhaustive enumeration".into()));
    };
    let mut counts = vec![0u64; code.n() + 1];
    let mut u = vec![0 as Gf; code.k()];
    for idx in 0..total {
        let mut t = idx;
        for s in u.iter_mut() {
            *s = (t % q) as Gf;
            t /= q;
        }
        let c = code.encode_linear(&u)?;
        counts[c.iter().filter(|&&s| s != 0).count()] += 1;
    }
    Ok(counts)
}

/// `ln Ã_w = ln A_w + n ln q - w ln(q-1) - ln C(n,w)`.
pub fn ln_a_tilde(ln_aw: f64, n: usize, q: u64, w: usize) -> f64 {
    ln_aw + n as f64 * (q as f64).ln() - w as f64 * ((q - 1) as f64).ln() - ln_binomial(n, w)
}

/// Ã_w from the class bound.
pub fn a_tilde(n: usize, k: usize, q: u64, w: usize) -> f64 {
    ln_a_tilde(ln_weight_class_bound(n, k, q, w), n, q, w).exp()
}

/// `R̃_w = (1/N) log_p Ã_w` with `N = n m`, from the class bound.
pub fn r_tilde_w(n: usize, k: usize, q: u64, m: u32, w: usize) -> f64 {
    let p = (q as f64).powf(1.0 / m as f64);
    ln_a_tilde(ln_weight_class_bound(n, k, q, w), n, q, w) / ((n * m as usize) as f64 * p.ln())
}
