//! Arithmetic in GF(p^m).
//!
//! An element is a `u32` in `0..q` whose base-p digits are its coordinates in
//! the polynomial basis `1, α, …, α^{m-1}`.

use crate::error::{Error, Result};
use crate::linalg::{mod_mul, FpMatrix};

/// An element of GF(p^m), stored as its coordinate index.
pub type Gf = u32;

const TABLE_LIMIT: u64 = 1 << 20;
const ADD_TABLE_LIMIT: u32 = 1024;

/// A validated extension field GF(p^m) with its primitive element α.
#[derive(Clone, Debug)]
pub struct Field {
    p: u32,
    m: u32,
    q: u32,
    poly: Vec<u32>,
    /// `exp[i] = α^i` for `i < 2(q-1)`; empty when q is too large for tables.
    exp: Vec<Gf>,
    log: Vec<u32>,
    add: Vec<Gf>,
    neg: Vec<Gf>,
    companion: FpMatrix,
}

/// Built-in primitive polynomials, ascending coefficients with the leading 1.
pub fn default_poly(p: u32, m: u32) -> Option<Vec<u32>> {
    let v: &[u32] = match (p, m) {
        (2, 1) => &[1, 1],
        (2, 2) => &[1, 1, 1],
        (2, 3) => &[1, 1, 0, 1],
        (2, 4) => &[1, 1, 0, 0, 1],
        (2, 5) => &[1, 0, 1, 0, 0, 1],
        (2, 6) => &[1, 1, 0, 0, 0, 0, 1],
        (2, 7) => &[1, 1, 0, 0, 0, 0, 0, 1],
        (2, 8) => &[1, 0, 1, 1, 1, 0, 0, 0, 1],
        (2, 9) => &[1, 0, 0, 0, 1, 0, 0, 0, 0, 1],
        (2, 10) => &[1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1],
        (2, 11) => &[1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1],
        (2, 12) => &[1, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 1],
        (3, 1) => &[1, 1],
        (3, 2) => &[2, 1, 1],
        (3, 3) => &[1, 2, 0, 1],
        (3, 4) => &[2, 1, 0, 0, 1],
        (3, 5) => &[1, 2, 0, 0, 0, 1],
        (3, 6) => &[2, 1, 0, 0, 0, 0, 1],
        _ => return None,
    };
    Some(v.to_vec())
}

/// Parses "c0,c1,…,cm" (ascending powers) into coefficients.
pub fn parse_poly(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidField(format!("bad polynomial coefficient {t:?}")))
        })
        .collect()
}

/// Formats coefficients in the same ascending comma form accepted by [`parse_poly`].
pub fn format_poly(poly: &[u32]) -> String {
    poly.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Polynomial arithmetic modulo the defining polynomial, independent of any tables.
struct PolyRing<'a> {
    p: u32,
    poly: &'a [u32],
}

impl PolyRing<'_> {
    fn m(&self) -> usize {
        self.poly.len() - 1
    }

    fn mul(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let m = self.m();
        let p = self.p as u64;
        let mut prod = vec![0u64; 2 * m];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        for d in (m..2 * m).rev() {
            let c = prod[d];
            if c != 0 {
                for (j, &f) in self.poly[..m].iter().enumerate() {
                    prod[d - m + j] = (prod[d - m + j] + (p - c) * f as u64) % p;
                }
                prod[d] = 0;
            }
        }
        prod[..m].iter().map(|&v| v as u32).collect()
    }

    fn pow(&self, base: &[u32], mut e: u64) -> Vec<u32> {
        let mut result = vec![0u32; self.m()];
        result[0] = 1;
        let mut b = base.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        result
    }

    fn x(&self) -> Vec<u32> {
        let m = self.m();
        if m == 1 {
            vec![(self.p - self.poly[0] % self.p) % self.p]
        } else {
            let mut v = vec![0; m];
            v[1] = 1;
            v
        }
    }
}

fn to_index(p: u32, digits: &[u32]) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn to_digits(p: u32, m: u32, mut a: u32) -> Vec<u32> {
    (0..m)
        .map(|_| {
            let d = a % p;
            a /= p;
            d
        })
        .collect()
}

impl Field {
    /// Builds GF(p^m) from a monic primitive polynomial of degree m.
    pub fn new(p: u32, m: u32, poly: &[u32]) -> Result<Field> {
        if !is_prime(p) || p > 251 {
            return Err(Error::InvalidField(format!("characteristic {p} is not a supported prime")));
        }
        if m == 0 {
            return Err(Error::InvalidField("extension degree must be positive".into()));
        }
        let q64 = (p as u64).checked_pow(m).filter(|&q| q <= u32::MAX as u64 / 2);
        let Some(q64) = q64 else {
            return Err(Error::InvalidField(format!("field {p}^{m} is too large")));
        };
        if poly.len() != m as usize + 1 {
            return Err(Error::InvalidField(format!(
                "polynomial must have {} coefficients, got {}",
                m + 1,
                poly.len()
            )));
        }
        if let Some(&bad) = poly.iter().find(|&&c| c >= p) {
            return Err(Error::BadModulus { p, value: bad });
        }
        if poly[m as usize] != 1 {
            return Err(Error::InvalidField("polynomial must be monic".into()));
        }
        let ring = PolyRing { p, poly };
        let x = ring.x();
        let mut one = vec![0u32; m as usize];
        one[0] = 1;
        let order = q64 - 1;
        let primitive = poly[0] != 0
            && ring.pow(&x, order) == one
            && prime_factors(order).iter().all(|&r| ring.pow(&x, order / r) != one);
        if !primitive {
            return Err(Error::NotPrimitive { p, poly: poly.to_vec() });
        }
        let q = q64 as u32;

        let mut companion = FpMatrix::zeros(p as u8, m as usize, m as usize);
        for r in 0..m as usize - 1 {
            companion.set(r, r + 1, 1);
        }
        for (j, &f) in poly[..m as usize].iter().enumerate() {
            companion.set(m as usize - 1, j, ((p - f) % p) as u8);
        }

        let (mut exp, mut log) = (Vec::new(), Vec::new());
        if q64 <= TABLE_LIMIT {
            exp = vec![0u32; 2 * (q as usize - 1)];
            log = vec![u32::MAX; q as usize];
            let mut cur = one.clone();
            for i in 0..q as usize - 1 {
                let idx = to_index(p, &cur);
                exp[i] = idx;
                exp[i + q as usize - 1] = idx;
                log[idx as usize] = i as u32;
                cur = ring.mul(&cur, &x);
            }
        }

        let mut field = Field { p, m, q, poly: poly.to_vec(), exp, log, add: Vec::new(), neg: Vec::new(), companion };
        if p != 2 && q <= ADD_TABLE_LIMIT {
            let mut add = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    add[(a * q + b) as usize] = field.add_digits(a, b);
                }
            }
            field.neg = (0..q).map(|a| field.neg_digits(a)).collect();
            field.add = add;
        }
        Ok(field)
    }

    /// Builds GF(p^m) from the built-in primitive polynomial.
    pub fn with_default(p: u32, m: u32) -> Result<Field> {
        let poly = default_poly(p, m)
            .ok_or_else(|| Error::InvalidField(format!("no built-in polynomial for GF({p}^{m})")))?;
        Field::new(p, m, &poly)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn poly(&self) -> &[u32] {
        &self.poly
    }

    pub fn has_tables(&self) -> bool {
        !self.exp.is_empty()
    }

    /// The companion matrix of the defining polynomial.
    pub fn companion(&self) -> &FpMatrix {
        &self.companion
    }

    fn add_digits(&self, mut a: Gf, mut b: Gf) -> Gf {
        let (mut out, mut scale) = (0, 1);
        for _ in 0..self.m {
            out += ((a % self.p + b % self.p) % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out
    }

    fn neg_digits(&self, mut a: Gf) -> Gf {
        let (mut out, mut scale) = (0, 1);
        for _ in 0..self.m {
            out += ((self.p - a % self.p) % self.p) * scale;
            a /= self.p;
            scale *= self.p;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        if self.p == 2 {
            a ^ b
        } else if !self.add.is_empty() {
            self.add[(a * self.q + b) as usize]
        } else {
            self.add_digits(a, b)
        }
    }

    #[inline]
    pub fn neg(&self, a: Gf) -> Gf {
        if self.p == 2 {
            a
        } else if !self.neg.is_empty() {
            self.neg[a as usize]
        } else {
            self.neg_digits(a)
        }
    }

    #[inline]
    pub fn sub(&self, a: Gf, b: Gf) -> Gf {
        self.add(a, self.neg(b))
    }

    fn ring(&self) -> PolyRing<'_> {
        PolyRing { p: self.p, poly: &self.poly }
    }

    fn slow_mul(&self, a: Gf, b: Gf) -> Gf {
        let r = self.ring();
        to_index(self.p, &r.mul(&to_digits(self.p, self.m, a), &to_digits(self.p, self.m, b)))
    }

    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.exp.is_empty() {
            return self.slow_mul(a, b);
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Multiplicative inverse, or `DivisionByZero` for zero.
    pub fn inv(&self, a: Gf) -> Result<Gf> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.inv_nz(a))
    }

    /// Inverse of an element known to be nonzero.
    #[inline]
    pub(crate) fn inv_nz(&self, a: Gf) -> Gf {
        debug_assert!(a != 0);
        if self.exp.is_empty() {
            return self.pow(a, self.q as u64 - 2);
        }
        let l = self.log[a as usize];
        if l == 0 {
            1
        } else {
            self.exp[(self.q - 1 - l) as usize]
        }
    }

    pub fn div(&self, a: Gf, b: Gf) -> Result<Gf> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Gf, e: u64) -> Gf {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        if !self.exp.is_empty() {
            let l = (self.log[a as usize] as u64 * (e % (self.q as u64 - 1))) % (self.q as u64 - 1);
            return self.exp[l as usize];
        }
        let r = self.ring();
        to_index(self.p, &r.pow(&to_digits(self.p, self.m, a), e))
    }

    /// α^e for any integer exponent.
    pub fn alpha_pow(&self, e: i64) -> Gf {
        let ord = self.q as i64 - 1;
        let e = e.rem_euclid(ord) as u64;
        if !self.exp.is_empty() {
            return self.exp[e as usize];
        }
        let r = self.ring();
        to_index(self.p, &r.pow(&r.x(), e))
    }

    /// Discrete logarithm to base α, `None` for zero.
    pub fn log(&self, a: Gf) -> Option<u32> {
        if a == 0 || a >= self.q {
            return None;
        }
        if !self.exp.is_empty() {
            return Some(self.log[a as usize]);
        }
        let mut cur = 1;
        let alpha = self.alpha_pow(1);
        for i in 0..self.q - 1 {
            if cur == a {
                return Some(i);
            }
            cur = self.slow_mul(cur, alpha);
        }
        None
    }

    /// Coordinate `t` of `a`.
    #[inline]
    pub fn digit(&self, a: Gf, t: u32) -> u8 {
        if self.p == 2 {
            ((a >> t) & 1) as u8
        } else {
            ((a / self.p.pow(t)) % self.p) as u8
        }
    }

    /// φ⁻¹: element to its length-m coordinate vector.
    pub fn phi_inv(&self, a: Gf) -> Vec<u8> {
        to_digits(self.p, self.m, a).into_iter().map(|d| d as u8).collect()
    }

    /// φ: coordinate vector to element.
    pub fn phi(&self, b: &[u8]) -> Result<Gf> {
        if b.len() != self.m as usize {
            return Err(Error::LengthMismatch { expected: self.m as usize, got: b.len() });
        }
        if let Some(&bad) = b.iter().find(|&&d| d as u32 >= self.p) {
            return Err(Error::BadModulus { p: self.p, value: bad as u32 });
        }
        Ok(b.iter().rev().fold(0, |acc, &d| acc * self.p + d as u32))
    }

    /// Multiplies by a prime-field scalar.
    pub fn scale(&self, c: u8, a: Gf) -> Gf {
        let p = self.p as u8;
        match c % p {
            0 => 0,
            1 => a,
            c => {
                let (mut out, mut scale, mut a) = (0, 1, a);
                for _ in 0..self.m {
                    out += mod_mul(p, c, (a % self.p) as u8) as u32 * scale;
                    a /= self.p;
                    scale *= self.p;
                }
                out
            }
        }
    }

    /// Maps a prime-field scalar into the field.
    pub fn from_prime(&self, c: u8) -> Gf {
        (c as u32) % self.p
    }

    /// A^i over F_p.
    pub fn companion_power(&self, i: u64) -> FpMatrix {
        self.companion.pow(i)
    }

    /// The m×m block representing right multiplication by β on coordinate rows:
    /// row t is φ⁻¹(α^t β).
    pub fn mult_matrix(&self, beta: Gf) -> FpMatrix {
        let m = self.m as usize;
        let mut out = FpMatrix::zeros(self.p as u8, m, m);
        let alpha = self.alpha_pow(1);
        let mut cur = beta;
        for t in 0..m {
            for j in 0..m {
                out.set(t, j, self.digit(cur, j as u32));
            }
            cur = self.mul(cur, alpha);
        }
        out
    }

    /// Adds two coordinate vectors in place (dst += src), helper for image arithmetic.
    #[cfg(test)]
    pub(crate) fn add_digits_into(&self, dst: &mut [u8], src: &[u8]) {
        let p = self.p as u8;
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = crate::linalg::mod_add(p, *d, s);
        }
    }
}
