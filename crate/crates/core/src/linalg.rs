//! Dense matrices over a prime field F_p.
//!
//! Binary matrices are bit-packed into `u64` words so that row operations on
//! the large binary images (`K x N` with `N` in the thousands) stay cheap;
//! every other characteristic stores one digit per byte.

use std::fmt;

#[derive(Clone, PartialEq, Eq)]
enum Store {
    Bits(Vec<u64>),
    Digits(Vec<u8>),
}

/// A `rows x cols` matrix over F_p (p prime, p < 256).
#[derive(Clone, PartialEq, Eq)]
pub struct FpMatrix {
    p: u8,
    rows: usize,
    cols: usize,
    stride: usize,
    store: Store,
}

#[inline]
pub(crate) fn mod_mul(p: u8, a: u8, b: u8) -> u8 {
    ((a as u16 * b as u16) % p as u16) as u8
}

#[inline]
pub(crate) fn mod_add(p: u8, a: u8, b: u8) -> u8 {
    let s = a as u16 + b as u16;
    if s >= p as u16 {
        (s - p as u16) as u8
    } else {
        s as u8
    }
}

#[inline]
pub(crate) fn mod_neg(p: u8, a: u8) -> u8 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

#[inline]
pub(crate) fn mod_sub(p: u8, a: u8, b: u8) -> u8 {
    mod_add(p, a, mod_neg(p, b))
}

/// Multiplicative inverse in F_p by Fermat; `a` must be nonzero.
pub(crate) fn mod_inv(p: u8, a: u8) -> u8 {
    debug_assert!(!a.is_multiple_of(p));
    let mut result = 1u8;
    let mut base = a % p;
    let mut e = p as u32 - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = mod_mul(p, result, base);
        }
        base = mod_mul(p, base, base);
        e >>= 1;
    }
    result
}

impl FpMatrix {
    pub fn zeros(p: u8, rows: usize, cols: usize) -> Self {
        assert!(p >= 2, "characteristic must be at least 2");
        if p == 2 {
            let stride = cols.div_ceil(64);
            FpMatrix { p, rows, cols, stride, store: Store::Bits(vec![0; stride * rows]) }
        } else {
            FpMatrix { p, rows, cols, stride: cols, store: Store::Digits(vec![0; cols * rows]) }
        }
    }

    pub fn identity(p: u8, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from digit rows; entries are reduced mod p.
    pub fn from_rows(p: u8, rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(p, rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v % p);
            }
        }
        m
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        debug_assert!(r < self.rows && c < self.cols);
        match &self.store {
            Store::Bits(w) => ((w[r * self.stride + c / 64] >> (c % 64)) & 1) as u8,
            Store::Digits(d) => d[r * self.stride + c],
        }
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        debug_assert!(r < self.rows && c < self.cols && v < self.p);
        match &mut self.store {
            Store::Bits(w) => {
                let idx = r * self.stride + c / 64;
                let bit = 1u64 << (c % 64);
                if v & 1 == 1 {
                    w[idx] |= bit;
                } else {
                    w[idx] &= !bit;
                }
            }
            Store::Digits(d) => d[r * self.stride + c] = v,
        }
    }

    /// Writes `len <= 64` binary digits packed in `bits` starting at column `c`.
    /// Only valid for binary matrices.
    #[inline]
    pub(crate) fn set_bit_chunk(&mut self, r: usize, c: usize, len: usize, bits: u64) {
        let Store::Bits(w) = &mut self.store else {
            panic!("set_bit_chunk on a non-binary matrix");
        };
        let base = r * self.stride;
        let word = c / 64;
        let off = c % 64;
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        let bits = bits & mask;
        w[base + word] = (w[base + word] & !(mask << off)) | (bits << off);
        if off + len > 64 {
            let spill = off + len - 64;
            let hi_mask = (1u64 << spill) - 1;
            w[base + word + 1] = (w[base + word + 1] & !hi_mask) | (bits >> (64 - off));
        }
    }

    pub fn row(&self, r: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    /// `row[dst] += factor * row[src]`.
    pub fn axpy_row(&mut self, dst: usize, src: usize, factor: u8) {
        debug_assert_ne!(dst, src);
        let factor = factor % self.p;
        if factor == 0 {
            return;
        }
        let stride = self.stride;
        let p = self.p;
        match &mut self.store {
            Store::Bits(w) => {
                let (d, s) = split_rows(w, stride, dst, src);
                for (a, b) in d.iter_mut().zip(s) {
                    *a ^= *b;
                }
            }
            Store::Digits(digits) => {
                let (d, s) = split_rows(digits, stride, dst, src);
                for (a, &b) in d.iter_mut().zip(s.iter()) {
                    if b != 0 {
                        *a = mod_add(p, *a, mod_mul(p, factor, b));
                    }
                }
            }
        }
    }

    pub fn scale_row(&mut self, r: usize, factor: u8) {
        let factor = factor % self.p;
        let p = self.p;
        if factor == 1 {
            return;
        }
        let stride = self.stride;
        match &mut self.store {
            Store::Bits(w) => {
                if factor == 0 {
                    w[r * stride..(r + 1) * stride].fill(0);
                }
            }
            Store::Digits(d) => {
                for v in &mut d[r * stride..(r + 1) * stride] {
                    *v = mod_mul(p, *v, factor);
                }
            }
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let stride = self.stride;
        match &mut self.store {
            Store::Bits(w) => {
                for i in 0..stride {
                    w.swap(a * stride + i, b * stride + i);
                }
            }
            Store::Digits(d) => {
                for i in 0..stride {
                    d.swap(a * stride + i, b * stride + i);
                }
            }
        }
    }

    /// Reduces column `c` to the unit vector with its one at row `r`.
    /// The entry at `(r, c)` must be nonzero.
    pub fn pivot(&mut self, r: usize, c: usize) {
        let lead = self.get(r, c);
        assert!(lead != 0, "pivot on a zero entry");
        self.scale_row(r, mod_inv(self.p, lead));
        for other in 0..self.rows {
            if other != r {
                let v = self.get(other, c);
                if v != 0 {
                    self.axpy_row(other, r, mod_neg(self.p, v));
                }
            }
        }
    }

    /// Row-reduces in place to reduced row echelon form; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..self.cols {
            if next == self.rows {
                break;
            }
            if let Some(r) = (next..self.rows).find(|&r| self.get(r, c) != 0) {
                self.swap_rows(next, r);
                self.pivot(next, c);
                pivots.push(c);
                next += 1;
            }
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut t = FpMatrix::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if v != 0 {
                    t.set(c, r, v);
                }
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        assert_eq!(self.p, other.p, "characteristic mismatch");
        let mut out = FpMatrix::zeros(self.p, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b != 0 {
                        let v = mod_add(self.p, out.get(r, c), mod_mul(self.p, a, b));
                        out.set(r, c, v);
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> FpMatrix {
        assert_eq!(self.rows, self.cols, "power of a non-square matrix");
        let mut result = FpMatrix::identity(self.p, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        result
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.rows, "vector length mismatch");
        if let Store::Bits(w) = &self.store {
            let mut acc = vec![0u64; self.stride];
            for (r, &a) in v.iter().enumerate() {
                if a & 1 == 1 {
                    for (x, y) in acc.iter_mut().zip(&w[r * self.stride..(r + 1) * self.stride]) {
                        *x ^= *y;
                    }
                }
            }
            return (0..self.cols).map(|c| ((acc[c / 64] >> (c % 64)) & 1) as u8).collect();
        }
        let mut out = vec![0u8; self.cols];
        for (r, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                let b = self.get(r, c);
                if b != 0 {
                    *o = mod_add(self.p, *o, mod_mul(self.p, a, b));
                }
            }
        }
        out
    }

    /// Inner product of row `r` with `v`.
    pub fn row_dot(&self, r: usize, v: &[u8]) -> u8 {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        match &self.store {
            Store::Bits(w) => {
                let row = &w[r * self.stride..(r + 1) * self.stride];
                let mut acc = 0u32;
                for (wi, chunk) in v.chunks(64).enumerate() {
                    let packed = chunk.iter().enumerate().fold(0u64, |a, (i, &b)| a | (((b & 1) as u64) << i));
                    acc ^= (row[wi] & packed).count_ones() & 1;
                }
                acc as u8
            }
            Store::Digits(d) => {
                let row = &d[r * self.stride..r * self.stride + self.cols];
                (row.iter().zip(v).map(|(&a, &b)| a as u32 * b as u32).sum::<u32>() % self.p as u32) as u8
            }
        }
    }

    /// The submatrix made of the listed rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.p, rows.len(), self.cols);
        let s = self.stride;
        match (&self.store, &mut out.store) {
            (Store::Bits(a), Store::Bits(b)) => {
                for (i, &r) in rows.iter().enumerate() {
                    b[i * s..(i + 1) * s].copy_from_slice(&a[r * s..(r + 1) * s]);
                }
            }
            (Store::Digits(a), Store::Digits(b)) => {
                for (i, &r) in rows.iter().enumerate() {
                    b[i * s..(i + 1) * s].copy_from_slice(&a[r * s..(r + 1) * s]);
                }
            }
            _ => unreachable!(),
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        match &self.store {
            Store::Bits(w) => w.iter().all(|&x| x == 0),
            Store::Digits(d) => d.iter().all(|&x| x == 0),
        }
    }

    /// Basis of `{ x : M x^T = 0 }`, one vector per row.
    pub fn nullspace(&self) -> FpMatrix {
        let mut r = self.clone();
        let pivots = r.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = FpMatrix::zeros(self.p, free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            out.set(i, f, 1);
            for (row, &pc) in pivots.iter().enumerate() {
                let v = r.get(row, f);
                if v != 0 {
                    out.set(i, pc, mod_neg(self.p, v));
                }
            }
        }
        out
    }
}

fn split_rows<T>(data: &mut [T], stride: usize, dst: usize, src: usize) -> (&mut [T], &[T]) {
    if dst < src {
        let (lo, hi) = data.split_at_mut(src * stride);
        (&mut lo[dst * stride..(dst + 1) * stride], &hi[..stride])
    } else {
        let (lo, hi) = data.split_at_mut(dst * stride);
        (&mut hi[..stride], &lo[src * stride..(src + 1) * stride])
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix(p={}, {}x{})", self.p, self.rows, self.cols)?;
        for r in 0..self.rows.min(32) {
            let line: String = (0..self.cols.min(96)).map(|c| char::from(b'0' + self.get(r, c))).collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(p: u8, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> FpMatrix {
        let data: Vec<Vec<u8>> =
            (0..rows).map(|_| (0..cols).map(|_| rng.random_range(0..p)).collect()).collect();
        FpMatrix::from_rows(p, &data)
    }

    #[test]
    fn bit_chunks_straddle_words() {
        let mut m = FpMatrix::zeros(2, 1, 130);
        m.set_bit_chunk(0, 60, 8, 0b1011_0111);
        let got: Vec<u8> = (60..68).map(|c| m.get(0, c)).collect();
        assert_eq!(got, vec![1, 1, 1, 0, 1, 1, 0, 1]);
        m.set_bit_chunk(0, 60, 8, 0);
        assert!(m.is_zero());
    }

    #[test]
    fn nullspace_annihilates() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &p in &[2u8, 3, 5] {
            let m = random(p, 5, 11, &mut rng);
            let ns = m.nullspace();
            assert_eq!(ns.rows() + m.rank(), 11);
            assert!(m.mul(&ns.transpose()).is_zero());
        }
    }

    #[test]
    fn rank_of_identity_and_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(FpMatrix::identity(3, 6).rank(), 6);
        let a = random(3, 4, 2, &mut rng);
        let b = random(3, 2, 4, &mut rng);
        assert!(a.mul(&b).rank() <= 2);
    }

    #[test]
    fn inverse_mod_p() {
        for &p in &[2u8, 3, 5, 7, 11] {
            for a in 1..p {
                assert_eq!(mod_mul(p, a, mod_inv(p, a)), 1);
            }
        }
    }

    #[test]
    fn pivot_makes_unit_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut m = random(3, 4, 6, &mut rng);
        let r = (0..4).find(|&r| m.get(r, 2) != 0).unwrap();
        m.pivot(r, 2);
        for i in 0..4 {
            assert_eq!(m.get(i, 2), u8::from(i == r));
        }
    }
}
