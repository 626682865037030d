//! Systematic p-ary forms built by parallel Lagrange interpolation, and the
//! change-of-basis that moves the identity onto preferred columns.
//!
//! Matrices keep the original column order; `basis[r]` names the column that
//! carries the unit entry of row `r`.

use crate::code::GrsCode;
use crate::field::{Field, Gf};
use crate::linalg::{mod_inv, mod_mul, mod_neg, FpMatrix};

const NONE: usize = usize::MAX;

/// A row-reduced matrix with one unit column per row.
#[derive(Clone, Debug)]
pub struct SystematicForm {
    pub mat: FpMatrix,
    basis: Vec<usize>,
    row_of: Vec<usize>,
}

/// Outcome of a change-of-basis pass.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BasisChange {
    /// Columns reduced to unit vectors.
    pub iterations: usize,
    /// Rows that could not be moved onto an acceptable column.
    pub unresolved: Vec<usize>,
}

impl SystematicForm {
    /// Wraps a matrix whose `basis` columns already form an identity.
    pub fn new(mat: FpMatrix, basis: Vec<usize>) -> SystematicForm {
        let mut row_of = vec![NONE; mat.cols()];
        for (r, &c) in basis.iter().enumerate() {
            row_of[c] = r;
        }
        SystematicForm { mat, basis, row_of }
    }

    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    /// Row whose unit entry sits in column `c`.
    pub fn row_of(&self, c: usize) -> Option<usize> {
        let r = self.row_of[c];
        (r != NONE).then_some(r)
    }

    pub fn is_basis(&self, c: usize) -> bool {
        self.row_of[c] != NONE
    }

    /// Pivots column `c` into row `r`, replacing that row's basis column.
    pub fn pivot(&mut self, r: usize, c: usize) {
        debug_assert!(!self.is_basis(c));
        self.mat.pivot(r, c);
        self.row_of[self.basis[r]] = NONE;
        self.basis[r] = c;
        self.row_of[c] = r;
    }

    /// `Σ coeffs[r] · row_r`.
    pub fn combine(&self, coeffs: &[u8]) -> Vec<u8> {
        self.mat.vec_mul(coeffs)
    }

    /// True when every basis column is the matching unit vector.
    pub fn is_systematic(&self) -> bool {
        self.basis.iter().enumerate().all(|(r, &c)| (0..self.rows()).all(|i| self.mat.get(i, c) == u8::from(i == r)))
    }
}

/// Column priorities: smaller is better.
pub type Priority = [u32];

/// Systematic form with the identity on the digits of the symbols `top`.
///
/// Row `(i, t)` is the image of `α^t` times the interpolant that is one at
/// `top[i]` and zero at the other symbols of `top`. With frozen digits the
/// rows are reduced to the constrained subcode by discarding the rows whose
/// basis columns have the worst `priority`.
pub fn lagrange_systematize(code: &GrsCode, top: &[usize], priority: &Priority) -> SystematicForm {
    let (mat, coef) = interpolation_rows(code, top, false);
    let m = code.m();
    let basis: Vec<usize> = (0..top.len() * m).map(|r| top[r / m] * m + r % m).collect();
    let mut sf = SystematicForm::new(mat, basis);
    let s = code.frozen();
    if s > 0 {
        let f = code.field();
        let mut cons: Vec<Vec<u8>> = (0..sf.rows())
            .map(|r| {
                let lam = f.mul(coef[r / m], f.alpha_pow((r % m) as i64));
                (0..s).map(|d| f.digit(lam, (m - s + d) as u32)).collect()
            })
            .collect();
        sf = freeze(sf, &mut cons, priority);
    }
    sf
}

/// Systematic parity-check form of `code`: dual codewords with the identity
/// on the digits of `top` (`n-k` symbols), laid out so that the digit inner
/// product with any image codeword vanishes.
pub fn lagrange_parity(code: &GrsCode, top: &[usize]) -> SystematicForm {
    assert_eq!(code.frozen(), 0, "parity form needs an unfrozen code");
    let dual = code.dual();
    let (mat, _) = interpolation_rows(&dual, top, true);
    let m = code.m();
    let basis = (0..top.len() * m).map(|r| top[r / m] * m + r % m).collect();
    SystematicForm::new(mat, basis)
}

/// Builds the `k m x n m` interpolation rows; returns them with the leading
/// message coefficients `w_i / v_{top[i]}`.
fn interpolation_rows(code: &GrsCode, top: &[usize], transposed: bool) -> (FpMatrix, Vec<Gf>) {
    let f = code.field();
    let (n, k, m) = (code.n(), code.k(), code.m());
    assert_eq!(top.len(), k, "need exactly k interpolation symbols");
    let xs = code.points();
    let v = code.multipliers();
    let mut slot = vec![NONE; n];
    for (i, &s) in top.iter().enumerate() {
        assert_eq!(slot[s], NONE, "repeated interpolation symbol");
        slot[s] = i;
    }
    // coef[i] = 1 / (v_{p_i} Π_{t≠i} (x_{p_i} - x_{p_t}))
    let coef: Vec<Gf> = (0..k)
        .map(|i| {
            let xi = xs[top[i]];
            let prod = (0..k).filter(|&t| t != i).fold(v[top[i]], |acc, t| f.mul(acc, f.sub(xi, xs[top[t]])));
            f.inv_nz(prod)
        })
        .collect();
    let mut mat = FpMatrix::zeros(f.p() as u8, k * m, n * m);
    for i in 0..k {
        write_block(f, &mut mat, i, top[i], 1, m, transposed);
    }
    for j in 0..n {
        if slot[j] != NONE {
            continue;
        }
        let xj = xs[j];
        let lj = top.iter().fold(v[j], |acc, &t| f.mul(acc, f.sub(xj, xs[t])));
        for i in 0..k {
            let g = f.mul(f.mul(lj, coef[i]), f.inv_nz(f.sub(xj, xs[top[i]])));
            write_block(f, &mut mat, i, j, g, m, transposed);
        }
    }
    (mat, coef)
}

/// Writes the m x m block of `g` at row group `i`, symbol `j`.
fn write_block(f: &Field, mat: &mut FpMatrix, i: usize, j: usize, g: Gf, m: usize, transposed: bool) {
    if g == 0 {
        return;
    }
    let alpha = f.alpha_pow(1);
    let mut vals = [0 as Gf; 32];
    let mut cur = g;
    for val in vals.iter_mut().take(m) {
        *val = cur;
        cur = f.mul(cur, alpha);
    }
    let binary = f.p() == 2;
    for t in 0..m {
        if binary {
            let bits = if transposed {
                (0..m).fold(0u64, |acc, c| acc | ((((vals[c] >> t) & 1) as u64) << c))
            } else {
                vals[t] as u64
            };
            mat.set_bit_chunk(i * m + t, j * m, m, bits);
        } else {
            for c in 0..m {
                let d = if transposed { f.digit(vals[c], t as u32) } else { f.digit(vals[t], c as u32) };
                mat.set(i * m + t, j * m + c, d);
            }
        }
    }
}

/// Eliminates the frozen-digit constraints `cons` (one row of `s` digits per
/// matrix row) and drops one row per constraint.
fn freeze(sf: SystematicForm, cons: &mut [Vec<u8>], priority: &Priority) -> SystematicForm {
    let SystematicForm { mut mat, basis, .. } = sf;
    let p = mat.p();
    let rows = mat.rows();
    let s = cons.first().map_or(0, |c| c.len());
    let mut alive = vec![true; rows];
    for d in 0..s {
        let piv = (0..rows)
            .filter(|&r| alive[r] && cons[r][d] != 0)
            .max_by_key(|&r| (priority[basis[r]], std::cmp::Reverse(r)))
            .expect("frozen constraints are independent");
        let inv = mod_inv(p, cons[piv][d]);
        for r in 0..rows {
            if r != piv && alive[r] && cons[r][d] != 0 {
                let factor = mod_neg(p, mod_mul(p, cons[r][d], inv));
                mat.axpy_row(r, piv, factor);
                let pr = cons[piv].clone();
                for (x, y) in cons[r].iter_mut().zip(pr) {
                    *x = (*x + mod_mul(p, factor, y)) % p;
                }
            }
        }
        alive[piv] = false;
    }
    let keep: Vec<usize> = (0..rows).filter(|&r| alive[r]).collect();
    let basis = keep.iter().map(|&r| basis[r]).collect();
    SystematicForm::new(mat.select_rows(&keep), basis)
}

/// Moves the identity onto acceptable columns.
///
/// Rows whose basis column satisfies `locked` stay put. Each candidate column
/// with a nonzero entry in some unlocked row is reduced to a unit vector in
/// the unlocked row whose basis column has the largest priority value (ties
/// to the lowest row), after which that row is locked.
pub fn change_of_basis(
    sf: &mut SystematicForm,
    locked: impl Fn(usize) -> bool,
    candidates: impl IntoIterator<Item = usize>,
    priority: &Priority,
) -> BasisChange {
    let mut open: Vec<usize> = (0..sf.rows()).filter(|&r| !locked(sf.basis[r])).collect();
    let mut iterations = 0;
    for c in candidates {
        if open.is_empty() {
            break;
        }
        if sf.is_basis(c) {
            continue;
        }
        let best = open
            .iter()
            .enumerate()
            .filter(|(_, &r)| sf.mat.get(r, c) != 0)
            .max_by_key(|(_, &r)| (priority[sf.basis[r]], std::cmp::Reverse(r)))
            .map(|(slot, &r)| (slot, r));
        if let Some((slot, r)) = best {
            sf.pivot(r, c);
            open.swap_remove(slot);
            iterations += 1;
        }
    }
    open.sort_unstable();
    BasisChange { iterations, unresolved: open }
}
