//! Ordered statistics decoding with local constraints.
//!
//! The hard decision `z` is re-encoded through a reliability-ordered
//! systematic form `[I, P1, P2]`. Test error patterns on `I` and the `δ`
//! columns of `P1` are enumerated by a trellis search in non-decreasing soft
//! weight; `P2` follows from the parity equations.

pub mod packing;
pub mod trellis;

use serde::{Deserialize, Serialize};

use crate::channel::SoftOutput;
use crate::code::GrsCode;
use crate::erasure::SymbolOrder;
use crate::error::{Error, Result};
use crate::linalg::{mod_add, mod_mul, mod_neg, mod_sub};
use crate::systematic::{change_of_basis, lagrange_systematize, SystematicForm};
use trellis::{Stage, Trellis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop once no unqueried pattern can beat the best candidate.
    SafeOptimal,
    /// Run until the query budget or the patterns run out.
    MaxQueriesOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OsdConfig {
    pub delta: usize,
    pub max_queries: usize,
    #[serde(default = "default_stop")]
    pub stop: StopRule,
}

fn default_stop() -> StopRule {
    StopRule::SafeOptimal
}

impl Default for OsdConfig {
    fn default() -> Self {
        OsdConfig { delta: 4, max_queries: 1 << 12, stop: StopRule::SafeOptimal }
    }
}

#[derive(Clone, Debug)]
pub struct OsdDecode {
    /// Decoded word of the linear part, as p-ary digits.
    pub codeword: Vec<u8>,
    /// Information digits.
    pub message: Vec<u8>,
    pub queries: usize,
    /// The output is provably a lightest candidate.
    pub certified: bool,
    pub soft_weight: f64,
}

/// Digit indices by reliability, most reliable first, ties by index.
pub fn digit_order(soft: &SoftOutput) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..soft.len()).collect();
    idx.sort_by(|&a, &b| soft.reliability(b).total_cmp(&soft.reliability(a)).then(a.cmp(&b)));
    idx
}

/// Symbols by count of digits among the `k_digits` most reliable (descending),
/// then by the sum of all their digit reliabilities (descending), then index.
pub fn order_soft_symbols(soft: &SoftOutput, m: usize, k_digits: usize) -> SymbolOrder {
    let order = digit_order(soft);
    let n = soft.len() / m;
    let mut counts = vec![0usize; n];
    for &d in &order[..k_digits] {
        counts[d / m] += 1;
    }
    let sums: Vec<f64> = (0..n).map(|s| (0..m).map(|t| soft.reliability(s * m + t)).sum()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(sums[b].total_cmp(&sums[a])).then(a.cmp(&b)));
    SymbolOrder { perm, counts }
}

/// `γ(e) = Σ_{e_i ≠ 0} γ_i(e_i)`.
pub fn soft_weight(e: &[u8], soft: &SoftOutput) -> f64 {
    e.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| soft.cost(i, x)).sum()
}

/// Reliability-ordered systematic form with the column partition.
#[derive(Clone, Debug)]
pub struct OrderedForm {
    pub sf: SystematicForm,
    /// Rows in order of decreasing reliability of their basis column.
    pub rows: Vec<usize>,
    pub p1: Vec<usize>,
    pub p2: Vec<usize>,
}

impl OrderedForm {
    pub fn i_cols(&self) -> Vec<usize> {
        self.rows.iter().map(|&r| self.sf.basis()[r]).collect()
    }
}

/// Trellis plus the data needed to complete prefixes.
#[derive(Clone, Debug)]
pub struct Constraints {
    pub trellis: Trellis,
    /// `z_j - (z_I G)_j` over P2.
    pub s2: Vec<u8>,
    /// `G[r][P2]` for rows in `OrderedForm::rows` order.
    pub p2_rows: Vec<Vec<u8>>,
}

#[derive(Clone, Debug)]
pub struct LcOsd<'a> {
    code: &'a GrsCode,
    cfg: OsdConfig,
}

impl<'a> LcOsd<'a> {
    pub fn new(code: &'a GrsCode, cfg: OsdConfig) -> Result<Self> {
        let redundancy = code.len_p() - code.info_digits();
        if cfg.delta > redundancy {
            return Err(Error::config("osd.delta", format!("delta {} exceeds N-K = {redundancy}", cfg.delta)));
        }
        if cfg.max_queries == 0 {
            return Err(Error::config("osd.max_queries", "must be at least 1"));
        }
        Ok(LcOsd { code, cfg })
    }

    pub fn config(&self) -> &OsdConfig {
        &self.cfg
    }

    /// Interpolation on the most reliable symbols, then change-of-basis onto
    /// the most reliable independent digits.
    pub fn ordered_form(&self, soft: &SoftOutput) -> OrderedForm {
        let m = self.code.m();
        let kd = self.code.info_digits();
        let order = digit_order(soft);
        let mut rank = vec![0u32; order.len()];
        for (pos, &d) in order.iter().enumerate() {
            rank[d] = pos as u32;
        }
        let sym = order_soft_symbols(soft, m, kd);
        let mut sf = lagrange_systematize(self.code, &sym.perm[..self.code.k()], &rank);
        let res = change_of_basis(&mut sf, |c| (rank[c] as usize) < kd, order.iter().copied(), &rank);
        debug_assert!(res.unresolved.is_empty());
        let mut rows: Vec<usize> = (0..sf.rows()).collect();
        rows.sort_by_key(|&r| rank[sf.basis()[r]]);
        let rest: Vec<usize> = order.iter().copied().filter(|&c| !sf.is_basis(c)).collect();
        let delta = self.cfg.delta.min(rest.len());
        OrderedForm { p1: rest[..delta].to_vec(), p2: rest[delta..].to_vec(), sf, rows }
    }

    /// The local-constraint trellis `e_P1 - e_I P1 = z_P1 - z_I P1`.
    pub fn build_trellis(&self, form: &OrderedForm, soft: &SoftOutput) -> Result<Constraints> {
        let p = soft.p;
        let sf = &form.sf;
        let z_basis: Vec<u8> = sf.basis().iter().map(|&b| soft.z[b]).collect();
        let reenc = sf.combine(&z_basis);
        let s: Vec<u8> = soft.z.iter().zip(&reenc).map(|(&a, &b)| mod_sub(p, a, b)).collect();
        let cost_row = |col: usize| (0..p).map(|e| soft.cost(col, e)).collect::<Vec<f64>>();
        let mut stages = Vec::with_capacity(form.rows.len() + form.p1.len());
        for &r in &form.rows {
            let w = form.p1.iter().map(|&c| mod_neg(p, sf.mat.get(r, c))).collect();
            stages.push(Stage { w, costs: cost_row(sf.basis()[r]) });
        }
        for (j, &c) in form.p1.iter().enumerate() {
            let w = (0..form.p1.len()).map(|i| u8::from(i == j)).collect();
            stages.push(Stage { w, costs: cost_row(c) });
        }
        let target: Vec<u8> = form.p1.iter().map(|&c| s[c]).collect();
        let trellis = Trellis::new(p, form.p1.len(), stages, &target)?;
        let s2 = form.p2.iter().map(|&c| s[c]).collect();
        let p2_rows = form.rows.iter().map(|&r| form.p2.iter().map(|&c| sf.mat.get(r, c)).collect()).collect();
        Ok(Constraints { trellis, s2, p2_rows })
    }

    /// Full TEP from a prefix over `[I, P1]`.
    pub fn complete_tep(&self, form: &OrderedForm, cons: &Constraints, labels: &[u8]) -> Vec<u8> {
        let p = cons.trellis.p();
        let n_p = form.sf.cols();
        let k = form.rows.len();
        let mut e = vec![0u8; n_p];
        for (i, &c) in form.i_cols().iter().enumerate() {
            e[c] = labels[i];
        }
        for (j, &c) in form.p1.iter().enumerate() {
            e[c] = labels[k + j];
        }
        let mut tail = cons.s2.clone();
        for (i, &lab) in labels[..k].iter().enumerate() {
            if lab != 0 {
                for (t, &g) in tail.iter_mut().zip(&cons.p2_rows[i]) {
                    *t = mod_add(p, *t, mod_mul(p, lab, g));
                }
            }
        }
        for (j, &c) in form.p2.iter().enumerate() {
            e[c] = tail[j];
        }
        e
    }

    pub fn decode(&self, soft: &SoftOutput) -> Result<OsdDecode> {
        assert_eq!(soft.len(), self.code.len_p(), "soft output length");
        let p = soft.p;
        let form = self.ordered_form(soft);
        let cons = self.build_trellis(&form, soft)?;
        let k = form.rows.len();
        let mut slva = cons.trellis.enumerate();
        let mut best: Option<(f64, Vec<u8>)> = None;
        let mut queries = 0usize;
        let mut certified = false;
        let safe = self.cfg.stop == StopRule::SafeOptimal;
        loop {
            let next = slva.peek_weight();
            let Some(w) = next else {
                certified = true;
                break;
            };
            if safe && best.as_ref().is_some_and(|(bw, _)| *bw <= w) {
                certified = true;
                break;
            }
            if queries == self.cfg.max_queries {
                break;
            }
            let prefix = slva.next_path().expect("peeked path");
            queries += 1;
            let mut total = prefix.weight;
            let bound = best.as_ref().map_or(f64::INFINITY, |(bw, _)| *bw);
            let mut tail = cons.s2.clone();
            for (i, &lab) in prefix.labels[..k].iter().enumerate() {
                if lab != 0 {
                    for (t, &g) in tail.iter_mut().zip(&cons.p2_rows[i]) {
                        *t = mod_add(p, *t, mod_mul(p, lab, g));
                    }
                }
            }
            for (j, &c) in form.p2.iter().enumerate() {
                total += soft.cost(c, tail[j]);
                if total >= bound {
                    break;
                }
            }
            if total < bound {
                best = Some((total, prefix.labels));
            }
        }
        let (weight, labels) = best.expect("at least one query");
        let e = self.complete_tep(&form, &cons, &labels);
        let codeword: Vec<u8> = soft.z.iter().zip(&e).map(|(&z, &x)| mod_sub(p, z, x)).collect();
        let u = self.code.unencode_linear(&self.code.digits_to_symbols(&codeword));
        Ok(OsdDecode { message: self.code.digits_from_message(&u), codeword, queries, certified, soft_weight: weight })
    }
}
