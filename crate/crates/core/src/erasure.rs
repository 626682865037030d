//! Maximum-likelihood decoding of GRS images over the erasure channel.

use crate::channel::BecOutput;
use crate::code::GrsCode;
use crate::linalg::{mod_neg, mod_sub};
use crate::systematic::{change_of_basis, lagrange_parity, lagrange_systematize, SystematicForm};

/// Symbol permutation sorted by known-digit count (descending, ties by index).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolOrder {
    pub perm: Vec<usize>,
    pub counts: Vec<usize>,
}

impl SymbolOrder {
    /// Column priorities: digit `t` of the symbol at order position `s` gets `s*m + t`.
    pub fn priority(&self, m: usize) -> Vec<u32> {
        let mut pri = vec![0u32; self.perm.len() * m];
        for (pos, &s) in self.perm.iter().enumerate() {
            for t in 0..m {
                pri[s * m + t] = (pos * m + t) as u32;
            }
        }
        pri
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecodeStats {
    /// Columns reduced to unit vectors.
    pub iterations: usize,
    /// The known digits do not determine the message.
    pub rank_deficient: bool,
    /// Undetermined digits were filled with zero.
    pub fallback_used: bool,
    /// Decoded by interpolation from k fully known symbols.
    pub direct: bool,
}

#[derive(Clone, Debug)]
pub struct BecDecode {
    /// Information digits of the decoded message.
    pub message: Vec<u8>,
    pub stats: DecodeStats,
}

pub fn order_symbols(out: &BecOutput, m: usize) -> SymbolOrder {
    let counts: Vec<usize> = out.chunks(m).map(|ch| ch.iter().filter(|d| d.is_some()).count()).collect();
    let mut perm: Vec<usize> = (0..counts.len()).collect();
    perm.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    SymbolOrder { perm, counts }
}

/// Decoder bound to one code.
#[derive(Clone, Debug)]
pub struct BecDecoder<'a> {
    code: &'a GrsCode,
    a_p: Vec<u8>,
}

impl<'a> BecDecoder<'a> {
    pub fn new(code: &'a GrsCode) -> Self {
        BecDecoder { code, a_p: code.shift_p() }
    }

    /// True when the parity-check path is the cheaper one (`n-k < k`, no frozen digits).
    pub fn prefers_dual(&self) -> bool {
        self.code.n() - self.code.k() < self.code.k() && self.code.frozen() == 0
    }

    /// Picks the primal or dual path by rate.
    pub fn decode(&self, out: &BecOutput) -> BecDecode {
        if self.prefers_dual() {
            self.decode_dual(out)
        } else {
            self.decode_primal(out)
        }
    }

    /// Known digits with the shift removed; erased digits are `None`.
    fn linear_values(&self, out: &BecOutput) -> Vec<Option<u8>> {
        let p = self.code.p() as u8;
        assert_eq!(out.len(), self.code.len_p(), "channel output length");
        out.iter().zip(&self.a_p).map(|(o, &a)| o.map(|d| mod_sub(p, d, a))).collect()
    }

    fn direct(&self, lin: &[Option<u8>], counts: &[usize]) -> Option<BecDecode> {
        let (k, m) = (self.code.k(), self.code.m());
        let full: Vec<usize> = (0..self.code.n()).filter(|&s| counts[s] == m).take(k).collect();
        if full.len() < k {
            return None;
        }
        let f = self.code.field();
        let vals: Vec<u32> = full
            .iter()
            .map(|&s| {
                let d: Vec<u8> = (0..m).map(|t| lin[s * m + t].expect("known")).collect();
                f.phi(&d).expect("digits")
            })
            .collect();
        let u = self.code.interpolate(&full, &vals);
        Some(BecDecode { message: self.code.digits_from_message(&u), stats: DecodeStats { direct: true, ..Default::default() } })
    }

    fn message_of(&self, digits: &[u8]) -> Vec<u8> {
        let u = self.code.unencode_linear(&self.code.digits_to_symbols(digits));
        self.code.digits_from_message(&u)
    }

    /// Interpolation to a reliability-ordered systematic generator, then change-of-basis.
    pub fn decode_primal(&self, out: &BecOutput) -> BecDecode {
        let lin = self.linear_values(out);
        let order = order_symbols(out, self.code.m());
        if let Some(d) = self.direct(&lin, &order.counts) {
            return d;
        }
        let m = self.code.m();
        let pri = order.priority(m);
        let mut sf = lagrange_systematize(self.code, &order.perm[..self.code.k()], &pri);
        let n_p = self.code.len_p();
        let res = change_of_basis(
            &mut sf,
            |c| lin[c].is_some(),
            (0..n_p).filter(|&c| lin[c].is_some()),
            &pri,
        );
        let values: Vec<u8> = sf.basis().iter().map(|&b| lin[b].unwrap_or(0)).collect();
        let cw = sf.combine(&values);
        let deficient = !res.unresolved.is_empty();
        BecDecode {
            message: self.message_of(&cw),
            stats: DecodeStats { iterations: res.iterations, rank_deficient: deficient, fallback_used: deficient, direct: false },
        }
    }

    /// Interpolation to a systematic parity-check matrix on the least reliable
    /// symbols, then change-of-basis onto the erased digits.
    pub fn decode_dual(&self, out: &BecOutput) -> BecDecode {
        if self.code.frozen() > 0 {
            return self.decode_primal(out);
        }
        let lin = self.linear_values(out);
        let order = order_symbols(out, self.code.m());
        if let Some(d) = self.direct(&lin, &order.counts) {
            return d;
        }
        let m = self.code.m();
        let pri = order.priority(m);
        let mut sf = lagrange_parity(self.code, &order.perm[self.code.k()..]);
        let res = solve_parity(&mut sf, &lin, &pri);
        BecDecode { message: self.message_of(&res.0), stats: res.1 }
    }
}

/// Resolves erased digits from a systematic parity-check form; free erased
/// digits are set to zero.
fn solve_parity(sf: &mut SystematicForm, lin: &[Option<u8>], pri: &[u32]) -> (Vec<u8>, DecodeStats) {
    let n_p = lin.len();
    let p = sf.mat.p();
    let res = change_of_basis(sf, |c| lin[c].is_none(), (0..n_p).filter(|&c| lin[c].is_none()), pri);
    let free = (0..n_p).any(|c| lin[c].is_none() && !sf.is_basis(c));
    let mut x: Vec<u8> = lin.iter().map(|d| d.unwrap_or(0)).collect();
    for (r, &b) in sf.basis().iter().enumerate() {
        if lin[b].is_none() {
            // x_b has coefficient 1 and x_b = 0 in `x`, so the dot product omits it.
            x[b] = mod_neg(p, sf.mat.row_dot(r, &x));
        }
    }
    (x, DecodeStats { iterations: res.iterations, rank_deficient: free, fallback_used: free, direct: false })
}

/// Change-of-basis from a fixed offline systematic form.
#[derive(Clone, Debug)]
pub struct GeBaseline {
    form: SystematicForm,
    dual: bool,
    pri: Vec<u32>,
}

impl GeBaseline {
    /// Generator form with the identity on symbols `0..k`, or with `dual`
    /// the parity-check form with the identity on symbols `k..n`.
    pub fn new(code: &GrsCode, dual: bool) -> GeBaseline {
        let n_p = code.len_p();
        let pri: Vec<u32> = (0..n_p as u32).collect();
        let form = if dual {
            lagrange_parity(code, &(code.k()..code.n()).collect::<Vec<_>>())
        } else {
            lagrange_systematize(code, &(0..code.k()).collect::<Vec<_>>(), &pri)
        };
        GeBaseline { form, dual, pri }
    }

    /// Iterations needed to repair the offline form for this erasure pattern.
    pub fn iterations(&self, out: &BecOutput) -> DecodeStats {
        let mut sf = self.form.clone();
        let n_p = out.len();
        let res = if self.dual {
            change_of_basis(&mut sf, |c| out[c].is_none(), (0..n_p).filter(|&c| out[c].is_none()), &self.pri)
        } else {
            change_of_basis(&mut sf, |c| out[c].is_some(), (0..n_p).filter(|&c| out[c].is_some()), &self.pri)
        };
        let deficient = if self.dual {
            (0..n_p).any(|c| out[c].is_none() && !sf.is_basis(c))
        } else {
            !res.unresolved.is_empty()
        };
        DecodeStats { iterations: res.iterations, rank_deficient: deficient, fallback_used: deficient, direct: false }
    }
}
