//! Three bits to two trits source packing.

use crate::error::{Error, Result};

/// Ternary length for `k` bits: `2 * ceil(k / 3)`.
pub fn packed_len(k: usize) -> usize {
    2 * k.div_ceil(3)
}

/// Packs bits blockwise, `b0 + 2 b1 + 4 b2 = t0 + 3 t1`; the last block is zero padded.
pub fn pack_bits_to_trits(v: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(packed_len(v.len()));
    for ch in v.chunks(3) {
        let val = ch.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << i));
        out.push(val % 3);
        out.push(val / 3);
    }
    out
}

/// Inverse of [`pack_bits_to_trits`], truncated to `k` bits.
pub fn unpack_trits_to_bits(t: &[u8], k: usize) -> Result<Vec<u8>> {
    if t.len() != packed_len(k) {
        return Err(Error::LengthMismatch { expected: packed_len(k), got: t.len() });
    }
    let mut out = Vec::with_capacity(t.len() / 2 * 3);
    for pair in t.chunks(2) {
        let val = pair[0] as u32 + 3 * pair[1] as u32;
        if pair[0] > 2 || pair[1] > 2 || val > 7 {
            return Err(Error::InvalidTritPair(pair[0], pair[1]));
        }
        out.extend((0..3).map(|i| ((val >> i) & 1) as u8));
    }
    out.truncate(k);
    Ok(out)
}
