//! Generalized Reed–Solomon codes over GF(p^m), their p-ary images, and the
//! decoders and bounds used to study them.

pub mod bounds;
pub mod channel;
pub mod code;
pub mod erasure;
pub mod error;
pub mod field;
pub mod harness;
pub mod linalg;
pub mod osd;
pub mod systematic;

pub use error::{Error, Result};
