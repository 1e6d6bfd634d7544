//! Achievable rates of OFDM and single-carrier transmission over ISI channels.

pub mod bounds;
pub mod constellation;
pub mod error;
pub mod isi;
pub mod logsnr;
pub mod reference;
pub mod scalar;
pub mod special;
pub mod uniform;

pub use constellation::{Component, Constellation, Family};
pub use error::{Error, Result};
pub use scalar::{Evaluator, GaussianInput, Method, PointwiseStats, ScalarCurve, ScalarInput, ScalarPoint};

/// Formats with six significant digits, as used in every CSV export.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..6).contains(&e) {
        let dec = (5 - e).max(0) as usize;
        let s = format!("{x:.dec$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}
