//! ISI channels and the single-carrier / OFDM rate comparison.
//!
//! Rates are computed from an [`InfoCurve`], normally a sampled log-SNR
//! profile, so that integrating over frequency costs one interpolation per
//! sample instead of one quadrature.

use crate::error::{Error, Result};
use crate::logsnr::{db, from_db, gamma_of_zeta, zeta_of_gamma, ConcavityReport, LogSnrProfile};
use crate::scalar::ScalarInput;
use crate::special::q_function;
use crate::uniform::{uniform_info, UniformProfile};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::io::Write;
use std::path::Path;

/// Smallest and largest frequency grids tried by the doubling loop.
pub const MIN_QUAD: usize = 1 << 8;
pub const MAX_QUAD: usize = 1 << 20;
/// Relative change under grid doubling accepted as converged.
pub const DOUBLING_TOL: f64 = 1e-10;

/// One constant-gain band of a frequency-domain channel, `theta` in `[-pi, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub gain_sq: f64,
}

/// A channel given by taps or by a piecewise-constant `|H|^2`.
#[derive(Clone, Debug, PartialEq)]
pub enum IsiChannel {
    Taps(Vec<Complex64>),
    Piecewise(Vec<Band>),
}

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    taps: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    piecewise: Option<Vec<Band>>,
}

/// 9-tap channel drawn from the 802.11n NLOS model B, at unit input SNR up to rounding.
pub fn ieee80211n_taps() -> IsiChannel {
    let polar = [
        (0.62, 1.3),
        (0.42, 2.8),
        (0.33, -1.3),
        (0.091, 2.5),
        (0.51, 0.66),
        (0.25, 2.0),
        (0.039, -0.087),
        (0.028, -0.28),
        (0.039, 1.7),
    ];
    IsiChannel::Taps(polar.iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect())
}

impl IsiChannel {
    pub fn from_taps(taps: Vec<Complex64>) -> Result<Self> {
        if taps.is_empty() || taps.iter().all(|h| h.norm_sqr() == 0.0) {
            return Err(Error::InvalidArgument("channel needs at least one nonzero tap".into()));
        }
        if taps.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(Error::InvalidArgument("channel taps must be finite".into()));
        }
        Ok(IsiChannel::Taps(taps))
    }

    /// Bands must tile `[-pi, pi]` in order.
    pub fn from_bands(bands: Vec<Band>) -> Result<Self> {
        let tol = 1e-12;
        if bands.is_empty() {
            return Err(Error::InvalidArgument("piecewise channel needs at least one band".into()));
        }
        if (bands[0].theta_lo + PI).abs() > tol || (bands[bands.len() - 1].theta_hi - PI).abs() > tol {
            return Err(Error::InvalidArgument("bands must cover [-pi, pi]".into()));
        }
        for w in bands.windows(2) {
            if (w[0].theta_hi - w[1].theta_lo).abs() > tol {
                return Err(Error::InvalidArgument("bands must be contiguous".into()));
            }
        }
        for b in &bands {
            if !(b.theta_hi >= b.theta_lo) || !(b.gain_sq >= 0.0 && b.gain_sq.is_finite()) {
                return Err(Error::InvalidArgument(format!("invalid band {b:?}")));
            }
        }
        if bands.iter().all(|b| b.gain_sq == 0.0 || b.theta_hi == b.theta_lo) {
            return Err(Error::InvalidArgument("channel transfer is identically zero".into()));
        }
        Ok(IsiChannel::Piecewise(bands))
    }

    /// Memoryless channel with `|H|^2 = gamma`.
    pub fn flat(gamma: f64) -> Result<Self> {
        IsiChannel::from_taps(vec![Complex64::new(gamma.sqrt(), 0.0)])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ChannelFile = serde_json::from_str(text)?;
        match (f.taps, f.piecewise) {
            (Some(t), None) => IsiChannel::from_taps(t.iter().map(|p| Complex64::new(p[0], p[1])).collect()),
            (None, Some(b)) => IsiChannel::from_bands(b),
            _ => Err(Error::InvalidArgument("channel file needs exactly one of `taps` or `piecewise`".into())),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        IsiChannel::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let f = match self {
            IsiChannel::Taps(t) => ChannelFile {
                taps: Some(t.iter().map(|h| [h.re, h.im]).collect()),
                piecewise: None,
            },
            IsiChannel::Piecewise(b) => ChannelFile {
                taps: None,
                piecewise: Some(b.clone()),
            },
        };
        serde_json::to_string_pretty(&f).expect("channel serializes")
    }

    /// `|H(theta)|^2`.
    pub fn transfer(&self, theta: f64) -> f64 {
        match self {
            IsiChannel::Taps(t) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, h) in t.iter().enumerate() {
                    acc += h * Complex64::from_polar(1.0, -(k as f64) * theta);
                }
                acc.norm_sqr()
            }
            IsiChannel::Piecewise(b) => {
                let th = theta.clamp(-PI, PI);
                b.iter().find(|b| th <= b.theta_hi).unwrap_or(&b[b.len() - 1]).gain_sq
            }
        }
    }

    /// `(1/2pi) int |H|^2`.
    pub fn input_snr(&self) -> f64 {
        match self {
            IsiChannel::Taps(t) => t.iter().map(|h| h.norm_sqr()).sum(),
            IsiChannel::Piecewise(b) => b.iter().map(|b| b.gain_sq * (b.theta_hi - b.theta_lo)).sum::<f64>() / (2.0 * PI),
        }
    }

    /// The same channel with `|H|^2` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            IsiChannel::Taps(t) => IsiChannel::Taps(t.iter().map(|h| h * factor.sqrt()).collect()),
            IsiChannel::Piecewise(b) => IsiChannel::Piecewise(
                b.iter()
                    .map(|b| Band {
                        gain_sq: b.gain_sq * factor,
                        ..*b
                    })
                    .collect(),
            ),
        }
    }

    /// Rescaled to the given input SNR.
    pub fn with_input_snr(&self, snr: f64) -> Self {
        self.scaled(snr / self.input_snr())
    }

    /// Extreme values of `|H|^2` (on a 2^12 grid for taps).
    pub fn transfer_range(&self) -> (f64, f64) {
        match self {
            IsiChannel::Taps(_) => {
                let n = 1 << 12;
                (0..n)
                    .map(|i| self.transfer(-PI + 2.0 * PI * i as f64 / n as f64))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
            }
            IsiChannel::Piecewise(b) => b
                .iter()
                .filter(|b| b.theta_hi > b.theta_lo)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, c), b| (a.min(b.gain_sq), c.max(b.gain_sq))),
        }
    }

    /// Frequency average of `f(|H|^2)`. Tap channels use the periodic trapezoid
    /// rule with grid doubling from `n_quad`; piecewise channels are exact.
    pub fn average<F: Fn(f64) -> f64 + Sync>(&self, f: F, n_quad: usize) -> Result<f64> {
        match self {
            IsiChannel::Piecewise(b) => {
                Ok(b.iter().map(|b| f(b.gain_sq) * (b.theta_hi - b.theta_lo)).sum::<f64>() / (2.0 * PI))
            }
            IsiChannel::Taps(_) => {
                if n_quad < MIN_QUAD {
                    return Err(Error::InvalidArgument(format!("n_quad must be at least {MIN_QUAD}")));
                }
                let mean = |n: usize| {
                    (0..n)
                        .into_par_iter()
                        .map(|i| f(self.transfer(-PI + 2.0 * PI * i as f64 / n as f64)))
                        .sum::<f64>()
                        / n as f64
                };
                let mut n = n_quad;
                let mut prev = mean(n);
                while n < MAX_QUAD {
                    n *= 2;
                    let next = mean(n);
                    if (next - prev).abs() <= DOUBLING_TOL * next.abs().max(1e-300) {
                        return Ok(next);
                    }
                    prev = next;
                }
                Err(Error::NoConvergence(format!("frequency average still moving at {MAX_QUAD} points")))
            }
        }
    }
}

/// Unbiased MMSE-DFE output SNR, `exp{avg log(1 + |H|^2)} - 1`.
pub fn snr_mmse_dfe_u(ch: &IsiChannel, n_quad: usize) -> Result<f64> {
    Ok(ch.average(|g| g.ln_1p(), n_quad)?.exp_m1())
}

/// Mutual information of a scalar channel input as a function of SNR.
pub trait InfoCurve: Sync {
    fn label(&self) -> String;
    /// `I(gamma)` in nats.
    fn info_nats(&self, gamma: f64) -> f64;
    fn entropy_nats(&self) -> f64;
}

/// Profiles answer by interpolation and saturate at the entropy past their end.
impl InfoCurve for LogSnrProfile {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn info_nats(&self, gamma: f64) -> f64 {
        let z = zeta_of_gamma(gamma);
        if z >= self.zeta_max && self.entropy_nats.is_finite() {
            return self.entropy_nats;
        }
        self.ilog_at(z.min(self.zeta_max))
    }
    fn entropy_nats(&self) -> f64 {
        self.entropy_nats
    }
}

impl InfoCurve for UniformProfile {
    fn label(&self) -> String {
        "uniform".into()
    }
    fn info_nats(&self, gamma: f64) -> f64 {
        let z = zeta_of_gamma(gamma);
        if z <= self.profile.zeta_max {
            self.profile.ilog_at(z)
        } else {
            uniform_info(gamma)
        }
    }
    fn entropy_nats(&self) -> f64 {
        f64::INFINITY
    }
}

/// Direct evaluation of any [`ScalarInput`], one quadrature per call.
pub struct Exact<'a>(pub &'a dyn ScalarInput);

impl InfoCurve for Exact<'_> {
    fn label(&self) -> String {
        self.0.label()
    }
    fn info_nats(&self, gamma: f64) -> f64 {
        self.0.info(gamma)
    }
    fn entropy_nats(&self) -> f64 {
        self.0.entropy_nats()
    }
}

/// `I_x(SNR_MMSE-DFE-U)` in bits.
pub fn rate_sl(curve: &dyn InfoCurve, ch: &IsiChannel, n_quad: usize) -> Result<f64> {
    Ok(curve.info_nats(snr_mmse_dfe_u(ch, n_quad)?) / LN_2)
}

/// Frequency average of `I_x(|H|^2)` in bits.
pub fn rate_ofdm(curve: &dyn InfoCurve, ch: &IsiChannel, n_quad: usize) -> Result<f64> {
    Ok(ch.average(|g| curve.info_nats(g), n_quad)? / LN_2)
}

/// Both rates at one input SNR.
#[derive(Clone, Debug, Serialize)]
pub struct RateComparison {
    pub input_snr_db: f64,
    pub snr_dfe: f64,
    pub i_sl_bits: f64,
    pub i_ofdm_bits: f64,
    /// `i_sl_bits - i_ofdm_bits`.
    pub diff_bits: f64,
    /// `(theta, log(1 + |H(theta)|^2))` on a coarse grid.
    #[serde(skip)]
    pub zeta_theta: Vec<(f64, f64)>,
}

impl RateComparison {
    pub fn snr_dfe_db(&self) -> f64 {
        db(self.snr_dfe)
    }
}

const ZETA_SAMPLES: usize = 256;

pub fn compare(curve: &dyn InfoCurve, ch: &IsiChannel, n_quad: usize) -> Result<RateComparison> {
    let snr = snr_mmse_dfe_u(ch, n_quad)?;
    let i_sl = curve.info_nats(snr) / LN_2;
    let i_ofdm = rate_ofdm(curve, ch, n_quad)?;
    let zeta_theta = (0..ZETA_SAMPLES)
        .map(|i| {
            let th = -PI + 2.0 * PI * (i as f64 + 0.5) / ZETA_SAMPLES as f64;
            (th, ch.transfer(th).ln_1p())
        })
        .collect();
    Ok(RateComparison {
        input_snr_db: db(ch.input_snr()),
        snr_dfe: snr,
        i_sl_bits: i_sl,
        i_ofdm_bits: i_ofdm,
        diff_bits: i_sl - i_ofdm,
        zeta_theta,
    })
}

/// Rates over `steps` input SNRs evenly spaced in dB, scaling `|H|^2`.
pub fn sweep_compare(
    curve: &dyn InfoCurve,
    ch: &IsiChannel,
    snr_db_lo: f64,
    snr_db_hi: f64,
    steps: usize,
    n_quad: usize,
) -> Result<Vec<RateComparison>> {
    if steps == 0 || snr_db_hi < snr_db_lo {
        return Err(Error::InvalidArgument("sweep needs steps >= 1 and lo <= hi".into()));
    }
    let grid: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                snr_db_lo
            } else {
                snr_db_lo + (snr_db_hi - snr_db_lo) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    grid.par_iter()
        .map(|&s| {
            let mut r = compare(curve, &ch.with_input_snr(from_db(s)), n_quad)?;
            r.input_snr_db = s;
            Ok(r)
        })
        .collect()
}

/// CSV with header `input_snr_db,snr_dfe_db,i_sl_bits,i_ofdm_bits,diff_bits`.
pub fn write_sweep_csv<W: Write>(rows: &[RateComparison], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["input_snr_db", "snr_dfe_db", "i_sl_bits", "i_ofdm_bits", "diff_bits"])?;
    for r in rows {
        wr.write_record([
            crate::fmt_sig(r.input_snr_db),
            crate::fmt_sig(r.snr_dfe_db()),
            crate::fmt_sig(r.i_sl_bits),
            crate::fmt_sig(r.i_ofdm_bits),
            crate::fmt_sig(r.diff_bits),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Input SNR (dB) at which each scheme first reaches `fraction` of the entropy,
/// returned as `(single_carrier_db, ofdm_db)`.
pub fn snr_for_rate(curve: &dyn InfoCurve, ch: &IsiChannel, fraction: f64, n_quad: usize) -> Result<(f64, f64)> {
    let h = curve.entropy_nats() / LN_2;
    if !(fraction > 0.0 && fraction < 1.0) || !h.is_finite() {
        return Err(Error::InvalidArgument("rate target needs a finite entropy and 0 < fraction < 1".into()));
    }
    let target = fraction * h;
    let solve = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let (mut lo, mut hi) = (-30.0, 80.0);
        if f(hi)? < target {
            return Err(Error::NoConvergence(format!("rate {target} bits not reached by {hi} dB")));
        }
        while hi - lo > 1e-6 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let sl = solve(&|s| rate_sl(curve, &ch.with_input_snr(from_db(s)), n_quad))?;
    let ofdm = solve(&|s| rate_ofdm(curve, &ch.with_input_snr(from_db(s)), n_quad))?;
    Ok((sl, ofdm))
}

/// The two channel families used to realize extreme rate differences.
#[derive(Clone, Copy, Debug)]
pub enum Extremal<'a> {
    /// Two levels at the contact points of the widest bridge; attains `I_SL - I_OFDM = -Delta_x`.
    MinDiff(&'a ConcavityReport),
    /// `|H|^2 = e^{G^2} - 1` on `|theta| <= pi/G`, zero elsewhere.
    Sharp(f64),
}

fn symmetric_band(half: f64, inner: f64, outer: f64) -> Vec<Band> {
    let half = half.clamp(0.0, PI);
    vec![
        Band {
            theta_lo: -PI,
            theta_hi: -half,
            gain_sq: outer,
        },
        Band {
            theta_lo: -half,
            theta_hi: half,
            gain_sq: inner,
        },
        Band {
            theta_lo: half,
            theta_hi: PI,
            gain_sq: outer,
        },
    ]
}

/// Builds a frequency-domain channel of the requested kind.
///
/// For `MinDiff` the low level occupies the fraction
/// `log((1+g2)/(1+gm)) / log((1+g2)/(1+g1))` of the band, so that the mean
/// log-SNR lands on the point of largest gap.
pub fn extremal_channel(kind: Extremal) -> Result<IsiChannel> {
    match kind {
        Extremal::MinDiff(r) => {
            let b = r
                .bridges
                .iter()
                .max_by(|a, b| a.delta.total_cmp(&b.delta))
                .filter(|b| b.delta > 0.0)
                .ok_or_else(|| Error::InvalidArgument("minimum-difference channel needs Delta_x > 0".into()))?;
            let frac = (b.zeta2 - b.zeta_m) / (b.zeta2 - b.zeta1);
            IsiChannel::from_bands(symmetric_band(PI * frac, gamma_of_zeta(b.zeta1), gamma_of_zeta(b.zeta2)))
        }
        Extremal::Sharp(g) => {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidArgument(format!("sharpness must be positive, got {g}")));
            }
            IsiChannel::from_bands(symmetric_band(PI / g, (g * g).exp_m1(), 0.0))
        }
    }
}

/// Uncoded symbol error rate of unit-power square QAM at SNR `gamma`, with
/// `q = Q(sqrt((d_min/2)^2 gamma))`.
pub fn subcarrier_ser(qam_order: usize, gamma: f64) -> Result<f64> {
    let m = (qam_order as f64).sqrt().round() as usize;
    if m < 2 || m * m != qam_order {
        return Err(Error::InvalidOrder {
            family: "QAM".into(),
            order: qam_order,
            constraint: "a perfect square of at least 4",
        });
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let half_sq = 1.5 / (qam_order as f64 - 1.0);
    let q = q_function((half_sq * gamma).sqrt());
    let p = 2.0 * (m as f64 - 1.0) / m as f64 * q;
    Ok(2.0 * p - p * p)
}

/// Seeded random channel: up to `max_len` i.i.d. complex Gaussian taps, scaled
/// to an input SNR drawn uniformly in dB over `snr_db`.
pub fn random_channel<R: Rng>(rng: &mut R, max_len: usize, snr_db: (f64, f64)) -> IsiChannel {
    let len = rng.random_range(1..=max_len.max(1));
    loop {
        let taps: Vec<Complex64> = (0..len)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect();
        if let Ok(ch) = IsiChannel::from_taps(taps) {
            let s = rng.random_range(snr_db.0..=snr_db.1);
            return ch.with_input_snr(from_db(s));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_tap_transfer() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ch = IsiChannel::from_taps(vec![Complex64::new(s, 0.0); 2]).unwrap();
        for th in [-3.0, -1.0, 0.0, 0.4, 2.5] {
            assert!((ch.transfer(th) - (1.0 + f64::cos(th))).abs() < 1e-14);
        }
    }

    #[test]
    fn sharp_channel_levels() {
        let ch = extremal_channel(Extremal::Sharp(3.0)).unwrap();
        assert!((ch.transfer(0.0) - 9f64.exp_m1()).abs() < 1e-6);
        assert_eq!(ch.transfer(2.0), 0.0);
        let dfe = snr_mmse_dfe_u(&ch, MIN_QUAD).unwrap();
        assert!((dfe - 3f64.exp_m1()).abs() < 1e-9);
    }

    #[test]
    fn ser_at_corollary_boundary() {
        // (d/2)^2 gamma = 1 for 256-QAM
        let p = subcarrier_ser(256, 170.0).unwrap();
        assert!((p - 0.5065).abs() < 1e-3, "{p}");
        assert!(subcarrier_ser(8, 1.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let ch = ieee80211n_taps();
        assert_eq!(IsiChannel::from_json(&ch.to_json()).unwrap(), ch);
        let b = extremal_channel(Extremal::Sharp(2.0)).unwrap();
        assert_eq!(IsiChannel::from_json(&b.to_json()).unwrap(), b);
    }
}
