#![allow(dead_code)]

use isirl::isi::{self, IsiChannel, InfoCurve, MIN_QUAD};
use isirl::logsnr::{build_profile, concave_envelope, zeta_of_gamma, ConcavityReport, LogSnrProfile};
use isirl::logsnr::{DEFAULT_RESOLUTION_BITS, DEFAULT_SATURATION_EPS};
use isirl::uniform::UniformProfile;
use isirl::{Constellation, Evaluator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{LN_2, PI};

pub const SUITE_INPUTS: [&str; 4] = ["QPSK", "16-QAM", "64-QAM", "256-QAM"];
pub const SUITE_SIZE: usize = 200;
pub const SUITE_SEED: u64 = 2024;
/// Input SNR range of the random channels, in dB.
pub const SUITE_SNR_DB: (f64, f64) = (-5.0, 35.0);
/// Slack on `I_OFDM <= I_SL` where the theorem gives no gap at all.
pub const JENSEN_TOL_BITS: f64 = 1e-9;

pub struct Finite {
    pub name: String,
    pub order: usize,
    pub profile: LogSnrProfile,
    pub report: ConcavityReport,
}

pub fn finite(name: &str) -> Finite {
    let c = Constellation::by_name(name).unwrap();
    let ev = Evaluator::new(&c);
    let profile = build_profile(&ev, DEFAULT_RESOLUTION_BITS, DEFAULT_SATURATION_EPS).unwrap();
    let report = concave_envelope(&profile);
    Finite {
        name: name.to_string(),
        order: c.len(),
        profile,
        report,
    }
}

pub fn random_channels(n: usize, seed: u64) -> Vec<IsiChannel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| isi::random_channel(&mut rng, 12, SUITE_SNR_DB)).collect()
}

/// Which of the three sufficient conditions for `I_OFDM <= I_SL` hold.
pub fn conditions(r: &ConcavityReport, ch: &IsiChannel, snr_dfe: f64) -> [bool; 3] {
    if !r.has_bridges() {
        return [true; 3];
    }
    let (lo, hi) = ch.transfer_range();
    let z = zeta_of_gamma(snr_dfe);
    [
        r.zeta0_high.is_some_and(|z0| zeta_of_gamma(lo) >= z0),
        r.zeta0_low.is_some_and(|z0| zeta_of_gamma(hi) <= z0),
        z <= r.zeta1_low || z >= r.zeta2_high,
    ]
}

/// Per-condition hit counts and violation messages for one input.
pub struct SuiteOutcome {
    pub checked: usize,
    pub condition_hits: [usize; 3],
    pub ser_hits: usize,
    pub worst_excess_bits: f64,
    pub violations: Vec<String>,
}

pub fn theorem_suite(f: &Finite, chans: &[IsiChannel]) -> SuiteOutcome {
    let delta = f.report.delta_x_bits();
    let h = f.profile.entropy_nats / LN_2;
    let mut out = SuiteOutcome {
        checked: 0,
        condition_hits: [0; 3],
        ser_hits: 0,
        worst_excess_bits: f64::NEG_INFINITY,
        violations: Vec::new(),
    };
    for (k, ch) in chans.iter().enumerate() {
        let snr = isi::snr_mmse_dfe_u(ch, MIN_QUAD).unwrap();
        let sl = f.profile.info_nats(snr) / LN_2;
        let ofdm = isi::rate_ofdm(&f.profile, ch, MIN_QUAD).unwrap();
        let excess = ofdm - sl;
        out.checked += 1;
        out.worst_excess_bits = out.worst_excess_bits.max(excess);
        for v in [sl, ofdm] {
            if !(-1e-12..=h + 1e-9).contains(&v) {
                out.violations.push(format!("{} channel {k}: rate {v} outside [0, {h}]", f.name));
            }
        }
        if excess > delta + 1e-6 {
            out.violations.push(format!("{} channel {k}: excess {excess:e} > Delta {delta:e}", f.name));
        }
        for (i, c) in conditions(&f.report, ch, snr).into_iter().enumerate() {
            if c {
                out.condition_hits[i] += 1;
                if excess > JENSEN_TOL_BITS {
                    out.violations.push(format!("{} channel {k}: condition {} holds but excess {excess:e}", f.name, i + 1));
                }
            }
        }
        let m = (f.order as f64).sqrt().round() as usize;
        if m >= 16 {
            let all_below = (0..1024).all(|i| {
                let g = ch.transfer(-PI + 2.0 * PI * i as f64 / 1024.0);
                g > 0.0 && isi::subcarrier_ser(f.order, g).unwrap() < 0.5
            });
            if all_below {
                out.ser_hits += 1;
                if excess > 1e-6 {
                    out.violations.push(format!("{} channel {k}: SER below 1/2 but excess {excess:e}", f.name));
                }
            }
        }
    }
    out
}

/// Two-sided bound of the uniform input; returns the extreme differences and violations.
pub fn uniform_suite(u: &UniformProfile, chans: &[IsiChannel]) -> (f64, f64, Vec<String>) {
    let dt = u.delta_tilde_nats / LN_2;
    let (mut lo_seen, mut hi_seen) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut bad = Vec::new();
    for (k, ch) in chans.iter().enumerate() {
        let r = isi::compare(u, ch, MIN_QUAD).unwrap();
        let d = r.i_ofdm_bits - r.i_sl_bits;
        let cap = u.deltabar(ch.transfer_range().1).delta / LN_2;
        lo_seen = lo_seen.min(d);
        hi_seen = hi_seen.max(d - cap);
        if d < -dt - 1e-4 || d > cap + 1e-4 {
            bad.push(format!("uniform channel {k}: I_OFDM - I_SL = {d:e}, allowed [{:e}, {cap:e}]", -dt));
        }
    }
    (lo_seen, hi_seen, bad)
}
