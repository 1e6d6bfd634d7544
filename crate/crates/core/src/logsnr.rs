//! Mutual information on the log-SNR scale `zeta = log(1 + gamma)`.
//!
//! A profile samples `I(zeta)`, its slope `(1+gamma) mmse` and its curvature
//! `(1+gamma)[mmse + (1+gamma) mmse']` on a uniform grid. Between grid points the
//! three samples define a quintic Hermite interpolant, so refinement steps
//! (threshold bisection, tangency solves, golden-section maxima) work far below
//! the grid spacing without further channel evaluations.

use crate::error::{Error, Result};
use crate::scalar::ScalarInput;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Default grid spacing in bits of log-SNR.
pub const DEFAULT_RESOLUTION_BITS: f64 = 5e-4;
/// Default saturation threshold on `H - I`, in nats.
pub const DEFAULT_SATURATION_EPS: f64 = 1e-7;
/// Profiles that have not saturated by this log-SNR are rejected.
pub const ZETA_LIMIT: f64 = 60.0;
/// Curvature values above this count as convex.
pub const CONCAVITY_MARGIN: f64 = 1e-10;
/// Envelope gaps below this are treated as contact.
const BRIDGE_GAP: f64 = 1e-12;

/// `zeta = log(1 + gamma)`.
pub fn zeta_of_gamma(gamma: f64) -> f64 {
    gamma.ln_1p()
}

/// `gamma = exp(zeta) - 1`.
pub fn gamma_of_zeta(zeta: f64) -> f64 {
    zeta.exp_m1()
}

pub fn db(gamma: f64) -> f64 {
    10.0 * gamma.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Log-SNR samples of one input distribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogSnrProfile {
    pub label: String,
    pub zeta: Vec<f64>,
    pub ilog: Vec<f64>,
    /// `(1 + gamma) mmse`.
    pub dilog: Vec<f64>,
    /// `(1 + gamma) [mmse + (1 + gamma) mmse']`.
    pub ddilog: Vec<f64>,
    pub zeta_max: f64,
    pub entropy_nats: f64,
}

fn uniform_grid(step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 * step).collect()
}

fn check_resolution(resolution_bits: f64) -> Result<f64> {
    if !(resolution_bits > 0.0 && resolution_bits <= 0.01) {
        return Err(Error::InvalidArgument(format!(
            "profile resolution must be in (0, 0.01] bits, got {resolution_bits}"
        )));
    }
    Ok(resolution_bits * LN_2)
}

/// Samples `input` from `zeta = 0` until `H - I < saturation_eps`.
pub fn build_profile(input: &dyn ScalarInput, resolution_bits: f64, saturation_eps: f64) -> Result<LogSnrProfile> {
    let step = check_resolution(resolution_bits)?;
    let h = input.entropy_nats();
    if !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "{} does not saturate; use build_profile_to",
            input.label()
        )));
    }
    let mut p = empty(input, h);
    let chunk = 512;
    let mut start = 0usize;
    loop {
        let zs = (start..start + chunk).map(|i| i as f64 * step).collect::<Vec<_>>();
        let pts: Vec<_> = zs.par_iter().map(|&z| input.eval(gamma_of_zeta(z))).collect();
        for (z, pt) in zs.iter().zip(pts) {
            if *z > ZETA_LIMIT {
                return Err(Error::NoSaturation {
                    zeta: ZETA_LIMIT,
                    deficit: h - p.ilog.last().copied().unwrap_or(0.0),
                });
            }
            push(&mut p, *z, &pt);
            if h - pt.info < saturation_eps {
                p.zeta_max = *z;
                return Ok(p);
            }
        }
        start += chunk;
    }
}

/// Samples `input` on `[0, zeta_max]` without a saturation requirement.
pub fn build_profile_to(input: &dyn ScalarInput, resolution_bits: f64, zeta_max: f64) -> Result<LogSnrProfile> {
    let step = check_resolution(resolution_bits)?;
    if !(zeta_max > 0.0 && zeta_max <= ZETA_LIMIT) {
        return Err(Error::InvalidArgument(format!("zeta_max must be in (0, {ZETA_LIMIT}]")));
    }
    let n = (zeta_max / step).ceil() as usize + 1;
    let step = zeta_max / (n - 1) as f64;
    let zs = uniform_grid(step, n);
    let pts: Vec<_> = zs.par_iter().map(|&z| input.eval(gamma_of_zeta(z))).collect();
    let mut p = empty(input, input.entropy_nats());
    for (z, pt) in zs.iter().zip(&pts) {
        push(&mut p, *z, pt);
    }
    p.zeta_max = zeta_max;
    Ok(p)
}

fn empty(input: &dyn ScalarInput, h: f64) -> LogSnrProfile {
    LogSnrProfile {
        label: input.label(),
        zeta: Vec::new(),
        ilog: Vec::new(),
        dilog: Vec::new(),
        ddilog: Vec::new(),
        zeta_max: 0.0,
        entropy_nats: h,
    }
}

fn push(p: &mut LogSnrProfile, z: f64, pt: &crate::scalar::ScalarPoint) {
    let a = 1.0 + pt.gamma;
    p.zeta.push(z);
    p.ilog.push(pt.info);
    p.dilog.push(a * pt.mmse);
    p.ddilog.push(a * (pt.mmse + a * pt.dmmse));
}

impl LogSnrProfile {
    /// Profile from explicit samples, e.g. an envelope or a closed form.
    pub fn from_samples(
        label: &str,
        zeta: Vec<f64>,
        ilog: Vec<f64>,
        dilog: Vec<f64>,
        ddilog: Vec<f64>,
        entropy_nats: f64,
    ) -> Result<Self> {
        let n = zeta.len();
        if n < 2 || ilog.len() != n || dilog.len() != n || ddilog.len() != n {
            return Err(Error::InvalidArgument("profile needs at least two samples of each series".into()));
        }
        if zeta.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("profile grid must be strictly increasing".into()));
        }
        Ok(LogSnrProfile {
            label: label.into(),
            zeta_max: zeta[n - 1],
            zeta,
            ilog,
            dilog,
            ddilog,
            entropy_nats,
        })
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    fn cell(&self, z: f64) -> usize {
        let n = self.zeta.len();
        self.zeta.partition_point(|&v| v <= z).clamp(1, n - 1) - 1
    }

    /// Value, slope and curvature of the interpolant at `z`.
    pub fn interp(&self, z: f64) -> (f64, f64, f64) {
        let i = self.cell(z);
        let h = self.zeta[i + 1] - self.zeta[i];
        let t = (z - self.zeta[i]) / h;
        let c0 = self.ilog[i];
        let c1 = h * self.dilog[i];
        let c2 = 0.5 * h * h * self.ddilog[i];
        let f = self.ilog[i + 1] - (c0 + c1 + c2);
        let d = h * self.dilog[i + 1] - (c1 + 2.0 * c2);
        let s = h * h * self.ddilog[i + 1] - 2.0 * c2;
        let c3 = 10.0 * f - 4.0 * d + 0.5 * s;
        let c4 = -15.0 * f + 7.0 * d - s;
        let c5 = 6.0 * f - 3.0 * d + 0.5 * s;
        let v = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
        let dv = c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
        let ddv = 2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5));
        (v, dv / h, ddv / (h * h))
    }

    pub fn ilog_at(&self, z: f64) -> f64 {
        self.interp(z).0
    }

    pub fn dilog_at(&self, z: f64) -> f64 {
        self.interp(z).1
    }

    pub fn ddilog_at(&self, z: f64) -> f64 {
        self.interp(z).2
    }

    /// CSV with header `zeta_bits,gamma_db,ilog_bits,dilog,ddilog`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["zeta_bits", "gamma_db", "ilog_bits", "dilog", "ddilog"])?;
        for i in 0..self.len() {
            wr.write_record([
                crate::fmt_sig(self.zeta[i] / LN_2),
                crate::fmt_sig(db(gamma_of_zeta(self.zeta[i]))),
                crate::fmt_sig(self.ilog[i] / LN_2),
                crate::fmt_sig(self.dilog[i]),
                crate::fmt_sig(self.ddilog[i]),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Where the curvature of `I(zeta)` changes sign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Thresholds {
    /// Curvature below the margin at every grid point.
    ConcaveEverywhere {
        /// Largest curvature seen; positive values inside the margin are flagged.
        max_ddilog: f64,
        borderline: bool,
    },
    Crossings {
        /// First crossing into convexity.
        low: f64,
        /// Last return to concavity, if the grid reaches it.
        high: Option<f64>,
        /// Every refined crossing.
        all: Vec<f64>,
        /// More than two crossings.
        anomaly: bool,
    },
}

impl Thresholds {
    pub fn is_concave(&self) -> bool {
        matches!(self, Thresholds::ConcaveEverywhere { .. })
    }

    pub fn low(&self) -> Option<f64> {
        match self {
            Thresholds::ConcaveEverywhere { .. } => None,
            Thresholds::Crossings { low, .. } => Some(*low),
        }
    }

    pub fn high(&self) -> Option<f64> {
        match self {
            Thresholds::ConcaveEverywhere { .. } => None,
            Thresholds::Crossings { high, .. } => *high,
        }
    }
}

/// Bisection tolerance on crossings, in nats.
const CROSSING_TOL: f64 = 1e-4 * LN_2 * 1e-3;

/// Sign changes of the curvature, refined on the interpolant.
pub fn concavity_thresholds(p: &LogSnrProfile) -> Thresholds {
    let convex = |v: f64| v > CONCAVITY_MARGIN;
    let max_dd = p.ddilog.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !p.ddilog.iter().any(|&v| convex(v)) {
        return Thresholds::ConcaveEverywhere {
            max_ddilog: max_dd,
            borderline: max_dd > 1e-2 * CONCAVITY_MARGIN,
        };
    }
    let mut all = Vec::new();
    for i in 0..p.len() - 1 {
        let (a, b) = (convex(p.ddilog[i]), convex(p.ddilog[i + 1]));
        if a != b {
            let (mut lo, mut hi) = (p.zeta[i], p.zeta[i + 1]);
            while hi - lo > CROSSING_TOL {
                let mid = 0.5 * (lo + hi);
                if convex(p.ddilog_at(mid)) == a {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            all.push(0.5 * (lo + hi));
        }
    }
    let starts_convex = convex(p.ddilog[0]);
    let ends_convex = convex(p.ddilog[p.len() - 1]);
    let low = if starts_convex { 0.0 } else { all[0] };
    let high = if ends_convex { None } else { all.last().copied() };
    Thresholds::Crossings {
        low,
        high,
        anomaly: all.len() > 2,
        all,
    }
}

/// One linear piece of the concave envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bridge {
    pub zeta1: f64,
    pub zeta2: f64,
    /// Common slope at both contact points.
    pub slope: f64,
    /// Largest gap between the bridge and `I(zeta)`, in nats.
    pub delta: f64,
    /// Where that gap is attained.
    pub zeta_m: f64,
}

impl Bridge {
    pub fn value(&self, p: &LogSnrProfile, z: f64) -> f64 {
        p.ilog_at(self.zeta1) + self.slope * (z - self.zeta1)
    }
}

/// Concavity structure of one input, mirroring the columns of the summary table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub label: String,
    pub thresholds: Thresholds,
    pub zeta0_low: Option<f64>,
    pub zeta0_high: Option<f64>,
    /// Start of the first bridge, or `zeta_max` when there is none.
    pub zeta1_low: f64,
    /// End of the last bridge, or `zeta_max` when there is none.
    pub zeta2_high: f64,
    pub bridges: Vec<Bridge>,
    pub delta_x_nats: f64,
    pub zeta_max: f64,
}

fn opt_db(z: Option<f64>) -> Option<f64> {
    z.map(|z| db(gamma_of_zeta(z)))
}

impl ConcavityReport {
    pub fn has_bridges(&self) -> bool {
        !self.bridges.is_empty()
    }

    pub fn gamma1_low_db(&self) -> Option<f64> {
        opt_db(self.has_bridges().then_some(self.zeta1_low))
    }

    pub fn gamma0_low_db(&self) -> Option<f64> {
        opt_db(self.zeta0_low)
    }

    pub fn gamma0_high_db(&self) -> Option<f64> {
        opt_db(self.zeta0_high)
    }

    pub fn gamma2_high_db(&self) -> Option<f64> {
        opt_db(self.has_bridges().then_some(self.zeta2_high))
    }

    pub fn delta_x_bits(&self) -> f64 {
        self.delta_x_nats / LN_2
    }

    /// Envelope value at `z`.
    pub fn envelope_at(&self, p: &LogSnrProfile, z: f64) -> f64 {
        for b in &self.bridges {
            if z >= b.zeta1 && z <= b.zeta2 {
                return b.value(p, z);
            }
        }
        if z >= p.zeta_max {
            return p.ilog[p.len() - 1];
        }
        p.ilog_at(z)
    }

    /// Envelope sampled on the profile grid, as a profile of its own.
    pub fn envelope_profile(&self, p: &LogSnrProfile) -> LogSnrProfile {
        let mut ilog = Vec::with_capacity(p.len());
        let mut dilog = Vec::with_capacity(p.len());
        let mut ddilog = Vec::with_capacity(p.len());
        for i in 0..p.len() {
            let z = p.zeta[i];
            match self.bridges.iter().find(|b| z >= b.zeta1 && z <= b.zeta2) {
                Some(b) => {
                    ilog.push(b.value(p, z));
                    dilog.push(b.slope);
                    ddilog.push(0.0);
                }
                None => {
                    ilog.push(p.ilog[i]);
                    dilog.push(p.dilog[i]);
                    ddilog.push(p.ddilog[i].min(0.0));
                }
            }
        }
        LogSnrProfile {
            label: format!("envelope of {}", p.label),
            zeta: p.zeta.clone(),
            ilog,
            dilog,
            ddilog,
            zeta_max: p.zeta_max,
            entropy_nats: p.entropy_nats,
        }
    }

    /// JSON with the summary-table columns in dB and bits.
    pub fn table_json(&self, dmin_half_sq_db: Option<f64>) -> serde_json::Value {
        serde_json::json!({
            "input": self.label,
            "dmin_half_sq_db": dmin_half_sq_db,
            "gamma1_low_db": self.gamma1_low_db(),
            "gamma0_low_db": self.gamma0_low_db(),
            "gamma0_high_db": self.gamma0_high_db(),
            "gamma2_high_db": self.gamma2_high_db(),
            "delta_x_bits": self.delta_x_bits(),
            "concave_everywhere": self.thresholds.is_concave(),
            "bridges": self.bridges.len(),
        })
    }
}

/// Vertices of the upper hull of the samples, by the monotone chain.
pub fn upper_hull(x: &[f64], y: &[f64]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            // drop b unless it lies strictly above the chord a-i
            let cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a]);
            if cross >= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

/// Upper concave envelope with refined contact points.
pub fn concave_envelope(p: &LogSnrProfile) -> ConcavityReport {
    let thresholds = concavity_thresholds(p);
    let hull = upper_hull(&p.zeta, &p.ilog);
    let mut bridges = Vec::new();
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a + 1 {
            continue;
        }
        let s = (p.ilog[b] - p.ilog[a]) / (p.zeta[b] - p.zeta[a]);
        let gap = (a + 1..b)
            .map(|k| p.ilog[a] + s * (p.zeta[k] - p.zeta[a]) - p.ilog[k])
            .fold(0.0, f64::max);
        if gap > BRIDGE_GAP {
            bridges.push(refine_bridge(p, a, b));
        }
    }
    let mut r = ConcavityReport {
        label: p.label.clone(),
        zeta0_low: thresholds.low(),
        zeta0_high: thresholds.high(),
        thresholds,
        zeta1_low: bridges.first().map_or(p.zeta_max, |b| b.zeta1),
        zeta2_high: bridges.last().map_or(p.zeta_max, |b| b.zeta2),
        bridges,
        delta_x_nats: 0.0,
        zeta_max: p.zeta_max,
    };
    r.delta_x_nats = delta_x(p, &mut r);
    r
}

/// Root of `dilog = s` in `[lo, hi]`, where `dilog` is assumed decreasing; clamped to the ends.
fn slope_point(p: &LogSnrProfile, s: f64, lo: f64, hi: f64) -> f64 {
    if p.dilog_at(lo) <= s {
        return lo;
    }
    if p.dilog_at(hi) >= s {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if p.dilog_at(m) > s {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * (1.0 + m) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Solves the tangency system near the hull vertices `a < b`: equal slopes at
/// both contacts and a chord that touches both, by bisection on the slope.
fn refine_bridge(p: &LogSnrProfile, a: usize, b: usize) -> Bridge {
    let n = p.len();
    let w1 = (p.zeta[a.saturating_sub(2)], p.zeta[(a + 2).min(n - 1)]);
    let w2 = (p.zeta[b.saturating_sub(2)], p.zeta[(b + 2).min(n - 1)]);
    let ends = [w1.0, w1.1, w2.0, w2.1].map(|z| p.dilog_at(z));
    let mut s_lo = ends.iter().copied().fold(f64::INFINITY, f64::min);
    let mut s_hi = ends.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // intercept difference between the two supporting lines of slope s; decreasing in s
    let contacts = |s: f64| {
        let z1 = slope_point(p, s, w1.0, w1.1);
        let z2 = slope_point(p, s, w2.0, w2.1);
        (z1, z2, (p.ilog_at(z2) - s * z2) - (p.ilog_at(z1) - s * z1))
    };
    for _ in 0..200 {
        let s = 0.5 * (s_lo + s_hi);
        if contacts(s).2 > 0.0 {
            s_lo = s;
        } else {
            s_hi = s;
        }
        if s_hi - s_lo <= 1e-16 * s_hi.abs() {
            break;
        }
    }
    let s = 0.5 * (s_lo + s_hi);
    let (z1, z2, _) = contacts(s);
    // the chord slope is the consistent one when the contacts sit at window ends
    let slope = (p.ilog_at(z2) - p.ilog_at(z1)) / (z2 - z1);
    Bridge {
        zeta1: z1,
        zeta2: z2,
        slope,
        delta: 0.0,
        zeta_m: z1,
    }
}

/// Largest gap between envelope and `I(zeta)`, refined by golden section on each bridge.
/// Fills the per-bridge gap and its location in `report`.
pub fn delta_x(p: &LogSnrProfile, report: &mut ConcavityReport) -> f64 {
    let mut best = 0.0f64;
    for b in report.bridges.iter_mut() {
        let f = |z: f64| b.value(p, z) - p.ilog_at(z);
        let i0 = p.zeta.partition_point(|&v| v < b.zeta1);
        let i1 = p.zeta.partition_point(|&v| v <= b.zeta2);
        let k = (i0..i1.max(i0 + 1).min(p.len()))
            .max_by(|&x, &y| f(p.zeta[x]).partial_cmp(&f(p.zeta[y])).unwrap())
            .unwrap_or(i0);
        let lo = p.zeta[k.saturating_sub(1)].max(b.zeta1);
        let hi = p.zeta[(k + 1).min(p.len() - 1)].min(b.zeta2);
        let (zm, v) = golden_max(f, lo, hi, 1e-12);
        b.delta = v.max(0.0);
        b.zeta_m = zm;
        best = best.max(b.delta);
    }
    best
}

/// Golden-section maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol * (1.0 + a.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Search box and coarse grid size for [`delta_x_direct`].
#[derive(Clone, Copy, Debug)]
pub struct DirectSearch {
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub coarse: usize,
    pub sweeps: usize,
}

impl DirectSearch {
    /// Box `[gamma1/2, 2 gamma2]` around a computed report.
    pub fn around(r: &ConcavityReport) -> Self {
        let (g1, g2) = if r.has_bridges() {
            (gamma_of_zeta(r.zeta1_low), gamma_of_zeta(r.zeta2_high))
        } else {
            (0.01, gamma_of_zeta(r.zeta_max))
        };
        DirectSearch {
            gamma_lo: 0.5 * g1,
            gamma_hi: 2.0 * g2,
            coarse: 48,
            sweeps: 12,
        }
    }
}

/// Chord gap `[(z2 - z) I(z1) + (z - z1) I(z2)]/(z2 - z1) - I(z)` for `z1 <= z <= z2`.
pub fn chord_gap(i1: f64, i: f64, i2: f64, z1: f64, z: f64, z2: f64) -> f64 {
    if z2 - z1 <= 0.0 {
        return 0.0;
    }
    ((z2 - z) * i1 + (z - z1) * i2) / (z2 - z1) - i
}

/// Largest chord gap of `I(zeta)` over the search box, from direct channel
/// evaluations: a coarse grid followed by coordinate ascent.
pub fn delta_x_direct(input: &dyn ScalarInput, spec: &DirectSearch) -> f64 {
    let zl = zeta_of_gamma(spec.gamma_lo);
    let zh = zeta_of_gamma(spec.gamma_hi);
    let n = spec.coarse.max(3);
    let zs: Vec<f64> = (0..n).map(|i| zl + (zh - zl) * i as f64 / (n - 1) as f64).collect();
    let is: Vec<f64> = zs.par_iter().map(|&z| input.info(gamma_of_zeta(z))).collect();
    let mut best = (0.0, [zl, zl, zl]);
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                let v = chord_gap(is[a], is[b], is[c], zs[a], zs[b], zs[c]);
                if v > best.0 {
                    best = (v, [zs[a], zs[b], zs[c]]);
                }
            }
        }
    }
    if best.0 <= 0.0 {
        return 0.0;
    }
    let info = |z: f64| input.info(gamma_of_zeta(z));
    let obj = |z: [f64; 3]| chord_gap(info(z[0]), info(z[1]), info(z[2]), z[0], z[1], z[2]);
    let mut x = best.1;
    let mut width = 2.0 * (zh - zl) / (n - 1) as f64;
    for _ in 0..spec.sweeps {
        for k in 0..3 {
            let lo = if k == 0 { zl } else { x[k - 1] };
            let hi = if k == 2 { zh } else { x[k + 1] };
            let a = (x[k] - width).max(lo);
            let b = (x[k] + width).min(hi);
            if b <= a {
                continue;
            }
            let (z, _) = golden_max(
                |z| {
                    let mut y = x;
                    y[k] = z;
                    obj(y)
                },
                a,
                b,
                1e-9,
            );
            x[k] = z;
        }
        width *= 0.6;
    }
    obj(x).max(best.0)
}
