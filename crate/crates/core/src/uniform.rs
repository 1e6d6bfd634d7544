//! Continuous uniform input on a square (the dense-QAM limit).
//!
//! Each real component is uniform on `[-a, a]` with `a = sqrt(6)/2`, so the
//! complex input has unit power. Given an output `y` the component posterior is
//! a normal law truncated to `[-a, a]`, which gives closed forms for every
//! pointwise quantity; only the outer integral over `y` is numerical.

use crate::error::{Error, Result};
use crate::logsnr::{self, concavity_thresholds, db, gamma_of_zeta, zeta_of_gamma, LogSnrProfile};
use crate::scalar::{ScalarInput, ScalarPoint};
use crate::special::{q_function, q_scaled, GaussLegendre};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{E, LN_2, PI};
use std::io::Write;
use std::sync::OnceLock;

/// Width of the support of one real component.
pub const WIDTH: f64 = 2.449_489_742_783_178;
const HALF: f64 = 0.5 * WIDTH;
/// Below this SNR the MMSE is integrated directly from conditional variances.
pub const METHOD_SWITCH: f64 = 0.5;
/// Log-SNR span of the default profile, in nats.
pub const PROFILE_ZETA_MAX: f64 = 25.0;
pub const PROFILE_RESOLUTION_BITS: f64 = 1e-3;
/// `(|u|)` beyond which the output-domain integrands are dropped.
const TAIL: f64 = 13.0;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// `log(pi e / 6)`, the high-SNR gap to the Gaussian-input curve, in nats.
pub fn shaping_offset() -> f64 {
    (PI * E / 6.0).ln()
}

fn rule() -> &'static GaussLegendre {
    static R: OnceLock<GaussLegendre> = OnceLock::new();
    R.get_or_init(|| GaussLegendre::new(16))
}

/// Pointwise quantities at output `y >= 0` of one real component.
struct Local {
    /// Output density times `WIDTH`.
    z: f64,
    g: f64,
    h1: f64,
    h2: f64,
    /// Conditional variance.
    var: f64,
}

fn local(y: f64, gamma: f64) -> Local {
    let s = (2.0 * gamma).sqrt();
    let (u, v) = (s * (y - HALF), s * (y + HALF));
    let e1 = (-0.5 * u * u).exp();
    let r = (-4.0 * gamma * HALF * y).exp();
    let t = -(-4.0 * gamma * HALF * y).exp_m1();
    // ratio e1 / Z, kept finite where both underflow
    let (z, ratio) = if u > 0.0 {
        let d = q_scaled(u) - r * q_scaled(v);
        (e1 * d, 1.0 / d)
    } else {
        let z = 1.0 - q_function(-u) - q_function(v);
        (z, e1 / z)
    };
    let (ym, yp) = (y - HALF, y + HALF);
    let g = e1 * t * t * ratio / (2.0 * PI * WIDTH);
    let h1 = e1 * (ym * ym - yp * yp * r) * t * ratio / (PI * WIDTH);
    let h2 = e1 * (ym - yp * r) * t * t * ratio * ratio / (4.0 * PI * WIDTH * (PI * gamma).sqrt());
    let a = (u - v * r) * ratio / SQRT_2PI;
    let b = t * ratio / SQRT_2PI;
    let var = (1.0 + a - b * b) / (s * s);
    Local { z, g, h1, h2, var }
}

/// Sums over `y >= 0` of the g-form integrands: `(G, G', E[var^2])`, each over the
/// whole line.
fn g_form(gamma: f64) -> (f64, f64, f64) {
    let s = (2.0 * gamma).sqrt();
    let lo = (HALF - TAIL / s).max(0.0);
    let hi = HALF + TAIL / s;
    let h = (0.5 / s).min(0.25);
    let n = ((hi - lo) / h).ceil() as usize;
    let w = (hi - lo) / n as f64;
    let r = rule();
    let (mut g, mut dg, mut v2) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let (a, b) = (lo + k as f64 * w, lo + (k + 1) as f64 * w);
        let (c, hw) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, wt) in r.nodes.iter().zip(&r.weights) {
            let l = local(c + hw * x, gamma);
            let q = wt * hw;
            g += q * l.g;
            dg += q * (l.h2 - l.h1);
            v2 += q * l.z * l.var * l.var;
        }
    }
    // interior where the posterior is an untruncated normal
    v2 = v2 / WIDTH + lo / WIDTH / (s.powi(4));
    (2.0 * g, 2.0 * dg, 2.0 * v2)
}

/// Posterior mean and variance of one component by quadrature over the support.
fn posterior_direct(y: f64, gamma: f64, xs: &[f64], ws: &[f64]) -> (f64, f64) {
    let mut z = 0.0;
    let mut m = 0.0;
    let wts: Vec<f64> = xs
        .iter()
        .zip(ws)
        .map(|(&x, &w)| {
            let p = w * (-gamma * (y - x) * (y - x)).exp();
            z += p;
            m += p * x;
            p
        })
        .collect();
    m /= z;
    let var = xs.iter().zip(&wts).map(|(&x, &p)| p * (x - m) * (x - m)).sum::<f64>() / z;
    (z, var)
}

/// `(E[var], E[var^2])` of one component, integrating conditional variances.
fn direct(gamma: f64) -> (f64, f64) {
    let sig = (0.5 / gamma).sqrt();
    let xr = GaussLegendre::new(48);
    let xs: Vec<f64> = xr.nodes.iter().map(|x| HALF * x).collect();
    let ws: Vec<f64> = xr.weights.iter().map(|w| HALF * w).collect();
    let hi = HALF + TAIL * sig;
    let h = (0.5 * sig).min(0.5);
    let n = (hi / h).ceil() as usize;
    let w = hi / n as f64;
    let r = rule();
    let norm = (gamma / PI).sqrt() / WIDTH;
    let (mut m1, mut m2) = (0.0, 0.0);
    for k in 0..n {
        let c = (k as f64 + 0.5) * w;
        for (x, wt) in r.nodes.iter().zip(&r.weights) {
            let (z, var) = posterior_direct(c + 0.5 * w * x, gamma, &xs, &ws);
            let p = wt * 0.5 * w * z * norm;
            m1 += p * var;
            m2 += p * var * var;
        }
    }
    (2.0 * m1, 2.0 * m2)
}

/// MMSE by the g-form, `(1 - G)/gamma`. Ill-conditioned for small `gamma`.
pub fn uniform_mmse_gform(gamma: f64) -> f64 {
    assert!(gamma > 0.0);
    (1.0 - g_form(gamma).0) / gamma
}

/// MMSE from conditional variances integrated over the output.
pub fn uniform_mmse_direct(gamma: f64) -> f64 {
    assert!(gamma > 0.0);
    2.0 * direct(gamma).0
}

/// `-4 E[var^2]`, the derivative through the posterior-variance identity.
pub fn uniform_dmmse_identity(gamma: f64) -> f64 {
    assert!(gamma > 0.0);
    if gamma < METHOD_SWITCH {
        -4.0 * direct(gamma).1
    } else {
        -4.0 * g_form(gamma).2
    }
}

/// MMSE and its derivative for the complex input.
pub fn uniform_mmse_pair(gamma: f64) -> (f64, f64) {
    assert!(gamma >= 0.0, "gamma must be non-negative");
    if gamma == 0.0 {
        return (1.0, -1.0);
    }
    if gamma < METHOD_SWITCH {
        let (m1, m2) = direct(gamma);
        (2.0 * m1, -4.0 * m2)
    } else {
        let (g, dg, _) = g_form(gamma);
        let m = (1.0 - g) / gamma;
        (m, -(1.0 - g) / (gamma * gamma) - dg / gamma)
    }
}

pub fn uniform_mmse(gamma: f64) -> f64 {
    uniform_mmse_pair(gamma).0
}

pub fn uniform_dmmse(gamma: f64) -> f64 {
    uniform_mmse_pair(gamma).1
}

/// Mutual information in nats, `int_0^zeta (1 + gamma) mmse dzeta`.
pub fn uniform_info(gamma: f64) -> f64 {
    assert!(gamma >= 0.0, "gamma must be non-negative");
    let zeta = zeta_of_gamma(gamma);
    if zeta == 0.0 {
        return 0.0;
    }
    let n = (zeta / 0.25).ceil() as usize;
    let w = zeta / n as f64;
    let r = GaussLegendre::new(12);
    (0..n)
        .into_par_iter()
        .map(|k| {
            r.integrate(k as f64 * w, (k + 1) as f64 * w, |z| {
                let g = gamma_of_zeta(z);
                (1.0 + g) * uniform_mmse(g)
            })
        })
        .sum()
}

/// The uniform input as a [`ScalarInput`].
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformInput;

impl ScalarInput for UniformInput {
    fn label(&self) -> String {
        "uniform".into()
    }
    fn entropy_nats(&self) -> f64 {
        f64::INFINITY
    }
    fn eval(&self, gamma: f64) -> ScalarPoint {
        let (mmse, dmmse) = uniform_mmse_pair(gamma);
        ScalarPoint {
            gamma,
            info: uniform_info(gamma),
            mmse,
            dmmse,
        }
    }
}

/// Log-SNR profile on `[0, zeta_max]`. Information is accumulated cell by cell with
/// the endpoint-corrected trapezoid rule, which uses the slope and curvature
/// already sampled.
pub fn uniform_profile(resolution_bits: f64, zeta_max: f64) -> Result<LogSnrProfile> {
    if !(resolution_bits > 0.0 && resolution_bits <= 0.01) {
        return Err(Error::InvalidArgument(format!(
            "profile resolution must be in (0, 0.01] bits, got {resolution_bits}"
        )));
    }
    if !(zeta_max > 0.0 && zeta_max <= logsnr::ZETA_LIMIT) {
        return Err(Error::InvalidArgument(format!("zeta_max must be in (0, {}]", logsnr::ZETA_LIMIT)));
    }
    let n = (zeta_max / (resolution_bits * LN_2)).ceil() as usize + 1;
    let h = zeta_max / (n - 1) as f64;
    let zeta: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let pairs: Vec<(f64, f64)> = zeta.par_iter().map(|&z| uniform_mmse_pair(gamma_of_zeta(z))).collect();
    let mut dilog = Vec::with_capacity(n);
    let mut ddilog = Vec::with_capacity(n);
    for (&z, &(m, dm)) in zeta.iter().zip(&pairs) {
        let a = 1.0 + gamma_of_zeta(z);
        dilog.push(a * m);
        ddilog.push(a * (m + a * dm));
    }
    let mut ilog = vec![0.0; n];
    for i in 1..n {
        ilog[i] = ilog[i - 1] + 0.5 * h * (dilog[i - 1] + dilog[i]) + h * h / 12.0 * (ddilog[i - 1] - ddilog[i]);
    }
    LogSnrProfile::from_samples("uniform", zeta, ilog, dilog, ddilog, f64::INFINITY)
}

/// Concave envelope on a bounded interval `[0, zeta_bar]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IntervalEnvelope {
    pub zeta_bar: f64,
    /// Contact point below the concavity threshold; equals `zeta_bar` when no bridge is needed.
    pub zeta1: f64,
    pub zeta_m: f64,
    pub slope: f64,
    /// Largest gap in nats.
    pub delta: f64,
}

/// Concavity and envelope constants of the uniform input.
#[derive(Clone, Debug, Serialize)]
pub struct UniformProfile {
    #[serde(skip)]
    pub profile: LogSnrProfile,
    pub zeta0_low: f64,
    /// Contact point of the convex envelope, which is linear through the origin before it.
    pub zeta2_tilde: f64,
    pub zeta_m_tilde: f64,
    pub delta_tilde_nats: f64,
    pub shaping_offset: f64,
    /// `(gamma_bar in dB, deltabar in nats)`.
    pub deltabar_table: Vec<(f64, f64)>,
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let flo = f(lo) > 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const ROOT_TOL: f64 = 1e-10;

impl UniformProfile {
    pub fn build(resolution_bits: f64, zeta_max: f64) -> Result<Self> {
        let p = uniform_profile(resolution_bits, zeta_max)?;
        let th = concavity_thresholds(&p);
        let z0 = match th.low() {
            Some(z) if z > 0.0 && th.high().is_none() => z,
            _ => return Err(Error::NoConvexRegion),
        };
        // ilog - zeta ilog' rises to z0 then falls through zero
        let f = |z: f64| {
            let (v, dv, _) = p.interp(z);
            v - z * dv
        };
        if f(zeta_max) >= 0.0 {
            return Err(Error::NoConvergence("convex envelope contact lies beyond the profile".into()));
        }
        let z2 = bisect(f, z0, zeta_max, ROOT_TOL);
        let s = p.dilog_at(z2);
        let zm = bisect(|z| p.dilog_at(z) - s, 0.0, z0, ROOT_TOL);
        let dt = p.ilog_at(zm) - s * zm;
        let mut u = UniformProfile {
            profile: p,
            zeta0_low: z0,
            zeta2_tilde: z2,
            zeta_m_tilde: zm,
            delta_tilde_nats: dt,
            shaping_offset: shaping_offset(),
            deltabar_table: Vec::new(),
        };
        let grid: Vec<f64> = (0..41).map(|i| 2.5 * i as f64).collect();
        u.deltabar_table = grid.par_iter().map(|&g| (g, u.deltabar(logsnr::from_db(g)).delta)).collect();
        Ok(u)
    }

    pub fn gamma0_low_db(&self) -> f64 {
        db(gamma_of_zeta(self.zeta0_low))
    }

    pub fn gamma2_tilde_db(&self) -> f64 {
        db(gamma_of_zeta(self.zeta2_tilde))
    }

    pub fn delta_tilde_bits(&self) -> f64 {
        self.delta_tilde_nats / LN_2
    }

    /// Largest convex minorant of the log-SNR curve.
    pub fn convex_envelope_at(&self, z: f64) -> f64 {
        if z <= self.zeta2_tilde {
            z * self.profile.dilog_at(self.zeta2_tilde)
        } else {
            self.profile.ilog_at(z)
        }
    }

    /// Envelope on `[0, zeta(gamma_bar)]` and its largest gap.
    pub fn deltabar(&self, gamma_bar: f64) -> IntervalEnvelope {
        let p = &self.profile;
        let zb = zeta_of_gamma(gamma_bar).min(p.zeta_max);
        if zb <= self.zeta0_low {
            return IntervalEnvelope {
                zeta_bar: zb,
                zeta1: zb,
                zeta_m: zb,
                slope: p.dilog_at(zb),
                delta: 0.0,
            };
        }
        let ib = p.ilog_at(zb);
        let tangent_gap = |z1: f64| {
            let (v, dv, _) = p.interp(z1);
            v + (zb - z1) * dv - ib
        };
        let z1 = bisect(tangent_gap, 0.0, self.zeta0_low, ROOT_TOL);
        let s = p.dilog_at(z1);
        let zm = bisect(|z| p.dilog_at(z) - s, self.zeta0_low, zb, ROOT_TOL);
        let delta = p.ilog_at(z1) + s * (zm - z1) - p.ilog_at(zm);
        IntervalEnvelope {
            zeta_bar: zb,
            zeta1: z1,
            zeta_m: zm,
            slope: s,
            delta: delta.max(0.0),
        }
    }

    /// CSV with header `gamma_db,deltabar_bits`.
    pub fn write_deltabar_csv<W: Write>(&self, gamma_db: &[f64], w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["gamma_db", "deltabar_bits"])?;
        let vals: Vec<f64> = gamma_db
            .par_iter()
            .map(|&g| self.deltabar(logsnr::from_db(g)).delta / LN_2)
            .collect();
        for (g, v) in gamma_db.iter().zip(vals) {
            wr.write_record([crate::fmt_sig(*g), crate::fmt_sig(v)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// The structure at default resolution, built once.
pub fn uniform_structure() -> &'static UniformProfile {
    static U: OnceLock<UniformProfile> = OnceLock::new();
    U.get_or_init(|| {
        UniformProfile::build(PROFILE_RESOLUTION_BITS, PROFILE_ZETA_MAX).expect("uniform profile has one concave-convex switch")
    })
}

/// Largest gap to the interval concave envelope, in nats.
pub fn deltabar(gamma_bar: f64) -> f64 {
    uniform_structure().deltabar(gamma_bar).delta
}

/// Constants of the high-SNR convexity argument and the SNR above which it applies.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityCertificate {
    pub c1: f64,
    pub c2: f64,
    pub c0: f64,
    pub k0: f64,
    pub k2: f64,
    /// `k(A)` from its defining integrals.
    pub k: f64,
    /// SNR above which the sufficient condition stays positive on the searched range.
    pub threshold: Option<f64>,
    /// The same threshold with the printed `k = 0.586`.
    pub threshold_printed_k: Option<f64>,
    /// Largest relative change of any constant when the quadrature panels are halved.
    pub quadrature_change: f64,
}

pub const PRINTED_K: f64 = 0.586;

fn half_line<F: Fn(f64) -> f64>(f: F, h: f64) -> f64 {
    let r = GaussLegendre::new(20);
    let n = (12.0 / h).ceil() as usize;
    (0..n).map(|k| r.integrate(k as f64 * h, (k + 1) as f64 * h, &f)).sum()
}

fn constants(h: f64) -> [f64; 4] {
    let s2 = 2f64.sqrt();
    let c1 = half_line(|x| x * x * (-x * x).exp() / q_scaled(s2 * x), h);
    let c2 = half_line(|x| x * (-x * x).exp() / q_scaled(s2 * x).powi(2), h);
    let k = |i: i32| {
        half_line(
            |x| {
                let (u, v) = (s2 * (x - HALF), s2 * (x + HALF));
                if u > 0.0 {
                    let d = q_scaled(u) - (-4.0 * HALF * x).exp() * q_scaled(v);
                    x.powi(i) * (-x * x - 2.0 * HALF * x + HALF * HALF).exp() / d
                } else {
                    x.powi(i) * (-2.0 * x * x).exp() / (1.0 - q_function(-u) - q_function(v))
                }
            },
            h,
        )
    };
    [c1, c2, k(0), k(2)]
}

fn certificate_bound(c0: f64, k: f64, gamma: f64) -> f64 {
    c0 / (PI * WIDTH * gamma * gamma.sqrt()) - 0.5 / (gamma * gamma) - k * (-0.5 * WIDTH * WIDTH * gamma).exp()
}

fn last_root(c0: f64, k: f64, lo: f64, hi: f64) -> Option<f64> {
    let n = 4000;
    let g = |i: usize| lo * (hi / lo).powf(i as f64 / n as f64);
    if certificate_bound(c0, k, hi) <= 0.0 {
        return None;
    }
    let last_bad = (0..=n).rev().find(|&i| certificate_bound(c0, k, g(i)) <= 0.0);
    match last_bad {
        None => Some(lo),
        Some(i) => Some(bisect(|x| certificate_bound(c0, k, x), g(i), g(i + 1), 1e-9 * g(i))),
    }
}

/// Recomputes the constants and locates the convexity threshold within `[gamma_lo, gamma_hi]`.
pub fn convexity_certificate(gamma_lo: f64, gamma_hi: f64) -> Result<ConvexityCertificate> {
    if !(gamma_lo > 1.0 && gamma_hi > gamma_lo) {
        return Err(Error::InvalidArgument("certificate range must satisfy 1 < lo < hi".into()));
    }
    let fine = constants(0.125);
    let coarse = constants(0.25);
    let change = fine
        .iter()
        .zip(&coarse)
        .map(|(a, b)| ((a - b) / a).abs())
        .fold(0.0, f64::max);
    if change > 1e-10 {
        return Err(Error::NoConvergence(format!("certificate constants moved by {change:e} under refinement")));
    }
    let [c1, c2, k0, k2] = fine;
    let c0 = c1 - c2 / (4.0 * PI.sqrt());
    let k = WIDTH / PI * k0 + 4.0 / (PI * WIDTH) * k2;
    Ok(ConvexityCertificate {
        c1,
        c2,
        c0,
        k0,
        k2,
        k,
        threshold: last_root(c0, k, gamma_lo, gamma_hi),
        threshold_printed_k: last_root(c0, PRINTED_K, gamma_lo, gamma_hi),
        quadrature_change: change,
    })
}
