//! Closed-form MMSE bounds for PAM and BPSK inputs.
//!
//! Conventions follow the real channel `Y = X + N/sqrt(gamma)` with
//! `N ~ N(0, 1/2)`. A BPSK alphabet is `{-1, +1}`, and `rho = (d/2)^2 gamma` is the
//! SNR seen by the two points nearest the output.

use crate::constellation::{Constellation, Family};
use crate::error::{Error, Result};
use crate::scalar::{posterior_moments, Evaluator};
use crate::special::{graded_breaks, q_function, q_scaled, GaussLegendre};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

pub use crate::special::q_function as q;

/// Tail bound below which series are truncated, relative to the partial sum.
const SERIES_TOL: f64 = 1e-14;

/// `sech(x)` without overflow.
fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// `(1/sqrt(pi)) int exp(-z^2) sech(2 sqrt(gamma) z)^p dz` on a grid graded toward the
/// peak of width `1/(2 sqrt(gamma))` at the origin.
fn sech_integral(gamma: f64, p: i32) -> f64 {
    let rule = GaussLegendre::new(20);
    let w = 0.25 / gamma.sqrt().max(1e-300);
    let breaks = graded_breaks(0.0, 8.7, 0.5, &[(0.0, w.min(0.5))]);
    let mut s = 0.0;
    for pair in breaks.windows(2) {
        s += rule.integrate(pair[0], pair[1], |z| (-z * z).exp() * sech(2.0 * gamma.sqrt() * z).powi(p));
    }
    2.0 * s / PI.sqrt()
}

/// BPSK MMSE from its one-dimensional integral representation.
pub fn bpsk_mmse_closed(gamma: f64) -> f64 {
    assert!(gamma >= 0.0);
    (-gamma).exp() * sech_integral(gamma, 1)
}

/// BPSK MMSE derivative, the same integral with `sech^3`.
pub fn bpsk_dmmse_closed(gamma: f64) -> f64 {
    assert!(gamma >= 0.0);
    -2.0 * (-gamma).exp() * sech_integral(gamma, 3)
}

/// `phi_BPSK(y; gamma) = 1 - tanh^2(2 gamma y)`.
pub fn phi_bpsk(y: f64, gamma: f64) -> f64 {
    sech(2.0 * gamma * y).powi(2)
}

/// A `(lower, upper)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn contains(&self, v: f64, tol: f64) -> bool {
        self.lower <= v + tol && v <= self.upper + tol
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// The four BPSK bound pairs at one SNR.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BpskBounds {
    /// `mmse`, high-SNR form.
    pub mmse_asymptotic: Bracket,
    /// `mmse`, `e^-g/sqrt(1+2g) .. e^-g`.
    pub mmse_algebraic: Bracket,
    /// `-mmse'`, high-SNR form.
    pub dmmse_asymptotic: Bracket,
    /// `-mmse'`, `2e^-g/sqrt(1+6g) .. 2e^-g`.
    pub dmmse_algebraic: Bracket,
}

pub fn bpsk_bound_pairs(gamma: f64) -> BpskBounds {
    let e = (-gamma).exp();
    let lead = 0.5 * PI.sqrt() / gamma.sqrt() * e;
    BpskBounds {
        mmse_asymptotic: Bracket {
            lower: (1.0 - PI * PI / (16.0 * gamma)) * lead,
            upper: lead,
        },
        mmse_algebraic: Bracket {
            lower: e / (1.0 + 2.0 * gamma).sqrt(),
            upper: e,
        },
        dmmse_asymptotic: Bracket {
            lower: (1.0 - (PI * PI / 8.0 - 1.0) / (2.0 * gamma)) * lead,
            upper: lead,
        },
        dmmse_algebraic: Bracket {
            lower: 2.0 * e / (1.0 + 6.0 * gamma).sqrt(),
            upper: 2.0 * e,
        },
    }
}

/// Sums `term(k)` for `k >= k0` until the tail, bounded geometrically through
/// `majorant`, falls below `SERIES_TOL` times the partial sum. Returns the sum
/// and the number of terms used.
fn series<F, G>(k0: usize, term: F, majorant: G) -> (f64, usize)
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let mut s = 0.0;
    let mut k = k0;
    loop {
        let kf = k as f64;
        s += term(kf);
        let m1 = majorant(kf + 1.0);
        let m2 = majorant(kf + 2.0);
        // majorants are log-concave in k here, so the ratio only shrinks from k+1 on
        if m1 == 0.0 {
            return (s, k + 1 - k0);
        }
        let r = m2 / m1;
        if r < 1.0 && m1 / (1.0 - r) <= SERIES_TOL * s.abs() {
            return (s, k + 1 - k0);
        }
        k += 1;
        if k - k0 > 10_000_000 {
            return (s, k - k0);
        }
    }
}

/// `sum_{k>=1} (k+1)^2 exp(-4 rho k^2)`.
fn s_series(rho: f64) -> (f64, usize) {
    let f = |k: f64| (k + 1.0).powi(2) * (-4.0 * rho * k * k).exp();
    series(1, f, f)
}

/// Upper slack of the pointwise bracket, `4 sum (k+1)^2 exp(-4 rho k^2)`.
pub fn d_up(rho: f64) -> f64 {
    4.0 * s_series(rho).0
}

/// Closed-form majorant of [`d_up`], `16 e^{-4 rho} / (1 - e^{-4 rho})^3`.
pub fn d_up_majorant(rho: f64) -> f64 {
    let x = (-4.0 * rho).exp();
    16.0 * x / (1.0 - x).powi(3)
}

/// `16 Q(sqrt(8 rho)) + 4 sum_{k>=2} (2k+1) Q(k sqrt(8 rho))`.
pub fn b_up(rho: f64) -> f64 {
    b_up_terms(rho).0
}

fn b_up_terms(rho: f64) -> (f64, usize) {
    let a = (8.0 * rho).sqrt();
    let term = |k: f64| (2.0 * k + 1.0) * q_function(k * a);
    // Q(x) <= exp(-x^2/2)/2 for x >= 0
    let maj = |k: f64| (2.0 * k + 1.0) * 0.5 * (-0.5 * k * k * a * a).exp();
    let (tail, n) = series(2, term, maj);
    (16.0 * q_function(a) + 4.0 * tail, n + 1)
}

/// `4 Q(sqrt(8 rho))`.
pub fn b_low(rho: f64) -> f64 {
    4.0 * q_function((8.0 * rho).sqrt())
}

/// `32 e^{8 rho} Q(sqrt(32 rho))`, through the scaled tail to avoid `inf * 0`.
pub fn c_up(rho: f64) -> f64 {
    32.0 * (-8.0 * rho).exp() * q_scaled((32.0 * rho).sqrt())
}

/// `2 [2 D + D^2 + Q(sqrt(8 rho))]` with `D = d_up(rho)`, the slack obtained by
/// squaring the pointwise bracket.
pub fn c_low(rho: f64) -> f64 {
    let d = d_up(rho);
    2.0 * (2.0 * d + d * d + q_function((8.0 * rho).sqrt()))
}

/// The form printed with the derivative bracket, `2 [4 S (8 S + 1) + Q(sqrt(8 rho))]`.
/// Smaller than [`c_low`] once `S < 1/4`; kept for comparison only.
pub fn c_low_printed(rho: f64) -> f64 {
    let s = s_series(rho).0;
    2.0 * (4.0 * s * (8.0 * s + 1.0) + q_function((8.0 * rho).sqrt()))
}

/// Bound functions tabulated over `rho`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundSet {
    pub rho: Vec<f64>,
    pub b_up: Vec<f64>,
    pub b_low: Vec<f64>,
    pub c_up: Vec<f64>,
    pub c_low: Vec<f64>,
    pub d_up: Vec<f64>,
    /// Largest number of series terms used anywhere in the table.
    pub series_terms: usize,
}

impl BoundSet {
    pub fn tabulate(rho: &[f64]) -> Self {
        let mut terms = 0;
        let mut b = Vec::new();
        let mut d = Vec::new();
        for &r in rho {
            let (v, n) = b_up_terms(r);
            b.push(v);
            let (s, m) = s_series(r);
            d.push(4.0 * s);
            terms = terms.max(n).max(m);
        }
        BoundSet {
            rho: rho.to_vec(),
            b_up: b,
            b_low: rho.iter().map(|&r| b_low(r)).collect(),
            c_up: rho.iter().map(|&r| c_up(r)).collect(),
            c_low: rho.iter().map(|&r| c_low(r)).collect(),
            d_up: d,
            series_terms: terms,
        }
    }
}

/// Points of `M`-PAM with spacing `d`, centred on the origin.
pub fn pam_points(m: usize, d: f64) -> Vec<f64> {
    (0..m).map(|k| (2.0 * k as f64 - (m as f64 - 1.0)) * 0.5 * d).collect()
}

fn check_pam(m: usize, d: f64, gamma: f64) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("PAM order must be at least 2, got {m}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!("PAM spacing must be positive, got {d}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

/// Posterior variance of an equiprobable real alphabet at output `y`.
pub fn phi_real(points: &[f64], y: f64, gamma: f64) -> f64 {
    let pts: Vec<Complex64> = points.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let probs = vec![1.0 / points.len() as f64; points.len()];
    posterior_moments(&pts, &probs, Complex64::new(y, 0.0), gamma).phi
}

/// Two-point lower bound and its `(d/2)^2 D(rho)` upper companion for the
/// posterior variance of `M`-PAM at output `y`.
pub fn pam_pointwise_bracket(m: usize, d: f64, y: f64, gamma: f64) -> Result<Bracket> {
    check_pam(m, d, gamma)?;
    let x = pam_points(m, d);
    let j = (((y - x[0]) / d).floor().max(0.0) as usize).min(m - 2);
    let mid = 0.5 * (x[j] + x[j + 1]);
    let h2 = 0.25 * d * d;
    let rho = h2 * gamma;
    let lower = h2 * phi_bpsk((y - mid) / (0.5 * d), rho);
    Ok(Bracket {
        lower,
        upper: lower + h2 * d_up(rho),
    })
}

/// Whether dropping the alphabet point farthest from `y` does not increase the
/// posterior variance. Equality is accepted to a relative `1e-12`.
pub fn verify_removal_lemma(m: usize, d: f64, y: f64, gamma: f64) -> Result<bool> {
    check_pam(m, d, gamma)?;
    if m < 3 {
        return Err(Error::InvalidArgument("removal needs at least three points".into()));
    }
    let x = pam_points(m, d);
    let centre = 0.5 * (x[0] + x[m - 1]);
    let reduced: Vec<f64> = if y <= centre { x[..m - 1].to_vec() } else { x[1..].to_vec() };
    let full = phi_real(&x, y, gamma);
    let part = phi_real(&reduced, y, gamma);
    Ok(full >= part - 1e-12 * part.abs())
}

/// MMSE and derivative of `M`-PAM with spacing `d` on the real channel.
pub fn pam_mmse(m: usize, d: f64, gamma: f64) -> Result<(f64, f64)> {
    check_pam(m, d, gamma)?;
    let c = Constellation::standard(Family::Pam, m)?;
    let s = d / c.min_distance();
    let p = Evaluator::new(&c).point(s * s * gamma);
    Ok((s * s * p.mmse, s.powi(4) * p.dmmse))
}

fn pam_scale(m: usize, d: f64) -> f64 {
    2.0 * (m as f64 - 1.0) / m as f64 * 0.25 * d * d
}

/// Bracket on the `M`-PAM MMSE built from the BPSK MMSE at `rho = (d/2)^2 gamma`.
pub fn pam_mmse_bracket(m: usize, d: f64, gamma: f64) -> Result<Bracket> {
    check_pam(m, d, gamma)?;
    let rho = 0.25 * d * d * gamma;
    let k = pam_scale(m, d);
    let b = bpsk_mmse_closed(rho);
    Ok(Bracket {
        lower: k * (b - b_low(rho)),
        upper: k * (b + b_up(rho)),
    })
}

/// Bracket on the `M`-PAM MMSE derivative.
pub fn pam_dmmse_bracket(m: usize, d: f64, gamma: f64) -> Result<Bracket> {
    check_pam(m, d, gamma)?;
    let rho = 0.25 * d * d * gamma;
    let k = pam_scale(m, d) * 0.25 * d * d;
    let b = bpsk_dmmse_closed(rho);
    Ok(Bracket {
        lower: k * (b - c_low(rho)),
        upper: k * (b + c_up(rho)),
    })
}

/// Least-squares fit of `log(-mmse' sqrt(gamma))` against `gamma`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    /// `-(d_min/2)^2`.
    pub reference: f64,
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    /// The requested range was cut short because the derivative underflowed.
    pub shrunk: bool,
}

impl DecayFit {
    pub fn relative_error(&self) -> f64 {
        ((self.slope - self.reference) / self.reference).abs()
    }
}

/// Fits the exponential decay rate of the MMSE derivative over
/// `(d_min/2)^2 gamma` in `[rho_lo, rho_hi]`.
pub fn decay_rate_check(c: &Constellation, rho_lo: f64, rho_hi: f64, points: usize) -> Result<DecayFit> {
    if !(rho_lo > 0.0 && rho_hi > rho_lo) || points < 3 {
        return Err(Error::InvalidArgument("decay fit needs 0 < rho_lo < rho_hi and 3 points".into()));
    }
    let h2 = 0.25 * c.min_distance().powi(2);
    let ev = Evaluator::new(c);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut shrunk = false;
    for i in 0..points {
        let g = (rho_lo + (rho_hi - rho_lo) * i as f64 / (points - 1) as f64) / h2;
        let v = -ev.point(g).dmmse;
        if !(v > 1e-290) {
            shrunk = true;
            break;
        }
        xs.push(g);
        ys.push((v * g.sqrt()).ln());
    }
    if xs.len() < 3 {
        return Err(Error::NoConvergence("mmse derivative underflows over the whole range".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(DecayFit {
        slope: sxy / sxx,
        reference: -h2,
        gamma_lo: xs[0],
        gamma_hi: *xs.last().unwrap(),
        shrunk,
    })
}

/// One row of a verification sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub check: &'static str,
    #[serde(rename = "M")]
    pub m: usize,
    pub d: f64,
    pub gamma: f64,
    pub rho: f64,
    pub y: Option<f64>,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Sweep ranges for [`verify_all`].
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub orders: Vec<usize>,
    pub rho_min: f64,
    pub rho_max: f64,
    pub gammas: usize,
    pub outputs: usize,
    pub removal_trials: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            orders: (2..=16).collect(),
            rho_min: 0.5,
            rho_max: 16.0,
            gammas: 40,
            outputs: 100,
            removal_trials: 1000,
            seed: 1,
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Pointwise bracket on `outputs` outputs spread over the alphabet and its margins.
pub fn sweep_pointwise(cfg: &SweepConfig, d: f64) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &m in &cfg.orders {
        let x = pam_points(m, d);
        let span = x[m - 1] - x[0] + 2.0 * d;
        for rho in log_grid(cfg.rho_min, cfg.rho_max, cfg.gammas) {
            let g = rho / (0.25 * d * d);
            for i in 0..cfg.outputs {
                let y = x[0] - d + span * (i as f64 + 0.5) / cfg.outputs as f64;
                let b = pam_pointwise_bracket(m, d, y, g)?;
                let v = phi_real(&x, y, g);
                rows.push(SweepRow {
                    check: "pointwise",
                    m,
                    d,
                    gamma: g,
                    rho,
                    y: Some(y),
                    lower: b.lower,
                    value: v,
                    upper: b.upper,
                    pass: b.lower <= v + 1e-12 && v <= b.upper + 1e-12,
                });
            }
        }
    }
    Ok(rows)
}

/// MMSE and derivative brackets against quadrature values.
pub fn sweep_mmse(cfg: &SweepConfig, d: f64) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &m in &cfg.orders {
        for rho in log_grid(cfg.rho_min, cfg.rho_max, cfg.gammas) {
            let g = rho / (0.25 * d * d);
            let (v, dv) = pam_mmse(m, d, g)?;
            let b = pam_mmse_bracket(m, d, g)?;
            let tol = 1e-12 * v.abs();
            rows.push(SweepRow {
                check: "mmse",
                m,
                d,
                gamma: g,
                rho,
                y: None,
                lower: b.lower,
                value: v,
                upper: b.upper,
                pass: b.contains(v, tol),
            });
            let b = pam_dmmse_bracket(m, d, g)?;
            let tol = 1e-12 * dv.abs();
            rows.push(SweepRow {
                check: "dmmse",
                m,
                d,
                gamma: g,
                rho,
                y: None,
                lower: b.lower,
                value: dv,
                upper: b.upper,
                pass: b.contains(dv, tol),
            });
        }
    }
    Ok(rows)
}

/// All four BPSK pairs at `n` log-spaced SNRs in `[lo, hi]`.
pub fn sweep_bpsk(lo: f64, hi: f64, n: usize) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for g in log_grid(lo, hi, n) {
        let v = bpsk_mmse_closed(g);
        let dv = -bpsk_dmmse_closed(g);
        let p = bpsk_bound_pairs(g);
        for (name, b, x) in [
            ("bpsk_mmse_asymptotic", p.mmse_asymptotic, v),
            ("bpsk_mmse_algebraic", p.mmse_algebraic, v),
            ("bpsk_dmmse_asymptotic", p.dmmse_asymptotic, dv),
            ("bpsk_dmmse_algebraic", p.dmmse_algebraic, dv),
        ] {
            rows.push(SweepRow {
                check: name,
                m: 2,
                d: 2.0,
                gamma: g,
                rho: g,
                y: None,
                lower: b.lower,
                value: x,
                upper: b.upper,
                pass: b.contains(x, 1e-13 * x),
            });
        }
    }
    rows
}

/// Seeded random trials of the point-removal property.
pub fn sweep_removal(trials: usize, seed: u64) -> Result<Vec<SweepRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(trials);
    for _ in 0..trials {
        let m = rng.random_range(3..=16usize);
        let d = 10f64.powf(rng.random_range(-1.0..1.0));
        let rho = 10f64.powf(rng.random_range(-2.0..1.5));
        let g = rho / (0.25 * d * d);
        let half = 0.5 * (m as f64 - 1.0) * d;
        let y = rng.random_range(-1.5 * half - d..1.5 * half + d);
        let ok = verify_removal_lemma(m, d, y, g)?;
        rows.push(SweepRow {
            check: "removal",
            m,
            d,
            gamma: g,
            rho,
            y: Some(y),
            lower: f64::NAN,
            value: f64::NAN,
            upper: f64::NAN,
            pass: ok,
        });
    }
    Ok(rows)
}

/// Every sweep with unit spacing.
pub fn verify_all(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut rows = sweep_pointwise(cfg, 2.0)?;
    rows.extend(sweep_mmse(cfg, 2.0)?);
    rows.extend(sweep_bpsk(1e-3, 40.0, 200));
    rows.extend(sweep_removal(cfg.removal_trials, cfg.seed)?);
    Ok(rows)
}

/// CSV with header `check,M,d,gamma,rho,y,lower,value,upper,pass`.
pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["check", "M", "d", "gamma", "rho", "y", "lower", "value", "upper", "pass"])?;
    let f = |x: f64| if x.is_nan() { String::new() } else { crate::fmt_sig(x) };
    for r in rows {
        wr.write_record([
            r.check.to_string(),
            r.m.to_string(),
            f(r.d),
            f(r.gamma),
            f(r.rho),
            r.y.map_or(String::new(), f),
            f(r.lower),
            f(r.value),
            f(r.upper),
            r.pass.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_at_zero() {
        assert!((bpsk_mmse_closed(0.0) - 1.0).abs() < 1e-14);
        assert!((bpsk_dmmse_closed(0.0) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn series_majorant_orders() {
        for rho in [0.05, 0.5, 2.0, 10.0] {
            assert!(d_up(rho) <= d_up_majorant(rho) * (1.0 + 1e-12));
        }
        assert!(d_up(1.0) > d_up(1.1));
    }

    #[test]
    fn closed_forms_match_references() {
        // mpmath, 30 digits
        for (g, want) in [
            (1.0, -0.294485842517910781656944407332),
            (10.0, -1.25778451550790328654060405286e-5),
            (60.0, -9.99900788397447230344811477547e-28),
            (100.0, -3.2929876782803625765756234172e-45),
        ] {
            assert!(((bpsk_dmmse_closed(g) - want) / want).abs() < 1e-13, "gamma={g}");
        }
    }

    #[test]
    fn bpsk_pairs_hold() {
        for g in [4.0, 10.0] {
            let p = bpsk_bound_pairs(g);
            let v = bpsk_mmse_closed(g);
            let dv = -bpsk_dmmse_closed(g);
            assert!(p.mmse_asymptotic.contains(v, 0.0));
            assert!(p.mmse_algebraic.contains(v, 0.0));
            assert!(p.dmmse_asymptotic.contains(dv, 0.0));
            assert!(p.dmmse_algebraic.contains(dv, 0.0));
        }
    }

    #[test]
    fn removal_at_centre() {
        assert!(verify_removal_lemma(3, 2.0, 0.0, 1.0).unwrap());
        assert!(verify_removal_lemma(2, 2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn four_pam_pointwise() {
        let x = pam_points(4, 2.0);
        for y in [-4.0, -1.3, 0.0, 0.7, 2.9, 5.0] {
            let b = pam_pointwise_bracket(4, 2.0, y, 1.5).unwrap();
            assert!(b.contains(phi_real(&x, y, 1.5), 1e-14));
        }
    }

    #[test]
    fn c_up_survives_large_rho() {
        let v = c_up(60.0);
        assert!(v > 0.0 && v.is_finite());
        assert!(v <= 4.0 / (PI * 60.0).sqrt() * (-480.0f64).exp() * 1.0001);
    }
}
