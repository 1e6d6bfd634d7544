//! Scalar complex Gaussian channel `y = sqrt(gamma) x + n` with standard complex noise.
//!
//! Mutual information, MMSE and the MMSE derivative are computed together from one
//! pass over a quadrature grid. The grid is a composite Gauss-Legendre rule whose
//! panels are refined geometrically around the decision boundaries, where the
//! posterior switches between neighbouring symbols on a length scale of
//! `1/(gamma d)`, much shorter than the noise scale at high SNR.
//!
//! Separable alphabets (PAM, square QAM) are reduced to two real components and
//! integrated over the output density in one dimension. Other alphabets are
//! integrated per symbol in polar coordinates around the transmitted point.

use crate::constellation::{Component, Constellation};
use crate::error::{Error, Result};
use crate::special::{graded_breaks, GaussLegendre};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// Gauss-Legendre nodes per panel used unless overridden.
pub const DEFAULT_QUAD_ORDER: usize = 12;
/// Smallest accepted number of nodes per panel.
pub const MIN_QUAD_ORDER: usize = 8;

/// Gaussian tails are truncated where the density falls below `exp(-TAIL)`.
const TAIL: f64 = 64.0;
/// Posterior terms more than `exp(-CUT)` below the largest one are skipped.
const CUT: f64 = 60.0;
/// Panel width cap in units of the per-dimension noise deviation.
const PANEL_SIGMAS: f64 = 1.5;
/// Tail and posterior cutoffs of the planar kernel; `exp(-40)` is below double
/// precision relative to the terms kept.
const PLANAR_TAIL: f64 = 40.0;
const PLANAR_CUT: f64 = 40.0;

/// Integration layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Product of two real components, integrated over the output in 1D.
    Separable,
    /// Per-symbol polar integration in the complex plane.
    Planar,
}

/// Mutual information (nats), MMSE and MMSE derivative at one SNR.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarPoint {
    pub gamma: f64,
    pub info: f64,
    pub mmse: f64,
    pub dmmse: f64,
}

/// An input distribution for the scalar channel.
pub trait ScalarInput: Send + Sync {
    fn label(&self) -> String;
    /// Entropy in nats; infinite for continuous inputs.
    fn entropy_nats(&self) -> f64;
    /// Quantities at `gamma >= 0`.
    fn eval(&self, gamma: f64) -> ScalarPoint;

    fn info(&self, gamma: f64) -> f64 {
        self.eval(gamma).info
    }
}

/// Circularly-symmetric Gaussian input, the reference curve `log(1 + gamma)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct GaussianInput;

impl ScalarInput for GaussianInput {
    fn label(&self) -> String {
        "Gaussian".into()
    }
    fn entropy_nats(&self) -> f64 {
        f64::INFINITY
    }
    fn eval(&self, gamma: f64) -> ScalarPoint {
        let m = 1.0 / (1.0 + gamma);
        ScalarPoint {
            gamma,
            info: gamma.ln_1p(),
            mmse: m,
            dmmse: -m * m,
        }
    }
}

/// Posterior moments at one channel output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointwiseStats {
    /// Conditional variance `E[|X - E[X|y]|^2 | y]`.
    pub phi: f64,
    /// `E[(X - E[X|y])^2 | y]`, without modulus.
    pub psi: Complex64,
}

/// Quadrature evaluator bound to one constellation.
#[derive(Clone, Debug)]
pub struct Evaluator {
    constellation: Constellation,
    method: Method,
    order: usize,
    rule: GaussLegendre,
    plan: Plan,
}

#[derive(Clone, Debug)]
enum Plan {
    Separable(Axis, Axis),
    Planar(Planar),
}

impl Evaluator {
    /// Evaluator with the separable layout when available and the default order.
    pub fn new(c: &Constellation) -> Self {
        let m = if c.is_separable() { Method::Separable } else { Method::Planar };
        Self::with(c, m, DEFAULT_QUAD_ORDER).expect("default configuration is valid")
    }

    pub fn with(c: &Constellation, method: Method, quad_order: usize) -> Result<Self> {
        if quad_order < MIN_QUAD_ORDER {
            return Err(Error::QuadratureOrder(quad_order));
        }
        let plan = match method {
            Method::Separable => {
                let (re, im) = c.components().ok_or_else(|| {
                    Error::InvalidArgument(format!("{} is not separable into real components", c.name()))
                })?;
                Plan::Separable(Axis::new(&re), Axis::new(&im))
            }
            Method::Planar => Plan::Planar(Planar::new(c)),
        };
        Ok(Evaluator {
            constellation: c.clone(),
            method,
            order: quad_order,
            rule: GaussLegendre::new(quad_order),
            plan,
        })
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn quad_order(&self) -> usize {
        self.order
    }

    /// Information, MMSE and derivative at `gamma >= 0`.
    ///
    /// The derivative uses `mmse' = -E[phi^2 + |psi|^2]`, which reduces to
    /// `-2 E[phi^2]` per real component for separable inputs. At `gamma = 0`
    /// the right-hand limit is returned.
    pub fn point(&self, gamma: f64) -> ScalarPoint {
        assert!(gamma >= 0.0 && gamma.is_finite(), "gamma must be finite and non-negative");
        let h = self.constellation.entropy_nats();
        match &self.plan {
            Plan::Separable(re, im) => {
                let a = re.stats(gamma, &self.rule);
                let b = im.stats(gamma, &self.rule);
                ScalarPoint {
                    gamma,
                    info: (h - a.deficit - b.deficit).max(0.0),
                    mmse: a.mmse + b.mmse,
                    dmmse: -2.0 * (a.second + b.second),
                }
            }
            Plan::Planar(p) => {
                let s = p.stats(gamma, &self.rule);
                ScalarPoint {
                    gamma,
                    info: (h - s.deficit).max(0.0),
                    mmse: s.mmse,
                    dmmse: -s.second,
                }
            }
        }
    }

    /// Central difference of the MMSE with one Richardson step,
    /// `h = max(1e-4, 1e-3 gamma)` (shrunk to keep `gamma - h > 0`).
    pub fn dmmse_finite_difference(&self, gamma: f64) -> Result<f64> {
        if gamma <= 0.0 {
            return Err(Error::DerivativeAtZero);
        }
        let h = (1e-4f64).max(1e-3 * gamma).min(0.5 * gamma);
        let d = |h: f64| (self.point(gamma + h).mmse - self.point(gamma - h).mmse) / (2.0 * h);
        Ok((4.0 * d(0.5 * h) - d(h)) / 3.0)
    }

    /// Both derivative evaluations: `(moment identity, finite difference)`.
    pub fn derivative_diagnostics(&self, gamma: f64) -> Result<(f64, f64)> {
        let fd = self.dmmse_finite_difference(gamma)?;
        Ok((self.point(gamma).dmmse, fd))
    }
}

impl ScalarInput for Evaluator {
    fn label(&self) -> String {
        self.constellation.name().to_string()
    }
    fn entropy_nats(&self) -> f64 {
        self.constellation.entropy_nats()
    }
    fn eval(&self, gamma: f64) -> ScalarPoint {
        self.point(gamma)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be finite and >= 0, got {gamma}")));
    }
    Ok(())
}

fn evaluator_for(c: &Constellation, quad_order: usize) -> Result<Evaluator> {
    let m = if c.is_separable() { Method::Separable } else { Method::Planar };
    Evaluator::with(c, m, quad_order)
}

/// `E|X - E[X|Y]|^2` at SNR `gamma`.
pub fn mmse(c: &Constellation, gamma: f64, quad_order: usize) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(evaluator_for(c, quad_order)?.point(gamma).mmse)
}

/// `I(X; sqrt(gamma) X + N)` in nats.
pub fn mutual_info(c: &Constellation, gamma: f64, quad_order: usize) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(evaluator_for(c, quad_order)?.point(gamma).info)
}

/// `d mmse / d gamma` for `gamma > 0`.
pub fn mmse_derivative(c: &Constellation, gamma: f64, quad_order: usize) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma == 0.0 {
        return Err(Error::DerivativeAtZero);
    }
    Ok(evaluator_for(c, quad_order)?.point(gamma).dmmse)
}

/// Posterior variance and pseudo-variance at output `y` (channel normalized as `y = x + n/sqrt(gamma)`).
pub fn pointwise(c: &Constellation, y: Complex64, gamma: f64) -> PointwiseStats {
    posterior_moments(c.points(), c.probs(), y, gamma)
}

pub(crate) fn posterior_moments(points: &[Complex64], probs: &[f64], y: Complex64, gamma: f64) -> PointwiseStats {
    let mut e: Vec<f64> = points
        .iter()
        .zip(probs)
        .map(|(x, p)| p.ln() - gamma * (y - x).norm_sqr())
        .collect();
    let (kmax, emax) = e
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (k, v)| if v > a.1 { (k, v) } else { a });
    let mut z = 0.0;
    let mut s = Complex64::new(0.0, 0.0);
    let x0 = points[kmax];
    for (k, ek) in e.iter_mut().enumerate() {
        *ek = (*ek - emax).exp();
        z += *ek;
        s += (points[k] - x0) * *ek;
    }
    let delta = s / z;
    let mut phi = 0.0;
    let mut psi = Complex64::new(0.0, 0.0);
    for (k, w) in e.iter().enumerate() {
        let d = points[k] - x0 - delta;
        phi += w * d.norm_sqr();
        psi += d * d * *w;
    }
    PointwiseStats { phi: phi / z, psi: psi / z }
}

/// Seeded Monte Carlo estimate of the MMSE: `(mean of phi(Y), standard error)`.
pub fn mc_oracle_mmse(c: &Constellation, gamma: f64, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    if n_samples < 10_000 {
        return Err(Error::InvalidArgument("Monte Carlo oracle needs at least 1e4 samples".into()));
    }
    if gamma == 0.0 {
        return Ok((1.0, 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cdf: Vec<f64> = c
        .probs()
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let scale = (0.5 / gamma).sqrt();
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n_samples {
        let u: f64 = rng.random();
        let k = cdf.partition_point(|&v| v < u).min(c.len() - 1);
        let nr: f64 = StandardNormal.sample(&mut rng);
        let ni: f64 = StandardNormal.sample(&mut rng);
        let y = c.points()[k] + Complex64::new(nr, ni) * scale;
        let phi = pointwise(c, y, gamma).phi;
        s += phi;
        s2 += phi * phi;
    }
    let n = n_samples as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

struct Moments {
    deficit: f64,
    mmse: f64,
    second: f64,
}

/// One real coordinate with noise of variance `1/(2 gamma)`.
#[derive(Clone, Debug)]
struct Axis {
    x: Vec<f64>,
    logp: Vec<f64>,
    spread: f64,
    symmetric: bool,
    var: f64,
    entropy: f64,
    /// Midpoints between neighbours and the gap they split.
    mids: Vec<(f64, f64)>,
}

impl Axis {
    fn new(c: &Component) -> Self {
        let n = c.values.len();
        let mean: f64 = c.values.iter().zip(&c.probs).map(|(x, p)| x * p).sum();
        let var: f64 = c.values.iter().zip(&c.probs).map(|(x, p)| (x - mean).powi(2) * p).sum();
        let symmetric = (0..n).all(|k| {
            (c.values[k] + c.values[n - 1 - k]).abs() < 1e-12 && (c.probs[k] - c.probs[n - 1 - k]).abs() < 1e-12
        });
        let logp: Vec<f64> = c.probs.iter().map(|p| p.ln()).collect();
        let spread = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - logp.iter().cloned().fold(f64::INFINITY, f64::min);
        Axis {
            x: c.values.clone(),
            logp,
            spread,
            symmetric,
            var,
            entropy: c.probs.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum(),
            mids: c.values.windows(2).map(|w| (0.5 * (w[0] + w[1]), w[1] - w[0])).collect(),
        }
    }

    fn stats(&self, g: f64, rule: &GaussLegendre) -> Moments {
        let n = self.x.len();
        if n == 1 {
            return Moments { deficit: 0.0, mmse: 0.0, second: 0.0 };
        }
        if g == 0.0 {
            return Moments {
                deficit: self.entropy,
                mmse: self.var,
                second: self.var * self.var,
            };
        }
        let sigma = (0.5 / g).sqrt();
        let tail = (TAIL / g).sqrt();
        let hi = self.x[n - 1] + tail;
        let lo = if self.symmetric { 0.0 } else { self.x[0] - tail };
        // the posterior log-odds across a midpoint has slope 2 g d; first panel spans 2/(2 g d)
        let features: Vec<(f64, f64)> = self.mids.iter().map(|&(m, d)| (m, 1.0 / (g * d))).collect();
        let breaks = graded_breaks(lo, hi, PANEL_SIGMAS * sigma, &features);
        let lnorm = 0.5 * (g / PI).ln();
        let lim_extra = CUT + self.spread;
        let mut e = vec![0.0; n];
        let (mut def, mut mm, mut sec) = (0.0, 0.0, 0.0);
        for pair in breaks.windows(2) {
            let c = 0.5 * (pair[0] + pair[1]);
            let h = 0.5 * (pair[1] - pair[0]);
            for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
                let y = c + h * t;
                let j = nearest(&self.x, y);
                let lim = g * (y - self.x[j]).powi(2) + lim_extra;
                let mut a = j;
                while a > 0 && g * (y - self.x[a - 1]).powi(2) <= lim {
                    a -= 1;
                }
                let mut b = j;
                while b + 1 < n && g * (y - self.x[b + 1]).powi(2) <= lim {
                    b += 1;
                }
                let mut emax = f64::NEG_INFINITY;
                let mut kmax = j;
                for k in a..=b {
                    let v = self.logp[k] - g * (y - self.x[k]).powi(2);
                    e[k] = v;
                    if v > emax {
                        emax = v;
                        kmax = k;
                    }
                }
                let x0 = self.x[kmax];
                let (mut zm1, mut s1, mut ent) = (0.0, 0.0, 0.0);
                for k in a..=b {
                    if k == kmax {
                        continue;
                    }
                    let w = (e[k] - emax).exp();
                    ent += w * (emax - e[k]);
                    e[k] = w;
                    zm1 += w;
                    s1 += w * (self.x[k] - x0);
                }
                let z = 1.0 + zm1;
                let delta = s1 / z;
                let mut phi = delta * delta;
                for k in a..=b {
                    if k == kmax {
                        continue;
                    }
                    let d = self.x[k] - x0 - delta;
                    phi += e[k] * d * d;
                }
                phi /= z;
                let hpost = zm1.ln_1p() + ent / z;
                let f = (emax + z.ln() + lnorm).exp() * h * wt;
                def += f * hpost;
                mm += f * phi;
                sec += f * phi * phi;
            }
        }
        let k = if self.symmetric { 2.0 } else { 1.0 };
        Moments {
            deficit: k * def,
            mmse: k * mm,
            second: k * sec,
        }
    }
}

fn nearest(x: &[f64], y: f64) -> usize {
    let i = x.partition_point(|&v| v < y);
    if i == 0 {
        0
    } else if i == x.len() || y - x[i - 1] <= x[i] - y {
        i - 1
    } else {
        i
    }
}

/// Angular samples per symbol: `max(96, 40 sqrt(rho))` with `rho = gamma (d_min/2)^2`.
fn angular_count(rho: f64) -> usize {
    let n = (40.0 * rho.min(TAIL).sqrt()).ceil() as usize;
    n.max(96).next_multiple_of(4)
}

#[derive(Clone, Debug)]
struct Planar {
    pts: Vec<Complex64>,
    entropy: f64,
    pseudo: Complex64,
    dmin: f64,
    reps: Vec<Rep>,
}

#[derive(Clone, Debug)]
struct Rep {
    mass: f64,
    /// Direction of the mirror line through the point, when the alphabet has one.
    mirror: Option<f64>,
    /// Other points sorted by distance from the representative.
    neighbors: Vec<(usize, f64)>,
    /// Per neighbor: offset from the representative, squared distance, log-prior ratio.
    off: Vec<Complex64>,
    dsq: Vec<f64>,
    dlogp: Vec<f64>,
    /// Largest log-prior ratio.
    dlmax: f64,
}

impl Planar {
    fn new(c: &Constellation) -> Self {
        let pts = c.points().to_vec();
        let logp: Vec<f64> = c.probs().iter().map(|p| p.ln()).collect();
        let reps = orbits(&pts, c.probs())
            .into_iter()
            .map(|(index, mass)| {
                let mut nb: Vec<(usize, f64)> = (0..pts.len())
                    .filter(|&k| k != index)
                    .map(|k| (k, (pts[k] - pts[index]).norm()))
                    .collect();
                nb.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
                let dlogp: Vec<f64> = nb.iter().map(|&(k, _)| logp[k] - logp[index]).collect();
                Rep {
                    mass,
                    mirror: mirror_through(&pts, c.probs(), index),
                    off: nb.iter().map(|&(k, _)| pts[k] - pts[index]).collect(),
                    dsq: nb.iter().map(|&(_, d)| d * d).collect(),
                    dlmax: dlogp.iter().copied().fold(0.0, f64::max),
                    dlogp,
                    neighbors: nb,
                }
            })
            .collect();
        Planar {
            pts,
            entropy: c.entropy_nats(),
            pseudo: c.pseudo_variance(),
            dmin: c.min_distance(),
            reps,
        }
    }

    fn stats(&self, g: f64, rule: &GaussLegendre) -> Moments {
        if g == 0.0 {
            return Moments {
                deficit: self.entropy,
                mmse: 1.0,
                second: 1.0 + self.pseudo.norm_sqr(),
            };
        }
        let sigma = (0.5 / g).sqrt();
        let nth = angular_count(g * self.dmin * self.dmin / 4.0);
        let mut acc = Moments { deficit: 0.0, mmse: 0.0, second: 0.0 };
        let mut ex: Vec<f64> = Vec::with_capacity(self.pts.len());
        let mut proj: Vec<f64> = Vec::with_capacity(self.pts.len());
        let mut feats: Vec<(f64, f64)> = Vec::new();
        for rep in &self.reps {
            // beyond the nearest boundary by the tail margin, so tiny MMSE values keep their relative accuracy
            let half = 0.5 * rep.neighbors.first().map_or(0.0, |n| n.1);
            let rmax = (half * half + PLANAR_TAIL / g).sqrt();
            // with a mirror line, directions on one side carry the other side's weight too
            let (start, count) = match rep.mirror {
                Some(a) => (a, nth / 2 + 1),
                None => (0.0, nth),
            };
            for j in 0..count {
                let th = start + 2.0 * PI * j as f64 / nth as f64;
                let fold = match rep.mirror {
                    Some(_) if j == 0 || j == nth / 2 => 1.0,
                    Some(_) => 2.0,
                    None => 1.0,
                };
                let wdir = fold * rep.mass / nth as f64;
                let u = Complex64::new(th.cos(), th.sin());
                proj.clear();
                proj.extend(rep.off.iter().map(|o| (u.conj() * o).re));
                feats.clear();
                let mut first = (f64::INFINITY, 0.0);
                for (i, &(_, d)) in rep.neighbors.iter().enumerate() {
                    if 0.5 * d > rmax {
                        break;
                    }
                    let c = proj[i];
                    if c > 0.0 {
                        let r = 0.5 * d * d / c;
                        if r < rmax {
                            feats.push((r, 1.0 / (g * c)));
                            if r < first.0 {
                                first = (r, c);
                            }
                        }
                    }
                }
                // bisectors crossed after the cell boundary separate two symbols
                // that are both negligible against the one entered there
                let (r1, c1) = first;
                feats.retain(|&(r, _)| 2.0 * g * c1 * (r - r1) < PLANAR_CUT);
                let breaks = graded_breaks(0.0, rmax, PANEL_SIGMAS * sigma, &feats);
                for pair in breaks.windows(2) {
                    let c = 0.5 * (pair[0] + pair[1]);
                    let h = 0.5 * (pair[1] - pair[0]);
                    for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
                        let r = c + h * t;
                        let dens = 2.0 * g * r * (-g * r * r).exp();
                        if dens == 0.0 {
                            continue;
                        }
                        // exponents relative to the transmitted symbol:
                        // log p_k - log p_m - gamma (d_k^2 - 2 r c_k)
                        ex.clear();
                        let (mut imax, mut vmax) = (usize::MAX, 0.0);
                        for (i, nb) in rep.neighbors.iter().enumerate() {
                            let d = nb.1;
                            if d > r && rep.dlmax - g * ((d - r) * (d - r) - r * r) < vmax - PLANAR_CUT {
                                break;
                            }
                            let v = rep.dlogp[i] - g * (rep.dsq[i] - 2.0 * r * proj[i]);
                            if v > vmax {
                                vmax = v;
                                imax = i;
                            }
                            ex.push(v);
                        }
                        let x0 = if imax == usize::MAX { Complex64::new(0.0, 0.0) } else { rep.off[imax] };
                        // moments about the most likely symbol
                        let w0 = (-vmax).exp();
                        let mut zm1 = if imax == usize::MAX { 0.0 } else { w0 };
                        let mut m1 = -x0 * w0;
                        let mut m2 = x0.norm_sqr() * w0;
                        let mut p2 = x0 * x0 * w0;
                        for (i, &v) in ex.iter().enumerate() {
                            if i == imax {
                                continue;
                            }
                            let w = (v - vmax).exp();
                            let o = rep.off[i] - x0;
                            zm1 += w;
                            m1 += o * w;
                            m2 += o.norm_sqr() * w;
                            p2 += o * o * w;
                        }
                        let z = 1.0 + zm1;
                        let delta = m1 / z;
                        let phi = (m2 / z - delta.norm_sqr()).max(0.0);
                        let psi = p2 / z - delta * delta;
                        let nlp = vmax + zm1.ln_1p();
                        let w = wdir * h * wt * dens;
                        acc.deficit += w * nlp;
                        acc.mmse += w * phi;
                        acc.second += w * (phi * phi + psi.norm_sqr());
                    }
                }
            }
        }
        acc
    }
}

/// Angle of a mirror line through the origin and `pts[k]` that maps the alphabet onto itself.
fn mirror_through(pts: &[Complex64], probs: &[f64], k: usize) -> Option<f64> {
    if pts[k].norm() < 1e-9 {
        return None;
    }
    let a = pts[k].arg();
    let r = Complex64::from_polar(1.0, 2.0 * a);
    let ok = (0..pts.len()).all(|i| {
        let z = pts[i].conj() * r;
        (0..pts.len()).any(|j| (pts[j] - z).norm() < 1e-9 && (probs[j] - probs[i]).abs() < 1e-12)
    });
    ok.then_some(a)
}

/// Orbits of the alphabet under its rotation/reflection symmetries about the
/// origin, as `(representative, total probability)`.
fn orbits(pts: &[Complex64], probs: &[f64]) -> Vec<(usize, f64)> {
    let m = pts.len();
    let trivial = || (0..m).map(|k| (k, probs[k])).collect::<Vec<_>>();
    if m > 512 {
        return trivial();
    }
    let find = |z: Complex64, p: f64| -> Option<usize> {
        (0..m).find(|&k| (pts[k] - z).norm() < 1e-9 && (probs[k] - p).abs() < 1e-12)
    };
    let maps = |f: &dyn Fn(Complex64) -> Complex64| -> Option<Vec<usize>> {
        (0..m).map(|k| find(f(pts[k]), probs[k])).collect()
    };
    let mut perms: Vec<Vec<usize>> = Vec::new();
    for n in (2..=m).rev() {
        let r = Complex64::from_polar(1.0, 2.0 * PI / n as f64);
        if let Some(p) = maps(&|z| z * r) {
            perms.push(p);
            break;
        }
    }
    for j in 0..m.max(1) {
        let r = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
        if let Some(p) = maps(&|z| z.conj() * r) {
            perms.push(p);
            break;
        }
    }
    let mut parent: Vec<usize> = (0..m).collect();
    fn root(parent: &mut [usize], mut k: usize) -> usize {
        while parent[k] != k {
            parent[k] = parent[parent[k]];
            k = parent[k];
        }
        k
    }
    for perm in &perms {
        for k in 0..m {
            let (a, b) = (root(&mut parent, k), root(&mut parent, perm[k]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out: Vec<(usize, f64)> = Vec::new();
    for k in 0..m {
        let r = root(&mut parent, k);
        match out.iter_mut().find(|(i, _)| *i == r) {
            Some(o) => o.1 += probs[k],
            None => out.push((r, probs[k])),
        }
    }
    out
}

/// Tabulated information, MMSE and derivative over an SNR grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalarCurve {
    pub constellation: String,
    pub gamma: Vec<f64>,
    pub info_nats: Vec<f64>,
    pub mmse: Vec<f64>,
    pub dmmse: Vec<f64>,
    pub quad_order: usize,
    pub method: Method,
}

/// Evaluates `points` SNR values evenly spaced in dB over `[db_lo, db_hi]`.
pub fn tabulate(ev: &Evaluator, db_lo: f64, db_hi: f64, points: usize) -> Result<ScalarCurve> {
    if points == 0 || !(db_hi >= db_lo) {
        return Err(Error::InvalidArgument("grid needs at least one point and db_hi >= db_lo".into()));
    }
    let gamma: Vec<f64> = (0..points)
        .map(|i| {
            let t = if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
            10f64.powf((db_lo + t * (db_hi - db_lo)) / 10.0)
        })
        .collect();
    let vals: Vec<ScalarPoint> = gamma.par_iter().map(|&g| ev.point(g)).collect();
    Ok(ScalarCurve {
        constellation: ev.constellation().name().to_string(),
        info_nats: vals.iter().map(|v| v.info).collect(),
        mmse: vals.iter().map(|v| v.mmse).collect(),
        dmmse: vals.iter().map(|v| v.dmmse).collect(),
        gamma,
        quad_order: ev.quad_order(),
        method: ev.method(),
    })
}

impl ScalarCurve {
    /// CSV with header `gamma_db,info_bits,mmse,dmmse`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["gamma_db", "info_bits", "mmse", "dmmse"])?;
        for i in 0..self.gamma.len() {
            wr.write_record([
                crate::fmt_sig(10.0 * self.gamma[i].log10()),
                crate::fmt_sig(self.info_nats[i] / std::f64::consts::LN_2),
                crate::fmt_sig(self.mmse[i]),
                crate::fmt_sig(self.dmmse[i]),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Sidecar metadata describing the quadrature.
    pub fn metadata_json(&self) -> String {
        serde_json::json!({
            "constellation": self.constellation,
            "points": self.gamma.len(),
            "quad_order": self.quad_order,
            "method": self.method,
            "rule": "composite Gauss-Legendre, panels graded toward decision boundaries",
            "tail_exponent": TAIL,
            "posterior_cutoff": CUT,
        })
        .to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbits_of_standard_alphabets() {
        let c = Constellation::by_name("8-PSK").unwrap();
        assert_eq!(orbits(c.points(), c.probs()).len(), 1);
        let c = Constellation::cross32();
        let o = orbits(c.points(), c.probs());
        assert_eq!(o.len(), 5);
        assert!((o.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_snr_limits() {
        for name in ["BPSK", "QPSK", "8-PSK", "16-QAM", "32-QAM"] {
            let c = Constellation::by_name(name).unwrap();
            let p = Evaluator::new(&c).point(0.0);
            assert_eq!(p.info, 0.0);
            assert!((p.mmse - 1.0).abs() < 1e-12);
        }
        let p = Evaluator::new(&Constellation::by_name("BPSK").unwrap()).point(0.0);
        assert!((p.dmmse + 2.0).abs() < 1e-12);
    }

    #[test]
    fn nearest_index() {
        let x = [-1.0, 0.0, 2.0];
        assert_eq!(nearest(&x, -5.0), 0);
        assert_eq!(nearest(&x, 0.9), 1);
        assert_eq!(nearest(&x, 1.1), 2);
        assert_eq!(nearest(&x, 9.0), 2);
    }
}
