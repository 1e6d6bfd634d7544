//! Error-function family and Gauss-Legendre rules.
//!
//! `erfc` comes from libm. The scaled variant `erfcx(x) = exp(x^2) erfc(x)` is
//! assembled here because the bound functions and the uniform-input kernels
//! need ratios of Gaussian tails far beyond the point where `erfc` underflows.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub use libm::erfc;

/// 1/sqrt(pi).
pub const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Scaled complementary error function `exp(x^2) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        // erfcx(-x) = 2 exp(x^2) - erfcx(x)
        let (hi, lo) = two_square(x);
        return 2.0 * hi.exp() * lo.exp() - erfcx(-x);
    }
    if x < 10.0 {
        let (hi, lo) = two_square(x);
        return hi.exp() * lo.exp() * erfc(x);
    }
    // Continued fraction erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + (2/2)/(x + ...))).
    let mut t = x;
    for k in (1..=60).rev() {
        t = x + 0.5 * k as f64 / t;
    }
    FRAC_1_SQRT_PI / t
}

/// `x^2` split as `hi + lo` exactly.
fn two_square(x: f64) -> (f64, f64) {
    let hi = x * x;
    let lo = x.mul_add(x, -hi);
    (hi, lo)
}

/// Standard normal upper tail `Q(x) = erfc(x/sqrt 2)/2`.
///
/// Underflows to zero beyond `x ~ 38.5`; use [`q_scaled`] or [`ln_q`] there.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// `exp(x^2/2) Q(x)`, finite for every real `x >= 0` and accurate in the far tail.
pub fn q_scaled(x: f64) -> f64 {
    0.5 * erfcx(x * FRAC_1_SQRT_2)
}

/// Natural logarithm of `Q(x)`.
pub fn ln_q(x: f64) -> f64 {
    if x > 2.0 {
        q_scaled(x).ln() - 0.5 * x * x
    } else {
        q_function(x).ln()
    }
}

/// Inverse of [`q_function`] on `(0, 1)`, by bisection on the log tail.
pub fn q_inverse(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "q_inverse needs p in (0, 1)");
    let target = p.ln();
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_q(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Appends nodes and weights for every panel between consecutive breakpoints.
    pub fn push_panels(&self, breaks: &[f64], xs: &mut Vec<f64>, ws: &mut Vec<f64>) {
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b <= a {
                continue;
            }
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(c + h * x);
                ws.push(h * w);
            }
        }
    }
}

/// Value and derivative of the Legendre polynomial `P_n` at `z`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Breakpoints on `[lo, hi]` with spacing at most `hmax`, refined geometrically
/// around each feature `(center, h0)`: panel widths `h0, 2h0, 4h0, ...` on both
/// sides of the center until they reach `hmax`. Features with `2 h0 >= hmax`
/// are already resolved by the uniform spacing and are ignored.
pub fn graded_breaks(lo: f64, hi: f64, hmax: f64, features: &[(f64, f64)]) -> Vec<f64> {
    let mut b = Vec::new();
    let span = hi - lo;
    if span <= 0.0 {
        return vec![lo, hi];
    }
    let n = (span / hmax).ceil().max(1.0) as usize;
    for i in 0..=n {
        b.push(lo + span * i as f64 / n as f64);
    }
    for &(c, h0) in features {
        if c < lo - hmax || c > hi + hmax || 2.0 * h0 >= hmax {
            continue;
        }
        if c > lo && c < hi {
            b.push(c);
        }
        let mut off = h0;
        let mut w = h0;
        while w < hmax {
            for x in [c - off, c + off] {
                if x > lo && x < hi {
                    b.push(x);
                }
            }
            w *= 2.0;
            off += w;
        }
    }
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let tol = 1e-12 * span;
    b.dedup_by(|x, y| (*x - *y).abs() <= tol);
    b
}
