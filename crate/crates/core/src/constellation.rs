//! Finite complex input alphabets.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

const POINT_TOL: f64 = 1e-9;

/// Standard constellation families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Bpsk,
    Qpsk,
    Psk,
    Pam,
    SquareQam,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Bpsk => "BPSK",
            Family::Qpsk => "QPSK",
            Family::Psk => "PSK",
            Family::Pam => "PAM",
            Family::SquareQam => "QAM",
        };
        f.write_str(s)
    }
}

/// A zero-mean, unit-power finite alphabet with symbol probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    name: String,
    points: Vec<Complex64>,
    probs: Vec<f64>,
    separable: bool,
}

/// One real coordinate of a separable constellation.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    /// Distinct coordinate values, increasing.
    pub values: Vec<f64>,
    /// Marginal probabilities of `values`.
    pub probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ConstellationFile {
    name: String,
    points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probs: Option<Vec<f64>>,
}

impl Constellation {
    /// Builds a constellation from raw points, normalizing to zero mean and unit power.
    ///
    /// `probs` defaults to equiprobable and is rescaled to sum to one. Zero-probability
    /// points are dropped.
    pub fn from_points(name: &str, points: &[Complex64], probs: Option<&[f64]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConstellation("no points".into()));
        }
        let probs: Vec<f64> = match probs {
            Some(p) if p.len() != points.len() => {
                return Err(Error::InvalidConstellation(format!(
                    "{} probabilities for {} points",
                    p.len(),
                    points.len()
                )))
            }
            Some(p) => p.to_vec(),
            None => vec![1.0; points.len()],
        };
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidConstellation("probabilities must be finite and non-negative".into()));
        }
        if points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidConstellation("non-finite point".into()));
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidConstellation("probabilities sum to zero".into()));
        }
        let (mut pts, mut pr) = (Vec::new(), Vec::new());
        for (z, p) in points.iter().zip(&probs) {
            if *p > 0.0 {
                pts.push(*z);
                pr.push(p / total);
            }
        }
        let mean: Complex64 = pts.iter().zip(&pr).map(|(z, p)| z * p).sum();
        let power: f64 = pts.iter().zip(&pr).map(|(z, p)| (z - mean).norm_sqr() * p).sum();
        if power <= 0.0 {
            return Err(Error::InvalidConstellation("all mass on a single point".into()));
        }
        let scale = power.sqrt().recip();
        for z in &mut pts {
            *z = (*z - mean) * scale;
            // keep exact zeros on axes of symmetric alphabets
            if z.re.abs() < 1e-15 {
                z.re = 0.0;
            }
            if z.im.abs() < 1e-15 {
                z.im = 0.0;
            }
        }
        let mut c = Constellation {
            name: name.to_string(),
            points: pts,
            probs: pr,
            separable: false,
        };
        let dmin = c.min_distance();
        if dmin < POINT_TOL {
            return Err(Error::InvalidConstellation("points are not distinct".into()));
        }
        c.separable = c.detect_components().is_some();
        Ok(c)
    }

    /// Equiprobable member of a standard family.
    pub fn standard(family: Family, order: usize) -> Result<Self> {
        let bad = |constraint| Error::InvalidOrder {
            family: family.to_string(),
            order,
            constraint,
        };
        let (name, pts): (String, Vec<Complex64>) = match family {
            Family::Bpsk => {
                if order != 2 {
                    return Err(bad("BPSK has order 2"));
                }
                ("BPSK".into(), pam_levels(2).into_iter().map(|a| Complex64::new(a, 0.0)).collect())
            }
            Family::Qpsk => {
                if order != 4 {
                    return Err(bad("QPSK has order 4"));
                }
                ("QPSK".into(), square_qam(2))
            }
            Family::Psk => {
                if order < 2 || !order.is_power_of_two() {
                    return Err(bad("PSK order must be a power of 2"));
                }
                let pts = (0..order)
                    .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64))
                    .collect();
                (format!("{order}-PSK"), pts)
            }
            Family::Pam => {
                if order < 2 {
                    return Err(bad("PAM order must be at least 2"));
                }
                (
                    format!("{order}-PAM"),
                    pam_levels(order).into_iter().map(|a| Complex64::new(a, 0.0)).collect(),
                )
            }
            Family::SquareQam => {
                let side = (order as f64).sqrt().round() as usize;
                if order < 4 || side * side != order {
                    return Err(bad("square QAM order must be a perfect square >= 4"));
                }
                (format!("{order}-QAM"), square_qam(side))
            }
        };
        Self::from_points(&name, &snap(pts), None)
    }

    /// The 32-point cross constellation (6x6 grid without its corners).
    pub fn cross32() -> Self {
        let lv = [-5.0, -3.0, -1.0, 1.0, 3.0, 5.0];
        let mut pts = Vec::new();
        for &i in &lv {
            for &q in &lv {
                if f64::abs(i) == 5.0 && f64::abs(q) == 5.0 {
                    continue;
                }
                pts.push(Complex64::new(i, q));
            }
        }
        Self::from_points("32-QAM", &pts, None).expect("valid cross constellation")
    }

    /// Parses names such as `BPSK`, `QPSK`, `8-PSK`, `4-PAM`, `256-QAM` and `32-QAM` (cross).
    pub fn by_name(name: &str) -> Result<Self> {
        let up = name.trim().to_ascii_uppercase().replace(['-', '_', ' '], "");
        match up.as_str() {
            "BPSK" => return Self::standard(Family::Bpsk, 2),
            "QPSK" => return Self::standard(Family::Qpsk, 4),
            "32QAM" | "32CROSS" => return Ok(Self::cross32()),
            _ => {}
        }
        let digits: String = up.chars().take_while(|c| c.is_ascii_digit()).collect();
        let rest = &up[digits.len()..];
        let order: usize = digits
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("unknown constellation name '{name}'")))?;
        let family = match rest {
            "PSK" => Family::Psk,
            "PAM" => Family::Pam,
            "QAM" => Family::SquareQam,
            _ => return Err(Error::InvalidArgument(format!("unknown constellation name '{name}'"))),
        };
        Self::standard(family, order)
    }

    /// Parses the JSON file format `{name, points: [[re, im], ...], probs?}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: ConstellationFile = serde_json::from_str(text)?;
        let pts: Vec<Complex64> = f.points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        Self::from_points(&f.name, &pts, f.probs.as_deref())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let f = ConstellationFile {
            name: self.name.clone(),
            points: self.points.iter().map(|z| [z.re, z.im]).collect(),
            probs: Some(self.probs.clone()),
        };
        serde_json::to_string_pretty(&f).expect("serializable")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when the alphabet is a product of two independent real alphabets.
    pub fn is_separable(&self) -> bool {
        self.separable
    }

    /// Real and imaginary components of a separable constellation.
    pub fn components(&self) -> Option<(Component, Component)> {
        if self.separable {
            self.detect_components()
        } else {
            None
        }
    }

    /// Minimum distance between distinct points.
    pub fn min_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                d = d.min((self.points[i] - self.points[j]).norm());
            }
        }
        d
    }

    pub fn entropy_nats(&self) -> f64 {
        self.probs.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum()
    }

    pub fn entropy_bits(&self) -> f64 {
        self.entropy_nats() / std::f64::consts::LN_2
    }

    /// `E[X^2]` (pseudo-variance); zero for proper alphabets.
    pub fn pseudo_variance(&self) -> Complex64 {
        self.points.iter().zip(&self.probs).map(|(z, p)| z * z * p).sum()
    }

    fn detect_components(&self) -> Option<(Component, Component)> {
        let re = distinct(self.points.iter().map(|z| z.re));
        let im = distinct(self.points.iter().map(|z| z.im));
        if re.len() * im.len() != self.points.len() {
            return None;
        }
        let mut grid = vec![f64::NAN; re.len() * im.len()];
        for (z, p) in self.points.iter().zip(&self.probs) {
            let i = index_of(&re, z.re)?;
            let j = index_of(&im, z.im)?;
            grid[i * im.len() + j] = *p;
        }
        if grid.iter().any(|p| p.is_nan()) {
            return None;
        }
        let pr: Vec<f64> = (0..re.len()).map(|i| (0..im.len()).map(|j| grid[i * im.len() + j]).sum()).collect();
        let pi: Vec<f64> = (0..im.len()).map(|j| (0..re.len()).map(|i| grid[i * im.len() + j]).sum()).collect();
        for i in 0..re.len() {
            for j in 0..im.len() {
                if (grid[i * im.len() + j] - pr[i] * pi[j]).abs() > 1e-12 {
                    return None;
                }
            }
        }
        Some((
            Component { values: re, probs: pr },
            Component { values: im, probs: pi },
        ))
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Unnormalized PAM levels `2k - (M - 1)`.
fn pam_levels(m: usize) -> Vec<f64> {
    (0..m).map(|k| 2.0 * k as f64 - (m as f64 - 1.0)).collect()
}

fn square_qam(side: usize) -> Vec<Complex64> {
    let lv = pam_levels(side);
    let mut pts = Vec::with_capacity(side * side);
    for &i in &lv {
        for &q in &lv {
            pts.push(Complex64::new(i, q));
        }
    }
    pts
}

/// Rounds away floating residue of trigonometric construction (e.g. cos(pi/2)).
fn snap(pts: Vec<Complex64>) -> Vec<Complex64> {
    pts.into_iter()
        .map(|z| {
            let f = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
            Complex64::new(f(z.re), f(z.im))
        })
        .collect()
}

fn distinct(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() < POINT_TOL);
    v
}

fn index_of(v: &[f64], x: f64) -> Option<usize> {
    v.iter().position(|y| (y - x).abs() < POINT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(x: f64) -> f64 {
        10.0 * x.log10()
    }

    #[test]
    fn bpsk_points() {
        let c = Constellation::standard(Family::Bpsk, 2).unwrap();
        assert_eq!(c.points(), &[Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(c.probs(), &[0.5, 0.5]);
        assert_eq!(c.min_distance(), 2.0);
        assert!((c.entropy_bits() - 1.0).abs() < 1e-15);
        assert!(c.is_separable());
    }

    #[test]
    fn pam4_points() {
        let c = Constellation::standard(Family::Pam, 4).unwrap();
        let a = 1.0 / 5f64.sqrt();
        let want = [-3.0 * a, -a, a, 3.0 * a];
        for (z, w) in c.points().iter().zip(want) {
            assert!((z.re - w).abs() < 1e-15 && z.im == 0.0);
        }
    }

    #[test]
    fn table_min_distances() {
        for (m, want) in [(64, -16.2), (256, -22.3), (1024, -28.3), (4096, -34.4)] {
            let c = Constellation::standard(Family::SquareQam, m).unwrap();
            let d = c.min_distance();
            assert!((db(d * d / 4.0) - want).abs() < 0.05, "{m}: {}", db(d * d / 4.0));
        }
    }

    #[test]
    fn invalid_orders_rejected() {
        assert!(Constellation::standard(Family::Psk, 6).is_err());
        assert!(Constellation::standard(Family::SquareQam, 8).is_err());
        assert!(Constellation::standard(Family::SquareQam, 1).is_err());
        assert!(Constellation::standard(Family::Bpsk, 4).is_err());
        let e = Constellation::standard(Family::Psk, 12).unwrap_err().to_string();
        assert!(e.contains("power of 2"), "{e}");
    }

    #[test]
    fn skewed_binary_entropy() {
        let pts = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let c = Constellation::from_points("skew", &pts, Some(&[0.25, 0.75])).unwrap();
        assert!((c.entropy_bits() - 0.811_278_124_459_132_8).abs() < 1e-12);
        let mean: Complex64 = c.points().iter().zip(c.probs()).map(|(z, p)| z * p).sum();
        assert!(mean.norm() < 1e-12);
    }

    #[test]
    fn separability() {
        assert!(Constellation::by_name("16-QAM").unwrap().is_separable());
        assert!(Constellation::by_name("QPSK").unwrap().is_separable());
        assert!(!Constellation::by_name("8-PSK").unwrap().is_separable());
        assert!(!Constellation::cross32().is_separable());
        let (re, im) = Constellation::by_name("4-PAM").unwrap().components().unwrap();
        assert_eq!(re.values.len(), 4);
        assert_eq!(im.values, vec![0.0]);
    }

    #[test]
    fn cross32_geometry() {
        let c = Constellation::cross32();
        assert_eq!(c.len(), 32);
        assert!((c.min_distance().powi(2) / 4.0 - 0.05).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let c = Constellation::by_name("8-PSK").unwrap();
        let d = Constellation::from_json(&c.to_json()).unwrap();
        for (a, b) in c.points().iter().zip(d.points()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(Constellation::from_json(r#"{"name":"x","points":[[1,0],[1,0]]}"#).is_err());
    }
}
