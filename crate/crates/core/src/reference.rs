//! Published reference values and the checks that compare computed quantities against them.

use std::f64::consts::LN_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::logsnr::{self, build_profile, concave_envelope, ConcavityReport, DEFAULT_SATURATION_EPS};
use crate::scalar::{Evaluator, Method};
use crate::uniform::{ConvexityCertificate, UniformProfile};

/// The shipped data file.
pub const REFERENCE_JSON: &str = include_str!("../data/reference_values.json");

pub const SUPPORTED_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceData {
    pub version: u32,
    pub table: Vec<TableRow>,
    pub uniform: UniformReference,
    pub experiments: Experiments,
}

/// One row of the summary table. Quantities absent from the source are `None`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableRow {
    pub input: String,
    pub resolution_bits: f64,
    pub concave_everywhere: bool,
    #[serde(default)]
    pub dmin_half_sq_db: Option<f64>,
    #[serde(default)]
    pub gamma1_low_db: Option<f64>,
    #[serde(default)]
    pub gamma0_low_db: Option<f64>,
    #[serde(default)]
    pub gamma0_high_db: Option<f64>,
    #[serde(default)]
    pub gamma2_high_db: Option<f64>,
    #[serde(default)]
    pub delta_x_bits: Option<f64>,
    #[serde(default)]
    pub tol_db: Option<f64>,
    #[serde(default)]
    pub tol_delta_rel: Option<f64>,
}

impl TableRow {
    /// The limiting uniform input, which has no finite alphabet.
    pub fn is_uniform(&self) -> bool {
        let s = self.input.to_ascii_lowercase();
        s.starts_with("inf") || s == "uniform"
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerated {
    pub value: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniformReference {
    pub gamma0_low_db: Tolerated,
    pub zeta2_tilde_bits: Tolerated,
    pub delta_tilde_bits: Tolerated,
    pub deltabar_30db_bits: Tolerated,
    pub deltabar_60db_bits: Tolerated,
    pub high_snr_offset_tol_nats: f64,
    pub high_snr_offset_zeta_nats: f64,
    pub c1: Tolerated,
    pub c2: Tolerated,
    pub certificate_threshold_max: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Experiments {
    pub uniform_80211n_max_abs_diff_bits: f64,
    pub sharp_gamma: f64,
    pub sharp_qam_order: usize,
    pub sharp_min_diff_fraction: f64,
    pub min_diff_tol_bits: f64,
    pub rate_5_6_gap_db_floor: f64,
    pub rate_5_6_inputs: Vec<String>,
    pub relative_excess_floor: f64,
}

impl ReferenceData {
    pub fn from_json(text: &str) -> Result<Self> {
        let d: ReferenceData = serde_json::from_str(text)?;
        if d.version != SUPPORTED_VERSION {
            return Err(Error::InvalidArgument(format!(
                "reference data version {} is not supported (expected {SUPPORTED_VERSION})",
                d.version
            )));
        }
        Ok(d)
    }

    /// The shipped file, or `path` when given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::from_json(&std::fs::read_to_string(p)?),
            None => Self::from_json(REFERENCE_JSON),
        }
    }
}

/// How a computed value is compared with its reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `|computed - reference| <= tolerance`
    Absolute,
    /// `|computed - reference| <= tolerance * |reference|`
    Relative,
    /// `computed <= reference + tolerance`
    AtMost,
    /// `computed >= reference - tolerance`
    AtLeast,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub item: String,
    pub quantity: String,
    pub computed: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub rule: Rule,
    pub pass: bool,
}

impl Check {
    pub fn new(item: &str, quantity: &str, computed: f64, reference: f64, tolerance: f64, rule: Rule) -> Self {
        let pass = match rule {
            Rule::Absolute => (computed - reference).abs() <= tolerance,
            Rule::Relative => (computed - reference).abs() <= tolerance * reference.abs(),
            Rule::AtMost => computed <= reference + tolerance,
            Rule::AtLeast => computed >= reference - tolerance,
        };
        Check {
            item: item.to_string(),
            quantity: quantity.to_string(),
            computed,
            reference,
            tolerance,
            rule,
            pass,
        }
    }

    /// A missing computed value fails against any reference.
    fn optional(item: &str, quantity: &str, computed: Option<f64>, reference: f64, tolerance: f64, rule: Rule) -> Self {
        Check::new(item, quantity, computed.unwrap_or(f64::NAN), reference, tolerance, rule)
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} {}: computed {} reference {} ({:?} {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.item,
            self.quantity,
            crate::fmt_sig(self.computed),
            crate::fmt_sig(self.reference),
            self.rule,
            crate::fmt_sig(self.tolerance)
        )
    }
}

/// Writes checks as CSV with header `item,quantity,computed,reference,tolerance,rule,pass`.
pub fn write_checks_csv<W: std::io::Write>(checks: &[Check], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["item", "quantity", "computed", "reference", "tolerance", "rule", "pass"])?;
    for c in checks {
        let rule = match c.rule {
            Rule::Absolute => "absolute",
            Rule::Relative => "relative",
            Rule::AtMost => "at_most",
            Rule::AtLeast => "at_least",
        };
        wr.write_record([
            c.item.clone(),
            c.quantity.clone(),
            crate::fmt_sig(c.computed),
            crate::fmt_sig(c.reference),
            crate::fmt_sig(c.tolerance),
            rule.to_string(),
            c.pass.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Computed columns of one table row.
#[derive(Clone, Debug, Serialize)]
pub struct RowResult {
    pub input: String,
    pub resolution_bits: f64,
    pub dmin_half_sq_db: Option<f64>,
    pub gamma1_low_db: Option<f64>,
    pub gamma0_low_db: Option<f64>,
    pub gamma0_high_db: Option<f64>,
    pub gamma2_high_db: Option<f64>,
    pub delta_x_bits: f64,
    pub concave_everywhere: bool,
}

impl RowResult {
    pub fn from_report(r: &ConcavityReport, resolution_bits: f64, dmin_half_sq_db: Option<f64>) -> Self {
        RowResult {
            input: r.label.clone(),
            resolution_bits,
            dmin_half_sq_db,
            gamma1_low_db: r.gamma1_low_db(),
            gamma0_low_db: r.gamma0_low_db(),
            gamma0_high_db: r.gamma0_high_db(),
            gamma2_high_db: r.gamma2_high_db(),
            delta_x_bits: r.delta_x_bits(),
            concave_everywhere: r.thresholds.is_concave(),
        }
    }

    /// The uniform input has only the first convexity threshold and its limiting gap.
    pub fn from_uniform(u: &UniformProfile) -> Self {
        RowResult {
            input: "inf-QAM".into(),
            resolution_bits: crate::uniform::PROFILE_RESOLUTION_BITS,
            dmin_half_sq_db: None,
            gamma1_low_db: None,
            gamma0_low_db: Some(u.gamma0_low_db()),
            gamma0_high_db: None,
            gamma2_high_db: None,
            delta_x_bits: u.shaping_offset / LN_2,
            concave_everywhere: false,
        }
    }

    pub fn checks(&self, row: &TableRow) -> Vec<Check> {
        let item = row.input.as_str();
        let mut out = vec![Check::new(
            item,
            "concave_everywhere",
            f64::from(u8::from(self.concave_everywhere)),
            f64::from(u8::from(row.concave_everywhere)),
            0.0,
            Rule::Absolute,
        )];
        if row.concave_everywhere {
            out.push(Check::new(item, "delta_x_bits", self.delta_x_bits, 0.0, 0.0, Rule::Absolute));
            return out;
        }
        let tol_db = row.tol_db.unwrap_or(0.05);
        let pairs = [
            ("dmin_half_sq_db", self.dmin_half_sq_db, row.dmin_half_sq_db),
            ("gamma1_low_db", self.gamma1_low_db, row.gamma1_low_db),
            ("gamma0_low_db", self.gamma0_low_db, row.gamma0_low_db),
            ("gamma0_high_db", self.gamma0_high_db, row.gamma0_high_db),
            ("gamma2_high_db", self.gamma2_high_db, row.gamma2_high_db),
        ];
        for (q, c, r) in pairs {
            if let Some(r) = r {
                out.push(Check::optional(item, q, c, r, tol_db, Rule::Absolute));
            }
        }
        if let Some(r) = row.delta_x_bits {
            out.push(Check::new(
                item,
                "delta_x_bits",
                self.delta_x_bits,
                r,
                row.tol_delta_rel.unwrap_or(0.02),
                Rule::Relative,
            ));
        }
        out
    }
}

/// Builds the profile of a finite-alphabet row and its envelope.
///
/// `resolution_bits` overrides the row's grid; `quad_order` the quadrature nodes per panel.
pub fn compute_row(row: &TableRow, resolution_bits: Option<f64>, quad_order: Option<usize>) -> Result<(RowResult, ConcavityReport)> {
    if row.is_uniform() {
        return Err(Error::InvalidArgument("the uniform row comes from RowResult::from_uniform".into()));
    }
    let c = Constellation::by_name(&row.input)?;
    let ev = match quad_order {
        Some(q) => {
            let m = if c.is_separable() { Method::Separable } else { Method::Planar };
            Evaluator::with(&c, m, q)?
        }
        None => Evaluator::new(&c),
    };
    let res = resolution_bits.unwrap_or(row.resolution_bits);
    let p = build_profile(&ev, res, DEFAULT_SATURATION_EPS)?;
    let mut report = concave_envelope(&p);
    report.label = row.input.clone();
    let dm = c.min_distance();
    Ok((RowResult::from_report(&report, res, Some(logsnr::db(0.25 * dm * dm))), report))
}

/// Checks on the uniform-input structure and its convexity certificate.
pub fn uniform_checks(u: &UniformProfile, cert: &ConvexityCertificate, r: &UniformReference) -> Vec<Check> {
    let item = "uniform";
    let t = |q: &str, c: f64, v: Tolerated| Check::new(item, q, c, v.value, v.tol, Rule::Absolute);
    let z = r.high_snr_offset_zeta_nats;
    vec![
        t("gamma0_low_db", u.gamma0_low_db(), r.gamma0_low_db),
        t("zeta2_tilde_bits", u.zeta2_tilde / LN_2, r.zeta2_tilde_bits),
        t("delta_tilde_bits", u.delta_tilde_bits(), r.delta_tilde_bits),
        t(
            "deltabar_30db_bits",
            u.deltabar(logsnr::from_db(30.0)).delta / LN_2,
            r.deltabar_30db_bits,
        ),
        t(
            "deltabar_60db_bits",
            u.deltabar(logsnr::from_db(60.0)).delta / LN_2,
            r.deltabar_60db_bits,
        ),
        Check::new(
            item,
            "high_snr_offset_nats",
            z - u.profile.ilog_at(z),
            u.shaping_offset,
            r.high_snr_offset_tol_nats,
            Rule::Absolute,
        ),
        t("c1", cert.c1, r.c1),
        t("c2", cert.c2, r.c2),
        Check::optional(
            item,
            "certificate_threshold",
            cert.threshold,
            r.certificate_threshold_max,
            0.0,
            Rule::AtMost,
        ),
    ]
}
