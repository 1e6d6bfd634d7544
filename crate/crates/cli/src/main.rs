use std::f64::consts::LN_2;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use isirl::bounds::{self, SweepConfig, SweepRow};
use isirl::isi::{self, Extremal, InfoCurve, IsiChannel, RateComparison};
use isirl::logsnr::{self, build_profile, concave_envelope, ConcavityReport, LogSnrProfile, DEFAULT_SATURATION_EPS};
use isirl::reference::{self, Check, ReferenceData, RowResult, Rule};
use isirl::uniform::{self, UniformProfile};
use isirl::{fmt_sig, Constellation, Evaluator, Method};

#[derive(Parser, Debug, Serialize)]
#[command(name = "isirl", version, about = "Single-carrier and OFDM achievable rates over ISI channels")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Common {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Quadrature nodes per panel (at least 8).
    #[arg(long, global = true)]
    quad_order: Option<usize>,
    /// Log-SNR grid spacing in bits, in (0, 0.01].
    #[arg(long, global = true)]
    grid_bits: Option<f64>,
    /// Reference value file; the shipped copy is used by default.
    #[arg(long, global = true)]
    reference: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
enum Command {
    /// Concavity thresholds and gap constants of the summary table, diffed against the reference.
    Table1 {
        /// Omit rows whose input name contains this text (repeatable).
        #[arg(long)]
        skip: Vec<String>,
    },
    /// Interval envelope gap of the uniform input over a range of peak SNRs.
    DeltabarCurve {
        /// Peak SNR range in dB, as LO:HI.
        #[arg(long, value_parser = parse_range, default_value = "5:100")]
        snr_range: Range,
        #[arg(long, default_value_t = 96)]
        steps: usize,
    },
    /// Single-carrier and OFDM rates over one channel for each input.
    ChannelCompare {
        /// Channel file, or one of 80211n, flat, min-diff:INPUT, sharp:G.
        #[arg(long, default_value = "80211n")]
        channel: String,
        /// Input name or constellation file; `uniform` selects the continuous input (repeatable).
        #[arg(long)]
        constellation: Vec<String>,
        /// Input SNR range in dB, as LO:HI.
        #[arg(long, value_parser = parse_range)]
        snr_range: Option<Range>,
        /// Single input SNR in dB.
        #[arg(long, conflicts_with = "snr_range")]
        snr_db: Option<f64>,
        #[arg(long, default_value_t = 71)]
        steps: usize,
    },
    /// Sandwich checks of the closed-form MMSE bounds.
    VerifyBounds {
        #[arg(long, default_value_t = 0.5)]
        rho_min: f64,
        #[arg(long, default_value_t = 16.0)]
        rho_max: f64,
        /// Spacing d of the PAM alphabets.
        #[arg(long, default_value_t = 2.0)]
        spacing: f64,
        /// Random trials of the point-removal property.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Clone, Copy, Debug, Serialize)]
struct Range {
    lo: f64,
    hi: f64,
}

fn parse_range(s: &str) -> std::result::Result<Range, String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(format!("range {lo}:{hi} must be finite with LO <= HI"));
    }
    Ok(Range { lo, hi })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ISIRL_THREADS") {
        let n: usize = v.parse().with_context(|| format!("ISIRL_THREADS={v}"))?;
        if n == 0 {
            bail!("ISIRL_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    validate(cli)?;
    fs::create_dir_all(&cli.common.out).with_context(|| format!("creating {}", cli.common.out.display()))?;
    let refs = ReferenceData::load(cli.common.reference.as_deref())?;
    match &cli.command {
        Command::Table1 { skip } => table1(cli, &refs, skip),
        Command::DeltabarCurve { snr_range, steps } => deltabar_curve(cli, &refs, *snr_range, *steps),
        Command::ChannelCompare {
            channel,
            constellation,
            snr_range,
            snr_db,
            steps,
        } => channel_compare(cli, &refs, channel, constellation, *snr_range, *snr_db, *steps),
        Command::VerifyBounds {
            rho_min,
            rho_max,
            spacing,
            trials,
        } => verify_bounds(cli, *rho_min, *rho_max, *spacing, *trials),
    }
}

fn validate(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    if let Some(q) = c.quad_order {
        if !(isirl::scalar::MIN_QUAD_ORDER..=64).contains(&q) {
            bail!("--quad-order must be in [{}, 64], got {q}", isirl::scalar::MIN_QUAD_ORDER);
        }
    }
    if let Some(g) = c.grid_bits {
        if !(g > 0.0 && g <= 0.01) {
            bail!("--grid-bits must be in (0, 0.01], got {g}");
        }
    }
    match &cli.command {
        Command::DeltabarCurve { steps, .. } | Command::ChannelCompare { steps, .. } if *steps == 0 => {
            bail!("--steps must be at least 1")
        }
        Command::VerifyBounds {
            rho_min,
            rho_max,
            spacing,
            ..
        } => {
            if !(spacing.is_finite() && *spacing > 0.0) {
                bail!("--spacing must be positive, got {spacing}");
            }
            if !(*rho_min > 0.0 && rho_max >= rho_min && rho_max.is_finite()) {
                bail!("--rho-min/--rho-max must satisfy 0 < min <= max");
            }
        }
        _ => {}
    }
    Ok(())
}

fn out_file(cli: &Cli, name: &str) -> Result<BufWriter<File>> {
    let p = cli.common.out.join(name);
    Ok(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?))
}

/// Sidecar `<stem>.meta.json` with the full configuration and a summary.
fn write_meta<S: Serialize>(cli: &Cli, stem: &str, refs: Option<&ReferenceData>, summary: &S) -> Result<()> {
    let meta = serde_json::json!({
        "tool": "isirl",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cli,
        "reference_version": refs.map(|r| r.version),
        "summary": summary,
    });
    let w = out_file(cli, &format!("{stem}.meta.json"))?;
    serde_json::to_writer_pretty(w, &meta)?;
    Ok(())
}

fn report_checks(checks: &[Check]) -> bool {
    for c in checks {
        println!("{}", c.line());
    }
    checks.iter().all(|c| c.pass)
}

fn evaluator(c: &Constellation, quad_order: Option<usize>) -> Result<Evaluator> {
    Ok(match quad_order {
        Some(q) => {
            let m = if c.is_separable() { Method::Separable } else { Method::Planar };
            Evaluator::with(c, m, q)?
        }
        None => Evaluator::new(c),
    })
}

fn table1(cli: &Cli, refs: &ReferenceData, skip: &[String]) -> Result<bool> {
    let skipped = |name: &str| {
        let n = name.to_ascii_lowercase();
        skip.iter().any(|s| n.contains(&s.to_ascii_lowercase()))
    };
    let mut results = Vec::new();
    let mut checks = Vec::new();
    for row in refs.table.iter().filter(|r| !skipped(&r.input)) {
        eprintln!("table1: {}", row.input);
        let res = if row.is_uniform() {
            let u = UniformProfile::build(
                cli.common.grid_bits.unwrap_or(uniform::PROFILE_RESOLUTION_BITS),
                uniform::PROFILE_ZETA_MAX,
            )?;
            RowResult::from_uniform(&u)
        } else {
            reference::compute_row(row, cli.common.grid_bits, cli.common.quad_order)?.0
        };
        checks.extend(res.checks(row));
        results.push(res);
    }
    let mut wr = csv::Writer::from_writer(out_file(cli, "table1.csv")?);
    wr.write_record([
        "input",
        "dmin_half_sq_db",
        "gamma1_low_db",
        "gamma0_low_db",
        "gamma0_high_db",
        "gamma2_high_db",
        "delta_x_bits",
        "concave_everywhere",
    ])?;
    let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    for r in &results {
        wr.write_record([
            r.input.clone(),
            opt(r.dmin_half_sq_db),
            opt(r.gamma1_low_db),
            opt(r.gamma0_low_db),
            opt(r.gamma0_high_db),
            opt(r.gamma2_high_db),
            fmt_sig(r.delta_x_bits),
            r.concave_everywhere.to_string(),
        ])?;
    }
    wr.flush()?;
    reference::write_checks_csv(&checks, out_file(cli, "table1_diff.csv")?)?;
    let ok = report_checks(&checks);
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).map(|c| format!("{} {}", c.item, c.quantity)).collect();
    write_meta(
        cli,
        "table1",
        Some(refs),
        &serde_json::json!({ "rows": results.len(), "checks": checks.len(), "failed": failed }),
    )?;
    Ok(ok)
}

fn deltabar_curve(cli: &Cli, refs: &ReferenceData, range: Range, steps: usize) -> Result<bool> {
    let u = UniformProfile::build(
        cli.common.grid_bits.unwrap_or(uniform::PROFILE_RESOLUTION_BITS),
        uniform::PROFILE_ZETA_MAX,
    )?;
    let grid = linspace(range.lo, range.hi, steps);
    u.write_deltabar_csv(&grid, out_file(cli, "deltabar_curve.csv")?)?;
    let vals: Vec<f64> = grid.iter().map(|&g| u.deltabar(logsnr::from_db(g)).delta / LN_2).collect();
    let r = &refs.uniform;
    let item = "deltabar";
    let mut checks = Vec::new();
    for (db, t) in [(30.0, r.deltabar_30db_bits), (60.0, r.deltabar_60db_bits)] {
        if (range.lo..=range.hi).contains(&db) {
            let v = u.deltabar(logsnr::from_db(db)).delta / LN_2;
            checks.push(Check::new(item, &format!("at_{db}_db_bits"), v, t.value, t.tol, Rule::Absolute));
        }
    }
    let below: f64 = grid
        .iter()
        .zip(&vals)
        .filter(|(g, _)| **g <= u.gamma0_low_db())
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    checks.push(Check::new(item, "max_below_gamma0_low_bits", below, 0.0, 0.0, Rule::Absolute));
    let drop = vals.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    checks.push(Check::new(item, "largest_decrease_bits", drop, 1e-12, 0.0, Rule::AtMost));
    let ok = report_checks(&checks);
    write_meta(
        cli,
        "deltabar_curve",
        Some(refs),
        &serde_json::json!({
            "gamma0_low_db": u.gamma0_low_db(),
            "gamma2_tilde_db": u.gamma2_tilde_db(),
            "delta_tilde_bits": u.delta_tilde_bits(),
            "limit_bits": u.shaping_offset / LN_2,
            "checks": checks,
        }),
    )?;
    Ok(ok)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

enum Input {
    Finite {
        profile: LogSnrProfile,
        report: ConcavityReport,
    },
    Uniform(UniformProfile),
}

impl Input {
    fn curve(&self) -> &dyn InfoCurve {
        match self {
            Input::Finite { profile, .. } => profile,
            Input::Uniform(u) => u,
        }
    }
}

/// Profile at the ISI-sweep default resolution unless overridden.
const COMPARE_GRID_BITS: f64 = 2e-3;

fn load_input(cli: &Cli, spec: &str) -> Result<Input> {
    let lower = spec.to_ascii_lowercase();
    if lower == "uniform" || lower.starts_with("inf") {
        let res = cli.common.grid_bits.unwrap_or(uniform::PROFILE_RESOLUTION_BITS);
        return Ok(Input::Uniform(UniformProfile::build(res, uniform::PROFILE_ZETA_MAX)?));
    }
    let c = if Path::new(spec).is_file() {
        Constellation::load(Path::new(spec))?
    } else {
        Constellation::by_name(spec)?
    };
    let ev = evaluator(&c, cli.common.quad_order)?;
    let profile = build_profile(&ev, cli.common.grid_bits.unwrap_or(COMPARE_GRID_BITS), DEFAULT_SATURATION_EPS)?;
    let report = concave_envelope(&profile);
    Ok(Input::Finite { profile, report })
}

enum ChannelSpec {
    Fixed(IsiChannel),
    MinDiff(String),
    Sharp(f64),
}

fn parse_channel(s: &str) -> Result<ChannelSpec> {
    let lower = s.to_ascii_lowercase();
    if Path::new(s).is_file() {
        return Ok(ChannelSpec::Fixed(IsiChannel::load(Path::new(s))?));
    }
    if lower == "80211n" || lower == "802.11n" {
        return Ok(ChannelSpec::Fixed(isi::ieee80211n_taps()));
    }
    if lower == "flat" {
        return Ok(ChannelSpec::Fixed(IsiChannel::flat(1.0)?));
    }
    if let Some(name) = lower.strip_prefix("min-diff:") {
        return Ok(ChannelSpec::MinDiff(name.to_string()));
    }
    if let Some(g) = lower.strip_prefix("sharp:") {
        let g: f64 = g.parse().with_context(|| format!("sharpness in '{s}'"))?;
        return Ok(ChannelSpec::Sharp(g));
    }
    bail!("unknown channel '{s}': expected a file, 80211n, flat, min-diff:INPUT or sharp:G")
}

fn file_label(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect()
}

#[derive(Serialize)]
struct InputSummary {
    input: String,
    channel: String,
    rows: usize,
    max_abs_diff_bits: f64,
    min_diff_bits: f64,
    max_relative_excess: f64,
    delta_x_bits: Option<f64>,
    rate_5_6_snr_db: Option<(f64, f64)>,
}

#[allow(clippy::too_many_arguments)]
fn channel_compare(
    cli: &Cli,
    refs: &ReferenceData,
    channel: &str,
    inputs: &[String],
    range: Option<Range>,
    snr_db: Option<f64>,
    steps: usize,
) -> Result<bool> {
    let spec = parse_channel(channel)?;
    let builtin = matches!(channel.to_ascii_lowercase().as_str(), "80211n" | "802.11n");
    let mut names: Vec<String> = inputs.to_vec();
    if let ChannelSpec::MinDiff(n) = &spec {
        if names.is_empty() {
            names.push(n.clone());
        }
    }
    if let ChannelSpec::Sharp(_) = &spec {
        if names.is_empty() {
            names.push(format!("{}-QAM", refs.experiments.sharp_qam_order));
        }
    }
    if names.is_empty() {
        names = ["QPSK", "16-QAM", "64-QAM", "256-QAM", "uniform"].map(String::from).to_vec();
    }
    let n_quad = isi::MIN_QUAD;
    let exp = &refs.experiments;
    let mut checks = Vec::new();
    let mut summaries = Vec::new();
    for name in &names {
        eprintln!("channel-compare: {name}");
        let input = load_input(cli, name)?;
        let curve = input.curve();
        let ch = match &spec {
            ChannelSpec::Fixed(c) => c.clone(),
            ChannelSpec::Sharp(g) => isi::extremal_channel(Extremal::Sharp(*g))?,
            ChannelSpec::MinDiff(n) => {
                let src = load_input(cli, n)?;
                match &src {
                    Input::Finite { report, .. } => isi::extremal_channel(Extremal::MinDiff(report))?,
                    Input::Uniform(_) => bail!("min-diff needs a finite input"),
                }
            }
        };
        // Extremal channels are evaluated at their own scale unless a sweep is requested.
        let native = !matches!(spec, ChannelSpec::Fixed(_)) && range.is_none() && snr_db.is_none();
        let rows: Vec<RateComparison> = if native {
            let mut r = isi::compare(curve, &ch, n_quad)?;
            r.input_snr_db = logsnr::db(ch.input_snr());
            vec![r]
        } else {
            let r = match (range, snr_db) {
                (Some(r), _) => r,
                (None, Some(s)) => Range { lo: s, hi: s },
                (None, None) => Range { lo: -10.0, hi: 60.0 },
            };
            let n = if r.lo == r.hi { 1 } else { steps };
            isi::sweep_compare(curve, &ch, r.lo, r.hi, n, n_quad)?
        };
        let label = curve.label();
        isi::write_sweep_csv(&rows, out_file(cli, &format!("channel_compare_{}.csv", file_label(&label)))?)?;

        let max_abs = rows.iter().map(|r| r.diff_bits.abs()).fold(0.0, f64::max);
        let min_diff = rows.iter().map(|r| r.diff_bits).fold(f64::INFINITY, f64::min);
        let rel = rows
            .iter()
            .filter(|r| r.i_ofdm_bits > 0.0)
            .map(|r| r.diff_bits / r.i_ofdm_bits)
            .fold(0.0, f64::max);
        let mut summary = InputSummary {
            input: label.clone(),
            channel: channel.to_string(),
            rows: rows.len(),
            max_abs_diff_bits: max_abs,
            min_diff_bits: min_diff,
            max_relative_excess: rel,
            delta_x_bits: None,
            rate_5_6_snr_db: None,
        };
        match &input {
            Input::Finite { report, .. } => {
                let dx = report.delta_x_bits();
                summary.delta_x_bits = Some(dx);
                checks.push(Check::new(&label, "min_diff_plus_delta_x_bits", min_diff + dx, -1e-6, 0.0, Rule::AtLeast));
                if let ChannelSpec::MinDiff(_) = &spec {
                    if native {
                        checks.push(Check::new(&label, "min_diff_bits", rows[0].diff_bits, -dx, exp.min_diff_tol_bits, Rule::Absolute));
                    }
                }
                if let ChannelSpec::Sharp(g) = &spec {
                    if native && (*g - exp.sharp_gamma).abs() < 1e-12 {
                        let h = curve.entropy_nats() / LN_2;
                        checks.push(Check::new(
                            &label,
                            "sharp_diff_bits",
                            rows[0].diff_bits,
                            exp.sharp_min_diff_fraction * h,
                            1e-9,
                            Rule::AtLeast,
                        ));
                    }
                }
                if builtin && rows.len() > 1 {
                    let sol = isi::snr_for_rate(curve, &ch, 5.0 / 6.0, n_quad)?;
                    summary.rate_5_6_snr_db = Some(sol);
                }
            }
            Input::Uniform(u) => {
                let hi = u.deltabar(ch.transfer_range().1.max(1e-300) * rows_scale(&rows, &ch)).delta / LN_2;
                let excess = rows.iter().map(|r| -r.diff_bits).fold(f64::NEG_INFINITY, f64::max);
                checks.push(Check::new(&label, "max_ofdm_excess_bits", excess, hi + 1e-4, 0.0, Rule::AtMost));
                checks.push(Check::new(
                    &label,
                    "max_sl_excess_bits",
                    rows.iter().map(|r| r.diff_bits).fold(f64::NEG_INFINITY, f64::max),
                    u.delta_tilde_bits() + 1e-4,
                    0.0,
                    Rule::AtMost,
                ));
                if builtin && rows.len() > 1 {
                    checks.push(Check::new(
                        &label,
                        "max_abs_diff_bits",
                        max_abs,
                        exp.uniform_80211n_max_abs_diff_bits,
                        0.0,
                        Rule::AtMost,
                    ));
                }
            }
        }
        summaries.push(summary);
    }
    if builtin {
        let wanted: Vec<&InputSummary> = summaries
            .iter()
            .filter(|s| exp.rate_5_6_inputs.iter().any(|n| n == &s.input))
            .collect();
        if wanted.len() == exp.rate_5_6_inputs.len() && wanted.iter().all(|s| s.rate_5_6_snr_db.is_some()) {
            let gap = wanted
                .iter()
                .filter_map(|s| s.rate_5_6_snr_db)
                .map(|(sl, ofdm)| ofdm - sl)
                .fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::new("80211n", "rate_5_6_max_gap_db", gap, exp.rate_5_6_gap_db_floor, 0.0, Rule::AtLeast));
            let rel = wanted.iter().map(|s| s.max_relative_excess).fold(0.0, f64::max);
            checks.push(Check::new("80211n", "max_relative_excess", rel, exp.relative_excess_floor, 0.0, Rule::AtLeast));
        }
    }
    let ok = report_checks(&checks);
    reference::write_checks_csv(&checks, out_file(cli, "channel_compare_checks.csv")?)?;
    write_meta(
        cli,
        "channel_compare",
        Some(refs),
        &serde_json::json!({ "inputs": summaries, "checks": checks }),
    )?;
    Ok(ok)
}

/// Largest scale applied to `|H|^2` across the sweep rows.
fn rows_scale(rows: &[RateComparison], ch: &IsiChannel) -> f64 {
    let base = ch.input_snr();
    rows.iter().map(|r| logsnr::from_db(r.input_snr_db) / base).fold(0.0, f64::max)
}

#[derive(Serialize)]
struct CheckSummary {
    check: &'static str,
    rows: usize,
    violations: usize,
}

fn verify_bounds(cli: &Cli, rho_min: f64, rho_max: f64, spacing: f64, trials: usize) -> Result<bool> {
    let cfg = SweepConfig {
        rho_min,
        rho_max,
        removal_trials: trials,
        seed: cli.common.seed,
        ..SweepConfig::default()
    };
    let mut rows: Vec<SweepRow> = bounds::sweep_pointwise(&cfg, spacing)?;
    rows.extend(bounds::sweep_mmse(&cfg, spacing)?);
    rows.extend(bounds::sweep_bpsk(1e-3, 40.0, 200));
    rows.extend(bounds::sweep_removal(cfg.removal_trials, cfg.seed)?);
    bounds::write_sweep_csv(&rows, out_file(cli, "verify_bounds.csv")?)?;
    let mut summary: Vec<CheckSummary> = Vec::new();
    for r in &rows {
        match summary.iter_mut().find(|s| s.check == r.check) {
            Some(s) => {
                s.rows += 1;
                s.violations += usize::from(!r.pass);
            }
            None => summary.push(CheckSummary {
                check: r.check,
                rows: 1,
                violations: usize::from(!r.pass),
            }),
        }
    }
    for r in rows.iter().filter(|r| !r.pass).take(50) {
        eprintln!(
            "violation {} M={} d={} gamma={} y={} lower={} value={} upper={}",
            r.check,
            r.m,
            fmt_sig(r.d),
            fmt_sig(r.gamma),
            r.y.map(fmt_sig).unwrap_or_default(),
            fmt_sig(r.lower),
            fmt_sig(r.value),
            fmt_sig(r.upper)
        );
    }
    for s in &summary {
        println!(
            "{} {}: {} rows, {} violations",
            if s.violations == 0 { "PASS" } else { "FAIL" },
            s.check,
            s.rows,
            s.violations
        );
    }
    let ok = summary.iter().all(|s| s.violations == 0);
    write_meta(cli, "verify_bounds", None, &summary)?;
    Ok(ok)
}
