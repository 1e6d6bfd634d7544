use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn isirl(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isirl"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("ISIRL_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn meta(dir: &Path, stem: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.meta.json"))).unwrap()).unwrap()
}

#[test]
fn verify_bounds_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = isirl(dir.path(), &["verify-bounds"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let csv = fs::read_to_string(dir.path().join("verify_bounds.csv")).unwrap();
    assert!(csv.starts_with("check,M,d,gamma,rho,y,lower,value,upper,pass\n"));
    let m = meta(dir.path(), "verify_bounds");
    assert_eq!(m["tool"], "isirl");
    assert_eq!(m["config"]["command"]["name"], "verify-bounds");
    assert_eq!(m["config"]["common"]["seed"], 1);
}

#[test]
fn verify_bounds_wider_range_and_bad_spacing() {
    let dir = tempfile::tempdir().unwrap();
    let o = isirl(dir.path(), &["verify-bounds", "--rho-min", "0.1", "--trials", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = isirl(dir.path(), &["verify-bounds", "--spacing", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spacing"));
    let o = isirl(dir.path(), &["verify-bounds", "--rho-min", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn deltabar_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = isirl(dir.path(), &["deltabar-curve", "--snr-range", "5:60", "--steps", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("deltabar_curve.csv")).unwrap();
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[0], (5.0, 0.0));
    assert!(rows.windows(2).all(|w| w[1].1 >= w[0].1));
    let at30 = rows.iter().find(|r| r.0 == 30.0).unwrap().1;
    assert!((at30 - 0.0841).abs() < 0.002);
}

#[test]
fn channel_compare_flat_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["channel-compare", "--channel", "flat", "--constellation", "QPSK", "--snr-range", "0:20", "--steps", "5"];
    let o = isirl(a.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(isirl(b.path(), &args).status.code(), Some(0));
    let name = "channel_compare_qpsk.csv";
    let csv = fs::read_to_string(a.path().join(name)).unwrap();
    assert_eq!(csv, fs::read_to_string(b.path().join(name)).unwrap());
    assert!(csv.starts_with("input_snr_db,snr_dfe_db,i_sl_bits,i_ofdm_bits,diff_bits\n"));
    assert_eq!(csv.lines().count(), 6);
    for l in csv.lines().skip(1) {
        let diff: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!(diff.abs() < 1e-9, "{l}");
    }
    assert!(a.path().join("channel_compare_checks.csv").exists());
    assert_eq!(meta(a.path(), "channel_compare")["config"]["command"]["steps"], 5);
}

#[test]
fn channel_compare_extremal_channels() {
    let dir = tempfile::tempdir().unwrap();
    let o = isirl(dir.path(), &["channel-compare", "--channel", "sharp:10", "--constellation", "16-QAM"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
    let o = isirl(dir.path(), &["channel-compare", "--channel", "min-diff:256-QAM", "--constellation", "256-QAM"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let checks = fs::read_to_string(dir.path().join("channel_compare_checks.csv")).unwrap();
    assert!(checks.lines().skip(1).all(|l| l.ends_with(",true")), "{checks}");
}

#[test]
fn channel_compare_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = isirl(dir.path(), &["channel-compare", "--channel", "nowhere.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = isirl(dir.path(), &["channel-compare", "--channel", "flat", "--constellation", "7-QAM"]);
    assert_eq!(o.status.code(), Some(2));
    let o = isirl(dir.path(), &["channel-compare", "--snr-range", "10:0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn channel_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ch = dir.path().join("ch.json");
    fs::write(&ch, r#"{"taps": [[0.8, 0.0], [0.0, 0.6]]}"#).unwrap();
    let o = isirl(
        dir.path(),
        &["channel-compare", "--channel", ch.to_str().unwrap(), "--constellation", "BPSK", "--snr-db", "10"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("channel_compare_bpsk.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("10,"));
}

#[test]
fn table_with_heavy_rows_skipped() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "table1", "--skip", "64-", "--skip", "256", "--skip", "1024", "--skip", "4096", "--skip", "inf", "--skip", "32",
        "--skip", "8-PSK",
    ];
    let o = isirl(a.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(isirl(b.path(), &args).status.code(), Some(0));
    let t = fs::read_to_string(a.path().join("table1.csv")).unwrap();
    assert_eq!(t, fs::read_to_string(b.path().join("table1.csv")).unwrap());
    let names: Vec<&str> = t.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["BPSK", "4-PAM", "QPSK", "16-QAM"]);
    let diff = fs::read_to_string(a.path().join("table1_diff.csv")).unwrap();
    assert!(diff.lines().skip(1).all(|l| l.ends_with(",true")));
    assert_eq!(meta(a.path(), "table1")["reference_version"], 1);
}

#[test]
fn custom_reference_file_drives_the_diff() {
    let dir = tempfile::tempdir().unwrap();
    let shipped = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/reference_values.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&shipped).unwrap();
    let rows = v["table"].as_array_mut().unwrap();
    rows.retain(|r| r["input"] == "BPSK");
    rows[0]["concave_everywhere"] = serde_json::Value::Bool(false);
    let path = dir.path().join("refs.json");
    fs::write(&path, v.to_string()).unwrap();
    let o = isirl(dir.path(), &["table1", "--reference", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL BPSK"));
}
