use isirl::{Constellation, Family};
use num_complex::Complex64;
use proptest::prelude::*;

fn moments(c: &Constellation) -> (f64, Complex64, f64) {
    let s: f64 = c.probs().iter().sum();
    let m: Complex64 = c.points().iter().zip(c.probs()).map(|(z, p)| z * p).sum();
    let pw: f64 = c.points().iter().zip(c.probs()).map(|(z, p)| z.norm_sqr() * p).sum();
    (s, m, pw)
}

fn standard_list() -> Vec<Constellation> {
    let mut v = vec![
        Constellation::standard(Family::Bpsk, 2).unwrap(),
        Constellation::standard(Family::Qpsk, 4).unwrap(),
        Constellation::cross32(),
    ];
    for m in [2, 4, 8, 16, 32] {
        v.push(Constellation::standard(Family::Psk, m).unwrap());
    }
    for m in [2, 3, 4, 5, 8, 16] {
        v.push(Constellation::standard(Family::Pam, m).unwrap());
    }
    for m in [4, 16, 64, 256, 1024, 4096] {
        v.push(Constellation::standard(Family::SquareQam, m).unwrap());
    }
    v
}

#[test]
fn standard_alphabets_are_normalized() {
    for c in standard_list() {
        let (s, m, pw) = moments(&c);
        assert!((s - 1.0).abs() < 1e-12, "{}", c.name());
        assert!(m.norm() < 1e-12, "{}", c.name());
        assert!((pw - 1.0).abs() < 1e-12, "{}", c.name());
        assert!(c.min_distance() > 0.0);
    }
}

#[test]
fn construction_is_deterministic() {
    for (a, b) in standard_list().into_iter().zip(standard_list()) {
        assert_eq!(a.points(), b.points());
        assert_eq!(a.probs(), b.probs());
    }
}

#[test]
fn square_qam_is_product_of_pam() {
    for side in [2usize, 4, 8, 16, 32, 64] {
        let q = Constellation::standard(Family::SquareQam, side * side).unwrap();
        let pam = Constellation::standard(Family::Pam, side).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut want: Vec<(f64, f64)> = Vec::new();
        for a in pam.points() {
            for b in pam.points() {
                want.push((a.re * s, b.re * s));
            }
        }
        let mut got: Vec<(f64, f64)> = q.points().iter().map(|z| (z.re, z.im)).collect();
        let key = |p: &(f64, f64)| (p.0, p.1);
        want.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        got.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert!((g.0 - w.0).abs() < 1e-14 && (g.1 - w.1).abs() < 1e-14, "{side}");
        }
    }
}

#[test]
fn table_entropies() {
    assert!((Constellation::by_name("BPSK").unwrap().entropy_bits() - 1.0).abs() < 1e-15);
    assert!((Constellation::by_name("256-QAM").unwrap().entropy_bits() - 8.0).abs() < 1e-12);
    let c = Constellation::by_name("1024-QAM").unwrap();
    let d = c.min_distance();
    assert!((10.0 * (d * d / 4.0).log10() + 28.3).abs() < 0.05);
}

#[test]
fn names_parse() {
    for (n, len) in [("bpsk", 2), ("QPSK", 4), ("8psk", 8), ("4-PAM", 4), ("64_QAM", 64), ("32-QAM", 32)] {
        assert_eq!(Constellation::by_name(n).unwrap().len(), len, "{n}");
    }
    assert!(Constellation::by_name("7-QAM").is_err());
    assert!(Constellation::by_name("hexagon").is_err());
}

fn cloud() -> impl Strategy<Value = (Vec<(f64, f64)>, Vec<f64>)> {
    (2usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), n),
            prop::collection::vec(0.05..1.0f64, n),
        )
    })
}

proptest! {
    #[test]
    fn arbitrary_clouds_normalize((pts, probs) in cloud()) {
        let z: Vec<Complex64> = pts.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        if let Ok(c) = Constellation::from_points("cloud", &z, Some(&probs)) {
            let (s, m, pw) = moments(&c);
            prop_assert!((s - 1.0).abs() < 1e-12);
            prop_assert!(m.norm() < 1e-12);
            prop_assert!((pw - 1.0).abs() < 1e-12);
            prop_assert!(c.entropy_bits() <= (c.len() as f64).log2() + 1e-12);
        }
    }

    #[test]
    fn normalization_is_idempotent((pts, probs) in cloud()) {
        let z: Vec<Complex64> = pts.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        if let Ok(c) = Constellation::from_points("cloud", &z, Some(&probs)) {
            let d = Constellation::from_points("again", c.points(), Some(c.probs())).unwrap();
            for (a, b) in c.points().iter().zip(d.points()) {
                prop_assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn scaling_and_shifting_do_not_matter((pts, probs) in cloud(), k in 0.1..10.0f64, sx in -3.0..3.0f64) {
        let z: Vec<Complex64> = pts.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let w: Vec<Complex64> = z.iter().map(|p| p * k + sx).collect();
        if let (Ok(a), Ok(b)) = (
            Constellation::from_points("a", &z, Some(&probs)),
            Constellation::from_points("b", &w, Some(&probs)),
        ) {
            for (p, q) in a.points().iter().zip(b.points()) {
                prop_assert!((p - q).norm() < 1e-11);
            }
        }
    }
}
