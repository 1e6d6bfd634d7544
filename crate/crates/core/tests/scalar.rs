use isirl::bounds;
use isirl::scalar::{self, mc_oracle_mmse, pointwise, tabulate};
use isirl::{Constellation, Evaluator, GaussianInput, Method, ScalarInput};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::LN_2;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

// 30-digit adaptive quadrature, tests/oracles/pam_reference.py:
// (M, gamma, mmse, E[phi^2], I in nats)
const PAM_REFERENCE: [(usize, f64, f64, f64, f64); 12] = [
    (2, 0.1, 0.8309059855305609, 0.72298608022199033, 0.091090686963109627),
    (2, 1.0, 0.23101822192929562, 0.14724292125895539, 0.50007213606684494),
    (2, 10.0, 1.2036620875489877e-5, 6.2889225775395164e-6, 0.69313562457678538),
    (2, 30.0, 1.4844316420045645e-14, 7.5411475010455238e-15, 0.69314718055993069),
    (4, 0.1, 0.83225852275143367, 0.70673699030741011, 0.091129331609544134),
    (4, 1.0, 0.30843459414240156, 0.11370364779296842, 0.53480674016604539),
    (4, 10.0, 0.020579308033598348, 0.0024100544859325367, 1.2956538271446383),
    (4, 30.0, 0.00024655008294146367, 2.6398931079459059e-5, 1.3851346969545404),
    (8, 0.1, 0.8324487201280769, 0.70451734211531499, 0.091134842348518267),
    (8, 1.0, 0.31422467029253726, 0.11254878761385491, 0.53793581824668616),
    (8, 10.0, 0.042999827630734907, 0.002067639273495584, 1.4249909153950821),
    (8, 30.0, 0.011300773508134627, 0.00032796968012853753, 1.8755879039424753),
];

#[test]
fn pam_matches_high_precision_reference() {
    for (m, g, mm, phi2, info) in PAM_REFERENCE {
        let c = Constellation::standard(isirl::Family::Pam, m).unwrap();
        let p = Evaluator::new(&c).point(g);
        assert!(rel(p.mmse, mm) < 1e-12, "M={m} g={g}: mmse {} vs {mm}", p.mmse);
        assert!(rel(p.dmmse, -2.0 * phi2) < 1e-10, "M={m} g={g}: dmmse {}", p.dmmse);
        assert!((p.info - info).abs() < 1e-13, "M={m} g={g}: info {} vs {info}", p.info);
    }
}

#[test]
fn bpsk_derivative_matches_reference_deep_in_the_tail() {
    let refs = [
        (1.0, -0.294485842517910781656944407332),
        (10.0, -1.25778451550790328654060405286e-5),
        (60.0, -9.99900788397447230344811477547e-28),
        (100.0, -3.2929876782803625765756234172e-45),
    ];
    let ev = Evaluator::new(&Constellation::by_name("BPSK").unwrap());
    for (g, want) in refs {
        let got = ev.point(g).dmmse;
        assert!(rel(got, want) < 1e-10, "g={g}: {got:e} vs {want:e}");
    }
}

#[test]
fn zero_snr_limits() {
    for name in ["BPSK", "QPSK", "8-PSK", "16-QAM", "32-QAM"] {
        let c = Constellation::by_name(name).unwrap();
        assert!((scalar::mmse(&c, 0.0, 12).unwrap() - 1.0).abs() < 1e-12, "{name}");
        assert!(scalar::mutual_info(&c, 0.0, 12).unwrap().abs() < 1e-12, "{name}");
    }
    assert!(scalar::mmse_derivative(&Constellation::by_name("BPSK").unwrap(), 0.0, 12).is_err());
    // right-hand limit of the derivative
    let b = Evaluator::new(&Constellation::by_name("BPSK").unwrap()).point(0.0);
    assert!((b.dmmse + 2.0).abs() < 1e-12);
}

#[test]
fn reference_curves() {
    assert!((GaussianInput.info(1.0) - LN_2).abs() < 1e-15);
    let b = Evaluator::new(&Constellation::by_name("BPSK").unwrap());
    assert!((b.point(200.0).info - LN_2).abs() < 1e-15);
    for name in ["BPSK", "QPSK", "16-QAM", "8-PSK"] {
        let ev = Evaluator::new(&Constellation::by_name(name).unwrap());
        for g in [0.1, 1.0, 10.0] {
            assert!(ev.point(g).info < GaussianInput.info(g), "{name} {g}");
        }
    }
}

#[test]
fn qpsk_is_bpsk_at_half_snr() {
    let q = Evaluator::new(&Constellation::by_name("QPSK").unwrap());
    let b = Evaluator::new(&Constellation::by_name("BPSK").unwrap());
    for i in 0..40 {
        let g = 1e-2 * 10f64.powf(i as f64 / 8.0);
        let (pq, pb) = (q.point(g), b.point(0.5 * g));
        assert!(rel(pq.mmse, pb.mmse) < 1e-12, "g={g}");
        assert!(rel(pq.dmmse, 0.5 * pb.dmmse) < 1e-11, "g={g}");
        assert!((pq.info - 2.0 * b.point(0.5 * g).info).abs() < 1e-12, "g={g}");
    }
}

#[test]
fn layouts_agree() {
    for name in ["QPSK", "16-QAM"] {
        let c = Constellation::by_name(name).unwrap();
        let s = Evaluator::with(&c, Method::Separable, 12).unwrap();
        let p = Evaluator::with(&c, Method::Planar, 12).unwrap();
        for g in [0.01, 0.3, 1.0, 4.0, 20.0, 100.0, 500.0, 2000.0] {
            let (a, b) = (s.point(g), p.point(g));
            assert!((a.mmse - b.mmse).abs() < 1e-9, "{name} {g}");
            assert!((a.dmmse - b.dmmse).abs() < 1e-9, "{name} {g}");
            assert!((a.info - b.info).abs() < 1e-9, "{name} {g}");
        }
    }
    assert!(Evaluator::with(&Constellation::by_name("8-PSK").unwrap(), Method::Separable, 12).is_err());
    assert!(Evaluator::with(&Constellation::by_name("QPSK").unwrap(), Method::Separable, 4).is_err());
}

fn fd_info(ev: &Evaluator, g: f64) -> f64 {
    let h = 1e-3 * g;
    let d = |h: f64| (ev.point(g + h).info - ev.point(g - h).info) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

#[test]
fn information_derivative_is_mmse() {
    for name in ["BPSK", "4-PAM", "QPSK", "8-PSK", "16-QAM", "64-QAM", "256-QAM"] {
        let ev = Evaluator::new(&Constellation::by_name(name).unwrap());
        for g in [0.01, 0.1, 1.0, 5.0, 30.0, 200.0, 1000.0] {
            let m = ev.point(g).mmse;
            let fd = fd_info(&ev, g);
            assert!((fd - m).abs() <= 1e-5 * m + 1e-8, "{name} g={g}: {fd:e} vs {m:e}");
        }
    }
}

#[test]
fn derivative_identity_matches_finite_difference() {
    for name in ["BPSK", "4-PAM", "QPSK", "16-QAM", "64-QAM", "8-PSK", "32-QAM"] {
        let ev = Evaluator::new(&Constellation::by_name(name).unwrap());
        for g in [0.1, 0.5, 2.0, 8.0, 30.0] {
            let (id, fd) = ev.derivative_diagnostics(g).unwrap();
            assert!(rel(fd, id) < 1e-5, "{name} g={g}: {id:e} vs {fd:e}");
        }
    }
}

#[test]
fn below_gaussian_mmse() {
    for name in ["BPSK", "QPSK", "8-PSK", "16-QAM", "32-QAM", "256-QAM"] {
        let ev = Evaluator::new(&Constellation::by_name(name).unwrap());
        for i in 0..30 {
            let g = 0.1 * 10f64.powf(i as f64 / 10.0);
            assert!(ev.point(g).mmse < 1.0 / (1.0 + g), "{name} {g}");
        }
    }
}

#[test]
fn four_pam_derivative_inside_bracket() {
    let c = Constellation::by_name("4-PAM").unwrap();
    let d = c.min_distance();
    let g = 2.0 / (0.25 * d * d);
    let v = Evaluator::new(&c).point(g).dmmse;
    let b = bounds::pam_dmmse_bracket(4, d, g).unwrap();
    assert!(b.lower <= v && v <= b.upper, "{b:?} {v}");
}

#[test]
fn pointwise_examples() {
    let b = Constellation::by_name("BPSK").unwrap();
    for (y, g) in [(0.0, 1.0), (0.3, 2.0), (-1.1, 0.5), (2.0, 4.0)] {
        let p = pointwise(&b, Complex64::new(y, 0.0), g);
        let t = (2.0 * g * y).tanh();
        assert!((p.phi - (1.0 - t * t)).abs() < 1e-14, "{y} {g}");
    }
    let q = Constellation::by_name("16-QAM").unwrap();
    let dh = 0.5 * q.min_distance();
    let g = 100.0 / (dh * dh);
    let p = pointwise(&q, q.points()[5], g);
    assert!(p.phi < 0.03 * dh * dh, "{}", p.phi);
    let pam = Constellation::by_name("8-PAM").unwrap();
    let dh = 0.5 * pam.min_distance();
    let mid = 0.5 * (pam.points()[3] + pam.points()[4]);
    for g in [0.1, 1.0, 10.0, 100.0] {
        assert!(pointwise(&pam, mid, g).phi >= dh * dh * (1.0 - 1e-12), "{g}");
    }
}

#[test]
fn monte_carlo_oracle() {
    let b = Constellation::by_name("BPSK").unwrap();
    assert_eq!(mc_oracle_mmse(&b, 0.0, 100_000, 3).unwrap().0, 1.0);
    let q = Constellation::by_name("QPSK").unwrap();
    let (est, se) = mc_oracle_mmse(&q, 4.0, 1_000_000, 7).unwrap();
    let exact = scalar::mmse(&q, 4.0, 12).unwrap();
    assert!((est - exact).abs() <= 4.0 * se, "{est} {se} {exact}");
    assert_eq!((est, se), mc_oracle_mmse(&q, 4.0, 1_000_000, 7).unwrap());
    assert!(mc_oracle_mmse(&q, 4.0, 100, 7).is_err());
}

#[test]
fn sixteen_qam_against_ten_million_samples() {
    let c = Constellation::by_name("16-QAM").unwrap();
    let (est, se) = mc_oracle_mmse(&c, 10.0, 10_000_000, 11).unwrap();
    let exact = scalar::mmse(&c, 10.0, 12).unwrap();
    assert!((est - exact).abs() <= 3.0 * se, "{est} ± {se} vs {exact}");
}

#[test]
fn tabulation() {
    let b = Evaluator::new(&Constellation::by_name("BPSK").unwrap());
    let t = tabulate(&b, -20.0, 20.0, 200).unwrap();
    assert_eq!(t.info_nats.len(), 200);
    assert!(t.info_nats.windows(2).all(|w| w[1] >= w[0]));
    let q = Evaluator::new(&Constellation::by_name("64-QAM").unwrap());
    let t = tabulate(&q, 0.0, 40.0, 5).unwrap();
    assert!((t.info_nats[4] / LN_2 - 6.0).abs() < 1e-3);
    let one = tabulate(&q, 10.0, 10.0, 1).unwrap();
    assert_eq!(one.gamma.len(), 1);
    assert!(tabulate(&q, 10.0, 0.0, 3).is_err());
    let mut buf = Vec::new();
    t.write_csv(&mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert!(s.starts_with("gamma_db,info_bits,mmse,dmmse\n"));
    assert_eq!(s.lines().count(), 6);
}

fn shipped() -> Vec<Evaluator> {
    ["BPSK", "4-PAM", "QPSK", "8-PSK", "16-QAM", "32-QAM", "64-QAM"]
        .iter()
        .map(|n| Evaluator::new(&Constellation::by_name(n).unwrap()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scalar_invariants(i in 0usize..7, lg in -3.0..3.0f64, step in 1.01..4.0f64) {
        let ev = &shipped()[i];
        let g = 10f64.powf(lg);
        let p = ev.point(g);
        let h = ev.entropy_nats();
        prop_assert!(p.mmse >= 0.0 && p.mmse <= 1.0 / (1.0 + g) + 1e-9);
        prop_assert!(p.dmmse <= 0.0);
        prop_assert!(p.info >= 0.0 && p.info <= h + 1e-9);
        prop_assert!(ev.point(g * step).info >= p.info);
        prop_assert!(ev.point(g * step).mmse <= p.mmse);
    }
}
