use std::f64::consts::{FRAC_2_PI, PI};

use gcs_core::ensembles::{atomic_purity, werner_weights, Ensemble, WernerSpec};
use gcs_core::metrology::{qfi_direction, qfi_max};
use gcs_core::wigner::{wigner_field, PhaseGrid};
use gcs_core::{make_gcs, wigner_point_pure, Complex64, FockState, GcsParams};
use proptest::prelude::*;

const NBAR: f64 = 10.0;
const CUTOFF: usize = 45;

fn gcs(eps: f64, tau: f64) -> FockState {
    make_gcs(&GcsParams::from_nbar(NBAR, eps, tau).unwrap(), CUTOFF).unwrap()
}

fn coherent() -> FockState {
    FockState::coherent(Complex64::new(NBAR.sqrt(), 0.0), CUTOFF).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn photon_statistics_are_poissonian(eps in 0.0..3.0f64, tau in 0.0..(2.0 * PI)) {
        let s = gcs(eps, tau);
        let c = coherent();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-13);
        for m in 1..=4 {
            let (a, b) = (s.photon_moment(m).unwrap(), c.photon_moment(m).unwrap());
            prop_assert!((a - b).abs() <= 1e-9 * b);
        }
        prop_assert!(s.mandel_q().unwrap().abs() < 1e-9);
        for k in 1..=4 {
            prop_assert!((s.g_k(k).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrature_variance_is_bounded(eps in 0.0..3.0f64, tau in 0.0..(2.0 * PI), phi in 0.0..PI) {
        let s = gcs(eps, tau);
        let v = s.quadrature_variance(phi);
        prop_assert!(v >= 0.0);
        prop_assert!(v <= 4.0 * NBAR + 1.0 + 1e-6, "{v}");
        // single quadratures can be squeezed below 1, orthogonal pairs never sum below 2
        let pair = v + s.quadrature_variance(phi + PI / 2.0);
        prop_assert!(pair >= 2.0 - 1e-9, "{pair}");
        let report = qfi_max(&s);
        prop_assert!(report.qfi >= qfi_direction(&s, phi) - 1e-9);
        prop_assert!((0.0..PI).contains(&report.best_angle));
    }

    #[test]
    fn wigner_is_bounded(eps in 0.0..3.0f64, tau in 0.0..(2.0 * PI), r in 0.0..7.0f64, th in 0.0..(2.0 * PI)) {
        let w = wigner_point_pure(&gcs(eps, tau), Complex64::from_polar(r, th)).unwrap();
        prop_assert!(w.abs() <= FRAC_2_PI + 1e-9);
    }

    /// A phase `e^{-i phi n}` on the amplitudes rotates the Wigner function by `-phi`.
    #[test]
    fn rotation_covariance(eps in 0.0..3.0f64, tau in 0.0..3.0f64, phi in 0.0..(2.0 * PI), r in 0.0..5.0f64, th in 0.0..(2.0 * PI)) {
        let s = make_gcs(&GcsParams::from_nbar(4.0, eps, tau).unwrap(), 30).unwrap();
        let rotated: Vec<Complex64> = s
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(1.0, -phi * n as f64))
            .collect();
        let rotated = FockState::from_amplitudes(rotated).unwrap();
        let beta = Complex64::from_polar(r, th);
        let a = wigner_point_pure(&rotated, beta * Complex64::from_polar(1.0, -phi)).unwrap();
        let b = wigner_point_pure(&s, beta).unwrap();
        prop_assert!((a - b).abs() < 1e-11);
    }

    /// Complex conjugation of the state mirrors the Wigner function, so the
    /// Werner members at `tau` and `-tau` are mirror images.
    #[test]
    fn reversed_evolution_mirrors(eps in 0.0..3.0f64, tau in 0.0..3.0f64, x in -4.0..4.0f64, y in -4.0..4.0f64) {
        let a = make_gcs(&GcsParams::from_nbar(4.0, eps, tau).unwrap(), 30).unwrap();
        let b = make_gcs(&GcsParams::from_nbar(4.0, eps, -tau).unwrap(), 30).unwrap();
        let wa = wigner_point_pure(&a, Complex64::new(x, y)).unwrap();
        let wb = wigner_point_pure(&b, Complex64::new(x, -y)).unwrap();
        prop_assert!((wa - wb).abs() < 1e-11);
    }

    #[test]
    fn werner_weights_form_a_simplex(p in 0.0..=1.0f64, a in 0.0..1.0f64, phase in 0.0..(2.0 * PI), tau in -3.0..3.0f64) {
        let c = vec![Complex64::new(a.sqrt(), 0.0), Complex64::from_polar((1.0 - a).sqrt(), phase)];
        let spec = WernerSpec::new(p, c, vec![tau, -tau]).unwrap();
        let w = werner_weights(&spec).unwrap();
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let purity = atomic_purity(&spec).unwrap();
        prop_assert!((purity - (p * p + p * (1.0 - p) + (1.0 - p).powi(2) / 2.0)).abs() < 1e-15);
        let uniform = WernerSpec::new(p, vec![Complex64::new(0.5, 0.0); 4], vec![tau, -tau, 0.0, 1.0]).unwrap();
        prop_assert_eq!(werner_weights(&uniform).unwrap(), vec![0.25; 4]);
    }
}

#[test]
fn short_kerr_evolution_squeezes() {
    // a known counterexample to sub-unit variance being impossible
    let s = gcs(2.0, 0.02);
    let min = (0..720)
        .map(|i| s.quadrature_variance(PI * i as f64 / 720.0))
        .fold(f64::INFINITY, f64::min);
    assert!(min < 0.5, "{min}");
}

#[test]
fn mixture_fields_are_linear() {
    let a = make_gcs(&GcsParams::from_nbar(4.0, 2.0, 0.4).unwrap(), 30).unwrap();
    let b = make_gcs(&GcsParams::from_nbar(4.0, 2.0, -0.4).unwrap(), 30).unwrap();
    let e = Ensemble::new(vec![(0.3, a.clone()), (0.7, b.clone())]).unwrap();
    let grid = PhaseGrid::square(5.0, 41).unwrap();
    let (fa, fb, fe) = (
        wigner_field(&a, &grid).unwrap(),
        wigner_field(&b, &grid).unwrap(),
        wigner_field(&e, &grid).unwrap(),
    );
    for i in 0..fe.values.len() {
        assert!((fe.values[i] - (0.3 * fa.values[i] + 0.7 * fb.values[i])).abs() < 1e-15);
    }
}
