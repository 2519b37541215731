use std::f64::consts::{FRAC_PI_4, PI};

use gcs_core::scan::{
    export_wigner_frames, parse_config, parse_config_str, read_csv_rows, scan_max_over_tau, scan_werner, Format,
    Quantity, ScanResult, ScanSpec, TauGrid, WernerBlock,
};
use gcs_core::wigner::{wigner_field, PhaseGrid};
use gcs_core::{make_gcs, Complex64, GcsError, GcsParams};

fn small_spec(epsilons: Vec<f64>) -> ScanSpec {
    let mut spec = ScanSpec::new(4.0, epsilons);
    spec.tau_grid = Some(TauGrid::half_open(PI, 16).unwrap());
    spec.refine_count = 4;
    spec.refine_peaks = 2;
    spec
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn config_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.toml");
    std::fs::write(
        &path,
        "alpha_sq = 10\nepsilons = [0.5, 2]\nquantity = \"qfi\"\np_grid = [0, 0.5, 1]\n\n[werner]\nc = [[1, 0], [0, 0]]\nlambdas = [1, -1]\n",
    )
    .unwrap();
    let spec = parse_config(&path).unwrap();
    assert_eq!(spec.quantity, Quantity::Qfi);
    assert_eq!(spec.p_values(), vec![0.0, 0.5, 1.0]);
    assert_eq!(parse_config_str(&spec.to_toml().unwrap()).unwrap(), spec);

    let missing = parse_config(dir.path().join("absent.toml")).unwrap_err();
    assert!(matches!(missing, GcsError::Io { .. }));
}

#[test]
fn frames_fail_fast_on_unwritable_destination() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    // a grid this large would take minutes if evaluated before the files were opened
    let grid = PhaseGrid::square(20.0, 4001).unwrap();
    let start = std::time::Instant::now();
    let err = export_wigner_frames(50.0, 2.0, &[0.0, 1.0], Some(grid), None, &blocker.join("sub"), Format::Csv)
        .unwrap_err();
    assert!(matches!(err, GcsError::Io { .. }), "{err}");
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn exported_frames_follow_the_evolution() {
    let dir = tempfile::tempdir().unwrap();
    let grid = PhaseGrid::square(6.0, 61).unwrap();
    let paths = export_wigner_frames(4.0, 2.0, &[0.0, FRAC_PI_4], Some(grid), None, dir.path(), Format::Csv).unwrap();
    assert_eq!(paths.len(), 2);

    let read = |i: usize| -> Vec<(f64, f64, f64)> {
        read_csv_rows(&paths[i])
            .unwrap()
            .iter()
            .map(|r| (r["x"].parse().unwrap(), r["y"].parse().unwrap(), r["w"].parse().unwrap()))
            .collect()
    };
    let start = read(0);
    assert_eq!(start.len(), 61 * 61);
    let (x, y, _) = start.iter().copied().fold((0.0, 0.0, f64::MIN), |a, b| if b.2 > a.2 { b } else { a });
    assert!((x - 2.0).abs() < 1e-12 && y.abs() < 1e-12);
    assert!(start.iter().all(|p| p.2 > -1e-8));
    assert!(read(1).iter().any(|p| p.2 < -1e-3));
}

#[test]
fn linear_evolution_rotates_the_frame() {
    let tau = 0.7;
    let grid = PhaseGrid::square(5.0, 201).unwrap();
    let state = make_gcs(&GcsParams::new(2.0, 1.0, tau).unwrap(), 60).unwrap();
    let field = wigner_field(&state, &grid).unwrap();
    assert!(field.min() >= -1e-8);
    let peak = field.argmax();
    let expected = Complex64::from_polar(2.0, -tau);
    assert!((peak - expected).norm() < 2.0 * grid.dx(), "{peak}");
}

#[test]
fn scans_do_not_depend_on_thread_count() {
    let spec = small_spec(vec![0.5, 2.0]);
    let one: ScanResult = in_pool(1, || scan_max_over_tau(&spec).unwrap());
    let three: ScanResult = in_pool(3, || scan_max_over_tau(&spec).unwrap());
    assert_eq!(one.to_string(Format::Csv), three.to_string(Format::Csv));
    assert_eq!(one.to_string(Format::Json), three.to_string(Format::Json));
}

#[test]
fn pure_werner_limit_matches_the_pure_scan() {
    let mut spec = small_spec(vec![2.0]);
    spec.quantity = Quantity::Negativity;
    spec.werner = Some(WernerBlock::default());
    spec.p_grid = Some(vec![0.0, 1.0]);
    let mixed = scan_werner(&spec).unwrap();
    let pure = scan_max_over_tau(&spec).unwrap();

    let pure_max = pure.select("max_negativity").next().unwrap();
    let rows: Vec<_> = mixed.select("max_negativity").collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1].p, Some(1.0));
    assert_eq!(rows[1].value, pure_max.value);
    assert_eq!(rows[1].tau, pure_max.tau);
    assert!(rows[0].value.unwrap() > 0.0 && rows[0].value < rows[1].value);

    let purity: Vec<f64> = mixed.select("purity").map(|r| r.value.unwrap()).collect();
    assert_eq!(purity, vec![0.5, 1.0]);
}
