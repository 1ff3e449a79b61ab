use std::fs;

use sv_density::cli::{run, EXIT_NUMERIC, EXIT_OK, EXIT_THRESHOLD, EXIT_USAGE};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sv-density").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Data rows of a CSV, skipping comments and the header line.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn density_two_by_two() {
    let (code, out, _) = call(&["density", "--g", "1,4", "--grid", "0.5:5:10"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("\ns,psi\n"));
    assert!(out.contains("# atom_at_origin: 0.0000000000000000e0"));
    let r = rows(&out);
    assert_eq!(r.len(), 10);
    let at2 = r.iter().find(|row| row[0] == 2.0).unwrap();
    assert!((at2[1] - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(r[0][1], 0.0);
}

#[test]
fn density_below_support_is_zero() {
    let (code, out, _) = call(&["density", "--g", "1,4,9,16,25", "--grid", "0.01:0.9:7"]);
    assert_eq!(code, EXIT_OK);
    assert!(rows(&out).iter().all(|r| r[1] == 0.0));
}

#[test]
fn one_sided_boundary_values() {
    let (_, lo, _) = call(&["density", "--g", "1,4", "--grid", "1:4:2", "--side", "lo"]);
    let (_, hi, _) = call(&["density", "--g", "1,4", "--grid", "1:4:2", "--side", "hi"]);
    let (lo, hi) = (rows(&lo), rows(&hi));
    assert_eq!(lo[0][1], 0.0);
    assert!((hi[0][1] - 5.0 / 6.0).abs() < 1e-14);
    assert!((lo[1][1] - 5.0 / 24.0).abs() < 1e-14);
    assert_eq!(hi[1][1], 0.0);
}

#[test]
fn radial_curve_and_mass() {
    let (code, out, _) = call(&["radial", "--g", "1,4", "--grid", "0.5:2.5:20001"]);
    assert_eq!(code, EXIT_OK);
    let r = rows(&out);
    let at = |x: f64| r.iter().find(|row| (row[0] - x).abs() < 1e-12).unwrap()[1];
    assert_eq!(at(0.5), 0.0);
    let trapezoid: f64 = r.windows(2).map(|w| 0.5 * (w[1][0] - w[0][0]) * (w[1][1] + w[0][1])).sum();
    assert!((trapezoid - 1.0).abs() < 1e-4, "{trapezoid}");

    let (_, out, _) = call(&["radial", "--g", "1,4", "--grid", "1.4142135623730951:2:2"]);
    let v = rows(&out)[0][1];
    assert!((v - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-12);
}

#[test]
fn spectrum_file_source() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    fs::write(&path, "# two values\n1\n0 4  # complex entry, modulus taken\n").unwrap();
    let (code, out, _) = call(&["density", "--spectrum-file", path.to_str().unwrap(), "--grid", "2:3:2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("# spectrum: 1,4"));
    assert!((rows(&out)[0][1] - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn usage_errors() {
    assert_eq!(call(&["density", "--grid", "1:2:3"]).0, EXIT_USAGE);
    assert_eq!(call(&["density", "--g", "1,4", "--grid", "1:2:1"]).0, EXIT_USAGE);
    assert_eq!(call(&["density", "--g", "1,-4", "--grid", "1:2:3"]).0, EXIT_USAGE);
    assert_eq!(call(&["density", "--g", "1,4", "--spectrum-file", "x", "--grid", "1:2:3"]).0, EXIT_USAGE);
    assert_eq!(call(&["mc", "--g", "1,4", "--samples", "0"]).0, EXIT_USAGE);
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
    assert_eq!(call(&["density", "--spectrum-file", "/nonexistent/spectrum", "--grid", "1:2:3"]).0, EXIT_USAGE);
    // numeric failures map to their own code
    assert_ne!(EXIT_NUMERIC, EXIT_USAGE);
}

#[test]
fn mc_is_reproducible_and_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let (code, _, _) =
            call(&["mc", "--g", "1,4,9", "--samples", "100", "--seed", "7", "--tv-threshold", "1", "--out", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
    }
    for suffix in ["", ".report", ".density"] {
        let fa = fs::read(dir.path().join(format!("a{suffix}.csv"))).unwrap();
        let fb = fs::read(dir.path().join(format!("b{suffix}.csv"))).unwrap();
        assert_eq!(fa, fb, "suffix {suffix:?}");
    }
    let hist = fs::read_to_string(&a).unwrap();
    assert!(hist.contains("\nbin_lo,bin_hi,count,expected,zscore\n"));
    let report = fs::read_to_string(dir.path().join("a.report.csv")).unwrap();
    assert!(report.starts_with("chi_square,dof,tv_distance,max_abs_z,discarded\n"));
}

#[test]
fn mc_flat_spectrum_fills_one_bin() {
    let (code, out, _) = call(&["mc", "--g", "1,1,1", "--samples", "50", "--workers", "2"]);
    assert_eq!(code, EXIT_OK);
    let hist: String = out.split("\n\n").next().unwrap().to_string();
    let occupied: Vec<Vec<f64>> = rows(&hist).into_iter().filter(|r| r[2] > 0.0).collect();
    assert_eq!(occupied.len(), 1);
    assert_eq!(occupied[0][2], 150.0);
    assert!(occupied[0][0] <= 1.0 && 1.0 < occupied[0][1]);
}

#[test]
fn mc_threshold_exit_code() {
    let (code, _, err) = call(&["mc", "--g", "1,4,9", "--samples", "20", "--tv-threshold", "0"]);
    assert_eq!(code, EXIT_THRESHOLD);
    assert!(err.contains("exceeds threshold"));
}

#[test]
fn check_battery() {
    for g in ["1,4", "2,2,5", "0,1", "1,4,9,16,25", "3,3,3"] {
        let (code, out, _) = call(&["check", "--g", g]);
        assert_eq!(code, EXIT_OK, "{g}: {out}");
        assert!(!out.contains("FAIL"));
    }
    let (_, out, _) = call(&["check", "--g", "0,1"]);
    assert!(out.contains("# atom_at_origin: 5.0000000000000000e-1"));
    assert!(out.contains("# continuous_mass: 4.99999999999999"));
}

#[test]
fn special_cases() {
    let (code, out, _) = call(&["special", "rank-one", "--g1", "1", "--g", "4", "--n", "2", "--grid", "1:4:31"]);
    assert_eq!(code, EXIT_OK);
    let dev: f64 = out.lines().last().unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(dev < 1e-10);

    let (_, out, _) = call(&["special", "truncated", "--m", "1", "--n", "2", "--grid", "0.05:0.95:19"]);
    for r in rows(&out) {
        assert!((r[1] - 1.0).abs() < 1e-12 && (r[2] - 1.0).abs() < 1e-9, "{r:?}");
    }
    let (_, out, _) = call(&["special", "truncated", "--m", "1", "--n", "3", "--grid", "0.05:0.95:19"]);
    for r in rows(&out) {
        assert!((r[1] - (1.0 + 2.0 * r[0]) / 2.0).abs() < 1e-12, "{r:?}");
    }
    assert_eq!(call(&["special", "truncated", "--m", "3", "--n", "3", "--grid", "0:1:3"]).0, EXIT_USAGE);
}
