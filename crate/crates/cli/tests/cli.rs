use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn gqfi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gqfi"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("spawn gqfi")
}

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    let prefix = format!("{key}=");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn qfi_report_for_thermal_config() {
    let o = gqfi(&["qfi", "configs/thermal.toml"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!((field(&text, "qfi") - 1.0 / 3.0).abs() < 1e-11);
    assert!((field(&text, "wigner") - 0.25).abs() < 1e-11);
    assert!(text.contains("method=general"));
}

#[test]
fn sweep_rows_and_empty_grid() {
    let o = gqfi(&["sweep", "configs/phase.toml", "--from", "0", "--to", "1", "--steps", "3"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("theta,qfi,"));
    for row in &lines[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        let qfi: f64 = cols[1].parse().unwrap();
        let hom: f64 = cols[5].parse().unwrap();
        assert!((qfi - 2.0 * 2f64.sinh().powi(2)).abs() < 1e-8);
        assert!((hom - qfi).abs() < 1e-8);
        assert_eq!(cols[7], "isothermal");
    }

    let o = gqfi(&["sweep", "configs/phase.toml", "--from", "0", "--to", "1", "--steps", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn sweep_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("run{i}.csv"))).collect();
    for (p, jobs) in paths.iter().zip(["1", "2"]) {
        let o = gqfi(&[
            "sweep",
            "configs/two_mode.toml",
            "--from",
            "-1",
            "--to",
            "1",
            "--steps",
            "9",
            "--jobs",
            jobs,
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{o:?}");
    }
    let a = fs::read(&paths[0]).unwrap();
    assert_eq!(a, fs::read(&paths[1]).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 10);
}

#[test]
fn sld_for_linear_model() {
    let o = gqfi(&["sld", "configs/shift.toml"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("b=2,0"));
    assert!(text.contains("photon_counting=absent"));
}

#[test]
fn homodyne_random_measurements_respect_bound() {
    let o = gqfi(&["homodyne", "configs/phase.toml", "--random-U", "20", "--seed", "3"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("bound_holds=true"));
    assert!(field(&text, "random_u_max") <= field(&text, "homodyne_opt") + 1e-9);
    assert!((field(&text, "homodyne_opt_over_qfi") - 1.0).abs() < 1e-10);
}

#[test]
fn oracle_check_for_displacement() {
    let o = gqfi(&["oracle-check", "configs/shift.toml"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!((field(&text, "oracle_qfi") - 2.0).abs() < 1e-6);
    assert!(field(&text, "sld_residual") < 1e-6);
}

#[test]
fn explicit_json_point() {
    let o = gqfi(&["qfi", "configs/explicit.json"]);
    assert!(o.status.success(), "{o:?}");
    // Γ = 2I with unit-rate displacement and ν: 2·½ = 1 and 1/(ν² − 1) = 1/3.
    let text = stdout(&o);
    assert!((field(&text, "qfi_first_moment") - 1.0).abs() < 1e-11);
    assert!((field(&text, "qfi_second_moment") - 1.0 / 3.0).abs() < 1e-11);
}

#[test]
fn exit_codes() {
    assert_eq!(gqfi(&["qfi", "configs/missing.toml"]).status.code(), Some(2));
    assert_eq!(gqfi(&["bogus"]).status.code(), Some(64));
    assert_eq!(gqfi(&["qfi", "configs/thermal.toml", "--tol", "x"]).status.code(), Some(64));
    // A thermal model changes ν with θ, so the isothermal formula is refused.
    let o = gqfi(&["qfi", "configs/thermal.toml", "--method", "isothermal"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(gqfi(&["--help"]).status.code(), Some(0));
}
