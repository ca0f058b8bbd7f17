use std::process::{Command, Output};

fn cvflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvflow")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_names_every_builtin() {
    let o = cvflow(&["list"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(names, ["example1-dry", "example1-wet", "example2", "example3", "example4", "example5"]);
}

#[test]
fn missing_config_fails_and_names_the_path() {
    let o = cvflow(&["show", "--config", "/nonexistent/exp.toml"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/exp.toml"));
}

#[test]
fn unknown_experiment_fails() {
    let o = cvflow(&["show", "example9"]);
    assert!(!o.status.success());
}

#[test]
fn show_output_loads_back_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = cvflow(&["show", "example3", "--nu", "0.25"]);
    assert!(o.status.success());
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, stdout(&o)).unwrap();
    let back = cvflow(&["show", "--config", path.to_str().unwrap()]);
    assert!(back.status.success());
    assert_eq!(stdout(&back), stdout(&o));
    assert!(stdout(&o).contains("nu = 0.25"));
}

#[test]
fn run_writes_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let o = cvflow(&["run", "example1-dry", "--cells", "400", "--end-time", "0.25", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("error in h"));
    for f in ["experiment.toml", "diagnostics.csv", "error_report.csv", "out_00000.000000.csv", "out_00000.250000.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let head = std::fs::read_to_string(out.join("out_00000.250000.csv")).unwrap();
    assert_eq!(head.lines().next().unwrap(), "j,x_c,y_c,B,h,u,v,c,w");
}

#[test]
fn sweep_writes_one_row_per_blend() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = cvflow(&["sweep", "example2", "--cells", "300", "--end-time", "0.5", "--blends", "0,1", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
}

#[test]
fn mesh_writes_a_readable_triangulation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.mesh");
    let o = cvflow(&["mesh", "example2", "--cells", "200", "--write", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(cvflow::mesh::io::read_mesh(&path).is_ok());
}
