//! End-to-end runs of the `aelim` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aelim_core::liouville::{lindblad_superop, LindbladModel};
use aelim_core::models::{annihilation, number_operator};
use aelim_core::numkernel::ComplexMatrix;
use aelim_core::C64;

fn aelim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aelim")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(cmd: &str, dir: &Path, text: &str) -> Output {
    let cfg = write_config(dir, text);
    let out = dir.join("out");
    aelim(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Header row and numeric rows of a CSV output.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn json_matrix(v: &serde_json::Value) -> ComplexMatrix {
    let rows = v.as_array().unwrap();
    ComplexMatrix::from_fn(rows.len(), rows.len(), |i, j| {
        let e = &rows[i][j];
        C64::new(e[0].as_f64().unwrap(), e[1].as_f64().unwrap())
    })
}

#[test]
fn unknown_parameter_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("eliminate", dir.path(), "model = \"two_qubit\"\n[parameters]\nkappa = 0.1\n");
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("parameters.kappa"), "{msg}");
    assert!(msg.contains("gamma, chi"), "{msg}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn invalid_inputs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    for text in [
        "model = \"two_qubit\"\n[times]\nstart = 2.0\nstop = 2.0\n",
        "model = \"two_qubit\"\n[parameters]\ngamma = -1.0\n",
        "model = \"rabi\"\n[parameters]\ng = 1.2\n",
        "model = \"two_qubit\"\ninitial_state = \"plus\"\n",
    ] {
        let o = run("compare", dir.path(), text);
        assert_eq!(o.status.code(), Some(2), "{text}: {}", stderr(&o));
    }
    let o = aelim(&["eliminate", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("out");
    std::fs::write(&blocker, "a file").unwrap();
    let o = run("eliminate", dir.path(), "model = \"two_qubit\"\n");
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn uncoupled_rabi_gives_bare_cavity() {
    let dir = tempfile::tempdir().unwrap();
    let text = "model = \"rabi\"\n[parameters]\ng = 0.0\neta = 0.2\nkappa = 0.3\nfock_cutoff = 5\n";
    let o = run("eliminate", dir.path(), text);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&dir.path().join("out/rabi_generator.json"));
    assert_eq!(v["tool"], "aelim");
    assert_eq!(v["config"]["parameters"]["g"], 0.0);
    let generator = json_matrix(&v["reduced_generator"]);
    let bare = LindbladModel::new(number_operator(5).scale_real(0.2), vec![(annihilation(5), 0.3)]).unwrap();
    let bare = lindblad_superop(&bare).unwrap().into_matrix();
    assert!(generator.max_abs_diff(&bare) < 1e-14);
    assert_eq!(v["engine_rates"]["extra_dissipation"], 0.0);
}

#[test]
fn eliminate_reports_closed_form_next_to_engine() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("eliminate", dir.path(), "model = \"two_qubit\"\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&dir.path().join("out/two_qubit_generator.json"));
    assert_eq!(v["dim_a"], 2);
    assert_eq!(v["inverse"]["rank_deficiency"], 0);
    let cf = &v["closed_form"];
    assert_eq!(cf["tolerance"], 1e-9);
    let zeta = cf["scalars"].as_array().unwrap().iter().find(|s| s["name"] == "zeta").unwrap();
    assert!((zeta["closed_form"].as_f64().unwrap() - 5.3493e-3).abs() < 1e-7);
    assert!((zeta["engine"].as_f64().unwrap() - 5.2377e-3).abs() < 1e-7);
    // Two eigenvalues at zero, a complex-conjugate pair of slow modes.
    let spectrum = v["spectra"]["l0"].as_array().unwrap();
    assert_eq!(spectrum.len(), 4);
    let zeros = spectrum.iter().filter(|z| z[0].as_f64().unwrap().abs() < 1e-12).count();
    assert_eq!(zeros, 2);
}

#[test]
fn compare_writes_both_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("compare", dir.path(), "model = \"two_qubit\"\n[times]\ncount = 50\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    let (header, rows) = read_csv(&out.join("two_qubit_exact.csv"));
    assert_eq!(header, ["time", "sx_A", "sy_A", "sz_A", "sx_B", "sy_B", "sz_B"]);
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[0][1] - 1.0).abs() < 1e-10);
    assert!(rows.iter().all(|r| r[3].abs() < 1e-10));

    let (header, eff) = read_csv(&out.join("two_qubit_effective.csv"));
    assert_eq!(header, ["time", "sx_A", "sy_A", "sz_A", "trace_distance"]);
    let sup = rows.iter().zip(&eff).map(|(a, b)| (a[1] - b[1]).abs()).fold(0.0, f64::max);
    assert!(sup <= 5e-2);

    let report = read_json(&out.join("two_qubit_report.json"));
    assert!((report["sup_deviation"]["sx_A"].as_f64().unwrap() - sup).abs() < 1e-15);
    assert_eq!(report["times"].as_array().unwrap().len(), 50);
    let text = std::fs::read_to_string(out.join("two_qubit_exact.csv")).unwrap();
    assert!(text.starts_with(&format!("# aelim {}\n# config: {{", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn json_tables_carry_columns_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let text = "model = \"rabi\"\nmethod = \"factorized\"\norder = 0\n[parameters]\nfock_cutoff = 5\n\
                [times]\nstop = 5.0\ncount = 11\n[output]\nformat = \"json\"\nstem = \"cav\"\n";
    let o = run("compare", dir.path(), text);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&dir.path().join("out/cav_effective.json"));
    assert_eq!(v["columns"][0], "time");
    assert_eq!(v["rows"].as_array().unwrap().len(), 11);
    assert_eq!(v["rows"][10][0], 5.0);
    assert_eq!(v["config"]["method"]["kind"], "factorized");
}

#[test]
fn overrides_replace_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model = \"two_qubit\"\n");
    let out = dir.path().join("elsewhere");
    let o = aelim(&[
        "eliminate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--method",
        "perturbative",
        "--order",
        "0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = read_json(&out.join("two_qubit_generator.json"));
    assert_eq!(v["order"], 0);
    assert_eq!(v["inverse"]["series_increments"].as_array().unwrap().len(), 3);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), out.join("two_qubit_generator.json").to_str().unwrap());
}

#[test]
fn single_point_sweep_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let text = "model = \"two_qubit\"\n[times]\ncount = 40\n[sweep]\nparameter = \"chi\"\nvalues = [0.1]\n";
    let o = run("sweep", dir.path(), text);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("out/two_qubit_sweep.csv"));
    assert_eq!(header[0], "chi");
    assert_eq!(rows.len(), 1);
}

#[test]
fn sweep_deviation_shrinks_with_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let text = "model = \"two_qubit\"\n[times]\ncount = 200\n[sweep]\nparameter = \"chi\"\nvalues = [0.05, 0.2, 0.1]\n";
    let o = run("sweep", dir.path(), text);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.path().join("out/two_qubit_sweep.csv");
    let (header, rows) = read_csv(&path);
    let sx = header.iter().position(|h| h == "sup_sx_A").unwrap();
    let violation = header.iter().position(|h| h == "violation").unwrap();
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), [0.2, 0.1, 0.05]);
    assert!(rows.windows(2).all(|w| w[1][sx] < w[0][sx]));
    assert!(rows.iter().all(|r| r[violation] == 0.0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("# monotone: true\n"));
    assert!(text.contains("# primary_observable: sx_A\n"));
}

#[test]
fn sweep_needs_a_sweep_section() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("sweep", dir.path(), "model = \"two_qubit\"\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn custom_model_from_matrices() {
    // A qubit dispersively coupled to a damped qubit, written out by hand.
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
model = "custom"
initial_state = { matrix = [[[0.5, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.5, 0.0]]] }

[times]
stop = 10.0
count = 21

[custom]
dim_a = 2
dim_b = 2
jumps_b = [{ operator = [[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]], rate = 1.0 }]
coupling = [
  [[0.05, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
  [[0.0, 0.0], [-0.05, 0.0], [0.0, 0.0], [0.0, 0.0]],
  [[0.0, 0.0], [0.0, 0.0], [-0.05, 0.0], [0.0, 0.0]],
  [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.05, 0.0]],
]
observables = [{ name = "x", target = "a", operator = [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]] }]
"#;
    let o = run("compare", dir.path(), text);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("out/custom_effective.csv"));
    assert_eq!(header, ["time", "x", "trace_distance"]);
    assert_eq!(rows.len(), 21);
    assert!((rows[0][1] - 1.0).abs() < 1e-3);
    assert!(rows.iter().all(|r| r[2] < 1e-2));
}

#[test]
fn sample_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["two_qubit.toml", "rabi.toml"] {
        let cfg = aelim_cli::RunConfig::load(&dir.join(name), &aelim_cli::Overrides::default()).unwrap();
        assert!(cfg.output.dir.is_some(), "{name}");
    }
}
