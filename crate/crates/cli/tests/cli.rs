use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE: &str = "\
omega0 = 1.0
delta_omega = 0.1
omega_c = 3.0
s = 1.0
alpha = 0.05
beta1_re = 0.35355339059327373
beta2_re = 0.35355339059327373
";

fn envsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_envsync"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn dynamics_writes_csv_and_metadata_deterministically() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", BASE);
    let runs: Vec<PathBuf> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for out in &runs {
        let o = envsync(&[
            "dynamics",
            "--config",
            s(&cfg),
            "--out",
            s(out),
            "--tmax",
            "12",
            "--ncap",
            "8",
            "--logneg",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let first = runs[0].join("dynamics.csv");
    assert_eq!(header(&first), "t,x1,x2,p1,p2,n1,n2,trace,min_eig,logneg");
    let a = std::fs::read(&first).unwrap();
    let b = std::fs::read(runs[1].join("dynamics.csv")).unwrap();
    assert_eq!(a, b);

    let meta = std::fs::read_to_string(runs[0].join("dynamics.meta.toml")).unwrap();
    let table: toml::Table = meta.parse().unwrap();
    assert_eq!(table["command"].as_str(), Some("dynamics"));
    assert_eq!(table["integration"]["n_cap"].as_integer(), Some(8));
    assert!(table["diagnostics"]["max_trace_error"].as_float().unwrap() < 1e-9);

    // first data row is the initial coherent state
    let text = String::from_utf8(a).unwrap();
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(row[0], 0.0);
    assert!(
        (row[1] - 0.5).abs() < 1e-9 && (row[2] - 0.5).abs() < 1e-9,
        "{row:?}"
    );
    assert!((row[7] - 1.0).abs() < 1e-12);
}

#[test]
fn logneg_column_is_optional() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", BASE);
    let out = dir.path().join("out");
    let o = envsync(&[
        "dynamics",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--tmax",
        "2",
        "--ncap",
        "8",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        header(&out.join("dynamics.csv")),
        "t,x1,x2,p1,p2,n1,n2,trace,min_eig"
    );
}

#[test]
fn coeffs_writes_both_tables() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", BASE);
    let out = dir.path().join("out");
    let o = envsync(&[
        "coeffs",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--tmax",
        "5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        header(&out.join("coeffs.csv")),
        "t,u_re,u_im,v_re,v_im,w_re,w_im,x_re,x_im"
    );
    assert_eq!(
        header(&out.join("generator.csv")),
        "t,omega11_re,omega11_im,omega21_re,omega21_im,gamma1,gamma2"
    );
    let rows = std::fs::read_to_string(out.join("coeffs.csv")).unwrap();
    let first: Vec<f64> = rows
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    // u(0) = x(0) = 1, v(0) = w(0) = 0
    assert_eq!(first, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
}

#[test]
fn alpha_sweep_table() {
    let dir = TempDir::new().unwrap();
    let text = format!("{BASE}\n[sweep]\nalphas = [0.01, 0.16]\n");
    let cfg = write_config(&dir, "sweep.toml", &text);
    let out = dir.path().join("out");
    let o = envsync(&[
        "sweep-sync",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--ncap",
        "6",
        "--workers",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(out.join("sweep_alpha.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "alpha,freq1,freq2,locked");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",false"), "{}", lines[1]);
    assert!(lines[2].ends_with(",true"), "{}", lines[2]);
}

#[test]
fn phase_diagram_tables() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "{BASE}\n[phase_diagram]\nalpha_max = 0.3\nalpha_points = 4\ndelta_max = 0.5\ndelta_points = 3\n"
    );
    let cfg = write_config(&dir, "pd.toml", &text);
    let out = dir.path().join("out");
    let o = envsync(&["phase-diagram", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let raster = std::fs::read_to_string(out.join("phase_diagram.csv")).unwrap();
    assert!(raster.starts_with("alpha,delta_omega,omega_prime_over_omega0\n"));
    assert_eq!(raster.lines().count(), 1 + 4 * 3);
    assert!(raster.contains("nan"));
    assert_eq!(
        header(&out.join("phase_boundary.csv")),
        "delta_omega,alpha_c"
    );
}

#[test]
fn pole_reports_the_localized_mode() {
    let dir = TempDir::new().unwrap();
    let localized = write_config(
        &dir,
        "a.toml",
        &BASE.replace("alpha = 0.05", "alpha = 0.24"),
    );
    let o = envsync(&["pole", "--config", s(&localized)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o);
    let value: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((value + 0.21293989568632394).abs() < 1e-9, "{line}");
    assert!(line.contains("localized = true"));

    let free = write_config(&dir, "b.toml", &BASE.replace("alpha = 0.05", "alpha = 0.0"));
    let o = envsync(&["pole", "--config", s(&free)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("no pole"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &format!("{BASE}alhpa = 0.2\n"));
    let o = envsync(&["pole", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alhpa"), "{}", stderr(&o));
}

#[test]
fn invalid_values_name_their_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", BASE);
    let out = dir.path().join("out");
    let o = envsync(&[
        "dynamics",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--ncap",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--ncap"), "{}", stderr(&o));

    // dt * omega_c > 1 leaves the bath kernel unresolved
    let o = envsync(&[
        "coeffs",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--dt",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--dt"), "{}", stderr(&o));

    let neg = write_config(
        &dir,
        "neg.toml",
        &BASE.replace("alpha = 0.05", "alpha = -0.1"),
    );
    let o = envsync(&["pole", "--config", s(&neg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));
}

#[test]
fn empty_sweep_grid_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "run.toml", BASE);
    let out = dir.path().join("out");
    let o = envsync(&["sweep-sync", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sweep"), "{}", stderr(&o));
    assert!(!out.join("sweep_alpha.csv").exists());
}

#[test]
fn numerical_failure_exits_one() {
    let dir = TempDir::new().unwrap();
    // the propagator determinant passes within 1e-8 of zero near t = 95.6
    let text = BASE
        .replace("delta_omega = 0.1", "delta_omega = 0.2")
        .replace("alpha = 0.05", "alpha = 0.04375");
    let cfg = write_config(&dir, "run.toml", &text);
    let out = dir.path().join("out");
    let o = envsync(&[
        "coeffs",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--tmax",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("generator"), "{}", stderr(&o));
}
