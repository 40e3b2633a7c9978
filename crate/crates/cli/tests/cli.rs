use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spinbath-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], config: &PathBuf) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinbath")).args(args).arg("--config").arg(config).output().unwrap()
}

fn table(out: &Output) -> (Vec<String>, Vec<Vec<f64>>) {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

const DRIVEN: &str = r#"
[bath]
n = 3
omega = 0.8
g = 0.3
theta = 1.0

[drive]
alpha = 0.6
beta = 0.2
omega = 1.1

[time]
t_start = 0.0
t_end = 6.0
steps = 31

[initial_state]
bloch = [0.3, -0.2, 0.7]
"#;

#[test]
fn spectrum_rows_and_weights() {
    let cfg = scratch("one.toml", &DRIVEN.replace("n = 3", "n = 1"));
    let (header, rows) = table(&run(&["spectrum"], &cfg));
    assert_eq!(header, ["index_or_class", "multiplicity", "E", "Omega", "Eplus", "Eminus", "weight", "f"]);
    assert_eq!(rows.len(), 2);
    assert!((rows.iter().map(|r| r[6]).sum::<f64>() - 1.0).abs() < 1e-15);

    let cfg = scratch("hundred.toml", &DRIVEN.replace("n = 3", "n = 100"));
    let (_, rows) = table(&run(&["spectrum", "--mode", "hamming"], &cfg));
    assert_eq!(rows.len(), 101);
}

#[test]
fn spectrum_paths_agree_after_grouping() {
    let cfg = scratch("three.toml", DRIVEN);
    let (_, enumerated) = table(&run(&["spectrum", "--mode", "enumerate"], &cfg));
    let (_, classes) = table(&run(&["spectrum", "--mode", "hamming"], &cfg));
    assert_eq!(enumerated.len(), 8);
    assert_eq!(classes.len(), 4);
    for class in &classes {
        let k = class[0] as u32;
        let members: Vec<_> = enumerated.iter().filter(|r| (r[0] as u64).count_ones() == k).collect();
        assert_eq!(members.len() as f64, class[1]);
        let w: f64 = members.iter().map(|r| r[6]).sum();
        assert!((w - class[6]).abs() < 1e-15);
        for m in members {
            for col in [2, 3, 4, 5, 7] {
                assert!((m[col] - class[col]).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn evolve_output_contract() {
    let cfg = scratch("driven.toml", DRIVEN);
    let (header, rows) = table(&run(&["evolve"], &cfg));
    assert_eq!(header, ["t", "rho00_re", "rho01_re", "rho01_im", "rho11_re", "coherence", "purity"]);
    assert_eq!(rows.len(), 31);
    for r in &rows {
        let m = spinbath::Complex2x2::new(
            r[1].into(),
            num_complex::Complex64::new(r[2], r[3]),
            num_complex::Complex64::new(r[2], -r[3]),
            r[4].into(),
        );
        let state = spinbath::DensityMatrix2::new(m).expect("emitted row is a density matrix");
        assert!((state.coherence() - r[5]).abs() < 1e-15);
        assert!((state.purity() - r[6]).abs() < 1e-14);
    }
    let text = String::from_utf8(run(&["evolve"], &cfg).stdout).unwrap();
    let first_value = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let mantissa = first_value.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn evolve_is_deterministic() {
    let cfg = scratch("det.toml", DRIVEN);
    assert_eq!(run(&["evolve"], &cfg).stdout, run(&["evolve"], &cfg).stdout);
}

#[test]
fn dephasing_keeps_populations() {
    let cfg = scratch("deph.toml", &DRIVEN.replace("alpha = 0.6", "alpha = 0.0"));
    let (_, rows) = table(&run(&["evolve"], &cfg));
    for r in &rows {
        assert!((r[1] - rows[0][1]).abs() <= 1e-12);
    }
}

#[test]
fn single_point_grid_echoes_initial_state() {
    let cfg = scratch("echo.toml", &DRIVEN.replace("t_end = 6.0", "t_end = 0.0").replace("steps = 31", "steps = 1"));
    let (_, rows) = table(&run(&["evolve"], &cfg));
    assert_eq!(rows.len(), 1);
    let want = [0.0, 0.85, 0.15, 0.1, 0.15];
    for (a, b) in rows[0].iter().zip(want) {
        assert!((a - b).abs() < 1e-15, "{a} vs {b}");
    }
}

#[test]
fn uncoupled_run_follows_rotating_frame_solution() {
    let cfg = scratch("free.toml", &DRIVEN.replace("g = 0.3", "g = 0.0"));
    let (_, rows) = table(&run(&["evolve"], &cfg));
    // Bloch vector precesses about (α, 0, β − ω/2) in the rotating frame,
    // then the frame turns it about z by ωt.
    let (alpha, beta, omega) = (0.6f64, 0.2f64, 1.1f64);
    let axis = [alpha, 0.0, beta - 0.5 * omega];
    let r = (axis[0] * axis[0] + axis[2] * axis[2]).sqrt();
    let n = [axis[0] / r, 0.0, axis[2] / r];
    let b0 = [0.3, -0.2, 0.7];
    for row in &rows {
        let t = row[0];
        let ang = 2.0 * r * t;
        let dot = n[0] * b0[0] + n[2] * b0[2];
        let cross = [n[1] * b0[2] - n[2] * b0[1], n[2] * b0[0] - n[0] * b0[2], n[0] * b0[1] - n[1] * b0[0]];
        let b: Vec<f64> =
            (0..3).map(|k| b0[k] * ang.cos() + cross[k] * ang.sin() + n[k] * dot * (1.0 - ang.cos())).collect();
        let phi = omega * t;
        let (bx, by) = (b[0] * phi.cos() - b[1] * phi.sin(), b[0] * phi.sin() + b[1] * phi.cos());
        assert!((row[1] - 0.5 * (1.0 + b[2])).abs() < 1e-12);
        assert!((row[2] - 0.5 * bx).abs() < 1e-12);
        assert!((row[3] + 0.5 * by).abs() < 1e-12);
    }
}

#[test]
fn coherence_is_a_narrow_evolve() {
    let cfg = scratch("coh.toml", DRIVEN);
    let (header, rows) = table(&run(&["coherence"], &cfg));
    let (_, full) = table(&run(&["evolve"], &cfg));
    assert_eq!(header, ["t", "coherence"]);
    for (a, b) in rows.iter().zip(&full) {
        assert_eq!(a[1], b[5]);
    }
}

const ADIABATIC: &str = r#"
[bath]
n = 10
omega = 1.0
g = 0.01
theta = 1.0

[drive]
beta0 = 1.0
x = 0.01

[time]
t_start = 0.0
t_end = 100.0
steps = 1001
"#;

#[test]
fn fidelity_columns_agree() {
    let cfg = scratch("weak.toml", ADIABATIC);
    let (header, rows) = table(&run(&["fidelity"], &cfg));
    assert_eq!(header, ["t", "F_closed_form", "F_channel"]);
    for r in &rows {
        assert!((r[1] - r[2]).abs() <= 1e-10);
        assert!(r[2] >= 0.9879);
    }
}

#[test]
fn fidelity_without_coupling() {
    let free = ADIABATIC.replace("g = 0.01", "g = 0.0");
    let cfg = scratch("static.toml", &free.replace("x = 0.01", "x = 0.0"));
    let (_, rows) = table(&run(&["fidelity"], &cfg));
    assert!(rows.iter().all(|r| (r[2] - 1.0).abs() < 1e-14));

    // One full period of the x = 0.5 oscillation, midpoint on the grid.
    let period = std::f64::consts::PI / 1.25f64.sqrt();
    let cfg = scratch(
        "half.toml",
        &free
            .replace("x = 0.01", "x = 0.5")
            .replace("t_end = 100.0", &format!("t_end = {period:.17}"))
            .replace("steps = 1001", "steps = 201"),
    );
    let (_, rows) = table(&run(&["fidelity"], &cfg));
    let min = rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min);
    assert!((min - 0.8).abs() < 1e-10, "{min}");
}

#[test]
fn tilted_field_has_no_closed_form_column() {
    let cfg = scratch("tilted.toml", &ADIABATIC.replace("x = 0.01", "x = 0.01\nphi = 1.0").replace("steps = 1001", "steps = 5"));
    let text = String::from_utf8(run(&["fidelity"], &cfg).stdout).unwrap();
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').nth(1), Some(""));
    }
}

#[test]
fn polar_and_cartesian_drives_agree() {
    let polar = DRIVEN.replace("alpha = 0.6\nbeta = 0.2", "beta0 = 0.7\nphi = 0.9");
    let (alpha, beta) = (0.7 * 0.9f64.sin(), 0.7 * 0.9f64.cos());
    let cartesian = DRIVEN.replace("alpha = 0.6\nbeta = 0.2", &format!("alpha = {alpha:.17e}\nbeta = {beta:.17e}"));
    let (_, a) = table(&run(&["evolve"], &scratch("polar.toml", &polar)));
    let (_, b) = table(&run(&["evolve"], &scratch("cart.toml", &cartesian)));
    for (x, y) in a.iter().zip(&b) {
        for (u, v) in x.iter().zip(y) {
            assert!((u - v).abs() <= 1e-14);
        }
    }
}

#[test]
fn sweep_over_adiabatic_parameter() {
    let cfg = ADIABATIC.replace("g = 0.01", "g = 0.0").replace("steps = 1001", "steps = 101")
        + "\n[sweep]\nvariable = \"x\"\nvalues = [0.0, 0.1, 0.5]\n";
    let (header, rows) = table(&run(&["sweep"], &scratch("sweep-x.toml", &cfg)));
    assert_eq!(header, ["x", "t", "F"]);
    assert_eq!(rows.len(), 303);
    for r in &rows {
        let (x, t) = (r[0], r[1]);
        let q = 1.0 + x * x;
        let want = 1.0 - x * x / q * (q.sqrt() * t).sin().powi(2);
        assert!((r[2] - want).abs() < 1e-10);
    }
}

#[test]
fn sweep_over_temperature_and_size() {
    let cfg = ADIABATIC.replace("steps = 1001", "steps = 11")
        + "\n[sweep]\nvariable = \"theta\"\nvalues = [0, 1, \"inf\"]\n";
    let (_, rows) = table(&run(&["sweep"], &scratch("sweep-t.toml", &cfg)));
    assert_eq!(rows.len(), 33);
    assert!(rows.iter().all(|r| r[2] > 0.98 && r[2] <= 1.0));
    assert_eq!(rows[22][0], f64::INFINITY);

    let cfg = format!("mode = \"hamming\"\n{}", ADIABATIC.replace("steps = 1001", "steps = 11"))
        + "\n[sweep]\nvariable = \"N\"\nvalues = [10, 100, 1000]\n";
    let (header, rows) = table(&run(&["sweep"], &scratch("sweep-n.toml", &cfg)));
    assert_eq!(header[0], "N");
    assert_eq!(rows.len(), 33);
    assert_eq!(rows[32][0], 1000.0);
}

#[test]
fn verify_dephasing_config() {
    let cfg = DRIVEN.replace("alpha = 0.6", "alpha = 0.0") + "\n[verify]\nsets = 1\nn_max = 2\ntimes = 5\n";
    let out = run(&["verify", "--tol-report"], &scratch("verify.toml", &cfg));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("result: PASS"));
    assert!(text.contains("N=2"));
}

#[test]
fn exit_codes() {
    let bad = scratch("bad.toml", "[bath]\nn = \"three\"\n");
    assert_eq!(run(&["evolve"], &bad).status.code(), Some(2));
    let missing = std::env::temp_dir().join("spinbath-no-such-config.toml");
    assert_eq!(run(&["evolve"], &missing).status.code(), Some(2));
    let no_state = scratch("nostate.toml", &DRIVEN.replace("bloch = [0.3, -0.2, 0.7]", ""));
    assert_eq!(run(&["evolve"], &no_state).status.code(), Some(2));
    let huge = scratch("huge.toml", &DRIVEN.replace("n = 3", "n = 30"));
    assert_eq!(run(&["spectrum", "--mode", "enumerate"], &huge).status.code(), Some(3));
    assert_eq!(run(&["verify"], &scratch("huge-verify.toml", &DRIVEN.replace("n = 3", "n = 7"))).status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_spinbath")).arg("evolve").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_flag_writes_file() {
    let cfg = scratch("out.toml", DRIVEN);
    let target = cfg.with_file_name("written.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_spinbath"))
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&target)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&target).unwrap(), run(&["spectrum"], &cfg).stdout);
}
