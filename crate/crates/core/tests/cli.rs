use std::fs;
use std::path::Path;
use std::process::Command;

use nsac::cli::{self, output, RunConfig};
use nsac::coupling::Method;

const SMALL_MMS: &str = "\
# two steps of the manufactured problem on a coarse mesh
preset = paper-table1-fin0
mesh_n = 4
t_final = 2/1300
";

fn small_config(dir: &Path) -> RunConfig {
    let overrides = [("output_dir".to_string(), dir.display().to_string())];
    RunConfig::parse(SMALL_MMS, None, &overrides).unwrap()
}

/// Minimal legacy-VTK reader: point coordinates and one named scalar field.
struct Vtk {
    points: Vec<[f64; 2]>,
    velocity: Vec<[f64; 2]>,
    scalars: Vec<(String, Vec<f64>)>,
}

fn read_vtk(path: &Path) -> Vtk {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let mut vtk = Vtk {
        points: Vec::new(),
        velocity: Vec::new(),
        scalars: Vec::new(),
    };
    let nums = |l: &str| -> Vec<f64> { l.split_whitespace().map(|t| t.parse().unwrap()).collect() };
    let mut n = 0;
    while let Some(line) = lines.next() {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.first().copied() {
            Some("POINTS") => {
                n = words[1].parse().unwrap();
                for _ in 0..n {
                    let v = nums(lines.next().unwrap());
                    vtk.points.push([v[0], v[1]]);
                }
            }
            Some("VECTORS") => {
                for _ in 0..n {
                    let v = nums(lines.next().unwrap());
                    vtk.velocity.push([v[0], v[1]]);
                }
            }
            Some("SCALARS") => {
                lines.next();
                let values = (0..n).map(|_| lines.next().unwrap().parse().unwrap()).collect();
                vtk.scalars.push((words[1].to_string(), values));
            }
            _ => {}
        }
    }
    vtk
}

impl Vtk {
    fn scalar(&self, name: &str) -> &[f64] {
        &self.scalars.iter().find(|s| s.0 == name).unwrap().1
    }
}

#[test]
fn rerun_is_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cli::run(&small_config(a.path())).unwrap();
    cli::run(&small_config(b.path())).unwrap();
    let ca = fs::read(a.path().join("steps.csv")).unwrap();
    let cb = fs::read(b.path().join("steps.csv")).unwrap();
    assert_eq!(ca, cb);

    let text = String::from_utf8(ca).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], output::STEP_HEADER.join(","));
    assert!(rows[1].starts_with("1,"));
    assert!(rows[3].starts_with("summary,"));
    assert!(rows[3].ends_with(",true"));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    cli::run(&config).unwrap();
    let echoed = fs::read_to_string(dir.path().join("config.txt")).unwrap();
    let again = RunConfig::parse(&echoed, None, &[]).unwrap();
    assert_eq!(again.to_config_string(), echoed);
    assert_eq!(again.params.dt, 1.0 / 1300.0);
    assert_eq!(again.solver.method, Method::Fin);
}

#[test]
fn snapshots_follow_the_manufactured_solution() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path());
    config.snapshot_every = 1;
    cli::run(&config).unwrap();

    let n = config.mesh_n;
    let initial = read_vtk(&dir.path().join(output::snapshot_name(0)));
    assert_eq!(initial.points.len(), (2 * n + 1) * (2 * n + 1));
    // phi(x, 0) = -1 and u(x, 0) = 0
    assert!(initial.scalar("phi").iter().all(|&v| v == -1.0));
    assert!(initial.velocity.iter().all(|v| v[0] == 0.0 && v[1] == 0.0));

    let step2 = read_vtk(&dir.path().join(output::snapshot_name(2)));
    let t = 2.0 / 1300.0;
    let t_end = 10.0 / 1300.0;
    let mut worst = 0.0f64;
    for (p, &phi) in step2.points.iter().zip(step2.scalar("phi")) {
        let exact = t * (p[0] + 2.0).powi(2) / (2.0 * t_end) - 1.0;
        worst = worst.max((phi - exact).abs());
    }
    // quadratic in x, so only the coarse velocity error enters through advection
    assert!(worst < 1e-5, "phi nodal error {worst:e}");
    // homogeneous Dirichlet velocity on the boundary
    for (p, v) in step2.points.iter().zip(&step2.velocity) {
        if p[0].abs() == 1.0 || p[1].abs() == 1.0 {
            assert!(v[0].abs() < 1e-14 && v[1].abs() < 1e-14);
        }
    }
}

#[test]
fn single_point_sweep_matches_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path());
    let run = cli::run(&config).unwrap().outcome;

    config.beta_sweep = Some(vec![0.0]);
    config.sweep_methods = vec![Method::Fin];
    let rows = cli::run_beta_sweep(&config).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].status, "ok");
    assert_eq!(rows[0].total_iters, run.total_iterations());
    assert_eq!(rows[0].e_phi_h1.to_bits(), run.max_errors().unwrap()[2].to_bits());
}

#[test]
fn parallel_sweep_keeps_order() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path());
    config.solver.t_final = 1.0 / 1300.0;
    config.beta_sweep = Some(vec![2.0, 0.0]);
    config.sweep_methods = vec![Method::Fip, Method::Fin];
    let serial = cli::run_beta_sweep(&config).unwrap();
    config.sweep_parallel = true;
    let parallel = cli::run_beta_sweep(&config).unwrap();
    assert_eq!(serial.len(), 4);
    for (s, p) in serial.iter().zip(&parallel) {
        assert_eq!((s.method, s.beta.to_bits(), s.total_iters), (p.method, p.beta.to_bits(), p.total_iters));
        assert_eq!(s.e_phi_h1.to_bits(), p.e_phi_h1.to_bits());
    }
    let order: Vec<_> = serial.iter().map(|r| (r.method, r.beta)).collect();
    assert_eq!(
        order,
        [(Method::Fip, 2.0), (Method::Fip, 0.0), (Method::Fin, 2.0), (Method::Fin, 0.0)]
    );

    let path = dir.path().join("sweep.csv");
    cli::write_sweep_file(&path, &serial).unwrap();
    let text = fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "method,beta,total_iters,E_phi_H1,status");
    assert!(text.lines().nth(1).unwrap().starts_with("FIP,2.0000000000000000e0,"));
}

fn nsac(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_nsac")).args(args).output().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    (out.status.code().unwrap(), stderr)
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    fs::write(&cfg, "mesh_n = 4\nt_final = 1/1300\nbetta = 1\n").unwrap();
    let (code, err) = nsac(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("betta") && err.contains("line 3"), "{err}");

    fs::write(&cfg, "preset = paper-table1-fin0\nmesh_n = 4\nt_final = 1/1300\n").unwrap();
    let (code, err) = nsac(&["run", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(code, 0, "{err}");
    assert!(Path::new(out).join("steps.csv").exists());

    let (code, err) = nsac(&["run", "--config", cfg.to_str().unwrap(), "--out", out, "--set", "max_iter=2"]);
    assert_eq!(code, 1);
    assert!(err.contains("converge"), "{err}");

    let (code, _) = nsac(&["run", "--config", cfg.to_str().unwrap(), "--method", "newtonish"]);
    assert_eq!(code, 2);

    let (code, _) = nsac(&["verify-mms-forcing", "--points", "20"]);
    assert_eq!(code, 0);
}
