//! Step reports as CSV, field snapshots as legacy VTK, sweep tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::coupling::{ReportSink, StepReport};
use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::fields::State;

/// Header of the per-step report.
pub const STEP_HEADER: [&str; 9] = [
    "step",
    "time",
    "iters",
    "ns_solves",
    "max_abs_phi",
    "E_u_step",
    "E_phi_step",
    "K_hat",
    "monitors_passed",
];

/// Header of the sweep table.
pub const SWEEP_HEADER: [&str; 5] = ["method", "beta", "total_iters", "E_phi_H1", "status"];

/// 17 significant digits, `nan` for missing values.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("csv: {other:?}")),
    }
}

/// Streams one row per step and a closing summary row.
pub struct StepCsv<W: Write> {
    writer: csv::Writer<W>,
    steps: usize,
    last_time: f64,
    iterations: usize,
    ns_solves: usize,
    max_abs_phi: f64,
    e_u: f64,
    e_phi: f64,
    k_hat: f64,
    monitors_passed: bool,
}

impl StepCsv<BufWriter<File>> {
    pub fn create(path: &Path) -> Result<Self> {
        Self::new(BufWriter::new(File::create(path)?))
    }
}

impl<W: Write> StepCsv<W> {
    pub fn new(inner: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(inner);
        writer.write_record(STEP_HEADER).map_err(csv_error)?;
        Ok(Self {
            writer,
            steps: 0,
            last_time: f64::NAN,
            iterations: 0,
            ns_solves: 0,
            max_abs_phi: f64::NAN,
            e_u: f64::NAN,
            e_phi: f64::NAN,
            k_hat: f64::NAN,
            monitors_passed: true,
        })
    }

    pub fn write_step(&mut self, r: &StepReport) -> Result<()> {
        let [e_u, e_phi] = match r.errors {
            Some(e) => [e[0], e[1]],
            None => [f64::NAN; 2],
        };
        let k_hat = r.k_hat().unwrap_or(f64::NAN);
        self.writer
            .write_record([
                r.step_index.to_string(),
                fmt_float(r.time),
                r.iterations.to_string(),
                r.ns_solves.to_string(),
                fmt_float(r.max_abs_phi),
                fmt_float(e_u),
                fmt_float(e_phi),
                fmt_float(k_hat),
                r.monitors_passed().to_string(),
            ])
            .map_err(csv_error)?;
        // fmax ignores the NaN starting values
        self.steps += 1;
        self.last_time = r.time;
        self.iterations += r.iterations;
        self.ns_solves += r.ns_solves;
        self.max_abs_phi = self.max_abs_phi.max(r.max_abs_phi);
        self.e_u = self.e_u.max(e_u);
        self.e_phi = self.e_phi.max(e_phi);
        self.k_hat = self.k_hat.max(k_hat);
        self.monitors_passed &= r.monitors_passed();
        Ok(())
    }

    /// Summary row (`E` columns are maxima over steps) and flush.
    pub fn finish(mut self) -> Result<W> {
        self.writer
            .write_record([
                "summary".to_string(),
                fmt_float(self.last_time),
                self.iterations.to_string(),
                self.ns_solves.to_string(),
                fmt_float(self.max_abs_phi),
                fmt_float(self.e_u),
                fmt_float(self.e_phi),
                fmt_float(self.k_hat),
                self.monitors_passed.to_string(),
            ])
            .map_err(csv_error)?;
        self.writer.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Legacy VTK unstructured grid on the quadratic node set: every triangle
/// is split into four through its edge midpoints. Point data: `velocity`
/// (z = 0), `pressure` (linear field evaluated at the quadratic nodes) and
/// `phi`.
pub fn write_vtk<W: Write>(out: &mut W, disc: &Discretization, state: &State, title: &str) -> Result<()> {
    let nodes = &disc.phase.dof_coordinates;
    let n_points = nodes.len();
    let nv = disc.velocity.n_nodes();
    let n_tri = disc.mesh.n_triangles();

    let mut pressure = vec![0.0; n_points];
    for t in 0..n_tri {
        let q = disc.phase.cell_nodes(t);
        let l = disc.pressure.cell_nodes(t);
        let pv = [state.p[l[0]], state.p[l[1]], state.p[l[2]]];
        for (k, &node) in q.iter().enumerate() {
            pressure[node] = match k {
                0..=2 => pv[k],
                3 => 0.5 * (pv[0] + pv[1]),
                4 => 0.5 * (pv[1] + pv[2]),
                _ => 0.5 * (pv[2] + pv[0]),
            };
        }
    }

    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.replace('\n', " "))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {n_points} double")?;
    for p in nodes {
        writeln!(out, "{} {} 0", fmt_float(p[0]), fmt_float(p[1]))?;
    }
    writeln!(out, "CELLS {} {}", 4 * n_tri, 16 * n_tri)?;
    for t in 0..n_tri {
        let q = disc.phase.cell_nodes(t);
        for sub in [[q[0], q[3], q[5]], [q[3], q[1], q[4]], [q[5], q[4], q[2]], [q[3], q[4], q[5]]] {
            writeln!(out, "3 {} {} {}", sub[0], sub[1], sub[2])?;
        }
    }
    writeln!(out, "CELL_TYPES {}", 4 * n_tri)?;
    for _ in 0..4 * n_tri {
        writeln!(out, "5")?;
    }
    writeln!(out, "POINT_DATA {n_points}")?;
    writeln!(out, "VECTORS velocity double")?;
    for k in 0..n_points {
        writeln!(out, "{} {} 0", fmt_float(state.u[k]), fmt_float(state.u[nv + k]))?;
    }
    for (name, values) in [("pressure", &pressure), ("phi", &state.phi)] {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in values.iter() {
            writeln!(out, "{}", fmt_float(*v))?;
        }
    }
    Ok(())
}

pub fn write_vtk_file(path: &Path, disc: &Discretization, state: &State, title: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vtk(&mut w, disc, state, title)?;
    w.flush()?;
    Ok(())
}

/// One row of a beta sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub method: crate::coupling::Method,
    pub beta: f64,
    pub total_iters: usize,
    pub e_phi_h1: f64,
    pub status: String,
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<W> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(SWEEP_HEADER).map_err(csv_error)?;
    for r in rows {
        writer
            .write_record([
                r.method.to_string(),
                fmt_float(r.beta),
                r.total_iters.to_string(),
                fmt_float(r.e_phi_h1),
                r.status.clone(),
            ])
            .map_err(csv_error)?;
    }
    writer.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Sink writing the step CSV and periodic snapshots.
pub struct FileSink<'a> {
    pub csv: StepCsv<BufWriter<File>>,
    disc: &'a Discretization,
    dir: &'a Path,
    snapshot_every: usize,
}

impl<'a> FileSink<'a> {
    pub fn new(dir: &'a Path, disc: &'a Discretization, snapshot_every: usize) -> Result<Self> {
        Ok(Self {
            csv: StepCsv::create(&dir.join("steps.csv"))?,
            disc,
            dir,
            snapshot_every,
        })
    }

    pub fn snapshot(&self, state: &State, step: usize) -> Result<()> {
        write_vtk_file(
            &self.dir.join(snapshot_name(step)),
            self.disc,
            state,
            &format!("step {step} t = {}", fmt_float(state.t)),
        )
    }
}

pub fn snapshot_name(step: usize) -> String {
    format!("snapshot_{step:06}.vtk")
}

impl ReportSink for FileSink<'_> {
    fn on_step(&mut self, report: &StepReport, state: &State) -> Result<()> {
        self.csv.write_step(report)?;
        if self.snapshot_every > 0 && report.step_index % self.snapshot_every == 0 {
            self.snapshot(state, report.step_index)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Rect;
    use crate::fields::MixtureParams;

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(f64::NAN), "nan");
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt_float(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn empty_report() {
        let csv = StepCsv::new(Vec::new()).unwrap();
        let text = String::from_utf8(csv.finish().unwrap()).unwrap();
        assert_eq!(
            text,
            "step,time,iters,ns_solves,max_abs_phi,E_u_step,E_phi_step,K_hat,monitors_passed\n\
             summary,nan,0,0,nan,nan,nan,nan,true\n"
        );
    }

    #[test]
    fn vtk_layout() {
        let d = Discretization::new(Rect::unit_square(), 2).unwrap();
        let p = MixtureParams::benchmark();
        let s = State::new(
            &d,
            &p,
            vec![0.0; d.velocity.dof_count],
            d.pressure.interpolate(|x, y| x + 2.0 * y),
            vec![-1.0; d.phase.dof_count],
            0.0,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_vtk(&mut buf, &d, &s, "t").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("POINTS 25 double"));
        assert!(text.contains("CELLS 32 128"));
        // the linear pressure is reproduced exactly at every node
        let start = text.find("SCALARS pressure").unwrap();
        let values: Vec<f64> = text[start..].lines().skip(2).take(25).map(|l| l.parse().unwrap()).collect();
        for (v, c) in values.iter().zip(&d.phase.dof_coordinates) {
            assert!((v - (c[0] + 2.0 * c[1])).abs() < 1e-14);
        }
    }
}
