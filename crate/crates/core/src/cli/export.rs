//! CSV and SVG artifacts.

use std::fmt::Write as _;
use std::path::Path;

use crate::celsolve::SystemSolution;
use crate::delsolve::TrajectoryGrid;
use crate::error::{Error, Result};
use crate::numkernel::{CVector, C64};

/// Complex samples of every particle at common times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `particles[j][k]` is particle `j` at `times[k]`.
    pub particles: Vec<Vec<CVector>>,
}

impl Trajectory {
    pub fn from_solution(sol: &SystemSolution, times: &[f64]) -> Self {
        Self {
            times: times.to_vec(),
            particles: sol.particles.iter().map(|p| times.iter().map(|&t| p.eval(t)).collect()).collect(),
        }
    }

    pub fn from_grid(grid: &TrajectoryGrid) -> Self {
        Self {
            times: (0..=grid.last_node()).map(|k| grid.time(k)).collect(),
            particles: grid.particles.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.particles.first().and_then(|p| p.first()).map_or(0, |v| v.len())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header `t,particle,c0_re,c0_im,...`; one row per (time, particle).
pub fn trajectory_csv(traj: &Trajectory) -> Result<String> {
    let d = traj.dim();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = vec!["t".to_string(), "particle".to_string()];
    for c in 0..d {
        header.push(format!("c{c}_re"));
        header.push(format!("c{c}_im"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for (k, &t) in traj.times.iter().enumerate() {
        for (j, p) in traj.particles.iter().enumerate() {
            let mut row = vec![num(t), j.to_string()];
            for z in p[k].iter() {
                row.push(num(z.re));
                row.push(num(z.im));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let width = r.headers().map_err(csv_err)?.len();
    if width < 2 || width % 2 != 0 {
        return Err(Error::ConfigParse("trajectory header must be t,particle then re/im pairs".into()));
    }
    let d = (width - 2) / 2;
    let mut times: Vec<f64> = Vec::new();
    let mut particles: Vec<Vec<CVector>> = Vec::new();
    let bad = |what: &str| Error::ConfigParse(format!("trajectory csv: bad {what}"));
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let t: f64 = rec[0].parse().map_err(|_| bad("time"))?;
        let j: usize = rec[1].parse().map_err(|_| bad("particle index"))?;
        let mut v = CVector::zeros(d);
        for c in 0..d {
            let re: f64 = rec[2 + 2 * c].parse().map_err(|_| bad("value"))?;
            let im: f64 = rec[3 + 2 * c].parse().map_err(|_| bad("value"))?;
            v[c] = C64::new(re, im);
        }
        if j == 0 {
            times.push(t);
        }
        if particles.len() <= j {
            particles.resize(j + 1, Vec::new());
        }
        particles[j].push(v);
    }
    Ok(Trajectory { times, particles })
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// One polyline per particle through the real parts of the first two
/// coordinates (time against the single coordinate when `d = 1`).
pub fn trajectory_svg(traj: &Trajectory) -> String {
    let point = |k: usize, v: &CVector| -> (f64, f64) {
        if v.len() >= 2 {
            (v[0].re, v[1].re)
        } else {
            (traj.times[k], v[0].re)
        }
    };
    let curves: Vec<Vec<(f64, f64)>> = traj
        .particles
        .iter()
        .map(|p| p.iter().enumerate().map(|(k, v)| point(k, v)).collect())
        .collect();
    let all = curves.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 0.0, 0.0, 0.0);
    }
    let span = |a: f64, b: f64| if b - a > 0.0 { b - a } else { 1.0 };
    let (w, h) = (span(x0, x1), span(y0, y1));
    let (mx, my) = (0.01 * w, 0.01 * h);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">",
        x0 - mx,
        -y1 - my,
        w + 2.0 * mx,
        h + 2.0 * my
    );
    let stroke = 0.002 * w.max(h);
    for (j, curve) in curves.iter().enumerate() {
        let pts: Vec<String> = curve.iter().map(|(x, y)| format!("{x:.6},{:.6}", -y)).collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"{stroke:.6}\" points=\"{}\"/>",
            PALETTE[j % PALETTE.len()],
            pts.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Writes `rows` under `header` with LF endings.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn format_number(x: f64) -> String {
    num(x)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}
