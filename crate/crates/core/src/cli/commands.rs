//! Experiment commands behind the `choreoqep` binary.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{complex_pairs, Experiment, GammaGrid};
use super::export::{format_number, table_csv, trajectory_csv, trajectory_svg, write_file, Trajectory};
use crate::celsolve::{dirichlet_cel, general_solution_cel, residual_cel, Amplitudes, EndpointData, SystemSolution};
use crate::convergence::{default_radius, epsilon_sweep, filter_to_window, SweepResult};
use crate::delsolve::{dirichlet_del, general_solution_del, residual_del_all, residual_scale, DelSolution, WindowData};
use crate::error::{Error, Result};
use crate::model::{validate_spec, LagrangianSpec, Violation};
use crate::numkernel::C64;
use crate::pencil::{
    check_cel_assumptions, check_del_assumptions, classical_spectrum, transcendental_spectrum, AssumptionReport,
    ClassicalPencil, TranscendentalPencil,
};
use crate::periodic::{build_choreography_cel, build_choreography_del, verify_choreography, ChoreographyReport};
use crate::scaleop::{check_operator_conditions, OperatorConditions, ScaleOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Cel,
    Del,
}

impl Which {
    pub fn label(self) -> &'static str {
        match self {
            Which::Cel => "cel",
            Which::Del => "del",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceGrid {
    Gamma,
    K,
}

/// Runs `f` on a pool of `workers` threads (the global pool when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::NumericalFailure(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn sample_times(exp: &Experiment) -> Vec<f64> {
    (0..=exp.m).map(|k| exp.t0 + k as f64 * exp.epsilon).collect()
}

#[derive(Debug, Clone)]
pub struct ValidateReport {
    pub violations: Vec<Violation>,
    pub operator: OperatorConditions,
    pub cel: AssumptionReport,
    pub del: AssumptionReport,
    pub resolution_warning: Option<String>,
}

impl ValidateReport {
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.violations.is_empty() {
            out.push("matrices: ok".to_string());
        }
        for v in &self.violations {
            out.push(format!("matrix {}: {:?} (magnitude {:.3e})", v.matrix, v.kind, v.magnitude));
        }
        out.push(format!(
            "operator: sum_zero={} derivative_normalized={}",
            self.operator.sum_zero, self.operator.derivative_normalized
        ));
        for (label, r) in [("classical", &self.cel), ("discrete", &self.del)] {
            out.push(format!("{label} assumptions: {}", if r.holds() { "ok" } else { "violated" }));
            out.extend(r.messages.iter().map(|m| format!("  {m}")));
        }
        if let Some(w) = &self.resolution_warning {
            out.push(format!("warning: {w}"));
        }
        out
    }
}

/// `10·(tf−t0)²·ρ((J1−2J3)⁻¹(J2−2J4)) / |γ_{−N}γ_N|`; `M²` below this
/// under-resolves the fastest particle mode.
pub fn resolution_bound(spec: &LagrangianSpec, op: &ScaleOperator, span: f64) -> Option<f64> {
    let s = spec.kinetic(0.0);
    let c = spec.potential(0.0);
    let m = s.lu().solve(&c)?;
    let rho = m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let n = op.order() as i64;
    let g = (op.gamma(-n) * op.gamma(n)).norm();
    Some(10.0 * span * span * rho / g)
}

pub fn cmd_validate(exp: &Experiment) -> ValidateReport {
    let spec = &exp.spec;
    let resolution_warning = match resolution_bound(spec, &exp.op, exp.tf - exp.t0) {
        Some(b) if ((exp.m * exp.m) as f64) < b => Some(format!(
            "M = {} is below the resolution bound: M^2 = {} < {b:.1}; discrete modes will not track the classical ones",
            exp.m,
            exp.m * exp.m
        )),
        Some(_) => None,
        None => Some("J1 - 2J3 is singular; resolution bound undefined".into()),
    };
    ValidateReport {
        violations: validate_spec(spec),
        operator: check_operator_conditions(&exp.op),
        cel: check_cel_assumptions(spec, spec.n),
        del: check_del_assumptions(spec, &exp.op, spec.n),
        resolution_warning,
    }
}

fn pencil_values(spec: &LagrangianSpec) -> Vec<f64> {
    if spec.n > 1 {
        vec![spec.n as f64, 0.0]
    } else {
        vec![spec.n as f64]
    }
}

/// Root table of `P_n` and `P_0` (or their discrete counterparts).
pub fn cmd_spectrum(exp: &Experiment, which: Which) -> Result<String> {
    let spec = &exp.spec;
    let mut rows = Vec::new();
    for nu in pencil_values(spec) {
        let classical = classical_spectrum(&ClassicalPencil::new(spec, nu))?;
        match which {
            Which::Cel => {
                for (r, e) in classical.roots().iter().zip(classical.residuals()) {
                    rows.push(vec![format!("{nu}"), format_number(r.re), format_number(r.im), format_number(*e)]);
                }
            }
            Which::Del => {
                let discrete = transcendental_spectrum(&TranscendentalPencil::new(spec, &exp.op, nu))?;
                let radius = exp.sweep().k_radius.unwrap_or_else(|| default_radius(classical.roots()));
                let kept = filter_to_window(&discrete.lambdas, radius);
                for (r, e) in discrete.lambdas.roots().iter().zip(discrete.lambdas.residuals()) {
                    let convergent = kept.roots().contains(r);
                    rows.push(vec![
                        format!("{nu}"),
                        format_number(r.re),
                        format_number(r.im),
                        format_number(*e),
                        (convergent as u8).to_string(),
                    ]);
                }
            }
        }
    }
    match which {
        Which::Cel => table_csv(&["nu", "re", "im", "residual"], &rows),
        Which::Del => table_csv(&["nu", "re", "im", "residual", "convergent"], &rows),
    }
}

fn config_amplitudes(exp: &Experiment) -> Result<Option<Amplitudes>> {
    let Some(a) = &exp.config.amplitudes else { return Ok(None) };
    let sum = complex_pairs("amplitudes.sum", &a.sum_re, a.sum_im.as_ref())?;
    let mut particles = Vec::new();
    for (i, re) in a.particles_re.iter().enumerate() {
        let im = a.particles_im.as_ref().map(|rows| rows.get(i).cloned().unwrap_or_default());
        particles.push(complex_pairs("amplitudes.particles", re, im.as_ref())?);
    }
    Ok(Some(Amplitudes { sum, particles }))
}

fn endpoint_data(exp: &Experiment, tf: f64) -> Option<EndpointData> {
    exp.boundary().map(|(s, e)| EndpointData::real(exp.t0, tf, &s, &e))
}

/// End windows of the classical solution at the nodes used by the discrete Dirichlet problem.
pub fn matched_windows(cel: &SystemSolution, op: &ScaleOperator, t0: f64, m: usize) -> WindowData {
    WindowData::from_fn(t0, op.epsilon(), m, 2 * op.order(), cel.n(), |j, t| cel.particles[j].eval(t))
}

/// A solved trajectory with its worst relative residual.
#[derive(Debug, Clone)]
pub struct Solved {
    pub trajectory: Trajectory,
    pub residual: f64,
    pub condition: Option<f64>,
}

fn solve_cel(exp: &Experiment) -> Result<(SystemSolution, Option<f64>)> {
    let (sol, cond) = if let Some(data) = endpoint_data(exp, exp.tf) {
        let (sol, report) = dirichlet_cel(&exp.spec, &data)?;
        (sol, Some(report.worst()))
    } else if let Some(a) = config_amplitudes(exp)? {
        (general_solution_cel(&exp.spec, &a)?, None)
    } else {
        return Err(Error::ConfigParse("solve needs boundary or amplitudes".into()));
    };
    Ok((sol, cond))
}

fn solve_del(exp: &Experiment) -> Result<(DelSolution, Option<f64>)> {
    if exp.boundary().is_some() {
        let (cel, _) = solve_cel(exp)?;
        let (sol, report) = dirichlet_del(&exp.spec, &exp.op, &matched_windows(&cel, &exp.op, exp.t0, exp.m))?;
        Ok((sol, Some(report.worst())))
    } else if let Some(a) = config_amplitudes(exp)? {
        Ok((general_solution_del(&exp.spec, &exp.op, exp.t0, exp.m, &a)?, None))
    } else {
        Err(Error::ConfigParse("solve needs boundary or amplitudes".into()))
    }
}

/// Classical residuals are checked at 100 seeded random times in `(t0, tf)`;
/// discrete residuals at every interior node.
pub fn cmd_solve(exp: &Experiment, which: Which, seed: u64) -> Result<Solved> {
    match which {
        Which::Cel => {
            let (sol, condition) = solve_cel(exp)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let times: Vec<f64> = (0..100).map(|_| rng.gen_range(exp.t0..exp.tf)).collect();
            let scale = 1.0 + crate::celsolve::trajectory_scale(&sol, &times);
            let residual = times.iter().map(|&t| residual_cel(&exp.spec, &sol, t).max_norm()).fold(0.0, f64::max) / scale;
            Ok(Solved { trajectory: Trajectory::from_solution(&sol, &sample_times(exp)), residual, condition })
        }
        Which::Del => {
            let (sol, condition) = solve_del(exp)?;
            let grid = sol.sample();
            let scale = residual_scale(&exp.spec, &exp.op, &grid);
            let all = residual_del_all(&exp.spec, &exp.op, &grid)?;
            let residual = sol.interior_nodes().map(|k| all[k].max_norm()).fold(0.0, f64::max) / scale;
            Ok(Solved { trajectory: Trajectory::from_grid(&grid), residual, condition })
        }
    }
}

pub fn export_trajectory(dir: &Path, stem: &str, traj: &Trajectory) -> Result<Vec<PathBuf>> {
    Ok(vec![
        write_file(dir, &format!("{stem}.csv"), &trajectory_csv(traj)?)?,
        write_file(dir, &format!("{stem}.svg"), &trajectory_svg(traj))?,
    ])
}

/// Discrete ℓ² distance between the classical solution and the discrete
/// solution matched to it on both end windows, over interior nodes.
pub fn trajectory_gap(spec: &LagrangianSpec, cel: &SystemSolution, op: &ScaleOperator, t0: f64, m: usize) -> Result<f64> {
    let (del, _) = dirichlet_del(spec, op, &matched_windows(cel, op, t0, m))?;
    let eps = op.epsilon();
    let mut total = 0.0;
    for k in del.interior_nodes() {
        let t = t0 + k as f64 * eps;
        for (x, y) in cel.particles.iter().zip(&del.system.particles) {
            total += (x.eval(t) - y.eval(t)).norm_squared();
        }
    }
    if !total.is_finite() {
        return Err(Error::NumericalFailure("non-finite trajectory gap".into()));
    }
    Ok(total.sqrt())
}

/// `−log(min(max(gap, 1e-300), 3M))`, with failures counted as `3M`.
pub fn gap_metric(gap: Result<f64>, m: usize) -> f64 {
    let cap = 3.0 * m as f64;
    let g = gap.map(|g| g.max(1e-300)).unwrap_or(cap);
    -(g.min(cap)).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaCell {
    pub gamma_m1: f64,
    pub gamma_1: f64,
    pub metric: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KCell {
    pub k: f64,
    pub m: usize,
    pub error: f64,
    pub note: Option<String>,
}

fn reference_cel(exp: &Experiment, tf: f64) -> Result<SystemSolution> {
    let data = endpoint_data(exp, tf).ok_or_else(|| Error::ConfigParse("error-surface needs boundary data".into()))?;
    Ok(dirichlet_cel(&exp.spec, &data)?.0)
}

/// Metric over a square `(γ_{−1}, γ_1)` grid with `γ_0 = −(γ_{−1}+γ_1)`, row-major in `γ_{−1}`.
pub fn gamma_surface(exp: &Experiment, grid: &GammaGrid) -> Result<Vec<GammaCell>> {
    let cel = reference_cel(exp, exp.tf)?;
    let values = grid.values();
    let cells: Vec<(f64, f64)> = values.iter().flat_map(|&a| values.iter().map(move |&b| (a, b))).collect();
    Ok(cells
        .par_iter()
        .map(|&(a, b)| {
            let gap = ScaleOperator::zero_sum_three_point(C64::new(a, 0.0), C64::new(b, 0.0), exp.epsilon)
                .and_then(|op| trajectory_gap(&exp.spec, &cel, &op, exp.t0, exp.m));
            let note = gap.as_ref().err().map(|e| e.to_string());
            GammaCell { gamma_m1: a, gamma_1: b, metric: gap_metric(gap, exp.m), note }
        })
        .collect())
}

/// Gap against `k` for each `M`, with the window `[t0, tf]` fixed.
pub fn k_surface(exp: &Experiment, ks: &[f64], ms: &[usize]) -> Result<Vec<KCell>> {
    let cel = reference_cel(exp, exp.tf)?;
    let cells: Vec<(usize, f64)> = ms.iter().flat_map(|&m| ks.iter().map(move |&k| (m, k))).collect();
    Ok(cells
        .par_iter()
        .map(|&(m, k)| {
            let eps = (exp.tf - exp.t0) / m as f64;
            let gap = ScaleOperator::k_family(k, eps).and_then(|op| trajectory_gap(&exp.spec, &cel, &op, exp.t0, m));
            match gap {
                Ok(g) => KCell { k, m, error: g, note: None },
                Err(e) => KCell { k, m, error: 3.0 * m as f64, note: Some(e.to_string()) },
            }
        })
        .collect())
}

pub fn cmd_error_surface(exp: &Experiment, grid: SurfaceGrid) -> Result<String> {
    let sweep = exp.sweep();
    match grid {
        SurfaceGrid::Gamma => {
            let cells = gamma_surface(exp, &sweep.gamma_grid.unwrap_or_default())?;
            let rows: Vec<Vec<String>> = cells
                .iter()
                .map(|c| vec![format_number(c.gamma_m1), format_number(c.gamma_1), format_number(c.metric)])
                .collect();
            table_csv(&["gamma_m1_re", "gamma_1_re", "metric"], &rows)
        }
        SurfaceGrid::K => {
            let ks = sweep.k_grid.unwrap_or_else(|| vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
            let ms = sweep.m_grid.unwrap_or_else(|| vec![50, 100, 200]);
            let cells = k_surface(exp, &ks, &ms)?;
            let rows: Vec<Vec<String>> = cells
                .iter()
                .map(|c| vec![format_number(c.k), c.m.to_string(), format_number(c.error)])
                .collect();
            table_csv(&["k", "M", "error"], &rows)
        }
    }
}

/// Step sizes default to `ε·2^{−r}`, `r = 0..5`, and the pencil to `ν = n`.
pub fn cmd_converge(exp: &Experiment) -> Result<(SweepResult, String)> {
    let sweep = exp.sweep();
    let eps = sweep
        .epsilons
        .clone()
        .unwrap_or_else(|| (0..6).map(|r| exp.epsilon / 2f64.powi(r)).collect());
    let nu = sweep.nu.unwrap_or(exp.spec.n as f64);
    let family = exp.family.clone();
    let result = epsilon_sweep(&exp.spec, |e| family.at(e), nu, &eps, sweep.k_radius)?;
    let opt = |x: Option<f64>| x.map(format_number).unwrap_or_default();
    let rows: Vec<Vec<String>> = result
        .points
        .iter()
        .map(|p| vec![format_number(p.epsilon), opt(p.distance), opt(p.pencil_error), p.note.clone().unwrap_or_default()])
        .collect();
    let csv = table_csv(&["epsilon", "hausdorff", "pencil_error", "note"], &rows)?;
    Ok((result, csv))
}

#[derive(Debug, Clone)]
pub struct ChoreoRun {
    pub period: f64,
    pub report: ChoreographyReport,
    pub trajectory: Trajectory,
}

fn choreo_amplitudes(exp: &Experiment, count: usize) -> Result<Vec<C64>> {
    match &exp.config.choreography {
        None => Ok(vec![C64::new(1.0, 0.0); count]),
        Some(c) => {
            let a = complex_pairs("choreography.amplitudes", &c.amplitudes_re, c.amplitudes_im.as_ref())?;
            if a.len() != count {
                return Err(Error::DimensionMismatch(format!("choreography needs {count} amplitudes, got {}", a.len())));
            }
            Ok(a)
        }
    }
}

pub fn cmd_choreo(exp: &Experiment, which: Which) -> Result<ChoreoRun> {
    let d = exp.spec.d;
    match which {
        Which::Cel => {
            let (ch, sol) = build_choreography_cel(&exp.spec, &choreo_amplitudes(exp, 2 * d)?)?;
            let report = verify_choreography(&ch, &sol);
            let times: Vec<f64> = (0..=exp.m).map(|k| ch.period * k as f64 / exp.m as f64).collect();
            Ok(ChoreoRun { period: ch.period, report, trajectory: Trajectory::from_solution(&sol, &times) })
        }
        Which::Del => {
            let count = 4 * exp.op.order() * d;
            let (ch, sol) = build_choreography_del(&exp.spec, &exp.op, exp.t0, exp.m, &choreo_amplitudes(exp, count)?)?;
            let report = verify_choreography(&ch, &sol.system);
            Ok(ChoreoRun { period: ch.period, report, trajectory: Trajectory::from_grid(&sol.sample()) })
        }
    }
}
