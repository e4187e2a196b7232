//! Pseudo-periodic solutions of the discrete Euler-Lagrange equations on the
//! grid `t0 + mε`, an independent recurrence march, and windowed residuals.
//!
//! Both discrete equations are handled in the form `P̃ x = source`, i.e.
//! `−[A□_{−ε}□_ε x + J5(□_ε − □_{−ε})x + C' x] − source = 0`.

use crate::celsolve::{assemble, basis_expansion, from_basis, solve_mode_system, Amplitudes, BoundaryReport, SystemSolution};
use crate::error::{Error, Result};
use crate::model::LagrangianSpec;
use crate::numkernel::{norm2, solve_vector, to_complex, to_complex_vec, CMatrix, CVector, C64, PIVOT_TOL};
use crate::pencil::{check_del_assumptions, transcendental_spectrum, TranscendentalPencil};
use crate::scaleop::{adjoint_box_apply, box_apply, GridFunction, ScaleOperator};

/// Grid samples of every particle and of the centre of mass.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryGrid {
    pub t0: f64,
    pub epsilon: f64,
    pub xs: Vec<CVector>,
    pub particles: Vec<Vec<CVector>>,
}

impl TrajectoryGrid {
    /// Index of the last node.
    pub fn last_node(&self) -> usize {
        self.xs.len().saturating_sub(1)
    }

    pub fn tf(&self) -> f64 {
        self.time(self.last_node())
    }

    pub fn time(&self, m: usize) -> f64 {
        self.t0 + m as f64 * self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.xs.first().map_or(0, |v| v.len())
    }

    /// Largest vector norm over all samples.
    pub fn max_norm(&self) -> f64 {
        self.particles
            .iter()
            .flatten()
            .chain(&self.xs)
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Largest absolute difference against another grid over nodes `range`.
    pub fn max_difference(&self, other: &TrajectoryGrid, range: std::ops::RangeInclusive<usize>) -> f64 {
        let mut worst = 0.0f64;
        for m in range {
            worst = worst.max((&self.xs[m] - &other.xs[m]).norm());
            for (a, b) in self.particles.iter().zip(&other.particles) {
                worst = worst.max((&a[m] - &b[m]).norm());
            }
        }
        worst
    }
}

/// A discrete solution valid on `[t0+2Nε, tf−2Nε]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelSolution {
    pub system: SystemSolution,
    pub op: ScaleOperator,
    pub t0: f64,
    /// Index of the last grid node, `tf = t0 + Mε`.
    pub m: usize,
}

impl DelSolution {
    pub fn tf(&self) -> f64 {
        self.t0 + self.m as f64 * self.op.epsilon()
    }

    /// Nodes whose full stencil stays inside `[t0, tf]`.
    pub fn interior_nodes(&self) -> std::ops::RangeInclusive<usize> {
        let w = 2 * self.op.order();
        w..=self.m.saturating_sub(w)
    }

    pub fn window(&self) -> (f64, f64) {
        let w = 2.0 * self.op.order() as f64 * self.op.epsilon();
        (self.t0 + w, self.tf() - w)
    }

    pub fn sample(&self) -> TrajectoryGrid {
        let eps = self.op.epsilon();
        let times: Vec<f64> = (0..=self.m).map(|k| self.t0 + k as f64 * eps).collect();
        TrajectoryGrid {
            t0: self.t0,
            epsilon: eps,
            xs: times.iter().map(|&t| self.system.xs.eval(t)).collect(),
            particles: self
                .system
                .particles
                .iter()
                .map(|p| times.iter().map(|&t| p.eval(t)).collect())
                .collect(),
        }
    }
}

/// Mode bases of the discrete problem.
#[derive(Debug, Clone)]
pub struct DelBasis {
    pub xs0: CVector,
    pub sum_basis: Vec<(C64, CVector)>,
    pub particle_basis: Vec<(C64, CVector)>,
}

fn discrete_basis(spec: &LagrangianSpec, op: &ScaleOperator, nu: f64) -> Result<Vec<(C64, CVector)>> {
    let p = TranscendentalPencil::new(spec, op, nu);
    let spectrum = transcendental_spectrum(&p)?;
    spectrum
        .pairs
        .iter()
        .map(|r| Ok((r.lambda, p.kernel_at(r.lambda)?)))
        .collect()
}

/// `s̄(0) = (1/ε)Σγ_j`, the action of `□_{−ε}` on constants.
fn adjoint_on_constants(op: &ScaleOperator) -> C64 {
    op.symbol_s_bar(C64::new(0.0, 0.0))
}

/// `n P̃_n(ε,0)⁻¹(J7 + s̄(0)J6)`.
pub fn sum_constant_del(spec: &LagrangianSpec, op: &ScaleOperator) -> Result<CVector> {
    let n = spec.n as f64;
    let p = TranscendentalPencil::new(spec, op, n);
    let rhs = to_complex_vec(&spec.j7) + to_complex_vec(&spec.j6) * adjoint_on_constants(op);
    let (x, _) = solve_vector(&p.eval_lambda(C64::new(0.0, 0.0)), &rhs)
        .map_err(|_| Error::AssumptionViolation("discrete sum pencil singular at zero".into()))?;
    Ok(x * C64::new(n, 0.0))
}

pub fn del_basis(spec: &LagrangianSpec, op: &ScaleOperator) -> Result<DelBasis> {
    check_del_assumptions(spec, op, spec.n).into_result()?;
    let xs0 = sum_constant_del(spec, op)?;
    let sum_basis = discrete_basis(spec, op, spec.n as f64)?;
    let particle_basis = if spec.n > 1 { discrete_basis(spec, op, 0.0)? } else { Vec::new() };
    Ok(DelBasis { xs0, sum_basis, particle_basis })
}

fn check_grid(op: &ScaleOperator, m: usize) -> Result<()> {
    if m < 4 * op.order() {
        return Err(Error::WindowExceeded(format!(
            "grid with {m} steps is shorter than the stencil width {}",
            4 * op.order()
        )));
    }
    Ok(())
}

/// Solution on the grid `t0 + kε`, `k = 0..=m`, with the given amplitudes.
pub fn general_solution_del(
    spec: &LagrangianSpec,
    op: &ScaleOperator,
    t0: f64,
    m: usize,
    amplitudes: &Amplitudes,
) -> Result<DelSolution> {
    check_grid(op, m)?;
    let basis = del_basis(spec, op)?;
    let system = from_basis(spec.n, basis.xs0, basis.sum_basis, basis.particle_basis, amplitudes)?;
    Ok(DelSolution { system, op: op.clone(), t0, m })
}

/// `P̃_0(ε,0)⁻¹[2(θ(0)J3 + J4)x̃_{s,0} + s̄(0)J6 + J7]`.
pub fn particle_constant_from_sum_del(spec: &LagrangianSpec, op: &ScaleOperator, xs0: &CVector) -> Result<CVector> {
    let zero = C64::new(0.0, 0.0);
    let p0 = TranscendentalPencil::new(spec, op, 0.0);
    let theta0 = op.symbol_s(zero) * op.symbol_s_bar(zero);
    let coupling = (to_complex(&spec.j3) * theta0 + to_complex(&spec.j4)) * C64::new(2.0, 0.0);
    let rhs = coupling * xs0 + to_complex_vec(&spec.j6) * adjoint_on_constants(op) + to_complex_vec(&spec.j7);
    Ok(solve_vector(&p0.eval_lambda(zero), &rhs)?.0)
}

/// `2P̃_0(ε,α)⁻¹(J4 + θ_α J3)x̃_{s,α}`.
pub fn particle_mode_from_sum_del(
    spec: &LagrangianSpec,
    op: &ScaleOperator,
    alpha: C64,
    xs_alpha: &CVector,
) -> Result<CVector> {
    let p0 = TranscendentalPencil::new(spec, op, 0.0);
    let theta = op.symbol_s(alpha) * op.symbol_s_bar(alpha);
    let coupling = (to_complex(&spec.j4) + to_complex(&spec.j3) * theta) * C64::new(2.0, 0.0);
    Ok(solve_vector(&p0.eval_lambda(alpha), &(coupling * xs_alpha))?.0)
}

/// Positions of every particle at the first and last `2N` grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowData {
    pub t0: f64,
    /// Index of the last node.
    pub m: usize,
    /// `start[j][i]` is particle `j` at node `i`, `i < 2N`.
    pub start: Vec<Vec<CVector>>,
    /// `end[j][i]` is particle `j` at node `m − 2N + 1 + i`.
    pub end: Vec<Vec<CVector>>,
}

impl WindowData {
    /// Samples the end windows of any time function per particle.
    pub fn from_fn(
        t0: f64,
        epsilon: f64,
        m: usize,
        width: usize,
        n: usize,
        f: impl Fn(usize, f64) -> CVector,
    ) -> Self {
        let start = (0..n)
            .map(|j| (0..width).map(|i| f(j, t0 + i as f64 * epsilon)).collect())
            .collect();
        let end = (0..n)
            .map(|j| {
                (0..width)
                    .map(|i| f(j, t0 + (m + 1 - width + i) as f64 * epsilon))
                    .collect()
            })
            .collect();
        Self { t0, m, start, end }
    }

    pub fn from_grid(grid: &TrajectoryGrid, width: usize) -> Self {
        let m = grid.last_node();
        Self {
            t0: grid.t0,
            m,
            start: grid.particles.iter().map(|p| p[..width].to_vec()).collect(),
            end: grid.particles.iter().map(|p| p[m + 1 - width..].to_vec()).collect(),
        }
    }
}

/// Dirichlet problem with `2N` nodes of data at each end of the grid.
pub fn dirichlet_del(
    spec: &LagrangianSpec,
    op: &ScaleOperator,
    data: &WindowData,
) -> Result<(DelSolution, BoundaryReport)> {
    let n = spec.n;
    let width = 2 * op.order();
    check_grid(op, data.m)?;
    let shape_ok = |rows: &Vec<Vec<CVector>>| {
        rows.len() == n && rows.iter().all(|r| r.len() == width && r.iter().all(|v| v.len() == spec.d))
    };
    if !shape_ok(&data.start) || !shape_ok(&data.end) {
        return Err(Error::DimensionMismatch(format!(
            "window data must hold {width} vectors of length {} per particle at each end",
            spec.d
        )));
    }
    let basis = del_basis(spec, op)?;
    let eps = op.epsilon();
    let times: Vec<f64> = (0..width)
        .map(|i| data.t0 + i as f64 * eps)
        .chain((0..width).map(|i| data.t0 + (data.m + 1 - width + i) as f64 * eps))
        .collect();
    let column = |j: usize| -> Vec<CVector> { data.start[j].iter().chain(&data.end[j]).cloned().collect() };
    let sum_data: Vec<CVector> = (0..2 * width)
        .map(|r| (0..n).fold(CVector::zeros(spec.d), |acc, j| acc + &column(j)[r]) - &basis.xs0)
        .collect();
    let (sum_amplitudes, cond) = solve_mode_system(&basis.sum_basis, &times, &sum_data)?;
    let mut conditions = vec![cond];
    let xs = basis_expansion(basis.xs0.clone(), &basis.sum_basis, &sum_amplitudes);
    let inv_n = C64::new(1.0 / n as f64, 0.0);
    let mut rows = Vec::with_capacity(n);
    if n == 1 {
        rows.push(Vec::new());
    } else {
        for j in 0..n {
            let local: Vec<CVector> = column(j)
                .iter()
                .zip(&times)
                .map(|(y, &t)| y - xs.eval(t) * inv_n)
                .collect();
            let (amps, cond) = solve_mode_system(&basis.particle_basis, &times, &local)?;
            conditions.push(cond);
            rows.push(amps);
        }
    }
    let system = assemble(basis.xs0, basis.sum_basis, basis.particle_basis, sum_amplitudes, rows);
    Ok((
        DelSolution { system, op: op.clone(), t0: data.t0, m: data.m },
        BoundaryReport { conditions },
    ))
}

/// Initial values for [`recurrence_march`]: nodes `0..4N` of `x_s` and of every particle.
#[derive(Debug, Clone, PartialEq)]
pub struct MarchSeeds {
    pub xs: Vec<CVector>,
    pub particles: Vec<Vec<CVector>>,
}

impl MarchSeeds {
    pub fn from_grid(grid: &TrajectoryGrid, count: usize) -> Self {
        Self {
            xs: grid.xs[..count].to_vec(),
            particles: grid.particles.iter().map(|p| p[..count].to_vec()).collect(),
        }
    }
}

/// Interior stencil blocks `L_k = −(A c_k + J5 e_k + C' δ_{k0})`, `k = −2N..2N`.
fn stencil(spec: &LagrangianSpec, op: &ScaleOperator, nu: f64) -> Vec<CMatrix> {
    let n = op.order() as i64;
    let theta = op.theta_laurent();
    let sigma = op.sigma_laurent();
    let (a, j5, c) = (to_complex(&spec.kinetic(nu)), to_complex(&spec.j5), to_complex(&spec.potential(nu)));
    (-2 * n..=2 * n)
        .map(|k| {
            let mut block = &a * theta[(k + 2 * n) as usize];
            if k.abs() <= n {
                block += &j5 * sigma[(k + n) as usize];
            }
            if k == 0 {
                block += &c;
            }
            -block
        })
        .collect()
}

/// Marches the interior recurrence forward to node `m`, `x_s` first, then each
/// particle driven by `x_s`. Every stencil used lies inside the grid.
pub fn recurrence_march(
    spec: &LagrangianSpec,
    op: &ScaleOperator,
    t0: f64,
    seeds: &MarchSeeds,
    m: usize,
) -> Result<TrajectoryGrid> {
    let w = 2 * op.order();
    let count = 2 * w;
    check_grid(op, m)?;
    let n = spec.n;
    if seeds.xs.len() != count || seeds.particles.len() != n || seeds.particles.iter().any(|p| p.len() != count) {
        return Err(Error::DimensionMismatch(format!("need {count} seed nodes for x_s and each of {n} particles")));
    }
    let zero = C64::new(0.0, 0.0);
    let forcing = to_complex_vec(&spec.j6) * op.symbol_s_bar(zero) + to_complex_vec(&spec.j7);
    let theta = op.theta_laurent();
    let (j3, j4) = (to_complex(&spec.j3), to_complex(&spec.j4));

    let march = |blocks: &[CMatrix], seed: &[CVector], rhs: &dyn Fn(usize) -> CVector| -> Result<Vec<CVector>> {
        let lead = &blocks[2 * w];
        let scale = lead.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let lu = lead.clone().lu();
        let min_pivot = (0..lead.nrows()).map(|i| lu.u()[(i, i)].norm()).fold(f64::INFINITY, f64::min);
        if scale == 0.0 || min_pivot < PIVOT_TOL * scale {
            return Err(Error::LeadingBlockSingular);
        }
        let mut x = seed.to_vec();
        for centre in w..=m - w {
            let mut b = rhs(centre);
            for (idx, block) in blocks.iter().enumerate().take(2 * w) {
                b -= block * &x[centre + idx - w];
            }
            x.push(lu.solve(&b).ok_or(Error::LeadingBlockSingular)?);
        }
        Ok(x)
    };

    let sum_blocks = stencil(spec, op, n as f64);
    let nf = C64::new(n as f64, 0.0);
    let xs = march(&sum_blocks, &seeds.xs, &|_| &forcing * nf)?;

    let particle_blocks = stencil(spec, op, 0.0);
    let coupling: Vec<CMatrix> = (0..=2 * w)
        .map(|idx| {
            let mut b = &j3 * (theta[idx] * 2.0);
            if idx == w {
                b += &j4 * C64::new(2.0, 0.0);
            }
            b
        })
        .collect();
    let source = |centre: usize| {
        let mut acc = forcing.clone();
        for (idx, b) in coupling.iter().enumerate() {
            acc += b * &xs[centre + idx - w];
        }
        acc
    };
    let particles = seeds
        .particles
        .iter()
        .map(|seed| march(&particle_blocks, seed, &source))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryGrid { t0, epsilon: op.epsilon(), xs, particles })
}

/// Windowed residuals at one node.
pub use crate::celsolve::Residual;

fn grid_of(values: &[CVector], t0: f64, eps: f64) -> Result<GridFunction> {
    GridFunction::new(t0, eps, values.to_vec())
}

/// `A□_{−ε}□_ε x + J5(□_ε − □_{−ε})x + C'x` at node `m`, with all window factors.
fn windowed_operator(
    op: &ScaleOperator,
    a: &CMatrix,
    j5: &CMatrix,
    c: &CMatrix,
    f: &GridFunction,
    boxed: &GridFunction,
    m: usize,
    t0: f64,
    tf: f64,
) -> Result<(CVector, CVector, CVector)> {
    let second = adjoint_box_apply(op, boxed, m, t0, tf)?;
    let first = box_apply(op, f, m, t0, tf)? - adjoint_box_apply(op, f, m, t0, tf)?;
    let value = a * &second + j5 * first + c * &f.values[m];
    Ok((value, second, f.values[m].clone()))
}

fn boxed_grid(op: &ScaleOperator, f: &GridFunction, t0: f64, tf: f64) -> Result<GridFunction> {
    let values = (0..f.len()).map(|k| box_apply(op, f, k, t0, tf)).collect::<Result<Vec<_>>>()?;
    GridFunction::new(f.t0, f.epsilon, values)
}

/// Residuals of both discrete equations at every node, with `tf` the last grid node.
pub fn residual_del_all(spec: &LagrangianSpec, op: &ScaleOperator, traj: &TrajectoryGrid) -> Result<Vec<Residual>> {
    if (traj.epsilon - op.epsilon()).abs() > 1e-12 * op.epsilon() {
        return Err(Error::DimensionMismatch("trajectory step differs from operator step".into()));
    }
    let n = traj.particles.len();
    let (t0, tf, eps) = (traj.t0, traj.tf(), traj.epsilon);
    let forcing_j6 = to_complex_vec(&spec.j6);
    let j7 = to_complex_vec(&spec.j7);
    let j5 = to_complex(&spec.j5);
    let (a_n, c_n) = (to_complex(&spec.kinetic(n as f64)), to_complex(&spec.potential(n as f64)));
    let (a_0, c_0) = (to_complex(&spec.kinetic(0.0)), to_complex(&spec.potential(0.0)));
    let (j3, j4) = (to_complex(&spec.j3), to_complex(&spec.j4));

    let xs = grid_of(&traj.xs, t0, eps)?;
    let xs_boxed = boxed_grid(op, &xs, t0, tf)?;
    // □_{−ε} of the constant J6, windowed
    let ones = GridFunction::new(t0, eps, vec![CVector::from_element(1, C64::new(1.0, 0.0)); traj.xs.len()])?;
    let particle_grids = traj
        .particles
        .iter()
        .map(|p| {
            let g = grid_of(p, t0, eps)?;
            let b = boxed_grid(op, &g, t0, tf)?;
            Ok((g, b))
        })
        .collect::<Result<Vec<_>>>()?;

    (0..traj.xs.len())
        .map(|m| {
            let adj_one = adjoint_box_apply(op, &ones, m, t0, tf)?[0];
            let drive = &forcing_j6 * adj_one + &j7;
            let (lhs, xs_second, xs_here) = windowed_operator(op, &a_n, &j5, &c_n, &xs, &xs_boxed, m, t0, tf)?;
            let sum = -lhs - &drive * C64::new(n as f64, 0.0);
            let source = &j3 * &xs_second * C64::new(2.0, 0.0) + &j4 * &xs_here * C64::new(2.0, 0.0) + &drive;
            let particles = particle_grids
                .iter()
                .map(|(g, b)| {
                    let (lhs, _, _) = windowed_operator(op, &a_0, &j5, &c_0, g, b, m, t0, tf)?;
                    Ok(-lhs - &source)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Residual { sum, particles })
        })
        .collect()
}

/// Residual at a single node.
pub fn residual_del(spec: &LagrangianSpec, op: &ScaleOperator, traj: &TrajectoryGrid, m: usize) -> Result<Residual> {
    if m > traj.last_node() {
        return Err(Error::OutOfRange(format!("node {m} beyond last node {}", traj.last_node())));
    }
    Ok(residual_del_all(spec, op, traj)?.swap_remove(m))
}

/// Magnitude against which discrete residuals are judged:
/// `(1 + max|x|)·(‖A_n‖Σ|c_k| + ‖J5‖Σ|e_k| + ‖C'_n‖ + ‖J7‖)`.
pub fn residual_scale(spec: &LagrangianSpec, op: &ScaleOperator, traj: &TrajectoryGrid) -> f64 {
    let n = traj.particles.len() as f64;
    let theta: f64 = op.theta_laurent().iter().map(|c| c.norm()).sum();
    let sigma: f64 = op.sigma_laurent().iter().map(|c| c.norm()).sum();
    let op_scale = norm2(&spec.kinetic(n)) * theta
        + norm2(&spec.j5) * sigma
        + norm2(&spec.potential(n))
        + spec.j7.norm()
        + spec.j6.norm() * op.symbol_s_bar(C64::new(0.0, 0.0)).norm();
    (1.0 + traj.max_norm()) * op_scale
}

/// `L_{2N}` for the particle recurrence, exposed for diagnostics.
pub fn leading_block(spec: &LagrangianSpec, op: &ScaleOperator, nu: f64) -> CMatrix {
    stencil(spec, op, nu).pop().expect("stencil is nonempty")
}
