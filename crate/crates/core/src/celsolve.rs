//! Pseudo-periodic solutions of the classical Euler-Lagrange equations.
//!
//! The centre of mass `x_s = Σ x_j` obeys the `ν = n` pencil and each particle
//! is `x_s/n` plus free modes of the `ν = 0` pencil whose amplitudes sum to zero
//! over the particles.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{LagrangianSpec, ParticleState};
use crate::numkernel::{solve_square, solve_vector, to_complex, to_complex_vec, CMatrix, CVector, C64, ILL_CONDITIONED};
use crate::pencil::{check_cel_assumptions, classical_spectrum, ClassicalPencil};

/// `u(t) = u0 + Σ e^{λℓ t} uℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeExpansion {
    pub u0: CVector,
    pub modes: Vec<(C64, CVector)>,
}

impl ModeExpansion {
    pub fn constant(u0: CVector) -> Self {
        Self { u0, modes: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.u0.len()
    }

    pub fn eval(&self, t: f64) -> CVector {
        self.derivative(t, 0)
    }

    /// Exact `k`-th time derivative.
    pub fn derivative(&self, t: f64, k: u32) -> CVector {
        let mut out = if k == 0 { self.u0.clone() } else { CVector::zeros(self.dim()) };
        for (lambda, u) in &self.modes {
            out += u * ((lambda * t).exp() * lambda.powu(k));
        }
        out
    }

    /// `self + other * factor`, merging equal exponents.
    pub fn add_scaled(&self, other: &ModeExpansion, factor: C64) -> ModeExpansion {
        let mut out = self.clone();
        out.u0 += &other.u0 * factor;
        for (lambda, u) in &other.modes {
            if let Some(slot) = out.modes.iter_mut().find(|(l, _)| (l - lambda).norm() <= 1e-12 * (1.0 + lambda.norm())) {
                slot.1 += u * factor;
            } else {
                out.modes.push((*lambda, u * factor));
            }
        }
        out
    }

    pub fn scaled(&self, factor: C64) -> ModeExpansion {
        ModeExpansion {
            u0: &self.u0 * factor,
            modes: self.modes.iter().map(|(l, u)| (*l, u * factor)).collect(),
        }
    }

    /// Amplitude magnitude `|u0| + Σ|uℓ|`.
    pub fn magnitude(&self) -> f64 {
        self.u0.norm() + self.modes.iter().map(|(_, u)| u.norm()).sum::<f64>()
    }
}

/// Free parameters of a solution: one amplitude per root of the sum pencil and,
/// for particles `1..n−1`, one per root of the particle pencil. The last
/// particle's amplitudes are minus the sum of the others.
#[derive(Debug, Clone, PartialEq)]
pub struct Amplitudes {
    pub sum: Vec<C64>,
    pub particles: Vec<Vec<C64>>,
}

impl Amplitudes {
    pub fn zero(n: usize, modes: usize) -> Self {
        Self {
            sum: vec![C64::new(0.0, 0.0); modes],
            particles: vec![vec![C64::new(0.0, 0.0); modes]; n.saturating_sub(1)],
        }
    }
}

/// Centre of mass and particles, all sharing one set of mode bases.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSolution {
    pub xs: ModeExpansion,
    pub particles: Vec<ModeExpansion>,
    /// Roots of the sum pencil with unit kernel directions.
    pub sum_basis: Vec<(C64, CVector)>,
    /// Roots of the particle pencil with unit kernel directions (empty for one particle).
    pub particle_basis: Vec<(C64, CVector)>,
    pub sum_amplitudes: Vec<C64>,
    /// All `n` rows, the last one eliminated.
    pub particle_amplitudes: Vec<Vec<C64>>,
}

impl SystemSolution {
    pub fn n(&self) -> usize {
        self.particles.len()
    }

    /// Positions of every particle at `t`, one row per particle.
    pub fn positions(&self, t: f64) -> CMatrix {
        let d = self.xs.dim();
        let mut out = CMatrix::zeros(self.n(), d);
        for (j, p) in self.particles.iter().enumerate() {
            out.set_row(j, &p.eval(t).transpose());
        }
        out
    }

    /// Real parts of positions and velocities.
    pub fn state_at(&self, t: f64) -> ParticleState {
        let d = self.xs.dim();
        let mut positions = DMatrix::zeros(self.n(), d);
        let mut velocities = DMatrix::zeros(self.n(), d);
        for (j, p) in self.particles.iter().enumerate() {
            let x = p.eval(t);
            let v = p.derivative(t, 1);
            for k in 0..d {
                positions[(j, k)] = x[k].re;
                velocities[(j, k)] = v[k].re;
            }
        }
        ParticleState { positions, velocities }
    }

    /// `max |Σ_j x_j(t) − x_s(t)|` over the given times.
    pub fn sum_defect(&self, times: &[f64]) -> f64 {
        times
            .iter()
            .map(|&t| {
                let total = self.particles.iter().fold(CVector::zeros(self.xs.dim()), |acc, p| acc + p.eval(t));
                (total - self.xs.eval(t)).norm()
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn basis_expansion(u0: CVector, basis: &[(C64, CVector)], amplitudes: &[C64]) -> ModeExpansion {
    ModeExpansion {
        u0,
        modes: basis.iter().zip(amplitudes).map(|((l, v), a)| (*l, v * *a)).collect(),
    }
}

/// Completes the free particle amplitudes with the eliminated last row.
pub(crate) fn complete_particle_amplitudes(n: usize, modes: usize, free: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
    if n == 1 {
        return Ok(vec![Vec::new()]);
    }
    if free.len() != n - 1 || free.iter().any(|row| row.len() != modes) {
        return Err(Error::DimensionMismatch(format!(
            "expected {} particle amplitude rows of length {modes}",
            n - 1
        )));
    }
    let mut rows = free.to_vec();
    let last = (0..modes)
        .map(|k| -free.iter().map(|row| row[k]).sum::<C64>())
        .collect();
    rows.push(last);
    Ok(rows)
}

pub(crate) fn assemble(
    xs0: CVector,
    sum_basis: Vec<(C64, CVector)>,
    particle_basis: Vec<(C64, CVector)>,
    sum_amplitudes: Vec<C64>,
    particle_amplitudes: Vec<Vec<C64>>,
) -> SystemSolution {
    let n = particle_amplitudes.len();
    let xs = basis_expansion(xs0, &sum_basis, &sum_amplitudes);
    let share = xs.scaled(C64::new(1.0 / n as f64, 0.0));
    let particles = particle_amplitudes
        .iter()
        .map(|row| {
            if particle_basis.is_empty() {
                share.clone()
            } else {
                share.add_scaled(&basis_expansion(CVector::zeros(xs.dim()), &particle_basis, row), C64::new(1.0, 0.0))
            }
        })
        .collect();
    SystemSolution {
        xs,
        particles,
        sum_basis,
        particle_basis,
        sum_amplitudes,
        particle_amplitudes,
    }
}

fn classical_basis(spec: &LagrangianSpec, nu: f64) -> Result<Vec<(C64, CVector)>> {
    let p = ClassicalPencil::new(spec, nu);
    let roots = classical_spectrum(&p)?;
    roots.roots().iter().map(|&r| Ok((r, p.kernel_at(r)?))).collect()
}

/// Mode bases and constant term shared by every classical solution of `spec`.
#[derive(Debug, Clone)]
pub struct CelBasis {
    pub xs0: CVector,
    pub sum_basis: Vec<(C64, CVector)>,
    pub particle_basis: Vec<(C64, CVector)>,
}

pub fn cel_basis(spec: &LagrangianSpec) -> Result<CelBasis> {
    let n = spec.n;
    check_cel_assumptions(spec, n).into_result()?;
    let cn = to_complex(&spec.potential(n as f64));
    let (x, _) = solve_vector(&cn, &to_complex_vec(&spec.j7)).map_err(|_| Error::AssumptionViolation("sum pencil singular at zero".into()))?;
    let xs0 = x * C64::new(-(n as f64), 0.0);
    let sum_basis = classical_basis(spec, n as f64)?;
    let particle_basis = if n > 1 { classical_basis(spec, 0.0)? } else { Vec::new() };
    Ok(CelBasis { xs0, sum_basis, particle_basis })
}

/// Solution with the given mode amplitudes.
pub fn general_solution_cel(spec: &LagrangianSpec, amplitudes: &Amplitudes) -> Result<SystemSolution> {
    let basis = cel_basis(spec)?;
    from_basis(spec.n, basis.xs0, basis.sum_basis, basis.particle_basis, amplitudes)
}

pub(crate) fn from_basis(
    n: usize,
    xs0: CVector,
    sum_basis: Vec<(C64, CVector)>,
    particle_basis: Vec<(C64, CVector)>,
    amplitudes: &Amplitudes,
) -> Result<SystemSolution> {
    if amplitudes.sum.len() != sum_basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} sum amplitudes, got {}",
            sum_basis.len(),
            amplitudes.sum.len()
        )));
    }
    let rows = complete_particle_amplitudes(n, particle_basis.len(), &amplitudes.particles)?;
    Ok(assemble(xs0, sum_basis, particle_basis, amplitudes.sum.clone(), rows))
}

/// `−(J2−2J4)⁻¹(2J4 x_{s,0} + J7)`, the particle constant implied by the sum constant.
pub fn particle_constant_from_sum(spec: &LagrangianSpec, xs0: &CVector) -> Result<CVector> {
    let rhs = to_complex(&spec.j4) * xs0 * C64::new(2.0, 0.0) + to_complex_vec(&spec.j7);
    let (x, _) = solve_vector(&to_complex(&spec.potential(0.0)), &rhs)?;
    Ok(-x)
}

/// `2P_0(α)⁻¹(J4 − α²J3) x_{s,α}`, the particle share of a sum mode.
pub fn particle_mode_from_sum(spec: &LagrangianSpec, alpha: C64, xs_alpha: &CVector) -> Result<CVector> {
    let p0 = crate::pencil::classical_eval(&ClassicalPencil::new(spec, 0.0), alpha);
    let m = (to_complex(&spec.j4) - to_complex(&spec.j3) * (alpha * alpha)) * C64::new(2.0, 0.0);
    Ok(solve_vector(&p0, &(m * xs_alpha))?.0)
}

/// Position data of every particle at the two endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointData {
    pub t0: f64,
    pub tf: f64,
    pub start: Vec<CVector>,
    pub end: Vec<CVector>,
}

impl EndpointData {
    pub fn real(t0: f64, tf: f64, start: &DMatrix<f64>, end: &DMatrix<f64>) -> Self {
        let rows = |m: &DMatrix<f64>| (0..m.nrows()).map(|j| to_complex_vec(&m.row(j).transpose())).collect();
        Self { t0, tf, start: rows(start), end: rows(end) }
    }
}

/// Condition numbers of the `n+1` boundary systems (sum first).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryReport {
    pub conditions: Vec<f64>,
}

impl BoundaryReport {
    pub fn worst(&self) -> f64 {
        self.conditions.iter().copied().fold(0.0, f64::max)
    }
}

/// Solves `Σ_ℓ a_ℓ e^{λℓ t_r} vℓ = data_r` for the amplitudes, one block row per time.
pub(crate) fn solve_mode_system(
    basis: &[(C64, CVector)],
    times: &[f64],
    data: &[CVector],
) -> Result<(Vec<C64>, f64)> {
    let d = basis.first().map_or(0, |(_, v)| v.len());
    let rows = times.len() * d;
    if rows != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} boundary equations for {} amplitudes",
            rows,
            basis.len()
        )));
    }
    let mut a = CMatrix::zeros(rows, basis.len());
    let mut b = CMatrix::zeros(rows, 1);
    for (r, (&t, y)) in times.iter().zip(data).enumerate() {
        for (c, (lambda, v)) in basis.iter().enumerate() {
            let e = (lambda * t).exp();
            for k in 0..d {
                a[(r * d + k, c)] = v[k] * e;
            }
        }
        for k in 0..d {
            b[(r * d + k, 0)] = y[k];
        }
    }
    let solved = solve_square(&a, &b).map_err(|_| Error::SingularBoundarySystem { condition: f64::INFINITY })?;
    if solved.condition > ILL_CONDITIONED {
        return Err(Error::SingularBoundarySystem { condition: solved.condition });
    }
    Ok((solved.x.column(0).iter().copied().collect(), solved.condition))
}

/// Dirichlet problem: positions of all particles at `t0` and `tf`.
pub fn dirichlet_cel(spec: &LagrangianSpec, data: &EndpointData) -> Result<(SystemSolution, BoundaryReport)> {
    let n = spec.n;
    if data.start.len() != n || data.end.len() != n || data.start.iter().chain(&data.end).any(|v| v.len() != spec.d) {
        return Err(Error::DimensionMismatch(format!("boundary data must hold {n} vectors of length {} at each end", spec.d)));
    }
    let basis = cel_basis(spec)?;
    let times = [data.t0, data.tf];
    let total = |rows: &[CVector]| rows.iter().fold(CVector::zeros(spec.d), |acc, v| acc + v);
    let sum_data = [total(&data.start) - &basis.xs0, total(&data.end) - &basis.xs0];
    let (sum_amplitudes, cond) = solve_mode_system(&basis.sum_basis, &times, &sum_data)?;
    let mut conditions = vec![cond];
    let xs = basis_expansion(basis.xs0.clone(), &basis.sum_basis, &sum_amplitudes);
    let inv_n = C64::new(1.0 / n as f64, 0.0);
    let mut rows = Vec::with_capacity(n);
    if n == 1 {
        rows.push(Vec::new());
    } else {
        for j in 0..n {
            let local = [
                &data.start[j] - xs.eval(data.t0) * inv_n,
                &data.end[j] - xs.eval(data.tf) * inv_n,
            ];
            let (amps, cond) = solve_mode_system(&basis.particle_basis, &times, &local)?;
            conditions.push(cond);
            rows.push(amps);
        }
    }
    Ok((
        assemble(basis.xs0, basis.sum_basis, basis.particle_basis, sum_amplitudes, rows),
        BoundaryReport { conditions },
    ))
}

/// Left minus right of both classical equations at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub sum: CVector,
    pub particles: Vec<CVector>,
}

impl Residual {
    pub fn max_norm(&self) -> f64 {
        self.particles.iter().map(|r| r.norm()).fold(self.sum.norm(), f64::max)
    }
}

/// Sum equation `A_nẍ_s − 2J5ẋ_s − (J2+2(n−1)J4)x_s − nJ7` and particle equation
/// `(J1−2J3)ẍ_j − 2J5ẋ_j − (J2−2J4)x_j + 2J3ẍ_s − 2J4x_s − J7`.
pub fn residual_cel(spec: &LagrangianSpec, sol: &SystemSolution, t: f64) -> Residual {
    let n = sol.n() as f64;
    let (a_n, c_n) = (to_complex(&spec.kinetic(n)), to_complex(&spec.potential(n)));
    let (a_0, c_0) = (to_complex(&spec.kinetic(0.0)), to_complex(&spec.potential(0.0)));
    let j5 = to_complex(&spec.j5) * C64::new(2.0, 0.0);
    let j7 = to_complex_vec(&spec.j7);
    let (j3, j4) = (to_complex(&spec.j3), to_complex(&spec.j4));
    let derivs = |u: &ModeExpansion| (u.eval(t), u.derivative(t, 1), u.derivative(t, 2));
    let (xs, vs, acs) = derivs(&sol.xs);
    let sum = &a_n * &acs - &j5 * &vs - &c_n * &xs - &j7 * C64::new(n, 0.0);
    let source = &j3 * &acs * C64::new(-2.0, 0.0) + &j4 * &xs * C64::new(2.0, 0.0) + &j7;
    let particles = sol
        .particles
        .iter()
        .map(|p| {
            let (x, v, a) = derivs(p);
            &a_0 * a - &j5 * v - &c_0 * x - &source
        })
        .collect();
    Residual { sum, particles }
}

/// Largest `|x(t)|` over the supplied times, for relative tolerances.
pub fn trajectory_scale(sol: &SystemSolution, times: &[f64]) -> f64 {
    times
        .iter()
        .flat_map(|&t| sol.particles.iter().map(move |p| p.eval(t).norm()))
        .fold(0.0, f64::max)
}
