//! Commensurability of spectra, minimal periods, and choreographies in which
//! particle `j` runs along one closed curve with delay `jT/n`.

use std::f64::consts::PI;

use num_integer::Integer;

use crate::celsolve::{residual_cel, ModeExpansion, SystemSolution};
use crate::delsolve::{residual_del_all, residual_scale, DelSolution};
use crate::error::{Error, Result};
use crate::model::LagrangianSpec;
use crate::numkernel::{norm2, solve_vector, to_complex_vec, CVector, C64};
use crate::pencil::{
    classical_eval, classical_spectrum, lambda_tolerance, transcendental_spectrum, ClassicalPencil,
    TranscendentalPencil,
};
use crate::scaleop::ScaleOperator;

pub const RATIO_TOL: f64 = 1e-9;
pub const MAX_DENOMINATOR: i64 = 64;

/// A reduced fraction with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

impl Ratio {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = num.gcd(&den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Self { num: sign * num / g, den: sign * den / g }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn mul(self, other: Ratio) -> Ratio {
        Ratio::new(self.num * other.num, self.den * other.den)
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Best continued-fraction convergent of `x` with denominator at most `max_den`
/// lying within `tol·max(1,|x|)`; `None` if no convergent qualifies.
pub fn rational_approximation(x: f64, tol: f64, max_den: i64) -> Option<Ratio> {
    if !x.is_finite() {
        return None;
    }
    let bound = tol * x.abs().max(1.0);
    let (mut h0, mut h1) = (1i64, x.floor() as i64);
    let (mut k0, mut k1) = (0i64, 1i64);
    let mut rest = x - x.floor();
    loop {
        if (x - h1 as f64 / k1 as f64).abs() <= bound {
            return Some(Ratio::new(h1, k1));
        }
        if rest.abs() < 1e-300 {
            return None;
        }
        let inv = 1.0 / rest;
        let a = inv.floor();
        rest = inv - a;
        let a = a as i64;
        let (h2, k2) = (a.checked_mul(h1)?.checked_add(h0)?, a.checked_mul(k1)?.checked_add(k0)?);
        if k2 > max_den {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
}

/// Outcome of the commensurability analysis of a set of eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct CommensurabilityReport {
    pub all_imaginary: bool,
    /// `|Im λ|` of the reference root (smallest nonzero frequency).
    pub reference: f64,
    /// `Im λℓ / reference` per root, `None` when unresolved.
    pub ratios: Vec<Option<Ratio>>,
    /// `s` with `T = 2πs/reference`.
    pub period_multiple: Option<Ratio>,
    pub period: Option<f64>,
    pub max_denominator_used: i64,
}

impl CommensurabilityReport {
    pub fn is_periodic(&self) -> bool {
        self.period.is_some()
    }
}

/// Decides whether every `e^{λt}` shares a common period and returns the least one.
pub fn commensurability(roots: &[C64], tol: f64, max_den: i64) -> Result<CommensurabilityReport> {
    if roots.is_empty() {
        return Err(Error::EmptySet);
    }
    let all_imaginary = roots.iter().all(|r| r.re.abs() <= tol * r.norm().max(1.0));
    let reference = roots
        .iter()
        .map(|r| r.im.abs())
        .filter(|&w| w > tol)
        .fold(f64::INFINITY, f64::min);
    if !reference.is_finite() {
        return Ok(CommensurabilityReport {
            all_imaginary,
            reference: 0.0,
            ratios: vec![None; roots.len()],
            period_multiple: None,
            period: None,
            max_denominator_used: 0,
        });
    }
    let ratios: Vec<Option<Ratio>> = roots
        .iter()
        .map(|r| rational_approximation(r.im / reference, tol, max_den))
        .collect();
    let max_denominator_used = ratios.iter().flatten().map(|r| r.den).max().unwrap_or(0);
    let mut period_multiple = None;
    if all_imaginary && ratios.iter().all(Option::is_some) {
        let (mut l, mut g) = (1i64, 0i64);
        for r in ratios.iter().flatten() {
            l = l.lcm(&r.den);
            g = g.gcd(&r.num.abs());
        }
        if g > 0 {
            period_multiple = Some(Ratio::new(l, g));
        }
    }
    let period = period_multiple.map(|s| 2.0 * PI * s.value() / reference);
    Ok(CommensurabilityReport {
        all_imaginary,
        reference,
        ratios,
        period_multiple,
        period,
        max_denominator_used,
    })
}

/// Periodicity of all classical solutions: analysis of `Q_n ∪ Q_0`.
pub fn is_periodic_cel(spec: &LagrangianSpec) -> Result<CommensurabilityReport> {
    let mut roots = classical_spectrum(&ClassicalPencil::new(spec, spec.n as f64))?.roots().to_vec();
    if spec.n > 1 {
        roots.extend_from_slice(classical_spectrum(&ClassicalPencil::new(spec, 0.0))?.roots());
    }
    commensurability(&roots, RATIO_TOL, MAX_DENOMINATOR)
}

/// Periodicity of all discrete solutions: analysis of `Q̃_n ∪ Q̃_0`.
pub fn is_periodic_del(spec: &LagrangianSpec, op: &ScaleOperator) -> Result<CommensurabilityReport> {
    let mut roots = transcendental_spectrum(&TranscendentalPencil::new(spec, op, spec.n as f64))?
        .lambdas
        .roots()
        .to_vec();
    if spec.n > 1 {
        roots.extend_from_slice(transcendental_spectrum(&TranscendentalPencil::new(spec, op, 0.0))?.lambdas.roots());
    }
    commensurability(&roots, RATIO_TOL, MAX_DENOMINATOR)
}

/// `x_j(t) = u(t + jT/n)`, `j = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Choreography {
    pub u: ModeExpansion,
    pub n: usize,
    pub period: f64,
    pub delay: f64,
}

impl Choreography {
    pub fn particle(&self, j: usize, t: f64) -> CVector {
        self.u.eval(t + j as f64 * self.delay)
    }
}

fn mode_tolerance(lambda: C64) -> f64 {
    RATIO_TOL * lambda.norm().max(1.0)
}

/// Validates `Q ⊂ iR*`, finds the period, and rejects resonant delays for active modes.
fn period_and_resonance(roots: &[C64], amplitudes: &[C64], n: usize, simple_count: usize) -> Result<(f64, Ratio, f64)> {
    if roots.len() != simple_count {
        return Err(Error::NotChoreographic(format!(
            "particle spectrum has {} roots, expected {simple_count}",
            roots.len()
        )));
    }
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            if (roots[i] - roots[j]).norm() <= lambda_tolerance(roots[i], roots[j]) {
                return Err(Error::NotChoreographic("particle spectrum has a repeated root".into()));
            }
        }
    }
    if let Some(bad) = roots.iter().find(|r| r.re.abs() > mode_tolerance(**r) || r.im.abs() <= mode_tolerance(**r)) {
        return Err(Error::NotChoreographic(format!("root {bad} is not purely imaginary and nonzero")));
    }
    let report = commensurability(roots, RATIO_TOL, MAX_DENOMINATOR)?;
    let (s, period) = match (report.period_multiple, report.period) {
        (Some(s), Some(t)) => (s, t),
        _ => return Err(Error::NotChoreographic("particle frequencies are incommensurable".into())),
    };
    for ((root, ratio), amp) in roots.iter().zip(&report.ratios).zip(amplitudes) {
        if amp.norm() == 0.0 {
            continue;
        }
        // λT/(2πi n) = ratio·s/n
        let turns = ratio.expect("resolved").mul(s).mul(Ratio::new(1, n as i64));
        if turns.is_integer() {
            return Err(Error::DelayResonant { lambda: format!("{root}") });
        }
    }
    Ok((period, s, report.reference))
}

fn shifted_rows(basis: &[(C64, CVector)], amplitudes: &[C64], n: usize, delay: f64) -> Vec<Vec<C64>> {
    (0..n)
        .map(|j| {
            basis
                .iter()
                .zip(amplitudes)
                .map(|((l, _), a)| a * (l * (j as f64 * delay)).exp())
                .collect()
        })
        .collect()
}

fn choreography_solution(
    u0: CVector,
    basis: Vec<(C64, CVector)>,
    amplitudes: &[C64],
    n: usize,
    period: f64,
) -> (Choreography, SystemSolution) {
    let delay = period / n as f64;
    let u = crate::celsolve::basis_expansion(u0.clone(), &basis, amplitudes);
    let rows = shifted_rows(&basis, amplitudes, n, delay);
    let particles = rows
        .iter()
        .map(|row| crate::celsolve::basis_expansion(u0.clone(), &basis, row))
        .collect();
    let system = SystemSolution {
        xs: ModeExpansion::constant(&u0 * C64::new(n as f64, 0.0)),
        particles,
        sum_basis: Vec::new(),
        particle_basis: basis,
        sum_amplitudes: Vec::new(),
        particle_amplitudes: rows,
    };
    (Choreography { u, n, period, delay }, system)
}

/// Classical choreography with the given amplitudes on the roots of `P_0`.
pub fn build_choreography_cel(spec: &LagrangianSpec, amplitudes: &[C64]) -> Result<(Choreography, SystemSolution)> {
    let n = spec.n;
    let p0 = ClassicalPencil::new(spec, 0.0);
    let roots = classical_spectrum(&p0)?.roots().to_vec();
    if amplitudes.len() != roots.len() {
        return Err(Error::DimensionMismatch(format!("expected {} amplitudes", roots.len())));
    }
    let (period, _, _) = period_and_resonance(&roots, amplitudes, n, 2 * spec.d)?;
    let pn0 = classical_eval(&ClassicalPencil::new(spec, n as f64), C64::new(0.0, 0.0));
    let (u0, _) = solve_vector(&pn0, &to_complex_vec(&spec.j7))
        .map_err(|_| Error::NotChoreographic("sum pencil is singular at zero".into()))?;
    let basis = roots.iter().map(|&r| Ok((r, p0.kernel_at(r)?))).collect::<Result<Vec<_>>>()?;
    let (ch, sol) = choreography_solution(u0, basis, amplitudes, n, period);
    let w2 = roots.iter().map(|r| r.norm_sqr()).fold(0.0, f64::max);
    let scale = (1.0 + ch.u.magnitude())
        * (norm2(&spec.kinetic(n as f64)) * w2 + norm2(&spec.j5) * w2.sqrt() + norm2(&spec.potential(n as f64)) + 1.0);
    for i in 0..16 {
        let t = period * (i as f64 + 0.37) / 16.0;
        let r = residual_cel(spec, &sol, t).max_norm();
        if r > 1e-10 * scale {
            return Err(Error::NumericalFailure(format!("choreography residual {r:.3e} at t = {t}")));
        }
    }
    Ok((ch, sol))
}

/// Discrete choreography on the grid `t0 + kε`, `k = 0..=m`, with amplitudes on the roots of `P̃_0`.
pub fn build_choreography_del(
    spec: &LagrangianSpec,
    op: &ScaleOperator,
    t0: f64,
    m: usize,
    amplitudes: &[C64],
) -> Result<(Choreography, DelSolution)> {
    let n = spec.n;
    let p0 = TranscendentalPencil::new(spec, op, 0.0);
    let spectrum = transcendental_spectrum(&p0)?;
    let roots: Vec<C64> = spectrum.pairs.iter().map(|r| r.lambda).collect();
    if amplitudes.len() != roots.len() {
        return Err(Error::DimensionMismatch(format!("expected {} amplitudes", roots.len())));
    }
    let (period, _, _) = period_and_resonance(&roots, amplitudes, n, 4 * op.order() * spec.d)?;
    let pn = TranscendentalPencil::new(spec, op, n as f64);
    let zero = C64::new(0.0, 0.0);
    let rhs = to_complex_vec(&spec.j7) + to_complex_vec(&spec.j6) * op.symbol_s_bar(zero);
    let (u0, _) = solve_vector(&pn.eval_lambda(zero), &rhs)
        .map_err(|_| Error::NotChoreographic("discrete sum pencil is singular at zero".into()))?;
    let basis = roots.iter().map(|&r| Ok((r, p0.kernel_at(r)?))).collect::<Result<Vec<_>>>()?;
    let (ch, system) = choreography_solution(u0, basis, amplitudes, n, period);
    let sol = DelSolution { system, op: op.clone(), t0, m };
    let grid = sol.sample();
    let scale = residual_scale(spec, op, &grid);
    let residuals = residual_del_all(spec, op, &grid)?;
    for k in sol.interior_nodes() {
        let r = residuals[k].max_norm();
        if r > 1e-10 * scale {
            return Err(Error::NumericalFailure(format!("discrete choreography residual {r:.3e} at node {k}")));
        }
    }
    Ok((ch, sol))
}

/// Measured defects of the choreography structure.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoreographyReport {
    /// `max |u(t+T) − u(t)|`.
    pub period_defect: f64,
    /// `max |x_{j+1}(t) − x_j(t + T/n)|`.
    pub delay_defect: f64,
    /// `max |x_s(t) − n u_0|`.
    pub centre_defect: f64,
    /// `1 + |u_0| + Σ|u_λ|`.
    pub scale: f64,
}

impl ChoreographyReport {
    pub fn periodic(&self) -> bool {
        self.period_defect <= 1e-9 * self.scale
    }

    pub fn delayed(&self) -> bool {
        self.delay_defect <= 1e-9 * self.scale
    }

    pub fn centred(&self) -> bool {
        self.centre_defect <= 1e-10 * self.scale
    }

    pub fn passes(&self) -> bool {
        self.periodic() && self.delayed() && self.centred()
    }
}

/// Samples 256 times in `[0, T]` and measures periodicity, delay structure and
/// constancy of the centre of mass.
pub fn verify_choreography(ch: &Choreography, sol: &SystemSolution) -> ChoreographyReport {
    let samples = 256;
    let times: Vec<f64> = (0..samples).map(|i| ch.period * (i as f64 + 0.5) / samples as f64).collect();
    let mut period_defect = 0.0f64;
    let mut delay_defect = 0.0f64;
    let mut centre_defect = 0.0f64;
    let centre = &ch.u.u0 * C64::new(ch.n as f64, 0.0);
    for &t in &times {
        period_defect = period_defect.max((ch.u.eval(t + ch.period) - ch.u.eval(t)).norm());
        for j in 0..sol.particles.len() {
            let next = (j + 1) % sol.particles.len();
            let shift = if next == 0 { ch.delay - ch.period } else { ch.delay };
            delay_defect = delay_defect.max((sol.particles[next].eval(t) - sol.particles[j].eval(t + shift)).norm());
        }
        let total = sol
            .particles
            .iter()
            .fold(CVector::zeros(ch.u.dim()), |acc, p| acc + p.eval(t));
        centre_defect = centre_defect.max((total - &centre).norm()).max((sol.xs.eval(t) - &centre).norm());
    }
    ChoreographyReport {
        period_defect,
        delay_defect,
        centre_defect,
        scale: 1.0 + ch.u.magnitude(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::construct_j4;
    use nalgebra::{DMatrix, DVector};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn imag(ws: &[f64]) -> Vec<C64> {
        ws.iter().flat_map(|&w| [c(0.0, w), c(0.0, -w)]).collect()
    }

    fn m2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    fn planar_system(n: usize) -> LagrangianSpec {
        let j1 = m2(7.0, 2.0, 2.0, 7.0);
        let j2 = m2(5.0, -1.0, -1.0, 5.0);
        let j3 = m2(8.0, 1.0, 1.0, 8.0);
        let j4 = construct_j4(&j1, &j2, &j3, 2.0, 5.0, 25.0).unwrap();
        LagrangianSpec::new(n, j1, j2, j3, j4, DMatrix::zeros(2, 2), DVector::zeros(2), DVector::from_vec(vec![0.3, -0.2])).unwrap()
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(rational_approximation(2.5, 1e-9, 64), Some(Ratio::new(5, 2)));
        assert_eq!(rational_approximation(-0.75, 1e-9, 64), Some(Ratio::new(-3, 4)));
        assert_eq!(rational_approximation(7.0 * 2f64.sqrt() / 4.0, 1e-9, 64), None);
        assert_eq!(rational_approximation(3.0, 1e-9, 1), Some(Ratio::new(3, 1)));
    }

    #[test]
    fn two_five_has_period_two_pi() {
        let r = commensurability(&imag(&[2.0, 5.0]), RATIO_TOL, MAX_DENOMINATOR).unwrap();
        assert_eq!(r.period_multiple, Some(Ratio::new(2, 1)));
        assert!((r.period.unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn four_ten_has_period_pi() {
        let r = commensurability(&imag(&[4.0, 10.0]), RATIO_TOL, MAX_DENOMINATOR).unwrap();
        assert!((r.period.unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn irrational_ratio_has_no_period() {
        let r = commensurability(&imag(&[4.0, 7.0 * 2f64.sqrt()]), RATIO_TOL, MAX_DENOMINATOR).unwrap();
        assert!(r.all_imaginary);
        assert!(!r.is_periodic());
    }

    #[test]
    fn real_parts_block_periodicity() {
        let r = commensurability(&[c(0.1, 1.0), c(0.1, -1.0)], RATIO_TOL, MAX_DENOMINATOR).unwrap();
        assert!(!r.all_imaginary && r.period.is_none());
        assert_eq!(commensurability(&[], RATIO_TOL, MAX_DENOMINATOR), Err(Error::EmptySet));
    }

    #[test]
    fn single_particle_periodicity() {
        let spec = LagrangianSpec::uncoupled(1, DMatrix::identity(2, 2), m2(-16.0, 0.0, 0.0, -100.0)).unwrap();
        let r = is_periodic_cel(&spec).unwrap();
        assert!((r.period.unwrap() - PI).abs() < 1e-9);
    }

    #[test]
    fn classical_choreography_three_particles() {
        let spec = planar_system(3);
        let (ch, sol) = build_choreography_cel(&spec, &[c(1.0, 0.0); 4]).unwrap();
        assert!((ch.period - 2.0 * PI).abs() < 1e-9);
        let report = verify_choreography(&ch, &sol);
        assert!(report.passes(), "{report:?}");
        let half = Choreography { period: ch.period / 2.0, ..ch.clone() };
        assert!(!verify_choreography(&half, &sol).periodic());
    }

    #[test]
    fn fewer_active_modes_still_choreographic() {
        let spec = planar_system(3);
        let (ch, sol) = build_choreography_cel(&spec, &[c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.2), c(0.5, -0.2)]).unwrap();
        assert!(verify_choreography(&ch, &sol).passes());
    }

    #[test]
    fn zero_forcing_centres_at_origin() {
        let mut spec = planar_system(3);
        spec.j7 = DVector::zeros(2);
        let (ch, _) = build_choreography_cel(&spec, &[c(1.0, 0.0); 4]).unwrap();
        assert_eq!(ch.u.u0.norm(), 0.0);
    }

    #[test]
    fn two_particles_resonate_with_even_frequency() {
        // frequencies 2 and 5 give T = 2π; e^{2i·π} = 1 for the λ = 2i mode
        let spec = planar_system(2);
        let r = build_choreography_cel(&spec, &[c(1.0, 0.0); 4]);
        assert!(matches!(r, Err(Error::DelayResonant { .. })), "{r:?}");
        // switching the resonant pair off leaves a valid choreography
        let (ch, sol) = build_choreography_cel(&spec, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(verify_choreography(&ch, &sol).passes());
    }

    #[test]
    fn incommensurable_spectrum_is_not_choreographic() {
        let j1 = m2(7.0, 2.0, 2.0, 7.0);
        let j2 = m2(5.0, -1.0, -1.0, 5.0);
        let j3 = m2(8.0, 1.0, 1.0, 8.0);
        let j4 = crate::model::j4_for_spectrum(&j1, &j2, &j3, &[16.0, 98.0]).unwrap();
        let spec = LagrangianSpec::new(3, j1, j2, j3, j4, DMatrix::zeros(2, 2), DVector::zeros(2), DVector::zeros(2)).unwrap();
        assert!(matches!(build_choreography_cel(&spec, &[c(1.0, 0.0); 4]), Err(Error::NotChoreographic(_))));
    }

    fn cube(n: usize, eps: f64) -> LagrangianSpec {
        let j1 = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 6.0]);
        let j2 = DMatrix::identity(3, 3);
        let j3 = DMatrix::identity(3, 3) * 0.5;
        let kappas: Vec<f64> = (1..=3).map(|m| (m as f64 * eps).sin().powi(2) / (eps * eps)).collect();
        let j4 = crate::model::j4_for_spectrum(&j1, &j2, &j3, &kappas).unwrap();
        LagrangianSpec::new(n, j1, j2, j3, j4, DMatrix::zeros(3, 3), DVector::zeros(3), DVector::from_vec(vec![0.1, 0.0, -0.2])).unwrap()
    }

    #[test]
    fn discrete_choreography_in_three_dimensions() {
        let eps = 2.0 * PI / 30.0;
        let spec = cube(3, eps);
        let op = ScaleOperator::k_family(0.0, eps).unwrap();
        let q0 = transcendental_spectrum(&TranscendentalPencil::new(&spec, &op, 0.0)).unwrap();
        for (root, w) in q0.lambdas.roots().iter().zip([-14.0, -13.0, -12.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 12.0, 13.0, 14.0]) {
            assert!((root - c(0.0, w)).norm() < 1e-9, "{root}");
        }
        let report = commensurability(q0.lambdas.roots(), RATIO_TOL, MAX_DENOMINATOR).unwrap();
        assert!((report.period.unwrap() - 2.0 * PI).abs() < 1e-9);
        // frequencies 1, 2, 3, 12, 13, 14; the multiples of 3 resonate with T/3
        let mut amps = vec![c(1.0, 0.0); 12];
        assert!(matches!(build_choreography_del(&spec, &op, 0.0, 30, &amps), Err(Error::DelayResonant { .. })));
        for i in [2, 3, 8, 9] {
            amps[i] = c(0.0, 0.0);
        }
        let (ch, sol) = build_choreography_del(&spec, &op, 0.0, 30, &amps).unwrap();
        assert!((ch.period - 2.0 * PI).abs() < 1e-9);
        assert!(verify_choreography(&ch, &sol.system).passes());
    }

    #[test]
    fn real_operator_breaks_imaginary_spectrum() {
        let spec = planar_system(3);
        let op = ScaleOperator::new(vec![c(-0.8, 0.0), c(0.6, 0.0), c(0.2, 0.0)], PI / 50.0).unwrap();
        let r = build_choreography_del(&spec, &op, 0.0, 100, &[c(1.0, 0.0); 8]);
        assert!(matches!(r, Err(Error::NotChoreographic(_))), "{r:?}");
    }
}
