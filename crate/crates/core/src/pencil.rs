//! Classical quadratic pencil `P_ν(λ)` and transcendental pencil `P̃_ν(ε,λ)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::LagrangianSpec;
use crate::numkernel::{
    det_as_polynomial, kernel_vector_scaled, norm2, polynomial_roots, to_complex, CMatrix, CVector,
    RootSet, C64, ROOT_TOL,
};
use crate::scaleop::ScaleOperator;

/// Absolute separation used for distinctness and disjointness of roots.
pub const SEPARATION_TOL: f64 = 1e-7;
/// Relative rank threshold for kernel extraction at a computed root.
pub const KERNEL_RANK_TOL: f64 = 1e-7;

/// Separation threshold for eigenvalues `λ`: absolute up to `|λ| = 10`, then relative.
pub fn lambda_tolerance(a: C64, b: C64) -> f64 {
    SEPARATION_TOL * 1f64.max(a.norm().max(b.norm()) / 10.0)
}

/// Separation threshold for `ζ = e^{λε}`.
pub fn zeta_tolerance(a: C64, b: C64) -> f64 {
    SEPARATION_TOL * 1f64.max(a.norm().max(b.norm()))
}

fn nearly_singular(m: &DMatrix<f64>, reference: f64) -> bool {
    if m.is_empty() {
        return true;
    }
    let sv = m.singular_values();
    let smallest = sv[sv.len() - 1];
    smallest <= 1e-12 * reference.max(sv[0]).max(f64::MIN_POSITIVE)
}

fn nearly_singular_c(m: &CMatrix, reference: f64) -> bool {
    let sv = m.singular_values();
    let smallest = sv[sv.len() - 1];
    smallest <= 1e-12 * reference.max(sv[0]).max(f64::MIN_POSITIVE)
}

/// `Aλ² + Bλ + C` with `A = J1+2(ν−1)J3`, `B = −2J5`, `C = −(J2+2(ν−1)J4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalPencil {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub nu: f64,
}

impl ClassicalPencil {
    pub fn new(spec: &LagrangianSpec, nu: f64) -> Self {
        Self {
            a: spec.kinetic(nu),
            b: &spec.j5 * -2.0,
            c: -spec.potential(nu),
            nu,
        }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `‖A‖|λ|² + ‖B‖|λ| + ‖C‖`, the natural magnitude of `P(λ)`.
    pub fn scale_at(&self, lambda: C64) -> f64 {
        let r = lambda.norm();
        norm2(&self.a) * r * r + norm2(&self.b) * r + norm2(&self.c)
    }

    pub fn kernel_at(&self, lambda: C64) -> Result<CVector> {
        kernel_vector_scaled(&classical_eval(self, lambda), KERNEL_RANK_TOL, self.scale_at(lambda))
            .map_err(|e| Error::KernelFailure(format!("P at {lambda}: {e}")))
    }
}

pub fn classical_eval(p: &ClassicalPencil, lambda: C64) -> CMatrix {
    to_complex(&p.a) * (lambda * lambda) + to_complex(&p.b) * lambda + to_complex(&p.c)
}

/// The `2d` roots of `det P_ν(λ)`.
pub fn classical_spectrum(p: &ClassicalPencil) -> Result<RootSet> {
    let d = p.dim();
    if nearly_singular(&p.a, 0.0) {
        return Err(Error::LeadingSingular);
    }
    // sample near the expected root magnitude for a well-scaled interpolation
    let na = norm2(&p.a);
    let radius = (norm2(&p.c) / na).sqrt().max(norm2(&p.b) / na).clamp(0.5, 1e3);
    let poly = det_as_polynomial(|z| classical_eval(p, z), 2 * d, radius)?;
    if poly.degree() != Some(2 * d) {
        return Err(Error::LeadingSingular);
    }
    polynomial_roots(&poly, ROOT_TOL)
}

/// `P̃_ν(ε,λ) = −A θ(λ) − J5 σ1(λ) − (J2+2(ν−1)J4)`, a Laurent polynomial in `ζ = e^{λε}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranscendentalPencil {
    pub a: DMatrix<f64>,
    pub j5: DMatrix<f64>,
    pub potential: DMatrix<f64>,
    pub op: ScaleOperator,
    pub nu: f64,
    theta: Vec<C64>,
    sigma: Vec<C64>,
}

impl TranscendentalPencil {
    pub fn new(spec: &LagrangianSpec, op: &ScaleOperator, nu: f64) -> Self {
        Self {
            a: spec.kinetic(nu),
            j5: spec.j5.clone(),
            potential: spec.potential(nu),
            op: op.clone(),
            nu,
            theta: op.theta_laurent(),
            sigma: op.sigma_laurent(),
        }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `θ̂(ζ)` and `σ̂1(ζ)`.
    pub fn symbols_at(&self, zeta: C64) -> (C64, C64) {
        let n = self.op.order() as i32;
        let laurent = |coeffs: &[C64], lowest: i32| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * zeta.powi(i as i32 + lowest))
                .sum::<C64>()
        };
        (laurent(&self.theta, -2 * n), laurent(&self.sigma, -n))
    }

    /// `P̃(λ)` with `θ = s(λ)s(−λ)` and `σ1 = s(λ) − s(−λ)`, which stay accurate
    /// for small `λε` where the Laurent form cancels.
    pub fn eval_lambda(&self, lambda: C64) -> CMatrix {
        let (s, sb) = (self.op.symbol_s(lambda), self.op.symbol_s(-lambda));
        -(to_complex(&self.a) * (s * sb) + to_complex(&self.j5) * (s - sb) + to_complex(&self.potential))
    }

    /// `dP̃/dλ`.
    pub fn derivative_lambda(&self, lambda: C64) -> CMatrix {
        let (s, sb) = (self.op.symbol_s(lambda), self.op.symbol_s(-lambda));
        let (ds, dsb) = (self.op.symbol_s_derivative(lambda), self.op.symbol_s_derivative(-lambda));
        let theta = ds * sb - s * dsb;
        let sigma = ds + dsb;
        -(to_complex(&self.a) * theta + to_complex(&self.j5) * sigma)
    }

    /// Smallest singular value of `P̃(λ)` relative to [`Self::scale_at`].
    pub fn relative_residual(&self, lambda: C64) -> f64 {
        let sv = self.eval_lambda(lambda).singular_values();
        sv.iter().copied().fold(f64::INFINITY, f64::min) / self.scale_at(lambda).max(f64::MIN_POSITIVE)
    }

    fn eval_nonzero(&self, zeta: C64) -> CMatrix {
        let (theta, sigma) = self.symbols_at(zeta);
        -(to_complex(&self.a) * theta + to_complex(&self.j5) * sigma + to_complex(&self.potential))
    }

    pub fn scale_at(&self, lambda: C64) -> f64 {
        let zeta = (lambda * self.op.epsilon()).exp();
        let (theta, sigma) = self.symbols_at(zeta);
        norm2(&self.a) * theta.norm() + norm2(&self.j5) * sigma.norm() + norm2(&self.potential)
    }

    pub fn kernel_at(&self, lambda: C64) -> Result<CVector> {
        kernel_vector_scaled(&self.eval_lambda(lambda), KERNEL_RANK_TOL, self.scale_at(lambda))
            .map_err(|e| Error::KernelFailure(format!("discrete pencil at {lambda}: {e}")))
    }
}

pub fn transcendental_eval(p: &TranscendentalPencil, zeta: C64) -> Result<CMatrix> {
    if zeta.norm() == 0.0 {
        return Err(Error::ZeroArgument);
    }
    Ok(p.eval_nonzero(zeta))
}

/// One root of the discrete characteristic equation in both variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteRoot {
    pub zeta: C64,
    /// Principal branch, `Im λ ∈ (−π/ε, π/ε]`.
    pub lambda: C64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranscendentalSpectrum {
    pub lambdas: RootSet,
    pub zetas: RootSet,
    /// Ordered like `lambdas`.
    pub pairs: Vec<DiscreteRoot>,
}

/// Newton steps `λ ← λ − uᴴP̃v / uᴴP̃'v` on the smallest singular triplet of
/// `P̃(λ)`, kept only while the residual falls and `λ` stays within `radius`.
fn refine_eigenvalue(p: &TranscendentalPencil, lambda0: C64, radius: f64) -> C64 {
    let mut best = (lambda0, p.relative_residual(lambda0));
    let mut lambda = lambda0;
    for _ in 0..4 {
        let svd = p.eval_lambda(lambda).svd(true, true);
        let (Some(u), Some(v_t)) = (svd.u.as_ref(), svd.v_t.as_ref()) else { break };
        let k = svd.singular_values.imin();
        let (u, v) = (u.column(k).into_owned(), v_t.row(k).adjoint());
        let num = (u.adjoint() * p.eval_lambda(lambda) * &v)[(0, 0)];
        let den = (u.adjoint() * p.derivative_lambda(lambda) * &v)[(0, 0)];
        if den.norm() == 0.0 {
            break;
        }
        lambda -= num / den;
        if !(lambda.re.is_finite() && lambda.im.is_finite()) || (lambda - lambda0).norm() > radius {
            break;
        }
        let r = p.relative_residual(lambda);
        if r >= best.1 {
            break;
        }
        best = (lambda, r);
    }
    best.0
}

/// The `4Nd` roots of `ζ^{2Nd} det P̃_ν(ε, ·)`, mapped back by `λ = Log ζ / ε`.
pub fn transcendental_spectrum(p: &TranscendentalPencil) -> Result<TranscendentalSpectrum> {
    let d = p.dim();
    let n = p.op.order();
    if nearly_singular(&p.a, 0.0) {
        return Err(Error::LeadingSingular);
    }
    let eps = p.op.epsilon();
    let e2 = eps * eps;
    let shift = 2 * n as i32;
    // ε² ζ^{2N} P̃(ζ) is a matrix polynomial of degree 4N with O(1) coefficients
    let poly = det_as_polynomial(|z| p.eval_nonzero(z) * (z.powi(shift) * e2), 4 * n * d, 1.0)?;
    if poly.degree() != Some(4 * n * d) || poly.coeffs()[0].norm() == 0.0 {
        return Err(Error::LeadingSingular);
    }
    let zetas = polynomial_roots(&poly, ROOT_TOL)?;
    let z = zetas.roots();
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            let sep = (z[i] - z[j]).norm();
            if sep <= zeta_tolerance(z[i], z[j]) {
                return Err(Error::DegenerateRoots { separation: sep });
            }
        }
    }
    let lambdas0: Vec<C64> = z.iter().map(|zeta| zeta.ln() / eps).collect();
    let mut pairs: Vec<DiscreteRoot> = lambdas0
        .iter()
        .enumerate()
        .zip(zetas.residuals())
        .map(|((i, &lambda), &residual)| {
            let radius = lambdas0
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &other)| (other - lambda).norm())
                .fold(f64::INFINITY, f64::min);
            let lambda = refine_eigenvalue(p, lambda, 0.1 * radius);
            let zeta = (lambda * eps).exp();
            DiscreteRoot { zeta, lambda: zeta.ln() / eps, residual }
        })
        .collect();
    pairs.sort_by(|a, b| a.lambda.im.total_cmp(&b.lambda.im).then(a.lambda.re.total_cmp(&b.lambda.re)));
    let lambdas = RootSet::new(
        pairs.iter().map(|r| r.lambda).collect(),
        pairs.iter().map(|r| r.residual).collect(),
        zetas.tolerance(),
    );
    Ok(TranscendentalSpectrum {
        lambdas,
        zetas,
        pairs,
    })
}

/// Outcome of the spectral hypotheses behind the pseudo-periodic solution formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// `Q_n` (or `Q̃_n`) has the full count of simple roots.
    pub sum_spectrum_simple: bool,
    /// `Q_0` (or `Q̃_0`) has the full count of simple roots; vacuous for one particle.
    pub particle_spectrum_simple: bool,
    /// `Q_n ∩ Q_0 = ∅`; vacuous for one particle.
    pub disjoint: bool,
    pub sum_pencil_nonsingular_at_zero: bool,
    pub particle_pencil_nonsingular_at_zero: bool,
    /// `γ_{−N}γ_N ≠ 0`; always true for the classical check.
    pub operator_ok: bool,
    pub min_cross_distance: f64,
    pub messages: Vec<String>,
}

impl AssumptionReport {
    pub fn holds(&self) -> bool {
        self.sum_spectrum_simple
            && self.particle_spectrum_simple
            && self.disjoint
            && self.sum_pencil_nonsingular_at_zero
            && self.particle_pencil_nonsingular_at_zero
            && self.operator_ok
    }

    pub fn into_result(self) -> Result<()> {
        if self.holds() {
            Ok(())
        } else {
            Err(Error::AssumptionViolation(self.messages.join("; ")))
        }
    }
}

fn simple(points: &[C64], expected: usize, tol: fn(C64, C64) -> f64) -> bool {
    if points.len() != expected {
        return false;
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if (points[i] - points[j]).norm() <= tol(points[i], points[j]) {
                return false;
            }
        }
    }
    true
}

fn cross_distance(a: &[C64], b: &[C64], tol: fn(C64, C64) -> f64) -> (f64, bool) {
    let mut best = f64::INFINITY;
    let mut clear = true;
    for &x in a {
        for &y in b {
            let dist = (x - y).norm();
            best = best.min(dist);
            if dist <= tol(x, y) {
                clear = false;
            }
        }
    }
    (best, clear)
}

struct SpectrumProbe {
    points: Vec<C64>,
    ok: bool,
}

fn assemble_report(
    d_count: usize,
    n: usize,
    sum: SpectrumProbe,
    particle: SpectrumProbe,
    nonsingular: (bool, bool),
    tol: fn(C64, C64) -> f64,
    mut messages: Vec<String>,
) -> AssumptionReport {
    let sum_simple = sum.ok && simple(&sum.points, d_count, tol);
    if sum.ok && !sum_simple {
        messages.push(format!("sum spectrum is not {d_count} simple roots"));
    }
    let needs_particles = n > 1;
    let particle_simple = !needs_particles || (particle.ok && simple(&particle.points, d_count, tol));
    if needs_particles && particle.ok && !particle_simple {
        messages.push(format!("particle spectrum is not {d_count} simple roots"));
    }
    let (min_cross, disjoint) = if needs_particles && sum.ok && particle.ok {
        cross_distance(&sum.points, &particle.points, tol)
    } else {
        (f64::INFINITY, !needs_particles)
    };
    if needs_particles && sum.ok && particle.ok && !disjoint {
        messages.push(format!("sum and particle spectra intersect (distance {min_cross:.3e})"));
    }
    let particle_zero = !needs_particles || nonsingular.1;
    if !nonsingular.0 {
        messages.push("sum pencil is singular at zero".into());
    }
    if !particle_zero {
        messages.push("particle pencil is singular at zero".into());
    }
    AssumptionReport {
        sum_spectrum_simple: sum_simple,
        particle_spectrum_simple: particle_simple,
        disjoint,
        sum_pencil_nonsingular_at_zero: nonsingular.0,
        particle_pencil_nonsingular_at_zero: particle_zero,
        operator_ok: true,
        min_cross_distance: min_cross,
        messages,
    }
}

/// Checks simplicity and disjointness of `Q_n`, `Q_0` and invertibility of `P_n(0)`, `P_0(0)`.
///
/// With a single particle the particle pencil plays no role, so its conditions are vacuous.
pub fn check_cel_assumptions(spec: &LagrangianSpec, n: usize) -> AssumptionReport {
    let mut messages = Vec::new();
    let mut probe = |nu: f64, label: &str| {
        let p = ClassicalPencil::new(spec, nu);
        let zero_ok = !nearly_singular(&p.c, norm2(&p.a));
        match classical_spectrum(&p) {
            Ok(rs) => (SpectrumProbe { points: rs.roots().to_vec(), ok: true }, zero_ok),
            Err(e) => {
                messages.push(format!("{label} spectrum: {e}"));
                (SpectrumProbe { points: vec![], ok: false }, zero_ok)
            }
        }
    };
    let (sum, sum_zero) = probe(n as f64, "sum");
    let (particle, particle_zero) = if n > 1 {
        probe(0.0, "particle")
    } else {
        (SpectrumProbe { points: vec![], ok: true }, true)
    };
    assemble_report(
        2 * spec.d,
        n,
        sum,
        particle,
        (sum_zero, particle_zero),
        lambda_tolerance,
        messages,
    )
}

/// Discrete analogue of [`check_cel_assumptions`], measured on the `ζ`-roots.
pub fn check_del_assumptions(spec: &LagrangianSpec, op: &ScaleOperator, n: usize) -> AssumptionReport {
    let mut messages = Vec::new();
    let nn = op.order() as i64;
    let operator_ok = (op.gamma(-nn) * op.gamma(nn)).norm() > 0.0;
    if !operator_ok {
        messages.push("outermost operator coefficients vanish".into());
    }
    let mut probe = |nu: f64, label: &str| {
        let p = TranscendentalPencil::new(spec, op, nu);
        let at_zero = p.eval_lambda(C64::new(0.0, 0.0));
        let zero_ok = !nearly_singular_c(&at_zero, p.scale_at(C64::new(0.0, 0.0)));
        match transcendental_spectrum(&p) {
            Ok(s) => (SpectrumProbe { points: s.zetas.roots().to_vec(), ok: true }, zero_ok),
            Err(e) => {
                messages.push(format!("{label} spectrum: {e}"));
                (SpectrumProbe { points: vec![], ok: false }, zero_ok)
            }
        }
    };
    let (sum, sum_zero) = probe(n as f64, "sum");
    let (particle, particle_zero) = if n > 1 {
        probe(0.0, "particle")
    } else {
        (SpectrumProbe { points: vec![], ok: true }, true)
    };
    let mut report = assemble_report(
        4 * op.order() * spec.d,
        n,
        sum,
        particle,
        (sum_zero, particle_zero),
        zeta_tolerance,
        messages,
    );
    report.operator_ok = operator_ok;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::construct_j4;
    use nalgebra::DVector;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    fn oscillator(omega: f64) -> LagrangianSpec {
        LagrangianSpec::uncoupled(1, DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, -omega * omega))
            .unwrap()
    }

    fn planar_system(n: usize) -> LagrangianSpec {
        let j1 = m2(7.0, 2.0, 2.0, 7.0);
        let j2 = m2(5.0, -1.0, -1.0, 5.0);
        let j3 = m2(8.0, 1.0, 1.0, 8.0);
        let j4 = construct_j4(&j1, &j2, &j3, 2.0, 5.0, 25.0).unwrap();
        LagrangianSpec::new(n, j1, j2, j3, j4, DMatrix::zeros(2, 2), DVector::zeros(2), DVector::zeros(2)).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_roots(rs: &[C64], want: &[C64], tol: f64) {
        assert_eq!(rs.len(), want.len());
        for w in want {
            let best = rs.iter().map(|r| (r - w).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < tol, "missing root {w}, nearest at {best:e}");
        }
    }

    #[test]
    fn classical_eval_at_zero_is_constant_term() {
        let spec = planar_system(3);
        let p = ClassicalPencil::new(&spec, 3.0);
        let want = to_complex(&-spec.potential(3.0));
        assert!((classical_eval(&p, c(0.0, 0.0)) - want).norm() < 1e-15);
    }

    #[test]
    fn scalar_oscillator_spectrum() {
        let p = ClassicalPencil::new(&oscillator(3.0), 0.0);
        assert_roots(classical_spectrum(&p).unwrap().roots(), &[c(0.0, 3.0), c(0.0, -3.0)], 1e-12);
    }

    #[test]
    fn constructed_particle_spectrum() {
        let p = ClassicalPencil::new(&planar_system(3), 0.0);
        let rs = classical_spectrum(&p).unwrap();
        assert_roots(rs.roots(), &[c(0.0, 2.0), c(0.0, -2.0), c(0.0, 5.0), c(0.0, -5.0)], 1e-8);
        let sv = classical_eval(&p, c(0.0, 2.0)).singular_values();
        assert!(sv[1] < 1e-10);
        for &r in rs.roots() {
            let m = classical_eval(&p, r);
            let v = p.kernel_at(r).unwrap();
            assert!((&m * &v).norm() <= 1e-8 * p.scale_at(r));
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_leading_matrix() {
        let mut spec = planar_system(2);
        spec.j1 = &spec.j3 * 2.0;
        let p = ClassicalPencil::new(&spec, 0.0);
        assert_eq!(classical_spectrum(&p), Err(Error::LeadingSingular));
    }

    #[test]
    fn transcendental_eval_at_one_is_potential() {
        let spec = planar_system(3);
        let op = ScaleOperator::k_family(0.3, 0.05).unwrap();
        let p = TranscendentalPencil::new(&spec, &op, 0.0);
        let v = transcendental_eval(&p, c(1.0, 0.0)).unwrap();
        assert!((v + to_complex(&spec.potential(0.0))).norm() < 1e-10);
        assert_eq!(transcendental_eval(&p, c(0.0, 0.0)), Err(Error::ZeroArgument));
    }

    #[test]
    fn scalar_transcendental_eval_closed_form() {
        let (omega, eps) = (1.3, 0.1);
        let op = ScaleOperator::central_difference(eps).unwrap();
        let p = TranscendentalPencil::new(&oscillator(omega), &op, 0.0);
        let z = c(0.7, 0.4);
        let want = ((z - 1.0 / z) / (2.0 * eps)).powi(2) + omega * omega;
        assert!((transcendental_eval(&p, z).unwrap()[(0, 0)] - want).norm() < 1e-10);
    }

    #[test]
    fn scalar_transcendental_spectrum_arcsin_form() {
        let eps = 0.1;
        let op = ScaleOperator::central_difference(eps).unwrap();
        let p = TranscendentalPencil::new(&oscillator(1.0), &op, 0.0);
        let s = transcendental_spectrum(&p).unwrap();
        let slow = (0.1f64).asin() / eps;
        let fast = (std::f64::consts::PI - (0.1f64).asin()) / eps;
        assert_roots(
            s.lambdas.roots(),
            &[c(0.0, slow), c(0.0, -slow), c(0.0, fast), c(0.0, -fast)],
            1e-10,
        );
        assert!((slow - 1.0016742).abs() < 1e-7);
        assert!((fast - 30.41426).abs() < 1e-5);
    }

    #[test]
    fn planar_system_discrete_root_count_and_vieta() {
        let eps = std::f64::consts::PI / 100.0;
        let op = ScaleOperator::central_difference(eps).unwrap();
        let p = TranscendentalPencil::new(&planar_system(3), &op, 0.0);
        let s = transcendental_spectrum(&p).unwrap();
        assert_eq!(s.zetas.len(), 8);
        // for real symmetric data the product of ζ-roots is det(leading)/det(trailing) = 1
        let prod: C64 = s.zetas.roots().iter().product();
        assert!((prod - 1.0).norm() < 1e-8);
    }

    #[test]
    fn discrete_convergent_roots_approach_classical() {
        let spec = planar_system(3);
        for k in [0.0, 0.3] {
            let op = ScaleOperator::k_family(k, 1e-3).unwrap();
            let s = transcendental_spectrum(&TranscendentalPencil::new(&spec, &op, 0.0)).unwrap();
            let near: Vec<C64> = s.lambdas.roots().iter().copied().filter(|r| r.norm() < 20.0).collect();
            assert_eq!(near.len(), 4);
            assert_roots(&near, &[c(0.0, 2.0), c(0.0, -2.0), c(0.0, 5.0), c(0.0, -5.0)], 1e-2);
        }
    }

    #[test]
    fn cel_assumptions_for_constructed_system() {
        let report = check_cel_assumptions(&planar_system(3), 3);
        assert!(report.holds(), "{:?}", report.messages);
    }

    #[test]
    fn uncoupled_system_violates_disjointness() {
        let spec = LagrangianSpec::uncoupled(3, m2(2.0, 0.0, 0.0, 1.0), m2(-1.0, 0.0, 0.0, -4.0)).unwrap();
        let report = check_cel_assumptions(&spec, 3);
        assert!(!report.disjoint);
        assert!(!report.holds());
        let op = ScaleOperator::central_difference(0.05).unwrap();
        assert!(!check_del_assumptions(&spec, &op, 3).disjoint);
    }

    #[test]
    fn singular_potential_at_zero() {
        let mut spec = planar_system(3);
        spec.j4 = &spec.j2 * 0.5;
        let report = check_cel_assumptions(&spec, 3);
        assert!(!report.particle_pencil_nonsingular_at_zero);
    }

    #[test]
    fn del_assumptions_for_constructed_system() {
        let op = ScaleOperator::central_difference(std::f64::consts::PI / 100.0).unwrap();
        let report = check_del_assumptions(&planar_system(3), &op, 3);
        assert!(report.holds(), "{:?}", report.messages);
    }

    #[test]
    fn single_particle_skips_particle_conditions() {
        let report = check_cel_assumptions(&oscillator(1.0), 1);
        assert!(report.holds());
    }
}
