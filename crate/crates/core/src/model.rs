//! Quadratic Lagrangian data for `n` identical particles in `R^d`.
//!
//! Single-particle part: `½ẏᵀJ1ẏ + ½xᵀJ2x + xᵀJ5ẏ + J6ᵀẏ + J7ᵀx`; each ordered
//! pair `j≠k` adds `ẋ_jᵀJ3ẋ_k + x_jᵀJ4x_k`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Tolerance on symmetry and skew-symmetry of the coefficient matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSpec {
    pub d: usize,
    pub n: usize,
    pub j1: DMatrix<f64>,
    pub j2: DMatrix<f64>,
    pub j3: DMatrix<f64>,
    pub j4: DMatrix<f64>,
    pub j5: DMatrix<f64>,
    pub j6: DVector<f64>,
    pub j7: DVector<f64>,
}

impl LagrangianSpec {
    /// Checks shapes only; symmetry is reported by [`validate_spec`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        j1: DMatrix<f64>,
        j2: DMatrix<f64>,
        j3: DMatrix<f64>,
        j4: DMatrix<f64>,
        j5: DMatrix<f64>,
        j6: DVector<f64>,
        j7: DVector<f64>,
    ) -> Result<Self> {
        let d = j1.nrows();
        if d == 0 || n == 0 {
            return Err(Error::DimensionMismatch("d and n must be at least 1".into()));
        }
        for (name, m) in [("J1", &j1), ("J2", &j2), ("J3", &j3), ("J4", &j4), ("J5", &j5)] {
            if m.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        for (name, v) in [("J6", &j6), ("J7", &j7)] {
            if v.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "{name} has length {}, expected {d}",
                    v.len()
                )));
            }
        }
        Ok(Self {
            d,
            n,
            j1,
            j2,
            j3,
            j4,
            j5,
            j6,
            j7,
        })
    }

    /// Spec with J3..J7 zero.
    pub fn uncoupled(n: usize, j1: DMatrix<f64>, j2: DMatrix<f64>) -> Result<Self> {
        let d = j1.nrows();
        Self::new(
            n,
            j1,
            j2,
            DMatrix::zeros(d, d),
            DMatrix::zeros(d, d),
            DMatrix::zeros(d, d),
            DVector::zeros(d),
            DVector::zeros(d),
        )
    }

    /// `J1 + 2(ν-1)J3`, the second-order coefficient of the ν-pencil.
    pub fn kinetic(&self, nu: f64) -> DMatrix<f64> {
        &self.j1 + &self.j3 * (2.0 * (nu - 1.0))
    }

    /// `J2 + 2(ν-1)J4`.
    pub fn potential(&self, nu: f64) -> DMatrix<f64> {
        &self.j2 + &self.j4 * (2.0 * (nu - 1.0))
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn is_conservative(&self) -> bool {
        self.j5.iter().all(|&x| x == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NotSymmetric,
    NotSkewSymmetric,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub matrix: &'static str,
    pub kind: ViolationKind,
    pub magnitude: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = match self.kind {
            ViolationKind::NotSymmetric => "is not symmetric",
            ViolationKind::NotSkewSymmetric => "is not skew-symmetric",
            ViolationKind::NonFinite => "has non-finite entries",
        };
        write!(f, "{} {} (max defect {:.3e})", self.matrix, what, self.magnitude)
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Lists every violated structural hypothesis; empty when the spec is usable.
pub fn validate_spec(spec: &LagrangianSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let matrices = [
        ("J1", &spec.j1),
        ("J2", &spec.j2),
        ("J3", &spec.j3),
        ("J4", &spec.j4),
        ("J5", &spec.j5),
    ];
    for (name, m) in matrices {
        if m.iter().any(|x| !x.is_finite()) {
            out.push(Violation {
                matrix: name,
                kind: ViolationKind::NonFinite,
                magnitude: f64::INFINITY,
            });
            continue;
        }
        if name == "J5" {
            let defect = max_abs(&(m + m.transpose()));
            if defect > SYMMETRY_TOL {
                out.push(Violation {
                    matrix: name,
                    kind: ViolationKind::NotSkewSymmetric,
                    magnitude: defect,
                });
            }
        } else {
            let defect = max_abs(&(m - m.transpose()));
            if defect > SYMMETRY_TOL {
                out.push(Violation {
                    matrix: name,
                    kind: ViolationKind::NotSymmetric,
                    magnitude: defect,
                });
            }
        }
    }
    for (name, v) in [("J6", &spec.j6), ("J7", &spec.j7)] {
        if v.iter().any(|x| !x.is_finite()) {
            out.push(Violation {
                matrix: name,
                kind: ViolationKind::NonFinite,
                magnitude: f64::INFINITY,
            });
        }
    }
    out
}

/// Positions and velocities, one row per particle.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub positions: DMatrix<f64>,
    pub velocities: DMatrix<f64>,
}

/// Conserved energy of a system with `J5 = 0`.
///
/// `Σ_j (½ẋ_jᵀJ1ẋ_j − ½x_jᵀJ2x_j − J7ᵀx_j) + Σ_{j≠k} (ẋ_jᵀJ3ẋ_k − x_jᵀJ4x_k)`
/// over ordered pairs. The linear velocity term `J6ᵀẋ` is a total derivative and
/// does not enter the Hamiltonian, so it is left out.
pub fn energy(spec: &LagrangianSpec, state: &ParticleState) -> Result<f64> {
    if !spec.is_conservative() {
        return Err(Error::NonConservative);
    }
    let (n, d) = (spec.n, spec.d);
    if state.positions.shape() != (n, d) || state.velocities.shape() != (n, d) {
        return Err(Error::DimensionMismatch(format!(
            "state must be {n}x{d} for positions and velocities"
        )));
    }
    let x = |j: usize| state.positions.row(j).transpose();
    let v = |j: usize| state.velocities.row(j).transpose();
    let mut e = 0.0;
    for j in 0..n {
        let (xj, vj) = (x(j), v(j));
        e += 0.5 * vj.dot(&(&spec.j1 * &vj)) - 0.5 * xj.dot(&(&spec.j2 * &xj)) - spec.j7.dot(&xj);
        for k in 0..n {
            if k != j {
                e += vj.dot(&(&spec.j3 * v(k))) - xj.dot(&(&spec.j4 * x(k)));
            }
        }
    }
    Ok(e)
}

/// Block matrices of the second variation with definiteness flags.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub j8: DMatrix<f64>,
    pub j9: DMatrix<f64>,
    pub j10: DMatrix<f64>,
    pub j8_positive_definite: bool,
    pub j9_positive_definite: bool,
}

pub fn assemble_blocks(spec: &LagrangianSpec) -> Blocks {
    let (n, d) = (spec.n, spec.d);
    let block = |diag: &DMatrix<f64>, off: &DMatrix<f64>| {
        let mut m = DMatrix::zeros(n * d, n * d);
        for j in 0..n {
            for k in 0..n {
                let b = if j == k { diag.clone() } else { off * 2.0 };
                m.view_mut((j * d, k * d), (d, d)).copy_from(&b);
            }
        }
        m
    };
    let j8 = block(&spec.j1, &spec.j3);
    let j9 = block(&spec.j2, &spec.j4);
    let mut j10 = DMatrix::zeros(n * d, n * d);
    for j in 0..n {
        j10.view_mut((j * d, j * d), (d, d)).copy_from(&spec.j5);
    }
    let j8_positive_definite = is_positive_definite(&j8);
    let j9_positive_definite = is_positive_definite(&j9);
    Blocks {
        j8,
        j9,
        j10,
        j8_positive_definite,
        j9_positive_definite,
    }
}

fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let radius = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
    radius > 0.0 && eig.iter().all(|&x| x > 1e-12 * radius)
}

/// Lagrangian data for the variables `x̂ = A x + b`.
///
/// Obtained by substituting `x = A⁻¹(x̂ − b)`; additive constants are dropped.
pub fn transform_affine(
    spec: &LagrangianSpec,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Result<LagrangianSpec> {
    let d = spec.d;
    if a.shape() != (d, d) || b.len() != d {
        return Err(Error::DimensionMismatch("transform must be d x d with a d-vector shift".into()));
    }
    let sv = a.singular_values();
    let condition = if sv[d - 1] > 0.0 { sv[0] / sv[d - 1] } else { f64::INFINITY };
    if !(condition < 1e12) {
        return Err(Error::SingularTransform { condition });
    }
    let inv = a
        .clone()
        .try_inverse()
        .ok_or(Error::SingularTransform { condition })?;
    // x = inv x̂ + c
    let c = -(&inv * b);
    let it = inv.transpose();
    let congruence = |m: &DMatrix<f64>| {
        let out = &it * m * &inv;
        (&out + out.transpose()) * 0.5
    };
    let j5 = &it * &spec.j5 * &inv;
    let j5 = (&j5 - j5.transpose()) * 0.5;
    let pair_count = 2.0 * (spec.n as f64 - 1.0);
    let j6 = &it * (&spec.j6 + spec.j5.transpose() * &c);
    let j7 = &it * (&spec.j7 + &spec.j2 * &c + &spec.j4 * &c * pair_count);
    LagrangianSpec::new(
        spec.n,
        congruence(&spec.j1),
        congruence(&spec.j2),
        congruence(&spec.j3),
        congruence(&spec.j4),
        j5,
        j6,
        j7,
    )
}

/// Builds `J4 = ½J2 + ½(J1−2J3)K` for `d = 2`, where `K` has trace `ω1²+ω2²`,
/// determinant `ω1²ω2²`, bottom-right entry `j4_free`, and `(J1−2J3)K` symmetric.
/// The resulting particle pencil has roots `±iω1, ±iω2`.
pub fn construct_j4(
    j1: &DMatrix<f64>,
    j2: &DMatrix<f64>,
    j3: &DMatrix<f64>,
    omega1: f64,
    omega2: f64,
    j4_free: f64,
) -> Result<DMatrix<f64>> {
    for m in [j1, j2, j3] {
        if m.shape() != (2, 2) {
            return Err(Error::DimensionMismatch("construct_j4 is defined for d = 2".into()));
        }
    }
    let s = j1 - j3 * 2.0;
    if s.determinant().abs() <= 1e-12 * max_abs(&s).powi(2) {
        return Err(Error::SymmetryInfeasible("J1 - 2J3 is singular".into()));
    }
    let (s11, s12, s22) = (s[(0, 0)], 0.5 * (s[(0, 1)] + s[(1, 0)]), s[(1, 1)]);
    let (w1, w2) = (omega1 * omega1, omega2 * omega2);
    let k11 = w1 + w2 - j4_free;
    let k22 = j4_free;
    // k12 * k21 fixed by the determinant
    let product = k11 * k22 - w1 * w2;
    let diff = k11 - k22;
    // symmetry of S K:  s11 k12 − s22 k21 = s12 (k11 − k22)
    let (k12, k21) = if s11.abs() < 1e-14 && s22.abs() < 1e-14 {
        if diff.abs() > 1e-12 * (1.0 + k11.abs() + k22.abs()) {
            return Err(Error::SymmetryInfeasible(
                "J1 - 2J3 is off-diagonal and the diagonal of K is not constant".into(),
            ));
        }
        let r = product.abs().sqrt();
        (r, if product >= 0.0 { r } else { -r })
    } else if s11.abs() >= s22.abs() {
        // k12 = (s22 k21 + s12 diff)/s11  ⇒  s22 k21² + s12 diff k21 − s11 product = 0
        let k21 = solve_quadratic(s22, s12 * diff, -s11 * product)?;
        ((s22 * k21 + s12 * diff) / s11, k21)
    } else {
        // k21 = (s11 k12 − s12 diff)/s22  ⇒  s11 k12² − s12 diff k12 − s22 product = 0
        let k12 = solve_quadratic(s11, -s12 * diff, -s22 * product)?;
        (k12, (s11 * k12 - s12 * diff) / s22)
    };
    let k = DMatrix::from_row_slice(2, 2, &[k11, k12, k21, k22]);
    let sk = &s * &k;
    let asym = (sk[(0, 1)] - sk[(1, 0)]).abs();
    if asym > 1e-9 * (1.0 + max_abs(&sk)) {
        return Err(Error::SymmetryInfeasible(format!("(J1-2J3)K asymmetric by {asym:.3e}")));
    }
    let j4 = j2 * 0.5 + sk * 0.5;
    Ok((&j4 + j4.transpose()) * 0.5)
}

/// Larger real root of `a x² + b x + c` (the linear root when `a = 0`).
fn solve_quadratic(a: f64, b: f64, c: f64) -> Result<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(f64::MIN_POSITIVE);
    if a.abs() <= 1e-14 * scale {
        if b.abs() <= 1e-14 * scale {
            return if c.abs() <= 1e-14 * scale {
                Ok(0.0)
            } else {
                Err(Error::NoRealSolution("degenerate symmetry equation".into()))
            };
        }
        return Ok(-c / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < -1e-12 * scale * scale {
        return Err(Error::NoRealSolution(format!(
            "off-diagonal entries of K need the square root of {disc:.6e}"
        )));
    }
    let root = disc.max(0.0).sqrt();
    let r1 = (-b + root) / (2.0 * a);
    let r2 = (-b - root) / (2.0 * a);
    Ok(r1.max(r2))
}

/// Generalization of [`construct_j4`] to any `d`: picks `K` sharing the
/// eigenvectors of the symmetric `J1−2J3` with eigenvalues `kappas`, so the
/// particle operator `(J1−2J3)(s + K)` vanishes exactly when `s = −κ`.
pub fn j4_for_spectrum(
    j1: &DMatrix<f64>,
    j2: &DMatrix<f64>,
    j3: &DMatrix<f64>,
    kappas: &[f64],
) -> Result<DMatrix<f64>> {
    let d = j1.nrows();
    if kappas.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "need {d} target eigenvalues, got {}",
            kappas.len()
        )));
    }
    let s = j1 - j3 * 2.0;
    let s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s.clone());
    let min_eig = eig.eigenvalues.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    if min_eig <= 1e-12 * max_abs(&s) {
        return Err(Error::SymmetryInfeasible("J1 - 2J3 is singular".into()));
    }
    let v = &eig.eigenvectors;
    let k = v * DMatrix::from_diagonal(&DVector::from_column_slice(kappas)) * v.transpose();
    let j4 = j2 * 0.5 + &s * k * 0.5;
    Ok((&j4 + j4.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    fn planar_system(n: usize) -> LagrangianSpec {
        let j1 = m2(7.0, 2.0, 2.0, 7.0);
        let j2 = m2(5.0, -1.0, -1.0, 5.0);
        let j3 = m2(8.0, 1.0, 1.0, 8.0);
        let j4 = construct_j4(&j1, &j2, &j3, 2.0, 5.0, 25.0).unwrap();
        LagrangianSpec::new(
            n,
            j1,
            j2,
            j3,
            j4,
            DMatrix::zeros(2, 2),
            DVector::zeros(2),
            DVector::zeros(2),
        )
        .unwrap()
    }

    fn oscillator(omega: f64) -> LagrangianSpec {
        LagrangianSpec::uncoupled(
            1,
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, -omega * omega),
        )
        .unwrap()
    }

    #[test]
    fn planar_j4_matches_hand_computation() {
        let spec = planar_system(3);
        let want = m2(-15.5, -0.5, -0.5, -110.0);
        assert!((spec.j4 - want).abs().max() < 1e-12);
    }

    #[test]
    fn planar_spec_validates() {
        assert!(validate_spec(&planar_system(3)).is_empty());
    }

    #[test]
    fn skew_j5_is_accepted() {
        let mut spec = planar_system(2);
        spec.j5 = m2(0.0, 1.0, -1.0, 0.0);
        assert!(validate_spec(&spec).is_empty());
    }

    #[test]
    fn asymmetric_j1_is_named() {
        let mut spec = planar_system(2);
        spec.j1 = m2(1.0, 2.0, 3.0, 4.0);
        let v = validate_spec(&spec);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].matrix, "J1");
        assert_eq!(v[0].kind, ViolationKind::NotSymmetric);
        assert!((v[0].magnitude - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oscillator_energy_at_turning_point_and_midpoint() {
        let omega = 3.0;
        let spec = oscillator(omega);
        let at_rest = ParticleState {
            positions: DMatrix::from_element(1, 1, 1.0),
            velocities: DMatrix::from_element(1, 1, 0.0),
        };
        let moving = ParticleState {
            positions: DMatrix::from_element(1, 1, 0.0),
            velocities: DMatrix::from_element(1, 1, omega),
        };
        assert!((energy(&spec, &at_rest).unwrap() - 0.5 * omega * omega).abs() < 1e-15);
        assert!((energy(&spec, &moving).unwrap() - 0.5 * omega * omega).abs() < 1e-15);
    }

    #[test]
    fn energy_requires_zero_j5() {
        let mut spec = planar_system(2);
        spec.j5 = m2(0.0, 1.0, -1.0, 0.0);
        let state = ParticleState {
            positions: DMatrix::zeros(2, 2),
            velocities: DMatrix::zeros(2, 2),
        };
        assert_eq!(energy(&spec, &state), Err(Error::NonConservative));
    }

    #[test]
    fn blocks_for_uncoupled_identity() {
        let spec = LagrangianSpec::uncoupled(2, DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
        let b = assemble_blocks(&spec);
        assert_eq!(b.j8, DMatrix::identity(4, 4));
        assert!(b.j8_positive_definite);
    }

    #[test]
    fn blocks_with_strong_coupling_are_indefinite() {
        let mut spec = LagrangianSpec::uncoupled(2, DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
        spec.j3 = DMatrix::identity(2, 2);
        let b = assemble_blocks(&spec);
        assert_eq!(b.j8[(0, 2)], 2.0);
        let mut eig: Vec<f64> = SymmetricEigen::new(b.j8.clone()).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let want = [-1.0, -1.0, 3.0, 3.0];
        for (g, w) in eig.iter().zip(want) {
            assert!((g - w).abs() < 1e-12);
        }
        assert!(!b.j8_positive_definite);
    }

    #[test]
    fn identity_transform_is_noop() {
        let spec = planar_system(3);
        let t = transform_affine(&spec, &DMatrix::identity(2, 2), &DVector::zeros(2)).unwrap();
        assert!((t.j1 - &spec.j1).abs().max() < 1e-14);
        assert!((t.j4 - &spec.j4).abs().max() < 1e-12);
        assert!(t.j7.abs().max() < 1e-14);
    }

    #[test]
    fn doubling_quarters_kinetic_coefficient() {
        let spec = oscillator(1.0);
        let t = transform_affine(&spec, &DMatrix::from_element(1, 1, 2.0), &DVector::zeros(1)).unwrap();
        assert!((t.j1[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn singular_transform_is_rejected() {
        let spec = planar_system(2);
        let err = transform_affine(&spec, &m2(1.0, 2.0, 2.0, 4.0), &DVector::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::SingularTransform { .. }));
    }

    #[test]
    fn equal_frequencies_give_identity_k() {
        let j1 = m2(7.0, 2.0, 2.0, 7.0);
        let j2 = m2(5.0, -1.0, -1.0, 5.0);
        let j3 = m2(8.0, 1.0, 1.0, 8.0);
        let j4 = construct_j4(&j1, &j2, &j3, 1.0, 1.0, 1.0).unwrap();
        // K = I  ⇒  J4 = ½J2 + ½(J1−2J3)
        let want = &j2 * 0.5 + (&j1 - &j3 * 2.0) * 0.5;
        assert!((j4 - want).abs().max() < 1e-12);
    }

    #[test]
    fn impossible_free_coefficient_has_no_real_solution() {
        let j1 = m2(7.0, 2.0, 2.0, 7.0);
        let j2 = m2(5.0, -1.0, -1.0, 5.0);
        let j3 = m2(8.0, 1.0, 1.0, 8.0);
        let err = construct_j4(&j1, &j2, &j3, 2.0, 5.0, 29.0).unwrap_err();
        assert!(matches!(err, Error::NoRealSolution(_)));
    }

    #[test]
    fn spectrum_helper_agrees_with_two_dimensional_construction() {
        let j1 = m2(7.0, 2.0, 2.0, 7.0);
        let j2 = m2(5.0, -1.0, -1.0, 5.0);
        let j3 = m2(8.0, 1.0, 1.0, 8.0);
        let a = construct_j4(&j1, &j2, &j3, 2.0, 5.0, 25.0).unwrap();
        let b = j4_for_spectrum(&j1, &j2, &j3, &[4.0, 25.0]).unwrap();
        // both yield K with eigenvalues {4, 25}; check via J2 − 2J4 = −(J1−2J3)K
        let s = &j1 - &j3 * 2.0;
        let si = s.clone().try_inverse().unwrap();
        for j4 in [a, b] {
            let k = -(&si * (&j2 - &j4 * 2.0));
            assert!((k.trace() - 29.0).abs() < 1e-10);
            assert!((k.determinant() - 100.0).abs() < 1e-8);
        }
    }
}
