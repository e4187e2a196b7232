//! Dense complex linear algebra and polynomial primitives.
//!
//! Determinants of matrix-valued functions are recovered by sampling on a
//! circle and inverting the discrete Fourier transform; roots come from the
//! companion matrix. Everything here is a pure function of its inputs.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default relative residual accepted for a polynomial root.
pub const ROOT_TOL: f64 = 1e-8;
/// Roots closer than `CLUSTER_TOL * max(1, |root|)` are treated as one multiple root.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Relative threshold under which trailing interpolated coefficients are dropped.
pub const TRUNCATION_TOL: f64 = 1e-12;
/// Relative mismatch tolerated at the held-out interpolation point.
pub const INTERPOLATION_TOL: f64 = 1e-8;
/// Condition number above which a linear solve is flagged.
pub const ILL_CONDITIONED: f64 = 1e12;
/// Relative pivot size below which a factorization is declared singular.
pub const PIVOT_TOL: f64 = 1e-14;

/// Dense polynomial with complex coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    /// Builds a polynomial, stripping exactly-zero trailing coefficients.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut coeffs = vec![C64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<C64> {
        self.coeffs.last().copied()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// A finite multiset of roots with per-root residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    roots: Vec<C64>,
    residuals: Vec<f64>,
    min_separation: f64,
    tolerance: f64,
}

impl RootSet {
    /// Sorts the roots (imaginary part, then real part) and records their separation.
    pub fn new(roots: Vec<C64>, residuals: Vec<f64>, tolerance: f64) -> Self {
        assert_eq!(roots.len(), residuals.len());
        let mut pairs: Vec<(C64, f64)> = roots.into_iter().zip(residuals).collect();
        pairs.sort_by(|a, b| a.0.im.total_cmp(&b.0.im).then(a.0.re.total_cmp(&b.0.re)));
        let (roots, residuals): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let min_separation = min_pairwise_distance(&roots);
        Self {
            roots,
            residuals,
            min_separation,
            tolerance,
        }
    }

    pub fn roots(&self) -> &[C64] {
        &self.roots
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Keeps the roots satisfying `keep`, preserving residuals.
    pub fn filter(&self, keep: impl Fn(C64) -> bool) -> RootSet {
        let (roots, residuals): (Vec<_>, Vec<_>) = self
            .roots
            .iter()
            .zip(&self.residuals)
            .filter(|(r, _)| keep(**r))
            .map(|(r, e)| (*r, *e))
            .unzip();
        RootSet::new(roots, residuals, self.tolerance)
    }

    /// Groups roots closer than `CLUSTER_TOL * max(1, |root|)` and returns
    /// each cluster's mean with its multiplicity.
    pub fn clusters(&self) -> Vec<(C64, usize)> {
        let mut assigned = vec![false; self.roots.len()];
        let mut out = Vec::new();
        for i in 0..self.roots.len() {
            if assigned[i] {
                continue;
            }
            assigned[i] = true;
            let mut members = vec![self.roots[i]];
            for j in (i + 1)..self.roots.len() {
                if !assigned[j] && roots_coincide(self.roots[i], self.roots[j], CLUSTER_TOL) {
                    assigned[j] = true;
                    members.push(self.roots[j]);
                }
            }
            let mean = members.iter().sum::<C64>() / members.len() as f64;
            out.push((mean, members.len()));
        }
        out
    }

    /// True when no two roots fall in the same cluster.
    pub fn is_simple(&self) -> bool {
        self.clusters().iter().all(|(_, m)| *m == 1)
    }
}

fn roots_coincide(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() < tol * 1f64.max(a.norm().max(b.norm()))
}

/// Minimum distance over distinct pairs; `+inf` for fewer than two points.
pub fn min_pairwise_distance(points: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.min((points[i] - points[j]).norm());
        }
    }
    best
}

/// All roots of `p` from its companion matrix, each polished by one Newton step.
pub fn polynomial_roots(p: &Polynomial, tol: f64) -> Result<RootSet> {
    let degree = match p.degree() {
        None | Some(0) => return Err(Error::DegreeZero),
        Some(d) => d,
    };
    let lead = p.leading().expect("nonzero polynomial");
    let coeffs = p.coeffs();

    let raw: Vec<C64> = if degree == 1 {
        vec![-coeffs[0] / lead]
    } else {
        let mut companion = CMatrix::zeros(degree, degree);
        for i in 1..degree {
            companion[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..degree {
            companion[(i, degree - 1)] = -coeffs[i] / lead;
        }
        balance(&mut companion);
        let schur = Schur::try_new(companion, f64::EPSILON, 100 * degree.max(10))
            .ok_or_else(|| Error::NumericalFailure("companion eigen-iteration did not converge".into()))?;
        schur
            .eigenvalues()
            .ok_or_else(|| Error::NumericalFailure("companion Schur form not triangular".into()))?
            .iter()
            .copied()
            .collect()
    };

    let dp = p.derivative();
    let scale = p.scale();
    let mut roots = Vec::with_capacity(degree);
    let mut residuals = Vec::with_capacity(degree);
    for r in raw {
        if !(r.re.is_finite() && r.im.is_finite()) {
            return Err(Error::NumericalFailure("non-finite companion eigenvalue".into()));
        }
        let value = p.eval(r);
        let slope = dp.eval(r);
        let mut best = r;
        if slope.norm() > 0.0 {
            let candidate = r - value / slope;
            // a single step, kept only if it lowers the residual
            if p.eval(candidate).norm() <= value.norm() {
                best = candidate;
            }
        }
        let residual = relative_residual(p, best, scale, degree);
        if residual > tol {
            return Err(Error::NumericalFailure(format!(
                "root {best} has relative residual {residual:.3e} above {tol:.1e}"
            )));
        }
        roots.push(best);
        residuals.push(residual);
    }
    Ok(RootSet::new(roots, residuals, tol))
}

/// `|p(r)|` against the largest coefficient, scaled by `max(1,|r|)^degree`.
fn relative_residual(p: &Polynomial, r: C64, scale: f64, degree: usize) -> f64 {
    let growth = 1f64.max(r.norm()).powi(degree as i32);
    p.eval(r).norm() / (scale * growth)
}

/// Diagonal similarity balancing (radix 2) to reduce eigenvalue sensitivity.
fn balance(m: &mut CMatrix) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Recovers the coefficients of `z -> det(eval(z))`, assumed polynomial of degree
/// at most `degree_bound`, from samples on the circle of the given radius.
pub fn det_as_polynomial<F>(eval: F, degree_bound: usize, radius: f64) -> Result<Polynomial>
where
    F: Fn(C64) -> CMatrix,
{
    let samples = degree_bound + 1;
    let nodes: Vec<C64> = (0..samples)
        .map(|r| C64::from_polar(radius, 2.0 * PI * r as f64 / samples as f64))
        .collect();
    let values: Vec<C64> = nodes.iter().map(|&z| eval(z).determinant()).collect();

    let mut coeffs: Vec<C64> = (0..samples)
        .map(|k| {
            let sum: C64 = values
                .iter()
                .enumerate()
                .map(|(r, v)| v * C64::from_polar(1.0, -2.0 * PI * (r * k) as f64 / samples as f64))
                .sum();
            sum / (samples as f64 * radius.powi(k as i32))
        })
        .collect();

    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while coeffs
        .last()
        .is_some_and(|c| c.norm() <= TRUNCATION_TOL * max)
    {
        coeffs.pop();
    }
    let poly = Polynomial::new(coeffs);

    // held-out point off the sampling circle
    let probe = C64::from_polar(radius * 0.731, 0.417);
    let direct = eval(probe).determinant();
    let interpolated = poly.eval(probe);
    let magnitude: f64 = poly
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm() * probe.norm().powi(k as i32))
        .sum::<f64>()
        .max(direct.norm());
    if magnitude > 0.0 {
        let mismatch = (direct - interpolated).norm() / magnitude;
        if mismatch > INTERPOLATION_TOL {
            return Err(Error::InterpolationInconsistent { mismatch });
        }
    }
    Ok(poly)
}

/// Unit right null vector of `m`, with the reference norm taken as `‖m‖₂`.
pub fn kernel_vector(m: &CMatrix, rank_tol: f64) -> Result<CVector> {
    kernel_vector_scaled(m, rank_tol, 0.0)
}

/// Unit right null vector of `m` from its smallest singular direction.
///
/// Rank is judged against `max(‖m‖₂, reference)`, which lets callers evaluating a
/// pencil exactly at a root (where `‖m‖` itself is tiny, e.g. 1×1 blocks) supply
/// the pencil's coefficient scale. The phase is fixed so the largest-magnitude
/// component is real and positive.
pub fn kernel_vector_scaled(m: &CMatrix, rank_tol: f64, reference: f64) -> Result<CVector> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "kernel_vector expects a square matrix");
    if n == 0 {
        return Err(Error::KernelFailure("empty matrix".into()));
    }
    let svd = m.clone().svd(false, true);
    let sigma = &svd.singular_values;
    let norm = sigma[0].max(reference);
    if norm == 0.0 {
        // the zero matrix: every direction is a null direction
        if n == 1 {
            return Ok(CVector::from_element(1, C64::new(1.0, 0.0)));
        }
        return Err(Error::KernelNotOneDimensional { ratio: 0.0 });
    }
    let smallest = sigma[n - 1] / norm;
    if smallest > rank_tol {
        return Err(Error::NotRankDeficient { ratio: smallest });
    }
    if n >= 2 {
        let second = sigma[n - 2] / norm;
        if second <= rank_tol {
            return Err(Error::KernelNotOneDimensional { ratio: second });
        }
    }
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let v: CVector = v_t.row(n - 1).transpose().map(|c| c.conj());
    Ok(normalize_phase(v))
}

/// Scales a vector to unit norm with its largest component real positive.
pub fn normalize_phase(v: CVector) -> CVector {
    let norm = v.norm();
    let mut pivot = 0;
    for (i, c) in v.iter().enumerate() {
        if c.norm() > v[pivot].norm() * (1.0 + 1e-12) {
            pivot = i;
        }
    }
    let p = v[pivot];
    if p.norm() == 0.0 {
        return v;
    }
    let phase = p.conj() / p.norm();
    v.map(|c| c * phase / norm)
}

/// Solution of a square linear system with its 2-norm condition number.
#[derive(Debug, Clone)]
pub struct Solved {
    pub x: CMatrix,
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// Solves `a x = b` by partial-pivot LU.
pub fn solve_square(a: &CMatrix, b: &CMatrix) -> Result<Solved> {
    let n = a.nrows();
    if n != a.ncols() || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "system {}x{} with right side of {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let min_pivot = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if min_pivot < PIVOT_TOL * scale {
        return Err(Error::Singular);
    }
    let x = lu.solve(b).ok_or(Error::Singular)?;
    let sv = a.singular_values();
    let condition = if sv[n - 1] > 0.0 {
        sv[0] / sv[n - 1]
    } else {
        f64::INFINITY
    };
    Ok(Solved {
        x,
        condition,
        ill_conditioned: condition > ILL_CONDITIONED,
    })
}

/// Vector right-hand side convenience wrapper over [`solve_square`].
pub fn solve_vector(a: &CMatrix, b: &CVector) -> Result<(CVector, f64)> {
    let rhs = CMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let solved = solve_square(a, &rhs)?;
    Ok((solved.x.column(0).into_owned(), solved.condition))
}

/// Complexifies a real matrix.
pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

pub fn to_complex_vec(v: &DVector<f64>) -> CVector {
    v.map(|x| C64::new(x, 0.0))
}

/// Spectral norm of a real matrix.
pub fn norm2(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values()[0]
}
