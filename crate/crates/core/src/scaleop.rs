//! Windowed scale derivatives `□_ε`, `□_{−ε}` and their exponential symbols.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numkernel::{CVector, C64};

/// Tolerance for the algebraic operator conditions.
pub const CONDITION_TOL: f64 = 1e-12;

/// `□_ε x(t) = Σ_{j=−N}^{N} γ_j/ε · x(t+jε) · χ_{−j}(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleOperator {
    n: usize,
    gamma: Vec<C64>,
    epsilon: f64,
}

impl ScaleOperator {
    /// `gamma` lists `γ_{−N}, …, γ_N`.
    pub fn new(gamma: Vec<C64>, epsilon: f64) -> Result<Self> {
        if gamma.len() < 3 || gamma.len() % 2 == 0 {
            return Err(Error::InvalidOperator(format!(
                "need an odd number (at least 3) of coefficients, got {}",
                gamma.len()
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidOperator(format!("step must be positive, got {epsilon}")));
        }
        if gamma.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(Error::InvalidOperator("non-finite coefficient".into()));
        }
        let n = (gamma.len() - 1) / 2;
        if (gamma[0] * gamma[2 * n]).norm() == 0.0 {
            return Err(Error::InvalidOperator("outermost coefficients must both be nonzero".into()));
        }
        Ok(Self { n, gamma, epsilon })
    }

    /// `(−½, 0, ½)`.
    pub fn central_difference(epsilon: f64) -> Result<Self> {
        Self::k_family(0.0, epsilon)
    }

    /// `(−½+ik, −2ik, ½+ik)`; real `θ` on the imaginary axis for every `k`.
    pub fn k_family(k: f64, epsilon: f64) -> Result<Self> {
        Self::new(
            vec![C64::new(-0.5, k), C64::new(0.0, -2.0 * k), C64::new(0.5, k)],
            epsilon,
        )
    }

    /// Three-point operator with `γ_0 = −(γ_{−1}+γ_1)`.
    pub fn zero_sum_three_point(gamma_m1: C64, gamma_1: C64, epsilon: f64) -> Result<Self> {
        Self::new(vec![gamma_m1, -(gamma_m1 + gamma_1), gamma_1], epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.gamma.clone(), epsilon)
    }

    /// Half-width `N`.
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.gamma
    }

    /// `γ_j` for `|j| ≤ N`, zero outside.
    pub fn gamma(&self, j: i64) -> C64 {
        let n = self.n as i64;
        if j.abs() > n {
            C64::new(0.0, 0.0)
        } else {
            self.gamma[(j + n) as usize]
        }
    }

    /// Indicator of `[t0,tf] ∩ [t0+jε, tf+jε]` (closed).
    pub fn chi(&self, j: i64, t: f64, t0: f64, tf: f64) -> bool {
        let slack = 1e-9 * self.epsilon;
        let shift = j as f64 * self.epsilon;
        t >= t0.max(t0 + shift) - slack && t <= tf.min(tf + shift) + slack
    }

    pub fn conditions(&self) -> OperatorConditions {
        check_operator_conditions(self)
    }

    /// `s(λ) = e^{−λt}□_ε e^{λt} = (1/ε)Σγ_j e^{jλε}`, summed as
    /// `(1/ε)[Σγ_j + Σγ_j(e^{jλε} − 1)]` so small `λε` keeps full relative accuracy.
    pub fn symbol_s(&self, lambda: C64) -> C64 {
        let n = self.n as i64;
        let total: C64 = self.gamma.iter().sum();
        let shifts: C64 = (-n..=n)
            .map(|j| self.gamma(j) * expm1(lambda * (j as f64 * self.epsilon)))
            .sum();
        (total + shifts) / self.epsilon
    }

    /// `s'(λ) = Σ j γ_j e^{jλε}`.
    pub fn symbol_s_derivative(&self, lambda: C64) -> C64 {
        let n = self.n as i64;
        (-n..=n)
            .map(|j| self.gamma(j) * j as f64 * (lambda * (j as f64 * self.epsilon)).exp())
            .sum()
    }

    /// `s̄(λ) = e^{−λt}□_{−ε} e^{λt} = (1/ε)Σγ_j e^{−jλε}`.
    pub fn symbol_s_bar(&self, lambda: C64) -> C64 {
        self.symbol_s(-lambda)
    }

    /// Coefficients of `θ̂(ζ) = Σ_k c_k ζ^k`, `k = −2N..2N`, stored at `k+2N`.
    pub fn theta_laurent(&self) -> Vec<C64> {
        let n = self.n as i64;
        let e2 = self.epsilon * self.epsilon;
        (-2 * n..=2 * n)
            .map(|k| {
                (-n..=n)
                    .map(|l| self.gamma(k + l) * self.gamma(l))
                    .sum::<C64>()
                    / e2
            })
            .collect()
    }

    /// Coefficients of `σ̂1(ζ) = Σ_k (γ_k − γ_{−k})/ε ζ^k`, `k = −N..N`, stored at `k+N`.
    pub fn sigma_laurent(&self) -> Vec<C64> {
        let n = self.n as i64;
        (-n..=n)
            .map(|k| (self.gamma(k) - self.gamma(-k)) / self.epsilon)
            .collect()
    }
}

/// Outcome of the two algebraic consistency identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperatorConditions {
    /// `Σγ_k = 0`, i.e. `□_ε 1 = 0`.
    pub sum_zero: bool,
    /// `½Σ k(γ_k − γ_{−k}) = 1`, i.e. `□_ε t = 1`.
    pub derivative_normalized: bool,
}

impl OperatorConditions {
    pub fn holds(&self) -> bool {
        self.sum_zero && self.derivative_normalized
    }
}

pub fn check_operator_conditions(op: &ScaleOperator) -> OperatorConditions {
    let n = op.n as i64;
    let sum: C64 = op.gamma.iter().sum();
    let moment: C64 = (-n..=n)
        .map(|k| (op.gamma(k) - op.gamma(-k)) * (0.5 * k as f64))
        .sum();
    OperatorConditions {
        sum_zero: sum.norm() <= CONDITION_TOL,
        derivative_normalized: (moment - 1.0).norm() <= CONDITION_TOL,
    }
}

/// Samples on the uniform grid `t0 + mε`, `m = 0..M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub t0: f64,
    pub epsilon: f64,
    pub values: Vec<CVector>,
}

impl GridFunction {
    pub fn new(t0: f64, epsilon: f64, values: Vec<CVector>) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidOperator("grid step must be positive".into()));
        }
        if let Some(first) = values.first() {
            let d = first.len();
            if values.iter().any(|v| v.len() != d) {
                return Err(Error::DimensionMismatch("grid values differ in length".into()));
            }
        }
        Ok(Self { t0, epsilon, values })
    }

    /// Samples `f(t0 + mε)` for `m = 0..=m_max`.
    pub fn sample(t0: f64, epsilon: f64, m_max: usize, f: impl Fn(f64) -> CVector) -> Result<Self> {
        let values = (0..=m_max).map(|m| f(t0 + m as f64 * epsilon)).collect();
        Self::new(t0, epsilon, values)
    }

    pub fn time(&self, m: usize) -> f64 {
        self.t0 + m as f64 * self.epsilon
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }
}

fn windowed_sum(
    op: &ScaleOperator,
    f: &GridFunction,
    m: usize,
    t0: f64,
    tf: f64,
    sign: i64,
) -> Result<CVector> {
    let n = op.n as i64;
    let t = f.time(m);
    let mut acc = DVector::from_element(f.dim(), C64::new(0.0, 0.0));
    for j in -n..=n {
        let shift = sign * j;
        // □_ε uses χ_{−j}, □_{−ε} uses χ_j
        if !op.chi(-shift, t, t0, tf) {
            continue;
        }
        let node = m as i64 + shift;
        if node < 0 || node as usize >= f.len() {
            return Err(Error::OutOfRange(format!("node {node} needed at m = {m}")));
        }
        acc += &f.values[node as usize] * (op.gamma(j) / op.epsilon);
    }
    Ok(acc)
}

/// `□_ε f` at node `m`.
pub fn box_apply(op: &ScaleOperator, f: &GridFunction, m: usize, t0: f64, tf: f64) -> Result<CVector> {
    windowed_sum(op, f, m, t0, tf, 1)
}

/// `□_{−ε} f(t) = Σ γ_j/ε · f(t−jε) · χ_j(t)` at node `m`.
pub fn adjoint_box_apply(
    op: &ScaleOperator,
    f: &GridFunction,
    m: usize,
    t0: f64,
    tf: f64,
) -> Result<CVector> {
    windowed_sum(op, f, m, t0, tf, -1)
}

/// `e^z − 1` without cancellation near `z = 0`.
pub fn expm1(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    C64::new(x.exp_m1() * y.cos() - 2.0 * half * half, x.exp() * y.sin())
}

/// `θ(λ) = e^{−λt}□_{−ε}□_ε e^{λt}` on the interior window.
pub fn symbol_theta(op: &ScaleOperator, lambda: C64) -> C64 {
    let n = op.n as i64;
    let z = (lambda * op.epsilon).exp();
    let zinv = 1.0 / z;
    let c = op.theta_laurent();
    let mut acc = C64::new(0.0, 0.0);
    for (idx, ck) in c.iter().enumerate() {
        let k = idx as i64 - 2 * n;
        let p = if k >= 0 { z.powi(k as i32) } else { zinv.powi((-k) as i32) };
        acc += ck * p;
    }
    acc
}

/// `σ1(λ) = Σ_k (γ_k − γ_{−k}) e^{kλε}/ε = s(λ) − s̄(λ)`.
pub fn symbol_sigma1(op: &ScaleOperator, lambda: C64) -> C64 {
    let n = op.n as i64;
    (-n..=n)
        .map(|k| (op.gamma(k) - op.gamma(-k)) * (lambda * (k as f64 * op.epsilon)).exp())
        .sum::<C64>()
        / op.epsilon
}
