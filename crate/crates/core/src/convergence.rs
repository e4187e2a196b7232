//! Convergence of the discrete pencil and its spectrum to the classical ones as `ε → 0`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::LagrangianSpec;
use crate::numkernel::{RootSet, C64};
use crate::pencil::{classical_eval, classical_spectrum, transcendental_spectrum, ClassicalPencil, TranscendentalPencil};
use crate::scaleop::{check_operator_conditions, ScaleOperator};

/// Points per axis of the λ-grid on which the pencil error is sampled.
pub const PENCIL_GRID: usize = 21;

/// `max{ max_x min_y |x−y|, max_y min_x |x−y| }`.
pub fn hausdorff_distance(f1: &[C64], f2: &[C64]) -> Result<f64> {
    if f1.is_empty() || f2.is_empty() {
        return Err(Error::EmptySet);
    }
    let directed = |a: &[C64], b: &[C64]| {
        a.iter()
            .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(f1, f2).max(directed(f2, f1)))
}

/// Roots inside the closed disk of radius `k_radius`.
pub fn filter_to_window(roots: &RootSet, k_radius: f64) -> RootSet {
    roots.filter(|r| r.norm() <= k_radius)
}

/// `2·max|λ| + 1` over the classical roots.
pub fn default_radius(classical: &[C64]) -> f64 {
    2.0 * classical.iter().map(|r| r.norm()).fold(0.0, f64::max) + 1.0
}

/// `max ‖P̃_ν(ε,λ) − P_ν(λ)‖₂` over a `PENCIL_GRID²` grid covering `[−K,K]²`.
pub fn pencil_error(spec: &LagrangianSpec, op: &ScaleOperator, nu: f64, k_radius: f64) -> f64 {
    let classical = ClassicalPencil::new(spec, nu);
    let discrete = TranscendentalPencil::new(spec, op, nu);
    let step = 2.0 * k_radius / (PENCIL_GRID - 1) as f64;
    let mut worst = 0.0f64;
    for i in 0..PENCIL_GRID {
        for j in 0..PENCIL_GRID {
            let lambda = C64::new(-k_radius + i as f64 * step, -k_radius + j as f64 * step);
            let diff = discrete.eval_lambda(lambda) - classical_eval(&classical, lambda);
            let norm = diff.svd(false, false).singular_values.max();
            worst = worst.max(norm);
        }
    }
    worst
}

/// Result at one step size; failures leave the measurements empty and record why.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub distance: Option<f64>,
    pub pencil_error: Option<f64>,
    pub retained: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Sorted by decreasing `ε`.
    pub points: Vec<SweepPoint>,
    pub k_radius: f64,
    pub classical: Vec<C64>,
    /// Least-squares slope of `log d_H` against `log ε`; needs three usable points.
    pub estimated_order: Option<f64>,
}

impl SweepResult {
    pub fn epsilons(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.epsilon).collect()
    }

    pub fn distances(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.distance).collect()
    }

    pub fn pencil_errors(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.pencil_error).collect()
    }
}

/// Least-squares slope of `y` against `x`; `None` below three points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

fn sweep_point<F>(spec: &LagrangianSpec, family: &F, nu: f64, eps: f64, k: f64, classical: &[C64]) -> SweepPoint
where
    F: Fn(f64) -> Result<ScaleOperator>,
{
    let failed = |note: String| SweepPoint { epsilon: eps, distance: None, pencil_error: None, retained: 0, note: Some(note) };
    let op = match family(eps) {
        Ok(op) => op,
        Err(e) => return failed(e.to_string()),
    };
    let conditions = check_operator_conditions(&op);
    if !conditions.holds() {
        return failed(format!("operator conditions fail: {conditions:?}"));
    }
    let perr = pencil_error(spec, &op, nu, k);
    let spectrum = match transcendental_spectrum(&TranscendentalPencil::new(spec, &op, nu)) {
        Ok(s) => s,
        Err(e) => return SweepPoint { pencil_error: Some(perr), ..failed(e.to_string()) },
    };
    let kept = filter_to_window(&spectrum.lambdas, k);
    match hausdorff_distance(kept.roots(), classical) {
        Ok(d) => SweepPoint { epsilon: eps, distance: Some(d), pencil_error: Some(perr), retained: kept.len(), note: None },
        Err(e) => SweepPoint { pencil_error: Some(perr), ..failed(format!("no discrete roots within radius {k}: {e}")) },
    }
}

/// Hausdorff distance between the windowed discrete spectrum and the classical
/// spectrum, plus the pencil error, for each `ε`. Step sizes are evaluated in
/// parallel; a failing step is annotated and the sweep continues.
pub fn epsilon_sweep<F>(
    spec: &LagrangianSpec,
    op_family: F,
    nu: f64,
    epsilons: &[f64],
    k_radius: Option<f64>,
) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<ScaleOperator> + Sync,
{
    if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidOperator("step sizes must be positive".into()));
    }
    let classical = classical_spectrum(&ClassicalPencil::new(spec, nu))?.roots().to_vec();
    let k = k_radius.unwrap_or_else(|| default_radius(&classical));
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let points: Vec<SweepPoint> = eps
        .par_iter()
        .map(|&e| sweep_point(spec, &op_family, nu, e, k, &classical))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().filter_map(|p| p.distance.map(|d| (p.epsilon, d))).unzip();
    Ok(SweepResult { estimated_order: loglog_slope(&xs, &ys), points, k_radius: k, classical })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn oscillator() -> LagrangianSpec {
        LagrangianSpec::uncoupled(1, DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, -1.0)).unwrap()
    }

    #[test]
    fn hausdorff_small_sets() {
        assert_eq!(hausdorff_distance(&[c(0.0, 0.0)], &[c(3.0, 0.0), c(4.0, 0.0)]).unwrap(), 4.0);
        let a = [c(1.0, 2.0), c(-1.0, 0.5)];
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&a, &[]), Err(Error::EmptySet));
    }

    #[test]
    fn window_keeps_convergent_pair() {
        let op = ScaleOperator::central_difference(0.1).unwrap();
        let spec = transcendental_spectrum(&TranscendentalPencil::new(&oscillator(), &op, 1.0)).unwrap();
        assert_eq!(spec.lambdas.len(), 4);
        let kept = filter_to_window(&spec.lambdas, 10.0);
        assert_eq!(kept.len(), 2);
        assert!(filter_to_window(&spec.lambdas, 0.5).is_empty());
        assert_eq!(filter_to_window(&spec.lambdas, 100.0).len(), 4);
        let d = hausdorff_distance(kept.roots(), &[c(0.0, 1.0), c(0.0, -1.0)]).unwrap();
        assert!((d - (0.1f64.asin() / 0.1 - 1.0)).abs() < 1e-12, "{d}");
    }

    #[test]
    fn slope_of_exact_power() {
        let xs = [1.0, 0.5, 0.25, 0.125];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&xs[..2], &ys[..2]), None);
    }

    #[test]
    fn scalar_sweep_is_second_order() {
        let eps: Vec<f64> = (0..6).map(|r| 0.1 / 2f64.powi(r)).collect();
        let sweep = epsilon_sweep(&oscillator(), ScaleOperator::central_difference, 1.0, &eps, Some(10.0)).unwrap();
        for p in &sweep.points {
            let expected = p.epsilon.asin() / p.epsilon - 1.0;
            assert!((p.distance.unwrap() - expected).abs() < 1e-9);
        }
        assert!((sweep.estimated_order.unwrap() - 2.0).abs() < 0.05);
        let errs: Vec<f64> = sweep.pencil_errors().into_iter().flatten().collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn failing_operator_is_annotated() {
        let family = |e: f64| ScaleOperator::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], e);
        let sweep = epsilon_sweep(&oscillator(), family, 1.0, &[0.1, 0.05, 0.025], Some(10.0)).unwrap();
        assert!(sweep.points.iter().all(|p| p.distance.is_none() && p.note.is_some()));
        assert_eq!(sweep.estimated_order, None);
    }

    #[test]
    fn sweep_orders_by_decreasing_step() {
        let sweep = epsilon_sweep(&oscillator(), ScaleOperator::central_difference, 1.0, &[0.01, 0.1, 0.05], None).unwrap();
        assert_eq!(sweep.epsilons(), vec![0.1, 0.05, 0.01]);
        assert!((sweep.k_radius - 3.0).abs() < 1e-9);
    }
}
