//! JSON experiment configuration.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{construct_j4, j4_for_spectrum, LagrangianSpec};
use crate::numkernel::C64;
use crate::scaleop::ScaleOperator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "J1")]
    pub j1: Vec<Vec<f64>>,
    #[serde(rename = "J2")]
    pub j2: Vec<Vec<f64>>,
    #[serde(rename = "J3", default)]
    pub j3: Option<Vec<Vec<f64>>>,
    #[serde(rename = "J4", default)]
    pub j4: Option<Vec<Vec<f64>>>,
    #[serde(rename = "J5", default)]
    pub j5: Option<Vec<Vec<f64>>>,
    #[serde(rename = "J6", default)]
    pub j6: Option<Vec<f64>>,
    #[serde(rename = "J7", default)]
    pub j7: Option<Vec<f64>>,
    #[serde(default)]
    pub operator: OperatorConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub targets: Option<TargetsConfig>,
    #[serde(default)]
    pub boundary: Option<BoundaryConfig>,
    #[serde(default)]
    pub amplitudes: Option<AmplitudeConfig>,
    #[serde(default)]
    pub choreography: Option<ChoreographyConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

/// Either an explicit stencil (`N`, `gamma_re`, `gamma_im`) or `family = "k_family"` with `k`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    #[serde(rename = "N", default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub gamma_re: Option<Vec<f64>>,
    #[serde(default)]
    pub gamma_im: Option<Vec<f64>>,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t0: f64,
    pub tf: f64,
    #[serde(rename = "M")]
    pub m: usize,
}

/// Target particle spectrum used to build `J4`: classical frequencies `omega`
/// (with `j4_free` for the two-dimensional construction) or raw `kappa` values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsConfig {
    #[serde(default)]
    pub omega: Option<Vec<f64>>,
    #[serde(default)]
    pub j4_free: Option<f64>,
    #[serde(default)]
    pub kappa: Option<Vec<f64>>,
}

/// Real positions, one row of length `d` per particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub start: Vec<Vec<f64>>,
    pub end: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeConfig {
    pub sum_re: Vec<f64>,
    #[serde(default)]
    pub sum_im: Option<Vec<f64>>,
    #[serde(default)]
    pub particles_re: Vec<Vec<f64>>,
    #[serde(default)]
    pub particles_im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoreographyConfig {
    pub amplitudes_re: Vec<f64>,
    #[serde(default)]
    pub amplitudes_im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for GammaGrid {
    fn default() -> Self {
        Self { min: -1.0, max: 1.0, points: 41 }
    }
}

impl GammaGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points <= 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub k_grid: Option<Vec<f64>>,
    #[serde(rename = "M_grid", default)]
    pub m_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub gamma_grid: Option<GammaGrid>,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub k_radius: Option<f64>,
}

/// How step sizes map to operators.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorFamily {
    KFamily(f64),
    Fixed(Vec<C64>),
}

impl OperatorFamily {
    pub fn at(&self, epsilon: f64) -> Result<ScaleOperator> {
        match self {
            OperatorFamily::KFamily(k) => ScaleOperator::k_family(*k, epsilon),
            OperatorFamily::Fixed(g) => ScaleOperator::new(g.clone(), epsilon),
        }
    }
}

/// A validated configuration with its derived objects.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub spec: LagrangianSpec,
    pub family: OperatorFamily,
    pub op: ScaleOperator,
    pub t0: f64,
    pub tf: f64,
    pub m: usize,
    pub epsilon: f64,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::ConfigParse(e.to_string())
}

fn matrix(name: &str, rows: &[Vec<f64>], d: usize) -> Result<DMatrix<f64>> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::ConfigParse(format!("{name}: rows have different lengths")));
    }
    if rows.len() != d || width != d {
        return Err(Error::DimensionMismatch(format!("{name} is {}x{width}, expected {d}x{d}", rows.len())));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

fn vector(name: &str, v: &[f64], d: usize) -> Result<DVector<f64>> {
    if v.len() != d {
        return Err(Error::DimensionMismatch(format!("{name} has length {}, expected {d}", v.len())));
    }
    Ok(DVector::from_column_slice(v))
}

/// Pairs real and optional imaginary parts into complex numbers.
pub fn complex_pairs(name: &str, re: &[f64], im: Option<&Vec<f64>>) -> Result<Vec<C64>> {
    match im {
        Some(im) if im.len() != re.len() => Err(Error::DimensionMismatch(format!(
            "{name}: {} real parts but {} imaginary parts",
            re.len(),
            im.len()
        ))),
        Some(im) => Ok(re.iter().zip(im).map(|(a, b)| C64::new(*a, *b)).collect()),
        None => Ok(re.iter().map(|a| C64::new(*a, 0.0)).collect()),
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(parse_err)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn operator_family(&self) -> Result<OperatorFamily> {
        let op = &self.operator;
        match (op.family.as_deref(), &op.gamma_re) {
            (Some("k_family"), None) => Ok(OperatorFamily::KFamily(op.k.unwrap_or(0.0))),
            (Some("central"), None) | (None, None) => Ok(OperatorFamily::KFamily(0.0)),
            (Some(other), None) => Err(Error::ConfigParse(format!("unknown operator family '{other}'"))),
            (Some(_), Some(_)) => Err(Error::ConfigParse("operator: give either a family or gamma_re".into())),
            (None, Some(re)) => {
                let gamma = complex_pairs("operator.gamma", re, op.gamma_im.as_ref())?;
                if let Some(order) = op.order {
                    if gamma.len() != 2 * order + 1 {
                        return Err(Error::DimensionMismatch(format!(
                            "operator.N = {order} needs {} coefficients, got {}",
                            2 * order + 1,
                            gamma.len()
                        )));
                    }
                }
                Ok(OperatorFamily::Fixed(gamma))
            }
        }
    }

    /// Builds the spec and operator, checking every dimension first.
    pub fn resolve(&self) -> Result<Experiment> {
        let d = self.d;
        if d == 0 || self.n == 0 {
            return Err(Error::DimensionMismatch("d and n must be positive".into()));
        }
        if self.time.m == 0 || !(self.time.tf > self.time.t0) {
            return Err(Error::ConfigParse("time: need tf > t0 and M > 0".into()));
        }
        let zeros = || DMatrix::zeros(d, d);
        let j1 = matrix("J1", &self.j1, d)?;
        let j2 = matrix("J2", &self.j2, d)?;
        let j3 = self.j3.as_ref().map(|m| matrix("J3", m, d)).transpose()?.unwrap_or_else(zeros);
        let j5 = self.j5.as_ref().map(|m| matrix("J5", m, d)).transpose()?.unwrap_or_else(zeros);
        let j6 = self.j6.as_ref().map(|v| vector("J6", v, d)).transpose()?.unwrap_or_else(|| DVector::zeros(d));
        let j7 = self.j7.as_ref().map(|v| vector("J7", v, d)).transpose()?.unwrap_or_else(|| DVector::zeros(d));
        if let Some(b) = &self.boundary {
            for (name, rows) in [("boundary.start", &b.start), ("boundary.end", &b.end)] {
                if rows.len() != self.n || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::DimensionMismatch(format!("{name} must have {} rows of length {d}", self.n)));
                }
            }
        }
        let j4 = match (&self.j4, &self.targets) {
            (Some(_), Some(_)) => return Err(Error::ConfigParse("give either J4 or targets, not both".into())),
            (Some(m), None) => matrix("J4", m, d)?,
            (None, None) => zeros(),
            (None, Some(t)) => match (&t.omega, &t.kappa) {
                (Some(w), None) if d == 2 && w.len() == 2 && t.j4_free.is_some() => {
                    construct_j4(&j1, &j2, &j3, w[0], w[1], t.j4_free.unwrap_or_default())?
                }
                (Some(w), None) => {
                    let kappas: Vec<f64> = w.iter().map(|x| x * x).collect();
                    j4_for_spectrum(&j1, &j2, &j3, &kappas)?
                }
                (None, Some(k)) => j4_for_spectrum(&j1, &j2, &j3, k)?,
                _ => return Err(Error::ConfigParse("targets: give exactly one of omega or kappa".into())),
            },
        };
        let spec = LagrangianSpec::new(self.n, j1, j2, j3, j4, j5, j6, j7)?;
        let family = self.operator_family()?;
        let epsilon = (self.time.tf - self.time.t0) / self.time.m as f64;
        let op = family.at(epsilon)?;
        Ok(Experiment {
            config: self.clone(),
            spec,
            family,
            op,
            t0: self.time.t0,
            tf: self.time.tf,
            m: self.time.m,
            epsilon,
        })
    }
}

impl Experiment {
    /// `(start, end)` as `n × d` matrices.
    pub fn boundary(&self) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        let b = self.config.boundary.as_ref()?;
        let (n, d) = (self.spec.n, self.spec.d);
        let m = |rows: &Vec<Vec<f64>>| DMatrix::from_fn(n, d, |i, j| rows[i][j]);
        Some((m(&b.start), m(&b.end)))
    }

    pub fn sweep(&self) -> SweepConfig {
        self.config.sweep.clone().unwrap_or_default()
    }
}
