//! JSON experiment configs (`schema: 1`) and their conversion into core
//! types. Matrices are row-major integer arrays; trigonometric
//! polynomials are term lists `{freq, re, im}` per coordinate.

use serde::Deserialize;

use anosov_core::lattice::UnimodularMatrix;
use anosov_core::maps::{SkewProductMap, TorusMap, TrigPolynomial};
use anosov_core::num_complex::Complex64;

use crate::error::{invalid, LabError};

pub const SCHEMA: u32 = 1;

pub fn check_schema(schema: u32) -> Result<(), LabError> {
    if schema != SCHEMA {
        return Err(invalid(format!("unsupported schema {schema}, expected {SCHEMA}")));
    }
    Ok(())
}

pub fn check_positive(name: &str, v: f64) -> Result<(), LabError> {
    if !(v > 0.0) {
        return Err(invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Deserialize)]
pub struct TermDef {
    pub freq: Vec<i64>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// One trig polynomial: a list of half-spectrum terms; the conjugate
/// terms keeping the value real are implied.
pub type PolyDef = Vec<TermDef>;

pub fn to_poly(dim: usize, def: &PolyDef) -> Result<TrigPolynomial, LabError> {
    let mut half = Vec::with_capacity(def.len());
    for t in def {
        if t.freq.len() != dim {
            return Err(invalid(format!(
                "frequency {:?} has {} entries, expected {dim}",
                t.freq,
                t.freq.len()
            )));
        }
        half.push((t.freq.clone(), Complex64::new(t.re, t.im)));
    }
    Ok(TrigPolynomial::from_half_terms(dim, &half))
}

pub fn to_matrix(rows: &[Vec<i64>]) -> Result<UnimodularMatrix, LabError> {
    let rows128: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    UnimodularMatrix::new(&rows128).map_err(|e| invalid(format!("matrix: {e}")))
}

#[derive(Debug, Clone, Deserialize)]
pub struct MapDef {
    pub linear: Vec<Vec<i64>>,
    #[serde(default)]
    pub perturbation: Option<Vec<PolyDef>>,
}

impl MapDef {
    pub fn build(&self) -> Result<TorusMap, LabError> {
        let m = to_matrix(&self.linear)?;
        let d = m.dim();
        match &self.perturbation {
            None => Ok(TorusMap::linear_map(m)),
            Some(polys) => {
                if polys.len() != d {
                    return Err(invalid(format!(
                        "perturbation has {} coordinates, expected {d}",
                        polys.len()
                    )));
                }
                let ps = polys
                    .iter()
                    .map(|p| to_poly(d, p))
                    .collect::<Result<Vec<_>, _>>()?;
                TorusMap::new(m, ps).map_err(|e| invalid(format!("map: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct SkewDef {
    pub fiber_matrix: Vec<Vec<i64>>,
    pub fiber_shift: Vec<PolyDef>,
    pub base: MapDef,
}

impl SkewDef {
    pub fn build(&self) -> Result<SkewProductMap, LabError> {
        let a = to_matrix(&self.fiber_matrix)?;
        let base = self.base.build()?;
        let shift = self
            .fiber_shift
            .iter()
            .map(|p| to_poly(base.dim(), p))
            .collect::<Result<Vec<_>, _>>()?;
        SkewProductMap::new(a, shift, base).map_err(|e| invalid(format!("skew: {e}")))
    }
}

fn default_tol() -> f64 {
    1e-9
}

fn default_samples() -> usize {
    10_000
}

fn default_max_period() -> u32 {
    4
}

#[derive(Debug, Clone, Deserialize)]
pub struct SpectrumConfig {
    pub schema: u32,
    pub matrix: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FactorConfig {
    pub schema: u32,
    /// Coefficients lowest-degree-first.
    pub poly: Vec<i64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BlockdiagConfig {
    pub schema: u32,
    pub matrix: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PeriodicConfig {
    pub schema: u32,
    #[serde(default = "default_max_period")]
    pub max_period: u32,
    /// Linear mode: counts and rational points of a single automorphism.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<i64>>>,
    /// Skew mode: full orbit enumeration.
    #[serde(default)]
    pub skew: Option<SkewDef>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DllaveConfig {
    pub schema: u32,
    pub a: Vec<Vec<i64>>,
    pub b: Vec<Vec<i64>>,
    pub phi: PolyDef,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_max_period")]
    pub max_period: u32,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReducibleConfig {
    pub schema: u32,
    pub matrix: Vec<Vec<i64>>,
    pub eps: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ComplexConfig {
    pub schema: u32,
    pub b: Vec<Vec<i64>>,
    /// Two shift components in the rotating fiber plane.
    pub phi: [PolyDef; 2],
    /// Modulus of the complex fiber expansion rate.
    pub lambda_abs: f64,
    /// Weakest base expansion rate.
    pub mu_abs: f64,
    /// Rotation angle of the complex fiber pair, radians.
    pub fiber_angle: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CoboundaryConfig {
    pub schema: u32,
    pub a: Vec<Vec<i64>>,
    pub b: Vec<Vec<i64>>,
    pub phi: PolyDef,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ConditionConfig {
    pub schema: u32,
    pub a: Vec<Vec<i64>>,
    pub b: Vec<Vec<i64>>,
    pub phi: PolyDef,
    /// Optional second shift: runs the equal-rate difference condition.
    #[serde(default)]
    pub xi: Option<PolyDef>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PdCheckConfig {
    pub schema: u32,
    pub f: SkewDef,
    pub g: SkewDef,
    #[serde(default = "default_max_period")]
    pub max_period: u32,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RegularityConfig {
    pub schema: u32,
    pub a: Vec<Vec<i64>>,
    pub b: Vec<Vec<i64>>,
    pub phi: PolyDef,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// "unstable" or "stable" direction of the base automorphism.
    pub direction: String,
    /// 1 for first differences, 2 for second differences.
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default = "default_base_points")]
    pub base_points: usize,
    #[serde(default = "default_j_min")]
    pub j_min: u32,
    #[serde(default = "default_j_max")]
    pub j_max: u32,
}

fn default_order() -> u32 {
    1
}

fn default_base_points() -> usize {
    64
}

fn default_j_min() -> u32 {
    anosov_core::regularity::DEFAULT_J_MIN
}

fn default_j_max() -> u32 {
    anosov_core::regularity::DEFAULT_J_MAX
}

#[derive(Debug, Clone, Deserialize)]
pub struct LeafConfig {
    pub schema: u32,
    pub map: MapDef,
    pub point: Vec<f64>,
    pub bundle: usize,
    pub radius: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TubeConfig {
    pub schema: u32,
    pub map: MapDef,
    pub point: Vec<f64>,
    pub ball_radius: f64,
    pub bundle: usize,
    pub r_max: f64,
    pub eps: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DensityConfig {
    pub schema: u32,
    pub map: MapDef,
    pub point: Vec<f64>,
    pub bundle: usize,
    pub r_max: f64,
    pub step: f64,
    pub eps: f64,
    /// Straight-line override: skip leaf integration and walk this
    /// direction instead (control experiments).
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
    /// Coverage checkpoints in leaf radius.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
}

fn default_checkpoints() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
pub struct GibbsConfig {
    pub schema: u32,
    pub map: MapDef,
    pub point: Vec<f64>,
    pub plaque_len: f64,
    pub iterations: usize,
    #[serde(default)]
    pub skip: usize,
    pub grid: usize,
    pub samples: usize,
    #[serde(default = "default_depth")]
    pub depth: usize,
}

fn default_depth() -> usize {
    30
}

#[derive(Debug, Clone, Deserialize)]
pub struct ModuliConfig {
    pub schema: u32,
    pub f: SkewDef,
    #[serde(default)]
    pub g: Option<SkewDef>,
    /// Base points of the modulus samples.
    pub points: Vec<Vec<f64>>,
    /// Strong-leaf parameters.
    pub ts: Vec<f64>,
    #[serde(default = "default_moduli_tol")]
    pub tol: f64,
}

fn default_moduli_tol() -> f64 {
    1e-4
}

pub fn load<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, LabError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}
