//! AL-norms from strictly positive functionals and the finite probability
//! model they induce.
//!
//! In finite dimension the norm completion of `(X, x0*(|·|))` is `X` itself,
//! so the completion is never materialized: the view exposes the norm and the
//! isometry onto a weighted `L1` space where `x0` becomes the constant one.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::lattice::{is_weak_unit, Element, Functional, LatticeModel};
use crate::matrix::Matrix;
use crate::random;

/// Relative tolerance for `Tᵀw = w` checks.
pub const PRESERVATION_TOLERANCE: f64 = 1e-10;

/// Tolerance for the normalization `x0*(x0) = 1`.
const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ALView {
    base: LatticeModel,
    x0star: Functional,
    x0: Element,
    normalized: bool,
}

/// Serialized form: `{"x0": [...], "x0star": [...]}`, the model stored beside it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ALViewSpec {
    pub x0: Element,
    pub x0star: Functional,
}

impl ALView {
    pub fn new(base: LatticeModel, x0star: Functional, x0: Element) -> Result<Self> {
        base.check(&x0)?;
        ensure_dim(base.dim(), x0star.dim())?;
        if !x0star.is_strict() {
            return Err(Error::Precondition("x0star is not strictly positive".into()));
        }
        if !is_weak_unit(&x0)? {
            return Err(Error::Precondition(format!("x0 = {x0} is not a weak unit")));
        }
        let normalized = (x0star.apply(&x0) - 1.0).abs() <= NORMALIZATION_TOLERANCE;
        Ok(ALView { base, x0star, x0, normalized })
    }

    pub fn from_spec(base: LatticeModel, spec: ALViewSpec) -> Result<Self> {
        ALView::new(base, spec.x0star, spec.x0)
    }

    pub fn spec(&self) -> ALViewSpec {
        ALViewSpec { x0: self.x0.clone(), x0star: self.x0star.clone() }
    }

    /// Rescales `x0star` so that `x0star(x0) = 1`.
    pub fn normalize(&self) -> Result<ALView> {
        let mass = self.x0star.apply(&self.x0);
        let x0star = self.x0star.scale(1.0 / mass)?;
        let mut view = ALView::new(self.base.clone(), x0star, self.x0.clone())?;
        view.normalized = true;
        Ok(view)
    }

    pub fn base(&self) -> &LatticeModel {
        &self.base
    }

    pub fn x0star(&self) -> &Functional {
        &self.x0star
    }

    pub fn x0(&self) -> &Element {
        &self.x0
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `‖x‖_L = x0*(|x|)`.
    pub fn al_norm(&self, x: &Element) -> f64 {
        self.x0star.apply(&x.abs())
    }
}

/// Weighted `L1(μ)` image of a normalized view, `μ_i = x0*_i · x0_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityModel {
    pub model: LatticeModel,
    /// Image of `x0`, the constant one.
    pub one: Element,
    x0: Element,
}

impl ProbabilityModel {
    /// `x ↦ (x_i / x0_i)_i`.
    pub fn map(&self, x: &Element) -> Element {
        Element::new(x.coords().iter().zip(self.x0.coords()).map(|(a, b)| a / b).collect())
    }

    pub fn unmap(&self, y: &Element) -> Element {
        Element::new(y.coords().iter().zip(self.x0.coords()).map(|(a, b)| a * b).collect())
    }

    pub fn mu(&self) -> &[f64] {
        self.model.weights()
    }
}

pub fn to_probability_model(view: &ALView) -> Result<ProbabilityModel> {
    if !view.is_normalized() {
        return Err(Error::NotNormalized(view.x0star.apply(&view.x0)));
    }
    let mu = view.x0star.weights().iter().zip(view.x0.coords()).map(|(w, x)| w * x).collect();
    Ok(ProbabilityModel {
        model: LatticeModel::l1(mu)?,
        one: Element::constant(view.x0.dim(), 1.0),
        x0: view.x0.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionCheck {
    pub preserves: bool,
    pub contraction_ratio: f64,
}

/// 100 seeded random probes followed by the standard basis.
pub fn default_probes(dim: usize, seed: u64) -> Vec<Element> {
    let mut rng = random::rng(seed);
    (0..100)
        .map(|_| random::element(&mut rng, dim, 1.0))
        .chain((0..dim).map(|i| Element::basis(dim, i)))
        .collect()
}

/// Whether `Tᵀ x0* = x0*` and the largest ratio `‖Tx‖_L / ‖x‖_L` over `probes`.
pub fn contractive_extension_check(view: &ALView, t: &Matrix<f64>, probes: &[Element]) -> Result<ContractionCheck> {
    let dim = view.base.dim();
    if t.rows() != dim || t.cols() != dim {
        return Err(Error::Structure(format!("operator is {}x{}, expected {dim}x{dim}", t.rows(), t.cols())));
    }
    if !t.is_nonnegative() {
        return Err(Error::Precondition("operator has a negative entry".into()));
    }
    let w = view.x0star.weights();
    let tw = t.apply_transpose(w);
    let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let defect = tw.iter().zip(w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let preserves = defect <= PRESERVATION_TOLERANCE * scale;
    let mut ratio = 0.0f64;
    for x in probes {
        ensure_dim(dim, x.dim())?;
        let denom = view.al_norm(x);
        if denom > 0.0 {
            ratio = ratio.max(view.al_norm(&Element::new(t.apply(x.coords()))) / denom);
        }
    }
    Ok(ContractionCheck { preserves, contraction_ratio: ratio })
}
