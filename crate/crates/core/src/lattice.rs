//! Finite-coordinate vector lattices.
//!
//! A [`LatticeModel`] is `R^dim` with the coordinatewise order, a strictly
//! positive weight vector and a norm descriptor. Truncations of sequence
//! spaces are distinguished by their [`SpaceTag`], which changes the
//! membership predicate used for limit candidates (see [`DecayTest`]).
//!
//! [`Element`]s are plain coordinate vectors. Lattice operations act
//! coordinatewise and are exact on the given reals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ensure_dim, Error, Result};

/// Default absolute tolerance for comparisons of derived reals.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    /// `Σ w_i |x_i|`
    L1Weighted,
    /// `(Σ w_i |x_i|^p)^{1/p}`, `p ∈ (1, ∞)`
    Lp(f64),
    /// `max_i |x_i|`
    Sup,
    /// Sup norm on a truncation of `c0`.
    C0Sup,
}

impl NormKind {
    fn parse(raw: &str, tag: SpaceTag) -> Result<Self> {
        match raw {
            "l1" => Ok(NormKind::L1Weighted),
            "sup" if tag == SpaceTag::C0Truncation => Ok(NormKind::C0Sup),
            "sup" => Ok(NormKind::Sup),
            "c0" => Ok(NormKind::C0Sup),
            other => match other.strip_prefix("lp:") {
                Some(p) => p
                    .trim()
                    .parse::<f64>()
                    .map(NormKind::Lp)
                    .map_err(|_| Error::InvalidModel(format!("bad exponent in norm {other:?}"))),
                None => Err(Error::InvalidModel(format!(
                    "unknown norm {other:?}, expected l1, lp:<p> or sup"
                ))),
            },
        }
    }

    fn label(self) -> String {
        match self {
            NormKind::L1Weighted => "l1".to_string(),
            NormKind::Lp(p) => format!("lp:{p}"),
            NormKind::Sup | NormKind::C0Sup => "sup".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceTag {
    #[serde(rename = "L1", alias = "l1")]
    L1,
    #[serde(rename = "Lp", alias = "lp")]
    Lp,
    #[serde(rename = "ell_infinity")]
    EllInfinity,
    #[serde(rename = "c0_truncation", alias = "c0")]
    C0Truncation,
    #[serde(rename = "product")]
    Product,
}

/// Membership test for truncated `c0`: a vector belongs if its sup over the
/// trailing `tail_fraction` of coordinates is at most `ratio` times its
/// overall sup.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayTest {
    pub tail_fraction: f64,
    pub ratio: f64,
}

impl Default for DecayTest {
    fn default() -> Self {
        DecayTest { tail_fraction: 0.25, ratio: 0.5 }
    }
}

impl DecayTest {
    /// First coordinate of the tail window (at least one coordinate).
    pub fn tail_start(&self, dim: usize) -> usize {
        let len = ((dim as f64) * self.tail_fraction).ceil() as usize;
        dim - len.clamp(1, dim.max(1))
    }

    pub fn accepts(&self, coords: &[f64]) -> bool {
        if coords.iter().any(|c| !c.is_finite()) {
            return false;
        }
        let sup = coords.iter().map(|c| c.abs()).fold(0.0, f64::max);
        if sup == 0.0 {
            return true;
        }
        let tail = coords[self.tail_start(coords.len())..]
            .iter()
            .map(|c| c.abs())
            .fold(0.0, f64::max);
        tail <= self.ratio * sup
    }
}

/// Layout of `L1(Ω; F)` over finitely many atoms: coordinate `(ω, j)` is
/// stored at `ω * fiber.dim + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductLayout {
    pub atom_weights: Vec<f64>,
    pub fiber: LatticeModel,
}

impl ProductLayout {
    pub fn atoms(&self) -> usize {
        self.atom_weights.len()
    }

    pub fn fiber_slice<'a>(&self, x: &'a Element, atom: usize) -> &'a [f64] {
        let d = self.fiber.dim();
        &x.coords()[atom * d..(atom + 1) * d]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeModel {
    dim: usize,
    weights: Vec<f64>,
    norm: NormKind,
    tag: SpaceTag,
    tolerance: f64,
    decay: DecayTest,
    product: Option<Box<ProductLayout>>,
}

impl LatticeModel {
    pub fn new(weights: Vec<f64>, norm: NormKind, tag: SpaceTag) -> Result<Self> {
        let norm = match (norm, tag) {
            (NormKind::Sup, SpaceTag::C0Truncation) => NormKind::C0Sup,
            (n, _) => n,
        };
        let model = LatticeModel {
            dim: weights.len(),
            weights,
            norm,
            tag,
            tolerance: DEFAULT_TOLERANCE,
            decay: DecayTest::default(),
            product: None,
        };
        model.check_invariants()?;
        Ok(model)
    }

    /// Weighted L1 with the given (strictly positive) measure.
    pub fn l1(weights: Vec<f64>) -> Result<Self> {
        LatticeModel::new(weights, NormKind::L1Weighted, SpaceTag::L1)
    }

    /// Truncation of `ℓ1` (all weights one).
    pub fn ell1(dim: usize) -> Result<Self> {
        LatticeModel::l1(vec![1.0; dim])
    }

    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        LatticeModel::new(vec![1.0; dim], NormKind::Lp(p), SpaceTag::Lp)
    }

    pub fn c0(dim: usize) -> Result<Self> {
        LatticeModel::new(vec![1.0; dim], NormKind::C0Sup, SpaceTag::C0Truncation)
    }

    pub fn ell_infinity(dim: usize) -> Result<Self> {
        LatticeModel::new(vec![1.0; dim], NormKind::Sup, SpaceTag::EllInfinity)
    }

    /// `L1(Ω; F)` for finitely many atoms with masses `atom_weights`.
    pub fn product(atom_weights: Vec<f64>, fiber: LatticeModel) -> Result<Self> {
        if fiber.product.is_some() {
            return Err(Error::InvalidModel("nested product models are not supported".into()));
        }
        let weights = atom_weights
            .iter()
            .flat_map(|&a| fiber.weights.iter().map(move |&w| a * w))
            .collect();
        let tolerance = fiber.tolerance;
        let model = LatticeModel {
            dim: atom_weights.len() * fiber.dim,
            weights,
            norm: NormKind::L1Weighted,
            tag: SpaceTag::Product,
            tolerance,
            decay: fiber.decay,
            product: Some(Box::new(ProductLayout { atom_weights, fiber })),
        };
        model.check_invariants()?;
        Ok(model)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        if let Some(layout) = self.product.as_mut() {
            layout.fiber.tolerance = tolerance;
        }
        self
    }

    pub fn with_decay(mut self, decay: DecayTest) -> Self {
        self.decay = decay;
        self
    }

    fn check_invariants(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidModel("dim must be at least 1".into()));
        }
        if let Some(i) = self.weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidModel(format!(
                "weight {i} is {}, weights must be strictly positive",
                self.weights[i]
            )));
        }
        let consistent = matches!(
            (self.tag, self.norm),
            (SpaceTag::L1, NormKind::L1Weighted)
                | (SpaceTag::Lp, NormKind::Lp(_))
                | (SpaceTag::EllInfinity, NormKind::Sup)
                | (SpaceTag::C0Truncation, NormKind::C0Sup)
                | (SpaceTag::Product, NormKind::L1Weighted)
        );
        if !consistent {
            return Err(Error::InvalidModel(format!(
                "norm {} is inconsistent with tag {:?}",
                self.norm.label(),
                self.tag
            )));
        }
        if let NormKind::Lp(p) = self.norm {
            if !(p > 1.0 && p.is_finite()) {
                return Err(Error::InvalidModel(format!("exponent {p} outside (1, ∞)")));
            }
        }
        if (self.tag == SpaceTag::Product) != self.product.is_some() {
            return Err(Error::InvalidModel("product tag requires an atom/fiber layout".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    pub fn tag(&self) -> SpaceTag {
        self.tag
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn decay(&self) -> DecayTest {
        self.decay
    }

    pub fn product_layout(&self) -> Option<&ProductLayout> {
        self.product.as_deref()
    }

    pub fn check(&self, x: &Element) -> Result<()> {
        ensure_dim(self.dim, x.dim())
    }

    /// Model norm. Panics if `x` has the wrong dimension.
    pub fn norm(&self, x: &Element) -> f64 {
        assert_eq!(x.dim(), self.dim, "element does not belong to this model");
        self.norm_of(x.coords())
    }

    fn norm_of(&self, coords: &[f64]) -> f64 {
        if let Some(layout) = self.product.as_deref() {
            let d = layout.fiber.dim;
            return layout
                .atom_weights
                .iter()
                .zip(coords.chunks(d))
                .map(|(mu, fiber)| mu * layout.fiber.norm_of(fiber))
                .sum();
        }
        match self.norm {
            NormKind::L1Weighted => coords.iter().zip(&self.weights).map(|(x, w)| w * x.abs()).sum(),
            NormKind::Lp(p) => coords
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| w * x.abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
            NormKind::Sup | NormKind::C0Sup => coords.iter().map(|x| x.abs()).fold(0.0, f64::max),
        }
    }

    /// Canonical weak unit: `(1/i)_i` on sequence-space truncations, the
    /// all-ones vector on weighted L1, and the constant fiber unit on
    /// products.
    pub fn default_unit(&self) -> Element {
        match (self.tag, self.product.as_deref()) {
            (SpaceTag::Product, Some(layout)) => {
                let fiber = layout.fiber.default_unit();
                Element::new(
                    (0..layout.atoms()).flat_map(|_| fiber.coords().iter().copied()).collect(),
                )
            }
            (SpaceTag::L1, _) => Element::constant(self.dim, 1.0),
            _ => Element::harmonic(self.dim),
        }
    }

    /// Whether a limit candidate belongs to the tagged space. Only
    /// `c0_truncation` (and products with a `c0` fiber) can reject a finite
    /// vector.
    pub fn accepts_limit(&self, x: &Element) -> bool {
        if x.dim() != self.dim || x.coords().iter().any(|c| !c.is_finite()) {
            return false;
        }
        match (self.tag, self.product.as_deref()) {
            (SpaceTag::C0Truncation, _) => self.decay.accepts(x.coords()),
            (SpaceTag::Product, Some(layout)) => (0..layout.atoms()).all(|a| {
                layout.fiber.accepts_limit(&Element::new(layout.fiber_slice(x, a).to_vec()))
            }),
            _ => true,
        }
    }

    pub fn zero(&self) -> Element {
        Element::zeros(self.dim)
    }
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    norm: String,
    tag: SpaceTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    decay: Option<DecayTest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atom_weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fiber: Option<Box<LatticeModel>>,
}

impl Serialize for LatticeModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawModel {
            dim: self.dim,
            weights: if self.product.is_some() { None } else { Some(self.weights.clone()) },
            norm: self.norm.label(),
            tag: self.tag,
            tolerance: (self.tolerance != DEFAULT_TOLERANCE).then_some(self.tolerance),
            decay: (self.decay != DecayTest::default()).then_some(self.decay),
            atom_weights: self.product.as_ref().map(|p| p.atom_weights.clone()),
            fiber: self.product.as_ref().map(|p| Box::new(p.fiber.clone())),
        };
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LatticeModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawModel::deserialize(deserializer)?;
        let norm = NormKind::parse(&raw.norm, raw.tag).map_err(D::Error::custom)?;
        let mut model = match (raw.tag, raw.fiber, raw.atom_weights) {
            (SpaceTag::Product, Some(fiber), Some(atoms)) => {
                LatticeModel::product(atoms, *fiber).map_err(D::Error::custom)?
            }
            (SpaceTag::Product, _, _) => {
                return Err(D::Error::custom("product model needs `fiber` and `atom_weights`"))
            }
            (tag, _, _) => {
                let weights = raw.weights.unwrap_or_else(|| vec![1.0; raw.dim]);
                LatticeModel::new(weights, norm, tag).map_err(D::Error::custom)?
            }
        };
        if model.dim != raw.dim {
            return Err(D::Error::custom(format!(
                "dim {} does not match {} weights",
                raw.dim, model.dim
            )));
        }
        if let Some(t) = raw.tolerance {
            if !(t >= 0.0) {
                return Err(D::Error::custom("tolerance must be nonnegative"));
            }
            model = model.with_tolerance(t);
        }
        if let Some(d) = raw.decay {
            model = model.with_decay(d);
        }
        Ok(model)
    }
}

/// A coordinate vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Element {
    coords: Vec<f64>,
}

impl Element {
    pub fn new(coords: Vec<f64>) -> Self {
        Element { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Element::constant(dim, 0.0)
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        Element { coords: vec![value; dim] }
    }

    /// `(1, 1/2, 1/3, …)`.
    pub fn harmonic(dim: usize) -> Self {
        Element { coords: (1..=dim).map(|i| 1.0 / i as f64).collect() }
    }

    /// Standard basis vector `e_i` (zero-based `i`).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        Element { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Element {
        Element { coords: self.coords.iter().map(|&x| f(x)).collect() }
    }

    fn zip_with(&self, other: &Element, f: impl Fn(f64, f64) -> f64) -> Element {
        assert_eq!(self.dim(), other.dim(), "elements from different models");
        Element { coords: self.coords.iter().zip(&other.coords).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn abs(&self) -> Element {
        self.map(f64::abs)
    }

    /// `x⁺ = x ∨ 0`
    pub fn pos(&self) -> Element {
        self.map(|x| x.max(0.0))
    }

    /// `x⁻ = (−x) ∨ 0`
    pub fn neg_part(&self) -> Element {
        self.map(|x| (-x).max(0.0))
    }

    pub fn meet(&self, other: &Element) -> Element {
        self.zip_with(other, f64::min)
    }

    pub fn join(&self, other: &Element) -> Element {
        self.zip_with(other, f64::max)
    }

    pub fn scale(&self, a: f64) -> Element {
        self.map(|x| a * x)
    }

    pub fn sup_norm(&self) -> f64 {
        self.coords.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn min_coord(&self) -> f64 {
        self.coords.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Coordinatewise `self ≤ other + tol`.
    pub fn le(&self, other: &Element, tol: f64) -> bool {
        assert_eq!(self.dim(), other.dim(), "elements from different models");
        self.coords.iter().zip(&other.coords).all(|(a, b)| *a <= b + tol)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coords.iter().all(|&x| x >= 0.0)
    }

    pub fn approx_eq(&self, other: &Element, tol: f64) -> bool {
        self.dim() == other.dim() && self.zip_with(other, |a, b| a - b).sup_norm() <= tol
    }

    /// Indices of the nonzero coordinates.
    pub fn support(&self) -> Vec<usize> {
        self.coords.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(i, _)| i).collect()
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<&Element> for f64 {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        rhs.scale(self)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.map(|x| -x)
    }
}

/// Positive linear functional `x ↦ Σ w_i x_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    weights: Vec<f64>,
    strict: bool,
}

impl Functional {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Precondition(format!(
                "functional weight {i} is {}, weights must be nonnegative",
                weights[i]
            )));
        }
        let strict = weights.iter().all(|&w| w > 0.0);
        Ok(Functional { weights, strict })
    }

    pub fn uniform(dim: usize) -> Self {
        Functional { weights: vec![1.0 / dim as f64; dim], strict: true }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn apply(&self, x: &Element) -> f64 {
        assert_eq!(x.dim(), self.dim(), "functional and element dimensions differ");
        self.weights.iter().zip(x.coords()).map(|(w, x)| w * x).sum()
    }

    pub fn scale(&self, a: f64) -> Result<Functional> {
        Functional::new(self.weights.iter().map(|w| a * w).collect())
    }
}

impl Serialize for Functional {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.weights.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Functional {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let weights = Vec::<f64>::deserialize(deserializer)?;
        Functional::new(weights).map_err(serde::de::Error::custom)
    }
}

/// A band of a coordinatewise lattice: all vectors vanishing off `support`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandDescriptor {
    dim: usize,
    support: Vec<usize>,
    generator: Option<Element>,
}

impl BandDescriptor {
    /// The band generated by `gen`, supported where `|gen| > 0`.
    pub fn generated_by(gen: &Element) -> Self {
        BandDescriptor { dim: gen.dim(), support: gen.support(), generator: Some(gen.clone()) }
    }

    pub fn from_support(dim: usize, mut support: Vec<usize>) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        if let Some(&i) = support.iter().find(|&&i| i >= dim) {
            return Err(Error::Precondition(format!("support index {i} out of range for dim {dim}")));
        }
        Ok(BandDescriptor { dim, support, generator: None })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn generator(&self) -> Option<&Element> {
        self.generator.as_ref()
    }

    pub fn contains(&self, x: &Element) -> bool {
        x.dim() == self.dim
            && x.coords().iter().enumerate().all(|(i, &v)| v == 0.0 || self.support.binary_search(&i).is_ok())
    }

    /// The band projection: zero the coordinates off the support.
    pub fn project(&self, x: &Element) -> Result<Element> {
        ensure_dim(self.dim, x.dim())?;
        let mut out = vec![0.0; self.dim];
        for &i in &self.support {
            out[i] = x.coords()[i];
        }
        Ok(Element::new(out))
    }
}

/// Coordinatewise lattice data of a pair.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeOps {
    pub abs: Element,
    pub meet: Element,
    pub join: Element,
    pub pos: Element,
    pub neg: Element,
}

/// `|x|`, `x ∧ y`, `x ∨ y`, `x⁺`, `x⁻`.
pub fn lattice_ops(x: &Element, y: &Element) -> Result<LatticeOps> {
    ensure_dim(x.dim(), y.dim())?;
    Ok(LatticeOps { abs: x.abs(), meet: x.meet(y), join: x.join(y), pos: x.pos(), neg: x.neg_part() })
}

/// Projection of `x` onto the band generated by `gen`.
pub fn band_projection(gen: &Element, x: &Element) -> Result<Element> {
    ensure_dim(gen.dim(), x.dim())?;
    BandDescriptor::generated_by(gen).project(x)
}

fn require_positive(x0: &Element) -> Result<()> {
    match x0.coords().iter().position(|&c| c < 0.0 || c.is_nan()) {
        Some(i) => Err(Error::Precondition(format!(
            "candidate unit has negative coordinate {i} ({})",
            x0.coords()[i]
        ))),
        None => Ok(()),
    }
}

/// Weak unit test: `x ∧ n·x0 ↑ x` for every `x ≥ 0`. Checked on the
/// positive basis vectors, which generate the positive cone.
pub fn is_weak_unit(x0: &Element) -> Result<bool> {
    require_positive(x0)?;
    if x0.dim() == 0 {
        return Ok(false);
    }
    Ok((0..x0.dim()).all(|i| {
        // e_i ∧ n·x0 = min(1, n·x0_i) e_i reaches e_i for some n iff x0_i > 0
        let n = (1.0 / x0.coords()[i]).ceil();
        n.is_finite() && (n * x0.coords()[i]).min(1.0) == 1.0
    }))
}

/// Quasi-interior test: `‖x − x ∧ n·x0‖ → 0` for every `x ≥ 0`, evaluated in
/// the model norm along `n = 2^k`.
pub fn is_quasi_interior(model: &LatticeModel, x0: &Element) -> Result<bool> {
    require_positive(x0)?;
    model.check(x0)?;
    Ok((0..model.dim()).all(|i| {
        let e = Element::basis(model.dim(), i);
        let passes = |k: i32| {
            let residual = &e - &e.meet(&x0.scale(2f64.powi(k)));
            model.norm(&residual) <= model.tolerance()
        };
        // the residual is nonincreasing in n
        passes(1023)
    }))
}

/// Splits `x` along the null band of `xstar` and its disjoint complement.
pub fn band_decompose(xstar: &Functional, x: &Element) -> Result<(Element, Element)> {
    ensure_dim(xstar.dim(), x.dim())?;
    let (mut null, mut carrier) = (vec![0.0; x.dim()], vec![0.0; x.dim()]);
    for (i, (&w, &v)) in xstar.weights().iter().zip(x.coords()).enumerate() {
        if w > 0.0 {
            carrier[i] = v;
        } else {
            null[i] = v;
        }
    }
    Ok((Element::new(null), Element::new(carrier)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(v: &[f64]) -> Element {
        Element::new(v.to_vec())
    }

    #[test]
    fn coordinatewise_operations() {
        let ops = lattice_ops(&el(&[1.0, 3.0]), &el(&[2.0, 1.0])).unwrap();
        assert_eq!(ops.meet, el(&[1.0, 1.0]));
        assert_eq!(ops.join, el(&[2.0, 3.0]));
        assert_eq!(el(&[1.0, -2.0, 0.0]).abs(), el(&[1.0, 2.0, 0.0]));
        let x = el(&[2.0, -5.0]);
        assert_eq!(x.pos(), el(&[2.0, 0.0]));
        assert_eq!(x.neg_part(), el(&[0.0, 5.0]));
        assert_eq!(&x.pos() - &x.neg_part(), x);
    }

    #[test]
    fn mismatched_dimensions() {
        let err = lattice_ops(&el(&[1.0]), &el(&[1.0, 2.0])).unwrap_err();
        assert!(matches!(err, Error::ModelMismatch { expected: 1, found: 2 }));
        assert!(band_projection(&el(&[1.0]), &el(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn norms() {
        let x = el(&[1.0, -2.0, 0.0]);
        assert_eq!(LatticeModel::ell1(3).unwrap().norm(&x), 3.0);
        assert_eq!(LatticeModel::ell_infinity(3).unwrap().norm(&x), 2.0);
        assert_eq!(LatticeModel::c0(3).unwrap().norm(&x), 2.0);
        let half = LatticeModel::l1(vec![0.5, 0.5]).unwrap();
        assert_eq!(half.norm(&el(&[4.0, -4.0])), 4.0);
        let l2 = LatticeModel::lp(2, 2.0).unwrap();
        assert!((l2.norm(&el(&[3.0, 4.0])) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_models() {
        assert!(LatticeModel::l1(vec![]).is_err());
        assert!(LatticeModel::l1(vec![1.0, 0.0]).is_err());
        assert!(LatticeModel::new(vec![1.0], NormKind::L1Weighted, SpaceTag::C0Truncation).is_err());
        assert!(LatticeModel::new(vec![1.0], NormKind::Lp(1.0), SpaceTag::Lp).is_err());
        // sup on a c0 tag is promoted to the c0 sup norm
        let m = LatticeModel::new(vec![1.0], NormKind::Sup, SpaceTag::C0Truncation).unwrap();
        assert_eq!(m.norm_kind(), NormKind::C0Sup);
    }

    #[test]
    fn band_projection_examples() {
        assert_eq!(band_projection(&el(&[1.0, 0.0, 1.0]), &el(&[5.0, 7.0, 9.0])).unwrap(), el(&[5.0, 0.0, 9.0]));
        assert_eq!(band_projection(&el(&[0.0, 0.0]), &el(&[3.0, -1.0])).unwrap(), el(&[0.0, 0.0]));
        assert_eq!(band_projection(&el(&[2.0, 3.0]), &el(&[-1.0, 4.0])).unwrap(), el(&[-1.0, 4.0]));
        let band = BandDescriptor::generated_by(&el(&[0.0, -2.0, 1.0]));
        assert_eq!(band.support(), &[1, 2]);
        assert!(band.contains(&el(&[0.0, 5.0, 0.0])));
        assert!(!band.contains(&el(&[1.0, 5.0, 0.0])));
    }

    #[test]
    fn weak_units() {
        let model = LatticeModel::ell1(3).unwrap();
        for (x0, expected) in [
            (el(&[1.0, 0.5, 0.1]), true),
            (el(&[1.0, 0.0, 1.0]), false),
            (el(&[0.0, 0.0, 0.0]), false),
        ] {
            assert_eq!(is_weak_unit(&x0).unwrap(), expected);
            assert_eq!(is_quasi_interior(&model, &x0).unwrap(), expected);
        }
        assert!(matches!(is_weak_unit(&el(&[1.0, -1.0])), Err(Error::Precondition(_))));
        assert!(is_quasi_interior(&model, &el(&[1e-300, 1.0, 1.0])).unwrap());
    }

    #[test]
    fn band_decomposition() {
        let (n, c) = band_decompose(&Functional::new(vec![0.0, 1.0]).unwrap(), &el(&[3.0, 4.0])).unwrap();
        assert_eq!((n, c), (el(&[3.0, 0.0]), el(&[0.0, 4.0])));
        let x = el(&[1.0, -2.0]);
        let (n, c) = band_decompose(&Functional::uniform(2), &x).unwrap();
        assert_eq!((n, c), (el(&[0.0, 0.0]), x.clone()));
        let (n, c) = band_decompose(&Functional::new(vec![0.0, 0.0]).unwrap(), &x).unwrap();
        assert_eq!((n, c), (x, el(&[0.0, 0.0])));
    }

    #[test]
    fn functionals() {
        assert!(Functional::new(vec![1.0, -0.1]).is_err());
        let f = Functional::new(vec![0.0, 2.0]).unwrap();
        assert!(!f.is_strict());
        assert_eq!(f.apply(&el(&[7.0, 1.5])), 3.0);
        assert!(Functional::uniform(4).is_strict());
    }

    #[test]
    fn c0_membership() {
        let m = LatticeModel::c0(50).unwrap();
        assert!(!m.accepts_limit(&Element::constant(50, 1.0)));
        assert!(m.accepts_limit(&Element::harmonic(50)));
        assert!(m.accepts_limit(&Element::zeros(50)));
        let alternating = Element::new((0..8).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect());
        assert!(!LatticeModel::c0(8).unwrap().accepts_limit(&alternating));
        assert!(LatticeModel::ell1(50).unwrap().accepts_limit(&Element::constant(50, 1.0)));
    }

    #[test]
    fn json_schema() {
        let m: LatticeModel =
            serde_json::from_str(r#"{"dim":3,"weights":[1,2,3],"norm":"lp:2.5","tag":"Lp"}"#).unwrap();
        assert_eq!(m.norm_kind(), NormKind::Lp(2.5));
        let c0: LatticeModel = serde_json::from_str(r#"{"dim":2,"norm":"sup","tag":"c0_truncation"}"#).unwrap();
        assert_eq!(c0.norm_kind(), NormKind::C0Sup);
        let back: LatticeModel = serde_json::from_str(&serde_json::to_string(&c0).unwrap()).unwrap();
        assert_eq!(back, c0);
        assert!(serde_json::from_str::<LatticeModel>(r#"{"dim":2,"weights":[1],"norm":"l1","tag":"L1"}"#).is_err());
        assert!(serde_json::from_str::<LatticeModel>(r#"{"dim":2,"norm":"l3","tag":"L1"}"#).is_err());
        let x: Element = serde_json::from_str(r#"{"coords":[1.0,-2.0]}"#).unwrap();
        assert_eq!(x, el(&[1.0, -2.0]));
    }

    #[test]
    fn product_norm_is_bochner() {
        let fiber = LatticeModel::c0(2).unwrap();
        let m = LatticeModel::product(vec![0.25, 0.75], fiber).unwrap();
        assert_eq!(m.dim(), 4);
        // 0.25 * max(1, 3) + 0.75 * max(2, 0)
        assert_eq!(m.norm(&el(&[1.0, -3.0, 2.0, 0.0])), 2.25);
        let json = serde_json::to_string(&m).unwrap();
        let back: LatticeModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
