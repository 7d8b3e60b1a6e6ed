//! Positive-projection filtrations, conditional expectations of finite
//! partition chains and the double-condition diagnostics.

use std::collections::BTreeSet;
use std::ops::{Add, Mul};

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ensure_dim, Error, Result};
use crate::lattice::{is_weak_unit, BandDescriptor, Element, Functional, LatticeModel, NormKind};
use crate::matrix::Matrix;
use crate::par::Strategy;
use crate::random;
use crate::scalar::{parse_rational, Scalar};

/// Entrywise tolerance on products of projections.
pub const COMPATIBILITY_TOLERANCE: f64 = 1e-10;

/// A fixed-point search declares absence when the best minimum coordinate
/// does not exceed this.
pub const FIXED_POINT_THRESHOLD: f64 = 1e-9;

/// Above this dimension matrix identities are checked on seeded probe
/// vectors instead of full products.
pub const DENSE_LIMIT: usize = 256;

const PROBES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    GeneralPositive,
    Band,
    ConditionalExpectation,
}

/// Idempotent entrywise-nonnegative square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    matrix: Matrix<f64>,
    kind: ProjectionKind,
}

/// `max |A B − C|`, either entrywise or on seeded probes `A(Bv) − Cv` for
/// large dimensions.
pub fn product_defect(a: &Matrix<f64>, b: &Matrix<f64>, c: &Matrix<f64>) -> f64 {
    let n = a.rows();
    if n <= DENSE_LIMIT {
        return a.mul(b).max_abs_diff(c);
    }
    let mut rng = random::rng(n as u64);
    (0..PROBES)
        .map(|_| {
            let v = random::element(&mut rng, n, 1.0).into_coords();
            let lhs = a.apply(&b.apply(&v));
            let rhs = c.apply(&v);
            lhs.iter().zip(&rhs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

impl Projection {
    pub fn new(matrix: Matrix<f64>, kind: ProjectionKind) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Structure(format!("projection is {}x{}, not square", matrix.rows(), matrix.cols())));
        }
        if !matrix.is_finite() {
            return Err(Error::Structure("projection has a non-finite entry".into()));
        }
        if let Some(k) = matrix.entries().iter().position(|&v| v < 0.0) {
            let (i, j) = (k / matrix.cols(), k % matrix.cols());
            return Err(Error::Structure(format!("projection entry ({i},{j}) = {} is negative", matrix.get(i, j))));
        }
        let defect = product_defect(&matrix, &matrix, &matrix);
        if defect > COMPATIBILITY_TOLERANCE {
            return Err(Error::Structure(format!("matrix is not idempotent (defect {defect:.3e})")));
        }
        Ok(Projection { matrix, kind })
    }

    pub fn identity(dim: usize) -> Self {
        Projection { matrix: Matrix::identity(dim), kind: ProjectionKind::Band }
    }

    pub fn band(band: &BandDescriptor, dim: usize) -> Self {
        let mut m = Matrix::zeros(dim, dim);
        for &i in band.support() {
            m.set(i, i, 1.0);
        }
        Projection { matrix: m, kind: ProjectionKind::Band }
    }

    pub fn matrix(&self) -> &Matrix<f64> {
        &self.matrix
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, x: &Element) -> Element {
        Element::new(self.matrix.apply(x.coords()))
    }

    pub fn apply_adjoint(&self, w: &[f64]) -> Vec<f64> {
        self.matrix.apply_transpose(w)
    }
}

impl Serialize for Projection {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Projection {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = Matrix::<f64>::deserialize(deserializer)?;
        Projection::new(m, ProjectionKind::GeneralPositive).map_err(serde::de::Error::custom)
    }
}

/// A weak unit and a strictly positive functional for the bistochastic condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Witness {
    pub x0: Element,
    pub x0star: Functional,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    model: LatticeModel,
    stages: Vec<Projection>,
    witness: Option<Witness>,
    tolerance: f64,
}

impl Filtration {
    pub fn new(model: LatticeModel, stages: Vec<Projection>, witness: Option<Witness>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Structure("filtration has no stages".into()));
        }
        for s in &stages {
            ensure_dim(model.dim(), s.dim())?;
        }
        if let Some(w) = &witness {
            model.check(&w.x0)?;
            ensure_dim(model.dim(), w.x0star.dim())?;
        }
        Ok(Filtration { model, stages, witness, tolerance: COMPATIBILITY_TOLERANCE })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_witness(mut self, witness: Witness) -> Result<Self> {
        self.model.check(&witness.x0)?;
        ensure_dim(self.model.dim(), witness.x0star.dim())?;
        self.witness = Some(witness);
        Ok(self)
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn stages(&self) -> &[Projection] {
        &self.stages
    }

    pub fn stage(&self, n: usize) -> &Projection {
        &self.stages[n]
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.witness.as_ref()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// The bistochastic condition for a pair: `E₁x₀ = x₀` and `E₁ᵀx₀* = x₀*`, plus the
    /// requirements that `x₀` be a weak unit and `x₀*` strict.
    pub fn bistochastic_for(&self, x0: &Element, x0star: &Functional) -> Result<bool> {
        self.model.check(x0)?;
        ensure_dim(self.model.dim(), x0star.dim())?;
        Ok(is_weak_unit(x0)? && x0star.is_strict() && fixes_pair(&self.stages[0], x0, x0star, self.tolerance))
    }
}

fn fixes_pair(e: &Projection, x0: &Element, x0star: &Functional, tol: f64) -> bool {
    let ex = e.apply(x0);
    let ew = e.apply_adjoint(x0star.weights());
    let sx = x0.sup_norm().max(1.0);
    let sw = x0star.weights().iter().fold(1.0f64, |m, v| m.max(*v));
    ex.approx_eq(x0, tol * sx) && ew.iter().zip(x0star.weights()).all(|(a, b)| (a - b).abs() <= tol * sw)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiltrationReport {
    pub stages: usize,
    pub compatible: bool,
    pub max_compatibility_defect: f64,
    pub witness: bool,
    /// The bistochastic condition at the first stage; false without a witness.
    pub bistochastic: bool,
    /// Whether each stage fixes the witness pair.
    pub stage_fixes_witness: Vec<bool>,
    pub bounded_const: f64,
    /// False when `bounded_const` is a probe-based lower estimate.
    pub bounded_const_exact: bool,
}

/// Checks `E_n E_m = E_m E_n = E_{min(n,m)}`, the bistochastic condition when a witness is
/// present, and computes `sup_n ‖E_n‖` in the model norm.
pub fn validate_filtration(f: &Filtration) -> Result<FiltrationReport> {
    let t = f.len();
    let pairs: Vec<(usize, usize)> = (0..t).flat_map(|n| (n..t).map(move |m| (n, m))).collect();
    let defects = Strategy::default().map(&pairs, |&(n, m)| {
        let (a, b) = (f.stage(n).matrix(), f.stage(m).matrix());
        let low = f.stage(n.min(m)).matrix();
        product_defect(a, b, low).max(product_defect(b, a, low))
    });
    let max_defect = defects.iter().copied().fold(0.0, f64::max);
    let (bistochastic, stage_fixes) = match f.witness() {
        Some(w) => (
            f.bistochastic_for(&w.x0, &w.x0star)?,
            f.stages().iter().map(|e| fixes_pair(e, &w.x0, &w.x0star, f.tolerance())).collect(),
        ),
        None => (false, Vec::new()),
    };
    let norms: Vec<(f64, bool)> = f.stages().iter().map(|e| operator_norm(f.model(), e.matrix())).collect();
    Ok(FiltrationReport {
        stages: t,
        compatible: max_defect <= f.tolerance(),
        max_compatibility_defect: max_defect,
        witness: f.witness().is_some(),
        bistochastic,
        stage_fixes_witness: stage_fixes,
        bounded_const: norms.iter().map(|n| n.0).fold(0.0, f64::max),
        bounded_const_exact: norms.iter().all(|n| n.1),
    })
}

/// Operator norm of a nonnegative matrix in the model norm, with a flag
/// telling whether the value is exact.
pub fn operator_norm(model: &LatticeModel, a: &Matrix<f64>) -> (f64, bool) {
    let n = a.rows();
    if let Some(layout) = model.product_layout() {
        return match layout.fiber.norm_kind() {
            NormKind::L1Weighted => (weighted_l1_norm(model.weights(), a), true),
            NormKind::Sup | NormKind::C0Sup if layout.fiber.dim() <= 16 => {
                (product_sup_fiber_norm(model, layout.atom_weights.as_slice(), layout.fiber.dim(), a), true)
            }
            _ => (probe_norm(model, a), false),
        };
    }
    match model.norm_kind() {
        NormKind::L1Weighted => (weighted_l1_norm(model.weights(), a), true),
        NormKind::Sup | NormKind::C0Sup => {
            ((0..n).map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max), true)
        }
        NormKind::Lp(p) => (boyd_norm(model.weights(), p, a), false),
    }
}

fn weighted_l1_norm(w: &[f64], a: &Matrix<f64>) -> f64 {
    (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| w[i] * a.get(i, j).abs()).sum::<f64>() / w[j])
        .fold(0.0, f64::max)
}

/// On `L1(Ω; ℓ∞^d)` the positive part of the unit ball has vertices
/// `1_S / μ_ω` supported on a single atom, and a positive operator attains
/// its norm there.
fn product_sup_fiber_norm(model: &LatticeModel, mu: &[f64], d: usize, a: &Matrix<f64>) -> f64 {
    let mut best = 0.0f64;
    for (atom, m) in mu.iter().enumerate() {
        for mask in 1u32..(1 << d) {
            let mut x = vec![0.0; model.dim()];
            for j in 0..d {
                if mask & (1 << j) != 0 {
                    x[atom * d + j] = 1.0 / m;
                }
            }
            best = best.max(model.norm(&Element::new(a.apply(&x))));
        }
    }
    best
}

fn probe_norm(model: &LatticeModel, a: &Matrix<f64>) -> f64 {
    let n = a.rows();
    let mut rng = random::rng(0x5eed);
    (0..n)
        .map(|i| Element::basis(n, i))
        .chain((0..64).map(|_| random::positive_element(&mut rng, n, 1.0)))
        .map(|x| model.norm(&Element::new(a.apply(x.coords()))) / model.norm(&x))
        .fold(0.0, f64::max)
}

/// Boyd's power iteration for `‖A‖_{p→p}` on a nonnegative matrix, with the
/// weights absorbed as `D A D⁻¹`, `D = diag(w^{1/p})`.
fn boyd_norm(w: &[f64], p: f64, a: &Matrix<f64>) -> f64 {
    let n = a.rows();
    let d: Vec<f64> = w.iter().map(|v| v.powf(1.0 / p)).collect();
    let b = Matrix::from_fn(n, n, |i, j| d[i] * a.get(i, j).abs() / d[j]);
    let pnorm = |v: &[f64]| v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p);
    let q = p / (p - 1.0);
    let mut x = vec![1.0; n];
    let s = pnorm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut est = pnorm(&b.apply(&x));
    for _ in 0..500 {
        let y = b.apply(&x);
        let yp: Vec<f64> = y.iter().map(|v| v.powf(p - 1.0)).collect();
        let z = b.apply_transpose(&yp);
        let mut next: Vec<f64> = z.iter().map(|v| v.powf(q - 1.0)).collect();
        let s = pnorm(&next);
        if !(s > 0.0) {
            break;
        }
        next.iter_mut().for_each(|v| *v /= s);
        let e = pnorm(&b.apply(&next));
        x = next;
        let done = (e - est).abs() <= 1e-15 * e.max(1.0);
        est = est.max(e);
        if done {
            break;
        }
    }
    est
}

/// Nested set partitions of `0..dim` with atom masses `mu`; partition `t+1`
/// refines partition `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionChain<W> {
    mu: Vec<W>,
    partitions: Vec<Vec<Vec<usize>>>,
}

impl<W: Scalar> PartitionChain<W> {
    pub fn new(mu: Vec<W>, partitions: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let dim = mu.len();
        if dim == 0 {
            return Err(Error::Structure("chain has no atoms".into()));
        }
        if partitions.is_empty() {
            return Err(Error::Structure("chain has no partitions".into()));
        }
        if let Some(i) = mu.iter().position(|m| *m < W::zero()) {
            return Err(Error::Structure(format!("atom {i} has negative mass {:?}", mu[i])));
        }
        let total = mu.iter().fold(W::zero(), |acc, m| acc + m.clone());
        if !total.close(&W::one()) {
            return Err(Error::Structure(format!("atom masses sum to {}, not 1", total.to_f64())));
        }
        let mut normalized = Vec::with_capacity(partitions.len());
        let mut owner_prev: Option<Vec<usize>> = None;
        for (t, mut p) in partitions.into_iter().enumerate() {
            let mut owner = vec![usize::MAX; dim];
            for b in &mut p {
                b.sort_unstable();
            }
            p.sort();
            for (bi, block) in p.iter().enumerate() {
                if block.is_empty() {
                    return Err(Error::Structure(format!("partition {t} has an empty block")));
                }
                for &a in block {
                    if a >= dim {
                        return Err(Error::Structure(format!("partition {t}: atom {a} out of range for {dim} atoms")));
                    }
                    if owner[a] != usize::MAX {
                        return Err(Error::Structure(format!("partition {t}: atom {a} appears twice")));
                    }
                    owner[a] = bi;
                }
            }
            if let Some(a) = owner.iter().position(|&o| o == usize::MAX) {
                return Err(Error::Structure(format!("partition {t}: atom {a} is not covered")));
            }
            if let Some(prev) = &owner_prev {
                for block in &p {
                    if block.iter().any(|&a| prev[a] != prev[block[0]]) {
                        return Err(Error::Structure(format!(
                            "partition {t} does not refine partition {}: block {block:?} straddles blocks",
                            t - 1
                        )));
                    }
                }
            }
            owner_prev = Some(owner);
            normalized.push(p);
        }
        Ok(PartitionChain { mu, partitions: normalized })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[W] {
        &self.mu
    }

    pub fn partitions(&self) -> &[Vec<Vec<usize>>] {
        &self.partitions
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// `E_ij = μ_j / μ(B)` when `i, j` share the block `B` of partition `t`.
    pub fn conditional_expectation(&self, t: usize) -> Result<Matrix<W>> {
        let p = self
            .partitions
            .get(t)
            .ok_or_else(|| Error::Precondition(format!("stage {t} out of range, chain has {} stages", self.len())))?;
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for block in p {
            let mass = block.iter().fold(W::zero(), |acc, &a| acc + self.mu[a].clone());
            if mass.is_zero() {
                return Err(Error::Precondition(format!("block {block:?} of stage {t} has zero probability")));
            }
            for &i in block {
                for &j in block {
                    m.set(i, j, self.mu[j].clone() / mass.clone());
                }
            }
        }
        Ok(m)
    }

    pub fn conditional_expectations(&self) -> Result<Vec<Matrix<W>>> {
        (0..self.len()).map(|t| self.conditional_expectation(t)).collect()
    }

    pub fn to_f64(&self) -> PartitionChain<f64> {
        PartitionChain { mu: self.mu.iter().map(Scalar::to_f64).collect(), partitions: self.partitions.clone() }
    }
}

impl PartitionChain<f64> {
    /// Dyadic chain on `2^depth` uniform atoms; stage `t` has blocks of size `2^{depth−t}`.
    pub fn dyadic(depth: u32) -> Self {
        let n = 1usize << depth;
        let partitions = (0..=depth)
            .map(|t| {
                let size = 1usize << (depth - t);
                (0..n / size).map(|b| (b * size..(b + 1) * size).collect()).collect()
            })
            .collect();
        PartitionChain { mu: vec![1.0 / n as f64; n], partitions }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Mass {
    Number(f64),
    Text(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    mu: Vec<Mass>,
    partitions: Vec<Vec<Vec<usize>>>,
}

impl Serialize for PartitionChain<f64> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawChain { mu: self.mu.iter().map(|m| Mass::Number(*m)).collect(), partitions: self.partitions.clone() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PartitionChain<f64> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawChain::deserialize(deserializer)?;
        let mu = raw
            .mu
            .into_iter()
            .map(|m| match m {
                Mass::Number(v) => Ok(v),
                Mass::Text(s) => parse_rational(&s)
                    .map(|r| r.to_f64())
                    .ok_or_else(|| serde::de::Error::custom(format!("cannot parse mass {s:?}"))),
            })
            .collect::<std::result::Result<Vec<f64>, D::Error>>()?;
        PartitionChain::new(mu, raw.partitions).map_err(serde::de::Error::custom)
    }
}

/// Exact chain from the same JSON layout; numbers are read as the exact
/// rationals of their binary values, strings as `p/q` or decimals.
impl<'de> Deserialize<'de> for PartitionChain<num_rational::BigRational> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawChain::deserialize(deserializer)?;
        let mu = raw
            .mu
            .into_iter()
            .map(|m| match m {
                Mass::Number(v) => num_rational::BigRational::from_float(v)
                    .ok_or_else(|| serde::de::Error::custom(format!("mass {v} is not finite"))),
                Mass::Text(s) => {
                    parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("cannot parse mass {s:?}")))
                }
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        PartitionChain::new(mu, raw.partitions).map_err(serde::de::Error::custom)
    }
}

/// Stages of the chain's conditional expectations in the weighted `L1(μ)`
/// model with witness `(1, μ)`. Atoms must all have positive mass.
pub fn chain_to_filtration(chain: &PartitionChain<f64>) -> Result<Filtration> {
    let model = LatticeModel::l1(chain.mu().to_vec())?;
    chain_to_filtration_in(chain, model)
}

/// As [`chain_to_filtration`] but in a caller-supplied model of the same dimension.
pub fn chain_to_filtration_in(chain: &PartitionChain<f64>, model: LatticeModel) -> Result<Filtration> {
    ensure_dim(model.dim(), chain.dim())?;
    let stages = chain
        .conditional_expectations()?
        .into_iter()
        .map(|m| Projection { matrix: m, kind: ProjectionKind::ConditionalExpectation })
        .collect();
    let witness = Witness { x0: Element::constant(chain.dim(), 1.0), x0star: Functional::new(chain.mu().to_vec())? };
    Filtration::new(model, stages, Some(witness))
}

/// Kronecker product `A ⊗ B`, index `(i·rows(B) + k, j·cols(B) + l)`.
pub fn kron(a: &Matrix<f64>, b: &Matrix<f64>) -> Matrix<f64> {
    Matrix::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |r, c| {
        a.get(r / b.rows(), c / b.cols()) * b.get(r % b.rows(), c % b.cols())
    })
}

/// Filtration on `L1(Ω; F)` with stages `E_t ⊗ F_t`, `E_t` the chain's
/// conditional expectations and `F_t` the fiber stages (identity when absent).
pub fn product_filtration(
    chain: &PartitionChain<f64>,
    model: &LatticeModel,
    fiber_stages: Option<&[Projection]>,
    witness: Option<Witness>,
) -> Result<Filtration> {
    let layout = model
        .product_layout()
        .ok_or_else(|| Error::Precondition("model is not a product model".into()))?;
    ensure_dim(layout.atoms(), chain.dim())?;
    let d = layout.fiber.dim();
    if let Some(fs) = fiber_stages {
        if fs.len() != chain.len() {
            return Err(Error::Structure(format!(
                "{} fiber stages for a chain of {} stages",
                fs.len(),
                chain.len()
            )));
        }
    }
    let id = Matrix::identity(d);
    let stages = chain
        .conditional_expectations()?
        .iter()
        .enumerate()
        .map(|(t, e)| {
            let f = fiber_stages.map_or(&id, |fs| fs[t].matrix());
            ensure_dim(d, f.rows())?;
            Ok(Projection { matrix: kron(e, f), kind: ProjectionKind::GeneralPositive })
        })
        .collect::<Result<Vec<_>>>()?;
    Filtration::new(model.clone(), stages, witness)
}

/// Exact tower law `E_s E_t = E_t E_s = E_{min(s,t)}` for all pairs.
pub fn exact_tower<W>(stages: &[Matrix<W>]) -> bool
where
    W: Scalar + PartialEq,
    for<'a> &'a W: Mul<&'a W, Output = W>,
    W: Add<Output = W>,
{
    let t = stages.len();
    let pairs: Vec<(usize, usize)> = (0..t).flat_map(|s| (s..t).map(move |u| (s, u))).collect();
    Strategy::default()
        .map(&pairs, |&(s, u)| {
            let low = &stages[s.min(u)];
            stages[s].mul(&stages[u]) == *low && stages[u].mul(&stages[s]) == *low
        })
        .into_iter()
        .all(|ok| ok)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleConditionReport {
    /// (a) no positive nonzero `x` with `Ex = 0`: no zero column.
    pub strictly_positive: bool,
    /// (b) no positive nonzero `x*` with `Eᵀx* = 0`: no zero row.
    pub adjoint_strictly_positive: bool,
    /// The zero-column and zero-row tests agree with evaluation on basis vectors.
    pub structural_matches_basis: bool,
    /// (c) a strictly positive fixed vector, normalized to sum 1.
    pub fixed_weak_unit: Option<Element>,
    pub fixed_weak_unit_margin: f64,
    /// (d) a strictly positive fixed functional, normalized to sum 1.
    pub fixed_strict_functional: Option<Vec<f64>>,
    pub fixed_functional_margin: f64,
    /// (c) ∧ (d): a witness pair for the bistochastic condition.
    pub witness_exists: bool,
    /// (c) ∧ (d) ⇔ (a) ∧ (b).
    pub equivalence_holds: bool,
    pub notes: Vec<String>,
}

/// Largest `min_i x_i` over `x ≥ 0`, `Σx = 1`, `Ax = x`, solved as a linear
/// program over a basis of `ker(A − I)`.
pub fn max_min_fixed_point(a: &Matrix<f64>) -> Result<(f64, Option<Vec<f64>>)> {
    let n = a.rows();
    let basis = a.sub(&Matrix::identity(n)).null_space(1e-9);
    if basis.is_empty() {
        return Ok((0.0, None));
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let coeffs: Vec<_> = basis.iter().map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for i in 0..n {
        let mut expr: Vec<_> = coeffs.iter().zip(&basis).map(|(&c, b)| (c, b[i])).collect();
        expr.push((t, -1.0));
        lp.add_constraint(expr.as_slice(), ComparisonOp::Ge, 0.0);
    }
    let sums: Vec<_> = coeffs.iter().zip(&basis).map(|(&c, b)| (c, b.iter().sum::<f64>())).collect();
    lp.add_constraint(sums.as_slice(), ComparisonOp::Eq, 1.0);
    match lp.solve() {
        Ok(sol) => {
            let x: Vec<f64> = (0..n)
                .map(|i| coeffs.iter().zip(&basis).map(|(&c, b)| sol[c] * b[i]).sum())
                .collect();
            let margin = sol.objective();
            Ok((margin, (margin > FIXED_POINT_THRESHOLD).then_some(x)))
        }
        Err(minilp::Error::Infeasible) => Ok((0.0, None)),
        Err(e) => Err(Error::Solver(e.to_string())),
    }
}

/// Strict positivity of `E` and `Eᵀ`, fixed strictly positive vectors and
/// functionals, and the equivalence between the two pairs of conditions.
pub fn double_condition_diagnostics(e: &Projection, model: &LatticeModel) -> Result<DoubleConditionReport> {
    ensure_dim(model.dim(), e.dim())?;
    let m = e.matrix();
    let n = m.rows();
    let zero_col = (0..n).any(|j| (0..n).all(|i| *m.get(i, j) == 0.0));
    let zero_row = (0..n).any(|i| m.row(i).iter().all(|&v| v == 0.0));
    // brute force: E e_j and Eᵀ e_i on the positive basis
    let basis_a = (0..n).all(|j| m.apply(Element::basis(n, j).coords()).iter().any(|&v| v != 0.0));
    let basis_b = (0..n).all(|i| m.apply_transpose(Element::basis(n, i).coords()).iter().any(|&v| v != 0.0));
    let (a, b) = (!zero_col, !zero_row);
    let (unit_margin, unit) = max_min_fixed_point(m)?;
    let (func_margin, func) = max_min_fixed_point(&m.transpose())?;
    let witness_exists = unit.is_some() && func.is_some();
    Ok(DoubleConditionReport {
        strictly_positive: a,
        adjoint_strictly_positive: b,
        structural_matches_basis: a == basis_a && b == basis_b,
        fixed_weak_unit: unit.map(Element::new),
        fixed_weak_unit_margin: unit_margin,
        fixed_strict_functional: func,
        fixed_functional_margin: func_margin,
        witness_exists,
        equivalence_holds: witness_exists == (a && b),
        notes: vec!["order continuity of E is automatic in finite dimension and is not tested".into()],
    })
}

/// Partition given by the connected components of the sparsity pattern of `e`.
pub fn sparsity_components(e: &Matrix<f64>) -> Vec<Vec<usize>> {
    let n = e.rows();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut block = BTreeSet::new();
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(i) = stack.pop() {
            block.insert(i);
            for (j, flag) in seen.iter_mut().enumerate() {
                if !*flag && (*e.get(i, j) != 0.0 || *e.get(j, i) != 0.0) {
                    *flag = true;
                    stack.push(j);
                }
            }
        }
        out.push(block.into_iter().collect());
    }
    out
}

/// Recovers the partition of a conditional expectation with atom masses `mu`:
/// returns it when `e` equals the conditional expectation of its sparsity
/// components within `tol`.
pub fn recover_partition(e: &Matrix<f64>, mu: &[f64], tol: f64) -> Result<Option<Vec<Vec<usize>>>> {
    ensure_dim(e.rows(), mu.len())?;
    let blocks = sparsity_components(e);
    let total: f64 = mu.iter().sum();
    let mu: Vec<f64> = mu.iter().map(|m| m / total).collect();
    let chain = match PartitionChain::new(mu, vec![blocks.clone()]) {
        Ok(c) => c,
        Err(_) => return Ok(None),
    };
    let ce = match chain.conditional_expectation(0) {
        Ok(ce) => ce,
        Err(_) => return Ok(None),
    };
    Ok((ce.max_abs_diff(e) <= tol).then_some(blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn avg2() -> Matrix<f64> {
        Matrix::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn projection_structure_checks() {
        assert!(Projection::new(Matrix::from_rows(vec![vec![1.0, 0.0]]).unwrap(), ProjectionKind::GeneralPositive).is_err());
        let neg = Matrix::from_rows(vec![vec![1.0, -1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(Projection::new(neg, ProjectionKind::GeneralPositive), Err(Error::Structure(_))));
        let not_idem = Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(Projection::new(not_idem, ProjectionKind::GeneralPositive).is_err());
        assert!(Projection::new(avg2(), ProjectionKind::ConditionalExpectation).is_ok());
    }

    #[test]
    fn identity_filtration() {
        let model = LatticeModel::ell1(3).unwrap();
        let w = Witness { x0: Element::new(vec![1.0, 2.0, 3.0]), x0star: Functional::new(vec![0.2, 0.3, 0.5]).unwrap() };
        let f = Filtration::new(model, vec![Projection::identity(3); 3], Some(w)).unwrap();
        let r = validate_filtration(&f).unwrap();
        assert!(r.compatible && r.bistochastic && r.witness);
        assert_eq!(r.bounded_const, 1.0);
        assert!(r.bounded_const_exact);
    }

    #[test]
    fn empty_filtration_rejected() {
        assert!(matches!(Filtration::new(LatticeModel::ell1(2).unwrap(), vec![], None), Err(Error::Structure(_))));
    }

    #[test]
    fn incompatible_pair_detected() {
        // E1 = averaging on both coordinates, E2 = projection onto e1: E1E2 ≠ E1
        let e1 = Projection::new(avg2(), ProjectionKind::GeneralPositive).unwrap();
        let e2 = Projection::band(&BandDescriptor::from_support(2, vec![0]).unwrap(), 2);
        let f = Filtration::new(LatticeModel::ell1(2).unwrap(), vec![e1, e2], None).unwrap();
        let r = validate_filtration(&f).unwrap();
        assert!(!r.compatible);
        assert!(!r.bistochastic);
    }

    #[test]
    fn conditional_expectation_examples() {
        let chain = PartitionChain::new(vec![0.25; 4], vec![vec![vec![0, 1, 2, 3]], vec![vec![0, 1], vec![2, 3]], vec![vec![0], vec![1], vec![2], vec![3]]])
            .unwrap();
        let e = chain.conditional_expectation(1).unwrap();
        assert_eq!(e.apply(&[1.0, 3.0, 2.0, 6.0]), vec![2.0, 2.0, 4.0, 4.0]);
        assert_eq!(chain.conditional_expectation(2).unwrap(), Matrix::identity(4));
        let x = [1.0, 3.0, 2.0, 6.0];
        let mean = chain.conditional_expectation(0).unwrap().apply(&x);
        assert!(mean.iter().all(|&v| v == 3.0));
        assert!(chain.conditional_expectation(3).is_err());
    }

    #[test]
    fn zero_mass_block_rejected() {
        let chain = PartitionChain::new(vec![0.5, 0.5, 0.0], vec![vec![vec![0, 1], vec![2]]]).unwrap();
        assert!(matches!(chain.conditional_expectation(0), Err(Error::Precondition(_))));
    }

    #[test]
    fn chain_validation() {
        let fine = vec![vec![0], vec![1], vec![2], vec![3]];
        let coarse = vec![vec![0, 1], vec![2, 3]];
        assert!(PartitionChain::new(vec![0.25; 4], vec![fine.clone(), coarse.clone()]).is_err());
        assert!(PartitionChain::new(vec![0.25; 4], vec![vec![vec![0, 2], vec![1, 3]], coarse.clone()]).is_err());
        assert!(PartitionChain::new(vec![0.25; 4], vec![vec![vec![0, 1]], fine.clone()]).is_err());
        assert!(PartitionChain::new(vec![0.25; 4], vec![vec![vec![0, 1, 1, 2, 3]]]).is_err());
        assert!(PartitionChain::new(vec![0.5; 4], vec![coarse.clone()]).is_err());
        let single = PartitionChain::new(vec![0.25; 4], vec![coarse]).unwrap();
        assert_eq!(chain_to_filtration(&single).unwrap().len(), 1);
    }

    #[test]
    fn dyadic_chain_is_bistochastic() {
        let chain = PartitionChain::dyadic(3);
        assert_eq!(chain.partitions().iter().map(|p| p.len()).collect::<Vec<_>>(), vec![1, 2, 4, 8]);
        let f = chain_to_filtration(&chain).unwrap();
        let r = validate_filtration(&f).unwrap();
        assert!(r.compatible && r.bistochastic);
        assert!(r.stage_fixes_witness.iter().all(|&b| b));
        assert!((r.bounded_const - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_chain_from_json() {
        let json = r#"{"mu": ["1/3", "1/6", 0.5], "partitions": [[[0, 1, 2]], [[0, 1], [2]]]}"#;
        let chain: PartitionChain<BigRational> = serde_json::from_str(json).unwrap();
        let stages = chain.conditional_expectations().unwrap();
        assert_eq!(*stages[0].get(0, 1), ratio(1, 6));
        assert_eq!(*stages[1].get(0, 0), ratio(2, 3));
        assert!(exact_tower(&stages));
        let ones = vec![ratio(1, 1); 3];
        for s in &stages {
            assert_eq!(s.apply(&ones), ones);
            assert_eq!(s.apply_transpose(chain.mu()), chain.mu().to_vec());
        }
        let float: PartitionChain<f64> = serde_json::from_str(json).unwrap();
        assert!((float.mu()[0] - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn operator_norms() {
        let e = Projection::new(avg2(), ProjectionKind::GeneralPositive).unwrap();
        assert_eq!(operator_norm(&LatticeModel::ell1(2).unwrap(), e.matrix()), (1.0, true));
        assert_eq!(operator_norm(&LatticeModel::c0(2).unwrap(), e.matrix()), (1.0, true));
        let (l2, exact) = operator_norm(&LatticeModel::lp(2, 2.0).unwrap(), e.matrix());
        assert!((l2 - 1.0).abs() < 1e-12 && !exact);
        // weighted L1 with the wrong weights is not contractive
        let skew = LatticeModel::l1(vec![1.0, 3.0]).unwrap();
        assert_eq!(operator_norm(&skew, e.matrix()).0, 2.0);
        let doubled = Matrix::<f64>::identity(2).map(|v| 2.0 * v);
        let lp3 = operator_norm(&LatticeModel::lp(2, 3.0).unwrap(), &doubled);
        assert!((lp3.0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn product_sup_fiber_norm_by_vertices() {
        let model = LatticeModel::product(vec![0.5, 0.5], LatticeModel::c0(2).unwrap()).unwrap();
        let chain = PartitionChain::new(vec![0.5, 0.5], vec![vec![vec![0, 1]]]).unwrap();
        let f = product_filtration(&chain, &model, None, None).unwrap();
        assert_eq!(operator_norm(&model, f.stage(0).matrix()), (1.0, true));
    }

    #[test]
    fn double_condition_examples() {
        let model = LatticeModel::ell1(2).unwrap();
        let avg = Projection::new(avg2(), ProjectionKind::GeneralPositive).unwrap();
        let r = double_condition_diagnostics(&avg, &model).unwrap();
        assert!(r.strictly_positive && r.adjoint_strictly_positive && r.witness_exists && r.equivalence_holds);
        let u = r.fixed_weak_unit.unwrap();
        assert!(u.approx_eq(&Element::new(vec![0.5, 0.5]), 1e-12));

        let diag = Projection::band(&BandDescriptor::from_support(2, vec![0]).unwrap(), 2);
        let r = double_condition_diagnostics(&diag, &model).unwrap();
        assert!(!r.strictly_positive && r.fixed_weak_unit.is_none() && !r.witness_exists);
        assert!(r.equivalence_holds && r.structural_matches_basis);

        let r = double_condition_diagnostics(&Projection::identity(3), &LatticeModel::ell1(3).unwrap()).unwrap();
        assert!(r.strictly_positive && r.adjoint_strictly_positive && r.witness_exists);
    }

    #[test]
    fn one_sided_strict_positivity() {
        // E = [[1, 1], [0, 0]]: no zero column but a zero row
        let e = Projection::new(
            Matrix::from_rows(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap(),
            ProjectionKind::GeneralPositive,
        )
        .unwrap();
        let r = double_condition_diagnostics(&e, &LatticeModel::ell1(2).unwrap()).unwrap();
        assert!(r.strictly_positive && !r.adjoint_strictly_positive);
        assert!(r.fixed_weak_unit.is_none() && r.fixed_strict_functional.is_some());
        assert!(r.equivalence_holds);
    }

    #[test]
    fn partition_recovery() {
        let chain = PartitionChain::new(vec![0.1, 0.2, 0.3, 0.4], vec![vec![vec![0, 3], vec![1, 2]]]).unwrap();
        let e = chain.conditional_expectation(0).unwrap();
        assert_eq!(recover_partition(&e, chain.mu(), 1e-12).unwrap(), Some(vec![vec![0, 3], vec![1, 2]]));
        assert_eq!(recover_partition(&e, &[0.25; 4], 1e-12).unwrap(), None);
    }

    #[test]
    fn kron_layout() {
        let a = avg2();
        let k = kron(&a, &Matrix::identity(2));
        assert_eq!(*k.get(0, 2), 0.5);
        assert_eq!(*k.get(0, 1), 0.0);
        assert_eq!(*k.get(3, 1), 0.5);
    }
}
