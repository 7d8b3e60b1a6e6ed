//! Tail-supremum diagnostics for order, uo and un convergence of sequences.
//!
//! Every profile is a non-increasing sequence `c_1 ≥ … ≥ c_{H−1}` built from
//! the tails `n ≥ k` of a finite family `x_1, …, x_H`. In a finite-coordinate
//! lattice every sequence is order bounded and the tail suprema are
//! coordinatewise maxima, so `c_k` is the norm of
//! `sup_{n≥k} |x_n − x|` (meeting with a unit for uo) and the family order
//! converges exactly when `c_k → 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Element, LatticeModel};
use crate::par::{max_of, Strategy};

/// Absolute slack used when locating the start of a plateau.
const PLATEAU_SLACK: f64 = 1e-12;

/// Finite family `x_1, …, x_H` in one model.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceFamily {
    model: LatticeModel,
    terms: Vec<Element>,
}

impl SequenceFamily {
    pub fn new(model: LatticeModel, terms: Vec<Element>) -> Result<Self> {
        if terms.len() < 2 {
            return Err(Error::ShortHorizon(terms.len()));
        }
        for t in &terms {
            model.check(t)?;
        }
        Ok(SequenceFamily { model, terms })
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn terms(&self) -> &[Element] {
        &self.terms
    }

    pub fn horizon(&self) -> usize {
        self.terms.len()
    }

    pub fn last(&self) -> &Element {
        self.terms.last().expect("horizon is at least 2")
    }

    /// Applies `f` termwise.
    pub fn map(&self, f: impl Fn(&Element) -> Element) -> Result<SequenceFamily> {
        SequenceFamily::new(self.model.clone(), self.terms.iter().map(f).collect())
    }

    /// Partial sums `x_n = e_1 + … + e_n`, `n = 1..=horizon`.
    pub fn partial_sums(model: LatticeModel, horizon: usize) -> Result<Self> {
        let dim = model.dim();
        if horizon > dim {
            return Err(Error::Precondition(format!("horizon {horizon} exceeds dim {dim}")));
        }
        let terms = (1..=horizon)
            .map(|n| Element::new((0..dim).map(|i| if i < n { 1.0 } else { 0.0 }).collect()))
            .collect();
        SequenceFamily::new(model, terms)
    }

    /// Standard basis `x_n = e_n`, `n = 1..=horizon`.
    pub fn basis(model: LatticeModel, horizon: usize) -> Result<Self> {
        let dim = model.dim();
        if horizon > dim {
            return Err(Error::Precondition(format!("horizon {horizon} exceeds dim {dim}")));
        }
        let terms = (0..horizon).map(|n| Element::basis(dim, n)).collect();
        SequenceFamily::new(model, terms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Order,
    Uo,
    Un,
    UoCauchy,
    OrderCauchy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    Diverged,
    Inconclusive,
}

/// Tail-sup profile `c_1..c_{H−1}` with its verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceProfile {
    pub mode: Mode,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Element>,
}

impl ConvergenceProfile {
    pub fn new(mode: Mode, c: Vec<f64>, witness: Option<Element>, tolerance: f64) -> Self {
        let verdict = classify(&c, tolerance);
        ConvergenceProfile { mode, verdict, tolerance, c, witness }
    }

    pub fn converged(&self) -> bool {
        self.verdict == Verdict::Converged
    }

    pub fn last(&self) -> f64 {
        self.c.last().copied().unwrap_or(0.0)
    }

    /// `k,c_k` rows, `k` starting at 1.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k", "c_k"])?;
        for (k, c) in self.c.iter().enumerate() {
            w.write_record([(k + 1).to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Three-valued verdict for a non-increasing profile.
///
/// Converged when the last value is within tolerance and the profile shows
/// decrease (or starts within tolerance). A profile stuck above tolerance is
/// inconclusive if its final plateau starts in the last quarter of the
/// profile, diverged otherwise.
pub fn classify(c: &[f64], tolerance: f64) -> Verdict {
    let (Some(&first), Some(&last)) = (c.first(), c.last()) else {
        return Verdict::Inconclusive;
    };
    if last <= tolerance && (last < first || first <= tolerance) {
        return Verdict::Converged;
    }
    let plateau = c.iter().position(|&v| v - last <= PLATEAU_SLACK).unwrap_or(c.len() - 1);
    let quarter = c.len().div_ceil(4);
    if last > tolerance && plateau >= c.len() - quarter {
        Verdict::Inconclusive
    } else {
        Verdict::Diverged
    }
}

/// `c_k = max_{n ≥ k} v_n` for `k = 1..H−1`, given per-term values `v_1..v_H`.
fn suffix_max(values: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; values.len() - 1];
    let mut running = values[values.len() - 1];
    for k in (0..values.len() - 1).rev() {
        running = running.max(values[k]);
        c[k] = running;
    }
    c
}

fn ensure_unit(unit: &Element) -> Result<()> {
    if crate::lattice::is_weak_unit(unit)? {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{unit} is not a weak unit")))
    }
}

/// Order convergence to `limit`: `c_k = ‖sup_{n≥k} |x_n − limit|‖_sup`.
pub fn order_profile(seq: &SequenceFamily, limit: &Element, tolerance: f64) -> Result<ConvergenceProfile> {
    seq.model().check(limit)?;
    let values = Strategy::default().map(seq.terms(), |x| (x - limit).sup_norm());
    Ok(ConvergenceProfile::new(Mode::Order, suffix_max(&values), Some(limit.clone()), tolerance))
}

/// uo convergence to `limit` tested against a weak unit:
/// `c_k = ‖sup_{n≥k} (|x_n − limit| ∧ unit)‖_sup`.
pub fn uo_profile(
    seq: &SequenceFamily,
    limit: &Element,
    unit: &Element,
    tolerance: f64,
) -> Result<ConvergenceProfile> {
    seq.model().check(limit)?;
    seq.model().check(unit)?;
    ensure_unit(unit)?;
    let values = Strategy::default().map(seq.terms(), |x| (x - limit).abs().meet(unit).sup_norm());
    Ok(ConvergenceProfile::new(Mode::Uo, suffix_max(&values), Some(limit.clone()), tolerance))
}

/// Largest spread `max_{n,m≥k} |x_n,i − x_m,i|` of every coordinate over
/// each tail, capped by `cap_i`; returns `c_k = max_i` of the result.
fn tail_spread_profile(seq: &SequenceFamily, cap: impl Fn(usize) -> f64 + Sync + Send) -> Vec<f64> {
    let h = seq.horizon();
    let columns = Strategy::default().map_range(seq.model().dim(), |i| {
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        let mut col = vec![0.0; h - 1];
        for n in (0..h).rev() {
            let v = seq.terms()[n].coords()[i];
            hi = hi.max(v);
            lo = lo.min(v);
            if n < h - 1 {
                col[n] = (hi - lo).min(cap(i));
            }
        }
        col
    });
    (0..h - 1).map(|k| columns.iter().map(|col| col[k]).fold(0.0, f64::max)).collect()
}

/// uo-Cauchy test: `c_k = max_{n,m≥k} ‖|x_n − x_m| ∧ unit‖_sup`.
///
/// The pair maximum is evaluated coordinatewise: for fixed `i` the largest
/// `|x_n,i − x_m,i|` over a tail is the spread of that tail.
pub fn uo_cauchy_profile(seq: &SequenceFamily, unit: &Element, tolerance: f64) -> Result<ConvergenceProfile> {
    seq.model().check(unit)?;
    ensure_unit(unit)?;
    let c = tail_spread_profile(seq, |i| unit.coords()[i]);
    Ok(ConvergenceProfile::new(Mode::UoCauchy, c, Some(unit.clone()), tolerance))
}

/// Order-Cauchy test: `c_k = max_{n,m≥k} ‖x_n − x_m‖_sup`.
pub fn order_cauchy_profile(seq: &SequenceFamily, tolerance: f64) -> Result<ConvergenceProfile> {
    let c = tail_spread_profile(seq, |_| f64::INFINITY);
    Ok(ConvergenceProfile::new(Mode::OrderCauchy, c, None, tolerance))
}

/// Unbounded norm convergence against a battery of positive test vectors:
/// `c_k = max_{y} sup_{n≥k} ‖|x_n − limit| ∧ y‖`.
pub fn un_profile(
    seq: &SequenceFamily,
    limit: &Element,
    battery: &[Element],
    tolerance: f64,
) -> Result<ConvergenceProfile> {
    if battery.is_empty() {
        return Err(Error::EmptyBattery);
    }
    let model = seq.model();
    model.check(limit)?;
    for y in battery {
        model.check(y)?;
        if !y.is_nonnegative() {
            return Err(Error::Precondition(format!("battery vector {y} is not positive")));
        }
    }
    let values = Strategy::default().map(seq.terms(), |x| {
        let d = (x - limit).abs();
        battery.iter().map(|y| model.norm(&d.meet(y))).fold(0.0, f64::max)
    });
    Ok(ConvergenceProfile::new(Mode::Un, suffix_max(&values), Some(limit.clone()), tolerance))
}

/// `sup_{x∈A} ‖(|x| − u)⁺‖` and whether it is within `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AobCertificate {
    pub bounded: bool,
    pub residual: f64,
}

/// Almost order boundedness certificate: `A ⊂ [−u, u] + eps·B` iff
/// `sup_{x∈A} ‖(|x| − u)⁺‖ ≤ eps`.
pub fn almost_order_bounded(
    model: &LatticeModel,
    set: &[Element],
    u: &Element,
    eps: f64,
) -> Result<AobCertificate> {
    model.check(u)?;
    if !u.is_nonnegative() {
        return Err(Error::Precondition(format!("{u} is not positive")));
    }
    if !(eps >= 0.0) {
        return Err(Error::Precondition(format!("eps = {eps} must be nonnegative")));
    }
    for x in set {
        model.check(x)?;
    }
    let residuals = Strategy::default().map(set, |x| model.norm(&(&x.abs() - u).pos()));
    let residual = max_of(&residuals);
    Ok(AobCertificate { bounded: residual <= eps, residual })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AobWitness {
    pub u: Element,
    /// Number of leading coordinates kept.
    pub k: usize,
    pub residual: f64,
}

/// Searches the truncations `u_K = (sup_{x∈A} |x|)·1_{i ≤ K}` for a witness of
/// almost order boundedness at level `eps`. On `c0` truncations the witness
/// must itself pass the membership test.
pub fn aob_search(model: &LatticeModel, set: &[Element], eps: f64) -> Result<Option<AobWitness>> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("eps = {eps} must be positive")));
    }
    for x in set {
        model.check(x)?;
    }
    let envelope = set.iter().fold(model.zero(), |acc, x| acc.join(&x.abs()));
    for k in 1..=model.dim() {
        let u = Element::new(
            envelope.coords().iter().enumerate().map(|(i, &v)| if i < k { v } else { 0.0 }).collect(),
        );
        let cert = almost_order_bounded(model, set, &u, eps)?;
        if cert.bounded && model.accepts_limit(&u) {
            return Ok(Some(AobWitness { u, k, residual: cert.residual }));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FatouCheck {
    /// `‖limit‖`
    pub lhs: f64,
    /// Minimum of `‖x_n‖` over the final quarter of the horizon.
    pub liminf: f64,
    pub ok: bool,
}

/// Terms in the final quarter of a horizon (at least one).
pub fn final_quarter(horizon: usize) -> std::ops::Range<usize> {
    horizon - horizon.div_ceil(4).max(1)..horizon
}

/// Norm lower semicontinuity along a uo-convergent family:
/// `‖limit‖ ≤ liminf ‖x_n‖ + slack`, the liminf taken over the final quarter.
///
/// The family must first pass [`uo_profile`] against the model's default
/// unit at `profile_tolerance`.
pub fn fatou_check(
    seq: &SequenceFamily,
    limit: &Element,
    profile_tolerance: f64,
    slack: f64,
) -> Result<FatouCheck> {
    let model = seq.model();
    let profile = uo_profile(seq, limit, &model.default_unit(), profile_tolerance)?;
    if !profile.converged() {
        return Err(Error::Precondition(format!(
            "uo_profile against the default unit is {:?} (last c_k = {}), not converged",
            profile.verdict,
            profile.last()
        )));
    }
    let lhs = model.norm(limit);
    let liminf = seq.terms()[final_quarter(seq.horizon())]
        .iter()
        .map(|x| model.norm(x))
        .fold(f64::INFINITY, f64::min);
    Ok(FatouCheck { lhs, liminf, ok: lhs <= liminf + slack })
}

/// Whether two profiles satisfy `a_k ≤ factor · b_k + slack` for every `k`.
pub fn dominated(a: &ConvergenceProfile, b: &ConvergenceProfile, factor: f64, slack: f64) -> bool {
    a.c.len() == b.c.len() && a.c.iter().zip(&b.c).all(|(x, y)| *x <= factor * y + slack)
}
