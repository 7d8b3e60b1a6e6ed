//! Seeded batch suites over random instances. Each case draws from its own
//! random stream, so results do not depend on the execution strategy.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::Serialize;

use crate::convergence::{fatou_check, SequenceFamily};
use crate::filtration::{
    chain_to_filtration, double_condition_diagnostics, exact_tower, validate_filtration, PartitionChain, Projection,
    ProjectionKind,
};
use crate::lattice::{band_projection, Element, LatticeModel};
use crate::martingale::closed_martingale_experiment;
use crate::par::Strategy;
use crate::random::{self, ModelKind};
use crate::scalar::SmallRational;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub cases: usize,
    pub violations: usize,
    pub first_failure: Option<String>,
    /// Informational counters, e.g. how many instances had a given property.
    pub tallies: BTreeMap<String, usize>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Case {
    failure: Option<String>,
    tags: Vec<&'static str>,
}

impl Case {
    fn ok(tags: Vec<&'static str>) -> Self {
        Case { failure: None, tags }
    }

    fn fail(msg: String) -> Self {
        Case { failure: Some(msg), tags: Vec::new() }
    }
}

fn run(strategy: Strategy, cases: usize, f: impl Fn(usize) -> Case + Sync + Send) -> SuiteOutcome {
    let results = strategy.map_range(cases, f);
    let mut out = SuiteOutcome { cases, ..Default::default() };
    for (i, r) in results.into_iter().enumerate() {
        if let Some(msg) = r.failure {
            out.violations += 1;
            out.first_failure.get_or_insert_with(|| format!("case {i}: {msg}"));
        }
        for t in r.tags {
            *out.tallies.entry(t.to_string()).or_default() += 1;
        }
    }
    out
}

fn close(a: &Element, b: &Element, exact: bool) -> bool {
    if exact {
        a == b
    } else {
        let scale = 1.0 + a.sup_norm().max(b.sup_norm());
        a.approx_eq(b, 1e-12 * scale)
    }
}

fn below(a: &Element, b: &Element, exact: bool) -> bool {
    let scale = if exact { 0.0 } else { 1e-12 * (1.0 + a.sup_norm().max(b.sup_norm())) };
    a.le(b, scale)
}

/// Lattice axioms, the positive/negative part decompositions, the
/// continuity inequalities behind uo-limit arithmetic and lattice-norm
/// monotonicity on random triples. Even cases use integer coordinates and
/// are checked exactly; odd cases use floats within `1e-12`.
pub fn lattice_laws(strategy: Strategy, seed: u64, cases: usize) -> SuiteOutcome {
    run(strategy, cases, |i| {
        let mut rng = random::stream(seed, i as u64);
        let kind = ModelKind::ALL[i % ModelKind::ALL.len()];
        let model = random::model(&mut rng, kind, 12);
        let dim = model.dim();
        let exact = i % 2 == 0;
        let draw = |rng: &mut random::Rng64| {
            if exact {
                random::integer_element(rng, dim, 9)
            } else {
                random::element(rng, dim, 10.0)
            }
        };
        let (x, y, z) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let (a, b) = (rng.gen_range(-3..=3) as f64, rng.gen_range(-3..=3) as f64);
        let d = (&x - &y).abs();
        let checks: [(&str, bool); 22] = [
            ("meet commutes", x.meet(&y) == y.meet(&x)),
            ("join commutes", x.join(&y) == y.join(&x)),
            ("meet associates", x.meet(&y.meet(&z)) == x.meet(&y).meet(&z)),
            ("join associates", x.join(&y.join(&z)) == x.join(&y).join(&z)),
            ("absorption", x.meet(&x.join(&y)) == x && x.join(&x.meet(&y)) == x),
            ("idempotence", x.meet(&x) == x && x.join(&x) == x),
            ("distributive", x.meet(&y.join(&z)) == x.meet(&y).join(&x.meet(&z))),
            ("x = x+ - x-", &x.pos() - &x.neg_part() == x),
            ("|x| = x+ + x-", &x.pos() + &x.neg_part() == x.abs()),
            ("x+ ∧ x- = 0", x.pos().meet(&x.neg_part()) == Element::zeros(dim)),
            ("x + y = x∨y + x∧y", close(&(&x + &y), &(&x.join(&y) + &x.meet(&y)), exact)),
            ("| |x| - |y| | ≤ |x - y|", below(&(&x.abs() - &y.abs()).abs(), &d, exact)),
            ("|x+ - y+| ≤ |x - y|", below(&(&x.pos() - &y.pos()).abs(), &d, exact)),
            ("|x- - y-| ≤ |x - y|", below(&(&x.neg_part() - &y.neg_part()).abs(), &d, exact)),
            ("|x∧z - y∧z| ≤ |x - y|", below(&(&x.meet(&z) - &y.meet(&z)).abs(), &d, exact)),
            ("|x∨z - y∨z| ≤ |x - y|", below(&(&x.join(&z) - &y.join(&z)).abs(), &d, exact)),
            (
                "|ax + bz - (ay + bz)| ≤ |a||x - y|",
                below(&(&(&(a * &x) + &(b * &z)) - &(&(a * &y) + &(b * &z))).abs(), &(a.abs() * &d), exact),
            ),
            ("0 ≤ x ⇒ x∧z ≤ x", below(&x.abs().meet(&z), &x.abs(), exact)),
            ("‖x‖ = ‖|x|‖", (model.norm(&x) - model.norm(&x.abs())).abs() <= 1e-12 * (1.0 + model.norm(&x))),
            (
                "‖|x| ∧ |y|‖ ≤ ‖y‖",
                model.norm(&x.abs().meet(&y.abs())) <= model.norm(&y) * (1.0 + 1e-12) + 1e-12,
            ),
            (
                "triangle",
                model.norm(&(&x + &y)) <= (model.norm(&x) + model.norm(&y)) * (1.0 + 1e-12) + 1e-12,
            ),
            ("‖ax‖ = |a|‖x‖", (model.norm(&(a * &x)) - a.abs() * model.norm(&x)).abs() <= 1e-12 * (1.0 + a.abs() * model.norm(&x))),
        ];
        match checks.iter().find(|c| !c.1) {
            Some((law, _)) => Case::fail(format!("{} model: {law} fails for x = {x}, y = {y}, z = {z}", kind.name())),
            None => Case::ok(vec![kind.name()]),
        }
    })
}

/// Band projections: idempotence, `0 ≤ Px ≤ x` on positives and
/// `P(|x| ∧ y) = |Px| ∧ Py`, all checked exactly.
pub fn band_laws(strategy: Strategy, seed: u64, cases: usize) -> SuiteOutcome {
    run(strategy, cases, |i| {
        let mut rng = random::stream(seed, i as u64);
        let dim = rng.gen_range(1..=12);
        let gen = random::integer_element(&mut rng, dim, 3);
        let (x, y) = if i % 2 == 0 {
            (random::integer_element(&mut rng, dim, 9), random::integer_element(&mut rng, dim, 9))
        } else {
            (random::element(&mut rng, dim, 10.0), random::element(&mut rng, dim, 10.0))
        };
        let p = |v: &Element| band_projection(&gen, v).expect("dimensions agree");
        let px = p(&x);
        let pos = x.abs();
        let ppos = p(&pos);
        let checks = [
            ("idempotent", p(&px) == px),
            ("0 ≤ Px ≤ x", ppos.is_nonnegative() && ppos.le(&pos, 0.0)),
            ("P(|x| ∧ y) = |Px| ∧ Py", p(&x.abs().meet(&y)) == px.abs().meet(&p(&y))),
            ("Px + (x - Px) disjoint", px.abs().meet(&(&x - &px).abs()) == Element::zeros(dim)),
        ];
        match checks.iter().find(|c| !c.1) {
            Some((law, _)) => Case::fail(format!("{law} fails for gen = {gen}, x = {x}, y = {y}")),
            None => Case::ok(vec![if gen.support().len() == dim { "full band" } else { "proper band" }]),
        }
    })
}

/// Conditional expectations of random rational chains: each stage fixes the
/// constants and `μ`, and the stages satisfy the exact tower law.
pub fn conditional_expectation_laws(strategy: Strategy, seed: u64, cases: usize, max_dim: usize) -> SuiteOutcome {
    run(strategy, cases, |i| {
        let mut rng = random::stream(seed, i as u64);
        let chain = match small_chain(&random::rational_chain(&mut rng, max_dim)) {
            Ok(c) => c,
            Err(e) => return Case::fail(e.to_string()),
        };
        let stages = match chain.conditional_expectations() {
            Ok(s) => s,
            Err(e) => return Case::fail(e.to_string()),
        };
        let ones = vec![SmallRational::one(); chain.dim()];
        for (t, e) in stages.iter().enumerate() {
            if e.apply(&ones) != ones {
                return Case::fail(format!("stage {t} does not fix the constants"));
            }
            if e.apply_transpose(chain.mu()) != chain.mu() {
                return Case::fail(format!("stage {t} does not preserve mu"));
            }
        }
        if !exact_tower(&stages) {
            return Case::fail("tower law fails".into());
        }
        Case::ok(vec![if chain.len() > 1 { "multi-stage" } else { "single-stage" }])
    })
}

fn small_chain(chain: &PartitionChain<BigRational>) -> crate::Result<PartitionChain<SmallRational>> {
    let mu = chain
        .mu()
        .iter()
        .map(|m| match (m.numer().to_i64(), m.denom().to_i64()) {
            (Some(n), Some(d)) => Ok(SmallRational::new(n, d)),
            _ => Err(crate::Error::Precondition(format!("mass {m} does not fit in i64"))),
        })
        .collect::<crate::Result<Vec<_>>>()?;
    PartitionChain::new(mu, chain.partitions().to_vec())
}

/// Witness existence for the bistochastic condition against strict positivity of `E`
/// and `Eᵀ` on random positive projections of dimension up to `max_dim`.
pub fn double_condition(strategy: Strategy, seed: u64, cases: usize, max_dim: usize) -> SuiteOutcome {
    run(strategy, cases, |i| {
        let mut rng = random::stream(seed, i as u64);
        let dim = rng.gen_range(1..=max_dim);
        let m = random::projection(&mut rng, dim);
        let e = match Projection::new(m, ProjectionKind::GeneralPositive) {
            Ok(e) => e,
            Err(err) => return Case::fail(err.to_string()),
        };
        let model = LatticeModel::ell1(dim).expect("dim ≥ 1");
        match double_condition_diagnostics(&e, &model) {
            Err(err) => Case::fail(err.to_string()),
            Ok(r) if !r.equivalence_holds => Case::fail(format!(
                "witness {} vs strict pair ({}, {}), margins {:.3e} / {:.3e}",
                r.witness_exists,
                r.strictly_positive,
                r.adjoint_strictly_positive,
                r.fixed_weak_unit_margin,
                r.fixed_functional_margin
            )),
            Ok(r) if !r.structural_matches_basis => Case::fail("structural test disagrees with basis evaluation".into()),
            Ok(r) => Case::ok(vec![
                if r.witness_exists { "witness" } else { "no witness" },
                if r.strictly_positive { "E strict" } else { "E not strict" },
                if r.adjoint_strictly_positive { "E* strict" } else { "E* not strict" },
            ]),
        }
    })
}

/// `a·1_A + b` on `n` atoms, the random indicator-like vectors of the closed
/// martingale suite.
pub fn indicator_like(rng: &mut impl Rng, n: usize) -> Element {
    let a = rng.gen_range(-5.0..5.0);
    let b = rng.gen_range(-5.0..5.0);
    Element::new((0..n).map(|_| if rng.gen_bool(0.5) { a + b } else { b }).collect())
}

/// Closed martingales `E_n x` on the dyadic chain of the given depth, for
/// indicator-like `x`: the final residual is exactly zero, the residual is
/// nonincreasing in `n` and the trace is certified almost order bounded
/// (see [`closed_martingale_experiment`]).
///
/// The tallies also record, for generic random `x`, how often the `L1`
/// residual fails to be monotone and how often the `L2` residual does.
pub fn closed_martingale_suite(strategy: Strategy, seed: u64, cases: usize, depth: u32) -> SuiteOutcome {
    let chain = PartitionChain::dyadic(depth);
    let f = chain_to_filtration(&chain).expect("dyadic chain is valid");
    let bound = validate_filtration(&f).expect("dyadic filtration validates").bounded_const;
    let n = chain.dim();
    let l2 = LatticeModel::lp(n, 2.0).expect("valid");
    run(strategy, cases, |i| {
        let mut rng = random::stream(seed, i as u64);
        let x = indicator_like(&mut rng, n);
        let report = match closed_martingale_experiment(&f, &x, bound) {
            Ok((_, r)) => r,
            Err(e) => return Case::fail(e.to_string()),
        };
        for v in ["final_residual_zero", "residual_monotone", "aob_certified"] {
            if report.get(v) != Some(true) {
                return Case::fail(format!("{v} fails for x = {x}"));
            }
        }

        let g = random::element(&mut rng, n, 1.0);
        let monotone = |m: &LatticeModel| {
            let r: Vec<f64> = f.stages().iter().map(|e| m.norm(&(&e.apply(&g) - &g))).collect();
            r.windows(2).all(|w| w[1] <= w[0] + 1e-12)
        };
        let mut tags = vec!["indicator-like"];
        if !monotone(f.model()) {
            tags.push("generic L1 residual not monotone");
        }
        if !monotone(&l2) {
            tags.push("generic L2 residual not monotone");
        }
        Case::ok(tags)
    })
}

/// Families for the Fatou suite, `horizon` terms each.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FatouFamily {
    Geometric,
    EventuallyConstant,
    OutwardMonotone,
    DisjointBumps,
}

impl FatouFamily {
    pub const ALL: [FatouFamily; 4] =
        [FatouFamily::Geometric, FatouFamily::EventuallyConstant, FatouFamily::OutwardMonotone, FatouFamily::DisjointBumps];

    pub fn name(self) -> &'static str {
        match self {
            FatouFamily::Geometric => "geometric",
            FatouFamily::EventuallyConstant => "eventually constant",
            FatouFamily::OutwardMonotone => "outward monotone",
            FatouFamily::DisjointBumps => "disjoint bumps",
        }
    }
}

/// A uo-convergent family and its limit.
pub fn fatou_family(
    rng: &mut impl Rng,
    kind: FatouFamily,
    model: &LatticeModel,
    horizon: usize,
) -> (SequenceFamily, Element) {
    let dim = model.dim();
    let mut x = random::element(rng, dim, 1.0);
    let terms: Vec<Element> = match kind {
        FatouFamily::Geometric => {
            let r = random::element(rng, dim, 1.0);
            (1..=horizon).map(|n| &x + &r.scale(0.5f64.powi(n as i32))).collect()
        }
        FatouFamily::EventuallyConstant => (1..=horizon)
            .map(|n| if n <= horizon / 2 { &x + &random::element(rng, dim, 1.0) } else { x.clone() })
            .collect(),
        FatouFamily::OutwardMonotone => (1..=horizon).map(|n| x.scale(1.0 + 1.0 / n as f64)).collect(),
        FatouFamily::DisjointBumps => {
            let free: Vec<usize> = (0..dim).filter(|_| rng.gen_bool(0.5)).collect();
            let free = if free.is_empty() { vec![dim - 1] } else { free };
            let mut coords = x.into_coords();
            for &j in &free {
                coords[j] = 0.0;
            }
            x = Element::new(coords);
            let s = rng.gen_range(0.5..1.0);
            (1..=horizon)
                .map(|n| {
                    let mut t = x.clone().into_coords();
                    t[free[n % free.len()]] = s / n as f64;
                    Element::new(t)
                })
                .collect()
        }
    };
    (SequenceFamily::new(model.clone(), terms).expect("horizon ≥ 2"), x)
}

/// Norm lower semicontinuity on generated uo-convergent families.
pub fn fatou(strategy: Strategy, seed: u64, cases: usize, slack: f64) -> SuiteOutcome {
    const HORIZON: usize = 64;
    const PROFILE_TOLERANCE: f64 = 0.05;
    run(strategy, cases, |i| {
        let mut rng = random::stream(seed, i as u64);
        let family = FatouFamily::ALL[i % FatouFamily::ALL.len()];
        let kind = ModelKind::ALL[(i / FatouFamily::ALL.len()) % ModelKind::ALL.len()];
        let model = random::model(&mut rng, kind, 16);
        let (seq, limit) = fatou_family(&mut rng, family, &model, HORIZON);
        match fatou_check(&seq, &limit, PROFILE_TOLERANCE, slack) {
            Ok(c) if c.ok => Case::ok(vec![family.name()]),
            Ok(c) => Case::fail(format!("{} in {}: ‖x‖ = {} > liminf {}", family.name(), kind.name(), c.lhs, c.liminf)),
            Err(e) => Case::fail(format!("{} in {}: {e}", family.name(), kind.name())),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass_and_agree_across_strategies() {
        for s in Strategy::available() {
            assert!(lattice_laws(*s, 1, 200).passed());
            assert!(band_laws(*s, 1, 100).passed());
            assert!(conditional_expectation_laws(*s, 1, 20, 16).passed());
            assert!(double_condition(*s, 1, 100, 6).passed());
            assert!(fatou(*s, 1, 40, 1e-9).passed());
        }
        let a = double_condition(Strategy::Sequential, 5, 50, 6);
        let b = double_condition(Strategy::default(), 5, 50, 6);
        assert_eq!(a, b);
    }

    #[test]
    fn closed_martingale_suite_small() {
        let out = closed_martingale_suite(Strategy::default(), 2, 10, 4);
        assert!(out.passed(), "{:?}", out.first_failure);
        assert!(!out.tallies.contains_key("generic L2 residual not monotone"));
    }
}
