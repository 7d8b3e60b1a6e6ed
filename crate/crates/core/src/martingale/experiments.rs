use serde::{Deserialize, Serialize};

use crate::convergence::{almost_order_bounded, order_profile, uo_cauchy_profile, uo_profile, SequenceFamily};
use crate::error::{ensure_dim, Error, Result};
use crate::filtration::{operator_norm, product_filtration, Filtration, PartitionChain, Projection, Witness};
use crate::lattice::{is_weak_unit, Element, Functional, LatticeModel};
use crate::martingale::{closed_martingale, verify_process, ExperimentReport, ProcessTrace};
use crate::representation::ALView;

/// Growth factor separating a norm-bounded partial-sum family from an
/// unbounded one: late norms exceeding the early ones by more than this
/// count as unbounded.
const BOUNDED_GROWTH: f64 = 1.25;

/// Doob-type check for a submartingale under the bistochastic condition.
///
/// Reports `x0*(z_n)` for every stage, `sup_n x0*(z_n⁺)`, the uo-Cauchy
/// profile against `x0` and whether the final value, the limit candidate,
/// belongs to the tagged space.
pub fn doob_experiment(p: &ProcessTrace, view: &ALView, tolerance: f64) -> Result<ExperimentReport> {
    let f = p.filtration();
    ensure_dim(f.model().dim(), view.base().dim())?;
    if !f.bistochastic_for(view.x0(), view.x0star())? {
        return Err(Error::Hypothesis(
            "the bistochastic condition fails: the first stage does not fix x0 and x0*".into(),
        ));
    }
    let check = verify_process(p, f.tolerance());
    if !check.is_submartingale {
        return Err(Error::Hypothesis(format!(
            "trace is not a submartingale (adapted: {}, worst violation {:.3e})",
            check.adapted, check.max_sub_violation
        )));
    }

    let mut report = ExperimentReport::new("doob");
    let levels: Vec<f64> = p.values().iter().map(|z| view.x0star().apply(z)).collect();
    let sup_pos = p.values().iter().map(|z| view.x0star().apply(&z.pos())).fold(0.0, f64::max);
    for (n, v) in levels.iter().enumerate() {
        report.scalar(&format!("x0star_z_{}", n + 1), *v);
    }
    report.scalar("sup_x0star_pos", sup_pos);
    let slack = f.tolerance() * levels.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let monotone = levels.windows(2).all(|w| w[0] <= w[1] + slack) && levels.iter().all(|v| *v <= sup_pos + slack);
    report.verdict("positive_part_bounded", sup_pos.is_finite(), "sup_x0star_pos");
    report.verdict("bound_chain_monotone", monotone, "sup_x0star_pos");

    report.scalar("martingale_violation", check.max_violation);
    report.verdict("martingale", check.is_martingale, "martingale_violation");

    let profile = uo_cauchy_profile(&p.family()?, view.x0(), tolerance)?;
    let cauchy = profile.converged();
    report.profile("uo_cauchy", profile);
    report.verdict("uo_cauchy", cauchy, "uo_cauchy");

    let candidate = p.last();
    report.scalar("limit_candidate_norm", f.model().norm(candidate));
    let accepted = f.model().accepts_limit(candidate);
    report.verdict("limit_accepted", accepted, "limit_candidate_norm");
    report.verdict("bounded_implies_cauchy", !sup_pos.is_finite() || cauchy, "uo_cauchy");
    if cauchy && !accepted {
        report.note("uo-Cauchy, not uo-convergent in tagged space");
    }
    Ok(report)
}

fn norm_growth(model: &LatticeModel, seq: &SequenceFamily) -> (f64, f64) {
    let norms: Vec<f64> = seq.terms().iter().map(|x| model.norm(x)).collect();
    let half = norms.len() / 2;
    let early = norms[..half].iter().copied().fold(0.0, f64::max);
    let late = norms[half..].iter().copied().fold(0.0, f64::max);
    (early, late)
}

/// Partial sums `Σ_{k≤n} e_k` in an `L1` truncation and in a `c0` truncation
/// of dimension `horizon`, plus the bounded family `(1 − 2⁻ⁿ)u` in `L1`.
pub fn kb_vs_c0_experiment(horizon: usize, tolerance: f64) -> Result<ExperimentReport> {
    if horizon < 4 {
        return Err(Error::Precondition(format!("horizon {horizon} < 4")));
    }
    let dim = horizon;
    let unit = Element::harmonic(dim);
    let ones = Element::constant(dim, 1.0);
    let mut report = ExperimentReport::new(format!("kb_vs_c0_h{horizon}"));
    for (tag, model) in [("l1", LatticeModel::ell1(dim)?), ("c0", LatticeModel::c0(dim)?)] {
        let seq = SequenceFamily::partial_sums(model.clone(), horizon)?;
        let profile = uo_cauchy_profile(&seq, &unit, tolerance)?;
        let cauchy = profile.converged();
        let name = format!("{tag}_partial_sums");
        report.profile(&name, profile);
        report.verdict(&format!("{tag}_uo_cauchy"), cauchy, &name);
        let (early, late) = norm_growth(&model, &seq);
        report.scalar(&format!("{tag}_norm_early"), early);
        report.scalar(&format!("{tag}_norm_late"), late);
        report.verdict(&format!("{tag}_norm_bounded"), late <= BOUNDED_GROWTH * early, &format!("{tag}_norm_late"));
        report.scalar(&format!("{tag}_limit_candidate_norm"), model.norm(&ones));
        report.verdict(
            &format!("{tag}_limit_accepted"),
            model.accepts_limit(&ones),
            &format!("{tag}_limit_candidate_norm"),
        );
    }
    report.note("the L1 partial sums are not norm bounded, so the KB conclusion does not apply to them");

    let l1 = LatticeModel::ell1(dim)?;
    let u = Element::harmonic(dim);
    let bounded = SequenceFamily::new(
        l1.clone(),
        (1..=horizon).map(|n| u.scale(1.0 - 0.5f64.powi(n as i32))).collect(),
    )?;
    let profile = uo_profile(&bounded, &u, &unit, tolerance)?;
    let converged = profile.converged();
    report.profile("l1_bounded_family", profile);
    report.verdict("bounded_family_uo_converges", converged, "l1_bounded_family");
    report.scalar("bounded_family_limit_norm", l1.norm(&u));
    report.verdict("bounded_family_limit_accepted", l1.accepts_limit(&u), "bounded_family_limit_norm");
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakSubCheck {
    /// `z_n ≤ E_n x + tol` for every `n`.
    pub holds: bool,
    /// `z_n = E_n x` within `tol` for every `n`.
    pub equality: bool,
    pub max_excess: f64,
    pub max_gap: f64,
    /// `‖z_T − x‖`: the finite-dimensional stand-in for `x` being a weak
    /// subsequential limit.
    pub limit_gap: f64,
    pub limit_is_surrogate_limit: bool,
}

pub fn weaksub_check(p: &ProcessTrace, x: &Element, tolerance: f64) -> Result<WeakSubCheck> {
    let f = p.filtration();
    f.model().check(x)?;
    let (mut excess, mut gap) = (f64::NEG_INFINITY, 0.0f64);
    for (e, z) in f.stages().iter().zip(p.values()) {
        let d = z - &e.apply(x);
        excess = excess.max(d.coords().iter().copied().fold(f64::NEG_INFINITY, f64::max));
        gap = gap.max(d.sup_norm());
    }
    let limit_gap = f.model().norm(&(p.last() - x));
    Ok(WeakSubCheck {
        holds: excess <= tolerance,
        equality: gap <= tolerance,
        max_excess: excess,
        max_gap: gap,
        limit_gap,
        limit_is_surrogate_limit: limit_gap <= tolerance,
    })
}

/// `(z_n⁺) → x⁺` in order and in norm, along the stationary continuation of
/// the trace, with the lattice identities used in the argument.
pub fn positive_part_convergence(p: &ProcessTrace, x: &Element, tolerance: f64) -> Result<ExperimentReport> {
    let f = p.filtration();
    let weak = weaksub_check(p, x, f.tolerance())?;
    if !weak.holds {
        return Err(Error::Hypothesis(format!("z_n ≤ E_n x fails (excess {:.3e})", weak.max_excess)));
    }
    let witness = f
        .witness()
        .ok_or_else(|| Error::Hypothesis("filtration carries no bistochastic witness".into()))?;
    if !f.bistochastic_for(&witness.x0, &witness.x0star)? {
        return Err(Error::Hypothesis("filtration is not bistochastic for its witness".into()));
    }
    let bound = f.stages().iter().map(|e| operator_norm(f.model(), e.matrix()).0).fold(0.0, f64::max);
    if !bound.is_finite() {
        return Err(Error::Hypothesis("filtration is not bounded".into()));
    }

    let mut report = ExperimentReport::new("positive_part");
    report.surrogate = true;
    report.scalar("filtration_bound", bound);
    report.scalar("weaksub_max_excess", weak.max_excess);
    report.scalar("limit_gap", weak.limit_gap);
    report.verdict("weaksub", weak.holds, "weaksub_max_excess");

    let xp = x.pos();
    let positive = p.stationary_family()?.map(Element::pos)?;
    let profile = order_profile(&positive, &xp, tolerance)?;
    let converged = profile.converged();
    report.profile("positive_part_order", profile);
    report.verdict("order_converged", converged, "positive_part_order");

    let model = f.model();
    let mut identity_defect = 0.0f64;
    for (n, z) in p.values().iter().enumerate() {
        let zp = z.pos();
        report.scalar(&format!("residual_{}", n + 1), model.norm(&(&zp - &xp)));
        let spread = &zp.join(&xp) - &zp.meet(&xp);
        let split = &(&zp - &xp).pos() + &xp;
        identity_defect = identity_defect
            .max((&spread - &(&zp - &xp).abs()).sup_norm())
            .max((&zp.join(&xp) - &split).sup_norm());
    }
    let final_residual = model.norm(&(&p.last().pos() - &xp));
    report.scalar("final_residual", final_residual);
    report.verdict("final_residual_zero", final_residual <= tolerance, "final_residual");
    report.scalar("identity_defect", identity_defect);
    report.verdict("identities_hold", identity_defect <= 1e-12 * (1.0 + xp.sup_norm()), "identity_defect");
    report.note("weak subsequential limits are replaced by norm limits");
    Ok(report)
}

/// Fiber of an `L1(Ω; F)` product: the model of `F`, a weak unit and a
/// strictly positive functional of `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberSpec {
    pub model: LatticeModel,
    pub unit: Option<Element>,
    pub functional: Functional,
}

impl FiberSpec {
    fn unit(&self) -> Result<&Element> {
        match &self.unit {
            Some(u) if u.dim() == self.model.dim() && is_weak_unit(u)? => Ok(u),
            _ => Err(Error::MissingWeakUnit),
        }
    }
}

fn constant_fiber(atoms: usize, v: &[f64]) -> Vec<f64> {
    (0..atoms).flat_map(|_| v.iter().copied()).collect()
}

/// Product filtration `E_t ⊗ F_t` with witness `f0 = 1 ⊗ u`, `g0 = μ ⊗ w`.
pub fn bochner_filtration(
    chain: &PartitionChain<f64>,
    fiber: &FiberSpec,
    fiber_stages: Option<&[Projection]>,
) -> Result<Filtration> {
    let unit = fiber.unit()?;
    let model = LatticeModel::product(chain.mu().to_vec(), fiber.model.clone())?;
    let atoms = chain.dim();
    let g0: Vec<f64> = chain
        .mu()
        .iter()
        .flat_map(|m| fiber.functional.weights().iter().map(move |w| m * w))
        .collect();
    let witness = Witness { x0: Element::new(constant_fiber(atoms, unit.coords())), x0star: Functional::new(g0)? };
    product_filtration(chain, &model, fiber_stages, Some(witness))
}

/// Doob experiment on `L1(Ω; F)` followed by the atomwise uo-Cauchy test in
/// `F`; the failure measure is the mass of atoms whose fiber profile fails.
pub fn bochner_experiment(
    chain: &PartitionChain<f64>,
    fiber: &FiberSpec,
    paths: &ProcessTrace,
    tolerance: f64,
) -> Result<ExperimentReport> {
    let unit = fiber.unit()?;
    let f = paths.filtration();
    let layout = f
        .model()
        .product_layout()
        .ok_or_else(|| Error::Precondition("paths do not live on a product model".into()))?;
    ensure_dim(chain.dim(), layout.atoms())?;
    ensure_dim(fiber.model.dim(), layout.fiber.dim())?;
    let witness = f.witness().cloned().unwrap_or(Witness {
        x0: Element::new(constant_fiber(chain.dim(), unit.coords())),
        x0star: Functional::new(
            chain
                .mu()
                .iter()
                .flat_map(|m| fiber.functional.weights().iter().map(move |w| m * w))
                .collect(),
        )?,
    });
    let view = ALView::new(f.model().clone(), witness.x0star, witness.x0)?;

    let mut report = ExperimentReport::new("bochner");
    report.absorb("product", doob_experiment(paths, &view, tolerance)?);

    let (mut failed, mut rejected) = (0.0, 0.0);
    for (atom, mass) in chain.mu().iter().enumerate() {
        let terms: Vec<Element> = paths
            .values()
            .iter()
            .map(|z| Element::new(layout.fiber_slice(z, atom).to_vec()))
            .collect();
        let mut family_terms = terms.clone();
        if family_terms.len() == 1 {
            family_terms.push(terms[0].clone());
        }
        let seq = SequenceFamily::new(fiber.model.clone(), family_terms)?;
        let profile = uo_cauchy_profile(&seq, unit, tolerance)?;
        if !profile.converged() {
            failed += mass;
        }
        if !fiber.model.accepts_limit(terms.last().expect("nonempty trace")) {
            rejected += mass;
        }
        report.profile(&format!("atom_{atom}"), profile);
    }
    report.scalar("atoms", chain.dim() as f64);
    report.scalar("failure_measure", failed);
    report.scalar("rejected_limit_measure", rejected);
    report.verdict("failure_measure_zero", failed == 0.0, "failure_measure");
    report.verdict("atom_limits_accepted", rejected == 0.0, "rejected_limit_measure");
    report.note("measure zero means no failing atom: every atom has positive mass");
    Ok(report)
}

/// Residuals `‖E_n x − x‖` of the closed martingale `z_n = E_n x`, and an
/// almost order boundedness certificate for the trace: with `x0` the
/// filtration's weak unit and `k` the first power of two such that
/// `ε = ‖|x| − |x| ∧ k·x0‖ ≤ ‖x‖/10`, the trace lies in `[−k·x0, k·x0]`
/// up to `bound·ε`, where `bound` is `sup_n ‖E_n‖`.
pub fn closed_martingale_experiment(f: &Filtration, x: &Element, bound: f64) -> Result<(ProcessTrace, ExperimentReport)> {
    let trace = closed_martingale(f, x)?;
    let model = f.model();
    let x0 = f.witness().map_or_else(|| model.default_unit(), |w| w.x0.clone());
    let mut report = ExperimentReport::new("closed_martingale");
    let residuals: Vec<f64> = trace.values().iter().map(|z| model.norm(&(z - x))).collect();
    for (n, r) in residuals.iter().enumerate() {
        report.scalar(&format!("residual_{}", n + 1), *r);
    }
    let last = *residuals.last().expect("a filtration has stages");
    report.scalar("final_residual", last);
    report.verdict("final_residual_zero", last == 0.0, "final_residual");
    let monotone = residuals.windows(2).all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0]));
    report.verdict("residual_monotone", monotone, "final_residual");

    let tail = |k: f64| model.norm(&(&x.abs() - &x.abs().meet(&x0.scale(k))));
    let target = model.norm(x) / 10.0;
    let k = (-30..=60).map(|j| 2f64.powi(j)).find(|&k| tail(k) <= target).unwrap_or(f64::INFINITY);
    report.scalar("aob_multiple", k);
    if k.is_finite() {
        let eps = bound * tail(k) + 1e-12;
        let cert = almost_order_bounded(model, trace.values(), &x0.scale(k), eps)?;
        report.scalar("aob_residual", cert.residual);
        report.scalar("aob_level", eps);
        report.verdict("aob_certified", cert.bounded, "aob_residual");
    } else {
        report.verdict("aob_certified", false, "aob_multiple");
    }
    Ok((trace, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::chain_to_filtration;
    use crate::gallery;
    use crate::martingale::{closed_martingale, urn, KindClaim};
    use crate::random;

    fn example_view() -> ALView {
        ALView::new(LatticeModel::c0(8).unwrap(), Functional::uniform(8), gallery::block_harmonic_unit(4)).unwrap()
    }

    #[test]
    fn doob_on_example() {
        let f = gallery::c0_averaging_filtration().unwrap();
        let p = ProcessTrace::new(f, gallery::c0_averaging_values(), KindClaim::Martingale).unwrap();
        let r = doob_experiment(&p, &example_view(), 0.15).unwrap();
        assert_eq!(r.scalars["sup_x0star_pos"], 0.5);
        let c = &r.profiles["uo_cauchy"].c;
        for (k, v) in c.iter().enumerate() {
            assert_eq!(*v, 1.0 / (2 * k + 1) as f64);
        }
        assert_eq!(r.get("uo_cauchy"), Some(true));
        assert_eq!(r.get("martingale"), Some(true));
        assert_eq!(r.get("limit_accepted"), Some(false));
        assert!(r.notes.iter().any(|n| n.contains("not uo-convergent")));
    }

    #[test]
    fn doob_refuses_without_diamond() {
        let f = gallery::c0_averaging_filtration().unwrap();
        let p = ProcessTrace::new(f, gallery::c0_averaging_values(), KindClaim::Martingale).unwrap();
        let skew = ALView::new(
            LatticeModel::c0(8).unwrap(),
            Functional::new(vec![0.2, 0.05, 0.1, 0.1, 0.1, 0.1, 0.1, 0.25]).unwrap(),
            Element::constant(8, 1.0),
        )
        .unwrap();
        assert!(matches!(doob_experiment(&p, &skew, 0.15), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn doob_constant_submartingale() {
        let f = chain_to_filtration(&PartitionChain::dyadic(2)).unwrap();
        let p = closed_martingale(&f, &Element::constant(4, 3.0)).unwrap();
        let view = ALView::new(f.model().clone(), Functional::uniform(4), Element::constant(4, 1.0)).unwrap();
        let r = doob_experiment(&p, &view, 0.01).unwrap();
        assert!(r.profiles["uo_cauchy"].c.iter().all(|&c| c == 0.0));
        assert_eq!(r.get("uo_cauchy"), Some(true));
    }

    #[test]
    fn kb_vs_c0_verdicts() {
        for h in [4, 8, 16, 32, 50, 64] {
            let r = kb_vs_c0_experiment(h, 0.25).unwrap();
            assert_eq!(r.get("c0_uo_cauchy"), Some(true), "h = {h}");
            assert_eq!(r.get("l1_uo_cauchy"), Some(true));
            assert_eq!(r.get("c0_limit_accepted"), Some(false));
            assert_eq!(r.get("c0_norm_bounded"), Some(true));
            assert_eq!(r.get("l1_norm_bounded"), Some(false));
            assert_eq!(r.get("bounded_family_uo_converges"), Some(true));
            assert_eq!(r.get("bounded_family_limit_accepted"), Some(true));
        }
        let r = kb_vs_c0_experiment(50, 0.25).unwrap();
        for (k, c) in r.profiles["c0_partial_sums"].c.iter().enumerate() {
            assert_eq!(*c, 1.0 / (k + 2) as f64);
        }
        assert!(kb_vs_c0_experiment(3, 0.25).is_err());
    }

    #[test]
    fn weaksub_examples() {
        let f = chain_to_filtration(&PartitionChain::dyadic(3)).unwrap();
        let x = random::element(&mut random::rng(3), 8, 2.0);
        let p = closed_martingale(&f, &x).unwrap();
        let w = weaksub_check(&p, &x, 1e-12).unwrap();
        assert!(w.holds && w.equality && w.limit_is_surrogate_limit);

        let run = urn::urn_experiment(4, 0.15).unwrap();
        let sub = urn::drifted(&run.trace, 0.01).unwrap();
        let w = weaksub_check(&sub, run.trace.last(), 1e-12).unwrap();
        assert!(w.holds && !w.equality);

        let bad = p.map(KindClaim::None, |n, z| if n == 1 { z + &Element::constant(8, 0.5) } else { z.clone() }).unwrap();
        assert!(!weaksub_check(&bad, &x, 1e-12).unwrap().holds);
    }

    #[test]
    fn positive_part_on_closed_martingale() {
        let f = chain_to_filtration(&PartitionChain::dyadic(4)).unwrap();
        let x = random::element(&mut random::rng(9), 16, 1.0);
        let p = closed_martingale(&f, &x).unwrap();
        let r = positive_part_convergence(&p, &x, 1e-12).unwrap();
        assert_eq!(r.get("order_converged"), Some(true));
        assert_eq!(r.scalars["final_residual"], 0.0);
        assert_eq!(r.get("identities_hold"), Some(true));
        assert!(r.surrogate);
    }

    #[test]
    fn bochner_trivial_and_four_atoms() {
        let fiber = FiberSpec {
            model: LatticeModel::ell1(3).unwrap(),
            unit: Some(Element::constant(3, 1.0)),
            functional: Functional::uniform(3),
        };
        let one = PartitionChain::new(vec![1.0], vec![vec![vec![0]], vec![vec![0]]]).unwrap();
        let f = bochner_filtration(&one, &fiber, None).unwrap();
        let p = closed_martingale(&f, &Element::new(vec![1.0, -2.0, 0.5])).unwrap();
        let r = bochner_experiment(&one, &fiber, &p, 0.01).unwrap();
        assert_eq!(r.get("failure_measure_zero"), Some(true));

        let fiber4 = FiberSpec {
            model: LatticeModel::ell1(4).unwrap(),
            unit: Some(Element::constant(4, 1.0)),
            functional: Functional::uniform(4),
        };
        let chain = PartitionChain::new(
            vec![0.25; 4],
            vec![
                vec![vec![0, 1, 2, 3]],
                vec![vec![0, 1], vec![2, 3]],
                vec![vec![0], vec![1], vec![2], vec![3]],
                vec![vec![0], vec![1], vec![2], vec![3]],
            ],
        )
        .unwrap();
        let f = bochner_filtration(&chain, &fiber4, None).unwrap();
        let x = random::element(&mut random::rng(1), 16, 1.0);
        let p = closed_martingale(&f, &x).unwrap();
        let r = bochner_experiment(&chain, &fiber4, &p, 1e-9).unwrap();
        assert_eq!(r.get("failure_measure_zero"), Some(true));
        assert_eq!(r.get("product.uo_cauchy"), Some(true));
        assert_eq!(r.scalars["failure_measure"], 0.0);
    }

    #[test]
    fn bochner_requires_fiber_unit() {
        let fiber = FiberSpec { model: LatticeModel::ell1(2).unwrap(), unit: None, functional: Functional::uniform(2) };
        let chain = PartitionChain::new(vec![1.0], vec![vec![vec![0]]]).unwrap();
        assert!(matches!(bochner_filtration(&chain, &fiber, None), Err(Error::MissingWeakUnit)));
        let fiber = FiberSpec { unit: Some(Element::new(vec![1.0, 0.0])), ..fiber };
        assert!(matches!(bochner_filtration(&chain, &fiber, None), Err(Error::MissingWeakUnit)));
    }

    #[test]
    fn bochner_example_fiber() {
        let chain = PartitionChain::new(
            vec![0.5, 0.5],
            vec![
                vec![vec![0, 1]],
                vec![vec![0], vec![1]],
                vec![vec![0], vec![1]],
                vec![vec![0], vec![1]],
                vec![vec![0], vec![1]],
            ],
        )
        .unwrap();
        let fiber = FiberSpec {
            model: LatticeModel::c0(8).unwrap(),
            unit: Some(gallery::block_harmonic_unit(4)),
            functional: Functional::uniform(8),
        };
        let ex = gallery::c0_averaging_filtration().unwrap();
        let f = bochner_filtration(&chain, &fiber, Some(ex.stages())).unwrap();
        let alt = gallery::alternating(8);
        let x = Element::new(alt.coords().iter().chain(alt.scale(-1.0).coords()).copied().collect());
        let p = closed_martingale(&f, &x).unwrap();
        let r = bochner_experiment(&chain, &fiber, &p, 0.15).unwrap();
        assert_eq!(r.get("failure_measure_zero"), Some(true));
        assert_eq!(r.get("atom_limits_accepted"), Some(false));
        assert_eq!(r.scalars["rejected_limit_measure"], 1.0);
    }
}
