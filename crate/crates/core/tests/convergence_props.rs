use proptest::prelude::*;

use uolab::convergence::{
    almost_order_bounded, classify, dominated, order_cauchy_profile, order_profile, uo_cauchy_profile, uo_profile,
    SequenceFamily, Verdict,
};
use uolab::lattice::{Element, LatticeModel};
use uolab::martingale::kb_vs_c0_experiment;

const HORIZON: usize = 24;

/// `x_n = limit + 2⁻ⁿ d_n` with bounded perturbations `d_n`.
fn converging(dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
    (
        prop::collection::vec(-5.0f64..5.0, dim),
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), HORIZON),
    )
}

fn family(limit: &[f64], noise: &[Vec<f64>]) -> SequenceFamily {
    let terms = noise
        .iter()
        .enumerate()
        .map(|(n, d)| Element::new(limit.iter().zip(d).map(|(l, e)| l + e * 0.5f64.powi(n as i32)).collect()))
        .collect();
    SequenceFamily::new(LatticeModel::ell1(limit.len()).unwrap(), terms).unwrap()
}

type Setup = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>, Vec<f64>, f64, f64);

fn setup() -> impl Strategy<Value = Setup> {
    (1usize..6).prop_flat_map(|d| {
        (converging(d), converging(d), prop::collection::vec(0.05f64..2.0, d), -3.0f64..3.0, -3.0f64..3.0)
            .prop_map(|((lx, nx), (ly, ny), u, a, b)| (lx, nx, ly, ny, u, a, b))
    })
}

proptest! {
    #[test]
    fn uo_limits_are_linear((lx, nx, ly, ny, u, a, b) in setup()) {
        let (x, y) = (family(&lx, &nx), family(&ly, &ny));
        let unit = Element::new(u);
        let combo = SequenceFamily::new(
            x.model().clone(),
            x.terms().iter().zip(y.terms()).map(|(p, q)| &p.scale(a) + &q.scale(b)).collect(),
        ).unwrap();
        let limit = Element::new(lx.iter().zip(&ly).map(|(p, q)| a * p + b * q).collect());
        let px = uo_profile(&x, &Element::new(lx.clone()), &unit, 1e-3).unwrap();
        let py = uo_profile(&y, &Element::new(ly.clone()), &unit, 1e-3).unwrap();
        let pc = uo_profile(&combo, &limit, &unit, 1e-3).unwrap();
        prop_assert!(px.converged() && py.converged() && pc.converged());
        // (s + t) ∧ u ≤ s ∧ u + t ∧ u and (λs) ∧ u ≤ max(1, λ)(s ∧ u)
        let bound: Vec<f64> = px.c.iter().zip(&py.c).map(|(p, q)| a.abs().max(1.0) * p + b.abs().max(1.0) * q).collect();
        prop_assert!(pc.c.iter().zip(&bound).all(|(c, m)| *c <= m + 1e-9));
    }

    #[test]
    fn profiles_are_nonincreasing_and_ordered((lx, nx, _, _, u, _, _) in setup()) {
        let x = family(&lx, &nx);
        let unit = Element::new(u);
        let order = order_profile(&x, &Element::new(lx), 1e-3).unwrap();
        let cauchy = uo_cauchy_profile(&x, &unit, 1e-3).unwrap();
        let order_cauchy = order_cauchy_profile(&x, 1e-3).unwrap();
        for p in [&order, &cauchy, &order_cauchy] {
            prop_assert!(p.c.windows(2).all(|w| w[1] <= w[0]));
        }
        // truncating by the unit only lowers the Cauchy profile, and the
        // Cauchy spread is at most twice the distance to the limit
        prop_assert!(dominated(&cauchy, &order_cauchy, 1.0, 0.0));
        prop_assert!(dominated(&order_cauchy, &order, 2.0, 1e-12));
    }

    #[test]
    fn verdicts_follow_the_profile(c in prop::collection::vec(0.0f64..1.0, 2..40), tol in 0.01f64..0.5) {
        let mut c = c;
        c.sort_by(|a, b| b.total_cmp(a));
        let v = classify(&c, tol);
        let last = *c.last().unwrap();
        prop_assert_eq!(v == Verdict::Converged, last <= tol && (last < c[0] || c[0] <= tol));
    }

    #[test]
    fn aob_certificates_are_monotone_in_the_level(
        set in prop::collection::vec(prop::collection::vec(-4.0f64..4.0, 5), 1..10),
        level in 0.0f64..4.0,
    ) {
        let model = LatticeModel::ell1(5).unwrap();
        let set: Vec<Element> = set.into_iter().map(Element::new).collect();
        let low = almost_order_bounded(&model, &set, &Element::constant(5, level), 0.0).unwrap();
        let high = almost_order_bounded(&model, &set, &Element::constant(5, level + 1.0), 0.0).unwrap();
        prop_assert!(high.residual <= low.residual);
        let top = almost_order_bounded(&model, &set, &Element::constant(5, 4.0), 0.0).unwrap();
        prop_assert!(top.bounded && top.residual == 0.0);
    }
}

#[test]
fn kb_verdicts_do_not_depend_on_the_horizon() {
    let reports: Vec<_> = [8, 16, 32, 64].into_iter().map(|h| kb_vs_c0_experiment(h, 0.25).unwrap()).collect();
    let verdicts = |i: usize| reports[i].verdicts.iter().map(|(k, v)| (k.clone(), v.value)).collect::<Vec<_>>();
    for i in 1..reports.len() {
        assert_eq!(verdicts(0), verdicts(i), "horizon index {i}");
    }
    assert_eq!(reports[0].get("l1_norm_bounded"), Some(false));
    assert_eq!(reports[0].get("c0_limit_accepted"), Some(false));
    assert_eq!(reports[0].get("l1_uo_cauchy"), Some(true));
    assert_eq!(reports[0].get("bounded_family_uo_converges"), Some(true));
}

#[test]
fn partial_sums_profile_is_harmonic_in_both_models() {
    let dim = 40;
    for model in [LatticeModel::ell1(dim).unwrap(), LatticeModel::c0(dim).unwrap()] {
        let seq = SequenceFamily::partial_sums(model, dim).unwrap();
        let p = uo_cauchy_profile(&seq, &Element::harmonic(dim), 0.25).unwrap();
        for (k, c) in p.c.iter().enumerate() {
            assert_eq!(*c, 1.0 / (k + 2) as f64);
        }
    }
}
