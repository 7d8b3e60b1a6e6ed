//! Adapted processes over filtrations and the Doob-type experiments.

pub mod experiments;
pub mod report;
pub mod urn;

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::convergence::SequenceFamily;
use crate::error::{ensure_dim, Error, Result};
use crate::filtration::Filtration;
use crate::lattice::Element;
use crate::matrix::Matrix;
use crate::par::Strategy;
use crate::scalar::Scalar;

pub use experiments::{
    bochner_experiment, bochner_filtration, closed_martingale_experiment, doob_experiment, kb_vs_c0_experiment, positive_part_convergence, weaksub_check, FiberSpec,
    WeakSubCheck,
};
pub use report::{write_summary_csv, ExperimentReport, VerdictEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindClaim {
    Martingale,
    Submartingale,
    None,
}

/// Values `z_1..z_T` aligned with the stages `E_1..E_T` of a filtration.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessTrace {
    filtration: Filtration,
    values: Vec<Element>,
    kind_claim: KindClaim,
}

impl ProcessTrace {
    pub fn new(filtration: Filtration, values: Vec<Element>, kind_claim: KindClaim) -> Result<Self> {
        if values.len() != filtration.len() {
            return Err(Error::Structure(format!(
                "{} values for {} stages",
                values.len(),
                filtration.len()
            )));
        }
        for v in &values {
            filtration.model().check(v)?;
        }
        Ok(ProcessTrace { filtration, values, kind_claim })
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn values(&self) -> &[Element] {
        &self.values
    }

    pub fn kind_claim(&self) -> KindClaim {
        self.kind_claim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> &Element {
        self.values.last().expect("a filtration has at least one stage")
    }

    /// The values as a sequence family, repeating the final value when the
    /// trace has a single stage.
    pub fn family(&self) -> Result<SequenceFamily> {
        let mut terms = self.values.clone();
        if terms.len() == 1 {
            terms.push(terms[0].clone());
        }
        SequenceFamily::new(self.filtration.model().clone(), terms)
    }

    /// The trace followed by a repeat of its last value, the stationary
    /// continuation `E_n = E_T` for `n > T` of a finite filtration.
    pub fn stationary_family(&self) -> Result<SequenceFamily> {
        let mut terms = self.values.clone();
        terms.push(self.last().clone());
        SequenceFamily::new(self.filtration.model().clone(), terms)
    }

    /// `z_n ↦ f(n, z_n)` over the same filtration.
    pub fn map(&self, kind_claim: KindClaim, f: impl Fn(usize, &Element) -> Element) -> Result<ProcessTrace> {
        let values = self.values.iter().enumerate().map(|(n, z)| f(n, z)).collect();
        ProcessTrace::new(self.filtration.clone(), values, kind_claim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessCheck {
    pub is_martingale: bool,
    pub is_submartingale: bool,
    /// `E_n z_n = z_n` for every `n`.
    pub adapted: bool,
    /// Largest `‖E_n z_m − z_n‖_sup` over `m ≥ n`.
    pub max_violation: f64,
    /// Largest negative part of `E_n z_m − z_n`, in sup norm.
    pub max_sub_violation: f64,
    pub max_range_defect: f64,
}

/// Checks `E_n z_m = z_n` (martingale) and `E_n z_m ≥ z_n` (submartingale) for
/// every pair `m ≥ n`, together with the range condition `E_n z_n = z_n`.
pub fn verify_process(p: &ProcessTrace, tolerance: f64) -> ProcessCheck {
    let t = p.len();
    let per_stage = Strategy::default().map_range(t, |n| {
        let e = p.filtration.stage(n);
        let mut dev = 0.0f64;
        let mut sub = 0.0f64;
        let mut range = 0.0f64;
        for m in n..t {
            let d = &e.apply(&p.values[m]) - &p.values[n];
            let size = d.sup_norm();
            if m == n {
                range = size;
            }
            dev = dev.max(size);
            sub = sub.max(0.0 - d.min_coord());
        }
        (dev, sub, range)
    });
    let max_violation = per_stage.iter().map(|s| s.0).fold(0.0, f64::max);
    let max_sub = per_stage.iter().map(|s| s.1).fold(0.0, f64::max);
    let max_range = per_stage.iter().map(|s| s.2).fold(0.0, f64::max);
    let adapted = max_range <= tolerance;
    ProcessCheck {
        is_martingale: adapted && max_violation <= tolerance,
        is_submartingale: adapted && max_sub <= tolerance,
        adapted,
        max_violation,
        max_sub_violation: max_sub,
        max_range_defect: max_range,
    }
}

/// `z_n = E_n x`.
pub fn closed_martingale(f: &Filtration, x: &Element) -> Result<ProcessTrace> {
    f.model().check(x)?;
    let values = Strategy::default().map(f.stages(), |e| e.apply(x));
    ProcessTrace::new(f.clone(), values, KindClaim::Martingale)
}

/// Exact martingale identities `E_n z_m = z_n` for all `m ≥ n`.
pub fn exact_martingale<W>(stages: &[Matrix<W>], values: &[Vec<W>]) -> Result<bool>
where
    W: Scalar + PartialEq,
    for<'a> &'a W: Mul<&'a W, Output = W>,
    W: Add<Output = W>,
{
    ensure_dim(stages.len(), values.len())?;
    Ok((0..stages.len()).all(|n| (n..stages.len()).all(|m| stages[n].apply(&values[m]) == values[n])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{chain_to_filtration, PartitionChain};
    use crate::gallery;

    #[test]
    fn closed_martingale_is_martingale() {
        let f = chain_to_filtration(&PartitionChain::dyadic(3)).unwrap();
        let x = Element::new(vec![1.0, 0.0, 3.0, -2.0, 5.0, 5.0, 0.5, 1.5]);
        let p = closed_martingale(&f, &x).unwrap();
        let c = verify_process(&p, 1e-12);
        assert!(c.is_martingale && c.is_submartingale);
        assert_eq!(c.max_violation, 0.0);
        assert_eq!(p.values()[0], Element::constant(8, 1.75));
        assert_eq!(p.last(), &x);
    }

    #[test]
    fn fixed_vector_gives_constant_trace() {
        let f = chain_to_filtration(&PartitionChain::dyadic(2)).unwrap();
        let p = closed_martingale(&f, &Element::constant(4, 2.0)).unwrap();
        assert!(p.values().iter().all(|v| *v == Element::constant(4, 2.0)));
    }

    #[test]
    fn example_martingale_and_submartingale() {
        let f = gallery::c0_averaging_filtration().unwrap();
        let p = ProcessTrace::new(f.clone(), gallery::c0_averaging_values(), KindClaim::Martingale).unwrap();
        let c = verify_process(&p, 1e-12);
        assert!(c.is_martingale);
        assert_eq!(c.max_violation, 0.0);

        // add (n−1)·v with v = all-ones, fixed by every stage
        let sub = p.map(KindClaim::Submartingale, |n, z| z + &Element::constant(8, 0.1 * n as f64)).unwrap();
        let c = verify_process(&sub, 1e-12);
        assert!(c.is_submartingale && !c.is_martingale);
        assert!((c.max_violation - 0.4).abs() < 1e-12);
    }

    #[test]
    fn misaligned_and_unadapted() {
        let f = chain_to_filtration(&PartitionChain::dyadic(1)).unwrap();
        assert!(matches!(
            ProcessTrace::new(f.clone(), vec![Element::zeros(2)], KindClaim::None),
            Err(Error::Structure(_))
        ));
        // z_1 = (1, 0) is not constant, so it is not in the range of E_1
        let p = ProcessTrace::new(f, vec![Element::new(vec![1.0, 0.0]), Element::new(vec![1.0, 0.0])], KindClaim::None)
            .unwrap();
        let c = verify_process(&p, 1e-12);
        assert!(!c.adapted && !c.is_submartingale);
    }
}
