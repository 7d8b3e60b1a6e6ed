//! Pólya urn started with one red and one blue ball, realized on path space.
//!
//! Atom `p ∈ 0..2^D` is the draw sequence whose `k`-th draw (1-based) is red
//! when bit `D − k` of `p` is set, so the first draw is the most significant
//! bit and stage `t` groups paths by their first `t` draws into contiguous
//! blocks.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::filtration::{chain_to_filtration, PartitionChain};
use crate::lattice::{Element, Functional};
use crate::martingale::{closed_martingale, doob_experiment, ExperimentReport, KindClaim, ProcessTrace};
use crate::representation::ALView;
use crate::scalar::{ratio, Scalar};

/// Largest depth enumerated by the oracle.
pub const MAX_DEPTH: u32 = 12;

/// Exact path distribution and red fractions `z_t = (1 + reds_t)/(2 + t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct UrnOracle {
    pub depth: u32,
    pub mu: Vec<BigRational>,
    /// `z[t−1][p]` for stages `t = 1..=depth`.
    pub z: Vec<Vec<BigRational>>,
}

fn red(depth: u32, path: usize, draw: u32) -> bool {
    (path >> (depth - draw)) & 1 == 1
}

/// Enumerates all `2^depth` draw sequences in exact arithmetic.
pub fn urn_oracle(depth: u32) -> Result<UrnOracle> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::Precondition(format!("urn depth {depth} outside 1..={MAX_DEPTH}")));
    }
    let n = 1usize << depth;
    let mut mu = Vec::with_capacity(n);
    let mut z = vec![Vec::with_capacity(n); depth as usize];
    for p in 0..n {
        let mut prob = BigRational::one();
        let mut reds = 0i64;
        for k in 1..=depth {
            let balls = 2 + (k as i64 - 1);
            if red(depth, p, k) {
                prob *= ratio(1 + reds, balls);
                reds += 1;
            } else {
                prob *= ratio(1 + (k as i64 - 1 - reds), balls);
            }
            z[k as usize - 1].push(ratio(1 + reds, 2 + k as i64));
        }
        mu.push(prob);
    }
    Ok(UrnOracle { depth, mu, z })
}

impl UrnOracle {
    /// `sup_t Σ_p μ_p z_t(p)⁺`.
    pub fn sup_expected_positive(&self) -> BigRational {
        self.z
            .iter()
            .map(|zt| {
                zt.iter().zip(&self.mu).fold(BigRational::zero(), |acc, (z, m)| {
                    let pos = if z.is_positive() { z.clone() } else { BigRational::zero() };
                    acc + pos * m
                })
            })
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn total_mass(&self) -> BigRational {
        self.mu.iter().fold(BigRational::zero(), |acc, m| acc + m)
    }

    /// `z_T = z_D`, the final fraction per path.
    pub fn last(&self) -> &[BigRational] {
        self.z.last().expect("depth is at least 1")
    }
}

/// Chain whose stage `t` separates paths by their first `t` draws, `t = 1..=depth`.
pub fn urn_chain(depth: u32, mu: Vec<f64>) -> Result<PartitionChain<f64>> {
    let n = 1usize << depth;
    let partitions = (1..=depth)
        .map(|t| {
            let size = 1usize << (depth - t);
            (0..n / size).map(|b| (b * size..(b + 1) * size).collect()).collect()
        })
        .collect();
    PartitionChain::new(mu, partitions)
}

/// Final red fraction per path, computed directly in floating point.
pub fn final_fraction(depth: u32) -> Element {
    let n = 1usize << depth;
    Element::new((0..n).map(|p| (1 + p.count_ones()) as f64 / (2 + depth) as f64).collect())
}

pub struct UrnRun {
    pub oracle: UrnOracle,
    pub trace: ProcessTrace,
    pub view: ALView,
    pub report: ExperimentReport,
}

/// Builds the proportion martingale `z_t = E_t z_D` on path space and runs the
/// Doob experiment with `x0 = 1` and `x0* = μ`, comparing every value with
/// the exact oracle.
pub fn urn_experiment(depth: u32, tolerance: f64) -> Result<UrnRun> {
    let oracle = urn_oracle(depth)?;
    let mu: Vec<f64> = oracle.mu.iter().map(Scalar::to_f64).collect();
    let chain = urn_chain(depth, mu.clone())?;
    let filtration = chain_to_filtration(&chain)?;
    let trace = closed_martingale(&filtration, &final_fraction(depth))?;
    let view = ALView::new(filtration.model().clone(), Functional::new(mu)?, Element::constant(1 << depth, 1.0))?;

    let deviation = trace
        .values()
        .iter()
        .zip(&oracle.z)
        .flat_map(|(v, zt)| v.coords().iter().zip(zt).map(|(a, b)| (a - b.to_f64()).abs()))
        .fold(0.0, f64::max);
    let bound = oracle.sup_expected_positive();

    let mut report = ExperimentReport::new(format!("polya_urn_depth_{depth}"));
    report.absorb("doob", doob_experiment(&trace, &view, tolerance)?);
    report.scalar("oracle_max_deviation", deviation);
    report.verdict("oracle_agrees", deviation <= 1e-12, "oracle_max_deviation");
    report.scalar("oracle_sup_x0star_pos", bound.to_f64());
    report.verdict("oracle_bound_at_most_one", bound <= BigRational::one(), "oracle_sup_x0star_pos");
    report.scalar("oracle_total_mass", oracle.total_mass().to_f64());
    report.verdict("oracle_mass_exact", oracle.total_mass() == BigRational::one(), "oracle_total_mass");
    report.note(format!("{} paths enumerated exactly", 1usize << depth));
    Ok(UrnRun { oracle, trace, view, report })
}

/// `z_n − δ(T − n)·1`, a submartingale below the proportion martingale.
pub fn drifted(trace: &ProcessTrace, delta: f64) -> Result<ProcessTrace> {
    let t = trace.len();
    trace.map(KindClaim::Submartingale, |n, z| z.map(|v| v - delta * (t - 1 - n) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::verify_process;

    #[test]
    fn oracle_small_depth() {
        let o = urn_oracle(2).unwrap();
        // paths bb, br, rb, rr: 1/2·2/3, 1/2·1/3, 1/2·1/3, 1/2·2/3
        assert_eq!(o.mu, vec![ratio(1, 3), ratio(1, 6), ratio(1, 6), ratio(1, 3)]);
        assert_eq!(o.z[0], vec![ratio(1, 3), ratio(1, 3), ratio(2, 3), ratio(2, 3)]);
        assert_eq!(o.z[1], vec![ratio(1, 4), ratio(2, 4), ratio(2, 4), ratio(3, 4)]);
        assert_eq!(o.sup_expected_positive(), ratio(1, 2));
        assert!(urn_oracle(0).is_err() && urn_oracle(13).is_err());
    }

    #[test]
    fn oracle_is_a_martingale_exactly() {
        let o = urn_oracle(5).unwrap();
        // E[z_{t+1} | first t draws] = z_t, checked block by block
        for t in 1..5usize {
            let size = 1usize << (5 - t);
            for b in 0..(32 / size) {
                let block = b * size..(b + 1) * size;
                let mass = block.clone().fold(BigRational::zero(), |a, p| a + &o.mu[p]);
                let next = block.clone().fold(BigRational::zero(), |a, p| a + &o.mu[p] * &o.z[t][p]);
                assert_eq!(next / mass, o.z[t - 1][b * size]);
            }
        }
    }

    #[test]
    fn experiment_matches_oracle() {
        let run = urn_experiment(6, 0.15).unwrap();
        assert_eq!(run.report.get("oracle_agrees"), Some(true));
        assert_eq!(run.report.get("oracle_bound_at_most_one"), Some(true));
        assert!(verify_process(&run.trace, 1e-12).is_martingale);
        let sub = drifted(&run.trace, 0.01).unwrap();
        let c = verify_process(&sub, 1e-12);
        assert!(c.is_submartingale && !c.is_martingale);
    }
}
