//! The counterexample gallery: 2×2 averaging filtration on `c0`, partial
//! sums in `c0`, dyadic closed martingales.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::filtration::{Filtration, PartitionChain, Projection, ProjectionKind, Witness};
use crate::lattice::{Element, Functional, LatticeModel};
use crate::matrix::Matrix;
use crate::scalar::{int, ratio, Scalar};

/// Dimension of the averaging example.
pub const EXAMPLE_DIM: usize = 8;

/// Stage `n` (0-based) of the averaging filtration on `2·blocks` coordinates:
/// identity on the first `n` diagonal blocks, `[[½, ½], [½, ½]]` on the rest.
/// There are `blocks + 1` stages, the last one the identity.
pub fn averaging_stage<W: Scalar>(blocks: usize, n: usize) -> Matrix<W> {
    let dim = 2 * blocks;
    let half = W::one() / (W::one() + W::one());
    let mut m = Matrix::zeros(dim, dim);
    for b in 0..blocks {
        let (i, j) = (2 * b, 2 * b + 1);
        if b < n {
            m.set(i, i, W::one());
            m.set(j, j, W::one());
        } else {
            for (r, c) in [(i, i), (i, j), (j, i), (j, j)] {
                m.set(r, c, half.clone());
            }
        }
    }
    m
}

pub fn averaging_stages<W: Scalar>(blocks: usize) -> Vec<Matrix<W>> {
    (0..=blocks).map(|n| averaging_stage(blocks, n)).collect()
}

/// `x_n = (1, −1, …, 1, −1, 0, …)` with `2n − 2` leading coordinates, `n = 1..=blocks+1`.
pub fn alternating_values<W: Scalar + std::ops::Neg<Output = W>>(blocks: usize) -> Vec<Vec<W>> {
    (0..=blocks)
        .map(|n| {
            (0..2 * blocks)
                .map(|i| {
                    if i >= 2 * n {
                        W::zero()
                    } else if i % 2 == 0 {
                        W::one()
                    } else {
                        -W::one()
                    }
                })
                .collect()
        })
        .collect()
}

/// Weak unit constant on each block, `1/(2b+1)` on block `b`. It is fixed by
/// every stage, and `(1/(2k−1))_k` is its uo-Cauchy rate along the example.
pub fn block_harmonic_unit(blocks: usize) -> Element {
    Element::new((0..2 * blocks).map(|i| 1.0 / (2 * (i / 2) + 1) as f64).collect())
}

pub fn block_harmonic_unit_exact(blocks: usize) -> Vec<BigRational> {
    (0..2 * blocks).map(|i| ratio(1, 2 * (i / 2) as i64 + 1)).collect()
}

/// The averaging filtration in the `c0` truncation, with witness
/// (all-ones, uniform functional).
pub fn c0_averaging_filtration() -> Result<Filtration> {
    averaging_filtration(EXAMPLE_DIM / 2)
}

pub fn averaging_filtration(blocks: usize) -> Result<Filtration> {
    let dim = 2 * blocks;
    let stages = averaging_stages::<f64>(blocks)
        .into_iter()
        .map(|m| Projection::new(m, ProjectionKind::GeneralPositive))
        .collect::<Result<Vec<_>>>()?;
    let witness = Witness { x0: Element::constant(dim, 1.0), x0star: Functional::uniform(dim) };
    Filtration::new(LatticeModel::c0(dim)?, stages, Some(witness))
}

pub fn c0_averaging_values() -> Vec<Element> {
    alternating_values::<f64>(EXAMPLE_DIM / 2).into_iter().map(Element::new).collect()
}

/// Exact stages and values of the averaging example.
pub fn c0_averaging_exact() -> (Vec<Matrix<BigRational>>, Vec<Vec<BigRational>>) {
    (averaging_stages(EXAMPLE_DIM / 2), alternating_values(EXAMPLE_DIM / 2))
}

/// `x = (1, −1, 1, −1, …)`, generator of the example's closed martingale.
pub fn alternating(dim: usize) -> Element {
    Element::new((0..dim).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect())
}

/// Exact uniform functional `1/dim`.
pub fn uniform_exact(dim: usize) -> Vec<BigRational> {
    vec![ratio(1, dim as i64); dim]
}

/// Exact dyadic chain on `2^depth` uniform atoms.
pub fn dyadic_exact(depth: u32) -> Result<PartitionChain<BigRational>> {
    let n = 1usize << depth;
    let chain = PartitionChain::dyadic(depth);
    PartitionChain::new(vec![ratio(1, n as i64); n], chain.partitions().to_vec())
}

pub fn is_zero_vec(v: &[BigRational]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn ones_exact(dim: usize) -> Vec<BigRational> {
    vec![BigRational::one(); dim]
}

pub fn integer_exact(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&k| int(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::{exact_tower, validate_filtration};
    use crate::martingale::exact_martingale;

    #[test]
    fn example_stages_shape() {
        let s = averaging_stages::<f64>(4);
        assert_eq!(s.len(), 5);
        assert_eq!(*s[0].get(0, 1), 0.5);
        assert_eq!(*s[1].get(0, 1), 0.0);
        assert_eq!(*s[1].get(2, 3), 0.5);
        assert_eq!(s[4], Matrix::identity(8));
        let v = c0_averaging_values();
        assert_eq!(v[0], Element::zeros(8));
        assert_eq!(v[2].coords(), &[1.0, -1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn example_validates() {
        let f = c0_averaging_filtration().unwrap();
        let r = validate_filtration(&f).unwrap();
        assert!(r.compatible && r.bistochastic);
        assert_eq!(r.max_compatibility_defect, 0.0);
        assert_eq!(r.bounded_const, 1.0);
        let unit = block_harmonic_unit(4);
        assert!(f.bistochastic_for(&unit, &Functional::uniform(8)).unwrap());
    }

    #[test]
    fn example_identities_exact() {
        let (stages, values) = c0_averaging_exact();
        assert!(exact_tower(&stages));
        assert!(exact_martingale(&stages, &values).unwrap());
        let ones = ones_exact(8);
        let w = uniform_exact(8);
        assert_eq!(stages[0].apply(&ones), ones);
        assert_eq!(stages[0].apply_transpose(&w), w);
        let u = block_harmonic_unit_exact(4);
        assert_eq!(stages[0].apply(&u), u);
    }
}
