//! Seeded instance generators shared by tests, suites and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num_rational::BigRational;

use crate::filtration::PartitionChain;
use crate::lattice::{Element, LatticeModel};
use crate::matrix::Matrix;
use crate::scalar::ratio;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for job `index` of a batch seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Coordinates uniform in `[-scale, scale]`.
pub fn element(rng: &mut impl Rng, dim: usize, scale: f64) -> Element {
    Element::new((0..dim).map(|_| rng.gen_range(-scale..=scale)).collect())
}

/// Coordinates uniform in `[0, scale]`.
pub fn positive_element(rng: &mut impl Rng, dim: usize, scale: f64) -> Element {
    Element::new((0..dim).map(|_| rng.gen_range(0.0..=scale)).collect())
}

/// Integer coordinates in `[-bound, bound]`, with a fair share of exact zeros.
pub fn integer_element(rng: &mut impl Rng, dim: usize, bound: i32) -> Element {
    Element::new(
        (0..dim)
            .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-bound..=bound) as f64 })
            .collect(),
    )
}

/// Strictly positive weights in `[lo, hi]`.
pub fn weights(rng: &mut impl Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// A random set partition of `0..dim` into at most `max_blocks` nonempty blocks,
/// blocks sorted by their smallest atom.
pub fn partition(rng: &mut impl Rng, dim: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    let blocks = rng.gen_range(1..=max_blocks.clamp(1, dim));
    let mut atoms: Vec<usize> = (0..dim).collect();
    atoms.shuffle(rng);
    let mut out = vec![Vec::new(); blocks];
    for (k, a) in atoms.into_iter().enumerate() {
        // the first `blocks` atoms seed every block
        let b = if k < blocks { k } else { rng.gen_range(0..blocks) };
        out[b].push(a);
    }
    for b in &mut out {
        b.sort_unstable();
    }
    out.sort();
    out
}

/// Refines each block of `coarse` by splitting it at random.
pub fn refine(rng: &mut impl Rng, coarse: &[Vec<usize>], max_split: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for block in coarse {
        let sub = partition(rng, block.len(), max_split);
        out.extend(sub.into_iter().map(|b| b.into_iter().map(|k| block[k]).collect::<Vec<_>>()));
    }
    out.sort();
    out
}

/// Model kinds cycled through by the batch suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    L1,
    Lp,
    Sup,
    C0,
    Product,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [ModelKind::L1, ModelKind::Lp, ModelKind::Sup, ModelKind::C0, ModelKind::Product];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::L1 => "l1",
            ModelKind::Lp => "lp",
            ModelKind::Sup => "sup",
            ModelKind::C0 => "c0",
            ModelKind::Product => "product",
        }
    }
}

/// A model of the given kind with dimension in `2..=max_dim` (products use
/// 2 to 4 atoms over a fiber of dimension 2 to 4).
pub fn model(rng: &mut impl Rng, kind: ModelKind, max_dim: usize) -> LatticeModel {
    let dim = rng.gen_range(2..=max_dim.max(2));
    let built = match kind {
        ModelKind::L1 => LatticeModel::l1(weights(rng, dim, 0.1, 2.0)),
        ModelKind::Lp => LatticeModel::lp(dim, *[1.5, 2.0, 3.0].choose(rng).expect("nonempty")),
        ModelKind::Sup => LatticeModel::ell_infinity(dim),
        ModelKind::C0 => LatticeModel::c0(dim),
        ModelKind::Product => {
            let atoms = rng.gen_range(2..=4);
            let fiber_dim = rng.gen_range(2..=4);
            let mu = weights(rng, atoms, 0.1, 1.0);
            let total: f64 = mu.iter().sum();
            let fiber = if rng.gen_bool(0.5) { LatticeModel::ell1(fiber_dim) } else { LatticeModel::c0(fiber_dim) };
            fiber.and_then(|f| LatticeModel::product(mu.iter().map(|m| m / total).collect(), f))
        }
    };
    built.expect("generated model parameters are valid")
}

/// Random positive projection `Σ_k u_k v_kᵀ` on `dim` atoms.
///
/// The `u_k` live on disjoint supports `S_k`, the `v_k` on `S_k` together
/// with the atoms left uncovered, and `v_k · u_k = 1`, so the sum is
/// idempotent. Zeros are planted at random so that zero rows and zero
/// columns both occur.
pub fn projection(rng: &mut impl Rng, dim: usize) -> Matrix<f64> {
    let covered_count = if rng.gen_bool(0.3) { rng.gen_range(1..=dim) } else { dim };
    let mut atoms: Vec<usize> = (0..dim).collect();
    atoms.shuffle(rng);
    let (covered, uncovered) = atoms.split_at(covered_count);
    let blocks = partition(rng, covered.len(), covered.len());
    let mut m = Matrix::zeros(dim, dim);
    for block in blocks {
        let support: Vec<usize> = block.iter().map(|&k| covered[k]).collect();
        let mut u: Vec<f64> = support.iter().map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(0.1..1.0) }).collect();
        if u.iter().all(|&v| v == 0.0) {
            u[0] = rng.gen_range(0.1..1.0);
        }
        let mut v: Vec<(usize, f64)> = support
            .iter()
            .chain(uncovered)
            .map(|&a| (a, if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.1..1.0) }))
            .collect();
        let pivot = u.iter().position(|&x| x > 0.0).expect("u has a positive entry");
        if v[pivot].1 == 0.0 {
            v[pivot].1 = rng.gen_range(0.1..1.0);
        }
        let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b.1).sum();
        for (i, &a) in support.iter().enumerate() {
            for &(b, vb) in &v {
                m.set(a, b, u[i] * vb / dot);
            }
        }
    }
    m
}

/// Atom masses `n_i / N` with `n_i ∈ 1..=9`.
pub fn rational_masses(rng: &mut impl Rng, dim: usize) -> Vec<BigRational> {
    let counts: Vec<i64> = (0..dim).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = counts.iter().sum();
    counts.into_iter().map(|c| ratio(c, total)).collect()
}

/// Random refining chain of 1 to 4 partitions on `1..=max_dim` atoms.
pub fn rational_chain(rng: &mut impl Rng, max_dim: usize) -> PartitionChain<BigRational> {
    let dim = rng.gen_range(1..=max_dim);
    let stages = rng.gen_range(1..=4);
    let mut partitions = vec![partition(rng, dim, 3)];
    for _ in 1..stages {
        let next = refine(rng, partitions.last().expect("nonempty"), 4);
        partitions.push(next);
    }
    PartitionChain::new(rational_masses(rng, dim), partitions).expect("generated chain is valid")
}
