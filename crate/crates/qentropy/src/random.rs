//! Seeded random generation of the objects the checkers consume.
//!
//! The generator is pinned so results are reproducible across runs and
//! platforms: a ChaCha8 stream keyed by a 64-bit seed, uniform doubles
//! taken from the top 53 bits of each draw, and Gaussians produced by the
//! Marsaglia polar method.  Identical `(seed, parameters)` always yield
//! identical bytes.  Independent objects inside one construction derive
//! their own sub-seeds through [`trial_seed`], so adding a draw never
//! shifts its siblings.

use rand_core::{RngCore, SeedableRng};

use crate::channel::KrausChannel;
use crate::entropy::{Ensemble, ProbDist, StochasticMatrix};
use crate::tensor::{Complex64, ComplexMatrix, LabeledState, SubsystemLayout};
use crate::{Error, Result};

/// Derives the seed for trial `index` from a base seed: two rounds of the
/// splitmix64 finalizer over the pair.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(base.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(mix(
        index.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1),
    )))
}

/// The crate's pinned pseudo-random generator.
pub struct Rng {
    inner: rand_chacha::ChaCha8Rng,
    spare_gaussian: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            inner: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
            spare_gaussian: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal via the Marsaglia polar method.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(g) = self.spare_gaussian.take() {
            return g;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare_gaussian = Some(v * f);
                return u * f;
            }
        }
    }

    pub fn complex_gaussian(&mut self) -> Complex64 {
        Complex64::new(self.gaussian(), self.gaussian())
    }
}

/// Random probability distribution: normalized unit-rate exponential
/// draws, i.e. a flat Dirichlet sample.
pub fn random_dist(dim: usize, seed: u64) -> ProbDist {
    let mut rng = Rng::new(seed);
    let mut probs: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    ProbDist::from_probs(probs).expect("normalized by construction")
}

/// Random column-stochastic matrix; each column is an independent
/// [`random_dist`].
pub fn random_stochastic(out_dim: usize, in_dim: usize, seed: u64) -> StochasticMatrix {
    let mut data = vec![0.0; out_dim * in_dim];
    for a in 0..in_dim {
        let col = random_dist(out_dim, trial_seed(seed, a as u64));
        for b in 0..out_dim {
            data[b * in_dim + a] = col.probs()[b];
        }
    }
    StochasticMatrix::new(out_dim, in_dim, data).expect("columns normalized")
}

/// Random doubly stochastic matrix: a convex mixture of `2·dim` random
/// permutation matrices.
pub fn random_doubly_stochastic(dim: usize, seed: u64) -> StochasticMatrix {
    let terms = 2 * dim;
    let weights = random_dist(terms, trial_seed(seed, 0));
    let mut data = vec![0.0; dim * dim];
    for t in 0..terms {
        let perm = random_permutation(dim, trial_seed(seed, 1 + t as u64));
        for (a, &b) in perm.iter().enumerate() {
            data[b * dim + a] += weights.probs()[t];
        }
    }
    StochasticMatrix::new(dim, dim, data).expect("convex mixture of permutations")
}

fn random_permutation(dim: usize, seed: u64) -> Vec<usize> {
    let mut rng = Rng::new(seed);
    let mut perm: Vec<usize> = (0..dim).collect();
    for i in (1..dim).rev() {
        let j = rng.below(i + 1);
        perm.swap(i, j);
    }
    perm
}

/// Deterministic map from `0..in_dim` into `0..out_dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionMap {
    pub map: Vec<usize>,
    pub out_dim: usize,
}

impl FunctionMap {
    pub fn to_stochastic(&self) -> StochasticMatrix {
        StochasticMatrix::from_function(&self.map, self.out_dim).expect("valid map")
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }
}

/// Random deterministic function as a 0/1 column-stochastic matrix.
pub fn random_function(in_dim: usize, out_dim: usize, seed: u64) -> FunctionMap {
    let mut rng = Rng::new(seed);
    FunctionMap {
        map: (0..in_dim).map(|_| rng.below(out_dim)).collect(),
        out_dim,
    }
}

/// Random normalized ket of complex Gaussian entries.
pub fn random_ket(dim: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = Rng::new(seed);
    let mut v: Vec<Complex64> = (0..dim).map(|_| rng.complex_gaussian()).collect();
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// Random density matrix on `layout`: `G G† / tr(G G†)` with `G` a
/// complex Gaussian `dim × rank` matrix.  `rank` must lie in
/// `1..=total_dim`.
pub fn random_density_matrix(
    layout: &SubsystemLayout,
    rank: usize,
    seed: u64,
) -> Result<LabeledState> {
    let dim = layout.total_dim();
    if rank == 0 || rank > dim {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} outside 1..={dim}"
        )));
    }
    let mut rng = Rng::new(seed);
    let g = ComplexMatrix::from_fn(dim, rank, |_, _| rng.complex_gaussian());
    let mut m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    m = m.scale(Complex64::new(1.0 / tr, 0.0));
    // Symmetrize away the last bits of rounding noise.
    LabeledState::new(layout.clone(), m.hermitized())
}

/// Orthonormalizes the columns of a Gaussian matrix (two Gram-Schmidt
/// passes); `rows ≥ cols` required.
pub fn random_isometry(rows: usize, cols: usize, seed: u64) -> Result<ComplexMatrix> {
    if rows < cols {
        return Err(Error::ShapeMismatch {
            expected: format!("rows ≥ cols for an isometry"),
            found: format!("{rows}x{cols}"),
        });
    }
    let mut rng = Rng::new(seed);
    let g = ComplexMatrix::from_fn(rows, cols, |_, _| rng.complex_gaussian());
    orthonormalize_columns(&g)
}

/// Haar-like random unitary: orthonormalized square Gaussian matrix.
pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    random_isometry(dim, dim, seed).expect("square")
}

fn orthonormalize_columns(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = (g.rows(), g.cols());
    let mut basis: Vec<ComplexMatrix> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = ComplexMatrix::from_fn(rows, 1, |i, _| g[(i, j)]);
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.vdot(&v);
                v = v.sub(&b.scale(overlap));
            }
        }
        let norm = v.vdot(&v).re.sqrt();
        if norm < 1e-10 {
            return Err(Error::InvalidParameter(
                "degenerate Gaussian draw during orthonormalization".into(),
            ));
        }
        basis.push(v.scale(Complex64::new(1.0 / norm, 0.0)));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| basis[j][(i, 0)]))
}

/// Random channel with the requested Kraus count: a random isometry from
/// the input space into output ⊗ environment, sliced into blocks.
/// Requires `in_dim ≤ out_dim · kraus_count`.
pub fn random_channel(
    in_dim: usize,
    out_dim: usize,
    kraus_count: usize,
    seed: u64,
) -> Result<KrausChannel> {
    if in_dim > out_dim * kraus_count {
        return Err(Error::ShapeMismatch {
            expected: format!("in_dim ≤ out_dim·kraus_count = {}", out_dim * kraus_count),
            found: format!("{in_dim}"),
        });
    }
    let v = random_isometry(out_dim * kraus_count, in_dim, seed)?;
    let kraus = (0..kraus_count)
        .map(|mu| ComplexMatrix::from_fn(out_dim, in_dim, |b, a| v[(mu * out_dim + b, a)]))
        .collect();
    KrausChannel::new(kraus)
}

/// Random unital channel: a mixture of `terms` Haar-like unitaries with
/// random weights, `K_t = √w_t U_t`.
pub fn random_mixed_unitary_channel(dim: usize, terms: usize, seed: u64) -> KrausChannel {
    let weights = random_dist(terms.max(1), trial_seed(seed, 0));
    let kraus = (0..terms.max(1))
        .map(|t| {
            let u = random_unitary(dim, trial_seed(seed, 1 + t as u64));
            u.scale(Complex64::new(weights.probs()[t].sqrt(), 0.0))
        })
        .collect();
    KrausChannel::new(kraus).expect("mixture of unitaries is trace preserving")
}

/// Random ensemble of `count` rank-`rank` states on a single subsystem
/// `q` of dimension `dim`, with random weights and classical label `x`.
pub fn random_ensemble(dim: usize, count: usize, rank: usize, seed: u64) -> Result<Ensemble> {
    let layout = SubsystemLayout::single("q", dim)?;
    let weights = random_dist(count, trial_seed(seed, 0));
    let states = (0..count)
        .map(|x| random_density_matrix(&layout, rank, trial_seed(seed, 1 + x as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(weights.probs().to_vec(), states, "x")
}
