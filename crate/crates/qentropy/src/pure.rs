//! Schmidt decomposition, purification, and the identity suite for
//! partial entropies of pure multipartite states.
//!
//! Every pure state looks maximally symmetric to its marginals: the two
//! sides of any bipartite cut share a spectrum, so every entropy of a
//! group of subsystems equals the entropy of the complementary group.
//! [`check_pure_identities`] turns that observation into concrete
//! verdicts for two-, three-, and four-block partitions.

use crate::checks::CheckVerdict;
use crate::entropy::{quantum_entropy, Quantity};
use crate::tensor::{
    eig_hermitian, Complex64, ComplexMatrix, LabeledState, SubsystemLayout, SPECTRUM_CLIP,
};
use crate::{Error, Result};

/// Purity tolerance: the largest eigenvalue must sit within this of 1.
const PURITY_TOL: f64 = 1e-9;

/// A bipartite pure state in diagonal form: `ψ = Σ_k c_k · l_k ⊗ r_k`
/// with non-negative coefficients sorted descending and orthonormal
/// vectors on each side.
#[derive(Clone, Debug)]
pub struct SchmidtForm {
    coefficients: Vec<f64>,
    left: ComplexMatrix,
    right: ComplexMatrix,
}

impl SchmidtForm {
    /// Coefficients, descending; their squares sum to 1.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Left vectors as matrix columns, one per coefficient.
    pub fn left(&self) -> &ComplexMatrix {
        &self.left
    }

    /// Right vectors as matrix columns, one per coefficient.
    pub fn right(&self) -> &ComplexMatrix {
        &self.right
    }

    /// Number of coefficients above `clip` (the Schmidt rank).
    pub fn rank(&self, clip: f64) -> usize {
        self.coefficients.iter().filter(|c| *c * *c > clip).count()
    }

    /// Rebuilds the ket `Σ_k c_k · l_k ⊗ r_k` (left index major).
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let (l, r) = (self.left.rows(), self.right.rows());
        let mut ket = vec![Complex64::new(0.0, 0.0); l * r];
        for (k, &c) in self.coefficients.iter().enumerate() {
            for i in 0..l {
                for j in 0..r {
                    ket[i * r + j] += self.left[(i, k)] * self.right[(j, k)] * c;
                }
            }
        }
        ket
    }
}

/// Extracts the ket of a pure state (eigenvector of the top eigenvalue,
/// up to global phase), or reports how far from pure the state is.
fn pure_ket(state: &LabeledState) -> Result<Vec<Complex64>> {
    let (vals, vecs) = eig_hermitian(state.matrix())?;
    let top = *vals.last().expect("nonempty spectrum");
    if (top - 1.0).abs() > PURITY_TOL {
        return Err(Error::NotPure {
            largest_eigenvalue: top,
        });
    }
    let k = vals.len() - 1;
    Ok((0..state.total_dim()).map(|i| vecs[(i, k)]).collect())
}

/// Schmidt-decomposes a pure state across the cut that separates
/// `left_labels` from the remaining subsystems.
///
/// Both groups keep their layout order.  The input must be pure and the
/// cut must be a nonempty proper subset of the layout.
pub fn schmidt_decompose(state: &LabeledState, left_labels: &[&str]) -> Result<SchmidtForm> {
    let layout = state.layout();
    let left_pos = layout.positions_in_order(left_labels)?;
    if left_pos.len() == layout.len() {
        return Err(Error::InvalidParameter(
            "the cut must leave at least one subsystem on each side".into(),
        ));
    }
    let right_pos: Vec<usize> = (0..layout.len())
        .filter(|p| !left_pos.contains(p))
        .collect();
    let ket = pure_ket(state)?;

    let group_dim = |positions: &[usize]| -> usize {
        positions.iter().map(|&p| layout.dims()[p]).product()
    };
    let (l_dim, r_dim) = (group_dim(&left_pos), group_dim(&right_pos));
    // Flat index of the full ket for a given (left flat, right flat) pair.
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(l_dim, r_dim);
    for (flat, &amp) in ket.iter().enumerate() {
        let digits = layout.unravel(flat);
        let fold = |positions: &[usize]| {
            positions
                .iter()
                .fold(0usize, |acc, &p| acc * layout.dims()[p] + digits[p])
        };
        m[(fold(&left_pos), fold(&right_pos))] = amp;
    }

    let svd = m.svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .expect("singular values are finite")
    });

    let k = order.len();
    let coefficients: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = ComplexMatrix::from_fn(l_dim, k, |i, c| u[(i, order[c])]);
    let right = ComplexMatrix::from_fn(r_dim, k, |j, c| v_t[(order[c], j)]);
    Ok(SchmidtForm {
        coefficients,
        left,
        right,
    })
}

/// Extends a state to a pure one by entangling it with a reference
/// subsystem whose dimension equals the state's rank: from the spectral
/// form `ρ = Σ_k λ_k |v_k⟩⟨v_k|`, builds `Σ_k √λ_k |v_k⟩ ⊗ |k⟩`.
///
/// The reference is appended last with label `r` (or `r1`, `r2`, … if
/// taken); tracing it out recovers the input.
pub fn purify(state: &LabeledState) -> Result<LabeledState> {
    let (vals, vecs) = eig_hermitian(state.matrix())?;
    let dim = state.total_dim();
    // Top-down so the reference basis enumerates eigenvalues descending.
    let kept: Vec<usize> = (0..dim).rev().filter(|&k| vals[k] > SPECTRUM_CLIP).collect();
    assert!(!kept.is_empty(), "a unit-trace state has a nonzero eigenvalue");
    let rank = kept.len();

    let mut ref_label = String::from("r");
    let mut suffix = 0usize;
    while state.layout().position(&ref_label).is_ok() {
        suffix += 1;
        ref_label = format!("r{suffix}");
    }
    let mut entries = state.layout().entries().to_vec();
    entries.push((ref_label, rank));
    let layout = SubsystemLayout::new(entries)?;

    let mut ket = vec![Complex64::new(0.0, 0.0); dim * rank];
    for (slot, &k) in kept.iter().enumerate() {
        let c = vals[k].sqrt();
        for i in 0..dim {
            ket[i * rank + slot] = vecs[(i, k)] * c;
        }
    }
    let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = Complex64::new(1.0 / norm, 0.0);
    let matrix = ComplexMatrix::outer(&ket).scale(scale * scale);
    Ok(LabeledState::trusted(layout, matrix))
}

/// Evaluates every partial-entropy identity a pure state satisfies for
/// the given partition of its subsystems into disjoint blocks, plus the
/// vanishing of the total entropy.  One verdict is returned per identity
/// family, carrying the worst case over all block-role assignments.
///
/// Families by partition arity (blocks are grouped labels; arity is the
/// block count): any arity — total entropy zero, complement symmetry
/// over every sub-collection of blocks; two blocks — conditional and
/// mutual forms; three blocks — conditional differences, sign flips,
/// third-block mutual, and conditioning invariance of the mutual
/// information; four blocks — the conditional mutual information as a
/// sum of two conditionals, and its invariance under swapping the
/// conditioning block with the omitted one.
pub fn check_pure_identities(
    state: &LabeledState,
    blocks: &[&[&str]],
) -> Result<Vec<CheckVerdict>> {
    let layout = state.layout();
    let mut seen = std::collections::HashSet::new();
    for block in blocks {
        if block.is_empty() {
            return Err(Error::EmptySelection);
        }
        for label in *block {
            layout.position(label)?;
            if !seen.insert(*label) {
                return Err(Error::DuplicateLabel((*label).into()));
            }
        }
    }
    if seen.len() != layout.len() {
        return Err(Error::InvalidParameter(format!(
            "partition covers {} of {} subsystems",
            seen.len(),
            layout.len()
        )));
    }
    // Purity gate (the identities below are specific to pure states).
    pure_ket(state)?;

    let dims = layout.dims();
    let n = blocks.len();
    let union = |ids: &[usize]| -> Vec<&str> {
        ids.iter().flat_map(|&i| blocks[i].iter().copied()).collect()
    };
    let s_joint = |ids: &[usize]| -> f64 {
        quantum_entropy(&Quantity::joint(&union(ids)), state).expect("validated labels")
    };
    let s_cond = |of: &[usize], given: &[usize]| -> f64 {
        quantum_entropy(&Quantity::conditional(&union(of), &union(given)), state)
            .expect("validated labels")
    };
    let s_mut = |a: &[usize], b: &[usize]| -> f64 {
        quantum_entropy(&Quantity::mutual(&union(a), &union(b)), state)
            .expect("validated labels")
    };
    let s_cmi = |a: &[usize], b: &[usize], g: &[usize]| -> f64 {
        quantum_entropy(&Quantity::cond_mutual(&union(a), &union(b), &union(g)), state)
            .expect("validated labels")
    };

    // Worst-case (largest |lhs−rhs|) accumulator per identity family.
    struct Family {
        id: &'static str,
        worst: Option<(f64, f64)>,
    }
    impl Family {
        fn new(id: &'static str) -> Self {
            Family { id, worst: None }
        }
        fn record(&mut self, lhs: f64, rhs: f64) {
            let gap = (lhs - rhs).abs();
            if self.worst.map_or(true, |(l, r)| gap > (l - r).abs()) {
                self.worst = Some((lhs, rhs));
            }
        }
        fn verdict(self, dims: &[usize]) -> Option<CheckVerdict> {
            self.worst
                .map(|(lhs, rhs)| CheckVerdict::identity(self.id, lhs, rhs, 0, dims.to_vec()))
        }
    }

    let all: Vec<usize> = (0..n).collect();
    let mut total = Family::new("pure_total");
    total.record(s_joint(&all), 0.0);

    let mut complement = Family::new("pure_complement");
    if n >= 2 {
        for mask in 1..(1u32 << n) - 1 {
            let (mut inside, mut outside) = (Vec::new(), Vec::new());
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    inside.push(i);
                } else {
                    outside.push(i);
                }
            }
            complement.record(s_joint(&inside), s_joint(&outside));
        }
    }

    let mut families = vec![total, complement];
    match n {
        2 => {
            let mut conditional = Family::new("pure_conditional");
            let mut mutual = Family::new("pure_mutual");
            for (i, j) in [(0usize, 1usize), (1, 0)] {
                let cond = s_cond(&[i], &[j]);
                conditional.record(cond, -s_joint(&[i]));
                conditional.record(cond, -s_joint(&[j]));
                mutual.record(s_mut(&[i], &[j]), 2.0 * s_joint(&[i]));
            }
            families.extend([conditional, mutual]);
        }
        3 => {
            let mut cond_diff = Family::new("pure_cond_diff");
            let mut cond_flip = Family::new("pure_cond_flip");
            let mut mutual_third = Family::new("pure_mutual_third");
            let mut cmi_eq_mi = Family::new("pure_cmi_eq_mi");
            for perm in permutations(3) {
                let (i, j, k) = (perm[0], perm[1], perm[2]);
                cond_diff.record(s_cond(&[j], &[i]), s_joint(&[k]) - s_joint(&[i]));
                cond_flip.record(s_cond(&[j], &[i]), -s_cond(&[j], &[k]));
                mutual_third.record(
                    s_mut(&[i], &[j]),
                    s_joint(&[i]) + s_joint(&[j]) - s_joint(&[k]),
                );
                cmi_eq_mi.record(s_cmi(&[i], &[j], &[k]), s_mut(&[i], &[j]));
            }
            families.extend([cond_diff, cond_flip, mutual_third, cmi_eq_mi]);
        }
        4 => {
            let mut cmi_cond_sum = Family::new("pure_cmi_cond_sum");
            let mut cmi_swap = Family::new("pure_cmi_swap");
            for perm in permutations(4) {
                let (i, j, k, l) = (perm[0], perm[1], perm[2], perm[3]);
                cmi_cond_sum.record(
                    s_cmi(&[i], &[j], &[k]),
                    s_cond(&[i], &[k]) + s_cond(&[i], &[l]),
                );
                cmi_swap.record(s_cmi(&[i], &[j], &[k]), s_cmi(&[i], &[j], &[l]));
            }
            families.extend([cmi_cond_sum, cmi_swap]);
        }
        _ => {}
    }

    Ok(families.into_iter().filter_map(|f| f.verdict(&dims)).collect())
}

/// All permutations of `0..n` in lexicographic order (`n` ≤ a handful).
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    fn extend(n: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for k in 0..n {
            if !current.contains(&k) {
                current.push(k);
                extend(n, current, out);
                current.pop();
            }
        }
    }
    extend(n, &mut current, &mut out);
    out
}
