//! Directed acyclic networks of complex amplitude tables, compiled into
//! density matrices.
//!
//! Each node carries a table `A(x | parent assignment)` of complex
//! amplitudes and one of four markings that decide its fate during
//! compilation:
//!
//! * **visible** — the node remains a quantum subsystem of the output;
//! * **slashed** — the node's index is summed *coherently* inside the ket
//!   (it never becomes a subsystem; interference between its values
//!   survives);
//! * **traced** — the node becomes a subsystem and is then traced out of
//!   the density matrix (incoherent removal);
//! * **classical** — the node becomes a subsystem that is dephased in its
//!   computational basis, i.e. a classical random variable embedded in
//!   the state.
//!
//! The distinction between slashing and tracing matters: slashing a node
//! keeps purity, tracing generally does not.  [`erase_vs_trace`] exposes
//! the comparison directly, and [`build_chain_net`] assembles the
//! isometry chains used by the data-processing checkers.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::tensor::{Complex64, ComplexMatrix, LabeledState, SubsystemLayout, STATE_TOL};
use crate::{Error, Result};

/// Hard cap on the number of joint assignments [`QBNet::compile_density`]
/// will enumerate.
const ASSIGNMENT_CAP: usize = 1 << 24;

/// What happens to a node when the net is compiled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marking {
    Visible,
    Slashed,
    Traced,
    Classical,
}

impl Marking {
    fn as_str(self) -> &'static str {
        match self {
            Marking::Visible => "visible",
            Marking::Slashed => "slashed",
            Marking::Traced => "traced",
            Marking::Classical => "classical",
        }
    }

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "visible" => Ok(Marking::Visible),
            "slashed" => Ok(Marking::Slashed),
            "traced" => Ok(Marking::Traced),
            "classical" => Ok(Marking::Classical),
            other => Err(Error::InvalidParameter(format!(
                "unknown marking `{other}`"
            ))),
        }
    }
}

/// One node of a network: a labelled random variable with a complex
/// amplitude table conditioned on its parents.
///
/// The amplitude table is stored flat with the node's own state as the
/// major index and the parent assignment as the minor index; parent
/// assignments are ravelled with the *first* listed parent most
/// significant.
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    label: String,
    dim: usize,
    parents: Vec<String>,
    amplitudes: Vec<Complex64>,
    marking: Marking,
}

impl Node {
    pub fn new(
        label: &str,
        dim: usize,
        parents: &[&str],
        amplitudes: Vec<Complex64>,
        marking: Marking,
    ) -> Self {
        Node {
            label: label.to_string(),
            dim,
            parents: parents.iter().map(|p| p.to_string()).collect(),
            amplitudes,
            marking,
        }
    }

    /// Parentless node with the given amplitude vector.
    pub fn root(label: &str, dim: usize, amplitudes: Vec<Complex64>, marking: Marking) -> Self {
        Node::new(label, dim, &[], amplitudes, marking)
    }

    /// Parentless node pinned to a single state: `A(x) = δ(x, value)`.
    pub fn clamped_root(label: &str, dim: usize, value: usize, marking: Marking) -> Self {
        assert!(value < dim, "clamped value {value} outside 0..{dim}");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[value] = Complex64::new(1.0, 0.0);
        Node::new(label, dim, &[], amplitudes, marking)
    }

    /// Exact copy of a parent: `A(x|p) = δ(x, p)`.
    pub fn copy_of(label: &str, parent: &str, dim: usize, marking: Marking) -> Self {
        Node::component_copy(label, parent, &[dim], 0, marking)
    }

    /// Copy of one factor of a composite parent.  The parent's states are
    /// read as a ravelled multi-index over `parent_dims` (first factor
    /// most significant); this node copies factor `component`.
    pub fn component_copy(
        label: &str,
        parent: &str,
        parent_dims: &[usize],
        component: usize,
        marking: Marking,
    ) -> Self {
        assert!(component < parent_dims.len());
        let parent_dim: usize = parent_dims.iter().product();
        let dim = parent_dims[component];
        let stride: usize = parent_dims[component + 1..].iter().product();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim * parent_dim];
        for p in 0..parent_dim {
            let digit = (p / stride) % dim;
            amplitudes[digit * parent_dim + p] = Complex64::new(1.0, 0.0);
        }
        Node::new(label, dim, &[parent], amplitudes, marking)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parents(&self) -> &[String] {
        &self.parents
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn marking(&self) -> Marking {
        self.marking
    }
}

/// A validated amplitude network: acyclic, with resolving parent
/// references, unique labels, complete amplitude tables, and normalized
/// roots.
#[derive(Clone, Debug, PartialEq)]
pub struct QBNet {
    nodes: Vec<Node>,
}

impl QBNet {
    pub fn new(nodes: Vec<Node>) -> Result<Self> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (k, node) in nodes.iter().enumerate() {
            if index.insert(&node.label, k).is_some() {
                return Err(Error::DuplicateLabel(node.label.clone()));
            }
        }
        for node in &nodes {
            if node.dim == 0 {
                return Err(Error::InvalidParameter(format!(
                    "node `{}` has dimension 0",
                    node.label
                )));
            }
            let mut parent_space: usize = 1;
            for parent in &node.parents {
                let &p = index.get(parent.as_str()).ok_or_else(|| Error::MissingParent {
                    node: node.label.clone(),
                    parent: parent.clone(),
                })?;
                parent_space = parent_space.saturating_mul(nodes[p].dim);
            }
            let expected = node.dim.saturating_mul(parent_space);
            if node.amplitudes.len() != expected {
                return Err(Error::BadAmplitudeCount {
                    node: node.label.clone(),
                    expected,
                    found: node.amplitudes.len(),
                });
            }
            if node.parents.is_empty() {
                let norm_sq: f64 = node.amplitudes.iter().map(|a| a.norm_sqr()).sum();
                let deviation = (norm_sq - 1.0).abs();
                if deviation > STATE_TOL {
                    return Err(Error::NotNormalized { deviation });
                }
            }
        }
        // Kahn's algorithm over parent→child edges.
        let n = nodes.len();
        let mut indegree = vec![0usize; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, node) in nodes.iter().enumerate() {
            for parent in &node.parents {
                children[index[parent.as_str()]].push(k);
                indegree[k] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&k| indegree[k] == 0).collect();
        let mut seen = 0;
        while let Some(k) = queue.pop() {
            seen += 1;
            for &c in &children[k] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push(c);
                }
            }
        }
        if seen != n {
            return Err(Error::CyclicNet);
        }
        Ok(QBNet { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, label: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.label == label)
    }

    /// Changes the marking of one node.
    pub fn set_marking(&mut self, label: &str, marking: Marking) -> Result<()> {
        let node = self
            .nodes
            .iter_mut()
            .find(|n| n.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.into()))?;
        node.marking = marking;
        Ok(())
    }

    /// Copy of the net with one node re-marked.
    pub fn with_marking(&self, label: &str, marking: Marking) -> Result<QBNet> {
        let mut net = self.clone();
        net.set_marking(label, marking)?;
        Ok(net)
    }

    /// Compiles the net into a density matrix.
    ///
    /// A ket indexed by all non-slashed nodes is built by summing, for
    /// each slashed-node assignment, the product of every node's
    /// amplitude; the ket is normalized (a squared norm below 1e-12 is an
    /// error), the rank-one density matrix is formed, classical-marked
    /// nodes are dephased, and traced-marked nodes are traced out.  The
    /// output layout lists the surviving nodes in their order within the
    /// net's node list.
    pub fn compile_density(&self) -> Result<LabeledState> {
        let n = self.nodes.len();
        let index: HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(k, node)| (node.label.as_str(), k))
            .collect();
        let parent_pos: Vec<Vec<usize>> = self
            .nodes
            .iter()
            .map(|node| node.parents.iter().map(|p| index[p.as_str()]).collect())
            .collect();

        let ket_layout = SubsystemLayout::new(
            self.nodes
                .iter()
                .filter(|node| node.marking != Marking::Slashed)
                .map(|node| (node.label.clone(), node.dim))
                .collect(),
        )?;
        // Stride of each node's digit within the ket (zero for slashed
        // nodes, whose digits are summed away).
        let mut ket_stride = vec![0usize; n];
        let mut stride = ket_layout.total_dim();
        for (k, node) in self.nodes.iter().enumerate() {
            if node.marking != Marking::Slashed {
                stride /= node.dim;
                ket_stride[k] = stride;
            }
        }

        let mut total: usize = 1;
        for node in &self.nodes {
            total = total.saturating_mul(node.dim);
        }
        if total > ASSIGNMENT_CAP {
            return Err(Error::TooLarge {
                what: "joint assignment enumeration".into(),
                max: ASSIGNMENT_CAP,
                got: total,
            });
        }

        let mut ket = vec![Complex64::new(0.0, 0.0); ket_layout.total_dim()];
        let mut assignment = vec![0usize; n];
        'outer: loop {
            let mut amp = Complex64::new(1.0, 0.0);
            for (k, node) in self.nodes.iter().enumerate() {
                let mut parent_index = 0usize;
                for &p in &parent_pos[k] {
                    parent_index = parent_index * self.nodes[p].dim + assignment[p];
                }
                amp *= node.amplitudes[assignment[k] * (node.amplitudes.len() / node.dim)
                    + parent_index];
                if amp == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            if amp != Complex64::new(0.0, 0.0) {
                let ket_index: usize = assignment
                    .iter()
                    .zip(&ket_stride)
                    .map(|(a, s)| a * s)
                    .sum();
                ket[ket_index] += amp;
            }
            // Odometer increment, last node fastest.
            for k in (0..n).rev() {
                assignment[k] += 1;
                if assignment[k] < self.nodes[k].dim {
                    continue 'outer;
                }
                assignment[k] = 0;
            }
            break;
        }

        let norm_sq: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq < 1e-12 {
            return Err(Error::DegenerateKet { norm: norm_sq });
        }
        let scale = Complex64::new(1.0 / norm_sq, 0.0);
        let rho = ComplexMatrix::outer(&ket).scale(scale);
        let mut state = LabeledState::trusted(ket_layout, rho);

        for node in &self.nodes {
            if node.marking == Marking::Classical {
                state = classicize(&state, &node.label)?;
            }
        }
        let keep: Vec<&str> = self
            .nodes
            .iter()
            .filter(|node| matches!(node.marking, Marking::Visible | Marking::Classical))
            .map(|node| node.label.as_str())
            .collect();
        if keep.is_empty() {
            let trace = state.matrix().trace();
            state = LabeledState::trusted(
                SubsystemLayout::new(Vec::<(String, usize)>::new())?,
                ComplexMatrix::from_row_slice(1, 1, &[trace])?,
            );
        } else if keep.len() < state.layout().len() {
            state = state.partial_trace(&keep)?;
        }

        let deviation = (state.matrix().trace() - Complex64::new(1.0, 0.0)).norm();
        if deviation > 1e-8 {
            return Err(Error::NormDeviation { deviation });
        }
        Ok(state)
    }

    /// Serializes to the JSON wire form
    /// `{"nodes": [{"label", "dim", "parents", "amplitudes", "marking"}, ..]}`
    /// with amplitudes flattened as `[re, im, re, im, ..]`.
    pub fn to_json(&self) -> String {
        let raw = RawNet {
            nodes: self
                .nodes
                .iter()
                .map(|node| RawNode {
                    label: node.label.clone(),
                    dim: node.dim,
                    parents: node.parents.clone(),
                    amplitudes: node
                        .amplitudes
                        .iter()
                        .flat_map(|z| [z.re, z.im])
                        .collect(),
                    marking: node.marking.as_str().to_string(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }

    /// Parses and validates the wire form produced by [`to_json`](Self::to_json).
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawNet = serde_json::from_str(s)?;
        let mut nodes = Vec::with_capacity(raw.nodes.len());
        for rn in raw.nodes {
            if rn.amplitudes.len() % 2 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "node `{}`: amplitude array has odd length {}",
                    rn.label,
                    rn.amplitudes.len()
                )));
            }
            nodes.push(Node {
                label: rn.label,
                dim: rn.dim,
                parents: rn.parents,
                amplitudes: rn
                    .amplitudes
                    .chunks_exact(2)
                    .map(|c| Complex64::new(c[0], c[1]))
                    .collect(),
                marking: Marking::from_str(&rn.marking)?,
            });
        }
        QBNet::new(nodes)
    }
}

#[derive(Serialize, Deserialize)]
struct RawNode {
    label: String,
    dim: usize,
    parents: Vec<String>,
    amplitudes: Vec<f64>,
    marking: String,
}

#[derive(Serialize, Deserialize)]
struct RawNet {
    nodes: Vec<RawNode>,
}

/// Dephases the named subsystem in its computational basis:
/// `ρ ↦ Σ_x (1 ⊗ |x⟩⟨x| ⊗ 1) ρ (1 ⊗ |x⟩⟨x| ⊗ 1)`.
///
/// Idempotent and trace preserving; diagonal states are fixed points.
pub fn classicize(state: &LabeledState, label: &str) -> Result<LabeledState> {
    let pos = state.layout().position(label)?;
    let dim = state.total_dim();
    let mut m = state.matrix().clone();
    for i in 0..dim {
        let di = state.layout().digit(i, pos);
        for j in 0..dim {
            if state.layout().digit(j, pos) != di {
                m[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(LabeledState::trusted(state.layout().clone(), m))
}

/// One link of an isometry chain: the amplitude table
/// `A((b_k, e_k) | b_{k-1})` stored own-state major, with the composite
/// state ravelled as `b_k · e_dim + e_k`.
#[derive(Clone, Debug)]
pub struct ChainLink {
    pub amplitudes: Vec<Complex64>,
    pub b_dim: usize,
    pub e_dim: usize,
}

/// Builds the chain net `a → b → (b_1, e_1) → (b_2, e_2) → …` in which
/// every link is an isometry from the previous `b` into the composite
/// `(b, e)` pair.
///
/// Node labels are `a`, `b`, then `beta1`, `b1`, `e1`, `beta2`, … per
/// link: `betaK` holds the composite output of link K (always slashed)
/// and `bK`/`eK` copy its two factors into separate subsystems.  The
/// `e` nodes are always traced; the markings of `b, b1, …, bj` are taken
/// from `b_markings` (length `links.len() + 1`), so callers can keep,
/// trace, dephase, or coherently absorb each stage; `a` stays visible.
///
/// Each link must be an isometry (columns orthonormal) and its input
/// dimension must match the previous link's `b_dim`.
pub fn build_chain_net(
    a_dim: usize,
    b_dim: usize,
    root: Vec<Complex64>,
    first: Vec<Complex64>,
    links: &[ChainLink],
    b_markings: &[Marking],
) -> Result<QBNet> {
    if b_markings.len() != links.len() + 1 {
        return Err(Error::InvalidParameter(format!(
            "need {} markings for the b-chain, got {}",
            links.len() + 1,
            b_markings.len()
        )));
    }
    let mut nodes = vec![
        Node::root("a", a_dim, root, Marking::Visible),
        Node::new("b", b_dim, &["a"], first, b_markings[0]),
    ];
    let mut prev_b = ("b".to_string(), b_dim);
    for (k, link) in links.iter().enumerate() {
        let beta_dim = link.b_dim * link.e_dim;
        if link.amplitudes.len() != beta_dim * prev_b.1 {
            return Err(Error::ShapeMismatch {
                expected: format!(
                    "link {} amplitude table of {} entries ({}x{})",
                    k + 1,
                    beta_dim * prev_b.1,
                    beta_dim,
                    prev_b.1
                ),
                found: format!("{} entries", link.amplitudes.len()),
            });
        }
        let v = ComplexMatrix::from_fn(beta_dim, prev_b.1, |r, c| {
            link.amplitudes[r * prev_b.1 + c]
        });
        let gram = v.adjoint().matmul(&v);
        let deviation = gram.sub(&ComplexMatrix::identity(prev_b.1)).max_abs();
        if deviation > STATE_TOL {
            return Err(Error::NotIsometric { deviation });
        }
        let beta = format!("beta{}", k + 1);
        let b_label = format!("b{}", k + 1);
        let e_label = format!("e{}", k + 1);
        nodes.push(Node::new(
            &beta,
            beta_dim,
            &[&prev_b.0],
            link.amplitudes.clone(),
            Marking::Slashed,
        ));
        nodes.push(Node::component_copy(
            &b_label,
            &beta,
            &[link.b_dim, link.e_dim],
            0,
            b_markings[k + 1],
        ));
        nodes.push(Node::component_copy(
            &e_label,
            &beta,
            &[link.b_dim, link.e_dim],
            1,
            Marking::Traced,
        ));
        prev_b = (b_label, link.b_dim);
    }
    QBNet::new(nodes)
}

/// Compiles the net twice, once with `label` re-marked slashed (erased:
/// its index is absorbed coherently) and once re-marked traced
/// (discarded incoherently), returning `(erased, traced)`.
///
/// Only visible non-root nodes may be compared this way.
pub fn erase_vs_trace(net: &QBNet, label: &str) -> Result<(LabeledState, LabeledState)> {
    let node = net
        .node(label)
        .ok_or_else(|| Error::UnknownLabel(label.into()))?;
    if node.parents().is_empty() {
        return Err(Error::BadErase {
            label: label.into(),
            reason: "node is a root".into(),
        });
    }
    if node.marking() != Marking::Visible {
        return Err(Error::BadErase {
            label: label.into(),
            reason: format!("node is marked {}, not visible", node.marking().as_str()),
        });
    }
    let erased = net.with_marking(label, Marking::Slashed)?.compile_density()?;
    let traced = net.with_marking(label, Marking::Traced)?.compile_density()?;
    Ok((erased, traced))
}
