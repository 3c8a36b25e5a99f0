//! Numerical checkers for entropy inequalities and identities.
//!
//! Each checker takes a concrete [`Instance`] (a state, a distribution, a
//! channel pairing, a compiled network, an ensemble, ...) and returns a
//! [`CheckVerdict`] recording both sides of the claim and the margin
//! `rhs − lhs`.  Inequalities are stated in `lhs ≤ rhs` form, identities
//! report `margin = −|lhs − rhs|`, and a verdict holds when the margin is
//! at least `−CHECK_TOL`.  Claims with several parts report the tightest
//! part.
//!
//! [`random_instance`] builds seeded instances of every supported shape
//! and [`run_batch`] drives many trials in parallel, so the whole registry
//! can be swept reproducibly from one base seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::entropy::{
    classical_entropy, classical_relative_entropy, cq_state, holevo_information, quantum_entropy,
    quantum_relative_entropy, Ensemble, JointDist, ProbDist, Quantity, StochasticMatrix,
};
use crate::net::{build_chain_net, classicize, ChainLink, Marking, Node, QBNet};
use crate::random::{
    random_density_matrix, random_dist, random_doubly_stochastic, random_ensemble,
    random_function, random_isometry, random_ket, random_mixed_unitary_channel, random_stochastic,
    trial_seed, FunctionMap, Rng,
};
use crate::tensor::{Complex64, ComplexMatrix, LabeledState, SubsystemLayout, SPECTRUM_CLIP};
use crate::{Error, Result};

/// Absolute pass tolerance, in nats, shared by every checker.
pub const CHECK_TOL: f64 = 1e-9;

/// Outcome of one checker run: both sides of the claim, the margin
/// `rhs − lhs`, and the instance fingerprint (seed and subsystem dims).
///
/// Serializes as `{id, lhs, rhs, margin, holds, seed, dims}`; infinite
/// values appear as the strings `"inf"` / `"-inf"` so reports stay valid
/// JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckVerdict {
    id: String,
    #[serde(with = "extended_real")]
    lhs: f64,
    #[serde(with = "extended_real")]
    rhs: f64,
    #[serde(with = "extended_real")]
    margin: f64,
    holds: bool,
    seed: u64,
    dims: Vec<usize>,
}

mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_str("nan")
        } else if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Tag(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!(
                    "unknown extended real `{other}`"
                ))),
            },
        }
    }
}

/// Margin of `lhs ≤ rhs` under the infinity conventions: anything is
/// `≤ +∞`, `+∞ ≤ finite` fails, and two equal infinities compare as equal.
fn ineq_margin(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    rhs - lhs
}

/// Margin of `lhs = rhs`: zero when equal (including equal infinities),
/// otherwise `−|lhs − rhs|`.
fn ident_margin(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    -(lhs - rhs).abs()
}

impl CheckVerdict {
    pub(crate) fn inequality_tol(
        id: &str,
        lhs: f64,
        rhs: f64,
        seed: u64,
        dims: Vec<usize>,
        tol: f64,
    ) -> Self {
        let margin = ineq_margin(lhs, rhs);
        CheckVerdict {
            id: id.into(),
            lhs,
            rhs,
            margin,
            holds: margin >= -tol,
            seed,
            dims,
        }
    }

    pub(crate) fn inequality(id: &str, lhs: f64, rhs: f64, seed: u64, dims: Vec<usize>) -> Self {
        Self::inequality_tol(id, lhs, rhs, seed, dims, CHECK_TOL)
    }

    pub(crate) fn identity_tol(
        id: &str,
        lhs: f64,
        rhs: f64,
        seed: u64,
        dims: Vec<usize>,
        tol: f64,
    ) -> Self {
        let margin = ident_margin(lhs, rhs);
        CheckVerdict {
            id: id.into(),
            lhs,
            rhs,
            margin,
            holds: margin >= -tol,
            seed,
            dims,
        }
    }

    pub(crate) fn identity(id: &str, lhs: f64, rhs: f64, seed: u64, dims: Vec<usize>) -> Self {
        Self::identity_tol(id, lhs, rhs, seed, dims, CHECK_TOL)
    }

    /// Fully explicit constructor for claims that are neither plain
    /// inequalities nor identities (e.g. existence claims).
    pub(crate) fn raw(
        id: &str,
        lhs: f64,
        rhs: f64,
        margin: f64,
        holds: bool,
        seed: u64,
        dims: Vec<usize>,
    ) -> Self {
        CheckVerdict {
            id: id.into(),
            lhs,
            rhs,
            margin,
            holds,
            seed,
            dims,
        }
    }

    /// Composite verdict: reports the part with the smallest margin and
    /// holds only when every part holds.
    pub(crate) fn worst(id: &str, parts: Vec<CheckVerdict>) -> Self {
        assert!(!parts.is_empty(), "composite claims have at least one part");
        let all_hold = parts.iter().all(|p| p.holds);
        let mut tightest = parts
            .into_iter()
            .reduce(|acc, p| if p.margin < acc.margin { p } else { acc })
            .expect("nonempty");
        tightest.id = id.into();
        tightest.holds = all_hold;
        tightest
    }

    /// Composite verdict led by a headline part: reports `main`'s numbers
    /// unless a side condition fails, in which case the failing side is
    /// reported instead.  Keeps the headline margin meaningful when the
    /// sides are exact identities.
    pub(crate) fn lead(id: &str, main: CheckVerdict, sides: Vec<CheckVerdict>) -> Self {
        let all_hold = main.holds && sides.iter().all(|p| p.holds);
        let mut v = match sides
            .into_iter()
            .filter(|p| !p.holds)
            .reduce(|acc, p| if p.margin < acc.margin { p } else { acc })
        {
            Some(bad) => bad,
            None => main,
        };
        v.id = id.into();
        v.holds = all_hold;
        v
    }

    pub(crate) fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn lhs(&self) -> f64 {
        self.lhs
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn holds(&self) -> bool {
        self.holds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
}

/// Identifier of one registered claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InequalityId {
    /// `S(a,b) ≤ S(a) + S(b)`.
    MiNonneg,
    /// `S(a:b|e) ≥ 0`.
    CmiNonneg,
    /// `|S(a) − S(b)| ≤ S(a,b)`.
    ArakiLieb,
    /// `−S(b) ≤ S(b|a) ≤ S(b)`; classically `0 ≤ H(b|a) ≤ H(b)`.
    CondBounds,
    /// `S(T(ρ)) ≥ S(ρ)` for square unital channels; classically for
    /// doubly stochastic matrices.
    UnitalMonotone,
    /// `H(f(x)) ≤ H(x)`, with the side identity `H(f(z):z) = H(f(z))`.
    FunctionDecrease,
    /// Dephasing can only raise entropy and lower mutual information.
    EntropyMeasurement,
    /// `H{w} ≥ S(Σ w |ψ⟩⟨ψ|)`, equality exactly for orthonormal kets.
    EntropyPreparation,
    /// `H(c:a) ≤ H(b:a)` along the classical chain `a → b → c`.
    DpClassical,
    /// `H(f(x):a) ≤ H(x:a)` and `H(b:x) ≤ H(b:f(x))` around a
    /// deterministic stage.
    DpFunction,
    /// Dephased stage information decreases along one compiled chain:
    /// `S(b₂:a) ≤ S(b₁:a) ≤ S(b:a)` with every stage dephased.
    DpSingleGraph,
    /// `S(b₃:a) ≤ S(b₂:a) ≤ S(b₁:a)` across successive isometry-chain
    /// reductions.
    DpMultigraph,
    /// `S(b|a_cl) ≥ max(0, S(b|a))`.
    CondOnClassical,
    /// A copied classical index merges without changing entropies.
    CloneMerge,
    /// `S(a:b|e) = 0` when `e` sits dephased between `a` and `b`.
    TrinodeCmiZero,
    /// Tracing all outputs of an isometry equals dephasing its input.
    IsometryTrace,
    /// Ensemble Holevo information equals the mutual information of the
    /// classical-quantum embedding.
    HolevoIsMi,
}

impl InequalityId {
    pub const ALL: [InequalityId; 17] = [
        InequalityId::MiNonneg,
        InequalityId::CmiNonneg,
        InequalityId::ArakiLieb,
        InequalityId::CondBounds,
        InequalityId::UnitalMonotone,
        InequalityId::FunctionDecrease,
        InequalityId::EntropyMeasurement,
        InequalityId::EntropyPreparation,
        InequalityId::DpClassical,
        InequalityId::DpFunction,
        InequalityId::DpSingleGraph,
        InequalityId::DpMultigraph,
        InequalityId::CondOnClassical,
        InequalityId::CloneMerge,
        InequalityId::TrinodeCmiZero,
        InequalityId::IsometryTrace,
        InequalityId::HolevoIsMi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::MiNonneg => "mi_nonneg",
            InequalityId::CmiNonneg => "cmi_nonneg",
            InequalityId::ArakiLieb => "araki_lieb",
            InequalityId::CondBounds => "cond_bounds",
            InequalityId::UnitalMonotone => "unital_monotone",
            InequalityId::FunctionDecrease => "function_decrease",
            InequalityId::EntropyMeasurement => "entropy_measurement",
            InequalityId::EntropyPreparation => "entropy_preparation",
            InequalityId::DpClassical => "dp_classical",
            InequalityId::DpFunction => "dp_function",
            InequalityId::DpSingleGraph => "dp_single_graph",
            InequalityId::DpMultigraph => "dp_multigraph",
            InequalityId::CondOnClassical => "cond_on_classical",
            InequalityId::CloneMerge => "clone_merge",
            InequalityId::TrinodeCmiZero => "trinode_cmi_zero",
            InequalityId::IsometryTrace => "isometry_trace",
            InequalityId::HolevoIsMi => "holevo_is_mi",
        }
    }

    pub fn from_str(s: &str) -> Result<Self> {
        InequalityId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown check id `{s}`")))
    }

    /// One-line statement of the claim.
    pub fn description(self) -> &'static str {
        match self {
            InequalityId::MiNonneg => "joint entropy is subadditive: S(a,b) <= S(a) + S(b)",
            InequalityId::CmiNonneg => "conditional mutual information is non-negative",
            InequalityId::ArakiLieb => "|S(a) - S(b)| <= S(a,b)",
            InequalityId::CondBounds => {
                "-S(b) <= S(b|a) <= S(b); classically 0 <= H(b|a) <= H(b)"
            }
            InequalityId::UnitalMonotone => "square unital channels cannot decrease entropy",
            InequalityId::FunctionDecrease => {
                "H(f(x)) <= H(x), and f(z) carries no information beyond itself"
            }
            InequalityId::EntropyMeasurement => {
                "dephasing raises entropy and lowers mutual information"
            }
            InequalityId::EntropyPreparation => {
                "mixing weights bound the entropy of an average of pure states"
            }
            InequalityId::DpClassical => "H(c:a) <= H(b:a) along the classical chain a -> b -> c",
            InequalityId::DpFunction => {
                "a deterministic stage only loses information about the ends of the chain"
            }
            InequalityId::DpSingleGraph => {
                "dephased stage information decreases along one compiled chain"
            }
            InequalityId::DpMultigraph => {
                "stage information decreases across isometry-chain reductions"
            }
            InequalityId::CondOnClassical => {
                "conditioning on a dephased subsystem is non-negative and never below the coherent value"
            }
            InequalityId::CloneMerge => {
                "a copied classical index merges without changing entropies"
            }
            InequalityId::TrinodeCmiZero => {
                "the ends of a three-node chain are independent given the dephased middle"
            }
            InequalityId::IsometryTrace => {
                "tracing all outputs of an isometry equals dephasing its input"
            }
            InequalityId::HolevoIsMi => {
                "Holevo information equals the mutual information of the cq embedding"
            }
        }
    }

    /// True for claims verified two-sidedly as exact identities.
    pub fn is_identity(self) -> bool {
        matches!(
            self,
            InequalityId::CloneMerge
                | InequalityId::TrinodeCmiZero
                | InequalityId::IsometryTrace
                | InequalityId::HolevoIsMi
        )
    }

    fn expected_shape(self) -> &'static str {
        match self {
            InequalityId::MiNonneg | InequalityId::ArakiLieb | InequalityId::CondBounds => {
                "a two-subsystem state or a two-variable joint distribution"
            }
            InequalityId::CmiNonneg => {
                "a three-subsystem state or a three-variable joint distribution"
            }
            InequalityId::UnitalMonotone => {
                "a state with a square unital channel, or a distribution with a doubly \
                 stochastic matrix"
            }
            InequalityId::FunctionDecrease => "a distribution with a matching function map",
            InequalityId::EntropyMeasurement | InequalityId::CondOnClassical => {
                "a two-subsystem state"
            }
            InequalityId::EntropyPreparation => "an ensemble of pure states",
            InequalityId::DpClassical => "a distribution with two composable stochastic stages",
            InequalityId::DpFunction => {
                "a distribution with stochastic, deterministic and stochastic stages"
            }
            InequalityId::DpSingleGraph => "a chain with exactly two isometry links",
            InequalityId::DpMultigraph => "a chain with exactly three isometry links",
            InequalityId::CloneMerge | InequalityId::HolevoIsMi => "an ensemble",
            InequalityId::TrinodeCmiZero => {
                "a net with visible nodes `a`, `b` and a dephased node `e`"
            }
            InequalityId::IsometryTrace => "a chain with at least one isometry link",
        }
    }
}

impl std::fmt::Display for InequalityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Concrete object a checker runs on.
#[derive(Clone, Debug)]
pub enum Instance {
    /// Multipartite density matrix.
    State(LabeledState),
    /// State plus a channel aimed at one of its subsystems.
    StateChannel {
        state: LabeledState,
        channel: KrausChannel,
        target: String,
    },
    /// Classical joint distribution.
    Classical(JointDist),
    /// Distribution plus a transition matrix.
    DistChannel {
        dist: ProbDist,
        transition: StochasticMatrix,
    },
    /// Distribution plus a deterministic function on its outcomes.
    Function { dist: ProbDist, f: FunctionMap },
    /// Classical chain `a → x → y=f(x) → b`.
    FunctionChain {
        source: ProbDist,
        pre: StochasticMatrix,
        f: FunctionMap,
        post: StochasticMatrix,
    },
    /// Classical chain `a → b → c`.
    ClassicalChain {
        source: ProbDist,
        t1: StochasticMatrix,
        t2: StochasticMatrix,
    },
    /// Isometry chain: root amplitudes on `a`, a first-stage table
    /// `A(b|a)`, then isometry links.
    Chain {
        a_dim: usize,
        b_dim: usize,
        root: Vec<Complex64>,
        first: Vec<Complex64>,
        links: Vec<ChainLink>,
    },
    /// Arbitrary amplitude network.
    Net(QBNet),
    /// Weighted ensemble of states.
    Ensemble(Ensemble),
}

impl Instance {
    /// Subsystem dimensions recorded in verdict fingerprints.
    pub fn dims(&self) -> Vec<usize> {
        match self {
            Instance::State(s) => s.layout().dims(),
            Instance::StateChannel { state, channel, .. } => {
                let mut d = state.layout().dims();
                d.push(channel.out_dim());
                d
            }
            Instance::Classical(p) => p.layout().dims(),
            Instance::DistChannel { dist, transition } => {
                vec![dist.len(), transition.out_dim()]
            }
            Instance::Function { dist, f } => vec![dist.len(), f.out_dim],
            Instance::FunctionChain {
                source,
                pre,
                f,
                post,
            } => vec![source.len(), pre.out_dim(), f.out_dim, post.out_dim()],
            Instance::ClassicalChain { source, t1, t2 } => {
                vec![source.len(), t1.out_dim(), t2.out_dim()]
            }
            Instance::Chain {
                a_dim,
                b_dim,
                links,
                ..
            } => {
                let mut d = vec![*a_dim, *b_dim];
                for l in links {
                    d.push(l.b_dim);
                    d.push(l.e_dim);
                }
                d
            }
            Instance::Net(net) => net.nodes().iter().map(|n| n.dim()).collect(),
            Instance::Ensemble(e) => {
                let mut d = e.states()[0].layout().dims();
                d.push(e.len());
                d
            }
        }
    }
}

fn shape_err(id: InequalityId) -> Error {
    Error::InstanceShape {
        id: id.as_str().into(),
        expected: id.expected_shape().into(),
    }
}

fn plain_shannon(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > SPECTRUM_CLIP)
        .map(|p| -p * p.ln())
        .sum()
}

/// First `n` labels of a layout, or a shape error for the given id.
fn role_labels(id: InequalityId, layout: &SubsystemLayout, n: usize) -> Result<Vec<String>> {
    if layout.len() != n {
        return Err(shape_err(id));
    }
    Ok(layout.labels().iter().map(|l| l.to_string()).collect())
}

/// Monotonicity of relative entropy under a stochastic map: compares
/// `D(Tp‖Tq)` against `D(p‖q)`.  An infinite right side passes
/// automatically; two equal infinities count as margin zero.
pub fn check_mre_classical(
    t: &StochasticMatrix,
    p: &ProbDist,
    q: &ProbDist,
) -> Result<CheckVerdict> {
    if p.len() != t.in_dim() || q.len() != t.in_dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("distributions of dimension {}", t.in_dim()),
            found: format!("{} and {}", p.len(), q.len()),
        });
    }
    let lhs = classical_relative_entropy(&t.apply(p)?, &t.apply(q)?)?;
    let rhs = classical_relative_entropy(p, q)?;
    Ok(CheckVerdict::inequality(
        "mre_classical",
        lhs,
        rhs,
        0,
        vec![t.in_dim(), t.out_dim()],
    ))
}

/// Monotonicity of relative entropy under a channel: compares
/// `D(T(ρ)‖T(σ))` against `D(ρ‖σ)`.  The channel acts on the whole state.
pub fn check_mre_quantum(
    c: &KrausChannel,
    rho: &LabeledState,
    sigma: &LabeledState,
) -> Result<CheckVerdict> {
    if rho.layout() != sigma.layout() {
        return Err(Error::ShapeMismatch {
            expected: "states on the same layout".into(),
            found: "differing layouts".into(),
        });
    }
    if c.in_dim() != rho.total_dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("channel input dimension {}", rho.total_dim()),
            found: format!("{}", c.in_dim()),
        });
    }
    // The channel consumes every subsystem at once, so flatten the layout
    // to a single factor before applying it.
    let flat = |s: &LabeledState| -> Result<LabeledState> {
        Ok(LabeledState::trusted(
            SubsystemLayout::single("s", s.total_dim())?,
            s.matrix().clone(),
        ))
    };
    let t_rho = c.apply(&flat(rho)?, "s")?;
    let t_sigma = c.apply(&flat(sigma)?, "s")?;
    let lhs = quantum_relative_entropy(&t_rho, &t_sigma)?;
    let rhs = quantum_relative_entropy(rho, sigma)?;
    Ok(CheckVerdict::inequality(
        "mre_quantum",
        lhs,
        rhs,
        0,
        vec![c.in_dim(), c.out_dim()],
    ))
}

/// Runs the checker registered under `id` on `instance`.
pub fn check_entropic(id: InequalityId, instance: &Instance) -> Result<CheckVerdict> {
    let dims = instance.dims();
    let name = id.as_str();
    match (id, instance) {
        (InequalityId::MiNonneg, Instance::State(rho)) => {
            let labels = role_labels(id, rho.layout(), 2)?;
            let (a, b) = (labels[0].as_str(), labels[1].as_str());
            let lhs = quantum_entropy(&Quantity::joint(&[a, b]), rho)?;
            let rhs = quantum_entropy(&Quantity::joint(&[a]), rho)?
                + quantum_entropy(&Quantity::joint(&[b]), rho)?;
            Ok(CheckVerdict::inequality(name, lhs, rhs, 0, dims))
        }
        (InequalityId::MiNonneg, Instance::Classical(p)) => {
            let labels = role_labels(id, p.layout(), 2)?;
            let (a, b) = (labels[0].as_str(), labels[1].as_str());
            let lhs = classical_entropy(&Quantity::joint(&[a, b]), p)?;
            let rhs = classical_entropy(&Quantity::joint(&[a]), p)?
                + classical_entropy(&Quantity::joint(&[b]), p)?;
            Ok(CheckVerdict::inequality(name, lhs, rhs, 0, dims))
        }
        (InequalityId::CmiNonneg, Instance::State(rho)) => {
            let labels = role_labels(id, rho.layout(), 3)?;
            let q = Quantity::cond_mutual(&[&labels[0]], &[&labels[1]], &[&labels[2]]);
            let rhs = quantum_entropy(&q, rho)?;
            Ok(CheckVerdict::inequality(name, 0.0, rhs, 0, dims))
        }
        (InequalityId::CmiNonneg, Instance::Classical(p)) => {
            let labels = role_labels(id, p.layout(), 3)?;
            let q = Quantity::cond_mutual(&[&labels[0]], &[&labels[1]], &[&labels[2]]);
            let rhs = classical_entropy(&q, p)?;
            Ok(CheckVerdict::inequality(name, 0.0, rhs, 0, dims))
        }
        (InequalityId::ArakiLieb, Instance::State(rho)) => {
            let labels = role_labels(id, rho.layout(), 2)?;
            let (a, b) = (labels[0].as_str(), labels[1].as_str());
            let sa = quantum_entropy(&Quantity::joint(&[a]), rho)?;
            let sb = quantum_entropy(&Quantity::joint(&[b]), rho)?;
            let sab = quantum_entropy(&Quantity::joint(&[a, b]), rho)?;
            Ok(CheckVerdict::inequality(name, (sa - sb).abs(), sab, 0, dims))
        }
        (InequalityId::ArakiLieb, Instance::Classical(p)) => {
            let labels = role_labels(id, p.layout(), 2)?;
            let (a, b) = (labels[0].as_str(), labels[1].as_str());
            let ha = classical_entropy(&Quantity::joint(&[a]), p)?;
            let hb = classical_entropy(&Quantity::joint(&[b]), p)?;
            let hab = classical_entropy(&Quantity::joint(&[a, b]), p)?;
            Ok(CheckVerdict::inequality(name, (ha - hb).abs(), hab, 0, dims))
        }
        (InequalityId::CondBounds, Instance::State(rho)) => {
            let labels = role_labels(id, rho.layout(), 2)?;
            let (a, b) = (labels[0].as_str(), labels[1].as_str());
            let sb = quantum_entropy(&Quantity::joint(&[b]), rho)?;
            let cond = quantum_entropy(&Quantity::conditional(&[b], &[a]), rho)?;
            Ok(CheckVerdict::worst(
                name,
                vec![
                    CheckVerdict::inequality(name, -sb, cond, 0, dims.clone()),
                    CheckVerdict::inequality(name, cond, sb, 0, dims),
                ],
            ))
        }
        (InequalityId::CondBounds, Instance::Classical(p)) => {
            let labels = role_labels(id, p.layout(), 2)?;
            let (a, b) = (labels[0].as_str(), labels[1].as_str());
            let hb = classical_entropy(&Quantity::joint(&[b]), p)?;
            let cond = classical_entropy(&Quantity::conditional(&[b], &[a]), p)?;
            Ok(CheckVerdict::worst(
                name,
                vec![
                    CheckVerdict::inequality(name, 0.0, cond, 0, dims.clone()),
                    CheckVerdict::inequality(name, cond, hb, 0, dims),
                ],
            ))
        }
        (
            InequalityId::UnitalMonotone,
            Instance::StateChannel {
                state,
                channel,
                target,
            },
        ) => {
            if channel.in_dim() != channel.out_dim() || !channel.is_unital()? {
                return Err(shape_err(id));
            }
            if state.layout().dim_of(target)? != channel.in_dim() {
                return Err(shape_err(id));
            }
            let lhs = crate::entropy::von_neumann(state);
            let rhs = crate::entropy::von_neumann(&channel.apply(state, target)?);
            Ok(CheckVerdict::inequality(name, lhs, rhs, 0, dims))
        }
        (InequalityId::UnitalMonotone, Instance::DistChannel { dist, transition }) => {
            if transition.in_dim() != transition.out_dim()
                || transition.row_sum_deviation() > crate::tensor::STATE_TOL
            {
                return Err(shape_err(id));
            }
            let lhs = dist.entropy();
            let rhs = transition.apply(dist)?.entropy();
            Ok(CheckVerdict::inequality(name, lhs, rhs, 0, dims))
        }
        (InequalityId::FunctionDecrease, Instance::Function { dist, f }) => {
            if f.map.len() != dist.len() {
                return Err(shape_err(id));
            }
            let image = f.to_stochastic().apply(dist)?;
            let main = CheckVerdict::inequality(
                name,
                image.entropy(),
                dist.entropy(),
                0,
                dims.clone(),
            );
            // Side identity: pairing f(z) with z adds nothing beyond f(z).
            let layout = SubsystemLayout::new(vec![("z", dist.len()), ("y", f.out_dim)])?;
            let joint = JointDist::from_fn(layout, |d| {
                if f.map[d[0]] == d[1] {
                    dist.probs()[d[0]]
                } else {
                    0.0
                }
            })?;
            let mi = classical_entropy(&Quantity::mutual(&["y"], &["z"]), &joint)?;
            let side = CheckVerdict::identity(name, mi, image.entropy(), 0, dims);
            Ok(CheckVerdict::lead(name, main, vec![side]))
        }
        (InequalityId::EntropyMeasurement, Instance::State(rho)) => {
            let labels = role_labels(id, rho.layout(), 2)?;
            let (a, b) = (labels[0].as_str(), labels[1].as_str());
            let n = rho.total_dim();
            let diag = (0..n).map(|i| rho.matrix()[(i, i)].re.max(0.0));
            let s_rho = crate::entropy::von_neumann(rho);
            let dephased = classicize(rho, a)?;
            let mi = |state: &LabeledState| quantum_entropy(&Quantity::mutual(&[b], &[a]), state);
            Ok(CheckVerdict::worst(
                name,
                vec![
                    CheckVerdict::inequality(name, s_rho, plain_shannon(diag), 0, dims.clone()),
                    CheckVerdict::inequality(
                        name,
                        s_rho,
                        crate::entropy::von_neumann(&dephased),
                        0,
                        dims.clone(),
                    ),
                    CheckVerdict::inequality(name, mi(&dephased)?, mi(rho)?, 0, dims),
                ],
            ))
        }
        (InequalityId::EntropyPreparation, Instance::Ensemble(e)) => {
            for s in e.states() {
                let top = s.eigenvalues().last().copied().unwrap_or(0.0);
                if (top - 1.0).abs() > CHECK_TOL {
                    return Err(shape_err(id));
                }
            }
            let lhs = crate::entropy::von_neumann(&e.average_state());
            let rhs = plain_shannon(e.weights().iter().copied());
            Ok(CheckVerdict::inequality(name, lhs, rhs, 0, dims))
        }
        (InequalityId::DpClassical, Instance::ClassicalChain { source, t1, t2 }) => {
            if t1.in_dim() != source.len() || t2.in_dim() != t1.out_dim() {
                return Err(shape_err(id));
            }
            let layout = SubsystemLayout::new(vec![
                ("a", source.len()),
                ("b", t1.out_dim()),
                ("c", t2.out_dim()),
            ])?;
            let joint = JointDist::from_fn(layout, |d| {
                source.probs()[d[0]] * t1.get(d[1], d[0]) * t2.get(d[2], d[1])
            })?;
            let lhs = classical_entropy(&Quantity::mutual(&["c"], &["a"]), &joint)?;
            let rhs = classical_entropy(&Quantity::mutual(&["b"], &["a"]), &joint)?;
            Ok(CheckVerdict::inequality(name, lhs, rhs, 0, dims))
        }
        (
            InequalityId::DpFunction,
            Instance::FunctionChain {
                source,
                pre,
                f,
                post,
            },
        ) => {
            if pre.in_dim() != source.len()
                || f.map.len() != pre.out_dim()
                || post.in_dim() != f.out_dim
            {
                return Err(shape_err(id));
            }
            let layout = SubsystemLayout::new(vec![
                ("a", source.len()),
                ("x", pre.out_dim()),
                ("y", f.out_dim),
                ("b", post.out_dim()),
            ])?;
            let joint = JointDist::from_fn(layout, |d| {
                if f.map[d[1]] != d[2] {
                    return 0.0;
                }
                source.probs()[d[0]] * pre.get(d[1], d[0]) * post.get(d[3], d[2])
            })?;
            let h = |q: Quantity| classical_entropy(&q, &joint);
            Ok(CheckVerdict::worst(
                name,
                vec![
                    CheckVerdict::inequality(
                        name,
                        h(Quantity::mutual(&["y"], &["a"]))?,
                        h(Quantity::mutual(&["x"], &["a"]))?,
                        0,
                        dims.clone(),
                    ),
                    CheckVerdict::inequality(
                        name,
                        h(Quantity::mutual(&["b"], &["x"]))?,
                        h(Quantity::mutual(&["b"], &["y"]))?,
                        0,
                        dims,
                    ),
                ],
            ))
        }
        (InequalityId::DpSingleGraph, Instance::Chain { links, .. }) => {
            if links.len() != 2 {
                return Err(shape_err(id));
            }
            let (state, stages) = compile_chain_prefix(instance, id, 2, &[Marking::Visible; 3])?;
            let mi_dephased = |label: &str| -> Result<f64> {
                let reduced = state.partial_trace(&["a", label])?;
                let cl = classicize(&reduced, label)?;
                quantum_entropy(&Quantity::mutual(&[label], &["a"]), &cl)
            };
            let m: Vec<f64> = stages
                .iter()
                .map(|s| mi_dephased(s))
                .collect::<Result<_>>()?;
            Ok(CheckVerdict::worst(
                name,
                vec![
                    CheckVerdict::inequality(name, m[2], m[1], 0, dims.clone()),
                    CheckVerdict::inequality(name, m[1], m[0], 0, dims),
                ],
            ))
        }
        (InequalityId::DpMultigraph, Instance::Chain { links, .. }) => {
            if links.len() != 3 {
                return Err(shape_err(id));
            }
            let mut mis = Vec::new();
            for j in 1..=3 {
                let mut markings = vec![Marking::Slashed; j];
                markings.push(Marking::Visible);
                let (state, stages) = compile_chain_prefix(instance, id, j, &markings)?;
                let last = stages.last().expect("chain has stages");
                mis.push(quantum_entropy(
                    &Quantity::mutual(&[last.as_str()], &["a"]),
                    &state,
                )?);
            }
            Ok(CheckVerdict::worst(
                name,
                vec![
                    CheckVerdict::inequality(name, mis[2], mis[1], 0, dims.clone()),
                    CheckVerdict::inequality(name, mis[1], mis[0], 0, dims),
                ],
            ))
        }
        (InequalityId::CondOnClassical, Instance::State(rho)) => {
            let labels = role_labels(id, rho.layout(), 2)?;
            let (a, b) = (labels[0].as_str(), labels[1].as_str());
            let dephased = classicize(rho, a)?;
            let q = Quantity::conditional(&[b], &[a]);
            let cond_cl = quantum_entropy(&q, &dephased)?;
            let cond = quantum_entropy(&q, rho)?;
            Ok(CheckVerdict::worst(
                name,
                vec![
                    CheckVerdict::inequality(name, 0.0, cond_cl, 0, dims.clone()),
                    CheckVerdict::inequality(name, cond, cond_cl, 0, dims),
                ],
            ))
        }
        (InequalityId::CloneMerge, Instance::Ensemble(e)) => {
            let (state, copy_label) = clone_state(e)?;
            let q_labels: Vec<String> = e.states()[0]
                .layout()
                .labels()
                .iter()
                .map(|l| l.to_string())
                .collect();
            let a = e.class_label();
            let a2 = copy_label.as_str();
            let s = |extra: &[&str]| -> Result<f64> {
                let mut group: Vec<&str> = q_labels.iter().map(String::as_str).collect();
                group.extend_from_slice(extra);
                quantum_entropy(&Quantity::joint(&group), &state)
            };
            let marg = |group: &[&str]| quantum_entropy(&Quantity::joint(group), &state);
            let s_all = s(&[a, a2])?;
            let s_ba = s(&[a])?;
            let s_ba2 = s(&[a2])?;
            let s_a = marg(&[a])?;
            let s_a2 = marg(&[a2])?;
            let s_aa2 = marg(&[a, a2])?;
            let parts = vec![
                CheckVerdict::identity(name, s_all, s_ba, 0, dims.clone()),
                CheckVerdict::identity(name, s_all, s_ba2, 0, dims.clone()),
                CheckVerdict::identity(name, s_all - s_a2, s_ba - s_a, 0, dims.clone()),
                CheckVerdict::identity(name, s_all - s_a2, s_ba2 - s_a2, 0, dims.clone()),
                CheckVerdict::identity(name, s_aa2, s_a, 0, dims.clone()),
                CheckVerdict::identity(name, s_a + s_a2 - s_aa2, s_a, 0, dims),
            ];
            Ok(CheckVerdict::worst(name, parts))
        }
        (InequalityId::TrinodeCmiZero, Instance::Net(net)) => {
            for (label, want) in [
                ("a", Marking::Visible),
                ("b", Marking::Visible),
                ("e", Marking::Classical),
            ] {
                match net.node(label) {
                    Some(n) if n.marking() == want => {}
                    _ => return Err(shape_err(id)),
                }
            }
            let state = net.compile_density()?;
            let cmi = quantum_entropy(&Quantity::cond_mutual(&["a"], &["b"], &["e"]), &state)?;
            Ok(CheckVerdict::identity(name, cmi, 0.0, 0, dims))
        }
        (InequalityId::IsometryTrace, Instance::Chain { links, .. }) => {
            if links.is_empty() {
                return Err(shape_err(id));
            }
            let (traced, _) =
                compile_chain_prefix(instance, id, 1, &[Marking::Visible, Marking::Traced])?;
            let (dephased, _) = compile_chain_prefix(instance, id, 0, &[Marking::Classical])?;
            let lhs = crate::entropy::von_neumann(&traced);
            let rhs = crate::entropy::von_neumann(&dephased);
            Ok(CheckVerdict::identity(name, lhs, rhs, 0, dims))
        }
        (InequalityId::HolevoIsMi, Instance::Ensemble(e)) => {
            let lhs = holevo_information(e)?;
            let cq = cq_state(e)?;
            let q_labels: Vec<String> = e.states()[0]
                .layout()
                .labels()
                .iter()
                .map(|l| l.to_string())
                .collect();
            let group: Vec<&str> = q_labels.iter().map(String::as_str).collect();
            let rhs = quantum_entropy(&Quantity::mutual(&group, &[e.class_label()]), &cq)?;
            Ok(CheckVerdict::identity(name, lhs, rhs, 0, dims))
        }
        _ => Err(shape_err(id)),
    }
}

/// Compiles the first `take` links of a chain instance with the given
/// stage markings; returns the state and the stage labels `b, b1, ...`.
fn compile_chain_prefix(
    instance: &Instance,
    id: InequalityId,
    take: usize,
    markings: &[Marking],
) -> Result<(LabeledState, Vec<String>)> {
    let Instance::Chain {
        a_dim,
        b_dim,
        root,
        first,
        links,
    } = instance
    else {
        return Err(shape_err(id));
    };
    let net = build_chain_net(
        *a_dim,
        *b_dim,
        root.clone(),
        first.clone(),
        &links[..take],
        markings,
    )?;
    let state = net.compile_density()?;
    let mut stages = vec!["b".to_string()];
    for k in 1..=take {
        stages.push(format!("b{k}"));
    }
    Ok((state, stages))
}

/// Builds `Σ_x w_x ρ_x ⊗ |x⟩⟨x| ⊗ |x⟩⟨x|` with a duplicated classical
/// index; returns the state and the duplicate's label.
fn clone_state(e: &Ensemble) -> Result<(LabeledState, String)> {
    let q_layout = e.states()[0].layout().clone();
    let nq = q_layout.total_dim();
    let nx = e.len();
    let mut copy = format!("{}p", e.class_label());
    while q_layout.position(&copy).is_ok() || copy == e.class_label() {
        copy.push('p');
    }
    let mut entries: Vec<(String, usize)> = q_layout
        .entries()
        .iter()
        .map(|(l, d)| (l.clone(), *d))
        .collect();
    entries.push((e.class_label().to_string(), nx));
    entries.push((copy.clone(), nx));
    let layout = SubsystemLayout::new(entries)?;
    let n = nq * nx * nx;
    let mut m = ComplexMatrix::zeros(n, n);
    for (x, (w, s)) in e.weights().iter().zip(e.states()).enumerate() {
        for i in 0..nq {
            for j in 0..nq {
                m[((i * nx + x) * nx + x, (j * nx + x) * nx + x)] =
                    s.matrix()[(i, j)] * *w;
            }
        }
    }
    Ok((LabeledState::trusted(layout, m), copy))
}

/// The three stock situations in which a naive merging or independence
/// claim fails.  Every verdict is expected to report `holds = false`;
/// the margins measure how badly the naive claim misses.
pub fn counterexample_suite() -> Vec<CheckVerdict> {
    let half = Complex64::new(0.5, 0.0);
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let zero = Complex64::new(0.0, 0.0);

    // Maximally entangled pair: the diagonal-matching condition holds but
    // the joint entropy is 0 while each marginal carries ln 2.
    let bell = [r, zero, zero, r];
    let pair = LabeledState::trusted(
        SubsystemLayout::new(vec![("a", 2), ("ap", 2)]).expect("small layout"),
        ComplexMatrix::outer(&bell),
    );
    let s_aa = crate::entropy::von_neumann(&pair);
    let s_a = quantum_entropy(&Quantity::joint(&["a"]), &pair).expect("valid label");
    let entangled =
        CheckVerdict::identity("counterexample_entangled_clone", s_aa, s_a, 0, vec![2, 2]);

    // Tri-partite pure state with matched copies: globally pure, yet the
    // two-subsystem reduction is maximally mixed on the copy index.
    let mut ket = vec![zero; 8];
    for b in 0..2 {
        for a in 0..2 {
            ket[(b * 2 + a) * 2 + a] = half;
        }
    }
    let triple = LabeledState::trusted(
        SubsystemLayout::new(vec![("b", 2), ("a", 2), ("ap", 2)]).expect("small layout"),
        ComplexMatrix::outer(&ket),
    );
    let s_baa = crate::entropy::von_neumann(&triple);
    let s_ba = quantum_entropy(&Quantity::joint(&["b", "a"]), &triple).expect("valid labels");
    let pure_merge =
        CheckVerdict::identity("counterexample_pure_merge", s_baa, s_ba, 0, vec![2, 2, 2]);

    // Classical collider: two fair bits and their parity.  Conditioned on
    // the parity the ends are perfectly correlated, not independent.
    let mut parity = vec![zero; 8];
    for a in 0..2 {
        for b in 0..2 {
            parity[(a ^ b) * 4 + a * 2 + b] = Complex64::new(1.0, 0.0);
        }
    }
    let net = QBNet::new(vec![
        Node::root("a", 2, vec![r, r], Marking::Classical),
        Node::root("b", 2, vec![r, r], Marking::Classical),
        Node::new("e", 2, &["a", "b"], parity, Marking::Classical),
    ])
    .expect("valid collider net");
    let state = net.compile_density().expect("compiles");
    let cmi = quantum_entropy(&Quantity::cond_mutual(&["a"], &["b"], &["e"]), &state)
        .expect("valid labels");
    let collider =
        CheckVerdict::identity("counterexample_classical_collider", cmi, 0.0, 0, vec![2, 2, 2]);

    vec![entangled, pure_merge, collider]
}

/// Builds a seeded random instance with the shape `id` expects.  `dims`
/// gives per-subsystem dimensions; missing entries repeat the last one
/// (default 2).  Ids with both quantum and classical forms alternate on
/// the seed's parity.
pub fn random_instance(id: InequalityId, dims: &[usize], seed: u64) -> Result<Instance> {
    let d = |i: usize| -> usize {
        dims.get(i)
            .copied()
            .unwrap_or_else(|| dims.last().copied().unwrap_or(2))
    };
    for (i, &x) in dims.iter().enumerate() {
        if x == 0 {
            return Err(Error::InvalidParameter(format!("dims[{i}] is 0")));
        }
    }
    let s = |k: u64| trial_seed(seed, k);
    match id {
        InequalityId::MiNonneg | InequalityId::ArakiLieb | InequalityId::CondBounds => {
            random_bipartite(d(0), d(1), seed)
        }
        InequalityId::CmiNonneg => {
            let layout =
                SubsystemLayout::new(vec![("a", d(0)), ("b", d(1)), ("e", d(2))])?;
            if seed % 2 == 0 {
                let total = layout.total_dim();
                let rank = Rng::new(s(2)).below(total) + 1;
                Ok(Instance::State(random_density_matrix(&layout, rank, s(1))?))
            } else {
                let probs = random_dist(layout.total_dim(), s(1));
                Ok(Instance::Classical(JointDist::new(
                    layout,
                    probs.probs().to_vec(),
                )?))
            }
        }
        InequalityId::EntropyMeasurement | InequalityId::CondOnClassical => {
            let layout = SubsystemLayout::new(vec![("a", d(0)), ("b", d(1))])?;
            let total = layout.total_dim();
            let rank = Rng::new(s(2)).below(total) + 1;
            Ok(Instance::State(random_density_matrix(&layout, rank, s(1))?))
        }
        InequalityId::UnitalMonotone => {
            let n = d(0);
            if seed % 2 == 0 {
                let layout = SubsystemLayout::single("a", n)?;
                let rank = Rng::new(s(2)).below(n) + 1;
                let terms = 2 + Rng::new(s(3)).below(3);
                Ok(Instance::StateChannel {
                    state: random_density_matrix(&layout, rank, s(1))?,
                    channel: random_mixed_unitary_channel(n, terms, s(4)),
                    target: "a".into(),
                })
            } else {
                Ok(Instance::DistChannel {
                    dist: random_dist(n, s(1)),
                    transition: random_doubly_stochastic(n, s(2)),
                })
            }
        }
        InequalityId::FunctionDecrease => Ok(Instance::Function {
            dist: random_dist(d(0), s(1)),
            f: random_function(d(0), d(1), s(2)),
        }),
        InequalityId::EntropyPreparation => Ok(Instance::Ensemble(random_ensemble(
            d(0),
            d(1).max(2),
            1,
            s(1),
        )?)),
        InequalityId::DpClassical => Ok(Instance::ClassicalChain {
            source: random_dist(d(0), s(1)),
            t1: random_stochastic(d(1), d(0), s(2)),
            t2: random_stochastic(d(2), d(1), s(3)),
        }),
        InequalityId::DpFunction => Ok(Instance::FunctionChain {
            source: random_dist(d(0), s(1)),
            pre: random_stochastic(d(1), d(0), s(2)),
            f: random_function(d(1), d(2), s(3)),
            post: random_stochastic(d(3), d(2), s(4)),
        }),
        InequalityId::DpSingleGraph => random_chain(d(0), d(1), d(2), 2, seed),
        InequalityId::DpMultigraph => random_chain(d(0), d(1), d(2), 3, seed),
        InequalityId::IsometryTrace => random_chain(d(0), d(1), d(2), 1, seed),
        InequalityId::CloneMerge => {
            let rank = Rng::new(s(2)).below(d(1)) + 1;
            Ok(Instance::Ensemble(random_ensemble(
                d(1),
                d(0).max(2),
                rank,
                s(1),
            )?))
        }
        InequalityId::TrinodeCmiZero => Ok(Instance::Net(random_trinode_net(
            d(0),
            d(1),
            d(2),
            seed % 2 == 1,
            seed,
        )?)),
        InequalityId::HolevoIsMi => {
            let rank = Rng::new(s(2)).below(d(0)) + 1;
            Ok(Instance::Ensemble(random_ensemble(
                d(0),
                d(1).max(2),
                rank,
                s(1),
            )?))
        }
    }
}

fn random_bipartite(da: usize, db: usize, seed: u64) -> Result<Instance> {
    let layout = SubsystemLayout::new(vec![("a", da), ("b", db)])?;
    if seed % 2 == 0 {
        let total = layout.total_dim();
        let rank = Rng::new(trial_seed(seed, 2)).below(total) + 1;
        Ok(Instance::State(random_density_matrix(
            &layout,
            rank,
            trial_seed(seed, 1),
        )?))
    } else {
        let probs = random_dist(layout.total_dim(), trial_seed(seed, 1));
        Ok(Instance::Classical(JointDist::new(
            layout,
            probs.probs().to_vec(),
        )?))
    }
}

fn random_chain(
    a_dim: usize,
    b_dim: usize,
    e_dim: usize,
    n_links: usize,
    seed: u64,
) -> Result<Instance> {
    let root = random_ket(a_dim, trial_seed(seed, 1));
    let mut rng = Rng::new(trial_seed(seed, 2));
    let first: Vec<Complex64> = (0..b_dim * a_dim).map(|_| rng.complex_gaussian()).collect();
    let mut links = Vec::with_capacity(n_links);
    for k in 0..n_links {
        let v = random_isometry(b_dim * e_dim, b_dim, trial_seed(seed, 3 + k as u64))?;
        let amplitudes = (0..v.rows())
            .flat_map(|r| (0..v.cols()).map(move |c| (r, c)))
            .map(|(r, c)| v[(r, c)])
            .collect();
        links.push(ChainLink {
            amplitudes,
            b_dim,
            e_dim,
        });
    }
    Ok(Instance::Chain {
        a_dim,
        b_dim,
        root,
        first,
        links,
    })
}

/// Random three-node net with traced two-dimensional ancillas hanging off
/// every named node; `markov` selects the directed chain `b → e → a`
/// instead of the fork `a ← e → b`.
fn random_trinode_net(
    a_dim: usize,
    b_dim: usize,
    e_dim: usize,
    markov: bool,
    seed: u64,
) -> Result<QBNet> {
    let g = 2usize;
    let mut rng = Rng::new(trial_seed(seed, 4));
    let mut table = |n: usize| -> Vec<Complex64> {
        (0..n).map(|_| rng.complex_gaussian()).collect()
    };
    let alpha0 = Node::root("alpha0", g, random_ket(g, trial_seed(seed, 1)), Marking::Traced);
    let eps0 = Node::root("eps0", g, random_ket(g, trial_seed(seed, 2)), Marking::Traced);
    let beta0 = Node::root("beta0", g, random_ket(g, trial_seed(seed, 3)), Marking::Traced);
    let mut nodes = vec![alpha0, eps0, beta0];
    if markov {
        nodes.push(Node::new(
            "b",
            b_dim,
            &["beta0"],
            table(b_dim * g),
            Marking::Visible,
        ));
        nodes.push(Node::new(
            "e",
            e_dim,
            &["b", "eps0"],
            table(e_dim * b_dim * g),
            Marking::Classical,
        ));
        nodes.push(Node::new(
            "a",
            a_dim,
            &["e", "alpha0"],
            table(a_dim * e_dim * g),
            Marking::Visible,
        ));
    } else {
        nodes.push(Node::new(
            "e",
            e_dim,
            &["eps0"],
            table(e_dim * g),
            Marking::Classical,
        ));
        nodes.push(Node::new(
            "a",
            a_dim,
            &["e", "alpha0"],
            table(a_dim * e_dim * g),
            Marking::Visible,
        ));
        nodes.push(Node::new(
            "b",
            b_dim,
            &["e", "beta0"],
            table(b_dim * e_dim * g),
            Marking::Visible,
        ));
    }
    nodes.push(Node::new("alpha1", g, &["a"], table(g * a_dim), Marking::Traced));
    nodes.push(Node::new("eps1", g, &["e"], table(g * e_dim), Marking::Traced));
    nodes.push(Node::new("beta1", g, &["b"], table(g * b_dim), Marking::Traced));
    QBNet::new(nodes)
}

/// Result of sweeping one checker over many seeded trials.
#[derive(Clone, Debug, Serialize)]
pub struct BatchResult {
    pub id: String,
    pub verdicts: Vec<CheckVerdict>,
    pub pass_count: usize,
    #[serde(with = "extended_real")]
    pub min_margin: f64,
}

impl BatchResult {
    pub fn all_hold(&self) -> bool {
        self.pass_count == self.verdicts.len()
    }
}

/// Runs `trials` seeded checks of `id` in parallel.  Trial `i` uses the
/// derived seed `trial_seed(base_seed, i)`, so results are reproducible
/// and independent of scheduling.
pub fn run_batch(
    id: InequalityId,
    trials: usize,
    dims: &[usize],
    base_seed: u64,
) -> Result<BatchResult> {
    let verdicts: Vec<CheckVerdict> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(base_seed, i as u64);
            let instance = random_instance(id, dims, s)?;
            Ok(check_entropic(id, &instance)?.with_seed(s))
        })
        .collect::<Result<Vec<_>>>()?;
    let pass_count = verdicts.iter().filter(|v| v.holds()).count();
    let min_margin = verdicts
        .iter()
        .map(|v| v.margin())
        .fold(f64::INFINITY, f64::min);
    Ok(BatchResult {
        id: id.as_str().into(),
        verdicts,
        pass_count,
        min_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::von_neumann;
    use crate::random::{random_density_matrix, random_unitary};
    use crate::tensor::kron;

    const LN2: f64 = std::f64::consts::LN_2;
    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell_state() -> LabeledState {
        let ket = [c(R), c(0.0), c(0.0), c(R)];
        LabeledState::trusted(
            SubsystemLayout::new(vec![("a", 2), ("b", 2)]).unwrap(),
            ComplexMatrix::outer(&ket),
        )
    }

    #[test]
    fn araki_lieb_is_tight_on_bell_pair() {
        let v = check_entropic(InequalityId::ArakiLieb, &Instance::State(bell_state())).unwrap();
        assert!(v.holds());
        assert!(v.lhs().abs() < 1e-9 && v.rhs().abs() < 1e-9);
        assert!(v.margin().abs() < 1e-9);

        let mi = check_entropic(InequalityId::MiNonneg, &Instance::State(bell_state())).unwrap();
        assert!(mi.holds());
        assert!((mi.margin() - 2.0 * LN2).abs() < 1e-9);
    }

    #[test]
    fn product_state_mutual_information_margin_vanishes() {
        let a = random_density_matrix(&SubsystemLayout::single("a", 2).unwrap(), 2, 5).unwrap();
        let b = random_density_matrix(&SubsystemLayout::single("b", 3).unwrap(), 3, 7).unwrap();
        let layout = SubsystemLayout::new(vec![("a", 2), ("b", 3)]).unwrap();
        let product = LabeledState::trusted(layout, kron(a.matrix(), b.matrix()));
        let v = check_entropic(InequalityId::MiNonneg, &Instance::State(product)).unwrap();
        assert!(v.holds());
        assert!(v.margin().abs() < 1e-9, "margin {}", v.margin());
    }

    #[test]
    fn preparation_gap_matches_eigenvalue_oracle() {
        let zero = LabeledState::trusted(
            SubsystemLayout::single("q", 2).unwrap(),
            ComplexMatrix::outer(&[c(1.0), c(0.0)]),
        );
        let plus = LabeledState::trusted(
            SubsystemLayout::single("q", 2).unwrap(),
            ComplexMatrix::outer(&[c(R), c(R)]),
        );
        let e = Ensemble::new(vec![0.5, 0.5], vec![zero, plus], "x").unwrap();
        let v = check_entropic(InequalityId::EntropyPreparation, &Instance::Ensemble(e)).unwrap();
        // Average state (|0><0| + |+><+|)/2 has eigenvalues (1 ± 1/√2)/2.
        let oracle = plain_shannon([(1.0 + R) / 2.0, (1.0 - R) / 2.0]);
        assert!(v.holds());
        assert!((v.lhs() - oracle).abs() < 1e-9);
        assert!((v.lhs() - 0.4165).abs() < 5e-4);
        assert!((v.rhs() - LN2).abs() < 1e-12);
        assert!((v.margin() - (LN2 - oracle)).abs() < 1e-9);
        assert!(v.margin() > 0.27);
    }

    #[test]
    fn mre_classical_identity_forgetting_and_infinities() {
        let ident = StochasticMatrix::from_function(&[0, 1, 2], 3).unwrap();
        let p = ProbDist::from_probs(vec![0.5, 0.3, 0.2]).unwrap();
        let q = ProbDist::from_probs(vec![0.2, 0.5, 0.3]).unwrap();
        let v = check_mre_classical(&ident, &p, &q).unwrap();
        assert!(v.holds());
        assert!(v.margin().abs() < 1e-12);

        let forget = StochasticMatrix::new(
            3,
            3,
            vec![0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.4, 0.4, 0.4],
        )
        .unwrap();
        let v = check_mre_classical(&forget, &p, &q).unwrap();
        assert!(v.holds());
        assert!(v.lhs().abs() < 1e-12);
        assert!((v.rhs() - classical_relative_entropy(&p, &q).unwrap()).abs() < 1e-12);

        // Support violation on the right side only: the claim passes with
        // an infinite margin.
        let q0 = ProbDist::from_probs(vec![0.7, 0.3, 0.0]).unwrap();
        let v = check_mre_classical(&forget, &p, &q0).unwrap();
        assert!(v.holds());
        assert_eq!(v.rhs(), f64::INFINITY);
        assert_eq!(v.margin(), f64::INFINITY);

        // Both sides infinite counts as margin zero.
        let v = check_mre_classical(&ident, &p, &q0).unwrap();
        assert!(v.holds());
        assert_eq!(v.lhs(), f64::INFINITY);
        assert_eq!(v.margin(), 0.0);
    }

    #[test]
    fn mre_quantum_unitary_invariance_and_partial_trace() {
        let layout = SubsystemLayout::single("q", 2).unwrap();
        let rho = random_density_matrix(&layout, 2, 31).unwrap();
        let sigma = random_density_matrix(&layout, 2, 37).unwrap();
        let unitary = KrausChannel::new(vec![random_unitary(2, 11)]).unwrap();
        let v = check_mre_quantum(&unitary, &rho, &sigma).unwrap();
        assert!(v.holds());
        assert!(v.margin().abs() < 1e-8, "margin {}", v.margin());

        // Tracing out `b` maps ρ_ab and ρ_a ⊗ ρ_b to the same reduction,
        // so the verdict reproduces mutual-information non-negativity.
        let ab = SubsystemLayout::new(vec![("a", 2), ("b", 2)]).unwrap();
        let rho_ab = random_density_matrix(&ab, 4, 41).unwrap();
        let rho_a = rho_ab.partial_trace(&["a"]).unwrap();
        let rho_b = rho_ab.partial_trace(&["b"]).unwrap();
        let product = LabeledState::trusted(ab, kron(rho_a.matrix(), rho_b.matrix()));
        let mut k0 = ComplexMatrix::zeros(2, 4);
        let mut k1 = ComplexMatrix::zeros(2, 4);
        for i in 0..2 {
            k0[(i, i * 2)] = c(1.0);
            k1[(i, i * 2 + 1)] = c(1.0);
        }
        let trace_b = KrausChannel::new(vec![k0, k1]).unwrap();
        let v = check_mre_quantum(&trace_b, &rho_ab, &product).unwrap();
        let mi = quantum_entropy(&Quantity::mutual(&["a"], &["b"]), &rho_ab).unwrap();
        assert!(v.holds());
        assert!(v.lhs().abs() < 1e-9);
        assert!((v.rhs() - mi).abs() < 1e-8);
    }

    #[test]
    fn counterexamples_fail_by_the_advertised_gaps() {
        let suite = counterexample_suite();
        assert_eq!(suite.len(), 3);
        assert!(suite.iter().all(|v| !v.holds()));

        let entangled = &suite[0];
        assert_eq!(entangled.id(), "counterexample_entangled_clone");
        assert!(entangled.lhs().abs() < 1e-9);
        assert!((entangled.rhs() - LN2).abs() < 1e-9);
        assert!(entangled.margin() <= -(LN2 - 1e-9));

        let pure_merge = &suite[1];
        assert_eq!(pure_merge.id(), "counterexample_pure_merge");
        assert!(pure_merge.lhs().abs() < 1e-9);
        assert!((pure_merge.rhs() - LN2).abs() < 1e-9);

        let collider = &suite[2];
        assert_eq!(collider.id(), "counterexample_classical_collider");
        assert!((collider.lhs() - LN2).abs() < 1e-9);
        assert!(collider.margin() <= -0.01);
    }

    #[test]
    fn function_decrease_is_tight_exactly_for_bijections() {
        let dist = ProbDist::from_probs(vec![0.5, 0.3, 0.2]).unwrap();
        let perm = FunctionMap {
            map: vec![2, 0, 1],
            out_dim: 3,
        };
        let v = check_entropic(
            InequalityId::FunctionDecrease,
            &Instance::Function {
                dist: dist.clone(),
                f: perm,
            },
        )
        .unwrap();
        assert!(v.holds());
        assert!(v.margin().abs() < 1e-9);

        let squash = FunctionMap {
            map: vec![0, 0, 1],
            out_dim: 2,
        };
        let v = check_entropic(
            InequalityId::FunctionDecrease,
            &Instance::Function { dist, f: squash },
        )
        .unwrap();
        assert!(v.holds());
        assert!(v.margin() > 0.1, "margin {}", v.margin());
    }

    #[test]
    fn permutation_channel_margin_is_exactly_zero() {
        let perm = [1usize, 2, 0];
        let p = ComplexMatrix::from_fn(3, 3, |i, j| {
            if j == perm[i] {
                c(1.0)
            } else {
                c(0.0)
            }
        });
        let channel = KrausChannel::new(vec![p]).unwrap();
        let state =
            random_density_matrix(&SubsystemLayout::single("a", 3).unwrap(), 2, 23).unwrap();
        let v = check_entropic(
            InequalityId::UnitalMonotone,
            &Instance::StateChannel {
                state,
                channel,
                target: "a".into(),
            },
        )
        .unwrap();
        assert!(v.holds());
        assert!(v.margin().abs() < 1e-10, "margin {}", v.margin());
    }

    #[test]
    fn dp_classical_degenerate_stages() {
        let source = random_dist(3, 51);
        let t1 = random_stochastic(3, 3, 52);

        let ident = StochasticMatrix::from_function(&[0, 1, 2], 3).unwrap();
        let v = check_entropic(
            InequalityId::DpClassical,
            &Instance::ClassicalChain {
                source: source.clone(),
                t1: t1.clone(),
                t2: ident,
            },
        )
        .unwrap();
        assert!(v.holds());
        assert!(v.margin().abs() < 1e-9);

        let forget = StochasticMatrix::new(2, 3, vec![0.4, 0.4, 0.4, 0.6, 0.6, 0.6]).unwrap();
        let v = check_entropic(
            InequalityId::DpClassical,
            &Instance::ClassicalChain {
                source,
                t1,
                t2: forget,
            },
        )
        .unwrap();
        assert!(v.holds());
        assert!(v.lhs().abs() < 1e-9);
    }

    #[test]
    fn cond_on_classical_matches_the_mixing_formula() {
        let q = SubsystemLayout::single("q", 2).unwrap();
        let rho0 = random_density_matrix(&q, 2, 61).unwrap();
        let rho1 = random_density_matrix(&q, 2, 62).unwrap();
        let (w0, w1) = (0.3, 0.7);
        let layout = SubsystemLayout::new(vec![("a", 2), ("b", 2)]).unwrap();
        let mut m = ComplexMatrix::zeros(4, 4);
        for (x, (w, r)) in [(w0, &rho0), (w1, &rho1)].iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    m[(x * 2 + i, x * 2 + j)] = r.matrix()[(i, j)] * c(*w);
                }
            }
        }
        let state = LabeledState::trusted(layout, m);
        let v = check_entropic(InequalityId::CondOnClassical, &Instance::State(state)).unwrap();
        let mix = w0 * von_neumann(&rho0) + w1 * von_neumann(&rho1);
        assert!(v.holds());
        assert!((v.rhs() - mix).abs() < 1e-9, "rhs {} vs {}", v.rhs(), mix);
    }

    #[test]
    fn every_registered_check_holds_on_random_instances() {
        for (k, id) in InequalityId::ALL.into_iter().enumerate() {
            for seed in [100 + k as u64, 201 + k as u64] {
                let instance = random_instance(id, &[2, 2, 2], seed).unwrap();
                let v = check_entropic(id, &instance).unwrap();
                assert!(
                    v.holds(),
                    "{id} failed at seed {seed}: margin {}",
                    v.margin()
                );
                assert!(v.margin() >= -CHECK_TOL);
            }
        }
    }

    #[test]
    fn wrong_instance_shapes_are_rejected() {
        let f = random_instance(InequalityId::FunctionDecrease, &[2], 9).unwrap();
        let err = check_entropic(InequalityId::MiNonneg, &f).unwrap_err();
        assert!(matches!(err, Error::InstanceShape { .. }));

        let tri = random_instance(InequalityId::TrinodeCmiZero, &[2, 2, 2], 8).unwrap();
        let Instance::Net(net) = tri else {
            panic!("expected a net instance")
        };
        let visible_e = net.with_marking("e", Marking::Visible).unwrap();
        let err =
            check_entropic(InequalityId::TrinodeCmiZero, &Instance::Net(visible_e)).unwrap_err();
        assert!(matches!(err, Error::InstanceShape { .. }));

        let short = random_instance(InequalityId::IsometryTrace, &[2, 2, 2], 7).unwrap();
        let err = check_entropic(InequalityId::DpSingleGraph, &short).unwrap_err();
        assert!(matches!(err, Error::InstanceShape { .. }));
    }

    #[test]
    fn batches_are_deterministic_and_all_pass() {
        let b1 = run_batch(InequalityId::ArakiLieb, 16, &[2, 2], 99).unwrap();
        let b2 = run_batch(InequalityId::ArakiLieb, 16, &[2, 2], 99).unwrap();
        assert_eq!(
            serde_json::to_string(&b1).unwrap(),
            serde_json::to_string(&b2).unwrap()
        );
        assert_eq!(b1.pass_count, 16);
        assert!(b1.all_hold());
        assert!(b1.min_margin >= -CHECK_TOL);
        assert!(b1.verdicts.iter().any(|v| v.seed() != 0));

        let dp = run_batch(InequalityId::DpClassical, 8, &[2, 3, 2], 5).unwrap();
        assert!(dp.all_hold());
    }

    #[test]
    fn verdict_json_round_trips_infinities() {
        let v = CheckVerdict::raw(
            "sample",
            f64::INFINITY,
            1.0,
            f64::NEG_INFINITY,
            false,
            3,
            vec![2, 4],
        );
        let text = serde_json::to_string(&v).unwrap();
        assert!(text.contains("\"inf\""));
        assert!(text.contains("\"-inf\""));
        let back: CheckVerdict = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);

        let finite = CheckVerdict::identity("sample", 1.0, 1.0, 7, vec![2]);
        let text = serde_json::to_string(&finite).unwrap();
        let back: CheckVerdict = serde_json::from_str(&text).unwrap();
        assert_eq!(back, finite);
    }

    #[test]
    fn identity_checks_hold_on_both_trinode_shapes() {
        for seed in [42, 43] {
            let inst = random_instance(InequalityId::TrinodeCmiZero, &[2, 2, 2], seed).unwrap();
            let v = check_entropic(InequalityId::TrinodeCmiZero, &inst).unwrap();
            assert!(v.holds(), "seed {seed}: margin {}", v.margin());
            assert!(v.margin() >= -1e-9);
        }
        let clone = random_instance(InequalityId::CloneMerge, &[3, 2], 77).unwrap();
        let v = check_entropic(InequalityId::CloneMerge, &clone).unwrap();
        assert!(v.holds());

        let hol = random_instance(InequalityId::HolevoIsMi, &[2, 3], 78).unwrap();
        let v = check_entropic(InequalityId::HolevoIsMi, &hol).unwrap();
        assert!(v.holds());
    }

    #[test]
    fn id_registry_round_trips() {
        for id in InequalityId::ALL {
            assert_eq!(InequalityId::from_str(id.as_str()).unwrap(), id);
            assert!(!id.description().is_empty());
        }
        assert!(InequalityId::from_str("no_such_check").is_err());
        assert_eq!(
            InequalityId::ALL.iter().filter(|i| i.is_identity()).count(),
            4
        );
    }
}
