//! Quantum Bayesian networks and the entropy calculus on top of them.
//!
//! The crate builds density matrices three ways: directly, from classical
//! joint distributions, or by compiling a [`net::QBNet`] (a DAG of nodes
//! carrying complex transition amplitudes).  On top of the states it
//! provides the usual entropic quantities in nats — von Neumann entropy,
//! conditional entropy, mutual information, relative entropy — together
//! with their classical twins, and a registry of numerical checkers for
//! the standard inequalities these quantities satisfy (subadditivity,
//! Araki-Lieb, strong subadditivity in its conditional form, data
//! processing, the Holevo bound, and several exact identities).
//!
//! Everything that consumes randomness is seeded explicitly and is
//! reproducible byte for byte; see [`random`] for the generator contract.

pub mod channel;
pub mod checks;
pub mod entropy;
pub mod holevo;
pub mod net;
pub mod pure;
pub mod random;
pub mod rum;
pub mod tensor;

pub use channel::{is_isometry, stinespring_dilation, Dilation, KrausChannel};
pub use checks::{
    check_entropic, check_mre_classical, check_mre_quantum, counterexample_suite,
    random_instance, run_batch, BatchResult, CheckVerdict, InequalityId, Instance, CHECK_TOL,
};
pub use entropy::{
    classical_entropy, classical_relative_entropy, cq_state, holevo_information, nats_to_bits,
    quantum_entropy, quantum_relative_entropy, Ensemble, JointDist, ProbDist, Quantity,
    StochasticMatrix,
};
pub use holevo::{
    accessible_info_lower_bound, build_purification, check_holevo_bound, measured_state,
    purification_net, AccessibleInfo,
};
pub use net::{
    build_chain_net, classicize, erase_vs_trace, ChainLink, Marking, Node, QBNet,
};
pub use pure::{check_pure_identities, purify, schmidt_decompose, SchmidtForm};
pub use random::{
    random_channel, random_density_matrix, random_dist, random_doubly_stochastic,
    random_ensemble, random_function, random_isometry, random_ket, random_mixed_unitary_channel,
    random_stochastic, random_unitary, trial_seed, FunctionMap, Rng,
};
pub use rum::RumSystem;
pub use tensor::{
    eig_hermitian, kron, support_log, Complex64, ComplexMatrix, LabeledState, SubsystemLayout,
    DIM_CAP, LN_2, SPECTRUM_CLIP, STATE_TOL,
};

/// Everything that can go wrong while building or probing the objects in
/// this crate.  Numerical-invariant failures carry the measured deviation
/// so callers can report it.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("empty selection: at least one label/element is required")]
    EmptySelection,
    #[error("total dimension {requested} exceeds the supported cap of {cap}")]
    DimensionCap { requested: usize, cap: usize },
    #[error("invariant violation: matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("invariant violation: trace differs from one by {deviation:.3e}")]
    TraceNotOne { deviation: f64 },
    #[error("invariant violation: matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("invariant violation: vector is not normalized (deviation {deviation:.3e})")]
    NotNormalized { deviation: f64 },
    #[error("invariant violation: matrix is not column-stochastic (max deviation {deviation:.3e})")]
    NotStochastic { deviation: f64 },
    #[error("invariant violation: Kraus operators do not sum to the identity (deviation {deviation:.3e})")]
    IncompleteKraus { deviation: f64 },
    #[error("amplitude table is not an isometry (deviation {deviation:.3e})")]
    NotIsometric { deviation: f64 },
    #[error("state is not pure (largest eigenvalue {largest_eigenvalue})")]
    NotPure { largest_eigenvalue: f64 },
    #[error("network contains a directed cycle")]
    CyclicNet,
    #[error("node `{node}` references unknown parent `{parent}`")]
    MissingParent { node: String, parent: String },
    #[error("node `{node}` has {found} amplitude entries, expected {expected}")]
    BadAmplitudeCount {
        node: String,
        expected: usize,
        found: usize,
    },
    #[error("compiled ket has squared norm {norm:.3e}; amplitudes are inconsistent")]
    DegenerateKet { norm: f64 },
    #[error("compiled state trace deviates from one by {deviation:.3e}")]
    NormDeviation { deviation: f64 },
    #[error("cannot erase node `{label}`: {reason}")]
    BadErase { label: String, reason: String },
    #[error("subset element {element} is outside 1..={n}")]
    SubsetOutOfRange { element: usize, n: usize },
    #[error("{what} is limited to {max}, got {got}")]
    TooLarge {
        what: String,
        max: usize,
        got: usize,
    },
    #[error("checker `{id}` cannot run on this instance shape: {expected}")]
    InstanceShape { id: String, expected: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that report a violated numerical invariant of
    /// otherwise well-formed data, as opposed to malformed input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::TraceNotOne { .. }
                | Error::NotPositive { .. }
                | Error::NotNormalized { .. }
                | Error::NotStochastic { .. }
                | Error::IncompleteKraus { .. }
                | Error::NotIsometric { .. }
                | Error::NotPure { .. }
                | Error::DegenerateKet { .. }
                | Error::NormDeviation { .. }
        )
    }
}

#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub mod $name {}
        };
    }

    chapter!(ch01_states, "../../../book/src/states.md");
    chapter!(ch02_entropies, "../../../book/src/entropies.md");
    chapter!(ch03_networks, "../../../book/src/networks.md");
    chapter!(ch04_channels, "../../../book/src/channels.md");
    chapter!(ch05_checks, "../../../book/src/checks.md");
    chapter!(ch06_holevo, "../../../book/src/holevo.md");
    chapter!(ch07_pure, "../../../book/src/pure-states.md");
    chapter!(ch08_rum, "../../../book/src/rum.md");
}
