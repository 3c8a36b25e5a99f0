//! Readout limits for classical–quantum sources.
//!
//! An [`Ensemble`] is purified into a three-node network whose visible
//! state carries the source intact; a measurement, lifted to its unitary
//! dilation, is then spliced into that network so the joint state of the
//! readout register and the class label comes out of one compilation.
//! Sampling many measurement bases yields a certified lower bound on the
//! information any such readout extracts, which is compared against the
//! mixing-entropy ceiling of the source.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{stinespring_dilation, KrausChannel};
use crate::checks::CheckVerdict;
use crate::entropy::{holevo_information, quantum_entropy, Ensemble, Quantity};
use crate::{Error, Result};
use crate::net::{Marking, Node, QBNet};
use crate::random::{random_unitary, trial_seed};
use crate::tensor::{eig_hermitian, ComplexMatrix, LabeledState};

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-class spectral data of an ensemble: eigenvalues (descending,
/// clamped to be nonnegative) and matching eigenvector columns of every
/// conditional state.
struct Spectra {
    dim: usize,
    eigvals: Vec<Vec<f64>>,
    eigvecs: Vec<ComplexMatrix>,
}

fn spectra(e: &Ensemble) -> Result<Spectra> {
    let dim = e.states()[0].total_dim();
    let mut eigvals = Vec::with_capacity(e.len());
    let mut eigvecs = Vec::with_capacity(e.len());
    for s in e.states() {
        let (vals, vecs) = eig_hermitian(s.matrix())?;
        let flipped: Vec<f64> = (0..dim).map(|k| vals[dim - 1 - k].max(0.0)).collect();
        let cols = ComplexMatrix::from_fn(dim, dim, |i, j| vecs[(i, dim - 1 - j)]);
        eigvals.push(flipped);
        eigvecs.push(cols);
    }
    Ok(Spectra {
        dim,
        eigvals,
        eigvecs,
    })
}

/// Keeps fixed internal labels out of the way of the ensemble's class
/// label by appending underscores until they differ.
fn fresh_label(base: &str, class: &str) -> String {
    let mut candidate = base.to_string();
    while candidate == class {
        candidate.push('_');
    }
    candidate
}

/// Root amplitudes carrying the square roots of the class weights.
fn weight_amps(e: &Ensemble) -> Vec<Complex64> {
    e.weights()
        .iter()
        .map(|w| Complex64::new(w.max(0.0).sqrt(), 0.0))
        .collect()
}

/// Table for the spectrum node: `A(Q|x) = √λ_{Q|x}`, own state major,
/// the class assignment minor.
fn spectrum_amps(sp: &Spectra, nx: usize) -> Vec<Complex64> {
    let nq = sp.dim;
    let mut amps = vec![C_ZERO; nq * nx];
    for bigq in 0..nq {
        for x in 0..nx {
            amps[bigq * nx + x] = Complex64::new(sp.eigvals[x][bigq].sqrt(), 0.0);
        }
    }
    amps
}

/// Table for the system node: `A(q|Q,x)` is the `q`-th component of the
/// `Q`-th eigenvector of the state conditioned on class `x`.
fn component_amps(sp: &Spectra, nx: usize) -> Vec<Complex64> {
    let nq = sp.dim;
    let mut amps = vec![C_ZERO; nq * nq * nx];
    for q in 0..nq {
        for bigq in 0..nq {
            for x in 0..nx {
                amps[q * (nq * nx) + bigq * nx + x] = sp.eigvecs[x][(q, bigq)];
            }
        }
    }
    amps
}

/// Three-node network whose compiled state purifies the ensemble.
///
/// The nodes are `q` (the system, one subsystem of the full state
/// dimension), `Q` (a spectral index of the same dimension), and the
/// ensemble's class label as a classical root.  Tracing the compiled
/// state down to `q` recovers the ensemble average exactly, and remarking
/// the class node [`Marking::Visible`] yields a pure joint state.
pub fn purification_net(e: &Ensemble) -> Result<QBNet> {
    let sp = spectra(e)?;
    let nq = sp.dim;
    let nx = e.len();
    let class = e.class_label();
    let system = fresh_label("q", class);
    let spectrum = fresh_label("Q", class);
    QBNet::new(vec![
        Node::new(
            &system,
            nq,
            &[&spectrum, class],
            component_amps(&sp, nx),
            Marking::Visible,
        ),
        Node::new(
            &spectrum,
            nq,
            &[class],
            spectrum_amps(&sp, nx),
            Marking::Visible,
        ),
        Node::root(class, nx, weight_amps(e), Marking::Classical),
    ])
}

/// Compiles [`purification_net`] into its density matrix on
/// `(q, Q, class)` with the class register classical.
pub fn build_purification(e: &Ensemble) -> Result<LabeledState> {
    purification_net(e)?.compile_density()
}

/// Joint state of a measurement readout and the class label.
///
/// The measurement is lifted to a unitary on system ⊗ readout via
/// [`stinespring_dilation`], so the channel must be square and match the
/// ensemble's state dimension.  Inside the purification the system node
/// is summed through the dilation (readout ancilla pinned to `0`), the
/// spectral node is traced, and the result lives on `(q2, y2, class)`:
/// the post-measurement system, the readout register, and the classical
/// source label.  Reducing to `q2` alone reproduces the channel applied
/// to the ensemble average.
pub fn measured_state(e: &Ensemble, channel: &KrausChannel) -> Result<LabeledState> {
    let sp = spectra(e)?;
    let nq = sp.dim;
    if channel.in_dim() != nq {
        return Err(Error::ShapeMismatch {
            expected: format!("channel on the ensemble dimension {nq}"),
            found: format!("channel input {}", channel.in_dim()),
        });
    }
    let dil = stinespring_dilation(channel)?;
    let ny = dil.env_dim;
    let nx = e.len();
    let class = e.class_label();
    let post = fresh_label("q2", class);
    let readout = fresh_label("y2", class);
    let spectrum = fresh_label("Q", class);
    let pre = fresh_label("q1", class);
    let ancilla = fresh_label("y1", class);
    let joint = fresh_label("qy", class);

    let d_sys = nq * ny;
    let mut dilation_amps = vec![C_ZERO; d_sys * d_sys];
    for row in 0..d_sys {
        for col in 0..d_sys {
            dilation_amps[row * d_sys + col] = dil.unitary[(row, col)];
        }
    }

    let net = QBNet::new(vec![
        Node::component_copy(&post, &joint, &[nq, ny], 0, Marking::Visible),
        Node::component_copy(&readout, &joint, &[nq, ny], 1, Marking::Visible),
        Node::root(class, nx, weight_amps(e), Marking::Classical),
        Node::new(
            &spectrum,
            nq,
            &[class],
            spectrum_amps(&sp, nx),
            Marking::Traced,
        ),
        Node::new(
            &pre,
            nq,
            &[&spectrum, class],
            component_amps(&sp, nx),
            Marking::Slashed,
        ),
        Node::clamped_root(&ancilla, ny, 0, Marking::Slashed),
        Node::new(
            &joint,
            d_sys,
            &[&pre, &ancilla],
            dilation_amps,
            Marking::Slashed,
        ),
    ])?;
    net.compile_density()
}

/// Outcome of sampling measurement bases against one ensemble.
#[derive(Clone, Debug)]
pub struct AccessibleInfo {
    /// Largest readout information found across all samples.
    pub best: f64,
    /// Index of the winning sample.
    pub best_index: usize,
    /// Readout information of every sample, in sampling order.
    pub per_sample: Vec<f64>,
    /// The measurement that achieved `best`.
    pub best_channel: KrausChannel,
}

/// Basis for sample `index`: the computational basis first, then seeded
/// Haar-like unitaries.
fn measurement_basis(dim: usize, index: usize, seed: u64) -> ComplexMatrix {
    if index == 0 {
        ComplexMatrix::identity(dim)
    } else {
        random_unitary(dim, trial_seed(seed, index as u64))
    }
}

/// Certified lower bound on the information extractable from the
/// ensemble by projective measurements.
///
/// Evaluates the readout mutual information for `samples` measurement
/// bases — the computational basis always included as sample `0`, the
/// rest drawn from per-index seeds — and keeps the largest.  Samples are
/// independent and evaluated in parallel; results are deterministic in
/// `(samples, seed)`.
pub fn accessible_info_lower_bound(
    e: &Ensemble,
    samples: usize,
    seed: u64,
) -> Result<AccessibleInfo> {
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "at least one measurement sample is required".into(),
        ));
    }
    let nq = e.states()[0].total_dim();
    let per_sample = (0..samples)
        .into_par_iter()
        .map(|t| {
            let ch = KrausChannel::projective(&measurement_basis(nq, t, seed))?;
            let r = measured_state(e, &ch)?;
            let labels = r.layout().labels();
            quantum_entropy(&Quantity::mutual(&[labels[1]], &[labels[2]]), &r)
        })
        .collect::<Result<Vec<f64>>>()?;
    let best_index = per_sample
        .iter()
        .enumerate()
        .reduce(|acc, cur| if cur.1 > acc.1 { cur } else { acc })
        .map(|(k, _)| k)
        .expect("at least one sample");
    let best_channel = KrausChannel::projective(&measurement_basis(nq, best_index, seed))?;
    Ok(AccessibleInfo {
        best: per_sample[best_index],
        best_index,
        per_sample,
        best_channel,
    })
}

/// Verdict `holevo_bound`: the sampled readout maximum stays at or below
/// the ensemble's mixing-entropy ceiling.
///
/// The reported left side is the best sample, so the margin is the
/// tightest over all sampled measurements; any single sample exceeding
/// the ceiling would surface here.
pub fn check_holevo_bound(e: &Ensemble, samples: usize, seed: u64) -> Result<CheckVerdict> {
    let acc = accessible_info_lower_bound(e, samples, seed)?;
    let ceiling = holevo_information(e)?;
    let nq = e.states()[0].total_dim();
    Ok(CheckVerdict::inequality(
        "holevo_bound",
        acc.best,
        ceiling,
        seed,
        vec![nq, e.len()],
    ))
}
