//! Quantum channels in Kraus form, isometry checks, Stinespring dilation
//! and the induced classical transition matrix.

use serde::{Deserialize, Serialize};

use crate::entropy::StochasticMatrix;
use crate::tensor::{Complex64, ComplexMatrix, LabeledState, SubsystemLayout, STATE_TOL};
use crate::{Error, Result};

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Completely positive trace-preserving map as a finite set of Kraus
/// operators `K_μ` (each `out_dim × in_dim`) with `Σ K†K = I`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates shape uniformity and completeness within [`STATE_TOL`].
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::EmptySelection);
        }
        let out_dim = kraus[0].rows();
        let in_dim = kraus[0].cols();
        for k in &kraus {
            if k.rows() != out_dim || k.cols() != in_dim {
                return Err(Error::ShapeMismatch {
                    expected: format!("{out_dim}x{in_dim} Kraus operators"),
                    found: format!("{}x{}", k.rows(), k.cols()),
                });
            }
        }
        let ch = KrausChannel {
            in_dim,
            out_dim,
            kraus,
        };
        let dev = ch.completeness_deviation();
        if dev > STATE_TOL {
            return Err(Error::IncompleteKraus { deviation: dev });
        }
        Ok(ch)
    }

    /// Identity channel on `dim`.
    pub fn identity(dim: usize) -> Self {
        KrausChannel {
            in_dim: dim,
            out_dim: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Fully dephasing channel `{|x⟩⟨x|}` on `dim`.
    pub fn dephasing(dim: usize) -> Self {
        let kraus = (0..dim)
            .map(|x| {
                let mut k = ComplexMatrix::zeros(dim, dim);
                k[(x, x)] = C_ONE;
                k
            })
            .collect();
        KrausChannel {
            in_dim: dim,
            out_dim: dim,
            kraus,
        }
    }

    /// Projective measurement in the basis given by the columns of `u`:
    /// Kraus operators `|y⟩⟨y| u†`, outcomes written in the computational
    /// basis.
    pub fn projective(u: &ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare {
                rows: u.rows(),
                cols: u.cols(),
            });
        }
        let d = u.rows();
        let kraus = (0..d)
            .map(|y| {
                ComplexMatrix::from_fn(d, d, |i, j| {
                    if i == y {
                        u[(j, y)].conj()
                    } else {
                        C_ZERO
                    }
                })
            })
            .collect();
        KrausChannel::new(kraus)
    }

    /// Embeds a classical column-stochastic matrix as the channel with one
    /// Kraus operator `√T(b|a) |b⟩⟨a|` per matrix entry.  Diagonal states
    /// map exactly as the classical matrix does.
    pub fn from_stochastic(t: &StochasticMatrix) -> Self {
        let mut kraus = Vec::with_capacity(t.out_dim() * t.in_dim());
        for b in 0..t.out_dim() {
            for a in 0..t.in_dim() {
                let w = t.get(b, a).max(0.0).sqrt();
                let mut k = ComplexMatrix::zeros(t.out_dim(), t.in_dim());
                k[(b, a)] = Complex64::new(w, 0.0);
                kraus.push(k);
            }
        }
        KrausChannel {
            in_dim: t.in_dim(),
            out_dim: t.out_dim(),
            kraus,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Largest absolute entry of `Σ K†K − I`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            sum = sum.add(&k.adjoint().matmul(k));
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.in_dim))
    }

    /// Largest absolute entry of `Σ KK† − I`; only defined for square
    /// channels.
    pub fn unitality_deviation(&self) -> Result<f64> {
        if self.in_dim != self.out_dim {
            return Err(Error::NotSquare {
                rows: self.out_dim,
                cols: self.in_dim,
            });
        }
        let mut sum = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            sum = sum.add(&k.matmul(&k.adjoint()));
        }
        Ok(sum.max_abs_diff(&ComplexMatrix::identity(self.out_dim)))
    }

    /// True when `Σ KK† = I` within [`STATE_TOL`]; errors on non-square
    /// channels.
    pub fn is_unital(&self) -> Result<bool> {
        Ok(self.unitality_deviation()? <= STATE_TOL)
    }

    /// Applies the channel to the subsystem named `target`, leaving the
    /// other factors untouched.  The target keeps its label and takes the
    /// channel's output dimension.
    pub fn apply(&self, state: &LabeledState, target: &str) -> Result<LabeledState> {
        let layout = state.layout();
        let pos = layout.position(target)?;
        let d_in = layout.dims()[pos];
        if d_in != self.in_dim {
            return Err(Error::ShapeMismatch {
                expected: format!("subsystem of dimension {}", self.in_dim),
                found: format!("`{target}` has dimension {d_in}"),
            });
        }
        let pre: usize = layout.dims()[..pos].iter().product();
        let post: usize = layout.dims()[pos + 1..].iter().product();
        let d_out = self.out_dim;

        let mut entries: Vec<(String, usize)> =
            layout.entries().iter().map(|(l, d)| (l.clone(), *d)).collect();
        entries[pos].1 = d_out;
        let out_layout = SubsystemLayout::new(entries)?;

        let n_out = pre * d_out * post;
        let mut out = ComplexMatrix::zeros(n_out, n_out);
        let in_m = state.matrix();
        // Direct index contraction of ρ' = Σ_μ K ρ K† on the target factor.
        for k in &self.kraus {
            for p in 0..pre {
                for pp in 0..pre {
                    for o in 0..d_out {
                        for op in 0..d_out {
                            for s in 0..post {
                                for sp in 0..post {
                                    let mut acc = C_ZERO;
                                    for i in 0..self.in_dim {
                                        let ki = k[(o, i)];
                                        if ki == C_ZERO {
                                            continue;
                                        }
                                        for ip in 0..self.in_dim {
                                            let kj = k[(op, ip)];
                                            if kj == C_ZERO {
                                                continue;
                                            }
                                            let row = (p * d_in + i) * post + s;
                                            let col = (pp * d_in + ip) * post + sp;
                                            acc += ki * in_m[(row, col)] * kj.conj();
                                        }
                                    }
                                    let row = (p * d_out + o) * post + s;
                                    let col = (pp * d_out + op) * post + sp;
                                    out[(row, col)] += acc;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(LabeledState::trusted(out_layout, out))
    }

    /// Classical transition matrix induced on the computational basis:
    /// `T(b|a) = Σ_μ |K_μ[b,a]|²`.
    pub fn induced_transition(&self) -> StochasticMatrix {
        let mut data = vec![0.0; self.out_dim * self.in_dim];
        for k in &self.kraus {
            for b in 0..self.out_dim {
                for a in 0..self.in_dim {
                    data[b * self.in_dim + a] += k[(b, a)].norm_sqr();
                }
            }
        }
        StochasticMatrix::new(self.out_dim, self.in_dim, data)
            .expect("completeness makes columns sum to one")
    }

    /// Serializes to `{"in_dim", "out_dim", "kraus": [[re, im, ..], ..]}`.
    pub fn to_json(&self) -> String {
        let raw = RawChannel {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            kraus: self.kraus.iter().map(|k| k.to_flat()).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawChannel = serde_json::from_str(s)?;
        let kraus = raw
            .kraus
            .iter()
            .map(|flat| ComplexMatrix::from_flat(raw.out_dim, raw.in_dim, flat))
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(kraus)
    }
}

#[derive(Serialize, Deserialize)]
struct RawChannel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<Vec<f64>>,
}

/// True when the columns of `a` are orthonormal (`a†a = I` within
/// [`STATE_TOL`]); always false for wide matrices.
pub fn is_isometry(a: &ComplexMatrix) -> bool {
    if a.rows() < a.cols() {
        return false;
    }
    let g = a.adjoint().matmul(a);
    g.max_abs_diff(&ComplexMatrix::identity(a.cols())) <= STATE_TOL
}

/// Unitary dilation of a square channel.
#[derive(Clone, Debug)]
pub struct Dilation {
    /// Unitary on the system ⊗ environment space, system index major.
    pub unitary: ComplexMatrix,
    /// Environment dimension; equals the number of Kraus operators.
    pub env_dim: usize,
}

/// Builds a unitary `U` on `q ⊗ y` (with `dim(y)` = number of Kraus
/// operators) satisfying `⟨q2, y|U|q1, 0⟩ = K_y[q2, q1]` exactly.  The
/// remaining columns are completed deterministically by orthonormalizing
/// canonical basis vectors against the fixed ones.  Only square channels
/// dilate this way.
pub fn stinespring_dilation(c: &KrausChannel) -> Result<Dilation> {
    if c.in_dim() != c.out_dim() {
        return Err(Error::ShapeMismatch {
            expected: "square channel (in_dim = out_dim)".into(),
            found: format!("{}x{}", c.out_dim(), c.in_dim()),
        });
    }
    let q = c.in_dim();
    let env = c.kraus().len();
    let n = q * env;

    // Columns at (q1, y=0) are fixed by the Kraus operators; completeness
    // makes them orthonormal.
    let mut fixed: Vec<ComplexMatrix> = Vec::with_capacity(q);
    for q1 in 0..q {
        let mut col = ComplexMatrix::zeros(n, 1);
        for q2 in 0..q {
            for (y, k) in c.kraus().iter().enumerate() {
                col[(q2 * env + y, 0)] = k[(q2, q1)];
            }
        }
        fixed.push(col);
    }

    // Deterministic completion: sweep canonical basis vectors, keep the
    // component orthogonal to everything accepted so far.
    let mut basis = fixed.clone();
    let mut extra: Vec<ComplexMatrix> = Vec::with_capacity(n - q);
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = ComplexMatrix::basis_ket(n, e);
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.vdot(&v);
                v = v.sub(&b.scale(overlap));
            }
        }
        let norm = v.vdot(&v).re.sqrt();
        if norm > 1e-8 {
            let v = v.scale(Complex64::new(1.0 / norm, 0.0));
            basis.push(v.clone());
            extra.push(v);
        }
    }
    if basis.len() != n {
        return Err(Error::InvalidParameter(
            "failed to complete the dilation to a unitary".into(),
        ));
    }

    let mut u = ComplexMatrix::zeros(n, n);
    let mut extra_iter = extra.into_iter();
    for q1 in 0..q {
        for y1 in 0..env {
            let col = if y1 == 0 {
                fixed[q1].clone()
            } else {
                extra_iter.next().expect("counted above")
            };
            for r in 0..n {
                u[(r, q1 * env + y1)] = col[(r, 0)];
            }
        }
    }

    let dev = u
        .adjoint()
        .matmul(&u)
        .max_abs_diff(&ComplexMatrix::identity(n));
    if dev > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "dilation unitarity deviation {dev:.3e}"
        )));
    }
    Ok(Dilation {
        unitary: u,
        env_dim: env,
    })
}
