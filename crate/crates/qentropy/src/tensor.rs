//! Dense complex matrices, labeled tensor-product layouts, and the small
//! set of spectral operations everything else is built on.
//!
//! Matrices are stored row-major.  A [`SubsystemLayout`] names the tensor
//! factors of a Hilbert space in order; flat indices are row-major over
//! the factors, so the first label is the most significant digit.  All
//! entropies downstream work on a [`LabeledState`], a density matrix tied
//! to a layout and validated against the usual invariants (Hermitian,
//! unit trace, positive semidefinite).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Complex64 = num_complex::Complex<f64>;

/// Largest total Hilbert-space dimension a layout may declare.
pub const DIM_CAP: usize = 4096;
/// Eigenvalues and probabilities at or below this are treated as exact zeros.
pub const SPECTRUM_CLIP: f64 = 1e-12;
/// Tolerance for Hermiticity, unit trace, positivity and normalization checks.
pub const STATE_TOL: f64 = 1e-10;
/// ln 2, the conversion factor between nats and bits.
pub const LN_2: f64 = std::f64::consts::LN_2;

const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C_ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds from a row-major slice of entries.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries for a {}x{} matrix", rows * cols, rows, cols),
                found: format!("{}", entries.len()),
            });
        }
        Ok(ComplexMatrix {
            rows,
            cols,
            data: entries.to_vec(),
        })
    }

    /// Builds from flattened `[re, im, re, im, ...]` pairs, row-major.
    pub fn from_flat(rows: usize, cols: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != 2 * rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{} floats for a {}x{} matrix", 2 * rows * cols, rows, cols),
                found: format!("{}", flat.len()),
            });
        }
        let data = flat
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Serializes to flattened `[re, im, ...]` pairs, row-major.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.data.len());
        for z in &self.data {
            out.push(z.re);
            out.push(z.im);
        }
        out
    }

    /// Column vector from a ket.
    pub fn from_ket(ket: &[Complex64]) -> Self {
        ComplexMatrix {
            rows: ket.len(),
            cols: 1,
            data: ket.to_vec(),
        }
    }

    /// |k⟩ in dimension `dim`.
    pub fn basis_ket(dim: usize, k: usize) -> Self {
        let mut m = Self::zeros(dim, 1);
        m[(k, 0)] = C_ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Matrix product; panics on inner-dimension mismatch.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimensions");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C_ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute entry of `self - self†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// (m + m†)/2.
    pub fn hermitized(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// |ψ⟩⟨ψ| from a ket.
    pub fn outer(ket: &[Complex64]) -> Self {
        let n = ket.len();
        Self::from_fn(n, n, |i, j| ket[i] * ket[j].conj())
    }

    /// ⟨self-column | rhs-column⟩ for vectors stored as n×1 matrices.
    pub fn vdot(&self, rhs: &Self) -> Complex64 {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!((self.cols, rhs.cols), (1, 1));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product; the left factor is the most significant index block.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let f = a[(ia, ja)];
            if f == C_ZERO {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out[(ia * b.rows() + ib, ja * b.cols() + jb)] = f * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Ordered list of named tensor factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemLayout {
    entries: Vec<(String, usize)>,
}

impl SubsystemLayout {
    /// Builds a layout from `(label, dim)` pairs.  Labels must be unique,
    /// dims at least 1, and the total dimension at most [`DIM_CAP`].
    pub fn new<L: Into<String>>(entries: Vec<(L, usize)>) -> Result<Self> {
        let entries: Vec<(String, usize)> =
            entries.into_iter().map(|(l, d)| (l.into(), d)).collect();
        let mut seen = std::collections::HashSet::new();
        let mut total: usize = 1;
        for (label, dim) in &entries {
            if !seen.insert(label.clone()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
            if *dim == 0 {
                return Err(Error::InvalidParameter(format!(
                    "subsystem `{label}` has dimension 0"
                )));
            }
            total = total.checked_mul(*dim).ok_or(Error::DimensionCap {
                requested: usize::MAX,
                cap: DIM_CAP,
            })?;
        }
        if total > DIM_CAP {
            return Err(Error::DimensionCap {
                requested: total,
                cap: DIM_CAP,
            });
        }
        Ok(SubsystemLayout { entries })
    }

    /// Single-subsystem layout.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new(vec![(label, dim)])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.entries.iter().map(|(_, d)| d).product()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.entries.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.entries.iter().map(|(_, d)| *d).collect()
    }

    pub fn entries(&self) -> &[(String, usize)] {
        &self.entries
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.entries
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.into()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.entries[self.position(label)?].1)
    }

    /// Positions of `labels`, sorted into layout order.  Errors on unknown
    /// or repeated labels; errors on an empty selection.
    pub fn positions_in_order(&self, labels: &[&str]) -> Result<Vec<usize>> {
        if labels.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if pos.contains(&p) {
                return Err(Error::DuplicateLabel((*l).into()));
            }
            pos.push(p);
        }
        pos.sort_unstable();
        Ok(pos)
    }

    /// Row-major stride of the factor at `pos`.
    pub fn stride(&self, pos: usize) -> usize {
        self.entries[pos + 1..].iter().map(|(_, d)| d).product()
    }

    /// Digit of `flat` belonging to the factor at `pos`.
    pub fn digit(&self, flat: usize, pos: usize) -> usize {
        (flat / self.stride(pos)) % self.entries[pos].1
    }

    /// Decomposes a flat index into one digit per factor.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.entries.len()];
        for (k, (_, d)) in self.entries.iter().enumerate().rev() {
            out[k] = flat % d;
            flat /= d;
        }
        out
    }

    /// Inverse of [`unravel`](Self::unravel).
    pub fn ravel(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.entries.len());
        let mut flat = 0;
        for (k, (_, d)) in self.entries.iter().enumerate() {
            debug_assert!(digits[k] < *d);
            flat = flat * d + digits[k];
        }
        flat
    }

    /// Layout restricted to the factors at `positions` (ascending).
    fn restrict(&self, positions: &[usize]) -> SubsystemLayout {
        SubsystemLayout {
            entries: positions.iter().map(|&p| self.entries[p].clone()).collect(),
        }
    }
}

/// Density matrix tied to a [`SubsystemLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledState {
    layout: SubsystemLayout,
    matrix: ComplexMatrix,
}

impl LabeledState {
    /// Validates and wraps a density matrix: square with the layout's total
    /// dimension, Hermitian, unit trace and positive semidefinite, all
    /// within [`STATE_TOL`].
    pub fn new(layout: SubsystemLayout, matrix: ComplexMatrix) -> Result<Self> {
        let n = layout.total_dim();
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if matrix.rows() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{n} matrix for layout of total dimension {n}"),
                found: format!("{}x{}", matrix.rows(), matrix.cols()),
            });
        }
        let herm = matrix.hermiticity_deviation();
        if herm > STATE_TOL {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = matrix.trace();
        let tr_dev = (tr - C_ONE).norm();
        if tr_dev > STATE_TOL {
            return Err(Error::TraceNotOne { deviation: tr_dev });
        }
        let (vals, _) = eig_hermitian(&matrix)?;
        let min_eig = vals.first().copied().unwrap_or(0.0);
        if min_eig < -STATE_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min_eig,
            });
        }
        Ok(LabeledState { layout, matrix })
    }

    /// Wraps without the (relatively expensive) eigenvalue check; used by
    /// internal operations that preserve validity.  Debug builds still
    /// verify Hermiticity and trace.
    pub(crate) fn trusted(layout: SubsystemLayout, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.rows(), layout.total_dim());
        debug_assert!(matrix.hermiticity_deviation() <= 1e-8);
        debug_assert!((matrix.trace() - C_ONE).norm() <= 1e-8);
        LabeledState { layout, matrix }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn total_dim(&self) -> usize {
        self.layout.total_dim()
    }

    /// Traces out every subsystem not named in `keep`.  The kept factors
    /// stay in their original relative order regardless of how `keep` is
    /// ordered.  Keeping everything returns a clone.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<LabeledState> {
        let keep_pos = self.layout.positions_in_order(keep)?;
        if keep_pos.len() == self.layout.len() {
            return Ok(self.clone());
        }
        let traced_pos: Vec<usize> = (0..self.layout.len())
            .filter(|p| !keep_pos.contains(p))
            .collect();
        let out_layout = self.layout.restrict(&keep_pos);
        let traced_layout = self.layout.restrict(&traced_pos);
        let out_dim = out_layout.total_dim();

        // Offsets into the flat input index contributed by each kept/traced
        // multi-index, so the inner loop is pure addition.
        let strides: Vec<usize> = (0..self.layout.len()).map(|p| self.layout.stride(p)).collect();
        let offset_table = |positions: &[usize], sub: &SubsystemLayout| -> Vec<usize> {
            (0..sub.total_dim())
                .map(|flat| {
                    sub.unravel(flat)
                        .iter()
                        .zip(positions)
                        .map(|(digit, &p)| digit * strides[p])
                        .sum()
                })
                .collect()
        };
        let keep_off = offset_table(&keep_pos, &out_layout);
        let traced_off = offset_table(&traced_pos, &traced_layout);

        let mut out = ComplexMatrix::zeros(out_dim, out_dim);
        for i in 0..out_dim {
            for j in 0..out_dim {
                let mut acc = C_ZERO;
                for t in &traced_off {
                    acc += self.matrix[(keep_off[i] + t, keep_off[j] + t)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(LabeledState::trusted(out_layout, out))
    }

    /// Renames subsystems; `map` lists `(old, new)` pairs.
    pub fn relabel(&self, map: &[(&str, &str)]) -> Result<LabeledState> {
        let mut entries = self.layout.entries.clone();
        for (old, new) in map {
            let p = self.layout.position(old)?;
            entries[p].0 = (*new).to_string();
        }
        let layout = SubsystemLayout::new(entries)?;
        Ok(LabeledState {
            layout,
            matrix: self.matrix.clone(),
        })
    }

    /// Eigenvalues of the state, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.matrix).expect("square by construction").0
    }

    /// Serializes to the JSON wire form
    /// `{"layout": [{"label": .., "dim": ..}, ..], "matrix": [re, im, ..]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawState::from(self)).expect("serializable")
    }

    /// Parses and validates the wire form produced by [`to_json`](Self::to_json).
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawState = serde_json::from_str(s)?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct RawLayoutEntry {
    label: String,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    layout: Vec<RawLayoutEntry>,
    matrix: Vec<f64>,
}

impl From<&LabeledState> for RawState {
    fn from(s: &LabeledState) -> Self {
        RawState {
            layout: s
                .layout
                .entries()
                .iter()
                .map(|(l, d)| RawLayoutEntry {
                    label: l.clone(),
                    dim: *d,
                })
                .collect(),
            matrix: s.matrix.to_flat(),
        }
    }
}

impl TryFrom<RawState> for LabeledState {
    type Error = Error;
    fn try_from(raw: RawState) -> Result<Self> {
        let layout =
            SubsystemLayout::new(raw.layout.into_iter().map(|e| (e.label, e.dim)).collect())?;
        let n = layout.total_dim();
        let matrix = ComplexMatrix::from_flat(n, n, &raw.matrix)?;
        LabeledState::new(layout, matrix)
    }
}

/// Eigendecomposition of a Hermitian matrix.  The input is symmetrized as
/// `(m + m†)/2` before decomposing.  Returns eigenvalues in ascending
/// order and the matching orthonormal eigenvectors as matrix columns.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Ok((vec![], ComplexMatrix::zeros(0, 0)));
    }
    let h = m.hermitized();
    let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| h[(i, j)]);
    let se = nalgebra::linalg::SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .expect("real eigenvalues")
    });
    let vals: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);
    Ok((vals, vecs))
}

/// Matrix logarithm restricted to the support: eigenvalues at or below
/// [`SPECTRUM_CLIP`] contribute nothing.  The input must be Hermitian and
/// positive semidefinite up to tolerance.
pub fn support_log(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, vecs) = eig_hermitian(m)?;
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda <= SPECTRUM_CLIP {
            continue;
        }
        let ln = lambda.ln();
        for i in 0..n {
            let vi = vecs[(i, k)];
            if vi == C_ZERO {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += vi * vecs[(j, k)].conj() * ln;
            }
        }
    }
    Ok(out)
}

/// Projector onto the eigenspaces with eigenvalue at or below
/// [`SPECTRUM_CLIP`]; identity minus the support projector.
pub(crate) fn null_projector(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, vecs) = eig_hermitian(m)?;
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda > SPECTRUM_CLIP {
            continue;
        }
        for i in 0..n {
            let vi = vecs[(i, k)];
            for j in 0..n {
                out[(i, j)] += vi * vecs[(j, k)].conj();
            }
        }
    }
    Ok(out)
}
