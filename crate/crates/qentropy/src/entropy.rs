//! Classical and quantum entropic quantities, all in nats.
//!
//! The two calculi are deliberately parallel: a [`Quantity`] selector such
//! as `S(y:x|z)` evaluates against either a classical [`JointDist`] or a
//! quantum [`LabeledState`], with conditional and mutual forms expanded
//! into plain joint entropies:
//!
//! | selector   | expansion                              |
//! |------------|----------------------------------------|
//! | `S(x)`     | entropy of the marginal on `x`         |
//! | `S(y\|x)`  | `S(y,x) - S(x)`                        |
//! | `S(y:x)`   | `S(y) + S(x) - S(y,x)`                 |
//! | `S(y:x\|z)`| `S(y\|z) + S(x\|z) - S(y,x\|z)`        |
//!
//! Relative entropy returns `f64::INFINITY` exactly when the support
//! condition fails; it is never approximated by a large float.

use serde::{Deserialize, Serialize};

use crate::tensor::{
    eig_hermitian, null_projector, support_log, Complex64, ComplexMatrix, LabeledState,
    SubsystemLayout, LN_2, SPECTRUM_CLIP, STATE_TOL,
};
use crate::{Error, Result};

/// Probability distribution over a finite set of labeled outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbDist {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl ProbDist {
    pub fn new<L: Into<String>>(labels: Vec<L>, probs: Vec<f64>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != probs.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} probabilities", labels.len()),
                found: format!("{}", probs.len()),
            });
        }
        validate_probs(&probs)?;
        Ok(ProbDist { labels, probs })
    }

    /// Outcomes labeled "0", "1", ... in order.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let labels = (0..probs.len()).map(|i| i.to_string()).collect();
        Self::new::<String>(labels, probs)
    }

    pub fn uniform(dim: usize) -> Self {
        Self::from_probs(vec![1.0 / dim as f64; dim]).expect("uniform is valid")
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        shannon(&self.probs)
    }
}

fn validate_probs(probs: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &p in probs {
        if p < -SPECTRUM_CLIP || !p.is_finite() {
            return Err(Error::NotPositive { min_eigenvalue: p });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > STATE_TOL {
        return Err(Error::NotNormalized {
            deviation: (sum - 1.0).abs(),
        });
    }
    Ok(())
}

fn shannon(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > SPECTRUM_CLIP)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Joint distribution over named variables; probabilities are stored
/// row-major against the layout, first variable most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDist {
    layout: SubsystemLayout,
    probs: Vec<f64>,
}

impl JointDist {
    pub fn new(layout: SubsystemLayout, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != layout.total_dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} probabilities", layout.total_dim()),
                found: format!("{}", probs.len()),
            });
        }
        validate_probs(&probs)?;
        Ok(JointDist { layout, probs })
    }

    /// Builds the joint by evaluating `f` on every tuple of variable values.
    pub fn from_fn(layout: SubsystemLayout, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let probs = (0..layout.total_dim())
            .map(|flat| f(&layout.unravel(flat)))
            .collect();
        Self::new(layout, probs)
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Marginal over the named variables, kept in layout order.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointDist> {
        let keep_pos = self.layout.positions_in_order(keep)?;
        let entries: Vec<(String, usize)> = keep_pos
            .iter()
            .map(|&p| self.layout.entries()[p].clone())
            .collect();
        let out_layout = SubsystemLayout::new(entries)?;
        let mut out = vec![0.0; out_layout.total_dim()];
        for (flat, &p) in self.probs.iter().enumerate() {
            let digits = self.layout.unravel(flat);
            let kept: Vec<usize> = keep_pos.iter().map(|&k| digits[k]).collect();
            out[out_layout.ravel(&kept)] += p;
        }
        Ok(JointDist {
            layout: out_layout,
            probs: out,
        })
    }

    /// Flattens to a [`ProbDist`] whose outcome labels are the joined
    /// variable values, e.g. "0,1".
    pub fn flatten(&self) -> ProbDist {
        let labels = (0..self.probs.len())
            .map(|flat| {
                self.layout
                    .unravel(flat)
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        ProbDist {
            labels,
            probs: self.probs.clone(),
        }
    }

    /// Embeds the joint as a diagonal density matrix on the same layout.
    pub fn to_diagonal_state(&self) -> LabeledState {
        let n = self.probs.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (i, &p) in self.probs.iter().enumerate() {
            m[(i, i)] = Complex64::new(p.max(0.0), 0.0);
        }
        LabeledState::trusted(self.layout.clone(), m)
    }

    fn entropy_of(&self, labels: &[&str]) -> Result<f64> {
        Ok(shannon(self.marginal(labels)?.probs()))
    }
}

/// Column-stochastic transition matrix `T(b|a)`; entry `(b, a)` is the
/// probability of output `b` given input `a`, and every column sums to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrix {
    out_dim: usize,
    in_dim: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(out_dim: usize, in_dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != out_dim * in_dim {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", out_dim * in_dim),
                found: format!("{}", data.len()),
            });
        }
        let mut dev: f64 = 0.0;
        for a in 0..in_dim {
            let mut col = 0.0;
            for b in 0..out_dim {
                let t = data[b * in_dim + a];
                if t < -SPECTRUM_CLIP {
                    return Err(Error::NotStochastic { deviation: -t });
                }
                col += t;
            }
            dev = dev.max((col - 1.0).abs());
        }
        if dev > STATE_TOL {
            return Err(Error::NotStochastic { deviation: dev });
        }
        Ok(StochasticMatrix {
            out_dim,
            in_dim,
            data,
        })
    }

    /// Deterministic-function matrix: column `a` has a single 1 at `map[a]`.
    pub fn from_function(map: &[usize], out_dim: usize) -> Result<Self> {
        let in_dim = map.len();
        let mut data = vec![0.0; out_dim * in_dim];
        for (a, &b) in map.iter().enumerate() {
            if b >= out_dim {
                return Err(Error::InvalidParameter(format!(
                    "function value {b} outside output dimension {out_dim}"
                )));
            }
            data[b * in_dim + a] = 1.0;
        }
        Self::new(out_dim, in_dim, data)
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn get(&self, b: usize, a: usize) -> f64 {
        self.data[b * self.in_dim + a]
    }

    /// Largest deviation of the row sums from one; zero for doubly
    /// stochastic matrices.
    pub fn row_sum_deviation(&self) -> f64 {
        (0..self.out_dim)
            .map(|b| {
                let s: f64 = (0..self.in_dim).map(|a| self.get(b, a)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Pushes a distribution through the matrix.
    pub fn apply(&self, p: &ProbDist) -> Result<ProbDist> {
        if p.len() != self.in_dim {
            return Err(Error::ShapeMismatch {
                expected: format!("distribution of dimension {}", self.in_dim),
                found: format!("{}", p.len()),
            });
        }
        let probs: Vec<f64> = (0..self.out_dim)
            .map(|b| (0..self.in_dim).map(|a| self.get(b, a) * p.probs()[a]).sum())
            .collect();
        ProbDist::from_probs(probs)
    }
}

/// One group of variable labels inside a [`Quantity`].
pub type Group = Vec<String>;

/// Entropic quantity selector shared by the classical and quantum sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Quantity {
    /// `S(x)` — joint entropy of a group.
    Joint(Group),
    /// `S(y|x)`.
    Conditional { of: Group, given: Group },
    /// `S(y:x)`.
    Mutual { a: Group, b: Group },
    /// `S(y:x|z)`.
    CondMutual { a: Group, b: Group, given: Group },
}

impl Quantity {
    pub fn joint(labels: &[&str]) -> Self {
        Quantity::Joint(to_group(labels))
    }

    pub fn conditional(of: &[&str], given: &[&str]) -> Self {
        Quantity::Conditional {
            of: to_group(of),
            given: to_group(given),
        }
    }

    pub fn mutual(a: &[&str], b: &[&str]) -> Self {
        Quantity::Mutual {
            a: to_group(a),
            b: to_group(b),
        }
    }

    pub fn cond_mutual(a: &[&str], b: &[&str], given: &[&str]) -> Self {
        Quantity::CondMutual {
            a: to_group(a),
            b: to_group(b),
            given: to_group(given),
        }
    }

    /// Parses selectors like `S(a)`, `H(a,b)`, `S(a|b)`, `S(a:b)` and
    /// `S(a:b|c,d)`.  `S` and `H` prefixes are interchangeable.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::InvalidParameter(format!("cannot parse `{s}`: {why}"));
        let open = s.find('(').ok_or_else(|| bad("missing `(`"))?;
        let head = &s[..open];
        if !(head == "S" || head == "H") {
            return Err(bad("expected `S(...)` or `H(...)`"));
        }
        if !s.ends_with(')') {
            return Err(bad("missing `)`"));
        }
        let inner = &s[open + 1..s.len() - 1];
        let (body, given) = match inner.split_once('|') {
            Some((b, g)) => (b, Some(parse_group(g).map_err(|w| bad(&w))?)),
            None => (inner, None),
        };
        let parts: Vec<&str> = body.split(':').collect();
        let quantity = match (parts.as_slice(), given) {
            ([one], None) => Quantity::Joint(parse_group(one).map_err(|w| bad(&w))?),
            ([one], Some(g)) => Quantity::Conditional {
                of: parse_group(one).map_err(|w| bad(&w))?,
                given: g,
            },
            ([a, b], None) => Quantity::Mutual {
                a: parse_group(a).map_err(|w| bad(&w))?,
                b: parse_group(b).map_err(|w| bad(&w))?,
            },
            ([a, b], Some(g)) => Quantity::CondMutual {
                a: parse_group(a).map_err(|w| bad(&w))?,
                b: parse_group(b).map_err(|w| bad(&w))?,
                given: g,
            },
            _ => return Err(bad("at most one `:` is allowed")),
        };
        Ok(quantity)
    }

    /// Groups referenced by the selector, for validation.
    fn groups(&self) -> Vec<&Group> {
        match self {
            Quantity::Joint(g) => vec![g],
            Quantity::Conditional { of, given } => vec![of, given],
            Quantity::Mutual { a, b } => vec![a, b],
            Quantity::CondMutual { a, b, given } => vec![a, b, given],
        }
    }

    fn validate(&self, layout: &SubsystemLayout) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for group in self.groups() {
            if group.is_empty() {
                return Err(Error::EmptySelection);
            }
            for label in group {
                layout.position(label)?;
                if !seen.insert(label.clone()) {
                    return Err(Error::DuplicateLabel(label.clone()));
                }
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let g = |group: &Group| group.join(",");
        match self {
            Quantity::Joint(x) => write!(f, "S({})", g(x)),
            Quantity::Conditional { of, given } => write!(f, "S({}|{})", g(of), g(given)),
            Quantity::Mutual { a, b } => write!(f, "S({}:{})", g(a), g(b)),
            Quantity::CondMutual { a, b, given } => {
                write!(f, "S({}:{}|{})", g(a), g(b), g(given))
            }
        }
    }
}

fn to_group(labels: &[&str]) -> Group {
    labels.iter().map(|l| l.to_string()).collect()
}

fn parse_group(s: &str) -> std::result::Result<Group, String> {
    let group: Vec<String> = s
        .split(',')
        .map(|x| x.trim().to_string())
        .filter(|x| !x.is_empty())
        .collect();
    if group.is_empty() {
        return Err("empty variable group".into());
    }
    Ok(group)
}

fn union<'a>(groups: &[&'a Group]) -> Vec<&'a str> {
    groups
        .iter()
        .flat_map(|g| g.iter().map(String::as_str))
        .collect()
}

/// Evaluates a selector against a classical joint distribution, in nats.
pub fn classical_entropy(quantity: &Quantity, p: &JointDist) -> Result<f64> {
    quantity.validate(p.layout())?;
    let h = |labels: Vec<&str>| p.entropy_of(&labels);
    evaluate(quantity, h)
}

/// Evaluates a selector against a quantum state, in nats.
pub fn quantum_entropy(quantity: &Quantity, rho: &LabeledState) -> Result<f64> {
    quantity.validate(rho.layout())?;
    let s = |labels: Vec<&str>| -> Result<f64> {
        let reduced = rho.partial_trace(&labels)?;
        Ok(shannon(&reduced.eigenvalues()))
    };
    evaluate(quantity, s)
}

fn evaluate(quantity: &Quantity, mut s: impl FnMut(Vec<&str>) -> Result<f64>) -> Result<f64> {
    match quantity {
        Quantity::Joint(x) => s(union(&[x])),
        Quantity::Conditional { of, given } => Ok(s(union(&[of, given]))? - s(union(&[given]))?),
        Quantity::Mutual { a, b } => {
            Ok(s(union(&[a]))? + s(union(&[b]))? - s(union(&[a, b]))?)
        }
        Quantity::CondMutual { a, b, given } => Ok(s(union(&[a, given]))?
            + s(union(&[b, given]))?
            - s(union(&[a, b, given]))?
            - s(union(&[given]))?),
    }
}

/// Von Neumann entropy of the whole state, in nats.
pub fn von_neumann(rho: &LabeledState) -> f64 {
    shannon(&rho.eigenvalues())
}

/// Classical relative entropy `D(p‖q) = Σ p ln(p/q)` in nats.  Returns
/// `f64::INFINITY` exactly when some outcome has `p > 0` but `q = 0`
/// (both judged against [`SPECTRUM_CLIP`]).
pub fn classical_relative_entropy(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    if p.labels() != q.labels() {
        return Err(Error::ShapeMismatch {
            expected: "distributions over the same outcome labels".into(),
            found: "differing outcome labels".into(),
        });
    }
    let mut d = 0.0;
    for (&pp, &qq) in p.probs().iter().zip(q.probs()) {
        if pp <= SPECTRUM_CLIP {
            continue;
        }
        if qq <= SPECTRUM_CLIP {
            return Ok(f64::INFINITY);
        }
        d += pp * (pp / qq).ln();
    }
    Ok(d)
}

/// Quantum relative entropy `D(ρ‖σ) = tr ρ(ln ρ − ln σ)` in nats.  Returns
/// `f64::INFINITY` exactly when ρ has weight outside the support of σ
/// (trace of the null-space compression above 1e-9).
pub fn quantum_relative_entropy(rho: &LabeledState, sigma: &LabeledState) -> Result<f64> {
    if rho.layout() != sigma.layout() {
        return Err(Error::ShapeMismatch {
            expected: "states on the same layout".into(),
            found: "differing layouts".into(),
        });
    }
    let null = null_projector(sigma.matrix())?;
    // tr(Π ρ Π) = tr(ρ Π) for a projector; ρ is PSD so this is the mass
    // of ρ outside σ's support.
    let mass = rho.matrix().matmul(&null).trace().re;
    if mass > 1e-9 {
        return Ok(f64::INFINITY);
    }
    let (vals, _) = eig_hermitian(rho.matrix())?;
    let tr_rho_ln_rho: f64 = vals
        .iter()
        .filter(|&&v| v > SPECTRUM_CLIP)
        .map(|&v| v * v.ln())
        .sum();
    let ln_sigma = support_log(sigma.matrix())?;
    let tr_rho_ln_sigma = rho.matrix().matmul(&ln_sigma).trace().re;
    Ok(tr_rho_ln_rho - tr_rho_ln_sigma)
}

/// Weighted ensemble of density matrices over a shared layout, indexed by
/// a classical label.
#[derive(Clone, Debug)]
pub struct Ensemble {
    weights: Vec<f64>,
    states: Vec<LabeledState>,
    class_label: String,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, states: Vec<LabeledState>, class_label: &str) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::ShapeMismatch {
                expected: "one weight per state, at least one state".into(),
                found: format!("{} weights, {} states", weights.len(), states.len()),
            });
        }
        validate_probs(&weights)?;
        let layout = states[0].layout().clone();
        for s in &states[1..] {
            if s.layout() != &layout {
                return Err(Error::ShapeMismatch {
                    expected: "all ensemble states on one layout".into(),
                    found: "differing layouts".into(),
                });
            }
        }
        if layout.position(class_label).is_ok() {
            return Err(Error::DuplicateLabel(class_label.into()));
        }
        Ok(Ensemble {
            weights,
            states,
            class_label: class_label.into(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[LabeledState] {
        &self.states
    }

    pub fn class_label(&self) -> &str {
        &self.class_label
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Weighted average state Σ w_x ρ_x.
    pub fn average_state(&self) -> LabeledState {
        let n = self.states[0].total_dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (w, s) in self.weights.iter().zip(&self.states) {
            m = m.add(&s.matrix().scale(Complex64::new(*w, 0.0)));
        }
        LabeledState::trusted(self.states[0].layout().clone(), m)
    }

    /// Serializes to `{"class_label", "weights", "states": [...]}`.
    pub fn to_json(&self) -> String {
        let raw = RawEnsemble {
            class_label: self.class_label.clone(),
            weights: self.weights.clone(),
            states: self.states.iter().map(|s| s.to_json_value()).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawEnsemble = serde_json::from_str(s)?;
        let states = raw
            .states
            .iter()
            .map(LabeledState::from_json_value)
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(raw.weights, states, &raw.class_label)
    }
}

#[derive(Serialize, Deserialize)]
struct RawEnsemble {
    class_label: String,
    weights: Vec<f64>,
    states: Vec<serde_json::Value>,
}

impl LabeledState {
    fn to_json_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.to_json()).expect("valid json")
    }

    fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        LabeledState::from_json(&v.to_string())
    }
}

/// Classical-quantum state Σ_x w_x ρ_x ⊗ |x⟩⟨x| on `(q..., x)`, with the
/// classical index appended as the last subsystem.
pub fn cq_state(e: &Ensemble) -> Result<LabeledState> {
    let q_layout = e.states()[0].layout().clone();
    let nx = e.len();
    let nq = q_layout.total_dim();
    let mut entries: Vec<(String, usize)> =
        q_layout.entries().iter().map(|(l, d)| (l.clone(), *d)).collect();
    entries.push((e.class_label().to_string(), nx));
    let layout = SubsystemLayout::new(entries)?;
    let mut m = ComplexMatrix::zeros(nq * nx, nq * nx);
    for (x, (w, s)) in e.weights().iter().zip(e.states()).enumerate() {
        for i in 0..nq {
            for j in 0..nq {
                m[(i * nx + x, j * nx + x)] = s.matrix()[(i, j)] * *w;
            }
        }
    }
    Ok(LabeledState::trusted(layout, m))
}

/// Holevo information of an ensemble: `S(Σ w ρ) − Σ w S(ρ)` in nats.
pub fn holevo_information(e: &Ensemble) -> Result<f64> {
    let avg = von_neumann(&e.average_state());
    let cond: f64 = e
        .weights()
        .iter()
        .zip(e.states())
        .map(|(w, s)| w * von_neumann(s))
        .sum();
    Ok(avg - cond)
}

/// Converts nats to bits.
pub fn nats_to_bits(x: f64) -> f64 {
    x / LN_2
}
