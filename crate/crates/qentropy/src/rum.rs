//! A toy model of pure-state entropies built from roots of unity.
//!
//! Party `j` of an `n`-party system is assigned the phase
//! `exp(2πi(j−1)/n)`; the "entropy" of a subset is the modulus of the
//! coherent sum of its phases.  The model reproduces, exactly, several
//! structural features of pure-state entropies: complement symmetry,
//! the vanishing total, the triangle (Araki-Lieb-like) lower bound and
//! subadditivity — and it makes negative conditional values obvious,
//! since removing a subset's modulus can overshoot the joint modulus.

use num_complex::Complex;

use crate::checks::CheckVerdict;
use crate::{Error, Result};

/// Tolerance for the exhaustive suite: the identities are exact, so only
/// rounding noise is allowed.
const RUM_TOL: f64 = 1e-12;

/// Largest party count accepted by the exhaustive suite.
const SUITE_CAP: usize = 16;

/// An `n`-party system whose subset entropies are moduli of root-of-unity
/// sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RumSystem {
    n: usize,
}

impl RumSystem {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "party count must be at least 1".into(),
            ));
        }
        Ok(RumSystem { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn root(&self, j: usize) -> Complex<f64> {
        let angle = 2.0 * std::f64::consts::PI * (j as f64 - 1.0) / self.n as f64;
        Complex::new(angle.cos(), angle.sin())
    }

    /// Entropy of a subset of parties, given as 1-based indices:
    /// `|Σ_{j∈J} exp(2πi(j−1)/n)|`.
    pub fn entropy(&self, subset: &[usize]) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::EmptySelection);
        }
        let mut seen = vec![false; self.n + 1];
        let mut sum = Complex::new(0.0, 0.0);
        for &j in subset {
            if j == 0 || j > self.n {
                return Err(Error::SubsetOutOfRange {
                    element: j,
                    n: self.n,
                });
            }
            if seen[j] {
                return Err(Error::InvalidParameter(format!(
                    "party {j} listed twice"
                )));
            }
            seen[j] = true;
            sum += self.root(j);
        }
        Ok(sum.norm())
    }

    /// Entropies of all subsets, indexed by bitmask over parties
    /// (bit `j−1` ⇔ party `j`); entry 0 is 0.
    pub fn subset_values(&self) -> Result<Vec<f64>> {
        Ok(self.subset_sums()?.iter().map(|z| z.norm()).collect())
    }

    fn subset_sums(&self) -> Result<Vec<Complex<f64>>> {
        if self.n > SUITE_CAP {
            return Err(Error::TooLarge {
                what: "party count for exhaustive subset enumeration".into(),
                max: SUITE_CAP,
                got: self.n,
            });
        }
        let mut sums = vec![Complex::new(0.0, 0.0); 1 << self.n];
        for mask in 1..sums.len() {
            let low = mask.trailing_zeros() as usize;
            sums[mask] = sums[mask & (mask - 1)] + self.root(low + 1);
        }
        Ok(sums)
    }

    /// Runs the exhaustive identity/inequality suite over all subsets.
    ///
    /// Four families, each reported as the worst case found:
    /// complement symmetry `S(J) = S(J^c)` over every nonempty proper
    /// subset; the triangle lower bound `|S(J) − S(K)| ≤ S(J∪K)` and
    /// subadditivity `S(J∪K) ≤ S(J) + S(K)` over every pair of disjoint
    /// nonempty subsets; and the existence of a strictly negative
    /// conditional value `S(K|J) = S(K∪J) − S(J) < 0`, which holds for
    /// every `n ≥ 2`.  All comparisons use a 1e-12 tolerance.  For
    /// `n = 1` there is nothing to compare and the list is empty.
    pub fn check_suite(&self) -> Result<Vec<CheckVerdict>> {
        let values: Vec<f64> = self.subset_values()?;
        let full = values.len() - 1;
        let dims = vec![self.n];
        if self.n == 1 {
            return Ok(Vec::new());
        }

        let mut complement: Option<(f64, f64)> = None;
        for mask in 1..full {
            let (lhs, rhs) = (values[mask], values[full ^ mask]);
            if complement.map_or(true, |(l, r)| (lhs - rhs).abs() > (l - r).abs()) {
                complement = Some((lhs, rhs));
            }
        }

        let mut lower: Option<(f64, f64)> = None;
        let mut upper: Option<(f64, f64)> = None;
        let mut min_conditional = f64::INFINITY;
        for j in 1..=full {
            let free = full & !j;
            let mut k = free;
            while k > 0 {
                let joint = values[j | k];
                let lo = (values[j] - values[k]).abs();
                if lower.map_or(true, |(l, r)| joint - lo < r - l) {
                    lower = Some((lo, joint));
                }
                let hi = values[j] + values[k];
                if upper.map_or(true, |(l, r)| hi - joint < r - l) {
                    upper = Some((joint, hi));
                }
                min_conditional = min_conditional.min(joint - values[j]);
                k = (k - 1) & free;
            }
        }

        let (c_lhs, c_rhs) = complement.expect("n ≥ 2 has proper subsets");
        let (lo_lhs, lo_rhs) = lower.expect("n ≥ 2 has disjoint pairs");
        let (up_lhs, up_rhs) = upper.expect("n ≥ 2 has disjoint pairs");
        Ok(vec![
            CheckVerdict::identity_tol("rum_complement", c_lhs, c_rhs, 0, dims.clone(), RUM_TOL),
            CheckVerdict::inequality_tol(
                "rum_triangle_lower",
                lo_lhs,
                lo_rhs,
                0,
                dims.clone(),
                RUM_TOL,
            ),
            CheckVerdict::inequality_tol(
                "rum_triangle_upper",
                up_lhs,
                up_rhs,
                0,
                dims.clone(),
                RUM_TOL,
            ),
            // Existence claim: some conditional value is strictly
            // negative; the margin is how far below zero the best
            // witness sits.
            CheckVerdict::raw(
                "rum_negative_conditional",
                min_conditional,
                0.0,
                -min_conditional,
                min_conditional < -RUM_TOL,
                0,
                dims,
            ),
        ])
    }
}
