//! Normalized Hermite polynomials, multi-index enumeration and Gauss-Hermite
//! quadrature for the Gaussian probability measure
//! `gamma_1(x) dx = pi^{-1/2} exp(-x^2) dx`.
//!
//! The basis functions are `h_k = (2^k k!)^{-1/2} H_k` with `H_k` the
//! physicists' Hermite polynomials, so that `{h_k}` is orthonormal in
//! `L^2(gamma_1)` and `L h_k = k h_k` for the Ornstein-Uhlenbeck operator
//! `L = -1/2 d^2/dx^2 + x d/dx`. Probabilists' conventions differ; everything
//! in this crate uses the normalization above.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluate the normalized Hermite polynomial `h_k(x)`.
///
/// Uses the stable three-term recurrence
/// `h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1}`, `h_0 = 1`.
pub fn hermite_eval(k: usize, x: f64) -> f64 {
    let mut prev = 0.0_f64;
    let mut cur = 1.0_f64;
    for j in 0..k {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fill `out[k] = h_k(x)` for `k = 0..out.len()`.
pub(crate) fn hermite_eval_upto(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * x;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// A `d`-tuple of nonnegative degrees indexing one tensor Hermite mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    degrees: Vec<usize>,
    order: usize,
}

impl MultiIndex {
    pub fn new(degrees: Vec<usize>) -> Self {
        let order = degrees.iter().sum();
        MultiIndex { degrees, order }
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Total degree `|alpha|`, the OU eigenvalue of the mode.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dimension(&self) -> usize {
        self.degrees.len()
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.degrees.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Evaluate the tensor mode `h_alpha(x) = prod_k h_{alpha_k}(x_k)`.
pub fn tensor_hermite_eval(alpha: &MultiIndex, x: &[f64]) -> Result<f64> {
    if x.len() != alpha.dimension() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dimension(),
            got: x.len(),
        });
    }
    Ok(alpha
        .degrees()
        .iter()
        .zip(x)
        .map(|(&k, &xi)| hermite_eval(k, xi))
        .product())
}

/// All multi-indices of total degree `<= max_degree` in graded lexicographic
/// order: grades ascend, and within a grade tuples are lexicographically
/// ascending. Eigenspace projections are then contiguous slices.
pub fn multiindex_enumerate(dimension: usize, max_degree: usize) -> Vec<MultiIndex> {
    assert!(dimension >= 1, "dimension must be >= 1");
    let mut out = Vec::with_capacity(mode_count(dimension, max_degree));
    let mut current = vec![0usize; dimension];
    for grade in 0..=max_degree {
        emit_grade(&mut out, &mut current, 0, grade);
    }
    out
}

fn emit_grade(out: &mut Vec<MultiIndex>, current: &mut Vec<usize>, pos: usize, remaining: usize) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex::new(current.clone()));
        return;
    }
    for a in 0..=remaining {
        current[pos] = a;
        emit_grade(out, current, pos + 1, remaining - a);
    }
}

/// `binom(max_degree + dimension, dimension)`, the truncated-basis size.
pub fn mode_count(dimension: usize, max_degree: usize) -> usize {
    checked_mode_count(dimension, max_degree).expect("basis size overflow")
}

fn checked_mode_count(dimension: usize, max_degree: usize) -> Option<usize> {
    let mut acc: u128 = 1;
    for i in 1..=dimension as u128 {
        acc = acc.checked_mul(max_degree as u128 + i)? / i;
        if acc > (1 << 40) {
            return None;
        }
    }
    usize::try_from(acc).ok()
}

/// Hard ceilings on basis parameters. They keep decoding of untrusted
/// records from requesting absurd allocations; legitimate workloads sit far
/// below them.
pub const MAX_DIMENSION: usize = 16;
pub const MAX_AXIS_SIZE: usize = 1 << 20;
pub const MAX_MODES: usize = 1 << 24;

/// Truncation parameters of the spectral basis.
///
/// `nodes_per_axis >= max_degree + 1` guarantees the quadrature rule
/// integrates every product `h_j h_k`, `j + k <= 2 max_degree`, exactly
/// against `gamma_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBasisSpec")]
pub struct BasisSpec {
    dimension: usize,
    max_degree: usize,
    nodes_per_axis: usize,
}

#[derive(Deserialize)]
struct RawBasisSpec {
    dimension: usize,
    max_degree: usize,
    nodes_per_axis: usize,
}

impl TryFrom<RawBasisSpec> for BasisSpec {
    type Error = Error;

    fn try_from(raw: RawBasisSpec) -> Result<Self> {
        BasisSpec::new(raw.dimension, raw.max_degree, raw.nodes_per_axis)
    }
}

impl BasisSpec {
    pub fn new(dimension: usize, max_degree: usize, nodes_per_axis: usize) -> Result<Self> {
        if !(1..=MAX_DIMENSION).contains(&dimension) {
            return Err(Error::InvalidParameter(format!(
                "dimension must be in 1..={MAX_DIMENSION}"
            )));
        }
        if max_degree >= MAX_AXIS_SIZE || nodes_per_axis > MAX_AXIS_SIZE {
            return Err(Error::InvalidParameter(format!(
                "per-axis sizes are capped at {MAX_AXIS_SIZE}"
            )));
        }
        if nodes_per_axis < max_degree + 1 {
            return Err(Error::InvalidParameter(format!(
                "nodes_per_axis = {nodes_per_axis} must be >= max_degree + 1 = {}",
                max_degree + 1
            )));
        }
        match checked_mode_count(dimension, max_degree) {
            Some(count) if count <= MAX_MODES => {}
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "basis would exceed {MAX_MODES} modes"
                )))
            }
        }
        Ok(BasisSpec {
            dimension,
            max_degree,
            nodes_per_axis,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    /// Number of retained modes, `binom(N + d, d)`.
    pub fn mode_count(&self) -> usize {
        mode_count(self.dimension, self.max_degree)
    }

    pub fn indices(&self) -> Vec<MultiIndex> {
        multiindex_enumerate(self.dimension, self.max_degree)
    }
}

/// One-dimensional Gauss-Hermite rule normalized to the probability measure
/// `gamma_1`: `sum_m v_m p(x_m) = int p d gamma_1` exactly for polynomials of
/// degree `<= 2 len - 1`. Weights sum to 1; nodes are symmetric about 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` against `gamma_1`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &v)| v * f(x))
            .sum()
    }
}

/// Build the `m`-point Gauss-Hermite rule for `gamma_1` by Golub-Welsch:
/// nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix
/// (off-diagonal `sqrt(k/2)`), weights come from the Christoffel function
/// `v = 1 / sum_{k<m} h_k(x)^2`. Nodes are symmetrized in post-processing.
pub fn gauss_hermite_rule(m: usize) -> Result<QuadratureRule1D> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "quadrature rule needs at least one node".into(),
        ));
    }
    let off: Vec<f64> = (1..m).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut nodes = tridiagonal_eigenvalues(m, &off);

    // Kill asymmetric rounding: pair x_i with -x_{m-1-i}.
    for i in 0..m / 2 {
        let s = 0.5 * (nodes[i] - nodes[m - 1 - i]);
        nodes[i] = s;
        nodes[m - 1 - i] = -s;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }

    // Christoffel weights, evaluated with the scaled recurrence
    // phi_k = h_k e^{-x^2/2} so that large nodes cannot overflow.
    let mut weights = vec![0.0f64; m];
    let mut phi = vec![0.0f64; m];
    for (i, &x) in nodes.iter().enumerate() {
        scaled_hermite_upto(x, &mut phi);
        let sum: f64 = phi.iter().map(|p| p * p).sum();
        weights[i] = if sum > 0.0 { (-x * x).exp() / sum } else { 0.0 };
    }
    for i in 0..m / 2 {
        let s = 0.5 * (weights[i] + weights[m - 1 - i]);
        weights[i] = s;
        weights[m - 1 - i] = s;
    }

    Ok(QuadratureRule1D { nodes, weights })
}

/// `out[k] = h_k(x) exp(-x^2/2)`; same recurrence as `hermite_eval_upto`,
/// started from the scaled seed.
pub(crate) fn scaled_hermite_upto(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let seed = (-0.5 * x * x).exp();
    out[0] = seed;
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * x * seed;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with zero diagonal and
/// off-diagonal `off`, by Sturm-sequence bisection. Returned ascending.
fn tridiagonal_eigenvalues(n: usize, off: &[f64]) -> Vec<f64> {
    debug_assert_eq!(off.len(), n.saturating_sub(1));
    if n == 1 {
        return vec![0.0];
    }
    let off2: Vec<f64> = off.iter().map(|b| b * b).collect();
    // Gershgorin bound for the zero-diagonal Jacobi matrix.
    let bound = 2.0 * off.last().unwrap().max(off[0]) + 1.0;

    // Number of eigenvalues strictly below x, via the LDL^T pivot signs.
    let count_below = |x: f64| -> usize {
        let mut count = 0usize;
        let mut q = -x;
        if q < 0.0 {
            count += 1;
        }
        for &b2 in &off2 {
            let denom = if q == 0.0 { 1e-300 } else { q };
            q = -x - b2 / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };

    let mut eigs = Vec::with_capacity(n);
    for j in 0..n {
        let mut lo = -bound;
        let mut hi = bound;
        // Bisect until the interval collapses to adjacent floats.
        for _ in 0..120 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        eigs.push(0.5 * (lo + hi));
    }
    eigs
}
