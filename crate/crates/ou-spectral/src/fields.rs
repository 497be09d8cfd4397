//! Dual representations of a state: spectral coefficients over the truncated
//! tensor Hermite basis, and complex values on the tensor Gauss-Hermite grid.
//! Transforms between the two are separable per-axis matrix applications,
//! `O(d M^{d+1})` instead of the naive `O(M^{2d})`.

use ndarray::{ArrayD, ArrayViewD, Axis, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{
    gauss_hermite_rule, hermite_eval_upto, BasisSpec, MultiIndex, QuadratureRule1D,
};

/// Complex coefficient vector over all multi-indices of total degree
/// `<= max_degree`, ordered as `multiindex_enumerate`. Entry `alpha` holds
/// `<f, h_alpha>_{gamma_d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    spec: BasisSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(spec: BasisSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != spec.mode_count() {
            return Err(Error::InvalidParameter(format!(
                "coefficient vector has length {}, basis has {} modes",
                coeffs.len(),
                spec.mode_count()
            )));
        }
        Ok(SpectralField { spec, coeffs })
    }

    pub fn zeros(spec: BasisSpec) -> Self {
        let coeffs = vec![Complex64::new(0.0, 0.0); spec.mode_count()];
        SpectralField { spec, coeffs }
    }

    /// Unit coefficient on the mode at enumeration position `idx`.
    pub fn unit_mode(spec: BasisSpec, idx: usize) -> Result<Self> {
        if idx >= spec.mode_count() {
            return Err(Error::InvalidParameter(format!(
                "mode index {idx} out of range (mode count {})",
                spec.mode_count()
            )));
        }
        let mut f = SpectralField::zeros(spec);
        f.coeffs[idx] = Complex64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `l^2` norm of the coefficients; by Parseval this is the
    /// `L^2_{gamma_d}` norm of the represented function.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        for c in &mut self.coeffs {
            *c *= factor;
        }
        self
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SpectralField { spec: self.spec, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(SpectralField { spec: self.spec, coeffs })
    }

    /// Embed into a larger basis (same dimension, `max_degree` and
    /// `nodes_per_axis` not smaller), zero-padding the new modes.
    pub fn embed(&self, target: BasisSpec) -> Result<Self> {
        if target.dimension() != self.spec.dimension()
            || target.max_degree() < self.spec.max_degree()
        {
            return Err(Error::SpecMismatch);
        }
        let target_indices = target.indices();
        let rank: std::collections::HashMap<&[usize], usize> = target_indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.degrees(), i))
            .collect();
        let mut out = SpectralField::zeros(target);
        for (c, alpha) in self.coeffs.iter().zip(self.spec.indices().iter()) {
            out.coeffs[rank[alpha.degrees()]] = *c;
        }
        Ok(out)
    }
}

/// Complex values on the tensor Gauss-Hermite node grid, shape `M^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    spec: BasisSpec,
    values: ArrayD<Complex64>,
}

impl GridField {
    pub fn new(spec: BasisSpec, values: ArrayD<Complex64>) -> Result<Self> {
        let expect: Vec<usize> = vec![spec.nodes_per_axis(); spec.dimension()];
        if values.shape() != expect.as_slice() {
            return Err(Error::InvalidParameter(format!(
                "grid shape {:?} does not match spec {:?}",
                values.shape(),
                expect
            )));
        }
        Ok(GridField { spec, values })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn values(&self) -> ArrayViewD<'_, Complex64> {
        self.values.view()
    }
}

/// Apply `mat` (`p x m`) along `axis` of `arr`, contracting the length-`m`
/// axis: `out[.., i, ..] = sum_k mat[i, k] arr[.., k, ..]`.
fn apply_matrix_axis(
    arr: &ArrayD<Complex64>,
    mat: &[Vec<f64>],
    axis: usize,
) -> ArrayD<Complex64> {
    let rows = mat.len();
    let cols = mat[0].len();
    debug_assert_eq!(arr.shape()[axis], cols);
    let mut shape = arr.shape().to_vec();
    shape[axis] = rows;
    let mut out = ArrayD::from_elem(IxDyn(&shape), Complex64::new(0.0, 0.0));
    let lanes_in = arr.lanes(Axis(axis));
    let lanes_out = out.lanes_mut(Axis(axis));
    for (lane_in, mut lane_out) in lanes_in.into_iter().zip(lanes_out) {
        for (i, row) in mat.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &m) in row.iter().enumerate() {
                acc += lane_in[k] * m;
            }
            lane_out[i] = acc;
        }
    }
    out
}

/// Complex-matrix variant of `apply_matrix_axis`.
pub(crate) fn apply_complex_matrix_axis(
    arr: &ArrayD<Complex64>,
    mat: &[Vec<Complex64>],
    axis: usize,
) -> ArrayD<Complex64> {
    let rows = mat.len();
    let mut shape = arr.shape().to_vec();
    shape[axis] = rows;
    let mut out = ArrayD::from_elem(IxDyn(&shape), Complex64::new(0.0, 0.0));
    let lanes_in = arr.lanes(Axis(axis));
    let lanes_out = out.lanes_mut(Axis(axis));
    for (lane_in, mut lane_out) in lanes_in.into_iter().zip(lanes_out) {
        for (i, row) in mat.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &m) in row.iter().enumerate() {
                acc += lane_in[k] * m;
            }
            lane_out[i] = acc;
        }
    }
    out
}

/// Flat position of a multi-index inside the full `(N+1)^d` tensor.
fn mode_positions(spec: &BasisSpec) -> impl Fn(&MultiIndex) -> usize {
    let stride = spec.max_degree() + 1;
    let d = spec.dimension();
    move |alpha: &MultiIndex| {
        let mut pos = 0usize;
        for i in 0..d {
            pos = pos * stride + alpha.degrees()[i];
        }
        pos
    }
}

/// Evaluation matrix `E[p][k] = h_k(points[p])`, `k <= max_degree`.
pub(crate) fn eval_matrix(points: &[f64], max_degree: usize) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|&x| {
            let mut row = vec![0.0; max_degree + 1];
            hermite_eval_upto(x, &mut row);
            row
        })
        .collect()
}

/// Scatter coefficients into the full `(N+1)^d` tensor.
fn scatter_full(f: &SpectralField) -> ArrayD<Complex64> {
    let spec = f.spec();
    let n1 = spec.max_degree() + 1;
    let mut tensor =
        ArrayD::from_elem(IxDyn(&vec![n1; spec.dimension()]), Complex64::new(0.0, 0.0));
    let pos = mode_positions(spec);
    let flat = tensor
        .as_slice_mut()
        .expect("freshly allocated tensor is contiguous");
    for (c, alpha) in f.coeffs().iter().zip(spec.indices().iter()) {
        flat[pos(alpha)] = *c;
    }
    tensor
}

/// Synthesize `f` on an arbitrary tensor grid given per-axis point lists.
pub fn evaluate_on_axes(f: &SpectralField, axes: &[Vec<f64>]) -> Result<ArrayD<Complex64>> {
    let spec = f.spec();
    if axes.len() != spec.dimension() {
        return Err(Error::DimensionMismatch {
            expected: spec.dimension(),
            got: axes.len(),
        });
    }
    let mut cur = scatter_full(f);
    for (ax, pts) in axes.iter().enumerate() {
        let mat = eval_matrix(pts, spec.max_degree());
        cur = apply_matrix_axis(&cur, &mat, ax);
    }
    Ok(cur)
}

/// Synthesize with one precomputed evaluation matrix shared by every axis.
pub(crate) fn synthesize_tensor(f: &SpectralField, mat: &[Vec<f64>]) -> ArrayD<Complex64> {
    let mut cur = scatter_full(f);
    for ax in 0..f.spec().dimension() {
        cur = apply_matrix_axis(&cur, mat, ax);
    }
    cur
}

/// Precomputed forward/inverse transform operators for one basis spec.
/// Read-only after construction; shareable across threads.
#[derive(Debug, Clone)]
pub struct Transform {
    spec: BasisSpec,
    rule: QuadratureRule1D,
    /// `analysis[k][m] = h_k(x_m) v_m`
    analysis: Vec<Vec<f64>>,
    /// `synthesis[m][k] = h_k(x_m)`
    synthesis: Vec<Vec<f64>>,
}

impl Transform {
    pub fn new(spec: BasisSpec) -> Result<Self> {
        let rule = gauss_hermite_rule(spec.nodes_per_axis())?;
        let synthesis = eval_matrix(rule.nodes(), spec.max_degree());
        let m = spec.nodes_per_axis();
        let n1 = spec.max_degree() + 1;
        let mut analysis = vec![vec![0.0; m]; n1];
        for (i, row) in synthesis.iter().enumerate() {
            for k in 0..n1 {
                analysis[k][i] = row[k] * rule.weights()[i];
            }
        }
        Ok(Transform {
            spec,
            rule,
            analysis,
            synthesis,
        })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn rule(&self) -> &QuadratureRule1D {
        &self.rule
    }

    /// Hermite coefficients by tensor quadrature,
    /// `c_alpha = sum_m (prod_k v_{m_k}) g(x_m) h_alpha(x_m)`.
    pub fn forward(&self, g: &GridField) -> Result<SpectralField> {
        if g.spec() != &self.spec {
            return Err(Error::SpecMismatch);
        }
        if g.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("grid values"));
        }
        let mut cur = g.values.clone();
        for ax in 0..self.spec.dimension() {
            cur = apply_matrix_axis(&cur, &self.analysis, ax);
        }
        let flat = cur.as_slice().expect("contracted tensor is contiguous");
        let pos = mode_positions(&self.spec);
        let coeffs = self
            .spec
            .indices()
            .iter()
            .map(|alpha| flat[pos(alpha)])
            .collect();
        SpectralField::new(self.spec, coeffs)
    }

    /// Pointwise synthesis `sum_alpha c_alpha h_alpha(x_m)` on the node grid.
    pub fn inverse(&self, f: &SpectralField) -> Result<GridField> {
        if f.spec() != &self.spec {
            return Err(Error::SpecMismatch);
        }
        let values = synthesize_tensor(f, &self.synthesis);
        GridField::new(self.spec, values)
    }
}

/// One-shot analysis; builds the transform on the fly. Use [`Transform`]
/// directly to amortize setup over many fields.
pub fn forward_transform(g: &GridField) -> Result<SpectralField> {
    Transform::new(*g.spec())?.forward(g)
}

/// One-shot synthesis on the node grid.
pub fn inverse_transform(f: &SpectralField) -> Result<GridField> {
    Transform::new(*f.spec())?.inverse(f)
}

/// Sample `f` at the tensor quadrature nodes.
pub fn from_function(
    f: impl Fn(&[f64]) -> Complex64,
    spec: &BasisSpec,
) -> Result<GridField> {
    let rule = gauss_hermite_rule(spec.nodes_per_axis())?;
    let d = spec.dimension();
    let m = spec.nodes_per_axis();
    let shape = vec![m; d];
    let mut values = ArrayD::from_elem(IxDyn(&shape), Complex64::new(0.0, 0.0));
    let mut point = vec![0.0f64; d];
    for (idx, v) in values.indexed_iter_mut() {
        for k in 0..d {
            point[k] = rule.nodes()[idx[k]];
        }
        let val = f(&point);
        if !val.re.is_finite() || !val.im.is_finite() {
            return Err(Error::NonFinite("sampled function value"));
        }
        *v = val;
    }
    GridField::new(*spec, values)
}

/// `<u, v>_{gamma_d} = sum_m (prod_k v_{m_k}) u(x_m) conj(v(x_m))` by tensor
/// quadrature.
pub fn inner_product_gamma(u: &GridField, v: &GridField) -> Result<Complex64> {
    if u.spec() != v.spec() {
        return Err(Error::SpecMismatch);
    }
    let rule = gauss_hermite_rule(u.spec().nodes_per_axis())?;
    let w = rule.weights();
    let mut acc = Complex64::new(0.0, 0.0);
    for ((idx, a), b) in u.values.indexed_iter().zip(v.values.iter()) {
        let mut vol = 1.0;
        for k in 0..u.spec().dimension() {
            vol *= w[idx[k]];
        }
        acc += vol * a * b.conj();
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Serialization: a flat record {spec, coeffs}. JSON carries coefficients as
// [re, im] pairs; the binary layout is documented in docs/formats.md and uses
// little-endian 64-bit floats throughout.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct FieldRecord {
    spec: BasisSpec,
    coeffs: Vec<(f64, f64)>,
}

const BINARY_MAGIC: &[u8; 4] = b"OUSF";
const BINARY_VERSION: u32 = 1;
/// Refuse to allocate for absurd mode counts when decoding untrusted input.
const MAX_DECODE_MODES: usize = 1 << 24;

impl SpectralField {
    pub fn to_json_string(&self) -> String {
        let record = FieldRecord {
            spec: self.spec,
            coeffs: self.coeffs.iter().map(|c| (c.re, c.im)).collect(),
        };
        serde_json::to_string(&record).expect("field record serialization cannot fail")
    }

    pub fn from_json_slice(bytes: &[u8]) -> Result<Self> {
        let record: FieldRecord =
            serde_json::from_slice(bytes).map_err(|e| Error::Format(e.to_string()))?;
        if record.coeffs.len() != record.spec.mode_count() {
            return Err(Error::Format(format!(
                "record has {} coefficients, basis has {} modes",
                record.coeffs.len(),
                record.spec.mode_count()
            )));
        }
        if record.coeffs.iter().any(|&(re, im)| !re.is_finite() || !im.is_finite()) {
            return Err(Error::Format("non-finite coefficient in record".into()));
        }
        let coeffs = record
            .coeffs
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect();
        SpectralField::new(record.spec, coeffs)
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(28 + 16 * self.coeffs.len());
        out.extend_from_slice(BINARY_MAGIC);
        out.extend_from_slice(&BINARY_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.spec.dimension() as u32).to_le_bytes());
        out.extend_from_slice(&(self.spec.max_degree() as u32).to_le_bytes());
        out.extend_from_slice(&(self.spec.nodes_per_axis() as u32).to_le_bytes());
        out.extend_from_slice(&(self.coeffs.len() as u64).to_le_bytes());
        for c in &self.coeffs {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        let take = |range: std::ops::Range<usize>| -> Result<&[u8]> {
            bytes
                .get(range)
                .ok_or_else(|| Error::Format("truncated field record".into()))
        };
        if take(0..4)? != BINARY_MAGIC {
            return Err(Error::Format("bad magic, not a field record".into()));
        }
        let u32_at = |off: usize| -> Result<u32> {
            Ok(u32::from_le_bytes(take(off..off + 4)?.try_into().unwrap()))
        };
        let version = u32_at(4)?;
        if version != BINARY_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let d = u32_at(8)? as usize;
        let n = u32_at(12)? as usize;
        let m = u32_at(16)? as usize;
        let count = u64::from_le_bytes(take(20..28)?.try_into().unwrap()) as usize;
        let spec =
            BasisSpec::new(d, n, m).map_err(|e| Error::Format(format!("bad spec: {e}")))?;
        if count > MAX_DECODE_MODES || count != spec.mode_count() {
            return Err(Error::Format(format!(
                "coefficient count {count} does not match basis ({} modes)",
                spec.mode_count()
            )));
        }
        if bytes.len() != 28 + 16 * count {
            return Err(Error::Format(format!(
                "record length {} does not match header (expected {})",
                bytes.len(),
                28 + 16 * count
            )));
        }
        let mut coeffs = Vec::with_capacity(count);
        for i in 0..count {
            let off = 28 + 16 * i;
            let re = f64::from_le_bytes(take(off..off + 8)?.try_into().unwrap());
            let im = f64::from_le_bytes(take(off + 8..off + 16)?.try_into().unwrap());
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Format("non-finite coefficient in record".into()));
            }
            coeffs.push(Complex64::new(re, im));
        }
        SpectralField::new(spec, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::tensor_hermite_eval;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_field(spec: BasisSpec, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = spec
            .indices()
            .iter()
            .map(|a| {
                let damp = (-(a.order() as f64) / 8.0).exp();
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * damp
            })
            .collect();
        SpectralField::new(spec, coeffs).unwrap()
    }

    #[test]
    fn forward_of_constant_is_mode_zero() {
        let spec = BasisSpec::new(2, 8, 12).unwrap();
        let g = from_function(|_| c(1.0), &spec).unwrap();
        let f = Transform::new(spec).unwrap().forward(&g).unwrap();
        assert_abs_diff_eq!(f.coeffs()[0].re, 1.0, epsilon = 1e-13);
        for (i, co) in f.coeffs().iter().enumerate().skip(1) {
            assert!(co.norm() <= 1e-13, "mode {i} leaked {co}");
        }
    }

    #[test]
    fn forward_recovers_sampled_tensor_mode() {
        let spec = BasisSpec::new(2, 8, 12).unwrap();
        let alpha = MultiIndex::new(vec![2, 1]);
        let g = from_function(
            |x| c(tensor_hermite_eval(&alpha, x).unwrap()),
            &spec,
        )
        .unwrap();
        let f = Transform::new(spec).unwrap().forward(&g).unwrap();
        for (co, a) in f.coeffs().iter().zip(spec.indices().iter()) {
            let expect = if a.degrees() == alpha.degrees() { 1.0 } else { 0.0 };
            assert!(
                (co.re - expect).abs() <= 1e-12 && co.im.abs() <= 1e-12,
                "mode {a}: {co}"
            );
        }
    }

    #[test]
    fn coordinate_function_has_known_coefficient() {
        // x_1 = h_1(x_1)/sqrt(2), so the (1,0) coefficient is 1/sqrt(2).
        let spec = BasisSpec::new(2, 4, 8).unwrap();
        let g = from_function(|x| c(x[0]), &spec).unwrap();
        let f = Transform::new(spec).unwrap().forward(&g).unwrap();
        let idx = spec.indices();
        let pos = idx
            .iter()
            .position(|a| a.degrees() == [1, 0])
            .unwrap();
        assert_abs_diff_eq!(
            f.coeffs()[pos].re,
            1.0 / std::f64::consts::SQRT_2,
            epsilon = 1e-13
        );
    }

    #[test]
    fn inverse_of_delta_mode_zero_is_constant_grid() {
        let spec = BasisSpec::new(1, 6, 8).unwrap();
        let f = SpectralField::unit_mode(spec, 0).unwrap();
        let g = Transform::new(spec).unwrap().inverse(&f).unwrap();
        for v in g.values().iter() {
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn round_trip_identity_on_coefficients() {
        let spec = BasisSpec::new(1, 24, 32).unwrap();
        let t = Transform::new(spec).unwrap();
        let f = random_field(spec, 7);
        let back = t.forward(&t.inverse(&f).unwrap()).unwrap();
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn round_trip_2d() {
        let spec = BasisSpec::new(2, 10, 14).unwrap();
        let t = Transform::new(spec).unwrap();
        let f = random_field(spec, 8);
        let back = t.forward(&t.inverse(&f).unwrap()).unwrap();
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn round_trip_error_grows_at_most_linearly_in_degree() {
        // Regression bound on transform conditioning.
        for n in [8usize, 16, 32, 64] {
            let spec = BasisSpec::new(1, n, n + 8).unwrap();
            let t = Transform::new(spec).unwrap();
            let f = random_field(spec, 11);
            let back = t.forward(&t.inverse(&f).unwrap()).unwrap();
            let err = f
                .coeffs()
                .iter()
                .zip(back.coeffs())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            assert!(
                err <= 1e-14 * (n as f64 + 1.0),
                "N={n}: round-trip error {err}"
            );
        }
    }

    #[test]
    fn parseval_links_grid_norm_to_coefficients() {
        let spec = BasisSpec::new(1, 16, 24).unwrap();
        let t = Transform::new(spec).unwrap();
        let f = random_field(spec, 3);
        let g = t.inverse(&f).unwrap();
        let norm_grid = inner_product_gamma(&g, &g).unwrap().re.sqrt();
        let norm_coeff = f.l2_norm();
        assert!(
            (norm_grid - norm_coeff).abs() <= 1e-12 * norm_coeff,
            "{norm_grid} vs {norm_coeff}"
        );
    }

    #[test]
    fn inner_product_orthonormality() {
        let spec = BasisSpec::new(1, 4, 8).unwrap();
        let t = Transform::new(spec).unwrap();
        let h1 = t
            .inverse(&SpectralField::unit_mode(spec, 1).unwrap())
            .unwrap();
        let h2 = t
            .inverse(&SpectralField::unit_mode(spec, 2).unwrap())
            .unwrap();
        let one = from_function(|_| c(1.0), &spec).unwrap();
        assert_abs_diff_eq!(inner_product_gamma(&one, &one).unwrap().re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(inner_product_gamma(&h1, &h1).unwrap().re, 1.0, epsilon = 1e-13);
        assert!(inner_product_gamma(&h1, &h2).unwrap().norm() <= 1e-13);
    }

    #[test]
    fn inner_product_rejects_mismatched_specs() {
        let a = from_function(|_| c(0.0), &BasisSpec::new(1, 4, 8).unwrap()).unwrap();
        let b = from_function(|_| c(0.0), &BasisSpec::new(1, 4, 9).unwrap()).unwrap();
        assert!(matches!(inner_product_gamma(&a, &b), Err(Error::SpecMismatch)));
    }

    #[test]
    fn from_function_samples_nodes() {
        let spec = BasisSpec::new(1, 4, 9).unwrap();
        let g = from_function(|x| c((-x[0] * x[0]).exp()), &spec).unwrap();
        // M odd puts a node exactly at the origin.
        let mid = spec.nodes_per_axis() / 2;
        assert_eq!(g.values()[IxDyn(&[mid])], c(1.0));

        let zero = from_function(|_| c(0.0), &spec).unwrap();
        assert!(zero.values().iter().all(|v| v.norm() == 0.0));

        let h1 = from_function(|x| c(crate::hermite::hermite_eval(1, x[0])), &spec).unwrap();
        let rule = gauss_hermite_rule(9).unwrap();
        for (i, v) in h1.values().iter().enumerate() {
            assert_abs_diff_eq!(
                v.re,
                std::f64::consts::SQRT_2 * rule.nodes()[i],
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn from_function_rejects_non_finite() {
        let spec = BasisSpec::new(1, 2, 4).unwrap();
        let res = from_function(|x| c(1.0 / x[0].abs().min(0.0)), &spec);
        assert!(matches!(res, Err(Error::NonFinite(_))));
    }

    #[test]
    fn embed_preserves_mode_identity_in_2d() {
        let spec = BasisSpec::new(2, 4, 8).unwrap();
        let target = BasisSpec::new(2, 9, 16).unwrap();
        let f = random_field(spec, 21);
        let e = f.embed(target).unwrap();
        // Same function: values agree at arbitrary points.
        let axes = vec![vec![-1.3, 0.2, 2.4], vec![0.9, -0.4, 1.7]];
        let a = evaluate_on_axes(&f, &axes).unwrap();
        let b = evaluate_on_axes(&e, &axes).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() <= 1e-13 * (1.0 + x.norm()));
        }
        assert_eq!(e.l2_norm(), f.l2_norm());
    }

    #[test]
    fn json_round_trip() {
        let spec = BasisSpec::new(2, 5, 8).unwrap();
        let f = random_field(spec, 5);
        let s = f.to_json_string();
        let back = SpectralField::from_json_slice(s.as_bytes()).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn binary_round_trip_and_rejections() {
        let spec = BasisSpec::new(1, 6, 10).unwrap();
        let f = random_field(spec, 6);
        let bytes = f.to_binary();
        let back = SpectralField::from_binary(&bytes).unwrap();
        assert_eq!(f, back);

        assert!(SpectralField::from_binary(&bytes[..10]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(SpectralField::from_binary(&bad).is_err());
        let mut short = bytes.clone();
        short.truncate(bytes.len() - 8);
        assert!(SpectralField::from_binary(&short).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn transforms_are_linear(seed1 in 0u64..1000, seed2 in 0u64..1000,
                                 a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let spec = BasisSpec::new(1, 10, 14).unwrap();
            let t = Transform::new(spec).unwrap();
            let f1 = random_field(spec, seed1);
            let f2 = random_field(spec, seed2);
            let combo = f1.clone().scale(c(a)).add(&f2.clone().scale(c(b))).unwrap();
            let lhs = t.inverse(&combo).unwrap();
            let g1 = t.inverse(&f1).unwrap();
            let g2 = t.inverse(&f2).unwrap();
            for ((l, x), y) in lhs.values().iter().zip(g1.values().iter()).zip(g2.values().iter()) {
                let rhs = x * a + y * b;
                prop_assert!((l - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
            }
        }

        #[test]
        fn binary_decoder_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
            let _ = SpectralField::from_binary(&bytes);
        }

        #[test]
        fn json_decoder_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
            let _ = SpectralField::from_json_slice(&bytes);
        }
    }
}
