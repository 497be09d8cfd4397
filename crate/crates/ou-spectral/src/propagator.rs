//! The Schrödinger group `e^{-itL}` of the Ornstein-Uhlenbeck operator, in
//! two independent realizations: exact eigenvalue phases on the spectral
//! coefficients (the production path) and quadrature against the explicit
//! oscillatory kernel (the validation path, also usable off-grid). The heat
//! semigroup `e^{-tL}` and the eigenspace projections complete the module.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::fields::{
    apply_complex_matrix_axis, eval_matrix, synthesize_tensor, GridField, SpectralField,
    Transform,
};
use crate::hermite::{gauss_hermite_rule, BasisSpec};
use crate::spaces::{TimeGrid, Trajectory};

/// Guard and resolution parameters for kernel-route evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEvalConfig {
    /// Exclusion radius around the singular set `pi * Z`; in `(0, pi/4]`.
    pub t_exclusion: f64,
    /// Multiplies the quadrature node count; >= 1. The propagator never goes
    /// below the resolution floor required by the kernel's phase gradient,
    /// so this knob only adds nodes beyond that floor.
    pub oversample: usize,
}

impl Default for KernelEvalConfig {
    fn default() -> Self {
        KernelEvalConfig {
            t_exclusion: 0.05,
            oversample: 4,
        }
    }
}

impl KernelEvalConfig {
    fn validate(&self) -> Result<()> {
        if !(self.t_exclusion > 0.0 && self.t_exclusion <= FRAC_PI_4) {
            return Err(Error::InvalidParameter(format!(
                "t_exclusion = {} must lie in (0, pi/4]",
                self.t_exclusion
            )));
        }
        if self.oversample < 1 {
            return Err(Error::InvalidParameter("oversample must be >= 1".into()));
        }
        Ok(())
    }

    fn guard(&self, t: f64) -> Result<()> {
        let frac = t.rem_euclid(PI);
        let dist = frac.min(PI - frac);
        if dist < self.t_exclusion {
            return Err(Error::SingularTime {
                t,
                guard: self.t_exclusion,
            });
        }
        Ok(())
    }
}

/// `e^{-itL}`: multiply each coefficient by `e^{-i |alpha| t}`. Unitary on
/// the truncated basis for every real `t`.
pub fn spectral_propagate(f: &SpectralField, t: f64) -> SpectralField {
    let mut out = f.clone();
    for (c, alpha) in out.coeffs_mut().iter_mut().zip(f.spec().indices()) {
        let phase = Complex64::from_polar(1.0, -(alpha.order() as f64) * t);
        *c *= phase;
    }
    out
}

/// Heat semigroup `e^{-tL}`, `t >= 0`: coefficients scale by `e^{-|alpha| t}`.
pub fn heat_propagate(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "heat semigroup needs t >= 0, got {t}"
        )));
    }
    let mut out = f.clone();
    for (c, alpha) in out.coeffs_mut().iter_mut().zip(f.spec().indices()) {
        *c *= (-(alpha.order() as f64) * t).exp();
    }
    Ok(out)
}

/// Orthogonal projection onto the eigenspace `|alpha| = k`.
pub fn eigen_project(f: &SpectralField, k: usize) -> Result<SpectralField> {
    if k > f.spec().max_degree() {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue {k} exceeds the truncation degree {}",
            f.spec().max_degree()
        )));
    }
    let mut out = f.clone();
    for (c, alpha) in out.coeffs_mut().iter_mut().zip(f.spec().indices()) {
        if alpha.order() != k {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    Ok(out)
}

/// The parity map `u(x) -> u(-x)`: coefficients scale by `(-1)^{|alpha|}`.
pub fn parity_flip(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    for (c, alpha) in out.coeffs_mut().iter_mut().zip(f.spec().indices()) {
        if alpha.order() % 2 == 1 {
            *c = -*c;
        }
    }
    out
}

/// Reduce `t` to the principal branch: returns `(t0, flip, conj)` with
/// `t0 in (0, pi)` such that `M_{it}(x, y)` equals `M_{it0}(x', y)` with
/// `x' = -x` when `flip`, conjugated when `conj`. Uses the periodicity
/// `M_{i(t+pi)}(x,y) = M_{it}(-x,y)` and the conjugation identity
/// `M_{it} = conj(M_{-it})` instead of complex powers of `sin t`.
fn reduce_time(t: f64) -> (f64, bool, bool) {
    if t < 0.0 {
        let (t0, flip, _) = reduce_time(-t);
        return (t0, flip, true);
    }
    let n = (t / PI).floor();
    let t0 = t - n * PI;
    let flip = (n as i64) % 2 == 1;
    (t0, flip, false)
}

/// One-dimensional kernel factor at reduced time `t0 in (0, pi)`.
fn kernel_1d(t0: f64, x: f64, y: f64) -> Complex64 {
    let st = t0.sin();
    let ct = t0.cos();
    let pref = Complex64::from_polar((2.0 * st).sqrt().recip(), -FRAC_PI_4 + 0.5 * t0);
    let amp = (0.5 * (x * x + y * y)).exp();
    let phase = 0.5 * (ct / st * (x * x + y * y) - 2.0 * x * y / st);
    pref * amp * Complex64::from_polar(1.0, phase)
}

/// Pointwise Schrödinger kernel `M_{it}(x, y)`; the dimension is the common
/// length of `x` and `y`. Modulus is `(2 |sin t|)^{-d/2} e^{(|x|^2+|y|^2)/2}`.
pub fn mehler_kernel(t: f64, x: &[f64], y: &[f64], cfg: &KernelEvalConfig) -> Result<Complex64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidParameter("kernel needs dimension >= 1".into()));
    }
    cfg.validate()?;
    cfg.guard(t)?;
    let (t0, flip, conj) = reduce_time(t);
    let mut acc = Complex64::new(1.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let xe = if flip { -xi } else { xi };
        acc *= kernel_1d(t0, xe, yi);
    }
    Ok(if conj { acc.conj() } else { acc })
}

/// Kernel-route propagator for one `(spec, t)` pair, precomputing the
/// weighted one-dimensional kernel matrix and the synthesis matrix onto the
/// oversampled quadrature grid. The kernel's phase gradient
/// `|cot t| Y + X / |sin t|` fixes a node floor; below it the oscillation is
/// unresolved and the quadrature returns garbage, so the floor is not
/// user-adjustable (the oversample knob only adds nodes).
#[derive(Debug, Clone)]
pub struct KernelPropagator {
    spec: BasisSpec,
    transform: Transform,
    kernel_weighted: Vec<Vec<Complex64>>,
    eval_quad: Vec<Vec<f64>>,
    quad_nodes: usize,
}

impl KernelPropagator {
    pub fn new(spec: BasisSpec, t: f64, cfg: &KernelEvalConfig) -> Result<Self> {
        cfg.validate()?;
        cfg.guard(t)?;
        let transform = Transform::new(spec)?;
        let x_nodes = transform.rule().nodes();
        let x_max = x_nodes.last().copied().unwrap_or(0.0).abs();
        let y_support = ((2 * spec.max_degree()) as f64 + 1.0).sqrt() + 2.0;

        let (t0, flip, conj) = reduce_time(t);
        let st = t0.sin();
        let ct = t0.cos();
        let phase_grad = ct.abs() / st * y_support + x_max / st;
        let floor = (0.5 * phase_grad * phase_grad).ceil() as usize + 8;
        let mq = floor.max(cfg.oversample * spec.nodes_per_axis());

        let quad = gauss_hermite_rule(mq)?;
        let eval_quad = eval_matrix(quad.nodes(), spec.max_degree());

        let m = spec.nodes_per_axis();
        let mut kernel_weighted = vec![vec![Complex64::new(0.0, 0.0); mq]; m];
        let pref = Complex64::from_polar((2.0 * st).sqrt().recip(), -FRAC_PI_4 + 0.5 * t0);
        for (row, &xm) in kernel_weighted.iter_mut().zip(x_nodes) {
            let xe = if flip { -xm } else { xm };
            let ax = (0.5 * xe * xe).exp();
            for (entry, (&yn, &vn)) in row
                .iter_mut()
                .zip(quad.nodes().iter().zip(quad.weights()))
            {
                if vn <= 0.0 {
                    continue; // weight underflowed; true contribution is below 1e-300
                }
                let ay = vn * (0.5 * yn * yn).exp();
                let phase = 0.5 * (ct / st * (xe * xe + yn * yn) - 2.0 * xe * yn / st);
                let mut val = pref * (ax * ay) * Complex64::from_polar(1.0, phase);
                if conj {
                    val = val.conj();
                }
                *entry = val;
            }
        }
        Ok(KernelPropagator {
            spec,
            transform,
            kernel_weighted,
            eval_quad,
            quad_nodes: mq,
        })
    }

    /// Number of quadrature nodes per axis actually used.
    pub fn quadrature_nodes(&self) -> usize {
        self.quad_nodes
    }

    /// `u(t, x_m) = int M_{it}(x_m, y) g(y) gamma_d(y) dy` by tensor
    /// quadrature, separably per axis.
    pub fn apply(&self, g: &GridField) -> Result<GridField> {
        if g.spec() != &self.spec {
            return Err(Error::SpecMismatch);
        }
        let f = self.transform.forward(g)?;
        let mut tensor = synthesize_tensor(&f, &self.eval_quad);
        for ax in 0..self.spec.dimension() {
            tensor = apply_complex_matrix_axis(&tensor, &self.kernel_weighted, ax);
        }
        GridField::new(self.spec, tensor)
    }
}

/// One-shot kernel-route propagation. Building the quadrature rule dominates
/// the cost; use [`KernelPropagator`] directly to amortize it over many
/// fields at the same time point.
pub fn kernel_propagate(g: &GridField, t: f64, cfg: &KernelEvalConfig) -> Result<GridField> {
    KernelPropagator::new(*g.spec(), t, cfg)?.apply(g)
}

/// Batch spectral propagation over a time grid.
pub fn trajectory(u0: &SpectralField, grid: &TimeGrid) -> Trajectory {
    let orders: Vec<f64> = u0.spec().indices().iter().map(|a| a.order() as f64).collect();
    let fields = grid
        .nodes()
        .iter()
        .map(|&t| {
            let mut f = u0.clone();
            for (c, &k) in f.coeffs_mut().iter_mut().zip(&orders) {
                *c *= Complex64::from_polar(1.0, -k * t);
            }
            f
        })
        .collect();
    Trajectory::new(*grid, fields).expect("trajectory construction is shape-safe")
}
