//! Gaussian weighted Lebesgue norms, mixed time-space norms, sharp admissible
//! exponent pairs, and the Strichartz-family norm machinery.
//!
//! Weighted norms are taken against `w(x)^s gamma_d(x) dx` with
//! `w(x) = exp(-|x|^2/2)`. The infinity endpoint is the multiplicative
//! reading `sup |u w|`, the `r -> inf` limit of the `w^{r-2}`-weighted scale;
//! the measure-theoretic reading of `L^inf(w gamma dx)` would ignore the
//! weight entirely and is not what the dispersive estimate measures.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::adaptive;
use crate::error::{Error, Result};
use crate::fields::{eval_matrix, synthesize_tensor, GridField, SpectralField, Transform};
use crate::hermite::{gauss_hermite_rule, hermite_eval_upto, BasisSpec};

/// The weight `w(x) = exp(-|x|^2/2)`.
pub fn weight(x: &[f64]) -> f64 {
    (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp()
}

/// Exponent `s` applied to the weight `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPower(pub f64);

/// An exponent pair on the sharp sigma-admissible line
/// `1/q + sigma/r = sigma/2`, with `q, r >= 2` and `(q, r, sigma) != (2, inf, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissiblePair {
    q: f64,
    r: f64,
    sigma: f64,
}

/// Check the sharp sigma-admissibility conditions.
pub fn admissible_check(q: f64, r: f64, sigma: f64) -> bool {
    if !(sigma > 0.0) || q.is_nan() || r.is_nan() {
        return false;
    }
    if q < 2.0 || r < 2.0 {
        return false;
    }
    let excluded = (q - 2.0).abs() < 1e-12 && r.is_infinite() && (sigma - 1.0).abs() < 1e-12;
    if excluded {
        return false;
    }
    let lhs = 1.0 / q + sigma / r;
    (lhs - sigma / 2.0).abs() <= 1e-9 * (1.0 + sigma)
}

impl AdmissiblePair {
    pub fn new(q: f64, r: f64, sigma: f64) -> Result<Self> {
        if !admissible_check(q, r, sigma) {
            return Err(Error::NotAdmissible { q, r, sigma });
        }
        Ok(AdmissiblePair { q, r, sigma })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Hölder conjugate `q' = q/(q-1)`, with `inf' = 1`.
    pub fn q_dual(&self) -> f64 {
        conjugate(self.q)
    }

    pub fn r_dual(&self) -> f64 {
        conjugate(self.r)
    }

    pub fn label(&self) -> String {
        let fmt = |v: f64| {
            if v.is_infinite() {
                "inf".to_string()
            } else {
                format!("{v}")
            }
        };
        format!("({},{})", fmt(self.q), fmt(self.r))
    }
}

fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// A deterministic finite sample of the admissible line with `sigma = d/2`.
///
/// Always starts with `(inf, 2)`; the endpoint `theta = min(1, 2/d)` follows
/// when it is itself admissible (for `d = 2` it is the excluded triple), then
/// interior pairs in dyadic order `1/2, 1/4, 3/4, 1/8, ...` of the parameter
/// range. The parametrization is `q = 4/(d theta)`, `r = 2/(1 - theta)`.
pub fn admissible_family(dimension: usize, count: usize) -> Vec<AdmissiblePair> {
    let sigma = dimension as f64 / 2.0;
    let theta_max = 1.0f64.min(2.0 / dimension as f64);
    let pair_at = |theta: f64| -> Option<AdmissiblePair> {
        let q = if theta == 0.0 {
            f64::INFINITY
        } else {
            4.0 / (dimension as f64 * theta)
        };
        let r = if theta >= 1.0 {
            f64::INFINITY
        } else {
            2.0 / (1.0 - theta)
        };
        AdmissiblePair::new(q, r, sigma).ok()
    };

    let mut family = Vec::with_capacity(count);
    let push = |pair: Option<AdmissiblePair>, family: &mut Vec<AdmissiblePair>| {
        if let Some(p) = pair {
            if family.len() < count {
                family.push(p);
            }
        }
    };
    push(pair_at(0.0), &mut family);
    push(pair_at(theta_max), &mut family);
    let mut level = 1u32;
    while family.len() < count && level < 24 {
        let denom = (1u64 << level) as f64;
        let mut j = 1u64;
        while j < (1 << level) && family.len() < count {
            push(pair_at(theta_max * j as f64 / denom), &mut family);
            j += 2;
        }
        level += 1;
    }
    family
}

/// A uniform grid of `n` time nodes on `[t0, t1] subseteq [-pi/2, pi/2]`,
/// inclusive of endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTimeGrid")]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    n: usize,
}

#[derive(Deserialize)]
struct RawTimeGrid {
    t0: f64,
    t1: f64,
    n: usize,
}

impl TryFrom<RawTimeGrid> for TimeGrid {
    type Error = Error;

    fn try_from(raw: RawTimeGrid) -> Result<Self> {
        TimeGrid::new(raw.t0, raw.t1, raw.n)
    }
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if !(t0 >= -FRAC_PI_2 && t1 <= FRAC_PI_2 && t0 < t1) {
            return Err(Error::InvalidParameter(format!(
                "time grid [{t0}, {t1}] must satisfy -pi/2 <= t0 < t1 <= pi/2"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(
                "time grid needs at least 2 nodes".into(),
            ));
        }
        Ok(TimeGrid { t0, t1, n })
    }

    /// Symmetric grid `[-half_width, half_width]`; odd `n` puts a node at 0.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        TimeGrid::new(-half_width, half_width, n)
    }

    /// Degenerate single-node grid, for pointwise trajectory evaluation only.
    pub fn single(t: f64) -> Result<Self> {
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "time {t} outside [-pi/2, pi/2]"
            )));
        }
        Ok(TimeGrid { t0: t, t1: t, n: 1 })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.t1 - self.t0) / (self.n - 1) as f64
        }
    }

    /// Node positions. For grids symmetric about 0 the nodes are generated
    /// centered, so the middle node of an odd grid is exactly 0.0 and
    /// mirrored pairs negate exactly.
    pub fn nodes(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.t0];
        }
        let dt = self.dt();
        if self.t0 == -self.t1 {
            let c = (self.n - 1) as f64 / 2.0;
            (0..self.n).map(|j| (j as f64 - c) * dt).collect()
        } else {
            let mut v: Vec<f64> = (0..self.n).map(|j| self.t0 + j as f64 * dt).collect();
            v[self.n - 1] = self.t1;
            v
        }
    }

    /// Index of the node at t = 0, if the grid has one.
    pub fn origin_index(&self) -> Option<usize> {
        self.nodes().iter().position(|t| t.abs() <= 1e-12)
    }

    /// Same span, twice the resolution (2n - 1 nodes).
    pub fn refined(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0,
            t1: self.t1,
            n: 2 * self.n - 1,
        }
    }
}

/// Time-indexed spectral fields over a `TimeGrid`, one field per node.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: TimeGrid,
    fields: Vec<SpectralField>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, fields: Vec<SpectralField>) -> Result<Self> {
        if fields.len() != grid.len() {
            return Err(Error::MisalignedTrajectory {
                nodes: grid.len(),
                fields: fields.len(),
            });
        }
        let spec = *fields[0].spec();
        if fields.iter().any(|f| *f.spec() != spec) {
            return Err(Error::SpecMismatch);
        }
        Ok(Trajectory { grid, fields })
    }

    /// Convert grid-valued snapshots through the forward transform.
    pub fn from_grid_fields(grid: TimeGrid, snapshots: &[GridField]) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::MisalignedTrajectory {
                nodes: grid.len(),
                fields: 0,
            });
        }
        let transform = Transform::new(*snapshots[0].spec())?;
        let fields = snapshots
            .iter()
            .map(|g| transform.forward(g))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(grid, fields)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn spec(&self) -> &BasisSpec {
        self.fields[0].spec()
    }
}

/// Composite trapezoid of sampled values over the grid.
pub(crate) fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => 0.0,
        n => {
            let interior: f64 = values[1..n - 1].iter().sum();
            dt * (0.5 * (values[0] + values[n - 1]) + interior)
        }
    }
}

fn is_even_integer(r: f64) -> bool {
    r.fract() == 0.0 && r >= 2.0 && (r as u64).is_multiple_of(2)
}

/// Precomputed norm evaluator for one basis spec.
///
/// Weighted `L^r(w^s gamma_d)` integrals use a Gauss-Hermite rule with nodes
/// scaled by `1/sqrt(1 + s/2)`, which absorbs the full Gaussian factor
/// `w^s gamma_d` exactly; even integer `r` is then integrated exactly. For
/// non-smooth powers (`r` not an even integer) in one dimension the evaluator
/// switches to adaptive Gauss-Kronrod integration, since fixed rules stall on
/// integrands with near-real zeros of `u`.
#[derive(Debug, Clone)]
pub struct NormContext {
    spec: BasisSpec,
    oversample: usize,
    sup_eval: Vec<Vec<f64>>,
    sup_weight: Vec<f64>,
}

/// Lattice used by the sup norm: `[-X, X]` with `X = sqrt(2N+1) + 4`.
/// The point counts are odd so the lattice contains x = 0 exactly.
fn sup_lattice(spec: &BasisSpec) -> Vec<f64> {
    let x_max = ((2 * spec.max_degree()) as f64 + 1.0).sqrt() + 4.0;
    let count = match spec.dimension() {
        1 => 401,
        2 => 161,
        _ => 61,
    };
    let c = (count - 1) as f64 / 2.0;
    let step = x_max / c;
    (0..count).map(|j| (j as f64 - c) * step).collect()
}

impl NormContext {
    pub fn new(spec: BasisSpec) -> Self {
        Self::with_oversample(spec, 2)
    }

    /// `oversample` multiplies the quadrature node count used for norm
    /// integrals (default 2).
    pub fn with_oversample(spec: BasisSpec, oversample: usize) -> Self {
        let sup_axis = sup_lattice(&spec);
        let sup_eval = eval_matrix(&sup_axis, spec.max_degree());
        let sup_weight = sup_axis.iter().map(|&x| (-0.5 * x * x).exp()).collect();
        NormContext {
            spec,
            oversample: oversample.max(1),
            sup_eval,
            sup_weight,
        }
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    fn check_spec(&self, f: &SpectralField) -> Result<()> {
        if *f.spec() != self.spec {
            return Err(Error::SpecMismatch);
        }
        Ok(())
    }

    /// `(int |u|^r w^s gamma_d dx)^{1/r}` for finite `r >= 1`, `s > -2`.
    pub fn lp_norm(&self, f: &SpectralField, r: f64, s: WeightPower) -> Result<f64> {
        self.check_spec(f)?;
        let ev = self.lp_evaluator(r, s)?;
        Ok(self.lp_apply(&ev, f))
    }

    pub(crate) fn lp_evaluator(&self, r: f64, s: WeightPower) -> Result<LpEvaluator> {
        if !(r >= 1.0) || r.is_infinite() {
            return Err(Error::InvalidParameter(format!(
                "norm exponent r = {r} must be finite and >= 1"
            )));
        }
        let s = s.0;
        if !(s > -2.0) {
            return Err(Error::InvalidParameter(format!(
                "weight power s = {s} must be > -2 for an integrable norm"
            )));
        }
        let n = self.spec.max_degree();
        let scale = (1.0 + 0.5 * s).sqrt();
        if self.spec.dimension() == 1 && !is_even_integer(r) {
            return Ok(LpEvaluator::Adaptive { r, s });
        }
        let mut nodes = self.oversample * self.spec.nodes_per_axis();
        if is_even_integer(r) {
            // Enough nodes to make |u|^r (degree r N) exact per axis.
            nodes = nodes.max((r as usize) * n / 2 + 1);
        }
        let rule = gauss_hermite_rule(nodes)?;
        let pts: Vec<f64> = rule.nodes().iter().map(|&z| z / scale).collect();
        let eval = eval_matrix(&pts, n);
        Ok(LpEvaluator::Quadrature {
            r,
            eval,
            weights: rule.weights().to_vec(),
            prefactor: scale.powi(-(self.spec.dimension() as i32)),
        })
    }

    pub(crate) fn lp_apply(&self, ev: &LpEvaluator, f: &SpectralField) -> f64 {
        match ev {
            LpEvaluator::Quadrature {
                r,
                eval,
                weights,
                prefactor,
            } => {
                let values = synthesize_tensor(f, eval);
                let d = self.spec.dimension();
                let mut acc = 0.0f64;
                for (idx, v) in values.indexed_iter() {
                    let mut vol = 1.0;
                    for k in 0..d {
                        vol *= weights[idx[k]];
                    }
                    if vol > 0.0 {
                        acc += vol * v.norm().powf(*r);
                    }
                }
                (prefactor * acc).powf(1.0 / r)
            }
            LpEvaluator::Adaptive { r, s } => {
                let coeffs = f.coeffs().to_vec();
                let n1 = self.spec.max_degree() + 1;
                let scale = (1.0 + 0.5 * s).sqrt();
                let y_lim =
                    ((2 * self.spec.max_degree()) as f64 + 1.0).sqrt() / scale.min(1.0) + 12.0;
                let inv_sqrt_pi = std::f64::consts::PI.sqrt().recip();
                let integrand = |y: f64| {
                    let mut row = vec![0.0f64; n1];
                    hermite_eval_upto(y, &mut row);
                    let mut u = num_complex::Complex64::new(0.0, 0.0);
                    for (c, h) in coeffs.iter().zip(&row) {
                        u += c * *h;
                    }
                    let gauss = (-(1.0 + 0.5 * s) * y * y).exp();
                    u.norm().powf(*r) * gauss * inv_sqrt_pi
                };
                let val = adaptive::integrate(integrand, -y_lim, y_lim, 1e-11, 1e-300);
                val.max(0.0).powf(1.0 / r)
            }
        }
    }

    /// Norm plus its refinement self-check: the value at the configured
    /// oversampling and the relative change when the rule is doubled again.
    /// Smooth integrands (in particular all even `r`) come back with change
    /// below 1e-6; a larger change flags an integrand the fixed rule cannot
    /// resolve.
    pub fn lp_norm_with_check(
        &self,
        f: &SpectralField,
        r: f64,
        s: WeightPower,
    ) -> Result<(f64, f64)> {
        let value = self.lp_norm(f, r, s)?;
        let refined =
            NormContext::with_oversample(self.spec, 2 * self.oversample).lp_norm(f, r, s)?;
        let change = (value - refined).abs() / value.abs().max(refined.abs()).max(1e-300);
        Ok((value, change))
    }

    /// `sup_x |u(x) w(x)|` over the dense evaluation lattice.
    pub fn sup_norm(&self, f: &SpectralField) -> Result<f64> {
        self.check_spec(f)?;
        let values = synthesize_tensor(f, &self.sup_eval);
        let d = self.spec.dimension();
        let mut best = 0.0f64;
        for (idx, v) in values.indexed_iter() {
            let mut w = 1.0;
            for k in 0..d {
                w *= self.sup_weight[idx[k]];
            }
            let m = v.norm() * w;
            if m > best {
                best = m;
            }
        }
        Ok(best)
    }

    /// `L^q_t(I; L^r_{gamma_d}(w^s))` by composite trapezoid in time; `q = inf`
    /// takes the max over nodes, `r = inf` uses the weighted sup norm.
    pub fn mixed_norm(
        &self,
        traj: &Trajectory,
        q: f64,
        r: f64,
        s: WeightPower,
    ) -> Result<f64> {
        if !(q >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "time exponent q = {q} must be >= 1"
            )));
        }
        let phi: Vec<f64> = if r.is_infinite() {
            traj.fields()
                .iter()
                .map(|f| self.sup_norm(f))
                .collect::<Result<Vec<_>>>()?
        } else {
            let ev = self.lp_evaluator(r, s)?;
            traj.fields()
                .iter()
                .map(|f| {
                    self.check_spec(f)?;
                    Ok(self.lp_apply(&ev, f))
                })
                .collect::<Result<Vec<_>>>()?
        };
        if q.is_infinite() {
            return Ok(phi.iter().fold(0.0f64, |a, &b| a.max(b)));
        }
        if traj.grid().len() < 2 {
            return Err(Error::InvalidParameter(
                "finite time exponent needs a grid with at least 2 nodes".into(),
            ));
        }
        let powered: Vec<f64> = phi.iter().map(|&v| v.powf(q)).collect();
        Ok(trapezoid(&powered, traj.grid().dt()).powf(1.0 / q))
    }

    /// Strichartz-family norm: `sup` over the pairs of
    /// `L^q_t L^r_{gamma_d}(w^{r-2})`, the `r = inf` member measured as
    /// `sup |u w|` inside the time norm.
    pub fn s_norm(&self, traj: &Trajectory, family: &[AdmissiblePair]) -> Result<f64> {
        if family.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let mut best = 0.0f64;
        for pair in family {
            let v = self.mixed_norm(traj, pair.q(), pair.r(), WeightPower(pair.r() - 2.0))?;
            best = best.max(v);
        }
        Ok(best)
    }

    /// Computable surrogate for the dual-space norm of a forcing term:
    /// `||F||_{L^{q'}_t L^{r'}_{gamma_d}(w^{r'-2})}`.
    pub fn dual_norm_bound(&self, traj: &Trajectory, pair: &AdmissiblePair) -> Result<f64> {
        self.mixed_norm(
            traj,
            pair.q_dual(),
            pair.r_dual(),
            WeightPower(pair.r_dual() - 2.0),
        )
    }
}

/// Internal per-(r, s) norm evaluation plan.
#[derive(Debug, Clone)]
pub(crate) enum LpEvaluator {
    Quadrature {
        r: f64,
        eval: Vec<Vec<f64>>,
        weights: Vec<f64>,
        prefactor: f64,
    },
    Adaptive {
        r: f64,
        s: f64,
    },
}

/// One-shot `L^r(w^s gamma_d)` norm of a grid field.
pub fn weighted_lp_norm(u: &GridField, r: f64, s: WeightPower) -> Result<f64> {
    let ctx = NormContext::new(*u.spec());
    let f = Transform::new(*u.spec())?.forward(u)?;
    ctx.lp_norm(&f, r, s)
}

/// One-shot `sup |u w|` of a grid field.
pub fn weighted_sup_norm(u: &GridField) -> Result<f64> {
    let ctx = NormContext::new(*u.spec());
    let f = Transform::new(*u.spec())?.forward(u)?;
    ctx.sup_norm(&f)
}

/// One-shot mixed time-space norm of a trajectory.
pub fn mixed_norm(traj: &Trajectory, q: f64, r: f64, s: WeightPower) -> Result<f64> {
    NormContext::new(*traj.spec()).mixed_norm(traj, q, r, s)
}

/// One-shot Strichartz-family norm.
pub fn s_norm(traj: &Trajectory, family: &[AdmissiblePair]) -> Result<f64> {
    NormContext::new(*traj.spec()).s_norm(traj, family)
}

/// One-shot dual-norm upper bound.
pub fn dual_norm_bound(traj: &Trajectory, pair: &AdmissiblePair) -> Result<f64> {
    NormContext::new(*traj.spec()).dual_norm_bound(traj, pair)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::from_function;
    use crate::propagator::trajectory;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn basis1() -> BasisSpec {
        BasisSpec::new(1, 24, 32).unwrap()
    }

    fn constant_field(spec: BasisSpec) -> SpectralField {
        Transform::new(spec)
            .unwrap()
            .forward(&from_function(|_| c(1.0), &spec).unwrap())
            .unwrap()
    }

    #[test]
    fn weight_is_a_gaussian() {
        assert_eq!(weight(&[0.0, 0.0]), 1.0);
        assert_abs_diff_eq!(weight(&[1.0, 1.0]), (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn admissible_check_examples() {
        assert!(admissible_check(f64::INFINITY, 2.0, 0.5));
        assert!(admissible_check(f64::INFINITY, 2.0, 7.3));
        assert!(admissible_check(4.0, f64::INFINITY, 0.5));
        assert!(!admissible_check(2.0, f64::INFINITY, 1.0)); // the excluded triple
        assert!(!admissible_check(3.0, 3.0, 0.5));
        assert!(!admissible_check(1.5, 2.0, 0.5)); // q < 2
        assert!(!admissible_check(f64::NAN, 2.0, 0.5));
    }

    #[test]
    fn family_contains_the_promised_pairs() {
        let single = admissible_family(1, 1);
        assert_eq!(single.len(), 1);
        assert!(single[0].q().is_infinite() && single[0].r() == 2.0);

        let d2 = admissible_family(2, 4);
        assert!(d2.iter().any(|p| p.q() == 4.0 && p.r() == 4.0));
        // d = 2 has no endpoint: theta = 1 is exactly the excluded triple.
        assert!(d2.iter().all(|p| !p.r().is_infinite()));

        let d1 = admissible_family(1, 4);
        assert!(d1.iter().any(|p| p.q() == 8.0 && p.r() == 4.0));
        assert!(d1.iter().any(|p| p.q() == 4.0 && p.r().is_infinite()));
    }

    proptest! {
        #[test]
        fn family_members_are_always_admissible(d in 1usize..5, count in 1usize..12) {
            let family = admissible_family(d, count);
            prop_assert!(!family.is_empty());
            prop_assert!(family.len() <= count);
            for p in &family {
                prop_assert!(admissible_check(p.q(), p.r(), d as f64 / 2.0));
            }
        }
    }

    #[test]
    fn time_grid_validation_and_nodes() {
        assert!(TimeGrid::new(-2.0, 0.5, 5).is_err());
        assert!(TimeGrid::new(0.5, 0.5, 5).is_err());
        assert!(TimeGrid::new(-0.5, 0.5, 1).is_err());
        let grid = TimeGrid::symmetric(0.3, 61).unwrap();
        let nodes = grid.nodes();
        assert_eq!(nodes.len(), 61);
        assert_eq!(nodes[30], 0.0);
        assert_eq!(grid.origin_index(), Some(30));
        for j in 0..61 {
            assert_eq!(nodes[j], -nodes[60 - j]);
        }
        let skew = TimeGrid::new(0.1, 0.6, 11).unwrap();
        assert_eq!(skew.origin_index(), None);
        assert_eq!(*skew.nodes().last().unwrap(), 0.6);

        let single = TimeGrid::single(0.0).unwrap();
        assert_eq!(single.nodes(), vec![0.0]);
        assert!(TimeGrid::single(2.0).is_err());
    }

    #[test]
    fn lp_norm_closed_forms() {
        let spec = basis1();
        let one_grid = from_function(|_| c(1.0), &spec).unwrap();
        // Probability measure: ||1||_{L^2(gamma)} = 1.
        assert_abs_diff_eq!(
            weighted_lp_norm(&one_grid, 2.0, WeightPower(0.0)).unwrap(),
            1.0,
            epsilon = 1e-13
        );
        // int w^{-1} gamma_1 = sqrt(2).
        assert_abs_diff_eq!(
            weighted_lp_norm(&one_grid, 1.0, WeightPower(-1.0)).unwrap(),
            std::f64::consts::SQRT_2,
            epsilon = 1e-10
        );
        // int w^2 gamma_1 = 1/sqrt(2).
        assert_abs_diff_eq!(
            weighted_lp_norm(&one_grid, 1.0, WeightPower(2.0)).unwrap(),
            1.0 / std::f64::consts::SQRT_2,
            epsilon = 1e-10
        );
        // Bad exponents are rejected.
        assert!(weighted_lp_norm(&one_grid, 0.5, WeightPower(0.0)).is_err());
        assert!(weighted_lp_norm(&one_grid, 2.0, WeightPower(-2.0)).is_err());
    }

    #[test]
    fn lp_norm_self_check_is_quiet_on_smooth_integrands() {
        let ctx = NormContext::new(basis1());
        let f = constant_field(basis1());
        for (r, s) in [(1.0, -1.0), (2.0, 0.0), (4.0, 2.0), (3.0, 1.0)] {
            let (_, change) = ctx.lp_norm_with_check(&f, r, WeightPower(s)).unwrap();
            assert!(change < 1e-6, "r={r}, s={s}: change {change}");
        }
    }

    #[test]
    fn sup_norm_closed_forms() {
        let spec = basis1();
        let one = from_function(|_| c(1.0), &spec).unwrap();
        assert_abs_diff_eq!(weighted_sup_norm(&one).unwrap(), 1.0, epsilon = 1e-12);

        // u = h_1: max of sqrt(2) |x| e^{-x^2/2} is sqrt(2) e^{-1/2} at x = 1.
        let h1 = from_function(|x| c(crate::hermite::hermite_eval(1, x[0])), &spec).unwrap();
        // The lattice sup underestimates by at most O(spacing^2) ~ 1e-3.
        let expect = std::f64::consts::SQRT_2 * (-0.5f64).exp();
        let got = weighted_sup_norm(&h1).unwrap();
        assert!((got - expect).abs() <= 1e-3 * expect, "{got} vs {expect}");

        // u = h_2 against a dense-lattice oracle evaluated directly.
        let h2 = from_function(|x| c(crate::hermite::hermite_eval(2, x[0])), &spec).unwrap();
        let mut oracle = 0.0f64;
        for i in 0..200_001 {
            let x = -12.0 + 24.0 * i as f64 / 200_000.0;
            let v = ((4.0 * x * x - 2.0) / (2.0 * std::f64::consts::SQRT_2)).abs()
                * (-0.5 * x * x).exp();
            oracle = oracle.max(v);
        }
        let got2 = weighted_sup_norm(&h2).unwrap();
        assert!((got2 - oracle).abs() <= 1e-3 * oracle, "{got2} vs {oracle}");
    }

    #[test]
    fn sup_norm_is_parity_invariant() {
        let spec = basis1();
        let f = Transform::new(spec)
            .unwrap()
            .forward(&from_function(|x| c((x[0] - 0.7).powi(3) + 0.2), &spec).unwrap())
            .unwrap();
        let flipped = crate::propagator::parity_flip(&f);
        let ctx = NormContext::new(spec);
        let a = ctx.sup_norm(&f).unwrap();
        let b = ctx.sup_norm(&flipped).unwrap();
        assert_eq!(a, b, "lattice is symmetric and w is even");
    }

    #[test]
    fn hoelder_consistency_l1_below_l2() {
        let spec = basis1();
        let mut rng = rand::rngs::StdRng::seed_from_u64(77);
        use rand::{Rng, SeedableRng};
        for _ in 0..20 {
            let coeffs: Vec<Complex64> = (0..spec.mode_count())
                .map(|k| {
                    c(rng.random::<f64>() - 0.5) * (-(k as f64) / 8.0).exp()
                })
                .collect();
            let f = SpectralField::new(spec, coeffs).unwrap();
            let ctx = NormContext::new(spec);
            let l1 = ctx.lp_norm(&f, 1.0, WeightPower(0.0)).unwrap();
            let l2 = ctx.lp_norm(&f, 2.0, WeightPower(0.0)).unwrap();
            assert!(l1 <= l2 + 1e-10, "{l1} > {l2}");
        }
    }

    #[test]
    fn mixed_norm_closed_forms() {
        let spec = basis1();
        let f = constant_field(spec);
        let grid = TimeGrid::symmetric(std::f64::consts::FRAC_PI_2, 41).unwrap();
        let traj = trajectory(&f, &grid);

        // (q, r) = (inf, 2): sup over time of the probability-measure norm.
        assert_abs_diff_eq!(
            mixed_norm(&traj, f64::INFINITY, 2.0, WeightPower(0.0)).unwrap(),
            1.0,
            epsilon = 1e-13
        );
        // q = 4: (int_{-pi/2}^{pi/2} 1 dt)^{1/4} = pi^{1/4}.
        assert_abs_diff_eq!(
            mixed_norm(&traj, 4.0, 2.0, WeightPower(0.0)).unwrap(),
            std::f64::consts::PI.powf(0.25),
            epsilon = 1e-12
        );

        // u(t) = e^{-it} h_1: the L^2 norm is 1 at every t, so the
        // q = 2 time norm is sqrt(pi).
        let h1 = SpectralField::unit_mode(spec, 1).unwrap();
        let traj1 = trajectory(&h1, &grid);
        assert_abs_diff_eq!(
            mixed_norm(&traj1, 2.0, 2.0, WeightPower(0.0)).unwrap(),
            std::f64::consts::PI.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn mixed_norm_refines_at_second_order() {
        // On a window that is not a whole period of the integrand the
        // trapezoid error is genuinely second order; doubling the nodes
        // divides it by about 4. (Over a full period it would be spectrally
        // exact and the ratio meaningless.)
        let spec = basis1();
        let f = SpectralField::unit_mode(spec, 0)
            .unwrap()
            .add(&SpectralField::unit_mode(spec, 3).unwrap())
            .unwrap();
        let value = |n: usize| {
            let grid = TimeGrid::symmetric(0.7, n).unwrap();
            mixed_norm(&trajectory(&f, &grid), 4.0, 4.0, WeightPower(2.0)).unwrap()
        };
        let reference = value(2561);
        let e1 = (value(41) - reference).abs();
        let e2 = (value(81) - reference).abs();
        assert!(e1 / e2 > 3.0 && e1 / e2 < 5.5, "refinement ratio {}", e1 / e2);
    }

    #[test]
    fn s_norm_is_the_family_supremum() {
        let spec = basis1();
        let grid = TimeGrid::symmetric(std::f64::consts::FRAC_PI_2, 41).unwrap();
        let zero = Trajectory::new(
            grid,
            (0..41).map(|_| SpectralField::zeros(spec)).collect(),
        )
        .unwrap();
        let family = admissible_family(1, 3);
        assert_eq!(s_norm(&zero, &family).unwrap(), 0.0);
        assert!(matches!(s_norm(&zero, &[]), Err(Error::EmptyFamily)));

        let f = SpectralField::unit_mode(spec, 1).unwrap();
        let traj = trajectory(&f, &grid);
        let pair_a = AdmissiblePair::new(f64::INFINITY, 2.0, 0.5).unwrap();
        let pair_b = AdmissiblePair::new(8.0, 4.0, 0.5).unwrap();
        let single = s_norm(&traj, &[pair_a]).unwrap();
        assert_abs_diff_eq!(
            single,
            mixed_norm(&traj, f64::INFINITY, 2.0, WeightPower(0.0)).unwrap(),
            epsilon = 1e-15
        );
        let both = s_norm(&traj, &[pair_a, pair_b]).unwrap();
        let member_a = mixed_norm(&traj, f64::INFINITY, 2.0, WeightPower(0.0)).unwrap();
        let member_b = mixed_norm(&traj, 8.0, 4.0, WeightPower(2.0)).unwrap();
        assert_abs_diff_eq!(both, member_a.max(member_b), epsilon = 1e-15);
    }

    #[test]
    fn dual_norm_bound_closed_forms() {
        let spec = BasisSpec::new(2, 10, 14).unwrap();
        let grid = TimeGrid::symmetric(std::f64::consts::FRAC_PI_2, 41).unwrap();
        let zero = Trajectory::new(
            grid,
            (0..41).map(|_| SpectralField::zeros(spec)).collect(),
        )
        .unwrap();
        let pair = AdmissiblePair::new(4.0, 4.0, 1.0).unwrap();
        assert_eq!(dual_norm_bound(&zero, &pair).unwrap(), 0.0);

        // (inf, 2) conjugates to (1, 2) with weight power 0.
        let energy = AdmissiblePair::new(f64::INFINITY, 2.0, 1.0).unwrap();
        assert_eq!(energy.q_dual(), 1.0);
        assert_eq!(energy.r_dual(), 2.0);

        // F = 1: q' = r' = 4/3, so the bound is
        // pi^{3/4} (int w^{-2/3} gamma_2)^{3/4} with
        // int w^{-2/3} gamma_2 = (int e^{x^2/3} gamma_1)^2 = 3/2.
        let one = constant_field(spec);
        let traj = Trajectory::new(grid, vec![one; 41]).unwrap();
        let expect = (1.5 * std::f64::consts::PI).powf(0.75);
        assert_abs_diff_eq!(dual_norm_bound(&traj, &pair).unwrap(), expect, epsilon = 1e-9);
    }
}
