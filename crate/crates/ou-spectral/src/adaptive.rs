//! Adaptive Gauss-Kronrod (G7, K15) integration on a finite interval.
//!
//! Used for one-dimensional weighted norms whose integrand involves a
//! non-smooth power of |u|; fixed Gauss-Hermite rules stall on those because
//! the integrand's analyticity strip collapses near zeros of u.

/// Kronrod-15 abscissae (positive half, descending) and weights; the odd
/// entries are the embedded Gauss-7 nodes.
const XK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7K15 panel on [a, b]: returns (kronrod value, error estimate).
fn panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut k = 0.0;
    let mut g = 0.0;
    for i in 0..8 {
        let dx = half * XK[i];
        let fv = if i == 7 {
            f(mid)
        } else {
            f(mid - dx) + f(mid + dx)
        };
        k += WK[i] * fv;
        if i % 2 == 1 {
            g += WG[i / 2] * fv;
        } else if i == 7 {
            g += WG[3] * fv;
        }
    }
    (k * half, ((k - g) * half).abs())
}

/// Adaptively integrate `f` over [a, b] to the requested tolerances.
/// Interval halving with a worst-first queue; caps keep hostile integrands
/// from spinning forever.
pub(crate) fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    let (v0, e0) = panel(&f, a, b);
    let mut segments = vec![(a, b, v0, e0)];
    let max_segments = 4096;
    loop {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let err: f64 = segments.iter().map(|s| s.3).sum();
        if err <= abs_tol + rel_tol * total.abs() || segments.len() >= max_segments {
            return total;
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("segment list is nonempty");
        let (sa, sb, _, _) = segments.swap_remove(worst);
        let sm = 0.5 * (sa + sb);
        let (v1, e1) = panel(&f, sa, sm);
        let (v2, e2) = panel(&f, sm, sb);
        segments.push((sa, sm, v1, e1));
        segments.push((sm, sb, v2, e2));
    }
}
