//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals,
//! semi-infinite ranges through variable maps, and a builder that freezes
//! an adaptively chosen node set for reuse.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::NumericsError;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const PANEL_NODES: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            ..Self::default()
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

/// Abscissae of the 15-point Kronrod rule mapped onto `[a, b]`, in
/// ascending order.
pub fn panel_nodes(a: f64, b: f64) -> [f64; PANEL_NODES] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; PANEL_NODES];
    for j in 0..7 {
        x[j] = c - h * XGK[j];
        x[PANEL_NODES - 1 - j] = c + h * XGK[j];
    }
    x[7] = c;
    x
}

/// Kronrod and Gauss weights for the nodes of [`panel_nodes`] on `[a, b]`.
fn panel_weights(a: f64, b: f64) -> ([f64; PANEL_NODES], [f64; PANEL_NODES]) {
    let h = 0.5 * (b - a);
    let mut wk = [0.0; PANEL_NODES];
    let mut wg = [0.0; PANEL_NODES];
    for j in 0..7 {
        wk[j] = h * WGK[j];
        wk[PANEL_NODES - 1 - j] = h * WGK[j];
        if j % 2 == 1 {
            wg[j] = h * WG[j / 2];
            wg[PANEL_NODES - 1 - j] = h * WG[j / 2];
        }
    }
    wk[7] = h * WGK[7];
    wg[7] = h * WG[3];
    (wk, wg)
}

/// QUADPACK-style error scaling from |K - G| and the panel's mean
/// absolute deviation.
fn scaled_error(diff: f64, resasc: f64, resabs: f64) -> f64 {
    let mut err = diff.abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor > err {
        err = floor;
    }
    err
}

/// Kronrod estimate and error for one panel given its 15 integrand values.
fn panel_estimate(a: f64, b: f64, fv: &[f64; PANEL_NODES]) -> (f64, f64) {
    let (wk, wg) = panel_weights(a, b);
    let mut k = 0.0;
    let mut g = 0.0;
    let mut resabs = 0.0;
    for j in 0..PANEL_NODES {
        k += wk[j] * fv[j];
        g += wg[j] * fv[j];
        resabs += wk[j] * fv[j].abs();
    }
    let mean = k / (b - a);
    let mut resasc = 0.0;
    for j in 0..PANEL_NODES {
        resasc += wk[j] * (fv[j] - mean).abs();
    }
    (k, scaled_error(k - g, resasc, resabs))
}

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on error; ties broken by position for determinism
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptive integration of a fallible integrand over a finite interval.
pub fn try_integrate<E, F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate, E>
where
    E: From<NumericsError>,
    F: FnMut(f64) -> Result<f64, E>,
{
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
        });
    }
    let mut eval_panel = |a: f64, b: f64| -> Result<Panel, E> {
        let xs = panel_nodes(a, b);
        let mut fv = [0.0; PANEL_NODES];
        for (v, &x) in fv.iter_mut().zip(xs.iter()) {
            *v = f(x)?;
            if !v.is_finite() {
                return Err(NumericsError::NonFinite { at: x }.into());
            }
        }
        let (value, error) = panel_estimate(a, b, &fv);
        Ok(Panel { a, b, value, error })
    };

    let first = eval_panel(a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 0;

    while total_err > tol.target(total) {
        if subdivisions >= tol.max_subdivisions {
            return Err(NumericsError::NoConvergence {
                subdivisions,
                value: total,
                error: total_err,
            }
            .into());
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(NumericsError::NoConvergence {
                subdivisions,
                value: total,
                error: total_err,
            }
            .into());
        }
        let left = eval_panel(worst.a, mid)?;
        let right = eval_panel(mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        // re-sum occasionally to keep the running totals honest
        if subdivisions % 64 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let mut panels: Vec<_> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(Estimate {
        value: panels.iter().map(|p| p.value).sum(),
        error: panels.iter().map(|p| p.error).sum(),
        subdivisions,
    })
}

pub fn integrate<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate, NumericsError>
where
    F: Fn(f64) -> f64,
{
    try_integrate(|x| Ok::<_, NumericsError>(f(x)), a, b, tol)
}

/// Maps `t ∈ (0,1)` to `γ = t/(1-t)` and returns `(γ, dγ/dt)`.
#[inline]
pub fn semi_infinite_map(t: f64) -> (f64, f64) {
    let s = 1.0 - t;
    (t / s, 1.0 / (s * s))
}

/// Power of the tail map `γ = s^{-TAIL_POWER}` on `[1, ∞)`. Integrands
/// decaying like `γ^{-1-κ}` become `s^{TAIL_POWER κ - 1}`, smooth enough for
/// Kronrod panels down to `κ ≈ 1/2`.
const TAIL_POWER: f64 = 4.0;

/// ∫₀^∞ f(γ) dγ, split at γ = 1 with the tail mapped onto `(0, 1]`.
pub fn try_integrate_semi_infinite<E, F>(mut f: F, tol: Tolerance) -> Result<Estimate, E>
where
    E: From<NumericsError>,
    F: FnMut(f64) -> Result<f64, E>,
{
    let head = try_integrate(&mut f, 0.0, 1.0, tol)?;
    let tail_tol = Tolerance {
        abs: tol.abs,
        rel: tol.rel,
        max_subdivisions: tol.max_subdivisions.saturating_sub(head.subdivisions),
    };
    let tail = try_integrate(
        |s: f64| -> Result<f64, E> {
            let g = s.powf(-TAIL_POWER);
            if !g.is_finite() {
                // only an integrand that does not decay drives panels this
                // close to 0
                return Err(NumericsError::NoConvergence {
                    subdivisions: 0,
                    value: f64::INFINITY,
                    error: f64::INFINITY,
                }
                .into());
            }
            let v = f(g)?;
            // a vanished integrand stays 0 whatever the Jacobian
            Ok(if v == 0.0 {
                0.0
            } else {
                v * TAIL_POWER * g / s
            })
        },
        0.0,
        1.0,
        tail_tol,
    )?;
    Ok(Estimate {
        value: head.value + tail.value,
        error: head.error + tail.error,
        subdivisions: head.subdivisions + tail.subdivisions,
    })
}

pub fn integrate_semi_infinite<F>(f: F, abs_tol: f64, rel_tol: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    try_integrate_semi_infinite(
        |x| Ok::<_, NumericsError>(f(x)),
        Tolerance::new(abs_tol, rel_tol),
    )
    .map(|e| e.value)
}

/// One node of a frozen semi-infinite rule: abscissa in γ, the weight
/// including the Jacobian of the `(0,1)` map, and whatever auxiliary value
/// the builder computed there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleNode<A> {
    pub gamma: f64,
    pub weight: f64,
    pub aux: A,
}

struct RulePanel<A> {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    nodes: Vec<RuleNode<A>>,
}

/// Adaptively builds a Kronrod node set on `(0, ∞)` that integrates every
/// member of a family of integrands to `tol`, then freezes it.
///
/// `aux` evaluates the expensive part of the integrand at a batch of γ
/// values (it may fan out internally). `family` writes the value of each of
/// the `members` cheap integrands at one γ given its auxiliary value.
/// Re-evaluating a member later on the returned nodes is a smooth function
/// of the member's parameters, so finite differences of such integrals carry
/// no adaptive-partition jitter.
pub fn build_semi_infinite_rule<A, E, X, F>(
    aux: X,
    family: F,
    members: usize,
    tol: Tolerance,
) -> Result<Vec<RuleNode<A>>, E>
where
    A: Copy,
    E: From<NumericsError>,
    X: Fn(&[f64]) -> Result<Vec<A>, E>,
    F: Fn(f64, &A, &mut [f64]),
{
    assert!(members > 0);
    let mut scratch = vec![0.0; members];
    let mut eval_panel = |a: f64, b: f64| -> Result<RulePanel<A>, E> {
        let ts = panel_nodes(a, b);
        let mapped: Vec<(f64, f64)> = ts.iter().map(|&t| semi_infinite_map(t)).collect();
        let gammas: Vec<f64> = mapped.iter().map(|m| m.0).collect();
        let aux_vals = aux(&gammas)?;
        let (wk, _) = panel_weights(a, b);
        let mut fvs = vec![[0.0; PANEL_NODES]; members];
        for j in 0..PANEL_NODES {
            let (gamma, jac) = mapped[j];
            family(gamma, &aux_vals[j], &mut scratch);
            for m in 0..members {
                let v = if scratch[m] == 0.0 {
                    0.0
                } else {
                    scratch[m] * jac
                };
                if !v.is_finite() {
                    return Err(NumericsError::NonFinite { at: gamma }.into());
                }
                fvs[m][j] = v;
            }
        }
        let (values, errors): (Vec<f64>, Vec<f64>) =
            fvs.iter().map(|fv| panel_estimate(a, b, fv)).unzip();
        let nodes = (0..PANEL_NODES)
            .map(|j| RuleNode {
                gamma: mapped[j].0,
                weight: wk[j] * mapped[j].1,
                aux: aux_vals[j],
            })
            .collect();
        Ok(RulePanel {
            a,
            b,
            values,
            errors,
            nodes,
        })
    };

    // Seed panels resolve the tail near t = 1 early.
    let mut panels = Vec::new();
    for w in [0.0, 0.5, 0.9, 0.99, 1.0].windows(2) {
        panels.push(eval_panel(w[0], w[1])?);
    }
    let mut subdivisions = 0;
    loop {
        let mut totals = vec![0.0; members];
        let mut errs = vec![0.0; members];
        for p in &panels {
            for m in 0..members {
                totals[m] += p.values[m];
                errs[m] += p.errors[m];
            }
        }
        let targets: Vec<f64> = totals.iter().map(|v| tol.target(*v)).collect();
        if (0..members).all(|m| errs[m] <= targets[m]) {
            break;
        }
        if subdivisions >= tol.max_subdivisions {
            return Err(NumericsError::NoConvergence {
                subdivisions,
                value: totals[0],
                error: errs[0],
            }
            .into());
        }
        // split the panel with the largest error relative to its member's target
        let score = |p: &RulePanel<A>| {
            (0..members)
                .map(|m| p.errors[m] / targets[m])
                .fold(0.0, f64::max)
        };
        let worst = (0..panels.len())
            .max_by(|&i, &j| score(&panels[i]).total_cmp(&score(&panels[j])))
            .expect("at least one panel");
        let (a, b) = (panels[worst].a, panels[worst].b);
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return Err(NumericsError::NoConvergence {
                subdivisions,
                value: totals[0],
                error: errs[0],
            }
            .into());
        }
        let left = eval_panel(a, mid)?;
        let right = eval_panel(mid, b)?;
        panels[worst] = left;
        panels.insert(worst + 1, right);
        subdivisions += 1;
    }
    Ok(panels.into_iter().flat_map(|p| p.nodes).collect())
}
