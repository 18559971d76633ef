//! Adaptive Simpson quadrature in one, two and three dimensions.
//!
//! Each panel is scored with the classical Richardson estimate: with `S1`
//! the Simpson value on the whole panel and `S2` the composite value on its
//! two halves, the panel contributes `S2 + (S2 - S1) / 15` with error
//! estimate `|S2 - S1| / 15`. Panels are refined worst-first until the
//! summed estimate drops below `tol * (1 + |value|)`, or the worst panel sits
//! at [`MAX_DEPTH`], in which case the result is flagged non-converged and
//! still carries its best value and error estimate.
//!
//! Integrands may return vector values with their own error bars, which is
//! how the multi-dimensional rules nest: an inner integral becomes a sample
//! of the outer one, and its error is integrated alongside its value.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_DEPTH: u32 = 30;

/// Hard cap on the number of live panels in one integration.
const MAX_PANELS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QuadError {
    #[error("integration range [{lo}, {hi}] is empty or not finite")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("integrand is not finite at {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: u64,
    /// False when the depth or panel cap was reached first.
    pub converged: bool,
}

/// One evaluation of a (possibly vector-valued) integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<const N: usize> {
    pub value: [f64; N],
    pub abs_error: [f64; N],
    pub evaluations: u64,
    pub converged: bool,
}

impl<const N: usize> Sample<N> {
    pub fn exact(value: [f64; N]) -> Self {
        Sample { value, abs_error: [0.0; N], evaluations: 1, converged: true }
    }
}

/// Result of a vector-valued integration; `abs_error` already includes the
/// error bars carried by the samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecQuadrature<const N: usize> {
    pub value: [f64; N],
    pub abs_error: [f64; N],
    pub evaluations: u64,
    pub converged: bool,
}

impl<const N: usize> VecQuadrature<N> {
    pub fn component(&self, i: usize) -> QuadratureResult {
        QuadratureResult {
            value: self.value[i],
            abs_error_estimate: self.abs_error[i],
            evaluations: self.evaluations,
            converged: self.converged,
        }
    }

    /// Repackages the integral as a sample of an enclosing integral.
    pub fn as_sample(&self) -> Sample<N> {
        Sample {
            value: self.value,
            abs_error: self.abs_error,
            evaluations: self.evaluations,
            converged: self.converged,
        }
    }
}

struct Panel<const N: usize> {
    lo: f64,
    hi: f64,
    depth: u32,
    f: [[f64; N]; 5],
    e: [[f64; N]; 5],
    value: [f64; N],
    err: [f64; N],
    carried: [f64; N],
}

impl<const N: usize> Panel<N> {
    fn new(lo: f64, hi: f64, depth: u32, s: [Sample<N>; 5]) -> Self {
        let h = hi - lo;
        let mut p = Panel {
            lo,
            hi,
            depth,
            f: s.map(|x| x.value),
            e: s.map(|x| x.abs_error),
            value: [0.0; N],
            err: [0.0; N],
            carried: [0.0; N],
        };
        let f = &p.f;
        let e = &p.e;
        for i in 0..N {
            let whole = h / 6.0 * (f[0][i] + 4.0 * f[2][i] + f[4][i]);
            let halves = h / 12.0 * (f[0][i] + 4.0 * f[1][i] + 2.0 * f[2][i] + 4.0 * f[3][i] + f[4][i]);
            let diff = halves - whole;
            let mass = h / 12.0
                * (f[0][i].abs() + 4.0 * f[1][i].abs() + 2.0 * f[2][i].abs() + 4.0 * f[3][i].abs() + f[4][i].abs());
            p.value[i] = halves + diff / 15.0;
            // rounding floor so exact panels still report a nonzero bound
            p.err[i] = diff.abs() / 15.0 + 8.0 * f64::EPSILON * mass;
            p.carried[i] = h / 12.0 * (e[0][i] + 4.0 * e[1][i] + 2.0 * e[2][i] + 4.0 * e[3][i] + e[4][i]);
        }
        p
    }

    fn nodes(lo: f64, hi: f64) -> [f64; 5] {
        let h = hi - lo;
        [lo, lo + 0.25 * h, lo + 0.5 * h, lo + 0.75 * h, hi]
    }
}

#[derive(PartialEq)]
struct Priority(f64, usize);

impl Eq for Priority {}

impl PartialOrd for Priority {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Priority {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

fn check_range(lo: f64, hi: f64, tol: f64) -> Result<(), QuadError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QuadError::InvalidRange { lo, hi });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(QuadError::InvalidTolerance(tol));
    }
    Ok(())
}

/// Adaptive Simpson over `[lo, hi]` for a vector-valued integrand.
///
/// Panel errors are Richardson estimates and are only reliable where the
/// integrand is smooth inside each panel. `breaks` are points where the
/// integrand is known to lose smoothness; the range is split there before
/// refinement starts. Points outside the open range are ignored.
pub fn try_integrate<const N: usize, E, F>(
    mut g: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<VecQuadrature<N>, E>
where
    E: From<QuadError>,
    F: FnMut(f64) -> Result<Sample<N>, E>,
{
    check_range(lo, hi, tol)?;
    let mut evaluations = 0u64;
    let mut samples_converged = true;
    let mut sample = |x: f64, evaluations: &mut u64, ok: &mut bool| -> Result<Sample<N>, E> {
        let s = g(x)?;
        if s.value.iter().chain(&s.abs_error).any(|v| !v.is_finite()) {
            return Err(QuadError::NonFinite { x }.into());
        }
        *evaluations += s.evaluations;
        *ok &= s.converged;
        Ok(s)
    };

    let min_gap = 1e-12 * (hi - lo);
    let mut edges = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
    inner.sort_by(f64::total_cmp);
    for b in inner {
        if b - edges.last().unwrap() > min_gap && hi - b > min_gap {
            edges.push(b);
        }
    }
    edges.push(hi);

    let mut panels: Vec<Panel<N>> = Vec::new();
    for w in edges.windows(2) {
        let xs = Panel::<N>::nodes(w[0], w[1]);
        let mut s = [Sample::exact([0.0; N]); 5];
        for (k, x) in xs.iter().enumerate() {
            // shared edge with the previous panel
            if k == 0 && !panels.is_empty() {
                let prev = panels.last().unwrap();
                s[0] = Sample { value: prev.f[4], abs_error: prev.e[4], evaluations: 0, converged: true };
            } else {
                s[k] = sample(*x, &mut evaluations, &mut samples_converged)?;
            }
        }
        panels.push(Panel::new(w[0], w[1], 0, s));
    }

    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    for p in &panels {
        for i in 0..N {
            total[i] += p.value[i];
            total_err[i] += p.err[i];
        }
    }

    let priority = |p: &Panel<N>, total: &[f64; N]| -> f64 {
        (0..N).map(|i| p.err[i] / (1.0 + total[i].abs())).fold(0.0, f64::max)
    };
    let mut heap: BinaryHeap<Priority> =
        panels.iter().enumerate().map(|(k, p)| Priority(priority(p, &total), k)).collect();
    // Slots of split panels are recycled by their left child.
    let mut alive = panels.len();

    let within = |total: &[f64; N], total_err: &[f64; N]| (0..N).all(|i| total_err[i] <= tol * (1.0 + total[i].abs()));

    let mut converged = true;
    while !within(&total, &total_err) {
        let Some(Priority(_, k)) = heap.pop() else {
            converged = false;
            break;
        };
        if panels[k].depth >= MAX_DEPTH || alive >= MAX_PANELS {
            converged = false;
            break;
        }
        let parent = &panels[k];
        let (lo_p, hi_p, depth) = (parent.lo, parent.hi, parent.depth);
        let mid = 0.5 * (lo_p + hi_p);
        let old = |j: usize| Sample { value: parent.f[j], abs_error: parent.e[j], evaluations: 0, converged: true };
        let (p0, p1, p2, p3, p4) = (old(0), old(1), old(2), old(3), old(4));
        let (pv, pe) = (parent.value, parent.err);
        let lq = Panel::<N>::nodes(lo_p, mid);
        let rq = Panel::<N>::nodes(mid, hi_p);
        let l1 = sample(lq[1], &mut evaluations, &mut samples_converged)?;
        let l3 = sample(lq[3], &mut evaluations, &mut samples_converged)?;
        let r1 = sample(rq[1], &mut evaluations, &mut samples_converged)?;
        let r3 = sample(rq[3], &mut evaluations, &mut samples_converged)?;
        let left = Panel::new(lo_p, mid, depth + 1, [p0, l1, p1, l3, p2]);
        let right = Panel::new(mid, hi_p, depth + 1, [p2, r1, p3, r3, p4]);
        for i in 0..N {
            total[i] += left.value[i] + right.value[i] - pv[i];
            total_err[i] += left.err[i] + right.err[i] - pe[i];
        }
        panels[k] = left;
        panels.push(right);
        alive += 1;
        heap.push(Priority(priority(&panels[k], &total), k));
        let r = panels.len() - 1;
        heap.push(Priority(priority(&panels[r], &total), r));
    }

    // Final sums in left-to-right order.
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut value = [0.0; N];
    let mut abs_error = [0.0; N];
    for p in &panels {
        for i in 0..N {
            value[i] += p.value[i];
            abs_error[i] += p.err[i] + p.carried[i];
        }
    }
    Ok(VecQuadrature { value, abs_error, evaluations, converged: converged && samples_converged })
}

/// Integral of a scalar function over `[lo, hi]`.
pub fn integrate_1d<F>(mut g: F, lo: f64, hi: f64, tol: f64) -> Result<QuadratureResult, QuadError>
where
    F: FnMut(f64) -> f64,
{
    let r = try_integrate::<1, QuadError, _>(|x| Ok(Sample::exact([g(x)])), lo, hi, &[], tol)?;
    Ok(r.component(0))
}

/// Integral over the box `ranges[0] × ranges[1]` of `g(u, v)`, nesting the
/// `v` integral inside the `u` integral with `tol / 2` per level.
pub fn integrate_2d<F>(g: F, ranges: [(f64, f64); 2], tol: f64) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64, f64) -> f64,
{
    let [(u0, u1), (v0, v1)] = ranges;
    check_range(v0, v1, tol)?;
    let level = tol / 2.0;
    let r = try_integrate::<1, QuadError, _>(
        |u| {
            try_integrate::<1, QuadError, _>(|v| Ok(Sample::exact([g(u, v)])), v0, v1, &[], level)
                .map(|r| r.as_sample())
        },
        u0,
        u1,
        &[],
        level,
    )?;
    Ok(r.component(0))
}

/// Integral over a three-dimensional box of `g(u, v, w)`, three nested
/// passes with `tol / 3` per level.
pub fn integrate_3d<F>(g: F, ranges: [(f64, f64); 3], tol: f64) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64, f64, f64) -> f64,
{
    let [(u0, u1), (v0, v1), (w0, w1)] = ranges;
    check_range(v0, v1, tol)?;
    check_range(w0, w1, tol)?;
    let level = tol / 3.0;
    let r = try_integrate::<1, QuadError, _>(
        |u| {
            try_integrate::<1, QuadError, _>(
                |v| {
                    try_integrate::<1, QuadError, _>(|w| Ok(Sample::exact([g(u, v, w)])), w0, w1, &[], level)
                        .map(|r| r.as_sample())
                },
                v0,
                v1,
                &[],
                level,
            )
            .map(|r| r.as_sample())
        },
        u0,
        u1,
        &[],
        level,
    )?;
    Ok(r.component(0))
}
