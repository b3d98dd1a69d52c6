//! Composite Gauss-Legendre quadrature.
//!
//! Integration runs over [`Segment`]s. A segment may carry an inverse
//! square-root branch point at either end (a threshold such as `p = p_V`
//! for a potential step); those ends are integrated in the variable
//! `s = sqrt(|p - p_b|)`, which turns the singularity into a smooth
//! integrand. Refinement bisects panels level by level and evaluates each
//! level through [`crate::par::map`], then sums accepted panels in
//! position order so the result is independent of the worker count.

use crate::error::{Result, ToaError};
use crate::par;
use std::sync::OnceLock;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// The 16-point rule shared by the adaptive integrator.
    pub fn sixteen() -> &'static Self {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    }
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates `f` over `[a, b]` by bisection until the 16-point rule on a
/// panel agrees with the sum over its halves to `rel_tol` relative (or
/// `abs_tol` absolute).
pub fn integrate_adaptive_scalar<F>(a: f64, b: f64, f: F, rel_tol: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let rule = GaussLegendre::sixteen();
    let mut stack = vec![(a, b, rule.integrate(a, b, &f), 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &f);
        let right = rule.integrate(mid, hi, &f);
        let fine = left + right;
        if (fine - whole).abs() <= (rel_tol * fine.abs()).max(abs_tol) || hi - lo < 1e-15 * (b - a).abs() {
            total += fine;
        } else if depth >= 60 {
            return Err(ToaError::Accuracy { context: format!("scalar integral on [{lo}, {hi}]"), estimate: fine });
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(total)
}

/// An integration interval, optionally with square-root branch points at
/// its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub singular_lo: bool,
    pub singular_hi: bool,
}

impl Segment {
    pub fn plain(lo: f64, hi: f64) -> Self {
        Self { lo, hi, singular_lo: false, singular_hi: false }
    }

    /// Splits `[lo, hi]` at the given branch points (those strictly inside).
    pub fn split_at_branches(lo: f64, hi: f64, branches: &[f64]) -> Vec<Segment> {
        let mut cuts: Vec<f64> = branches.iter().copied().filter(|b| *b > lo && *b < hi).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out = Vec::with_capacity(cuts.len() + 1);
        let mut start = lo;
        let mut start_singular = branches.contains(&lo);
        for c in cuts {
            out.push(Segment { lo: start, hi: c, singular_lo: start_singular, singular_hi: true });
            start = c;
            start_singular = true;
        }
        out.push(Segment { lo: start, hi, singular_lo: start_singular, singular_hi: branches.contains(&hi) });
        // a segment singular at both ends is integrated as two halves
        out.into_iter()
            .flat_map(|s| {
                if s.singular_lo && s.singular_hi {
                    let m = 0.5 * (s.lo + s.hi);
                    vec![Segment { lo: s.lo, hi: m, singular_lo: true, singular_hi: false }, Segment { lo: m, hi: s.hi, singular_lo: false, singular_hi: true }]
                } else {
                    vec![s]
                }
            })
            .collect()
    }

    fn map(&self) -> Map {
        if self.singular_lo {
            Map::FromLo(self.lo)
        } else if self.singular_hi {
            Map::FromHi(self.hi)
        } else {
            Map::Linear
        }
    }

    fn s_range(&self) -> (f64, f64) {
        match self.map() {
            Map::Linear => (self.lo, self.hi),
            _ => (0.0, (self.hi - self.lo).sqrt()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Map {
    Linear,
    FromLo(f64),
    FromHi(f64),
}

impl Map {
    // (p, dp/ds)
    fn eval(self, s: f64) -> (f64, f64) {
        match self {
            Map::Linear => (s, 1.0),
            Map::FromLo(b) => (b + s * s, 2.0 * s),
            Map::FromHi(b) => (b - s * s, 2.0 * s),
        }
    }
}

/// A quadrature node in the physical variable, with the Jacobian folded
/// into its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub p: f64,
    pub weight: f64,
    /// `dp/ds` at the node (1 on linear panels).
    pub jacobian: f64,
    /// Width of the owning panel in its integration variable.
    pub panel_width: f64,
}

/// One accepted panel of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    map: Map,
    s0: f64,
    s1: f64,
}

impl Panel {
    pub fn width(&self) -> f64 {
        self.s1 - self.s0
    }

    /// Physical interval covered by the panel.
    pub fn bounds(&self) -> (f64, f64) {
        let a = self.map.eval(self.s0).0;
        let b = self.map.eval(self.s1).0;
        (a.min(b), a.max(b))
    }

    pub fn halves(&self) -> [Panel; 2] {
        let m = 0.5 * (self.s0 + self.s1);
        [Panel { s1: m, ..*self }, Panel { s0: m, ..*self }]
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        let rule = GaussLegendre::sixteen();
        let half = 0.5 * (self.s1 - self.s0);
        let mid = 0.5 * (self.s0 + self.s1);
        let width = self.width();
        rule.nodes().iter().zip(rule.weights()).map(move |(x, w)| {
            let (p, jac) = self.map.eval(mid + half * x);
            Node { p, weight: w * half * jac, jacobian: jac, panel_width: width }
        })
    }

    fn integrate<const K: usize>(&self, f: &(dyn Fn(f64) -> Result<[f64; K]> + Sync)) -> Result<([f64; K], [f64; K])> {
        let mut val = [0.0; K];
        let mut abs = [0.0; K];
        for node in self.nodes() {
            let v = f(node.p)?;
            for k in 0..K {
                val[k] += node.weight * v[k];
                abs[k] += node.weight.abs() * v[k].abs();
            }
        }
        Ok((val, abs))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_panels: usize,
    pub max_depth: u32,
    /// Cap on the number of panels alive at once.
    pub max_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-300, initial_panels: 8, max_depth: 48, max_panels: 1 << 17 }
    }
}

/// Result of [`integrate_adaptive`]: the integral of each component, the
/// integral of its absolute value, and the accepted panels in order.
#[derive(Debug, Clone)]
pub struct Adaptive<const K: usize> {
    pub value: [f64; K],
    pub abs_value: [f64; K],
    pub panels: Vec<Panel>,
}

impl<const K: usize> Adaptive<K> {
    pub fn nodes(&self) -> Vec<Node> {
        self.panels.iter().flat_map(|p| p.nodes().collect::<Vec<_>>()).collect()
    }
}

struct Work<const K: usize> {
    panel: Panel,
    whole: [f64; K],
    depth: u32,
    order: Vec<u32>,
}

/// Integrates a vector-valued `f` over the segments.
///
/// A panel is accepted when, for every component, the whole-panel estimate
/// and the two-halves estimate differ by at most
/// `max(rel_tol * |f|_panel, rel_tol * scale * share, abs_tol)`, where
/// `scale` is the first-pass estimate of `∫|f|` and `share` the panel's
/// fraction of its segment.
pub fn integrate_adaptive<const K: usize, F>(segments: &[Segment], f: F, opts: &AdaptiveOptions) -> Result<Adaptive<K>>
where
    F: Fn(f64) -> Result<[f64; K]> + Sync,
{
    let f: &(dyn Fn(f64) -> Result<[f64; K]> + Sync) = &f;
    let n_init = opts.initial_panels.max(1);
    let mut initial = Vec::new();
    for (si, seg) in segments.iter().enumerate() {
        if seg.hi <= seg.lo {
            continue;
        }
        let (s0, s1) = seg.s_range();
        let map = seg.map();
        for i in 0..n_init {
            let a = s0 + (s1 - s0) * i as f64 / n_init as f64;
            let b = s0 + (s1 - s0) * (i + 1) as f64 / n_init as f64;
            initial.push((Panel { map, s0: a, s1: b }, vec![si as u32, i as u32]));
        }
    }
    let first = par::map(&initial, |(panel, _)| panel.integrate(f));
    let mut scale = [0.0; K];
    let mut work = Vec::with_capacity(initial.len());
    for ((panel, order), r) in initial.into_iter().zip(first) {
        let (val, abs) = r?;
        for k in 0..K {
            scale[k] += abs[k];
        }
        work.push(Work { panel, whole: val, depth: 0, order });
    }
    let seg_total: f64 = segments.iter().map(|s| s.s_range().1 - s.s_range().0).sum::<f64>().max(f64::MIN_POSITIVE);

    let mut accepted: Vec<(Vec<u32>, Panel, [f64; K], [f64; K])> = Vec::new();
    while !work.is_empty() {
        let evaluated = par::map(&work, |w| -> Result<_> {
            let [l, r] = w.panel.halves();
            let (lv, la) = l.integrate(f)?;
            let (rv, ra) = r.integrate(f)?;
            Ok((l, r, lv, la, rv, ra))
        });
        let mut next = Vec::new();
        for (w, res) in work.into_iter().zip(evaluated) {
            let (l, r, lv, la, rv, ra) = res?;
            let share = w.panel.width() / seg_total;
            let mut ok = true;
            let mut fine = [0.0; K];
            let mut fine_abs = [0.0; K];
            for k in 0..K {
                fine[k] = lv[k] + rv[k];
                fine_abs[k] = la[k] + ra[k];
                let tol = (opts.rel_tol * fine_abs[k]).max(opts.rel_tol * scale[k] * share).max(opts.abs_tol);
                if !((fine[k] - w.whole[k]).abs() <= tol) {
                    ok = false;
                }
            }
            if ok {
                accepted.push((w.order, w.panel, fine, fine_abs));
            } else if w.depth >= opts.max_depth {
                let (a, b) = w.panel.bounds();
                return Err(ToaError::Accuracy { context: format!("adaptive panel [{a:.6e}, {b:.6e}] at depth {}", w.depth), estimate: fine[0] });
            } else {
                let mut lo = w.order.clone();
                lo.push(0);
                let mut hi = w.order;
                hi.push(1);
                next.push(Work { panel: l, whole: lv, depth: w.depth + 1, order: lo });
                next.push(Work { panel: r, whole: rv, depth: w.depth + 1, order: hi });
            }
        }
        if next.len() + accepted.len() > opts.max_panels {
            let estimate = accepted.iter().map(|a| a.2[0]).sum::<f64>() + next.iter().map(|w| w.whole[0]).sum::<f64>();
            return Err(ToaError::Accuracy { context: format!("adaptive quadrature exceeded {} panels", opts.max_panels), estimate });
        }
        work = next;
    }
    accepted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut value = [0.0; K];
    let mut abs_value = [0.0; K];
    let mut panels = Vec::with_capacity(accepted.len());
    for (_, panel, v, a) in accepted {
        for k in 0..K {
            value[k] += v[k];
            abs_value[k] += a[k];
        }
        panels.push(panel);
    }
    Ok(Adaptive { value, abs_value, panels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sixteen_point_rule_is_exact_for_degree_31() {
        let rule = GaussLegendre::sixteen();
        let w: f64 = rule.weights().iter().sum();
        assert_relative_eq!(w, 2.0, epsilon = 1e-14);
        // ∫_{-1}^{1} x^30 dx = 2/31
        let v = rule.integrate(-1.0, 1.0, |x| x.powi(30));
        assert_relative_eq!(v, 2.0 / 31.0, epsilon = 1e-14);
    }

    #[test]
    fn odd_rules_have_centre_node() {
        let rule = GaussLegendre::new(5);
        assert!(rule.nodes()[2].abs() < 1e-15);
        assert_relative_eq!(rule.weights()[2], 128.0 / 225.0, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        // ∫_0^{10} cos(50 x) dx = sin(500)/50
        let seg = [Segment::plain(0.0, 10.0)];
        let r = integrate_adaptive::<1, _>(&seg, |x| Ok([(50.0 * x).cos()]), &AdaptiveOptions::default()).unwrap();
        assert_relative_eq!(r.value[0], (500.0f64).sin() / 50.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_branch_substitution_integrates_inverse_sqrt() {
        // ∫_0^2 dx / sqrt(|x - 1|) = 4
        let segs = Segment::split_at_branches(0.0, 2.0, &[1.0]);
        assert_eq!(segs.len(), 2);
        let r = integrate_adaptive::<1, _>(&segs, |x| Ok([1.0 / (x - 1.0).abs().sqrt()]), &AdaptiveOptions::default()).unwrap();
        assert_relative_eq!(r.value[0], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn scalar_adaptive_matches_closed_form() {
        let v = integrate_adaptive_scalar(0.0, 1.0, |x| (-x * x).exp(), 1e-13, 0.0).unwrap();
        assert_relative_eq!(v, 0.746_824_132_812_427, epsilon = 1e-13);
    }
}
