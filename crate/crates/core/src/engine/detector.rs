//! Momentum-space quadrature for a single detector position.

use super::basis::{EigenBasis, WithSlope};
use super::grid::TimeGrid;
use super::{ChannelPolicy, EngineOptions};
use crate::error::{Result, ToaError};
use crate::kinematics::{GaussianPacket, PacketQuality};
use crate::par;
use crate::quadrature::{integrate_adaptive, AdaptiveOptions, Panel, Segment};
use crate::scattering::Channel;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// Relative level of `|g|²` that still counts when sizing the momentum window.
const WINDOW_THRESHOLD: f64 = 1e-14;
/// Farthest the window may reach from `p0`, in units of `σ_p`.
const WINDOW_REACH: f64 = 40.0;
/// Time chunk length for the phasor recurrence.
const CHUNK: usize = 256;

pub(crate) struct Detector<'a> {
    pub basis: &'a dyn EigenBasis,
    pub packet: GaussianPacket,
    pub x: f64,
    pub channels: Vec<Channel>,
    /// Include the `ψ̃(-p)` part of the overlaps.
    pub mirror_overlap: bool,
    pub opts: EngineOptions,
}

pub(crate) struct ChannelQuad {
    pub channel: Channel,
    pub segments: Vec<Segment>,
    pub panels: Vec<Panel>,
}

/// Momentum integrals at the detector.
pub(crate) struct Solved {
    pub channels: Vec<ChannelQuad>,
    /// `P(x) = Σ_s ∫ |g_s|² dp`.
    pub probability: f64,
    /// `Σ_s ∫ (m/p) Im(g_s* g_s') dp`.
    pub phase_moment: f64,
}

/// Quadrature nodes with the integrand values needed for time sums.
#[derive(Default)]
pub(crate) struct NodeSet {
    pub energy: Vec<f64>,
    /// `w sqrt(p/m) g(p) / sqrt(2π)`
    pub coeff: Vec<Complex64>,
    pub coeff_tr: Vec<Complex64>,
    pub coeff_ref: Vec<Complex64>,
}

struct PanelEval {
    energy: Vec<f64>,
    coeff: Vec<Complex64>,
    tr: Vec<Complex64>,
    rf: Vec<Complex64>,
    /// Largest `p dp/ds` on the panel.
    p_jac: f64,
    /// Largest `|g'| dp/ds` over the largest `|g|`.
    g_rate: f64,
}

impl<'a> Detector<'a> {
    pub fn new(basis: &'a dyn EigenBasis, packet: &GaussianPacket, x: f64, opts: &EngineOptions) -> Result<Self> {
        packet.validate()?;
        if (basis.mass() - packet.mass).abs() > 1e-12 * packet.mass {
            return Err(ToaError::InvalidParameter(format!("packet mass {} differs from basis mass {}", packet.mass, basis.mass())));
        }
        if !x.is_finite() {
            return Err(ToaError::InvalidParameter(format!("detector position must be finite, got {x}")));
        }
        let marginal = packet.quality() == PacketQuality::Marginal;
        let (channels, mirror_overlap) = match opts.channels {
            ChannelPolicy::Auto if marginal => (basis.channels(), true),
            ChannelPolicy::Auto | ChannelPolicy::RightOnly => (vec![Channel::RightMover], false),
            ChannelPolicy::AllOpen => (basis.channels(), true),
        };
        Ok(Self { basis, packet: *packet, x, channels, mirror_overlap, opts: *opts })
    }

    /// Packet overlap factor `O_s(p)` with its derivative.
    pub fn overlap(&self, ch: Channel, p: f64) -> Result<WithSlope> {
        let pk = &self.packet;
        match ch {
            Channel::RightMover => {
                let (a, da) = (pk.momentum_amplitude(p), pk.momentum_amplitude_slope(p));
                if !self.mirror_overlap {
                    return Ok((a, da));
                }
                let (c, dc) = self.basis.far_left(ch, p)?;
                let (b, db) = (pk.momentum_amplitude(-p), pk.momentum_amplitude_slope(-p));
                Ok((a + c.conj() * b, da + dc.conj() * b - c.conj() * db))
            }
            Channel::LeftMover => {
                let (c, dc) = self.basis.far_left(ch, p)?;
                let (b, db) = (pk.momentum_amplitude(-p), pk.momentum_amplitude_slope(-p));
                Ok((c.conj() * b, dc.conj() * b - c.conj() * db))
            }
        }
    }

    /// `g = W O` and `g'` at momentum `p`.
    pub fn integrand(&self, ch: Channel, p: f64) -> Result<WithSlope> {
        let (w, dw) = self.basis.wave(ch, self.x, p)?;
        let (o, d_o) = self.overlap(ch, p)?;
        Ok((w * o, dw * o + w * d_o))
    }

    fn sigma(&self) -> f64 {
        self.packet.sigma_p()
    }

    /// Momentum interval carrying the channel's arrivals, or `None` when
    /// the channel contributes nothing.
    fn window(&self, ch: Channel) -> Result<Option<(f64, f64)>> {
        let (base_lo, base_hi) = self.packet.momentum_window();
        let floor = base_lo.min(self.packet.p0).max(self.basis.threshold(ch));
        if floor >= base_hi.max(self.packet.p0 + WINDOW_REACH * self.sigma()) {
            return Ok(None);
        }
        let s = self.sigma();
        let steps = (2.0 * WINDOW_REACH * 4.0) as usize;
        let scan: Vec<f64> = (0..=steps).map(|k| self.packet.p0 - WINDOW_REACH * s + k as f64 * s / 4.0).filter(|p| *p > floor).collect();
        let vals = par::map(&scan, |&p| self.integrand(ch, p).map(|(g, _)| g.norm_sqr()));
        let mut pts = Vec::with_capacity(scan.len());
        for (p, v) in scan.iter().zip(vals) {
            pts.push((*p, v?));
        }
        let max = pts.iter().map(|v| v.1).fold(0.0, f64::max);
        if max == 0.0 || !max.is_finite() {
            return Ok(None);
        }
        let sig: Vec<f64> = pts.iter().filter(|v| v.1 >= WINDOW_THRESHOLD * max).map(|v| v.0).collect();
        let lo = (sig[0] - s).min(base_lo).max(floor);
        let hi = (sig[sig.len() - 1] + s).max(base_hi);
        Ok(Some((lo, hi)))
    }

    fn segments(&self, ch: Channel, lo: f64, hi: f64) -> Vec<Segment> {
        let mut branches = self.basis.branch_points();
        let th = self.basis.threshold(ch);
        if th > 0.0 && lo <= th {
            branches.push(lo);
        }
        Segment::split_at_branches(lo, hi, &branches)
    }

    fn adaptive_options(&self) -> AdaptiveOptions {
        AdaptiveOptions { rel_tol: self.opts.rel_tol, ..AdaptiveOptions::default() }
    }

    /// Adaptive `P(x)` and phase-moment integrals over every channel.
    pub fn solve(&self) -> Result<Solved> {
        let m = self.packet.mass;
        let mut channels = Vec::new();
        let (mut prob, mut moment) = (0.0, 0.0);
        for &ch in &self.channels {
            let Some((lo, hi)) = self.window(ch)? else { continue };
            let segments = self.segments(ch, lo, hi);
            let res = integrate_adaptive::<2, _>(
                &segments,
                |p| {
                    let (g, dg) = self.integrand(ch, p)?;
                    let v = [g.norm_sqr(), m / p * (g.conj() * dg).im];
                    if !v[1].is_finite() {
                        return Err(ToaError::PhaseDerivative { p, reason: "non-finite phase derivative of the arrival integrand".into() });
                    }
                    Ok(v)
                },
                &self.adaptive_options(),
            )?;
            prob += res.value[0];
            moment += res.value[1];
            channels.push(ChannelQuad { channel: ch, segments, panels: res.panels });
        }
        Ok(Solved { channels, probability: prob, phase_moment: moment })
    }

    /// Integrates `K` real functions of `(channel, p)` over the channel windows.
    pub fn integrate<const K: usize, F>(&self, solved: &Solved, f: F) -> Result<[f64; K]>
    where
        F: Fn(Channel, f64) -> Result<[f64; K]> + Sync,
    {
        let mut total = [0.0; K];
        for cq in &solved.channels {
            let res = integrate_adaptive::<K, _>(&cq.segments, |p| f(cq.channel, p), &self.adaptive_options())?;
            for k in 0..K {
                total[k] += res.value[k];
            }
        }
        Ok(total)
    }

    fn eval_panel(&self, ch: Channel, panel: &Panel, with_split: bool) -> Result<PanelEval> {
        let m = self.packet.mass;
        let mut ev = PanelEval { energy: Vec::new(), coeff: Vec::new(), tr: Vec::new(), rf: Vec::new(), p_jac: 0.0, g_rate: 0.0 };
        let (mut g_max, mut dg_max) = (0.0f64, 0.0f64);
        let norm = 1.0 / (2.0 * PI).sqrt();
        for node in panel.nodes() {
            let p = node.p;
            let (w, dw) = self.basis.wave(ch, self.x, p)?;
            let (o, d_o) = self.overlap(ch, p)?;
            let g = w * o;
            let dg = dw * o + w * d_o;
            let scale = node.weight * (p / m).sqrt() * norm;
            ev.energy.push(p * p / (2.0 * m));
            ev.coeff.push(g * scale);
            if with_split {
                let (tr, rf) = self.basis.split(ch, self.x, p)?;
                ev.tr.push(tr * o * scale);
                ev.rf.push(rf * o * scale);
            }
            ev.p_jac = ev.p_jac.max(p * node.jacobian.abs());
            g_max = g_max.max(g.norm());
            if dg.norm().is_finite() {
                dg_max = dg_max.max(dg.norm() * node.jacobian.abs());
            }
        }
        if g_max > 0.0 {
            ev.g_rate = dg_max / g_max;
        }
        Ok(ev)
    }

    /// Panels refined until the phase of `exp(-iEt) g` turns by at most
    /// `π/2` across each panel for every `|t| <= t_ext`, with node values.
    fn refined_nodes(&self, solved: &Solved, t_ext: f64, with_split: bool, extra_halvings: u32) -> Result<NodeSet> {
        let m = self.packet.mass;
        let mut out = NodeSet::default();
        for cq in &solved.channels {
            let mut panels = cq.panels.clone();
            for _ in 0..extra_halvings {
                panels = panels.iter().flat_map(|p| p.halves()).collect();
            }
            let mut done: Vec<(usize, PanelEval)> = Vec::new();
            let mut pending: Vec<(usize, Panel)> = panels.into_iter().enumerate().map(|(i, p)| (i << 20, p)).collect();
            let mut level = 0;
            while !pending.is_empty() {
                let evals = par::map(&pending, |(_, p)| self.eval_panel(cq.channel, p, with_split));
                let mut next = Vec::new();
                for ((key, panel), ev) in pending.into_iter().zip(evals) {
                    let ev = ev?;
                    let turn = panel.width() * (ev.p_jac * t_ext / m + ev.g_rate);
                    if turn <= FRAC_PI_2 || level >= 20 {
                        done.push((key, ev));
                    } else {
                        let shift = 19 - level;
                        let [a, b] = panel.halves();
                        next.push((key, a));
                        next.push((key | (1 << shift), b));
                    }
                }
                pending = next;
                level += 1;
            }
            done.sort_by_key(|d| d.0);
            for (_, ev) in done {
                out.energy.extend(ev.energy);
                out.coeff.extend(ev.coeff);
                out.coeff_tr.extend(ev.tr);
                out.coeff_ref.extend(ev.rf);
            }
        }
        Ok(out)
    }

    /// Amplitudes on `grid` checked against a run with every panel halved.
    /// Returns `(A, A_tr, A_ref)`; the split amplitudes are empty unless
    /// requested, and then `A = A_tr + A_ref`.
    pub fn amplitudes(&self, solved: &Solved, grid: &TimeGrid, with_split: bool) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
        let t_ext = grid.t_min.abs().max(grid.t_max.abs());
        let mut coarse = sum_nodes(&self.refined_nodes(solved, t_ext, with_split, 0)?, grid, with_split);
        let mut diff = f64::INFINITY;
        for halvings in 1..=6 {
            let fine = sum_nodes(&self.refined_nodes(solved, t_ext, with_split, halvings)?, grid, with_split);
            let max = fine.0.iter().map(|a| a.norm()).fold(0.0, f64::max);
            diff = coarse.0.iter().zip(&fine.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if diff <= self.opts.amplitude_tol * max {
                return Ok(fine);
            }
            coarse = fine;
        }
        Err(ToaError::Accuracy { context: "arrival amplitude refinement".into(), estimate: diff })
    }

    /// Time range where the arrivals of each current component are
    /// expected, from phase times of the quadrature nodes.
    pub fn phase_time_range(&self, solved: &Solved) -> Result<(f64, f64, f64)> {
        let m = self.packet.mass;
        let use_split = self.basis.splits_at(self.x);
        let mut samples: Vec<(f64, f64, f64)> = Vec::new(); // (weight, time, energy)
        for cq in &solved.channels {
            let ch = cq.channel;
            let nodes: Vec<_> = cq.panels.iter().flat_map(|p| p.nodes().collect::<Vec<_>>()).collect();
            let th = self.basis.threshold(ch);
            let res = par::map(&nodes, |node| -> Result<Vec<(f64, f64, f64)>> {
                let p = node.p;
                let e = p * p / (2.0 * m);
                let w = node.weight.abs();
                if !use_split {
                    let (g, dg) = self.integrand(ch, p)?;
                    let n = g.norm_sqr();
                    return Ok(if n > 0.0 { vec![(w * n, m / p * (g.conj() * dg).im / n, e)] } else { vec![] });
                }
                let h = 1e-6 * p;
                let (lo, hi) = if p - h > th { (p - h, p + h) } else { (p, p + h) };
                let comp = |q: f64| -> Result<[Complex64; 2]> {
                    let (tr, rf) = self.basis.split(ch, self.x, q)?;
                    let (o, _) = self.overlap(ch, q)?;
                    Ok([tr * o, rf * o])
                };
                let (a, b, c) = (comp(lo)?, comp(hi)?, comp(p)?);
                let mut v = Vec::new();
                for k in 0..2 {
                    let n = c[k].norm_sqr();
                    if n > 0.0 && a[k].norm_sqr() > 0.0 && b[k].norm_sqr() > 0.0 {
                        let dphase = (b[k] * a[k].conj()).arg() / (hi - lo);
                        v.push((w * n, m / p * dphase, e));
                    }
                }
                Ok(v)
            });
            for r in res {
                samples.extend(r?);
            }
        }
        let wmax = samples.iter().map(|s| s.0).fold(0.0, f64::max);
        let keep: Vec<&(f64, f64, f64)> = samples.iter().filter(|s| s.0 >= 1e-12 * wmax && s.1.is_finite()).collect();
        if keep.is_empty() {
            return Err(ToaError::Accuracy { context: "no significant momentum nodes".into(), estimate: 0.0 });
        }
        let t_lo = keep.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let t_hi = keep.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let strong: Vec<&&(f64, f64, f64)> = keep.iter().filter(|s| s.0 >= 1e-16 * wmax).collect();
        let e_lo = strong.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
        let e_hi = strong.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
        Ok((t_lo, t_hi, (e_hi - e_lo).max(f64::MIN_POSITIVE)))
    }
}

/// `Σ_j c_j exp(-i E_j t_k)` on the grid, by chunks of a phasor recurrence.
fn sum_nodes(nodes: &NodeSet, grid: &TimeGrid, with_split: bool) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    if with_split {
        let [tr, rf] = sum_nodes_k(nodes, grid, [&nodes.coeff_tr, &nodes.coeff_ref]);
        let a = tr.iter().zip(&rf).map(|(t, r)| t + r).collect();
        (a, tr, rf)
    } else {
        let [a] = sum_nodes_k(nodes, grid, [&nodes.coeff]);
        (a, Vec::new(), Vec::new())
    }
}

fn split_parts(c: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    c.iter().map(|z| (z.re, z.im)).unzip()
}

fn sum_nodes_k<const K: usize>(nodes: &NodeSet, grid: &TimeGrid, coeffs: [&Vec<Complex64>; K]) -> [Vec<Complex64>; K] {
    let n = grid.n_points;
    let dt = grid.spacing();
    let coeffs = coeffs.map(|c| split_parts(c));
    let steps: Vec<Complex64> = nodes.energy.iter().map(|&e| Complex64::from_polar(1.0, -e * dt)).collect();
    let (sr, si) = split_parts(&steps);
    let chunks = par::map_range(n.div_ceil(CHUNK), |c| {
        let k0 = c * CHUNK;
        let len = CHUNK.min(n - k0);
        let t0 = grid.time(k0);
        let mut sums: [Vec<Complex64>; K] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); len]);
        for b0 in (0..steps.len()).step_by(NODE_BLOCK) {
            let b1 = (b0 + NODE_BLOCK).min(steps.len());
            let start: Vec<Complex64> = nodes.energy[b0..b1].iter().map(|&e| Complex64::from_polar(1.0, -e * t0)).collect();
            let (mut pr, mut pi) = split_parts(&start);
            let block: [(&[f64], &[f64]); K] = std::array::from_fn(|i| (&coeffs[i].0[b0..b1], &coeffs[i].1[b0..b1]));
            for k in 0..len {
                let z = dot_advance(&block, &mut pr, &mut pi, &sr[b0..b1], &si[b0..b1]);
                for i in 0..K {
                    sums[i][k] += z[i];
                }
            }
        }
        sums
    });
    let mut out: [Vec<Complex64>; K] = std::array::from_fn(|_| Vec::with_capacity(n));
    for sums in chunks {
        for (o, s) in out.iter_mut().zip(sums) {
            o.extend(s);
        }
    }
    out
}

const LANES: usize = 8;
const NODE_BLOCK: usize = 1024;

/// `Σ_j c_j p_j` for each coefficient set, then `p_j *= s_j`.
fn dot_advance<const K: usize>(c: &[(&[f64], &[f64]); K], pr: &mut [f64], pi: &mut [f64], sr: &[f64], si: &[f64]) -> [Complex64; K] {
    let mut re = [[0.0; LANES]; K];
    let mut im = [[0.0; LANES]; K];
    let body = pr.len() / LANES * LANES;
    for j in (0..body).step_by(LANES) {
        let (pr, pi) = (&mut pr[j..j + LANES], &mut pi[j..j + LANES]);
        let (sr, si) = (&sr[j..j + LANES], &si[j..j + LANES]);
        for i in 0..K {
            let (cr, ci) = (&c[i].0[j..j + LANES], &c[i].1[j..j + LANES]);
            for l in 0..LANES {
                re[i][l] += cr[l] * pr[l] - ci[l] * pi[l];
                im[i][l] += cr[l] * pi[l] + ci[l] * pr[l];
            }
        }
        for l in 0..LANES {
            let (x, y) = (pr[l], pi[l]);
            pr[l] = x * sr[l] - y * si[l];
            pi[l] = x * si[l] + y * sr[l];
        }
    }
    let mut z: [Complex64; K] = std::array::from_fn(|i| Complex64::new(re[i].iter().sum(), im[i].iter().sum()));
    for j in body..pr.len() {
        let ph = Complex64::new(pr[j], pi[j]);
        for i in 0..K {
            z[i] += Complex64::new(c[i].0[j], c[i].1[j]) * ph;
        }
        let next = ph * Complex64::new(sr[j], si[j]);
        pr[j] = next.re;
        pi[j] = next.im;
    }
    z
}

/// Amplitude at one time from a fully refined node set.
pub(crate) fn single_amplitude(det: &Detector, solved: &Solved, t: f64) -> Result<Complex64> {
    let base = det.refined_nodes(solved, t.abs(), false, 0)?;
    let fine = det.refined_nodes(solved, t.abs(), false, 1)?;
    let sum = |ns: &NodeSet| -> Complex64 { ns.energy.iter().zip(&ns.coeff).map(|(e, c)| c * Complex64::from_polar(1.0, -e * t)).sum() };
    let (a, b) = (sum(&base), sum(&fine));
    let scale: f64 = fine.coeff.iter().map(|c| c.norm()).sum();
    if (a - b).norm() > det.opts.amplitude_tol * scale.max(b.norm()) {
        return Err(ToaError::Accuracy { context: format!("arrival amplitude at t = {t}"), estimate: (a - b).norm() });
    }
    Ok(b)
}
