//! Belief-propagation reconstruction.
//!
//! Two decoders share [`BpOptions`] and [`DecodeResult`]:
//!
//! * [`decode_sum_bp`] runs on the bipartite graph between pixels and bucket
//!   measurements. Each bucket value is a noisy observation of the integer
//!   number of lit target pixels under its pattern, so a measurement node
//!   combines the leave-one-out count distribution of its neighbours with the
//!   Gaussian likelihood of every count.
//! * [`decode_gf2_bp`] is the textbook sum-product decoder on a parity-check
//!   matrix, fed with per-symbol LLRs.
//!
//! Both use a flooding schedule and are deterministic.

use alloc::vec;
use alloc::vec::Vec;

use crate::code::ParityCheckMatrix;
use crate::error::{check_len, Error, Result};
use crate::forward::{mean_return, ChannelParams, IlluminationEnsemble, Measurement};

/// Messages are kept inside `[MSG_FLOOR, 1 - MSG_FLOOR]`.
pub const MSG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpMode {
    SumConstraint,
    Gf2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpOptions {
    pub max_iters: usize,
    /// Stop once hard decisions have not changed for this many iterations.
    pub stall_window: usize,
    pub pixel_prior_one: f64,
    /// Weight of the previous pixel-to-measurement message when updating.
    pub damping: f64,
    pub mode: BpMode,
}

impl Default for BpOptions {
    fn default() -> Self {
        BpOptions {
            max_iters: 50,
            stall_window: 3,
            pixel_prior_one: 0.5,
            damping: 0.5,
            mode: BpMode::SumConstraint,
        }
    }
}

impl BpOptions {
    pub fn gf2() -> Self {
        BpOptions { mode: BpMode::Gf2, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.stall_window == 0 {
            return Err(Error::InvalidParameter("max_iters and stall_window must be positive"));
        }
        if !(self.pixel_prior_one > 0.0 && self.pixel_prior_one < 1.0) {
            return Err(Error::InvalidParameter("pixel prior must lie in (0, 1)"));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidParameter("damping must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Message state of the sum-constraint decoder after an iteration.
///
/// Edge `e` connects measurement `edge_meas[e]` and pixel `edge_pixel[e]`;
/// edges are grouped by measurement in pattern order.
#[derive(Debug, Clone, PartialEq)]
pub struct BpState {
    pub msg_pixel_to_meas: Vec<f64>,
    pub msg_meas_to_pixel: Vec<f64>,
    pub marginals: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub iterations_run: usize,
    pub converged: bool,
    /// Sum mode: `||R - g sqrt(E_s) A x|| / sqrt(E_s)` with receiver gains `g`.
    /// GF(2) mode: number of unsatisfied checks.
    pub residual: f64,
    /// Pixels not covered by any measurement; they decode from the prior.
    pub unpinned_pixel_count: usize,
    /// Noiseless channel: likelihoods were exact-match indicators.
    pub exact_match: bool,
    /// Noiseless measurements that matched no count and were ignored.
    pub inconsistent_measurements: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub pixels: Vec<u8>,
    pub marginals: Vec<f64>,
    pub diagnostics: Diagnostics,
}

#[inline]
fn clamp_msg(p: f64) -> f64 {
    p.clamp(MSG_FLOOR, 1.0 - MSG_FLOOR)
}

#[inline]
fn logit(p: f64) -> f64 {
    libm::log(p / (1.0 - p))
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Hard decision: one exactly when the marginal exceeds one half.
pub fn hard_decision(marginals: &[f64]) -> Vec<u8> {
    marginals.iter().map(|&p| u8::from(p > 0.5)).collect()
}

/// Relative tolerance for the exact-match likelihood on a noiseless channel.
const EXACT_MATCH_TOL: f64 = 1e-9;

/// Gaussian density of `r` given `count` lit pixels seen through gain `h_mag`.
///
/// With `n0 == 0` this is the indicator of `r` matching the noiseless return.
pub fn measurement_likelihood(r: f64, count: usize, h_mag: f64, ch: &ChannelParams) -> f64 {
    let mu = mean_return(h_mag, ch.es, count as f64);
    if ch.n0 > 0.0 {
        let d = r - mu;
        libm::exp(-d * d / ch.n0) / libm::sqrt(core::f64::consts::PI * ch.n0)
    } else if (r - mu).abs() <= EXACT_MATCH_TOL * mu.abs().max(1.0) {
        1.0
    } else {
        0.0
    }
}

/// Likelihood of every count `0..=d`, rescaled so the largest is one.
/// Returns `None` on a noiseless channel when no count matches.
fn count_likelihoods(r: f64, d: usize, h_mag: f64, ch: &ChannelParams, out: &mut Vec<f64>) -> Option<()> {
    out.clear();
    if ch.n0 > 0.0 {
        let sq = libm::sqrt(ch.es) * h_mag;
        out.extend((0..=d).map(|c| {
            let e = r - sq * c as f64;
            e * e / ch.n0
        }));
        let min = out.iter().copied().fold(f64::INFINITY, f64::min);
        out.iter_mut().for_each(|v| *v = libm::exp(min - *v));
        Some(())
    } else {
        out.extend((0..=d).map(|c| measurement_likelihood(r, c, h_mag, ch)));
        out.iter().any(|&v| v > 0.0).then_some(())
    }
}

/// Distribution of a sum of independent Bernoulli variables with the given
/// probabilities of one, by sequential convolution.
pub fn count_pmf(probs: &[f64]) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(probs.len() + 1);
    pmf.push(1.0);
    for &p in probs {
        pmf.push(0.0);
        for c in (1..pmf.len()).rev() {
            pmf[c] = pmf[c] * (1.0 - p) + pmf[c - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    pmf
}

/// Factor graph of an ensemble in compressed form.
struct Graph {
    meas_start: Vec<usize>,
    edge_pixel: Vec<usize>,
    /// Edges incident to each pixel.
    pixel_edges: Vec<Vec<usize>>,
}

impl Graph {
    fn new(ens: &IlluminationEnsemble) -> Self {
        let mut meas_start = Vec::with_capacity(ens.len() + 1);
        let mut edge_pixel = Vec::new();
        let mut pixel_edges = vec![Vec::new(); ens.k_pixels()];
        meas_start.push(0);
        for p in ens.patterns() {
            for &i in p {
                pixel_edges[i].push(edge_pixel.len());
                edge_pixel.push(i);
            }
            meas_start.push(edge_pixel.len());
        }
        Graph { meas_start, edge_pixel, pixel_edges }
    }

    fn num_meas(&self) -> usize {
        self.meas_start.len() - 1
    }
}

/// Scratch buffers for the measurement-node update.
#[derive(Default)]
struct CheckScratch {
    prefix: Vec<Vec<f64>>,
    back: Vec<f64>,
    next: Vec<f64>,
}

impl CheckScratch {
    /// Leave-one-out messages for one measurement node.
    ///
    /// `prefix[k]` is the count pmf of the first `k` neighbours; the backward
    /// vector `back[t]` is the likelihood-weighted tail
    /// `sum_s P(tail = s) L(t + s)`, so edge `k` gets
    /// `m(b) = sum_a prefix[k][a] back(a + b)`.
    fn update(&mut self, incoming: &[f64], lik: &[f64], out: &mut [f64]) {
        let d = incoming.len();
        if self.prefix.len() < d + 1 {
            self.prefix.resize_with(d + 1, Vec::new);
        }
        self.prefix[0].clear();
        self.prefix[0].push(1.0);
        for k in 0..d {
            let q = incoming[k];
            let (head, tail) = self.prefix.split_at_mut(k + 1);
            let prev = &head[k];
            let cur = &mut tail[0];
            cur.clear();
            cur.resize(k + 2, 0.0);
            for (a, &v) in prev.iter().enumerate() {
                cur[a] += v * (1.0 - q);
                cur[a + 1] += v * q;
            }
        }
        self.back.clear();
        self.back.extend_from_slice(lik);
        for k in (0..d).rev() {
            // back is indexed by the count among neighbours 0..k plus this edge's bit.
            let pre = &self.prefix[k];
            let (mut m0, mut m1) = (0.0, 0.0);
            for (a, &f) in pre.iter().enumerate() {
                m0 += f * self.back[a];
                m1 += f * self.back[a + 1];
            }
            let total = m0 + m1;
            out[k] = if total > 0.0 && total.is_finite() { m1 / total } else { 0.5 };
            if k > 0 {
                let q = incoming[k];
                self.next.clear();
                self.next
                    .extend((0..=k).map(|t| (1.0 - q) * self.back[t] + q * self.back[t + 1]));
                let max = self.next.iter().copied().fold(0.0, f64::max);
                if max > 0.0 {
                    self.next.iter_mut().for_each(|v| *v /= max);
                }
                core::mem::swap(&mut self.back, &mut self.next);
            }
        }
    }
}

/// Sum-constraint BP on bucket values.
pub fn decode_sum_bp(m: &Measurement, ens: &IlluminationEnsemble, opts: &BpOptions) -> Result<DecodeResult> {
    decode_sum_bp_observed(m, ens, opts, |_| {})
}

/// [`decode_sum_bp`] calling `observe` with the message state after every iteration.
pub fn decode_sum_bp_observed<F: FnMut(&BpState)>(
    m: &Measurement,
    ens: &IlluminationEnsemble,
    opts: &BpOptions,
    mut observe: F,
) -> Result<DecodeResult> {
    opts.validate()?;
    if opts.mode != BpMode::SumConstraint {
        return Err(Error::InvalidParameter("decode_sum_bp needs sum-constraint mode"));
    }
    check_len(ens.len(), m.len())?;
    m.channel.validate()?;

    let graph = Graph::new(ens);
    let gains = m.receiver_gains();
    let k = ens.k_pixels();
    let num_edges = graph.edge_pixel.len();

    // Likelihood tables are fixed across iterations.
    let mut lik_start = Vec::with_capacity(graph.num_meas() + 1);
    let mut lik = Vec::new();
    let mut informative = vec![true; graph.num_meas()];
    let mut buf = Vec::new();
    let mut inconsistent = 0;
    lik_start.push(0);
    for j in 0..graph.num_meas() {
        let d = graph.meas_start[j + 1] - graph.meas_start[j];
        if count_likelihoods(m.bucket[j], d, gains[j], &m.channel, &mut buf).is_none() {
            inconsistent += 1;
            informative[j] = false;
            buf.clear();
            buf.resize(d + 1, 1.0);
        }
        lik.extend_from_slice(&buf);
        lik_start.push(lik.len());
    }

    let prior = opts.pixel_prior_one;
    let prior_llr = logit(prior);
    let mut state = BpState {
        msg_pixel_to_meas: vec![prior; num_edges],
        msg_meas_to_pixel: vec![0.5; num_edges],
        marginals: vec![prior; k],
        iterations_run: 0,
        converged: false,
    };
    let mut scratch = CheckScratch::default();
    let mut decisions: Option<Vec<u8>> = None;
    let mut stable = 0;
    let mut incoming = Vec::new();

    for iter in 1..=opts.max_iters {
        for j in 0..graph.num_meas() {
            let (lo, hi) = (graph.meas_start[j], graph.meas_start[j + 1]);
            if lo == hi {
                continue;
            }
            if !informative[j] {
                state.msg_meas_to_pixel[lo..hi].fill(0.5);
                continue;
            }
            incoming.clear();
            incoming.extend(state.msg_pixel_to_meas[lo..hi].iter().map(|&q| clamp_msg(q)));
            scratch.update(
                &incoming,
                &lik[lik_start[j]..lik_start[j + 1]],
                &mut state.msg_meas_to_pixel[lo..hi],
            );
            state.msg_meas_to_pixel[lo..hi]
                .iter_mut()
                .for_each(|v| *v = clamp_msg(*v));
        }

        for (i, edges) in graph.pixel_edges.iter().enumerate() {
            let total = prior_llr
                + edges
                    .iter()
                    .map(|&e| logit(state.msg_meas_to_pixel[e]))
                    .sum::<f64>();
            state.marginals[i] = sigmoid(total);
            for &e in edges {
                let fresh = sigmoid(total - logit(state.msg_meas_to_pixel[e]));
                let old = state.msg_pixel_to_meas[e];
                state.msg_pixel_to_meas[e] = clamp_msg((1.0 - opts.damping) * fresh + opts.damping * old);
            }
        }

        state.iterations_run = iter;
        let hard = hard_decision(&state.marginals);
        match &decisions {
            Some(prev) if *prev == hard => stable += 1,
            _ => stable = 0,
        }
        decisions = Some(hard);
        if stable >= opts.stall_window {
            state.converged = true;
        }
        observe(&state);
        if state.converged {
            break;
        }
    }

    let pixels = decisions.unwrap_or_else(|| hard_decision(&state.marginals));
    let residual = sum_residual(m, ens, &gains, &pixels);
    Ok(DecodeResult {
        pixels,
        marginals: state.marginals,
        diagnostics: Diagnostics {
            iterations_run: state.iterations_run,
            converged: state.converged,
            residual,
            unpinned_pixel_count: graph.pixel_edges.iter().filter(|e| e.is_empty()).count(),
            exact_match: m.channel.n0 == 0.0,
            inconsistent_measurements: inconsistent,
        },
    })
}

fn sum_residual(m: &Measurement, ens: &IlluminationEnsemble, gains: &[f64], pixels: &[u8]) -> f64 {
    let sq = libm::sqrt(m.channel.es);
    let ss: f64 = ens
        .patterns()
        .iter()
        .zip(&m.bucket)
        .zip(gains)
        .map(|((p, &r), &g)| {
            let count = p.iter().filter(|&&i| pixels[i] == 1).count();
            let e = r - mean_return(g, m.channel.es, count as f64);
            e * e
        })
        .sum();
    libm::sqrt(ss) / sq
}

/// `log p(r | 0) / p(r | 1)` for an on-off symbol with amplitude `h_mag sqrt(E_s)`.
pub fn symbol_llr(r: f64, h_mag: f64, ch: &ChannelParams) -> Result<f64> {
    if !(ch.n0 > 0.0) {
        return Err(Error::InvalidParameter("LLR needs N_0 > 0"));
    }
    let a = h_mag * libm::sqrt(ch.es);
    Ok(a * (a - 2.0 * r) / ch.n0)
}

/// Largest LLR magnitude passed through the tanh rule.
const LLR_CLIP: f64 = 50.0;

/// Sum-product decoding on `h` with the tanh rule. LLRs are `log p0 / p1`.
/// Stops early on a zero syndrome; `converged` means the output is a codeword.
pub fn decode_gf2_bp(llrs: &[f64], h: &ParityCheckMatrix, opts: &BpOptions) -> Result<DecodeResult> {
    opts.validate()?;
    if opts.mode != BpMode::Gf2 {
        return Err(Error::InvalidParameter("decode_gf2_bp needs gf2 mode"));
    }
    let n = h.n_total();
    check_len(n, llrs.len())?;
    let rows = h.rows();
    let k = n - rows.len();

    let mut channel: Vec<f64> = llrs.to_vec();
    let prior_llr = -logit(opts.pixel_prior_one);
    channel[..k].iter_mut().for_each(|l| *l += prior_llr);

    let mut var_edges = vec![Vec::new(); n];
    let mut edge_var = Vec::new();
    for row in rows {
        for &v in row {
            var_edges[v].push(edge_var.len());
            edge_var.push(v);
        }
    }
    let mut v2c: Vec<f64> = edge_var.iter().map(|&v| channel[v]).collect();
    let mut c2v = vec![0.0; edge_var.len()];
    let mut totals = channel.clone();
    let mut word: Vec<u8> = totals.iter().map(|&t| u8::from(t < 0.0)).collect();
    let mut iterations_run = 0;
    let mut unsatisfied = h.syndrome(&word)?.iter().filter(|&&s| s == 1).count();
    let mut tanhs = Vec::new();

    for iter in 1..=opts.max_iters {
        let mut start = 0;
        for row in rows {
            let edges = start..start + row.len();
            start = edges.end;
            tanhs.clear();
            tanhs.extend(v2c[edges.clone()].iter().map(|&l| libm::tanh(l.clamp(-LLR_CLIP, LLR_CLIP) / 2.0)));
            for (slot, e) in edges.enumerate() {
                let prod: f64 = tanhs
                    .iter()
                    .enumerate()
                    .filter(|&(t, _)| t != slot)
                    .map(|(_, &v)| v)
                    .product();
                let prod = prod.clamp(-1.0 + 1e-15, 1.0 - 1e-15);
                c2v[e] = 2.0 * libm::atanh(prod);
            }
        }
        for v in 0..n {
            let total = channel[v] + var_edges[v].iter().map(|&e| c2v[e]).sum::<f64>();
            totals[v] = total;
            for &e in &var_edges[v] {
                let fresh = total - c2v[e];
                v2c[e] = (1.0 - opts.damping) * fresh + opts.damping * v2c[e];
            }
        }
        word = totals.iter().map(|&t| u8::from(t < 0.0)).collect();
        iterations_run = iter;
        unsatisfied = h.syndrome(&word)?.iter().filter(|&&s| s == 1).count();
        if unsatisfied == 0 {
            break;
        }
    }

    let marginals: Vec<f64> = totals[..k].iter().map(|&t| sigmoid(-t)).collect();
    Ok(DecodeResult {
        pixels: word[..k].to_vec(),
        marginals,
        diagnostics: Diagnostics {
            iterations_run,
            converged: unsatisfied == 0,
            residual: unsatisfied as f64,
            unpinned_pixel_count: var_edges[..k].iter().filter(|e| e.is_empty()).count(),
            exact_match: false,
            inconsistent_measurements: 0,
        },
    })
}
