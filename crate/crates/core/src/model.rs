//! Round-by-round throughput model.
//!
//! A transfer is split into rounds, each started by a non-duplicate ACK.
//! Round `i` releases `C_i` segments that are striped round-robin over the
//! links; the round lasts until the receiver's next non-duplicate ACK,
//! whose expected timing and coverage depend on the arrival order of the
//! round's segments (see [`crate::reorder_prob`]). The window grows by one
//! segment per round in slow start and by `1/w` in congestion avoidance,
//! and the iteration stops once the released bytes cover the transfer.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::reorder_prob::{m_distribution, p_first, q_distribution, ProbError};
use crate::scenario::{units, ModelConfig, PathSet, Scenario, ValidationError};

pub const DEFAULT_MAX_ROUNDS: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("iteration did not finish within {0} rounds")]
    IterationLimit(u64),
}

/// Link carrying segment `j` (1-based) of a round, given how many segments
/// were released before the round. Returns a 1-based link index.
pub fn link_index(j: usize, n: usize, prior_total: u64) -> usize {
    debug_assert!(j >= 1 && n >= 1);
    ((j as u64 - 1 + prior_total) % n as u64) as usize + 1
}

/// Everything needed to evaluate one round.
#[derive(Debug, Clone, Copy)]
pub struct RoundContext<'a> {
    pub paths: &'a PathSet,
    pub config: &'a ModelConfig,
    pub round: u64,
    /// Real-valued batch from the window recurrence.
    pub batch_real: f64,
    /// `max(1, round(batch_real))`, used for all combinatorics.
    pub batch: usize,
    pub window: f64,
    /// Segments released in earlier rounds (real-valued running sum).
    pub prior_total: f64,
}

impl<'a> RoundContext<'a> {
    pub fn new(
        paths: &'a PathSet,
        config: &'a ModelConfig,
        round: u64,
        batch_real: f64,
        window: f64,
        prior_total: f64,
    ) -> Self {
        Self {
            paths,
            config,
            round,
            batch_real,
            batch: (batch_real.round() as usize).max(1),
            window,
            prior_total,
        }
    }

    pub fn n(&self) -> usize {
        self.paths.len()
    }

    /// Rounded offset used by the round-robin mapping.
    pub fn prior_index(&self) -> u64 {
        self.prior_total.round() as u64
    }

    pub fn link_of(&self, j: usize) -> usize {
        link_index(j, self.n(), self.prior_index())
    }

    /// `min(m_ack, C)`: where an in-order run triggers the ACK.
    pub fn ack_point(&self) -> usize {
        (self.config.m_ack as usize).min(self.batch)
    }
}

/// Time from the start of the round until segment `j` reaches the
/// receiver: `(⌊j/n⌋ + 1)·s/b + d` on the link the segment is mapped to.
pub fn segment_delay(ctx: &RoundContext<'_>, j: usize) -> f64 {
    let link = ctx.paths.link(ctx.link_of(j));
    let queued = (j / ctx.n() + 1) as f64;
    queued * ctx.config.segment_bits() / link.bandwidth_bps + link.prop_delay_s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    /// Expected round duration, seconds.
    pub expected_t: f64,
    /// Expected segments covered by the ACK that opens the next round.
    pub expected_a_next: f64,
}

/// Round outcome as used by the iteration.
///
/// A single link delivers in order, so the ACK fires deterministically at
/// segment `min(m_ack, C)`. With two or more links the random-order
/// mixture of [`mixture_round`] applies.
pub fn expected_round(ctx: &RoundContext<'_>) -> Result<RoundOutcome, ProbError> {
    if ctx.n() == 1 {
        Ok(in_order_round(ctx))
    } else {
        mixture_round(ctx)
    }
}

/// Deterministic in-order delivery: the ACK covers `min(m_ack, C)`
/// segments and fires when the last of them lands.
pub fn in_order_round(ctx: &RoundContext<'_>) -> RoundOutcome {
    let a = ctx.ack_point();
    RoundOutcome {
        expected_t: segment_delay(ctx, a),
        expected_a_next: a as f64,
    }
}

/// Expected duration and ACK coverage assuming a uniformly random arrival
/// order, for any number of links.
///
/// With probability `1/C` segment 1 lands first and the ACK waits for the
/// in-order run (capped at `m_ack`); otherwise segment 1 fills a gap, the
/// ACK fires on its arrival and covers the buffered run behind it.
pub fn mixture_round(ctx: &RoundContext<'_>) -> Result<RoundOutcome, ProbError> {
    let c = ctx.batch;
    let d1 = segment_delay(ctx, 1);
    if c == 1 {
        return Ok(RoundOutcome {
            expected_t: d1,
            expected_a_next: 1.0,
        });
    }
    let m = m_distribution(c, ctx.config.m_ack as usize)?;
    let q = q_distribution(c)?;

    let first_t = m.expect(|k| segment_delay(ctx, k));
    let first_a = m.expect(|k| k as f64);
    let gap_t = d1;
    let gap_a = q.mean();

    let pf = p_first(c);
    Ok(RoundOutcome {
        expected_t: gap_t + pf * (first_t - gap_t),
        expected_a_next: gap_a + pf * (first_a - gap_a),
    })
}

/// Expected round duration written as `D_1` plus weighted delay gaps
/// `D_k − D_1`. Algebraically identical to the duration from
/// [`mixture_round`]; evaluated term by term as an independent route.
pub fn rearranged_round_time(ctx: &RoundContext<'_>) -> f64 {
    let c = ctx.batch;
    let d1 = segment_delay(ctx, 1);
    if c == 1 {
        return d1;
    }
    let a = ctx.ack_point();
    let gap_a = segment_delay(ctx, a) - d1;

    // weight(k) = (C−k−1)·(C−k−1)!/C! = (C−k−1) / ∏_{j=0..k} (C−j)
    let mut weights = Vec::with_capacity(c.saturating_sub(2));
    let mut falling = c as f64;
    for k in 1..=c.saturating_sub(2) {
        falling *= (c - k) as f64;
        weights.push((c - k - 1) as f64 / falling);
    }
    let inv_c_factorial = (1..=c).fold(1.0, |acc, j| acc / j as f64);

    let saturated: f64 = (a..=c.saturating_sub(2))
        .map(|k| gap_a * weights[k - 1])
        .sum();
    let early: f64 = (1..a)
        .map(|k| {
            let w = weights.get(k - 1).copied().unwrap_or(0.0);
            (segment_delay(ctx, k) - d1) * w
        })
        .sum();
    saturated + gap_a * inv_c_factorial + d1 + early
}

/// `D_k − D_1` split into its delay, bandwidth and queueing parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayGap {
    /// `d_{η_k} − d_{η_1}`
    pub delay: f64,
    /// `(b_{η_1} − b_{η_k})·s / (b_{η_k}·b_{η_1})`
    pub bandwidth: f64,
    /// `⌊k/n⌋·s/b_{η_k} − ⌊1/n⌋·s/b_{η_1}`; the second term only exists
    /// on a single link.
    pub queueing: f64,
}

impl DelayGap {
    pub fn total(&self) -> f64 {
        self.delay + self.bandwidth + self.queueing
    }
}

pub fn delay_gap(ctx: &RoundContext<'_>, k: usize) -> DelayGap {
    let n = ctx.n();
    let s = ctx.config.segment_bits();
    let first = ctx.paths.link(ctx.link_of(1));
    let kth = ctx.paths.link(ctx.link_of(k));
    let (b1, bk) = (first.bandwidth_bps, kth.bandwidth_bps);
    DelayGap {
        delay: kth.prop_delay_s - first.prop_delay_s,
        bandwidth: (b1 - bk) * s / (bk * b1),
        queueing: (k / n) as f64 * s / bk - (1 / n) as f64 * s / b1,
    }
}

/// Round at which slow start ends: `W_s − W_l` in segments.
pub fn slow_start_rounds(config: &ModelConfig) -> u64 {
    (config.ssthresh_segments - config.init_window_segments)
        .floor()
        .max(0.0) as u64
}

/// Window for round `i + 1` given the window of round `i`.
pub fn next_window(window: f64, round: u64, slow_start_end: u64) -> f64 {
    if round < slow_start_end {
        window + 1.0
    } else {
        window + 1.0 / window
    }
}

/// Batch for round `i + 1`: the segments the ACK covers plus the window
/// increment earned in round `i`.
pub fn next_batch(expected_acked: f64, window: f64, round: u64, slow_start_end: u64) -> f64 {
    if round < slow_start_end {
        expected_acked + 1.0
    } else {
        expected_acked + 1.0 / window
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub window: f64,
    pub batch_real: f64,
    pub batch: usize,
    pub prior_total: f64,
    pub expected_t: f64,
    pub expected_a_next: f64,
    pub cum_bytes: f64,
    pub cum_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub rounds: Vec<RoundRecord>,
    pub transfer_bytes: u64,
    pub total_time_s: f64,
}

impl ThroughputReport {
    /// `E / T̂`, the literal average throughput in bytes per second.
    pub fn throughput_bytes_per_s(&self) -> f64 {
        self.transfer_bytes as f64 / self.total_time_s
    }

    pub fn throughput_bps(&self) -> f64 {
        units::bytes_to_bits(self.transfer_bytes as f64) / self.total_time_s
    }

    pub fn released_bytes(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.cum_bytes)
    }

    pub const CSV_HEADER: &'static str = "round,w,C,E_T_s,E_A_next,cum_bytes,cum_time_s";

    /// One row per round followed by
    /// `summary,,,,,<transfer_bytes>,<total_time_s>`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.rounds {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.round,
                r.window,
                r.batch_real,
                r.expected_t,
                r.expected_a_next,
                r.cum_bytes,
                r.cum_time_s
            )?;
        }
        writeln!(
            out,
            "summary,,,,,{},{}",
            self.transfer_bytes, self.total_time_s
        )
    }
}

/// A parsed row of the per-round CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundCsvRow {
    pub round: u64,
    pub window: f64,
    pub batch_real: f64,
    pub expected_t: f64,
    pub expected_a_next: f64,
    pub cum_bytes: f64,
    pub cum_time_s: f64,
}

impl From<&RoundRecord> for RoundCsvRow {
    fn from(r: &RoundRecord) -> Self {
        Self {
            round: r.round,
            window: r.window,
            batch_real: r.batch_real,
            expected_t: r.expected_t,
            expected_a_next: r.expected_a_next,
            cum_bytes: r.cum_bytes,
            cum_time_s: r.cum_time_s,
        }
    }
}

/// Reads back what [`ThroughputReport::write_csv`] wrote: the round rows
/// and the `(transfer_bytes, total_time_s)` summary.
pub fn read_rounds_csv<R: BufRead>(input: R) -> io::Result<(Vec<RoundCsvRow>, u64, f64)> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h == ThroughputReport::CSV_HEADER => {}
        other => return Err(bad(format!("unexpected header {other:?}"))),
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad(format!("expected 7 fields: {line}")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s}: {e}")));
        if f[0] == "summary" {
            let bytes = f[5].parse::<u64>().map_err(|e| bad(e.to_string()))?;
            return Ok((rows, bytes, num(f[6])?));
        }
        rows.push(RoundCsvRow {
            round: f[0]
                .parse()
                .map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
            window: num(f[1])?,
            batch_real: num(f[2])?,
            expected_t: num(f[3])?,
            expected_a_next: num(f[4])?,
            cum_bytes: num(f[5])?,
            cum_time_s: num(f[6])?,
        });
    }
    Err(bad("missing summary row".into()))
}

pub fn run_model(scenario: &Scenario) -> Result<ThroughputReport, ModelError> {
    run_model_capped(scenario, DEFAULT_MAX_ROUNDS)
}

pub fn run_model_capped(
    scenario: &Scenario,
    max_rounds: u64,
) -> Result<ThroughputReport, ModelError> {
    scenario.validate()?;
    let paths = &scenario.paths;
    let config = &scenario.config;
    let seg = f64::from(config.segment_size_bytes);
    let target = config.transfer_bytes as f64;
    let ss_end = slow_start_rounds(config);

    let mut window = config.init_window_segments;
    let mut batch = config.init_window_segments;
    let mut prior = 0.0;
    let mut cum_bytes = 0.0;
    let mut cum_time = 0.0;
    let mut rounds = Vec::new();

    for round in 1.. {
        if round > max_rounds {
            return Err(ModelError::IterationLimit(max_rounds));
        }
        let ctx = RoundContext::new(paths, config, round, batch, window, prior);
        let out = expected_round(&ctx)?;
        cum_bytes += seg * batch;
        cum_time += out.expected_t;
        rounds.push(RoundRecord {
            round,
            window,
            batch_real: batch,
            batch: ctx.batch,
            prior_total: prior,
            expected_t: out.expected_t,
            expected_a_next: out.expected_a_next,
            cum_bytes,
            cum_time_s: cum_time,
        });
        if cum_bytes >= target {
            break;
        }
        prior += batch;
        batch = next_batch(out.expected_a_next, window, round, ss_end);
        window = next_window(window, round, ss_end);
    }

    Ok(ThroughputReport {
        rounds,
        transfer_bytes: config.transfer_bytes,
        total_time_s: cum_time,
    })
}
