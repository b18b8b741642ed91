//! Discrete-event simulator of one NewReno flow striped round-robin over
//! several links.
//!
//! Each link is a FIFO server: a segment waits for the link, is clocked out
//! in `8·size/b` seconds, then propagates for `d` seconds. Every segment
//! the sender emits goes to the next link in a global round-robin order.
//! The receiver keeps a cumulative ACK point and an out-of-order buffer and
//! replies when
//!
//! * `m_ack` in-order segments have accumulated,
//! * an out-of-order segment arrives (duplicate ACK),
//! * a segment fills part of a gap, or
//! * the network holds no more data for it (the pipe drained with fewer
//!   than `m_ack` segments pending; there is no delayed-ACK timer).
//!
//! There is no loss. With fast retransmit off the sender only reacts to
//! ACKs that advance the cumulative point.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::io::{self, Write};

use thiserror::Error;

use crate::scenario::{units, Scenario, ValidationError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub fast_retransmit: bool,
    /// One-way delay of the ACK path, seconds.
    pub ack_path_delay_s: f64,
    pub log_arrivals: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            fast_retransmit: false,
            ack_path_delay_s: 0.0,
            log_arrivals: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("ack_path_delay_s must be non-negative (got {0})")]
    AckDelay(f64),
    #[error(
        "event queue drained at t={time_s}s with {delivered_bytes} of {transfer_bytes} bytes delivered \
         (cwnd={cwnd}, outstanding={outstanding} segments)"
    )]
    Deadlock {
        time_s: f64,
        delivered_bytes: u64,
        transfer_bytes: u64,
        cwnd: f64,
        outstanding: usize,
    },
}

/// Event kinds in tie-break order: arrivals are handled before a link
/// starts its next transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    SegmentArrival,
    AckArrival,
    LinkFree,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEvent {
    pub time: f64,
    pub kind: EventKind,
    /// 0-based link; 0 for ACKs.
    pub link: usize,
    /// Segment index for arrivals, ACK number for ACKs.
    pub seq: usize,
    pub retransmission: bool,
}

#[derive(Debug)]
struct Queued {
    event: SimEvent,
    order: u64,
}

impl Queued {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.event
            .time
            .total_cmp(&other.event.time)
            .then(self.event.kind.cmp(&other.event.kind))
            .then(self.event.link.cmp(&other.event.link))
            .then(self.event.seq.cmp(&other.event.seq))
            .then(self.order.cmp(&other.order))
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // BinaryHeap is a max-heap; reverse for earliest-first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    SlowStart,
    CongestionAvoidance,
    FastRecovery,
}

/// Sender congestion state. Sequence numbers count segments from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SenderState {
    pub cwnd: f64,
    pub ssthresh: f64,
    pub next_seq: usize,
    pub snd_una: usize,
    pub dupack_count: u32,
    recover: Option<usize>,
}

impl SenderState {
    fn new(cwnd: f64, ssthresh: f64) -> Self {
        Self {
            cwnd,
            ssthresh,
            next_seq: 0,
            snd_una: 0,
            dupack_count: 0,
            recover: None,
        }
    }

    pub fn phase(&self) -> Phase {
        if self.recover.is_some() {
            Phase::FastRecovery
        } else if self.cwnd < self.ssthresh {
            Phase::SlowStart
        } else {
            Phase::CongestionAvoidance
        }
    }

    pub fn outstanding(&self) -> usize {
        self.next_seq - self.snd_una
    }

    fn window_segments(&self) -> usize {
        // Guard against 2.9999999 after repeated 1/cwnd increments.
        (self.cwnd + 1e-9).floor().max(1.0) as usize
    }
}

/// Receiver reassembly state. Sequence numbers count segments from 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReceiverState {
    /// Next expected segment; everything below has been delivered.
    pub cumulative_ack: usize,
    pub out_of_order: BTreeSet<usize>,
    /// In-order segments received since the last ACK.
    pub delayed_ack_counter: u32,
}

impl ReceiverState {
    /// Buffered segments as disjoint half-open ranges.
    pub fn buffered_ranges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &s in &self.out_of_order {
            match out.last_mut() {
                Some((_, end)) if *end == s => *end += 1,
                _ => out.push((s, s + 1)),
            }
        }
        out
    }
}

/// One segment reaching the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    /// 1-based segment number.
    pub segment: usize,
    pub time_s: f64,
    /// 1-based link.
    pub link: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub bytes_delivered: u64,
    pub finish_time_s: f64,
    pub throughput_bps: f64,
    pub out_of_order_arrivals: u64,
    /// The network never loses data, so every retransmission is spurious.
    pub spurious_retransmissions: u64,
    pub segments_sent: u64,
    pub acks_sent: u64,
    pub max_queue_depth: Vec<usize>,
    arrivals: Option<Vec<Arrival>>,
}

impl SimReport {
    pub const CSV_HEADER: &'static str =
        "bytes_delivered,finish_time_s,throughput_bps,out_of_order_arrivals,spurious_retransmissions";

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        writeln!(
            out,
            "{},{},{},{},{}",
            self.bytes_delivered,
            self.finish_time_s,
            self.throughput_bps,
            self.out_of_order_arrivals,
            self.spurious_retransmissions
        )
    }

    pub fn write_arrivals_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "segment,arrival_time_s,link")?;
        for a in arrival_log(self).unwrap_or(&[]) {
            writeln!(out, "{},{},{}", a.segment, a.time_s, a.link)?;
        }
        Ok(())
    }
}

/// Arrivals in time order (ties by link, then segment). `None` unless the
/// run had `log_arrivals` set.
pub fn arrival_log(report: &SimReport) -> Option<&[Arrival]> {
    report.arrivals.as_deref()
}

#[derive(Debug, Default)]
struct LinkServer {
    queue: VecDeque<(usize, bool)>,
    busy: bool,
    max_depth: usize,
}

/// A single simulation run. [`run_sim`] is the usual entry point; this
/// type skips scenario validation so degenerate inputs (such as an empty
/// transfer) can be driven directly.
pub struct Simulation<'a> {
    scenario: &'a Scenario,
    opts: SimOptions,
    now: f64,
    events: BinaryHeap<Queued>,
    next_order: u64,
    sender: SenderState,
    receiver: ReceiverState,
    links: Vec<LinkServer>,
    rr_next: usize,
    segments: usize,
    in_network: usize,
    finish_time: Option<f64>,
    out_of_order_arrivals: u64,
    retransmissions: u64,
    segments_sent: u64,
    acks_sent: u64,
    arrivals: Vec<Arrival>,
}

impl<'a> Simulation<'a> {
    pub fn new(scenario: &'a Scenario, opts: SimOptions) -> Self {
        let cfg = &scenario.config;
        let seg = u64::from(cfg.segment_size_bytes.max(1));
        Self {
            scenario,
            opts,
            now: 0.0,
            events: BinaryHeap::new(),
            next_order: 0,
            sender: SenderState::new(cfg.init_window_segments, cfg.ssthresh_segments),
            receiver: ReceiverState::default(),
            links: (0..scenario.paths.len())
                .map(|_| LinkServer::default())
                .collect(),
            rr_next: 0,
            segments: cfg.transfer_bytes.div_ceil(seg) as usize,
            in_network: 0,
            finish_time: None,
            out_of_order_arrivals: 0,
            retransmissions: 0,
            segments_sent: 0,
            acks_sent: 0,
            arrivals: Vec::new(),
        }
    }

    pub fn sender(&self) -> &SenderState {
        &self.sender
    }

    pub fn receiver(&self) -> &ReceiverState {
        &self.receiver
    }

    fn segment_bytes(&self, seg: usize) -> u64 {
        let s = u64::from(self.scenario.config.segment_size_bytes);
        let total = self.scenario.config.transfer_bytes;
        let start = seg as u64 * s;
        (total - start).min(s)
    }

    fn schedule(&mut self, event: SimEvent) {
        debug_assert!(event.time >= self.now);
        self.events.push(Queued {
            event,
            order: self.next_order,
        });
        self.next_order += 1;
    }

    fn transmit(&mut self, seg: usize, retransmission: bool) {
        let link = self.rr_next;
        self.rr_next = (self.rr_next + 1) % self.links.len();
        self.segments_sent += 1;
        if retransmission {
            self.retransmissions += 1;
        }
        self.in_network += 1;
        let server = &mut self.links[link];
        server.queue.push_back((seg, retransmission));
        server.max_depth = server.max_depth.max(server.queue.len());
        if !server.busy {
            self.start_transmission(link);
        }
    }

    fn start_transmission(&mut self, link: usize) {
        let Some((seg, retransmission)) = self.links[link].queue.pop_front() else {
            return;
        };
        self.links[link].busy = true;
        let l = self.scenario.paths.links()[link];
        let done = self.now + l.serialization_s(self.segment_bytes(seg) as f64);
        self.schedule(SimEvent {
            time: done,
            kind: EventKind::LinkFree,
            link,
            seq: seg,
            retransmission,
        });
        self.schedule(SimEvent {
            time: done + l.prop_delay_s,
            kind: EventKind::SegmentArrival,
            link,
            seq: seg,
            retransmission,
        });
    }

    fn send_new_data(&mut self) {
        while self.sender.next_seq < self.segments
            && self.sender.outstanding() < self.sender.window_segments()
        {
            let seg = self.sender.next_seq;
            self.sender.next_seq += 1;
            self.transmit(seg, false);
        }
    }

    fn send_ack(&mut self) {
        self.receiver.delayed_ack_counter = 0;
        self.acks_sent += 1;
        self.schedule(SimEvent {
            time: self.now + self.opts.ack_path_delay_s,
            kind: EventKind::AckArrival,
            link: 0,
            seq: self.receiver.cumulative_ack,
            retransmission: false,
        });
    }

    fn on_segment(&mut self, link: usize, seg: usize) {
        self.in_network -= 1;
        if self.opts.log_arrivals {
            self.arrivals.push(Arrival {
                segment: seg + 1,
                time_s: self.now,
                link: link + 1,
            });
        }
        let rx = &mut self.receiver;
        if seg < rx.cumulative_ack || rx.out_of_order.contains(&seg) {
            self.send_ack();
        } else if seg == rx.cumulative_ack {
            let filled_gap = !rx.out_of_order.is_empty();
            rx.cumulative_ack += 1;
            while rx.out_of_order.remove(&rx.cumulative_ack) {
                rx.cumulative_ack += 1;
            }
            if rx.cumulative_ack == self.segments {
                self.finish_time = Some(self.now);
                self.send_ack();
            } else if filled_gap {
                self.send_ack();
            } else {
                rx.delayed_ack_counter += 1;
                if rx.delayed_ack_counter >= self.scenario.config.m_ack {
                    self.send_ack();
                }
            }
        } else {
            self.out_of_order_arrivals += 1;
            rx.out_of_order.insert(seg);
            self.send_ack();
        }
        if self.in_network == 0 && self.receiver.delayed_ack_counter > 0 {
            self.send_ack();
        }
    }

    fn on_ack(&mut self, ack: usize) {
        let tx = &mut self.sender;
        if ack > tx.snd_una {
            let newly = ack - tx.snd_una;
            tx.snd_una = ack;
            tx.dupack_count = 0;
            match tx.recover {
                Some(recover) if ack >= recover => {
                    tx.recover = None;
                    tx.cwnd = tx.ssthresh;
                }
                Some(_) => {
                    // partial ACK: the next hole is retransmitted at once
                    tx.cwnd = (tx.cwnd - newly as f64 + 1.0).max(1.0);
                    let hole = tx.snd_una;
                    self.transmit(hole, true);
                }
                None if tx.cwnd < tx.ssthresh => tx.cwnd += 1.0,
                None => tx.cwnd += 1.0 / tx.cwnd,
            }
            self.send_new_data();
        } else if ack == tx.snd_una && tx.snd_una < tx.next_seq {
            tx.dupack_count += 1;
            if !self.opts.fast_retransmit {
                return;
            }
            if tx.recover.is_none() && tx.dupack_count == 3 {
                let flight = tx.outstanding() as f64;
                tx.ssthresh = (flight / 2.0).max(2.0);
                tx.cwnd = tx.ssthresh + 3.0;
                tx.recover = Some(tx.next_seq);
                let hole = tx.snd_una;
                self.transmit(hole, true);
            } else if tx.recover.is_some() {
                tx.cwnd += 1.0;
                self.send_new_data();
            }
        }
    }

    fn on_link_free(&mut self, link: usize) {
        self.links[link].busy = false;
        self.start_transmission(link);
    }

    pub fn run(mut self) -> Result<SimReport, SimError> {
        if self.opts.ack_path_delay_s.is_nan() || self.opts.ack_path_delay_s < 0.0 {
            return Err(SimError::AckDelay(self.opts.ack_path_delay_s));
        }
        self.send_new_data();
        while let Some(Queued { event, .. }) = self.events.pop() {
            self.now = event.time;
            match event.kind {
                EventKind::SegmentArrival => self.on_segment(event.link, event.seq),
                EventKind::AckArrival => self.on_ack(event.seq),
                EventKind::LinkFree => self.on_link_free(event.link),
            }
        }
        let transfer = self.scenario.config.transfer_bytes;
        if self.receiver.cumulative_ack < self.segments {
            let delivered = (0..self.receiver.cumulative_ack)
                .map(|s| self.segment_bytes(s))
                .sum();
            return Err(SimError::Deadlock {
                time_s: self.now,
                delivered_bytes: delivered,
                transfer_bytes: transfer,
                cwnd: self.sender.cwnd,
                outstanding: self.sender.outstanding(),
            });
        }
        let finish = self.finish_time.unwrap_or(0.0);
        let throughput = if finish > 0.0 {
            units::bytes_to_bits(transfer as f64) / finish
        } else {
            0.0
        };
        Ok(SimReport {
            bytes_delivered: transfer,
            finish_time_s: finish,
            throughput_bps: throughput,
            out_of_order_arrivals: self.out_of_order_arrivals,
            spurious_retransmissions: self.retransmissions,
            segments_sent: self.segments_sent,
            acks_sent: self.acks_sent,
            max_queue_depth: self.links.iter().map(|l| l.max_depth).collect(),
            arrivals: self.opts.log_arrivals.then_some(self.arrivals),
        })
    }
}

pub fn run_sim(scenario: &Scenario, opts: SimOptions) -> Result<SimReport, SimError> {
    scenario.validate()?;
    Simulation::new(scenario, opts).run()
}
