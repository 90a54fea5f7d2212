//! Discrete-event simulation of one bulk TCP transfer from a fixed host,
//! through a base station, over a fading wireless hop to a mobile.
//!
//! ```text
//! fixed host --wired--> base station --wireless (fades)--> mobile
//! ```
//!
//! The wired hop is a pure delay. The wireless downlink serialises at
//! `bottleneck_rate`; both wireless directions add `wireless_delay` plus
//! uniform jitter in `[0, wireless_jitter)` drawn from the seeded RNG.

mod link;
mod queue;
mod sender;

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::holder::{
    AckDisposition, AckHolder, AckRecord, CrossLayerEvent, DataDisposition, HolderConfig, HolderCounters, HolderMode,
    HolderTraceRow, OutgoingAck, Segment,
};
use crate::schedule::MAX_DUPLICATES_PER_ACK;

pub use link::{faded, link_monitor, FadeWindow, Transmission, WirelessLink};
pub use queue::EventQueue;
pub use sender::{CongestionState, RenoSender, DUPACK_THRESHOLD, INITIAL_RTO, MAX_BACKOFF};

const CONNECTION: u32 = 0;

/// Guard used by the simulated base station. Both wired directions are pure
/// delays here, so a paced ACK lands exactly when planned and a thin margin
/// is enough. A wide guard stops phase one from inflating the timer when the
/// RTT deviation is small relative to the mean.
pub const SIM_GUARD_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SenderVariant {
    RenoBaseline,
    AckHolding,
}

impl SenderVariant {
    pub const ALL: [SenderVariant; 2] = [SenderVariant::RenoBaseline, SenderVariant::AckHolding];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::RenoBaseline => "RENO_BASELINE",
            Self::AckHolding => "ACK_HOLDING",
        }
    }
}

impl std::fmt::Display for SenderVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub transfer_duration: f64,
    pub fade_windows: Vec<FadeWindow>,
    pub prediction_lead: f64,
    pub prediction_error_factor: f64,
    pub wired_delay: f64,
    pub wireless_delay: f64,
    pub wireless_jitter: f64,
    /// Segments per second.
    pub bottleneck_rate: f64,
    /// Downlink queue capacity, segments.
    pub queue_limit: usize,
    /// Bytes.
    pub segment_size: u32,
    /// Receiver window, segments.
    pub advertised_window: u64,
    pub sender_variant: SenderVariant,
    pub rto_clamp: Option<(f64, f64)>,
    pub guard_fraction: f64,
    pub max_duplicates_per_ack: u8,
    pub rng_seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            transfer_duration: 40.0,
            fade_windows: Vec::new(),
            prediction_lead: 0.1,
            prediction_error_factor: 1.0,
            wired_delay: 0.05,
            wireless_delay: 0.01,
            wireless_jitter: 0.02,
            bottleneck_rate: 1000.0,
            queue_limit: 100,
            segment_size: 1000,
            advertised_window: 64,
            sender_variant: SenderVariant::AckHolding,
            rto_clamp: None,
            guard_fraction: SIM_GUARD_FRACTION,
            max_duplicates_per_ack: MAX_DUPLICATES_PER_ACK,
            rng_seed: 1,
        }
    }
}

impl Scenario {
    pub fn with_variant(&self, variant: SenderVariant) -> Self {
        Self { sender_variant: variant, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |msg: String| Err(ScenarioError::Invalid(msg));
        if !(self.transfer_duration.is_finite() && self.transfer_duration > 0.0) {
            return bad(format!("transfer_duration must be positive, got {}", self.transfer_duration));
        }
        for (name, v) in [
            ("prediction_lead", self.prediction_lead),
            ("wired_delay", self.wired_delay),
            ("wireless_delay", self.wireless_delay),
            ("wireless_jitter", self.wireless_jitter),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be a non-negative number, got {v}"));
            }
        }
        if !(self.prediction_error_factor.is_finite() && self.prediction_error_factor > 0.0) {
            return bad(format!("prediction_error_factor must be positive, got {}", self.prediction_error_factor));
        }
        if self.bottleneck_rate.is_nan() || self.bottleneck_rate <= 0.0 {
            return bad(format!("bottleneck_rate must be positive, got {}", self.bottleneck_rate));
        }
        if self.queue_limit == 0 || self.segment_size == 0 || self.advertised_window == 0 {
            return bad("queue_limit, segment_size and advertised_window must be positive".into());
        }
        if !(0.0..1.0).contains(&self.guard_fraction) {
            return bad(format!("guard_fraction must be in [0, 1), got {}", self.guard_fraction));
        }
        if let Some((lo, hi)) = self.rto_clamp {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return bad(format!("rto_clamp must satisfy 0 < min <= max, got ({lo}, {hi})"));
            }
        }
        let mut prev_end = f64::NEG_INFINITY;
        for w in &self.fade_windows {
            if !(w.start.is_finite() && w.start >= 0.0 && w.duration.is_finite() && w.duration > 0.0) {
                return bad(format!("fade window ({}, {}) must have start >= 0 and duration > 0", w.start, w.duration));
            }
            if w.start < prev_end {
                return bad(format!("fade windows must be sorted and non-overlapping (window at {})", w.start));
            }
            prev_end = w.end();
        }
        Ok(())
    }

    /// What the link monitor reports as the mobile RTT.
    pub fn mobile_rtt(&self) -> f64 {
        2.0 * self.wireless_delay + self.wireless_jitter
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwndSample {
    pub time: f64,
    pub cwnd: f64,
    pub ssthresh: f64,
    pub rto: f64,
    pub state: CongestionState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub variant: SenderVariant,
    pub transfer_duration: f64,
    pub segments_delivered: u64,
    /// Segments per second.
    pub throughput: f64,
    pub timeout_count: u64,
    /// Timeouts that fired while the base station was holding or pacing.
    pub held_ack_timeouts: u64,
    pub fast_retransmits: u64,
    pub lost_in_fade: u64,
    pub queue_drops: u64,
    pub holder_counters: Option<HolderCounters>,
    pub holder_errors: u64,
    pub cwnd_trace: Vec<CwndSample>,
    pub holder_trace: Vec<HolderTraceRow>,
}

impl Metrics {
    /// Smallest congestion window recorded in `[from, to]`.
    pub fn min_cwnd_between(&self, from: f64, to: f64) -> Option<f64> {
        self.cwnd_trace.iter().filter(|s| s.time >= from && s.time <= to).map(|s| s.cwnd).min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    SenderTimer(u64),
    DataAtBase(Segment),
    DataAtMobile(Segment),
    AckAtBase { ack_number: u64, echo: f64 },
    AckAtSender(OutgoingAck),
    Indication(CrossLayerEvent),
    Release(u64),
}

#[derive(Debug, Default)]
struct MobileReceiver {
    rcv_nxt: u64,
    out_of_order: BTreeSet<u64>,
    ts_recent: f64,
}

impl MobileReceiver {
    fn on_segment(&mut self, seg: Segment) {
        if seg.seq == self.rcv_nxt {
            self.rcv_nxt += 1;
            self.ts_recent = seg.tsval;
            while self.out_of_order.remove(&self.rcv_nxt) {
                self.rcv_nxt += 1;
            }
        } else if seg.seq > self.rcv_nxt {
            self.out_of_order.insert(seg.seq);
        }
    }
}

struct Sim<'a> {
    sc: &'a Scenario,
    now: f64,
    queue: EventQueue<Event>,
    rng: ChaCha8Rng,
    sender: RenoSender,
    receiver: MobileReceiver,
    downlink: WirelessLink,
    uplink: WirelessLink,
    holder: Option<AckHolder>,
    armed_timer: u64,
    release_generation: u64,
    armed_release: Option<f64>,
    held_ack_timeouts: u64,
    lost_in_fade: u64,
    queue_drops: u64,
    holder_errors: u64,
    cwnd_trace: Vec<CwndSample>,
}

impl<'a> Sim<'a> {
    fn new(sc: &'a Scenario) -> Self {
        let holder = (sc.sender_variant == SenderVariant::AckHolding).then(|| {
            AckHolder::new(HolderConfig {
                connection: CONNECTION,
                guard_fraction: sc.guard_fraction,
                max_duplicates_per_ack: sc.max_duplicates_per_ack,
                trace: true,
            })
        });
        Self {
            sc,
            now: 0.0,
            queue: EventQueue::new(),
            rng: ChaCha8Rng::seed_from_u64(sc.rng_seed),
            sender: RenoSender::new(sc.advertised_window, sc.rto_clamp),
            receiver: MobileReceiver::default(),
            downlink: WirelessLink::new(sc.bottleneck_rate, sc.wireless_delay, sc.wireless_jitter, sc.queue_limit),
            uplink: WirelessLink::new(f64::INFINITY, sc.wireless_delay, sc.wireless_jitter, usize::MAX),
            holder,
            armed_timer: u64::MAX,
            release_generation: 0,
            armed_release: None,
            held_ack_timeouts: 0,
            lost_in_fade: 0,
            queue_drops: 0,
            holder_errors: 0,
            cwnd_trace: Vec::new(),
        }
    }

    fn record_sender(&mut self) {
        self.cwnd_trace.push(CwndSample {
            time: self.now,
            cwnd: self.sender.cwnd(),
            ssthresh: self.sender.ssthresh(),
            rto: self.sender.rto(),
            state: self.sender.state(),
        });
    }

    fn transmit(&mut self, seqs: Vec<u64>) {
        for seq in seqs {
            let seg = Segment { seq, size: self.sc.segment_size, tsval: self.now };
            self.queue.push(self.now + self.sc.wired_delay, Event::DataAtBase(seg));
        }
        let gen = self.sender.timer_generation();
        if gen != self.armed_timer {
            self.armed_timer = gen;
            if let Some(deadline) = self.sender.retransmit_timer() {
                self.queue.push(deadline, Event::SenderTimer(gen));
            }
        }
        self.record_sender();
    }

    fn arm_release(&mut self) {
        let next = self.holder.as_ref().and_then(AckHolder::next_release_time);
        if next != self.armed_release {
            self.armed_release = next;
            self.release_generation += 1;
            if let Some(t) = next {
                self.queue.push(t.max(self.now), Event::Release(self.release_generation));
            }
        }
    }

    fn send_to_mobile(&mut self, seg: Segment) {
        match self.downlink.send(self.now, &self.sc.fade_windows, &mut self.rng) {
            Transmission::Delivered { at } => self.queue.push(at, Event::DataAtMobile(seg)),
            Transmission::LostInFade => self.lost_in_fade += 1,
            Transmission::QueueFull => self.queue_drops += 1,
        }
    }

    fn send_to_sender(&mut self, ack: OutgoingAck) {
        self.queue.push(self.now + self.sc.wired_delay, Event::AckAtSender(ack));
    }

    fn holder_busy(&self) -> bool {
        self.holder.as_ref().is_some_and(|h| h.mode() != HolderMode::Normal)
    }

    fn handle(&mut self, event: Event) {
        match event {
            Event::SenderTimer(gen) => {
                if gen == self.sender.timer_generation() {
                    if self.holder_busy() {
                        self.held_ack_timeouts += 1;
                    }
                    let out = self.sender.on_timeout(self.now);
                    self.transmit(out);
                }
            }
            Event::DataAtBase(seg) => {
                let now = self.now;
                match self.holder.as_mut().map(|h| h.on_data_from_fixed(seg, now)) {
                    None | Some(DataDisposition::Forward(_)) => self.send_to_mobile(seg),
                    Some(DataDisposition::Cached | DataDisposition::Dropped) => {}
                }
            }
            Event::DataAtMobile(seg) => {
                self.receiver.on_segment(seg);
                let ack_number = self.receiver.rcv_nxt;
                let echo = self.receiver.ts_recent;
                match self.uplink.send(self.now, &self.sc.fade_windows, &mut self.rng) {
                    Transmission::Delivered { at } => self.queue.push(at, Event::AckAtBase { ack_number, echo }),
                    _ => self.lost_in_fade += 1,
                }
            }
            Event::AckAtBase { ack_number, echo } => {
                let window = self.sc.advertised_window * u64::from(self.sc.segment_size);
                let now = self.now;
                match self.holder.as_mut() {
                    None => self.send_to_sender(OutgoingAck {
                        ack_number,
                        advertised_window: window,
                        echo: Some(echo),
                        duplicate: false,
                    }),
                    Some(h) => {
                        let record = AckRecord {
                            ack_number,
                            advertised_window: window,
                            timestamp_echo: echo,
                            arrival_time: now,
                        };
                        match h.on_ack_from_mobile(record, now) {
                            AckDisposition::Forward(out) => self.send_to_sender(out),
                            AckDisposition::Held => self.arm_release(),
                        }
                    }
                }
            }
            Event::AckAtSender(ack) => {
                let out = self.sender.on_ack(ack.ack_number, ack.echo, self.now);
                self.transmit(out);
            }
            Event::Indication(ind) => {
                let now = self.now;
                let Some(h) = self.holder.as_mut() else { return };
                match h.handle_indication(ind, now) {
                    Ok(flush) => {
                        for ack in flush.acks {
                            self.send_to_sender(ack);
                        }
                        for seg in flush.segments {
                            self.send_to_mobile(seg);
                        }
                    }
                    Err(e) => {
                        log::warn!("t={now}: {e}");
                        self.holder_errors += 1;
                    }
                }
                self.arm_release();
            }
            Event::Release(gen) => {
                if gen != self.release_generation {
                    return;
                }
                self.armed_release = None;
                let now = self.now;
                let acks = self.holder.as_mut().map(|h| h.release_due(now)).unwrap_or_default();
                for ack in acks {
                    self.send_to_sender(ack);
                }
                self.arm_release();
            }
        }
    }

    fn run(mut self) -> Metrics {
        if self.holder.is_some() {
            let events = link_monitor(
                &self.sc.fade_windows,
                self.sc.prediction_lead,
                self.sc.prediction_error_factor,
                self.sc.mobile_rtt(),
                CONNECTION,
            );
            for (t, ind) in events {
                self.queue.push(t, Event::Indication(ind));
            }
        }
        let out = self.sender.send_available(0.0);
        self.transmit(out);

        while let Some(t) = self.queue.peek_time() {
            if t > self.sc.transfer_duration {
                break;
            }
            let (t, event) = self.queue.pop().expect("peeked");
            self.now = t;
            self.handle(event);
        }

        let segments_delivered = self.receiver.rcv_nxt;
        let (holder_counters, holder_trace) = match self.holder.as_mut() {
            Some(h) => (Some(h.counters()), h.take_trace()),
            None => (None, Vec::new()),
        };
        Metrics {
            variant: self.sc.sender_variant,
            transfer_duration: self.sc.transfer_duration,
            segments_delivered,
            throughput: segments_delivered as f64 / self.sc.transfer_duration,
            timeout_count: self.sender.timeouts(),
            held_ack_timeouts: self.held_ack_timeouts,
            fast_retransmits: self.sender.fast_retransmits(),
            lost_in_fade: self.lost_in_fade,
            queue_drops: self.queue_drops,
            holder_counters,
            holder_errors: self.holder_errors,
            cwnd_trace: self.cwnd_trace,
            holder_trace,
        }
    }
}

/// Runs one scenario to completion.
pub fn run(scenario: &Scenario) -> Result<Metrics, ScenarioError> {
    scenario.validate()?;
    Ok(Sim::new(scenario).run())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_overlapping_fades() {
        let sc = Scenario {
            fade_windows: vec![FadeWindow::new(5.0, 10.0), FadeWindow::new(10.0, 1.0)],
            ..Scenario::default()
        };
        assert!(run(&sc).is_err());
    }

    #[test]
    fn rejects_negative_delay() {
        let sc = Scenario { wired_delay: -0.1, ..Scenario::default() };
        assert!(matches!(sc.validate(), Err(ScenarioError::Invalid(_))));
    }

    #[test]
    fn receiver_buffers_out_of_order() {
        let mut r = MobileReceiver::default();
        let seg = |seq, tsval| Segment { seq, size: 1, tsval };
        r.on_segment(seg(1, 0.1));
        assert_eq!(r.rcv_nxt, 0);
        r.on_segment(seg(0, 0.2));
        assert_eq!(r.rcv_nxt, 2);
        assert_eq!(r.ts_recent, 0.2);
    }

    #[test]
    fn short_clean_run_delivers() {
        let sc = Scenario { transfer_duration: 2.0, ..Scenario::default() };
        let m = run(&sc).unwrap();
        assert!(m.segments_delivered > 100);
        assert_eq!(m.timeout_count, 0);
        assert_eq!(m.throughput, m.segments_delivered as f64 / 2.0);
    }
}
