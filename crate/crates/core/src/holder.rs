//! Base-station ACK holder.
//!
//! One [`AckHolder`] per TCP connection. The link layer drives it with three
//! indications:
//!
//! * `LinkGoingDown { r, d }`: start holding ACKs from the mobile and caching
//!   data for it (`NORMAL -> HOLD_ACK`);
//! * `LinkGone`: no more ACKs will arrive; reserve cache space for the largest
//!   advertised window, build a pacing schedule for the held ACKs and start
//!   releasing them (`HOLD_ACK -> PACE_ACK`);
//! * `LinkUp`: release whatever is still held, hand the cached data to the
//!   mobile and go back to forwarding (`-> FLUSH_ACK -> NORMAL`).
//!
//! While forwarding normally the holder watches timestamps to mirror the
//! fixed host's RTT estimator, which seeds the schedule. Paced ACKs carry a
//! rewritten timestamp echo so the fixed host's RTT sample for each one is
//! exactly the scheduled inter-release gap.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::rto::RttEstimate;
use crate::schedule::{build_schedule, guarded_limit, pacing_origin, PacingSchedule, ScheduleError, SchedulerInput};
use crate::schedule::{DEFAULT_GUARD_FRACTION, MAX_DUPLICATES_PER_ACK};

pub type ConnectionId = u32;

/// Indication from the link layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossLayerEvent {
    LinkGoingDown {
        connection: ConnectionId,
        /// Current RTT to the mobile, `r`.
        rtt_mobile: f64,
        /// Predicted time the link stays down, `d`.
        est_down: f64,
    },
    LinkGone {
        connection: ConnectionId,
    },
    LinkUp {
        connection: ConnectionId,
    },
}

impl CrossLayerEvent {
    pub fn connection(&self) -> ConnectionId {
        match *self {
            Self::LinkGoingDown { connection, .. } | Self::LinkGone { connection } | Self::LinkUp { connection } => {
                connection
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::LinkGoingDown { .. } => "link_going_down",
            Self::LinkGone { .. } => "link_gone",
            Self::LinkUp { .. } => "link_up",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolderMode {
    Normal,
    HoldAck,
    PaceAck,
    FlushAck,
}

impl fmt::Display for HolderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Normal => "NORMAL",
            Self::HoldAck => "HOLD_ACK",
            Self::PaceAck => "PACE_ACK",
            Self::FlushAck => "FLUSH_ACK",
        })
    }
}

/// A cumulative ACK from the mobile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AckRecord {
    pub ack_number: u64,
    /// Bytes.
    pub advertised_window: u64,
    pub timestamp_echo: f64,
    pub arrival_time: f64,
}

/// A data segment from the fixed host.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub seq: u64,
    /// Bytes.
    pub size: u32,
    /// Sender timestamp.
    pub tsval: f64,
}

/// An ACK leaving the base station toward the fixed host.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutgoingAck {
    pub ack_number: u64,
    pub advertised_window: u64,
    /// `None` means the ACK carries no usable echo and yields no RTT sample.
    pub echo: Option<f64>,
    pub duplicate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AckDisposition {
    Forward(OutgoingAck),
    Held,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataDisposition {
    Forward(Segment),
    Cached,
    /// Cache reservation exhausted; the fixed host will retransmit.
    Dropped,
}

/// What a `LinkUp` releases.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flush {
    pub acks: Vec<OutgoingAck>,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HolderError {
    #[error("{event} is not valid in mode {mode}")]
    ProtocolOrder { event: &'static str, mode: HolderMode },
    #[error("invalid indication: {0}")]
    InvalidEvent(String),
    #[error("indication for connection {got} delivered to holder for connection {expected}")]
    WrongConnection { expected: ConnectionId, got: ConnectionId },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderConfig {
    pub connection: ConnectionId,
    pub guard_fraction: f64,
    pub max_duplicates_per_ack: u8,
    /// Record a [`HolderTraceRow`] for every transition and emission.
    pub trace: bool,
}

impl Default for HolderConfig {
    fn default() -> Self {
        Self {
            connection: 0,
            guard_fraction: DEFAULT_GUARD_FRACTION,
            max_duplicates_per_ack: MAX_DUPLICATES_PER_ACK,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderTraceRow {
    pub time: f64,
    pub connection: ConnectionId,
    pub event: &'static str,
    pub mode: HolderMode,
    pub emitted_count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HolderCounters {
    pub acks_held: u64,
    pub originals_released: u64,
    pub duplicates_released: u64,
    pub segments_cached: u64,
    pub segments_forwarded_on_flush: u64,
    pub overflow_drops: u64,
    pub ignored_link_up: u64,
    pub schedule_rebuilds: u64,
}

/// What the base station knows about the fixed-host path.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct FixedPathMonitor {
    /// Base station to fixed host one-way delay, from data timestamps.
    one_way: Option<f64>,
    /// Mirror of the fixed host's estimator, fed with the samples the fixed
    /// host will compute from the echoes we forward.
    estimate: Option<RttEstimate>,
}

impl FixedPathMonitor {
    fn on_data(&mut self, tsval: f64, now: f64) {
        if now >= tsval {
            self.one_way = Some(now - tsval);
        }
    }

    fn one_way(&self) -> f64 {
        self.one_way.unwrap_or(0.0)
    }

    fn on_sample(&mut self, sample: f64) {
        self.estimate = match self.estimate {
            Some(e) => e.update(sample).ok().or(Some(e)),
            None => RttEstimate::from_first_sample(sample).ok(),
        };
    }

    fn on_forward(&mut self, echo: f64, now: f64) {
        let sample = now + self.one_way() - echo;
        if sample >= 0.0 {
            self.on_sample(sample);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ActiveSchedule {
    schedule: PacingSchedule,
    origin: f64,
    /// Index into `held` of the schedule's ACK 0.
    base: usize,
    next: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AckHolder {
    config: HolderConfig,
    mode: HolderMode,
    held: Vec<AckRecord>,
    /// Held ACKs `[0, released)` have left as originals.
    released: usize,
    cached: VecDeque<Segment>,
    cached_bytes: u64,
    reserved_window: Option<u64>,
    schedule: Option<ActiveSchedule>,
    going_down_at: f64,
    announced_down: f64,
    rtt_mobile: f64,
    last_forward: Option<f64>,
    fixed_path: FixedPathMonitor,
    counters: HolderCounters,
    trace: Vec<HolderTraceRow>,
}

impl AckHolder {
    pub fn new(config: HolderConfig) -> Self {
        Self {
            config,
            mode: HolderMode::Normal,
            held: Vec::new(),
            released: 0,
            cached: VecDeque::new(),
            cached_bytes: 0,
            reserved_window: None,
            schedule: None,
            going_down_at: 0.0,
            announced_down: 0.0,
            rtt_mobile: 0.0,
            last_forward: None,
            fixed_path: FixedPathMonitor::default(),
            counters: HolderCounters::default(),
            trace: Vec::new(),
        }
    }

    pub fn config(&self) -> &HolderConfig {
        &self.config
    }

    pub fn mode(&self) -> HolderMode {
        self.mode
    }

    pub fn held_acks(&self) -> &[AckRecord] {
        &self.held
    }

    /// Held ACKs that have not yet left as originals.
    pub fn unreleased_acks(&self) -> &[AckRecord] {
        &self.held[self.released..]
    }

    pub fn cached_segments(&self) -> impl Iterator<Item = &Segment> {
        self.cached.iter()
    }

    pub fn cached_bytes(&self) -> u64 {
        self.cached_bytes
    }

    pub fn reserved_window(&self) -> Option<u64> {
        self.reserved_window
    }

    pub fn active_schedule(&self) -> Option<&PacingSchedule> {
        self.schedule.as_ref().map(|a| &a.schedule)
    }

    pub fn schedule_origin(&self) -> Option<f64> {
        self.schedule.as_ref().map(|a| a.origin)
    }

    pub fn next_release_index(&self) -> usize {
        self.schedule.as_ref().map_or(0, |a| a.next)
    }

    pub fn counters(&self) -> HolderCounters {
        self.counters
    }

    pub fn trace(&self) -> &[HolderTraceRow] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<HolderTraceRow> {
        std::mem::take(&mut self.trace)
    }

    /// The base station's mirror of the fixed host's RTT estimator.
    pub fn fixed_path_estimate(&self) -> Option<RttEstimate> {
        self.fixed_path.estimate
    }

    /// Overrides the mirrored estimator, e.g. when the fixed host's state is
    /// known out of band.
    pub fn set_fixed_path_estimate(&mut self, estimate: RttEstimate) {
        self.fixed_path.estimate = Some(estimate);
    }

    fn record(&mut self, now: f64, event: &'static str, emitted_count: usize) {
        if self.config.trace {
            self.trace.push(HolderTraceRow {
                time: now,
                connection: self.config.connection,
                event,
                mode: self.mode,
                emitted_count,
            });
        }
    }

    /// Dispatches a link-layer indication. Returns the flushed traffic for
    /// `LinkUp`, an empty [`Flush`] otherwise.
    pub fn handle_indication(&mut self, event: CrossLayerEvent, now: f64) -> Result<Flush, HolderError> {
        if event.connection() != self.config.connection {
            return Err(HolderError::WrongConnection { expected: self.config.connection, got: event.connection() });
        }
        match event {
            CrossLayerEvent::LinkGoingDown { rtt_mobile, est_down, .. } => {
                self.on_link_going_down(now, rtt_mobile, est_down).map(|()| Flush::default())
            }
            CrossLayerEvent::LinkGone { .. } => self.on_link_gone(now).map(|()| Flush::default()),
            CrossLayerEvent::LinkUp { .. } => Ok(self.on_link_up(now)),
        }
    }

    pub fn on_link_going_down(&mut self, now: f64, rtt_mobile: f64, est_down: f64) -> Result<(), HolderError> {
        if self.mode != HolderMode::Normal {
            return Err(HolderError::ProtocolOrder { event: "link_going_down", mode: self.mode });
        }
        if !(est_down.is_finite() && est_down > 0.0) {
            return Err(HolderError::InvalidEvent(format!("predicted down time must be positive, got {est_down}")));
        }
        if !(rtt_mobile.is_finite() && rtt_mobile >= 0.0) {
            return Err(HolderError::InvalidEvent(format!("mobile RTT must be non-negative, got {rtt_mobile}")));
        }
        self.mode = HolderMode::HoldAck;
        self.going_down_at = now;
        self.announced_down = est_down;
        self.rtt_mobile = rtt_mobile;
        self.record(now, "link_going_down", 0);
        Ok(())
    }

    pub fn on_ack_from_mobile(&mut self, ack: AckRecord, now: f64) -> AckDisposition {
        match self.mode {
            HolderMode::Normal | HolderMode::FlushAck => {
                self.fixed_path.on_forward(ack.timestamp_echo, now);
                self.last_forward = Some(now);
                AckDisposition::Forward(OutgoingAck {
                    ack_number: ack.ack_number,
                    advertised_window: ack.advertised_window,
                    echo: Some(ack.timestamp_echo),
                    duplicate: false,
                })
            }
            HolderMode::HoldAck => {
                self.hold(ack);
                self.record(now, "ack_held", 0);
                AckDisposition::Held
            }
            HolderMode::PaceAck => {
                self.hold(ack);
                self.record(now, "ack_held", 0);
                // The link monitor was wrong about the link being gone; fold
                // the new ACK into a fresh schedule from here on.
                if let Err(e) = self.rebuild_schedule(now) {
                    log::warn!("connection {}: schedule rebuild failed: {e}", self.config.connection);
                }
                AckDisposition::Held
            }
        }
    }

    fn hold(&mut self, ack: AckRecord) {
        // Cumulative ACKs never move backwards; a stale one adds nothing.
        if self.held.last().is_some_and(|last| ack.ack_number < last.ack_number) {
            return;
        }
        self.counters.acks_held += 1;
        self.held.push(ack);
    }

    pub fn on_data_from_fixed(&mut self, segment: Segment, now: f64) -> DataDisposition {
        self.fixed_path.on_data(segment.tsval, now);
        match self.mode {
            HolderMode::Normal | HolderMode::FlushAck => DataDisposition::Forward(segment),
            HolderMode::HoldAck | HolderMode::PaceAck => {
                let size = u64::from(segment.size);
                if self.reserved_window.is_some_and(|w| self.cached_bytes + size > w) {
                    self.counters.overflow_drops += 1;
                    self.record(now, "data_dropped", 0);
                    return DataDisposition::Dropped;
                }
                self.cached_bytes += size;
                self.cached.push_back(segment);
                self.counters.segments_cached += 1;
                self.record(now, "data_cached", 0);
                DataDisposition::Cached
            }
        }
    }

    pub fn on_link_gone(&mut self, now: f64) -> Result<(), HolderError> {
        if self.mode != HolderMode::HoldAck {
            return Err(HolderError::ProtocolOrder { event: "link_gone", mode: self.mode });
        }
        self.mode = HolderMode::PaceAck;
        if let Some(window) = self.held.iter().map(|a| a.advertised_window).max() {
            self.reserved_window = Some(window.max(self.cached_bytes));
        }
        self.record(now, "link_gone", 0);
        if !self.held.is_empty() {
            self.rebuild_schedule(now)?;
        }
        Ok(())
    }

    /// Builds a schedule for every held ACK not yet released, anchored where
    /// the fixed host last restarted its retransmission timer.
    fn rebuild_schedule(&mut self, now: f64) -> Result<(), HolderError> {
        let remaining = self.held.len() - self.released;
        if remaining == 0 {
            self.schedule = None;
            return Ok(());
        }
        let one_way = self.fixed_path.one_way();
        let start = match self.fixed_path.estimate {
            Some(e) => e,
            None => RttEstimate::from_first_sample((2.0 * one_way + self.rtt_mobile).max(1e-3))
                .map_err(ScheduleError::from)?,
        };
        let rto0 = start.rto();
        let origin = pacing_origin(now, self.last_forward, rto0);
        let predicted_up = self.going_down_at + self.announced_down;
        let outage = (predicted_up - origin).max(guarded_limit(rto0, self.config.guard_fraction));

        let input = SchedulerInput::new(remaining, outage, start.mu(), start.sigma())
            .with_guard(self.config.guard_fraction)
            .with_duplicates(self.config.max_duplicates_per_ack)
            .with_rtts(2.0 * one_way, self.rtt_mobile);
        let schedule = build_schedule(&input)?;
        if self.schedule.is_some() {
            self.counters.schedule_rebuilds += 1;
        }
        self.schedule = Some(ActiveSchedule { schedule, origin, base: self.released, next: 0 });
        self.record(now, "schedule_built", 0);
        Ok(())
    }

    /// Absolute time of the next scheduled release, if any.
    pub fn next_release_time(&self) -> Option<f64> {
        let active = self.schedule.as_ref()?;
        active.schedule.releases.get(active.next).map(|r| active.origin + r.offset)
    }

    /// Emits every scheduled release due at or before `now`.
    pub fn release_due(&mut self, now: f64) -> Vec<OutgoingAck> {
        if self.mode != HolderMode::PaceAck {
            return Vec::new();
        }
        let one_way = self.fixed_path.one_way();
        let mut out = Vec::new();
        while let Some(active) = self.schedule.as_mut() {
            let Some(release) = active.schedule.releases.get(active.next).copied() else { break };
            if active.origin + release.offset > now {
                break;
            }
            active.next += 1;
            let ack = self.held[active.base + release.ack_index];
            if release.duplicate {
                self.counters.duplicates_released += 1;
                out.push(OutgoingAck {
                    ack_number: ack.ack_number,
                    advertised_window: ack.advertised_window,
                    echo: None,
                    duplicate: true,
                });
            } else {
                debug_assert_eq!(active.base + release.ack_index, self.released);
                self.released += 1;
                self.counters.originals_released += 1;
                // The echo is chosen so the fixed host measures exactly the
                // scheduled gap when this ACK reaches it.
                let echo = now + one_way - release.gap;
                self.fixed_path.on_sample(release.gap);
                out.push(OutgoingAck {
                    ack_number: ack.ack_number,
                    advertised_window: ack.advertised_window,
                    echo: Some(echo),
                    duplicate: false,
                });
            }
            self.last_forward = Some(now);
        }
        if !out.is_empty() {
            self.record(now, "release", out.len());
        }
        out
    }

    /// Flushes everything and returns to forwarding. Ignored (and counted)
    /// when already in `NORMAL` mode.
    pub fn on_link_up(&mut self, now: f64) -> Flush {
        if self.mode == HolderMode::Normal {
            self.counters.ignored_link_up += 1;
            self.record(now, "link_up_ignored", 0);
            return Flush::default();
        }
        self.mode = HolderMode::FlushAck;
        let acks: Vec<OutgoingAck> = self.held[self.released..]
            .iter()
            .map(|a| OutgoingAck {
                ack_number: a.ack_number,
                advertised_window: a.advertised_window,
                // Back-to-back releases would read as near-zero RTTs.
                echo: None,
                duplicate: false,
            })
            .collect();
        self.counters.originals_released += acks.len() as u64;
        if !acks.is_empty() {
            self.last_forward = Some(now);
        }
        let segments: Vec<Segment> = self.cached.drain(..).collect();
        self.counters.segments_forwarded_on_flush += segments.len() as u64;
        self.record(now, "link_up", acks.len() + segments.len());

        self.held.clear();
        self.released = 0;
        self.cached_bytes = 0;
        self.reserved_window = None;
        self.schedule = None;
        self.mode = HolderMode::Normal;
        self.record(now, "flush_complete", 0);
        Flush { acks, segments }
    }
}

/// Independent holders keyed by connection.
#[derive(Debug, Clone, Default)]
pub struct HolderMap {
    template: HolderConfig,
    holders: BTreeMap<ConnectionId, AckHolder>,
}

impl HolderMap {
    pub fn new(template: HolderConfig) -> Self {
        Self { template, holders: BTreeMap::new() }
    }

    pub fn holder(&mut self, connection: ConnectionId) -> &mut AckHolder {
        let template = self.template;
        self.holders.entry(connection).or_insert_with(|| AckHolder::new(HolderConfig { connection, ..template }))
    }

    pub fn get(&self, connection: ConnectionId) -> Option<&AckHolder> {
        self.holders.get(&connection)
    }

    pub fn handle_indication(&mut self, event: CrossLayerEvent, now: f64) -> Result<Flush, HolderError> {
        self.holder(event.connection()).handle_indication(event, now)
    }

    pub fn len(&self) -> usize {
        self.holders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holders.is_empty()
    }
}
