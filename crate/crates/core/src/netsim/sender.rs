//! Reno-style bulk sender with timestamp-based RTT sampling.

use std::fmt;

use crate::rto::RttEstimate;

/// RTO before the first RTT sample, seconds.
pub const INITIAL_RTO: f64 = 1.0;
/// Cap on the exponential backoff multiplier.
pub const MAX_BACKOFF: u32 = 64;
pub const DUPACK_THRESHOLD: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CongestionState {
    SlowStart,
    CongAvoid,
    FastRecovery,
}

impl fmt::Display for CongestionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SlowStart => "SLOW_START",
            Self::CongAvoid => "CONG_AVOID",
            Self::FastRecovery => "FAST_RECOVERY",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenoSender {
    cwnd: f64,
    ssthresh: f64,
    state: CongestionState,
    estimator: Option<RttEstimate>,
    dupack_count: u32,
    /// Oldest unacknowledged segment.
    highest_acked: u64,
    next_seq: u64,
    /// Receiver window, segments.
    rwnd: u64,
    backoff: u32,
    rto_clamp: Option<(f64, f64)>,
    retransmit_timer: Option<f64>,
    timer_generation: u64,
    timeouts: u64,
    fast_retransmits: u64,
}

impl RenoSender {
    pub fn new(rwnd: u64, rto_clamp: Option<(f64, f64)>) -> Self {
        Self {
            cwnd: 1.0,
            ssthresh: rwnd.max(2) as f64,
            state: CongestionState::SlowStart,
            estimator: None,
            dupack_count: 0,
            highest_acked: 0,
            next_seq: 0,
            rwnd: rwnd.max(1),
            backoff: 1,
            rto_clamp,
            retransmit_timer: None,
            timer_generation: 0,
            timeouts: 0,
            fast_retransmits: 0,
        }
    }

    pub fn cwnd(&self) -> f64 {
        self.cwnd
    }

    pub fn ssthresh(&self) -> f64 {
        self.ssthresh
    }

    pub fn state(&self) -> CongestionState {
        self.state
    }

    pub fn estimator(&self) -> Option<&RttEstimate> {
        self.estimator.as_ref()
    }

    pub fn dupack_count(&self) -> u32 {
        self.dupack_count
    }

    pub fn highest_acked(&self) -> u64 {
        self.highest_acked
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn retransmit_timer(&self) -> Option<f64> {
        self.retransmit_timer
    }

    /// Bumped on every timer change; stale timer events carry an old value.
    pub fn timer_generation(&self) -> u64 {
        self.timer_generation
    }

    pub fn timeouts(&self) -> u64 {
        self.timeouts
    }

    pub fn fast_retransmits(&self) -> u64 {
        self.fast_retransmits
    }

    pub fn outstanding(&self) -> u64 {
        self.next_seq - self.highest_acked
    }

    /// Current timer length including backoff and clamp.
    pub fn rto(&self) -> f64 {
        let base = self.estimator.map_or(INITIAL_RTO, |e| e.rto());
        let base = match self.rto_clamp {
            Some((lo, hi)) => base.clamp(lo, hi),
            None => base,
        };
        let rto = base * f64::from(self.backoff);
        match self.rto_clamp {
            Some((_, hi)) => rto.min(hi),
            None => rto,
        }
    }

    fn arm_timer(&mut self, now: f64) {
        self.retransmit_timer = Some(now + self.rto());
        self.timer_generation += 1;
    }

    fn stop_timer(&mut self) {
        self.retransmit_timer = None;
        self.timer_generation += 1;
    }

    fn window(&self) -> u64 {
        (self.cwnd.floor() as u64).clamp(1, self.rwnd)
    }

    /// Sequence numbers of new segments the window allows right now.
    pub fn send_available(&mut self, now: f64) -> Vec<u64> {
        let limit = self.highest_acked + self.window();
        let out: Vec<u64> = (self.next_seq..limit.max(self.next_seq)).collect();
        if !out.is_empty() {
            self.next_seq = limit;
            if self.retransmit_timer.is_none() {
                self.arm_timer(now);
            }
        }
        out
    }

    fn sample(&mut self, echo: Option<f64>, now: f64) {
        let Some(echo) = echo else { return };
        let x = now - echo;
        if !(x.is_finite() && x >= 0.0) {
            return;
        }
        self.estimator = match self.estimator {
            Some(e) => e.update(x).ok().or(Some(e)),
            None => RttEstimate::from_first_sample(x).ok(),
        };
    }

    /// Processes a cumulative ACK. Returns segments to transmit, the
    /// retransmission (if any) first.
    pub fn on_ack(&mut self, ack_number: u64, echo: Option<f64>, now: f64) -> Vec<u64> {
        self.sample(echo, now);
        let mut out = Vec::new();
        if ack_number > self.highest_acked {
            let newly = ack_number - self.highest_acked;
            self.highest_acked = ack_number;
            self.next_seq = self.next_seq.max(ack_number);
            self.dupack_count = 0;
            self.backoff = 1;
            match self.state {
                CongestionState::FastRecovery => {
                    self.cwnd = self.ssthresh;
                    self.state = CongestionState::CongAvoid;
                }
                CongestionState::SlowStart => {
                    self.cwnd += newly as f64;
                    if self.cwnd >= self.ssthresh {
                        self.state = CongestionState::CongAvoid;
                    }
                }
                CongestionState::CongAvoid => {
                    self.cwnd += newly as f64 / self.cwnd;
                }
            }
            self.cwnd = self.cwnd.min(self.rwnd as f64);
            if self.outstanding() > 0 {
                self.arm_timer(now);
            } else {
                self.stop_timer();
            }
        } else if ack_number == self.highest_acked && self.outstanding() > 0 {
            self.dupack_count += 1;
            if self.state == CongestionState::FastRecovery {
                self.cwnd += 1.0;
            } else if self.dupack_count == DUPACK_THRESHOLD {
                self.ssthresh = (self.cwnd / 2.0).max(2.0);
                self.cwnd = self.ssthresh + f64::from(DUPACK_THRESHOLD);
                self.state = CongestionState::FastRecovery;
                self.fast_retransmits += 1;
                out.push(self.highest_acked);
            }
        }
        out.extend(self.send_available(now));
        out
    }

    /// Fires the retransmission timer. Returns segments to transmit.
    pub fn on_timeout(&mut self, now: f64) -> Vec<u64> {
        self.timeouts += 1;
        self.ssthresh = (self.cwnd / 2.0).max(2.0);
        self.cwnd = 1.0;
        self.state = CongestionState::SlowStart;
        self.dupack_count = 0;
        self.next_seq = self.highest_acked;
        self.backoff = (self.backoff * 2).min(MAX_BACKOFF);
        self.retransmit_timer = None;
        self.send_available(now)
    }
}
