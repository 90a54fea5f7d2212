//! Wireless hop: scripted fades, the link monitor and a FIFO transmitter.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::holder::{ConnectionId, CrossLayerEvent};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadeWindow {
    pub start: f64,
    pub duration: f64,
}

impl FadeWindow {
    pub fn new(start: f64, duration: f64) -> Self {
        Self { start, duration }
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    /// Whether `[from, to]` touches the fade.
    pub fn overlaps(&self, from: f64, to: f64) -> bool {
        from < self.end() && to >= self.start
    }
}

/// True if anything crossing the link during `[from, to]` is lost.
pub fn faded(fades: &[FadeWindow], from: f64, to: f64) -> bool {
    fades.iter().any(|f| f.overlaps(from, to))
}

/// Scripted link monitor. Returns the indications for every fade with the
/// time each one fires, in time order per fade.
pub fn link_monitor(
    fades: &[FadeWindow],
    lead: f64,
    error_factor: f64,
    rtt_mobile: f64,
    connection: ConnectionId,
) -> Vec<(f64, CrossLayerEvent)> {
    let mut out = Vec::with_capacity(fades.len() * 3);
    for fade in fades {
        out.push((
            (fade.start - lead).max(0.0),
            CrossLayerEvent::LinkGoingDown { connection, rtt_mobile, est_down: fade.duration * error_factor },
        ));
        out.push((fade.start, CrossLayerEvent::LinkGone { connection }));
        out.push((fade.end(), CrossLayerEvent::LinkUp { connection }));
    }
    out
}

/// Outcome of offering a packet to a [`WirelessLink`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transmission {
    Delivered { at: f64 },
    LostInFade,
    QueueFull,
}

/// One direction of the wireless hop. Packets serialise at `rate` per second
/// (unlimited when `rate` is infinite), then see a fixed delay plus uniform
/// jitter. Deliveries never reorder.
#[derive(Debug, Clone)]
pub struct WirelessLink {
    rate: f64,
    delay: f64,
    jitter: f64,
    queue_limit: usize,
    free_at: f64,
    last_arrival: f64,
    in_queue: VecDeque<f64>,
}

impl WirelessLink {
    pub fn new(rate: f64, delay: f64, jitter: f64, queue_limit: usize) -> Self {
        Self { rate, delay, jitter, queue_limit, free_at: 0.0, last_arrival: 0.0, in_queue: VecDeque::new() }
    }

    pub fn send(&mut self, now: f64, fades: &[FadeWindow], rng: &mut ChaCha8Rng) -> Transmission {
        while self.in_queue.front().is_some_and(|&start| start <= now) {
            self.in_queue.pop_front();
        }
        if self.in_queue.len() >= self.queue_limit {
            return Transmission::QueueFull;
        }
        let start = now.max(self.free_at);
        let tx_end = if self.rate.is_finite() { start + 1.0 / self.rate } else { start };
        self.free_at = tx_end;
        if start > now {
            self.in_queue.push_back(start);
        }
        let jitter = if self.jitter > 0.0 { rng.gen_range(0.0..self.jitter) } else { 0.0 };
        let arrival = (tx_end + self.delay + jitter).max(self.last_arrival);
        if faded(fades, start, arrival) {
            return Transmission::LostInFade;
        }
        self.last_arrival = arrival;
        Transmission::Delivered { at: arrival }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn exact_predictor() {
        let events = link_monitor(&[FadeWindow::new(15.0, 10.0)], 0.5, 1.0, 0.02, 0);
        assert_eq!(events[0].0, 14.5);
        assert_eq!(events[0].1, CrossLayerEvent::LinkGoingDown { connection: 0, rtt_mobile: 0.02, est_down: 10.0 });
        assert_eq!(events[1], (15.0, CrossLayerEvent::LinkGone { connection: 0 }));
        assert_eq!(events[2], (25.0, CrossLayerEvent::LinkUp { connection: 0 }));
    }

    #[test]
    fn over_and_under_estimates() {
        let fades = [FadeWindow::new(15.0, 10.0)];
        for (factor, d) in [(1.5, 15.0), (0.5, 5.0)] {
            let events = link_monitor(&fades, 0.5, factor, 0.02, 0);
            assert!(matches!(events[0].1, CrossLayerEvent::LinkGoingDown { est_down, .. } if est_down == d));
            assert_eq!(events[2].0, 25.0);
        }
    }

    #[test]
    fn fade_drops_overlapping_packets() {
        let fades = [FadeWindow::new(1.0, 1.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut link = WirelessLink::new(f64::INFINITY, 0.01, 0.0, 10);
        assert_eq!(link.send(0.5, &fades, &mut rng), Transmission::Delivered { at: 0.51 });
        assert_eq!(link.send(0.995, &fades, &mut rng), Transmission::LostInFade);
        assert_eq!(link.send(1.5, &fades, &mut rng), Transmission::LostInFade);
        assert_eq!(link.send(2.0, &fades, &mut rng), Transmission::Delivered { at: 2.01 });
    }

    #[test]
    fn serialises_and_limits_queue() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut link = WirelessLink::new(10.0, 0.0, 0.0, 2);
        let at = |t| match t {
            Transmission::Delivered { at } => at,
            other => panic!("{other:?}"),
        };
        assert!((at(link.send(0.0, &[], &mut rng)) - 0.1).abs() < 1e-12);
        assert!((at(link.send(0.0, &[], &mut rng)) - 0.2).abs() < 1e-12);
        assert!((at(link.send(0.0, &[], &mut rng)) - 0.3).abs() < 1e-12);
        assert_eq!(link.send(0.0, &[], &mut rng), Transmission::QueueFull);
    }
}
