//! ACK holding at a base station for TCP over fading wireless links.
//!
//! * [`rto`]: the sender's RTT estimator and its closed forms under pacing.
//! * [`schedule`]: the split-point optimiser and release timetable.
//! * [`holder`]: the per-connection holding state machine.
//! * [`netsim`]: a discrete-event simulator to compare against plain Reno.

pub mod holder;
pub mod netsim;
pub mod rto;
pub mod schedule;
