//! ACK release scheduling over a predicted outage.
//!
//! `N` held ACKs are split in two. The first `n` are released one predicted
//! RTO apart, inflating the fixed host's timeout as fast as possible; the
//! remaining `N - n` are released every `theta = (T - S(n)) / (N - n)` so the
//! schedule ends exactly at the predicted end of the outage `T` and the
//! inflated RTO decays again. The split `n` is chosen to minimise the RTO the
//! fixed host is left with.
//!
//! A safety margin (`guard_fraction`) keeps every release strictly inside the
//! sender's timeout: with guard `γ` a phase-one gap is `(1 - γ) · RTO` and a
//! phase-two gap must not exceed `(1 - γ) · RTO`. With `γ = 0` phase one is
//! exactly the closed form of [`crate::rto::phase1_closed_form`].

use log::warn;
use thiserror::Error;

use crate::rto::{phase1_closed_form, phase2_closed_form, EstimatorError, RttEstimate};

pub const DEFAULT_GUARD_FRACTION: f64 = 0.1;

/// Each ACK may be sent at most this many extra times; a third duplicate
/// would trigger fast retransmit at a Reno sender.
pub const MAX_DUPLICATES_PER_ACK: u8 = 2;

const REL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("invalid scheduler input: {0}")]
    InvalidInput(String),
    #[error("split n={split} is infeasible: phase one spans {elapsed} s of a {outage} s outage with {total} ACKs")]
    InfeasibleSplit { split: usize, elapsed: f64, outage: f64, total: usize },
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// Everything the scheduler needs to know about one outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerInput {
    /// Number of held ACKs, `N`.
    pub total_acks: usize,
    /// Time the ACKs must cover, `T`.
    pub outage: f64,
    /// Fixed host's smoothed RTT at the start of the schedule.
    pub mu0: f64,
    /// Fixed host's mean deviation at the start of the schedule.
    pub sigma0: f64,
    /// Base station to fixed host RTT, `R`.
    pub rtt_fixed: f64,
    /// Base station to mobile RTT, `r`.
    pub rtt_mobile: f64,
    pub max_duplicates_per_ack: u8,
    pub guard_fraction: f64,
}

impl SchedulerInput {
    pub fn new(total_acks: usize, outage: f64, mu0: f64, sigma0: f64) -> Self {
        Self {
            total_acks,
            outage,
            mu0,
            sigma0,
            rtt_fixed: 0.0,
            rtt_mobile: 0.0,
            max_duplicates_per_ack: MAX_DUPLICATES_PER_ACK,
            guard_fraction: DEFAULT_GUARD_FRACTION,
        }
    }

    pub fn with_guard(mut self, guard_fraction: f64) -> Self {
        self.guard_fraction = guard_fraction;
        self
    }

    pub fn with_duplicates(mut self, max_duplicates_per_ack: u8) -> Self {
        self.max_duplicates_per_ack = max_duplicates_per_ack;
        self
    }

    pub fn with_rtts(mut self, rtt_fixed: f64, rtt_mobile: f64) -> Self {
        self.rtt_fixed = rtt_fixed;
        self.rtt_mobile = rtt_mobile;
        self
    }

    fn with_total(mut self, total_acks: usize) -> Self {
        self.total_acks = total_acks;
        self
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        let bad = |msg: String| Err(ScheduleError::InvalidInput(msg));
        if self.total_acks == 0 {
            return bad("at least one ACK is required".into());
        }
        if !(self.outage.is_finite() && self.outage > 0.0) {
            return bad(format!("outage must be positive, got {}", self.outage));
        }
        if !(self.mu0.is_finite() && self.mu0 > 0.0) {
            return bad(format!("mu0 must be positive, got {}", self.mu0));
        }
        if !(self.sigma0.is_finite() && self.sigma0 >= 0.0) {
            return bad(format!("sigma0 must be non-negative, got {}", self.sigma0));
        }
        if !(self.rtt_fixed >= 0.0 && self.rtt_mobile >= 0.0) {
            return bad(format!("RTTs must be non-negative (R={}, r={})", self.rtt_fixed, self.rtt_mobile));
        }
        if self.max_duplicates_per_ack > MAX_DUPLICATES_PER_ACK {
            return bad(format!(
                "at most {MAX_DUPLICATES_PER_ACK} duplicates per ACK, got {}",
                self.max_duplicates_per_ack
            ));
        }
        if !(self.guard_fraction >= 0.0 && self.guard_fraction < 1.0) {
            return bad(format!("guard fraction must lie in [0, 1), got {}", self.guard_fraction));
        }
        Ok(())
    }

    pub fn start_estimate(&self) -> Result<RttEstimate, ScheduleError> {
        Ok(RttEstimate::new(self.mu0, self.sigma0)?)
    }

    fn max_total(&self) -> usize {
        self.total_acks * (1 + usize::from(self.max_duplicates_per_ack))
    }
}

/// One candidate split evaluated in full.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEval {
    pub split: usize,
    /// Phase-one inter-release gaps, one per ACK in the first subset.
    pub phase_one_gaps: Vec<f64>,
    /// `S(n)`.
    pub elapsed: f64,
    pub theta: f64,
    pub at_split: RttEstimate,
    pub final_estimate: RttEstimate,
}

impl SplitEval {
    pub fn final_rto(&self) -> f64 {
        self.final_estimate.rto()
    }

    fn phase_one_grows(&self) -> bool {
        self.phase_one_gaps.windows(2).all(|w| w[1] > w[0])
    }

    fn nominal_gaps(&self, total: usize) -> Vec<f64> {
        let mut gaps = self.phase_one_gaps.clone();
        gaps.resize(total, self.theta);
        gaps
    }
}

/// Estimator trajectory for the first `n` releases, plus `S(n)`.
struct PhaseOne {
    gaps: Vec<f64>,
    states: Vec<RttEstimate>,
    elapsed: Vec<f64>,
}

impl PhaseOne {
    /// Walks phase one until its elapsed time exceeds `outage` or `limit`
    /// splits have been produced.
    fn walk(input: &SchedulerInput, limit: usize) -> Result<Self, ScheduleError> {
        let start = input.start_estimate()?;
        let factor = 1.0 - input.guard_fraction;
        let mut gaps = Vec::new();
        let mut states = vec![start];
        let mut elapsed = vec![0.0];
        let mut state = start;
        let mut total = 0.0;
        while states.len() < limit {
            let gap = factor * state.rto();
            total += gap;
            if total > input.outage {
                break;
            }
            state = state.update(gap)?;
            gaps.push(gap);
            states.push(state);
            elapsed.push(total);
        }
        if input.guard_fraction == 0.0 {
            // Closed form replaces the accumulated sums so S(n) and the state
            // at the split are exact rather than summed.
            for (n, (s, e)) in states.iter_mut().zip(elapsed.iter_mut()).enumerate() {
                let closed = phase1_closed_form(n as u32, &start)?;
                *s = closed.estimate();
                *e = closed.elapsed;
            }
            while elapsed.last().is_some_and(|&e| e > input.outage) {
                elapsed.pop();
                states.pop();
                gaps.pop();
            }
        }
        Ok(Self { gaps, states, elapsed })
    }

    fn feasible_count(&self) -> usize {
        self.states.len()
    }

    fn eval(&self, n: usize, input: &SchedulerInput) -> Result<SplitEval, ScheduleError> {
        if n >= input.total_acks || n >= self.feasible_count() {
            let elapsed = self.elapsed.get(n).copied().unwrap_or(f64::INFINITY);
            return Err(ScheduleError::InfeasibleSplit {
                split: n,
                elapsed,
                outage: input.outage,
                total: input.total_acks,
            });
        }
        let remaining = input.total_acks - n;
        let theta = (input.outage - self.elapsed[n]) / remaining as f64;
        let at_split = self.states[n];
        let final_estimate = phase2_closed_form(remaining as u32, theta, &at_split)?;
        Ok(SplitEval {
            split: n,
            phase_one_gaps: self.gaps[..n].to_vec(),
            elapsed: self.elapsed[n],
            theta,
            at_split,
            final_estimate,
        })
    }
}

/// Evaluates split `n`: phase-one trajectory, `theta`, and the final estimator
/// state after all `N` releases.
pub fn evaluate_split(n: usize, input: &SchedulerInput) -> Result<SplitEval, ScheduleError> {
    input.validate()?;
    let phase_one = PhaseOne::walk(input, (n + 1).min(input.total_acks))?;
    phase_one.eval(n, input)
}

/// `theta = (T - S(n)) / (N - n)`.
pub fn theta_for(n: usize, input: &SchedulerInput) -> Result<f64, ScheduleError> {
    evaluate_split(n, input).map(|e| e.theta)
}

/// RTO at the fixed host after all `N` releases when the split is `n`.
pub fn final_rto(n: usize, input: &SchedulerInput) -> Result<f64, ScheduleError> {
    evaluate_split(n, input).map(|e| e.final_rto())
}

/// Every split with `n < N` and `S(n) <= T`, in increasing `n`.
pub fn rto_curve(input: &SchedulerInput) -> Result<Vec<SplitEval>, ScheduleError> {
    input.validate()?;
    let phase_one = PhaseOne::walk(input, input.total_acks)?;
    (0..phase_one.feasible_count()).map(|n| phase_one.eval(n, input)).collect()
}

/// Forward scan over feasible splits: stop at the first `n` whose final RTO is
/// no larger than both neighbours (the left neighbour of `n = 0` is itself).
/// If the scan runs off the feasible range, the last feasible split is
/// returned.
pub fn forward_scan_split(input: &SchedulerInput) -> Result<usize, ScheduleError> {
    let curve = rto_curve(input)?;
    Ok(forward_scan(&curve.iter().map(SplitEval::final_rto).collect::<Vec<_>>()))
}

pub(crate) fn forward_scan(values: &[f64]) -> usize {
    let Some(&first) = values.first() else { return 0 };
    let (mut prev, mut cur) = (first, first);
    let mut n = 0;
    loop {
        let Some(&next) = values.get(n + 1) else { return n };
        if cur <= prev && cur <= next {
            return n;
        }
        n += 1;
        prev = cur;
        cur = next;
    }
}

/// Global argmin of the final RTO over feasible splits; ties go to the smaller
/// split.
pub fn exhaustive_split(input: &SchedulerInput) -> Result<usize, ScheduleError> {
    let curve = rto_curve(input)?;
    Ok(argmin(curve.iter().map(|e| (e.split, e.final_rto()))).unwrap_or(0))
}

fn argmin(values: impl IntoIterator<Item = (usize, f64)>) -> Option<usize> {
    values
        .into_iter()
        .fold(None, |best: Option<(usize, f64)>, (n, v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((n, v)),
        })
        .map(|(n, _)| n)
}

/// Split minimising the final RTO.
///
/// Runs the forward scan and cross-checks it against exhaustive search; when
/// the curve has more than one local minimum the two disagree, the
/// disagreement is logged, and the exhaustive answer wins.
pub fn optimal_split(input: &SchedulerInput) -> Result<usize, ScheduleError> {
    let curve = rto_curve(input)?;
    let values: Vec<f64> = curve.iter().map(SplitEval::final_rto).collect();
    let scanned = forward_scan(&values);
    let best = argmin(values.iter().copied().enumerate()).unwrap_or(0);
    if scanned != best {
        warn!(
            "forward scan stopped at n={scanned} (rto {:.6}) but global minimum is n={best} (rto {:.6}); \
             N={} T={} mu0={} sigma0={}",
            values[scanned], values[best], input.total_acks, input.outage, input.mu0, input.sigma0
        );
    }
    Ok(best)
}

/// One release replayed through the fixed host's estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplayStep {
    pub gap: f64,
    pub rto_before: f64,
    pub rto_after: f64,
}

/// Feeds `gaps` to the estimator as consecutive RTT samples.
pub fn replay(start: RttEstimate, gaps: &[f64]) -> Result<Vec<ReplayStep>, EstimatorError> {
    let mut state = start;
    gaps.iter()
        .map(|&gap| {
            let rto_before = state.rto();
            state = state.update(gap)?;
            Ok(ReplayStep { gap, rto_before, rto_after: state.rto() })
        })
        .collect()
}

/// Largest gap allowed after an estimator state with RTO `rto`.
pub fn guarded_limit(rto: f64, guard_fraction: f64) -> f64 {
    (1.0 - guard_fraction) * rto
}

fn violates(gap: f64, limit: f64) -> bool {
    gap > limit * (1.0 + REL_EPS)
}

/// One entry of a pacing schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledRelease {
    /// Index into the held ACKs the schedule was built for.
    pub ack_index: usize,
    pub duplicate: bool,
    /// Release time measured from the schedule origin.
    pub offset: f64,
    /// Time since the previous release (or the origin).
    pub gap: f64,
    /// Fixed host RTO just before this ACK arrives.
    pub rto_before: f64,
    /// Fixed host RTO after it takes this ACK's gap as an RTT sample.
    pub rto_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacingSchedule {
    pub split_n: usize,
    pub theta: f64,
    pub releases: Vec<ScheduledRelease>,
    /// `(ack index, number of duplicates)` for every ACK sent more than once.
    pub duplicated_acks: Vec<(usize, u8)>,
    pub predicted_final_rto: f64,
    pub covered_time: f64,
    /// The outage the schedule was asked to cover.
    pub outage: f64,
    /// Set when gaps had to be shortened below the nominal plan, so
    /// `covered_time < outage`.
    pub truncated: bool,
}

impl PacingSchedule {
    pub fn release_offsets(&self) -> Vec<f64> {
        self.releases.iter().map(|r| r.offset).collect()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.releases.iter().map(|r| r.gap).collect()
    }

    pub fn len(&self) -> usize {
        self.releases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.releases.is_empty()
    }
}

/// Builds the release schedule for `input`.
///
/// Among feasible splits, only those whose phase-one gaps strictly grow and
/// whose whole schedule stays inside the guarded timeout are admissible; the
/// admissible split with the lowest final RTO wins. If no split is admissible
/// with `N` ACKs, duplicates are added round-robin (at most
/// `max_duplicates_per_ack` per ACK) to raise `N` and shrink `theta`. If even
/// that fails, offending gaps are clamped to the guarded limit and the
/// schedule is flagged as truncated.
pub fn build_schedule(input: &SchedulerInput) -> Result<PacingSchedule, ScheduleError> {
    input.validate()?;
    let start = input.start_estimate()?;
    let phase_one = PhaseOne::walk(input, input.max_total())?;

    for total in input.total_acks..=input.max_total() {
        let widened = input.with_total(total);
        if let Some(plan) = best_admissible(&phase_one, &widened)? {
            let gaps = plan.nominal_gaps(total);
            let steps = replay(start, &gaps)?;
            return Ok(assemble(input, total, &plan, &steps, false));
        }
    }

    let mut fallback: Option<(f64, usize, SplitEval, Vec<ReplayStep>)> = None;
    for total in input.total_acks..=input.max_total() {
        let widened = input.with_total(total);
        let limit = phase_one.feasible_count().min(total);
        let candidates = (0..limit).map(|n| phase_one.eval(n, &widened)).collect::<Result<Vec<_>, _>>()?;
        let growing = candidates.iter().filter(|e| e.phase_one_grows() && e.theta > 0.0);
        let Some(n) = argmin(growing.map(|e| (e.split, e.final_rto()))) else {
            continue;
        };
        let plan = candidates.into_iter().nth(n).expect("split within candidates");
        let steps = clamped_replay(start, &plan.nominal_gaps(total), input.guard_fraction)?;
        let covered: f64 = steps.iter().map(|s| s.gap).sum();
        if fallback.as_ref().is_none_or(|(best, ..)| covered > *best) {
            fallback = Some((covered, total, plan, steps));
        }
    }
    let (_, total, plan, steps) = fallback
        .ok_or_else(|| ScheduleError::InvalidInput("no split with a positive phase-two interval exists".into()))?;
    let truncated = steps.iter().zip(plan.nominal_gaps(total)).any(|(s, g)| s.gap < g);
    Ok(assemble(input, total, &plan, &steps, truncated))
}

fn best_admissible(phase_one: &PhaseOne, input: &SchedulerInput) -> Result<Option<SplitEval>, ScheduleError> {
    let limit = phase_one.feasible_count().min(input.total_acks);
    let mut best: Option<SplitEval> = None;
    for n in 0..limit {
        let eval = phase_one.eval(n, input)?;
        if !(eval.theta > 0.0 && eval.phase_one_grows()) {
            continue;
        }
        if best.as_ref().is_some_and(|b| b.final_rto() <= eval.final_rto()) {
            continue;
        }
        if stays_inside_timeout(&eval, input)? {
            best = Some(eval);
        }
    }
    Ok(best)
}

fn stays_inside_timeout(eval: &SplitEval, input: &SchedulerInput) -> Result<bool, ScheduleError> {
    // Phase-one gaps sit exactly on the guarded limit by construction; only
    // phase two needs checking.
    let mut state = eval.at_split;
    for _ in eval.split..input.total_acks {
        if violates(eval.theta, guarded_limit(state.rto(), input.guard_fraction)) {
            return Ok(false);
        }
        state = state.update(eval.theta)?;
    }
    Ok(true)
}

fn clamped_replay(start: RttEstimate, gaps: &[f64], guard_fraction: f64) -> Result<Vec<ReplayStep>, EstimatorError> {
    let mut state = start;
    gaps.iter()
        .map(|&nominal| {
            let rto_before = state.rto();
            let limit = guarded_limit(rto_before, guard_fraction);
            let gap = if violates(nominal, limit) { limit } else { nominal };
            state = state.update(gap)?;
            Ok(ReplayStep { gap, rto_before, rto_after: state.rto() })
        })
        .collect()
}

fn duplicate_counts(originals: usize, total: usize) -> Vec<u8> {
    let extra = total - originals;
    (0..originals).map(|i| (extra / originals + usize::from(i < extra % originals)) as u8).collect()
}

fn assemble(
    input: &SchedulerInput,
    total: usize,
    plan: &SplitEval,
    steps: &[ReplayStep],
    truncated: bool,
) -> PacingSchedule {
    let counts = duplicate_counts(input.total_acks, total);
    let order = counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::once((i, false)).chain(std::iter::repeat_n((i, true), usize::from(c))));

    let mut offset = 0.0;
    let mut releases: Vec<ScheduledRelease> = order
        .zip(steps)
        .map(|((ack_index, duplicate), step)| {
            offset += step.gap;
            ScheduledRelease {
                ack_index,
                duplicate,
                offset,
                gap: step.gap,
                rto_before: step.rto_before,
                rto_after: step.rto_after,
            }
        })
        .collect();

    let covered_time = if truncated {
        offset
    } else {
        // theta is defined so the gaps sum to the outage; pin the last offset
        // to it rather than carrying the summation error.
        if let Some(last) = releases.last_mut() {
            last.offset = input.outage;
        }
        input.outage
    };

    let predicted_final_rto =
        if truncated { steps.last().map_or(plan.at_split.rto(), |s| s.rto_after) } else { plan.final_rto() };

    PacingSchedule {
        split_n: plan.split,
        theta: plan.theta,
        releases,
        duplicated_acks: counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i, c)).collect(),
        predicted_final_rto,
        covered_time,
        outage: input.outage,
        truncated,
    }
}

/// Origin of the pacing clock for the fixed host.
///
/// The fixed host restarted its retransmission timer when the last forwarded
/// ACK reached it, so release offsets are measured from the instant that ACK
/// left the base station. Both that ACK and every paced ACK cross the same
/// wired path, so the one-way delay cancels. If the last forward is already
/// more than one RTO in the past, the timer has fired and the clock restarts
/// at `now`.
pub fn pacing_origin(now: f64, last_forward: Option<f64>, rto0: f64) -> f64 {
    match last_forward {
        Some(t) if t <= now && now - t < rto0 => t,
        _ => now,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference_input(n: usize, t: f64) -> SchedulerInput {
        SchedulerInput::new(n, t, 1.0, 0.3).with_guard(0.0)
    }

    #[test]
    fn theta_examples() {
        assert_relative_eq!(theta_for(0, &reference_input(5, 2.0)).unwrap(), 0.4, max_relative = 1e-15);
        assert_relative_eq!(theta_for(2, &reference_input(20, 500.0)).unwrap(), (500.0 - 5.45) / 18.0, max_relative = 1e-12);
        assert!(matches!(theta_for(12, &reference_input(30, 1000.0)), Err(ScheduleError::InfeasibleSplit { split: 12, .. })));
        assert!(matches!(theta_for(5, &reference_input(5, 1e9)), Err(ScheduleError::InfeasibleSplit { .. })));
    }

    #[test]
    fn final_rto_without_deviation() {
        let input = SchedulerInput::new(10, 10.0 * 0.7, 0.7, 0.0).with_guard(0.0);
        assert_eq!(final_rto(0, &input).unwrap(), 0.7);
    }

    #[test]
    fn curve_feasibility_bound() {
        let curve = rto_curve(&reference_input(30, 1000.0)).unwrap();
        assert_eq!(curve.len(), 12);
        assert_relative_eq!(curve[11].elapsed, 886.938_673_973_083_5, max_relative = 1e-12);
    }

    #[test]
    fn forward_scan_ties_stop_early() {
        assert_eq!(forward_scan(&[3.0, 2.0, 2.0, 1.0]), 1);
        assert_eq!(forward_scan(&[1.0, 2.0]), 0);
        assert_eq!(forward_scan(&[3.0, 2.0, 1.0]), 2);
        assert_eq!(forward_scan(&[]), 0);
    }

    #[test]
    fn only_zero_split_when_outage_short() {
        let input = reference_input(5, 2.0);
        assert_eq!(optimal_split(&input).unwrap(), 0);
        assert_eq!(forward_scan_split(&input).unwrap(), 0);
    }

    #[test]
    fn short_outage_schedule() {
        let s = build_schedule(&SchedulerInput::new(5, 2.0, 1.0, 0.3)).unwrap();
        assert_eq!(s.split_n, 0);
        assert!(!s.truncated);
        let expected = [0.4, 0.8, 1.2, 1.6, 2.0];
        for (got, want) in s.release_offsets().iter().zip(expected) {
            assert_relative_eq!(*got, want, max_relative = 1e-12);
        }
        assert!(s.duplicated_acks.is_empty());
    }

    #[test]
    fn single_ack_held_to_the_edge() {
        let s = build_schedule(&SchedulerInput::new(1, 1.5, 1.0, 0.3)).unwrap();
        assert_eq!(s.release_offsets(), vec![1.5]);
    }

    #[test]
    fn duplicates_rescue_a_sparse_hold() {
        // theta = 1.0 would exceed 0.9 * RTO0 = 0.9; two ACKs per original fit.
        let s = build_schedule(&SchedulerInput::new(3, 3.0, 0.8, 0.05)).unwrap();
        assert!(!s.truncated);
        assert!(!s.duplicated_acks.is_empty());
        assert!(s.duplicated_acks.iter().all(|&(_, c)| c <= MAX_DUPLICATES_PER_ACK));
        assert_relative_eq!(s.covered_time, 3.0);
    }

    #[test]
    fn hopeless_input_is_truncated() {
        let s = build_schedule(&SchedulerInput::new(2, 100.0, 0.1, 0.0)).unwrap();
        assert!(s.truncated);
        assert!(s.covered_time < 100.0);
        for r in &s.releases {
            assert!(r.gap <= 0.9 * r.rto_before * (1.0 + 1e-12));
        }
    }

    #[test]
    fn duplicate_counts_are_round_robin() {
        assert_eq!(duplicate_counts(4, 4), vec![0, 0, 0, 0]);
        assert_eq!(duplicate_counts(4, 6), vec![1, 1, 0, 0]);
        assert_eq!(duplicate_counts(4, 12), vec![2, 2, 2, 2]);
    }

    #[test]
    fn origin_follows_last_forward() {
        assert_eq!(pacing_origin(10.0, Some(9.95), 0.2), 9.95);
        assert_eq!(pacing_origin(10.0, Some(9.0), 0.2), 10.0);
        assert_eq!(pacing_origin(10.0, None, 0.2), 10.0);
    }

    #[test]
    fn input_validation() {
        assert!(SchedulerInput::new(0, 1.0, 1.0, 0.1).validate().is_err());
        assert!(SchedulerInput::new(1, 0.0, 1.0, 0.1).validate().is_err());
        assert!(SchedulerInput::new(1, 1.0, 1.0, 0.1).with_duplicates(3).validate().is_err());
        assert!(SchedulerInput::new(1, 1.0, 1.0, 0.1).with_guard(1.0).validate().is_err());
        assert!(SchedulerInput::new(1, 1.0, 1.0, 0.1).with_rtts(-1.0, 0.0).validate().is_err());
    }
}
