use ackhold_core::rto::{phase1_closed_form, phase2_closed_form, phase2_final_rto, RttEstimate};
use proptest::prelude::*;

/// Plain Jacobson/Karels step, written out independently of the library.
fn step(mu: f64, sigma: f64, x: f64) -> (f64, f64) {
    let d = x - mu;
    (mu + d / 8.0, sigma + (d.abs() - sigma) / 4.0)
}

fn rto(mu: f64, sigma: f64) -> f64 {
    mu + 4.0 * sigma
}

/// Feeds `x_i = RTO_{i-1}` for `n` steps; returns `(mu, sigma, elapsed)`.
fn iterate_phase1(mu0: f64, sigma0: f64, n: u32) -> (f64, f64, f64) {
    let (mut mu, mut sigma, mut elapsed) = (mu0, sigma0, 0.0);
    for _ in 0..n {
        let x = rto(mu, sigma);
        elapsed += x;
        (mu, sigma) = step(mu, sigma, x);
    }
    (mu, sigma, elapsed)
}

fn iterate_phase2(mu0: f64, sigma0: f64, theta: f64, k: u32) -> (f64, f64) {
    (0..k).fold((mu0, sigma0), |(mu, sigma), _| step(mu, sigma, theta))
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

#[test]
fn phase1_matches_iteration_on_grid() {
    for mu0 in [0.05, 0.2, 1.0, 3.0, 10.0] {
        for sigma0 in [0.0, 0.01, 0.3, 1.0, 4.0] {
            let start = RttEstimate::new(mu0, sigma0).unwrap();
            for n in 0..=50 {
                let (mu, sigma, elapsed) = iterate_phase1(mu0, sigma0, n);
                let closed = phase1_closed_form(n, &start).unwrap();
                assert!(rel(closed.mu_n, mu) <= 1e-9, "mu n={n} mu0={mu0} sigma0={sigma0}");
                assert!(rel(closed.sigma_n, sigma) <= 1e-9, "sigma n={n}");
                assert!(rel(closed.rto_n, rto(mu, sigma)) <= 1e-9, "rto n={n}");
                assert!(rel(closed.elapsed, elapsed) <= 1e-9, "elapsed n={n}");
            }
        }
    }
}

#[test]
fn phase2_matches_iteration_on_grid() {
    for mu0 in [0.05, 0.2, 1.0, 3.0, 10.0] {
        for sigma0 in [0.0, 0.01, 0.3, 1.0, 4.0] {
            for theta in [0.0, 0.1, 1.0, 25.0] {
                let start = RttEstimate::new(mu0, sigma0).unwrap();
                for k in 0..=200 {
                    let (mu, sigma) = iterate_phase2(mu0, sigma0, theta, k);
                    let closed = phase2_closed_form(k, theta, &start).unwrap();
                    assert!(rel(closed.mu(), mu) <= 1e-9, "mu k={k} theta={theta}");
                    // sigma decays toward zero when theta == mu0; compare on
                    // the RTO scale there.
                    assert!(
                        rel(closed.sigma(), sigma) <= 1e-9 || (closed.sigma() - sigma).abs() <= 1e-9 * rto(mu, sigma),
                        "sigma k={k} theta={theta}"
                    );
                    assert!(rel(closed.rto(), rto(mu, sigma)) <= 1e-9, "rto k={k}");
                    let four = phase2_final_rto(k, theta, &start).unwrap();
                    assert!(rel(four, rto(mu, sigma)) <= 1e-9, "four-term k={k}");
                }
            }
        }
    }
}

#[test]
fn second_release_coefficients() {
    for (mu0, sigma0) in [(1.0, 0.3), (0.0, 1.0), (2.0, 0.0), (0.5, 0.125)] {
        let start = RttEstimate::new(mu0, sigma0).unwrap();
        let p = phase1_closed_form(2, &start).unwrap();
        assert!(rel(p.rto_n, mu0 + 109.0 / 8.0 * sigma0) <= 1e-14);
        for n in 0..20 {
            let p = phase1_closed_form(n, &start).unwrap();
            assert!(rel(p.sigma_n, 1.75_f64.powi(n as i32) * sigma0) <= 1e-14);
        }
    }
    let p = phase1_closed_form(2, &RttEstimate::new(1.0, 0.3).unwrap()).unwrap();
    assert!((p.rto_n - 5.0875).abs() < 1e-12);
    assert!((p.elapsed - 5.45).abs() < 1e-12);
}

#[test]
fn elapsed_sums_for_long_phase_one() {
    let start = RttEstimate::new(1.0, 0.3).unwrap();
    let s11 = phase1_closed_form(11, &start).unwrap().elapsed;
    let s12 = phase1_closed_form(12, &start).unwrap().elapsed;
    assert!(rel(s11, iterate_phase1(1.0, 0.3, 11).2) <= 1e-12);
    assert!(s11 < 1000.0 && s12 > 1000.0);
}

proptest! {
    #[test]
    fn phase1_random(mu0 in 0.0..50.0f64, sigma0 in 0.0..10.0f64, n in 0u32..=50) {
        let start = RttEstimate::new(mu0, sigma0).unwrap();
        let closed = phase1_closed_form(n, &start).unwrap();
        let (mu, sigma, elapsed) = iterate_phase1(mu0, sigma0, n);
        prop_assert!(rel(closed.rto_n, rto(mu, sigma)) <= 1e-9);
        prop_assert!(rel(closed.elapsed, elapsed) <= 1e-9);
    }

    #[test]
    fn phase2_random(mu0 in 0.0..50.0f64, sigma0 in 0.0..10.0f64, theta in 0.0..100.0f64, k in 0u32..=200) {
        let start = RttEstimate::new(mu0, sigma0).unwrap();
        let closed = phase2_closed_form(k, theta, &start).unwrap();
        let (mu, sigma) = iterate_phase2(mu0, sigma0, theta, k);
        prop_assert!(rel(closed.rto(), rto(mu, sigma)) <= 1e-9);
        prop_assert!(rel(closed.mu(), mu) <= 1e-9);
    }

    #[test]
    fn library_update_agrees_with_oracle(mu in 0.0..10.0f64, sigma in 0.0..5.0f64, x in 0.0..20.0f64) {
        let next = RttEstimate::new(mu, sigma).unwrap().update(x).unwrap();
        let (m, s) = step(mu, sigma, x);
        prop_assert!(rel(next.mu(), m) <= 1e-15);
        prop_assert!(rel(next.sigma(), s) <= 1e-15);
    }
}
