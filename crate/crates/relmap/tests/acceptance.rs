//! Acceptance suite: every release criterion as one test, each printing a
//! pass line with the measured numbers (run with `-- --nocapture` to see
//! them on success).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relmap::chansim::{self, GilbertParams};
use relmap::trace::BinaryTrace;
use relmap::translate;
use relmap::{independent_app_availability, NetworkParams};

const GRID_PER: [f64; 5] = [1e-5, 1e-3, 0.03, 0.1, 0.3];
const GRID_TAU_DN: [f64; 5] = [1.0, 1.5, 2.0, 5.0, 20.0];
const GRID_N_SV: [u32; 4] = [0, 1, 3, 10];

fn feasible_grid() -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    for &per in &GRID_PER {
        for &tau_dn in &GRID_TAU_DN {
            if per < tau_dn / (1.0 + tau_dn) {
                grid.push((per, tau_dn));
            }
        }
    }
    grid
}

/// Criterion 1: the dense steady-state solve agrees with the closed forms
/// across the parameter grid, within 1e-10, in under five seconds.
#[test]
fn criterion_1_steady_state_oracle() {
    let start = Instant::now();
    let mut combinations = 0;
    for (per, tau_dn) in feasible_grid() {
        let params = NetworkParams::from_per_and_mean_down_time(per, tau_dn).unwrap();
        for &n_sv in &GRID_N_SV {
            let model = relmap::fsmc::FsmcModel::build(params, n_sv).unwrap();
            let pi = model.steady_state().unwrap();
            let closed_down = per * (1.0 - 1.0 / tau_dn).powi(n_sv as i32);
            let down_err = (pi.app_down() - closed_down).abs();
            let up_err = (pi.network_up() - (1.0 - per)).abs();
            assert!(
                down_err <= 1e-10,
                "p={per} tau={tau_dn} n_sv={n_sv}: |pi_D - closed| = {down_err:e}"
            );
            assert!(
                up_err <= 1e-10,
                "p={per} tau={tau_dn} n_sv={n_sv}: |pi_UN - (1-p)| = {up_err:e}"
            );
            combinations += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "criterion 1 PASS: {combinations} grid points, max error <= 1e-10, {:.2}s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: ten seeded replications of 1e7 cycles reproduce the
/// closed-form unavailability and reliability within 5% relative, in under
/// a minute.
#[test]
fn criterion_2_monte_carlo_matches_closed_forms() {
    let start = Instant::now();
    let params = NetworkParams::from_per_and_mean_down_time(0.01, 2.0).unwrap();
    let result = chansim::monte_carlo_validate(&params, 1, 10_000_000, 10, 20240001).unwrap();

    let unavail = 1.0 - result.mean_availability;
    let unavail_err = (unavail - 0.005).abs() / 0.005;
    assert!(
        unavail_err <= 0.05,
        "unavailability {unavail} vs 0.005 ({unavail_err:.4} relative)"
    );
    let reliability = result.mean_reliability_cycles.unwrap();
    let rel_err = (reliability - 398.0).abs() / 398.0;
    assert!(
        rel_err <= 0.05,
        "reliability {reliability} vs 398 ({rel_err:.4} relative)"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 2 PASS: unavailability {unavail:.6} (target 0.005 +/- 5%), reliability \
         {reliability:.1} cycles (target 398 +/- 5%), {:.2}s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 3: the independent-failure reduction at rare-event scale. The
/// long run uses 1e8 cycles at n_sv = 3 (expected unavailability 8.1e-7);
/// the smoke variant checks 1e7 cycles one tolerance level down, where the
/// expected unavailability is 2.7e-5.
#[test]
fn criterion_3_bernoulli_rare_event() {
    let start = Instant::now();

    let smoke = chansim::bernoulli(0.03, 10_000_000, 77, 1.0).unwrap();
    let smoke_unavail = 1.0 - smoke.app_metrics(2).app_availability;
    let smoke_expected = 2.7e-5;
    let smoke_err = (smoke_unavail - smoke_expected).abs() / smoke_expected;
    assert!(
        smoke_err <= 0.10,
        "smoke unavailability {smoke_unavail:e} vs {smoke_expected:e} ({smoke_err:.4} relative)"
    );

    let trace = chansim::bernoulli(0.03, 100_000_000, 4242, 1.0).unwrap();
    let unavail = 1.0 - trace.app_metrics(3).app_availability;
    let expected = 8.1e-7;
    let err = (unavail - expected).abs() / expected;
    assert!(
        err <= 0.25,
        "unavailability {unavail:e} vs {expected:e} ({err:.4} relative)"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "criterion 3 PASS: 1e8-cycle unavailability {unavail:.3e} (target 8.1e-7 +/- 25%), \
         smoke {smoke_unavail:.3e} (target 2.7e-5 +/- 10%), {:.2}s",
        elapsed.as_secs_f64()
    );
}

/// Criterion 4: calibrated survival-time ladder. With p = 0.03 and the mean
/// down time calibrated so that availability reaches 0.994 at n_sv = 3, the
/// calibrated value is about 2.41 cycles and the whole ladder for
/// n_sv = 0..3 matches to 5e-4 absolute.
#[test]
fn criterion_4_calibrated_availability_ladder() {
    let calibrated = translate::max_tau_dn_for_availability(0.994, 0.03, 3)
        .unwrap()
        .bound_value()
        .expect("calibration yields a bound");
    assert!(
        (calibrated - 2.41).abs() <= 0.005,
        "calibrated mean down time {calibrated} not near 2.41"
    );

    let params = NetworkParams::from_per_and_mean_down_time(0.03, calibrated).unwrap();
    let expected_ladder = [0.97, 0.98245, 0.98973, 0.99399];
    for (n_sv, expected) in expected_ladder.into_iter().enumerate() {
        let a = params.app_availability(n_sv as u32);
        assert!(
            (a - expected).abs() <= 5e-4,
            "n_sv={n_sv}: availability {a} vs {expected}"
        );
    }
    println!(
        "criterion 4 PASS: calibrated tau_dn {calibrated:.4} cycles, ladder {:?}",
        expected_ladder
    );
}

/// Criterion 5: the independent-failure approximation is strictly optimistic
/// for every feasible bursty channel with survival tolerance.
///
/// The ordering requires a channel at least as bursty as independence: the
/// burst continuation probability `1 - 1/tau_dn` must exceed `p`, i.e.
/// `tau_dn > 1/(1-p)`. Below that the channel recovers faster than an
/// independent one and the ordering reverses (checked separately).
#[test]
fn criterion_5_independence_strictly_optimistic() {
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    let mut checked = 0;
    while checked < 1000 {
        let per = rng.random_range(1e-6..0.3);
        let tau_dn = rng.random_range(1.0..20.0);
        let n_sv = rng.random_range(1u32..=5);
        if tau_dn <= 1.0 / (1.0 - per) || per >= tau_dn / (1.0 + tau_dn) {
            continue;
        }
        let params = NetworkParams::from_per_and_mean_down_time(per, tau_dn).unwrap();
        let bursty = params.app_availability(n_sv);
        let independent = independent_app_availability(per, n_sv);
        assert!(
            independent > bursty,
            "p={per} tau={tau_dn} n_sv={n_sv}: independent {independent} <= bursty {bursty}"
        );
        checked += 1;
    }
    println!("criterion 5 PASS: {checked} random bursty channels, independence always optimistic");
}

/// Boundary of criterion 5: when bursts are shorter than an independent
/// channel would produce (`tau_dn < 1/(1-p)`), the independent estimate is
/// pessimistic instead.
#[test]
fn criterion_5_boundary_reverses_for_anti_bursty_channels() {
    let mut rng = ChaCha8Rng::seed_from_u64(502);
    let mut checked = 0;
    while checked < 200 {
        let per = rng.random_range(0.05..0.3);
        let tau_dn = rng.random_range(1.0..(1.0 / (1.0 - per)));
        let n_sv = rng.random_range(1u32..=5);
        if tau_dn <= 1.0 || per >= tau_dn / (1.0 + tau_dn) {
            continue;
        }
        let params = NetworkParams::from_per_and_mean_down_time(per, tau_dn).unwrap();
        assert!(
            independent_app_availability(per, n_sv) < params.app_availability(n_sv),
            "p={per} tau={tau_dn} n_sv={n_sv}: expected reversal below the burstiness boundary"
        );
        checked += 1;
    }
}

/// Criterion 6: inversion round trip. The joint solve recovers the exact
/// parameters from forward-evaluated targets, and every single-variable
/// bound is tight under forward re-evaluation, all within 1e-9 relative.
#[test]
fn criterion_6_inversion_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let mut checked = 0;
    while checked < 1000 {
        let per = rng.random_range(1e-4..0.3);
        let tau_dn = rng.random_range(1.05..20.0);
        let n_sv = rng.random_range(0u32..=5);
        if per >= tau_dn / (1.0 + tau_dn) {
            continue;
        }
        let params = NetworkParams::from_per_and_mean_down_time(per, tau_dn).unwrap();
        let availability = params.app_availability(n_sv);
        let reliability = params.app_reliability(n_sv).finite().unwrap();

        let solved = translate::joint_solve(availability, reliability, n_sv).unwrap();
        assert!(
            (solved.per() - per).abs() <= 1e-9 * per,
            "per {} vs {per}",
            solved.per()
        );
        assert!(
            (solved.mean_down_time() - tau_dn).abs() <= 1e-9 * tau_dn,
            "tau {} vs {tau_dn}",
            solved.mean_down_time()
        );

        let p_bound = translate::max_per_for_availability(availability, tau_dn, n_sv)
            .unwrap()
            .bound_value()
            .expect("availability came from a feasible channel");
        let forward = NetworkParams::from_per_and_mean_down_time(p_bound, tau_dn)
            .unwrap()
            .app_availability(n_sv);
        assert!(
            (forward - availability).abs() <= 1e-9 * availability,
            "per-for-availability bound not tight: {forward} vs {availability}"
        );

        if n_sv >= 1 {
            let tau_bound = translate::max_tau_dn_for_availability(availability, per, n_sv)
                .unwrap()
                .bound_value()
                .expect("target strictly between 1-p and 1");
            let forward = NetworkParams::from_per_and_mean_down_time(per, tau_bound)
                .unwrap()
                .app_availability(n_sv);
            assert!(
                (forward - availability).abs() <= 1e-9 * availability,
                "tau-for-availability bound not tight: {forward} vs {availability}"
            );
        }

        let p_bound = translate::max_per_for_reliability(reliability, tau_dn, n_sv)
            .unwrap()
            .bound_value()
            .expect("reliability came from a feasible channel");
        let forward = NetworkParams::from_per_and_mean_down_time(p_bound, tau_dn)
            .unwrap()
            .app_reliability(n_sv)
            .finite()
            .unwrap();
        assert!(
            (forward - reliability).abs() <= 1e-9 * reliability,
            "per-for-reliability bound not tight: {forward} vs {reliability}"
        );

        checked += 1;
    }
    println!("criterion 6 PASS: {checked} random triples, round trip and bounds within 1e-9");
}

/// Reference survival filter: explicit state machine with a tolerance
/// counter, kept deliberately separate from the production code path.
fn reference_filter(bits: &[u8], n_sv: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(bits.len());
    let mut tolerance = n_sv;
    for &bit in bits {
        if bit == 1 {
            tolerance = n_sv;
            out.push(1);
        } else if tolerance > 0 {
            tolerance -= 1;
            out.push(1);
        } else {
            out.push(0);
        }
    }
    out
}

/// Criterion 7: the survival filter matches the brute-force reference on
/// 1e4 random traces at every tolerance in 0..=5, and shrinks the down-run
/// multiset exactly.
#[test]
fn criterion_7_survival_filter_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(701);
    let mut traces: Vec<Vec<u8>> = vec![
        vec![1],
        vec![0],
        vec![1, 0, 1],
        vec![0; 64],
        vec![1; 64],
        (0..64).map(|i| (i % 2) as u8).collect(),
    ];
    while traces.len() < 10_000 {
        let len = rng.random_range(1..=10_000usize);
        let loss = rng.random_range(0.02..0.98);
        traces.push((0..len).map(|_| u8::from(!rng.random_bool(loss))).collect());
    }

    for bits in &traces {
        let trace = BinaryTrace::new(bits.clone(), 1.0).unwrap();
        let original_down_runs = trace.run_stats().down_runs;
        for n_sv in 0..=5u32 {
            let filtered = trace.survival_filter(n_sv);
            assert_eq!(
                filtered.bits(),
                &reference_filter(bits, n_sv)[..],
                "filter mismatch at n_sv={n_sv}"
            );
            let expected: Vec<u64> = original_down_runs
                .iter()
                .filter(|&&k| k > n_sv as u64)
                .map(|&k| k - n_sv as u64)
                .collect();
            assert_eq!(
                filtered.run_stats().down_runs,
                expected,
                "down-run multiset mismatch at n_sv={n_sv}"
            );
        }
    }
    println!(
        "criterion 7 PASS: {} traces x 6 tolerance levels against the reference filter",
        traces.len()
    );
}

/// Criterion 8: zero-survival collapse identities across the grid of
/// criterion 1, within 1e-12 relative.
#[test]
fn criterion_8_collapse_identities() {
    for (per, tau_dn) in feasible_grid() {
        let params = NetworkParams::from_per_and_mean_down_time(per, tau_dn).unwrap();
        let availability = params.app_availability(0);
        let network = params.network_availability();
        assert!(
            (availability - network).abs() <= 1e-12 * network,
            "p={per} tau={tau_dn}: A(0) = {availability} vs 1-p = {network}"
        );
        let reliability = params.app_reliability(0).finite().unwrap();
        let mtbf = params.mean_up_time();
        assert!(
            (reliability - mtbf).abs() <= 1e-12 * mtbf,
            "p={per} tau={tau_dn}: R(0) = {reliability} vs tau_un = {mtbf}"
        );
    }
    println!("criterion 8 PASS: collapse identities hold to 1e-12 across the grid");
}

/// The bursty channel is strictly worse than the independent one in Monte
/// Carlo as well, at matched packet error ratio.
#[test]
fn bursty_simulation_below_independent_simulation() {
    let params = NetworkParams::from_per_and_mean_down_time(0.03, 2.0).unwrap();
    let bursty = chansim::monte_carlo_validate(&params, 1, 500_000, 4, 9).unwrap();
    let independent = chansim::monte_carlo_bernoulli(0.03, 1, 500_000, 4, 9).unwrap();
    assert!(
        bursty.mean_availability < independent.mean_availability,
        "bursty {} vs independent {}",
        bursty.mean_availability,
        independent.mean_availability
    );
    // Sanity: the channel mapping preserves the loss ratio.
    let channel = GilbertParams::from_network_params(&params);
    assert!((channel.loss_ratio() - 0.03).abs() <= 1e-12);
}
