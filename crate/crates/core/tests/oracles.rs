//! Regression values fixed by independent dense-grid evaluations of the
//! closed-form distinguishability curves, plus closed-form cross-checks.

use std::f64::consts::PI;

use mixchan::channels::{dilate, mix, ChannelFamily, MixtureSpec};
use mixchan::distinguish::HelstromEnsemble;
use mixchan::nonmarkov::{
    distinguishability_series, increment_measure, kink_aware_grid, nm_measure, nm_measure_optimized, SearchConfig,
    TimeGrid,
};
use mixchan::qmath::QState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Worked mixture on `[0, 12]`: sum of the three revivals of
/// `e^{-t/3}|cos(πt/4)|`, evaluated on 1e-4 and 1e-5 grids.
const WORKED_MEASURE_T12: f64 = 0.383543026362641;
/// Same quantity on `[0, 6]`: a single revival, peak value at t ≈ 3.48896.
const WORKED_MEASURE_T6: f64 = 0.2877118078;
/// Random-unitary mixture `λ = (2π, 0)`: one unit revival per period.
const RANDOM_UNITARY_MEASURE_T12: f64 = 12.0;

fn dephasing_pair(g: (f64, f64), l: (f64, f64), q1: f64) -> MixtureSpec {
    MixtureSpec::new(
        vec![q1, 1.0 - q1],
        vec![
            ChannelFamily::dephasing(g.0, l.0).unwrap(),
            ChannelFamily::dephasing(g.1, l.1).unwrap(),
        ],
    )
    .unwrap()
}

fn y_pair() -> HelstromEnsemble {
    HelstromEnsemble::equal(
        QState::from_bloch([0.0, 1.0, 0.0]).unwrap(),
        QState::from_bloch([0.0, -1.0, 0.0]).unwrap(),
    )
    .unwrap()
}

fn x_pair() -> HelstromEnsemble {
    HelstromEnsemble::equal(
        QState::from_bloch([1.0, 0.0, 0.0]).unwrap(),
        QState::from_bloch([-1.0, 0.0, 0.0]).unwrap(),
    )
    .unwrap()
}

/// `|k(t)|` for `k(t) = q1 e^{-(γ1+iλ1)t} + q2 e^{-(γ2+iλ2)t}`.
fn coherence_modulus(g1: f64, g2: f64, l1: f64, l2: f64, q1: f64, t: f64) -> f64 {
    let q2 = 1.0 - q1;
    let a = q1 * q1 * (-2.0 * g1 * t).exp();
    let b = q2 * q2 * (-2.0 * g2 * t).exp();
    let c = 2.0 * q1 * q2 * (-(g1 + g2) * t).exp() * ((l1 - l2) * t).cos();
    (a + b + c).max(0.0).sqrt()
}

#[test]
fn worked_measure_matches_frozen_oracle() {
    let spec = dephasing_pair((1.0 / 3.0, 1.0 / 3.0), (PI / 2.0, 0.0), 0.5);
    let phi = mix(&spec);
    let g12 = kink_aware_grid(&spec, &TimeGrid::uniform(0.0, 12.0, 1e-3).unwrap());
    let est = nm_measure(&phi, &y_pair(), &g12).unwrap();
    assert!((est.value - WORKED_MEASURE_T12).abs() < 1e-8, "{}", est.value);
    assert_eq!(est.positive_intervals.len(), 3);
    let g6 = kink_aware_grid(&spec, &TimeGrid::uniform(0.0, 6.0, 1e-3).unwrap());
    let est = nm_measure(&phi, &y_pair(), &g6).unwrap();
    assert!((est.value - WORKED_MEASURE_T6).abs() < 1e-8);
}

#[test]
fn random_unitary_measure_matches_frozen_oracle() {
    let spec = dephasing_pair((0.0, 0.0), (2.0 * PI, 0.0), 0.5);
    let g = kink_aware_grid(&spec, &TimeGrid::uniform(0.0, 12.0, 1e-3).unwrap());
    let est = nm_measure(&mix(&spec), &x_pair(), &g).unwrap();
    assert!((est.value - RANDOM_UNITARY_MEASURE_T12).abs() < 1e-9, "{}", est.value);
}

#[test]
fn equatorial_distinguishability_matches_radical_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..20 {
        let (g1, g2) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let (l1, l2) = (rng.gen_range(-2.0 * PI..2.0 * PI), rng.gen_range(-2.0 * PI..2.0 * PI));
        let q1 = rng.gen_range(0.0..1.0);
        let phi = mix(&dephasing_pair((g1, g2), (l1, l2), q1));
        let times: Vec<f64> = {
            let mut v: Vec<f64> = (0..50).map(|_| rng.gen_range(0.0..10.0)).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let grid = TimeGrid::new(times).unwrap();
        let d = distinguishability_series(&phi, &y_pair(), &grid).unwrap();
        for (t, v) in grid.points().iter().zip(&d) {
            assert!((v - coherence_modulus(g1, g2, l1, l2, q1, *t)).abs() < 1e-10);
        }
    }
}

#[test]
fn measure_is_stable_under_grid_refinement() {
    let scenarios = [
        dephasing_pair((1.0 / 3.0, 1.0 / 3.0), (PI / 2.0, 0.0), 0.5),
        dephasing_pair((0.0, 0.0), (2.0 * PI, 0.0), 0.5),
        dephasing_pair((0.1, 0.3), (2.0 * PI, 0.0), 0.5),
    ];
    for spec in &scenarios {
        let coarse = kink_aware_grid(spec, &TimeGrid::uniform(0.0, 12.0, 2e-3).unwrap());
        let fine = kink_aware_grid(spec, &TimeGrid::uniform(0.0, 12.0, 1e-3).unwrap());
        let phi = mix(spec);
        let a = nm_measure(&phi, &y_pair(), &coarse).unwrap().value;
        let b = nm_measure(&phi, &y_pair(), &fine).unwrap().value;
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }
}

#[test]
fn increment_sum_agrees_with_trapezoid_of_positive_rate() {
    let spec = dephasing_pair((1.0 / 3.0, 1.0 / 3.0), (PI / 2.0, 0.0), 0.5);
    let g = kink_aware_grid(&spec, &TimeGrid::uniform(0.0, 12.0, 1e-3).unwrap());
    let d = distinguishability_series(&mix(&spec), &y_pair(), &g).unwrap();
    let sigma = mixchan::nonmarkov::finite_difference(&g, &d).unwrap();
    let t = g.points();
    let trapezoid: f64 = (0..t.len() - 1)
        .map(|k| 0.5 * (t[k + 1] - t[k]) * (sigma[k].max(0.0) + sigma[k + 1].max(0.0)))
        .sum();
    let (value, _) = increment_measure(&g, &d);
    let variation: f64 = d.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    assert!((trapezoid - value).abs() <= 2.0 * g.max_step() * variation);
}

#[test]
fn markovian_dilation_series_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let g = TimeGrid::uniform(0.0, 8.0, 1e-2).unwrap();
    for _ in 0..10 {
        let spec = dephasing_pair(
            (rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0)),
            (rng.gen_range(-7.0..7.0), rng.gen_range(-7.0..7.0)),
            rng.gen_range(0.0..1.0),
        );
        let d = distinguishability_series(&dilate(&spec), &y_pair(), &g).unwrap();
        assert!(d.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    }
}

#[test]
fn optimizer_reaches_the_reference_pair_on_all_built_in_scenarios() {
    let scenarios = [
        dephasing_pair((1.0 / 3.0, 1.0 / 3.0), (PI / 2.0, 0.0), 0.5),
        dephasing_pair((0.0, 0.0), (2.0 * PI, 0.0), 0.5),
        dephasing_pair((0.1, 0.3), (2.0 * PI, 0.0), 0.5),
    ];
    for spec in &scenarios {
        let g = kink_aware_grid(spec, &TimeGrid::uniform(0.0, 12.0, 1e-2).unwrap());
        let phi = mix(spec);
        let reference = nm_measure(&phi, &y_pair(), &g).unwrap().value;
        let est = nm_measure_optimized(&phi, &g, &SearchConfig::default()).unwrap();
        assert!(est.value >= reference - 1e-9);
        let summary = est.search.unwrap();
        let u = summary.unrestricted_value.unwrap();
        assert!((u - summary.restricted_value).abs() <= 1e-6 * summary.restricted_value);
    }
}
