//! Matrix-free propagators against dense diagonalization.

mod common;

use common::{max_amplitude_error, random_pulse, random_state, rng};
use rand::Rng;
use spinchain::evolution::{
    dense_oracle_propagate, frame_rejoin, propagate_pulse_blocked, propagate_pulse_exact,
    ExactOptions, Frame,
};
use spinchain::ChainParams;

#[test]
fn exact_matches_dense_on_random_pulses() {
    let mut r = rng(11);
    let opts = ExactOptions::default();
    for l in 2..=4 {
        for _ in 0..50 {
            let params =
                ChainParams::new(l, 1.0, r.gen_range(3.0..40.0), r.gen_range(-50.0..50.0)).unwrap();
            let pulse = random_pulse(&params, &mut r);
            let s = random_state(l, Frame::of(&pulse), &mut r);
            let a = propagate_pulse_exact(s.clone(), &pulse, &params, &opts).unwrap();
            let b = dense_oracle_propagate(s, &pulse, &params).unwrap();
            let err = max_amplitude_error(&a, &b);
            assert!(err < 1e-8, "L={l} {pulse:?}: {err:e}");
            assert_eq!(a.time, b.time);
        }
    }
}

#[test]
fn exact_matches_dense_across_frame_changes() {
    let mut r = rng(12);
    let params = ChainParams::new(4, 1.0, 12.0, 3.0).unwrap();
    let opts = ExactOptions::default();
    let first = random_pulse(&params, &mut r);
    let mut a = random_state(4, Frame::of(&first), &mut r);
    let mut b = a.clone();
    for i in 0..8 {
        let pulse = if i == 0 {
            first
        } else {
            random_pulse(&params, &mut r)
        };
        a = propagate_pulse_exact(frame_rejoin(a, &pulse), &pulse, &params, &opts).unwrap();
        b = dense_oracle_propagate(frame_rejoin(b, &pulse), &pulse, &params).unwrap();
    }
    assert!(max_amplitude_error(&a, &b) < 1e-8);
}

#[test]
fn blocked_is_exact_for_one_spin() {
    let mut r = rng(13);
    for _ in 0..20 {
        let params = ChainParams::new(1, 1.0, 1.0, r.gen_range(-10.0..10.0)).unwrap();
        let pulse = random_pulse(&params, &mut r);
        let s = random_state(1, Frame::of(&pulse), &mut r);
        let a = propagate_pulse_blocked(s.clone(), &pulse, &params).unwrap();
        let b = dense_oracle_propagate(s, &pulse, &params).unwrap();
        assert!(max_amplitude_error(&a, &b) < 1e-12);
    }
}

#[test]
fn tighter_tolerance_tightens_agreement() {
    let mut r = rng(14);
    let params = ChainParams::new(3, 1.0, 25.0, 0.0).unwrap();
    let pulse = random_pulse(&params, &mut r);
    let s = random_state(3, Frame::of(&pulse), &mut r);
    let dense = dense_oracle_propagate(s.clone(), &pulse, &params).unwrap();
    for tol in [1e-4, 1e-8, 1e-12] {
        let opts = ExactOptions {
            tol,
            ..ExactOptions::default()
        };
        let a = propagate_pulse_exact(s.clone(), &pulse, &params, &opts).unwrap();
        assert!(
            max_amplitude_error(&a, &dense) < tol.max(1e-11),
            "tol {tol:e}"
        );
    }
}
