//! Experiment runner: unwanted-state probability, parameter sweeps over the
//! gradient or the Rabi frequency, and CSV output of the results.

mod csv;
mod sweep;

pub use self::csv::{emit_csv, plot_script, write_csv, CSV_HEADER};
pub use self::sweep::{
    evaluate_point, sweep, sweep_gradient, sweep_rabi, Grid, MethodSet, RabiSetting, ResultRow,
    Spacing, SweepSpec, SweepVariable,
};

use std::f64::consts::PI;

use crate::chain::BasisState;
use crate::error::{Error, Result};
use crate::evolution::StateVector;
use crate::perturbation::{epsilon, gate_success_estimate, ErrorBudget};

/// The two states the remote CONTROL-NOT is meant to produce: `|0…0⟩` and
/// `|10…01⟩`.
pub fn wanted_states(length: usize) -> [BasisState; 2] {
    [BasisState::GROUND, BasisState::from_spins(&[length - 1, 0])]
}

/// Total population outside the wanted pair.
///
/// Computed as the sum of the unwanted populations, which equals
/// `1 - |A_0|² - |A_{10…01}|²` for a normalized state and cannot go negative.
pub fn unwanted_probability(state: &StateVector, length: usize) -> Result<f64> {
    if state.length() != length || length < 2 {
        return Err(Error::invalid(format!(
            "state has {} spins, expected {length}",
            state.length()
        )));
    }
    let deviation = (state.norm_sqr() - 1.0).abs();
    if deviation > 1e-6 {
        return Err(Error::Integrity { deviation });
    }
    let [a, b] = wanted_states(length);
    let p: f64 = state
        .amplitudes
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != a.index() && i != b.index())
        .map(|(_, amp)| amp.norm_sqr())
        .sum();
    Ok(p.min(1.0))
}

/// Near-resonant error probability of one π pulse detuned by `2J`.
pub fn protocol_epsilon(rabi: f64, coupling: f64) -> f64 {
    epsilon(rabi, 2.0 * coupling, PI / rabi)
}

/// Analytic error budget for a chain of any length. Never builds a state vector.
pub fn estimate_large_chain(
    length: usize,
    rabi: f64,
    gradient: f64,
    coupling: f64,
) -> Result<ErrorBudget> {
    gate_success_estimate(
        length,
        rabi,
        gradient,
        coupling,
        protocol_epsilon(rabi, coupling),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Frame;
    use num_complex::Complex64;

    #[test]
    fn unwanted_examples() {
        let l = 10;
        let ground = StateVector::basis(l, BasisState::GROUND, Frame::default()).unwrap();
        assert_eq!(unwanted_probability(&ground, l).unwrap(), 0.0);

        let mut bell = ground.clone();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        bell.amplitudes[0] = Complex64::new(r, 0.0);
        bell.amplitudes[BasisState::from_spins(&[9, 0]).index()] = Complex64::new(0.0, r);
        assert!(unwanted_probability(&bell, l).unwrap() < 1e-15);

        let wrong = StateVector::basis(
            l,
            BasisState::from_binary("0100000000").unwrap(),
            Frame::default(),
        )
        .unwrap();
        assert_eq!(unwanted_probability(&wrong, l).unwrap(), 1.0);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let mut s = StateVector::basis(3, BasisState::GROUND, Frame::default()).unwrap();
        s.amplitudes[1] = Complex64::new(0.01, 0.0);
        assert!(matches!(
            unwanted_probability(&s, 3),
            Err(Error::Integrity { .. })
        ));
    }

    #[test]
    fn large_chain_matches_direct_estimate_at_l10() {
        let omega = 0.15;
        let a = estimate_large_chain(10, omega, 100.0, 1.0).unwrap();
        let b = gate_success_estimate(10, omega, 100.0, 1.0, protocol_epsilon(omega, 1.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unwanted_grows_with_length() {
        let omega = 0.13;
        let mut last = 0.0;
        for l in [4, 5, 8, 20, 100, 400] {
            let p = estimate_large_chain(l, omega, 100.0, 1.0)
                .unwrap()
                .p_unwanted;
            assert!(p > last, "L={l}");
            last = p;
        }
    }
}
