#![allow(dead_code)]

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use spinchain::evolution::{Frame, StateVector};
use spinchain::protocol::Pulse;
use spinchain::ChainParams;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Pulse with `Ω ∈ (0, J]`, `ν` within a few `J` of a random spin's Larmor
/// frequency and `τ` up to a few Rabi periods.
pub fn random_pulse(params: &ChainParams, rng: &mut StdRng) -> Pulse {
    let j = params.coupling();
    let rabi = j * (1.0 - rng.gen::<f64>());
    let spin = rng.gen_range(0..params.length());
    let frequency = params.larmor(spin) + rng.gen_range(-3.0..3.0) * j;
    let phase = rng.gen_range(-3.2..3.2);
    let duration = rng.gen_range(0.0..4.0) * std::f64::consts::PI / rabi;
    Pulse::with_duration(rabi, frequency, phase, duration, Some(spin)).unwrap()
}

pub fn random_state(length: usize, frame: Frame, rng: &mut StdRng) -> StateVector {
    let mut amps: Vec<Complex64> = (0..1usize << length)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(length, amps, frame, 0.0).unwrap()
}

pub fn max_amplitude_error(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
