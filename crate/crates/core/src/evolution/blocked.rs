//! Two-level block approximation.
//!
//! Each basis state is coupled only to its partner across the addressed spin
//! `k`; the generator splits into `2^{L-1}` independent 2×2 problems solved
//! in closed form. Couplings through all other spins are dropped, which is
//! accurate when the drive is far off resonance for them (`Δ ≪ δω`).

use num_complex::Complex64;

use crate::chain::{rotating_diagonals, ChainParams};
use crate::error::Result;
use crate::protocol::Pulse;

use super::StateVector;

/// Spin whose Larmor frequency is closest to `frequency`.
fn nearest_spin(frequency: f64, params: &ChainParams) -> usize {
    (0..params.length())
        .min_by(|&a, &b| {
            (frequency - params.larmor(a))
                .abs()
                .total_cmp(&(frequency - params.larmor(b)).abs())
        })
        .unwrap_or(0)
}

pub fn propagate_pulse_blocked(
    mut state: StateVector,
    pulse: &Pulse,
    params: &ChainParams,
) -> Result<StateVector> {
    state.check_params(params)?;
    let k = pulse
        .resonant_spin
        .filter(|&k| k < params.length())
        .unwrap_or_else(|| nearest_spin(pulse.frequency, params));
    let diag = rotating_diagonals(pulse.frequency, params)?;
    let mask = 1usize << k;
    let tau = pulse.duration;
    let rabi = pulse.rabi;

    for a in (0..state.dimension()).filter(|i| i & mask == 0) {
        let b = a | mask;
        let (da, db) = (diag[a], diag[b]);
        // H = m·1 + ½(δ σ_z - Ω σ_x)
        let m = 0.5 * (da + db);
        let delta = da - db;
        let lambda = delta.hypot(rabi);
        let (s, c) = (0.5 * lambda * tau).sin_cos();
        let (nz, nx) = if lambda > 0.0 {
            (delta / lambda, -rabi / lambda)
        } else {
            (0.0, 0.0)
        };
        let common = Complex64::from_polar(1.0, -m * tau);
        let i_s = Complex64::new(0.0, s);
        let u_aa = common * (c - i_s * nz);
        let u_bb = common * (c + i_s * nz);
        let u_ab = common * (-i_s * nx);
        let (xa, xb) = (state.amplitudes[a], state.amplitudes[b]);
        state.amplitudes[a] = u_aa * xa + u_ab * xb;
        state.amplitudes[b] = u_ab * xa + u_bb * xb;
    }
    state.time += tau;
    state.check_finite()?;
    Ok(state)
}
