//! Dense reference propagator for small chains.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chain::{rotating_diagonals, ChainParams};
use crate::error::{Error, Result};
use crate::protocol::Pulse;

use super::StateVector;

/// Longest chain the dense oracle accepts.
pub const DENSE_MAX_LENGTH: usize = 6;

/// Full `2^L × 2^L` rotating-frame generator of `pulse`.
pub fn dense_generator(pulse: &Pulse, params: &ChainParams) -> Result<DMatrix<Complex64>> {
    let l = params.length();
    if l > DENSE_MAX_LENGTH {
        return Err(Error::Unsupported(format!(
            "dense generator limited to {DENSE_MAX_LENGTH} spins, got {l}"
        )));
    }
    let diag = rotating_diagonals(pulse.frequency, params)?;
    let n = diag.len();
    let off = Complex64::new(-0.5 * pulse.rabi, 0.0);
    Ok(DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(diag[r], 0.0)
        } else if (r ^ c).count_ones() == 1 {
            off
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// `exp(-iHτ)ψ` by full Hermitian diagonalization of the dense generator.
pub fn dense_oracle_propagate(
    mut state: StateVector,
    pulse: &Pulse,
    params: &ChainParams,
) -> Result<StateVector> {
    state.check_params(params)?;
    let h = dense_generator(pulse, params)?;
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let psi = DVector::from_column_slice(&state.amplitudes);
    let mut coeffs = v.adjoint() * psi;
    for (c, &lambda) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c *= Complex64::from_polar(1.0, -lambda * pulse.duration);
    }
    let out = v * coeffs;
    state.amplitudes.copy_from_slice(out.as_slice());
    state.time += pulse.duration;
    state.check_finite()?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::BasisState;
    use crate::evolution::Frame;
    use std::f64::consts::PI;

    #[test]
    fn generator_is_hermitian() {
        let params = ChainParams::new(4, 1.0, 13.0, 5.0).unwrap();
        let pulse = Pulse::with_duration(0.7, 31.0, 0.4, 1.0, None).unwrap();
        let h = dense_generator(&pulse, &params).unwrap();
        assert_eq!(h, h.adjoint());
    }

    #[test]
    fn resonant_pi_flip() {
        let params = ChainParams::new(1, 1.0, 1.0, 3.0).unwrap();
        let pulse = Pulse::rotation(0.2, 3.0, 0.0, PI, Some(0)).unwrap();
        let s = StateVector::basis(1, BasisState(0), Frame::of(&pulse)).unwrap();
        let out = dense_oracle_propagate(s, &pulse, &params).unwrap();
        assert!((out.probability(BasisState(1)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refuses_large_chains() {
        let params = ChainParams::new(7, 1.0, 10.0, 0.0).unwrap();
        let pulse = Pulse::with_duration(0.1, 1.0, 0.0, 1.0, None).unwrap();
        let s = StateVector::basis(7, BasisState(0), Frame::of(&pulse)).unwrap();
        assert!(matches!(
            dense_oracle_propagate(s, &pulse, &params),
            Err(Error::Unsupported(_))
        ));
    }
}
