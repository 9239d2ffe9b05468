//! Static description of an Ising-coupled spin chain in a field gradient.
//!
//! Units are angular frequencies with ħ = 1. Spin `k` has Larmor frequency
//! `ω_k = ω₀ + k·δω` and neighbouring spins interact through `-2J I^z_k I^z_{k+1}`
//! on an open chain. A basis state is an `L`-bit mask where bit `k` set means
//! spin `k` is in `|1⟩` (`σ_k = -1`).

use std::fmt;

use crate::error::{Error, Result};

/// Largest chain for which basis states fit into a `u64` mask.
pub const MAX_MASK_BITS: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    length: usize,
    coupling: f64,
    gradient: f64,
    omega0: f64,
}

impl ChainParams {
    pub fn new(length: usize, coupling: f64, gradient: f64, omega0: f64) -> Result<Self> {
        if length == 0 {
            return Err(Error::invalid("chain length must be at least 1"));
        }
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::invalid(format!(
                "coupling J must be positive, got {coupling}"
            )));
        }
        if !(gradient.is_finite() && gradient > 0.0) {
            return Err(Error::invalid(format!(
                "gradient δω must be positive, got {gradient}"
            )));
        }
        if !omega0.is_finite() {
            return Err(Error::invalid("base frequency ω₀ must be finite"));
        }
        Ok(ChainParams {
            length,
            coupling,
            gradient,
            omega0,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn gradient(&self) -> f64 {
        self.gradient
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn with_omega0(self, omega0: f64) -> Result<Self> {
        ChainParams::new(self.length, self.coupling, self.gradient, omega0)
    }

    pub fn with_gradient(self, gradient: f64) -> Result<Self> {
        ChainParams::new(self.length, self.coupling, gradient, self.omega0)
    }

    /// Larmor frequency of spin `k` (no range check).
    pub fn larmor(&self, k: usize) -> f64 {
        self.omega0 + k as f64 * self.gradient
    }

    /// `2J/δω`. The perturbative estimates assume this is small.
    pub fn validity_ratio(&self) -> f64 {
        2.0 * self.coupling / self.gradient
    }

    /// Hilbert-space dimension `2^L`; fails when the chain is too long for a mask.
    pub fn dimension(&self) -> Result<usize> {
        self.check_maskable()?;
        Ok(1usize << self.length)
    }

    pub(crate) fn check_maskable(&self) -> Result<()> {
        if self.length > MAX_MASK_BITS {
            return Err(Error::Unsupported(format!(
                "chain of {} spins does not fit a basis-state mask",
                self.length
            )));
        }
        Ok(())
    }

    fn check_spin(&self, k: usize) -> Result<()> {
        if k >= self.length {
            return Err(Error::invalid(format!(
                "spin index {k} out of range for chain of length {}",
                self.length
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BasisState(pub u64);

impl BasisState {
    pub const GROUND: BasisState = BasisState(0);

    /// Checked constructor: `bits < 2^length`.
    pub fn new(bits: u64, length: usize) -> Result<Self> {
        let state = BasisState(bits);
        state.check(length)?;
        Ok(state)
    }

    /// State with exactly the listed spins in `|1⟩`.
    pub fn from_spins(spins: &[usize]) -> Self {
        BasisState(spins.iter().fold(0u64, |acc, &k| acc | (1u64 << k)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn bit(self, k: usize) -> bool {
        (self.0 >> k) & 1 == 1
    }

    /// `σ_k = 1 - 2·bit_k`.
    pub fn sigma(self, k: usize) -> f64 {
        if self.bit(k) {
            -1.0
        } else {
            1.0
        }
    }

    pub fn toggled(self, k: usize) -> Self {
        BasisState(self.0 ^ (1u64 << k))
    }

    /// `S_p = Σ_k σ_k = L - 2·popcount(p)`.
    pub fn spin_sum(self, length: usize) -> f64 {
        length as f64 - 2.0 * self.0.count_ones() as f64
    }

    pub fn check(self, length: usize) -> Result<()> {
        if length > MAX_MASK_BITS || (self.0 >> length) != 0 {
            return Err(Error::invalid(format!(
                "basis state {:#b} out of range for chain of length {length}",
                self.0
            )));
        }
        Ok(())
    }

    /// Binary string with spin `L-1` first, as in `|1_{L-1} … 0_0⟩`.
    pub fn to_binary(self, length: usize) -> String {
        (0..length)
            .rev()
            .map(|k| if self.bit(k) { '1' } else { '0' })
            .collect()
    }

    pub fn from_binary(s: &str) -> Result<Self> {
        if s.is_empty() || s.len() > MAX_MASK_BITS {
            return Err(Error::invalid(format!(
                "bad basis-state string length {}",
                s.len()
            )));
        }
        let mut bits = 0u64;
        for c in s.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                other => return Err(Error::invalid(format!("bad basis-state digit {other:?}"))),
            }
        }
        Ok(BasisState(bits))
    }
}

impl fmt::Binary for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Binary::fmt(&self.0, f)
    }
}

/// Diagonal energy `E_p = -½ Σ ω_k σ_k - (J/2) Σ_{k<L-1} σ_k σ_{k+1}`.
pub fn energy(p: BasisState, params: &ChainParams) -> Result<f64> {
    p.check(params.length)?;
    Ok(energy_unchecked(p, params))
}

pub(crate) fn energy_unchecked(p: BasisState, params: &ChainParams) -> f64 {
    let l = params.length;
    let zeeman: f64 = (0..l).map(|k| params.larmor(k) * p.sigma(k)).sum();
    let ising: f64 = (0..l.saturating_sub(1))
        .map(|k| p.sigma(k) * p.sigma(k + 1))
        .sum();
    -0.5 * zeeman - 0.5 * params.coupling * ising
}

/// Energy needed to flip spin `k` from `|0⟩` to `|1⟩` with its neighbours
/// held as they are in `p`: `ω_k + J(σ_{k-1} + σ_{k+1})`, a missing neighbour
/// contributing zero.
///
/// The value is signed. Its magnitude equals `|E(p ⊕ k) - E(p)|`, and it is the
/// drive frequency that makes the flip exactly resonant in the rotating frame.
/// It is negative only when `ω_k` itself is below `2J`.
pub fn transition_frequency(p: BasisState, k: usize, params: &ChainParams) -> Result<f64> {
    p.check(params.length)?;
    params.check_spin(k)?;
    Ok(transition_frequency_unchecked(p, k, params))
}

pub(crate) fn transition_frequency_unchecked(p: BasisState, k: usize, params: &ChainParams) -> f64 {
    let left = if k > 0 { p.sigma(k - 1) } else { 0.0 };
    let right = if k + 1 < params.length {
        p.sigma(k + 1)
    } else {
        0.0
    };
    params.larmor(k) + params.coupling * (left + right)
}

/// The `L` states one spin flip away from `p`, in ascending spin order.
pub fn flip_neighbors(p: BasisState, length: usize) -> Result<Vec<BasisState>> {
    p.check(length)?;
    Ok((0..length).map(|k| p.toggled(k)).collect())
}

/// Rotating-frame diagonal `ℰ_p = E_p + (ν/2)·S_p`.
pub fn rotating_diagonal(p: BasisState, frequency: f64, params: &ChainParams) -> Result<f64> {
    p.check(params.length)?;
    Ok(rotating_diagonal_unchecked(p, frequency, params))
}

// Written as -½ Σ (ω_k - ν) σ_k - (J/2) Σ σσ so a large ω₀ cancels before summation.
pub(crate) fn rotating_diagonal_unchecked(
    p: BasisState,
    frequency: f64,
    params: &ChainParams,
) -> f64 {
    let l = params.length;
    let offset = params.omega0 - frequency;
    let zeeman: f64 = (0..l)
        .map(|k| (offset + k as f64 * params.gradient) * p.sigma(k))
        .sum();
    let ising: f64 = (0..l.saturating_sub(1))
        .map(|k| p.sigma(k) * p.sigma(k + 1))
        .sum();
    -0.5 * zeeman - 0.5 * params.coupling * ising
}

/// `ℰ_p` for every basis state, indexed by mask.
pub fn rotating_diagonals(frequency: f64, params: &ChainParams) -> Result<Vec<f64>> {
    let dim = params.dimension()?;
    Ok((0..dim as u64)
        .map(|bits| rotating_diagonal_unchecked(BasisState(bits), frequency, params))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(l: usize, j: f64, dw: f64, w0: f64) -> ChainParams {
        ChainParams::new(l, j, dw, w0).unwrap()
    }

    // independent evaluation straight from the spin sums
    fn brute_energy(bits: &[i32], w: &[f64], j: f64) -> f64 {
        let sig: Vec<f64> = bits.iter().map(|&b| 1.0 - 2.0 * b as f64).collect();
        let mut e = 0.0;
        for k in 0..sig.len() {
            e -= 0.5 * w[k] * sig[k];
        }
        for k in 0..sig.len() - 1 {
            e -= 0.5 * j * sig[k] * sig[k + 1];
        }
        e
    }

    #[test]
    fn energy_examples() {
        let (w0, dw, j) = (3.0, 7.0, 1.25);
        let p2 = params(2, j, dw, w0);
        let e = energy(BasisState(0), &p2).unwrap();
        assert!((e - (-(w0 + (w0 + dw)) / 2.0 - j / 2.0)).abs() < 1e-12);

        let p3 = params(3, j, dw, w0);
        let e = energy(BasisState(0), &p3).unwrap();
        assert!((e - (-(3.0 * w0 + 3.0 * dw) / 2.0 - j)).abs() < 1e-12);

        // |010⟩: bit 1 set
        let e = energy(BasisState(0b010), &p3).unwrap();
        let w = [w0, w0 + dw, w0 + 2.0 * dw];
        let brute = brute_energy(&[0, 1, 0], &w, j);
        assert!((e - brute).abs() < 1e-12);
        assert!((e - (-(w0 + (w0 + 2.0 * dw)) / 2.0 + (w0 + dw) / 2.0 + j)).abs() < 1e-12);
    }

    #[test]
    fn energy_rejects_out_of_range_state() {
        let p = params(3, 1.0, 10.0, 0.0);
        assert!(matches!(
            energy(BasisState(8), &p),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn transition_frequency_examples() {
        let p = params(6, 1.0, 100.0, 5.0);
        assert_eq!(
            transition_frequency(BasisState(0), 3, &p).unwrap(),
            p.larmor(3) + 2.0
        );
        assert_eq!(
            transition_frequency(BasisState(0), 5, &p).unwrap(),
            p.larmor(5) + 1.0
        );

        // L=4, |1100⟩, k=1: neighbours spin 2 (σ=-1) and spin 0 (σ=+1)
        let p4 = params(4, 1.0, 100.0, 5.0);
        let s = BasisState::from_binary("1100").unwrap();
        let f = transition_frequency(s, 1, &p4).unwrap();
        assert_eq!(f, p4.larmor(1));
        let de = energy(s.toggled(1), &p4).unwrap() - energy(s, &p4).unwrap();
        assert!((de.abs() - f).abs() < 1e-12);

        assert!(transition_frequency(BasisState(0), 4, &p4).is_err());
    }

    #[test]
    fn flip_neighbor_examples() {
        assert_eq!(
            flip_neighbors(BasisState(0), 2).unwrap(),
            vec![BasisState(0b01), BasisState(0b10)]
        );
        assert_eq!(
            flip_neighbors(BasisState(0b010), 3).unwrap(),
            vec![BasisState(0b011), BasisState(0b000), BasisState(0b110)]
        );
    }

    #[test]
    fn single_spin_resonance_is_degenerate() {
        let w0 = 4.5;
        let p = params(1, 1.0, 1.0, w0);
        assert_eq!(rotating_diagonal(BasisState(0), w0, &p).unwrap(), 0.0);
        assert_eq!(rotating_diagonal(BasisState(1), w0, &p).unwrap(), 0.0);
    }

    #[test]
    fn binary_strings() {
        let s = BasisState::from_binary("1000000001").unwrap();
        assert_eq!(s, BasisState::from_spins(&[9, 0]));
        assert_eq!(s.to_binary(10), "1000000001");
        assert!(BasisState::from_binary("10x").is_err());
        assert!(BasisState::from_binary("").is_err());
    }

    proptest! {
        #[test]
        fn energy_difference_matches_transition_frequency(
            l in 1usize..12, bits in any::<u64>(), k in 0usize..12,
            j in 0.1f64..3.0, dw in 0.5f64..500.0, w0 in -1e3f64..1e5,
        ) {
            let k = k % l;
            let p = params(l, j, dw, w0);
            let s = BasisState(bits & ((1u64 << l) - 1));
            let e0 = energy(s, &p).unwrap();
            let e1 = energy(s.toggled(k), &p).unwrap();
            let f = transition_frequency(s, k, &p).unwrap();
            let scale = e0.abs().max(e1.abs()).max(1.0);
            prop_assert!(((e1 - e0).abs() - f.abs()).abs() <= 1e-12 * scale);
        }

        #[test]
        fn flips_are_hamming_one_involutions(l in 1usize..16, bits in any::<u64>()) {
            let s = BasisState(bits & ((1u64 << l) - 1));
            for n in flip_neighbors(s, l).unwrap() {
                prop_assert_eq!((n.0 ^ s.0).count_ones(), 1);
                prop_assert!(flip_neighbors(n, l).unwrap().contains(&s));
                let ds = n.spin_sum(l) - s.spin_sum(l);
                prop_assert!(ds == 2.0 || ds == -2.0);
            }
            prop_assert_eq!(s.spin_sum(l), l as f64 - 2.0 * s.0.count_ones() as f64);
        }

        #[test]
        fn resonant_pair_has_equal_rotating_diagonals(
            l in 1usize..10, bits in any::<u64>(), k in 0usize..10,
            dw in 1.0f64..300.0, w0 in -50.0f64..1e4,
        ) {
            let k = k % l;
            let p = params(l, 1.0, dw, w0);
            let s = BasisState(bits & ((1u64 << l) - 1));
            // orient the pair so the drive frequency is the 0→1 cost of spin k
            let lower = BasisState(s.0 & !(1u64 << k));
            let nu = transition_frequency(lower, k, &p).unwrap();
            let a = rotating_diagonal(lower, nu, &p).unwrap();
            let b = rotating_diagonal(lower.toggled(k), nu, &p).unwrap();
            let scale = a.abs().max(nu.abs()).max(1.0);
            prop_assert!((a - b).abs() <= 1e-11 * scale);
        }

        #[test]
        fn omega0_shift_covariance(
            l in 1usize..10, bits in any::<u64>(), k in 0usize..10, c in -1e3f64..1e4, nu in -100.0f64..1000.0,
        ) {
            let k = k % l;
            let base = params(l, 1.0, 50.0, 10.0);
            let shifted = base.with_omega0(10.0 + c).unwrap();
            let s = BasisState(bits & ((1u64 << l) - 1));
            let e0 = energy(s, &base).unwrap();
            let e1 = energy(s, &shifted).unwrap();
            prop_assert!((e1 - (e0 - c * s.spin_sum(l) / 2.0)).abs() <= 1e-9 * (1.0 + e1.abs()));

            let t = s.toggled(k);
            let d0 = rotating_diagonal(s, nu, &base).unwrap() - rotating_diagonal(t, nu, &base).unwrap();
            let d1 = rotating_diagonal(s, nu + c, &shifted).unwrap()
                - rotating_diagonal(t, nu + c, &shifted).unwrap();
            prop_assert!((d0 - d1).abs() <= 1e-8 * (1.0 + c.abs()));
        }
    }
}
