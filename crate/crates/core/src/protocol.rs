//! Rectangular rf pulses and the remote CONTROL-NOT pulse train.
//!
//! The train entangles the two end spins of the chain starting from the
//! ground state: a π/2 pulse on spin `L-1` opens the superposition
//! `|0…0⟩ + i|10…0⟩`, and `2L-3` π pulses then carry the excited branch to
//! `|10…01⟩` while leaving `|0…0⟩` (ideally) untouched. Every π pulse is
//! exactly resonant with the excited branch and detuned by `2J` (one pulse:
//! `4J`) from the ground branch.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::chain::{transition_frequency_unchecked, BasisState, ChainParams};
use crate::error::{Error, Result};

/// Which branch of the superposition a pulse is tuned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Resonant with a transition out of the all-zero state.
    Ground,
    /// Resonant with the branch that starts as `|10…0⟩`.
    Excited,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub rabi: f64,
    pub frequency: f64,
    pub phase: f64,
    pub duration: f64,
    pub resonant_spin: Option<usize>,
    pub branch: Branch,
}

impl Pulse {
    /// A pulse rotating its resonant transition by `angle`, so `τ = angle/Ω`.
    pub fn rotation(
        rabi: f64,
        frequency: f64,
        phase: f64,
        angle: f64,
        resonant_spin: Option<usize>,
    ) -> Result<Self> {
        Pulse::with_duration(rabi, frequency, phase, angle / rabi, resonant_spin)
    }

    pub fn with_duration(
        rabi: f64,
        frequency: f64,
        phase: f64,
        duration: f64,
        resonant_spin: Option<usize>,
    ) -> Result<Self> {
        if !(rabi.is_finite() && rabi > 0.0) {
            return Err(Error::invalid(format!(
                "Rabi frequency must be positive, got {rabi}"
            )));
        }
        if !frequency.is_finite() || !phase.is_finite() {
            return Err(Error::invalid("pulse frequency and phase must be finite"));
        }
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::invalid(format!(
                "pulse duration must be non-negative, got {duration}"
            )));
        }
        Ok(Pulse {
            rabi,
            frequency,
            phase,
            duration,
            resonant_spin,
            branch: Branch::Excited,
        })
    }

    /// Rotation angle `Ω·τ` on an exactly resonant transition.
    pub fn nominal_angle(&self) -> f64 {
        self.rabi * self.duration
    }

    pub fn is_pi(&self) -> bool {
        (self.nominal_angle() - PI).abs() <= 1e-9 * PI
    }

    pub fn is_half_pi(&self) -> bool {
        (self.nominal_angle() - FRAC_PI_2).abs() <= 1e-9 * FRAC_PI_2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub params: ChainParams,
    pub pulses: Vec<Pulse>,
    /// Non-fatal validity warnings raised while building.
    pub warnings: Vec<String>,
}

impl PulseSequence {
    pub fn new(params: ChainParams, pulses: Vec<Pulse>) -> Self {
        PulseSequence {
            params,
            pulses,
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }

    /// Start time of every pulse; pulses abut with no free evolution in between.
    pub fn start_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.pulses
            .iter()
            .map(|p| {
                let start = t;
                t += p.duration;
                start
            })
            .collect()
    }

    /// Whitespace-separated table, one pulse per line, round-trippable via
    /// [`parse_table`].
    pub fn to_table(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# params length={} coupling={:e} gradient={:e} omega0={:e}",
            p.length(),
            p.coupling(),
            p.gradient(),
            p.omega0()
        );
        out.push_str("# index spin rabi frequency phase duration angle\n");
        for (i, pulse) in self.pulses.iter().enumerate() {
            let spin = pulse
                .resonant_spin
                .map_or_else(|| "-".to_string(), |k| k.to_string());
            let angle = if pulse.is_half_pi() {
                "pi/2".to_string()
            } else if pulse.is_pi() {
                "pi".to_string()
            } else {
                format!("{:e}", pulse.nominal_angle())
            };
            let _ = writeln!(
                out,
                "{} {} {:e} {:e} {:e} {:e} {}",
                i + 1,
                spin,
                pulse.rabi,
                pulse.frequency,
                pulse.phase,
                pulse.duration,
                angle
            );
        }
        out
    }
}

/// Parses the output of [`PulseSequence::to_table`].
pub fn parse_table(text: &str) -> Result<PulseSequence> {
    let mut params = None;
    let mut pulses = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(kv) = rest.strip_prefix("params") {
                params = Some(parse_params(kv, lineno)?);
            }
            continue;
        }
        let Some(params) = params.as_ref() else {
            return Err(Error::parse(lineno, "pulse line before params header"));
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(Error::parse(
                lineno,
                format!("expected 7 fields, found {}", fields.len()),
            ));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(lineno, "bad pulse index"))?;
        if index != pulses.len() + 1 {
            return Err(Error::parse(
                lineno,
                format!("pulse index {index} out of order"),
            ));
        }
        let spin = match fields[1] {
            "-" => None,
            s => {
                let k: usize = s
                    .parse()
                    .map_err(|_| Error::parse(lineno, "bad spin index"))?;
                if k >= params.length() {
                    return Err(Error::parse(lineno, format!("spin {k} outside chain")));
                }
                Some(k)
            }
        };
        let num = |i: usize, name: &str| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| Error::parse(lineno, format!("bad {name}")))
        };
        let rabi = num(2, "rabi")?;
        let frequency = num(3, "frequency")?;
        let phase = num(4, "phase")?;
        let duration = num(5, "duration")?;
        let mut pulse = Pulse::with_duration(rabi, frequency, phase, duration, spin)
            .map_err(|e| Error::parse(lineno, e.to_string()))?;
        let angle = match fields[6] {
            "pi/2" => FRAC_PI_2,
            "pi" => PI,
            s => s
                .parse::<f64>()
                .map_err(|_| Error::parse(lineno, "bad angle"))?,
        };
        if (pulse.nominal_angle() - angle).abs() > 1e-9 * angle.abs().max(1.0) {
            return Err(Error::parse(lineno, "angle disagrees with rabi × duration"));
        }
        pulse.branch = if pulse.is_half_pi() {
            Branch::Ground
        } else {
            Branch::Excited
        };
        pulses.push(pulse);
    }
    let params = params.ok_or_else(|| Error::parse(0, "missing params header"))?;
    Ok(PulseSequence::new(params, pulses))
}

fn parse_params(kv: &str, lineno: usize) -> Result<ChainParams> {
    let (mut length, mut coupling, mut gradient, mut omega0) = (None, None, None, None);
    for item in kv.split_whitespace() {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("expected key=value, got {item:?}")))?;
        let bad = || Error::parse(lineno, format!("bad value for {key}"));
        match key {
            "length" => length = Some(value.parse::<usize>().map_err(|_| bad())?),
            "coupling" => coupling = Some(value.parse::<f64>().map_err(|_| bad())?),
            "gradient" => gradient = Some(value.parse::<f64>().map_err(|_| bad())?),
            "omega0" => omega0 = Some(value.parse::<f64>().map_err(|_| bad())?),
            _ => return Err(Error::parse(lineno, format!("unknown key {key}"))),
        }
    }
    match (length, coupling, gradient, omega0) {
        (Some(l), Some(j), Some(g), Some(w)) => {
            ChainParams::new(l, j, g, w).map_err(|e| Error::parse(lineno, e.to_string()))
        }
        _ => Err(Error::parse(lineno, "params header missing a key")),
    }
}

/// Builds the `2L-2` pulse train taking `(|0…0⟩ + i|10…0⟩)/√2` to the
/// remote-entangled pair `|0…0⟩, |10…01⟩`, preceded by the π/2 pulse that
/// creates the superposition.
///
/// Frequencies are chosen by tracking the excited branch mask: each pulse is
/// tuned to the current 0↔1 transition of its target spin in that branch.
/// π pulses get `Ω_n = Ω·Δ_n/(2J)`, where `Δ_n` is their detuning from the
/// ground branch, so every near-resonant error probability is the same.
pub fn build_remote_cn_sequence(
    params: &ChainParams,
    rabi: f64,
    phase: f64,
) -> Result<PulseSequence> {
    let l = params.length();
    if l < 3 {
        return Err(Error::Unsupported(format!(
            "remote CONTROL-NOT needs at least 3 spins, got {l}"
        )));
    }
    params.check_maskable()?;
    if !(rabi.is_finite() && rabi > 0.0) {
        return Err(Error::invalid(format!(
            "Rabi frequency must be positive, got {rabi}"
        )));
    }
    let j = params.coupling();

    // spin order of the π pulses: L-2, then (k, k+1) for k = L-3 … 0
    let mut targets = vec![l - 2];
    for k in (0..l - 2).rev() {
        targets.push(k);
        targets.push(k + 1);
    }

    let mut branch = BasisState::from_spins(&[l - 1]);
    let first_freq = transition_frequency_unchecked(BasisState::GROUND, l - 1, params);
    let mut first = Pulse::rotation(rabi, first_freq, phase, FRAC_PI_2, Some(l - 1))?;
    first.branch = Branch::Ground;
    let mut pulses = vec![first];

    for k in targets {
        let frequency = transition_frequency_unchecked(branch, k, params);
        let ground_detuning =
            (transition_frequency_unchecked(BasisState::GROUND, k, params) - frequency).abs();
        let amplitude = rabi * ground_detuning / (2.0 * j);
        pulses.push(Pulse::rotation(amplitude, frequency, phase, PI, Some(k))?);
        branch = branch.toggled(k);
    }
    debug_assert_eq!(branch, BasisState::from_spins(&[l - 1, 0]));

    let mut seq = PulseSequence::new(*params, pulses);
    if rabi >= params.gradient() {
        seq.warnings.push(format!(
            "Rabi frequency {rabi:e} is not below the gradient {:e}; spins are not individually addressable",
            params.gradient()
        ));
    }
    Ok(seq)
}

/// Result of replaying a pulse train on one computational branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTrace {
    /// `(1-based pulse index, Δ_n)`.
    pub profile: Vec<(usize, f64)>,
    pub final_state: BasisState,
}

/// Replays the nominal action of `seq` on a single basis state.
///
/// For each pulse the detuning from the target spin's transition in the
/// current state is recorded. An exactly resonant π pulse toggles the spin;
/// detuned pulses leave the state alone. The π/2 pulse never toggles: it
/// splits the state and the trace follows the unflipped component.
pub fn trace_branch(seq: &PulseSequence, start: BasisState) -> Result<BranchTrace> {
    let params = &seq.params;
    start.check(params.length())?;
    let mut state = start;
    let mut profile = Vec::with_capacity(seq.len());
    for (i, pulse) in seq.pulses.iter().enumerate() {
        let k = pulse
            .resonant_spin
            .ok_or_else(|| Error::invalid(format!("pulse {} has no resonant spin", i + 1)))?;
        if k >= params.length() {
            return Err(Error::invalid(format!(
                "pulse {} targets spin {k} outside chain",
                i + 1
            )));
        }
        let detuning = (transition_frequency_unchecked(state, k, params) - pulse.frequency).abs();
        let resonant = detuning <= 1e-12 * pulse.frequency.abs().max(params.coupling());
        let detuning = if resonant { 0.0 } else { detuning };
        profile.push((i + 1, detuning));
        if resonant && pulse.is_pi() {
            state = state.toggled(k);
        }
    }
    Ok(BranchTrace {
        profile,
        final_state: state,
    })
}

pub fn detuning_profile(seq: &PulseSequence, start: BasisState) -> Result<Vec<(usize, f64)>> {
    trace_branch(seq, start).map(|t| t.profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::epsilon;

    fn chain(l: usize) -> ChainParams {
        ChainParams::new(l, 1.0, 100.0, 0.0).unwrap()
    }

    #[test]
    fn l10_has_eighteen_pulses_with_doubled_fourth() {
        let omega = 0.125;
        let seq = build_remote_cn_sequence(&chain(10), omega, 0.0).unwrap();
        assert_eq!(seq.len(), 18);
        assert!(seq.pulses[0].is_half_pi());
        assert_eq!(seq.pulses[0].rabi, omega);
        for (i, p) in seq.pulses.iter().enumerate().skip(1) {
            assert!(p.is_pi());
            let expect = if i == 3 { 2.0 * omega } else { omega };
            assert!((p.rabi - expect).abs() < 1e-15, "pulse {}", i + 1);
        }
        let profile = detuning_profile(&seq, BasisState::GROUND).unwrap();
        assert_eq!(profile[3], (4, 4.0));
    }

    #[test]
    fn resonant_spin_multiset() {
        let seq = build_remote_cn_sequence(&chain(10), 0.1, 0.0).unwrap();
        let mut counts = [0usize; 10];
        for p in &seq.pulses {
            counts[p.resonant_spin.unwrap()] += 1;
        }
        assert_eq!(counts, [1, 2, 2, 2, 2, 2, 2, 2, 2, 1]);
    }

    #[test]
    fn three_spin_hand_trace() {
        let seq = build_remote_cn_sequence(&chain(3), 0.2, 0.0).unwrap();
        let spins: Vec<usize> = seq
            .pulses
            .iter()
            .map(|p| p.resonant_spin.unwrap())
            .collect();
        assert_eq!(spins, vec![2, 1, 0, 1]);
        assert!(seq.pulses[0].is_half_pi());
        assert!(seq.pulses[1..].iter().all(Pulse::is_pi));

        let ground = detuning_profile(&seq, BasisState::GROUND).unwrap();
        let d: Vec<f64> = ground.iter().map(|x| x.1).collect();
        assert_eq!(d, vec![0.0, 2.0, 2.0, 4.0]);

        let excited = trace_branch(&seq, BasisState::from_spins(&[2])).unwrap();
        assert!(excited.profile.iter().all(|&(_, d)| d == 0.0));
        assert_eq!(excited.final_state, BasisState::from_binary("101").unwrap());
    }

    #[test]
    fn ground_profile_l10() {
        let seq = build_remote_cn_sequence(&chain(10), 0.1, 0.0).unwrap();
        let trace = trace_branch(&seq, BasisState::GROUND).unwrap();
        let mut expected = vec![0.0, 2.0, 2.0, 4.0];
        expected.extend(std::iter::repeat_n(2.0, 14));
        let got: Vec<f64> = trace.profile.iter().map(|x| x.1).collect();
        assert_eq!(got, expected);
        assert_eq!(trace.final_state, BasisState::GROUND);
    }

    #[test]
    fn epsilon_uniform_across_pi_pulses() {
        let params = ChainParams::new(10, 1.0, 100.0, 1234.5).unwrap();
        let seq = build_remote_cn_sequence(&params, 0.15, 0.0).unwrap();
        let profile = detuning_profile(&seq, BasisState::GROUND).unwrap();
        let eps: Vec<f64> = seq.pulses[1..]
            .iter()
            .zip(&profile[1..])
            .map(|(p, &(_, d))| epsilon(p.rabi, d, p.duration))
            .collect();
        for e in &eps {
            assert!((e - eps[0]).abs() <= 1e-12 * eps[0]);
        }
    }

    #[test]
    fn short_chains_rejected() {
        assert!(matches!(
            build_remote_cn_sequence(&chain(2), 0.1, 0.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn strong_drive_warns() {
        let params = ChainParams::new(4, 1.0, 0.5, 0.0).unwrap();
        let seq = build_remote_cn_sequence(&params, 0.6, 0.0).unwrap();
        assert_eq!(seq.warnings.len(), 1);
    }

    #[test]
    fn table_round_trip() {
        let params = ChainParams::new(6, 1.0, 37.5, 1.0e3).unwrap();
        let seq = build_remote_cn_sequence(&params, 0.1234, 0.3).unwrap();
        let back = parse_table(&seq.to_table()).unwrap();
        assert_eq!(back.params, seq.params);
        assert_eq!(back.pulses, seq.pulses);
    }

    #[test]
    fn table_rejects_garbage() {
        assert!(parse_table("1 0 1 1 0 1 pi").is_err());
        let head = "# params length=3 coupling=1 gradient=10 omega0=0\n";
        assert!(parse_table(&format!("{head}1 5 1 1 0 3.14159 pi\n")).is_err());
        assert!(parse_table(&format!("{head}1 0 1 1 0 1 pi\n")).is_err());
        assert!(parse_table(&format!("{head}2 0 1 1 0 3.141592653589793 pi\n")).is_err());
        assert!(parse_table(&format!("{head}1 0 -1 1 0 1 1\n")).is_err());
    }
}
