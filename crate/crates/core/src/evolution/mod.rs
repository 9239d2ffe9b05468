//! State-vector propagation through a pulse train.
//!
//! During pulse `n` the amplitudes `A_p` live in the frame rotating at the
//! drive frequency `ν_n`; the lab-frame wave function is
//! `C_p = A_p · exp(-iχ_p t + iξ_p)` with `χ_p = -(ν/2)S_p` and
//! `ξ_p = (φ/2)S_p`. Inside a pulse the rotating-frame generator is time
//! independent: diagonal `ℰ_p = E_p + (ν/2)S_p`, off-diagonal `-Ω/2` between
//! states one spin flip apart. Between pulses [`frame_rejoin`] re-expresses
//! the amplitudes in the next pulse's frame so `C_p` stays continuous.

mod blocked;
mod chebyshev;
mod dense;

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::chain::{BasisState, ChainParams};
use crate::error::{Error, Result};
use crate::protocol::{Pulse, PulseSequence};

pub use blocked::propagate_pulse_blocked;
pub use chebyshev::{propagate_pulse_exact, ExactOptions};
pub use dense::{dense_generator, dense_oracle_propagate, DENSE_MAX_LENGTH};

/// Longest chain a [`StateVector`] may be built for (or parsed from a dump).
pub const MAX_STATE_LENGTH: usize = 24;

/// Rotating frame of a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Frame {
    pub frequency: f64,
    pub phase: f64,
}

impl Frame {
    pub fn of(pulse: &Pulse) -> Self {
        Frame {
            frequency: pulse.frequency,
            phase: pulse.phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    length: usize,
    pub amplitudes: Vec<Complex64>,
    pub frame: Frame,
    /// Global time at which the amplitudes are given.
    pub time: f64,
}

impl StateVector {
    /// Basis state `p` at `t = 0` in `frame`.
    pub fn basis(length: usize, p: BasisState, frame: Frame) -> Result<Self> {
        if length == 0 || length > MAX_STATE_LENGTH {
            return Err(Error::Unsupported(format!(
                "state vectors support 1..={MAX_STATE_LENGTH} spins, got {length}"
            )));
        }
        p.check(length)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << length];
        amplitudes[p.index()] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            length,
            amplitudes,
            frame,
            time: 0.0,
        })
    }

    pub fn from_amplitudes(
        length: usize,
        amplitudes: Vec<Complex64>,
        frame: Frame,
        time: f64,
    ) -> Result<Self> {
        if length == 0 || length > MAX_STATE_LENGTH {
            return Err(Error::Unsupported(format!(
                "state vectors support 1..={MAX_STATE_LENGTH} spins, got {length}"
            )));
        }
        if amplitudes.len() != 1 << length {
            return Err(Error::invalid(format!(
                "expected {} amplitudes, got {}",
                1usize << length,
                amplitudes.len()
            )));
        }
        Ok(StateVector {
            length,
            amplitudes,
            frame,
            time,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, p: BasisState) -> f64 {
        self.amplitudes.get(p.index()).map_or(0.0, |a| a.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub(crate) fn check_params(&self, params: &ChainParams) -> Result<()> {
        if params.length() != self.length {
            return Err(Error::invalid(format!(
                "state has {} spins but chain has {}",
                self.length,
                params.length()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self
            .amplitudes
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
        {
            Ok(())
        } else {
            Err(Error::Numerical(
                "non-finite amplitude after propagation".into(),
            ))
        }
    }

    /// Line-oriented dump sorted by descending probability (ties by mask).
    /// Entries below `min_probability` are omitted.
    pub fn to_dump(&self, min_probability: f64) -> String {
        let mut order: Vec<usize> = (0..self.dimension())
            .filter(|&i| self.amplitudes[i].norm_sqr() >= min_probability)
            .collect();
        order.sort_by(|&a, &b| {
            let (pa, pb) = (self.amplitudes[a].norm_sqr(), self.amplitudes[b].norm_sqr());
            pb.total_cmp(&pa).then(a.cmp(&b))
        });
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# length={} frequency={:e} phase={:e} time={:e}",
            self.length, self.frame.frequency, self.frame.phase, self.time
        );
        out.push_str("# state re im probability\n");
        for i in order {
            let a = self.amplitudes[i];
            let _ = writeln!(
                out,
                "{} {:e} {:e} {:e}",
                BasisState(i as u64).to_binary(self.length),
                a.re,
                a.im,
                a.norm_sqr()
            );
        }
        out
    }
}

/// Parses the output of [`StateVector::to_dump`]. States absent from the dump
/// get zero amplitude; the probability column is checked against `re² + im²`.
pub fn parse_state_dump(text: &str) -> Result<StateVector> {
    let mut header: Option<(usize, Frame, f64)> = None;
    let mut entries: Vec<(usize, BasisState, Complex64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if rest.contains('=') {
                if header.is_some() {
                    return Err(Error::parse(lineno, "duplicate header"));
                }
                header = Some(parse_dump_header(rest, lineno)?);
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                lineno,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let state =
            BasisState::from_binary(fields[0]).map_err(|e| Error::parse(lineno, e.to_string()))?;
        if let Some((l, _, _)) = header {
            if fields[0].len() != l {
                return Err(Error::parse(
                    lineno,
                    "state string length differs from header",
                ));
            }
        }
        let num = |i: usize| -> Result<f64> {
            let v: f64 = fields[i]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad number {:?}", fields[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(lineno, "non-finite number"))
            }
        };
        let amp = Complex64::new(num(1)?, num(2)?);
        let prob = num(3)?;
        if (amp.norm_sqr() - prob).abs() > 1e-12 * prob.max(1.0) {
            return Err(Error::parse(lineno, "probability does not match amplitude"));
        }
        entries.push((lineno, state, amp));
    }
    let (length, frame, time) = header.ok_or_else(|| Error::parse(0, "missing header"))?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << length];
    let mut seen = vec![false; 1 << length];
    for (lineno, state, amp) in entries {
        let i = state.index();
        if i >= amplitudes.len() {
            return Err(Error::parse(lineno, "state outside chain"));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::parse(lineno, "duplicate state"));
        }
        amplitudes[i] = amp;
    }
    StateVector::from_amplitudes(length, amplitudes, frame, time)
}

fn parse_dump_header(rest: &str, lineno: usize) -> Result<(usize, Frame, f64)> {
    let (mut length, mut frequency, mut phase, mut time) = (None, None, None, None);
    for item in rest.split_whitespace() {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("expected key=value, got {item:?}")))?;
        let float = || -> Result<f64> {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(lineno, format!("bad value for {key}")))
        };
        match key {
            "length" => {
                let l: usize = value
                    .parse()
                    .map_err(|_| Error::parse(lineno, "bad length"))?;
                if l == 0 || l > MAX_STATE_LENGTH {
                    return Err(Error::parse(lineno, format!("length {l} unsupported")));
                }
                length = Some(l);
            }
            "frequency" => frequency = Some(float()?),
            "phase" => phase = Some(float()?),
            "time" => time = Some(float()?),
            _ => return Err(Error::parse(lineno, format!("unknown key {key}"))),
        }
    }
    match (length, frequency, phase, time) {
        (Some(l), Some(frequency), Some(phase), Some(t)) => Ok((l, Frame { frequency, phase }, t)),
        _ => Err(Error::parse(lineno, "header missing a key")),
    }
}

/// Re-expresses the amplitudes in the rotating frame of `next` at the current
/// global time, keeping the lab-frame wave function unchanged. Pure phase map.
pub fn frame_rejoin(mut state: StateVector, next: &Pulse) -> StateVector {
    rejoin_in_place(&mut state, Frame::of(next));
    state
}

pub(crate) fn rejoin_in_place(state: &mut StateVector, next: Frame) {
    let old = state.frame;
    if old == next {
        return;
    }
    // A_p ← A_p · exp(i S_p θ), θ = -(Δν/2)·t - Δφ/2
    let theta =
        -0.5 * (next.frequency - old.frequency) * state.time - 0.5 * (next.phase - old.phase);
    let l = state.length;
    let factors: Vec<Complex64> = (0..=l)
        .map(|ones| {
            let s = l as f64 - 2.0 * ones as f64;
            Complex64::from_polar(1.0, s * theta)
        })
        .collect();
    for (i, a) in state.amplitudes.iter_mut().enumerate() {
        *a *= factors[i.count_ones() as usize];
    }
    state.frame = next;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Blocked,
}

/// Runs `seq` from basis state `initial`, starting at `t = 0` in the first
/// pulse's frame. The returned amplitudes are in the last pulse's frame.
pub fn run_sequence(
    initial: BasisState,
    seq: &PulseSequence,
    method: Method,
    opts: &ExactOptions,
) -> Result<StateVector> {
    let params = &seq.params;
    let frame = seq.pulses.first().map(Frame::of).unwrap_or_default();
    let mut state = StateVector::basis(params.length(), initial, frame)?;
    for pulse in &seq.pulses {
        state = frame_rejoin(state, pulse);
        state = match method {
            Method::Exact => propagate_pulse_exact(state, pulse, params, opts)?,
            Method::Blocked => propagate_pulse_blocked(state, pulse, params)?,
        };
    }
    Ok(state)
}
