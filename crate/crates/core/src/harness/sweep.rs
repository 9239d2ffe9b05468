use std::time::Instant;

use rayon::prelude::*;

use crate::chain::{BasisState, ChainParams};
use crate::error::{Error, Result};
use crate::evolution::{run_sequence, ExactOptions, Method};
use crate::perturbation::{gate_success_estimate, mu, two_pi_k_rabi};
use crate::protocol::build_remote_cn_sequence;

use super::{protocol_epsilon, unwanted_probability};

/// Largest `k` checked when tagging sweep points near a 2πk Rabi frequency.
const MAX_TAGGED_K: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Gradient,
    Rabi,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Gradient => "gradient",
            SweepVariable::Rabi => "rabi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::invalid(format!(
                "grid needs start < stop, got {} .. {}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::invalid("grid needs at least 2 points"));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(Error::invalid("log spacing needs a positive start"));
        }
        Ok(())
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.points - 1;
        Ok((0..=n)
            .map(|i| {
                let f = i as f64 / n as f64;
                if i == n {
                    return self.stop;
                }
                match self.spacing {
                    Spacing::Linear => self.start + f * (self.stop - self.start),
                    Spacing::Log => {
                        (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp()
                    }
                }
            })
            .collect())
    }
}

/// How the Rabi frequency is fixed during a gradient sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RabiSetting {
    Value(f64),
    /// `Ω = 2J/√(4k² - 1)`: zero near-resonant error.
    TwoPiK(u32),
}

impl RabiSetting {
    pub fn resolve(self, coupling: f64) -> Result<f64> {
        match self {
            RabiSetting::Value(v) => Ok(v),
            RabiSetting::TwoPiK(k) => two_pi_k_rabi(2.0 * coupling, k),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodSet {
    pub exact: bool,
    pub blocked: bool,
    pub analytic: bool,
}

impl MethodSet {
    pub const ALL: MethodSet = MethodSet {
        exact: true,
        blocked: true,
        analytic: true,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Grid,
    pub length: usize,
    pub coupling: f64,
    pub omega0: f64,
    pub phase: f64,
    /// Fixed gradient for Rabi sweeps.
    pub gradient: f64,
    /// Fixed Rabi frequency for gradient sweeps.
    pub rabi: RabiSetting,
    pub methods: MethodSet,
    pub tol: f64,
    /// Wall-clock columns make output non-reproducible; off for byte-stable files.
    pub record_timings: bool,
}

impl SweepSpec {
    /// Defaults: `L = 10`, `J = 1`, `ω₀ = 0`, `φ = 0`, `δω = 100`,
    /// `Ω = 2J/√255`, all methods, tolerance `1e-10`.
    pub fn new(variable: SweepVariable, grid: Grid) -> Self {
        SweepSpec {
            variable,
            grid,
            length: 10,
            coupling: 1.0,
            omega0: 0.0,
            phase: 0.0,
            gradient: 100.0,
            rabi: RabiSetting::TwoPiK(8),
            methods: MethodSet::ALL,
            tol: 1e-10,
            record_timings: true,
        }
    }

    /// `(gradient, rabi)` at sweep value `value`.
    fn point(&self, value: f64) -> Result<(f64, f64)> {
        match self.variable {
            SweepVariable::Gradient => Ok((value, self.rabi.resolve(self.coupling)?)),
            SweepVariable::Rabi => Ok((self.gradient, value)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub p_exact: Option<f64>,
    pub p_blocked: Option<f64>,
    pub p_analytic: Option<f64>,
    pub epsilon: Option<f64>,
    pub mu_end: Option<f64>,
    pub runtime_exact_ms: Option<f64>,
    pub runtime_blocked_ms: Option<f64>,
    /// `k` when the Rabi frequency sits within half a grid step of a 2πk value.
    pub two_pi_k: Option<u32>,
    /// First failure encountered at this point, if any.
    pub error: Option<String>,
}

impl ResultRow {
    fn empty(variable: SweepVariable, value: f64) -> Self {
        ResultRow {
            variable,
            value,
            p_exact: None,
            p_blocked: None,
            p_analytic: None,
            epsilon: None,
            mu_end: None,
            runtime_exact_ms: None,
            runtime_blocked_ms: None,
            two_pi_k: None,
            error: None,
        }
    }

    fn note(&mut self, err: Error) {
        if self.error.is_none() {
            self.error = Some(err.to_string());
        }
    }
}

fn simulate(
    params: &ChainParams,
    rabi: f64,
    spec: &SweepSpec,
    method: Method,
) -> Result<(f64, f64)> {
    let started = Instant::now();
    let seq = build_remote_cn_sequence(params, rabi, spec.phase)?;
    let opts = ExactOptions {
        tol: spec.tol,
        ..ExactOptions::default()
    };
    let state = run_sequence(BasisState::GROUND, &seq, method, &opts)?;
    let p = unwanted_probability(&state, params.length())?;
    Ok((p, started.elapsed().as_secs_f64() * 1e3))
}

/// Runs every requested method at one sweep value. Failures are recorded in
/// the row rather than returned.
pub fn evaluate_point(spec: &SweepSpec, value: f64) -> ResultRow {
    let mut row = ResultRow::empty(spec.variable, value);
    let (gradient, rabi) = match spec.point(value) {
        Ok(p) => p,
        Err(e) => {
            row.note(e);
            return row;
        }
    };
    let params = match ChainParams::new(spec.length, spec.coupling, gradient, spec.omega0) {
        Ok(p) => p,
        Err(e) => {
            row.note(e);
            return row;
        }
    };
    if rabi.is_finite() && rabi > 0.0 {
        row.epsilon = Some(protocol_epsilon(rabi, spec.coupling));
        match mu(spec.length - 1, rabi, gradient, spec.length) {
            Ok(m) => row.mu_end = Some(m),
            Err(e) => row.note(e),
        }
    }
    let timing = |ms: f64| spec.record_timings.then_some(ms);
    if spec.methods.exact {
        match simulate(&params, rabi, spec, Method::Exact) {
            Ok((p, ms)) => {
                row.p_exact = Some(p);
                row.runtime_exact_ms = timing(ms);
            }
            Err(e) => row.note(e),
        }
    }
    if spec.methods.blocked {
        match simulate(&params, rabi, spec, Method::Blocked) {
            Ok((p, ms)) => {
                row.p_blocked = Some(p);
                row.runtime_blocked_ms = timing(ms);
            }
            Err(e) => row.note(e),
        }
    }
    if spec.methods.analytic {
        let eps = protocol_epsilon(rabi, spec.coupling);
        match gate_success_estimate(spec.length, rabi, gradient, spec.coupling, eps) {
            Ok(b) => row.p_analytic = Some(b.p_unwanted),
            Err(e) => row.note(e),
        }
    }
    row
}

/// Evaluates every grid point (in parallel) and returns rows in grid order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    let values = spec.grid.values()?;
    let mut rows: Vec<ResultRow> = values
        .par_iter()
        .map(|&v| evaluate_point(spec, v))
        .collect();
    if spec.variable == SweepVariable::Rabi {
        tag_two_pi_k(&mut rows, &values, spec.coupling);
    }
    Ok(rows)
}

pub fn sweep_gradient(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    if spec.variable != SweepVariable::Gradient {
        return Err(Error::invalid("sweep_gradient needs a gradient sweep spec"));
    }
    sweep(spec)
}

pub fn sweep_rabi(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    if spec.variable != SweepVariable::Rabi {
        return Err(Error::invalid("sweep_rabi needs a Rabi sweep spec"));
    }
    sweep(spec)
}

fn tag_two_pi_k(rows: &mut [ResultRow], values: &[f64], coupling: f64) {
    let targets: Vec<(u32, f64)> = (1..=MAX_TAGGED_K)
        .filter_map(|k| two_pi_k_rabi(2.0 * coupling, k).ok().map(|w| (k, w)))
        .collect();
    for i in 0..rows.len() {
        let left = i.checked_sub(1).map(|j| (values[i] - values[j]).abs());
        let right = values.get(i + 1).map(|v| (v - values[i]).abs());
        let half = 0.5 * left.into_iter().chain(right).fold(f64::INFINITY, f64::min);
        rows[i].two_pi_k = targets
            .iter()
            .find(|&&(_, w)| (w - values[i]).abs() <= half)
            .map(|&(k, _)| k);
    }
}
