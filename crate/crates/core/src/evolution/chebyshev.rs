//! Matrix-free exact propagation by Chebyshev expansion of `exp(-iHτ)`.
//!
//! The generator is real symmetric, so real and imaginary parts of the state
//! are propagated as two independent real vectors. `H` is only ever applied
//! to vectors: diagonal times amplitude plus `L` single-flip neighbours.

use num_complex::Complex64;

use crate::chain::{rotating_diagonals, ChainParams};
use crate::error::{Error, Result};
use crate::protocol::Pulse;

use super::StateVector;

/// Upper limit on `R·dt` per Chebyshev substep, `R` the spectral half-width.
const MAX_STEP_ARGUMENT: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    /// Bound on the 2-norm error of one pulse.
    pub tol: f64,
    /// Expansion order allowed per substep before giving up.
    pub max_terms: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            tol: 1e-10,
            max_terms: 4096,
        }
    }
}

/// Rotating-frame generator `ℰ_p δ_pq - (Ω/2)·[p, q one flip apart]`.
pub(crate) struct Generator {
    pub length: usize,
    pub diag: Vec<f64>,
    pub half_rabi: f64,
}

impl Generator {
    pub fn new(pulse: &Pulse, params: &ChainParams) -> Result<Self> {
        Ok(Generator {
            length: params.length(),
            diag: rotating_diagonals(pulse.frequency, params)?,
            half_rabi: 0.5 * pulse.rabi,
        })
    }

    /// Gershgorin enclosure of the spectrum.
    fn spectral_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self
            .diag
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
                (lo.min(d), hi.max(d))
            });
        let radius = self.half_rabi * self.length as f64;
        (lo - radius, hi + radius)
    }
}

/// `out ← scale_diag ∘ cur - out - flip · Σ_k cur[p ⊕ 2^k]`, in place.
fn chebyshev_update(out: &mut [f64], cur: &[f64], scale_diag: &[f64], flip: f64, length: usize) {
    for ((o, &c), &d) in out.iter_mut().zip(cur).zip(scale_diag) {
        *o = d * c - *o;
    }
    for k in 0..length {
        let m = 1usize << k;
        for (o, c) in out.chunks_exact_mut(2 * m).zip(cur.chunks_exact(2 * m)) {
            let (o_lo, o_hi) = o.split_at_mut(m);
            let (c_lo, c_hi) = c.split_at(m);
            for j in 0..m {
                o_lo[j] -= flip * c_hi[j];
                o_hi[j] -= flip * c_lo[j];
            }
        }
    }
}

/// `J_0(x) … J_n(x)` by Miller's backward recurrence, normalized with
/// `J_0 + 2 Σ J_{2k} = 1`. Valid for `x ≥ 0`.
pub(crate) fn bessel_j_sequence(x: f64, n: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; n + 1];
        out[0] = 1.0;
        return out;
    }
    let start = n.max(x.ceil() as usize) + 20 + (12.0 * x.cbrt()) as usize;
    let mut vals = vec![0.0; start + 2];
    let mut hi = 0.0f64;
    let mut cur = 1e-300f64;
    vals[start] = cur;
    for k in (1..=start).rev() {
        let lower = 2.0 * k as f64 / x * cur - hi;
        hi = cur;
        cur = lower;
        vals[k - 1] = cur;
        if cur.abs() > 1e250 {
            for v in &mut vals[k - 1..=start] {
                *v *= 1e-250;
            }
            hi *= 1e-250;
            cur *= 1e-250;
        }
    }
    let norm = vals[0] + 2.0 * vals[2..=start].iter().step_by(2).sum::<f64>();
    vals.truncate(n + 1);
    vals.iter_mut().for_each(|v| *v /= norm);
    vals
}

/// Coefficients `J_0 … J_M(x)` with `M` the smallest order past `x` whose
/// tail `2 Σ_{n>M} |J_n|` is below `budget`; also returns that tail bound.
fn truncated_coefficients(x: f64, budget: f64, max_terms: usize) -> (Vec<f64>, f64) {
    let span = x.ceil() as usize + 40 + (12.0 * x.cbrt()) as usize;
    let j = bessel_j_sequence(x, span);
    // suffix sums of |J_n|
    let mut tail = vec![0.0; j.len() + 1];
    for n in (0..j.len()).rev() {
        tail[n] = tail[n + 1] + j[n].abs();
    }
    let first = (x.floor() as usize).min(j.len() - 1);
    let m = (first..j.len())
        .find(|&m| 2.0 * tail[m + 1] <= budget)
        .unwrap_or(j.len() - 1);
    let m = m.min(max_terms);
    let bound = 2.0 * tail[m + 1];
    (j[..=m].to_vec(), bound)
}

/// Advances `state` by one pulse under the full rotating-frame generator.
///
/// The state must already be in the pulse's frame. The result is accurate
/// to `opts.tol` in the 2-norm; the global time advances by `τ`.
pub fn propagate_pulse_exact(
    mut state: StateVector,
    pulse: &Pulse,
    params: &ChainParams,
    opts: &ExactOptions,
) -> Result<StateVector> {
    state.check_params(params)?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if pulse.duration == 0.0 {
        return Ok(state);
    }
    let gen = Generator::new(pulse, params)?;
    let (lo, hi) = gen.spectral_bounds();
    let center = 0.5 * (lo + hi);
    let radius = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE) * (1.0 + 1e-12);

    let steps = ((radius * pulse.duration) / MAX_STEP_ARGUMENT)
        .ceil()
        .max(1.0) as usize;
    let dt = pulse.duration / steps as f64;
    let (coeffs, bound) =
        truncated_coefficients(radius * dt, opts.tol / steps as f64, opts.max_terms);
    let achieved = bound * steps as f64;
    if achieved > opts.tol {
        return Err(Error::Convergence {
            achieved,
            tol: opts.tol,
        });
    }

    let expansion = Expansion {
        scale_diag: gen
            .diag
            .iter()
            .map(|d| 2.0 * (d - center) / radius)
            .collect(),
        flip: 2.0 * gen.half_rabi / radius,
        length: gen.length,
        coeffs,
        shift: Complex64::from_polar(1.0, -center * dt),
    };
    let mut re: Vec<f64> = state.amplitudes.iter().map(|a| a.re).collect();
    let mut im: Vec<f64> = state.amplitudes.iter().map(|a| a.im).collect();
    for _ in 0..steps {
        expansion.apply(&mut re, &mut im);
    }
    for (a, (&r, &i)) in state.amplitudes.iter_mut().zip(re.iter().zip(&im)) {
        *a = Complex64::new(r, i);
    }
    state.time += pulse.duration;
    state.check_finite()?;
    Ok(state)
}

/// One substep `exp(-iH dt)` as a truncated Chebyshev series in
/// `H_s = (H - c)/R`.
struct Expansion {
    /// `2(ℰ_p - c)/R`.
    scale_diag: Vec<f64>,
    /// `2(Ω/2)/R`.
    flip: f64,
    length: usize,
    coeffs: Vec<f64>,
    shift: Complex64,
}

/// Weights `(a, b)` with `(-i)^n (x + iy) = (a x + b y) + i(a y - b x)`.
fn rotation(order: usize, w: f64) -> (f64, f64) {
    match order % 4 {
        0 => (w, 0.0),
        1 => (0.0, w),
        2 => (-w, 0.0),
        _ => (0.0, -w),
    }
}

impl Expansion {
    fn apply(&self, re: &mut [f64], im: &mut [f64]) {
        if self.length >= 3 {
            self.apply_blocked(re, im);
        } else {
            self.apply_scalar(re, im);
        }
    }

    fn apply_scalar(&self, re: &mut [f64], im: &mut [f64]) {
        let n = re.len();
        let mut prev = [re.to_vec(), im.to_vec()];
        let mut cur = [vec![0.0; n], vec![0.0; n]];
        for part in 0..2 {
            chebyshev_update(
                &mut cur[part],
                &prev[part],
                &self.scale_diag,
                self.flip,
                self.length,
            );
            cur[part].iter_mut().for_each(|x| *x *= 0.5);
        }
        let mut acc = [vec![0.0; n], vec![0.0; n]];
        for order in 0..self.coeffs.len() {
            if order >= 2 {
                for part in 0..2 {
                    chebyshev_update(
                        &mut prev[part],
                        &cur[part],
                        &self.scale_diag,
                        self.flip,
                        self.length,
                    );
                }
                std::mem::swap(&mut prev, &mut cur);
            }
            let t = if order == 0 { &prev } else { &cur };
            let w = if order == 0 {
                self.coeffs[0]
            } else {
                2.0 * self.coeffs[order]
            };
            let (a, b) = rotation(order, w);
            for i in 0..n {
                acc[0][i] += a * t[0][i] + b * t[1][i];
                acc[1][i] += a * t[1][i] - b * t[0][i];
            }
        }
        self.finish(&acc[0], &acc[1], re, im);
    }

    fn finish(&self, acc_re: &[f64], acc_im: &[f64], re: &mut [f64], im: &mut [f64]) {
        for i in 0..re.len() {
            let z = Complex64::new(acc_re[i], acc_im[i]) * self.shift;
            re[i] = z.re;
            im[i] = z.im;
        }
    }

    fn apply_blocked(&self, re: &mut [f64], im: &mut [f64]) {
        #[cfg(target_arch = "x86_64")]
        {
            if is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma") {
                // SAFETY: the required CPU features were detected at runtime.
                unsafe { self.apply_blocked_avx2(re, im) };
                return;
            }
        }
        self.apply_blocked_generic(re, im);
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2,fma")]
    unsafe fn apply_blocked_avx2(&self, re: &mut [f64], im: &mut [f64]) {
        self.apply_blocked_generic(re, im);
    }

    /// Same recursion as [`Self::apply_scalar`] on 8-element blocks: flips of
    /// spins 0-2 permute within a block, higher spins pair whole blocks.
    #[inline(always)]
    fn apply_blocked_generic(&self, re: &mut [f64], im: &mut [f64]) {
        let blocks = re.len() / 8;
        let outer = self.length - 3;
        let to_blocks = |v: &[f64]| -> Vec<[f64; 8]> {
            v.chunks_exact(8).map(|c| c.try_into().unwrap()).collect()
        };
        let diag = to_blocks(&self.scale_diag);
        let mut prev = [to_blocks(re), to_blocks(im)];
        let mut cur = [vec![[0.0; 8]; blocks], vec![[0.0; 8]; blocks]];
        let mut acc = [vec![[0.0; 8]; blocks], vec![[0.0; 8]; blocks]];
        let flip = self.flip;

        // T_1 = H_s T_0
        for part in 0..2 {
            for b in 0..blocks {
                let s = neighbour_sum(&prev[part], b, outer);
                let c = &prev[part][b];
                let d = &diag[b];
                let o = &mut cur[part][b];
                for j in 0..8 {
                    o[j] = 0.5 * (d[j] * c[j] - flip * s[j]);
                }
            }
        }
        let (a0, _) = rotation(0, self.coeffs[0]);
        for part in 0..2 {
            for b in 0..blocks {
                for j in 0..8 {
                    acc[part][b][j] = a0 * prev[part][b][j];
                }
            }
        }
        if self.coeffs.len() > 1 {
            let (a, bw) = rotation(1, 2.0 * self.coeffs[1]);
            accumulate_blocks(&mut acc, &cur, a, bw);
        }
        recurse(
            &self.coeffs,
            &diag,
            flip,
            &mut prev,
            &mut cur,
            &mut acc,
            outer,
        );
        let flat = |v: &[[f64; 8]]| -> Vec<f64> { v.iter().flatten().copied().collect() };
        self.finish(&flat(&acc[0]), &flat(&acc[1]), re, im);
    }
}

type Blocks = [Vec<[f64; 8]>; 2];

/// Orders `2..` of the recursion; after each order `prev` holds `T_n`.
#[inline(always)]
fn recurse(
    coeffs: &[f64],
    diag: &[[f64; 8]],
    flip: f64,
    prev: &mut Blocks,
    cur: &mut Blocks,
    acc: &mut Blocks,
    outer: usize,
) {
    for (order, &c) in coeffs.iter().enumerate().skip(2) {
        let (a, bw) = rotation(order, 2.0 * c);
        let [acc_re, acc_im] = acc;
        let [prev_re, prev_im] = &mut *prev;
        let [cur_re, cur_im] = &*cur;
        let rows = prev_re
            .iter_mut()
            .zip(prev_im.iter_mut())
            .zip(acc_re.iter_mut().zip(acc_im.iter_mut()))
            .zip(diag.iter());
        for (b, (((pr, pi), (ar, ai)), d)) in rows.enumerate() {
            let sr = neighbour_sum(cur_re, b, outer);
            let si = neighbour_sum(cur_im, b, outer);
            let (cr, ci) = (&cur_re[b], &cur_im[b]);
            for j in 0..8 {
                let nr = d[j] * cr[j] - pr[j] - flip * sr[j];
                let ni = d[j] * ci[j] - pi[j] - flip * si[j];
                pr[j] = nr;
                pi[j] = ni;
                ar[j] += a * nr + bw * ni;
                ai[j] += a * ni - bw * nr;
            }
        }
        std::mem::swap(prev, cur);
    }
}

/// `Σ_k v[p ⊕ 2^k]` for the 8 entries of block `b`.
#[inline(always)]
fn neighbour_sum(v: &[[f64; 8]], b: usize, outer: usize) -> [f64; 8] {
    let c = &v[b];
    let mut s = [0.0; 8];
    for j in 0..8 {
        s[j] = c[j ^ 1] + c[j ^ 2] + c[j ^ 4];
    }
    for k in 0..outer {
        // SAFETY: `v.len()` is a power of two above `b | (1 << k)`.
        let nb = unsafe { v.get_unchecked(b ^ (1 << k)) };
        for j in 0..8 {
            s[j] += nb[j];
        }
    }
    s
}

#[inline(always)]
fn accumulate_blocks(acc: &mut [Vec<[f64; 8]>; 2], t: &[Vec<[f64; 8]>; 2], a: f64, bw: f64) {
    let [acc_re, acc_im] = acc;
    for b in 0..acc_re.len() {
        for j in 0..8 {
            let (x, y) = (t[0][b][j], t[1][b][j]);
            acc_re[b][j] += a * x + bw * y;
            acc_im[b][j] += a * y - bw * x;
        }
    }
}
