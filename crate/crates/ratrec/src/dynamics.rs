//! Trajectory generation for the recurrence and its inverse, envelope
//! sequences, and divergence/oscillation detectors.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::LimitSpec;
use crate::model::{
    AdmissibilityReport, CoefficientModel, InitialConditions, ModelError, RecurrenceSpec,
};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("initial window is inadmissible at k = {index}")]
    Inadmissible { index: i64, report: AdmissibilityReport },
    #[error("step count must be >= 1")]
    ZeroSteps,
    #[error("inverse simulation requires a strictly positive window (zero at k = {index})")]
    ZeroInInverseWindow { index: i64 },
    #[error("envelope initial values must be positive (got {value})")]
    NonPositiveEnvelopeInit { value: f64 },
    #[error("envelope limits must have A > 0 and B >= 0 (A = {a}, B = {b})")]
    InvalidEnvelopeLimits { a: f64, b: f64 },
    #[error("trajectory too short: {len} values for a window cap of {window_cap}")]
    TrajectoryTooShort { len: usize, window_cap: usize },
}

/// Why a simulation stopped before completing its requested steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    /// The update produced a non-finite value.
    NonFinite,
    /// A denominator evaluated to zero with a positive exponent.
    ZeroDenominator { term: usize },
    /// Zero raised to a negative exponent.
    ZeroToNegativePower { term: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Halt {
    /// Index `k` of the value that could not be produced.
    pub step: i64,
    pub reason: HaltReason,
}

/// An indexed solution sequence: the initial window followed by the simulated
/// values, plus the realized coefficient values used at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    start_index: i64,
    window_len: usize,
    values: Vec<f64>,
    trace_a: Vec<f64>,
    trace_b: Vec<Vec<f64>>,
    halt: Option<Halt>,
}

impl Trajectory {
    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// All values, window included, ordered by index.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Simulated values only (`k >= 1`).
    pub fn simulated(&self) -> &[f64] {
        &self.values[self.window_len..]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the last produced value.
    pub fn last_index(&self) -> i64 {
        self.start_index + self.values.len() as i64 - 1
    }

    /// Value at recurrence index `k`, if produced.
    pub fn value(&self, k: i64) -> Option<f64> {
        if k < self.start_index {
            return None;
        }
        self.values.get((k - self.start_index) as usize).copied()
    }

    /// Realized forcing coefficient per executed step.
    pub fn trace_a(&self) -> &[f64] {
        &self.trace_a
    }

    /// Realized term coefficients, indexed `[term][step]`.
    pub fn trace_b(&self) -> &[Vec<f64>] {
        &self.trace_b
    }

    pub fn halt(&self) -> Option<Halt> {
        self.halt
    }

    /// Writes `k,x` rows with 17-significant-digit values.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,x")?;
        for (offset, value) in self.values.iter().enumerate() {
            writeln!(out, "{},{:.16e}", self.start_index + offset as i64, value)?;
        }
        Ok(())
    }
}

/// Per-run realization of one coefficient sequence. Banded models draw from
/// their own ChaCha stream so traces are reproducible for a given seed.
enum CoefficientSequence {
    Constant(f64),
    Convergent { limit: f64, amplitude: f64, ratio: f64 },
    Banded { low: f64, high: f64, rng: ChaCha8Rng },
}

impl CoefficientSequence {
    fn new(model: &CoefficientModel, seed: u64, stream: u64) -> Self {
        match *model {
            CoefficientModel::Constant { value } => CoefficientSequence::Constant(value),
            CoefficientModel::Convergent { limit, amplitude, ratio } => {
                CoefficientSequence::Convergent { limit, amplitude, ratio }
            }
            CoefficientModel::Banded { low, high } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                CoefficientSequence::Banded { low, high, rng }
            }
        }
    }

    fn next(&mut self, k: usize) -> f64 {
        match self {
            CoefficientSequence::Constant(value) => *value,
            CoefficientSequence::Convergent { limit, amplitude, ratio } => {
                *limit + *amplitude * ratio.powi(k as i32)
            }
            CoefficientSequence::Banded { low, high, rng } => {
                if low == high {
                    *low
                } else {
                    rng.random_range(*low..*high)
                }
            }
        }
    }
}

/// `base^exp` with the conventions used by the recurrence: `0^0 = 1`, zero to
/// a positive power is zero, and zero to a negative power is a halt.
fn term_power(base: f64, exp: f64, term: usize) -> Result<f64, HaltReason> {
    if base == 0.0 {
        if exp == 0.0 {
            Ok(1.0)
        } else if exp > 0.0 {
            Ok(0.0)
        } else {
            Err(HaltReason::ZeroToNegativePower { term })
        }
    } else {
        Ok(base.powf(exp))
    }
}

struct Samplers {
    a: CoefficientSequence,
    b: Vec<CoefficientSequence>,
}

fn samplers_for(spec: &RecurrenceSpec, seed: u64) -> Samplers {
    Samplers {
        a: CoefficientSequence::new(spec.coeff_a(), seed, 0),
        b: spec
            .terms()
            .iter()
            .enumerate()
            .map(|(i, t)| CoefficientSequence::new(&t.coeff_b, seed, i as u64 + 1))
            .collect(),
    }
}

fn run_simulation(
    spec: &RecurrenceSpec,
    init: &InitialConditions,
    steps: usize,
    seed: u64,
    inverse: bool,
) -> Trajectory {
    let window_len = spec.window_len();
    let start_index = spec.start_index();
    let mut samplers = samplers_for(spec, seed);

    let mut values = Vec::with_capacity(window_len + steps);
    values.extend_from_slice(init.values());
    let mut trace_a = Vec::with_capacity(steps);
    let mut trace_b: Vec<Vec<f64>> = vec![Vec::with_capacity(steps); spec.q()];
    let mut halt = None;

    'steps: for k in 0..steps {
        let a_k = samplers.a.next(k);
        let b_k: Vec<f64> = samplers.b.iter_mut().map(|s| s.next(k)).collect();

        // values[window_len + k] will hold x[k+1]; delayed index k+1-d maps to
        // offset window_len + k - d.
        let mut sum = a_k;
        for (i, term) in spec.terms().iter().enumerate() {
            let x_num = values[window_len + k - term.ell as usize];
            let x_den = values[window_len + k - term.s as usize];
            let (num_exp, den_exp) =
                if inverse { (term.r, term.p) } else { (term.p, term.r) };
            let (num_base, den_base) = if inverse { (x_den, x_num) } else { (x_num, x_den) };
            let numerator = match term_power(num_base, num_exp, i) {
                Ok(v) => v,
                Err(reason) => {
                    halt = Some(Halt { step: k as i64 + 1, reason });
                    break 'steps;
                }
            };
            if den_base == 0.0 && den_exp > 0.0 {
                halt = Some(Halt {
                    step: k as i64 + 1,
                    reason: HaltReason::ZeroDenominator { term: i },
                });
                break 'steps;
            }
            let denominator = match term_power(den_base, den_exp, i) {
                Ok(v) => v,
                Err(reason) => {
                    halt = Some(Halt { step: k as i64 + 1, reason });
                    break 'steps;
                }
            };
            sum += b_k[i] * numerator / denominator;
        }
        let x_next = if inverse { 1.0 / sum } else { sum };
        if !x_next.is_finite() {
            halt = Some(Halt { step: k as i64 + 1, reason: HaltReason::NonFinite });
            break;
        }
        values.push(x_next);
        trace_a.push(a_k);
        for (i, b) in b_k.into_iter().enumerate() {
            trace_b[i].push(b);
        }
    }

    Trajectory { start_index, window_len, values, trace_a, trace_b, halt }
}

/// Simulates `x[k+1] = A[k] + sum_i B[i][k] x[k+1-ell_i]^p_i / x[k+1-s_i]^r_i`
/// for `steps` steps from an admissible window.
///
/// A run that hits a non-finite value or an undefined power stops early and
/// records the offending step in [`Trajectory::halt`].
pub fn simulate(
    spec: &RecurrenceSpec,
    init: &InitialConditions,
    steps: usize,
    seed: u64,
) -> Result<Trajectory, DynamicsError> {
    if steps == 0 {
        return Err(DynamicsError::ZeroSteps);
    }
    let report = spec.check_admissible(init)?;
    if !report.admissible {
        let index = report.violation.map(|(i, _)| i).unwrap_or_default();
        return Err(DynamicsError::Inadmissible { index, report });
    }
    Ok(run_simulation(spec, init, steps, seed, false))
}

/// Simulates the inverse recurrence
/// `x[k+1] = 1 / (A[k] + sum_i B[i][k] x[k+1-s_i]^r_i / x[k+1-ell_i]^p_i)`.
///
/// With reciprocal initial data and the same seed this is the elementwise
/// reciprocal of [`simulate`].
pub fn simulate_inverse(
    spec: &RecurrenceSpec,
    init: &InitialConditions,
    steps: usize,
    seed: u64,
) -> Result<Trajectory, DynamicsError> {
    if steps == 0 {
        return Err(DynamicsError::ZeroSteps);
    }
    if init.len() != spec.window_len() {
        return Err(DynamicsError::Model(ModelError::WindowMismatch {
            got: init.len(),
            needed: spec.window_len(),
        }));
    }
    for (offset, &v) in init.values().iter().enumerate() {
        if v == 0.0 {
            return Err(DynamicsError::ZeroInInverseWindow {
                index: init.start_index() + offset as i64,
            });
        }
    }
    Ok(run_simulation(spec, init, steps, seed, true))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeVariant {
    /// Scalar first-order recursions driven by the extreme exponents only.
    Scalar,
    /// Interval recursion over the full delay window with per-term exponents.
    WindowedSafe,
}

/// Lower/upper envelope sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePair {
    pub variant: EnvelopeVariant,
    start_index: i64,
    omega: Vec<f64>,
    v: Vec<f64>,
}

impl EnvelopePair {
    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Writes `k,omega,v` rows with 17-significant-digit values.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,omega,v")?;
        for (offset, (w, v)) in self.omega.iter().zip(&self.v).enumerate() {
            writeln!(
                out,
                "{},{:.16e},{:.16e}",
                self.start_index + offset as i64,
                w,
                v
            )?;
        }
        Ok(())
    }
}

/// Scalar envelope recursions
/// `omega[k+1] = A + B min(omega^delta, omega^rho)` and
/// `v[k+1] = A + B max(v^rho, v^delta)` from one initial scalar each.
pub fn envelope(
    a: f64,
    b: f64,
    rho: f64,
    delta: f64,
    omega0: f64,
    v0: f64,
    steps: usize,
) -> Result<EnvelopePair, DynamicsError> {
    if !(a > 0.0) || !(b >= 0.0) {
        return Err(DynamicsError::InvalidEnvelopeLimits { a, b });
    }
    if !(omega0 > 0.0) {
        return Err(DynamicsError::NonPositiveEnvelopeInit { value: omega0 });
    }
    if !(v0 > 0.0) {
        return Err(DynamicsError::NonPositiveEnvelopeInit { value: v0 });
    }
    let mut omega = Vec::with_capacity(steps + 1);
    let mut v = Vec::with_capacity(steps + 1);
    omega.push(omega0);
    v.push(v0);
    for _ in 0..steps {
        let w = *omega.last().unwrap();
        let x = *v.last().unwrap();
        let w_next = a + b * w.powf(delta).min(w.powf(rho));
        let v_next = a + b * x.powf(rho).max(x.powf(delta));
        if !w_next.is_finite() || !v_next.is_finite() {
            break;
        }
        omega.push(w_next);
        v.push(v_next);
    }
    Ok(EnvelopePair { variant: EnvelopeVariant::Scalar, start_index: 0, omega, v })
}

/// Windowed envelope recursion that brackets every solution of the full
/// delayed recurrence with constant coefficients.
///
/// Both sequences start from the trajectory's own initial window. Each step
/// bounds every term through the enclosing interval
/// `[min omega-window, max v-window]`, taking per-term suprema of the
/// numerator power and infima of the denominator power, so
/// `omega[k] <= x[k] <= v[k]` holds by induction for any lag pattern.
pub fn envelope_windowed(
    limits: &LimitSpec,
    init: &InitialConditions,
    steps: usize,
) -> Result<EnvelopePair, DynamicsError> {
    let window_len = limits.window_len();
    if init.len() != window_len {
        return Err(DynamicsError::Model(ModelError::WindowMismatch {
            got: init.len(),
            needed: window_len,
        }));
    }
    let a = limits.a();
    let mut omega: Vec<f64> = init.values().to_vec();
    let mut v: Vec<f64> = init.values().to_vec();
    for k in 0..steps {
        let lo = omega[k..k + window_len].iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v[k..k + window_len].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut w_next = a;
        let mut v_next = a;
        for term in limits.terms() {
            let num_lo = lo.powf(term.p).min(hi.powf(term.p));
            let num_hi = lo.powf(term.p).max(hi.powf(term.p));
            let den_lo = lo.powf(term.r).min(hi.powf(term.r));
            let den_hi = lo.powf(term.r).max(hi.powf(term.r));
            w_next += term.b * num_lo / den_hi;
            v_next += term.b * num_hi / den_lo;
        }
        if !w_next.is_finite() || !v_next.is_finite() {
            break;
        }
        omega.push(w_next);
        v.push(v_next);
    }
    Ok(EnvelopePair {
        variant: EnvelopeVariant::WindowedSafe,
        start_index: 1 - window_len as i64,
        omega,
        v,
    })
}

/// Witnessed sign-flip oscillation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub oscillatory: bool,
    /// `(k, n, m)` triples with
    /// `sign(x[k+n+m] - x[k+n]) = -sign(x[k+n] - x[k])`, both nonzero.
    pub witnesses: Vec<(i64, u32, u32)>,
    pub window_cap: usize,
}

const OSCILLATION_SCAN_LIMIT: usize = 256;

/// Scans the first simulated indices for sign-flip witnesses with offsets up
/// to `window_cap`. Oscillatory means every scanned index has a witness.
pub fn detect_oscillation(
    traj: &Trajectory,
    window_cap: usize,
) -> Result<OscillationReport, DynamicsError> {
    if traj.len() <= window_cap + 2 {
        return Err(DynamicsError::TrajectoryTooShort { len: traj.len(), window_cap });
    }
    let values = traj.simulated();
    let mut witnesses = Vec::new();
    let mut oscillatory = true;
    let mut scanned = 0usize;
    for k in 0..values.len().saturating_sub(2).min(OSCILLATION_SCAN_LIMIT) {
        scanned += 1;
        let mut found = None;
        'search: for n in 1..=window_cap.min(values.len() - 1 - k) {
            let first = values[k + n] - values[k];
            if first == 0.0 {
                continue;
            }
            for m in 1..=window_cap.min(values.len() - 1 - k - n) {
                let second = values[k + n + m] - values[k + n];
                if second != 0.0 && second.signum() == -first.signum() {
                    found = Some((k as i64 + 1, n as u32, m as u32));
                    break 'search;
                }
            }
        }
        match found {
            Some(w) => witnesses.push(w),
            None => {
                oscillatory = false;
                break;
            }
        }
    }
    if scanned == 0 {
        oscillatory = false;
    }
    Ok(OscillationReport { oscillatory, witnesses, window_cap })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceReason {
    ThresholdExceeded,
    MonotoneGrowth,
    HaltedNonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub divergent: bool,
    pub reason: Option<DivergenceReason>,
    /// First index whose value exceeded the threshold, when applicable.
    pub first_exceedance: Option<i64>,
}

/// Flags a trajectory as divergent when it halted on a non-finite value,
/// exceeded `threshold`, or kept growing monotonically over its final 10%
/// having gained a factor of 10 since the first simulated value.
pub fn detect_divergence(traj: &Trajectory, threshold: f64) -> DivergenceReport {
    if let Some(halt) = traj.halt() {
        if halt.reason == HaltReason::NonFinite {
            return DivergenceReport {
                divergent: true,
                reason: Some(DivergenceReason::HaltedNonFinite),
                first_exceedance: Some(halt.step),
            };
        }
    }
    let simulated = traj.simulated();
    if simulated.is_empty() {
        return DivergenceReport { divergent: false, reason: None, first_exceedance: None };
    }
    for (offset, &value) in simulated.iter().enumerate() {
        if value > threshold {
            return DivergenceReport {
                divergent: true,
                reason: Some(DivergenceReason::ThresholdExceeded),
                first_exceedance: Some(offset as i64 + 1),
            };
        }
    }
    let tail = (simulated.len() / 10).max(2).min(simulated.len());
    let tail_slice = &simulated[simulated.len() - tail..];
    let monotone = tail_slice.windows(2).all(|w| w[1] >= w[0]);
    let grew = simulated[0] > 0.0 && simulated[simulated.len() - 1] / simulated[0] >= 10.0;
    if monotone && grew {
        return DivergenceReport {
            divergent: true,
            reason: Some(DivergenceReason::MonotoneGrowth),
            first_exceedance: None,
        };
    }
    DivergenceReport { divergent: false, reason: None, first_exceedance: None }
}
