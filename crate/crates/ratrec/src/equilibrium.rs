//! Equilibrium points of the limiting equation `x = A + sum_i B_i x^(p_i - r_i)`:
//! residuals, root location, structural regime classification, and interval
//! bounds derived from the scalar envelope equations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{rho_delta_of, CoefficientModel, ModelError, RecurrenceSpec};
use crate::stability::Stability;

/// Tolerance for the structural equalities (`r = p - 1`, `A + B = 1`, ...).
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Residual threshold for accepting a located root.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Relative spacing below which two located roots are merged.
pub const DEDUP_REL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("limit must be positive (A = {a})")]
    NonPositiveLimit { a: f64 },
    #[error("term {index}: coefficient limit must be finite and nonnegative (got {value})")]
    InvalidCoefficientLimit { index: usize, value: f64 },
    #[error("coefficient model for {which} declares no limit")]
    NoDeclaredLimit { which: String },
    #[error("evaluation point must be positive (x = {x})")]
    NonPositivePoint { x: f64 },
    #[error("search range is empty or nonpositive: [{low}, {high}]")]
    EmptyRange { low: f64, high: f64 },
    #[error("first-order condition requires all delays equal to 1 (found {delay})")]
    DelayNotOne { delay: u32 },
}

/// One term of the limiting equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitTerm {
    pub p: f64,
    pub r: f64,
    pub ell: u32,
    pub s: u32,
    /// Limit of the term coefficient sequence.
    pub b: f64,
}

/// Constant-limit parameterization used for equilibrium and stability work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSpec {
    a: f64,
    terms: Vec<LimitTerm>,
}

impl LimitSpec {
    pub fn new(a: f64, terms: Vec<LimitTerm>) -> Result<Self, EquilibriumError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(EquilibriumError::NonPositiveLimit { a });
        }
        for (index, term) in terms.iter().enumerate() {
            if !term.b.is_finite() || term.b < 0.0 {
                return Err(EquilibriumError::InvalidCoefficientLimit { index, value: term.b });
            }
        }
        Ok(LimitSpec { a, terms })
    }

    /// Extracts the declared limits from a spec. Fails when any coefficient
    /// model is banded without a limit.
    pub fn from_spec(spec: &RecurrenceSpec) -> Result<Self, EquilibriumError> {
        let a = declared_limit(spec.coeff_a(), "A")?;
        let terms = spec
            .terms()
            .iter()
            .enumerate()
            .map(|(i, t)| {
                Ok(LimitTerm {
                    p: t.p,
                    r: t.r,
                    ell: t.ell,
                    s: t.s,
                    b: declared_limit(&t.coeff_b, &format!("B[{i}]"))?,
                })
            })
            .collect::<Result<Vec<_>, EquilibriumError>>()?;
        LimitSpec::new(a, terms)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn terms(&self) -> &[LimitTerm] {
        &self.terms
    }

    pub fn q(&self) -> usize {
        self.terms.len()
    }

    pub fn b_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.b).sum()
    }

    pub fn window_len(&self) -> usize {
        self.terms.iter().map(|t| t.ell.max(t.s)).max().unwrap_or(1) as usize
    }

    pub fn rho_delta(&self) -> (f64, f64) {
        rho_delta_of(self.terms.iter().map(|t| (t.p, t.r)))
    }
}

fn declared_limit(model: &CoefficientModel, which: &str) -> Result<f64, EquilibriumError> {
    model
        .limit()
        .ok_or_else(|| EquilibriumError::NoDeclaredLimit { which: which.to_string() })
}

/// `g(x) = x - A - sum_i B_i x^(p_i - r_i)`; a root of `g` is an equilibrium.
pub fn equilibrium_residual(limits: &LimitSpec, x: f64) -> Result<f64, EquilibriumError> {
    if !(x > 0.0) {
        return Err(EquilibriumError::NonPositivePoint { x });
    }
    let mut g = x - limits.a;
    for term in &limits.terms {
        g -= term.b * x.powf(term.p - term.r);
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    /// Located by sign-change scan and bisection.
    InteriorRoot,
    /// Emitted by the linear closed form `A / (1 - sum B_i)`.
    ClosedForm,
    /// The point `x = 1` arising from `A + sum B_i = 1`.
    UnitPoint,
}

/// A located equilibrium with its residual and, once classified, a local
/// stability verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub x: f64,
    pub residual: f64,
    pub kind: PointKind,
    pub stability: Option<Stability>,
}

/// Locates roots of the equilibrium residual on `[max(range.0, A), range.1]`.
///
/// When every term satisfies `p = r + 1` the residual is linear and the
/// closed form is emitted directly; otherwise a logarithmic grid of
/// `grid_points` cells is scanned for sign changes and each bracket is
/// bisected down to machine width. Roots closer than a relative `1e-8` are
/// merged. Double roots inside one grid cell are missed at this resolution.
pub fn find_equilibria(
    limits: &LimitSpec,
    range: (f64, f64),
    grid_points: usize,
) -> Result<Vec<EquilibriumPoint>, EquilibriumError> {
    let (range_low, range_high) = range;
    if !(range_low > 0.0) || !(range_high > range_low) {
        return Err(EquilibriumError::EmptyRange { low: range_low, high: range_high });
    }

    let unit_flag = (limits.a + limits.b_sum() - 1.0).abs() <= STRUCTURE_TOL;
    let all_q1 = limits
        .terms
        .iter()
        .all(|t| (t.r - (t.p - 1.0)).abs() <= STRUCTURE_TOL);
    if all_q1 {
        // Linear residual g(x) = (1 - sum B) x - A.
        let b_sum = limits.b_sum();
        if b_sum < 1.0 {
            let x = limits.a / (1.0 - b_sum);
            let residual = equilibrium_residual(limits, x)?;
            let kind = if unit_flag && (x - 1.0).abs() <= 1e-9 {
                PointKind::UnitPoint
            } else {
                PointKind::ClosedForm
            };
            return Ok(vec![EquilibriumPoint { x, residual, kind, stability: None }]);
        }
        return Ok(Vec::new());
    }

    let lo = range_low.max(limits.a * (1.0 - 1e-9));
    let hi = range_high;
    if hi <= lo {
        return Ok(Vec::new());
    }

    let n = grid_points.max(8);
    let log_lo = lo.ln();
    let log_step = (hi.ln() - log_lo) / n as f64;
    let node = |i: usize| -> f64 {
        if i == n {
            hi
        } else {
            (log_lo + log_step * i as f64).exp()
        }
    };

    let mut roots: Vec<f64> = Vec::new();
    let mut prev_x = node(0);
    let mut prev_g = equilibrium_residual(limits, prev_x)?;
    for i in 1..=n {
        let x = node(i);
        let g = equilibrium_residual(limits, x)?;
        if prev_g == 0.0 {
            roots.push(prev_x);
        } else if prev_g.signum() != g.signum() && g != 0.0 {
            roots.push(bisect(limits, prev_x, x, prev_g));
        }
        prev_x = x;
        prev_g = g;
    }
    if prev_g == 0.0 {
        roots.push(prev_x);
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|b, a| (*b - *a).abs() <= DEDUP_REL_TOL * b.abs().max(1.0));

    let mut points = Vec::with_capacity(roots.len());
    for x in roots {
        let residual = equilibrium_residual(limits, x)?;
        if residual.abs() > RESIDUAL_TOL {
            continue;
        }
        let kind = if unit_flag && (x - 1.0).abs() <= 1e-9 {
            PointKind::UnitPoint
        } else {
            PointKind::InteriorRoot
        };
        points.push(EquilibriumPoint { x, residual, kind, stability: None });
    }
    Ok(points)
}

fn bisect(limits: &LimitSpec, mut lo: f64, mut hi: f64, g_lo: f64) -> f64 {
    let sign_lo = g_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = equilibrium_residual(limits, mid).unwrap_or(f64::NAN);
        if g_mid == 0.0 {
            return mid;
        }
        if g_mid.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Index partition by the sign of `r_i - (p_i - 1)` and the structural flags
/// that follow from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// Indices with `r_i = p_i - 1`.
    pub q1: Vec<usize>,
    /// Indices with `r_i > p_i - 1`.
    pub q2: Vec<usize>,
    /// Indices with `r_i < p_i - 1`.
    pub q3: Vec<usize>,
    pub flags: StructureFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureFlags {
    /// Zero is the unique equilibrium of the inverse recurrence.
    pub zero_equilibrium_of_inverse: bool,
    /// The closed form `A / (1 - sum B_i)` gives the unique equilibrium.
    pub unique_closed_form: bool,
    /// No equilibrium point exists.
    pub nonexistence: bool,
    /// `x = 1` is an equilibrium.
    pub unit_equilibrium: bool,
    /// Unbounded solutions may occur (zero attracts the inverse recurrence).
    pub unbounded_risk: bool,
    /// Solutions cannot settle: no equilibrium to converge to.
    pub oscillatory_regime: bool,
}

/// Partitions term indices by `r_i - (p_i - 1)` (tolerance `1e-12`) and
/// derives the existence/uniqueness/nonexistence flags.
pub fn classify_structure(limits: &LimitSpec) -> StructureReport {
    let mut q1 = Vec::new();
    let mut q2 = Vec::new();
    let mut q3 = Vec::new();
    for (i, term) in limits.terms.iter().enumerate() {
        let gap = term.r - (term.p - 1.0);
        if gap.abs() <= STRUCTURE_TOL {
            q1.push(i);
        } else if gap > 0.0 {
            q2.push(i);
        } else {
            q3.push(i);
        }
    }

    let b_q1: f64 = q1.iter().map(|&i| limits.terms[i].b).sum();
    let mass_q3: f64 = q3
        .iter()
        .map(|&i| {
            let t = limits.terms[i];
            t.b * limits.a.powf((t.r - t.p + 1.0).abs())
        })
        .sum();

    let zero_eq = q3.is_empty() && !q1.is_empty() && (b_q1 - 1.0).abs() <= STRUCTURE_TOL;
    let nonexistence = b_q1 + mass_q3 > 1.0 && !zero_eq;
    let flags = StructureFlags {
        zero_equilibrium_of_inverse: zero_eq,
        unique_closed_form: q1.len() == limits.q() && limits.b_sum() < 1.0,
        nonexistence,
        unit_equilibrium: (limits.a + limits.b_sum() - 1.0).abs() <= STRUCTURE_TOL,
        unbounded_risk: zero_eq,
        oscillatory_regime: nonexistence,
    };
    StructureReport { q1, q2, q3, flags }
}

/// Interval enclosure for the equilibrium set, from the fixed points of the
/// scalar envelope equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalBounds {
    pub rho: f64,
    pub delta: f64,
    /// Root of `w = A + B min(w^delta, w^rho)`; present when `delta < 0`.
    pub omega: Option<f64>,
    /// Root of `v = A + B max(v^rho, v^delta)`; present when `rho < 0`.
    pub v: Option<f64>,
    /// `max(A, omega)` — every equilibrium is at least this.
    pub lower: f64,
    /// `v` when available; equilibria are confined to `[lower, upper]`.
    pub upper: Option<f64>,
    /// Analytic cap on `omega` (branching on `A >= 1`).
    pub omega_cap: Option<f64>,
    /// Analytic cap on `v`.
    pub v_cap: Option<f64>,
    /// Alternative power-form cap on the limit superior; carried alongside
    /// `v_cap` without arbitrating between the two displayed forms.
    pub limsup_cap_pow: Option<f64>,
}

/// Computes the envelope fixed points and the resulting enclosure
/// `[max(A, omega), v]`. A side with nonnegative extreme exponent has no
/// envelope fixed point and is reported as unavailable.
pub fn equilibrium_interval_bounds(limits: &LimitSpec) -> IntervalBounds {
    let (rho, delta) = limits.rho_delta();
    let a = limits.a;
    let b = limits.b_sum();

    let omega = if delta < 0.0 {
        Some(solve_envelope_fixed_point(a, b, delta, rho, EnvelopeKind::Lower))
    } else {
        None
    };
    let v = if rho < 0.0 {
        Some(solve_envelope_fixed_point(a, b, delta, rho, EnvelopeKind::Upper))
    } else {
        None
    };

    let (omega_cap, v_cap, limsup_cap_pow) = if a >= 1.0 {
        (
            (delta < 0.0).then(|| a + b / a.powf(delta.abs())),
            (rho < 0.0).then(|| a + b / a.powf(rho.abs())),
            (rho < 0.0).then(|| (a + b / a.powf(rho.abs())).powf(rho.abs() + 1.0)),
        )
    } else {
        (
            (delta < 0.0).then(|| a + b * (a.powf(-delta.abs())).min(a.powf(rho))),
            (rho < 0.0).then(|| a + b * (a.powf(-delta.abs())).min(a.powf(-rho.abs()))),
            (rho < 0.0).then(|| (a + b / a.powf(rho.abs())).powf(rho.abs() + 1.0)),
        )
    };

    IntervalBounds {
        rho,
        delta,
        omega,
        v,
        lower: omega.map_or(a, |w| a.max(w)),
        upper: v,
        omega_cap,
        v_cap,
        limsup_cap_pow,
    }
}

enum EnvelopeKind {
    Lower,
    Upper,
}

/// Root of `t = A + B g(t)` where `g` is `min` (lower) or `max` (upper) of
/// `t^delta` and `t^rho`. The root is unique and sits in
/// `[A, A + B g(A)]`; plain bisection is robust here.
fn solve_envelope_fixed_point(a: f64, b: f64, delta: f64, rho: f64, kind: EnvelopeKind) -> f64 {
    if b == 0.0 {
        return a;
    }
    let g = |t: f64| -> f64 {
        let lo = t.powf(delta);
        let hi = t.powf(rho);
        match kind {
            EnvelopeKind::Lower => lo.min(hi),
            EnvelopeKind::Upper => lo.max(hi),
        }
    };
    let h = |t: f64| t - a - b * g(t);
    let mut lo = a;
    let mut hi = a + b * g(a);
    if h(hi) < 0.0 {
        // Guard for rounding at the analytic cap.
        let mut expand = hi * 1.0001 + 1e-12;
        for _ in 0..64 {
            if h(expand) >= 0.0 {
                break;
            }
            expand *= 2.0;
        }
        hi = expand;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// First-order stability test for the all-lags-one case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderStability {
    pub stable: bool,
    /// `|e|^(1/(|e|+1))`: the point must exceed this.
    pub threshold: f64,
    /// `A + B / A^|e|`: analytic cap the point must not exceed.
    pub cap: f64,
    /// True when `cap >= point > threshold`.
    pub bracket_ok: bool,
}

/// Checks `point^(|e|+1) > |e|`, the first-order local stability condition at
/// an envelope fixed point when every lag equals one.
pub fn first_order_stability_condition(
    limits: &LimitSpec,
    point: f64,
    exponent: f64,
) -> Result<FirstOrderStability, EquilibriumError> {
    for term in &limits.terms {
        if term.ell != 1 {
            return Err(EquilibriumError::DelayNotOne { delay: term.ell });
        }
        if term.s != 1 {
            return Err(EquilibriumError::DelayNotOne { delay: term.s });
        }
    }
    if !(point > 0.0) {
        return Err(EquilibriumError::NonPositivePoint { x: point });
    }
    let e = exponent.abs();
    let stable = point.powf(e + 1.0) > e;
    let threshold = e.powf(1.0 / (e + 1.0));
    let cap = limits.a + limits.b_sum() / limits.a.powf(e);
    Ok(FirstOrderStability { stable, threshold, cap, bracket_ok: cap >= point && point > threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn one_term(a: f64, b: f64, p: f64, r: f64) -> LimitSpec {
        LimitSpec::new(a, vec![LimitTerm { p, r, ell: 1, s: 1, b }]).unwrap()
    }

    #[test]
    fn residual_vanishes_at_unit_point() {
        let limits = one_term(0.5, 0.5, 0.7, 1.3);
        assert_eq!(equilibrium_residual(&limits, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn residual_vanishes_at_quadratic_root() {
        let limits = one_term(2.0, 1.0, 0.0, 1.0);
        let root = 1.0 + 2.0_f64.sqrt();
        assert_abs_diff_eq!(equilibrium_residual(&limits, root).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn residual_constant_term_case() {
        let limits = one_term(1.0, 1.0, 1.0, 1.0);
        assert_eq!(equilibrium_residual(&limits, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn residual_rejects_nonpositive_point() {
        let limits = one_term(1.0, 1.0, 1.0, 1.0);
        assert!(matches!(
            equilibrium_residual(&limits, 0.0),
            Err(EquilibriumError::NonPositivePoint { .. })
        ));
    }

    #[test]
    fn closed_form_when_all_terms_linear() {
        let limits = one_term(1.0, 0.5, 1.0, 0.0);
        let points = find_equilibria(&limits, (1e-3, 1e3), 512).unwrap();
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].x, 2.0);
        assert_eq!(points[0].kind, PointKind::ClosedForm);
    }

    #[test]
    fn quadratic_root_located() {
        let limits = one_term(2.0, 1.0, 0.0, 1.0);
        let points = find_equilibria(&limits, (1e-3, 1e3), 4096).unwrap();
        assert_eq!(points.len(), 1);
        assert_relative_eq!(points[0].x, 1.0 + 2.0_f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn nonexistence_returns_empty() {
        let limits = one_term(1.0, 2.0, 1.0, 0.0);
        let points = find_equilibria(&limits, (1e-3, 1e6), 4096).unwrap();
        assert!(points.is_empty());
    }

    #[test]
    fn empty_range_rejected() {
        let limits = one_term(1.0, 1.0, 1.0, 1.0);
        assert!(matches!(
            find_equilibria(&limits, (0.0, 1.0), 64),
            Err(EquilibriumError::EmptyRange { .. })
        ));
        assert!(matches!(
            find_equilibria(&limits, (2.0, 1.0), 64),
            Err(EquilibriumError::EmptyRange { .. })
        ));
    }

    #[test]
    fn structure_zero_equilibrium_of_inverse() {
        let limits = one_term(1.0, 1.0, 1.0, 0.0);
        let report = classify_structure(&limits);
        assert_eq!(report.q1, vec![0]);
        assert!(report.flags.zero_equilibrium_of_inverse);
        assert!(report.flags.unbounded_risk);
        assert!(!report.flags.nonexistence);
    }

    #[test]
    fn structure_nonexistence_and_oscillation() {
        let limits = one_term(1.0, 2.0, 1.0, 0.0);
        let report = classify_structure(&limits);
        assert!(report.flags.nonexistence);
        assert!(report.flags.oscillatory_regime);
        assert!(!report.flags.zero_equilibrium_of_inverse);
    }

    #[test]
    fn structure_unit_equilibrium() {
        let limits = one_term(0.5, 0.5, 0.3, 0.9);
        let report = classify_structure(&limits);
        assert!(report.flags.unit_equilibrium);
        let points = find_equilibria(&limits, (1e-3, 1e3), 4096).unwrap();
        assert!(points.iter().any(|p| (p.x - 1.0).abs() <= 1e-9));
    }

    #[test]
    fn structure_partition_is_disjoint_cover() {
        let limits = LimitSpec::new(
            1.0,
            vec![
                LimitTerm { p: 1.0, r: 0.0, ell: 1, s: 1, b: 0.2 },
                LimitTerm { p: 0.5, r: 1.0, ell: 1, s: 1, b: 0.3 },
                LimitTerm { p: 2.0, r: 0.5, ell: 1, s: 1, b: 0.1 },
            ],
        )
        .unwrap();
        let report = classify_structure(&limits);
        let mut all: Vec<usize> =
            report.q1.iter().chain(&report.q2).chain(&report.q3).copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2]);
        assert_eq!(report.q1, vec![0]);
        assert_eq!(report.q2, vec![1]);
        assert_eq!(report.q3, vec![2]);
    }

    #[test]
    fn interval_bounds_quadratic_case() {
        let limits = one_term(2.0, 1.0, 0.0, 1.0);
        let bounds = equilibrium_interval_bounds(&limits);
        let root = 1.0 + 2.0_f64.sqrt();
        assert_relative_eq!(bounds.omega.unwrap(), root, max_relative = 1e-12);
        assert_relative_eq!(bounds.v.unwrap(), root, max_relative = 1e-12);
        assert_eq!(bounds.omega_cap, Some(2.5));
        assert_eq!(bounds.v_cap, Some(2.5));
        assert!(bounds.v_cap.unwrap() >= root);
        assert_eq!(bounds.lower, bounds.omega.unwrap().max(2.0));
    }

    #[test]
    fn interval_bounds_sides_unavailable_when_exponents_nonnegative() {
        let limits = one_term(2.0, 1.0, 1.0, 0.5);
        let bounds = equilibrium_interval_bounds(&limits);
        assert_eq!(bounds.omega, None);
        assert_eq!(bounds.v, None);
        assert_eq!(bounds.lower, 2.0);

        // delta < 0 <= rho: only the lower side exists.
        let limits = LimitSpec::new(
            2.0,
            vec![
                LimitTerm { p: 0.5, r: 1.0, ell: 1, s: 1, b: 0.5 },
                LimitTerm { p: 1.0, r: 0.5, ell: 1, s: 1, b: 0.5 },
            ],
        )
        .unwrap();
        let bounds = equilibrium_interval_bounds(&limits);
        assert!(bounds.omega.is_some());
        assert_eq!(bounds.v, None);
    }

    #[test]
    fn interval_bounds_equal_exponents_coincide() {
        let limits = one_term(1.3, 0.8, 0.2, 0.9);
        let bounds = equilibrium_interval_bounds(&limits);
        assert_relative_eq!(
            bounds.omega.unwrap(),
            bounds.v.unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn interval_bounds_small_forcing_branch() {
        let limits = one_term(0.5, 0.4, 0.0, 1.0);
        let bounds = equilibrium_interval_bounds(&limits);
        let omega = bounds.omega.unwrap();
        assert!(omega >= 0.5);
        // Cap for A < 1 evaluates min(1/A^|delta|, A^rho) directly.
        let cap = 0.5 + 0.4 * (0.5_f64.powf(-1.0)).min(0.5_f64.powf(-1.0));
        assert_relative_eq!(bounds.omega_cap.unwrap(), cap, max_relative = 1e-15);
        assert!(omega <= bounds.omega_cap.unwrap() + 1e-12);
    }

    #[test]
    fn first_order_condition_examples() {
        let limits = one_term(2.0, 1.0, 0.0, 1.0);
        let v = 1.0 + 2.0_f64.sqrt();
        let verdict = first_order_stability_condition(&limits, v, 1.0).unwrap();
        assert!(verdict.stable);
        assert!(verdict.bracket_ok);

        let boundary = first_order_stability_condition(&limits, 1.0, 1.0).unwrap();
        assert!(!boundary.stable);

        let sub = first_order_stability_condition(&limits, 0.6, 0.5).unwrap();
        assert!(!sub.stable);
    }

    #[test]
    fn first_order_condition_requires_unit_delays() {
        let limits =
            LimitSpec::new(2.0, vec![LimitTerm { p: 1.0, r: 1.0, ell: 2, s: 1, b: 1.0 }]).unwrap();
        assert!(matches!(
            first_order_stability_condition(&limits, 3.0, 1.0),
            Err(EquilibriumError::DelayNotOne { delay: 2 })
        ));
    }

    #[test]
    fn located_points_satisfy_lower_bound_and_residual() {
        let limits = LimitSpec::new(
            1.2,
            vec![
                LimitTerm { p: 0.3, r: 1.0, ell: 1, s: 1, b: 0.7 },
                LimitTerm { p: 0.1, r: 0.6, ell: 1, s: 1, b: 0.4 },
            ],
        )
        .unwrap();
        let points = find_equilibria(&limits, (1e-3, 1e3), 4096).unwrap();
        assert!(!points.is_empty());
        for point in &points {
            assert!(point.x >= limits.a() - 1e-9);
            assert!(point.residual.abs() <= RESIDUAL_TOL);
        }
        let bounds = equilibrium_interval_bounds(&limits);
        for point in &points {
            assert!(point.x >= bounds.lower - 1e-9);
            if let Some(upper) = bounds.upper {
                assert!(point.x <= upper + 1e-9);
            }
        }
    }
}
