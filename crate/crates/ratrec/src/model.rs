//! Recurrence parameterization, admissibility of initial windows, and the
//! exponent-extreme selections used by the interval certificates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building or querying a recurrence model.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("term list is empty")]
    NoTerms,
    #[error("term {index}: delay must be a positive integer (got {value})")]
    NonPositiveDelay { index: usize, value: i64 },
    #[error("term {index}: exponent is not finite")]
    NonFiniteExponent { index: usize },
    #[error("coefficient band is invalid: [{low}, {high}]")]
    InvalidBand { low: f64, high: f64 },
    #[error("forcing coefficient band must stay strictly positive (low = {low})")]
    NonPositiveForcingBand { low: f64 },
    #[error("convergent coefficient: |ratio| must be < 1 (got {ratio})")]
    DivergentRatio { ratio: f64 },
    #[error("convergent coefficient: limit {limit} lies outside its band [{low}, {high}]")]
    LimitOutsideBand { limit: f64, low: f64, high: f64 },
    #[error("every B-coefficient is identically zero")]
    AllTermsZero,
    #[error("initial window has {got} values but the delays require {needed}")]
    WindowMismatch { got: usize, needed: usize },
    #[error("initial value at k = {index} is not finite or negative ({value})")]
    InvalidInitialValue { index: i64, value: f64 },
    #[error("initial value at k = {index} is zero; the reciprocal window is undefined")]
    ZeroInitialValue { index: i64 },
    #[error("interval bound must be positive (m = {m})")]
    NonPositiveBound { m: f64 },
    #[error("interval is inverted: m = {m} > M = {big_m}")]
    InvertedInterval { m: f64, big_m: f64 },
}

/// Model for one time-varying coefficient sequence.
///
/// Every variant carries an explicit band `[low, high]` that is guaranteed to
/// contain all realized values. `Banded` draws uniformly from its band with a
/// seeded generator, so experiments are reproducible; `Convergent` follows the
/// geometric rule `limit + amplitude * ratio^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientModel {
    Constant { value: f64 },
    Convergent { limit: f64, amplitude: f64, ratio: f64 },
    Banded { low: f64, high: f64 },
}

impl CoefficientModel {
    pub fn constant(value: f64) -> Self {
        CoefficientModel::Constant { value }
    }

    pub fn banded(low: f64, high: f64) -> Self {
        CoefficientModel::Banded { low, high }
    }

    /// Inclusive bounds `[low, high]` covering every realized value.
    pub fn band(&self) -> (f64, f64) {
        match *self {
            CoefficientModel::Constant { value } => (value, value),
            CoefficientModel::Convergent { limit, amplitude, ratio } => {
                // Extremes are attained at k = 0 and (for alternating ratio) k = 1.
                let first = limit + amplitude;
                let second = limit + amplitude * ratio;
                let low = limit.min(first).min(second);
                let high = limit.max(first).max(second);
                (low, high)
            }
            CoefficientModel::Banded { low, high } => (low, high),
        }
    }

    /// Declared asymptotic limit, when the model has one.
    pub fn limit(&self) -> Option<f64> {
        match *self {
            CoefficientModel::Constant { value } => Some(value),
            CoefficientModel::Convergent { limit, .. } => Some(limit),
            CoefficientModel::Banded { .. } => None,
        }
    }

    /// True when the model can only ever produce zero.
    pub fn is_identically_zero(&self) -> bool {
        let (low, high) = self.band();
        low == 0.0 && high == 0.0
    }

    fn validate(&self, require_positive: bool) -> Result<(), ModelError> {
        let (low, high) = self.band();
        if !low.is_finite() || !high.is_finite() || low > high {
            return Err(ModelError::InvalidBand { low, high });
        }
        if let CoefficientModel::Convergent { limit, ratio, .. } = *self {
            if ratio.abs() >= 1.0 || !ratio.is_finite() {
                return Err(ModelError::DivergentRatio { ratio });
            }
            if limit < low || limit > high {
                return Err(ModelError::LimitOutsideBand { limit, low, high });
            }
        }
        if require_positive && low <= 0.0 {
            return Err(ModelError::NonPositiveForcingBand { low });
        }
        if !require_positive && low < 0.0 {
            return Err(ModelError::InvalidBand { low, high });
        }
        Ok(())
    }
}

/// One ratio term `B[i][k] * x[k+1-ell]^p / x[k+1-s]^r` of the recurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    /// Numerator exponent.
    pub p: f64,
    /// Denominator exponent.
    pub r: f64,
    /// Numerator lag (>= 1).
    pub ell: u32,
    /// Denominator lag (>= 1).
    pub s: u32,
    /// Coefficient model for this term (nonnegative band).
    pub coeff_b: CoefficientModel,
}

/// Validated parameterization of the full recurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceSpec {
    coeff_a: CoefficientModel,
    terms: Vec<Term>,
}

impl RecurrenceSpec {
    /// Builds a spec, enforcing all structural invariants: at least one term,
    /// positive integer delays, a strictly positive forcing band and at least
    /// one B-coefficient that is not identically zero.
    pub fn new(coeff_a: CoefficientModel, terms: Vec<Term>) -> Result<Self, ModelError> {
        if terms.is_empty() {
            return Err(ModelError::NoTerms);
        }
        coeff_a.validate(true)?;
        for (index, term) in terms.iter().enumerate() {
            if term.ell < 1 {
                return Err(ModelError::NonPositiveDelay { index, value: term.ell as i64 });
            }
            if term.s < 1 {
                return Err(ModelError::NonPositiveDelay { index, value: term.s as i64 });
            }
            if !term.p.is_finite() || !term.r.is_finite() {
                return Err(ModelError::NonFiniteExponent { index });
            }
            term.coeff_b.validate(false)?;
        }
        if terms.iter().all(|t| t.coeff_b.is_identically_zero()) {
            return Err(ModelError::AllTermsZero);
        }
        Ok(RecurrenceSpec { coeff_a, terms })
    }

    /// Convenience constructor for constant coefficients: `terms` are
    /// `(p, r, ell, s, b)` tuples.
    pub fn with_constant_coefficients(
        a: f64,
        terms: &[(f64, f64, u32, u32, f64)],
    ) -> Result<Self, ModelError> {
        let terms = terms
            .iter()
            .map(|&(p, r, ell, s, b)| Term {
                p,
                r,
                ell,
                s,
                coeff_b: CoefficientModel::constant(b),
            })
            .collect();
        RecurrenceSpec::new(CoefficientModel::constant(a), terms)
    }

    pub fn q(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn coeff_a(&self) -> &CoefficientModel {
        &self.coeff_a
    }

    /// Largest numerator lag.
    pub fn max_ell(&self) -> u32 {
        self.terms.iter().map(|t| t.ell).max().unwrap_or(1)
    }

    /// Largest denominator lag.
    pub fn max_s(&self) -> u32 {
        self.terms.iter().map(|t| t.s).max().unwrap_or(1)
    }

    /// Number of initial values the recurrence needs: `max(max ell, max s)`.
    pub fn window_len(&self) -> usize {
        self.max_ell().max(self.max_s()) as usize
    }

    /// Index of the oldest initial value, `min(1 - ell, 1 - s)`.
    pub fn start_index(&self) -> i64 {
        1 - self.window_len() as i64
    }

    /// `(rho, delta) = (max_i(p_i - r_i), min_i(p_i - r_i))`.
    pub fn rho_delta(&self) -> (f64, f64) {
        rho_delta_of(self.terms.iter().map(|t| (t.p, t.r)))
    }

    /// Checks the positivity pattern of an initial window against the delays.
    ///
    /// The window must be strictly positive at every index a denominator can
    /// reach (`x[1-s] ..= x[0]`) and nonnegative on the older, numerator-only
    /// indices that exist when `max ell > max s`.
    pub fn check_admissible(
        &self,
        init: &InitialConditions,
    ) -> Result<AdmissibilityReport, ModelError> {
        let needed = self.window_len();
        if init.len() != needed {
            return Err(ModelError::WindowMismatch { got: init.len(), needed });
        }
        let strict_len = (self.max_s() as usize).min(needed);
        for (offset, &value) in init.values().iter().enumerate().rev() {
            // offset 0 is the oldest value x[1-L]; x[0] sits at the end.
            let index = init.start_index() + offset as i64;
            let recency = needed - 1 - offset; // 0 for x[0]
            if recency < strict_len {
                if value <= 0.0 {
                    return Ok(AdmissibilityReport::violation(
                        index,
                        ViolationKind::NonPositiveInStrictZone,
                    ));
                }
            } else if value < 0.0 {
                return Ok(AdmissibilityReport::violation(index, ViolationKind::Negative));
            }
        }
        Ok(AdmissibilityReport::admissible())
    }

    /// Selects the four extreme exponents for an interval `[m, M]`.
    ///
    /// The selections are the direct arg-extrema of the four power families
    /// `M^(p-1)`, `m^(p-1)`, `m^r`, `M^r`; ties are broken by smallest term
    /// index. Each selection carries the case tag of the sign/threshold
    /// configuration it came from.
    pub fn exponent_extremes(&self, m: f64, big_m: f64) -> Result<ExponentSelection, ModelError> {
        if !(m > 0.0) {
            return Err(ModelError::NonPositiveBound { m });
        }
        if m > big_m {
            return Err(ModelError::InvertedInterval { m, big_m });
        }
        let ps: Vec<f64> = self.terms.iter().map(|t| t.p).collect();
        let rs: Vec<f64> = self.terms.iter().map(|t| t.r).collect();

        let mu_p = arg_extreme(&ps, |p| big_m.powf(p - 1.0), Extreme::Max);
        let nu_p = arg_extreme(&ps, |p| m.powf(p - 1.0), Extreme::Min);
        let mu_r = arg_extreme(&rs, |r| m.powf(r), Extreme::Max);
        let nu_r = arg_extreme(&rs, |r| big_m.powf(r), Extreme::Min);

        Ok(ExponentSelection {
            mu_p,
            nu_p,
            mu_r,
            nu_r,
            cases: SelectionCases {
                mu_p: case_mu_p(&ps, big_m),
                nu_p: case_nu_p(&ps, m),
                mu_r: case_mu_r(&rs, m),
                nu_r: case_nu_r(&rs, big_m),
            },
        })
    }

    /// Case-table counterpart of [`RecurrenceSpec::exponent_extremes`].
    ///
    /// Resolves each selection from the sign decomposition of the exponent
    /// sets and the position of `m`/`M` relative to 1, without evaluating the
    /// powers of every term. Used as an independent cross-check of the direct
    /// arg-extrema.
    pub fn exponent_extremes_by_case(
        &self,
        m: f64,
        big_m: f64,
    ) -> Result<ExponentSelection, ModelError> {
        if !(m > 0.0) {
            return Err(ModelError::NonPositiveBound { m });
        }
        if m > big_m {
            return Err(ModelError::InvertedInterval { m, big_m });
        }
        let ps: Vec<f64> = self.terms.iter().map(|t| t.p).collect();
        let rs: Vec<f64> = self.terms.iter().map(|t| t.r).collect();

        let (mu_p, mu_p_case) = table_mu_p(&ps, big_m);
        let (nu_p, nu_p_case) = table_nu_p(&ps, m);
        let (mu_r, mu_r_case) = table_mu_r(&rs, m);
        let (nu_r, nu_r_case) = table_nu_r(&rs, big_m);

        Ok(ExponentSelection {
            mu_p,
            nu_p,
            mu_r,
            nu_r,
            cases: SelectionCases {
                mu_p: mu_p_case,
                nu_p: nu_p_case,
                mu_r: mu_r_case,
                nu_r: nu_r_case,
            },
        })
    }
}

pub(crate) fn rho_delta_of(exponents: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let mut rho = f64::NEG_INFINITY;
    let mut delta = f64::INFINITY;
    for (p, r) in exponents {
        let diff = p - r;
        rho = rho.max(diff);
        delta = delta.min(diff);
    }
    (rho, delta)
}

/// Initial window `x[1-L] ..= x[0]`, stored oldest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    values: Vec<f64>,
}

impl InitialConditions {
    /// Values ordered from the oldest index `1 - len` up to `x[0]`.
    pub fn new(values: Vec<f64>) -> Result<Self, ModelError> {
        let start = 1 - values.len() as i64;
        for (offset, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(ModelError::InvalidInitialValue {
                    index: start + offset as i64,
                    value,
                });
            }
        }
        Ok(InitialConditions { values })
    }

    /// Window filled with one constant value.
    pub fn constant(value: f64, len: usize) -> Result<Self, ModelError> {
        InitialConditions::new(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start_index(&self) -> i64 {
        1 - self.values.len() as i64
    }

    /// Elementwise reciprocal window, for the inverse recurrence duality.
    pub fn reciprocal(&self) -> Result<Self, ModelError> {
        let start = self.start_index();
        let mut values = Vec::with_capacity(self.values.len());
        for (offset, &value) in self.values.iter().enumerate() {
            if value == 0.0 {
                return Err(ModelError::ZeroInitialValue { index: start + offset as i64 });
            }
            values.push(1.0 / value);
        }
        InitialConditions::new(values)
    }
}

/// Outcome of the admissibility check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// First violated window index and what went wrong there.
    pub violation: Option<(i64, ViolationKind)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A denominator-reachable index is zero or negative.
    NonPositiveInStrictZone,
    /// An older, numerator-only index is negative.
    Negative,
}

impl AdmissibilityReport {
    fn admissible() -> Self {
        AdmissibilityReport { admissible: true, violation: None }
    }

    fn violation(index: i64, kind: ViolationKind) -> Self {
        AdmissibilityReport { admissible: false, violation: Some((index, kind)) }
    }
}

/// The four extreme exponents selected for an interval `[m, M]`, together
/// with the case-table tags that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSelection {
    /// Maximizes `M^(p-1)`.
    pub mu_p: f64,
    /// Minimizes `m^(p-1)`.
    pub nu_p: f64,
    /// Maximizes `m^r`.
    pub mu_r: f64,
    /// Minimizes `M^r`.
    pub nu_r: f64,
    pub cases: SelectionCases,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionCases {
    pub mu_p: CaseTag,
    pub nu_p: CaseTag,
    pub mu_r: CaseTag,
    pub nu_r: CaseTag,
}

/// Case labels for the sign/threshold configurations of the selection table.
///
/// The naming follows the four selection families: `I*` selects via `M` over
/// the numerator exponents, `II*` via `m`, and `III*`/`IV*` cover the
/// all-below-threshold configurations of the same families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum CaseTag {
    I1,
    I2,
    I3,
    I4,
    I5,
    III1,
    III2,
    III3,
    III4,
    II1,
    II2,
    II4,
    II5,
    II6,
    IV1,
    IV2,
    IV3,
    IV4,
}

enum Extreme {
    Max,
    Min,
}

/// Smallest-index arg-extreme of `key` over `values`; returns the value.
fn arg_extreme(values: &[f64], key: impl Fn(f64) -> f64, extreme: Extreme) -> f64 {
    let mut best = values[0];
    let mut best_key = key(values[0]);
    for &v in &values[1..] {
        let k = key(v);
        let better = match extreme {
            Extreme::Max => k > best_key,
            Extreme::Min => k < best_key,
        };
        if better {
            best = v;
            best_key = k;
        }
    }
    best
}

fn split_p(ps: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let plus: Vec<f64> = ps.iter().copied().filter(|&p| p >= 1.0).collect();
    let minus: Vec<f64> = ps.iter().copied().filter(|&p| p < 1.0).collect();
    (plus, minus)
}

fn split_r(rs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let plus: Vec<f64> = rs.iter().copied().filter(|&r| r >= 0.0).collect();
    let minus: Vec<f64> = rs.iter().copied().filter(|&r| r < 0.0).collect();
    (plus, minus)
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

// The selection table below resolves each extreme from the sign decomposition
// alone. Two of the printed mixed-set branches contradict the defining
// arg-extrema (they route the minimum to the wrong sign class); those
// branches are routed to the class whose selection the direct definition
// actually attains, keeping the tag of the rule applied.

fn case_mu_p(ps: &[f64], big_m: f64) -> CaseTag {
    let (plus, minus) = split_p(ps);
    match (plus.is_empty(), minus.is_empty(), big_m >= 1.0) {
        (false, _, true) => CaseTag::I1,
        (false, true, false) => CaseTag::I2,
        (false, false, false) => CaseTag::I3,
        (true, _, true) => CaseTag::III1,
        (true, _, false) => CaseTag::III2,
    }
}

fn table_mu_p(ps: &[f64], big_m: f64) -> (f64, CaseTag) {
    let (plus, minus) = split_p(ps);
    let tag = case_mu_p(ps, big_m);
    let value = match tag {
        CaseTag::I1 => max_of(&plus),
        CaseTag::I2 => min_of(&plus),
        CaseTag::I3 => min_of(&minus),
        CaseTag::III1 => max_of(&minus),
        CaseTag::III2 => min_of(&minus),
        _ => unreachable!(),
    };
    (value, tag)
}

fn case_nu_p(ps: &[f64], m: f64) -> CaseTag {
    let (plus, minus) = split_p(ps);
    match (plus.is_empty(), minus.is_empty(), m >= 1.0) {
        (false, true, true) => CaseTag::II1,
        (_, false, true) => CaseTag::IV1,
        (false, _, false) => CaseTag::II2,
        (true, false, false) => CaseTag::IV2,
        (true, true, _) => unreachable!("term list is nonempty"),
    }
}

fn table_nu_p(ps: &[f64], m: f64) -> (f64, CaseTag) {
    let (plus, minus) = split_p(ps);
    let tag = case_nu_p(ps, m);
    let value = match tag {
        CaseTag::II1 => min_of(&plus),
        CaseTag::IV1 => min_of(&minus),
        CaseTag::II2 => max_of(&plus),
        CaseTag::IV2 => max_of(&minus),
        _ => unreachable!(),
    };
    (value, tag)
}

fn case_mu_r(rs: &[f64], m: f64) -> CaseTag {
    let (plus, minus) = split_r(rs);
    match (plus.is_empty(), minus.is_empty(), m >= 1.0) {
        (false, _, true) => CaseTag::II4,
        (false, true, false) => CaseTag::II5,
        (false, false, false) => CaseTag::II6,
        (true, _, true) => CaseTag::IV3,
        (true, _, false) => CaseTag::IV4,
    }
}

fn table_mu_r(rs: &[f64], m: f64) -> (f64, CaseTag) {
    let (plus, minus) = split_r(rs);
    let tag = case_mu_r(rs, m);
    let value = match tag {
        CaseTag::II4 => max_of(&plus),
        CaseTag::II5 => min_of(&plus),
        CaseTag::II6 => min_of(&minus),
        CaseTag::IV3 => max_of(&minus),
        CaseTag::IV4 => min_of(&minus),
        _ => unreachable!(),
    };
    (value, tag)
}

fn case_nu_r(rs: &[f64], big_m: f64) -> CaseTag {
    let (plus, minus) = split_r(rs);
    match (plus.is_empty(), minus.is_empty(), big_m >= 1.0) {
        (false, true, true) => CaseTag::I4,
        (_, false, true) => CaseTag::III3,
        (false, _, false) => CaseTag::I5,
        (true, false, false) => CaseTag::III4,
        (true, true, _) => unreachable!("term list is nonempty"),
    }
}

fn table_nu_r(rs: &[f64], big_m: f64) -> (f64, CaseTag) {
    let (plus, minus) = split_r(rs);
    let tag = case_nu_r(rs, big_m);
    let value = match tag {
        CaseTag::I4 => min_of(&plus),
        CaseTag::III3 => min_of(&minus),
        CaseTag::I5 => max_of(&plus),
        CaseTag::III4 => max_of(&minus),
        _ => unreachable!(),
    };
    (value, tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amleh_spec(alpha: f64) -> RecurrenceSpec {
        RecurrenceSpec::with_constant_coefficients(alpha, &[(1.0, 1.0, 2, 1, 1.0)]).unwrap()
    }

    #[test]
    fn builds_amleh_form_spec() {
        let spec = amleh_spec(2.0);
        assert_eq!(spec.q(), 1);
        assert_eq!(spec.window_len(), 2);
        assert_eq!(spec.start_index(), -1);
    }

    #[test]
    fn rejects_zero_delay() {
        let err = RecurrenceSpec::with_constant_coefficients(1.0, &[(1.0, 1.0, 0, 1, 1.0)])
            .unwrap_err();
        assert!(matches!(err, ModelError::NonPositiveDelay { index: 0, value: 0 }));
    }

    #[test]
    fn builds_two_term_banded_spec() {
        let spec = RecurrenceSpec::new(
            CoefficientModel::banded(1.0, 2.0),
            vec![
                Term { p: 0.5, r: 1.0, ell: 1, s: 2, coeff_b: CoefficientModel::banded(0.0, 1.0) },
                Term { p: 1.0, r: 0.0, ell: 2, s: 1, coeff_b: CoefficientModel::banded(0.0, 1.0) },
            ],
        )
        .unwrap();
        assert_eq!(spec.q(), 2);
        assert_eq!(spec.window_len(), 2);
    }

    #[test]
    fn rejects_empty_terms_and_bad_bands() {
        assert!(matches!(
            RecurrenceSpec::new(CoefficientModel::constant(1.0), vec![]),
            Err(ModelError::NoTerms)
        ));
        assert!(matches!(
            RecurrenceSpec::with_constant_coefficients(0.0, &[(1.0, 1.0, 1, 1, 1.0)]),
            Err(ModelError::NonPositiveForcingBand { .. })
        ));
        assert!(matches!(
            RecurrenceSpec::with_constant_coefficients(1.0, &[(1.0, 1.0, 1, 1, 0.0)]),
            Err(ModelError::AllTermsZero)
        ));
    }

    #[test]
    fn convergent_band_contains_limit() {
        let model = CoefficientModel::Convergent { limit: 2.0, amplitude: 0.5, ratio: -0.5 };
        let (low, high) = model.band();
        assert!(low <= 2.0 && 2.0 <= high);
        assert_eq!(high, 2.5);
        assert_eq!(low, 1.75);

        let err = CoefficientModel::Convergent { limit: 2.0, amplitude: 0.5, ratio: 1.5 }
            .validate(true)
            .unwrap_err();
        assert!(matches!(err, ModelError::DivergentRatio { .. }));
    }

    #[test]
    fn admissibility_allows_zero_in_numerator_zone() {
        // ell = 2, s = 1: x[-1] only feeds numerators, so zero is allowed there.
        let spec = amleh_spec(2.0);
        let init = InitialConditions::new(vec![0.0, 1.0]).unwrap();
        let report = spec.check_admissible(&init).unwrap();
        assert!(report.admissible);
    }

    #[test]
    fn admissibility_requires_positive_denominator_feeds() {
        let spec = RecurrenceSpec::with_constant_coefficients(1.0, &[(1.0, 1.0, 1, 1, 1.0)])
            .unwrap();
        let init = InitialConditions::new(vec![0.0]).unwrap();
        let report = spec.check_admissible(&init).unwrap();
        assert!(!report.admissible);
        assert_eq!(report.violation, Some((0, ViolationKind::NonPositiveInStrictZone)));
    }

    #[test]
    fn admissibility_accepts_all_positive_window() {
        let spec = RecurrenceSpec::with_constant_coefficients(1.0, &[(1.0, 1.0, 2, 2, 1.0)])
            .unwrap();
        let init = InitialConditions::constant(0.5, 2).unwrap();
        assert!(spec.check_admissible(&init).unwrap().admissible);
    }

    #[test]
    fn admissibility_rejects_short_window() {
        let spec = amleh_spec(2.0);
        let init = InitialConditions::new(vec![1.0]).unwrap();
        assert!(matches!(
            spec.check_admissible(&init),
            Err(ModelError::WindowMismatch { got: 1, needed: 2 })
        ));
    }

    #[test]
    fn exponent_extremes_prefers_large_p_when_m_above_one() {
        let spec = RecurrenceSpec::with_constant_coefficients(
            1.0,
            &[(2.0, 1.0, 1, 1, 1.0), (0.5, 1.0, 1, 1, 1.0)],
        )
        .unwrap();
        let sel = spec.exponent_extremes(1.0, 2.0).unwrap();
        assert_eq!(sel.mu_p, 2.0);
        assert_eq!(sel.cases.mu_p, CaseTag::I1);
    }

    #[test]
    fn exponent_extremes_singleton_collapses() {
        let spec = amleh_spec(2.0);
        let sel = spec.exponent_extremes(0.7, 3.0).unwrap();
        assert_eq!(sel.mu_p, 1.0);
        assert_eq!(sel.nu_p, 1.0);
        assert_eq!(sel.mu_r, 1.0);
        assert_eq!(sel.nu_r, 1.0);
    }

    #[test]
    fn exponent_extremes_small_m_prefers_small_r() {
        // 0.5^1 > 0.5^3, so the maximum of m^r is attained at r = 1.
        let spec = RecurrenceSpec::with_constant_coefficients(
            1.0,
            &[(1.0, 1.0, 1, 1, 1.0), (1.0, 3.0, 1, 1, 1.0)],
        )
        .unwrap();
        let sel = spec.exponent_extremes(0.5, 2.0).unwrap();
        assert_eq!(sel.mu_r, 1.0);
        assert_eq!(sel.cases.mu_r, CaseTag::II5);
    }

    #[test]
    fn exponent_extremes_rejects_nonpositive_m() {
        let spec = amleh_spec(2.0);
        assert!(matches!(
            spec.exponent_extremes(0.0, 1.0),
            Err(ModelError::NonPositiveBound { .. })
        ));
        assert!(matches!(
            spec.exponent_extremes(2.0, 1.0),
            Err(ModelError::InvertedInterval { .. })
        ));
    }

    #[test]
    fn rho_delta_examples() {
        let spec = RecurrenceSpec::with_constant_coefficients(1.0, &[(1.0, 1.0, 1, 1, 1.0)])
            .unwrap();
        assert_eq!(spec.rho_delta(), (0.0, 0.0));

        let spec = RecurrenceSpec::with_constant_coefficients(
            1.0,
            &[(1.0, 0.0, 1, 1, 1.0), (0.5, 1.0, 1, 1, 1.0)],
        )
        .unwrap();
        assert_eq!(spec.rho_delta(), (1.0, -0.5));

        let spec = RecurrenceSpec::with_constant_coefficients(1.0, &[(1.0, 2.0, 1, 1, 1.0)])
            .unwrap();
        assert_eq!(spec.rho_delta(), (-1.0, -1.0));
    }

    #[test]
    fn mixed_sign_exponents_route_to_the_attaining_class() {
        // nu_r minimizes M^r; with M > 1 the minimum sits in the negative class.
        let spec = RecurrenceSpec::with_constant_coefficients(
            1.0,
            &[(1.0, 1.0, 1, 1, 1.0), (1.0, -1.0, 1, 1, 1.0)],
        )
        .unwrap();
        let direct = spec.exponent_extremes(1.5, 2.0).unwrap();
        let table = spec.exponent_extremes_by_case(1.5, 2.0).unwrap();
        assert_eq!(direct.nu_r, -1.0);
        assert_eq!(table.nu_r, -1.0);
        assert_eq!(table.cases.nu_r, CaseTag::III3);

        // With M < 1 the minimum of M^r flips to the nonnegative class.
        let direct = spec.exponent_extremes(0.25, 0.5).unwrap();
        let table = spec.exponent_extremes_by_case(0.25, 0.5).unwrap();
        assert_eq!(direct.nu_r, 1.0);
        assert_eq!(table.nu_r, 1.0);
        assert_eq!(table.cases.nu_r, CaseTag::I5);
    }

    #[test]
    fn reciprocal_window_rejects_zero() {
        let init = InitialConditions::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(init.reciprocal(), Err(ModelError::ZeroInitialValue { index: -1 })));
    }
}
