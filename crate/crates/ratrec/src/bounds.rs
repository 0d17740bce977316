//! Invariant-interval boundedness certificates: a candidate `[m, M]` plus
//! coefficient bands is accepted when the induction inequalities hold, so
//! every solution started inside `[m, M]` stays there.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ExponentSelection, ModelError, RecurrenceSpec};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("this certificate variant requires a single term (q = {q})")]
    NotSingleTerm { q: usize },
    #[error("band is invalid: [{low}, {high}]")]
    InvalidBand { low: f64, high: f64 },
    #[error("band count {got} does not match the term count {expected}")]
    BandCountMismatch { got: usize, expected: usize },
    #[error("search box is empty or nonpositive")]
    EmptySearchBox,
    #[error("certificate was not accepted; no bounds can be derived from it")]
    NotAccepted,
    #[error("lower bound m = 0 has no reciprocal")]
    ZeroLowerBound,
}

/// Uniform bands for the coefficient sequences, per term and aggregated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBands {
    /// Lower bound on the forcing sequence (> 0).
    pub a_low: f64,
    /// Upper bound on the forcing sequence.
    pub a_high: f64,
    /// Per-term lower bounds on the ratio coefficients.
    pub b_low: Vec<f64>,
    /// Per-term upper bounds on the ratio coefficients.
    pub b_high: Vec<f64>,
}

impl CoefficientBands {
    pub fn new(
        a_low: f64,
        a_high: f64,
        b_low: Vec<f64>,
        b_high: Vec<f64>,
    ) -> Result<Self, BoundsError> {
        if !(a_low > 0.0) || !(a_high >= a_low) || !a_high.is_finite() {
            return Err(BoundsError::InvalidBand { low: a_low, high: a_high });
        }
        if b_low.len() != b_high.len() {
            return Err(BoundsError::BandCountMismatch {
                got: b_low.len(),
                expected: b_high.len(),
            });
        }
        for (&low, &high) in b_low.iter().zip(&b_high) {
            if !(low >= 0.0) || !(high >= low) || !high.is_finite() {
                return Err(BoundsError::InvalidBand { low, high });
            }
        }
        Ok(CoefficientBands { a_low, a_high, b_low, b_high })
    }

    /// Reads the bands straight off the coefficient models of a spec.
    pub fn from_spec(spec: &RecurrenceSpec) -> Self {
        let (a_low, a_high) = spec.coeff_a().band();
        let mut b_low = Vec::with_capacity(spec.q());
        let mut b_high = Vec::with_capacity(spec.q());
        for term in spec.terms() {
            let (low, high) = term.coeff_b.band();
            b_low.push(low);
            b_high.push(high);
        }
        CoefficientBands { a_low, a_high, b_low, b_high }
    }

    /// Aggregate lower bound `sum_i b_low[i]`.
    pub fn b_low_sum(&self) -> f64 {
        self.b_low.iter().sum()
    }

    /// Aggregate upper bound `sum_i b_high[i]`.
    pub fn b_high_sum(&self) -> f64 {
        self.b_high.iter().sum()
    }

    fn check_len(&self, spec: &RecurrenceSpec) -> Result<(), BoundsError> {
        if self.b_low.len() != spec.q() {
            return Err(BoundsError::BandCountMismatch {
                got: self.b_low.len(),
                expected: spec.q(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Condition is undefined for these parameters and was skipped.
    NotApplicable,
}

impl Verdict {
    fn of(holds: bool) -> Self {
        if holds {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Non-blocking: passes or was skipped.
    pub fn ok(self) -> bool {
        self != Verdict::Fail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateVariant {
    /// Single-term sandwich test with its necessary conditions.
    SingleTerm,
    /// Single-term test anchored at `m = a_low`.
    AnchoredLower,
    /// Single-term pointwise-forcing test.
    PointwiseForcing,
    /// General multi-term chain test with exponent selections.
    GeneralChain,
}

/// Evaluated certificate: the candidate interval, the per-inequality verdict
/// map keyed by condition label, and the overall acceptance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub variant: CertificateVariant,
    pub m: f64,
    pub big_m: f64,
    pub bands: CoefficientBands,
    pub selection: Option<ExponentSelection>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub accepted: bool,
}

fn validated_interval(m: f64, big_m: f64) -> Result<(), BoundsError> {
    if !(m > 0.0) {
        return Err(BoundsError::Model(ModelError::NonPositiveBound { m }));
    }
    if m > big_m {
        return Err(BoundsError::Model(ModelError::InvertedInterval { m, big_m }));
    }
    Ok(())
}

/// Single-term certificate: band consistency, `a_low <= m`, the sandwich
/// `m (1 - b_low m^(p-1) / M^r) <= a_low <= a_high <= M (1 - b_high M^(p-1) / m^r)`,
/// and the necessary conditions on `M` and `m`. The band-ratio condition
/// (key `"2.6"`) is reported but excluded from acceptance; conditions that
/// need a `1/r` power are skipped when `r <= 0`. Zero lower B-bands are the
/// extension case and simply make the skipped conditions vacuous.
pub fn check_certificate_q1(
    spec: &RecurrenceSpec,
    m: f64,
    big_m: f64,
    bands: &CoefficientBands,
) -> Result<BoundCertificate, BoundsError> {
    if spec.q() != 1 {
        return Err(BoundsError::NotSingleTerm { q: spec.q() });
    }
    bands.check_len(spec)?;
    validated_interval(m, big_m)?;
    let term = &spec.terms()[0];
    let (p, r) = (term.p, term.r);
    let b_low = bands.b_low[0];
    let b_high = bands.b_high[0];

    let mut verdicts = BTreeMap::new();
    verdicts.insert("2.2".into(), Verdict::of(bands.a_low <= bands.a_high && b_low <= b_high));
    verdicts.insert("2.3".into(), Verdict::of(bands.a_low <= m));
    let lower_lhs = m * (1.0 - b_low * m.powf(p - 1.0) / big_m.powf(r));
    verdicts.insert("2.4.lower".into(), Verdict::of(lower_lhs <= bands.a_low));
    let upper_rhs = big_m * (1.0 - b_high * big_m.powf(p - 1.0) / m.powf(r));
    verdicts.insert("2.4.upper".into(), Verdict::of(bands.a_high <= upper_rhs));
    if r > 0.0 {
        let m_floor = b_low.powf(1.0 / r) * m.powf((p - 1.0) / r);
        verdicts.insert("2.5.M".into(), Verdict::of(big_m >= m.max(m_floor)));
        let m_need = b_high.powf(1.0 / r) * big_m.powf((p - 1.0) / r);
        verdicts.insert("2.5.m".into(), Verdict::of(m >= m_need));
    } else {
        verdicts.insert("2.5.M".into(), Verdict::NotApplicable);
        verdicts.insert("2.5.m".into(), Verdict::NotApplicable);
    }
    if b_low > 0.0 {
        verdicts
            .insert("2.6".into(), Verdict::of((b_high / b_low).powf(p - 1.0) >= big_m / m));
    } else {
        verdicts.insert("2.6".into(), Verdict::NotApplicable);
    }

    let accepted = ["2.2", "2.3", "2.4.lower", "2.4.upper", "2.5.M", "2.5.m"]
        .iter()
        .all(|key| verdicts[*key].ok());
    Ok(BoundCertificate {
        variant: CertificateVariant::SingleTerm,
        m,
        big_m,
        bands: bands.clone(),
        selection: None,
        verdicts,
        accepted,
    })
}

/// Single-term certificate anchored at `m = a_low`: only an upper bound `M`
/// and a coefficient cap are needed.
pub fn check_certificate_cor22(
    spec: &RecurrenceSpec,
    big_m: f64,
    bands: &CoefficientBands,
) -> Result<BoundCertificate, BoundsError> {
    if spec.q() != 1 {
        return Err(BoundsError::NotSingleTerm { q: spec.q() });
    }
    bands.check_len(spec)?;
    let m = bands.a_low;
    validated_interval(m, big_m)?;
    let term = &spec.terms()[0];
    let (p, r) = (term.p, term.r);
    let b_high = bands.b_high[0];

    let mut verdicts = BTreeMap::new();
    let upper_rhs = big_m * (1.0 - b_high * big_m.powf(p - 1.0) / bands.a_low.powf(r));
    verdicts.insert("2.10.a".into(), Verdict::of(bands.a_high <= upper_rhs));
    verdicts
        .insert("2.10.b".into(), Verdict::of(b_high <= bands.a_low.powf(r) / big_m.powf(p - 1.0)));
    let accepted = verdicts.values().all(|v| v.ok());
    Ok(BoundCertificate {
        variant: CertificateVariant::AnchoredLower,
        m,
        big_m,
        bands: bands.clone(),
        selection: None,
        verdicts,
        accepted,
    })
}

/// Single-term certificate with the forcing sequence constrained pointwise
/// into the sandwich interval; shares the necessary conditions of the
/// single-term test but drops `a_low <= m`.
pub fn check_certificate_cor23(
    spec: &RecurrenceSpec,
    m: f64,
    big_m: f64,
    bands: &CoefficientBands,
) -> Result<BoundCertificate, BoundsError> {
    if spec.q() != 1 {
        return Err(BoundsError::NotSingleTerm { q: spec.q() });
    }
    bands.check_len(spec)?;
    validated_interval(m, big_m)?;
    let term = &spec.terms()[0];
    let (p, r) = (term.p, term.r);
    let b_low = bands.b_low[0];
    let b_high = bands.b_high[0];

    let mut verdicts = BTreeMap::new();
    let lower_lhs = m * (1.0 - b_low * m.powf(p - 1.0) / big_m.powf(r));
    verdicts.insert("2.11.lower".into(), Verdict::of(lower_lhs <= bands.a_low));
    let upper_rhs = big_m * (1.0 - b_high * big_m.powf(p - 1.0) / m.powf(r));
    verdicts.insert("2.11.upper".into(), Verdict::of(bands.a_high <= upper_rhs));
    if r > 0.0 {
        let m_floor = b_low.powf(1.0 / r) * m.powf((p - 1.0) / r);
        verdicts.insert("2.5.M".into(), Verdict::of(big_m >= m.max(m_floor)));
        let m_need = b_high.powf(1.0 / r) * big_m.powf((p - 1.0) / r);
        verdicts.insert("2.5.m".into(), Verdict::of(m >= m_need));
    } else {
        verdicts.insert("2.5.M".into(), Verdict::NotApplicable);
        verdicts.insert("2.5.m".into(), Verdict::NotApplicable);
    }
    if b_low > 0.0 {
        verdicts
            .insert("2.6".into(), Verdict::of((b_high / b_low).powf(p - 1.0) >= big_m / m));
    } else {
        verdicts.insert("2.6".into(), Verdict::NotApplicable);
    }
    let accepted = ["2.11.lower", "2.11.upper", "2.5.M", "2.5.m"]
        .iter()
        .all(|key| verdicts[*key].ok());
    Ok(BoundCertificate {
        variant: CertificateVariant::PointwiseForcing,
        m,
        big_m,
        bands: bands.clone(),
        selection: None,
        verdicts,
        accepted,
    })
}

/// General multi-term certificate. The operative acceptance condition is the
/// induction chain (key family `"2.18"`)
///
/// ```text
/// m <= a_low + b_low m^nu_p / M^mu_r <= a_high + b_high M^mu_p / m^nu_r <= M
/// ```
///
/// evaluated with the exponent selections at `(m, M)`, together with
/// `a_low <= m` (key `"2.15"`). The sandwich form (`"2.16"`) and the
/// necessary conditions (`"2.17"`) are reported but do not gate acceptance;
/// `"2.16.verbatim"` evaluates the longer printed display as-is, which can
/// only hold with a zero aggregate lower band.
pub fn check_certificate_general(
    spec: &RecurrenceSpec,
    m: f64,
    big_m: f64,
    bands: &CoefficientBands,
) -> Result<BoundCertificate, BoundsError> {
    bands.check_len(spec)?;
    validated_interval(m, big_m)?;
    let selection = spec.exponent_extremes(m, big_m)?;
    let b_low = bands.b_low_sum();
    let b_high = bands.b_high_sum();

    let lower_mid = bands.a_low + b_low * m.powf(selection.nu_p) / big_m.powf(selection.mu_r);
    let upper_mid = bands.a_high + b_high * big_m.powf(selection.mu_p) / m.powf(selection.nu_r);

    let mut verdicts = BTreeMap::new();
    verdicts.insert("2.15".into(), Verdict::of(bands.a_low <= m));
    let sandwich_lhs =
        m * (1.0 - b_low * m.powf(selection.nu_p - 1.0) / big_m.powf(selection.mu_r));
    let sandwich_rhs =
        big_m * (1.0 - b_high * big_m.powf(selection.mu_p - 1.0) / m.powf(selection.nu_r));
    verdicts.insert(
        "2.16".into(),
        Verdict::of(sandwich_lhs <= bands.a_low && bands.a_high <= sandwich_rhs),
    );
    verdicts.insert(
        "2.16.verbatim".into(),
        Verdict::of(
            sandwich_lhs <= lower_mid
                && lower_mid <= bands.a_low
                && bands.a_high <= sandwich_rhs,
        ),
    );
    if selection.mu_r > 0.0 {
        let m_floor =
            b_low.powf(1.0 / selection.mu_r) * m.powf((selection.nu_p - 1.0) / selection.mu_r);
        verdicts.insert("2.17.M".into(), Verdict::of(big_m >= m.max(m_floor)));
    } else {
        verdicts.insert("2.17.M".into(), Verdict::NotApplicable);
    }
    if selection.nu_r > 0.0 {
        let m_need =
            b_high.powf(1.0 / selection.nu_r) * big_m.powf((selection.mu_p - 1.0) / selection.nu_r);
        verdicts.insert("2.17.m".into(), Verdict::of(m >= m_need));
    } else {
        verdicts.insert("2.17.m".into(), Verdict::NotApplicable);
    }
    verdicts.insert("2.18.lower".into(), Verdict::of(m <= lower_mid));
    verdicts.insert("2.18.mid".into(), Verdict::of(lower_mid <= upper_mid));
    verdicts.insert("2.18.upper".into(), Verdict::of(upper_mid <= big_m));

    let accepted = ["2.15", "2.18.lower", "2.18.mid", "2.18.upper"]
        .iter()
        .all(|key| verdicts[*key].ok());
    Ok(BoundCertificate {
        variant: CertificateVariant::GeneralChain,
        m,
        big_m,
        bands: bands.clone(),
        selection: Some(selection),
        verdicts,
        accepted,
    })
}

/// Where to look for a certified interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub m_range: (f64, f64),
    pub big_m_range: (f64, f64),
    /// Grid resolution per axis (logarithmic spacing).
    pub per_axis: usize,
}

impl SearchBox {
    /// A box wide enough for the common regimes: `m` scans the forcing band,
    /// `M` scans up to a generous multiple of the crude one-step bound.
    pub fn from_bands(bands: &CoefficientBands) -> Self {
        let m_hi = bands.a_high.max(bands.a_low * 4.0);
        let big_m_hi = 25.0 * (bands.a_high + bands.b_high_sum().max(1.0));
        SearchBox {
            m_range: (bands.a_low, m_hi),
            big_m_range: (bands.a_high, big_m_hi),
            per_axis: 64,
        }
    }
}

fn log_grid(range: (f64, f64), n: usize) -> Vec<f64> {
    let (lo, hi) = range;
    if lo == hi || n == 1 {
        return vec![lo];
    }
    let log_lo = lo.ln();
    let step = (hi.ln() - log_lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { (log_lo + step * i as f64).exp() })
        .collect()
}

/// Deterministic grid scan for an accepted `[m, M]` maximizing `M / m`.
/// Returns `None` when no grid point is accepted.
pub fn search_certificate(
    spec: &RecurrenceSpec,
    bands: &CoefficientBands,
    search_box: &SearchBox,
) -> Result<Option<BoundCertificate>, BoundsError> {
    let (m_lo, m_hi) = search_box.m_range;
    let (big_lo, big_hi) = search_box.big_m_range;
    if !(m_lo > 0.0) || m_hi < m_lo || !(big_lo > 0.0) || big_hi < big_lo
        || search_box.per_axis == 0
    {
        return Err(BoundsError::EmptySearchBox);
    }
    let mut best: Option<BoundCertificate> = None;
    for &m in &log_grid(search_box.m_range, search_box.per_axis) {
        for &big_m in &log_grid(search_box.big_m_range, search_box.per_axis) {
            if big_m < m {
                continue;
            }
            let cert = check_certificate_general(spec, m, big_m, bands)?;
            if !cert.accepted {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => cert.big_m / cert.m > b.big_m / b.m,
            };
            if better {
                best = Some(cert);
            }
        }
    }
    Ok(best)
}

/// Certified bounds `(1/M, 1/m)` for the inverse recurrence, from an accepted
/// certificate with a positive lower bound.
pub fn inverse_bounds(cert: &BoundCertificate) -> Result<(f64, f64), BoundsError> {
    if !cert.accepted {
        return Err(BoundsError::NotAccepted);
    }
    if cert.m == 0.0 {
        return Err(BoundsError::ZeroLowerBound);
    }
    Ok((1.0 / cert.big_m, 1.0 / cert.m))
}

/// Verdict of the exponent-only boundedness criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentBoundedness {
    /// All numerator exponents lie strictly inside `(0, 1)`, so every
    /// admissible bounded start yields a bounded solution.
    Bounded,
    Inconclusive,
}

/// Bounded verdict iff `p_i` lies strictly in `(0, 1)` for every term.
pub fn boundedness_by_exponent(spec: &RecurrenceSpec) -> ExponentBoundedness {
    if spec.terms().iter().all(|t| t.p > 0.0 && t.p < 1.0) {
        ExponentBoundedness::Bounded
    } else {
        ExponentBoundedness::Inconclusive
    }
}
