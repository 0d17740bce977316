//! Linearized characteristic polynomials at equilibria, Schur stability via
//! companion-matrix eigenvalues cross-checked by a Jury-type reduction, and a
//! sampled Rouché comparison test.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{EquilibriumPoint, LimitSpec, STRUCTURE_TOL};

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("evaluation point must be positive (x = {x})")]
    NonPositivePoint { x: f64 },
    #[error("polynomial coefficient is not finite")]
    NonFiniteCoefficient,
    #[error("envelope side unavailable: extreme exponent {exponent} is nonnegative")]
    SideUnavailable { exponent: f64 },
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("reference polynomial is not Schur stable (max root modulus {max_root_modulus})")]
    ReferenceNotStable { max_root_modulus: f64 },
    #[error(
        "internal consistency failure: eigenvalue verdict {eigen:?} but Jury table says stable = {jury}"
    )]
    MethodDisagreement { eigen: Stability, jury: bool },
}

/// Which lag each exponent multiplies in the linearized coefficients.
///
/// `Gradient` pairs the numerator exponent with the numerator lag and the
/// denominator exponent with the denominator lag — the Jacobian of the
/// update. `Swapped` pairs them the other way around. Both coincide whenever
/// `p_i = r_i` or all lags agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagPairing {
    Gradient,
    Swapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Equilibrium (or envelope fixed point) the polynomial was built at.
    pub x: f64,
    pub pairing: LagPairing,
}

/// Monic real polynomial `z^n + c_1 z^(n-1) + ... + c_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPolynomial {
    /// Trailing coefficients `c_1 ..= c_n` (the leading 1 is implicit).
    coeffs: Vec<f64>,
    pub provenance: Option<Provenance>,
}

impl CharPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, StabilityError> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(StabilityError::NonFiniteCoefficient);
        }
        Ok(CharPolynomial { coeffs, provenance: None })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Trailing coefficients, highest power first.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// All coefficients including the leading 1, highest power first.
    pub fn monic_coeffs(&self) -> Vec<f64> {
        let mut full = Vec::with_capacity(self.coeffs.len() + 1);
        full.push(1.0);
        full.extend_from_slice(&self.coeffs);
        full
    }

    /// Coefficients rendered with 17 significant digits, highest power first.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.monic_coeffs().iter().map(|c| format!("{c:.16e}")).collect()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for &c in &self.coeffs {
            acc = acc * z + c;
        }
        acc
    }

    /// All roots, as eigenvalues of the companion matrix. Roots at the
    /// origin are deflated exactly first, which also keeps the eigenvalue
    /// iteration away from singular companions.
    pub fn roots(&self) -> Vec<Complex64> {
        let mut trailing = self.coeffs.clone();
        let mut roots = Vec::with_capacity(self.degree());
        while trailing.last() == Some(&0.0) {
            trailing.pop();
            roots.push(Complex64::new(0.0, 0.0));
        }
        let n = trailing.len();
        if n == 0 {
            return roots;
        }
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for (j, &c) in trailing.iter().enumerate() {
            companion[(0, j)] = -c;
        }
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        roots.extend(companion.complex_eigenvalues().iter().copied());
        roots
    }
}

/// Builds the characteristic polynomial of the linearization at `x`:
/// degree `n = max(max ell, max s)` with the coefficient of each delayed
/// increment equal to `B_i x^(p_i - r_i - 1)` times the matching exponent.
pub fn characteristic_polynomial(
    limits: &LimitSpec,
    x: f64,
    pairing: LagPairing,
) -> Result<CharPolynomial, StabilityError> {
    if !(x > 0.0) {
        return Err(StabilityError::NonPositivePoint { x });
    }
    let n = limits.window_len();
    let mut coeffs = vec![0.0; n];
    for term in limits.terms() {
        let factor = term.b * x.powf(term.p - term.r - 1.0);
        accumulate_pair(&mut coeffs, factor, term.p, term.r, term.ell, term.s, pairing);
    }
    let mut poly = CharPolynomial::new(coeffs)?;
    poly.provenance = Some(Provenance { x, pairing });
    Ok(poly)
}

/// Adds `-factor * (p z^(n-ell) - r z^(n-s))` (gradient pairing) or
/// `+factor * (p z^(n-s) - r z^(n-ell))` (swapped pairing) into the trailing
/// coefficients of a degree-`n` monic polynomial.
fn accumulate_pair(
    coeffs: &mut [f64],
    factor: f64,
    p: f64,
    r: f64,
    ell: u32,
    s: u32,
    pairing: LagPairing,
) {
    // coeffs[i-1] multiplies z^(n-i); a lag d contributes at i = d.
    match pairing {
        LagPairing::Gradient => {
            coeffs[ell as usize - 1] -= factor * p;
            coeffs[s as usize - 1] += factor * r;
        }
        LagPairing::Swapped => {
            coeffs[s as usize - 1] += factor * p;
            coeffs[ell as usize - 1] -= factor * r;
        }
    }
}

/// Which envelope fixed point a family of polynomials is built at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeSide {
    /// The lower envelope point (extreme exponent `delta`).
    Lower,
    /// The upper envelope point (extreme exponent `rho`).
    Upper,
}

/// Builds one polynomial per term attaining the side's extreme exponent,
/// each of degree `max(ell_j, s_j)` with coefficient scale
/// `point^(e - 1) * B_i` summed over all terms.
///
/// `point` is the envelope fixed point for that side; passing `None` reports
/// the side as unavailable (its extreme exponent is nonnegative, so no
/// envelope fixed point exists).
pub fn envelope_polynomials(
    limits: &LimitSpec,
    side: EnvelopeSide,
    point: Option<f64>,
    pairing: LagPairing,
) -> Result<Vec<CharPolynomial>, StabilityError> {
    let (rho, delta) = limits.rho_delta();
    let extreme = match side {
        EnvelopeSide::Lower => delta,
        EnvelopeSide::Upper => rho,
    };
    let point = point.ok_or(StabilityError::SideUnavailable { exponent: extreme })?;
    if !(point > 0.0) {
        return Err(StabilityError::NonPositivePoint { x: point });
    }
    let scale: f64 = limits
        .terms()
        .iter()
        .map(|t| point.powf(extreme - 1.0) * t.b)
        .sum();

    let mut polys = Vec::new();
    for term in limits.terms() {
        if (term.p - term.r - extreme).abs() > STRUCTURE_TOL {
            continue;
        }
        let n = term.ell.max(term.s) as usize;
        let mut coeffs = vec![0.0; n];
        accumulate_pair(&mut coeffs, scale, term.p, term.r, term.ell, term.s, pairing);
        let mut poly = CharPolynomial::new(coeffs)?;
        poly.provenance = Some(Provenance { x: point, pairing });
        polys.push(poly);
    }
    Ok(polys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictMethod {
    Eigenvalue,
    Jury,
    Rouche,
}

/// Outcome of the Jury-table cross-check run alongside the eigenvalue method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JuryCrossCheck {
    Agrees,
    /// A reduction row degenerated; the eigenvalue verdict stands alone.
    Degenerate,
    /// Not compared: the eigenvalue verdict sits inside the margin band.
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stability: Stability,
    pub max_root_modulus: f64,
    pub method: VerdictMethod,
    pub margin_band: f64,
    pub jury: JuryCrossCheck,
}

/// Decides Schur stability from companion-matrix eigenvalues, with a
/// three-way verdict: root moduli within `margin_band` of the unit circle
/// are reported as marginal rather than forced to a side. A Jury-type
/// reduction is computed as a cross-check; a hard disagreement outside the
/// margin band is an internal error.
pub fn schur_stable(
    poly: &CharPolynomial,
    margin_band: f64,
) -> Result<StabilityVerdict, StabilityError> {
    if poly.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(StabilityError::NonFiniteCoefficient);
    }
    if poly.degree() == 0 {
        return Ok(StabilityVerdict {
            stability: Stability::Stable,
            max_root_modulus: 0.0,
            method: VerdictMethod::Eigenvalue,
            margin_band,
            jury: JuryCrossCheck::Skipped,
        });
    }
    let max_root_modulus = poly
        .roots()
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    let stability = if max_root_modulus < 1.0 - margin_band {
        Stability::Stable
    } else if max_root_modulus > 1.0 + margin_band {
        Stability::Unstable
    } else {
        Stability::Marginal
    };

    let jury = match (stability, jury_is_stable(poly.coeffs())) {
        (Stability::Marginal, _) => JuryCrossCheck::Skipped,
        (_, None) => JuryCrossCheck::Degenerate,
        (Stability::Stable, Some(true)) | (Stability::Unstable, Some(false)) => {
            JuryCrossCheck::Agrees
        }
        (eigen, Some(jury)) => {
            return Err(StabilityError::MethodDisagreement { eigen, jury });
        }
    };

    Ok(StabilityVerdict {
        stability,
        max_root_modulus,
        method: VerdictMethod::Eigenvalue,
        margin_band,
        jury,
    })
}

/// Jury/Schur-Cohn test through the reflection-coefficient reduction: the
/// polynomial is Schur iff every reflection coefficient has modulus < 1.
/// Returns `None` when a reduction step degenerates (a coefficient lands on
/// the unit circle within `1e-14`).
pub fn jury_is_stable(trailing: &[f64]) -> Option<bool> {
    let n = trailing.len();
    if n == 0 {
        return Some(true);
    }
    // a holds [1, c_1, ..., c_m] for the current degree m.
    let mut a: Vec<f64> = Vec::with_capacity(n + 1);
    a.push(1.0);
    a.extend_from_slice(trailing);
    let mut m = n;
    while m > 0 {
        let k = a[m];
        if (k.abs() - 1.0).abs() < 1e-14 {
            return None;
        }
        if k.abs() > 1.0 {
            return Some(false);
        }
        let denom = 1.0 - k * k;
        let prev = a.clone();
        for j in 1..m {
            a[j] = (prev[j] - k * prev[m - j]) / denom;
        }
        m -= 1;
        a.truncate(m + 1);
    }
    Some(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoucheVerdict {
    /// The deviation stays strictly below the reference on every sample.
    StableByComparison,
    /// The sampled condition failed somewhere; nothing is concluded.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoucheOutcome {
    pub verdict: RoucheVerdict,
    /// Smallest relative margin `(|Tref| - |T - Tref|) / |Tref|` over the samples.
    pub worst_margin: f64,
    pub samples: usize,
}

/// Sampled Rouché comparison against a known-stable reference of equal
/// degree: if `|T - Tref| < |Tref|` on the whole unit circle, `T` has the
/// same number of zeros inside as `Tref`, hence is Schur stable. The circle
/// is sampled at `samples` equispaced points with a relative slack of
/// `1e-12`; the verdict is a sufficiency statement only.
pub fn rouche_compare(
    poly: &CharPolynomial,
    reference: &CharPolynomial,
    samples: usize,
) -> Result<RoucheOutcome, StabilityError> {
    if poly.degree() != reference.degree() {
        return Err(StabilityError::DegreeMismatch {
            left: poly.degree(),
            right: reference.degree(),
        });
    }
    let ref_verdict = schur_stable(reference, 1e-8)?;
    if ref_verdict.stability != Stability::Stable {
        return Err(StabilityError::ReferenceNotStable {
            max_root_modulus: ref_verdict.max_root_modulus,
        });
    }
    let samples = samples.max(8);
    let mut worst_margin = f64::INFINITY;
    let mut ok = true;
    for j in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
        let z = Complex64::new(theta.cos(), theta.sin());
        let reference_mag = reference.eval(z).norm();
        let deviation_mag = (poly.eval(z) - reference.eval(z)).norm();
        let margin = (reference_mag - deviation_mag) / reference_mag;
        worst_margin = worst_margin.min(margin);
        if deviation_mag > reference_mag * (1.0 - 1e-12) {
            ok = false;
        }
    }
    Ok(RoucheOutcome {
        verdict: if ok { RoucheVerdict::StableByComparison } else { RoucheVerdict::Inconclusive },
        worst_margin,
        samples,
    })
}

/// Classifies each equilibrium through its characteristic polynomial and
/// splits the set into locally asymptotically stable points and the rest
/// (unstable and marginal points land together).
pub fn classify_equilibria(
    limits: &LimitSpec,
    points: &[EquilibriumPoint],
    margin_band: f64,
) -> Result<(Vec<EquilibriumPoint>, Vec<EquilibriumPoint>), StabilityError> {
    let mut stable = Vec::new();
    let mut unstable = Vec::new();
    for point in points {
        let poly = characteristic_polynomial(limits, point.x, LagPairing::Gradient)?;
        let verdict = schur_stable(&poly, margin_band)?;
        let mut point = point.clone();
        point.stability = Some(verdict.stability);
        match verdict.stability {
            Stability::Stable => stable.push(point),
            _ => unstable.push(point),
        }
    }
    Ok((stable, unstable))
}
