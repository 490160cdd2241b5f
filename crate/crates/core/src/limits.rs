//! Limit objects of the nearly-unstable least-squares estimator.
//!
//! Two regimes, by the boundary point `(alpha, beta)` with `|alpha| + |beta| = 1`:
//!
//! * interior (`0 < |alpha| < 1`): `s (theta_hat - theta_m)` converges to a centred
//!   normal with the rank-one covariance `|alpha||beta| adj(Psi)`;
//! * boundary (`|alpha|` in `{0, 1}`): with rate `s m^(1/2) |gamma^2 - delta^2|^(-1/4)`
//!   the limit covariance is `Theta^-1`, `Theta = (1/4)[[1, theta], [theta, 1]]`.

use serde::{Deserialize, Serialize};

use crate::covariance::{regressor_correlation, rho_corr, sigma_sq};
use crate::error::{Error, Result};
use crate::mat2::Matrix2;
use crate::model::{BoundaryPoint, CaseTag, ModelParams, NearlyUnstableDesign};

pub use crate::mat2::{invert_spd2, sqrt_spd2};

/// Relative disagreement between the omega probes above which omega is
/// reported as not settled.
pub const OMEGA_SETTLE_TOL: f64 = 1e-3;

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `[[1, sgn(ab)], [sgn(ab), 1]]`.
pub fn psi_matrix(bp: BoundaryPoint) -> Matrix2 {
    Matrix2::symmetric(1.0, sign(bp.alpha() * bp.beta()), 1.0)
}

/// Adjugate of [`psi_matrix`].
pub fn psi_adjugate(bp: BoundaryPoint) -> Matrix2 {
    psi_matrix(bp).adjugate()
}

/// `2^(9/2) / (15 sqrt(pi |a| (1 - |a|)))`.
pub fn sigma_alpha_sq(alpha: f64) -> Result<f64> {
    let a = alpha.abs();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::OutOfRange(format!("sigma_alpha^2 needs 0 < |alpha| < 1, got {alpha}")));
    }
    Ok(2f64.powf(4.5) / (15.0 * (std::f64::consts::PI * a * (1.0 - a)).sqrt()))
}

fn ratio_term(coef: f64, num: f64, den: f64) -> Result<f64> {
    if coef == 0.0 {
        return Ok(0.0);
    }
    if den == 0.0 {
        if num == 0.0 {
            return Err(Error::Indeterminate);
        }
        return Ok(sign(coef * num) * f64::INFINITY);
    }
    Ok(coef * num / den)
}

/// `alpha gamma / delta + beta delta / gamma`, infinite when the active denominator vanishes.
pub fn omega_n(bp: BoundaryPoint, gamma: f64, delta: f64) -> Result<f64> {
    let v = ratio_term(bp.alpha(), gamma, delta)? + ratio_term(bp.beta(), delta, gamma)?;
    if v.is_nan() {
        return Err(Error::Indeterminate);
    }
    Ok(v)
}

/// `-(alpha + beta) sgn(omega) / (|omega| + sqrt(omega^2 - 1))`, zero at infinite omega.
pub fn theta_scalar(bp: BoundaryPoint, omega: f64) -> Result<f64> {
    if omega.is_nan() || omega.abs() < 1.0 {
        return Err(Error::OutOfRange(format!("theta needs |omega| >= 1, got {omega}")));
    }
    if omega.is_infinite() {
        return Ok(0.0);
    }
    let w = omega.abs();
    Ok(-(bp.alpha() + bp.beta()) * sign(omega) / (w + (w * w - 1.0).sqrt()))
}

/// `(1/4) [[1, theta], [theta, 1]]`.
pub fn theta_matrix(theta: f64) -> Result<Matrix2> {
    if !(theta.abs() <= 1.0) {
        return Err(Error::OutOfRange(format!("Theta needs |theta| <= 1, got {theta}")));
    }
    Ok(Matrix2::symmetric(0.25, 0.25 * theta, 0.25))
}

/// `Theta^-1 = (4 / (1 - theta^2)) [[1, -theta], [-theta, 1]]`.
pub fn theta_inverse(theta: f64) -> Result<Matrix2> {
    invert_spd2(&theta_matrix(theta)?)
}

/// The theorem's rate and limit covariance for one design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub design: NearlyUnstableDesign,
    pub case_tag: CaseTag,
    /// Limit covariance of `rate * (theta_hat - theta_m)`. When `normalized_only`
    /// is set it is instead the identity law of the normalized error.
    pub covariance: Matrix2,
    pub singular: bool,
    /// `|omega| = 1`: `Theta` is singular and only the normalized form is offered.
    pub normalized_only: bool,
    /// Limit of `omega_m` (boundary case), taken at the larger probe index.
    #[serde(with = "ext_real", default)]
    pub omega: Option<f64>,
    /// `omega_m` at the probe index and at four times it.
    #[serde(with = "ext_real_pair", default)]
    pub omega_probes: Option<[f64; 2]>,
    pub omega_settled: bool,
    pub theta: Option<f64>,
    pub m_probe: u64,
}

impl LimitLaw {
    /// Interior: `s`. Boundary: `s m^(1/2) |gamma_m^2 - delta_m^2|^(-1/4)`.
    pub fn rate(&self, m: u64, s: u64) -> Result<f64> {
        rate(&self.design, m, s)
    }

    /// `Theta_{omega_m}^(1/2)`, the normalizer making `rate * Theta^(1/2) (theta_hat - theta_m)`
    /// asymptotically standard normal (boundary case).
    pub fn normalizer(&self, m: u64) -> Result<Matrix2> {
        if self.case_tag != CaseTag::Boundary {
            return Err(Error::OutOfRange("normalized form only exists in the boundary case".into()));
        }
        let d = &self.design;
        let omega_m = omega_n(d.boundary, d.gamma_at(m), d.delta_at(m))?;
        sqrt_spd2(&theta_matrix(theta_scalar(d.boundary, omega_m)?)?)
    }
}

pub fn rate(design: &NearlyUnstableDesign, m: u64, s: u64) -> Result<f64> {
    let s = s as f64;
    match design.case_tag {
        CaseTag::Interior => Ok(s),
        CaseTag::Boundary => {
            let spread = gap(design, m);
            if spread == 0.0 {
                return Err(Error::RateUndefined(m));
            }
            Ok(s * (m as f64).sqrt() * spread.powf(-0.25))
        }
    }
}

/// `|gamma_m^2 - delta_m^2|`.
fn gap(design: &NearlyUnstableDesign, m: u64) -> f64 {
    let (g, d) = (design.gamma_at(m), design.delta_at(m));
    (g * g - d * d).abs()
}

/// `|gamma_m| + |delta_m|`.
fn spread(design: &NearlyUnstableDesign, m: u64) -> f64 {
    design.gamma_at(m).abs() + design.delta_at(m).abs()
}

pub fn limit_law(design: &NearlyUnstableDesign, m_probe: u64) -> Result<LimitLaw> {
    if m_probe == 0 {
        return Err(Error::OutOfRange("probe index must be >= 1".into()));
    }
    let bp = design.boundary;
    match design.case_tag {
        CaseTag::Interior => Ok(LimitLaw {
            design: *design,
            case_tag: CaseTag::Interior,
            covariance: psi_adjugate(bp).scale(bp.alpha().abs() * bp.beta().abs()),
            singular: true,
            normalized_only: false,
            omega: None,
            omega_probes: None,
            omega_settled: true,
            theta: None,
            m_probe,
        }),
        CaseTag::Boundary => {
            rate(design, m_probe, 1)?;
            let probe = |m: u64| omega_n(bp, design.gamma_at(m), design.delta_at(m));
            let (w1, w2) = (probe(m_probe)?, probe(4 * m_probe)?);
            let settled = if w1.is_infinite() || w2.is_infinite() {
                w1 == w2
            } else {
                (w1 - w2).abs() <= OMEGA_SETTLE_TOL * w1.abs().max(w2.abs())
            };
            let theta = theta_scalar(bp, w2)?;
            let normalized_only = w2.abs() == 1.0;
            let covariance = if normalized_only {
                Matrix2::identity()
            } else {
                theta_inverse(theta)?
            };
            Ok(LimitLaw {
                design: *design,
                case_tag: CaseTag::Boundary,
                covariance,
                singular: normalized_only,
                normalized_only,
                omega: Some(w2),
                omega_probes: Some([w1, w2]),
                omega_settled: settled,
                theta: Some(theta),
                m_probe,
            })
        }
    }
}

/// The statistic whose divergence the theorem assumes:
/// interior `s m^(-1/2) (|gamma|+|delta|)^(1/2)`, boundary `s m^-1 |gamma^2-delta^2|^(1/2)`.
pub fn condition_statistic(design: &NearlyUnstableDesign, m: u64, s: u64) -> f64 {
    let (mf, sf) = (m as f64, s as f64);
    match design.case_tag {
        CaseTag::Interior => sf * spread(design, m).sqrt() / mf.sqrt(),
        CaseTag::Boundary => sf * gap(design, m).sqrt() / mf,
    }
}

/// Expected normal-equation matrix `E[B]` over a window of sum `s`:
/// `(s(s+1)/2) sigma^2 [[1, D], [D, 1]]` with `D = R(1,-1) / sigma^2`.
pub fn expected_b(p: ModelParams, s: u64) -> Result<Matrix2> {
    if s == 0 {
        return Err(Error::OutOfRange("window sum must be >= 1".into()));
    }
    let s2 = sigma_sq(p)?;
    let d = regressor_correlation(p)?;
    let n = (s * (s + 1) / 2) as f64;
    Ok(Matrix2::symmetric(n * s2, n * s2 * d, n * s2))
}

/// Scale making `B` converge: interior `s^-2 m^(-1/2) (|gamma|+|delta|)^(1/2)`,
/// boundary `s^-2 m^-1 |gamma^2-delta^2|^(1/2)`.
pub fn information_scale(design: &NearlyUnstableDesign, m: u64, s: u64) -> f64 {
    condition_statistic(design, m, s) / (s as f64).powi(3)
}

/// Limit of the scaled `B` (also the limit covariance of the scaled score):
/// interior `(32|alpha||beta|)^(-1/2) Psi`, boundary `Theta`.
pub fn information_limit(design: &NearlyUnstableDesign, m_probe: u64) -> Result<Matrix2> {
    let bp = design.boundary;
    match design.case_tag {
        CaseTag::Interior => {
            let c = (32.0 * (bp.alpha() * bp.beta()).abs()).powf(-0.5);
            Ok(psi_matrix(bp).scale(c))
        }
        CaseTag::Boundary => {
            let law = limit_law(design, m_probe)?;
            theta_matrix(law.theta.unwrap_or(0.0))
        }
    }
}

/// Scale for the score: interior `s^-1 m^(-1/4) (|gamma|+|delta|)^(1/4)`,
/// boundary `s^-1 m^(-1/2) |gamma^2-delta^2|^(1/4)`.
pub fn score_scale(design: &NearlyUnstableDesign, m: u64, s: u64) -> f64 {
    information_scale(design, m, s).sqrt()
}

/// Scale for `det B` in the interior case: `s^-4 m^(-1/2) (|gamma|+|delta|)^(1/2)`.
pub fn det_scale(design: &NearlyUnstableDesign, m: u64, s: u64) -> f64 {
    let sf = s as f64;
    spread(design, m).sqrt() / ((m as f64).sqrt() * sf.powi(4))
}

/// Interior limit of the scaled `det B`: `2 (8|alpha||beta|)^(-3/2)`.
pub fn det_limit(bp: BoundaryPoint) -> f64 {
    2.0 * (8.0 * (bp.alpha() * bp.beta()).abs()).powf(-1.5)
}

/// Scaling constants of the observed Fisher information, for reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherScaleConstants {
    pub sigma_sq_ab: Option<f64>,
    pub rho: Option<f64>,
    pub sigma_alpha_sq: Option<f64>,
    /// `2 [[1, -rho], [-rho, 1]]`
    pub gamma_matrix: Option<Matrix2>,
    /// Growth exponent of the information in the window size.
    pub info_exponent: f64,
}

impl FisherScaleConstants {
    pub fn stable(p: ModelParams) -> Result<Self> {
        let rho = rho_corr(p)?;
        Ok(Self {
            sigma_sq_ab: Some(sigma_sq(p)?),
            rho: Some(rho),
            sigma_alpha_sq: None,
            gamma_matrix: Some(Matrix2::symmetric(2.0, -2.0 * rho, 2.0)),
            info_exponent: 2.0,
        })
    }

    pub fn boundary(bp: BoundaryPoint) -> Self {
        match bp.case_tag() {
            CaseTag::Interior => Self {
                sigma_sq_ab: None,
                rho: None,
                sigma_alpha_sq: sigma_alpha_sq(bp.alpha()).ok(),
                gamma_matrix: None,
                info_exponent: 2.5,
            },
            CaseTag::Boundary => Self {
                sigma_sq_ab: None,
                rho: None,
                sigma_alpha_sq: None,
                gamma_matrix: None,
                info_exponent: 3.0,
            },
        }
    }
}

/// `Option<f64>` with infinities written as `"inf"` / `"-inf"`.
mod ext_real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Num(f64),
        Text(String),
    }

    pub(super) fn to_repr(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else if v > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    pub(super) fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(E::custom(format!("expected a number or \"inf\", got \"{t}\""))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(to_repr).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
    }
}

mod ext_real_pair {
    use super::ext_real::{from_repr, to_repr, Repr};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<[f64; 2]>, s: S) -> Result<S::Ok, S::Error> {
        v.map(|[a, b]| [to_repr(a), to_repr(b)]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[f64; 2]>, D::Error> {
        match Option::<[Repr; 2]>::deserialize(d)? {
            None => Ok(None),
            Some([a, b]) => Ok(Some([from_repr(a)?, from_repr(b)?])),
        }
    }
}
