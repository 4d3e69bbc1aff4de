//! The asymmetric Huber loss family and the sample asymmetric Huber quantile.
//!
//! For an asymmetry level `alpha` in (0, 1) and threshold `psi > 0` the loss is
//!
//! ```text
//! rho(u) = |alpha - 1{u < 0}| * u^2 / 2              if |u| <= psi
//! rho(u) = |alpha - 1{u < 0}| * psi * (|u| - psi/2)  if |u| >  psi
//! ```
//!
//! It interpolates between the quantile check loss (`psi -> 0`, after dividing
//! by `psi`) and the asymmetric squared loss of expectile regression
//! (`psi -> inf`).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::util::{compensated_sum, sample_std};

/// How a threshold was specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PsiMode {
    Absolute,
    /// Multiple of the sample standard deviation of the analysed series.
    StdMultiple(f64),
}

/// Validated loss parameters with a resolved, absolute threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AHParams {
    alpha: f64,
    psi: f64,
    psi_mode: PsiMode,
}

impl AHParams {
    pub fn new(alpha: f64, psi: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(psi.is_finite() && psi > 0.0) {
            return domain(format!("psi must be positive and finite, got {psi}"));
        }
        Ok(Self {
            alpha,
            psi,
            psi_mode: PsiMode::Absolute,
        })
    }

    /// Resolve `psi = multiplier * sd(y)`.
    pub fn std_multiple(alpha: f64, multiplier: f64, y: &[f64]) -> Result<Self> {
        let psi = PsiSpec::StdMultiple(multiplier).resolve(y)?;
        let mut p = Self::new(alpha, psi)?;
        p.psi_mode = PsiMode::StdMultiple(multiplier);
        Ok(p)
    }

    pub(crate) fn with_mode(mut self, mode: PsiMode) -> Self {
        self.psi_mode = mode;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn psi_mode(&self) -> PsiMode {
        self.psi_mode
    }

    /// Asymmetric weight `|alpha - 1{u < 0}|`.
    #[inline]
    pub fn side_weight(&self, u: f64) -> f64 {
        if u < 0.0 {
            1.0 - self.alpha
        } else {
            self.alpha
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("alpha must lie in (0, 1), got {alpha}"))
    }
}

/// Threshold below which a requested `psi = 0` is replaced, as a multiple of
/// the sample standard deviation.
pub const QUANTILE_LIMIT_PSI_MULT: f64 = 1e-6;

/// Unresolved threshold specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiSpec {
    Absolute(f64),
    StdMultiple(f64),
}

impl Default for PsiSpec {
    fn default() -> Self {
        PsiSpec::StdMultiple(presets::HUBER)
    }
}

/// Threshold multipliers used throughout the simulation studies.
pub mod presets {
    /// The classical 95%-efficiency Huber constant.
    pub const HUBER: f64 = 1.345;
    pub const MEDIUM: f64 = 0.935;
    pub const ROBUST: f64 = 0.674;
}

impl PsiSpec {
    /// Resolve to an absolute threshold for series `y`.
    ///
    /// A zero threshold (the quantile limit) is replaced by
    /// `1e-6 * sd(y)`, which approximates the quantile periodogram.
    pub fn resolve(&self, y: &[f64]) -> Result<f64> {
        let psi = match *self {
            PsiSpec::Absolute(v) | PsiSpec::StdMultiple(v) if !(v.is_finite() && v >= 0.0) => {
                return domain(format!("psi specification must be finite and >= 0, got {v}"));
            }
            PsiSpec::Absolute(0.0) => {
                log::warn!("psi = 0 requested; using 1e-6 * sd(y) as a quantile-limit approximation");
                QUANTILE_LIMIT_PSI_MULT * sample_std(y)
            }
            PsiSpec::Absolute(v) => v,
            PsiSpec::StdMultiple(m) => {
                let m = if m == 0.0 {
                    log::warn!("psi = 0 requested; using 1e-6 * sd(y) as a quantile-limit approximation");
                    QUANTILE_LIMIT_PSI_MULT
                } else {
                    m
                };
                m * sample_std(y)
            }
        };
        if psi.is_finite() && psi > 0.0 {
            Ok(psi)
        } else {
            Err(Error::Data(format!(
                "resolved psi must be positive, got {psi} (constant series?)"
            )))
        }
    }

    pub fn mode(&self) -> PsiMode {
        match *self {
            PsiSpec::Absolute(_) => PsiMode::Absolute,
            PsiSpec::StdMultiple(m) => PsiMode::StdMultiple(m),
        }
    }
}

fn check_finite(u: f64) -> Result<()> {
    if u.is_finite() {
        Ok(())
    } else {
        domain(format!("residual must be finite, got {u}"))
    }
}

/// The loss `rho_{alpha,psi}(u)`.
pub fn rho(u: f64, p: &AHParams) -> Result<f64> {
    check_finite(u)?;
    Ok(rho_unchecked(u, p))
}

#[inline]
pub(crate) fn rho_unchecked(u: f64, p: &AHParams) -> f64 {
    let w = p.side_weight(u);
    let a = u.abs();
    if a <= p.psi {
        w * 0.5 * u * u
    } else {
        w * p.psi * (a - 0.5 * p.psi)
    }
}

/// First derivative (influence function) of the loss.
pub fn rho_dot(u: f64, p: &AHParams) -> Result<f64> {
    check_finite(u)?;
    Ok(rho_dot_unchecked(u, p))
}

#[inline]
pub(crate) fn rho_dot_unchecked(u: f64, p: &AHParams) -> f64 {
    let w = p.side_weight(u);
    if u.abs() <= p.psi {
        w * u
    } else {
        w * p.psi * u.signum()
    }
}

/// Second derivative of the loss, returned as the non-negative weight
/// `|alpha - 1{u < 0}|` inside the quadratic band and 0 outside.
///
/// On `(-psi, 0)` the signed derivative is `alpha - 1`; only its magnitude
/// enters the IRLS weights and the scaling factor `eta`. At the kinks
/// `u in {-psi, 0, psi}` the right limit is returned.
pub fn rho_ddot(u: f64, p: &AHParams) -> f64 {
    if u >= p.psi || u < -p.psi {
        0.0
    } else if u >= 0.0 {
        p.alpha
    } else {
        1.0 - p.alpha
    }
}

/// Empirical objective `sum_t rho(y_t - mu)`.
pub fn empirical_objective(y: &[f64], mu: f64, p: &AHParams) -> f64 {
    compensated_sum(y.iter().map(|&v| rho_unchecked(v - mu, p)))
}

/// Empirical normal equation `sum_t rho_dot(y_t - mu)`; non-increasing in `mu`.
pub fn normal_equation(y: &[f64], mu: f64, p: &AHParams) -> f64 {
    compensated_sum(y.iter().map(|&v| rho_dot_unchecked(v - mu, p)))
}

/// Sample asymmetric Huber quantile: the minimiser over `mu` of
/// `sum_t rho(y_t - mu)`.
///
/// The objective is convex, so the minimiser is the root of the monotone
/// normal equation. It is bracketed by `[min(y), max(y)]` and located by
/// bisection down to adjacent floating-point values.
pub fn sample_ahq(y: &[f64], p: &AHParams) -> Result<f64> {
    if y.is_empty() {
        return domain("sample_ahq: empty series");
    }
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return domain(format!("sample_ahq: non-finite value {bad}"));
    }
    let (mut lo, mut hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo == hi {
        return Ok(lo);
    }
    let mut s_lo = normal_equation(y, lo, p);
    let mut s_hi = normal_equation(y, hi, p);
    if s_lo <= 0.0 {
        return Ok(lo);
    }
    if s_hi >= 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let s = normal_equation(y, mid, p);
        if s == 0.0 {
            return Ok(mid);
        } else if s > 0.0 {
            lo = mid;
            s_lo = s;
        } else {
            hi = mid;
            s_hi = s;
        }
    }
    // Linear interpolation inside the final bracket.
    let t = s_lo / (s_lo - s_hi);
    Ok((lo + t * (hi - lo)).clamp(lo, hi))
}
