//! Named periodogram estimators: the AHP and its limiting special cases.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{check_alpha, AHParams, PsiSpec, QUANTILE_LIMIT_PSI_MULT};
use crate::periodogram::{ahp_column, ordinary_pg_ordinates, Column, MIN_LEN};
use crate::regress::SolverConfig;

/// Threshold multiplier standing in for `psi -> infinity`.
pub const EXPECTILE_PSI_MULT: f64 = 1e6;

/// A validated periodogram estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EstimatorSpec", into = "EstimatorSpec")]
pub enum Estimator {
    /// Asymmetric Huber periodogram.
    Ahp { alpha: f64, psi: PsiSpec },
    /// Ordinary periodogram (FFT).
    Pg,
    /// Expectile periodogram: the AHP with `psi = 1e6 sd`.
    Ep { alpha: f64 },
    /// Huber periodogram: the AHP at `alpha = 0.5`.
    Hp { psi: PsiSpec },
    /// Quantile periodogram approximated by the AHP with `psi = 1e-6 sd`.
    QpApprox { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Ahp,
    Pg,
    Ep,
    Hp,
    QpApprox,
}

/// Serialised form of an [`Estimator`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Absolute threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    /// Threshold as a multiple of the sample standard deviation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_mult: Option<f64>,
}

impl TryFrom<EstimatorSpec> for Estimator {
    type Error = Error;

    fn try_from(s: EstimatorSpec) -> Result<Self> {
        let psi = match (s.psi, s.psi_mult) {
            (Some(_), Some(_)) => return Err(Error::Config("give either psi or psi_mult, not both".into())),
            (Some(v), None) => Some(PsiSpec::Absolute(v)),
            (None, Some(m)) => Some(PsiSpec::StdMultiple(m)),
            (None, None) => None,
        };
        let need_alpha = |a: Option<f64>| -> Result<f64> {
            let a = a.ok_or_else(|| Error::Config(format!("estimator {:?} requires alpha", s.kind)))?;
            check_alpha(a)?;
            Ok(a)
        };
        let no_psi = || -> Result<()> {
            if psi.is_some() {
                Err(Error::Config(format!("estimator {:?} takes no psi", s.kind)))
            } else {
                Ok(())
            }
        };
        let est = match s.kind {
            EstimatorKind::Ahp => Estimator::Ahp {
                alpha: need_alpha(s.alpha)?,
                psi: psi.unwrap_or_default(),
            },
            EstimatorKind::Pg => {
                no_psi()?;
                if s.alpha.is_some() {
                    return Err(Error::Config("pg takes no alpha".into()));
                }
                Estimator::Pg
            }
            EstimatorKind::Ep => {
                no_psi()?;
                Estimator::Ep {
                    alpha: need_alpha(s.alpha)?,
                }
            }
            EstimatorKind::Hp => {
                if s.alpha.is_some_and(|a| a != 0.5) {
                    return Err(Error::Config("hp is defined at alpha = 0.5".into()));
                }
                Estimator::Hp {
                    psi: psi.unwrap_or_default(),
                }
            }
            EstimatorKind::QpApprox => {
                no_psi()?;
                Estimator::QpApprox {
                    alpha: need_alpha(s.alpha.or(Some(0.5)))?,
                }
            }
        };
        est.validate()?;
        Ok(est)
    }
}

impl From<Estimator> for EstimatorSpec {
    fn from(e: Estimator) -> Self {
        let (psi, psi_mult) = match e {
            Estimator::Ahp { psi, .. } | Estimator::Hp { psi } => match psi {
                PsiSpec::Absolute(v) => (Some(v), None),
                PsiSpec::StdMultiple(m) => (None, Some(m)),
            },
            _ => (None, None),
        };
        let alpha = match e {
            Estimator::Ahp { alpha, .. } | Estimator::Ep { alpha } | Estimator::QpApprox { alpha } => Some(alpha),
            _ => None,
        };
        EstimatorSpec {
            kind: e.kind(),
            alpha,
            psi,
            psi_mult,
        }
    }
}

impl Estimator {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            Estimator::Ahp { .. } => EstimatorKind::Ahp,
            Estimator::Pg => EstimatorKind::Pg,
            Estimator::Ep { .. } => EstimatorKind::Ep,
            Estimator::Hp { .. } => EstimatorKind::Hp,
            Estimator::QpApprox { .. } => EstimatorKind::QpApprox,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Estimator::Ahp { alpha, psi } => {
                check_alpha(alpha)?;
                check_psi_spec(psi)
            }
            Estimator::Hp { psi } => check_psi_spec(psi),
            Estimator::Ep { alpha } | Estimator::QpApprox { alpha } => check_alpha(alpha),
            Estimator::Pg => Ok(()),
        }
    }

    /// Asymmetry level, with 0.5 for the symmetric estimators.
    pub fn alpha(&self) -> f64 {
        match *self {
            Estimator::Ahp { alpha, .. } | Estimator::Ep { alpha } | Estimator::QpApprox { alpha } => alpha,
            Estimator::Pg | Estimator::Hp { .. } => 0.5,
        }
    }

    /// The equivalent AHP parameterisation, `None` for the FFT periodogram.
    pub fn ahp_form(&self) -> Option<(f64, PsiSpec)> {
        match *self {
            Estimator::Ahp { alpha, psi } => Some((alpha, psi)),
            Estimator::Ep { alpha } => Some((alpha, PsiSpec::StdMultiple(EXPECTILE_PSI_MULT))),
            Estimator::Hp { psi } => Some((0.5, psi)),
            Estimator::QpApprox { alpha } => Some((alpha, PsiSpec::StdMultiple(QUANTILE_LIMIT_PSI_MULT))),
            Estimator::Pg => None,
        }
    }

    /// Ordinates at the Fourier frequencies in (0, pi).
    pub fn ordinates(&self, y: &[f64], cfg: &SolverConfig) -> Result<Column> {
        if y.len() < MIN_LEN {
            return Err(Error::Data(format!("series length {} is below {MIN_LEN}", y.len())));
        }
        match self.ahp_form() {
            None => Ok(Column {
                values: ordinary_pg_ordinates(y),
                nonconverged: 0,
            }),
            Some((alpha, psi)) => {
                let p = AHParams::new(alpha, psi.resolve(y)?)?;
                ahp_column(y, p, cfg)
            }
        }
    }

    /// Short column label, safe for CSV headers and file names.
    pub fn label(&self) -> String {
        let psi_txt = |p: PsiSpec| match p {
            PsiSpec::Absolute(v) => format!("psi{v}"),
            PsiSpec::StdMultiple(m) => format!("psi{m}sd"),
        };
        match *self {
            Estimator::Ahp { alpha, psi } => format!("ahp_a{alpha}_{}", psi_txt(psi)),
            Estimator::Pg => "pg".into(),
            Estimator::Ep { alpha } => format!("ep_a{alpha}"),
            Estimator::Hp { psi } => format!("hp_{}", psi_txt(psi)),
            Estimator::QpApprox { alpha } => format!("qp_approx_a{alpha}"),
        }
    }
}

fn check_psi_spec(psi: PsiSpec) -> Result<()> {
    match psi {
        PsiSpec::Absolute(v) | PsiSpec::StdMultiple(v) if v.is_finite() && v >= 0.0 => Ok(()),
        _ => Err(Error::Domain(format!("invalid psi specification {psi:?}"))),
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_forms() {
        let e: Estimator = serde_json::from_str(r#"{"kind":"ahp","alpha":0.6,"psi_mult":0.674}"#).unwrap();
        assert_eq!(
            e,
            Estimator::Ahp {
                alpha: 0.6,
                psi: PsiSpec::StdMultiple(0.674)
            }
        );
        let back = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<Estimator>(&back).unwrap(), e);
        assert_eq!(
            serde_json::from_str::<Estimator>(r#"{"kind":"pg"}"#).unwrap(),
            Estimator::Pg
        );
        assert_eq!(
            serde_json::from_str::<Estimator>(r#"{"kind":"qp-approx"}"#).unwrap(),
            Estimator::QpApprox { alpha: 0.5 }
        );
        assert_eq!(serde_json::to_string(&Estimator::Pg).unwrap(), r#"{"kind":"pg"}"#);
        for bad in [
            r#"{"kind":"ahp"}"#,
            r#"{"kind":"ahp","alpha":1.5}"#,
            r#"{"kind":"pg","alpha":0.3}"#,
            r#"{"kind":"ep","alpha":0.3,"psi":1}"#,
            r#"{"kind":"ahp","alpha":0.3,"psi":1,"psi_mult":1}"#,
            r#"{"kind":"ahp","alpha":0.3,"extra":1}"#,
        ] {
            assert!(serde_json::from_str::<Estimator>(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn labels() {
        assert_eq!(Estimator::Pg.label(), "pg");
        assert_eq!(Estimator::Ep { alpha: 0.8 }.label(), "ep_a0.8");
        assert_eq!(
            Estimator::Ahp {
                alpha: 0.6,
                psi: PsiSpec::StdMultiple(0.674)
            }
            .label(),
            "ahp_a0.6_psi0.674sd"
        );
    }

    #[test]
    fn ep_large_psi_matches_pg_at_half() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let y: Vec<f64> = (0..64).map(|_| StandardNormal.sample(&mut rng)).collect();
        let cfg = SolverConfig::default();
        let ep = Estimator::Ep { alpha: 0.5 }.ordinates(&y, &cfg).unwrap();
        let pg = Estimator::Pg.ordinates(&y, &cfg).unwrap();
        for (a, b) in ep.values.iter().zip(&pg.values) {
            assert!((a - b).abs() <= 1e-6 * b);
        }
    }
}
