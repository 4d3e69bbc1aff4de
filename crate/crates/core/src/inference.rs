//! Fisher's g test for a hidden periodicity, applied to any periodogram
//! column, and the Monte Carlo power study built on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimator::Estimator;
use crate::montecarlo::{replicate_seed, OUTLIER_STREAM};
use crate::regress::SolverConfig;
use crate::simgen::{inject_outliers, ModelSpec, OutlierSpec};
use crate::util::{argmax, compensated_sum, derive_seed};

/// Largest alternating-sum term for which the exact null formula is trusted.
const RELIABLE_TERM: f64 = 50.0;

/// Outcome of Fisher's test on one periodogram column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherResult {
    pub g_stat: f64,
    pub p_value: f64,
    pub q: usize,
    pub argmax_index: usize,
    /// Angular frequency of the largest ordinate.
    pub argmax_freq: f64,
    pub levels: Vec<f64>,
    /// `reject[i] == (p_value <= levels[i])`.
    pub reject: Vec<bool>,
}

/// `g = max / sum` and the index of the largest ordinate (smallest index on ties).
pub fn fisher_statistic(ordinates: &[f64]) -> Result<(f64, usize)> {
    if ordinates.is_empty() {
        return domain("fisher_statistic: no ordinates");
    }
    if ordinates.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return domain("fisher_statistic: ordinates must be finite and nonnegative");
    }
    let total = compensated_sum(ordinates.iter().copied());
    if total <= 0.0 {
        return domain("fisher_statistic: all ordinates are zero");
    }
    let k = argmax(ordinates).expect("nonempty");
    Ok(((ordinates[k] / total).min(1.0), k))
}

/// Terms `(-1)^(j-1) C(q, j) (1 - j g)^(q-1)`, summed, with the largest magnitude.
fn alternating_sum(g: f64, q: usize) -> (f64, f64) {
    let qf = q as f64;
    let jmax = ((1.0 / g).floor() as usize).min(q);
    let mut ln_binom = 0.0;
    let mut terms = Vec::with_capacity(jmax);
    let mut biggest = 0.0f64;
    for j in 1..=jmax {
        ln_binom += (qf - j as f64 + 1.0).ln() - (j as f64).ln();
        let base = 1.0 - j as f64 * g;
        if base <= 0.0 {
            break;
        }
        let mag = (ln_binom + (qf - 1.0) * base.ln()).exp();
        biggest = biggest.max(mag);
        terms.push(if j % 2 == 1 { mag } else { -mag });
    }
    (compensated_sum(terms), biggest)
}

/// P(G > g) for `q` i.i.d. exponential ordinates.
///
/// Uses the exact alternating sum wherever it is numerically trustworthy.
/// For small `g` the terms cancel catastrophically; there the tail is
/// continued from the last trustworthy point with the Gumbel shape
/// `exp(-q exp(-q g))` of the null CDF, which keeps the result continuous and
/// strictly decreasing. Those p-values are all close to 1.
pub fn fisher_pvalue(g: f64, q: usize) -> Result<f64> {
    if q == 0 {
        return domain("fisher_pvalue: q must be >= 1");
    }
    let qf = q as f64;
    let lo = 1.0 / qf;
    if !g.is_finite() || g < lo * (1.0 - 1e-12) || g > 1.0 + 1e-12 {
        return domain(format!("fisher_pvalue: g = {g} outside [1/{q}, 1]"));
    }
    let g = g.clamp(lo, 1.0);
    if q == 1 || g <= lo {
        return Ok(1.0);
    }
    if g >= 1.0 {
        return Ok(0.0);
    }
    let (s, big) = alternating_sum(g, q);
    if big <= RELIABLE_TERM {
        return Ok(s.clamp(0.0, 1.0));
    }
    // The largest term shrinks as g grows; find where it crosses the threshold.
    let (mut a, mut b) = (g, 1.0);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if alternating_sum(m, q).1 > RELIABLE_TERM {
            a = m;
        } else {
            b = m;
        }
    }
    let p0 = alternating_sum(b, q).0.clamp(0.0, 1.0);
    let log_ratio = -qf * ((-qf * g).exp() - (-qf * b).exp());
    Ok((1.0 - (1.0 - p0) * log_ratio.exp()).clamp(0.0, 1.0))
}

/// Fisher's test on a periodogram column with frequencies `freqs`.
pub fn fisher_test(ordinates: &[f64], freqs: &[f64], levels: &[f64]) -> Result<FisherResult> {
    if freqs.len() != ordinates.len() {
        return domain("fisher_test: frequency and ordinate lengths differ");
    }
    check_levels(levels)?;
    let (g, k) = fisher_statistic(ordinates)?;
    let q = ordinates.len();
    let p = fisher_pvalue(g.max(1.0 / q as f64), q)?;
    Ok(FisherResult {
        g_stat: g,
        p_value: p,
        q,
        argmax_index: k,
        argmax_freq: freqs[k],
        levels: levels.to_vec(),
        reject: levels.iter().map(|&l| p <= l).collect(),
    })
}

fn check_levels(levels: &[f64]) -> Result<()> {
    match levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        Some(l) => domain(format!("significance level {l} outside (0, 1)")),
        None => Ok(()),
    }
}

/// Empirical null of Fisher's g for one estimator: Gaussian white noise of
/// length `n` pushed through the estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloNull {
    pub n: usize,
    /// Null statistics, ascending.
    pub g_values: Vec<f64>,
}

impl MonteCarloNull {
    pub fn simulate(est: &Estimator, n: usize, reps: usize, seed: u64, cfg: &SolverConfig) -> Result<Self> {
        if reps == 0 {
            return domain("Monte Carlo null needs reps >= 1");
        }
        est.validate()?;
        let mut g_values = (0..reps)
            .into_par_iter()
            .map(|r| {
                let y = crate::simgen::gen_white_noise(n, replicate_seed(seed, r));
                fisher_statistic(&est.ordinates(&y, cfg)?.values).map(|(g, _)| g)
            })
            .collect::<Result<Vec<f64>>>()?;
        g_values.sort_by(|a, b| a.total_cmp(b));
        Ok(Self { n, g_values })
    }

    /// `(1 + #{G_null >= g}) / (reps + 1)`.
    pub fn pvalue(&self, g: f64) -> f64 {
        let below = self.g_values.partition_point(|&v| v < g);
        (1 + self.g_values.len() - below) as f64 / (self.g_values.len() + 1) as f64
    }
}

/// Null distribution used by the power study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum NullMethod {
    #[default]
    Exact,
    MonteCarlo {
        reps: usize,
    },
}

/// One row block of a power table: the clean model or a contaminated variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outlier: Option<OutlierSpec>,
}

impl Scenario {
    pub fn clean() -> Self {
        Self {
            label: "no_outliers".into(),
            outlier: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCell {
    pub pd: f64,
    pub se: f64,
}

impl PowerCell {
    fn new(hits: usize, reps: usize) -> Self {
        let pd = hits as f64 / reps as f64;
        Self {
            pd,
            se: (pd * (1.0 - pd) / reps as f64).sqrt(),
        }
    }
}

/// Probabilities of detection indexed `[scenario][level][estimator]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub reps: usize,
    pub n: usize,
    pub seed: u64,
    pub scenarios: Vec<String>,
    pub estimators: Vec<String>,
    pub levels: Vec<f64>,
    pub null: NullMethod,
    pub cells: Vec<Vec<Vec<PowerCell>>>,
}

impl PowerTable {
    pub fn pd(&self, scenario: usize, level: usize, estimator: usize) -> f64 {
        self.cells[scenario][level][estimator].pd
    }

    pub fn se(&self, scenario: usize, level: usize, estimator: usize) -> f64 {
        self.cells[scenario][level][estimator].se
    }

    pub fn scenario_index(&self, label: &str) -> Option<usize> {
        self.scenarios.iter().position(|s| s == label)
    }

    pub fn estimator_index(&self, label: &str) -> Option<usize> {
        self.estimators.iter().position(|s| s == label)
    }

    /// PD of the first (clean) scenario minus PD of scenario `s`.
    pub fn difference(&self, s: usize, level: usize, estimator: usize) -> f64 {
        self.pd(0, level, estimator) - self.pd(s, level, estimator)
    }

    /// Table layout: one row per (scenario, level), then one difference row
    /// per (contaminated scenario, level); a trailing block holds the
    /// standard errors.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("block,model,level");
        for e in &self.estimators {
            out.push(',');
            out.push_str(e);
        }
        out.push('\n');
        let row = |out: &mut String, block: &str, s: usize, l: usize, f: &dyn Fn(usize) -> f64| {
            out.push_str(&format!("{block},{},{}", self.scenarios[s], self.levels[l]));
            for e in 0..self.estimators.len() {
                out.push_str(&format!(",{:.3}", f(e)));
            }
            out.push('\n');
        };
        for s in 0..self.scenarios.len() {
            for l in 0..self.levels.len() {
                row(&mut out, "pd", s, l, &|e| self.pd(s, l, e));
            }
        }
        for s in 1..self.scenarios.len() {
            for l in 0..self.levels.len() {
                row(&mut out, "difference", s, l, &|e| self.difference(s, l, e));
            }
        }
        for s in 0..self.scenarios.len() {
            for l in 0..self.levels.len() {
                row(&mut out, "se", s, l, &|e| self.se(s, l, e));
            }
        }
        out
    }
}

/// Settings of a power study.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerStudy {
    pub model: ModelSpec,
    pub scenarios: Vec<Scenario>,
    pub estimators: Vec<Estimator>,
    pub reps: usize,
    pub levels: Vec<f64>,
    pub seed: u64,
    pub null: NullMethod,
    pub solver: SolverConfig,
}

impl PowerStudy {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.solver.validate()?;
        if self.reps == 0 {
            return domain("reps must be >= 1");
        }
        if self.estimators.is_empty() || self.scenarios.is_empty() || self.levels.is_empty() {
            return domain("power study needs at least one estimator, scenario and level");
        }
        for e in &self.estimators {
            e.validate()?;
        }
        for s in &self.scenarios {
            if let Some(o) = &s.outlier {
                o.validate()?;
                o.onset(self.model.n)?;
            }
        }
        if let NullMethod::MonteCarlo { reps: 0 } = self.null {
            return domain("Monte Carlo null needs reps >= 1");
        }
        check_levels(&self.levels)
    }
}

/// Monte Carlo probability of detection of Fisher's test for every
/// (scenario, level, estimator).
///
/// Each replicate draws one clean series; contaminated scenarios perturb
/// that same series, so differences are paired.
pub fn power_study(study: &PowerStudy) -> Result<PowerTable> {
    study.validate()?;
    let nulls: Option<Vec<MonteCarloNull>> = match study.null {
        NullMethod::Exact => None,
        NullMethod::MonteCarlo { reps } => Some(
            study
                .estimators
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    MonteCarloNull::simulate(
                        e,
                        study.model.n,
                        reps,
                        derive_seed(study.seed ^ 0x6e75_6c6c, i as u64),
                        &study.solver,
                    )
                })
                .collect::<Result<_>>()?,
        ),
    };
    let ns = study.scenarios.len();
    let ne = study.estimators.len();
    // p-values per replicate, flattened [scenario][estimator]
    let pvals: Vec<Vec<f64>> = (0..study.reps)
        .into_par_iter()
        .map(|r| {
            let s = replicate_seed(study.seed, r);
            let clean = study.model.generate(s)?;
            let mut out = Vec::with_capacity(ns * ne);
            for sc in &study.scenarios {
                let y = match &sc.outlier {
                    None => clean.clone(),
                    Some(o) => inject_outliers(&clean, &o.with_seed(derive_seed(s, OUTLIER_STREAM)))?,
                };
                for (i, e) in study.estimators.iter().enumerate() {
                    let (g, _) = fisher_statistic(&e.ordinates(&y, &study.solver)?.values)?;
                    let p = match &nulls {
                        None => {
                            let q = crate::regress::num_fourier(y.len());
                            fisher_pvalue(g.max(1.0 / q as f64), q)?
                        }
                        Some(ns) => ns[i].pvalue(g),
                    };
                    out.push(p);
                }
            }
            Ok::<_, Error>(out)
        })
        .collect::<Result<_>>()?;

    let cells = (0..ns)
        .map(|s| {
            study
                .levels
                .iter()
                .map(|&l| {
                    (0..ne)
                        .map(|e| PowerCell::new(pvals.iter().filter(|p| p[s * ne + e] <= l).count(), study.reps))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(PowerTable {
        reps: study.reps,
        n: study.model.n,
        seed: study.seed,
        scenarios: study.scenarios.iter().map(|s| s.label.clone()).collect(),
        estimators: study.estimators.iter().map(|e| e.label()).collect(),
        levels: study.levels.clone(),
        null: study.null,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{Model, OutlierKind, Placement};
    use rand::SeedableRng;
    use rand_distr::{Distribution, Exp1};

    #[test]
    fn statistic_examples() {
        assert_eq!(fisher_statistic(&[1.0, 1.0, 1.0, 1.0]).unwrap(), (0.25, 0));
        assert_eq!(fisher_statistic(&[0.0, 5.0, 0.0]).unwrap(), (1.0, 1));
        assert_eq!(fisher_statistic(&[2.0, 3.0, 3.0]).unwrap().1, 1);
        assert!(fisher_statistic(&[0.0, 0.0]).is_err());
        assert!(fisher_statistic(&[]).is_err());
        let v = [0.3, 1.7, 0.2, 0.9];
        let w: Vec<f64> = v.iter().map(|x| x * 1234.5).collect();
        assert!((fisher_statistic(&v).unwrap().0 - fisher_statistic(&w).unwrap().0).abs() < 1e-15);
    }

    #[test]
    fn pvalue_endpoints_and_domain() {
        for q in [2, 10, 99, 500, 2047] {
            assert_eq!(fisher_pvalue(1.0, q).unwrap(), 0.0);
            assert_eq!(fisher_pvalue(1.0 / q as f64, q).unwrap(), 1.0);
            assert!(fisher_pvalue(0.5 / q as f64, q).is_err());
        }
        assert!(fisher_pvalue(1.1, 10).is_err());
        assert!(fisher_pvalue(f64::NAN, 10).is_err());
    }

    #[test]
    fn pvalue_q2_closed_form() {
        // q = 2: G = max(U, 1 - U), P(G > g) = 2 (1 - g)
        for g in [0.55, 0.7, 0.9] {
            assert!((fisher_pvalue(g, 2).unwrap() - 2.0 * (1.0 - g)).abs() < 1e-14);
        }
    }

    #[test]
    fn pvalue_strictly_decreasing() {
        for q in [5usize, 50, 99, 500, 2047] {
            let qf = q as f64;
            let mut prev = 1.0;
            let m = 4000;
            for i in 1..m {
                let g = 1.0 / qf + (1.0 - 1.0 / qf) * i as f64 / m as f64;
                let p = fisher_pvalue(g, q).unwrap();
                assert!((0.0..=1.0).contains(&p));
                assert!(p <= prev, "q={q} g={g} p={p} prev={prev}");
                if prev < 1.0 - 1e-9 && prev > 1e-300 {
                    assert!(p < prev, "q={q} g={g}");
                }
                prev = p;
            }
        }
    }

    #[test]
    fn pvalue_matches_simulated_survival() {
        let q = 50;
        let reps = 100_000;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let mut gs: Vec<f64> = (0..reps)
            .map(|_| {
                let v: Vec<f64> = (0..q).map(|_| Exp1.sample(&mut rng)).collect();
                fisher_statistic(&v).unwrap().0
            })
            .collect();
        gs.sort_by(|a, b| a.total_cmp(b));
        for level in [0.01, 0.05, 0.10] {
            let crit = gs[((1.0 - level) * reps as f64) as usize];
            let p = fisher_pvalue(crit, q).unwrap();
            assert!((p - level).abs() < 0.01, "level {level}: {p}");
        }
    }

    #[test]
    fn mc_null_pvalue_rule() {
        let null = MonteCarloNull {
            n: 16,
            g_values: vec![0.1, 0.2, 0.3],
        };
        assert_eq!(null.pvalue(0.05), 1.0);
        assert_eq!(null.pvalue(0.2), 0.75);
        assert_eq!(null.pvalue(0.9), 0.25);
    }

    fn small_study(seed: u64) -> PowerStudy {
        PowerStudy {
            model: ModelSpec::new(Model::Ar2 { phi1: 0.9, phi2: -0.9 }, 64),
            scenarios: vec![
                Scenario::clean(),
                Scenario {
                    label: "type1_c30".into(),
                    outlier: Some(OutlierSpec::new(OutlierKind::SinglePoint, 30.0, Placement::Random, 0)),
                },
            ],
            estimators: vec![
                Estimator::Pg,
                Estimator::Ahp {
                    alpha: 0.6,
                    psi: crate::loss::PsiSpec::StdMultiple(0.674),
                },
            ],
            reps: 12,
            levels: vec![0.01, 0.05],
            seed,
            null: NullMethod::Exact,
            solver: SolverConfig::default(),
        }
    }

    #[test]
    fn power_study_reproducible_and_shaped() {
        let a = power_study(&small_study(7)).unwrap();
        let b = power_study(&small_study(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells.len(), 2);
        assert_eq!(a.cells[0].len(), 2);
        assert_eq!(a.cells[0][0].len(), 2);
        for s in 0..2 {
            for e in 0..2 {
                assert!(a.pd(s, 0, e) <= a.pd(s, 1, e));
            }
        }
        let csv = a.to_csv();
        assert_eq!(csv.lines().count(), 1 + 4 + 2 + 4);
        assert!(csv.starts_with("block,model,level,pg,ahp_a0.6_psi0.674sd\n"));
    }

    #[test]
    fn power_study_rejects_bad_levels() {
        let mut s = small_study(1);
        s.levels = vec![0.0];
        assert!(power_study(&s).is_err());
        let mut s = small_study(1);
        s.reps = 0;
        assert!(power_study(&s).is_err());
    }

    #[test]
    fn size_control_white_noise() {
        let reps = 2000;
        let hits = (0..reps)
            .filter(|&r| {
                let y = crate::simgen::gen_white_noise(128, replicate_seed(99, r));
                let f = fisher_test(
                    &crate::periodogram::ordinary_pg_ordinates(&y),
                    &crate::periodogram::fourier_grid(128),
                    &[0.05],
                )
                .unwrap();
                f.reject[0]
            })
            .count();
        let rate = hits as f64 / reps as f64;
        assert!((rate - 0.05).abs() <= 0.02, "{rate}");
    }
}
