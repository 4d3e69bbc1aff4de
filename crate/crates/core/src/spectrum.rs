//! The asymmetric Huber spectrum `g = eta^2 h`: the scaling factor `eta`,
//! the influence process `rho_dot(y_t - mu)`, and estimators of `g`.
//!
//! `h` is the ordinary spectrum of the influence process. No closed form is
//! used anywhere; estimates come from replicate averages of the AHP, from
//! the ordinary periodogram of the influence process, or from a truncated
//! sum of its sample autocovariances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimator::Estimator;
use crate::loss::{check_alpha, rho_dot_unchecked, sample_ahq, AHParams, PsiSpec};
use crate::montecarlo::{processed_column, replicate_seed};
use crate::periodogram::{alpha_label, fourier_grid, ordinary_pg_ordinates, PeriodogramMatrix, MIN_LEN};
use crate::regress::{num_fourier, SolverConfig};
use crate::simgen::{gen_garch11, DEFAULT_BURN_IN};
use crate::util::{mean, KahanSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AhsMethod {
    MonteCarloAveraged,
    RhoDotPeriodogram,
    AcfTruncated,
}

/// Estimate of the asymmetric Huber spectrum over the Fourier grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhsEstimate {
    pub n: usize,
    pub freqs: Vec<f64>,
    pub alphas: Vec<f64>,
    pub psi: f64,
    /// Row-major, `freqs.len() x alphas.len()`.
    pub values: Vec<f64>,
    /// `eta_hat` per alpha (replicate mean for Monte Carlo estimates).
    pub eta: Vec<f64>,
    pub mu_hat: Vec<f64>,
    pub method: AhsMethod,
    pub normalized: bool,
}

impl AhsEstimate {
    pub fn column(&self, j: usize) -> Vec<f64> {
        let nc = self.alphas.len();
        (0..self.freqs.len()).map(|i| self.values[i * nc + j]).collect()
    }

    /// View as a periodogram matrix (for serialisation and plotting).
    pub fn to_matrix(&self) -> PeriodogramMatrix {
        PeriodogramMatrix {
            n: self.n,
            freqs: self.freqs.clone(),
            alphas: self.alphas.clone(),
            labels: self.alphas.iter().map(|&a| alpha_label(a)).collect(),
            psi: Some(self.psi),
            values: self.values.clone(),
            normalized: self.normalized,
            nonconverged: vec![0; self.alphas.len()],
        }
    }
}

/// Influence process `u_t = rho_dot(y_t - mu_hat)` with `mu_hat` the sample
/// asymmetric Huber quantile.
pub fn rho_dot_process(y: &[f64], p: &AHParams) -> Result<Vec<f64>> {
    if y.len() < 2 {
        return domain("rho_dot_process requires at least two samples");
    }
    let mu = sample_ahq(y, p)?;
    Ok(y.iter().map(|&v| rho_dot_unchecked(v - mu, p)).collect())
}

/// `1 / eta_hat = alpha * #{0 < y - mu < psi} / n + (1 - alpha) * #{-psi < y - mu < 0} / n`
/// at a given centre.
pub fn eta_hat_at(y: &[f64], mu: f64, p: &AHParams) -> Result<f64> {
    let n = y.len() as f64;
    let (mut up, mut down) = (0usize, 0usize);
    for &v in y {
        let u = v - mu;
        if u > 0.0 && u < p.psi() {
            up += 1;
        } else if u < 0.0 && u > -p.psi() {
            down += 1;
        }
    }
    let inv = (p.alpha() * up as f64 + (1.0 - p.alpha()) * down as f64) / n;
    if inv > 0.0 {
        Ok(1.0 / inv)
    } else {
        Err(Error::Data(
            "no sample lies strictly inside the band |y - mu| < psi; the scaling factor requires positive band mass"
                .into(),
        ))
    }
}

/// Empirical scaling factor `eta_hat(alpha, psi)`.
pub fn eta_hat(y: &[f64], p: &AHParams) -> Result<f64> {
    if y.is_empty() {
        return domain("eta_hat: empty series");
    }
    eta_hat_at(y, sample_ahq(y, p)?, p)
}

/// Fast approximation of the AHP (and, averaged, of the AHS):
/// `eta_hat^2` times the ordinary periodogram of the influence process.
pub fn ahs_via_rho_dot(y: &[f64], p: &AHParams) -> Result<AhsEstimate> {
    if y.len() < MIN_LEN {
        return Err(Error::Data(format!("series length {} is below {MIN_LEN}", y.len())));
    }
    let mu = sample_ahq(y, p)?;
    let eta = eta_hat_at(y, mu, p)?;
    let u: Vec<f64> = y.iter().map(|&v| rho_dot_unchecked(v - mu, p)).collect();
    let values = ordinary_pg_ordinates(&u).into_iter().map(|v| eta * eta * v).collect();
    Ok(AhsEstimate {
        n: y.len(),
        freqs: fourier_grid(y.len()),
        alphas: vec![p.alpha()],
        psi: p.psi(),
        values,
        eta: vec![eta],
        mu_hat: vec![mu],
        method: AhsMethod::RhoDotPeriodogram,
        normalized: false,
    })
}

/// `eta_hat^2 * sum_{|tau| <= L} gamma_hat(tau) cos(omega tau)` with sample
/// autocovariances of the influence process; `L` defaults to `ceil(n^(1/3))`.
pub fn ahs_acf_truncated(y: &[f64], p: &AHParams, max_lag: Option<usize>) -> Result<AhsEstimate> {
    let n = y.len();
    if n < MIN_LEN {
        return Err(Error::Data(format!("series length {n} is below {MIN_LEN}")));
    }
    let lag = max_lag.unwrap_or_else(|| (n as f64).cbrt().ceil() as usize).min(n - 1);
    let mu = sample_ahq(y, p)?;
    let eta = eta_hat_at(y, mu, p)?;
    let u: Vec<f64> = y.iter().map(|&v| rho_dot_unchecked(v - mu, p)).collect();
    let m = mean(&u);
    let gamma: Vec<f64> = (0..=lag)
        .map(|tau| {
            let mut acc = KahanSum::new();
            for t in 0..n - tau {
                acc.add((u[t] - m) * (u[t + tau] - m));
            }
            acc.total() / n as f64
        })
        .collect();
    let freqs = fourier_grid(n);
    let values = freqs
        .iter()
        .map(|&w| {
            let h = gamma[0] + 2.0 * (1..=lag).map(|tau| gamma[tau] * (w * tau as f64).cos()).sum::<f64>();
            eta * eta * h.max(0.0)
        })
        .collect();
    Ok(AhsEstimate {
        n,
        freqs,
        alphas: vec![p.alpha()],
        psi: p.psi(),
        values,
        eta: vec![eta],
        mu_hat: vec![mu],
        method: AhsMethod::AcfTruncated,
        normalized: false,
    })
}

/// GARCH(1,1) parameters; the default is the volatility model
/// `s_t^2 = 1e-6 + 0.49 y_{t-1}^2 + 0.49 s_{t-1}^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GarchConfig {
    pub omega0: f64,
    pub arch: f64,
    pub garch: f64,
    #[serde(default = "default_burn")]
    pub burn_in: usize,
}

fn default_burn() -> usize {
    DEFAULT_BURN_IN
}

impl Default for GarchConfig {
    fn default() -> Self {
        Self {
            omega0: 1e-6,
            arch: 0.49,
            garch: 0.49,
            burn_in: DEFAULT_BURN_IN,
        }
    }
}

/// Replicate settings for [`ahs_theoretical_garch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AhsMonteCarlo {
    pub reps: usize,
    pub n: usize,
    pub seed: u64,
    /// Daniell bandwidth applied to each replicate; `None` disables smoothing.
    pub bandwidth: Option<usize>,
    pub normalize: bool,
    pub solver: SolverConfig,
}

/// Monte Carlo AHS of a GARCH(1,1) model: the average of `reps` (smoothed)
/// AHPs of simulated paths, one column per alpha.
pub fn ahs_theoretical_garch(
    cfg: &GarchConfig,
    alphas: &[f64],
    psi: PsiSpec,
    mc: &AhsMonteCarlo,
) -> Result<AhsEstimate> {
    if !(cfg.arch >= 0.0 && cfg.garch >= 0.0 && cfg.arch + cfg.garch < 1.0 && cfg.omega0 > 0.0) {
        return domain(format!("nonstationary GARCH(1,1) parameters {cfg:?}"));
    }
    if mc.reps == 0 {
        return domain("reps must be >= 1");
    }
    if alphas.is_empty() {
        return domain("at least one alpha is required");
    }
    for &a in alphas {
        check_alpha(a)?;
    }
    let nf = num_fourier(mc.n);
    let na = alphas.len();
    struct Rep {
        cols: Vec<Vec<f64>>,
        eta: Vec<f64>,
        mu: Vec<f64>,
        psi: f64,
    }
    let reps: Vec<Rep> = (0..mc.reps)
        .into_par_iter()
        .map(|r| {
            let y = gen_garch11(
                cfg.omega0,
                cfg.arch,
                cfg.garch,
                mc.n,
                cfg.burn_in,
                replicate_seed(mc.seed, r),
            )?;
            let psi_abs = psi.resolve(&y)?;
            let mut rep = Rep {
                cols: Vec::with_capacity(na),
                eta: Vec::with_capacity(na),
                mu: Vec::with_capacity(na),
                psi: psi_abs,
            };
            for &a in alphas {
                let est = Estimator::Ahp {
                    alpha: a,
                    psi: PsiSpec::Absolute(psi_abs),
                };
                let (col, _) = processed_column(&est, &y, mc.normalize, mc.bandwidth, &mc.solver)?;
                let p = AHParams::new(a, psi_abs)?;
                let mu = sample_ahq(&y, &p)?;
                rep.eta.push(eta_hat_at(&y, mu, &p)?);
                rep.mu.push(mu);
                rep.cols.push(col);
            }
            Ok(rep)
        })
        .collect::<Result<_>>()?;

    let inv = 1.0 / mc.reps as f64;
    let mut values = vec![0.0; nf * na];
    let mut eta = vec![0.0; na];
    let mut mu_hat = vec![0.0; na];
    for j in 0..na {
        let mut acc = vec![KahanSum::new(); nf];
        let (mut e, mut m) = (KahanSum::new(), KahanSum::new());
        for rep in &reps {
            for (a, v) in acc.iter_mut().zip(&rep.cols[j]) {
                a.add(*v);
            }
            e.add(rep.eta[j]);
            m.add(rep.mu[j]);
        }
        for i in 0..nf {
            values[i * na + j] = acc[i].total() * inv;
        }
        eta[j] = e.total() * inv;
        mu_hat[j] = m.total() * inv;
    }
    Ok(AhsEstimate {
        n: mc.n,
        freqs: fourier_grid(mc.n),
        alphas: alphas.to_vec(),
        psi: crate::util::compensated_sum(reps.iter().map(|r| r.psi)) * inv,
        values,
        eta,
        mu_hat,
        method: AhsMethod::MonteCarloAveraged,
        normalized: mc.normalize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::PsiSpec;
    use crate::periodogram::compute_ahp;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn rho_dot_process_properties() {
        let p = AHParams::new(0.3, 0.5).unwrap();
        assert!(rho_dot_process(&[2.0; 10], &p).unwrap().iter().all(|&v| v == 0.0));
        for seed in 0..10 {
            let y: Vec<f64> = noise(200, seed).iter().map(|v| v.exp()).collect();
            let p = AHParams::new(0.1 + 0.08 * seed as f64, 0.4).unwrap();
            let u = rho_dot_process(&y, &p).unwrap();
            assert!(mean(&u).abs() <= 1e-6 * p.psi());
            let bound = p.alpha().max(1.0 - p.alpha()) * p.psi();
            assert!(u.iter().all(|v| v.abs() <= bound + 1e-15));
        }
    }

    #[test]
    fn eta_full_band_and_symmetry() {
        let y = noise(101, 3);
        let p = AHParams::new(0.7, 1e3).unwrap();
        let mu = sample_ahq(&y, &p).unwrap();
        let up = y.iter().filter(|&&v| v > mu).count() as f64 / 101.0;
        let down = y.iter().filter(|&&v| v < mu).count() as f64 / 101.0;
        let e = eta_hat(&y, &p).unwrap();
        assert!((1.0 / e - (0.7 * up + 0.3 * down)).abs() < 1e-12);

        // symmetric sample about its centre
        let y = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
        let p = AHParams::new(0.5, 1.5).unwrap();
        let e = eta_hat(&y, &p).unwrap();
        let m = 2.0 / 7.0; // one-sided band mass
        assert!((1.0 / e - m).abs() < 1e-12);
    }

    #[test]
    fn eta_requires_band_mass() {
        let y = [0.0, 0.0, 10.0, 10.0];
        let p = AHParams::new(0.5, 0.1).unwrap();
        assert!(eta_hat_at(&y, 5.0, &p).is_err());
    }

    #[test]
    fn eta_permutation_invariant() {
        let mut y = noise(300, 4);
        let p = AHParams::new(0.35, 0.8).unwrap();
        let a = eta_hat(&y, &p).unwrap();
        y.reverse();
        y.rotate_left(77);
        assert_eq!(a, eta_hat(&y, &p).unwrap());
    }

    #[test]
    fn rho_dot_route_scale_invariance_and_sign() {
        let y = noise(256, 5);
        let c = 4.2;
        let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
        let p1 = AHParams::std_multiple(0.8, 1.345, &y).unwrap();
        let p2 = AHParams::std_multiple(0.8, 1.345, &ys).unwrap();
        let a = ahs_via_rho_dot(&y, &p1).unwrap();
        let b = ahs_via_rho_dot(&ys, &p2).unwrap();
        assert!(a.values.iter().all(|&v| v >= 0.0));
        let am = crate::util::argmax(&a.values).unwrap();
        assert_eq!(am, crate::util::argmax(&b.values).unwrap());
    }

    #[test]
    fn rho_dot_route_approximates_ahp() {
        // Same level on average over a handful of replicates.
        let p_mult = 1.345;
        let (mut s_fast, mut s_ahp) = (0.0, 0.0);
        for seed in 0..20 {
            let y = noise(256, 100 + seed);
            let p = AHParams::std_multiple(0.5, p_mult, &y).unwrap();
            s_fast += ahs_via_rho_dot(&y, &p).unwrap().values.iter().sum::<f64>();
            let m = compute_ahp(&y, &[0.5], PsiSpec::StdMultiple(p_mult), &SolverConfig::default()).unwrap();
            s_ahp += m.values.iter().sum::<f64>();
        }
        let ratio = s_fast / s_ahp;
        assert!((0.8..1.25).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn acf_route_white_noise_is_flat() {
        let y = noise(4096, 6);
        let p = AHParams::std_multiple(0.2, 1.345, &y).unwrap();
        let est = ahs_acf_truncated(&y, &p, None).unwrap();
        let v = &est.values;
        let m = mean(v);
        let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
        assert!(sd / m < 0.2, "{}", sd / m);
        assert_eq!(est.method, AhsMethod::AcfTruncated);
    }

    #[test]
    fn garch_guard() {
        let bad = GarchConfig {
            arch: 0.6,
            garch: 0.5,
            ..Default::default()
        };
        let mc = AhsMonteCarlo {
            reps: 1,
            n: 64,
            seed: 0,
            bandwidth: None,
            normalize: true,
            solver: SolverConfig::default(),
        };
        assert!(ahs_theoretical_garch(&bad, &[0.5], PsiSpec::default(), &mc).is_err());
        assert!(ahs_theoretical_garch(&GarchConfig::default(), &[0.5], PsiSpec::default(), &mc).is_ok());
    }
}
