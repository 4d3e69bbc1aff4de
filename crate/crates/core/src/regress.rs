//! Trigonometric asymmetric Huber regression at a single Fourier frequency.
//!
//! At angular frequency `omega` the regression minimises
//! `sum_t rho(y_t - mu - b1 cos(omega t) - b2 sin(omega t))`, `t = 1..n`,
//! with `mu` the sample asymmetric Huber quantile of the whole series. The
//! solver is iteratively reweighted least squares with step halving.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::loss::{rho_dot_unchecked, rho_unchecked, sample_ahq, AHParams};
use crate::util::compensated_sum;

/// Stopping rules and safeguards for the IRLS solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Parameter-update threshold, measured relative to the RMS of the
    /// centred series.
    pub tolerance: f64,
    /// Gradient threshold factor; the absolute threshold is
    /// `grad_tolerance * n * min(psi, rms)`.
    pub grad_tolerance: f64,
    pub max_iter: usize,
    /// Lower bound applied to every IRLS weight.
    pub weight_floor: f64,
    /// Fit an intercept jointly at each frequency instead of holding `mu` fixed.
    pub include_intercept: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            grad_tolerance: 1e-6,
            max_iter: 200,
            weight_floor: 1e-10,
            include_intercept: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tolerance > 0.0
            && self.grad_tolerance > 0.0
            && self.max_iter > 0
            && self.weight_floor > 0.0
            && self.tolerance.is_finite()
            && self.grad_tolerance.is_finite()
            && self.weight_floor.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "solver config fields must be positive: {self:?}"
            )))
        }
    }
}

/// Solution of one trigonometric regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Cosine coefficient.
    pub beta1: f64,
    /// Sine coefficient.
    pub beta2: f64,
    /// Jointly fitted intercept (0 unless `include_intercept`).
    pub intercept: f64,
    /// Centring constant.
    pub mu: f64,
    pub omega: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the last accepted update, relative to the series RMS.
    pub final_step: f64,
    /// Norm of the gradient of the objective at the returned coefficients.
    pub grad_norm: f64,
}

/// Fourier frequencies `2 pi k / n` for `k = 1, ..., ceil(n/2) - 1`.
pub fn fourier_frequencies(n: usize) -> Result<Vec<f64>> {
    if n < 4 {
        return domain(format!("fourier_frequencies requires n >= 4, got {n}"));
    }
    Ok((1..n.div_ceil(2)).map(|k| 2.0 * PI * k as f64 / n as f64).collect())
}

/// Number of Fourier frequencies in (0, pi) for length `n`.
pub fn num_fourier(n: usize) -> usize {
    n.div_ceil(2).saturating_sub(1)
}

/// Map an angular frequency back onto its Fourier index, if it is one.
pub fn fourier_index(omega: f64, n: usize) -> Option<usize> {
    let k = omega * n as f64 / (2.0 * PI);
    let kr = k.round();
    if (k - kr).abs() > 1e-8 * k.abs().max(1.0) || kr < 1.0 {
        return None;
    }
    let k = kr as usize;
    (k < n.div_ceil(2)).then_some(k)
}

/// Exact tables of `cos(2 pi j / n)` and `sin(2 pi j / n)`.
#[derive(Debug, Clone)]
pub struct TrigTable {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigTable {
    pub fn new(n: usize) -> Self {
        let (cos, sin) = (0..n)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / n as f64;
                (a.cos(), a.sin())
            })
            .unzip();
        Self { n, cos, sin }
    }

    /// Regressors `cos(omega_k t), sin(omega_k t)` for `t = 1..n`.
    pub fn regressors(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut c = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        for t in 1..=n {
            let j = (k * t) % n;
            c.push(self.cos[j]);
            s.push(self.sin[j]);
        }
        (c, s)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// A series prepared for regression at many frequencies under fixed
/// parameters: the centring constant is estimated once and shared.
#[derive(Debug, Clone)]
pub struct AhrProblem {
    centered: Vec<f64>,
    mu: f64,
    rms: f64,
    params: AHParams,
    table: Arc<TrigTable>,
}

impl AhrProblem {
    pub fn new(y: &[f64], params: AHParams) -> Result<Self> {
        let table = Arc::new(TrigTable::new(y.len()));
        Self::with_table(y, params, table)
    }

    pub fn with_table(y: &[f64], params: AHParams, table: Arc<TrigTable>) -> Result<Self> {
        if y.len() < 4 {
            return domain(format!("series too short for regression: n = {}", y.len()));
        }
        if table.len() != y.len() {
            return domain("trig table length does not match series");
        }
        let mu = sample_ahq(y, &params)?;
        Ok(Self::with_center(y, params, mu, table))
    }

    /// Use a caller-supplied centring constant.
    pub fn with_center(y: &[f64], params: AHParams, mu: f64, table: Arc<TrigTable>) -> Self {
        let centered: Vec<f64> = y.iter().map(|v| v - mu).collect();
        let ms = compensated_sum(centered.iter().map(|v| v * v)) / centered.len() as f64;
        let rms = if ms > 0.0 { ms.sqrt() } else { 1.0 };
        Self {
            centered,
            mu,
            rms,
            params,
            table,
        }
    }

    pub fn n(&self) -> usize {
        self.centered.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn params(&self) -> &AHParams {
        &self.params
    }

    /// Fit at angular frequency `omega`, which must be a Fourier frequency.
    pub fn fit(&self, omega: f64, cfg: &SolverConfig) -> Result<RegressionFit> {
        let k = fourier_index(omega, self.n())
            .ok_or_else(|| Error::Domain(format!("{omega} is not a Fourier frequency for n = {}", self.n())))?;
        Ok(self.fit_index(k, cfg, None))
    }

    /// Fit at Fourier index `k` (`omega = 2 pi k / n`).
    pub fn fit_index(&self, k: usize, cfg: &SolverConfig, trace: Option<&mut Vec<f64>>) -> RegressionFit {
        let (c, s) = self.table.regressors(k);
        let omega = 2.0 * PI * k as f64 / self.n() as f64;
        if cfg.include_intercept {
            let ones = vec![1.0; self.n()];
            let cols = [&c[..], &s[..], &ones[..]];
            let (beta, stats) = self.irls(&cols, cfg, trace);
            self.assemble(beta[0], beta[1], beta[2], omega, stats)
        } else {
            let cols = [&c[..], &s[..]];
            let (beta, stats) = self.irls(&cols, cfg, trace);
            self.assemble(beta[0], beta[1], 0.0, omega, stats)
        }
    }

    /// Objective `sum_t rho(r_t - x_t' beta)` for arbitrary coefficients
    /// `(b1, b2)` at Fourier index `k`.
    pub fn objective_at(&self, k: usize, b1: f64, b2: f64) -> f64 {
        let (c, s) = self.table.regressors(k);
        compensated_sum(
            self.centered
                .iter()
                .zip(c.iter().zip(&s))
                .map(|(r, (ci, si))| rho_unchecked(r - b1 * ci - b2 * si, &self.params)),
        )
    }

    fn assemble(&self, b1: f64, b2: f64, b0: f64, omega: f64, st: IrlsStats) -> RegressionFit {
        RegressionFit {
            beta1: b1,
            beta2: b2,
            intercept: b0,
            mu: self.mu,
            omega,
            iterations: st.iterations,
            converged: st.converged,
            final_step: st.final_step,
            grad_norm: st.grad_norm,
        }
    }

    fn residuals_into<const D: usize>(&self, cols: &[&[f64]; D], beta: &[f64; D], out: &mut [f64]) {
        for (t, o) in out.iter_mut().enumerate() {
            let mut fit = 0.0;
            for j in 0..D {
                fit += cols[j][t] * beta[j];
            }
            *o = self.centered[t] - fit;
        }
    }

    fn objective<const D: usize>(&self, cols: &[&[f64]; D], beta: &[f64; D], buf: &mut [f64]) -> f64 {
        self.residuals_into(cols, beta, buf);
        compensated_sum(buf.iter().map(|&u| rho_unchecked(u, &self.params)))
    }

    fn gradient_norm<const D: usize>(&self, cols: &[&[f64]; D], resid: &[f64]) -> f64 {
        let mut g = [0.0; D];
        for (t, &u) in resid.iter().enumerate() {
            let d = rho_dot_unchecked(u, &self.params);
            for j in 0..D {
                g[j] += d * cols[j][t];
            }
        }
        g.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn irls<const D: usize>(
        &self,
        cols: &[&[f64]; D],
        cfg: &SolverConfig,
        mut trace: Option<&mut Vec<f64>>,
    ) -> ([f64; D], IrlsStats) {
        let n = self.n();
        let psi = self.params.psi();
        let grad_tol = cfg.grad_tolerance * n as f64 * psi.min(self.rms);

        // Least-squares start: the regressors are orthogonal at Fourier frequencies.
        let mut beta = [0.0; D];
        for j in 0..D {
            let xx: f64 = cols[j].iter().map(|v| v * v).sum();
            let xy: f64 = cols[j].iter().zip(&self.centered).map(|(a, b)| a * b).sum();
            beta[j] = if xx > 0.0 { xy / xx } else { 0.0 };
        }

        let mut resid = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        let mut f_cur = self.objective(cols, &beta, &mut resid);
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(f_cur);
        }

        let mut stats = IrlsStats::default();
        for iter in 1..=cfg.max_iter {
            stats.iterations = iter;
            // Weighted normal equations.
            let mut a = [[0.0; D]; D];
            let mut b = [0.0; D];
            for t in 0..n {
                let u = resid[t];
                let side = self.params.side_weight(u);
                let w = if u.abs() <= psi { side } else { side * psi / u.abs() };
                let w = w.max(cfg.weight_floor);
                let r = self.centered[t];
                for i in 0..D {
                    let wx = w * cols[i][t];
                    b[i] += wx * r;
                    for j in i..D {
                        a[i][j] += wx * cols[j][t];
                    }
                }
            }
            for i in 0..D {
                for j in 0..i {
                    a[i][j] = a[j][i];
                }
            }
            let Some(target) = solve_small(a, b) else {
                stats.final_step = 0.0;
                break;
            };
            let mut dir = [0.0; D];
            for j in 0..D {
                dir[j] = target[j] - beta[j];
            }

            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..=30 {
                let mut cand = beta;
                for j in 0..D {
                    cand[j] += step * dir[j];
                }
                let f_new = self.objective(cols, &cand, &mut scratch);
                if f_new <= f_cur {
                    accepted = Some((cand, f_new));
                    break;
                }
                step *= 0.5;
            }
            let Some((cand, f_new)) = accepted else {
                stats.final_step = 0.0;
                break;
            };
            let delta = dir.iter().map(|d| (step * d).powi(2)).sum::<f64>().sqrt() / self.rms;
            beta = cand;
            f_cur = f_new;
            std::mem::swap(&mut resid, &mut scratch);
            if let Some(tr) = trace.as_deref_mut() {
                tr.push(f_cur);
            }
            stats.final_step = delta;
            if delta <= cfg.tolerance {
                stats.converged = true;
                break;
            }
        }
        stats.grad_norm = self.gradient_norm(cols, &resid);
        if !stats.converged && stats.final_step == 0.0 {
            stats.converged = stats.grad_norm <= grad_tol;
        }
        (beta, stats)
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct IrlsStats {
    iterations: usize,
    converged: bool,
    final_step: f64,
    grad_norm: f64,
}

/// Gaussian elimination with partial pivoting for tiny dense systems.
fn solve_small<const D: usize>(mut a: [[f64; D]; D], mut b: [f64; D]) -> Option<[f64; D]> {
    let scale = a.iter().flat_map(|r| r.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    for col in 0..D {
        let piv = (col..D).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..D {
            let f = a[row][col] / a[col][col];
            for k in col..D {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; D];
    for i in (0..D).rev() {
        let mut acc = b[i];
        for k in i + 1..D {
            acc -= a[i][k] * x[k];
        }
        x[i] = acc / a[i][i];
    }
    Some(x)
}

/// Fit the trigonometric regression of `y` at `omega`, centring at the sample
/// asymmetric Huber quantile.
pub fn fit_ahr(y: &[f64], omega: f64, p: &AHParams, cfg: &SolverConfig) -> Result<RegressionFit> {
    cfg.validate()?;
    AhrProblem::new(y, *p)?.fit(omega, cfg)
}
