//! Periodogram assembly: the asymmetric Huber DFT and periodogram over the
//! Fourier grid, the ordinary periodogram fast path, normalisation and
//! Daniell smoothing.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::loss::{check_alpha, AHParams, PsiSpec};
use crate::regress::{num_fourier, AhrProblem, RegressionFit, SolverConfig, TrigTable};
use crate::util::{compensated_sum, mean};

/// Minimum series length accepted by the periodogram routines.
pub const MIN_LEN: usize = 8;

/// Periodogram ordinates indexed by (Fourier frequency, column).
///
/// Columns are usually asymmetry levels; `labels` names each column for
/// serialisation (`alpha_0.05`, `pg`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodogramMatrix {
    /// Source series length.
    pub n: usize,
    /// Angular Fourier frequencies in (0, pi).
    pub freqs: Vec<f64>,
    pub alphas: Vec<f64>,
    pub labels: Vec<String>,
    /// Resolved absolute threshold, `None` for the ordinary periodogram.
    pub psi: Option<f64>,
    /// Row-major, `freqs.len() x alphas.len()`.
    pub values: Vec<f64>,
    pub normalized: bool,
    /// Count of non-converged regressions per column.
    pub nonconverged: Vec<usize>,
}

impl PeriodogramMatrix {
    pub fn nfreqs(&self) -> usize {
        self.freqs.len()
    }

    pub fn ncols(&self) -> usize {
        self.alphas.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ncols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nfreqs()).map(|i| self.get(i, j)).collect()
    }

    /// Build a matrix from column vectors of equal length.
    pub fn from_columns(
        n: usize,
        alphas: Vec<f64>,
        labels: Vec<String>,
        psi: Option<f64>,
        columns: &[Vec<f64>],
    ) -> Result<Self> {
        let nf = num_fourier(n);
        if columns.len() != alphas.len() || labels.len() != alphas.len() {
            return domain("column, alpha and label counts differ");
        }
        if columns.iter().any(|c| c.len() != nf) {
            return domain("column length does not match the Fourier grid");
        }
        let ncols = columns.len();
        let mut values = vec![0.0; nf * ncols];
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                values[i * ncols + j] = *v;
            }
        }
        Ok(Self {
            n,
            freqs: fourier_grid(n),
            alphas,
            labels,
            psi,
            values,
            normalized: false,
            nonconverged: vec![0; ncols],
        })
    }

    /// Normalised frequencies `f = omega / 2 pi = k / n`.
    pub fn normalized_freqs(&self) -> Vec<f64> {
        (1..=self.nfreqs()).map(|k| k as f64 / self.n as f64).collect()
    }

    /// Total count of non-converged fits.
    pub fn total_nonconverged(&self) -> usize {
        self.nonconverged.iter().sum()
    }

    /// Fraction of non-converged fits over the whole matrix.
    pub fn nonconverged_fraction(&self) -> f64 {
        let total = self.values.len();
        if total == 0 {
            0.0
        } else {
            self.total_nonconverged() as f64 / total as f64
        }
    }
}

pub(crate) fn fourier_grid(n: usize) -> Vec<f64> {
    (1..=num_fourier(n)).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Column label for an asymmetry level.
pub fn alpha_label(alpha: f64) -> String {
    format!("alpha_{alpha}")
}

/// `alpha = start, start + step, ..., <= stop`, built from integer multiples
/// so that labels print cleanly.
pub fn alpha_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || stop < start {
        return domain(format!("invalid alpha grid {start}:{stop}:{step}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count)
        .map(|i| {
            let v = start + step * i as f64;
            (v * 1e10).round() / 1e10
        })
        .collect();
    for &a in &grid {
        check_alpha(a)?;
    }
    Ok(grid)
}

/// The 46-level grid `0.05, 0.07, ..., 0.95`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..46).map(|i| (5 + 2 * i) as f64 / 100.0).collect()
}

/// Default Daniell bandwidth: `ceil(n / 40)` rounded up to odd, at least 3.
pub fn default_bandwidth(n: usize) -> usize {
    let b = n.div_ceil(40).max(3);
    if b.is_multiple_of(2) {
        b + 1
    } else {
        b
    }
}

/// Asymmetric Huber DFT `z = (n/2)(beta1 - i beta2)`.
pub fn ahdft(fit: &RegressionFit, n: usize) -> Complex64 {
    let h = n as f64 / 2.0;
    Complex64::new(h * fit.beta1, -h * fit.beta2)
}

/// Asymmetric Huber periodogram ordinate `|z|^2 / n = (n/4)(beta1^2 + beta2^2)`.
pub fn ahp_ordinate(fit: &RegressionFit, n: usize) -> f64 {
    n as f64 / 4.0 * (fit.beta1 * fit.beta1 + fit.beta2 * fit.beta2)
}

fn check_len(y: &[f64]) -> Result<()> {
    if y.len() < MIN_LEN {
        return Err(Error::Data(format!(
            "series length {} is below the minimum of {MIN_LEN}",
            y.len()
        )));
    }
    if let Some(v) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::Data(format!("series contains non-finite value {v}")));
    }
    Ok(())
}

/// One periodogram column with its convergence count.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub values: Vec<f64>,
    pub nonconverged: usize,
}

/// AHP ordinates at every Fourier frequency for a single parameter pair.
pub fn ahp_column(y: &[f64], params: AHParams, cfg: &SolverConfig) -> Result<Column> {
    check_len(y)?;
    cfg.validate()?;
    let prob = AhrProblem::new(y, params)?;
    let n = y.len();
    let fits: Vec<RegressionFit> = (1..=num_fourier(n))
        .into_par_iter()
        .map(|k| prob.fit_index(k, cfg, None))
        .collect();
    Ok(Column {
        nonconverged: fits.iter().filter(|f| !f.converged).count(),
        values: fits.iter().map(|f| ahp_ordinate(f, n)).collect(),
    })
}

/// The asymmetric Huber periodogram of `y` over the Fourier grid for each
/// asymmetry level in `alphas`.
pub fn compute_ahp(y: &[f64], alphas: &[f64], psi: PsiSpec, cfg: &SolverConfig) -> Result<PeriodogramMatrix> {
    check_len(y)?;
    cfg.validate()?;
    if alphas.is_empty() {
        return domain("at least one alpha is required");
    }
    for &a in alphas {
        check_alpha(a)?;
    }
    let psi_abs = psi.resolve(y)?;
    let n = y.len();
    let nf = num_fourier(n);
    let table = Arc::new(TrigTable::new(n));
    let problems: Vec<AhrProblem> = alphas
        .par_iter()
        .map(|&a| {
            let p = AHParams::new(a, psi_abs)?.with_mode(psi.mode());
            AhrProblem::with_table(y, p, table.clone())
        })
        .collect::<Result<_>>()?;
    let ncols = alphas.len();
    let fits: Vec<RegressionFit> = (0..nf * ncols)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / ncols, idx % ncols);
            problems[j].fit_index(i + 1, cfg, None)
        })
        .collect();
    let mut nonconverged = vec![0; ncols];
    for (idx, f) in fits.iter().enumerate() {
        if !f.converged {
            nonconverged[idx % ncols] += 1;
        }
    }
    Ok(PeriodogramMatrix {
        n,
        freqs: fourier_grid(n),
        alphas: alphas.to_vec(),
        labels: alphas.iter().map(|&a| alpha_label(a)).collect(),
        psi: Some(psi_abs),
        values: fits.iter().map(|f| ahp_ordinate(f, n)).collect(),
        normalized: false,
        nonconverged,
    })
}

/// Ordinary periodogram ordinates `|sum_t (y_t - ybar) e^{-i omega t}|^2 / n`
/// at the Fourier frequencies in (0, pi), via FFT.
pub fn ordinary_pg_ordinates(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let m = mean(y);
    let mut buf: Vec<Complex64> = y.iter().map(|v| Complex64::new(v - m, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    (1..=num_fourier(n)).map(|k| buf[k].norm_sqr() / n as f64).collect()
}

/// Direct-summation ordinary periodogram, `O(n^2)`.
pub fn ordinary_pg_direct(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let m = mean(y);
    let table = TrigTable::new(n);
    (1..=num_fourier(n))
        .map(|k| {
            let (c, s) = table.regressors(k);
            let re = compensated_sum(y.iter().zip(&c).map(|(v, c)| (v - m) * c));
            let im = compensated_sum(y.iter().zip(&s).map(|(v, s)| (v - m) * s));
            (re * re + im * im) / n as f64
        })
        .collect()
}

/// Ordinary periodogram of the mean-centred series as a one-column matrix.
pub fn ordinary_pg(y: &[f64]) -> Result<PeriodogramMatrix> {
    check_len(y)?;
    let col = ordinary_pg_ordinates(y);
    PeriodogramMatrix::from_columns(y.len(), vec![0.5], vec!["pg".into()], None, &[col])
}

/// Rescale every column to unit sum.
pub fn normalize(m: &PeriodogramMatrix) -> Result<PeriodogramMatrix> {
    let mut out = m.clone();
    let nc = m.ncols();
    for j in 0..nc {
        let s = compensated_sum(m.column(j));
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Data(format!(
                "column {} has non-positive sum {s}; cannot normalise",
                m.labels[j]
            )));
        }
        for i in 0..m.nfreqs() {
            out.values[i * nc + j] = m.values[i * nc + j] / s;
        }
    }
    out.normalized = true;
    Ok(out)
}

/// Normalise a single column in place; returns the original sum.
pub fn normalize_column(col: &mut [f64]) -> Result<f64> {
    let s = compensated_sum(col.iter().copied());
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Data(format!("column has non-positive sum {s}")));
    }
    col.iter_mut().for_each(|v| *v /= s);
    Ok(s)
}

fn check_bandwidth(bw: usize, len: usize) -> Result<()> {
    if bw < 3 || bw.is_multiple_of(2) || bw > len {
        return domain(format!("smoothing bandwidth must be odd, >= 3 and <= {len}; got {bw}"));
    }
    Ok(())
}

/// Daniell (moving-average) smoothing of one column with half-sample
/// symmetric reflection at both ends, which preserves the column sum.
pub fn smooth_column(col: &[f64], bw: usize) -> Result<Vec<f64>> {
    check_bandwidth(bw, col.len())?;
    let h = (bw / 2) as isize;
    let len = col.len() as isize;
    let at = |i: isize| -> f64 {
        let j = if i < 0 {
            -i - 1
        } else if i >= len {
            2 * len - i - 1
        } else {
            i
        };
        col[j as usize]
    };
    Ok((0..len)
        .map(|i| compensated_sum((i - h..=i + h).map(at)) / bw as f64)
        .collect())
}

/// Smooth every column with a Daniell kernel of width `bw`.
pub fn smooth(m: &PeriodogramMatrix, bw: usize) -> Result<PeriodogramMatrix> {
    check_bandwidth(bw, m.nfreqs())?;
    let cols: Vec<Vec<f64>> = (0..m.ncols())
        .map(|j| smooth_column(&m.column(j), bw))
        .collect::<Result<_>>()?;
    let mut out = PeriodogramMatrix::from_columns(m.n, m.alphas.clone(), m.labels.clone(), m.psi, &cols)?;
    out.normalized = m.normalized;
    out.nonconverged = m.nonconverged.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::fit_ahr;
    use crate::util::sample_std;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn fit(b1: f64, b2: f64) -> RegressionFit {
        RegressionFit {
            beta1: b1,
            beta2: b2,
            intercept: 0.0,
            mu: 0.0,
            omega: 1.0,
            iterations: 0,
            converged: true,
            final_step: 0.0,
            grad_norm: 0.0,
        }
    }

    #[test]
    fn dft_and_ordinate_formulas() {
        assert_eq!(ahdft(&fit(0.0, 0.0), 100), Complex64::new(0.0, 0.0));
        assert_eq!(ahdft(&fit(2.0, 0.0), 64), Complex64::new(64.0, 0.0));
        assert_eq!(ahp_ordinate(&fit(0.0, 0.0), 10), 0.0);
        assert_eq!(ahp_ordinate(&fit(2.0, 0.0), 64), 64.0);
        for &(a, b, n) in &[(0.3, -1.2, 50usize), (2.5, 0.7, 17), (-0.01, 4.0, 256)] {
            let f = fit(a, b);
            let z = ahdft(&f, n);
            assert!((z.norm_sqr() / n as f64 - ahp_ordinate(&f, n)).abs() < 1e-12 * ahp_ordinate(&f, n));
        }
    }

    #[test]
    fn ahdft_reduces_to_dft() {
        let n = 40;
        let y = noise(n, 21);
        let m = mean(&y);
        let p = AHParams::new(0.5, 1e6 * sample_std(&y)).unwrap();
        for k in 1..20 {
            let omega = 2.0 * PI * k as f64 / n as f64;
            let f = fit_ahr(&y, omega, &p, &SolverConfig::default()).unwrap();
            let z = ahdft(&f, n);
            // direct summation over t = 1..n of the mean-centred series
            let mut d = Complex64::new(0.0, 0.0);
            for (t, v) in y.iter().enumerate() {
                let ang = omega * (t + 1) as f64;
                d += (v - m) * Complex64::new(ang.cos(), -ang.sin());
            }
            assert!((z - d).norm() <= 1e-6 * d.norm().max(1e-12), "k={k}");
        }
    }

    #[test]
    fn pg_fast_matches_direct() {
        for &n in &[8usize, 9, 31, 64, 97, 200] {
            let y = noise(n, n as u64);
            let a = ordinary_pg_ordinates(&y);
            let b = ordinary_pg_direct(&y);
            for (x, z) in a.iter().zip(&b) {
                assert!((x - z).abs() <= 1e-10 * z.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn pg_of_pure_cosine() {
        let n = 64;
        let k0 = 6;
        let y: Vec<f64> = (1..=n)
            .map(|t| (2.0 * PI * k0 as f64 * t as f64 / n as f64).cos())
            .collect();
        let pg = ordinary_pg(&y).unwrap();
        for i in 0..pg.nfreqs() {
            let v = pg.get(i, 0);
            if i + 1 == k0 {
                assert!((v - n as f64 / 4.0).abs() < 1e-10);
            } else {
                assert!(v < 1e-20);
            }
        }
        let c = ordinary_pg(&[3.0; 16]).unwrap();
        assert!(c.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ahp_equals_pg_for_large_psi() {
        let y = noise(128, 8);
        let ahp = compute_ahp(&y, &[0.5], PsiSpec::StdMultiple(1e6), &SolverConfig::default()).unwrap();
        let pg = ordinary_pg_ordinates(&y);
        for (i, want) in pg.iter().enumerate() {
            let got = ahp.get(i, 0);
            assert!((got - want).abs() <= 1e-6 * want, "{i}: {got} vs {want}");
        }
        assert_eq!(ahp.total_nonconverged(), 0);
    }

    #[test]
    fn compute_ahp_validation() {
        let y = noise(32, 1);
        let cfg = SolverConfig::default();
        assert!(compute_ahp(&y, &[0.0], PsiSpec::default(), &cfg).is_err());
        assert!(compute_ahp(&y, &[1.2], PsiSpec::default(), &cfg).is_err());
        assert!(compute_ahp(&y, &[], PsiSpec::default(), &cfg).is_err());
        assert!(compute_ahp(&y, &[0.5], PsiSpec::Absolute(-1.0), &cfg).is_err());
        assert!(compute_ahp(&y[..5], &[0.5], PsiSpec::default(), &cfg).is_err());
        assert!(compute_ahp(&[1.0; 20], &[0.5], PsiSpec::default(), &cfg).is_err());
    }

    #[test]
    fn compute_ahp_shape_and_nonnegativity() {
        let y = noise(50, 2);
        let alphas = [0.1, 0.5, 0.9];
        let m = compute_ahp(&y, &alphas, PsiSpec::default(), &SolverConfig::default()).unwrap();
        assert_eq!(m.nfreqs(), 24);
        assert_eq!(m.ncols(), 3);
        assert!(m.values.iter().all(|&v| v >= 0.0));
        assert_eq!(m.labels[0], "alpha_0.1");
        // Column j equals a single-alpha computation.
        for (j, &a) in alphas.iter().enumerate() {
            let single = compute_ahp(&y, &[a], PsiSpec::default(), &SolverConfig::default()).unwrap();
            assert_eq!(single.column(0), m.column(j));
        }
    }

    #[test]
    fn scale_behaviour_large_psi() {
        let y = noise(64, 5);
        let c = 2.5;
        let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
        let a = compute_ahp(&y, &[0.3, 0.7], PsiSpec::StdMultiple(1e6), &SolverConfig::default()).unwrap();
        let b = compute_ahp(&ys, &[0.3, 0.7], PsiSpec::StdMultiple(1e6), &SolverConfig::default()).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            assert!((v - c * c * u).abs() <= 1e-8 * v.max(1e-12));
        }
        let na = normalize(&a).unwrap();
        let nb = normalize(&b).unwrap();
        for (u, v) in na.values.iter().zip(&nb.values) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn normalize_examples() {
        let m = PeriodogramMatrix::from_columns(5, vec![0.5], vec!["x".into()], None, &[vec![1.0, 3.0]]).unwrap();
        let nm = normalize(&m).unwrap();
        assert_eq!(nm.values, vec![0.25, 0.75]);
        assert!(nm.normalized);
        assert_eq!(normalize(&nm).unwrap().values, nm.values);
        let z = PeriodogramMatrix::from_columns(5, vec![0.5], vec!["x".into()], None, &[vec![0.0, 0.0]]).unwrap();
        assert!(normalize(&z).is_err());
    }

    #[test]
    fn smooth_examples() {
        assert_eq!(
            smooth_column(&[0.0, 3.0, 0.0, 0.0], 3).unwrap(),
            vec![1.0, 1.0, 1.0, 0.0]
        );
        assert_eq!(smooth_column(&[2.0; 7], 5).unwrap(), vec![2.0; 7]);
        assert!(smooth_column(&[1.0; 7], 4).is_err());
        assert!(smooth_column(&[1.0; 7], 1).is_err());
        assert!(smooth_column(&[1.0; 7], 9).is_err());
        let y = noise(30, 4);
        for bw in [3, 5, 7, 29] {
            let s = smooth_column(&y, bw).unwrap();
            assert!((compensated_sum(s) - compensated_sum(y.iter().copied())).abs() < 1e-9);
        }
    }

    #[test]
    fn grids() {
        let g = default_alpha_grid();
        assert_eq!(g.len(), 46);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[45], 0.95);
        assert_eq!(alpha_grid(0.05, 0.95, 0.02).unwrap(), g);
        assert!(alpha_grid(0.0, 0.5, 0.1).is_err());
        assert_eq!(default_bandwidth(200), 5);
        assert_eq!(default_bandwidth(256), 7);
        assert_eq!(default_bandwidth(40), 3);
    }
}
