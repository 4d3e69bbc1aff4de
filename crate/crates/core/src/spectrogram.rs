//! Sliding-window periodograms of a nonstationary series.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimator::Estimator;
use crate::loss::{AHParams, PsiMode, PsiSpec};
use crate::periodogram::fourier_grid;
use crate::regress::SolverConfig;
use crate::util::{argmax, mean};

pub const MIN_WINDOW: usize = 16;

/// Relative floor added before taking logs: `1e-12 x` the window's mean ordinate.
pub const LOG_FLOOR: f64 = 1e-12;

/// Log-periodograms of consecutive windows; samples after the last full
/// window are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramResult {
    pub window_len: usize,
    pub hop: usize,
    /// 1-based index of each window's first sample.
    pub starts: Vec<usize>,
    /// 1-based index of each window's middle sample (lower middle for even lengths).
    pub centers: Vec<usize>,
    /// Angular Fourier frequencies of a window.
    pub freqs: Vec<f64>,
    /// Row-major `centers.len() x freqs.len()`, natural log of the ordinates.
    pub values: Vec<f64>,
    pub estimator: String,
    /// Resolved threshold per window (`None` for the ordinary periodogram).
    pub psi: Vec<Option<f64>>,
    /// Whether the input was log-transformed before analysis.
    pub log_input: bool,
}

impl SpectrogramResult {
    pub fn nwindows(&self) -> usize {
        self.starts.len()
    }

    pub fn row(&self, w: usize) -> &[f64] {
        let nf = self.freqs.len();
        &self.values[w * nf..(w + 1) * nf]
    }

    /// Index of the largest ordinate of each window.
    pub fn argmax_bins(&self) -> Vec<usize> {
        (0..self.nwindows()).map(|w| argmax(self.row(w)).unwrap_or(0)).collect()
    }

    /// Long format: `center,freq,log_value` with `freq = k / window_len`.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("center,freq,log_value\n");
        for (w, c) in self.centers.iter().enumerate() {
            for (k, v) in self.row(w).iter().enumerate() {
                out.push_str(&format!("{c},{},{v}\n", (k + 1) as f64 / self.window_len as f64));
            }
        }
        out
    }
}

/// Window start offsets (0-based) for a series of length `n`.
pub fn window_starts(n: usize, window_len: usize, overlap: usize) -> Result<Vec<usize>> {
    if window_len < MIN_WINDOW {
        return domain(format!("window length {window_len} is below {MIN_WINDOW}"));
    }
    if overlap >= window_len {
        return domain(format!(
            "overlap {overlap} must be smaller than the window length {window_len}"
        ));
    }
    if n < window_len {
        return Err(Error::Domain(format!(
            "series of length {n} is shorter than one window ({window_len})"
        )));
    }
    let hop = window_len - overlap;
    Ok((0..=(n - window_len) / hop).map(|w| w * hop).collect())
}

/// Spectrogram of any estimator. Thresholds given as a standard-deviation
/// multiple are re-resolved on each window, as is the centring.
pub fn spectrogram(
    y: &[f64],
    window_len: usize,
    overlap: usize,
    est: &Estimator,
    cfg: &SolverConfig,
) -> Result<SpectrogramResult> {
    est.validate()?;
    cfg.validate()?;
    let starts = window_starts(y.len(), window_len, overlap)?;
    let rows: Vec<(Vec<f64>, Option<f64>)> = starts
        .par_iter()
        .map(|&s| {
            let seg = &y[s..s + window_len];
            let col = est.ordinates(seg, cfg)?;
            let psi = match est.ahp_form() {
                Some((_, p)) => Some(p.resolve(seg)?),
                None => None,
            };
            let floor = LOG_FLOOR * mean(&col.values);
            let floor = if floor > 0.0 { floor } else { f64::MIN_POSITIVE };
            Ok((col.values.iter().map(|v| (v + floor).ln()).collect(), psi))
        })
        .collect::<Result<_>>()?;
    Ok(SpectrogramResult {
        window_len,
        hop: window_len - overlap,
        centers: starts.iter().map(|s| s + 1 + (window_len - 1) / 2).collect(),
        starts: starts.iter().map(|s| s + 1).collect(),
        freqs: fourier_grid(window_len),
        values: rows.iter().flat_map(|(r, _)| r.iter().copied()).collect(),
        estimator: est.label(),
        psi: rows.iter().map(|(_, p)| *p).collect(),
        log_input: false,
    })
}

/// AHP spectrogram. A threshold built with [`AHParams::std_multiple`] is
/// recomputed per window; an absolute one is used as is.
pub fn ahp_spectrogram(
    y: &[f64],
    window_len: usize,
    overlap: usize,
    p: &AHParams,
    cfg: &SolverConfig,
) -> Result<SpectrogramResult> {
    let psi = match p.psi_mode() {
        PsiMode::Absolute => PsiSpec::Absolute(p.psi()),
        PsiMode::StdMultiple(m) => PsiSpec::StdMultiple(m),
    };
    spectrogram(y, window_len, overlap, &Estimator::Ahp { alpha: p.alpha(), psi }, cfg)
}

/// Natural log of a strictly positive series (for inputs such as RR intervals).
pub fn log_transform(y: &[f64]) -> Result<Vec<f64>> {
    match y.iter().position(|v| !(*v > 0.0)) {
        Some(i) => Err(Error::Data(format!(
            "log input requires positive values; sample {} is {}",
            i + 1,
            y[i]
        ))),
        None => Ok(y.iter().map(|v| v.ln()).collect()),
    }
}
