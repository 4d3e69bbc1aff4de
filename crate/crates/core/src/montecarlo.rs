//! Replicate-averaged periodograms over a synthetic model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::estimator::Estimator;
use crate::periodogram::{normalize_column, smooth_column, PeriodogramMatrix};
use crate::regress::{num_fourier, SolverConfig};
use crate::simgen::{inject_outliers, ModelSpec, OutlierSpec};
use crate::util::{derive_seed, KahanSum};

/// Sub-stream used to place contamination within a replicate.
pub const OUTLIER_STREAM: u64 = 0x6f75_746c;

/// Seed of replicate `rep` under master seed `seed`.
pub fn replicate_seed(seed: u64, rep: usize) -> u64 {
    derive_seed(seed, rep as u64)
}

/// How each replicate periodogram is post-processed before averaging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageOptions {
    pub reps: usize,
    pub seed: u64,
    /// Daniell bandwidth; `None` leaves replicates unsmoothed.
    pub bandwidth: Option<usize>,
    pub normalize: bool,
    pub solver: SolverConfig,
}

impl AverageOptions {
    pub fn new(reps: usize, seed: u64) -> Self {
        Self {
            reps,
            seed,
            bandwidth: None,
            normalize: true,
            solver: SolverConfig::default(),
        }
    }

    pub fn smoothed(mut self, bw: usize) -> Self {
        self.bandwidth = Some(bw);
        self
    }

    pub fn raw(mut self) -> Self {
        self.normalize = false;
        self
    }
}

/// Ordinates of one estimator on one series, post-processed per `opts`.
pub(crate) fn processed_column(
    est: &Estimator,
    y: &[f64],
    normalize: bool,
    bandwidth: Option<usize>,
    solver: &SolverConfig,
) -> Result<(Vec<f64>, usize)> {
    let col = est.ordinates(y, solver)?;
    let mut v = col.values;
    if normalize {
        normalize_column(&mut v)?;
    }
    if let Some(bw) = bandwidth {
        v = smooth_column(&v, bw)?;
    }
    Ok((v, col.nonconverged))
}

/// Average of per-replicate periodograms, one column per estimator.
///
/// Replicates are generated from `replicate_seed(opts.seed, r)`, optionally
/// contaminated, and processed in parallel; the average is accumulated in
/// replicate order so the result does not depend on the thread count.
pub fn average_periodograms(
    model: &ModelSpec,
    outlier: Option<&OutlierSpec>,
    estimators: &[Estimator],
    opts: &AverageOptions,
) -> Result<PeriodogramMatrix> {
    model.validate()?;
    opts.solver.validate()?;
    if opts.reps == 0 {
        return domain("reps must be >= 1");
    }
    if estimators.is_empty() {
        return domain("at least one estimator is required");
    }
    for e in estimators {
        e.validate()?;
    }
    let nf = num_fourier(model.n);
    let per_rep: Vec<Vec<(Vec<f64>, usize)>> = (0..opts.reps)
        .into_par_iter()
        .map(|r| {
            let s = replicate_seed(opts.seed, r);
            let mut y = model.generate(s)?;
            if let Some(o) = outlier {
                y = inject_outliers(&y, &o.with_seed(derive_seed(s, OUTLIER_STREAM)))?;
            }
            estimators
                .iter()
                .map(|e| processed_column(e, &y, opts.normalize, opts.bandwidth, &opts.solver))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut columns = Vec::with_capacity(estimators.len());
    let mut nonconv = vec![0; estimators.len()];
    for j in 0..estimators.len() {
        let mut acc = vec![KahanSum::new(); nf];
        for rep in &per_rep {
            let (col, nc) = &rep[j];
            nonconv[j] += nc;
            for (a, v) in acc.iter_mut().zip(col) {
                a.add(*v);
            }
        }
        columns.push(acc.iter().map(|a| a.total() / opts.reps as f64).collect::<Vec<f64>>());
    }
    let mut m = PeriodogramMatrix::from_columns(
        model.n,
        estimators.iter().map(|e| e.alpha()).collect(),
        estimators.iter().map(|e| e.label()).collect(),
        None,
        &columns,
    )?;
    m.normalized = opts.normalize;
    m.nonconverged = nonconv;
    Ok(m)
}
