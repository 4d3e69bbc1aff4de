//! Seeded generators for the synthetic models and contamination types used in
//! the simulation studies.
//!
//! Gaussian variates come from `rand_distr::StandardNormal` (ziggurat) driven
//! by a ChaCha8 stream, so a seed reproduces the same series on every platform.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::util::{derive_seed, rng_for, sample_std};

pub const DEFAULT_BURN_IN: usize = 500;

/// Synthetic model families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    WhiteNoise,
    Ar2 {
        phi1: f64,
        phi2: f64,
    },
    /// AR(2) carrier amplitude-modulated by
    /// `b0 + b1 cos(2 pi f0 t) + b2 sin(2 pi f1 t)`.
    HiddenPeriodicity {
        phi1: f64,
        phi2: f64,
        #[serde(default = "HiddenParams::b0")]
        b0: f64,
        #[serde(default = "HiddenParams::b1")]
        b1: f64,
        #[serde(default = "HiddenParams::b2")]
        b2: f64,
        #[serde(default = "HiddenParams::f0")]
        f0: f64,
        #[serde(default = "HiddenParams::f1")]
        f1: f64,
    },
    /// Nonlinear mixture of low-pass, high-pass and band-pass AR components.
    Mixture,
    Garch11 {
        omega0: f64,
        arch: f64,
        garch: f64,
    },
}

/// A model together with its length and burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub model: Model,
    pub n: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

impl ModelSpec {
    pub fn new(model: Model, n: usize) -> Self {
        Self {
            model,
            n,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return domain(format!("model length must be >= 8, got {}", self.n));
        }
        match self.model {
            Model::Ar2 { phi1, phi2 } | Model::HiddenPeriodicity { phi1, phi2, .. } => check_ar2(phi1, phi2),
            Model::Garch11 { omega0, arch, garch } => check_garch(omega0, arch, garch),
            Model::WhiteNoise | Model::Mixture => Ok(()),
        }
    }

    /// Generate one realisation.
    pub fn generate(&self, seed: u64) -> Result<Vec<f64>> {
        self.validate()?;
        let (n, b) = (self.n, self.burn_in);
        match self.model {
            Model::WhiteNoise => Ok(gen_white_noise(n, seed)),
            Model::Ar2 { phi1, phi2 } => gen_ar2(phi1, phi2, n, b, seed),
            Model::HiddenPeriodicity {
                phi1,
                phi2,
                b0,
                b1,
                b2,
                f0,
                f1,
            } => gen_hidden(phi1, phi2, &HiddenParams { b0, b1, b2, f0, f1 }, n, b, seed),
            Model::Mixture => gen_mixture_with_burn_in(n, b, seed),
            Model::Garch11 { omega0, arch, garch } => gen_garch11(omega0, arch, garch, n, b, seed),
        }
    }
}

/// Stationarity of `x_t = phi1 x_{t-1} + phi2 x_{t-2} + e_t`: both roots of
/// `1 - phi1 z - phi2 z^2` strictly outside the unit circle.
pub fn ar2_is_stationary(phi1: f64, phi2: f64) -> bool {
    phi1.is_finite() && phi2.is_finite() && phi2 + phi1 < 1.0 && phi2 - phi1 < 1.0 && phi2.abs() < 1.0
}

fn check_ar2(phi1: f64, phi2: f64) -> Result<()> {
    if ar2_is_stationary(phi1, phi2) {
        Ok(())
    } else {
        domain(format!("AR(2) coefficients ({phi1}, {phi2}) are not stationary"))
    }
}

fn check_garch(omega0: f64, arch: f64, garch: f64) -> Result<()> {
    if !(omega0 > 0.0 && omega0.is_finite()) {
        return domain(format!("GARCH intercept must be positive, got {omega0}"));
    }
    if !(arch >= 0.0 && garch >= 0.0 && arch + garch < 1.0) {
        return domain(format!(
            "GARCH(1,1) requires arch, garch >= 0 and arch + garch < 1; got ({arch}, {garch})"
        ));
    }
    Ok(())
}

/// AR(2) coefficients with complex roots of modulus `r` at normalised
/// frequency `f`: `phi1 = 2 r cos(2 pi f)`, `phi2 = -r^2`.
pub fn ar2_from_peak(r: f64, f: f64) -> (f64, f64) {
    (2.0 * r * (2.0 * PI * f).cos(), -r * r)
}

/// Angular location of the AR(2) spectral peak,
/// `arccos(phi1 / (2 sqrt(-phi2)))`.
pub fn ar2_peak_frequency(phi1: f64, phi2: f64) -> Result<f64> {
    if !(phi2 < 0.0) {
        return domain(format!("no complex root pair: phi2 = {phi2} must be negative"));
    }
    let c = phi1 / (2.0 * (-phi2).sqrt());
    if !(c.abs() <= 1.0) {
        return domain(format!(
            "no complex root pair: |phi1 / (2 sqrt(-phi2))| = {} > 1",
            c.abs()
        ));
    }
    Ok(c.acos())
}

fn normals<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
    (0..count).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn gen_white_noise(n: usize, seed: u64) -> Vec<f64> {
    normals(&mut rng_for(seed, 0), n)
}

/// Gaussian AR(2) series, started at zero and run for `burn_in` steps
/// before the `n` returned samples.
pub fn gen_ar2(phi1: f64, phi2: f64, n: usize, burn_in: usize, seed: u64) -> Result<Vec<f64>> {
    check_ar2(phi1, phi2)?;
    Ok(ar_filter(
        &[phi1, phi2],
        &normals(&mut rng_for(seed, 0), n + burn_in),
        burn_in,
    ))
}

fn ar_filter(phi: &[f64], shocks: &[f64], burn_in: usize) -> Vec<f64> {
    let mut x = vec![0.0; shocks.len()];
    for t in 0..shocks.len() {
        let mut v = shocks[t];
        for (lag, c) in phi.iter().enumerate() {
            if t > lag {
                v += c * x[t - lag - 1];
            }
        }
        x[t] = v;
    }
    x.split_off(burn_in)
}

/// Amplitude-modulation parameters of the hidden-periodicity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenParams {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    /// Normalised frequency of the cosine modulation.
    pub f0: f64,
    /// Normalised frequency of the sine modulation.
    pub f1: f64,
}

impl HiddenParams {
    fn b0() -> f64 {
        1.0
    }
    fn b1() -> f64 {
        0.9
    }
    fn b2() -> f64 {
        1.0
    }
    fn f0() -> f64 {
        0.09
    }
    fn f1() -> f64 {
        0.12
    }

    /// Modulation envelope at time `t` (1-based).
    pub fn envelope(&self, t: usize) -> f64 {
        let t = t as f64;
        self.b0 + self.b1 * (2.0 * PI * self.f0 * t).cos() + self.b2 * (2.0 * PI * self.f1 * t).sin()
    }
}

impl Default for HiddenParams {
    fn default() -> Self {
        Self {
            b0: Self::b0(),
            b1: Self::b1(),
            b2: Self::b2(),
            f0: Self::f0(),
            f1: Self::f1(),
        }
    }
}

/// `y_t = envelope(t) * x_t` with `x_t` the AR(2) carrier drawn from `seed`.
pub fn gen_hidden(phi1: f64, phi2: f64, h: &HiddenParams, n: usize, burn_in: usize, seed: u64) -> Result<Vec<f64>> {
    let x = gen_ar2(phi1, phi2, n, burn_in, seed)?;
    Ok(x.iter().enumerate().map(|(i, v)| h.envelope(i + 1) * v).collect())
}

/// Mixing weight applied to the low-pass component.
pub fn mixing_w1(x: f64) -> f64 {
    if x < -0.8 {
        0.75
    } else if x <= 0.8 {
        -13.0 / 32.0 * x + 0.425
    } else {
        0.1
    }
}

/// Mixing weight applied to the first-stage mixture.
pub fn mixing_w2(x: f64) -> f64 {
    if x < -0.4 {
        0.5
    } else if x <= 0.0 {
        -1.25 * x
    } else {
        0.0
    }
}

pub fn gen_mixture(n: usize, seed: u64) -> Result<Vec<f64>> {
    gen_mixture_with_burn_in(n, DEFAULT_BURN_IN, seed)
}

/// The three AR components of the mixture model, each from its own sub-seed.
pub fn mixture_components(n: usize, burn_in: usize, seed: u64) -> [Vec<f64>; 3] {
    let shocks = |s: u64| normals(&mut rng_for(derive_seed(seed, s), 0), n + burn_in);
    [
        ar_filter(&[0.8], &shocks(1), burn_in),
        ar_filter(&[-0.75], &shocks(2), burn_in),
        ar_filter(&[0.0, -0.81], &shocks(3), burn_in),
    ]
}

pub fn gen_mixture_with_burn_in(n: usize, burn_in: usize, seed: u64) -> Result<Vec<f64>> {
    if n < 8 {
        return domain(format!("mixture length must be >= 8, got {n}"));
    }
    let [x1, x2, x3] = mixture_components(n, burn_in, seed);
    Ok((0..n)
        .map(|t| {
            let w1 = mixing_w1(x1[t]);
            let z = w1 * x1[t] + (1.0 - w1) * x2[t];
            let w2 = mixing_w2(z);
            w2 * z + (1.0 - w2) * x3[t]
        })
        .collect())
}

/// GARCH(1,1): `y_t ~ N(0, s_t^2)`, `s_t^2 = omega0 + arch y_{t-1}^2 + garch s_{t-1}^2`,
/// initialised at the stationary variance.
pub fn gen_garch11(omega0: f64, arch: f64, garch: f64, n: usize, burn_in: usize, seed: u64) -> Result<Vec<f64>> {
    check_garch(omega0, arch, garch)?;
    let z = normals(&mut rng_for(seed, 0), n + burn_in);
    let mut var = omega0 / (1.0 - arch - garch);
    let mut prev_y = 0.0;
    let mut out = Vec::with_capacity(n);
    for (t, zt) in z.iter().enumerate() {
        if t > 0 {
            var = garch_variance(omega0, arch, garch, prev_y, var);
        }
        let y = var.sqrt() * zt;
        if t >= burn_in {
            out.push(y);
        }
        prev_y = y;
    }
    Ok(out)
}

/// One step of the GARCH(1,1) variance recursion.
pub fn garch_variance(omega0: f64, arch: f64, garch: f64, prev_y: f64, prev_var: f64) -> f64 {
    omega0 + arch * prev_y * prev_y + garch * prev_var
}

/// Contamination families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierKind {
    /// Add `c sd` at one time point.
    SinglePoint,
    /// Add `c sd` on `[t*, t* + 5]`.
    Burst,
    /// Add an eyeblink waveform with peak `c sd` and trough `-0.6 c sd` on
    /// `[t*, t* + 50]`.
    Eyeblink,
}

impl OutlierKind {
    /// Number of samples touched after `t*`.
    pub fn extent(&self) -> usize {
        match self {
            OutlierKind::SinglePoint => 0,
            OutlierKind::Burst => 5,
            OutlierKind::Eyeblink => EYEBLINK_LEN - 1,
        }
    }
}

/// Onset of a contamination, as a 1-based time index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Fixed(usize),
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutlierSpec {
    pub kind: OutlierKind,
    /// Magnitude in units of the sample standard deviation of the input.
    pub c: f64,
    #[serde(default = "random_placement")]
    pub t_star: Placement,
    #[serde(default)]
    pub seed: u64,
}

fn random_placement() -> Placement {
    Placement::Random
}

impl OutlierSpec {
    pub fn new(kind: OutlierKind, c: f64, t_star: Placement, seed: u64) -> Self {
        Self { kind, c, t_star, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return domain(format!("outlier magnitude must be positive, got {}", self.c));
        }
        Ok(())
    }

    /// Resolve the 1-based onset for a series of length `n`.
    pub fn onset(&self, n: usize) -> Result<usize> {
        let last = n
            .checked_sub(self.kind.extent())
            .filter(|&l| l >= 1)
            .ok_or_else(|| Error::Domain(format!("series of length {n} too short for {:?}", self.kind)))?;
        match self.t_star {
            Placement::Fixed(t) if (1..=last).contains(&t) => Ok(t),
            Placement::Fixed(t) => domain(format!("t* = {t} outside the legal range [1, {last}]")),
            Placement::Random => Ok(rng_for(self.seed, 0x0007_11e5).random_range(1..=last)),
        }
    }

    /// Copy with a different placement seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

pub const EYEBLINK_LEN: usize = 51;

fn gamma_lobe(tau: f64, shape: f64, scale: f64) -> f64 {
    if tau <= 0.0 {
        0.0
    } else {
        tau.powf(shape - 1.0) * (-tau / scale).exp()
    }
}

/// Unit eyeblink waveform over 51 samples: maximum exactly `+1` (eye
/// closure) and minimum exactly `-0.6` (eye reopening).
///
/// Built from a closure lobe `tau^2 e^{-tau/4}` and a reopening lobe
/// `(tau-12)^3 e^{-(tau-12)/5}`, sampled at `tau = 1..=51`. Each lobe is
/// scaled to unit peak, the reopening lobe weighted by -0.6, and the
/// positive and negative parts of the sum are rescaled so that the extremes
/// hit `+1` and `-0.6` exactly.
pub fn eyeblink_waveform() -> [f64; EYEBLINK_LEN] {
    let mut up = [0.0; EYEBLINK_LEN];
    let mut down = [0.0; EYEBLINK_LEN];
    for s in 0..EYEBLINK_LEN {
        let tau = (s + 1) as f64;
        up[s] = gamma_lobe(tau, 3.0, 4.0);
        down[s] = gamma_lobe(tau - 12.0, 4.0, 5.0);
    }
    let up_max = up.iter().cloned().fold(0.0, f64::max);
    let down_max = down.iter().cloned().fold(0.0, f64::max);
    let mut w = [0.0; EYEBLINK_LEN];
    for s in 0..EYEBLINK_LEN {
        w[s] = up[s] / up_max - 0.6 * down[s] / down_max;
    }
    let pos = w.iter().cloned().fold(0.0, f64::max);
    let neg = w.iter().cloned().fold(0.0, f64::min);
    for v in w.iter_mut() {
        if *v > 0.0 {
            *v /= pos;
        } else if *v < 0.0 {
            *v *= -0.6 / neg;
        }
    }
    w
}

/// Contaminate a copy of `y`. Untouched samples are bit-identical to the
/// input; magnitudes are multiples of the input's sample standard deviation.
pub fn inject_outliers(y: &[f64], spec: &OutlierSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = y.len();
    let t0 = spec.onset(n)? - 1;
    let amp = spec.c * sample_std(y);
    let mut out = y.to_vec();
    match spec.kind {
        OutlierKind::SinglePoint => out[t0] += amp,
        OutlierKind::Burst => out[t0..=t0 + 5].iter_mut().for_each(|v| *v += amp),
        OutlierKind::Eyeblink => {
            for (v, w) in out[t0..t0 + EYEBLINK_LEN].iter_mut().zip(eyeblink_waveform()) {
                *v += amp * w;
            }
        }
    }
    Ok(out)
}
