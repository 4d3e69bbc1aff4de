//! JSON-configured experiments and their output files.
//!
//! Every experiment is computed in full before any file is written, and all
//! outputs are pure functions of the configuration (seed included).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::Estimator;
use crate::inference::{power_study, NullMethod, PowerStudy, PowerTable, Scenario};
use crate::io::{matrix_csv, series_csv, to_json, write_atomic};
use crate::loss::PsiSpec;
use crate::montecarlo::{average_periodograms, AverageOptions};
use crate::periodogram::{default_alpha_grid, PeriodogramMatrix};
use crate::regress::SolverConfig;
use crate::simgen::{inject_outliers, ModelSpec, OutlierSpec};
use crate::spectrogram::spectrogram;
use crate::spectrum::{ahs_theoretical_garch, AhsMonteCarlo, GarchConfig};
use crate::svg;

fn default_levels() -> Vec<f64> {
    vec![0.01, 0.05]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerStudyConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub model: ModelSpec,
    pub scenarios: Vec<Scenario>,
    pub estimators: Vec<Estimator>,
    pub reps: usize,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub null: NullMethod,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AveragedPeriodogramConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub model: ModelSpec,
    #[serde(default)]
    pub outlier: Option<OutlierSpec>,
    pub estimators: Vec<Estimator>,
    pub reps: usize,
    pub seed: u64,
    /// Daniell bandwidth applied to each replicate.
    #[serde(default)]
    pub smooth_bw: Option<usize>,
    #[serde(default = "default_true")]
    pub normalize: bool,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GarchAhsConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub garch: GarchConfig,
    pub n: usize,
    /// Defaults to 0.05, 0.07, ..., 0.95.
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub psi: PsiSpec,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub smooth_bw: Option<usize>,
    #[serde(default = "default_true")]
    pub normalize: bool,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrogramConfig {
    #[serde(default)]
    pub name: Option<String>,
    /// Generator of the analysed series.
    pub model: ModelSpec,
    /// Contamination applied in order to the generated series.
    #[serde(default)]
    pub outliers: Vec<OutlierSpec>,
    pub window_len: usize,
    pub overlap: usize,
    pub estimators: Vec<Estimator>,
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    PowerStudy(PowerStudyConfig),
    AveragedPeriodogram(AveragedPeriodogramConfig),
    GarchAhs(GarchAhsConfig),
    Spectrogram(SpectrogramConfig),
}

/// Bundled presets, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("table1_desk", include_str!("../presets/table1_desk.json")),
    ("table2_desk", include_str!("../presets/table2_desk.json")),
    ("table3_desk", include_str!("../presets/table3_desk.json")),
    ("fig1_desk", include_str!("../presets/fig1_desk.json")),
    ("fig1_alpha_grid", include_str!("../presets/fig1_alpha_grid.json")),
    ("fig1c_hidden", include_str!("../presets/fig1c_hidden.json")),
    ("fig2_mixture", include_str!("../presets/fig2_mixture.json")),
    (
        "fig4_fisher_averages",
        include_str!("../presets/fig4_fisher_averages.json"),
    ),
    ("garch_ahs", include_str!("../presets/garch_ahs.json")),
    ("spectrogram_demo", include_str!("../presets/spectrogram_demo.json")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// One output file: a name relative to the output directory and its contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub file: String,
    pub contents: String,
}

impl Artifact {
    fn new(file: impl Into<String>, contents: String) -> Self {
        Self {
            file: file.into(),
            contents,
        }
    }
}

fn check_nonempty<T>(v: &[T], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("{what} must not be empty")));
    }
    Ok(())
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Domain(m) | Error::Data(m) => Error::Config(m),
        other => other,
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::PowerStudy(_) => "power_study",
            ExperimentConfig::AveragedPeriodogram(_) => "averaged_periodogram",
            ExperimentConfig::GarchAhs(_) => "garch_ahs",
            ExperimentConfig::Spectrogram(_) => "spectrogram",
        }
    }

    /// Base name of the output files.
    pub fn name(&self) -> String {
        let n = match self {
            ExperimentConfig::PowerStudy(c) => &c.name,
            ExperimentConfig::AveragedPeriodogram(c) => &c.name,
            ExperimentConfig::GarchAhs(c) => &c.name,
            ExperimentConfig::Spectrogram(c) => &c.name,
        };
        n.clone().unwrap_or_else(|| self.kind().to_string())
    }

    /// Check everything that can be checked without simulating.
    pub fn validate(&self) -> Result<()> {
        let name = self.name();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::Config(format!(
                "experiment name {name:?} must be non-empty [A-Za-z0-9_-]"
            )));
        }
        match self {
            ExperimentConfig::PowerStudy(c) => c.study().validate().map_err(config_err),
            ExperimentConfig::AveragedPeriodogram(c) => {
                check_nonempty(&c.estimators, "estimators")?;
                (|| {
                    c.model.validate()?;
                    c.solver.validate()?;
                    for e in &c.estimators {
                        e.validate()?;
                    }
                    if let Some(o) = &c.outlier {
                        o.validate()?;
                        o.onset(c.model.n)?;
                    }
                    Ok(())
                })()
                .map_err(config_err)?;
                check_reps(c.reps)?;
                check_bw(c.smooth_bw)
            }
            ExperimentConfig::GarchAhs(c) => {
                if c.n < crate::periodogram::MIN_LEN {
                    return Err(Error::Config(format!("n must be >= {}", crate::periodogram::MIN_LEN)));
                }
                let g = &c.garch;
                if !(g.omega0 > 0.0 && g.arch >= 0.0 && g.garch >= 0.0 && g.arch + g.garch < 1.0) {
                    return Err(Error::Config(
                        "GARCH parameters must satisfy omega0 > 0, arch + garch < 1".into(),
                    ));
                }
                if let Some(a) = &c.alphas {
                    check_nonempty(a, "alphas")?;
                    for &x in a {
                        crate::loss::check_alpha(x).map_err(config_err)?;
                    }
                }
                c.solver.validate()?;
                check_reps(c.reps)?;
                check_bw(c.smooth_bw)
            }
            ExperimentConfig::Spectrogram(c) => {
                check_nonempty(&c.estimators, "estimators")?;
                (|| {
                    c.model.validate()?;
                    c.solver.validate()?;
                    for e in &c.estimators {
                        e.validate()?;
                    }
                    for o in &c.outliers {
                        o.validate()?;
                        o.onset(c.model.n)?;
                    }
                    crate::spectrogram::window_starts(c.model.n, c.window_len, c.overlap).map(|_| ())
                })()
                .map_err(config_err)
            }
        }
    }

    /// Run the experiment and return its output files (nothing is written).
    pub fn run(&self) -> Result<Vec<Artifact>> {
        self.validate()?;
        let name = self.name();
        let cfg_json = serde_json::to_value(self)?;
        match self {
            ExperimentConfig::PowerStudy(c) => {
                let table = power_study(&c.study())?;
                Ok(vec![
                    Artifact::new(format!("{name}.csv"), table.to_csv()),
                    Artifact::new(
                        format!("{name}.json"),
                        to_json(&Report {
                            config: cfg_json,
                            result: &table,
                        })?,
                    ),
                    Artifact::new(format!("{name}.svg"), power_svg(&name, &table)),
                ])
            }
            ExperimentConfig::AveragedPeriodogram(c) => {
                let mut opts = AverageOptions::new(c.reps, c.seed);
                opts.bandwidth = c.smooth_bw;
                opts.normalize = c.normalize;
                opts.solver = c.solver;
                let m = average_periodograms(&c.model, c.outlier.as_ref(), &c.estimators, &opts)?;
                Ok(matrix_artifacts(&name, &m, cfg_json, "averaged periodogram")?)
            }
            ExperimentConfig::GarchAhs(c) => {
                let alphas = c.alphas.clone().unwrap_or_else(default_alpha_grid);
                let mc = AhsMonteCarlo {
                    reps: c.reps,
                    n: c.n,
                    seed: c.seed,
                    bandwidth: c.smooth_bw,
                    normalize: c.normalize,
                    solver: c.solver,
                };
                let est = ahs_theoretical_garch(&c.garch, &alphas, c.psi, &mc)?;
                let m = est.to_matrix();
                let mut out = matrix_artifacts(&name, &m, cfg_json, "asymmetric Huber spectrum")?;
                let summary = band_summary(&m);
                out.push(Artifact::new(format!("{name}_bands.json"), to_json(&summary)?));
                out.push(Artifact::new(
                    format!("{name}_eta.json"),
                    to_json(&EtaReport {
                        alphas: &est.alphas,
                        eta: &est.eta,
                    })?,
                ));
                Ok(out)
            }
            ExperimentConfig::Spectrogram(c) => {
                let mut y = c.model.generate(c.seed)?;
                for o in &c.outliers {
                    y = inject_outliers(&y, o)?;
                }
                let mut out = vec![Artifact::new(format!("{name}_series.csv"), series_csv(&y))];
                let idx: Vec<f64> = (1..=y.len()).map(|t| t as f64).collect();
                out.push(Artifact::new(
                    format!("{name}_series.svg"),
                    svg::line_plot(
                        &format!("{name}: input series"),
                        "t",
                        "y",
                        &idx,
                        &[("y".to_string(), y.clone())],
                    ),
                ));
                for e in &c.estimators {
                    let s = spectrogram(&y, c.window_len, c.overlap, e, &c.solver)?;
                    let label = e.label();
                    let fx: Vec<f64> = (1..=s.freqs.len()).map(|k| k as f64 / s.window_len as f64).collect();
                    let cy: Vec<f64> = s.centers.iter().map(|&c| c as f64).collect();
                    // heatmap rows are frequencies, columns are windows
                    let nf = s.freqs.len();
                    let z: Vec<f64> = (0..nf)
                        .flat_map(|k| (0..s.nwindows()).map(move |w| (w, k)))
                        .map(|(w, k)| s.values[w * nf + k])
                        .collect();
                    out.push(Artifact::new(format!("{name}_{label}.csv"), s.to_long_csv()));
                    out.push(Artifact::new(format!("{name}_{label}.json"), to_json(&s)?));
                    out.push(Artifact::new(
                        format!("{name}_{label}.svg"),
                        svg::heatmap(
                            &format!("{name}: {label} (log)"),
                            "window centre",
                            "frequency",
                            &cy,
                            &fx,
                            &z,
                        ),
                    ));
                }
                Ok(out)
            }
        }
    }

    /// Run and write every artifact into `dir`; returns the written paths.
    pub fn run_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let arts = self.run()?;
        write_artifacts(dir, &arts)
    }
}

pub fn write_artifacts(dir: &Path, arts: &[Artifact]) -> Result<Vec<PathBuf>> {
    arts.iter()
        .map(|a| {
            let p = dir.join(&a.file);
            write_atomic(&p, &a.contents)?;
            Ok(p)
        })
        .collect()
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::Config("reps must be >= 1".into()));
    }
    Ok(())
}

fn check_bw(bw: Option<usize>) -> Result<()> {
    match bw {
        Some(b) if b == 0 || b % 2 == 0 => Err(Error::Config(format!(
            "smooth_bw must be a positive odd integer, got {b}"
        ))),
        _ => Ok(()),
    }
}

impl PowerStudyConfig {
    pub fn study(&self) -> PowerStudy {
        PowerStudy {
            model: self.model,
            scenarios: self.scenarios.clone(),
            estimators: self.estimators.clone(),
            reps: self.reps,
            levels: self.levels.clone(),
            seed: self.seed,
            null: self.null,
            solver: self.solver,
        }
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: serde_json::Value,
    result: &'a T,
}

#[derive(Serialize)]
struct EtaReport<'a> {
    alphas: &'a [f64],
    eta: &'a [f64],
}

/// Mean ordinate on `f < 0.1` and on `f > 0.4`, and their ratio, per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSummary {
    pub label: String,
    pub low_mean: f64,
    pub high_mean: f64,
    pub ratio: f64,
}

pub fn band_summary(m: &PeriodogramMatrix) -> Vec<BandSummary> {
    band_summary_with(m, 0.1, 0.4)
}

pub fn band_summary_with(m: &PeriodogramMatrix, low_below: f64, high_above: f64) -> Vec<BandSummary> {
    let f = m.normalized_freqs();
    (0..m.ncols())
        .map(|j| {
            let col = m.column(j);
            let avg = |sel: &dyn Fn(f64) -> bool| {
                let v: Vec<f64> = f.iter().zip(&col).filter(|(x, _)| sel(**x)).map(|(_, v)| *v).collect();
                crate::util::mean(&v)
            };
            let lo = avg(&|x| x < low_below);
            let hi = avg(&|x| x > high_above);
            BandSummary {
                label: m.labels[j].clone(),
                low_mean: lo,
                high_mean: hi,
                ratio: lo / hi,
            }
        })
        .collect()
}

fn matrix_artifacts(name: &str, m: &PeriodogramMatrix, cfg: serde_json::Value, what: &str) -> Result<Vec<Artifact>> {
    let f = m.normalized_freqs();
    let mut out = vec![
        Artifact::new(format!("{name}.csv"), matrix_csv(m)),
        Artifact::new(format!("{name}.json"), to_json(&Report { config: cfg, result: m })?),
    ];
    if m.ncols() <= 10 {
        let series: Vec<(String, Vec<f64>)> = (0..m.ncols()).map(|j| (m.labels[j].clone(), m.column(j))).collect();
        out.push(Artifact::new(
            format!("{name}.svg"),
            svg::line_plot(&format!("{name}: {what}"), "frequency", "ordinate", &f, &series),
        ));
    } else {
        // rows are frequencies, columns are alphas
        out.push(Artifact::new(
            format!("{name}.svg"),
            svg::heatmap(
                &format!("{name}: {what}"),
                "alpha",
                "frequency",
                &m.alphas,
                &f,
                &m.values,
            ),
        ));
    }
    Ok(out)
}

fn power_svg(name: &str, t: &PowerTable) -> String {
    let x: Vec<f64> = (0..t.scenarios.len()).map(|s| s as f64).collect();
    let mut series = Vec::new();
    for (l, level) in t.levels.iter().enumerate() {
        for (e, label) in t.estimators.iter().enumerate() {
            series.push((
                format!("{label} @{level}"),
                (0..t.scenarios.len()).map(|s| t.pd(s, l, e)).collect(),
            ));
        }
    }
    svg::line_plot(
        &format!("{name}: probability of detection"),
        &t.scenarios.join(" | "),
        "PD",
        &x,
        &series,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for (name, text) in PRESETS {
            let c = ExperimentConfig::from_json(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(&c.name(), name);
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = r#"{"experiment":"averaged_periodogram","model":{"model":{"kind":"white_noise"},"n":64},
            "estimators":[{"kind":"pg"}],"reps":2,"seed":1,"bogus":3}"#;
        assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Config(_))));
        let bad = r#"{"experiment":"nope"}"#;
        assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_values_rejected_before_running() {
        let bad = r#"{"experiment":"averaged_periodogram","model":{"model":{"kind":"ar2","phi1":1.5,"phi2":0.0},"n":64},
            "estimators":[{"kind":"pg"}],"reps":2,"seed":1}"#;
        assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Config(_))));
        let bad = r#"{"experiment":"averaged_periodogram","model":{"model":{"kind":"white_noise"},"n":64},
            "estimators":[{"kind":"pg"}],"reps":0,"seed":1}"#;
        assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Config(_))));
        let bad = r#"{"experiment":"averaged_periodogram","model":{"model":{"kind":"white_noise"},"n":64},
            "estimators":[{"kind":"pg"}],"reps":1,"seed":1,"smooth_bw":4}"#;
        assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Config(_))));
    }

    #[test]
    fn small_run_is_reproducible() {
        let cfg = r#"{"experiment":"averaged_periodogram","name":"tiny","model":{"model":{"kind":"ar2","phi1":0.0,"phi2":-0.36},"n":32},
            "estimators":[{"kind":"pg"},{"kind":"ahp","alpha":0.8,"psi_mult":1.345}],"reps":1,"seed":4,"smooth_bw":3}"#;
        let c = ExperimentConfig::from_json(cfg).unwrap();
        let a = c.run().unwrap();
        assert_eq!(a, c.run().unwrap());
        let files: Vec<&str> = a.iter().map(|x| x.file.as_str()).collect();
        assert_eq!(files, ["tiny.csv", "tiny.json", "tiny.svg"]);
    }
}
