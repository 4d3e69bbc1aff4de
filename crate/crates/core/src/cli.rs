//! Command-line interface: `analyze`, `experiment`, `simulate`, `spectrogram`.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::Estimator;
use crate::experiment::{preset, write_artifacts, Artifact, ExperimentConfig, PRESETS};
use crate::inference::{fisher_test, FisherResult, MonteCarloNull};
use crate::io::{matrix_csv, read_series, series_csv, to_json};
use crate::loss::PsiSpec;
use crate::periodogram::{alpha_grid, compute_ahp, default_alpha_grid, normalize, smooth, PeriodogramMatrix};
use crate::regress::SolverConfig;
use crate::simgen::{inject_outliers, ModelSpec, OutlierSpec};
use crate::spectrogram::{log_transform, spectrogram};
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ahp", version, about = "Asymmetric Huber periodogram toolkit")]
struct Cli {
    /// Worker threads (affects wall time only).
    #[arg(long, global = true, env = "AHP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Periodogram and Fisher test of a series read from CSV.
    Analyze(AnalyzeArgs),
    /// Run a JSON experiment configuration or a bundled preset.
    Experiment(ExperimentArgs),
    /// Write a synthetic series to CSV.
    Simulate(SimulateArgs),
    /// Sliding-window log-periodogram of a series read from CSV.
    Spectrogram(SpectrogramArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    Ahp,
    Pg,
    Ep,
    Hp,
    QpApprox,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum NullArg {
    Exact,
    Montecarlo,
}

#[derive(Args, Debug, Clone)]
struct EstimatorFlags {
    /// Quantile level(s); comma-separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "alpha_grid")]
    alpha: Vec<f64>,
    /// Alpha grid `start:stop:step`; without a value, 0.05..0.95 step 0.02.
    #[arg(long, num_args = 0..=1, default_missing_value = "default")]
    alpha_grid: Option<String>,
    /// Absolute threshold.
    #[arg(long, conflicts_with = "psi_mult")]
    psi: Option<f64>,
    /// Threshold as a multiple of the sample standard deviation [default: 1.345].
    #[arg(long)]
    psi_mult: Option<f64>,
    #[arg(long, value_enum, default_value = "ahp")]
    estimator: EstimatorArg,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// CSV with one column (value) or two (index, value); header optional.
    input: PathBuf,
    #[command(flatten)]
    est: EstimatorFlags,
    /// Scale each column to sum to one.
    #[arg(long)]
    normalize: bool,
    /// Daniell smoothing bandwidth (odd).
    #[arg(long)]
    smooth_bw: Option<usize>,
    /// Significance level(s) for Fisher's test; comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05")]
    fisher_level: Vec<f64>,
    /// Null distribution of Fisher's g.
    #[arg(long, value_enum, default_value = "exact")]
    null: NullArg,
    /// Replicates of the Monte Carlo null.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Take natural logs of the (positive) input first.
    #[arg(long)]
    log_input: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write an SVG plot.
    #[arg(long)]
    plot: bool,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Path to a JSON configuration.
    #[arg(required_unless_present_any = ["preset", "list"], conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of a bundled preset.
    #[arg(long)]
    preset: Option<String>,
    /// List bundled presets and exit.
    #[arg(long)]
    list: bool,
    /// Print the resolved configuration instead of running it.
    #[arg(long)]
    print_config: bool,
    /// Override the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of replicates.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Model as JSON, e.g. '{"model":{"kind":"ar2","phi1":0.9,"phi2":-0.9},"n":200}', or @file.json.
    #[arg(long)]
    model: String,
    /// Contamination as JSON (repeatable), e.g. '{"kind":"single_point","c":30}'.
    #[arg(long)]
    outlier: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file name inside --out-dir.
    #[arg(long, default_value = "series.csv")]
    name: String,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct SpectrogramArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 400)]
    window: usize,
    #[arg(long, default_value_t = 200)]
    overlap: usize,
    #[command(flatten)]
    est: EstimatorFlags,
    #[arg(long)]
    log_input: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write an SVG heatmap.
    #[arg(long)]
    plot: bool,
}

/// Map a library error to an exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Config(_) | Error::Domain(_) | Error::Json(_) => EXIT_USAGE,
        Error::Data(_) | Error::Io(_) => EXIT_DATA,
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(cli.cmd)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Analyze(a) => analyze(a),
        Command::Experiment(a) => experiment(a),
        Command::Simulate(a) => simulate(a),
        Command::Spectrogram(a) => cmd_spectrogram(a),
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl EstimatorFlags {
    fn psi(&self) -> PsiSpec {
        match (self.psi, self.psi_mult) {
            (Some(p), _) => PsiSpec::Absolute(p),
            (None, Some(m)) => PsiSpec::StdMultiple(m),
            (None, None) => PsiSpec::default(),
        }
    }

    fn alphas(&self) -> Result<Vec<f64>> {
        if !self.alpha.is_empty() {
            return Ok(self.alpha.clone());
        }
        match self.alpha_grid.as_deref() {
            None | Some("default") => Ok(default_alpha_grid()),
            Some(s) => {
                let parts: Vec<&str> = s.split(':').collect();
                let nums: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
                match nums.as_deref() {
                    Some(&[a, b, c]) => alpha_grid(a, b, c),
                    _ => Err(usage(format!("--alpha-grid expects start:stop:step, got {s:?}"))),
                }
            }
        }
    }

    /// One estimator per requested column.
    fn estimators(&self) -> Result<Vec<Estimator>> {
        let psi = self.psi();
        let ests: Vec<Estimator> = match self.estimator {
            EstimatorArg::Pg => vec![Estimator::Pg],
            EstimatorArg::Hp => vec![Estimator::Hp { psi }],
            EstimatorArg::Ahp => self
                .alphas()?
                .into_iter()
                .map(|alpha| Estimator::Ahp { alpha, psi })
                .collect(),
            EstimatorArg::Ep => self
                .alphas()?
                .into_iter()
                .map(|alpha| Estimator::Ep { alpha })
                .collect(),
            EstimatorArg::QpApprox => self
                .alphas()?
                .into_iter()
                .map(|alpha| Estimator::QpApprox { alpha })
                .collect(),
        };
        for e in &ests {
            e.validate()?;
        }
        Ok(ests)
    }

    fn matrix(&self, y: &[f64], cfg: &SolverConfig) -> Result<PeriodogramMatrix> {
        if self.estimator == EstimatorArg::Ahp {
            return compute_ahp(y, &self.alphas()?, self.psi(), cfg);
        }
        let ests = self.estimators()?;
        let mut cols = Vec::with_capacity(ests.len());
        let mut nonconv = Vec::with_capacity(ests.len());
        for e in &ests {
            let c = e.ordinates(y, cfg)?;
            nonconv.push(c.nonconverged);
            cols.push(c.values);
        }
        let psi = match ests[0].ahp_form() {
            Some((_, p)) => Some(p.resolve(y)?),
            None => None,
        };
        let mut m = PeriodogramMatrix::from_columns(
            y.len(),
            ests.iter().map(|e| e.alpha()).collect(),
            ests.iter().map(|e| e.label()).collect(),
            psi,
            &cols,
        )?;
        m.nonconverged = nonconv;
        Ok(m)
    }
}

fn load_input(path: &Path, log_input: bool) -> Result<Vec<f64>> {
    let y = read_series(path)?;
    if log_input {
        log_transform(&y)
    } else {
        Ok(y)
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "series".into(), |s| s.to_string_lossy().into_owned())
}

#[derive(Serialize)]
struct FisherReport<'a> {
    label: &'a str,
    null: &'static str,
    #[serde(flatten)]
    result: FisherResult,
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    if let Some(bw) = a.smooth_bw {
        if bw == 0 || bw % 2 == 0 {
            return Err(usage(format!("--smooth-bw must be a positive odd integer, got {bw}")));
        }
    }
    let y = load_input(&a.input, a.log_input)?;
    let cfg = SolverConfig::default();
    let raw = a.est.matrix(&y, &cfg)?;
    let frac = raw.nonconverged_fraction();
    if frac > 0.01 {
        eprintln!("warning: {:.1}% of the robust fits did not converge", 100.0 * frac);
    }

    // Fisher's test uses the unsmoothed ordinates (scale does not matter).
    let ests = a.est.estimators()?;
    let mut reports = Vec::with_capacity(raw.ncols());
    for (j, e) in ests.iter().enumerate() {
        let col = raw.column(j);
        let mut r = fisher_test(&col, &raw.freqs, &a.fisher_level)?;
        let null = match a.null {
            NullArg::Exact => "exact",
            NullArg::Montecarlo => {
                let mc = MonteCarloNull::simulate(e, y.len(), a.reps, a.seed, &cfg)?;
                r.p_value = mc.pvalue(r.g_stat);
                r.reject = r.levels.iter().map(|&l| r.p_value <= l).collect();
                "montecarlo"
            }
        };
        reports.push(FisherReport {
            label: &raw.labels[j],
            null,
            result: r,
        });
    }

    let mut m = raw.clone();
    if a.normalize {
        m = normalize(&m)?;
    }
    if let Some(bw) = a.smooth_bw {
        m = smooth(&m, bw)?;
    }

    let base = stem(&a.input);
    let mut arts = vec![
        Artifact {
            file: format!("{base}_periodogram.csv"),
            contents: matrix_csv(&m),
        },
        Artifact {
            file: format!("{base}_periodogram.json"),
            contents: to_json(&m)?,
        },
        Artifact {
            file: format!("{base}_fisher.json"),
            contents: to_json(&reports)?,
        },
    ];
    if a.plot {
        let f = m.normalized_freqs();
        let contents = if m.ncols() <= 10 {
            let series: Vec<(String, Vec<f64>)> = (0..m.ncols()).map(|j| (m.labels[j].clone(), m.column(j))).collect();
            svg::line_plot(&base, "frequency", "ordinate", &f, &series)
        } else {
            svg::heatmap(&base, "alpha", "frequency", &m.alphas, &f, &m.values)
        };
        arts.push(Artifact {
            file: format!("{base}_periodogram.svg"),
            contents,
        });
    }
    for r in &reports {
        println!(
            "{}: g = {:.4}, p = {:.4e}, peak f = {:.4}",
            r.label,
            r.result.g_stat,
            r.result.p_value,
            (r.result.argmax_index + 1) as f64 / y.len() as f64
        );
    }
    for p in write_artifacts(&a.out_dir, &arts)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    if a.list {
        for (name, _) in PRESETS {
            println!("{name}");
        }
        return Ok(());
    }
    let text = match (&a.config, &a.preset) {
        (Some(p), _) => std::fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?,
        (None, Some(name)) => preset(name)
            .ok_or_else(|| usage(format!("unknown preset {name:?}; try --list")))?
            .to_string(),
        (None, None) => return Err(usage("a configuration path or --preset is required")),
    };
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| usage(e.to_string()))?;
    if let Some(obj) = value.as_object_mut() {
        if let Some(s) = a.seed {
            obj.insert("seed".into(), s.into());
        }
        if let Some(r) = a.reps {
            obj.insert("reps".into(), r.into());
        }
    }
    let cfg = ExperimentConfig::from_json(&value.to_string())?;
    if a.print_config {
        print!("{}", to_json(&cfg)?);
        return Ok(());
    }
    for p in cfg.run_to_dir(&a.out_dir)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn json_arg<T: serde::de::DeserializeOwned>(s: &str, what: &str) -> Result<T> {
    let text = match s.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?,
        None => s.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid {what}: {e}")))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let model: ModelSpec = json_arg(&a.model, "--model")?;
    let outliers: Vec<OutlierSpec> = a
        .outlier
        .iter()
        .map(|s| json_arg(s, "--outlier"))
        .collect::<Result<_>>()?;
    model.validate()?;
    for o in &outliers {
        o.validate()?;
        o.onset(model.n)?;
    }
    let mut y = model.generate(a.seed)?;
    for o in &outliers {
        y = inject_outliers(&y, o)?;
    }
    let arts = [Artifact {
        file: a.name,
        contents: series_csv(&y),
    }];
    for p in write_artifacts(&a.out_dir, &arts)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_spectrogram(a: SpectrogramArgs) -> Result<()> {
    let y = load_input(&a.input, a.log_input)?;
    let ests = a.est.estimators()?;
    if ests.len() != 1 {
        return Err(usage(
            "spectrogram takes exactly one estimator column (give a single --alpha)",
        ));
    }
    let mut s = spectrogram(&y, a.window, a.overlap, &ests[0], &SolverConfig::default())?;
    s.log_input = a.log_input;
    let base = format!("{}_spectrogram", stem(&a.input));
    let mut arts = vec![
        Artifact {
            file: format!("{base}.csv"),
            contents: s.to_long_csv(),
        },
        Artifact {
            file: format!("{base}.json"),
            contents: to_json(&s)?,
        },
    ];
    if a.plot {
        let nf = s.freqs.len();
        let fx: Vec<f64> = (1..=nf).map(|k| k as f64 / s.window_len as f64).collect();
        let cy: Vec<f64> = s.centers.iter().map(|&c| c as f64).collect();
        let z: Vec<f64> = (0..nf)
            .flat_map(|k| (0..s.nwindows()).map(move |w| (w, k)))
            .map(|(w, k)| s.values[w * nf + k])
            .collect();
        arts.push(Artifact {
            file: format!("{base}.svg"),
            contents: svg::heatmap(
                &format!("{} (log)", s.estimator),
                "window centre",
                "frequency",
                &cy,
                &fx,
                &z,
            ),
        });
    }
    println!("{} windows of {} samples, hop {}", s.nwindows(), s.window_len, s.hop);
    for p in write_artifacts(&a.out_dir, &arts)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}
