use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use dwmoe::data::{self, DriftSpec, SampleTable};
use dwmoe::experiment::{self, ClassifyConfig, ExperimentConfig};
use dwmoe::report::{self, ReportFormat};
use dwmoe::{Ensemble, Error, Result, Scheme};

#[derive(Parser)]
#[command(name = "dwmoe", version, about = "Region-weighted MLP ensembles for drifting time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataKind {
    Crescents,
    Drift,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Unweighted,
    Static,
    Dynamic,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Unweighted => Scheme::Unweighted,
            SchemeArg::Static => Scheme::Static,
            SchemeArg::Dynamic => Scheme::Dynamic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV.
    GenData {
        #[arg(long, value_enum)]
        kind: DataKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of crescent points.
        #[arg(long, default_value_t = 200, conflicts_with = "spec")]
        n: usize,
        /// Crescent noise standard deviation.
        #[arg(long, default_value_t = 0.1, conflicts_with = "spec")]
        noise: f64,
        /// Drift spec JSON; the built-in two-regime series is used otherwise.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Grow an ensemble on the leading training span of a dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Experiment config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Column predicted when the data is a raw price CSV.
        #[arg(long, default_value_t = 0)]
        target_feature: usize,
    },
    /// Walk-forward evaluation of a trained ensemble.
    Predict {
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long)]
        out: PathBuf,
        /// Leading samples to ignore.
        #[arg(long, default_value_t = 0)]
        skip: usize,
        /// Samples after the skipped ones that only prime the weights.
        /// Defaults to the ensemble's window length.
        #[arg(long)]
        warmup: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long, default_value_t = 0)]
        target_feature: usize,
    },
    /// Accuracy of 0, 1, 2 and 4 region weights on crescent data.
    BenchClassify {
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
    },
    /// Compare weighting schemes on a forecasting dataset.
    BenchForecast {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse().and_then(check_usage) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn check_usage(cli: Cli) -> std::result::Result<Cli, clap::Error> {
    if let Command::GenData {
        kind: DataKind::Crescents,
        spec: Some(_),
        ..
    } = &cli.command
    {
        return Err(Cli::command().error(ErrorKind::ArgumentConflict, "--spec only applies to --kind drift"));
    }
    Ok(cli)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read(path)?)?)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenData {
            kind,
            out,
            seed,
            n,
            noise,
            spec,
        } => {
            let table = match kind {
                DataKind::Crescents => {
                    let points = data::gen_crescents(n, noise, seed)?;
                    SampleTable {
                        key_column: "id".into(),
                        keys: (0..points.len()).map(|i| i.to_string()).collect(),
                        feature_names: vec!["x1".into(), "x2".into()],
                        samples: points
                            .iter()
                            .map(|p| data::Sample::new(p.x.to_vec(), f64::from(p.label)))
                            .collect(),
                    }
                }
                DataKind::Drift => {
                    let spec = match spec {
                        Some(path) => DriftSpec {
                            seed,
                            ..read_json(&path)?
                        },
                        None => DriftSpec::two_regime(seed),
                    };
                    let (m, targets) = data::gen_drifting_series(&spec)?;
                    let samples = data::drift_samples(&m, &targets);
                    SampleTable {
                        key_column: "date".into(),
                        keys: data::synthetic_dates(samples.len()),
                        feature_names: m.feature_names.clone(),
                        samples,
                    }
                }
            };
            write(&out, &data::write_samples_csv(&table))
        }
        Command::Train {
            data: data_path,
            config,
            out,
            seed,
            target_feature,
        } => {
            let mut cfg: ExperimentConfig = match config {
                Some(path) => read_json(&path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            cfg.validate()?;
            let samples = data::load_dataset(&read(&data_path)?, target_feature)?;
            let ensemble = experiment::train_ensemble(&samples, &cfg, 0)?;
            let mut json = serde_json::to_string_pretty(&ensemble)?;
            json.push('\n');
            write(&out, &json)
        }
        Command::Predict {
            ensemble,
            data: data_path,
            scheme,
            out,
            skip,
            warmup,
            format,
            target_feature,
        } => {
            let ensemble: Ensemble = read_json(&ensemble)?;
            let samples = data::load_dataset(&read(&data_path)?, target_feature)?;
            let warmup = warmup.unwrap_or(ensemble.weighting().window);
            let test_start = skip + warmup;
            if test_start >= samples.len() {
                return Err(Error::InsufficientData {
                    needed: test_start + 1,
                    available: samples.len(),
                });
            }
            let report = report::evaluate_scheme(
                &ensemble,
                scheme.into(),
                &samples[skip..test_start],
                &samples[test_start..],
            )?;
            let format = match format {
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Json => ReportFormat::Json,
            };
            write(&out, &report::emit_report(&report, format))
        }
        Command::BenchClassify {
            reps,
            seed,
            out,
            n,
            noise,
        } => {
            let cfg = ClassifyConfig {
                repetitions: reps,
                seed,
                n,
                noise,
                ..ClassifyConfig::default()
            };
            let table = experiment::run_classification_ablation(&cfg)?;
            write(&out, &table.to_csv())
        }
        Command::BenchForecast { config, out, seed } => {
            let mut cfg: ExperimentConfig = match config {
                Some(path) => read_json(&path)?,
                None => ExperimentConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let table = experiment::run_forecast_experiment(&cfg)?;
            write(&out, &table.to_csv())
        }
    }
}
