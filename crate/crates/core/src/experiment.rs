//! The two benchmark experiments: the region-weighting ablation on crescent
//! data and the weighting-scheme comparison on drifting series.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{self, DriftSpec, LabeledPoint, Sample};
use crate::ensemble::{
    grow_ensemble, score_sample, positive_class, Ensemble, GrowthConfig, Scheme, ScoreMode, ScoreRecord,
    WeightTable, WeightingConfig,
};
use crate::error::{Error, Result};
use crate::expert::{train_mcmc, MlpExpert, TrainConfig};
use crate::partition::Partition;
use crate::report::{evaluate_scheme, EvalReport};
use crate::rng::{derive_seed, rng_from_seed};

/// Where the forecasting samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Raw price CSV (or a prepared table with a `target` column).
    Csv {
        path: PathBuf,
        #[serde(default)]
        target_feature: usize,
    },
    Drift(DriftSpec),
}

impl DataSource {
    pub fn load(&self) -> Result<Vec<Sample>> {
        match self {
            DataSource::Csv { path, target_feature } => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                data::load_dataset(&text, *target_feature)
            }
            DataSource::Drift(spec) => {
                let (m, targets) = data::gen_drifting_series(spec)?;
                Ok(data::drift_samples(&m, &targets))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Defaults to the two-regime synthetic series generated from `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSource>,
    #[serde(default = "default_horizons")]
    pub horizons: Vec<usize>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Leading samples used to grow the ensemble.
    #[serde(default = "default_train_len")]
    pub train_len: usize,
    /// Features split at zero to form the regions.
    #[serde(default = "default_partition_features")]
    pub partition_features: Vec<usize>,
    #[serde(default)]
    pub growth: GrowthConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub weighting: WeightingConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_horizons() -> Vec<usize> {
    vec![4, 10, 20]
}
fn default_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}
fn default_repetitions() -> usize {
    10
}
fn default_train_len() -> usize {
    100
}
fn default_partition_features() -> Vec<usize> {
    // gold and the exchange rate in the default six-feature layout
    vec![3, 5]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: None,
            horizons: default_horizons(),
            schemes: default_schemes(),
            repetitions: default_repetitions(),
            train_len: default_train_len(),
            partition_features: default_partition_features(),
            growth: GrowthConfig::default(),
            train: TrainConfig::default(),
            weighting: WeightingConfig::default(),
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(Error::invalid("horizons must be non-empty and >= 1"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be >= 1"));
        }
        if self.schemes.is_empty() {
            return Err(Error::invalid("at least one scheme is required"));
        }
        self.weighting.validate()?;
        self.train.validate()
    }

    pub fn max_horizon(&self) -> usize {
        self.horizons.iter().copied().max().unwrap_or(0)
    }

    /// Samples needed: training span followed by the longest horizon.
    pub fn required_samples(&self) -> usize {
        self.train_len + self.max_horizon()
    }

    pub fn growth_for_repetition(&self, rep: usize) -> GrowthConfig {
        GrowthConfig {
            seed: derive_seed(self.seed, rep as u64),
            ..self.growth.clone()
        }
    }
}

/// Grow one ensemble on the first `train_len` samples of `samples`.
pub fn train_ensemble(samples: &[Sample], cfg: &ExperimentConfig, rep: usize) -> Result<Ensemble> {
    if samples.len() < cfg.train_len {
        return Err(Error::InsufficientData {
            needed: cfg.train_len,
            available: samples.len(),
        });
    }
    let partition = Partition::zero_line(&cfg.partition_features)?;
    let outcome = grow_ensemble(
        &samples[..cfg.train_len],
        &partition,
        &cfg.growth_for_repetition(rep),
        &cfg.train,
        cfg.weighting,
    )?;
    Ok(outcome.ensemble)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRow {
    pub scheme: Scheme,
    /// Mean normalised error per horizon, averaged over repetitions.
    pub nse: Vec<f64>,
    pub direction_accuracy: Vec<f64>,
    /// Per-repetition normalised error at each horizon (`[rep][horizon]`).
    pub nse_by_rep: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastTable {
    pub horizons: Vec<usize>,
    pub rows: Vec<SchemeRow>,
}

impl ForecastTable {
    pub fn row(&self, scheme: Scheme) -> Option<&SchemeRow> {
        self.rows.iter().find(|r| r.scheme == scheme)
    }

    pub fn nse(&self, scheme: Scheme, horizon: usize) -> Option<f64> {
        let h = self.horizons.iter().position(|&h| h == horizon)?;
        self.row(scheme).map(|r| r.nse[h])
    }

    /// Three blocks laid out like the scheme-by-horizon results table:
    /// normalised error, its square root, and direction accuracy.
    pub fn to_csv(&self) -> String {
        let header = |name: &str| {
            let cols: Vec<String> = self.horizons.iter().map(|h| format!("{h} weeks")).collect();
            format!("{name},{}\n", cols.join(","))
        };
        let block = |name: &str, f: &dyn Fn(&SchemeRow) -> Vec<f64>| {
            let mut s = header(name);
            for row in &self.rows {
                let vals: Vec<String> = f(row).iter().map(|v| v.to_string()).collect();
                s.push_str(&format!("{},{}\n", row.scheme.label(), vals.join(",")));
            }
            s
        };
        let mut out = block("nse", &|r| r.nse.clone());
        out.push('\n');
        out.push_str(&block("rms relative error", &|r| r.nse.iter().map(|v| v.sqrt()).collect()));
        out.push('\n');
        out.push_str(&block("direction accuracy", &|r| r.direction_accuracy.clone()));
        out
    }
}

/// Train `repetitions` ensembles and compare weighting schemes on the
/// continuation that follows the training span.
pub fn run_forecast_experiment(cfg: &ExperimentConfig) -> Result<ForecastTable> {
    cfg.validate()?;
    let samples = match &cfg.data {
        Some(source) => source.load()?,
        None => DataSource::Drift(DriftSpec::two_regime(cfg.seed)).load()?,
    };
    run_forecast_on_samples(&samples, cfg)
}

pub fn run_forecast_on_samples(samples: &[Sample], cfg: &ExperimentConfig) -> Result<ForecastTable> {
    cfg.validate()?;
    let needed = cfg.required_samples();
    if samples.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            available: samples.len(),
        });
    }
    if cfg.weighting.window > cfg.train_len {
        return Err(Error::invalid("warm-up window longer than the training span"));
    }
    // weights are set from the last `window` training weeks, then the test
    // span starts right after training
    let train_end = cfg.train_len;
    let warmup = &samples[train_end - cfg.weighting.window..train_end];
    let test = &samples[train_end..train_end + cfg.max_horizon()];

    // per repetition: per scheme: full-length report
    let runs: Vec<Vec<EvalReport>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| {
            let ensemble = train_ensemble(samples, cfg, rep)?;
            cfg.schemes
                .iter()
                .map(|&scheme| evaluate_scheme(&ensemble, scheme, warmup, test))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let reps = cfg.repetitions as f64;
    let mut rows = Vec::with_capacity(cfg.schemes.len());
    for (s, &scheme) in cfg.schemes.iter().enumerate() {
        let mut nse_by_rep = Vec::with_capacity(runs.len());
        let mut acc = vec![0.0; cfg.horizons.len()];
        for run in &runs {
            let mut rep_nse = Vec::with_capacity(cfg.horizons.len());
            for (h, &horizon) in cfg.horizons.iter().enumerate() {
                let r = run[s].truncated(horizon)?;
                rep_nse.push(r.nse);
                acc[h] += r.direction_accuracy;
            }
            nse_by_rep.push(rep_nse);
        }
        let nse = (0..cfg.horizons.len())
            .map(|h| nse_by_rep.iter().map(|r| r[h]).sum::<f64>() / reps)
            .collect();
        rows.push(SchemeRow {
            scheme,
            nse,
            direction_accuracy: acc.into_iter().map(|a| a / reps).collect(),
            nse_by_rep,
        });
    }
    Ok(ForecastTable {
        horizons: cfg.horizons.clone(),
        rows,
    })
}

/// The four weighting variants of the crescent ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    NoWeights,
    OneWeight,
    TwoWeights,
    FourWeights,
}

impl WeightMode {
    pub const ALL: [WeightMode; 4] = [
        WeightMode::NoWeights,
        WeightMode::OneWeight,
        WeightMode::TwoWeights,
        WeightMode::FourWeights,
    ];

    pub fn label(self) -> &'static str {
        match self {
            WeightMode::NoWeights => "No weights",
            WeightMode::OneWeight => "1 weight",
            WeightMode::TwoWeights => "2 weights",
            WeightMode::FourWeights => "4 weights",
        }
    }

    fn median_axes(self) -> &'static [usize] {
        match self {
            WeightMode::NoWeights | WeightMode::OneWeight => &[],
            WeightMode::TwoWeights => &[0],
            WeightMode::FourWeights => &[0, 1],
        }
    }
}

/// Class labels become regression targets of this magnitude.
pub const CLASS_TARGET: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    #[serde(default = "default_points")]
    pub n: usize,
    #[serde(default = "default_noise")]
    pub noise: f64,
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    #[serde(default = "default_class_reps")]
    pub repetitions: usize,
    /// Experts per ensemble, each trained on its own random subset.
    #[serde(default = "default_class_experts")]
    pub n_experts: usize,
    #[serde(default = "default_class_subset")]
    pub subset_len: usize,
    #[serde(default = "default_class_hidden")]
    pub hidden: usize,
    #[serde(default = "default_class_train")]
    pub train: TrainConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_points() -> usize {
    200
}
fn default_noise() -> f64 {
    0.1
}
fn default_n_train() -> usize {
    150
}
fn default_class_reps() -> usize {
    100
}
fn default_class_experts() -> usize {
    10
}
fn default_class_subset() -> usize {
    30
}
fn default_class_hidden() -> usize {
    crate::expert::DEFAULT_HIDDEN
}
fn default_class_train() -> TrainConfig {
    TrainConfig {
        epochs: 50,
        ..TrainConfig::default()
    }
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            n: default_points(),
            noise: default_noise(),
            n_train: default_n_train(),
            repetitions: default_class_reps(),
            n_experts: default_class_experts(),
            subset_len: default_class_subset(),
            hidden: default_class_hidden(),
            train: default_class_train(),
            seed: 0,
        }
    }
}

pub fn points_to_samples(points: &[LabeledPoint]) -> Vec<Sample> {
    points
        .iter()
        .map(|p| {
            let t = if p.label == 1 { CLASS_TARGET } else { -CLASS_TARGET };
            Sample::new(p.x.to_vec(), t)
        })
        .collect()
}

/// Fit static region weights on `train` with the multiplicative rule.
pub fn fit_static_weights(ensemble: &Ensemble, train: &[Sample]) -> Result<WeightTable> {
    let mut table = WeightTable::ones(ensemble.len(), ensemble.partition().region_count());
    for s in train {
        let record = ScoreRecord {
            region: ensemble.partition().region_of(&s.x),
            multipliers: score_sample(&ensemble.expert_outputs(&s.x), s.t, ScoreMode::Classification),
        };
        table.static_train_update(&record)?;
    }
    Ok(table)
}

pub fn classification_accuracy(ensemble: &Ensemble, test: &[Sample]) -> f64 {
    let hits = test
        .iter()
        .filter(|s| positive_class(ensemble.combine(&s.x)) == (s.t > 0.0))
        .count();
    hits as f64 / test.len() as f64
}

/// Accuracy of each weighting mode given already-trained experts.
pub fn evaluate_weight_modes(experts: &Ensemble, train: &[Sample], test: &[Sample]) -> Result<[f64; 4]> {
    let train_x: Vec<&[f64]> = train.iter().map(|s| s.x.as_slice()).collect();
    let mut out = [0.0; 4];
    for (slot, mode) in out.iter_mut().zip(WeightMode::ALL) {
        let ensemble = if mode == WeightMode::NoWeights {
            Ensemble::new(experts.experts().to_vec(), Partition::whole(), Scheme::Unweighted, Default::default())?
        } else {
            let partition = Partition::from_medians(&train_x, mode.median_axes())?;
            let e = Ensemble::new(experts.experts().to_vec(), partition, Scheme::Static, Default::default())?;
            let w = fit_static_weights(&e, train)?;
            e.with_weights(w)?
        };
        *slot = classification_accuracy(&ensemble, test);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    /// Mean accuracy per [`WeightMode`], in `WeightMode::ALL` order.
    pub accuracy: [f64; 4],
    pub by_rep: Vec<[f64; 4]>,
}

impl AblationTable {
    pub fn get(&self, mode: WeightMode) -> f64 {
        self.accuracy[mode as usize]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("Test,Accuracy\n");
        for mode in WeightMode::ALL {
            out.push_str(&format!("{},{}\n", mode.label(), self.get(mode)));
        }
        out
    }
}

/// Independent experts, each fitted to `subset_len` training points drawn
/// without replacement.
pub fn train_subset_ensemble(train: &[Sample], cfg: &ClassifyConfig, seed: u64) -> Result<Ensemble> {
    if cfg.n_experts == 0 || cfg.subset_len == 0 || cfg.subset_len > train.len() {
        return Err(Error::invalid("need n_experts >= 1 and 1 <= subset_len <= training size"));
    }
    let inputs = train[0].x.len();
    let experts = (0..cfg.n_experts)
        .map(|k| {
            let base = derive_seed(seed, k as u64);
            let mut rng = rng_from_seed(derive_seed(base, 0));
            let subset: Vec<Sample> = rand::seq::index::sample(&mut rng, train.len(), cfg.subset_len)
                .into_iter()
                .map(|i| train[i].clone())
                .collect();
            let init = MlpExpert::init_random(inputs, cfg.hidden, derive_seed(base, 1))?;
            train_mcmc(&init, &subset, &cfg.train.with_seed(derive_seed(base, 2)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(experts, Partition::whole(), Scheme::Unweighted, WeightingConfig::default())
}

pub fn run_classification_ablation(cfg: &ClassifyConfig) -> Result<AblationTable> {
    if cfg.repetitions == 0 {
        return Err(Error::invalid("repetitions must be >= 1"));
    }
    if cfg.n_train == 0 || cfg.n_train >= cfg.n {
        return Err(Error::invalid("n_train must leave at least one test point"));
    }
    cfg.train.validate()?;
    let by_rep = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(cfg.seed, rep as u64);
            let points = data::gen_crescents(cfg.n, cfg.noise, derive_seed(rep_seed, 0))?;
            let samples = points_to_samples(&points);
            let (train, test) = samples.split_at(cfg.n_train);
            let ensemble = train_subset_ensemble(train, cfg, derive_seed(rep_seed, 1))?;
            evaluate_weight_modes(&ensemble, train, test)
        })
        .collect::<Result<Vec<[f64; 4]>>>()?;
    let mut accuracy = [0.0; 4];
    for rep in &by_rep {
        for (a, v) in accuracy.iter_mut().zip(rep) {
            *a += v;
        }
    }
    accuracy.iter_mut().for_each(|a| *a /= by_rep.len() as f64);
    Ok(AblationTable { accuracy, by_rep })
}
