//! Region-weighted mixture of experts.
//!
//! Each expert `k` holds one positive voting weight `w_k(i)` per region `i`
//! of a [`Partition`]. The ensemble output for an input in region `i` is
//! the weighted mean `Σ f_k(x) w_k(i) / Σ w_k(i)`.
//!
//! Weights move multiplicatively: a correct expert is scaled by
//! [`CORRECT_MULTIPLIER`], a wrong one by [`WRONG_MULTIPLIER`]. Under the
//! static rule every training sample is applied once. Under the dynamic
//! rule the table is rebuilt after every revealed target from a short
//! window of recent multipliers, each raised to `λ^age`, so a region that
//! stops receiving samples drifts back to weight 1.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::expert::{train_mcmc, MlpExpert, TrainConfig};
use crate::metrics::nse_error;
use crate::partition::Partition;
use crate::rng::{derive_seed, rng_from_seed};

pub const CORRECT_MULTIPLIER: f64 = 1.2;
pub const WRONG_MULTIPLIER: f64 = 0.4;

/// Targets with magnitude at or below this count as "no change".
pub const ZERO_TARGET_TOL: f64 = 1e-6;
/// A prediction for a "no change" target is right iff within this band.
pub const ZERO_PREDICTION_BAND: f64 = 0.01;

pub const DEFAULT_LAMBDA: f64 = 0.7;
pub const DEFAULT_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    Classification,
    Regression,
}

/// Direction agreement used both for weight updates and for reporting.
pub fn direction_correct(prediction: f64, target: f64) -> bool {
    if target.abs() <= ZERO_TARGET_TOL {
        prediction.abs() <= ZERO_PREDICTION_BAND
    } else {
        prediction.signum() == target.signum() && prediction != 0.0
    }
}

/// Class decision of a thresholded output: `true` for the positive class.
pub fn positive_class(output: f64) -> bool {
    output >= 0.0
}

pub fn score_sample(outputs: &[f64], target: f64, mode: ScoreMode) -> Vec<f64> {
    outputs
        .iter()
        .map(|&y| {
            let correct = match mode {
                ScoreMode::Classification => positive_class(y) == (target > 0.0),
                ScoreMode::Regression => direction_correct(y, target),
            };
            if correct {
                CORRECT_MULTIPLIER
            } else {
                WRONG_MULTIPLIER
            }
        })
        .collect()
}

/// Row-major `experts x regions` table of positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    experts: usize,
    regions: usize,
    w: Vec<f64>,
}

impl WeightTable {
    pub fn ones(experts: usize, regions: usize) -> Self {
        Self {
            experts,
            regions,
            w: vec![1.0; experts * regions],
        }
    }

    pub fn from_row_major(experts: usize, regions: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != experts * regions {
            return Err(Error::LengthMismatch {
                left: w.len(),
                right: experts * regions,
            });
        }
        if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("weights must be finite and > 0"));
        }
        Ok(Self { experts, regions, w })
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    pub fn regions(&self) -> usize {
        self.regions
    }

    pub fn get(&self, expert: usize, region: usize) -> f64 {
        self.w[expert * self.regions + region]
    }

    pub fn set(&mut self, expert: usize, region: usize, value: f64) {
        self.w[expert * self.regions + region] = value;
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.w
    }

    pub fn column(&self, region: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.experts).map(move |k| self.get(k, region))
    }

    pub fn is_all_ones(&self) -> bool {
        self.w.iter().all(|&v| v == 1.0)
    }

    /// Apply one training-time record: scale the record's region column.
    pub fn static_train_update(&mut self, record: &ScoreRecord) -> Result<()> {
        if record.multipliers.len() != self.experts || record.region >= self.regions {
            return Err(Error::invalid("score record does not match weight table"));
        }
        for (k, m) in record.multipliers.iter().enumerate() {
            let i = k * self.regions + record.region;
            self.w[i] *= m;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub region: usize,
    pub multipliers: Vec<f64>,
}

/// The last `capacity` score records, newest first.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreHistory {
    capacity: usize,
    records: VecDeque<ScoreRecord>,
}

impl ScoreHistory {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            records: VecDeque::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: ScoreRecord) {
        self.records.push_front(record);
        self.records.truncate(self.capacity);
    }

    /// Records from newest (age 0) to oldest.
    pub fn iter(&self) -> impl Iterator<Item = &ScoreRecord> {
        self.records.iter()
    }
}

/// `w_k(i) = Π m_j[k]^(λ^j)` over window records `j` (age, newest = 0)
/// tagged with region `i`. Regions with no records come out as exactly 1.
pub fn dynamic_recompute(history: &ScoreHistory, lambda: f64, experts: usize, regions: usize) -> WeightTable {
    debug_assert!(lambda > 0.0 && lambda < 1.0);
    let mut table = WeightTable::ones(experts, regions);
    let mut decay = 1.0;
    for record in history.iter() {
        for (k, m) in record.multipliers.iter().enumerate() {
            let w = table.get(k, record.region) * m.powf(decay);
            table.set(k, record.region, w);
        }
        decay *= lambda;
    }
    table
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Unweighted,
    Static,
    Dynamic,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Unweighted, Scheme::Static, Scheme::Dynamic];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Unweighted => "Unweighted",
            Scheme::Static => "Static Weight",
            Scheme::Dynamic => "Dynamic Weight",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unweighted" => Ok(Scheme::Unweighted),
            "static" => Ok(Scheme::Static),
            "dynamic" => Ok(Scheme::Dynamic),
            other => Err(Error::invalid(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightingConfig {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

impl Default for WeightingConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            window: DEFAULT_WINDOW,
        }
    }
}

impl WeightingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::invalid("lambda must lie in (0, 1)"));
        }
        if self.window == 0 {
            return Err(Error::invalid("window must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleRepr", into = "EnsembleRepr")]
pub struct Ensemble {
    experts: Vec<MlpExpert>,
    weights: WeightTable,
    partition: Partition,
    scheme: Scheme,
    history: ScoreHistory,
    lambda: f64,
}

impl Ensemble {
    /// A fresh ensemble: all-ones weights and an empty history.
    pub fn new(experts: Vec<MlpExpert>, partition: Partition, scheme: Scheme, weighting: WeightingConfig) -> Result<Self> {
        weighting.validate()?;
        let first = experts.first().ok_or(Error::Empty)?;
        if experts.iter().any(|e| e.inputs() != first.inputs()) {
            return Err(Error::invalid("experts disagree on input dimension"));
        }
        if partition.max_feature().is_some_and(|f| f >= first.inputs()) {
            return Err(Error::invalid("partition feature out of range for experts"));
        }
        let weights = WeightTable::ones(experts.len(), partition.region_count());
        Ok(Self {
            experts,
            weights,
            partition,
            scheme,
            history: ScoreHistory::new(weighting.window),
            lambda: weighting.lambda,
        })
    }

    /// Replace the weight table, e.g. with one fitted by
    /// [`WeightTable::static_train_update`]. Requires a non-unweighted scheme.
    pub fn with_weights(mut self, weights: WeightTable) -> Result<Self> {
        if weights.experts() != self.experts.len() || weights.regions() != self.partition.region_count() {
            return Err(Error::invalid("weight table dimensions do not match ensemble"));
        }
        if self.scheme == Scheme::Unweighted && !weights.is_all_ones() {
            return Err(Error::invalid("unweighted ensembles must keep all-ones weights"));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn experts(&self) -> &[MlpExpert] {
        &self.experts
    }

    pub fn len(&self) -> usize {
        self.experts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experts.is_empty()
    }

    pub fn inputs(&self) -> usize {
        self.experts[0].inputs()
    }

    pub fn weights(&self) -> &WeightTable {
        &self.weights
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn history(&self) -> &ScoreHistory {
        &self.history
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weighting(&self) -> WeightingConfig {
        WeightingConfig {
            lambda: self.lambda,
            window: self.history.capacity(),
        }
    }

    /// Switch scheme, resetting weights to all-ones and clearing history.
    pub fn reset_as(&self, scheme: Scheme) -> Self {
        Self {
            experts: self.experts.clone(),
            weights: WeightTable::ones(self.experts.len(), self.partition.region_count()),
            partition: self.partition.clone(),
            scheme,
            history: ScoreHistory::new(self.history.capacity()),
            lambda: self.lambda,
        }
    }

    pub fn expert_outputs(&self, x: &[f64]) -> Vec<f64> {
        self.experts.iter().map(|e| e.forward(x)).collect()
    }

    pub fn combine(&self, x: &[f64]) -> f64 {
        let outputs = self.expert_outputs(x);
        self.combine_outputs(&outputs, self.partition.region_of(x))
    }

    /// Weighted mean of precomputed expert outputs for `region`.
    pub fn combine_outputs(&self, outputs: &[f64], region: usize) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (y, w) in outputs.iter().zip(self.weights.column(region)) {
            num += y * w;
            den += w;
            lo = lo.min(*y);
            hi = hi.max(*y);
        }
        // rounding can put the quotient an ulp outside the hull
        (num / den).clamp(lo, hi)
    }

    /// Prediction with the current weights; never mutates.
    pub fn step_online(&self, x: &[f64]) -> f64 {
        self.combine(x)
    }

    /// Reveal the target for `x`. Only the dynamic scheme reacts: the
    /// experts are scored, the record joins the window and the table is
    /// rebuilt from the window.
    pub fn observe(&mut self, x: &[f64], target: f64) -> Result<()> {
        if !target.is_finite() {
            return Err(Error::invalid("target must be finite"));
        }
        if self.scheme != Scheme::Dynamic {
            return Ok(());
        }
        let multipliers = score_sample(&self.expert_outputs(x), target, ScoreMode::Regression);
        self.history.push(ScoreRecord {
            region: self.partition.region_of(x),
            multipliers,
        });
        self.weights = dynamic_recompute(&self.history, self.lambda, self.experts.len(), self.partition.region_count());
        Ok(())
    }

    /// Copy of the current dynamic weights that never changes again.
    pub fn freeze_static(&self) -> Result<Self> {
        if self.history.is_empty() {
            return Err(Error::NoWarmup);
        }
        let mut frozen = self.clone();
        frozen.scheme = Scheme::Static;
        Ok(frozen)
    }
}

#[derive(Serialize, Deserialize)]
struct EnsembleRepr {
    experts: Vec<MlpExpert>,
    partition: Partition,
    scheme: Scheme,
    lambda: f64,
    window: usize,
    weights: Vec<f64>,
    history: Vec<ScoreRecord>,
}

impl From<Ensemble> for EnsembleRepr {
    fn from(e: Ensemble) -> Self {
        Self {
            window: e.history.capacity(),
            history: e.history.records.into_iter().collect(),
            weights: e.weights.w,
            experts: e.experts,
            partition: e.partition,
            scheme: e.scheme,
            lambda: e.lambda,
        }
    }
}

impl TryFrom<EnsembleRepr> for Ensemble {
    type Error = Error;

    fn try_from(r: EnsembleRepr) -> Result<Self> {
        let weighting = WeightingConfig {
            lambda: r.lambda,
            window: r.window,
        };
        let mut e = Ensemble::new(r.experts, r.partition, r.scheme, weighting)?;
        if r.history.len() > r.window {
            return Err(Error::invalid("history longer than window"));
        }
        let (k, regions) = (e.len(), e.partition.region_count());
        for rec in r.history.iter().rev() {
            if rec.multipliers.len() != k || rec.region >= regions {
                return Err(Error::invalid("history record does not match ensemble"));
            }
            e.history.push(rec.clone());
        }
        let weights = WeightTable::from_row_major(k, regions, r.weights)?;
        e.with_weights(weights)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    #[serde(default = "default_seed_epochs")]
    pub seed_epochs: usize,
    #[serde(default = "default_candidate_epochs")]
    pub candidate_epochs: usize,
    #[serde(default = "default_subset_len")]
    pub subset_len: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_seed_epochs() -> usize {
    10
}
fn default_candidate_epochs() -> usize {
    20
}
fn default_subset_len() -> usize {
    20
}
fn default_max_iters() -> usize {
    50
}
fn default_patience() -> usize {
    25
}
fn default_hidden() -> usize {
    crate::expert::DEFAULT_HIDDEN
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self {
            seed_epochs: default_seed_epochs(),
            candidate_epochs: default_candidate_epochs(),
            subset_len: default_subset_len(),
            max_iters: default_max_iters(),
            patience: default_patience(),
            hidden: default_hidden(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrowthOutcome {
    pub ensemble: Ensemble,
    /// Unweighted training error after the seed expert and after each
    /// accepted candidate.
    pub error_trace: Vec<f64>,
    pub candidates_tried: usize,
}

/// Greedy forward selection of experts.
///
/// A seed expert is trained on the whole set, then each candidate is
/// trained on a random contiguous window of `subset_len` samples and kept
/// only if it strictly lowers the unweighted normalised error on the
/// whole set. `tcfg` supplies the proposal step and temperature; epochs
/// and seeds come from `gcfg`.
pub fn grow_ensemble(
    train: &[Sample],
    partition: &Partition,
    gcfg: &GrowthConfig,
    tcfg: &TrainConfig,
    weighting: WeightingConfig,
) -> Result<GrowthOutcome> {
    if gcfg.subset_len == 0 || gcfg.patience == 0 || gcfg.hidden == 0 {
        return Err(Error::invalid("subset_len, patience and hidden must be >= 1"));
    }
    if train.len() < gcfg.subset_len {
        return Err(Error::InsufficientData {
            needed: gcfg.subset_len,
            available: train.len(),
        });
    }
    let inputs = train[0].x.len();
    let targets: Vec<f64> = train.iter().map(|s| s.t).collect();

    let make_expert = |stream: u64, samples: &[Sample], epochs: usize| -> Result<MlpExpert> {
        let base = derive_seed(gcfg.seed, stream);
        let init = MlpExpert::init_random(inputs, gcfg.hidden, derive_seed(base, 0))?;
        let cfg = TrainConfig {
            epochs,
            seed: derive_seed(base, 1),
            ..tcfg.clone()
        };
        train_mcmc(&init, samples, &cfg)
    };

    let seed_expert = make_expert(0, train, gcfg.seed_epochs)?;
    let mut sums: Vec<f64> = train.iter().map(|s| seed_expert.forward(&s.x)).collect();
    let mut experts = vec![seed_expert];
    let mut error = nse_error(&sums, &targets)?;
    let mut error_trace = vec![error];

    let mut window_rng = rng_from_seed(derive_seed(gcfg.seed, u64::MAX));
    let mut rejections = 0;
    let mut tried = 0;
    let mut candidate_preds = vec![0.0; train.len()];
    for iter in 0..gcfg.max_iters {
        tried += 1;
        let start = rand::Rng::random_range(&mut window_rng, 0..=train.len() - gcfg.subset_len);
        let window = &train[start..start + gcfg.subset_len];
        let candidate = make_expert(iter as u64 + 1, window, gcfg.candidate_epochs)?;

        let k = experts.len() as f64;
        for ((p, s), sample) in candidate_preds.iter_mut().zip(&sums).zip(train) {
            *p = (s + candidate.forward(&sample.x)) / (k + 1.0);
        }
        let candidate_error = nse_error(&candidate_preds, &targets)?;
        if candidate_error < error {
            for (s, sample) in sums.iter_mut().zip(train) {
                *s += candidate.forward(&sample.x);
            }
            experts.push(candidate);
            error = candidate_error;
            error_trace.push(error);
            rejections = 0;
        } else {
            rejections += 1;
            if rejections >= gcfg.patience {
                break;
            }
        }
    }
    let ensemble = Ensemble::new(experts, partition.clone(), Scheme::Dynamic, weighting)?;
    Ok(GrowthOutcome {
        ensemble,
        error_trace,
        candidates_tried: tried,
    })
}
