//! Single-hidden-layer perceptron experts and their random-walk trainer.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub const DEFAULT_INPUTS: usize = 6;
pub const DEFAULT_HIDDEN: usize = 2;

/// Half-width of the output range. Outputs lie inside `(-0.2, 0.2)` and only
/// reach the ends when the output unit saturates in floating point.
pub const OUTPUT_BOUND: f64 = 0.2;

#[inline]
pub fn logistic(a: f64) -> f64 {
    1.0 / (1.0 + (-a).exp())
}

/// An `F -> H -> 1` perceptron. Hidden units use `2σ(a) - 1` (range
/// `(-1, 1)`), the output unit `0.4σ(b) - 0.2`.
///
/// `w_ih` is row-major `(F + 1) x H`; row `F` holds the hidden biases.
/// `w_ho` has `H + 1` entries; the last one is the output bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExpertRepr")]
pub struct MlpExpert {
    #[serde(rename = "F")]
    inputs: usize,
    #[serde(rename = "H")]
    hidden: usize,
    w_ih: Vec<f64>,
    w_ho: Vec<f64>,
}

#[derive(Deserialize)]
struct ExpertRepr {
    #[serde(rename = "F")]
    inputs: usize,
    #[serde(rename = "H")]
    hidden: usize,
    w_ih: Vec<f64>,
    w_ho: Vec<f64>,
}

impl TryFrom<ExpertRepr> for MlpExpert {
    type Error = Error;

    fn try_from(r: ExpertRepr) -> Result<Self> {
        MlpExpert::from_weights(r.inputs, r.hidden, r.w_ih, r.w_ho)
    }
}

impl MlpExpert {
    pub fn from_weights(inputs: usize, hidden: usize, w_ih: Vec<f64>, w_ho: Vec<f64>) -> Result<Self> {
        let e = Self { inputs, hidden, w_ih, w_ho };
        e.validate()?;
        Ok(e)
    }

    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Self {
            inputs,
            hidden,
            w_ih: vec![0.0; (inputs + 1) * hidden],
            w_ho: vec![0.0; hidden + 1],
        }
    }

    /// Weights drawn i.i.d. uniform on `[-0.5, 0.5]`.
    pub fn init_random(inputs: usize, hidden: usize, seed: u64) -> Result<Self> {
        if inputs == 0 || hidden == 0 {
            return Err(Error::invalid("expert needs at least one input and one hidden unit"));
        }
        let mut rng = rng_from_seed(seed);
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect() };
        let w_ih = draw((inputs + 1) * hidden);
        let w_ho = draw(hidden + 1);
        Ok(Self { inputs, hidden, w_ih, w_ho })
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs == 0 || self.hidden == 0 {
            return Err(Error::invalid("expert needs at least one input and one hidden unit"));
        }
        if self.w_ih.len() != (self.inputs + 1) * self.hidden || self.w_ho.len() != self.hidden + 1 {
            return Err(Error::invalid("expert weight dimensions do not match F and H"));
        }
        if self.weights().any(|w| !w.is_finite()) {
            return Err(Error::invalid("expert weights must be finite"));
        }
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn w_ih(&self) -> &[f64] {
        &self.w_ih
    }

    pub fn w_ho(&self) -> &[f64] {
        &self.w_ho
    }

    pub fn n_weights(&self) -> usize {
        self.w_ih.len() + self.w_ho.len()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.w_ih.iter().chain(&self.w_ho).copied()
    }

    fn weights_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w_ih.iter_mut().chain(self.w_ho.iter_mut())
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.inputs);
        let h = self.hidden;
        let bias_row = &self.w_ih[self.inputs * h..];
        let mut out = self.w_ho[h];
        for (j, bias) in bias_row.iter().enumerate() {
            let mut a = *bias;
            for (f, xf) in x.iter().enumerate() {
                a += xf * self.w_ih[f * h + j];
            }
            out += (2.0 * logistic(a) - 1.0) * self.w_ho[j];
        }
        2.0 * OUTPUT_BOUND * logistic(out) - OUTPUT_BOUND
    }

    pub fn mse(&self, samples: &[Sample]) -> f64 {
        assert!(!samples.is_empty(), "mse of an empty sample set");
        let sum: f64 = samples
            .iter()
            .map(|s| {
                let d = self.forward(&s.x) - s.t;
                d * d
            })
            .sum();
        sum / samples.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// One epoch is `samples.len()` proposals.
    pub epochs: usize,
    #[serde(default = "default_proposal_sd")]
    pub proposal_sd: f64,
    #[serde(default)]
    pub seed: u64,
    /// Metropolis temperature. `None` means greedy: accept only strict
    /// improvements.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

fn default_proposal_sd() -> f64 {
    0.05
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            proposal_sd: default_proposal_sd(),
            seed: 0,
            temperature: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.proposal_sd > 0.0 && self.proposal_sd.is_finite()) {
            return Err(Error::invalid("proposal_sd must be > 0"));
        }
        if let Some(t) = self.temperature {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid("temperature must be > 0"));
            }
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn with_epochs(&self, epochs: usize) -> Self {
        Self { epochs, ..self.clone() }
    }
}

/// Random-walk training: every proposal perturbs all weights jointly by
/// `N(0, proposal_sd)`. In greedy mode a proposal is kept iff training MSE
/// strictly drops. With a temperature the chain follows the Metropolis
/// rule on `exp(-ΔMSE / T)` and the best state visited is returned, so
/// training MSE never increases in either mode.
pub fn train_mcmc(expert: &MlpExpert, samples: &[Sample], cfg: &TrainConfig) -> Result<MlpExpert> {
    if samples.is_empty() {
        return Err(Error::Empty);
    }
    cfg.validate()?;
    if let Some(s) = samples.iter().find(|s| s.x.len() != expert.inputs()) {
        return Err(Error::LengthMismatch {
            left: s.x.len(),
            right: expert.inputs(),
        });
    }

    let mut rng = rng_from_seed(cfg.seed);
    let step = Normal::new(0.0, cfg.proposal_sd).expect("validated sd");

    let mut current = expert.clone();
    let mut current_mse = current.mse(samples);
    let mut best = current.clone();
    let mut best_mse = current_mse;
    let mut proposal = current.clone();

    for _ in 0..cfg.epochs * samples.len() {
        for (p, c) in proposal.weights_mut().zip(current.weights()) {
            *p = c + step.sample(&mut rng);
        }
        let proposal_mse = proposal.mse(samples);
        let accept = match cfg.temperature {
            None => proposal_mse < current_mse,
            Some(temp) => {
                proposal_mse < current_mse
                    || rng.random::<f64>() < (-(proposal_mse - current_mse) / temp).exp()
            }
        };
        if accept {
            std::mem::swap(&mut current, &mut proposal);
            current_mse = proposal_mse;
            if current_mse < best_mse {
                best.clone_from(&current);
                best_mse = current_mse;
            }
        }
    }
    Ok(best)
}
