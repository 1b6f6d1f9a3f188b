//! Axis-aligned splits of the input space into 1, 2 or 4 regions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_AXES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub feature: usize,
    pub threshold: f64,
}

/// Region index bit `b` is set iff `x[axes[b].feature] >= axes[b].threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr")]
pub struct Partition {
    axes: Vec<Axis>,
}

#[derive(Deserialize)]
struct PartitionRepr {
    axes: Vec<Axis>,
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;

    fn try_from(r: PartitionRepr) -> Result<Self> {
        Partition::new(r.axes)
    }
}

impl Partition {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.len() > MAX_AXES {
            return Err(Error::invalid(format!("at most {MAX_AXES} partition axes are supported")));
        }
        for (i, a) in axes.iter().enumerate() {
            if !a.threshold.is_finite() {
                return Err(Error::invalid("partition thresholds must be finite"));
            }
            if axes[..i].iter().any(|b| b.feature == a.feature) {
                return Err(Error::invalid(format!("duplicate partition feature {}", a.feature)));
            }
        }
        Ok(Self { axes })
    }

    /// The whole input space as a single region.
    pub fn whole() -> Self {
        Self { axes: Vec::new() }
    }

    /// Split on each named feature at zero, i.e. on whether it rose or fell.
    pub fn zero_line(features: &[usize]) -> Result<Self> {
        Self::new(
            features
                .iter()
                .map(|&feature| Axis { feature, threshold: 0.0 })
                .collect(),
        )
    }

    /// Split each named feature at its median over `points`.
    pub fn from_medians<P: AsRef<[f64]>>(points: &[P], features: &[usize]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty);
        }
        let mut axes = Vec::with_capacity(features.len());
        for &feature in features {
            let mut column = points
                .iter()
                .map(|p| {
                    p.as_ref().get(feature).copied().ok_or_else(|| {
                        Error::invalid(format!("feature {feature} out of range"))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            axes.push(Axis {
                feature,
                threshold: median(&mut column),
            });
        }
        Self::new(axes)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn region_count(&self) -> usize {
        1 << self.axes.len()
    }

    /// Largest feature index referenced, if any.
    pub fn max_feature(&self) -> Option<usize> {
        self.axes.iter().map(|a| a.feature).max()
    }

    pub fn region_of(&self, x: &[f64]) -> usize {
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, a)| x[a.feature] >= a.threshold)
            .fold(0, |acc, (bit, _)| acc | (1 << bit))
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
