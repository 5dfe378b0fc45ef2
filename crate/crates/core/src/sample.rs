use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite sample of non-negative observations.
///
/// Values are kept in insertion order next to a sorted copy and the mean, so
/// matched pairs can be realigned by index while the Lorenz machinery reads
/// order statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
    mean: f64,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidObservation { index, value });
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
        Ok(Self {
            values,
            sorted,
            mean,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observations in insertion order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Order statistics `X_(1) <= ... <= X_(n)`.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().expect("non-empty")
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    /// Apply `f` to every observation, keeping insertion order.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Multiply every observation by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale factor {c} must be positive"
            )));
        }
        self.map(|v| v * c)
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Self {
        s.values
    }
}

/// Two samples whose i-th entries were observed jointly.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    x: Sample,
    y: Sample,
}

impl PairedSample {
    pub fn new(x: Sample, y: Sample) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::UnpairedSamples {
                n: x.len(),
                m: y.len(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        Self::new(Sample::new(x)?, Sample::new(y)?)
    }

    pub fn x(&self) -> &Sample {
        &self.x
    }

    pub fn y(&self) -> &Sample {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The same pairs with the coordinates exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    pub fn into_parts(self) -> (Sample, Sample) {
        (self.x, self.y)
    }
}
