//! The `T_p` functionals `||(·)₊||_p` on the evaluation grids of a step LPP.
//!
//! A grid function is a slice of values of a step function that is constant
//! on each cell `((k-1)/n, k/n]`. `T_∞` reads it at the nodes `k/n`, the finite
//! `T_p` read it at the cell midpoints `(2k-1)/(2n)` and apply the midpoint
//! rule. Only the unscaled functional is computed here; the `√r_n` factor is
//! carried by [`FunctionalValue`] and cancels in every bootstrap decision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorenz::{lpp_step, LppCurve};
use crate::sample::Sample;

/// Which member of the `T_p` family to use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum StatKind {
    TInf,
    T1,
    Tp(f64),
}

impl StatKind {
    pub fn tp(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(StatKind::TInf);
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "T_p needs p >= 1, got {p}"
            )));
        }
        Ok(if p == 1.0 {
            StatKind::T1
        } else {
            StatKind::Tp(p)
        })
    }

    /// Apply the functional to the cell values `g_1..g_n` of a step grid function.
    ///
    /// For `T_∞` the cell value is also the node value, so both grids share
    /// the same slice.
    pub fn apply(&self, grid: &[f64]) -> f64 {
        match *self {
            StatKind::TInf => grid.iter().fold(0.0, |acc: f64, &g| acc.max(g)),
            StatKind::T1 => grid.iter().map(|&g| g.max(0.0)).sum::<f64>() / grid.len() as f64,
            StatKind::Tp(p) => {
                let mean =
                    grid.iter().map(|&g| g.max(0.0).powf(p)).sum::<f64>() / grid.len() as f64;
                mean.powf(1.0 / p)
            }
        }
    }

    /// Observed functional `T(I - LPP̃)` read off the curve.
    pub fn observed(&self, curve: &LppCurve) -> f64 {
        let diffs = identity_gap(curve, *self);
        self.apply(&diffs)
    }
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatKind::TInf => f.write_str("tinf"),
            StatKind::T1 => f.write_str("t1"),
            StatKind::Tp(p) => write!(f, "tp:{p}"),
        }
    }
}

impl FromStr for StatKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tinf" | "t_inf" | "inf" => Ok(StatKind::TInf),
            "t1" | "t_1" => Ok(StatKind::T1),
            other => {
                let p = other
                    .strip_prefix("tp:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown statistic '{s}'")))?;
                StatKind::tp(p)
            }
        }
    }
}

impl From<StatKind> for String {
    fn from(k: StatKind) -> Self {
        k.to_string()
    }
}

impl TryFrom<String> for StatKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// `r_n = nm / (n + m)`.
pub fn effective_size(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    n * m / (n + m)
}

/// An unscaled functional together with its reporting scale `√r_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub raw: f64,
    pub scale: f64,
}

impl FunctionalValue {
    pub fn new(raw: f64, n: usize, m: usize) -> Self {
        Self {
            raw,
            scale: effective_size(n, m).sqrt(),
        }
    }

    /// `√r_n · T`.
    pub fn scaled(&self) -> f64 {
        self.raw * self.scale
    }
}

/// `t - LPP̃(t)` on the grid the functional reads: nodes for `T_∞`, midpoints otherwise.
pub fn identity_gap(curve: &LppCurve, kind: StatKind) -> Vec<f64> {
    let n = curve.n() as f64;
    let m = curve.m() as f64;
    let offset = match kind {
        StatKind::TInf => 0.0,
        _ => 0.5,
    };
    curve
        .counts()
        .iter()
        .enumerate()
        .map(|(i, &c)| (i as f64 + 1.0 - offset) / n - c as f64 / m)
        .collect()
}

/// `max(0, max_k (k/n - v_k))`.
pub fn t_inf(curve: &LppCurve) -> f64 {
    StatKind::TInf.observed(curve)
}

/// `(1/n) Σ Ψ((2i-1)/(2n))` with `Ψ(t) = (t - LPP̃(t))₊`.
pub fn t_one(x: &Sample, y: &Sample) -> f64 {
    StatKind::T1.observed(&lpp_step(x, y))
}

/// Midpoint-rule `L^p` norm of `(I - LPP̃)₊`.
pub fn t_p(x: &Sample, y: &Sample, p: f64) -> Result<f64> {
    Ok(StatKind::tp(p)?.observed(&lpp_step(x, y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn t_inf_examples() {
        let x = s(&[1.0, 2.0, 3.0]);
        assert_eq!(t_inf(&lpp_step(&x, &x)), 0.0);
        let v = t_inf(&lpp_step(&x, &s(&[2.0, 4.0])));
        assert!((v - 0.5).abs() < 1e-15);
        // Y concentrated low: LPP sits at 1 from the start.
        assert_eq!(t_inf(&lpp_step(&x, &s(&[0.01, 0.02]))), 0.0);
    }

    #[test]
    fn t_one_examples() {
        let x = s(&[1.0, 2.0, 3.0]);
        assert_eq!(t_one(&x, &x), 0.0);
        assert!((t_one(&x, &s(&[2.0, 4.0])) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(t_one(&x, &s(&[0.01, 0.02])), 0.0);
    }

    #[test]
    fn t_p_examples() {
        let x = s(&[1.0, 2.0, 3.0]);
        let y = s(&[2.0, 4.0]);
        assert_eq!(t_p(&x, &y, 1.0).unwrap(), t_one(&x, &y));
        let want = (5.0f64 / 108.0).sqrt();
        assert!((t_p(&x, &y, 2.0).unwrap() - want).abs() < 1e-15);
        assert!(t_p(&x, &y, 4.0).unwrap() >= t_p(&x, &y, 2.0).unwrap());
        assert!(t_p(&x, &y, 0.5).is_err());
    }

    #[test]
    fn stat_kind_parsing() {
        assert_eq!("tinf".parse::<StatKind>().unwrap(), StatKind::TInf);
        assert_eq!("t1".parse::<StatKind>().unwrap(), StatKind::T1);
        assert_eq!("tp:2".parse::<StatKind>().unwrap(), StatKind::Tp(2.0));
        assert_eq!("tp:1".parse::<StatKind>().unwrap(), StatKind::T1);
        assert!("tp:0.5".parse::<StatKind>().is_err());
        assert!("ksb3".parse::<StatKind>().is_err());
        assert_eq!(StatKind::Tp(3.0).to_string(), "tp:3");
    }

    #[test]
    fn effective_size_balanced() {
        assert_eq!(effective_size(100, 100), 50.0);
        let v = FunctionalValue::new(0.5, 8, 8);
        assert_eq!(v.scale, 2.0);
        assert_eq!(v.scaled(), 1.0);
    }
}
