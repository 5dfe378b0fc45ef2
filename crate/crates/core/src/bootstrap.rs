//! Bootstrap p-values for the LPP dominance tests.
//!
//! The observed statistic is `T(I - LPP̃)`. Each replicate resamples the data
//! according to the sampling scheme, rebuilds the step LPP and evaluates
//! `T(LPP̃ - LPP̃*)` on the shared grid `k/n`. The p-value is the share of
//! replicates strictly above the observed value.
//!
//! Replicate `k` draws from `rng::stream(seed, [REPLICATE, k])`, so outcomes do
//! not depend on the number of worker threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorenz::{cumulative_levels, lpp_counts, shift_samples, Transform};
use crate::rng::{self, tag, StreamRng};
use crate::sample::Sample;
use crate::statistics::{FunctionalValue, StatKind};

/// How the two samples were collected, and therefore how they are resampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Independent,
    /// `(x_i, y_i)` observed jointly; requires `n = m` and resamples whole pairs.
    MatchedPairs,
}

impl Scheme {
    pub fn check(&self, n: usize, m: usize) -> Result<()> {
        if *self == Scheme::MatchedPairs && n != m {
            return Err(Error::UnpairedSamples { n, m });
        }
        Ok(())
    }
}

/// Where the shift `eps` enters a transformed test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShiftOrder {
    /// `(x + eps)^θ`.
    #[default]
    BeforePower,
    /// `x^θ + eps`.
    AfterPower,
}

/// Settings of a single LPP dominance test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub stat: StatKind,
    pub alpha: f64,
    pub replicates: usize,
    pub eps: f64,
    /// `None` tests second-order dominance; `Some(θ)` tests it between `x^θ` and `y^θ`.
    pub theta: Option<f64>,
    pub scheme: Scheme,
    pub seed: u64,
    #[serde(default)]
    pub shift_order: ShiftOrder,
}

/// Power used to approximate first-order dominance.
pub const FSD_THETA: f64 = 50.0;

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            stat: StatKind::TInf,
            alpha: 0.1,
            replicates: 500,
            eps: 1e-4,
            theta: None,
            scheme: Scheme::Independent,
            seed: rng::DEFAULT_SEED,
            shift_order: ShiftOrder::BeforePower,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        validate_common(self.alpha, self.replicates)?;
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eps must be non-negative, got {}",
                self.eps
            )));
        }
        Transform::from_theta(self.theta)?;
        if let StatKind::Tp(p) = self.stat {
            StatKind::tp(p)?;
        }
        Ok(())
    }
}

pub(crate) fn validate_common(alpha: f64, replicates: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 0.5), got {alpha}"
        )));
    }
    if replicates == 0 {
        return Err(Error::InvalidParameter(
            "at least one bootstrap replicate is required".into(),
        ));
    }
    Ok(())
}

/// What was tested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestStatistic {
    Lpp { stat: StatKind },
    Ksb3 { order: u8, grid: usize },
}

impl TestStatistic {
    pub fn label(&self) -> String {
        match self {
            TestStatistic::Lpp { stat } => stat.to_string(),
            TestStatistic::Ksb3 { .. } => "ksb3".into(),
        }
    }
}

/// Result of a bootstrap test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub test: TestStatistic,
    pub statistic: FunctionalValue,
    pub pvalue: f64,
    pub reject: bool,
    /// Unscaled replicate values, indexed by replicate.
    pub replicate_values: Vec<f64>,
    pub alpha: f64,
    pub eps: f64,
    pub theta: Option<f64>,
    pub scheme: Scheme,
    pub seed: u64,
}

/// JSON form of a [`TestOutcome`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub schema: u32,
    pub stat: String,
    pub raw: f64,
    pub scale: f64,
    pub pvalue: f64,
    pub reject: bool,
    #[serde(rename = "K")]
    pub replicates: usize,
    pub alpha: f64,
    pub eps: f64,
    pub theta: Option<f64>,
    pub scheme: Scheme,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub order: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub replicate_values: Option<Vec<f64>>,
}

impl TestOutcome {
    pub fn report(&self, with_trace: bool) -> OutcomeReport {
        let (order, r) = match self.test {
            TestStatistic::Ksb3 { order, grid } => (Some(order), Some(grid)),
            TestStatistic::Lpp { .. } => (None, None),
        };
        OutcomeReport {
            schema: 1,
            stat: self.test.label(),
            raw: self.statistic.raw,
            scale: self.statistic.scale,
            pvalue: self.pvalue,
            reject: self.reject,
            replicates: self.replicate_values.len(),
            alpha: self.alpha,
            eps: self.eps,
            theta: self.theta,
            scheme: self.scheme,
            seed: self.seed,
            order,
            r,
            replicate_values: with_trace.then(|| self.replicate_values.clone()),
        }
    }

    pub fn to_json(&self, with_trace: bool) -> String {
        serde_json::to_string(&self.report(with_trace)).expect("report serializes")
    }
}

/// Strict-exceedance p-value `#{rep > observed} / K`.
pub fn exceedance_pvalue(observed: f64, replicates: &[f64]) -> f64 {
    let above = replicates.iter().filter(|&&r| r > observed).count();
    above as f64 / replicates.len() as f64
}

/// Draw with-replacement indices for one replicate.
///
/// Independent: `n` indices into `x`, then `m` into `y`. Matched pairs: `n`
/// indices shared by both coordinates.
fn draw_indices<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    scheme: Scheme,
    rng: &mut R,
    ix: &mut Vec<usize>,
    iy: &mut Vec<usize>,
) {
    ix.clear();
    iy.clear();
    ix.extend((0..n).map(|_| rng.random_range(0..n)));
    match scheme {
        Scheme::Independent => iy.extend((0..m).map(|_| rng.random_range(0..m))),
        Scheme::MatchedPairs => iy.extend_from_slice(ix),
    }
}

/// Resample both samples once, in draw order.
///
/// Under [`Scheme::MatchedPairs`] the i-th entries of both outputs come from the
/// same source pair.
pub fn resample<R: Rng + ?Sized>(
    x: &Sample,
    y: &Sample,
    scheme: Scheme,
    rng: &mut R,
) -> Result<(Sample, Sample)> {
    scheme.check(x.len(), y.len())?;
    let (mut ix, mut iy) = (Vec::new(), Vec::new());
    draw_indices(x.len(), y.len(), scheme, rng, &mut ix, &mut iy);
    let xs = ix.iter().map(|&i| x.values()[i]).collect();
    let ys = iy.iter().map(|&i| y.values()[i]).collect();
    Ok((Sample::new(xs)?, Sample::new(ys)?))
}

/// Original index of each order statistic.
fn sort_permutation(s: &Sample) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s.values()[a].total_cmp(&s.values()[b]).then(a.cmp(&b)));
    idx
}

/// Produces sorted resamples in linear time from multiplicity counts.
pub(crate) struct Resampler<'a> {
    x: &'a Sample,
    y: &'a Sample,
    perm_x: Vec<usize>,
    perm_y: Vec<usize>,
    scheme: Scheme,
}

#[derive(Default)]
pub(crate) struct ResampleBuffers {
    ix: Vec<usize>,
    iy: Vec<usize>,
    cx: Vec<u32>,
    cy: Vec<u32>,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl<'a> Resampler<'a> {
    pub fn new(x: &'a Sample, y: &'a Sample, scheme: Scheme) -> Result<Self> {
        scheme.check(x.len(), y.len())?;
        Ok(Self {
            x,
            y,
            perm_x: sort_permutation(x),
            perm_y: sort_permutation(y),
            scheme,
        })
    }

    /// Fill `buf.xs` and `buf.ys` with the sorted resamples; same law and same
    /// draws as [`resample`] given the same generator state.
    pub fn draw_sorted<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut ResampleBuffers) {
        let (n, m) = (self.x.len(), self.y.len());
        draw_indices(n, m, self.scheme, rng, &mut buf.ix, &mut buf.iy);
        expand(
            &buf.ix,
            n,
            &self.perm_x,
            self.x.values(),
            &mut buf.cx,
            &mut buf.xs,
        );
        expand(
            &buf.iy,
            m,
            &self.perm_y,
            self.y.values(),
            &mut buf.cy,
            &mut buf.ys,
        );
    }
}

fn expand(
    idx: &[usize],
    len: usize,
    perm: &[usize],
    values: &[f64],
    counts: &mut Vec<u32>,
    out: &mut Vec<f64>,
) {
    counts.clear();
    counts.resize(len, 0);
    for &i in idx {
        counts[i] += 1;
    }
    out.clear();
    for &orig in perm {
        let c = counts[orig];
        for _ in 0..c {
            out.push(values[orig]);
        }
    }
}

pub(crate) fn replicate_stream(seed: u64, k: usize) -> StreamRng {
    rng::stream(seed, &[tag::REPLICATE, k as u64])
}

/// Run the bootstrap for several functionals on shared replicates.
///
/// No shift is applied here; `transform` acts on the samples as given.
/// Returns one outcome per entry of `stats`, in order.
pub fn bootstrap_lpp_many(
    x: &Sample,
    y: &Sample,
    stats: &[StatKind],
    transform: Transform,
    cfg: &TestConfig,
) -> Result<Vec<TestOutcome>> {
    cfg.validate()?;
    if stats.is_empty() {
        return Ok(Vec::new());
    }
    let resampler = Resampler::new(x, y, cfg.scheme)?;
    let (n, m) = (x.len(), y.len());
    let mf = m as f64;

    let mut xl = Vec::new();
    let mut yl = Vec::new();
    cumulative_levels(x.sorted(), transform, &mut xl);
    cumulative_levels(y.sorted(), transform, &mut yl);
    let mut counts = Vec::new();
    lpp_counts(&xl, &yl, &mut counts);

    let nf = n as f64;
    let observed: Vec<f64> = stats
        .iter()
        .map(|kind| {
            let offset = if *kind == StatKind::TInf { 0.0 } else { 0.5 };
            let gap: Vec<f64> = counts
                .iter()
                .enumerate()
                .map(|(i, &c)| (i as f64 + 1.0 - offset) / nf - c as f64 / mf)
                .collect();
            kind.apply(&gap)
        })
        .collect();
    if let Some(bad) = observed.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "observed statistic is {bad}; rescale the data"
        )));
    }

    let per_replicate: Vec<Vec<f64>> = (0..cfg.replicates)
        .into_par_iter()
        .map_init(
            || {
                (
                    ResampleBuffers::default(),
                    Vec::new(),
                    Vec::new(),
                    Vec::new(),
                    Vec::new(),
                )
            },
            |(buf, lx, ly, cstar, diff), k| {
                let mut rng = replicate_stream(cfg.seed, k);
                resampler.draw_sorted(&mut rng, buf);
                cumulative_levels(&buf.xs, transform, lx);
                cumulative_levels(&buf.ys, transform, ly);
                lpp_counts(lx, ly, cstar);
                diff.clear();
                diff.extend(
                    counts
                        .iter()
                        .zip(cstar.iter())
                        .map(|(&c, &cs)| (c as f64 - cs as f64) / mf),
                );
                stats.iter().map(|kind| kind.apply(diff)).collect()
            },
        )
        .collect();

    let mut outcomes = Vec::with_capacity(stats.len());
    for (s, kind) in stats.iter().enumerate() {
        let reps: Vec<f64> = per_replicate.iter().map(|r| r[s]).collect();
        if reps.iter().any(|v| v.is_nan()) {
            return Err(Error::Numerical("bootstrap replicate produced NaN".into()));
        }
        let pvalue = exceedance_pvalue(observed[s], &reps);
        outcomes.push(TestOutcome {
            test: TestStatistic::Lpp { stat: *kind },
            statistic: FunctionalValue::new(observed[s], n, m),
            pvalue,
            reject: pvalue < cfg.alpha,
            replicate_values: reps,
            alpha: cfg.alpha,
            eps: cfg.eps,
            theta: cfg.theta,
            scheme: cfg.scheme,
            seed: cfg.seed,
        });
    }
    Ok(outcomes)
}

/// Bootstrap test of `cfg.stat` on the samples as given, with `cfg.theta`
/// applied as a power transform and no shift.
pub fn bootstrap_pvalue(x: &Sample, y: &Sample, cfg: &TestConfig) -> Result<TestOutcome> {
    let transform = Transform::from_theta(cfg.theta)?;
    let mut out = bootstrap_lpp_many(x, y, &[cfg.stat], transform, cfg)?;
    Ok(out.remove(0))
}

/// Several functionals of one dominance test, sharing replicates.
///
/// Applies the shift and power transform exactly as [`run_test`] does.
pub fn run_tests(
    x: &Sample,
    y: &Sample,
    stats: &[StatKind],
    cfg: &TestConfig,
) -> Result<Vec<TestOutcome>> {
    cfg.validate()?;
    let transform = Transform::from_theta(cfg.theta)?;
    match (transform, cfg.shift_order) {
        (Transform::Power { theta, .. }, ShiftOrder::AfterPower) => {
            let t = Transform::Power {
                theta,
                shift: cfg.eps,
            };
            bootstrap_lpp_many(x, y, stats, t, cfg)
        }
        _ => {
            let (xs, ys) = shift_samples(x, y, cfg.eps)?;
            bootstrap_lpp_many(&xs, &ys, stats, transform, cfg)
        }
    }
}

/// Test `H₀: X ≥ Y` in the order selected by `cfg.theta`.
pub fn run_test(x: &Sample, y: &Sample, cfg: &TestConfig) -> Result<TestOutcome> {
    let mut out = run_tests(x, y, &[cfg.stat], cfg)?;
    Ok(out.remove(0))
}

/// Test `H₀: X ≥₂ Y`. Swap the arguments for the reverse hypothesis.
pub fn ssd_test(x: &Sample, y: &Sample, cfg: &TestConfig) -> Result<TestOutcome> {
    let cfg = TestConfig {
        theta: None,
        ..cfg.clone()
    };
    run_test(x, y, &cfg)
}

/// Test `H₀: X^θ ≥₂ Y^θ`; `θ = 50` approximates first-order dominance.
pub fn tsd_test(x: &Sample, y: &Sample, theta: f64, cfg: &TestConfig) -> Result<TestOutcome> {
    let cfg = TestConfig {
        theta: Some(theta),
        ..cfg.clone()
    };
    run_test(x, y, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn singleton_resample_is_fixed() {
        let x = s(&[3.5]);
        let y = s(&[1.0, 2.0]);
        let mut r = rng::stream(1, &[]);
        for _ in 0..10 {
            let (a, _) = resample(&x, &y, Scheme::Independent, &mut r).unwrap();
            assert_eq!(a.values(), &[3.5]);
        }
    }

    #[test]
    fn matched_pairs_share_indices() {
        let x = s(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = s(&[10.0, 20.0, 30.0, 40.0, 50.0]);
        let mut r = rng::stream(3, &[]);
        let (a, b) = resample(&x, &y, Scheme::MatchedPairs, &mut r).unwrap();
        for (u, v) in a.values().iter().zip(b.values()) {
            assert_eq!(*v, u * 10.0);
        }
        assert!(resample(&x, &s(&[1.0]), Scheme::MatchedPairs, &mut r).is_err());
    }

    #[test]
    fn sorted_resampler_matches_plain_resample() {
        let x = s(&[0.4, 2.0, 1.1, 0.9, 3.3, 0.2]);
        let y = s(&[1.5, 0.3, 2.2, 0.8, 0.1, 4.0]);
        for scheme in [Scheme::Independent, Scheme::MatchedPairs] {
            let engine = Resampler::new(&x, &y, scheme).unwrap();
            let mut buf = ResampleBuffers::default();
            for k in 0..20 {
                let (a, b) = resample(&x, &y, scheme, &mut replicate_stream(9, k)).unwrap();
                engine.draw_sorted(&mut replicate_stream(9, k), &mut buf);
                assert_eq!(a.sorted(), buf.xs.as_slice());
                assert_eq!(b.sorted(), buf.ys.as_slice());
            }
        }
    }

    #[test]
    fn config_validation() {
        let ok = TestConfig::default();
        assert!(ok.validate().is_ok());
        assert!(TestConfig {
            replicates: 0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(TestConfig {
            alpha: 0.5,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(TestConfig {
            eps: -1.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(TestConfig {
            theta: Some(0.0),
            ..ok
        }
        .validate()
        .is_err());
    }

    #[test]
    fn identical_samples_accept() {
        let x = s(&[0.3, 1.2, 0.7, 2.5, 1.9, 0.1, 3.3, 0.8]);
        let out = ssd_test(
            &x,
            &x,
            &TestConfig {
                replicates: 200,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.statistic.raw, 0.0);
        assert!(out.pvalue >= 0.1);
        assert!(!out.reject);
    }

    #[test]
    fn constant_samples_tie_everywhere() {
        // Every replicate equals the observed 0, so strict exceedance gives p = 0.
        let x = s(&[2.0; 10]);
        let out = ssd_test(
            &x,
            &x,
            &TestConfig {
                replicates: 50,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(out.statistic.raw, 0.0);
        assert!(out.replicate_values.iter().all(|&v| v == 0.0));
        assert_eq!(out.pvalue, 0.0);
    }

    #[test]
    fn pvalue_strict_exceedance() {
        assert_eq!(exceedance_pvalue(0.0, &[0.0, 0.0, 0.1, 0.2]), 0.5);
        assert_eq!(exceedance_pvalue(0.2, &[0.0, 0.2]), 0.0);
    }

    #[test]
    fn report_json_fields() {
        let x = s(&[1.0, 2.0, 3.0]);
        let y = s(&[2.0, 4.0]);
        let out = ssd_test(
            &x,
            &y,
            &TestConfig {
                replicates: 20,
                seed: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&out.to_json(false)).unwrap();
        for key in [
            "schema", "stat", "raw", "scale", "pvalue", "reject", "K", "alpha", "eps", "theta",
            "scheme", "seed",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["K"], 20);
        assert_eq!(v["stat"], "tinf");
        assert!(v.get("replicate_values").is_none());
        let traced: serde_json::Value = serde_json::from_str(&out.to_json(true)).unwrap();
        assert_eq!(traced["replicate_values"].as_array().unwrap().len(), 20);
    }
}
