//! Monte Carlo rejection-rate experiments.
//!
//! Every run draws its samples from `stream(seed, [SAMPLE, n, run, ..])`; each
//! test gets its own bootstrap seed derived from `(seed, n, run, direction)`.
//! Runs execute on the ambient rayon pool and are aggregated by count, so the
//! table does not depend on the number of workers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bootstrap::{run_tests, Scheme, ShiftOrder, TestConfig, FSD_THETA};
use crate::distributions::{
    sample_iid, sample_paired, weibull_unit_mean_scale, DistSpec, LognormalComponent,
    PairedSamplerConfig,
};
use crate::error::{Error, Result};
use crate::ksb3::{ksb3_test, Ksb3Config};
use crate::rng::{self, tag};
use crate::sample::Sample;
use crate::statistics::StatKind;

/// How the two samples of a run are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    Independent,
    /// Gaussian copula with correlation `rho`; tests resample matched pairs.
    Paired { rho: f64 },
}

impl Sampling {
    pub fn scheme(&self) -> Scheme {
        match self {
            Sampling::Independent => Scheme::Independent,
            Sampling::Paired { .. } => Scheme::MatchedPairs,
        }
    }
}

/// A column family of the rejection table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SimStat {
    Lpp(StatKind),
    Ksb3 { order: u8 },
}

impl fmt::Display for SimStat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimStat::Lpp(k) => write!(f, "{k}"),
            SimStat::Ksb3 { order } => write!(f, "ksb3:{order}"),
        }
    }
}

impl FromStr for SimStat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "ksb3" {
            return Ok(SimStat::Ksb3 { order: 2 });
        }
        if let Some(o) = t.strip_prefix("ksb3:") {
            return match o {
                "1" => Ok(SimStat::Ksb3 { order: 1 }),
                "2" => Ok(SimStat::Ksb3 { order: 2 }),
                _ => Err(Error::InvalidParameter(format!(
                    "KSB3 order must be 1 or 2, got '{o}'"
                ))),
            };
        }
        Ok(SimStat::Lpp(t.parse()?))
    }
}

impl From<SimStat> for String {
    fn from(s: SimStat) -> Self {
        s.to_string()
    }
}

impl TryFrom<String> for SimStat {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `H₀: F ≥ G`.
    Forward,
    /// `H₀ᴿ: G ≥ F`.
    Reverse,
    #[default]
    Both,
}

impl Direction {
    fn legs(&self) -> &'static [Leg] {
        match self {
            Direction::Forward => &[Leg::Forward],
            Direction::Reverse => &[Leg::Reverse],
            Direction::Both => &[Leg::Forward, Leg::Reverse],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leg {
    Forward,
    Reverse,
}

impl Leg {
    fn suffix(&self) -> &'static str {
        match self {
            Leg::Forward => "fwd",
            Leg::Reverse => "rev",
        }
    }

    fn key(&self) -> u64 {
        match self {
            Leg::Forward => 0,
            Leg::Reverse => 1,
        }
    }
}

fn default_grid() -> usize {
    100
}

/// A complete, serializable description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub f: DistSpec,
    pub g: DistSpec,
    #[serde(default)]
    pub sampling: Sampling,
    pub n_list: Vec<usize>,
    pub mc_runs: usize,
    #[serde(rename = "K")]
    pub replicates: usize,
    pub alpha: f64,
    pub stats: Vec<SimStat>,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub theta: Option<f64>,
    pub eps: f64,
    #[serde(default = "default_grid")]
    pub ksb3_grid: usize,
    #[serde(default)]
    pub shift_order: ShiftOrder,
    pub master_seed: u64,
}

pub const FULL_RUNS: usize = 500;
pub const FULL_REPLICATES: usize = 500;
pub const FULL_N: [usize; 5] = [50, 100, 200, 500, 1000];

impl ExperimentSpec {
    /// Full-scale defaults: α = 0.1, 500 runs × 500 replicates, ε = 1e-4.
    pub fn new(name: impl Into<String>, f: DistSpec, g: DistSpec) -> Self {
        Self {
            name: name.into(),
            f,
            g,
            sampling: Sampling::Independent,
            n_list: FULL_N.to_vec(),
            mc_runs: FULL_RUNS,
            replicates: FULL_REPLICATES,
            alpha: 0.1,
            stats: vec![
                SimStat::Lpp(StatKind::TInf),
                SimStat::Lpp(StatKind::T1),
                SimStat::Ksb3 { order: 2 },
            ],
            direction: Direction::Both,
            theta: None,
            eps: 1e-4,
            ksb3_grid: 100,
            shift_order: ShiftOrder::BeforePower,
            master_seed: rng::DEFAULT_SEED,
        }
    }

    /// Override the scale knobs; `None` keeps the current value.
    pub fn with_scale(
        mut self,
        runs: Option<usize>,
        replicates: Option<usize>,
        n_list: Option<Vec<usize>>,
    ) -> Self {
        if let Some(r) = runs {
            self.mc_runs = r;
        }
        if let Some(k) = replicates {
            self.replicates = k;
        }
        if let Some(n) = n_list {
            self.n_list = n;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(format!("{}: {m}", self.name)));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad("name must be non-empty and free of path separators");
        }
        if self.mc_runs == 0 {
            return bad("mc_runs must be at least 1");
        }
        if self.n_list.is_empty() || self.n_list.contains(&0) {
            return bad("n_list must be non-empty with positive sizes");
        }
        if self.stats.is_empty() {
            return bad("no statistics selected");
        }
        self.f.validate()?;
        self.g.validate()?;
        if let Sampling::Paired { rho } = self.sampling {
            if !(rho.abs() < 1.0) {
                return bad("rho must lie in (-1, 1)");
            }
        }
        self.lpp_config(0).validate()?;
        for s in &self.stats {
            if let SimStat::Ksb3 { order } = s {
                self.ksb3_config(*order, 0).validate()?;
            }
        }
        Ok(())
    }

    fn lpp_config(&self, seed: u64) -> TestConfig {
        TestConfig {
            stat: StatKind::TInf,
            alpha: self.alpha,
            replicates: self.replicates,
            eps: self.eps,
            theta: self.theta,
            scheme: self.sampling.scheme(),
            seed,
            shift_order: self.shift_order,
        }
    }

    fn ksb3_config(&self, order: u8, seed: u64) -> Ksb3Config {
        Ksb3Config {
            order,
            grid_size: self.ksb3_grid,
            alpha: self.alpha,
            replicates: self.replicates,
            scheme: self.sampling.scheme(),
            seed,
        }
    }

    /// Column labels `<stat>_<fwd|rev>`, direction-major.
    pub fn columns(&self) -> Vec<String> {
        self.direction
            .legs()
            .iter()
            .flat_map(|leg| {
                self.stats
                    .iter()
                    .map(move |s| format!("{s}_{}", leg.suffix()))
            })
            .collect()
    }

    /// First 12 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .take(6)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// `<name>_<hash>`, without extension.
    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.name, self.hash())
    }

    /// Draw the samples of run `run` at size `n`.
    pub fn draw(&self, n: usize, run: usize) -> Result<(Sample, Sample)> {
        let base = [tag::SAMPLE, n as u64, run as u64];
        match self.sampling {
            Sampling::Independent => {
                let x = sample_iid(
                    &self.f,
                    n,
                    &mut rng::stream(self.master_seed, &[base[0], base[1], base[2], 0]),
                )?;
                let y = sample_iid(
                    &self.g,
                    n,
                    &mut rng::stream(self.master_seed, &[base[0], base[1], base[2], 1]),
                )?;
                Ok((x, y))
            }
            Sampling::Paired { rho } => {
                let cfg = PairedSamplerConfig::new(rho, self.f.clone(), self.g.clone(), n)?;
                let pairs = sample_paired(&cfg, &mut rng::stream(self.master_seed, &base))?;
                Ok(pairs.into_parts())
            }
        }
    }

    /// Reject flags of one run, in [`columns`](Self::columns) order.
    pub fn run_once(&self, n: usize, run: usize) -> Result<Vec<bool>> {
        let (x, y) = self.draw(n, run)?;
        let lpp: Vec<StatKind> = self
            .stats
            .iter()
            .filter_map(|s| match s {
                SimStat::Lpp(k) => Some(*k),
                SimStat::Ksb3 { .. } => None,
            })
            .collect();
        let mut flags = Vec::with_capacity(self.columns().len());
        for leg in self.direction.legs() {
            let (a, b) = match leg {
                Leg::Forward => (&x, &y),
                Leg::Reverse => (&y, &x),
            };
            let path = [n as u64, run as u64, leg.key()];
            let seed = rng::derive_seed(self.master_seed, &[tag::TEST, path[0], path[1], path[2]]);
            let lpp_out = run_tests(a, b, &lpp, &self.lpp_config(seed))?;
            let mut lpp_iter = lpp_out.iter();
            for s in &self.stats {
                match s {
                    SimStat::Lpp(_) => {
                        flags.push(lpp_iter.next().expect("one outcome per stat").reject)
                    }
                    SimStat::Ksb3 { order } => {
                        let seed = rng::derive_seed(
                            self.master_seed,
                            &[tag::KSB3, path[0], path[1], path[2], *order as u64],
                        );
                        flags.push(ksb3_test(a, b, &self.ksb3_config(*order, seed))?.reject);
                    }
                }
            }
        }
        Ok(flags)
    }
}

/// One row of a rejection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRow {
    pub n: usize,
    pub runs: usize,
    /// Runs that raised a numerical error; excluded from the rates.
    pub failed: usize,
    pub rejections: Vec<usize>,
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionTable {
    pub schema: u32,
    pub spec: ExperimentSpec,
    pub spec_hash: String,
    pub columns: Vec<String>,
    pub rows: Vec<RejectionRow>,
    /// All tests of a run see the same pair of samples.
    pub shared_samples: bool,
    pub failed_runs_policy: String,
    pub runtime_secs: f64,
}

impl RejectionTable {
    pub fn rate(&self, n: usize, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|x| x == column)?;
        self.rows.iter().find(|r| r.n == n).map(|r| r.rates[c])
    }

    /// `n,runs,failed,<columns...>`; contains no timing data.
    pub fn to_csv(&self) -> String {
        let mut out = format!("n,runs,failed,{}\n", self.columns.join(","));
        for r in &self.rows {
            out.push_str(&format!("{},{},{}", r.n, r.runs, r.failed));
            for v in &r.rates {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

/// Run every `(n, run)` cell of the experiment.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RejectionTable> {
    spec.validate()?;
    let start = Instant::now();
    let columns = spec.columns();
    let mut rows = Vec::with_capacity(spec.n_list.len());
    for &n in &spec.n_list {
        let results: Vec<Result<Vec<bool>>> = (0..spec.mc_runs)
            .into_par_iter()
            .map(|run| spec.run_once(n, run))
            .collect();
        let mut rejections = vec![0usize; columns.len()];
        let mut failed = 0;
        for r in results {
            match r {
                Ok(flags) => {
                    for (acc, f) in rejections.iter_mut().zip(flags) {
                        *acc += f as usize;
                    }
                }
                Err(_) => failed += 1,
            }
        }
        let valid = spec.mc_runs - failed;
        let rates = rejections
            .iter()
            .map(|&c| {
                if valid == 0 {
                    f64::NAN
                } else {
                    c as f64 / valid as f64
                }
            })
            .collect();
        rows.push(RejectionRow {
            n,
            runs: spec.mc_runs,
            failed,
            rejections,
            rates,
        });
    }
    Ok(RejectionTable {
        schema: 1,
        spec: spec.clone(),
        spec_hash: spec.hash(),
        columns,
        rows,
        shared_samples: true,
        failed_runs_policy: "excluded_and_counted".into(),
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

fn weibull_unit_mean(a: f64) -> DistSpec {
    DistSpec::Weibull {
        shape: a,
        scale: weibull_unit_mean_scale(a).expect("positive shape"),
    }
}

fn sm(a: f64, q: f64) -> DistSpec {
    DistSpec::SinghMaddala { a, q, scale: 1.0 }
}

fn ln_mixture(minor_sdlog: f64) -> DistSpec {
    DistSpec::LognormalMixture {
        weights: vec![0.9, 0.1],
        components: vec![
            LognormalComponent {
                meanlog: 0.85,
                sdlog: 0.4,
            },
            LognormalComponent {
                meanlog: 0.4,
                sdlog: minor_sdlog,
            },
        ],
    }
}

/// The built-in designs at full scale.
///
/// `table1`..`table17` follow the appendix order: Weibull size and power
/// (1-4), lognormal mixture (5), independent Singh-Maddala (6-8), paired
/// Singh-Maddala (9-14) and the θ = 50 first-order tests (15-17, also named
/// `fsd_q1.2`, `fsd_q1.5`, `fsd_q1.8`). `weibull_a<a>` cover the shapes
/// 1.25..2, and `table5_alt` uses `LN(0.4, 0.9)` for the minor component.
pub fn builtin_specs() -> Vec<ExperimentSpec> {
    let w11 = DistSpec::Weibull {
        shape: 1.0,
        scale: 1.0,
    };
    let mut out = Vec::new();

    let mut t1 = ExperimentSpec::new("table1", w11.clone(), w11.clone());
    t1.direction = Direction::Forward;
    out.push(t1);
    for (i, a) in [1.1, 1.2, 1.3].into_iter().enumerate() {
        out.push(ExperimentSpec::new(
            format!("table{}", i + 2),
            weibull_unit_mean(a),
            w11.clone(),
        ));
    }
    for a in [1.25, 1.5, 1.75, 2.0] {
        out.push(ExperimentSpec::new(
            format!("weibull_a{a}"),
            weibull_unit_mean(a),
            w11.clone(),
        ));
    }

    let g_ln = DistSpec::LognormalMixture {
        weights: vec![1.0],
        components: vec![LognormalComponent {
            meanlog: 0.86,
            sdlog: 0.6,
        }],
    };
    out.push(ExperimentSpec::new("table5", ln_mixture(0.4), g_ln.clone()));
    out.push(ExperimentSpec::new("table5_alt", ln_mixture(0.9), g_ln));

    for (i, q) in [1.8, 1.5, 1.2].into_iter().enumerate() {
        out.push(ExperimentSpec::new(
            format!("table{}", i + 6),
            sm(1.5, q),
            sm(1.0, q),
        ));
    }
    let mut t = 9;
    for q in [1.8, 1.2] {
        for rho in [0.25, 0.5, 0.75] {
            let mut s = ExperimentSpec::new(format!("table{t}"), sm(1.5, q), sm(1.0, q));
            s.sampling = Sampling::Paired { rho };
            out.push(s);
            t += 1;
        }
    }
    for (i, q) in [1.2, 1.5, 1.8].into_iter().enumerate() {
        for name in [format!("table{}", i + 15), format!("fsd_q{q}")] {
            let mut s = ExperimentSpec::new(name, sm(1.5, q), sm(1.0, q));
            s.theta = Some(FSD_THETA);
            s.stats = vec![
                SimStat::Lpp(StatKind::TInf),
                SimStat::Lpp(StatKind::T1),
                SimStat::Ksb3 { order: 1 },
            ];
            out.push(s);
        }
    }
    out
}

pub fn builtin_spec(name: &str) -> Option<ExperimentSpec> {
    builtin_specs().into_iter().find(|s| s.name == name)
}

/// The seventeen appendix tables, without aliases and extra parameter sets.
pub fn standard_tables() -> Vec<ExperimentSpec> {
    (1..=17)
        .filter_map(|i| builtin_spec(&format!("table{i}")))
        .collect()
}
