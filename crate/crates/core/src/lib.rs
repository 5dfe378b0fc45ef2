//! Bootstrap tests of second-order stochastic dominance built on the Lorenz
//! P-P plot, with a KSB3 baseline and a Monte Carlo harness.
//!
//! ```
//! use lppsd_core::{ssd_test, Sample, TestConfig};
//!
//! let x = Sample::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
//! let y = Sample::new(vec![0.5, 2.5, 2.5, 4.5]).unwrap();
//! let out = ssd_test(&x, &y, &TestConfig { replicates: 99, ..Default::default() }).unwrap();
//! assert!((0.0..=1.0).contains(&out.pvalue));
//! ```

// Guards like `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod distributions;
pub mod error;
pub mod ksb3;
pub mod lorenz;
pub mod rng;
pub mod sample;
pub mod sim;
pub mod special;
pub mod statistics;

pub use bootstrap::{
    bootstrap_pvalue, exceedance_pvalue, resample, run_test, run_tests, ssd_test, tsd_test,
    OutcomeReport, Scheme, ShiftOrder, TestConfig, TestOutcome, TestStatistic, FSD_THETA,
};
pub use distributions::{
    sample_iid, sample_paired, DistSpec, LognormalComponent, PairedSamplerConfig,
};
pub use error::{Error, Result};
pub use ksb3::{integrated_ecdf, ksb3_test, Ksb3Config};
pub use lorenz::{
    empirical_lorenz, generalized_lpp, lpp_linear, lpp_step, pp_plot, step_lorenz_inverse,
    LinearLpp, LorenzCurve, LppCurve, StepLorenzInverse, Transform,
};
pub use rng::DEFAULT_SEED;
pub use sample::{PairedSample, Sample};
pub use sim::{
    builtin_spec, builtin_specs, run_experiment, Direction, ExperimentSpec, RejectionTable,
    Sampling, SimStat,
};
pub use statistics::{t_inf, t_one, t_p, FunctionalValue, StatKind};
