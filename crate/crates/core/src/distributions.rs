//! Parametric families used by the simulation designs, with closed-form or
//! bisection quantiles and inverse-transform samplers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{PairedSample, Sample};
use crate::special::{gamma_fn, regularized_lower_gamma, regularized_upper_gamma};

/// One lognormal component, parametrized on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalComponent {
    pub meanlog: f64,
    pub sdlog: f64,
}

/// A distribution on the non-negative half line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistSpec {
    /// `F(x) = 1 - exp(-(x/scale)^shape)`.
    Weibull {
        shape: f64,
        scale: f64,
    },
    UnitExponential,
    /// `F(x) = 1 - [1 + (x/scale)^a]^{-q}`.
    SinghMaddala {
        a: f64,
        q: f64,
        scale: f64,
    },
    LognormalMixture {
        weights: Vec<f64>,
        components: Vec<LognormalComponent>,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl DistSpec {
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        let d = DistSpec::Weibull { shape, scale };
        d.validate()?;
        Ok(d)
    }

    pub fn singh_maddala(a: f64, q: f64, scale: f64) -> Result<Self> {
        let d = DistSpec::SinghMaddala { a, q, scale };
        d.validate()?;
        Ok(d)
    }

    pub fn lognormal(meanlog: f64, sdlog: f64) -> Result<Self> {
        Self::lognormal_mixture(vec![1.0], vec![LognormalComponent { meanlog, sdlog }])
    }

    pub fn lognormal_mixture(
        weights: Vec<f64>,
        components: Vec<LognormalComponent>,
    ) -> Result<Self> {
        let d = DistSpec::LognormalMixture {
            weights,
            components,
        };
        d.validate()?;
        Ok(d)
    }

    /// Check the parameter invariants. Deserialized specs must pass through here.
    pub fn validate(&self) -> Result<()> {
        match self {
            DistSpec::Weibull { shape, scale } => {
                positive("Weibull shape", *shape)?;
                positive("Weibull scale", *scale)
            }
            DistSpec::UnitExponential => Ok(()),
            DistSpec::SinghMaddala { a, q, scale } => {
                positive("Singh-Maddala a", *a)?;
                positive("Singh-Maddala q", *q)?;
                positive("Singh-Maddala scale", *scale)
            }
            DistSpec::LognormalMixture {
                weights,
                components,
            } => {
                if weights.is_empty() || weights.len() != components.len() {
                    return Err(Error::InvalidParameter(
                        "mixture needs one weight per component".into(),
                    ));
                }
                if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "mixture weights must be non-negative".into(),
                    ));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
                for c in components {
                    if !c.meanlog.is_finite() {
                        return Err(Error::InvalidParameter("meanlog must be finite".into()));
                    }
                    positive("sdlog", c.sdlog)?;
                }
                Ok(())
            }
        }
    }

    /// Cumulative distribution function; 0 for `x <= 0`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        match self {
            DistSpec::Weibull { shape, scale } => -(-(x / scale).powf(*shape)).exp_m1(),
            DistSpec::UnitExponential => -(-x).exp_m1(),
            DistSpec::SinghMaddala { a, q, scale } => -(-q * (x / scale).powf(*a).ln_1p()).exp_m1(),
            DistSpec::LognormalMixture {
                weights,
                components,
            } => {
                let lx = x.ln();
                let v: f64 = weights
                    .iter()
                    .zip(components)
                    .map(|(w, c)| w * std_normal_cdf((lx - c.meanlog) / c.sdlog))
                    .sum();
                v.clamp(0.0, 1.0)
            }
        }
    }

    /// Left-continuous quantile function on `[0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain {
                func: "quantile",
                value: p,
            });
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        // -ln(1-p) without cancellation
        let h = -(-p).ln_1p();
        Ok(match self {
            DistSpec::Weibull { shape, scale } => scale * h.powf(1.0 / shape),
            DistSpec::UnitExponential => h,
            DistSpec::SinghMaddala { a, q, scale } => scale * (h / q).exp_m1().powf(1.0 / a),
            DistSpec::LognormalMixture { .. } => self.bisect_quantile(p),
        })
    }

    fn bisect_quantile(&self, p: f64) -> f64 {
        let mut hi = 1.0;
        while self.cdf(hi) <= p {
            hi *= 2.0;
            if hi.is_infinite() {
                return f64::MAX;
            }
        }
        let mut lo = 0.0;
        for _ in 0..2000 {
            if hi - lo <= 1e-12 * hi.max(1e-300) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Mean of the distribution.
    pub fn mean(&self) -> f64 {
        match self {
            DistSpec::Weibull { shape, scale } => {
                scale * gamma_fn(1.0 + 1.0 / shape).unwrap_or(f64::NAN)
            }
            DistSpec::UnitExponential => 1.0,
            DistSpec::SinghMaddala { a, q, scale } => {
                // b·Γ(1+1/a)Γ(q-1/a)/Γ(q), finite only for aq > 1
                if a * q <= 1.0 {
                    return f64::INFINITY;
                }
                let g = |s: f64| gamma_fn(s).unwrap_or(f64::NAN);
                scale * g(1.0 + 1.0 / a) * g(q - 1.0 / a) / g(*q)
            }
            DistSpec::LognormalMixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .map(|(w, c)| w * (c.meanlog + 0.5 * c.sdlog * c.sdlog).exp())
                .sum(),
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self {
            DistSpec::Weibull { shape, scale } => format!("W({shape},{scale})"),
            DistSpec::UnitExponential => "Exp(1)".into(),
            DistSpec::SinghMaddala { a, q, scale } => format!("SM({a},{q},{scale})"),
            DistSpec::LognormalMixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .map(|(w, c)| format!("{w}*LN({},{})", c.meanlog, c.sdlog))
                .collect::<Vec<_>>()
                .join("+"),
        }
    }
}

/// Scale `q_a = 1/Γ(1 + 1/a)`; `W(a, q_a)` has mean 1.
pub fn weibull_unit_mean_scale(a: f64) -> Result<f64> {
    positive("Weibull shape", a)?;
    Ok(1.0 / gamma_fn(1.0 + 1.0 / a)?)
}

/// Standard normal CDF, via `erfc(t) = Q(1/2, t²)`.
pub fn std_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    let h = 0.5 * z * z;
    if z < 0.0 {
        0.5 * regularized_upper_gamma(0.5, h).expect("valid arguments")
    } else {
        0.5 + 0.5 * regularized_lower_gamma(0.5, h).expect("valid arguments")
    }
}

/// Standard normal quantile: rational initial guess refined by one Halley step.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            func: "std_normal_quantile",
            value: p,
        });
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (-p).ln_1p()).sqrt())
    };

    // Halley refinement; compare in the smaller tail to keep relative accuracy.
    for _ in 0..2 {
        let e = if x < 0.0 {
            std_normal_cdf(x) - p
        } else {
            (1.0 - p) - std_normal_cdf(-x)
        };
        let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// `n` i.i.d. draws by inverse transform.
pub fn sample_iid<R: Rng + ?Sized>(spec: &DistSpec, n: usize, rng: &mut R) -> Result<Sample> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        values.push(spec.quantile(u.min(BELOW_ONE))?);
    }
    Sample::new(values)
}

/// Configuration of the Gaussian-copula paired sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSamplerConfig {
    pub rho: f64,
    pub marginals: (DistSpec, DistSpec),
    pub n: usize,
}

impl PairedSamplerConfig {
    pub fn new(rho: f64, f: DistSpec, g: DistSpec, n: usize) -> Result<Self> {
        let cfg = Self {
            rho,
            marginals: (f, g),
            n,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "correlation {} not in (-1, 1)",
                self.rho
            )));
        }
        if self.n == 0 {
            return Err(Error::EmptySample);
        }
        self.marginals.0.validate()?;
        self.marginals.1.validate()
    }
}

/// Draw the uniform scores `(U¹, U²)` of a bivariate normal with correlation `rho`.
pub fn gaussian_copula_scores<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> Result<(f64, f64)> {
    let u1 = open_unit(rng);
    let z1 = std_normal_quantile(u1)?;
    let z2 = std_normal_quantile(open_unit(rng))?;
    let w = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
    Ok((u1, std_normal_cdf(w)))
}

/// `n` dependent pairs `(F^{-1}(U¹), G^{-1}(U²))` under a Gaussian copula.
pub fn sample_paired<R: Rng + ?Sized>(
    cfg: &PairedSamplerConfig,
    rng: &mut R,
) -> Result<PairedSample> {
    cfg.validate()?;
    let mut xs = Vec::with_capacity(cfg.n);
    let mut ys = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let (u1, u2) = gaussian_copula_scores(cfg.rho, rng)?;
        xs.push(cfg.marginals.0.quantile(u1.min(BELOW_ONE))?);
        ys.push(cfg.marginals.1.quantile(u2.min(BELOW_ONE))?);
    }
    PairedSample::new(Sample::new(xs)?, Sample::new(ys)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn cdf_examples() {
        assert_eq!(DistSpec::weibull(1.0, 1.0).unwrap().cdf(0.0), 0.0);
        let sm = DistSpec::singh_maddala(1.0, 1.0, 1.0).unwrap();
        assert!((sm.cdf(1.0) - 0.5).abs() < 1e-15);
        let w = DistSpec::weibull(2.0, 1.0).unwrap();
        assert!((w.cdf(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let sm = DistSpec::singh_maddala(1.7, 2.3, 1.0).unwrap();
        assert_eq!(sm.quantile(0.0).unwrap(), 0.0);
        let sm1 = DistSpec::singh_maddala(1.0, 1.0, 1.0).unwrap();
        assert!((sm1.quantile(0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!(sm1.quantile(1.0).is_err());
        assert!(sm1.quantile(-0.1).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DistSpec::weibull(0.0, 1.0).is_err());
        assert!(DistSpec::singh_maddala(1.0, -1.0, 1.0).is_err());
        let c = LognormalComponent {
            meanlog: 0.0,
            sdlog: 1.0,
        };
        assert!(DistSpec::lognormal_mixture(vec![0.5, 0.4], vec![c, c]).is_err());
        assert!(DistSpec::lognormal_mixture(vec![0.5], vec![c, c]).is_err());
        assert!(DistSpec::lognormal(0.0, 0.0).is_err());
    }

    #[test]
    fn unit_mean_scale() {
        assert!((weibull_unit_mean_scale(1.0).unwrap() - 1.0).abs() < 1e-14);
        let expected = 2.0 / std::f64::consts::PI.sqrt();
        assert!((weibull_unit_mean_scale(2.0).unwrap() - expected).abs() < 1e-13);
        for a in [1.1, 1.3, 2.0] {
            let d = DistSpec::weibull(a, weibull_unit_mean_scale(a).unwrap()).unwrap();
            assert!((d.mean() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn normal_quantile_roundtrip() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let z = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(z) - p).abs() < 1e-14, "p={p}");
        }
        for p in [1e-12, 1e-8, 1.0 - 1e-9] {
            let z = std_normal_quantile(p).unwrap();
            assert!(((std_normal_cdf(z) - p) / p.min(1.0 - p)).abs() < 1e-7);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = DistSpec::weibull(1.5, 1.0).unwrap();
        let a = sample_iid(&d, 1, &mut stream(1, &[0])).unwrap();
        let b = sample_iid(&d, 1, &mut stream(1, &[0])).unwrap();
        let c = sample_iid(&d, 1, &mut stream(2, &[0])).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(sample_iid(&d, 0, &mut stream(1, &[0])).is_err());
    }

    #[test]
    fn paired_config_rejects_unit_correlation() {
        let e = DistSpec::UnitExponential;
        assert!(PairedSamplerConfig::new(1.0, e.clone(), e.clone(), 10).is_err());
        assert!(PairedSamplerConfig::new(-0.3, e.clone(), e, 10).is_ok());
    }
}
