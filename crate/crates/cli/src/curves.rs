//! Curve data for plotting: LPP, identity and P-P plot on a regular grid.

use std::fmt::Write as _;

use lppsd_core::special::analytic_lpp_weibull_exp;
use lppsd_core::{generalized_lpp, pp_plot, DistSpec, LognormalComponent, Sample};

use crate::CliError;

/// Parse `weibull:a,b`, `exp`, `sm:a,q[,b]`, `lognormal:mu,sigma` or a JSON object.
pub fn parse_dist(s: &str) -> Result<DistSpec, CliError> {
    let s = s.trim();
    if s.starts_with('{') {
        let d: DistSpec =
            serde_json::from_str(s).map_err(|e| CliError::Config(format!("distribution: {e}")))?;
        d.validate()?;
        return Ok(d);
    }
    let (family, args) = s.split_once(':').unwrap_or((s, ""));
    let nums: Vec<f64> = if args.is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|a| {
                a.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad number '{a}' in '{s}'")))
            })
            .collect::<Result<_, _>>()?
    };
    let d = match (family.to_ascii_lowercase().as_str(), nums.as_slice()) {
        ("exp" | "exponential", []) => DistSpec::UnitExponential,
        ("weibull" | "w", [a, b]) => DistSpec::weibull(*a, *b)?,
        ("sm" | "singh_maddala", [a, q]) => DistSpec::singh_maddala(*a, *q, 1.0)?,
        ("sm" | "singh_maddala", [a, q, b]) => DistSpec::singh_maddala(*a, *q, *b)?,
        ("lognormal" | "ln", [mu, sigma]) => DistSpec::lognormal_mixture(
            vec![1.0],
            vec![LognormalComponent {
                meanlog: *mu,
                sdlog: *sigma,
            }],
        )?,
        _ => return Err(CliError::Config(format!("unrecognised distribution '{s}'"))),
    };
    Ok(d)
}

/// Deterministic quantile sample `F^{-1}((i - 1/2)/n)`.
pub fn quantile_sample(d: &DistSpec, n: usize) -> Result<Sample, CliError> {
    let v = (0..n)
        .map(|i| d.quantile((i as f64 + 0.5) / n as f64))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Sample::new(v)?)
}

/// Rows `theta,p,lpp,identity,pp` for `p = i/grid`, one block per theta.
pub fn sample_curves(
    x: &Sample,
    y: &Sample,
    thetas: &[f64],
    grid: usize,
) -> Result<String, CliError> {
    let pp = pp_plot(x, y);
    let mut out = String::from("theta,p,lpp,identity,pp\n");
    for &theta in thetas {
        let lpp = generalized_lpp(x, y, theta)?;
        for i in 0..=grid {
            let p = i as f64 / grid as f64;
            let (l, q) = if i == 0 {
                (0.0, 0.0)
            } else {
                (lpp.value_at(p), pp.value_at(p))
            };
            let _ = writeln!(out, "{theta},{p},{l},{p},{q}");
        }
    }
    Ok(out)
}

/// Population curves. Weibull against the unit exponential at `θ = 1` uses
/// the closed form; everything else uses quantile samples of size `resolution`.
pub fn dist_curves(
    f: &DistSpec,
    g: &DistSpec,
    thetas: &[f64],
    grid: usize,
    resolution: usize,
) -> Result<String, CliError> {
    let x = quantile_sample(f, resolution)?;
    let y = quantile_sample(g, resolution)?;
    let mut out = String::from("theta,p,lpp,identity,pp\n");
    for &theta in thetas {
        let analytic = match (f, g) {
            (DistSpec::Weibull { shape, scale }, DistSpec::UnitExponential) if theta == 1.0 => {
                Some((*shape, *scale))
            }
            _ => None,
        };
        let lpp = generalized_lpp(&x, &y, theta)?;
        for i in 0..=grid {
            let p = i as f64 / grid as f64;
            let l = match analytic {
                Some((a, b)) => analytic_lpp_weibull_exp(a, b, p)?,
                None if i == 0 => 0.0,
                None => lpp.value_at(p),
            };
            let q = if i == 0 {
                0.0
            } else {
                g.cdf(f.quantile(p.min(1.0 - f64::EPSILON))?)
            };
            let _ = writeln!(out, "{theta},{p},{l},{p},{q}");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_short_forms() {
        assert_eq!(parse_dist("exp").unwrap(), DistSpec::UnitExponential);
        assert_eq!(
            parse_dist("weibull:2,1.5").unwrap(),
            DistSpec::Weibull {
                shape: 2.0,
                scale: 1.5
            }
        );
        assert_eq!(
            parse_dist("sm:1.5,1.2").unwrap(),
            DistSpec::SinghMaddala {
                a: 1.5,
                q: 1.2,
                scale: 1.0
            }
        );
        assert_eq!(
            parse_dist(r#"{"family":"unit_exponential"}"#).unwrap(),
            DistSpec::UnitExponential
        );
        assert!(parse_dist("weibull:2").is_err());
        assert!(parse_dist("weibull:-1,1").is_err());
        assert!(parse_dist("cauchy").is_err());
    }

    #[test]
    fn identical_samples_follow_identity_at_nodes() {
        let x = Sample::new(vec![0.4, 1.0, 2.0, 3.5]).unwrap();
        let csv = sample_curves(&x, &x, &[1.0], 8).unwrap();
        for row in csv.lines().skip(1) {
            let f: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
            let on_node = (f[1] * 4.0).fract() == 0.0;
            if on_node {
                assert_eq!(f[2], f[3], "{row}");
            }
        }
    }

    #[test]
    fn weibull_two_is_above_identity() {
        let csv = dist_curves(
            &parse_dist("weibull:2,1.5").unwrap(),
            &DistSpec::UnitExponential,
            &[1.0],
            20,
            100,
        )
        .unwrap();
        for row in csv.lines().skip(2).take(19) {
            let f: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
            assert!(f[2] > f[3], "{row}");
        }
    }
}
