//! Gamma-family functions, the lower branch of the Lambert W function and the
//! closed-form Lorenz P-P plot of a Weibull against a unit exponential.
//!
//! Everything here is dependency-free and stateless.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos sum for `ln Γ(s)`, valid for `s >= 0.5`.
fn ln_gamma_lanczos(s: f64) -> f64 {
    let z = s - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Natural log of the gamma function for `s > 0`.
pub fn ln_gamma(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain {
            func: "ln_gamma",
            value: s,
        });
    }
    if s < 0.5 {
        // Reflection: Γ(s)Γ(1-s) = π / sin(πs); both factors positive on (0, 1/2).
        Ok(PI.ln() - (PI * s).sin().ln() - ln_gamma_lanczos(1.0 - s))
    } else {
        Ok(ln_gamma_lanczos(s))
    }
}

/// Gamma function for positive arguments.
pub fn gamma_fn(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain {
            func: "gamma_fn",
            value: s,
        });
    }
    if s < 0.5 {
        let g = gamma_lanczos(1.0 - s);
        return Ok(PI / ((PI * s).sin() * g));
    }
    Ok(gamma_lanczos(s))
}

fn gamma_lanczos(s: f64) -> f64 {
    // Direct evaluation keeps full relative precision for moderate s.
    if s > 140.0 {
        return ln_gamma_lanczos(s).exp();
    }
    let z = s - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;

/// Regularized lower incomplete gamma `P(s, x)` by its power series.
fn gamma_p_series(s: f64, x: f64, ln_gamma_s: f64) -> f64 {
    let mut ap = s;
    let mut del = 1.0 / s;
    let mut sum = del;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * (-x + s * x.ln() - ln_gamma_s).exp()
}

/// Regularized upper incomplete gamma `Q(s, x)` by modified Lentz continued fraction.
fn gamma_q_cont_frac(s: f64, x: f64, ln_gamma_s: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    (-x + s * x.ln() - ln_gamma_s).exp() * h
}

fn check_incomplete_args(func: &'static str, s: f64, x: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain { func, value: s });
    }
    if !(x >= 0.0) {
        return Err(Error::Domain { func, value: x });
    }
    Ok(())
}

/// Regularized upper incomplete gamma `Q(s, x) = Γ(s, x) / Γ(s)`.
pub fn regularized_upper_gamma(s: f64, x: f64) -> Result<f64> {
    check_incomplete_args("regularized_upper_gamma", s, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let lg = ln_gamma(s)?;
    if x < s + 1.0 {
        Ok(1.0 - gamma_p_series(s, x, lg))
    } else {
        Ok(gamma_q_cont_frac(s, x, lg))
    }
}

/// Regularized lower incomplete gamma `P(s, x) = 1 - Q(s, x)`.
pub fn regularized_lower_gamma(s: f64, x: f64) -> Result<f64> {
    check_incomplete_args("regularized_lower_gamma", s, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let lg = ln_gamma(s)?;
    if x < s + 1.0 {
        Ok(gamma_p_series(s, x, lg))
    } else {
        Ok(1.0 - gamma_q_cont_frac(s, x, lg))
    }
}

/// Upper incomplete gamma `Γ(s, x) = ∫_x^∞ t^{s-1} e^{-t} dt`.
///
/// Uses the series for `x < s + 1` and a continued fraction otherwise.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    check_incomplete_args("upper_incomplete_gamma", s, x)?;
    if x == 0.0 {
        return gamma_fn(s);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let lg = ln_gamma(s)?;
    if x < s + 1.0 {
        Ok(gamma_fn(s)? * (1.0 - gamma_p_series(s, x, lg)))
    } else {
        // Stay in log space so that tiny tails do not go through Γ(s)·Q.
        Ok(gamma_q_cont_frac(s, x, 0.0))
    }
}

const INV_E: f64 = 1.0 / E;

/// Lower real branch `W₋₁` of the Lambert W function on `[-1/e, 0)`.
///
/// Returns `w <= -1` with `w·e^w = x`. The iteration is a bracketed Halley
/// scheme started from the branch-point series or the logarithmic asymptote,
/// and it stops on the residual of the defining equation.
pub fn lambert_w_minus1(x: f64) -> Result<f64> {
    if !(-INV_E - 4.0 * f64::EPSILON..0.0).contains(&x) {
        return Err(Error::Domain {
            func: "lambert_w_minus1",
            value: x,
        });
    }
    let x = x.max(-INV_E);
    let gap = E * x + 1.0;
    if gap <= 0.0 {
        return Ok(-1.0);
    }

    let mut w = if gap < 0.25 {
        let p = -(2.0 * gap).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };

    // f(w) = w e^w - x is decreasing on (-inf, -1]: f > 0 left of the root.
    let mut lo = f64::NEG_INFINITY;
    let mut hi: f64 = -1.0;
    w = w.min(-1.0);
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            return Ok(w);
        }
        if f > 0.0 {
            lo = lo.max(w);
        } else {
            hi = hi.min(w);
        }
        let wp1 = w + 1.0;
        let step = if wp1.abs() < 1e-300 {
            f64::NAN
        } else {
            f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        };
        let mut next = w - step;
        if !next.is_finite() || next > hi || next < lo || next > -1.0 {
            next = if lo.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * hi.min(-1.0) - 1.0
            };
        }
        if (next - w).abs() <= 4.0 * f64::EPSILON * w.abs() {
            w = next;
            break;
        }
        w = next;
    }
    Ok(w)
}

/// Unscaled Lorenz curve of `W(a, b)` at `p`:
/// `b·[Γ(1+1/a) - Γ(1+1/a, -ln(1-p))]`. At `p = 1` this is the mean.
pub fn weibull_lorenz(a: f64, b: f64, p: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("Weibull(a={a}, b={b})")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            func: "weibull_lorenz",
            value: p,
        });
    }
    let s = 1.0 + 1.0 / a;
    if p == 1.0 {
        return Ok(b * gamma_fn(s)?);
    }
    let z = -(-p).ln_1p();
    // b·γ(s, z) with γ the lower incomplete gamma.
    Ok(b * gamma_fn(s)? * regularized_lower_gamma(s, z)?)
}

/// Inverse of the unscaled Lorenz curve of the unit exponential,
/// `1 - exp(1 + W₋₁((t-1)/e))`, extended by 1 for `t >= 1`.
pub fn unit_exponential_lorenz_inverse(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            func: "unit_exponential_lorenz_inverse",
            value: t,
        });
    }
    if t >= 1.0 {
        return Ok(1.0);
    }
    let w = lambert_w_minus1((t - 1.0) / E)?;
    Ok((-(1.0 + w).exp_m1()).clamp(0.0, 1.0))
}

/// Closed-form LPP of `F = W(a, b)` against the unit exponential `G`,
/// i.e. `1 ∧ L_G^{-1}(L_F(p))`.
pub fn analytic_lpp_weibull_exp(a: f64, b: f64, p: f64) -> Result<f64> {
    let lf = weibull_lorenz(a, b, p)?;
    unit_exponential_lorenz_inverse(lf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_known_values() {
        assert!(rel(gamma_fn(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma_fn(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma_fn(5.0).unwrap(), 24.0) < 1e-13);
        assert!(rel(gamma_fn(1.5).unwrap(), PI.sqrt() / 2.0) < 1e-14);
        assert!(rel(gamma_fn(0.1).unwrap(), 9.513_507_698_668_732) < 1e-13);
        assert!(rel(ln_gamma(100.0).unwrap(), 359.134_205_369_575_4) < 1e-14);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
    }

    #[test]
    fn incomplete_gamma_edges() {
        for s in [0.3, 1.0, 2.5, 7.0] {
            assert!(
                rel(
                    upper_incomplete_gamma(s, 0.0).unwrap(),
                    gamma_fn(s).unwrap()
                ) < 1e-15
            );
        }
        for x in [0.01, 0.5, 1.0, 2.0, 5.0, 30.0] {
            assert!(rel(upper_incomplete_gamma(1.0, x).unwrap(), (-x).exp()) < 1e-13);
        }
        assert!(upper_incomplete_gamma(2.0, 800.0).unwrap() < 1e-300);
        assert!(upper_incomplete_gamma(-1.0, 1.0).is_err());
        assert!(upper_incomplete_gamma(1.0, -1.0).is_err());
    }

    #[test]
    fn incomplete_gamma_is_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let x = i as f64 * 0.1;
            let v = upper_incomplete_gamma(1.7, x).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn lambert_branch_point_and_roundtrip() {
        assert_eq!(lambert_w_minus1(-INV_E).unwrap(), -1.0);
        for w in [-1.000_001, -1.1, -2.0, -5.0, -20.0, -300.0] {
            let x = w * f64::exp(w);
            let back = lambert_w_minus1(x).unwrap();
            // W has a square-root singularity at -1/e, so only the residual is sharp there.
            let tol = if w > -1.01 { 1e-8 } else { 1e-12 * w.abs() };
            assert!((back - w).abs() < tol, "{w} -> {back}");
            assert!((back * back.exp() - x).abs() <= 4.0 * f64::EPSILON * x.abs());
        }
    }

    #[test]
    fn lambert_rejects_outside_branch() {
        assert!(lambert_w_minus1(0.0).is_err());
        assert!(lambert_w_minus1(0.1).is_err());
        assert!(lambert_w_minus1(-0.5).is_err());
    }

    #[test]
    fn analytic_lpp_identity_case() {
        for i in 0..100 {
            let p = i as f64 / 100.0;
            let v = analytic_lpp_weibull_exp(1.0, 1.0, p).unwrap();
            assert!((v - p).abs() < 1e-9, "p={p} v={v}");
        }
        assert_eq!(analytic_lpp_weibull_exp(2.0, 1.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn analytic_lpp_at_one_uses_mean() {
        // mean of W(2, 1.5) is 1.5·Γ(1.5) > 1, so the curve ends at 1
        assert_eq!(analytic_lpp_weibull_exp(2.0, 1.5, 1.0).unwrap(), 1.0);
        let v = analytic_lpp_weibull_exp(2.0, 0.8, 1.0).unwrap();
        assert!(v < 1.0 && v > 0.0);
    }
}
