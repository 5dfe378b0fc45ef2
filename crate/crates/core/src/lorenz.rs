//! Empirical unscaled Lorenz curves, their inverses and the Lorenz P-P plot.
//!
//! Two estimators of the LPP are provided. The step estimator composes the
//! step inverse of the Y-sample Lorenz curve with the step Lorenz curve of the
//! X-sample; it lives on the grid `k/n` and takes values in `{j/m}`. The linear
//! estimator composes the piecewise-linear curves and is continuous.
//!
//! On the grid, the step LPP at node `k/n` is `v_k = #{j >= 1 : t_j <= s_k} / m`
//! where `s_k` and `t_j` are the cumulative means of the sorted X and Y
//! samples. Between nodes, `t ∈ ((k-1)/n, k/n)` evaluates to `v_k`, which is
//! what `⌊nt⌋ + 1` cumulative summands give.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Monotone transform applied to observations before the Lorenz curves are built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Identity,
    /// `x ↦ x^θ + shift`, evaluated on the log scale so large `θ` cannot overflow.
    Power {
        theta: f64,
        shift: f64,
    },
}

impl Transform {
    pub fn from_theta(theta: Option<f64>) -> Result<Self> {
        match theta {
            None => Ok(Transform::Identity),
            Some(t) if !(t > 0.0) || !t.is_finite() => Err(Error::InvalidParameter(format!(
                "theta must be positive, got {t}"
            ))),
            Some(1.0) => Ok(Transform::Identity),
            Some(t) => Ok(Transform::Power {
                theta: t,
                shift: 0.0,
            }),
        }
    }
}

#[inline]
fn log_add(acc: f64, a: f64) -> f64 {
    if acc == f64::NEG_INFINITY {
        return a;
    }
    if a == f64::NEG_INFINITY {
        return acc;
    }
    let (hi, lo) = if acc >= a { (acc, a) } else { (a, acc) };
    hi + (lo - hi).exp().ln_1p()
}

/// Cumulative means `s_1..s_n` of sorted observations, on a monotone scale.
///
/// With [`Transform::Identity`] these are the plain cumulative means; with a
/// power transform they are `ln((1/n) Σ_{i<=k} (x_(i)^θ + shift))`. Either way the
/// ordering between two such sequences is the ordering of the true levels,
/// which is all the step LPP needs.
pub(crate) fn cumulative_levels(sorted: &[f64], transform: Transform, out: &mut Vec<f64>) {
    out.clear();
    out.reserve(sorted.len());
    let n = sorted.len() as f64;
    match transform {
        Transform::Identity => {
            let mut acc = 0.0;
            for &v in sorted {
                acc += v;
                out.push(acc / n);
            }
        }
        Transform::Power { theta, shift } => {
            let ln_n = n.ln();
            let ln_shift = shift.ln();
            let mut acc = f64::NEG_INFINITY;
            for &v in sorted {
                acc = log_add(acc, log_add(theta * v.ln(), ln_shift));
                out.push(acc - ln_n);
            }
        }
    }
}

/// Step LPP counts `#{j : t_j <= s_k}` by a merge of two ascending sequences.
pub(crate) fn lpp_counts(x_levels: &[f64], y_levels: &[f64], out: &mut Vec<u32>) {
    out.clear();
    out.reserve(x_levels.len());
    let mut j = 0usize;
    for &s in x_levels {
        while j < y_levels.len() && y_levels[j] <= s {
            j += 1;
        }
        out.push(j as u32);
    }
}

/// Empirical unscaled Lorenz curve, stored by its nodes `(k/n, s_k)`, `s_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorenzCurve {
    nodes: Vec<f64>,
}

impl LorenzCurve {
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `s_0..s_n`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// The sample mean, i.e. `s_n`.
    pub fn mean(&self) -> f64 {
        *self.nodes.last().expect("non-empty")
    }

    /// Piecewise-linear value at `p`; `+∞` beyond 1.
    pub fn eval(&self, p: f64) -> f64 {
        if p > 1.0 {
            return f64::INFINITY;
        }
        if p <= 0.0 {
            return 0.0;
        }
        let n = self.n();
        let pos = p * n as f64;
        let k = (pos.floor() as usize).min(n - 1);
        let frac = pos - k as f64;
        self.nodes[k] + frac * (self.nodes[k + 1] - self.nodes[k])
    }

    /// Step version: `⌊np⌋ + 1` summands on `[0, 1)`, the mean at 1, `+∞` beyond.
    pub fn step_eval(&self, p: f64) -> f64 {
        if p > 1.0 {
            return f64::INFINITY;
        }
        if p == 1.0 {
            return self.mean();
        }
        let n = self.n();
        let k = ((p.max(0.0) * n as f64).floor() as usize + 1).min(n);
        self.nodes[k]
    }

    /// Piecewise-linear generalized inverse `inf{u : L(u) > y}`, equal to 1 for `y >= mean`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y >= self.mean() {
            return 1.0;
        }
        if y < 0.0 {
            return 0.0;
        }
        let n = self.n();
        // largest k with s_k <= y; k < n because y < s_n
        let k = self.nodes.partition_point(|&s| s <= y) - 1;
        let (lo, hi) = (self.nodes[k], self.nodes[k + 1]);
        (k as f64 + (y - lo) / (hi - lo)) / n as f64
    }
}

pub fn empirical_lorenz(x: &Sample) -> LorenzCurve {
    let mut levels = Vec::new();
    cumulative_levels(x.sorted(), Transform::Identity, &mut levels);
    let mut nodes = Vec::with_capacity(levels.len() + 1);
    nodes.push(0.0);
    nodes.extend(levels);
    LorenzCurve { nodes }
}

/// Step inverse of the Y-sample Lorenz curve, `inf{u : L̃(u) > t}`.
///
/// With breakpoints `t_j`, the value at level `t` is `#{j >= 1 : t_j <= t} / m`:
/// 0 on `[0, t_1)`, `j/m` on `[t_j, t_{j+1})` and 1 from the mean on.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLorenzInverse {
    breakpoints: Vec<f64>,
}

impl StepLorenzInverse {
    pub fn m(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// `t_0 = 0, t_1, ..., t_m`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.count(t) as f64 / self.m() as f64
    }

    fn count(&self, t: f64) -> usize {
        self.breakpoints[1..].partition_point(|&b| b <= t)
    }
}

pub fn step_lorenz_inverse(y: &Sample) -> StepLorenzInverse {
    let curve = empirical_lorenz(y);
    StepLorenzInverse {
        breakpoints: curve.nodes,
    }
}

/// The step Lorenz P-P plot on the grid `k/n`, `k = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LppCurve {
    m: usize,
    counts: Vec<u32>,
    nu: f64,
}

impl LppCurve {
    pub(crate) fn from_counts(m: usize, counts: Vec<u32>, nu: f64) -> Self {
        Self { m, counts, nu }
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Numerators `j` of the values `v_k = j/m`.
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// `v_k` for `k = 1..n`.
    pub fn values(&self) -> Vec<f64> {
        let m = self.m as f64;
        self.counts.iter().map(|&c| c as f64 / m).collect()
    }

    pub fn value(&self, k: usize) -> f64 {
        self.counts[k - 1] as f64 / self.m as f64
    }

    /// `ν_n = 1 ∧ L_{F_n}^{-1}(mean of Y)`: beyond it the curve is identically 1.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Value at any `t ∈ [0, 1]`: `v_k` on `((k-1)/n, k/n]`, and `v_1` at 0.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.n();
        let k = ((t * n as f64).ceil() as usize).clamp(1, n);
        self.value(k)
    }

    /// `(k/n, v_k)` for `k = 0..n`, starting from the origin.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.n() as f64;
        std::iter::once((0.0, 0.0))
            .chain((1..=self.n()).map(|k| (k as f64 / n, self.value(k))))
            .collect()
    }

    /// Two-column CSV `p,value` of [`points`](Self::points).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,value\n");
        for (p, v) in self.points() {
            let _ = writeln!(s, "{p},{v}");
        }
        s
    }
}

/// Linear inverse of a Lorenz curve evaluated at the mean of another, on a level scale.
fn nu_from_levels(x_levels: &[f64], target: f64, transform: Transform) -> f64 {
    let n = x_levels.len();
    let k = x_levels.partition_point(|&s| s <= target);
    if k == n {
        return 1.0;
    }
    let frac = match transform {
        Transform::Identity => {
            let lo = if k == 0 { 0.0 } else { x_levels[k - 1] };
            (target - lo) / (x_levels[k] - lo)
        }
        Transform::Power { .. } => {
            let hi = x_levels[k];
            let lo = if k == 0 {
                0.0
            } else {
                (x_levels[k - 1] - hi).exp()
            };
            ((target - hi).exp() - lo) / (1.0 - lo)
        }
    };
    ((k as f64 + frac) / n as f64).min(1.0)
}

fn lpp_with_transform(x: &Sample, y: &Sample, transform: Transform) -> LppCurve {
    let mut xl = Vec::new();
    let mut yl = Vec::new();
    cumulative_levels(x.sorted(), transform, &mut xl);
    cumulative_levels(y.sorted(), transform, &mut yl);
    let mut counts = Vec::new();
    lpp_counts(&xl, &yl, &mut counts);
    let nu = nu_from_levels(&xl, *yl.last().expect("non-empty"), transform);
    LppCurve::from_counts(y.len(), counts, nu)
}

/// Step LPP `L̃_{G_m}^{-1} ∘ L̃_{F_n}` on the grid `k/n`.
pub fn lpp_step(x: &Sample, y: &Sample) -> LppCurve {
    lpp_with_transform(x, y, Transform::Identity)
}

/// Step LPP of the samples raised elementwise to the power `theta`.
///
/// `theta = 1` is exactly [`lpp_step`]. Other values work on the log scale,
/// so no rescaling is needed however large `theta` is.
pub fn generalized_lpp(x: &Sample, y: &Sample, theta: f64) -> Result<LppCurve> {
    let transform = Transform::from_theta(Some(theta))?;
    Ok(lpp_with_transform(x, y, transform))
}

/// Classic empirical P-P plot `G_m ∘ F_n^{-1}` on the grid `k/n`:
/// `v_k = #{j : Y_j <= X_(k)} / m`.
pub fn pp_plot(x: &Sample, y: &Sample) -> LppCurve {
    let mut counts = Vec::new();
    lpp_counts(x.sorted(), y.sorted(), &mut counts);
    // Limit of ν under growing θ: the share of X strictly below max(Y).
    let ymax = y.max();
    let below = x.sorted().partition_point(|&v| v < ymax);
    let nu = below as f64 / x.len() as f64;
    LppCurve::from_counts(y.len(), counts, if below == x.len() { 1.0 } else { nu })
}

/// The piecewise-linear LPP `L_{G_m}^{-1} ∘ L_{F_n}`.
#[derive(Debug, Clone)]
pub struct LinearLpp {
    lx: LorenzCurve,
    ly: LorenzCurve,
}

impl LinearLpp {
    pub fn new(x: &Sample, y: &Sample) -> Self {
        Self {
            lx: empirical_lorenz(x),
            ly: empirical_lorenz(y),
        }
    }

    pub fn eval(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        self.ly.inverse(self.lx.eval(p)).min(1.0)
    }
}

pub fn lpp_linear(x: &Sample, y: &Sample, p: f64) -> f64 {
    LinearLpp::new(x, y).eval(p)
}

/// Add `eps` to every observation of both samples.
pub fn shift_samples(x: &Sample, y: &Sample, eps: f64) -> Result<(Sample, Sample)> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "shift must be non-negative, got {eps}"
        )));
    }
    if eps == 0.0 {
        return Ok((x.clone(), y.clone()));
    }
    Ok((x.map(|v| v + eps)?, y.map(|v| v + eps)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn lorenz_nodes() {
        let l = empirical_lorenz(&s(&[3.0, 1.0, 2.0]));
        let want = [0.0, 1.0 / 3.0, 1.0, 2.0];
        for (a, b) in l.nodes().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((l.eval(0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(l.eval(1.5), f64::INFINITY);
    }

    #[test]
    fn lorenz_constant_sample_is_a_line() {
        let l = empirical_lorenz(&s(&[2.5; 8]));
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            assert!((l.eval(p) - 2.5 * p).abs() < 1e-12);
        }
    }

    #[test]
    fn lorenz_step_eval_uses_floor_plus_one() {
        let l = empirical_lorenz(&s(&[1.0, 2.0, 3.0]));
        assert_eq!(l.step_eval(0.0), l.nodes()[1]);
        assert_eq!(l.step_eval(0.5), l.nodes()[2]);
        assert_eq!(l.step_eval(1.0), 2.0);
        assert_eq!(l.step_eval(1.01), f64::INFINITY);
    }

    #[test]
    fn step_inverse_two_points() {
        let inv = step_lorenz_inverse(&s(&[2.0, 4.0]));
        assert_eq!(inv.eval(0.0), 0.0);
        assert_eq!(inv.eval(0.999), 0.0);
        assert_eq!(inv.eval(1.0), 0.5);
        assert_eq!(inv.eval(2.9), 0.5);
        assert_eq!(inv.eval(3.0), 1.0);
        assert_eq!(inv.eval(100.0), 1.0);
    }

    #[test]
    fn step_inverse_single_point() {
        let inv = step_lorenz_inverse(&s(&[1.0]));
        assert_eq!(inv.eval(0.5), 0.0);
        assert_eq!(inv.eval(1.0), 1.0);
    }

    #[test]
    fn lpp_step_examples() {
        assert_eq!(
            lpp_step(&s(&[1.0, 2.0, 3.0]), &s(&[2.0, 4.0])).values(),
            vec![0.0, 0.5, 0.5]
        );
        assert_eq!(
            lpp_step(&s(&[1.0, 4.0, 5.0]), &s(&[2.0, 3.0])).values(),
            vec![0.0, 0.5, 1.0]
        );
        let x = s(&[0.3, 1.7, 0.2, 5.0]);
        assert_eq!(lpp_step(&x, &x).values(), vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn lpp_interior_evaluation() {
        let c = lpp_step(&s(&[1.0, 2.0, 3.0]), &s(&[2.0, 4.0]));
        assert_eq!(c.value_at(1.0 / 6.0), 0.0);
        assert_eq!(c.value_at(0.5), 0.5);
        assert_eq!(c.value_at(1.0 / 3.0), 0.0);
        assert_eq!(c.value_at(5.0 / 6.0), 0.5);
    }

    #[test]
    fn nu_marks_where_curve_hits_one() {
        let c = lpp_step(&s(&[1.0, 4.0, 5.0]), &s(&[2.0, 3.0]));
        // L_{F_n}^{-1}(2.5): s = 1/3, 5/3, 10/3, so (2 + (2.5 - 5/3)/(5/3)) / 3
        let want = (2.0 + (2.5 - 5.0 / 3.0) / (5.0 / 3.0)) / 3.0;
        assert!((c.nu() - want).abs() < 1e-14);
        for k in 1..=c.n() {
            if (k as f64) / 3.0 > c.nu() {
                assert_eq!(c.value(k), 1.0);
            }
        }
        let same = lpp_step(&s(&[1.0, 2.0]), &s(&[1.0, 2.0]));
        assert_eq!(same.nu(), 1.0);
    }

    #[test]
    fn nu_log_scale_matches_linear_scale() {
        let x = s(&[0.5, 1.0, 4.0, 5.0]);
        let y = s(&[0.2, 2.0, 3.0]);
        let direct = lpp_step(&x.map(|v| v * v).unwrap(), &y.map(|v| v * v).unwrap());
        let logged = generalized_lpp(&x, &y, 2.0).unwrap();
        assert_eq!(direct.counts(), logged.counts());
        assert!((direct.nu() - logged.nu()).abs() < 1e-12);
    }

    #[test]
    fn linear_lpp_basics() {
        let x = s(&[1.0, 2.0, 3.0]);
        let y = s(&[2.0, 4.0]);
        assert_eq!(lpp_linear(&x, &y, 0.0), 0.0);
        for i in 0..=50 {
            let p = i as f64 / 50.0;
            assert!((lpp_linear(&x, &x, p) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_theta_one_is_plain() {
        let x = s(&[1.0, 4.0, 5.0]);
        let y = s(&[2.0, 3.0]);
        assert_eq!(generalized_lpp(&x, &y, 1.0).unwrap(), lpp_step(&x, &y));
        assert_eq!(
            generalized_lpp(&x, &y, 10.0).unwrap().values(),
            vec![0.0, 1.0, 1.0]
        );
        assert!(generalized_lpp(&x, &y, 0.0).is_err());
    }

    #[test]
    fn pp_plot_examples() {
        let x = s(&[1.0, 4.0, 5.0]);
        assert_eq!(pp_plot(&x, &s(&[2.0, 3.0])).values(), vec![0.0, 1.0, 1.0]);
        assert_eq!(pp_plot(&x, &x).values(), vec![1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(pp_plot(&x, &s(&[6.0, 7.0])).values(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn shift() {
        let x = s(&[0.0, 1.0]);
        let y = s(&[2.0]);
        let (a, b) = shift_samples(&x, &y, 0.0).unwrap();
        assert_eq!((a, b), (x.clone(), y.clone()));
        let (a, b) = shift_samples(&x, &y, 1e-4).unwrap();
        assert_eq!(a.values(), &[1e-4, 1.0 + 1e-4]);
        assert!(b.min() > 0.0);
        assert!(shift_samples(&x, &y, -1.0).is_err());
    }

    #[test]
    fn csv_export() {
        let c = lpp_step(&s(&[1.0, 2.0]), &s(&[1.0, 2.0]));
        assert_eq!(c.to_csv(), "p,value\n0,0\n0.5,0.5\n1,1\n");
    }
}
