//! Exact evaluation of failure probability (DFT) and reliability (DRBD).
//!
//! Components are assumed independent. Gates are evaluated bottom-up:
//!
//! - OR / series: `1 - prod(1 - F_i)` in failure terms, `prod(R_i)` in
//!   reliability terms;
//! - AND / parallel: `prod(F_i)` and `1 - prod(1 - R_i)` respectively;
//! - warm spares through [`wsp_fail_prob`].

use crate::dist::{check_time, DistributionKind, DormancyFactor, FailureDistribution};
use crate::error::{Error, Result};
use crate::model::{validate, DftNode, DrbdNode, Model};

/// Lifetime laws of a warm-spare pair: the main switch, the spare once
/// active, and the spare while dormant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WspParams {
    main: FailureDistribution,
    active: FailureDistribution,
    dormant: FailureDistribution,
}

impl WspParams {
    pub fn new(main: FailureDistribution, active: FailureDistribution, dormant: FailureDistribution) -> Self {
        Self { main, active, dormant }
    }

    /// Exponential main, active and dormant laws given by their rates.
    pub fn exponential(lambda_main: f64, lambda_active: f64, lambda_dormant: f64) -> Result<Self> {
        Ok(Self::new(
            FailureDistribution::exponential(lambda_main)?,
            FailureDistribution::exponential(lambda_active)?,
            FailureDistribution::exponential(lambda_dormant)?,
        ))
    }

    /// Dormant law derived from the active one: `lambda_dormant = alpha * lambda_active`.
    pub fn with_dormancy(main: FailureDistribution, active: FailureDistribution, alpha: DormancyFactor) -> Self {
        Self::new(main, active, active.scaled(alpha))
    }

    pub fn main(&self) -> &FailureDistribution {
        &self.main
    }

    pub fn active(&self) -> &FailureDistribution {
        &self.active
    }

    pub fn dormant(&self) -> &FailureDistribution {
        &self.dormant
    }

    fn all_exponential(&self) -> bool {
        [self.main, self.active, self.dormant]
            .iter()
            .all(|d| d.kind() == DistributionKind::Exponential)
    }
}

/// Below this magnitude of `lambda_main + lambda_dormant - lambda_active`
/// the closed form switches to its limit.
const DEGENERATE_RATE_GAP: f64 = 1e-12;

/// Absolute tolerance of the adaptive Simpson rule.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// Failure probability of a warm-spare gate at time `t`.
///
/// The spare may fail while dormant; if it is still alive when the main
/// fails at time `y`, it takes over and lives a fresh active lifetime:
///
/// ```text
/// F(t) = ∫₀ᵗ f_main(y) · [F_dormant(y) + (1 − F_dormant(y)) · F_active(t − y)] dy
/// ```
///
/// Exponential laws use the closed form, anything else adaptive quadrature.
pub fn wsp_fail_prob(params: &WspParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(wsp_unchecked(params, t))
}

fn wsp_unchecked(params: &WspParams, t: f64) -> f64 {
    if params.all_exponential() {
        closed_form(params, t)
    } else {
        quadrature(params, t)
    }
}

/// Closed form of [`wsp_fail_prob`] for exponential laws:
/// `(1 − e^{−λt}) − λ e^{−λₐt} (1 − e^{−ct}) / c` with `c = λ + λ_d − λₐ`.
pub fn wsp_fail_prob_closed_form(params: &WspParams, t: f64) -> Result<f64> {
    check_time(t)?;
    if !params.all_exponential() {
        return Err(Error::Domain("closed form requires exponential laws".into()));
    }
    Ok(closed_form(params, t))
}

/// [`wsp_fail_prob`] by adaptive Simpson quadrature of the defining
/// integral, whatever the laws.
pub fn wsp_fail_prob_quadrature(params: &WspParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(quadrature(params, t))
}

fn closed_form(params: &WspParams, t: f64) -> f64 {
    let lm = params.main.rate();
    let la = params.active.rate();
    let ld = params.dormant.rate();
    let gap = lm + ld - la;
    let window = if gap.abs() < DEGENERATE_RATE_GAP {
        t
    } else {
        -(-gap * t).exp_m1() / gap
    };
    let main_failed = -(-lm * t).exp_m1();
    (main_failed - lm * (-la * t).exp() * window).clamp(0.0, main_failed)
}

fn quadrature(params: &WspParams, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let integrand = |y: f64| {
        let fd = params.dormant.cdf_unchecked(y);
        let fa = params.active.cdf_unchecked((t - y).max(0.0));
        params.main.pdf_unchecked(y) * (fd + (1.0 - fd) * fa)
    };
    adaptive_simpson(&integrand, 0.0, t, QUADRATURE_TOLERANCE).clamp(0.0, 1.0)
}

const SIMPSON_MAX_DEPTH: u32 = 40;

pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // stop once the estimate is below the tolerance or at rounding level
    if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= f64::EPSILON * (left + right).abs() {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Probability that the top event of `node` has occurred by time `t`.
pub fn prob_fail(node: &DftNode, t: f64) -> Result<f64> {
    check_time(t)?;
    validate(node).into_result()?;
    Ok(fail_prob_unchecked(node, t))
}

/// Probability that the block diagram still works at time `t`.
pub fn reliability(node: &DrbdNode, t: f64) -> Result<f64> {
    check_time(t)?;
    validate(node).into_result()?;
    Ok(reliability_unchecked(node, t))
}

pub(crate) fn fail_prob_unchecked(node: &DftNode, t: f64) -> f64 {
    match node {
        DftNode::BasicEvent { dist, .. } => dist.cdf_unchecked(t),
        DftNode::Wsp { params, .. } => wsp_unchecked(params, t),
        DftNode::Or(children) => {
            1.0 - children
                .iter()
                .map(|c| 1.0 - fail_prob_unchecked(c, t))
                .product::<f64>()
        }
        DftNode::And(children) => children.iter().map(|c| fail_prob_unchecked(c, t)).product(),
    }
}

pub(crate) fn reliability_unchecked(node: &DrbdNode, t: f64) -> f64 {
    match node {
        DrbdNode::Block { dist, .. } => 1.0 - dist.cdf_unchecked(t),
        DrbdNode::Wsp { params, .. } => 1.0 - wsp_unchecked(params, t),
        DrbdNode::Series(children) => children.iter().map(|c| reliability_unchecked(c, t)).product(),
        DrbdNode::Parallel(children) => {
            1.0 - children
                .iter()
                .map(|c| 1.0 - reliability_unchecked(c, t))
                .product::<f64>()
        }
    }
}

impl Model {
    /// Failure probability for a DFT, reliability for a DRBD.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        match self {
            Model::Dft(n) => prob_fail(n, t),
            Model::Drbd(n) => reliability(n, t),
        }
    }

    pub(crate) fn evaluate_unchecked(&self, t: f64) -> f64 {
        match self {
            Model::Dft(n) => fail_prob_unchecked(n, t),
            Model::Drbd(n) => reliability_unchecked(n, t),
        }
    }
}

/// Probability as a function of time, sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }
}

/// Checks that `grid` is nonempty, nonnegative and strictly increasing.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("time grid is empty".into()));
    }
    for &t in grid {
        check_time(t)?;
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!(
            "time grid must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// `points` equally spaced instants from `start` to `end`, both included.
pub fn linear_grid(start: f64, end: f64, points: usize) -> Result<Vec<f64>> {
    check_time(start)?;
    if !(end.is_finite() && end > start) {
        return Err(Error::Domain(format!("grid end {end} must exceed start {start}")));
    }
    if points < 2 {
        return Err(Error::Domain("a grid needs at least 2 points".into()));
    }
    let step = (end - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { end } else { start + step * i as f64 })
        .collect())
}

/// Evaluates `model` at every instant of `grid`.
pub fn eval_curve(model: &Model, grid: &[f64]) -> Result<Curve> {
    check_grid(grid)?;
    model.validate().into_result()?;
    Ok(Curve {
        points: grid.iter().map(|&t| (t, model.evaluate_unchecked(t))).collect(),
    })
}
