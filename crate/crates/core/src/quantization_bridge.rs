//! Bridges between real vectors, densities and lattice types.
//!
//! Covers nearest-point quantization onto `iΔ_α` / `jΔ_β`, the sandwich
//! between the exponent of the channel density on real vectors and on their
//! quantized versions, the drift of quadratic constraints under
//! quantization, the step-density realization of a joint type and the
//! reverse construction of a joint type from a Lipschitz conditional family
//! together with its explicit finite-n slack budget.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gauss_family::{make_rho_point, ChannelSpec, RhoPoint};
use crate::numeric::integrate;
use crate::type_system::{Axis, JointTypePmf, LatticeConfig, TypePmf};

/// Lattice index of each component: `⌊v/δ + ½⌋`.
///
/// Exact halves round up, so `−δ/2` maps to index 0 while `+δ/2` maps to 1.
pub fn quantize(v: &[f64], delta: f64) -> Vec<i64> {
    assert!(delta > 0.0, "quantizer step must be positive");
    v.iter().map(|&x| (x / delta + 0.5).floor() as i64).collect()
}

/// A real input/output pair together with its lattice indices.
#[derive(Debug, Clone)]
pub struct QuantizedPair {
    pub x_raw: Vec<f64>,
    pub y_raw: Vec<f64>,
    pub x_q: Vec<i64>,
    pub y_q: Vec<i64>,
    pub config: LatticeConfig,
}

impl QuantizedPair {
    pub fn new(x_raw: Vec<f64>, y_raw: Vec<f64>, config: LatticeConfig) -> Result<Self> {
        if x_raw.len() != y_raw.len() {
            return Err(Error::LengthMismatch { left: x_raw.len(), right: y_raw.len() });
        }
        let x_q = quantize(&x_raw, config.delta_alpha());
        let y_q = quantize(&y_raw, config.delta_beta());
        Ok(QuantizedPair { x_raw, y_raw, x_q, y_q, config })
    }

    pub fn len(&self) -> usize {
        self.x_raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_raw.is_empty()
    }

    /// Largest `|raw − index·δ|` over both vectors, each axis scaled by its own step.
    pub fn max_rounding_error(&self) -> (f64, f64) {
        let err = |raw: &[f64], q: &[i64], d: f64| {
            raw.iter()
                .zip(q)
                .map(|(&r, &i)| (r - i as f64 * d).abs())
                .fold(0.0, f64::max)
        };
        (
            err(&self.x_raw, &self.x_q, self.config.delta_alpha()),
            err(&self.y_raw, &self.y_q, self.config.delta_beta()),
        )
    }

    /// `(1/n)Σ(y_q δ_β − x_q δ_α)²`.
    pub fn quantized_mean_sq_diff(&self) -> f64 {
        let (da, db) = (self.config.delta_alpha(), self.config.delta_beta());
        mean_sq(self.x_q.iter().zip(&self.y_q).map(|(&i, &j)| j as f64 * db - i as f64 * da))
    }

    pub fn raw_mean_sq_diff(&self) -> f64 {
        mean_sq(self.x_raw.iter().zip(&self.y_raw).map(|(&x, &y)| y - x))
    }
}

fn mean_sq(d: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = d.len();
    d.map(|v| v * v).sum::<f64>() / n as f64
}

/// Joint empirical type of the quantized pair.
pub fn empirical_joint_type(pair: &QuantizedPair) -> Result<JointTypePmf> {
    JointTypePmf::from_sequences(&pair.x_q, &pair.y_q)
}

/// The four numbers of the density-exponent sandwich.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SandwichValues {
    /// `−(1/n) log_b w(y|x)` on the raw vectors.
    pub raw_exponent: f64,
    /// The same on the lattice points.
    pub quantized_exponent: f64,
    pub lower: f64,
    pub upper: f64,
}

impl SandwichValues {
    pub fn holds(&self, tol: f64) -> bool {
        self.raw_exponent >= self.lower - tol && self.raw_exponent <= self.upper + tol
    }
}

fn density_exponent(channel: &ChannelSpec, mean_sq_diff: f64) -> f64 {
    let ln_b = channel.ln_base();
    (2.0 * PI * channel.sigma2).sqrt().ln() / ln_b + mean_sq_diff / (2.0 * channel.sigma2 * ln_b)
}

/// Checks that the channel-density exponent of `(x, y)` stays within
/// `(δ_α+δ_β)√c_xy / (2σ² ln b)` below and that plus `(δ_α+δ_β)²/(4·2σ² ln b)`
/// above the exponent of the quantized pair.
pub fn pdf_exponent_sandwich(pair: &QuantizedPair, channel: &ChannelSpec, c_xy: f64) -> Result<(bool, SandwichValues)> {
    if pair.is_empty() {
        return Err(Error::domain("empty vectors"));
    }
    let q_msd = pair.quantized_mean_sq_diff();
    if q_msd > c_xy {
        return Err(Error::ConstraintViolation {
            what: "quantized mean squared difference".into(),
            value: q_msd,
            limit: c_xy,
        });
    }
    let d = pair.config.delta_alpha() + pair.config.delta_beta();
    let scale = 2.0 * channel.sigma2 * channel.ln_base();
    let quantized_exponent = density_exponent(channel, q_msd);
    let values = SandwichValues {
        raw_exponent: density_exponent(channel, pair.raw_mean_sq_diff()),
        quantized_exponent,
        lower: quantized_exponent - d * c_xy.sqrt() / scale,
        upper: quantized_exponent + (d * c_xy.sqrt() + d * d / 4.0) / scale,
    };
    Ok((values.holds(1e-12), values))
}

/// Which quadratic constraint drifts under quantization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftKind {
    /// Power `E[X²]`, quantized with `Δ_α`.
    Power { alpha: f64 },
    /// `E[(Y − X)²]`, both components quantized.
    Joint { alpha: f64, beta: f64 },
}

impl DriftKind {
    fn step(&self, n: u64) -> f64 {
        let nf = n as f64;
        match *self {
            DriftKind::Power { alpha } => nf.powf(-alpha),
            DriftKind::Joint { alpha, beta } => nf.powf(-alpha) + nf.powf(-beta),
        }
    }
}

/// Worst-case increase `δ√c + δ²/4` of a quadratic average bounded by `c`
/// when every component moves by at most `δ/2`.
pub fn power_drift(kind: DriftKind, n: u64, c: f64) -> f64 {
    let d = kind.step(n);
    d * c.sqrt() + d * d / 4.0
}

/// Smallest `n` whose drift is at most `eps`.
pub fn power_drift_bound(kind: DriftKind, c: f64, eps: f64) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    if !(c >= 0.0) {
        return Err(Error::domain(format!("constraint level must be nonnegative, got {c}")));
    }
    let ok = |n: u64| power_drift(kind, n, c) <= eps;
    if ok(1) {
        return Ok(1);
    }
    let mut hi = 2u64;
    while !ok(hi) {
        if hi > u64::MAX / 4 {
            return Err(Error::domain("drift never reaches eps"));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Histogram-like conditional densities built from a joint type: row `x`
/// has value `P_{Y|X}(jΔ_β|x)/Δ_β` on `[(j−½)Δ_β, (j+½)Δ_β)`.
#[derive(Debug, Clone)]
pub struct StepFamily {
    pub config: LatticeConfig,
    joint: JointTypePmf,
    rows: BTreeMap<i64, Vec<(i64, f64)>>,
}

/// Step-density realization of a joint type.
pub fn type_to_pdf(joint: &JointTypePmf, config: &LatticeConfig) -> StepFamily {
    let px = joint.marginal(Axis::X);
    let mut rows: BTreeMap<i64, Vec<(i64, f64)>> = BTreeMap::new();
    for (&(i, j), &c) in joint.counts() {
        rows.entry(i).or_default().push((j, c as f64 / px.count(i) as f64));
    }
    StepFamily { config: *config, joint: joint.clone(), rows }
}

impl StepFamily {
    /// Conditional density at `y` given the input letter `iΔ_α`.
    pub fn density(&self, i: i64, y: f64) -> f64 {
        let db = self.config.delta_beta();
        let j = (y / db + 0.5).floor() as i64;
        self.rows
            .get(&i)
            .and_then(|row| row.iter().find(|&&(jj, _)| jj == j))
            .map_or(0.0, |&(_, p)| p / db)
    }

    pub fn row(&self, i: i64) -> Option<&[(i64, f64)]> {
        self.rows.get(&i).map(Vec::as_slice)
    }

    pub fn input(&self) -> TypePmf {
        self.joint.marginal(Axis::X)
    }

    /// Total mass of each row.
    pub fn row_masses(&self) -> Vec<f64> {
        self.rows.values().map(|r| r.iter().map(|&(_, p)| p).sum()).collect()
    }

    /// Largest density value over all rows.
    pub fn sup(&self) -> f64 {
        let db = self.config.delta_beta();
        self.rows
            .values()
            .flat_map(|r| r.iter().map(|&(_, p)| p / db))
            .fold(0.0, f64::max)
    }

    /// `h(Y) − h(Y|X)` in nats, from the differential entropies of the steps.
    pub fn mutual_info_nats(&self) -> f64 {
        let db = self.config.delta_beta();
        let px = self.input();
        let mut py: BTreeMap<i64, f64> = BTreeMap::new();
        let mut h_cond = 0.0;
        for (&i, row) in &self.rows {
            let w = px.prob(i);
            for &(j, p) in row {
                h_cond -= w * p * (p / db).ln();
                *py.entry(j).or_insert(0.0) += w * p;
            }
        }
        let h_y: f64 = -py.values().map(|&q| q * (q / db).ln()).sum::<f64>();
        h_y - h_cond
    }

    /// `E[(Y − X)²]` under `P_X` and the step rows.
    pub fn mean_sq_diff(&self) -> f64 {
        let (da, db) = (self.config.delta_alpha(), self.config.delta_beta());
        let px = self.input();
        self.rows
            .iter()
            .map(|(&i, row)| {
                let x = i as f64 * da;
                let inner: f64 = row
                    .iter()
                    .map(|&(j, p)| {
                        let d = j as f64 * db - x;
                        p * (d * d + db * db / 12.0)
                    })
                    .sum();
                px.prob(i) * inner
            })
            .sum()
    }
}

/// A family of conditional densities `p(·|x)` with a common Lipschitz constant.
pub trait ConditionalFamily: Sync {
    fn density(&self, x: f64, y: f64) -> f64;

    /// Lipschitz constant in `y`, uniform over `x`.
    fn lipschitz(&self) -> f64;

    /// Interval carrying all but a negligible tail of `p(·|x)`.
    fn window(&self, x: f64) -> (f64, f64);

    /// `inf_{y ∈ [lo, hi]} p(y|x)`; the default uses only the Lipschitz bound.
    fn cell_infimum(&self, x: f64, lo: f64, hi: f64) -> f64 {
        let mid = 0.5 * (lo + hi);
        (self.density(x, mid) - self.lipschitz() * (hi - lo) / 2.0).max(0.0)
    }

    /// `∫ p log p dy` in nats.
    fn neg_entropy_nats(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.window(x);
        let f = |y: f64| {
            let p = self.density(x, y);
            if p > 0.0 {
                p * p.ln()
            } else {
                0.0
            }
        };
        Ok(integrate(f, lo, hi, 1e-12)?.value)
    }

    /// `∫ p(y|x)(y − x)² dy`.
    fn mean_sq_diff(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.window(x);
        Ok(integrate(|y| self.density(x, y) * (y - x) * (y - x), lo, hi, 1e-12)?.value)
    }
}

/// Rows `N(slope·x, variance)`, e.g. one member of the ρ-family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianRows {
    pub slope: f64,
    pub variance: f64,
}

impl GaussianRows {
    pub fn new(slope: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite() && slope.is_finite()) {
            return Err(Error::domain(format!("need finite slope and positive variance, got ({slope}, {variance})")));
        }
        Ok(GaussianRows { slope, variance })
    }

    pub fn from_rho_point(point: &RhoPoint) -> Self {
        GaussianRows { slope: point.k_rho, variance: point.sigma2_yx }
    }
}

impl ConditionalFamily for GaussianRows {
    fn density(&self, x: f64, y: f64) -> f64 {
        let d = y - self.slope * x;
        (-d * d / (2.0 * self.variance)).exp() / (2.0 * PI * self.variance).sqrt()
    }

    fn lipschitz(&self) -> f64 {
        1.0 / (self.variance * (2.0 * PI * E).sqrt())
    }

    fn window(&self, x: f64) -> (f64, f64) {
        let m = self.slope * x;
        let w = 12.0 * self.variance.sqrt();
        (m - w, m + w)
    }

    // Unimodal: the infimum over an interval sits at one of its ends.
    fn cell_infimum(&self, x: f64, lo: f64, hi: f64) -> f64 {
        self.density(x, lo).min(self.density(x, hi))
    }

    fn neg_entropy_nats(&self, _x: f64) -> Result<f64> {
        Ok(-0.5 * (2.0 * PI * E * self.variance).ln())
    }

    fn mean_sq_diff(&self, x: f64) -> Result<f64> {
        let d = (self.slope - 1.0) * x;
        Ok(d * d + self.variance)
    }
}

/// Moment bounds assumed of the input type and the conditional family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentBudget {
    pub c_x: f64,
    pub c_y: f64,
    pub c_xy: f64,
}

impl MomentBudget {
    /// `c_Y = (√c_X + √c_XY)²` bounds `E[Y²]` by the triangle inequality.
    pub fn from_x_and_xy(c_x: f64, c_xy: f64) -> Self {
        let s = c_x.sqrt() + c_xy.sqrt();
        MomentBudget { c_x, c_y: s * s, c_xy }
    }
}

/// Exponents `δ = min{β,1−β} − α` and `δ₁ = min{β,1−β} − (1+2α)/3`.
pub fn slack_exponents(alpha: f64, beta: f64) -> (f64, f64) {
    let m = beta.min(1.0 - beta);
    (m - alpha, m - (1.0 + 2.0 * alpha) / 3.0)
}

/// Rejects `(α, β)` outside `α ∈ (0, ¼)`, `⅓ + ⅔α < β < ⅔ − ⅔α`.
pub fn check_region(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.25) {
        return Err(Error::HypothesisViolation(format!(
            "alpha = {alpha} outside (0, 1/4); delta1 = {} <= 0",
            slack_exponents(alpha, beta).1
        )));
    }
    let lo = 1.0 / 3.0 + 2.0 * alpha / 3.0;
    let hi = 2.0 / 3.0 - 2.0 * alpha / 3.0;
    if !(beta > lo && beta < hi) {
        return Err(Error::HypothesisViolation(format!(
            "beta = {beta} outside ({lo}, {hi}) for alpha = {alpha}; delta1 = {} <= 0",
            slack_exponents(alpha, beta).1
        )));
    }
    Ok(())
}

/// Explicit finite-n quantities that replace vanishing terms in the
/// density-to-type inequalities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlackBudget {
    pub n: u64,
    pub lipschitz: f64,
    pub delta_exp: f64,
    pub delta1_exp: f64,
    /// Pointwise gap between the joint density and its quantized version.
    pub h: f64,
    /// Pointwise gap between the output marginals.
    pub h_tilde: f64,
    pub c1_app: f64,
    pub c1_tilde: f64,
    pub p1_bound: f64,
    pub putting: f64,
    pub second_term2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub discrete_entropy: f64,
    pub discrete_marg: f64,
    /// `h ≤ 1/(c₁e)²`, `h ≤ 1/e`, `h̃ ≤ 1/e` and `n > 2`.
    pub preconditions_met: bool,
    /// Smallest block length at which every precondition holds.
    pub n_min: f64,
}

impl SlackBudget {
    pub fn new(config: &LatticeConfig, lipschitz: f64, moments: &MomentBudget) -> Result<Self> {
        check_region(config.alpha, config.beta)?;
        let (delta_exp, delta1_exp) = slack_exponents(config.alpha, config.beta);
        let n = config.n;
        let nf = n as f64;
        let ln_b = |v: f64| v.ln();
        let k1 = lipschitz + 1.0;
        let cx_root = (12.0 * moments.c_x + 1.0).cbrt();
        let h = k1 * nf.powf(-delta_exp);
        let h_tilde = k1 * cx_root * nf.powf(-delta1_exp);
        let c1 = (2.0 * PI * (moments.c_x + moments.c_y + 1.0 / 12.0)).sqrt();
        let c1_tilde = (12.0 * moments.c_y).cbrt();
        let sqrt_h = h.sqrt();
        let db = config.delta_beta();

        let h_cap = (1.0 / (c1 * E)).powi(2).min(1.0 / E);
        let n_h = (k1 / h_cap).powf(1.0 / delta_exp);
        let n_ht = (k1 * cx_root * E).powf(1.0 / delta1_exp);
        let n_min = n_h.max(n_ht).max(3.0);
        let preconditions_met = h <= h_cap && h_tilde <= 1.0 / E && n > 2;

        // Values are carried in nats here and converted by the caller's base.
        Ok(SlackBudget {
            n,
            lipschitz,
            delta_exp,
            delta1_exp,
            h,
            h_tilde,
            c1_app: c1,
            c1_tilde,
            p1_bound: 2.0 * c1 * sqrt_h,
            putting: 2.0 * c1 * sqrt_h * ln_b(E.sqrt() / h),
            second_term2: c1_tilde * h_tilde.powf(2.0 / 3.0) * ln_b(1.0 / h_tilde).max(ln_b(E * lipschitz.sqrt())),
            lhs: db * db + db * moments.c_xy.sqrt(),
            rhs: c1 * sqrt_h * db * db / 2.0,
            discrete_entropy: 4.0 * c1 * sqrt_h * ln_b(nf),
            discrete_marg: 2.0 * c1 * sqrt_h * ln_b(nf),
            preconditions_met,
            n_min,
        })
    }
}

/// One checked inequality: `pass` means `lhs ≥ rhs − slack` for lower
/// bounds and `lhs ≤ rhs + slack` for upper bounds.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityRow {
    pub instance: usize,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub rows: Vec<InequalityRow>,
}

pub const INEQUALITY_CSV_HEADER: &str = "instance,check,lhs,rhs,slack,pass";

impl InequalityReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(INEQUALITY_CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{:.16e},{:.16e},{:.16e},{}", r.instance, r.check, r.lhs, r.rhs, r.slack, r.pass);
        }
        s
    }

    pub fn merge(reports: impl IntoIterator<Item = InequalityReport>) -> Self {
        InequalityReport { rows: reports.into_iter().flat_map(|r| r.rows).collect() }
    }
}

/// Output of the density-to-type construction.
#[derive(Debug, Clone)]
pub struct PdfToType {
    pub joint: JointTypePmf,
    pub budget: SlackBudget,
    pub report: InequalityReport,
    /// Probability lost by flooring before the diagonal complement.
    pub p1: f64,
}

/// Builds a joint type with x-marginal exactly `p_x` from the conditional
/// family: the joint density is replaced by its infimum over each output
/// cell, floored to multiples of `Δ_γ` (so every cell holds whole counts out
/// of `n`), and each row's deficit is put on the cell `y = Q_β(x)`.
///
/// The report compares both sides of the conditional-entropy, quadratic
/// and marginal-entropy inequalities against the explicit slack budget.
/// With `enforce` set, block lengths below the budget's validity range are
/// rejected; otherwise the budget records the failed preconditions.
pub fn pdf_to_type<F: ConditionalFamily>(
    p_x: &TypePmf,
    cond: &F,
    config: &LatticeConfig,
    moments: &MomentBudget,
    base: f64,
    instance: usize,
    enforce: bool,
) -> Result<PdfToType> {
    if p_x.axis != Axis::X || p_x.n != config.n {
        return Err(Error::domain("input type must be an X type with the configured n"));
    }
    let budget = SlackBudget::new(config, cond.lipschitz(), moments)?;
    if enforce && !budget.preconditions_met {
        return Err(Error::SlackPrecondition { n: config.n, n_min: budget.n_min });
    }
    let (da, db) = (config.delta_alpha(), config.delta_beta());
    let nf = config.n as f64;
    let ln_b = base.ln();

    let mut counts: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    let mut lost = 0u64;
    for (&i, &row_total) in p_x.counts() {
        let x = i as f64 * da;
        let (lo, hi) = cond.window(x);
        let (j_lo, j_hi) = ((lo / db + 0.5).floor() as i64, (hi / db + 0.5).floor() as i64);
        let mut used = 0u64;
        for j in j_lo..=j_hi {
            let y = j as f64 * db;
            let inf = cond.cell_infimum(x, y - db / 2.0, y + db / 2.0);
            // p^inf/Δ_γ with p^inf = P_X(x)/Δ_α · inf and Δ_αΔ_βΔ_γ = 1/n.
            let c = (row_total as f64 * inf * db).floor() as u64;
            if c > 0 {
                counts.insert((i, j), c);
                used += c;
            }
        }
        if used > row_total {
            return Err(Error::Numerical {
                what: format!("quantized row {i} exceeds its input count"),
                residual: (used - row_total) as f64,
            });
        }
        let deficit = row_total - used;
        if deficit > 0 {
            let diag = (x / db + 0.5).floor() as i64;
            *counts.entry((i, diag)).or_insert(0) += deficit;
            lost += deficit;
        }
    }
    let joint = JointTypePmf::new(config.n, counts)?;
    let p1 = lost as f64 / nf;

    // Continuous sides.
    let mut cond_ent = 0.0;
    let mut quad = 0.0;
    for &i in p_x.counts().keys() {
        let x = i as f64 * da;
        let w = p_x.prob(i);
        cond_ent += w * cond.neg_entropy_nats(x)?;
        quad += w * cond.mean_sq_diff(x)?;
    }
    let atoms: Vec<(f64, f64)> = p_x.counts().keys().map(|&i| (i as f64 * da, p_x.prob(i))).collect();
    let (y_lo, y_hi) = atoms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(x, _)| {
        let (l, h) = cond.window(x);
        (a.min(l), b.max(h))
    });
    let p_y = |y: f64| atoms.iter().map(|&(x, w)| w * cond.density(x, y)).sum::<f64>();
    let marg_ent = integrate(
        |y| {
            let p = p_y(y);
            if p > 0.0 {
                p * p.ln()
            } else {
                0.0
            }
        },
        y_lo,
        y_hi,
        1e-10,
    )?
    .value;

    // Discrete sides.
    let px_t = joint.marginal(Axis::X);
    let py_t = joint.marginal(Axis::Y);
    let mut disc_cond = 0.0;
    for (&(i, _), &c) in joint.counts() {
        let p = c as f64 / nf;
        let p_cond = c as f64 / px_t.count(i) as f64;
        disc_cond += p * (p_cond / db).ln();
    }
    let disc_quad = joint.mean_sq_diff(config);
    let disc_marg: f64 = py_t
        .counts()
        .values()
        .map(|&c| {
            let p = c as f64 / nf;
            p * (p / db).ln()
        })
        .sum();

    let rows = vec![
        InequalityRow {
            instance,
            check: "cond_entropy".into(),
            lhs: cond_ent / ln_b,
            rhs: disc_cond / ln_b,
            slack: (budget.putting + budget.discrete_entropy) / ln_b,
            pass: false,
        },
        InequalityRow {
            instance,
            check: "log_gaussian".into(),
            lhs: quad,
            rhs: disc_quad,
            slack: budget.lhs + budget.rhs,
            pass: false,
        },
        InequalityRow {
            instance,
            check: "marg_entropy".into(),
            lhs: marg_ent / ln_b,
            rhs: disc_marg / ln_b,
            slack: (budget.second_term2 + budget.discrete_marg) / ln_b,
            pass: false,
        },
        InequalityRow {
            instance,
            check: "prob_loss".into(),
            lhs: p1,
            rhs: budget.p1_bound,
            slack: 0.0,
            pass: false,
        },
    ]
    .into_iter()
    .map(|mut r| {
        r.pass = match r.check.as_str() {
            "cond_entropy" | "log_gaussian" => r.lhs >= r.rhs - r.slack,
            _ => r.lhs <= r.rhs + r.slack,
        };
        r
    })
    .collect();

    Ok(PdfToType { joint, budget, report: InequalityReport { rows }, p1 })
}

/// A seeded random instance: an input type from quantized Gaussian samples
/// and one ρ-family member as the conditional family.
#[derive(Debug, Clone)]
pub struct BridgeInstance {
    pub rho: f64,
    pub p_x: TypePmf,
    pub rows: GaussianRows,
    pub moments: MomentBudget,
}

/// Instance `index` of the stream keyed by `seed`.
pub fn random_instance(config: &LatticeConfig, channel: &ChannelSpec, seed: u64, index: u64) -> Result<BridgeInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let rho: f64 = rng.random_range(-0.5..2.0);
    let spread: f64 = rng.random_range(0.25..1.0);
    let normal = Normal::new(0.0, (channel.s2 * spread).sqrt()).map_err(|e| Error::domain(e.to_string()))?;
    let xs: Vec<f64> = (0..config.n).map(|_| normal.sample(&mut rng)).collect();
    let p_x = TypePmf::from_sequence(Axis::X, &quantize(&xs, config.delta_alpha()))?;
    let point = make_rho_point(channel, rho)?;
    let rows = GaussianRows::from_rho_point(&point);
    let c_x = p_x.second_moment(config);
    let da = config.delta_alpha();
    let mut c_xy = 0.0;
    for &i in p_x.counts().keys() {
        c_xy += p_x.prob(i) * rows.mean_sq_diff(i as f64 * da)?;
    }
    Ok(BridgeInstance { rho, p_x, rows, moments: MomentBudget::from_x_and_xy(c_x, c_xy) })
}

/// Runs the density-to-type audit on `count` seeded instances in parallel;
/// the merged report is ordered by instance.
pub fn bridge_audit(
    config: &LatticeConfig,
    channel: &ChannelSpec,
    seed: u64,
    count: usize,
) -> Result<(InequalityReport, Vec<SlackBudget>)> {
    check_region(config.alpha, config.beta)?;
    let results: Vec<Result<PdfToType>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let inst = random_instance(config, channel, seed, k as u64)?;
            pdf_to_type(&inst.p_x, &inst.rows, config, &inst.moments, channel.log_base, k, false)
        })
        .collect();
    let mut reports = Vec::with_capacity(count);
    let mut budgets = Vec::with_capacity(count);
    for r in results {
        let r = r?;
        reports.push(r.report);
        budgets.push(r.budget);
    }
    Ok((InequalityReport::merge(reports), budgets))
}

/// Outcome of the `x ln x` increment bounds.
#[derive(Debug, Clone, Copy)]
pub struct XlogxCheck {
    pub lower: f64,
    pub difference: f64,
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Checks `t ln t ≤ f(t₁+t) − f(t₁) ≤ t ln max{1/t, (t₁+t)e}` for `f(x) = x ln x`.
///
/// The difference is evaluated as `t₁ ln(1 + t/t₁) + t ln(t₁ + t)`; both
/// comparisons allow a few ulps of the largest term involved.
pub fn xlogx_bounds(t: f64, t1: f64) -> Result<XlogxCheck> {
    if !(t > 0.0 && t <= 1.0 / E) {
        return Err(Error::domain(format!("need 0 < t <= 1/e, got {t}")));
    }
    if !(t1 > 0.0 && t1.is_finite()) {
        return Err(Error::domain(format!("need t1 > 0, got {t1}")));
    }
    let a = t1 * (t / t1).ln_1p();
    let b = t * (t1 + t).ln();
    let difference = a + b;
    let lower = t * t.ln();
    let upper = t * (1.0 / t).max((t1 + t) * E).ln();
    let tol = 8.0 * f64::EPSILON * (a.abs() + b.abs() + lower.abs() + upper.abs());
    Ok(XlogxCheck {
        lower,
        difference,
        upper,
        lower_ok: lower <= difference + tol,
        upper_ok: difference <= upper + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::type_system::mutual_info_type;

    #[test]
    fn quantizer_tie_rule() {
        assert_eq!(quantize(&[0.0], 0.5), vec![0]);
        assert_eq!(quantize(&[0.25], 0.5), vec![1]);
        assert_eq!(quantize(&[-0.25], 0.5), vec![0]);
    }

    #[test]
    fn joint_type_of_small_pairs() {
        let cfg = LatticeConfig::new(2, 0.2, 0.5).unwrap();
        let d = cfg.delta_alpha();
        let e = cfg.delta_beta();
        let p = QuantizedPair::new(vec![0.0, d], vec![e, 0.0], cfg).unwrap();
        let j = empirical_joint_type(&p).unwrap();
        assert_eq!(j.counts().get(&(0, 1)), Some(&1));
        assert_eq!(j.counts().get(&(1, 0)), Some(&1));
        let bad = QuantizedPair::new(vec![0.0], vec![], cfg);
        assert!(matches!(bad, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn sandwich_exact_on_lattice() {
        let cfg = LatticeConfig::new(4, 0.2, 0.5).unwrap();
        let ch = ChannelSpec::from_snr(1.0, 2.0).unwrap();
        let x: Vec<f64> = [0, 1, -2, 3].iter().map(|&i| i as f64 * cfg.delta_alpha()).collect();
        let y: Vec<f64> = [1, 0, -1, 2].iter().map(|&j| j as f64 * cfg.delta_beta()).collect();
        let p = QuantizedPair::new(x, y, cfg).unwrap();
        let (ok, v) = pdf_exponent_sandwich(&p, &ch, 10.0).unwrap();
        assert!(ok);
        assert!((v.raw_exponent - v.quantized_exponent).abs() < 1e-14);
        assert!(matches!(pdf_exponent_sandwich(&p, &ch, 1e-9), Err(Error::ConstraintViolation { .. })));
    }

    #[test]
    fn drift_scan_matches_linear_scan() {
        let kind = DriftKind::Power { alpha: 0.5 };
        let n0 = power_drift_bound(kind, 1.0, 0.05).unwrap();
        let linear = (1..).find(|&n| power_drift(kind, n, 1.0) <= 0.05).unwrap();
        assert_eq!(n0, linear);
        assert_eq!(power_drift_bound(kind, 1.0, 10.0).unwrap(), 1);
    }

    #[test]
    fn step_family_box_row() {
        let cfg = LatticeConfig::new(3, 0.2, 0.5).unwrap();
        let j = JointTypePmf::from_pairs(3, &[((0, 2), 3)]).unwrap();
        let s = type_to_pdf(&j, &cfg);
        let db = cfg.delta_beta();
        assert!((s.density(0, 2.0 * db) - 1.0 / db).abs() < 1e-12);
        assert_eq!(s.density(0, 3.0 * db), 0.0);
        assert!((s.row_masses()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn step_family_information_equals_type_information() {
        let cfg = LatticeConfig::new(7, 0.2, 0.5).unwrap();
        let j = JointTypePmf::from_pairs(7, &[((0, 0), 2), ((0, 1), 1), ((1, 1), 3), ((-1, 2), 1)]).unwrap();
        let s = type_to_pdf(&j, &cfg);
        assert!((s.mutual_info_nats() - mutual_info_type(&j, E)).abs() < 1e-12);
        let db = cfg.delta_beta();
        let c = j.mean_sq_diff(&cfg);
        assert!(s.mean_sq_diff() <= c + db * c.sqrt() + db * db / 4.0);
    }

    #[test]
    fn gaussian_closed_forms_match_quadrature() {
        let g = GaussianRows::new(0.7, 0.6).unwrap();
        struct Plain(GaussianRows);
        impl ConditionalFamily for Plain {
            fn density(&self, x: f64, y: f64) -> f64 {
                self.0.density(x, y)
            }
            fn lipschitz(&self) -> f64 {
                self.0.lipschitz()
            }
            fn window(&self, x: f64) -> (f64, f64) {
                self.0.window(x)
            }
        }
        let p = Plain(g);
        for x in [-1.3, 0.0, 2.1] {
            assert!((p.neg_entropy_nats(x).unwrap() - g.neg_entropy_nats(x).unwrap()).abs() < 1e-10);
            assert!((p.mean_sq_diff(x).unwrap() - g.mean_sq_diff(x).unwrap()).abs() < 1e-10);
            // The Lipschitz fallback never exceeds the exact infimum.
            assert!(p.cell_infimum(x, 0.1, 0.2) <= g.cell_infimum(x, 0.1, 0.2));
        }
    }

    #[test]
    fn region_both_directions() {
        for &(a, b) in &[(0.2, 0.5), (0.1, 0.45), (0.24, 0.5)] {
            assert!(check_region(a, b).is_ok());
            let (d, d1) = slack_exponents(a, b);
            assert!(d > d1 && d1 > 0.0);
        }
        for &(a, b) in &[(0.3, 0.3), (0.2, 0.45), (0.2, 0.55), (0.26, 0.5)] {
            assert!(matches!(check_region(a, b), Err(Error::HypothesisViolation(_))));
            let (d, d1) = slack_exponents(a, b);
            assert!(d > d1 && d1 <= 0.0);
        }
        // alpha = 0 has a positive delta1 but no shrinking input lattice.
        assert!(check_region(0.0, 0.5).is_err());
    }

    #[test]
    fn point_mass_input_keeps_marginal() {
        let cfg = LatticeConfig::new(10_000, 0.2, 0.5).unwrap();
        let ch = ChannelSpec::from_snr(1.0, 2.0).unwrap();
        let rows = GaussianRows::from_rho_point(&make_rho_point(&ch, 0.0).unwrap());
        let px = TypePmf::point_mass(cfg.n, Axis::X, 0);
        let m = MomentBudget::from_x_and_xy(1e-12, 1.0);
        let out = pdf_to_type(&px, &rows, &cfg, &m, 2.0, 0, false).unwrap();
        assert_eq!(out.joint.marginal(Axis::X), px);
        assert!(out.p1 <= out.budget.p1_bound);
        let mean_y: f64 = out
            .joint
            .counts()
            .iter()
            .map(|(&(_, j), &c)| j as f64 * cfg.delta_beta() * c as f64)
            .sum::<f64>()
            / cfg.n as f64;
        assert!(mean_y.abs() < 0.05);
        let e = pdf_to_type(&px, &rows, &cfg, &m, 2.0, 0, true);
        assert!(matches!(e, Err(Error::SlackPrecondition { .. })));
    }

    #[test]
    fn xlogx_scalar_example() {
        let t = 1.0 / E;
        let c = xlogx_bounds(t, 1.0).unwrap();
        let direct = (1.0 + t) * (1.0 + t).ln();
        assert!((c.difference - direct).abs() < 1e-15);
        assert!(c.lower_ok && c.upper_ok);
        assert!(xlogx_bounds(0.5, 1.0).is_err());
        assert!(xlogx_bounds(0.1, 0.0).is_err());
    }
}
