//! Types with denominator `n` over the uniform lattices `iΔ_α` (inputs) and
//! `jΔ_β` (outputs): exhaustive enumeration under power constraints, exact
//! type-class sizes and the polynomial counting bounds that make the method
//! of types work on growing alphabets.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exponents::DiscretePmf;
use crate::gauss_family::ChannelSpec;

/// Default ceiling on recursion states visited by the enumerators.
pub const DEFAULT_CEILING: u64 = 10_000_000;

// Relative slack applied to real-valued budgets so that exact boundary cases
// are not lost to rounding.
const BUDGET_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "X",
            Axis::Y => "Y",
        })
    }
}

/// Block length and lattice exponents; `γ = 1 − α − β` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub n: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl LatticeConfig {
    pub fn new(n: u64, alpha: f64, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("block length must be positive"));
        }
        if !(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0 && alpha + beta < 1.0) {
            return Err(Error::domain(format!(
                "need alpha, beta in (0,1) with alpha + beta < 1, got ({alpha}, {beta})"
            )));
        }
        let cfg = LatticeConfig { n, alpha, beta };
        let cube = cfg.delta_alpha() * cfg.delta_beta() * cfg.delta_gamma() * n as f64;
        if (cube - 1.0).abs() > 1e-14 {
            return Err(Error::Numerical {
                what: "product of lattice steps times n".into(),
                residual: (cube - 1.0).abs(),
            });
        }
        Ok(cfg)
    }

    pub fn gamma(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn delta_alpha(&self) -> f64 {
        self.nf().powf(-self.alpha)
    }

    pub fn delta_beta(&self) -> f64 {
        self.nf().powf(-self.beta)
    }

    pub fn delta_gamma(&self) -> f64 {
        self.nf().powf(-self.gamma())
    }

    pub fn delta(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.delta_alpha(),
            Axis::Y => self.delta_beta(),
        }
    }

    fn exponent(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.alpha,
            Axis::Y => self.beta,
        }
    }

    /// Largest `|i|` with `|iΔ| ≤ √(n c)`.
    pub fn max_index(&self, c: f64, axis: Axis) -> i64 {
        let r = (self.nf() * c).sqrt() / self.delta(axis);
        (r * (1.0 + BUDGET_SLACK)).floor() as i64
    }

    /// Integer budget `B` such that `E[X²] ≤ c` iff `Σ i² count_i ≤ B`.
    pub fn power_budget(&self, c: f64, axis: Axis) -> u64 {
        let d = self.delta(axis);
        (self.nf() * c / (d * d) * (1.0 + BUDGET_SLACK)).floor() as u64
    }
}

/// Size of the power-limited alphabet and its polynomial bound `2√c n^{1/2+α} + 1`.
pub fn alphabet_subset(config: &LatticeConfig, c: f64, axis: Axis) -> (u64, f64) {
    let exact = 2 * config.max_index(c, axis) as u64 + 1;
    let bound = 2.0 * c.sqrt() * config.nf().powf(0.5 + config.exponent(axis)) + 1.0;
    (exact, bound)
}

fn entropy_of_counts<'a>(n: u64, counts: impl Iterator<Item = &'a u64>) -> f64 {
    let nf = n as f64;
    -counts
        .map(|&c| {
            let p = c as f64 / nf;
            p * p.ln()
        })
        .sum::<f64>()
}

fn ln_multinomial<'a>(n: u64, counts: impl Iterator<Item = &'a u64>) -> f64 {
    ln_factorial(n) - counts.map(|&c| ln_factorial(c)).sum::<f64>()
}

/// Type with denominator `n` over one lattice axis, stored as signed lattice
/// indices with positive counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypePmf {
    pub n: u64,
    pub axis: Axis,
    counts: BTreeMap<i64, u64>,
}

impl TypePmf {
    pub fn new(n: u64, axis: Axis, counts: BTreeMap<i64, u64>) -> Result<Self> {
        if counts.values().any(|&c| c == 0) {
            return Err(Error::domain("type counts must be positive where present"));
        }
        let total: u64 = counts.values().sum();
        if total != n || n == 0 {
            return Err(Error::domain(format!("type counts sum to {total}, expected {n}")));
        }
        Ok(TypePmf { n, axis, counts })
    }

    pub fn from_pairs(n: u64, axis: Axis, pairs: &[(i64, u64)]) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for &(i, c) in pairs {
            if c > 0 {
                *counts.entry(i).or_insert(0) += c;
            }
        }
        Self::new(n, axis, counts)
    }

    /// Empirical type of a sequence of lattice indices.
    pub fn from_sequence(axis: Axis, seq: &[i64]) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for &i in seq {
            *counts.entry(i).or_insert(0) += 1;
        }
        Self::new(seq.len() as u64, axis, counts)
    }

    pub fn point_mass(n: u64, axis: Axis, i: i64) -> Self {
        TypePmf { n, axis, counts: BTreeMap::from([(i, n)]) }
    }

    pub fn counts(&self) -> &BTreeMap<i64, u64> {
        &self.counts
    }

    pub fn count(&self, i: i64) -> u64 {
        self.counts.get(&i).copied().unwrap_or(0)
    }

    pub fn prob(&self, i: i64) -> f64 {
        self.count(i) as f64 / self.n as f64
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    /// `Σ i² count_i`, the integer power of the type in lattice units.
    pub fn index_power(&self) -> u128 {
        self.counts.iter().map(|(&i, &c)| (i as i128 * i as i128) as u128 * c as u128).sum()
    }

    pub fn second_moment(&self, config: &LatticeConfig) -> f64 {
        let d = config.delta(self.axis);
        self.index_power() as f64 * d * d / self.n as f64
    }

    pub fn satisfies_power(&self, config: &LatticeConfig, c: f64) -> bool {
        self.index_power() <= config.power_budget(c, self.axis) as u128
    }

    /// Entropy in nats.
    pub fn entropy_nats(&self) -> f64 {
        entropy_of_counts(self.n, self.counts.values())
    }

    pub fn entropy(&self, base: f64) -> f64 {
        self.entropy_nats() / base.ln()
    }

    pub fn ln_class_size(&self) -> f64 {
        ln_multinomial(self.n, self.counts.values())
    }

    pub fn to_discrete(&self, config: &LatticeConfig) -> DiscretePmf {
        let d = config.delta(self.axis);
        let atoms = self
            .counts
            .iter()
            .map(|(&i, &c)| (i as f64 * d, c as f64 / self.n as f64))
            .collect();
        DiscretePmf::new(atoms).expect("type probabilities sum to one")
    }

    /// Same type with every index negated.
    pub fn reflected(&self) -> Self {
        TypePmf {
            n: self.n,
            axis: self.axis,
            counts: self.counts.iter().map(|(&i, &c)| (-i, c)).collect(),
        }
    }
}

impl fmt::Display for TypePmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}; axis={}; pairs=", self.n, self.axis)?;
        for (k, (i, c)) in self.counts.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}:{c}")?;
        }
        Ok(())
    }
}

impl FromStr for TypePmf {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("malformed type text: {s:?}"));
        let mut n = None;
        let mut axis = None;
        let mut pairs = None;
        for field in s.split(';') {
            let (key, value) = field.trim().split_once('=').ok_or_else(bad)?;
            match key.trim() {
                "n" => n = Some(value.trim().parse::<u64>().map_err(|_| bad())?),
                "axis" => {
                    axis = Some(match value.trim() {
                        "X" => Axis::X,
                        "Y" => Axis::Y,
                        _ => return Err(bad()),
                    })
                }
                "pairs" => {
                    let mut v = Vec::new();
                    for p in value.split(',').filter(|p| !p.trim().is_empty()) {
                        let (i, c) = p.trim().split_once(':').ok_or_else(bad)?;
                        v.push((i.parse::<i64>().map_err(|_| bad())?, c.parse::<u64>().map_err(|_| bad())?));
                    }
                    pairs = Some(v)
                }
                _ => return Err(bad()),
            }
        }
        let (n, axis, pairs) = (n.ok_or_else(bad)?, axis.ok_or_else(bad)?, pairs.ok_or_else(bad)?);
        let mut sorted = pairs.clone();
        sorted.sort();
        if sorted != pairs || sorted.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::domain("type text needs strictly ascending indices"));
        }
        TypePmf::from_pairs(n, axis, &pairs)
    }
}

/// Joint type over pairs `(i, j)` meaning the letters `(iΔ_α, jΔ_β)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JointTypePmf {
    pub n: u64,
    counts: BTreeMap<(i64, i64), u64>,
}

impl JointTypePmf {
    pub fn new(n: u64, counts: BTreeMap<(i64, i64), u64>) -> Result<Self> {
        if counts.values().any(|&c| c == 0) {
            return Err(Error::domain("joint counts must be positive where present"));
        }
        let total: u64 = counts.values().sum();
        if total != n || n == 0 {
            return Err(Error::domain(format!("joint counts sum to {total}, expected {n}")));
        }
        Ok(JointTypePmf { n, counts })
    }

    pub fn from_pairs(n: u64, pairs: &[((i64, i64), u64)]) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for &(ij, c) in pairs {
            if c > 0 {
                *counts.entry(ij).or_insert(0) += c;
            }
        }
        Self::new(n, counts)
    }

    /// Joint empirical type of two equally long index sequences.
    pub fn from_sequences(x: &[i64], y: &[i64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
        }
        let mut counts = BTreeMap::new();
        for (&i, &j) in x.iter().zip(y) {
            *counts.entry((i, j)).or_insert(0) += 1;
        }
        Self::new(x.len() as u64, counts)
    }

    pub fn counts(&self) -> &BTreeMap<(i64, i64), u64> {
        &self.counts
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }

    pub fn marginal(&self, axis: Axis) -> TypePmf {
        let mut m = BTreeMap::new();
        for (&(i, j), &c) in &self.counts {
            let key = if axis == Axis::X { i } else { j };
            *m.entry(key).or_insert(0) += c;
        }
        TypePmf { n: self.n, axis, counts: m }
    }

    pub fn entropy_nats(&self) -> f64 {
        entropy_of_counts(self.n, self.counts.values())
    }

    pub fn ln_class_size(&self) -> f64 {
        ln_multinomial(self.n, self.counts.values())
    }

    /// `H(P_XY) − H(P_{given})`, in nats.
    pub fn cond_entropy_nats(&self, given: Axis) -> f64 {
        self.entropy_nats() - self.marginal(given).entropy_nats()
    }

    /// `I(P_X, P_{Y|X}) = H(X) + H(Y) − H(X,Y)`, in nats.
    pub fn mutual_info_nats(&self) -> f64 {
        let i = self.marginal(Axis::X).entropy_nats() + self.marginal(Axis::Y).entropy_nats() - self.entropy_nats();
        i.max(0.0)
    }

    /// `E[(Y − X)²]` with letters materialized on the lattices of `config`.
    pub fn mean_sq_diff(&self, config: &LatticeConfig) -> f64 {
        let (da, db) = (config.delta_alpha(), config.delta_beta());
        self.counts
            .iter()
            .map(|(&(i, j), &c)| {
                let d = j as f64 * db - i as f64 * da;
                d * d * c as f64
            })
            .sum::<f64>()
            / self.n as f64
    }

    /// Negate the x indices, the y indices, or both.
    pub fn reflected(&self, flip_x: bool, flip_y: bool) -> Self {
        let sx = if flip_x { -1 } else { 1 };
        let sy = if flip_y { -1 } else { 1 };
        JointTypePmf {
            n: self.n,
            counts: self.counts.iter().map(|(&(i, j), &c)| ((sx * i, sy * j), c)).collect(),
        }
    }
}

/// `I(P_X, P_{Y|X})` in base `base`.
pub fn mutual_info_type(joint: &JointTypePmf, base: f64) -> f64 {
    joint.mutual_info_nats() / base.ln()
}

fn ln_channel_measure(channel: &ChannelSpec, config: &LatticeConfig, i: i64, j: i64) -> f64 {
    let d = j as f64 * config.delta_beta() - i as f64 * config.delta_alpha();
    -d * d / (2.0 * channel.sigma2) - 0.5 * (2.0 * PI * channel.sigma2).ln() + config.delta_beta().ln()
}

/// `D(P_{Y|X} ‖ W_n | P_X)` where `W_n(y|x) = w(y|x) Δ_β` is the channel
/// density scaled to a lattice measure. In the channel's log base.
pub fn kl_type_vs_channel_measure(joint: &JointTypePmf, channel: &ChannelSpec, config: &LatticeConfig) -> f64 {
    let px = joint.marginal(Axis::X);
    let nf = joint.n as f64;
    let nats: f64 = joint
        .counts
        .iter()
        .map(|(&(i, j), &c)| {
            let cond = c as f64 / px.count(i) as f64;
            c as f64 / nf * (cond.ln() - ln_channel_measure(channel, config, i, j))
        })
        .sum();
    channel.from_nats(nats)
}

/// Same divergence assembled as `−H(Y|X) − Σ P_XY log W_n`.
pub fn kl_via_cond_entropy(joint: &JointTypePmf, channel: &ChannelSpec, config: &LatticeConfig) -> f64 {
    let nf = joint.n as f64;
    let cross: f64 = joint
        .counts
        .iter()
        .map(|(&(i, j), &c)| c as f64 / nf * ln_channel_measure(channel, config, i, j))
        .sum();
    channel.from_nats(-joint.cond_entropy_nats(Axis::X) - cross)
}

/// Exact log type-class size with the standard sandwich
/// `nH − |S| log(n+1) ≤ log|T| ≤ nH`. All values in base `base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassSize {
    pub exact_log: f64,
    pub lower: f64,
    pub upper: f64,
    /// Lower end with the support size replaced by its polynomial bound.
    pub lower_poly: f64,
}

impl ClassSize {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower <= self.exact_log + tol && self.exact_log <= self.upper + tol && self.lower_poly <= self.lower + tol
    }
}

/// Class size of a single-axis type; `c` is the power level used for the
/// support-size bound.
pub fn type_class_log_size(t: &TypePmf, config: &LatticeConfig, c: f64, base: f64) -> ClassSize {
    let lb = base.ln();
    let nf = t.n as f64;
    let nh = nf * t.entropy_nats();
    let ln_n1 = (nf + 1.0).ln();
    let support_bound = support_bound_single(config, c, t.axis);
    ClassSize {
        exact_log: t.ln_class_size() / lb,
        lower: (nh - t.support_size() as f64 * ln_n1) / lb,
        upper: nh / lb,
        lower_poly: (nh - support_bound * ln_n1) / lb,
    }
}

pub fn joint_class_log_size(joint: &JointTypePmf, config: &LatticeConfig, c_x: f64, c_y: f64, base: f64) -> ClassSize {
    let lb = base.ln();
    let nf = joint.n as f64;
    let nh = nf * joint.entropy_nats();
    let ln_n1 = (nf + 1.0).ln();
    ClassSize {
        exact_log: joint.ln_class_size() / lb,
        lower: (nh - joint.support_size() as f64 * ln_n1) / lb,
        upper: nh / lb,
        lower_poly: (nh - support_bound_joint(config, c_x, c_y) * ln_n1) / lb,
    }
}

/// Conditional type-class size `|T(P_XY)| / |T(P_given)|` with two brackets:
/// one from the actual support sizes and one with the polynomial support
/// bounds substituted. Values are per-letter (divided by `n`), base `base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CondClassSize {
    pub exact_log: f64,
    pub cond_entropy: f64,
    pub support_lower: f64,
    pub support_upper: f64,
    pub poly_lower: f64,
    pub poly_upper: f64,
    /// The polynomial bracket is tighter than the support bracket on some side.
    pub crossover: bool,
}

impl CondClassSize {
    pub fn holds(&self, tol: f64) -> bool {
        let in_support = self.support_lower <= self.exact_log + tol && self.exact_log <= self.support_upper + tol;
        let in_poly = self.poly_lower <= self.exact_log + tol && self.exact_log <= self.poly_upper + tol;
        in_support && in_poly
    }
}

pub fn cond_type_class_log_size(
    joint: &JointTypePmf,
    given: Axis,
    config: &LatticeConfig,
    c_x: f64,
    c_y: f64,
    base: f64,
) -> CondClassSize {
    let lb = base.ln();
    let nf = joint.n as f64;
    let marg = joint.marginal(given);
    let exact = (joint.ln_class_size() - marg.ln_class_size()) / nf / lb;
    let h = joint.cond_entropy_nats(given) / lb;
    let corr = (nf + 1.0).ln() / nf / lb;
    let c_given = if given == Axis::X { c_x } else { c_y };
    let support_lower = h - joint.support_size() as f64 * corr;
    let support_upper = h + marg.support_size() as f64 * corr;
    let poly_lower = h - support_bound_joint(config, c_x, c_y) * corr;
    let poly_upper = h + support_bound_single(config, c_given, given) * corr;
    CondClassSize {
        exact_log: exact,
        cond_entropy: h,
        support_lower,
        support_upper,
        poly_lower,
        poly_upper,
        crossover: poly_lower > support_lower || poly_upper < support_upper,
    }
}

/// `(12c + 1)^{1/3} n^{(1+2α)/3}` (or with β on the output axis).
pub fn support_bound_single(config: &LatticeConfig, c: f64, axis: Axis) -> f64 {
    (12.0 * c + 1.0).cbrt() * config.nf().powf((1.0 + 2.0 * config.exponent(axis)) / 3.0)
}

/// `√(2π(c_X + c_Y + 1/6)) n^{(1+α+β)/2}`.
pub fn support_bound_joint(config: &LatticeConfig, c_x: f64, c_y: f64) -> f64 {
    (2.0 * PI * (c_x + c_y + 1.0 / 6.0)).sqrt() * config.nf().powf((1.0 + config.alpha + config.beta) / 2.0)
}

/// Supports of a joint type and of its marginals next to their bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportReport {
    pub size_xy: usize,
    pub size_x: usize,
    pub size_y: usize,
    pub bound_xy: f64,
    pub bound_x: f64,
    pub bound_y: f64,
}

impl SupportReport {
    pub fn holds(&self) -> bool {
        self.size_xy as f64 <= self.bound_xy && self.size_x as f64 <= self.bound_x && self.size_y as f64 <= self.bound_y
    }
}

pub fn support_bounds(joint: &JointTypePmf, config: &LatticeConfig, c_x: f64, c_y: f64) -> Result<SupportReport> {
    let (mx, my) = (joint.marginal(Axis::X), joint.marginal(Axis::Y));
    for (m, c, name) in [(&mx, c_x, "E[X^2]"), (&my, c_y, "E[Y^2]")] {
        if !m.satisfies_power(config, c) {
            return Err(Error::ConstraintViolation {
                what: name.into(),
                value: m.second_moment(config),
                limit: c,
            });
        }
    }
    Ok(SupportReport {
        size_xy: joint.support_size(),
        size_x: mx.support_size(),
        size_y: my.support_size(),
        bound_xy: support_bound_joint(config, c_x, c_y),
        bound_x: support_bound_single(config, c_x, Axis::X),
        bound_y: support_bound_single(config, c_y, Axis::Y),
    })
}

/// Natural-log bounds on the number of power-constrained types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeCountBounds {
    /// `|X_n(c)| ln(n+1)` using the exact alphabet size.
    pub alphabet_ln: f64,
    /// `(2√c + 1) n^{1/2+α} ln(n+1)`.
    pub crude_ln: f64,
    /// `c̃ n^{(1+2α)/3} ln((n+1)c)` with the improved constants.
    pub improved_ln: f64,
}

pub fn count_types_bounds(config: &LatticeConfig, c: f64, axis: Axis) -> TypeCountBounds {
    let nf = config.nf();
    let a = config.exponent(axis);
    let ln_n1 = (nf + 1.0).ln();
    let (exact_alpha, _) = alphabet_subset(config, c, axis);
    let cc = (2.0 * c.sqrt() + 1.0).powf(1.0 / (1.5 + a));
    let ct = (1.5 + a) * (12.0 * c + 1.0).cbrt();
    TypeCountBounds {
        alphabet_ln: exact_alpha as f64 * ln_n1,
        crude_ln: (2.0 * c.sqrt() + 1.0) * nf.powf(0.5 + a) * ln_n1,
        improved_ln: ct * nf.powf((1.0 + 2.0 * a) / 3.0) * ((nf + 1.0) * cc).ln(),
    }
}

/// `c̃ n^{(1+α+β)/2} ln((n+1)c)` bound on the number of joint types, in nats.
pub fn count_joint_types_bound(config: &LatticeConfig, c_x: f64, c_y: f64) -> f64 {
    let nf = config.nf();
    let s = 2.0 + config.alpha + config.beta;
    let cc = ((2.0 * c_x.sqrt() + 1.0) * (2.0 * c_y.sqrt() + 1.0)).powf(1.0 / s);
    let ct = s * (2.0 * PI * (c_x + c_y + 1.0 / 6.0)).sqrt();
    ct * nf.powf((1.0 + config.alpha + config.beta) / 2.0) * ((nf + 1.0) * cc).ln()
}

// Distributes `mass` units over `letters` (index, unit cost) subject to a
// total cost budget, calling `emit` with one count per letter. Shared by the
// single-axis and joint enumerators.
struct Composer<'a> {
    states: u64,
    ceiling: u64,
    letters: &'a [(i64, f64)],
    suffix_min: Vec<f64>,
}

impl<'a> Composer<'a> {
    fn new(letters: &'a [(i64, f64)], ceiling: u64) -> Self {
        let mut suffix_min = vec![f64::INFINITY; letters.len() + 1];
        for k in (0..letters.len()).rev() {
            suffix_min[k] = suffix_min[k + 1].min(letters[k].1);
        }
        Composer { states: 0, ceiling, letters, suffix_min }
    }

    fn tick(&mut self) -> Result<()> {
        self.states += 1;
        if self.states > self.ceiling {
            return Err(Error::EnumerationCeiling { ceiling: self.ceiling });
        }
        Ok(())
    }
}

struct Frame {
    pos: usize,
    mass: u64,
    budget: f64,
    cost: f64,
    next: i64,
    lo: u64,
    // Whether the choice that opened this frame added an entry to `current`.
    pushed: bool,
}

// Opens the state at `pos`; returns the frame still to be expanded, if any.
fn enter<F>(
    comp: &mut Composer<'_>,
    pos: usize,
    mass: u64,
    budget: f64,
    pushed: bool,
    current: &[(usize, u64)],
    emit: &mut F,
) -> Result<Option<Frame>>
where
    F: FnMut(&[(usize, u64)], f64) -> Result<()>,
{
    comp.tick()?;
    if pos == comp.letters.len() {
        if mass == 0 {
            emit(current, budget)?;
        }
        return Ok(None);
    }
    // Every remaining unit costs at least the cheapest remaining letter.
    if mass as f64 * comp.suffix_min[pos] > budget {
        return Ok(None);
    }
    let cost = comp.letters[pos].1;
    let mut max_here = mass;
    if cost > 0.0 {
        max_here = max_here.min((budget / cost).floor() as u64);
    }
    if pos + 1 == comp.letters.len() {
        // The last letter must absorb whatever mass is left.
        return Ok((max_here >= mass).then_some(Frame { pos, mass, budget, cost, next: mass as i64, lo: mass, pushed }));
    }
    Ok(Some(Frame { pos, mass, budget, cost, next: max_here as i64, lo: 0, pushed }))
}

// Depth-first over counts per letter, larger counts first. `current` holds
// the nonzero `(letter position, count)` choices on the path, so emitting a
// composition costs its support rather than the alphabet size. An explicit
// stack keeps alphabets with many thousands of letters off the call stack.
fn compose<F>(
    comp: &mut Composer<'_>,
    pos: usize,
    mass: u64,
    budget: f64,
    current: &mut Vec<(usize, u64)>,
    emit: &mut F,
) -> Result<()>
where
    F: FnMut(&[(usize, u64)], f64) -> Result<()>,
{
    let mut stack: Vec<Frame> = Vec::new();
    if let Some(f) = enter(comp, pos, mass, budget, false, current, emit)? {
        stack.push(f);
    }
    while let Some(top) = stack.last_mut() {
        if top.next < top.lo as i64 {
            if top.pushed {
                current.pop();
            }
            stack.pop();
            continue;
        }
        let c = top.next as u64;
        top.next -= 1;
        let (child_pos, child_mass, child_budget) = (top.pos + 1, top.mass - c, top.budget - c as f64 * top.cost);
        let pushed = c > 0;
        if pushed {
            current.push((top.pos, c));
        }
        match enter(comp, child_pos, child_mass, child_budget, pushed, current, emit)? {
            Some(f) => stack.push(f),
            None => {
                if pushed {
                    current.pop();
                }
            }
        }
    }
    Ok(())
}

/// Visit every type with denominator `n` on the alphabet `|iΔ| ≤ √(nc)` with
/// `E[X²] ≤ c`. Returns the number of recursion states visited.
pub fn for_each_type<F>(config: &LatticeConfig, c: f64, axis: Axis, ceiling: u64, mut visit: F) -> Result<u64>
where
    F: FnMut(TypePmf),
{
    let imax = config.max_index(c, axis);
    // Costlier letters first so the budget prunes early; index 0 comes last.
    let mut letters: Vec<(i64, f64)> = Vec::new();
    for a in (1..=imax).rev() {
        letters.push((-a, (a * a) as f64));
        letters.push((a, (a * a) as f64));
    }
    letters.push((0, 0.0));
    let budget = config.power_budget(c, axis) as f64;
    let mut comp = Composer::new(&letters, ceiling);
    let mut current = Vec::new();
    let n = config.n;
    compose(&mut comp, 0, n, budget, &mut current, &mut |cs, _| {
        let counts = cs.iter().map(|&(p, c)| (letters[p].0, c)).collect();
        visit(TypePmf { n, axis, counts });
        Ok(())
    })?;
    Ok(comp.states)
}

/// All power-constrained types, in a deterministic order.
pub fn enumerate_types(config: &LatticeConfig, c: f64, axis: Axis, ceiling: u64) -> Result<Vec<TypePmf>> {
    let mut out = Vec::new();
    for_each_type(config, c, axis, ceiling, |t| out.push(t))?;
    Ok(out)
}

/// One conditional row: input index, its count and the admissible outputs
/// with per-unit costs.
struct Row {
    i: i64,
    count: u64,
    letters: Vec<(i64, f64)>,
}

#[allow(clippy::too_many_arguments)]
fn rows_recurse<F>(
    rows: &[Row],
    row_min: &[f64],
    r: usize,
    budget: f64,
    ceiling: u64,
    states: &mut u64,
    acc: &mut Vec<((i64, i64), u64)>,
    visit: &mut F,
) -> Result<()>
where
    F: FnMut(&[((i64, i64), u64)]) -> Result<()>,
{
    if r == rows.len() {
        return visit(acc);
    }
    if budget < row_min[r] {
        return Ok(());
    }
    let row = &rows[r];
    let mut comp = Composer::new(&row.letters, ceiling.saturating_sub(*states));
    let mut current = Vec::new();
    // Leave room for the cheapest completion of the rows after this one.
    let reserve = row_min[r + 1];
    let result = compose(&mut comp, 0, row.count, budget - reserve, &mut current, &mut |cs, left| {
        let before = acc.len();
        for &(p, c) in cs {
            acc.push(((row.i, row.letters[p].0), c));
        }
        let res = rows_recurse(rows, row_min, r + 1, left + reserve, ceiling, states, acc, visit);
        acc.truncate(before);
        res
    });
    *states += comp.states;
    if let Err(Error::EnumerationCeiling { .. }) = result {
        return Err(Error::EnumerationCeiling { ceiling });
    }
    if *states > ceiling {
        return Err(Error::EnumerationCeiling { ceiling });
    }
    result
}

fn enumerate_rows<F>(rows: Vec<Row>, budget: f64, ceiling: u64, n: u64, mut visit: F) -> Result<u64>
where
    F: FnMut(JointTypePmf),
{
    let mut row_min = vec![0.0; rows.len() + 1];
    for r in (0..rows.len()).rev() {
        let m = rows[r].letters.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
        row_min[r] = row_min[r + 1] + m * rows[r].count as f64;
    }
    let mut states = 0;
    let mut acc = Vec::new();
    rows_recurse(&rows, &row_min, 0, budget, ceiling, &mut states, &mut acc, &mut |cells| {
        visit(JointTypePmf { n, counts: cells.iter().copied().collect() });
        Ok(())
    })?;
    Ok(states)
}

/// Visit every joint type whose marginals satisfy `E[X²] ≤ c_x`, `E[Y²] ≤ c_y`.
/// The x-marginal is fixed first and the conditional rows are composed after.
pub fn for_each_joint_type<F>(config: &LatticeConfig, c_x: f64, c_y: f64, ceiling: u64, mut visit: F) -> Result<u64>
where
    F: FnMut(JointTypePmf),
{
    let marginals = enumerate_types(config, c_x, Axis::X, ceiling)?;
    let jmax = config.max_index(c_y, Axis::Y);
    let mut y_letters = Vec::new();
    for a in (1..=jmax).rev() {
        y_letters.push((-a, (a * a) as f64));
        y_letters.push((a, (a * a) as f64));
    }
    y_letters.push((0, 0.0));
    let budget = config.power_budget(c_y, Axis::Y) as f64;
    let mut states = marginals.len() as u64;
    for px in marginals {
        let rows = px
            .counts
            .iter()
            .map(|(&i, &count)| Row { i, count, letters: y_letters.clone() })
            .collect();
        states += enumerate_rows(rows, budget, ceiling.saturating_sub(states), config.n, &mut visit).map_err(|e| match e {
            Error::EnumerationCeiling { .. } => Error::EnumerationCeiling { ceiling },
            other => other,
        })?;
    }
    Ok(states)
}

pub fn enumerate_joint_types(config: &LatticeConfig, c_x: f64, c_y: f64, ceiling: u64) -> Result<Vec<JointTypePmf>> {
    let mut out = Vec::new();
    for_each_joint_type(config, c_x, c_y, ceiling, |t| out.push(t))?;
    Ok(out)
}

/// Visit every joint type with x-marginal `p_x` and `E[(Y − X)²] ≤ max_sq_diff`.
pub fn for_each_conditional<F>(
    p_x: &TypePmf,
    config: &LatticeConfig,
    max_sq_diff: f64,
    ceiling: u64,
    visit: F,
) -> Result<u64>
where
    F: FnMut(JointTypePmf),
{
    if p_x.axis != Axis::X {
        return Err(Error::domain("conditional enumeration needs an X-axis type"));
    }
    let nf = config.nf();
    let (da, db) = (config.delta_alpha(), config.delta_beta());
    let budget = nf * max_sq_diff * (1.0 + BUDGET_SLACK);
    let reach = budget.max(0.0).sqrt();
    let rows = p_x
        .counts
        .iter()
        .map(|(&i, &count)| {
            let x = i as f64 * da;
            let lo = ((x - reach) / db).ceil() as i64 - 1;
            let hi = ((x + reach) / db).floor() as i64 + 1;
            let mut letters: Vec<(i64, f64)> = (lo..=hi)
                .map(|j| {
                    let d = j as f64 * db - x;
                    (j, d * d)
                })
                .filter(|l| l.1 <= budget)
                .collect();
            // Costlier letters first, as for the marginal enumerator.
            letters.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            Row { i, count, letters }
        })
        .collect();
    enumerate_rows(rows, budget, ceiling, p_x.n, visit)
}

/// A minimum that may be taken over an empty set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExponentValue {
    Finite(f64),
    Infeasible,
}

impl ExponentValue {
    pub fn finite(&self) -> Option<f64> {
        match self {
            ExponentValue::Finite(v) => Some(*v),
            ExponentValue::Infeasible => None,
        }
    }
}

/// Minimizer of a finite-n objective with the joint type attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeOptimum {
    pub value: f64,
    pub argmin: JointTypePmf,
    pub candidates: u64,
}

/// `min D(P_{Y|X} ‖ W_n | P_X) + |R − I(P_X, P_{Y|X})|⁺` over joint types
/// extending `p_x` with `E[(Y − X)²] ≤ σ̃² + ε`.
pub fn finite_n_correct_exponent(
    p_x: &TypePmf,
    rate: f64,
    sigma_tilde2: f64,
    eps: f64,
    channel: &ChannelSpec,
    config: &LatticeConfig,
) -> Result<TypeOptimum> {
    finite_n_correct_exponent_with(p_x, rate, sigma_tilde2, eps, channel, config, DEFAULT_CEILING)
}

pub fn finite_n_correct_exponent_with(
    p_x: &TypePmf,
    rate: f64,
    sigma_tilde2: f64,
    eps: f64,
    channel: &ChannelSpec,
    config: &LatticeConfig,
    ceiling: u64,
) -> Result<TypeOptimum> {
    let lb = channel.ln_base();
    let mut best: Option<TypeOptimum> = None;
    let mut candidates = 0;
    for_each_conditional(p_x, config, sigma_tilde2 + eps, ceiling, |joint| {
        candidates += 1;
        let d = kl_type_vs_channel_measure(&joint, channel, config);
        let i = joint.mutual_info_nats() / lb;
        let v = d + (rate - i).max(0.0);
        if best.as_ref().is_none_or(|b| v < b.value) {
            best = Some(TypeOptimum { value: v, argmin: joint, candidates: 0 });
        }
    })?;
    let mut best = best.ok_or_else(|| {
        Error::EmptyFeasibleSet(format!(
            "no joint type extends the input type with E[(Y-X)^2] <= {}",
            sigma_tilde2 + eps
        ))
    })?;
    best.candidates = candidates;
    Ok(best)
}

/// `min D(P_{Y|X} ‖ W_n | P_X)` over joint types extending `p_x` with
/// `E[(Y − X)²] ≤ c_xy` and `I(P_X, P_{Y|X}) ≤ R − ε`.
pub fn finite_n_error_exponent_bound(
    p_x: &TypePmf,
    rate: f64,
    eps: f64,
    c_xy: f64,
    channel: &ChannelSpec,
    config: &LatticeConfig,
) -> Result<(ExponentValue, Option<JointTypePmf>)> {
    finite_n_error_exponent_bound_with(p_x, rate, eps, c_xy, channel, config, DEFAULT_CEILING)
}

pub fn finite_n_error_exponent_bound_with(
    p_x: &TypePmf,
    rate: f64,
    eps: f64,
    c_xy: f64,
    channel: &ChannelSpec,
    config: &LatticeConfig,
    ceiling: u64,
) -> Result<(ExponentValue, Option<JointTypePmf>)> {
    if !(rate > eps) {
        return Err(Error::domain(format!("need rate > eps, got rate {rate}, eps {eps}")));
    }
    let lb = channel.ln_base();
    let cap = rate - eps;
    let mut best: Option<(f64, JointTypePmf)> = None;
    for_each_conditional(p_x, config, c_xy, ceiling, |joint| {
        if joint.mutual_info_nats() / lb > cap {
            return;
        }
        let d = kl_type_vs_channel_measure(&joint, channel, config);
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, joint));
        }
    })?;
    Ok(match best {
        Some((v, j)) => (ExponentValue::Finite(v), Some(j)),
        None => (ExponentValue::Infeasible, None),
    })
}

/// Exact counts where enumeration is feasible, next to every bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingBoundsReport {
    pub n: u64,
    pub alpha: f64,
    pub beta: f64,
    pub c_x: f64,
    pub c_y: f64,
    pub alphabet_x: u64,
    pub alphabet_x_bound: f64,
    pub alphabet_y: u64,
    pub alphabet_y_bound: f64,
    pub support_x_bound: f64,
    pub support_y_bound: f64,
    pub support_xy_bound: f64,
    pub num_types_x: TypeCountBounds,
    pub num_types_y: TypeCountBounds,
    pub num_joint_types_bound_ln: f64,
    pub exact: Option<ExactCounts>,
}

/// Quantities only available through enumeration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactCounts {
    pub num_types_x: u64,
    pub num_types_y: u64,
    pub num_joint_types: u64,
    pub max_support_x: usize,
    pub max_support_y: usize,
    pub max_support_xy: usize,
    pub sandwich_failures: u64,
    pub cond_failures: u64,
    pub crossovers: u64,
}

impl CountingBoundsReport {
    /// `(name, exact value if known, bound, pass)` rows; counts are in nats of
    /// the count (`ln`) wherever the bound is stated in log space.
    pub fn rows(&self) -> Vec<(String, Option<f64>, f64, bool)> {
        let mut rows = Vec::new();
        let mut push = |name: &str, exact: Option<f64>, bound: f64| {
            let pass = exact.is_none_or(|e| e <= bound);
            rows.push((name.to_string(), exact, bound, pass));
        };
        push("alphabet_x", Some(self.alphabet_x as f64), self.alphabet_x_bound);
        push("alphabet_y", Some(self.alphabet_y as f64), self.alphabet_y_bound);
        let ex = self.exact.as_ref();
        push("support_x", ex.map(|e| e.max_support_x as f64), self.support_x_bound);
        push("support_y", ex.map(|e| e.max_support_y as f64), self.support_y_bound);
        push("support_xy", ex.map(|e| e.max_support_xy as f64), self.support_xy_bound);
        let ln = |c: u64| (c as f64).ln();
        push("ln_num_types_x_alphabet", ex.map(|e| ln(e.num_types_x)), self.num_types_x.alphabet_ln);
        push("ln_num_types_x_crude", ex.map(|e| ln(e.num_types_x)), self.num_types_x.crude_ln);
        push("ln_num_types_x_improved", ex.map(|e| ln(e.num_types_x)), self.num_types_x.improved_ln);
        push("ln_num_types_y_improved", ex.map(|e| ln(e.num_types_y)), self.num_types_y.improved_ln);
        push("ln_num_joint_types", ex.map(|e| ln(e.num_joint_types)), self.num_joint_types_bound_ln);
        push("class_size_sandwich_failures", ex.map(|e| e.sandwich_failures as f64), 0.0);
        push("cond_class_size_failures", ex.map(|e| e.cond_failures as f64), 0.0);
        rows
    }

    pub fn all_pass(&self) -> bool {
        self.rows().iter().all(|r| r.3)
    }
}

/// Build the counting report; with `enumerate` set, every type and joint type
/// is enumerated and checked against the class-size sandwiches as well.
pub fn counting_report(
    config: &LatticeConfig,
    c_x: f64,
    c_y: f64,
    enumerate: bool,
    ceiling: u64,
) -> Result<CountingBoundsReport> {
    let (alphabet_x, alphabet_x_bound) = alphabet_subset(config, c_x, Axis::X);
    let (alphabet_y, alphabet_y_bound) = alphabet_subset(config, c_y, Axis::Y);
    let exact = if enumerate {
        let tol = 1e-10;
        let mut ex = ExactCounts {
            num_types_x: 0,
            num_types_y: 0,
            num_joint_types: 0,
            max_support_x: 0,
            max_support_y: 0,
            max_support_xy: 0,
            sandwich_failures: 0,
            cond_failures: 0,
            crossovers: 0,
        };
        for_each_type(config, c_x, Axis::X, ceiling, |t| {
            ex.num_types_x += 1;
            ex.max_support_x = ex.max_support_x.max(t.support_size());
            if !type_class_log_size(&t, config, c_x, 2.0).holds(tol) {
                ex.sandwich_failures += 1;
            }
        })?;
        for_each_type(config, c_y, Axis::Y, ceiling, |t| {
            ex.num_types_y += 1;
            ex.max_support_y = ex.max_support_y.max(t.support_size());
            if !type_class_log_size(&t, config, c_y, 2.0).holds(tol) {
                ex.sandwich_failures += 1;
            }
        })?;
        for_each_joint_type(config, c_x, c_y, ceiling, |j| {
            ex.num_joint_types += 1;
            ex.max_support_xy = ex.max_support_xy.max(j.support_size());
            if !joint_class_log_size(&j, config, c_x, c_y, 2.0).holds(tol) {
                ex.sandwich_failures += 1;
            }
            for given in [Axis::X, Axis::Y] {
                let cs = cond_type_class_log_size(&j, given, config, c_x, c_y, 2.0);
                if !cs.holds(tol) {
                    ex.cond_failures += 1;
                }
                if cs.crossover {
                    ex.crossovers += 1;
                }
            }
        })?;
        Some(ex)
    } else {
        None
    };
    Ok(CountingBoundsReport {
        n: config.n,
        alpha: config.alpha,
        beta: config.beta,
        c_x,
        c_y,
        alphabet_x,
        alphabet_x_bound,
        alphabet_y,
        alphabet_y_bound,
        support_x_bound: support_bound_single(config, c_x, Axis::X),
        support_y_bound: support_bound_single(config, c_y, Axis::Y),
        support_xy_bound: support_bound_joint(config, c_x, c_y),
        num_types_x: count_types_bounds(config, c_x, Axis::X),
        num_types_y: count_types_bounds(config, c_y, Axis::Y),
        num_joint_types_bound_ln: count_joint_types_bound(config, c_x, c_y),
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u64, a: f64, b: f64) -> LatticeConfig {
        LatticeConfig::new(n, a, b).unwrap()
    }

    #[test]
    fn config_checks() {
        assert!(LatticeConfig::new(10, 0.5, 0.5).is_err());
        assert!(LatticeConfig::new(0, 0.2, 0.3).is_err());
        let c = cfg(1000, 0.2, 0.5);
        assert!((c.gamma() - 0.3).abs() < 1e-15);
        assert!((c.delta_alpha() * c.delta_beta() * c.delta_gamma() * 1000.0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn alphabet_examples() {
        assert_eq!(alphabet_subset(&cfg(100, 0.25, 0.3), 1.0, Axis::X).0, 63);
        let (e, b) = alphabet_subset(&cfg(100, 0.25, 0.3), 1.0, Axis::X);
        assert!((b - (2.0 * 100f64.powf(0.75) + 1.0)).abs() < 1e-12 && (e as f64) <= b);
        let (e, b) = alphabet_subset(&cfg(1, 0.3, 0.3), 1.0, Axis::X);
        assert_eq!((e, b), (3, 3.0));
        assert_eq!(alphabet_subset(&cfg(50, 0.3, 0.3), 1e-9, Axis::X).0, 1);
    }

    #[test]
    fn small_enumerations() {
        let c1 = cfg(1, 0.3, 0.3);
        assert_eq!(enumerate_types(&c1, 1.0, Axis::X, DEFAULT_CEILING).unwrap().len(), 3);
        let c2 = cfg(2, 0.3, 0.3);
        let d = c2.delta_alpha();
        let ts = enumerate_types(&c2, 1.5 * d * d, Axis::X, DEFAULT_CEILING).unwrap();
        assert_eq!(ts.len(), 6);
        let mut uniq = ts.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 6);
    }

    #[test]
    fn ceiling_is_enforced() {
        let c = cfg(30, 0.3, 0.3);
        assert!(matches!(
            enumerate_types(&c, 2.0, Axis::X, 1000),
            Err(Error::EnumerationCeiling { ceiling: 1000 })
        ));
    }

    #[test]
    fn class_sizes() {
        let c = cfg(2, 0.3, 0.3);
        let t = TypePmf::from_pairs(2, Axis::X, &[(0, 1), (1, 1)]).unwrap();
        let s = type_class_log_size(&t, &c, 10.0, 2.0);
        assert!((s.exact_log - 1.0).abs() < 1e-15 && (s.upper - 2.0).abs() < 1e-15);
        let pm = TypePmf::point_mass(2, Axis::X, 0);
        assert_eq!(type_class_log_size(&pm, &c, 1.0, 2.0).exact_log, 0.0);
        let t = TypePmf::from_pairs(6, Axis::X, &[(-1, 3), (0, 2), (1, 1)]).unwrap();
        let s = type_class_log_size(&t, &cfg(6, 0.3, 0.3), 10.0, 2.0);
        assert!((s.exact_log - 60f64.log2()).abs() < 1e-12);
        assert!(s.lower <= s.exact_log && s.exact_log <= s.upper);
        assert!((s.lower - (s.upper - 3.0 * 7f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn conditional_sizes() {
        let c = cfg(2, 0.3, 0.3);
        let pm = JointTypePmf::from_pairs(2, &[((0, 0), 2)]).unwrap();
        assert_eq!(cond_type_class_log_size(&pm, Axis::X, &c, 1.0, 1.0, 2.0).exact_log, 0.0);
        let j = JointTypePmf::from_pairs(4, &[((0, 0), 1), ((0, 1), 1), ((1, 0), 1), ((1, 1), 1)]).unwrap();
        let c4 = cfg(4, 0.3, 0.3);
        let s = cond_type_class_log_size(&j, Axis::X, &c4, 4.0, 4.0, 2.0);
        // 4!/(1!1!1!1!) / (4!/(2!2!)) = 4 sequences, per letter 2/4 bits.
        assert!((s.exact_log - 0.5).abs() < 1e-12);
        assert!(s.holds(1e-12));
    }

    #[test]
    fn mutual_information_of_types() {
        let prod = JointTypePmf::from_pairs(4, &[((0, 0), 1), ((0, 1), 1), ((1, 0), 1), ((1, 1), 1)]).unwrap();
        assert!(mutual_info_type(&prod, 2.0).abs() < 1e-15);
        let diag = JointTypePmf::from_pairs(2, &[((0, 0), 1), ((1, 1), 1)]).unwrap();
        assert!((mutual_info_type(&diag, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn channel_measure_divergence() {
        let ch = ChannelSpec::new(1.0, 1.0, std::f64::consts::E).unwrap();
        // n with Δ_β = 0.5: n^{-β} = 0.5 at n = 4, β = 0.5.
        let c = cfg(4, 0.25, 0.5);
        let pm = JointTypePmf::from_pairs(4, &[((0, 0), 4)]).unwrap();
        let want = (2.0 * (2.0 * PI).sqrt()).ln();
        assert!((kl_type_vs_channel_measure(&pm, &ch, &c) - want).abs() < 1e-12);
        let j = JointTypePmf::from_pairs(4, &[((0, 0), 1), ((0, 1), 1), ((1, -1), 2)]).unwrap();
        assert!((kl_type_vs_channel_measure(&j, &ch, &c) - kl_via_cond_entropy(&j, &ch, &c)).abs() < 1e-12);
    }

    #[test]
    fn canonical_text_round_trip() {
        let t = TypePmf::from_pairs(5, Axis::Y, &[(2, 1), (-1, 3), (0, 1)]).unwrap();
        let s = t.to_string();
        assert_eq!(s, "n=5; axis=Y; pairs=-1:3,0:1,2:1");
        assert_eq!(s.parse::<TypePmf>().unwrap(), t);
        assert!("n=5; axis=Y; pairs=2:1,-1:4".parse::<TypePmf>().is_err());
    }

    #[test]
    fn infeasible_correct_exponent() {
        let ch = ChannelSpec::new(1.0, 1.0, 2.0).unwrap();
        let c = cfg(4, 0.3, 0.35);
        // x = δ_α never lands on a multiple of δ_β, so zero distortion is impossible.
        let px = TypePmf::point_mass(4, Axis::X, 1);
        assert!(matches!(
            finite_n_correct_exponent(&px, 0.5, 1e-6, 0.0, &ch, &c),
            Err(Error::EmptyFeasibleSet(_))
        ));
    }

    #[test]
    fn error_bound_is_monotone_in_rate() {
        let ch = ChannelSpec::new(1.0, 1.0, 2.0).unwrap();
        let c = cfg(4, 0.3, 0.3);
        let px = TypePmf::from_pairs(4, Axis::X, &[(-1, 2), (1, 2)]).unwrap();
        let mut prev = f64::INFINITY;
        for r in [0.2, 0.4, 0.8, 1.6, 3.0] {
            let (v, _) = finite_n_error_exponent_bound(&px, r, 0.1, 2.0, &ch, &c).unwrap();
            let v = v.finite().unwrap_or(f64::INFINITY);
            assert!(v <= prev);
            prev = v;
        }
    }
}
