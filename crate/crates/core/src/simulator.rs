//! Monte Carlo simulation of block coding over the AWGN channel: random
//! power-feasible codebooks, maximum-likelihood decoding, empirical error
//! and correct-decoding exponents, and the chi-square noise-power tail.
//!
//! Every random draw comes from a ChaCha8 stream selected by
//! `(seed, domain, index)`, so results do not depend on how rayon schedules
//! the trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::gauss_family::{make_rho_point, ChannelSpec};
use crate::numeric::log_sum_exp;

/// Largest codebook the exhaustive decoder will materialize.
pub const MAX_CODEWORDS: u64 = 1 << 20;

const Z95: f64 = 1.959_963_984_540_054;

// Stream domains; the trial or block index fills the low 40 bits.
const DOMAIN_CODEBOOK: u64 = 1;
const DOMAIN_TRIAL: u64 = 2;
const DOMAIN_TAIL: u64 = 3;
const DOMAIN_TILT: u64 = 4;

/// Random stream for `index` within `domain`.
pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 40) | (index & ((1 << 40) - 1)));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookRule {
    /// iid `N(0, s²(1 − 1/n))`, violating codewords rescaled onto the power sphere.
    GaussianIidProjected,
    /// Uniform on the sphere of radius `√(n s²)`.
    UniformSphere,
    /// Two codewords `±(s, …, s)`; needs `M = 2`.
    Antipodal,
}

impl std::str::FromStr for CodebookRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "gaussian_iid_projected" => Ok(CodebookRule::GaussianIidProjected),
            "sphere" | "uniform_sphere" => Ok(CodebookRule::UniformSphere),
            "antipodal" => Ok(CodebookRule::Antipodal),
            _ => Err(Error::domain(format!("unknown codebook rule {s:?}"))),
        }
    }
}

/// How trials are decoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    /// One materialized codebook, exhaustive ML search per trial.
    Exhaustive,
    /// Fresh uniform-sphere codebook per trial, never materialized: given
    /// the sent word and the output, the other `M − 1` words are iid on the
    /// sphere, so ML is correct with probability `(1 − q)^{M−1}` where `q`
    /// is the normalized area of the spherical cap closer to `y`.
    SphericalEnsemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub rate: f64,
    pub channel: ChannelSpec,
    pub rule: CodebookRule,
    pub mode: DecodeMode,
    pub trials: u64,
    pub seed: u64,
    /// ρ of the tilt used for importance-sampled correct decoding.
    #[serde(default)]
    pub tilt_rho: Option<f64>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.trials == 0 {
            return Err(Error::domain("block length and trial count must be positive"));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::domain(format!("rate must be positive, got {}", self.rate)));
        }
        if self.mode == DecodeMode::SphericalEnsemble && self.rule != CodebookRule::UniformSphere {
            return Err(Error::domain("the spherical ensemble mode needs the uniform-sphere rule"));
        }
        Ok(())
    }

    /// `b^{nR}` before flooring.
    fn size_real(&self) -> f64 {
        (self.n as f64 * self.rate * self.channel.ln_base()).exp()
    }

    /// `M = ⌊b^{nR}⌋` as a float; exact below 2⁵³.
    pub fn num_messages_f64(&self) -> f64 {
        (self.size_real() * (1.0 + 1e-12)).floor().max(1.0)
    }

    /// `M` as an integer when it fits under the exhaustive-decoding cap.
    pub fn num_messages(&self) -> Result<u64> {
        let m = self.num_messages_f64();
        if m > MAX_CODEWORDS as f64 {
            return Err(Error::CapExceeded { m, cap: MAX_CODEWORDS });
        }
        Ok(m as u64)
    }
}

/// Codewords stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub n: usize,
    words: Vec<f64>,
}

impl Codebook {
    pub fn from_words(n: usize, words: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 || words.is_empty() {
            return Err(Error::domain("codebook needs n > 0 and at least one word"));
        }
        let mut flat = Vec::with_capacity(n * words.len());
        for w in &words {
            if w.len() != n {
                return Err(Error::LengthMismatch { left: w.len(), right: n });
            }
            flat.extend_from_slice(w);
        }
        Ok(Codebook { n, words: flat })
    }

    pub fn len(&self) -> usize {
        self.words.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, m: usize) -> &[f64] {
        &self.words[m * self.n..(m + 1) * self.n]
    }

    /// Largest per-letter power `(1/n)Σx_k²` over the codebook.
    pub fn max_power(&self) -> f64 {
        self.words
            .chunks(self.n)
            .map(power)
            .fold(0.0, f64::max)
    }
}

fn power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

// Scale onto the power sphere, then step down until rounding no longer
// leaves the word a hair outside.
fn project(x: &mut [f64], s2: f64) {
    let p = power(x);
    if p <= s2 {
        return;
    }
    let mut scale = (s2 / p).sqrt();
    loop {
        let scaled: Vec<f64> = x.iter().map(|v| v * scale).collect();
        if power(&scaled) <= s2 {
            x.copy_from_slice(&scaled);
            return;
        }
        scale *= 1.0 - f64::EPSILON;
    }
}

fn sphere_point<R: Rng>(n: usize, s2: f64, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r = (n as f64 * s2).sqrt();
    for v in &mut x {
        *v *= r / norm;
    }
    project(&mut x, s2);
    x
}

/// Draws the `M` codewords of `cfg` with the rule's distribution.
pub fn gen_codebook<R: Rng>(cfg: &SimConfig, rng: &mut R) -> Result<Codebook> {
    cfg.validate()?;
    let m = cfg.num_messages()? as usize;
    let (n, s2) = (cfg.n, cfg.channel.s2);
    let words = match cfg.rule {
        CodebookRule::GaussianIidProjected => {
            let sd = (s2 * (1.0 - 1.0 / n as f64)).sqrt();
            (0..m)
                .map(|_| {
                    let mut x: Vec<f64> = (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
                    project(&mut x, s2);
                    x
                })
                .collect()
        }
        CodebookRule::UniformSphere => (0..m).map(|_| sphere_point(n, s2, rng)).collect(),
        CodebookRule::Antipodal => {
            if m != 2 {
                return Err(Error::domain(format!("antipodal codebooks need M = 2, got {m}")));
            }
            let a = s2.sqrt();
            vec![vec![-a; n], vec![a; n]]
        }
    };
    Codebook::from_words(n, words)
}

/// `y = x + z` with `z` iid `N(0, σ²)`.
pub fn transmit<R: Rng>(x: &[f64], channel: &ChannelSpec, rng: &mut R) -> Vec<f64> {
    let noise = Normal::new(0.0, channel.sigma2.sqrt()).expect("validated noise variance");
    x.iter().map(|&v| v + noise.sample(rng)).collect()
}

/// Decoder output; `Erasure` exists for general decoders, ML never emits it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Message(usize),
    Erasure,
}

/// Nearest codeword in Euclidean distance; ties go to the smallest index.
pub fn ml_decode(codebook: &Codebook, y: &[f64]) -> Decision {
    let mut best = (0, f64::INFINITY);
    for m in 0..codebook.len() {
        let d: f64 = codebook.word(m).iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (m, d);
        }
    }
    Decision::Message(best.0)
}

/// Probability estimate with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn wilson(successes: u64, trials: u64) -> Estimate {
    let t = trials as f64;
    let p = successes as f64 / t;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / t;
    let center = (p + z2 / (2.0 * t)) / denom;
    let half = Z95 * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    // The endpoints are exactly 0 or 1 at the extremes; rounding would smear them.
    let ci_low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let ci_high = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Estimate { hat: p, ci_low, ci_high }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub trials: u64,
    pub errors: u64,
    pub corrects: u64,
    pub p_err: Estimate,
    pub p_correct: Estimate,
    /// `−(1/n) log_b p̂_err`, present when at least one error was seen.
    pub emp_error_exponent: Option<f64>,
    pub emp_correct_exponent: Option<f64>,
    /// Ensemble mode only: trial averages of the conditional error and
    /// correct-decoding probabilities given the output.
    pub ensemble: Option<EnsembleEstimate>,
    /// Ensemble mode with a tilt: importance-sampled correct decoding.
    pub tilted: Option<TiltedEstimate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEstimate {
    pub p_err: f64,
    pub p_correct: f64,
    pub error_exponent: Option<f64>,
    pub correct_exponent: Option<f64>,
}

/// Correct-decoding probability estimated with noise drawn from the
/// ρ-family member `y ~ N(k_ρ x, σ²_{Y|X})` and reweighted by the exact
/// likelihood ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltedEstimate {
    pub rho: f64,
    pub ln_p_correct: f64,
    /// Standard error of the estimate relative to the estimate.
    pub rel_std_err: f64,
    pub correct_exponent: f64,
}

fn exponent_of(p: f64, n: usize, channel: &ChannelSpec) -> Option<f64> {
    (p > 0.0).then(|| -channel.from_nats(p.ln()) / n as f64)
}

/// Fraction of the sphere of radius `r` (in `n` dimensions) strictly closer
/// to `y` than distance `d`.
pub fn cap_fraction(n: usize, r: f64, y: &[f64], d2: f64) -> f64 {
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ny == 0.0 {
        return if r * r < d2 { 1.0 } else { 0.0 };
    }
    let c = (ny * ny + r * r - d2) / (2.0 * r * ny);
    if c >= 1.0 {
        return 0.0;
    }
    if c <= -1.0 {
        return 1.0;
    }
    if n == 1 {
        // Two points ±r: only the one on y's side can be closer.
        return 0.5;
    }
    let a = (n as f64 - 1.0) / 2.0;
    beta_reg(a, a, (1.0 - c) / 2.0)
}

// ln P[correct | x, y] = (M − 1) ln(1 − q) over the spherical ensemble.
fn ln_correct_given(others: f64, n: usize, r: f64, x: &[f64], y: &[f64]) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let q = cap_fraction(n, r, y, d2);
    if q >= 1.0 {
        f64::NEG_INFINITY
    } else {
        others * (-q).ln_1p()
    }
}

/// Runs `cfg.trials` independent transmissions and tallies the outcomes.
pub fn run(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let n = cfg.n;
    let ch = &cfg.channel;
    // (decoded correctly, P[correct | y], P[error | y])
    let outcomes: Vec<(bool, f64, f64)> = match cfg.mode {
        DecodeMode::Exhaustive => {
            let m = cfg.num_messages()?;
            let book = gen_codebook(cfg, &mut stream(cfg.seed, DOMAIN_CODEBOOK, 0))?;
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream(cfg.seed, DOMAIN_TRIAL, t);
                    let j = rng.random_range(0..m) as usize;
                    let y = transmit(book.word(j), ch, &mut rng);
                    let ok = ml_decode(&book, &y) == Decision::Message(j);
                    (ok, 0.0, 0.0)
                })
                .collect()
        }
        DecodeMode::SphericalEnsemble => {
            let others = cfg.num_messages_f64() - 1.0;
            let r = (n as f64 * ch.s2).sqrt();
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream(cfg.seed, DOMAIN_TRIAL, t);
                    let x = sphere_point(n, ch.s2, &mut rng);
                    let y = transmit(&x, ch, &mut rng);
                    let lc = ln_correct_given(others, n, r, &x, &y);
                    let u: f64 = rng.random();
                    (u < lc.exp(), lc.exp(), -lc.exp_m1())
                })
                .collect()
        }
    };
    let trials = cfg.trials;
    let corrects = outcomes.iter().filter(|o| o.0).count() as u64;
    let errors = trials - corrects;
    let p_err = wilson(errors, trials);
    let p_correct = wilson(corrects, trials);
    let ensemble = (cfg.mode == DecodeMode::SphericalEnsemble).then(|| {
        let t = trials as f64;
        let pc = outcomes.iter().map(|o| o.1).sum::<f64>() / t;
        let pe = outcomes.iter().map(|o| o.2).sum::<f64>() / t;
        EnsembleEstimate {
            p_err: pe,
            p_correct: pc,
            error_exponent: exponent_of(pe, n, ch),
            correct_exponent: exponent_of(pc, n, ch),
        }
    });
    let tilted = match (cfg.mode, cfg.tilt_rho) {
        (DecodeMode::SphericalEnsemble, Some(rho)) => Some(tilted_correct(cfg, rho)?),
        _ => None,
    };
    Ok(SimResult {
        trials,
        errors,
        corrects,
        emp_error_exponent: if errors > 0 { exponent_of(p_err.hat, n, ch) } else { None },
        emp_correct_exponent: if corrects > 0 { exponent_of(p_correct.hat, n, ch) } else { None },
        p_err,
        p_correct,
        ensemble,
        tilted,
    })
}

/// Importance-sampled probability of correct decoding over the spherical
/// ensemble, with outputs drawn from the ρ-family member instead of the channel.
pub fn tilted_correct(cfg: &SimConfig, rho: f64) -> Result<TiltedEstimate> {
    cfg.validate()?;
    let ch = &cfg.channel;
    let point = make_rho_point(ch, rho)?;
    let (k, v) = (point.k_rho, point.sigma2_yx);
    let n = cfg.n;
    let others = cfg.num_messages_f64() - 1.0;
    let r = (n as f64 * ch.s2).sqrt();
    let tilt = Normal::new(0.0, v.sqrt()).map_err(|e| Error::domain(e.to_string()))?;
    let ln_norm = 0.5 * (v / ch.sigma2).ln();
    let terms: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(cfg.seed, DOMAIN_TILT, t);
            let x = sphere_point(n, ch.s2, &mut rng);
            let mut ln_w = n as f64 * ln_norm;
            let y: Vec<f64> = x
                .iter()
                .map(|&xk| {
                    let e = tilt.sample(&mut rng);
                    let yk = k * xk + e;
                    let z = yk - xk;
                    ln_w += e * e / (2.0 * v) - z * z / (2.0 * ch.sigma2);
                    yk
                })
                .collect();
            ln_w + ln_correct_given(others, n, r, &x, &y)
        })
        .collect();
    let t = cfg.trials as f64;
    let ln_sum = log_sum_exp(terms.iter().copied());
    if ln_sum == f64::NEG_INFINITY {
        return Err(Error::Numerical { what: "every tilted trial has zero weight".into(), residual: 0.0 });
    }
    let ln_p = ln_sum - t.ln();
    // Relative spread of the weights around their mean.
    let second = log_sum_exp(terms.iter().map(|&a| 2.0 * a)) - t.ln();
    let rel_var = ((second - 2.0 * ln_p).exp() - 1.0).max(0.0);
    Ok(TiltedEstimate {
        rho,
        ln_p_correct: ln_p,
        rel_std_err: (rel_var / t).sqrt(),
        correct_exponent: -ch.from_nats(ln_p) / n as f64,
    })
}

/// `½[x − 1 − ln x]`, the large-deviation rate of the noise power.
fn noise_rate(x: f64) -> f64 {
    0.5 * (x - 1.0 - x.ln())
}

/// Chernoff bound `exp{−n·½[σ̃²/σ² − 1 − ln(σ̃²/σ²)]}` on
/// `P[(1/n)Σz_k² ≥ σ̃²]`.
pub fn chernoff_noise_tail(channel: &ChannelSpec, sigma_tilde2: f64, n: usize) -> Result<f64> {
    if !(sigma_tilde2 >= channel.sigma2) {
        return Err(Error::domain(format!(
            "threshold {sigma_tilde2} below the noise variance {}",
            channel.sigma2
        )));
    }
    Ok((-(n as f64) * noise_rate(sigma_tilde2 / channel.sigma2)).exp())
}

/// The same rate per letter, in the channel's log base.
pub fn outlier_exponent(channel: &ChannelSpec, sigma_tilde2: f64) -> Result<f64> {
    if !(sigma_tilde2 >= channel.sigma2) {
        return Err(Error::domain(format!(
            "threshold {sigma_tilde2} below the noise variance {}",
            channel.sigma2
        )));
    }
    Ok(channel.from_nats(noise_rate(sigma_tilde2 / channel.sigma2)))
}

const TAIL_BLOCK: u64 = 4096;

/// Number of trials, out of `trials`, in which `(1/n)Σz_k² ≥ σ̃²`.
pub fn empirical_noise_tail(channel: &ChannelSpec, sigma_tilde2: f64, n: usize, trials: u64, seed: u64) -> u64 {
    let noise = Normal::new(0.0, channel.sigma2.sqrt()).expect("validated noise variance");
    let blocks = trials.div_ceil(TAIL_BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, DOMAIN_TAIL, b);
            let len = TAIL_BLOCK.min(trials - b * TAIL_BLOCK);
            (0..len)
                .filter(|_| {
                    let s: f64 = (0..n).map(|_| noise.sample(&mut rng).powi(2)).sum();
                    s / n as f64 >= sigma_tilde2
                })
                .count() as u64
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, rate: f64, rule: CodebookRule) -> SimConfig {
        SimConfig {
            n,
            rate,
            channel: ChannelSpec::from_snr(1.0, 2.0).unwrap(),
            rule,
            mode: DecodeMode::Exhaustive,
            trials: 1000,
            seed: 11,
            tilt_rho: None,
        }
    }

    #[test]
    fn message_count_floor_and_cap() {
        assert_eq!(cfg(4, 0.5, CodebookRule::UniformSphere).num_messages().unwrap(), 4);
        assert_eq!(cfg(1, 0.1, CodebookRule::UniformSphere).num_messages().unwrap(), 1);
        let big = cfg(128, 0.25, CodebookRule::UniformSphere);
        assert!(matches!(big.num_messages(), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn codewords_respect_power() {
        for rule in [CodebookRule::GaussianIidProjected, CodebookRule::UniformSphere] {
            let c = cfg(6, 1.0, rule);
            let book = gen_codebook(&c, &mut stream(3, 0, 0)).unwrap();
            assert_eq!(book.len(), 64);
            assert!(book.max_power() <= c.channel.s2);
        }
    }

    #[test]
    fn midpoint_tie_goes_to_first() {
        let book = Codebook::from_words(1, vec![vec![-1.0], vec![1.0]]).unwrap();
        assert_eq!(ml_decode(&book, &[0.0]), Decision::Message(0));
        assert_eq!(ml_decode(&book, &[1.0]), Decision::Message(1));
        let dup = Codebook::from_words(1, vec![vec![2.0], vec![2.0]]).unwrap();
        assert_eq!(ml_decode(&dup, &[2.0]), Decision::Message(0));
    }

    #[test]
    fn chernoff_values() {
        let ch = ChannelSpec::from_snr(1.0, 2.0).unwrap();
        assert_eq!(chernoff_noise_tail(&ch, 1.0, 10).unwrap(), 1.0);
        let b = chernoff_noise_tail(&ch, 2.0, 10).unwrap();
        assert!((b - (-5.0 * (1.0 - 2f64.ln())).exp()).abs() < 1e-15);
        assert!(chernoff_noise_tail(&ch, 0.5, 10).is_err());
    }

    #[test]
    fn cap_fraction_matches_half_sphere() {
        // y on the sphere and d² = 2r²: the cap is the hemisphere around y.
        let y = [3.0, 0.0, 0.0, 0.0];
        let q = cap_fraction(4, 3.0, &y, 18.0);
        assert!((q - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wilson_contains_point() {
        let e = wilson(30, 100);
        assert!(e.ci_low < 0.3 && 0.3 < e.ci_high);
        let z = wilson(0, 100);
        assert_eq!(z.ci_low, 0.0);
    }
}
