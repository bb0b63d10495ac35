//! Capacity, the sphere-packing error exponent and the correct-decoding
//! exponent of the AWGN channel, both as a ρ-supremum over the Gaussian
//! family and in parametric form.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gauss_family::{self, make_rho_point, ChannelSpec, RhoPoint, RHO_FLOOR};

/// Smallest ρ actually evaluated: the first float above the rejected floor.
const RHO_LOW: f64 = RHO_FLOOR.next_up();
use crate::numeric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentKind {
    Error,
    CorrectDecoding,
}

impl ExponentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExponentKind::Error => "error",
            ExponentKind::CorrectDecoding => "correct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub rate: f64,
    pub rho_star: f64,
    pub exponent: f64,
    pub kind: ExponentKind,
}

/// Intermediate quantities of the closed-form sphere-packing exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShannonForm {
    pub a: f64,
    pub theta: f64,
    pub g: f64,
    pub exponent: f64,
}

/// `½ log_b(1 + SNR)`.
pub fn capacity(channel: &ChannelSpec) -> f64 {
    channel.from_nats(0.5 * channel.snr().ln_1p())
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!("rate must be positive and finite, got {rate}")));
    }
    Ok(())
}

/// Closed-form sphere-packing exponent with all intermediate quantities.
pub fn shannon_form(channel: &ChannelSpec, rate: f64) -> Result<ShannonForm> {
    check_rate(rate)?;
    let a = channel.snr().sqrt();
    // sin θ = 2^{-R} for R in bits is e^{-R} for R in nats.
    let r_nats = channel.to_nats(rate.min(capacity(channel)));
    let sin_t = (-r_nats).exp();
    let theta = sin_t.asin();
    let cos_t = theta.cos();
    let g = 0.5 * (a * cos_t + (a * a * cos_t * cos_t + 4.0).sqrt());
    let e_nats = 0.5 * a * a - 0.5 * a * g * cos_t - (g * sin_t).ln();
    // At and above capacity the form cancels to zero only up to rounding.
    let exponent = if rate >= capacity(channel) { 0.0 } else { channel.from_nats(e_nats).max(0.0) };
    Ok(ShannonForm { a, theta, g, exponent })
}

/// Shannon's sphere-packing exponent `E_sp(R)`; zero for `R ≥ C`.
pub fn shannon_sphere_packing(channel: &ChannelSpec, rate: f64) -> Result<f64> {
    Ok(shannon_form(channel, rate)?.exponent)
}

fn objective_at(channel: &ChannelSpec, p: &RhoPoint, rate: f64) -> f64 {
    let d = gauss_family::kl_family_to_channel(channel, p);
    let i = gauss_family::mutual_info_rho(channel, p);
    d + p.rho * (i - rate)
}

/// `D(p^(ρ) ‖ w | N(0,s²)) + ρ [I(ρ) − R]`.
pub fn exponent_objective(channel: &ChannelSpec, rho: f64, rate: f64) -> Result<f64> {
    let p = make_rho_point(channel, rho)?;
    Ok(objective_at(channel, &p, rate))
}

fn info_at(channel: &ChannelSpec, rho: f64) -> f64 {
    match make_rho_point(channel, rho) {
        Ok(p) => gauss_family::mutual_info_rho(channel, &p),
        Err(_) => f64::NAN,
    }
}

/// The unique ρ with `I(ρ) = rate`.
pub fn rho_of_rate(channel: &ChannelSpec, rate: f64) -> Result<f64> {
    check_rate(rate)?;
    let c = capacity(channel);
    if rate == c {
        return Ok(0.0);
    }
    let f = |rho: f64| info_at(channel, rho) - rate;
    if rate < c {
        let mut hi = 1.0;
        while f(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::domain(format!("rate {rate} too small to bracket")));
            }
        }
        numeric::root_decreasing(f, 0.0, hi)
    } else {
        if f(RHO_LOW) < 0.0 {
            return Err(Error::UnboundedBracket { rate, rho_floor: RHO_LOW });
        }
        numeric::root_decreasing(f, RHO_LOW, 0.0)
    }
}

fn point_at(channel: &ChannelSpec, rate: f64, rho: f64, kind: ExponentKind) -> Result<ExponentPoint> {
    let p = make_rho_point(channel, rho)?;
    Ok(ExponentPoint {
        rate,
        rho_star: rho,
        exponent: objective_at(channel, &p, rate).max(0.0),
        kind,
    })
}

/// `E_e(R) = sup_{ρ ≥ 0}` of the exponent objective.
pub fn error_exponent(channel: &ChannelSpec, rate: f64) -> Result<ExponentPoint> {
    check_rate(rate)?;
    if rate >= capacity(channel) {
        return Ok(ExponentPoint { rate, rho_star: 0.0, exponent: 0.0, kind: ExponentKind::Error });
    }
    match rho_of_rate(channel, rate) {
        Ok(rho) => point_at(channel, rate, rho, ExponentKind::Error),
        Err(_) => {
            let obj = |rho: f64| exponent_objective(channel, rho, rate).unwrap_or(f64::NEG_INFINITY);
            let (rho, _) = numeric::golden_section_max(obj, 0.0, 1e6, 1e-9);
            point_at(channel, rate, rho, ExponentKind::Error)
        }
    }
}

/// `E_c(R) = sup_{−1 < ρ ≤ 0}` of the exponent objective.
///
/// Rates beyond the information reachable at the smallest admissible ρ fall
/// back to a direct search, which then settles on that boundary.
pub fn correct_decoding_exponent(channel: &ChannelSpec, rate: f64) -> Result<ExponentPoint> {
    check_rate(rate)?;
    if rate <= capacity(channel) {
        return Ok(ExponentPoint {
            rate,
            rho_star: 0.0,
            exponent: 0.0,
            kind: ExponentKind::CorrectDecoding,
        });
    }
    match rho_of_rate(channel, rate) {
        Ok(rho) => point_at(channel, rate, rho, ExponentKind::CorrectDecoding),
        Err(_) => {
            let obj = |rho: f64| exponent_objective(channel, rho, rate).unwrap_or(f64::NEG_INFINITY);
            let (rho, _) = numeric::golden_section_max(obj, RHO_LOW, 0.0, 1e-12);
            point_at(channel, rate, rho, ExponentKind::CorrectDecoding)
        }
    }
}

/// Exponent curve traced by ρ: each point has rate `I(ρ)` and exponent `D(ρ)`.
pub fn parametric_curve(channel: &ChannelSpec, rho_grid: &[f64]) -> Result<Vec<ExponentPoint>> {
    rho_grid
        .iter()
        .map(|&rho| {
            let p = make_rho_point(channel, rho)?;
            Ok(ExponentPoint {
                rate: gauss_family::mutual_info_rho(channel, &p),
                rho_star: rho,
                exponent: gauss_family::kl_family_to_channel(channel, &p),
                kind: if rho > 0.0 { ExponentKind::Error } else { ExponentKind::CorrectDecoding },
            })
        })
        .collect()
}

/// Finitely supported input distribution on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePmf {
    atoms: Vec<(f64, f64)>,
}

impl DiscretePmf {
    /// Atoms are `(value, probability)` pairs; probabilities must sum to one.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("empty distribution"));
        }
        if atoms.iter().any(|&(x, p)| !x.is_finite() || !(p >= 0.0)) {
            return Err(Error::domain("atoms need finite values and nonnegative mass"));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("probabilities sum to {total}")));
        }
        Ok(DiscretePmf { atoms })
    }

    pub fn point_mass(x: f64) -> Self {
        DiscretePmf { atoms: vec![(x, 1.0)] }
    }

    /// `N(0, variance)` discretized on `atoms` equispaced points over ±8 standard
    /// deviations, then scaled so that the second moment is exactly `variance`.
    pub fn quantized_gaussian(variance: f64, atoms: usize) -> Result<Self> {
        if atoms < 2 || !(variance > 0.0) {
            return Err(Error::domain("need at least two atoms and positive variance"));
        }
        let sd = variance.sqrt();
        let step = 16.0 * sd / (atoms - 1) as f64;
        let raw: Vec<(f64, f64)> = (0..atoms)
            .map(|i| {
                let x = -8.0 * sd + step * i as f64;
                (x, (-0.5 * x * x / variance).exp())
            })
            .collect();
        let z: f64 = raw.iter().map(|a| a.1).sum();
        let m2: f64 = raw.iter().map(|a| a.0 * a.0 * a.1 / z).sum();
        let scale = (variance / m2).sqrt();
        Ok(DiscretePmf {
            atoms: raw.into_iter().map(|(x, w)| (x * scale, w / z)).collect(),
        })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|&(x, p)| x * x * p).sum()
    }

    fn extent(&self) -> (f64, f64) {
        self.atoms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
            (lo.min(a.0), hi.max(a.0))
        })
    }
}

fn ln_normal(y: f64, mean: f64, var: f64) -> f64 {
    let d = y - mean;
    -d * d / (2.0 * var) - 0.5 * (2.0 * PI * var).ln()
}

// Log-density of Σ_x P(x) N(k x, v) at y.
fn ln_mixture(p_x: &DiscretePmf, k: f64, v: f64, y: f64) -> f64 {
    numeric::log_sum_exp(
        p_x.atoms
            .iter()
            .filter(|a| a.1 > 0.0)
            .map(|&(x, p)| p.ln() + ln_normal(y, k * x, v)),
    )
}

const QUAD_TOL: f64 = 1e-9;

fn mixture_range(p_x: &DiscretePmf, k: f64, v: f64) -> (f64, f64) {
    let (lo, hi) = p_x.extent();
    let (m_lo, m_hi) = if k >= 0.0 { (k * lo, k * hi) } else { (k * hi, k * lo) };
    let w = 10.0 * v.sqrt();
    (m_lo - w, m_hi + w)
}

/// `D(Σ_x P(x) N(k_ρ x, σ²_{Y|X}) ‖ N(0, σ²_Y(ρ)))` by adaptive quadrature.
pub fn marginal_mixture_kl(p_x: &DiscretePmf, point: &RhoPoint) -> Result<f64> {
    let (k, v, vy) = (point.k_rho, point.sigma2_yx, point.sigma2_y);
    let (a, b) = mixture_range(p_x, k, v);
    let r = numeric::integrate(
        |y| {
            let lp = ln_mixture(p_x, k, v, y);
            lp.exp() * (lp - ln_normal(y, 0.0, vy))
        },
        a,
        b,
        QUAD_TOL,
    )?;
    Ok(point.channel.from_nats(r.value.max(0.0)))
}

/// Outcome of checking the decomposition
/// `I(P_X, w) = C + (E[X²] − s²) / (2 ln b (s² + σ²)) − D(p_Y ‖ N(0, s² + σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionCheck {
    pub mutual_info: f64,
    pub rhs: f64,
    pub residual: f64,
}

pub fn capacity_decomposition_check(p_x: &DiscretePmf, channel: &ChannelSpec) -> Result<DecompositionCheck> {
    let m2 = p_x.second_moment();
    if m2 > channel.s2 * (1.0 + 1e-12) {
        return Err(Error::ConstraintViolation {
            what: "input second moment".into(),
            value: m2,
            limit: channel.s2,
        });
    }
    let v = channel.sigma2;
    let vy = channel.s2 + channel.sigma2;
    let (a, b) = mixture_range(p_x, 1.0, v);
    // h(Y) and D(p_Y ‖ N(0, s²+σ²)) are integrated separately on purpose.
    let neg_h_y = numeric::integrate(
        |y| {
            let lp = ln_mixture(p_x, 1.0, v, y);
            lp.exp() * lp
        },
        a,
        b,
        QUAD_TOL,
    )?;
    let d_y = numeric::integrate(
        |y| {
            let lp = ln_mixture(p_x, 1.0, v, y);
            lp.exp() * (lp - ln_normal(y, 0.0, vy))
        },
        a,
        b,
        QUAD_TOL,
    )?;
    let h_noise = 0.5 * (2.0 * PI * std::f64::consts::E * v).ln();
    let mutual_info = channel.from_nats(-neg_h_y.value - h_noise);
    let rhs = capacity(channel) + (m2 - channel.s2) / (2.0 * channel.ln_base() * vy) - channel.from_nats(d_y.value);
    Ok(DecompositionCheck {
        mutual_info,
        rhs,
        residual: (mutual_info - rhs).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss_family::kl_family_to_channel;

    fn ch(snr: f64, b: f64) -> ChannelSpec {
        ChannelSpec::new(snr, 1.0, b).unwrap()
    }

    #[test]
    fn capacity_values() {
        assert_eq!(capacity(&ch(3.0, 2.0)), 1.0);
        assert_eq!(capacity(&ch(15.0, 2.0)), 2.0);
        assert!(capacity(&ch(1e-300, 2.0)) < 1e-299);
    }

    #[test]
    fn sphere_packing_boundary() {
        for snr in [0.5, 1.0, 4.0, 10.0] {
            let c = ch(snr, 2.0);
            let cap = capacity(&c);
            assert!(shannon_sphere_packing(&c, cap).unwrap() < 1e-9);
            assert_eq!(shannon_sphere_packing(&c, 2.0 * cap).unwrap(), shannon_sphere_packing(&c, cap).unwrap());
        }
        assert!(shannon_sphere_packing(&ch(1.0, 2.0), 0.0).is_err());
    }

    #[test]
    fn sphere_packing_agrees_with_supremum() {
        let c = ch(1.0, 2.0);
        let e = error_exponent(&c, 0.25).unwrap();
        assert!((e.exponent - shannon_sphere_packing(&c, 0.25).unwrap()).abs() < 1e-6);
        assert!(e.rho_star > 0.0);
    }

    #[test]
    fn objective_values() {
        let c = ch(1.0, std::f64::consts::E);
        assert_eq!(exponent_objective(&c, 0.0, 0.3).unwrap(), 0.0);
        let (c0, c1) = gauss_family::c0_c1(&c, 1.0).unwrap();
        assert!((exponent_objective(&c, 1.0, 0.1).unwrap() - (c0 + c1 - 0.1)).abs() < 1e-12);
        for rate in [0.1, 0.5, 2.0] {
            let h = 1e-3;
            for i in 1..200 {
                let rho = -0.95 + i as f64 * 0.02;
                let f = |r: f64| exponent_objective(&c, r, rate).unwrap();
                assert!(f(rho + h) - 2.0 * f(rho) + f(rho - h) <= 1e-9);
            }
        }
    }

    #[test]
    fn error_exponent_limits() {
        let c = ch(1.0, std::f64::consts::E);
        let cap = capacity(&c);
        let at_c = error_exponent(&c, cap).unwrap();
        assert_eq!((at_c.exponent, at_c.rho_star), (0.0, 0.0));
        let e4 = error_exponent(&c, 1e-4).unwrap().exponent;
        let e6 = error_exponent(&c, 1e-6).unwrap().exponent;
        assert!(e4 < e6 + 1e-3);
        assert!(e4 < 0.5 && e6 < 0.5);
    }

    #[test]
    fn correct_decoding_values() {
        let c = ch(1.0, 2.0);
        let cap = capacity(&c);
        for r in [0.1, 0.3, cap] {
            let p = correct_decoding_exponent(&c, r).unwrap();
            assert_eq!((p.exponent, p.rho_star), (0.0, 0.0));
        }
        let p = correct_decoding_exponent(&c, 2.0 * cap).unwrap();
        let pt = make_rho_point(&c, p.rho_star).unwrap();
        assert!((gauss_family::mutual_info_rho(&c, &pt) - 2.0 * cap).abs() < 1e-12);
        assert!((p.exponent - kl_family_to_channel(&c, &pt)).abs() < 1e-8);
        assert!(p.rho_star < 0.0 && p.rho_star > -1.0);
    }

    #[test]
    fn far_beyond_capacity_dominates_members() {
        let c = ch(1.0, 2.0);
        let r = 20.0 * capacity(&c);
        let p = correct_decoding_exponent(&c, r).unwrap();
        assert!(p.exponent >= exponent_objective(&c, -0.5, r).unwrap());
        assert!(p.exponent >= exponent_objective(&c, -1.0 + 1e-6, r).unwrap() - 1e-12);
    }

    #[test]
    fn rate_round_trip() {
        let c = ch(1.0, 2.0);
        assert_eq!(rho_of_rate(&c, capacity(&c)).unwrap(), 0.0);
        let p1 = make_rho_point(&c, 1.0).unwrap();
        let r1 = gauss_family::mutual_info_rho(&c, &p1);
        assert!((rho_of_rate(&c, r1).unwrap() - 1.0).abs() < 1e-9);
        assert!(matches!(rho_of_rate(&c, 1e3), Err(Error::UnboundedBracket { .. })));
    }

    #[test]
    fn parametric_shape() {
        let c = ch(1.0, 2.0);
        let pts = parametric_curve(&c, &[-0.5, -0.25, 0.0, 0.5, 1.0]).unwrap();
        assert_eq!(pts[2].rate, capacity(&c));
        assert_eq!(pts[2].exponent, 0.0);
        for w in pts.windows(2) {
            assert!(w[0].rate > w[1].rate);
        }
        assert!(pts[0].exponent > pts[1].exponent && pts[4].exponent > pts[3].exponent);
        assert!(parametric_curve(&c, &[-1.0]).is_err());
    }

    #[test]
    fn mixture_kl_point_mass_is_gaussian_kl() {
        let c = ch(1.0, std::f64::consts::E);
        let p = make_rho_point(&c, 0.7).unwrap();
        let got = marginal_mixture_kl(&DiscretePmf::point_mass(0.0), &p).unwrap();
        let r = p.sigma2_yx / p.sigma2_y;
        let want = 0.5 * (r - 1.0 - r.ln());
        assert!((got - want).abs() < 1e-8);
    }

    #[test]
    fn mixture_kl_for_binary_input_is_positive() {
        let c = ch(1.0, 2.0);
        let p = make_rho_point(&c, 0.0).unwrap();
        let two = DiscretePmf::new(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert!(marginal_mixture_kl(&two, &p).unwrap() > 0.01);
    }

    #[test]
    fn decomposition_point_mass() {
        let c = ch(1.0, 2.0);
        let r = capacity_decomposition_check(&DiscretePmf::point_mass(0.0), &c).unwrap();
        assert!(r.mutual_info.abs() < 1e-8);
        assert!(r.residual < 1e-6);
        let ratio: f64 = 0.5;
        let d = 0.5 * (ratio - 1.0 - ratio.ln()) / 2f64.ln();
        let want = capacity(&c) - 1.0 / (2.0 * 2f64.ln() * 2.0) - d;
        assert!((r.rhs - want).abs() < 1e-8);
    }

    #[test]
    fn decomposition_rejects_excess_power() {
        let c = ch(1.0, 2.0);
        let two = DiscretePmf::new(vec![(-2.0, 0.5), (2.0, 0.5)]).unwrap();
        assert!(matches!(capacity_decomposition_check(&two, &c), Err(Error::ConstraintViolation { .. })));
    }
}
