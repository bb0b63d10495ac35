//! The one-parameter family of Gaussian test channels that tilts the AWGN
//! channel `Y = X + Z` toward lower (ρ > 0) or higher (ρ < 0) mutual
//! information while keeping the Gaussian input `N(0, s²)`.
//!
//! Member ρ maps `x` to `N(k_ρ x, σ²_{Y|X}(ρ))` with
//! `σ²_{Y|X}(ρ) = (1+ρ) k_ρ σ²` and output variance `σ²_Y(ρ) = σ² + k_ρ s²`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest admissible ρ: the family degenerates as `1 + ρ → 0`.
pub const RHO_FLOOR: f64 = -1.0 + 1e-9;

const IDENTITY_TOL: f64 = 1e-12;

/// AWGN channel with power bound `s2`, noise variance `sigma2` and the
/// logarithm base used for every reported information quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub s2: f64,
    pub sigma2: f64,
    pub log_base: f64,
}

impl ChannelSpec {
    pub fn new(s2: f64, sigma2: f64, log_base: f64) -> Result<Self> {
        if !(s2 > 0.0 && s2.is_finite()) {
            return Err(Error::domain(format!("power s2 must be positive and finite, got {s2}")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::domain(format!("noise variance must be positive and finite, got {sigma2}")));
        }
        if !(log_base > 1.0 && log_base.is_finite()) {
            return Err(Error::domain(format!("log base must exceed 1, got {log_base}")));
        }
        let ch = ChannelSpec { s2, sigma2, log_base };
        let snr = ch.snr();
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::domain(format!("snr must be positive and finite, got {snr}")));
        }
        Ok(ch)
    }

    /// Channel with unit noise variance and the given SNR.
    pub fn from_snr(snr: f64, log_base: f64) -> Result<Self> {
        Self::new(snr, 1.0, log_base)
    }

    pub fn snr(&self) -> f64 {
        self.s2 / self.sigma2
    }

    pub fn ln_base(&self) -> f64 {
        self.log_base.ln()
    }

    /// Convert a value in nats into the channel's log base.
    pub fn from_nats(&self, nats: f64) -> f64 {
        nats / self.ln_base()
    }

    pub fn to_nats(&self, value: f64) -> f64 {
        value * self.ln_base()
    }

    /// Lipschitz constant shared by all members with ρ ≥ 0.
    pub fn lipschitz_k(&self) -> f64 {
        1.0 / (self.sigma2 * (2.0 * PI * std::f64::consts::E).sqrt())
    }
}

/// Tilt factor `k_ρ`, the positive root of `SNR k² − (SNR − ρ − 1) k − 1 = 0`.
///
/// The closed form stays finite at ρ = −1, where it reaches its upper
/// bound `½(1 + √(1 + 4/SNR))`; anything below that is rejected.
pub fn k_of_rho(channel: &ChannelSpec, rho: f64) -> Result<f64> {
    if !(rho >= -1.0) || !rho.is_finite() {
        return Err(Error::domain(format!("k_rho needs rho >= -1, got {rho}")));
    }
    if rho == 0.0 {
        return Ok(1.0);
    }
    let snr = channel.snr();
    let a = snr - rho - 1.0;
    let disc = (a * a + 4.0 * snr).sqrt();
    // Two algebraically equal forms; pick the one without cancellation.
    if a >= 0.0 {
        Ok((a + disc) / (2.0 * snr))
    } else {
        Ok(2.0 / (disc - a))
    }
}

/// One member of the family together with its variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoPoint {
    pub rho: f64,
    pub k_rho: f64,
    pub sigma2_yx: f64,
    pub sigma2_y: f64,
    pub channel: ChannelSpec,
}

/// Relative residuals of the three variance identities every member obeys.
#[derive(Debug, Clone, Copy)]
pub struct IdentityResiduals {
    pub output_marginal: f64,
    pub precision_balance: f64,
    pub conditional_variance: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.output_marginal
            .max(self.precision_balance)
            .max(self.conditional_variance)
    }
}

// Residual of `lhs = Σ terms`, scaled by the largest magnitude involved so that
// cancellation between terms does not inflate it.
fn scaled_residual(lhs: f64, terms: &[f64]) -> f64 {
    let sum: f64 = terms.iter().sum();
    let scale = terms.iter().fold(lhs.abs(), |m, t| m.max(t.abs()));
    (lhs - sum).abs() / scale.max(f64::MIN_POSITIVE)
}

impl RhoPoint {
    pub fn residuals(&self) -> IdentityResiduals {
        let ch = &self.channel;
        let k = self.k_rho;
        let rho = self.rho;
        IdentityResiduals {
            output_marginal: scaled_residual(self.sigma2_y, &[self.sigma2_yx, k * k * ch.s2]),
            precision_balance: scaled_residual(
                (1.0 + rho) / self.sigma2_yx,
                &[rho / self.sigma2_y, 1.0 / ch.sigma2],
            ),
            conditional_variance: scaled_residual(self.sigma2_yx, &[ch.sigma2, k * (1.0 - k) * ch.s2]),
        }
    }
}

pub fn make_rho_point(channel: &ChannelSpec, rho: f64) -> Result<RhoPoint> {
    if !(rho > RHO_FLOOR) || !rho.is_finite() {
        return Err(Error::domain(format!("rho must exceed {RHO_FLOOR}, got {rho}")));
    }
    let k = k_of_rho(channel, rho)?;
    let point = RhoPoint {
        rho,
        k_rho: k,
        sigma2_yx: (1.0 + rho) * k * channel.sigma2,
        sigma2_y: channel.sigma2 + k * channel.s2,
        channel: *channel,
    };
    let r = point.residuals();
    if r.max() > IDENTITY_TOL {
        return Err(Error::Numerical {
            what: format!("variance identity at rho = {rho}"),
            residual: r.max(),
        });
    }
    Ok(point)
}

/// Density of `N(k_ρ x, σ²_{Y|X}(ρ))` at `y`.
pub fn cond_density(point: &RhoPoint, x: f64, y: f64) -> f64 {
    let d = y - point.k_rho * x;
    (-d * d / (2.0 * point.sigma2_yx)).exp() / (2.0 * PI * point.sigma2_yx).sqrt()
}

/// `E[(Y − X)²]` when `E[X²] = sigma_x2` and `Y | X = x ~ N(k_ρ x, σ²_{Y|X})`.
pub fn expected_sq_noise(point: &RhoPoint, sigma_x2: f64) -> f64 {
    let ch = &point.channel;
    let one_k = 1.0 - point.k_rho;
    ch.sigma2 + one_k * ch.s2 + one_k * one_k * (sigma_x2 - ch.s2)
}

/// Conditional divergence from the family member to the channel, averaged
/// over the Gaussian input, in nats.
pub(crate) fn kl_nats(point: &RhoPoint) -> f64 {
    let ch = &point.channel;
    // v/σ² - 1 = (1+ρ)k - 1, kept in this form so small ρ stays accurate.
    let r = (1.0 + point.rho) * point.k_rho - 1.0;
    let one_k = 1.0 - point.k_rho;
    let shape = 0.5 * (r - r.ln_1p());
    shape.max(0.0) + one_k * one_k * ch.s2 / (2.0 * ch.sigma2)
}

pub(crate) fn mutual_info_nats(point: &RhoPoint) -> f64 {
    let k = point.k_rho;
    0.5 * (k * k * point.channel.s2 / point.sigma2_yx).ln_1p()
}

/// `D(p^(ρ) ‖ w | N(0, s²))` in the channel's log base.
pub fn kl_family_to_channel(channel: &ChannelSpec, point: &RhoPoint) -> f64 {
    channel.from_nats(kl_nats(point))
}

/// `I(N(0, s²), p^(ρ)) = ½ log(σ²_Y / σ²_{Y|X})` in the channel's log base.
pub fn mutual_info_rho(channel: &ChannelSpec, point: &RhoPoint) -> f64 {
    channel.from_nats(mutual_info_nats(point))
}

/// Coefficients of the affine-in-`s²` form of `D + ρ I`.
pub fn c0_c1(channel: &ChannelSpec, rho: f64) -> Result<(f64, f64)> {
    let p = make_rho_point(channel, rho)?;
    if rho == 0.0 {
        return Ok((0.0, 0.0));
    }
    let c0_nats = 0.5 * (channel.sigma2.ln() + rho * p.sigma2_y.ln() - (1.0 + rho) * p.sigma2_yx.ln());
    let c1_nats = (1.0 - p.k_rho) / (2.0 * channel.sigma2);
    Ok((channel.from_nats(c0_nats), channel.from_nats(c1_nats)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snr1(b: f64) -> ChannelSpec {
        ChannelSpec::new(1.0, 1.0, b).unwrap()
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelSpec::new(0.0, 1.0, 2.0).is_err());
        assert!(ChannelSpec::new(1.0, 0.0, 2.0).is_err());
        assert!(ChannelSpec::new(1.0, 1.0, 1.0).is_err());
        assert!(ChannelSpec::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn k_values() {
        let ch = snr1(2.0);
        assert_eq!(k_of_rho(&ch, 0.0).unwrap(), 1.0);
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!((k_of_rho(&ch, 1.0).unwrap() - golden).abs() < 1e-15);
        let upper = 0.5 * (1.0 + 5f64.sqrt());
        assert!((k_of_rho(&ch, -1.0).unwrap() - upper).abs() < 1e-15);
        assert!(k_of_rho(&ch, -1.0 - 1e-9).is_err());
    }

    #[test]
    fn k_is_bounded_and_decreasing() {
        for snr in [0.1, 1.0, 4.0, 100.0] {
            let ch = ChannelSpec::new(snr, 1.0, 2.0).unwrap();
            let upper = 0.5 * (1.0 + (1.0 + 4.0 / snr).sqrt());
            let mut prev = f64::INFINITY;
            for i in 0..400 {
                let rho = -0.999 + i as f64 * 0.05;
                let k = k_of_rho(&ch, rho).unwrap();
                assert!(k < prev);
                if rho >= 0.0 {
                    assert!(k > 0.0 && k <= 1.0);
                } else {
                    assert!(k >= 1.0 && k <= upper + 1e-15);
                }
                prev = k;
            }
        }
    }

    #[test]
    fn points_at_zero_and_one() {
        let ch = snr1(2.0);
        let p0 = make_rho_point(&ch, 0.0).unwrap();
        assert_eq!((p0.k_rho, p0.sigma2_yx, p0.sigma2_y), (1.0, 1.0, 2.0));
        let p1 = make_rho_point(&ch, 1.0).unwrap();
        let k1 = (5f64.sqrt() - 1.0) / 2.0;
        assert!((p1.sigma2_yx - 2.0 * k1).abs() < 1e-15);
        assert!((p1.sigma2_y - (1.0 + k1)).abs() < 1e-15);
        let p = make_rho_point(&ChannelSpec::new(4.0, 1.0, 2.0).unwrap(), -0.5).unwrap();
        assert!(p.residuals().precision_balance < 1e-12);
        assert!(make_rho_point(&ch, -1.0).is_err());
        assert!(make_rho_point(&ch, RHO_FLOOR).is_err());
    }

    #[test]
    fn density_values() {
        let ch = snr1(2.0);
        let p0 = make_rho_point(&ch, 0.0).unwrap();
        assert!((cond_density(&p0, 0.0, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        let p1 = make_rho_point(&ch, 1.0).unwrap();
        let v = p1.sigma2_yx;
        let want = (-(p1.k_rho * p1.k_rho) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
        assert!((cond_density(&p1, 1.0, 0.0) - want).abs() < 1e-15);
        let mode = cond_density(&p1, 0.7, 0.7 * p1.k_rho);
        assert!((mode - 1.0 / (2.0 * PI * v).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn noise_second_moment() {
        let ch = snr1(2.0);
        let p0 = make_rho_point(&ch, 0.0).unwrap();
        assert_eq!(expected_sq_noise(&p0, 3.7), 1.0);
        let p1 = make_rho_point(&ch, 1.0).unwrap();
        assert!((expected_sq_noise(&p1, 1.0) - 1.381_966_011_250_105).abs() < 1e-14);
        let eps = 0.3;
        for rho in [0.1, 1.0, 10.0] {
            let p = make_rho_point(&ch, rho).unwrap();
            assert!(expected_sq_noise(&p, ch.s2 + eps) <= ch.sigma2 + ch.s2 + eps);
        }
    }

    #[test]
    fn information_values() {
        let ch = ChannelSpec::new(3.0, 1.0, 2.0).unwrap();
        let p0 = make_rho_point(&ch, 0.0).unwrap();
        assert!((mutual_info_rho(&ch, &p0) - 1.0).abs() < 1e-15);
        assert_eq!(kl_family_to_channel(&ch, &p0), 0.0);
        let ch = snr1(2.0);
        let p1 = make_rho_point(&ch, 1.0).unwrap();
        let direct = 0.5 * (p1.sigma2_y / p1.sigma2_yx).log2();
        assert!((mutual_info_rho(&ch, &p1) - direct).abs() < 1e-15);
        assert!((direct - 0.194_242).abs() < 1e-6);
        let ph = make_rho_point(&ch, 0.5).unwrap();
        assert!(mutual_info_rho(&ch, &ph) > mutual_info_rho(&ch, &p1));
    }

    #[test]
    fn c0_c1_values() {
        let ch = snr1(std::f64::consts::E);
        assert_eq!(c0_c1(&ch, 0.0).unwrap(), (0.0, 0.0));
        let (_, c1) = c0_c1(&ch, 1.0).unwrap();
        assert!((c1 - 0.190_983_005_625_052_6).abs() < 1e-15);
        let (c0, _) = c0_c1(&ch, 1e4).unwrap();
        assert!(c0.abs() < 1e-2);
        assert!(c0_c1(&ch, -1.0).is_err());
    }

    // Gauss–Hermite nodes via Newton iteration on the orthonormal recurrence.
    fn gauss_hermite(m: usize) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); m];
        let mut z = 0.0f64;
        for i in 0..m.div_ceil(2) {
            z = match i {
                0 => (2.0 * m as f64 + 1.0).sqrt() - 1.85575 * (2.0 * m as f64 + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * (m as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * out[0].0,
                3 => 1.91 * z - 0.91 * out[1].0,
                _ => 2.0 * z - out[i - 2].0,
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = PI.powf(-0.25);
                let mut p2 = 0.0;
                for j in 0..m {
                    let p3 = p2;
                    p2 = p1;
                    p1 = z * (2.0 / (j + 1) as f64).sqrt() * p2 - (j as f64 / (j + 1) as f64).sqrt() * p3;
                }
                pp = (2.0 * m as f64).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / (pp * pp);
            out[i] = (z, w);
            out[m - 1 - i] = (-z, w);
        }
        out
    }

    #[test]
    fn kl_matches_two_dimensional_quadrature() {
        let ch = snr1(std::f64::consts::E);
        let nodes = gauss_hermite(96);
        for rho in [-0.5, 0.3, 2.0] {
            let p = make_rho_point(&ch, rho).unwrap();
            // x = √2 s u, y = k x + √2 σ_{Y|X} t
            let mut total = 0.0;
            for &(u, wu) in &nodes {
                let x = 2f64.sqrt() * ch.s2.sqrt() * u;
                for &(t, wt) in &nodes {
                    let y = p.k_rho * x + 2f64.sqrt() * p.sigma2_yx.sqrt() * t;
                    let ln_p = -(y - p.k_rho * x).powi(2) / (2.0 * p.sigma2_yx) - 0.5 * (2.0 * PI * p.sigma2_yx).ln();
                    let ln_w = -(y - x).powi(2) / (2.0 * ch.sigma2) - 0.5 * (2.0 * PI * ch.sigma2).ln();
                    total += wu * wt * (ln_p - ln_w);
                }
            }
            total /= PI;
            assert!((total - kl_family_to_channel(&ch, &p)).abs() < 1e-8, "rho {rho}: {total}");
        }
    }

    #[test]
    fn divergence_plus_information_is_affine_in_power() {
        for b in [2.0, std::f64::consts::E] {
            let ch = snr1(b);
            for i in 0..200 {
                let rho = -0.99 + (100.0 + 0.99) * (i as f64 + 1.0) / 200.0;
                let p = make_rho_point(&ch, rho).unwrap();
                let (c0, c1) = c0_c1(&ch, rho).unwrap();
                let lhs = kl_family_to_channel(&ch, &p) + rho * mutual_info_rho(&ch, &p);
                assert!((lhs - (c0 + c1 * ch.s2)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn members_with_nonnegative_rho_are_lipschitz() {
        let ch = ChannelSpec::new(2.0, 0.7, 2.0).unwrap();
        let k = ch.lipschitz_k();
        for rho in [0.0, 0.5, 3.0, 40.0] {
            let p = make_rho_point(&ch, rho).unwrap();
            let peak = 1.0 / (2.0 * PI * p.sigma2_yx).sqrt();
            assert!(peak <= k.sqrt() * (1.0 + 1e-12));
            for i in 0..2000 {
                let y1 = -6.0 + i as f64 * 0.006;
                let y2 = y1 + 0.0037;
                let d = (cond_density(&p, 0.4, y1) - cond_density(&p, 0.4, y2)).abs();
                assert!(d <= k * 0.0037 * (1.0 + 1e-9));
            }
        }
    }
}
