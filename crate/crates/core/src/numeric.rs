//! Small numerical kernels shared by the exponent and quantization code:
//! adaptive Gauss–Kronrod quadrature, bracketed root finding for monotone
//! functions and golden-section maximization.

use crate::error::{Error, Result};

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Subintervals with the largest error estimate are bisected until the
/// summed estimate drops below `abs_tol` or `max_intervals` is reached, in
/// which case [`Error::Quadrature`] carries the achieved estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<Integral> {
    integrate_with_limit(f, a, b, abs_tol, 4000)
}

pub fn integrate_with_limit<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    // Seed with a uniform partition so narrow features are not missed.
    let seeds = 16;
    let width = (b - a) / seeds as f64;
    let mut intervals: Vec<(f64, f64, f64, f64)> = (0..seeds)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == seeds { b } else { lo + width };
            let (v, e) = gk15(&f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    loop {
        let (value, error) = intervals
            .iter()
            .fold((0.0, 0.0), |(v, e), iv| (v + iv.2, e + iv.3));
        if !value.is_finite() {
            return Err(Error::Quadrature { achieved: f64::INFINITY });
        }
        if error <= abs_tol {
            return Ok(Integral { value, error });
        }
        if intervals.len() >= max_intervals {
            return Err(Error::Quadrature { achieved: error });
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty partition");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Quadrature { achieved: error });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Root of a strictly decreasing function on `[lo, hi]` with `f(lo) >= 0 >= f(hi)`.
///
/// Bisects until the bracket collapses to adjacent floats, so the returned
/// abscissa is as accurate as the function evaluation allows.
pub fn root_decreasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo.is_nan() || fhi.is_nan() {
        return Err(Error::domain("root bracket evaluates to NaN"));
    }
    if flo < 0.0 || fhi > 0.0 {
        return Err(Error::domain(format!(
            "root not bracketed: f({lo}) = {flo}, f({hi}) = {fhi}"
        )));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick the endpoint with the smaller residual.
    if f(lo).abs() <= f(hi).abs() {
        Ok(lo)
    } else {
        Ok(hi)
    }
}

/// Maximizer of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    // Endpoints are candidates too: the supremum may sit on the boundary.
    [(lo, f(lo)), (hi, f(hi)), (c, fc), (d, fd)]
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("four candidates")
}

/// `ln(exp(a) + exp(b) + ...)` without overflow.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_gaussian_mass() {
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let r = integrate(f, -12.0, 12.0, 1e-12).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_polynomial_exactly() {
        let r = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((r.value - 0.0).abs() < 1e-13);
    }

    #[test]
    fn reports_nonconvergence() {
        let r = integrate_with_limit(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, 1e-15, 20);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn decreasing_root() {
        let r = root_decreasing(|x| 2.0 - x * x, 0.0, 3.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(root_decreasing(|x| 2.0 - x, 3.0, 4.0).is_err());
    }

    #[test]
    fn golden_section_finds_interior_and_boundary_maxima() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8 && fx.abs() < 1e-15);
        let (x, _) = golden_section_max(|x| x, -1.0, 1.0, 1e-10);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn log_sum_exp_is_stable() {
        let v = log_sum_exp([-1000.0, -1000.0]);
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
