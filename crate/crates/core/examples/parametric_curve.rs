//! Both exponent branches traced by the tilt parameter.

use awgn_reliability::exponents::parametric_curve;
use awgn_reliability::ChannelSpec;

fn main() -> awgn_reliability::Result<()> {
    let ch = ChannelSpec::from_snr(1.0, 2.0)?;
    let rhos: Vec<f64> = (0..=20).map(|i| -0.9 + 0.1 * i as f64).chain([2.0, 5.0, 10.0]).collect();
    println!("{:>6} {:>10} {:>10} kind", "rho", "rate", "exponent");
    for p in parametric_curve(&ch, &rhos)? {
        println!("{:6.2} {:10.6} {:10.6} {}", p.rho_star, p.rate, p.exponent, p.kind.as_str());
    }
    Ok(())
}
