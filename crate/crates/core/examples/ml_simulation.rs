//! Monte Carlo ML decoding: an exhaustive small code and the spherical ensemble.

use awgn_reliability::exponents::{capacity, rho_of_rate};
use awgn_reliability::simulator::{run, CodebookRule, DecodeMode, SimConfig};
use awgn_reliability::ChannelSpec;

fn main() -> awgn_reliability::Result<()> {
    let ch = ChannelSpec::from_snr(1.0, 2.0)?;
    let c = capacity(&ch);
    let small = SimConfig {
        n: 12,
        rate: 0.5 * c,
        channel: ch,
        rule: CodebookRule::GaussianIidProjected,
        mode: DecodeMode::Exhaustive,
        trials: 20_000,
        seed: 1,
        tilt_rho: None,
    };
    let r = run(&small)?;
    println!("n = 12, R = 0.5C: p_err {:.4} [{:.4}, {:.4}]", r.p_err.hat, r.p_err.ci_low, r.p_err.ci_high);

    let rate = 2.0 * c;
    let big = SimConfig {
        n: 128,
        rate,
        rule: CodebookRule::UniformSphere,
        mode: DecodeMode::SphericalEnsemble,
        tilt_rho: Some(rho_of_rate(&ch, rate)?),
        ..small
    };
    let r = run(&big)?;
    let t = r.tilted.expect("tilt requested");
    println!(
        "n = 128, R = 2C: correct-decoding exponent {:.4} (relative std err {:.3})",
        t.correct_exponent, t.rel_std_err
    );
    Ok(())
}
