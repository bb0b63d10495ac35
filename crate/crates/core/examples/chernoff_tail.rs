//! Empirical noise-power tail against its Chernoff bound.

use awgn_reliability::simulator::{chernoff_noise_tail, empirical_noise_tail, outlier_exponent};
use awgn_reliability::ChannelSpec;

fn main() -> awgn_reliability::Result<()> {
    let ch = ChannelSpec::from_snr(1.0, 2.0)?;
    let trials = 200_000;
    for ratio in [1.5, 2.0, 3.0] {
        println!("threshold {ratio} sigma^2, outlier exponent {:.5}", outlier_exponent(&ch, ratio)?);
        for n in [4, 8, 16, 32] {
            let hits = empirical_noise_tail(&ch, ratio, n, trials, 7);
            let bound = chernoff_noise_tail(&ch, ratio, n)?;
            println!("  n = {n:2}: {:.3e} <= {bound:.3e}", hits as f64 / trials as f64);
        }
    }
    Ok(())
}
