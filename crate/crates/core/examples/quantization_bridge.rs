//! Density-exponent sandwich on one pair, then the density-to-type audit.

use awgn_reliability::quantization_bridge::{bridge_audit, pdf_exponent_sandwich, QuantizedPair};
use awgn_reliability::type_system::LatticeConfig;
use awgn_reliability::ChannelSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> awgn_reliability::Result<()> {
    let ch = ChannelSpec::from_snr(1.0, 2.0)?;
    let cfg = LatticeConfig::new(2_000, 0.2, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<f64> = (0..cfg.n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let y: Vec<f64> = x.iter().map(|v| v + Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
    let pair = QuantizedPair::new(x, y, cfg)?;
    let (ok, v) = pdf_exponent_sandwich(&pair, &ch, pair.quantized_mean_sq_diff())?;
    println!("sandwich {ok}: {:.6} <= {:.6} <= {:.6}", v.lower, v.quantized_exponent, v.upper);

    let cfg = LatticeConfig::new(10_000, 0.2, 0.5)?;
    let (report, budgets) = bridge_audit(&cfg, &ch, 1, 4)?;
    print!("{}", report.to_csv());
    let b = &budgets[0];
    println!("h = {:.4}, h~ = {:.4}, preconditions met: {}, n_min = {:.3e}", b.h, b.h_tilde, b.preconditions_met, b.n_min);
    Ok(())
}
