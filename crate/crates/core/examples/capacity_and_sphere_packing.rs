//! Capacity and the sphere-packing exponent computed two ways.

use awgn_reliability::exponents::{capacity, error_exponent, shannon_sphere_packing};
use awgn_reliability::ChannelSpec;

fn main() -> awgn_reliability::Result<()> {
    for snr in [0.5, 1.0, 4.0, 10.0] {
        let ch = ChannelSpec::from_snr(snr, 2.0)?;
        let c = capacity(&ch);
        println!("SNR {snr}: C = {c:.6} bits");
        for frac in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let p = error_exponent(&ch, frac * c)?;
            let sp = shannon_sphere_packing(&ch, frac * c)?;
            println!("  R = {frac:.2}C  rho* = {:8.4}  E = {:.8}  closed form {:.8}", p.rho_star, p.exponent, sp);
        }
    }
    Ok(())
}
