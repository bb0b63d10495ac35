//! Finite-n exponent objectives minimized over joint types at n = 6.

use awgn_reliability::type_system::{
    finite_n_correct_exponent, finite_n_error_exponent_bound, Axis, LatticeConfig, TypePmf,
};
use awgn_reliability::ChannelSpec;

fn main() -> awgn_reliability::Result<()> {
    let cfg = LatticeConfig::new(6, 0.3, 0.3)?;
    let ch = ChannelSpec::from_snr(1.0, 2.0)?;
    let p_x = TypePmf::from_sequence(Axis::X, &[-1, 0, 0, 1, 1, 0])?;
    for rate in [0.25, 0.5, 1.0, 1.5] {
        let c = finite_n_correct_exponent(&p_x, rate, 1.0, 0.1, &ch, &cfg)?;
        let (e, _) = finite_n_error_exponent_bound(&p_x, rate, 0.05, 1.5, &ch, &cfg)?;
        println!(
            "R = {rate:.2}: correct-decoding objective {:.6} over {} joint types, error bound {:?}",
            c.value, c.candidates, e
        );
    }
    Ok(())
}
