//! Exact lattice type counts next to their polynomial bounds.

use awgn_reliability::type_system::{counting_report, LatticeConfig, DEFAULT_CEILING};

fn main() -> awgn_reliability::Result<()> {
    for n in [2, 4, 6] {
        let cfg = LatticeConfig::new(n, 0.3, 0.3)?;
        let rep = counting_report(&cfg, 0.5, 0.5, true, DEFAULT_CEILING)?;
        println!("n = {n}");
        for (name, exact, bound, pass) in rep.rows() {
            let exact = exact.map_or("-".to_string(), |v| format!("{v:.4}"));
            println!("  {name:<30} {exact:>10} <= {bound:<12.4} {pass}");
        }
    }
    Ok(())
}
