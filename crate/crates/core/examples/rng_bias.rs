//! How far a k-bit random value reduced mod q is from uniform.

use maskcheck::bias::{rng_profile, verify_bounds};
use maskcheck::zq::{Modulus, Q_MLDSA, Q_MLKEM};

fn main() -> maskcheck::Result<()> {
    for (bits, q) in [(12, Q_MLKEM), (16, Q_MLKEM), (24, Q_MLDSA), (23, Q_MLDSA), (8, 256)] {
        let p = rng_profile(bits, Modulus::new(q)?)?;
        println!(
            "2^{bits:<2} mod {q:>7}: counts in [{}, {}], max/min {}, bounds hold: {}",
            p.min_count,
            p.max_count,
            p.ratio,
            verify_bounds(&p),
        );
    }
    let p = rng_profile(12, Modulus::new(Q_MLKEM)?)?;
    println!("count(0) = {}, count(767) = {}", p.counts.get(0), p.counts.get(767));
    Ok(())
}
