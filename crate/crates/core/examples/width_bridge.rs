//! Computing `(x - s1) mod q` on w-bit unsigned words as `(x + q - s1) urem q`.

use maskcheck::bitvec::{bounds_report, urem_reparam, width_admissible, WidthConfig};
use maskcheck::zq::Modulus;

fn main() -> maskcheck::Result<()> {
    for (q, w) in [(3329, 12), (3329, 13), (3329, 24), (8_380_417, 24), (8_388_608, 24)] {
        let cfg = WidthConfig::new(Modulus::new(q)?, w);
        let r = bounds_report(cfg);
        println!(
            "q = {q:>7}, w = {w}: x + q - s1 in [{}, {}], admissible: {}",
            r.intermediate_min, r.intermediate_max, r.admissible
        );
    }

    let cfg = WidthConfig::new(Modulus::new(3329)?, 24);
    assert!(width_admissible(cfg));
    let r = urem_reparam(cfg, 5, 3000)?;
    println!("x = 5, s1 = 3000: s0 = {}, s0 + s1 urem q = {}", r.s0, r.recombined);

    let narrow = WidthConfig::new(Modulus::new(3329)?, 12);
    match urem_reparam(narrow, 3328, 0) {
        Ok(r) => println!("12 bits: s0 = {}", r.s0),
        Err(e) => println!("12 bits: {e}"),
    }
    Ok(())
}
