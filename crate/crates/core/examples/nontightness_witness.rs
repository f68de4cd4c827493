//! The wire `[s0 = 0]` has the same distribution for every secret, yet it is
//! not a function of the mask alone. A value-independence checker flags it
//! even though it leaks nothing.

use maskcheck::wire::{self, MarginalHistogram};
use maskcheck::zq::Modulus;

fn main() -> maskcheck::Result<()> {
    let q = Modulus::new(7)?;
    let w = wire::zero_share_witness(q)?;
    println!("verdict: {}", wire::classify(&w));
    println!("value-independent: {}", wire::is_value_independent(&w));

    let h = MarginalHistogram::of(&w);
    for x in 0..q.get() {
        let hit: Vec<u64> = (0..q.get()).filter(|&s1| w.eval_reparam(x, s1) == 1).collect();
        println!("x = {x}: h(x, .) = {:?}, output 1 only for s1 in {hit:?}", h.row(x));
    }
    println!("mutual information: {} bits", wire::mutual_information(&w).bits);

    let (a, b) = (q.element(2)?, q.element(5)?);
    println!(
        "s1 -> s1 + 3 maps the masks for x = 2 onto those for x = 5: {}",
        wire::translation_bijection_check(&w, a, b)?
    );
    Ok(())
}
