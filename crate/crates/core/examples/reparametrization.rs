//! Splitting a secret into two shares and recovering it, in Z_q and in
//! k-bit words.

use maskcheck::zq::{self, BitWord, Modulus, Q_MLKEM};

fn main() -> maskcheck::Result<()> {
    let q = Modulus::new(Q_MLKEM)?;
    let x = q.element(1234)?;
    let s1 = q.element(3000)?;
    let s0 = zq::arith_reparam(x, s1)?;
    println!("x = {}, s1 = {}  ->  s0 = x - s1 = {}", x.value(), s1.value(), s0.value());
    println!("s0 + s1 = {}", s0.add(s1)?.value());
    println!("x -> x - s1 is a bijection: {}", zq::arith_reparam_is_bijection(s1)?);

    let x = BitWord::new(8, 0b1010_0110)?;
    let m = BitWord::new(8, 0b0111_0001)?;
    let s0 = zq::bool_reparam(x, m)?;
    println!("boolean: {:08b} ^ {:08b} = {:08b}", x.bits(), m.bits(), s0.bits());
    println!("and back: {:08b}", zq::bool_reparam(s0, m)?.bits());
    Ok(())
}
