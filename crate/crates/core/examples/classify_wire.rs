//! Classifies a few wires over the shares of a secret at q = 5.
//!
//! Pass a wire file to classify it instead:
//! `cargo run --example classify_wire -- wire.json`.

use maskcheck::wire::{self, WireFile, WireFunction};
use maskcheck::zq::Modulus;

fn show(name: &str, w: &WireFunction) {
    let r = wire::analyze(w);
    println!("{name:<14} {:<24} MI = {:.6} bits", r.verdict.as_str(), r.mutual_information.bits);
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    if let Some(path) = std::env::args().nth(1) {
        let w = WireFunction::from_file(WireFile::read(&path)??)?;
        show(&path, &w);
        return Ok(());
    }

    let q = Modulus::new(5)?;
    show("s1", &WireFunction::from_fn(q, 5, |_, s1| s1 as u32)?);
    show("s0", &WireFunction::from_fn(q, 5, |s0, _| s0 as u32)?);
    show("s0 + s1", &WireFunction::from_fn(q, 5, |s0, s1| ((s0 + s1) % 5) as u32)?);
    show("[s0 = s1]", &WireFunction::boolean(q, |s0, s1| s0 == s1)?);
    show("[s0 < 2]", &WireFunction::boolean(q, |s0, _| s0 < 2)?);
    show("constant 1", &WireFunction::constant(q, 2, 1)?);
    Ok(())
}
