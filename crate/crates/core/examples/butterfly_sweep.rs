//! Masked butterfly networks: evaluate one share by share, then classify
//! every internal signal over a range of twiddles.

use maskcheck::butterfly::{conjecture_sweep, MaskedValue, Pipeline, SweepConfig};
use maskcheck::zq::Modulus;

fn main() -> maskcheck::Result<()> {
    let q = Modulus::new(3329)?;
    let p = Pipeline::from_twiddles(q, &[17, 1729])?;
    let x: Vec<_> = [1u64, 2, 3, 4].iter().map(|&v| q.element(v)).collect::<Result<_, _>>()?;
    let masks = [100u64, 2000, 3000, 5];
    let shares: Vec<_> = x
        .iter()
        .zip(masks)
        .map(|(&v, m)| MaskedValue::mask(v, q.element(m)?))
        .collect::<Result<_, _>>()?;
    let plain = p.run_plain(&x)?;
    let masked = p.run_masked(&shares)?;
    for (a, b) in plain.iter().zip(&masked) {
        println!("plain {:>4}  masked ({:>4}, {:>4}) -> {:>4}", a.value(), b.share0.value(), b.share1.value(), b.recombine().value());
    }

    for (q, stages) in [(5, 1), (5, 2), (7, 3)] {
        let r = conjecture_sweep(&SweepConfig::new(q, stages), false)?;
        println!(
            "q = {q}, {stages} stage(s): {} configurations, per-share non-constant: {}, recombined flagged: {}, clean: {}",
            r.configurations,
            r.sharewise.non_constant_marginal,
            r.adversarial.non_constant_marginal + r.adversarial.constant_marginal_only,
            r.clean(),
        );
    }
    Ok(())
}
