//! Classifies every Boolean wire of two shares for q = 2..5.
//!
//! `cargo run --release --example census -- 5 4` runs q = 5 on 4 workers.

use maskcheck::census::{constant_marginal_count_formula, run_census, write_csv, MAX_CENSUS_Q};

fn main() -> maskcheck::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("numeric argument"));
    let qs: Vec<u64> = match args.next() {
        Some(q) => vec![q],
        None => (2..=MAX_CENSUS_Q).collect(),
    };
    let workers = args.next().map_or(1, |w| w as usize);

    for q in qs {
        let r = run_census(q, workers)?;
        println!(
            "q = {q}: {} wires, {} value-independent, {} constant marginal ({} expected), {} violations, {:.2?}",
            r.total_wires,
            r.count_value_independent,
            r.count_constant_marginal,
            constant_marginal_count_formula(q)?,
            r.soundness_violations,
            r.wall_time,
        );
        write_csv(&r, std::io::stdout()).expect("stdout");
    }
    Ok(())
}
