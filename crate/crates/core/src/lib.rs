//! Executable checks for first-order arithmetic masking over Z/qZ.
//!
//! The crate answers one question about a circuit wire carrying a function of
//! two additive shares `s0 + s1 = x (mod q)`: does observing it reveal
//! anything about `x` when `s1` is uniform? Around that it collects the
//! supporting facts a masking verifier relies on:
//!
//! * [`zq`]: residue arithmetic for any runtime modulus and the share
//!   reparametrizations.
//! * [`wire`]: wire tables, value-independence, marginal histograms,
//!   verdicts, and exact mutual information.
//! * [`census`]: exhaustive classification of every Boolean wire for
//!   `q <= 5`.
//! * [`bias`]: residue counts of a `k`-bit generator reduced mod `q`.
//! * [`bitvec`]: overflow bounds and the URem word encoding.
//! * [`butterfly`]: a masked NTT butterfly testbed.
//! * [`cli`]: the `maskcheck` command line.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod bias;
pub mod bitvec;
pub mod butterfly;
pub mod census;
pub mod cli;
mod error;
pub mod wire;
pub mod zq;

pub use error::{Error, Result};
pub use wire::{Verdict, WireFunction};
pub use zq::{BitWord, Modulus, ZqElement};

/// Version tag carried by every JSON document the CLI emits.
pub const SCHEMA: &str = "maskcheck/1";

/// Stream id for a named randomized check, so each check draws from its own
/// ChaCha stream under a shared seed.
pub fn stream_id(name: &str) -> u64 {
    // FNV-1a
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Seeded generator for the named stream.
pub fn seeded_rng(seed: u64, stream: &str) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(stream));
    rng
}
