//! Exhaustive census of every Boolean wire function at small `q`.
//!
//! A Boolean wire over `Z_q x Z_q` is a `q^2`-bit integer whose bit
//! `s0 * q + s1` is `w(s0, s1)`; wire index `i` is that integer. At `q = 5`
//! there are `2^25` of them. Each one is classified with two families of
//! precomputed bitmasks:
//!
//! * column `s1`: the cells `(s0, s1)` for all `s0`. Because `x -> x - s1` is a
//!   bijection, the reparametrized row for mask `s1` is exactly this column, so
//!   the wire is value-independent iff every column is all-zero or all-one.
//! * diagonal `x`: the cells `(x - s1, s1)` for all `s1`. The popcount of the
//!   wire under diagonal `x` is `h(x, 1)`, so the marginal is constant iff all
//!   diagonals have equal popcount.
//!
//! Work is split into contiguous index ranges and merged by addition, so the
//! counts do not depend on the worker count.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wire::{self, MarginalHistogram, Verdict, WireFunction};
use crate::zq::Modulus;

/// Largest modulus the census enumerates (`q^2 <= 25`).
pub const MAX_CENSUS_Q: u64 = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub q: u64,
    pub total_wires: u64,
    pub count_value_independent: u64,
    pub count_constant_marginal: u64,
    /// Constant marginal but not value-independent.
    pub count_conservative: u64,
    pub count_non_constant: u64,
    /// Value-independent wires whose marginal is not constant. Always zero.
    pub soundness_violations: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl CensusReport {
    pub fn check_invariants(&self) -> bool {
        self.total_wires == self.count_constant_marginal + self.count_non_constant
            && self.count_value_independent <= self.count_constant_marginal
            && self.count_conservative
                == self.count_constant_marginal - self.count_value_independent
            && self.soundness_violations == 0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    value_independent: u64,
    constant_marginal: u64,
    violations: u64,
}

impl std::ops::Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            value_independent: self.value_independent + o.value_independent,
            constant_marginal: self.constant_marginal + o.constant_marginal,
            violations: self.violations + o.violations,
        }
    }
}

/// Precomputed bit layouts for one modulus.
#[derive(Clone, Debug)]
pub struct PackedLayout {
    q: u64,
    columns: Vec<u32>,
    diagonals: Vec<u32>,
}

impl PackedLayout {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::ZeroModulus);
        }
        if q > MAX_CENSUS_Q {
            return Err(Error::CensusTooLarge(q));
        }
        // cell[x][s1] = bit index of (x - s1, s1)
        let cell = |x: u64, s1: u64| ((x + q - s1) % q) * q + s1;
        let columns = (0..q)
            .map(|s1| (0..q).fold(0u32, |m, s0| m | 1 << (s0 * q + s1)))
            .collect();
        let diagonals = (0..q)
            .map(|x| (0..q).fold(0u32, |m, s1| m | 1 << cell(x, s1)))
            .collect();
        Ok(Self {
            q,
            columns,
            diagonals,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn wire_count(&self) -> u64 {
        1u64 << (self.q * self.q)
    }

    #[inline]
    pub fn is_value_independent(&self, wire: u32) -> bool {
        self.columns.iter().all(|&c| {
            let bits = wire & c;
            bits == 0 || bits == c
        })
    }

    #[inline]
    pub fn has_constant_marginal(&self, wire: u32) -> bool {
        let first = (wire & self.diagonals[0]).count_ones();
        self.diagonals[1..]
            .iter()
            .all(|&d| (wire & d).count_ones() == first)
    }

    #[inline]
    pub fn classify(&self, wire: u32) -> Verdict {
        if self.is_value_independent(wire) {
            Verdict::ValueIndependent
        } else if self.has_constant_marginal(wire) {
            Verdict::ConstantMarginalOnly
        } else {
            Verdict::NonConstantMarginal
        }
    }

    fn tally(&self, range: std::ops::Range<u64>) -> Tally {
        let mut t = Tally::default();
        for i in range {
            let wire = i as u32;
            if self.is_value_independent(wire) {
                t.value_independent += 1;
                if self.has_constant_marginal(wire) {
                    t.constant_marginal += 1;
                } else {
                    t.violations += 1;
                }
            } else if self.has_constant_marginal(wire) {
                t.constant_marginal += 1;
            }
        }
        t
    }
}

/// Classifies every Boolean wire at modulus `q` (`q <= 5`) on `workers`
/// threads.
pub fn run_census(q: u64, workers: usize) -> Result<CensusReport> {
    if workers == 0 {
        return Err(Error::NoWorkers);
    }
    let layout = PackedLayout::new(q)?;
    let start = Instant::now();
    let total = layout.wire_count();
    let chunk = total.div_ceil(workers as u64).max(1);
    let ranges: Vec<_> = (0..workers as u64)
        .map(|k| (k * chunk).min(total)..((k + 1) * chunk).min(total))
        .collect();

    let tally = if workers == 1 {
        layout.tally(0..total)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .into_iter()
                .map(|r| {
                    let layout = &layout;
                    scope.spawn(move || layout.tally(r))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("census worker panicked"))
                .fold(Tally::default(), |a, b| a + b)
        })
    };

    Ok(CensusReport {
        q,
        total_wires: total,
        count_value_independent: tally.value_independent,
        count_constant_marginal: tally.constant_marginal,
        count_conservative: tally.constant_marginal - tally.value_independent,
        count_non_constant: total - tally.constant_marginal,
        soundness_violations: tally.violations,
        wall_time: start.elapsed(),
    })
}

/// `sum_{k=0}^{q} C(q, k)^q`: wires whose `q` diagonals all carry the same
/// number of ones.
pub fn constant_marginal_count_formula(q: u64) -> Result<u128> {
    if q == 0 {
        return Err(Error::ZeroModulus);
    }
    if q > MAX_CENSUS_Q {
        return Err(Error::CensusTooLarge(q));
    }
    let binom = |n: u64, k: u64| -> u128 { (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) };
    Ok((0..=q).map(|k| binom(q, k).pow(q as u32)).sum())
}

/// Decodes wire index `index` at modulus `q` into a dense table.
pub fn decode_wire(q: u64, index: u64) -> Result<WireFunction> {
    if q == 0 {
        return Err(Error::ZeroModulus);
    }
    if q > MAX_CENSUS_Q {
        return Err(Error::CensusTooLarge(q));
    }
    let bits = q * q;
    if index >> bits != 0 {
        return Err(Error::WireIndex { index, q, bits });
    }
    let table = (0..bits).map(|i| ((index >> i) & 1) as u32).collect();
    WireFunction::from_table(Modulus::new(q)?, 2, table)
}

/// Packs a Boolean wire back into its census index.
pub fn encode_wire(w: &WireFunction) -> Result<u64> {
    let q = w.modulus().get();
    if q > MAX_CENSUS_Q {
        return Err(Error::CensusTooLarge(q));
    }
    if w.alphabet() != 2 {
        return Err(Error::Precondition("census wires are Boolean".into()));
    }
    Ok(w.table()
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &v)| acc | (v as u64) << i))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpotReport {
    pub q: u64,
    pub wire_index: u64,
    pub table: Vec<u32>,
    pub verdict: Verdict,
    /// `h(x, 0)` and `h(x, 1)` for each `x`.
    pub histogram: Vec<Vec<u64>>,
    /// For value-independent wires, `f` with `w(s0, s1) = f(s1)`.
    pub mask_only: Option<Vec<u32>>,
}

/// Full per-wire report via the dense representation.
pub fn spot_check(q: u64, wire_index: u64) -> Result<SpotReport> {
    let w = decode_wire(q, wire_index)?;
    let verdict = wire::classify(&w);
    Ok(SpotReport {
        q,
        wire_index,
        table: w.table().to_vec(),
        verdict,
        histogram: MarginalHistogram::of(&w).to_rows(),
        mask_only: if verdict == Verdict::ValueIndependent {
            w.mask_only_profile()
        } else {
            None
        },
    })
}

pub fn write_csv<W: std::io::Write>(report: &CensusReport, out: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["q", "verdict", "count"])?;
    let q = report.q.to_string();
    for (label, n) in [
        (Verdict::ValueIndependent.as_str(), report.count_value_independent),
        (Verdict::ConstantMarginalOnly.as_str(), report.count_conservative),
        (Verdict::NonConstantMarginal.as_str(), report.count_non_constant),
    ] {
        wtr.write_record([q.as_str(), label, &n.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
