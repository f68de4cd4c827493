//! Residue counts of a uniform sample space `{0, .., N - 1}` reduced mod `q`.
//!
//! A `k`-bit generator reduced mod `q` is this with `N = 2^k`. Counts are
//! computed in closed form; nothing here samples.

use std::fmt;

use num_integer::Integer;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::zq::Modulus;

/// Above this `q` the CLI prints summaries only.
pub const FULL_COUNTS_LIMIT: u64 = 1 << 16;

/// Residue counts `count(r) = #{n < N : n mod q = r}`, held implicitly.
///
/// `count(r) = floor((N - 1 - r) / q) + 1` for `r < min(N, q)`, else 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidueCounts {
    n: u64,
    q: u64,
}

impl ResidueCounts {
    pub fn len(&self) -> u64 {
        self.q
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, r: u64) -> u64 {
        if r >= self.q || r >= self.n {
            0
        } else {
            (self.n - 1 - r) / self.q + 1
        }
    }

    /// Counts for `r = 0..q`, evaluated incrementally.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let q = self.q;
        let live = self.n.min(q);
        // track (N - 1 - r) = quot * q + rem as r increases
        let (mut quot, mut rem) = ((self.n - 1) / q, (self.n - 1) % q);
        (0..q).map(move |r| {
            if r >= live {
                return 0;
            }
            let c = quot + 1;
            if rem == 0 {
                quot = quot.wrapping_sub(1);
                rem = q - 1;
            } else {
                rem -= 1;
            }
            c
        })
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }
}

/// Exact `max/min` in lowest terms, or `Degenerate` when some residue never
/// occurs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BiasRatio {
    Exact { num: u64, den: u64 },
    Degenerate,
}

impl BiasRatio {
    fn new(max: u64, min: u64) -> Self {
        if min == 0 {
            return BiasRatio::Degenerate;
        }
        let g = max.gcd(&min);
        BiasRatio::Exact {
            num: max / g,
            den: min / g,
        }
    }
}

impl fmt::Display for BiasRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiasRatio::Exact { num, den } => write!(f, "{num}/{den}"),
            BiasRatio::Degenerate => f.write_str("DEGENERATE"),
        }
    }
}

impl Serialize for BiasRatio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BiasProfile {
    pub n: u64,
    pub q: Modulus,
    pub counts: ResidueCounts,
    pub min_count: u64,
    pub max_count: u64,
    pub ratio: BiasRatio,
    pub divides_exactly: bool,
}

pub fn bias_profile(n: u64, q: Modulus) -> Result<BiasProfile> {
    if n == 0 {
        return Err(Error::EmptySampleSpace);
    }
    let counts = ResidueCounts { n, q: q.get() };
    // counts are non-increasing in r
    let max_count = counts.get(0);
    let min_count = counts.get(q.get() - 1);
    Ok(BiasProfile {
        n,
        q,
        counts,
        min_count,
        max_count,
        ratio: BiasRatio::new(max_count, min_count),
        divides_exactly: n.is_multiple_of(q.get()),
    })
}

/// Profile of a `k`-bit generator, `N = 2^k`.
pub fn rng_profile(bits: u32, q: Modulus) -> Result<BiasProfile> {
    if bits >= 64 {
        return Err(Error::Precondition(format!("{bits}-bit sample space does not fit in u64")));
    }
    bias_profile(1u64 << bits, q)
}

/// Below this `N` the counts are recomputed by walking every sample.
const DIRECT_SUMMATION_LIMIT: u64 = 1 << 20;

/// Re-derives every count without the closed form used to build the profile
/// and checks `floor(N/q) <= count(r) <= ceil(N/q)`, `sum = N`, and equality
/// when `q | N`.
pub fn verify_bounds(profile: &BiasProfile) -> bool {
    let (n, q) = (profile.n, profile.q.get());
    let (lo, hi) = (n / q, n.div_ceil(q));

    let reference: Box<dyn Iterator<Item = u64>> = if n <= DIRECT_SUMMATION_LIMIT {
        let mut direct = vec![0u64; q.min(n) as usize];
        for v in 0..n {
            direct[(v % q) as usize] += 1;
        }
        Box::new(direct.into_iter().chain(std::iter::repeat(0)))
    } else {
        // N = lo * q + rem: the first rem residues get one extra sample
        let rem = n % q;
        Box::new((0..q).map(move |r| lo + (r < rem) as u64))
    };

    let mut sum = 0u128;
    let mut min = u64::MAX;
    let mut max = 0;
    for (c, expect) in profile.counts.iter().zip(reference) {
        if c != expect || c < lo || c > hi {
            return false;
        }
        if profile.divides_exactly && c != n / q {
            return false;
        }
        sum += c as u128;
        min = min.min(c);
        max = max.max(c);
    }
    sum == n as u128
        && min == profile.min_count
        && max == profile.max_count
        && profile.divides_exactly == (n % q == 0)
}

#[derive(Serialize)]
pub struct BiasSummary {
    pub n: u64,
    pub q: u64,
    pub min_count: u64,
    pub max_count: u64,
    pub ratio: BiasRatio,
    pub divides_exactly: bool,
    pub floor_bound: u64,
    pub ceil_bound: u64,
    pub bounds_verified: bool,
    /// Omitted for `q > 2^16`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
}

impl BiasProfile {
    pub fn summary(&self, with_counts: bool) -> BiasSummary {
        let q = self.q.get();
        BiasSummary {
            n: self.n,
            q,
            min_count: self.min_count,
            max_count: self.max_count,
            ratio: self.ratio,
            divides_exactly: self.divides_exactly,
            floor_bound: self.n / q,
            ceil_bound: self.n.div_ceil(q),
            bounds_verified: verify_bounds(self),
            counts: (with_counts && q <= FULL_COUNTS_LIMIT).then(|| self.counts.to_vec()),
        }
    }
}
