//! Fixed-width unsigned words and the URem form of the arithmetic
//! reparametrization.
//!
//! Hardware computes `s0 = (x + q - s1) mod q` on `w`-bit registers. The
//! intermediate `x + q - s1` lies in `[1, 2q)` for `x, s1 < q`, so the
//! encoding is exact whenever `2q < 2^w`. Every word operation here is
//! checked: an intermediate that leaves `[0, 2^w)` is an error, never a wrap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::zq::{self, Modulus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WidthConfig {
    pub q: Modulus,
    pub width: u32,
}

impl WidthConfig {
    pub fn new(q: Modulus, width: u32) -> Self {
        Self { q, width }
    }

    pub fn word_limit(&self) -> u128 {
        1u128 << self.width.min(127)
    }
}

/// `2q < 2^w`.
pub fn width_admissible(cfg: WidthConfig) -> bool {
    (2 * cfg.q.get() as u128) < cfg.word_limit()
}

/// `t = x + q - s1` over the naturals, with `(1 <= t, t < 2q)`.
pub fn no_overflow_bounds(q: u64, x: u64, s1: u64) -> Result<(bool, bool)> {
    let t = overflow_intermediate(q, x, s1)?;
    Ok((1 <= t, t < 2 * q as u128))
}

/// The intermediate `x + q - s1` itself.
pub fn overflow_intermediate(q: u64, x: u64, s1: u64) -> Result<u128> {
    if q == 0 {
        return Err(Error::ZeroModulus);
    }
    if x >= q || s1 >= q {
        return Err(Error::Precondition(format!(
            "need x < q and s1 < q, got x = {x}, s1 = {s1}, q = {q}"
        )));
    }
    Ok(x as u128 + q as u128 - s1 as u128)
}

/// An unsigned `w`-bit register value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Word {
    value: u64,
    width: u32,
}

impl Word {
    pub fn new(value: u64, width: u32) -> Result<Self> {
        if width == 0 || width > 64 {
            return Err(Error::WordWidth(width));
        }
        if (value as u128) >> width != 0 {
            return Err(Error::WordOverflow {
                value: value as u128,
                width,
            });
        }
        Ok(Self { value, width })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    fn same_width(self, rhs: Word) -> Result<()> {
        if self.width != rhs.width {
            return Err(Error::WidthMismatch {
                left: self.width,
                right: rhs.width,
            });
        }
        Ok(())
    }

    pub fn checked_add(self, rhs: Word) -> Result<Word> {
        self.same_width(rhs)?;
        let wide = self.value as u128 + rhs.value as u128;
        if wide >> self.width != 0 {
            return Err(Error::WordOverflow {
                value: wide,
                width: self.width,
            });
        }
        Ok(Word {
            value: wide as u64,
            width: self.width,
        })
    }

    pub fn checked_sub(self, rhs: Word) -> Result<Word> {
        self.same_width(rhs)?;
        let value = self.value.checked_sub(rhs.value).ok_or(Error::WordUnderflow {
            lhs: self.value,
            rhs: rhs.value,
        })?;
        Ok(Word {
            value,
            width: self.width,
        })
    }

    /// Unsigned remainder. `rhs` must be non-zero.
    pub fn urem(self, rhs: Word) -> Result<Word> {
        self.same_width(rhs)?;
        if rhs.value == 0 {
            return Err(Error::Precondition("URem by zero".into()));
        }
        Ok(Word {
            value: self.value % rhs.value,
            width: self.width,
        })
    }
}

/// Share `s0 = URem(x + q - s1, q)` and the recombination `URem(s0 + s1, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UremResult {
    pub s0: u64,
    pub recombined: u64,
}

/// URem reparametrization on `w`-bit words.
pub fn urem_reparam(cfg: WidthConfig, x: u64, s1: u64) -> Result<UremResult> {
    if !width_admissible(cfg) {
        return Err(Error::InadmissibleWidth {
            q: cfg.q.get(),
            width: cfg.width,
        });
    }
    let q = cfg.q.get();
    if x >= q || s1 >= q {
        return Err(Error::Precondition(format!(
            "URem inputs must be below q = {q}, got x = {x}, s1 = {s1}"
        )));
    }
    let w = |v| Word::new(v, cfg.width);
    let (xw, sw, qw) = (w(x)?, w(s1)?, w(q)?);
    let s0 = xw.checked_add(qw)?.checked_sub(sw)?.urem(qw)?;
    let recombined = s0.checked_add(sw)?.urem(qw)?;
    Ok(UremResult {
        s0: s0.value(),
        recombined: recombined.value(),
    })
}

/// Compares the word encoding with ring reparametrization on one pair.
pub fn urem_matches_ring(cfg: WidthConfig, x: u64, s1: u64) -> Result<bool> {
    let r = urem_reparam(cfg, x, s1)?;
    let ring = zq::arith_reparam(cfg.q.element(x)?, cfg.q.element(s1)?)?;
    Ok(r.s0 == ring.value() && r.recombined == x)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub q: u64,
    pub width: u32,
    pub admissible: bool,
    /// Smallest and largest possible `x + q - s1`.
    pub intermediate_min: u128,
    pub intermediate_max: u128,
    pub two_q: u128,
    pub word_limit: u128,
}

pub fn bounds_report(cfg: WidthConfig) -> BoundsReport {
    let q = cfg.q.get();
    BoundsReport {
        q,
        width: cfg.width,
        admissible: width_admissible(cfg),
        intermediate_min: 1,
        intermediate_max: 2 * q as u128 - 1,
        two_q: 2 * q as u128,
        word_limit: cfg.word_limit(),
    }
}
