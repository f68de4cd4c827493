//! Exact arithmetic in the residue ring Z/qZ for a modulus chosen at runtime,
//! together with the arithmetic (`x - s1`) and Boolean (`x ^ s1`) share
//! reparametrizations.
//!
//! Residues are stored as `u64` and every intermediate is widened to `u128`
//! before reduction, so `x - s1 + q` and `a * b` can never wrap.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus `arith_reparam_is_bijection` will enumerate by default.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

/// ML-KEM modulus.
pub const Q_MLKEM: u64 = 3329;
/// ML-DSA modulus.
pub const Q_MLDSA: u64 = 8_380_417;

/// A positive modulus `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::ZeroModulus);
        }
        Ok(Self(q))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// `true` iff `q >= 2`, i.e. `1 != 0` in the ring.
    #[inline]
    pub fn is_nontrivial(self) -> bool {
        self.0 >= 2
    }

    /// Canonical residue of an arbitrary integer.
    #[inline]
    pub fn reduce(self, v: i128) -> u64 {
        v.rem_euclid(self.0 as i128) as u64
    }

    pub fn element(self, value: u64) -> Result<ZqElement> {
        ZqElement::new(value, self)
    }

    /// Residue of `value mod q`; never fails.
    pub fn element_reduced(self, value: u64) -> ZqElement {
        ZqElement {
            value: value % self.0,
            modulus: self,
        }
    }

    pub fn zero(self) -> ZqElement {
        self.element_reduced(0)
    }

    pub fn one(self) -> ZqElement {
        self.element_reduced(1)
    }

    /// All residues `0..q` in order.
    pub fn elements(self) -> impl Iterator<Item = ZqElement> {
        (0..self.0).map(move |value| ZqElement {
            value,
            modulus: self,
        })
    }
}

impl TryFrom<u64> for Modulus {
    type Error = Error;

    fn try_from(q: u64) -> Result<Self> {
        Modulus::new(q)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.0
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A canonically reduced residue `0 <= value < q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ZqElement {
    value: u64,
    modulus: Modulus,
}

// add/sub/mul are fallible (operands may carry different moduli), so they
// are inherent methods rather than the operator traits.
#[allow(clippy::should_implement_trait)]
impl ZqElement {
    pub fn new(value: u64, modulus: Modulus) -> Result<Self> {
        if value >= modulus.get() {
            return Err(Error::NotReduced {
                value,
                q: modulus.get(),
            });
        }
        Ok(Self { value, modulus })
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> Modulus {
        self.modulus
    }

    fn same_ring(self, other: Self) -> Result<Modulus> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.get(),
                right: other.modulus.get(),
            });
        }
        Ok(self.modulus)
    }

    fn with(self, wide: u128) -> Self {
        Self {
            value: (wide % self.modulus.get() as u128) as u64,
            modulus: self.modulus,
        }
    }

    pub fn add(self, rhs: Self) -> Result<Self> {
        self.same_ring(rhs)?;
        Ok(self.with(self.value as u128 + rhs.value as u128))
    }

    pub fn sub(self, rhs: Self) -> Result<Self> {
        let q = self.same_ring(rhs)?;
        Ok(self.with(self.value as u128 + q.get() as u128 - rhs.value as u128))
    }

    pub fn mul(self, rhs: Self) -> Result<Self> {
        self.same_ring(rhs)?;
        Ok(self.with(self.value as u128 * rhs.value as u128))
    }

    pub fn neg(self) -> Self {
        self.with(self.modulus.get() as u128 - self.value as u128)
    }
}

impl fmt::Display for ZqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

/// Arithmetic reparametrization: the first share `s0 = x - s1` for secret `x`
/// and mask `s1`.
pub fn arith_reparam(x: ZqElement, s1: ZqElement) -> Result<ZqElement> {
    x.sub(s1)
}

/// Recomputes `(x - s1) + s1` and compares it with `x`.
///
/// The ring identity says this is always `true`; the function exists so the
/// identity can be checked on concrete inputs.
pub fn arith_reparam_round_trip(x: ZqElement, s1: ZqElement) -> Result<bool> {
    Ok(arith_reparam(x, s1)?.add(s1)? == x)
}

/// Counts the image of `x -> x - s1` over all of Z_q by enumeration and
/// reports whether it has exactly `q` elements.
pub fn arith_reparam_is_bijection(s1: ZqElement) -> Result<bool> {
    arith_reparam_is_bijection_capped(s1, DEFAULT_ENUMERATION_CAP)
}

pub fn arith_reparam_is_bijection_capped(s1: ZqElement, cap: u64) -> Result<bool> {
    let q = s1.modulus();
    if q.get() > cap {
        return Err(Error::EnumerationCap { q: q.get(), cap });
    }
    let mut image = HashSet::with_capacity(q.get() as usize);
    for x in q.elements() {
        image.insert(arith_reparam(x, s1)?.value());
    }
    Ok(image.len() as u64 == q.get())
}

/// A `k`-bit word, `0 <= k <= 64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BitWord {
    width: u32,
    bits: u64,
}

impl BitWord {
    pub const MAX_WIDTH: u32 = 64;

    pub fn new(width: u32, bits: u64) -> Result<Self> {
        if width > Self::MAX_WIDTH {
            return Err(Error::WordWidth(width));
        }
        if bits & !Self::mask(width) != 0 {
            return Err(Error::WordTooWide { bits, width });
        }
        Ok(Self { width, bits })
    }

    /// All-ones mask for `width` bits.
    pub fn mask(width: u32) -> u64 {
        if width >= 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        }
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn bits(self) -> u64 {
        self.bits
    }
}

/// Boolean reparametrization `x ^ s1`. Self-inverse for a fixed mask.
pub fn bool_reparam(x: BitWord, s1: BitWord) -> Result<BitWord> {
    if x.width != s1.width {
        return Err(Error::WidthMismatch {
            left: x.width,
            right: s1.width,
        });
    }
    Ok(BitWord {
        width: x.width,
        bits: x.bits ^ s1.bits,
    })
}
