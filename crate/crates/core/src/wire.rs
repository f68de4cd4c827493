//! Wire functions `w: Z_q x Z_q -> [0, B)` over the two shares of a
//! first-order arithmetic masking, and the distributional questions one asks
//! of them.
//!
//! Reparametrizing by `s0 = x - s1` turns a wire into a function of the secret
//! `x` and the mask `s1`. With `s1` uniform, the wire leaks nothing about `x`
//! exactly when its marginal histogram
//!
//! ```text
//! h(x, v) = #{ s1 : w(x - s1, s1) = v }
//! ```
//!
//! is the same for every `x`. Value-independence (`w(x - s1, s1)` never
//! changes with `x`) is the stronger structural condition a dependency checker
//! can certify; it implies a constant histogram but not conversely, and
//! [`zero_share_witness`] gives a counterexample for every `q >= 2`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zq::{Modulus, ZqElement};

/// Default ceiling on `q^2` for dense tables (2^26 cells).
pub const DEFAULT_MAX_CELLS: u128 = 1 << 26;

/// Default ceiling on `q` for [`translation_bijection_check`].
pub const DEFAULT_TRANSLATION_CAP: u64 = 1 << 20;

/// Dense wire table, entry `s0 * q + s1` holding `w(s0, s1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireFunction {
    modulus: Modulus,
    alphabet: u32,
    table: Vec<u32>,
}

impl WireFunction {
    pub fn from_table(modulus: Modulus, alphabet: u32, table: Vec<u32>) -> Result<Self> {
        check_shape(modulus, alphabet)?;
        let expected = cells(modulus);
        if table.len() != expected {
            return Err(Error::TableLength {
                expected,
                got: table.len(),
            });
        }
        if let Some((index, &symbol)) = table.iter().enumerate().find(|(_, &v)| v >= alphabet) {
            return Err(Error::SymbolOutOfRange {
                index,
                symbol,
                alphabet,
            });
        }
        Ok(Self {
            modulus,
            alphabet,
            table,
        })
    }

    /// Tabulates `f(s0, s1)` over all share pairs.
    pub fn from_fn(
        modulus: Modulus,
        alphabet: u32,
        mut f: impl FnMut(u64, u64) -> u32,
    ) -> Result<Self> {
        check_shape(modulus, alphabet)?;
        let q = modulus.get();
        let mut table = Vec::with_capacity(cells(modulus));
        for s0 in 0..q {
            for s1 in 0..q {
                table.push(f(s0, s1));
            }
        }
        Self::from_table(modulus, alphabet, table)
    }

    pub fn boolean(modulus: Modulus, mut f: impl FnMut(u64, u64) -> bool) -> Result<Self> {
        Self::from_fn(modulus, 2, |s0, s1| f(s0, s1) as u32)
    }

    pub fn constant(modulus: Modulus, alphabet: u32, symbol: u32) -> Result<Self> {
        Self::from_fn(modulus, alphabet, |_, _| symbol)
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    #[inline]
    pub fn eval(&self, s0: u64, s1: u64) -> u32 {
        self.table[(s0 * self.modulus.get() + s1) as usize]
    }

    /// `w(x - s1, s1)`.
    #[inline]
    pub fn eval_reparam(&self, x: u64, s1: u64) -> u32 {
        let q = self.modulus.get();
        let s0 = if x >= s1 { x - s1 } else { x + q - s1 };
        self.eval(s0, s1)
    }

    /// `Some(f)` when `w(s0, s1) = f(s1)` for every `s0`, read directly off
    /// the table columns.
    pub fn mask_only_profile(&self) -> Option<Vec<u32>> {
        let q = self.modulus.get();
        let profile: Vec<u32> = (0..q).map(|s1| self.eval(0, s1)).collect();
        for s0 in 1..q {
            for s1 in 0..q {
                if self.eval(s0, s1) != profile[s1 as usize] {
                    return None;
                }
            }
        }
        Some(profile)
    }

    pub fn to_file(&self) -> WireFile {
        WireFile {
            q: self.modulus.get(),
            alphabet: self.alphabet,
            order: WireFile::ORDER.to_string(),
            table: self.table.clone(),
        }
    }

    pub fn from_file(file: WireFile) -> Result<Self> {
        if file.order != WireFile::ORDER {
            return Err(Error::TableOrder(file.order));
        }
        Self::from_table(Modulus::new(file.q)?, file.alphabet, file.table)
    }
}

fn cells(modulus: Modulus) -> usize {
    let q = modulus.get() as usize;
    q * q
}

fn check_shape(modulus: Modulus, alphabet: u32) -> Result<()> {
    if alphabet == 0 {
        return Err(Error::EmptyAlphabet);
    }
    let cells = modulus.get() as u128 * modulus.get() as u128;
    if cells > DEFAULT_MAX_CELLS {
        return Err(Error::TableTooLarge {
            cells,
            limit: DEFAULT_MAX_CELLS,
        });
    }
    Ok(())
}

/// On-disk JSON form of a wire function.
///
/// `table[i]` is `w(i / q, i % q)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireFile {
    pub q: u64,
    pub alphabet: u32,
    pub order: String,
    pub table: Vec<u32>,
}

impl WireFile {
    pub const ORDER: &'static str = "s0_major";

    pub fn read(path: impl AsRef<Path>) -> std::io::Result<std::result::Result<Self, serde_json::Error>> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text))
    }
}

/// Classification of a single wire.
///
/// Dependency checkers in the structural tradition report the first two as
/// `SECURE` and `INSECURE_CONSERVATIVE`; the third is a genuine leak under
/// the uniform-mask model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    ValueIndependent,
    ConstantMarginalOnly,
    NonConstantMarginal,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::ValueIndependent => "VALUE_INDEPENDENT",
            Verdict::ConstantMarginalOnly => "CONSTANT_MARGINAL_ONLY",
            Verdict::NonConstantMarginal => "NON_CONSTANT_MARGINAL",
        }
    }

    pub fn has_constant_marginal(self) -> bool {
        self != Verdict::NonConstantMarginal
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `q x B` count matrix, row `x` holding `h(x, .)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarginalHistogram {
    modulus: Modulus,
    alphabet: u32,
    counts: Vec<u64>,
}

impl MarginalHistogram {
    pub fn of(w: &WireFunction) -> Self {
        let q = w.modulus.get();
        let b = w.alphabet as usize;
        let mut counts = vec![0u64; q as usize * b];
        for x in 0..q {
            let row = &mut counts[x as usize * b..(x as usize + 1) * b];
            for s1 in 0..q {
                row[w.eval_reparam(x, s1) as usize] += 1;
            }
        }
        Self {
            modulus: w.modulus,
            alphabet: w.alphabet,
            counts,
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn row(&self, x: u64) -> &[u64] {
        let b = self.alphabet as usize;
        &self.counts[x as usize * b..(x as usize + 1) * b]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks(self.alphabet as usize)
    }

    pub fn get(&self, x: u64, v: u32) -> u64 {
        self.row(x)[v as usize]
    }

    /// `sum_x h(x, v)`, the number of `(x, s1)` pairs producing `v`.
    pub fn column_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.alphabet as usize];
        for row in self.rows() {
            for (t, c) in totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        totals
    }

    pub fn is_constant(&self) -> bool {
        let first = self.row(0);
        self.rows().all(|r| r == first)
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.rows().map(<[u64]>::to_vec).collect()
    }
}

/// Checks `w(x - s1, s1) = w(x' - s1, s1)` for all `s1, x, x'`, one mask at a
/// time, stopping at the first varying row.
pub fn is_value_independent(w: &WireFunction) -> bool {
    let q = w.modulus.get();
    (0..q).all(|s1| {
        let first = w.eval_reparam(0, s1);
        (1..q).all(|x| w.eval_reparam(x, s1) == first)
    })
}

/// `h(x, .)` for one secret.
pub fn marginal_histogram(w: &WireFunction, x: ZqElement) -> Result<Vec<u64>> {
    if x.modulus() != w.modulus {
        return Err(Error::ModulusMismatch {
            left: w.modulus.get(),
            right: x.modulus().get(),
        });
    }
    let mut row = vec![0u64; w.alphabet as usize];
    for s1 in 0..w.modulus.get() {
        row[w.eval_reparam(x.value(), s1) as usize] += 1;
    }
    Ok(row)
}

pub fn has_constant_marginal(w: &WireFunction) -> bool {
    MarginalHistogram::of(w).is_constant()
}

pub fn classify(w: &WireFunction) -> Verdict {
    classify_with(w, &MarginalHistogram::of(w))
}

fn classify_with(w: &WireFunction, hist: &MarginalHistogram) -> Verdict {
    let vi = is_value_independent(w);
    let constant = hist.is_constant();
    assert!(
        !vi || constant,
        "value-independent wire with a non-constant marginal histogram"
    );
    match (vi, constant) {
        (true, _) => Verdict::ValueIndependent,
        (false, true) => Verdict::ConstantMarginalOnly,
        (false, false) => Verdict::NonConstantMarginal,
    }
}

/// `I(X; W)` in bits for uniform secret and uniform mask.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutualInformation {
    pub bits: f64,
    /// Decided from histogram equality, not from `bits`.
    pub is_zero: bool,
}

pub fn mutual_information(w: &WireFunction) -> MutualInformation {
    mutual_information_from(&MarginalHistogram::of(w))
}

fn mutual_information_from(hist: &MarginalHistogram) -> MutualInformation {
    // p(x, v) = h / q^2, p(x) = 1 / q, p(v) = T_v / q^2, so the log argument is
    // the integer ratio h * q / T_v. Constant rows make it exactly 1.
    let q = hist.modulus.get();
    let q2 = (q as f64) * (q as f64);
    let totals = hist.column_totals();
    let mut bits = 0.0;
    for row in hist.rows() {
        for (&h, &t) in row.iter().zip(&totals) {
            if h == 0 {
                continue;
            }
            let num = h as u128 * q as u128;
            let den = t as u128;
            if num == den {
                continue;
            }
            bits += (h as f64 / q2) * (num as f64 / den as f64).log2();
        }
    }
    MutualInformation {
        bits: bits.max(0.0),
        is_zero: hist.is_constant(),
    }
}

/// Everything known about a single wire.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WireReport {
    pub q: u64,
    pub alphabet: u32,
    pub verdict: Verdict,
    pub value_independent: bool,
    pub constant_marginal: bool,
    /// Rows `h(x, .)` for `x = 0..q`.
    pub histogram: Vec<Vec<u64>>,
    pub mutual_information: MutualInformation,
}

pub fn analyze(w: &WireFunction) -> WireReport {
    let hist = MarginalHistogram::of(w);
    let verdict = classify_with(w, &hist);
    WireReport {
        q: w.modulus.get(),
        alphabet: w.alphabet,
        verdict,
        value_independent: verdict == Verdict::ValueIndependent,
        constant_marginal: verdict.has_constant_marginal(),
        mutual_information: mutual_information_from(&hist),
        histogram: hist.to_rows(),
    }
}

/// Indicator of zero on the first share, `w(s0, s1) = [s0 = 0]`.
///
/// Every secret sees exactly one mask that zeroes `s0`, so the histogram is
/// `{1: 1, 0: q - 1}` for all `x`, yet the wire is not value-independent as
/// soon as `1 != 0`.
pub fn zero_share_witness(modulus: Modulus) -> Result<WireFunction> {
    if !modulus.is_nontrivial() {
        return Err(Error::TrivialRing(modulus.get()));
    }
    WireFunction::boolean(modulus, |s0, _| s0 == 0)
}

/// Checks that `s1 -> s1 + (x' - x)` maps each filter set
/// `{s1 : w(x - s1, s1) = v}` bijectively onto `{s1 : w(x' - s1, s1) = v}`.
///
/// For wires that read only `s0` (such as [`zero_share_witness`]) this always holds;
/// that translation is the reason their histograms are constant.
pub fn translation_bijection_check(
    w: &WireFunction,
    x: ZqElement,
    x_prime: ZqElement,
) -> Result<bool> {
    translation_bijection_check_capped(w, x, x_prime, DEFAULT_TRANSLATION_CAP)
}

pub fn translation_bijection_check_capped(
    w: &WireFunction,
    x: ZqElement,
    x_prime: ZqElement,
    cap: u64,
) -> Result<bool> {
    let q = w.modulus;
    if q.get() > cap {
        return Err(Error::EnumerationCap { q: q.get(), cap });
    }
    for e in [x, x_prime] {
        if e.modulus() != q {
            return Err(Error::ModulusMismatch {
                left: q.get(),
                right: e.modulus().get(),
            });
        }
    }
    let shift = x_prime.sub(x)?;
    for v in 0..w.alphabet {
        let source: Vec<ZqElement> = q
            .elements()
            .filter(|s1| w.eval_reparam(x.value(), s1.value()) == v)
            .collect();
        let target: Vec<bool> = (0..q.get())
            .map(|s1| w.eval_reparam(x_prime.value(), s1) == v)
            .collect();
        let target_len = target.iter().filter(|&&b| b).count();
        let mut hit = vec![false; q.get() as usize];
        for s1 in &source {
            let image = s1.add(shift)?.value() as usize;
            // must land in the target, and never twice on the same point
            if !target[image] || hit[image] {
                return Ok(false);
            }
            hit[image] = true;
        }
        if source.len() != target_len {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(q: u64) -> Modulus {
        Modulus::new(q).unwrap()
    }

    fn and_zero(q: u64) -> WireFunction {
        WireFunction::boolean(m(q), |s0, s1| s0 == 0 && s1 == 0).unwrap()
    }

    #[test]
    fn table_validation() {
        assert!(matches!(
            WireFunction::from_table(m(2), 2, vec![0, 1, 1]),
            Err(Error::TableLength {
                expected: 4,
                got: 3
            })
        ));
        assert!(matches!(
            WireFunction::from_table(m(2), 2, vec![0, 1, 2, 0]),
            Err(Error::SymbolOutOfRange {
                index: 2,
                symbol: 2,
                alphabet: 2
            })
        ));
        assert!(matches!(
            WireFunction::from_table(m(1), 0, vec![0]),
            Err(Error::EmptyAlphabet)
        ));
        assert!(matches!(
            WireFunction::constant(m(8193), 2, 0),
            Err(Error::TableTooLarge { .. })
        ));
    }

    #[test]
    fn file_order_is_checked() {
        let mut f = and_zero(2).to_file();
        f.order = "s1_major".into();
        assert!(matches!(WireFunction::from_file(f), Err(Error::TableOrder(_))));
    }

    #[test]
    fn value_independence_examples() {
        let f_s1 = WireFunction::boolean(m(5), |_, s1| s1 % 2 == 1).unwrap();
        assert!(is_value_independent(&f_s1));
        let zero_s0 = WireFunction::boolean(m(2), |s0, _| s0 == 0).unwrap();
        assert!(!is_value_independent(&zero_s0));
        for q in [1, 2, 7] {
            assert!(is_value_independent(&WireFunction::constant(m(q), 3, 2).unwrap()));
        }
    }

    #[test]
    fn histogram_examples() {
        let w = zero_share_witness(m(5)).unwrap();
        assert_eq!(marginal_histogram(&w, m(5).element(3).unwrap()).unwrap(), vec![4, 1]);

        let ones = WireFunction::constant(m(7), 2, 1).unwrap();
        for x in m(7).elements() {
            assert_eq!(marginal_histogram(&ones, x).unwrap(), vec![0, 7]);
        }

        let w = and_zero(2);
        assert_eq!(marginal_histogram(&w, m(2).element(0).unwrap()).unwrap(), vec![1, 1]);
        assert_eq!(marginal_histogram(&w, m(2).element(1).unwrap()).unwrap(), vec![2, 0]);
    }

    #[test]
    fn histogram_rejects_foreign_secret() {
        let w = and_zero(2);
        assert!(marginal_histogram(&w, m(3).element(0).unwrap()).is_err());
    }

    #[test]
    fn classify_examples() {
        let f_s1 = WireFunction::boolean(m(4), |_, s1| s1 == 2).unwrap();
        assert_eq!(classify(&f_s1), Verdict::ValueIndependent);
        assert_eq!(classify(&zero_share_witness(m(3329)).unwrap()), Verdict::ConstantMarginalOnly);
        assert_eq!(classify(&and_zero(2)), Verdict::NonConstantMarginal);
        assert!(!has_constant_marginal(&and_zero(2)));
    }

    #[test]
    fn witness_table_and_trivial_ring() {
        assert_eq!(zero_share_witness(m(2)).unwrap().table(), &[1, 1, 0, 0]);
        assert!(matches!(zero_share_witness(m(1)), Err(Error::TrivialRing(1))));
    }

    #[test]
    fn mutual_information_zero_cases() {
        let mi = mutual_information(&zero_share_witness(m(5)).unwrap());
        assert_eq!(mi.bits, 0.0);
        assert!(mi.is_zero);
        let mi = mutual_information(&WireFunction::boolean(m(3), |_, s1| s1 == 0).unwrap());
        assert_eq!(mi.bits, 0.0);
        assert!(mi.is_zero);
    }

    #[test]
    fn translation_examples() {
        let w = zero_share_witness(m(5)).unwrap();
        let e = |v| m(5).element(v).unwrap();
        assert!(translation_bijection_check(&w, e(1), e(4)).unwrap());
        let w2 = zero_share_witness(m(2)).unwrap();
        assert!(translation_bijection_check(&w2, m(2).element(0).unwrap(), m(2).element(1).unwrap()).unwrap());
        // a wire whose histogram varies cannot be translated
        let w = and_zero(2);
        assert!(!translation_bijection_check(&w, m(2).element(0).unwrap(), m(2).element(1).unwrap()).unwrap());
        assert!(matches!(
            translation_bijection_check_capped(&zero_share_witness(m(5)).unwrap(), e(0), e(1), 4),
            Err(Error::EnumerationCap { q: 5, cap: 4 })
        ));
    }
}
