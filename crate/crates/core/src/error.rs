use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("value {value} is not a canonical residue mod {q}")]
    NotReduced { value: u64, q: u64 },
    #[error("operands live in different rings: Z_{left} vs Z_{right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("q = {q} exceeds the enumeration cap {cap}")]
    EnumerationCap { q: u64, cap: u64 },
    #[error("word width {0} exceeds 64 bits")]
    WordWidth(u32),
    #[error("value {bits:#x} does not fit in {width} bits")]
    WordTooWide { bits: u64, width: u32 },
    #[error("word widths differ: {left} vs {right}")]
    WidthMismatch { left: u32, right: u32 },

    #[error("wire table has {got} entries, expected q^2 = {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("wire table entry {index} is {symbol}, outside alphabet of size {alphabet}")]
    SymbolOutOfRange {
        index: usize,
        symbol: u32,
        alphabet: u32,
    },
    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,
    #[error("q^2 = {cells} cells exceeds the dense table limit {limit}")]
    TableTooLarge { cells: u128, limit: u128 },
    #[error("unsupported table order {0:?}, only \"s0_major\" is defined")]
    TableOrder(String),
    #[error("this construction needs a non-trivial ring (q >= 2), got q = {0}")]
    TrivialRing(u64),

    #[error("exhaustive census needs q^2 <= 25, got q = {0}")]
    CensusTooLarge(u64),
    #[error("wire index {index} out of range for q = {q} (2^{bits} wires)")]
    WireIndex { index: u64, q: u64, bits: u64 },
    #[error("worker count must be at least 1")]
    NoWorkers,

    #[error("sample space size must be positive")]
    EmptySampleSpace,

    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("width {width} is not admissible for q = {q}: need 2q < 2^{width}")]
    InadmissibleWidth { q: u64, width: u32 },
    #[error("intermediate {value} overflows a {width}-bit word")]
    WordOverflow { value: u128, width: u32 },
    #[error("intermediate underflows an unsigned word: {lhs} - {rhs}")]
    WordUnderflow { lhs: u64, rhs: u64 },

    #[error("unknown tap {0:?}")]
    UnknownTap(String),
    #[error("butterfly configuration out of budget: {0}")]
    SweepBudget(String),
}
