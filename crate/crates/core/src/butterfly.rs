//! Exploratory testbed for masked NTT butterfly networks.
//!
//! A butterfly stage maps `(a, b)` to `(a + t*b, a - t*b)`. On a first-order
//! arithmetic masking it can be evaluated share by share, because the stage
//! is Z_q-linear. This module wires `k` such stages into a `2^k`-point
//! Cooley-Tukey network, exposes every internal signal as a tap, and turns
//! any tap into a [`WireFunction`] of the shares of one chosen secret input.
//!
//! [`conjecture_sweep`] classifies every tap of every configuration in a
//! bounded range. A clean sweep shows that no per-share signal leaks at those
//! parameters. It is evidence for composition, not a proof of it.
//!
//! Each stage uses one twiddle for all of its butterflies, and no fresh
//! randomness is injected between stages.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::wire::{self, Verdict, WireFunction};
use crate::zq::{Modulus, ZqElement};

pub const MAX_SWEEP_Q: u64 = 7;
pub const MAX_SWEEP_STAGES: usize = 3;
pub const MAX_SWEEP_CONTEXTS: usize = 16;
/// Largest modulus [`extract_wire_function`] tabulates (`q^2` traces).
pub const MAX_EXTRACT_Q: u64 = 256;

/// Two additive shares, `share0 + share1 = value (mod q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaskedValue {
    pub share0: ZqElement,
    pub share1: ZqElement,
}

impl MaskedValue {
    pub fn new(share0: ZqElement, share1: ZqElement) -> Result<Self> {
        if share0.modulus() != share1.modulus() {
            return Err(Error::ModulusMismatch {
                left: share0.modulus().get(),
                right: share1.modulus().get(),
            });
        }
        Ok(Self { share0, share1 })
    }

    /// Masks `value` with `mask`: shares `(value - mask, mask)`.
    pub fn mask(value: ZqElement, mask: ZqElement) -> Result<Self> {
        Self::new(value.sub(mask)?, mask)
    }

    pub fn recombine(self) -> ZqElement {
        self.share0
            .add(self.share1)
            .expect("shares of one value share a modulus")
    }

    pub fn modulus(self) -> Modulus {
        self.share0.modulus()
    }
}

/// One butterfly stage with twiddle `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ButterflyStage {
    twiddle: ZqElement,
}

impl ButterflyStage {
    pub fn new(twiddle: ZqElement) -> Self {
        Self { twiddle }
    }

    pub fn modulus(&self) -> Modulus {
        self.twiddle.modulus()
    }

    pub fn twiddle(&self) -> ZqElement {
        self.twiddle
    }

    /// `(a + t*b, a - t*b)`.
    pub fn butterfly_plain(&self, a: ZqElement, b: ZqElement) -> Result<(ZqElement, ZqElement)> {
        let tb = self.twiddle.mul(b)?;
        Ok((a.add(tb)?, a.sub(tb)?))
    }

    /// Sharewise butterfly: share `i` of each output only reads share `i` of
    /// each input.
    pub fn butterfly_masked(
        &self,
        a: MaskedValue,
        b: MaskedValue,
    ) -> Result<(MaskedValue, MaskedValue)> {
        let (c0, d0) = self.butterfly_plain(a.share0, b.share0)?;
        let (c1, d1) = self.butterfly_plain(a.share1, b.share1)?;
        Ok((MaskedValue::new(c0, c1)?, MaskedValue::new(d0, d1)?))
    }
}

/// Internal signals of one butterfly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Signal {
    A0,
    A1,
    B0,
    B1,
    TB0,
    TB1,
    C0,
    C1,
    D0,
    D1,
    /// Recombined `a`; a hypothetical probe that sees both shares at once.
    A,
    B,
    TB,
    C,
    D,
}

impl Signal {
    pub const ALL: [Signal; 15] = [
        Signal::A0,
        Signal::A1,
        Signal::B0,
        Signal::B1,
        Signal::TB0,
        Signal::TB1,
        Signal::C0,
        Signal::C1,
        Signal::D0,
        Signal::D1,
        Signal::A,
        Signal::B,
        Signal::TB,
        Signal::C,
        Signal::D,
    ];

    pub fn is_recombined(self) -> bool {
        matches!(
            self,
            Signal::A | Signal::B | Signal::TB | Signal::C | Signal::D
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Signal::A0 => "a0",
            Signal::A1 => "a1",
            Signal::B0 => "b0",
            Signal::B1 => "b1",
            Signal::TB0 => "tb0",
            Signal::TB1 => "tb1",
            Signal::C0 => "c0",
            Signal::C1 => "c1",
            Signal::D0 => "d0",
            Signal::D1 => "d1",
            Signal::A => "a",
            Signal::B => "b",
            Signal::TB => "tb",
            Signal::C => "c",
            Signal::D => "d",
        }
    }

    fn index(self) -> usize {
        Signal::ALL.iter().position(|&s| s == self).unwrap()
    }
}

/// A signal of one butterfly in one stage, written `s<stage>.bf<k>.<signal>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tap {
    pub stage: usize,
    pub butterfly: usize,
    pub signal: Signal,
}

impl fmt::Display for Tap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}.bf{}.{}", self.stage, self.butterfly, self.signal.name())
    }
}

impl FromStr for Tap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownTap(s.to_string());
        let mut parts = s.split('.');
        let stage = parts
            .next()
            .and_then(|p| p.strip_prefix('s'))
            .and_then(|p| p.parse().ok())
            .ok_or_else(bad)?;
        let butterfly = parts
            .next()
            .and_then(|p| p.strip_prefix("bf"))
            .and_then(|p| p.parse().ok())
            .ok_or_else(bad)?;
        let name = parts.next().ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        let signal = Signal::ALL
            .into_iter()
            .find(|sig| sig.name() == name)
            .ok_or_else(bad)?;
        Ok(Tap {
            stage,
            butterfly,
            signal,
        })
    }
}

/// A `2^k`-point network of `k` stages. Stage `j` pairs inputs at distance
/// `n / 2^(j+1)`, so every input reaches every output along exactly one path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pipeline {
    stages: Vec<ButterflyStage>,
}

impl Pipeline {
    pub fn new(stages: Vec<ButterflyStage>) -> Result<Self> {
        let first = stages
            .first()
            .ok_or_else(|| Error::Precondition("pipeline needs at least one stage".into()))?;
        let q = first.modulus();
        if let Some(s) = stages.iter().find(|s| s.modulus() != q) {
            return Err(Error::ModulusMismatch {
                left: q.get(),
                right: s.modulus().get(),
            });
        }
        if stages.len() > 16 {
            return Err(Error::Precondition("at most 16 stages".into()));
        }
        Ok(Self { stages })
    }

    pub fn from_twiddles(q: Modulus, twiddles: &[u64]) -> Result<Self> {
        let stages = twiddles
            .iter()
            .map(|&t| q.element(t).map(ButterflyStage::new))
            .collect::<Result<_>>()?;
        Self::new(stages)
    }

    pub fn modulus(&self) -> Modulus {
        self.stages[0].modulus()
    }

    pub fn stages(&self) -> &[ButterflyStage] {
        &self.stages
    }

    /// Number of inputs, `2^stages`.
    pub fn width(&self) -> usize {
        1 << self.stages.len()
    }

    pub fn butterflies_per_stage(&self) -> usize {
        self.width() / 2
    }

    /// Index pairs `(a, b)` of stage `j`, in butterfly order.
    pub fn pairs(&self, stage: usize) -> Vec<(usize, usize)> {
        let n = self.width();
        let half = n >> (stage + 1);
        (0..n)
            .step_by(2 * half)
            .flat_map(|start| (start..start + half).map(move |i| (i, i + half)))
            .collect()
    }

    pub fn taps(&self) -> Vec<Tap> {
        let mut taps = Vec::new();
        for stage in 0..self.stages.len() {
            for butterfly in 0..self.butterflies_per_stage() {
                for signal in Signal::ALL {
                    taps.push(Tap {
                        stage,
                        butterfly,
                        signal,
                    });
                }
            }
        }
        taps
    }

    fn check_tap(&self, tap: Tap) -> Result<()> {
        if tap.stage >= self.stages.len() || tap.butterfly >= self.butterflies_per_stage() {
            return Err(Error::UnknownTap(tap.to_string()));
        }
        Ok(())
    }

    fn tap_slot(&self, tap: Tap) -> usize {
        (tap.stage * self.butterflies_per_stage() + tap.butterfly) * Signal::ALL.len()
            + tap.signal.index()
    }

    /// Plain evaluation of the whole network.
    pub fn run_plain(&self, inputs: &[ZqElement]) -> Result<Vec<ZqElement>> {
        self.check_width(inputs.len())?;
        let mut v = inputs.to_vec();
        for (j, stage) in self.stages.iter().enumerate() {
            for (ia, ib) in self.pairs(j) {
                let (c, d) = stage.butterfly_plain(v[ia], v[ib])?;
                v[ia] = c;
                v[ib] = d;
            }
        }
        Ok(v)
    }

    /// Sharewise evaluation of the whole network.
    pub fn run_masked(&self, inputs: &[MaskedValue]) -> Result<Vec<MaskedValue>> {
        self.check_width(inputs.len())?;
        let mut v = inputs.to_vec();
        for (j, stage) in self.stages.iter().enumerate() {
            for (ia, ib) in self.pairs(j) {
                let (c, d) = stage.butterfly_masked(v[ia], v[ib])?;
                v[ia] = c;
                v[ib] = d;
            }
        }
        Ok(v)
    }

    fn check_width(&self, got: usize) -> Result<()> {
        if got != self.width() {
            return Err(Error::Precondition(format!(
                "network takes {} inputs, got {got}",
                self.width()
            )));
        }
        Ok(())
    }

    /// Sharewise evaluation recording every tap, with taint tracking from the
    /// shares of input `secret`.
    pub fn trace(&self, inputs: &[(u64, u64)], secret: usize) -> Result<Trace> {
        self.check_width(inputs.len())?;
        if secret >= self.width() {
            return Err(Error::Precondition(format!("secret input {secret} out of range")));
        }
        let q = self.modulus().get();
        if inputs.iter().any(|&(a, b)| a >= q || b >= q) {
            return Err(Error::Precondition("input shares must be reduced".into()));
        }
        let mut shares: Vec<[Tainted; 2]> = inputs
            .iter()
            .enumerate()
            .map(|(i, &(s0, s1))| {
                let taint = |bit| if i == secret { bit } else { 0 };
                [Tainted::new(s0, taint(SHARE0)), Tainted::new(s1, taint(SHARE1))]
            })
            .collect();

        let per_stage = self.butterflies_per_stage() * Signal::ALL.len();
        let mut signals = Vec::with_capacity(self.stages.len() * per_stage);
        for (j, stage) in self.stages.iter().enumerate() {
            let t = stage.twiddle.value();
            for (ia, ib) in self.pairs(j) {
                let (a, b) = (shares[ia], shares[ib]);
                let tb = [b[0].scale(t, q), b[1].scale(t, q)];
                let c = [a[0].add(tb[0], q), a[1].add(tb[1], q)];
                let d = [a[0].sub(tb[0], q), a[1].sub(tb[1], q)];
                signals.extend([a[0], a[1], b[0], b[1], tb[0], tb[1], c[0], c[1], d[0], d[1]]);
                for pair in [a, b, tb, c, d] {
                    signals.push(pair[0].add(pair[1], q));
                }
                shares[ia] = c;
                shares[ib] = d;
            }
        }
        Ok(Trace { signals })
    }
}

const SHARE0: u8 = 1;
const SHARE1: u8 = 2;

/// A residue with the set of secret shares it was computed from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Tainted {
    value: u64,
    taint: u8,
}

impl Tainted {
    fn new(value: u64, taint: u8) -> Self {
        Self { value, taint }
    }

    fn add(self, o: Self, q: u64) -> Self {
        let v = (self.value as u128 + o.value as u128) % q as u128;
        Self::new(v as u64, self.taint | o.taint)
    }

    fn sub(self, o: Self, q: u64) -> Self {
        let v = (self.value as u128 + q as u128 - o.value as u128) % q as u128;
        Self::new(v as u64, self.taint | o.taint)
    }

    fn scale(self, t: u64, q: u64) -> Self {
        let v = self.value as u128 * t as u128 % q as u128;
        // 0 * b is the constant 0, whatever b is
        Self::new(v as u64, if t.is_multiple_of(q) { 0 } else { self.taint })
    }
}

/// All tap values of one evaluation, in [`Pipeline::taps`] order.
#[derive(Clone, Debug)]
pub struct Trace {
    signals: Vec<Tainted>,
}

impl Trace {
    pub fn value(&self, pipeline: &Pipeline, tap: Tap) -> u64 {
        self.signals[pipeline.tap_slot(tap)].value
    }

    /// Whether the tap depends on share 0 / share 1 of the secret along some
    /// path. Multiplication by a zero twiddle cuts the path.
    pub fn taint(&self, pipeline: &Pipeline, tap: Tap) -> (bool, bool) {
        let t = self.signals[pipeline.tap_slot(tap)].taint;
        (t & SHARE0 != 0, t & SHARE1 != 0)
    }

    /// No per-share tap combines both shares of the secret.
    pub fn isolation_holds(&self, pipeline: &Pipeline) -> bool {
        pipeline
            .taps()
            .into_iter()
            .filter(|t| !t.signal.is_recombined())
            .all(|t| self.taint(pipeline, t) != (true, true))
    }
}

/// Plain values and masks for every network input; the secret's slot is
/// ignored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedContext {
    pub plain: Vec<u64>,
    pub masks: Vec<u64>,
}

impl FixedContext {
    pub fn zeros(width: usize) -> Self {
        Self {
            plain: vec![0; width],
            masks: vec![0; width],
        }
    }

    pub fn random<R: Rng>(width: usize, q: u64, rng: &mut R) -> Self {
        Self {
            plain: (0..width).map(|_| rng.gen_range(0..q)).collect(),
            masks: (0..width).map(|_| rng.gen_range(0..q)).collect(),
        }
    }

    fn shares(&self, q: u64, secret: usize, s0: u64, s1: u64) -> Vec<(u64, u64)> {
        self.plain
            .iter()
            .zip(&self.masks)
            .enumerate()
            .map(|(i, (&x, &m))| {
                if i == secret {
                    (s0, s1)
                } else {
                    let (x, m) = (x % q, m % q);
                    ((x + q - m) % q, m)
                }
            })
            .collect()
    }
}

/// The `q x q` table of `tap` as a function of the shares `(s0, s1)` of input
/// `secret`, with alphabet `Z_q`.
pub fn extract_wire_function(
    pipeline: &Pipeline,
    tap: Tap,
    secret: usize,
    context: &FixedContext,
) -> Result<WireFunction> {
    pipeline.check_tap(tap)?;
    let mut tables = extract_all(pipeline, &[tap], secret, context)?;
    Ok(tables.pop().unwrap())
}

fn extract_all(
    pipeline: &Pipeline,
    taps: &[Tap],
    secret: usize,
    context: &FixedContext,
) -> Result<Vec<WireFunction>> {
    let q = pipeline.modulus();
    if q.get() > MAX_EXTRACT_Q {
        return Err(Error::EnumerationCap {
            q: q.get(),
            cap: MAX_EXTRACT_Q,
        });
    }
    if context.plain.len() != pipeline.width() || context.masks.len() != pipeline.width() {
        return Err(Error::Precondition("context width does not match the network".into()));
    }
    let qv = q.get();
    let cells = (qv * qv) as usize;
    let mut tables = vec![Vec::with_capacity(cells); taps.len()];
    for s0 in 0..qv {
        for s1 in 0..qv {
            let trace = pipeline.trace(&context.shares(qv, secret, s0, s1), secret)?;
            for (table, &tap) in tables.iter_mut().zip(taps) {
                table.push(trace.value(pipeline, tap) as u32);
            }
        }
    }
    tables
        .into_iter()
        .map(|t| WireFunction::from_table(q, qv as u32, t))
        .collect()
}

/// Units of Z_q, the default twiddle set.
pub fn units(q: Modulus) -> Vec<u64> {
    (1..q.get())
        .filter(|&t| num_integer::gcd(t, q.get()) == 1)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub q: u64,
    pub stages: usize,
    /// Candidate twiddles; each stage draws from this set. Empty means the
    /// units of Z_q.
    pub twiddles: Vec<u64>,
    /// Fixed contexts per (twiddles, secret) pair. The first is all zeros,
    /// the rest are drawn from `seed`.
    pub contexts: usize,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(q: u64, stages: usize) -> Self {
        Self {
            q,
            stages,
            twiddles: Vec::new(),
            contexts: 2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TapVerdict {
    pub twiddles: Vec<u64>,
    pub secret_input: usize,
    pub tap: String,
    /// Recombines both shares: a hypothetical unmasking probe.
    pub adversarial: bool,
    /// Structurally downstream of the secret input.
    pub secret_dependent: bool,
    /// Worst verdict over all contexts.
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub value_independent: u64,
    pub constant_marginal_only: u64,
    pub non_constant_marginal: u64,
}

impl VerdictCounts {
    fn add(&mut self, v: Verdict) {
        match v {
            Verdict::ValueIndependent => self.value_independent += 1,
            Verdict::ConstantMarginalOnly => self.constant_marginal_only += 1,
            Verdict::NonConstantMarginal => self.non_constant_marginal += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub q: u64,
    pub stages: usize,
    pub twiddle_set: Vec<u64>,
    pub contexts: usize,
    pub seed: u64,
    pub configurations: u64,
    pub sharewise: VerdictCounts,
    pub adversarial: VerdictCounts,
    /// Per-share taps with a non-constant marginal. Empty on a clean sweep.
    pub flagged_sharewise: Vec<TapVerdict>,
    /// Secret-dependent recombination taps that were not caught.
    pub missed_adversarial: Vec<TapVerdict>,
    /// Every trace kept the two secret shares apart in per-share taps.
    pub sharewise_isolation: bool,
    pub note: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taps: Option<Vec<TapVerdict>>,
}

impl SweepReport {
    pub fn clean(&self) -> bool {
        self.flagged_sharewise.is_empty()
            && self.missed_adversarial.is_empty()
            && self.sharewise_isolation
    }
}

pub const SWEEP_NOTE: &str = "A clean sweep is empirical evidence for composition at these \
parameters, not a proof.";

/// Exhaustive sweep over twiddle assignments, secret positions, and taps.
pub fn conjecture_sweep(cfg: &SweepConfig, keep_taps: bool) -> Result<SweepReport> {
    if cfg.q < 2 || cfg.q > MAX_SWEEP_Q {
        return Err(Error::SweepBudget(format!("q must be in 2..={MAX_SWEEP_Q}, got {}", cfg.q)));
    }
    if cfg.stages == 0 || cfg.stages > MAX_SWEEP_STAGES {
        return Err(Error::SweepBudget(format!(
            "stages must be in 1..={MAX_SWEEP_STAGES}, got {}",
            cfg.stages
        )));
    }
    if cfg.contexts == 0 || cfg.contexts > MAX_SWEEP_CONTEXTS {
        return Err(Error::SweepBudget(format!(
            "contexts must be in 1..={MAX_SWEEP_CONTEXTS}, got {}",
            cfg.contexts
        )));
    }
    let q = Modulus::new(cfg.q)?;
    let twiddle_set = if cfg.twiddles.is_empty() {
        units(q)
    } else {
        let mut t = cfg.twiddles.clone();
        t.sort_unstable();
        t.dedup();
        t
    };
    if let Some(&t) = twiddle_set.iter().find(|&&t| t >= cfg.q) {
        return Err(Error::NotReduced { value: t, q: cfg.q });
    }
    if twiddle_set.is_empty() {
        return Err(Error::SweepBudget("empty twiddle set".into()));
    }

    let width = 1usize << cfg.stages;
    let mut rng = crate::seeded_rng(cfg.seed, "butterfly");
    let contexts: Vec<FixedContext> = std::iter::once(FixedContext::zeros(width))
        .chain((1..cfg.contexts).map(|_| FixedContext::random(width, cfg.q, &mut rng)))
        .collect();

    let mut report = SweepReport {
        q: cfg.q,
        stages: cfg.stages,
        twiddle_set: twiddle_set.clone(),
        contexts: cfg.contexts,
        seed: cfg.seed,
        configurations: 0,
        sharewise: VerdictCounts::default(),
        adversarial: VerdictCounts::default(),
        flagged_sharewise: Vec::new(),
        missed_adversarial: Vec::new(),
        sharewise_isolation: true,
        note: SWEEP_NOTE,
        taps: keep_taps.then(Vec::new),
    };

    for assignment in assignments(&twiddle_set, cfg.stages) {
        let pipeline = Pipeline::from_twiddles(q, &assignment)?;
        let taps = pipeline.taps();
        for secret in 0..width {
            report.configurations += 1;
            let probe = pipeline.trace(&vec![(0, 0); width], secret)?;
            report.sharewise_isolation &= probe.isolation_holds(&pipeline);

            let mut worst = vec![Verdict::ValueIndependent; taps.len()];
            for ctx in &contexts {
                let tables = extract_all(&pipeline, &taps, secret, ctx)?;
                for (w, slot) in tables.iter().zip(worst.iter_mut()) {
                    *slot = (*slot).max(wire::classify(w));
                }
            }

            for (&tap, verdict) in taps.iter().zip(worst) {
                let (t0, t1) = probe.taint(&pipeline, tap);
                let entry = TapVerdict {
                    twiddles: assignment.clone(),
                    secret_input: secret,
                    tap: tap.to_string(),
                    adversarial: tap.signal.is_recombined(),
                    secret_dependent: t0 || t1,
                    verdict,
                };
                if entry.adversarial {
                    report.adversarial.add(verdict);
                    if entry.secret_dependent && verdict == Verdict::ValueIndependent {
                        report.missed_adversarial.push(entry.clone());
                    }
                } else {
                    report.sharewise.add(verdict);
                    if verdict == Verdict::NonConstantMarginal {
                        report.flagged_sharewise.push(entry.clone());
                    }
                }
                if let Some(all) = report.taps.as_mut() {
                    all.push(entry);
                }
            }
        }
    }
    Ok(report)
}

/// All `stages`-tuples over `set`, lexicographic.
fn assignments(set: &[u64], stages: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..stages {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                set.iter().map(move |&t| {
                    let mut next = prefix.clone();
                    next.push(t);
                    next
                })
            })
            .collect();
    }
    out
}
