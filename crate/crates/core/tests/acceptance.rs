//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p maskcheck --test acceptance`.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use maskcheck::bias::bias_profile;
use maskcheck::bitvec::{self, urem_reparam, WidthConfig};
use maskcheck::butterfly::{conjecture_sweep, MaskedValue, Pipeline, SweepConfig};
use maskcheck::census::{self, run_census, CensusReport};
use maskcheck::wire::{self, Verdict, WireFunction};
use maskcheck::zq::{self, BitWord, Modulus};
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($fmt)+)),
        }
    };
}

// Time limits and tolerances.
const LIMIT_MLKEM_BIAS: Duration = Duration::from_secs(1);
const LIMIT_BIAS_BOUNDS: Duration = Duration::from_secs(10);
const LIMIT_CENSUS_Q5: Duration = Duration::from_secs(300);
const LIMIT_WITNESS: Duration = Duration::from_secs(30);
const LIMIT_ROUND_TRIPS: Duration = Duration::from_secs(30);
const MI_TOLERANCE: f64 = 1e-9;

const RANDOM_PAIRS: usize = 1_000;
const ROUND_TRIPS: usize = 100_000;
const UREM_SAMPLES: usize = 100_000;
const TRANSLATION_PAIRS: usize = 100;
const SEED: u64 = 2024;

fn run_cli(args: &[&str]) -> (i32, serde_json::Value) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = ["maskcheck", "--format", "json"].into_iter().chain(args.iter().copied());
    let code = maskcheck::cli::run(argv, &mut out, &mut err);
    let value = serde_json::from_slice(&out).unwrap_or(serde_json::Value::Null);
    (code, value)
}

fn within(start: Instant, limit: Duration) -> Check {
    let took = start.elapsed();
    ensure!(took <= limit, "took {took:.2?}, limit {limit:?}");
    Ok(format!("{took:.2?}"))
}

/// 1. Residue counts of a 12-bit generator reduced mod 3329.
fn mlkem_bias() -> Check {
    let start = Instant::now();
    let (code, v) = run_cli(&["bias", "--n", "4096", "--q", "3329"]);
    ensure!(code == 0, "exit code {code}");
    ensure!(v["schema"] == "maskcheck/1", "schema {}", v["schema"]);
    ensure!(v["counts"][0] == 2, "count(0) = {}", v["counts"][0]);
    ensure!(v["counts"][767] == 1, "count(767) = {}", v["counts"][767]);
    ensure!(v["counts"][766] == 2, "count(766) = {}", v["counts"][766]);
    ensure!(v["ratio"] == "2/1", "ratio {}", v["ratio"]);
    within(start, LIMIT_MLKEM_BIAS)
}

/// 2. Floor/ceiling bounds on random `(N, q)`.
fn bias_bounds() -> Check {
    let start = Instant::now();
    let mut rng = maskcheck::seeded_rng(SEED, "acceptance-bias");
    let mut divisible = 0;
    for _ in 0..RANDOM_PAIRS {
        let n = rng.gen_range(1..=1u64 << 32);
        // log-uniform so small moduli show up
        let q = (2f64.powf(rng.gen_range(0.0..=24.0)) as u64).clamp(1, 1 << 24);
        let (lo, hi) = (n / q, n.div_ceil(q));
        let p = bias_profile(n, Modulus::new(q).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let mut total = 0u64;
        for (r, c) in p.counts.iter().enumerate() {
            ensure!(lo <= c && c <= hi, "N = {n}, q = {q}: count({r}) = {c} outside [{lo}, {hi}]");
            if n % q == 0 {
                ensure!(c == n / q, "N = {n}, q = {q}: count({r}) = {c} != N/q");
            }
            total += c;
        }
        ensure!(total == n, "N = {n}, q = {q}: counts sum to {total}");
        divisible += (n % q == 0) as usize;
    }
    // make sure the equality branch actually ran
    for (n, q) in [(1u64 << 32, 1u64 << 16), (3329 * 4096, 3329), (1 << 24, 1 << 24)] {
        let p = bias_profile(n, Modulus::new(q).unwrap()).unwrap();
        ensure!(p.counts.iter().all(|c| c == n / q), "N = {n}, q = {q}: not uniform");
        divisible += 1;
    }
    let t = within(start, LIMIT_BIAS_BOUNDS)?;
    Ok(format!("{RANDOM_PAIRS} pairs, {divisible} with q | N, {t}"))
}

/// 3. Width admissibility and the exhaustive intermediate range.
fn width_bounds() -> Check {
    for (q, w, expect) in [(3329u64, 24u32, true), (8_380_417, 24, true), (8_388_608, 24, false)] {
        let (code, v) = run_cli(&["bounds", "--q", &q.to_string(), "--w", &w.to_string()]);
        ensure!(code == 0, "bounds q = {q}: exit code {code}");
        ensure!(v["admissible"] == expect, "q = {q}, w = {w}: admissible = {}", v["admissible"]);
        // 2q < 2^w computed here in u128
        ensure!(((2 * q as u128) < (1u128 << w)) == expect, "oracle disagrees at q = {q}");
    }
    let mut pairs = 0u64;
    for q in 1..=64u64 {
        for x in 0..q {
            for s1 in 0..q {
                let t = bitvec::overflow_intermediate(q, x, s1).map_err(|e| e.to_string())?;
                ensure!(t == (x + q - s1) as u128, "q = {q}: intermediate {t}");
                ensure!(t >= 1 && t < 2 * q as u128, "q = {q}, x = {x}, s1 = {s1}: t = {t}");
                ensure!(
                    bitvec::no_overflow_bounds(q, x, s1).map_err(|e| e.to_string())? == (true, true),
                    "q = {q}, x = {x}, s1 = {s1}"
                );
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} pairs at q <= 64"))
}

/// Single-worker census, computed once per `q` and shared by criteria 4 and 5.
fn census_at(q: u64) -> Result<(CensusReport, Duration), String> {
    static CACHE: Mutex<Vec<(CensusReport, Duration)>> = Mutex::new(Vec::new());
    let mut cache = CACHE.lock().unwrap();
    if let Some(hit) = cache.iter().find(|(r, _)| r.q == q) {
        return Ok(hit.clone());
    }
    let start = Instant::now();
    let r = run_census(q, 1).map_err(|e| e.to_string())?;
    cache.push((r, start.elapsed()));
    Ok(cache.last().unwrap().clone())
}

fn counts(r: &CensusReport) -> [u64; 6] {
    [
        r.total_wires,
        r.count_value_independent,
        r.count_constant_marginal,
        r.count_conservative,
        r.count_non_constant,
        r.soundness_violations,
    ]
}

/// 4. Census soundness for q = 2..5, independent of the worker count.
fn census_soundness() -> Check {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut lines = Vec::new();
    for (q, wires) in [(2u64, 16u64), (3, 512), (4, 65_536), (5, 33_554_432)] {
        let (first, took) = census_at(q)?;
        ensure!(first.total_wires == wires, "q = {q}: {} wires", first.total_wires);
        ensure!(first.soundness_violations == 0, "q = {q}: {} violations", first.soundness_violations);
        ensure!(first.check_invariants(), "q = {q}: counts do not add up");
        if q == 5 {
            ensure!(took <= LIMIT_CENSUS_Q5, "q = 5 took {took:.2?}, limit {LIMIT_CENSUS_Q5:?}");
        }
        let mut workers = vec![2, cores];
        if q <= 4 {
            workers.push(7);
        }
        workers.dedup();
        for n in workers {
            let other = run_census(q, n).map_err(|e| e.to_string())?;
            ensure!(counts(&other) == counts(&first), "q = {q}: counts differ with {n} workers");
        }
        lines.push(format!("q={q} {took:.1?}"));
    }
    Ok(format!("{} ({cores} core(s))", lines.join(", ")))
}

fn binomial(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// 5. Constant-marginal counts against the closed formula.
fn census_formula() -> Check {
    // pinned by hand, e.g. q = 4: C(4,k)^4 = 1, 256, 1296, 256, 1
    let pinned = [(2u64, 6u64), (3, 56), (4, 1810), (5, 206_252)];
    for (q, expect) in pinned {
        let formula: u128 = (0..=q).map(|k| binomial(q, k).pow(q as u32)).sum();
        ensure!(formula == expect as u128, "formula at q = {q} gives {formula}, pinned {expect}");
        let (r, _) = census_at(q)?;
        ensure!(r.count_constant_marginal == expect, "q = {q}: census {} != {expect}", r.count_constant_marginal);
        ensure!(r.count_value_independent == 1 << q, "q = {q}: {} value-independent", r.count_value_independent);
    }
    Ok("6, 56, 1810, 206252".into())
}

/// 6. The `[s0 = 0]` wire at sampled moduli.
fn witness() -> Check {
    let start = Instant::now();
    let mut rng = maskcheck::seeded_rng(SEED, "acceptance-witness");
    for q in [2u64, 3, 5, 17, 257, 3329] {
        let m = Modulus::new(q).unwrap();
        let w = wire::zero_share_witness(m).map_err(|e| e.to_string())?;
        ensure!(wire::classify(&w) == Verdict::ConstantMarginalOnly, "q = {q}: {}", wire::classify(&w));
        // exactly one mask hits s0 = 0 for each secret
        for x in 0..q {
            let hits = (0..q).filter(|&s1| w.eval_reparam(x, s1) == 1).count();
            ensure!(hits == 1, "q = {q}, x = {x}: {hits} masks give 1");
        }
        for _ in 0..TRANSLATION_PAIRS {
            let x = m.element(rng.gen_range(0..q)).unwrap();
            let x2 = m.element(rng.gen_range(0..q)).unwrap();
            ensure!(
                wire::translation_bijection_check(&w, x, x2).map_err(|e| e.to_string())?,
                "q = {q}: translation fails for ({}, {})",
                x.value(),
                x2.value()
            );
        }
    }
    within(start, LIMIT_WITNESS)
}

/// 7. Boolean and arithmetic round trips, and bijectivity.
fn round_trips() -> Check {
    let start = Instant::now();
    let mut rng = maskcheck::seeded_rng(SEED, "acceptance-round-trip");
    for k in [1u32, 8, 24, 64] {
        let mask = BitWord::mask(k);
        for _ in 0..ROUND_TRIPS {
            let x = BitWord::new(k, rng.gen::<u64>() & mask).unwrap();
            let s1 = BitWord::new(k, rng.gen::<u64>() & mask).unwrap();
            let s0 = zq::bool_reparam(x, s1).map_err(|e| e.to_string())?;
            ensure!(s0.bits() == x.bits() ^ s1.bits(), "k = {k}: wrong share");
            ensure!(zq::bool_reparam(s0, s1).unwrap() == x, "k = {k}: round trip failed");
        }
    }
    let fixed = [2u64, 5, 3329, 8_380_417].map(Some);
    for q in fixed.into_iter().chain([None]) {
        for _ in 0..ROUND_TRIPS {
            let q = q.unwrap_or_else(|| rng.gen_range(1..=u32::MAX as u64));
            let m = Modulus::new(q).unwrap();
            let (x, s1) = (rng.gen_range(0..q), rng.gen_range(0..q));
            let s0 = zq::arith_reparam(m.element(x).unwrap(), m.element(s1).unwrap()).map_err(|e| e.to_string())?;
            ensure!(s0.value() as i128 == (x as i128 - s1 as i128).rem_euclid(q as i128), "q = {q}: s0 wrong");
            ensure!((s0.value() + s1) % q == x, "q = {q}: x = {x}, s1 = {s1} does not round-trip");
        }
    }
    for q in 1..=64u64 {
        let m = Modulus::new(q).unwrap();
        for s1 in m.elements() {
            let mut hit = vec![false; q as usize];
            for x in m.elements() {
                hit[zq::arith_reparam(x, s1).unwrap().value() as usize] = true;
            }
            ensure!(hit.iter().all(|&h| h), "q = {q}, s1 = {}: not onto", s1.value());
            ensure!(zq::arith_reparam_is_bijection(s1).unwrap(), "q = {q}: library disagrees");
        }
    }
    within(start, LIMIT_ROUND_TRIPS)
}

/// 8. The bit-vector URem encoding against ring subtraction.
fn urem_equivalence() -> Check {
    let reference = |q: u64, x: u64, s1: u64| (x as i64 - s1 as i64).rem_euclid(q as i64) as u64;
    let mut checked = 0u64;
    for q in 1..=64u64 {
        let cfg = WidthConfig::new(Modulus::new(q).unwrap(), 24);
        for x in 0..q {
            for s1 in 0..q {
                let r = urem_reparam(cfg, x, s1).map_err(|e| e.to_string())?;
                ensure!(r.s0 == reference(q, x, s1) && r.recombined == x, "q = {q}, x = {x}, s1 = {s1}");
                checked += 1;
            }
        }
    }
    let mut rng = maskcheck::seeded_rng(SEED, "acceptance-urem");
    for q in [3329u64, 8_380_417] {
        let cfg = WidthConfig::new(Modulus::new(q).unwrap(), 24);
        for _ in 0..UREM_SAMPLES {
            let (x, s1) = (rng.gen_range(0..q), rng.gen_range(0..q));
            let r = urem_reparam(cfg, x, s1).map_err(|e| e.to_string())?;
            ensure!(r.s0 == reference(q, x, s1) && r.recombined == x, "q = {q}, x = {x}, s1 = {s1}");
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs"))
}

/// 9. Mutual information against the histogram verdict.
fn mutual_information() -> Check {
    let mut zero = 0;
    for index in 0..512u64 {
        let w = census::decode_wire(3, index).map_err(|e| e.to_string())?;
        let mi = wire::mutual_information(&w);
        let cm = wire::has_constant_marginal(&w);
        ensure!(mi.is_zero == cm, "wire {index}: is_zero = {}, constant marginal = {cm}", mi.is_zero);
        if cm {
            ensure!(mi.bits == 0.0, "wire {index}: MI = {:e} on a constant-marginal wire", mi.bits);
            zero += 1;
        } else {
            ensure!(mi.bits > 0.0, "wire {index}: MI = 0 on a leaking wire");
        }
    }
    // AND of the shares at q = 2: W = 1 only for (x, s1) = (0, 0) among four
    // outcomes, so H(W) = H(1/4) and H(W | X = 0) = 1, H(W | X = 1) = 0.
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let expected = h(0.25) - 0.5;
    ensure!((expected - 0.311_278_124_459_132_8).abs() < 1e-15, "oracle drifted: {expected}");
    let and = WireFunction::boolean(Modulus::new(2).unwrap(), |s0, s1| s0 == 0 && s1 == 0).unwrap();
    let mi = wire::mutual_information(&and);
    ensure!((mi.bits - expected).abs() < MI_TOLERANCE, "AND wire MI = {}, expected {expected}", mi.bits);
    Ok(format!("{zero} zero-MI wires, AND = {:.10} bits", mi.bits))
}

/// 10. Butterfly sweep and masked/plain agreement.
fn butterfly() -> Check {
    let mut configurations = 0;
    let mut probes = 0;
    for q in [2u64, 3, 5, 7] {
        for stages in 1..=3 {
            let r = conjecture_sweep(&SweepConfig::new(q, stages), true).map_err(|e| e.to_string())?;
            ensure!(r.sharewise.non_constant_marginal == 0, "q = {q}, {stages} stage(s): per-share leak");
            ensure!(r.sharewise_isolation, "q = {q}, {stages} stage(s): shares mixed");
            for t in r.taps.as_deref().unwrap_or_default() {
                if !t.adversarial {
                    ensure!(t.verdict != Verdict::NonConstantMarginal, "{} flagged at q = {q}", t.tap);
                } else if t.secret_dependent {
                    ensure!(
                        t.verdict != Verdict::ValueIndependent,
                        "{} (twiddles {:?}, secret {}) not flagged at q = {q}",
                        t.tap,
                        t.twiddles,
                        t.secret_input
                    );
                    probes += 1;
                }
            }
            ensure!(r.clean(), "q = {q}, {stages} stage(s): sweep not clean");
            configurations += r.configurations;
        }
    }

    // one butterfly, every twiddle, value and mask
    for qv in 2..=7u64 {
        let q = Modulus::new(qv).unwrap();
        for t in 0..qv {
            let p = Pipeline::from_twiddles(q, &[t]).unwrap();
            for a in 0..qv {
                for b in 0..qv {
                    let (c, d) = ((a + t * b) % qv, (a + qv * qv - t * b) % qv);
                    for ma in 0..qv {
                        for mb in 0..qv {
                            let inputs = [
                                MaskedValue::mask(q.element(a).unwrap(), q.element(ma).unwrap()).unwrap(),
                                MaskedValue::mask(q.element(b).unwrap(), q.element(mb).unwrap()).unwrap(),
                            ];
                            let out = p.run_masked(&inputs).map_err(|e| e.to_string())?;
                            ensure!(
                                out[0].recombine().value() == c && out[1].recombine().value() == d,
                                "q = {qv}, t = {t}, a = {a}, b = {b}"
                            );
                        }
                    }
                }
            }
        }
    }

    let mut rng = maskcheck::seeded_rng(SEED, "acceptance-butterfly");
    let q = Modulus::new(3329).unwrap();
    for _ in 0..10_000 {
        let tw: Vec<u64> = (0..3).map(|_| rng.gen_range(0..3329)).collect();
        let p = Pipeline::from_twiddles(q, &tw).unwrap();
        let plain: Vec<_> = (0..8).map(|_| q.element(rng.gen_range(0..3329)).unwrap()).collect();
        let masked: Vec<_> = plain
            .iter()
            .map(|&x| MaskedValue::mask(x, q.element(rng.gen_range(0..3329)).unwrap()).unwrap())
            .collect();
        let a = p.run_plain(&plain).map_err(|e| e.to_string())?;
        let b = p.run_masked(&masked).map_err(|e| e.to_string())?;
        ensure!(
            a.iter().zip(&b).all(|(x, m)| *x == m.recombine()),
            "q = 3329, twiddles {tw:?}: masked and plain differ"
        );
    }
    Ok(format!("{configurations} configurations, {probes} recombination probes flagged"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("residue counts for N = 4096, q = 3329", mlkem_bias),
        ("residue count bounds on random (N, q)", bias_bounds),
        ("width admissibility and intermediate range", width_bounds),
        ("census soundness for q = 2..5", census_soundness),
        ("census against the constant-marginal formula", census_formula),
        ("[s0 = 0] witness at sampled moduli", witness),
        ("reparametrization round trips", round_trips),
        ("URem encoding equivalence", urem_equivalence),
        ("mutual information consistency", mutual_information),
        ("butterfly sweep and masked/plain agreement", butterfly),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL {:>2} {name}: {why}", i + 1);
                failed += 1;
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
