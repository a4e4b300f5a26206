//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the PASS/FAIL lines are always
//! visible under `cargo test`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use padiclf::lseries::{
    decay_check, eval_at, falling_factorial_derivative, functional_equation_check, order_of_vanishing, taylor_expand,
    truncated_psi_inverse, verify_c1_lemma, ZeroStatus,
};
use padiclf::measure::{moments, MeasureTable};
use padiclf::modsym::{build_space, eigensymbol, EigenSymbol};
use padiclf::numoracle::{self, curves, CurveData};
use padiclf::padics::{is_supersingular, AlphaElement, RootChoice};

const M: u32 = 5;
const K: u32 = 40;
const COEFFS: usize = 8;
const SEED: u64 = 0x5eed_0005;

struct Fixture {
    name: &'static str,
    curve: CurveData,
    symbol: EigenSymbol,
    p: u64,
    ap: i64,
    table: MeasureTable,
}

/// Eigensymbol from point-counted eigenvalues at the two smallest good primes
/// other than `p`, and the measure at `p` to depth `M`.
fn fixture(name: &'static str, curve: CurveData, p: u64) -> Result<Fixture, String> {
    let n = curve.conductor;
    let primes: Vec<u64> = [2u64, 3, 5, 7, 11, 13].into_iter().filter(|q| n % q != 0 && *q != p).take(2).collect();
    let mut ev = BTreeMap::new();
    for q in primes {
        ev.insert(q, numoracle::a_p(&curve, q).map_err(|e| e.to_string())?);
    }
    let space = build_space(n).map_err(|e| e.to_string())?;
    let symbol = eigensymbol(&space, &ev, 1).map_err(|e| e.to_string())?;
    let ap = numoracle::a_p(&curve, p).map_err(|e| e.to_string())?;
    let root = if is_supersingular(ap, p) { RootChoice::Plus } else { RootChoice::Unit };
    let table = MeasureTable::build(&symbol, p, ap, root, M).map_err(|e| e.to_string())?;
    Ok(Fixture { name, curve, symbol, p, ap, table })
}

/// First prime p >= 5 of good reduction with a_p = 0.
fn supersingular_prime(curve: &CurveData) -> Option<u64> {
    (5u64..100)
        .filter(|&q| padiclf::padics::is_prime(q) && curve.conductor % q != 0)
        .find(|&q| numoracle::a_p(curve, q).map_or(false, |a| a == 0))
}

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed <= limit, format!("took {:.1?}, limit {:.0?}", elapsed, limit))
}

fn int(n: i64) -> BigInt {
    BigInt::from(n)
}

fn criterion_1(ordinary: &Fixture, supersingular: &Fixture) -> Outcome {
    let mut notes = Vec::new();
    for f in [ordinary, supersingular] {
        let start = Instant::now();
        let table = MeasureTable::build(&f.symbol, f.p, f.ap, f.table.root, 5).map_err(|e| format!("{}: {e}", f.name))?;
        table.check_additivity().map_err(|e| format!("{}: {e}", f.name))?;
        within(start.elapsed(), Duration::from_secs(30))?;
        notes.push(format!("{}/p={} a_p={} levels 1..5", f.name, f.p, f.ap));
    }
    Ok(notes.join("; "))
}

fn criterion_2(f: &Fixture) -> Outcome {
    let ctx = &f.table.ctx;
    let lambda0 = f.symbol.eval_path(&BigRational::zero());
    let alpha_inv = AlphaElement::alpha().inverse(ctx).map_err(|e| e.to_string())?;
    let one_minus = AlphaElement::one().sub(&alpha_inv);
    let expected = one_minus.mul(&one_minus, ctx).scale(&lambda0);
    check(f.table.total_mass() == expected, "total mass differs from (1 - 1/alpha)^2 lambda(0)")?;

    let root_number = -f.symbol.fricke_sign;
    let l = numoracle::l_value_numeric(&f.curve, 4000, root_number).map_err(|e| e.to_string())?;
    let omega = numoracle::real_period(&f.curve).map_err(|e| e.to_string())?;
    let ratio = l.value / omega;
    let lam = lambda0.to_f64().ok_or("lambda(0) not representable")?;
    check(lam != 0.0, "lambda(0) vanishes on the rank-0 fixture")?;
    let normalization = lam / ratio;
    let (a, b) = numoracle::nearest_rational(normalization, 1000);
    let rel = (normalization - a as f64 / b as f64).abs() / normalization.abs();
    check(rel < 1e-4, format!("normalization {normalization} not near a small rational (rel {rel:e})"))?;
    // Regression: L(E,1)/Omega+ = 1/5 and the symbol is primitive with lambda(0) = 2.
    check((a, b) == (10, 1), format!("normalization {a}/{b} differs from the recorded 10/1"))?;
    Ok(format!("mass exact; lambda(0)={lambda0}, L/Omega={ratio:.8}, normalization {a}/{b} (rel {rel:.1e})"))
}

fn criterion_3(f: &Fixture) -> Outcome {
    let start = Instant::now();
    let series = taylor_expand(&f.table, &int(1), COEFFS, M, K).map_err(|e| e.to_string())?;
    let report = order_of_vanishing(&series);
    let c0_floor = match report.ledger[0] {
        ZeroStatus::ConsistentWithZero(floor) => floor,
        ZeroStatus::Nonzero(v) => return Err(format!("c_0 provably nonzero (valuation {v})")),
    };
    check(c0_floor >= Ratio::from_integer(4), format!("c_0 floor {c0_floor} below 4"))?;
    let order = report.order.ok_or("order undetermined")?;
    check(order >= 1, format!("order {order}"))?;
    // Regression value recorded when first established: c_1 provably nonzero
    // with valuation 1.
    check(report.ledger[1] == ZeroStatus::Nonzero(Ratio::from_integer(1)), format!("c_1 status {}", report.ledger[1]))?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!("c_0 zero to p^{c0_floor}, order {order}, c_1: {}", report.ledger[1]))
}

fn criterion_4(fixtures: &[&Fixture]) -> Outcome {
    let mut notes = Vec::new();
    for f in fixtures {
        let p = f.p as i64;
        let samples = [int(1), int(1 + p), int(1 - p)];
        let fe = functional_equation_check(&f.table, &f.symbol, &samples, M).map_err(|e| format!("{}: {e}", f.name))?;
        for s in &fe.samples {
            check(s.pass, format!("{} at s={}: residual {} < floor {}", f.name, s.s, s.residual_valuation, s.floor))?;
        }
        check(fe.pass(), format!("{}: inconsistent sign", f.name))?;
        notes.push(format!("{} eps={:+}", f.name, fe.epsilon));
    }
    Ok(notes.join(", "))
}

fn criterion_5(fixtures: &[&Fixture]) -> Outcome {
    let mut notes = Vec::new();
    for f in fixtures {
        let mv = moments(&f.table, 20, M).map_err(|e| e.to_string())?;
        let ledger = decay_check(&mv).map_err(|e| e.to_string())?;
        if let Some(k) = ledger.first_failure() {
            return Err(format!("{}: bound violated at k={k}", f.name));
        }
        let min = ledger.rows.iter().map(|r| r.margin).min().ok_or("empty ledger")?;
        check(min >= Ratio::from_integer(0), format!("{}: negative margin", f.name))?;
        notes.push(format!("{} min margin {min}", f.name));
    }
    Ok(notes.join(", "))
}

/// Coefficients (lowest degree first) of prod_{i=1..n} (x - i).
fn falling_poly(n: usize) -> Vec<BigInt> {
    let mut c = vec![int(1)];
    for i in 1..=n {
        let mut next = vec![BigInt::zero(); c.len() + 1];
        for (d, a) in c.iter().enumerate() {
            next[d + 1] += a;
            next[d] -= a * int(i as i64);
        }
        c = next;
    }
    c
}

fn derive_and_eval(c: &[BigInt], j: usize, s: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for d in (j..c.len()).rev() {
        let falling: BigInt = ((d - j + 1)..=d).map(|x| int(x as i64)).product();
        acc = acc * s + &c[d] * falling;
    }
    acc
}

fn criterion_6(rng: &mut StdRng) -> Outcome {
    let start = Instant::now();
    let p = 5u64;
    let points: Vec<BigInt> = (0..5).map(|_| int(rng.gen_range(-10_000..10_000))).collect();
    for n in 0..=8 {
        let poly = falling_poly(n);
        for j in 0..=n {
            for s in &points {
                // f_n(s) = prod (s - i) for i = 1..n, differentiated as a polynomial
                let want = derive_and_eval(&poly, j, s);
                check(falling_factorial_derivative(n, j, s) == want, format!("f_{n}^({j}) at {s}"))?;
            }
        }
    }
    for n in 2..=8 {
        for j in 1..n {
            for s in &points {
                let c = verify_c1_lemma(n, j, s, p, 2).map_err(|e| e.to_string())?;
                check(c.pass, format!("c_1 != {} at n={n}, s={s}", j + 1))?;
            }
        }
    }
    let mut pool: Vec<usize> = (1..=40).collect();
    for i in 0..pool.len() {
        let k = rng.gen_range(i..pool.len());
        pool.swap(i, k);
    }
    let mut idx = pool[..12].to_vec();
    idx.sort();
    let s0 = int(rng.gen_range(-50..50));
    let inv = truncated_psi_inverse(&idx, &s0, p).map_err(|e| e.to_string())?;
    check(inv.residual_is_identity, "psi * psi^-1 != I")?;
    check(inv.min_valuation >= 0, "psi entry not p-integral")?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("n<=8 at 5 points; c_1 = j+1; psi K=12 indices {idx:?} at s0={s0}"))
}

fn criterion_7(f: &Fixture, rng: &mut StdRng) -> Outcome {
    let start = Instant::now();
    let p = f.p as i64;
    let series = taylor_expand(&f.table, &int(1), COEFFS, M, K).map_err(|e| e.to_string())?;
    let m = M - 1;
    for _ in 0..10 {
        let s = int(1 + p * rng.gen_range(-1000..1000));
        let a = series.evaluate(&s);
        let b = eval_at(&f.table, &s, M).map_err(|e| e.to_string())?;
        let floor = a.floor.min(b.floor);
        check(a.value.sub(&b.value).truncate(floor).is_zero(), format!("two paths disagree at s={s}"))?;

        let coarse = eval_at(&f.table, &s, m).map_err(|e| e.to_string())?;
        let err = f.table.error_floor(m);
        check(
            coarse.value.sub(&b.value).truncate(err).is_zero(),
            format!("levels {m} and {M} disagree beyond p^{err} at s={s}"),
        )?;
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{}: 10 points s = 1 + p r", f.name))
}

fn criterion_8(fixtures: &[&Fixture]) -> Outcome {
    let mut notes = Vec::new();
    for f in fixtures {
        let mut witness = None;
        'centers: for c in [1, 2] {
            let series = taylor_expand(&f.table, &int(c), COEFFS, M, K).map_err(|e| format!("{}: {e}", f.name))?;
            for (j, coeff) in series.coeffs.iter().enumerate() {
                if coeff.is_provably_nonzero() {
                    witness = Some(format!("{} c_{j}@{c} v={}", f.name, coeff.value.valuation()));
                    break 'centers;
                }
            }
        }
        notes.push(witness.ok_or_else(|| format!("{}: no provably nonzero coefficient", f.name))?);
    }
    Ok(notes.join(", "))
}

fn criterion_9(fixtures: &[&Fixture]) -> Outcome {
    for f in fixtures {
        for q in [2u64, 3, 7, 13] {
            let counted = numoracle::a_p(&f.curve, q).map_err(|e| e.to_string())?;
            let hecke = f.symbol.hecke_eigenvalue(q).map_err(|e| e.to_string())?;
            check(counted == hecke, format!("{} q={q}: point count {counted}, symbol {hecke}", f.name))?;
        }
    }
    Ok("q in {2,3,7,13} on 11a1 and 37a1".into())
}

fn main() {
    let setup = Instant::now();
    let e11 = fixture("11a1", curves::e11a1(), 5).expect("11a1 fixture");
    let e37 = fixture("37a1", curves::e37a1(), 5).expect("37a1 fixture");
    let c14 = curves::e14a1();
    let ss = supersingular_prime(&c14).expect("14a1 has a supersingular prime below 100");
    let e14 = fixture("14a1", c14, ss).expect("14a1 fixture");
    println!("fixtures built in {:.1?} (supersingular: 14a1 at p={ss})", setup.elapsed());

    let all = [&e11, &e37, &e14];
    type Job<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let jobs: Vec<(&str, Job)> = vec![
        ("1 distribution axioms", Box::new(|| criterion_1(&e11, &e14))),
        ("2 total mass / interpolation", Box::new(|| criterion_2(&e11))),
        ("3 rank sensitivity (37a1)", Box::new(|| criterion_3(&e37))),
        ("4 functional equation", Box::new(|| criterion_4(&all))),
        ("5 moment decay", Box::new(|| criterion_5(&all))),
        ("6 combinatorics", Box::new(|| criterion_6(&mut StdRng::seed_from_u64(SEED ^ 6)))),
        ("7 two-path and refinement", Box::new(|| criterion_7(&e11, &mut StdRng::seed_from_u64(SEED ^ 7)))),
        ("8 non-vanishing witness", Box::new(|| criterion_8(&all))),
        ("9 oracle agreement", Box::new(|| criterion_9(&[&e11, &e37]))),
    ];
    let results: Vec<(&str, Outcome, Duration)> = jobs
        .into_iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let out = f();
            (name, out, start.elapsed())
        })
        .collect();

    let mut failed = 0;
    for (name, out, elapsed) in &results {
        match out {
            Ok(note) => println!("criterion {name}: PASS ({elapsed:.1?}) {note}"),
            Err(why) => {
                failed += 1;
                println!("criterion {name}: FAIL ({elapsed:.1?}) {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
