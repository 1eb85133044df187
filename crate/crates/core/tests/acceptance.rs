//! Acceptance run: one line per criterion, non-zero exit if any fails.

use iwa::dieudonne;
use iwa::dirichlet::DirichletCharacter;
use iwa::distribution::growth_order;
use iwa::eulersys::{
    build_synthetic_system, invert_unit_mod_radical, rankin_factorization_check, validate_system, EulerPrime,
    GroupRingElement, SyntheticSystem, TameLevel,
};
use iwa::lfunctions::{euler_factor_e, euler_factor_eprime, exceptional_zero_report, kl_series, kl_value};
use iwa::logs::{bridging_check, log_identity_check, pollack_log, shifted_log_check, Kind, LogKind};
use iwa::signed::{
    combination_alpha_alpha, doubly_signed_table, factor_signed, synthesize, Convention, MockGlobalModule, SignedLogs,
    SignedQuadruple,
};
use iwa::{FiniteCharacter, Form, IwaError, IwasawaElement, PadicScalar, Precision};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::Instant;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c1_log_product() -> Outcome {
    let mut worst = 0.0f64;
    for p in [3u64, 5, 7] {
        let prec = Precision::new(p, 30, 64).map_err(err)?;
        let t = Instant::now();
        let rep = log_identity_check(p, 1, prec).map_err(err)?;
        let secs = t.elapsed().as_secs_f64();
        worst = worst.max(secs);
        ensure(rep.deviation.is_none(), || format!("p = {p}: deviation {}", rep.deviation_text()))?;
        ensure(rep.checked_p_prec >= 30 && rep.checked_x_prec >= 64, || format!("p = {p}: checked only to {rep:?}"))?;
        ensure(secs < 5.0, || format!("p = {p} took {secs:.2} s"))?;
        // log_{p,1} against the classical series Σ (−1)^{n+1} X^n / n
        let full = pollack_log(LogKind::full(1, 0), prec).map_err(err)?;
        let s = &full.body.component(0).a;
        for n in 1..64i128 {
            let sign = if n % 2 == 1 { 1 } else { -1 };
            let want = PadicScalar::from_ratio(p, sign, n, 34).map_err(err)?;
            let d = s.coeff(n as usize).sub(&want);
            ensure(d.is_zero() && d.abs_prec() >= 30 - 4, || format!("p = {p}: coefficient {n} of log_p(1+X)"))?;
        }
    }
    Ok(format!("p in {{3,5,7}} exact mod (p^30, X^64), slowest {worst:.2} s"))
}

fn c2_shifted_and_bridging() -> Outcome {
    let prec = Precision::new(5, 20, 64).map_err(err)?;
    let mut windows = Vec::new();
    for kind in [Kind::Plus, Kind::Minus] {
        for r in 1..=3 {
            let rep = shifted_log_check(kind, r, prec).map_err(err)?;
            ensure(rep.holds() && rep.checked_x_prec > 0, || format!("{}: {}", rep.identity, rep.deviation_text()))?;
            windows.push(rep.checked_x_prec);
        }
    }
    for k in [0, 1] {
        let rep = bridging_check(k, prec).map_err(err)?;
        ensure(rep.holds() && rep.checked_x_prec > 0, || format!("{}: {}", rep.identity, rep.deviation_text()))?;
        windows.push(rep.checked_x_prec);
    }
    Ok(format!(
        "6 shifted + 2 bridging identities exact mod p^18, X-windows {}..{}",
        windows.iter().min().unwrap(),
        windows.iter().max().unwrap()
    ))
}

fn c3_growth() -> Outcome {
    let t = Instant::now();
    let prec = Precision::new(5, 12, 626).map_err(err)?;
    let mut worst = 0.0f64;
    for r in 1..=4u32 {
        for (kind, want) in [(Kind::Plus, r as f64 / 2.0), (Kind::Minus, r as f64 / 2.0), (Kind::Full, r as f64)] {
            let l = pollack_log(LogKind::new(kind, r, 0).map_err(err)?, prec).map_err(err)?;
            let got = growth_order(&l.body, 4).map_err(err)?;
            worst = worst.max((got - want).abs());
            ensure((got - want).abs() <= 0.25, || format!("log^{}_{r}: order {got:.3}, expected {want}", kind.symbol()))?;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
    Ok(format!("r = 1..4, depth 4, N = 626: largest error {worst:.3}, {secs:.1} s"))
}

fn c4_round_trip() -> Outcome {
    let prec = Precision::new(5, 20, 64).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xac4);
    let mut failures_seen = 0;
    for k in [0u32, 1] {
        let form = Form::new(5, k, 1).map_err(err)?;
        let strong = SignedLogs::strong(k, prec).map_err(err)?;
        let weak = SignedLogs::weak(k, prec).map_err(err)?;
        for i in 0..200 {
            let conv = if i % 2 == 0 { Convention::TheoremA } else { Convention::LemmaFactorisation };
            let s = SignedQuadruple::random_integral(prec, Some(form), &mut rng);
            let q = synthesize(&s, &strong, form, conv).map_err(err)?;
            let f = factor_signed(&q, &strong, form, conv).map_err(|e| format!("k = {k}, draw {i}: {e}"))?;
            ensure(f.quad.agrees(&s), || format!("k = {k}, draw {i}: round trip differs"))?;
        }
        for i in 0..20 {
            let s = SignedQuadruple::random_integral(prec, Some(form), &mut rng);
            let q = synthesize(&s, &weak, form, Convention::TheoremA).map_err(err)?;
            match factor_signed(&q, &strong, form, Convention::TheoremA) {
                Err(IwaError::Divisibility(f)) if matches!(f.row, Some(1) | Some(2)) => failures_seen += 1,
                other => return Err(format!("k = {k}, weak draw {i}: expected a row-1/2 failure, got {:?}", other.map(|_| ())))
            }
        }
    }
    Ok(format!("400 round trips exact; {failures_seen}/40 weak inputs rejected at row 1 or 2"))
}

fn c5_circ_and_antisymmetry() -> Outcome {
    let prec = Precision::new(5, 12, 24).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xac5);
    let logs = [SignedLogs::strong(0, prec).map_err(err)?, SignedLogs::strong(1, prec).map_err(err)?];
    for i in 0..100 {
        let k = (i % 2) as u32;
        let form = Form::new(5, k, 1 + 3 * (i / 2 % 2) as i64).map_err(err)?;
        let conv = if i / 4 % 2 == 0 { Convention::TheoremA } else { Convention::LemmaFactorisation };
        let g = MockGlobalModule::random(form, conv, logs[k as usize].clone(), &mut rng);
        let t = doubly_signed_table(&g).map_err(|e| format!("module {i}: {e}"))?;
        for (a, b, x) in &t {
            let (_, _, y) = t.iter().find(|(c, d, _)| c == b && d == a).expect("table has both orders");
            ensure(x.add(y).map_err(err)?.is_zero() && !x.is_zero(), || format!("module {i}: ({a},{b}) is not antisymmetric"))?;
        }
        let mut sym = g.clone();
        for s in &mut sym.seeds {
            s.circ = IwasawaElement::zero(prec, Some(form));
        }
        let bf = sym.signed_classes().map_err(err)?;
        ensure(bf[3].c1.body.is_zero() && bf[3].c2.body.is_zero(), || format!("module {i}: bf_circ nonzero"))?;
        ensure(!bf[0].c1.body.is_zero(), || format!("module {i}: bf_plus vanished too"))?;
    }
    Ok("100 mock modules: sign swap negates, symmetric inputs give bf_circ = 0".into())
}

fn c6_combination() -> Outcome {
    let prec = Precision::new(5, 12, 24).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xac6);
    let mut n = 0;
    for k in [0u32, 1] {
        let logs = SignedLogs::strong(k, prec).map_err(err)?;
        for eps in [1, 4] {
            let form = Form::new(5, k, eps).map_err(err)?;
            for conv in [Convention::LemmaFactorisation, Convention::TheoremA] {
                for _ in 0..3 {
                    let g = MockGlobalModule::random(form, conv, logs.clone(), &mut rng);
                    let classes = g.signed_classes().map_err(err)?;
                    let locals = [g.basis_image(0).map_err(err)?, g.basis_image(1).map_err(err)?];
                    for local in classes.iter().map(|z| g.local_image(z)).collect::<Result<Vec<_>, _>>().map_err(err)?.iter().chain(&locals) {
                        let direct = local.coords(form, conv).map_err(err)?.l_aa;
                        let comb = combination_alpha_alpha(local, &logs, form, conv).map_err(err)?;
                        ensure(comb.agrees(&direct.body), || format!("k = {k}, eps = {eps}, {conv:?}: L_(a,a) differs"))?;
                        n += 1;
                    }
                }
            }
        }
    }
    Ok(format!("L_(a,a) = (log-/4)Col- + (log+/4a^2)Col+ + (log/4a)Col. on {n} local vectors"))
}

/// −(1 − ηω^{−n}(p)p^{n−1})B_{n,ηω^{−n}}/n at η = ω², p = 5, n = 2: the
/// twisted character is trivial, B₂ = 1/6, so the value is 1/3.
fn c7_kubota_leopoldt() -> Outcome {
    let spot = kl_value(&DirichletCharacter::teichmuller(5, 2).map_err(err)?, -1, 20).map_err(err)?;
    let third = PadicScalar::from_ratio(5, 1, 3, 20).map_err(err)?;
    ensure(spot.sub(&third).is_zero(), || format!("L_5(w^2, -1) = {spot}"))?;
    let m = 20u32;
    let mut lines = 0;
    for p in [5u64, 7] {
        let prec = Precision::new(p, m, 32).map_err(err)?;
        let quad = DirichletCharacter::kronecker(p, -4).map_err(err)?.mul(&DirichletCharacter::teichmuller(p, 1).map_err(err)?).map_err(err)?;
        let etas = [
            ("w^2", DirichletCharacter::teichmuller(p, 2).map_err(err)?),
            ("w^4", DirichletCharacter::teichmuller(p, 4).map_err(err)?),
            ("chi_-4 w", quad),
        ];
        for (name, eta) in etas {
            // least even branch that is not the pole
            let branch = (0..p as i64 - 1)
                .find(|&i| {
                    let t = eta.mul(&DirichletCharacter::teichmuller(p, i).unwrap()).unwrap();
                    t.is_even() && !t.is_trivial()
                })
                .expect("an even non-trivial branch");
            let s = kl_series(&eta, branch, prec).map_err(err)?;
            ensure(s.checks.len() == 5, || format!("p = {p}, {name}: {} checks", s.checks.len()))?;
            for c in &s.checks {
                ensure(c.agrees && c.digits >= m as i64 - 2, || format!("p = {p}, {name}, branch {branch}: {c:?}"))?;
            }
            lines += 1;
        }
    }
    // the spot value read off the series: branch 0 of ω² at X = u² − 1
    let s = kl_series(&DirichletCharacter::teichmuller(5, 2).map_err(err)?, 0, Precision::new(5, m, 32).map_err(err)?).map_err(err)?;
    let v = s.series.evaluate(&FiniteCharacter { tame: 0, wild: 0, twist: 2 }).map_err(err)?.a;
    ensure(v.sub(&third).is_zero() && v.abs_prec() >= m as i64 - 2, || format!("series at n = 2 gives {v}"))?;
    Ok(format!("{lines} branches agree with Bernoulli values at n = 1..5 to p^18; L_5(w^2,-1) = 1/3"))
}

fn c8_euler_factors() -> Outcome {
    let rel = 20;
    let (mut cases, mut exceptional, mut minus_one) = (0, 0, 0);
    for p in [5u64, 7] {
        let t = |r: u64| PadicScalar::teichmuller(p, r as i64, rel).unwrap();
        let one = PadicScalar::one(p, rel);
        for k in 0..=2u32 {
            for eps in 1..p {
                let form = Form::new(p, k, eps as i64).map_err(err)?;
                for chi in 1..p {
                    // λ² = −ε p^{k+1}; each factor written out directly
                    let q = t(chi).mul(&t(eps).inv().map_err(err)?);
                    let qi = q.inv().map_err(err)?;
                    let rep = exceptional_zero_report(&form, chi, 1, 2 * k as i64 + 2).map_err(err)?;
                    ensure(rep.eps_over_chi_trivial == (eps == chi), || format!("p = {p}, eps = {eps}, chi = {chi}: triviality flag"))?;
                    for j in 1..=2 * k as i64 + 2 {
                        let kk = k as i64;
                        let up = q.shift(j - kk - 2);
                        let down = qi.shift(kk + 1 - j);
                        let brute = if j <= kk + 1 {
                            [one.add(&up), one.sub(&down), one.add(&down)]
                        } else {
                            [one.add(&up), one.sub(&up), one.add(&down)]
                        };
                        let r = if j <= kk + 1 { euler_factor_e(&form, chi, j, rel) } else { euler_factor_eprime(&form, chi, j, rel) }.map_err(err)?;
                        let entry = &rep.entries[(j - 1) as usize];
                        let want: Vec<&str> = r.factors.iter().zip(&brute).filter(|(_, b)| b.is_zero()).map(|(f, _)| f.label).collect();
                        for (f, b) in r.factors.iter().zip(&brute) {
                            ensure(f.vanishes == b.is_zero(), || format!("p = {p}, k = {k}, eps = {eps}, chi = {chi}, j = {j}: {}", f.label))?;
                            ensure(f.value.sub(b).is_zero(), || format!("p = {p}, k = {k}, j = {j}: value of {}", f.label))?;
                        }
                        ensure(entry.vanishing == want, || format!("p = {p}, k = {k}, eps = {eps}, chi = {chi}, j = {j}: report {:?}, brute force {want:?}", entry.vanishing))?;
                        let product = brute.iter().fold(one, |a, b| a.mul(b));
                        ensure(r.product.sub(&product).is_zero(), || format!("p = {p}, k = {k}, j = {j}: product"))?;
                        if eps == chi && (j == kk + 1 || j == kk + 2) {
                            ensure(entry.exceptional_case && !want.is_empty(), || format!("p = {p}, k = {k}, j = {j}: missing exceptional zero"))?;
                            exceptional += 1;
                        }
                        if (eps + chi) % p == 0 && !want.is_empty() {
                            minus_one += 1;
                        }
                        cases += 1;
                    }
                }
            }
        }
    }
    ensure(minus_one > 0, || "no vanishing recorded with eps/chi(p) = -1".into())?;
    Ok(format!("{cases} (p,k,eps,chi,j) cases match; {exceptional} exceptional zeros, {minus_one} eps/chi = -1 vanishings"))
}

/// Coefficients of ∏(1 − r·c·X) over the given roots, computed in
/// Q[t]/(t² − a t + q) with α = t, β = a − t.
fn roots_poly(a: i64, q: &BigRational, c: &BigRational, roots: &[(i64, i64, i64)]) -> Result<Vec<BigRational>, String> {
    type E = (BigRational, BigRational);
    let ai = BigRational::from_integer(BigInt::from(a));
    let mul = |x: &E, y: &E| -> E {
        let t2 = &x.1 * &y.1;
        (&x.0 * &y.0 - q * &t2, &x.0 * &y.1 + &x.1 * &y.0 + &ai * &t2)
    };
    let alpha: E = (BigRational::zero(), BigRational::one());
    let beta: E = (ai.clone(), -BigRational::one());
    let pw = |e: &E, n: i64| (0..n).fold((BigRational::one(), BigRational::zero()), |acc, _| mul(&acc, e));
    let mut poly: Vec<E> = vec![(BigRational::one(), BigRational::zero())];
    for &(i, j, mult) in roots {
        let r = mul(&pw(&alpha, i), &pw(&beta, j));
        let r = (&r.0 * c, &r.1 * c);
        for _ in 0..mult {
            let mut next = poly.clone();
            next.push((BigRational::zero(), BigRational::zero()));
            for (d, x) in poly.iter().enumerate() {
                let y = mul(x, &r);
                next[d + 1] = (&next[d + 1].0 - &y.0, &next[d + 1].1 - &y.1);
            }
            poly = next;
        }
    }
    ensure(poly.iter().all(|x| x.1.is_zero()), || "symmetric functions left the rationals".into())?;
    let mut out: Vec<BigRational> = poly.into_iter().map(|x| x.0).collect();
    while out.len() > 1 && out.last().is_some_and(|x| x.is_zero()) {
        out.pop();
    }
    Ok(out)
}

fn c9_rankin() -> Outcome {
    let hand = rankin_factorization_check(2, 1, 1, 1, 0, 0).map_err(err)?;
    ensure(hand.holds && hand.q.to_string() == "1 - X - 4X^2 - 4X^3 + 16X^4", || format!("hand case Q = {}", hand.q))?;
    let primes: Vec<u64> = (2..=97u64).filter(|n| (2..*n).take_while(|d| d * d <= *n).all(|d| n % d != 0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xac9);
    for i in 0..100 {
        let ell = primes[rng.gen_range(0..primes.len())];
        let k = rng.gen_range(0..=2u32);
        let bound = (2.0 * (ell as f64).powi(k as i32 + 1).sqrt()).floor() as i64;
        let a = rng.gen_range(-bound..=bound);
        let eps = if rng.gen_bool(0.5) { 1 } else { -1 };
        let tw = if rng.gen_bool(0.5) { 1 } else { -1 };
        let j = rng.gen_range(0..=2 * k as i64 + 2);
        let chk = rankin_factorization_check(ell, a, eps, tw, k, j).map_err(err)?;
        ensure(chk.holds, || format!("draw {i}: l = {ell}, a = {a}: difference {}", chk.difference))?;
        let q = BigRational::from_integer(BigInt::from(eps) * BigInt::from(ell).pow(k + 1));
        let lj = BigRational::from_integer(BigInt::from(ell).pow(j as u32));
        let c = BigRational::from_integer(BigInt::from(tw)) / lj;
        let rankin = roots_poly(a, &q, &c, &[(2, 0, 1), (0, 2, 1), (1, 1, 2)])?;
        let sym2 = roots_poly(a, &q, &c, &[(2, 0, 1), (0, 2, 1), (1, 1, 1)])?;
        ensure(chk.q.coeffs == rankin, || format!("draw {i}: Q = {} disagrees with its roots", chk.q))?;
        ensure(chk.p.coeffs == sym2, || format!("draw {i}: P = {} disagrees with its roots", chk.p))?;
    }
    Ok("hand case and 100 random draws: Q = (1 - l^(k+1-j) eps chi(l) X) P exactly, both against roots".into())
}

fn build(rng: &mut ChaCha8Rng, primes: &[u64], p_prec: u32) -> Result<SyntheticSystem, String> {
    let level = TameLevel::new(5, primes).map_err(err)?;
    for _ in 0..50 {
        let data: Vec<EulerPrime> = primes
            .iter()
            .map(|&ell| EulerPrime {
                ell,
                a: rng.gen_range(-6..=6),
                eps: if rng.gen_bool(0.5) { 1 } else { -1 },
                tw: if rng.gen_bool(0.5) { 1 } else { -1 },
                frobenius: level.primes.iter().zip(&level.orders).filter(|(l, _)| **l != ell).map(|(&l, &o)| (l, rng.gen_range(0..o))).collect::<BTreeMap<_, _>>(),
                gamma: rng.gen_range(1..30),
            })
            .collect();
        let seed = GroupRingElement::random(&level, p_prec, rng);
        match build_synthetic_system(&seed, &data, rng.gen_range(0..=2), rng.gen_range(0..=4)) {
            Ok(s) => return Ok(s),
            Err(IwaError::InvalidParameter(m)) if m.contains("not a unit") => continue,
            Err(e) => return Err(e.to_string()),
        }
    }
    Err(format!("no unit Euler factors found for {primes:?}"))
}

fn c10_synthetic_systems() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac10);
    let levels: [&[u64]; 7] = [&[11], &[101], &[11, 31], &[11, 101], &[101, 151], &[11, 31, 41], &[11, 41, 101]];
    let mut relations = 0;
    let mut injected = 0;
    for primes in levels {
        let sys = build(&mut rng, primes, 12)?;
        let rep = validate_system(&sys).map_err(err)?;
        ensure(rep.all_hold, || format!("{primes:?}: {} relations fail", rep.failures().count()))?;
        relations += rep.relations.len();
        // every coefficient on the small levels, a sample on the large ones
        for (key, class) in &sys.classes {
            let r: Vec<u64> = if key.is_empty() { vec![] } else { key.split(',').map(|x| x.parse().unwrap()).collect() };
            let idx: Vec<usize> = if sys.level.size() <= 125 {
                (0..class.coeffs.len()).collect()
            } else {
                (0..8).map(|_| rng.gen_range(0..class.coeffs.len())).collect()
            };
            for i in idx {
                let mut bad = sys.clone();
                bad.perturb(&r, i, rng.gen_range(0..12)).map_err(err)?;
                let rep = validate_system(&bad).map_err(err)?;
                ensure(!rep.all_hold, || format!("{primes:?}: fault at [{key}] coefficient {i} not detected"))?;
                injected += 1;
            }
        }
    }
    let level = TameLevel::new(5, &[11, 101]).map_err(err)?;
    for _ in 0..10 {
        let mut x = GroupRingElement::random(&level, 20, &mut rng);
        if x.augmentation() % 5 == 0 {
            x = x.add(&GroupRingElement::one(&level, 20)).map_err(err)?;
        }
        let y = invert_unit_mod_radical(&x).map_err(err)?;
        ensure(x.mul(&y).map_err(err)?.is_one(), || "x*y != 1 mod p^20".into())?;
    }
    Ok(format!("7 levels (orders up to 25), {relations} relations hold; {injected}/{injected} faults detected; 10 inversions mod 5^20"))
}

fn c11_dieudonne() -> Outcome {
    let mut n = 0;
    for p in [5u64, 7] {
        for k in 0..=3u32 {
            for eps in 1..p as i64 {
                let form = Form::new(p, k, eps).map_err(err)?;
                let r = dieudonne::report(form, 20).map_err(|e| format!("p = {p}, k = {k}, eps = {eps}: {e}"))?;
                let tag = format!("p = {p}, k = {k}, eps = {eps}");
                ensure(r.phi_squared_is_alpha_squared, || format!("{tag}: phi^2 != alpha^2"))?;
                ensure(r.eigenvectors_ok, || format!("{tag}: eigenvectors"))?;
                ensure(r.m_times_m_inv_is_identity, || format!("{tag}: M M^-1 != I"))?;
                let dims: Vec<(i64, usize)> = r.sym2_filtration.iter().map(|j| (j.from, j.dim)).collect();
                let ki = k as i64;
                ensure(dims == vec![(0, 3), (1, 2), (ki + 2, 1), (2 * ki + 3, 0)], || format!("{tag}: Sym2 filtration {dims:?}"))?;
                // D₁, D₂ are φ-stable, or the split would have failed
                let s = dieudonne::sym_square(&dieudonne::dcris_of_form(form, 20));
                dieudonne::split_sym_square(&s).map_err(|e| format!("{tag}: {e}"))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} forms: phi^2 = alpha^2, D1/D2 stable, Sym2 dims (3,2,1,0), M M^-1 = I"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("log product identity", c1_log_product),
        ("shifted-log and bridging identities", c2_shifted_and_bridging),
        ("growth orders", c3_growth),
        ("signed factorisation round trip", c4_round_trip),
        ("bf_circ vanishing and antisymmetry", c5_circ_and_antisymmetry),
        ("Coleman combination identity", c6_combination),
        ("Kubota-Leopoldt branches", c7_kubota_leopoldt),
        ("Euler factors and exceptional zeros", c8_euler_factors),
        ("Euler polynomial identity", c9_rankin),
        ("synthetic Euler systems", c10_synthetic_systems),
        ("Dieudonne modules", c11_dieudonne),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1} s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
