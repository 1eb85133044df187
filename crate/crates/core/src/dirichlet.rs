//! Dirichlet characters whose values are (p−1)-th roots of unity, and exact
//! generalized Bernoulli numbers.
//!
//! A value is stored as an exponent e of ζ = ω(g), where g is the least
//! primitive root mod p and ω the Teichmüller character. The exact value ζ^e
//! lives in Q(μ_{p−1}); the embedding into Q_p sends ζ to ω(g).

use crate::error::{IwaError, Result};
use crate::padic::{is_prime, ppow, PadicScalar};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Least primitive root mod p.
pub fn primitive_root(p: u64) -> u64 {
    let n = p - 1;
    let mut primes = Vec::new();
    let mut m = n;
    let mut q = 2;
    while q * q <= m {
        if m % q == 0 {
            primes.push(q);
            while m % q == 0 {
                m /= q;
            }
        }
        q += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    (2..p)
        .find(|&g| primes.iter().all(|&q| powmod_u64(g, n / q, p) != 1))
        .unwrap_or(1)
}

fn powmod_u64(a: u64, mut e: u64, m: u64) -> u64 {
    let (mut r, mut b) = (1u128 % m as u128, a as u128 % m as u128);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m as u128;
        }
        b = b * b % m as u128;
        e >>= 1;
    }
    r as u64
}

/// Discrete log to base g mod p, indexed by residue (entry 0 unused).
pub fn dlog_table(p: u64) -> Vec<u32> {
    let g = primitive_root(p);
    let mut t = vec![0u32; p as usize];
    let mut x = 1u64;
    for e in 0..p - 1 {
        t[x as usize] = e as u32;
        x = x * g % p;
    }
    t
}

fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Kronecker symbol (d/n) for n ≥ 1.
pub fn kronecker(d: i64, n: u64) -> i32 {
    let mut n = n;
    let mut r = 1;
    while n % 2 == 0 {
        n /= 2;
        r *= match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => return 0,
        };
    }
    r * jacobi(d.rem_euclid(n as i64) as u64, n)
}

fn jacobi(mut a: u64, mut n: u64) -> i32 {
    let mut r = 1;
    a %= n;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                r = -r;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            r = -r;
        }
        a %= n;
    }
    if n == 1 {
        r
    } else {
        0
    }
}

/// A Dirichlet character mod `modulus` with values in μ_{p−1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletCharacter {
    pub p: u64,
    pub modulus: u64,
    pub conductor: u64,
    exps: Vec<Option<u32>>,
}

impl DirichletCharacter {
    /// Build from exponents on 0..modulus; checks multiplicativity and that
    /// non-units map to `None`.
    pub fn from_exponents(p: u64, modulus: u64, f: impl Fn(u64) -> Option<u32>) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(IwaError::InvalidParameter(format!("p = {p} must be an odd prime")));
        }
        if modulus == 0 {
            return Err(IwaError::InvalidParameter("modulus must be positive".into()));
        }
        let n = (p - 1) as u32;
        let exps: Vec<Option<u32>> = (0..modulus)
            .map(|a| if gcd(a, modulus) == 1 { f(a).map(|e| e % n) } else { None })
            .collect();
        for a in 0..modulus {
            if gcd(a, modulus) == 1 && exps[a as usize].is_none() {
                return Err(IwaError::InvalidParameter(format!("no value at unit {a}")));
            }
        }
        for a in 1..modulus {
            for b in a..modulus {
                if let (Some(x), Some(y)) = (exps[a as usize], exps[b as usize]) {
                    let ab = exps[(a * b % modulus) as usize].expect("unit");
                    if (x + y) % n != ab {
                        return Err(IwaError::InvalidParameter(format!("not multiplicative at {a}·{b}")));
                    }
                }
            }
        }
        let mut chi = DirichletCharacter { p, modulus, conductor: modulus, exps };
        chi.conductor = chi.find_conductor();
        Ok(chi)
    }

    pub fn trivial(p: u64) -> Self {
        Self::from_exponents(p, 1, |_| Some(0)).expect("trivial character")
    }

    /// ω^i, modulo p.
    pub fn teichmuller(p: u64, i: i64) -> Result<Self> {
        let t = dlog_table(p);
        let n = (p - 1) as i64;
        Self::from_exponents(p, p, |a| Some(((t[a as usize] as i64 * i).rem_euclid(n)) as u32))
    }

    /// The quadratic character a ↦ (d/a) mod |d|.
    pub fn kronecker(p: u64, d: i64) -> Result<Self> {
        if d == 0 || d == 1 {
            return Err(IwaError::InvalidParameter(format!("{d} is not a discriminant")));
        }
        let m = d.unsigned_abs();
        let half = ((p - 1) / 2) as u32;
        Self::from_exponents(p, m, |a| match kronecker(d, a) {
            1 => Some(0),
            -1 => Some(half),
            _ => None,
        })
    }

    fn find_conductor(&self) -> u64 {
        let m = self.modulus;
        (1..=m)
            .filter(|f| m % f == 0)
            .find(|&f| (0..m).all(|a| gcd(a, m) != 1 || a % f != 1 % f || self.exps[a as usize] == Some(0)))
            .unwrap_or(m)
    }

    /// Exponent of ζ at a, `None` where the character vanishes.
    pub fn exponent_at(&self, a: i64) -> Option<u32> {
        self.exps[a.rem_euclid(self.modulus as i64) as usize]
    }

    /// The residue mod p whose Teichmüller lift is χ(a).
    pub fn residue_at(&self, a: i64) -> Option<u64> {
        self.exponent_at(a).map(|e| powmod_u64(primitive_root(self.p), e as u64, self.p))
    }

    /// χ(a) in Q_p.
    pub fn value(&self, a: i64, rel: u32) -> PadicScalar {
        match self.residue_at(a) {
            None => PadicScalar::exact_zero(self.p),
            Some(r) => PadicScalar::teichmuller(self.p, r as i64, rel).expect("unit residue"),
        }
    }

    pub fn is_even(&self) -> bool {
        self.exponent_at(-1) == Some(0)
    }

    pub fn is_trivial(&self) -> bool {
        self.conductor == 1
    }

    pub fn order_divides(&self, d: u32) -> bool {
        let n = (self.p - 1) as u32;
        self.exps.iter().flatten().all(|&e| e * d % n == 0)
    }

    /// The product character, on the lcm of the moduli.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.p != o.p {
            return Err(IwaError::InvalidParameter("characters for different primes".into()));
        }
        let m = self.modulus.lcm(&o.modulus);
        Self::from_exponents(self.p, m, |a| Some(self.exponent_at(a as i64)? + o.exponent_at(a as i64)?))
    }

    pub fn pow(&self, k: i64) -> Self {
        let n = (self.p - 1) as i64;
        Self::from_exponents(self.p, self.modulus, |a| {
            self.exponent_at(a as i64).map(|e| ((e as i64 * k).rem_euclid(n)) as u32)
        })
        .expect("powers of a character are characters")
    }

    /// The primitive character inducing this one.
    pub fn primitive(&self) -> Self {
        let (m, f) = (self.modulus, self.conductor);
        Self::from_exponents(self.p, f, |a| {
            let lift = (0..m / f).map(|t| a + t * f).find(|&b| gcd(b, m) == 1)?;
            self.exponent_at(lift as i64)
        })
        .expect("restriction of a character")
    }

    /// Write χ = χ₀·ω^e with χ₀ primitive of conductor prime to p.
    pub fn split_tame(&self) -> (Self, i64) {
        let chi = self.primitive();
        let p = self.p;
        let mut pp = 1;
        while chi.modulus % (pp * p) == 0 {
            pp *= p;
        }
        if pp == 1 {
            return (chi, 0);
        }
        let rest = chi.modulus / pp;
        let g = primitive_root(p);
        // a ≡ g mod p^{a}, a ≡ 1 mod rest: the value there is ω^e(g) = ζ^e
        let a = (0..chi.modulus).find(|&a| a % pp == g % pp && a % rest == 1 % rest);
        let e = a.and_then(|a| chi.exponent_at(a as i64)).unwrap_or(0) as i64;
        let omega = Self::teichmuller(p, -e).expect("p is prime");
        (chi.mul(&omega).expect("same prime").primitive(), e)
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "χ mod {} (conductor {}, {})", self.modulus, self.conductor, if self.is_even() { "even" } else { "odd" })
    }
}

/// An element Σ c_e ζ^e of Q(μ_{p−1}), kept in group-ring form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloRational {
    pub p: u64,
    pub coeffs: Vec<BigRational>,
}

impl CycloRational {
    pub fn zero(p: u64) -> Self {
        CycloRational { p, coeffs: vec![BigRational::zero(); (p - 1) as usize] }
    }

    pub fn from_rational(p: u64, q: BigRational) -> Self {
        let mut z = Self::zero(p);
        z.coeffs[0] = q;
        z
    }

    pub fn add_term(&mut self, e: u32, q: &BigRational) {
        let i = e as usize % self.coeffs.len();
        self.coeffs[i] += q;
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        CycloRational { p: self.p, coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.coeffs.len();
        let mut z = Self::zero(self.p);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                z.coeffs[(i + j) % n] += a * b;
            }
        }
        z
    }

    /// Canonical coordinates: the remainder modulo Φ_{p−1}(ζ).
    pub fn reduced(&self) -> Vec<BigRational> {
        let phi = cyclotomic_poly(self.coeffs.len());
        let d = phi.len() - 1;
        let mut r = self.coeffs.clone();
        for top in (d..r.len()).rev() {
            let c = r[top].clone();
            if c.is_zero() {
                continue;
            }
            for (i, ph) in phi.iter().enumerate() {
                r[top - d + i] -= &c * BigRational::from_integer(BigInt::from(*ph));
            }
        }
        r.truncate(d);
        r
    }

    /// The value when it lies in Q.
    pub fn to_rational(&self) -> Option<BigRational> {
        let r = self.reduced();
        r[1..].iter().all(|c| c.is_zero()).then(|| r[0].clone())
    }

    /// Image in Q_p under ζ ↦ ω(g).
    pub fn embed(&self, rel: u32) -> PadicScalar {
        let p = self.p;
        let g = primitive_root(p);
        let mut acc = PadicScalar::exact_zero(p);
        for (e, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let z = PadicScalar::teichmuller(p, powmod_u64(g, e as u64, p) as i64, rel).expect("unit");
            acc = acc.add(&padic_from_rational(p, c, rel).mul(&z));
        }
        acc
    }
}

impl fmt::Display for CycloRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.to_rational() {
            return write!(f, "{q}");
        }
        let mut first = true;
        for (e, c) in self.reduced().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})ζ")?,
                _ => write!(f, "({c})ζ^{e}")?,
            }
        }
        Ok(())
    }
}

/// Integer coefficients of Φ_n, lowest degree first.
pub fn cyclotomic_poly(n: usize) -> Vec<i64> {
    // x^n − 1 divided by Φ_d for every proper divisor d
    let mut num = vec![0i64; n + 1];
    num[0] = -1;
    num[n] = 1;
    for d in (1..n).filter(|d| n % d == 0) {
        let den = cyclotomic_poly(d);
        let dd = den.len() - 1;
        let mut q = vec![0i64; num.len() - dd];
        for i in (0..q.len()).rev() {
            let c = num[i + dd];
            q[i] = c;
            for (j, b) in den.iter().enumerate() {
                num[i + j] -= c * b;
            }
        }
        num = q;
    }
    num
}

/// A rational number as a p-adic scalar with `rel` digits.
pub fn padic_from_rational(p: u64, q: &BigRational, rel: u32) -> PadicScalar {
    if q.is_zero() {
        return PadicScalar::exact_zero(p);
    }
    let pb = BigInt::from(p);
    let split = |x: &BigInt| {
        let mut x = x.abs();
        let mut v = 0i64;
        while (&x % &pb).is_zero() {
            x /= &pb;
            v += 1;
        }
        (v, x)
    };
    let (vn, un) = split(q.numer());
    let (vd, ud) = split(q.denom());
    let m = BigInt::from(ppow(p, rel));
    let sign = if q.is_negative() { -1 } else { 1 };
    let un: BigInt = (un * BigInt::from(sign)).mod_floor(&m);
    let inv = ud.modinv(&m).expect("unit denominator");
    let unit = (un * inv).mod_floor(&m).to_u128().expect("residue fits");
    PadicScalar::new(p, vn - vd, unit, rel)
}

/// B_0, …, B_n with B_1 = −1/2.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut b = vec![BigRational::one()];
    for m in 1..=n {
        // Σ_{j≤m} C(m+1, j) B_j = 0
        let mut c = BigInt::one();
        let mut s = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            s += BigRational::from_integer(c.clone()) * bj;
            c = c * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-s / BigRational::from_integer(c));
    }
    b
}

/// B_n(x) = Σ C(n,i) B_i x^{n−i}.
pub fn bernoulli_poly(n: usize, x: &BigRational, bern: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    let mut c = BigInt::one();
    let mut xp = BigRational::one();
    let mut pows = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        pows.push(xp.clone());
        xp *= x;
    }
    for i in 0..=n {
        acc += BigRational::from_integer(c.clone()) * &bern[i] * &pows[n - i];
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// B_{n,χ} = f^{n−1} Σ_{a=1}^{f} χ(a) B_n(a/f) for the primitive character
/// attached to χ.
pub fn gen_bernoulli(n: usize, chi: &DirichletCharacter) -> Result<CycloRational> {
    if n == 0 {
        return Err(IwaError::InvalidParameter("n must be at least 1".into()));
    }
    let chi = chi.primitive();
    let f = chi.modulus;
    let bern = bernoulli_numbers(n);
    let fq = BigRational::from_integer(BigInt::from(f));
    let mut out = CycloRational::zero(chi.p);
    for a in 1..=f {
        if let Some(e) = chi.exponent_at(a as i64) {
            let x = BigRational::from_integer(BigInt::from(a)) / &fq;
            out.add_term(e, &bernoulli_poly(n, &x, &bern));
        }
    }
    Ok(out.scale(&num_traits::pow(fq, n - 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn bernoulli_small() {
        let b = bernoulli_numbers(12);
        assert_eq!(b[1], q(-1, 2));
        assert_eq!(b[2], q(1, 6));
        assert_eq!(b[3], q(0, 1));
        assert_eq!(b[12], q(-691, 2730));
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn conductors_and_parity() {
        let w = DirichletCharacter::teichmuller(7, 3).unwrap();
        assert_eq!(w.conductor, 7);
        assert!(!w.is_even());
        assert_eq!(DirichletCharacter::teichmuller(7, 6).unwrap().conductor, 1);
        let k = DirichletCharacter::kronecker(5, -4).unwrap();
        assert_eq!(k.conductor, 4);
        assert!(!k.is_even());
        let k8 = DirichletCharacter::kronecker(5, 8).unwrap();
        assert!(k8.is_even() && k8.conductor == 8);
        let prod = k.mul(&DirichletCharacter::teichmuller(5, 1).unwrap()).unwrap();
        assert_eq!(prod.conductor, 20);
        assert!(prod.is_even());
        let (tame, e) = prod.split_tame();
        assert_eq!((tame.conductor, e), (4, 1));
    }

    #[test]
    fn generalized_bernoulli_values() {
        let triv = DirichletCharacter::trivial(5);
        assert_eq!(gen_bernoulli(2, &triv).unwrap().to_rational(), Some(q(1, 6)));
        let quad = DirichletCharacter::kronecker(7, 5).unwrap();
        assert_eq!(gen_bernoulli(2, &quad).unwrap().to_rational(), Some(q(4, 5)));
        let even = DirichletCharacter::kronecker(7, 8).unwrap();
        assert_eq!(gen_bernoulli(1, &even).unwrap().to_rational(), Some(q(0, 1)));
        // B_{1,χ_{-4}} = −1/2
        let odd = DirichletCharacter::kronecker(5, -4).unwrap();
        assert_eq!(gen_bernoulli(1, &odd).unwrap().to_rational(), Some(q(-1, 2)));
    }

    #[test]
    fn non_rational_values_embed() {
        // ω mod 5 has order 4, so B_{1,ω} is not rational
        let w = DirichletCharacter::teichmuller(5, 1).unwrap();
        let b = gen_bernoulli(1, &w).unwrap();
        assert!(b.to_rational().is_none());
        // direct: (1/5)Σ a ω(a) in Q_5
        let mut direct = PadicScalar::exact_zero(5);
        for a in 1..5i64 {
            direct = direct.add(&PadicScalar::from_int(5, a as i128, 12).mul(&w.value(a, 12)));
        }
        let direct = direct.div(&PadicScalar::from_int(5, 5, 12)).unwrap();
        assert!(b.embed(12).agrees(&direct));
    }
}
