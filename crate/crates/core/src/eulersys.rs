//! Group rings O[Δ_r] for squarefree tame levels r, corestriction, Euler
//! polynomials for Sym² and the Rankin factor, unit inversion modulo the
//! radical, and synthetic norm-compatible systems with a validator.
//!
//! Coefficients are residues modulo p^M, so every relation is checked
//! exactly in Z/p^M.

use crate::error::{IwaError, Result};
use crate::padic::{invmod, is_prime, mulmod, ppow, split_val, PadicScalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Whether ℓ may enter a tame level for p: prime, ℓ ≠ p and ℓ ≡ 1 mod p.
pub fn is_admissible(p: u64, ell: u64) -> bool {
    is_prime(ell) && ell != p && ell % p == 1
}

/// ord Δ_ℓ: the p-part of ℓ − 1.
pub fn delta_order(p: u64, ell: u64) -> u64 {
    let (v, _) = split_val((ell - 1) as u128, p);
    ppow(p, v) as u64
}

/// A squarefree tame level r = ℓ₁⋯ℓ_s with Δ_r = ∏ Δ_ℓ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TameLevel {
    pub p: u64,
    pub primes: Vec<u64>,
    pub orders: Vec<u64>,
}

impl TameLevel {
    pub fn new(p: u64, primes: &[u64]) -> Result<Self> {
        let mut ps = primes.to_vec();
        ps.sort_unstable();
        ps.dedup();
        if ps.len() != primes.len() {
            return Err(IwaError::InvalidParameter("repeated prime in level".into()));
        }
        if let Some(&bad) = ps.iter().find(|&&l| !is_admissible(p, l)) {
            return Err(IwaError::InvalidParameter(format!("{bad} is not a prime ≡ 1 mod {p}")));
        }
        let orders = ps.iter().map(|&l| delta_order(p, l)).collect();
        Ok(TameLevel { p, primes: ps, orders })
    }

    pub fn size(&self) -> usize {
        self.orders.iter().product::<u64>() as usize
    }

    pub fn contains(&self, ell: u64) -> bool {
        self.primes.contains(&ell)
    }

    /// The level r/ℓ.
    pub fn without(&self, ell: u64) -> Result<Self> {
        let i = self.position(ell)?;
        let mut out = self.clone();
        out.primes.remove(i);
        out.orders.remove(i);
        Ok(out)
    }

    /// Every divisor of r, as sub-levels.
    pub fn divisors(&self) -> Vec<TameLevel> {
        let s = self.primes.len();
        (0..1usize << s)
            .map(|mask| {
                let keep: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).collect();
                TameLevel {
                    p: self.p,
                    primes: keep.iter().map(|&i| self.primes[i]).collect(),
                    orders: keep.iter().map(|&i| self.orders[i]).collect(),
                }
            })
            .collect()
    }

    fn position(&self, ell: u64) -> Result<usize> {
        self.primes
            .iter()
            .position(|&l| l == ell)
            .ok_or_else(|| IwaError::InvalidParameter(format!("{ell} does not divide the level")))
    }

    fn flat(&self, exps: &[u64]) -> usize {
        exps.iter().zip(&self.orders).fold(0, |acc, (e, o)| acc * *o as usize + (e % o) as usize)
    }

    fn unflat(&self, mut idx: usize) -> Vec<u64> {
        let mut out = vec![0; self.orders.len()];
        for (slot, o) in out.iter_mut().zip(&self.orders).rev() {
            *slot = (idx % *o as usize) as u64;
            idx /= *o as usize;
        }
        out
    }
}

/// An element of (Z/p^M)[Δ_r]; coefficient `i` belongs to the group element
/// with mixed-radix exponents over `level.orders`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupRingElement {
    pub level: TameLevel,
    pub p_prec: u32,
    pub coeffs: Vec<u128>,
}

impl GroupRingElement {
    pub fn zero(level: &TameLevel, p_prec: u32) -> Self {
        GroupRingElement { level: level.clone(), p_prec, coeffs: vec![0; level.size()] }
    }

    pub fn constant(level: &TameLevel, p_prec: u32, c: i128) -> Self {
        let mut out = Self::zero(level, p_prec);
        out.coeffs[0] = out.reduce(c);
        out
    }

    pub fn one(level: &TameLevel, p_prec: u32) -> Self {
        Self::constant(level, p_prec, 1)
    }

    /// The group element ∏ δ_ℓ^{e_ℓ}; primes outside the level are ignored,
    /// which is how Frobenius data for a larger level restrict to this one.
    pub fn group_element(level: &TameLevel, p_prec: u32, exps: &BTreeMap<u64, u64>) -> Self {
        let mut out = Self::zero(level, p_prec);
        let e: Vec<u64> = level.primes.iter().map(|l| exps.get(l).copied().unwrap_or(0)).collect();
        let i = level.flat(&e);
        out.coeffs[i] = 1;
        out
    }

    pub fn delta(level: &TameLevel, p_prec: u32, ell: u64) -> Result<Self> {
        level.position(ell)?;
        Ok(Self::group_element(level, p_prec, &BTreeMap::from([(ell, 1)])))
    }

    /// N_ℓ = Σ_i δ_ℓ^i.
    pub fn norm_element(level: &TameLevel, p_prec: u32, ell: u64) -> Result<Self> {
        let d = Self::delta(level, p_prec, ell)?;
        let ord = level.orders[level.position(ell)?];
        let mut acc = Self::zero(level, p_prec);
        let mut pw = Self::one(level, p_prec);
        for _ in 0..ord {
            acc = acc.add(&pw)?;
            pw = pw.mul(&d)?;
        }
        Ok(acc)
    }

    pub fn random<R: Rng + ?Sized>(level: &TameLevel, p_prec: u32, rng: &mut R) -> Self {
        let m = ppow(level.p, p_prec);
        GroupRingElement { level: level.clone(), p_prec, coeffs: (0..level.size()).map(|_| rng.gen_range(0..m)).collect() }
    }

    pub fn modulus(&self) -> u128 {
        ppow(self.level.p, self.p_prec)
    }

    fn reduce(&self, c: i128) -> u128 {
        c.rem_euclid(self.modulus() as i128) as u128
    }

    /// Residue of a rational with denominator prime to p.
    pub fn reduce_rational(&self, q: &BigRational) -> Result<u128> {
        let m = BigInt::from(self.modulus());
        let n = q.numer().modpow(&BigInt::one(), &m);
        let d = q.denom().modpow(&BigInt::one(), &m);
        let conv = |x: BigInt| -> u128 { u128::try_from(x).expect("reduced mod p^M") };
        let inv = invmod(conv(d), self.modulus()).ok_or(IwaError::NonUnit)?;
        Ok(mulmod(conv(n), inv, self.modulus()))
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.level != o.level || self.p_prec != o.p_prec {
            return Err(IwaError::PrecisionMismatch("group ring elements at different levels".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let m = self.modulus();
        Ok(GroupRingElement { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| (a + b) % m).collect(), ..self.clone() })
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus();
        GroupRingElement { coeffs: self.coeffs.iter().map(|a| (m - a) % m).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: u128) -> Self {
        let m = self.modulus();
        GroupRingElement { coeffs: self.coeffs.iter().map(|a| mulmod(*a, c % m, m)).collect(), ..self.clone() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let m = self.modulus();
        let n = self.coeffs.len();
        let ex: Vec<Vec<u64>> = (0..n).map(|i| self.level.unflat(i)).collect();
        let mut out = vec![0u128; n];
        for (i, a) in self.coeffs.iter().enumerate().filter(|(_, a)| **a != 0) {
            for (j, b) in o.coeffs.iter().enumerate().filter(|(_, b)| **b != 0) {
                let s: Vec<u64> = ex[i].iter().zip(&ex[j]).map(|(x, y)| x + y).collect();
                let k = self.level.flat(&s);
                out[k] = (out[k] + mulmod(*a, *b, m)) % m;
            }
        }
        Ok(GroupRingElement { coeffs: out, ..self.clone() })
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 % self.modulus() && self.coeffs[1..].iter().all(|c| *c == 0)
    }

    /// Image under δ ↦ 1.
    pub fn augmentation(&self) -> u128 {
        let m = self.modulus();
        self.coeffs.iter().fold(0, |acc, c| (acc + c) % m)
    }

    pub fn coeff(&self, exps: &[u64]) -> PadicScalar {
        let c = self.coeffs[self.level.flat(exps)];
        PadicScalar::from_int(self.level.p, c as i128, self.p_prec).add(&PadicScalar::zero_mod(self.level.p, self.p_prec as i64))
    }

    /// cor_{Q(rℓ)/Q(r)}: the quotient map δ_ℓ ↦ 1.
    pub fn corestrict(&self, ell: u64) -> Result<Self> {
        let pos = self.level.position(ell)?;
        let target = self.level.without(ell)?;
        let m = self.modulus();
        let mut out = Self::zero(&target, self.p_prec);
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut e = self.level.unflat(i);
            e.remove(pos);
            let k = target.flat(&e);
            out.coeffs[k] = (out.coeffs[k] + c) % m;
        }
        Ok(out)
    }
}

/// y with x·y = 1 mod p^M, by Newton iteration from the inverse of the
/// augmentation. Requires x to be a unit modulo the radical (p, δ_ℓ − 1).
pub fn invert_unit_mod_radical(x: &GroupRingElement) -> Result<GroupRingElement> {
    let m = x.modulus();
    let a0 = invmod(x.augmentation(), m).ok_or(IwaError::NonUnit)?;
    let two = GroupRingElement::constant(&x.level, x.p_prec, 2);
    let mut y = GroupRingElement::constant(&x.level, x.p_prec, a0 as i128);
    // (1 − xy) is nilpotent mod p^M; its index is at most M·(1 + Σ(ord − 1))
    let bound = x.p_prec as u64 * (1 + x.level.orders.iter().map(|o| o - 1).sum::<u64>());
    let steps = 64 - bound.leading_zeros() + 1;
    for _ in 0..=steps {
        let xy = x.mul(&y)?;
        if xy.is_one() {
            return Ok(y);
        }
        y = y.mul(&two.sub(&xy)?)?;
    }
    Err(IwaError::NoStabilisation("Newton iteration did not converge".into()))
}

/// A polynomial in the formal variable standing for Fr_ℓ^{−1}, constant term 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerPolynomial {
    pub coeffs: Vec<BigRational>,
}

impl EulerPolynomial {
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        EulerPolynomial { coeffs: out }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let get = |v: &[BigRational], i: usize| v.get(i).cloned().unwrap_or_else(BigRational::zero);
        EulerPolynomial { coeffs: (0..n).map(|i| get(&self.coeffs, i) - get(&o.coeffs, i)).collect() }.trimmed()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// P(z) for z in a group ring.
    pub fn eval(&self, z: &GroupRingElement) -> Result<GroupRingElement> {
        let mut acc = GroupRingElement::zero(&z.level, z.p_prec);
        for c in self.coeffs.iter().rev() {
            let c = z.reduce_rational(c)?;
            acc = acc.mul(z)?.add(&GroupRingElement::constant(&z.level, z.p_prec, c as i128))?;
        }
        Ok(acc)
    }
}

impl std::fmt::Display for EulerPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            let sign = if c.is_negative() { "-" } else { "+" };
            let a = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "X")?,
                (1, false) => write!(f, "{a}X")?,
                (_, true) => write!(f, "X^{i}")?,
                (_, false) => write!(f, "{a}X^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn twist_scalar(ell: u64, tw: i64, j: i64) -> BigRational {
    let lj = BigRational::from_integer(num_traits::pow(BigInt::from(ell), j.unsigned_abs() as usize));
    let lj = if j >= 0 { lj.recip() } else { lj };
    int(tw) * lj
}

/// P_ℓ(X) = (1 − cα²X)(1 − cαβX)(1 − cβ²X) with α + β = a, αβ = eℓ^{k+1}
/// and c = tw·ℓ^{−j}, tw the value (ω^jχ)(ℓ).
pub fn sym2_euler_poly(ell: u64, a: i64, eps: i64, k: u32, j: i64, tw: i64) -> EulerPolynomial {
    let l = int(ell as i64).pow(k as i32 + 1);
    let (a, e) = (int(a), int(eps));
    let c = twist_scalar(ell, tw, j);
    let el = &e * &l;
    let s1 = &a * &a - &el;
    let s2 = &el * &s1;
    let s3 = &el * &el * &el;
    EulerPolynomial { coeffs: vec![BigRational::one(), -(&c * s1), &c * &c * s2, -(&c * &c * &c * s3)] }.trimmed()
}

/// Rankin factor of f ⊗ f⊗χ: roots c·{α², αβ, αβ, β²}.
pub fn rankin_euler_poly(ell: u64, a: i64, eps: i64, k: u32, j: i64, tw: i64) -> EulerPolynomial {
    let l = int(ell as i64).pow(k as i32 + 1);
    let (a, e) = (int(a), int(eps));
    let c = twist_scalar(ell, tw, j);
    let el = &e * &l;
    let a2 = &a * &a;
    let q1 = a2.clone();
    let q2 = int(2) * &a2 * &el - int(2) * &el * &el;
    let q3 = &a2 * &el * &el;
    let q4 = &el * &el * &el * &el;
    EulerPolynomial {
        coeffs: vec![BigRational::one(), -(&c * q1), &c * &c * q2, -(&c * &c * &c * q3), &c * &c * &c * &c * q4],
    }
    .trimmed()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankinCheck {
    pub holds: bool,
    pub q: EulerPolynomial,
    pub p: EulerPolynomial,
    /// Q − (1 − ℓ^{k+1−j}ε_fψ(ℓ)X)·P; identically zero when `holds`.
    pub difference: EulerPolynomial,
}

/// Q_ℓ = (1 − ℓ^{k+1−j}ε_fψ(ℓ)X)·P_ℓ as an exact polynomial identity.
pub fn rankin_factorization_check(ell: u64, a: i64, eps: i64, tw: i64, k: u32, j: i64) -> Result<RankinCheck> {
    if eps == 0 {
        return Err(IwaError::InvalidParameter("ε_f(ℓ) must be a unit".into()));
    }
    let q = rankin_euler_poly(ell, a, eps, k, j, tw);
    let p = sym2_euler_poly(ell, a, eps, k, j, tw);
    let lin = EulerPolynomial {
        coeffs: vec![BigRational::one(), -(int(eps) * int(ell as i64).pow(k as i32 + 1) * twist_scalar(ell, tw, j))],
    };
    let difference = q.sub(&lin.mul(&p));
    Ok(RankinCheck { holds: difference.is_zero(), q, p, difference })
}

/// Euler and Frobenius data at one prime of the level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EulerPrime {
    pub ell: u64,
    pub a: i64,
    pub eps: i64,
    /// (ω^jχ)(ℓ).
    pub tw: i64,
    /// φ_ℓ ∈ Δ_{R/ℓ} as exponents per prime; entries at ℓ itself are ignored.
    pub frobenius: BTreeMap<u64, u64>,
    /// Scalar standing for the Γ-coordinate of Fr_ℓ^{−1}.
    pub gamma: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSystem {
    pub level: TameLevel,
    pub p_prec: u32,
    pub k: u32,
    pub j: i64,
    pub primes: Vec<EulerPrime>,
    /// c_r for every divisor r, keyed by its prime list.
    pub classes: BTreeMap<String, GroupRingElement>,
}

fn key(level: &TameLevel) -> String {
    level.primes.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
}

impl SyntheticSystem {
    pub fn class(&self, r: &TameLevel) -> Option<&GroupRingElement> {
        self.classes.get(&key(r))
    }

    /// Add p^shift to one coefficient of c_r.
    pub fn perturb(&mut self, r: &[u64], index: usize, shift: u32) -> Result<()> {
        let c = self
            .classes
            .get_mut(&r.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","))
            .ok_or_else(|| IwaError::InvalidParameter("no class at that level".into()))?;
        let m = c.modulus();
        let slot = c.coeffs.get_mut(index).ok_or_else(|| IwaError::InvalidParameter("coefficient out of range".into()))?;
        *slot = (*slot + ppow(c.level.p, shift)) % m;
        Ok(())
    }

    fn euler_prime(&self, ell: u64) -> Result<&EulerPrime> {
        self.primes.iter().find(|e| e.ell == ell).ok_or_else(|| IwaError::InvalidParameter(format!("no Euler data at {ell}")))
    }

    /// P_ℓ(ℓ^{−j}Fr_ℓ^{−1}) at level r, with Fr_ℓ^{−1} ↦ γ_ℓ·φ_ℓ.
    pub fn euler_factor(&self, ell: u64, r: &TameLevel) -> Result<GroupRingElement> {
        let d = self.euler_prime(ell)?;
        let poly = sym2_euler_poly(ell, d.a, d.eps, self.k, self.j, d.tw);
        let phi = GroupRingElement::group_element(r, self.p_prec, &d.frobenius);
        let g = phi.scale(GroupRingElement::zero(r, self.p_prec).reduce(d.gamma as i128));
        poly.eval(&g)
    }
}

/// Top-down construction: c_R is the seed, and c_r = P_ℓ(ℓ^{−j}Fr_ℓ^{−1})^{−1}·cor(c_{rℓ})
/// with ℓ the least prime of R/r.
pub fn build_synthetic_system(seed: &GroupRingElement, primes: &[EulerPrime], k: u32, j: i64) -> Result<SyntheticSystem> {
    let level = seed.level.clone();
    for l in &level.primes {
        if !primes.iter().any(|e| e.ell == *l) {
            return Err(IwaError::InvalidParameter(format!("missing Euler data at {l}")));
        }
    }
    let mut sys =
        SyntheticSystem { level: level.clone(), p_prec: seed.p_prec, k, j, primes: primes.to_vec(), classes: BTreeMap::new() };
    let mut divisors = level.divisors();
    divisors.sort_by_key(|d| std::cmp::Reverse(d.primes.len()));
    for r in divisors {
        let c = if r.primes.len() == level.primes.len() {
            seed.clone()
        } else {
            let ell = *level.primes.iter().find(|l| !r.contains(**l)).expect("proper divisor");
            let mut up = r.primes.clone();
            up.push(ell);
            up.sort_unstable();
            let above = sys.classes[&up.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")].clone();
            let pe = sys.euler_factor(ell, &r)?;
            let inv = invert_unit_mod_radical(&pe).map_err(|_| {
                IwaError::InvalidParameter(format!("Euler factor at {ell} is not a unit modulo the radical"))
            })?;
            inv.mul(&above.corestrict(ell)?)?
        };
        sys.classes.insert(key(&r), c);
    }
    Ok(sys)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    pub r: Vec<u64>,
    pub ell: u64,
    pub holds: bool,
    /// Least valuation among the coefficients of cor(c_{rℓ}) − P·c_r;
    /// `None` when the difference is zero mod p^M.
    pub deviation_val: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub all_hold: bool,
    pub relations: Vec<RelationCheck>,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &RelationCheck> {
        self.relations.iter().filter(|r| !r.holds)
    }
}

/// Re-check cor_{rℓ/r}(c_{rℓ}) = P_ℓ(ℓ^{−j}Fr_ℓ^{−1})·c_r for every rℓ | R.
pub fn validate_system(sys: &SyntheticSystem) -> Result<ValidationReport> {
    let p = sys.level.p;
    let mut relations = Vec::new();
    for r in sys.level.divisors() {
        for &ell in sys.level.primes.iter().filter(|l| !r.contains(**l)) {
            let mut up = r.primes.clone();
            up.push(ell);
            up.sort_unstable();
            let above = sys.class(&TameLevel::new(p, &up)?).ok_or_else(|| IwaError::InvalidParameter("missing class".into()))?;
            let here = sys.class(&r).ok_or_else(|| IwaError::InvalidParameter("missing class".into()))?;
            let diff = above.corestrict(ell)?.sub(&sys.euler_factor(ell, &r)?.mul(here)?)?;
            let deviation_val = diff.coeffs.iter().filter(|c| **c != 0).map(|c| split_val(*c, p).0).min();
            relations.push(RelationCheck { r: r.primes.clone(), ell, holds: deviation_val.is_none(), deviation_val });
        }
    }
    Ok(ValidationReport { all_hold: relations.iter().all(|r| r.holds), relations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn poly(v: &[i64]) -> EulerPolynomial {
        EulerPolynomial { coeffs: v.iter().map(|&c| int(c)).collect() }
    }

    /// ∏ (1 − c·r X) over roots r in Q[t]/(t² − at + eL), each root given as
    /// (u, v) meaning u + v·t; α = t, β = a − t.
    fn roots_oracle(ell: u64, a: i64, eps: i64, k: u32, j: i64, tw: i64, roots: &[(usize, usize)]) -> EulerPolynomial {
        let el = int(eps) * int(ell as i64).pow(k as i32 + 1);
        let a = int(a);
        // element u + v t, t² = a t − eL
        let mul = |x: &(BigRational, BigRational), y: &(BigRational, BigRational)| {
            let tt = &x.1 * &y.1;
            (&x.0 * &y.0 - &tt * &el, &x.0 * &y.1 + &x.1 * &y.0 + &tt * &a)
        };
        let alpha = (BigRational::zero(), BigRational::one());
        let beta = (a.clone(), -BigRational::one());
        let c = twist_scalar(ell, tw, j);
        // polynomial with coefficients in Q[t]
        let mut acc: Vec<(BigRational, BigRational)> = vec![(BigRational::one(), BigRational::zero())];
        for &(na, nb) in roots {
            let mut r = (BigRational::one(), BigRational::zero());
            for _ in 0..na {
                r = mul(&r, &alpha);
            }
            for _ in 0..nb {
                r = mul(&r, &beta);
            }
            let lin = (-(&c * &r.0), -(&c * &r.1));
            let mut next = acc.clone();
            next.push((BigRational::zero(), BigRational::zero()));
            for (i, x) in acc.iter().enumerate() {
                let m = mul(x, &lin);
                next[i + 1].0 += m.0;
                next[i + 1].1 += m.1;
            }
            acc = next;
        }
        assert!(acc.iter().all(|x| x.1.is_zero()), "symmetric functions are rational");
        EulerPolynomial { coeffs: acc.into_iter().map(|x| x.0).collect() }.trimmed()
    }

    #[test]
    fn hand_polynomials() {
        assert_eq!(sym2_euler_poly(2, 1, 1, 0, 0, 1), poly(&[1, 1, -2, -8]));
        let chk = rankin_factorization_check(2, 1, 1, 1, 0, 0).unwrap();
        assert_eq!(chk.q, poly(&[1, -1, -4, -4, 16]));
        assert!(chk.holds);
        assert_eq!(sym2_euler_poly(7, 3, 1, 1, 2, 0), poly(&[1]));
        assert_eq!(chk.q.to_string(), "1 - X - 4X^2 - 4X^3 + 16X^4");
    }

    #[test]
    fn closed_forms_match_roots_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let ell = [2u64, 3, 5, 7, 11, 13][rng.gen_range(0..6)];
            let k = rng.gen_range(0..3);
            let bound = (2.0 * (ell as f64).powf((k + 1) as f64 / 2.0)).floor() as i64;
            let a = rng.gen_range(-bound..=bound);
            let eps = if rng.gen_bool(0.5) { 1 } else { -1 };
            let tw = if rng.gen_bool(0.5) { 1 } else { -1 };
            let j = rng.gen_range(0..=2 * k as i64 + 2);
            let p = sym2_euler_poly(ell, a, eps, k, j, tw);
            assert_eq!(p, roots_oracle(ell, a, eps, k, j, tw, &[(2, 0), (1, 1), (0, 2)]));
            let q = rankin_euler_poly(ell, a, eps, k, j, tw);
            assert_eq!(q, roots_oracle(ell, a, eps, k, j, tw, &[(2, 0), (1, 1), (1, 1), (0, 2)]));
        }
    }

    #[test]
    fn group_ring_basics() {
        let lv = TameLevel::new(5, &[11, 101]).unwrap();
        assert_eq!(lv.orders, vec![5, 25]);
        let d = GroupRingElement::delta(&lv, 6, 101).unwrap();
        let mut pw = GroupRingElement::one(&lv, 6);
        for _ in 0..25 {
            pw = pw.mul(&d).unwrap();
        }
        assert!(pw.is_one());
        let n = GroupRingElement::norm_element(&lv, 6, 11).unwrap();
        let d11 = GroupRingElement::delta(&lv, 6, 11).unwrap();
        let one = GroupRingElement::one(&lv, 6);
        assert!(n.mul(&d11.sub(&one).unwrap()).unwrap().coeffs.iter().all(|c| *c == 0));
        let cn = n.corestrict(11).unwrap();
        assert_eq!(cn, GroupRingElement::constant(&lv.without(11).unwrap(), 6, 5));
        assert!(TameLevel::new(5, &[13]).is_err());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = GroupRingElement::random(&lv, 6, &mut rng);
        assert_eq!(x.mul(&d11).unwrap().corestrict(11).unwrap(), x.corestrict(11).unwrap());
        assert_eq!(x.mul(&one).unwrap(), x);
    }

    #[test]
    fn inversion_hand_case() {
        let lv = TameLevel { p: 3, primes: vec![7], orders: vec![3] };
        let x = GroupRingElement { level: lv.clone(), p_prec: 2, coeffs: vec![1, 7, 0] };
        let y = invert_unit_mod_radical(&x).unwrap();
        assert_eq!(y.coeffs, vec![5, 1, 2]);
        assert!(invert_unit_mod_radical(&GroupRingElement::one(&lv, 2)).unwrap().is_one());
        let bad = GroupRingElement { level: lv, p_prec: 2, coeffs: vec![1, 8, 0] };
        assert!(matches!(invert_unit_mod_radical(&bad), Err(IwaError::NonUnit)));
    }

    fn sample_system(primes: &[u64], seed: u64) -> SyntheticSystem {
        let lv = TameLevel::new(5, primes).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<EulerPrime> = primes
            .iter()
            .map(|&ell| EulerPrime {
                ell,
                a: 2,
                eps: 1,
                tw: 1,
                frobenius: primes.iter().filter(|&&l| l != ell).map(|&l| (l, rng.gen_range(0..25))).collect(),
                gamma: 2,
            })
            .collect();
        let seed = GroupRingElement::random(&lv, 12, &mut rng);
        build_synthetic_system(&seed, &data, 1, 3).unwrap()
    }

    #[test]
    fn single_prime_by_hand() {
        let sys = sample_system(&[11], 5);
        let top = sys.class(&sys.level).unwrap();
        let bottom = sys.class(&sys.level.without(11).unwrap()).unwrap();
        // level 1: P is a scalar, so c_1 = augmentation(c_11) / P(γ c)
        let poly = sym2_euler_poly(11, 2, 1, 1, 3, 1);
        let m = top.modulus();
        let pv = poly.eval(&GroupRingElement::constant(&bottom.level, 12, 2)).unwrap().coeffs[0];
        assert_eq!(mulmod(bottom.coeffs[0], pv, m), top.augmentation());
        assert!(validate_system(&sys).unwrap().all_hold);
    }

    #[test]
    fn validator_catches_faults() {
        let mut sys = sample_system(&[11, 31, 41], 9);
        let rep = validate_system(&sys).unwrap();
        assert!(rep.all_hold && rep.relations.len() == 12);
        sys.perturb(&[11, 41], 7, 11).unwrap();
        let rep = validate_system(&sys).unwrap();
        let bad: Vec<(Vec<u64>, u64)> = rep.failures().map(|f| (f.r.clone(), f.ell)).collect();
        assert!(bad.contains(&(vec![11, 41], 31)) && bad.contains(&(vec![11], 41)) && bad.contains(&(vec![41], 11)));
        assert!(rep.failures().all(|f| f.deviation_val == Some(11)));
    }
}
