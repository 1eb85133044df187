//! Residue arithmetic modulo p^k and capped-precision elements of Q_p.

use crate::error::{IwaError, Result};
use std::fmt;

/// Largest modulus we allow: keeps doubling inside `mulmod` overflow free.
const MAX_MODULUS: u128 = 1 << 126;

/// `p^e` as a u128, panicking on overflow.
pub fn ppow(p: u64, e: u32) -> u128 {
    (p as u128).checked_pow(e).expect("p-power overflows u128")
}

/// Largest exponent `e` with `p^e` below the working-modulus ceiling.
pub fn max_cap(p: u64) -> u32 {
    let mut e = 0;
    let mut m: u128 = 1;
    while m.checked_mul(p as u128).map_or(false, |x| x < MAX_MODULUS) {
        m *= p as u128;
        e += 1;
    }
    e
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn mulmod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return ((a % m) * (b % m)) % m;
    }
    let (mut a, mut b) = (a % m, b % m);
    if a < b {
        std::mem::swap(&mut a, &mut b);
    }
    // b small enough for a direct product
    if b <= u64::MAX as u128 && a <= u64::MAX as u128 {
        return (a * b) % m;
    }
    let mut r: u128 = 0;
    let bits = 128 - b.leading_zeros();
    for i in (0..bits).rev() {
        r <<= 1;
        if r >= m {
            r -= m;
        }
        if (b >> i) & 1 == 1 {
            r += a;
            if r >= m {
                r -= m;
            }
        }
    }
    r
}

pub fn addmod(a: u128, b: u128, m: u128) -> u128 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

pub fn submod(a: u128, b: u128, m: u128) -> u128 {
    if a >= b {
        a - b
    } else {
        a + (m - b)
    }
}

pub fn negmod(a: u128, m: u128) -> u128 {
    if a == 0 {
        0
    } else {
        m - a
    }
}

pub fn powmod(mut a: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

/// Inverse of a unit modulo `m`, by the extended Euclidean algorithm.
pub fn invmod(a: u128, m: u128) -> Option<u128> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u128)
}

/// Reduce a signed integer into `[0, m)`.
pub fn from_i128(a: i128, m: u128) -> u128 {
    a.rem_euclid(m as i128) as u128
}

/// Symmetric representative in `(-m/2, m/2]`.
pub fn centered(a: u128, m: u128) -> i128 {
    if a > m / 2 {
        a as i128 - m as i128
    } else {
        a as i128
    }
}

/// p-adic valuation of a nonzero integer, with its prime-to-p part.
pub fn split_val(mut a: u128, p: u64) -> (u32, u128) {
    debug_assert!(a != 0);
    let p = p as u128;
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    (v, a)
}

/// Teichmüller lift of `a mod p` as a residue mod `p^cap`.
pub fn teichmuller_residue(p: u64, a: i64, cap: u32) -> Result<u128> {
    let r = a.rem_euclid(p as i64);
    if r == 0 {
        return Err(IwaError::InvalidParameter(format!(
            "Teichmüller lift of a multiple of {p}"
        )));
    }
    let m = ppow(p, cap);
    let mut x = r as u128 % m;
    for _ in 0..cap {
        x = powmod(x, p as u128, m);
    }
    Ok(x)
}

/// Valuation in (1/2)Z, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfVal(pub i64);

impl HalfVal {
    pub fn int(v: i64) -> Self {
        HalfVal(2 * v)
    }
    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, "2")) => n.trim().parse().ok().map(HalfVal),
            Some((n, "1")) | Some((n, "")) => n.trim().parse::<i64>().ok().map(HalfVal::int),
            None => s.parse::<i64>().ok().map(HalfVal::int),
            _ => None,
        }
    }
}

impl fmt::Display for HalfVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    ExactZero,
    /// Zero modulo p^abs.
    Zero { abs: i64 },
    /// p^val * unit, the unit known mod p^rel.
    Unit { val: i64, unit: u128, rel: u32 },
}

/// Element of Q_p with capped relative precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PadicScalar {
    p: u64,
    kind: Kind,
}

/// Outcome of comparing a scalar against zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Zeroness {
    Exact,
    ToPrecision(i64),
    Nonzero,
}

impl PadicScalar {
    pub fn exact_zero(p: u64) -> Self {
        PadicScalar { p, kind: Kind::ExactZero }
    }

    /// Zero known modulo `p^abs`.
    pub fn zero_mod(p: u64, abs: i64) -> Self {
        PadicScalar { p, kind: Kind::Zero { abs } }
    }

    /// `p^val * unit` with `unit` known mod `p^rel`; `unit` need not be reduced
    /// or coprime to p, the representation is normalised.
    pub fn new(p: u64, val: i64, unit: u128, rel: u32) -> Self {
        Self::normalise(p, val, unit, rel)
    }

    fn normalise(p: u64, val: i64, x: u128, rel: u32) -> Self {
        if rel == 0 {
            return Self::zero_mod(p, val);
        }
        let m = ppow(p, rel);
        let x = x % m;
        if x == 0 {
            return Self::zero_mod(p, val + rel as i64);
        }
        let (v, u) = split_val(x, p);
        let rel = rel - v;
        PadicScalar {
            p,
            kind: Kind::Unit { val: val + v as i64, unit: u % ppow(p, rel), rel },
        }
    }

    pub fn from_int(p: u64, n: i128, rel: u32) -> Self {
        if n == 0 {
            return Self::exact_zero(p);
        }
        let (v, u) = split_val(n.unsigned_abs(), p);
        let m = ppow(p, rel);
        let u = if n < 0 { negmod(u % m, m) } else { u % m };
        Self::normalise(p, v as i64, u, rel)
    }

    pub fn from_ratio(p: u64, num: i128, den: i128, rel: u32) -> Result<Self> {
        if den == 0 {
            return Err(IwaError::DivisionByZero);
        }
        Self::from_int(p, num, rel).div(&Self::from_int(p, den, rel))
    }

    pub fn one(p: u64, rel: u32) -> Self {
        Self::from_int(p, 1, rel)
    }

    /// Teichmüller representative of `a mod p`.
    pub fn teichmuller(p: u64, a: i64, rel: u32) -> Result<Self> {
        let r = teichmuller_residue(p, a, rel)?;
        Ok(PadicScalar { p, kind: Kind::Unit { val: 0, unit: r, rel } })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.kind, Kind::ExactZero)
    }

    pub fn zeroness(&self) -> Zeroness {
        match self.kind {
            Kind::ExactZero => Zeroness::Exact,
            Kind::Zero { abs } => Zeroness::ToPrecision(abs),
            Kind::Unit { .. } => Zeroness::Nonzero,
        }
    }

    pub fn is_zero(&self) -> bool {
        !matches!(self.kind, Kind::Unit { .. })
    }

    /// Valuation; `None` for zero (exact or to precision).
    pub fn valuation(&self) -> Option<i64> {
        match self.kind {
            Kind::Unit { val, .. } => Some(val),
            _ => None,
        }
    }

    /// Lower bound for the valuation: the valuation, or the precision of a zero.
    pub fn val_floor(&self) -> i64 {
        match self.kind {
            Kind::Unit { val, .. } => val,
            Kind::Zero { abs } => abs,
            Kind::ExactZero => i64::MAX,
        }
    }

    /// Absolute precision (`i64::MAX` when exact).
    pub fn abs_prec(&self) -> i64 {
        match self.kind {
            Kind::ExactZero => i64::MAX,
            Kind::Zero { abs } => abs,
            Kind::Unit { val, rel, .. } => val + rel as i64,
        }
    }

    pub fn rel_prec(&self) -> u32 {
        match self.kind {
            Kind::Unit { rel, .. } => rel,
            _ => 0,
        }
    }

    /// Unit part as a residue (0 for zero).
    pub fn unit(&self) -> u128 {
        match self.kind {
            Kind::Unit { unit, .. } => unit,
            _ => 0,
        }
    }

    /// Residue of `p^-shift * self` modulo `p^cap`, for callers storing the
    /// scalar in a lattice `p^shift Z_p`. Digits below the lattice are an error.
    pub fn to_lattice(&self, shift: i64, cap: u32) -> Result<u128> {
        match self.kind {
            Kind::ExactZero | Kind::Zero { .. } => Ok(0),
            Kind::Unit { val, unit, .. } => {
                if val < shift {
                    return Err(IwaError::InvalidParameter(format!(
                        "valuation {val} below lattice p^{shift}"
                    )));
                }
                let e = (val - shift) as u64;
                if e >= cap as u64 {
                    return Ok(0);
                }
                let m = ppow(self.p, cap);
                Ok(mulmod(unit, ppow(self.p, e as u32), m))
            }
        }
    }

    pub fn neg(&self) -> Self {
        match self.kind {
            Kind::Unit { val, unit, rel } => {
                let m = ppow(self.p, rel);
                PadicScalar { p: self.p, kind: Kind::Unit { val, unit: negmod(unit, m), rel } }
            }
            _ => *self,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p, "mixed primes");
        let p = self.p;
        match (self.kind, o.kind) {
            (Kind::ExactZero, _) => return *o,
            (_, Kind::ExactZero) => return *self,
            _ => {}
        }
        let abs = self.abs_prec().min(o.abs_prec());
        let v0 = self.val_floor().min(o.val_floor()).min(abs);
        if v0 >= abs {
            return Self::zero_mod(p, abs);
        }
        let rel = (abs - v0) as u32;
        let m = ppow(p, rel);
        let lift = |s: &Self| -> u128 {
            match s.kind {
                Kind::Unit { val, unit, .. } => {
                    let e = val - v0;
                    if e >= rel as i64 {
                        0
                    } else {
                        mulmod(unit, ppow(p, e as u32), m)
                    }
                }
                _ => 0,
            }
        };
        Self::normalise(p, v0, addmod(lift(self), lift(o), m), rel)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p, "mixed primes");
        let p = self.p;
        match (self.kind, o.kind) {
            (Kind::ExactZero, _) | (_, Kind::ExactZero) => Self::exact_zero(p),
            (Kind::Zero { abs: a }, Kind::Zero { abs: b }) => Self::zero_mod(p, a + b),
            (Kind::Zero { abs }, Kind::Unit { val, .. })
            | (Kind::Unit { val, .. }, Kind::Zero { abs }) => Self::zero_mod(p, abs + val),
            (Kind::Unit { val: v1, unit: u1, rel: r1 }, Kind::Unit { val: v2, unit: u2, rel: r2 }) => {
                let rel = r1.min(r2);
                let m = ppow(p, rel);
                PadicScalar {
                    p,
                    kind: Kind::Unit { val: v1 + v2, unit: mulmod(u1, u2, m), rel },
                }
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match self.kind {
            Kind::ExactZero => Err(IwaError::DivisionByZero),
            Kind::Zero { .. } => Err(IwaError::PrecisionExhausted),
            Kind::Unit { val, unit, rel } => {
                let m = ppow(self.p, rel);
                let inv = invmod(unit, m).expect("unit part is a unit");
                Ok(PadicScalar { p: self.p, kind: Kind::Unit { val: -val, unit: inv, rel } })
            }
        }
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if self.is_exact_zero() {
            if o.is_exact_zero() {
                return Err(IwaError::DivisionByZero);
            }
            return Ok(*self);
        }
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut r = Self::one(self.p, self.rel_prec().max(1));
        let mut b = *self;
        if e == 0 {
            return r;
        }
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        r
    }

    /// Multiply by `p^e`.
    pub fn shift(&self, e: i64) -> Self {
        match self.kind {
            Kind::ExactZero => *self,
            Kind::Zero { abs } => Self::zero_mod(self.p, abs + e),
            Kind::Unit { val, unit, rel } => {
                PadicScalar { p: self.p, kind: Kind::Unit { val: val + e, unit, rel } }
            }
        }
    }

    /// Drop relative precision to at most `rel`.
    pub fn truncate_rel(&self, rel: u32) -> Self {
        match self.kind {
            Kind::Unit { val, unit, rel: r } if r > rel => Self::normalise(self.p, val, unit, rel),
            _ => *self,
        }
    }

    /// Equality to the precision both operands share.
    pub fn agrees(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }

    /// Signed integer representative when the value is integral and the
    /// symmetric lift is meaningful.
    pub fn to_i128(&self) -> Option<i128> {
        match self.kind {
            Kind::ExactZero | Kind::Zero { .. } => Some(0),
            Kind::Unit { val, unit, rel } => {
                if val < 0 {
                    return None;
                }
                let abs = val as u32 + rel;
                let m = ppow(self.p, abs);
                let x = mulmod(unit, ppow(self.p, val as u32), m);
                Some(centered(x, m))
            }
        }
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::ExactZero => write!(f, "0"),
            Kind::Zero { abs } => write!(f, "O({}^{})", self.p, abs),
            Kind::Unit { val, unit, rel } => {
                let m = ppow(self.p, rel);
                let c = centered(unit, m);
                if val == 0 {
                    write!(f, "{c} + O({}^{})", self.p, rel)
                } else {
                    write!(f, "{}^{val}*{c} + O({}^{})", self.p, self.p, val + rel as i64)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn teichmuller_of_two_mod_125() {
        let t = PadicScalar::teichmuller(5, 2, 3).unwrap();
        assert_eq!(t.unit(), 57);
        assert_eq!(powmod(57, 4, 125), 1);
    }

    #[test]
    fn teichmuller_of_minus_one() {
        let t = PadicScalar::teichmuller(7, 6, 5).unwrap();
        assert_eq!(t.unit(), ppow(7, 5) - 1);
        assert!(PadicScalar::teichmuller(5, 10, 3).is_err());
    }

    #[test]
    fn slow_mulmod_matches_bigint() {
        use num_bigint::BigUint;
        let m = ppow(7, 40);
        let a = m - 12345678901234567;
        let b = m / 3 + 17;
        let expect = (BigUint::from(a) * BigUint::from(b)) % BigUint::from(m);
        assert_eq!(BigUint::from(mulmod(a, b, m)), expect);
    }

    #[test]
    fn add_tracks_min_precision() {
        let a = PadicScalar::from_int(5, 3, 10);
        let b = PadicScalar::from_int(5, 25, 2).shift(0);
        let s = a.add(&b);
        assert_eq!(s.abs_prec(), 4);
        assert_eq!(s.to_i128(), Some(28));
    }

    #[test]
    fn cancellation_reports_zero_to_precision() {
        let a = PadicScalar::from_int(5, 7, 4);
        let z = a.sub(&a);
        assert_eq!(z.zeroness(), Zeroness::ToPrecision(4));
        assert_eq!(PadicScalar::exact_zero(5).zeroness(), Zeroness::Exact);
    }

    #[test]
    fn ratio_and_inverse() {
        let x = PadicScalar::from_ratio(5, 1, 10, 6).unwrap();
        assert_eq!(x.valuation(), Some(-1));
        let y = x.mul(&PadicScalar::from_int(5, 10, 6));
        assert!(y.agrees(&PadicScalar::one(5, 6)));
        assert_eq!(PadicScalar::one(5, 3).div(&PadicScalar::exact_zero(5)), Err(IwaError::DivisionByZero));
    }

    #[test]
    fn half_val_format() {
        assert_eq!(HalfVal(3).to_string(), "3/2");
        assert_eq!(HalfVal(4).to_string(), "2");
        assert_eq!(HalfVal::parse("3/2"), Some(HalfVal(3)));
        assert_eq!(HalfVal::parse("-2"), Some(HalfVal(-4)));
    }
}
