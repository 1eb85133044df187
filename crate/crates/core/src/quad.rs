//! The coefficient field E = Q_p(α) with α² = −ε_f(p)·p^{k+1}.
//!
//! Elements are pairs `a + bα` over Q_p. α itself is never extracted, so the
//! ramified case (k even) needs nothing special.

use crate::error::{IwaError, Result};
use crate::padic::{is_prime, HalfVal, PadicScalar};
use std::fmt;

/// Weight data of a form with a_p = 0: the prime, k, and ε_f(p) given as the
/// residue whose Teichmüller lift it is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Form {
    pub p: u64,
    pub k: u32,
    pub eps: i64,
}

impl Form {
    pub fn new(p: u64, k: u32, eps: i64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(IwaError::InvalidParameter(format!("p = {p} must be an odd prime")));
        }
        let eps = eps.rem_euclid(p as i64);
        if eps == 0 {
            return Err(IwaError::InvalidParameter("ε_f(p) must be a unit".into()));
        }
        Ok(Form { p, k, eps })
    }

    /// ε_f(p) as a Teichmüller lift.
    pub fn eps_scalar(&self, rel: u32) -> PadicScalar {
        PadicScalar::teichmuller(self.p, self.eps, rel).expect("eps is a unit")
    }

    /// α² = −ε_f(p) p^{k+1}.
    pub fn alpha2(&self, rel: u32) -> PadicScalar {
        self.eps_scalar(rel).neg().shift(self.k as i64 + 1)
    }

    /// v(α) = (k+1)/2.
    pub fn alpha_val(&self) -> HalfVal {
        HalfVal(self.k as i64 + 1)
    }
}

/// `a + bα` in E.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadExtScalar {
    pub a: PadicScalar,
    pub b: PadicScalar,
    pub form: Form,
}

/// The generator α of E with its defining relation installed.
pub fn alpha_from_form(p: u64, k: u32, eps: i64, rel: u32) -> Result<QuadExtScalar> {
    let form = Form::new(p, k, eps)?;
    Ok(QuadExtScalar::alpha(form, rel))
}

impl QuadExtScalar {
    pub fn from_qp(a: PadicScalar, form: Form) -> Self {
        QuadExtScalar { a, b: PadicScalar::exact_zero(form.p), form }
    }

    pub fn new(a: PadicScalar, b: PadicScalar, form: Form) -> Self {
        QuadExtScalar { a, b, form }
    }

    pub fn alpha(form: Form, rel: u32) -> Self {
        QuadExtScalar {
            a: PadicScalar::exact_zero(form.p),
            b: PadicScalar::one(form.p, rel),
            form,
        }
    }

    pub fn from_int(form: Form, n: i128, rel: u32) -> Self {
        Self::from_qp(PadicScalar::from_int(form.p, n, rel), form)
    }

    pub fn zero(form: Form) -> Self {
        Self::from_qp(PadicScalar::exact_zero(form.p), form)
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.form, o.form, "elements of different fields");
    }

    pub fn is_exact_zero(&self) -> bool {
        self.a.is_exact_zero() && self.b.is_exact_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        QuadExtScalar { a: self.a.add(&o.a), b: self.b.add(&o.b), form: self.form }
    }

    pub fn neg(&self) -> Self {
        QuadExtScalar { a: self.a.neg(), b: self.b.neg(), form: self.form }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn working_rel(&self, o: &Self) -> u32 {
        [self.a, self.b, o.a, o.b].iter().map(|s| s.rel_prec()).max().unwrap_or(1).max(1)
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let a2 = self.form.alpha2(self.working_rel(o));
        let a = self.a.mul(&o.a).add(&a2.mul(&self.b.mul(&o.b)));
        let b = self.a.mul(&o.b).add(&self.b.mul(&o.a));
        QuadExtScalar { a, b, form: self.form }
    }

    pub fn scale(&self, c: &PadicScalar) -> Self {
        QuadExtScalar { a: self.a.mul(c), b: self.b.mul(c), form: self.form }
    }

    pub fn conj(&self) -> Self {
        QuadExtScalar { a: self.a, b: self.b.neg(), form: self.form }
    }

    /// a² − α²b², the norm down to Q_p.
    pub fn norm(&self) -> PadicScalar {
        let a2 = self.form.alpha2(self.working_rel(self));
        self.a.mul(&self.a).sub(&a2.mul(&self.b.mul(&self.b)))
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_exact_zero() {
            return Err(IwaError::DivisionByZero);
        }
        let n = self.norm().inv()?;
        Ok(self.conj().scale(&n))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.check(o);
        if o.is_exact_zero() {
            return Err(IwaError::DivisionByZero);
        }
        if self.is_exact_zero() {
            return Ok(*self);
        }
        Ok(self.mul(&o.inv()?))
    }

    /// min(v(a), v(b) + (k+1)/2). Zero to precision has no valuation either.
    pub fn valuation(&self) -> Result<HalfVal> {
        let va = self.a.valuation().map(HalfVal::int);
        let vb = self.b.valuation().map(|v| HalfVal(2 * v + self.form.k as i64 + 1));
        match (va, vb) {
            (Some(x), Some(y)) => Ok(x.min(y)),
            (Some(x), None) | (None, Some(x)) => Ok(x),
            (None, None) => Err(IwaError::ZeroValuation),
        }
    }

    pub fn agrees(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }
}

impl fmt::Display for QuadExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_exact_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "({}) + ({})·α", self.a, self.b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_squared() {
        let a = alpha_from_form(5, 2, 1, 10).unwrap();
        let sq = a.mul(&a);
        assert_eq!(sq.a.to_i128(), Some(-125));
        assert!(sq.b.is_zero());
        assert_eq!(a.valuation().unwrap(), HalfVal(3));
    }

    #[test]
    fn one_plus_alpha_times_one_minus_alpha() {
        let f = Form::new(5, 2, 1).unwrap();
        let one = QuadExtScalar::from_int(f, 1, 10);
        let a = QuadExtScalar::alpha(f, 10);
        let x = one.add(&a).mul(&one.sub(&a));
        assert_eq!(x.a.to_i128(), Some(126));
        assert!(x.b.is_zero());
    }

    #[test]
    fn mixed_valuation() {
        let f = Form::new(5, 2, 1).unwrap();
        let x = QuadExtScalar::new(
            PadicScalar::from_int(5, 25, 8),
            PadicScalar::from_int(5, 25, 8),
            f,
        );
        assert_eq!(x.valuation().unwrap(), HalfVal::int(2));
        assert_eq!(QuadExtScalar::zero(f).valuation(), Err(IwaError::ZeroValuation));
    }

    #[test]
    fn alpha_parameters() {
        let a = alpha_from_form(7, 1, 1, 10).unwrap();
        assert_eq!(a.mul(&a).a.to_i128(), Some(-49));
        assert_eq!(a.valuation().unwrap(), HalfVal::int(1));
        let a = alpha_from_form(5, 0, -1, 10).unwrap();
        assert_eq!(a.mul(&a).a.to_i128(), Some(5));
    }

    #[test]
    fn inverse_of_alpha() {
        let f = Form::new(5, 1, 2).unwrap();
        let a = QuadExtScalar::alpha(f, 12);
        let one = a.mul(&a.inv().unwrap());
        assert!(one.agrees(&QuadExtScalar::from_int(f, 1, 12)));
    }
}
