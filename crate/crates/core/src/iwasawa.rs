//! Elements of Λ_O(Γ) = O[Γ_tors][[X]], stored as one truncated series per
//! tame character ω^i, with coefficients in E = Q_p(α).
//!
//! γ is fixed so that χ_cyc(γ) = u = 1 + p.

use crate::error::{IwaError, Result};
use crate::padic::{
    invmod, is_prime, max_cap, mulmod, powmod, ppow, split_val, teichmuller_residue, PadicScalar,
};
use crate::quad::{Form, QuadExtScalar};
use crate::series::Series;

/// χ_cyc(γ).
pub fn u_of(p: u64) -> u64 {
    p + 1
}

/// `u^e mod p^cap` for any integer `e`.
pub fn u_pow(p: u64, e: i64, cap: u32) -> u128 {
    let m = ppow(p, cap);
    let u = u_of(p) as u128 % m;
    let base = if e < 0 { invmod(u, m).expect("u is a unit") } else { u };
    powmod(base, e.unsigned_abs() as u128, m)
}

/// p-adic and X-adic precision shared by a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    pub p: u64,
    /// Coefficients known modulo p^p_prec.
    pub p_prec: u32,
    /// Series known modulo X^x_prec.
    pub x_prec: usize,
}

impl Precision {
    pub fn new(p: u64, p_prec: u32, x_prec: usize) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(IwaError::InvalidParameter(format!("p = {p} must be an odd prime")));
        }
        if p_prec == 0 || x_prec == 0 {
            return Err(IwaError::InvalidParameter("precisions must be positive".into()));
        }
        if p_prec + 4 > max_cap(p) {
            return Err(IwaError::InvalidParameter(format!(
                "p-adic precision {p_prec} exceeds the supported cap {} for p = {p}",
                max_cap(p) - 4
            )));
        }
        Ok(Precision { p, p_prec, x_prec })
    }
}

/// `A + αB` with `A, B` series over Q_p. `b == None` means B is exactly zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ESeries {
    pub a: Series,
    pub b: Option<Series>,
}

impl ESeries {
    pub fn from_qp(a: Series) -> Self {
        ESeries { a, b: None }
    }

    pub fn zero(p: u64, cap: u32, n: usize) -> Self {
        ESeries { a: Series::zero(p, cap, n), b: None }
    }

    pub fn len(&self) -> usize {
        self.b.as_ref().map_or(self.a.len(), |b| b.len().min(self.a.len()))
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.as_ref().map_or(true, |b| b.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let b = match (&self.b, &o.b) {
            (None, None) => None,
            (Some(x), None) => Some(x.truncate(o.a.len())),
            (None, Some(y)) => Some(y.truncate(self.a.len())),
            (Some(x), Some(y)) => Some(x.add(y)),
        };
        ESeries { a: self.a.add(&o.a), b }
    }

    pub fn neg(&self) -> Self {
        ESeries { a: self.a.neg(), b: self.b.as_ref().map(|b| b.neg()) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self, form: Option<&Form>) -> Self {
        let n = self.len().min(o.len());
        let a1a2 = self.a.mul(&o.a);
        let bb = match (&self.b, &o.b) {
            (Some(b1), Some(b2)) => {
                let f = form.expect("α-parts need the field data");
                Some(b1.mul(b2).scale(&f.alpha2(a1a2.cap())))
            }
            _ => None,
        };
        let a = match bb {
            Some(x) => a1a2.add(&x),
            None => a1a2,
        };
        let cross = |x: &Option<Series>, y: &Series| x.as_ref().map(|x| x.mul(y));
        let b = match (cross(&self.b, &o.a), cross(&o.b, &self.a)) {
            (None, None) => None,
            (Some(x), None) | (None, Some(x)) => Some(x),
            (Some(x), Some(y)) => Some(x.add(&y)),
        };
        ESeries { a: a.truncate(n), b: b.map(|b| b.truncate(n)) }
    }

    /// Multiply by a scalar of E.
    pub fn scale(&self, x: &QuadExtScalar) -> Self {
        let rel = self.a.cap();
        let xa = self.a.scale(&x.a);
        let mut a = xa;
        let mut b = if x.b.is_exact_zero() { None } else { Some(self.a.scale(&x.b)) };
        if let Some(sb) = &self.b {
            b = Some(match b {
                Some(bb) => bb.add(&sb.scale(&x.a)),
                None => sb.scale(&x.a),
            });
            if !x.b.is_exact_zero() {
                let t = sb.scale(&x.b).scale(&x.form.alpha2(rel));
                a = a.add(&t);
            }
        }
        ESeries { a, b }
    }

    pub fn scale_qp(&self, x: &PadicScalar) -> Self {
        ESeries { a: self.a.scale(x), b: self.b.as_ref().map(|b| b.scale(x)) }
    }

    pub fn map(&self, f: impl Fn(&Series) -> Series) -> Self {
        ESeries { a: f(&self.a), b: self.b.as_ref().map(f) }
    }

    pub fn coeff(&self, n: usize, form: Option<&Form>) -> QuadExtScalar {
        let a = self.a.coeff(n);
        let f = match form {
            Some(f) => *f,
            None => Form { p: self.a.p(), k: 0, eps: 1 },
        };
        let b = self.b.as_ref().map_or(PadicScalar::exact_zero(a.p()), |b| b.coeff(n));
        QuadExtScalar::new(a, b, f)
    }

    /// Agreement at shared precision.
    pub fn agrees(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }
}

/// A character of Γ: ω^tame · θ · χ_cyc^twist with θ of wild conductor
/// p^{wild+1} (wild = 0 means θ trivial).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiniteCharacter {
    pub tame: i64,
    pub wild: u32,
    pub twist: i64,
}

/// Element of Λ_O(Γ) ⊗ E, one component per tame character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IwasawaElement {
    pub prec: Precision,
    pub form: Option<Form>,
    comps: Vec<ESeries>,
}

impl IwasawaElement {
    pub fn zero(prec: Precision, form: Option<Form>) -> Self {
        let cap = prec.p_prec;
        let comps = (0..prec.p - 1).map(|_| ESeries::zero(prec.p, cap, prec.x_prec)).collect();
        IwasawaElement { prec, form, comps }
    }

    /// `e_{ω^i} · s`.
    pub fn from_series(prec: Precision, form: Option<Form>, tame: i64, s: ESeries) -> Self {
        let mut z = Self::zero(prec, form);
        let i = z.index(tame);
        z.comps[i] = s;
        z
    }

    /// `e_{ω^i} · s` for a series over Q_p.
    pub fn from_qp(prec: Precision, tame: i64, s: Series) -> Self {
        Self::from_series(prec, None, tame, ESeries::from_qp(s))
    }

    /// The same series placed in every tame component (an element of O[[Γ₁]]).
    pub fn diagonal(prec: Precision, form: Option<Form>, s: ESeries) -> Self {
        let comps = (0..prec.p - 1).map(|_| s.clone()).collect();
        IwasawaElement { prec, form, comps }
    }

    pub fn index(&self, i: i64) -> usize {
        i.rem_euclid(self.prec.p as i64 - 1) as usize
    }

    pub fn component(&self, i: i64) -> &ESeries {
        &self.comps[self.index(i)]
    }

    pub fn components(&self) -> &[ESeries] {
        &self.comps
    }

    pub fn set_component(&mut self, i: i64, s: ESeries) {
        let k = self.index(i);
        self.comps[k] = s;
    }

    /// Uniformly random integral element: every coefficient (and, with a
    /// form, every α-coefficient) drawn mod p^{p_prec}.
    pub fn random_integral<R: rand::Rng + ?Sized>(prec: Precision, form: Option<Form>, rng: &mut R) -> Self {
        let (p, cap, n) = (prec.p, prec.p_prec, prec.x_prec);
        let m = ppow(p, cap);
        let mut draw = || Series::from_parts(p, cap, 0, (0..n).map(|_| rng.gen_range(0..m)).collect(), vec![cap; n]);
        let comps = (0..p - 1)
            .map(|_| ESeries { a: draw(), b: form.map(|_| draw()) })
            .collect();
        IwasawaElement { prec, form, comps }
    }

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = Some(form);
        self
    }

    fn joint_form(&self, o: &Self) -> Result<Option<Form>> {
        if self.prec.p != o.prec.p {
            return Err(IwaError::PrecisionMismatch("different primes".into()));
        }
        match (self.form, o.form) {
            (Some(a), Some(b)) if a != b => {
                Err(IwaError::PrecisionMismatch("different coefficient fields".into()))
            }
            (a, b) => Ok(a.or(b)),
        }
    }

    fn joint_prec(&self, o: &Self) -> Precision {
        Precision {
            p: self.prec.p,
            p_prec: self.prec.p_prec.min(o.prec.p_prec),
            x_prec: self.prec.x_prec.min(o.prec.x_prec),
        }
    }

    fn zip(&self, o: &Self, f: impl Fn(&ESeries, &ESeries) -> ESeries) -> Result<Self> {
        let form = self.joint_form(o)?;
        let comps = self.comps.iter().zip(&o.comps).map(|(a, b)| f(a, b)).collect();
        Ok(IwasawaElement { prec: self.joint_prec(o), form, comps })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|s| s.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let form = self.joint_form(o)?;
        self.zip(o, |a, b| a.mul(b, form.as_ref()))
    }

    pub fn map(&self, f: impl Fn(&ESeries) -> ESeries) -> Self {
        IwasawaElement { prec: self.prec, form: self.form, comps: self.comps.iter().map(f).collect() }
    }

    pub fn scale(&self, x: &QuadExtScalar) -> Self {
        let mut r = self.map(|s| s.scale(x));
        if !x.b.is_exact_zero() {
            r.form = Some(x.form);
        }
        r
    }

    pub fn scale_qp(&self, x: &PadicScalar) -> Self {
        self.map(|s| s.scale_qp(x))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Equality at the precision both sides share.
    pub fn agrees(&self, o: &Self) -> bool {
        self.sub(o).map(|d| d.is_zero()).unwrap_or(false)
    }

    /// Tw_n: tame index i moves to i − n and X ↦ u^n(1+X) − 1.
    pub fn twist(&self, n: i64) -> Self {
        if n == 0 {
            return self.clone();
        }
        let c = u_pow(self.prec.p, n, self.prec.p_prec.max(self.max_cap()));
        let mut out = Self::zero(self.prec, self.form);
        for (i, s) in self.comps.iter().enumerate() {
            let t = s.map(|x| x.affine_subst(c % x.modulus()));
            let j = out.index(i as i64 - n);
            out.comps[j] = t;
        }
        out
    }

    fn max_cap(&self) -> u32 {
        self.comps.iter().map(|s| s.a.cap()).max().unwrap_or(self.prec.p_prec)
    }

    /// Keep only the ω^j component.
    pub fn project(&self, j: i64) -> Self {
        let keep = self.index(j);
        let mut out = Self::zero(self.prec, self.form);
        out.comps[keep] = self.comps[keep].clone();
        out
    }

    /// Value at a character with trivial wild part: the ω^tame component at
    /// X = u^twist − 1.
    pub fn evaluate(&self, ch: &FiniteCharacter) -> Result<QuadExtScalar> {
        if ch.wild > 0 {
            return Err(IwaError::InvalidParameter(
                "wild characters are handled by remainder_mod_cyclotomic".into(),
            ));
        }
        let p = self.prec.p;
        let s = self.component(ch.tame);
        let form = self.form.unwrap_or(Form { p, k: 0, eps: 1 });
        let ev = |x: &Series| eval_series(x, ch.twist);
        let a = ev(&s.a);
        let b = s.b.as_ref().map_or(PadicScalar::exact_zero(p), ev);
        Ok(QuadExtScalar::new(a, b, form))
    }

    /// Remainder of the ω^tame component modulo Φ_{p^m}(u^{−j}(1+X)).
    pub fn remainder_mod_cyclotomic(&self, tame: i64, m: u32, j: i64) -> Result<ESeries> {
        let s = self.component(tame);
        let rem = |x: &Series| remainder_mod_cyclotomic(x, m, j);
        Ok(ESeries { a: rem(&s.a)?, b: s.b.as_ref().map(rem).transpose()? })
    }
}

/// Σ a_n (u^t − 1)^n with the unseen tail folded into the error term.
pub fn eval_series(s: &Series, t: i64) -> PadicScalar {
    let p = s.p();
    if t == 0 || s.is_empty() {
        return s.coeff(0);
    }
    let cap = s.cap();
    let x = u_pow(p, t, cap) as i128 - 1;
    let x = PadicScalar::from_int(p, x.rem_euclid(ppow(p, cap) as i128), cap);
    let vx = x.valuation().unwrap_or(cap as i64);
    let mut acc = PadicScalar::exact_zero(p);
    for n in (0..s.len()).rev() {
        acc = acc.mul(&x).add(&s.coeff(n));
    }
    let tail = PadicScalar::zero_mod(p, s.shift() + s.len() as i64 * vx);
    acc.add(&tail)
}

/// Binomial coefficients C(e, t) for t < n, as residues mod p^cap.
pub(crate) fn binomials(p: u64, e: u128, n: usize, cap: u32) -> Vec<u128> {
    let m = ppow(p, cap);
    let mut out = vec![0u128; n];
    if n == 0 {
        return out;
    }
    out[0] = 1 % m;
    let mut v: i64 = 0;
    let mut unit: u128 = 1 % m;
    for t in 1..n {
        let t128 = t as u128;
        if t128 > e {
            break;
        }
        let (vn, un) = split_val(e - t128 + 1, p);
        let (vd, ud) = split_val(t128, p);
        v += vn as i64 - vd as i64;
        unit = mulmod(mulmod(unit, un % m, m), invmod(ud % m, m).expect("unit"), m);
        out[t] = if v >= cap as i64 { 0 } else { mulmod(unit, ppow(p, v as u32), m) };
    }
    out
}

/// The s ∈ Z_p with ⟨x⟩ = u^s, returned mod p^cap.
pub fn gamma_log(p: u64, x: i64, cap: u32) -> Result<u128> {
    let m = ppow(p, cap + 1);
    let w = teichmuller_residue(p, x, cap + 1)?;
    let xr = (x as i128).rem_euclid(m as i128) as u128;
    let mut v = mulmod(xr, invmod(w, m).expect("unit"), m);
    let uinv = invmod(u_of(p) as u128, m).expect("unit");
    let mut s = 0u128;
    for i in 0..cap {
        // v ≡ 1 mod p^{i+1}, and u^{p^i} ≡ 1 + p^{i+1} mod p^{i+2}
        let d = (v + m - 1) % m / ppow(p, i + 1) % p as u128;
        if d != 0 {
            s += d * ppow(p, i);
            v = mulmod(v, powmod(uinv, d * ppow(p, i), m), m);
        }
    }
    Ok(s)
}

/// (1+X)^s mod X^n for s known mod p^cap; C(s, t) is then known mod
/// p^{cap − v(t!)}.
pub fn binomial_series(p: u64, s: u128, cap: u32, n: usize) -> Series {
    let res = binomials(p, s, n, cap);
    let mut vf = 0i64;
    let precs = (0..n)
        .map(|t| {
            if t > 0 {
                vf += split_val(t as u128, p).0 as i64;
            }
            (cap as i64 - vf).max(0) as u32
        })
        .collect();
    Series::from_parts(p, cap, 0, res, precs)
}

/// The group element σ_x ∈ Λ for x prime to p: ω^i(x)(1+X)^{s(x)} on the
/// ω^i component.
pub fn group_element(prec: Precision, x: i64) -> Result<IwasawaElement> {
    let p = prec.p;
    let cap = (prec.p_prec + 8).min(max_cap(p) - 1);
    let s = gamma_log(p, x, cap)?;
    let base = binomial_series(p, s, cap, prec.x_prec);
    let mut out = IwasawaElement::zero(prec, None);
    for i in 0..(p - 1) as i64 {
        let w = PadicScalar::teichmuller(p, x, cap)?.pow(i as u64);
        out.set_component(i, ESeries::from_qp(base.scale(&w)));
    }
    Ok(out)
}

/// Φ_{p^m}(u^{−j}(1+X)) mod (p^cap, X^n), as an exact polynomial identity.
pub fn cyclotomic_factor(p: u64, m: u32, j: i64, cap: u32, n: usize) -> Series {
    assert!(m >= 1);
    let modulus = ppow(p, cap);
    let c = u_pow(p, -j, cap);
    let e1 = (p as u128).pow(m - 1);
    let mut acc = vec![0u128; n];
    for i in 0..p as u128 {
        let e = i * e1;
        let ce = powmod(c, e, modulus);
        for (t, b) in binomials(p, e, n, cap).into_iter().enumerate() {
            acc[t] = (acc[t] + mulmod(ce, b, modulus)) % modulus;
        }
    }
    Series::from_parts(p, cap, 0, acc, vec![cap; n])
}

/// Degree of Φ_{p^m}: p^{m−1}(p−1).
pub fn cyclotomic_degree(p: u64, m: u32) -> u128 {
    (p as u128).pow(m - 1) * (p as u128 - 1)
}

/// Reduce a series modulo Φ_{p^m}(u^{−j}(1+X)). The unseen tail caps the
/// remainder's precision at floor(N / deg Φ) digits above the lattice.
pub fn remainder_mod_cyclotomic(s: &Series, m: u32, j: i64) -> Result<Series> {
    let p = s.p();
    let n = s.len();
    let d = cyclotomic_degree(p, m);
    if d > n as u128 {
        return Err(IwaError::InvalidParameter(format!(
            "x_prec {n} is below deg Φ_{{p^{m}}} = {d}"
        )));
    }
    let d = d as usize;
    let cap = s.cap();
    let modulus = ppow(p, cap);
    let phi = cyclotomic_factor(p, m, j, cap, d + 1);
    let lead_inv = invmod(phi.residues()[d], modulus).expect("leading coefficient is a unit");
    let g: Vec<u128> = phi.residues().iter().map(|&x| mulmod(x, lead_inv, modulus)).collect();
    let gv: Vec<u32> = g
        .iter()
        .map(|&x| if x == 0 { cap } else { split_val(x, p).0 })
        .collect();
    let mut r = s.residues().to_vec();
    let mut rp = s.precs().to_vec();
    for i in (d..n).rev() {
        let q = r[i];
        let qp = rp[i];
        for t in 0..d {
            let k = i - d + t;
            r[k] = crate::padic::submod(r[k], mulmod(q, g[t], modulus), modulus);
            rp[k] = rp[k].min(qp.saturating_add(gv[t]));
        }
    }
    r.truncate(d);
    rp.truncate(d);
    let tail = (n / d) as u32;
    let rp = rp.into_iter().map(|q| q.min(tail)).collect();
    Ok(Series::from_parts(p, cap, s.shift(), r, rp))
}
