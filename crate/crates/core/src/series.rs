//! Truncated power series over Q_p.
//!
//! A series is stored on a lattice `p^shift Z_p[[X]] / X^N`: coefficient `n` is
//! `p^shift * c[n]`, with `c[n]` known modulo `p^prec[n]` and reduced mod
//! `p^cap`. The lattice is declared, not normalised behind the caller's back,
//! so prefactors such as `1/p^r` stay visible as a shift.

use crate::error::{IwaError, Result};
use crate::padic::{
    addmod, from_i128, invmod, mulmod, negmod, ppow, split_val, submod, PadicScalar,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    p: u64,
    cap: u32,
    shift: i64,
    c: Vec<u128>,
    prec: Vec<u32>,
}

impl Series {
    pub fn zero(p: u64, cap: u32, n: usize) -> Self {
        Series { p, cap, shift: 0, c: vec![0; n], prec: vec![cap; n] }
    }

    pub fn constant(p: u64, cap: u32, n: usize, value: i128) -> Self {
        let mut s = Self::zero(p, cap, n);
        if n > 0 {
            s.c[0] = from_i128(value, s.modulus());
        }
        s
    }

    /// `X^d` (zero if `d >= n`).
    pub fn monomial(p: u64, cap: u32, n: usize, d: usize) -> Self {
        let mut s = Self::zero(p, cap, n);
        if d < n {
            s.c[d] = 1 % s.modulus();
        }
        s
    }

    /// Integer coefficients on the lattice `p^shift`, all known to `cap` digits.
    pub fn from_ints(p: u64, cap: u32, shift: i64, coeffs: &[i128], n: usize) -> Self {
        let mut s = Self::zero(p, cap, n);
        s.shift = shift;
        let m = s.modulus();
        for (i, &x) in coeffs.iter().enumerate().take(n) {
            s.c[i] = from_i128(x, m);
        }
        s
    }

    /// Raw constructor from residues on a lattice.
    pub fn from_parts(p: u64, cap: u32, shift: i64, c: Vec<u128>, prec: Vec<u32>) -> Self {
        assert_eq!(c.len(), prec.len());
        let m = ppow(p, cap);
        let c = c.into_iter().map(|x| x % m).collect();
        let prec = prec.into_iter().map(|q| q.min(cap)).collect();
        Series { p, cap, shift, c, prec }
    }

    /// Pack scalars onto the coarsest lattice containing every known coefficient.
    pub fn from_scalars(p: u64, cap: u32, xs: &[PadicScalar]) -> Self {
        // Coarsest lattice below every valuation and every zero's precision,
        // so no coefficient is recorded as better known than it is.
        let shift = xs
            .iter()
            .filter(|x| !x.is_exact_zero())
            .map(|x| x.val_floor())
            .min()
            .unwrap_or(0);
        let m = ppow(p, cap);
        let mut c = Vec::with_capacity(xs.len());
        let mut prec = Vec::with_capacity(xs.len());
        for x in xs {
            let a = x.abs_prec();
            let q = if a == i64::MAX { cap as i64 } else { (a - shift).clamp(0, cap as i64) };
            prec.push(q as u32);
            let r = if q == 0 { 0 } else { x.to_lattice(shift, cap).unwrap_or(0) };
            c.push(r % ppow(p, q as u32).max(1) % m);
        }
        Series { p, cap, shift, c, prec }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn cap(&self) -> u32 {
        self.cap
    }
    pub fn shift(&self) -> i64 {
        self.shift
    }
    pub fn len(&self) -> usize {
        self.c.len()
    }
    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
    pub fn modulus(&self) -> u128 {
        ppow(self.p, self.cap)
    }
    pub fn residues(&self) -> &[u128] {
        &self.c
    }
    pub fn precs(&self) -> &[u32] {
        &self.prec
    }

    /// Coefficient `n` as a scalar (zero beyond the truncation point is not
    /// known, so that is reported as zero to no precision).
    pub fn coeff(&self, n: usize) -> PadicScalar {
        if n >= self.c.len() {
            return PadicScalar::zero_mod(self.p, self.shift);
        }
        PadicScalar::new(self.p, self.shift, self.c[n], self.prec[n])
    }

    pub fn coeffs(&self) -> Vec<PadicScalar> {
        (0..self.len()).map(|n| self.coeff(n)).collect()
    }

    /// Valuation of the lattice residue `c[n]` relative to the lattice, or the
    /// coefficient precision when it is zero to that precision.
    fn rel_val(&self, n: usize) -> u32 {
        let q = self.prec[n];
        if q == 0 {
            return 0;
        }
        let x = self.c[n] % ppow(self.p, q);
        if x == 0 {
            q
        } else {
            split_val(x, self.p).0
        }
    }

    /// Absolute valuation of coefficient `n`, `None` when zero to precision.
    pub fn val_at(&self, n: usize) -> Option<i64> {
        let r = self.rel_val(n);
        if r >= self.prec[n] {
            None
        } else {
            Some(self.shift + r as i64)
        }
    }

    pub fn min_val(&self) -> Option<i64> {
        (0..self.len()).filter_map(|n| self.val_at(n)).min()
    }

    /// Lowest degree with a coefficient known to be nonzero.
    pub fn order(&self) -> Option<usize> {
        (0..self.len()).find(|&n| self.val_at(n).is_some())
    }

    pub fn is_zero(&self) -> bool {
        (0..self.len()).all(|n| self.val_at(n).is_none())
    }

    /// Minimum absolute precision over all coefficients.
    pub fn min_abs_prec(&self) -> i64 {
        self.prec.iter().map(|&q| self.shift + q as i64).min().unwrap_or(i64::MAX)
    }

    pub fn with_cap(&self, cap: u32) -> Self {
        if cap >= self.cap {
            return self.clone();
        }
        let m = ppow(self.p, cap);
        Series {
            p: self.p,
            cap,
            shift: self.shift,
            c: self.c.iter().map(|x| x % m).collect(),
            prec: self.prec.iter().map(|&q| q.min(cap)).collect(),
        }
    }

    pub fn truncate(&self, n: usize) -> Self {
        let mut s = self.clone();
        s.c.truncate(n);
        s.prec.truncate(n);
        s
    }

    /// Cap every coefficient's relative precision at `q`.
    pub fn limit_prec(&self, q: u32) -> Self {
        let mut s = self.clone();
        for x in &mut s.prec {
            *x = (*x).min(q);
        }
        s
    }

    /// Re-express on the finer lattice `p^shift` with `shift <= self.shift`.
    pub fn rebase(&self, shift: i64) -> Self {
        assert!(shift <= self.shift, "rebase can only refine the lattice");
        let d = self.shift - shift;
        if d == 0 {
            return self.clone();
        }
        let m = self.modulus();
        let f = if d >= self.cap as i64 { 0 } else { ppow(self.p, d as u32) };
        Series {
            p: self.p,
            cap: self.cap,
            shift,
            c: self.c.iter().map(|&x| mulmod(x, f, m)).collect(),
            prec: self.prec.iter().map(|&q| (q as i64 + d).min(self.cap as i64) as u32).collect(),
        }
    }

    /// Move to the coarsest lattice containing every coefficient, gaining
    /// the freed digits back as headroom only where they are known.
    pub fn normalised(&self) -> Self {
        let target = match self.min_val() {
            Some(v) => v,
            None => return self.clone(),
        };
        let d = target - self.shift;
        if d <= 0 {
            return self.clone();
        }
        let pd = ppow(self.p, d as u32);
        let mut c = Vec::with_capacity(self.len());
        let mut prec = Vec::with_capacity(self.len());
        for n in 0..self.len() {
            let q = self.prec[n] as i64 - d;
            if q <= 0 {
                c.push(0);
                prec.push(0);
            } else {
                c.push((self.c[n] / pd) % ppow(self.p, q as u32));
                prec.push(q as u32);
            }
        }
        Series { p: self.p, cap: self.cap, shift: target, c, prec }
    }

    fn align(&self, o: &Self) -> (Self, Self) {
        assert_eq!(self.p, o.p, "mixed primes");
        let cap = self.cap.min(o.cap);
        let n = self.len().min(o.len());
        let s = self.shift.min(o.shift);
        (
            self.with_cap(cap).truncate(n).rebase(s),
            o.with_cap(cap).truncate(n).rebase(s),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        let (mut a, b) = self.align(o);
        let m = a.modulus();
        for n in 0..a.len() {
            a.c[n] = addmod(a.c[n], b.c[n], m);
            a.prec[n] = a.prec[n].min(b.prec[n]);
        }
        a
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus();
        let mut s = self.clone();
        for x in &mut s.c {
            *x = negmod(*x, m);
        }
        s
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Product. Coefficient precision is the exact per-term error bound
    /// min_i min(prec_f[i] + v(g[n-i]), prec_g[n-i] + v(f[i])).
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.p, o.p, "mixed primes");
        let cap = self.cap.min(o.cap);
        let n = self.len().min(o.len());
        let f = self.with_cap(cap);
        let g = o.with_cap(cap);
        let m = ppow(self.p, cap);
        let vf: Vec<u32> = (0..n).map(|i| f.rel_val(i)).collect();
        let vg: Vec<u32> = (0..n).map(|i| g.rel_val(i)).collect();
        let mut c = vec![0u128; n];
        let mut prec = vec![cap; n];
        let fast = m <= u64::MAX as u128;
        for i in 0..n {
            let fi = f.c[i];
            let pfi = f.prec[i];
            let vfi = vf[i];
            for j in 0..(n - i) {
                let k = i + j;
                let bound = (pfi + vg[j]).min(g.prec[j] + vfi);
                if bound < prec[k] {
                    prec[k] = bound;
                }
                if fi != 0 && g.c[j] != 0 {
                    let t = if fast { (fi * g.c[j]) % m } else { mulmod(fi, g.c[j], m) };
                    c[k] = addmod(c[k], t, m);
                }
            }
        }
        Series { p: self.p, cap, shift: f.shift + g.shift, c, prec }
    }

    /// Multiply by a scalar; the lattice absorbs its valuation.
    pub fn scale(&self, x: &PadicScalar) -> Self {
        match x.valuation() {
            None => {
                let abs = x.abs_prec();
                if abs == i64::MAX {
                    let mut z = Self::zero(self.p, self.cap, self.len());
                    z.shift = self.shift;
                    return z;
                }
                // zero modulo p^abs: only the error term survives
                let mut z = Self::zero(self.p, self.cap, self.len());
                z.shift = self.shift + abs;
                for n in 0..self.len() {
                    z.prec[n] = self.rel_val(n).min(self.cap);
                }
                z
            }
            Some(v) => {
                let m = self.modulus();
                let u = x.unit() % m;
                let rel = x.rel_prec();
                let mut s = self.clone();
                s.shift += v;
                for n in 0..s.len() {
                    let vn = self.rel_val(n);
                    s.c[n] = mulmod(s.c[n], u, m);
                    s.prec[n] = s.prec[n].min(rel.saturating_add(vn)).min(self.cap);
                }
                s
            }
        }
    }

    /// Multiply by `p^e`.
    pub fn shift_by(&self, e: i64) -> Self {
        let mut s = self.clone();
        s.shift += e;
        s
    }

    /// Multiply by `X^d`, keeping the truncation length.
    pub fn mul_xpow(&self, d: usize) -> Self {
        let n = self.len();
        let mut s = Self::zero(self.p, self.cap, n);
        s.shift = self.shift;
        for i in 0..n.saturating_sub(d) {
            s.c[i + d] = self.c[i];
            s.prec[i + d] = self.prec[i];
        }
        s
    }

    /// Substitute `X -> (c - 1) + c X` for a principal unit `c` given as a
    /// residue mod `p^cap`. Precision of coefficient `m` also accounts for the
    /// unseen tail, assumed to lie on the same lattice.
    pub fn affine_subst(&self, c: u128) -> Self {
        let n = self.len();
        let m = self.modulus();
        let c = c % m;
        let cm1 = submod(c, 1 % m, m);
        let vc = if cm1 == 0 { self.cap } else { split_val(cm1, self.p).0 };
        assert!(vc >= 1, "substitution needs c ≡ 1 mod p");
        let mut r = vec![0u128; n];
        let mut rp = vec![self.cap; n];
        for i in (0..n).rev() {
            let mut nr = vec![0u128; n];
            let mut np = vec![self.cap; n];
            for k in 0..n {
                let mut v = mulmod(cm1, r[k], m);
                let mut q = rp[k].saturating_add(vc);
                if k > 0 {
                    v = addmod(v, mulmod(c, r[k - 1], m), m);
                    q = q.min(rp[k - 1]);
                }
                if k == 0 {
                    v = addmod(v, self.c[i], m);
                    q = q.min(self.prec[i]);
                }
                nr[k] = v;
                np[k] = q.min(self.cap);
            }
            r = nr;
            rp = np;
        }
        for (k, q) in rp.iter_mut().enumerate() {
            let tail = (n - k) as u64 * vc as u64;
            if (tail as u64) < *q as u64 {
                *q = tail as u32;
            }
        }
        Series { p: self.p, cap: self.cap, shift: self.shift, c: r, prec: rp }
    }

    /// Inverse of a series whose constant term is a unit times `p^shift`
    /// (the lattice is normalised first).
    pub fn inverse(&self) -> Result<Self> {
        let s = self.normalised();
        let n = s.len();
        if n == 0 {
            return Ok(s);
        }
        if s.val_at(0) != Some(s.shift) {
            return Err(IwaError::InvalidParameter(
                "constant term is not the dominant coefficient".into(),
            ));
        }
        let m = s.modulus();
        let inv0 = invmod(s.c[0], m).expect("unit");
        let mut b = vec![0u128; n];
        let mut bp = vec![s.cap; n];
        b[0] = inv0;
        bp[0] = s.prec[0];
        for k in 1..n {
            let mut acc = 0u128;
            let mut q = s.cap;
            for i in 1..=k {
                acc = addmod(acc, mulmod(s.c[i], b[k - i], m), m);
                q = q.min(s.prec[i]).min(bp[k - i]);
            }
            b[k] = mulmod(negmod(acc, m), inv0, m);
            bp[k] = q.min(s.prec[0]);
        }
        Ok(Series { p: s.p, cap: s.cap, shift: -s.shift, c: b, prec: bp })
    }

    /// Equality at shared precision over the shared length.
    pub fn agrees(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }

    /// Difference of two series, summarised: `None` if it vanishes to the
    /// shared precision, else the least valuation seen.
    pub fn deviation(&self, o: &Self) -> Option<i64> {
        self.sub(o).min_val()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_product() {
        let x = Series::monomial(5, 10, 8, 1);
        assert_eq!(x.mul(&x), Series::monomial(5, 10, 8, 2));
    }

    #[test]
    fn shifted_lattices_add() {
        let a = Series::from_ints(5, 6, -1, &[1, 2], 2);
        let b = Series::from_ints(5, 6, 0, &[3, 0], 2);
        let s = a.add(&b);
        assert_eq!(s.shift(), -1);
        assert_eq!(s.coeff(0).to_i128(), None);
        assert!(s.coeff(0).agrees(&PadicScalar::from_ratio(5, 16, 5, 6).unwrap()));
    }

    #[test]
    fn substitution_by_six() {
        let x = Series::monomial(5, 8, 4, 1);
        let t = x.affine_subst(6);
        assert_eq!(t.coeff(0).to_i128(), Some(5));
        assert_eq!(t.coeff(1).to_i128(), Some(6));
        assert!(t.coeff(2).is_zero());
    }

    #[test]
    fn inverse_of_one_minus_x() {
        let s = Series::from_ints(3, 5, 0, &[1, -1], 6);
        let inv = s.inverse().unwrap();
        for n in 0..6 {
            assert_eq!(inv.coeff(n).to_i128(), Some(1));
        }
    }

    #[test]
    fn product_precision_follows_error_terms() {
        // (1 + O(5^2) X) * (5^3) : coefficient 1 known to 5^5
        let mut a = Series::from_ints(5, 10, 0, &[1, 0], 2);
        a.prec[1] = 2;
        let b = Series::from_ints(5, 10, 0, &[125, 0], 2);
        let c = a.mul(&b);
        assert_eq!(c.precs()[1], 5);
    }
}
