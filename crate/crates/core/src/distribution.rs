//! Tempered distributions H_{E,r}(Γ): Iwasawa elements tagged with a claimed
//! growth order, ρ-norms, growth estimation and exact division.

use crate::error::{DivisibilityFailure, IwaError, Result};
use crate::iwasawa::{ESeries, IwasawaElement, Precision};
use crate::padic::{HalfVal, PadicScalar};
use crate::quad::Form;
use crate::series::Series;
use num_rational::Ratio;
use num_traits::Zero;

pub type Rational = Ratio<i64>;

#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub body: IwasawaElement,
    /// Claimed growth: O(log_p^order). Checked by [`growth_order`], never enforced.
    pub order: Rational,
}

impl Distribution {
    pub fn new(body: IwasawaElement, order: Rational) -> Self {
        Distribution { body, order }
    }

    pub fn bounded(body: IwasawaElement) -> Self {
        Distribution { body, order: Rational::zero() }
    }

    pub fn prec(&self) -> Precision {
        self.body.prec
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Ok(Distribution { body: self.body.mul(&o.body)?, order: self.order + o.order })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(Distribution { body: self.body.add(&o.body)?, order: self.order.max(o.order) })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        Ok(Distribution { body: self.body.sub(&o.body)?, order: self.order.max(o.order) })
    }

    pub fn twist(&self, n: i64) -> Self {
        Distribution { body: self.body.twist(n), order: self.order }
    }
}

/// Valuation of coefficient `n` of an E-series, in half-integers.
fn coeff_val(s: &ESeries, n: usize, form: Option<&Form>) -> Option<HalfVal> {
    let va = s.a.val_at(n).map(HalfVal::int);
    let vb = s.b.as_ref().and_then(|b| {
        let k = form.map_or(0, |f| f.k as i64);
        b.val_at(n).map(|v| HalfVal(2 * v + k + 1))
    });
    match (va, vb) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// Valuation form of ‖F‖_{ρ_m} with ρ_m = p^{-1/(p^{m-1}(p-1))}:
/// min over components and n of v(a_n) + n / (p^{m-1}(p-1)).
pub fn rho_norm(f: &IwasawaElement, m: u32) -> Result<Rational> {
    if m == 0 {
        return Err(IwaError::InvalidParameter("ρ-norm index starts at 1".into()));
    }
    let p = f.prec.p as i64;
    let d = p.pow(m - 1) * (p - 1);
    let mut best: Option<Rational> = None;
    for s in f.components() {
        for n in 0..s.len() {
            if let Some(v) = coeff_val(s, n, f.form.as_ref()) {
                let x = Rational::new(v.0 * d + 2 * n as i64, 2 * d);
                best = Some(best.map_or(x, |b| b.min(x)));
            }
        }
    }
    best.ok_or_else(|| IwaError::InvalidParameter("ρ-norm of zero".into()))
}

/// How the slope of m ↦ −ρ_m is read off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GrowthEstimator {
    /// Least squares over m = 1..depth.
    LeastSquares,
    /// (ν(depth) − ν(depth−2)) / 2: one full period of the plus/minus staircase.
    #[default]
    PeriodSecant,
}

/// Estimated growth order with the default estimator.
pub fn growth_order(f: &IwasawaElement, depth: u32) -> Result<f64> {
    growth_order_with(f, depth, GrowthEstimator::default())
}

pub fn growth_order_with(f: &IwasawaElement, depth: u32, est: GrowthEstimator) -> Result<f64> {
    if depth < 2 {
        return Err(IwaError::InvalidParameter("depth must be at least 2".into()));
    }
    let p = f.prec.p as u128;
    let need = p.pow(depth - 1);
    if (f.prec.x_prec as u128) < need {
        return Err(IwaError::InvalidParameter(format!(
            "x_prec {} too small for depth {depth} (needs {need})",
            f.prec.x_prec
        )));
    }
    let nu: Vec<f64> = (1..=depth)
        .map(|m| rho_norm(f, m).map(|r| -(*r.numer() as f64) / (*r.denom() as f64)))
        .collect::<Result<_>>()?;
    Ok(match est {
        GrowthEstimator::LeastSquares => {
            let k = nu.len() as f64;
            let mean_m = (1..=depth).map(|m| m as f64).sum::<f64>() / k;
            let mean_v = nu.iter().sum::<f64>() / k;
            let (mut num, mut den) = (0.0, 0.0);
            for (i, v) in nu.iter().enumerate() {
                let dm = (i + 1) as f64 - mean_m;
                num += dm * (v - mean_v);
                den += dm * dm;
            }
            num / den
        }
        GrowthEstimator::PeriodSecant => {
            let l = nu.len();
            (nu[l - 1] - nu[l - 3.min(l)]) / (if l >= 3 { 2.0 } else { 1.0 })
        }
    })
}

/// The −ρ_m profile for m = 1..depth.
pub fn rho_profile(f: &IwasawaElement, depth: u32) -> Result<Vec<Rational>> {
    (1..=depth).map(|m| rho_norm(f, m).map(|r| -r)).collect()
}

/// Precision actually reached by a division.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Attained {
    /// Least absolute p-adic precision over the quotient's coefficients.
    pub p_prec: i64,
    /// Number of quotient coefficients.
    pub x_prec: usize,
    /// Least absolute precision of the constant coefficients.
    pub head_prec: i64,
    /// Length of the initial run of coefficients known to at least one digit.
    pub reliable_x: usize,
}

impl Attained {
    pub fn of(body: &IwasawaElement) -> Self {
        let mut out = Attained { p_prec: i64::MAX, x_prec: body.prec.x_prec, head_prec: i64::MAX, reliable_x: usize::MAX };
        for c in body.components() {
            let parts = std::iter::once(&c.a).chain(c.b.as_ref());
            for s in parts {
                out.x_prec = out.x_prec.min(s.len());
                let precs: Vec<i64> = (0..s.len()).map(|n| s.coeff(n).abs_prec()).collect();
                out.p_prec = out.p_prec.min(precs.iter().copied().min().unwrap_or(i64::MAX));
                out.head_prec = out.head_prec.min(precs.first().copied().unwrap_or(i64::MAX));
                out.reliable_x = out.reliable_x.min(precs.iter().position(|&a| a < 1).unwrap_or(s.len()));
            }
        }
        out.reliable_x = out.reliable_x.min(out.x_prec);
        out
    }

    pub fn meet(self, o: Self) -> Self {
        Attained {
            p_prec: self.p_prec.min(o.p_prec),
            x_prec: self.x_prec.min(o.x_prec),
            head_prec: self.head_prec.min(o.head_prec),
            reliable_x: self.reliable_x.min(o.reliable_x),
        }
    }
}

/// Pack per-component quotients (`None` for a zero dividend) into one element.
pub(crate) fn assemble(
    prec: Precision,
    form: Option<Form>,
    comps: Vec<Option<ESeries>>,
) -> (IwasawaElement, Attained) {
    let n = comps.iter().flatten().map(|c| c.len()).min().unwrap_or(prec.x_prec);
    let prec = Precision { x_prec: n, ..prec };
    let mut body = IwasawaElement::zero(prec, form);
    for (i, c) in comps.into_iter().enumerate() {
        let c = match c {
            Some(c) => c.map(|s| s.truncate(n)),
            None => ESeries::zero(prec.p, prec.p_prec, n),
        };
        body.set_component(i as i64, c);
    }
    let att = Attained::of(&body);
    (body, att)
}

fn failure(tame: usize, degree: usize, val: String, reason: &str) -> IwaError {
    IwaError::Divisibility(DivisibilityFailure {
        row: None,
        tame,
        degree,
        valuation: val,
        reason: reason.into(),
    })
}

/// Divide one Q_p series by another by back-substitution from the lowest
/// nonzero coefficient of `g`. With `floor = Some(v)`, a quotient coefficient
/// known to have valuation below `v` is a divisibility failure.
pub fn divide_series(
    f: &Series,
    g: &Series,
    floor: Option<i64>,
    tame: usize,
) -> Result<Series> {
    let p = f.p();
    let cap = f.cap().max(g.cap());
    let n = f.len().min(g.len());
    let d = match g.order() {
        Some(d) if d < n => d,
        _ => {
            if f.truncate(n).is_zero() {
                return Ok(Series::zero(p, cap, n));
            }
            return Err(IwaError::DivisionByZero);
        }
    };
    for i in 0..d {
        if let Some(v) = f.val_at(i) {
            return Err(failure(tame, i, v.to_string(), "dividend nonzero below divisor order"));
        }
    }
    let gc: Vec<PadicScalar> = (0..n).map(|i| g.coeff(i)).collect();
    let lead_inv = gc[d].inv()?;
    let mut q: Vec<PadicScalar> = Vec::with_capacity(n - d);
    for k in 0..(n - d) {
        let mut acc = f.coeff(k + d);
        for (i, qi) in q.iter().enumerate() {
            let gi = &gc[d + k - i];
            if gi.is_exact_zero() || qi.is_exact_zero() {
                continue;
            }
            acc = acc.sub(&qi.mul(gi));
        }
        let mut qk = acc.mul(&lead_inv);
        if let Some(fl) = floor {
            match qk.valuation() {
                Some(v) if v < fl => {
                    return Err(failure(tame, k, v.to_string(), "quotient leaves the coefficient ring"));
                }
                // known only below the floor: the floor is the better bound
                None if qk.abs_prec() < fl => qk = PadicScalar::zero_mod(p, fl),
                _ => {}
            }
        }
        q.push(qk);
    }
    Ok(Series::from_scalars(p, cap, &q))
}

/// Divide by a distinguished polynomial `g` of degree `d` (leading
/// coefficient a unit, lower coefficients in pO).
///
/// Bottom-up back-substitution loses about one digit per root valuation per
/// degree, so with a floor the quotient is also computed top-down from the
/// Weierstrass relation Q_n = F_{n+d} − Σ Q_{n+s}A_{d−s}, where the unseen
/// Q_i (i ≥ N − d) are only known to lie above the floor. Each coefficient
/// keeps the more precise of the two values; the two must agree, and the
/// remainder below degree d must vanish.
pub fn divide_distinguished(
    f: &Series,
    g: &Series,
    d: usize,
    floor: Option<i64>,
    tame: usize,
) -> Result<Series> {
    let bu = divide_series(f, g, floor, tame)?;
    let Some(fl) = floor else { return Ok(bu) };
    let p = f.p();
    let n = f.len().min(g.len());
    if d == 0 || d >= n {
        return Ok(bu);
    }
    let lc_inv = g.coeff(d).inv()?;
    let a: Vec<PadicScalar> = (0..d).map(|t| g.coeff(t).mul(&lc_inv)).collect();
    if a.iter().any(|x| x.val_floor() < 1) {
        return Ok(bu);
    }
    // Q = lc·q on indices 0..n, unseen tail above the floor.
    let top = n - d;
    let mut q: Vec<PadicScalar> = vec![PadicScalar::zero_mod(p, fl); n];
    for i in (0..top).rev() {
        let mut acc = f.coeff(i + d);
        for s in 0..d {
            let qi = &q[i + d - s];
            if a[s].is_exact_zero() {
                continue;
            }
            acc = acc.sub(&qi.mul(&a[s]));
        }
        q[i] = if acc.valuation().is_none() && acc.abs_prec() < fl { PadicScalar::zero_mod(p, fl) } else { acc };
    }
    for r in 0..d {
        let mut acc = f.coeff(r);
        for i in 0..=r {
            acc = acc.sub(&q[i].mul(&a[r - i]));
        }
        if let Some(v) = acc.valuation() {
            return Err(failure(tame, r, v.to_string(), "nonzero remainder modulo a distinguished factor"));
        }
    }
    let mut out: Vec<PadicScalar> = (0..bu.len()).map(|i| bu.coeff(i)).collect();
    for i in 0..top.min(out.len()) {
        let td = q[i].mul(&lc_inv);
        if !td.agrees(&out[i]) {
            let v = td.sub(&out[i]).valuation().unwrap_or(0);
            return Err(failure(tame, i, v.to_string(), "top-down and bottom-up quotients disagree"));
        }
        if td.abs_prec() > out[i].abs_prec() {
            out[i] = td;
        }
    }
    Ok(Series::from_scalars(p, f.cap().max(bu.cap()), &out))
}

/// Divide two E-series; a divisor with an α-part is first made rational by
/// multiplying through by its conjugate. The α-part of the quotient has its
/// floor lowered by v(α) = (k+1)/2.
pub fn divide_eseries(
    f: &ESeries,
    g: &ESeries,
    form: Option<&Form>,
    floor: Option<i64>,
    tame: usize,
) -> Result<ESeries> {
    let (f, g) = match &g.b {
        Some(b) if !b.is_zero() => {
            let conj = ESeries { a: g.a.clone(), b: Some(b.neg()) };
            (f.mul(&conj, form), g.mul(&conj, form))
        }
        _ => (f.clone(), g.clone()),
    };
    let b_floor = floor.map(|v| v - form.map_or(0, |fm| (fm.k as i64 + 1) / 2));
    let qa = divide_series(&f.a, &g.a, floor, tame)?;
    let qb = f.b.as_ref().map(|b| divide_series(b, &g.a, b_floor, tame)).transpose()?;
    let n = qa.len().min(qb.as_ref().map_or(usize::MAX, |b| b.len()));
    Ok(ESeries { a: qa.truncate(n), b: qb.map(|b| b.truncate(n)) })
}

/// F / G tame component by tame component.
pub fn divide_exact(f: &Distribution, g: &Distribution) -> Result<(Distribution, Attained)> {
    divide_with_floor(f, g, None)
}

/// As [`divide_exact`], additionally requiring the quotient to have
/// valuation at least `floor` wherever its coefficients are known.
pub fn divide_with_floor(
    f: &Distribution,
    g: &Distribution,
    floor: Option<i64>,
) -> Result<(Distribution, Attained)> {
    let form = f.body.form.or(g.body.form);
    let p = f.prec().p;
    let mut comps = Vec::with_capacity((p - 1) as usize);
    for (i, (fc, gc)) in f.body.components().iter().zip(g.body.components()).enumerate() {
        if fc.is_zero() {
            comps.push(None);
        } else {
            comps.push(Some(divide_eseries(fc, gc, form.as_ref(), floor, i)?));
        }
    }
    let prec = Precision { p, p_prec: f.prec().p_prec.min(g.prec().p_prec), x_prec: f.prec().x_prec };
    let (body, att) = assemble(prec, form, comps);
    let order = (f.order - g.order).max(Rational::zero());
    Ok((Distribution::new(body, order), att))
}
