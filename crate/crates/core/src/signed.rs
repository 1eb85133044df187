//! Signed factorisation: the passage between the four unbounded coordinates
//! L_{λ,μ} and the four bounded signed components through the matrix M and
//! division by Pollack logarithms. Also a rank-2 mock global module standing
//! in for Iwasawa cohomology, with rank reduction, signed Coleman maps and
//! doubly signed pairings.

use crate::dieudonne::{change_of_basis, Mat};
use crate::distribution::{Attained, Distribution, Rational};
use crate::error::{IwaError, Result};
use crate::iwasawa::{IwasawaElement, Precision};
use crate::logs::{divide_by_log, pollack_log, LogKind};
use crate::quad::{Form, QuadExtScalar};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
    Dot,
    Circ,
}

impl Sign {
    pub const ALL: [Sign; 4] = [Sign::Plus, Sign::Minus, Sign::Dot, Sign::Circ];

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
            Sign::Dot => "•",
            Sign::Circ => "∘",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl std::str::FromStr for Sign {
    type Err = IwaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            "dot" | "•" | "bullet" => Ok(Sign::Dot),
            "circ" | "∘" => Ok(Sign::Circ),
            _ => Err(IwaError::InvalidParameter(format!("unknown sign {s:?}"))),
        }
    }
}

/// Which signed component each row of M·(L_{α,α}, L_{−α,−α}, L_{α,−α}, L_{−α,α})
/// carries. The two presets differ by swapping the first two rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase")]
pub enum Convention {
    /// Rows (log^{+,(1)}_{2k+2}, log^{−,(1)}_{2k+2}, log^{(1)}_{k+1}, log^{(1)}_{k+1}).
    #[default]
    TheoremA,
    /// Rows (log^{−}_{2k+2}, log^{+}_{2k+2}, log_{k+1}, log_{k+1}).
    LemmaFactorisation,
}

impl Convention {
    pub fn rows(self) -> [Sign; 4] {
        match self {
            Convention::TheoremA => [Sign::Plus, Sign::Minus, Sign::Dot, Sign::Circ],
            Convention::LemmaFactorisation => [Sign::Minus, Sign::Plus, Sign::Dot, Sign::Circ],
        }
    }

    pub fn row_of(self, s: Sign) -> usize {
        self.rows().iter().position(|&x| x == s).expect("every sign has a row")
    }
}

impl std::str::FromStr for Convention {
    type Err = IwaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theoremA" | "theorem-a" => Ok(Convention::TheoremA),
            "lemmaFactorisation" | "lemma-factorisation" | "lemmaFactorization" => {
                Ok(Convention::LemmaFactorisation)
            }
            _ => Err(IwaError::InvalidParameter(format!("unknown convention {s:?}"))),
        }
    }
}

/// The logarithms dividing each signed row, all shifted to start at j = 1.
#[derive(Clone, Debug)]
pub struct SignedLogs {
    pub k: u32,
    pub plus: Distribution,
    pub minus: Distribution,
    pub full: Distribution,
    pub specs: [LogKind; 3],
}

impl SignedLogs {
    /// log^{±,(1)}_{2k+2} and log^{(1)}_{k+1}: the divisibility of the
    /// signed factorisation.
    pub fn strong(k: u32, prec: Precision) -> Result<Self> {
        Self::build(k, 2 * k + 2, prec)
    }

    /// log^{±,(1)}_{k+1} in the first two rows: the divisibility available
    /// from the interpolation property alone.
    pub fn weak(k: u32, prec: Precision) -> Result<Self> {
        Self::build(k, k + 1, prec)
    }

    fn build(k: u32, half_r: u32, prec: Precision) -> Result<Self> {
        let specs = [LogKind::plus(half_r, 1), LogKind::minus(half_r, 1), LogKind::full(k + 1, 1)];
        Ok(SignedLogs {
            k,
            plus: pollack_log(specs[0], prec)?,
            minus: pollack_log(specs[1], prec)?,
            full: pollack_log(specs[2], prec)?,
            specs,
        })
    }

    pub fn spec(&self, s: Sign) -> LogKind {
        match s {
            Sign::Plus => self.specs[0],
            Sign::Minus => self.specs[1],
            Sign::Dot | Sign::Circ => self.specs[2],
        }
    }

    /// F / log^♣ with an integral quotient.
    pub fn divide(&self, f: &Distribution, s: Sign) -> Result<(IwasawaElement, Attained)> {
        divide_by_log(f, self.spec(s), Some(0)).map(|(d, a)| (d.body, a))
    }

    pub fn get(&self, s: Sign) -> &Distribution {
        match s {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
            Sign::Dot | Sign::Circ => &self.full,
        }
    }

    pub fn prec(&self) -> Precision {
        self.full.prec()
    }
}

/// Coordinates (L_{α,α}, L_{−α,−α}, L_{α,−α}, L_{−α,α}) in the v_λ⊗v_μ basis.
#[derive(Clone, Debug, PartialEq)]
pub struct UnboundedQuadruple {
    pub l_aa: Distribution,
    pub l_mm: Distribution,
    pub l_am: Distribution,
    pub l_ma: Distribution,
}

impl UnboundedQuadruple {
    pub fn to_array(&self) -> [&Distribution; 4] {
        [&self.l_aa, &self.l_mm, &self.l_am, &self.l_ma]
    }

    pub fn from_array(a: [Distribution; 4]) -> Self {
        let [l_aa, l_mm, l_am, l_ma] = a;
        UnboundedQuadruple { l_aa, l_mm, l_am, l_ma }
    }
}

/// Bounded signed components (BF⁺, BF⁻, BF^•, BF^∘).
#[derive(Clone, Debug, PartialEq)]
pub struct SignedQuadruple {
    pub plus: IwasawaElement,
    pub minus: IwasawaElement,
    pub dot: IwasawaElement,
    pub circ: IwasawaElement,
}

impl SignedQuadruple {
    pub fn get(&self, s: Sign) -> &IwasawaElement {
        match s {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
            Sign::Dot => &self.dot,
            Sign::Circ => &self.circ,
        }
    }

    fn from_fn(mut f: impl FnMut(Sign) -> IwasawaElement) -> Self {
        SignedQuadruple { plus: f(Sign::Plus), minus: f(Sign::Minus), dot: f(Sign::Dot), circ: f(Sign::Circ) }
    }

    pub fn zero(prec: Precision, form: Option<Form>) -> Self {
        Self::from_fn(|_| IwasawaElement::zero(prec, form))
    }

    pub fn random_integral<R: rand::Rng + ?Sized>(prec: Precision, form: Option<Form>, rng: &mut R) -> Self {
        Self::from_fn(|_| IwasawaElement::random_integral(prec, form, rng))
    }

    /// Componentwise agreement at shared precision.
    pub fn agrees(&self, o: &Self) -> bool {
        Sign::ALL.iter().all(|&s| self.get(s).agrees(o.get(s)))
    }
}

/// Working relative precision for the entries of M.
fn m_rel(prec: Precision) -> u32 {
    prec.p_prec + 4
}

fn apply_matrix(m: &Mat, v: [&Distribution; 4], order: Rational) -> Result<[Distribution; 4]> {
    let mut out = Vec::with_capacity(4);
    for row in &m.rows {
        let mut acc = v[0].body.scale(&row[0]);
        for (x, c) in v.iter().zip(row).skip(1) {
            if !c.is_exact_zero() {
                acc = acc.add(&x.body.scale(c))?;
            }
        }
        out.push(Distribution::new(acc, order));
    }
    Ok(out.try_into().expect("four rows"))
}

/// M·L: the four log-scaled rows.
pub fn rows_of(q: &UnboundedQuadruple, form: Form) -> Result<[Distribution; 4]> {
    let prec = q.l_aa.prec();
    let (m, _) = change_of_basis(form, m_rel(prec))?;
    let order = q.to_array().iter().map(|d| d.order).max().unwrap_or_default();
    apply_matrix(&m, q.to_array(), order)
}

/// M⁻¹·R: coordinates from rows.
pub fn coords_of(rows: [&Distribution; 4], form: Form) -> Result<UnboundedQuadruple> {
    let prec = rows[0].prec();
    let (_, inv) = change_of_basis(form, m_rel(prec))?;
    let order = rows.iter().map(|d| d.order).max().unwrap_or_default();
    Ok(UnboundedQuadruple::from_array(apply_matrix(&inv, rows, order)?))
}

/// Outcome of one row of the factorisation.
#[derive(Clone, Debug)]
pub struct RowOutcome {
    /// 1-based row index.
    pub row: usize,
    pub sign: Sign,
    pub result: Result<(IwasawaElement, Attained)>,
}

/// Divide every row by its logarithm, reporting each row separately. The
/// rows are independent and run in parallel.
pub fn factor_rows(
    q: &UnboundedQuadruple,
    logs: &SignedLogs,
    form: Form,
    conv: Convention,
) -> Result<Vec<RowOutcome>> {
    let rows = rows_of(q, form)?;
    let signs = conv.rows();
    Ok((0..4)
        .into_par_iter()
        .map(|i| {
            let result = logs
                .divide(&rows[i], signs[i])
                .map_err(|e| match e {
                    IwaError::Divisibility(mut f) => {
                        f.row = Some(i + 1);
                        IwaError::Divisibility(f)
                    }
                    e => e,
                });
            RowOutcome { row: i + 1, sign: signs[i], result }
        })
        .collect())
}

/// Bounded quadruple together with the least precision reached.
#[derive(Clone, Debug)]
pub struct Factored {
    pub quad: SignedQuadruple,
    pub attained: Attained,
}

/// Apply M and divide row-wise by the signed logarithms. Fails on the first
/// row (in row order) that is not divisible with an integral quotient.
pub fn factor_signed(
    q: &UnboundedQuadruple,
    logs: &SignedLogs,
    form: Form,
    conv: Convention,
) -> Result<Factored> {
    let outcomes = factor_rows(q, logs, form, conv)?;
    let mut parts: Vec<Option<IwasawaElement>> = vec![None; 4];
    let mut att: Option<Attained> = None;
    for o in outcomes {
        let (el, a) = o.result?;
        att = Some(att.map_or(a, |x| x.meet(a)));
        parts[o.row - 1] = Some(el);
    }
    let att = att.expect("four rows");
    let quad = SignedQuadruple::from_fn(|s| parts[conv.row_of(s)].take().expect("all rows present"));
    Ok(Factored { quad, attained: att })
}

/// Inverse of [`factor_signed`]: multiply each signed component by its
/// logarithm and apply M⁻¹.
pub fn synthesize(
    s: &SignedQuadruple,
    logs: &SignedLogs,
    form: Form,
    conv: Convention,
) -> Result<UnboundedQuadruple> {
    let order = Rational::from(logs.k as i64 + 1);
    let rows = conv
        .rows()
        .map(|sg| logs.get(sg).body.mul(s.get(sg)).map(|b| Distribution::new(b, order)));
    let [a, b, c, d] = rows;
    let rows = [a?, b?, c?, d?];
    coords_of([&rows[0], &rows[1], &rows[2], &rows[3]], form)
}

/// Local Perrin-Riou coordinates in the (∘, •, +, −) basis, normalised so
/// that the row vector of [`rows_of`] lists them in convention order.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalVector {
    pub circ: Distribution,
    pub dot: Distribution,
    pub plus: Distribution,
    pub minus: Distribution,
}

impl LocalVector {
    pub fn get(&self, s: Sign) -> &Distribution {
        match s {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
            Sign::Dot => &self.dot,
            Sign::Circ => &self.circ,
        }
    }

    pub fn zero(prec: Precision, form: Option<Form>) -> Self {
        let z = || Distribution::bounded(IwasawaElement::zero(prec, form));
        LocalVector { circ: z(), dot: z(), plus: z(), minus: z() }
    }

    fn zip(&self, o: &Self, f: impl Fn(&Distribution, &Distribution) -> Result<Distribution>) -> Result<Self> {
        Ok(LocalVector {
            circ: f(&self.circ, &o.circ)?,
            dot: f(&self.dot, &o.dot)?,
            plus: f(&self.plus, &o.plus)?,
            minus: f(&self.minus, &o.minus)?,
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn mul_scalar(&self, c: &Distribution) -> Result<Self> {
        self.zip(self, |a, _| c.mul(a))
    }

    /// (L_{λ,μ}) coordinates: M⁻¹ applied to the entries in row order.
    pub fn coords(&self, form: Form, conv: Convention) -> Result<UnboundedQuadruple> {
        let r = conv.rows().map(|s| self.get(s));
        coords_of(r, form)
    }
}

/// Col^♣ = L_♣ / log^♣ for ♣ ∈ {+, −, •}.
pub fn coleman_extract(local: &LocalVector, sign: Sign, logs: &SignedLogs) -> Result<(IwasawaElement, Attained)> {
    if sign == Sign::Circ {
        return Err(IwaError::InvalidParameter("no signed Coleman map on the ∘ component".into()));
    }
    logs.divide(local.get(sign), sign)
}

/// Element c₁Y₁ + c₂Y₂ of the mock rank-2 module.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleElement {
    pub c1: Distribution,
    pub c2: Distribution,
}

impl ModuleElement {
    pub fn neg(&self) -> Self {
        ModuleElement {
            c1: Distribution::new(self.c1.body.neg(), self.c1.order),
            c2: Distribution::new(self.c2.body.neg(), self.c2.order),
        }
    }
}

/// Which (λ, μ) ∈ {±α}².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pair {
    AlphaAlpha,
    MinusMinus,
    AlphaMinus,
    MinusAlpha,
}

impl Pair {
    pub const ALL: [Pair; 4] = [Pair::AlphaAlpha, Pair::MinusMinus, Pair::AlphaMinus, Pair::MinusAlpha];

    fn pick<'a>(self, q: &'a UnboundedQuadruple) -> &'a Distribution {
        match self {
            Pair::AlphaAlpha => &q.l_aa,
            Pair::MinusMinus => &q.l_mm,
            Pair::AlphaMinus => &q.l_am,
            Pair::MinusAlpha => &q.l_ma,
        }
    }
}

/// Free rank-2 module with basis (Y₁, Y₂) whose local image at p is built
/// from bounded seeds: Y_i ↦ (log·b_∘, log·b_•, log⁺·b_+, log⁻·b_−).
#[derive(Clone, Debug)]
pub struct MockGlobalModule {
    pub form: Form,
    pub conv: Convention,
    pub logs: SignedLogs,
    pub seeds: [SignedQuadruple; 2],
}

impl MockGlobalModule {
    pub fn new(form: Form, conv: Convention, logs: SignedLogs, seeds: [SignedQuadruple; 2]) -> Self {
        MockGlobalModule { form, conv, logs, seeds }
    }

    pub fn random<R: rand::Rng + ?Sized>(
        form: Form,
        conv: Convention,
        logs: SignedLogs,
        rng: &mut R,
    ) -> Self {
        let prec = logs.prec();
        let seeds = [
            SignedQuadruple::random_integral(prec, Some(form), rng),
            SignedQuadruple::random_integral(prec, Some(form), rng),
        ];
        Self::new(form, conv, logs, seeds)
    }

    /// Local image of a basis vector (i = 0 for Y₁, 1 for Y₂).
    pub fn basis_image(&self, i: usize) -> Result<LocalVector> {
        let b = &self.seeds[i];
        let ord = Rational::from(self.logs.k as i64 + 1);
        let f = |s: Sign| -> Result<Distribution> {
            Ok(Distribution::new(self.logs.get(s).body.mul(b.get(s))?, ord))
        };
        Ok(LocalVector { circ: f(Sign::Circ)?, dot: f(Sign::Dot)?, plus: f(Sign::Plus)?, minus: f(Sign::Minus)? })
    }

    /// res_p of c₁Y₁ + c₂Y₂; linear by construction.
    pub fn local_image(&self, z: &ModuleElement) -> Result<LocalVector> {
        self.basis_image(0)?.mul_scalar(&z.c1)?.add(&self.basis_image(1)?.mul_scalar(&z.c2)?)
    }

    /// pr_{λ,μ}(Y₁∧Y₂) = L_{λ,μ}(Y₁)·Y₂ − L_{λ,μ}(Y₂)·Y₁.
    pub fn pr_rank_reduce(&self, pair: Pair) -> Result<ModuleElement> {
        let l1 = self.basis_image(0)?.coords(self.form, self.conv)?;
        let l2 = self.basis_image(1)?.coords(self.form, self.conv)?;
        let a = pair.pick(&l2);
        Ok(ModuleElement { c1: Distribution::new(a.body.neg(), a.order), c2: pair.pick(&l1).clone() })
    }

    /// The Y₁- and Y₂-coordinates of (pr_{α,α}, pr_{−α,−α}, pr_{α,−α}, pr_{−α,α}).
    pub fn pr_quadruples(&self) -> Result<(UnboundedQuadruple, UnboundedQuadruple)> {
        let prs: Vec<ModuleElement> = Pair::ALL.iter().map(|&p| self.pr_rank_reduce(p)).collect::<Result<_>>()?;
        let pick = |f: fn(&ModuleElement) -> &Distribution| {
            UnboundedQuadruple::from_array([f(&prs[0]).clone(), f(&prs[1]).clone(), f(&prs[2]).clone(), f(&prs[3]).clone()])
        };
        Ok((pick(|m| &m.c1), pick(|m| &m.c2)))
    }

    /// Signed classes BF^♣ = (row of M·pr) / log^♣, as module elements.
    pub fn signed_classes(&self) -> Result<[ModuleElement; 4]> {
        let (q1, q2) = self.pr_quadruples()?;
        let f1 = factor_signed(&q1, &self.logs, self.form, self.conv)?;
        let f2 = factor_signed(&q2, &self.logs, self.form, self.conv)?;
        Ok(Sign::ALL.map(|s| ModuleElement {
            c1: Distribution::bounded(f1.quad.get(s).clone()),
            c2: Distribution::bounded(f2.quad.get(s).clone()),
        }))
    }
}

fn check_pair(club: Sign, spade: Sign) -> Result<()> {
    if club == spade || club == Sign::Circ || spade == Sign::Circ {
        return Err(IwaError::InvalidParameter(format!("sign pair ({club},{spade}) not admissible")));
    }
    Ok(())
}

fn pair_from(g: &MockGlobalModule, bf: &[ModuleElement; 4], club: Sign, spade: Sign) -> Result<IwasawaElement> {
    check_pair(club, spade)?;
    let idx = Sign::ALL.iter().position(|&s| s == spade).expect("sign listed");
    let local = g.local_image(&bf[idx])?;
    coleman_extract(&local, club, &g.logs).map(|x| x.0)
}

/// Col^♣(res_p BF^♠) for an ordered pair of distinct signs from {+, −, •}.
pub fn doubly_signed_pair(g: &MockGlobalModule, club: Sign, spade: Sign) -> Result<IwasawaElement> {
    check_pair(club, spade)?;
    pair_from(g, &g.signed_classes()?, club, spade)
}

/// All six ordered pairs from {+, −, •}, sharing one factorisation.
pub fn doubly_signed_table(g: &MockGlobalModule) -> Result<Vec<(Sign, Sign, IwasawaElement)>> {
    let bf = g.signed_classes()?;
    let signs = [Sign::Plus, Sign::Minus, Sign::Dot];
    let mut out = Vec::with_capacity(6);
    for a in signs {
        for b in signs {
            if a != b {
                out.push((a, b, pair_from(g, &bf, a, b)?));
            }
        }
    }
    Ok(out)
}

/// L_{α,α} rebuilt from the signed Coleman maps:
/// (log⁻/4)Col⁻ + (log⁺/4α²)Col⁺ + (log/4α)Col^• in the lemma ordering.
/// The ∘ row has weight zero in L_{α,α}, so no ∘ term is needed.
pub fn combination_alpha_alpha(local: &LocalVector, logs: &SignedLogs, form: Form, conv: Convention) -> Result<IwasawaElement> {
    let rel = m_rel(logs.prec());
    let (_, inv) = change_of_basis(form, rel)?;
    // Row 0 of M⁻¹ gives the coefficient of each row in L_{α,α}.
    let mut acc: Option<IwasawaElement> = None;
    for (i, s) in conv.rows().iter().enumerate() {
        if *s == Sign::Circ {
            continue;
        }
        let (col, _) = coleman_extract(local, *s, logs)?;
        let term = logs.get(*s).body.mul(&col)?.scale(&inv.rows[0][i]);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    Ok(acc.expect("three signs"))
}

/// The coefficient of row i in L_{α,α}, for display: 1/4, 1/(4α²), 1/(4α), 0.
pub fn alpha_alpha_row_weights(form: Form, rel: u32) -> Result<[QuadExtScalar; 4]> {
    let (_, inv) = change_of_basis(form, rel)?;
    Ok([inv.rows[0][0], inv.rows[0][1], inv.rows[0][2], inv.rows[0][3]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(k: u32) -> (Form, Precision, SignedLogs) {
        let form = Form::new(5, k, 1).unwrap();
        let prec = Precision::new(5, 12, 24).unwrap();
        (form, prec, SignedLogs::strong(k, prec).unwrap())
    }

    #[test]
    fn round_trip_small() {
        let (form, prec, logs) = setup(0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for conv in [Convention::TheoremA, Convention::LemmaFactorisation] {
            let s = SignedQuadruple::random_integral(prec, Some(form), &mut rng);
            let q = synthesize(&s, &logs, form, conv).unwrap();
            let f = factor_signed(&q, &logs, form, conv).unwrap();
            assert!(f.quad.agrees(&s));
            assert!(f.attained.head_prec >= prec.p_prec as i64 - 6 && f.attained.reliable_x >= prec.x_prec / 2, "{:?}", f.attained);
        }
    }

    #[test]
    fn zero_quadruple() {
        let (form, prec, logs) = setup(1);
        let s = SignedQuadruple::zero(prec, Some(form));
        let q = synthesize(&s, &logs, form, Convention::TheoremA).unwrap();
        assert!(q.l_aa.body.is_zero() && q.l_ma.body.is_zero());
        let f = factor_signed(&q, &logs, form, Convention::TheoremA).unwrap();
        assert!(f.quad.plus.is_zero() && f.quad.circ.is_zero());
    }

    #[test]
    fn symmetric_input_kills_circ() {
        let (form, prec, logs) = setup(0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = SignedQuadruple::random_integral(prec, Some(form), &mut rng);
        s.circ = IwasawaElement::zero(prec, Some(form));
        let mut q = synthesize(&s, &logs, form, Convention::TheoremA).unwrap();
        q.l_ma = q.l_am.clone();
        let rows = rows_of(&q, form).unwrap();
        assert!(rows[3].body.is_zero());
        let f = factor_signed(&q, &logs, form, Convention::TheoremA).unwrap();
        assert!(f.quad.circ.is_zero());
    }

    #[test]
    fn dot_only_synthesis() {
        let (form, prec, logs) = setup(0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = SignedQuadruple::zero(prec, Some(form));
        s.dot = IwasawaElement::random_integral(prec, None, &mut rng);
        let q = synthesize(&s, &logs, form, Convention::TheoremA).unwrap();
        assert!(q.l_am.body.is_zero() && q.l_ma.body.is_zero());
        assert!(q.l_aa.body.add(&q.l_mm.body).unwrap().is_zero());
        let four_alpha = QuadExtScalar::alpha(form, 16).scale(&crate::PadicScalar::from_int(5, 4, 16));
        let want = logs.full.body.mul(&s.dot).unwrap().scale(&four_alpha.inv().unwrap());
        assert!(q.l_aa.body.agrees(&want));
    }

    #[test]
    fn circ_has_no_coleman_map() {
        let (form, prec, logs) = setup(0);
        let z = LocalVector::zero(prec, Some(form));
        assert!(coleman_extract(&z, Sign::Circ, &logs).is_err());
        assert!(coleman_extract(&z, Sign::Plus, &logs).unwrap().0.is_zero());
    }

    #[test]
    fn pr_rows_divisible_and_antisymmetric() {
        let (form, _, logs) = setup(0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = MockGlobalModule::random(form, Convention::LemmaFactorisation, logs, &mut rng);
        let (q1, q2) = g.pr_quadruples().unwrap();
        assert!(factor_signed(&q1, &g.logs, form, g.conv).is_ok());
        assert!(factor_signed(&q2, &g.logs, form, g.conv).is_ok());
        let mut swapped = g.clone();
        swapped.seeds.swap(0, 1);
        let a = g.pr_rank_reduce(Pair::AlphaMinus).unwrap();
        let b = swapped.pr_rank_reduce(Pair::AlphaMinus).unwrap().neg();
        assert!(a.c1.body.agrees(&b.c2.body) && a.c2.body.agrees(&b.c1.body));
    }

    #[test]
    fn sign_swap_negates() {
        let (form, _, logs) = setup(0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = MockGlobalModule::random(form, Convention::LemmaFactorisation, logs, &mut rng);
        let t = doubly_signed_table(&g).unwrap();
        for (a, b, x) in &t {
            let (_, _, y) = t.iter().find(|(c, d, _)| c == b && d == a).unwrap();
            let s = x.add(y).unwrap();
            assert!(s.is_zero() && !x.is_zero());
            assert!(Attained::of(&s).head_prec > 0);
        }
    }

    #[test]
    fn symmetric_mock_has_no_circ_class() {
        let (form, prec, logs) = setup(0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut g = MockGlobalModule::random(form, Convention::TheoremA, logs, &mut rng);
        for s in &mut g.seeds {
            s.circ = IwasawaElement::zero(prec, Some(form));
        }
        let bf = g.signed_classes().unwrap();
        assert!(bf[3].c1.body.is_zero() && bf[3].c2.body.is_zero());
        assert!(!bf[0].c1.body.is_zero());
    }

    #[test]
    fn combination_identity_on_signed_classes() {
        let (form, _, logs) = setup(1);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = MockGlobalModule::random(form, Convention::LemmaFactorisation, logs, &mut rng);
        for z in g.signed_classes().unwrap() {
            let local = g.local_image(&z).unwrap();
            let direct = local.coords(form, g.conv).unwrap().l_aa;
            let comb = combination_alpha_alpha(&local, &g.logs, form, g.conv).unwrap();
            assert!(comb.agrees(&direct.body));
        }
    }
}
