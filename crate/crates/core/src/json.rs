//! Versioned JSON documents ("schema": "iwa/1"). Input documents reject
//! unknown fields.

use crate::distribution::{Attained, Distribution, Rational};
use crate::error::{IwaError, Result};
use crate::iwasawa::{u_of, ESeries, IwasawaElement, Precision};
use crate::padic::{HalfVal, PadicScalar};
use crate::quad::Form;
use crate::series::Series;
use crate::signed::{Convention, SignedQuadruple, UnboundedQuadruple};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "iwa/1";

fn bad(msg: impl Into<String>) -> IwaError {
    IwaError::InvalidParameter(msg.into())
}

/// A coefficient: its Q_p part, and the α-coordinate in `b_part` when the
/// series has one. `val` is "inf" for zero; `abs` then gives the precision
/// (absent for exact zero).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarJson {
    pub val: String,
    pub unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_part: Option<Box<ScalarJson>>,
}

impl ScalarJson {
    pub fn from_scalar(x: &PadicScalar) -> Self {
        match x.valuation() {
            Some(v) => ScalarJson {
                val: HalfVal::int(v).to_string(),
                unit: x.unit().to_string(),
                rel: Some(x.rel_prec()),
                abs: None,
                b_part: None,
            },
            None => ScalarJson {
                val: "inf".into(),
                unit: "0".into(),
                rel: None,
                abs: (!x.is_exact_zero()).then(|| x.abs_prec()),
                b_part: None,
            },
        }
    }

    pub fn to_scalar(&self, p: u64) -> Result<PadicScalar> {
        if self.val == "inf" {
            if self.unit != "0" || self.rel.is_some() {
                return Err(bad("a zero scalar carries unit \"0\" and no rel"));
            }
            return Ok(match self.abs {
                Some(a) => PadicScalar::zero_mod(p, a),
                None => PadicScalar::exact_zero(p),
            });
        }
        let v = HalfVal::parse(&self.val).filter(|h| h.0 % 2 == 0).ok_or_else(|| bad(format!("bad valuation {:?}", self.val)))?;
        let unit: u128 = self.unit.parse().map_err(|_| bad(format!("bad unit {:?}", self.unit)))?;
        let rel = self.rel.ok_or_else(|| bad("a nonzero scalar needs rel"))?;
        if unit % p as u128 == 0 || self.abs.is_some() {
            return Err(bad("unit must be prime to p"));
        }
        Ok(PadicScalar::new(p, v.0 / 2, unit, rel))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormJson {
    pub k: u32,
    pub eps: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentJson {
    pub tame: u64,
    pub cap: u32,
    pub coeffs: Vec<ScalarJson>,
}

/// An element of Λ ⊗ E. Absent components are zero to precision p_prec.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesJson {
    pub p: u64,
    pub u: String,
    pub p_prec: u32,
    pub x_prec: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<FormJson>,
    pub components: Vec<ComponentJson>,
}

impl SeriesJson {
    pub fn from_element(el: &IwasawaElement) -> Self {
        let prec = el.prec;
        let blank = ESeries::zero(prec.p, prec.p_prec, prec.x_prec);
        let components = el
            .components()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != blank)
            .map(|(i, c)| {
                let cap = c.a.cap().max(c.b.as_ref().map_or(0, |b| b.cap()));
                let coeffs = (0..c.a.len())
                    .map(|n| {
                        let mut s = ScalarJson::from_scalar(&c.a.coeff(n));
                        if let Some(b) = &c.b {
                            s.b_part = Some(Box::new(ScalarJson::from_scalar(&b.coeff(n))));
                        }
                        s
                    })
                    .collect();
                ComponentJson { tame: i as u64, cap, coeffs }
            })
            .collect();
        SeriesJson {
            p: prec.p,
            u: u_of(prec.p).to_string(),
            p_prec: prec.p_prec,
            x_prec: prec.x_prec,
            form: el.form.map(|f| FormJson { k: f.k, eps: f.eps }),
            components,
        }
    }

    pub fn to_element(&self) -> Result<IwasawaElement> {
        let prec = Precision::new(self.p, self.p_prec, self.x_prec)?;
        if self.u != u_of(self.p).to_string() {
            return Err(bad(format!("u must be {} for p = {}", u_of(self.p), self.p)));
        }
        let form = self.form.map(|f| Form::new(self.p, f.k, f.eps)).transpose()?;
        let mut el = IwasawaElement::zero(prec, form);
        let mut seen = vec![false; (self.p - 1) as usize];
        for c in &self.components {
            let t = c.tame as usize;
            if t >= seen.len() || std::mem::replace(&mut seen[t], true) {
                return Err(bad(format!("tame index {t} out of range or repeated")));
            }
            if c.coeffs.len() > self.x_prec {
                return Err(bad("more coefficients than x_prec"));
            }
            let a: Vec<PadicScalar> = c.coeffs.iter().map(|s| s.to_scalar(self.p)).collect::<Result<_>>()?;
            let has_b = c.coeffs.iter().any(|s| s.b_part.is_some());
            if has_b && form.is_none() {
                return Err(bad("b_part needs a form"));
            }
            let b = if has_b {
                let bs: Vec<PadicScalar> = c
                    .coeffs
                    .iter()
                    .map(|s| match &s.b_part {
                        Some(b) if b.b_part.is_none() => b.to_scalar(self.p),
                        Some(_) => Err(bad("nested b_part")),
                        None => Ok(PadicScalar::exact_zero(self.p)),
                    })
                    .collect::<Result<_>>()?;
                Some(Series::from_scalars(self.p, c.cap, &bs))
            } else {
                None
            };
            el.set_component(t as i64, ESeries { a: Series::from_scalars(self.p, c.cap, &a), b });
        }
        Ok(el)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionJson {
    pub order: String,
    pub series: SeriesJson,
}

impl DistributionJson {
    pub fn from_distribution(d: &Distribution) -> Self {
        DistributionJson { order: d.order.to_string(), series: SeriesJson::from_element(&d.body) }
    }

    pub fn to_distribution(&self) -> Result<Distribution> {
        let order: Rational = self.order.parse().map_err(|_| bad(format!("bad order {:?}", self.order)))?;
        Ok(Distribution::new(self.series.to_element()?, order))
    }
}

/// Input of `iwa factor`: the four coordinates (L_{α,α}, L_{−α,−α}, L_{α,−α}, L_{−α,α}).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnboundedQuadrupleDoc {
    pub schema: String,
    pub l_aa: DistributionJson,
    pub l_mm: DistributionJson,
    pub l_am: DistributionJson,
    pub l_ma: DistributionJson,
}

impl UnboundedQuadrupleDoc {
    pub fn new(q: &UnboundedQuadruple) -> Self {
        UnboundedQuadrupleDoc {
            schema: SCHEMA.into(),
            l_aa: DistributionJson::from_distribution(&q.l_aa),
            l_mm: DistributionJson::from_distribution(&q.l_mm),
            l_am: DistributionJson::from_distribution(&q.l_am),
            l_ma: DistributionJson::from_distribution(&q.l_ma),
        }
    }

    pub fn quadruple(&self) -> Result<UnboundedQuadruple> {
        Ok(UnboundedQuadruple {
            l_aa: self.l_aa.to_distribution()?,
            l_mm: self.l_mm.to_distribution()?,
            l_am: self.l_am.to_distribution()?,
            l_ma: self.l_ma.to_distribution()?,
        })
    }

    /// The coefficient form, which all four coordinates must share.
    pub fn form(&self) -> Result<Form> {
        let forms: Vec<Option<FormJson>> =
            [&self.l_aa, &self.l_mm, &self.l_am, &self.l_ma].iter().map(|d| d.series.form).collect();
        let f = forms[0].ok_or_else(|| bad("coordinates need a form"))?;
        if forms.iter().any(|g| *g != Some(f)) {
            return Err(bad("coordinates carry different forms"));
        }
        Form::new(self.l_aa.series.p, f.k, f.eps)
    }
}

/// Output of `iwa factor`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignedQuadrupleDoc {
    pub schema: String,
    pub convention: Convention,
    pub k: u32,
    pub bf_plus: SeriesJson,
    pub bf_minus: SeriesJson,
    pub bf_dot: SeriesJson,
    pub bf_circ: SeriesJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attained: Option<Attained>,
}

impl SignedQuadrupleDoc {
    pub fn new(q: &SignedQuadruple, k: u32, convention: Convention, attained: Option<Attained>) -> Self {
        SignedQuadrupleDoc {
            schema: SCHEMA.into(),
            convention,
            k,
            bf_plus: SeriesJson::from_element(&q.plus),
            bf_minus: SeriesJson::from_element(&q.minus),
            bf_dot: SeriesJson::from_element(&q.dot),
            bf_circ: SeriesJson::from_element(&q.circ),
            attained,
        }
    }

    pub fn quadruple(&self) -> Result<SignedQuadruple> {
        Ok(SignedQuadruple {
            plus: self.bf_plus.to_element()?,
            minus: self.bf_minus.to_element()?,
            dot: self.bf_dot.to_element()?,
            circ: self.bf_circ.to_element()?,
        })
    }
}

/// Wrap any report as {"schema": "iwa/1", "<name>": report}.
pub fn envelope<T: Serialize>(name: &str, body: &T) -> Result<String> {
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), SCHEMA.into());
    map.insert(name.into(), serde_json::to_value(body).map_err(|e| bad(e.to_string()))?);
    serde_json::to_string_pretty(&map).map_err(|e| bad(e.to_string()))
}

pub fn to_string<T: Serialize>(doc: &T) -> Result<String> {
    serde_json::to_string_pretty(doc).map_err(|e| bad(e.to_string()))
}

/// Parse a document and check its schema tag.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(format!("malformed JSON: {e}")))?;
    match v.get("schema").and_then(|s| s.as_str()) {
        Some(SCHEMA) => {}
        Some(other) => return Err(bad(format!("unsupported schema {other:?}"))),
        None => return Err(bad("missing \"schema\" field")),
    }
    serde_json::from_value(v).map_err(|e| bad(format!("malformed document: {e}")))
}
