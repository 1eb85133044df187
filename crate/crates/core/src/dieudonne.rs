//! Filtered φ-modules over E: D_cris of the form, its symmetric and exterior
//! squares, the splitting Sym² = D₁ ⊕ D₂, eigenvectors on the dual, and the
//! change-of-basis matrix between v_λ⊗v_μ coordinates and signed rows.

use crate::error::{IwaError, Result};
use crate::padic::PadicScalar;
use crate::quad::{Form, QuadExtScalar};
use serde::Serialize;

/// Dense square matrix over E; `m[i][j]` is row i, column j.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: Vec<Vec<QuadExtScalar>>,
}

impl Mat {
    pub fn zeros(form: Form, n: usize) -> Self {
        Mat { rows: vec![vec![QuadExtScalar::zero(form); n]; n] }
    }

    pub fn identity(form: Form, n: usize, rel: u32) -> Self {
        let mut m = Self::zeros(form, n);
        for i in 0..n {
            m.rows[i][i] = QuadExtScalar::from_int(form, 1, rel);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let n = self.dim();
        let form = self.rows[0][0].form;
        let mut out = Self::zeros(form, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = QuadExtScalar::zero(form);
                for k in 0..n {
                    acc = acc.add(&self.rows[i][k].mul(&o.rows[k][j]));
                }
                out.rows[i][j] = acc;
            }
        }
        out
    }

    pub fn apply(&self, v: &[QuadExtScalar]) -> Vec<QuadExtScalar> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(QuadExtScalar::zero(v[0].form), |acc, (a, b)| acc.add(&a.mul(b)))
            })
            .collect()
    }

    pub fn transpose(&self) -> Mat {
        let n = self.dim();
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.rows[i][j] = self.rows[j][i];
            }
        }
        out
    }

    pub fn scale(&self, x: &QuadExtScalar) -> Mat {
        Mat { rows: self.rows.iter().map(|r| r.iter().map(|a| a.mul(x)).collect()).collect() }
    }

    /// Gauss–Jordan with the pivot of least valuation in each column.
    pub fn inverse(&self) -> Result<Mat> {
        let n = self.dim();
        let form = self.rows[0][0].form;
        let rel = self
            .rows
            .iter()
            .flatten()
            .map(|x| x.a.rel_prec().max(x.b.rel_prec()))
            .max()
            .unwrap_or(1)
            .max(1);
        let mut a = self.clone();
        let mut inv = Self::identity(form, n, rel);
        for col in 0..n {
            let piv = (col..n)
                .filter_map(|r| a.rows[r][col].valuation().ok().map(|v| (v, r)))
                .min()
                .map(|x| x.1)
                .ok_or_else(|| IwaError::InvalidParameter("singular matrix".into()))?;
            a.rows.swap(col, piv);
            inv.rows.swap(col, piv);
            let pinv = a.rows[col][col].inv()?;
            for j in 0..n {
                a.rows[col][j] = a.rows[col][j].mul(&pinv);
                inv.rows[col][j] = inv.rows[col][j].mul(&pinv);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.rows[r][col];
                if f.is_exact_zero() {
                    continue;
                }
                for j in 0..n {
                    let t = f.mul(&a.rows[col][j]);
                    a.rows[r][j] = a.rows[r][j].sub(&t);
                    let t = f.mul(&inv.rows[col][j]);
                    inv.rows[r][j] = inv.rows[r][j].sub(&t);
                }
            }
        }
        Ok(inv)
    }

    pub fn is_identity(&self) -> bool {
        let n = self.dim();
        let form = self.rows[0][0].form;
        (0..n).all(|i| {
            (0..n).all(|j| {
                let x = self.rows[i][j];
                if i == j {
                    let rel = x.a.rel_prec().max(1);
                    x.sub(&QuadExtScalar::from_int(form, 1, rel)).is_zero()
                } else {
                    x.is_zero()
                }
            })
        })
    }

    pub fn det2(&self) -> QuadExtScalar {
        assert_eq!(self.dim(), 2);
        self.rows[0][0].mul(&self.rows[1][1]).sub(&self.rows[0][1].mul(&self.rows[1][0]))
    }

    /// Characteristic polynomial of a 2×2 block: (trace, determinant).
    pub fn charpoly2(&self) -> (QuadExtScalar, QuadExtScalar) {
        (self.rows[0][0].add(&self.rows[1][1]), self.det2())
    }
}

/// Finite-dimensional filtered φ-module. The basis is adapted to the
/// filtration: basis vector j lies in Fil^{weights[j]} and no deeper.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiModule {
    pub form: Form,
    pub labels: Vec<String>,
    /// Column j is φ of basis vector j.
    pub phi: Mat,
    pub weights: Vec<i64>,
}

/// Filtration step: Fil^i has dimension `dim` for thresholds `from ≤ i` up to
/// the next entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Jump {
    pub from: i64,
    pub dim: usize,
}

impl PhiModule {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// dim Fil^i.
    pub fn fil_dim(&self, i: i64) -> usize {
        self.weights.iter().filter(|&&w| w >= i).count()
    }

    /// The jump list: thresholds where dim Fil^i changes, starting at 0.
    pub fn filtration(&self) -> Vec<Jump> {
        let mut ws: Vec<i64> = self.weights.iter().map(|w| w + 1).collect();
        ws.push(0);
        ws.sort();
        ws.dedup();
        ws.into_iter().filter(|&i| i >= 0).map(|i| Jump { from: i, dim: self.fil_dim(i) }).collect()
    }

    /// φ applied to a coordinate vector.
    pub fn apply_phi(&self, v: &[QuadExtScalar]) -> Vec<QuadExtScalar> {
        self.phi.apply(v)
    }

    /// Multiply φ by a unit scalar, e.g. χ(p)^{-1} for an unramified twist.
    pub fn twist_unramified(&self, c: &QuadExtScalar) -> PhiModule {
        PhiModule { phi: self.phi.scale(c), ..self.clone() }
    }

    /// D* with φ* = (φ^{-1})ᵀ and negated weights.
    pub fn dual(&self) -> Result<PhiModule> {
        Ok(PhiModule {
            form: self.form,
            labels: self.labels.iter().map(|l| format!("{l}'")).collect(),
            phi: self.phi.inverse()?.transpose(),
            weights: self.weights.iter().map(|w| -w).collect(),
        })
    }
}

/// D_cris of the form: basis (ω, ω₂ = p^{−k−1}φ(ω)) with φ(ω) = p^{k+1}ω₂ and
/// φ(ω₂) = −ε_f(p)ω. ω spans Fil^1 = … = Fil^{k+1}.
pub fn dcris_of_form(form: Form, rel: u32) -> PhiModule {
    let p = form.p;
    let pk1 = QuadExtScalar::from_qp(PadicScalar::from_int(p, 1, rel).shift(form.k as i64 + 1), form);
    let m_eps = QuadExtScalar::from_qp(form.eps_scalar(rel).neg(), form);
    let mut phi = Mat::zeros(form, 2);
    phi.rows[1][0] = pk1;
    phi.rows[0][1] = m_eps;
    PhiModule {
        form,
        labels: vec!["ω".into(), "ω₂".into()],
        phi,
        weights: vec![form.k as i64 + 1, 0],
    }
}

/// Index of the monomial e_a e_b (a ≤ b) in the basis of Sym² of a module of dim n.
fn sym_index(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    (0..a).map(|i| n - i).sum::<usize>() + (b - a)
}

/// Sym²D, on the basis e_a⊗e_a and e_a⊗e_b + e_b⊗e_a (a < b).
pub fn sym_square(d: &PhiModule) -> PhiModule {
    let n = d.dim();
    let form = d.form;
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a..n {
            pairs.push((a, b));
            weights.push(d.weights[a] + d.weights[b]);
            labels.push(if a == b {
                format!("{}⊗{}", d.labels[a], d.labels[a])
            } else {
                format!("{}·{}", d.labels[a], d.labels[b])
            });
        }
    }
    let dim = pairs.len();
    let mut phi = Mat::zeros(form, dim);
    let col = |j: usize| -> Vec<QuadExtScalar> { d.phi.rows.iter().map(|r| r[j]).collect() };
    for (c, &(a, b)) in pairs.iter().enumerate() {
        let (x, y) = (col(a), col(b));
        for i in 0..n {
            for j in i..n {
                let coef = if a == b {
                    if i == j {
                        x[i].mul(&x[i])
                    } else {
                        x[i].mul(&x[j])
                    }
                } else if i == j {
                    x[i].mul(&y[i]).add(&x[i].mul(&y[i]))
                } else {
                    x[i].mul(&y[j]).add(&x[j].mul(&y[i]))
                };
                phi.rows[sym_index(n, i, j)][c] = coef;
            }
        }
    }
    PhiModule { form, labels, phi, weights }
}

/// ∧²D for dim D = 2: φ acts by det φ.
pub fn wedge_square(d: &PhiModule) -> Result<PhiModule> {
    if d.dim() != 2 {
        return Err(IwaError::InvalidParameter("wedge square implemented for rank 2".into()));
    }
    let mut phi = Mat::zeros(d.form, 1);
    phi.rows[0][0] = d.phi.det2();
    Ok(PhiModule {
        form: d.form,
        labels: vec![format!("{}∧{}", d.labels[0], d.labels[1])],
        phi,
        weights: vec![d.weights[0] + d.weights[1]],
    })
}

/// Sym²D = D₁ ⊕ D₂ with D₁ = ⟨ω·ω₂⟩ and D₂ = ⟨ω⊗ω, ω₂⊗ω₂⟩ (ω₂ is a
/// multiple of φω, so these are the spans named by φω).
pub fn split_sym_square(s: &PhiModule) -> Result<(PhiModule, PhiModule)> {
    if s.dim() != 3 {
        return Err(IwaError::InvalidParameter("expected the symmetric square of a rank-2 module".into()));
    }
    // basis order of sym_square: ω⊗ω, ω·ω₂, ω₂⊗ω₂
    let d1 = [1usize];
    let d2 = [0usize, 2];
    for &i in &d1 {
        for &j in &d2 {
            if !s.phi.rows[i][j].is_zero() || !s.phi.rows[j][i].is_zero() {
                return Err(IwaError::InvalidParameter("D₁, D₂ are not φ-stable".into()));
            }
        }
    }
    let sub = |idx: &[usize]| -> PhiModule {
        let mut phi = Mat::zeros(s.form, idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                phi.rows[a][b] = s.phi.rows[i][j];
            }
        }
        PhiModule {
            form: s.form,
            labels: idx.iter().map(|&i| s.labels[i].clone()).collect(),
            phi,
            weights: idx.iter().map(|&i| s.weights[i]).collect(),
        }
    };
    Ok((sub(&d1), sub(&d2)))
}

/// v_λ = φ(ω′) + λ^{-1}ω′ for λ = ±α, in the coordinates of `dstar`, where
/// ω′ is its first basis vector.
pub fn eigenvectors_dual(dstar: &PhiModule, rel: u32) -> Result<(Vec<QuadExtScalar>, Vec<QuadExtScalar>)> {
    let form = dstar.form;
    let mut w = vec![QuadExtScalar::zero(form); dstar.dim()];
    w[0] = QuadExtScalar::from_int(form, 1, rel);
    let phw = dstar.apply_phi(&w);
    let alpha = QuadExtScalar::alpha(form, rel);
    let inv_a = alpha.inv()?;
    let v = |s: &QuadExtScalar| -> Vec<QuadExtScalar> {
        phw.iter().zip(&w).map(|(a, b)| a.add(&b.mul(s))).collect()
    };
    Ok((v(&inv_a), v(&inv_a.neg())))
}

/// The matrix M taking (L_{α,α}, L_{−α,−α}, L_{α,−α}, L_{−α,α}) to the
/// rows that are divisible by the Pollack logarithms, and its inverse.
pub fn change_of_basis(form: Form, rel: u32) -> Result<(Mat, Mat)> {
    let one = QuadExtScalar::from_int(form, 1, rel);
    let a = QuadExtScalar::alpha(form, rel);
    let a2 = a.mul(&a);
    let two_a = a.add(&a);
    let z = QuadExtScalar::zero(form);
    let m = Mat {
        rows: vec![
            vec![one, one, one, one],
            vec![a2, a2, a2.neg(), a2.neg()],
            vec![two_a, two_a.neg(), z, z],
            vec![z, z, two_a.neg(), two_a],
        ],
    };
    let inv = m.inverse()?;
    if !m.mul(&inv).is_identity() {
        return Err(IwaError::InvalidParameter("M·M⁻¹ ≠ I".into()));
    }
    Ok((m, inv))
}

/// Expansion of v_λ⊗v_μ in the tensor basis (φω′⊗φω′, ω′⊗ω′, φω′⊗ω′,
/// ω′⊗φω′); columns in the order (α,α), (−α,−α), (α,−α), (−α,α).
pub fn tensor_expansion(form: Form, rel: u32) -> Result<Mat> {
    let a = QuadExtScalar::alpha(form, rel);
    let one = QuadExtScalar::from_int(form, 1, rel);
    let pairs = [(a, a), (a.neg(), a.neg()), (a, a.neg()), (a.neg(), a)];
    let mut b = Mat::zeros(form, 4);
    for (c, (l, m)) in pairs.iter().enumerate() {
        let (il, im) = (l.inv()?, m.inv()?);
        b.rows[0][c] = one;
        b.rows[1][c] = il.mul(&im);
        b.rows[2][c] = im;
        b.rows[3][c] = il;
    }
    Ok(b)
}

/// Summary used by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct DieudonneReport {
    pub p: u64,
    pub k: u32,
    pub eps: i64,
    pub phi_squared_is_alpha_squared: bool,
    pub det_phi: String,
    pub filtration: Vec<Jump>,
    pub sym2_filtration: Vec<Jump>,
    pub d1_eigenvalue: String,
    pub d2_charpoly: String,
    pub eigenvectors_ok: bool,
    pub m_times_m_inv_is_identity: bool,
}

pub fn report(form: Form, rel: u32) -> Result<DieudonneReport> {
    let d = dcris_of_form(form, rel);
    let a2 = form.alpha2(rel);
    let sq = d.phi.mul(&d.phi);
    let a2e = QuadExtScalar::from_qp(a2, form);
    let phi_sq = sq.rows[0][0].agrees(&a2e)
        && sq.rows[1][1].agrees(&a2e)
        && sq.rows[0][1].is_zero()
        && sq.rows[1][0].is_zero();
    let s = sym_square(&d);
    let (d1, d2) = split_sym_square(&s)?;
    let (tr, det) = d2.phi.charpoly2();
    let dstar = d.dual()?;
    let (va, vm) = eigenvectors_dual(&dstar, rel)?;
    let inv_a = QuadExtScalar::alpha(form, rel).inv()?;
    let eig_ok = |v: &[QuadExtScalar], l: &QuadExtScalar| {
        dstar.apply_phi(v).iter().zip(v).all(|(x, y)| x.agrees(&y.mul(l)))
    };
    let (m, inv) = change_of_basis(form, rel)?;
    Ok(DieudonneReport {
        p: form.p,
        k: form.k,
        eps: form.eps,
        phi_squared_is_alpha_squared: phi_sq,
        det_phi: d.phi.det2().to_string(),
        filtration: d.filtration(),
        sym2_filtration: s.filtration(),
        d1_eigenvalue: d1.phi.rows[0][0].to_string(),
        d2_charpoly: format!("X^2 - ({})X + ({})", tr, det),
        eigenvectors_ok: eig_ok(&va, &inv_a) && eig_ok(&vm, &inv_a.neg()),
        m_times_m_inv_is_identity: m.mul(&inv).is_identity(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> Form {
        Form::new(5, 2, 1).unwrap()
    }

    #[test]
    fn phi_matrix_columns() {
        let d = dcris_of_form(f(), 10);
        assert_eq!(d.phi.rows[1][0].a.to_i128(), Some(125));
        assert_eq!(d.phi.rows[0][1].a.to_i128(), Some(-1));
        assert_eq!(d.phi.det2().a.to_i128(), Some(125));
    }

    #[test]
    fn sym2_filtration_thresholds() {
        let k = f().k as i64;
        let s = sym_square(&dcris_of_form(f(), 10));
        let dims: Vec<usize> = [0, 1, k + 2, 2 * k + 3].iter().map(|&i| s.fil_dim(i)).collect();
        assert_eq!(dims, vec![3, 2, 1, 0]);
        assert_eq!(s.fil_dim(k + 1), 2);
        assert_eq!(s.fil_dim(2 * k + 2), 1);
    }

    #[test]
    fn sym2_phi_is_functorial() {
        let d = dcris_of_form(f(), 10);
        let s = sym_square(&d);
        // φ(ω⊗ω) = φω⊗φω = 125² ω₂⊗ω₂
        assert_eq!(s.phi.rows[2][0].a.to_i128(), Some(125 * 125));
        assert!(s.phi.rows[0][0].is_zero());
    }

    #[test]
    fn split_pieces() {
        let s = sym_square(&dcris_of_form(f(), 10));
        let (d1, d2) = split_sym_square(&s).unwrap();
        assert_eq!(d1.phi.rows[0][0].a.to_i128(), Some(-125));
        let (tr, det) = d2.phi.charpoly2();
        assert!(tr.is_zero());
        assert_eq!(det.a.to_i128(), Some(-(125 * 125)));
    }

    #[test]
    fn eigenvector_sums() {
        let d = dcris_of_form(f(), 12);
        let ds = d.dual().unwrap();
        let (va, vm) = eigenvectors_dual(&ds, 12).unwrap();
        let w0 = QuadExtScalar::from_int(f(), 1, 12);
        let two_over_a = QuadExtScalar::from_int(f(), 2, 12).div(&QuadExtScalar::alpha(f(), 12)).unwrap();
        let diff: Vec<_> = va.iter().zip(&vm).map(|(x, y)| x.sub(y)).collect();
        assert!(diff[0].agrees(&two_over_a.mul(&w0)));
        assert!(diff[1].is_zero());
    }

    #[test]
    fn m_columns() {
        let (m, inv) = change_of_basis(f(), 12).unwrap();
        assert!(m.mul(&inv).is_identity());
        let one = QuadExtScalar::from_int(f(), 1, 12);
        let z = QuadExtScalar::zero(f());
        let r = m.apply(&[one, one, one, one]);
        assert_eq!(r[0].a.to_i128(), Some(4));
        assert!(r[1].is_zero() && r[2].is_zero() && r[3].is_zero());
        let r = m.apply(&[one, one, z, z]);
        assert_eq!(r[1].a.to_i128(), Some(-250));
    }

    #[test]
    fn m_is_rescaled_tensor_expansion() {
        let (m, _) = change_of_basis(f(), 12).unwrap();
        let b = tensor_expansion(f(), 12).unwrap();
        let a = QuadExtScalar::alpha(f(), 12);
        let a2 = a.mul(&a);
        for c in 0..4 {
            assert!(m.rows[0][c].agrees(&b.rows[0][c]));
            assert!(m.rows[1][c].agrees(&b.rows[1][c].mul(&a2).mul(&a2)));
            assert!(m.rows[2][c].agrees(&b.rows[2][c].add(&b.rows[3][c]).mul(&a2)));
            assert!(m.rows[3][c].agrees(&b.rows[2][c].sub(&b.rows[3][c]).mul(&a2)));
        }
    }
}
