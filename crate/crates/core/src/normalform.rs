//! Jordan data of nilpotent centroid elements and the normal form
//! `T = Σ_k Σ_{δ} M^{δ_1} ∘_1 ⋯ M^{δ_e} ∘_e T_k`.

use std::fmt;

use serde::Serialize;

use crate::centroid::{act_tuple, EndoTuple};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{Echelon, Matrix, Vector};
use crate::tensor::{apolar_act_monomial, apply_linear_maps, conciseness, substitute, Monomial, SVTensor};

/// A Jordan basis of one nilpotent endomorphism.
///
/// Columns are ordered by decreasing height and each column is listed from
/// its bottom `x^(q,q-1)` up to its top `x^(q,0)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JordanData {
    /// Nilpotency index.
    pub index: usize,
    pub heights: Vec<usize>,
    /// Columns are the Jordan basis vectors in the original coordinates.
    pub basis: Matrix,
    /// `L` in the Jordan basis.
    pub shift: Matrix,
    /// The partial inverse `M` in the Jordan basis; tops are sent to zero.
    pub partial_inverse: Matrix,
}

impl JordanData {
    pub fn dim(&self) -> usize {
        self.heights.iter().sum()
    }

    pub fn field(&self) -> Field {
        self.basis.field()
    }

    /// Number of columns of height `q`.
    pub fn multiplicity(&self, q: usize) -> usize {
        self.heights.iter().filter(|&&h| h == q).count()
    }

    fn offsets(&self) -> Vec<usize> {
        self.heights
            .iter()
            .scan(0, |acc, &h| {
                let o = *acc;
                *acc += h;
                Some(o)
            })
            .collect()
    }

    /// `(q, r, s)` for every basis position: column height, level and the
    /// 1-based index of the column among those of equal height.
    pub fn labels(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::with_capacity(self.dim());
        let mut seen = vec![0usize; self.index + 1];
        for &q in &self.heights {
            seen[q] += 1;
            for i in 0..q {
                out.push((q, q - 1 - i, seen[q]));
            }
        }
        out
    }

    pub fn label(&self, pos: usize) -> String {
        let (q, r, s) = self.labels()[pos];
        if self.multiplicity(q) == 1 {
            format!("x({q},{r})")
        } else {
            format!("x({q},{r})_{s}")
        }
    }

    /// Positions of the bottoms `x^(q,q-1)` with `q ≥ k`.
    pub fn bottoms(&self, k: usize) -> Vec<usize> {
        self.heights.iter().zip(self.offsets()).filter(|(&q, _)| q >= k).map(|(_, o)| o).collect()
    }

    /// Change of coordinates from the original basis to the Jordan basis.
    pub fn to_jordan(&self) -> Matrix {
        self.basis.inverse().expect("a Jordan basis is a basis")
    }

    /// The partial inverse in the original coordinates.
    pub fn partial_inverse_original(&self) -> Matrix {
        self.basis.mul(&self.partial_inverse).mul(&self.to_jordan())
    }
}

/// Jordan data of a nilpotent matrix, with tops chosen greedily from the
/// echelon bases of the kernel flag.
pub fn jordan_data(l: &Matrix) -> Result<JordanData> {
    let field = l.field();
    let dim = l.rows();
    if !l.is_square() {
        return Err(Error::Dimension("a Jordan basis needs a square matrix".into()));
    }
    // kernels[q] = Ker L^q
    let mut kernels: Vec<Vec<Vector>> = vec![Vec::new()];
    let mut power = Matrix::identity(field, dim);
    while kernels.last().unwrap().len() < dim {
        if kernels.len() > dim {
            return Err(Error::NotNilpotent);
        }
        power = power.mul(l);
        let k = power.kernel_basis();
        if k.len() == kernels.last().unwrap().len() {
            return Err(Error::NotNilpotent);
        }
        kernels.push(crate::matrix::span_rref(field, dim, &k));
    }
    let index = kernels.len() - 1;

    // tops[q] lists the chosen tops of columns of height q
    let mut tops: Vec<Vec<Vector>> = vec![Vec::new(); index + 1];
    for q in (1..=index).rev() {
        let mut ech = Echelon::new(field, dim);
        for v in &kernels[q - 1] {
            ech.insert(v.clone());
        }
        for h in q + 1..=index {
            let lp = l.pow(h - q);
            for top in &tops[h] {
                ech.insert(lp.mul_vec(top));
            }
        }
        for v in &kernels[q] {
            if ech.insert(v.clone()) {
                tops[q].push(v.clone());
            }
        }
    }

    let mut heights = Vec::new();
    let mut columns: Vec<Vector> = Vec::with_capacity(dim);
    for q in (1..=index).rev() {
        for top in &tops[q] {
            heights.push(q);
            let mut col = vec![top.clone()];
            for _ in 1..q {
                col.push(l.mul_vec(col.last().unwrap()));
            }
            columns.extend(col.into_iter().rev());
        }
    }
    let basis = Matrix::from_columns(field, dim, &columns);
    let mut shift = Matrix::zeros(field, dim, dim);
    let mut partial_inverse = Matrix::zeros(field, dim, dim);
    let mut offset = 0;
    for &q in &heights {
        for i in 1..q {
            shift.set(offset + i - 1, offset + i, field.one());
            partial_inverse.set(offset + i, offset + i - 1, field.one());
        }
        offset += q;
    }
    let data = JordanData { index, heights, basis, shift, partial_inverse };
    if data.basis.mul(&data.shift) != l.mul(&data.basis) {
        return Err(Error::Consistency("Jordan basis does not conjugate L to a shift".into()));
    }
    Ok(data)
}

/// Components `T_1, ..., T_n` of a tensor in Jordan coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct NormalForm {
    pub index: usize,
    /// `components[k-1]` is `T_k`, written in the Jordan coordinates.
    pub components: Vec<SVTensor>,
    pub jordan: Vec<JordanData>,
}

impl NormalForm {
    pub fn component(&self, k: usize) -> &SVTensor {
        &self.components[k - 1]
    }

    /// `Σ_{δ_1+⋯=k-1} M^δ ∘ T_k` in Jordan coordinates.
    pub fn layer(&self, k: usize) -> Result<SVTensor> {
        layer(self.component(k), k, &self.jordan)
    }

    pub fn reconstruct_jordan(&self) -> Result<SVTensor> {
        let mut out = SVTensor::zero(self.components[0].format().clone());
        for k in 1..=self.index {
            out = out.add(&self.layer(k)?);
        }
        Ok(out)
    }
}

/// `Σ_{δ_1+⋯+δ_e=k-1} M_1^{δ_1} ∘_1 ⋯ M_e^{δ_e} ∘_e T_k`: the `t^{k-1}`
/// coefficient of `T_k` under `x ↦ Σ_s t^s M^s x` in every slot.
pub fn layer(tk: &SVTensor, k: usize, jordan: &[JordanData]) -> Result<SVTensor> {
    let maps: Vec<Vec<Matrix>> = jordan
        .iter()
        .map(|jd| (0..k).map(|s| jd.partial_inverse.pow(s)).collect())
        .collect();
    Ok(substitute(tk, &maps)?.coefficient(k - 1))
}

pub fn reconstruct(nf: &NormalForm) -> Result<SVTensor> {
    let tj = nf.reconstruct_jordan()?;
    let back: Vec<Matrix> = nf.jordan.iter().map(|jd| jd.basis.clone()).collect();
    apply_linear_maps(&tj, &back)
}

/// Nilpotency index of an endomorphism tuple, or an error if some slot is
/// not nilpotent.
pub fn nilpotency_index(x: &EndoTuple) -> Result<usize> {
    let mut index = 0;
    for m in x.slots() {
        index = index.max(jordan_data(m)?.index);
    }
    Ok(index)
}

fn check_support(tk: &SVTensor, k: usize, jordan: &[JordanData]) -> Result<()> {
    let fmt = tk.format();
    let allowed: Vec<Vec<bool>> = jordan
        .iter()
        .map(|jd| {
            let mut a = vec![false; jd.dim()];
            for b in jd.bottoms(k) {
                a[b] = true;
            }
            a
        })
        .collect();
    for (m, _) in tk.terms() {
        for (j, al) in allowed.iter().enumerate() {
            if m.slot(fmt, j).iter().zip(al).any(|(&e, &ok)| e > 0 && !ok) {
                return Err(Error::Consistency(format!(
                    "component T_{k} leaves its prescribed subspace in slot {}",
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// Peel off `T_n, T_{n-1}, ..., T_1` using a nilpotent element of the
/// centroid. Conciseness is not needed for the recursion; for concise inputs
/// `T_n` is checked to be nonzero.
pub fn extract_components(t: &SVTensor, x: &EndoTuple) -> Result<NormalForm> {
    if t.is_zero() {
        return Err(Error::ZeroTensor);
    }
    x.check(t.format())?;
    let jordan: Vec<JordanData> = x.slots().iter().map(jordan_data).collect::<Result<_>>()?;
    act_tuple(x, t)?;
    let index = jordan.iter().map(|jd| jd.index).max().unwrap_or(1);
    if jordan.iter().any(|jd| jd.index != index) {
        return Err(Error::Consistency("slots have different nilpotency indices".into()));
    }
    let to_jordan: Vec<Matrix> = jordan.iter().map(JordanData::to_jordan).collect();
    let shifts = EndoTuple::new(jordan.iter().map(|jd| jd.shift.clone()).collect());

    let mut rest = apply_linear_maps(t, &to_jordan)?;
    let mut components = vec![SVTensor::zero(t.format().clone()); index];
    for k in (1..=index).rev() {
        let tk = act_tuple(&shifts.pow(k - 1), &rest)?;
        check_support(&tk, k, &jordan)?;
        rest = rest.sub(&layer(&tk, k, &jordan)?);
        components[k - 1] = tk;
    }
    if !rest.is_zero() {
        return Err(Error::Consistency("normal-form layers do not exhaust the tensor".into()));
    }
    if components[index - 1].is_zero() && conciseness(t)?.is_concise() {
        return Err(Error::Consistency("top component vanishes on a concise tensor".into()));
    }
    Ok(NormalForm { index, components, jordan })
}

/// The derivation `D_i = Σ M^i(b) ∂/∂b` over the bottoms `b` of columns
/// taller than `i`, recorded as `(target, source)` position pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DOperator {
    pub order: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl DOperator {
    pub fn describe(&self, jd: &JordanData) -> String {
        if self.pairs.is_empty() {
            return "0".into();
        }
        self.pairs
            .iter()
            .map(|&(to, from)| format!("{}*d/d{}", jd.label(to), jd.label(from)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Apply the derivation to a form in Jordan coordinates.
    pub fn apply(&self, f: &SVTensor) -> SVTensor {
        let fmt = f.format();
        let n = fmt.num_vars();
        let mut out = SVTensor::zero(fmt.clone());
        for &(to, from) in &self.pairs {
            let mut e = vec![0u32; n];
            e[from] = 1;
            let d = apolar_act_monomial(f, &Monomial::new(e));
            for (m, c) in d.terms() {
                let mut exps = m.exps().to_vec();
                exps[to] += 1;
                out.add_term(Monomial::new(exps), c);
            }
        }
        out
    }
}

/// Polynomial components and differential operators of a form with a
/// nilpotent centroid element.
#[derive(Clone, Debug, Serialize)]
pub struct VeroneseForm {
    pub normal_form: NormalForm,
    pub operators: Vec<DOperator>,
}

/// All `(ν_1, ..., ν_{n-1})` with `Σ i ν_i = total`.
fn weighted_partitions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, i: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i > parts {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for nu in 0..=rest / i {
            cur.push(nu);
            go(rest - nu * i, i + 1, parts, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(total, 1, parts, &mut Vec::new(), &mut out);
    out
}

impl VeroneseForm {
    pub fn jordan(&self) -> &JordanData {
        &self.normal_form.jordan[0]
    }

    /// `Σ_{ν} (1/ν_1!⋯ν_{n-1}!) D_1^{ν_1}⋯D_{n-1}^{ν_{n-1}} ⌟ F_k`.
    pub fn summation_term(&self, k: usize) -> Result<SVTensor> {
        let fk = self.normal_form.component(k);
        let field = fk.field();
        let degree = fk.format().degree(0);
        let parts = self.normal_form.index.saturating_sub(1);
        let mut out = SVTensor::zero(fk.format().clone());
        for nu in weighted_partitions(k - 1, parts) {
            if nu.iter().sum::<usize>() > degree {
                continue;
            }
            let mut g = fk.clone();
            let mut denom = field.one();
            for (i, &ni) in nu.iter().enumerate() {
                for s in 1..=ni {
                    g = self.operators[i].apply(&g);
                    denom *= &field.from_i64(s as i64);
                }
            }
            let inv = denom.inv().ok_or(Error::CharacteristicTooSmall {
                p: field.characteristic(),
                bound: degree as u64,
            })?;
            out = out.add(&g.scale(&inv));
        }
        Ok(out)
    }

    pub fn summation(&self) -> Result<SVTensor> {
        let mut out = SVTensor::zero(self.normal_form.components[0].format().clone());
        for k in 1..=self.normal_form.index {
            out = out.add(&self.summation_term(k)?);
        }
        Ok(out)
    }
}

/// Differential operators `D_1, ..., D_{n-1}` induced by the partial inverse.
pub fn d_operators(jd: &JordanData) -> Vec<DOperator> {
    let offsets = jd.offsets();
    (1..jd.index)
        .map(|i| DOperator {
            order: i,
            pairs: jd
                .heights
                .iter()
                .zip(&offsets)
                .filter(|(&q, _)| q > i)
                .map(|(_, &o)| (o + i, o))
                .collect(),
        })
        .collect()
}

/// Normal form of a form `F ∈ S^d V` together with its differential-operator
/// description, checked against the tensor-style reconstruction.
pub fn veronese_form(f: &SVTensor, l: &Matrix) -> Result<VeroneseForm> {
    let fmt = f.format();
    if fmt.num_factors() != 1 {
        return Err(Error::Unsupported("the operator form needs a single symmetric factor".into()));
    }
    let p = fmt.field().characteristic();
    if p != 0 && p <= fmt.degree(0) as u64 {
        return Err(Error::CharacteristicTooSmall { p, bound: fmt.degree(0) as u64 });
    }
    let nf = extract_components(f, &EndoTuple::new(vec![l.clone()]))?;
    from_components(nf)
}

/// Attach the differential operators to a normal form of a single factor.
pub fn from_components(nf: NormalForm) -> Result<VeroneseForm> {
    if nf.jordan.len() != 1 {
        return Err(Error::Unsupported("the operator form needs a single symmetric factor".into()));
    }
    let operators = d_operators(&nf.jordan[0]);
    let vf = VeroneseForm { normal_form: nf, operators };
    if vf.summation()? != vf.normal_form.reconstruct_jordan()? {
        return Err(Error::Consistency("operator summation disagrees with the layer sum".into()));
    }
    Ok(vf)
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nilpotency index {}", self.index)?;
        for (j, jd) in self.jordan.iter().enumerate() {
            let names: Vec<String> = (0..jd.dim())
                .map(|pos| {
                    format!("{} = {}", self.components[0].format().var_name(j, pos), jd.label(pos))
                })
                .collect();
            writeln!(f, "slot {} column heights {:?}: {}", j + 1, jd.heights, names.join(", "))?;
        }
        for (k, tk) in self.components.iter().enumerate() {
            writeln!(f, "T_{} = {}", k + 1, tk)?;
        }
        Ok(())
    }
}

/// Build `Σ_k layer_k(T_k)` from components in Jordan coordinates and map it
/// back through the given bases.
pub fn assemble(components: &[SVTensor], jordan: &[JordanData]) -> Result<SVTensor> {
    let nf = NormalForm { index: components.len(), components: components.to_vec(), jordan: jordan.to_vec() };
    reconstruct(&nf)
}

/// Jordan data for a prescribed list of column heights (standard basis).
pub fn standard_jordan(field: Field, heights: &[usize]) -> JordanData {
    let mut heights = heights.to_vec();
    heights.sort_unstable_by(|a, b| b.cmp(a));
    let dim: usize = heights.iter().sum();
    let mut shift = Matrix::zeros(field, dim, dim);
    let mut partial_inverse = Matrix::zeros(field, dim, dim);
    let mut offset = 0;
    for &q in &heights {
        for i in 1..q {
            shift.set(offset + i - 1, offset + i, field.one());
            partial_inverse.set(offset + i, offset + i - 1, field.one());
        }
        offset += q;
    }
    JordanData {
        index: heights.first().copied().unwrap_or(0),
        heights,
        basis: Matrix::identity(field, dim),
        shift,
        partial_inverse,
    }
}

/// Replace the basis of a Jordan datum by `P · basis`, keeping the shape.
pub fn rebase(jd: &JordanData, p: &Matrix) -> JordanData {
    JordanData { basis: p.mul(&jd.basis), ..jd.clone() }
}

/// `L` in the original coordinates.
pub fn original_shift(jd: &JordanData) -> Matrix {
    jd.basis.mul(&jd.shift).mul(&jd.to_jordan())
}
