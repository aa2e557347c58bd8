//! The centroid `C(T)`: endomorphism tuples acting the same way on every slot
//! of `T`. Computed directly from the defining linear conditions and, as an
//! independent route, from the companion space of the apolar ideal.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::apolar::companion_space;
use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::matrix::{span_rref, Echelon, Matrix, MatrixWire, Vector};
use crate::poly::UniPoly;
use crate::tensor::{
    apolar_act_monomial, conciseness, contract_op, desymmetrize, is_symmetric_image, mode_apply,
    symmetrize, Format, Monomial, SVTensor,
};

/// One matrix per slot, acting on `V_j` by the column convention.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EndoTuple {
    mats: Vec<Matrix>,
}

impl EndoTuple {
    pub fn new(mats: Vec<Matrix>) -> EndoTuple {
        EndoTuple { mats }
    }

    pub fn identity(fmt: &Format) -> EndoTuple {
        EndoTuple { mats: fmt.dims().iter().map(|&n| Matrix::identity(fmt.field(), n)).collect() }
    }

    pub fn zero(fmt: &Format) -> EndoTuple {
        EndoTuple { mats: fmt.dims().iter().map(|&n| Matrix::zeros(fmt.field(), n, n)).collect() }
    }

    /// The same matrix in every slot.
    pub fn diagonal(m: &Matrix, slots: usize) -> EndoTuple {
        EndoTuple { mats: vec![m.clone(); slots] }
    }

    pub fn slots(&self) -> &[Matrix] {
        &self.mats
    }

    pub fn slot(&self, j: usize) -> &Matrix {
        &self.mats[j]
    }

    pub fn field(&self) -> Field {
        self.mats[0].field()
    }

    pub fn to_field(&self, field: Field) -> Result<EndoTuple> {
        Ok(EndoTuple { mats: self.mats.iter().map(|m| m.to_field(field)).collect::<Result<_>>()? })
    }

    pub fn add(&self, other: &EndoTuple) -> EndoTuple {
        EndoTuple { mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &EndoTuple) -> EndoTuple {
        EndoTuple { mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: &Scalar) -> EndoTuple {
        EndoTuple { mats: self.mats.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn mul(&self, other: &EndoTuple) -> EndoTuple {
        EndoTuple { mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a.mul(b)).collect() }
    }

    pub fn pow(&self, e: usize) -> EndoTuple {
        EndoTuple { mats: self.mats.iter().map(|a| a.pow(e)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.mats.iter().all(Matrix::is_zero)
    }

    /// All entries, slot by slot, row-major.
    pub fn flatten(&self) -> Vector {
        self.mats.iter().flat_map(|m| m.flat().iter().cloned()).collect()
    }

    pub fn from_flat(fmt: &Format, v: &[Scalar]) -> EndoTuple {
        let mut mats = Vec::new();
        let mut pos = 0;
        for n in fmt.dims() {
            let rows = (0..n).map(|i| v[pos + i * n..pos + (i + 1) * n].to_vec()).collect();
            mats.push(Matrix::from_rows(fmt.field(), rows).unwrap());
            pos += n * n;
        }
        EndoTuple { mats }
    }

    /// Check sizes and field against a format.
    pub fn check(&self, fmt: &Format) -> Result<()> {
        if self.mats.len() != fmt.num_factors() {
            return Err(Error::Dimension(format!(
                "{} matrices given for {} slots",
                self.mats.len(),
                fmt.num_factors()
            )));
        }
        for (j, m) in self.mats.iter().enumerate() {
            let n = fmt.dim(j);
            if m.rows() != n || m.cols() != n {
                return Err(Error::Dimension(format!("slot {} needs a {n}x{n} matrix", j + 1)));
            }
            if m.field() != fmt.field() {
                return Err(Error::FieldMismatch(m.field(), fmt.field()));
            }
        }
        Ok(())
    }
}

impl Serialize for EndoTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("EndoTuple", 2)?;
        st.serialize_field("field", &self.field())?;
        st.serialize_field("matrices", &self.mats)?;
        st.end()
    }
}

/// An element file: `{"field": "...", "matrices": [[[...]]]}`.
#[derive(Deserialize)]
pub struct EndoTupleWire {
    pub field: Field,
    pub matrices: Vec<MatrixWire>,
}

impl EndoTupleWire {
    pub fn into_tuple(self) -> Result<EndoTuple> {
        let field = self.field;
        let mats = self.matrices.into_iter().map(|m| m.into_matrix(field)).collect::<Result<_>>()?;
        Ok(EndoTuple { mats })
    }
}

impl fmt::Display for EndoTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, m) in self.mats.iter().enumerate() {
            if j > 0 {
                writeln!(f)?;
            }
            writeln!(f, "slot {}:", j + 1)?;
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

/// Coordinates of a centroid element in the basis of its algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CentroidElement {
    pub coords: Vec<Scalar>,
}

impl CentroidElement {
    pub fn basis_vector(field: Field, dim: usize, k: usize) -> CentroidElement {
        let mut coords = vec![field.zero(); dim];
        coords[k] = field.one();
        CentroidElement { coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Scalar::is_zero)
    }

    pub fn add(&self, other: &CentroidElement) -> CentroidElement {
        CentroidElement { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &CentroidElement) -> CentroidElement {
        CentroidElement { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &Scalar) -> CentroidElement {
        CentroidElement { coords: self.coords.iter().map(|a| a * c).collect() }
    }
}

/// A commutative unital algebra of endomorphism tuples with its
/// multiplication table. Basis element 0 is the identity.
#[derive(Clone, Debug, Serialize)]
pub struct CentroidAlgebra {
    format: Format,
    basis: Vec<EndoTuple>,
    /// `structure[a][b][k]`: coefficient of basis `k` in `basis[a] * basis[b]`.
    structure: Vec<Vec<Vec<Scalar>>>,
}

impl CentroidAlgebra {
    pub fn format(&self) -> &Format {
        &self.format
    }

    pub fn field(&self) -> Field {
        self.format.field()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[EndoTuple] {
        &self.basis
    }

    pub fn structure_constants(&self) -> &[Vec<Vec<Scalar>>] {
        &self.structure
    }

    pub fn one(&self) -> CentroidElement {
        CentroidElement::basis_vector(self.field(), self.dim(), 0)
    }

    pub fn zero(&self) -> CentroidElement {
        CentroidElement { coords: vec![self.field().zero(); self.dim()] }
    }

    pub fn basis_element(&self, k: usize) -> CentroidElement {
        CentroidElement::basis_vector(self.field(), self.dim(), k)
    }

    pub fn mul(&self, x: &CentroidElement, y: &CentroidElement) -> CentroidElement {
        let mut out = vec![self.field().zero(); self.dim()];
        for (a, xa) in x.coords.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.coords.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let w = xa * yb;
                for (k, c) in self.structure[a][b].iter().enumerate() {
                    if !c.is_zero() {
                        out[k] += &(&w * c);
                    }
                }
            }
        }
        CentroidElement { coords: out }
    }

    pub fn pow(&self, x: &CentroidElement, e: usize) -> CentroidElement {
        (0..e).fold(self.one(), |acc, _| self.mul(&acc, x))
    }

    /// The endomorphism tuple of an element.
    pub fn tuple(&self, x: &CentroidElement) -> EndoTuple {
        let mut acc = EndoTuple::zero(&self.format);
        for (c, b) in x.coords.iter().zip(&self.basis) {
            if !c.is_zero() {
                acc = acc.add(&b.scale(c));
            }
        }
        acc
    }

    /// Coordinates of a tuple, if it lies in the algebra.
    pub fn element(&self, t: &EndoTuple) -> Result<CentroidElement> {
        t.check(&self.format)?;
        let cols: Vec<Vector> = self.basis.iter().map(EndoTuple::flatten).collect();
        let target = t.flatten();
        let a = Matrix::from_columns(self.field(), target.len(), &cols);
        a.solve(&target)
            .map(|coords| CentroidElement { coords })
            .ok_or_else(|| Error::NotInCentroid("tuple is not in the span of the centroid basis".into()))
    }

    /// Canonical reduced echelon form of the spanned subspace of tuples.
    pub fn canonical_span(&self) -> Vec<Vector> {
        let width = self.format.dims().iter().map(|n| n * n).sum();
        span_rref(self.field(), width, &self.basis.iter().map(EndoTuple::flatten).collect::<Vec<_>>())
    }

    /// Polynomial evaluated at an element.
    pub fn eval_poly(&self, p: &UniPoly, x: &CentroidElement) -> CentroidElement {
        let mut acc = self.zero();
        for c in p.coeffs().iter().rev() {
            acc = self.mul(&acc, x).add(&self.one().scale(c));
        }
        acc
    }

    /// Sub-basis spanning the ideal `e·A` of an idempotent `e`, plus `e` itself.
    pub fn ideal_basis(&self, e: &CentroidElement) -> Vec<CentroidElement> {
        let mut ech = Echelon::new(self.field(), self.dim());
        let mut out = Vec::new();
        for k in 0..self.dim() {
            let v = self.mul(e, &self.basis_element(k));
            if ech.insert(v.coords.clone()) {
                out.push(v);
            }
        }
        out
    }
}

fn check_supported(t: &SVTensor) -> Result<()> {
    if t.is_zero() {
        return Err(Error::ZeroTensor);
    }
    if t.format().total_degree() < 3 {
        return Err(Error::Unsupported(format!(
            "centroid of a tensor of total degree {} may be noncommutative; need at least 3",
            t.format().total_degree()
        )));
    }
    let c = conciseness(t)?;
    if !c.is_concise() {
        return Err(Error::NotConcise { ranks: c.ranks, dims: c.dims });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EqKey {
    Agree(usize, Monomial),
    Symmetric(usize, usize, Monomial),
}

/// Solve the defining conditions: `(1/d_1) Y_1 ⌟_1 T = (1/d_j) Y_j ⌟_j T` for
/// every `j`, and `Y_j ∘_j T` symmetric in slot `j` whenever `d_j ≥ 2`.
pub fn compute_centroid(t: &SVTensor) -> Result<CentroidAlgebra> {
    check_supported(t)?;
    let fmt = t.format();
    let field = t.field();
    let e = fmt.num_factors();
    let inv_deg: Vec<Scalar> =
        (0..e).map(|j| field.from_i64(fmt.degree(j) as i64).inv().unwrap()).collect();

    let mut columns: Vec<BTreeMap<EqKey, Scalar>> = Vec::new();
    for j in 0..e {
        let n = fmt.dim(j);
        for i in 0..n {
            for k in 0..n {
                let unit = Matrix::unit(field, n, i, k);
                let mut col = BTreeMap::new();
                let contracted = contract_op(t, j, &unit)?.scale(&inv_deg[j]);
                if j == 0 {
                    for other in 1..e {
                        for (m, c) in contracted.terms() {
                            col.insert(EqKey::Agree(other, m.clone()), c.clone());
                        }
                    }
                } else {
                    for (m, c) in contracted.terms() {
                        col.insert(EqKey::Agree(j, m.clone()), -c);
                    }
                }
                if fmt.degree(j) >= 2 {
                    let mixed = mode_apply(t, j, &unit)?;
                    let defect = mixed.sub(&desymmetrize(&symmetrize(&mixed), j));
                    for ((v, m), c) in defect.terms() {
                        col.insert(EqKey::Symmetric(j, *v, m.clone()), c.clone());
                    }
                }
                columns.push(col);
            }
        }
    }
    let kernel = crate::tensor::solve_homogeneous(field, &columns);
    let tuples: Vec<EndoTuple> = kernel.iter().map(|v| EndoTuple::from_flat(fmt, v)).collect();
    build_algebra(fmt, tuples)
}

/// Recover the centroid from the companion space: each `G` there determines
/// the tuple `X` with `∂G/∂x_{j,l} = Σ_k X_{lk} ∂T/∂x_{j,k}`, and `X ∘ T = G`.
pub fn centroid_via_apolar(t: &SVTensor) -> Result<CentroidAlgebra> {
    check_supported(t)?;
    let fmt = t.format();
    let field = t.field();
    let companion = companion_space(t)?;
    let mut tuples = Vec::with_capacity(companion.len());
    for g in &companion {
        let mut mats = Vec::with_capacity(fmt.num_factors());
        for j in 0..fmt.num_factors() {
            let n = fmt.dim(j);
            let partial = |s: &SVTensor, k: usize| {
                let mut e = vec![0u32; fmt.num_vars()];
                e[fmt.slot_range(j).start + k] = 1;
                apolar_act_monomial(s, &Monomial::new(e))
            };
            let t_partials: Vec<SVTensor> = (0..n).map(|k| partial(t, k)).collect();
            let keys: Vec<Monomial> = {
                let mut ks: Vec<Monomial> =
                    t_partials.iter().flat_map(|p| p.terms().map(|(m, _)| m.clone())).collect();
                for l in 0..n {
                    ks.extend(partial(g, l).terms().map(|(m, _)| m.clone()));
                }
                ks.sort();
                ks.dedup();
                ks
            };
            let cols: Vec<Vector> = t_partials
                .iter()
                .map(|p| keys.iter().map(|m| p.coeff(m)).collect())
                .collect();
            let a = Matrix::from_columns(field, keys.len(), &cols);
            let mut x = Matrix::zeros(field, n, n);
            for l in 0..n {
                let gl = partial(g, l);
                let rhs: Vector = keys.iter().map(|m| gl.coeff(m)).collect();
                let mu = a.solve(&rhs).ok_or_else(|| {
                    Error::Consistency("companion element has a partial outside the partials of T".into())
                })?;
                for (k, v) in mu.into_iter().enumerate() {
                    x.set(l, k, v);
                }
            }
            mats.push(x);
        }
        tuples.push(EndoTuple::new(mats));
    }
    build_algebra(fmt, tuples)
}

/// Normalize a spanning set of centroid tuples into a basis starting with the
/// identity and compute the multiplication table.
fn build_algebra(fmt: &Format, tuples: Vec<EndoTuple>) -> Result<CentroidAlgebra> {
    let field = fmt.field();
    let width: usize = fmt.dims().iter().map(|n| n * n).sum();
    let rref = span_rref(field, width, &tuples.iter().map(EndoTuple::flatten).collect::<Vec<_>>());
    let identity = EndoTuple::identity(fmt);
    let id_flat = identity.flatten();
    let mut ech = Echelon::new(field, width);
    for r in &rref {
        ech.insert(r.clone());
    }
    if !ech.contains(&id_flat) {
        return Err(Error::Consistency("identity is missing from the centroid".into()));
    }
    let mut basis = vec![identity];
    // the identity has a 1 in coordinate 0, so it replaces the row pivoting there
    basis.extend(
        rref.into_iter()
            .filter(|r| r.iter().position(|x| !x.is_zero()) != Some(0))
            .map(|r| EndoTuple::from_flat(fmt, &r)),
    );

    let proj: Vec<Vector> = basis.iter().map(|b| b.slot(0).flat().to_vec()).collect();
    let n0 = fmt.dim(0);
    let proj_mat = Matrix::from_columns(field, n0 * n0, &proj);
    if proj_mat.rank() != basis.len() {
        return Err(Error::Consistency("slot-1 projection of the centroid is not injective".into()));
    }
    let mut structure = vec![vec![Vec::new(); basis.len()]; basis.len()];
    for a in 0..basis.len() {
        for b in a..basis.len() {
            let prod = basis[a].mul(&basis[b]);
            let coords = proj_mat.solve(prod.slot(0).flat()).ok_or_else(|| {
                Error::Consistency("centroid is not closed under products".into())
            })?;
            let mut recombined = EndoTuple::zero(fmt);
            for (c, bk) in coords.iter().zip(&basis) {
                recombined = recombined.add(&bk.scale(c));
            }
            if recombined != prod {
                return Err(Error::Consistency("product disagrees between slots".into()));
            }
            structure[a][b] = coords.clone();
            structure[b][a] = coords;
        }
    }
    Ok(CentroidAlgebra { format: fmt.clone(), basis, structure })
}

/// Monic least-degree polynomial vanishing at `a`.
pub fn minimal_polynomial(a: &CentroidElement, alg: &CentroidAlgebra) -> UniPoly {
    let field = alg.field();
    let mut ech = Echelon::new(field, alg.dim());
    let mut powers: Vec<Vector> = Vec::new();
    let mut cur = alg.one();
    loop {
        if !ech.contains(&cur.coords) {
            ech.insert(cur.coords.clone());
            powers.push(cur.coords.clone());
            cur = alg.mul(&cur, a);
            continue;
        }
        let m = Matrix::from_columns(field, alg.dim(), &powers);
        let c = m.solve(&cur.coords).expect("dependent power");
        let mut coeffs: Vec<Scalar> = c.into_iter().map(|x| -x).collect();
        coeffs.push(field.one());
        return UniPoly::new(field, coeffs);
    }
}

/// `r ∘ T`, computed through slot 1 and checked against every other slot.
pub fn act(a: &CentroidElement, alg: &CentroidAlgebra, t: &SVTensor) -> Result<SVTensor> {
    act_tuple(&alg.tuple(a), t)
}

/// `X ∘ T` for an endomorphism tuple, failing if the slots disagree.
pub fn act_tuple(x: &EndoTuple, t: &SVTensor) -> Result<SVTensor> {
    x.check(t.format())?;
    let mut result: Option<SVTensor> = None;
    for j in 0..t.format().num_factors() {
        let g = is_symmetric_image(&mode_apply(t, j, x.slot(j))?).ok_or_else(|| {
            Error::NotInCentroid(format!("slot {} image is not symmetric", j + 1))
        })?;
        match &result {
            None => result = Some(g),
            Some(r) if *r != g => {
                return Err(Error::NotInCentroid(format!(
                    "slot {} disagrees with slot 1",
                    j + 1
                )))
            }
            Some(_) => {}
        }
    }
    Ok(result.unwrap())
}

/// Whether a tuple satisfies the centroid conditions for `T`.
pub fn is_in_centroid(x: &EndoTuple, t: &SVTensor) -> bool {
    act_tuple(x, t).is_ok()
}
