//! Primitive idempotents of the centroid and the finest direct-sum
//! decomposition they induce.

use std::fmt;

use serde::Serialize;

use crate::centroid::{act, compute_centroid, CentroidAlgebra, CentroidElement, EndoTuple};
use crate::error::{Error, Result};
use crate::matrix::{span_rref, Echelon, Matrix, Vector};
use crate::poly::{split_linear_factors_seeded, UniPoly, DEFAULT_SEED};
use crate::tensor::{conciseness, SVTensor};

/// Outcome of the idempotent splitting loop.
#[derive(Clone, Debug, Serialize)]
pub struct Idempotents {
    pub elements: Vec<CentroidElement>,
    /// True when every block turned out local over the working field.
    pub complete: bool,
    /// A factor without roots in the working field that blocked a split.
    pub obstruction: Option<UniPoly>,
}

/// Minimal polynomial of `b` inside the block algebra with unit `e`.
fn block_min_poly(alg: &CentroidAlgebra, e: &CentroidElement, b: &CentroidElement) -> UniPoly {
    let field = alg.field();
    let mut ech = Echelon::new(field, alg.dim());
    let mut powers: Vec<Vector> = Vec::new();
    let mut cur = e.clone();
    loop {
        if ech.contains(&cur.coords) {
            let m = Matrix::from_columns(field, alg.dim(), &powers);
            let c = m.solve(&cur.coords).expect("dependent power");
            let mut coeffs: Vec<_> = c.into_iter().map(|x| -x).collect();
            coeffs.push(field.one());
            return UniPoly::new(field, coeffs);
        }
        ech.insert(cur.coords.clone());
        powers.push(cur.coords.clone());
        cur = alg.mul(&cur, b);
    }
}

/// `p(b)` inside the block with unit `e`.
fn eval_in_block(
    alg: &CentroidAlgebra,
    e: &CentroidElement,
    b: &CentroidElement,
    p: &UniPoly,
) -> CentroidElement {
    let mut acc = alg.zero();
    for c in p.coeffs().iter().rev() {
        acc = alg.mul(&acc, b).add(&e.scale(c));
    }
    acc
}

/// Try to split block `e` using `b = e·a`. Returns the finer blocks and any
/// non-linear factor met on the way.
fn split_block(
    alg: &CentroidAlgebra,
    e: &CentroidElement,
    a: &CentroidElement,
    seed: u64,
) -> Result<(Vec<CentroidElement>, Option<UniPoly>)> {
    let b = alg.mul(e, a);
    let chi = block_min_poly(alg, e, &b);
    let fac = split_linear_factors_seeded(&chi, seed)?;
    let obstruction = fac.residual_factors.first().map(|(q, _)| q.clone());
    let blocks = fac.coprime_blocks();
    if blocks.len() < 2 {
        return Ok((vec![e.clone()], obstruction));
    }
    let mut out = Vec::with_capacity(blocks.len());
    for q in &blocks {
        let cof = chi.exact_div(q);
        let inv = cof.inv_mod(q).ok_or_else(|| {
            Error::Consistency("coprime factors of a minimal polynomial share a root".into())
        })?;
        let interp = cof.mul(&inv).rem(&chi);
        out.push(eval_in_block(alg, e, &b, &interp));
    }
    Ok((out, obstruction))
}

pub fn primitive_idempotents(alg: &CentroidAlgebra) -> Result<Idempotents> {
    primitive_idempotents_seeded(alg, DEFAULT_SEED)
}

/// Sweep the basis, splitting blocks by the CRT idempotents of minimal
/// polynomials, until nothing splits.
pub fn primitive_idempotents_seeded(alg: &CentroidAlgebra, seed: u64) -> Result<Idempotents> {
    let mut blocks = vec![alg.one()];
    let mut changed = true;
    while changed {
        changed = false;
        for k in 1..alg.dim() {
            let a = alg.basis_element(k);
            let mut next = Vec::with_capacity(blocks.len());
            for e in &blocks {
                let (parts, _) = split_block(alg, e, &a, seed)?;
                changed |= parts.len() > 1;
                next.extend(parts);
            }
            blocks = next;
        }
    }
    let mut obstruction = None;
    'outer: for e in &blocks {
        for k in 1..alg.dim() {
            let (_, obs) = split_block(alg, e, &alg.basis_element(k), seed)?;
            if obs.is_some() {
                obstruction = obs;
                break 'outer;
            }
        }
    }
    Ok(Idempotents { complete: obstruction.is_none(), elements: blocks, obstruction })
}

/// One summand of a direct-sum decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct Summand {
    /// The summand in the ambient coordinates.
    pub tensor: SVTensor,
    /// The summand written on the bases of its slot subspaces.
    pub local: SVTensor,
    /// Per slot, an `n_j × r_j` matrix whose columns span the slot subspace.
    pub subspaces: Vec<Matrix>,
    pub idempotent: EndoTuple,
    pub centroid_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitResult {
    pub summands: Vec<Summand>,
    pub complete: bool,
    pub obstruction: Option<UniPoly>,
    pub centroid_dim: usize,
}

/// Whether `T` is a direct sum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    DirectSum { summands: usize },
    NotDirectSum,
    Undetermined { factor: UniPoly },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::DirectSum { summands } => write!(f, "direct sum ({summands} summands)"),
            Verdict::NotDirectSum => write!(f, "not a direct sum"),
            Verdict::Undetermined { factor } => {
                write!(f, "undetermined over the working field (factor {factor})")
            }
        }
    }
}

impl SplitResult {
    pub fn verdict(&self) -> Verdict {
        if self.summands.len() >= 2 {
            Verdict::DirectSum { summands: self.summands.len() }
        } else if let Some(q) = &self.obstruction {
            Verdict::Undetermined { factor: q.clone() }
        } else {
            Verdict::NotDirectSum
        }
    }
}

pub fn split(t: &SVTensor) -> Result<SplitResult> {
    split_seeded(t, DEFAULT_SEED)
}

/// Split `T` along the primitive idempotents of its centroid and verify the
/// decomposition.
pub fn split_seeded(t: &SVTensor, seed: u64) -> Result<SplitResult> {
    let alg = compute_centroid(t)?;
    let idem = primitive_idempotents_seeded(&alg, seed)?;
    split_with(t, &alg, &idem)
}

pub fn split_with(t: &SVTensor, alg: &CentroidAlgebra, idem: &Idempotents) -> Result<SplitResult> {
    let fmt = t.format();
    let field = t.field();
    let mut summands = Vec::with_capacity(idem.elements.len());
    let mut total = SVTensor::zero(fmt.clone());
    for f in &idem.elements {
        let ti = act(f, alg, t)?;
        if ti.is_zero() {
            return Err(Error::Consistency("an idempotent kills the tensor".into()));
        }
        let x = alg.tuple(f);
        let c = conciseness(&ti)?;
        let mut subspaces = Vec::with_capacity(fmt.num_factors());
        for j in 0..fmt.num_factors() {
            let span = x.slot(j).column_space_basis();
            let essential: Vec<Vector> =
                (0..c.embeddings[j].cols()).map(|k| c.embeddings[j].column(k)).collect();
            if span != essential {
                return Err(Error::Consistency(format!(
                    "summand is not concise on its slot {} subspace",
                    j + 1
                )));
            }
            subspaces.push(Matrix::from_columns(field, fmt.dim(j), &span));
        }
        let centroid_dim = compute_centroid(&c.reduced).map(|a| a.dim()).or_else(|e| match e {
            // a summand can have total degree below 3 only if T does
            Error::Unsupported(_) => Ok(1),
            other => Err(other),
        })?;
        total = total.add(&ti);
        summands.push(Summand { tensor: ti, local: c.reduced, subspaces, idempotent: x, centroid_dim });
    }
    if total != *t {
        return Err(Error::Consistency("summands do not add up to the tensor".into()));
    }
    for j in 0..fmt.num_factors() {
        let cols: Vec<Vector> = summands
            .iter()
            .flat_map(|s| (0..s.subspaces[j].cols()).map(move |k| s.subspaces[j].column(k)))
            .collect();
        if span_rref(field, fmt.dim(j), &cols).len() != cols.len() {
            return Err(Error::Consistency(format!("slot {} subspaces are not independent", j + 1)));
        }
    }
    let local_total: usize = summands.iter().map(|s| s.centroid_dim).sum();
    if local_total != alg.dim() {
        return Err(Error::Consistency(format!(
            "summand centroids have total dimension {local_total}, expected {}",
            alg.dim()
        )));
    }
    Ok(SplitResult {
        summands,
        complete: idem.complete,
        obstruction: idem.obstruction.clone(),
        centroid_dim: alg.dim(),
    })
}

pub fn is_direct_sum(t: &SVTensor) -> Result<Verdict> {
    Ok(split(t)?.verdict())
}

/// In a local algebra over the working field, the nilpotent part `a - λ` of
/// the basis element (or of the sum of all basis elements) with the largest
/// nilpotency index. `None` when the algebra is the field itself or some
/// minimal polynomial is not a power of a linear factor.
pub fn deepest_nilpotent(alg: &CentroidAlgebra, seed: u64) -> Result<Option<(CentroidElement, usize)>> {
    if alg.dim() < 2 {
        return Ok(None);
    }
    let mut candidates: Vec<CentroidElement> = (1..alg.dim()).map(|k| alg.basis_element(k)).collect();
    let sum = candidates.iter().fold(alg.zero(), |acc, a| acc.add(a));
    candidates.push(sum);
    let mut best: Option<(CentroidElement, usize)> = None;
    for a in candidates {
        let chi = crate::centroid::minimal_polynomial(&a, alg);
        let fac = split_linear_factors_seeded(&chi, seed)?;
        if !fac.splits_completely() || fac.roots.len() != 1 {
            return Ok(None);
        }
        let (lambda, index) = &fac.roots[0];
        let nil = a.sub(&alg.one().scale(lambda));
        if best.as_ref().is_none_or(|(_, n)| index > n) {
            best = Some((nil, *index));
        }
    }
    Ok(best.filter(|(_, n)| *n >= 2))
}
