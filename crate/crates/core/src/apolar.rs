//! Graded pieces of the apolar ideal, minimal generator counts and the
//! companion space `{G : V_j^∨ ⌟_j G ⊆ V_j^∨ ⌟_j T for all j}`.
//!
//! Dual-ring elements are [`SVTensor`]s whose format carries the dual flag.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{span_rref, Echelon, Vector};
use crate::tensor::{
    apolar_act_monomial, conciseness, solve_homogeneous, Format, Monomial, SVTensor,
};

/// `Ann(T)` in one multidegree, with a reduced echelon basis.
#[derive(Clone, Debug, Serialize)]
pub struct GradedPiece {
    pub degree: Vec<usize>,
    pub basis: Vec<SVTensor>,
    /// Number of dual monomials of this multidegree.
    pub ambient_dim: usize,
}

impl GradedPiece {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim - self.basis.len()
    }
}

fn dual_format(t: &SVTensor, deg: &[usize]) -> Result<Format> {
    if deg.len() != t.format().num_factors() {
        return Err(Error::Dimension(format!(
            "multidegree has {} entries, format has {} factors",
            deg.len(),
            t.format().num_factors()
        )));
    }
    Ok(t.format().with_degrees(deg).to_dual())
}

fn vectors_to_tensors(fmt: &Format, basis: &[Monomial], vs: Vec<Vector>) -> Vec<SVTensor> {
    vs.into_iter()
        .map(|v| {
            let mut g = SVTensor::zero(fmt.clone());
            for (m, c) in basis.iter().zip(&v) {
                g.add_term(m.clone(), c);
            }
            g
        })
        .collect()
}

/// Kernel of the catalecticant `r ↦ r ⌟ T` on dual forms of multidegree `deg`.
pub fn ann_piece(t: &SVTensor, deg: &[usize]) -> Result<GradedPiece> {
    let fmt = dual_format(t, deg)?;
    let field = t.field();
    let monos = fmt.basis();
    let images: Vec<BTreeMap<Monomial, _>> =
        monos.iter().map(|r| apolar_act_monomial(t, r).coeff_map().clone()).collect();
    let kernel = solve_homogeneous(field, &images);
    let kernel = span_rref(field, monos.len(), &kernel);
    Ok(GradedPiece {
        degree: deg.to_vec(),
        basis: vectors_to_tensors(&fmt, &monos, kernel),
        ambient_dim: monos.len(),
    })
}

/// Number of minimal generators of `Ann(T)` in multidegree `deg`: the
/// dimension of `Ann(T)_deg` modulo the products of linear dual forms with
/// lower-degree elements of the ideal.
pub fn min_generator_count(t: &SVTensor, deg: &[usize]) -> Result<usize> {
    let piece = ann_piece(t, deg)?;
    let fmt = dual_format(t, deg)?;
    let monos = fmt.basis();
    let index: BTreeMap<&Monomial, usize> = monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let field = t.field();
    let mut ech = Echelon::new(field, monos.len());
    for j in 0..deg.len() {
        if deg[j] == 0 {
            continue;
        }
        let mut lower = deg.to_vec();
        lower[j] -= 1;
        let below = ann_piece(t, &lower)?;
        for g in &below.basis {
            for v in fmt.slot_range(j) {
                let mut row = vec![field.zero(); monos.len()];
                for (m, c) in g.terms() {
                    let mut e = m.exps().to_vec();
                    e[v] += 1;
                    row[index[&Monomial::new(e)]] = c.clone();
                }
                ech.insert(row);
            }
        }
    }
    Ok(piece.dim() - ech.rank())
}

/// Echelon basis of `{G : ∂G/∂x_{j,l} ∈ span_k ∂T/∂x_{j,k} for all j, l}`.
pub fn companion_space(t: &SVTensor) -> Result<Vec<SVTensor>> {
    let c = conciseness(t)?;
    if !c.is_concise() {
        return Err(Error::NotConcise { ranks: c.ranks, dims: c.dims });
    }
    let fmt = t.format();
    let field = t.field();
    let monos = fmt.basis();

    // For every slot, the linear functionals vanishing on the partials of T.
    let mut annihilators: Vec<(Vec<Monomial>, Vec<Vector>)> = Vec::new();
    for j in 0..fmt.num_factors() {
        let lower = fmt.with_degree(j, fmt.degree(j) - 1);
        let lower_monos = lower.basis();
        let partials: Vec<BTreeMap<Monomial, _>> = (0..fmt.dim(j))
            .map(|k| {
                let mut e = vec![0u32; fmt.num_vars()];
                e[fmt.slot_range(j).start + k] = 1;
                apolar_act_monomial(t, &Monomial::new(e)).coeff_map().clone()
            })
            .collect();
        // λ ranges over the kernel of the matrix with rows the partials
        let columns: Vec<BTreeMap<usize, _>> = lower_monos
            .iter()
            .map(|m| {
                partials
                    .iter()
                    .enumerate()
                    .filter_map(|(k, p)| p.get(m).map(|c| (k, c.clone())))
                    .collect()
            })
            .collect();
        let lambdas = solve_homogeneous(field, &columns);
        annihilators.push((lower_monos, lambdas));
    }

    let columns: Vec<BTreeMap<(usize, usize, usize), _>> = monos
        .iter()
        .map(|m| {
            let mut col = BTreeMap::new();
            for (j, (lower_monos, lambdas)) in annihilators.iter().enumerate() {
                let pos: BTreeMap<&Monomial, usize> =
                    lower_monos.iter().enumerate().map(|(i, x)| (x, i)).collect();
                for (l, v) in fmt.slot_range(j).enumerate() {
                    let ml = m.exps()[v];
                    if ml == 0 {
                        continue;
                    }
                    let mut e = m.exps().to_vec();
                    e[v] -= 1;
                    let idx = pos[&Monomial::new(e)];
                    let w = field.from_i64(ml as i64);
                    for (s, lam) in lambdas.iter().enumerate() {
                        if !lam[idx].is_zero() {
                            col.insert((j, l, s), &w * &lam[idx]);
                        }
                    }
                }
            }
            col
        })
        .collect();
    let kernel = solve_homogeneous(field, &columns);
    let kernel = span_rref(field, monos.len(), &kernel);
    Ok(vectors_to_tensors(fmt, &monos, kernel))
}

/// Dimension of the gradient fiber through a concise form: the number of
/// minimal generators of `Ann(F)` in the top degree.
pub fn gradient_fiber_dimension(f: &SVTensor) -> Result<usize> {
    if f.format().num_factors() != 1 {
        return Err(Error::Unsupported("gradient fibers are defined for a single factor".into()));
    }
    let c = conciseness(f)?;
    if !c.is_concise() {
        return Err(Error::NotConcise { ranks: c.ranks, dims: c.dims });
    }
    min_generator_count(f, &[f.format().degree(0)])
}
