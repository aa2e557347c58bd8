//! Seeded random instances: concise tensors, direct sums and tensors built
//! forwards from a prescribed nilpotent normal form.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::centroid::EndoTuple;
use crate::error::Result;
use crate::field::Field;
use crate::matrix::Matrix;
use crate::normalform::{assemble, original_shift, rebase, standard_jordan, JordanData};
use crate::tensor::{apply_linear_maps, conciseness, Factor, Format, Monomial, SVTensor};

const ATTEMPTS: usize = 200;

pub struct Generator {
    rng: ChaCha8Rng,
}

/// A tensor together with the nilpotent element it was built from.
#[derive(Clone, Debug)]
pub struct NilpotentSample {
    pub tensor: SVTensor,
    pub element: EndoTuple,
    pub index: usize,
    /// `T_k` in the standard Jordan coordinates used for the construction.
    pub components: Vec<SVTensor>,
    pub jordan: Vec<JordanData>,
}

impl Generator {
    pub fn new(seed: u64) -> Generator {
        Generator { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    /// A nonzero integer in `[-bound, bound]`.
    pub fn nonzero(&mut self, bound: i64) -> i64 {
        let v = self.rng.gen_range(1..=bound);
        if self.rng.gen_bool(0.5) {
            v
        } else {
            -v
        }
    }

    fn fill(&mut self, fmt: &Format, allowed: impl Fn(&Monomial) -> bool, density: f64) -> SVTensor {
        let field = fmt.field();
        let mut t = SVTensor::zero(fmt.clone());
        for m in fmt.basis() {
            if allowed(&m) && self.rng.gen_bool(density) {
                let c = field.from_i64(self.nonzero(5));
                t.add_term(m, &c);
            }
        }
        t
    }

    pub fn random_tensor(&mut self, fmt: &Format, density: f64) -> SVTensor {
        self.fill(fmt, |_| true, density)
    }

    /// A random concise tensor; panics if none is found, which for the
    /// densities used here does not happen.
    pub fn random_concise(&mut self, fmt: &Format, density: f64) -> SVTensor {
        for _ in 0..ATTEMPTS {
            let t = self.random_tensor(fmt, density);
            if !t.is_zero() && conciseness(&t).map(|c| c.is_concise()).unwrap_or(false) {
                return t;
            }
        }
        panic!("no concise tensor found in format {fmt}");
    }

    /// An integer matrix of determinant ±1, so it stays invertible over every
    /// prime field.
    pub fn unimodular(&mut self, field: Field, n: usize) -> Matrix {
        let mut lower = Matrix::identity(field, n);
        let mut upper = Matrix::identity(field, n);
        for i in 0..n {
            for j in 0..i {
                if self.rng.gen_bool(0.5) {
                    lower.set(i, j, field.from_i64(self.rng.gen_range(-2..=2)));
                }
                if self.rng.gen_bool(0.5) {
                    upper.set(j, i, field.from_i64(self.rng.gen_range(-2..=2)));
                }
            }
        }
        let p = lower.mul(&upper);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.rng);
        let cols: Vec<_> = order.iter().map(|&k| p.column(k)).collect();
        Matrix::from_columns(field, n, &cols)
    }

    /// Direct sum of random concise summands with per-slot dimensions
    /// `parts[i]`, followed by a random unimodular change of basis.
    pub fn random_direct_sum(
        &mut self,
        field: Field,
        degrees: &[usize],
        parts: &[Vec<usize>],
    ) -> Result<SVTensor> {
        let dims: Vec<usize> =
            (0..degrees.len()).map(|j| parts.iter().map(|p| p[j]).sum()).collect();
        let fmt = Format::new(field, dims.iter().zip(degrees).map(|(&n, &d)| Factor::new(n, d)).collect())?;
        let mut total = SVTensor::zero(fmt.clone());
        let mut offsets = vec![0usize; degrees.len()];
        for part in parts {
            let sub = Format::new(field, part.iter().zip(degrees).map(|(&n, &d)| Factor::new(n, d)).collect())?;
            let local = self.random_concise(&sub, 0.6);
            let inclusions: Vec<Matrix> = (0..degrees.len())
                .map(|j| {
                    let mut a = Matrix::zeros(field, dims[j], part[j]);
                    for i in 0..part[j] {
                        a.set(offsets[j] + i, i, field.one());
                    }
                    a
                })
                .collect();
            total = total.add(&apply_linear_maps(&local, &inclusions)?);
            for j in 0..degrees.len() {
                offsets[j] += part[j];
            }
        }
        let change: Vec<Matrix> = dims.iter().map(|&n| self.unimodular(field, n)).collect();
        apply_linear_maps(&total, &change)
    }

    /// Column heights with maximum `index` and total at most `max_dim`.
    pub fn jordan_shape(&mut self, index: usize, max_dim: usize) -> Vec<usize> {
        let target = self.range(index, max_dim.max(index));
        let mut heights = vec![index];
        let mut total = index;
        while total < target {
            let h = self.range(1, index.min(target - total));
            heights.push(h);
            total += h;
        }
        heights.sort_unstable_by(|a, b| b.cmp(a));
        heights
    }

    /// Build `T = Σ_k Σ_δ M^δ ∘ T_k` from random components on the prescribed
    /// bottoms, then change coordinates by a random unimodular matrix.
    pub fn random_nilpotent_sample(
        &mut self,
        field: Field,
        degrees: &[usize],
        index: usize,
        max_dim: usize,
    ) -> Result<NilpotentSample> {
        for _ in 0..ATTEMPTS {
            let shapes: Vec<Vec<usize>> =
                degrees.iter().map(|_| self.jordan_shape(index, max_dim)).collect();
            let standard: Vec<JordanData> = shapes.iter().map(|h| standard_jordan(field, h)).collect();
            let fmt = Format::new(
                field,
                standard.iter().zip(degrees).map(|(jd, &d)| Factor::new(jd.dim(), d)).collect(),
            )?;
            let mut components = Vec::with_capacity(index);
            for k in 1..=index {
                let allowed: Vec<Vec<bool>> = standard
                    .iter()
                    .map(|jd| {
                        let mut a = vec![false; jd.dim()];
                        for b in jd.bottoms(k) {
                            a[b] = true;
                        }
                        a
                    })
                    .collect();
                let f = fmt.clone();
                let ok = move |m: &Monomial| {
                    allowed.iter().enumerate().all(|(j, al)| {
                        m.slot(&f, j).iter().zip(al).all(|(&e, &a)| e == 0 || a)
                    })
                };
                components.push(self.fill(&fmt, ok, 0.7));
            }
            if components[index - 1].is_zero() {
                continue;
            }
            let jordan: Vec<JordanData> = standard
                .iter()
                .map(|jd| rebase(jd, &self.unimodular(field, jd.dim())))
                .collect();
            let tensor = assemble(&components, &jordan)?;
            if !conciseness(&tensor)?.is_concise() {
                continue;
            }
            let element = EndoTuple::new(jordan.iter().map(original_shift).collect());
            return Ok(NilpotentSample { tensor, element, index, components, jordan });
        }
        Err(crate::error::Error::Consistency("could not generate a concise sample".into()))
    }

    /// A random format for nilpotent samples: Veronese cubics, Segre triples
    /// or a mixed `S^2 ⊗ V` format.
    pub fn random_degrees(&mut self) -> Vec<usize> {
        match self.range(0, 2) {
            0 => vec![3],
            1 => vec![1, 1, 1],
            _ => vec![2, 1],
        }
    }
}
