//! One-parameter families `S_t` with `S_t = t^{n-1} T + O(t^n)` whose
//! nonzero fibers are direct sums of `n` tensors.

use serde::Serialize;

use crate::centroid::EndoTuple;
use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::matrix::{span_rref, Matrix, Vector};
use crate::normalform::{extract_components, JordanData, NormalForm};
use crate::poly::UniPoly;
use crate::tensor::{apply_linear_maps, conciseness, substitute, Format, PolyTensor, SVTensor};

/// Solve `Σ_j α_j ω_j^{γ-1} = [γ = k]` for `γ = 1..k`.
pub fn vandermonde_coefficients(omega: &[Scalar]) -> Result<Vec<Scalar>> {
    let k = omega.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let field = omega[0].field();
    if let Some(q) = field.size() {
        if (k as u64) > q {
            return Err(Error::FieldTooSmall(k));
        }
    }
    for (i, a) in omega.iter().enumerate() {
        if omega[i + 1..].contains(a) {
            return Err(Error::RepeatedNodes);
        }
    }
    let rows: Vec<Vec<Scalar>> =
        (0..k).map(|g| omega.iter().map(|w| w.pow(g as u64)).collect()).collect();
    let v = Matrix::from_rows(field, rows)?;
    let mut rhs = vec![field.zero(); k];
    rhs[k - 1] = field.one();
    v.solve(&rhs).ok_or(Error::RepeatedNodes)
}

/// `(0, 1, -1, 2, -2, ...)` over ℚ and `(0, 1, ..., n-1)` over `𝔽_p`.
pub fn default_omega(field: Field, n: usize) -> Result<Vec<Scalar>> {
    match field {
        Field::Rational => Ok((0..n as i64)
            .map(|i| {
                let m = (i + 1) / 2;
                field.from_i64(if i % 2 == 1 { m } else { -m })
            })
            .collect()),
        Field::Prime(p) => {
            if (n as u64) > p {
                return Err(Error::FieldTooSmall(n));
            }
            Ok((0..n as i64).map(|i| field.from_i64(i)).collect())
        }
    }
}

/// The degeneration family together with its summands and witness data.
#[derive(Clone, Debug, Serialize)]
pub struct DegenFamily {
    pub format: Format,
    pub index: usize,
    pub omega: Vec<Scalar>,
    /// `alpha[k-1][j-1] = α_{k,j}`.
    pub alpha: Vec<Vec<Scalar>>,
    /// `T_k` in the original coordinates.
    pub components: Vec<SVTensor>,
    /// `T^{(j)}(t) = Σ_{k ≥ j} t^{n-k} α_{k,j} M̃_j(t) ∘ T_k`.
    pub summands: Vec<PolyTensor>,
    pub family: PolyTensor,
    /// `generators[i][j-1]` spans `Ṽ_i^{(j)}(t)`: each entry is a vector of
    /// polynomials in `t`.
    pub generators: Vec<Vec<Vec<Vec<UniPoly>>>>,
    pub jordan: Vec<JordanData>,
}

/// `ω^s · P M^s P^{-1}` for `s < n`, the terms of `M̃(t)` in original
/// coordinates.
fn mtilde_terms(jd: &JordanData, w: &Scalar, n: usize) -> Vec<Matrix> {
    let inv = jd.to_jordan();
    (0..n)
        .map(|s| jd.basis.mul(&jd.partial_inverse.pow(s)).mul(&inv).scale(&w.pow(s as u64)))
        .collect()
}

pub fn build_family(t: &SVTensor, x: &EndoTuple, omega: Option<&[Scalar]>) -> Result<DegenFamily> {
    let nf = extract_components(t, x)?;
    family_from_normal_form(t.format(), &nf, omega)
}

pub fn family_from_normal_form(
    format: &Format,
    nf: &NormalForm,
    omega: Option<&[Scalar]>,
) -> Result<DegenFamily> {
    let field = format.field();
    let n = nf.index;
    let omega = match omega {
        Some(w) => {
            if w.len() != n {
                return Err(Error::Dimension(format!("{} nodes given, {n} needed", w.len())));
            }
            w.to_vec()
        }
        None => default_omega(field, n)?,
    };
    let alpha: Vec<Vec<Scalar>> =
        (1..=n).map(|k| vandermonde_coefficients(&omega[..k])).collect::<Result<_>>()?;
    let back: Vec<Matrix> = nf.jordan.iter().map(|jd| jd.basis.clone()).collect();
    let components: Vec<SVTensor> =
        nf.components.iter().map(|tk| apply_linear_maps(tk, &back)).collect::<Result<_>>()?;

    let mut summands = Vec::with_capacity(n);
    let mut generators: Vec<Vec<Vec<Vec<UniPoly>>>> = vec![Vec::with_capacity(n); nf.jordan.len()];
    for j in 1..=n {
        let maps: Vec<Vec<Matrix>> =
            nf.jordan.iter().map(|jd| mtilde_terms(jd, &omega[j - 1], n)).collect();
        let mut summand = PolyTensor::zero(format.clone());
        for k in j..=n {
            let image = substitute(&components[k - 1], &maps)?;
            let weight = UniPoly::monomial(alpha[k - 1][j - 1].clone(), n - k);
            summand = summand.add(&image.scale(&weight));
        }
        summands.push(summand);
        for (i, jd) in nf.jordan.iter().enumerate() {
            let gens = jd
                .bottoms(j)
                .into_iter()
                .map(|b| {
                    let bottom = jd.basis.column(b);
                    let images: Vec<Vector> = maps[i].iter().map(|a| a.mul_vec(&bottom)).collect();
                    (0..jd.dim())
                        .map(|r| UniPoly::new(field, images.iter().map(|v| v[r].clone()).collect()))
                        .collect()
                })
                .collect();
            generators[i].push(gens);
        }
    }
    let family = summands.iter().fold(PolyTensor::zero(format.clone()), |acc, s| acc.add(s));
    Ok(DegenFamily {
        format: format.clone(),
        index: n,
        omega,
        alpha,
        components,
        summands,
        family,
        generators,
        jordan: nf.jordan.clone(),
    })
}

/// Outcome of checking `S_t = t^{n-1} T + O(t^n)`.
#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub passed: bool,
    pub expected_valuation: usize,
    /// `(s, coefficient of t^s minus its expected value)` for each failing `s`.
    pub discrepancies: Vec<(usize, SVTensor)>,
}

pub fn verify_limit(fam: &DegenFamily, t: &SVTensor) -> LimitReport {
    let order = fam.index - 1;
    let mut discrepancies = Vec::new();
    for s in 0..=order {
        let mut diff = fam.family.coefficient(s);
        if s == order {
            diff = diff.sub(t);
        }
        if !diff.is_zero() {
            discrepancies.push((s, diff));
        }
    }
    LimitReport { passed: discrepancies.is_empty(), expected_valuation: order, discrepancies }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummand {
    pub tensor: SVTensor,
    /// Per slot, a matrix whose columns span `Ṽ_i^{(j)}(t0)`.
    pub subspaces: Vec<Matrix>,
}

/// A fiber of the family written as an explicit direct sum.
#[derive(Clone, Debug, Serialize)]
pub struct SplitWitness {
    pub t0: Scalar,
    pub fiber: SVTensor,
    pub summands: Vec<WitnessSummand>,
}

fn eval_vector(v: &[UniPoly], t0: &Scalar) -> Vector {
    v.iter().map(|p| p.eval(t0)).collect()
}

/// Evaluate the family at `t0` and certify the fiber as a direct sum of `n`
/// concise summands on complementary subspaces.
pub fn evaluate_and_split(fam: &DegenFamily, t0: &Scalar) -> Result<SplitWitness> {
    if t0.is_zero() {
        return Err(Error::DegenerateParameter("t0 = 0 is the limit point".into()));
    }
    let field = fam.format.field();
    let slots = fam.format.num_factors();
    let mut subspaces: Vec<Vec<Matrix>> = vec![Vec::with_capacity(slots); fam.index];
    for i in 0..slots {
        let dim = fam.format.dim(i);
        let mut all: Vec<Vector> = Vec::with_capacity(dim);
        for (j, gens) in fam.generators[i].iter().enumerate() {
            let cols: Vec<Vector> = gens.iter().map(|g| eval_vector(g, t0)).collect();
            all.extend(cols.iter().cloned());
            subspaces[j].push(Matrix::from_columns(field, dim, &cols));
        }
        let square = Matrix::from_columns(field, dim, &all);
        if all.len() != dim || square.determinant().is_zero() {
            return Err(Error::DegenerateParameter(format!(
                "t0 = {t0}: slot {} subspaces are not complementary",
                i + 1
            )));
        }
    }
    let fiber = fam.family.evaluate(t0);
    let mut summands = Vec::with_capacity(fam.index);
    let mut total = SVTensor::zero(fam.format.clone());
    for (s, subs) in fam.summands.iter().zip(subspaces) {
        let tensor = s.evaluate(t0);
        let c = conciseness(&tensor)?;
        for (i, sub) in subs.iter().enumerate() {
            let span: Vec<Vector> = (0..sub.cols()).map(|k| sub.column(k)).collect();
            let essential: Vec<Vector> =
                (0..c.embeddings[i].cols()).map(|k| c.embeddings[i].column(k)).collect();
            if span_rref(field, fam.format.dim(i), &span) != essential {
                return Err(Error::DegenerateParameter(format!(
                    "t0 = {t0}: a summand is not concise on its slot {} subspace",
                    i + 1
                )));
            }
        }
        total = total.add(&tensor);
        summands.push(WitnessSummand { tensor, subspaces: subs });
    }
    if total != fiber {
        return Err(Error::Consistency("summands do not add up to the fiber".into()));
    }
    Ok(SplitWitness { t0: t0.clone(), fiber, summands })
}

/// Parameters tried in order by [`first_admissible`].
pub const RETRY_LIMIT: i64 = 64;

/// The witness at the first admissible `t0` in `1, 2, 3, ...`.
pub fn first_admissible(fam: &DegenFamily) -> Result<SplitWitness> {
    let field = fam.format.field();
    let mut last = None;
    for v in 1..=RETRY_LIMIT {
        let t0 = field.from_i64(v);
        if t0.is_zero() {
            break;
        }
        match evaluate_and_split(fam, &t0) {
            Ok(w) => return Ok(w),
            Err(e @ Error::DegenerateParameter(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::DegenerateParameter("no admissible parameter".into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centroid::{compute_centroid, is_in_centroid};
    use crate::splitter::split;
    use crate::tensor::apply_linear_map;

    const Q: Field = Field::Rational;

    fn q(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| Q.from_i64(x)).collect()
    }

    fn ver(n: usize, d: usize, s: &str) -> SVTensor {
        SVTensor::parse(Format::veronese(Q, n, d).unwrap(), s).unwrap()
    }

    fn example_l() -> Matrix {
        let mut l = Matrix::zeros(Q, 6, 6);
        for (i, j) in [(0, 1), (1, 2), (3, 4)] {
            l.set(i, j, Q.one());
        }
        l
    }

    const EXAMPLE: &str = "x1*x4*x6 - 2*x2*x1*x4 - x1^2*x5 + 3*x3*x1^2 + 3*x2^2*x1";

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde_coefficients(&q(&[1])).unwrap(), q(&[1]));
        assert_eq!(vandermonde_coefficients(&q(&[1, 0])).unwrap(), q(&[1, -1]));
        assert_eq!(
            vandermonde_coefficients(&q(&[1, 0, -1])).unwrap(),
            vec![Q.frac(1, 2), Q.from_i64(-1), Q.frac(1, 2)]
        );
        assert!(matches!(vandermonde_coefficients(&q(&[1, 1])), Err(Error::RepeatedNodes)));
        let f2 = Field::Prime(2);
        let w: Vec<Scalar> = (0..3).map(|i| f2.from_i64(i)).collect();
        assert!(matches!(vandermonde_coefficients(&w), Err(Error::FieldTooSmall(3))));
        assert_eq!(default_omega(Q, 5).unwrap(), q(&[0, 1, -1, 2, -2]));
    }

    #[test]
    fn alpha_solves_the_power_sums() {
        let w = q(&[0, 1, -1, 2, -2]);
        for k in 1..=w.len() {
            let a = vandermonde_coefficients(&w[..k]).unwrap();
            for g in 1..=k {
                let s = a.iter().zip(&w).fold(Q.zero(), |acc, (x, y)| acc + x * &y.pow(g as u64 - 1));
                assert_eq!(s, if g == k { Q.one() } else { Q.zero() });
            }
        }
    }

    #[test]
    fn cubic_example_family() {
        let t = ver(6, 3, EXAMPLE);
        let x = EndoTuple::new(vec![example_l()]);
        assert!(is_in_centroid(&x, &t));
        let fam = build_family(&t, &x, Some(&q(&[1, 0, -1]))).unwrap();
        let report = verify_limit(&fam, &t);
        assert!(report.passed, "{:?}", report.discrepancies);
        assert_eq!(fam.family.valuation(), Some(2));

        let w = evaluate_and_split(&fam, &Q.one()).unwrap();
        assert_eq!(w.summands.len(), 3);
        // x21 -> x21 + x20, x32 -> x32 + x31 + x30
        let mut a = Matrix::identity(Q, 6);
        a.set(4, 3, Q.one());
        a.set(1, 0, Q.one());
        a.set(2, 0, Q.one());
        let t1 = apply_linear_map(&ver(6, 3, "x6*x4*x1 - x4*x1^2 + 1/2*x1^3"), 0, &a).unwrap();
        // α_{3,2} = -1 in the definition of S_t, so the x32^3 term enters with -1
        let t2 = ver(6, 3, "x4*x1^2 - x1^3");
        let mut b = Matrix::identity(Q, 6);
        b.set(1, 0, Q.from_i64(-1));
        b.set(2, 0, Q.one());
        let t3 = apply_linear_map(&ver(6, 3, "1/2*x1^3"), 0, &b).unwrap();
        let got: Vec<&SVTensor> = w.summands.iter().map(|s| &s.tensor).collect();
        assert_eq!(got, vec![&t1, &t2, &t3]);
        let dims: Vec<usize> = w.summands.iter().map(|s| s.subspaces[0].cols()).collect();
        assert_eq!(dims, vec![3, 2, 1]);
    }

    #[test]
    fn corrupted_family_is_caught() {
        let t = ver(6, 3, EXAMPLE);
        let x = EndoTuple::new(vec![example_l()]);
        let mut fam = build_family(&t, &x, Some(&q(&[1, 0, -1]))).unwrap();
        fam.family = fam.family.add(&fam.summands[2].scale(&UniPoly::constant(Q.frac(1, 5))));
        let report = verify_limit(&fam, &t);
        assert!(!report.passed);
        assert_eq!(report.discrepancies[0].0, 0);
    }

    #[test]
    fn trivial_index_is_constant() {
        let t = ver(3, 3, "x1^3 + x2^3 + x3^3 + x1*x2*x3");
        let fam = build_family(&t, &EndoTuple::new(vec![Matrix::zeros(Q, 3, 3)]), None).unwrap();
        assert_eq!(fam.family.degree(), Some(0));
        assert_eq!(fam.family.coefficient(0), t);
        assert!(verify_limit(&fam, &t).passed);
        assert_eq!(first_admissible(&fam).unwrap().summands.len(), 1);
    }

    #[test]
    fn dual_numbers_split_into_cubes() {
        let f = ver(3, 3, "3*x1^2*x3 + 3*x1*x2^2");
        let l = Matrix::from_i64_rows(Q, &[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        let fam = build_family(&f, &EndoTuple::new(vec![l]), Some(&q(&[0, 1, -1]))).unwrap();
        assert!(verify_limit(&fam, &f).passed);
        let w = first_admissible(&fam).unwrap();
        assert_eq!(w.summands.len(), 3);
        for s in &w.summands {
            assert_eq!(s.subspaces[0].cols(), 1);
            assert_eq!(conciseness(&s.tensor).unwrap().ranks, vec![1]);
        }
        let res = split(&w.fiber).unwrap();
        assert_eq!(res.summands.len(), 3);
    }

    #[test]
    fn x2y_is_a_limit_of_two_cubes() {
        let f = ver(2, 3, "x1^2*x2");
        let l = Matrix::from_i64_rows(Q, &[&[0, 1], &[0, 0]]);
        let x = EndoTuple::new(vec![l]);
        assert!(compute_centroid(&f).unwrap().element(&x).is_ok());
        let fam = build_family(&f, &x, None).unwrap();
        assert!(verify_limit(&fam, &f).passed);
        let w = evaluate_and_split(&fam, &Q.one()).unwrap();
        assert_eq!(w.summands.len(), 2);
        assert!(w.summands.iter().all(|s| conciseness(&s.tensor).unwrap().ranks == vec![1]));
        assert_eq!(split(&w.fiber).unwrap().summands.len(), 2);
        assert!(matches!(evaluate_and_split(&fam, &Q.zero()), Err(Error::DegenerateParameter(_))));
    }

    #[test]
    fn segre_family() {
        let fmt = Format::segre(Q, &[2, 2, 2]).unwrap();
        // multiplication tensor of k[e]/(e^2)
        let t = SVTensor::parse(fmt, "a1*b1*c2 + a1*b2*c1 + a2*b1*c1").unwrap();
        let n = Matrix::from_i64_rows(Q, &[&[0, 1], &[0, 0]]);
        let x = EndoTuple::diagonal(&n, 3);
        let fam = build_family(&t, &x, None).unwrap();
        assert!(verify_limit(&fam, &t).passed);
        let w = first_admissible(&fam).unwrap();
        assert_eq!(w.summands.len(), 2);
        assert_eq!(split(&w.fiber).unwrap().summands.len(), 2);
    }
}
