//! Acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use svtensor::apolar::{companion_space, min_generator_count};
use svtensor::centroid::{
    act_tuple, centroid_via_apolar, compute_centroid, is_in_centroid, CentroidAlgebra, EndoTuple,
};
use svtensor::degeneration::{build_family, evaluate_and_split, first_admissible, verify_limit};
use svtensor::generate::{Generator, NilpotentSample};
use svtensor::matrix::{Echelon, Vector};
use svtensor::normalform::{
    extract_components, from_components, reconstruct, standard_jordan, veronese_form, NormalForm,
};
use svtensor::splitter::{primitive_idempotents, split, split_with};
use svtensor::tensor::{apply_linear_map, conciseness};
use svtensor::{Field, Format, Matrix, SVTensor, UniPoly};

const Q: Field = Field::Rational;
const PRIMES: [u64; 2] = [101, 65537];

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn ver(field: Field, n: usize, d: usize, s: &str) -> SVTensor {
    SVTensor::parse(Format::veronese(field, n, d).unwrap(), s).unwrap()
}

fn segre222() -> SVTensor {
    SVTensor::parse(Format::segre(Q, &[2, 2, 2]).unwrap(), "a1*b1*c1 + a1*b2*c2 + a2*b1*c2 + a2*b2*c1").unwrap()
}

const CUBIC: &str = "x1*x4*x6 - 2*x2*x1*x4 - x1^2*x5 + 3*x3*x1^2 + 3*x2^2*x1";

/// `x32 -> 0, x31 -> x32, x30 -> x31, x20 -> x21` on the ordered basis
/// `x32 x31 x30 x21 x20 x10`.
fn cubic_shift() -> Matrix {
    Matrix::from_i64_rows(
        Q,
        &[
            &[0, 1, 0, 0, 0, 0],
            &[0, 0, 1, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 1, 0],
            &[0, 0, 0, 0, 0, 0],
            &[0, 0, 0, 0, 0, 0],
        ],
    )
}

fn criterion_1() -> Check {
    let t = segre222();
    let alg = ok(compute_centroid(&t), "centroid")?;
    ensure(alg.dim() == 2, || format!("dimension {}", alg.dim()))?;
    let swap = Matrix::from_i64_rows(Q, &[&[0, 1], &[1, 0]]);
    let expected = [EndoTuple::identity(t.format()), EndoTuple::diagonal(&swap, 3)];
    let mut ech = Echelon::new(Q, expected[0].flatten().len());
    for x in &expected {
        ech.insert(x.flatten());
    }
    let span = ech.into_rref();
    ensure(alg.canonical_span() == span, || "basis is not {identity, swap}".into())?;
    let res = ok(split(&t), "split")?;
    let fmt = t.format().clone();
    let sum_all = "a1*b1*c1 + a1*b1*c2 + a1*b2*c1 + a1*b2*c2 + a2*b1*c1 + a2*b1*c2 + a2*b2*c1 + a2*b2*c2";
    let alt = "a1*b1*c1 - a1*b1*c2 - a1*b2*c1 + a1*b2*c2 - a2*b1*c1 + a2*b1*c2 + a2*b2*c1 - a2*b2*c2";
    let half = Q.frac(1, 2);
    let t1 = SVTensor::parse(fmt.clone(), sum_all).unwrap().scale(&half);
    let t2 = SVTensor::parse(fmt, alt).unwrap().scale(&half);
    let mut got: Vec<SVTensor> = res.summands.iter().map(|s| s.tensor.clone()).collect();
    got.sort_by_key(|s| s.to_string());
    let mut want = vec![t1, t2];
    want.sort_by_key(|s| s.to_string());
    ensure(got == want, || format!("summands {got:?}"))?;
    Ok("dimension 2, summands ½(a1+a2)(b1+b2)(c1+c2) and ½(a1−a2)(b1−b2)(c1−c2)".into())
}

fn criterion_2() -> Check {
    let t = ver(Q, 6, 3, CUBIC);
    let l = cubic_shift();
    let x = EndoTuple::new(vec![l.clone()]);
    ensure(is_in_centroid(&x, &t), || "(L) does not satisfy the centroid equations".into())?;
    ensure(l.minimal_polynomial() == UniPoly::monomial(Q.one(), 3), || {
        format!("minimal polynomial {}", l.minimal_polynomial())
    })?;
    let nf = ok(extract_components(&t, &x), "normal form")?;
    ensure(nf.jordan[0].basis.is_identity(), || "Jordan basis differs from the given one".into())?;
    let want = [ver(Q, 6, 3, "x6*x4*x1"), ver(Q, 6, 3, "-x4*x1^2"), ver(Q, 6, 3, "x1^3")];
    for k in 1..=3 {
        ensure(*nf.component(k) == want[k - 1], || format!("T_{k} = {}", nf.component(k)))?;
    }
    ensure(ok(reconstruct(&nf), "reconstruct")? == t, || "reconstruction differs".into())?;

    let omega = [Q.one(), Q.zero(), Q.from_i64(-1)];
    let fam = ok(build_family(&t, &x, Some(&omega)), "family")?;
    let report = verify_limit(&fam, &t);
    ensure(report.passed, || format!("limit fails at {:?}", report.discrepancies))?;
    ensure(fam.family.valuation() == Some(2) && fam.family.coefficient(2) == t, || {
        "S_t is not t^2 T + O(t^3)".into()
    })?;
    let w = ok(evaluate_and_split(&fam, &Q.one()), "witness")?;
    // x21 -> x21 + x20, x32 -> x32 + x31 + x30
    let mut a = Matrix::identity(Q, 6);
    a.set(4, 3, Q.one());
    a.set(1, 0, Q.one());
    a.set(2, 0, Q.one());
    let t1 = apply_linear_map(&ver(Q, 6, 3, "x6*x4*x1 - x4*x1^2 + 1/2*x1^3"), 0, &a).unwrap();
    let t2 = ver(Q, 6, 3, "x4*x1^2 - x1^3");
    let mut b = Matrix::identity(Q, 6);
    b.set(1, 0, Q.from_i64(-1));
    b.set(2, 0, Q.one());
    let t3 = apply_linear_map(&ver(Q, 6, 3, "1/2*x1^3"), 0, &b).unwrap();
    let got: Vec<&SVTensor> = w.summands.iter().map(|s| &s.tensor).collect();
    ensure(got == vec![&t1, &t2, &t3], || "S_1 summands differ".into())?;
    Ok("(L) in centroid, minimal polynomial x^3, T_3, T_2, T_1 exact, S_t = t^2 T + O(t^3), S_1 = 3 summands".into())
}

/// Instances for the dimension formula and the oracle comparison.
fn structure_corpus() -> Vec<(String, SVTensor)> {
    let mut out = vec![
        ("2x2x2 example".to_string(), segre222()),
        ("worked cubic (reduced)".into(), conciseness(&ver(Q, 6, 3, CUBIC)).unwrap().reduced),
        ("dual numbers cubic".into(), ver(Q, 3, 3, "3*x1^2*x3 + 3*x1*x2^2")),
        ("x^2 y".into(), ver(Q, 2, 3, "x1^2*x2")),
        ("x^3 + y^3".into(), ver(Q, 2, 3, "x1^3 + x2^3")),
        ("x^3 + 6xy^2".into(), ver(Q, 2, 3, "x1^3 + 6*x1*x2^2")),
        ("ternary Fermat".into(), ver(Q, 3, 3, "x1^3 + x2^3 + x3^3")),
        ("binary quartic x^3 y".into(), ver(Q, 2, 4, "x1^3*x2")),
    ];
    let mut g = Generator::new(2024);
    for dims in [[2, 2, 2], [2, 2, 3], [2, 3, 3], [3, 3, 3], [3, 3, 3]] {
        let fmt = Format::segre(Q, &dims).unwrap();
        out.push((format!("random {dims:?}"), g.random_concise(&fmt, 0.5)));
    }
    for (n, d) in [(2, 3), (2, 4), (3, 3), (3, 4), (2, 4), (3, 3)] {
        let fmt = Format::veronese(Q, n, d).unwrap();
        out.push((format!("random S^{d}(k^{n})"), g.random_concise(&fmt, 0.5)));
    }
    let sums: [(&[usize], &[Vec<usize>]); 3] = [
        (&[1, 1, 1], &[vec![2, 2, 2], vec![1, 1, 1]]),
        (&[3], &[vec![2], vec![1]]),
        (&[2, 1], &[vec![2, 2], vec![1, 1]]),
    ];
    for (degrees, parts) in sums {
        out.push((format!("direct sum {degrees:?}"), g.random_direct_sum(Q, degrees, parts).unwrap()));
    }
    for index in [2, 3] {
        let degrees = g.random_degrees();
        let s = g.random_nilpotent_sample(Q, &degrees, index, 5).unwrap();
        out.push((format!("nilpotent sample n={index}"), s.tensor));
    }
    out
}

fn nilpotent_corpus() -> Vec<NilpotentSample> {
    let mut g = Generator::new(77);
    (0..50)
        .map(|i| {
            let degrees = g.random_degrees();
            g.random_nilpotent_sample(Q, &degrees, 1 + i % 4, 8).unwrap()
        })
        .collect()
}

fn convert_sample(s: &NilpotentSample, field: Field) -> NilpotentSample {
    NilpotentSample {
        tensor: s.tensor.to_field(field).unwrap(),
        element: s.element.to_field(field).unwrap(),
        index: s.index,
        components: s.components.iter().map(|c| c.to_field(field).unwrap()).collect(),
        jordan: Vec::new(),
    }
}

/// Centroid dimensions, checked against the generator count and the
/// companion space.
fn dimension_formula(corpus: &[(String, SVTensor)]) -> Result<Vec<usize>, String> {
    let mut dims = Vec::with_capacity(corpus.len());
    for (name, t) in corpus {
        let alg = ok(compute_centroid(t), name)?;
        let gens = ok(min_generator_count(t, &t.format().degrees()), name)?;
        let companion = ok(companion_space(t), name)?.len();
        ensure(alg.dim() == 1 + gens && alg.dim() == companion, || {
            format!("{name}: dim {} vs 1 + {gens} vs {companion}", alg.dim())
        })?;
        dims.push(alg.dim());
    }
    Ok(dims)
}

fn oracle_equivalence(corpus: &[(String, SVTensor)]) -> Result<(), String> {
    for (name, t) in corpus {
        let a = ok(compute_centroid(t), name)?;
        let b = ok(centroid_via_apolar(t), name)?;
        ensure(a.canonical_span() == b.canonical_span(), || format!("{name}: spans differ"))?;
    }
    Ok(())
}

fn round_trips(corpus: &[NilpotentSample]) -> Result<Vec<usize>, String> {
    let mut indices = Vec::with_capacity(corpus.len());
    for (i, s) in corpus.iter().enumerate() {
        let nf = ok(extract_components(&s.tensor, &s.element), &format!("sample {i}"))?;
        ensure(nf.index == s.index, || format!("sample {i}: index {} vs {}", nf.index, s.index))?;
        ensure(ok(reconstruct(&nf), "reconstruct")? == s.tensor, || format!("sample {i}: round trip"))?;
        let alg = ok(compute_centroid(&s.tensor), &format!("sample {i}"))?;
        ok(alg.element(&s.element), &format!("sample {i}: element not re-detected"))?;
        indices.push(nf.index);
    }
    Ok(indices)
}

fn rank_of(vectors: impl IntoIterator<Item = Vector>, field: Field, width: usize) -> usize {
    let mut ech = Echelon::new(field, width);
    for v in vectors {
        ech.insert(v);
    }
    ech.rank()
}

fn certificates(corpus: &[NilpotentSample]) -> Result<Vec<usize>, String> {
    let mut counts = Vec::with_capacity(corpus.len());
    for (i, s) in corpus.iter().enumerate() {
        let label = format!("sample {i}");
        let t = &s.tensor;
        let fam = ok(build_family(t, &s.element, None), &label)?;
        ensure(verify_limit(&fam, t).passed, || format!("{label}: limit"))?;
        let w = ok(first_admissible(&fam), &label)?;
        ensure(w.summands.len() == s.index, || format!("{label}: {} summands", w.summands.len()))?;
        ensure(w.fiber == fam.family.evaluate(&w.t0), || format!("{label}: fiber"))?;
        let total = w.summands.iter().fold(SVTensor::zero(t.format().clone()), |acc, x| acc.add(&x.tensor));
        ensure(total == w.fiber, || format!("{label}: summands do not add up"))?;
        let fmt = t.format();
        for j in 0..fmt.num_factors() {
            let cols = w.summands.iter().flat_map(|x| (0..x.subspaces[j].cols()).map(|k| x.subspaces[j].column(k)));
            ensure(rank_of(cols, t.field(), fmt.dim(j)) == fmt.dim(j), || {
                format!("{label}: slot {} subspaces are not complementary", j + 1)
            })?;
            for x in &w.summands {
                let c = ok(conciseness(&x.tensor), &label)?;
                ensure(c.ranks[j] == x.subspaces[j].cols(), || format!("{label}: summand not concise"))?;
            }
        }
        counts.push(w.summands.len());
    }
    Ok(counts)
}

fn criterion_3(corpus: &[(String, SVTensor)], dims: &mut Vec<usize>) -> Check {
    *dims = dimension_formula(corpus)?;
    Ok(format!("{} instances: dim = 1 + generators = companion dimension", corpus.len()))
}

fn criterion_4(corpus: &[(String, SVTensor)]) -> Check {
    oracle_equivalence(corpus)?;
    Ok(format!("{} instances: both centroid computations give the same subspace", corpus.len()))
}

fn criterion_5(corpus: &[NilpotentSample], indices: &mut Vec<usize>) -> Check {
    *indices = round_trips(corpus)?;
    let max_dim = corpus.iter().flat_map(|s| s.tensor.format().dims()).max().unwrap_or(0);
    Ok(format!(
        "{} samples (indices 1..={}, dims ≤ {max_dim}) reconstruct exactly and the element is re-detected",
        corpus.len(),
        indices.iter().max().unwrap_or(&0)
    ))
}

fn criterion_6(corpus: &[NilpotentSample]) -> Check {
    certificates(corpus)?;
    Ok(format!("{} samples: limit verified, witness splits into n concise complementary summands", corpus.len()))
}

fn criterion_7() -> Check {
    // n = 2: F = G + Σ x_i ∂H/∂y_i with y = x1, x3 and their partners x2, x4
    let g = ver(Q, 5, 3, "x1^3 + 2*x1*x3*x5 - x5^3 + x3^2*x5");
    let h = ver(Q, 5, 3, "x1^2*x3 - 4*x3^3");
    let f = ver(Q, 5, 3, "x1^3 + 2*x1*x3*x5 - x5^3 + x3^2*x5 + 2*x2*x1*x3 + x4*x1^2 - 12*x4*x3^2");
    let l = standard_jordan(Q, &[2, 2, 1]).shift;
    let vf = ok(veronese_form(&f, &l), "veronese form")?;
    ensure(*vf.normal_form.component(2) == h, || "H not recovered".into())?;
    ensure(*vf.normal_form.component(1) == g, || "G not recovered".into())?;
    ensure(ok(vf.summation(), "summation")? == f, || "summation differs".into())?;

    let fmt = Format::veronese(Q, 3, 3).unwrap();
    let zero = SVTensor::zero(fmt.clone());
    let nf = NormalForm {
        index: 3,
        components: vec![zero.clone(), zero, ver(Q, 3, 3, "x1^3")],
        jordan: vec![standard_jordan(Q, &[3])],
    };
    let vf = ok(from_components(nf), "operator form")?;
    let got = ok(vf.summation(), "summation")?;
    ensure(got == ver(Q, 3, 3, "3*x1^2*x3 + 3*x1*x2^2"), || format!("got {got}"))?;
    Ok("n = 2 shape recovers G and H; (x32)^3 gives 3 x32^2 x30 + 3 x32 x31^2".into())
}

fn algebra_properties(name: &str, t: &SVTensor, alg: &CentroidAlgebra) -> Result<(), String> {
    let basis = alg.basis();
    let fmt = t.format();
    ensure(alg.tuple(&alg.one()) == EndoTuple::identity(fmt), || format!("{name}: unit"))?;
    for x in basis {
        for y in basis {
            let xy = x.mul(y);
            ensure(xy == y.mul(x), || format!("{name}: not commutative"))?;
            ensure(is_in_centroid(&xy, t), || format!("{name}: not closed"))?;
        }
    }
    for j in 0..fmt.num_factors() {
        let width = fmt.dim(j) * fmt.dim(j);
        let rank = rank_of(basis.iter().map(|x| x.slot(j).flat().to_vec()), t.field(), width);
        ensure(rank == basis.len(), || format!("{name}: slot {} projection not injective", j + 1))?;
    }
    let images = basis.iter().map(|x| act_tuple(x, t).map(|s| s.to_dense()));
    let images = ok(images.collect::<Result<Vec<_>, _>>(), name)?;
    let width = fmt.dimension();
    ensure(rank_of(images, t.field(), width) == basis.len(), || format!("{name}: r∘T = 0 for some r ≠ 0"))?;

    let idem = ok(primitive_idempotents(alg), name)?;
    let es = &idem.elements;
    for (i, e) in es.iter().enumerate() {
        for (k, f) in es.iter().enumerate() {
            let p = alg.mul(e, f);
            let want = if i == k { e.clone() } else { alg.zero() };
            ensure(p == want, || format!("{name}: idempotents {i}, {k} not orthogonal"))?;
        }
    }
    let total = es.iter().fold(alg.zero(), |acc, e| acc.add(e));
    ensure(total == alg.one(), || format!("{name}: idempotents do not sum to 1"))?;
    if idem.complete {
        let res = ok(split_with(t, alg, &idem), name)?;
        for s in &res.summands {
            let again = ok(split(&s.local), name)?;
            ensure(again.summands.len() == 1, || format!("{name}: a summand splits further"))?;
        }
    }
    Ok(())
}

fn criterion_8(corpus: &[(String, SVTensor)], samples: &[NilpotentSample]) -> Check {
    let mut count = 0;
    let extra = samples.iter().take(10).enumerate().map(|(i, s)| (format!("sample {i}"), s.tensor.clone()));
    for (name, t) in corpus.iter().cloned().chain(extra) {
        let alg = ok(compute_centroid(&t), &name)?;
        algebra_properties(&name, &t, &alg)?;
        count += 1;
    }
    Ok(format!("{count} centroids: commutative unital closed, injective projections and action, idempotents"))
}

fn criterion_9(
    corpus: &[(String, SVTensor)],
    samples: &[NilpotentSample],
    dims_q: &[usize],
    indices_q: &[usize],
) -> Check {
    for p in PRIMES {
        let field = Field::prime(p).unwrap();
        let fp: Vec<(String, SVTensor)> =
            corpus.iter().map(|(n, t)| (n.clone(), t.to_field(field).unwrap())).collect();
        for (name, t) in &fp {
            let c = ok(conciseness(t), name)?;
            ensure(c.is_concise(), || format!("F_{p}: {name} loses conciseness"))?;
        }
        let dims = dimension_formula(&fp).map_err(|e| format!("F_{p}: {e}"))?;
        ensure(dims == dims_q, || format!("F_{p}: centroid dimensions {dims:?} vs {dims_q:?}"))?;
        oracle_equivalence(&fp).map_err(|e| format!("F_{p}: {e}"))?;
        let converted: Vec<NilpotentSample> = samples.iter().map(|s| convert_sample(s, field)).collect();
        let indices = round_trips(&converted).map_err(|e| format!("F_{p}: {e}"))?;
        ensure(indices == indices_q, || format!("F_{p}: nilpotency indices differ"))?;
        let counts = certificates(&converted).map_err(|e| format!("F_{p}: {e}"))?;
        ensure(counts == indices_q, || format!("F_{p}: summand counts differ"))?;
    }
    Ok("criteria 3-6 repeated over F_101 and F_65537 with identical outcomes".into())
}

fn report(number: usize, limit: Option<Duration>, run: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    let outcome = match (outcome, limit) {
        (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:.0?}")),
        (o, _) => o,
    };
    match &outcome {
        Ok(msg) => println!("PASS criterion {number}: {msg} [{elapsed:.2?}]"),
        Err(msg) => println!("FAIL criterion {number}: {msg} [{elapsed:.2?}]"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    let corpus = structure_corpus();
    let samples = nilpotent_corpus();
    let mut dims_q = Vec::new();
    let mut indices_q = Vec::new();
    let results = [
        report(1, Some(Duration::from_secs(1)), criterion_1),
        report(2, Some(Duration::from_secs(5)), criterion_2),
        report(3, None, || criterion_3(&corpus, &mut dims_q)),
        report(4, None, || criterion_4(&corpus)),
        report(5, None, || criterion_5(&samples, &mut indices_q)),
        report(6, None, || criterion_6(&samples)),
        report(7, None, criterion_7),
        report(8, None, || criterion_8(&corpus, &samples)),
        report(9, None, || criterion_9(&corpus, &samples, &dims_q, &indices_q)),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
