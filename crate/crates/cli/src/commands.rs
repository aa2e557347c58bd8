use std::fmt::Write as _;

use anyhow::{anyhow, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use svtensor::apolar::{gradient_fiber_dimension, min_generator_count};
use svtensor::centroid::{centroid_via_apolar, compute_centroid, minimal_polynomial, EndoTuple};
use svtensor::degeneration::{
    build_family, evaluate_and_split, first_admissible, verify_limit, DegenFamily, LimitReport, SplitWitness,
};
use svtensor::normalform::{extract_components, from_components, NormalForm};
use svtensor::splitter::{deepest_nilpotent, split_seeded, SplitResult, Summand, Verdict};
use svtensor::tensor::conciseness;
use svtensor::{Error, SVTensor, Scalar, UniPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Analysis,
    Centroid,
    Split,
    NormalForm,
    Degeneration,
}

/// Everything a command needs; also what an artifact stores to be re-run.
#[derive(Clone, Debug)]
pub struct Request {
    pub tensor: SVTensor,
    pub element: Option<EndoTuple>,
    pub omega: Option<Vec<Scalar>>,
    pub evaluate: Option<Scalar>,
    pub seed: u64,
}

pub struct Outcome {
    pub result: Value,
    pub pretty: String,
}

pub fn run(kind: Kind, req: &Request) -> Result<Outcome> {
    match kind {
        Kind::Analysis => analyze(req),
        Kind::Centroid => centroid(req),
        Kind::Split => split(req),
        Kind::NormalForm => normal_form(req),
        Kind::Degeneration => degenerate(req),
    }
}

#[derive(Serialize)]
struct CentroidReport {
    dimension: usize,
    basis: Vec<EndoTuple>,
    structure_constants: Vec<Vec<Vec<Scalar>>>,
    minimal_polynomials: Vec<UniPoly>,
    apolar_agrees: bool,
}

fn centroid(req: &Request) -> Result<Outcome> {
    let alg = compute_centroid(&req.tensor)?;
    let apolar = centroid_via_apolar(&req.tensor)?;
    if alg.canonical_span() != apolar.canonical_span() {
        return Err(Error::Consistency("the two centroid computations disagree".into()).into());
    }
    let minimal_polynomials: Vec<UniPoly> =
        (0..alg.dim()).map(|k| minimal_polynomial(&alg.basis_element(k), &alg)).collect();
    let mut pretty = format!("format {}\ncentroid dimension {}\n", req.tensor.format(), alg.dim());
    for (k, (x, p)) in alg.basis().iter().zip(&minimal_polynomials).enumerate() {
        writeln!(pretty, "basis element {} (minimal polynomial {p}):\n{x}", k + 1)?;
    }
    let report = CentroidReport {
        dimension: alg.dim(),
        basis: alg.basis().to_vec(),
        structure_constants: alg.structure_constants().to_vec(),
        minimal_polynomials,
        apolar_agrees: true,
    };
    Ok(Outcome { result: serde_json::to_value(report)?, pretty })
}

fn split_value(res: &SplitResult) -> Result<Value> {
    let mut v = serde_json::to_value(res)?;
    v["verdict"] = serde_json::to_value(res.verdict())?;
    Ok(v)
}

fn split(req: &Request) -> Result<Outcome> {
    let res = split_seeded(&req.tensor, req.seed)?;
    let mut pretty = format!("centroid dimension {}\n{}\n", res.centroid_dim, res.verdict());
    for (i, s) in res.summands.iter().enumerate() {
        writeln!(pretty, "summand {}: {}", i + 1, s.tensor)?;
    }
    Ok(Outcome { result: split_value(&res)?, pretty })
}

/// The given element, or the deepest nilpotent of a local centroid.
fn pick_element(req: &Request) -> Result<EndoTuple> {
    if let Some(x) = &req.element {
        return Ok(x.clone());
    }
    let alg = compute_centroid(&req.tensor)?;
    match deepest_nilpotent(&alg, req.seed)? {
        Some((nil, _)) => Ok(alg.tuple(&nil)),
        None => Err(Error::Unsupported(
            "the centroid has no nilpotent element to pick; run split first or pass --element".into(),
        )
        .into()),
    }
}

fn render_normal_form(nf: &NormalForm, operators: Option<&[String]>) -> String {
    let mut out = nf.to_string();
    if let Some(ops) = operators {
        for (i, d) in ops.iter().enumerate() {
            let _ = writeln!(out, "D_{} = {d}", i + 1);
        }
    }
    out
}

fn operator_descriptions(nf: &NormalForm) -> Option<Vec<String>> {
    let vf = from_components(nf.clone()).ok()?;
    let jd = vf.jordan();
    Some(vf.operators.iter().map(|d| d.describe(jd)).collect())
}

fn normal_form(req: &Request) -> Result<Outcome> {
    let x = pick_element(req)?;
    let nf = extract_components(&req.tensor, &x)?;
    let operators = operator_descriptions(&nf);
    let pretty = render_normal_form(&nf, operators.as_deref());
    let result = json!({
        "element": x,
        "normal_form": nf,
        "operators": operators,
    });
    Ok(Outcome { result, pretty })
}

fn render_family(fam: &DegenFamily, limit: &LimitReport, witness: Option<&SplitWitness>) -> String {
    let mut out = String::new();
    let omega: Vec<String> = fam.omega.iter().map(|w| w.to_string()).collect();
    let _ = writeln!(out, "nilpotency index {}, nodes ({})", fam.index, omega.join(", "));
    for (j, s) in fam.summands.iter().enumerate() {
        let _ = writeln!(out, "T^({})(t) = {s}", j + 1);
    }
    if limit.passed {
        let _ = writeln!(out, "S_t = t^{} T + O(t^{})", limit.expected_valuation, fam.index);
    } else {
        let _ = writeln!(out, "limit check FAILED at orders {:?}", limit.discrepancies.iter().map(|d| d.0).collect::<Vec<_>>());
    }
    if let Some(w) = witness {
        let _ = writeln!(out, "fiber at t = {} splits into {} summands:", w.t0, w.summands.len());
        for (j, s) in w.summands.iter().enumerate() {
            let _ = writeln!(out, "  {}: {}", j + 1, s.tensor);
        }
    }
    out
}

fn degenerate(req: &Request) -> Result<Outcome> {
    let x = pick_element(req)?;
    let fam = build_family(&req.tensor, &x, req.omega.as_deref())?;
    let limit = verify_limit(&fam, &req.tensor);
    if !limit.passed {
        return Err(Error::Consistency("the family does not degenerate to the tensor".into()).into());
    }
    let witness = req.evaluate.as_ref().map(|t0| evaluate_and_split(&fam, t0)).transpose()?;
    let pretty = render_family(&fam, &limit, witness.as_ref());
    let result = json!({
        "element": x,
        "family": fam,
        "limit": limit,
        "witness": witness,
    });
    Ok(Outcome { result, pretty })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum AnalysisVerdict {
    DirectSum { summands: usize },
    LimitOfDirectSums { summands: usize },
    TrivialCentroid,
    Undetermined { factor: Option<UniPoly> },
}

impl std::fmt::Display for AnalysisVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnalysisVerdict::DirectSum { summands } => write!(f, "direct sum ({summands} summands)"),
            AnalysisVerdict::LimitOfDirectSums { summands } => {
                write!(f, "limit of {summands}-fold direct sums")
            }
            AnalysisVerdict::TrivialCentroid => write!(f, "trivial centroid"),
            AnalysisVerdict::Undetermined { factor: Some(q) } => {
                write!(f, "undetermined over the working field (factor {q})")
            }
            AnalysisVerdict::Undetermined { factor: None } => write!(f, "undetermined over the working field"),
        }
    }
}

/// Nilpotent analysis of one local summand.
#[derive(Serialize)]
pub struct LocalAnalysis {
    pub summand: usize,
    /// The summand in the ambient coordinates.
    pub tensor: SVTensor,
    /// The summand on the bases of its slot subspaces; the analysis below
    /// uses these coordinates.
    pub local: SVTensor,
    pub centroid_dim: usize,
    pub index: Option<usize>,
    pub element: Option<EndoTuple>,
    pub normal_form: Option<NormalForm>,
    pub operators: Option<Vec<String>>,
    pub family: Option<DegenFamily>,
    pub limit: Option<LimitReport>,
    pub witness: Option<SplitWitness>,
}

#[derive(Serialize)]
pub struct AnalysisReport {
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub notice: Option<String>,
    pub reduced: SVTensor,
    pub centroid_dim: usize,
    pub apolar_agrees: bool,
    pub generator_count: usize,
    pub gradient_fiber_dim: Option<usize>,
    pub verdict: AnalysisVerdict,
    pub split: Value,
    pub locals: Vec<LocalAnalysis>,
}

fn analyze_local(summand: &Summand, position: usize, seed: u64) -> Result<LocalAnalysis> {
    let summand_tensor = &summand.tensor;
    let tensor = &summand.local;
    let centroid_dim = summand.centroid_dim;
    let summand = position;
    let mut local = LocalAnalysis {
        summand,
        tensor: summand_tensor.clone(),
        local: tensor.clone(),
        centroid_dim,
        index: None,
        element: None,
        normal_form: None,
        operators: None,
        family: None,
        limit: None,
        witness: None,
    };
    if centroid_dim < 2 {
        return Ok(local);
    }
    let alg = compute_centroid(tensor)?;
    let Some((nil, index)) = deepest_nilpotent(&alg, seed)? else {
        return Ok(local);
    };
    let x = alg.tuple(&nil);
    let nf = extract_components(tensor, &x)?;
    let fam = build_family(tensor, &x, None)?;
    let limit = verify_limit(&fam, tensor);
    if !limit.passed {
        return Err(Error::Consistency(format!("summand {summand}: the family does not degenerate to it")).into());
    }
    local.witness = Some(first_admissible(&fam)?);
    local.index = Some(index);
    local.operators = operator_descriptions(&nf);
    local.element = Some(x);
    local.normal_form = Some(nf);
    local.family = Some(fam);
    local.limit = Some(limit);
    Ok(local)
}

pub fn analysis_report(t: &SVTensor, seed: u64) -> Result<AnalysisReport> {
    let c = conciseness(t)?;
    let notice = (!c.is_concise()).then(|| {
        format!("tensor is not concise (slot ranks {:?} of {:?}); analyzing its concise reduction", c.ranks, c.dims)
    });
    let reduced = c.reduced.clone();
    let alg = compute_centroid(&reduced)?;
    let apolar = centroid_via_apolar(&reduced)?;
    if alg.canonical_span() != apolar.canonical_span() {
        return Err(Error::Consistency("the two centroid computations disagree".into()).into());
    }
    let generator_count = min_generator_count(&reduced, &reduced.format().degrees())?;
    let gradient_fiber_dim =
        if reduced.format().num_factors() == 1 { Some(gradient_fiber_dimension(&reduced)?) } else { None };
    let res = split_seeded(&reduced, seed)?;
    let locals = res
        .summands
        .iter()
        .enumerate()
        .map(|(i, s)| analyze_local(s, i + 1, seed))
        .collect::<Result<Vec<_>>>()?;
    let verdict = match res.verdict() {
        Verdict::DirectSum { summands } => AnalysisVerdict::DirectSum { summands },
        Verdict::Undetermined { factor } => AnalysisVerdict::Undetermined { factor: Some(factor) },
        Verdict::NotDirectSum => match locals[0].index {
            Some(n) => AnalysisVerdict::LimitOfDirectSums { summands: n },
            None if alg.dim() == 1 => AnalysisVerdict::TrivialCentroid,
            None => AnalysisVerdict::Undetermined { factor: None },
        },
    };
    Ok(AnalysisReport {
        dims: c.dims,
        ranks: c.ranks,
        notice,
        reduced,
        centroid_dim: alg.dim(),
        apolar_agrees: true,
        generator_count,
        gradient_fiber_dim,
        verdict,
        split: split_value(&res)?,
        locals,
    })
}

fn render_analysis(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format {}", r.reduced.format());
    if let Some(n) = &r.notice {
        let _ = writeln!(out, "notice: {n}");
    }
    let _ = writeln!(out, "slot ranks {:?} of {:?}", r.ranks, r.dims);
    let _ = writeln!(out, "centroid dimension {} (both computations agree)", r.centroid_dim);
    let _ = writeln!(out, "minimal generators in top degree {}", r.generator_count);
    if let Some(g) = r.gradient_fiber_dim {
        let _ = writeln!(out, "gradient fiber dimension {g}");
    }
    let _ = writeln!(out, "verdict: {}", r.verdict);
    for l in &r.locals {
        let _ = write!(out, "summand {}: {} (centroid dimension {})", l.summand, l.tensor, l.centroid_dim);
        if l.index.is_some() && l.local != l.tensor {
            let _ = write!(out, "\n  on its own subspaces: {}", l.local);
        }
        match (l.index, &l.normal_form, &l.family, &l.limit) {
            (Some(n), Some(nf), Some(fam), Some(limit)) => {
                let _ = writeln!(out, ", limit of {n}-fold direct sums");
                out.push_str(&render_normal_form(nf, l.operators.as_deref()));
                out.push_str(&render_family(fam, limit, l.witness.as_ref()));
            }
            _ => out.push('\n'),
        }
    }
    out
}

fn analyze(req: &Request) -> Result<Outcome> {
    let report = analysis_report(&req.tensor, req.seed)?;
    Ok(Outcome { pretty: render_analysis(&report), result: serde_json::to_value(&report)? })
}

/// Independent checks on a stored result, beyond recomputing it.
pub fn semantic_checks(kind: Kind, req: &Request, result: &Value) -> Result<Vec<String>> {
    let t = &req.tensor;
    let field = t.field();
    let tensor_at = |v: &Value| -> Result<SVTensor> { Ok(serde_json::from_value(v.clone())?) };
    let summed = |list: &Value, key: &str| -> Result<SVTensor> {
        let items = list.as_array().ok_or_else(|| anyhow!("{key} list missing"))?;
        let mut total = SVTensor::zero(t.format().clone());
        for s in items {
            total = total.add(&tensor_at(&s[key])?);
        }
        Ok(total)
    };
    let mut passed = Vec::new();
    match kind {
        Kind::Centroid => {
            let basis = result["basis"].as_array().ok_or_else(|| anyhow!("basis missing"))?;
            for (k, b) in basis.iter().enumerate() {
                let x = crate::input::element_from_value(b.clone(), field)?;
                if !svtensor::centroid::is_in_centroid(&x, t) {
                    return Err(anyhow!("basis element {} is not in the centroid", k + 1));
                }
            }
            passed.push(format!("{} basis elements satisfy the centroid equations", basis.len()));
        }
        Kind::Split => {
            if summed(&result["summands"], "tensor")? != *t {
                return Err(anyhow!("summands do not add up to the tensor"));
            }
            passed.push("summands add up to the tensor".into());
        }
        Kind::NormalForm => {
            let x = crate::input::element_from_value(result["element"].clone(), field)?;
            if !svtensor::centroid::is_in_centroid(&x, t) {
                return Err(anyhow!("the element is not in the centroid"));
            }
            passed.push("element satisfies the centroid equations".into());
        }
        Kind::Degeneration => {
            if result["limit"]["passed"] != Value::Bool(true) {
                return Err(anyhow!("limit report did not pass"));
            }
            passed.push("limit report passed".into());
            let w = &result["witness"];
            if !w.is_null() {
                if summed(&w["summands"], "tensor")? != tensor_at(&w["fiber"])? {
                    return Err(anyhow!("witness summands do not add up to the fiber"));
                }
                passed.push("witness summands add up to the fiber".into());
            }
        }
        Kind::Analysis => {
            let reduced = tensor_at(&result["reduced"])?;
            let total = {
                let items = result["split"]["summands"].as_array().ok_or_else(|| anyhow!("summands missing"))?;
                let mut acc = SVTensor::zero(reduced.format().clone());
                for s in items {
                    acc = acc.add(&tensor_at(&s["tensor"])?);
                }
                acc
            };
            if total != reduced {
                return Err(anyhow!("summands do not add up to the reduced tensor"));
            }
            passed.push("summands add up to the reduced tensor".into());
        }
    }
    Ok(passed)
}
