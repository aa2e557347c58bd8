use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Deserialize;
use serde_json::Value;
use svtensor::centroid::{EndoTuple, EndoTupleWire};
use svtensor::{Factor, Field, Format, SVTensor, Scalar};

/// `{"field": ..., "factors": [...], "polynomial": "x1^3 + ..."}`
#[derive(Deserialize)]
struct PolynomialInput {
    field: Field,
    factors: Vec<Factor>,
    polynomial: String,
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Accepts both the term list format and the polynomial string format.
pub fn tensor_from_value(v: Value) -> Result<SVTensor> {
    if v.get("polynomial").is_some() {
        let p: PolynomialInput = serde_json::from_value(v)?;
        let fmt = Format::new(p.field, p.factors)?;
        return Ok(SVTensor::parse(fmt, &p.polynomial)?);
    }
    Ok(serde_json::from_value(v)?)
}

pub fn read_tensor(path: &Path, field: Option<Field>) -> Result<SVTensor> {
    let t = tensor_from_value(read_json(path)?).with_context(|| format!("tensor in {}", path.display()))?;
    match field {
        Some(f) if f != t.field() => Ok(t.to_field(f)?),
        _ => Ok(t),
    }
}

pub fn element_from_value(v: Value, field: Field) -> Result<EndoTuple> {
    let wire: EndoTupleWire = serde_json::from_value(v)?;
    let x = wire.into_tuple()?;
    if x.field() == field {
        Ok(x)
    } else {
        Ok(x.to_field(field)?)
    }
}

pub fn read_element(path: &Path, field: Field) -> Result<EndoTuple> {
    element_from_value(read_json(path)?, field).with_context(|| format!("element in {}", path.display()))
}

/// Comma separated scalars such as `1,0,-1` or `1/2,3`.
pub fn parse_scalars(s: &str, field: Field) -> Result<Vec<Scalar>> {
    s.split(',')
        .map(|w| field.parse_scalar(w.trim()).map_err(Into::into))
        .collect()
}
