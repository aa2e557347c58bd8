//! Segre-Veronese tensors `S^{d_1}V_1 ⊗ ... ⊗ S^{d_e}V_e` and the actions of
//! endomorphism tuples on them.
//!
//! Coefficients are stored in the plain monomial basis: a tensor is a
//! multihomogeneous polynomial `Σ c_m x^m`, and the apolarity action is the
//! honest partial derivative. Factors of `1/d` only enter through
//! [`desymmetrize`] and [`mode_apply`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use crate::matrix::{Echelon, Matrix, Vector};
use crate::poly::UniPoly;

/// Exponent vector of one slot.
pub type Exponents = Vec<u32>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub dim: usize,
    pub degree: usize,
}

impl Factor {
    pub fn new(dim: usize, degree: usize) -> Factor {
        Factor { dim, degree }
    }
}

/// Shape of a tensor space together with its field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Format {
    field: Field,
    factors: Vec<Factor>,
    dual: bool,
    offsets: Vec<usize>,
}

impl Format {
    /// A user-facing format: positive dimensions and degrees, and over `F_p`
    /// with some degree at least 2 the characteristic must exceed the total
    /// degree.
    pub fn new(field: Field, factors: Vec<Factor>) -> Result<Format> {
        if let Some(f) = factors.iter().find(|f| f.degree == 0) {
            return Err(Error::Format(format!("factor of dimension {} has degree 0", f.dim)));
        }
        let total: usize = factors.iter().map(|f| f.degree).sum();
        if let Field::Prime(p) = field {
            if factors.iter().any(|f| f.degree >= 2) && p <= total as u64 {
                return Err(Error::CharacteristicTooSmall { p, bound: total as u64 });
            }
        }
        Format::graded(field, factors)
    }

    /// Like [`Format::new`] but allows degree-0 factors, as produced by
    /// differentiation.
    pub fn graded(field: Field, factors: Vec<Factor>) -> Result<Format> {
        if factors.is_empty() {
            return Err(Error::Format("a format needs at least one factor".into()));
        }
        if factors.iter().any(|f| f.dim == 0) {
            return Err(Error::Format("factor dimensions must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(factors.len() + 1);
        let mut acc = 0;
        for f in &factors {
            offsets.push(acc);
            acc += f.dim;
        }
        offsets.push(acc);
        Ok(Format { field, factors, dual: false, offsets })
    }

    pub fn segre(field: Field, dims: &[usize]) -> Result<Format> {
        Format::new(field, dims.iter().map(|&n| Factor::new(n, 1)).collect())
    }

    pub fn veronese(field: Field, dim: usize, degree: usize) -> Result<Format> {
        Format::new(field, vec![Factor::new(dim, degree)])
    }

    /// Same shape viewed as a space of dual-ring elements.
    pub fn to_dual(&self) -> Format {
        Format { dual: true, ..self.clone() }
    }

    pub fn to_primal(&self) -> Format {
        Format { dual: false, ..self.clone() }
    }

    pub fn is_dual(&self) -> bool {
        self.dual
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Same shape over another field (no validity checks).
    pub fn with_field(&self, field: Field) -> Format {
        Format { field, ..self.clone() }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self, j: usize) -> usize {
        self.factors[j].dim
    }

    pub fn degree(&self, j: usize) -> usize {
        self.factors[j].degree
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.degree).collect()
    }

    pub fn total_degree(&self) -> usize {
        self.factors.iter().map(|f| f.degree).sum()
    }

    pub fn num_vars(&self) -> usize {
        self.offsets[self.factors.len()]
    }

    pub fn slot_range(&self, j: usize) -> Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    pub fn with_degree(&self, j: usize, degree: usize) -> Format {
        let mut factors = self.factors.clone();
        factors[j].degree = degree;
        Format { dual: self.dual, ..Format::graded(self.field, factors).unwrap() }
    }

    pub fn with_degrees(&self, degrees: &[usize]) -> Format {
        let factors =
            self.factors.iter().zip(degrees).map(|(f, &d)| Factor::new(f.dim, d)).collect();
        Format { dual: self.dual, ..Format::graded(self.field, factors).unwrap() }
    }

    pub fn with_dim(&self, j: usize, dim: usize) -> Format {
        let mut factors = self.factors.clone();
        factors[j].dim = dim;
        Format { dual: self.dual, ..Format::graded(self.field, factors).unwrap() }
    }

    /// All exponent vectors of slot `j`, in graded-lex order.
    pub fn slot_monomials(&self, j: usize) -> Vec<Exponents> {
        exponent_vectors(self.dim(j), self.degree(j))
    }

    /// Full monomial basis of the space, in storage order.
    pub fn basis(&self) -> Vec<Monomial> {
        let mut out = vec![Vec::new()];
        for j in 0..self.num_factors() {
            let slot = self.slot_monomials(j);
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<u32>| {
                    slot.iter().map(move |m| {
                        let mut v = prefix.clone();
                        v.extend_from_slice(m);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(Monomial).collect()
    }

    pub fn dimension(&self) -> usize {
        self.factors.iter().map(|f| binomial(f.dim + f.degree - 1, f.degree)).product()
    }

    pub fn check_monomial(&self, m: &Monomial) -> Result<()> {
        if m.0.len() != self.num_vars() {
            return Err(Error::Format(format!(
                "monomial has {} exponents, format has {} variables",
                m.0.len(),
                self.num_vars()
            )));
        }
        for j in 0..self.num_factors() {
            let deg: u32 = m.slot(self, j).iter().sum();
            if deg as usize != self.degree(j) {
                return Err(Error::Format(format!(
                    "slot {} has degree {deg}, expected {}",
                    j + 1,
                    self.degree(j)
                )));
            }
        }
        Ok(())
    }

    /// Variable name of index `i` in slot `j`.
    pub fn var_name(&self, j: usize, i: usize) -> String {
        if self.num_factors() == 1 {
            format!("x{}", i + 1)
        } else if self.num_factors() <= 23 {
            format!("{}{}", (b'a' + j as u8) as char, i + 1)
        } else {
            format!("v{}_{}", j + 1, i + 1)
        }
    }
}

impl Serialize for Format {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            field: Field,
            factors: &'a [Factor],
            #[serde(skip_serializing_if = "std::ops::Not::not")]
            dual: bool,
        }
        Wire { field: self.field, factors: &self.factors, dual: self.dual }.serialize(s)
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.factors.iter().map(|x| format!("S^{}(k^{})", x.degree, x.dim)).collect();
        write!(f, "{} over {}", parts.join(" ⊗ "), self.field)?;
        if self.dual {
            write!(f, " (dual)")?;
        }
        Ok(())
    }
}

/// All exponent vectors of length `n` summing to `d`, graded-lex (`x1^d` first).
pub fn exponent_vectors(n: usize, d: usize) -> Vec<Exponents> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Exponents>) {
        if n == 1 {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=d).rev() {
            prefix.push(a);
            rec(n - 1, d - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d as u32, &mut Vec::with_capacity(n), &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Flattened exponent vector across all slots.
///
/// Ordered so that, slot by slot, higher powers of earlier variables come
/// first (`x1^2 < x1 x2 < x2^2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Monomial {
        Monomial(exps)
    }

    pub fn from_slots(slots: &[Exponents]) -> Monomial {
        Monomial(slots.concat())
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn slot<'a>(&'a self, fmt: &Format, j: usize) -> &'a [u32] {
        &self.0[fmt.slot_range(j)]
    }

    pub fn slots(&self, fmt: &Format) -> Vec<Exponents> {
        (0..fmt.num_factors()).map(|j| self.slot(fmt, j).to_vec()).collect()
    }

    /// Replace slot `j` (laid out per `fmt`) by `new`, which may have another length.
    pub fn replace_slot(&self, fmt: &Format, j: usize, new: &[u32]) -> Monomial {
        let r = fmt.slot_range(j);
        let mut v = Vec::with_capacity(self.0.len() - r.len() + new.len());
        v.extend_from_slice(&self.0[..r.start]);
        v.extend_from_slice(new);
        v.extend_from_slice(&self.0[r.end..]);
        Monomial(v)
    }

    pub fn degree_in(&self, fmt: &Format, j: usize) -> u32 {
        self.slot(fmt, j).iter().sum()
    }
}

/// A multihomogeneous polynomial of the given format.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SVTensor {
    format: Format,
    coeffs: BTreeMap<Monomial, Scalar>,
}

impl SVTensor {
    pub fn zero(format: Format) -> SVTensor {
        SVTensor { format, coeffs: BTreeMap::new() }
    }

    /// From a coefficient map; zero entries are dropped.
    pub fn from_map(format: Format, coeffs: BTreeMap<Monomial, Scalar>) -> SVTensor {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        SVTensor { format, coeffs }
    }

    /// From `(per-slot exponents, coefficient)` pairs; repeated keys add up.
    pub fn from_terms(format: Format, terms: Vec<(Vec<Exponents>, Scalar)>) -> Result<SVTensor> {
        let mut t = SVTensor::zero(format);
        for (slots, c) in terms {
            if slots.len() != t.format.num_factors() {
                return Err(Error::Format(format!(
                    "term has {} slots, format has {}",
                    slots.len(),
                    t.format.num_factors()
                )));
            }
            for (j, s) in slots.iter().enumerate() {
                if s.len() != t.format.dim(j) {
                    return Err(Error::Format(format!(
                        "slot {} exponent vector has length {}, expected {}",
                        j + 1,
                        s.len(),
                        t.format.dim(j)
                    )));
                }
            }
            if c.field() != t.format.field() {
                return Err(Error::FieldMismatch(c.field(), t.format.field()));
            }
            let m = Monomial::from_slots(&slots);
            t.format.check_monomial(&m)?;
            t.add_term(m, &c);
        }
        Ok(t)
    }

    /// Parse a polynomial such as `"a1*b1*c1 - 1/2*a2*b2^2"` (slot letters
    /// `a, b, c, ...`, or `x` when there is a single factor).
    pub fn parse(format: Format, s: &str) -> Result<SVTensor> {
        let field = format.field();
        let mut t = SVTensor::zero(format);
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() || cleaned == "0" {
            return Ok(t);
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for ch in cleaned.chars() {
            let after_caret = cur.ends_with('^');
            if (ch == '+' || ch == '-') && !after_caret {
                if !cur.is_empty() {
                    terms.push((neg, std::mem::take(&mut cur)));
                    neg = false;
                }
                // consecutive signs combine, as in `a + -2*b`
                neg ^= ch == '-';
            } else {
                cur.push(ch);
            }
        }
        if cur.is_empty() {
            return Err(Error::Parse(format!("trailing sign in {s:?}")));
        }
        terms.push((neg, cur));

        for (neg, term) in terms {
            let mut coeff = field.one();
            let mut exps = vec![0u32; t.format.num_vars()];
            for factor in term.split('*') {
                if factor.is_empty() {
                    return Err(Error::Parse(format!("empty factor in {term:?}")));
                }
                if factor.starts_with(|c: char| c.is_ascii_digit()) {
                    coeff *= &field.parse_scalar(factor)?;
                    continue;
                }
                let (var, pow) = match factor.split_once('^') {
                    Some((v, p)) => (
                        v,
                        p.parse::<u32>()
                            .map_err(|_| Error::Parse(format!("bad exponent in {factor:?}")))?,
                    ),
                    None => (factor, 1),
                };
                let (j, i) = parse_var(&t.format, var)?;
                exps[t.format.slot_range(j).start + i] += pow;
            }
            if neg {
                coeff = -coeff;
            }
            let m = Monomial(exps);
            t.format.check_monomial(&m)?;
            t.add_term(m, &coeff);
        }
        Ok(t)
    }

    pub fn format(&self) -> &Format {
        &self.format
    }

    pub fn field(&self) -> Field {
        self.format.field()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.coeffs.iter()
    }

    pub fn coeff_map(&self) -> &BTreeMap<Monomial, Scalar> {
        &self.coeffs
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.coeffs.get(m).cloned().unwrap_or_else(|| self.field().zero())
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn assert_same_format(&self, other: &SVTensor) {
        assert_eq!(
            self.format.factors, other.format.factors,
            "tensor formats differ: {} vs {}",
            self.format, other.format
        );
        assert_eq!(self.field(), other.field(), "tensor fields differ");
    }

    pub fn add(&self, other: &SVTensor) -> SVTensor {
        self.assert_same_format(other);
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &SVTensor) -> SVTensor {
        self.assert_same_format(other);
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_term(m.clone(), &-c);
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> SVTensor {
        if c.is_zero() {
            return SVTensor::zero(self.format.clone());
        }
        SVTensor {
            format: self.format.clone(),
            coeffs: self.coeffs.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    /// Dense coordinates on [`Format::basis`].
    pub fn to_dense(&self) -> Vector {
        self.format.basis().iter().map(|m| self.coeff(m)).collect()
    }

    /// Same coefficients viewed in another format with identical shape.
    pub fn reinterpret(&self, format: Format) -> SVTensor {
        debug_assert_eq!(format.factors, self.format.factors);
        SVTensor { format, coeffs: self.coeffs.clone() }
    }

    /// Reduce a rational tensor into `field` (identity on its own field).
    pub fn to_field(&self, field: Field) -> Result<SVTensor> {
        if field == self.field() {
            return Ok(self.clone());
        }
        self.map_field(field, |c| c.to_field(field))
    }

    /// Map every coefficient into another field.
    pub fn map_field(&self, field: Field, f: impl Fn(&Scalar) -> Result<Scalar>) -> Result<SVTensor> {
        let format = Format::new(field, self.format.factors.clone())?;
        let format = Format { dual: self.format.dual, ..format };
        let mut out = SVTensor::zero(format);
        for (m, c) in &self.coeffs {
            out.add_term(m.clone(), &f(c)?);
        }
        Ok(out)
    }
}

fn parse_var(fmt: &Format, var: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("unknown variable {var:?}"));
    let (j, idx) = if let Some(rest) = var.strip_prefix('v') {
        let (j, i) = rest.split_once('_').ok_or_else(bad)?;
        (j.parse::<usize>().map_err(|_| bad())?.checked_sub(1).ok_or_else(bad)?, i)
    } else {
        let letter = var.chars().next().ok_or_else(bad)?;
        let j = if fmt.num_factors() == 1 && letter == 'x' {
            0
        } else if letter.is_ascii_lowercase() {
            (letter as u8 - b'a') as usize
        } else {
            return Err(bad());
        };
        (j, &var[1..])
    };
    let i = idx.parse::<usize>().map_err(|_| bad())?.checked_sub(1).ok_or_else(bad)?;
    if j >= fmt.num_factors() || i >= fmt.dim(j) {
        return Err(bad());
    }
    Ok((j, i))
}

fn write_monomial(f: &mut fmt::Formatter<'_>, fmt_: &Format, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for j in 0..fmt_.num_factors() {
        for (i, &e) in m.slot(fmt_, j).iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{}", fmt_.var_name(j, i))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
    }
    if first {
        write!(f, "1")?;
    }
    Ok(())
}

impl fmt::Display for SVTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.coeffs.iter().enumerate() {
            let s = c.to_string();
            let (neg, body) = match s.strip_prefix('-') {
                Some(b) => (true, b.to_string()),
                None => (false, s),
            };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let constant = m.exps().iter().all(|&e| e == 0);
            if body != "1" || constant {
                if body.contains(' ') {
                    write!(f, "({body})")?;
                } else {
                    write!(f, "{body}")?;
                }
                if constant {
                    continue;
                }
                write!(f, "*")?;
            }
            write_monomial(f, &self.format, m)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermWire {
    exps: Vec<Exponents>,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct TensorWire {
    field: Field,
    factors: Vec<Factor>,
    terms: Vec<TermWire>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    dual: bool,
}

impl Serialize for SVTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TensorWire {
            field: self.field(),
            factors: self.format.factors.clone(),
            terms: self
                .coeffs
                .iter()
                .map(|(m, c)| TermWire { exps: m.slots(&self.format), coeff: c.to_string() })
                .collect(),
            dual: self.format.dual,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SVTensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = TensorWire::deserialize(d)?;
        let build = || -> Result<SVTensor> {
            let fmt = Format::new(w.field, w.factors.clone())?;
            let fmt = if w.dual { fmt.to_dual() } else { fmt };
            let terms = w
                .terms
                .iter()
                .map(|t| Ok((t.exps.clone(), w.field.parse_scalar(&t.coeff)?)))
                .collect::<Result<Vec<_>>>()?;
            SVTensor::from_terms(fmt, terms)
        };
        build().map_err(serde::de::Error::custom)
    }
}

/// A tensor in `... ⊗ (V_j ⊗ S^{d_j-1}V_j) ⊗ ...`: keys carry the index of the
/// split-off variable and a monomial whose slot `j` has degree `d_j - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedTensor {
    format: Format,
    slot: usize,
    coeffs: BTreeMap<(usize, Monomial), Scalar>,
}

impl MixedTensor {
    pub fn zero(format: Format, slot: usize) -> MixedTensor {
        MixedTensor { format, slot, coeffs: BTreeMap::new() }
    }

    pub fn format(&self) -> &Format {
        &self.format
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, Monomial), &Scalar)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, i: usize, m: &Monomial) -> Scalar {
        self.coeffs.get(&(i, m.clone())).cloned().unwrap_or_else(|| self.format.field().zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, i: usize, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry((i, m)) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn coeff_map(&self) -> &BTreeMap<(usize, Monomial), Scalar> {
        &self.coeffs
    }

    pub fn sub(&self, other: &MixedTensor) -> MixedTensor {
        assert_eq!(self.slot, other.slot);
        let mut out = self.clone();
        for ((i, m), c) in &other.coeffs {
            out.add_term(*i, m.clone(), &-c);
        }
        out
    }
}

impl fmt::Display for MixedTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let inner = self.format.with_degree(self.slot, self.format.degree(self.slot) - 1);
        for (k, ((i, m), c)) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*{} ⊗ ", self.format.var_name(self.slot, *i))?;
            write_monomial(f, &inner, m)?;
        }
        Ok(())
    }
}

fn check_slot_matrix(t: &SVTensor, j: usize, x: &Matrix) -> Result<()> {
    if j >= t.format.num_factors() {
        return Err(Error::Dimension(format!("slot {} out of range", j + 1)));
    }
    let n = t.format.dim(j);
    if x.rows() != n || x.cols() != n {
        return Err(Error::Dimension(format!(
            "slot {} needs a {n}x{n} matrix, got {}x{}",
            j + 1,
            x.rows(),
            x.cols()
        )));
    }
    if x.field() != t.field() {
        return Err(Error::FieldMismatch(x.field(), t.field()));
    }
    Ok(())
}

/// `X ⌟_j T = Σ_{i,k} X_ik x_i ∂T/∂x_k` in slot `j`, where `X` maps `x_k` to
/// `Σ_i X_ik x_i` (column convention).
pub fn contract_op(t: &SVTensor, j: usize, x: &Matrix) -> Result<SVTensor> {
    check_slot_matrix(t, j, x)?;
    let fmt = &t.format;
    let field = t.field();
    let base = fmt.slot_range(j).start;
    let mut out = SVTensor::zero(fmt.clone());
    for (m, c) in &t.coeffs {
        for k in 0..fmt.dim(j) {
            let mk = m.0[base + k];
            if mk == 0 {
                continue;
            }
            let dc = c * &field.from_i64(mk as i64);
            for i in 0..fmt.dim(j) {
                let xik = x.get(i, k);
                if xik.is_zero() {
                    continue;
                }
                let mut e = m.0.clone();
                e[base + k] -= 1;
                e[base + i] += 1;
                out.add_term(Monomial(e), &(&dc * xik));
            }
        }
    }
    Ok(out)
}

/// Split off one copy of `V_j` from slot `j`: `x^m ↦ Σ_k (m_k / d) x_k ⊗ x^{m-e_k}`.
pub fn desymmetrize(t: &SVTensor, j: usize) -> MixedTensor {
    let fmt = &t.format;
    let field = t.field();
    let d = fmt.degree(j);
    assert!(d >= 1, "cannot split a degree-0 slot");
    let base = fmt.slot_range(j).start;
    let inv_d = field.from_i64(d as i64).inv().expect("characteristic exceeds degree");
    let mut out = MixedTensor::zero(fmt.clone(), j);
    for (m, c) in &t.coeffs {
        for k in 0..fmt.dim(j) {
            let mk = m.0[base + k];
            if mk == 0 {
                continue;
            }
            let mut e = m.0.clone();
            e[base + k] -= 1;
            out.add_term(k, Monomial(e), &(c * &field.from_i64(mk as i64) * &inv_d));
        }
    }
    out
}

/// `X ∘_j T`: apply `X` to the split-off copy of `V_j` in the desymmetrization.
pub fn mode_apply(t: &SVTensor, j: usize, x: &Matrix) -> Result<MixedTensor> {
    check_slot_matrix(t, j, x)?;
    let desym = desymmetrize(t, j);
    let mut out = MixedTensor::zero(t.format.clone(), j);
    for ((k, m), c) in &desym.coeffs {
        for i in 0..t.format.dim(j) {
            let xik = x.get(i, *k);
            if !xik.is_zero() {
                out.add_term(i, m.clone(), &(c * xik));
            }
        }
    }
    Ok(out)
}

/// Multiply the split-off variable back in: `x_i ⊗ x^m ↦ x_i x^m`.
pub fn symmetrize(m: &MixedTensor) -> SVTensor {
    let fmt = &m.format;
    let base = fmt.slot_range(m.slot).start;
    let mut out = SVTensor::zero(fmt.clone());
    for ((i, mono), c) in &m.coeffs {
        let mut e = mono.0.clone();
        e[base + i] += 1;
        out.add_term(Monomial(e), c);
    }
    out
}

/// The tensor whose desymmetrization is `m`, if there is one.
pub fn is_symmetric_image(m: &MixedTensor) -> Option<SVTensor> {
    let g = symmetrize(m);
    if desymmetrize(&g, m.slot) == *m {
        Some(g)
    } else {
        None
    }
}

/// Apolarity action of a single dual monomial: iterated partial derivatives.
pub fn apolar_act_monomial(t: &SVTensor, r: &Monomial) -> SVTensor {
    let fmt = &t.format;
    let field = t.field();
    let degrees: Vec<usize> = (0..fmt.num_factors())
        .map(|j| fmt.degree(j).saturating_sub(r.degree_in(fmt, j) as usize))
        .collect();
    let out_fmt = fmt.with_degrees(&degrees);
    let mut out = SVTensor::zero(out_fmt);
    if (0..fmt.num_factors()).any(|j| r.degree_in(fmt, j) as usize > fmt.degree(j)) {
        return out;
    }
    'terms: for (m, c) in &t.coeffs {
        let mut coeff = c.clone();
        let mut e = m.0.clone();
        for (v, &ri) in r.0.iter().enumerate() {
            if ri == 0 {
                continue;
            }
            if e[v] < ri {
                continue 'terms;
            }
            for s in 0..ri {
                coeff *= &field.from_i64((e[v] - s) as i64);
            }
            e[v] -= ri;
        }
        out.add_term(Monomial(e), &coeff);
    }
    out
}

/// Apolarity action of a dual-ring element (a tensor in the dual format).
pub fn apolar_act(t: &SVTensor, r: &SVTensor) -> Result<SVTensor> {
    if r.format.factors.iter().map(|f| f.dim).ne(t.format.factors.iter().map(|f| f.dim)) {
        return Err(Error::Dimension("dual element has a different shape".into()));
    }
    if r.field() != t.field() {
        return Err(Error::FieldMismatch(r.field(), t.field()));
    }
    let degrees: Vec<usize> = (0..t.format.num_factors())
        .map(|j| t.format.degree(j).saturating_sub(r.format.degree(j)))
        .collect();
    let mut out = SVTensor::zero(t.format.with_degrees(&degrees));
    for (m, c) in &r.coeffs {
        let part = apolar_act_monomial(t, m);
        for (mm, cc) in part.coeffs {
            out.add_term(mm, &(&cc * c));
        }
    }
    Ok(out)
}

/// The `j`-th flattening: rows are the variables of `V_j`, columns the
/// monomials of `∂T/∂x_k` that occur, entries the coefficients.
pub fn flattening(t: &SVTensor, j: usize) -> Matrix {
    let fmt = &t.format;
    let field = t.field();
    let n = fmt.dim(j);
    let partials: Vec<SVTensor> = (0..n)
        .map(|k| {
            let mut e = vec![0u32; fmt.num_vars()];
            e[fmt.slot_range(j).start + k] = 1;
            apolar_act_monomial(t, &Monomial(e))
        })
        .collect();
    let mut cols: BTreeMap<&Monomial, usize> = BTreeMap::new();
    for p in &partials {
        for m in p.coeffs.keys() {
            let next = cols.len();
            cols.entry(m).or_insert(next);
        }
    }
    let mut a = Matrix::zeros(field, n, cols.len());
    for (k, p) in partials.iter().enumerate() {
        for (m, c) in &p.coeffs {
            a.set(k, cols[m], c.clone());
        }
    }
    a
}

/// Result of [`conciseness`].
#[derive(Clone, Debug)]
pub struct Conciseness {
    pub ranks: Vec<usize>,
    pub dims: Vec<usize>,
    /// Per slot, an `n_j × r_j` matrix whose columns are the reduced echelon
    /// basis of the essential subspace.
    pub embeddings: Vec<Matrix>,
    /// Per slot, the pivot coordinates of the essential basis.
    pub pivots: Vec<Vec<usize>>,
    /// `T` written on the essential bases.
    pub reduced: SVTensor,
}

impl Conciseness {
    pub fn is_concise(&self) -> bool {
        self.ranks == self.dims
    }

    /// Push a tensor on the essential bases back to the ambient spaces.
    pub fn expand(&self, reduced: &SVTensor) -> Result<SVTensor> {
        let mut t = reduced.clone();
        for (j, e) in self.embeddings.iter().enumerate() {
            t = apply_linear_map(&t, j, e)?;
        }
        Ok(t)
    }
}

pub fn conciseness(t: &SVTensor) -> Result<Conciseness> {
    if t.is_zero() {
        return Err(Error::ZeroTensor);
    }
    let fmt = &t.format;
    let field = t.field();
    let mut ranks = Vec::new();
    let mut embeddings = Vec::new();
    let mut pivots = Vec::new();
    for j in 0..fmt.num_factors() {
        let flat = flattening(t, j);
        let basis = flat.column_space_basis();
        let piv: Vec<usize> =
            basis.iter().map(|v| v.iter().position(|x| !x.is_zero()).unwrap()).collect();
        ranks.push(basis.len());
        embeddings.push(Matrix::from_columns(field, fmt.dim(j), &basis));
        pivots.push(piv);
    }
    // the pivot coordinates of an echelon basis read off the coefficients directly
    let reduced_fmt = {
        let factors =
            fmt.factors.iter().zip(&ranks).map(|(f, &r)| Factor::new(r, f.degree)).collect();
        Format { dual: fmt.dual, ..Format::graded(field, factors)? }
    };
    let mut reduced = SVTensor::zero(reduced_fmt);
    'terms: for (m, c) in &t.coeffs {
        let mut e = Vec::with_capacity(ranks.iter().sum());
        for j in 0..fmt.num_factors() {
            let slot = m.slot(fmt, j);
            let on_pivots: u32 = pivots[j].iter().map(|&p| slot[p]).sum();
            if on_pivots != slot.iter().sum::<u32>() {
                continue 'terms;
            }
            e.extend(pivots[j].iter().map(|&p| slot[p]));
        }
        reduced.add_term(Monomial(e), c);
    }
    Ok(Conciseness { ranks, dims: fmt.dims(), embeddings, pivots, reduced })
}

/// Check `d · desym_j(F) = Σ_i x_i ⊗ ∂F/∂x_i`, the right side computed with
/// the apolarity action.
pub fn euler_identity_check(f: &SVTensor, j: usize) -> bool {
    let fmt = &f.format;
    if fmt.degree(j) == 0 {
        return true;
    }
    let d = f.field().from_i64(fmt.degree(j) as i64);
    let lhs = desymmetrize(f, j);
    let mut rhs = MixedTensor::zero(fmt.clone(), j);
    for i in 0..fmt.dim(j) {
        let mut e = vec![0u32; fmt.num_vars()];
        e[fmt.slot_range(j).start + i] = 1;
        for (m, c) in apolar_act_monomial(f, &Monomial(e)).coeffs {
            rhs.add_term(i, m, &c);
        }
    }
    let scaled: BTreeMap<_, _> = lhs.coeffs.iter().map(|(k, c)| (k.clone(), c * &d)).collect();
    scaled.into_iter().filter(|(_, c)| !c.is_zero()).collect::<BTreeMap<_, _>>() == rhs.coeffs
}

/// Polynomial in `t` multiplied by powers of linear forms; used by the
/// substitution routines.
type SlotPoly = BTreeMap<Exponents, UniPoly>;

fn slot_poly_mul_linear(p: &SlotPoly, form: &[(usize, UniPoly)], dim: usize) -> SlotPoly {
    let mut out: SlotPoly = BTreeMap::new();
    for (e, c) in p {
        for (k, a) in form {
            let mut ee = e.clone();
            if ee.is_empty() {
                ee = vec![0; dim];
            }
            ee[*k] += 1;
            let prod = c.mul(a);
            let entry = out.entry(ee).or_insert_with(|| UniPoly::zero(c.field()));
            *entry = entry.add(&prod);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Expand one slot of a monomial under `x_i ↦ Σ_s t^s Σ_k (A_s)_{ki} w_k`.
fn expand_slot(
    exps: &[u32],
    forms: &[Vec<(usize, UniPoly)>],
    new_dim: usize,
    field: Field,
) -> SlotPoly {
    let mut acc: SlotPoly = BTreeMap::new();
    acc.insert(vec![0; new_dim], UniPoly::one(field));
    for (i, &e) in exps.iter().enumerate() {
        for _ in 0..e {
            acc = slot_poly_mul_linear(&acc, &forms[i], new_dim);
        }
    }
    acc
}

/// A tensor whose coefficients are polynomials in a formal parameter `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyTensor {
    format: Format,
    coeffs: BTreeMap<Monomial, UniPoly>,
}

impl PolyTensor {
    pub fn zero(format: Format) -> PolyTensor {
        PolyTensor { format, coeffs: BTreeMap::new() }
    }

    pub fn constant(t: &SVTensor) -> PolyTensor {
        PolyTensor {
            format: t.format.clone(),
            coeffs: t.coeffs.iter().map(|(m, c)| (m.clone(), UniPoly::constant(c.clone()))).collect(),
        }
    }

    pub fn format(&self) -> &Format {
        &self.format
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &UniPoly)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: &UniPoly) {
        if c.is_zero() {
            return;
        }
        let field = self.format.field();
        let e = self.coeffs.entry(m.clone()).or_insert_with(|| UniPoly::zero(field));
        *e = e.add(c);
        if e.is_zero() {
            self.coeffs.remove(&m);
        }
    }

    pub fn add(&self, other: &PolyTensor) -> PolyTensor {
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: &UniPoly) -> PolyTensor {
        let mut out = PolyTensor::zero(self.format.clone());
        for (m, x) in &self.coeffs {
            out.add_term(m.clone(), &x.mul(c));
        }
        out
    }

    /// Coefficient tensor of `t^s`.
    pub fn coefficient(&self, s: usize) -> SVTensor {
        let mut out = SVTensor::zero(self.format.clone());
        for (m, c) in &self.coeffs {
            out.add_term(m.clone(), &c.coeff(s));
        }
        out
    }

    pub fn evaluate(&self, t0: &Scalar) -> SVTensor {
        let mut out = SVTensor::zero(self.format.clone());
        for (m, c) in &self.coeffs {
            out.add_term(m.clone(), &c.eval(t0));
        }
        out
    }

    /// Largest `t`-degree of any coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.values().filter_map(UniPoly::degree).max()
    }

    /// Smallest power of `t` occurring.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.values().filter_map(|c| c.coeffs().iter().position(|x| !x.is_zero())).min()
    }
}

impl Serialize for PolyTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct PolyTerm<'a> {
            exps: Vec<Exponents>,
            coeff: &'a UniPoly,
        }
        #[derive(Serialize)]
        struct Wire<'a> {
            field: Field,
            factors: &'a [Factor],
            terms: Vec<PolyTerm<'a>>,
        }
        Wire {
            field: self.format.field(),
            factors: &self.format.factors,
            terms: self
                .coeffs
                .iter()
                .map(|(m, c)| PolyTerm { exps: m.slots(&self.format), coeff: c })
                .collect(),
        }
        .serialize(s)
    }
}

/// Grouped by powers of `t`: `(T_0) + t*(T_1) + t^2*(T_2) + ...`.
impl fmt::Display for PolyTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(top) = self.degree() else {
            return write!(f, "0");
        };
        let mut first = true;
        for s in 0..=top {
            let c = self.coefficient(s);
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match s {
                0 => write!(f, "({c})")?,
                1 => write!(f, "t*({c})")?,
                _ => write!(f, "t^{s}*({c})")?,
            }
        }
        Ok(())
    }
}

/// Substitute `x_i ↦ Σ_s t^s A_s x_i` in every slot. `maps[j]` lists the
/// matrices `A_0, A_1, ...` for slot `j` (each `n'_j × n_j`); an empty list
/// leaves the slot unchanged.
pub fn substitute(t: &SVTensor, maps: &[Vec<Matrix>]) -> Result<PolyTensor> {
    let fmt = &t.format;
    let field = t.field();
    if maps.len() != fmt.num_factors() {
        return Err(Error::Dimension("one substitution per slot expected".into()));
    }
    let mut new_factors = fmt.factors.clone();
    let mut forms: Vec<Vec<Vec<(usize, UniPoly)>>> = Vec::new();
    for (j, ms) in maps.iter().enumerate() {
        let n = fmt.dim(j);
        if ms.is_empty() {
            forms.push((0..n).map(|i| vec![(i, UniPoly::one(field))]).collect());
            continue;
        }
        let rows = ms[0].rows();
        if ms.iter().any(|a| a.rows() != rows || a.cols() != n) {
            return Err(Error::Dimension(format!("slot {} substitution has wrong shape", j + 1)));
        }
        new_factors[j].dim = rows;
        forms.push(
            (0..n)
                .map(|i| {
                    (0..rows)
                        .filter_map(|k| {
                            let p = UniPoly::new(
                                field,
                                ms.iter().map(|a| a.get(k, i).clone()).collect(),
                            );
                            (!p.is_zero()).then_some((k, p))
                        })
                        .collect()
                })
                .collect(),
        );
    }
    let new_fmt = Format { dual: fmt.dual, ..Format::graded(field, new_factors)? };
    let mut cache: Vec<HashMap<Exponents, SlotPoly>> = vec![HashMap::new(); fmt.num_factors()];
    let mut out = PolyTensor::zero(new_fmt.clone());
    for (m, c) in &t.coeffs {
        let mut partial: Vec<(Vec<u32>, UniPoly)> = vec![(Vec::new(), UniPoly::constant(c.clone()))];
        for j in 0..fmt.num_factors() {
            let key = m.slot(fmt, j).to_vec();
            let exp = cache[j]
                .entry(key.clone())
                .or_insert_with(|| expand_slot(&key, &forms[j], new_fmt.dim(j), field))
                .clone();
            let mut next = Vec::with_capacity(partial.len() * exp.len());
            for (prefix, pc) in &partial {
                for (e, ec) in &exp {
                    let mut v = prefix.clone();
                    v.extend_from_slice(e);
                    next.push((v, pc.mul(ec)));
                }
            }
            partial = next;
        }
        for (e, pc) in partial {
            out.add_term(Monomial(e), &pc);
        }
    }
    Ok(out)
}

/// Substitute `x_i ↦ Σ_k A_ki w_k` in slot `j` (`A` is `n' × n_j`).
pub fn apply_linear_map(t: &SVTensor, j: usize, a: &Matrix) -> Result<SVTensor> {
    let mut maps = vec![Vec::new(); t.format.num_factors()];
    maps[j] = vec![a.clone()];
    Ok(substitute(t, &maps)?.coefficient(0))
}

/// Apply the same change of variables `x ↦ A x` to every slot of `T`
/// (`maps[j]` is `A_j`).
pub fn apply_linear_maps(t: &SVTensor, maps: &[Matrix]) -> Result<SVTensor> {
    let maps: Vec<Vec<Matrix>> = maps.iter().map(|a| vec![a.clone()]).collect();
    Ok(substitute(t, &maps)?.coefficient(0))
}

/// Fully desymmetrize into a Segre tensor with `d_j` copies of each `V_j`:
/// the coefficient of `x_{i_1} ⊗ ... ⊗ x_{i_d}` is `c_m ∏ m_i! / d!`.
pub fn full_desymmetrize(t: &SVTensor) -> Result<SVTensor> {
    let fmt = &t.format;
    let field = t.field();
    let factors: Vec<Factor> = fmt
        .factors
        .iter()
        .flat_map(|f| std::iter::repeat_n(Factor::new(f.dim, 1), f.degree))
        .collect();
    let out_fmt = Format::graded(field, factors)?;
    let fact = |n: u32| (1..=n as i64).fold(field.one(), |acc, k| acc * field.from_i64(k));
    let mut out = SVTensor::zero(out_fmt);
    for (m, c) in &t.coeffs {
        let mut weight = c.clone();
        let mut choices: Vec<Vec<Vec<u32>>> = Vec::new();
        for j in 0..fmt.num_factors() {
            let slot = m.slot(fmt, j);
            for &e in slot {
                weight *= &fact(e);
            }
            weight = weight / fact(fmt.degree(j) as u32);
            let n = fmt.dim(j);
            // every ordering of the multiset of variables
            let mut seqs: Vec<Vec<usize>> = vec![Vec::new()];
            for _ in 0..fmt.degree(j) {
                seqs = seqs
                    .into_iter()
                    .flat_map(|s| {
                        let mut used = vec![0u32; n];
                        for &i in &s {
                            used[i] += 1;
                        }
                        (0..n).filter(move |&i| used[i] < slot[i]).map(move |i| {
                            let mut s2 = s.clone();
                            s2.push(i);
                            s2
                        })
                    })
                    .collect();
            }
            choices.push(
                seqs.into_iter()
                    .map(|s| {
                        s.iter()
                            .flat_map(|&i| (0..n).map(move |k| u32::from(k == i)))
                            .collect::<Vec<u32>>()
                    })
                    .collect(),
            );
        }
        let mut keys: Vec<Vec<u32>> = vec![Vec::new()];
        for ch in &choices {
            keys = keys
                .into_iter()
                .flat_map(|k| {
                    ch.iter().map(move |c| {
                        let mut v = k.clone();
                        v.extend_from_slice(c);
                        v
                    })
                })
                .collect();
        }
        for k in keys {
            out.add_term(Monomial(k), &weight);
        }
    }
    Ok(out)
}

/// Collect linear conditions `Σ_u y_u · columns[u] = 0` into coefficient rows.
pub fn coefficient_rows<K: Ord + Clone>(
    field: Field,
    columns: &[BTreeMap<K, Scalar>],
) -> Vec<Vector> {
    let mut rows: BTreeMap<K, Vector> = BTreeMap::new();
    for (u, col) in columns.iter().enumerate() {
        for (k, c) in col {
            rows.entry(k.clone()).or_insert_with(|| vec![field.zero(); columns.len()])[u] =
                c.clone();
        }
    }
    rows.into_values().collect()
}

/// Kernel of the linear map `y ↦ Σ_u y_u columns[u]`.
pub fn solve_homogeneous<K: Ord + Clone>(
    field: Field,
    columns: &[BTreeMap<K, Scalar>],
) -> Vec<Vector> {
    let mut ech = Echelon::new(field, columns.len());
    for r in coefficient_rows(field, columns) {
        ech.insert(r);
    }
    ech.kernel()
}
