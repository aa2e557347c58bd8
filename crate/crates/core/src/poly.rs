//! Univariate polynomials over a [`Field`], squarefree parts and root
//! extraction.
//!
//! Over `F_p` factorization is complete: distinct-degree splitting followed by
//! Cantor-Zassenhaus equal-degree splitting driven by a seeded ChaCha stream.
//! Over `Q` all rational roots are found by p-adic lifting of the roots of a
//! good reduction; the remaining cofactor is left unfactored.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{is_prime_u64, Field, Scalar};

/// Default seed for the equal-degree splitting PRNG.
pub const DEFAULT_SEED: u64 = 0x5eed_0001;

/// Dense univariate polynomial, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UniPoly {
    field: Field,
    coeffs: Vec<Scalar>,
}

impl UniPoly {
    pub fn new(field: Field, mut coeffs: Vec<Scalar>) -> UniPoly {
        while coeffs.last().is_some_and(Scalar::is_zero) {
            coeffs.pop();
        }
        debug_assert!(coeffs.iter().all(|c| c.field() == field));
        UniPoly { field, coeffs }
    }

    pub fn from_i64s(field: Field, coeffs: &[i64]) -> UniPoly {
        UniPoly::new(field, coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn zero(field: Field) -> UniPoly {
        UniPoly { field, coeffs: Vec::new() }
    }

    pub fn one(field: Field) -> UniPoly {
        UniPoly::constant(field.one())
    }

    pub fn constant(c: Scalar) -> UniPoly {
        UniPoly::new(c.field(), vec![c])
    }

    pub fn x(field: Field) -> UniPoly {
        UniPoly::new(field, vec![field.zero(), field.one()])
    }

    /// `x - root`.
    pub fn linear(root: &Scalar) -> UniPoly {
        let f = root.field();
        UniPoly::new(f, vec![-root, f.one()])
    }

    pub fn monomial(c: Scalar, deg: usize) -> UniPoly {
        let f = c.field();
        let mut coeffs = vec![f.zero(); deg];
        coeffs.push(c);
        UniPoly::new(f, coeffs)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn monic(&self) -> UniPoly {
        match self.leading() {
            None => self.clone(),
            Some(lc) => self.scale(&lc.inv().expect("nonzero leading coefficient")),
        }
    }

    pub fn scale(&self, c: &Scalar) -> UniPoly {
        UniPoly::new(self.field, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new(self.field, (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        UniPoly::new(self.field, (0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero(self.field);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        UniPoly::new(self.field, out)
    }

    pub fn pow(&self, e: usize) -> UniPoly {
        (0..e).fold(UniPoly::one(self.field), |acc, _| acc.mul(self))
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn divrem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lc_inv = d.leading().unwrap().inv().unwrap();
        let mut rem = self.coeffs.clone();
        let Some(sd) = self.degree() else {
            return (UniPoly::zero(self.field), UniPoly::zero(self.field));
        };
        if sd < dd {
            return (UniPoly::zero(self.field), self.clone());
        }
        let mut quot = vec![self.field.zero(); sd - dd + 1];
        for k in (0..=sd - dd).rev() {
            let c = &rem[k + dd] * &lc_inv;
            if c.is_zero() {
                continue;
            }
            for (i, di) in d.coeffs.iter().enumerate() {
                rem[k + i] -= &(&c * di);
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (UniPoly::new(self.field, quot), UniPoly::new(self.field, rem))
    }

    pub fn rem(&self, d: &UniPoly) -> UniPoly {
        self.divrem(d).1
    }

    /// Exact quotient; the caller guarantees divisibility.
    pub fn exact_div(&self, d: &UniPoly) -> UniPoly {
        let (q, r) = self.divrem(d);
        debug_assert!(r.is_zero(), "inexact division");
        q
    }

    pub fn divides(&self, other: &UniPoly) -> bool {
        other.rem(self).is_zero()
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Returns `(g, s, t)` with `s*self + t*other = g`, `g` monic.
    pub fn ext_gcd(&self, other: &UniPoly) -> (UniPoly, UniPoly, UniPoly) {
        let f = self.field;
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (UniPoly::one(f), UniPoly::zero(f));
        let (mut t0, mut t1) = (UniPoly::zero(f), UniPoly::one(f));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s);
            let t = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t);
        }
        match r0.leading().cloned() {
            None => (r0, s0, t0),
            Some(lc) => {
                let inv = lc.inv().unwrap();
                (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
            }
        }
    }

    /// Inverse of `self` modulo `m`, if the two are coprime.
    pub fn inv_mod(&self, m: &UniPoly) -> Option<UniPoly> {
        let (g, s, _) = self.ext_gcd(m);
        if g.is_one() {
            Some(s.rem(m))
        } else {
            None
        }
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.field,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * &self.field.from_i64(i as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = self.field.zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// `self^e mod m` with an arbitrary-size exponent.
    pub fn pow_mod(&self, e: &BigUint, m: &UniPoly) -> UniPoly {
        let mut acc = UniPoly::one(self.field).rem(m);
        let base = self.rem(m);
        for i in (0..e.bits()).rev() {
            acc = acc.mul(&acc).rem(m);
            if e.bit(i) {
                acc = acc.mul(&base).rem(m);
            }
        }
        acc
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            let (neg, body) = match s.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, s),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = i == 0 || body != "1";
            if show_coeff {
                if body.contains(' ') {
                    write!(f, "({body})")?;
                } else {
                    write!(f, "{body}")?;
                }
            }
            match i {
                0 => {}
                1 => write!(f, "{}x", if show_coeff { "*" } else { "" })?,
                _ => write!(f, "{}x^{i}", if show_coeff { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

impl Serialize for UniPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

/// Coefficient list, lowest degree first, read into a known field.
#[derive(Deserialize)]
#[serde(transparent)]
pub struct UniPolyWire(pub Vec<String>);

impl UniPolyWire {
    pub fn into_poly(self, field: Field) -> Result<UniPoly> {
        let coeffs = self.0.iter().map(|s| field.parse_scalar(s)).collect::<Result<Vec<_>>>()?;
        Ok(UniPoly::new(field, coeffs))
    }
}

/// Product of the distinct monic irreducible factors of `f`.
pub fn squarefree_part(f: &UniPoly) -> Result<UniPoly> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(radical(&f.monic()))
}

fn radical(f: &UniPoly) -> UniPoly {
    let field = f.field();
    if f.degree().unwrap_or(0) == 0 {
        return UniPoly::one(field);
    }
    let df = f.derivative();
    if df.is_zero() {
        // char p and f = h(x^p); over F_p the p-th root of a coefficient is itself
        return radical(&pth_root(f));
    }
    let g = f.gcd(&df);
    let w = f.exact_div(&g);
    // strip from g every factor already accounted for in w; what is left is a p-th power
    let mut c = g;
    loop {
        let y = c.gcd(&w);
        if y.degree() == Some(0) {
            break;
        }
        c = c.exact_div(&y);
    }
    if c.degree().unwrap_or(0) == 0 {
        w.monic()
    } else {
        let rest = radical(&pth_root(&c));
        // w and rest may share factors; take lcm
        let common = w.gcd(&rest);
        w.mul(&rest).exact_div(&common).monic()
    }
}

fn pth_root(f: &UniPoly) -> UniPoly {
    let p = f.field().characteristic() as usize;
    debug_assert!(p > 0);
    let coeffs = f.coeffs().iter().step_by(p).cloned().collect();
    UniPoly::new(f.field(), coeffs)
}

/// Result of [`split_linear_factors`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSplit {
    /// Distinct roots with multiplicities, in canonical order.
    pub roots: Vec<(Scalar, usize)>,
    /// Root-free cofactor; equal to 1 when `f` splits completely.
    pub residual: UniPoly,
    /// Over `F_p`: the irreducible factorization of the residual. Over `Q`
    /// the residual is reported as a single unfactored block.
    pub residual_factors: Vec<(UniPoly, usize)>,
}

impl LinearSplit {
    pub fn splits_completely(&self) -> bool {
        self.residual.degree() == Some(0)
    }

    /// Pairwise coprime prime-power blocks whose product is the input.
    pub fn coprime_blocks(&self) -> Vec<UniPoly> {
        let mut out: Vec<UniPoly> =
            self.roots.iter().map(|(r, m)| UniPoly::linear(r).pow(*m)).collect();
        out.extend(self.residual_factors.iter().map(|(q, m)| q.pow(*m)));
        out
    }
}

/// Extract all roots in the working field; uses [`DEFAULT_SEED`].
pub fn split_linear_factors(f: &UniPoly) -> Result<LinearSplit> {
    split_linear_factors_seeded(f, DEFAULT_SEED)
}

pub fn split_linear_factors_seeded(f: &UniPoly, seed: u64) -> Result<LinearSplit> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let f = f.monic();
    let field = f.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut roots, residual_irreducibles) = match field {
        Field::Prime(_) => {
            let irreducibles = factor_squarefree_fp(&radical(&f), &mut rng);
            let (lin, rest): (Vec<_>, Vec<_>) =
                irreducibles.into_iter().partition(|q| q.degree() == Some(1));
            (lin.iter().map(|q| -q.coeff(0)).collect::<Vec<_>>(), Some(rest))
        }
        Field::Rational => (rational_roots(&f), None),
    };
    roots.sort_by(|a, b| a.canonical_cmp(b));

    let mut rest = f.clone();
    let mut with_mult = Vec::with_capacity(roots.len());
    for r in roots {
        let lin = UniPoly::linear(&r);
        let mut m = 0;
        while lin.divides(&rest) {
            rest = rest.exact_div(&lin);
            m += 1;
        }
        debug_assert!(m > 0);
        with_mult.push((r, m));
    }

    let residual_factors = match residual_irreducibles {
        Some(qs) => {
            let mut out = Vec::new();
            let mut rem = rest.clone();
            for q in qs {
                let mut m = 0;
                while q.divides(&rem) {
                    rem = rem.exact_div(&q);
                    m += 1;
                }
                out.push((q, m));
            }
            out.sort_by_key(|(q, _)| q.degree());
            out
        }
        None if rest.degree() == Some(0) => Vec::new(),
        None => vec![(rest.clone(), 1)],
    };
    Ok(LinearSplit { roots: with_mult, residual: rest, residual_factors })
}

/// Monic irreducible factors (with multiplicity) of `f` over `F_p`.
pub fn factor_fp(f: &UniPoly, seed: u64) -> Result<Vec<(UniPoly, usize)>> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if f.field() == Field::Rational {
        return Err(Error::Unsupported("complete factorization is only available over F_p".into()));
    }
    let split = split_linear_factors_seeded(f, seed)?;
    let mut out: Vec<(UniPoly, usize)> =
        split.roots.iter().map(|(r, m)| (UniPoly::linear(r), *m)).collect();
    out.extend(split.residual_factors);
    Ok(out)
}

/// Squarefree monic `f` over `F_p` to its monic irreducible factors.
fn factor_squarefree_fp(f: &UniPoly, rng: &mut ChaCha8Rng) -> Vec<UniPoly> {
    let field = f.field();
    let p = field.characteristic();
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    // distinct-degree factorization
    let x = UniPoly::x(field);
    let mut rest = f.clone();
    let mut xp = x.clone();
    let mut d = 0usize;
    while let Some(deg) = rest.degree() {
        if deg == 0 {
            break;
        }
        d += 1;
        if 2 * d > deg {
            out.push(rest.monic());
            break;
        }
        xp = xp.pow_mod(&BigUint::from(p), &rest);
        let g = rest.gcd(&xp.sub(&x));
        if g.degree().unwrap_or(0) > 0 {
            equal_degree_split(&g, d, rng, &mut out);
            rest = rest.exact_div(&g);
            xp = xp.rem(&rest);
        }
    }
    out
}

/// Split `f`, a product of distinct irreducibles all of degree `d`.
fn equal_degree_split(f: &UniPoly, d: usize, rng: &mut ChaCha8Rng, out: &mut Vec<UniPoly>) {
    let n = f.degree().unwrap();
    if n == d {
        out.push(f.monic());
        return;
    }
    let field = f.field();
    let p = field.characteristic();
    if p == 2 && d == 1 {
        // only candidates are 0 and 1
        for r in [field.zero(), field.one()] {
            if f.eval(&r).is_zero() {
                out.push(UniPoly::linear(&r));
            }
        }
        return;
    }
    let qd = BigUint::from(p).pow(d as u32);
    loop {
        let a = UniPoly::new(field, (0..n).map(|_| field.from_i64(rng.gen_range(0..p) as i64)).collect());
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let b = if p == 2 {
            // trace map a + a^2 + a^4 + ... + a^(2^(nd-1)) where F_{2^d}
            let mut acc = a.rem(f);
            let mut cur = acc.clone();
            for _ in 1..d {
                cur = cur.mul(&cur).rem(f);
                acc = acc.add(&cur);
            }
            acc
        } else {
            let e = (&qd - 1u32) / 2u32;
            a.pow_mod(&e, f).sub(&UniPoly::one(field))
        };
        let g = f.gcd(&b);
        if let Some(gd) = g.degree() {
            if gd > 0 && gd < n {
                equal_degree_split(&g, d, rng, out);
                equal_degree_split(&f.exact_div(&g), d, rng, out);
                return;
            }
        }
    }
}

/// Primitive integer polynomial proportional to a rational one.
fn integer_primitive(f: &UniPoly) -> Vec<BigInt> {
    let qs: Vec<&BigRational> = f.coeffs().iter().map(|c| c.as_rational().unwrap()).collect();
    let lcm = qs.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = qs.iter().map(|q| (q.numer() * &lcm) / q.denom()).collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    ints.into_iter().map(|c| c / &content).collect()
}

fn eval_int(coeffs: &[BigInt], x: &BigInt, m: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in coeffs.iter().rev() {
        acc = (acc * x + c).mod_floor(m);
    }
    acc
}

fn inv_mod_big(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// All distinct rational roots of a monic rational polynomial.
fn rational_roots(f: &UniPoly) -> Vec<Scalar> {
    let mut roots = Vec::new();
    let mut g = radical(f);
    if g.coeff(0).is_zero() {
        roots.push(Field::Rational.zero());
        g = g.exact_div(&UniPoly::x(Field::Rational));
    }
    if g.degree().unwrap_or(0) == 0 {
        return roots;
    }
    let ints = integer_primitive(&g);
    let lc = ints.last().unwrap().clone();
    let c0 = ints[0].clone();
    let bound = (lc.abs() * c0.abs()) * 2 + 1;

    // a prime of good reduction: does not divide lc and keeps g squarefree
    let mut p = 1009u64;
    let (p, roots_mod_p) = loop {
        p += 1;
        if !is_prime_u64(p) || (&lc % p).is_zero() {
            continue;
        }
        let fp = Field::Prime(p);
        let gp = UniPoly::new(fp, ints.iter().map(|c| fp.from_bigint(c)).collect());
        if gp.gcd(&gp.derivative()).degree() != Some(0) {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        let rs: Vec<u64> = factor_squarefree_fp(&gp.monic(), &mut rng)
            .into_iter()
            .filter(|q| q.degree() == Some(1))
            .map(|q| match -q.coeff(0) {
                Scalar::Residue { value, .. } => value,
                _ => unreachable!(),
            })
            .collect();
        break (p, rs);
    };

    let deriv: Vec<BigInt> =
        ints.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    let pb = BigInt::from(p);
    for r0 in roots_mod_p {
        // Newton lifting r -> r - g(r)/g'(r) with doubling precision
        let mut r = BigInt::from(r0);
        let mut m = pb.clone();
        while m < bound {
            m = &m * &m;
            let val = eval_int(&ints, &r, &m);
            let dval = eval_int(&deriv, &r, &m);
            let inv = inv_mod_big(&dval, &m).expect("simple root mod p");
            r = (r - val * inv).mod_floor(&m);
        }
        let mut c = (&lc * &r).mod_floor(&m);
        if c > &m / 2 {
            c -= &m;
        }
        let cand = Scalar::Rational(BigRational::new(c, lc.clone()));
        if g.eval(&cand).is_zero() {
            roots.push(cand);
        }
    }
    roots
}

/// Integer value of a small rational scalar (used when printing reports).
pub fn scalar_to_i64(s: &Scalar) -> Option<i64> {
    match s {
        Scalar::Rational(q) if q.denom().is_one() => q.numer().to_i64(),
        Scalar::Residue { value, .. } => i64::try_from(*value).ok(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(c: &[i64]) -> UniPoly {
        UniPoly::from_i64s(Field::Rational, c)
    }

    #[test]
    fn squarefree_examples() {
        // x^3 - x^2 -> x^2 - x
        assert_eq!(squarefree_part(&q(&[0, 0, -1, 1])).unwrap(), q(&[0, -1, 1]));
        // x^2 - 2x + 1 -> x - 1
        assert_eq!(squarefree_part(&q(&[1, -2, 1])).unwrap(), q(&[-1, 1]));
        // (x^2+1)^2 (x-1) -> (x^2+1)(x-1)
        let f = q(&[1, 0, 1]).pow(2).mul(&q(&[-1, 1]));
        assert_eq!(squarefree_part(&f).unwrap(), q(&[1, 0, 1]).mul(&q(&[-1, 1])));
        assert!(matches!(squarefree_part(&q(&[])), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn squarefree_in_char_p_handles_pth_powers() {
        let f5 = Field::Prime(5);
        // (x+1)^5 (x+2)^2 over F_5
        let f = UniPoly::from_i64s(f5, &[1, 1]).pow(5).mul(&UniPoly::from_i64s(f5, &[2, 1]).pow(2));
        let r = squarefree_part(&f).unwrap();
        assert_eq!(r, UniPoly::from_i64s(f5, &[1, 1]).mul(&UniPoly::from_i64s(f5, &[2, 1])));
        // x^10 + 1 = (x^2+1)^5 over F_5, and x^2+1 = (x-2)(x-3)
        let g = UniPoly::from_i64s(f5, &[1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(squarefree_part(&g).unwrap(), UniPoly::from_i64s(f5, &[1, 0, 1]));
    }

    #[test]
    fn linear_factor_examples() {
        let s = split_linear_factors(&q(&[-1, 0, 1])).unwrap();
        assert_eq!(
            s.roots,
            vec![(Field::Rational.from_i64(-1), 1), (Field::Rational.from_i64(1), 1)]
        );
        assert!(s.splits_completely());

        let f5 = Field::Prime(5);
        let s = split_linear_factors(&UniPoly::from_i64s(f5, &[1, 0, 1])).unwrap();
        assert_eq!(s.roots, vec![(f5.from_i64(2), 1), (f5.from_i64(3), 1)]);
        assert!(s.splits_completely());

        let s = split_linear_factors(&q(&[1, 0, 1])).unwrap();
        assert!(s.roots.is_empty());
        assert_eq!(s.residual, q(&[1, 0, 1]));
    }

    #[test]
    fn rational_roots_with_denominators() {
        // (2x - 3)(3x + 1)^2 (x^2 - 2)
        let f = q(&[-3, 2]).mul(&q(&[1, 3]).pow(2)).mul(&q(&[-2, 0, 1]));
        let s = split_linear_factors(&f).unwrap();
        let r = |n: i64, d: i64| {
            Scalar::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
        };
        assert_eq!(s.roots, vec![(r(-1, 3), 2), (r(3, 2), 1)]);
        assert_eq!(s.residual, q(&[-2, 0, 1]));
    }

    #[test]
    fn zero_root_multiplicity() {
        let s = split_linear_factors(&q(&[0, 0, 0, 1])).unwrap();
        assert_eq!(s.roots, vec![(Field::Rational.zero(), 3)]);
    }

    #[test]
    fn fp_irreducible_residual() {
        let f7 = Field::Prime(7);
        // (x^2 + 1) irreducible mod 7, times (x - 3)^2
        let f = UniPoly::from_i64s(f7, &[1, 0, 1]).mul(&UniPoly::from_i64s(f7, &[-3, 1]).pow(2));
        let s = split_linear_factors(&f).unwrap();
        assert_eq!(s.roots, vec![(f7.from_i64(3), 2)]);
        assert_eq!(s.residual_factors, vec![(UniPoly::from_i64s(f7, &[1, 0, 1]), 1)]);
    }

    #[test]
    fn f2_factorization() {
        let f2 = Field::Prime(2);
        // x (x+1)^2 (x^2+x+1)
        let f = UniPoly::from_i64s(f2, &[0, 1])
            .mul(&UniPoly::from_i64s(f2, &[1, 1]).pow(2))
            .mul(&UniPoly::from_i64s(f2, &[1, 1, 1]));
        let s = split_linear_factors(&f).unwrap();
        assert_eq!(s.roots, vec![(f2.zero(), 1), (f2.one(), 2)]);
        assert_eq!(s.residual_factors, vec![(UniPoly::from_i64s(f2, &[1, 1, 1]), 1)]);
    }

    #[test]
    fn degree_three_equal_degree_split() {
        let p = Field::Prime(101);
        // product of two distinct cubics irreducible mod 101 (x^3 - 2 has no root iff 2 is no cube)
        let fs = factor_fp(&UniPoly::from_i64s(p, &[-2, 0, 0, 1]).mul(&UniPoly::from_i64s(p, &[-3, 0, 0, 1])), 7)
            .unwrap();
        let prod = fs.iter().fold(UniPoly::one(p), |acc, (g, m)| acc.mul(&g.pow(*m)));
        assert_eq!(prod, UniPoly::from_i64s(p, &[-2, 0, 0, 1]).mul(&UniPoly::from_i64s(p, &[-3, 0, 0, 1])));
        assert!(fs.iter().all(|(g, _)| g.degree().unwrap() >= 1));
    }

    #[test]
    fn ext_gcd_identity() {
        let a = q(&[1, 0, 1]);
        let b = q(&[-1, 1]);
        let (g, s, t) = a.ext_gcd(&b);
        assert!(g.is_one());
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
    }

    #[test]
    fn display() {
        assert_eq!(q(&[-1, 0, 1]).to_string(), "x^2 - 1");
        assert_eq!(q(&[0, -2, 3]).to_string(), "3*x^2 - 2*x");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn factorization_recomposes_over_q(roots in proptest::collection::vec(-6i64..6, 0..5),
                                              extra in proptest::collection::vec(-3i64..4, 1..4)) {
                let mut f = q(&extra).monic();
                if f.is_zero() { f = q(&[1]); }
                for r in &roots { f = f.mul(&q(&[-r, 1])); }
                let s = split_linear_factors(&f).unwrap();
                let prod = s.roots.iter().fold(s.residual.clone(), |acc, (r, m)| acc.mul(&UniPoly::linear(r).pow(*m)));
                prop_assert_eq!(prod, f.monic());
            }

            #[test]
            fn factorization_recomposes_over_fp(coeffs in proptest::collection::vec(0i64..101, 2..8), seed in 0u64..1000) {
                let p = Field::Prime(101);
                let f = UniPoly::from_i64s(p, &coeffs);
                prop_assume!(f.degree().unwrap_or(0) >= 1);
                let s = split_linear_factors_seeded(&f, seed).unwrap();
                let prod = s.roots.iter().fold(s.residual.clone(), |acc, (r, m)| acc.mul(&UniPoly::linear(r).pow(*m)));
                prop_assert_eq!(&prod, &f.monic());
                let recomposed = s.residual_factors.iter().fold(UniPoly::one(p), |acc, (g, m)| acc.mul(&g.pow(*m)));
                prop_assert_eq!(recomposed, s.residual);
            }
        }
    }
}
