//! Dense univariate polynomials over a [`FieldSpec`].

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use super::field::{Elem, FieldSpec};
use crate::error::{Error, Result};

/// A polynomial over `F_q`; `coeffs[i]` is the coefficient of `t^i` and the
/// vector never ends in a zero. The zero polynomial has no coefficients.
#[derive(Clone)]
pub struct Poly {
    field: FieldSpec,
    coeffs: Vec<Elem>,
}

impl Poly {
    /// Builds a polynomial from element indices, trimming trailing zeros.
    pub fn new(field: &FieldSpec, coeffs: Vec<u64>) -> Result<Self> {
        let coeffs = coeffs
            .into_iter()
            .map(|c| field.element(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_elems(field, coeffs))
    }

    pub fn from_elems(field: &FieldSpec, mut coeffs: Vec<Elem>) -> Self {
        trim(&mut coeffs);
        Self {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn zero(field: &FieldSpec) -> Self {
        Self::from_elems(field, Vec::new())
    }

    pub fn one(field: &FieldSpec) -> Self {
        Self::from_elems(field, vec![1])
    }

    /// The polynomial `t`.
    pub fn t(field: &FieldSpec) -> Self {
        Self::from_elems(field, vec![0, 1])
    }

    /// `t^n`.
    pub fn t_pow(field: &FieldSpec, n: usize) -> Self {
        let mut coeffs = vec![0; n + 1];
        coeffs[n] = 1;
        Self::from_elems(field, coeffs)
    }

    /// The monic polynomial of degree `n` with monic index `index`
    /// (see [`Poly::monic_index`]).
    pub fn from_monic_index(field: &FieldSpec, n: usize, index: u64) -> Self {
        let mut coeffs = Vec::with_capacity(n + 1);
        decode_monic(field.q(), n, index, &mut coeffs);
        Self {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<Elem> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(1)
    }

    /// `|F| = q^deg F`, with `|0| = 0`.
    pub fn norm(&self) -> Result<u128> {
        match self.degree() {
            None => Ok(0),
            Some(d) => self.field.pow_q(d as u32),
        }
    }

    /// For a monic `F` of degree `n`, the integer `sum_{i<n} c_i q^i`: a
    /// bijection between the monic polynomials of degree `n` and `[0, q^n)`.
    /// `None` if the polynomial is not monic or the index overflows.
    pub fn monic_index(&self) -> Option<u64> {
        if !self.is_monic() {
            return None;
        }
        monic_index_u128(self.field.q(), &self.coeffs).and_then(|i| u64::try_from(i).ok())
    }

    /// Canonical serialization `q=<q>;[c0,c1,...,cd]` with element indices.
    pub fn serialize(&self) -> String {
        let body: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("q={};[{}]", self.field.q(), body.join(","))
    }

    /// Parses the canonical serialization, building the field from its order.
    pub fn parse(s: &str) -> Result<Self> {
        let (q, coeffs) = split_serialized(s)?;
        let field = FieldSpec::with_order(q)?;
        Self::new(&field, coeffs)
    }

    /// Parses the canonical serialization into an existing field.
    pub fn parse_in(field: &FieldSpec, s: &str) -> Result<Self> {
        let (q, coeffs) = split_serialized(s)?;
        if q != field.q() as u64 {
            return Err(Error::FieldMismatch {
                left: field.q(),
                right: q.try_into().unwrap_or(u32::MAX),
            });
        }
        Self::new(field, coeffs)
    }

    fn same_field(&self, other: &Poly) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch {
                left: self.field.q(),
                right: other.field.q(),
            })
        }
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly> {
        self.same_field(other)?;
        Ok(Self::from_elems(
            &self.field,
            add_slices(&self.field, &self.coeffs, &other.coeffs),
        ))
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly> {
        self.same_field(other)?;
        let neg: Vec<Elem> = other.coeffs.iter().map(|&c| self.field.neg(c)).collect();
        Ok(Self::from_elems(
            &self.field,
            add_slices(&self.field, &self.coeffs, &neg),
        ))
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly> {
        self.same_field(other)?;
        Ok(Self {
            field: self.field.clone(),
            coeffs: mul_slices(&self.field, &self.coeffs, &other.coeffs),
        })
    }

    /// Euclidean division: `self = quot * divisor + rem` with `deg rem < deg divisor`.
    pub fn divmod(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        self.same_field(divisor)?;
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (q, r) = divmod_slices(&self.field, &self.coeffs, &divisor.coeffs);
        Ok((
            Self::from_elems(&self.field, q),
            Self::from_elems(&self.field, r),
        ))
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Result<Poly> {
        self.same_field(other)?;
        Ok(Self::from_elems(
            &self.field,
            gcd_slices(&self.field, &self.coeffs, &other.coeffs),
        ))
    }

    /// Divides by the leading coefficient. The zero polynomial is returned unchanged.
    pub fn make_monic(&self) -> Poly {
        let mut coeffs = self.coeffs.clone();
        make_monic_in_place(&self.field, &mut coeffs);
        Self::from_elems(&self.field, coeffs)
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact division by a divisor known to divide `self`.
    pub fn exact_div(&self, divisor: &Poly) -> Result<Poly> {
        let (q, r) = self.divmod(divisor)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::Invariant(format!(
                "{} does not divide {}",
                divisor.serialize(),
                self.serialize()
            )))
        }
    }
}

fn split_serialized(s: &str) -> Result<(u64, Vec<u64>)> {
    let err = |reason: &str| Error::Parse {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let rest = s.trim().strip_prefix("q=").ok_or_else(|| err("missing `q=` prefix"))?;
    let (q, body) = rest.split_once(';').ok_or_else(|| err("missing `;`"))?;
    let q: u64 = q.trim().parse().map_err(|_| err("bad field order"))?;
    let body = body
        .trim()
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| err("coefficients must be bracketed"))?;
    let coeffs = if body.trim().is_empty() {
        Vec::new()
    } else {
        body.split(',')
            .map(|c| c.trim().parse::<u64>().map_err(|_| err("bad coefficient")))
            .collect::<Result<Vec<_>>>()?
    };
    Ok((q, coeffs))
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.field.q() == other.field.q() && self.coeffs == other.coeffs
    }
}

impl Eq for Poly {}

impl Hash for Poly {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.q().hash(state);
        self.coeffs.hash(state);
    }
}

/// Total orders on polynomials. Both respect degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PrimeOrder {
    /// Degree, then the coefficient tuple compared from the constant term upward.
    #[default]
    DegreeLowFirst,
    /// Degree, then the coefficient tuple compared from the leading term downward.
    DegreeHighFirst,
}

impl PrimeOrder {
    pub fn compare(self, a: &Poly, b: &Poly) -> Ordering {
        let by_degree = a
            .field
            .q()
            .cmp(&b.field.q())
            .then(a.coeffs.len().cmp(&b.coeffs.len()));
        match self {
            PrimeOrder::DegreeLowFirst => by_degree.then_with(|| a.coeffs.cmp(&b.coeffs)),
            PrimeOrder::DegreeHighFirst => {
                by_degree.then_with(|| a.coeffs.iter().rev().cmp(b.coeffs.iter().rev()))
            }
        }
    }
}

/// The canonical order `≺`: degree first, then low-to-high coefficient comparison.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        PrimeOrder::DegreeLowFirst.compare(self, other)
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => f.write_str("t")?,
                (1, c) => write!(f, "{c}*t")?,
                (i, 1) => write!(f, "t^{i}")?,
                (i, c) => write!(f, "{c}*t^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    /// Panics on a field mismatch; see [`Poly::try_add`].
    fn add(self, rhs: &Poly) -> Poly {
        self.try_add(rhs).expect("polynomials over different fields")
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.try_sub(rhs).expect("polynomials over different fields")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.try_mul(rhs).expect("polynomials over different fields")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        let coeffs = self.coeffs.iter().map(|&c| self.field.neg(c)).collect();
        Poly::from_elems(&self.field, coeffs)
    }
}

// Slice-level kernels shared with the hot loops elsewhere in the crate.

pub(crate) fn trim(v: &mut Vec<Elem>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

pub(crate) fn add_slices(f: &FieldSpec, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = long.to_vec();
    for (o, &s) in out.iter_mut().zip(short) {
        *o = f.add(*o, s);
    }
    trim(&mut out);
    out
}

pub(crate) fn mul_slices(f: &FieldSpec, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let mut out = Vec::new();
    mul_into(f, a, b, &mut out);
    out
}

/// `out = a * b`. Inputs must be trimmed; the product of trimmed polynomials is trimmed.
pub(crate) fn mul_into(f: &FieldSpec, a: &[Elem], b: &[Elem], out: &mut Vec<Elem>) {
    out.clear();
    if a.is_empty() || b.is_empty() {
        return;
    }
    out.resize(a.len() + b.len() - 1, 0);
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
}

/// Quotient and remainder; `b` must be nonzero.
pub(crate) fn divmod_slices(f: &FieldSpec, a: &[Elem], b: &[Elem]) -> (Vec<Elem>, Vec<Elem>) {
    let db = b.len() - 1;
    let lead_inv = f.inv(b[db]);
    let mut r = a.to_vec();
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut quot = vec![0; r.len() - db];
    for top in (db..r.len()).rev() {
        let c = r[top];
        if c == 0 {
            continue;
        }
        let factor = f.mul(c, lead_inv);
        let shift = top - db;
        quot[shift] = factor;
        for (i, &bi) in b.iter().enumerate() {
            r[shift + i] = f.sub(r[shift + i], f.mul(factor, bi));
        }
    }
    r.truncate(db);
    trim(&mut r);
    trim(&mut quot);
    (quot, r)
}

/// In-place remainder modulo a monic `b`; returns true if the remainder is zero.
pub(crate) fn divides_monic(f: &FieldSpec, a: &[Elem], b: &[Elem], scratch: &mut Vec<Elem>) -> bool {
    let db = b.len() - 1;
    scratch.clear();
    scratch.extend_from_slice(a);
    if scratch.len() <= db {
        return scratch.iter().all(|&c| c == 0);
    }
    for top in (db..scratch.len()).rev() {
        let c = scratch[top];
        if c == 0 {
            continue;
        }
        let shift = top - db;
        for (i, &bi) in b.iter().enumerate() {
            scratch[shift + i] = f.sub(scratch[shift + i], f.mul(c, bi));
        }
    }
    scratch[..db].iter().all(|&c| c == 0)
}

pub(crate) fn make_monic_in_place(f: &FieldSpec, v: &mut [Elem]) {
    if let Some(&lead) = v.last() {
        if lead != 1 {
            let inv = f.inv(lead);
            for c in v.iter_mut() {
                *c = f.mul(*c, inv);
            }
        }
    }
}

pub(crate) fn gcd_slices(f: &FieldSpec, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let (_, r) = divmod_slices(f, &x, &y);
        x = y;
        y = r;
    }
    make_monic_in_place(f, &mut x);
    x
}

/// Index of a monic polynomial (leading coefficient excluded) in base `q`.
pub(crate) fn monic_index_u128(q: u32, coeffs: &[Elem]) -> Option<u128> {
    let n = coeffs.len().checked_sub(1)?;
    let mut acc: u128 = 0;
    for &c in coeffs[..n].iter().rev() {
        acc = acc.checked_mul(q as u128)?.checked_add(c as u128)?;
    }
    Some(acc)
}

/// Writes the monic polynomial of degree `n` with the given index into `out`.
pub(crate) fn decode_monic(q: u32, n: usize, mut index: u64, out: &mut Vec<Elem>) {
    out.clear();
    for _ in 0..n {
        out.push((index % q as u64) as Elem);
        index /= q as u64;
    }
    out.push(1);
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::with_order(q).unwrap()
    }

    fn p(field: &FieldSpec, c: &[u64]) -> Poly {
        Poly::new(field, c.to_vec()).unwrap()
    }

    #[test]
    fn gcd_examples_over_f2() {
        let f2 = f(2);
        // gcd(t^2 + t, t^2 + 1) = t + 1
        let g = p(&f2, &[0, 1, 1]).gcd(&p(&f2, &[1, 0, 1])).unwrap();
        assert_eq!(g, p(&f2, &[1, 1]));
        // (t + 1)^2 = t^2 + 1
        assert_eq!(&p(&f2, &[1, 1]) * &p(&f2, &[1, 1]), p(&f2, &[1, 0, 1]));
    }

    #[test]
    fn gcd_with_zero_is_monic_input() {
        let f5 = f(5);
        let a = p(&f5, &[1, 2, 3]);
        let g = a.gcd(&Poly::zero(&f5)).unwrap();
        assert_eq!(g, a.make_monic());
        assert!(g.is_monic());
        assert!(Poly::zero(&f5).gcd(&Poly::zero(&f5)).unwrap().is_zero());
    }

    #[test]
    fn division_by_zero_and_field_mismatch() {
        let f2 = f(2);
        let f3 = f(3);
        assert!(matches!(
            p(&f2, &[1, 1]).divmod(&Poly::zero(&f2)),
            Err(Error::DivisionByZero)
        ));
        assert!(matches!(
            p(&f2, &[1, 1]).try_mul(&p(&f3, &[1, 1])),
            Err(Error::FieldMismatch { left: 2, right: 3 })
        ));
        assert!(matches!(
            p(&f2, &[1, 1]).gcd(&p(&f3, &[1])),
            Err(Error::FieldMismatch { .. })
        ));
    }

    #[test]
    fn norm_and_degree() {
        let f3 = f(3);
        assert_eq!(Poly::zero(&f3).norm().unwrap(), 0);
        assert_eq!(Poly::zero(&f3).degree(), None);
        assert_eq!(p(&f3, &[2, 0, 1]).norm().unwrap(), 9);
        assert_eq!(Poly::one(&f3).norm().unwrap(), 1);
    }

    #[test]
    fn serialization_format() {
        let f4 = f(4);
        let a = p(&f4, &[3, 0, 1]);
        assert_eq!(a.serialize(), "q=4;[3,0,1]");
        assert_eq!(Poly::zero(&f4).serialize(), "q=4;[]");
        assert_eq!(Poly::parse("q=4;[3,0,1]").unwrap(), a);
        assert_eq!(Poly::parse(" q=3;[1] ").unwrap().serialize(), "q=3;[1]");
        assert!(Poly::parse("q=4;[4]").is_err());
        assert!(Poly::parse("q=6;[1]").is_err());
        assert!(Poly::parse("4;[1]").is_err());
        assert!(Poly::parse_in(&f4, "q=2;[1]").is_err());
        // Trailing zeros are trimmed, so the serialization is canonical.
        assert_eq!(Poly::parse("q=2;[1,0]").unwrap().serialize(), "q=2;[1]");
    }

    #[test]
    fn monic_index_roundtrip() {
        let f3 = f(3);
        for n in 0..4 {
            for idx in 0..3u64.pow(n as u32) {
                let m = Poly::from_monic_index(&f3, n, idx);
                assert!(m.is_monic());
                assert_eq!(m.degree(), Some(n));
                assert_eq!(m.monic_index(), Some(idx));
            }
        }
    }

    #[test]
    fn prime_order_respects_degree() {
        let f2 = f(2);
        let a = p(&f2, &[1, 1, 1]);
        let b = p(&f2, &[0, 0, 0, 1]);
        assert!(a < b);
        // Same degree: compared from the constant term upward.
        let c = p(&f2, &[1, 1, 0, 1]); // t^3 + t + 1
        let d = p(&f2, &[1, 0, 1, 1]); // t^3 + t^2 + 1
        assert!(d < c);
        assert_eq!(PrimeOrder::DegreeHighFirst.compare(&c, &d), Ordering::Less);
    }

    #[test]
    fn display() {
        let f3 = f(3);
        assert_eq!(p(&f3, &[2, 1, 0, 1]).to_string(), "t^3 + t + 2");
        assert_eq!(p(&f3, &[0, 2]).to_string(), "2*t");
        assert_eq!(Poly::zero(&f3).to_string(), "0");
    }

    fn arb_poly(q: u64, max_len: usize) -> impl Strategy<Value = Vec<u64>> {
        prop::collection::vec(0..q, 0..max_len)
    }

    proptest! {
        #[test]
        fn ring_laws_and_division(
            q in prop::sample::select(vec![2u64, 3, 4, 5, 8, 9]),
            a in arb_poly(9, 8),
            b in arb_poly(9, 8),
            c in arb_poly(9, 6),
        ) {
            let field = f(q);
            let red = |v: &Vec<u64>| Poly::new(&field, v.iter().map(|x| x % q).collect()).unwrap();
            let (a, b, c) = (red(&a), red(&b), red(&c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a - &b) + &b, a.clone());
            if !a.is_zero() && !b.is_zero() {
                prop_assert_eq!((&a * &b).degree().unwrap(), a.degree().unwrap() + b.degree().unwrap());
            }
            if !b.is_zero() {
                let (quot, rem) = a.divmod(&b).unwrap();
                prop_assert_eq!(&(&quot * &b) + &rem, a.clone());
                prop_assert!(rem.is_zero() || rem.degree() < b.degree());
            }
            let g = a.gcd(&b).unwrap();
            if !g.is_zero() {
                prop_assert!(g.is_monic());
                prop_assert!(a.divmod(&g).unwrap().1.is_zero());
                prop_assert!(b.divmod(&g).unwrap().1.is_zero());
            }
        }

        #[test]
        fn serialization_roundtrip(q in prop::sample::select(vec![2u64, 3, 4, 7, 16]), c in arb_poly(16, 10)) {
            let field = f(q);
            let a = Poly::new(&field, c.iter().map(|x| x % q).collect()).unwrap();
            prop_assert_eq!(Poly::parse(&a.serialize()).unwrap(), a);
        }
    }
}
