//! Short intervals `I(K, h)`: the monic polynomials of degree `N` that agree
//! with the center `K` in every coefficient above degree `h`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::fieldpoly::{FieldSpec, Poly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    center: Poly,
    radius: i64,
}

impl Interval {
    /// `center` must be monic of degree `N`, and `-1 <= radius <= N - 1`.
    pub fn new(center: Poly, radius: i64) -> Result<Self> {
        let n = center.degree().ok_or(Error::NotMonic)?;
        if !center.is_monic() {
            return Err(Error::NotMonic);
        }
        if radius < -1 || radius > n as i64 - 1 {
            return Err(Error::InvalidParameter(format!(
                "radius {radius} outside [-1, {}] for degree {n}",
                n as i64 - 1
            )));
        }
        Ok(Self { center, radius })
    }

    /// All of `ℳ_N`, as the interval of radius `N - 1` around `t^N`.
    pub fn full(field: &FieldSpec, n: usize) -> Result<Self> {
        Self::new(Poly::t_pow(field, n), n as i64 - 1)
    }

    pub fn center(&self) -> &Poly {
        &self.center
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn degree(&self) -> usize {
        self.center.coeffs().len() - 1
    }

    pub fn field(&self) -> &FieldSpec {
        self.center.field()
    }

    /// `|I(K, h)| = q^{h+1}`.
    pub fn size(&self) -> Result<u128> {
        self.field().pow_q((self.radius + 1) as u32)
    }

    pub fn contains(&self, g: &Poly) -> bool {
        if g.field() != self.field() || !g.is_monic() || g.degree() != Some(self.degree()) {
            return false;
        }
        let low = (self.radius + 1) as usize;
        g.coeffs()[low..] == self.center.coeffs()[low..]
    }

    /// The members as a contiguous range of monic indices.
    pub fn index_range(&self) -> Result<Range<u64>> {
        let idx = self.center.monic_index().ok_or(Error::Overflow("monic index"))?;
        let width = u64::try_from(self.size()?).map_err(|_| Error::Overflow("interval size"))?;
        let base = idx - idx % width;
        Ok(base..base + width)
    }

    /// Streams the `q^{h+1}` members in index order, after a budget check.
    pub fn members(&self) -> Result<impl Iterator<Item = Poly> + '_> {
        self.field().check_budget(self.size()?)?;
        let n = self.degree();
        let field = self.field();
        Ok(self
            .index_range()?
            .map(move |i| Poly::from_monic_index(field, n, i)))
    }

    /// The `q` sub-intervals of radius `h - 1`, split on the coefficient of `t^h`.
    pub fn split(&self) -> Vec<Interval> {
        if self.radius < 0 {
            return vec![self.clone()];
        }
        let h = self.radius as usize;
        (0..self.field().q() as u16)
            .map(|c| {
                let mut coeffs = self.center.coeffs().to_vec();
                coeffs[h] = c;
                Interval {
                    center: Poly::from_elems(self.field(), coeffs),
                    radius: self.radius - 1,
                }
            })
            .collect()
    }
}

/// The `q^{N-h-1}` disjoint intervals of radius `h` covering `ℳ_N`, in index order.
pub fn partition(field: &FieldSpec, n: usize, radius: i64) -> Result<Vec<Interval>> {
    if radius < -1 || radius > n as i64 - 1 {
        return Err(Error::InvalidParameter(format!("radius {radius} for degree {n}")));
    }
    let count = field.enumeration_size((n as i64 - radius - 1) as u32)?;
    let width = field.pow_q((radius + 1) as u32)? as u64;
    (0..count)
        .map(|j| Interval::new(Poly::from_monic_index(field, n, j * width), radius))
        .collect()
}

fn check_divisor(interval: &Interval, g: &Poly) -> Result<usize> {
    if !g.is_monic() {
        return Err(Error::NotMonic);
    }
    if g.field() != interval.field() {
        return Err(Error::FieldMismatch {
            left: interval.field().q(),
            right: g.field().q(),
        });
    }
    let d = g.degree().expect("monic");
    if d >= interval.degree() {
        return Err(Error::InvalidParameter(format!(
            "divisor degree {d} must be below the interval degree {}",
            interval.degree()
        )));
    }
    Ok(d)
}

/// Number of monic `A` with `G A ∈ I`: `q^{h-d+1}` when `d <= h + 1`, else 0 or 1.
///
/// For `d > h + 1` there is at most one solution, `A = K div G`, and it works
/// exactly when `K mod G` has degree at most `h`.
pub fn divisor_count_in_interval(interval: &Interval, g: &Poly) -> Result<u64> {
    let d = check_divisor(interval, g)? as i64;
    let h = interval.radius();
    if d <= h + 1 {
        return Ok(interval.field().pow_q((h - d + 1) as u32)? as u64);
    }
    let (_, rem) = interval.center().divmod(g)?;
    Ok(match rem.degree() {
        None => 1,
        Some(r) if r as i64 <= h => 1,
        Some(_) => 0,
    })
}

/// The same count by enumerating every monic `A` of degree `N - d`.
pub fn divisor_count_by_enumeration(interval: &Interval, g: &Poly) -> Result<u64> {
    let d = check_divisor(interval, g)?;
    let m = interval.degree() - d;
    let field = interval.field();
    let count = field.enumeration_size(m as u32)?;
    Ok((0..count)
        .filter(|&i| interval.contains(&(g * &Poly::from_monic_index(field, m, i))))
        .count() as u64)
}

/// `I(K, h) / G = I(K div G, h - d)`, defined for `d <= h + 1`.
pub fn interval_quotient(interval: &Interval, g: &Poly) -> Result<Interval> {
    if !g.is_monic() {
        return Err(Error::NotMonic);
    }
    let d = g.degree().expect("monic");
    if d as i64 > interval.radius() + 1 {
        return Err(Error::QuotientNotInterval {
            degree: d,
            radius: interval.radius(),
        });
    }
    let (quot, _) = interval.center().divmod(g)?;
    Interval::new(quot, interval.radius() - d as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::with_order(q).unwrap()
    }

    fn p(field: &FieldSpec, c: &[u64]) -> Poly {
        Poly::new(field, c.to_vec()).unwrap()
    }

    #[test]
    fn members_examples() {
        let f2 = f(2);
        let i = Interval::new(Poly::t_pow(&f2, 3), 1).unwrap();
        let got: Vec<Poly> = i.members().unwrap().collect();
        assert_eq!(
            got,
            vec![p(&f2, &[0, 0, 0, 1]), p(&f2, &[1, 0, 0, 1]), p(&f2, &[0, 1, 0, 1]), p(&f2, &[1, 1, 0, 1])]
        );
        let single = Interval::new(p(&f2, &[1, 0, 1, 1]), -1).unwrap();
        assert_eq!(single.members().unwrap().collect::<Vec<_>>(), vec![p(&f2, &[1, 0, 1, 1])]);
        let full = Interval::full(&f(3), 3).unwrap();
        assert_eq!(full.members().unwrap().count(), 27);
    }

    #[test]
    fn construction_errors() {
        let f2 = f(2);
        assert!(Interval::new(Poly::t_pow(&f2, 3), 3).is_err());
        assert!(Interval::new(Poly::t_pow(&f2, 3), -2).is_err());
        assert!(Interval::new(p(&f(3), &[0, 2]), 0).is_err());
        let big = Interval::full(&f2.with_budget(10), 4).unwrap();
        assert!(matches!(big.members(), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn divisor_count_examples() {
        let f2 = f(2);
        let i = Interval::new(Poly::t_pow(&f2, 3), 1).unwrap();
        let t = Poly::t(&f2);
        assert_eq!(divisor_count_in_interval(&i, &t).unwrap(), 2);
        assert_eq!(divisor_count_by_enumeration(&i, &t).unwrap(), 2);
        // d = h + 1 gives exactly one.
        let g = p(&f2, &[1, 1]);
        let j = Interval::new(Poly::t_pow(&f2, 4), 0).unwrap();
        assert_eq!(divisor_count_in_interval(&j, &g).unwrap(), 1);
        // d > h + 1: t^4 = (t^3 + t + 1) t + (t^2 + t), remainder degree 2 > 0.
        let g3 = p(&f2, &[1, 1, 0, 1]);
        assert_eq!(divisor_count_in_interval(&j, &g3).unwrap(), 0);
        assert_eq!(divisor_count_by_enumeration(&j, &g3).unwrap(), 0);
        assert!(divisor_count_in_interval(&j, &Poly::t_pow(&f2, 4)).is_err());
    }

    #[test]
    fn quotient_examples() {
        let f2 = f(2);
        let i = Interval::new(Poly::t_pow(&f2, 4), 2).unwrap();
        let qt = interval_quotient(&i, &Poly::t(&f2)).unwrap();
        assert_eq!(qt, Interval::new(Poly::t_pow(&f2, 3), 1).unwrap());
        assert_eq!(interval_quotient(&i, &Poly::one(&f2)).unwrap(), i);
        let edge = interval_quotient(&i, &Poly::t_pow(&f2, 3)).unwrap();
        assert_eq!(edge.radius(), -1);
        assert!(matches!(
            interval_quotient(&i, &Poly::t_pow(&f2, 4)),
            Err(Error::QuotientNotInterval { degree: 4, radius: 2 })
        ));
    }

    /// Exhaustive: quotient members equal `{A : G A ∈ I}` and counts agree.
    #[test]
    fn quotient_and_counts_exhaustive() {
        for q in [2u64, 3] {
            let field = f(q);
            for n in 1..=5usize {
                if q == 3 && n > 4 {
                    continue;
                }
                for h in -1..n as i64 {
                    for interval in partition(&field, n, h).unwrap() {
                        for d in 0..n {
                            for gi in 0..q.pow(d as u32) {
                                let g = Poly::from_monic_index(&field, d, gi);
                                let closed = divisor_count_in_interval(&interval, &g).unwrap();
                                assert_eq!(closed, divisor_count_by_enumeration(&interval, &g).unwrap());
                                if d as i64 <= h + 1 {
                                    let quot = interval_quotient(&interval, &g).unwrap();
                                    let got: BTreeSet<Poly> = quot.members().unwrap().collect();
                                    let m = n - d;
                                    let want: BTreeSet<Poly> = (0..q.pow(m as u32))
                                        .map(|i| Poly::from_monic_index(&field, m, i))
                                        .filter(|a| interval.contains(&(&g * a)))
                                        .collect();
                                    assert_eq!(got, want);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn partition_covers_and_divisor_sums() {
        let field = f(2);
        for n in 1..=5usize {
            for h in 0..n as i64 {
                let parts = partition(&field, n, h).unwrap();
                assert_eq!(parts.len() as u64, 2u64.pow((n as i64 - h - 1) as u32));
                let all: BTreeSet<Poly> = parts.iter().flat_map(|i| i.members().unwrap().collect::<Vec<_>>()).collect();
                assert_eq!(all.len() as u64, 2u64.pow(n as u32));
                for interval in &parts {
                    for d in 0..=((h + 1) as usize).min(n - 1) {
                        let sum: u64 = (0..2u64.pow(d as u32))
                            .map(|gi| divisor_count_in_interval(interval, &Poly::from_monic_index(&field, d, gi)).unwrap())
                            .sum();
                        assert_eq!(sum, 2u64.pow(h as u32 + 1));
                    }
                }
            }
        }
    }

    #[test]
    fn split_and_contains() {
        let field = f(3);
        let i = Interval::new(p(&field, &[2, 1, 0, 1]), 1).unwrap();
        let parts = i.split();
        assert_eq!(parts.len(), 3);
        let total: usize = parts.iter().map(|s| s.members().unwrap().count()).sum();
        assert_eq!(total, 9);
        for s in &parts {
            assert!(s.members().unwrap().all(|m| i.contains(&m)));
        }
        assert!(!i.contains(&p(&field, &[0, 0, 1, 1])));
    }
}
