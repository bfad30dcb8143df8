//! Convex lower polygons with exact rational slopes.

use std::cmp::Ordering;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::datum::OrbitDatum;
use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// A convex piecewise-linear function on `[0, width]` starting at the
/// origin, stored by its canonical vertices (slope changes only).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polygon {
    vertices: Vec<(i64, Rational)>,
}

/// Outcome of [`Polygon::compare`], evaluated at integer abscissae.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Equal,
    /// On or above everywhere, strictly above somewhere.
    Above,
    /// On or below everywhere, strictly below somewhere.
    Below,
    Incomparable,
}

impl Polygon {
    /// Sorts the slopes and takes running sums; equal slopes merge into one
    /// segment.
    pub fn from_slopes(slopes: &[Rational]) -> Polygon {
        let mut sorted = slopes.to_vec();
        sorted.sort();
        let mut vertices = vec![(0i64, Rational::zero())];
        let mut y = Rational::zero();
        for (k, s) in sorted.iter().enumerate() {
            y += s;
            let x = k as i64 + 1;
            let same_as_next = sorted.get(k + 1) == Some(s);
            if !same_as_next {
                vertices.push((x, y));
            }
        }
        Polygon { vertices }
    }

    pub fn from_integer_slopes(slopes: &[i64]) -> Polygon {
        let r: Vec<Rational> = slopes.iter().map(|&s| Rational::from_integer(s)).collect();
        Polygon::from_slopes(&r)
    }

    /// Lower convex hull of integer points with distinct abscissae, one of
    /// them `0`. The result is shifted so that it starts at the origin.
    pub fn lower_hull(points: &[(i64, i64)]) -> Result<Polygon> {
        let mut pts = points.to_vec();
        pts.sort();
        if pts.first().map(|p| p.0) != Some(0) {
            return Err(Error::Inconsistency("hull needs a point at x = 0".into()));
        }
        let y0 = pts[0].1;
        let mut hull: Vec<(i64, i64)> = Vec::new();
        for &(x, y) in &pts {
            let y = y - y0;
            while hull.len() >= 2 {
                let (x1, y1) = hull[hull.len() - 2];
                let (x2, y2) = hull[hull.len() - 1];
                // drop (x2, y2) unless it lies strictly below the chord
                let cross = (y2 - y1) * (x - x1) - (y - y1) * (x2 - x1);
                if cross >= 0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push((x, y));
        }
        Ok(Polygon {
            vertices: hull
                .into_iter()
                .map(|(x, y)| (x, Rational::from_integer(y)))
                .collect(),
        })
    }

    /// Builds from explicit breakpoints, validating convexity and
    /// canonicalizing collinear points away.
    pub fn from_breakpoints(points: &[(i64, Rational)]) -> Result<Polygon> {
        if points.first() != Some(&(0, Rational::zero())) {
            return Err(Error::Parse("polygon must start at (0, 0)".into()));
        }
        let mut slopes = Vec::new();
        for w in points.windows(2) {
            let dx = w[1].0 - w[0].0;
            if dx <= 0 {
                return Err(Error::Parse("breakpoint abscissae must increase".into()));
            }
            let s = (w[1].1 - w[0].1) / Rational::from_integer(dx);
            if slopes.last().is_some_and(|&last| s < last) {
                return Err(Error::Parse("polygon is not convex".into()));
            }
            slopes.extend(std::iter::repeat(s).take(dx as usize));
        }
        Ok(Polygon::from_slopes(&slopes))
    }

    pub fn vertices(&self) -> &[(i64, Rational)] {
        &self.vertices
    }

    pub fn width(&self) -> i64 {
        self.vertices.last().map_or(0, |v| v.0)
    }

    pub fn end_value(&self) -> Rational {
        self.vertices.last().map_or(Rational::zero(), |v| v.1)
    }

    /// Slopes with multiplicity, non-decreasing.
    pub fn slopes(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        for w in self.vertices.windows(2) {
            let dx = w[1].0 - w[0].0;
            let s = (w[1].1 - w[0].1) / Rational::from_integer(dx);
            out.extend(std::iter::repeat(s).take(dx as usize));
        }
        out
    }

    /// Distinct slopes with multiplicities.
    pub fn segments(&self) -> Vec<(Rational, usize)> {
        self.vertices
            .windows(2)
            .map(|w| {
                let dx = w[1].0 - w[0].0;
                ((w[1].1 - w[0].1) / Rational::from_integer(dx), dx as usize)
            })
            .collect()
    }

    pub fn multiplicity(&self, slope: Rational) -> usize {
        self.segments()
            .into_iter()
            .filter(|(s, _)| *s == slope)
            .map(|(_, m)| m)
            .sum()
    }

    /// Value at `x ∈ [0, width]`.
    pub fn value_at(&self, x: i64) -> Option<Rational> {
        if x < 0 || x > self.width() {
            return None;
        }
        for w in self.vertices.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if x <= x1 {
                let t = Rational::new(x - x0, x1 - x0);
                return Some(y0 + (y1 - y0) * t);
            }
        }
        Some(self.vertices[0].1)
    }

    fn check_endpoints(&self, other: &Polygon) -> Result<()> {
        if self.width() != other.width() || self.end_value() != other.end_value() {
            return Err(Error::EndpointMismatch(format!(
                "({}, {}) vs ({}, {})",
                self.width(),
                self.end_value(),
                other.width(),
                other.end_value()
            )));
        }
        Ok(())
    }

    /// Pointwise comparison at all integer abscissae.
    pub fn compare(&self, other: &Polygon) -> Result<Comparison> {
        self.check_endpoints(other)?;
        let mut above = false;
        let mut below = false;
        for x in 0..=self.width() {
            match self.value_at(x).cmp(&other.value_at(x)) {
                Ordering::Greater => above = true,
                Ordering::Less => below = true,
                Ordering::Equal => {}
            }
        }
        Ok(match (above, below) {
            (false, false) => Comparison::Equal,
            (true, false) => Comparison::Above,
            (false, true) => Comparison::Below,
            (true, true) => Comparison::Incomparable,
        })
    }

    /// True when both polygons take the same value at `x`.
    pub fn meets_at(&self, other: &Polygon, x: i64) -> Result<bool> {
        self.check_endpoints(other)?;
        Ok(self.value_at(x) == other.value_at(x))
    }

    /// Divides every slope by `divide_by` and repeats each `copies` times.
    pub fn renormalize(&self, divide_by: i64, copies: usize) -> Polygon {
        assert!(divide_by >= 1 && copies >= 1);
        let d = Rational::from_integer(divide_by);
        let slopes: Vec<Rational> = self
            .slopes()
            .into_iter()
            .flat_map(|s| std::iter::repeat(s / d).take(copies))
            .collect();
        Polygon::from_slopes(&slopes)
    }

    /// Direct sum: union of slope multisets.
    pub fn sum(polys: &[Polygon]) -> Polygon {
        let slopes: Vec<Rational> = polys.iter().flat_map(|p| p.slopes()).collect();
        Polygon::from_slopes(&slopes)
    }

    /// Least common multiple of the slope denominators.
    pub fn denominator_lcm(&self) -> i64 {
        self.segments()
            .iter()
            .fold(1i64, |acc, (s, _)| acc.lcm(s.denom()))
    }

    pub fn has_integer_slopes(&self) -> bool {
        self.segments().iter().all(|(s, _)| s.is_integer())
    }
}

impl Serialize for Polygon {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            breakpoints: Vec<(i64, (i64, i64))>,
        }
        Repr {
            breakpoints: self
                .vertices
                .iter()
                .map(|(x, y)| (*x, (*y.numer(), *y.denom())))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            breakpoints: Vec<(i64, (i64, i64))>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let mut points = Vec::with_capacity(repr.breakpoints.len());
        for (x, (num, den)) in repr.breakpoints {
            if den == 0 {
                return Err(serde::de::Error::custom("zero denominator"));
            }
            points.push((x, Rational::new(num, den)));
        }
        Polygon::from_breakpoints(&points).map_err(serde::de::Error::custom)
    }
}

/// Slopes `a_j = #{τ : f(τ) > n - j}` for `j = 1..=n`, in the `F^e`
/// normalization.
pub fn mu_ordinary_slopes(orbit: &OrbitDatum) -> Vec<i64> {
    let n = orbit.n;
    (1..=n)
        .map(|j| orbit.f.iter().filter(|&&f| f + j > n).count() as i64)
        .collect()
}

pub fn mu_ordinary_polygon(orbit: &OrbitDatum) -> Polygon {
    Polygon::from_integer_slopes(&mu_ordinary_slopes(orbit))
}

/// Per-label exponents `(d_i, c_i)` in sorted-label order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exponent {
    pub d: usize,
    pub c: u32,
}

/// `d_i = n - f(τ_i)` and `c_i = (i-1) d_i - (d_1 + … + d_{i-1})`,
/// asserted against the partial slope sums of the μ-ordinary polygon.
pub fn exponents(orbit: &OrbitDatum) -> Result<Vec<Exponent>> {
    let labels = orbit.sorted_labels();
    let d: Vec<usize> = labels.iter().map(|&k| orbit.n - orbit.f[k]).collect();
    let ord = mu_ordinary_polygon(orbit);
    let mut out = Vec::with_capacity(d.len());
    let mut prefix = 0i64;
    for (i, &di) in d.iter().enumerate() {
        let c = i as i64 * di as i64 - prefix;
        prefix += di as i64;
        let partial = ord.value_at(di as i64).expect("d_i ≤ n");
        if partial != Rational::from_integer(c) || c < 0 {
            return Err(Error::Inconsistency(format!(
                "exponent c_{} = {c} disagrees with partial slope sum {partial}",
                i + 1
            )));
        }
        out.push(Exponent { d: di, c: c as u32 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn orbit(e: usize, n: usize, f: &[usize]) -> OrbitDatum {
        OrbitDatum::new(e, n, f.to_vec()).unwrap()
    }

    #[test]
    fn from_slopes_examples() {
        let p = Polygon::from_integer_slopes(&[0, 0]);
        assert_eq!(p.vertices(), &[(0, q(0, 1)), (2, q(0, 1))]);
        let p = Polygon::from_integer_slopes(&[2, 1]);
        assert_eq!(p.vertices(), &[(0, q(0, 1)), (1, q(1, 1)), (2, q(3, 1))]);
        let p = Polygon::from_slopes(&[q(3, 2), q(3, 2)]);
        assert_eq!(p.vertices(), &[(0, q(0, 1)), (2, q(3, 1))]);
        assert_eq!(p.segments(), vec![(q(3, 2), 2)]);
    }

    #[test]
    fn mu_ordinary_examples() {
        let p = mu_ordinary_polygon(&orbit(3, 2, &[2, 1, 0]));
        assert_eq!(p.slopes(), vec![q(1, 1), q(2, 1)]);
        assert_eq!(p.vertices(), &[(0, q(0, 1)), (1, q(1, 1)), (2, q(3, 1))]);
        let p = mu_ordinary_polygon(&orbit(2, 3, &[2, 1]));
        assert_eq!(p.vertices(), &[(0, q(0, 1)), (1, q(0, 1)), (2, q(1, 1)), (3, q(3, 1))]);
        let p = mu_ordinary_polygon(&orbit(1, 2, &[1]));
        assert_eq!(p.slopes(), vec![q(0, 1), q(1, 1)]);
    }

    #[test]
    fn exponent_examples() {
        let ex = |e, n, f: &[usize]| -> Vec<(usize, u32)> {
            exponents(&orbit(e, n, f)).unwrap().iter().map(|x| (x.d, x.c)).collect()
        };
        assert_eq!(ex(3, 2, &[2, 1, 0]), vec![(0, 0), (1, 1), (2, 3)]);
        assert_eq!(ex(2, 3, &[2, 1]), vec![(1, 0), (2, 1)]);
        assert_eq!(ex(1, 2, &[1]), vec![(1, 0)]);
        // labels sort by f descending regardless of cyclic position
        assert_eq!(ex(3, 2, &[0, 2, 1]), vec![(0, 0), (1, 1), (2, 3)]);
    }

    #[test]
    fn compare_examples() {
        let twisted = Polygon::from_slopes(&[q(3, 2), q(3, 2)]);
        let ord = Polygon::from_integer_slopes(&[1, 2]);
        assert_eq!(twisted.compare(&ord).unwrap(), Comparison::Above);
        assert_eq!(ord.compare(&twisted).unwrap(), Comparison::Below);
        assert_eq!(ord.compare(&ord).unwrap(), Comparison::Equal);
        assert!(twisted.meets_at(&ord, 0).unwrap());
        assert!(!twisted.meets_at(&ord, 1).unwrap());
        assert!(twisted.meets_at(&ord, 2).unwrap());
        let short = Polygon::from_integer_slopes(&[1]);
        assert!(matches!(ord.compare(&short), Err(Error::EndpointMismatch(_))));
        let shifted = Polygon::from_integer_slopes(&[1, 1]);
        assert!(ord.meets_at(&shifted, 0).is_err());
    }

    #[test]
    fn renormalize_examples() {
        let p = Polygon::from_integer_slopes(&[0, 1, 2]).renormalize(2, 2);
        assert_eq!(
            p.slopes(),
            vec![q(0, 1), q(0, 1), q(1, 2), q(1, 2), q(1, 1), q(1, 1)]
        );
        let p = Polygon::from_integer_slopes(&[1, 2]);
        assert_eq!(p.renormalize(1, 1), p);
        assert_eq!(p.renormalize(3, 1).slopes(), vec![q(1, 3), q(2, 3)]);
    }

    #[test]
    fn gu_one_two_reference() {
        let p = mu_ordinary_polygon(&orbit(2, 3, &[2, 1])).renormalize(2, 2);
        assert_eq!(p.segments(), vec![(q(0, 1), 2), (q(1, 2), 2), (q(1, 1), 2)]);
    }

    #[test]
    fn hull_of_points() {
        let p = Polygon::lower_hull(&[(0, 0), (1, 1), (2, 3)]).unwrap();
        assert_eq!(p.slopes(), vec![q(1, 1), q(2, 1)]);
        let p = Polygon::lower_hull(&[(0, 0), (2, 3)]).unwrap();
        assert_eq!(p.slopes(), vec![q(3, 2), q(3, 2)]);
        let p = Polygon::lower_hull(&[(0, 0), (1, 5), (2, 1), (3, 3)]).unwrap();
        assert_eq!(p.vertices(), &[(0, q(0, 1)), (2, q(1, 1)), (3, q(3, 1))]);
        let p = Polygon::lower_hull(&[(0, 4), (1, 5), (2, 3), (3, 3)]).unwrap();
        assert_eq!(p.vertices(), &[(0, q(0, 1)), (2, q(-1, 1)), (3, q(-1, 1))]);
    }

    #[test]
    fn json_round_trip() {
        let p = Polygon::from_slopes(&[q(0, 1), q(1, 2), q(1, 2), q(1, 1)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"breakpoints":[[0,[0,1]],[1,[0,1]],[3,[1,1]],[4,[2,1]]]}"#);
        let back: Polygon = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn exponent_identity_exhaustive() {
        // every orbit datum with e, n ≤ 6
        for e in 1..=6usize {
            for n in 1..=6usize {
                let total = (n + 1).pow(e as u32);
                for code in 0..total {
                    let f: Vec<usize> = (0..e).map(|k| (code / (n + 1).pow(k as u32)) % (n + 1)).collect();
                    let o = orbit(e, n, &f);
                    let ex = exponents(&o).unwrap();
                    assert_eq!(ex[0].c, 0);
                    let slopes = mu_ordinary_slopes(&o);
                    assert!(slopes.windows(2).all(|w| w[0] <= w[1]));
                    assert!(slopes.iter().all(|&a| (0..=e as i64).contains(&a)));
                    assert_eq!(slopes.iter().sum::<i64>(), f.iter().sum::<usize>() as i64);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn slopes_round_trip(raw in prop::collection::vec((0i64..12, 1i64..5), 0..8)) {
            let slopes: Vec<Rational> = raw.iter().map(|&(a, b)| q(a, b)).collect();
            let p = Polygon::from_slopes(&slopes);
            prop_assert_eq!(Polygon::from_slopes(&p.slopes()), p.clone());
            let mut sorted = slopes.clone();
            sorted.sort();
            prop_assert_eq!(p.slopes(), sorted);
            prop_assert_eq!(Polygon::from_breakpoints(p.vertices()).unwrap(), p);
        }

        #[test]
        fn compare_is_antisymmetric(a in prop::collection::vec(0i64..6, 1..6), b in prop::collection::vec(0i64..6, 1..6)) {
            let pa = Polygon::from_integer_slopes(&a);
            let pb = Polygon::from_integer_slopes(&b);
            match (pa.compare(&pb), pb.compare(&pa)) {
                (Ok(x), Ok(y)) => {
                    let flipped = match x {
                        Comparison::Above => Comparison::Below,
                        Comparison::Below => Comparison::Above,
                        other => other,
                    };
                    prop_assert_eq!(flipped, y);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "asymmetric endpoint check"),
            }
        }
    }
}
