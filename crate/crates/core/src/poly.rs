//! Dense univariate polynomials over a [`RingContext`], lowest degree first.

use crate::matrix::Matrix;
use crate::witt::{RingContext, RingElement};

pub type Poly = Vec<RingElement>;

/// Drops trailing coefficients that vanish at working precision.
pub fn trim(ctx: &RingContext, mut a: Poly) -> Poly {
    while a.last().is_some_and(|c| ctx.is_zero(c)) {
        a.pop();
    }
    a
}

pub fn degree(ctx: &RingContext, a: &[RingElement]) -> Option<usize> {
    a.iter().rposition(|c| !ctx.is_zero(c))
}

pub fn add(ctx: &RingContext, a: &[RingElement], b: &[RingElement]) -> Poly {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => ctx.add(x, y),
            (Some(x), None) | (None, Some(x)) => x.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

pub fn sub(ctx: &RingContext, a: &[RingElement], b: &[RingElement]) -> Poly {
    let neg: Poly = b.iter().map(|c| ctx.neg(c)).collect();
    add(ctx, a, &neg)
}

pub fn mul(ctx: &RingContext, a: &[RingElement], b: &[RingElement]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ctx.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if ctx.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = ctx.add(&out[i + j], &ctx.mul(x, y));
        }
    }
    out
}

pub fn scale(ctx: &RingContext, a: &[RingElement], c: &RingElement) -> Poly {
    a.iter().map(|x| ctx.mul(x, c)).collect()
}

/// Division by a polynomial whose leading coefficient (at index `len-1`) is
/// a unit. Returns `(quotient, remainder)` with `deg r < deg b`.
pub fn divrem(ctx: &RingContext, a: &[RingElement], b: &[RingElement]) -> (Poly, Poly) {
    let db = b.len() - 1;
    let lead_inv = ctx.invert(&b[db]).expect("divisor must have a unit leading coefficient");
    let mut rem: Poly = a.to_vec();
    if rem.len() <= db {
        rem.resize(db, ctx.zero());
        return (Vec::new(), rem);
    }
    let mut quot = vec![ctx.zero(); rem.len() - db];
    for k in (db..rem.len()).rev() {
        let c = ctx.mul(&rem[k], &lead_inv);
        if ctx.is_zero(&c) {
            continue;
        }
        let shift = k - db;
        for (j, bj) in b.iter().enumerate() {
            rem[shift + j] = ctx.sub(&rem[shift + j], &ctx.mul(&c, bj));
        }
        quot[shift] = c;
    }
    rem.truncate(db);
    (quot, rem)
}

/// Extended Euclid over a field: `(g, s, t)` with `s a + t b = g`, `g`
/// monic.
pub fn ext_gcd(ctx: &RingContext, a: &[RingElement], b: &[RingElement]) -> (Poly, Poly, Poly) {
    debug_assert!(ctx.is_field());
    let mut r0 = trim(ctx, a.to_vec());
    let mut r1 = trim(ctx, b.to_vec());
    let (mut s0, mut s1) = (vec![ctx.one()], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![ctx.one()]);
    while !r1.is_empty() {
        let (q, r) = divrem(ctx, &r0, &r1);
        let r = trim(ctx, r);
        let s = trim(ctx, sub(ctx, &s0, &mul(ctx, &q, &s1)));
        let t = trim(ctx, sub(ctx, &t0, &mul(ctx, &q, &t1)));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        t0 = std::mem::replace(&mut t1, t);
    }
    if let Some(lead) = r0.last().cloned() {
        let inv = ctx.invert(&lead).expect("nonzero in a field");
        r0 = scale(ctx, &r0, &inv);
        s0 = scale(ctx, &s0, &inv);
        t0 = scale(ctx, &t0, &inv);
    }
    (r0, s0, t0)
}

/// `a(X)` for a square matrix `X`, by Horner's rule.
pub fn eval_matrix(ctx: &RingContext, a: &[RingElement], x: &Matrix) -> Matrix {
    let n = x.rows();
    let mut acc = Matrix::zeros(ctx, n, n);
    let id = Matrix::identity(ctx, n);
    for c in a.iter().rev() {
        acc = acc.mul(ctx, x).add(ctx, &id.scale(ctx, c));
    }
    acc
}

/// Entrywise transfer into `ctx`.
pub fn coerce(ctx: &RingContext, a: &[RingElement]) -> Poly {
    a.iter().map(|c| ctx.coerce(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(ctx: &RingContext, c: &[i64]) -> Poly {
        c.iter().map(|&x| ctx.from_i64(x)).collect()
    }

    #[test]
    fn division_by_monic() {
        let r = RingContext::new(3, 1, 6, None).unwrap();
        // (T^2 + 1)(T - 2) + 5
        let a = ints(&r, &[3, 1, -2, 1]);
        let (q, rem) = divrem(&r, &a, &ints(&r, &[1, 0, 1]));
        assert_eq!(q, ints(&r, &[-2, 1]));
        assert_eq!(rem, ints(&r, &[5, 0]));
    }

    #[test]
    fn gcd_over_f5() {
        let f = RingContext::new(5, 1, 1, None).unwrap();
        let a = mul(&f, &ints(&f, &[1, 1]), &ints(&f, &[2, 1]));
        let b = mul(&f, &ints(&f, &[1, 1]), &ints(&f, &[3, 1]));
        let (g, s, t) = ext_gcd(&f, &a, &b);
        assert_eq!(g, ints(&f, &[1, 1]));
        let combo = trim(&f, add(&f, &mul(&f, &s, &a), &mul(&f, &t, &b)));
        assert_eq!(combo, g);
    }

    proptest! {
        #[test]
        fn divrem_reconstructs(a in prop::collection::vec(-50i64..50, 1..7), b in prop::collection::vec(-50i64..50, 0..4)) {
            let r = RingContext::new(2, 2, 8, None).unwrap();
            let mut b = ints(&r, &b);
            b.push(r.one());
            let a = ints(&r, &a);
            let (q, rem) = divrem(&r, &a, &b);
            let back = add(&r, &mul(&r, &q, &b), &rem);
            prop_assert_eq!(trim(&r, back), trim(&r, a));
        }
    }
}
