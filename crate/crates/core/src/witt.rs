//! Truncated unramified Witt rings `W(F_{p^L}) / p^N`.
//!
//! The ring is realized as `(Z/p^N)[x]/(h)` for a monic `h` that is
//! irreducible mod `p`; elements are coefficient vectors in the power basis
//! of the generator `g = x mod h`. The Frobenius lift `σ` is determined by
//! `σ(g)`, the root of `h` congruent to `g^p` mod `p`, obtained by Newton
//! iteration. Coefficients live in a machine word while `p^N < 2^63` and in
//! a `BigUint` beyond that; the choice is made once per context.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::fp_poly;

const WORD_LIMIT: u128 = 1 << 63;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Coeffs {
    Word(SmallVec<[u64; 4]>),
    Big(Vec<BigUint>),
}

/// An element of a [`RingContext`]: `L` coefficients, each in `[0, p^N)`.
///
/// Elements do not carry their context; mixing elements of different
/// contexts is a logic error.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElement(Coeffs);

#[derive(Debug)]
enum Modulus {
    Word(u64),
    Big(BigUint),
}

#[derive(Debug)]
struct Inner {
    p: u64,
    degree: usize,
    precision: u32,
    h: Vec<u64>,
    modulus: Modulus,
    /// `sigma[j][k] = σ^j(g)^k`
    sigma: Vec<Vec<RingElement>>,
    residue: OnceLock<RingContext>,
}

/// Arithmetic context for `W(F_{p^L}) mod p^N`. Cheap to clone.
#[derive(Clone)]
pub struct RingContext {
    inner: Arc<Inner>,
}

impl fmt::Debug for RingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RingContext")
            .field("p", &self.inner.p)
            .field("degree", &self.inner.degree)
            .field("precision", &self.inner.precision)
            .field("h", &self.inner.h)
            .finish()
    }
}

impl PartialEq for RingContext {
    fn eq(&self, other: &Self) -> bool {
        self.inner.p == other.inner.p
            && self.inner.degree == other.inner.degree
            && self.inner.precision == other.inner.precision
            && self.inner.h == other.inner.h
    }
}

impl Eq for RingContext {}

fn word_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

impl RingContext {
    /// Builds the context. When `h` is `None` the least monic irreducible
    /// polynomial of degree `degree` over `F_p` is used (coefficients read
    /// from the top degree down, compared lexicographically).
    ///
    /// `h` is given lowest degree first and must have `degree + 1` entries
    /// with a leading `1`.
    pub fn new(p: u64, degree: usize, precision: u32, h: Option<&[u64]>) -> Result<Self> {
        if !fp_poly::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p >= 1 << 32 {
            return Err(Error::InvalidRing(format!("prime {p} exceeds 32 bits")));
        }
        if degree == 0 {
            return Err(Error::InvalidRing("extension degree must be >= 1".into()));
        }
        if precision == 0 {
            return Err(Error::InvalidRing("precision must be >= 1".into()));
        }
        let h = match h {
            Some(h) => {
                if h.len() != degree + 1 || h[degree] != 1 {
                    return Err(Error::InvalidRing(format!(
                        "defining polynomial must be monic of degree {degree}"
                    )));
                }
                if !fp_poly::is_irreducible(h, p) {
                    return Err(Error::ReducibleModulus { p });
                }
                h.to_vec()
            }
            None => fp_poly::least_irreducible(p, degree),
        };
        let big_modulus = BigUint::from(p).pow(precision);
        let modulus = match big_modulus.to_u128() {
            Some(m) if m < WORD_LIMIT => Modulus::Word(m as u64),
            _ => Modulus::Big(big_modulus),
        };
        let bare = RingContext {
            inner: Arc::new(Inner {
                p,
                degree,
                precision,
                h,
                modulus,
                sigma: Vec::new(),
                residue: OnceLock::new(),
            }),
        };
        let sigma = bare.sigma_tables()?;
        let Inner {
            p,
            degree,
            precision,
            h,
            modulus,
            ..
        } = Arc::try_unwrap(bare.inner).expect("unshared during construction");
        Ok(RingContext {
            inner: Arc::new(Inner {
                p,
                degree,
                precision,
                h,
                modulus,
                sigma,
                residue: OnceLock::new(),
            }),
        })
    }

    /// Same `p` and `h`, different truncation.
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        RingContext::new(self.p(), self.degree(), precision, Some(&self.inner.h))
    }

    pub fn p(&self) -> u64 {
        self.inner.p
    }

    pub fn degree(&self) -> usize {
        self.inner.degree
    }

    pub fn precision(&self) -> u32 {
        self.inner.precision
    }

    /// Coefficients of `h`, lowest degree first.
    pub fn defining_polynomial(&self) -> &[u64] {
        &self.inner.h
    }

    /// `p^N` as a big integer.
    pub fn modulus(&self) -> BigUint {
        match &self.inner.modulus {
            Modulus::Word(m) => BigUint::from(*m),
            Modulus::Big(m) => m.clone(),
        }
    }

    /// The residue field `F_{p^L}`, realized as this ring at precision 1.
    pub fn residue_field(&self) -> &RingContext {
        if self.precision() == 1 {
            return self;
        }
        self.inner.residue.get_or_init(|| {
            self.with_precision(1)
                .expect("residue field of a valid context")
        })
    }

    pub fn is_field(&self) -> bool {
        self.precision() == 1
    }

    // ---- construction -------------------------------------------------

    pub fn zero(&self) -> RingElement {
        match &self.inner.modulus {
            Modulus::Word(_) => RingElement(Coeffs::Word(SmallVec::from_elem(0, self.degree()))),
            Modulus::Big(_) => RingElement(Coeffs::Big(vec![BigUint::zero(); self.degree()])),
        }
    }

    pub fn one(&self) -> RingElement {
        self.from_u64(1)
    }

    pub fn from_u64(&self, c: u64) -> RingElement {
        let mut coeffs = vec![0u64; self.degree()];
        coeffs[0] = c;
        self.from_coeffs(&coeffs)
    }

    pub fn from_i64(&self, c: i64) -> RingElement {
        let x = self.from_u64(c.unsigned_abs());
        if c < 0 {
            self.neg(&x)
        } else {
            x
        }
    }

    /// The ring generator `g`.
    pub fn generator(&self) -> RingElement {
        let mut coeffs = vec![0u64; self.degree()];
        if self.degree() > 1 {
            coeffs[1] = 1;
            self.from_coeffs(&coeffs)
        } else {
            // L = 1: g is the root of the linear h, i.e. -h_0
            self.neg(&self.from_u64(self.inner.h[0]))
        }
    }

    /// Element from machine-word coefficients (reduced mod `p^N`); missing
    /// trailing coefficients are zero.
    pub fn from_coeffs(&self, coeffs: &[u64]) -> RingElement {
        assert!(coeffs.len() <= self.degree(), "too many coefficients");
        match &self.inner.modulus {
            Modulus::Word(m) => {
                let mut v: SmallVec<[u64; 4]> = coeffs.iter().map(|&c| c % m).collect();
                v.resize(self.degree(), 0);
                RingElement(Coeffs::Word(v))
            }
            Modulus::Big(m) => {
                let mut v: Vec<BigUint> = coeffs.iter().map(|&c| BigUint::from(c) % m).collect();
                v.resize(self.degree(), BigUint::zero());
                RingElement(Coeffs::Big(v))
            }
        }
    }

    /// Element from arbitrary-size coefficients (reduced mod `p^N`).
    pub fn from_big_coeffs(&self, coeffs: &[BigUint]) -> RingElement {
        assert!(coeffs.len() <= self.degree(), "too many coefficients");
        match &self.inner.modulus {
            Modulus::Word(m) => {
                let m_big = BigUint::from(*m);
                let mut v: SmallVec<[u64; 4]> = coeffs
                    .iter()
                    .map(|c| (c % &m_big).to_u64().expect("reduced below word modulus"))
                    .collect();
                v.resize(self.degree(), 0);
                RingElement(Coeffs::Word(v))
            }
            Modulus::Big(m) => {
                let mut v: Vec<BigUint> = coeffs.iter().map(|c| c % m).collect();
                v.resize(self.degree(), BigUint::zero());
                RingElement(Coeffs::Big(v))
            }
        }
    }

    /// `p^k` (zero once `k ≥ N`).
    pub fn p_power(&self, k: u32) -> RingElement {
        if k >= self.precision() {
            return self.zero();
        }
        self.from_big_coeffs(&[BigUint::from(self.p()).pow(k)])
    }

    /// Representative transfer from another context with the same `p` and
    /// `h`: reduces when the target precision is lower, and keeps the
    /// canonical representative when it is higher.
    pub fn coerce(&self, x: &RingElement) -> RingElement {
        match &x.0 {
            Coeffs::Word(v) => {
                let big: Vec<BigUint> = v.iter().map(|&c| BigUint::from(c)).collect();
                self.from_big_coeffs(&big)
            }
            Coeffs::Big(v) => self.from_big_coeffs(v),
        }
    }

    /// Builds an element from a stream of random words; each coefficient is
    /// uniform enough for test generation.
    pub fn element_from_words(&self, mut next: impl FnMut() -> u64) -> RingElement {
        let words_per_coeff = (self.modulus().bits() as usize).div_ceil(64);
        let coeffs: Vec<BigUint> = (0..self.degree())
            .map(|_| {
                let mut acc = BigUint::zero();
                for _ in 0..words_per_coeff {
                    acc = (acc << 64u32) + BigUint::from(next());
                }
                acc
            })
            .collect();
        self.from_big_coeffs(&coeffs)
    }

    // ---- inspection ---------------------------------------------------

    pub fn is_zero(&self, x: &RingElement) -> bool {
        match &x.0 {
            Coeffs::Word(v) => v.iter().all(|&c| c == 0),
            Coeffs::Big(v) => v.iter().all(|c| c.is_zero()),
        }
    }

    pub fn is_one(&self, x: &RingElement) -> bool {
        *x == self.one()
    }

    /// Largest `v < N` with `x ∈ p^v·W`, or `None` (⊥) when `x ≡ 0 mod p^N`.
    pub fn valuation(&self, x: &RingElement) -> Option<u32> {
        let p = self.p();
        match &x.0 {
            Coeffs::Word(v) => v
                .iter()
                .filter(|&&c| c != 0)
                .map(|&c| {
                    let mut c = c;
                    let mut k = 0;
                    while c % p == 0 {
                        c /= p;
                        k += 1;
                    }
                    k
                })
                .min(),
            Coeffs::Big(v) => {
                let pb = BigUint::from(p);
                v.iter()
                    .filter(|c| !c.is_zero())
                    .map(|c| {
                        let mut c = c.clone();
                        let mut k = 0;
                        while (&c % &pb).is_zero() {
                            c /= &pb;
                            k += 1;
                        }
                        k
                    })
                    .min()
            }
        }
    }

    pub fn is_unit(&self, x: &RingElement) -> bool {
        self.valuation(x) == Some(0)
    }

    /// Coefficients as big integers, lowest degree first.
    pub fn coefficients(&self, x: &RingElement) -> Vec<BigUint> {
        match &x.0 {
            Coeffs::Word(v) => v.iter().map(|&c| BigUint::from(c)).collect(),
            Coeffs::Big(v) => v.clone(),
        }
    }

    /// Coefficients as machine words when every coefficient fits.
    pub fn coefficients_u64(&self, x: &RingElement) -> Option<Vec<u64>> {
        match &x.0 {
            Coeffs::Word(v) => Some(v.to_vec()),
            Coeffs::Big(v) => v.iter().map(|c| c.to_u64()).collect(),
        }
    }

    /// Canonical text form: comma-separated base-10 coefficients, lowest
    /// degree first.
    pub fn format(&self, x: &RingElement) -> String {
        self.coefficients(x)
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse(&self, s: &str) -> Result<RingElement> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != self.degree() {
            return Err(Error::Parse(format!(
                "expected {} coefficients, found {}",
                self.degree(),
                parts.len()
            )));
        }
        let coeffs = parts
            .iter()
            .map(|t| {
                t.parse::<BigUint>()
                    .map_err(|e| Error::Parse(format!("coefficient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let modulus = self.modulus();
        if coeffs.iter().any(|c| *c >= modulus) {
            return Err(Error::Parse(format!("coefficient out of range [0, {modulus})")));
        }
        Ok(self.from_big_coeffs(&coeffs))
    }

    // ---- arithmetic ---------------------------------------------------

    pub fn add(&self, x: &RingElement, y: &RingElement) -> RingElement {
        match (&x.0, &y.0, &self.inner.modulus) {
            (Coeffs::Word(a), Coeffs::Word(b), Modulus::Word(m)) => RingElement(Coeffs::Word(
                a.iter()
                    .zip(b)
                    .map(|(&s, &t)| {
                        let r = s + t;
                        if r >= *m {
                            r - m
                        } else {
                            r
                        }
                    })
                    .collect(),
            )),
            (Coeffs::Big(a), Coeffs::Big(b), Modulus::Big(m)) => RingElement(Coeffs::Big(
                a.iter()
                    .zip(b)
                    .map(|(s, t)| {
                        let r = s + t;
                        if &r >= m {
                            r - m
                        } else {
                            r
                        }
                    })
                    .collect(),
            )),
            _ => panic!("ring element used with a foreign context"),
        }
    }

    pub fn neg(&self, x: &RingElement) -> RingElement {
        match (&x.0, &self.inner.modulus) {
            (Coeffs::Word(a), Modulus::Word(m)) => RingElement(Coeffs::Word(
                a.iter().map(|&s| if s == 0 { 0 } else { m - s }).collect(),
            )),
            (Coeffs::Big(a), Modulus::Big(m)) => RingElement(Coeffs::Big(
                a.iter()
                    .map(|s| if s.is_zero() { BigUint::zero() } else { m - s })
                    .collect(),
            )),
            _ => panic!("ring element used with a foreign context"),
        }
    }

    pub fn sub(&self, x: &RingElement, y: &RingElement) -> RingElement {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &RingElement, y: &RingElement) -> RingElement {
        let l = self.degree();
        let h = &self.inner.h;
        match (&x.0, &y.0, &self.inner.modulus) {
            (Coeffs::Word(a), Coeffs::Word(b), Modulus::Word(m)) => {
                let m = *m;
                if l == 1 {
                    return RingElement(Coeffs::Word(SmallVec::from_elem(word_mul(a[0], b[0], m), 1)));
                }
                let mut t = [0u64; 64];
                let mut t_vec;
                let t: &mut [u64] = if 2 * l - 1 <= 64 {
                    &mut t[..2 * l - 1]
                } else {
                    t_vec = vec![0u64; 2 * l - 1];
                    &mut t_vec
                };
                for (i, &s) in a.iter().enumerate() {
                    if s == 0 {
                        continue;
                    }
                    for (j, &u) in b.iter().enumerate() {
                        if u == 0 {
                            continue;
                        }
                        let r = t[i + j] + word_mul(s, u, m);
                        t[i + j] = if r >= m { r - m } else { r };
                    }
                }
                for k in (l..2 * l - 1).rev() {
                    let c = t[k];
                    if c == 0 {
                        continue;
                    }
                    for (j, &hj) in h.iter().enumerate().take(l) {
                        if hj == 0 {
                            continue;
                        }
                        let prod = word_mul(c, hj % m, m);
                        let cur = t[k - l + j];
                        t[k - l + j] = if cur >= prod { cur - prod } else { cur + m - prod };
                    }
                    t[k] = 0;
                }
                RingElement(Coeffs::Word(t[..l].iter().copied().collect()))
            }
            (Coeffs::Big(a), Coeffs::Big(b), Modulus::Big(m)) => {
                let mut t = vec![BigUint::zero(); 2 * l - 1];
                for (i, s) in a.iter().enumerate() {
                    if s.is_zero() {
                        continue;
                    }
                    for (j, u) in b.iter().enumerate() {
                        t[i + j] += s * u;
                    }
                }
                for c in t.iter_mut() {
                    *c %= m;
                }
                for k in (l..2 * l - 1).rev() {
                    let c = std::mem::take(&mut t[k]);
                    if c.is_zero() {
                        continue;
                    }
                    for (j, &hj) in h.iter().enumerate().take(l) {
                        let prod = (&c * BigUint::from(hj)) % m;
                        let cur = std::mem::take(&mut t[k - l + j]);
                        t[k - l + j] = if cur >= prod { cur - prod } else { cur + m - prod };
                    }
                }
                t.truncate(l);
                RingElement(Coeffs::Big(t))
            }
            _ => panic!("ring element used with a foreign context"),
        }
    }

    pub fn mul_u64(&self, x: &RingElement, c: u64) -> RingElement {
        self.mul(x, &self.from_u64(c))
    }

    pub fn pow(&self, x: &RingElement, mut e: u64) -> RingElement {
        let mut result = self.one();
        let mut base = x.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// Big-exponent power, used for weights like `m = lcm(p^e - 1)`.
    pub fn pow_big(&self, x: &RingElement, e: &BigUint) -> RingElement {
        let mut result = self.one();
        for i in (0..e.bits()).rev() {
            result = self.mul(&result, &result);
            if e.bit(i) {
                result = self.mul(&result, x);
            }
        }
        result
    }

    /// `x · p^k`.
    pub fn mul_p_power(&self, x: &RingElement, k: u32) -> RingElement {
        self.mul(x, &self.p_power(k))
    }

    /// Exact coefficientwise division by `p^k`. The quotient is only
    /// meaningful modulo `p^(N-k)`; its canonical representative is
    /// returned. Fails when `valuation(x) < k`.
    pub fn divide_by_p_power(&self, x: &RingElement, k: u32) -> Result<RingElement> {
        if k == 0 {
            return Ok(x.clone());
        }
        if let Some(v) = self.valuation(x) {
            if v < k {
                return Err(Error::NotUnit { valuation: Some(v) });
            }
        }
        Ok(match &x.0 {
            Coeffs::Word(a) => {
                let pk = self.p().checked_pow(k);
                RingElement(Coeffs::Word(
                    a.iter()
                        .map(|&c| match pk {
                            Some(pk) => c / pk,
                            None => 0,
                        })
                        .collect(),
                ))
            }
            Coeffs::Big(a) => {
                let pk = BigUint::from(self.p()).pow(k);
                RingElement(Coeffs::Big(a.iter().map(|c| c / &pk).collect()))
            }
        })
    }

    /// Multiplicative inverse of a unit.
    pub fn invert(&self, x: &RingElement) -> Result<RingElement> {
        let v = self.valuation(x);
        if v != Some(0) {
            return Err(Error::NotUnit { valuation: v });
        }
        let p = self.p();
        let residue: Vec<u64> = self
            .coefficients(x)
            .iter()
            .map(|c| (c % BigUint::from(p)).to_u64().unwrap())
            .collect();
        let h_bar: Vec<u64> = self.inner.h.iter().map(|&c| c % p).collect();
        let y0 = fp_poly::inverse_mod(&residue, &h_bar, p).ok_or(Error::NotUnit { valuation: v })?;
        let mut y = self.from_coeffs(&y0);
        let two = self.from_u64(2);
        let one = self.one();
        // Newton: y <- y (2 - x y), doubling correct digits each round
        let mut correct = 1u32;
        while correct < self.precision() {
            y = self.mul(&y, &self.sub(&two, &self.mul(x, &y)));
            correct = correct.saturating_mul(2);
        }
        debug_assert_eq!(self.mul(x, &y), one);
        Ok(y)
    }

    // ---- Frobenius ----------------------------------------------------

    fn eval_h(&self, r: &RingElement, derivative: bool) -> RingElement {
        let h = &self.inner.h;
        let mut acc = self.zero();
        if derivative {
            for k in (1..h.len()).rev() {
                acc = self.add(&self.mul(&acc, r), &self.from_u64(h[k].wrapping_mul(k as u64)));
            }
        } else {
            for &c in h.iter().rev() {
                acc = self.add(&self.mul(&acc, r), &self.from_u64(c));
            }
        }
        acc
    }

    fn apply_sigma_table(&self, x: &RingElement, table: &[RingElement]) -> RingElement {
        let mut acc = self.zero();
        for (k, c) in self.coefficients(x).into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let scalar = self.from_big_coeffs(&[c]);
            acc = self.add(&acc, &self.mul(&scalar, &table[k]));
        }
        acc
    }

    fn powers(&self, base: &RingElement) -> Vec<RingElement> {
        let mut out = Vec::with_capacity(self.degree());
        let mut cur = self.one();
        for _ in 0..self.degree() {
            out.push(cur.clone());
            cur = self.mul(&cur, base);
        }
        out
    }

    fn sigma_tables(&self) -> Result<Vec<Vec<RingElement>>> {
        let l = self.degree();
        if l == 1 {
            return Ok(vec![vec![self.one()]]);
        }
        let g = self.generator();
        // Hensel-lift the conjugate root g^p
        let mut r = self.pow(&g, self.p());
        let max_iter = 2 * (32 - self.precision().leading_zeros()) + 8;
        let mut converged = false;
        for _ in 0..max_iter {
            let hr = self.eval_h(&r, false);
            if self.is_zero(&hr) {
                converged = true;
                break;
            }
            let dh = self.eval_h(&r, true);
            let step = self.mul(&hr, &self.invert(&dh)?);
            r = self.sub(&r, &step);
        }
        if !converged {
            return Err(Error::InvalidRing("Frobenius lift did not converge".into()));
        }
        let first = self.powers(&r);
        let mut tables = vec![self.powers(&g), first.clone()];
        let mut image = r;
        for _ in 2..l {
            image = self.apply_sigma_table(&image, &first);
            tables.push(self.powers(&image));
        }
        Ok(tables)
    }

    /// `σ^k(x)` for any integer `k`; `σ^L` is the identity.
    pub fn frobenius(&self, x: &RingElement, k: i64) -> RingElement {
        let l = self.degree() as i64;
        let j = k.rem_euclid(l) as usize;
        if j == 0 {
            return x.clone();
        }
        self.apply_sigma_table(x, &self.inner.sigma[j])
    }

    /// Reduction to the residue field.
    pub fn reduce(&self, x: &RingElement) -> RingElement {
        self.residue_field().coerce(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64, l: usize, n: u32) -> RingContext {
        RingContext::new(p, l, n, None).unwrap()
    }

    #[test]
    fn degree_one_frobenius_is_identity() {
        let r = ctx(3, 1, 10);
        let x = r.from_u64(12345);
        assert_eq!(r.frobenius(&x, 1), x);
        assert_eq!(r.modulus(), BigUint::from(59049u32));
    }

    #[test]
    fn f4_lift_swaps_roots() {
        let r = RingContext::new(2, 2, 8, Some(&[1, 1, 1])).unwrap();
        let g = r.generator();
        let s = r.frobenius(&g, 1);
        // the other root of x^2 + x + 1 is -1 - g
        let expected = r.sub(&r.neg(&r.one()), &g);
        assert_eq!(s, expected);
        let g2 = r.mul(&g, &g);
        assert!(r.valuation(&r.sub(&s, &g2)).map_or(true, |v| v >= 1));
    }

    #[test]
    fn default_polynomial_mod_5() {
        let r = ctx(5, 2, 12);
        assert_eq!(r.defining_polynomial(), &[2, 0, 1]);
    }

    #[test]
    fn inverse_of_two_mod_81() {
        let r = ctx(3, 1, 4);
        let inv = r.invert(&r.from_u64(2)).unwrap();
        assert_eq!(r.format(&inv), "41");
        assert_eq!(r.invert(&r.one()).unwrap(), r.one());
        assert!(matches!(r.invert(&r.from_u64(3)), Err(Error::NotUnit { valuation: Some(1) })));
        assert!(matches!(r.invert(&r.zero()), Err(Error::NotUnit { valuation: None })));
    }

    #[test]
    fn valuations() {
        let r = ctx(3, 2, 6);
        let unit = r.add(&r.generator(), &r.one());
        assert_eq!(r.valuation(&r.mul_p_power(&unit, 3)), Some(3));
        assert_eq!(r.valuation(&r.zero()), None);
        assert_eq!(r.valuation(&r.p_power(6)), None);
        let pu = r.mul_p_power(&unit, 1);
        assert_eq!(r.valuation(&r.mul(&pu, &pu)), Some(2));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(RingContext::new(4, 1, 3, None).unwrap_err(), Error::NotPrime(4));
        assert_eq!(
            RingContext::new(5, 2, 3, Some(&[1, 0, 1])).unwrap_err(),
            Error::ReducibleModulus { p: 5 }
        );
        assert!(RingContext::new(5, 2, 0, None).is_err());
    }

    #[test]
    fn big_mode_matches_word_mode() {
        let small = ctx(5, 3, 20);
        let big = ctx(5, 3, 40);
        let x = big.from_coeffs(&[123456789, 987654321, 55555]);
        let y = big.from_coeffs(&[31415926, 2718281828, 1414]);
        let prod = big.mul(&x, &y);
        let sx = small.coerce(&x);
        let sy = small.coerce(&y);
        assert_eq!(small.coerce(&prod), small.mul(&sx, &sy));
        assert_eq!(small.coerce(&big.frobenius(&x, 1)), small.frobenius(&sx, 1));
        let inv = big.invert(&x).unwrap();
        assert_eq!(small.coerce(&inv), small.invert(&sx).unwrap());
    }

    fn contexts() -> impl Strategy<Value = RingContext> {
        prop_oneof![
            Just(ctx(2, 1, 12)),
            Just(ctx(2, 3, 9)),
            Just(ctx(3, 2, 7)),
            Just(ctx(5, 2, 6)),
            Just(ctx(3, 4, 5)),
            Just(ctx(5, 3, 30)),
        ]
    }

    fn element(r: &RingContext, words: &[u64]) -> RingElement {
        let mut it = words.iter().copied().cycle();
        r.element_from_words(|| it.next().unwrap())
    }

    proptest! {
        #[test]
        fn sigma_is_a_ring_homomorphism(r in contexts(), a in prop::collection::vec(any::<u64>(), 8), b in prop::collection::vec(any::<u64>(), 8)) {
            let x = element(&r, &a);
            let y = element(&r, &b);
            prop_assert_eq!(r.frobenius(&r.add(&x, &y), 1), r.add(&r.frobenius(&x, 1), &r.frobenius(&y, 1)));
            prop_assert_eq!(r.frobenius(&r.mul(&x, &y), 1), r.mul(&r.frobenius(&x, 1), &r.frobenius(&y, 1)));
            prop_assert_eq!(r.frobenius(&x, r.degree() as i64), x.clone());
            prop_assert_eq!(r.frobenius(&r.frobenius(&x, 1), -1), x.clone());
        }

        #[test]
        fn sigma_lifts_frobenius(r in contexts(), a in prop::collection::vec(any::<u64>(), 8)) {
            let x = element(&r, &a);
            let diff = r.sub(&r.frobenius(&x, 1), &r.pow(&x, r.p()));
            prop_assert!(r.valuation(&diff).map_or(true, |v| v >= 1));
        }

        #[test]
        fn valuation_is_additive(r in contexts(), a in prop::collection::vec(any::<u64>(), 8), b in prop::collection::vec(any::<u64>(), 8), i in 0u32..4, j in 0u32..4) {
            let mut u = element(&r, &a);
            let mut v = element(&r, &b);
            if !r.is_unit(&u) { u = r.add(&u, &r.one()); }
            if !r.is_unit(&v) { v = r.add(&v, &r.one()); }
            prop_assume!(r.is_unit(&u) && r.is_unit(&v));
            prop_assert_eq!(r.valuation(&r.mul(&u, &v)), Some(0));
            let x = r.mul_p_power(&u, i);
            let y = r.mul_p_power(&v, j);
            if i + j < r.precision() {
                prop_assert_eq!(r.valuation(&r.mul(&x, &y)), Some(i + j));
            }
            let inv = r.invert(&u).unwrap();
            prop_assert_eq!(r.mul(&u, &inv), r.one());
        }

        #[test]
        fn text_round_trip(r in contexts(), a in prop::collection::vec(any::<u64>(), 8)) {
            let x = element(&r, &a);
            prop_assert_eq!(r.parse(&r.format(&x)).unwrap(), x);
        }
    }

    #[test]
    fn sigma_lift_exhaustive_small() {
        // every element of W(F_9)/9 and W(F_8)/4
        for (p, l, n) in [(3u64, 2usize, 2u32), (2, 3, 2)] {
            let r = ctx(p, l, n);
            let m = p.pow(n);
            let total = m.pow(l as u32);
            for k in 0..total {
                let coeffs: Vec<u64> = (0..l).map(|i| (k / m.pow(i as u32)) % m).collect();
                let x = r.from_coeffs(&coeffs);
                let diff = r.sub(&r.frobenius(&x, 1), &r.pow(&x, p));
                assert!(r.valuation(&diff).map_or(true, |v| v >= 1));
            }
        }
    }
}
