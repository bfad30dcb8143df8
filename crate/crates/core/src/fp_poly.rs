//! Dense polynomials over the prime field `F_p`, lowest degree first.
//!
//! Only what the ring constructor needs: irreducibility testing, the
//! default defining polynomial, and inversion modulo `h̄`.

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    let mut result = 1u64;
    let mut base = a % p;
    let mut exp = p - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = mul_mod(result, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    result
}

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn degree(a: &[u64]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let len = a.len().max(b.len());
    let out = (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    trim(out)
}

/// Quotient and remainder; `b` must be nonzero.
fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let db = degree(b).expect("division by zero polynomial");
    let lead_inv = inv_mod(b[db], p);
    let mut rem = trim(a.to_vec());
    let mut quot = vec![0u64; rem.len().saturating_sub(db).max(1)];
    while let Some(dr) = degree(&rem) {
        if dr < db {
            break;
        }
        let c = mul_mod(rem[dr], lead_inv, p);
        let shift = dr - db;
        quot[shift] = c;
        for (j, &bj) in b.iter().enumerate().take(db + 1) {
            let t = mul_mod(c, bj, p);
            rem[shift + j] = (rem[shift + j] + p - t) % p;
        }
        rem = trim(rem);
    }
    (trim(quot), rem)
}

fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    divrem(a, b, p).1
}

fn monic(a: Vec<u64>, p: u64) -> Vec<u64> {
    match degree(&a) {
        None => a,
        Some(d) => {
            let inv = inv_mod(a[d], p);
            a.iter().map(|&c| mul_mod(c, inv, p)).collect()
        }
    }
}

fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    monic(x, p)
}

/// `base^(p^k) mod modulus`, by repeated `p`-th powering.
fn frobenius_pow(base: &[u64], k: usize, modulus: &[u64], p: u64) -> Vec<u64> {
    let mut cur = rem(base, modulus, p);
    for _ in 0..k {
        let mut result = vec![1u64];
        let mut b = cur.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                result = rem(&mul(&result, &b, p), modulus, p);
            }
            b = rem(&mul(&b, &b, p), modulus, p);
            e >>= 1;
        }
        cur = result;
    }
    cur
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test. `h` is reduced mod `p` and must be monic of degree ≥ 1.
pub(crate) fn is_irreducible(h: &[u64], p: u64) -> bool {
    let h: Vec<u64> = trim(h.iter().map(|&c| c % p).collect());
    let Some(l) = degree(&h) else {
        return false;
    };
    if l == 0 {
        return false;
    }
    let x = vec![0u64, 1];
    let full = frobenius_pow(&x, l, &h, p);
    if sub(&full, &rem(&x, &h, p), p) != Vec::<u64>::new() {
        return false;
    }
    for q in prime_divisors(l) {
        let partial = frobenius_pow(&x, l / q, &h, p);
        let g = gcd(&sub(&partial, &x, p), &h, p);
        if g != vec![1] {
            return false;
        }
    }
    true
}

/// The least monic irreducible polynomial of degree `l` over `F_p`, ordering
/// candidates by their coefficient vectors read from the top degree down
/// (equivalently by the integer `Σ c_i p^i`).
pub(crate) fn least_irreducible(p: u64, l: usize) -> Vec<u64> {
    let mut digits = vec![0u64; l];
    loop {
        let mut h = digits.clone();
        h.push(1);
        if is_irreducible(&h, p) {
            return h;
        }
        // increment, least significant digit = constant term
        let mut i = 0;
        loop {
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
            i += 1;
            assert!(i < l, "no irreducible polynomial found");
        }
    }
}

/// Inverse of `a` in `F_p[x]/(h)`, or `None` if `a ≡ 0`.
pub(crate) fn inverse_mod(a: &[u64], h: &[u64], p: u64) -> Option<Vec<u64>> {
    let h = trim(h.iter().map(|&c| c % p).collect());
    let a = rem(&trim(a.iter().map(|&c| c % p).collect()), &h, p);
    if a.is_empty() {
        return None;
    }
    // extended Euclid tracking the coefficient of `a`
    let (mut r0, mut r1) = (h.clone(), a);
    let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    // r0 is a nonzero constant since h is irreducible
    if degree(&r0) != Some(0) {
        return None;
    }
    let c = inv_mod(r0[0], p);
    Some(rem(&s0, &h, p).iter().map(|&x| mul_mod(x, c, p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    fn brute_irreducible(h: &[u64], p: u64) -> bool {
        // no monic factor of degree 1..=deg/2
        let l = h.len() - 1;
        for d in 1..=l / 2 {
            let count = p.pow(d as u32);
            for k in 0..count {
                let mut f: Vec<u64> = (0..d).map(|i| (k / p.pow(i as u32)) % p).collect();
                f.push(1);
                if rem(h, &f, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn rabin_agrees_with_trial_division() {
        for p in [2u64, 3, 5] {
            for l in 1..=4usize {
                let count = p.pow(l as u32);
                for k in 0..count {
                    let mut h: Vec<u64> = (0..l).map(|i| (k / p.pow(i as u32)) % p).collect();
                    h.push(1);
                    assert_eq!(is_irreducible(&h, p), brute_irreducible(&h, p), "p={p} h={h:?}");
                }
            }
        }
    }

    #[test]
    fn least_irreducible_quadratic_mod_5() {
        // x^2, x^2+1 = (x-2)(x+2) are reducible; x^2+2 has no root mod 5
        assert_eq!(least_irreducible(5, 2), vec![2, 0, 1]);
        assert_eq!(least_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(least_irreducible(3, 1), vec![0, 1]);
    }

    #[test]
    fn inverse_in_f4() {
        let h = vec![1, 1, 1];
        let inv = inverse_mod(&[0, 1], &h, 2).unwrap();
        // x * (x + 1) = x^2 + x = 1 mod h
        assert_eq!(inv, vec![1, 1]);
        assert!(inverse_mod(&[0], &h, 2).is_none());
    }
}
