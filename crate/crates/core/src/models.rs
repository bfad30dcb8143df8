//! Test-module generators and the elementary unitary `GU(a, b)` construction.

use num_integer::binomial;

use crate::crystal::DieudonneModule;
use crate::datum::{OrbitDatum, PelDatum};
use crate::error::{Error, Result};
use crate::matrix::{field, smith, subsets, Matrix};
use crate::polygon::{mu_ordinary_polygon, Polygon, Rational};
use crate::rng::SplitMix64;
use crate::witt::{RingContext, RingElement};

/// Ring with the default degree (lcm of orbit lengths) and precision.
pub fn default_ring(datum: &PelDatum) -> Result<RingContext> {
    RingContext::new(datum.p, datum.default_degree(), datum.default_precision(), None)
}

/// Diagonal block with `p` at (1-based) positions `j` where `f > n - j`.
fn standard_block(ring: &RingContext, n: usize, f: usize) -> Matrix {
    let entries: Vec<RingElement> = (1..=n)
        .map(|j| if f + j > n { ring.p_power(1) } else { ring.one() })
        .collect();
    Matrix::diagonal(ring, &entries)
}

/// The standard ordinary object: diagonal Frobenius in the `ε` basis.
pub fn standard_module(datum: &PelDatum, ring: &RingContext) -> Result<DieudonneModule> {
    let blocks = datum
        .orbits
        .iter()
        .map(|o| o.f.iter().map(|&f| standard_block(ring, o.n, f)).collect())
        .collect();
    DieudonneModule::new(ring.clone(), datum.clone(), blocks)
}

fn random_invertible(ring: &RingContext, n: usize, rng: &mut SplitMix64) -> Matrix {
    loop {
        let g = Matrix::from_fn(n, n, |_, _| ring.element_from_words(|| rng.next_u64()));
        if ring.is_unit(&g.det(ring)) {
            return g;
        }
    }
}

/// `G_{k+1}^{-1} A σ(G_k)` when integral, with the number of digits the
/// division consumed.
fn conjugate_block(ring: &RingContext, a: &Matrix, g_src: &Matrix, g_dst: &Matrix) -> Option<(Matrix, u32)> {
    let s = smith(ring, g_dst, true);
    let x = s.e.mul(ring, a).mul(ring, &g_src.frobenius(ring, 1));
    let mut rows = Vec::with_capacity(x.rows());
    let mut loss = 0;
    for (i, v) in s.valuations.iter().enumerate() {
        let v = (*v)?;
        loss = loss.max(v);
        let row: Vec<RingElement> = x
            .row(i)
            .iter()
            .map(|c| ring.divide_by_p_power(c, v).ok())
            .collect::<Option<_>>()?;
        rows.push(row);
    }
    let scaled = Matrix::from_rows(rows).ok()?;
    Some((s.c.mul(ring, &scaled), loss))
}

/// Deterministic pseudorandom change of lattice per embedding.
///
/// With `unit_only` every block is conjugated by an invertible matrix
/// (`A'_k = G_{k+1}^{-1} A_k σ(G_k)`). Otherwise the module is first
/// replaced by an `F`-stable sublattice cut out by upper-triangular
/// matrices with `p`-power diagonal and equal determinant valuation along
/// each orbit, computed with `budget` extra digits of precision.
pub fn isogeny_twist(m: &DieudonneModule, seed: u64, unit_only: bool, budget: u32) -> Result<DieudonneModule> {
    let base = if unit_only { m.clone() } else { sublattice(m, seed, budget)? };
    let ring = base.ring().clone();
    let n = base.n();
    let mut blocks = Vec::with_capacity(base.blocks().len());
    for (o, list) in base.blocks().iter().enumerate() {
        let e = list.len();
        let g: Vec<Matrix> = (0..e)
            .map(|k| random_invertible(&ring, n, &mut SplitMix64::keyed(seed, o as u64, k as u64)))
            .collect();
        let mut out = Vec::with_capacity(e);
        for (k, a) in list.iter().enumerate() {
            let g_inv = g[(k + 1) % e].inverse(&ring)?;
            out.push(g_inv.mul(&ring, a).mul(&ring, &g[k].frobenius(&ring, 1)));
        }
        blocks.push(out);
    }
    DieudonneModule::new(ring, base.datum().clone(), blocks)
}

const SUBLATTICE_ATTEMPTS: usize = 64;

fn sublattice(m: &DieudonneModule, seed: u64, budget: u32) -> Result<DieudonneModule> {
    let n = m.n();
    let target = m.precision();
    let lifted = m.with_precision(target + budget)?;
    let ring = lifted.ring().clone();
    let mut blocks = Vec::with_capacity(m.blocks().len());
    for (o, orbit) in m.datum().orbits.iter().enumerate() {
        let e = orbit.e;
        let mut rng = SplitMix64::keyed(seed ^ 0x5EED_1507, o as u64, 0);
        let mut chosen = None;
        for _ in 0..SUBLATTICE_ATTEMPTS {
            // same number t of p's on each diagonal keeps det valuations fixed
            let t = 1 + rng.below(n.min(budget.max(1) as usize) as u64) as usize;
            let g: Vec<Matrix> = (0..e)
                .map(|_| {
                    let mut diag = vec![false; n];
                    let mut placed = 0;
                    while placed < t {
                        let i = rng.below(n as u64) as usize;
                        if !diag[i] {
                            diag[i] = true;
                            placed += 1;
                        }
                    }
                    Matrix::from_fn(n, n, |i, j| {
                        if i == j {
                            if diag[i] {
                                ring.p_power(1)
                            } else {
                                ring.one()
                            }
                        } else if i < j {
                            ring.from_u64(rng.below(m.datum().p))
                        } else {
                            ring.zero()
                        }
                    })
                })
                .collect();
            if let Some(list) = try_sublattice(&lifted, o, &g, budget)? {
                chosen = Some(list);
                break;
            }
        }
        let list = match chosen {
            Some(list) => list,
            None => {
                // F^e-image lattice: always stable, always valid
                let g: Vec<Matrix> = (0..e).map(|k| lifted.frobenius_power(o, k)).collect();
                try_sublattice(&lifted, o, &g, budget)?.ok_or_else(|| {
                    Error::Inconsistency("image of F^e is not a valid sublattice".into())
                })?
            }
        };
        blocks.push(list);
    }
    let tmp = DieudonneModule::new(ring, m.datum().clone(), blocks)?;
    tmp.with_precision(target)
}

fn try_sublattice(m: &DieudonneModule, orbit: usize, g: &[Matrix], budget: u32) -> Result<Option<Vec<Matrix>>> {
    let ring = m.ring();
    let od = &m.datum().orbits[orbit];
    let e = od.e;
    let mut out = Vec::with_capacity(e);
    for k in 0..e {
        let Some((a, loss)) = conjugate_block(ring, m.block(orbit, k), &g[k], &g[(k + 1) % e]) else {
            return Ok(None);
        };
        if loss > budget {
            return Err(Error::PrecisionBudget { needed: loss, budget });
        }
        let vals = smith(ring, &a, false).valuations;
        let ones = vals.iter().filter(|v| **v == Some(1)).count();
        if vals.iter().any(|v| !matches!(v, Some(0) | Some(1))) || ones != od.f[k] {
            return Ok(None);
        }
        out.push(a);
    }
    Ok(Some(out))
}

/// Number of permutation-family members of an orbit.
pub fn permutation_family_size(orbit: &OrbitDatum) -> u64 {
    let fact: u64 = (1..=orbit.n as u64).product();
    orbit
        .f
        .iter()
        .map(|&f| fact * binomial(orbit.n as u64, f as u64))
        .product()
}

fn nth_permutation(n: usize, mut index: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let fact: u64 = (1..=k as u64).product();
        let i = (index / fact) as usize;
        index %= fact;
        out.push(pool.remove(i));
    }
    out
}

/// Member `index` of the permutation family (no size guard). Blocks are
/// `P · D` with `P` a permutation matrix and `D` diagonal with `f(τ)`
/// entries `p`; positions vary slowest-last in mixed radix.
pub fn permutation_member(orbit: &OrbitDatum, p: u64, index: u64) -> Result<DieudonneModule> {
    let datum = PelDatum::new(p, vec![orbit.clone()], 1)?;
    let ring = default_ring(&datum)?;
    permutation_member_in(&datum, &ring, index)
}

fn permutation_member_in(datum: &PelDatum, ring: &RingContext, index: u64) -> Result<DieudonneModule> {
    let blocks = permutation_blocks(ring, &datum.orbits[0], index)?;
    DieudonneModule::new(ring.clone(), datum.clone(), vec![blocks])
}

/// Blocks of family member `index` for one orbit over a given ring.
pub fn permutation_blocks(ring: &RingContext, orbit: &OrbitDatum, mut index: u64) -> Result<Vec<Matrix>> {
    let n = orbit.n;
    let fact: u64 = (1..=n as u64).product();
    if index >= permutation_family_size(orbit) {
        return Err(Error::SizeGuard(format!("family member {index} out of range")));
    }
    let mut blocks = Vec::with_capacity(orbit.e);
    for &f in &orbit.f {
        let places = subsets(n, f);
        let radix = fact * places.len() as u64;
        let digit = index % radix;
        index /= radix;
        let perm = nth_permutation(n, digit / places.len() as u64);
        let place = &places[(digit % places.len() as u64) as usize];
        blocks.push(Matrix::from_fn(n, n, |i, j| {
            if perm[j] != i {
                ring.zero()
            } else if place.contains(&j) {
                ring.p_power(1)
            } else {
                ring.one()
            }
        }));
    }
    Ok(blocks)
}

/// All permutation-family members in index order; requires `n ≤ 4`,
/// `e ≤ 3`.
pub fn permutation_family(orbit: &OrbitDatum, p: u64) -> Result<impl Iterator<Item = DieudonneModule>> {
    if orbit.n > 4 || orbit.e > 3 {
        return Err(Error::SizeGuard(format!(
            "permutation family needs n <= 4 and e <= 3, got n = {}, e = {}",
            orbit.n, orbit.e
        )));
    }
    let datum = PelDatum::new(p, vec![orbit.clone()], 1)?;
    let ring = default_ring(&datum)?;
    let size = permutation_family_size(orbit);
    Ok((0..size).map(move |i| permutation_member_in(&datum, &ring, i).expect("index in range")))
}

// ---- p-rank -------------------------------------------------------------

/// Rank of `F̄^{e·n}` summed over the embeddings of every orbit, times `r`.
pub fn frobenius_stable_rank(m: &DieudonneModule) -> usize {
    let ring = m.ring();
    let fld = ring.residue_field();
    let mut total = 0;
    for (o, od) in m.datum().orbits.iter().enumerate() {
        let b = m.frobenius_power(o, 0).reduce(ring);
        let mut w = b.clone();
        for _ in 1..od.n.max(1) {
            w = b.mul(fld, &w.frobenius(fld, od.e as i64));
        }
        total += od.e * field::rank(fld, &w);
    }
    total * m.datum().r
}

/// Matrix part `W` of `V̄^{steps}` starting on `M̄_k`, written
/// `y ↦ W · σ^{-steps}(y)`.
fn reduced_verschiebung_iterate(m: &DieudonneModule, orbit: usize, k: usize, steps: usize) -> Result<Matrix> {
    let ring = m.ring();
    let fld = ring.residue_field();
    let e = m.datum().orbits[orbit].e;
    let vs: Vec<Matrix> = (0..e)
        .map(|t| m.verschiebung(orbit, t).map(|v| v.reduce(ring)))
        .collect::<Result<_>>()?;
    let mut w = Matrix::identity(fld, m.n());
    let mut pos = k;
    for _ in 0..steps {
        // V : M_pos → M_{pos-1} has matrix V_{pos-1}
        pos = (pos + e - 1) % e;
        w = vs[pos].mul(fld, &w).frobenius(fld, -1);
    }
    Ok(w)
}

/// Rank of `V̄^{e·n}` summed over embeddings, times `r`.
pub fn verschiebung_stable_rank(m: &DieudonneModule) -> Result<usize> {
    let fld = m.ring().residue_field();
    let mut total = 0;
    for (o, od) in m.datum().orbits.iter().enumerate() {
        let w = reduced_verschiebung_iterate(m, o, 0, od.e * od.n)?;
        total += od.e * field::rank(fld, &w);
    }
    Ok(total * m.datum().r)
}

/// Multiplicity of slope 0 over the full module (all embeddings, `r`
/// copies), read from the Newton polygons.
pub fn slope_zero_multiplicity(m: &DieudonneModule) -> Result<usize> {
    let mut total = 0;
    for (o, od) in m.datum().orbits.iter().enumerate() {
        total += od.e * m.newton_polygon(o)?.multiplicity(Rational::from_integer(0));
    }
    Ok(total * m.datum().r)
}

/// p-rank: the stable rank of iterated reduced Frobenius, asserted equal to
/// the slope-0 multiplicity.
pub fn p_rank(m: &DieudonneModule) -> Result<usize> {
    let by_rank = frobenius_stable_rank(m);
    let by_slope = slope_zero_multiplicity(m)?;
    if by_rank != by_slope {
        return Err(Error::Inconsistency(format!(
            "stable Frobenius rank {by_rank} differs from slope-0 multiplicity {by_slope}"
        )));
    }
    Ok(by_rank)
}

// ---- unitary GU(a, b) ---------------------------------------------------

/// Signature `(a, b)` with `a < b` at a prime inert in the quadratic field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GuDatum {
    pub a: usize,
    pub b: usize,
    pub r: usize,
    pub p: u64,
}

impl GuDatum {
    pub fn new(a: usize, b: usize, r: usize, p: u64) -> Result<Self> {
        if a == b {
            return Err(Error::SplitSignature { a: a as u32 });
        }
        if a == 0 || a > b || r == 0 {
            return Err(Error::InvalidDatum(format!(
                "GU signature needs 1 <= a < b and r >= 1, got ({a}, {b}), r = {r}"
            )));
        }
        Ok(GuDatum { a, b, r, p })
    }

    pub fn orbit(&self) -> OrbitDatum {
        OrbitDatum {
            e: 2,
            n: self.a + self.b,
            f: vec![self.b, self.a],
        }
    }

    pub fn pel_datum(&self) -> PelDatum {
        PelDatum {
            p: self.p,
            orbits: vec![self.orbit()],
            r: self.r,
            pairing: Some(vec![((0, 0), (0, 1))]),
        }
    }

    pub fn standard_module(&self) -> Result<DieudonneModule> {
        let d = self.pel_datum();
        standard_module(&d, &default_ring(&d)?)
    }
}

/// Per-`F` polygon of the full module: slopes `0, 1/2, 1` with
/// multiplicities `2ar, 2(b−a)r, 2ar`.
pub fn gu_newton_reference(gu: &GuDatum) -> Polygon {
    mu_ordinary_polygon(&gu.orbit()).renormalize(2, 2 * gu.r)
}

/// Position of the embedding whose `Fil¹` has rank `rank` in a two-element
/// orbit.
fn gu_position(m: &DieudonneModule, rank: usize) -> Result<usize> {
    let d = m.datum();
    if d.orbits.len() != 1 || d.orbits[0].e != 2 {
        return Err(Error::InvalidDatum("expected a single orbit of length 2".into()));
    }
    let f = &d.orbits[0].f;
    if f[0] == f[1] {
        return Err(Error::SplitSignature { a: f[0] as u32 });
    }
    if f[0] + f[1] != d.n() {
        return Err(Error::InvalidDatum("multiplication type violates the signature".into()));
    }
    f.iter()
        .position(|&x| x == rank)
        .ok_or_else(|| Error::InvalidDatum(format!("no embedding with Fil¹ rank {rank}")))
}

/// Top exterior power of `V̄²` restricted to `Fil¹` at position `k`.
pub fn elementary_hasse_at(m: &DieudonneModule, k: usize) -> Result<RingElement> {
    let ring = m.ring();
    let fld = ring.residue_field();
    let n = m.n();
    let fil = m.hodge_filtration(0, k, 1)?;
    let w = reduced_verschiebung_iterate(m, 0, k, 2)?;
    // Fil¹ is in reduced echelon form: coordinates are read at pivot columns
    let pivots: Vec<usize> = fil
        .iter()
        .map(|v| v.iter().position(|x| !fld.is_zero(x)).expect("nonzero basis vector"))
        .collect();
    let mut images = Vec::with_capacity(fil.len());
    for v in &fil {
        let twisted: Vec<RingElement> = v.iter().map(|x| fld.frobenius(x, -2)).collect();
        let img = w.mul_vec(fld, &twisted);
        if !field::contained_in(fld, n, &[img.clone()], &fil) {
            return Err(Error::Inconsistency("reduced Verschiebung leaves Fil¹".into()));
        }
        images.push(pivots.iter().map(|&c| img[c].clone()).collect::<Vec<_>>());
    }
    // images[j] are the coordinates of V̄²(fil_j); det is transpose-invariant
    let restricted = Matrix::from_rows(images)?;
    Ok(restricted.det(fld))
}

/// Elementary Hasse scalar on `ω_a` (the embedding of `Fil¹` rank `a`).
pub fn elementary_mu_hasse(m: &DieudonneModule) -> Result<RingElement> {
    let f = &m.datum().orbits.first().ok_or_else(|| Error::InvalidDatum("no orbits".into()))?.f;
    let a = *f.iter().min().expect("nonempty");
    elementary_hasse_at(m, gu_position(m, a)?)
}

/// Same construction on `ω_b`.
pub fn elementary_hasse_on_b(m: &DieudonneModule) -> Result<RingElement> {
    let f = &m.datum().orbits.first().ok_or_else(|| Error::InvalidDatum("no orbits".into()))?.f;
    let b = *f.iter().max().expect("nonempty");
    elementary_hasse_at(m, gu_position(m, b)?)
}

/// Whether the per-`F` Newton slopes are symmetric under `λ ↦ 1 − λ`, a
/// necessary condition for a polarization.
pub fn has_symmetric_newton(m: &DieudonneModule) -> Result<bool> {
    let mut slopes = Vec::new();
    for (o, od) in m.datum().orbits.iter().enumerate() {
        let poly = m.newton_polygon(o)?.renormalize(od.e as i64, od.e);
        slopes.extend(poly.slopes());
    }
    let mut dual: Vec<Rational> = slopes.iter().map(|s| Rational::from_integer(1) - s).collect();
    dual.sort();
    Ok(dual == slopes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orbit(e: usize, n: usize, f: &[usize]) -> OrbitDatum {
        OrbitDatum::new(e, n, f.to_vec()).unwrap()
    }

    #[test]
    fn standard_blocks_pattern() {
        let d = PelDatum::new(3, vec![orbit(3, 2, &[2, 1, 0])], 1).unwrap();
        let ring = default_ring(&d).unwrap();
        let m = standard_module(&d, &ring).unwrap();
        let p = ring.p_power(1);
        let one = ring.one();
        assert_eq!(m.block(0, 0), &Matrix::diagonal(&ring, &[p.clone(), p.clone()]));
        assert_eq!(m.block(0, 1), &Matrix::diagonal(&ring, &[one.clone(), p.clone()]));
        assert_eq!(m.block(0, 2), &Matrix::diagonal(&ring, &[one.clone(), one.clone()]));
        assert_eq!(
            m.frobenius_power(0, 0),
            Matrix::diagonal(&ring, &[p.clone(), ring.p_power(2)])
        );
        assert!(m.validate().passed());
    }

    #[test]
    fn family_counts() {
        assert_eq!(permutation_family(&orbit(1, 2, &[1]), 2).unwrap().count(), 4);
        assert_eq!(permutation_family_size(&orbit(3, 2, &[2, 1, 0])), 16);
        assert_eq!(permutation_family(&orbit(3, 2, &[2, 1, 0]), 3).unwrap().count(), 16);
        assert!(matches!(permutation_family(&orbit(1, 5, &[1]), 2), Err(Error::SizeGuard(_))));
        assert!(matches!(permutation_family(&orbit(4, 2, &[1, 1, 1, 1]), 2), Err(Error::SizeGuard(_))));
    }

    #[test]
    fn family_contains_standard() {
        let o = orbit(2, 3, &[2, 1]);
        let d = PelDatum::new(2, vec![o.clone()], 1).unwrap();
        let std = standard_module(&d, &default_ring(&d).unwrap()).unwrap();
        assert!(permutation_family(&o, 2).unwrap().any(|m| m.blocks() == std.blocks()));
    }

    #[test]
    fn gu_one_two() {
        let gu = GuDatum::new(1, 2, 1, 5).unwrap();
        let m = gu.standard_module().unwrap();
        assert!(m.validate().passed());
        let fld = m.ring().residue_field();
        let v0 = m.verschiebung(0, 0).unwrap().reduce(m.ring());
        let v1 = m.verschiebung(0, 1).unwrap().reduce(m.ring());
        let d = |x: &[u64]| Matrix::diagonal(fld, &x.iter().map(|&c| fld.from_u64(c)).collect::<Vec<_>>());
        // A_0 = diag(1, p, p), A_1 = diag(1, 1, p), V_k = p A_k^{-1}
        assert_eq!(v0, d(&[0, 1, 1]));
        assert_eq!(v1, d(&[0, 0, 1]));
        assert_eq!(p_rank(&m).unwrap(), 2);
        assert_eq!(verschiebung_stable_rank(&m).unwrap(), 2);
        assert!(fld.is_one(&elementary_mu_hasse(&m).unwrap()));
        assert!(fld.is_zero(&elementary_hasse_on_b(&m).unwrap()));
        let reference = gu_newton_reference(&gu);
        let half = Rational::new(1, 2);
        assert_eq!(
            reference.segments(),
            vec![(Rational::from_integer(0), 2), (half, 2), (Rational::from_integer(1), 2)]
        );
        let gu = GuDatum::new(1, 3, 2, 3).unwrap();
        let counts: Vec<usize> = gu_newton_reference(&gu).segments().iter().map(|s| s.1).collect();
        assert_eq!(counts, vec![4, 8, 4]);
        assert_eq!(GuDatum::new(2, 2, 1, 3), Err(Error::SplitSignature { a: 2 }));
    }

    #[test]
    fn etale_p_rank() {
        let d = PelDatum::new(3, vec![orbit(2, 3, &[0, 0])], 1).unwrap();
        let m = standard_module(&d, &default_ring(&d).unwrap()).unwrap();
        assert_eq!(p_rank(&m).unwrap(), 6);
    }

    #[test]
    fn twists_are_deterministic_and_valid() {
        let d = PelDatum::new(3, vec![orbit(3, 2, &[2, 1, 0])], 1).unwrap();
        let m = standard_module(&d, &default_ring(&d).unwrap()).unwrap();
        for unit_only in [true, false] {
            let t1 = isogeny_twist(&m, 11, unit_only, 4).unwrap();
            let t2 = isogeny_twist(&m, 11, unit_only, 4).unwrap();
            assert_eq!(t1, t2);
            assert_ne!(t1, m);
            assert!(t1.validate().passed(), "{:?}", t1.validate());
            assert!(t1.is_mu_ordinary().unwrap());
        }
    }
}
