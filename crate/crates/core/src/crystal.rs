//! Dieudonné modules with multiplication: per-embedding blocks of a
//! σ-semilinear Frobenius, and the polygons and filtrations attached to it.
//!
//! Block `A_k` of an orbit is the matrix of `F : M_k → M_{k+1}` (indices
//! mod `e`), acting as `F(x) = A_k · σ(x)` in the standard basis.

use serde::Serialize;

use crate::datum::{Embedding, PelDatum};
use crate::error::{Error, Result};
use crate::matrix::{field, smith, Matrix};
use crate::poly::{self, Poly};
use crate::polygon::{mu_ordinary_polygon, Polygon, Rational};
use crate::witt::{RingContext, RingElement};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DieudonneModule {
    ring: RingContext,
    datum: PelDatum,
    blocks: Vec<Vec<Matrix>>,
}

/// One named check of [`DieudonneModule::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub embedding: Option<Embedding>,
    pub passed: bool,
    /// Failed only because a needed valuation is ⊥ at this precision.
    pub undecided: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// An isoclinic piece of `(M_τ, F^e)`, in the `F^e` normalization.
#[derive(Clone, Debug)]
pub struct SlopePiece {
    pub slope: Rational,
    /// `n × rank` matrix whose columns span the piece (saturated).
    pub basis: Matrix,
    /// Digits of the basis that are trustworthy.
    pub effective_precision: u32,
}

#[derive(Clone, Debug)]
pub struct SlopeDecomposition {
    pub pieces: Vec<SlopePiece>,
}

impl SlopeDecomposition {
    /// Residue-field span of all pieces with slope `≥ bound`, in canonical
    /// echelon form.
    pub fn reduction_at_least(&self, ring: &RingContext, bound: Rational) -> Vec<Vec<RingElement>> {
        let field_ctx = ring.residue_field();
        let n = self.pieces.first().map_or(0, |p| p.basis.rows());
        let vectors: Vec<Vec<RingElement>> = self
            .pieces
            .iter()
            .filter(|p| p.slope >= bound)
            .flat_map(|p| p.basis.reduce(ring).columns())
            .collect();
        field::canonical_span(field_ctx, n, &vectors)
    }
}

/// Polynomial with roots of valuation exactly `slope` (in the Φ scale), and
/// the precision it is known to.
struct SlopeFactor {
    slope: i64,
    factor: Poly,
    precision: u32,
}

impl DieudonneModule {
    pub fn new(ring: RingContext, datum: PelDatum, blocks: Vec<Vec<Matrix>>) -> Result<Self> {
        datum.check_structure()?;
        if ring.p() != datum.p {
            return Err(Error::InvalidModule(format!(
                "ring prime {} differs from datum prime {}",
                ring.p(),
                datum.p
            )));
        }
        if blocks.len() != datum.orbits.len() {
            return Err(Error::InvalidModule(format!(
                "{} block lists for {} orbits",
                blocks.len(),
                datum.orbits.len()
            )));
        }
        let n = datum.n();
        for (o, (orbit, list)) in datum.orbits.iter().zip(&blocks).enumerate() {
            if ring.degree() % orbit.e != 0 {
                return Err(Error::InvalidModule(format!(
                    "ring degree {} is not a multiple of orbit length {}",
                    ring.degree(),
                    orbit.e
                )));
            }
            if list.len() != orbit.e {
                return Err(Error::InvalidModule(format!(
                    "orbit {o} has {} blocks, expected {}",
                    list.len(),
                    orbit.e
                )));
            }
            if list.iter().any(|b| b.rows() != n || b.cols() != n) {
                return Err(Error::InvalidModule(format!("orbit {o} has a block that is not {n}x{n}")));
            }
        }
        Ok(DieudonneModule { ring, datum, blocks })
    }

    pub fn ring(&self) -> &RingContext {
        &self.ring
    }

    pub fn datum(&self) -> &PelDatum {
        &self.datum
    }

    pub fn blocks(&self) -> &[Vec<Matrix>] {
        &self.blocks
    }

    pub fn block(&self, orbit: usize, k: usize) -> &Matrix {
        let e = self.blocks[orbit].len();
        &self.blocks[orbit][k % e]
    }

    pub fn n(&self) -> usize {
        self.datum.n()
    }

    pub fn precision(&self) -> u32 {
        self.ring.precision()
    }

    /// Same module read at another precision: blocks keep their canonical
    /// representatives (lifted or reduced).
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        let ring = self.ring.with_precision(precision)?;
        let blocks = self
            .blocks
            .iter()
            .map(|list| list.iter().map(|b| b.coerce(&ring)).collect())
            .collect();
        DieudonneModule::new(ring, self.datum.clone(), blocks)
    }

    /// Cyclic position of label `τ_{i+1}` (labels sorted by decreasing f).
    pub fn label_position(&self, orbit: usize, label: usize) -> usize {
        self.datum.orbits[orbit].sorted_labels()[label]
    }

    fn orbit_len(&self, orbit: usize) -> usize {
        self.datum.orbits[orbit].e
    }

    // ---- validation ---------------------------------------------------

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let ring = &self.ring;
        for (o, orbit) in self.datum.orbits.iter().enumerate() {
            for k in 0..orbit.e {
                let block = self.block(o, k);
                let f = orbit.f[k];
                let s = smith(ring, block, false);
                let vals = &s.valuations;
                let ok = vals.iter().all(|v| matches!(v, Some(0) | Some(1)))
                    && vals.iter().filter(|v| **v == Some(1)).count() == f;
                // ⊥ means valuation ≥ N, which only rules out 1 when N ≥ 2
                let open = ring.precision() < 2
                    && vals.iter().all(|v| matches!(v, Some(0) | Some(1) | None))
                    && vals.iter().filter(|v| **v != Some(0)).count() == f;
                report.checks.push(Check {
                    name: "elementary_divisors".into(),
                    embedding: Some((o, k)),
                    passed: ok,
                    undecided: !ok && open,
                    detail: format!(
                        "valuations {}; expected {f} ones and {} zeros",
                        fmt_valuations(vals),
                        orbit.n - f
                    ),
                });
                let dv = ring.valuation(&block.det(ring));
                report.checks.push(Check {
                    name: "determinant_valuation".into(),
                    embedding: Some((o, k)),
                    passed: dv == Some(f as u32),
                    undecided: dv.is_none() && f as u32 >= ring.precision(),
                    detail: format!("det valuation {}; expected {f}", fmt_valuation(dv)),
                });
            }
        }
        if let Some(pairs) = &self.datum.pairing {
            let bad = self.datum.signature_violations();
            for &(a, b) in pairs {
                let fa = self.datum.orbits[a.0].f[a.1];
                let fb = self.datum.orbits[b.0].f[b.1];
                report.checks.push(Check {
                    name: "signature".into(),
                    embedding: Some(a),
                    passed: !bad.contains(&(a, b)),
                    undecided: false,
                    detail: format!("f{a:?} + f{b:?} = {fa} + {fb}; expected {}", self.n()),
                });
            }
        }
        report
    }

    /// Fails with [`Error::InvalidModule`] listing every failed check.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.passed() {
            return Ok(());
        }
        if report.failures().all(|c| c.undecided) {
            return Err(Error::precision("validating elementary divisors", self.precision()));
        }
        let detail: Vec<String> = report
            .failures()
            .map(|c| format!("{} at {:?}: {}", c.name, c.embedding, c.detail))
            .collect();
        Err(Error::InvalidModule(detail.join("; ")))
    }

    // ---- Frobenius powers ---------------------------------------------

    /// Matrix `B` of `F^e` on `M_k`: `F^e(x) = B · σ^e(x)` with
    /// `B = A_{k+e-1} σ(A_{k+e-2}) ⋯ σ^{e-1}(A_k)`.
    pub fn frobenius_power(&self, orbit: usize, k: usize) -> Matrix {
        let e = self.orbit_len(orbit);
        let ring = &self.ring;
        let mut b = self.block(orbit, k).clone();
        for t in 1..e {
            b = self.block(orbit, k + t).mul(ring, &b.frobenius(ring, 1));
        }
        b
    }

    /// The linear operator `Ψ = (F^e)^M` on `M_k` with `M = lcm(e, L)/e`,
    /// so that `σ^{eM}` is the identity. Returns `(Ψ, M)`.
    pub fn linearized_power(&self, orbit: usize, k: usize) -> (Matrix, u32) {
        let e = self.orbit_len(orbit);
        let l = self.ring.degree();
        let m = num_integer::lcm(e, l) / e;
        let b = self.frobenius_power(orbit, k);
        let ring = &self.ring;
        let mut psi = b.clone();
        for _ in 1..m {
            psi = b.mul(ring, &psi.frobenius(ring, e as i64));
        }
        (psi, m as u32)
    }

    // ---- polygons -----------------------------------------------------

    /// Elementary-divisor polygon of `F^e` on `M_k`.
    pub fn hodge_polygon(&self, orbit: usize, k: usize) -> Result<Polygon> {
        let b = self.frobenius_power(orbit, k);
        let s = smith(&self.ring, &b, false);
        let vals = s
            .valuations
            .iter()
            .map(|v| v.map(i64::from))
            .collect::<Option<Vec<i64>>>()
            .ok_or_else(|| Error::precision("computing a Hodge polygon", self.precision()))?;
        Ok(Polygon::from_integer_slopes(&vals))
    }

    /// Newton polygon of `(M_τ, F^e)`, computed at cyclic position 0.
    pub fn newton_polygon(&self, orbit: usize) -> Result<Polygon> {
        self.newton_polygon_at(orbit, 0)
    }

    pub fn newton_polygon_at(&self, orbit: usize, k: usize) -> Result<Polygon> {
        let (psi, m) = self.linearized_power(orbit, k);
        let hull = char_poly_hull(&self.ring, &psi.charpoly(&self.ring))?;
        Ok(hull.renormalize(m as i64, 1))
    }

    pub fn is_mu_ordinary(&self) -> Result<bool> {
        for (o, orbit) in self.datum.orbits.iter().enumerate() {
            if self.newton_polygon(o)? != mu_ordinary_polygon(orbit) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    // ---- Verschiebung and filtrations ---------------------------------

    /// Matrix `V_k = p · A_k^{-1}` of `V : M_{k+1} → M_k`, acting as
    /// `V(y) = σ^{-1}(V_k · y)`.
    pub fn verschiebung(&self, orbit: usize, k: usize) -> Result<Matrix> {
        let ring = &self.ring;
        let s = smith(ring, self.block(orbit, k), true);
        let scale: Vec<RingElement> = s
            .valuations
            .iter()
            .map(|v| match v {
                Some(0) => Ok(ring.p_power(1)),
                Some(1) => Ok(ring.one()),
                _ => Err(Error::InvalidModule(format!(
                    "block ({orbit}, {k}) has elementary divisor valuation {}; p·A^-1 is not integral",
                    fmt_valuation(*v)
                ))),
            })
            .collect::<Result<_>>()?;
        // A = E^{-1} D C^{-1}, so p A^{-1} = C (p D^{-1}) E
        Ok(s.c.mul(ring, &Matrix::diagonal(ring, &scale)).mul(ring, &s.e))
    }

    /// `{x mod p : F x ∈ p^j M}` inside `M̄_k`, as a canonical residue-field
    /// basis.
    pub fn hodge_filtration(&self, orbit: usize, k: usize, j: u32) -> Result<Vec<Vec<RingElement>>> {
        if j == 0 || j >= self.precision() {
            return Err(Error::precision("computing a Hodge filtration", self.precision()));
        }
        let ring = &self.ring;
        let field_ctx = ring.residue_field();
        let s = smith(ring, self.block(orbit, k), true);
        let c_bar = s.c.reduce(ring);
        let vectors: Vec<Vec<RingElement>> = s
            .valuations
            .iter()
            .enumerate()
            .filter(|(_, v)| v.map_or(true, |v| v >= j))
            .map(|(m, _)| c_bar.column(m).iter().map(|x| field_ctx.frobenius(x, -1)).collect())
            .collect();
        Ok(field::canonical_span(field_ctx, self.n(), &vectors))
    }

    /// Generators of the lattice `{x ∈ M_k : F x ∈ p^j M_{k+1}}`.
    pub fn frobenius_preimage(&self, orbit: usize, k: usize, j: u32) -> Result<Vec<Vec<RingElement>>> {
        let ring = &self.ring;
        if j >= self.precision() {
            return Err(Error::precision("computing a Frobenius preimage", self.precision()));
        }
        let s = smith(ring, self.block(orbit, k), true);
        Ok(s
            .valuations
            .iter()
            .enumerate()
            .map(|(m, v)| {
                let shift = v.map_or(0, |v| j.saturating_sub(v));
                s.c.column(m)
                    .iter()
                    .map(|x| ring.frobenius(&ring.mul_p_power(x, shift), -1))
                    .collect()
            })
            .collect())
    }

    /// Whether `{x : F x ∈ p^j M} ⊆ p^{j-1} M` on `M_k`.
    pub fn preimage_contained(&self, orbit: usize, k: usize, j: u32) -> Result<bool> {
        let ring = &self.ring;
        let gens = self.frobenius_preimage(orbit, k, j)?;
        Ok(gens.iter().all(|g| {
            g.iter()
                .all(|x| ring.valuation(x).map_or(true, |v| v + 1 >= j))
        }))
    }

    // ---- slope decomposition ------------------------------------------

    /// Isoclinic decomposition of `(M_k, F^e)`; pieces of multiplicity zero
    /// are omitted and pieces come in increasing slope order.
    pub fn slope_decomposition(&self, orbit: usize, k: usize) -> Result<SlopeDecomposition> {
        let ring = &self.ring;
        let n = self.n();
        let (psi, m_pow) = self.linearized_power(orbit, k);
        let psi_hull = char_poly_hull(ring, &psi.charpoly(ring))?;
        let segments = psi_hull.segments();
        if segments.len() <= 1 {
            let slope = segments
                .first()
                .map_or(Rational::from_integer(0), |s| s.0 / Rational::from_integer(m_pow as i64));
            return Ok(SlopeDecomposition {
                pieces: vec![SlopePiece {
                    slope,
                    basis: Matrix::identity(ring, n),
                    effective_precision: self.precision(),
                }],
            });
        }
        let den = psi_hull.denominator_lcm();
        let phi = if den > 1 { psi.pow(ring, den as u64) } else { psi };
        let f = phi.charpoly(ring);
        if den > 1 {
            // integer slopes after raising to the power; recheck resolvability
            char_poly_hull(ring, &f)?;
        }
        let factors = split_by_slope(ring, &f)?;
        let scale = Rational::from_integer(den * m_pow as i64);
        let mut pieces = Vec::with_capacity(factors.len());
        for sf in factors {
            let m = sf.factor.len() - 1;
            let (cofactor, _) = poly::divrem(ring, &f, &sf.factor);
            let (v, r) = bezout_cofactor(ring, &sf.factor, &cofactor)?;
            let x = poly::eval_matrix(ring, &poly::mul(ring, &v, &cofactor), &phi);
            let s = smith(ring, &x, true);
            let basis = s.e_inv.select_columns(&(0..m).collect::<Vec<_>>());
            let effective = sf.precision.saturating_sub(r);
            if effective == 0 || s.valuations.iter().take(m).any(|v| v.is_none()) {
                return Err(Error::precision("separating slope pieces", self.precision()));
            }
            pieces.push(SlopePiece {
                slope: Rational::from_integer(sf.slope) / scale,
                basis,
                effective_precision: effective,
            });
        }
        Ok(SlopeDecomposition { pieces })
    }
}

fn fmt_valuation(v: Option<u32>) -> String {
    v.map_or("⊥".into(), |v| v.to_string())
}

fn fmt_valuations(vs: &[Option<u32>]) -> String {
    let parts: Vec<String> = vs.iter().map(|v| fmt_valuation(*v)).collect();
    format!("[{}]", parts.join(", "))
}

/// Lower hull of `(n - i, v(c_i))` for a monic characteristic polynomial
/// `Σ c_i T^i`. Coefficients vanishing at working precision are ignored when
/// the hull provably passes below them; otherwise precision is exhausted.
pub fn char_poly_hull(ring: &RingContext, coeffs: &[RingElement]) -> Result<Polygon> {
    let n = coeffs.len() - 1;
    let prec = ring.precision();
    let mut points = Vec::new();
    let mut unknown = Vec::new();
    for (i, c) in coeffs.iter().enumerate() {
        let x = (n - i) as i64;
        match ring.valuation(c) {
            Some(v) => points.push((x, v as i64)),
            None => unknown.push(x),
        }
    }
    if unknown.contains(&(n as i64)) {
        return Err(Error::precision("reading the determinant valuation", prec));
    }
    let hull = Polygon::lower_hull(&points)?;
    for x in unknown {
        if hull.value_at(x).expect("inside range") > Rational::from_integer(prec as i64) {
            return Err(Error::precision("resolving a Newton polygon vertex", prec));
        }
    }
    Ok(hull)
}

fn reduce_poly(ring: &RingContext, a: &[RingElement]) -> Poly {
    let field_ctx = ring.residue_field();
    a.iter().map(|c| field_ctx.coerce(c)).collect()
}

/// Factors monic `f = q · g` with `q ≡ T^k` and `g ≡ f̄ / T^k` mod `p`, both
/// monic, by linear Hensel lifting.
fn hensel_split(ring: &RingContext, f: &[RingElement], k: usize) -> Result<(Poly, Poly)> {
    let n = f.len() - 1;
    let field_ctx = ring.residue_field();
    let f_bar = reduce_poly(ring, f);
    let g_bar: Poly = f_bar[k..].to_vec();
    let mut q_bar = vec![field_ctx.zero(); k + 1];
    q_bar[k] = field_ctx.one();
    let (one, s, _t) = poly::ext_gcd(field_ctx, &q_bar, &g_bar);
    if one.len() != 1 {
        return Err(Error::Inconsistency("slope factors are not coprime mod p".into()));
    }
    let mut q = poly::coerce(ring, &q_bar);
    let mut g = poly::coerce(ring, &g_bar);
    for j in 1..ring.precision() {
        let err = poly::sub(ring, f, &poly::mul(ring, &q, &g));
        if err.iter().all(|c| ring.is_zero(c)) {
            break;
        }
        let e: Poly = err
            .iter()
            .map(|c| ring.divide_by_p_power(c, j).map(|x| field_ctx.coerce(&x)))
            .collect::<Result<_>>()
            .map_err(|_| Error::Inconsistency("Hensel lifting lost divisibility".into()))?;
        let es = poly::mul(field_ctx, &e, &s);
        let (_, dg) = poly::divrem(field_ctx, &es, &g_bar);
        let rest = poly::sub(field_ctx, &e, &poly::mul(field_ctx, &q_bar, &dg));
        let (dq, rem) = poly::divrem(field_ctx, &rest, &g_bar);
        debug_assert!(rem.iter().all(|c| field_ctx.is_zero(c)));
        let pj = ring.p_power(j);
        let lift = |d: &[RingElement]| -> Poly { d.iter().map(|c| ring.mul(&ring.coerce(c), &pj)).collect() };
        q = poly::add(ring, &q, &lift(&dq));
        g = poly::add(ring, &g, &lift(&dg));
    }
    q.truncate(k + 1);
    g.truncate(n - k + 1);
    Ok((q, g))
}

/// Splits a monic polynomial whose roots have integer valuations into
/// monic factors of constant root valuation.
fn split_by_slope(ring: &RingContext, f: &[RingElement]) -> Result<Vec<SlopeFactor>> {
    let mut out = Vec::new();
    let mut cur: Poly = f.to_vec();
    let mut shift: i64 = 0;
    let mut precision = ring.precision();
    loop {
        let deg = cur.len() - 1;
        if deg == 0 {
            break;
        }
        let k = cur
            .iter()
            .position(|c| ring.is_unit(c))
            .expect("monic polynomial has a unit coefficient");
        let q = if k < deg {
            let (q, g) = hensel_split(ring, &cur, k)?;
            let m = g.len() - 1;
            let factor: Poly = g
                .iter()
                .enumerate()
                .map(|(i, c)| ring.mul_p_power(c, (shift as u32) * (m - i) as u32))
                .collect();
            out.push(SlopeFactor {
                slope: shift,
                factor,
                precision,
            });
            q
        } else {
            cur
        };
        if k == 0 {
            break;
        }
        // roots of q all have positive valuation; rescale T = pU
        cur = q
            .iter()
            .enumerate()
            .map(|(i, c)| ring.divide_by_p_power(c, (k - i) as u32))
            .collect::<Result<_>>()
            .map_err(|_| Error::precision("rescaling a slope factor", ring.precision()))?;
        precision = precision
            .checked_sub(k as u32)
            .filter(|&p| p > 0)
            .ok_or_else(|| Error::precision("rescaling a slope factor", ring.precision()))?;
        shift += 1;
    }
    Ok(out)
}

/// Finds `v` and minimal `r` with `u·a + v·b = p^r` for some `u`, via the
/// Sylvester matrix.
fn bezout_cofactor(ring: &RingContext, a: &[RingElement], b: &[RingElement]) -> Result<(Poly, u32)> {
    let da = a.len() - 1;
    let db = b.len() - 1;
    let n = da + db;
    let mut columns = Vec::with_capacity(n);
    for i in 0..db {
        let mut col = vec![ring.zero(); n];
        for (j, c) in a.iter().enumerate() {
            col[i + j] = c.clone();
        }
        columns.push(col);
    }
    for i in 0..da {
        let mut col = vec![ring.zero(); n];
        for (j, c) in b.iter().enumerate() {
            col[i + j] = c.clone();
        }
        columns.push(col);
    }
    let syl = Matrix::from_columns(ring, n, &columns);
    let s = smith(ring, &syl, true);
    let y = s.e.column(0);
    let mut r = 0u32;
    for (i, yi) in y.iter().enumerate() {
        let Some(vy) = ring.valuation(yi) else { continue };
        match s.valuations[i] {
            Some(vd) => r = r.max(vd.saturating_sub(vy)),
            None => return Err(Error::precision("inverting a resultant", ring.precision())),
        }
    }
    let z: Vec<RingElement> = y
        .iter()
        .enumerate()
        .map(|(i, yi)| {
            let vd = s.valuations[i].unwrap_or(0);
            if r >= vd {
                ring.mul_p_power(yi, r - vd)
            } else {
                ring.divide_by_p_power(yi, vd - r).expect("valuation bound")
            }
        })
        .collect();
    let x = s.c.mul_vec(ring, &z);
    Ok((x[db..].to_vec(), r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::OrbitDatum;

    fn module(p: u64, e: usize, n: usize, f: &[usize], blocks: Vec<Vec<Vec<i64>>>, prec: u32) -> DieudonneModule {
        let datum = PelDatum::new(p, vec![OrbitDatum::new(e, n, f.to_vec()).unwrap()], 1).unwrap();
        let ring = RingContext::new(p, e, prec, None).unwrap();
        let blocks = blocks
            .iter()
            .map(|rows| Matrix::from_fn(n, n, |i, j| ring.from_i64(rows[i][j])))
            .collect();
        DieudonneModule::new(ring, datum, vec![blocks]).unwrap()
    }

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    fn twisted(p: i64) -> DieudonneModule {
        module(
            p as u64,
            3,
            2,
            &[2, 1, 0],
            vec![
                vec![vec![p, 0], vec![0, p]],
                vec![vec![1, 0], vec![0, p]],
                vec![vec![0, 1], vec![1, 0]],
            ],
            20,
        )
    }

    #[test]
    fn twisted_frobenius_power() {
        let m = twisted(3);
        let r = m.ring().clone();
        let expected = Matrix::from_i64(&r, &[&[0, 9], &[3, 0]]);
        assert_eq!(m.frobenius_power(0, 0), expected);
        assert_eq!(m.newton_polygon(0).unwrap().slopes(), vec![q(3, 2), q(3, 2)]);
        assert!(!m.is_mu_ordinary().unwrap());
        assert!(m.validate().passed());
        let d = m.slope_decomposition(0, 0).unwrap();
        assert_eq!(d.pieces.len(), 1);
        assert_eq!(d.pieces[0].basis.cols(), 2);
    }

    #[test]
    fn diagonal_hodge_and_newton() {
        let m = module(3, 1, 2, &[1], vec![vec![vec![3, 1], vec![9, 27]]], 10);
        assert_eq!(m.hodge_polygon(0, 0).unwrap().slopes(), vec![q(0, 1), q(2, 1)]);
        let m = module(5, 1, 2, &[1], vec![vec![vec![1, 0], vec![0, 5]]], 10);
        let v = m.verschiebung(0, 0).unwrap();
        assert_eq!(v, Matrix::from_i64(m.ring(), &[&[5, 0], &[0, 1]]));
        let fil = m.hodge_filtration(0, 0, 1).unwrap();
        let f = m.ring().residue_field();
        assert_eq!(fil, vec![vec![f.zero(), f.one()]]);
        assert!(m.hodge_filtration(0, 0, 2).unwrap().is_empty());
        assert!(m.preimage_contained(0, 0, 2).unwrap());
        assert!(m.preimage_contained(0, 0, 3).unwrap());
    }

    #[test]
    fn invalid_block_detected() {
        let m = module(3, 1, 2, &[1], vec![vec![vec![9, 0], vec![0, 1]]], 10);
        let report = m.validate();
        assert!(!report.passed());
        assert!(m.verschiebung(0, 0).is_err());
        assert!(!m.preimage_contained(0, 0, 2).unwrap());
    }

    #[test]
    fn slope_pieces_of_diagonal() {
        let m = module(2, 1, 3, &[2], vec![vec![vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 4]]], 16);
        let d = m.slope_decomposition(0, 0).unwrap();
        let slopes: Vec<Rational> = d.pieces.iter().map(|p| p.slope).collect();
        assert_eq!(slopes, vec![q(0, 1), q(1, 1), q(2, 1)]);
        let f = m.ring().residue_field();
        let unit = |i: usize| -> Vec<RingElement> {
            (0..3).map(|k| if k == i { f.one() } else { f.zero() }).collect()
        };
        for (piece, idx) in d.pieces.iter().zip([1usize, 0, 2]) {
            let red = piece.basis.reduce(m.ring()).columns();
            assert!(field::same_span(f, 3, &red, &[unit(idx)]));
        }
    }
}
