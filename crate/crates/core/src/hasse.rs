//! Divided exterior powers of `F^e`, τ-Hasse invariants, the μ-ordinary
//! Hasse invariant, and the Newton-polygon oracle they are checked against.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;

use crate::crystal::DieudonneModule;
use crate::error::{Error, Result};
use crate::io::big_number;
use crate::matrix::{field, subsets, Matrix};
use crate::polygon::{exponents, mu_ordinary_polygon, Polygon, Rational};
use crate::witt::{RingContext, RingElement};

/// A τ-Hasse value: the scalar by which the divided operator acts on the
/// line `Gr⁰` of the exterior power, and the wedge vector spanning the
/// chosen complement of `Fil¹` (coordinates in the lexicographic basis).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauHasse {
    pub scalar: RingElement,
    pub basis: Vec<RingElement>,
}

/// `∧^{d_i} B_i / p^{c_i}` at label `i` (0-based) of an orbit. For
/// `d_i = 0` this is the `1×1` identity.
pub fn divided_wedge_frobenius(m: &DieudonneModule, orbit: usize, label: usize) -> Result<Matrix> {
    let ring = m.ring();
    let ex = exponents(&m.datum().orbits[orbit])?[label];
    let pos = m.label_position(orbit, label);
    let b = m.frobenius_power(orbit, pos);
    let w = b.wedge(ring, ex.d);
    if ex.c == 0 {
        return Ok(w);
    }
    if ex.c >= ring.precision() {
        return Err(Error::precision("dividing an exterior power", ring.precision()));
    }
    if let Some(v) = w.valuation(ring) {
        if v < ex.c {
            return Err(Error::DivisibilityFailure {
                expected: ex.c,
                found: v,
            });
        }
    }
    w.divide_by_p_power(ring, ex.c)
}

/// τ-Hasse invariant at label `i` (0-based). Checks inline that the divided
/// operator kills `Fil¹` of the exterior power.
pub fn tau_hasse(m: &DieudonneModule, orbit: usize, label: usize) -> Result<TauHasse> {
    let ring = m.ring();
    let fld = ring.residue_field();
    let od = &m.datum().orbits[orbit];
    let ex = exponents(od)?[label];
    if ex.d == 0 {
        return Ok(TauHasse {
            scalar: fld.one(),
            basis: vec![fld.one()],
        });
    }
    let n = od.n;
    let pos = m.label_position(orbit, label);
    let w_bar = divided_wedge_frobenius(m, orbit, label)?.reduce(ring);
    let fil = m.hodge_filtration(orbit, pos, 1)?;
    if fil.len() != n - ex.d {
        return Err(Error::InvalidModule(format!(
            "Fil¹ at ({orbit}, {pos}) has dimension {}, expected {}",
            fil.len(),
            n - ex.d
        )));
    }
    let comp = field::complement(fld, n, &fil);
    let mut columns = fil.clone();
    for &k in &comp {
        let mut unit = vec![fld.zero(); n];
        unit[k] = fld.one();
        columns.push(unit);
    }
    let q = Matrix::from_columns(fld, n, &columns);
    let q_inv = q.inverse(fld)?;
    let wq = q.wedge(fld, ex.d);
    let wq_inv = q_inv.wedge(fld, ex.d);
    let e = od.e as i64;
    let lambda = wq_inv.mul(fld, &w_bar).mul(fld, &wq.frobenius(fld, e));
    let j0 = subsets(n, ex.d).len() - 1;
    for j in 0..j0 {
        if lambda.column(j).iter().any(|x| !fld.is_zero(x)) {
            return Err(Error::FiltrationNotKilled);
        }
    }
    Ok(TauHasse {
        scalar: lambda.get(j0, j0).clone(),
        basis: wq.column(j0),
    })
}

/// `m = lcm_τ (p^{e_τ} − 1)` and the cofactors `m_τ` per orbit.
pub fn weight(p: u64, orbit_lengths: &[usize]) -> (BigUint, Vec<BigUint>) {
    let pe: Vec<BigUint> = orbit_lengths
        .iter()
        .map(|&e| BigUint::from(p).pow(e as u32) - BigUint::one())
        .collect();
    let m = pe.iter().fold(BigUint::one(), |acc, x| acc.lcm(x));
    let cof = pe.iter().map(|x| &m / x).collect();
    (m, cof)
}

/// μ-ordinary Hasse invariant: `Π τH^{m_τ}` over all labels, with the weight
/// `m`.
pub fn mu_hasse(m: &DieudonneModule) -> Result<(RingElement, BigUint)> {
    let fld = m.ring().residue_field();
    let lengths: Vec<usize> = m.datum().orbits.iter().map(|o| o.e).collect();
    let (weight_m, cof) = weight(m.datum().p, &lengths);
    let mut acc = fld.one();
    for (o, od) in m.datum().orbits.iter().enumerate() {
        for label in 0..od.e {
            let t = tau_hasse(m, o, label)?;
            acc = fld.mul(&acc, &fld.pow_big(&t.scalar, &cof[o]));
        }
    }
    Ok((acc, weight_m))
}

/// Newton polygon value at `d_i`, compared against `c_i`. Independent of
/// [`tau_hasse`].
pub fn newton_value_at_label(m: &DieudonneModule, orbit: usize, label: usize) -> Result<(Rational, bool)> {
    let ex = exponents(&m.datum().orbits[orbit])?[label];
    let newton = m.newton_polygon(orbit)?;
    let g = newton.value_at(ex.d as i64).expect("d ≤ n");
    Ok((g, g == Rational::from_integer(ex.c as i64)))
}

pub fn nonvanishing_criterion(m: &DieudonneModule, orbit: usize, label: usize) -> Result<bool> {
    Ok(newton_value_at_label(m, orbit, label)?.1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabelReport {
    pub orbit: usize,
    /// 1-based label index `i` of `τ_i`.
    pub label: usize,
    /// Cyclic position of `τ_i` within the orbit.
    pub position: usize,
    pub d: usize,
    pub c: u32,
    pub divisibility_ok: bool,
    pub tau_scalar: Vec<u64>,
    pub tau_basis: Vec<Vec<u64>>,
    pub tau_nonzero: bool,
    /// Newton polygon value `g_i` at `x = d_i`, as `[num, den]`.
    pub newton_value: (i64, i64),
    pub oracle_nonzero: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitReport {
    pub orbit: usize,
    pub mu_ordinary_polygon: Polygon,
    pub newton_polygon: Polygon,
    pub hodge_polygons: Vec<Polygon>,
    pub mu_ordinary: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HasseReport {
    pub labels: Vec<LabelReport>,
    pub orbits: Vec<OrbitReport>,
    #[serde(serialize_with = "big_number")]
    pub m: BigUint,
    #[serde(serialize_with = "crate::io::big_numbers")]
    pub m_tau: Vec<BigUint>,
    pub mu_scalar: Vec<u64>,
    pub mu_nonzero: bool,
    pub mu_ordinary: bool,
}

pub(crate) fn field_coeffs(fld: &RingContext, x: &RingElement) -> Vec<u64> {
    fld.coefficients_u64(x).expect("residue field coefficients fit a word")
}

/// Assembles every field and cross-checks both sides of the non-vanishing
/// criterion; any disagreement is an [`Error::Inconsistency`].
pub fn hasse_report(m: &DieudonneModule) -> Result<HasseReport> {
    m.ensure_valid()?;
    let ring = m.ring();
    let fld = ring.residue_field();
    let lengths: Vec<usize> = m.datum().orbits.iter().map(|o| o.e).collect();
    let (weight_m, cof) = weight(m.datum().p, &lengths);
    let mut labels = Vec::new();
    let mut orbits = Vec::new();
    let mut mu_scalar = fld.one();
    let mut all_ordinary = true;
    for (o, od) in m.datum().orbits.iter().enumerate() {
        let ex = exponents(od)?;
        let newton = m.newton_polygon(o)?;
        let ord = mu_ordinary_polygon(od);
        let hodge = (0..od.e)
            .map(|k| m.hodge_polygon(o, k))
            .collect::<Result<Vec<_>>>()?;
        let is_ord = newton == ord;
        all_ordinary &= is_ord;
        for (label, x) in ex.iter().enumerate() {
            let t = tau_hasse(m, o, label)?;
            let g = newton.value_at(x.d as i64).expect("d ≤ n");
            let oracle = g == Rational::from_integer(x.c as i64);
            let nonzero = !fld.is_zero(&t.scalar);
            if nonzero != oracle {
                return Err(Error::Inconsistency(format!(
                    "τ-Hasse at orbit {o}, label {} is {} but the Newton polygon value is {g} against c = {}",
                    label + 1,
                    if nonzero { "nonzero" } else { "zero" },
                    x.c
                )));
            }
            mu_scalar = fld.mul(&mu_scalar, &fld.pow_big(&t.scalar, &cof[o]));
            labels.push(LabelReport {
                orbit: o,
                label: label + 1,
                position: m.label_position(o, label),
                d: x.d,
                c: x.c,
                divisibility_ok: true,
                tau_scalar: field_coeffs(fld, &t.scalar),
                tau_basis: t.basis.iter().map(|b| field_coeffs(fld, b)).collect(),
                tau_nonzero: nonzero,
                newton_value: (*g.numer(), *g.denom()),
                oracle_nonzero: oracle,
            });
        }
        orbits.push(OrbitReport {
            orbit: o,
            mu_ordinary_polygon: ord,
            newton_polygon: newton,
            hodge_polygons: hodge,
            mu_ordinary: is_ord,
        });
    }
    let mu_nonzero = !fld.is_zero(&mu_scalar);
    if mu_nonzero != all_ordinary {
        return Err(Error::Inconsistency(format!(
            "μ-Hasse is {} but the module is {}μ-ordinary",
            if mu_nonzero { "nonzero" } else { "zero" },
            if all_ordinary { "" } else { "not " }
        )));
    }
    Ok(HasseReport {
        labels,
        orbits,
        m: weight_m,
        m_tau: cof,
        mu_scalar: field_coeffs(fld, &mu_scalar),
        mu_nonzero,
        mu_ordinary: all_ordinary,
    })
}
