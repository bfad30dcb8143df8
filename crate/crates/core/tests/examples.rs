//! Worked examples with hand-derived expected values.

use muhasse::hasse::{divided_wedge_frobenius, hasse_report, mu_hasse, newton_value_at_label, tau_hasse};
use muhasse::models::{default_ring, p_rank, standard_module};
use muhasse::polygon::{exponents, mu_ordinary_polygon};
use muhasse::{DieudonneModule, Error, Matrix, OrbitDatum, PelDatum, Polygon, Rational, RingContext};

fn orbit(e: usize, n: usize, f: &[usize]) -> OrbitDatum {
    OrbitDatum::new(e, n, f.to_vec()).unwrap()
}

fn standard(p: u64, o: OrbitDatum) -> DieudonneModule {
    let d = PelDatum::new(p, vec![o], 1).unwrap();
    standard_module(&d, &default_ring(&d).unwrap()).unwrap()
}

/// Blocks diag(p,p), diag(1,p), antidiag(1,1) for e = 3, n = 2, f = (2,1,0).
fn twisted(p: u64) -> DieudonneModule {
    let d = PelDatum::new(p, vec![orbit(3, 2, &[2, 1, 0])], 1).unwrap();
    let ring = default_ring(&d).unwrap();
    let pp = p as i64;
    let blocks = vec![vec![
        Matrix::from_i64(&ring, &[&[pp, 0], &[0, pp]]),
        Matrix::from_i64(&ring, &[&[1, 0], &[0, pp]]),
        Matrix::from_i64(&ring, &[&[0, 1], &[1, 0]]),
    ]];
    DieudonneModule::new(ring, d, blocks).unwrap()
}

fn ints(ring: &RingContext, rows: &[&[i64]]) -> Matrix {
    Matrix::from_i64(ring, rows)
}

#[test]
fn mu_ordinary_polygons_and_exponents() {
    let q = |s: &[i64]| Polygon::from_integer_slopes(s);
    assert_eq!(mu_ordinary_polygon(&orbit(3, 2, &[2, 1, 0])), q(&[1, 2]));
    assert_eq!(mu_ordinary_polygon(&orbit(2, 3, &[2, 1])), q(&[0, 1, 2]));
    assert_eq!(mu_ordinary_polygon(&orbit(1, 2, &[1])), q(&[0, 1]));
    let dc = |o: OrbitDatum| -> Vec<(usize, u32)> { exponents(&o).unwrap().iter().map(|x| (x.d, x.c)).collect() };
    assert_eq!(dc(orbit(3, 2, &[2, 1, 0])), vec![(0, 0), (1, 1), (2, 3)]);
    assert_eq!(dc(orbit(2, 3, &[2, 1])), vec![(1, 0), (2, 1)]);
    assert_eq!(dc(orbit(1, 2, &[1])), vec![(1, 0)]);
    // labels follow f, not the cyclic order
    assert_eq!(dc(orbit(3, 2, &[0, 2, 1])), vec![(0, 0), (1, 1), (2, 3)]);
}

#[test]
fn standard_module_frobenius_and_polygons() {
    let m = standard(3, orbit(3, 2, &[2, 1, 0]));
    let ring = m.ring();
    assert_eq!(m.frobenius_power(0, 0), ints(ring, &[&[3, 0], &[0, 9]]));
    assert_eq!(m.hodge_polygon(0, 0).unwrap(), Polygon::from_integer_slopes(&[1, 2]));
    assert_eq!(m.newton_polygon(0).unwrap(), Polygon::from_integer_slopes(&[1, 2]));
    assert!(m.is_mu_ordinary().unwrap());
    // Fil¹ at the f = 1 position is the second basis vector
    let fld = ring.residue_field();
    assert_eq!(m.hodge_filtration(0, 1, 1).unwrap(), vec![vec![fld.zero(), fld.one()]]);
    assert!(m.hodge_filtration(0, 0, 2).unwrap().is_empty());
    // V = p A⁻¹ on diag(1, p)
    assert_eq!(m.verschiebung(0, 1).unwrap(), ints(ring, &[&[3, 0], &[0, 1]]));
}

#[test]
fn standard_module_hasse_values() {
    let m = standard(3, orbit(3, 2, &[2, 1, 0]));
    let ring = m.ring();
    let fld = ring.residue_field();
    // label τ_2 (d = 1, c = 1): diag(p, p²)/p
    assert_eq!(divided_wedge_frobenius(&m, 0, 1).unwrap(), ints(ring, &[&[1, 0], &[0, 3]]));
    // label τ_3 (d = 2, c = 3): p³/p³
    assert_eq!(divided_wedge_frobenius(&m, 0, 2).unwrap(), ints(ring, &[&[1]]));
    for label in 0..3 {
        assert!(fld.is_one(&tau_hasse(&m, 0, label).unwrap().scalar), "label {}", label + 1);
    }
    let r = hasse_report(&m).unwrap();
    assert!(r.mu_nonzero && r.mu_ordinary);
    assert_eq!(r.m, 26u32.into());
}

#[test]
fn twisted_module() {
    let m = twisted(3);
    let ring = m.ring();
    let fld = ring.residue_field();
    assert!(m.validate().passed());
    assert_eq!(m.frobenius_power(0, 0), ints(ring, &[&[0, 9], &[3, 0]]));
    let half3 = Rational::new(3, 2);
    assert_eq!(m.newton_polygon(0).unwrap(), Polygon::from_slopes(&[half3, half3]));
    assert!(!m.is_mu_ordinary().unwrap());
    assert_eq!(divided_wedge_frobenius(&m, 0, 1).unwrap(), ints(ring, &[&[0, 3], &[1, 0]]));
    assert!(fld.is_zero(&tau_hasse(&m, 0, 1).unwrap().scalar));
    assert_eq!(newton_value_at_label(&m, 0, 1).unwrap(), (half3, false));
    assert_eq!(newton_value_at_label(&m, 0, 0).unwrap(), (Rational::from_integer(0), true));
    let r = hasse_report(&m).unwrap();
    let nonzero: Vec<bool> = r.labels.iter().map(|l| l.tau_nonzero).collect();
    assert_eq!(nonzero, vec![true, false, true]);
    assert!(!r.mu_nonzero && !r.mu_ordinary);
    assert!(fld.is_zero(&mu_hasse(&m).unwrap().0));
}

#[test]
fn classical_case_is_the_hasse_invariant() {
    // e = 1, n = 2, f = 1: supersingular F = [[0, p], [1, 0]] vs ordinary diag(1, p)
    let d = PelDatum::new(5, vec![orbit(1, 2, &[1])], 1).unwrap();
    let ring = default_ring(&d).unwrap();
    let ss = DieudonneModule::new(ring.clone(), d.clone(), vec![vec![ints(&ring, &[&[0, 5], &[1, 0]])]]).unwrap();
    let ord = DieudonneModule::new(ring.clone(), d, vec![vec![ints(&ring, &[&[1, 0], &[0, 5]])]]).unwrap();
    let fld = ring.residue_field();
    assert!(fld.is_zero(&tau_hasse(&ss, 0, 0).unwrap().scalar));
    assert!(fld.is_one(&tau_hasse(&ord, 0, 0).unwrap().scalar));
    assert_eq!(p_rank(&ss).unwrap(), 0);
    assert_eq!(p_rank(&ord).unwrap(), 1);
}

#[test]
fn etale_module_is_trivial() {
    let m = standard(2, orbit(2, 3, &[0, 0]));
    let fld = m.ring().residue_field();
    assert_eq!(m.frobenius_power(0, 1), Matrix::identity(m.ring(), 3));
    let r = hasse_report(&m).unwrap();
    assert!(r.labels.iter().all(|l| l.tau_scalar == vec![1, 0]));
    assert!(fld.is_one(&mu_hasse(&m).unwrap().0));
    assert_eq!(p_rank(&m).unwrap(), 6);
}

#[test]
fn invalid_inputs_are_reported() {
    let d = PelDatum::new(3, vec![orbit(1, 2, &[1])], 1).unwrap();
    let ring = default_ring(&d).unwrap();
    let bad = DieudonneModule::new(ring.clone(), d, vec![vec![ints(&ring, &[&[9, 0], &[0, 1]])]]).unwrap();
    let report = bad.validate();
    assert!(!report.passed());
    assert!(report.failures().any(|c| c.name == "elementary_divisors"));
    assert!(matches!(hasse_report(&bad), Err(Error::InvalidModule(_))));

    let d = PelDatum::new(3, vec![orbit(2, 3, &[2, 2])], 1)
        .unwrap()
        .with_pairing(vec![((0, 0), (0, 1))])
        .unwrap();
    let m = standard_module(&d, &default_ring(&d).unwrap()).unwrap();
    assert!(m.validate().failures().any(|c| c.name == "signature"));
}

#[test]
fn slope_pieces_of_examples() {
    let m = standard(3, orbit(3, 2, &[2, 1, 0]));
    let sd = m.slope_decomposition(0, 0).unwrap();
    let slopes: Vec<Rational> = sd.pieces.iter().map(|p| p.slope).collect();
    assert_eq!(slopes, vec![Rational::from_integer(1), Rational::from_integer(2)]);
    let fld = m.ring().residue_field();
    let e2 = vec![fld.zero(), fld.one()];
    assert_eq!(sd.reduction_at_least(m.ring(), Rational::from_integer(2)), vec![e2]);
    assert_eq!(sd.reduction_at_least(m.ring(), Rational::from_integer(1)).len(), 2);

    let sd = twisted(3).slope_decomposition(0, 0).unwrap();
    assert_eq!(sd.pieces.len(), 1);
    assert_eq!(sd.pieces[0].slope, Rational::new(3, 2));
    assert_eq!(sd.pieces[0].basis.cols(), 2);
}

#[test]
fn precision_exhaustion_is_loud() {
    // N = 2 cannot resolve F³ = [[0, p²], [p, 0]]
    let m = twisted(3).with_precision(2).unwrap();
    match m.newton_polygon(0) {
        Err(Error::PrecisionExhausted { suggested, .. }) => assert!(suggested > 2),
        other => panic!("expected precision exhaustion, got {other:?}"),
    }
    // det = p² is ⊥ mod p², which is undecided rather than invalid
    assert!(matches!(m.ensure_valid(), Err(Error::PrecisionExhausted { .. })));
}
