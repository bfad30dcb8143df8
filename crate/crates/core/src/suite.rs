//! Property suites over generated modules.
//!
//! Instances are described by cheap [`Source`] values, built and checked in
//! parallel, then sorted by key so reports do not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::crystal::DieudonneModule;
use crate::datum::{OrbitDatum, PelDatum};
use crate::error::{Error, Result};
use crate::hasse::{field_coeffs, hasse_report, mu_hasse};
use crate::matrix::{field, smith, Matrix};
use crate::models::{
    default_ring, elementary_mu_hasse, gu_newton_reference, has_symmetric_newton, isogeny_twist,
    p_rank, permutation_blocks, permutation_family_size, standard_module, verschiebung_stable_rank, GuDatum,
};
use crate::polygon::{mu_ordinary_polygon, mu_ordinary_slopes, Comparison, Polygon, Rational};
use crate::rng::SplitMix64;

/// Extra digits available to sublattice twists.
pub const TWIST_BUDGET: u32 = 4;

/// How to build one instance.
#[derive(Clone, Debug)]
pub enum Source {
    Standard(PelDatum),
    /// One permutation-family member index per orbit.
    Family { datum: PelDatum, indices: Vec<u64> },
    Twist { base: Box<Source>, seed: u64, unit_only: bool },
}

impl Source {
    pub fn build(&self) -> Result<DieudonneModule> {
        match self {
            Source::Standard(d) => standard_module(d, &default_ring(d)?),
            Source::Family { datum, indices } => {
                let ring = default_ring(datum)?;
                let blocks = datum
                    .orbits
                    .iter()
                    .zip(indices)
                    .map(|(o, &i)| permutation_blocks(&ring, o, i))
                    .collect::<Result<Vec<_>>>()?;
                DieudonneModule::new(ring, datum.clone(), blocks)
            }
            Source::Twist { base, seed, unit_only } => isogeny_twist(&base.build()?, *seed, *unit_only, TWIST_BUDGET),
        }
    }

    pub fn datum(&self) -> &PelDatum {
        match self {
            Source::Standard(d) | Source::Family { datum: d, .. } => d,
            Source::Twist { base, .. } => base.datum(),
        }
    }
}

fn datum_key(d: &PelDatum) -> String {
    let orbits: Vec<String> = d
        .orbits
        .iter()
        .map(|o| {
            let f: Vec<String> = o.f.iter().map(|x| x.to_string()).collect();
            format!("{}:{}:{}", o.e, o.n, f.join(","))
        })
        .collect();
    format!("p{}/{}/r{}", d.p, orbits.join("+"), d.r)
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Standard(d) => write!(f, "{}/standard", datum_key(d)),
            Source::Family { datum, indices } => {
                let idx: Vec<String> = indices.iter().map(|i| format!("{i:06}")).collect();
                write!(f, "{}/family#{}", datum_key(datum), idx.join(","))
            }
            Source::Twist { base, seed, unit_only } => {
                write!(f, "{base}/{}{seed:020}", if *unit_only { "unit" } else { "isogeny" })
            }
        }
    }
}

/// A checkable property of a single module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    /// Report consistency: every τ-Hasse verdict matches the Newton oracle
    /// and the μ-Hasse verdict matches μ-ordinarity.
    Oracle,
    /// Newton on or above the μ-ordinary and Hodge polygons, equal endpoints.
    Mazur,
    /// Slope pieces of slope `≥ i` reduce to `Fil¹` at `τ_i`.
    Filtration,
    /// Unitary chain on modules of a `GU(a, b)` datum.
    GuChain,
    /// Report identical at `factor · N`; preimage containment for `k = 2, 3`.
    Precision(u32),
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Oracle => write!(f, "oracle"),
            Property::Mazur => write!(f, "mazur"),
            Property::Filtration => write!(f, "filtration"),
            Property::GuChain => write!(f, "gu-chain"),
            Property::Precision(k) => write!(f, "precision-x{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    /// Property does not apply (e.g. a non-symmetric Newton polygon for the
    /// unitary chain).
    Excluded(String),
    Fail(String),
    /// Precision ran out before the property could be decided.
    Precision(String),
}

impl Outcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, Outcome::Pass)
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Outcome::Fail(_) | Outcome::Precision(_))
    }

    fn from_error(e: Error) -> Outcome {
        match e {
            Error::PrecisionExhausted { .. } | Error::PrecisionBudget { .. } => Outcome::Precision(e.to_string()),
            other => Outcome::Fail(other.to_string()),
        }
    }
}

fn outcome(r: Result<Outcome>) -> Outcome {
    r.unwrap_or_else(Outcome::from_error)
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub key: String,
    pub outcomes: BTreeMap<String, Outcome>,
    /// Whether the module is μ-ordinary, when a report was computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_ordinary: Option<bool>,
    /// Free-form observations (e.g. scalar ratios).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn failed(&self) -> bool {
        self.outcomes.values().any(Outcome::is_failure)
    }
}

fn fail(msg: impl Into<String>) -> Outcome {
    Outcome::Fail(msg.into())
}

// ---- properties ---------------------------------------------------------

fn check_oracle(m: &DieudonneModule, mu_ordinary: &mut Option<bool>) -> Result<Outcome> {
    let report = hasse_report(m)?;
    *mu_ordinary = Some(report.mu_ordinary);
    // redundant with hasse_report's own assertions, kept as an explicit gate
    for l in &report.labels {
        if l.tau_nonzero != l.oracle_nonzero {
            return Ok(fail(format!("label {} of orbit {}: τ-Hasse disagrees with Newton", l.label, l.orbit)));
        }
    }
    let all = report.labels.iter().all(|l| l.tau_nonzero);
    if report.mu_nonzero != report.mu_ordinary || report.mu_nonzero != all {
        return Ok(fail("μ-Hasse verdict disagrees with μ-ordinarity"));
    }
    Ok(Outcome::Pass)
}

fn check_mazur(m: &DieudonneModule) -> Result<Outcome> {
    for (o, od) in m.datum().orbits.iter().enumerate() {
        let newton = m.newton_polygon(o)?;
        let ord = mu_ordinary_polygon(od);
        match newton.compare(&ord) {
            Ok(Comparison::Equal | Comparison::Above) => {}
            Ok(c) => return Ok(fail(format!("orbit {o}: Newton is {c:?} relative to the μ-ordinary polygon"))),
            Err(e) => return Ok(fail(format!("orbit {o}: {e}"))),
        }
        for k in 0..od.e {
            let hodge = m.hodge_polygon(o, k)?;
            let at_k = m.newton_polygon_at(o, k)?;
            if at_k != newton {
                return Ok(fail(format!("orbit {o}: Newton polygon depends on the start position {k}")));
            }
            match newton.compare(&hodge) {
                Ok(Comparison::Equal | Comparison::Above) => {}
                Ok(c) => return Ok(fail(format!("orbit {o}, position {k}: Newton is {c:?} relative to Hodge"))),
                Err(e) => return Ok(fail(format!("orbit {o}, position {k}: {e}"))),
            }
        }
    }
    Ok(Outcome::Pass)
}

fn check_filtration(m: &DieudonneModule) -> Result<Outcome> {
    if !m.is_mu_ordinary()? {
        return Ok(Outcome::Excluded("not μ-ordinary".into()));
    }
    let ring = m.ring();
    let fld = ring.residue_field();
    for (o, od) in m.datum().orbits.iter().enumerate() {
        for label in 0..od.e {
            let pos = m.label_position(o, label);
            let pieces = m.slope_decomposition(o, pos)?;
            let lhs = pieces.reduction_at_least(ring, Rational::from_integer(label as i64 + 1));
            let fil = m.hodge_filtration(o, pos, 1)?;
            if !field::same_span(fld, m.n(), &lhs, &fil) {
                return Ok(fail(format!(
                    "orbit {o}, label {}: slope ≥ {} part has dimension {}, Fil¹ has dimension {}",
                    label + 1,
                    label + 1,
                    field::canonical_span(fld, m.n(), &lhs).len(),
                    fil.len()
                )));
            }
        }
    }
    Ok(Outcome::Pass)
}

fn check_precision(m: &DieudonneModule, factor: u32) -> Result<Outcome> {
    let low = hasse_report(m)?;
    let high = hasse_report(&m.with_precision(m.precision() * factor)?)?;
    let a = serde_json::to_string(&low).expect("report serializes");
    let b = serde_json::to_string(&high).expect("report serializes");
    if a != b {
        return Ok(fail(format!("report changes at precision {}", m.precision() * factor)));
    }
    for (o, od) in m.datum().orbits.iter().enumerate() {
        for k in 0..od.e {
            for j in [2, 3] {
                if !m.preimage_contained(o, k, j)? {
                    return Ok(fail(format!("orbit {o}, position {k}: F⁻¹(p^{j}M) ⊄ p^{}M", j - 1)));
                }
                if !m.hodge_filtration(o, k, j)?.is_empty() {
                    return Ok(fail(format!("orbit {o}, position {k}: Fil^{j} is nonzero")));
                }
            }
        }
    }
    Ok(Outcome::Pass)
}

/// The unitary chain: elementary Hasse ≠ 0 ⟺ p-rank = 2ar ⟺ μ-Hasse ≠ 0 ⟺
/// μ-ordinary. Modules whose per-`F` slopes are not symmetric cannot carry
/// a polarization and are excluded. Returns the `μ-Hasse / elementary`
/// ratio when both are nonzero.
fn check_gu(m: &DieudonneModule) -> Result<(Outcome, Option<String>)> {
    let d = m.datum();
    let od = &d.orbits[0];
    if d.orbits.len() != 1 || od.e != 2 {
        return Ok((fail("unitary chain needs a single orbit of length 2"), None));
    }
    let a = od.f.iter().copied().min().unwrap_or(0);
    let b = od.n - a;
    let gu = GuDatum::new(a, b, d.r, d.p)?;
    if !has_symmetric_newton(m)? {
        return Ok((Outcome::Excluded("per-F Newton slopes are not symmetric".into()), None));
    }
    let fld = m.ring().residue_field();
    let pr = p_rank(m)?;
    let vr = verschiebung_stable_rank(m)?;
    if vr != pr {
        return Ok((fail(format!("stable ranks differ: F̄ gives {pr}, V̄ gives {vr}")), None));
    }
    let ordinary = m.is_mu_ordinary()?;
    let (mu, _) = mu_hasse(m)?;
    let elem = elementary_mu_hasse(m)?;
    let verdicts = [
        ("elementary Hasse ≠ 0", !fld.is_zero(&elem)),
        ("p-rank = 2ar", pr == 2 * gu.a * gu.r),
        ("μ-Hasse ≠ 0", !fld.is_zero(&mu)),
        ("μ-ordinary", ordinary),
    ];
    if verdicts.iter().any(|v| v.1 != verdicts[0].1) {
        let parts: Vec<String> = verdicts.iter().map(|(n, v)| format!("{n}: {v}")).collect();
        return Ok((fail(parts.join(", ")), None));
    }
    if ordinary {
        let full = m.newton_polygon(0)?.renormalize(2, 2 * d.r);
        if full != gu_newton_reference(&gu) {
            return Ok((fail("per-F Newton polygon differs from the unitary reference"), None));
        }
        let ratio = fld.mul(&mu, &fld.invert(&elem)?);
        return Ok((Outcome::Pass, Some(format!("ratio {:?}", field_coeffs(fld, &ratio)))));
    }
    Ok((Outcome::Pass, None))
}

/// Evaluates `props` on one instance.
pub fn evaluate(key: String, m: &Result<DieudonneModule>, props: &[Property]) -> Verdict {
    let mut outcomes = BTreeMap::new();
    let mut notes = Vec::new();
    let mut mu_ordinary = None;
    match m {
        Err(e) => {
            outcomes.insert("build".to_string(), Outcome::from_error(e.clone()));
        }
        Ok(m) => {
            for &p in props {
                let o = match p {
                    Property::Oracle => outcome(check_oracle(m, &mut mu_ordinary)),
                    Property::Mazur => outcome(check_mazur(m)),
                    Property::Filtration => outcome(check_filtration(m)),
                    Property::Precision(k) => outcome(check_precision(m, k)),
                    Property::GuChain => match check_gu(m) {
                        Ok((o, note)) => {
                            notes.extend(note);
                            o
                        }
                        Err(e) => Outcome::from_error(e),
                    },
                };
                outcomes.insert(p.to_string(), o);
            }
        }
    }
    Verdict {
        key,
        outcomes,
        mu_ordinary,
        notes,
    }
}

/// Whether `m` violates any of `props`.
pub fn violates(m: &DieudonneModule, props: &[Property]) -> bool {
    evaluate(String::new(), &Ok(m.clone()), props).failed()
}

// ---- shrinking ----------------------------------------------------------

fn without_orbit(m: &DieudonneModule, o: usize) -> Option<DieudonneModule> {
    let d = m.datum();
    if d.orbits.len() < 2 {
        return None;
    }
    let mut orbits = d.orbits.clone();
    orbits.remove(o);
    let mut blocks = m.blocks().to_vec();
    blocks.remove(o);
    let datum = PelDatum::new(d.p, orbits, d.r).ok()?;
    DieudonneModule::new(m.ring().clone(), datum, blocks).ok()
}

fn without_basis_vector(m: &DieudonneModule, i: usize) -> Option<DieudonneModule> {
    let n = m.n();
    if n < 2 {
        return None;
    }
    let keep: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let ring = m.ring();
    let mut orbits = Vec::new();
    let mut blocks = Vec::new();
    for list in m.blocks() {
        let mut f = Vec::new();
        let mut out = Vec::new();
        for b in list {
            let sub = b.submatrix(&keep, &keep);
            let vals = smith(ring, &sub, false).valuations;
            if vals.iter().any(|v| !matches!(v, Some(0) | Some(1))) {
                return None;
            }
            f.push(vals.iter().filter(|v| **v == Some(1)).count());
            out.push(sub);
        }
        orbits.push(OrbitDatum::new(list.len(), n - 1, f).ok()?);
        blocks.push(out);
    }
    let d = m.datum();
    let mut datum = PelDatum::new(d.p, orbits, d.r).ok()?;
    if let Some(pairing) = &d.pairing {
        let paired = datum.clone().with_pairing(pairing.clone()).ok()?;
        if paired.signature_violations().is_empty() {
            datum = paired;
        }
    }
    let candidate = DieudonneModule::new(ring.clone(), datum, blocks).ok()?;
    candidate.validate().passed().then_some(candidate)
}

/// Greedy shrink: drop orbits, then basis vectors, keeping the failure.
pub fn minimize(m: &DieudonneModule, props: &[Property]) -> DieudonneModule {
    let mut cur = m.clone();
    'outer: loop {
        for o in 0..cur.datum().orbits.len() {
            if let Some(c) = without_orbit(&cur, o) {
                if violates(&c, props) {
                    cur = c;
                    continue 'outer;
                }
            }
        }
        for i in 0..cur.n() {
            if let Some(c) = without_basis_vector(&cur, i) {
                if violates(&c, props) {
                    cur = c;
                    continue 'outer;
                }
            }
        }
        return cur;
    }
}

// ---- instance generation ------------------------------------------------

/// All `f`-tuples in `[0, n]^e`, or only non-increasing ones.
pub fn f_tuples(e: usize, n: usize, non_increasing: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; e];
    loop {
        if !non_increasing || cur.windows(2).all(|w| w[0] >= w[1]) {
            out.push(cur.clone());
        }
        let mut i = e;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Every permutation-family member for every single-orbit datum in range.
pub fn family_sources(primes: &[u64], max_n: usize, max_e: usize) -> Result<Vec<Source>> {
    if max_n > 4 || max_e > 3 {
        return Err(Error::SizeGuard(format!(
            "permutation family needs n <= 4 and e <= 3, got n = {max_n}, e = {max_e}"
        )));
    }
    let mut out = Vec::new();
    for &p in primes {
        for e in 1..=max_e {
            for n in 1..=max_n {
                for f in f_tuples(e, n, false) {
                    let orbit = OrbitDatum::new(e, n, f)?;
                    let size = permutation_family_size(&orbit);
                    let datum = PelDatum::new(p, vec![orbit], 1)?;
                    out.extend((0..size).map(|i| Source::Family {
                        datum: datum.clone(),
                        indices: vec![i],
                    }));
                }
            }
        }
    }
    Ok(out)
}

/// Standard modules for every non-increasing `f`-tuple in range.
pub fn standard_sources(primes: &[u64], max_n: usize, max_e: usize) -> Result<Vec<Source>> {
    let mut out = Vec::new();
    for &p in primes {
        for e in 1..=max_e {
            for n in 1..=max_n {
                for f in f_tuples(e, n, true) {
                    out.push(Source::Standard(PelDatum::new(p, vec![OrbitDatum::new(e, n, f)?], 1)?));
                }
            }
        }
    }
    Ok(out)
}

fn random_datum(rng: &mut SplitMix64, primes: &[u64], max_n: usize, max_e: usize) -> Result<PelDatum> {
    let p = primes[rng.below(primes.len() as u64) as usize];
    let n = 1 + rng.below(max_n as u64) as usize;
    let count = 1 + rng.below(2) as usize;
    let orbits = (0..count)
        .map(|_| {
            let e = 1 + rng.below(max_e as u64) as usize;
            let f = (0..e).map(|_| rng.below(n as u64 + 1) as usize).collect();
            OrbitDatum::new(e, n, f)
        })
        .collect::<Result<Vec<_>>>()?;
    PelDatum::new(p, orbits, 1)
}

/// `count` seeded twists of random modules. With `mu_ordinary_only` the
/// base is always a standard module; otherwise half are random family
/// members.
pub fn twist_sources(
    seed: u64,
    count: usize,
    primes: &[u64],
    max_n: usize,
    max_e: usize,
    mu_ordinary_only: bool,
) -> Result<Vec<Source>> {
    (0..count)
        .map(|i| {
            let mut rng = SplitMix64::keyed(seed, i as u64, 0);
            let datum = random_datum(&mut rng, primes, max_n, max_e)?;
            let base = if mu_ordinary_only || rng.below(2) == 0 {
                Source::Standard(datum)
            } else {
                let indices = datum
                    .orbits
                    .iter()
                    .map(|o| rng.below(permutation_family_size(o)))
                    .collect();
                Source::Family { datum, indices }
            };
            Ok(Source::Twist {
                base: Box::new(base),
                seed: rng.next_u64(),
                unit_only: rng.below(2) == 0,
            })
        })
        .collect()
}

/// Sample size per unitary datum when the full family is out of reach.
pub const GU_SAMPLE: u64 = 2000;
/// Twisted members per unitary datum.
pub const GU_TWISTS: u64 = 40;

/// Modules of every `GU(a, b)` datum with `a < b ≤ max_b`, `r ≤ max_r`:
/// the full permutation family when `n ≤ 4`, a seeded sample otherwise,
/// plus unit and isogeny twists of sampled members.
pub fn gu_sources(primes: &[u64], max_b: usize, max_r: usize, seed: u64) -> Result<Vec<Source>> {
    let mut out = Vec::new();
    for &p in primes {
        for b in 2..=max_b {
            for a in 1..b {
                for r in 1..=max_r {
                    let datum = GuDatum::new(a, b, r, p)?.pel_datum();
                    let size = permutation_family_size(&datum.orbits[0]);
                    let mut rng = SplitMix64::keyed(seed, p, (a * 16 + b) as u64);
                    let indices: Vec<u64> = if a + b <= 4 {
                        (0..size).collect()
                    } else {
                        let mut v: Vec<u64> = (0..GU_SAMPLE).map(|_| rng.below(size)).collect();
                        v.sort_unstable();
                        v.dedup();
                        v
                    };
                    for &i in &indices {
                        out.push(Source::Family {
                            datum: datum.clone(),
                            indices: vec![i],
                        });
                    }
                    for t in 0..GU_TWISTS {
                        let base = Source::Family {
                            datum: datum.clone(),
                            indices: vec![rng.below(size)],
                        };
                        out.push(Source::Twist {
                            base: Box::new(base),
                            seed: rng.next_u64(),
                            unit_only: t % 2 == 0,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---- suites -------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteKind {
    Standard,
    Oracle,
    Mazur,
    Filtration,
    GuConsistency,
    Precision,
}

impl SuiteKind {
    pub fn parse(s: &str) -> Option<SuiteKind> {
        Some(match s {
            "standard" => SuiteKind::Standard,
            "oracle" => SuiteKind::Oracle,
            "mazur" => SuiteKind::Mazur,
            "filtration" => SuiteKind::Filtration,
            "gu-consistency" => SuiteKind::GuConsistency,
            "precision" => SuiteKind::Precision,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub primes: Vec<u64>,
    pub max_n: usize,
    pub max_e: usize,
    pub random: usize,
    pub seed: u64,
    pub factor: u32,
    pub max_b: usize,
    pub max_r: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            primes: vec![2, 3],
            max_n: 3,
            max_e: 3,
            random: 100,
            seed: 7,
            factor: 2,
            max_b: 3,
            max_r: 2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tally {
    pub instances: usize,
    pub passed: usize,
    pub excluded: usize,
    pub failed: usize,
    pub precision_exhausted: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteKind,
    pub config: SuiteConfig,
    pub tally: Tally,
    pub instances: Vec<Verdict>,
    #[serde(skip)]
    pub reproducer: Option<DieudonneModule>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.tally.failed == 0 && self.tally.precision_exhausted == 0
    }
}

pub fn tally(verdicts: &[Verdict]) -> Tally {
    let mut t = Tally {
        instances: verdicts.len(),
        passed: 0,
        excluded: 0,
        failed: 0,
        precision_exhausted: 0,
    };
    for v in verdicts {
        if v.outcomes.values().any(|o| matches!(o, Outcome::Fail(_))) {
            t.failed += 1;
        } else if v.outcomes.values().any(|o| matches!(o, Outcome::Precision(_))) {
            t.precision_exhausted += 1;
        } else if v.outcomes.values().any(|o| matches!(o, Outcome::Excluded(_))) {
            t.excluded += 1;
        } else {
            t.passed += 1;
        }
    }
    t
}

/// Builds and checks every source in parallel; output sorted by key.
pub fn run_sources(sources: &[Source], props: &[Property]) -> Vec<Verdict> {
    let mut out: Vec<Verdict> = sources
        .par_iter()
        .map(|s| evaluate(s.to_string(), &s.build(), props))
        .collect();
    out.sort_by(|a, b| a.key.cmp(&b.key));
    out
}

pub fn suite_plan(kind: SuiteKind, cfg: &SuiteConfig) -> Result<(Vec<Source>, Vec<Property>)> {
    Ok(match kind {
        SuiteKind::Standard => (
            standard_sources(&cfg.primes, cfg.max_n, cfg.max_e)?,
            vec![Property::Oracle, Property::Mazur, Property::Filtration],
        ),
        SuiteKind::Oracle => (
            family_sources(&cfg.primes, cfg.max_n, cfg.max_e)?,
            vec![Property::Oracle, Property::Mazur],
        ),
        SuiteKind::Mazur => (
            twist_sources(cfg.seed, cfg.random, &cfg.primes, cfg.max_n, cfg.max_e, false)?,
            vec![Property::Mazur, Property::Oracle],
        ),
        SuiteKind::Filtration => (
            twist_sources(cfg.seed, cfg.random, &cfg.primes, cfg.max_n, cfg.max_e, true)?,
            vec![Property::Filtration],
        ),
        SuiteKind::GuConsistency => (gu_sources(&cfg.primes, cfg.max_b, cfg.max_r, cfg.seed)?, vec![Property::GuChain]),
        SuiteKind::Precision => (
            twist_sources(cfg.seed, cfg.random, &cfg.primes, cfg.max_n, cfg.max_e, false)?,
            vec![Property::Precision(cfg.factor)],
        ),
    })
}

/// Runs a named suite; the first failing instance (in key order) is shrunk
/// into [`SuiteReport::reproducer`].
pub fn run_suite(kind: SuiteKind, cfg: &SuiteConfig) -> Result<SuiteReport> {
    if cfg.factor < 2 && kind == SuiteKind::Precision {
        return Err(Error::InvalidDatum("precision factor must be >= 2".into()));
    }
    let (sources, props) = suite_plan(kind, cfg)?;
    let instances = run_sources(&sources, &props);
    let reproducer = instances.iter().find(|v| v.failed()).and_then(|v| {
        let src = sources.iter().find(|s| s.to_string() == v.key)?;
        let m = src.build().ok()?;
        Some(minimize(&m, &props))
    });
    Ok(SuiteReport {
        suite: kind,
        config: cfg.clone(),
        tally: tally(&instances),
        instances,
        reproducer,
    })
}

/// Diagonal check for standard modules: `F^e` at every position equals
/// `diag(p^{a_1}, …, p^{a_n})` and `Fil¹` is spanned by the `ε_j` with
/// `f > n − j`.
pub fn check_standard_shape(m: &DieudonneModule) -> Result<Outcome> {
    let ring = m.ring();
    let fld = ring.residue_field();
    let n = m.n();
    for (o, od) in m.datum().orbits.iter().enumerate() {
        let slopes = mu_ordinary_slopes(od);
        let expected = Matrix::diagonal(ring, &slopes.iter().map(|&a| ring.p_power(a as u32)).collect::<Vec<_>>());
        for k in 0..od.e {
            if m.frobenius_power(o, k) != expected {
                return Ok(fail(format!("orbit {o}, position {k}: F^e is not diag(p^a)")));
            }
            let want: Vec<Vec<_>> = (1..=n)
                .filter(|&j| od.f[k] + j > n)
                .map(|j| (0..n).map(|i| if i + 1 == j { fld.one() } else { fld.zero() }).collect())
                .collect();
            if m.hodge_filtration(o, k, 1)? != field::canonical_span(fld, n, &want) {
                return Ok(fail(format!("orbit {o}, position {k}: Fil¹ is not the expected ε-span")));
            }
            let ord = mu_ordinary_polygon(od);
            if m.hodge_polygon(o, k)? != ord {
                return Ok(fail(format!("orbit {o}, position {k}: Hodge differs from μ-ordinary")));
            }
        }
        if m.newton_polygon(o)? != mu_ordinary_polygon(od) {
            return Ok(fail(format!("orbit {o}: Newton differs from μ-ordinary")));
        }
    }
    let report = hasse_report(m)?;
    if !report.labels.iter().all(|l| l.tau_nonzero) {
        return Ok(fail("a τ-Hasse scalar vanishes"));
    }
    Ok(Outcome::Pass)
}

/// Full per-`F` Newton polygon of a module: every orbit renormalized and
/// weighted by `e · r`.
pub fn full_newton_polygon(m: &DieudonneModule) -> Result<Polygon> {
    let mut slopes = Vec::new();
    for (o, od) in m.datum().orbits.iter().enumerate() {
        let poly = m.newton_polygon(o)?.renormalize(od.e as i64, od.e * m.datum().r);
        slopes.extend(poly.slopes());
    }
    Ok(Polygon::from_slopes(&slopes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_counts() {
        assert_eq!(f_tuples(3, 2, false).len(), 27);
        // non-increasing triples from {0,1,2}: C(5,3)
        assert_eq!(f_tuples(3, 2, true).len(), 10);
    }

    #[test]
    fn small_oracle_suite_passes() {
        let cfg = SuiteConfig {
            primes: vec![2],
            max_n: 2,
            max_e: 2,
            ..SuiteConfig::default()
        };
        let r = run_suite(SuiteKind::Oracle, &cfg).unwrap();
        assert!(r.passed(), "{:?}", r.tally);
        assert!(r.instances.windows(2).all(|w| w[0].key < w[1].key));
    }

    #[test]
    fn shrinking_drops_irrelevant_orbits() {
        // an invalid extra orbit plus a failing predicate on the first orbit
        let d = PelDatum::new(
            3,
            vec![OrbitDatum::new(1, 2, vec![1]).unwrap(), OrbitDatum::new(1, 2, vec![0]).unwrap()],
            1,
        )
        .unwrap();
        let m = standard_module(&d, &default_ring(&d).unwrap()).unwrap();
        let small = without_orbit(&m, 1).unwrap();
        assert_eq!(small.datum().orbits.len(), 1);
        let smaller = without_basis_vector(&small, 0).unwrap();
        assert_eq!(smaller.n(), 1);
        assert_eq!(smaller.datum().orbits[0].f, vec![1]);
    }
}
