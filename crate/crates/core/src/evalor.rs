//! Independent numerical/structural oracle.
//!
//! [`GrassmannNumber`] is a finite Grassmann algebra Λ_N with exact rational
//! coefficients, indexed by generator subsets as bitmasks. Its arithmetic is
//! deliberately written from scratch (subset interleaving signs, no reuse of
//! the symbolic normal form) so that agreement between a symbolic identity
//! and its evaluation here is a genuine cross-check.
//!
//! Two probing modes: random parity-respecting assignments for fast feedback,
//! and structured probes (full interpolation grid over the even coordinates ×
//! one distinct generator per odd coordinate) which are complete for the
//! polynomial coefficient ring and are the mode used in acceptance runs.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::superalg::{CoordId, Parity, Rational, SuperExpr};
use crate::{CasError, Result};

/// Element of Λ_N with exact rational coefficients; keys are generator
/// subsets as bitmasks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GrassmannNumber {
    terms: BTreeMap<u64, Rational>,
}

impl GrassmannNumber {
    pub fn zero() -> Self {
        GrassmannNumber::default()
    }

    pub fn scalar(q: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(0, q);
        }
        GrassmannNumber { terms }
    }

    pub fn one() -> Self {
        GrassmannNumber::scalar(Rational::one())
    }

    /// The generator θ_i (0-based).
    pub fn generator(i: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(1u64 << i, Rational::one());
        GrassmannNumber { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (m, q) in &other.terms {
            let e = terms.entry(*m).or_insert_with(Rational::zero);
            *e += q;
            if e.is_zero() {
                terms.remove(m);
            }
        }
        GrassmannNumber { terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(m, q)| (*m, -q.clone())).collect();
        GrassmannNumber { terms }
    }

    /// Product: generator squares vanish, the sign is the parity of the
    /// interleaving permutation of the two subsets.
    pub fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<u64, Rational> = BTreeMap::new();
        for (ma, qa) in &self.terms {
            for (mb, qb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                let sign = interleave_sign(*ma, *mb);
                let mut q = qa * qb;
                if sign < 0 {
                    q = -q;
                }
                let key = ma | mb;
                let e = terms.entry(key).or_insert_with(Rational::zero);
                *e += q;
                if e.is_zero() {
                    terms.remove(&key);
                }
            }
        }
        GrassmannNumber { terms }
    }

    /// Z₂ degree when homogeneous.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys();
        let first = it.next().map(|m| m.count_ones() % 2)?;
        for m in it {
            if m.count_ones() % 2 != first {
                return None;
            }
        }
        Some(Parity::from_odd(first == 1))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u64, &Rational)> {
        self.terms.iter()
    }
}

/// Number of transpositions (mod 2) needed to merge the generators of `b`
/// into those of `a`, as a sign.
fn interleave_sign(a: u64, b: u64) -> i8 {
    let mut sign = 1i8;
    let mut bb = b;
    while bb != 0 {
        let i = bb.trailing_zeros();
        // crossings: generators of `a` above position i
        if (a >> (i + 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        bb &= bb - 1;
    }
    sign
}

/// Coordinate assignment for evaluation: even coordinates to even elements,
/// odd coordinates to odd elements of Λ_N.
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    map: BTreeMap<CoordId, GrassmannNumber>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn set(&mut self, c: CoordId, v: GrassmannNumber) -> Result<()> {
        if !v.is_zero() {
            let vp = v.parity().ok_or_else(|| {
                CasError::ParityViolation(format!("assignment for {c} is inhomogeneous"))
            })?;
            if vp != c.parity() {
                return Err(CasError::ParityViolation(format!(
                    "assignment for {c} has the wrong parity"
                )));
            }
        }
        self.map.insert(c, v);
        Ok(())
    }

    pub fn set_rational(&mut self, c: CoordId, q: Rational) -> Result<()> {
        self.set(c, GrassmannNumber::scalar(q))
    }

    fn get(&self, c: &CoordId) -> Result<&GrassmannNumber> {
        self.map
            .get(c)
            .ok_or_else(|| CasError::ArgumentError(format!("no assignment for coordinate {c}")))
    }
}

/// Ring-homomorphic evaluation of a normal form at an assignment.
pub fn evaluate(f: &SuperExpr, assign: &Assignment) -> Result<GrassmannNumber> {
    let mut out = GrassmannNumber::zero();
    for (t, q) in f.terms() {
        let mut acc = GrassmannNumber::scalar(q.clone());
        for (c, e) in &t.evens {
            let v = assign.get(c)?;
            for _ in 0..*e {
                acc = acc.mul(v);
                if acc.is_zero() {
                    break;
                }
            }
            if acc.is_zero() {
                break;
            }
        }
        if !acc.is_zero() {
            for c in &t.odds {
                acc = acc.mul(assign.get(c)?);
                if acc.is_zero() {
                    break;
                }
            }
        }
        out = out.add(&acc);
    }
    Ok(out)
}

/// Probe verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    AllEqual,
    Counterexample { trial: usize, description: String },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::AllEqual)
    }
}

/// Evaluates both sides at `trials` random parity-respecting assignments.
/// Even coordinates get random rationals, odd coordinates random odd linear
/// combinations of generators. Deterministic under a fixed seed.
pub fn identity_probe(lhs: &SuperExpr, rhs: &SuperExpr, trials: usize, seed: u64) -> Verdict {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut coords = lhs.coords();
    coords.extend(rhs.coords());
    let odds_count = coords.iter().filter(|c| c.parity().is_odd()).count();
    let n_gens = (odds_count as u32).max(1);
    for trial in 0..trials {
        let mut assign = Assignment::new();
        for c in &coords {
            match c.parity() {
                Parity::Even => {
                    let num = rng.random_range(-6i64..=6);
                    let den = rng.random_range(1i64..=3);
                    assign
                        .set_rational(c.clone(), crate::superalg::ratio(num, den))
                        .unwrap();
                }
                Parity::Odd => {
                    let mut v = GrassmannNumber::zero();
                    for g in 0..n_gens {
                        let coeff = rng.random_range(-3i64..=3);
                        if coeff != 0 {
                            v = v.add(
                                &GrassmannNumber::generator(g)
                                    .mul(&GrassmannNumber::scalar(crate::superalg::ratio(coeff, 1))),
                            );
                        }
                    }
                    assign.set(c.clone(), v).unwrap();
                }
            }
        }
        let l = evaluate(lhs, &assign).expect("probe assignment covers all coordinates");
        let r = evaluate(rhs, &assign).expect("probe assignment covers all coordinates");
        if l != r {
            return Verdict::Counterexample {
                trial,
                description: format!("difference {:?}", l.sub(&r).terms().next()),
            };
        }
    }
    Verdict::AllEqual
}

/// Complete structured probe: evaluates both sides separately on a full grid
/// of integer points for the even coordinates (degree+1 values per
/// coordinate) while each odd coordinate is sent to a distinct generator.
/// For polynomial coefficients this mode is complete: agreement on the grid
/// implies symbolic equality. No symbolic subtraction is performed, so the
/// probe is an independent check of the normal-form arithmetic.
pub fn structured_probe(lhs: &SuperExpr, rhs: &SuperExpr) -> bool {
    let mut coords = lhs.coords();
    coords.extend(rhs.coords());
    let evens: Vec<CoordId> = coords.iter().filter(|c| !c.parity().is_odd()).cloned().collect();
    let odds: Vec<CoordId> = coords.iter().filter(|c| c.parity().is_odd()).cloned().collect();
    assert!(odds.len() <= 60, "structured probe supports at most 60 odd coordinates");
    let degrees: Vec<u32> = evens
        .iter()
        .map(|c| lhs.degree_in(c).max(rhs.degree_in(c)))
        .collect();
    let mut point = vec![0i64; evens.len()];
    probe_grid(lhs, rhs, &evens, &odds, &degrees, &mut point, 0)
}

/// Number of grid points a structured probe of these two sides would visit.
pub fn structured_probe_grid_size(lhs: &SuperExpr, rhs: &SuperExpr) -> u128 {
    let mut coords = lhs.coords();
    coords.extend(rhs.coords());
    coords
        .iter()
        .filter(|c| !c.parity().is_odd())
        .map(|c| (lhs.degree_in(c).max(rhs.degree_in(c)) as u128) + 1)
        .product()
}

#[allow(clippy::too_many_arguments)]
fn probe_grid(
    lhs: &SuperExpr,
    rhs: &SuperExpr,
    evens: &[CoordId],
    odds: &[CoordId],
    degrees: &[u32],
    point: &mut Vec<i64>,
    idx: usize,
) -> bool {
    if idx == evens.len() {
        let mut assign = Assignment::new();
        for (c, v) in evens.iter().zip(point.iter()) {
            assign
                .set_rational(c.clone(), crate::superalg::ratio(*v, 1))
                .unwrap();
        }
        for (g, c) in odds.iter().enumerate() {
            assign.set(c.clone(), GrassmannNumber::generator(g as u32)).unwrap();
        }
        return evaluate(lhs, &assign).unwrap() == evaluate(rhs, &assign).unwrap();
    }
    for v in 0..=degrees[idx] as i64 {
        point[idx] = v + 1; // avoid 0 to also exercise constant terms
        if !probe_grid(lhs, rhs, evens, odds, degrees, point, idx + 1) {
            return false;
        }
    }
    true
}

/// Deterministic random generators for expressions, sections and fields used
/// by probe-style tests. Everything is seeded; a given seed reproduces the
/// same objects.
pub mod sampling {
    use super::*;
    use crate::jetcoords::{JetContext, Section, VectorField};

    pub struct ExprConfig {
        /// coordinates the expression may use
        pub coords: Vec<CoordId>,
        pub max_terms: usize,
        /// maximal power of one even coordinate in one term
        pub max_even_pow: u32,
        /// maximal number of factors per term
        pub max_factors: usize,
    }

    /// Random normal-form expression over the given coordinates.
    pub fn random_expr(rng: &mut StdRng, cfg: &ExprConfig) -> SuperExpr {
        let mut out = SuperExpr::zero();
        let n_terms = rng.random_range(1..=cfg.max_terms);
        for _ in 0..n_terms {
            let mut term = SuperExpr::constant(crate::superalg::ratio(
                rng.random_range(-4i64..=4),
                rng.random_range(1i64..=2),
            ));
            let n_factors = rng.random_range(0..=cfg.max_factors);
            for _ in 0..n_factors {
                let c = &cfg.coords[rng.random_range(0..cfg.coords.len())];
                let pow = if c.parity().is_odd() {
                    1
                } else {
                    rng.random_range(1..=cfg.max_even_pow)
                };
                term = term.mul(&SuperExpr::coord(c.clone()).pow(pow));
            }
            out = out.add(&term);
        }
        out
    }

    /// Random first-order Lagrangian-style expression on the chart.
    pub fn random_first_order(ctx: &JetContext, rng: &mut StdRng, max_terms: usize) -> SuperExpr {
        let cfg = ExprConfig {
            coords: ctx.catalog(1),
            max_terms,
            max_even_pow: 2,
            max_factors: 3,
        };
        random_expr(rng, &cfg)
    }

    /// Random polynomial section: components in base coordinates with the
    /// parity of the fiber coordinate.
    pub fn random_section(ctx: &JetContext, rng: &mut StdRng) -> Section {
        let base: Vec<CoordId> = ctx.base_coords();
        let mut comps = BTreeMap::new();
        for mu in ctx.fiber_mus() {
            let want = CoordId::fiber(mu).parity();
            let cfg = ExprConfig {
                coords: base.clone(),
                max_terms: 3,
                max_even_pow: 3,
                max_factors: 3,
            };
            let raw = random_expr(rng, &cfg);
            let mut v = raw.parity_part(want);
            if v.is_zero() && want == Parity::Odd && ctx.n > 0 {
                let j = rng.random_range(1..=ctx.n);
                v = SuperExpr::coord(CoordId::BaseOdd(j)).scale_int(rng.random_range(1i64..=3));
            }
            comps.insert(mu, v);
        }
        Section::new(ctx, comps).expect("sampled section is valid")
    }

    /// Random projectable field on the total space: base components from base
    /// coordinates, fiber components from base and fiber coordinates.
    pub fn random_projectable_field(ctx: &JetContext, rng: &mut StdRng) -> VectorField {
        let mut comps = BTreeMap::new();
        let base_cfg = ExprConfig {
            coords: ctx.base_coords(),
            max_terms: 2,
            max_even_pow: 2,
            max_factors: 2,
        };
        for alpha in ctx.base_coords() {
            if rng.random_bool(0.7) {
                comps.insert(alpha.clone(), random_expr(rng, &base_cfg));
            }
        }
        let mut fiber_coords = ctx.base_coords();
        fiber_coords.extend(ctx.fiber_coords());
        let fiber_cfg = ExprConfig {
            coords: fiber_coords,
            max_terms: 2,
            max_even_pow: 2,
            max_factors: 2,
        };
        for mu in ctx.fiber_mus() {
            if rng.random_bool(0.7) {
                comps.insert(CoordId::fiber(mu), random_expr(rng, &fiber_cfg));
            }
        }
        VectorField::new(comps)
    }

    /// Random homogeneous field on the base manifold.
    pub fn random_base_field(ctx: &JetContext, rng: &mut StdRng, parity: Parity) -> VectorField {
        let cfg = ExprConfig {
            coords: ctx.base_coords(),
            max_terms: 2,
            max_even_pow: 2,
            max_factors: 2,
        };
        let mut comps = BTreeMap::new();
        for alpha in ctx.base_coords() {
            let want = Parity::from_odd(parity.is_odd() ^ alpha.parity().is_odd());
            let v = random_expr(rng, &cfg).parity_part(want);
            if !v.is_zero() {
                comps.insert(alpha.clone(), v);
            }
        }
        VectorField::new(comps)
    }

    /// Random graded form of the given degree over coordinates of order ≤ ord.
    pub fn random_form(
        ctx: &JetContext,
        rng: &mut StdRng,
        degree: usize,
        ord: usize,
    ) -> crate::gforms::GradedForm {
        use crate::gforms::GradedForm;
        let catalog = ctx.catalog(ord);
        let cfg = ExprConfig {
            coords: catalog.clone(),
            max_terms: 2,
            max_even_pow: 2,
            max_factors: 2,
        };
        let mut out = GradedForm::zero();
        let n_terms = rng.random_range(1..=3);
        for _ in 0..n_terms {
            let mut word = Vec::new();
            for _ in 0..degree {
                word.push(catalog[rng.random_range(0..catalog.len())].clone());
            }
            out = out.add(&GradedForm::from_word_coeff(word, random_expr(rng, &cfg)));
        }
        out
    }
}
