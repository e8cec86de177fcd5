//! Berezinian sections in the canonical basis, the Berezin integral, Lie
//! derivatives of Berezinian sections, and the two divergences.
//!
//! Sections are stored as `[ξ]·f` over the canonical generator
//! `[dᴳx¹∧…∧dᴳx^m ⊗ ∂/∂x^{-1}∘…∘∂/∂x^{-n}]` (order tag 0) or its
//! horizontal-lift analogue with `d/dx^{-j}` factors (order tag k ≥ 1). The
//! quotient sheaf itself is never materialized; [`BerOperator`] provides an
//! independent reduction of operator classes to the canonical basis, used to
//! cross-check the Lie-derivative and divergence formulas.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::gforms::{eta_g, GradedForm};
use crate::jetcoords::{JetContext, VectorField};
use crate::superalg::{CoordId, Parity, Rational, SuperExpr};
use crate::{CasError, Result};

/// `[ξ]·body` over the canonical Berezinian basis of the chart.
#[derive(Debug, Clone, PartialEq)]
pub struct BerezinSection {
    pub ctx: JetContext,
    pub body: SuperExpr,
    /// 0 for the base Berezinian basis, `k ≥ 1` for the k-order basis whose
    /// odd derivations are the horizontal lifts.
    pub order_tag: usize,
}

impl BerezinSection {
    pub fn new(ctx: &JetContext, body: SuperExpr, order_tag: usize) -> Self {
        BerezinSection {
            ctx: ctx.clone(),
            body,
            order_tag,
        }
    }

    /// The canonical generator `[ξ]·1` of the base Berezinian.
    pub fn canonical(ctx: &JetContext) -> Self {
        BerezinSection::new(ctx, SuperExpr::one(), 0)
    }

    /// Parity of the generator: the `n` odd derivations contribute `n mod 2`.
    pub fn generator_parity(&self) -> Parity {
        Parity::from_odd(self.ctx.n % 2 == 1)
    }
}

/// Polynomial `m`-form integrand produced by the Berezin integral: the
/// coefficient of `dx¹∧…∧dx^m` on the reduced base.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    pub coeff: SuperExpr,
}

/// Extracts `(−1)^{n(n−1)/2} · f_{1…n}`, the signed coefficient of the top
/// odd monomial `x^{-1}⋯x^{-n}` of the body.
pub fn berezin_integral_body(section: &BerezinSection) -> Result<Integrand> {
    let ctx = &section.ctx;
    for c in section.body.coords() {
        if !c.is_base() {
            return Err(CasError::Precondition(format!(
                "Berezin integral needs a base body; pull back first (found {c})"
            )));
        }
    }
    let top: Vec<CoordId> = (1..=ctx.n).map(CoordId::BaseOdd).collect();
    let mut coeff = section.body.grassmann_coefficient(&top);
    let n = ctx.n as usize;
    if (n * (n.saturating_sub(1)) / 2) % 2 == 1 {
        coeff = coeff.neg();
    }
    Ok(Integrand { coeff })
}

/// Exact integral of the polynomial integrand over an axis-aligned box; the
/// bounds map base-even indices to `(lo, hi)`.
pub fn box_integral(
    ctx: &JetContext,
    integrand: &Integrand,
    bounds: &BTreeMap<u16, (Rational, Rational)>,
) -> Result<Rational> {
    for i in 1..=ctx.m {
        if !bounds.contains_key(&i) {
            return Err(CasError::ArgumentError(format!("missing box bounds for x{i}")));
        }
    }
    let mut total = Rational::zero();
    for (term, q) in integrand.coeff.terms() {
        if !term.odds.is_empty() {
            return Err(CasError::Precondition("integrand must be even".into()));
        }
        let mut factor = q.clone();
        let mut exps: BTreeMap<u16, u32> = BTreeMap::new();
        for (c, e) in &term.evens {
            match c {
                CoordId::BaseEven(i) => {
                    exps.insert(*i, *e);
                }
                _ => {
                    return Err(CasError::Precondition(format!(
                        "integrand depends on non-base coordinate {c}"
                    )))
                }
            }
        }
        for i in 1..=ctx.m {
            let (lo, hi) = &bounds[&i];
            let e = exps.get(&i).copied().unwrap_or(0);
            let p = e + 1;
            let anti = |v: &Rational| {
                let mut acc = Rational::from(num_bigint::BigInt::from(1));
                for _ in 0..p {
                    acc *= v;
                }
                acc / Rational::from(num_bigint::BigInt::from(p))
            };
            factor *= anti(hi) - anti(lo);
        }
        total += factor;
    }
    Ok(total)
}

/// Berezinian divergence by the explicit termwise formula
/// `div_B(X) = Σ_i ∂X^i/∂x^i + Σ_j (−1)^{|X^{-j}|} ∂X^{-j}/∂x^{-j}`,
/// computed on the base projection of a projectable field.
pub fn div_berezin(ctx: &JetContext, x: &VectorField) -> Result<SuperExpr> {
    if !x.is_projectable() {
        return Err(CasError::ArgumentError(
            "Berezinian divergence needs a projectable field".into(),
        ));
    }
    let xb = x.base_projection();
    let mut out = SuperExpr::zero();
    for i in 1..=ctx.m {
        let c = CoordId::BaseEven(i);
        out = out.add(&xb.component(&c).partial(&c));
    }
    for j in 1..=ctx.n {
        let c = CoordId::BaseOdd(j);
        let g = xb.component(&c);
        let (ge, go) = g.parity_split();
        out = out.add(&ge.partial(&c));
        out = out.sub(&go.partial(&c));
    }
    Ok(out)
}

/// Graded divergence: `L^G_{X'} η^G = η^G · f` when it exists; `None` when
/// the Lie derivative is not proportional to the graded volume.
pub fn div_graded(ctx: &JetContext, x: &VectorField) -> Result<Option<SuperExpr>> {
    if !x.is_projectable() {
        return Err(CasError::ArgumentError(
            "graded divergence needs a projectable field".into(),
        ));
    }
    let xb = x.base_projection();
    let eta = eta_g(ctx);
    let lied = eta.lie_derive(&xb);
    let eta_word: Vec<CoordId> = ctx.base_evens();
    let f = lied.word_coeff(&eta_word);
    let remainder = lied.sub(&GradedForm::from_word_coeff(eta_word, f.clone()));
    if remainder.is_zero() {
        Ok(Some(f))
    } else {
        Ok(None)
    }
}

/// Graded Lie derivative of a Berezinian section along a projectable field:
/// `L^G_X (ξ·a) = (−1)^{|X||ξ|} ξ · (div_B(X')·a + X(a))` per homogeneous
/// part, with the Lie derivative of the generator taken along the projection.
pub fn lie_berezin(
    ctx: &JetContext,
    x: &VectorField,
    section: &BerezinSection,
) -> Result<BerezinSection> {
    if !x.is_projectable() {
        return Err(CasError::ArgumentError(
            "Lie derivative of a Berezinian section needs a projectable field".into(),
        ));
    }
    let xi_parity = section.generator_parity();
    let mut body = SuperExpr::zero();
    for (p, part) in x.homogeneous_parts() {
        let div = div_berezin(ctx, &part)?;
        let sgn = p.koszul_sign(xi_parity) as i64;
        let contrib = div.mul(&section.body).add(&part.apply(&section.body));
        body = body.add(&contrib.scale_int(sgn));
    }
    Ok(BerezinSection::new(ctx, body, section.order_tag))
}

// ---------------------------------------------------------------------------
// Quotient-reduction oracle
// ---------------------------------------------------------------------------

/// Key of one operator term: the set of odd partials (bitmask over `j`,
/// composed in ascending order left to right) and the even partial multi
/// (sorted index/multiplicity pairs). The coefficient multiplies on the left.
type OpKey = (u64, Vec<(u16, u32)>);

/// Normal form of a differential operator `Σ c · ∂_S ∘ ∂_E` acting on base
/// superfunctions. Used to reduce `m`-form valued operator classes to the
/// canonical Berezinian basis independently of the divergence formulas.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BerOperator {
    terms: BTreeMap<OpKey, SuperExpr>,
}

impl BerOperator {
    pub fn identity() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0u64, Vec::new()), SuperExpr::one());
        BerOperator { terms }
    }

    /// The canonical composite `∂/∂x^{-1} ∘ … ∘ ∂/∂x^{-n}`.
    pub fn odd_top(ctx: &JetContext) -> Self {
        let mut mask = 0u64;
        for j in 1..=ctx.n {
            mask |= 1 << j;
        }
        let mut terms = BTreeMap::new();
        terms.insert((mask, Vec::new()), SuperExpr::one());
        BerOperator { terms }
    }

    fn insert(&mut self, key: OpKey, coeff: SuperExpr) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let v = e.get_mut().add(&coeff);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    /// `self ∘ ∂/∂x^{-j}`.
    pub fn compose_odd_partial(&self, j: u16) -> Self {
        let mut out = BerOperator::default();
        for ((mask, evens), c) in &self.terms {
            if mask & (1 << j) != 0 {
                continue; // repeated odd partial annihilates
            }
            // move the appended factor into ascending position from the right
            let greater = (mask >> (j + 1)).count_ones();
            let sign = if greater % 2 == 1 { -1 } else { 1 };
            out.insert((mask | (1 << j), evens.clone()), c.scale_int(sign));
        }
        out
    }

    /// `self ∘ ∂/∂x^i`.
    pub fn compose_even_partial(&self, i: u16) -> Self {
        let mut out = BerOperator::default();
        for ((mask, evens), c) in &self.terms {
            let mut evens = evens.clone();
            match evens.binary_search_by(|(d, _)| d.cmp(&i)) {
                Ok(idx) => evens[idx].1 += 1,
                Err(idx) => evens.insert(idx, (i, 1)),
            }
            out.insert((*mask, evens), c.clone());
        }
        out
    }

    /// `self ∘ (f·)`: pushes the multiplication operator left through the
    /// partials by the graded Leibniz rule.
    pub fn compose_mul(&self, f: &SuperExpr) -> Self {
        let mut out = BerOperator::default();
        for ((mask, evens), c) in &self.terms {
            // ∂_E ∘ (f·) = Σ_{E'≤E} C(E,E') (∂^{E'} f)· ∘ ∂_{E−E'}
            for (g, rem_evens) in even_leibniz(evens, f) {
                // then ∂_S ∘ (g·), recursively
                let s_list: Vec<u16> = (0..64).filter(|j| mask & (1u64 << j) != 0).collect();
                for (h, rem_mask) in odd_leibniz(&s_list, &g) {
                    out.insert((rem_mask, rem_evens.clone()), c.mul(&h));
                }
            }
        }
        out
    }

    /// `self ∘ X` for a base vector field `X = Σ_c X^c ∂/∂c`.
    pub fn compose_field(&self, x: &VectorField) -> Result<Self> {
        let mut out = BerOperator::default();
        for (c, comp) in x.components() {
            if !c.is_base() {
                return Err(CasError::ArgumentError(
                    "operator oracle composes with base fields only".into(),
                ));
            }
            let with_mul = self.compose_mul(comp);
            let full = match c {
                CoordId::BaseEven(i) => with_mul.compose_even_partial(*i),
                CoordId::BaseOdd(j) => with_mul.compose_odd_partial(*j),
                _ => unreachable!(),
            };
            for (k, v) in full.terms {
                out.insert(k, v);
            }
        }
        Ok(out)
    }

    /// Reduces the class `[η^G ⊗ self]` modulo the Stokes submodule to the
    /// canonical form `ξ · g`, returning `g`.
    ///
    /// Rules (derived from the integral functional): an even partial
    /// integrates by parts, `[η ⊗ c·∂_S∘∂_i] ≡ −[η ⊗ (∂_i c)·∂_S]`; a term
    /// `c·∂_S` equals `ξ · λ(S)·(body c)·x^{T∖S}` where the sign `λ(S)` is
    /// computed from first principles on monomial test functions.
    pub fn reduce(&self, ctx: &JetContext) -> Result<SuperExpr> {
        for c in self.terms.values().flat_map(|v| v.coords()) {
            if !c.is_base() {
                return Err(CasError::Precondition(
                    "operator reduction applies to base coefficients only".into(),
                ));
            }
        }
        let mut g_total = SuperExpr::zero();
        for ((mask, evens), c) in &self.terms {
            // Step 1: remove even partials by integration by parts.
            let mut g = c.clone();
            let mut sign = 1i64;
            for (i, e) in evens {
                for _ in 0..*e {
                    g = g.partial(&CoordId::BaseEven(*i));
                    sign = -sign;
                }
            }
            // Step 2: [η ⊗ g·∂_S] = ξ · λ(S)·(body g)·x^{T∖S}.
            let body = g.grassmann_coefficient(&[]);
            if body.is_zero() {
                continue;
            }
            let s_word: Vec<CoordId> = (1..=ctx.n)
                .filter(|j| mask & (1u64 << *j) != 0)
                .map(CoordId::BaseOdd)
                .collect();
            let co_word: Vec<CoordId> = (1..=ctx.n)
                .filter(|j| mask & (1u64 << *j) == 0)
                .map(CoordId::BaseOdd)
                .collect();
            let lambda = reduction_sign(ctx, &s_word, &co_word);
            let mut monomial = SuperExpr::one();
            for c in &co_word {
                monomial = monomial.mul(&SuperExpr::coord(c.clone()));
            }
            g_total = g_total.add(&body.mul(&monomial).scale_int(sign * lambda as i64));
        }
        Ok(g_total)
    }
}

/// λ(S) with `σ(S) = body(∂_S x^S)`, `τ(S)` the interleaving sign in
/// `x^{T∖S}·x^S = τ x^T` and `σ(T) = body(∂_T x^T)`:
/// `λ(S) = σ(S)·τ(S)·σ(T)`.
fn reduction_sign(ctx: &JetContext, s_word: &[CoordId], co_word: &[CoordId]) -> i8 {
    let apply_chain = |word: &[CoordId], f: &SuperExpr| -> SuperExpr {
        // composition in ascending order: rightmost (largest) acts first
        let mut v = f.clone();
        for c in word.iter().rev() {
            v = v.partial(c);
        }
        v
    };
    let prod = |word: &[CoordId]| -> SuperExpr {
        let mut p = SuperExpr::one();
        for c in word {
            p = p.mul(&SuperExpr::coord(c.clone()));
        }
        p
    };
    let scalar_sign = |f: &SuperExpr| -> i8 {
        match f.grassmann_coefficient(&[]).as_constant() {
            Some(q) if q == Rational::from(num_bigint::BigInt::from(1)) => 1,
            Some(q) if q == -Rational::from(num_bigint::BigInt::from(1)) => -1,
            _ => 0,
        }
    };
    let sigma_s = scalar_sign(&apply_chain(s_word, &prod(s_word)));
    let top_word: Vec<CoordId> = (1..=ctx.n).map(CoordId::BaseOdd).collect();
    let sigma_t = scalar_sign(&apply_chain(&top_word, &prod(&top_word)));
    let tau = {
        let merged = prod(co_word).mul(&prod(s_word));
        match merged.grassmann_coefficient(&top_word).as_constant() {
            Some(q) if q == Rational::from(num_bigint::BigInt::from(1)) => 1i8,
            Some(q) if q == -Rational::from(num_bigint::BigInt::from(1)) => -1,
            _ => 0,
        }
    };
    debug_assert!(sigma_s != 0 && sigma_t != 0 && tau != 0);
    // λ·τ·σ(T) = σ(S) over signs means λ = σ(S)·τ·σ(T).
    sigma_s * tau * sigma_t
}

fn even_leibniz(evens: &[(u16, u32)], f: &SuperExpr) -> Vec<(SuperExpr, Vec<(u16, u32)>)> {
    // Iteratively split each ∂_i^e ∘ (f·) into Σ_k C(e,k) (∂_i^k f)· ∘ ∂_i^{e−k}.
    let mut acc: Vec<(SuperExpr, Vec<(u16, u32)>)> = vec![(f.clone(), Vec::new())];
    for (i, e) in evens {
        let mut next = Vec::new();
        for (g, rem) in acc {
            let mut dk = g.clone();
            for k in 0..=*e {
                let binom = binomial(*e, k);
                let mut rem_k = rem.clone();
                if *e > k {
                    rem_k.push((*i, e - k));
                }
                next.push((dk.scale(&binom), rem_k));
                if k < *e {
                    dk = dk.partial(&CoordId::BaseEven(*i));
                }
            }
        }
        acc = next;
    }
    for (_, rem) in acc.iter_mut() {
        rem.sort_unstable();
    }
    acc
}

fn binomial(n: u32, k: u32) -> Rational {
    let mut num = num_bigint::BigInt::from(1);
    let mut den = num_bigint::BigInt::from(1);
    for i in 0..k {
        num *= num_bigint::BigInt::from(n - i);
        den *= num_bigint::BigInt::from(i + 1);
    }
    Rational::new(num, den)
}

/// `∂_S ∘ (g·)` expanded by the graded Leibniz rule; returns pairs
/// `(left coefficient, remaining odd mask)` with all signs folded in.
fn odd_leibniz(s_asc: &[u16], g: &SuperExpr) -> Vec<(SuperExpr, u64)> {
    if g.is_zero() {
        return Vec::new();
    }
    if s_asc.is_empty() {
        return vec![(g.clone(), 0)];
    }
    // the rightmost (largest) factor meets the multiplication first
    let (prefix, last) = s_asc.split_at(s_asc.len() - 1);
    let t = last[0];
    let mut out = Vec::new();
    // ∂_t ∘ (g·) = (∂_t g)· + (−1)^{|g|}(g·)∘∂_t
    let dg = g.partial(&CoordId::BaseOdd(t));
    out.extend(odd_leibniz(prefix, &dg));
    let (ge, go) = g.parity_split();
    for (h, sgn) in [(ge, 1i64), (go, -1i64)] {
        if h.is_zero() {
            continue;
        }
        for (coeff, mask) in odd_leibniz(prefix, &h) {
            // append ∂_t on the right of the remaining composition; t is
            // larger than every element of the prefix, so no sign is needed
            debug_assert!(mask & (1u64 << t) == 0);
            out.push((coeff.scale_int(sgn), mask | (1u64 << t)));
        }
    }
    out
}

/// Lie derivative of `ξ·a` computed through the quotient: builds the operator
/// `∂_T ∘ (a·) ∘ X` for each homogeneous piece, reduces it to `ξ·h`, and
/// applies the sign of the definition
/// `L^G_X [η⊗P] = (−1)^{|X||η⊗P|+1} [η⊗P∘X]`.
pub fn lie_berezin_via_quotient(
    ctx: &JetContext,
    x: &VectorField,
    a: &SuperExpr,
) -> Result<SuperExpr> {
    let xi_parity = Parity::from_odd(ctx.n % 2 == 1);
    let mut total = SuperExpr::zero();
    for (px, part) in x.homogeneous_parts() {
        for pa in [Parity::Even, Parity::Odd] {
            let apart = a.parity_part(pa);
            if apart.is_zero() {
                continue;
            }
            let op = BerOperator::odd_top(ctx).compose_mul(&apart);
            let h = op.compose_field(&part)?.reduce(ctx)?;
            let section_parity = xi_parity.combine(pa);
            let sgn = -(px.koszul_sign(section_parity) as i64);
            total = total.add(&h.scale_int(sgn));
        }
    }
    Ok(total)
}
