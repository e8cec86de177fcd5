//! Multi-index calculus, jet coordinate catalogs, total derivatives, contact
//! forms, jet extensions of sections and prolongation of projectable fields.
//!
//! Conventions. A negative multi-index `A = (-α₁,…,-α_l)` is stored by the
//! values `αᵢ`; its entries, read left to right, name the factors of the
//! operator composition left to right (the rightmost entry acts first). A jet
//! coordinate `y^μ_{IA}` only exists for strictly decreasing `A` (increasing
//! `αᵢ`); every other arrangement is the signed canonical coordinate obtained
//! through [`reorder_sign`]. Juxtaposition `⋆` concatenates and annihilates on
//! repeats or length overflow.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::gforms::GradedForm;
use crate::superalg::{CoordId, MultiIndexNeg, MultiIndexPos, Parity, SuperExpr};
use crate::{CasError, Result};

/// The problem chart: base dimension `(m|n)`, fiber dimension `(r|s)` and the
/// declared jet order `k` of the problem. Operations promote the order
/// implicitly; `k` bounds user-facing catalogs and contact-form generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetContext {
    pub m: u16,
    pub n: u16,
    pub r: u16,
    pub s: u16,
    pub k: u16,
}

impl JetContext {
    pub fn new(m: u16, n: u16, r: u16, s: u16, k: u16) -> Result<Self> {
        if k == 0 {
            return Err(CasError::ArgumentError("jet order k must be ≥ 1".into()));
        }
        if r + s == 0 {
            return Err(CasError::ArgumentError("fiber dimension must be nonzero".into()));
        }
        Ok(JetContext { m, n, r, s, k })
    }

    pub fn base_evens(&self) -> Vec<CoordId> {
        (1..=self.m).map(CoordId::BaseEven).collect()
    }

    pub fn base_odds(&self) -> Vec<CoordId> {
        (1..=self.n).map(CoordId::BaseOdd).collect()
    }

    /// All base coordinates, even ones first.
    pub fn base_coords(&self) -> Vec<CoordId> {
        let mut v = self.base_evens();
        v.extend(self.base_odds());
        v
    }

    /// Fiber indices `μ = -s,…,-1,1,…,r`.
    pub fn fiber_mus(&self) -> Vec<i16> {
        let mut v: Vec<i16> = (1..=self.s as i16).map(|j| -j).collect();
        v.sort_unstable();
        v.extend(1..=self.r as i16);
        v
    }

    pub fn fiber_coords(&self) -> Vec<CoordId> {
        self.fiber_mus().into_iter().map(CoordId::fiber).collect()
    }

    /// All jet coordinates (including the fiber coordinates at order 0) of
    /// total order `|I| + |A| ≤ order`.
    pub fn jet_coords_up_to(&self, order: usize) -> Vec<CoordId> {
        let mut out = Vec::new();
        for mu in self.fiber_mus() {
            for total in 0..=order {
                for l in 0..=total.min(self.n as usize) {
                    let d = total - l;
                    for neg in (1..=self.n).combinations(l) {
                        for pos in (1..=self.m).combinations_with_replacement(d) {
                            out.push(CoordId::Jet {
                                mu,
                                pos: MultiIndexPos::from_entries(pos.clone()),
                                neg: neg.clone(),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Full coordinate catalog up to the given jet order.
    pub fn catalog(&self, order: usize) -> Vec<CoordId> {
        let mut v = self.base_coords();
        v.extend(self.jet_coords_up_to(order));
        v
    }

    /// Graded dimension `(even | odd)` of the order-`ord` jet space.
    pub fn dim_jet(&self, order: usize) -> (usize, usize) {
        let mut even = self.m as usize;
        let mut odd = self.n as usize;
        for c in self.jet_coords_up_to(order) {
            match c.parity() {
                Parity::Even => even += 1,
                Parity::Odd => odd += 1,
            }
        }
        (even, odd)
    }

    pub fn check_coord(&self, c: &CoordId) -> Result<()> {
        let ok = match c {
            CoordId::BaseEven(i) => *i >= 1 && *i <= self.m,
            CoordId::BaseOdd(j) => *j >= 1 && *j <= self.n,
            CoordId::Jet { mu, pos, neg } => {
                let mu_ok = (*mu >= 1 && *mu <= self.r as i16)
                    || (*mu <= -1 && *mu >= -(self.s as i16));
                let pos_ok = pos.entries().iter().all(|i| *i >= 1 && *i <= self.m);
                let neg_ok = neg.iter().all(|j| *j >= 1 && *j <= self.n)
                    && neg.windows(2).all(|w| w[0] < w[1]);
                mu_ok && pos_ok && neg_ok
            }
        };
        if ok {
            Ok(())
        } else {
            Err(CasError::UnknownCoordinate(format!("{c}")))
        }
    }

    pub fn check_expr(&self, f: &SuperExpr) -> Result<()> {
        for c in f.coords() {
            self.check_coord(&c)?;
        }
        Ok(())
    }
}

/// Juxtaposition `A ⋆ B`: concatenation when there are no repeats and the
/// combined length stays within `cap`, the annihilator `∅` otherwise. Not
/// commutative.
pub fn star(a: &MultiIndexNeg, b: &MultiIndexNeg, cap: usize) -> MultiIndexNeg {
    let (va, vb) = match (a, b) {
        (MultiIndexNeg::Seq(va), MultiIndexNeg::Seq(vb)) => (va, vb),
        _ => return MultiIndexNeg::Null,
    };
    if va.len() + vb.len() > cap {
        return MultiIndexNeg::Null;
    }
    let mut v = va.clone();
    v.extend_from_slice(vb);
    let mut seen = BTreeSet::new();
    for j in &v {
        if !seen.insert(*j) {
            return MultiIndexNeg::Null;
        }
    }
    MultiIndexNeg::Seq(v)
}

/// Sorts a negative multi-index into the strictly decreasing canonical order,
/// returning the permutation sign; `(∅, 0)` when an entry repeats.
pub fn reorder_sign(a: &MultiIndexNeg) -> (MultiIndexNeg, i8) {
    let v = match a {
        MultiIndexNeg::Null => return (MultiIndexNeg::Null, 0),
        MultiIndexNeg::Seq(v) => v,
    };
    let mut sorted = v.clone();
    let mut sign = 1i8;
    // Insertion sort; each adjacent swap of distinct odd symbols flips the sign.
    for i in 1..sorted.len() {
        let mut j = i;
        while j > 0 && sorted[j - 1] > sorted[j] {
            sorted.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return (MultiIndexNeg::Null, 0);
    }
    (MultiIndexNeg::Seq(sorted), sign)
}

/// 1-based position of `b` (given as the value `j` of `x^{-j}`) in `B`.
pub fn position_in(b: u16, big_b: &MultiIndexNeg) -> Result<usize> {
    big_b
        .entries()
        .iter()
        .position(|&e| e == b)
        .map(|p| p + 1)
        .ok_or_else(|| CasError::ArgumentError(format!("-{b} is not an entry of the multi-index")))
}

/// `p(b) = (position − 1) mod 2`.
pub fn p_of(b: u16, big_b: &MultiIndexNeg) -> Result<u8> {
    Ok(((position_in(b, big_b)? - 1) % 2) as u8)
}

/// `q(b) = position mod 2`.
pub fn q_of(b: u16, big_b: &MultiIndexNeg) -> Result<u8> {
    Ok((position_in(b, big_b)? % 2) as u8)
}

/// `B − {b}`: removes the entry `b`, keeping the order of the rest.
pub fn remove_entry(big_b: &MultiIndexNeg, b: u16) -> Result<MultiIndexNeg> {
    let pos = position_in(b, big_b)? - 1;
    let mut v = big_b.entries().to_vec();
    v.remove(pos);
    Ok(MultiIndexNeg::Seq(v))
}

/// `|Z|₂`.
pub fn len_mod2(z: &MultiIndexNeg) -> u8 {
    (z.len() % 2) as u8
}

/// `φ(Q,B) = Σ_k i_k φ_k(b_{c_k}) (mod 2)` where `φ_k` alternates between `p`
/// and `q` starting with `p`, `q_entries` are the entries `i_k` of `Q` and
/// `chosen` the selected elements `b_{c_k}` of `B`. The factor `i_k` is the
/// parity of the coordinate `x^{i_k}` (1 for negative entries), the reading
/// pinned by the explicit second-order reduction identities.
pub fn phi(q_entries: &[i32], chosen: &[u16], big_b: &MultiIndexNeg) -> Result<u8> {
    if q_entries.len() != chosen.len() {
        return Err(CasError::ArgumentError(
            "φ needs one chosen element of B per entry of Q".into(),
        ));
    }
    let mut acc = 0u32;
    for (k, (i_k, b_k)) in q_entries.iter().zip(chosen).enumerate() {
        let f = if (k + 1) % 2 == 1 {
            p_of(*b_k, big_b)?
        } else {
            q_of(*b_k, big_b)?
        };
        let index_parity = if *i_k < 0 { 1 } else { 0 };
        acc += index_parity * f as u32;
    }
    Ok((acc % 2) as u8)
}

/// `ε(j,A)`: the reordering sign of `{-j} ⋆ A` into canonical order, `0` when
/// `-j` occurs in `A`. This is the unique coefficient making the contact
/// forms vanish on all jet extensions.
pub fn epsilon(j: u16, a: &MultiIndexNeg) -> i8 {
    match a {
        MultiIndexNeg::Null => 0,
        MultiIndexNeg::Seq(v) => {
            if v.contains(&j) {
                0
            } else {
                // Prepending j and sorting moves it past every smaller entry.
                let smaller = v.iter().filter(|&&e| e < j).count();
                if smaller % 2 == 0 {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

/// Canonical signed jet coordinate `y^μ_{I,A}`: `None` when the coordinate
/// vanishes (repeated odd entries), otherwise the sign and the canonical id.
pub fn jet_coord(mu: i16, pos: MultiIndexPos, neg: &MultiIndexNeg) -> Option<(i8, CoordId)> {
    let (canon, sign) = reorder_sign(neg);
    match canon {
        MultiIndexNeg::Null => None,
        MultiIndexNeg::Seq(v) => Some((
            sign,
            CoordId::Jet { mu, pos, neg: v },
        )),
    }
}

/// The signed coordinate `y^μ_{{α}⋆Q}` for a base coordinate `α` prepended to
/// the (canonical) index pair of an existing jet coordinate `q`.
pub fn lift_coord(alpha: &CoordId, q: &CoordId) -> Option<(i8, CoordId)> {
    let (mu, pos, neg) = match q {
        CoordId::Jet { mu, pos, neg } => (*mu, pos.clone(), neg.clone()),
        _ => return None,
    };
    match alpha {
        CoordId::BaseEven(i) => Some((1, CoordId::Jet { mu, pos: pos.push(*i), neg })),
        CoordId::BaseOdd(j) => {
            let mut entries = vec![*j];
            entries.extend_from_slice(&neg);
            jet_coord(mu, pos, &MultiIndexNeg::Seq(entries))
        }
        _ => None,
    }
}

/// Total (horizontal) derivative `d f / dx^α` along a base coordinate; the
/// result lives one jet order higher (promotion is implicit).
pub fn total_derivative(alpha: &CoordId, f: &SuperExpr) -> SuperExpr {
    assert!(alpha.is_base(), "total derivative direction must be a base coordinate");
    let mut out = f.partial(alpha);
    for c in f.coords() {
        if let CoordId::Jet { .. } = c {
            if let Some((sign, lifted)) = lift_coord(alpha, &c) {
                let term = SuperExpr::coord(lifted)
                    .scale_int(sign as i64)
                    .mul(&f.partial(&c));
                out = out.add(&term);
            }
        }
    }
    out
}

/// `d^{|B|} f / dx^B`: the composition of odd total derivatives named by the
/// entries of `B` left to right (rightmost entry applied first). The empty
/// index is the identity; the annihilator `∅` gives 0.
pub fn iterated_odd_derivative(b: &MultiIndexNeg, f: &SuperExpr) -> SuperExpr {
    match b {
        MultiIndexNeg::Null => SuperExpr::zero(),
        MultiIndexNeg::Seq(v) => {
            let mut out = f.clone();
            for j in v.iter().rev() {
                out = total_derivative(&CoordId::BaseOdd(*j), &out);
            }
            out
        }
    }
}

/// The horizontal lift of `∂/∂x^α` materialized as a vector field with jet
/// components up to the given order.
pub fn total_derivative_field(ctx: &JetContext, alpha: &CoordId, order: usize) -> VectorField {
    let mut comps = BTreeMap::new();
    comps.insert(alpha.clone(), SuperExpr::one());
    for q in ctx.jet_coords_up_to(order) {
        if let Some((sign, lifted)) = lift_coord(alpha, &q) {
            comps.insert(q, SuperExpr::coord(lifted).scale_int(sign as i64));
        }
    }
    VectorField::new(comps)
}

/// Graded vector field, stored by its components `X(c)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VectorField {
    components: BTreeMap<CoordId, SuperExpr>,
}

impl VectorField {
    pub fn new(components: BTreeMap<CoordId, SuperExpr>) -> Self {
        let components = components.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        VectorField { components }
    }

    pub fn zero() -> Self {
        VectorField::default()
    }

    /// The coordinate field `∂/∂c`.
    pub fn basis(c: CoordId) -> Self {
        let mut m = BTreeMap::new();
        m.insert(c, SuperExpr::one());
        VectorField::new(m)
    }

    pub fn components(&self) -> &BTreeMap<CoordId, SuperExpr> {
        &self.components
    }

    pub fn component(&self, c: &CoordId) -> SuperExpr {
        self.components.get(c).cloned().unwrap_or_else(SuperExpr::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        let mut comps = self.components.clone();
        for (c, v) in &other.components {
            let entry = comps.entry(c.clone()).or_insert_with(SuperExpr::zero);
            *entry = entry.add(v);
        }
        VectorField::new(comps)
    }

    pub fn scale_fn_left(&self, f: &SuperExpr) -> VectorField {
        let comps = self
            .components
            .iter()
            .map(|(c, v)| (c.clone(), f.mul(v)))
            .collect();
        VectorField::new(comps)
    }

    /// Declared parity when homogeneous: the common value of
    /// `|X(c)| + |c|` over all components.
    pub fn parity(&self) -> Option<Parity> {
        let mut result: Option<Parity> = None;
        for (c, v) in &self.components {
            let vp = v.parity_of()?;
            let xp = vp.combine(c.parity());
            match result {
                None => result = Some(xp),
                Some(p) if p == xp => {}
                _ => return None,
            }
        }
        result.or(Some(Parity::Even))
    }

    /// Splits into homogeneous fields (at most one per parity).
    pub fn homogeneous_parts(&self) -> Vec<(Parity, VectorField)> {
        let mut even = BTreeMap::new();
        let mut odd = BTreeMap::new();
        for (c, v) in &self.components {
            // X^c of parity p contributes |X| = p + |c|.
            let (ve, vo) = v.parity_split();
            let even_part = if c.parity().is_odd() { vo.clone() } else { ve.clone() };
            let odd_part = if c.parity().is_odd() { ve } else { vo };
            if !even_part.is_zero() {
                even.insert(c.clone(), even_part);
            }
            if !odd_part.is_zero() {
                odd.insert(c.clone(), odd_part);
            }
        }
        let mut out = Vec::new();
        if !even.is_empty() {
            out.push((Parity::Even, VectorField::new(even)));
        }
        if !odd.is_empty() {
            out.push((Parity::Odd, VectorField::new(odd)));
        }
        out
    }

    /// Applies the derivation: `X(f) = Σ_c X(c) · ∂f/∂c`.
    pub fn apply(&self, f: &SuperExpr) -> SuperExpr {
        let mut out = SuperExpr::zero();
        for (c, v) in &self.components {
            out = out.add(&v.mul(&f.partial(c)));
        }
        out
    }

    /// Components only on base coordinates, and those depending only on base
    /// coordinates.
    pub fn is_projectable(&self) -> bool {
        self.components.iter().all(|(c, v)| {
            if c.is_base() {
                v.coords().iter().all(|d| d.is_base())
            } else {
                true
            }
        })
    }

    /// Keeps only components on coordinates of the total space `(N,B)`
    /// (base and fiber); a field there has no jet components.
    pub fn is_field_on_total_space(&self) -> bool {
        self.components.keys().all(|c| c.jet_order() == 0)
    }

    pub fn is_vertical(&self) -> bool {
        self.components.keys().all(|c| !c.is_base())
    }

    /// The projection onto the base: base components only.
    pub fn base_projection(&self) -> VectorField {
        let comps = self
            .components
            .iter()
            .filter(|(c, _)| c.is_base())
            .map(|(c, v)| (c.clone(), v.clone()))
            .collect();
        VectorField::new(comps)
    }
}

/// Graded commutator `[X,Y] = X∘Y − (−1)^{|X||Y|} Y∘X` of homogeneous fields.
pub fn graded_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    let px = x
        .parity()
        .ok_or_else(|| CasError::ArgumentError("bracket needs homogeneous fields".into()))?;
    let py = y
        .parity()
        .ok_or_else(|| CasError::ArgumentError("bracket needs homogeneous fields".into()))?;
    let sign = px.koszul_sign(py);
    let mut coords: BTreeSet<CoordId> = x.components.keys().cloned().collect();
    coords.extend(y.components.keys().cloned());
    let mut comps = BTreeMap::new();
    for c in coords {
        let v = x
            .apply(&y.component(&c))
            .sub(&y.apply(&x.component(&c)).scale_int(sign as i64));
        comps.insert(c, v);
    }
    Ok(VectorField::new(comps))
}

/// Polynomial section of the submersion: one component per fiber index, in
/// base coordinates only, matching the parity of `y^μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    components: BTreeMap<i16, SuperExpr>,
}

impl Section {
    pub fn new(ctx: &JetContext, components: BTreeMap<i16, SuperExpr>) -> Result<Self> {
        for (mu, v) in &components {
            ctx.check_coord(&CoordId::fiber(*mu))?;
            if v.coords().iter().any(|c| !c.is_base()) {
                return Err(CasError::Precondition(format!(
                    "section component for y^{mu} must use base coordinates only"
                )));
            }
            if !v.is_zero() && v.parity_of() != Some(CoordId::fiber(*mu).parity()) {
                return Err(CasError::ParityViolation(format!(
                    "section component for y^{mu} must have the parity of y^{mu}"
                )));
            }
        }
        Ok(Section { components })
    }

    pub fn component(&self, mu: i16) -> SuperExpr {
        self.components.get(&mu).cloned().unwrap_or_else(SuperExpr::zero)
    }

    /// `(j^k σ)^* y^μ_{IA}`: the iterated partial of the component, with the
    /// rightmost odd entry acting first and even partials applied after.
    pub fn jet_value(&self, c: &CoordId) -> SuperExpr {
        match c {
            CoordId::BaseEven(_) | CoordId::BaseOdd(_) => SuperExpr::coord(c.clone()),
            CoordId::Jet { mu, pos, neg } => {
                let mut v = self.component(*mu);
                for j in neg.iter().rev() {
                    v = v.partial(&CoordId::BaseOdd(*j));
                }
                for i in pos.entries() {
                    v = v.partial(&CoordId::BaseEven(*i));
                }
                v
            }
        }
    }

    /// The full jet extension table up to the given order.
    pub fn jet_extension(&self, ctx: &JetContext, order: usize) -> BTreeMap<CoordId, SuperExpr> {
        ctx.jet_coords_up_to(order)
            .into_iter()
            .map(|c| {
                let v = self.jet_value(&c);
                (c, v)
            })
            .collect()
    }
}

/// Pullback of a superfunction along the jet extension of a section:
/// substitutes every fiber/jet coordinate by the corresponding derivative of
/// the section component.
pub fn pullback_expr(s: &Section, f: &SuperExpr) -> SuperExpr {
    let mut map = BTreeMap::new();
    for c in f.coords() {
        if let CoordId::Jet { .. } = c {
            let v = s.jet_value(&c);
            map.insert(c, v);
        }
    }
    f.substitute(&map).expect("jet values keep coordinate parity")
}

/// Contact form generator `θ^μ_{IA}`, defined for `|I|+|A| ≤ k−1`.
pub fn contact_form(
    ctx: &JetContext,
    mu: i16,
    pos: &MultiIndexPos,
    neg: &MultiIndexNeg,
) -> Result<GradedForm> {
    let (sign, c) = jet_coord(mu, pos.clone(), neg).ok_or_else(|| {
        CasError::ArgumentError("contact form of an annihilated jet coordinate".into())
    })?;
    if sign != 1 {
        return Err(CasError::ArgumentError(
            "contact form index must be in canonical order".into(),
        ));
    }
    ctx.check_coord(&c)?;
    if c.jet_order() + 1 > ctx.k as usize {
        return Err(CasError::ArgumentError(format!(
            "contact form θ for order |I|+|A| = {} needs a context of order ≥ {}",
            c.jet_order(),
            c.jet_order() + 1
        )));
    }
    Ok(contact_form_unchecked(ctx, &c))
}

/// `θ^μ_Q = dᴳy^μ_Q − Σ_α dᴳx^α · y^μ_{{α}⋆Q}` with the ε-sign folded into
/// the canonical lifted coordinate.
pub fn contact_form_unchecked(ctx: &JetContext, c: &CoordId) -> GradedForm {
    let mut form = GradedForm::basis_diff(c.clone());
    for alpha in ctx.base_coords() {
        if let Some((sign, lifted)) = lift_coord(&alpha, c) {
            let coeff = SuperExpr::coord(lifted).scale_int(-(sign as i64));
            form = form.add(&GradedForm::from_word_coeff(vec![alpha], coeff));
        }
    }
    form
}

/// Pullback of a graded form along the jet extension of a section: jet
/// differentials become differentials of the substituted expressions.
pub fn pullback_form(s: &Section, omega: &GradedForm) -> GradedForm {
    let mut out = GradedForm::zero();
    for (word, coeff) in omega.terms() {
        let mut acc = GradedForm::one();
        for c in word {
            let factor = match c {
                CoordId::BaseEven(_) | CoordId::BaseOdd(_) => GradedForm::basis_diff(c.clone()),
                CoordId::Jet { .. } => {
                    // dᴳ of the pulled-back coordinate expression.
                    GradedForm::from_function(s.jet_value(c)).d_graded()
                }
            };
            acc = acc.wedge(&factor);
            if acc.is_zero() {
                break;
            }
        }
        out = out.add(&acc.mul_fn_right(&pullback_expr(s, coeff)));
    }
    out
}

/// A fibred change of chart: barred base coordinates as functions of the base,
/// barred fiber coordinates as functions of base and fiber, plus the inverse
/// base substitution.
#[derive(Debug, Clone)]
pub struct ChartTransform {
    /// `x̄^β` in unbarred coordinates, keyed by the base slot `β`.
    pub base: BTreeMap<CoordId, SuperExpr>,
    /// `ȳ^ν` in unbarred coordinates, keyed by ν.
    pub fiber: BTreeMap<i16, SuperExpr>,
    /// `x^α` in barred coordinates (same id space), keyed by α.
    pub inverse_base: BTreeMap<CoordId, SuperExpr>,
}

/// Expresses the barred first-order jet coordinates through the unbarred ones.
/// Returns the full substitution map for `J¹`: barred base, fiber and `ȳ^ν_β`.
pub fn transform_jet1(ctx: &JetContext, tr: &ChartTransform) -> Result<BTreeMap<CoordId, SuperExpr>> {
    // Fibred change: barred base must only involve base coordinates.
    for (beta, v) in &tr.base {
        if !beta.is_base() {
            return Err(CasError::ArgumentError("base map must be keyed by base slots".into()));
        }
        if v.coords().iter().any(|c| !c.is_base()) {
            return Err(CasError::ArgumentError(
                "non-fibred change: barred base depends on fiber coordinates".into(),
            ));
        }
        if !v.is_zero() && v.parity_of() != Some(beta.parity()) {
            return Err(CasError::ParityViolation(format!("base map for {beta} has wrong parity")));
        }
    }
    for (nu, v) in &tr.fiber {
        if v.coords().iter().any(|c| c.jet_order() > 0) {
            return Err(CasError::ArgumentError(
                "fiber map must not involve jet coordinates".into(),
            ));
        }
        if !v.is_zero() && v.parity_of() != Some(CoordId::fiber(*nu).parity()) {
            return Err(CasError::ParityViolation(format!("fiber map for ȳ^{nu} has wrong parity")));
        }
    }
    // The supplied inverse must invert the base change.
    for (alpha, inv) in &tr.inverse_base {
        let roundtrip = inv.substitute(&tr.base)?;
        if roundtrip != SuperExpr::coord(alpha.clone()) {
            return Err(CasError::ArgumentError(format!(
                "inverse_base does not invert the base change on {alpha}"
            )));
        }
    }

    let mut subst: BTreeMap<CoordId, SuperExpr> = tr.base.clone();
    for (nu, v) in &tr.fiber {
        subst.insert(CoordId::fiber(*nu), v.clone());
    }

    // ∂x^α/∂x̄^β expressed back in unbarred coordinates.
    let mut inv_jacobian: BTreeMap<(CoordId, CoordId), SuperExpr> = BTreeMap::new();
    for alpha in ctx.base_coords() {
        let inv_alpha = tr
            .inverse_base
            .get(&alpha)
            .ok_or_else(|| CasError::ArgumentError(format!("missing inverse for {alpha}")))?;
        for beta in ctx.base_coords() {
            let d = inv_alpha.partial(&beta).substitute(&tr.base)?;
            inv_jacobian.insert((alpha.clone(), beta.clone()), d);
        }
    }

    // ȳ^ν_β = Σ_α (∂x^α/∂x̄^β)·∂ȳ^ν/∂x^α
    //       + Σ_{α,μ} (∂x^α/∂x̄^β)·y^μ_α·∂ȳ^ν/∂y^μ.
    // With left partials and the factors multiplied in exactly this order the
    // commutation signs take care of themselves; covariance along arbitrary
    // sections is what pins the arrangement (and is tested).
    for nu in ctx.fiber_mus() {
        let ybar = tr
            .fiber
            .get(&nu)
            .ok_or_else(|| CasError::ArgumentError(format!("missing fiber map for ȳ^{nu}")))?;
        for beta in ctx.base_coords() {
            let mut val = SuperExpr::zero();
            for alpha in ctx.base_coords() {
                let jac = &inv_jacobian[&(alpha.clone(), beta.clone())];
                if jac.is_zero() {
                    continue;
                }
                val = val.add(&jac.mul(&ybar.partial(&alpha)));
                for mu in ctx.fiber_mus() {
                    let term = jac
                        .mul(&SuperExpr::coord(CoordId::jet1(mu, &alpha)))
                        .mul(&ybar.partial(&CoordId::fiber(mu)));
                    val = val.add(&term);
                }
            }
            subst.insert(CoordId::jet1(nu, &beta), val);
        }
    }
    Ok(subst)
}

/// Composes two substitutions: applies `second` to the values of `first`.
pub fn compose_subst(
    first: &BTreeMap<CoordId, SuperExpr>,
    second: &BTreeMap<CoordId, SuperExpr>,
) -> Result<BTreeMap<CoordId, SuperExpr>> {
    first
        .iter()
        .map(|(c, v)| Ok((c.clone(), v.substitute(second)?)))
        .collect()
}

/// The unique order-`k` infinitesimal contact transformation projecting onto
/// the projectable field `X` on the total space.
///
/// The jet components follow the recursion
/// `X_k(y^μ_{{β}⋆Q}) = s(|X|,|β|) · [ d(X_k(y^μ_Q))/dx^β − Σ_α ∂X(x^α)/∂x^β · y^μ_{{α}⋆Q} ]`,
/// where the sign table `s` is not hard-coded: it is determined at
/// construction by requiring `L^G_{X_k} θ^μ_Q` to lie in the contact module,
/// which is also re-verified symbolically for the returned field.
pub fn prolong(ctx: &JetContext, x: &VectorField, k: usize) -> Result<VectorField> {
    if !x.is_field_on_total_space() {
        return Err(CasError::ArgumentError(
            "prolong expects a field on the total space (no jet components)".into(),
        ));
    }
    if !x.is_projectable() {
        return Err(CasError::ArgumentError("prolong expects a projectable field".into()));
    }
    let mut out = VectorField::zero();
    for (parity, part) in x.homogeneous_parts() {
        out = out.add(&prolong_homogeneous(ctx, &part, parity, k)?);
    }
    Ok(out)
}

fn prolong_homogeneous(
    ctx: &JetContext,
    x: &VectorField,
    _parity: Parity,
    k: usize,
) -> Result<VectorField> {
    let sign_tables: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
    let mut last_err = None;
    for (s_even, s_odd) in sign_tables {
        let candidate = build_prolongation(ctx, x, k, s_even, s_odd);
        if prolongation_preserves_contact(ctx, &candidate, k) {
            return Ok(candidate);
        }
        last_err = Some(CasError::ArgumentError(
            "no sign table yields a contact-preserving prolongation".into(),
        ));
    }
    Err(last_err.unwrap())
}

fn build_prolongation(
    ctx: &JetContext,
    x: &VectorField,
    k: usize,
    s_even: i8,
    s_odd: i8,
) -> VectorField {
    let mut comps: BTreeMap<CoordId, SuperExpr> = x.components().clone();
    let zero = SuperExpr::zero();
    for order in 1..=k {
        for c in ctx.jet_coords_up_to(order) {
            if c.jet_order() != order || comps.contains_key(&c) {
                continue;
            }
            let (mu, pos, neg) = match &c {
                CoordId::Jet { mu, pos, neg } => (*mu, pos.clone(), neg.clone()),
                _ => unreachable!(),
            };
            // Split off one direction β with {β}⋆Q = c at sign +1.
            let (beta, q) = if let Some(&i) = pos.entries().last() {
                (
                    CoordId::BaseEven(i),
                    CoordId::Jet {
                        mu,
                        pos: pos.remove_one(i).unwrap(),
                        neg: neg.clone(),
                    },
                )
            } else {
                let j = neg[0];
                (
                    CoordId::BaseOdd(j),
                    CoordId::Jet {
                        mu,
                        pos: pos.clone(),
                        neg: neg[1..].to_vec(),
                    },
                )
            };
            let s = if beta.parity().is_odd() { s_odd } else { s_even };
            let c_q = comps.get(&q).unwrap_or(&zero);
            let mut val = total_derivative(&beta, c_q);
            for alpha in ctx.base_coords() {
                let a_comp = x.component(&alpha);
                if a_comp.is_zero() {
                    continue;
                }
                if let Some((sign, lifted)) = lift_coord(&alpha, &q) {
                    let term = a_comp
                        .partial(&beta)
                        .mul(&SuperExpr::coord(lifted))
                        .scale_int(sign as i64);
                    val = val.sub(&term);
                }
            }
            comps.insert(c, val.scale_int(s as i64));
        }
    }
    VectorField::new(comps)
}

/// Symbolic check that `L^G_X θ^μ_Q` stays in the contact module for every
/// generator of order `|Q| ≤ k−1`.
pub fn prolongation_preserves_contact(ctx: &JetContext, x: &VectorField, k: usize) -> bool {
    if k == 0 {
        return true;
    }
    for q in ctx.jet_coords_up_to(k - 1) {
        let theta = contact_form_unchecked(ctx, &q);
        let lied = theta.lie_derive(x);
        if !crate::gforms::is_contact_1form(ctx, &lied) {
            return false;
        }
    }
    true
}
