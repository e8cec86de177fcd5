//! Graded differential forms on jet spaces.
//!
//! A form is a sum of terms `dᴳc₁ ∧ … ∧ dᴳc_p · f` with the coefficient on
//! the right (right-module convention) and the wedge word canonically sorted.
//! Each basis differential `dᴳc` carries the bidegree `(1, |c|)`, and two
//! objects of bidegrees `(p₁,a₁)`, `(p₂,a₂)` commute with the sign
//! `(−1)^{p₁p₂ + a₁a₂}`. Consequently differentials of even coordinates
//! anticommute and square to zero, while differentials of odd coordinates
//! commute and may repeat inside a word.
//!
//! The three Cartan operators are the exterior differential `dᴳ` (bidegree
//! `(1,0)`), the insertion `ι_X` (bidegree `(−1,|X|)`) and the Lie derivative
//! `L^G_X = ι_X ∘ dᴳ + dᴳ ∘ ι_X`.

use std::collections::BTreeMap;

use crate::jetcoords::{total_derivative_field, JetContext, VectorField};
use crate::superalg::{CoordId, Parity, Rational, SuperExpr};
use crate::{CasError, Result};

/// Sign for commuting the basis differentials `dᴳa` and `dᴳb`.
fn swap_sign(a: &CoordId, b: &CoordId) -> i8 {
    if a.parity().is_odd() && b.parity().is_odd() {
        1
    } else {
        -1
    }
}

/// Canonically sorts a wedge word; `None` when it vanishes (a repeated
/// differential of an even coordinate).
fn sort_word(mut word: Vec<CoordId>) -> Option<(Vec<CoordId>, i8)> {
    let mut sign = 1i8;
    for i in 1..word.len() {
        let mut j = i;
        while j > 0 && word[j - 1] > word[j] {
            sign *= swap_sign(&word[j - 1], &word[j]);
            word.swap(j - 1, j);
            j -= 1;
        }
    }
    for w in word.windows(2) {
        if w[0] == w[1] && w[0].parity() == Parity::Even {
            return None;
        }
    }
    Some((word, sign))
}

/// Z₂ parity of a wedge word (sum of coordinate parities).
fn word_parity(word: &[CoordId]) -> Parity {
    Parity::from_odd(word.iter().filter(|c| c.parity().is_odd()).count() % 2 == 1)
}

/// Graded differential form in canonical normal form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradedForm {
    terms: BTreeMap<Vec<CoordId>, SuperExpr>,
}

impl GradedForm {
    pub fn zero() -> Self {
        GradedForm::default()
    }

    /// The constant 0-form `1`.
    pub fn one() -> Self {
        GradedForm::from_function(SuperExpr::one())
    }

    /// A superfunction as a 0-form.
    pub fn from_function(f: SuperExpr) -> Self {
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(Vec::new(), f);
        }
        GradedForm { terms }
    }

    /// The basis differential `dᴳc`.
    pub fn basis_diff(c: CoordId) -> Self {
        GradedForm::from_word_coeff(vec![c], SuperExpr::one())
    }

    /// `dᴳc₁ ∧ … ∧ dᴳc_p · f` (the word is canonicalized).
    pub fn from_word_coeff(word: Vec<CoordId>, coeff: SuperExpr) -> Self {
        let mut out = GradedForm::zero();
        out.insert_term(word, coeff);
        out
    }

    fn insert_term(&mut self, word: Vec<CoordId>, coeff: SuperExpr) {
        if coeff.is_zero() {
            return;
        }
        let Some((word, sign)) = sort_word(word) else {
            return;
        };
        let coeff = if sign < 0 { coeff.neg() } else { coeff };
        use std::collections::btree_map::Entry;
        match self.terms.entry(word) {
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

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<CoordId>, &SuperExpr)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the empty word.
    pub fn scalar_part(&self) -> SuperExpr {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(SuperExpr::zero)
    }

    /// Coefficient of a given canonical word.
    pub fn word_coeff(&self, word: &[CoordId]) -> SuperExpr {
        self.terms.get(word).cloned().unwrap_or_else(SuperExpr::zero)
    }

    pub fn add(&self, other: &GradedForm) -> GradedForm {
        let mut out = self.clone();
        for (w, f) in &other.terms {
            out.insert_term(w.clone(), f.clone());
        }
        out
    }

    pub fn sub(&self, other: &GradedForm) -> GradedForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GradedForm {
        let terms = self.terms.iter().map(|(w, f)| (w.clone(), f.neg())).collect();
        GradedForm { terms }
    }

    pub fn scale(&self, q: &Rational) -> GradedForm {
        let mut out = GradedForm::zero();
        for (w, f) in &self.terms {
            out.insert_term(w.clone(), f.scale(q));
        }
        out
    }

    pub fn scale_int(&self, k: i64) -> GradedForm {
        let mut out = GradedForm::zero();
        for (w, f) in &self.terms {
            out.insert_term(w.clone(), f.scale_int(k));
        }
        out
    }

    /// Wedge product. Bilinear, associative; coefficients are carried on the
    /// right, so `(w₁·f₁) ∧ (w₂·f₂) = (−1)^{|f₁| a(w₂)} (w₁∧w₂)·(f₁f₂)` for
    /// homogeneous `f₁`.
    pub fn wedge(&self, other: &GradedForm) -> GradedForm {
        let mut out = GradedForm::zero();
        for (w1, f1) in &self.terms {
            for (w2, f2) in &other.terms {
                let a2 = word_parity(w2);
                for p in [Parity::Even, Parity::Odd] {
                    let f1p = f1.parity_part(p);
                    if f1p.is_zero() {
                        continue;
                    }
                    let sign = if p.is_odd() && a2.is_odd() { -1 } else { 1 };
                    let mut word = w1.clone();
                    word.extend_from_slice(w2);
                    out.insert_term(word, f1p.mul(f2).scale_int(sign));
                }
            }
        }
        out
    }

    /// Right multiplication by a superfunction: `ω · f`.
    pub fn mul_fn_right(&self, f: &SuperExpr) -> GradedForm {
        let mut out = GradedForm::zero();
        for (w, g) in &self.terms {
            out.insert_term(w.clone(), g.mul(f));
        }
        out
    }

    /// Left multiplication by a superfunction: `f · ω`.
    pub fn mul_fn_left(&self, f: &SuperExpr) -> GradedForm {
        GradedForm::from_function(f.clone()).wedge(self)
    }

    /// Graded exterior differential; `dᴳ ∘ dᴳ = 0`.
    pub fn d_graded(&self) -> GradedForm {
        let mut out = GradedForm::zero();
        for (w, f) in &self.terms {
            let sign = if w.len() % 2 == 1 { -1 } else { 1 };
            for c in f.coords() {
                let df = f.partial(&c);
                if df.is_zero() {
                    continue;
                }
                let mut word = w.clone();
                word.push(c.clone());
                out.insert_term(word, df.scale_int(sign));
            }
        }
        out
    }

    /// Insertion (interior product) of a graded vector field: a graded
    /// antiderivation of bidegree `(−1, |X|)`.
    pub fn insert(&self, x: &VectorField) -> GradedForm {
        let mut out = GradedForm::zero();
        for (px, part) in x.homogeneous_parts() {
            out = out.add(&self.insert_homogeneous(&part, px));
        }
        out
    }

    fn insert_homogeneous(&self, x: &VectorField, px: Parity) -> GradedForm {
        let mut out = GradedForm::zero();
        for (w, f) in &self.terms {
            let mut prefix_sign = 1i8;
            for (j, c) in w.iter().enumerate() {
                let xc = x.component(c);
                if !xc.is_zero() {
                    // X(c_j) has parity |X| + |c_j|; commute it past the word tail.
                    let pxc = px.combine(c.parity());
                    let tail = word_parity(&w[j + 1..]);
                    let move_sign = if pxc.is_odd() && tail.is_odd() { -1 } else { 1 };
                    let mut word = w[..j].to_vec();
                    word.extend_from_slice(&w[j + 1..]);
                    out.insert_term(word, xc.mul(f).scale_int(prefix_sign as i64 * move_sign as i64));
                }
                // Crossing dᴳc_j costs (−1)^{1 + |X||c_j|}.
                if !(px.is_odd() && c.parity().is_odd()) {
                    prefix_sign = -prefix_sign;
                }
            }
        }
        out
    }

    /// Graded Lie derivative through the Cartan formula
    /// `L^G_X = ι_X ∘ dᴳ + dᴳ ∘ ι_X`.
    pub fn lie_derive(&self, x: &VectorField) -> GradedForm {
        self.d_graded().insert(x).add(&self.insert(x).d_graded())
    }

    /// Evaluation on vector fields: the scalar part of
    /// `ι_{D_p} ∘ … ∘ ι_{D_1} ω`.
    pub fn evaluate(&self, fields: &[VectorField]) -> SuperExpr {
        let mut acc = self.clone();
        for d in fields {
            acc = acc.insert(d);
        }
        acc.scalar_part()
    }

    /// Highest jet order of any coordinate in words or coefficients.
    pub fn max_jet_order(&self) -> usize {
        let mut ord = 0;
        for (w, f) in &self.terms {
            for c in w {
                ord = ord.max(c.jet_order());
            }
            ord = ord.max(f.max_jet_order());
        }
        ord
    }

    /// Form degrees present, lowest to highest.
    pub fn degrees(&self) -> Vec<usize> {
        let mut ds: Vec<usize> = self.terms.keys().map(|w| w.len()).collect();
        ds.dedup();
        ds
    }

    /// Maximal numbers of base-differential and jet-differential slots over
    /// the wedge words. Vertical fields only pair with jet differentials, so
    /// a form vanishes when fed more vertical arguments than its jet slot
    /// count. (The horizontal count is basis bookkeeping only: a jet
    /// differential still absorbs horizontal arguments through its contact
    /// expansion.)
    pub fn max_horizontal_vertical(&self) -> (usize, usize) {
        let mut h = 0;
        let mut v = 0;
        for w in self.terms.keys() {
            let hw = w.iter().filter(|c| c.is_base()).count();
            h = h.max(hw);
            v = v.max(w.len() - hw);
        }
        (h, v)
    }
}

/// The graded volume `η^G = dᴳx¹ ∧ … ∧ dᴳx^m`.
pub fn eta_g(ctx: &JetContext) -> GradedForm {
    GradedForm::from_word_coeff(ctx.base_evens(), SuperExpr::one())
}

/// `ι_{∂/∂xⁱ} η^G = (−1)^{i−1} dᴳx¹ ∧ … ∧ d̂ᴳxⁱ ∧ … ∧ dᴳx^m`.
pub fn hat_volume(ctx: &JetContext, i: u16) -> GradedForm {
    eta_g(ctx).insert(&VectorField::basis(CoordId::BaseEven(i)))
}

/// Horizontal differential `D ω = Σ_α dᴳx^α ∧ L^G_{d/dx^α} ω`.
pub fn horizontal_diff(ctx: &JetContext, omega: &GradedForm) -> GradedForm {
    diff_along(ctx, omega, &ctx.base_coords())
}

/// `D₀`: the part of `D` along the even base directions.
pub fn horizontal_diff_even(ctx: &JetContext, omega: &GradedForm) -> GradedForm {
    diff_along(ctx, omega, &ctx.base_evens())
}

/// `D₁ = D − D₀`: the part of `D` along the odd base directions.
pub fn horizontal_diff_odd(ctx: &JetContext, omega: &GradedForm) -> GradedForm {
    diff_along(ctx, omega, &ctx.base_odds())
}

fn diff_along(ctx: &JetContext, omega: &GradedForm, dirs: &[CoordId]) -> GradedForm {
    let ord = omega.max_jet_order();
    let mut out = GradedForm::zero();
    for alpha in dirs {
        let lift = total_derivative_field(ctx, alpha, ord);
        let lied = omega.lie_derive(&lift);
        out = out.add(&GradedForm::basis_diff(alpha.clone()).wedge(&lied));
    }
    out
}

/// Vertical differential `∂ = dᴳ − D`, the convention-free definition.
pub fn vertical_diff(ctx: &JetContext, omega: &GradedForm) -> GradedForm {
    omega.d_graded().sub(&horizontal_diff(ctx, omega))
}

/// The `dᴳ = D + ∂` split together with the `D = D₀ + D₁` refinement.
pub struct SplitParts {
    pub horizontal: GradedForm,
    pub vertical: GradedForm,
    pub d0: GradedForm,
    pub d1: GradedForm,
}

pub fn split_horizontal_vertical(ctx: &JetContext, omega: &GradedForm) -> SplitParts {
    let horizontal = horizontal_diff(ctx, omega);
    let vertical = omega.d_graded().sub(&horizontal);
    let d0 = horizontal_diff_even(ctx, omega);
    let d1 = horizontal.sub(&d0);
    SplitParts {
        horizontal,
        vertical,
        d0,
        d1,
    }
}

/// Closed-form vertical differential for forms of jet order ≤ 1:
/// `∂ = θ^μ ∧ L_{∂/∂y^μ} + θ^μ_α ∧ L_{∂/∂y^μ_α} − dᴳθ^μ ∧ ι_{∂/∂y^μ}
///  − dᴳθ^μ_β ∧ ι_{∂/∂y^μ_β}`.
pub fn vertical_diff_closed_form(ctx: &JetContext, omega: &GradedForm) -> Result<GradedForm> {
    if omega.max_jet_order() > 1 {
        return Err(CasError::Precondition(
            "closed-form vertical differential applies to forms of jet order ≤ 1".into(),
        ));
    }
    let mut out = GradedForm::zero();
    for mu in ctx.fiber_mus() {
        let mut gens = vec![CoordId::fiber(mu)];
        for alpha in ctx.base_coords() {
            gens.push(CoordId::jet1(mu, &alpha));
        }
        for c in gens {
            let theta = crate::jetcoords::contact_form_unchecked(ctx, &c);
            let field = VectorField::basis(c.clone());
            out = out.add(&theta.wedge(&omega.lie_derive(&field)));
            out = out.sub(&theta.d_graded().wedge(&omega.insert(&field)));
        }
    }
    Ok(out)
}

/// Residual horizontal coefficients of a 1-form after expanding every jet
/// differential through the contact generators: the coefficient of `dᴳx^α`
/// becomes `a_α + Σ_Q (signed y^μ_{{α}⋆Q}) · b_Q`. A 1-form lies in the
/// contact module iff every residual vanishes.
pub fn horizontal_residuals(ctx: &JetContext, omega: &GradedForm) -> BTreeMap<CoordId, SuperExpr> {
    let mut residuals: BTreeMap<CoordId, SuperExpr> = BTreeMap::new();
    let mut bump = |alpha: CoordId, v: SuperExpr| {
        let e = residuals.entry(alpha).or_insert_with(SuperExpr::zero);
        *e = e.add(&v);
    };
    for (w, b) in omega.terms() {
        assert!(w.len() == 1, "horizontal_residuals expects a 1-form");
        match &w[0] {
            c @ (CoordId::BaseEven(_) | CoordId::BaseOdd(_)) => bump(c.clone(), b.clone()),
            q @ CoordId::Jet { .. } => {
                for alpha in ctx.base_coords() {
                    if let Some((sign, lifted)) = crate::jetcoords::lift_coord(&alpha, q) {
                        bump(
                            alpha,
                            SuperExpr::coord(lifted).scale_int(sign as i64).mul(b),
                        );
                    }
                }
            }
        }
    }
    residuals
}

/// Whether a 1-form lies in the contact module.
pub fn is_contact_1form(ctx: &JetContext, omega: &GradedForm) -> bool {
    horizontal_residuals(ctx, omega).values().all(|v| v.is_zero())
}

/// Context-checked wedge: validates both forms against the chart first.
pub fn wedge(ctx: &JetContext, a: &GradedForm, b: &GradedForm) -> Result<GradedForm> {
    check_form(ctx, a)?;
    check_form(ctx, b)?;
    Ok(a.wedge(b))
}

pub fn check_form(ctx: &JetContext, omega: &GradedForm) -> Result<()> {
    for (w, f) in omega.terms() {
        for c in w {
            ctx.check_coord(c)?;
        }
        ctx.check_expr(f)?;
    }
    Ok(())
}
