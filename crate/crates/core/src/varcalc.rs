//! The variational core: the canonical vertical-valued `m`-forms on jet
//! spaces, Poincaré–Cartan forms by three routes, the decomposition of
//! `dᴳΘ^L`, the Euler–Lagrange operator, critical-section tests and Noether
//! supersymmetries with their conserved currents.

use std::collections::BTreeMap;

use crate::berezin::{div_berezin, div_graded, BerezinSection};
use crate::gforms::{eta_g, hat_volume, horizontal_diff_odd, vertical_diff, GradedForm};
use crate::jetcoords::{
    contact_form_unchecked, iterated_odd_derivative, prolong, pullback_expr, pullback_form,
    total_derivative, total_derivative_field, JetContext, Section, VectorField,
};
use crate::superalg::{CoordId, MultiIndexNeg, SuperExpr};
use crate::{CasError, Result};

/// A first-order Lagrangian superfunction on `J¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lagrangian {
    pub ctx: JetContext,
    pub expr: SuperExpr,
}

impl Lagrangian {
    pub fn new(ctx: &JetContext, expr: SuperExpr) -> Result<Self> {
        ctx.check_expr(&expr)?;
        if expr.max_jet_order() > 1 {
            return Err(CasError::Precondition(
                "a Lagrangian must contain only coordinates of order ≤ 1".into(),
            ));
        }
        Ok(Lagrangian {
            ctx: ctx.clone(),
            expr,
        })
    }

    /// The first-order Berezinian density `ξ_L` (k-order basis).
    pub fn berezin_density(&self) -> BerezinSection {
        BerezinSection::new(&self.ctx, self.expr.clone(), 1)
    }

    /// `d^n L / dx^{-1}…dx^{-n}`, the order-(n+1) Lagrangian of the
    /// associated graded problem.
    pub fn iterated_body(&self) -> SuperExpr {
        let t = MultiIndexNeg::from_entries((1..=self.ctx.n).collect());
        iterated_odd_derivative(&t, &self.expr)
    }
}

/// Euler–Lagrange expressions, one per fiber index.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerLagrangeResult {
    pub components: BTreeMap<i16, SuperExpr>,
}

impl EulerLagrangeResult {
    pub fn is_zero(&self) -> bool {
        self.components.values().all(|v| v.is_zero())
    }
}

/// The canonical vertical-valued `m`-form `𝒥ₖ`, stored through its local
/// expression: pairs of (form factor, target jet coordinate), meaning
/// `Σ ω_a ⊗ ∂/∂y^{target_a}`.
#[derive(Debug, Clone)]
pub struct VectorValuedForm {
    pub items: Vec<(GradedForm, CoordId)>,
}

/// `𝒥ₖ = (−1)^{m−1} ι_{∂/∂xⁱ} η^G ∧ θ^μ_Q ⊗ ∂/∂y^μ_{i+Q}` over
/// `1 ≤ i ≤ m`, `0 ≤ |Q| ≤ k−1`.
pub fn jk_tensor(ctx: &JetContext, k: usize) -> VectorValuedForm {
    let sign = if (ctx.m as usize + 1) % 2 == 0 { 1 } else { -1 };
    let mut items = Vec::new();
    for i in 1..=ctx.m {
        let hat = hat_volume(ctx, i).scale_int(sign);
        for q in ctx.jet_coords_up_to(k.saturating_sub(1)) {
            let theta = contact_form_unchecked(ctx, &q);
            let target = match &q {
                CoordId::Jet { mu, pos, neg } => CoordId::Jet {
                    mu: *mu,
                    pos: pos.push(i),
                    neg: neg.clone(),
                },
                _ => unreachable!(),
            };
            items.push((hat.wedge(&theta), target));
        }
    }
    VectorValuedForm { items }
}

/// `L^G_{𝒥ₖ}(F) = Σ ω_a · ∂F/∂y^{target_a}` — the Lie derivative of a
/// superfunction along the vector-valued form, i.e. `ι_{𝒥ₖ}(dᴳF)`.
pub fn jk_apply(ctx: &JetContext, k: usize, f: &SuperExpr) -> GradedForm {
    let jk = jk_tensor(ctx, k);
    let mut out = GradedForm::zero();
    for (omega, target) in &jk.items {
        let df = f.partial(target);
        if !df.is_zero() {
            out = out.add(&omega.mul_fn_right(&df));
        }
    }
    out
}

/// Evaluation of `𝒥₁` on `m` vector fields through the insertion formula:
/// `𝒥(D₁,…,D_m) = (−1)^{j+m} ι_{D_m}∘…∘ι̂_{D_j}∘…∘ι_{D_1}(dᴳx¹∧…∧dᴳx^m) ⊗ θ(D_j)`,
/// identified as a vertical field on `J¹` via `dᴳx^α ⊗ ∂/∂y^μ ↦ ∂/∂y^μ_α`.
pub fn jk1_evaluate_insertion(
    ctx: &JetContext,
    fields: &[VectorField],
) -> Result<VectorField> {
    let m = ctx.m as usize;
    if fields.len() != m {
        return Err(CasError::ArgumentError(format!(
            "𝒥 takes exactly m = {m} arguments"
        )));
    }
    let vol = eta_g(ctx);
    let mut comps: BTreeMap<CoordId, SuperExpr> = BTreeMap::new();
    for j in 0..m {
        // ι_{D_m} ∘ … ∘ ι̂_{D_j} ∘ … ∘ ι_{D_1}, innermost ι_{D_1}
        let mut one_form = vol.clone();
        for (l, d) in fields.iter().enumerate() {
            if l != j {
                one_form = one_form.insert(d);
            }
        }
        let sign = if (j + 1 + m) % 2 == 0 { 1 } else { -1 };
        for mu in ctx.fiber_mus() {
            let theta_mu = contact_form_unchecked(ctx, &CoordId::fiber(mu));
            let h = theta_mu.insert(&fields[j]).scalar_part();
            if h.is_zero() {
                continue;
            }
            for (word, g) in one_form.terms() {
                if word.len() != 1 {
                    continue;
                }
                let target = CoordId::jet1(mu, &word[0]);
                let entry = comps.entry(target).or_insert_with(SuperExpr::zero);
                *entry = entry.add(&g.mul(&h).scale_int(sign));
            }
        }
    }
    Ok(VectorField::new(comps))
}

/// Evaluation of the stored local expression of `𝒥ₖ` on `m` fields.
pub fn jk_evaluate_local(
    ctx: &JetContext,
    k: usize,
    fields: &[VectorField],
) -> Result<VectorField> {
    if fields.len() != ctx.m as usize {
        return Err(CasError::ArgumentError(format!(
            "𝒥ₖ takes exactly m = {} arguments",
            ctx.m
        )));
    }
    let jk = jk_tensor(ctx, k);
    let mut comps: BTreeMap<CoordId, SuperExpr> = BTreeMap::new();
    for (omega, target) in &jk.items {
        let v = omega.evaluate(fields);
        if !v.is_zero() {
            let entry = comps.entry(target.clone()).or_insert_with(SuperExpr::zero);
            *entry = entry.add(&v);
        }
    }
    Ok(VectorField::new(comps))
}

/// `Θ₀^L` by the explicit local formula:
/// `Σ (−1)^{m+i} dᴳx¹∧…∧d̂ᴳxⁱ∧…∧dᴳx^m ∧ θ^μ · ∂L/∂y^μ_i + η^G·L`.
pub fn pc_form_order1_local(lag: &Lagrangian) -> GradedForm {
    let ctx = &lag.ctx;
    let mut out = eta_g(ctx).mul_fn_right(&lag.expr);
    for i in 1..=ctx.m {
        let sign = if (ctx.m + i) % 2 == 0 { 1i64 } else { -1 };
        let mut hat_word = Vec::new();
        for l in 1..=ctx.m {
            if l != i {
                hat_word.push(CoordId::BaseEven(l));
            }
        }
        let hat = GradedForm::from_word_coeff(hat_word, SuperExpr::from_int(sign));
        for mu in ctx.fiber_mus() {
            let dl = lag.expr.partial(&CoordId::jet1(mu, &CoordId::BaseEven(i)));
            if dl.is_zero() {
                continue;
            }
            let theta = contact_form_unchecked(ctx, &CoordId::fiber(mu));
            out = out.add(&hat.wedge(&theta).mul_fn_right(&dl));
        }
    }
    out
}

/// `Θ₀^L = L^G_𝒥(L) + η^G·L`, the intrinsic route.
pub fn pc_form_order1_lie(lag: &Lagrangian) -> GradedForm {
    jk_apply(&lag.ctx, 1, &lag.expr).add(&eta_g(&lag.ctx).mul_fn_right(&lag.expr))
}

/// `Θ₀^L`; the local formula and the `L^G_𝒥` route agree (tested), the local
/// formula is used as primary.
pub fn pc_form_order1(lag: &Lagrangian) -> GradedForm {
    pc_form_order1_local(lag)
}

/// Iterated odd Lie derivative `L^G_{d/dx^{-1}} ∘ … ∘ L^G_{d/dx^{-n}}`
/// (rightmost factor acts first).
pub fn iterated_odd_lie(ctx: &JetContext, omega: &GradedForm) -> GradedForm {
    let mut out = omega.clone();
    for j in (1..=ctx.n).rev() {
        let ord = out.max_jet_order();
        let lift = total_derivative_field(ctx, &CoordId::BaseOdd(j), ord);
        out = out.lie_derive(&lift);
    }
    out
}

/// `Θ^L = L^G_{d/dx^{-1}} ∘ … ∘ L^G_{d/dx^{-n}} Θ₀^L`.
pub fn pc_form_berezinian(lag: &Lagrangian) -> GradedForm {
    iterated_odd_lie(&lag.ctx, &pc_form_order1(lag))
}

/// `Θ̃^L = L^G_{𝒥_{n+1}}(dⁿL/dx^T) + η^G·(dⁿL/dx^T)` with `T = (-1,…,-n)`.
pub fn pc_form_intrinsic(lag: &Lagrangian) -> GradedForm {
    let ctx = &lag.ctx;
    let body = lag.iterated_body();
    jk_apply(ctx, ctx.n as usize + 1, &body).add(&eta_g(ctx).mul_fn_right(&body))
}

/// `λ_{ξ_L} = η^G · dⁿL/dx^{-1}…dx^{-n}`, the order-(n+1) graded density of
/// the comparison construction.
pub fn comparison_density(lag: &Lagrangian) -> GradedForm {
    eta_g(&lag.ctx).mul_fn_right(&lag.iterated_body())
}

/// The four summands of the `dᴳΘ^L` decomposition:
/// `dᴳΘ^L = L_{d/dx^{-1}}∘…∘L_{d/dx^{-n}}(α_L + ϖ_L + D₁(Θ₀−η^G L) + ∂(Θ₀−η^G L))`.
#[derive(Debug, Clone)]
pub struct DPcParts {
    pub varpi: GradedForm,
    pub alpha: GradedForm,
    pub d1_term: GradedForm,
    pub vertical_term: GradedForm,
}

impl DPcParts {
    pub fn sum(&self) -> GradedForm {
        self.varpi
            .add(&self.alpha)
            .add(&self.d1_term)
            .add(&self.vertical_term)
    }
}

pub fn d_pc_decomposition(lag: &Lagrangian) -> DPcParts {
    let ctx = &lag.ctx;
    let m_sign = if ctx.m % 2 == 0 { 1i64 } else { -1 };
    let eta = eta_g(ctx);

    // ϖ_L = (−1)^m η^G ∧ (θ^μ (∂L/∂y^μ − d/dxⁱ ∂L/∂y^μ_i) + θ^μ_{-i} ∂L/∂y^μ_{-i})
    let mut kernel = GradedForm::zero();
    for mu in ctx.fiber_mus() {
        let theta = contact_form_unchecked(ctx, &CoordId::fiber(mu));
        let mut omega_mu = lag.expr.partial(&CoordId::fiber(mu));
        for i in 1..=ctx.m {
            let d = total_derivative(
                &CoordId::BaseEven(i),
                &lag.expr.partial(&CoordId::jet1(mu, &CoordId::BaseEven(i))),
            );
            omega_mu = omega_mu.sub(&d);
        }
        kernel = kernel.add(&theta.mul_fn_right(&omega_mu));
        for j in 1..=ctx.n {
            let cj = CoordId::jet1(mu, &CoordId::BaseOdd(j));
            let theta_j = contact_form_unchecked(ctx, &cj);
            kernel = kernel.add(&theta_j.mul_fn_right(&lag.expr.partial(&cj)));
        }
    }
    let varpi = eta.wedge(&kernel).scale_int(m_sign);

    // α_L = (−1)^m η^G ∧ dᴳx^α · dL/dx^α. Only the odd directions survive
    // the wedge with η^G; the coefficient is the single total derivative that
    // the D₀-identity forces.
    let mut alpha_kernel = GradedForm::zero();
    for a in ctx.base_coords() {
        let coeff = total_derivative(&a, &lag.expr);
        alpha_kernel = alpha_kernel.add(&GradedForm::basis_diff(a).mul_fn_right(&coeff));
    }
    let alpha = eta.wedge(&alpha_kernel).scale_int(m_sign);

    let base = pc_form_order1(lag).sub(&eta.mul_fn_right(&lag.expr));
    let d1_term = horizontal_diff_odd(ctx, &base);
    let vertical_term = vertical_diff(ctx, &base);
    DPcParts {
        varpi,
        alpha,
        d1_term,
        vertical_term,
    }
}

/// The Euler–Lagrange operator
/// `ℰ(L)_μ = ∂L/∂y^μ − d/dxⁱ ∂L/∂y^μ_i − (−1)^μ d/dx^{-i} ∂L/∂y^μ_{-i}`.
pub fn euler_lagrange(lag: &Lagrangian) -> EulerLagrangeResult {
    let ctx = &lag.ctx;
    let mut components = BTreeMap::new();
    for mu in ctx.fiber_mus() {
        let mut e = lag.expr.partial(&CoordId::fiber(mu));
        for i in 1..=ctx.m {
            let c = CoordId::jet1(mu, &CoordId::BaseEven(i));
            e = e.sub(&total_derivative(&CoordId::BaseEven(i), &lag.expr.partial(&c)));
        }
        let mu_sign = if CoordId::fiber(mu).parity().is_odd() { -1i64 } else { 1 };
        for j in 1..=ctx.n {
            let c = CoordId::jet1(mu, &CoordId::BaseOdd(j));
            let d = total_derivative(&CoordId::BaseOdd(j), &lag.expr.partial(&c));
            e = e.sub(&d.scale_int(mu_sign));
        }
        components.insert(mu, e);
    }
    EulerLagrangeResult { components }
}

/// Primary critical-section test: the pullback of every `ℰ(L)_μ` along the
/// jet extension vanishes. Returns a witness (fiber index, pulled-back
/// expression) otherwise.
pub fn is_critical(lag: &Lagrangian, s: &Section) -> (bool, Option<(i16, SuperExpr)>) {
    let el = euler_lagrange(lag);
    for (mu, e) in &el.components {
        let pulled = pullback_expr(s, e);
        if !pulled.is_zero() {
            return (false, Some((*mu, pulled)));
        }
    }
    (true, None)
}

/// Audit route: `(j^{n+1}s)^*(ι_X dᴳΘ^L) = 0` for every basis vertical field
/// `X = ∂/∂y^μ_Q` on `J^{n+1}`.
pub fn is_critical_via_pc(lag: &Lagrangian, s: &Section) -> bool {
    let ctx = &lag.ctx;
    let d_theta = pc_form_berezinian(lag).d_graded();
    for q in ctx.jet_coords_up_to(ctx.n as usize + 1) {
        let contracted = d_theta.insert(&VectorField::basis(q));
        if !pullback_form(s, &contracted).is_zero() {
            return false;
        }
    }
    true
}

/// Result of the Noether analysis of a candidate symmetry field.
#[derive(Debug, Clone)]
pub struct NoetherReport {
    /// `div_B(X_{(n+1)})·L + X_{(n+1)}(L) = 0` symbolically.
    pub is_supersymmetry: bool,
    /// the defect of the condition above (zero iff supersymmetry)
    pub supersymmetry_defect: SuperExpr,
    /// the graded divergence of the projection, when it exists
    pub graded_divergence: Option<SuperExpr>,
    /// the Berezinian divergence of the projection
    pub berezinian_divergence: SuperExpr,
    /// condition (2): both divergences agree symbolically
    pub divergences_match: bool,
    /// supersymmetry together with conditions (1) and (2)
    pub is_noether: bool,
    /// `ι_{X_{(n+1)}} Θ^L` when the field is a supersymmetry
    pub current: Option<GradedForm>,
}

/// Checks a projectable candidate field for the supersymmetry condition and
/// the two Noether conditions, and produces the supercurrent.
pub fn noether_check(lag: &Lagrangian, x: &VectorField) -> Result<NoetherReport> {
    let ctx = &lag.ctx;
    if !x.is_projectable() || !x.is_field_on_total_space() {
        return Err(CasError::ArgumentError(
            "Noether analysis needs a projectable field on the total space".into(),
        ));
    }
    let x_prolonged = prolong(ctx, x, ctx.n as usize + 1)?;
    let div_b = div_berezin(ctx, x)?;
    let defect = div_b.mul(&lag.expr).add(&x_prolonged.apply(&lag.expr));
    let is_supersymmetry = defect.is_zero();
    let div_g = div_graded(ctx, x)?;
    let divergences_match = match &div_g {
        Some(g) => *g == div_b,
        None => false,
    };
    let is_noether = is_supersymmetry && div_g.is_some() && divergences_match;
    let current = if is_supersymmetry {
        Some(pc_form_berezinian(lag).insert(&x_prolonged))
    } else {
        None
    };
    Ok(NoetherReport {
        is_supersymmetry,
        supersymmetry_defect: defect,
        graded_divergence: div_g,
        berezinian_divergence: div_b,
        divergences_match,
        is_noether,
        current,
    })
}

/// `L^G_{X_{(n+1)}} Θ^L`, the left side of the functoriality identity.
pub fn lie_pc(lag: &Lagrangian, x: &VectorField) -> Result<GradedForm> {
    let ctx = &lag.ctx;
    let x_prolonged = prolong(ctx, x, ctx.n as usize + 1)?;
    Ok(pc_form_berezinian(lag).lie_derive(&x_prolonged))
}

/// Graded Poincaré–Cartan form `L^G_{𝒥_{n+1}}(F) + η^G·F` of an arbitrary
/// order-(n+1) graded Lagrangian `F`. For `F = dⁿL/dx^T` this is `Θ̃^L`.
pub fn graded_pc_form(ctx: &JetContext, f: &SuperExpr) -> Result<GradedForm> {
    ctx.check_expr(f)?;
    if f.max_jet_order() > ctx.n as usize + 1 {
        return Err(CasError::Precondition(format!(
            "graded Lagrangian must have order ≤ n+1 = {}",
            ctx.n + 1
        )));
    }
    Ok(jk_apply(ctx, ctx.n as usize + 1, f).add(&eta_g(ctx).mul_fn_right(f)))
}

/// The transformed order-(n+1) graded Lagrangian of the functoriality
/// identity: `F' = X_{(n+1)}(F) + div_G(X')·F` with `F = dⁿL/dx^T`, so that
/// `L^G_{X_{(n+1)}} Θ^L = Θ̃^{F'}` exactly. `None` when the graded divergence
/// of the projection does not exist.
pub fn functorial_graded_lagrangian(
    lag: &Lagrangian,
    x: &VectorField,
) -> Result<Option<SuperExpr>> {
    let ctx = &lag.ctx;
    let Some(div_g) = div_graded(ctx, x)? else {
        return Ok(None);
    };
    let x_prolonged = prolong(ctx, x, ctx.n as usize + 1)?;
    let f = lag.iterated_body();
    Ok(Some(x_prolonged.apply(&f).add(&div_g.mul(&f))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_lagrangian_has_trivial_cartan_form() {
        // L = y¹ (a fiber coordinate): all ∂L/∂y^μ_i = 0 so Θ₀ = η^G·y¹.
        let ctx = JetContext::new(1, 1, 1, 1, 1).unwrap();
        let lag = Lagrangian::new(&ctx, SuperExpr::coord(CoordId::fiber(1))).unwrap();
        let theta0 = pc_form_order1(&lag);
        let expected = eta_g(&ctx).mul_fn_right(&lag.expr);
        assert_eq!(theta0, expected);
        assert_eq!(pc_form_order1_lie(&lag), expected);
    }

    #[test]
    fn euler_lagrange_of_fiber_coordinate_is_one() {
        let ctx = JetContext::new(1, 1, 1, 1, 1).unwrap();
        let lag = Lagrangian::new(&ctx, SuperExpr::coord(CoordId::fiber(1))).unwrap();
        let el = euler_lagrange(&lag);
        assert_eq!(el.components[&1], SuperExpr::one());
        assert!(el.components[&-1].is_zero());
    }

    #[test]
    fn jet_dependent_lagrangian_is_rejected_at_higher_order() {
        let ctx = JetContext::new(1, 1, 1, 1, 2).unwrap();
        let c = CoordId::Jet {
            mu: 1,
            pos: crate::superalg::MultiIndexPos::from_entries(vec![1, 1]),
            neg: vec![],
        };
        assert!(Lagrangian::new(&ctx, SuperExpr::coord(c)).is_err());
    }

    #[test]
    fn degenerate_no_odd_base_pc_forms_coincide() {
        // n = 0: the iterated Lie composition is empty, Θ^L = Θ₀^L.
        let ctx = JetContext::new(2, 0, 1, 0, 1).unwrap();
        let y_1 = CoordId::jet1(1, &CoordId::BaseEven(1));
        let lag = Lagrangian::new(&ctx, SuperExpr::coord(y_1).pow(2)).unwrap();
        assert_eq!(pc_form_berezinian(&lag), pc_form_order1(&lag));
    }
}
