//! Graded Cartan calculus on jet spaces: magic formula, bracket
//! compatibility, the horizontal/vertical split and its refinement, and the
//! permutation expansion of iterated odd Lie derivatives.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use supercartan_core::evalor::sampling::{random_expr, random_form, random_section, ExprConfig};
use supercartan_core::gforms::{
    eta_g, horizontal_diff, horizontal_diff_odd, split_horizontal_vertical, vertical_diff,
    vertical_diff_closed_form, GradedForm,
};
use supercartan_core::jetcoords::{
    graded_bracket, pullback_form, total_derivative_field, JetContext, VectorField,
};
use supercartan_core::superalg::{CoordId, Parity, SuperExpr};

fn charts() -> Vec<JetContext> {
    vec![
        JetContext::new(1, 1, 1, 1, 2).unwrap(),
        JetContext::new(1, 2, 1, 1, 2).unwrap(),
        JetContext::new(2, 2, 1, 1, 2).unwrap(),
    ]
}

fn random_jet_field(ctx: &JetContext, rng: &mut StdRng, ord: usize, parity: Parity) -> VectorField {
    let cfg = ExprConfig {
        coords: ctx.catalog(ord),
        max_terms: 2,
        max_even_pow: 2,
        max_factors: 2,
    };
    let mut comps = std::collections::BTreeMap::new();
    for c in ctx.catalog(ord) {
        if rng.random_bool(0.3) {
            let want = Parity::from_odd(parity.is_odd() ^ c.parity().is_odd());
            let v = random_expr(rng, &cfg).parity_part(want);
            if !v.is_zero() {
                comps.insert(c, v);
            }
        }
    }
    VectorField::new(comps)
}

#[test]
fn cartan_magic_formula_is_consistent_with_leibniz() {
    // L_X(ω∧τ) = L_X ω ∧ τ + (−1)^{|X|·deg_tot ω-parity} ω ∧ L_X τ follows
    // from the definition; we check the derivation-property on products.
    let mut rng = StdRng::seed_from_u64(41);
    for ctx in charts() {
        for trial in 0..30 {
            let p = if trial % 2 == 0 { Parity::Even } else { Parity::Odd };
            let x = random_jet_field(&ctx, &mut rng, 1, p);
            if x.is_zero() {
                continue;
            }
            let f = random_expr(
                &mut rng,
                &ExprConfig {
                    coords: ctx.catalog(1),
                    max_terms: 2,
                    max_even_pow: 2,
                    max_factors: 2,
                },
            );
            // L_X(dᴳ f) = dᴳ(X f): both routes exactly
            let lhs = GradedForm::from_function(f.clone()).d_graded().lie_derive(&x);
            let rhs = GradedForm::from_function(x.apply(&f)).d_graded();
            assert_eq!(lhs, rhs, "L∘d = d∘L on functions failed");
            // and on 0-forms the Lie derivative is the derivation itself
            let l0 = GradedForm::from_function(f.clone()).lie_derive(&x);
            assert_eq!(l0, GradedForm::from_function(x.apply(&f)));
        }
    }
}

#[test]
fn lie_derivative_is_a_bidegree_zero_parity_x_derivation() {
    // L_X(ω∧τ) = (L_X ω)∧τ + (−1)^{|X|·a(ω)} ω∧(L_X τ) for word-homogeneous ω,
    // 300 random (X, ω, τ) triples. Together with L_X = ι_X dᴳ + dᴳ ι_X and
    // [L_X, dᴳ] = 0 this pins the whole Cartan calculus.
    let mut rng = StdRng::seed_from_u64(307);
    let ctx = JetContext::new(1, 2, 1, 1, 1).unwrap();
    let mut done = 0;
    while done < 300 {
        let px = if done % 2 == 0 { Parity::Even } else { Parity::Odd };
        let x = random_jet_field(&ctx, &mut rng, 1, px);
        if x.is_zero() {
            done += 1;
            continue;
        }
        let deg_a = rng.random_range(0..=1usize);
        let raw = random_form(&ctx, &mut rng, deg_a, 0);
        let tau = random_form(&ctx, &mut rng, 1, 0);
        // make ω homogeneous in total parity so the Leibniz sign is defined
        for pw in [Parity::Even, Parity::Odd] {
            let mut omega = supercartan_core::gforms::GradedForm::zero();
            for (w, c) in raw.terms() {
                let word_parity = w.iter().filter(|cc| cc.parity().is_odd()).count() % 2;
                let want = Parity::from_odd(pw.is_odd() ^ (word_parity == 1));
                omega = omega.add(&supercartan_core::gforms::GradedForm::from_word_coeff(
                    w.clone(),
                    c.parity_part(want),
                ));
            }
            if omega.is_zero() {
                continue;
            }
            let lhs = omega.wedge(&tau).lie_derive(&x);
            let sgn = px.koszul_sign(pw) as i64;
            let rhs = omega
                .lie_derive(&x)
                .wedge(&tau)
                .add(&omega.wedge(&tau.lie_derive(&x)).scale_int(sgn));
            assert_eq!(lhs, rhs, "Lie-derivative Leibniz failed (px={px:?}, a(ω)={pw:?})");
            done += 1;
        }
    }
}

#[test]
fn lie_insert_commutator_is_insertion_of_bracket() {
    // [L_X, ι_Y] = ι_{[X,Y]} with the bigraded commutator sign
    // (L_X has bidegree (0,|X|), ι_Y has bidegree (−1,|Y|)).
    let mut rng = StdRng::seed_from_u64(43);
    let ctx = JetContext::new(1, 2, 1, 1, 1).unwrap();
    for trial in 0..40 {
        let px = if trial % 2 == 0 { Parity::Even } else { Parity::Odd };
        let py = if (trial / 2) % 2 == 0 { Parity::Even } else { Parity::Odd };
        let x = random_jet_field(&ctx, &mut rng, 0, px);
        let y = random_jet_field(&ctx, &mut rng, 0, py);
        if x.is_zero() || y.is_zero() {
            continue;
        }
        let omega = random_form(&ctx, &mut rng, 2, 0);
        let lhs_a = omega.insert(&y).lie_derive(&x);
        // commuting L_X (0,|X|) past ι_Y (−1,|Y|): sign (−1)^{0·(−1)+|X||Y|}
        let sgn = px.koszul_sign(py) as i64;
        let lhs_b = omega.lie_derive(&x).insert(&y).scale_int(sgn);
        let lhs = lhs_a.sub(&lhs_b);
        let rhs = omega.insert(&graded_bracket(&x, &y).unwrap());
        assert_eq!(lhs, rhs, "[L_X, ι_Y] = ι_{{[X,Y]}} failed (px={px:?}, py={py:?})");
    }
}

#[test]
fn insertion_is_a_graded_antiderivation() {
    // ι_X(ω∧τ) = (ι_X ω)∧τ + (−1)^{p(ω) + |X| a(ω)} ω∧(ι_X τ) for
    // word-homogeneous ω, including words with repeated odd differentials.
    let mut rng = StdRng::seed_from_u64(79);
    let ctx = JetContext::new(1, 2, 1, 1, 1).unwrap();
    let mut done = 0;
    while done < 120 {
        let px = if done % 2 == 0 { Parity::Even } else { Parity::Odd };
        let x = random_jet_field(&ctx, &mut rng, 1, px);
        if x.is_zero() {
            done += 1;
            continue;
        }
        // one fixed word (possibly with a repeated odd differential) and a
        // parity-homogeneous coefficient
        let catalog = ctx.catalog(1);
        let p = rng.random_range(1..=2usize);
        let mut word = Vec::new();
        for _ in 0..p {
            word.push(catalog[rng.random_range(0..catalog.len())].clone());
        }
        if rng.random_bool(0.3) {
            // force a repeated odd-coordinate differential
            word.push(CoordId::BaseOdd(1));
            word.push(CoordId::BaseOdd(1));
        }
        let coeff = random_expr(
            &mut rng,
            &ExprConfig {
                coords: ctx.catalog(1),
                max_terms: 2,
                max_even_pow: 2,
                max_factors: 2,
            },
        );
        let tau = random_form(&ctx, &mut rng, 1, 1);
        for pc in [Parity::Even, Parity::Odd] {
            let omega = GradedForm::from_word_coeff(word.clone(), coeff.parity_part(pc));
            if omega.is_zero() {
                continue;
            }
            let (w_canon, _) = {
                // recover the canonical word to compute its bidegree
                let (w, c) = omega.terms().next().unwrap();
                (w.clone(), c.clone())
            };
            let deg = w_canon.len();
            let word_par = w_canon.iter().filter(|c| c.parity().is_odd()).count() % 2;
            let total_par = Parity::from_odd((pc.is_odd() as usize + word_par) % 2 == 1);
            let e = deg + (px.is_odd() as usize) * (total_par.is_odd() as usize);
            let sgn = if e % 2 == 0 { 1i64 } else { -1 };
            let lhs = omega.wedge(&tau).insert(&x);
            let rhs = omega
                .insert(&x)
                .wedge(&tau)
                .add(&omega.wedge(&tau.insert(&x)).scale_int(sgn));
            assert_eq!(lhs, rhs, "ι_X antiderivation failed (px={px:?})");
            done += 1;
        }
    }
}

#[test]
fn split_identities_on_random_forms() {
    // dᴳ = D + ∂, D² = 0, ∂² = 0, D∂ + ∂D = 0.
    let mut rng = StdRng::seed_from_u64(47);
    for ctx in charts() {
        for _ in 0..12 {
            let deg = rng.random_range(0..=2usize);
            let omega = random_form(&ctx, &mut rng, deg, 1);
            let parts = split_horizontal_vertical(&ctx, &omega);
            assert_eq!(
                parts.horizontal.add(&parts.vertical),
                omega.d_graded(),
                "dᴳ = D + ∂ failed"
            );
            assert_eq!(parts.d0.add(&parts.d1), parts.horizontal, "D = D₀ + D₁ failed");
            let dd = horizontal_diff(&ctx, &parts.horizontal);
            assert!(dd.is_zero(), "D² = 0 failed");
            let vv = vertical_diff(&ctx, &parts.vertical);
            assert!(vv.is_zero(), "∂² = 0 failed");
            let mixed = horizontal_diff(&ctx, &parts.vertical)
                .add(&vertical_diff(&ctx, &parts.horizontal));
            assert!(mixed.is_zero(), "D∂ + ∂D = 0 failed");
        }
    }
}

#[test]
fn vertical_differential_closed_form_agrees() {
    // ∂ computed as dᴳ − D against the contact-generator expression.
    let mut rng = StdRng::seed_from_u64(53);
    for ctx in [
        JetContext::new(1, 1, 1, 1, 2).unwrap(),
        JetContext::new(1, 2, 1, 1, 2).unwrap(),
    ] {
        for _ in 0..50 {
            let deg = rng.random_range(0..=2usize);
            let omega = random_form(&ctx, &mut rng, deg, 1);
            let by_subtraction = vertical_diff(&ctx, &omega);
            let closed = vertical_diff_closed_form(&ctx, &omega).unwrap();
            assert_eq!(by_subtraction, closed, "two vertical differentials disagree");
        }
    }
}

#[test]
fn iterated_odd_lie_kills_d1_images() {
    // L_{d/dx^{-1}} ∘ … ∘ L_{d/dx^{-n}} ∘ D₁ = 0: some d/dx^{-j} repeats.
    let mut rng = StdRng::seed_from_u64(59);
    let ctx = JetContext::new(1, 2, 1, 1, 2).unwrap();
    for _ in 0..10 {
        let omega = random_form(&ctx, &mut rng, 1, 1);
        let d1 = horizontal_diff_odd(&ctx, &omega);
        let mut acc = d1;
        for j in (1..=ctx.n).rev() {
            let ord = acc.max_jet_order();
            acc = acc.lie_derive(&total_derivative_field(&ctx, &CoordId::BaseOdd(j), ord));
        }
        assert!(acc.is_zero(), "iterated odd Lie must annihilate D₁ images");
    }
}

#[test]
fn sigma_lemma_permutation_expansion_n2() {
    // L_{d/dx^{-1}} L_{d/dx^{-2}} (A ∧ B) = Σ_{splits} ±(L_{σ₁} A)(L_{σ₂} B)
    // exhaustively for n = 2 and homogeneous A of low degree.
    let mut rng = StdRng::seed_from_u64(61);
    let ctx = JetContext::new(1, 2, 1, 1, 2).unwrap();
    let lie = |j: u16, w: &GradedForm| {
        let ord = w.max_jet_order();
        w.lie_derive(&total_derivative_field(&ctx, &CoordId::BaseOdd(j), ord))
    };
    for trial in 0..20 {
        let pa = if trial % 2 == 0 { Parity::Even } else { Parity::Odd };
        let a_deg = rng.random_range(0..=1usize);
        let raw_a = random_form(&ctx, &mut rng, a_deg, 1);
        // homogeneous-parity coefficient for A so that |A| is defined
        let mut a = GradedForm::zero();
        for (w, c) in raw_a.terms() {
            let word_parity = w
                .iter()
                .filter(|cc| cc.parity().is_odd())
                .count()
                % 2;
            let want = Parity::from_odd(pa.is_odd() ^ (word_parity == 1));
            a = a.add(&GradedForm::from_word_coeff(w.clone(), c.parity_part(want)));
        }
        let b = random_form(&ctx, &mut rng, 1, 1);
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let lhs = lie(1, &lie(2, &a.wedge(&b)));
        // splits σ = σ₁ ∪ σ₂ of {−1,−2}, τ = inversions of the arrangement
        // (σ₁…σ₂…), sign (−1)^{|σ₂||A| + τ}:
        //   σ₁ = {−1,−2}, σ₂ = {}      : τ = 0
        //   σ₁ = {−1},    σ₂ = {−2}    : τ = 0
        //   σ₁ = {−2},    σ₂ = {−1}    : τ = 1
        //   σ₁ = {},      σ₂ = {−1,−2} : τ = 0
        let a_sign = if pa.is_odd() { -1i64 } else { 1 };
        let t1 = lie(1, &lie(2, &a)).wedge(&b);
        let t2 = lie(1, &a).wedge(&lie(2, &b)).scale_int(a_sign);
        let t3 = lie(2, &a).wedge(&lie(1, &b)).scale_int(-a_sign);
        let t4 = a.wedge(&lie(1, &lie(2, &b)));
        let rhs = t1.add(&t2).add(&t3).add(&t4);
        assert_eq!(lhs, rhs, "Σ-lemma failed for |A| = {pa:?}, deg A = {a_deg}");
    }
}

#[test]
fn pullback_commutes_with_exterior_differential() {
    let mut rng = StdRng::seed_from_u64(67);
    for ctx in charts() {
        for _ in 0..10 {
            let s = random_section(&ctx, &mut rng);
            let deg = rng.random_range(0..=1usize);
            let omega = random_form(&ctx, &mut rng, deg, 1);
            let lhs = pullback_form(&s, &omega).d_graded();
            let rhs = pullback_form(&s, &omega.d_graded());
            assert_eq!(lhs, rhs, "pullback naturality for dᴳ failed");
        }
    }
}

#[test]
fn eta_wedge_base_even_differential_vanishes() {
    for ctx in charts() {
        let eta = eta_g(&ctx);
        for i in 1..=ctx.m {
            assert!(eta
                .wedge(&GradedForm::basis_diff(CoordId::BaseEven(i)))
                .is_zero());
        }
        // but odd base differentials survive
        for j in 1..=ctx.n {
            assert!(!eta
                .wedge(&GradedForm::basis_diff(CoordId::BaseOdd(j)))
                .is_zero());
        }
    }
}

#[test]
fn d_graded_squares_to_zero_on_random_forms() {
    let mut rng = StdRng::seed_from_u64(71);
    for ctx in charts() {
        for _ in 0..20 {
            let f = random_expr(
                &mut rng,
                &ExprConfig {
                    coords: ctx.catalog(1),
                    max_terms: 3,
                    max_even_pow: 2,
                    max_factors: 3,
                },
            );
            assert!(GradedForm::from_function(f).d_graded().d_graded().is_zero());
        }
    }
}

#[test]
fn forms_vanish_beyond_their_slot_counts() {
    // a form built from r horizontal factors dᴳx^α and s contact factors θ_Q
    // vanishes on more than r horizontal-lift arguments or more than s
    // vertical arguments
    use supercartan_core::gforms::GradedForm;
    use supercartan_core::jetcoords::contact_form_unchecked;
    let mut rng = StdRng::seed_from_u64(73);
    let ctx = JetContext::new(2, 2, 1, 1, 2).unwrap();
    let base = ctx.base_coords();
    let thetas: Vec<GradedForm> = ctx
        .jet_coords_up_to(1)
        .iter()
        .map(|q| contact_form_unchecked(&ctx, q))
        .collect();
    for _ in 0..15 {
        let r = rng.random_range(0..=2usize);
        let s = rng.random_range(0..=2usize);
        if r + s == 0 {
            continue;
        }
        let mut omega = GradedForm::from_function(random_expr(
            &mut rng,
            &ExprConfig {
                coords: ctx.catalog(1),
                max_terms: 2,
                max_even_pow: 2,
                max_factors: 2,
            },
        ));
        for _ in 0..r {
            let alpha = &base[rng.random_range(0..base.len())];
            omega = omega.wedge(&GradedForm::basis_diff(alpha.clone()));
        }
        for _ in 0..s {
            omega = omega.wedge(&thetas[rng.random_range(0..thetas.len())]);
        }
        if omega.is_zero() {
            continue;
        }
        // s+1 vertical insertions annihilate (contact factors absorb at most
        // one vertical argument each, horizontal factors none)
        let mut acc = omega.clone();
        for k in 0..=s {
            let q = ctx.jet_coords_up_to(1)[k % (ctx.jet_coords_up_to(1).len())].clone();
            acc = acc.insert(&VectorField::basis(q));
        }
        assert!(acc.is_zero(), "more than s = {s} vertical arguments must annihilate");
        // r+1 horizontal-lift insertions annihilate (θ's vanish on lifts)
        let mut acc = omega.clone();
        for k in 0..=r {
            let alpha = &base[k % base.len()];
            let ord = acc.max_jet_order();
            acc = acc.insert(&total_derivative_field(&ctx, alpha, ord));
        }
        assert!(acc.is_zero(), "more than r = {r} horizontal arguments must annihilate");
    }
}

#[test]
fn scalar_evaluation_of_volume_on_coordinate_fields() {
    // ι-chains: η^G(∂/∂x¹, …, ∂/∂x^m) = ±1 depending on the insertion order.
    let ctx = JetContext::new(2, 1, 1, 1, 1).unwrap();
    let eta = eta_g(&ctx);
    let fields: Vec<VectorField> = (1..=2u16)
        .map(|i| VectorField::basis(CoordId::BaseEven(i)))
        .collect();
    let v = eta.evaluate(&fields);
    // ι_{∂₂} ι_{∂₁} (dᴳx¹∧dᴳx²) = ι_{∂₂}(dᴳx²) = 1
    assert_eq!(v, SuperExpr::one());
}
