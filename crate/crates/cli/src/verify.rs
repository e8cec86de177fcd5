//! The seeded identity suite behind `supercartan verify`: re-derives the
//! structural identities of the calculus on the problem's own chart, with
//! random data drawn from the given seed, and cross-checks one symbolic
//! identity on the independent Grassmann evaluation oracle.

use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::dsl::ProblemFile;
use supercartan_core::evalor::sampling::{random_first_order, random_form, random_section};
use supercartan_core::evalor::structured_probe;
use supercartan_core::gforms::{horizontal_diff, split_horizontal_vertical, vertical_diff};
use supercartan_core::jetcoords::{
    contact_form_unchecked, prolong, prolongation_preserves_contact, pullback_expr, pullback_form,
    total_derivative,
};
use supercartan_core::superalg::CoordId;
use supercartan_core::varcalc::{pc_form_berezinian, pc_form_intrinsic, Lagrangian};

pub struct Outcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: Option<String>,
}

fn check(name: &'static str, pass: bool, detail: Option<String>) -> Outcome {
    Outcome { name, pass, detail }
}

pub fn run_suite(problem: &ProblemFile, lag: &Lagrangian, seed: u64) -> Vec<Outcome> {
    let ctx = &problem.ctx;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();

    // contact forms vanish on jet extensions
    {
        let mut pass = true;
        for _ in 0..5 {
            let s = random_section(ctx, &mut rng);
            for q in ctx.jet_coords_up_to(1) {
                if !pullback_form(&s, &contact_form_unchecked(ctx, &q)).is_zero() {
                    pass = false;
                }
            }
        }
        out.push(check("contact_annihilation_on_jet_extensions", pass, None));
    }

    // pullback commutes with total derivatives
    {
        let mut pass = true;
        for _ in 0..5 {
            let s = random_section(ctx, &mut rng);
            let f = random_first_order(ctx, &mut rng, 3);
            for alpha in ctx.base_coords() {
                let lhs = pullback_expr(&s, &total_derivative(&alpha, &f));
                let rhs = pullback_expr(&s, &f).partial(&alpha);
                if lhs != rhs {
                    pass = false;
                }
            }
        }
        out.push(check("pullback_naturality_of_total_derivatives", pass, None));
    }

    // odd total derivatives anticommute, cross-checked on the Grassmann oracle
    if ctx.n >= 2 {
        let mut pass = true;
        for _ in 0..5 {
            let f = random_first_order(ctx, &mut rng, 3);
            let d = |j: u16, g: &supercartan_core::superalg::SuperExpr| {
                total_derivative(&CoordId::BaseOdd(j), g)
            };
            let lhs = d(1, &d(2, &f));
            let rhs = d(2, &d(1, &f)).neg();
            if lhs != rhs || !structured_probe(&lhs, &rhs) {
                pass = false;
            }
        }
        out.push(check("odd_total_derivatives_anticommute", pass, None));
    }

    // horizontal/vertical split identities
    {
        let mut pass = true;
        for deg in 0..=1usize {
            for _ in 0..3 {
                let omega = random_form(ctx, &mut rng, deg, 1);
                let parts = split_horizontal_vertical(ctx, &omega);
                if parts.horizontal.add(&parts.vertical) != omega.d_graded()
                    || !horizontal_diff(ctx, &parts.horizontal).is_zero()
                    || !vertical_diff(ctx, &parts.vertical).is_zero()
                {
                    pass = false;
                }
            }
        }
        out.push(check("horizontal_vertical_split_identities", pass, None));
    }

    // the two Poincaré–Cartan routes agree for the problem's Lagrangian …
    {
        let theta = pc_form_berezinian(lag);
        let tilde = pc_form_intrinsic(lag);
        out.push(check(
            "cartan_form_route_equality_for_problem_lagrangian",
            theta == tilde,
            None,
        ));
    }
    // … and for random first-order Lagrangians on the same chart
    {
        let mut pass = true;
        for _ in 0..3 {
            let l = Lagrangian::new(ctx, random_first_order(ctx, &mut rng, 3)).unwrap();
            if pc_form_berezinian(&l) != pc_form_intrinsic(&l) {
                pass = false;
            }
        }
        out.push(check("cartan_form_route_equality_on_random_lagrangians", pass, None));
    }

    // Berezinian divergence defining relation against the quotient oracle
    {
        use supercartan_core::berezin::{div_berezin, lie_berezin_via_quotient};
        use supercartan_core::superalg::{Parity, SuperExpr};
        let xi_parity = Parity::from_odd(ctx.n % 2 == 1);
        let mut pass = true;
        for trial in 0..6 {
            let parity = if trial % 2 == 0 { Parity::Even } else { Parity::Odd };
            let x = supercartan_core::evalor::sampling::random_base_field(ctx, &mut rng, parity);
            if x.is_zero() {
                continue;
            }
            let lhs = lie_berezin_via_quotient(ctx, &x, &SuperExpr::one()).unwrap();
            let rhs = div_berezin(ctx, &x)
                .unwrap()
                .scale_int(parity.koszul_sign(xi_parity) as i64);
            if lhs != rhs {
                pass = false;
            }
        }
        out.push(check("berezinian_divergence_defining_relation", pass, None));
    }

    // declared symmetries prolong to contact transformations
    {
        let mut pass = true;
        let mut detail = None;
        for (name, field) in &problem.symmetries {
            match prolong(ctx, field, ctx.n as usize + 1) {
                Ok(xk) => {
                    if !prolongation_preserves_contact(ctx, &xk, ctx.n as usize + 1) {
                        pass = false;
                        detail = Some(format!("symmetry `{name}` fails the contact condition"));
                    }
                }
                Err(e) => {
                    pass = false;
                    detail = Some(format!("symmetry `{name}`: {e}"));
                }
            }
        }
        out.push(check("symmetry_prolongations_preserve_contact", pass, detail));
    }

    out
}
