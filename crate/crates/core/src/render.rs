//! Plain-text, LaTeX and canonical-JSON renderers.
//!
//! JSON output is canonical: object keys are sorted (serde_json's default
//! map), terms stay in the normal-form order and exact rationals are emitted
//! as strings like `"-3/2"`, so identical inputs always serialize to
//! byte-identical documents.

use num_traits::{One, Signed};
use serde_json::{json, Value};

use crate::gforms::GradedForm;
use crate::jetcoords::JetContext;
use crate::superalg::{CoordId, Rational, SuperExpr};

/// User-facing coordinate names for a chart.
#[derive(Debug, Clone)]
pub struct NameTable {
    pub base_even: Vec<String>,
    pub base_odd: Vec<String>,
    /// fiber names for μ = 1..r
    pub fiber_even: Vec<String>,
    /// fiber names for μ = -1..-s
    pub fiber_odd: Vec<String>,
}

impl NameTable {
    /// Default names `x1…, e1…, u1…, v1…` for a bare chart.
    pub fn default_for(ctx: &JetContext) -> Self {
        NameTable {
            base_even: (1..=ctx.m).map(|i| format!("x{i}")).collect(),
            base_odd: (1..=ctx.n).map(|j| format!("e{j}")).collect(),
            fiber_even: (1..=ctx.r).map(|a| format!("u{a}")).collect(),
            fiber_odd: (1..=ctx.s).map(|a| format!("v{a}")).collect(),
        }
    }

    pub fn base_even_name(&self, i: u16) -> &str {
        &self.base_even[(i - 1) as usize]
    }

    pub fn base_odd_name(&self, j: u16) -> &str {
        &self.base_odd[(j - 1) as usize]
    }

    pub fn fiber_name(&self, mu: i16) -> &str {
        if mu > 0 {
            &self.fiber_even[(mu - 1) as usize]
        } else {
            &self.fiber_odd[(-mu - 1) as usize]
        }
    }
}

pub fn rational_str(q: &Rational) -> String {
    if q.denom().is_one() {
        format!("{}", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `y[t,t,-1]`-style name of a coordinate.
pub fn coord_text(c: &CoordId, names: &NameTable) -> String {
    match c {
        CoordId::BaseEven(i) => names.base_even_name(*i).to_string(),
        CoordId::BaseOdd(j) => names.base_odd_name(*j).to_string(),
        CoordId::Jet { mu, pos, neg } => {
            let mut s = names.fiber_name(*mu).to_string();
            if !pos.is_empty() || !neg.is_empty() {
                s.push('[');
                let mut parts: Vec<String> = pos
                    .entries()
                    .iter()
                    .map(|i| names.base_even_name(*i).to_string())
                    .collect();
                parts.extend(neg.iter().map(|j| format!("-{j}")));
                s.push_str(&parts.join(","));
                s.push(']');
            }
            s
        }
    }
}

/// LaTeX name: subscripted jet indices, e.g. `y_{t\,t\,-1}`.
pub fn coord_latex(c: &CoordId, names: &NameTable) -> String {
    match c {
        CoordId::BaseEven(i) => names.base_even_name(*i).to_string(),
        CoordId::BaseOdd(j) => names.base_odd_name(*j).to_string(),
        CoordId::Jet { mu, pos, neg } => {
            let base = names.fiber_name(*mu).to_string();
            if pos.is_empty() && neg.is_empty() {
                base
            } else {
                let mut parts: Vec<String> = pos
                    .entries()
                    .iter()
                    .map(|i| names.base_even_name(*i).to_string())
                    .collect();
                parts.extend(neg.iter().map(|j| format!("{{-{j}}}")));
                format!("{base}_{{{}}}", parts.join("\\,"))
            }
        }
    }
}

pub fn expr_text(f: &SuperExpr, names: &NameTable) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    let mut first = true;
    for (t, q) in f.terms() {
        let neg = q.is_negative();
        let abs = q.abs();
        if first {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        first = false;
        let mut factors: Vec<String> = Vec::new();
        for (c, e) in &t.evens {
            let name = coord_text(c, names);
            factors.push(if *e > 1 { format!("{name}^{e}") } else { name });
        }
        for c in &t.odds {
            factors.push(coord_text(c, names));
        }
        if !abs.is_one() || factors.is_empty() {
            factors.insert(0, rational_str(&abs));
        }
        out.push_str(&factors.join("*"));
    }
    out
}

pub fn expr_latex(f: &SuperExpr, names: &NameTable) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    let mut first = true;
    for (t, q) in f.terms() {
        let neg = q.is_negative();
        let abs = q.abs();
        if first {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        first = false;
        let mut factors: Vec<String> = Vec::new();
        for (c, e) in &t.evens {
            let name = coord_latex(c, names);
            factors.push(if *e > 1 { format!("{name}^{{{e}}}") } else { name });
        }
        for c in &t.odds {
            factors.push(coord_latex(c, names));
        }
        let coeff = if abs.denom().is_one() {
            if abs.is_one() && !factors.is_empty() {
                String::new()
            } else {
                format!("{}", abs.numer())
            }
        } else {
            format!("\\tfrac{{{}}}{{{}}}", abs.numer(), abs.denom())
        };
        out.push_str(&coeff);
        if !coeff.is_empty() && !factors.is_empty() {
            out.push_str("\\,");
        }
        out.push_str(&factors.join("\\,"));
    }
    out
}

/// Canonical JSON term list of a superfunction.
pub fn expr_json(f: &SuperExpr, names: &NameTable) -> Value {
    let terms: Vec<Value> = f
        .terms()
        .map(|(t, q)| {
            let evens: Vec<Value> = t
                .evens
                .iter()
                .map(|(c, e)| json!([coord_text(c, names), e]))
                .collect();
            let odds: Vec<Value> = t.odds.iter().map(|c| json!(coord_text(c, names))).collect();
            json!({
                "coeff": rational_str(q),
                "evens": evens,
                "odds": odds,
            })
        })
        .collect();
    json!({ "terms": terms })
}

pub fn form_text(omega: &GradedForm, names: &NameTable) -> String {
    if omega.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (word, coeff) in omega.terms() {
        let w = if word.is_empty() {
            "1".to_string()
        } else {
            word.iter()
                .map(|c| format!("dG({})", coord_text(c, names)))
                .collect::<Vec<_>>()
                .join("^")
        };
        parts.push(format!("{w}·({})", expr_text(coeff, names)));
    }
    parts.join(" + ")
}

pub fn form_latex(omega: &GradedForm, names: &NameTable) -> String {
    if omega.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (word, coeff) in omega.terms() {
        let w = if word.is_empty() {
            String::new()
        } else {
            word.iter()
                .map(|c| format!("d^{{G}}{}", coord_latex(c, names)))
                .collect::<Vec<_>>()
                .join("\\wedge ")
        };
        let c = expr_latex(coeff, names);
        if w.is_empty() {
            parts.push(c);
        } else {
            parts.push(format!("{w}\\cdot\\left({c}\\right)"));
        }
    }
    parts.join(" + ")
}

/// Symbols of the contact cobasis `{dᴳx^α, θ^μ_{IA}}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum CSym {
    /// `dᴳx^α`
    Horizontal(CoordId),
    /// `θ` of a jet coordinate
    Theta(CoordId),
}

impl CSym {
    fn parity_odd(&self) -> bool {
        match self {
            CSym::Horizontal(c) | CSym::Theta(c) => c.parity() == crate::superalg::Parity::Odd,
        }
    }
}

fn csym_swap_sign(a: &CSym, b: &CSym) -> i8 {
    if a.parity_odd() && b.parity_odd() {
        1
    } else {
        -1
    }
}

fn csym_sort(mut word: Vec<CSym>) -> Option<(Vec<CSym>, i8)> {
    let mut sign = 1i8;
    for i in 1..word.len() {
        let mut j = i;
        while j > 0 && word[j - 1] > word[j] {
            sign *= csym_swap_sign(&word[j - 1], &word[j]);
            word.swap(j - 1, j);
            j -= 1;
        }
    }
    for w in word.windows(2) {
        if w[0] == w[1] && !w[0].parity_odd() {
            return None;
        }
    }
    Some((word, sign))
}

/// A graded form rewritten over the contact cobasis: every jet differential
/// `dᴳy^μ_Q` is replaced by `θ^μ_Q + Σ_α dᴳx^α·y^μ_{{α}⋆Q}`.
fn to_contact_basis(
    ctx: &crate::jetcoords::JetContext,
    omega: &GradedForm,
) -> std::collections::BTreeMap<Vec<CSym>, SuperExpr> {
    use std::collections::BTreeMap;
    let mut out: BTreeMap<Vec<CSym>, SuperExpr> = BTreeMap::new();
    let mut push = |word: Vec<CSym>, coeff: SuperExpr| {
        let Some((word, sign)) = csym_sort(word) else { return };
        let coeff = if sign < 0 { coeff.neg() } else { coeff };
        let e = out.entry(word).or_insert_with(SuperExpr::zero);
        *e = e.add(&coeff);
    };
    for (word, f) in omega.terms() {
        // expand the word symbol by symbol, carrying (partial word, coeff)
        let mut acc: Vec<(Vec<CSym>, SuperExpr)> = vec![(Vec::new(), SuperExpr::one())];
        for c in word {
            let mut options: Vec<(CSym, SuperExpr)> = Vec::new();
            match c {
                CoordId::BaseEven(_) | CoordId::BaseOdd(_) => {
                    options.push((CSym::Horizontal(c.clone()), SuperExpr::one()));
                }
                CoordId::Jet { .. } => {
                    options.push((CSym::Theta(c.clone()), SuperExpr::one()));
                    for alpha in ctx.base_coords() {
                        if let Some((sign, lifted)) = crate::jetcoords::lift_coord(&alpha, c) {
                            options.push((
                                CSym::Horizontal(alpha),
                                SuperExpr::coord(lifted).scale_int(sign as i64),
                            ));
                        }
                    }
                }
            }
            let mut next = Vec::new();
            for (w, coeff) in &acc {
                for (sym, opt_coeff) in &options {
                    // move the existing coefficient past the new symbol
                    let mut produced: Vec<(SuperExpr, i64)> = Vec::new();
                    for p in [crate::superalg::Parity::Even, crate::superalg::Parity::Odd] {
                        let part = coeff.parity_part(p);
                        if part.is_zero() {
                            continue;
                        }
                        let sgn = if p == crate::superalg::Parity::Odd && sym.parity_odd() {
                            -1
                        } else {
                            1
                        };
                        produced.push((part, sgn));
                    }
                    for (part, sgn) in produced {
                        let mut w2 = w.clone();
                        w2.push(sym.clone());
                        next.push((w2, part.mul(opt_coeff).scale_int(sgn)));
                    }
                }
            }
            acc = next;
        }
        for (w, coeff) in acc {
            push(w, coeff.mul(f));
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// LaTeX rendering over the contact cobasis, using the customary glyphs
/// (`d^{G}x^α`, `θ^μ_{IA}`, `∧`).
pub fn form_latex_contact(
    ctx: &crate::jetcoords::JetContext,
    omega: &GradedForm,
    names: &NameTable,
) -> String {
    let terms = to_contact_basis(ctx, omega);
    if terms.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (word, coeff) in &terms {
        let w = word
            .iter()
            .map(|s| match s {
                CSym::Horizontal(c) => format!("d^{{G}}{}", coord_latex(c, names)),
                CSym::Theta(c) => match c {
                    CoordId::Jet { mu, pos, neg } => {
                        let mut sub: Vec<String> = pos
                            .entries()
                            .iter()
                            .map(|i| names.base_even_name(*i).to_string())
                            .collect();
                        sub.extend(neg.iter().map(|j| format!("{{-{j}}}")));
                        if sub.is_empty() {
                            format!("\\theta^{{{}}}", names.fiber_name(*mu))
                        } else {
                            format!("\\theta^{{{}}}_{{{}}}", names.fiber_name(*mu), sub.join("\\,"))
                        }
                    }
                    _ => unreachable!(),
                },
            })
            .collect::<Vec<_>>()
            .join("\\wedge ");
        let c = expr_latex(coeff, names);
        if w.is_empty() {
            parts.push(c);
        } else if coeff.as_constant().map(|q| q.is_one()).unwrap_or(false) {
            parts.push(w);
        } else {
            parts.push(format!("{w}\\cdot\\left({c}\\right)"));
        }
    }
    parts.join(" + ")
}

pub fn form_json(omega: &GradedForm, names: &NameTable) -> Value {
    let terms: Vec<Value> = omega
        .terms()
        .map(|(word, coeff)| {
            let w: Vec<Value> = word.iter().map(|c| json!(coord_text(c, names))).collect();
            json!({
                "word": w,
                "coeff": expr_json(coeff, names),
            })
        })
        .collect();
    json!({ "terms": terms })
}
