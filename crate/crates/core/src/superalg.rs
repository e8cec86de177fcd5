//! Supercommutative coordinate algebra in a fixed splitting chart.
//!
//! A [`SuperExpr`] is the unique normal form of a superfunction: a finite sum
//! of terms `q · (even monomial) · (ordered Grassmann word)`, where `q` is an
//! exact rational, the even monomial collects even coordinates with powers,
//! and the Grassmann word is a strictly increasing product of odd coordinates
//! under the global coordinate order. Equality of superfunctions is structural
//! equality of normal forms.
//!
//! Odd partial derivatives are left derivatives: `∂_c(c·w) = w` whenever `c`
//! does not occur in `w`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::{CasError, Result};

/// Exact scalar used everywhere in the symbolic core.
pub type Rational = num_rational::BigRational;

/// Builds a rational from an integer pair, panicking on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Z₂ degree of a homogeneous object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_odd(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// Z₂ sum of parities, the parity of a product of homogeneous factors.
    pub fn combine(self, other: Parity) -> Parity {
        Parity::from_odd(self.is_odd() ^ other.is_odd())
    }

    /// `(-1)^{|a||b|}` as a sign.
    pub fn koszul_sign(self, other: Parity) -> i8 {
        if self.is_odd() && other.is_odd() {
            -1
        } else {
            1
        }
    }
}

impl std::ops::Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        self.combine(rhs)
    }
}

/// Positive (symmetric) jet multi-index `I = (i₁,…,i_m) ∈ ℕ^m`, stored as the
/// sorted multiset of base-even indices it counts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndexPos(Vec<u16>);

impl MultiIndexPos {
    pub fn empty() -> Self {
        MultiIndexPos(Vec::new())
    }

    /// From a list of base-even indices (1-based), order irrelevant.
    pub fn from_entries(mut entries: Vec<u16>) -> Self {
        entries.sort_unstable();
        MultiIndexPos(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u16] {
        &self.0
    }

    /// Commutative juxtaposition `I + J`.
    pub fn juxtapose(&self, other: &MultiIndexPos) -> MultiIndexPos {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndexPos::from_entries(v)
    }

    /// Adds a single even index.
    pub fn push(&self, i: u16) -> MultiIndexPos {
        let mut v = self.0.clone();
        v.push(i);
        MultiIndexPos::from_entries(v)
    }

    /// Multiplicity of index `i`.
    pub fn count(&self, i: u16) -> usize {
        self.0.iter().filter(|&&e| e == i).count()
    }

    /// Removes one occurrence of `i`; `None` if absent.
    pub fn remove_one(&self, i: u16) -> Option<MultiIndexPos> {
        let pos = self.0.iter().position(|&e| e == i)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(MultiIndexPos(v))
    }
}

/// Negative (odd) jet multi-index. `Seq` entries are the values `j` of base
/// odd indices `x^{-j}` in written order; `Null` is the annihilating element
/// `∅` that absorbs every juxtaposition and stands for the zero coordinate.
///
/// The empty sequence is the identity index `(0)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MultiIndexNeg {
    Null,
    Seq(Vec<u16>),
}

impl MultiIndexNeg {
    pub fn empty() -> Self {
        MultiIndexNeg::Seq(Vec::new())
    }

    pub fn single(j: u16) -> Self {
        MultiIndexNeg::Seq(vec![j])
    }

    pub fn from_entries(entries: Vec<u16>) -> Self {
        MultiIndexNeg::Seq(entries)
    }

    pub fn is_null(&self) -> bool {
        matches!(self, MultiIndexNeg::Null)
    }

    pub fn len(&self) -> usize {
        match self {
            MultiIndexNeg::Null => 0,
            MultiIndexNeg::Seq(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> &[u16] {
        match self {
            MultiIndexNeg::Null => &[],
            MultiIndexNeg::Seq(v) => v,
        }
    }
}

/// A coordinate of the chart. Jet coordinates store the strictly increasing
/// canonical form of the negative multi-index (entry `j` stands for `x^{-j}`;
/// increasing `j` means the indices themselves strictly decrease).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CoordId {
    /// `x^i`, `i = 1..=m`.
    BaseEven(u16),
    /// `x^{-j}`, stored as `j = 1..=n`.
    BaseOdd(u16),
    /// `y^μ_{IA}`; `mu` ranges over `-s..=-1, 1..=r`. Empty `pos`/`neg` is the
    /// fiber coordinate `y^μ` itself.
    Jet {
        mu: i16,
        pos: MultiIndexPos,
        neg: Vec<u16>,
    },
}

impl CoordId {
    pub fn fiber(mu: i16) -> Self {
        CoordId::Jet {
            mu,
            pos: MultiIndexPos::empty(),
            neg: Vec::new(),
        }
    }

    /// First-order jet coordinate `y^μ_α` for a base coordinate `α`.
    pub fn jet1(mu: i16, alpha: &CoordId) -> Self {
        match alpha {
            CoordId::BaseEven(i) => CoordId::Jet {
                mu,
                pos: MultiIndexPos::from_entries(vec![*i]),
                neg: Vec::new(),
            },
            CoordId::BaseOdd(j) => CoordId::Jet {
                mu,
                pos: MultiIndexPos::empty(),
                neg: vec![*j],
            },
            _ => panic!("jet1 expects a base coordinate"),
        }
    }

    pub fn parity(&self) -> Parity {
        match self {
            CoordId::BaseEven(_) => Parity::Even,
            CoordId::BaseOdd(_) => Parity::Odd,
            CoordId::Jet { mu, neg, .. } => Parity::from_odd((*mu < 0) ^ (neg.len() % 2 == 1)),
        }
    }

    /// `|I| + |A|` for jet coordinates, 0 for base coordinates.
    pub fn jet_order(&self) -> usize {
        match self {
            CoordId::Jet { pos, neg, .. } => pos.len() + neg.len(),
            _ => 0,
        }
    }

    pub fn is_base(&self) -> bool {
        matches!(self, CoordId::BaseEven(_) | CoordId::BaseOdd(_))
    }

    fn sort_class(&self) -> u8 {
        match self {
            CoordId::BaseEven(_) => 0,
            CoordId::BaseOdd(_) => 1,
            CoordId::Jet { .. } => 2,
        }
    }
}

// Global coordinate order: base-even by index, then base-odd by index, then
// fiber/jet coordinates by (μ, I, A) lexicographically. Any fixed total order
// yields canonical normal forms; this one keeps rendered output close to the
// usual way charts are written.
impl Ord for CoordId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_class()
            .cmp(&other.sort_class())
            .then_with(|| match (self, other) {
                (CoordId::BaseEven(a), CoordId::BaseEven(b)) => a.cmp(b),
                (CoordId::BaseOdd(a), CoordId::BaseOdd(b)) => a.cmp(b),
                (
                    CoordId::Jet { mu, pos, neg },
                    CoordId::Jet {
                        mu: mu2,
                        pos: pos2,
                        neg: neg2,
                    },
                ) => mu.cmp(mu2).then_with(|| pos.cmp(pos2)).then_with(|| neg.cmp(neg2)),
                _ => unreachable!(),
            })
    }
}

impl PartialOrd for CoordId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CoordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoordId::BaseEven(i) => write!(f, "x{i}"),
            CoordId::BaseOdd(j) => write!(f, "x-{j}"),
            CoordId::Jet { mu, pos, neg } => {
                write!(f, "y{mu}")?;
                if !pos.is_empty() || !neg.is_empty() {
                    write!(f, "[")?;
                    let mut first = true;
                    for i in pos.entries() {
                        if !first {
                            write!(f, ",")?;
                        }
                        write!(f, "{i}")?;
                        first = false;
                    }
                    for j in neg {
                        if !first {
                            write!(f, ",")?;
                        }
                        write!(f, "-{j}")?;
                        first = false;
                    }
                    write!(f, "]")?;
                }
                Ok(())
            }
        }
    }
}

/// One normal-form term: an even monomial (sorted, positive exponents) and a
/// strictly increasing Grassmann word of odd coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Term {
    pub evens: Vec<(CoordId, u32)>,
    pub odds: Vec<CoordId>,
}

impl Term {
    pub fn one() -> Self {
        Term::default()
    }

    pub fn parity(&self) -> Parity {
        Parity::from_odd(self.odds.len() % 2 == 1)
    }

    /// Product of two terms in normal form; `None` when an odd coordinate
    /// repeats (nilpotency). The sign counts the odd-odd transpositions of
    /// the interleaving merge.
    fn mul(&self, other: &Term) -> Option<(Term, i8)> {
        let mut evens = self.evens.clone();
        for (c, e) in &other.evens {
            match evens.binary_search_by(|(d, _)| d.cmp(c)) {
                Ok(idx) => evens[idx].1 += e,
                Err(idx) => evens.insert(idx, (c.clone(), *e)),
            }
        }
        let mut odds = Vec::with_capacity(self.odds.len() + other.odds.len());
        let mut sign = 1i8;
        let (a, b) = (&self.odds, &other.odds);
        let (mut i, mut j) = (0usize, 0usize);
        while i < a.len() || j < b.len() {
            if j >= b.len() {
                odds.push(a[i].clone());
                i += 1;
            } else if i >= a.len() {
                odds.push(b[j].clone());
                j += 1;
            } else {
                match a[i].cmp(&b[j]) {
                    Ordering::Equal => return None,
                    Ordering::Less => {
                        odds.push(a[i].clone());
                        i += 1;
                    }
                    Ordering::Greater => {
                        // b[j] crosses the remaining a-tail.
                        if (a.len() - i) % 2 == 1 {
                            sign = -sign;
                        }
                        odds.push(b[j].clone());
                        j += 1;
                    }
                }
            }
        }
        Some((Term { evens, odds }, sign))
    }
}

/// Normal-form element of the coordinate superalgebra.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SuperExpr {
    terms: BTreeMap<Term, Rational>,
}

impl SuperExpr {
    pub fn zero() -> Self {
        SuperExpr::default()
    }

    pub fn one() -> Self {
        SuperExpr::constant(Rational::one())
    }

    pub fn constant(q: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(Term::one(), q);
        }
        SuperExpr { terms }
    }

    pub fn from_int(k: i64) -> Self {
        SuperExpr::constant(Rational::from(BigInt::from(k)))
    }

    pub fn coord(c: CoordId) -> Self {
        let term = match c.parity() {
            Parity::Even => Term {
                evens: vec![(c, 1)],
                odds: vec![],
            },
            Parity::Odd => Term {
                evens: vec![],
                odds: vec![c],
            },
        };
        let mut terms = BTreeMap::new();
        terms.insert(term, Rational::one());
        SuperExpr { terms }
    }

    pub fn monomial(term: Term, coeff: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(term, coeff);
        }
        SuperExpr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert(&mut self, term: Term, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(term) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let v = e.get_mut();
                *v += coeff;
                if v.is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &SuperExpr) -> SuperExpr {
        let mut out = self.clone();
        for (t, q) in &other.terms {
            out.insert(t.clone(), q.clone());
        }
        out
    }

    pub fn sub(&self, other: &SuperExpr) -> SuperExpr {
        let mut out = self.clone();
        for (t, q) in &other.terms {
            out.insert(t.clone(), -q.clone());
        }
        out
    }

    pub fn neg(&self) -> SuperExpr {
        let terms = self
            .terms
            .iter()
            .map(|(t, q)| (t.clone(), -q.clone()))
            .collect();
        SuperExpr { terms }
    }

    pub fn scale(&self, q: &Rational) -> SuperExpr {
        if q.is_zero() {
            return SuperExpr::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(t, c)| (t.clone(), c * q))
            .collect();
        SuperExpr { terms }
    }

    pub fn scale_int(&self, k: i64) -> SuperExpr {
        self.scale(&Rational::from(BigInt::from(k)))
    }

    pub fn mul(&self, other: &SuperExpr) -> SuperExpr {
        let mut out = SuperExpr::zero();
        for (t1, q1) in &self.terms {
            for (t2, q2) in &other.terms {
                if let Some((t, sign)) = t1.mul(t2) {
                    let mut q = q1 * q2;
                    if sign < 0 {
                        q = -q;
                    }
                    out.insert(t, q);
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> SuperExpr {
        let mut out = SuperExpr::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Left partial derivative with respect to `c`.
    pub fn partial(&self, c: &CoordId) -> SuperExpr {
        let mut out = SuperExpr::zero();
        match c.parity() {
            Parity::Even => {
                for (t, q) in &self.terms {
                    if let Ok(idx) = t.evens.binary_search_by(|(d, _)| d.cmp(c)) {
                        let e = t.evens[idx].1;
                        let mut nt = t.clone();
                        if e == 1 {
                            nt.evens.remove(idx);
                        } else {
                            nt.evens[idx].1 = e - 1;
                        }
                        out.insert(nt, q * Rational::from(BigInt::from(e)));
                    }
                }
            }
            Parity::Odd => {
                for (t, q) in &self.terms {
                    if let Some(idx) = t.odds.iter().position(|d| d == c) {
                        let mut nt = t.clone();
                        nt.odds.remove(idx);
                        let mut q = q.clone();
                        if idx % 2 == 1 {
                            q = -q;
                        }
                        out.insert(nt, q);
                    }
                }
            }
        }
        out
    }

    /// Even/odd decomposition witness: `Some(p)` iff every term has parity `p`.
    pub fn parity_of(&self) -> Option<Parity> {
        let mut it = self.terms.keys();
        let first = it.next()?.parity();
        for t in it {
            if t.parity() != first {
                return None;
            }
        }
        Some(first)
    }

    /// The component of the given parity.
    pub fn parity_part(&self, p: Parity) -> SuperExpr {
        let terms = self
            .terms
            .iter()
            .filter(|(t, _)| t.parity() == p)
            .map(|(t, q)| (t.clone(), q.clone()))
            .collect();
        SuperExpr { terms }
    }

    /// Splits into (even, odd) parts; the sum always reproduces `self`.
    pub fn parity_split(&self) -> (SuperExpr, SuperExpr) {
        (self.parity_part(Parity::Even), self.parity_part(Parity::Odd))
    }

    /// All coordinates that occur in the expression.
    pub fn coords(&self) -> BTreeSet<CoordId> {
        let mut out = BTreeSet::new();
        for t in self.terms.keys() {
            for (c, _) in &t.evens {
                out.insert(c.clone());
            }
            for c in &t.odds {
                out.insert(c.clone());
            }
        }
        out
    }

    /// Highest jet order of any coordinate in the expression.
    pub fn max_jet_order(&self) -> usize {
        self.coords().iter().map(|c| c.jet_order()).max().unwrap_or(0)
    }

    /// Degree in a single even coordinate (0 when absent).
    pub fn degree_in(&self, c: &CoordId) -> u32 {
        let mut d = 0;
        for t in self.terms.keys() {
            if let Ok(idx) = t.evens.binary_search_by(|(e, _)| e.cmp(c)) {
                d = d.max(t.evens[idx].1);
            }
        }
        d
    }

    /// Ring-homomorphic substitution. Coordinates absent from the map stay
    /// fixed. Substituted values must match the parity of the coordinate.
    pub fn substitute(&self, map: &BTreeMap<CoordId, SuperExpr>) -> Result<SuperExpr> {
        for (c, v) in map {
            if !v.is_zero() && v.parity_of() != Some(c.parity()) {
                return Err(CasError::ParityViolation(format!(
                    "substitution for {c} does not have its parity"
                )));
            }
        }
        let mut out = SuperExpr::zero();
        for (t, q) in &self.terms {
            let mut acc = SuperExpr::constant(q.clone());
            for (c, e) in &t.evens {
                let factor = match map.get(c) {
                    Some(v) => v.pow(*e),
                    None => SuperExpr::coord(c.clone()).pow(*e),
                };
                acc = acc.mul(&factor);
                if acc.is_zero() {
                    break;
                }
            }
            if !acc.is_zero() {
                for c in &t.odds {
                    let factor = match map.get(c) {
                        Some(v) => v.clone(),
                        None => SuperExpr::coord(c.clone()),
                    };
                    acc = acc.mul(&factor);
                    if acc.is_zero() {
                        break;
                    }
                }
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// The coefficient (as a polynomial in even coordinates) of a Grassmann
    /// word, given as a sorted list of odd coordinates.
    pub fn grassmann_coefficient(&self, word: &[CoordId]) -> SuperExpr {
        let terms = self
            .terms
            .iter()
            .filter(|(t, _)| t.odds == word)
            .map(|(t, q)| {
                (
                    Term {
                        evens: t.evens.clone(),
                        odds: Vec::new(),
                    },
                    q.clone(),
                )
            })
            .collect();
        SuperExpr { terms }
    }

    /// Rational value of a constant expression, if it is one.
    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.terms.len() == 1 {
            let (t, q) = self.terms.iter().next().unwrap();
            if t.evens.is_empty() && t.odds.is_empty() {
                return Some(q.clone());
            }
        }
        None
    }
}

impl fmt::Display for SuperExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (t, q) in &self.terms {
            let neg = q.is_negative();
            let abs = q.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let trivial = t.evens.is_empty() && t.odds.is_empty();
            if !abs.is_one() || trivial {
                write!(f, "{abs}")?;
                if !trivial {
                    write!(f, "*")?;
                }
            }
            let mut sep = false;
            for (c, e) in &t.evens {
                if sep {
                    write!(f, "*")?;
                }
                write!(f, "{c}")?;
                if *e > 1 {
                    write!(f, "^{e}")?;
                }
                sep = true;
            }
            for c in &t.odds {
                if sep {
                    write!(f, "*")?;
                }
                write!(f, "{c}")?;
                sep = true;
            }
        }
        Ok(())
    }
}

/// Context-checked product: validates both operands against the chart
/// before delegating to [`SuperExpr::mul`].
pub fn mul(ctx: &crate::jetcoords::JetContext, a: &SuperExpr, b: &SuperExpr) -> Result<SuperExpr> {
    ctx.check_expr(a)?;
    ctx.check_expr(b)?;
    Ok(a.mul(b))
}

/// Homogeneous parity of `a`, or `None` when inhomogeneous.
pub fn parity_of(a: &SuperExpr) -> Option<Parity> {
    a.parity_of()
}

/// Context-checked left partial derivative.
pub fn partial(ctx: &crate::jetcoords::JetContext, a: &SuperExpr, c: &CoordId) -> Result<SuperExpr> {
    ctx.check_coord(c)?;
    ctx.check_expr(a)?;
    Ok(a.partial(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th(j: u16) -> CoordId {
        CoordId::BaseOdd(j)
    }

    fn x(i: u16) -> CoordId {
        CoordId::BaseEven(i)
    }

    fn e(c: CoordId) -> SuperExpr {
        SuperExpr::coord(c)
    }

    #[test]
    fn anticommutation_of_odd_generators() {
        let a = e(th(1)).mul(&e(th(2)));
        let b = e(th(2)).mul(&e(th(1)));
        assert_eq!(b, a.neg());
        assert!(!a.is_zero());
    }

    #[test]
    fn nilpotency_of_odd_generators() {
        assert!(e(th(1)).mul(&e(th(1))).is_zero());
    }

    #[test]
    fn product_expansion_and_normalization() {
        // (1 + x¹x⁻¹x⁻²)·x¹ = x¹ + (x¹)²x⁻¹x⁻²
        let lhs = SuperExpr::one()
            .add(&e(x(1)).mul(&e(th(1))).mul(&e(th(2))))
            .mul(&e(x(1)));
        let rhs = e(x(1)).add(&e(x(1)).pow(2).mul(&e(th(1))).mul(&e(th(2))));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn parity_classification() {
        assert_eq!(e(x(1)).parity_of(), Some(Parity::Even));
        assert_eq!(e(th(1)).mul(&e(th(2))).parity_of(), Some(Parity::Even));
        assert_eq!(e(x(1)).add(&e(th(1))).parity_of(), None);
    }

    #[test]
    fn left_derivative_signs() {
        let w = e(th(1)).mul(&e(th(2)));
        assert_eq!(w.partial(&th(1)), e(th(2)));
        assert_eq!(w.partial(&th(2)), e(th(1)).neg());
    }

    #[test]
    fn even_power_rule() {
        let f = e(x(1)).pow(2).mul(&e(th(1)));
        assert_eq!(f.partial(&x(1)), e(x(1)).mul(&e(th(1))).scale_int(2));
    }

    #[test]
    fn derivative_of_missing_coordinate_is_zero() {
        assert!(e(x(1)).partial(&th(1)).is_zero());
    }

    #[test]
    fn substitution_is_ring_homomorphic() {
        let f = e(th(1)).mul(&e(th(2))).add(&e(x(1)));
        let mut map = BTreeMap::new();
        map.insert(th(1), e(th(2)));
        // θ1 ↦ θ2 sends θ1θ2 to θ2θ2 = 0.
        assert_eq!(f.substitute(&map).unwrap(), e(x(1)));
    }

    #[test]
    fn substitution_rejects_parity_violation() {
        let f = e(th(1));
        let mut map = BTreeMap::new();
        map.insert(th(1), e(x(1)));
        assert!(f.substitute(&map).is_err());
    }
}
