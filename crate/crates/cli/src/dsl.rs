//! Problem-definition language: declarations, a Lagrangian expression,
//! optional symmetry fields, sections, an integration box and an output
//! format.
//!
//! ```text
//! # supermechanics
//! base even t;
//! base odd s;
//! fiber even y;
//! fiber odd z;
//! lagrangian = y[t]^2 / 2;
//! symmetry D = d/dt + d/ds;
//! section sigma { y = t^2; z = t*s; }
//! box t = [0, 1];
//! format text;
//! ```
//!
//! Jet symbols use brackets: `y[t]`, `y[t,t]`, `z[s]`, `z[-1,-2]`. Positive
//! entries (base-even names) commute; negative entries are order-sensitive
//! and are canonicalized with the reordering sign, so `z[-2,-1] = -z[-1,-2]`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use supercartan_core::jetcoords::{jet_coord, JetContext, Section, VectorField};
use supercartan_core::render::NameTable;
use supercartan_core::superalg::{
    CoordId, MultiIndexNeg, MultiIndexPos, Parity, Rational, SuperExpr,
};

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone)]
pub struct ParseError {
    pub message: String,
    pub pos: Pos,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.pos.line, self.pos.col, self.message)
    }
}

type PResult<T> = Result<T, ParseError>;

fn err<T>(pos: Pos, message: impl Into<String>) -> PResult<T> {
    Err(ParseError {
        message: message.into(),
        pos,
    })
}

/// Output format of the reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Latex,
    Json,
}

/// A fully resolved problem file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub ctx: JetContext,
    pub names: NameTable,
    pub lagrangian: SuperExpr,
    pub symmetries: Vec<(String, VectorField)>,
    pub sections: Vec<(String, Section)>,
    pub boxes: BTreeMap<u16, (Rational, Rational)>,
    pub format: Option<Format>,
}

// --- lexer -------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    /// `d/d<name>`
    DOp(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Equals,
    Comma,
    Semi,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(v) => write!(f, "number `{v}`"),
            Tok::DOp(s) => write!(f, "`d/d{s}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Equals => write!(f, "`=`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn lex(src: &str) -> PResult<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;
    let here = |line, col| Pos { line, col };
    while i < chars.len() {
        let c = chars[i];
        let pos = here(line, col);
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
            }
            ' ' | '\t' | '\r' => {
                col += 1;
                i += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '0'..='9' => {
                let mut v = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    v.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                out.push((Tok::Int(v.parse().unwrap()), pos));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut v = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    v.push(chars[i]);
                    i += 1;
                    col += 1;
                }
                // `d/d<name>` lexes as a derivative glyph
                if v == "d" && i + 1 < chars.len() && chars[i] == '/' && chars[i + 1] == 'd' {
                    let mut name = String::new();
                    let mut j = i + 2;
                    let mut extra = 2u32;
                    while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                        name.push(chars[j]);
                        j += 1;
                        extra += 1;
                    }
                    if name.is_empty() {
                        return err(pos, "expected a coordinate name after `d/d`");
                    }
                    i = j;
                    col += extra;
                    out.push((Tok::DOp(name), pos));
                } else {
                    out.push((Tok::Ident(v), pos));
                }
            }
            _ => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '=' => Tok::Equals,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    _ => return err(pos, format!("unexpected character `{c}`")),
                };
                out.push((tok, pos));
                i += 1;
                col += 1;
            }
        }
    }
    out.push((Tok::Eof, here(line, col)));
    Ok(out)
}

// --- symbol table -------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    BaseEven(u16),
    BaseOdd(u16),
    Fiber(i16),
}

#[derive(Debug, Default)]
struct Symbols {
    slots: BTreeMap<String, Slot>,
    base_even: Vec<String>,
    base_odd: Vec<String>,
    fiber_even: Vec<String>,
    fiber_odd: Vec<String>,
}

impl Symbols {
    fn declare(&mut self, name: &str, kind: &str, parity: Parity, pos: Pos) -> PResult<()> {
        if self.slots.contains_key(name) {
            return err(pos, format!("coordinate `{name}` is declared twice"));
        }
        let slot = match (kind, parity) {
            ("base", Parity::Even) => {
                self.base_even.push(name.to_string());
                Slot::BaseEven(self.base_even.len() as u16)
            }
            ("base", Parity::Odd) => {
                self.base_odd.push(name.to_string());
                Slot::BaseOdd(self.base_odd.len() as u16)
            }
            ("fiber", Parity::Even) => {
                self.fiber_even.push(name.to_string());
                Slot::Fiber(self.fiber_even.len() as i16)
            }
            ("fiber", Parity::Odd) => {
                self.fiber_odd.push(name.to_string());
                Slot::Fiber(-(self.fiber_odd.len() as i16))
            }
            _ => unreachable!(),
        };
        self.slots.insert(name.to_string(), slot);
        Ok(())
    }

    fn names(&self) -> NameTable {
        NameTable {
            base_even: self.base_even.clone(),
            base_odd: self.base_odd.clone(),
            fiber_even: self.fiber_even.clone(),
            fiber_odd: self.fiber_odd.clone(),
        }
    }
}

// --- parser --------------------------------------------------------------------

pub struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    syms: Symbols,
    allow_nilpotent: bool,
}

/// Parses the problem text; `allow_nilpotent` downgrades powers of odd
/// symbols from an error to the value 0.
pub fn parse_problem(src: &str, allow_nilpotent: bool) -> PResult<ProblemFile> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        syms: Symbols::default(),
        allow_nilpotent,
    };
    p.file()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            err(self.pos(), format!("expected {want}, found {}", self.peek()))
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(s) => Ok((s, pos)),
            other => err(pos, format!("expected an identifier, found {other}")),
        }
    }

    fn file(&mut self) -> PResult<ProblemFile> {
        // declaration block first
        let mut lagrangian: Option<SuperExpr> = None;
        let mut raw_symmetries: Vec<(String, Vec<(SuperExpr, String, Pos)>)> = Vec::new();
        let mut raw_sections: Vec<(String, Vec<(String, SuperExpr, Pos)>)> = Vec::new();
        let mut boxes_by_name: Vec<(String, Rational, Rational, Pos)> = Vec::new();
        let mut format = None;

        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) if kw == "base" || kw == "fiber" => {
                    self.bump();
                    let (par_word, ppos) = self.expect_ident()?;
                    let parity = match par_word.as_str() {
                        "even" => Parity::Even,
                        "odd" => Parity::Odd,
                        _ => return err(ppos, "expected `even` or `odd`"),
                    };
                    loop {
                        let (name, npos) = self.expect_ident()?;
                        self.syms.declare(&name, &kw, parity, npos)?;
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::Semi)?;
                }
                Tok::Ident(kw) if kw == "lagrangian" => {
                    let kpos = self.pos();
                    self.bump();
                    self.expect(Tok::Equals)?;
                    if lagrangian.is_some() {
                        return err(kpos, "lagrangian is declared twice");
                    }
                    lagrangian = Some(self.expr()?);
                    self.expect(Tok::Semi)?;
                }
                Tok::Ident(kw) if kw == "symmetry" => {
                    self.bump();
                    let (name, _) = self.expect_ident()?;
                    self.expect(Tok::Equals)?;
                    let terms = self.field_expr()?;
                    self.expect(Tok::Semi)?;
                    raw_symmetries.push((name, terms));
                }
                Tok::Ident(kw) if kw == "section" => {
                    self.bump();
                    let (name, _) = self.expect_ident()?;
                    self.expect(Tok::LBrace)?;
                    let mut comps = Vec::new();
                    while *self.peek() != Tok::RBrace {
                        let (cname, cpos) = self.expect_ident()?;
                        self.expect(Tok::Equals)?;
                        let v = self.expr()?;
                        self.expect(Tok::Semi)?;
                        comps.push((cname, v, cpos));
                    }
                    self.expect(Tok::RBrace)?;
                    raw_sections.push((name, comps));
                }
                Tok::Ident(kw) if kw == "box" => {
                    self.bump();
                    let (name, npos) = self.expect_ident()?;
                    self.expect(Tok::Equals)?;
                    self.expect(Tok::LBracket)?;
                    let lo = self.rational()?;
                    self.expect(Tok::Comma)?;
                    let hi = self.rational()?;
                    self.expect(Tok::RBracket)?;
                    self.expect(Tok::Semi)?;
                    boxes_by_name.push((name, lo, hi, npos));
                }
                Tok::Ident(kw) if kw == "format" => {
                    self.bump();
                    let (fmt, fpos) = self.expect_ident()?;
                    format = Some(match fmt.as_str() {
                        "text" => Format::Text,
                        "latex" => Format::Latex,
                        "json" => Format::Json,
                        _ => return err(fpos, "expected `text`, `latex` or `json`"),
                    });
                    self.expect(Tok::Semi)?;
                }
                other => {
                    return err(
                        self.pos(),
                        format!("expected a declaration keyword, found {other}"),
                    )
                }
            }
        }

        let m = self.syms.base_even.len() as u16;
        let n = self.syms.base_odd.len() as u16;
        let r = self.syms.fiber_even.len() as u16;
        let s = self.syms.fiber_odd.len() as u16;
        let ctx = JetContext::new(m, n, r, s, n + 2).map_err(|e| ParseError {
            message: e.to_string(),
            pos: Pos { line: 1, col: 1 },
        })?;
        let Some(lagrangian) = lagrangian else {
            return err(Pos { line: 1, col: 1 }, "missing `lagrangian = …;` statement");
        };
        if lagrangian.max_jet_order() > 1 {
            return err(
                Pos { line: 1, col: 1 },
                "the Lagrangian must be first-order (jet brackets with at most one entry)",
            );
        }

        let mut symmetries = Vec::new();
        for (name, terms) in raw_symmetries {
            let mut comps: BTreeMap<CoordId, SuperExpr> = BTreeMap::new();
            for (coeff, dir, dpos) in terms {
                let slot = self.syms.slots.get(&dir).copied().ok_or(ParseError {
                    message: format!("unknown coordinate `{dir}` in d/d{dir}"),
                    pos: dpos,
                })?;
                let c = slot_coord(slot);
                let e = comps.entry(c).or_insert_with(SuperExpr::zero);
                *e = e.add(&coeff);
            }
            let field = VectorField::new(comps);
            if !field.is_field_on_total_space() || !field.is_projectable() {
                return err(
                    Pos { line: 1, col: 1 },
                    format!("symmetry `{name}` must be a projectable field on base and fiber coordinates"),
                );
            }
            symmetries.push((name, field));
        }

        let mut sections = Vec::new();
        for (name, comps) in raw_sections {
            let mut map = BTreeMap::new();
            for (cname, v, cpos) in comps {
                let Some(Slot::Fiber(mu)) = self.syms.slots.get(&cname).copied() else {
                    return err(cpos, format!("`{cname}` is not a fiber coordinate"));
                };
                map.insert(mu, v);
            }
            let section = Section::new(&ctx, map).map_err(|e| ParseError {
                message: format!("section `{name}`: {e}"),
                pos: Pos { line: 1, col: 1 },
            })?;
            sections.push((name, section));
        }

        let mut boxes = BTreeMap::new();
        for (name, lo, hi, npos) in boxes_by_name {
            let Some(Slot::BaseEven(i)) = self.syms.slots.get(&name).copied() else {
                return err(npos, format!("box bounds need a base even coordinate, got `{name}`"));
            };
            boxes.insert(i, (lo, hi));
        }

        Ok(ProblemFile {
            names: self.syms.names(),
            ctx,
            lagrangian,
            symmetries,
            sections,
            boxes,
            format,
        })
    }

    fn rational(&mut self) -> PResult<Rational> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let pos = self.pos();
        let Tok::Int(num) = self.bump() else {
            return err(pos, "expected a number");
        };
        let mut q = Rational::from(num);
        if *self.peek() == Tok::Slash {
            self.bump();
            let pos = self.pos();
            let Tok::Int(den) = self.bump() else {
                return err(pos, "expected a denominator");
            };
            if den == BigInt::from(0) {
                return err(pos, "zero denominator");
            }
            q /= Rational::from(den);
        }
        Ok(if neg { -q } else { q })
    }

    /// `coeff? d/dname (± coeff? d/dname)*`
    fn field_expr(&mut self) -> PResult<Vec<(SuperExpr, String, Pos)>> {
        let mut out = Vec::new();
        let mut sign = 1i64;
        if *self.peek() == Tok::Minus {
            self.bump();
            sign = -1;
        }
        loop {
            let term = self.field_term()?;
            out.push((term.0.scale_int(sign), term.1, term.2));
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    sign = 1;
                }
                Tok::Minus => {
                    self.bump();
                    sign = -1;
                }
                _ => break,
            }
        }
        Ok(out)
    }

    fn field_term(&mut self) -> PResult<(SuperExpr, String, Pos)> {
        // either `d/dname` or `factor * … * d/dname`
        if let Tok::DOp(name) = self.peek().clone() {
            let pos = self.pos();
            self.bump();
            return Ok((SuperExpr::one(), name, pos));
        }
        let mut coeff = self.factor()?;
        loop {
            match self.peek().clone() {
                Tok::Star => {
                    self.bump();
                    if let Tok::DOp(name) = self.peek().clone() {
                        let pos = self.pos();
                        self.bump();
                        return Ok((coeff, name, pos));
                    }
                    let f = self.factor()?;
                    coeff = coeff.mul(&f);
                }
                Tok::DOp(name) => {
                    let pos = self.pos();
                    self.bump();
                    return Ok((coeff, name, pos));
                }
                other => {
                    return err(
                        self.pos(),
                        format!("expected `* d/d<coordinate>` in a symmetry term, found {other}"),
                    )
                }
            }
        }
    }

    fn expr(&mut self) -> PResult<SuperExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> PResult<SuperExpr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.factor()?);
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    let rhs = self.factor()?;
                    let Some(q) = rhs.as_constant() else {
                        return err(pos, "division is only defined by nonzero constants");
                    };
                    if num_traits::Zero::is_zero(&q) {
                        return err(pos, "division by zero");
                    }
                    acc = acc.scale(&(Rational::from(BigInt::from(1)) / q));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> PResult<SuperExpr> {
        match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                Ok(self.factor()?.neg())
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> PResult<SuperExpr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let pos = self.pos();
            let Tok::Int(e) = self.bump() else {
                return err(pos, "expected a nonnegative integer exponent");
            };
            let e: u32 = e.try_into().map_err(|_| ParseError {
                message: "exponent too large".into(),
                pos,
            })?;
            if e >= 2 && base.parity_of() == Some(Parity::Odd) {
                if self.allow_nilpotent {
                    return Ok(SuperExpr::zero());
                }
                return err(
                    pos,
                    "an odd quantity squared is zero; pass --allow-nilpotent to accept this",
                );
            }
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> PResult<SuperExpr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(v) => Ok(SuperExpr::constant(Rational::from(v))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let slot = self.syms.slots.get(&name).copied().ok_or(ParseError {
                    message: format!("unknown coordinate `{name}`"),
                    pos,
                })?;
                if *self.peek() == Tok::LBracket {
                    let bpos = self.pos();
                    self.bump();
                    let Slot::Fiber(mu) = slot else {
                        return err(bpos, format!("`{name}` is a base coordinate and has no jets"));
                    };
                    let mut pos_entries: Vec<u16> = Vec::new();
                    let mut neg_entries: Vec<u16> = Vec::new();
                    loop {
                        let apos = self.pos();
                        match self.bump() {
                            Tok::Ident(ind) => match self.syms.slots.get(&ind).copied() {
                                Some(Slot::BaseEven(i)) => pos_entries.push(i),
                                Some(Slot::BaseOdd(j)) => neg_entries.push(j),
                                _ => {
                                    return err(
                                        apos,
                                        format!("`{ind}` is not a base coordinate"),
                                    )
                                }
                            },
                            Tok::Minus => {
                                let ipos = self.pos();
                                let Tok::Int(j) = self.bump() else {
                                    return err(ipos, "expected an odd index after `-`");
                                };
                                let j: u16 = j.try_into().map_err(|_| ParseError {
                                    message: "odd index out of range".into(),
                                    pos: ipos,
                                })?;
                                if j == 0 || j > self.syms.base_odd.len() as u16 {
                                    return err(
                                        ipos,
                                        format!("odd index -{j} is outside the chart"),
                                    );
                                }
                                neg_entries.push(j);
                            }
                            other => {
                                return err(apos, format!("expected a jet index, found {other}"))
                            }
                        }
                        match self.bump() {
                            Tok::Comma => continue,
                            Tok::RBracket => break,
                            other => {
                                return err(
                                    apos,
                                    format!("expected `,` or `]` in a jet bracket, found {other}"),
                                )
                            }
                        }
                    }
                    // negative entries keep their written order and are
                    // canonicalized with the reordering sign
                    match jet_coord(
                        mu,
                        MultiIndexPos::from_entries(pos_entries),
                        &MultiIndexNeg::from_entries(neg_entries),
                    ) {
                        None => Ok(SuperExpr::zero()),
                        Some((sign, c)) => Ok(SuperExpr::coord(c).scale_int(sign as i64)),
                    }
                } else {
                    Ok(SuperExpr::coord(slot_coord(slot)))
                }
            }
            other => err(pos, format!("expected an expression, found {other}")),
        }
    }
}

fn slot_coord(slot: Slot) -> CoordId {
    match slot {
        Slot::BaseEven(i) => CoordId::BaseEven(i),
        Slot::BaseOdd(j) => CoordId::BaseOdd(j),
        Slot::Fiber(mu) => CoordId::fiber(mu),
    }
}

// --- canonical renderer --------------------------------------------------------

/// Renders a problem back to canonical source text; `parse ∘ render` is the
/// identity on the resolved problem.
pub fn render_problem(p: &ProblemFile) -> String {
    use supercartan_core::render::{expr_text, rational_str};
    let mut out = String::new();
    let names = &p.names;
    if !names.base_even.is_empty() {
        out.push_str(&format!("base even {};\n", names.base_even.join(", ")));
    }
    if !names.base_odd.is_empty() {
        out.push_str(&format!("base odd {};\n", names.base_odd.join(", ")));
    }
    if !names.fiber_even.is_empty() {
        out.push_str(&format!("fiber even {};\n", names.fiber_even.join(", ")));
    }
    if !names.fiber_odd.is_empty() {
        out.push_str(&format!("fiber odd {};\n", names.fiber_odd.join(", ")));
    }
    out.push_str(&format!("lagrangian = {};\n", expr_text(&p.lagrangian, names)));
    for (name, field) in &p.symmetries {
        let mut parts = Vec::new();
        for (c, v) in field.components() {
            let dir = supercartan_core::render::coord_text(c, names);
            parts.push(format!("({}) * d/d{}", expr_text(v, names), dir));
        }
        out.push_str(&format!("symmetry {name} = {};\n", parts.join(" + ")));
    }
    for (name, section) in &p.sections {
        out.push_str(&format!("section {name} {{ "));
        for mu in p.ctx.fiber_mus() {
            let v = section.component(mu);
            if !v.is_zero() {
                out.push_str(&format!(
                    "{} = {}; ",
                    names.fiber_name(mu),
                    expr_text(&v, names)
                ));
            }
        }
        out.push_str("}\n");
    }
    for (i, (lo, hi)) in &p.boxes {
        out.push_str(&format!(
            "box {} = [{}, {}];\n",
            names.base_even_name(*i),
            rational_str(lo),
            rational_str(hi)
        ));
    }
    if let Some(fmt) = p.format {
        out.push_str(&format!(
            "format {};\n",
            match fmt {
                Format::Text => "text",
                Format::Latex => "latex",
                Format::Json => "json",
            }
        ));
    }
    out
}
