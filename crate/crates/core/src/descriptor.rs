//! The sheaf-descriptor language.
//!
//! ```text
//! sheaf  := lbsum | ideal | ext | kernel | rank1
//! lbsum  := "O(" int ")" { "+" "O(" int ")" } "@" plane
//! ideal  := "I(" ci ")(" int ")" "@" plane
//! ci     := "[" form "," form "]" | "points(" pt { ";" pt } ")"
//! ext    := "G(c=" int ",k=" int ",Z=" ci ",h=" ( form | "auto" ) ")" "@" plane
//! kernel := "K(F1=" sheaf ",F2=" sheaf ",e=" gluing ")"
//! gluing := "id" | "diag(" rat "," rat ")" | "upper(" rat "," rat "," form ")"
//! rank1  := "R1(side=" ("1"|"2") ",a=" int ",b=" int ")"
//! plane  := "H1" | "H2"
//! pt     := "[" rat ":" rat ":" rat "]"
//! ```
//!
//! Whitespace is insignificant. Forms in `ci` and `h` use the plane variables
//! `u, v, w`; the form in `upper` lives on the line and uses `v, w`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{format_rational, Rational};
use crate::poly::{Poly, Side, VarSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    /// Byte offset into the source; at most the source length.
    pub offset: usize,
    pub expected: Vec<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at line {}, column {}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CiSpec {
    Forms(Poly, Poly),
    Points(Vec<[Rational; 3]>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HSpec {
    Form(Poly),
    Auto,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GluingSpec {
    Identity,
    Diagonal(Rational, Rational),
    Upper(Rational, Rational, Poly),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SheafSpec {
    LbSum { twists: Vec<i64>, plane: Side },
    Ideal { ci: CiSpec, m: i64, plane: Side },
    Ext { c: i64, k: i64, z: CiSpec, h: HSpec, plane: Side },
    Kernel { f1: Box<SheafSpec>, f2: Box<SheafSpec>, e: GluingSpec },
    RankOne { side: Side, a: i64, b: i64 },
}

impl SheafSpec {
    /// The plane a plane sheaf lives on.
    pub fn plane(&self) -> Option<Side> {
        match self {
            SheafSpec::LbSum { plane, .. } | SheafSpec::Ideal { plane, .. } | SheafSpec::Ext { plane, .. } => {
                Some(*plane)
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Descriptor {
    pub source: String,
    pub sheaf: SheafSpec,
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.sheaf.fmt(f)
    }
}

pub fn parse(text: &str) -> Result<Descriptor, ParseError> {
    let mut p = Parser::new(text)?;
    let sheaf = p.sheaf()?;
    p.finish()?;
    Ok(Descriptor { source: text.to_string(), sheaf })
}

pub fn parse_gluing(text: &str) -> Result<GluingSpec, ParseError> {
    let mut p = Parser::new(text)?;
    let g = p.gluing()?;
    p.finish()?;
    Ok(g)
}

/// Parses a polynomial in the given variables, e.g. `"v^2*w - 3*u^3"`.
pub fn parse_poly(text: &str, vars: VarSet) -> Result<Poly> {
    let mut p = Parser::new(text)?;
    let f = p.form(vars)?;
    p.finish()?;
    Ok(f)
}

/// Parses a rational of the form `p` or `p/q`, with an optional sign.
pub fn parse_rat(text: &str) -> Result<Rational> {
    let mut p = Parser::new(text).map_err(Error::from)?;
    let r = p.rat()?;
    p.finish()?;
    Ok(r)
}

// ---------------------------------------------------------------------------
// Printing

fn fmt_ci(ci: &CiSpec, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match ci {
        CiSpec::Forms(a, b) => write!(f, "[{a},{b}]"),
        CiSpec::Points(pts) => {
            write!(f, "points(")?;
            for (i, p) in pts.iter().enumerate() {
                if i > 0 {
                    write!(f, ";")?;
                }
                write!(
                    f,
                    "[{}:{}:{}]",
                    format_rational(&p[0]),
                    format_rational(&p[1]),
                    format_rational(&p[2])
                )?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for GluingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GluingSpec::Identity => write!(f, "id"),
            GluingSpec::Diagonal(a, d) => write!(f, "diag({},{})", format_rational(a), format_rational(d)),
            GluingSpec::Upper(a, d, b) => {
                write!(f, "upper({},{},{b})", format_rational(a), format_rational(d))
            }
        }
    }
}

impl fmt::Display for SheafSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SheafSpec::LbSum { twists, plane } => {
                let parts: Vec<String> = twists.iter().map(|t| format!("O({t})")).collect();
                write!(f, "{}@{plane}", parts.join("+"))
            }
            SheafSpec::Ideal { ci, m, plane } => {
                write!(f, "I(")?;
                fmt_ci(ci, f)?;
                write!(f, ")({m})@{plane}")
            }
            SheafSpec::Ext { c, k, z, h, plane } => {
                write!(f, "G(c={c},k={k},Z=")?;
                fmt_ci(z, f)?;
                match h {
                    HSpec::Auto => write!(f, ",h=auto)@{plane}"),
                    HSpec::Form(p) => write!(f, ",h={p})@{plane}"),
                }
            }
            SheafSpec::Kernel { f1, f2, e } => write!(f, "K(F1={f1},F2={f2},e={e})"),
            SheafSpec::RankOne { side, a, b } => write!(f, "R1(side={},a={a},b={b})", side.index()),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        }
    }
}

struct Token {
    tok: Tok,
    offset: usize,
}

const SYMBOLS: &str = "()[],;:+-*/^=@";

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before, |i| &before[i + 1..]).chars().count() + 1;
    (line, column)
}

fn error_at(src: &str, offset: usize, expected: &[&str], message: impl Into<String>) -> ParseError {
    let offset = offset.min(src.len());
    let (line, column) = position(src, offset);
    ParseError {
        line,
        column,
        offset,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, ch)) = it.peek() {
        if ch.is_whitespace() {
            it.next();
        } else if ch.is_ascii_alphabetic() {
            let mut end = i;
            while let Some(&(j, c)) = it.peek() {
                if c.is_ascii_alphanumeric() {
                    end = j + c.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(src[i..end].to_string()), offset: i });
        } else if ch.is_ascii_digit() {
            let mut end = i;
            while let Some(&(j, c)) = it.peek() {
                if c.is_ascii_digit() {
                    end = j + 1;
                    it.next();
                } else {
                    break;
                }
            }
            let n: BigInt = src[i..end].parse().expect("digit run");
            out.push(Token { tok: Tok::Int(n), offset: i });
        } else if SYMBOLS.contains(ch) {
            out.push(Token { tok: Tok::Sym(ch), offset: i });
            it.next();
        } else {
            return Err(error_at(src, i, &[], format!("unexpected character {ch:?}")));
        }
    }
    out.push(Token { tok: Tok::End, offset: src.len() });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parsing

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        Ok(Parser { src, toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].offset
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(error_at(self.src, self.offset(), expected, format!("unexpected {}", self.peek().describe())))
    }

    fn fail_msg<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(error_at(self.src, offset, &[], message))
    }

    fn sym(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[&format!("`{c}`")])
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => self.fail(&[&format!("`{kw}`")]),
        }
    }

    /// `name "="`
    fn field(&mut self, name: &str) -> Result<(), ParseError> {
        self.keyword(name)?;
        self.sym('=')
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            self.fail(&["end of input"])
        }
    }

    fn natural(&mut self) -> Result<BigInt, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.fail(&["integer"]),
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let start = self.offset();
        let negative = self.eat_sym('-');
        if !negative {
            self.eat_sym('+');
        }
        let n = self.natural()?;
        let n = if negative { -n } else { n };
        match n.to_i64() {
            Some(v) if v.abs() <= 1 << 40 => Ok(v),
            _ => self.fail_msg(start, "integer out of range"),
        }
    }

    fn rat(&mut self) -> Result<Rational, ParseError> {
        let negative = self.eat_sym('-');
        if !negative {
            self.eat_sym('+');
        }
        if !matches!(self.peek(), Tok::Int(_)) {
            return self.fail(&["rational"]);
        }
        let n = self.natural()?;
        let mut r = Rational::from_integer(n);
        if self.eat_sym('/') {
            let at = self.offset();
            let d = self.natural()?;
            if d.is_zero() {
                return self.fail_msg(at, "zero denominator");
            }
            r /= Rational::from_integer(d);
        }
        Ok(if negative { -r } else { r })
    }

    fn plane(&mut self) -> Result<Side, ParseError> {
        let side = match self.peek() {
            Tok::Ident(s) if s == "H1" => Side::H1,
            Tok::Ident(s) if s == "H2" => Side::H2,
            _ => return self.fail(&["`H1`", "`H2`"]),
        };
        self.bump();
        Ok(side)
    }

    fn sheaf(&mut self) -> Result<SheafSpec, ParseError> {
        const START: &[&str] = &["`O`", "`I`", "`G`", "`K`", "`R1`"];
        let head = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.fail(START),
        };
        match head.as_str() {
            "O" => self.lbsum(),
            "I" => self.ideal(),
            "G" => self.ext(),
            "K" => self.kernel(),
            "R1" => self.rank1(),
            _ => self.fail(START),
        }
    }

    fn lbsum(&mut self) -> Result<SheafSpec, ParseError> {
        let mut twists = Vec::new();
        loop {
            self.keyword("O")?;
            self.sym('(')?;
            twists.push(self.int()?);
            self.sym(')')?;
            if !self.eat_sym('+') {
                break;
            }
        }
        if *self.peek() != Tok::Sym('@') {
            return self.fail(&["`+`", "`@`"]);
        }
        self.sym('@')?;
        let plane = self.plane()?;
        Ok(SheafSpec::LbSum { twists, plane })
    }

    fn ideal(&mut self) -> Result<SheafSpec, ParseError> {
        self.keyword("I")?;
        self.sym('(')?;
        let ci = self.ci()?;
        self.sym(')')?;
        self.sym('(')?;
        let m = self.int()?;
        self.sym(')')?;
        self.sym('@')?;
        let plane = self.plane()?;
        Ok(SheafSpec::Ideal { ci, m, plane })
    }

    fn ext(&mut self) -> Result<SheafSpec, ParseError> {
        self.keyword("G")?;
        self.sym('(')?;
        self.field("c")?;
        let c = self.int()?;
        self.sym(',')?;
        self.field("k")?;
        let k = self.int()?;
        self.sym(',')?;
        self.field("Z")?;
        let z = self.ci()?;
        self.sym(',')?;
        self.field("h")?;
        let h = match self.peek() {
            Tok::Ident(s) if s == "auto" => {
                self.bump();
                HSpec::Auto
            }
            _ => HSpec::Form(self.form(VarSet::Plane)?),
        };
        self.sym(')')?;
        self.sym('@')?;
        let plane = self.plane()?;
        Ok(SheafSpec::Ext { c, k, z, h, plane })
    }

    fn kernel(&mut self) -> Result<SheafSpec, ParseError> {
        self.keyword("K")?;
        self.sym('(')?;
        self.field("F1")?;
        let at1 = self.offset();
        let f1 = self.sheaf()?;
        self.sym(',')?;
        self.field("F2")?;
        let at2 = self.offset();
        let f2 = self.sheaf()?;
        self.sym(',')?;
        self.field("e")?;
        let e = self.gluing()?;
        self.sym(')')?;
        let p1 = match f1.plane() {
            Some(p) => p,
            None => return self.fail_msg(at1, "kernel components must be plane sheaves"),
        };
        let p2 = match f2.plane() {
            Some(p) => p,
            None => return self.fail_msg(at2, "kernel components must be plane sheaves"),
        };
        if p1 == p2 {
            return self.fail_msg(at2, "kernel components must lie on different planes");
        }
        Ok(SheafSpec::Kernel { f1: Box::new(f1), f2: Box::new(f2), e })
    }

    fn rank1(&mut self) -> Result<SheafSpec, ParseError> {
        self.keyword("R1")?;
        self.sym('(')?;
        self.field("side")?;
        let at = self.offset();
        let side = match self.peek() {
            Tok::Int(n) if n.is_one() => Side::H1,
            Tok::Int(n) if *n == BigInt::from(2) => Side::H2,
            _ => return Err(error_at(self.src, at, &["`1`", "`2`"], format!("unexpected {}", self.peek().describe()))),
        };
        self.bump();
        self.sym(',')?;
        self.field("a")?;
        let a = self.int()?;
        self.sym(',')?;
        self.field("b")?;
        let b = self.int()?;
        self.sym(')')?;
        Ok(SheafSpec::RankOne { side, a, b })
    }

    fn gluing(&mut self) -> Result<GluingSpec, ParseError> {
        const START: &[&str] = &["`id`", "`diag`", "`upper`"];
        let head = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.fail(START),
        };
        match head.as_str() {
            "id" => {
                self.bump();
                Ok(GluingSpec::Identity)
            }
            "diag" => {
                self.bump();
                self.sym('(')?;
                let a = self.rat()?;
                self.sym(',')?;
                let d = self.rat()?;
                self.sym(')')?;
                Ok(GluingSpec::Diagonal(a, d))
            }
            "upper" => {
                self.bump();
                self.sym('(')?;
                let a = self.rat()?;
                self.sym(',')?;
                let d = self.rat()?;
                self.sym(',')?;
                let b = self.form(VarSet::Line)?;
                self.sym(')')?;
                Ok(GluingSpec::Upper(a, d, b))
            }
            _ => self.fail(START),
        }
    }

    fn ci(&mut self) -> Result<CiSpec, ParseError> {
        match self.peek() {
            Tok::Sym('[') => {
                self.bump();
                let a = self.form(VarSet::Plane)?;
                self.sym(',')?;
                let b = self.form(VarSet::Plane)?;
                self.sym(']')?;
                Ok(CiSpec::Forms(a, b))
            }
            Tok::Ident(s) if s == "points" => {
                self.bump();
                self.sym('(')?;
                let mut pts = vec![self.point()?];
                while self.eat_sym(';') {
                    pts.push(self.point()?);
                }
                if *self.peek() != Tok::Sym(')') {
                    return self.fail(&["`;`", "`)`"]);
                }
                self.bump();
                Ok(CiSpec::Points(pts))
            }
            _ => self.fail(&["`[`", "`points`"]),
        }
    }

    fn point(&mut self) -> Result<[Rational; 3], ParseError> {
        self.sym('[')?;
        let a = self.rat()?;
        self.sym(':')?;
        let b = self.rat()?;
        self.sym(':')?;
        let c = self.rat()?;
        self.sym(']')?;
        Ok([a, b, c])
    }

    fn form(&mut self, vars: VarSet) -> Result<Poly, ParseError> {
        let negative = self.eat_sym('-');
        if !negative {
            self.eat_sym('+');
        }
        let first = self.term(vars)?;
        let mut acc = if negative { first.neg() } else { first };
        loop {
            if self.eat_sym('+') {
                acc = acc.add(&self.term(vars)?);
            } else if self.eat_sym('-') {
                acc = acc.sub(&self.term(vars)?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self, vars: VarSet) -> Result<Poly, ParseError> {
        let mut acc = self.factor(vars)?;
        while self.eat_sym('*') {
            acc = acc.mul(&self.factor(vars)?);
        }
        Ok(acc)
    }

    fn factor(&mut self, vars: VarSet) -> Result<Poly, ParseError> {
        let base = match self.peek().clone() {
            Tok::Int(_) => {
                let r = self.rat()?;
                return Ok(Poly::constant(vars, r));
            }
            Tok::Ident(name) => match vars.index_of(&name) {
                Some(i) => {
                    self.bump();
                    Poly::var(vars, i)
                }
                None => {
                    let msg = format!("unknown variable `{name}` (allowed: {})", vars.names().join(", "));
                    return self.fail_msg(self.offset(), msg);
                }
            },
            Tok::Sym('(') => {
                self.bump();
                let f = self.form(vars)?;
                self.sym(')')?;
                f
            }
            _ => return self.fail(&["coefficient", "variable", "`(`"]),
        };
        if self.eat_sym('^') {
            let at = self.offset();
            if !matches!(self.peek(), Tok::Int(_)) {
                return self.fail(&["exponent"]);
            }
            let e = self.natural()?;
            match e.to_u32() {
                Some(e) if e <= 64 => Ok(base.pow(e)),
                _ => self.fail_msg(at, "exponent out of range"),
            }
        } else {
            Ok(base)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    #[test]
    fn line_bundle_sum() {
        let d = parse("O(3)+O(0)@H1").unwrap();
        assert_eq!(d.sheaf, SheafSpec::LbSum { twists: vec![3, 0], plane: Side::H1 });
        assert_eq!(d.to_string(), "O(3)+O(0)@H1");
    }

    #[test]
    fn kernel_request() {
        let text = "K(F1=O(3)+O(0)@H1,F2=G(c=3,k=1,Z=[u,v*w],h=v^2)@H2,e=id)";
        let d = parse(text).unwrap();
        match &d.sheaf {
            SheafSpec::Kernel { f1, f2, e } => {
                assert_eq!(f1.plane(), Some(Side::H1));
                assert_eq!(f2.plane(), Some(Side::H2));
                assert_eq!(*e, GluingSpec::Identity);
                match f2.as_ref() {
                    SheafSpec::Ext { c: 3, k: 1, z: CiSpec::Forms(a, b), h: HSpec::Form(h), .. } => {
                        assert_eq!(a.to_string(), "u");
                        assert_eq!(b.to_string(), "v*w");
                        assert_eq!(h.to_string(), "v^2");
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(d.to_string(), text);
    }

    #[test]
    fn semantic_errors_are_not_syntax_errors() {
        // deg Z = 1 but c - k = -1; rejected later by the constructor.
        assert!(parse("G(c=1,k=2,Z=[u,v],h=auto)@H2").is_ok());
    }

    #[test]
    fn other_forms() {
        let d = parse(" I( points([0:1:2]; [0:1:-1/2]) )(2) @ H2").unwrap();
        match d.sheaf {
            SheafSpec::Ideal { ci: CiSpec::Points(p), m: 2, plane: Side::H2 } => {
                assert_eq!(p[1], [rat(0), rat(1), crate::linalg::rat_frac(-1, 2)]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let d = parse("R1(side=2,a=-1,b=0)").unwrap();
        assert_eq!(d.sheaf, SheafSpec::RankOne { side: Side::H2, a: -1, b: 0 });
        let g = parse_gluing("upper(1,-2/3,v^3 - w*v^2)").unwrap();
        assert_eq!(g.to_string(), "upper(1,-2/3,v^3 - v^2*w)");
    }

    #[test]
    fn positioned_errors() {
        let e = parse("O(3)+O(0)@H3").unwrap_err();
        assert_eq!((e.line, e.column), (1, 11));
        assert_eq!(e.expected, ["`H1`", "`H2`"]);

        let e = parse("K(F1=O(0)@H1,\nF2=O(0)@H1,e=id)").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("different planes"));

        let e = parse("G(c=3,k=1,Z=[u,x],h=auto)@H2").unwrap_err();
        assert!(e.message.contains("unknown variable"));
        assert_eq!(e.column, 16);

        let e = parse("O(1)@H1 trailing").unwrap_err();
        assert_eq!(e.expected, ["end of input"]);

        let e = parse("").unwrap_err();
        assert_eq!(e.offset, 0);

        let e = parse("O(1").unwrap_err();
        assert_eq!(e.offset, 3);

        assert!(parse("O(1)@H1 #").is_err());
    }

    #[test]
    fn polys() {
        let f = parse_poly("(u + v)^2 - 2*u*v", VarSet::Plane).unwrap();
        assert_eq!(f.to_string(), "u^2 + v^2");
        assert!(parse_poly("u", VarSet::Line).is_err());
        assert_eq!(parse_rat("-3/6").unwrap(), crate::linalg::rat_frac(-1, 2));
    }
}
