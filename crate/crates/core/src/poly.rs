//! Sparse polynomials with rational coefficients over the three coordinate
//! systems in use: the line `L` (`v, w`), a plane (`u, v, w`, with `L = {u = 0}`)
//! and ambient `P^3` (`x, y, z, w`, with `H1 = {x = 0}`, `H2 = {y = 0}`).
//!
//! On `H_i` the plane coordinates are `(u, v, w) = (equation of the other
//! plane, z, w)`: on `H1` that is `u = y`, on `H2` it is `u = x`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{format_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarSet {
    Line,
    Plane,
    Ambient,
}

impl VarSet {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            VarSet::Line => &["v", "w"],
            VarSet::Plane => &["u", "v", "w"],
            VarSet::Ambient => &["x", "y", "z", "w"],
        }
    }

    pub fn len(self) -> usize {
        self.names().len()
    }

    pub fn index_of(self, name: &str) -> Option<usize> {
        self.names().iter().position(|n| *n == name)
    }
}

/// One of the two planes of `X = H1 ∪ H2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    H1,
    H2,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::H1 => Side::H2,
            Side::H2 => Side::H1,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Side::H1 => 1,
            Side::H2 => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Side> {
        match i {
            1 => Some(Side::H1),
            2 => Some(Side::H2),
            _ => None,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H{}", self.index())
    }
}

pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    vars: VarSet,
    terms: BTreeMap<Exponents, Rational>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl Poly {
    pub fn zero(vars: VarSet) -> Self {
        Poly { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: VarSet, c: Rational) -> Self {
        Self::monomial(vars, vec![0; vars.len()], c)
    }

    pub fn var(vars: VarSet, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(vars, e, Rational::one())
    }

    pub fn var_named(vars: VarSet, name: &str) -> Self {
        Self::var(vars, vars.index_of(name).expect("known variable name"))
    }

    pub fn monomial(vars: VarSet, exps: Exponents, c: Rational) -> Self {
        assert_eq!(exps.len(), vars.len());
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Poly { vars, terms }
    }

    pub fn from_terms(vars: VarSet, terms: impl IntoIterator<Item = (Exponents, Rational)>) -> Self {
        let mut p = Poly::zero(vars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exponents, c: Rational) {
        debug_assert_eq!(e.len(), self.vars.len());
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> VarSet {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponents, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, e: &[u32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree if the polynomial is nonzero and homogeneous.
    pub fn degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let d = it.next()?;
        it.all(|x| x == d).then_some(d)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    /// Zero, or homogeneous of degree `d`.
    pub fn is_form_of_degree(&self, d: i64) -> bool {
        self.is_zero() || self.degree().map(i64::from) == Some(d)
    }

    fn check_vars(&self, other: &Poly) {
        assert_eq!(self.vars, other.vars, "mixed coordinate systems");
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check_vars(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly { vars: self.vars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.vars);
        }
        Poly { vars: self.vars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check_vars(other);
        let mut out = Poly::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(self.vars, Rational::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.vars.len());
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }

    /// Restriction of a plane polynomial to `L = {u = 0}`.
    pub fn restrict_to_line(&self) -> Poly {
        assert_eq!(self.vars, VarSet::Plane);
        Poly::from_terms(
            VarSet::Line,
            self.terms.iter().filter(|(e, _)| e[0] == 0).map(|(e, c)| (vec![e[1], e[2]], c.clone())),
        )
    }

    /// A polynomial in `v, w` viewed on the plane.
    pub fn lift_to_plane(&self) -> Poly {
        assert_eq!(self.vars, VarSet::Line);
        Poly::from_terms(VarSet::Plane, self.terms.iter().map(|(e, c)| (vec![0, e[0], e[1]], c.clone())))
    }

    /// Restriction of an ambient polynomial to the plane `side`, in that
    /// plane's `(u, v, w)` coordinates.
    pub fn restrict_to_plane(&self, side: Side) -> Poly {
        assert_eq!(self.vars, VarSet::Ambient);
        let (killed, kept) = match side {
            Side::H1 => (0, 1),
            Side::H2 => (1, 0),
        };
        Poly::from_terms(
            VarSet::Plane,
            self.terms
                .iter()
                .filter(|(e, _)| e[killed] == 0)
                .map(|(e, c)| (vec![e[kept], e[2], e[3]], c.clone())),
        )
    }

    /// A plane polynomial on `side` written in ambient coordinates.
    pub fn embed_from_plane(&self, side: Side) -> Poly {
        assert_eq!(self.vars, VarSet::Plane);
        Poly::from_terms(
            VarSet::Ambient,
            self.terms.iter().map(|(e, c)| {
                let amb = match side {
                    Side::H1 => vec![0, e[0], e[1], e[2]],
                    Side::H2 => vec![e[0], 0, e[1], e[2]],
                };
                (amb, c.clone())
            }),
        )
    }

    /// Exact quotient by the variable with index `i`, if every term contains it.
    pub fn div_var(&self, i: usize) -> Option<Poly> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            if e[i] == 0 {
                return None;
            }
            let mut e = e.clone();
            e[i] -= 1;
            terms.push((e, c.clone()));
        }
        Some(Poly::from_terms(self.vars, terms))
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        self.check_vars(d);
        let (lead_e, lead_c) = d.terms.iter().next_back()?;
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.vars);
        while let Some((e, c)) = rem.terms.iter().next_back() {
            if e.iter().zip(lead_e).any(|(a, b)| a < b) {
                return None;
            }
            let qe: Exponents = e.iter().zip(lead_e).map(|(a, b)| a - b).collect();
            let qc = c / lead_c;
            let t = Poly::monomial(self.vars, qe, qc);
            rem = rem.sub(&t.mul(d));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    /// Terms in descending lexicographic order of exponent vectors.
    pub fn terms_desc(&self) -> impl Iterator<Item = (&Exponents, &Rational)> {
        self.terms.iter().rev()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let names = self.vars.names();
        for (k, (e, c)) in self.terms_desc().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            }
            let mut factors: Vec<String> = Vec::new();
            for (name, &p) in names.iter().zip(e) {
                match p {
                    0 => {}
                    1 => factors.push((*name).to_string()),
                    _ => factors.push(format!("{name}^{p}")),
                }
            }
            if factors.is_empty() {
                write!(f, "{}", format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&abs), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// A homogeneous polynomial with a definite degree (the zero form carries its
/// degree explicitly).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Form {
    poly: Poly,
    degree: u32,
}

impl Form {
    pub fn new(poly: Poly) -> Result<Form> {
        match poly.degree() {
            Some(degree) => Ok(Form { poly, degree }),
            None if poly.is_zero() => Err(Error::DegreeMismatch("the zero polynomial has no degree".into())),
            None => Err(Error::DegreeMismatch(format!("`{poly}` is not homogeneous"))),
        }
    }

    pub fn with_degree(poly: Poly, degree: u32) -> Result<Form> {
        if poly.is_form_of_degree(i64::from(degree)) {
            Ok(Form { poly, degree })
        } else {
            Err(Error::DegreeMismatch(format!("`{poly}` is not a form of degree {degree}")))
        }
    }

    pub fn zero(vars: VarSet, degree: u32) -> Form {
        Form { poly: Poly::zero(vars), degree }
    }

    pub fn var(vars: VarSet, name: &str) -> Form {
        Form { poly: Poly::var_named(vars, name), degree: 1 }
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn vars(&self) -> VarSet {
        self.poly.vars()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn mul(&self, other: &Form) -> Form {
        Form { poly: self.poly.mul(&other.poly), degree: self.degree + other.degree }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.fmt(f)
    }
}

/// All exponent vectors of `n` non-negative integers summing to `d`, in
/// descending lexicographic order.
pub fn exponents_of_degree(n: usize, d: u32) -> Vec<Exponents> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Exponents>) {
        if n == 1 {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=d).rev() {
            prefix.push(a);
            rec(n - 1, d - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}
