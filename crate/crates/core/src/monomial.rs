//! Monomial models for the cohomology of line bundles on `P^1` and `P^2`.
//!
//! `H^0(O(d))` has the monomials of degree `d` as a basis. The top cohomology
//! `H^n(O(d))` has the inverse monomials: exponent vectors with every entry
//! `<= -1` summing to `d`. Multiplication by a form acts on inverse monomials
//! by shifting exponents and discarding any product with an exponent `>= 0`.
//! Bases are listed in descending lexicographic order of exponent vectors.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{RatMatrix, Rational};
use crate::poly::{exponents_of_degree, Form, Poly, VarSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Space {
    P1,
    P2,
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::P1 => 1,
            Space::P2 => 2,
        }
    }

    pub fn vars(self) -> VarSet {
        match self {
            Space::P1 => VarSet::Line,
            Space::P2 => VarSet::Plane,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Space::P1 => "P1",
            Space::P2 => "P2",
        }
    }

    fn nvars(self) -> usize {
        self.dim() + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub exponents: Vec<i64>,
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: &[&str] = if self.exponents.len() == 2 { &["v", "w"] } else { &["u", "v", "w"] };
        let parts: Vec<String> = names
            .iter()
            .zip(&self.exponents)
            .filter(|(_, &e)| e != 0)
            .map(|(n, &e)| if e == 1 { (*n).to_string() } else { format!("{n}^{e}") })
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// A basis of `H^i(space, O(d))`.
#[derive(Clone, Debug)]
pub struct GradedPiece {
    pub space: Space,
    pub coh_index: usize,
    pub twist: i64,
    basis: Vec<Monomial>,
}

impl GradedPiece {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    fn is_top(&self) -> bool {
        self.coh_index == self.space.dim()
    }

    /// Position of a monomial in this basis, if it belongs to it.
    pub fn position(&self, exps: &[i64]) -> Option<usize> {
        if exps.len() != self.space.nvars() || exps.iter().sum::<i64>() != self.twist {
            return None;
        }
        match self.coh_index {
            0 => {
                if exps.iter().any(|&e| e < 0) {
                    return None;
                }
                let e: Vec<u32> = exps.iter().map(|&e| e as u32).collect();
                Some(lex_rank(&e, self.twist as u32))
            }
            i if i == self.space.dim() => {
                if exps.iter().any(|&e| e >= 0) {
                    return None;
                }
                let a: Vec<u32> = exps.iter().map(|&e| (-1 - e) as u32).collect();
                let s = a.iter().sum::<u32>();
                Some(self.basis.len() - 1 - lex_rank(&a, s))
            }
            _ => None,
        }
    }
}

fn binom(n: i64, k: i64) -> usize {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of exponent vectors of length `n` summing to `s`.
fn count(n: usize, s: u32) -> usize {
    binom(i64::from(s) + n as i64 - 1, n as i64 - 1)
}

/// Rank of `e` among exponent vectors of the same length summing to `d`, in
/// descending lexicographic order.
fn lex_rank(e: &[u32], d: u32) -> usize {
    if e.len() <= 1 {
        return 0;
    }
    let head = e[0];
    let before: usize = (head + 1..=d).map(|a| count(e.len() - 1, d - a)).sum();
    before + lex_rank(&e[1..], d - head)
}

pub fn cohomology_dim(space: Space, i: usize, d: i64) -> Result<usize> {
    if i > space.dim() {
        return Err(Error::InvalidIndex { space: space.name(), index: i });
    }
    Ok(match (space, i) {
        (Space::P2, 0) => binom(d + 2, 2),
        (Space::P2, 1) => 0,
        (Space::P2, _) => binom(-d - 1, 2),
        (Space::P1, 0) => binom(d + 1, 1),
        (Space::P1, _) => binom(-d - 1, 1),
    })
}

pub fn basis(space: Space, i: usize, d: i64) -> Result<GradedPiece> {
    cohomology_dim(space, i, d)?;
    let n = space.nvars();
    let basis = if i == 0 {
        if d < 0 {
            Vec::new()
        } else {
            exponents_of_degree(n, d as u32)
                .into_iter()
                .map(|e| Monomial { exponents: e.into_iter().map(i64::from).collect() })
                .collect()
        }
    } else if i == space.dim() {
        let s = -d - n as i64;
        if s < 0 {
            Vec::new()
        } else {
            let mut v: Vec<Monomial> = exponents_of_degree(n, s as u32)
                .into_iter()
                .map(|a| Monomial { exponents: a.into_iter().map(|x| -1 - i64::from(x)).collect() })
                .collect();
            v.reverse();
            v
        }
    } else {
        Vec::new()
    };
    Ok(GradedPiece { space, coh_index: i, twist: d, basis })
}

/// Matrix of multiplication by `f` from `from` into the piece of the same
/// space and index at twist `from.twist + deg f`.
pub fn multiplication_matrix(f: &Form, from: &GradedPiece) -> Result<RatMatrix> {
    poly_multiplication_matrix(f.poly(), i64::from(f.degree()), from)
}

/// As [`multiplication_matrix`] for a polynomial that is zero or a form of
/// degree `deg`.
pub fn poly_multiplication_matrix(f: &Poly, deg: i64, from: &GradedPiece) -> Result<RatMatrix> {
    if f.vars() != from.space.vars() {
        return Err(Error::VariableMismatch(format!(
            "form in {:?} variables acting on {}",
            f.vars(),
            from.space.name()
        )));
    }
    if !f.is_form_of_degree(deg) {
        return Err(Error::DegreeMismatch(format!("`{f}` is not a form of degree {deg}")));
    }
    let target = basis(from.space, from.coh_index, from.twist + deg)?;
    let mut m = RatMatrix::zeros(target.dim(), from.dim());
    if f.is_zero() || (from.coh_index != 0 && !from.is_top()) {
        return Ok(m);
    }
    let mut prod = vec![0i64; from.space.nvars()];
    for (j, mono) in from.basis.iter().enumerate() {
        for (e, c) in f.terms() {
            for (k, slot) in prod.iter_mut().enumerate() {
                *slot = mono.exponents[k] + i64::from(e[k]);
            }
            if let Some(i) = target.position(&prod) {
                m.add_to(i, j, c);
            }
        }
    }
    Ok(m)
}

/// Matrix of `H^0(P^2, O(d)) -> H^0(L, O(d))`, setting `u = 0`.
pub fn restriction_matrix(d: i64) -> RatMatrix {
    let src = basis(Space::P2, 0, d).expect("index 0 is valid");
    let dst = basis(Space::P1, 0, d).expect("index 0 is valid");
    let mut m = RatMatrix::zeros(dst.dim(), src.dim());
    for (j, mono) in src.basis.iter().enumerate() {
        if mono.exponents[0] == 0 {
            let i = dst.position(&mono.exponents[1..]).expect("restricted monomial is in the line basis");
            m.set(i, j, Rational::from_integer(1.into()));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::parse_poly;
    use num_traits::Zero;

    fn form(s: &str) -> Form {
        Form::new(parse_poly(s, VarSet::Plane).unwrap()).unwrap()
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(cohomology_dim(Space::P2, 0, 2).unwrap(), 6);
        assert_eq!(cohomology_dim(Space::P1, 1, -2).unwrap(), 1);
        assert_eq!(cohomology_dim(Space::P2, 2, -4).unwrap(), 3);
        assert!(matches!(cohomology_dim(Space::P1, 2, 0), Err(Error::InvalidIndex { .. })));
    }

    #[test]
    fn basis_examples() {
        let b = basis(Space::P2, 0, 1).unwrap();
        let names: Vec<String> = b.basis().iter().map(|m| m.to_string()).collect();
        assert_eq!(names, ["u", "v", "w"]);
        let b = basis(Space::P2, 2, -3).unwrap();
        assert_eq!(b.basis(), &[Monomial { exponents: vec![-1, -1, -1] }]);
        let b = basis(Space::P1, 1, -3).unwrap();
        assert_eq!(
            b.basis(),
            &[Monomial { exponents: vec![-1, -2] }, Monomial { exponents: vec![-2, -1] }]
        );
        assert_eq!(basis(Space::P2, 1, -5).unwrap().dim(), 0);
    }

    #[test]
    fn positions_match_listing() {
        for (space, i, d) in [(Space::P2, 0, 4), (Space::P2, 2, -7), (Space::P1, 0, 5), (Space::P1, 1, -6)] {
            let b = basis(space, i, d).unwrap();
            for (k, m) in b.basis().iter().enumerate() {
                assert_eq!(b.position(&m.exponents), Some(k));
            }
        }
    }

    #[test]
    fn multiplication_examples() {
        let h0 = basis(Space::P2, 0, 1).unwrap();
        let m = multiplication_matrix(&form("u"), &h0).unwrap();
        assert_eq!((m.rows(), m.cols()), (6, 3));
        assert_eq!(m.rank(), 3);

        // u * u^-1 v^-2 w^-1 leaves H^2; u * u^-2 v^-1 w^-1 = u^-1 v^-1 w^-1.
        let h2 = basis(Space::P2, 2, -4).unwrap();
        let m = multiplication_matrix(&form("u"), &h2).unwrap();
        let target = basis(Space::P2, 2, -3).unwrap();
        let a = h2.position(&[-1, -2, -1]).unwrap();
        let b = h2.position(&[-2, -1, -1]).unwrap();
        let t = target.position(&[-1, -1, -1]).unwrap();
        assert!(m.column(a).iter().all(Zero::is_zero));
        assert_eq!(*m.get(t, b), Rational::from_integer(1.into()));

        let zero = Form::zero(VarSet::Plane, 2);
        assert!(multiplication_matrix(&zero, &h0).unwrap().is_zero());

        let line_form = Form::new(parse_poly("v", VarSet::Line).unwrap()).unwrap();
        assert!(matches!(multiplication_matrix(&line_form, &h0), Err(Error::VariableMismatch(_))));
    }

    #[test]
    fn restriction_examples() {
        let m = restriction_matrix(2);
        assert_eq!((m.rows(), m.cols()), (3, 6));
        assert_eq!(m.rank(), 3);
        assert_eq!(restriction_matrix(0), RatMatrix::identity(1));
        let m = restriction_matrix(-1);
        assert_eq!((m.rows(), m.cols()), (0, 0));
    }
}
