//! Sheaves on a plane given by an explicit graded presentation
//! `0 -> A -> B -> F -> 0` with `A`, `B` sums of line bundles and `rank A <= 1`.
//!
//! Cohomology is read off the presentation: `h^0 = dim coker H^0(phi)`,
//! `h^1 = dim ker H^2(phi)` and `h^2 = dim coker H^2(phi)`, using the monomial
//! models of [`crate::monomial`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{image_dim_of_composite, rat, RatMatrix, Rational, Subspace};
use crate::monomial::{basis, cohomology_dim, poly_multiplication_matrix, restriction_matrix, Space};
use crate::poly::{exponents_of_degree, Form, Poly, VarSet};

// ---------------------------------------------------------------------------
// Ideals generated by forms

/// Degree-`d` piece of the ideal generated by `gens` (pairs of form and
/// degree), as a subspace of `H^0(O(d))`.
pub(crate) fn ideal_piece(gens: &[(Poly, i64)], space: Space, d: i64) -> Result<Subspace> {
    let target = basis(space, 0, d)?;
    let mut cols = RatMatrix::zeros(target.dim(), 0);
    for (g, e) in gens {
        if g.is_zero() || *e > d {
            continue;
        }
        let from = basis(space, 0, d - e)?;
        cols = cols.hstack(&poly_multiplication_matrix(g, *e, &from)?)?;
    }
    Ok(Subspace::column_span(&cols))
}

/// Whether the forms have no common zero in projective space.
///
/// The ideal of `n` forms of degree at most `e` without common zero contains
/// every form of degree `n(e-1)+1`; with a common zero it contains none of the
/// forms not vanishing there.
pub(crate) fn no_common_zero(gens: &[(Poly, i64)], space: Space) -> Result<bool> {
    let live: Vec<(Poly, i64)> = gens.iter().filter(|(g, _)| !g.is_zero()).cloned().collect();
    if live.is_empty() {
        return Ok(false);
    }
    if live.iter().any(|(_, e)| *e == 0) {
        return Ok(true);
    }
    let n = (space.dim() + 1) as i64;
    let e = live.iter().map(|(_, e)| *e).max().unwrap_or(0);
    let d = n * (e - 1) + 1;
    Ok(ideal_piece(&live, space, d)?.dim() == cohomology_dim(space, 0, d)?)
}

/// Polynomial with coefficient vector `coords` in the monomial basis of
/// `H^0(space, O(d))`.
pub(crate) fn poly_from_coords(space: Space, d: i64, coords: &[Rational]) -> Poly {
    let piece = basis(space, 0, d).expect("index 0 is valid");
    Poly::from_terms(
        space.vars(),
        piece
            .basis()
            .iter()
            .zip(coords)
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m.exponents.iter().map(|&e| e as u32).collect(), c.clone())),
    )
}

// ---------------------------------------------------------------------------
// Zero-dimensional complete intersections

/// A zero-dimensional complete intersection `Z = {f1 = f2 = 0}` in a plane.
///
/// Collinear subschemes (contained in `L`) are normalized to `(u, g)` with `g`
/// a binary form in `v, w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CISubscheme {
    f1: Form,
    f2: Form,
    points: Option<Vec<[Rational; 3]>>,
}

impl CISubscheme {
    pub fn new(f1: Poly, f2: Poly) -> Result<Self> {
        for f in [&f1, &f2] {
            if f.vars() != VarSet::Plane {
                return Err(Error::VariableMismatch(format!("`{f}` is not a form in u, v, w")));
            }
        }
        let f1 = Form::new(f1).map_err(|e| Error::NotZeroDimensional(e.to_string()))?;
        let f2 = Form::new(f2).map_err(|e| Error::NotZeroDimensional(e.to_string()))?;
        let (d1, d2) = (i64::from(f1.degree()), i64::from(f2.degree()));
        if d1 == 0 || d2 == 0 {
            return Err(Error::NotZeroDimensional("a generator is a nonzero constant, so Z is empty".into()));
        }
        let d = d1 + d2;
        let gens = [(f1.poly().clone(), d1), (f2.poly().clone(), d2)];
        let dim = ideal_piece(&gens, Space::P2, d)?.dim();
        if dim + (d1 * d2) as usize != cohomology_dim(Space::P2, 0, d)? {
            return Err(Error::NotZeroDimensional(format!("`{f1}` and `{f2}` share a common factor")));
        }
        let is_u = |f: &Form| f.poly().num_terms() == 1 && f.poly().coefficient(&[1, 0, 0]) != Rational::zero();
        let (f1, f2) = if is_u(&f2) && !is_u(&f1) { (f2, f1) } else { (f1, f2) };
        let (f1, f2) = if is_u(&f1) {
            let g = f2.poly().restrict_to_line().lift_to_plane();
            let deg = f2.degree();
            (Form::var(VarSet::Plane, "u"), Form::with_degree(g, deg)?)
        } else {
            (f1, f2)
        };
        Ok(CISubscheme { f1, f2, points: None })
    }

    /// The reduced subscheme on the given points: either distinct points of
    /// `L`, or a single arbitrary point.
    pub fn from_points(pts: &[[Rational; 3]]) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::Input("empty point list".into()));
        }
        if pts.iter().any(|p| p.iter().all(Zero::is_zero)) {
            return Err(Error::Input("[0:0:0] is not a point".into()));
        }
        let v = Poly::var(VarSet::Plane, 1);
        let w = Poly::var(VarSet::Plane, 2);
        if pts.iter().all(|p| p[0].is_zero()) {
            for (i, p) in pts.iter().enumerate() {
                for q in &pts[..i] {
                    if &p[1] * &q[2] == &p[2] * &q[1] {
                        return Err(Error::Input("repeated point".into()));
                    }
                }
            }
            let mut g = Poly::constant(VarSet::Plane, rat(1));
            for p in pts {
                g = g.mul(&v.scale(&p[2]).sub(&w.scale(&p[1])));
            }
            let mut z = CISubscheme::new(Poly::var(VarSet::Plane, 0), g)?;
            z.points = Some(pts.to_vec());
            return Ok(z);
        }
        if pts.len() > 1 {
            return Err(Error::Input("point lists off L must consist of a single point".into()));
        }
        let p = &pts[0];
        let row = RatMatrix::from_rows(vec![p.to_vec()], 3)?;
        let ker = row.kernel_basis();
        let lin = |j: usize| poly_from_coords(Space::P2, 1, &ker.basis().column(j));
        let mut z = CISubscheme::new(lin(0), lin(1))?;
        z.points = Some(pts.to_vec());
        Ok(z)
    }

    pub fn f1(&self) -> &Form {
        &self.f1
    }

    pub fn f2(&self) -> &Form {
        &self.f2
    }

    pub fn degrees(&self) -> (i64, i64) {
        (i64::from(self.f1.degree()), i64::from(self.f2.degree()))
    }

    pub fn degree(&self) -> i64 {
        let (a, b) = self.degrees();
        a * b
    }

    pub fn is_collinear(&self) -> bool {
        self.f1.poly() == &Poly::var(VarSet::Plane, 0)
    }

    /// The binary form `g` with `Z = (u, g)`, for collinear `Z`.
    pub fn line_form(&self) -> Option<Poly> {
        self.is_collinear().then(|| self.f2.poly().restrict_to_line())
    }

    pub fn points(&self) -> Option<&[[Rational; 3]]> {
        self.points.as_deref()
    }

    pub(crate) fn generators(&self) -> [(Poly, i64); 2] {
        let (d1, d2) = self.degrees();
        [(self.f1.poly().clone(), d1), (self.f2.poly().clone(), d2)]
    }

    /// `(I_Z)_d` inside `H^0(O(d))`; equal to `H^0(I_Z(d))`.
    pub fn ideal_piece(&self, d: i64) -> Result<Subspace> {
        ideal_piece(&self.generators(), Space::P2, d)
    }
}

// ---------------------------------------------------------------------------
// Presentations

/// `0 -> ⊕ O(source_j) -> ⊕ O(target_i) -> F -> 0`; `map[i][j]` is a form of
/// degree `target_i - source_j` (or zero).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub source: Vec<i64>,
    pub target: Vec<i64>,
    pub map: Vec<Vec<Poly>>,
}

fn chi_p2(d: i64) -> i64 {
    (d + 1) * (d + 2) / 2
}

impl Presentation {
    pub fn rank(&self) -> i64 {
        self.target.len() as i64 - self.source.len() as i64
    }

    pub fn vars(&self) -> VarSet {
        self.map.iter().flatten().next().map_or(VarSet::Plane, Poly::vars)
    }

    /// The presentation pulled back to `L`.
    pub fn restrict_to_line(&self) -> Presentation {
        Presentation {
            source: self.source.clone(),
            target: self.target.clone(),
            map: self.map.iter().map(|row| row.iter().map(Poly::restrict_to_line).collect()).collect(),
        }
    }

    /// Matrix of `H^i(A(t)) -> H^i(B(t))` on `space`.
    pub fn cohomology_matrix(&self, space: Space, i: usize, t: i64) -> Result<RatMatrix> {
        let src: Vec<_> = self.source.iter().map(|a| basis(space, i, a + t)).collect::<Result<_>>()?;
        let dst: Vec<_> = self.target.iter().map(|b| basis(space, i, b + t)).collect::<Result<_>>()?;
        let rows: usize = dst.iter().map(|p| p.dim()).sum();
        let cols: usize = src.iter().map(|p| p.dim()).sum();
        let mut m = RatMatrix::zeros(rows, cols);
        let mut r0 = 0;
        for (ii, b) in self.target.iter().enumerate() {
            let mut c0 = 0;
            for (j, a) in self.source.iter().enumerate() {
                let f = &self.map[ii][j];
                if !f.is_zero() {
                    m.set_block(r0, c0, &poly_multiplication_matrix(f, b - a, &src[j])?);
                }
                c0 += src[j].dim();
            }
            r0 += dst[ii].dim();
        }
        Ok(m)
    }

    pub fn h0_matrix(&self, t: i64) -> Result<RatMatrix> {
        self.cohomology_matrix(Space::P2, 0, t)
    }

    pub fn h2_matrix(&self, t: i64) -> Result<RatMatrix> {
        self.cohomology_matrix(Space::P2, 2, t)
    }

    pub fn h0_target_dim(&self, t: i64) -> usize {
        self.target.iter().map(|b| cohomology_dim(Space::P2, 0, b + t).unwrap_or(0)).sum()
    }

    pub fn chi(&self, t: i64) -> i64 {
        self.target.iter().map(|b| chi_p2(b + t)).sum::<i64>() - self.source.iter().map(|a| chi_p2(a + t)).sum::<i64>()
    }

    /// `c(B) / c(A)` truncated to degree two, for rank two.
    pub fn chern(&self) -> Result<(i64, i64)> {
        if self.rank() != 2 {
            return Err(Error::Input(format!("chern classes need rank 2, got rank {}", self.rank())));
        }
        let e1 = |v: &[i64]| v.iter().sum::<i64>();
        let e2 = |v: &[i64]| {
            let mut s = 0;
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    s += v[i] * v[j];
                }
            }
            s
        };
        let (b1, b2) = (e1(&self.target), e2(&self.target));
        let (a1, a2) = (e1(&self.source), e2(&self.source));
        Ok((b1 - a1, b2 - b1 * a1 + a1 * a1 - a2))
    }

    /// `H^1(F(t))` as the subspace `ker H^2(phi) ⊂ H^2(A(t))`.
    pub fn h1_model(&self, t: i64) -> Result<Subspace> {
        Ok(self.h2_matrix(t)?.kernel_basis())
    }

    /// Block-diagonal multiplication by a plane form of degree `deg` on
    /// `H^i(A(t))`.
    pub fn source_multiplication(&self, f: &Poly, deg: i64, i: usize, t: i64) -> Result<RatMatrix> {
        let blocks: Vec<RatMatrix> = self
            .source
            .iter()
            .map(|a| poly_multiplication_matrix(f, deg, &basis(Space::P2, i, a + t)?))
            .collect::<Result<_>>()?;
        Ok(RatMatrix::block_diag(&blocks))
    }

    pub fn target_multiplication(&self, f: &Poly, deg: i64, i: usize, t: i64) -> Result<RatMatrix> {
        let blocks: Vec<RatMatrix> = self
            .target
            .iter()
            .map(|b| poly_multiplication_matrix(f, deg, &basis(Space::P2, i, b + t)?))
            .collect::<Result<_>>()?;
        Ok(RatMatrix::block_diag(&blocks))
    }

    /// Polynomial vector (one entry per target summand) of a coordinate
    /// vector in `H^0(B(t))`.
    pub fn target_section(&self, t: i64, coords: &[Rational]) -> Vec<Poly> {
        let mut out = Vec::new();
        let mut off = 0;
        for b in &self.target {
            let n = cohomology_dim(Space::P2, 0, b + t).unwrap_or(0);
            out.push(poly_from_coords(Space::P2, b + t, &coords[off..off + n]));
            off += n;
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Sheaves

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohRow {
    pub t: i64,
    pub h0: usize,
    pub h1: usize,
    pub h2: usize,
    pub chi: i64,
}

impl CohRow {
    pub fn new(t: i64, h0: usize, h1: usize, h2: usize) -> Self {
        CohRow { t, h0, h1, h2, chi: h0 as i64 - h1 as i64 + h2 as i64 }
    }

    pub fn get(&self, i: usize) -> usize {
        match i {
            0 => self.h0,
            1 => self.h1,
            _ => self.h2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CohTable {
    pub rows: Vec<CohRow>,
}

impl CohTable {
    pub fn row(&self, t: i64) -> Option<&CohRow> {
        self.rows.iter().find(|r| r.t == t)
    }

    pub fn window(&self) -> Option<(i64, i64)> {
        Some((self.rows.first()?.t, self.rows.last()?.t))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlaneSheaf {
    Split { twists: Vec<i64> },
    CiIdeal { z: CISubscheme, m: i64 },
    Extension { c: i64, k: i64, z: CISubscheme, h: Form },
}

pub fn make_split(twists: Vec<i64>) -> Result<PlaneSheaf> {
    if twists.is_empty() {
        return Err(Error::Input("empty list of twists".into()));
    }
    Ok(PlaneSheaf::Split { twists })
}

pub fn make_ci_ideal(f1: Poly, f2: Poly, m: i64) -> Result<PlaneSheaf> {
    Ok(PlaneSheaf::CiIdeal { z: CISubscheme::new(f1, f2)?, m })
}

const AUTO_COEFFICIENTS: [i64; 5] = [0, 1, -1, 2, -2];
const AUTO_LIMIT: usize = 100_000;

/// The sheaf `G` with `0 -> O(k) -> G -> I_Z(c-k) -> 0` whose extension class
/// is represented by `h`. A missing `h` selects the first candidate, in
/// lexicographic order of coefficient vectors over `0, 1, -1, 2, -2`, for which
/// `G` is locally free.
pub fn make_extension_bundle(c: i64, k: i64, z: CISubscheme, h: Option<Form>) -> Result<PlaneSheaf> {
    if k < 0 {
        return Err(Error::Input(format!("k = {k} must be non-negative")));
    }
    if z.degree() != c - k {
        return Err(Error::DegreeMismatch(format!("deg Z = {} but c - k = {}", z.degree(), c - k)));
    }
    let (d1, d2) = z.degrees();
    let e = 2 * k - c + d1 + d2;
    if e < 0 {
        return Err(Error::DegreeMismatch(format!("the extension form would have degree {e}")));
    }
    let locally_free = |h: &Poly| -> Result<bool> {
        if let Some(pts) = z.points() {
            if pts.iter().any(|p| h.eval(p).is_zero()) {
                return Ok(false);
            }
        }
        let mut gens = z.generators().to_vec();
        gens.push((h.clone(), e));
        no_common_zero(&gens, Space::P2)
    };
    let h = match h {
        Some(h) => {
            if h.vars() != VarSet::Plane {
                return Err(Error::VariableMismatch(format!("`{h}` is not a form in u, v, w")));
            }
            if i64::from(h.degree()) != e {
                return Err(Error::DegreeMismatch(format!("h = {h} has degree {}, expected {e}", h.degree())));
            }
            if !locally_free(h.poly())? {
                return Err(Error::NotLocallyFree(format!("h = {h} vanishes at a point of Z")));
            }
            h
        }
        None => {
            let monos = exponents_of_degree(3, e as u32);
            let n = monos.len();
            let mut digits = vec![0usize; n];
            let mut found = None;
            for _ in 0..AUTO_LIMIT {
                // Odometer increment; the last monomial varies fastest.
                let mut i = n;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] < AUTO_COEFFICIENTS.len() {
                        break;
                    }
                    digits[i] = 0;
                }
                if digits.iter().all(|&d| d == 0) {
                    break;
                }
                let cand = Poly::from_terms(
                    VarSet::Plane,
                    monos.iter().zip(&digits).map(|(m, &d)| (m.clone(), rat(AUTO_COEFFICIENTS[d]))),
                );
                if locally_free(&cand)? {
                    found = Some(cand);
                    break;
                }
            }
            let p = found.ok_or_else(|| {
                Error::NotLocallyFree(format!("no extension form of degree {e} with small coefficients avoids Z"))
            })?;
            Form::with_degree(p, e as u32)?
        }
    };
    Ok(PlaneSheaf::Extension { c, k, z, h })
}

impl PlaneSheaf {
    pub fn presentation(&self) -> Presentation {
        match self {
            PlaneSheaf::Split { twists } => Presentation {
                source: Vec::new(),
                target: twists.clone(),
                map: vec![Vec::new(); twists.len()],
            },
            PlaneSheaf::CiIdeal { z, m } => {
                let (d1, d2) = z.degrees();
                Presentation {
                    source: vec![m - d1 - d2],
                    target: vec![m - d1, m - d2],
                    map: vec![vec![z.f2().poly().neg()], vec![z.f1().poly().clone()]],
                }
            }
            PlaneSheaf::Extension { c, k, z, h } => {
                let (d1, d2) = z.degrees();
                let m = c - k;
                Presentation {
                    source: vec![m - d1 - d2],
                    target: vec![m - d1, m - d2, *k],
                    map: vec![vec![z.f2().poly().neg()], vec![z.f1().poly().clone()], vec![h.poly().clone()]],
                }
            }
        }
    }

    pub fn rank(&self) -> i64 {
        self.presentation().rank()
    }

    /// Twists `t` outside which every cohomology group is determined by
    /// vanishing or by the polynomial growth of `h^0`, `h^2`.
    pub fn default_window(&self) -> (i64, i64) {
        match self {
            PlaneSheaf::Extension { c, k, .. } => (-c - k - 8, c + 6),
            _ => {
                let p = self.presentation();
                let span = p.target.iter().chain(&p.source).map(|a| a.abs()).max().unwrap_or(0);
                (-span - 8, span + 6)
            }
        }
    }

    pub fn coh_row(&self, t: i64) -> Result<CohRow> {
        if let PlaneSheaf::Split { twists } = self {
            let dim = |i| twists.iter().map(|a| cohomology_dim(Space::P2, i, a + t).unwrap_or(0)).sum();
            return Ok(CohRow::new(t, dim(0), 0, dim(2)));
        }
        let p = self.presentation();
        let r0 = p.h0_matrix(t)?.rank();
        let h0 = p.h0_target_dim(t) - r0;
        let m2 = p.h2_matrix(t)?;
        let r2 = m2.rank();
        let row = CohRow::new(t, h0, m2.cols() - r2, m2.rows() - r2);
        if row.chi != p.chi(t) {
            return Err(Error::Inconsistency(format!("chi({t}) = {} from cohomology but {} from twists", row.chi, p.chi(t))));
        }
        if let PlaneSheaf::CiIdeal { z, m } = self {
            let d = m + t;
            if z.is_collinear() && d >= -1 {
                let expect = (z.degree() - d - 1).max(0) as usize;
                if row.h1 != expect {
                    return Err(Error::Inconsistency(format!(
                        "h^1(I_Z({d})) = {} for collinear Z of degree {}",
                        row.h1,
                        z.degree()
                    )));
                }
            }
        }
        Ok(row)
    }

    pub fn cohomology(&self, i: usize, t: i64) -> Result<usize> {
        if i > 2 {
            return Err(Error::InvalidIndex { space: "P2", index: i });
        }
        Ok(self.coh_row(t)?.get(i))
    }

    pub fn coh_table(&self, window: (i64, i64), exec: Execution) -> Result<CohTable> {
        let ts: Vec<i64> = (window.0..=window.1).collect();
        Ok(CohTable { rows: exec.try_map_collect(&ts, |&t| self.coh_row(t))? })
    }

    /// `H^1(F(t))` inside `H^2(A(t))`.
    pub fn h1_model(&self, t: i64) -> Result<Subspace> {
        self.presentation().h1_model(t)
    }

    pub fn chern(&self) -> Result<(i64, i64)> {
        match self {
            PlaneSheaf::Split { twists } if twists.len() == 2 => Ok((twists[0] + twists[1], twists[0] * twists[1])),
            PlaneSheaf::Extension { c, k, z, .. } => {
                let closed = (*c, k * (c - k) + z.degree());
                let from_presentation = self.presentation().chern()?;
                if closed != from_presentation {
                    return Err(Error::Inconsistency(format!(
                        "chern classes {closed:?} disagree with the presentation's {from_presentation:?}"
                    )));
                }
                Ok(closed)
            }
            _ => Err(Error::Input(format!("chern classes need a rank-2 sheaf, got rank {}", self.rank()))),
        }
    }
}

// ---------------------------------------------------------------------------
// Cayley-Bacharach

/// Linear factors of a binary form over the rationals, with multiplicity, if
/// it splits completely.
fn linear_factors(g: &Poly) -> Option<Vec<Poly>> {
    let n = g.degree()? as usize;
    // g = sum a_i v^(n-i) w^i
    let mut a: Vec<Rational> = (0..=n).map(|i| g.coefficient(&[(n - i) as u32, i as u32])).collect();
    let v = Poly::var(VarSet::Line, 0);
    let w = Poly::var(VarSet::Line, 1);
    let mut out = Vec::new();
    while a.len() > 1 && a.last().is_some_and(Zero::is_zero) {
        a.pop();
        out.push(v.clone());
    }
    while a.len() > 1 && a[0].is_zero() {
        a.remove(0);
        out.push(w.clone());
    }
    // Dehomogenize at v = 1: p(s) = sum a_i s^i; a root r gives the factor w - r v.
    let lcm = a.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let mut p: Vec<BigInt> = a.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
    while p.len() > 1 {
        let c0 = p[0].abs();
        let cn = p.last().expect("nonempty").abs();
        let (c0s, cns) = (c0.to_u64()?, cn.to_u64()?);
        if c0s > 1_000_000_000 || cns > 1_000_000_000 {
            return None;
        }
        let mut root = None;
        'search: for num in divisors(c0s) {
            for den in divisors(cns) {
                for sign in [1i64, -1] {
                    let r = Rational::new(BigInt::from(sign) * BigInt::from(num), BigInt::from(den));
                    let mut acc = Rational::zero();
                    for c in p.iter().rev() {
                        acc = acc * &r + Rational::from_integer(c.clone());
                    }
                    if acc.is_zero() {
                        root = Some(r);
                        break 'search;
                    }
                }
            }
        }
        let r = root?;
        out.push(w.sub(&v.scale(&r)));
        // Synthetic division by (s - r), rescaled to integers.
        let mut q = vec![Rational::zero(); p.len() - 1];
        let mut carry = Rational::zero();
        for i in (1..p.len()).rev() {
            carry = carry * &r + Rational::from_integer(p[i].clone());
            q[i - 1] = carry.clone();
        }
        let l = q.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        p = q.iter().map(|c| (c * Rational::from_integer(l.clone())).to_integer()).collect();
    }
    Some(out)
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            out.push(i);
            if i * i != n {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out.sort_unstable();
    out
}

/// Whether `h^0(I_{Z'}(c-2k-3)) = 0` for every colength-one subscheme
/// `Z' ⊂ Z`.
pub fn cb_condition_check(c: i64, k: i64, z: &CISubscheme) -> Result<bool> {
    if !z.is_collinear() {
        return Err(Error::Input("the Cayley-Bacharach check needs a collinear Z".into()));
    }
    if z.degree() != c - k {
        return Err(Error::DegreeMismatch(format!("deg Z = {} but c - k = {}", z.degree(), c - k)));
    }
    let d = c - 2 * k - 3;
    let u = (Poly::var(VarSet::Plane, 0), 1);
    let h0 = |g: Poly| -> Result<usize> {
        let deg = g.degree().map_or(0, i64::from);
        if deg == 0 {
            return cohomology_dim(Space::P2, 0, d);
        }
        Ok(ideal_piece(&[u.clone(), (g, deg)], Space::P2, d)?.dim())
    };
    let g = z.line_form().expect("collinear");
    let residuals: Vec<Poly> = match z.points() {
        Some(pts) => (0..pts.len())
            .map(|skip| {
                let sub: Vec<_> = pts.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| p.clone()).collect();
                if sub.is_empty() {
                    Poly::constant(VarSet::Plane, rat(1))
                } else {
                    CISubscheme::from_points(&sub).expect("subset of distinct points").f2().poly().clone()
                }
            })
            .collect(),
        None => match linear_factors(&g) {
            Some(factors) => {
                let mut distinct: Vec<Poly> = Vec::new();
                for f in factors {
                    if !distinct.iter().any(|d| d.div_exact(&f).is_some_and(|q| q.degree() == Some(0))) {
                        distinct.push(f);
                    }
                }
                distinct.iter().map(|l| g.div_exact(l).expect("factor divides").lift_to_plane()).collect()
            }
            // Every colength-one subscheme of a collinear scheme is collinear
            // of degree z - 1, and those all have the same Hilbert function.
            None => vec![Poly::var(VarSet::Plane, 1).pow(z.degree() as u32 - 1)],
        },
    };
    for r in residuals {
        if h0(r)? != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Restriction to L

/// An isomorphism `F|_L ≅ O_L(a1) ⊕ O_L(a2)` with `a1 >= a2`, realized on the
/// presentation: `psi` maps `B|_L` onto the split sheaf killing the image of
/// `A|_L`, and `theta = (psi · phi) / u` is the induced map on `A`.
#[derive(Clone, Debug)]
pub struct Trivialization {
    pub splitting: (i64, i64),
    pub psi: [Vec<Poly>; 2],
    pub theta: [Vec<Poly>; 2],
    source: Vec<i64>,
    target: Vec<i64>,
}

impl Trivialization {
    /// `c = a1 - a2`; the restriction is `O_L(c) ⊕ O_L` after twisting by
    /// `-a2`.
    pub fn c(&self) -> i64 {
        self.splitting.0 - self.splitting.1
    }

    /// Matrix of `H^0(B(t)) -> H^0(O_L(a1+t)) ⊕ H^0(O_L(a2+t))`: restriction to
    /// `L` followed by `psi`.
    pub fn h0_map(&self, t: i64) -> Result<RatMatrix> {
        let a = [self.splitting.0, self.splitting.1];
        let rows: Vec<usize> = a.iter().map(|ar| cohomology_dim(Space::P1, 0, ar + t)).collect::<Result<_>>()?;
        let cols: Vec<usize> = self.target.iter().map(|b| cohomology_dim(Space::P2, 0, b + t)).collect::<Result<_>>()?;
        let mut m = RatMatrix::zeros(rows.iter().sum(), cols.iter().sum());
        let mut r0 = 0;
        for r in 0..2 {
            let mut c0 = 0;
            for (i, b) in self.target.iter().enumerate() {
                let f = &self.psi[r][i];
                if !f.is_zero() {
                    let mult = poly_multiplication_matrix(f, a[r] - b, &basis(Space::P1, 0, b + t)?)?;
                    m.set_block(r0, c0, &mult.mul(&restriction_matrix(b + t))?);
                }
                c0 += cols[i];
            }
            r0 += rows[r];
        }
        Ok(m)
    }

    /// Matrix of `H^2(A(t)) -> H^1(O_L(a1+t)) ⊕ H^1(O_L(a2+t))`. On
    /// `H^1(F(t)) = ker H^2(phi)` it is the restriction map on `H^1`.
    pub fn h1_map(&self, t: i64) -> Result<RatMatrix> {
        let a = [self.splitting.0, self.splitting.1];
        let rows: Vec<usize> = a.iter().map(|ar| cohomology_dim(Space::P1, 1, ar + t)).collect::<Result<_>>()?;
        let cols: Vec<usize> = self.source.iter().map(|s| cohomology_dim(Space::P2, 2, s + t)).collect::<Result<_>>()?;
        let mut m = RatMatrix::zeros(rows.iter().sum(), cols.iter().sum());
        let mut r0 = 0;
        for r in 0..2 {
            let mut c0 = 0;
            for (j, s) in self.source.iter().enumerate() {
                let f = &self.theta[r][j];
                if !f.is_zero() {
                    let mult = poly_multiplication_matrix(f, a[r] - 1 - s, &basis(Space::P2, 2, s + t)?)?;
                    m.set_block(r0, c0, &residue_matrix(a[r] + t).mul(&mult)?);
                }
                c0 += cols[j];
            }
            r0 += rows[r];
        }
        Ok(m)
    }
}

/// `H^2(P^2, O(d-1)) -> H^1(L, O(d))`, the connecting map of
/// `0 -> O(d-1) -u-> O(d) -> O_L(d) -> 0` read backwards: it keeps the dual
/// monomials `u^-1 v^b w^c` and drops the `u^-1`.
fn residue_matrix(d: i64) -> RatMatrix {
    let src = basis(Space::P2, 2, d - 1).expect("valid index");
    let dst = basis(Space::P1, 1, d).expect("valid index");
    let mut m = RatMatrix::zeros(dst.dim(), src.dim());
    for (j, mono) in src.basis().iter().enumerate() {
        if mono.exponents[0] == -1 {
            let i = dst.position(&mono.exponents[1..]).expect("line dual monomial");
            m.set(i, j, rat(1));
        }
    }
    m
}

/// `h^0(P|_L(d))` from the long exact sequence of the restricted presentation.
fn line_h0(p: &Presentation, d: i64) -> Result<usize> {
    let m0 = p.cohomology_matrix(Space::P1, 0, d)?;
    let m1 = p.cohomology_matrix(Space::P1, 1, d)?;
    let r1 = m1.rank();
    Ok(m0.rows() - m0.rank() + (m1.cols() - r1))
}

/// Basis of `Hom(P|_L, O_L(d))` as row vectors over the target summands.
fn line_hom(p: &Presentation, d: i64) -> Result<Vec<Vec<Poly>>> {
    let col_dims: Vec<usize> = p.target.iter().map(|b| cohomology_dim(Space::P1, 0, d - b)).collect::<Result<_>>()?;
    let row_dims: Vec<usize> = p.source.iter().map(|a| cohomology_dim(Space::P1, 0, d - a)).collect::<Result<_>>()?;
    let mut m = RatMatrix::zeros(row_dims.iter().sum(), col_dims.iter().sum());
    let mut c0 = 0;
    for (i, b) in p.target.iter().enumerate() {
        let mut r0 = 0;
        for (j, a) in p.source.iter().enumerate() {
            let f = &p.map[i][j];
            if !f.is_zero() {
                m.set_block(r0, c0, &poly_multiplication_matrix(f, b - a, &basis(Space::P1, 0, d - b)?)?);
            }
            r0 += row_dims[j];
        }
        c0 += col_dims[i];
    }
    let ker = m.kernel_basis();
    let mut out = Vec::new();
    for k in 0..ker.dim() {
        let v = ker.basis().column(k);
        let mut row = Vec::new();
        let mut off = 0;
        for (i, b) in p.target.iter().enumerate() {
            row.push(poly_from_coords(Space::P1, d - b, &v[off..off + col_dims[i]]));
            off += col_dims[i];
        }
        out.push(row);
    }
    Ok(out)
}

fn surjective_on_line(psi: &[Vec<Poly>; 2], target: &[i64], a: (i64, i64)) -> Result<bool> {
    let mut minors = Vec::new();
    for i in 0..target.len() {
        for j in i + 1..target.len() {
            let m = psi[0][i].mul(&psi[1][j]).sub(&psi[0][j].mul(&psi[1][i]));
            minors.push((m, a.0 + a.1 - target[i] - target[j]));
        }
    }
    no_common_zero(&minors, Space::P1)
}

pub fn trivialize_on_line(sheaf: &PlaneSheaf) -> Result<Trivialization> {
    let p = sheaf.presentation();
    if p.rank() != 2 {
        return Err(Error::NotSimpleType(format!("rank {} restriction", p.rank())));
    }
    if let PlaneSheaf::Split { twists } = sheaf {
        let (hi, lo) = if twists[0] >= twists[1] { (0, 1) } else { (1, 0) };
        let one = Poly::constant(VarSet::Line, rat(1));
        let zero = Poly::zero(VarSet::Line);
        let mut psi = [vec![zero.clone(), zero.clone()], vec![zero.clone(), zero]];
        psi[0][hi] = one.clone();
        psi[1][lo] = one;
        return Ok(Trivialization {
            splitting: (twists[hi], twists[lo]),
            psi,
            theta: [Vec::new(), Vec::new()],
            source: Vec::new(),
            target: twists.clone(),
        });
    }
    let pl = p.restrict_to_line();
    for j in 0..pl.source.len() {
        let col: Vec<(Poly, i64)> =
            (0..pl.target.len()).map(|i| (pl.map[i][j].clone(), pl.target[i] - pl.source[j])).collect();
        if !no_common_zero(&col, Space::P1)? {
            return Err(Error::NotSimpleType("the sheaf is not locally free along L".into()));
        }
    }
    let deg = p.target.iter().sum::<i64>() - p.source.iter().sum::<i64>();
    let bmin = *p.target.iter().min().expect("rank 2");
    let half = (deg + 1).div_euclid(2);
    let mut a1 = None;
    for a in (half..=deg - bmin).rev() {
        if line_h0(&pl, -a)? > 0 {
            a1 = Some(a);
            break;
        }
    }
    let a1 = a1.ok_or_else(|| Error::NotSimpleType("no section of the restriction found".into()))?;
    let a2 = deg - a1;
    for d in (-a1 - 2)..=(-a2 + 2) {
        let expect = cohomology_dim(Space::P1, 0, a1 + d)? + cohomology_dim(Space::P1, 0, a2 + d)?;
        if line_h0(&pl, d)? != expect {
            return Err(Error::NotSimpleType(format!("restriction is not O_L({a1}) + O_L({a2})")));
        }
    }
    let hom1 = line_hom(&pl, a1)?;
    let candidates: Vec<[Vec<Poly>; 2]> = if a1 > a2 {
        let hom2 = line_hom(&pl, a2)?;
        if hom2.len() != 1 {
            return Err(Error::Inconsistency(format!("Hom(F|_L, O_L({a2})) has dimension {}", hom2.len())));
        }
        hom1.iter().map(|r1| [r1.clone(), hom2[0].clone()]).collect()
    } else {
        if hom1.len() != 2 {
            return Err(Error::Inconsistency(format!("Hom(F|_L, O_L({a1})) has dimension {}", hom1.len())));
        }
        vec![[hom1[0].clone(), hom1[1].clone()]]
    };
    let mut psi = None;
    for cand in candidates {
        if surjective_on_line(&cand, &p.target, (a1, a2))? {
            psi = Some(cand);
            break;
        }
    }
    let psi = psi.ok_or_else(|| Error::Inconsistency("no trivializing pair of homomorphisms".into()))?;
    let mut theta: [Vec<Poly>; 2] = [Vec::new(), Vec::new()];
    for (r, row) in psi.iter().enumerate() {
        for j in 0..p.source.len() {
            let mut acc = Poly::zero(VarSet::Plane);
            for (i, f) in row.iter().enumerate() {
                acc = acc.add(&f.lift_to_plane().mul(&p.map[i][j]));
            }
            let q = acc
                .div_var(0)
                .or_else(|| acc.is_zero().then(|| Poly::zero(VarSet::Plane)))
                .ok_or_else(|| Error::Inconsistency("psi does not kill the image of phi on L".into()))?;
            theta[r].push(q);
        }
    }
    Ok(Trivialization { splitting: (a1, a2), psi, theta, source: p.source, target: p.target })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineRestriction {
    pub t: i64,
    pub splitting: (i64, i64),
    /// `h^0(F|_L(t))`, `h^1(F|_L(t))`.
    pub h0_line: usize,
    pub h1_line: usize,
    /// Rank of `H^0(F(t)) -> H^0(F|_L(t))`.
    pub h0_map_rank: usize,
    /// `dim ker(H^1(F(t)) -> H^1(F|_L(t)))`.
    pub h1_kernel_dim: usize,
}

/// Restriction data of a rank-two sheaf at twist `t`. The kernel on `H^1` is
/// computed as the image of multiplication by `u` from `H^1(F(t-1))` and
/// checked against the explicit restriction map.
pub fn restrict_to_line(sheaf: &PlaneSheaf, t: i64) -> Result<LineRestriction> {
    let triv = trivialize_on_line(sheaf)?;
    let p = sheaf.presentation();
    let (a1, a2) = triv.splitting;
    let h0_line = cohomology_dim(Space::P1, 0, a1 + t)? + cohomology_dim(Space::P1, 0, a2 + t)?;
    let h1_line = cohomology_dim(Space::P1, 1, a1 + t)? + cohomology_dim(Space::P1, 1, a2 + t)?;
    let h0_map = triv.h0_map(t)?;
    // Sections coming from A map to zero; the rank on B equals the rank on F.
    let h0_map_rank = h0_map.rank();
    let (h1_kernel_dim, explicit) = if p.source.is_empty() {
        (0, 0)
    } else {
        let u = Poly::var(VarSet::Plane, 0);
        let mult = p.source_multiplication(&u, 1, 2, t - 1)?;
        let via_u = image_dim_of_composite(&mult, &p.h1_model(t - 1)?)?;
        let s = p.h1_model(t)?;
        let explicit = s.dim() - image_dim_of_composite(&triv.h1_map(t)?, &s)?;
        (via_u, explicit)
    };
    if h1_kernel_dim != explicit {
        return Err(Error::Inconsistency(format!(
            "H^1 restriction kernel at t = {t}: {h1_kernel_dim} via u, {explicit} via the restriction map"
        )));
    }
    Ok(LineRestriction { t, splitting: triv.splitting, h0_line, h1_line, h0_map_rank, h1_kernel_dim })
}

// ---------------------------------------------------------------------------
// Recovering Z

/// Degree `0..=dmax` pieces of the ideal of 2x2 minors of `[phi | sigma]`,
/// where `sigma` spans `H^0(G(-k))`.
pub fn fitting_ideal_pieces(g: &PlaneSheaf, dmax: i64) -> Result<Vec<Subspace>> {
    let PlaneSheaf::Extension { c, k, .. } = g else {
        return Err(Error::Input("Z can only be recovered from an extension bundle".into()));
    };
    let p = g.presentation();
    let m0 = p.h0_matrix(-k)?;
    let r = m0.rank();
    let h0 = m0.rows() - r;
    if h0 != 1 {
        return Err(Error::SectionNotUnique(format!("h^0(G(-k)) = {h0} for (c, k) = ({c}, {k})")));
    }
    let mut sigma = None;
    for s in 0..m0.rows() {
        let mut e = vec![Rational::zero(); m0.rows()];
        e[s] = rat(1);
        let col = RatMatrix::from_columns(&[e.clone()], m0.rows())?;
        if m0.hstack(&col)?.rank() > r {
            sigma = Some(e);
            break;
        }
    }
    let sigma = p.target_section(-k, &sigma.expect("quotient is nonzero"));
    let a = p.source[0];
    let mut minors = Vec::new();
    for i in 0..p.target.len() {
        for j in i + 1..p.target.len() {
            let m = p.map[i][0].mul(&sigma[j]).sub(&p.map[j][0].mul(&sigma[i]));
            minors.push((m, p.target[i] - a + p.target[j] - k));
        }
    }
    (0..=dmax).map(|d| ideal_piece(&minors, Space::P2, d)).collect()
}

/// Recovers `Z` from `G_{c,k,Z}` when `c <= 2k`, when the section of `G(-k)` is
/// unique up to scalars.
pub fn recover_z(g: &PlaneSheaf) -> Result<CISubscheme> {
    let PlaneSheaf::Extension { c, k, .. } = g else {
        return Err(Error::Input("Z can only be recovered from an extension bundle".into()));
    };
    if *c > 2 * k {
        return Err(Error::SectionNotUnique(format!("c = {c} > 2k = {}", 2 * k)));
    }
    let pieces = fitting_ideal_pieces(g, *c)?;
    let first = |d: usize, s: &Subspace, avoid: &Subspace| -> Option<Poly> {
        let canon = s.canonical();
        (0..canon.rows()).map(|i| canon.row(i).to_vec()).find(|v| !avoid.contains(v)).map(|v| {
            poly_from_coords(Space::P2, d as i64, &v)
        })
    };
    let mut f1: Option<(Poly, i64)> = None;
    let mut f2 = None;
    for (d, piece) in pieces.iter().enumerate() {
        let di = d as i64;
        if f1.is_none() && piece.dim() > 0 {
            f1 = first(d, piece, &Subspace::zero(piece.ambient_dim())).map(|f| (f, di));
        }
        if let Some(g1) = &f1 {
            let span = ideal_piece(std::slice::from_ref(g1), Space::P2, di)?;
            if let Some(f) = first(d, piece, &span) {
                f2 = Some(f);
                break;
            }
        }
    }
    let (f1, f2) = match (f1, f2) {
        (Some((f1, _)), Some(f2)) => (f1, f2),
        _ => return Err(Error::Inconsistency("minors do not define a complete intersection".into())),
    };
    let z = CISubscheme::new(f1, f2).map_err(|e| Error::Inconsistency(format!("recovered ideal: {e}")))?;
    for (d, piece) in pieces.iter().enumerate() {
        if z.ideal_piece(d as i64)?.canonical() != piece.canonical() {
            return Err(Error::Inconsistency(format!("recovered generators miss part of the degree-{d} piece")));
        }
    }
    Ok(z)
}
