//! Sheaves on `X = H1 ∪ H2`.
//!
//! A kernel sheaf `K` is the kernel of `F_split ⊕ F_other -> Q`, where
//! `F_split = O(c) ⊕ O` on one plane, `F_other` is a rank-two bundle on the
//! other plane with `F_other|_L ≅ O_L(c) ⊕ O_L`, `Q = O_L(c) ⊕ O_L`, and the map
//! is `(e ∘ r_split, -r_other)` for a gluing automorphism `e` of `Q`.
//!
//! Cohomology comes from the long exact sequence
//! `0 -> H^0 K -> H^0 F -> H^0 Q -> H^1 K -> H^1 F -> H^1 Q -> H^2 K -> H^2 F -> 0`.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{format_rational, image_dim_of_composite, rat, RatMatrix, Rational, Subspace};
use crate::monomial::{basis, cohomology_dim, poly_multiplication_matrix, Space};
use crate::plane::{trivialize_on_line, CohRow, CohTable, PlaneSheaf, Trivialization};
use crate::poly::{Poly, Side, VarSet};

/// An automorphism `[[alpha, beta], [0, delta]]` of `O_L(c) ⊕ O_L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GluingData {
    Identity,
    Diagonal(Rational, Rational),
    Upper(Rational, Rational, Poly),
}

impl GluingData {
    fn parts(&self) -> (Rational, Rational, Option<&Poly>) {
        match self {
            GluingData::Identity => (rat(1), rat(1), None),
            GluingData::Diagonal(a, d) => (a.clone(), d.clone(), None),
            GluingData::Upper(a, d, b) => (a.clone(), d.clone(), Some(b)),
        }
    }

    pub fn validate(&self, c: i64) -> Result<()> {
        let (a, d, b) = self.parts();
        if a.is_zero() || d.is_zero() {
            return Err(Error::Input(format!("gluing {self} is not invertible")));
        }
        if let Some(b) = b {
            if b.vars() != VarSet::Line {
                return Err(Error::VariableMismatch(format!("`{b}` is not a form in v, w")));
            }
            if !b.is_form_of_degree(c) {
                return Err(Error::DegreeMismatch(format!("beta = {b} must be a form of degree c = {c}")));
            }
        }
        Ok(())
    }

    /// Matrix on `H^i(O_L(c+t)) ⊕ H^i(O_L(t))`.
    fn matrix(&self, c: i64, i: usize, t: i64) -> Result<RatMatrix> {
        let (a, d, b) = self.parts();
        let n1 = cohomology_dim(Space::P1, i, c + t)?;
        let n2 = cohomology_dim(Space::P1, i, t)?;
        let mut m = RatMatrix::zeros(n1 + n2, n1 + n2);
        for k in 0..n1 {
            m.set(k, k, a.clone());
        }
        for k in 0..n2 {
            m.set(n1 + k, n1 + k, d.clone());
        }
        if let Some(b) = b {
            m.set_block(0, n1, &poly_multiplication_matrix(b, c, &basis(Space::P1, i, t)?)?);
        }
        Ok(m)
    }
}

impl std::fmt::Display for GluingData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GluingData::Identity => write!(f, "id"),
            GluingData::Diagonal(a, d) => write!(f, "diag({},{})", format_rational(a), format_rational(d)),
            GluingData::Upper(a, d, b) => write!(f, "upper({},{},{b})", format_rational(a), format_rational(d)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KernelSheaf {
    split_side: Side,
    c: i64,
    f_split: PlaneSheaf,
    f_other: PlaneSheaf,
    e: GluingData,
    triv_split: Trivialization,
    triv_other: Trivialization,
    shift: i64,
}

pub fn make_kernel_sheaf(f_split: PlaneSheaf, split_side: Side, f_other: PlaneSheaf, e: GluingData) -> Result<KernelSheaf> {
    let c = match &f_split {
        PlaneSheaf::Split { twists } if twists.len() == 2 && twists.contains(&0) && twists.iter().all(|&a| a >= 0) => {
            twists[0] + twists[1]
        }
        _ => return Err(Error::Input("the split component must be O(c) + O(0) with c >= 0".into())),
    };
    let triv_split = trivialize_on_line(&f_split)?;
    let triv_other = trivialize_on_line(&f_other)?;
    if triv_other.splitting != (c, 0) {
        let (a1, a2) = triv_other.splitting;
        return Err(Error::Input(format!(
            "splitting types differ on L: O_L({c}) + O_L(0) against O_L({a1}) + O_L({a2})"
        )));
    }
    e.validate(c)?;
    Ok(KernelSheaf { split_side, c, f_split, f_other, e, triv_split, triv_other, shift: 0 })
}

/// One twist of the kernel-sheaf table with both computations of `h^1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelRow {
    pub row: CohRow,
    /// `dim ker(H^1(F_other(t)) -> H^1(F_other|_L(t)))`.
    pub h1_fast: usize,
    /// `dim coker(H^0 F -> H^0 Q) + dim ker(H^1 F -> H^1 Q)`.
    pub h1_full: usize,
}

impl KernelSheaf {
    pub fn c(&self) -> i64 {
        self.c
    }

    pub fn split_side(&self) -> Side {
        self.split_side
    }

    pub fn f_split(&self) -> &PlaneSheaf {
        &self.f_split
    }

    pub fn f_other(&self) -> &PlaneSheaf {
        &self.f_other
    }

    pub fn gluing(&self) -> &GluingData {
        &self.e
    }

    /// The same sheaf with another gluing.
    pub fn with_gluing(&self, e: GluingData) -> Result<KernelSheaf> {
        e.validate(self.c)?;
        Ok(KernelSheaf { e, ..self.clone() })
    }

    /// `K(s)`.
    pub fn twisted(&self, s: i64) -> KernelSheaf {
        KernelSheaf { shift: self.shift + s, ..self.clone() }
    }

    /// Sections of `F_split(t) ⊕ F_other(t)` lifted to `H^0(B(t))` that map to
    /// zero in `H^0(Q(t))`, and the image of `H^0(A(t))` inside them.
    fn h0_data(&self, t: i64) -> Result<(RatMatrix, RatMatrix)> {
        let ps = self.f_split.presentation();
        let po = self.f_other.presentation();
        let e0 = self.e.matrix(self.c, 0, t)?;
        let rs = e0.mul(&self.triv_split.h0_map(t)?)?;
        let ro = self.triv_other.h0_map(t)?.scale(&rat(-1));
        let rho = rs.hstack(&ro)?;
        let phi = RatMatrix::block_diag(&[ps.h0_matrix(t)?, po.h0_matrix(t)?]);
        Ok((rho, phi))
    }

    pub fn kernel_row(&self, t: i64) -> Result<KernelRow> {
        let t = t + self.shift;
        let c = self.c;
        let po = self.f_other.presentation();
        let ps = self.f_split.presentation();

        let (rho0, phi0) = self.h0_data(t)?;
        let rank_rho0 = rho0.rank();
        let h0 = rho0.cols() - rank_rho0 - phi0.rank();
        let h0_q = rho0.rows();
        let coker0 = h0_q - rank_rho0;

        // H^1 F = ker H^2(phi) on each side, mapped to H^1 Q.
        let m2s = ps.h2_matrix(t)?;
        let m2o = po.h2_matrix(t)?;
        let ss = m2s.kernel_basis();
        let so = m2o.kernel_basis();
        let e1 = self.e.matrix(c, 1, t)?;
        let t1s = e1.mul(&self.triv_split.h1_map(t)?)?;
        let t1o = self.triv_other.h1_map(t)?.scale(&rat(-1));
        let rho1 = t1s.hstack(&t1o)?;
        let s_both = Subspace::column_span(&RatMatrix::block_diag(&[ss.basis().clone(), so.basis().clone()]));
        let rank_rho1 = image_dim_of_composite(&rho1, &s_both)?;
        let h1_full = coker0 + s_both.dim() - rank_rho1;

        let h1_fast = if po.source.is_empty() {
            0
        } else {
            let u = Poly::var(VarSet::Plane, 0);
            let mult = po.source_multiplication(&u, 1, 2, t - 1)?;
            image_dim_of_composite(&mult, &po.h1_model(t - 1)?)?
        };
        if h1_fast != h1_full {
            return Err(Error::Inconsistency(format!("h^1(K({t})): fast path {h1_fast}, full sequence {h1_full}")));
        }

        let h1_q = rho1.rows();
        let h2_f = (m2s.rows() - (m2s.cols() - ss.dim())) + (m2o.rows() - (m2o.cols() - so.dim()));
        let h2 = h1_q - rank_rho1 + h2_f;

        let chi_q = (c + t + 1) + (t + 1);
        let chi = ps.chi(t) + po.chi(t) - chi_q;
        let row = CohRow::new(t - self.shift, h0, h1_full, h2);
        if row.chi != chi {
            return Err(Error::Inconsistency(format!("chi(K({t})) = {} from cohomology, {chi} from the sequence", row.chi)));
        }
        Ok(KernelRow { row, h1_fast, h1_full })
    }

    pub fn coh_row(&self, t: i64) -> Result<CohRow> {
        Ok(self.kernel_row(t)?.row)
    }

    pub fn cohomology(&self, i: usize, t: i64) -> Result<usize> {
        if i > 2 {
            return Err(Error::InvalidIndex { space: "X", index: i });
        }
        Ok(self.coh_row(t)?.get(i))
    }

    pub fn kernel_rows(&self, window: (i64, i64), exec: Execution) -> Result<Vec<KernelRow>> {
        let ts: Vec<i64> = (window.0..=window.1).collect();
        exec.try_map_collect(&ts, |&t| self.kernel_row(t))
    }

    pub fn coh_table(&self, window: (i64, i64), exec: Execution) -> Result<CohTable> {
        Ok(CohTable { rows: self.kernel_rows(window, exec)?.into_iter().map(|r| r.row).collect() })
    }

    /// Largest absolute twist in the presentation of `F_other`.
    fn other_bound(&self) -> i64 {
        let p = self.f_other.presentation();
        p.target.iter().chain(&p.source).map(|a| a.abs()).max().unwrap_or(0)
    }

    /// `[-c - k' - margin, 6]` in the twist of `K` itself.
    pub fn acm_window(&self, margin: i64) -> (i64, i64) {
        (-self.c - self.other_bound() - margin - self.shift, 6 - self.shift)
    }

    /// Twists outside which `h^1(F_other(t)) = 0`, hence `h^1(K(t)) = 0`.
    fn h1_support(&self) -> Option<(i64, i64)> {
        let p = self.f_other.presentation();
        let a = *p.source.iter().min()?;
        let c1 = p.target.iter().sum::<i64>() - p.source.iter().sum::<i64>();
        // H^1 F(t) ⊂ H^2 O(a + t) vanishes for t >= -2 - a; by duality
        // h^1(F(t)) = h^1(F(-c1 - 3 - t)).
        Some((-c1 - 1 + a, -3 - a))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ACMReport {
    pub is_acm: bool,
    pub table: CohTable,
    pub window: (i64, i64),
    pub out_of_window_reason: String,
    /// Both computations of `h^1` at every window twist.
    #[serde(skip)]
    pub kernel_rows: Vec<KernelRow>,
}

pub fn acm_check(k: &KernelSheaf, margin: i64, exec: Execution) -> Result<ACMReport> {
    let window = k.acm_window(margin);
    let rows = k.kernel_rows(window, exec)?;
    let is_acm = rows.iter().all(|r| r.row.h1 == 0);
    let reason = match k.h1_support() {
        None => "both components split, so h^1 of each vanishes at every twist".to_string(),
        Some((lo, hi)) => {
            let (lo, hi) = (lo - k.shift, hi - k.shift);
            if lo < window.0 || hi > window.1 {
                return Err(Error::Inconsistency(format!(
                    "window [{}, {}] does not cover the possible support [{lo}, {hi}] of h^1",
                    window.0, window.1
                )));
            }
            format!(
                "h^1(K(t)) is at most h^1(F_other(t)), which is zero for t > {hi} (it sits in H^2 of the first \
                 syzygy) and for t < {lo} (Serre duality on the rank-two bundle)"
            )
        }
    };
    let table = CohTable { rows: rows.iter().map(|r| r.row.clone()).collect() };
    Ok(ACMReport { is_acm, table, window, out_of_window_reason: reason, kernel_rows: rows })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UlrichReport {
    pub is_ulrich: bool,
    /// `max { t : h^0(K(t)) = 0 }`.
    pub t0: i64,
    pub h0_first: usize,
}

/// Ulrich test after normalizing the twist so that `h^0(K(-1)) = 0 < h^0(K)`.
pub fn ulrich_check(k: &KernelSheaf, acm: bool) -> Result<UlrichReport> {
    let start = -k.c - k.other_bound() - 2 - k.shift;
    if k.coh_row(start)?.h0 != 0 {
        return Err(Error::Inconsistency(format!("h^0(K({start})) is nonzero below every generator")));
    }
    let mut t = start;
    loop {
        let h0 = k.coh_row(t + 1)?.h0;
        if h0 > 0 {
            return Ok(UlrichReport { is_ulrich: acm && h0 == 4, t0: t, h0_first: h0 });
        }
        t += 1;
        if t > 6 - k.shift {
            return Err(Error::Inconsistency("no sections in any twist up to 6".into()));
        }
    }
}

/// Castelnuovo-Mumford regularity read off a table: the least `m` with
/// `h^1(m-1+j) = h^2(m-2+j) = 0` for all `j >= 0`, assuming the table extends
/// past the last nonzero entry. `None` if no entry is nonzero.
pub fn regularity(table: &CohTable) -> Option<i64> {
    let t1 = table.rows.iter().filter(|r| r.h1 != 0).map(|r| r.t + 2).max();
    let t2 = table.rows.iter().filter(|r| r.h2 != 0).map(|r| r.t + 3).max();
    t1.into_iter().chain(t2).max()
}

pub fn restriction_invariants(k: &KernelSheaf) -> Result<((i64, i64), (i64, i64))> {
    let s = k.f_split.chern()?;
    let o = k.f_other.chern()?;
    Ok(match k.split_side {
        Side::H1 => (s, o),
        Side::H2 => (o, s),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GluingVariant {
    pub gluing: String,
    pub table: CohTable,
    pub equal_to_identity: bool,
    pub asserted: bool,
}

/// Cohomology tables of `K` under each gluing. Scalar gluings lift to
/// automorphisms of `F_split`, so their tables must equal the identity's;
/// upper-triangular gluings are only reported.
pub fn gluing_variation_report(
    k: &KernelSheaf,
    gluings: &[GluingData],
    window: (i64, i64),
    exec: Execution,
) -> Result<Vec<GluingVariant>> {
    if gluings.is_empty() {
        return Ok(Vec::new());
    }
    let base = k.with_gluing(GluingData::Identity)?.coh_table(window, exec)?;
    let mut out = Vec::new();
    for e in gluings {
        let table = k.with_gluing(e.clone())?.coh_table(window, exec)?;
        let equal = table == base;
        let asserted = !matches!(e, GluingData::Upper(..));
        if asserted && !equal {
            return Err(Error::Inconsistency(format!("gluing {e} changes the cohomology table")));
        }
        out.push(GluingVariant { gluing: e.to_string(), table, equal_to_identity: equal, asserted });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlobalGeneration {
    /// `h^1(K(-1)) = h^2(K(-2)) = 0`.
    pub zero_regular: bool,
    /// `dim` of the span of `H^0(K) · H^0(O_X(1))` and of `h^0(K(1))`.
    pub image_dim: usize,
    pub target_dim: usize,
}

impl GlobalGeneration {
    pub fn surjective(&self) -> bool {
        self.image_dim == self.target_dim
    }
}

/// Multiplication `H^0(K) ⊗ H^0(O_X(1)) -> H^0(K(1))` with the four ambient
/// linear forms acting on each plane by restriction.
pub fn global_generation_check(k: &KernelSheaf) -> Result<GlobalGeneration> {
    let zero_regular = k.coh_row(-1)?.h1 == 0 && k.coh_row(-2)?.h2 == 0;
    let t = k.shift;
    let (rho0, _) = k.h0_data(t)?;
    let (rho1, phi1) = k.h0_data(t + 1)?;
    let sections = rho0.kernel_basis();
    let ps = k.f_split.presentation();
    let po = k.f_other.presentation();
    let mut span = phi1.clone();
    for l in 0..4 {
        let lin = Poly::var(VarSet::Ambient, l);
        let on = |side: Side| lin.restrict_to_plane(side);
        let ms = ps.target_multiplication(&on(k.split_side), 1, 0, t)?;
        let mo = po.target_multiplication(&on(k.split_side.other()), 1, 0, t)?;
        let m = RatMatrix::block_diag(&[ms, mo]);
        span = span.hstack(&m.mul(sections.basis())?)?;
    }
    let kernel1 = rho1.cols() - rho1.rank();
    let image = span.rank();
    let target = kernel1;
    if image > target {
        return Err(Error::Inconsistency("multiplication leaves the kernel".into()));
    }
    let h0_next = target - phi1.rank();
    let image_dim = image - phi1.rank();
    Ok(GlobalGeneration { zero_regular, image_dim, target_dim: h0_next })
}

// ---------------------------------------------------------------------------
// Rank one

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExtensionClass {
    Nonzero,
    Zero,
}

/// `0 -> O_{H_i}(a) -> E -> O_{H_{3-i}}(b) -> 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankOneSheaf {
    pub inner_side: Side,
    pub a: i64,
    pub b: i64,
    pub class: ExtensionClass,
}

impl RankOneSheaf {
    pub fn new(inner_side: Side, a: i64, b: i64) -> Self {
        RankOneSheaf { inner_side, a, b, class: ExtensionClass::Nonzero }
    }

    pub fn coh_row(&self, t: i64) -> CohRow {
        let dim = |i| {
            cohomology_dim(Space::P2, i, self.a + t).unwrap_or(0) + cohomology_dim(Space::P2, i, self.b + t).unwrap_or(0)
        };
        CohRow::new(t, dim(0), 0, dim(2))
    }

    pub fn coh_table(&self, window: (i64, i64)) -> CohTable {
        CohTable { rows: (window.0..=window.1).map(|t| self.coh_row(t)).collect() }
    }
}

/// The sequence splits on cohomology because `h^1` of plane line bundles
/// vanishes.
pub fn rank_one_cohomology(r: &RankOneSheaf, i: usize, t: i64) -> Result<usize> {
    if i > 2 {
        return Err(Error::InvalidIndex { space: "X", index: i });
    }
    Ok(r.coh_row(t).get(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::parse_poly;
    use crate::plane::{make_extension_bundle, make_split, CISubscheme};
    use crate::poly::Form;

    fn pp(s: &str) -> Poly {
        parse_poly(s, VarSet::Plane).unwrap()
    }

    fn yy1() -> KernelSheaf {
        let z = CISubscheme::new(pp("u"), pp("v*w")).unwrap();
        let g = make_extension_bundle(3, 1, z, Some(Form::new(pp("v^2 + w^2")).unwrap())).unwrap();
        make_kernel_sheaf(make_split(vec![3, 0]).unwrap(), Side::H1, g, GluingData::Identity).unwrap()
    }

    fn aa1() -> KernelSheaf {
        let z = CISubscheme::new(pp("v"), pp("w")).unwrap();
        let g = make_extension_bundle(1, 0, z, Some(Form::new(pp("u")).unwrap())).unwrap();
        make_kernel_sheaf(make_split(vec![1, 0]).unwrap(), Side::H2, g, GluingData::Identity).unwrap()
    }

    fn trivial() -> KernelSheaf {
        make_kernel_sheaf(make_split(vec![0, 0]).unwrap(), Side::H1, make_split(vec![0, 0]).unwrap(), GluingData::Identity)
            .unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(trivial().cohomology(0, 0).unwrap(), 2);
        assert_eq!(yy1().cohomology(0, 0).unwrap(), 13);
        let e = aa1();
        assert_eq!(e.cohomology(0, 0).unwrap(), 4);
        assert_eq!(e.cohomology(0, -1).unwrap(), 0);
    }

    #[test]
    fn mismatched_gluings_are_rejected() {
        let r = make_kernel_sheaf(make_split(vec![2, 0]).unwrap(), Side::H1, make_split(vec![1, 0]).unwrap(), GluingData::Identity);
        assert!(r.is_err());
        let r = make_kernel_sheaf(
            make_split(vec![1, 0]).unwrap(),
            Side::H1,
            make_split(vec![1, 0]).unwrap(),
            GluingData::Diagonal(rat(0), rat(1)),
        );
        assert!(r.is_err());
    }

    #[test]
    fn acm_and_ulrich() {
        let k = yy1();
        let r = acm_check(&k, 8, Execution::Sequential).unwrap();
        assert!(r.is_acm);
        assert!(!ulrich_check(&k, true).unwrap().is_ulrich);

        let split = make_kernel_sheaf(make_split(vec![2, 0]).unwrap(), Side::H1, make_split(vec![2, 0]).unwrap(), GluingData::Identity)
            .unwrap();
        assert!(acm_check(&split, 8, Execution::Sequential).unwrap().is_acm);
        let u = ulrich_check(&split, true).unwrap();
        assert_eq!((u.is_ulrich, u.t0, u.h0_first), (false, -3, 1));

        let e = aa1();
        assert!(acm_check(&e, 8, Execution::Sequential).unwrap().is_acm);
        let u = ulrich_check(&e, true).unwrap();
        assert_eq!((u.is_ulrich, u.t0), (true, -1));
    }

    #[test]
    fn invariants() {
        assert_eq!(restriction_invariants(&yy1()).unwrap(), ((3, 0), (3, 4)));
        assert_eq!(restriction_invariants(&trivial()).unwrap(), ((0, 0), (0, 0)));
        assert_eq!(restriction_invariants(&aa1()).unwrap(), ((1, 1), (1, 0)));
    }

    #[test]
    fn gluing_variations() {
        let k = yy1();
        let w = (-7, 2);
        let rows = gluing_variation_report(&k, &[GluingData::Diagonal(rat(2), rat(3))], w, Execution::Sequential).unwrap();
        assert!(rows[0].equal_to_identity);
        let beta = parse_poly("v^3", VarSet::Line).unwrap();
        let rows = gluing_variation_report(&k, &[GluingData::Upper(rat(1), rat(1), beta)], w, Execution::Sequential).unwrap();
        assert!(!rows[0].asserted);
        assert!(gluing_variation_report(&k, &[], w, Execution::Sequential).unwrap().is_empty());
    }

    #[test]
    fn global_generation() {
        let g = global_generation_check(&aa1()).unwrap();
        assert!(g.zero_regular);
        assert!(g.surjective());
        assert_eq!(g.target_dim, 12);
    }

    #[test]
    fn rank_one() {
        let r = RankOneSheaf::new(Side::H2, -1, 0);
        assert_eq!(rank_one_cohomology(&r, 0, 0).unwrap(), 1);
        let r = RankOneSheaf::new(Side::H2, -1, -2);
        assert_eq!(rank_one_cohomology(&r, 0, 2).unwrap(), 4);
        assert_eq!(rank_one_cohomology(&r, 1, -5).unwrap(), 0);
    }

    #[test]
    fn regularity_of_aa1() {
        let t = aa1().coh_table((-6, 4), Execution::Sequential).unwrap();
        assert_eq!(regularity(&t), Some(0));
    }

    #[test]
    fn twisting_shifts_tables() {
        let k = yy1();
        let kt = k.twisted(2);
        assert_eq!(kt.coh_row(-3).unwrap().h0, k.coh_row(-1).unwrap().h0);
        assert_eq!(kt.coh_row(-3).unwrap().t, -3);
    }
}
