//! The classification scan: every admissible `(c, k)` with a seeded collinear
//! `Z`, the two Ulrich bundles, and split pairs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::build::build_spec;
use crate::descriptor::{CiSpec, GluingSpec, HSpec, SheafSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{format_rational, rat, Rational};
use crate::plane::{cb_condition_check, make_extension_bundle, recover_z, CISubscheme, PlaneSheaf};
use crate::poly::{Poly, Side, VarSet};
use crate::quadric::{acm_check, restriction_invariants, ulrich_check, KernelSheaf};
use crate::build::Sheaf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScanConfig {
    pub c_max: i64,
    pub seed: u64,
    pub margin: i64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { c_max: 6, seed: 0, margin: 8, exec: Execution::default() }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_max < 1 {
            return Err(Error::Input(format!("c_max = {} must be at least 1", self.c_max)));
        }
        if self.margin < 4 {
            return Err(Error::Input(format!("margin = {} must be at least 4", self.margin)));
        }
        Ok(())
    }
}

/// `(c, k)` with `0 <= k < c <= 2k + 2` and `c <= c_max`, by `c` then `k`.
pub fn admissible_pairs(c_max: i64) -> Vec<(i64, i64)> {
    (1..=c_max).flat_map(|c| (0..c).filter(move |&k| c <= 2 * k + 2).map(move |k| (c, k))).collect()
}

/// A seeded permutation of `1..=97` for the pair `(c, k)`.
pub fn seeded_values(seed: u64, c: i64, k: i64) -> Vec<i64> {
    let mix = seed ^ ((c as u64) << 32 | k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(mix);
    let mut values: Vec<i64> = (1..=97).collect();
    values.shuffle(&mut rng);
    values
}

/// Points `[0:1:r]` of `L` for the given values.
pub fn points_on_line(values: &[i64]) -> Vec<[Rational; 3]> {
    values.iter().map(|&r| [rat(0), rat(1), rat(r)]).collect()
}

fn point_strings(pts: &[[Rational; 3]]) -> Vec<[String; 3]> {
    pts.iter().map(|p| p.clone().map(|r| format_rational(&r))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Yy1,
    Aa1,
    Split,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifyRow {
    pub family: Family,
    pub c: i64,
    pub k: Option<i64>,
    pub descriptor: String,
    pub seedpoints: Vec<[String; 3]>,
    /// Membership in `0 <= k < c <= 2k + 2`.
    pub constraint: Option<bool>,
    pub cb: Option<bool>,
    pub window: (i64, i64),
    pub acm: bool,
    pub h1_fast: Vec<usize>,
    pub h1_full: Vec<usize>,
    pub ulrich: bool,
    pub t0: i64,
    pub h0_first: usize,
    /// `(c_1, c_2)` on `H1` and on `H2`.
    pub chern: ((i64, i64), (i64, i64)),
    pub recover_z: Option<bool>,
    pub boundary: bool,
    /// `h^0(G(-k-1))`, logged on boundary rows.
    pub boundary_h0: Option<usize>,
}

impl ClassifyRow {
    pub fn h1_paths_agree(&self) -> bool {
        self.h1_fast == self.h1_full
    }
}

fn spec_split(c: i64, plane: Side) -> SheafSpec {
    SheafSpec::LbSum { twists: vec![c, 0], plane }
}

fn kernel_spec(f1: SheafSpec, f2: SheafSpec) -> SheafSpec {
    SheafSpec::Kernel { f1: Box::new(f1), f2: Box::new(f2), e: GluingSpec::Identity }
}

fn as_kernel(s: Sheaf) -> KernelSheaf {
    match s {
        Sheaf::Kernel(k) => k,
        _ => unreachable!("kernel descriptor"),
    }
}

/// The bundle `G(c, k, Z)` on `H2` for `Z` given by points of `L`, with the
/// automatically chosen extension form, and the descriptor reproducing it.
pub fn yy1_component(c: i64, k: i64, pts: &[[Rational; 3]]) -> Result<(PlaneSheaf, SheafSpec)> {
    let z = CISubscheme::from_points(pts)?;
    let g = make_extension_bundle(c, k, z, None)?;
    let PlaneSheaf::Extension { h, .. } = &g else { unreachable!() };
    let spec = SheafSpec::Ext {
        c,
        k,
        z: CiSpec::Points(pts.to_vec()),
        h: HSpec::Form(h.poly().clone()),
        plane: Side::H2,
    };
    Ok((g, spec))
}

pub fn yy1_spec(c: i64, k: i64, pts: &[[Rational; 3]]) -> Result<SheafSpec> {
    Ok(kernel_spec(spec_split(c, Side::H1), yy1_component(c, k, pts)?.1))
}

/// The two Ulrich bundles: `E_1` glued from the blown-up Euler-type bundle on
/// `H1`, and `E_2` with the planes exchanged.
pub fn aa1_specs() -> [SheafSpec; 2] {
    let pp = |s: &str| crate::descriptor::parse_poly(s, VarSet::Plane).expect("literal");
    let g = |plane| SheafSpec::Ext {
        c: 1,
        k: 0,
        z: CiSpec::Forms(pp("v"), pp("w")),
        h: HSpec::Form(pp("u")),
        plane,
    };
    [kernel_spec(g(Side::H1), spec_split(1, Side::H2)), kernel_spec(spec_split(1, Side::H1), g(Side::H2))]
}

pub fn split_spec(c: i64) -> SheafSpec {
    kernel_spec(spec_split(c, Side::H1), spec_split(c, Side::H2))
}

fn same_ideal(a: &CISubscheme, b: &CISubscheme, dmax: i64) -> Result<bool> {
    for d in 0..=dmax {
        if a.ideal_piece(d)?.canonical() != b.ideal_piece(d)?.canonical() {
            return Ok(false);
        }
    }
    Ok(true)
}

struct Job {
    family: Family,
    c: i64,
    k: Option<i64>,
    spec: SheafSpec,
    points: Vec<[Rational; 3]>,
}

fn run_job(job: &Job, cfg: &ScanConfig) -> Result<ClassifyRow> {
    let kernel = as_kernel(build_spec(&job.spec)?);
    let acm = acm_check(&kernel, cfg.margin, Execution::Sequential)?;
    let ulrich = ulrich_check(&kernel, acm.is_acm)?;
    let mut row = ClassifyRow {
        family: job.family,
        c: job.c,
        k: job.k,
        descriptor: job.spec.to_string(),
        seedpoints: point_strings(&job.points),
        constraint: None,
        cb: None,
        window: acm.window,
        acm: acm.is_acm,
        h1_fast: acm.kernel_rows.iter().map(|r| r.h1_fast).collect(),
        h1_full: acm.kernel_rows.iter().map(|r| r.h1_full).collect(),
        ulrich: ulrich.is_ulrich,
        t0: ulrich.t0,
        h0_first: ulrich.h0_first,
        chern: restriction_invariants(&kernel)?,
        recover_z: None,
        boundary: false,
        boundary_h0: None,
    };
    if let (Family::Yy1, Some(k)) = (job.family, job.k) {
        let c = job.c;
        let z = CISubscheme::from_points(&job.points)?;
        row.constraint = Some(0 <= k && k < c && c <= 2 * k + 2);
        row.cb = Some(cb_condition_check(c, k, &z)?);
        let g = kernel.f_other();
        if c <= 2 * k {
            row.recover_z = Some(match recover_z(g) {
                Ok(r) => same_ideal(&r, &z, c)?,
                Err(Error::Inconsistency(_)) => false,
                Err(e) => return Err(e),
            });
        }
        if c == 2 * k + 2 {
            row.boundary = true;
            row.boundary_h0 = Some(g.cohomology(0, -k - 1)?);
        }
    }
    Ok(row)
}

/// Evidence that `Z` moves in a family: recovered ideals of several seeded
/// `Z` of the same degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyEvidence {
    pub c: i64,
    pub k: i64,
    pub members: usize,
    pub round_trips: usize,
    pub distinct_recovered: usize,
}

pub const FAMILY_SIZE: usize = 10;

fn family_evidence(c: i64, k: i64, seed: u64) -> Result<FamilyEvidence> {
    let z = (c - k) as usize;
    let values = seeded_values(seed, c, k);
    let mut recovered: Vec<CISubscheme> = Vec::new();
    let mut round_trips = 0;
    for j in 0..FAMILY_SIZE {
        let pts = points_on_line(&values[j * z..(j + 1) * z]);
        let (g, _) = yy1_component(c, k, &pts)?;
        let r = recover_z(&g)?;
        if same_ideal(&r, &CISubscheme::from_points(&pts)?, c)? {
            round_trips += 1;
        }
        recovered.push(r);
    }
    let mut distinct: Vec<&CISubscheme> = Vec::new();
    for r in &recovered {
        let mut new = true;
        for d in &distinct {
            if same_ideal(r, d, c)? {
                new = false;
                break;
            }
        }
        if new {
            distinct.push(r);
        }
    }
    Ok(FamilyEvidence { c, k, members: FAMILY_SIZE, round_trips, distinct_recovered: distinct.len() })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifySummary {
    pub rows: usize,
    pub ulrich: Vec<String>,
    pub all_yy1_acm: bool,
    pub all_h1_paths_agree: bool,
    pub boundary_rows: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyReport {
    pub config: ScanConfig,
    pub rows: Vec<ClassifyRow>,
    pub family: Vec<FamilyEvidence>,
    pub summary: ClassifySummary,
}

pub fn classify(cfg: &ScanConfig) -> Result<ClassifyReport> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for (c, k) in admissible_pairs(cfg.c_max) {
        let values = seeded_values(cfg.seed, c, k);
        let points = points_on_line(&values[..(c - k) as usize]);
        jobs.push(Job { family: Family::Yy1, c, k: Some(k), spec: yy1_spec(c, k, &points)?, points });
    }
    for spec in aa1_specs() {
        jobs.push(Job { family: Family::Aa1, c: 1, k: Some(0), spec, points: Vec::new() });
    }
    for c in 0..=cfg.c_max {
        jobs.push(Job { family: Family::Split, c, k: None, spec: split_spec(c), points: Vec::new() });
    }
    let rows = cfg.exec.try_map_collect(&jobs, |j| run_job(j, cfg))?;
    let fam_pairs: Vec<(i64, i64)> = admissible_pairs(cfg.c_max).into_iter().filter(|&(c, k)| c <= 2 * k).collect();
    let family = cfg.exec.try_map_collect(&fam_pairs, |&(c, k)| family_evidence(c, k, cfg.seed))?;
    let summary = ClassifySummary {
        rows: rows.len(),
        ulrich: rows.iter().filter(|r| r.ulrich).map(|r| r.descriptor.clone()).collect(),
        all_yy1_acm: rows.iter().filter(|r| r.family == Family::Yy1).all(|r| r.acm),
        all_h1_paths_agree: rows.iter().all(ClassifyRow::h1_paths_agree),
        boundary_rows: rows.iter().filter(|r| r.boundary).count(),
    };
    Ok(ClassifyReport { config: *cfg, rows, family, summary })
}

/// A flat view of a classify row for CSV output.
#[derive(Clone, Debug, Serialize)]
pub struct ClassifyRecord {
    pub family: Family,
    pub c: i64,
    pub k: Option<i64>,
    pub descriptor: String,
    pub seedpoints: String,
    pub constraint: Option<bool>,
    pub cb: Option<bool>,
    pub tmin: i64,
    pub tmax: i64,
    pub acm: bool,
    pub h1_paths_agree: bool,
    pub ulrich: bool,
    pub t0: i64,
    pub h0_first: usize,
    pub c1_h1: i64,
    pub c2_h1: i64,
    pub c1_h2: i64,
    pub c2_h2: i64,
    pub recover_z: Option<bool>,
    pub boundary: bool,
    pub boundary_h0: Option<usize>,
}

impl From<&ClassifyRow> for ClassifyRecord {
    fn from(r: &ClassifyRow) -> Self {
        ClassifyRecord {
            family: r.family,
            c: r.c,
            k: r.k,
            descriptor: r.descriptor.clone(),
            seedpoints: r.seedpoints.iter().map(|p| format!("[{}]", p.join(":"))).collect::<Vec<_>>().join(";"),
            constraint: r.constraint,
            cb: r.cb,
            tmin: r.window.0,
            tmax: r.window.1,
            acm: r.acm,
            h1_paths_agree: r.h1_paths_agree(),
            ulrich: r.ulrich,
            t0: r.t0,
            h0_first: r.h0_first,
            c1_h1: r.chern.0 .0,
            c2_h1: r.chern.0 .1,
            c1_h2: r.chern.1 .0,
            c2_h2: r.chern.1 .1,
            recover_z: r.recover_z,
            boundary: r.boundary,
            boundary_h0: r.boundary_h0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UlrichRow {
    pub family: Family,
    pub c: i64,
    pub k: Option<i64>,
    pub descriptor: String,
    pub acm: bool,
    pub t0: i64,
    pub h0_first: usize,
    pub ulrich: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UlrichScan {
    pub config: ScanConfig,
    pub rows: Vec<UlrichRow>,
    pub ulrich_count: usize,
}

pub fn ulrich_scan(cfg: &ScanConfig) -> Result<UlrichScan> {
    let report = classify(cfg)?;
    let rows: Vec<UlrichRow> = report
        .rows
        .iter()
        .map(|r| UlrichRow {
            family: r.family,
            c: r.c,
            k: r.k,
            descriptor: r.descriptor.clone(),
            acm: r.acm,
            t0: r.t0,
            h0_first: r.h0_first,
            ulrich: r.ulrich,
        })
        .collect();
    let ulrich_count = rows.iter().filter(|r| r.ulrich).count();
    Ok(UlrichScan { config: *cfg, rows, ulrich_count })
}

/// `u` as a plane form, for callers building descriptors by hand.
pub fn plane_u() -> Poly {
    Poly::var(VarSet::Plane, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs() {
        let p = admissible_pairs(6);
        assert_eq!(p.len(), 15);
        assert_eq!(p[0], (1, 0));
        assert!(p.contains(&(6, 2)) && !p.contains(&(5, 1)));
        assert_eq!(admissible_pairs(1), vec![(1, 0)]);
    }

    #[test]
    fn seeded_values_are_a_permutation() {
        let mut v = seeded_values(42, 3, 1);
        assert_eq!(v, seeded_values(42, 3, 1));
        assert_ne!(v, seeded_values(43, 3, 1));
        v.sort_unstable();
        assert_eq!(v, (1..=97).collect::<Vec<_>>());
    }

    #[test]
    fn descriptors_round_trip() {
        let pts = points_on_line(&[5, 9]);
        let spec = yy1_spec(3, 1, &pts).unwrap();
        let text = spec.to_string();
        assert_eq!(crate::descriptor::parse(&text).unwrap().sheaf, spec);
        assert!(text.starts_with("K(F1=O(3)+O(0)@H1,F2=G(c=3,k=1,Z=points([0:1:5];[0:1:9])"));
    }

    #[test]
    fn small_scan() {
        let cfg = ScanConfig { c_max: 2, seed: 1, margin: 4, exec: Execution::Sequential };
        let r = classify(&cfg).unwrap();
        assert_eq!(r.rows.len(), 3 + 2 + 3);
        // The aa1 pair, and the (c, k) = (1, 0) member of the yy1 family.
        let ulrich: Vec<_> = r.rows.iter().filter(|r| r.ulrich).map(|r| (r.family, r.c, r.k)).collect();
        assert_eq!(ulrich, vec![(Family::Yy1, 1, Some(0)), (Family::Aa1, 1, Some(0)), (Family::Aa1, 1, Some(0))]);
        assert!(r.summary.all_yy1_acm && r.summary.all_h1_paths_agree);
        let boundary: Vec<_> = r.rows.iter().filter(|r| r.boundary).map(|r| (r.c, r.k)).collect();
        assert_eq!(boundary, vec![(2, Some(0))]);
        assert_eq!(r.family.len(), 1);
        assert_eq!(r.family[0].distinct_recovered, FAMILY_SIZE);
        assert!(ScanConfig { margin: 3, ..cfg }.validate().is_err());
        assert!(ScanConfig { c_max: 0, ..cfg }.validate().is_err());
    }
}
