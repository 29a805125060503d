//! Turning parsed descriptors into sheaves.

use crate::descriptor::{parse, CiSpec, Descriptor, GluingSpec, HSpec, SheafSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::plane::{make_ci_ideal, make_extension_bundle, make_split, CISubscheme, CohTable, PlaneSheaf};
use crate::poly::{Form, Side};
use crate::quadric::{make_kernel_sheaf, GluingData, KernelSheaf, RankOneSheaf};

#[derive(Clone, Debug)]
pub enum Sheaf {
    Plane { side: Side, sheaf: PlaneSheaf },
    Kernel(KernelSheaf),
    RankOne(RankOneSheaf),
}

impl Sheaf {
    pub fn coh_table(&self, window: (i64, i64), exec: Execution) -> Result<CohTable> {
        if window.0 > window.1 {
            return Err(Error::Input(format!("empty window [{}, {}]", window.0, window.1)));
        }
        match self {
            Sheaf::Plane { sheaf, .. } => sheaf.coh_table(window, exec),
            Sheaf::Kernel(k) => k.coh_table(window, exec),
            Sheaf::RankOne(r) => Ok(r.coh_table(window)),
        }
    }
}

pub fn ci_from_spec(ci: &CiSpec) -> Result<CISubscheme> {
    match ci {
        CiSpec::Forms(f1, f2) => CISubscheme::new(f1.clone(), f2.clone()),
        CiSpec::Points(pts) => CISubscheme::from_points(pts),
    }
}

pub fn gluing_from_spec(g: &GluingSpec) -> GluingData {
    match g {
        GluingSpec::Identity => GluingData::Identity,
        GluingSpec::Diagonal(a, d) => GluingData::Diagonal(a.clone(), d.clone()),
        GluingSpec::Upper(a, d, b) => GluingData::Upper(a.clone(), d.clone(), b.clone()),
    }
}

fn plane_sheaf(spec: &SheafSpec) -> Result<(Side, PlaneSheaf)> {
    match spec {
        SheafSpec::LbSum { twists, plane } => Ok((*plane, make_split(twists.clone())?)),
        SheafSpec::Ideal { ci, m, plane } => {
            let z = ci_from_spec(ci)?;
            Ok((*plane, make_ci_ideal(z.f1().poly().clone(), z.f2().poly().clone(), *m)?))
        }
        SheafSpec::Ext { c, k, z, h, plane } => {
            let z = ci_from_spec(z)?;
            let h = match h {
                HSpec::Auto => None,
                HSpec::Form(p) => Some(Form::new(p.clone())?),
            };
            Ok((*plane, make_extension_bundle(*c, *k, z, h)?))
        }
        _ => Err(Error::Input("a kernel sheaf needs plane sheaves as components".into())),
    }
}

pub fn build_spec(spec: &SheafSpec) -> Result<Sheaf> {
    match spec {
        SheafSpec::Kernel { f1, f2, e } => {
            let (s1, g1) = plane_sheaf(f1)?;
            let (s2, g2) = plane_sheaf(f2)?;
            if s1 == s2 {
                return Err(Error::Input(format!("both components live on {s1}")));
            }
            let ((split_side, split), other) = if matches!(g1, PlaneSheaf::Split { .. }) {
                ((s1, g1), g2)
            } else if matches!(g2, PlaneSheaf::Split { .. }) {
                ((s2, g2), g1)
            } else {
                return Err(Error::NotSimpleType("neither component is a sum of line bundles".into()));
            };
            Ok(Sheaf::Kernel(make_kernel_sheaf(split, split_side, other, gluing_from_spec(e))?))
        }
        SheafSpec::RankOne { side, a, b } => Ok(Sheaf::RankOne(RankOneSheaf::new(*side, *a, *b))),
        _ => {
            let (side, sheaf) = plane_sheaf(spec)?;
            Ok(Sheaf::Plane { side, sheaf })
        }
    }
}

pub fn build(d: &Descriptor) -> Result<Sheaf> {
    build_spec(&d.sheaf)
}

pub fn build_str(text: &str) -> Result<(Descriptor, Sheaf)> {
    let d = parse(text)?;
    let s = build(&d)?;
    Ok((d, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h0(text: &str, t: i64) -> usize {
        let (_, s) = build_str(text).unwrap();
        s.coh_table((t, t), Execution::Sequential).unwrap().rows[0].h0
    }

    #[test]
    fn examples() {
        assert_eq!(h0("R1(side=2,a=-1,b=0)", 0), 1);
        assert_eq!(h0("O(3)+O(0)@H1", 0), 11);
        assert_eq!(h0("K(F1=O(0)+O(0)@H1,F2=O(0)+O(0)@H2,e=id)", 0), 2);
        assert_eq!(h0("K(F1=O(3)+O(0)@H1,F2=G(c=3,k=1,Z=[u,v*w],h=v^2+w^2)@H2,e=id)", 0), 13);
        assert_eq!(h0("K(F1=G(c=1,k=0,Z=[v,w],h=u)@H1,F2=O(1)+O(0)@H2,e=id)", 0), 4);
        assert_eq!(h0("K(F1=O(3)+O(0)@H1,F2=G(c=3,k=1,Z=points([0:1:1];[0:1:2]),h=auto)@H2,e=diag(2,3))", 0), 13);
    }

    #[test]
    fn rejects() {
        assert!(matches!(build_str("K(F1=O(0)+O(0)@H1,F2=O(0)+O(0)@H1,e=id)"), Err(Error::Parse(_))));
        assert!(matches!(build_str("K(F1=O(1"), Err(Error::Parse(_))));
        let two_ext = "K(F1=G(c=1,k=0,Z=[v,w],h=u)@H1,F2=G(c=1,k=0,Z=[v,w],h=u)@H2,e=id)";
        assert!(matches!(build_str(two_ext), Err(Error::NotSimpleType(_))));
        assert!(matches!(build_str("G(c=3,k=1,Z=[u,v*w],h=v^2)@H2"), Err(Error::NotLocallyFree(_))));
        assert!(build_str("O(1)+O(0)@H1").unwrap().1.coh_table((1, 0), Execution::Sequential).is_err());
    }
}
