//! Matrix factorizations of `q = xy` over `k[x, y, z, w]`.

use std::collections::HashMap;

use serde::Serialize;

use crate::descriptor::parse_poly;
use crate::error::{Error, Result};
use crate::linalg::{format_rational, rat, RatMatrix, Rational};
use crate::poly::{exponents_of_degree, Exponents, Poly, VarSet};

pub type PolyMatrix = Vec<Vec<Poly>>;

fn amb(s: &str) -> Poly {
    parse_poly(s, VarSet::Ambient).expect("literal form")
}

pub fn default_q() -> Poly {
    amb("x*y")
}

fn size(a: &PolyMatrix) -> Result<usize> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!("{n}-row matrix is not square")));
    }
    Ok(n)
}

/// The presentation matrix of the bundle `E_1`, or for `component = 2` the
/// same matrix with `x` and `y` exchanged.
pub fn example_aa1_matrix(component: u8) -> Result<PolyMatrix> {
    let rows: [[&str; 4]; 4] = [["y", "z", "w", "0"], ["0", "-x", "0", "w"], ["0", "0", "-x", "-z"], ["0", "0", "0", "y"]];
    let swap = match component {
        1 => false,
        2 => true,
        _ => return Err(Error::Input(format!("component must be 1 or 2, got {component}"))),
    };
    Ok(rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|s| {
                    let s = if swap {
                        s.chars().map(|ch| match ch { 'x' => 'y', 'y' => 'x', o => o }).collect()
                    } else {
                        s.to_string()
                    };
                    amb(&s)
                })
                .collect()
        })
        .collect())
}

pub fn mat_mul(a: &PolyMatrix, b: &PolyMatrix) -> Result<PolyMatrix> {
    let k = b.len();
    if a.iter().any(|r| r.len() != k) {
        return Err(Error::DimensionMismatch("inner dimensions differ".into()));
    }
    let cols = b.first().map_or(0, Vec::len);
    let vars = a.iter().flatten().chain(b.iter().flatten()).next().map_or(VarSet::Ambient, Poly::vars);
    Ok(a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).fold(Poly::zero(vars), |acc, (x, brow)| acc.add(&x.mul(&brow[j]))))
                .collect()
        })
        .collect())
}

fn scalar_identity(q: &Poly, n: usize) -> PolyMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { q.clone() } else { Poly::zero(q.vars()) }).collect()).collect()
}

/// Determinant by expansion along rows, memoized over column subsets.
pub fn det(a: &PolyMatrix) -> Result<Poly> {
    let n = size(a)?;
    if n == 0 {
        return Ok(Poly::constant(VarSet::Ambient, rat(1)));
    }
    if n > 16 {
        return Err(Error::Input(format!("{n}x{n} determinant is too large")));
    }
    let vars = a[0][0].vars();
    // d[mask] = determinant of rows 0..|mask| on the columns in mask.
    let mut d: Vec<Option<Poly>> = vec![None; 1 << n];
    d[0] = Some(Poly::constant(vars, rat(1)));
    for mask in 1usize..(1 << n) {
        let row = mask.count_ones() as usize - 1;
        let mut acc = Poly::zero(vars);
        for col in 0..n {
            if mask & (1 << col) == 0 {
                continue;
            }
            let rest = mask & !(1 << col);
            // Columns in `rest` to the right of `col` determine the sign.
            let after = (rest >> (col + 1)).count_ones();
            let entry = &a[row][col];
            if entry.is_zero() {
                continue;
            }
            let sub = d[rest].as_ref().expect("smaller masks first");
            let term = entry.mul(sub);
            acc = if after % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        d[mask] = Some(acc);
    }
    Ok(d[(1 << n) - 1].take().expect("full mask"))
}

pub fn adjugate(a: &PolyMatrix) -> Result<PolyMatrix> {
    let n = size(a)?;
    let mut out = vec![vec![Poly::zero(VarSet::Ambient); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: PolyMatrix = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| a[r][c].clone()).collect())
                .collect();
            let m = if n == 1 { Poly::constant(a[0][0].vars(), rat(1)) } else { det(&minor)? };
            out[i][j] = if (i + j) % 2 == 0 { m } else { m.neg() };
        }
    }
    Ok(out)
}

/// `B = adj(A) / q^(n/2 - 1)` when `det A = q^(n/2)`; then `A B = q I`.
pub fn partner_from_adjugate(a: &PolyMatrix, q: &Poly) -> Result<PolyMatrix> {
    let n = size(a)?;
    if n % 2 != 0 {
        return Err(Error::NoAdjugatePartner(format!("odd size {n}")));
    }
    let d = det(a)?;
    if d != q.pow(n as u32 / 2) {
        return Err(Error::NoAdjugatePartner(format!("det = {d} is not ({q})^{}", n / 2)));
    }
    let divisor = q.pow(n as u32 / 2 - 1);
    let adj = adjugate(a)?;
    adj.iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    e.div_exact(&divisor)
                        .or_else(|| e.is_zero().then(|| Poly::zero(e.vars())))
                        .ok_or_else(|| Error::NoAdjugatePartner(format!("adjugate entry {e} is not divisible by {divisor}")))
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MFPair {
    pub a: PolyMatrix,
    pub b: PolyMatrix,
    pub q: Poly,
}

pub fn verify_mf(p: &MFPair) -> bool {
    let n = p.a.len();
    if size(&p.a).is_err() || size(&p.b).map_or(true, |m| m != n) {
        return false;
    }
    let target = scalar_identity(&p.q, n);
    matches!(mat_mul(&p.a, &p.b), Ok(ab) if ab == target) && matches!(mat_mul(&p.b, &p.a), Ok(ba) if ba == target)
}

pub fn rank_at_point(a: &PolyMatrix, p: &[Rational; 4]) -> Result<usize> {
    if p.iter().all(|c| *c == rat(0)) {
        return Err(Error::Input("[0:0:0:0] is not a point".into()));
    }
    let n = size(a)?;
    let rows: Vec<Vec<Rational>> = a.iter().map(|r| r.iter().map(|e| e.eval(p)).collect()).collect();
    Ok(RatMatrix::from_rows(rows, n)?.rank())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SamplePoint {
    pub locus: &'static str,
    pub coords: [String; 4],
    #[serde(skip)]
    pub point: [Rational; 4],
}

/// Four points on `L`, two on each plane off `L`, and four off `X`.
pub fn sample_points() -> Vec<SamplePoint> {
    let raw: [(&str, [i64; 4]); 12] = [
        ("L", [0, 0, 1, 0]),
        ("L", [0, 0, 0, 1]),
        ("L", [0, 0, 1, 1]),
        ("L", [0, 0, 1, -2]),
        ("H1", [0, 1, 1, 1]),
        ("H1", [0, 1, 0, 2]),
        ("H2", [1, 0, 1, 1]),
        ("H2", [2, 0, 1, 0]),
        ("off", [1, 1, 0, 0]),
        ("off", [1, 2, 3, 4]),
        ("off", [1, -1, 1, 0]),
        ("off", [2, 3, 0, 1]),
    ];
    raw.iter()
        .map(|(locus, c)| {
            let point = c.map(rat);
            SamplePoint { locus, coords: point.clone().map(|r| format_rational(&r)), point }
        })
        .collect()
}

fn monomial_index(d: i64) -> (Vec<Exponents>, HashMap<Exponents, usize>) {
    if d < 0 {
        return (Vec::new(), HashMap::new());
    }
    let list = exponents_of_degree(4, d as u32);
    let index = list.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    (list, index)
}

fn check_linear(a: &PolyMatrix) -> Result<()> {
    for row in a {
        for e in row {
            if !e.is_form_of_degree(1) {
                return Err(Error::NonLinearEntry(format!("`{e}`")));
            }
        }
    }
    Ok(())
}

/// `h^0(coker(A)(t))` for `A : O(-1)^n -> O^n` on `P^3`.
pub fn cokernel_hilbert(a: &PolyMatrix, t: i64) -> Result<usize> {
    let n = size(a)?;
    check_linear(a)?;
    let (src, _) = monomial_index(t - 1);
    let (dst, index) = monomial_index(t);
    let mut m = RatMatrix::zeros(n * dst.len(), n * src.len());
    for j in 0..n {
        for (s, mono) in src.iter().enumerate() {
            for i in 0..n {
                for (e, c) in a[i][j].terms() {
                    let prod: Exponents = mono.iter().zip(e).map(|(x, y)| x + y).collect();
                    let r = index[&prod];
                    m.add_to(i * dst.len() + r, j * src.len() + s, c);
                }
            }
        }
    }
    Ok(n * dst.len() - m.rank())
}

pub fn ulrich_linear_check(a: &PolyMatrix, q: &Poly) -> bool {
    let Ok(n) = size(a) else { return false };
    if n % 2 != 0 || check_linear(a).is_err() {
        return false;
    }
    matches!(det(a), Ok(d) if d == q.pow(n as u32 / 2))
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRank {
    pub point: SamplePoint,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MFReport {
    pub matrix: Vec<Vec<String>>,
    pub det: String,
    pub partner: Option<Vec<Vec<String>>>,
    pub partner_linear: bool,
    pub verified: bool,
    pub ulrich_linear: bool,
    pub ranks_at_samples: Vec<SampleRank>,
    pub hilbert: Vec<(i64, usize)>,
}

pub fn to_strings(a: &PolyMatrix) -> Vec<Vec<String>> {
    a.iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect()
}

pub fn mf_report(a: &PolyMatrix, q: &Poly, hilbert_window: (i64, i64)) -> Result<MFReport> {
    let d = det(a)?;
    let partner = partner_from_adjugate(a, q).ok();
    let partner_linear = partner.as_ref().is_some_and(|b| check_linear(b).is_ok());
    let verified = partner
        .as_ref()
        .is_some_and(|b| verify_mf(&MFPair { a: a.clone(), b: b.clone(), q: q.clone() }));
    let ranks_at_samples = sample_points()
        .into_iter()
        .map(|p| Ok(SampleRank { rank: rank_at_point(a, &p.point)?, point: p }))
        .collect::<Result<_>>()?;
    let hilbert = (hilbert_window.0..=hilbert_window.1).map(|t| Ok((t, cokernel_hilbert(a, t)?))).collect::<Result<_>>()?;
    Ok(MFReport {
        matrix: to_strings(a),
        det: d.to_string(),
        partner: partner.as_ref().map(to_strings),
        partner_linear,
        verified,
        ulrich_linear: ulrich_linear_check(a, q),
        ranks_at_samples,
        hilbert,
    })
}

/// Reads `{"q": "x*y", "A": [[...]], "B": [[...]]}` with entries as form strings.
pub fn parse_pair_json(text: &str) -> Result<MFPair> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Input(format!("pair file: {e}")))?;
    let q = match v.get("q") {
        None => default_q(),
        Some(serde_json::Value::String(s)) => parse_poly(s, VarSet::Ambient)?,
        Some(_) => return Err(Error::Input("pair file: `q` must be a string".into())),
    };
    let matrix = |key: &str| -> Result<PolyMatrix> {
        let rows = v
            .get(key)
            .and_then(|m| m.as_array())
            .ok_or_else(|| Error::Input(format!("pair file: `{key}` must be an array of rows")))?;
        let m: PolyMatrix = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Input(format!("pair file: rows of `{key}` must be arrays")))?
                    .iter()
                    .map(|e| match e {
                        serde_json::Value::String(s) => parse_poly(s, VarSet::Ambient),
                        serde_json::Value::Number(n) => parse_poly(&n.to_string(), VarSet::Ambient),
                        _ => Err(Error::Input(format!("pair file: entries of `{key}` must be form strings"))),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        size(&m).map_err(|_| Error::Input(format!("pair file: `{key}` is not square")))?;
        Ok(m)
    };
    Ok(MFPair { a: matrix("A")?, b: matrix("B")?, q })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[&str]]) -> PolyMatrix {
        rows.iter().map(|r| r.iter().map(|s| amb(s)).collect()).collect()
    }

    #[test]
    fn aa1_determinant() {
        let n = example_aa1_matrix(1).unwrap();
        assert_eq!(n[1][1], amb("-x"));
        assert_eq!(det(&n).unwrap(), amb("x^2*y^2"));
        let n2 = example_aa1_matrix(2).unwrap();
        assert_eq!(n2[0][0], amb("x"));
        assert_eq!(det(&n2).unwrap(), amb("x^2*y^2"));
        assert!(example_aa1_matrix(3).is_err());
    }

    #[test]
    fn determinant_signs() {
        assert_eq!(det(&m(&[&["0", "1"], &["1", "0"]])).unwrap(), amb("-1"));
        let p = m(&[&["0", "0", "1"], &["1", "0", "0"], &["0", "1", "0"]]);
        assert_eq!(det(&p).unwrap(), amb("1"));
        let s = m(&[&["x", "y", "0"], &["z", "w", "x"], &["0", "y", "z"]]);
        // x(wz - xy) - y(z^2)
        assert_eq!(det(&s).unwrap(), amb("x*w*z - x^2*y - y*z^2"));
    }

    #[test]
    fn partners() {
        let q = default_q();
        let n = example_aa1_matrix(1).unwrap();
        let b = partner_from_adjugate(&n, &q).unwrap();
        assert!(check_linear(&b).is_ok());
        assert!(verify_mf(&MFPair { a: n.clone(), b, q: q.clone() }));
        let d = m(&[&["x", "0"], &["0", "y"]]);
        assert_eq!(partner_from_adjugate(&d, &q).unwrap(), m(&[&["y", "0"], &["0", "x"]]));
        let bad = m(&[&["x", "0"], &["0", "x"]]);
        assert!(matches!(partner_from_adjugate(&bad, &q), Err(Error::NoAdjugatePartner(_))));
        let id = m(&[&["1", "0", "0", "0"], &["0", "1", "0", "0"], &["0", "0", "1", "0"], &["0", "0", "0", "1"]]);
        assert!(!verify_mf(&MFPair { a: n, b: id, q }));
    }

    #[test]
    fn ranks() {
        let n = example_aa1_matrix(1).unwrap();
        assert_eq!(rank_at_point(&n, &[0, 0, 1, 0].map(rat)).unwrap(), 2);
        assert_eq!(rank_at_point(&n, &[0, 1, 1, 1].map(rat)).unwrap(), 2);
        assert_eq!(rank_at_point(&n, &[1, 1, 0, 0].map(rat)).unwrap(), 4);
        assert!(rank_at_point(&n, &[0, 0, 0, 0].map(rat)).is_err());
        let pts = sample_points();
        assert_eq!(pts.iter().filter(|p| p.locus != "off").count(), 8);
        assert_eq!(pts.iter().filter(|p| p.locus == "off").count(), 4);
    }

    #[test]
    fn hilbert() {
        let n = example_aa1_matrix(1).unwrap();
        assert_eq!(cokernel_hilbert(&n, -1).unwrap(), 0);
        assert_eq!(cokernel_hilbert(&n, 0).unwrap(), 4);
        assert_eq!(cokernel_hilbert(&n, 1).unwrap(), 12);
        let mut bad = n.clone();
        bad[0][0] = amb("z^2");
        assert!(matches!(cokernel_hilbert(&bad, 0), Err(Error::NonLinearEntry(_))));
    }

    #[test]
    fn linear_check() {
        let q = default_q();
        assert!(ulrich_linear_check(&example_aa1_matrix(1).unwrap(), &q));
        let mut bad = example_aa1_matrix(1).unwrap();
        bad[0][1] = amb("z^2");
        assert!(!ulrich_linear_check(&bad, &q));
        let padded = m(&[&["x*y", "0", "0", "0"], &["0", "1", "0", "0"], &["0", "0", "1", "0"], &["0", "0", "0", "1"]]);
        assert!(!ulrich_linear_check(&padded, &q));
    }

    #[test]
    fn pair_files() {
        let p = parse_pair_json(r#"{"q": "x*y", "A": [["x","0"],["0","y"]], "B": [["y","0"],["0","x"]]}"#).unwrap();
        assert!(verify_mf(&p));
        assert!(parse_pair_json(r#"{"A": [["x"]]}"#).is_err());
        assert!(parse_pair_json("not json").is_err());
        assert!(parse_pair_json(r#"{"A": [["q"]], "B": [["x"]]}"#).is_err());
    }
}
