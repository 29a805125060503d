//! Exact linear algebra over the rationals.
//!
//! Every cohomology dimension in this crate is the rank of some matrix with
//! rational entries, so this module is the substrate for all of them. Matrices
//! are dense; elimination is fraction-free on integer rows (each row is scaled
//! to integers and kept primitive), with the first nonzero entry of a column
//! taken as pivot.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number, always kept reduced with a positive
/// denominator.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Serializes as `p/q` (reduced, `q > 0`) or `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Input(format!("invalid rational `{s}`"));
    match s.split_once('/') {
        None => s.parse::<BigInt>().map(Rational::from_integer).map_err(|_| bad()),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format_rational(self.get(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds a matrix from row vectors. All rows must have length `cols`.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} in a matrix with {cols} columns",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(RatMatrix { rows: n, cols, data })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
        Self::from_rows(rows, cols).expect("ragged literal matrix")
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<Rational>], rows: usize) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column of length {} in a matrix with {rows} rows",
                    col.len()
                )));
            }
            for (i, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    m.set(i, j, v.clone());
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Rational) {
        let slot = &mut self.data[i * self.cols + j];
        *slot += v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if !v.is_zero() {
                    t.set(j, i, v.clone());
                }
            }
        }
        t
    }

    pub fn mul(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.add_to(i, j, &(a * b));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Rational) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `[self | rhs]`.
    pub fn hstack(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, rhs.rows
            )));
        }
        let mut out = Self::zeros(self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..rhs.cols {
                out.set(i, self.cols + j, rhs.get(i, j).clone());
            }
        }
        Ok(out)
    }

    /// `[self ; rhs]`.
    pub fn vstack(&self, rhs: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != rhs.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, rhs.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend(rhs.data.iter().cloned());
        Ok(RatMatrix { rows: self.rows + rhs.rows, cols: self.cols, data })
    }

    /// Block-diagonal matrix from the given blocks.
    pub fn block_diag(blocks: &[RatMatrix]) -> RatMatrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &RatMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                let v = block.get(i, j);
                if !v.is_zero() {
                    self.set(r0 + i, c0 + j, v.clone());
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        // Elimination work scales with the number of rows touched per pivot;
        // run it on the orientation with fewer columns.
        if self.cols > self.rows {
            return self.transpose().rank();
        }
        echelon(integer_rows(self), self.cols, false).pivots.len()
    }

    /// Exact null space `{ v : self * v = 0 }`.
    pub fn kernel_basis(&self) -> Subspace {
        let n = self.cols;
        if self.rows == 0 {
            return Subspace::full(n);
        }
        let ech = echelon(integer_rows(self), n, true);
        let is_pivot = {
            let mut p = vec![false; n];
            for &c in &ech.pivots {
                p[c] = true;
            }
            p
        };
        let mut columns = Vec::new();
        for free in (0..n).filter(|&c| !is_pivot[c]) {
            // Common multiple of the pivots that feed this free column.
            let mut l = BigInt::one();
            for (r, &pc) in ech.pivots.iter().enumerate() {
                let a = &ech.rows[r][free];
                if !a.is_zero() {
                    l = l.lcm(&ech.rows[r][pc]);
                }
            }
            let mut v = vec![BigInt::zero(); n];
            v[free] = l.clone();
            for (r, &pc) in ech.pivots.iter().enumerate() {
                let a = &ech.rows[r][free];
                if !a.is_zero() {
                    v[pc] = -(a * &l) / &ech.rows[r][pc];
                }
            }
            make_primitive(&mut v);
            columns.push(v.into_iter().map(Rational::from_integer).collect::<Vec<_>>());
        }
        let basis = RatMatrix::from_columns(&columns, n).expect("kernel columns have ambient length");
        Subspace { ambient_dim: n, basis }
    }

    /// Reduced row echelon form with rational entries (pivots equal to one)
    /// together with the pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        if self.rows == 0 || self.cols == 0 {
            return (RatMatrix::zeros(0, self.cols), Vec::new());
        }
        let ech = echelon(integer_rows(self), self.cols, true);
        let mut out = RatMatrix::zeros(ech.pivots.len(), self.cols);
        for (r, &pc) in ech.pivots.iter().enumerate() {
            let p = &ech.rows[r][pc];
            for j in 0..self.cols {
                let a = &ech.rows[r][j];
                if !a.is_zero() {
                    out.set(r, j, Rational::new(a.clone(), p.clone()));
                }
            }
        }
        (out, ech.pivots)
    }
}

/// A linear subspace of `Q^n`, stored as a matrix whose columns form a basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: RatMatrix,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace { ambient_dim: n, basis: RatMatrix::zeros(n, 0) }
    }

    pub fn full(n: usize) -> Self {
        Subspace { ambient_dim: n, basis: RatMatrix::identity(n) }
    }

    /// Span of the columns of `m`; dependent columns are dropped.
    pub fn column_span(m: &RatMatrix) -> Self {
        let n = m.rows();
        if m.cols() == 0 || n == 0 {
            return Self::zero(n);
        }
        let r = m.transpose().rref().0;
        // Rows of the RREF of the transpose span the same space.
        Subspace { ambient_dim: n, basis: r.transpose() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        if v.len() != self.ambient_dim {
            return false;
        }
        let col = RatMatrix::from_columns(&[v.to_vec()], self.ambient_dim).expect("length checked");
        let joined = self.basis.hstack(&col).expect("same row count");
        joined.rank() == self.dim()
    }

    /// Sum of two subspaces of the same ambient space.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "sum of subspaces of Q^{} and Q^{}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        Ok(Subspace::column_span(&self.basis.hstack(&other.basis)?))
    }

    /// Canonical form: the reduced row echelon form of the basis transpose.
    /// Two subspaces are equal iff their canonical forms are equal.
    pub fn canonical(&self) -> RatMatrix {
        self.basis.transpose().rref().0
    }
}

/// `dim(A · W)` for a subspace `W` of the source of `A`.
pub fn image_dim_of_composite(a: &RatMatrix, restricted_to: &Subspace) -> Result<usize> {
    if restricted_to.ambient_dim() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "subspace of Q^{} restricted through a map with {} columns",
            restricted_to.ambient_dim(),
            a.cols()
        )));
    }
    if restricted_to.dim() == 0 {
        return Ok(0);
    }
    Ok(a.mul(restricted_to.basis())?.rank())
}

struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

fn integer_rows(m: &RatMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            let l = row
                .iter()
                .filter(|x| !x.is_zero())
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let mut v: Vec<BigInt> = row
                .iter()
                .map(|x| if x.is_zero() { BigInt::zero() } else { x.numer() * (&l / x.denom()) })
                .collect();
            make_primitive(&mut v);
            v
        })
        .filter(|v: &Vec<BigInt>| v.iter().any(|x| !x.is_zero()))
        .collect()
}

fn make_primitive(v: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in v.iter() {
        if !x.is_zero() {
            g = g.gcd(x);
            if g.is_one() {
                return;
            }
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for x in v.iter_mut() {
        if !x.is_zero() {
            *x /= &g;
        }
    }
}

/// Fraction-free elimination. With `full`, entries above each pivot are
/// cleared as well (integer Gauss-Jordan); the returned rows are the nonzero
/// rows, row `r` having its leading entry in column `pivots[r]`.
fn echelon(mut rows: Vec<Vec<BigInt>>, cols: usize, full: bool) -> Echelon {
    let nrows = rows.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        if rows[r][col].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -&*x;
            }
        }
        let pivot_row = std::mem::take(&mut rows[r]);
        let support: Vec<usize> = (col..cols).filter(|&j| !pivot_row[j].is_zero()).collect();
        let piv = &pivot_row[col];
        let start = if full { 0 } else { r + 1 };
        for (i, row) in rows.iter_mut().enumerate().skip(start) {
            if i == r || row.is_empty() || row[col].is_zero() {
                continue;
            }
            let g = piv.gcd(&row[col]);
            let mul_self = piv / &g;
            let mul_pivot = &row[col] / &g;
            if !mul_self.is_one() {
                for x in row.iter_mut() {
                    if !x.is_zero() {
                        *x *= &mul_self;
                    }
                }
            }
            for &j in &support {
                row[j] -= &mul_pivot * &pivot_row[j];
            }
            make_primitive(row);
        }
        rows[r] = pivot_row;
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    Echelon { rows, pivots }
}
