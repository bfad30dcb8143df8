//! Dense matrices over a truncated Witt ring, Smith-style reduction, and
//! division-free characteristic polynomials.

use crate::error::{Error, Result};
use crate::witt::{RingContext, RingElement};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<RingElement>,
}

impl Matrix {
    pub fn zeros(ctx: &RingContext, rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![ctx.zero(); rows * cols],
        }
    }

    pub fn identity(ctx: &RingContext, n: usize) -> Matrix {
        let mut m = Matrix::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, ctx.one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> RingElement) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<RingElement>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Integer entries, for tests and examples.
    pub fn from_i64(ctx: &RingContext, rows: &[&[i64]]) -> Matrix {
        Matrix::from_fn(rows.len(), rows.first().map_or(0, |r| r.len()), |i, j| {
            ctx.from_i64(rows[i][j])
        })
    }

    pub fn diagonal(ctx: &RingContext, entries: &[RingElement]) -> Matrix {
        let n = entries.len();
        Matrix::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { ctx.zero() })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(ctx: &RingContext, rows: usize, columns: &[Vec<RingElement>]) -> Matrix {
        let mut m = Matrix::zeros(ctx, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &RingElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: RingElement) {
        self.data[i * self.cols + j] = x;
    }

    pub fn column(&self, j: usize) -> Vec<RingElement> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<RingElement> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn columns(&self) -> Vec<Vec<RingElement>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn entries(&self) -> &[RingElement] {
        &self.data
    }

    pub fn map(&self, f: impl FnMut(&RingElement) -> RingElement) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Rows `rs` and columns `cs`.
    pub fn submatrix(&self, rs: &[usize], cs: &[usize]) -> Matrix {
        Matrix::from_fn(rs.len(), cs.len(), |i, j| self.get(rs[i], cs[j]).clone())
    }

    pub fn select_columns(&self, cs: &[usize]) -> Matrix {
        let rs: Vec<usize> = (0..self.rows).collect();
        self.submatrix(&rs, cs)
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        Matrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    pub fn mul(&self, ctx: &RingContext, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Matrix::zeros(ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if ctx.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if ctx.is_zero(b) {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = ctx.add(&out.data[idx], &ctx.mul(a, b));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, ctx: &RingContext, v: &[RingElement]) -> Vec<RingElement> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = ctx.zero();
                for (j, x) in v.iter().enumerate() {
                    acc = ctx.add(&acc, &ctx.mul(self.get(i, j), x));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, ctx: &RingContext, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| ctx.add(a, b)).collect(),
        }
    }

    pub fn sub(&self, ctx: &RingContext, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| ctx.sub(a, b)).collect(),
        }
    }

    pub fn scale(&self, ctx: &RingContext, c: &RingElement) -> Matrix {
        self.map(|x| ctx.mul(x, c))
    }

    /// Entrywise `σ^k`.
    pub fn frobenius(&self, ctx: &RingContext, k: i64) -> Matrix {
        if k.rem_euclid(ctx.degree() as i64) == 0 {
            return self.clone();
        }
        self.map(|x| ctx.frobenius(x, k))
    }

    /// Entrywise reduction to the residue field of `ctx`.
    pub fn reduce(&self, ctx: &RingContext) -> Matrix {
        let field = ctx.residue_field();
        self.map(|x| field.coerce(x))
    }

    /// Entrywise transfer into `ctx` (see [`RingContext::coerce`]).
    pub fn coerce(&self, ctx: &RingContext) -> Matrix {
        self.map(|x| ctx.coerce(x))
    }

    pub fn is_zero(&self, ctx: &RingContext) -> bool {
        self.data.iter().all(|x| ctx.is_zero(x))
    }

    /// Minimum entry valuation, `None` when the matrix vanishes.
    pub fn valuation(&self, ctx: &RingContext) -> Option<u32> {
        self.data.iter().filter_map(|x| ctx.valuation(x)).min()
    }

    pub fn divide_by_p_power(&self, ctx: &RingContext, k: u32) -> Result<Matrix> {
        let data = self
            .data
            .iter()
            .map(|x| ctx.divide_by_p_power(x, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn pow(&self, ctx: &RingContext, mut e: u64) -> Matrix {
        let mut result = Matrix::identity(ctx, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(ctx, &base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(ctx, &base);
            }
        }
        result
    }

    /// Coefficients of `det(T·I − A)`, lowest degree first (monic), by
    /// Berkowitz's division-free recurrence.
    pub fn charpoly(&self, ctx: &RingContext) -> Vec<RingElement> {
        assert!(self.is_square());
        let n = self.rows;
        // highest degree first while building
        let mut poly = vec![ctx.one()];
        for r in 0..n {
            // leading principal block of size r sits above row r
            let a = self.get(r, r).clone();
            let row: Vec<RingElement> = (0..r).map(|j| self.get(r, j).clone()).collect();
            let mut col: Vec<RingElement> = (0..r).map(|i| self.get(i, r).clone()).collect();
            // Toeplitz column: 1, -a, -R C, -R A C, ...
            let mut t = Vec::with_capacity(r + 2);
            t.push(ctx.one());
            t.push(ctx.neg(&a));
            for _ in 0..r {
                let mut dot = ctx.zero();
                for (x, y) in row.iter().zip(&col) {
                    dot = ctx.add(&dot, &ctx.mul(x, y));
                }
                t.push(ctx.neg(&dot));
                let next: Vec<RingElement> = (0..r)
                    .map(|i| {
                        let mut acc = ctx.zero();
                        for (j, c) in col.iter().enumerate() {
                            acc = ctx.add(&acc, &ctx.mul(self.get(i, j), c));
                        }
                        acc
                    })
                    .collect();
                col = next;
            }
            let mut next = vec![ctx.zero(); r + 2];
            for (i, ti) in t.iter().enumerate() {
                for (j, pj) in poly.iter().enumerate() {
                    if i + j < r + 2 {
                        next[i + j] = ctx.add(&next[i + j], &ctx.mul(ti, pj));
                    }
                }
            }
            poly = next;
        }
        poly.reverse();
        poly
    }

    pub fn det(&self, ctx: &RingContext) -> RingElement {
        assert!(self.is_square());
        let n = self.rows;
        match n {
            0 => ctx.one(),
            1 => self.get(0, 0).clone(),
            2 => ctx.sub(
                &ctx.mul(self.get(0, 0), self.get(1, 1)),
                &ctx.mul(self.get(0, 1), self.get(1, 0)),
            ),
            _ => {
                let c0 = self.charpoly(ctx)[0].clone();
                if n % 2 == 1 {
                    ctx.neg(&c0)
                } else {
                    c0
                }
            }
        }
    }

    /// `d`-th exterior power in the lexicographic basis of `d`-subsets.
    pub fn wedge(&self, ctx: &RingContext, d: usize) -> Matrix {
        let rs = subsets(self.rows, d);
        let cs = subsets(self.cols, d);
        Matrix::from_fn(rs.len(), cs.len(), |i, j| self.submatrix(&rs[i], &cs[j]).det(ctx))
    }

    /// Inverse of a matrix invertible over the ring.
    pub fn inverse(&self, ctx: &RingContext) -> Result<Matrix> {
        assert!(self.is_square());
        let s = smith(ctx, self, true);
        if let Some(&bad) = s.valuations.iter().find(|v| **v != Some(0)) {
            return Err(Error::NotUnit { valuation: bad });
        }
        // E A C = I, so A^{-1} = C E
        Ok(s.c.mul(ctx, &s.e))
    }
}

/// Lexicographically ordered `d`-subsets of `0..n`.
pub fn subsets(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, d, &mut Vec::with_capacity(d), &mut out);
    out
}

/// Result of [`smith`]: `e · A · c = diag(p^v_1, …)` exactly, with
/// `e_inv = e^{-1}`. Pivots are chosen with non-decreasing valuation;
/// `None` marks a diagonal entry that vanishes at working precision.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub e: Matrix,
    pub e_inv: Matrix,
    pub c: Matrix,
    pub valuations: Vec<Option<u32>>,
}

impl SmithForm {
    /// Number of numerically nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        self.valuations.iter().filter(|v| v.is_some()).count()
    }
}

/// Smith-style reduction over the local ring: pivot on an entry of minimal
/// valuation (first in row-major order), normalize it to `p^v`, clear its
/// row and column. Transforms are tracked only when `track` is set.
pub fn smith(ctx: &RingContext, a: &Matrix, track: bool) -> SmithForm {
    let (rows, cols) = (a.rows, a.cols);
    let mut w = a.clone();
    let (mut e, mut e_inv, mut c) = if track {
        (
            Matrix::identity(ctx, rows),
            Matrix::identity(ctx, rows),
            Matrix::identity(ctx, cols),
        )
    } else {
        (Matrix::zeros(ctx, 0, 0), Matrix::zeros(ctx, 0, 0), Matrix::zeros(ctx, 0, 0))
    };
    let steps = rows.min(cols);
    let mut valuations = vec![None; steps];
    for t in 0..steps {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if let Some(v) = ctx.valuation(w.get(i, j)) {
                    if best.map_or(true, |(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                        if v == 0 {
                            break;
                        }
                    }
                }
            }
            if best.is_some_and(|b| b.0 == 0) {
                break;
            }
        }
        let Some((v, pi, pj)) = best else {
            break;
        };
        valuations[t] = Some(v);
        if pi != t {
            w.swap_rows(pi, t);
            if track {
                e.swap_rows(pi, t);
                e_inv.swap_cols(pi, t);
            }
        }
        if pj != t {
            w.swap_cols(pj, t);
            if track {
                c.swap_cols(pj, t);
            }
        }
        let unit = ctx.divide_by_p_power(w.get(t, t), v).expect("pivot valuation");
        let unit_inv = ctx.invert(&unit).expect("pivot unit");
        if !ctx.is_one(&unit_inv) {
            w.scale_row(ctx, t, &unit_inv);
            if track {
                e.scale_row(ctx, t, &unit_inv);
                e_inv.scale_col(ctx, t, &unit);
            }
        }
        for i in t + 1..rows {
            if ctx.is_zero(w.get(i, t)) {
                continue;
            }
            let m = ctx.divide_by_p_power(w.get(i, t), v).expect("minimal valuation");
            w.add_row_multiple(ctx, i, t, &ctx.neg(&m), t);
            if track {
                e.add_row_multiple(ctx, i, t, &ctx.neg(&m), 0);
                e_inv.add_col_multiple(ctx, t, i, &m);
            }
        }
        for j in t + 1..cols {
            if ctx.is_zero(w.get(t, j)) {
                continue;
            }
            let m = ctx.divide_by_p_power(w.get(t, j), v).expect("minimal valuation");
            let neg = ctx.neg(&m);
            let val = ctx.add(w.get(t, j), &ctx.mul(&neg, w.get(t, t)));
            w.set(t, j, val);
            if track {
                c.add_col_multiple(ctx, j, t, &neg);
            }
        }
    }
    SmithForm {
        e,
        e_inv,
        c,
        valuations,
    }
}

impl Matrix {
    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn scale_row(&mut self, ctx: &RingContext, i: usize, s: &RingElement) {
        for j in 0..self.cols {
            let idx = i * self.cols + j;
            self.data[idx] = ctx.mul(&self.data[idx], s);
        }
    }

    fn scale_col(&mut self, ctx: &RingContext, j: usize, s: &RingElement) {
        for i in 0..self.rows {
            let idx = i * self.cols + j;
            self.data[idx] = ctx.mul(&self.data[idx], s);
        }
    }

    /// row_dst += m · row_src, for columns `from..`.
    fn add_row_multiple(&mut self, ctx: &RingContext, dst: usize, src: usize, m: &RingElement, from: usize) {
        for j in from..self.cols {
            let s = &self.data[src * self.cols + j];
            if ctx.is_zero(s) {
                continue;
            }
            let prod = ctx.mul(m, s);
            let idx = dst * self.cols + j;
            self.data[idx] = ctx.add(&self.data[idx], &prod);
        }
    }

    /// col_dst += m · col_src.
    fn add_col_multiple(&mut self, ctx: &RingContext, dst: usize, src: usize, m: &RingElement) {
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src];
            if ctx.is_zero(s) {
                continue;
            }
            let prod = ctx.mul(m, s);
            let idx = i * self.cols + dst;
            self.data[idx] = ctx.add(&self.data[idx], &prod);
        }
    }
}

/// Linear algebra over a residue field (a context of precision 1).
pub mod field {
    use super::*;

    pub fn rank(ctx: &RingContext, a: &Matrix) -> usize {
        debug_assert!(ctx.is_field());
        smith(ctx, a, false).rank()
    }

    /// Basis of the right kernel, as columns.
    pub fn kernel(ctx: &RingContext, a: &Matrix) -> Vec<Vec<RingElement>> {
        debug_assert!(ctx.is_field());
        let s = smith(ctx, a, true);
        let r = s.rank();
        (r..a.cols()).map(|j| s.c.column(j)).collect()
    }

    /// Reduced column-echelon basis of the span of `vectors` in `F^dim`;
    /// equal spans give identical outputs.
    pub fn canonical_span(ctx: &RingContext, dim: usize, vectors: &[Vec<RingElement>]) -> Vec<Vec<RingElement>> {
        debug_assert!(ctx.is_field());
        let mut rows: Vec<Vec<RingElement>> = vectors.to_vec();
        let mut out_rows = 0;
        for col in 0..dim {
            let Some(piv) = (out_rows..rows.len()).find(|&i| !ctx.is_zero(&rows[i][col])) else {
                continue;
            };
            rows.swap(out_rows, piv);
            let inv = ctx.invert(&rows[out_rows][col]).expect("field element");
            rows[out_rows] = rows[out_rows].iter().map(|x| ctx.mul(x, &inv)).collect();
            for i in 0..rows.len() {
                if i != out_rows && !ctx.is_zero(&rows[i][col]) {
                    let m = rows[i][col].clone();
                    let pivot_row = rows[out_rows].clone();
                    rows[i] = rows[i]
                        .iter()
                        .zip(&pivot_row)
                        .map(|(x, y)| ctx.sub(x, &ctx.mul(&m, y)))
                        .collect();
                }
            }
            out_rows += 1;
        }
        rows.truncate(out_rows);
        rows
    }

    pub fn same_span(ctx: &RingContext, dim: usize, a: &[Vec<RingElement>], b: &[Vec<RingElement>]) -> bool {
        canonical_span(ctx, dim, a) == canonical_span(ctx, dim, b)
    }

    /// True when every vector of `a` lies in the span of `b`.
    pub fn contained_in(ctx: &RingContext, dim: usize, a: &[Vec<RingElement>], b: &[Vec<RingElement>]) -> bool {
        let mut both = b.to_vec();
        both.extend_from_slice(a);
        canonical_span(ctx, dim, &both).len() == canonical_span(ctx, dim, b).len()
    }

    /// Extends independent vectors `basis` to a basis of `F^dim` by standard
    /// vectors; returns the added indices.
    pub fn complement(ctx: &RingContext, dim: usize, basis: &[Vec<RingElement>]) -> Vec<usize> {
        let mut current = basis.to_vec();
        let mut added = Vec::new();
        for k in 0..dim {
            if current.len() == dim {
                break;
            }
            let mut unit = vec![ctx.zero(); dim];
            unit[k] = ctx.one();
            let mut trial = current.clone();
            trial.push(unit);
            if canonical_span(ctx, dim, &trial).len() == trial.len() {
                current = trial;
                added.push(k);
            }
        }
        added
    }
}
