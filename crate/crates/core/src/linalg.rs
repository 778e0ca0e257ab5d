//! Dense and sparse matrix kernels.
//!
//! Dense matrices are row-major `f64`. [`SparseMatrix`] holds the 0/1
//! adjacency matrices of automata; [`CsrMatrix`] holds real-valued sparse
//! matrices such as materialised Kronecker lifts.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Budget on a Kronecker product's row (and column) dimension.
pub const KRON_DIM_BUDGET: usize = 20_000;

/// Largest matrix accepted by [`eigenvalues`].
pub const EIGEN_DIM_LIMIT: usize = 2_000;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters(format!("matrix entry {bad} is not finite")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != c) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} entries, expected {c}",
                row.len()
            )));
        }
        Self::from_row_major(r, c, rows.concat())
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn scale(&self, alpha: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * alpha).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · self`.
    pub fn gram(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..self.cols {
                if row[i] == 0.0 {
                    continue;
                }
                for j in 0..self.cols {
                    out.data[i * self.cols + j] += row[i] * row[j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Square 0/1 matrix stored as a sorted, row-major coordinate pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
}

impl SparseMatrix {
    /// Builds from arbitrary coordinates; duplicates are merged.
    pub fn from_entries(dim: usize, mut entries: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(r, c)) = entries.iter().find(|(r, c)| *r >= dim || *c >= dim) {
            return Err(Error::DimensionMismatch(format!(
                "entry ({r}, {c}) outside a {dim}x{dim} matrix"
            )));
        }
        entries.sort_unstable();
        entries.dedup();
        Ok(Self::from_sorted_unchecked(dim, entries))
    }

    pub(crate) fn from_sorted_unchecked(dim: usize, entries: Vec<(usize, usize)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0] < w[1]));
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = entries.into_iter().map(|(_, c)| c).collect();
        Self { dim, row_ptr, cols }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_sorted_unchecked(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.row(r).binary_search(&c).is_ok()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).iter().map(move |&c| (r, c)))
    }

    pub fn row_counts(&self) -> Vec<usize> {
        self.row_ptr.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for (r, c) in self.entries() {
            m[(r, c)] = 1.0;
        }
        m
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut entries: Vec<(usize, usize)> = self.entries().map(|(r, c)| (c, r)).collect();
        entries.sort_unstable();
        Self::from_sorted_unchecked(self.dim, entries)
    }

    /// `self · x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|r| self.row(r).iter().map(|&c| x[c]).sum()).collect()
    }

    /// `selfᵀ · x`.
    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (r, &xr) in x.iter().enumerate() {
            for &c in self.row(r) {
                out[c] += xr;
            }
        }
        out
    }

    /// `self · b` for a dense `b`.
    pub fn mul_dense(&self, b: &Matrix) -> Result<Matrix> {
        if b.rows() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{0}x{0} sparse times {1}x{2}",
                self.dim,
                b.rows(),
                b.cols()
            )));
        }
        let mut out = Matrix::zeros(self.dim, b.cols());
        for r in 0..self.dim {
            for &c in self.row(r) {
                for j in 0..b.cols() {
                    out[(r, j)] += b[(c, j)];
                }
            }
        }
        Ok(out)
    }
}

/// Real-valued sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    fn from_rows(rows: usize, cols: usize, row_data: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in row_data {
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                rows[c].push((r, v));
            }
        }
        Self::from_rows(self.cols, self.rows, rows)
    }

    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = vec![0.0; other.cols];
        let mut touched = vec![false; other.cols];
        let mut pattern = Vec::new();
        let rows = (0..self.rows)
            .map(|r| {
                for (k, a) in self.row(r) {
                    for (c, b) in other.row(k) {
                        if !touched[c] {
                            touched[c] = true;
                            pattern.push(c);
                        }
                        acc[c] += a * b;
                    }
                }
                pattern.sort_unstable();
                let row = pattern
                    .drain(..)
                    .filter_map(|c| {
                        touched[c] = false;
                        let v = std::mem::take(&mut acc[c]);
                        (v != 0.0).then_some((c, v))
                    })
                    .collect();
                row
            })
            .collect();
        Ok(Self::from_rows(self.rows, other.cols, rows))
    }

    /// Spectral radius from the diagonal blocks of the strongly connected
    /// components of the sparsity graph; the matrix is block triangular
    /// under that ordering.
    pub fn spectral_radius(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("spectral radius of a non-square matrix".into()));
        }
        let adjacency: Vec<Vec<usize>> = (0..self.rows).map(|r| self.row(r).map(|(c, _)| c).collect()).collect();
        let mut rho: f64 = 0.0;
        for comp in strongly_connected_components(&adjacency) {
            if comp.len() == 1 {
                let r = comp[0];
                let diag = self.row(r).find(|(c, _)| *c == r).map_or(0.0, |(_, v)| v);
                rho = rho.max(diag.abs());
                continue;
            }
            rho = rho.max(spectral_radius(&self.submatrix(&comp))?);
        }
        Ok(rho)
    }

    /// Largest singular value over the connected components of the
    /// bipartite row/column sparsity graph.
    pub fn norm2(&self) -> Result<f64> {
        let n = self.rows + self.cols;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for r in 0..self.rows {
            for (c, _) in self.row(r) {
                let (a, b) = (find(&mut parent, r), find(&mut parent, self.rows + c));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
        for r in 0..self.rows {
            if self.row_ptr[r] < self.row_ptr[r + 1] {
                let root = find(&mut parent, r);
                groups.entry(root).or_default().0.push(r);
            }
        }
        for c in 0..self.cols {
            let root = find(&mut parent, self.rows + c);
            if let Some(g) = groups.get_mut(&root) {
                g.1.push(c);
            }
        }
        let mut best: f64 = 0.0;
        for (rows, cols) in groups.values() {
            let pos: std::collections::HashMap<usize, usize> = cols.iter().enumerate().map(|(j, &c)| (c, j)).collect();
            let mut block = Matrix::zeros(rows.len(), cols.len());
            for (i, &r) in rows.iter().enumerate() {
                for (c, v) in self.row(r) {
                    block[(i, pos[&c])] += v;
                }
            }
            best = best.max(singular_max(&block)?);
        }
        Ok(best)
    }

    fn submatrix(&self, idx: &[usize]) -> Matrix {
        let mut pos = std::collections::HashMap::with_capacity(idx.len());
        for (i, &v) in idx.iter().enumerate() {
            pos.insert(v, i);
        }
        let mut m = Matrix::zeros(idx.len(), idx.len());
        for (i, &r) in idx.iter().enumerate() {
            for (c, v) in self.row(r) {
                if let Some(&j) = pos.get(&c) {
                    m[(i, j)] += v;
                }
            }
        }
        m
    }
}

/// Iterative Tarjan; components are returned in reverse topological order.
fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Kronecker product of two dense matrices.
pub fn kronecker(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    if rows.max(cols) > KRON_DIM_BUDGET {
        return Err(Error::SizeBudgetExceeded {
            required: rows.max(cols),
            budget: KRON_DIM_BUDGET,
        });
    }
    let mut out = Matrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let s = a[(i, j)];
            if s == 0.0 {
                continue;
            }
            for p in 0..b.rows() {
                for q in 0..b.cols() {
                    out[(i * b.rows() + p, j * b.cols() + q)] = s * b[(p, q)];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of a 0/1 sparse matrix with a dense matrix.
pub fn kronecker_sparse(a: &SparseMatrix, b: &Matrix) -> Result<Matrix> {
    kronecker(&a.to_dense(), b)
}

/// Kronecker product of a 0/1 sparse matrix with a dense matrix, kept sparse.
pub fn kronecker_csr(a: &SparseMatrix, b: &Matrix) -> Result<CsrMatrix> {
    let rows = a.dim() * b.rows();
    let cols = a.dim() * b.cols();
    if rows.max(cols) > KRON_DIM_BUDGET {
        return Err(Error::SizeBudgetExceeded {
            required: rows.max(cols),
            budget: KRON_DIM_BUDGET,
        });
    }
    let mut row_data = Vec::with_capacity(rows);
    for i in 0..a.dim() {
        for p in 0..b.rows() {
            let mut row = Vec::with_capacity(a.row(i).len() * b.cols());
            for &j in a.row(i) {
                for q in 0..b.cols() {
                    let v = b[(p, q)];
                    if v != 0.0 {
                        row.push((j * b.cols() + q, v));
                    }
                }
            }
            row_data.push(row);
        }
    }
    Ok(CsrMatrix::from_rows(rows, cols, row_data))
}

/// All eigenvalues of a square matrix, via Householder reduction to upper
/// Hessenberg form and Francis double-shift QR iteration.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n > EIGEN_DIM_LIMIT {
        return Err(Error::SizeBudgetExceeded {
            required: n,
            budget: EIGEN_DIM_LIMIT,
        });
    }
    // permute to block upper triangular form along the strongly connected
    // components of the sparsity pattern and solve each diagonal block
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|r| (0..n).filter(|&c| a[(r, c)] != 0.0).collect())
        .collect();
    let mut out = Vec::with_capacity(n);
    for comp in strongly_connected_components(&adjacency) {
        if let [v] = comp[..] {
            out.push(Complex64::new(a[(v, v)], 0.0));
            continue;
        }
        let mut h = Matrix::zeros(comp.len(), comp.len());
        for (i, &r) in comp.iter().enumerate() {
            for (j, &c) in comp.iter().enumerate() {
                h[(i, j)] = a[(r, c)];
            }
        }
        reduce_to_hessenberg(&mut h);
        out.extend(hessenberg_qr(h)?);
    }
    Ok(out)
}

fn reduce_to_hessenberg(h: &mut Matrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let f: f64 = (m..=high).rev().map(|i| ort[i] * h[(i, j)]).sum::<f64>() / hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let f: f64 = (m..=high).rev().map(|j| ort[j] * h[(i, j)]).sum::<f64>() / hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }
}

fn hessenberg_qr(mut h: Matrix) -> Result<Vec<Complex64>> {
    let nn = h.rows();
    let cap = 30 * nn.max(10);
    let mut re = vec![0.0; nn];
    let mut im = vec![0.0; nn];
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r) = (0.0f64, 0.0f64, 0.0f64);
    let mut s: f64;
    let mut z: f64;
    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let low = 0isize;
    let mut iter = 0usize;
    let mut total = 0usize;
    let at = |h: &Matrix, i: isize, j: isize| h[(i as usize, j as usize)];

    while n >= low {
        let mut l = n;
        while l > low {
            s = at(&h, l - 1, l - 1).abs() + at(&h, l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            let sub = at(&h, l, l - 1).abs();
            if sub < eps * s || sub < eps * norm {
                break;
            }
            l -= 1;
        }

        if l == n {
            let nu = n as usize;
            h[(nu, nu)] += exshift;
            re[nu] = h[(nu, nu)];
            im[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            let nu = n as usize;
            let w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            let x = h[(nu, nu)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                re[nu - 1] = x + z;
                re[nu] = if z != 0.0 { x - w / z } else { x + z };
                im[nu - 1] = 0.0;
                im[nu] = 0.0;
            } else {
                re[nu - 1] = x + p;
                re[nu] = x + p;
                im[nu - 1] = z;
                im[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            let nu = n as usize;
            let mut x = h[(nu, nu)];
            let mut y = 0.0;
            let mut w = 0.0;
            if l < n {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            if iter > 0 && iter.is_multiple_of(10) && !iter.is_multiple_of(30) {
                exshift += x;
                for i in low as usize..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter > 0 && iter.is_multiple_of(30) {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low as usize..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total += 1;
            if iter > cap {
                return Err(Error::NoConvergence { iterations: total });
            }

            let mut m = n - 2;
            while m >= l {
                z = at(&h, m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / at(&h, m + 1, m) + at(&h, m, m + 1);
                q = at(&h, m + 1, m + 1) - z - r - s;
                r = at(&h, m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = at(&h, m, m - 1).abs() * (q.abs() + r.abs());
                let rhs = eps * (p.abs() * (at(&h, m - 1, m - 1).abs() + z.abs() + at(&h, m + 1, m + 1).abs()));
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2) as usize..=nu {
                h[(i, i - 2)] = 0.0;
                if i > (m + 2) as usize {
                    h[(i, i - 3)] = 0.0;
                }
            }

            let mut k = m;
            while k < n {
                let ku = k as usize;
                let notlast = k != n - 1;
                if k != m {
                    p = h[(ku, ku - 1)];
                    q = h[(ku + 1, ku - 1)];
                    r = if notlast { h[(ku + 2, ku - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(ku, ku - 1)] = -s * x;
                    } else if l != m {
                        h[(ku, ku - 1)] = -h[(ku, ku - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in ku..nn {
                        let mut pp = h[(ku, j)] + q * h[(ku + 1, j)];
                        if notlast {
                            pp += r * h[(ku + 2, j)];
                            h[(ku + 2, j)] -= pp * z;
                        }
                        h[(ku, j)] -= pp * x;
                        h[(ku + 1, j)] -= pp * y;
                    }
                    for i in 0..=nu.min(ku + 3) {
                        let mut pp = x * h[(i, ku)] + y * h[(i, ku + 1)];
                        if notlast {
                            pp += z * h[(i, ku + 2)];
                            h[(i, ku + 2)] -= pp * r;
                        }
                        h[(i, ku)] -= pp;
                        h[(i, ku + 1)] -= pp * q;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
}

pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().fold(0.0, |m, z| m.max(z.norm())))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn symmetric_max_eigenvalue(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Largest singular value through the eigenvalues of the smaller of `AᵀA`
/// and `AAᵀ`.
pub fn singular_max(a: &Matrix) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    let gram = if a.rows() < a.cols() { a.transpose().gram() } else { a.gram() };
    Ok(symmetric_max_eigenvalue(&gram)?.max(0.0).sqrt())
}

const NORM_TOLERANCE: f64 = 1e-10;
const NORM_MAX_ITERATIONS: usize = 10_000;

/// Largest singular value by power iteration on `AᵀA`.
pub fn operator_norm2(a: &Matrix) -> Result<f64> {
    let n = a.cols();
    if n == 0 || a.rows() == 0 || a.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let gram = a.gram();
    // deterministic start with all components excited
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i as f64 + 1.0).sqrt()).collect();
    normalize2(&mut v);
    let mut estimate = 0.0;
    for _ in 0..NORM_MAX_ITERATIONS {
        let mut w = gram.mul_vec(&v);
        let norm = l2(&w);
        if norm == 0.0 {
            return Ok(0.0);
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let rayleigh: f64 = w.iter().zip(gram.mul_vec(&w)).map(|(a, b)| a * b).sum();
        let converged = (rayleigh - estimate).abs() <= NORM_TOLERANCE * rayleigh.abs();
        estimate = rayleigh;
        v = w;
        if converged {
            return Ok(estimate.max(0.0).sqrt());
        }
    }
    Err(Error::NoConvergence {
        iterations: NORM_MAX_ITERATIONS,
    })
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize2(v: &mut [f64]) {
    let n = l2(v);
    v.iter_mut().for_each(|x| *x /= n);
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Dominant eigenvalue with left and right Perron vectors.
#[derive(Debug, Clone)]
pub struct PerronPair {
    pub lambda: f64,
    /// Right Perron vector of `Pᵀ` (left vector of `P`), 1-normalised.
    pub x: Vec<f64>,
    /// Right Perron vector of `P`, 1-normalised.
    pub y: Vec<f64>,
    pub iterations: usize,
}

const PERRON_TOLERANCE: f64 = 1e-10;
pub const PERRON_MAX_ITERATIONS: usize = 1_000_000;

/// Perron pair of a primitive 0/1 matrix by power iteration.
///
/// Iterates on `P + I`, which has the same Perron vectors and a dominant
/// eigenvalue shifted by one, damping subdominant eigenvalues on the circle.
pub fn perron_pair(p: &SparseMatrix) -> Result<PerronPair> {
    let n = p.dim();
    if n == 0 {
        return Err(Error::InvalidParameters("Perron pair of an empty matrix".into()));
    }
    let (y, lam_y, it_y) = shifted_power(n, |v| p.mul_vec(v))?;
    let (x, lam_x, it_x) = shifted_power(n, |v| p.transpose_mul_vec(v))?;
    Ok(PerronPair {
        lambda: 0.5 * (lam_x + lam_y),
        x,
        y,
        iterations: it_x.max(it_y),
    })
}

fn shifted_power(n: usize, apply: impl Fn(&[f64]) -> Vec<f64>) -> Result<(Vec<f64>, f64, usize)> {
    let mut v = vec![1.0 / n as f64; n];
    for it in 1..=PERRON_MAX_ITERATIONS {
        let mut w = apply(&v);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += vi;
        }
        let norm = l1(&w);
        w.iter_mut().for_each(|x| *x /= norm);
        let delta: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = w;
        if delta <= PERRON_TOLERANCE * 1e-2 {
            // ‖v‖₁ = 1 and v > 0, so the eigenvalue is the 1-norm growth
            let lambda = l1(&apply(&v));
            return Ok((v, lambda, it));
        }
    }
    Err(Error::NoConvergence {
        iterations: PERRON_MAX_ITERATIONS,
    })
}
