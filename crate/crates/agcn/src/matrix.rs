//! Row-major dense matrices of 64-bit floats.
//!
//! This is the single value carrier for the whole crate: inputs, layer
//! activations, attention coefficients, distributions and weights all live
//! here. Two-dimensional only; no strides, no views.

use serde::{Deserialize, Serialize};

use crate::error::{AgcnError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(AgcnError::InvalidArgument(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build from explicit rows; handy in tests and loaders.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(AgcnError::InvalidArgument(format!(
                    "ragged rows: expected {c} columns, found {}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(DenseMatrix { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn shape_str(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Copy of columns `start..start + len`.
    pub fn slice_cols(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.cols, "column slice out of range");
        let mut out = DenseMatrix::zeros(self.rows, len);
        for i in 0..self.rows {
            out.row_mut(i)
                .copy_from_slice(&self.row(i)[start..start + len]);
        }
        out
    }

    /// Horizontal concatenation, left to right.
    pub fn hstack(parts: &[&DenseMatrix]) -> Result<Self> {
        let rows = parts
            .first()
            .ok_or_else(|| AgcnError::InvalidArgument("hstack of zero matrices".into()))?
            .rows;
        for p in parts {
            if p.rows != rows {
                return Err(AgcnError::ShapeMismatch {
                    op: "hstack",
                    lhs: format!("{rows} rows"),
                    rhs: p.shape_str(),
                });
            }
        }
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = DenseMatrix::zeros(rows, cols);
        for i in 0..rows {
            let mut offset = 0;
            for p in parts {
                out.row_mut(i)[offset..offset + p.cols].copy_from_slice(p.row(i));
                offset += p.cols;
            }
        }
        Ok(out)
    }

    /// Plain matrix product; the autodiff tape goes through here too.
    pub fn matmul(&self, b: &DenseMatrix) -> Result<Self> {
        if self.cols != b.rows {
            return Err(AgcnError::ShapeMismatch {
                op: "matmul",
                lhs: self.shape_str(),
                rhs: b.shape_str(),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (k, &aik) in a_row.iter().enumerate() {
                let b_row = &b.data[k * b.cols..(k + 1) * b.cols];
                for (o, &bv) in out_row.iter_mut().zip(b_row) {
                    *o += aik * bv;
                }
            }
        }
        Ok(out)
    }

    /// `self · bᵀ` without materializing the transpose.
    pub fn matmul_transpose_b(&self, b: &DenseMatrix) -> Result<Self> {
        if self.cols != b.cols {
            return Err(AgcnError::ShapeMismatch {
                op: "matmul_transpose_b",
                lhs: self.shape_str(),
                rhs: b.shape_str(),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, b.rows);
        for i in 0..self.rows {
            let a_row = self.row(i);
            for j in 0..b.rows {
                let dot: f64 = a_row.iter().zip(b.row(j)).map(|(x, y)| x * y).sum();
                out.data[i * b.rows + j] = dot;
            }
        }
        Ok(out)
    }

    /// `selfᵀ · g` without materializing the transpose.
    pub fn matmul_transpose_a(&self, g: &DenseMatrix) -> Result<Self> {
        if self.rows != g.rows {
            return Err(AgcnError::ShapeMismatch {
                op: "matmul_transpose_a",
                lhs: self.shape_str(),
                rhs: g.shape_str(),
            });
        }
        let mut out = DenseMatrix::zeros(self.cols, g.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let g_row = g.row(i);
            for (k, &aik) in a_row.iter().enumerate() {
                let out_row = &mut out.data[k * g.cols..(k + 1) * g.cols];
                for (o, &gv) in out_row.iter_mut().zip(g_row) {
                    *o += aik * gv;
                }
            }
        }
        Ok(out)
    }

    /// In-place `self += other`.
    pub fn add_assign(&mut self, other: &DenseMatrix) {
        assert_eq!(self.shape(), other.shape(), "add_assign shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
