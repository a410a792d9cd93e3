//! Dense row-major residue matrices and the modular matmul backend trait.

use crate::error::{Error, Result};
use crate::modarith::Modulus;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| u64::from(r == c))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Copies the `rows x cols` block at `(r0, c0)`, zero-filling past the edges.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| {
            let (rr, cc) = (r0 + r, c0 + c);
            if rr < self.rows && cc < self.cols {
                self.get(rr, cc)
            } else {
                0
            }
        })
    }

    /// Writes `tile` at `(r0, c0)`, dropping entries past the edges.
    pub fn write_block(&mut self, r0: usize, c0: usize, tile: &Matrix) {
        for r in 0..tile.rows.min(self.rows.saturating_sub(r0)) {
            for c in 0..tile.cols.min(self.cols.saturating_sub(c0)) {
                self.set(r0 + r, c0 + c, tile.get(r, c));
            }
        }
    }
}

/// Which modulus reduces each element of a matmul output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModulusAssignment {
    /// One modulus for every output element.
    Shared(Modulus),
    /// `moduli[i]` reduces output row `i`.
    PerRow(Vec<Modulus>),
    /// `moduli[j]` reduces output column `j`.
    PerColumn(Vec<Modulus>),
}

impl ModulusAssignment {
    #[inline]
    pub fn for_element(&self, row: usize, col: usize) -> &Modulus {
        match self {
            Self::Shared(m) => m,
            Self::PerRow(ms) => &ms[row],
            Self::PerColumn(ms) => &ms[col],
        }
    }

    /// Checks the assignment covers an output of the given shape.
    pub fn check_output(&self, rows: usize, cols: usize) -> Result<()> {
        match self {
            Self::Shared(_) => Ok(()),
            Self::PerRow(ms) if ms.len() == rows => Ok(()),
            Self::PerColumn(ms) if ms.len() == cols => Ok(()),
            Self::PerRow(ms) => Err(Error::ShapeMismatch(format!(
                "{} row moduli for {rows} output rows",
                ms.len()
            ))),
            Self::PerColumn(ms) => Err(Error::ShapeMismatch(format!(
                "{} column moduli for {cols} output columns",
                ms.len()
            ))),
        }
    }

    /// The assignment restricted to the output block at `(r0, c0)`.
    ///
    /// Lines past the edge of the output (padding) reuse the last modulus;
    /// their values are discarded.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        let window = |ms: &[Modulus], start: usize, len: usize| -> Vec<Modulus> {
            (start..start + len)
                .map(|i| ms[i.min(ms.len() - 1)])
                .collect()
        };
        match self {
            Self::Shared(m) => Self::Shared(*m),
            Self::PerRow(ms) => Self::PerRow(window(ms, r0, rows)),
            Self::PerColumn(ms) => Self::PerColumn(window(ms, c0, cols)),
        }
    }
}

/// A backend that computes `C = A x B` with each output element reduced by
/// its assigned modulus after every multiply-accumulate.
///
/// Operands must be below 2^31 but need not be reduced by the output modulus.
pub trait ModMatMul {
    fn matmul(&self, a: &Matrix, b: &Matrix, mods: &ModulusAssignment) -> Result<Matrix>;
}

pub(crate) fn check_matmul_shapes(a: &Matrix, b: &Matrix, mods: &ModulusAssignment) -> Result<()> {
    if a.cols() != b.rows() {
        return Err(Error::ShapeMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    mods.check_output(a.rows(), b.cols())
}

/// Host triple loop. Each output is summed exactly in 128 bits and reduced
/// once, which gives the same residue as reducing after every MAC.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlainMatMul;

impl ModMatMul for PlainMatMul {
    fn matmul(&self, a: &Matrix, b: &Matrix, mods: &ModulusAssignment) -> Result<Matrix> {
        check_matmul_shapes(a, b, mods)?;
        let mut c = Matrix::zeros(a.rows(), b.cols());
        let mut acc = vec![0u128; b.cols()];
        for i in 0..a.rows() {
            acc.fill(0);
            for (k, &x) in a.row(i).iter().enumerate() {
                for (s, &y) in acc.iter_mut().zip(b.row(k)) {
                    *s += (x * y) as u128;
                }
            }
            for (j, &s) in acc.iter().enumerate() {
                c.set(i, j, (s % mods.for_element(i, j).value() as u128) as u64);
            }
        }
        Ok(c)
    }
}
