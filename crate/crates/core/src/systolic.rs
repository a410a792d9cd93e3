//! Functional and cycle-level model of the modular systolic array.
//!
//! The array is `rows x cols` processing elements. Each PE holds one
//! multiplier and a Barrett reduction pipeline of `pipeline_depth` stages and
//! retires `R <- (R + a*b) mod q` with the modulus programmed for its output
//! line. A tile computes `C (rows x cols) += A (rows x k_dim) * B (k_dim x cols)`.
//!
//! Two dataflows are modeled:
//!
//! * output-stationary: cycle-stepped. Row `r` of `A` enters from the west
//!   delayed by `r` cycles, column `c` of `B` from the north delayed by `c`;
//!   both advance one PE per cycle and a PE issues a MAC whenever both
//!   operands are present. One extra cycle drains the accumulators. With
//!   `k_dim == rows` the count is `2*rows + cols + T - 2`.
//! * operand-stationary: event-driven. `B` is preloaded (untimed) with
//!   `B[k][c]` in PE `(k, c)`; rows of `A` stream from the west, and each
//!   partial sum leaves a PE only after the full `T`-stage pipeline before
//!   moving to the PE below.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_matmul_shapes, Matrix, ModMatMul, ModulusAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataflow {
    OutputStationary,
    OperandStationary,
}

impl Dataflow {
    pub fn name(self) -> &'static str {
        match self {
            Self::OutputStationary => "output_stationary",
            Self::OperandStationary => "operand_stationary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystolicConfig {
    pub rows: usize,
    pub cols: usize,
    /// Cycles for one modular MAC inside a PE.
    pub pipeline_depth: usize,
    /// Reduction length of one tile.
    pub k_dim: usize,
    pub dataflow: Dataflow,
}

impl Default for SystolicConfig {
    fn default() -> Self {
        Self {
            rows: 16,
            cols: 8,
            pipeline_depth: 6,
            k_dim: 16,
            dataflow: Dataflow::OutputStationary,
        }
    }
}

impl SystolicConfig {
    /// A square-reduction tile (`k_dim == rows`), the shape the closed form
    /// describes.
    pub fn square(rows: usize, cols: usize, pipeline_depth: usize, dataflow: Dataflow) -> Self {
        Self {
            rows,
            cols,
            pipeline_depth,
            k_dim: rows,
            dataflow,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.pipeline_depth == 0 || self.k_dim == 0 {
            return Err(Error::InvalidDimensions(format!(
                "array {}x{}, depth {}, k_dim {}: all must be >= 1",
                self.rows, self.cols, self.pipeline_depth, self.k_dim
            )));
        }
        Ok(())
    }
}

/// `2*S_R + S_C + T - 2` for the output-stationary dataflow.
pub fn cycle_count_closed_form(cfg: &SystolicConfig) -> Result<u64> {
    cfg.validate()?;
    match cfg.dataflow {
        Dataflow::OutputStationary => Ok((2 * cfg.rows + cfg.cols + cfg.pipeline_depth - 2) as u64),
        Dataflow::OperandStationary => Err(Error::NoClosedForm("operand-stationary")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileResult {
    pub c: Matrix,
    pub cycles: u64,
}

fn check_tile(
    a: &Matrix,
    b: &Matrix,
    mods: &ModulusAssignment,
    cfg: &SystolicConfig,
) -> Result<()> {
    cfg.validate()?;
    if a.shape() != (cfg.rows, cfg.k_dim) || b.shape() != (cfg.k_dim, cfg.cols) {
        return Err(Error::ShapeMismatch(format!(
            "tiles {:?} x {:?} on a {}x{} array with k_dim {}",
            a.shape(),
            b.shape(),
            cfg.rows,
            cfg.cols,
            cfg.k_dim
        )));
    }
    mods.check_output(cfg.rows, cfg.cols)
}

/// Runs one tile with the dataflow selected in `cfg`.
pub fn simulate_tile(
    a: &Matrix,
    b: &Matrix,
    mods: &ModulusAssignment,
    cfg: &SystolicConfig,
) -> Result<TileResult> {
    simulate_tile_acc(a, b, None, mods, cfg)
}

/// As [`simulate_tile`], starting from the accumulators in `acc`.
pub fn simulate_tile_acc(
    a: &Matrix,
    b: &Matrix,
    acc: Option<&Matrix>,
    mods: &ModulusAssignment,
    cfg: &SystolicConfig,
) -> Result<TileResult> {
    check_tile(a, b, mods, cfg)?;
    if let Some(acc) = acc {
        if acc.shape() != (cfg.rows, cfg.cols) {
            return Err(Error::ShapeMismatch(format!(
                "accumulator {:?}",
                acc.shape()
            )));
        }
    }
    match cfg.dataflow {
        Dataflow::OutputStationary => Ok(output_stationary(a, b, acc, mods, cfg)),
        Dataflow::OperandStationary => operand_stationary(a, b, acc, mods, cfg),
    }
}

pub fn simulate_tile_output_stationary(
    a: &Matrix,
    b: &Matrix,
    mods: &ModulusAssignment,
    cfg: &SystolicConfig,
) -> Result<TileResult> {
    let cfg = SystolicConfig {
        dataflow: Dataflow::OutputStationary,
        ..*cfg
    };
    simulate_tile(a, b, mods, &cfg)
}

pub fn simulate_tile_operand_stationary(
    a: &Matrix,
    b: &Matrix,
    mods: &ModulusAssignment,
    cfg: &SystolicConfig,
) -> Result<TileResult> {
    let cfg = SystolicConfig {
        dataflow: Dataflow::OperandStationary,
        ..*cfg
    };
    simulate_tile(a, b, mods, &cfg)
}

/// Operand in flight: value and its reduction index.
type Token = Option<(u64, usize)>;

fn output_stationary(
    a: &Matrix,
    b: &Matrix,
    acc: Option<&Matrix>,
    mods: &ModulusAssignment,
    cfg: &SystolicConfig,
) -> TileResult {
    let (rows, cols, depth, kd) = (cfg.rows, cfg.cols, cfg.pipeline_depth, cfg.k_dim);
    let pe = |r: usize, c: usize| r * cols + c;

    let mut a_reg: Vec<Token> = vec![None; rows * cols];
    let mut b_reg: Vec<Token> = vec![None; rows * cols];
    // stage s of PE p lives at p * depth + s
    let mut stages: Vec<Option<(u64, u64)>> = vec![None; rows * cols * depth];
    let mut accum = match acc {
        Some(m) => m.clone(),
        None => Matrix::zeros(rows, cols),
    };
    let total_macs = rows * cols * kd;
    let mut retired = 0;
    let mut cycle: u64 = 0;

    while retired < total_macs {
        cycle += 1;
        let t = cycle as usize;

        // operands advance one PE east / south; skewed feeders on the edges
        for r in 0..rows {
            for c in (0..cols).rev() {
                a_reg[pe(r, c)] = if c == 0 {
                    (t - 1)
                        .checked_sub(r)
                        .filter(|&k| k < kd)
                        .map(|k| (a.get(r, k), k))
                } else {
                    a_reg[pe(r, c - 1)]
                };
            }
        }
        for c in 0..cols {
            for r in (0..rows).rev() {
                b_reg[pe(r, c)] = if r == 0 {
                    (t - 1)
                        .checked_sub(c)
                        .filter(|&k| k < kd)
                        .map(|k| (b.get(k, c), k))
                } else {
                    b_reg[pe(r - 1, c)]
                };
            }
        }

        for r in 0..rows {
            for c in 0..cols {
                let p = pe(r, c);
                let lane = &mut stages[p * depth..(p + 1) * depth];
                if let (Some((av, ak)), Some((bv, bk))) = (a_reg[p], b_reg[p]) {
                    debug_assert_eq!(ak, bk, "skew misaligned at PE ({r}, {c})");
                    lane[0] = Some((av, bv));
                }
                if let Some((av, bv)) = lane[depth - 1].take() {
                    let m = mods.for_element(r, c);
                    accum.set(r, c, m.mul_add(accum.get(r, c), av, bv));
                    retired += 1;
                }
                lane.rotate_right(1);
            }
        }
    }

    // drain the accumulators
    TileResult {
        c: accum,
        cycles: cycle + 1,
    }
}

fn operand_stationary(
    a: &Matrix,
    b: &Matrix,
    acc: Option<&Matrix>,
    mods: &ModulusAssignment,
    cfg: &SystolicConfig,
) -> Result<TileResult> {
    let (rows, cols, depth, kd) = (cfg.rows, cfg.cols, cfg.pipeline_depth as u64, cfg.k_dim);
    if kd > rows {
        return Err(Error::ShapeMismatch(format!(
            "stationary operand needs {kd} PE rows, array has {rows}"
        )));
    }
    let streamed = rows;

    // issue[c][m] for the current PE row; previous row kept for partial sums
    let mut prev_issue = vec![vec![0u64; streamed]; cols];
    let mut psum = match acc {
        Some(m) => m.clone(),
        None => Matrix::zeros(rows, cols),
    };
    let mut finish = 0u64;

    for k in 0..kd {
        let mut issue = vec![vec![0u64; streamed]; cols];
        for c in 0..cols {
            let bv = b.get(k, c);
            let mut last: Option<u64> = None;
            for m in 0..streamed {
                // A[m][k] enters row k at cycle 1 + m + k and moves one PE per cycle
                let arrive = (1 + m + k + c) as u64;
                let psum_ready = if k == 0 { 0 } else { prev_issue[c][m] + depth };
                let in_order = last.map_or(0, |l| l + 1);
                let t = arrive.max(psum_ready).max(in_order);
                issue[c][m] = t;
                last = Some(t);

                let q = mods.for_element(m, c);
                psum.set(m, c, q.mul_add(psum.get(m, c), a.get(m, k), bv));
                if k == kd - 1 {
                    finish = finish.max(t + depth - 1);
                }
            }
        }
        prev_issue = issue;
    }

    Ok(TileResult {
        c: psum,
        cycles: finish + 1,
    })
}

/// One tile-level matmul within a blocked `M x N x K` product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TileOp {
    /// Tile grid coordinates.
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// Element offsets of the `A` row block, `B` column block and `K` block.
    pub row0: usize,
    pub col0: usize,
    pub depth0: usize,
}

/// Row-major over output tiles with the `k` blocks innermost, so tiles that
/// share an output accumulate back to back. Remainders are zero-padded.
pub fn tile_schedule(m: usize, n: usize, k: usize, cfg: &SystolicConfig) -> Result<Vec<TileOp>> {
    cfg.validate()?;
    let (mt, nt, kt) = (
        m.div_ceil(cfg.rows),
        n.div_ceil(cfg.cols),
        k.div_ceil(cfg.k_dim),
    );
    let mut ops = Vec::with_capacity(mt * nt * kt);
    for i in 0..mt {
        for j in 0..nt {
            for kk in 0..kt {
                ops.push(TileOp {
                    i,
                    j,
                    k: kk,
                    row0: i * cfg.rows,
                    col0: j * cfg.cols,
                    depth0: kk * cfg.k_dim,
                });
            }
        }
    }
    Ok(ops)
}

/// Blocked modular matmul of arbitrary shape on the simulated array.
///
/// Tiles are issued serially; the cycle total is the sum of per-tile counts.
pub fn mmm_large(
    a: &Matrix,
    b: &Matrix,
    mods: &ModulusAssignment,
    cfg: &SystolicConfig,
) -> Result<TileResult> {
    check_matmul_shapes(a, b, mods)?;
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mut c = Matrix::zeros(m, n);
    let mut cycles = 0;
    let mut acc = Matrix::zeros(cfg.rows, cfg.cols);
    for op in tile_schedule(m, n, k, cfg)? {
        if op.k == 0 {
            acc = Matrix::zeros(cfg.rows, cfg.cols);
        }
        let at = a.block(op.row0, op.depth0, cfg.rows, cfg.k_dim);
        let bt = b.block(op.depth0, op.col0, cfg.k_dim, cfg.cols);
        let tile_mods = mods.block(op.row0, op.col0, cfg.rows, cfg.cols);
        let res = simulate_tile_acc(&at, &bt, Some(&acc), &tile_mods, cfg)?;
        cycles += res.cycles;
        acc = res.c;
        if (op.k + 1) * cfg.k_dim >= k {
            c.write_block(op.row0, op.col0, &acc);
        }
    }
    Ok(TileResult { c, cycles })
}

/// [`ModMatMul`] backend that routes every product through [`mmm_large`]
/// and keeps a running cycle and tile count.
#[derive(Debug, Default)]
pub struct SystolicExecutor {
    cfg: SystolicConfig,
    cycles: AtomicU64,
    tiles: AtomicU64,
}

impl SystolicExecutor {
    pub fn new(cfg: SystolicConfig) -> Self {
        Self {
            cfg,
            cycles: AtomicU64::new(0),
            tiles: AtomicU64::new(0),
        }
    }

    pub fn config(&self) -> &SystolicConfig {
        &self.cfg
    }

    pub fn cycles(&self) -> u64 {
        self.cycles.load(Ordering::Relaxed)
    }

    pub fn tiles(&self) -> u64 {
        self.tiles.load(Ordering::Relaxed)
    }
}

impl ModMatMul for SystolicExecutor {
    fn matmul(&self, a: &Matrix, b: &Matrix, mods: &ModulusAssignment) -> Result<Matrix> {
        let res = mmm_large(a, b, mods, &self.cfg)?;
        let tiles = tile_schedule(a.rows(), b.cols(), a.cols(), &self.cfg)?.len() as u64;
        self.cycles.fetch_add(res.cycles, Ordering::Relaxed);
        self.tiles.fetch_add(tiles, Ordering::Relaxed);
        Ok(res.c)
    }
}
