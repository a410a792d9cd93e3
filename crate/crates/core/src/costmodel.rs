//! Instruction and cycle accounting for the two execution paths of a
//! modular matrix multiplication (MMM):
//!
//! * `fhec`: one coarse-grained instruction per 16x16x16 modular MMM;
//! * `tensor_core`: each 32-bit (or 64-bit) operand split into 8-bit chunks,
//!   one INT8 GEMM per chunk pair, then recombination and Barrett reduction
//!   on the scalar path.
//!
//! Scalar work is counted as one instruction per element per phase. Cycle
//! totals are serial sums of per-instruction latency and throughput; no
//! overlap between units is modeled, so they are upper bounds.

use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_matmul_shapes, Matrix, ModulusAssignment};
use crate::modarith::Modulus;
use crate::systolic::{mmm_large, SystolicConfig};

/// Edge of the square MMM counted as one instruction.
pub const MMM_TILE: usize = 16;
const TILE_ELEMS: u64 = (MMM_TILE * MMM_TILE) as u64;
/// Split of the data tile plus recombine/reduce of the output tile.
const TC_SCALAR_OPS_PER_MMM: u64 = 2 * TILE_ELEMS;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct InstructionMix {
    pub fhec_ops: u64,
    pub gemm_ops: u64,
    pub scalar_ops: u64,
    pub ldst_ops: u64,
}

impl InstructionMix {
    pub fn total(&self) -> u64 {
        self.fhec_ops + self.gemm_ops + self.scalar_ops + self.ldst_ops
    }
}

impl Add for InstructionMix {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            fhec_ops: self.fhec_ops + o.fhec_ops,
            gemm_ops: self.gemm_ops + o.gemm_ops,
            scalar_ops: self.scalar_ops + o.scalar_ops,
            ldst_ops: self.ldst_ops + o.ldst_ops,
        }
    }
}

impl AddAssign for InstructionMix {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Mul<u64> for InstructionMix {
    type Output = Self;
    fn mul(self, k: u64) -> Self {
        Self {
            fhec_ops: self.fhec_ops * k,
            gemm_ops: self.gemm_ops * k,
            scalar_ops: self.scalar_ops * k,
            ldst_ops: self.ldst_ops * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatencyModel {
    /// Cycles per FHEC instruction.
    pub fhec_latency: u64,
    /// Cycles per INT8 tensor-core GEMM.
    pub gemm_latency: u64,
    /// Scalar element operations retired per cycle.
    pub scalar_throughput: u64,
    /// Load/store element moves retired per cycle.
    pub ldst_throughput: u64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        Self {
            fhec_latency: 44,
            gemm_latency: 64,
            scalar_throughput: 32,
            ldst_throughput: 32,
        }
    }
}

impl LatencyModel {
    /// FHEC folded into an augmented tensor core that keeps the 64-cycle
    /// tensor instruction latency.
    pub fn enhanced_tensor_core() -> Self {
        Self {
            fhec_latency: 64,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fhec_latency == 0
            || self.gemm_latency == 0
            || self.scalar_throughput == 0
            || self.ldst_throughput == 0
        {
            return Err(Error::InvalidDimensions(
                "latencies and throughputs must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn cycles(&self, mix: &InstructionMix) -> CycleBreakdown {
        let fhec = mix.fhec_ops * self.fhec_latency;
        let gemm = mix.gemm_ops * self.gemm_latency;
        let scalar = mix.scalar_ops.div_ceil(self.scalar_throughput);
        let ldst = mix.ldst_ops.div_ceil(self.ldst_throughput);
        CycleBreakdown {
            fhec,
            gemm,
            scalar,
            ldst,
            total: fhec + gemm + scalar + ldst,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CycleBreakdown {
    pub fhec: u64,
    pub gemm: u64,
    pub scalar: u64,
    pub ldst: u64,
    pub total: u64,
}

/// Operand word width; only changes the number of 8-bit chunks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum OperandWidth {
    #[default]
    Int32,
    Int64,
}

impl OperandWidth {
    pub fn bits(self) -> u32 {
        match self {
            Self::Int32 => 32,
            Self::Int64 => 64,
        }
    }

    pub fn chunks(self) -> usize {
        self.bits() as usize / 8
    }

    /// INT8 GEMMs per modular MMM: one per chunk pair, `width^2 / 64`.
    pub fn gemms_per_mmm(self) -> u64 {
        (self.chunks() * self.chunks()) as u64
    }
}

impl TryFrom<u32> for OperandWidth {
    type Error = String;
    fn try_from(v: u32) -> std::result::Result<Self, String> {
        match v {
            32 => Ok(Self::Int32),
            64 => Ok(Self::Int64),
            _ => Err(format!("width must be 32 or 64, got {v}")),
        }
    }
}

impl From<OperandWidth> for u32 {
    fn from(w: OperandWidth) -> u32 {
        w.bits()
    }
}

/// Row-major `u8` chunk plane of a residue matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl ChunkMatrix {
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

/// Little-endian base-2^8 limbs: chunk `i` holds bits `8i..8i+8`.
pub fn split_to_chunks(tile: &Matrix, width: OperandWidth) -> Vec<ChunkMatrix> {
    (0..width.chunks())
        .map(|i| ChunkMatrix {
            rows: tile.rows(),
            cols: tile.cols(),
            data: tile
                .as_slice()
                .iter()
                .map(|&v| (v >> (8 * i)) as u8)
                .collect(),
        })
        .collect()
}

/// `sum_i chunk_i * 2^(8i)`.
pub fn recombine_chunks(chunks: &[ChunkMatrix]) -> Matrix {
    let (rows, cols) = chunks.first().map_or((0, 0), ChunkMatrix::shape);
    Matrix::from_fn(rows, cols, |r, c| {
        chunks
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, ch)| acc | (ch.get(r, c) as u64) << (8 * i))
    })
}

/// INT8 x INT8 -> INT32 GEMM.
fn int8_gemm(a: &ChunkMatrix, b: &ChunkMatrix) -> Vec<u32> {
    let (m, k) = a.shape();
    let n = b.cols;
    let mut out = vec![0u32; m * n];
    for i in 0..m {
        for kk in 0..k {
            let x = a.get(i, kk) as u32;
            for j in 0..n {
                out[i * n + j] += x * b.get(kk, j) as u32;
            }
        }
    }
    out
}

/// Number of square `MMM_TILE` MMMs covering an `m x k` by `k x n` product.
pub fn mmm_count(m: usize, n: usize, k: usize) -> u64 {
    (m.div_ceil(MMM_TILE) * n.div_ceil(MMM_TILE) * k.div_ceil(MMM_TILE)) as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathResult {
    pub c: Matrix,
    pub mix: InstructionMix,
    pub cycles: CycleBreakdown,
}

/// Modular matmul through 8-bit chunk GEMMs.
///
/// Each `MMM_TILE`-deep block of the reduction is split into chunk planes;
/// every chunk pair `(i, j)` is multiplied as an INT8 GEMM with 32-bit
/// accumulation, and the merge step folds `C_ij * 2^(8(i+j)) mod q` into the
/// running residue with Barrett reduction. Between blocks the accumulator is
/// a fully reduced residue, so the mid-kernel of a fused two-pass kernel is a
/// full reduction too.
pub fn tc_gemm_path(
    a: &Matrix,
    b: &Matrix,
    m: &Modulus,
    width: OperandWidth,
    lat: &LatencyModel,
) -> Result<PathResult> {
    lat.validate()?;
    check_matmul_shapes(a, b, &ModulusAssignment::Shared(*m))?;
    let (rows, k, cols) = (a.rows(), a.cols(), b.cols());
    // 2^(8s) mod q for every chunk-pair position s = i + j
    let shifts: Vec<u64> = (0..2 * width.chunks())
        .map(|s| m.pow(256, s as u64))
        .collect();

    let mut acc = vec![0u64; rows * cols];
    for d0 in (0..k).step_by(MMM_TILE) {
        let depth = MMM_TILE.min(k - d0);
        let ca = split_to_chunks(&a.block(0, d0, rows, depth), width);
        let cb = split_to_chunks(&b.block(d0, 0, depth, cols), width);
        for (i, x) in ca.iter().enumerate() {
            for (j, y) in cb.iter().enumerate() {
                let partial = int8_gemm(x, y);
                // 16 * 255^2 < 2^20
                assert!(
                    partial.iter().all(|&v| v < 1 << 20),
                    "chunk accumulation overflow"
                );
                let f = shifts[i + j];
                for (r, &p) in acc.iter_mut().zip(&partial) {
                    *r = m.mul_add(*r, p as u64, f);
                }
            }
        }
    }

    let mmms = mmm_count(rows, cols, k);
    let mix = InstructionMix {
        gemm_ops: mmms * width.gemms_per_mmm(),
        scalar_ops: mmms * TC_SCALAR_OPS_PER_MMM,
        ..Default::default()
    };
    Ok(PathResult {
        c: Matrix::from_vec(rows, cols, acc)?,
        mix,
        cycles: lat.cycles(&mix),
    })
}

/// Modular matmul on the simulated systolic array, one FHEC per square MMM.
pub fn fhec_path(
    a: &Matrix,
    b: &Matrix,
    mods: &ModulusAssignment,
    lat: &LatencyModel,
) -> Result<PathResult> {
    lat.validate()?;
    let res = mmm_large(a, b, mods, &SystolicConfig::default())?;
    let mix = InstructionMix {
        fhec_ops: mmm_count(a.rows(), b.cols(), a.cols()),
        ..Default::default()
    };
    Ok(PathResult {
        c: res.c,
        mix,
        cycles: lat.cycles(&mix),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NttStrategy {
    /// `sqrt(N) x sqrt(N)` 4-step with both passes tiled into 16x16 MMMs.
    TensorfheTile,
    /// Radix-16 levels, each a batch of 16x16 transforms.
    WarpdriveRadix16,
}

impl NttStrategy {
    /// Number of matmul passes over the data.
    pub fn passes(self, n: usize) -> Result<u64> {
        let log = checked_log2(n)?;
        match self {
            Self::TensorfheTile => {
                if log % 2 == 1 || (1usize << (log / 2)) < MMM_TILE {
                    return Err(Error::InvalidDimensions(format!(
                        "N = {n} has no square split with sides >= {MMM_TILE}"
                    )));
                }
                Ok(2)
            }
            Self::WarpdriveRadix16 => {
                if log % 4 != 0 || log < 8 {
                    return Err(Error::InvalidDimensions(format!(
                        "N = {n} is not a power of 16 >= 256"
                    )));
                }
                Ok(log as u64 / 4)
            }
        }
    }
}

fn checked_log2(n: usize) -> Result<u32> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidDimensions(format!(
            "N = {n} is not a power of two"
        )));
    }
    Ok(n.trailing_zeros())
}

/// FHEC MMM instructions for one N-point NTT on one limb.
pub fn ntt_kernel_call_count(n: usize, strategy: NttStrategy) -> Result<u64> {
    let passes = strategy.passes(n)?;
    let per_pass = match strategy {
        NttStrategy::TensorfheTile => {
            let side = 1u64 << (n.trailing_zeros() / 2);
            (side / MMM_TILE as u64).pow(3)
        }
        NttStrategy::WarpdriveRadix16 => n as u64 / TILE_ELEMS,
    };
    Ok(passes * per_pass)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Ntt,
    Intt,
    Baseconv,
    Elementwise,
    Automorphism,
}

fn one() -> u64 {
    1
}

fn one_usize() -> usize {
    1
}

/// One kernel invocation (possibly repeated) inside a workload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDescriptor {
    pub kind: KernelKind,
    /// Ring dimension.
    pub n: usize,
    /// Limbs processed (ntt / intt / elementwise / automorphism).
    #[serde(default = "one_usize")]
    pub limbs: usize,
    /// Source basis size (baseconv).
    #[serde(default)]
    pub alpha: usize,
    /// Target basis size (baseconv).
    #[serde(default, rename = "L")]
    pub l: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<NttStrategy>,
    #[serde(default)]
    pub width: OperandWidth,
    #[serde(default = "one")]
    pub repeat: u64,
}

impl KernelDescriptor {
    pub fn new(kind: KernelKind, n: usize) -> Self {
        Self {
            kind,
            n,
            limbs: 1,
            alpha: 0,
            l: 0,
            strategy: None,
            width: OperandWidth::Int32,
            repeat: 1,
        }
    }

    pub fn ntt(n: usize, strategy: NttStrategy) -> Self {
        Self {
            strategy: Some(strategy),
            ..Self::new(KernelKind::Ntt, n)
        }
    }

    pub fn with_limbs(self, limbs: usize) -> Self {
        Self { limbs, ..self }
    }

    pub fn with_width(self, width: OperandWidth) -> Self {
        Self { width, ..self }
    }

    pub fn with_repeat(self, repeat: u64) -> Self {
        Self { repeat, ..self }
    }

    pub fn baseconv(n: usize, alpha: usize, l: usize) -> Self {
        Self {
            alpha,
            l,
            ..Self::new(KernelKind::Baseconv, n)
        }
    }

    pub fn label(&self) -> String {
        let base = self.base_label();
        match self.width {
            OperandWidth::Int32 => base,
            OperandWidth::Int64 => format!("{base}@64b"),
        }
    }

    fn base_label(&self) -> String {
        match self.kind {
            KernelKind::Baseconv => {
                format!("baseconv(N={}, alpha={}, L={})", self.n, self.alpha, self.l)
            }
            KernelKind::Ntt | KernelKind::Intt => format!(
                "{}(N={}, limbs={}, {})",
                if self.kind == KernelKind::Ntt {
                    "ntt"
                } else {
                    "intt"
                },
                self.n,
                self.limbs,
                match self.strategy() {
                    NttStrategy::TensorfheTile => "tensorfhe_tile",
                    NttStrategy::WarpdriveRadix16 => "warpdrive_radix16",
                }
            ),
            KernelKind::Elementwise => format!("elementwise(N={}, limbs={})", self.n, self.limbs),
            KernelKind::Automorphism => format!("automorphism(N={}, limbs={})", self.n, self.limbs),
        }
    }

    pub fn strategy(&self) -> NttStrategy {
        self.strategy.unwrap_or(NttStrategy::TensorfheTile)
    }

    pub fn validate(&self) -> Result<()> {
        let is_ntt = matches!(self.kind, KernelKind::Ntt | KernelKind::Intt);
        if self.strategy.is_some() && !is_ntt {
            return Err(Error::UnsupportedKernel(format!(
                "strategy given for a {:?} kernel",
                self.kind
            )));
        }
        if self.n == 0 || self.repeat == 0 {
            return Err(Error::InvalidDimensions(
                "n and repeat must be positive".into(),
            ));
        }
        match self.kind {
            KernelKind::Baseconv if self.alpha == 0 || self.l == 0 => Err(
                Error::InvalidDimensions("baseconv needs alpha >= 1 and L >= 1".into()),
            ),
            KernelKind::Baseconv => Ok(()),
            _ if self.limbs == 0 => Err(Error::InvalidDimensions("limbs must be >= 1".into())),
            _ if is_ntt => self.strategy().passes(self.n).map(|_| ()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecPath {
    Fhec,
    TensorCore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub kernel: String,
    pub path: ExecPath,
    /// Modular MMMs in one invocation.
    pub mmms: u64,
    /// Cycles charged for one modular MMM on this path.
    pub per_mmm_cycles: u64,
    pub mix: InstructionMix,
    pub cycles: CycleBreakdown,
}

fn per_mmm_cycles(path: ExecPath, width: OperandWidth, lat: &LatencyModel) -> u64 {
    match path {
        ExecPath::Fhec => lat.fhec_latency,
        ExecPath::TensorCore => {
            width.gemms_per_mmm() * lat.gemm_latency
                + TC_SCALAR_OPS_PER_MMM.div_ceil(lat.scalar_throughput)
        }
    }
}

/// Instruction mix and serial cycle estimate for one invocation of `k`.
pub fn estimate_kernel(
    k: &KernelDescriptor,
    lat: &LatencyModel,
    path: ExecPath,
) -> Result<CostReport> {
    k.validate()?;
    lat.validate()?;
    let n = k.n as u64;
    let limbs = k.limbs as u64;

    // (MMMs, scalar work shared by both paths, ldst work)
    let (mmms, scalar, ldst) = match k.kind {
        KernelKind::Ntt | KernelKind::Intt => {
            let strategy = k.strategy();
            let passes = strategy.passes(k.n)?;
            // inter-pass twiddle scaling; the inverse adds the N^-1 (psi^-j) post-scale
            let mut per_limb = (passes - 1) * n;
            if k.kind == KernelKind::Intt {
                per_limb += n;
            }
            (
                ntt_kernel_call_count(k.n, strategy)? * limbs,
                per_limb * limbs,
                0,
            )
        }
        KernelKind::Baseconv => {
            let mmms = mmm_count(k.l, k.n, k.alpha);
            (mmms, k.alpha as u64 * n, 0)
        }
        KernelKind::Elementwise => (0, n * limbs, 0),
        KernelKind::Automorphism => (0, n, n * limbs),
    };

    let mix = match path {
        ExecPath::Fhec => InstructionMix {
            fhec_ops: mmms,
            gemm_ops: 0,
            scalar_ops: scalar,
            ldst_ops: ldst,
        },
        ExecPath::TensorCore => InstructionMix {
            fhec_ops: 0,
            gemm_ops: mmms * k.width.gemms_per_mmm(),
            scalar_ops: scalar + mmms * TC_SCALAR_OPS_PER_MMM,
            ldst_ops: ldst,
        },
    };
    Ok(CostReport {
        kernel: k.label(),
        path,
        mmms,
        per_mmm_cycles: per_mmm_cycles(path, k.width, lat),
        mix,
        cycles: lat.cycles(&mix),
    })
}

/// CKKS parameters carried through reports unchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadMetadata {
    #[serde(rename = "logN", default, skip_serializing_if = "Option::is_none")]
    pub log_n: Option<u32>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(rename = "L_eff", default, skip_serializing_if = "Option::is_none")]
    pub l_eff: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dnum: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<u32>,
    #[serde(rename = "logQP", default, skip_serializing_if = "Option::is_none")]
    pub log_qp: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadDescriptor {
    pub name: String,
    /// Marks hand-written kernel sequences that approximate a primitive.
    #[serde(default)]
    pub illustrative: bool,
    #[serde(default)]
    pub metadata: WorkloadMetadata,
    pub kernels: Vec<KernelDescriptor>,
}

impl WorkloadDescriptor {
    pub fn new(name: impl Into<String>, kernels: Vec<KernelDescriptor>) -> Self {
        Self {
            name: name.into(),
            illustrative: false,
            metadata: Default::default(),
            kernels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernels.is_empty() {
            return Err(Error::InvalidDimensions(format!(
                "workload '{}' has no kernels",
                self.name
            )));
        }
        self.kernels.iter().try_for_each(KernelDescriptor::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelComparison {
    pub kernel: String,
    pub repeat: u64,
    pub fhec: CostReport,
    pub tensor_core: CostReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathTotals {
    pub mix: InstructionMix,
    pub instructions: u64,
    pub cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub workload: String,
    pub cycle_model: &'static str,
    pub latency: LatencyModel,
    pub kernels: Vec<KernelComparison>,
    pub fhec: PathTotals,
    pub tensor_core: PathTotals,
    /// tensor_core / fhec
    pub instruction_ratio: f64,
    pub cycle_ratio: f64,
}

/// Side-by-side totals of every kernel (times its repeat count) on both paths.
pub fn compare_workload(w: &WorkloadDescriptor, lat: &LatencyModel) -> Result<ComparisonReport> {
    w.validate()?;
    lat.validate()?;
    let mut kernels = Vec::with_capacity(w.kernels.len());
    let (mut fm, mut tm) = (InstructionMix::default(), InstructionMix::default());
    let (mut fc, mut tc) = (0u64, 0u64);
    for k in &w.kernels {
        let f = estimate_kernel(k, lat, ExecPath::Fhec)?;
        let t = estimate_kernel(k, lat, ExecPath::TensorCore)?;
        fm += f.mix * k.repeat;
        tm += t.mix * k.repeat;
        fc += f.cycles.total * k.repeat;
        tc += t.cycles.total * k.repeat;
        kernels.push(KernelComparison {
            kernel: k.label(),
            repeat: k.repeat,
            fhec: f,
            tensor_core: t,
        });
    }
    let fhec = PathTotals {
        mix: fm,
        instructions: fm.total(),
        cycles: fc,
    };
    let tensor_core = PathTotals {
        mix: tm,
        instructions: tm.total(),
        cycles: tc,
    };
    Ok(ComparisonReport {
        workload: w.name.clone(),
        cycle_model: "serial upper bound",
        latency: *lat,
        kernels,
        instruction_ratio: tensor_core.instructions as f64 / fhec.instructions as f64,
        cycle_ratio: tensor_core.cycles as f64 / fhec.cycles as f64,
        fhec,
        tensor_core,
    })
}
