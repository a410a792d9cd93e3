//! Per-kernel instruction mixes on the FHEC and tensor-core paths.

use fhecore::costmodel::{
    estimate_kernel, ntt_kernel_call_count, ExecPath, KernelDescriptor, KernelKind, LatencyModel,
    NttStrategy, OperandWidth,
};

fn main() -> fhecore::Result<()> {
    let n = 1 << 16;
    for s in [NttStrategy::TensorfheTile, NttStrategy::WarpdriveRadix16] {
        println!("{s:?}: {} MMMs per 2^16 NTT", ntt_kernel_call_count(n, s)?);
    }
    let kernels = [
        KernelDescriptor::ntt(n, NttStrategy::TensorfheTile),
        KernelDescriptor::ntt(n, NttStrategy::TensorfheTile).with_width(OperandWidth::Int64),
        KernelDescriptor::baseconv(n, 9, 26),
        KernelDescriptor::new(KernelKind::Elementwise, n).with_limbs(6),
        KernelDescriptor::new(KernelKind::Automorphism, n).with_limbs(6),
    ];
    for lat in [
        LatencyModel::default(),
        LatencyModel::enhanced_tensor_core(),
    ] {
        println!("\nfhec_latency = {}", lat.fhec_latency);
        for k in &kernels {
            for path in [ExecPath::Fhec, ExecPath::TensorCore] {
                let r = estimate_kernel(k, &lat, path)?;
                println!(
                    "  {:<44} {:<10} per-MMM {:>5}  instr {:>9}  cycles {:>9}",
                    r.kernel,
                    format!("{path:?}"),
                    r.per_mmm_cycles,
                    r.mix.total(),
                    r.cycles.total
                );
            }
        }
    }
    Ok(())
}
