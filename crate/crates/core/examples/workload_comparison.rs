//! Whole-workload comparison from a JSON descriptor.
//!
//! Usage: `cargo run --example workload_comparison [path/to/workload.json]`
//! (defaults to `configs/hemult.json`).

use fhecore::costmodel::{compare_workload, LatencyModel, WorkloadDescriptor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/hemult.json").to_string()
    });
    let w: WorkloadDescriptor = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
    let r = compare_workload(&w, &LatencyModel::default())?;
    println!("workload {} (illustrative: {})", r.workload, w.illustrative);
    for k in &r.kernels {
        println!(
            "  {:<44} x{:<2} fhec {:>9} instr  tc {:>10} instr",
            k.kernel,
            k.repeat,
            k.fhec.mix.total(),
            k.tensor_core.mix.total()
        );
    }
    println!(
        "FHEC path:        {:>11} instructions, {:>11} cycles",
        r.fhec.instructions, r.fhec.cycles
    );
    println!(
        "tensor-core path: {:>11} instructions, {:>11} cycles",
        r.tensor_core.instructions, r.tensor_core.cycles
    );
    println!(
        "instruction ratio {:.2}, cycle ratio {:.2} ({})",
        r.instruction_ratio, r.cycle_ratio, r.cycle_model
    );
    Ok(())
}
