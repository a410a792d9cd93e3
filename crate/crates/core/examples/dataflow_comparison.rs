//! Output-stationary versus operand-stationary tile latency.

use fhecore::matrix::{Matrix, ModulusAssignment};
use fhecore::modarith::Modulus;
use fhecore::systolic::{simulate_tile, Dataflow, SystolicConfig};

fn cycles(cfg: &SystolicConfig) -> fhecore::Result<u64> {
    let mods = ModulusAssignment::Shared(Modulus::new(97)?);
    let a = Matrix::from_fn(cfg.rows, cfg.k_dim, |r, c| ((r + c) % 97) as u64);
    let b = Matrix::from_fn(cfg.k_dim, cfg.cols, |r, c| ((r * c) % 97) as u64);
    Ok(simulate_tile(&a, &b, &mods, cfg)?.cycles)
}

fn main() -> fhecore::Result<()> {
    println!(
        "{:>4} {:>4} {:>3} {:>8} {:>8}",
        "S_R", "S_C", "T", "output", "operand"
    );
    for (r, c) in [(4, 4), (8, 8), (16, 8), (16, 16)] {
        for t in [1, 2, 4, 6, 8] {
            let os = SystolicConfig::square(r, c, t, Dataflow::OutputStationary);
            let ws = SystolicConfig {
                dataflow: Dataflow::OperandStationary,
                ..os
            };
            println!(
                "{r:>4} {c:>4} {t:>3} {:>8} {:>8}",
                cycles(&os)?,
                cycles(&ws)?
            );
        }
    }
    Ok(())
}
