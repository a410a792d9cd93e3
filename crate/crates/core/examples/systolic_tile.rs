//! One modular matmul tile on the cycle-stepped array.

use fhecore::matrix::{Matrix, ModMatMul, ModulusAssignment, PlainMatMul};
use fhecore::modarith::Modulus;
use fhecore::systolic::{cycle_count_closed_form, mmm_large, simulate_tile, SystolicConfig};

fn main() -> fhecore::Result<()> {
    let cfg = SystolicConfig::default();
    let q = Modulus::new(2_013_265_921)?;
    let mods = ModulusAssignment::Shared(q);
    let a = Matrix::from_fn(cfg.rows, cfg.k_dim, |r, c| (r * 31 + c * 17) as u64);
    let b = Matrix::from_fn(cfg.k_dim, cfg.cols, |r, c| (r * 13 + c * 7 + 1) as u64);

    let tile = simulate_tile(&a, &b, &mods, &cfg)?;
    println!(
        "array {}x{}, T = {}, k = {}",
        cfg.rows, cfg.cols, cfg.pipeline_depth, cfg.k_dim
    );
    println!(
        "simulated cycles {}, closed form {}",
        tile.cycles,
        cycle_count_closed_form(&cfg)?
    );
    println!(
        "product correct: {}",
        tile.c == PlainMatMul.matmul(&a, &b, &mods)?
    );

    // a 40x40x40 product is tiled and issued serially
    let big_a = Matrix::from_fn(40, 40, |r, c| (r + c) as u64);
    let big = mmm_large(&big_a, &big_a, &mods, &cfg)?;
    println!(
        "40x40x40: {} cycles, correct: {}",
        big.cycles,
        big.c == PlainMatMul.matmul(&big_a, &big_a, &mods)?
    );
    Ok(())
}
