//! Fast base conversion as a scale step plus one mixed-moduli matmul.

use fhecore::baseconv::BaseConvPlan;
use fhecore::modarith::ntt_primes;
use fhecore::systolic::{SystolicConfig, SystolicExecutor};
use fhecore::Matrix;

fn main() -> fhecore::Result<()> {
    let (n, alpha, l) = (128, 4, 6);
    let primes = ntt_primes(30, 2 * n, alpha + l)?;
    let (src, dst) = primes.split_at(alpha);
    let plan = BaseConvPlan::new(src, dst)?;
    println!("P* = {} ({} bits)", plan.p_star(), plan.p_star().bits());
    println!("Phat mod Q is {:?}", plan.p_hat_mod_q().shape());

    let a = Matrix::from_fn(alpha, n, |j, x| {
        (x as u64 * 1_000_003 + j as u64) % src[j].value()
    });
    let exec = SystolicExecutor::new(SystolicConfig::default());
    let fast = plan.convert_matrix(&a, &exec)?;
    let exact = plan.convert_direct(&a)?;
    println!("matrix path == big-integer path: {}", fast == exact);
    println!("tiles {}, cycles {}", exec.tiles(), exec.cycles());
    println!(
        "first column in the target basis: {:?}",
        (0..l).map(|i| fast.get(i, 0)).collect::<Vec<_>>()
    );
    Ok(())
}
