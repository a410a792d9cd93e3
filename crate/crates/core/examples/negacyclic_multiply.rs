//! Polynomial product in Z_q[x]/(x^N + 1) with every matmul on the simulated
//! systolic array.

use fhecore::modarith::ntt_primes;
use fhecore::ntt::{negacyclic_convolve_ref, NttMode, NttPlan};
use fhecore::systolic::{SystolicConfig, SystolicExecutor};

fn main() -> fhecore::Result<()> {
    let n = 1024;
    let q = ntt_primes(30, 2 * n, 1)?[0];
    let plan = NttPlan::balanced(n, q, NttMode::Negacyclic)?;
    let a: Vec<u64> = (0..n as u64).map(|i| (i * 7919) % q.value()).collect();
    let b: Vec<u64> = (0..n as u64).map(|i| (i * i + 3) % q.value()).collect();

    let exec = SystolicExecutor::new(SystolicConfig::default());
    let c = plan.multiply_with(&a, &b, &exec)?;
    let want = negacyclic_convolve_ref(&a, &b, &q)?;
    println!("N = {n}, q = {q}, split {}x{}", plan.n1(), plan.n2());
    println!("c[0..4] = {:?}", &c[..4]);
    println!("matches schoolbook: {}", c == want);
    println!(
        "array tiles issued: {}, simulated cycles: {}",
        exec.tiles(),
        exec.cycles()
    );
    Ok(())
}
