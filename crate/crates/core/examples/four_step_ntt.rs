//! 4-step NTT as two matrix products with a twiddle scaling in between.

use fhecore::modarith::ntt_primes;
use fhecore::ntt::{negacyclic_ntt_direct, ntt_direct, NttMode, NttPlan};

fn main() -> fhecore::Result<()> {
    let n = 64;
    let q = ntt_primes(30, 2 * n, 1)?[0];
    let a: Vec<u64> = (0..n as u64).map(|i| i * i + 1).collect();

    for (n1, mode) in [
        (8, NttMode::Cyclic),
        (16, NttMode::Cyclic),
        (8, NttMode::Negacyclic),
    ] {
        let plan = NttPlan::new(n, n1, n / n1, q, mode)?;
        let fast = plan.forward(&a)?;
        let slow = match plan.psi() {
            Some(psi) => negacyclic_ntt_direct(&a, &q, psi)?,
            None => ntt_direct(&a, &q, plan.omega())?,
        };
        println!(
            "{mode:?} N={n} as {}x{}: W1 {:?}, W2 {:?}, W3 {:?}; matches direct: {}; round trip: {}",
            plan.n1(),
            plan.n2(),
            plan.w1().shape(),
            plan.w2().shape(),
            plan.w3().shape(),
            fast == slow,
            plan.inverse(&fast)? == a
        );
    }
    Ok(())
}
