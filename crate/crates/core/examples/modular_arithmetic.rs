//! Barrett reduction, NTT-friendly prime search and roots of unity.

use fhecore::modarith::{ntt_primes, Modulus};

fn main() -> fhecore::Result<()> {
    let q = Modulus::new(97)?;
    println!(
        "q = {q}, Barrett constant floor(2^64/q) = {}",
        q.barrett_constant()
    );
    println!("reduce(200) = {}", q.reduce(200));
    println!("45 * 73 mod q = {}", q.mul(45, 73));
    println!("3^-1 mod q = {}", q.inv(3)?);
    println!("smallest primitive 16th root = {}", q.root_of_unity(16)?);

    // primes for a negacyclic transform of length 2^16
    let primes = ntt_primes(31, 1 << 17, 4)?;
    for p in &primes {
        let psi = p.root_of_unity(1 << 17)?;
        println!(
            "q = {p} ({} bits), psi = {psi}, psi^(2^16) = {}",
            p.bits(),
            p.pow(psi, 1 << 16)
        );
    }
    Ok(())
}
