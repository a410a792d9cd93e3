//! Galois automorphisms in both domains and their agreement through the NTT.

use fhecore::modarith::ntt_primes;
use fhecore::ntt::{NttMode, NttPlan};
use fhecore::polyring::{
    apply_automorphism, rotation_group_order, AutomorphismMap, Domain, RnsPoly,
};

fn main() -> fhecore::Result<()> {
    let map = AutomorphismMap::new(1, 8)?;
    println!("N=8, r=1 slot destinations: {:?}", map.permutation());
    println!(
        "coefficient destinations {:?}, signs {:?}",
        map.coefficient_permutation(),
        map.signs()
    );
    println!(
        "rotation group order for N=2^16: {}",
        rotation_group_order(1 << 16)
    );

    let n = 16;
    let q = ntt_primes(30, 2 * n, 1)?[0];
    let plan = NttPlan::balanced(n, q, NttMode::Negacyclic)?;
    let coeffs: Vec<u64> = (1..=n as u64).collect();
    let map = AutomorphismMap::new(3, n)?;

    let moved = apply_automorphism(
        &RnsPoly::new(vec![q], vec![coeffs.clone()], Domain::Coefficient)?,
        &map,
    )?;
    let slots = RnsPoly::new(vec![q], vec![plan.forward(&coeffs)?], Domain::Evaluation)?;
    let moved_slots = apply_automorphism(&slots, &map)?;
    println!(
        "NTT(sigma(a)) == sigma(NTT(a)): {}",
        plan.forward(moved.limb(0))? == moved_slots.limb(0)
    );
    Ok(())
}
