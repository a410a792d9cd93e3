//! RNS polynomials over `Z_Q[x]/(x^N + 1)` and the kernels that stay on the
//! scalar and load/store paths: slot-wise arithmetic and automorphisms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modarith::Modulus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Coefficient,
    Evaluation,
}

/// One residue row (limb) per modulus, `N` entries each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnsPoly {
    n: usize,
    moduli: Vec<Modulus>,
    limbs: Vec<Vec<u64>>,
    domain: Domain,
}

impl RnsPoly {
    pub fn new(moduli: Vec<Modulus>, limbs: Vec<Vec<u64>>, domain: Domain) -> Result<Self> {
        if moduli.len() != limbs.len() || limbs.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} moduli for {} limbs",
                moduli.len(),
                limbs.len()
            )));
        }
        let n = limbs[0].len();
        for (m, limb) in moduli.iter().zip(&limbs) {
            if limb.len() != n {
                return Err(Error::ShapeMismatch("limbs of different lengths".into()));
            }
            if let Some(&bad) = limb.iter().find(|&&x| x >= m.value()) {
                return Err(Error::ShapeMismatch(format!(
                    "residue {bad} not reduced modulo {m}"
                )));
            }
        }
        Ok(Self {
            n,
            moduli,
            limbs,
            domain,
        })
    }

    pub fn zero(n: usize, moduli: Vec<Modulus>, domain: Domain) -> Self {
        let limbs = vec![vec![0; n]; moduli.len()];
        Self {
            n,
            moduli,
            limbs,
            domain,
        }
    }

    /// The constant-one element of the given domain (all ones in evaluation form).
    pub fn one(n: usize, moduli: Vec<Modulus>, domain: Domain) -> Self {
        let mut p = Self::zero(n, moduli, domain);
        for limb in &mut p.limbs {
            match domain {
                Domain::Coefficient => limb[0] = 1,
                Domain::Evaluation => limb.fill(1),
            }
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn moduli(&self) -> &[Modulus] {
        &self.moduli
    }

    pub fn limbs(&self) -> &[Vec<u64>] {
        &self.limbs
    }

    pub fn limb(&self, i: usize) -> &[u64] {
        &self.limbs[i]
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.moduli != other.moduli {
            return Err(Error::ShapeMismatch(
                "polynomials have different limbs".into(),
            ));
        }
        if self.domain != other.domain {
            return Err(Error::ShapeMismatch(format!(
                "{:?} and {:?} domains",
                self.domain, other.domain
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Modulus, u64, u64) -> u64) -> Result<Self> {
        self.check_compatible(other)?;
        let limbs = self
            .moduli
            .iter()
            .zip(self.limbs.iter().zip(&other.limbs))
            .map(|(m, (a, b))| a.iter().zip(b).map(|(&x, &y)| f(m, x, y)).collect())
            .collect();
        Ok(Self {
            n: self.n,
            moduli: self.moduli.clone(),
            limbs,
            domain: self.domain,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |m, a, b| m.mul(a, b))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |m, a, b| m.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |m, a, b| m.sub(a, b))
    }
}

pub fn elementwise_mod_mul(a: &RnsPoly, b: &RnsPoly) -> Result<RnsPoly> {
    a.mul(b)
}

pub fn elementwise_mod_add(a: &RnsPoly, b: &RnsPoly) -> Result<RnsPoly> {
    a.add(b)
}

/// Index maps of the Galois automorphism for rotation index `r`.
///
/// With `g = 5^r mod 2N`:
/// * evaluation domain: the slot at `x` moves to `pi_r(x) = ((g*(2x+1) mod 2N) - 1) / 2`;
/// * coefficient domain: `x -> x^(g^-1)`, so coefficient `i` moves to
///   `i*g^-1 mod 2N`, negated when that exponent wraps past `N`.
///
/// Both describe the same ring map, so the automorphism commutes with the
/// negacyclic NTT in natural order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomorphismMap {
    n: usize,
    r: i64,
    /// `perm[x] = pi_r(x)`, destination slot of slot `x`.
    perm: Vec<usize>,
    coeff_perm: Vec<usize>,
    /// true where the coefficient move wraps and picks up a minus sign
    coeff_neg: Vec<bool>,
}

/// Multiplicative order of 5 in `Z_{2N}^*`.
pub fn rotation_group_order(n: usize) -> usize {
    let two_n = 2 * n as u64;
    let mut g = 5 % two_n;
    let mut ord = 1;
    while g != 1 % two_n {
        g = g * 5 % two_n;
        ord += 1;
    }
    ord
}

fn pow_mod(base: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    let mut b = base % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

impl AutomorphismMap {
    pub fn new(r: i64, n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidDimensions(format!(
                "N = {n} is not a power of two"
            )));
        }
        let two_n = 2 * n as u64;
        let order = rotation_group_order(n) as i64;
        let e = r.rem_euclid(order) as u64;
        let g = pow_mod(5, e, two_n);
        let g_inv = pow_mod(5, (order as u64 - e) % order as u64, two_n);
        debug_assert_eq!(g * g_inv % two_n, 1 % two_n);

        let perm = (0..n as u64)
            .map(|x| (((g * (2 * x + 1)) % two_n - 1) / 2) as usize)
            .collect();
        let (coeff_perm, coeff_neg) = (0..n as u64)
            .map(|i| {
                let t = i * g_inv % two_n;
                if t < n as u64 {
                    (t as usize, false)
                } else {
                    ((t - n as u64) as usize, true)
                }
            })
            .unzip();
        Ok(Self {
            n,
            r,
            perm,
            coeff_perm,
            coeff_neg,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rotation(&self) -> i64 {
        self.r
    }

    /// Destination slot of each slot.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Destination index of each coefficient.
    pub fn coefficient_permutation(&self) -> &[usize] {
        &self.coeff_perm
    }

    /// +1 / -1 per source coefficient.
    pub fn signs(&self) -> Vec<i8> {
        self.coeff_neg
            .iter()
            .map(|&neg| if neg { -1 } else { 1 })
            .collect()
    }

    pub fn inverse_permutation(&self) -> Vec<usize> {
        let mut inv = vec![0; self.n];
        for (x, &d) in self.perm.iter().enumerate() {
            inv[d] = x;
        }
        inv
    }

    pub fn is_bijection(&self) -> bool {
        let mut hit = vec![false; self.n];
        self.perm
            .iter()
            .all(|&d| d < self.n && !std::mem::replace(&mut hit[d], true))
    }
}

fn check_n(p: &RnsPoly, map: &AutomorphismMap) -> Result<()> {
    if p.n != map.n {
        return Err(Error::ShapeMismatch(format!(
            "map for N = {} applied to N = {}",
            map.n, p.n
        )));
    }
    Ok(())
}

/// Scatters each slot (or coefficient) to its destination under `map`.
pub fn apply_automorphism(p: &RnsPoly, map: &AutomorphismMap) -> Result<RnsPoly> {
    check_n(p, map)?;
    let limbs = p
        .moduli
        .iter()
        .zip(&p.limbs)
        .map(|(m, limb)| {
            let mut out = vec![0; p.n];
            match p.domain {
                Domain::Evaluation => {
                    for (x, &v) in limb.iter().enumerate() {
                        out[map.perm[x]] = v;
                    }
                }
                Domain::Coefficient => {
                    for (i, &v) in limb.iter().enumerate() {
                        out[map.coeff_perm[i]] = if map.coeff_neg[i] { m.neg(v) } else { v };
                    }
                }
            }
            out
        })
        .collect();
    Ok(RnsPoly {
        n: p.n,
        moduli: p.moduli.clone(),
        limbs,
        domain: p.domain,
    })
}

/// Gathers through the same index map; undoes [`apply_automorphism`].
pub fn apply_inverse_automorphism(p: &RnsPoly, map: &AutomorphismMap) -> Result<RnsPoly> {
    check_n(p, map)?;
    let limbs = p
        .moduli
        .iter()
        .zip(&p.limbs)
        .map(|(m, limb)| match p.domain {
            Domain::Evaluation => map.perm.iter().map(|&d| limb[d]).collect(),
            Domain::Coefficient => map
                .coeff_perm
                .iter()
                .zip(&map.coeff_neg)
                .map(|(&d, &neg)| if neg { m.neg(limb[d]) } else { limb[d] })
                .collect(),
        })
        .collect();
    Ok(RnsPoly {
        n: p.n,
        moduli: p.moduli.clone(),
        limbs,
        domain: p.domain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m17() -> Vec<Modulus> {
        vec![Modulus::new(17).unwrap()]
    }

    #[test]
    fn identity_and_zero_laws() {
        let a = RnsPoly::new(m17(), vec![vec![3, 16, 0, 9]], Domain::Evaluation).unwrap();
        let ones = RnsPoly::one(4, m17(), Domain::Evaluation);
        let zeros = RnsPoly::zero(4, m17(), Domain::Evaluation);
        assert_eq!(elementwise_mod_mul(&a, &ones).unwrap(), a);
        assert_eq!(elementwise_mod_add(&a, &zeros).unwrap(), a);
        let b = RnsPoly::new(m17(), vec![vec![5, 2, 7, 9]], Domain::Evaluation).unwrap();
        let want: Vec<u64> = [3u64, 16, 0, 9]
            .iter()
            .zip([5u64, 2, 7, 9])
            .map(|(x, y)| x * y % 17)
            .collect();
        assert_eq!(a.mul(&b).unwrap().limb(0), &want[..]);
    }

    #[test]
    fn mismatches_are_rejected() {
        let a = RnsPoly::zero(4, m17(), Domain::Evaluation);
        let b = RnsPoly::zero(4, m17(), Domain::Coefficient);
        let c = RnsPoly::zero(8, m17(), Domain::Evaluation);
        assert!(a.mul(&b).is_err());
        assert!(a.add(&c).is_err());
        assert!(RnsPoly::new(m17(), vec![vec![17]], Domain::Evaluation).is_err());
    }

    #[test]
    fn frobenius_map_n8_r1() {
        let map = AutomorphismMap::new(1, 8).unwrap();
        assert_eq!(&map.permutation()[..3], &[2, 7, 4]);
        assert_eq!(map.permutation(), &[2, 7, 4, 1, 6, 3, 0, 5]);
        assert!(map.is_bijection());
    }

    #[test]
    fn rotation_zero_is_identity() {
        let map = AutomorphismMap::new(0, 16).unwrap();
        assert_eq!(map.permutation(), (0..16).collect::<Vec<_>>());
        assert!(map.signs().iter().all(|&s| s == 1));
        let p = RnsPoly::new(m17(), vec![(0..16).collect()], Domain::Coefficient).unwrap();
        assert_eq!(apply_automorphism(&p, &map).unwrap(), p);
    }

    #[test]
    fn single_slot_moves() {
        let map = AutomorphismMap::new(1, 8).unwrap();
        for x in 0..8 {
            let mut limb = vec![0; 8];
            limb[x] = 5;
            let p = RnsPoly::new(m17(), vec![limb], Domain::Evaluation).unwrap();
            let out = apply_automorphism(&p, &map).unwrap();
            let dest = [2, 7, 4, 1, 6, 3, 0, 5][x];
            assert_eq!(out.limb(0)[dest], 5);
            assert_eq!(out.limb(0).iter().filter(|&&v| v != 0).count(), 1);
        }
    }

    #[test]
    fn negative_rotation_wraps() {
        let order = rotation_group_order(8) as i64;
        assert_eq!(order, 4);
        assert_eq!(
            AutomorphismMap::new(-1, 8).unwrap().permutation(),
            AutomorphismMap::new(order - 1, 8).unwrap().permutation()
        );
    }

    #[test]
    fn coefficient_signs_for_x() {
        // N = 4, r = 1: g = 5, g^-1 = 5 mod 8 (25 = 1 mod 8): x -> x^5 = -x
        let map = AutomorphismMap::new(1, 4).unwrap();
        let p = RnsPoly::new(m17(), vec![vec![0, 1, 0, 0]], Domain::Coefficient).unwrap();
        let out = apply_automorphism(&p, &map).unwrap();
        assert_eq!(out.limb(0), &[0, 16, 0, 0]);
    }
}
