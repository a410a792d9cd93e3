//! Word-sized modular arithmetic with Barrett reduction.
//!
//! Residues are plain `u64` values kept canonical in `[0, q)`. Every
//! operation that multiplies funnels through [`Modulus::reduce`], which is
//! the same division-free reduction the processing elements of the systolic
//! model apply after each multiply-accumulate.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest modulus accepted: the PE datapath works on 32-bit operands and
/// moduli are kept strictly below 2^31.
pub const MAX_MODULUS: u64 = 1 << 31;

/// A prime modulus `q < 2^31` with its Barrett constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Modulus {
    q: u64,
    /// floor(2^64 / q)
    mu: u64,
    bits: u32,
}

impl Serialize for Modulus {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u64(self.q)
    }
}

impl Modulus {
    /// Validates `q` and precomputes its Barrett constant.
    pub fn new(q: u64) -> Result<Self> {
        if q >= MAX_MODULUS {
            return Err(Error::UnsupportedModulus {
                q,
                reason: "must be below 2^31",
            });
        }
        if q <= 2 || q.is_multiple_of(2) {
            return Err(Error::UnsupportedModulus {
                q,
                reason: "must be an odd prime",
            });
        }
        if !is_prime(q) {
            return Err(Error::UnsupportedModulus {
                q,
                reason: "composite",
            });
        }
        Ok(Self {
            q,
            mu: barrett_constant(q),
            bits: 64 - q.leading_zeros(),
        })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn barrett_constant(&self) -> u64 {
        self.mu
    }

    /// Bit length of `q`.
    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Barrett reduction of `x` modulo `q`.
    ///
    /// One 64x64 high multiply, one low multiply, one subtraction and at most
    /// one conditional correction. Exact on the whole `u64` range, which
    /// covers the `R + a*b` accumulate form with `a, b < 2^31`.
    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        let quotient = ((x as u128 * self.mu as u128) >> 64) as u64;
        let r = x - quotient * self.q;
        if r >= self.q {
            r - self.q
        } else {
            r
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.q && b < self.q);
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.q && b < self.q);
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        debug_assert!(a < self.q);
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.q && b < self.q);
        self.reduce(a * b)
    }

    /// `(acc + a * b) mod q` for operands below 2^31.
    ///
    /// `a` and `b` need not be reduced modulo this `q`; base conversion feeds
    /// residues of other primes through a PE programmed with this modulus.
    #[inline]
    pub fn mul_add(&self, acc: u64, a: u64, b: u64) -> u64 {
        debug_assert!(a < MAX_MODULUS && b < MAX_MODULUS && acc < MAX_MODULUS);
        self.reduce(acc + a * b)
    }

    /// Square-and-multiply exponentiation.
    pub fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let mut base = self.reduce(base);
        let mut acc = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by Fermat's little theorem.
    pub fn inv(&self, a: u64) -> Result<u64> {
        let a = self.reduce(a);
        if a == 0 {
            return Err(Error::NoInverse {
                value: a,
                q: self.q,
            });
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// The smallest element of multiplicative order exactly `order`.
    ///
    /// `order` must be a power of two dividing `q - 1`. One primitive root is
    /// derived from the first generator candidate that works; every other
    /// element of that order is an odd power of it, so the minimum is found by
    /// walking those powers.
    pub fn root_of_unity(&self, order: usize) -> Result<u64> {
        if order == 0 || !order.is_power_of_two() {
            return Err(Error::InvalidDimensions(format!(
                "root order {order} is not a power of two"
            )));
        }
        let n = order as u64;
        if !(self.q - 1).is_multiple_of(n) {
            return Err(Error::NotNttFriendly { q: self.q, order });
        }
        if n == 1 {
            return Ok(1);
        }
        let cofactor = (self.q - 1) / n;
        let root = (2..self.q)
            .map(|g| self.pow(g, cofactor))
            .find(|&w| self.pow(w, n / 2) != 1)
            .expect("a prime field has a generator");

        let step = self.mul(root, root);
        let mut best = root;
        let mut cur = root;
        for _ in 1..n / 2 {
            cur = self.mul(cur, step);
            best = best.min(cur);
        }
        Ok(best)
    }

    /// True if `w` has multiplicative order exactly `order` (a power of two).
    pub fn has_order(&self, w: u64, order: usize) -> bool {
        let n = order as u64;
        if w >= self.q || !order.is_power_of_two() {
            return false;
        }
        self.pow(w, n) == 1 && (n == 1 || self.pow(w, n / 2) != 1)
    }
}

impl std::fmt::Display for Modulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.q)
    }
}

fn barrett_constant(q: u64) -> u64 {
    ((1u128 << 64) / q as u128) as u64
}

#[inline]
fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The `count` smallest primes of exactly `bits` bits with `q = 1 mod order`.
pub fn ntt_primes(bits: u32, order: usize, count: usize) -> Result<Vec<Modulus>> {
    if !(3..=31).contains(&bits) {
        return Err(Error::InvalidDimensions(format!(
            "prime width {bits} outside 3..=31"
        )));
    }
    let order = order as u64;
    let lo = 1u64 << (bits - 1);
    let hi = 1u64 << bits;
    // first candidate >= lo that is 1 mod order
    let mut q = lo.div_ceil(order) * order + 1;
    let mut out = Vec::with_capacity(count);
    while out.len() < count && q < hi {
        if is_prime(q) {
            out.push(Modulus::new(q)?);
        }
        q += order;
    }
    if out.len() < count {
        return Err(Error::InvalidModuli(format!(
            "only {} primes of {bits} bits are 1 mod {order}, {count} requested",
            out.len()
        )));
    }
    Ok(out)
}
