//! Independent oracles for the integration tests. Nothing here calls into
//! the library's arithmetic: every value is recomputed with `%` on u128 or
//! with big integers.
#![allow(dead_code)]

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fhecore::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn mulmod(a: u64, b: u64, q: u64) -> u64 {
    (a as u128 * b as u128 % q as u128) as u64
}

pub fn powmod(mut b: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    b %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, q);
        }
        b = mulmod(b, b, q);
        e >>= 1;
    }
    acc
}

/// Trial division; only for small inputs.
pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Exact order of `w` modulo prime `q` by brute force over divisors of `q-1`.
pub fn order(w: u64, q: u64) -> u64 {
    (1..q)
        .find(|&d| (q - 1).is_multiple_of(d) && powmod(w, d, q) == 1)
        .unwrap()
}

/// `out[k] = sum_j a[j] * root^(j*k)` (cyclic) evaluated from scratch.
pub fn dft(a: &[u64], root: u64, q: u64) -> Vec<u64> {
    let n = a.len() as u64;
    (0..n)
        .map(|k| {
            a.iter().enumerate().fold(0u128, |acc, (j, &x)| {
                (acc + x as u128 * powmod(root, (j as u64 * k) % (q - 1), q) as u128) % q as u128
            }) as u64
        })
        .collect()
}

/// `out[k] = sum_j a[j] * psi^(j*(2k+1))`.
pub fn negacyclic_dft(a: &[u64], psi: u64, q: u64) -> Vec<u64> {
    let n = a.len() as u64;
    (0..n)
        .map(|k| {
            a.iter().enumerate().fold(0u128, |acc, (j, &x)| {
                let e = (j as u64 * (2 * k + 1)) % (q - 1);
                (acc + x as u128 * powmod(psi, e, q) as u128) % q as u128
            }) as u64
        })
        .collect()
}

/// Schoolbook product in `Z_q[x]/(x^N + 1)`.
pub fn negacyclic_schoolbook(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len();
    let mut c = vec![0u64; n];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let p = mulmod(x, y, q);
            let k = i + j;
            if k < n {
                c[k] = (c[k] + p) % q;
            } else {
                c[k - n] = (c[k - n] + q - p) % q;
            }
        }
    }
    c
}

/// Schoolbook product in `Z_q[x]/(x^N - 1)`.
pub fn cyclic_schoolbook(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len();
    let mut c = vec![0u64; n];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            c[(i + j) % n] = (c[(i + j) % n] + mulmod(x, y, q)) % q;
        }
    }
    c
}

/// Triple-loop matmul; element `(r, c)` is reduced modulo `q(r, c)`.
pub fn matmul_ref(a: &Matrix, b: &Matrix, q: impl Fn(usize, usize) -> u64) -> Matrix {
    Matrix::from_fn(a.rows(), b.cols(), |r, c| {
        let m = q(r, c) as u128;
        (0..a.cols()).fold(0u128, |acc, k| {
            (acc + a.get(r, k) as u128 * b.get(k, c) as u128) % m
        }) as u64
    })
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, q: u64) -> Vec<u64> {
    (0..n).map(|_| rng.random_range(0..q)).collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, q: u64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(0..q))
}

/// Smallest primes `q = 1 mod order` at or above `2^(bits-1)`, by trial division.
pub fn primes_1_mod(bits: u32, order: u64, count: usize) -> Vec<u64> {
    let mut q = (1u64 << (bits - 1)).div_ceil(order) * order + 1;
    let mut out = Vec::new();
    while out.len() < count {
        if is_prime_trial(q) {
            out.push(q);
        }
        q += order;
    }
    out
}

/// CRT reconstruction of one coefficient in `[0, prod p)`.
pub fn crt(residues: &[u64], moduli: &[u64]) -> BigUint {
    let p: BigUint = moduli.iter().map(|&m| BigUint::from(m)).product();
    let mut x = BigUint::from(0u32);
    for (&r, &m) in residues.iter().zip(moduli) {
        let ph = &p / m;
        let ph_mod = (&ph % m).to_u64_digits().first().copied().unwrap_or(0);
        let inv = powmod(ph_mod, m - 2, m);
        x += ph * BigUint::from(mulmod(r, inv, m));
    }
    x % p
}

/// Output-stationary tile latency with a square reduction.
pub fn os_cycles(rows: usize, cols: usize, depth: usize) -> u64 {
    (2 * rows + cols + depth - 2) as u64
}
