//! Number theoretic transforms: the O(N^2) reference and the 4-step
//! matrix formulation executed as two modular matmuls around an element-wise
//! twiddle scaling.
//!
//! ## Ordering convention
//!
//! Input and output are both in natural order. The input is reshaped
//! column-major into an `N2 x N1` matrix `X[j2][j1] = a[j1*N2 + j2]` and the
//! transform is
//!
//! ```text
//! A = ((X * W1)^T o W2) * W3,      out[k1 + k2*N1] = A[k1][k2]
//! ```
//!
//! with `W1: N1 x N1`, `W2: N1 x N2` (element-wise) and `W3: N2 x N2`.
//! In cyclic mode with `w` of order N:
//!
//! ```text
//! W1[j1][k1] = w^(N2*j1*k1)   W2[k1][j2] = w^(k1*j2)   W3[j2][k2] = w^(N1*j2*k2)
//! ```
//!
//! In negacyclic mode the `psi^j` pre-scaling is merged into the twiddles
//! (`psi` of order 2N, `w = psi^2`):
//!
//! ```text
//! W1[j1][k1] = psi^(N2*(2*j1*k1 + j1))   W2[k1][j2] = psi^((2*k1 + 1)*j2)
//! W3[j2][k2] = psi^(2*N1*j2*k2)
//! ```
//!
//! so the output is `out[k] = sum_j a[j] * psi^(j*(2k+1))`, the evaluation of
//! `a(x)` at the odd powers of `psi`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, ModMatMul, ModulusAssignment, PlainMatMul};
use crate::modarith::Modulus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NttMode {
    Cyclic,
    Negacyclic,
}

/// Literal `a_hat[k] = sum_j a[j] * omega^(j*k) mod q`.
///
/// This is the reference every faster path is checked against, so it uses
/// a power table and exact 128-bit accumulation rather than Barrett.
pub fn ntt_direct(a: &[u64], m: &Modulus, omega: u64) -> Result<Vec<u64>> {
    let n = a.len();
    if !m.has_order(omega, n) {
        return Err(Error::InvalidRoot {
            root: omega,
            order: n,
            q: m.value(),
        });
    }
    let q = m.value();
    let powers = power_table(m, omega, n);
    let out = (0..n)
        .map(|k| {
            let mut acc: u128 = 0;
            for (j, &x) in a.iter().enumerate() {
                acc += x as u128 * powers[(j * k) % n] as u128;
            }
            (acc % q as u128) as u64
        })
        .collect();
    Ok(out)
}

/// Inverse of [`ntt_direct`]: uses `omega^-1` and scales by `N^-1`.
pub fn intt_direct(a_hat: &[u64], m: &Modulus, omega: u64) -> Result<Vec<u64>> {
    let n = a_hat.len();
    if !m.has_order(omega, n) {
        return Err(Error::InvalidRoot {
            root: omega,
            order: n,
            q: m.value(),
        });
    }
    let omega_inv = m.inv(omega)?;
    let n_inv = m.inv(n as u64 % m.value())?;
    let mut out = ntt_direct(a_hat, m, omega_inv)?;
    out.iter_mut().for_each(|x| *x = m.mul(*x, n_inv));
    Ok(out)
}

/// Negacyclic reference: `out[k] = sum_j a[j] * psi^(j*(2k+1))`.
pub fn negacyclic_ntt_direct(a: &[u64], m: &Modulus, psi: u64) -> Result<Vec<u64>> {
    let n = a.len();
    if !m.has_order(psi, 2 * n) {
        return Err(Error::InvalidRoot {
            root: psi,
            order: 2 * n,
            q: m.value(),
        });
    }
    let scaled: Vec<u64> = a
        .iter()
        .zip(power_table(m, psi, n))
        .map(|(&x, p)| m.mul(x, p))
        .collect();
    ntt_direct(&scaled, m, m.mul(psi, psi))
}

pub fn negacyclic_intt_direct(a_hat: &[u64], m: &Modulus, psi: u64) -> Result<Vec<u64>> {
    let n = a_hat.len();
    if !m.has_order(psi, 2 * n) {
        return Err(Error::InvalidRoot {
            root: psi,
            order: 2 * n,
            q: m.value(),
        });
    }
    let psi_inv = m.inv(psi)?;
    let out = intt_direct(a_hat, m, m.mul(psi, psi))?;
    Ok(out
        .into_iter()
        .zip(power_table(m, psi_inv, n))
        .map(|(x, p)| m.mul(x, p))
        .collect())
}

/// Schoolbook product in `Z_q[x]/(x^N + 1)`.
pub fn negacyclic_convolve_ref(a: &[u64], b: &[u64], m: &Modulus) -> Result<Vec<u64>> {
    convolve(a, b, m, true)
}

/// Schoolbook product in `Z_q[x]/(x^N - 1)`.
pub fn cyclic_convolve_ref(a: &[u64], b: &[u64], m: &Modulus) -> Result<Vec<u64>> {
    convolve(a, b, m, false)
}

fn convolve(a: &[u64], b: &[u64], m: &Modulus, negacyclic: bool) -> Result<Vec<u64>> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "operands of length {n} and {}",
            b.len()
        )));
    }
    let mut c = vec![0; n];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let p = m.mul(x, y);
            let k = i + j;
            if k < n {
                c[k] = m.add(c[k], p);
            } else if negacyclic {
                c[k - n] = m.sub(c[k - n], p);
            } else {
                c[k - n] = m.add(c[k - n], p);
            }
        }
    }
    Ok(c)
}

fn power_table(m: &Modulus, base: u64, len: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(len);
    let mut cur = 1;
    for _ in 0..len {
        out.push(cur);
        cur = m.mul(cur, base);
    }
    out
}

/// Precomputed twiddle matrices for one `(N, N1, N2, q, mode)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NttPlan {
    n: usize,
    n1: usize,
    n2: usize,
    modulus: Modulus,
    mode: NttMode,
    omega: u64,
    psi: Option<u64>,
    forward: Twiddles,
    inverse: Twiddles,
    /// Output scaling of the inverse: `N^-1` (cyclic) or `N^-1 * psi^-j`.
    inverse_post: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Twiddles {
    w1: Matrix,
    w2: Matrix,
    w3: Matrix,
}

impl Twiddles {
    /// Cyclic 4-step matrices for a root `w` of order `n1 * n2`.
    fn cyclic(m: &Modulus, w: u64, n1: usize, n2: usize) -> Self {
        let (n1u, n2u) = (n1 as u64, n2 as u64);
        let n = n1u * n2u;
        let pw = power_table(m, w, n as usize);
        let at = |e: u64| pw[(e % n) as usize];
        Self {
            w1: Matrix::from_fn(n1, n1, |j1, k1| at(n2u * (j1 * k1) as u64)),
            w2: Matrix::from_fn(n1, n2, |k1, j2| at((k1 * j2) as u64)),
            w3: Matrix::from_fn(n2, n2, |j2, k2| at(n1u * (j2 * k2) as u64)),
        }
    }

    /// Negacyclic matrices with the `psi^j` scaling folded in.
    fn negacyclic(m: &Modulus, psi: u64, n1: usize, n2: usize) -> Self {
        let (n1u, n2u) = (n1 as u64, n2 as u64);
        let order = 2 * n1u * n2u;
        let pw = power_table(m, psi, order as usize);
        let at = |e: u64| pw[(e % order) as usize];
        Self {
            w1: Matrix::from_fn(n1, n1, |j1, k1| {
                let (j1, k1) = (j1 as u64, k1 as u64);
                at(n2u * (2 * j1 * k1 + j1))
            }),
            w2: Matrix::from_fn(n1, n2, |k1, j2| at((2 * k1 as u64 + 1) * j2 as u64)),
            w3: Matrix::from_fn(n2, n2, |j2, k2| at(2 * n1u * (j2 * k2) as u64)),
        }
    }
}

impl NttPlan {
    /// Builds the plan for `N = n1 * n2`, picking the smallest valid roots.
    pub fn new(n: usize, n1: usize, n2: usize, modulus: Modulus, mode: NttMode) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidDimensions(format!(
                "N = {n} is not a power of two >= 2"
            )));
        }
        if n1 == 0 || n2 == 0 || n1 * n2 != n {
            return Err(Error::InvalidDimensions(format!(
                "{n1} x {n2} does not factor N = {n}"
            )));
        }
        let m = &modulus;
        let (omega, psi) = match mode {
            NttMode::Cyclic => (m.root_of_unity(n)?, None),
            NttMode::Negacyclic => {
                let psi = m.root_of_unity(2 * n)?;
                (m.mul(psi, psi), Some(psi))
            }
        };
        let forward = match psi {
            None => Twiddles::cyclic(m, omega, n1, n2),
            Some(psi) => Twiddles::negacyclic(m, psi, n1, n2),
        };
        let inverse = Twiddles::cyclic(m, m.inv(omega)?, n1, n2);
        let n_inv = m.inv(n as u64 % m.value())?;
        let inverse_post = match psi {
            None => vec![n_inv; n],
            Some(psi) => power_table(m, m.inv(psi)?, n)
                .into_iter()
                .map(|p| m.mul(p, n_inv))
                .collect(),
        };
        let plan = Self {
            n,
            n1,
            n2,
            modulus,
            mode,
            omega,
            psi,
            forward,
            inverse,
            inverse_post,
        };
        plan.self_check()?;
        Ok(plan)
    }

    /// Plan with the most balanced power-of-two split, `n1 >= n2`.
    pub fn balanced(n: usize, modulus: Modulus, mode: NttMode) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidDimensions(format!(
                "N = {n} is not a power of two >= 2"
            )));
        }
        let log = n.trailing_zeros();
        let n1 = 1usize << log.div_ceil(2);
        Self::new(n, n1, n / n1, modulus, mode)
    }

    // Compares a handful of outputs of one fixed input with direct summation.
    fn self_check(&self) -> Result<()> {
        let m = &self.modulus;
        let input: Vec<u64> = (0..self.n as u64)
            .map(|i| m.reduce(i.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 17))
            .collect();
        let out = self.forward(&input)?;
        let eval_root = self.psi.unwrap_or(self.omega);
        let stride = (self.n / 16).max(1);
        for k in (0..self.n).step_by(stride) {
            // out[k] = sum_j a[j] * r^(j*e_k) with e_k = k (cyclic) or 2k+1 (negacyclic)
            let e = match self.mode {
                NttMode::Cyclic => k as u64,
                NttMode::Negacyclic => 2 * k as u64 + 1,
            };
            let step = m.pow(eval_root, e);
            let mut acc = 0;
            let mut p = 1;
            for &x in &input {
                acc = m.mul_add(acc, x, p);
                p = m.mul(p, step);
            }
            if acc != out[k] {
                return Err(Error::Internal(format!(
                    "4-step plan N={} ({}x{}) disagrees with direct sum at k={k}",
                    self.n, self.n1, self.n2
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn mode(&self) -> NttMode {
        self.mode
    }

    /// Primitive N-th root used by the plan.
    pub fn omega(&self) -> u64 {
        self.omega
    }

    /// Primitive 2N-th root, negacyclic plans only.
    pub fn psi(&self) -> Option<u64> {
        self.psi
    }

    pub fn w1(&self) -> &Matrix {
        &self.forward.w1
    }

    pub fn w2(&self) -> &Matrix {
        &self.forward.w2
    }

    pub fn w3(&self) -> &Matrix {
        &self.forward.w3
    }

    /// Forward transform on the host matmul.
    pub fn forward(&self, a: &[u64]) -> Result<Vec<u64>> {
        self.forward_with(a, &PlainMatMul)
    }

    pub fn inverse(&self, a_hat: &[u64]) -> Result<Vec<u64>> {
        self.inverse_with(a_hat, &PlainMatMul)
    }

    /// Forward transform with both matmul passes on `exec`.
    pub fn forward_with(&self, a: &[u64], exec: &dyn ModMatMul) -> Result<Vec<u64>> {
        self.run(a, &self.forward, exec)
    }

    pub fn inverse_with(&self, a_hat: &[u64], exec: &dyn ModMatMul) -> Result<Vec<u64>> {
        let m = &self.modulus;
        let mut out = self.run(a_hat, &self.inverse, exec)?;
        out.iter_mut()
            .zip(&self.inverse_post)
            .for_each(|(x, &s)| *x = m.mul(*x, s));
        Ok(out)
    }

    fn run(&self, a: &[u64], tw: &Twiddles, exec: &dyn ModMatMul) -> Result<Vec<u64>> {
        if a.len() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "input of length {} for an N = {} plan",
                a.len(),
                self.n
            )));
        }
        let (n1, n2) = (self.n1, self.n2);
        let m = &self.modulus;
        let mods = ModulusAssignment::Shared(*m);

        let x = Matrix::from_fn(n2, n1, |j2, j1| a[j1 * n2 + j2]);
        let y = exec.matmul(&x, &tw.w1, &mods)?;
        // W2 scaling runs on the scalar path
        let z = Matrix::from_fn(n1, n2, |k1, j2| m.mul(y.get(j2, k1), tw.w2.get(k1, j2)));
        let out = exec.matmul(&z, &tw.w3, &mods)?;

        let mut res = vec![0; self.n];
        for k1 in 0..n1 {
            for k2 in 0..n2 {
                res[k1 + k2 * n1] = out.get(k1, k2);
            }
        }
        Ok(res)
    }

    /// Pointwise product in the transform domain followed by the inverse:
    /// cyclic or negacyclic convolution depending on the plan mode.
    pub fn multiply_with(&self, a: &[u64], b: &[u64], exec: &dyn ModMatMul) -> Result<Vec<u64>> {
        let m = &self.modulus;
        let fa = self.forward_with(a, exec)?;
        let fb = self.forward_with(b, exec)?;
        let prod: Vec<u64> = fa.iter().zip(&fb).map(|(&x, &y)| m.mul(x, y)).collect();
        self.inverse_with(&prod, exec)
    }
}

/// 4-step forward transform; same as [`NttPlan::forward`].
pub fn ntt_4step(a: &[u64], plan: &NttPlan) -> Result<Vec<u64>> {
    plan.forward(a)
}

pub fn intt_4step(a_hat: &[u64], plan: &NttPlan) -> Result<Vec<u64>> {
    plan.inverse(a_hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: u64) -> Modulus {
        Modulus::new(v).unwrap()
    }

    #[test]
    fn direct_examples() {
        let m = q(17);
        assert_eq!(ntt_direct(&[5, 0, 0, 0], &m, 4).unwrap(), vec![5; 4]);
        // k=1: 1 + 2*4 + 3*16 + 4*64 = 313 = 7 (mod 17)
        assert_eq!(
            ntt_direct(&[1, 2, 3, 4], &m, 4).unwrap(),
            vec![10, 7, 15, 6]
        );
        assert_eq!(ntt_direct(&[0; 4], &m, 4).unwrap(), vec![0; 4]);
        assert_eq!(
            intt_direct(&[10, 7, 15, 6], &m, 4).unwrap(),
            vec![1, 2, 3, 4]
        );
        assert_eq!(intt_direct(&[0; 4], &m, 4).unwrap(), vec![0; 4]);
    }

    #[test]
    fn direct_rejects_wrong_order_root() {
        let m = q(17);
        // 16 has order 2, not 4
        assert!(matches!(
            ntt_direct(&[1, 2, 3, 4], &m, 16),
            Err(Error::InvalidRoot { .. })
        ));
        assert!(intt_direct(&[1, 2, 3, 4], &m, 2).is_err());
    }

    #[test]
    fn plan_shapes() {
        let plan = NttPlan::new(4, 2, 2, q(17), NttMode::Cyclic).unwrap();
        assert_eq!(plan.w2().shape(), (2, 2));
        assert_eq!(plan.w1().shape(), (2, 2));
        let plan = NttPlan::new(32, 8, 4, q(97), NttMode::Cyclic).unwrap();
        assert_eq!(plan.w1().shape(), (8, 8));
        assert_eq!(plan.w2().shape(), (8, 4));
        assert_eq!(plan.w3().shape(), (4, 4));
    }

    #[test]
    fn plan_errors() {
        assert!(NttPlan::new(8, 4, 2, q(17), NttMode::Cyclic).is_ok());
        assert!(matches!(
            NttPlan::new(8, 4, 2, q(23), NttMode::Cyclic),
            Err(Error::NotNttFriendly { .. })
        ));
        // 17 = 1 mod 16 only: negacyclic N=16 needs order 32
        assert!(NttPlan::new(16, 4, 4, q(17), NttMode::Negacyclic).is_err());
        assert!(NttPlan::new(16, 4, 2, q(97), NttMode::Cyclic).is_err());
        assert!(NttPlan::new(12, 4, 3, q(97), NttMode::Cyclic).is_err());
    }

    #[test]
    fn plan_is_deterministic() {
        let a = NttPlan::new(64, 8, 8, q(257), NttMode::Negacyclic).unwrap();
        let b = NttPlan::new(64, 8, 8, q(257), NttMode::Negacyclic).unwrap();
        assert_eq!(a, b);
        let psi = a.psi().unwrap();
        let m = a.modulus();
        assert_eq!(m.mul(psi, psi), a.omega());
        assert!(m.has_order(a.omega(), 64));
    }

    #[test]
    fn four_step_small_matches_direct() {
        let m = q(17);
        let plan = NttPlan::new(4, 2, 2, m, NttMode::Cyclic).unwrap();
        assert_eq!(plan.forward(&[1, 2, 3, 4]).unwrap(), vec![10, 7, 15, 6]);
        assert_eq!(plan.inverse(&[10, 7, 15, 6]).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(plan.forward(&[9, 0, 0, 0]).unwrap(), vec![9; 4]);
        assert!(plan.forward(&[1, 2, 3]).is_err());
    }

    #[test]
    fn convolution_examples() {
        let m = q(17);
        let b = [3, 1, 4, 1];
        assert_eq!(
            negacyclic_convolve_ref(&[1, 0, 0, 0], &b, &m).unwrap(),
            b.to_vec()
        );
        assert_eq!(
            negacyclic_convolve_ref(&[0, 1], &[0, 1], &m).unwrap(),
            vec![16, 0]
        );
        assert_eq!(
            cyclic_convolve_ref(&[0, 1], &[0, 1], &m).unwrap(),
            vec![1, 0]
        );
        assert!(negacyclic_convolve_ref(&[1], &[1, 2], &m).is_err());
    }

    #[test]
    fn negacyclic_direct_round_trip() {
        let m = q(97);
        let psi = m.root_of_unity(16).unwrap();
        let a: Vec<u64> = (0..8).map(|i| i * 11 % 97).collect();
        let ah = negacyclic_ntt_direct(&a, &m, psi).unwrap();
        assert_eq!(negacyclic_intt_direct(&ah, &m, psi).unwrap(), a);
    }
}
