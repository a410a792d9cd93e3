//! Fast (approximate) RNS base conversion from a source basis `P` to a
//! disjoint target basis `Q`.
//!
//! For a coefficient with residues `a_j` modulo `p_j`:
//!
//! ```text
//! out_i = sum_j [a_j * Phat_j^-1]_{p_j} * Phat_j  mod q_i,   Phat_j = P* / p_j
//! ```
//!
//! The result equals `v + e*P*` modulo every `q_i`, where `v` is the CRT value
//! of the input and `0 <= e < alpha`. No correction of `e` is attempted.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, ModMatMul, ModulusAssignment};
use crate::modarith::Modulus;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseConvPlan {
    source: Vec<Modulus>,
    target: Vec<Modulus>,
    p_star: BigUint,
    p_hat: Vec<BigUint>,
    p_star_mod_q: Vec<u64>,
    inv_p_hat: Vec<u64>,
    /// `L x alpha`, entry `(i, j) = Phat_j mod q_i`.
    p_hat_mod_q: Matrix,
}

impl BaseConvPlan {
    pub fn new(source: &[Modulus], target: &[Modulus]) -> Result<Self> {
        if source.is_empty() || target.is_empty() {
            return Err(Error::InvalidModuli(
                "both bases need at least one modulus".into(),
            ));
        }
        let mut seen: Vec<u64> = source.iter().chain(target).map(Modulus::value).collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidModuli(format!(
                "modulus {} appears more than once across the source and target bases",
                w[0]
            )));
        }

        let p_star = source
            .iter()
            .fold(BigUint::from(1u32), |acc, p| acc * p.value());
        let p_hat: Vec<BigUint> = source.iter().map(|p| &p_star / p.value()).collect();
        let reduce = |x: &BigUint, m: &Modulus| (x % m.value()).to_u64().expect("residue fits");

        let inv_p_hat = source
            .iter()
            .zip(&p_hat)
            .map(|(p, ph)| p.inv(reduce(ph, p)))
            .collect::<Result<Vec<_>>>()?;
        let p_star_mod_q = target.iter().map(|q| reduce(&p_star, q)).collect();
        let p_hat_mod_q = Matrix::from_fn(target.len(), source.len(), |i, j| {
            reduce(&p_hat[j], &target[i])
        });

        Ok(Self {
            source: source.to_vec(),
            target: target.to_vec(),
            p_star,
            p_hat,
            p_star_mod_q,
            inv_p_hat,
            p_hat_mod_q,
        })
    }

    pub fn source(&self) -> &[Modulus] {
        &self.source
    }

    pub fn target(&self) -> &[Modulus] {
        &self.target
    }

    pub fn alpha(&self) -> usize {
        self.source.len()
    }

    /// Number of target limbs (`L`).
    pub fn target_len(&self) -> usize {
        self.target.len()
    }

    /// Product of the source moduli.
    pub fn p_star(&self) -> &BigUint {
        &self.p_star
    }

    /// `P* / p_j`, exact.
    pub fn p_hat(&self) -> &[BigUint] {
        &self.p_hat
    }

    pub fn p_star_mod_q(&self) -> &[u64] {
        &self.p_star_mod_q
    }

    /// `(P* / p_j)^-1 mod p_j` per source modulus.
    pub fn inv_p_hat(&self) -> &[u64] {
        &self.inv_p_hat
    }

    pub fn p_hat_mod_q(&self) -> &Matrix {
        &self.p_hat_mod_q
    }

    fn check_input(&self, a: &Matrix) -> Result<()> {
        if a.rows() != self.alpha() {
            return Err(Error::ShapeMismatch(format!(
                "{} residue rows for {} source moduli",
                a.rows(),
                self.alpha()
            )));
        }
        for (j, p) in self.source.iter().enumerate() {
            if let Some(&bad) = a.row(j).iter().find(|&&x| x >= p.value()) {
                return Err(Error::ShapeMismatch(format!(
                    "residue {bad} in row {j} is not reduced modulo {p}"
                )));
            }
        }
        Ok(())
    }

    /// The element-wise scale step `y[j][n] = [a[j][n] * Phat_j^-1]_{p_j}`.
    pub fn scale(&self, a: &Matrix) -> Result<Matrix> {
        self.check_input(a)?;
        Ok(Matrix::from_fn(a.rows(), a.cols(), |j, n| {
            self.source[j].mul(a.get(j, n), self.inv_p_hat[j])
        }))
    }

    /// Per-coefficient evaluation with exact big-integer accumulation.
    ///
    /// `a` is `alpha x N` (one row per source limb); the result is `L x N`.
    pub fn convert_direct(&self, a: &Matrix) -> Result<Matrix> {
        self.check_input(a)?;
        let mut out = Matrix::zeros(self.target_len(), a.cols());
        for n in 0..a.cols() {
            let mut sum = BigUint::zero();
            for (j, p) in self.source.iter().enumerate() {
                let y = p.mul(a.get(j, n), self.inv_p_hat[j]);
                sum += &self.p_hat[j] * y;
            }
            for (i, q) in self.target.iter().enumerate() {
                out.set(i, n, (&sum % q.value()).to_u64().expect("residue fits"));
            }
        }
        Ok(out)
    }

    /// Scale step on the scalar path, then one mixed-moduli matmul
    /// `Phat_mod_Q x Y` with row `i` reduced modulo `q_i` after every MAC.
    pub fn convert_matrix(&self, a: &Matrix, exec: &dyn ModMatMul) -> Result<Matrix> {
        let y = self.scale(a)?;
        let mods = ModulusAssignment::PerRow(self.target.clone());
        let out = exec.matmul(&self.p_hat_mod_q, &y, &mods)?;
        if out.shape() != (self.target_len(), a.cols()) {
            return Err(Error::ShapeMismatch(format!(
                "executor returned {:?}, expected {:?}",
                out.shape(),
                (self.target_len(), a.cols())
            )));
        }
        Ok(out)
    }
}

pub fn baseconv_direct(a: &Matrix, plan: &BaseConvPlan) -> Result<Matrix> {
    plan.convert_direct(a)
}

pub fn baseconv_matrix(a: &Matrix, plan: &BaseConvPlan, exec: &dyn ModMatMul) -> Result<Matrix> {
    plan.convert_matrix(a, exec)
}
