use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng::{stream, Purpose};
use crate::error::{Error, Result};
use crate::qstate::linalg::{self, c, CMatrix};
use crate::qstate::{SystemLayout, UnitaryMatrix};

/// Haar-random `d × d` unitary: complex Ginibre matrix, QR, then the
/// phases of `R`'s diagonal folded into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * scale, im * scale)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar unitary wrapped with a single-factor layout.
pub fn haar_unitary_on<R: Rng + ?Sized>(label: &str, d: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    UnitaryMatrix::new(haar_unitary(d, rng), SystemLayout::new([(label, d)])?)
}

/// Weyl–Heisenberg operator `X^a Z^b` on `C^d`.
pub fn weyl(d: usize, a: usize, b: usize) -> CMatrix {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        let phase = omega * ((b * j) % d) as f64;
        m[((j + a) % d, j)] = c(phase.cos(), phase.sin());
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Haar,
    /// Deterministic generalized Pauli operators, `d²` per copy. Not part of
    /// the random-coding construction; used for exact twirls.
    Pauli,
}

/// `K` block unitaries `U_k = ⊗_{i=1}^n U_{k,i}` on one sender's `n` copies.
#[derive(Clone, Debug)]
pub struct UnitaryFamily {
    pub sender: usize,
    pub n: usize,
    pub d: usize,
    pub kind: FamilyKind,
    /// `per_index[k][i]` is the copy-`i` factor of `U_k`.
    pub per_index: Vec<Vec<CMatrix>>,
    pub master_seed: u64,
    pub trial: u64,
}

impl UnitaryFamily {
    pub fn size(&self) -> usize {
        self.per_index.len()
    }

    /// The realized block unitary `U_k`.
    pub fn block(&self, k: usize) -> CMatrix {
        let factors = &self.per_index[k];
        let mut m = factors[0].clone();
        for f in &factors[1..] {
            m = linalg::kron(&m, f);
        }
        m
    }

    pub fn block_dims(&self) -> Vec<usize> {
        vec![self.d; self.n]
    }
}

/// Draws `k_count` independent block unitaries for sender `z` (1-based).
/// Haar factors use the stream `(trial, z, k, i)` under `master_seed`.
pub fn sample_family(
    z: usize,
    n: usize,
    k_count: usize,
    d: usize,
    kind: FamilyKind,
    master_seed: u64,
    trial: u64,
) -> Result<UnitaryFamily> {
    if n == 0 || k_count == 0 || d == 0 {
        return Err(Error::validation("family", "n, K and d must be positive"));
    }
    let per_index = match kind {
        FamilyKind::Haar => (0..k_count)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        let mut rng =
                            stream(master_seed, Purpose::Unitary, &[trial, z as u64, k as u64, i as u64]);
                        haar_unitary(d, &mut rng)
                    })
                    .collect()
            })
            .collect(),
        FamilyKind::Pauli => {
            let per_copy = d * d;
            let available = (per_copy as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
            if k_count as u128 > available {
                return Err(Error::validation(
                    "family",
                    format!("Pauli family has only {available} members for d = {d}, n = {n}"),
                ));
            }
            (0..k_count)
                .map(|k| {
                    // copy 1 is the most significant base-d² digit
                    let mut digits = vec![0usize; n];
                    let mut rest = k;
                    for i in (0..n).rev() {
                        digits[i] = rest % per_copy;
                        rest /= per_copy;
                    }
                    digits.iter().map(|&g| weyl(d, g / d, g % d)).collect()
                })
                .collect()
        }
    };
    Ok(UnitaryFamily {
        sender: z,
        n,
        d,
        kind,
        per_index,
        master_seed,
        trial,
    })
}
