use rand::Rng;
use serde::Serialize;

use super::family::haar_unitary;
use crate::error::{Error, Result};
use crate::qstate::linalg::{self, c, CMatrix};
use crate::qstate::DensityMatrix;

pub const EFFECT_TOL: f64 = 1e-10;
pub const UNION_BOUND_SLACK: f64 = 1e-9;
pub const CHAIN_AGREEMENT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct UnionBoundOutcome {
    /// `Tr[ϱ] − Tr[Λ̂ϱ]`.
    pub lhs: f64,
    /// `2 √(Σ_j Tr[(I − Λ_j)ϱ])`.
    pub rhs: f64,
    /// `Tr[Λ̂ϱ]` from the sum over `x ∈ {0,1}^J`.
    pub lambda_hat_value: f64,
    /// `Tr[Π̂ϱΠ̂†]` from the explicit isometry-like chain.
    pub pi_chain_value: f64,
    pub holds: bool,
    pub agrees: bool,
}

fn branches(lambda: &CMatrix) -> [CMatrix; 2] {
    [
        lambda.clone(),
        linalg::hermitian_map(lambda, |t| {
            let t = t.clamp(0.0, 1.0);
            t.sqrt() * (1.0 - t).sqrt()
        }),
    ]
}

/// Checks `Tr[ϱ] − Tr[Π̂ϱΠ̂†] ≤ 2√(Σ_j Tr[(I−Λ_j)ϱ])` for
/// `Π̂ = Π_{Λ_J}⋯Π_{Λ_1}`, `Π_Λ = Λ ⊗ |0⟩ + √Λ√(I−Λ) ⊗ |1⟩`.
///
/// `Tr[Π̂ϱΠ̂†]` is evaluated twice: through
/// `Λ̂ = Σ_x Λ_1^{x_1}⋯Λ_J^{x_J}Λ_J^{x_J}⋯Λ_1^{x_1}` and through the
/// `(d·2^J) × d` matrix `Π̂` itself.
pub fn union_bound_check(lambdas: &[CMatrix], rho: &DensityMatrix) -> Result<UnionBoundOutcome> {
    let d = rho.dim();
    if lambdas.is_empty() {
        return Err(Error::Degenerate("no operators".into()));
    }
    if lambdas.len() > 16 {
        return Err(Error::TooLarge(format!("{} operators (at most 16)", lambdas.len())));
    }
    for l in lambdas {
        if l.nrows() != d || l.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: l.nrows(),
            });
        }
        let dev = linalg::hermitian_deviation(l);
        if dev > EFFECT_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let ev = linalg::eigvalsh(l);
        if let Some(&bad) = ev.iter().find(|&&v| !(-EFFECT_TOL..=1.0 + EFFECT_TOL).contains(&v)) {
            return Err(Error::OperatorOutOfRange(bad));
        }
    }
    let rho_m = rho.matrix();
    let tr = rho.trace();
    let ops: Vec<[CMatrix; 2]> = lambdas.iter().map(branches).collect();

    // Λ̂ = Φ_1(Φ_2(⋯Φ_J(I)))
    let mut hat = linalg::identity(d);
    for [a, b] in ops.iter().rev() {
        hat = a * &hat * a + b * &hat * b;
    }
    let lambda_hat_value = linalg::trace_product(&hat, rho_m);

    // Π̂ as a stack of blocks, block x = Λ_J^{x_J}⋯Λ_1^{x_1}
    let mut blocks = vec![linalg::identity(d)];
    for [a, b] in &ops {
        blocks = blocks
            .iter()
            .flat_map(|blk| [a * blk, b * blk])
            .collect();
    }
    let mut pi = CMatrix::zeros(d * blocks.len(), d);
    for (i, blk) in blocks.iter().enumerate() {
        pi.view_mut((i * d, 0), (d, d)).copy_from(blk);
    }
    let pi_chain_value = linalg::trace(&(&pi * rho_m * pi.adjoint())).re;

    let miss: f64 = lambdas
        .iter()
        .map(|l| linalg::trace_product(&(linalg::identity(d) - l), rho_m))
        .sum();
    let lhs = tr - lambda_hat_value;
    let rhs = 2.0 * miss.max(0.0).sqrt();
    Ok(UnionBoundOutcome {
        lhs,
        rhs,
        lambda_hat_value,
        pi_chain_value,
        holds: lhs <= rhs + UNION_BOUND_SLACK,
        agrees: (lambda_hat_value - pi_chain_value).abs() <= CHAIN_AGREEMENT_TOL,
    })
}

/// Random effect `0 ≤ Λ ≤ I`: Haar eigenbasis, eigenvalues uniform on [0, 1].
pub fn random_effect<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let u = haar_unitary(d, rng);
    let diag = CMatrix::from_fn(d, d, |i, j| if i == j { c(rng.random::<f64>(), 0.0) } else { c(0.0, 0.0) });
    linalg::hermitize(&(&u * diag * u.adjoint()))
}

/// Random subnormalized state: Ginibre state scaled by a uniform trace in (0, 1].
pub fn random_subnormalized<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DensityMatrix> {
    let g = haar_unitary(d, rng);
    let weights: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let scale = 1.0 - rng.random::<f64>();
    let diag = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            c(scale * weights[i] / total, 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let m = linalg::hermitize(&(&g * diag * g.adjoint()));
    let layout = crate::qstate::SystemLayout::new([("Q", d)])?;
    DensityMatrix::new_subnormalized(m, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::rng::StreamRng;
    use crate::qstate::SystemLayout;
    use rand::SeedableRng;

    #[test]
    fn single_operator() {
        let mut rng = StreamRng::seed_from_u64(1);
        let rho = random_subnormalized(4, &mut rng).unwrap();
        let l = random_effect(4, &mut rng);
        let out = union_bound_check(std::slice::from_ref(&l), &rho).unwrap();
        let miss = linalg::trace_product(&(linalg::identity(4) - &l), rho.matrix());
        // Λ̂ = Λ² + Λ(I−Λ) = Λ
        assert!((out.lhs - miss).abs() < 1e-12);
        assert!(out.holds && out.agrees);
    }

    #[test]
    fn identity_operators_lose_nothing() {
        let rho = DensityMatrix::maximally_mixed(SystemLayout::new([("Q", 3)]).unwrap());
        let out = union_bound_check(&vec![linalg::identity(3); 3], &rho).unwrap();
        assert!(out.lhs.abs() < 1e-12);
        assert!(out.rhs.abs() < 1e-12);
    }

    #[test]
    fn out_of_range_operator_is_rejected() {
        let rho = DensityMatrix::maximally_mixed(SystemLayout::new([("Q", 2)]).unwrap());
        let bad = linalg::identity(2) * c(1.5, 0.0);
        assert!(matches!(
            union_bound_check(&[bad], &rho),
            Err(Error::OperatorOutOfRange(_))
        ));
    }

    #[test]
    fn random_trials_hold() {
        let mut rng = StreamRng::seed_from_u64(5);
        for _ in 0..50 {
            let rho = random_subnormalized(8, &mut rng).unwrap();
            let ls: Vec<_> = (0..3).map(|_| random_effect(8, &mut rng)).collect();
            let out = union_bound_check(&ls, &rho).unwrap();
            assert!(out.holds && out.agrees, "{out:?}");
        }
    }
}
