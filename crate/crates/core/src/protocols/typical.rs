use serde::Serialize;

use super::setting::Budget;
use super::sequential::unflatten;
use crate::error::{Error, Result};
use crate::qstate::linalg::{self, CMatrix};
use crate::qstate::{spectrum_entropy, DensityMatrix};

/// Relative slack on the rank and operator bounds.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct TypicalDiagnostics {
    pub n: usize,
    pub delta: f64,
    /// `S(ρ)` in bits.
    pub entropy: f64,
    pub rank: usize,
    /// `Tr[Π ρ^{⊗n}]`.
    pub mass: f64,
    /// `1 − mass`.
    pub epsilon: f64,
    /// `Tr[Π ρ^{⊗n}]` recomputed from the dense matrices.
    pub matrix_mass: f64,
    /// `2^{n(S+δ)}`.
    pub rank_bound: f64,
    /// Largest eigenvalue of `Π ρ^{⊗n} Π`.
    pub max_typical_eigenvalue: f64,
    /// `2^{−n(S−δ)}`.
    pub operator_bound: f64,
    pub mass_ok: bool,
    pub rank_ok: bool,
    pub operator_ok: bool,
}

#[derive(Clone, Debug)]
pub struct TypicalProjector {
    pub projector: CMatrix,
    /// Eigen-index sequences (copy 1 first) spanning the projector.
    pub sequences: Vec<Vec<usize>>,
    pub diagnostics: TypicalDiagnostics,
}

/// Projector onto the span of product eigenvectors `|e_{x_1}⟩⊗⋯⊗|e_{x_n}⟩`
/// whose empirical surprisal `−(1/n) Σ log₂ λ_{x_i}` lies within `δ` of
/// `S(ρ)`. Sequences through a zero eigenvalue are never typical.
pub fn typical_projector(rho: &DensityMatrix, n: usize, delta: f64, budget: Budget) -> Result<TypicalProjector> {
    if n == 0 {
        return Err(Error::validation("n", "must be at least 1"));
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::validation("delta", "must be a finite nonnegative number"));
    }
    let d = rho.dim();
    let total = budget.check_power(d, n)?;
    let (raw, vecs) = linalg::eigh(rho.matrix());
    let vals: Vec<f64> = raw.iter().map(|&v| v.max(0.0)).collect();
    let entropy = spectrum_entropy(&raw)?;
    let logs: Vec<f64> = vals
        .iter()
        .map(|&v| if v > 0.0 { v.log2() } else { f64::NEG_INFINITY })
        .collect();

    let radices = vec![d; n];
    let mut sequences = Vec::new();
    let mut mass = 0.0;
    let mut max_eig: f64 = 0.0;
    for idx in 0..total {
        let x = unflatten(idx, &radices);
        let log_p: f64 = x.iter().map(|&i| logs[i]).sum();
        if !log_p.is_finite() {
            continue;
        }
        let surprisal = -log_p / n as f64;
        if (surprisal - entropy).abs() <= delta {
            let p: f64 = x.iter().map(|&i| vals[i]).product();
            mass += p;
            max_eig = max_eig.max(p);
            sequences.push(x);
        }
    }

    let mut projector = CMatrix::zeros(total, total);
    for x in &sequences {
        let mut v = vecs.column(x[0]).into_owned();
        for &i in &x[1..] {
            v = v.kronecker(&vecs.column(i));
        }
        projector += &v * v.adjoint();
    }

    let rank = sequences.len();
    let nf = n as f64;
    let rank_bound = (nf * (entropy + delta)).exp2();
    let operator_bound = (-nf * (entropy - delta)).exp2();
    let epsilon = 1.0 - mass;
    let matrix_mass = linalg::trace_product(&projector, rho.power(n)?.matrix());
    let diagnostics = TypicalDiagnostics {
        n,
        delta,
        entropy,
        rank,
        mass,
        epsilon,
        matrix_mass,
        rank_bound,
        max_typical_eigenvalue: max_eig,
        operator_bound,
        mass_ok: matrix_mass >= 1.0 - epsilon - 1e-10,
        rank_ok: rank as f64 <= rank_bound * (1.0 + BOUND_SLACK),
        operator_ok: max_eig <= operator_bound * (1.0 + BOUND_SLACK),
    };
    Ok(TypicalProjector {
        projector,
        sequences,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::SystemLayout;

    #[test]
    fn maximally_mixed_is_fully_typical() {
        let rho = DensityMatrix::maximally_mixed(SystemLayout::new([("Q", 2)]).unwrap());
        let t = typical_projector(&rho, 4, 0.1, Budget::default()).unwrap();
        assert_eq!(t.diagnostics.rank, 16);
        assert!((t.diagnostics.mass - 1.0).abs() < 1e-12);
        assert!(linalg::max_abs_diff(&t.projector, &linalg::identity(16)) < 1e-12);
    }

    #[test]
    fn pure_state_gives_rank_one() {
        let l = SystemLayout::new([("Q", 2)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = [linalg::c(h, 0.0), linalg::c(0.0, h)];
        let rho = DensityMatrix::pure(&amps, l).unwrap();
        let t = typical_projector(&rho, 3, 0.3, Budget::default()).unwrap();
        assert_eq!(t.diagnostics.rank, 1);
        let psi = rho.power(3).unwrap();
        assert!(linalg::max_abs_diff(&t.projector, psi.matrix()) < 1e-12);
    }

    #[test]
    fn projector_is_idempotent() {
        let rho = crate::qstate::random_density(SystemLayout::new([("Q", 3)]).unwrap(), 3, 4).unwrap();
        let t = typical_projector(&rho, 3, 0.4, Budget::default()).unwrap();
        let p = &t.projector;
        assert!(linalg::max_abs_diff(&(p * p), p) < 1e-10);
        assert!((linalg::trace(p).re - t.diagnostics.rank as f64).abs() < 1e-9);
        let d = &t.diagnostics;
        assert!(d.rank_ok && d.operator_ok && d.mass_ok);
    }

    #[test]
    fn budget_is_enforced() {
        let rho = DensityMatrix::maximally_mixed(SystemLayout::new([("Q", 2)]).unwrap());
        assert!(matches!(
            typical_projector(&rho, 13, 0.1, Budget::default()),
            Err(Error::DimensionOverflow { .. })
        ));
    }
}
