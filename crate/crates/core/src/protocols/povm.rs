use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::linalg::{self, c, CMatrix};

/// Elements may dip below zero by this much.
pub const POVM_PSD_TOL: f64 = 1e-10;
/// Maximum entrywise deviation of `Σ Λ_k` from `I`.
pub const COMPLETENESS_TOL: f64 = 1e-8;
/// Eigenvalues of the average state below `PINV_CUTOFF · λ_max` are null space.
pub const PINV_CUTOFF: f64 = 1e-10;

/// A measurement given by its effects.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    /// Validates positivity of each element and completeness.
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let p = Self::from_parts(elements)?;
        for e in &p.elements {
            let min = linalg::eigvalsh(e).first().copied().unwrap_or(0.0);
            if min < -POVM_PSD_TOL {
                return Err(Error::NotPsd(min));
            }
        }
        let r = p.completeness_residual();
        if r > COMPLETENESS_TOL {
            return Err(Error::Incomplete(r));
        }
        Ok(p)
    }

    pub(crate) fn from_parts(elements: Vec<CMatrix>) -> Result<Self> {
        let d = elements
            .first()
            .map(|e| e.nrows())
            .ok_or_else(|| Error::Degenerate("empty POVM".into()))?;
        if let Some(e) = elements.iter().find(|e| e.nrows() != d || e.ncols() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: e.nrows(),
            });
        }
        Ok(Self { elements })
    }

    /// The trivial measurement `{I}`.
    pub fn trivial(d: usize) -> Self {
        Self {
            elements: vec![linalg::identity(d)],
        }
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<CMatrix> {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    /// `max_ij |(Σ_k Λ_k − I)_ij|`.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let mut sum = CMatrix::zeros(d, d);
        for e in &self.elements {
            sum += e;
        }
        linalg::max_abs_diff(&sum, &linalg::identity(d))
    }

    /// `Tr[Λ_k ρ]`.
    pub fn probability(&self, k: usize, rho: &CMatrix) -> f64 {
        linalg::trace_product(&self.elements[k], rho)
    }

    /// `Σ_k p_k Tr[Λ_k ρ_k]`.
    pub fn success(&self, states: &[CMatrix], priors: &[f64]) -> f64 {
        states
            .iter()
            .zip(priors)
            .enumerate()
            .map(|(k, (s, p))| p * self.probability(k, s))
            .sum()
    }

    /// Merges elements into groups: `out[g] = Σ_{k ∈ groups[g]} Λ_k`.
    pub fn coarse_grain(&self, groups: &[Vec<usize>]) -> Result<Self> {
        let d = self.dim();
        let elements = groups
            .iter()
            .map(|g| {
                let mut acc = CMatrix::zeros(d, d);
                for &k in g {
                    acc += &self.elements[k];
                }
                acc
            })
            .collect();
        Self::from_parts(elements)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PgmDiagnostics {
    pub support_rank: usize,
    pub null_rank: usize,
    pub completeness_residual: f64,
}

/// Pretty-good (square-root) measurement
/// `Λ_k = ρ̄^{-1/2} p_k ρ_k ρ̄^{-1/2} + P_null / K` with `ρ̄ = Σ p_k ρ_k`.
///
/// The null-space projector of `ρ̄` is spread evenly over the `K` outcomes.
pub fn pgm_decoder(states: &[CMatrix], priors: &[f64]) -> Result<Povm> {
    pgm_with_diagnostics(states, priors).map(|(p, _)| p)
}

pub fn pgm_with_diagnostics(states: &[CMatrix], priors: &[f64]) -> Result<(Povm, PgmDiagnostics)> {
    if states.is_empty() {
        return Err(Error::Degenerate("no states".into()));
    }
    if states.len() != priors.len() {
        return Err(Error::DimensionMismatch {
            expected: states.len(),
            found: priors.len(),
        });
    }
    let total: f64 = priors.iter().sum();
    if priors.iter().any(|p| p.is_nan() || *p < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::validation("priors", format!("must be a distribution (sum {total})")));
    }
    let d = states[0].nrows();
    if let Some(s) = states.iter().find(|s| s.nrows() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: s.nrows(),
        });
    }
    let mut avg = CMatrix::zeros(d, d);
    for (s, &p) in states.iter().zip(priors) {
        avg += s * c(p, 0.0);
    }
    let (vals, vecs) = linalg::eigh(&avg);
    let lmax = vals.last().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return Err(Error::Degenerate("average state is zero".into()));
    }
    let cut = PINV_CUTOFF * lmax;
    let mut inv_sqrt = CMatrix::zeros(d, d);
    let mut null = CMatrix::zeros(d, d);
    let mut support_rank = 0;
    for (j, &l) in vals.iter().enumerate() {
        let v = vecs.column(j);
        let outer = &v * v.adjoint();
        if l > cut {
            inv_sqrt += outer * c(1.0 / l.sqrt(), 0.0);
            support_rank += 1;
        } else {
            null += outer;
        }
    }
    let share = c(1.0 / states.len() as f64, 0.0);
    let elements: Vec<CMatrix> = states
        .iter()
        .zip(priors)
        .map(|(s, &p)| linalg::hermitize(&(&inv_sqrt * s * &inv_sqrt * c(p, 0.0) + &null * share)))
        .collect();
    let povm = Povm::from_parts(elements)?;
    let residual = povm.completeness_residual();
    if residual > COMPLETENESS_TOL {
        return Err(Error::Incomplete(residual));
    }
    Ok((
        povm,
        PgmDiagnostics {
            support_rank,
            null_rank: d - support_rank,
            completeness_residual: residual,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::DensityMatrix;
    use crate::qstate::SystemLayout;

    fn basis(d: usize, i: usize) -> CMatrix {
        let mut m = CMatrix::zeros(d, d);
        m[(i, i)] = c(1.0, 0.0);
        m
    }

    #[test]
    fn orthogonal_states_are_perfectly_distinguished() {
        let states: Vec<_> = (0..3).map(|i| basis(3, i)).collect();
        let p = pgm_decoder(&states, &[1.0 / 3.0; 3]).unwrap();
        assert!((p.success(&states, &[1.0 / 3.0; 3]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_states_give_chance() {
        let s = basis(2, 0);
        let states = vec![s.clone(); 4];
        let p = pgm_decoder(&states, &[0.25; 4]).unwrap();
        assert!((p.success(&states, &[0.25; 4]) - 0.25).abs() < 1e-12);
        assert!(p.completeness_residual() < 1e-12);
    }

    #[test]
    fn bell_basis_oracle() {
        // the four Bell states as explicit vectors
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let vecs = [
            [h, 0.0, 0.0, h],
            [h, 0.0, 0.0, -h],
            [0.0, h, h, 0.0],
            [0.0, h, -h, 0.0],
        ];
        let layout = SystemLayout::new([("A", 2), ("B", 2)]).unwrap();
        let states: Vec<CMatrix> = vecs
            .iter()
            .map(|v| {
                let amps: Vec<_> = v.iter().map(|&x| c(x, 0.0)).collect();
                DensityMatrix::pure(&amps, layout.clone()).unwrap().into_matrix()
            })
            .collect();
        let p = pgm_decoder(&states, &[0.25; 4]).unwrap();
        for (k, s) in states.iter().enumerate() {
            assert!((p.probability(k, s) - 1.0).abs() < 1e-12);
            assert!(linalg::max_abs_diff(&p.elements()[k], s) < 1e-12);
        }
    }

    #[test]
    fn rank_deficient_mixture_is_completed() {
        let states = vec![basis(4, 0), basis(4, 1)];
        let (p, diag) = pgm_with_diagnostics(&states, &[0.5, 0.5]).unwrap();
        assert_eq!(diag.support_rank, 2);
        assert_eq!(diag.null_rank, 2);
        assert!(p.completeness_residual() < 1e-12);
        assert!(Povm::new(p.into_elements()).is_ok());
    }

    #[test]
    fn degenerate_inputs() {
        let z = CMatrix::zeros(2, 2);
        assert!(matches!(pgm_decoder(&[z.clone(), z], &[0.5, 0.5]), Err(Error::Degenerate(_))));
        assert!(pgm_decoder(&[basis(2, 0)], &[0.7]).is_err());
    }

    #[test]
    fn coarse_graining_sums_elements() {
        let states: Vec<_> = (0..4).map(|i| basis(4, i)).collect();
        let p = pgm_decoder(&states, &[0.25; 4]).unwrap();
        let g = p.coarse_grain(&[vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.completeness_residual() < 1e-12);
        assert!((g.probability(0, &states[1]) - 1.0).abs() < 1e-12);
    }
}
