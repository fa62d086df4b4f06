use serde::Serialize;

use super::family::UnitaryFamily;
use super::povm::{pgm_decoder, Povm, COMPLETENESS_TOL};
use super::setting::Setting;
use crate::error::{Error, Result};
use crate::qstate::linalg::{self, CMatrix};
use crate::qstate::partial_trace;

/// Upper bound on stored decoder entries (`|𝐊| · D²`).
pub const MAX_DECODER_ENTRIES: usize = 1 << 24;

/// Mixed-radix index with sender 1 most significant.
pub fn flat_index(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (d, r)| acc * r + d)
}

pub fn unflatten(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (slot, r) in digits.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    digits
}

pub(crate) fn check_decoder_size(count: usize, dim: usize) -> Result<()> {
    let entries = count.saturating_mul(dim).saturating_mul(dim);
    if entries > MAX_DECODER_ENTRIES {
        return Err(Error::TooLarge(format!(
            "decoder with {count} elements of dimension {dim}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SequentialOutcome {
    /// `Λ_𝐤` indexed by [`flat_index`] over the family sizes.
    pub povm: Povm,
    /// `(1/|𝐊|) Σ_𝐤 Tr[Λ_𝐤 ρ_𝐤]`.
    pub success: f64,
    pub stages: Vec<StageSummary>,
    pub completeness_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageSummary {
    pub sender: usize,
    pub size: usize,
    /// Average success of the stage-`z` POVM on its own ensemble.
    pub stage_success: f64,
}

/// Successive decoder. Stage `z` measures `A_{[z]}^n V^n` with the
/// pretty-good measurement for `{U_{z,k} (ρ^{A_{[z]} V})^{⊗n} U_{z,k}†}_k`,
/// where `A_{<z}` is taken as already un-rotated. With
/// `Υ_{z,k}² = U_{z,k}† Λ_{z,k} U_{z,k}`, `Υ^{(0)} = Υ²`,
/// `Υ^{(1)} = Υ √(I − Υ²)`, the decoder is
/// `Λ_𝐤 = Ũ_𝐤 [Σ_x Υ_1^{x_1}⋯Υ_Z^{x_Z} Υ_Z^{x_Z}⋯Υ_1^{x_1}] Ũ_𝐤†`.
pub fn sequential_decoder(setting: &Setting, families: &[UnitaryFamily]) -> Result<SequentialOutcome> {
    let z_count = setting.z_count();
    if families.len() != z_count {
        return Err(Error::DimensionMismatch {
            expected: z_count,
            found: families.len(),
        });
    }
    for (zi, f) in families.iter().enumerate() {
        setting.check_family(zi, f)?;
    }
    let radices: Vec<usize> = families.iter().map(|f| f.size()).collect();
    let total: usize = radices.iter().product();
    let dim = setting.dim();
    check_decoder_size(total, dim)?;
    let layout = setting.layout();
    let dims = layout.dims();

    // g[z][k][x]: Υ^{(x)}_{z,k} on the full space, in the un-rotated frame
    let mut g: Vec<Vec<[CMatrix; 2]>> = Vec::with_capacity(z_count);
    let mut stages = Vec::with_capacity(z_count);
    for (zi, f) in families.iter().enumerate() {
        let mut keep_single: Vec<String> = setting.senders()[..=zi].to_vec();
        keep_single.extend(setting.others().iter().cloned());
        let keep = setting.copies_of(&keep_single);
        let marginal = partial_trace(setting.full(), &keep)?;
        let sub = marginal.layout();
        let states: Vec<CMatrix> = (0..f.size())
            .map(|k| setting.conjugate(marginal.matrix(), sub, zi, &f.block(k)))
            .collect::<Result<_>>()?;
        let priors = vec![1.0 / f.size() as f64; f.size()];
        let stage = pgm_decoder(&states, &priors)?;
        stages.push(StageSummary {
            sender: zi + 1,
            size: f.size(),
            stage_success: stage.success(&states, &priors),
        });
        let positions = layout.positions(&keep)?;
        let per_k = stage
            .elements()
            .iter()
            .enumerate()
            .map(|(k, lam)| {
                let u_dag = f.block(k).adjoint();
                let acc = linalg::hermitian_map(lam, |t| t.clamp(0.0, 1.0));
                let rej = linalg::hermitian_map(lam, |t| {
                    let t = t.clamp(0.0, 1.0);
                    t.sqrt() * (1.0 - t).sqrt()
                });
                let lift = |m: &CMatrix| -> Result<CMatrix> {
                    setting.conjugate(&linalg::embed(m, &dims, &positions), layout, zi, &u_dag)
                };
                Ok([lift(&acc)?, lift(&rej)?])
            })
            .collect::<Result<Vec<_>>>()?;
        g.push(per_k);
    }

    // X_𝐤 = Φ_1^{k_1}(Φ_2^{k_2}(⋯Φ_Z^{k_Z}(I))), innermost stage first
    let mut layer: Vec<CMatrix> = vec![linalg::identity(dim)];
    for zi in (0..z_count).rev() {
        let mut next = Vec::with_capacity(layer.len() * radices[zi]);
        for k in 0..radices[zi] {
            let [a, b] = &g[zi][k];
            for inner in &layer {
                next.push(linalg::hermitize(&(a * inner * a + b * inner * b)));
            }
        }
        layer = next;
    }
    // `layer` is now ordered with sender 1 most significant

    let rho = setting.full().matrix();
    let mut success = 0.0;
    let mut elements = Vec::with_capacity(total);
    for (idx, x) in layer.into_iter().enumerate() {
        success += linalg::trace_product(&x, rho);
        let digits = unflatten(idx, &radices);
        let mut lam = x;
        for (zi, &k) in digits.iter().enumerate() {
            lam = setting.conjugate(&lam, layout, zi, &families[zi].block(k))?;
        }
        elements.push(lam);
    }
    success /= total as f64;
    let povm = Povm::from_parts(elements)?;
    let completeness_residual = povm.completeness_residual();
    if completeness_residual > COMPLETENESS_TOL {
        return Err(Error::Incomplete(completeness_residual));
    }
    Ok(SequentialOutcome {
        povm,
        success,
        stages,
        completeness_residual,
    })
}

/// `ρ_𝐤 = Ũ_𝐤 ρ^{⊗n} Ũ_𝐤†` for every `𝐤`, in [`flat_index`] order.
pub fn encoded_states(setting: &Setting, families: &[UnitaryFamily]) -> Result<Vec<CMatrix>> {
    let radices: Vec<usize> = families.iter().map(|f| f.size()).collect();
    let total: usize = radices.iter().product();
    check_decoder_size(total, setting.dim())?;
    let layout = setting.layout();
    (0..total)
        .map(|idx| {
            let mut m = setting.full().matrix().clone();
            for (zi, &k) in unflatten(idx, &radices).iter().enumerate() {
                m = setting.conjugate(&m, layout, zi, &families[zi].block(k))?;
            }
            Ok(m)
        })
        .collect()
}

/// Pretty-good measurement over all `ρ_𝐤` jointly.
pub fn joint_pgm_decoder(setting: &Setting, families: &[UnitaryFamily]) -> Result<SequentialOutcome> {
    let states = encoded_states(setting, families)?;
    let priors = vec![1.0 / states.len() as f64; states.len()];
    let povm = pgm_decoder(&states, &priors)?;
    let success = povm.success(&states, &priors);
    let completeness_residual = povm.completeness_residual();
    Ok(SequentialOutcome {
        povm,
        success,
        stages: Vec::new(),
        completeness_residual,
    })
}
