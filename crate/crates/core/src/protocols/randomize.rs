use serde::Serialize;

use super::family::UnitaryFamily;
use super::setting::{Budget, Setting};
use crate::error::{Error, Result};
use crate::qstate::linalg::CMatrix;
use crate::qstate::{partial_trace, tensor, trace_norm, DensityMatrix, SystemLayout};

/// `π^{A^n} ⊗ (ρ^W)^{⊗n}` in the layout of `state`, where the `A` factors
/// are `a_labels` and everything else is `W`.
pub(crate) fn decoupled_target(state: &DensityMatrix, a_labels: &[String]) -> Result<DensityMatrix> {
    let layout = state.layout();
    let w: Vec<&str> = layout
        .labels()
        .filter(|l| !a_labels.iter().any(|a| a == l))
        .collect();
    let w_state = partial_trace(state, &w)?;
    let a_pos = layout.positions(a_labels)?;
    let a_layout = layout.select(&a_pos);
    let pi = DensityMatrix::maximally_mixed(a_layout);
    let joined = tensor(&pi, &w_state)?;
    let order: Vec<&str> = layout.labels().collect();
    joined.reorder(&order)
}

/// Applies `⊗_z 𝓡_z` with `𝓡_z(X) = (1/L_z) Σ_l U_{z,l} X U_{z,l}†` to
/// `ρ^{⊗n}` and returns the result together with the full trace norm
/// `‖ρ̄ − π^{A^n} ⊗ (ρ^W)^{⊗n}‖₁`.
///
/// `families[z]` belongs to `senders[z]` and has `L_z` members.
pub fn randomize<S: AsRef<str>>(
    rho: &DensityMatrix,
    senders: &[S],
    n: usize,
    families: &[UnitaryFamily],
    budget: Budget,
) -> Result<(DensityMatrix, f64)> {
    let setting = Setting::new(rho, senders, n, budget)?;
    randomize_in(&setting, families)
}

pub(crate) fn randomize_in(setting: &Setting, families: &[UnitaryFamily]) -> Result<(DensityMatrix, f64)> {
    if families.len() != setting.z_count() {
        return Err(Error::DimensionMismatch {
            expected: setting.z_count(),
            found: families.len(),
        });
    }
    let layout = setting.layout();
    let mut m = setting.full().matrix().clone();
    for (zi, f) in families.iter().enumerate() {
        setting.check_family(zi, f)?;
        m = setting.mix(&m, layout, zi, f, 0..f.size())?;
    }
    let bar = DensityMatrix::from_parts(m, layout.clone(), false);
    let a: Vec<String> = (0..setting.z_count()).flat_map(|z| setting.sender_copies(z)).collect();
    let target = decoupled_target(setting.full(), &a)?;
    let distance = trace_norm(&(bar.matrix() - target.matrix()))?;
    Ok((bar, distance))
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainOutcome {
    /// `‖𝓡_z((ρ^{A_{≥z} W})^{⊗n}) − π^{A_z} ⊗ (ρ^{A_{>z} W})^{⊗n}‖₁` per stage.
    pub stage_distances: Vec<f64>,
    /// Distance of the full randomization.
    pub total: f64,
    /// `total ≤ Σ stage + 1e-9`.
    pub chain_holds: bool,
}

/// Randomizes sender by sender: stage `z` acts on the marginal with
/// `A_{<z}` already traced out.
pub fn randomization_chain(setting: &Setting, families: &[UnitaryFamily]) -> Result<ChainOutcome> {
    let (_, total) = randomize_in(setting, families)?;
    let mut stage_distances = Vec::with_capacity(families.len());
    for (zi, f) in families.iter().enumerate() {
        let keep_single: Vec<String> = setting.senders()[zi..]
            .iter()
            .chain(setting.others())
            .cloned()
            .collect();
        let keep = setting.copies_of(&keep_single);
        let marginal = partial_trace(setting.full(), &keep)?;
        let layout: &SystemLayout = marginal.layout();
        let mixed: CMatrix = setting.mix(marginal.matrix(), layout, zi, f, 0..f.size())?;
        let target = decoupled_target(&marginal, &setting.sender_copies(zi))?;
        stage_distances.push(trace_norm(&(mixed - target.matrix()))?);
    }
    let sum: f64 = stage_distances.iter().sum();
    Ok(ChainOutcome {
        chain_holds: total <= sum + 1e-9,
        stage_distances,
        total,
    })
}
