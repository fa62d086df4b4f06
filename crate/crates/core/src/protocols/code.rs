use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::{sample_family, FamilyKind, UnitaryFamily};
use super::povm::Povm;
use super::randomize::decoupled_target;
use super::report::SimulationReport;
use super::rng::{stream, Purpose};
use super::sequential::{flat_index, joint_pgm_decoder, sequential_decoder, unflatten};
use super::setting::{Budget, Setting};
use crate::error::{Error, Result};
use crate::qstate::linalg::CMatrix;
use crate::qstate::{partial_trace, trace_norm, DensityMatrix};
use crate::regions::RateTuple;

/// Enumerate every message tuple up to this many.
pub const EXACT_MESSAGE_LIMIT: usize = 4096;
pub const DEFAULT_MESSAGE_SAMPLES: usize = 512;
const SPLIT_TOL: f64 = 1e-9;
const CEIL_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    /// Successive pretty-good measurements.
    #[default]
    Sequential,
    /// One pretty-good measurement over all `𝐤`.
    JointPgm,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CodeDesign {
    pub family: FamilyKind,
    pub decoder: DecoderKind,
    pub master_seed: u64,
    pub trial: u64,
    pub budget: Budget,
}

impl CodeDesign {
    pub fn haar(master_seed: u64) -> Self {
        Self {
            family: FamilyKind::Haar,
            decoder: DecoderKind::Sequential,
            master_seed,
            trial: 0,
            budget: Budget::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenderSizes {
    /// `M_z`
    pub messages: usize,
    /// `L_z`
    pub randomizing: usize,
}

impl SenderSizes {
    /// `K_z = L_z · M_z`.
    pub fn family_size(&self) -> usize {
        self.messages * self.randomizing
    }
}

fn pow2_ceil(n: usize, rate: f64, what: &str, z: usize) -> Result<usize> {
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::validation(
            format!("{what}[{}]", z - 1),
            format!("rate must be finite and nonnegative, got {rate}"),
        ));
    }
    let bits = (n as f64 * rate - CEIL_SLACK).ceil().max(0.0);
    if bits > 30.0 {
        return Err(Error::TooLarge(format!("{what} for sender {z} needs 2^{bits} elements")));
    }
    Ok(1usize << bits as u32)
}

/// `M_z = 2^{⌈nR_z⌉}`, `L_z = 2^{⌈nD_z⌉}` after checking `C_z = D_z + R_z`.
pub fn sizes_from_rates(n: usize, r: &RateTuple, c: &RateTuple, d: &RateTuple) -> Result<Vec<SenderSizes>> {
    if c.len() != r.len() || d.len() != r.len() {
        return Err(Error::DimensionMismatch {
            expected: r.len(),
            found: if c.len() != r.len() { c.len() } else { d.len() },
        });
    }
    (0..r.len())
        .map(|i| {
            let residual = c.0[i] - d.0[i] - r.0[i];
            if residual.abs() > SPLIT_TOL {
                return Err(Error::InconsistentSplit {
                    sender: i + 1,
                    residual,
                });
            }
            Ok(SenderSizes {
                messages: pow2_ceil(n, r.0[i], "rates", i + 1)?,
                randomizing: pow2_ceil(n, d.0[i], "splits.d", i + 1)?,
            })
        })
        .collect()
}

/// A realized `(n, M_1, …, M_Z)` code: encodings
/// `𝓔_{z,m}(X) = (1/L_z) Σ_{l<L_z} U_{z,mL_z+l} X U_{z,mL_z+l}†` and the
/// coarse-grained decoder `Λ_𝐦 = Σ_{𝐥} Λ_{𝐦𝐋+𝐥}`.
#[derive(Clone, Debug)]
pub struct CodeSpec {
    pub n: usize,
    pub senders: Vec<String>,
    pub sizes: Vec<SenderSizes>,
    pub families: Vec<UnitaryFamily>,
    /// Indexed by message tuple, sender 1 most significant.
    pub decoder: Povm,
    /// `(1/|𝐊|) Σ Tr[ρ_𝐤 Λ_𝐤]` of the fine decoder.
    pub fine_success: f64,
    pub design: CodeDesign,
}

impl CodeSpec {
    pub fn z_count(&self) -> usize {
        self.senders.len()
    }

    pub fn message_radices(&self) -> Vec<usize> {
        self.sizes.iter().map(|s| s.messages).collect()
    }

    pub fn message_count(&self) -> usize {
        self.message_radices().iter().product()
    }
}

/// Builds a code from rates and a split `C = D + R`.
pub fn build_qmap_code<S: AsRef<str>>(
    rho: &DensityMatrix,
    senders: &[S],
    n: usize,
    rates: &RateTuple,
    c: &RateTuple,
    d: &RateTuple,
    design: CodeDesign,
) -> Result<CodeSpec> {
    if rates.len() != senders.len() {
        return Err(Error::DimensionMismatch {
            expected: senders.len(),
            found: rates.len(),
        });
    }
    let sizes = sizes_from_rates(n, rates, c, d)?;
    build_code_with_sizes(rho, senders, n, &sizes, design)
}

/// Builds a code with explicit `M_z`, `L_z`.
pub fn build_code_with_sizes<S: AsRef<str>>(
    rho: &DensityMatrix,
    senders: &[S],
    n: usize,
    sizes: &[SenderSizes],
    design: CodeDesign,
) -> Result<CodeSpec> {
    let setting = Setting::new(rho, senders, n, design.budget)?;
    if sizes.len() != setting.z_count() {
        return Err(Error::DimensionMismatch {
            expected: setting.z_count(),
            found: sizes.len(),
        });
    }
    if let Some(i) = sizes.iter().position(|s| s.messages == 0 || s.randomizing == 0) {
        return Err(Error::validation(format!("sizes[{i}]"), "M and L must be positive"));
    }
    let families: Vec<UnitaryFamily> = sizes
        .iter()
        .enumerate()
        .map(|(zi, s)| {
            sample_family(
                zi + 1,
                n,
                s.family_size(),
                setting.sender_dim(zi),
                design.family,
                design.master_seed,
                design.trial,
            )
        })
        .collect::<Result<_>>()?;
    let fine = match design.decoder {
        DecoderKind::Sequential => sequential_decoder(&setting, &families)?,
        DecoderKind::JointPgm => joint_pgm_decoder(&setting, &families)?,
    };
    let k_radices: Vec<usize> = sizes.iter().map(|s| s.family_size()).collect();
    let m_radices: Vec<usize> = sizes.iter().map(|s| s.messages).collect();
    let m_total: usize = m_radices.iter().product();
    let k_total: usize = k_radices.iter().product();
    let mut groups = vec![Vec::new(); m_total];
    for k in 0..k_total {
        let digits = unflatten(k, &k_radices);
        let m: Vec<usize> = digits.iter().zip(sizes).map(|(k, s)| k / s.randomizing).collect();
        groups[flat_index(&m, &m_radices)].push(k);
    }
    let decoder = fine.povm.coarse_grain(&groups)?;
    let residual = decoder.completeness_residual();
    if residual > super::povm::COMPLETENESS_TOL {
        return Err(Error::Incomplete(residual));
    }
    Ok(CodeSpec {
        n,
        senders: setting.senders().to_vec(),
        sizes: sizes.to_vec(),
        families,
        decoder,
        fine_success: fine.success,
        design,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CodeEvaluation {
    /// `ε(𝔠) = 1 − (1/|𝐌|) Σ Tr[ρ_𝐦 Λ_𝐦]`.
    pub epsilon: f64,
    /// `ϑ(𝔠) = (1/|𝐌|) Σ ‖ρ_𝐦^{A'E} − ρ̄^{A'E}‖₁`.
    pub theta: f64,
    /// `2 (1/|𝐌|) Σ ‖ρ_𝐦^{A'E} − π ⊗ ρ̄^E‖₁`.
    pub leakage_bound: f64,
    pub fine_success: f64,
    pub coarse_success: f64,
    pub exact: bool,
    pub evaluated_messages: usize,
    /// Present when messages were sampled.
    pub epsilon_stderr: Option<f64>,
    pub theta_stderr: Option<f64>,
    pub violations: Vec<String>,
}

struct MessageTerms {
    success: f64,
    theta: f64,
    decoupling: f64,
}

/// Exact enumeration for `|𝐌| ≤ 4096`, otherwise `samples` uniformly drawn
/// message tuples.
pub fn evaluate_code_detailed<S: AsRef<str>>(
    code: &CodeSpec,
    rho: &DensityMatrix,
    e_labels: &[S],
    samples: usize,
) -> Result<CodeEvaluation> {
    let setting = Setting::new(rho, &code.senders, code.n, code.design.budget)?;
    if setting.dim() != code.decoder.dim() {
        return Err(Error::DimensionMismatch {
            expected: code.decoder.dim(),
            found: setting.dim(),
        });
    }
    for (i, e) in e_labels.iter().enumerate() {
        let e = e.as_ref();
        if !setting.others().iter().any(|o| o == e) {
            return Err(Error::validation(
                format!("e_labels[{i}]"),
                format!("`{e}` is not a non-sender factor"),
            ));
        }
    }
    let layout = setting.layout();
    let mut ae_single: Vec<String> = code.senders.clone();
    ae_single.extend(e_labels.iter().map(|e| e.as_ref().to_string()));
    let ae = setting.copies_of(&ae_single);
    let a: Vec<String> = (0..code.z_count()).flat_map(|z| setting.sender_copies(z)).collect();

    let mut bar = setting.full().matrix().clone();
    for (zi, f) in code.families.iter().enumerate() {
        bar = setting.mix(&bar, layout, zi, f, 0..f.size())?;
    }
    let bar_ae = partial_trace(&DensityMatrix::from_parts(bar, layout.clone(), false), &ae)?;
    let target = decoupled_target(&bar_ae, &a)?;

    let radices = code.message_radices();
    let total = code.message_count();
    let exact = total <= EXACT_MESSAGE_LIMIT;
    let messages: Vec<usize> = if exact {
        (0..total).collect()
    } else {
        let mut rng = stream(code.design.master_seed, Purpose::MessageSample, &[code.design.trial]);
        (0..samples.max(2)).map(|_| rng.random_range(0..total)).collect()
    };

    let terms: Vec<MessageTerms> = messages
        .par_iter()
        .map(|&idx| {
            let m = unflatten(idx, &radices);
            let mut state: CMatrix = setting.full().matrix().clone();
            for (zi, (&mz, f)) in m.iter().zip(&code.families).enumerate() {
                let l = code.sizes[zi].randomizing;
                state = setting.mix(&state, layout, zi, f, mz * l..(mz + 1) * l)?;
            }
            let success = code.decoder.probability(idx, &state);
            let marg = partial_trace(&DensityMatrix::from_parts(state, layout.clone(), false), &ae)?;
            Ok(MessageTerms {
                success,
                theta: trace_norm(&(marg.matrix() - bar_ae.matrix()))?,
                decoupling: trace_norm(&(marg.matrix() - target.matrix()))?,
            })
        })
        .collect::<Result<_>>()?;

    let count = terms.len() as f64;
    let mean = |f: &dyn Fn(&MessageTerms) -> f64| terms.iter().map(f).sum::<f64>() / count;
    let stderr = |f: &dyn Fn(&MessageTerms) -> f64| {
        let mu = mean(f);
        let var = terms.iter().map(|t| (f(t) - mu).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    };
    let coarse_success = mean(&|t| t.success);
    let theta = mean(&|t| t.theta);
    let leakage_bound = 2.0 * mean(&|t| t.decoupling);

    let mut violations = Vec::new();
    if exact && coarse_success < code.fine_success - 1e-9 {
        violations.push(format!(
            "coarse-grained success {coarse_success} below fine success {}",
            code.fine_success
        ));
    }
    if exact && theta > leakage_bound + 1e-9 {
        violations.push(format!("leakage {theta} exceeds bound {leakage_bound}"));
    }
    Ok(CodeEvaluation {
        epsilon: 1.0 - coarse_success,
        theta,
        leakage_bound,
        fine_success: code.fine_success,
        coarse_success,
        exact,
        evaluated_messages: terms.len(),
        epsilon_stderr: (!exact).then(|| stderr(&|t| t.success)),
        theta_stderr: (!exact).then(|| stderr(&|t| t.theta)),
        violations,
    })
}

/// Single-trial report of [`evaluate_code_detailed`].
pub fn evaluate_code<S: AsRef<str>>(code: &CodeSpec, rho: &DensityMatrix, e_labels: &[S]) -> Result<SimulationReport> {
    let ev = evaluate_code_detailed(code, rho, e_labels, DEFAULT_MESSAGE_SAMPLES)?;
    let mut report = SimulationReport::new("code", code.design.master_seed);
    describe_code(&mut report, code);
    record_evaluation(&mut report, &ev);
    report.finalize();
    if let Some(se) = ev.epsilon_stderr {
        report.standard_errors.insert("epsilon".into(), se);
    }
    if let Some(se) = ev.theta_stderr {
        report.standard_errors.insert("theta".into(), se);
    }
    Ok(report)
}

pub(crate) fn describe_code(report: &mut SimulationReport, code: &CodeSpec) {
    report.parameter("n", code.n);
    report.parameter("senders", &code.senders);
    report.parameter("sizes", &code.sizes);
    report.parameter("family", code.design.family);
    report.parameter("decoder", code.design.decoder);
    if code.design.family == FamilyKind::Pauli {
        report.flag("deterministic-family-extension");
    }
}

pub(crate) fn record_evaluation(report: &mut SimulationReport, ev: &CodeEvaluation) {
    report.push_sample("epsilon", ev.epsilon);
    report.push_sample("theta", ev.theta);
    report.push_sample("leakage_bound", ev.leakage_bound);
    report.push_sample("fine_success", ev.fine_success);
    report.push_sample("coarse_success", ev.coarse_success);
    report.flag(if ev.exact { "exact-enumeration" } else { "sampled-messages" });
    for v in &ev.violations {
        report.violation(v.clone());
    }
}
