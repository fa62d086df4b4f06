use rayon::prelude::*;

use super::code::{
    build_code_with_sizes, describe_code, evaluate_code_detailed, record_evaluation, CodeDesign,
    CodeEvaluation, DecoderKind, SenderSizes, DEFAULT_MESSAGE_SAMPLES,
};
use super::family::{sample_family, FamilyKind, UnitaryFamily};
use super::randomize::{randomization_chain, randomize_in, ChainOutcome};
use super::report::SimulationReport;
use super::sequential::{joint_pgm_decoder, sequential_decoder};
use super::setting::{Budget, Setting};
use crate::error::{Error, Result};
use crate::qstate::DensityMatrix;

/// Inputs shared by every multi-trial experiment. Trial `t` draws its
/// families from the streams `(master_seed, t, z, k, i)`.
#[derive(Clone, Debug)]
pub struct Experiment<'a> {
    pub rho: &'a DensityMatrix,
    pub senders: Vec<String>,
    pub n: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub family: FamilyKind,
    pub budget: Budget,
}

impl Experiment<'_> {
    fn setting(&self) -> Result<Setting> {
        if self.trials == 0 {
            return Err(Error::validation("trials", "must be at least 1"));
        }
        Setting::new(self.rho, &self.senders, self.n, self.budget)
    }

    fn families(&self, setting: &Setting, sizes: &[usize], trial: u64) -> Result<Vec<UnitaryFamily>> {
        if sizes.len() != setting.z_count() {
            return Err(Error::DimensionMismatch {
                expected: setting.z_count(),
                found: sizes.len(),
            });
        }
        sizes
            .iter()
            .enumerate()
            .map(|(zi, &k)| {
                sample_family(zi + 1, self.n, k, setting.sender_dim(zi), self.family, self.master_seed, trial)
            })
            .collect()
    }

    fn report(&self, kind: &str) -> SimulationReport {
        let mut r = SimulationReport::new(kind, self.master_seed);
        r.parameter("n", self.n);
        r.parameter("senders", &self.senders);
        r.parameter("family", self.family);
        r.parameter("trials", self.trials);
        if self.family == FamilyKind::Pauli {
            r.flag("deterministic-family-extension");
        }
        r
    }

    fn run<T: Send>(&self, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
        (0..self.trials as u64).into_par_iter().map(&f).collect()
    }
}

/// Distance `‖ρ̄ − π ⊗ ρ^W‖₁` per trial with `L_z = l_sizes[z]`.
pub fn randomization_experiment(exp: &Experiment, l_sizes: &[usize]) -> Result<SimulationReport> {
    let setting = exp.setting()?;
    let dists = exp.run(|t| {
        let fams = exp.families(&setting, l_sizes, t)?;
        randomize_in(&setting, &fams).map(|(_, d)| d)
    })?;
    let mut r = exp.report("randomization");
    r.parameter("l_sizes", l_sizes);
    for d in dists {
        r.push_sample("distance", d);
    }
    r.finalize();
    Ok(r)
}

/// Sender-by-sender randomization with `L_z = 2^{⌈n D_z⌉}`.
pub fn chained_randomization_experiment(exp: &Experiment, d_rates: &[f64]) -> Result<SimulationReport> {
    let setting = exp.setting()?;
    let l_sizes: Vec<usize> = d_rates
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if !d.is_finite() || d < 0.0 || exp.n as f64 * d > 30.0 {
                return Err(Error::validation(format!("d_rates[{i}]"), format!("unusable rate {d}")));
            }
            Ok(1usize << (exp.n as f64 * d - 1e-9).ceil().max(0.0) as u32)
        })
        .collect::<Result<_>>()?;
    let outcomes: Vec<ChainOutcome> = exp.run(|t| {
        let fams = exp.families(&setting, &l_sizes, t)?;
        randomization_chain(&setting, &fams)
    })?;
    let mut r = exp.report("chained-randomization");
    r.parameter("d_rates", d_rates);
    r.parameter("l_sizes", &l_sizes);
    for (t, o) in outcomes.iter().enumerate() {
        r.push_sample("distance_total", o.total);
        r.push_sample("distance_stage_sum", o.stage_distances.iter().sum());
        for (z, d) in o.stage_distances.iter().enumerate() {
            r.push_sample(&format!("distance_stage_{}", z + 1), *d);
        }
        if !o.chain_holds {
            r.violation(format!(
                "trial {t}: total {} exceeds stage sum {}",
                o.total,
                o.stage_distances.iter().sum::<f64>()
            ));
        }
    }
    r.finalize();
    Ok(r)
}

/// Average decoding success of `{U_𝐤 ρ^{⊗n} U_𝐤†}` with `K_z = k_sizes[z]`.
pub fn encoding_experiment(exp: &Experiment, k_sizes: &[usize], decoder: DecoderKind) -> Result<SimulationReport> {
    let setting = exp.setting()?;
    let outs = exp.run(|t| {
        let fams = exp.families(&setting, k_sizes, t)?;
        let o = match decoder {
            DecoderKind::Sequential => sequential_decoder(&setting, &fams)?,
            DecoderKind::JointPgm => joint_pgm_decoder(&setting, &fams)?,
        };
        Ok((o.success, o.completeness_residual))
    })?;
    let mut r = exp.report("encoding");
    r.parameter("k_sizes", k_sizes);
    r.parameter("decoder", decoder);
    for (s, res) in outs {
        r.push_sample("success", s);
        r.push_sample("completeness_residual", res);
    }
    r.finalize();
    Ok(r)
}

/// Builds and evaluates one code per trial.
pub fn code_experiment(
    exp: &Experiment,
    e_labels: &[String],
    sizes: &[SenderSizes],
    decoder: DecoderKind,
) -> Result<SimulationReport> {
    exp.setting()?;
    let evals: Vec<(CodeEvaluation, Option<super::code::CodeSpec>)> = exp.run(|t| {
        let design = CodeDesign {
            family: exp.family,
            decoder,
            master_seed: exp.master_seed,
            trial: t,
            budget: exp.budget,
        };
        let code = build_code_with_sizes(exp.rho, &exp.senders, exp.n, sizes, design)?;
        let ev = evaluate_code_detailed(&code, exp.rho, e_labels, DEFAULT_MESSAGE_SAMPLES)?;
        Ok((ev, (t == 0).then_some(code)))
    })?;
    let mut r = exp.report("code");
    if let Some(code) = evals.first().and_then(|(_, c)| c.as_ref()) {
        describe_code(&mut r, code);
    }
    r.parameter("trials", exp.trials);
    r.parameter("e_labels", e_labels);
    for (t, (ev, _)) in evals.iter().enumerate() {
        let mut ev = ev.clone();
        ev.violations = ev.violations.iter().map(|v| format!("trial {t}: {v}")).collect();
        record_evaluation(&mut r, &ev);
    }
    r.finalize();
    Ok(r)
}
