use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::protocols::rng::{stream, trial_seed, Purpose};
use crate::protocols::{
    build_code_with_sizes, evaluate_code_detailed, random_effect, random_subnormalized, randomization_chain,
    sample_family, typical_projector, union_bound_check, Budget, CodeDesign, FamilyKind, SenderSizes, Setting,
};
use crate::qstate::{random_density, DensityMatrix, SystemLayout};
use crate::regions::{
    chat_from_state, check_set_function_properties, contrapolymatroid_vertices, dcheck_from_state,
    dhat_from_state, main_region, members, polymatroid_vertices, rate_split, sender_log_dims, separate,
    PropertyKind, PropertyReport, RateTuple, SetFunction, ENTROPIC_TOL,
};

const MAX_LISTED_FAILURES: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub instances: usize,
    pub failed_instances: usize,
    /// Smallest slack observed (negative on failure).
    pub worst_margin: f64,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub master_seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

#[derive(Clone, Copy, Debug)]
pub struct LemmaOptions {
    pub states: usize,
    pub union_trials: usize,
    pub inject_counterexample: bool,
}

impl Default for LemmaOptions {
    fn default() -> Self {
        Self {
            states: 10,
            union_trials: 200,
            inject_counterexample: false,
        }
    }
}

/// Outcome of one instance: the smallest slack and failure messages.
struct Instance {
    margin: f64,
    failures: Vec<String>,
}

impl Instance {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            failures: Vec::new(),
        }
    }

    fn slack(&mut self, what: &str, margin: f64, tol: f64) {
        self.margin = self.margin.min(margin);
        if margin < -tol {
            self.failures.push(format!("{what}: margin {margin:e}"));
        }
    }

    fn require(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn properties(&mut self, what: &str, r: &PropertyReport) {
        for c in &r.checks {
            if let Some(w) = &c.worst {
                self.margin = self.margin.min(w.margin);
            }
            if !c.passed {
                let detail = c
                    .worst
                    .as_ref()
                    .map(|w| format!(" at {:?} (margin {:e})", w.subsets, w.margin))
                    .unwrap_or_default();
                self.failures.push(format!("{what}: {} failed{detail}", c.name));
            }
        }
    }

    fn from_result(r: Result<Instance>) -> Instance {
        r.unwrap_or_else(|e| Instance {
            margin: f64::NEG_INFINITY,
            failures: vec![e.to_string()],
        })
    }
}

fn suite(name: &str, instances: Vec<Instance>) -> SuiteResult {
    let failed: Vec<&Instance> = instances.iter().filter(|i| !i.failures.is_empty()).collect();
    let worst = instances.iter().map(|i| i.margin).fold(f64::INFINITY, f64::min);
    SuiteResult {
        name: name.to_string(),
        passed: failed.is_empty(),
        instances: instances.len(),
        failed_instances: failed.len(),
        worst_margin: if worst.is_finite() { worst } else { 0.0 },
        failures: failed
            .iter()
            .flat_map(|i| i.failures.iter().cloned())
            .take(MAX_LISTED_FAILURES)
            .collect(),
    }
}

fn qubit_state(labels: &[&str], seed: u64, index: usize) -> Result<DensityMatrix> {
    let layout = SystemLayout::new(labels.iter().map(|l| (*l, 2)))?;
    let d = layout.dim();
    let s = trial_seed(seed, index as u64);
    let rank = 1 + (s % d as u64) as usize;
    random_density(layout, rank, s)
}

fn run(count: usize, seed: u64, f: impl Fn(u64, usize) -> Result<Instance> + Sync) -> Vec<Instance> {
    (0..count)
        .into_par_iter()
        .map(|i| Instance::from_result(f(seed, i)))
        .collect()
}

const SENDERS3: [&str; 3] = ["A1", "A2", "A3"];

fn polymatroid(seed: u64, i: usize) -> Result<Instance> {
    let rho = qubit_state(&["A1", "A2", "A3", "R"], seed ^ 0x11, i)?;
    let mut inst = Instance::new();
    let chat = chat_from_state(&rho, &SENDERS3, &["R"])?;
    let dhat = dhat_from_state(&rho, &SENDERS3, &["R"])?;
    let dcheck = dcheck_from_state(&rho, &SENDERS3, &["R"])?;
    inst.properties("chat", &check_set_function_properties(&chat, PropertyKind::SubadditiveMonotone));
    inst.properties("dcheck", &check_set_function_properties(&dcheck, PropertyKind::SubadditiveMonotone));
    inst.properties("dhat", &check_set_function_properties(&dhat, PropertyKind::Superadditive));
    Ok(inst)
}

fn region_identity(seed: u64, i: usize) -> Result<Instance> {
    let rho = qubit_state(&["A1", "A2", "B", "E"], seed ^ 0x22, i)?;
    let mut inst = Instance::new();
    let r = main_region(&rho, &["A1", "A2"], &["B"], &["E"])?;
    inst.slack("I − (Ĉ − D̂)", -r.max_residual, ENTROPIC_TOL);
    Ok(inst)
}

fn vertex_checks(inst: &mut Instance, what: &str, f: &SetFunction, vertices: &[RateTuple], upper: bool) {
    let full = f.full_mask();
    for v in vertices {
        let mut tight = 0;
        for m in 1..=full {
            let s = v.subset_sum(m);
            let margin = if upper { f.get(m) - s } else { s - f.get(m) };
            inst.slack(&format!("{what} vertex {:?} on {:?}", v.0, members(m)), margin, ENTROPIC_TOL);
            if margin.abs() <= ENTROPIC_TOL {
                tight += 1;
            }
        }
        let total = (v.subset_sum(full) - f.get(full)).abs();
        inst.require(&format!("{what} vertex misses the full-set equality by {total:e}"), total <= ENTROPIC_TOL);
        inst.require(
            &format!("{what} vertex {:?} has only {tight} tight constraints", v.0),
            tight >= f.z_count(),
        );
    }
}

fn greedy_vertices(seed: u64, i: usize) -> Result<Instance> {
    let rho = qubit_state(&["A1", "A2", "A3", "R"], seed ^ 0x33, i)?;
    let mut inst = Instance::new();
    let chat = chat_from_state(&rho, &SENDERS3, &["R"])?;
    let dhat = dhat_from_state(&rho, &SENDERS3, &["R"])?;
    let logs = sender_log_dims(&rho, &SENDERS3)?;
    vertex_checks(&mut inst, "chat", &chat, &polymatroid_vertices(&chat)?, true);
    vertex_checks(&mut inst, "dhat", &dhat, &contrapolymatroid_vertices(&dhat, Some(&logs))?, false);
    Ok(inst)
}

fn strict_separation(seed: u64, i: usize) -> Result<Instance> {
    let rho = qubit_state(&["A1", "A2", "A3", "B", "E"], seed ^ 0x66, i)?;
    let mut inst = Instance::new();
    let chat = chat_from_state(&rho, &SENDERS3, &["B", "E"])?;
    let dhat = dhat_from_state(&rho, &SENDERS3, &["E"])?;
    let r = separate(&chat, &dhat, true)?;
    for m in 1..=chat.full_mask() {
        let s = r.subset_sum(m);
        inst.slack("upper", chat.get(m) - s, 0.0);
        inst.slack("lower", s - dhat.get(m), 0.0);
        inst.require("strict upper", chat.get(m) - s > 0.0);
        inst.require("strict lower", s - dhat.get(m) > 0.0);
    }
    Ok(inst)
}

fn rate_split_suite(seed: u64, i: usize) -> Result<Instance> {
    let rho = qubit_state(&["A1", "A2", "B", "E"], seed ^ 0x55, i)?;
    let mut inst = Instance::new();
    let senders = ["A1", "A2"];
    let chat = chat_from_state(&rho, &senders, &["B", "E"])?;
    let dhat = dhat_from_state(&rho, &senders, &["E"])?;
    let gap = chat.sub(&dhat)?;
    let min_gap = (1..=gap.full_mask()).map(|m| gap.get(m)).fold(f64::INFINITY, f64::min);
    let r = RateTuple(vec![min_gap / 4.0; 2]);
    let (c, d) = rate_split(&r, &chat, &dhat)?;
    for m in 1..=chat.full_mask() {
        inst.slack("C below Ĉ", chat.get(m) - c.subset_sum(m), 0.0);
        inst.slack("D above D̂", d.subset_sum(m) - dhat.get(m), 0.0);
        inst.require("strict C", chat.get(m) - c.subset_sum(m) > 0.0);
        inst.require("strict D", d.subset_sum(m) - dhat.get(m) > 0.0);
    }
    for z in 0..2 {
        inst.require("c_z = d_z + r_z", c.0[z] == d.0[z] + r.0[z]);
    }
    Ok(inst)
}

fn union_bound(seed: u64, i: usize) -> Result<Instance> {
    let mut rng = stream(seed, Purpose::Auxiliary, &[7, i as u64]);
    let rho = random_subnormalized(8, &mut rng)?;
    let lambdas: Vec<_> = (0..3).map(|_| random_effect(8, &mut rng)).collect();
    let out = union_bound_check(&lambdas, &rho)?;
    let mut inst = Instance::new();
    inst.slack("rhs − lhs", out.rhs - out.lhs, 1e-9);
    inst.require(
        &format!("Λ̂ and Π̂ chain differ by {:e}", (out.lambda_hat_value - out.pi_chain_value).abs()),
        out.agrees,
    );
    Ok(inst)
}

fn typical(seed: u64, i: usize) -> Result<Instance> {
    let rho = qubit_state(&["Q"], seed ^ 0x77, i)?;
    let t = typical_projector(&rho, 8, 0.2, Budget::default())?;
    let d = &t.diagnostics;
    let mut inst = Instance::new();
    inst.slack("rank bound", d.rank_bound - d.rank as f64, 1e-9);
    inst.slack("operator bound", d.operator_bound - d.max_typical_eigenvalue, 1e-12);
    inst.require("mass", d.mass_ok);
    Ok(inst)
}

fn chain(seed: u64, i: usize) -> Result<Instance> {
    let rho = qubit_state(&["A1", "A2", "W"], seed ^ 0x88, i)?;
    let setting = Setting::new(&rho, &["A1", "A2"], 1, Budget::default())?;
    let fams = (0..2)
        .map(|z| sample_family(z + 1, 1, 2, 2, FamilyKind::Haar, seed, i as u64))
        .collect::<Result<Vec<_>>>()?;
    let out = randomization_chain(&setting, &fams)?;
    let mut inst = Instance::new();
    inst.slack("stage sum − total", out.stage_distances.iter().sum::<f64>() - out.total, 1e-9);
    Ok(inst)
}

fn code(seed: u64, i: usize) -> Result<Instance> {
    let rho = qubit_state(&["A1", "A2", "B", "E"], seed ^ 0x99, i)?;
    let sizes = [
        SenderSizes { messages: 2, randomizing: 2 },
        SenderSizes { messages: 2, randomizing: 1 },
    ];
    let design = CodeDesign {
        trial: i as u64,
        ..CodeDesign::haar(seed)
    };
    let code = build_code_with_sizes(&rho, &["A1", "A2"], 1, &sizes, design)?;
    let ev = evaluate_code_detailed(&code, &rho, &["E"], 64)?;
    let mut inst = Instance::new();
    inst.slack("completeness", 1e-8 - code.decoder.completeness_residual(), 0.0);
    inst.slack("coarse − fine success", ev.coarse_success - ev.fine_success, 1e-9);
    inst.slack("leakage bound − ϑ", ev.leakage_bound - ev.theta, 1e-9);
    Ok(inst)
}

/// Runs every suite. Deterministic in `seed` and `options`.
pub fn verify_lemmas(seed: u64, options: LemmaOptions) -> LemmaReport {
    let s = options.states;
    let mut polymatroid_instances = run(s, seed, polymatroid);
    if options.inject_counterexample {
        let mut inst = Instance::new();
        let table = SetFunction::from_table(2, vec![0.0, 1.0, 1.0, 3.0]).expect("valid table");
        inst.properties(
            "injected",
            &check_set_function_properties(&table, PropertyKind::SubadditiveMonotone),
        );
        polymatroid_instances.push(inst);
    }
    let suites = vec![
        suite("polymatroid", polymatroid_instances),
        suite("region-identity", run(s, seed, region_identity)),
        suite("greedy-vertices", run(s, seed, greedy_vertices)),
        suite("rate-split", run(s, seed, rate_split_suite)),
        suite("strict-separation", run(s, seed, strict_separation)),
        suite("union-bound", run(options.union_trials, seed, union_bound)),
        suite("typical-projector", run(s, seed, typical)),
        suite("randomization-chain", run(s, seed, chain)),
        suite("code-invariants", run(s, seed, code)),
    ];
    LemmaReport {
        master_seed: seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> LemmaOptions {
        LemmaOptions {
            states: 3,
            union_trials: 10,
            inject_counterexample: false,
        }
    }

    #[test]
    fn default_suites_pass() {
        let r = verify_lemmas(1, small());
        for s in &r.suites {
            assert!(s.passed, "{s:?}");
        }
    }

    #[test]
    fn injected_counterexample_fails_polymatroid_only() {
        let r = verify_lemmas(1, LemmaOptions {
            inject_counterexample: true,
            ..small()
        });
        assert!(!r.passed);
        let failing: Vec<_> = r.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect();
        assert_eq!(failing, ["polymatroid"]);
    }

    #[test]
    fn reruns_are_identical() {
        let a = serde_json::to_string(&verify_lemmas(5, small())).unwrap();
        let b = serde_json::to_string(&verify_lemmas(5, small())).unwrap();
        assert_eq!(a, b);
    }
}
