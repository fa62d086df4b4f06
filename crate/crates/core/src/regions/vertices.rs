use super::properties::{check_set_function_properties, PropertyKind, PropertyReport};
use super::region::RateTuple;
use super::set_function::{dcheck_from_dhat, Mask, SetFunction};
use crate::error::{Error, Result};

/// Permutation enumeration is factorial in Z.
pub const MAX_VERTEX_SENDERS: usize = 9;

const DEDUP_TOL: f64 = 1e-12;

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn failure_message(report: &PropertyReport) -> String {
    report
        .failures()
        .map(|c| match &c.worst {
            Some(w) => format!("{} (subsets {:?}, margin {:e})", c.name, w.subsets, w.margin),
            None => c.name.to_string(),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Greedy vertices along every ordering σ of the senders:
/// `x_{σ(z)} = f(σ(1..z)) − f(σ(1..z−1))`. Duplicates are dropped.
fn greedy_vertices(f: &SetFunction) -> Result<Vec<RateTuple>> {
    let z = f.z_count();
    if z > MAX_VERTEX_SENDERS {
        return Err(Error::TooLarge(format!(
            "vertex enumeration supports Z <= {MAX_VERTEX_SENDERS}, got {z}"
        )));
    }
    let mut perm: Vec<usize> = (0..z).collect();
    let mut out: Vec<RateTuple> = Vec::new();
    loop {
        let mut x = vec![0.0; z];
        let mut prefix: Mask = 0;
        for &s in &perm {
            let next = prefix | 1 << s;
            x[s] = f.get(next) - f.get(prefix);
            prefix = next;
        }
        let dup = out.iter().any(|v| {
            v.0.iter()
                .zip(&x)
                .all(|(a, b)| (a - b).abs() <= DEDUP_TOL)
        });
        if !dup {
            out.push(RateTuple(x));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

/// Extreme points of `{x : Σ_{z∈Γ} x_z ≤ f(Γ)}` for a normalized,
/// nondecreasing, submodular `f`.
pub fn polymatroid_vertices(f: &SetFunction) -> Result<Vec<RateTuple>> {
    let report = check_set_function_properties(f, PropertyKind::SubadditiveMonotone);
    if !report.passed {
        return Err(Error::PropertyCheck(failure_message(&report)));
    }
    greedy_vertices(f)
}

/// Extreme points of `{x : Σ_{z∈Γ} x_z ≥ d(Γ)}` for a supermodular `d`.
/// With `log_dims`, also requires `2 Σ log d_{A_z} − d` to pass the
/// polymatroid checks.
pub fn contrapolymatroid_vertices(
    d: &SetFunction,
    log_dims: Option<&[f64]>,
) -> Result<Vec<RateTuple>> {
    let report = check_set_function_properties(d, PropertyKind::Superadditive);
    if !report.passed {
        return Err(Error::PropertyCheck(failure_message(&report)));
    }
    if let Some(ld) = log_dims {
        let check = dcheck_from_dhat(d, ld)?;
        let report = check_set_function_properties(&check, PropertyKind::SubadditiveMonotone);
        if !report.passed {
            return Err(Error::PropertyCheck(failure_message(&report)));
        }
    }
    greedy_vertices(d)
}
