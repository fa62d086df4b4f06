use serde::Serialize;

use super::set_function::{members, Mask, SetFunction};

pub const ENTROPIC_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyKind {
    /// Normalized, nonnegative, nondecreasing, strongly subadditive.
    SubadditiveMonotone,
    /// Normalized and strongly superadditive.
    Superadditive,
}

/// Subsets realizing the smallest margin of a check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub subsets: Vec<Vec<usize>>,
    /// Smallest margin observed; negative means violated.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    pub worst: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    pub kind: PropertyKind,
    pub passed: bool,
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Worst {
    margin: f64,
    subsets: Vec<Mask>,
}

impl Worst {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            subsets: Vec::new(),
        }
    }

    fn offer(&mut self, margin: f64, subsets: &[Mask]) {
        if margin < self.margin {
            self.margin = margin;
            self.subsets = subsets.to_vec();
        }
    }

    fn finish(self, name: &'static str, tol: f64) -> PropertyCheck {
        let witness = (self.margin.is_finite()).then(|| Witness {
            subsets: self.subsets.iter().map(|&m| members(m)).collect(),
            margin: self.margin,
        });
        PropertyCheck {
            name,
            passed: self.margin >= -tol,
            worst: witness,
        }
    }
}

/// Scans every subset (and every pair of subsets) for the structural
/// properties of `kind`, within [`ENTROPIC_TOL`].
pub fn check_set_function_properties(f: &SetFunction, kind: PropertyKind) -> PropertyReport {
    let n = 1u32 << f.z_count();
    let mut checks = vec![PropertyCheck {
        name: "zero_at_empty",
        passed: f.get(0) == 0.0,
        worst: None,
    }];

    if kind == PropertyKind::SubadditiveMonotone {
        let mut w = Worst::new();
        for m in 1..n {
            w.offer(f.get(m), &[m]);
        }
        checks.push(w.finish("nonnegative", ENTROPIC_TOL));

        let mut w = Worst::new();
        for sup in 1..n {
            // every proper subset of `sup`
            let mut sub = (sup - 1) & sup;
            loop {
                w.offer(f.get(sup) - f.get(sub), &[sub, sup]);
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & sup;
            }
        }
        checks.push(w.finish("monotone", ENTROPIC_TOL));
    }

    let sign = match kind {
        PropertyKind::SubadditiveMonotone => 1.0,
        PropertyKind::Superadditive => -1.0,
    };
    let mut w = Worst::new();
    for a in 0..n {
        for b in a..n {
            let lhs = f.get(a) + f.get(b);
            let rhs = f.get(a | b) + f.get(a & b);
            w.offer(sign * (lhs - rhs), &[a, b]);
        }
    }
    checks.push(w.finish(
        match kind {
            PropertyKind::SubadditiveMonotone => "strongly_subadditive",
            PropertyKind::Superadditive => "strongly_superadditive",
        },
        ENTROPIC_TOL,
    ));

    PropertyReport {
        kind,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
