use serde::{Deserialize, Serialize};

use super::properties::ENTROPIC_TOL;
use super::set_function::{
    chat_from_state, dhat_from_state, mask_of, members, Mask, SetFunction, MAX_SENDERS,
};
use crate::error::{Error, Result};
use crate::qstate::{conditional_mutual_information, DensityMatrix};

/// Per-sender rates in bits per copy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RateTuple(pub Vec<f64>);

impl RateTuple {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !r.is_finite()) {
            return Err(Error::validation("rates", format!("non-finite rate {r}")));
        }
        Ok(Self(rates))
    }

    pub fn zeros(z: usize) -> Self {
        Self(vec![0.0; z])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `Σ_{z∈Γ} r_z`.
    pub fn subset_sum(&self, mask: Mask) -> f64 {
        members(mask).iter().map(|&z| self.0[z - 1]).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `Σ_{z∈Γ} r_z ≤ bound`
    Le,
    /// `Σ_{z∈Γ} r_z ≥ bound`
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub subset: Vec<usize>,
    #[serde(rename = "value")]
    pub bound: f64,
    pub direction: Direction,
}

impl Constraint {
    pub fn mask(&self) -> Mask {
        mask_of(&self.subset)
    }

    /// Nonnegative iff `r` satisfies the constraint.
    pub fn margin(&self, r: &RateTuple) -> f64 {
        let s = r.subset_sum(self.mask());
        match self.direction {
            Direction::Le => self.bound - s,
            Direction::Ge => s - self.bound,
        }
    }
}

/// One linear constraint per nonempty subset of senders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    pub z: usize,
    #[serde(rename = "entries")]
    pub constraints: Vec<Constraint>,
}

impl RateRegion {
    pub fn from_set_function(f: &SetFunction, direction: Direction) -> Self {
        Self {
            z: f.z_count(),
            constraints: (1..=f.full_mask())
                .map(|m| Constraint {
                    subset: members(m),
                    bound: f.get(m),
                    direction,
                })
                .collect(),
        }
    }

    pub fn constraint(&self, subset: &[usize]) -> Option<&Constraint> {
        let m = mask_of(subset);
        self.constraints.iter().find(|c| c.mask() == m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    /// The constraint with the smallest margin (violated when negative).
    pub worst: Option<Constraint>,
    pub margin: f64,
}

pub fn membership(region: &RateRegion, r: &RateTuple, slack: f64) -> Result<Membership> {
    if r.len() != region.z {
        return Err(Error::DimensionMismatch {
            expected: region.z,
            found: r.len(),
        });
    }
    let mut worst: Option<(&Constraint, f64)> = None;
    for c in &region.constraints {
        let m = c.margin(r);
        if worst.is_none_or(|(_, w)| m < w) {
            worst = Some((c, m));
        }
    }
    let margin = worst.map_or(f64::INFINITY, |(_, m)| m);
    Ok(Membership {
        member: margin >= -slack,
        worst: worst.map(|(c, _)| c.clone()),
        margin,
    })
}

/// Achievable region of the multiple-access one-time pad together with the
/// set functions it decomposes into.
#[derive(Clone, Debug, Serialize)]
pub struct MainRegion {
    pub region: RateRegion,
    pub chat: SetFunction,
    pub dhat: SetFunction,
    /// Per subset, `I(A_Γ:A_Γc B|E) − (Ĉ(Γ) − D̂(Γ))`.
    pub residuals: SetFunction,
    pub max_residual: f64,
}

/// Builds `Σ_{z∈Γ} R_z ≤ I(A_Γ : A_Γc B | E)` for every nonempty Γ, and
/// checks the bound against `Ĉ(Γ) − D̂(Γ)` computed with `V = BE`, `W = E`.
pub fn main_region<S: AsRef<str>>(
    rho: &DensityMatrix,
    senders: &[S],
    b: &[S],
    e: &[S],
) -> Result<MainRegion> {
    let z = senders.len();
    if z == 0 || z > MAX_SENDERS {
        return Err(Error::TooLarge(format!("Z = {z} (supported 1..={MAX_SENDERS})")));
    }
    let senders: Vec<&str> = senders.iter().map(|s| s.as_ref()).collect();
    let b: Vec<&str> = b.iter().map(|s| s.as_ref()).collect();
    let e: Vec<&str> = e.iter().map(|s| s.as_ref()).collect();
    let mut all = senders.clone();
    all.extend(&b);
    all.extend(&e);
    rho.layout().positions(&all)?;
    if all.len() != rho.layout().len() {
        let missing = rho.layout().labels().find(|l| !all.contains(l)).unwrap_or_default();
        return Err(Error::validation(
            "roles",
            format!("label `{missing}` has no role; senders, B and E must cover the layout"),
        ));
    }

    let mut bounds = vec![0.0; 1 << z];
    for m in 1..(1u32 << z) {
        let gamma: Vec<&str> = members(m).iter().map(|&i| senders[i - 1]).collect();
        let mut rest: Vec<&str> = members(!m & ((1 << z) - 1))
            .iter()
            .map(|&i| senders[i - 1])
            .collect();
        rest.extend(&b);
        bounds[m as usize] = conditional_mutual_information(rho, &gamma, &rest, &e)?;
    }
    let cmi = SetFunction::from_table(z, bounds)?;

    let mut v = b.clone();
    v.extend(&e);
    let chat = chat_from_state(rho, &senders, &v)?;
    let dhat = dhat_from_state(rho, &senders, &e)?;
    let residuals = cmi.sub(&chat.sub(&dhat)?)?;
    let max_residual = residuals.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max_residual > ENTROPIC_TOL {
        return Err(Error::Identity(format!(
            "I(A_Γ:A_Γc B|E) differs from Ĉ − D̂ by {max_residual:e}"
        )));
    }
    Ok(MainRegion {
        region: RateRegion::from_set_function(&cmi, Direction::Le),
        chat,
        dhat,
        residuals,
        max_residual,
    })
}
