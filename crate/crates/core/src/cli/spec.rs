use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::linalg::{c, CMatrix};
use crate::qstate::{tensor, DensityMatrix, Factor, SystemLayout};

/// Named state families. Default role assignments are listed per variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Preset {
    /// `Φ⁺` on `A1 B`.
    Bell,
    /// `k`-qubit GHZ on `A1 … A{k-2} B E` (`A1 B` when `k = 2`).
    Ghz { k: usize },
    /// `p Φ⁺ + (1−p) I/4` on `A1 B`.
    Werner { p: f64 },
    /// `diag(0.7, 0.3)` on each of `A1 … Az B E`.
    Product {
        #[serde(default = "one")]
        z: usize,
    },
    /// `Φ⁺_{A1 B1} ⊗ Φ⁺_{A2 B2}`.
    TwoBell,
    /// `Σ_x p_x |x⟩⟨x|_{A1} ⊗ |x⟩⟨x|_B`.
    Cq { distribution: Vec<f64> },
}

fn one() -> usize {
    1
}

/// `[re, im]`
pub type Entry = [f64; 2];

/// A state with role labels. Exactly one of `preset` or `layout` + `matrix`.
/// Matrix entries are row-major with the leftmost layout factor most
/// significant in the basis index.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<Factor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub senders: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<String>>,
}

/// A validated state with a role partition of its layout.
#[derive(Clone, Debug)]
pub struct ResolvedState {
    pub rho: DensityMatrix,
    pub senders: Vec<String>,
    pub b: Vec<String>,
    pub e: Vec<String>,
}

struct Roles {
    senders: Vec<String>,
    b: Vec<String>,
    e: Vec<String>,
}

fn labels(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn qubits(names: &[String]) -> Result<SystemLayout> {
    SystemLayout::new(names.iter().map(|n| (n.as_str(), 2)))
}

fn preset_state(p: &Preset) -> Result<(DensityMatrix, Roles)> {
    let path = "preset";
    Ok(match p {
        Preset::Bell => (
            DensityMatrix::phi_plus("A1", "B")?,
            Roles {
                senders: labels(&["A1"]),
                b: labels(&["B"]),
                e: vec![],
            },
        ),
        Preset::Ghz { k } => {
            if *k < 2 || *k > 12 {
                return Err(Error::validation(format!("{path}.k"), "GHZ needs 2 <= k <= 12"));
            }
            let senders: Vec<String> = (1..=k.saturating_sub(2).max(1)).map(|i| format!("A{i}")).collect();
            let mut all = senders.clone();
            all.push("B".into());
            let e = if *k >= 3 { vec!["E".to_string()] } else { vec![] };
            all.extend(e.iter().cloned());
            let d = 1usize << k;
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut amps = vec![c(0.0, 0.0); d];
            amps[0] = c(h, 0.0);
            amps[d - 1] = c(h, 0.0);
            (
                DensityMatrix::pure(&amps, qubits(&all)?)?,
                Roles {
                    senders,
                    b: labels(&["B"]),
                    e,
                },
            )
        }
        Preset::Werner { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::validation(format!("{path}.p"), "p must lie in [0, 1]"));
            }
            let phi = DensityMatrix::phi_plus("A1", "B")?;
            let m = phi.matrix() * c(*p, 0.0) + CMatrix::identity(4, 4) * c((1.0 - p) / 4.0, 0.0);
            (
                DensityMatrix::new(m, phi.layout().clone())?,
                Roles {
                    senders: labels(&["A1"]),
                    b: labels(&["B"]),
                    e: vec![],
                },
            )
        }
        Preset::Product { z } => {
            if *z == 0 || *z > 10 {
                return Err(Error::validation(format!("{path}.z"), "z must lie in 1..=10"));
            }
            let senders: Vec<String> = (1..=*z).map(|i| format!("A{i}")).collect();
            let mut all = senders.clone();
            all.push("B".into());
            all.push("E".into());
            let one = |l: &str| {
                let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.7, 0.0), c(0.3, 0.0)]));
                DensityMatrix::new(m, SystemLayout::new([(l, 2)])?)
            };
            let mut rho = one(&all[0])?;
            for l in &all[1..] {
                rho = tensor(&rho, &one(l)?)?;
            }
            (
                rho,
                Roles {
                    senders,
                    b: labels(&["B"]),
                    e: labels(&["E"]),
                },
            )
        }
        Preset::TwoBell => (
            tensor(
                &DensityMatrix::phi_plus("A1", "B1")?,
                &DensityMatrix::phi_plus("A2", "B2")?,
            )?,
            Roles {
                senders: labels(&["A1", "A2"]),
                b: labels(&["B1", "B2"]),
                e: vec![],
            },
        ),
        Preset::Cq { distribution } => {
            let d = distribution.len();
            let sum: f64 = distribution.iter().sum();
            if d == 0 || d > 64 || distribution.iter().any(|p| p.is_nan() || *p < 0.0) || (sum - 1.0).abs() > 1e-10 {
                return Err(Error::validation(
                    format!("{path}.distribution"),
                    "must be a nonempty probability vector (sum 1 within 1e-10, at most 64 entries)",
                ));
            }
            let mut m = CMatrix::zeros(d * d, d * d);
            for (x, p) in distribution.iter().enumerate() {
                m[(x * d + x, x * d + x)] = c(*p, 0.0);
            }
            (
                DensityMatrix::new(m, SystemLayout::new([("A1", d), ("B", d)])?)?,
                Roles {
                    senders: labels(&["A1"]),
                    b: labels(&["B"]),
                    e: vec![],
                },
            )
        }
    })
}

impl StateSpec {
    pub fn preset(p: Preset) -> Self {
        Self {
            preset: Some(p),
            ..Self::default()
        }
    }

    /// Explicit spec reproducing `rho` entry by entry.
    pub fn explicit(rho: &DensityMatrix, senders: &[&str], b: &[&str], e: &[&str]) -> Self {
        let m = rho.matrix();
        Self {
            preset: None,
            layout: Some(rho.layout().factors().to_vec()),
            matrix: Some(
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect(),
            ),
            senders: Some(labels(senders)),
            b: Some(labels(b)),
            e: Some(labels(e)),
        }
    }

    pub fn resolve(&self) -> Result<ResolvedState> {
        let (rho, defaults) = match (&self.preset, &self.layout, &self.matrix) {
            (Some(p), None, None) => {
                let (rho, roles) = preset_state(p)?;
                (rho, Some(roles))
            }
            (None, Some(layout), Some(rows)) => {
                let layout = SystemLayout::from_factors(layout.clone())
                    .map_err(|e| Error::validation("layout", e.to_string()))?;
                let d = layout.dim();
                if rows.len() != d {
                    return Err(Error::validation(
                        "matrix",
                        format!("expected {d} rows, found {}", rows.len()),
                    ));
                }
                if let Some(i) = rows.iter().position(|r| r.len() != d) {
                    return Err(Error::validation(
                        format!("matrix[{i}]"),
                        format!("expected {d} entries, found {}", rows[i].len()),
                    ));
                }
                let m = CMatrix::from_fn(d, d, |i, j| c(rows[i][j][0], rows[i][j][1]));
                let rho = DensityMatrix::new(m, layout).map_err(|e| Error::validation("matrix", e.to_string()))?;
                (rho, None)
            }
            (Some(_), _, _) => {
                return Err(Error::validation("preset", "give either a preset or layout + matrix, not both"))
            }
            _ => return Err(Error::validation("layout", "explicit states need both layout and matrix")),
        };
        let pick = |given: &Option<Vec<String>>, default: Option<&Vec<String>>, name: &str| -> Result<Vec<String>> {
            match (given, default) {
                (Some(v), _) => Ok(v.clone()),
                (None, Some(d)) => Ok(d.clone()),
                (None, None) if name == "e" => Ok(vec![]),
                (None, None) => Err(Error::validation(name, "role labels are required for explicit states")),
            }
        };
        let senders = pick(&self.senders, defaults.as_ref().map(|r| &r.senders), "senders")?;
        let b = pick(&self.b, defaults.as_ref().map(|r| &r.b), "b")?;
        let e = pick(&self.e, defaults.as_ref().map(|r| &r.e), "e")?;
        check_roles(&rho, &senders, &b, &e)?;
        Ok(ResolvedState { rho, senders, b, e })
    }
}

fn check_roles(rho: &DensityMatrix, senders: &[String], b: &[String], e: &[String]) -> Result<()> {
    if senders.is_empty() {
        return Err(Error::validation("senders", "at least one sender is required"));
    }
    let layout = rho.layout();
    let mut seen: Vec<&str> = Vec::new();
    for (role, list) in [("senders", senders), ("b", b), ("e", e)] {
        for (i, l) in list.iter().enumerate() {
            if !layout.contains(l) {
                return Err(Error::validation(format!("{role}[{i}]"), format!("unknown label `{l}`")));
            }
            if seen.contains(&l.as_str()) {
                return Err(Error::validation(format!("{role}[{i}]"), format!("label `{l}` has two roles")));
            }
            seen.push(l);
        }
    }
    if let Some(l) = layout.labels().find(|l| !seen.contains(l)) {
        return Err(Error::validation("senders", format!("label `{l}` has no role")));
    }
    Ok(())
}
