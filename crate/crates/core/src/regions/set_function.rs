use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{entropy_of, DensityMatrix};

pub const MAX_SENDERS: usize = 12;

/// Bitmask of senders: bit `z-1` set means sender `z` is in the subset.
pub type Mask = u32;

pub fn members(mask: Mask) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).map(|b| b as usize + 1).collect()
}

pub fn mask_of(members: &[usize]) -> Mask {
    members.iter().fold(0, |m, &z| m | 1 << (z - 1))
}

/// Real-valued function on the subsets of `[Z]`, stored as a table indexed
/// by bitmask, with `f(∅) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetFunction {
    z_count: usize,
    values: Vec<f64>,
}

impl SetFunction {
    pub fn from_table(z_count: usize, values: Vec<f64>) -> Result<Self> {
        if z_count == 0 || z_count > MAX_SENDERS {
            return Err(Error::TooLarge(format!("Z = {z_count} (supported 1..={MAX_SENDERS})")));
        }
        if values.len() != 1 << z_count {
            return Err(Error::DimensionMismatch {
                expected: 1 << z_count,
                found: values.len(),
            });
        }
        if values[0] != 0.0 {
            return Err(Error::PropertyCheck(format!("f(∅) = {} must be 0", values[0])));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::PropertyCheck(format!("non-finite value {v}")));
        }
        Ok(Self { z_count, values })
    }

    pub fn from_fn(z_count: usize, f: impl Fn(Mask) -> f64) -> Result<Self> {
        if z_count == 0 || z_count > MAX_SENDERS {
            return Err(Error::TooLarge(format!("Z = {z_count} (supported 1..={MAX_SENDERS})")));
        }
        let values = (0..1u32 << z_count)
            .map(|m| if m == 0 { 0.0 } else { f(m) })
            .collect();
        Self::from_table(z_count, values)
    }

    /// Modular function `A ↦ Σ_{s∈A} weights[s]`.
    pub fn modular(weights: &[f64]) -> Result<Self> {
        Self::from_fn(weights.len(), |m| {
            members(m).iter().map(|&z| weights[z - 1]).sum()
        })
    }

    pub fn z_count(&self) -> usize {
        self.z_count
    }

    pub fn full_mask(&self) -> Mask {
        (1 << self.z_count) - 1
    }

    pub fn get(&self, mask: Mask) -> f64 {
        self.values[mask as usize]
    }

    pub fn value(&self, subset: &[usize]) -> f64 {
        self.get(mask_of(subset))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(Mask, f64) -> f64) -> Result<Self> {
        Self::from_fn(self.z_count, |m| f(m, self.get(m)))
    }

    pub fn sub(&self, other: &SetFunction) -> Result<Self> {
        if other.z_count != self.z_count {
            return Err(Error::DimensionMismatch {
                expected: self.z_count,
                found: other.z_count,
            });
        }
        self.map(|m, v| v - other.get(m))
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    subset: Vec<usize>,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct Table {
    z: usize,
    entries: Vec<Entry>,
}

impl Serialize for SetFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Table {
            z: self.z_count,
            entries: (1..self.values.len() as Mask)
                .map(|m| Entry {
                    subset: members(m),
                    value: self.get(m),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let t = Table::deserialize(d)?;
        if t.z == 0 || t.z > MAX_SENDERS {
            return Err(D::Error::custom(format!("z = {} out of range", t.z)));
        }
        let mut values = vec![f64::NAN; 1 << t.z];
        values[0] = 0.0;
        for e in t.entries {
            if e.subset.iter().any(|&z| z == 0 || z > t.z) {
                return Err(D::Error::custom(format!("subset {:?} out of range", e.subset)));
            }
            values[mask_of(&e.subset) as usize] = e.value;
        }
        SetFunction::from_table(t.z, values).map_err(D::Error::custom)
    }
}

/// Entropy of `A_mask ∪ extra` with memoization over sender masks.
struct MarginalEntropies<'a> {
    rho: &'a DensityMatrix,
    senders: Vec<String>,
    extra: Vec<String>,
    cache: Vec<Option<f64>>,
}

impl<'a> MarginalEntropies<'a> {
    fn new<S: AsRef<str>>(rho: &'a DensityMatrix, senders: &[S], extra: &[S]) -> Result<Self> {
        if senders.is_empty() || senders.len() > MAX_SENDERS {
            return Err(Error::TooLarge(format!("Z = {} (supported 1..={MAX_SENDERS})", senders.len())));
        }
        let senders: Vec<String> = senders.iter().map(|s| s.as_ref().to_string()).collect();
        let extra: Vec<String> = extra.iter().map(|s| s.as_ref().to_string()).collect();
        let all: Vec<&str> = senders.iter().chain(&extra).map(String::as_str).collect();
        // label validity and disjointness
        rho.layout().positions(&all)?;
        let n = 1 << senders.len();
        Ok(Self {
            rho,
            senders,
            extra,
            cache: vec![None; n],
        })
    }

    fn get(&mut self, mask: Mask) -> Result<f64> {
        if let Some(v) = self.cache[mask as usize] {
            return Ok(v);
        }
        let mut labels: Vec<&str> = members(mask)
            .into_iter()
            .map(|z| self.senders[z - 1].as_str())
            .collect();
        labels.extend(self.extra.iter().map(String::as_str));
        let v = entropy_of(self.rho, &labels)?;
        self.cache[mask as usize] = Some(v);
        Ok(v)
    }

    fn log_dims(&self, mask: Mask) -> Result<f64> {
        members(mask)
            .into_iter()
            .map(|z| Ok((self.rho.layout().dim_of(&self.senders[z - 1])? as f64).log2()))
            .sum()
    }
}

fn build(z: usize, mut f: impl FnMut(Mask) -> Result<f64>) -> Result<SetFunction> {
    let mut values = vec![0.0; 1 << z];
    for m in 1..(1u32 << z) {
        values[m as usize] = f(m)?;
    }
    SetFunction::from_table(z, values)
}

/// `Ĉ(Γ) = Σ_{z∈Γ} log d_{A_z} − S(A_Γ | A_{Γc} V)`.
pub fn chat_from_state<S: AsRef<str>>(
    rho: &DensityMatrix,
    senders: &[S],
    v: &[S],
) -> Result<SetFunction> {
    let mut h = MarginalEntropies::new(rho, senders, v)?;
    let z = senders.len();
    let full = (1u32 << z) - 1;
    let s_all = h.get(full)?;
    build(z, |m| Ok(h.log_dims(m)? - (s_all - h.get(full & !m)?)))
}

/// `D̂(Γ) = Σ_{z∈Γ} log d_{A_z} − S(A_Γ | W)`.
pub fn dhat_from_state<S: AsRef<str>>(
    rho: &DensityMatrix,
    senders: &[S],
    w: &[S],
) -> Result<SetFunction> {
    let mut h = MarginalEntropies::new(rho, senders, w)?;
    let s_w = h.get(0)?;
    build(senders.len(), |m| Ok(h.log_dims(m)? - (h.get(m)? - s_w)))
}

/// `Ď(Γ) = 2 Σ_{z∈Γ} log d_{A_z} − D̂(Γ) = Σ_{z∈Γ} log d_{A_z} + S(A_Γ | W)`.
pub fn dcheck_from_state<S: AsRef<str>>(
    rho: &DensityMatrix,
    senders: &[S],
    w: &[S],
) -> Result<SetFunction> {
    let dhat = dhat_from_state(rho, senders, w)?;
    let log_dims = sender_log_dims(rho, senders)?;
    dcheck_from_dhat(&dhat, &log_dims)
}

pub fn dcheck_from_dhat(dhat: &SetFunction, log_dims: &[f64]) -> Result<SetFunction> {
    if log_dims.len() != dhat.z_count() {
        return Err(Error::DimensionMismatch {
            expected: dhat.z_count(),
            found: log_dims.len(),
        });
    }
    dhat.map(|m, v| 2.0 * members(m).iter().map(|&z| log_dims[z - 1]).sum::<f64>() - v)
}

pub fn sender_log_dims<S: AsRef<str>>(rho: &DensityMatrix, senders: &[S]) -> Result<Vec<f64>> {
    senders
        .iter()
        .map(|s| Ok((rho.layout().dim_of(s.as_ref())? as f64).log2()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{tensor, DensityMatrix, SystemLayout};

    #[test]
    fn chat_of_bell_pair_is_two() {
        let phi = DensityMatrix::phi_plus("A1", "V").unwrap();
        let c = chat_from_state(&phi, &["A1"], &["V"]).unwrap();
        assert!((c.value(&[1]) - 2.0).abs() < 1e-12);
        assert_eq!(c.get(0), 0.0);
    }

    #[test]
    fn chat_of_uncorrelated_maximally_mixed_is_zero() {
        let a = DensityMatrix::maximally_mixed(SystemLayout::new([("A1", 2)]).unwrap());
        let v = crate::qstate::random_density(SystemLayout::new([("V", 3)]).unwrap(), 3, 1).unwrap();
        let rho = tensor(&a, &v).unwrap();
        let c = chat_from_state(&rho, &["A1"], &["V"]).unwrap();
        assert!(c.value(&[1]).abs() < 1e-12);
    }

    #[test]
    fn chat_of_two_bell_pairs() {
        let rho = tensor(
            &DensityMatrix::phi_plus("A1", "B1").unwrap(),
            &DensityMatrix::phi_plus("A2", "B2").unwrap(),
        )
        .unwrap();
        let c = chat_from_state(&rho, &["A1", "A2"], &["B1", "B2"]).unwrap();
        assert!((c.value(&[1]) - 2.0).abs() < 1e-12);
        assert!((c.value(&[2]) - 2.0).abs() < 1e-12);
        assert!((c.value(&[1, 2]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn dhat_examples() {
        let pi = DensityMatrix::maximally_mixed(SystemLayout::new([("A1", 2), ("A2", 3)]).unwrap());
        let d = dhat_from_state::<&str>(&pi, &["A1", "A2"], &[]).unwrap();
        assert!(d.values().iter().all(|v| v.abs() < 1e-12));
        let zero = DensityMatrix::basis_state(0, SystemLayout::new([("A1", 2)]).unwrap()).unwrap();
        let d = dhat_from_state::<&str>(&zero, &["A1"], &[]).unwrap();
        assert!((d.value(&[1]) - 1.0).abs() < 1e-12);
        let phi = DensityMatrix::phi_plus("A1", "W").unwrap();
        let d = dhat_from_state(&phi, &["A1"], &["W"]).unwrap();
        assert!((d.value(&[1]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn label_errors_propagate() {
        let phi = DensityMatrix::phi_plus("A1", "V").unwrap();
        assert!(matches!(chat_from_state(&phi, &["A1"], &["X"]), Err(Error::UnknownLabel(_))));
        assert!(matches!(
            chat_from_state(&phi, &["A1"], &["A1"]),
            Err(Error::OverlappingLabels(_))
        ));
    }

    #[test]
    fn json_shape() {
        let f = SetFunction::from_table(2, vec![0.0, 2.0, 2.0, 4.0]).unwrap();
        let j = serde_json::to_value(&f).unwrap();
        assert_eq!(j["z"], 2);
        assert_eq!(j["entries"][2]["subset"], serde_json::json!([1, 2]));
        assert_eq!(j["entries"][2]["value"], 4.0);
        let back: SetFunction = serde_json::from_value(j).unwrap();
        assert_eq!(back, f);
        let missing = serde_json::json!({"z": 2, "entries": [{"subset": [1], "value": 1.0}]});
        assert!(serde_json::from_value::<SetFunction>(missing).is_err());
    }
}
