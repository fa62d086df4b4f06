use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One tensor factor of a Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered, labeled tensor factorization. The leftmost factor is the most
/// significant digit of a basis index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Factor>", into = "Vec<Factor>")]
pub struct SystemLayout {
    factors: Vec<Factor>,
}

impl SystemLayout {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors = factors
            .into_iter()
            .map(|(label, dim)| Factor {
                label: label.into(),
                dim,
            })
            .collect::<Vec<_>>();
        Self::from_factors(factors)
    }

    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(Error::InvalidLayout(format!("factor `{}` has dimension 0", f.label)));
            }
            if f.label.is_empty() {
                return Err(Error::InvalidLayout("empty factor label".into()));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::InvalidLayout(format!("duplicate label `{}`", f.label)));
            }
        }
        Ok(Self { factors })
    }

    /// The trivial (one-dimensional, factor-free) layout.
    pub fn empty() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.label.as_str())
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|i| self.factors[i].dim)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Positions of `labels`, in the order given.
    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let p = self.position(l).ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            if out.contains(&p) {
                return Err(Error::OverlappingLabels(l.to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    pub fn concat(&self, other: &SystemLayout) -> Result<Self> {
        if let Some(f) = other.factors.iter().find(|f| self.contains(&f.label)) {
            return Err(Error::LabelCollision(f.label.clone()));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Self { factors })
    }

    /// Sub-layout made of the given positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> Self {
        Self {
            factors: positions.iter().map(|&p| self.factors[p].clone()).collect(),
        }
    }

    /// Label that copy `copy` (1-based) of factor `label` carries in the
    /// n-fold layout.
    pub fn copy_label(label: &str, copy: usize) -> String {
        format!("{label}_{copy}")
    }

    /// n-fold layout: copy 1 of every factor, then copy 2, and so on,
    /// matching `ρ ⊗ ρ ⊗ … ⊗ ρ`.
    pub fn power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLayout("power requires n >= 1".into()));
        }
        let factors = (1..=n)
            .flat_map(|i| {
                self.factors.iter().map(move |f| Factor {
                    label: Self::copy_label(&f.label, i),
                    dim: f.dim,
                })
            })
            .collect();
        Self::from_factors(factors)
    }
}

impl TryFrom<Vec<Factor>> for SystemLayout {
    type Error = Error;

    fn try_from(factors: Vec<Factor>) -> Result<Self> {
        Self::from_factors(factors)
    }
}

impl From<SystemLayout> for Vec<Factor> {
    fn from(layout: SystemLayout) -> Self {
        layout.factors
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_dims() {
        assert!(SystemLayout::new([("A", 2), ("A", 2)]).is_err());
        assert!(SystemLayout::new([("A", 0)]).is_err());
    }

    #[test]
    fn power_replicates_copy_major() {
        let l = SystemLayout::new([("A", 2), ("B", 3)]).unwrap();
        let p = l.power(2).unwrap();
        let labels: Vec<_> = p.labels().collect();
        assert_eq!(labels, ["A_1", "B_1", "A_2", "B_2"]);
        assert_eq!(p.dim(), 36);
    }

    #[test]
    fn concat_detects_collision() {
        let a = SystemLayout::new([("A", 2)]).unwrap();
        assert!(matches!(a.concat(&a), Err(Error::LabelCollision(_))));
    }
}
