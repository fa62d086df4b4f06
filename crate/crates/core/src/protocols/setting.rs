use serde::Serialize;

use super::family::UnitaryFamily;
use crate::error::{Error, Result};
use crate::qstate::linalg::{c, CMatrix};
use crate::qstate::{conjugate_local, DensityMatrix, SystemLayout};

pub const DEFAULT_BUDGET_QUBITS: u32 = 12;
pub const MAX_BUDGET_QUBITS: u32 = 14;

/// Cap on the total Hilbert-space dimension, in qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub qubits: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            qubits: DEFAULT_BUDGET_QUBITS,
        }
    }
}

impl Budget {
    /// Requests above [`MAX_BUDGET_QUBITS`] are capped.
    pub fn new(qubits: u32) -> Self {
        Self {
            qubits: qubits.min(MAX_BUDGET_QUBITS),
        }
    }

    pub fn max_dim(&self) -> usize {
        1usize << self.qubits
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if dim > self.max_dim() {
            return Err(Error::DimensionOverflow {
                dim,
                budget: self.max_dim(),
            });
        }
        Ok(())
    }

    /// `base^n` if it fits, otherwise an overflow error.
    pub fn check_power(&self, base: usize, n: usize) -> Result<usize> {
        let mut dim = 1usize;
        for _ in 0..n {
            dim = dim.saturating_mul(base);
            if dim > self.max_dim() {
                return Err(Error::DimensionOverflow {
                    dim,
                    budget: self.max_dim(),
                });
            }
        }
        Ok(dim)
    }
}

/// `ρ^{⊗n}` with the sender factors identified. The single-copy state is
/// reordered as `A_1 … A_Z` followed by the remaining labels in their
/// original order.
#[derive(Clone, Debug)]
pub struct Setting {
    pub n: usize,
    senders: Vec<String>,
    others: Vec<String>,
    single: DensityMatrix,
    full: DensityMatrix,
}

impl Setting {
    pub fn new<S: AsRef<str>>(rho: &DensityMatrix, senders: &[S], n: usize, budget: Budget) -> Result<Self> {
        if senders.is_empty() {
            return Err(Error::validation("senders", "at least one sender is required"));
        }
        if n == 0 {
            return Err(Error::validation("n", "must be at least 1"));
        }
        let senders: Vec<String> = senders.iter().map(|s| s.as_ref().to_string()).collect();
        rho.layout().positions(&senders)?;
        let others: Vec<String> = rho
            .layout()
            .labels()
            .filter(|l| !senders.iter().any(|s| s == l))
            .map(str::to_string)
            .collect();
        budget.check_power(rho.dim(), n)?;
        let mut order = senders.clone();
        order.extend(others.iter().cloned());
        let single = rho.reorder(&order)?;
        let full = single.power(n)?;
        Ok(Self {
            n,
            senders,
            others,
            single,
            full,
        })
    }

    pub fn z_count(&self) -> usize {
        self.senders.len()
    }

    pub fn senders(&self) -> &[String] {
        &self.senders
    }

    pub fn others(&self) -> &[String] {
        &self.others
    }

    pub fn single(&self) -> &DensityMatrix {
        &self.single
    }

    pub fn full(&self) -> &DensityMatrix {
        &self.full
    }

    pub fn layout(&self) -> &SystemLayout {
        self.full.layout()
    }

    pub fn dim(&self) -> usize {
        self.full.dim()
    }

    /// Single-copy dimension of sender `zi` (0-based).
    pub fn sender_dim(&self, zi: usize) -> usize {
        self.single.layout().factors()[zi].dim
    }

    /// `A_z` copy labels `A_z_1 … A_z_n` (0-based `zi`).
    pub fn sender_copies(&self, zi: usize) -> Vec<String> {
        copies(&self.senders[zi], self.n)
    }

    /// Copy labels of every listed single-copy label, in full-layout order.
    pub fn copies_of<S: AsRef<str>>(&self, labels: &[S]) -> Vec<String> {
        let wanted: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        let mut out = Vec::new();
        for i in 1..=self.n {
            for l in self.single.layout().labels() {
                if wanted.iter().any(|w| w == l) {
                    out.push(SystemLayout::copy_label(l, i));
                }
            }
        }
        out
    }

    /// Copy labels of every non-sender factor.
    pub fn other_copies(&self) -> Vec<String> {
        self.copies_of(&self.others)
    }

    /// `U X U†` with `U` on `A_z^n` of `layout`.
    pub fn conjugate(&self, m: &CMatrix, layout: &SystemLayout, zi: usize, u: &CMatrix) -> Result<CMatrix> {
        let dims = vec![self.sender_dim(zi); self.n];
        conjugate_local(m, layout, u, &dims, &self.sender_copies(zi))
    }

    /// `(1/|ks|) Σ_{k∈ks} U_k X U_k†` for sender `zi`'s family.
    pub fn mix(
        &self,
        m: &CMatrix,
        layout: &SystemLayout,
        zi: usize,
        family: &UnitaryFamily,
        ks: impl ExactSizeIterator<Item = usize>,
    ) -> Result<CMatrix> {
        let count = ks.len();
        let mut acc = CMatrix::zeros(m.nrows(), m.ncols());
        for k in ks {
            acc += self.conjugate(m, layout, zi, &family.block(k))?;
        }
        Ok(acc * c(1.0 / count as f64, 0.0))
    }

    pub(crate) fn check_family(&self, zi: usize, family: &UnitaryFamily) -> Result<()> {
        if family.n != self.n || family.d != self.sender_dim(zi) {
            return Err(Error::DimensionMismatch {
                expected: self.sender_dim(zi).pow(self.n as u32),
                found: family.d.pow(family.n as u32),
            });
        }
        Ok(())
    }
}

fn copies(label: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| SystemLayout::copy_label(label, i)).collect()
}
