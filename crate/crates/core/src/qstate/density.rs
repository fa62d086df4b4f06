use nalgebra::DVector;

use super::layout::SystemLayout;
use super::linalg::{self, c, CMatrix, C64};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-10;

/// Hermitian PSD operator bound to a layout. Normalized states have unit
/// trace; subnormalized ones have trace in `[0, 1]` and carry a flag.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    layout: SystemLayout,
    subnormalized: bool,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, layout: SystemLayout) -> Result<Self> {
        Self::validate(&matrix, &layout)?;
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr));
        }
        Ok(Self {
            matrix,
            layout,
            subnormalized: false,
        })
    }

    pub fn new_subnormalized(matrix: CMatrix, layout: SystemLayout) -> Result<Self> {
        Self::validate(&matrix, &layout)?;
        let tr = matrix.trace().re;
        if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&tr) {
            return Err(Error::BadTrace(tr));
        }
        Ok(Self {
            matrix,
            layout,
            subnormalized: true,
        })
    }

    fn validate(matrix: &CMatrix, layout: &SystemLayout) -> Result<()> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        let dev = linalg::hermitian_deviation(matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let min = linalg::eigvalsh(matrix).first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        Ok(())
    }

    /// Skips validation; callers guarantee the result of a valid-in,
    /// valid-out operation.
    pub(crate) fn from_parts(matrix: CMatrix, layout: SystemLayout, subnormalized: bool) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.dim());
        Self {
            matrix,
            layout,
            subnormalized,
        }
    }

    /// `|ψ⟩⟨ψ|` for a (normalized on entry) state vector.
    pub fn pure(amplitudes: &[C64], layout: SystemLayout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: amplitudes.len(),
            });
        }
        let v = DVector::from_column_slice(amplitudes);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::Degenerate("zero state vector".into()));
        }
        let v = v.unscale(norm);
        let m = &v * v.adjoint();
        Ok(Self::from_parts(linalg::hermitize(&m), layout, false))
    }

    pub fn basis_state(index: usize, layout: SystemLayout) -> Result<Self> {
        let d = layout.dim();
        if index >= d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: index,
            });
        }
        let mut m = CMatrix::zeros(d, d);
        m[(index, index)] = c(1.0, 0.0);
        Ok(Self::from_parts(m, layout, false))
    }

    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let d = layout.dim();
        Self::from_parts(CMatrix::identity(d, d).unscale(d as f64), layout, false)
    }

    /// Bell state `(|00⟩ + |11⟩)/√2` on two qubits.
    pub fn phi_plus(a: &str, b: &str) -> Result<Self> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        Self::pure(&amps, SystemLayout::new([(a, 2), (b, 2)])?)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    /// Same matrix under a new layout of identical factor dimensions.
    pub fn relabel(&self, layout: SystemLayout) -> Result<Self> {
        if layout.dims() != self.layout.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: layout.dim(),
            });
        }
        Ok(Self::from_parts(self.matrix.clone(), layout, self.subnormalized))
    }

    /// Reorders factors so that the result has the labels in `order`.
    pub fn reorder<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        if order.len() != self.layout.len() {
            return Err(Error::InvalidLayout(
                "reorder must name every factor exactly once".into(),
            ));
        }
        let pos = self.layout.positions(order)?;
        let m = linalg::permute_factors(&self.matrix, &self.layout.dims(), &pos);
        Ok(Self::from_parts(m, self.layout.select(&pos), self.subnormalized))
    }

    /// n-fold tensor power with copy-indexed labels.
    pub fn power(&self, n: usize) -> Result<Self> {
        let layout = self.layout.power(n)?;
        let mut m = self.matrix.clone();
        for _ in 1..n {
            m = linalg::kron(&m, &self.matrix);
        }
        Ok(Self::from_parts(m, layout, self.subnormalized))
    }
}

/// Unitary operator bound to a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: CMatrix,
    layout: SystemLayout,
}

impl UnitaryMatrix {
    pub fn new(matrix: CMatrix, layout: SystemLayout) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        let dev = linalg::max_abs_diff(&(matrix.adjoint() * &matrix), &linalg::identity(d));
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { matrix, layout })
    }

    pub(crate) fn from_parts(matrix: CMatrix, layout: SystemLayout) -> Self {
        Self { matrix, layout }
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let d = layout.dim();
        Self::from_parts(linalg::identity(d), layout)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.matrix.adjoint(), self.layout.clone())
    }

    pub fn kron(&self, other: &UnitaryMatrix) -> Result<Self> {
        Ok(Self::from_parts(
            linalg::kron(&self.matrix, &other.matrix),
            self.layout.concat(&other.layout)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_psd_and_bad_trace() {
        let l = SystemLayout::new([("A", 2)]).unwrap();
        let m = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.), c(0., 0.), c(0., 0.), c(-0.5, 0.)]);
        assert!(matches!(DensityMatrix::new(m, l.clone()), Err(Error::NotPsd(_))));
        let m = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(m.clone(), l.clone()), Err(Error::BadTrace(_))));
        let half = m.unscale(4.0);
        assert!(DensityMatrix::new_subnormalized(half, l).unwrap().is_subnormalized());
    }

    #[test]
    fn rejects_non_hermitian() {
        let l = SystemLayout::new([("A", 2)]).unwrap();
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.1, 0.), c(0., 0.), c(0.5, 0.)]);
        assert!(matches!(DensityMatrix::new(m, l), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn non_unitary_rejected() {
        let l = SystemLayout::new([("A", 2)]).unwrap();
        let m = CMatrix::identity(2, 2).scale(2.0);
        assert!(matches!(UnitaryMatrix::new(m, l), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn reorder_roundtrips() {
        let s = DensityMatrix::basis_state(1, SystemLayout::new([("A", 2), ("B", 3)]).unwrap())
            .unwrap();
        let r = s.reorder(&["B", "A"]).unwrap();
        // |0>_A |1>_B  ->  |1>_B |0>_A = index 2
        assert_eq!(r.matrix()[(2, 2)], c(1.0, 0.0));
        assert_eq!(r.reorder(&["A", "B"]).unwrap(), s);
    }
}
