//! Dense complex kernels shared by the state, region and protocol code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    eigh(m).0
}

/// Applies `f` to the spectrum of the Hermitian part of `m`.
pub fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let diag = DVector::from_iterator(values.len(), values.iter().map(|&v| c(f(v), 0.0)));
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, col| {
        vectors[(r, col)] * diag[col]
    });
    &scaled * vectors.adjoint()
}

/// Square root of a PSD matrix; small negative eigenvalues are clipped.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_map(m, |v| v.max(0.0).sqrt())
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if hermitian_deviation(m) <= 1e-13 * scale {
        eigvalsh(m).iter().map(|v| v.abs()).sum()
    } else {
        m.clone().svd(false, false).singular_values.iter().sum()
    }
}

/// Mixed-radix index map for a factor permutation: entry `i` of the result
/// is the old basis index of new basis index `i`, where new factor `j` is
/// old factor `order[j]`.
pub fn permutation_index(dims: &[usize], order: &[usize]) -> Vec<usize> {
    debug_assert_eq!(dims.len(), order.len());
    let k = dims.len();
    let mut old_strides = vec![1usize; k];
    for j in (0..k.saturating_sub(1)).rev() {
        old_strides[j] = old_strides[j + 1] * dims[j + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; k];
    for _ in 0..total {
        let old = digits
            .iter()
            .zip(order)
            .map(|(&dgt, &o)| dgt * old_strides[o])
            .sum();
        map.push(old);
        for j in (0..k).rev() {
            digits[j] += 1;
            if digits[j] < new_dims[j] {
                break;
            }
            digits[j] = 0;
        }
    }
    map
}

/// Reorders the tensor factors of an operator.
pub fn permute_factors(m: &CMatrix, dims: &[usize], order: &[usize]) -> CMatrix {
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return m.clone();
    }
    let map = permutation_index(dims, order);
    let n = map.len();
    CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])])
}

/// Reorders the tensor factors of a vector.
pub fn permute_vector(v: &DVector<C64>, dims: &[usize], order: &[usize]) -> DVector<C64> {
    let map = permutation_index(dims, order);
    DVector::from_iterator(map.len(), map.iter().map(|&o| v[o]))
}

/// Partial trace over the trailing `traced` dimensions of an operator of
/// size `kept * traced`.
pub fn trace_out_tail(m: &CMatrix, kept: usize, traced: usize) -> CMatrix {
    CMatrix::from_fn(kept, kept, |i, j| {
        (0..traced)
            .map(|t| m[(i * traced + t, j * traced + t)])
            .sum()
    })
}

/// Conjugates by `I ⊗ u` where `u` acts on the trailing `u.nrows()` dimensions.
pub fn conjugate_tail(m: &CMatrix, u: &CMatrix) -> CMatrix {
    let du = u.nrows();
    let blocks = m.nrows() / du;
    let ud = u.adjoint();
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for bi in 0..blocks {
        for bj in 0..blocks {
            let block = m.view((bi * du, bj * du), (du, du));
            let conj = u * block * &ud;
            out.view_mut((bi * du, bj * du), (du, du)).copy_from(&conj);
        }
    }
    out
}

/// Left-multiplies by `I ⊗ u` where `u` acts on the trailing dimensions.
pub fn left_tail(m: &CMatrix, u: &CMatrix) -> CMatrix {
    let du = u.nrows();
    let blocks = m.nrows() / du;
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for bi in 0..blocks {
        let rows = m.rows(bi * du, du);
        out.rows_mut(bi * du, du).copy_from(&(u * rows));
    }
    out
}

/// Embeds an operator on the factors at `positions` (in that order) into
/// the full space `dims`, as `op ⊗ I` reordered into place.
pub fn embed(op: &CMatrix, dims: &[usize], positions: &[usize]) -> CMatrix {
    let rest: Vec<usize> = (0..dims.len()).filter(|p| !positions.contains(p)).collect();
    let rest_dim: usize = rest.iter().map(|&p| dims[p]).product();
    let full = kron(&identity(rest_dim), op);
    // factor order of `full` is rest ++ positions
    let mut order: Vec<usize> = rest.clone();
    order.extend_from_slice(positions);
    let permuted_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
    // inverse permutation: original factor p sits at slot inv[p] in `full`
    let mut inv = vec![0usize; dims.len()];
    for (slot, &p) in order.iter().enumerate() {
        inv[p] = slot;
    }
    permute_factors(&full, &permuted_dims, &inv)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Real part of `Tr[a b]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    #[test]
    fn permutation_swaps_two_qubits() {
        // |01> -> |10> under swap
        let mut m = CMatrix::zeros(4, 4);
        m[(1, 1)] = c(1.0, 0.0);
        let p = permute_factors(&m, &[2, 2], &[1, 0]);
        assert_eq!(p[(2, 2)], c(1.0, 0.0));
        assert_eq!(p[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn embed_matches_kron() {
        let x = pauli_x();
        let full = embed(&x, &[2, 3], &[0]);
        assert!(max_abs_diff(&full, &kron(&x, &identity(3))) < 1e-15);
        let full = embed(&x, &[3, 2], &[1]);
        assert!(max_abs_diff(&full, &kron(&identity(3), &x)) < 1e-15);
    }

    #[test]
    fn conjugate_tail_matches_kron() {
        let x = pauli_x();
        let m = CMatrix::from_fn(6, 6, |i, j| c((i * 6 + j) as f64, (i as f64) - (j as f64)));
        let big = kron(&identity(3), &x);
        let want = &big * &m * big.adjoint();
        assert!(max_abs_diff(&conjugate_tail(&m, &x), &want) < 1e-12);
        assert!(max_abs_diff(&left_tail(&m, &x), &(&big * &m)) < 1e-12);
    }

    #[test]
    fn trace_norm_of_non_hermitian_uses_svd() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(2., 0.), c(0., 0.), c(0., 0.)]);
        assert!((trace_norm(&m) - 2.0).abs() < 1e-12);
    }
}
