use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::density::{DensityMatrix, UnitaryMatrix, PSD_TOL};
use super::layout::SystemLayout;
use super::linalg::{self, c, CMatrix};
use crate::error::{Error, Result};

/// Eigenvalues at or below this contribute nothing to the entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let layout = a.layout().concat(b.layout())?;
    Ok(DensityMatrix::from_parts(
        linalg::kron(a.matrix(), b.matrix()),
        layout,
        a.is_subnormalized() || b.is_subnormalized(),
    ))
}

/// Reduced state on `keep`, in the original factor order.
pub fn partial_trace<S: AsRef<str>>(s: &DensityMatrix, keep: &[S]) -> Result<DensityMatrix> {
    let layout = s.layout();
    let mut kept = layout.positions(keep)?;
    kept.sort_unstable();
    if kept.len() == layout.len() {
        return Ok(s.clone());
    }
    let traced: Vec<usize> = (0..layout.len()).filter(|p| !kept.contains(p)).collect();
    let dims = layout.dims();
    let mut order = kept.clone();
    order.extend_from_slice(&traced);
    let permuted = linalg::permute_factors(s.matrix(), &dims, &order);
    let kept_dim: usize = kept.iter().map(|&p| dims[p]).product();
    let traced_dim: usize = traced.iter().map(|&p| dims[p]).product();
    let reduced = linalg::trace_out_tail(&permuted, kept_dim, traced_dim);
    Ok(DensityMatrix::from_parts(
        reduced,
        layout.select(&kept),
        s.is_subnormalized(),
    ))
}

/// Conjugates `s` by `u` acting on the factors `on` (matched to `u`'s
/// factors by position), identity elsewhere.
pub fn apply_unitary<S: AsRef<str>>(
    s: &DensityMatrix,
    u: &UnitaryMatrix,
    on: &[S],
) -> Result<DensityMatrix> {
    let m = conjugate_local(s.matrix(), s.layout(), u.matrix(), &u.layout().dims(), on)?;
    Ok(DensityMatrix::from_parts(m, s.layout().clone(), s.is_subnormalized()))
}

/// Matrix-level form of [`apply_unitary`] used by the protocol code for
/// operators that are not states (POVM elements, differences).
pub(crate) fn conjugate_local<S: AsRef<str>>(
    m: &CMatrix,
    layout: &SystemLayout,
    u: &CMatrix,
    u_dims: &[usize],
    on: &[S],
) -> Result<CMatrix> {
    let pos = layout.positions(on)?;
    let dims = layout.dims();
    let on_dims: Vec<usize> = pos.iter().map(|&p| dims[p]).collect();
    if on_dims != u_dims {
        return Err(Error::DimensionMismatch {
            expected: on_dims.iter().product(),
            found: u_dims.iter().product(),
        });
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|p| !pos.contains(p)).collect();
    let mut order = rest;
    order.extend_from_slice(&pos);
    let permuted = linalg::permute_factors(m, &dims, &order);
    let conj = linalg::conjugate_tail(&permuted, u);
    let permuted_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
    let mut inv = vec![0usize; order.len()];
    for (slot, &p) in order.iter().enumerate() {
        inv[p] = slot;
    }
    Ok(linalg::permute_factors(&conj, &permuted_dims, &inv))
}

/// Shannon entropy (bits) of a spectrum with the clipping convention of
/// [`entropy`].
pub fn spectrum_entropy(values: &[f64]) -> Result<f64> {
    let mut h = 0.0;
    for &v in values {
        if v < -PSD_TOL {
            return Err(Error::NotPsd(v));
        }
        if v > ENTROPY_CUTOFF {
            h -= v * v.log2();
        }
    }
    Ok(h)
}

/// Von Neumann entropy in bits.
pub fn entropy(s: &DensityMatrix) -> Result<f64> {
    if s.is_subnormalized() {
        return Err(Error::Subnormalized);
    }
    spectrum_entropy(&s.eigenvalues())
}

/// Entropy of the marginal on `labels`; the empty marginal has entropy 0.
pub fn entropy_of<S: AsRef<str>>(s: &DensityMatrix, labels: &[S]) -> Result<f64> {
    if labels.is_empty() {
        if s.is_subnormalized() {
            return Err(Error::Subnormalized);
        }
        return Ok(0.0);
    }
    entropy(&partial_trace(s, labels)?)
}

fn disjoint<S: AsRef<str>>(sets: &[&[S]]) -> Result<()> {
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if let Some(x) = a.iter().find(|x| b.iter().any(|y| y.as_ref() == x.as_ref())) {
                return Err(Error::OverlappingLabels(x.as_ref().to_string()));
            }
        }
    }
    Ok(())
}

fn union<S: AsRef<str>>(sets: &[&[S]]) -> Vec<String> {
    sets.iter()
        .flat_map(|s| s.iter().map(|x| x.as_ref().to_string()))
        .collect()
}

/// `S(A|B) = S(AB) - S(B)`.
pub fn conditional_entropy<S: AsRef<str>>(s: &DensityMatrix, a: &[S], b: &[S]) -> Result<f64> {
    disjoint(&[a, b])?;
    Ok(entropy_of(s, &union(&[a, b]))? - entropy_of(s, b)?)
}

/// `I(A:B) = S(A) + S(B) - S(AB)`.
pub fn mutual_information<S: AsRef<str>>(s: &DensityMatrix, a: &[S], b: &[S]) -> Result<f64> {
    disjoint(&[a, b])?;
    Ok(entropy_of(s, a)? + entropy_of(s, b)? - entropy_of(s, &union(&[a, b]))?)
}

/// `I(A:B|C) = S(AC) + S(BC) - S(ABC) - S(C)`.
pub fn conditional_mutual_information<S: AsRef<str>>(
    s: &DensityMatrix,
    a: &[S],
    b: &[S],
    cond: &[S],
) -> Result<f64> {
    disjoint(&[a, b, cond])?;
    Ok(entropy_of(s, &union(&[a, cond]))? + entropy_of(s, &union(&[b, cond]))?
        - entropy_of(s, &union(&[a, b, cond]))?
        - entropy_of(s, cond)?)
}

/// `‖X‖₁`, the sum of singular values.
pub fn trace_norm(x: &CMatrix) -> Result<f64> {
    if x.nrows() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: x.ncols(),
        });
    }
    Ok(linalg::trace_norm(x))
}

/// `½‖a − b‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(0.5 * linalg::trace_norm(&(a.matrix() - b.matrix())))
}

/// Random state `G G† / Tr[G G†]` from a complex Ginibre `d × rank` matrix.
pub fn random_density(layout: SystemLayout, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let d = layout.dim();
    if rank == 0 || rank > d {
        return Err(Error::RankOutOfRange { rank, dim: d });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(d, rank, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        c(re, im)
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = linalg::hermitize(&m.unscale(tr));
    Ok(DensityMatrix::from_parts(m, layout, false))
}
