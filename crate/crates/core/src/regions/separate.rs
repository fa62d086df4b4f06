use super::region::RateTuple;
use super::set_function::{members, Mask, SetFunction};
use crate::error::{Error, Result};
use crate::lp::{feasible_point, BoundedRow};

fn popcount(m: Mask) -> f64 {
    m.count_ones() as f64
}

/// Subset with the smallest `f − g` and that margin.
fn tightest(f: &SetFunction, g: &SetFunction) -> (Mask, f64) {
    (1..=f.full_mask())
        .map(|m| (m, f.get(m) - g.get(m)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
}

/// Finds `R` with `g(A) ≤ Σ_{s∈A} R_s ≤ f(A)` for every nonempty `A`
/// (strictly, when `strict`), for submodular `f` and supermodular `g`.
///
/// Strict mode shrinks the sandwich by `|A|·Δ` on each side with
/// `Δ = min_A (f(A) − g(A)) / (2|A|)` and solves the non-strict problem,
/// which leaves a margin of at least `|A|·Δ` on both sides.
pub fn separate(f: &SetFunction, g: &SetFunction, strict: bool) -> Result<RateTuple> {
    if f.z_count() != g.z_count() {
        return Err(Error::DimensionMismatch {
            expected: f.z_count(),
            found: g.z_count(),
        });
    }
    let (worst, gap) = tightest(f, g);
    if gap < 0.0 || (strict && gap <= 0.0) {
        return Err(Error::Infeasible {
            subset: members(worst),
            message: format!("g(A) − f(A) = {:e} leaves no room", -gap),
        });
    }
    let delta = if strict {
        (1..=f.full_mask())
            .map(|m| (f.get(m) - g.get(m)) / (2.0 * popcount(m)))
            .fold(f64::INFINITY, f64::min)
    } else {
        0.0
    };

    let z = f.z_count();
    let rows: Vec<BoundedRow> = (1..=f.full_mask())
        .map(|m| BoundedRow {
            coeffs: (0..z).map(|s| if m >> s & 1 == 1 { 1.0 } else { 0.0 }).collect(),
            lower: g.get(m) + popcount(m) * delta,
            upper: f.get(m) - popcount(m) * delta,
        })
        .collect();
    let x = feasible_point(&rows, z).ok_or_else(|| Error::Infeasible {
        subset: members(worst),
        message: "no separating vector; f may not be submodular or g not supermodular".into(),
    })?;
    let r = RateTuple(x);

    for m in 1..=f.full_mask() {
        let s = r.subset_sum(m);
        let (lo, hi) = (s - g.get(m), f.get(m) - s);
        let ok = if strict {
            lo > 0.0 && hi > 0.0
        } else {
            lo >= -1e-9 && hi >= -1e-9
        };
        if !ok {
            return Err(Error::Infeasible {
                subset: members(m),
                message: format!("solver output misses the sandwich by {:e}", lo.min(hi)),
            });
        }
    }
    Ok(r)
}

/// Rate splitting: for `r` strictly inside `Ĉ − D̂`, finds `d` strictly
/// above `D̂` with `d + r` strictly below `Ĉ`, and returns `(c, d)` with
/// `c_z = d_z + r_z`.
pub fn rate_split(
    r: &RateTuple,
    chat: &SetFunction,
    dhat: &SetFunction,
) -> Result<(RateTuple, RateTuple)> {
    let z = chat.z_count();
    if r.len() != z || dhat.z_count() != z {
        return Err(Error::DimensionMismatch {
            expected: z,
            found: if r.len() != z { r.len() } else { dhat.z_count() },
        });
    }
    let upper = chat.map(|m, v| v - r.subset_sum(m))?;
    let (worst, gap) = tightest(&upper, dhat);
    if gap <= 0.0 {
        return Err(Error::NotInterior {
            subset: members(worst),
            margin: gap,
        });
    }
    let d = separate(&upper, dhat, true)?;
    let c = RateTuple(d.0.iter().zip(&r.0).map(|(d, r)| d + r).collect());
    Ok((c, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::SetFunction;

    #[test]
    fn modular_sandwich_is_forced() {
        let f = SetFunction::modular(&[0.5, 1.25, -0.75]).unwrap();
        let r = separate(&f, &f, false).unwrap();
        for (a, b) in r.0.iter().zip([0.5, 1.25, -0.75]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn strict_separation_inside_superdense_pair() {
        let f = SetFunction::from_table(2, vec![0.0, 2.0, 2.0, 4.0]).unwrap();
        let g = SetFunction::from_table(2, vec![0.0; 4]).unwrap();
        let r = separate(&f, &g, true).unwrap();
        let (r1, r2) = (r.0[0], r.0[1]);
        assert!(0.0 < r1 && r1 < 2.0 && 0.0 < r2 && r2 < 2.0 && 0.0 < r1 + r2 && r1 + r2 < 4.0);
    }

    #[test]
    fn zero_margin_is_infeasible_in_strict_mode() {
        let f = SetFunction::from_table(2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let g = SetFunction::from_table(2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        match separate(&f, &g, true) {
            Err(Error::Infeasible { subset, .. }) => assert_eq!(subset, vec![1]),
            other => panic!("{other:?}"),
        }
        assert!(separate(&f, &g, false).is_ok());
    }

    #[test]
    fn split_superdense_pair() {
        let chat = SetFunction::from_table(2, vec![0.0, 2.0, 2.0, 4.0]).unwrap();
        let dhat = SetFunction::from_table(2, vec![0.0; 4]).unwrap();
        let r = RateTuple(vec![1.5, 1.5]);
        let (c, d) = rate_split(&r, &chat, &dhat).unwrap();
        for m in 1..4u32 {
            assert!(c.subset_sum(m) < chat.get(m));
            assert!(d.subset_sum(m) > dhat.get(m));
        }
        for z in 0..2 {
            assert_eq!(c.0[z], d.0[z] + r.0[z]);
        }
    }

    #[test]
    fn split_rejects_boundary() {
        let chat = SetFunction::from_table(2, vec![0.0, 2.0, 2.0, 4.0]).unwrap();
        let dhat = SetFunction::from_table(2, vec![0.0; 4]).unwrap();
        match rate_split(&RateTuple(vec![1.0, 3.0]), &chat, &dhat) {
            Err(Error::NotInterior { subset, .. }) => assert_eq!(subset, vec![2]),
            other => panic!("{other:?}"),
        }
        let chat = SetFunction::from_table(2, vec![0.0, 2.0, 2.0, 3.0]).unwrap();
        match rate_split(&RateTuple(vec![1.5, 1.5]), &chat, &dhat) {
            Err(Error::NotInterior { subset, margin }) => {
                assert_eq!(margin, 0.0);
                assert_eq!(subset, vec![1, 2]);
            }
            other => panic!("{other:?}"),
        }
    }
}
