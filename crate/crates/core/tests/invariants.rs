use proptest::prelude::*;

use qmap_core::protocols::rng::{stream, Purpose};
use qmap_core::protocols::{
    flat_index, pgm_with_diagnostics, random_effect, random_subnormalized, randomize, sample_family, unflatten,
    union_bound_check, Budget, FamilyKind, COMPLETENESS_TOL,
};
use qmap_core::qstate::{entropy, entropy_of, partial_trace, random_density, trace_distance, SystemLayout};
use qmap_core::regions::{
    chat_from_state, check_set_function_properties, dhat_from_state, members, membership, polymatroid_vertices,
    rate_split, RateRegion, Direction, PropertyKind, RateTuple,
};

fn layout(dims: &[usize]) -> SystemLayout {
    SystemLayout::new(dims.iter().enumerate().map(|(i, &d)| (format!("X{i}"), d))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn entropy_within_bounds(seed: u64, d in 2usize..6, rank_pick in 0usize..6) {
        let rank = 1 + rank_pick % d;
        let rho = random_density(layout(&[d]), rank, seed).unwrap();
        let s = entropy(&rho).unwrap();
        prop_assert!(s >= -1e-12);
        prop_assert!(s <= (rank as f64).log2() + 1e-9);
    }

    #[test]
    fn partial_trace_keeps_trace_and_subadditivity(seed: u64, a in 2usize..4, b in 2usize..4) {
        let rho = random_density(layout(&[a, b]), a * b, seed).unwrap();
        let ra = partial_trace(&rho, &["X0"]).unwrap();
        prop_assert!((ra.trace() - 1.0).abs() < 1e-12);
        let sab = entropy(&rho).unwrap();
        let sa = entropy_of(&rho, &["X0"]).unwrap();
        let sb = entropy_of(&rho, &["X1"]).unwrap();
        prop_assert!(sa + sb >= sab - 1e-9);
        prop_assert!((sab - sa).abs() <= sb + 1e-9);
    }

    #[test]
    fn trace_distance_is_a_metric_on_states(s1: u64, s2: u64, s3: u64) {
        let l = layout(&[3]);
        let (x, y, z) = (
            random_density(l.clone(), 3, s1).unwrap(),
            random_density(l.clone(), 2, s2).unwrap(),
            random_density(l, 1, s3).unwrap(),
        );
        let dxy = trace_distance(&x, &y).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&dxy));
        prop_assert!((dxy - trace_distance(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!(dxy <= trace_distance(&x, &z).unwrap() + trace_distance(&z, &y).unwrap() + 1e-12);
    }

    #[test]
    fn chat_polymatroid_dhat_superadditive(seed: u64, rank in 1usize..17) {
        let rho = random_density(
            SystemLayout::new([("A1", 2), ("A2", 2), ("B", 2), ("E", 2)]).unwrap(), rank, seed).unwrap();
        let chat = chat_from_state(&rho, &["A1", "A2"], &["B", "E"]).unwrap();
        let dhat = dhat_from_state(&rho, &["A1", "A2"], &["E"]).unwrap();
        prop_assert!(check_set_function_properties(&chat, PropertyKind::SubadditiveMonotone).passed);
        prop_assert!(check_set_function_properties(&dhat, PropertyKind::Superadditive).passed);
        let region = RateRegion::from_set_function(&chat, Direction::Le);
        for v in polymatroid_vertices(&chat).unwrap() {
            prop_assert!(membership(&region, &v, 1e-9).unwrap().member);
        }
    }

    #[test]
    fn rate_split_sandwich(seed: u64, frac in 0.05f64..0.95) {
        let rho = random_density(
            SystemLayout::new([("A1", 2), ("A2", 2), ("B", 2), ("E", 2)]).unwrap(), 3, seed).unwrap();
        let chat = chat_from_state(&rho, &["A1", "A2"], &["B", "E"]).unwrap();
        let dhat = dhat_from_state(&rho, &["A1", "A2"], &["E"]).unwrap();
        let room = (1..4u32)
            .map(|m| (chat.get(m) - dhat.get(m)) / members(m).len() as f64)
            .fold(f64::INFINITY, f64::min);
        prop_assume!(room > 1e-6);
        let r = RateTuple(vec![frac * room; 2]);
        let (c, d) = rate_split(&r, &chat, &dhat).unwrap();
        for m in 1..4u32 {
            prop_assert!(d.subset_sum(m) > dhat.get(m));
            prop_assert!(c.subset_sum(m) < chat.get(m));
        }
    }

    #[test]
    fn pgm_is_complete(seed: u64, k in 1usize..7) {
        let states: Vec<_> = (0..k)
            .map(|i| random_density(layout(&[4]), 1 + i % 4, seed ^ i as u64).unwrap().into_matrix())
            .collect();
        let priors = vec![1.0 / k as f64; k];
        let (povm, diag) = pgm_with_diagnostics(&states, &priors).unwrap();
        prop_assert_eq!(povm.len(), k);
        prop_assert!(diag.completeness_residual <= COMPLETENESS_TOL);
        let s = povm.success(&states, &priors);
        prop_assert!(s >= 1.0 / k as f64 - 1e-9 && s <= 1.0 + 1e-9);
    }

    #[test]
    fn union_bound_holds(seed: u64, j in 1usize..5, d in 2usize..7) {
        let mut rng = stream(seed, Purpose::Auxiliary, &[j as u64, d as u64]);
        let rho = random_subnormalized(d, &mut rng).unwrap();
        let lambdas: Vec<_> = (0..j).map(|_| random_effect(d, &mut rng)).collect();
        let out = union_bound_check(&lambdas, &rho).unwrap();
        prop_assert!(out.holds && out.agrees);
    }

    #[test]
    fn full_pauli_twirl_decouples(seed: u64, rank in 1usize..5) {
        let rho = random_density(SystemLayout::new([("A1", 2), ("E", 2)]).unwrap(), rank, seed).unwrap();
        let f = sample_family(1, 1, 4, 2, FamilyKind::Pauli, seed, 0).unwrap();
        let (_, distance) = randomize(&rho, &["A1"], 1, &[f], Budget::default()).unwrap();
        prop_assert!(distance < 1e-10);
    }

    #[test]
    fn haar_randomization_never_increases_distance_to_two(seed: u64, l in 1usize..6) {
        let rho = random_density(SystemLayout::new([("A1", 2), ("E", 2)]).unwrap(), 2, seed).unwrap();
        let f = sample_family(1, 1, l, 2, FamilyKind::Haar, seed, 0).unwrap();
        let (bar, distance) = randomize(&rho, &["A1"], 1, &[f], Budget::default()).unwrap();
        prop_assert!(distance <= 2.0 + 1e-12);
        let e_before = partial_trace(&rho, &["E"]).unwrap();
        let e_after = partial_trace(&bar, &["E_1"]).unwrap();
        prop_assert!(qmap_core::qstate::linalg::max_abs_diff(e_before.matrix(), e_after.matrix()) < 1e-12);
    }

    #[test]
    fn flat_index_round_trips(radices in proptest::collection::vec(1usize..6, 1..4), pick: u64) {
        let total: usize = radices.iter().product();
        let idx = (pick % total as u64) as usize;
        let digits = unflatten(idx, &radices);
        prop_assert_eq!(flat_index(&digits, &radices), idx);
        prop_assert!(digits.iter().zip(&radices).all(|(d, r)| d < r));
    }
}
