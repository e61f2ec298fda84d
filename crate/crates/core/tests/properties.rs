use ekrf_core::conditions::{
    check_condition, min_pairsum, min_pairsum_exhaustive, min_pairsum_value, ConditionSpec, Variant,
};
use ekrf_core::constructions::{construct_star, construct_thm6};
use ekrf_core::search::{incremental_feasible, max_family, SearchOptions, SearchState};
use ekrf_core::setcore::enumerate_ksets;
use ekrf_core::structure::{
    find_sunflower, kernel_decompose, lemma_audit, matching_number, AuditCase,
};
use ekrf_core::{Family, GroundParams, KSet};
use proptest::prelude::*;
use proptest::sample::subsequence;

/// A family drawn from the k-subsets of [n], with n <= 8.
fn small_family(max_members: usize) -> impl Strategy<Value = Family> {
    (4u32..=8, 2u32..=4)
        .prop_filter("k < n", |(n, k)| k < n)
        .prop_flat_map(move |(n, k)| {
            let params = GroundParams::new(n, k).unwrap();
            let all = enumerate_ksets(params, 1 << 12).unwrap();
            let hi = all.len().min(max_members);
            subsequence(all, 0..=hi).prop_map(move |m| Family::new(params, m).unwrap())
        })
}

fn spec_for(ell: u32, variant: Variant, t: u32) -> ConditionSpec {
    match variant {
        Variant::Pairwise => ConditionSpec::pairwise(t).unwrap(),
        _ => ConditionSpec::new(t, ell, variant, 0).unwrap(),
    }
}

fn variant() -> impl Strategy<Value = (u32, Variant, u32)> {
    prop_oneof![
        (3u32..=4).prop_map(|l| (l, Variant::Eq2, 1)),
        (3u32..=4, 1u32..=2).prop_map(|(l, t)| (l, Variant::Eq3, t)),
        (3u32..=4, 1u32..=2).prop_map(|(l, t)| (l, Variant::Eq4, t)),
        (1u32..=2).prop_map(|t| (2, Variant::Pairwise, t)),
    ]
}

fn brute_matching(family: &Family) -> usize {
    let sets = family.members();
    let m = sets.len();
    (0u32..1 << m)
        .filter(|mask| {
            let picked: Vec<KSet> = (0..m)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| sets[i])
                .collect();
            picked
                .iter()
                .enumerate()
                .all(|(i, a)| picked[i + 1..].iter().all(|b| a.is_disjoint(*b)))
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn removing_members_keeps_a_condition(family in small_family(30), (ell, v, t) in variant(), keep in any::<u64>()) {
        let spec = spec_for(ell, v, t);
        if check_condition(&family, &spec).unwrap().is_satisfied() {
            let kept: Vec<usize> = (0..family.len()).filter(|i| keep >> (i % 64) & 1 == 1).collect();
            let sub = family.subfamily(&kept).unwrap();
            prop_assert!(check_condition(&sub, &spec).unwrap().is_satisfied());
        }
    }

    #[test]
    fn violations_are_genuine(family in small_family(30), (ell, v, t) in variant()) {
        if let Some(bad) = check_condition(&family, &spec_for(ell, v, t)).unwrap().violation() {
            prop_assert!(bad.verify(&family));
        }
    }

    #[test]
    fn stronger_threshold_implies_weaker(family in small_family(30), ell in 3u32..=4, t in 1u32..=2) {
        let eq3 = ConditionSpec::new(t, ell, Variant::Eq3, 0).unwrap();
        let eq4 = ConditionSpec::new(t, ell, Variant::Eq4, 0).unwrap();
        if check_condition(&family, &eq3).unwrap().is_satisfied() {
            prop_assert!(check_condition(&family, &eq4).unwrap().is_satisfied());
        }
    }

    #[test]
    fn checker_agrees_with_enumeration(family in small_family(15), ell in 3u32..=5) {
        prop_assume!(family.len() >= ell as usize);
        let fast = min_pairsum(&family, ell).unwrap();
        let slow = min_pairsum_exhaustive(&family, ell).unwrap();
        prop_assert_eq!(&fast, &slow);
        prop_assert_eq!(min_pairsum_value(&family, ell).unwrap(), slow.value);
    }

    #[test]
    fn matching_number_is_exact(family in small_family(15)) {
        let m = matching_number(&family);
        prop_assert_eq!(m.nu, brute_matching(&family));
        prop_assert_eq!(m.witness.len(), m.nu);
        let sets: Vec<KSet> = m.witness.iter().map(|&i| family.members()[i]).collect();
        prop_assert!(sets.iter().enumerate().all(|(i, a)| sets[i + 1..].iter().all(|b| a.is_disjoint(*b))));
    }

    #[test]
    fn decomposition_partitions_the_family(family in small_family(40), kernel in subsequence(vec![1u32, 2, 3, 4], 1..=3)) {
        let d = kernel_decompose(&family, KSet::from_elements(&kernel)).unwrap();
        prop_assert_eq!(d.total(), family.len());
        prop_assert!(d.verify(&family));
    }

    #[test]
    fn sunflowers_found_are_sunflowers(family in small_family(40), t in 0u32..=1, u in 2usize..=4) {
        prop_assume!(t < family.params().k());
        if let Some(s) = find_sunflower(&family, t, u).unwrap() {
            prop_assert!(s.verify(&family));
            prop_assert_eq!(s.petal_count, u);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // subfamilies of a family satisfying the weakened condition still do
    #[test]
    fn audit_passes_on_construction_subfamilies(drop in proptest::collection::vec(any::<bool>(), 0..200)) {
        let base = construct_thm6(20, 4, 2, 3).unwrap();
        let kept: Vec<usize> = (0..base.len()).filter(|&i| !drop.get(i).copied().unwrap_or(false)).collect();
        let family = base.subfamily(&kept).unwrap();
        let report = lemma_audit(&family, 2, 3).unwrap();
        prop_assert!(report.all_passed(), "{:?}", report.checks);
    }

    #[test]
    fn search_certificates(n in 5u32..=7, (ell, v, t) in variant()) {
        let params = GroundParams::new(n, 3).unwrap();
        let spec = spec_for(ell, v, t);
        let opts = SearchOptions { time_limit: 20.0, ..Default::default() };
        let r = max_family(params, &spec, &opts).unwrap();
        prop_assert_eq!(r.size, r.best.len());
        prop_assert!(r.bound >= r.size as u64);
        prop_assert!(check_condition(&r.best, &spec).unwrap().is_satisfied());
    }
}

#[test]
fn search_does_not_depend_on_thread_count() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let spec = ConditionSpec::new(1, 3, Variant::Eq3, 0).unwrap();
                max_family(
                    GroundParams::new(7, 3).unwrap(),
                    &spec,
                    &SearchOptions::default(),
                )
                .unwrap()
            })
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.best, b.best);
    assert!(a.optimal && b.optimal);
}

#[test]
fn checker_does_not_depend_on_thread_count() {
    let family = construct_thm6(12, 4, 1, 4).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| min_pairsum(&family, 4).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn larger_threshold_never_allows_more_sets() {
    for n in 5..=7 {
        let params = GroundParams::new(n, 3).unwrap();
        let size = |v| {
            let spec = ConditionSpec::new(1, 3, v, 0).unwrap();
            let r = max_family(params, &spec, &SearchOptions::default()).unwrap();
            assert!(r.optimal);
            r.size
        };
        assert!(size(Variant::Eq3) <= size(Variant::Eq4), "n = {n}");
    }
}

#[test]
fn incremental_feasibility_examples() {
    let spec = ConditionSpec::new(1, 3, Variant::Eq4, 0).unwrap();
    let set = |e: &[u32]| KSet::from_elements(e);

    let empty = SearchState::new(spec);
    assert!(incremental_feasible(&empty, set(&[1, 2, 3])));

    let mut disjoint = SearchState::new(spec);
    assert!(disjoint.push(set(&[1, 2, 3])));
    assert!(disjoint.push(set(&[4, 5, 6])));
    assert!(!incremental_feasible(&disjoint, set(&[7, 8, 9])));
    assert!(incremental_feasible(&disjoint, set(&[1, 4, 7])));

    // every prefix of the construction extends by its next member
    let family = construct_thm6(10, 4, 1, 3).unwrap();
    let mut state = SearchState::new(spec);
    for &m in family.members() {
        assert!(incremental_feasible(&state, m));
        assert!(state.push(m));
    }
    assert_eq!(state.len(), family.len());
}

#[test]
fn star_audit_sees_the_whole_kernel() {
    let star = construct_star(6, 2, 1).unwrap();
    let report = lemma_audit(&star, 1, 3).unwrap();
    assert!(matches!(&report.case, AuditCase::Sunflower { kernel, .. } if kernel == &[1]));
    assert!(report.all_passed());
    let kernel_check = report
        .checks
        .iter()
        .find(|c| c.name == "kernel_meeting")
        .unwrap();
    assert!(kernel_check.passed);
    let d = kernel_decompose(&star, KSet::from_elements(&[1])).unwrap();
    assert_eq!(d.f_t.len(), star.len());
}
