//! Structural analyzers: intersecting and cross-intersecting predicates,
//! matching numbers, sunflowers, and the decomposition of a family around a
//! kernel.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::clique::{max_clique, CliqueQuery, Graph};
use crate::error::{Error, Result};
use crate::setcore::{Family, GroundParams, KSet};

/// Result of a pairwise predicate: either it holds, or the
/// lexicographically least failing pair of member indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum PairCheck {
    Ok,
    Witness { first: usize, second: usize },
}

impl PairCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, PairCheck::Ok)
    }
}

/// Every pair of distinct members meets in at least `t` elements.
pub fn is_t_intersecting(family: &Family, t: u32) -> PairCheck {
    let sets = family.members();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if sets[i].intersection_size(sets[j]) < t {
                return PairCheck::Witness {
                    first: i,
                    second: j,
                };
            }
        }
    }
    PairCheck::Ok
}

/// Every `A ∈ a`, `B ∈ b` meet in at least `r` elements. The families may
/// have different set sizes but must share the ground set.
pub fn is_cross_intersecting(a: &Family, b: &Family, r: u32) -> Result<PairCheck> {
    if a.params().n() != b.params().n() {
        return Err(Error::param(format!(
            "ground sets differ: n = {} vs n = {}",
            a.params().n(),
            b.params().n()
        )));
    }
    for (i, &x) in a.members().iter().enumerate() {
        for (j, &y) in b.members().iter().enumerate() {
            if x.intersection_size(y) < r {
                return Ok(PairCheck::Witness {
                    first: i,
                    second: j,
                });
            }
        }
    }
    Ok(PairCheck::Ok)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Matching {
    pub nu: usize,
    /// Lexicographically least maximum set of pairwise disjoint members.
    pub witness: Vec<usize>,
}

fn disjointness_graph(sets: &[KSet]) -> Graph {
    Graph::from_fn(sets.len(), |i, j| sets[i].is_disjoint(sets[j]))
}

/// Maximum number of pairwise disjoint members.
pub fn matching_number(family: &Family) -> Matching {
    let sets = family.members();
    if sets.is_empty() {
        return Matching {
            nu: 0,
            witness: Vec::new(),
        };
    }
    let graph = disjointness_graph(sets);
    let seed = graph.greedy_clique().len();
    let out = max_clique(
        &graph,
        &CliqueQuery {
            target: seed,
            ..Default::default()
        },
    );
    let witness = out.best.expect("the greedy matching is attainable");
    Matching {
        nu: witness.len(),
        witness,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sunflower {
    pub kernel: KSet,
    pub member_indices: Vec<usize>,
    pub petal_count: usize,
}

impl Sunflower {
    /// Every pair of indexed members intersects in exactly the kernel.
    pub fn verify(&self, family: &Family) -> bool {
        let sets: Vec<KSet> = match self.member_indices.iter().map(|&i| family.get(i)).collect() {
            Some(s) => s,
            None => return false,
        };
        self.petal_count == sets.len()
            && sets.iter().all(|s| s.contains_all(self.kernel))
            && sets.iter().enumerate().all(|(i, a)| {
                sets[i + 1..]
                    .iter()
                    .all(|b| a.intersection(*b) == self.kernel)
            })
    }
}

/// Cap on `|F| * C(k, t)` when indexing candidate kernels.
const KERNEL_INDEX_CAP: u64 = 50_000_000;

/// Finds a sunflower with a kernel of exactly `t` elements and `u` petals,
/// trying kernels in lexicographic order. Only `t`-subsets of members that
/// lie in at least `u` members are considered.
pub fn find_sunflower(family: &Family, t: u32, u: usize) -> Result<Option<Sunflower>> {
    let k = family.params().k();
    if t >= k {
        return Err(Error::param(format!(
            "kernel size t = {t} must be below k = {k}"
        )));
    }
    if u == 0 || family.len() < u {
        return Ok(None);
    }
    let per_member = crate::setcore::binomial_u64(k as u64, t as i64);
    if per_member.saturating_mul(family.len() as u64) > KERNEL_INDEX_CAP {
        return Err(Error::CapExceeded {
            what: "kernel index",
            required: (per_member as u128 * family.len() as u128).into(),
            cap: KERNEL_INDEX_CAP,
        });
    }

    let mut by_kernel: HashMap<KSet, Vec<usize>> = HashMap::new();
    for (i, &m) in family.members().iter().enumerate() {
        let elements = m.to_vec();
        for_each_subset(&elements, t as usize, |kernel| {
            by_kernel.entry(kernel).or_default().push(i)
        });
    }
    let mut kernels: Vec<(KSet, Vec<usize>)> = by_kernel
        .into_iter()
        .filter(|(_, v)| v.len() >= u)
        .collect();
    kernels.sort_unstable_by_key(|(kernel, _)| *kernel);

    for (kernel, holders) in kernels {
        let residuals: Vec<KSet> = holders
            .iter()
            .map(|&i| family.members()[i].difference(kernel))
            .collect();
        let out = max_clique(
            &disjointness_graph(&residuals),
            &CliqueQuery {
                target: u,
                stop_at_target: true,
                ..Default::default()
            },
        );
        if let Some(petals) = out.best {
            let sunflower = Sunflower {
                kernel,
                member_indices: petals.iter().map(|&p| holders[p]).collect(),
                petal_count: petals.len(),
            };
            debug_assert!(sunflower.verify(family));
            return Ok(Some(sunflower));
        }
    }
    Ok(None)
}

fn for_each_subset(elements: &[u32], size: usize, mut f: impl FnMut(KSet)) {
    fn rec(elements: &[u32], size: usize, start: usize, acc: KSet, f: &mut impl FnMut(KSet)) {
        if size == 0 {
            f(acc);
            return;
        }
        for i in start..=elements.len() - size {
            rec(elements, size - 1, i + 1, acc.with(elements[i]), f);
        }
    }
    if size <= elements.len() {
        rec(elements, size, 0, KSet::EMPTY, &mut f);
    }
}

/// A family split around a kernel `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub kernel: KSet,
    /// Members containing `T`.
    pub f_t: Family,
    /// For each `a ∈ T`, members containing `T - {a}` but not `a`.
    pub f_minus: BTreeMap<u32, Family>,
    /// Members meeting `T` in fewer than `|T| - 1` elements.
    pub leftover: Family,
}

impl Decomposition {
    pub fn total(&self) -> usize {
        self.f_t.len() + self.f_minus.values().map(Family::len).sum::<usize>() + self.leftover.len()
    }

    /// The parts are disjoint, cover `family`, and each member sits in the
    /// part its intersection with the kernel dictates.
    pub fn verify(&self, family: &Family) -> bool {
        let t = self.kernel.len();
        let placed_ok = self
            .f_t
            .members()
            .iter()
            .all(|m| m.contains_all(self.kernel))
            && self.f_minus.iter().all(|(&a, part)| {
                let rest = self.kernel.without(a);
                part.members()
                    .iter()
                    .all(|m| m.contains_all(rest) && !m.contains(a))
            })
            && self
                .leftover
                .members()
                .iter()
                .all(|m| m.intersection_size(self.kernel) + 1 < t);
        let mut all: Vec<KSet> = self.f_t.members().to_vec();
        for part in self.f_minus.values() {
            all.extend_from_slice(part.members());
        }
        all.extend_from_slice(self.leftover.members());
        all.sort_unstable();
        placed_ok && all == family.members()
    }
}

pub fn kernel_decompose(family: &Family, kernel: KSet) -> Result<Decomposition> {
    let t = kernel.len();
    if t == 0 {
        return Err(Error::param("kernel must be non-empty"));
    }
    if kernel.bits() & !family.params().ground_mask() != 0 {
        return Err(Error::param(format!(
            "kernel {kernel} is not inside the ground set"
        )));
    }
    let f_minus = kernel
        .elements()
        .map(|a| {
            let rest = kernel.without(a);
            (a, family.filter(|m| m.contains_all(rest) && !m.contains(a)))
        })
        .collect();
    Ok(Decomposition {
        kernel,
        f_t: family.filter(|m| m.contains_all(kernel)),
        f_minus,
        leftover: family.filter(|m| m.intersection_size(kernel) + 1 < t),
    })
}

/// One lemma check: `passed`, and on failure the member indices (into the
/// audited family) that break it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub required: u32,
    pub passed: bool,
    pub witness: Option<Vec<usize>>,
}

impl LemmaCheck {
    fn new(name: &'static str, required: u32, witness: Option<Vec<usize>>) -> Self {
        LemmaCheck {
            name,
            required,
            passed: witness.is_none(),
            witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum AuditCase {
    /// A sunflower with `2k + ℓ - 2` petals and a `t`-element kernel exists.
    Sunflower {
        kernel: Vec<u32>,
        member_indices: Vec<usize>,
    },
    /// No such sunflower; the lemmas do not apply.
    NoSunflower,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub t: u32,
    pub ell: u32,
    pub petals_required: usize,
    #[serde(flatten)]
    pub case: AuditCase,
    /// Sizes of `F(T)`, each `F(T - {a}, ā)` and the leftover part.
    pub decomposition: Option<DecompositionSizes>,
    pub checks: Vec<LemmaCheck>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionSizes {
    pub f_t: usize,
    pub f_minus: BTreeMap<u32, usize>,
    pub leftover: usize,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Errors when a check failed; meant for families known to satisfy the
    /// weakened condition, where a failure means a bug.
    pub fn ensure_passed(&self) -> Result<()> {
        match self.checks.iter().find(|c| !c.passed) {
            None => Ok(()),
            Some(c) => Err(Error::param(format!(
                "lemma check `{}` failed with witness {:?}",
                c.name, c.witness
            ))),
        }
    }
}

/// Locates a sunflower with kernel size `t` and `2k + ℓ - 2` petals and, if
/// one exists, checks around its kernel `T` that
/// 1. every member meets `T` in at least `t - 1` elements;
/// 2. each `F(T - {a}, ā)` is `(t + ℓ - 3)`-intersecting;
/// 3. for `a ≠ b` the residuals `F(T - {a}, ā) - T` and `F(T - {b}, b̄) - T`
///    are `(ℓ - 1)`-cross-intersecting.
pub fn lemma_audit(family: &Family, t: u32, ell: u32) -> Result<AuditReport> {
    let k = family.params().k();
    if t == 0 || ell < 3 {
        return Err(Error::param(format!(
            "audit needs t >= 1 and ell >= 3, got t = {t}, ell = {ell}"
        )));
    }
    let petals_required = (2 * k + ell - 2) as usize;
    let mut report = AuditReport {
        t,
        ell,
        petals_required,
        case: AuditCase::NoSunflower,
        decomposition: None,
        checks: Vec::new(),
    };
    if t >= k {
        return Ok(report);
    }
    let Some(sunflower) = find_sunflower(family, t, petals_required)? else {
        return Ok(report);
    };
    let kernel = sunflower.kernel;
    report.case = AuditCase::Sunflower {
        kernel: kernel.to_vec(),
        member_indices: sunflower.member_indices.clone(),
    };

    let meeting = family
        .members()
        .iter()
        .position(|m| m.intersection_size(kernel) + 1 < t)
        .map(|i| vec![i]);
    report
        .checks
        .push(LemmaCheck::new("kernel_meeting", t - 1, meeting));

    let decomposition = kernel_decompose(family, kernel)?;
    let to_host =
        |part: &Family, i: usize| family.index_of(part.members()[i]).expect("part of family");

    let depth = t + ell - 3;
    let mut residual_witness = None;
    for part in decomposition.f_minus.values() {
        if let PairCheck::Witness { first, second } = is_t_intersecting(part, depth) {
            residual_witness = Some(vec![to_host(part, first), to_host(part, second)]);
            break;
        }
    }
    report.checks.push(LemmaCheck::new(
        "residual_intersecting",
        depth,
        residual_witness,
    ));

    let residual_params = GroundParams::new(family.params().n(), k - t + 1)?;
    let residuals: Vec<(&Family, Family)> = decomposition
        .f_minus
        .values()
        .map(|part| {
            let members = part
                .members()
                .iter()
                .map(|m| m.difference(kernel))
                .collect();
            (part, Family::new(residual_params, members))
        })
        .map(|(part, r)| r.map(|r| (part, r)))
        .collect::<Result<_>>()?;
    let mut cross_witness = None;
    'pairs: for (x, (part_a, res_a)) in residuals.iter().enumerate() {
        for (part_b, res_b) in &residuals[x + 1..] {
            if let PairCheck::Witness { first, second } =
                is_cross_intersecting(res_a, res_b, ell - 1)?
            {
                // residual order matches part order: both are sorted the same way
                let a_member = part_a
                    .members()
                    .iter()
                    .find(|m| m.difference(kernel) == res_a.members()[first]);
                let b_member = part_b
                    .members()
                    .iter()
                    .find(|m| m.difference(kernel) == res_b.members()[second]);
                let idx = |m: Option<&KSet>| {
                    family
                        .index_of(*m.expect("residual comes from part"))
                        .expect("member")
                };
                cross_witness = Some(vec![idx(a_member), idx(b_member)]);
                break 'pairs;
            }
        }
    }
    report.checks.push(LemmaCheck::new(
        "residual_cross_intersecting",
        ell - 1,
        cross_witness,
    ));

    report.decomposition = Some(DecompositionSizes {
        f_t: decomposition.f_t.len(),
        f_minus: decomposition
            .f_minus
            .iter()
            .map(|(&a, p)| (a, p.len()))
            .collect(),
        leftover: decomposition.leftover.len(),
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{construct_star, construct_sunflower, construct_thm6};
    use crate::setcore::{binomial_u64, enumerate_ksets};

    fn family(n: u32, sets: &[&[u32]]) -> Family {
        let k = sets[0].len() as u32;
        Family::new(
            GroundParams::new(n, k).unwrap(),
            sets.iter().map(|s| KSet::from_elements(s)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn t_intersecting_examples() {
        assert!(is_t_intersecting(&construct_star(7, 3, 2).unwrap(), 2).is_ok());
        let f = family(6, &[&[1, 2, 3], &[4, 5, 6]]);
        assert_eq!(
            is_t_intersecting(&f, 1),
            PairCheck::Witness {
                first: 0,
                second: 1
            }
        );
        // group B of the (9,4,2,3) construction: members without element 1
        let b = construct_thm6(9, 4, 2, 3)
            .unwrap()
            .filter(|m| !m.contains(1));
        assert!(b.len() > 1);
        assert!(is_t_intersecting(&b, 2).is_ok());
        assert!(!is_t_intersecting(&b, 3).is_ok());
    }

    #[test]
    fn cross_intersecting_examples() {
        let a = family(4, &[&[1, 2, 3]]);
        let b = family(4, &[&[1, 2, 4]]);
        assert!(is_cross_intersecting(&a, &b, 2).unwrap().is_ok());
        assert_eq!(
            is_cross_intersecting(&a, &b, 3).unwrap(),
            PairCheck::Witness {
                first: 0,
                second: 0
            }
        );
        let other = family(5, &[&[1, 2, 4]]);
        assert!(is_cross_intersecting(&a, &other, 1).is_err());

        // self-cross: pairs plus self-pairs of size k
        let s = construct_star(6, 3, 2).unwrap();
        assert!(is_cross_intersecting(&s, &s, 2).unwrap().is_ok());
        assert!(!is_cross_intersecting(&s, &s, 3).unwrap().is_ok());
    }

    #[test]
    fn matching_examples() {
        let all = Family::new(
            GroundParams::new(6, 3).unwrap(),
            enumerate_ksets(GroundParams::new(6, 3).unwrap(), 100).unwrap(),
        )
        .unwrap();
        assert_eq!(matching_number(&all).nu, 2);
        assert_eq!(matching_number(&construct_star(7, 3, 1).unwrap()).nu, 1);
        let f = family(7, &[&[1, 2, 3], &[4, 5, 6], &[1, 4, 7]]);
        let m = matching_number(&f);
        assert_eq!((m.nu, m.witness), (2, vec![0, 2]));
    }

    #[test]
    fn sets_meeting_an_interval_have_small_matchings() {
        for n in 6..=10u32 {
            for k in 2..=3u32 {
                for ell in 2..=4u32 {
                    let p = GroundParams::new(n, k).unwrap();
                    let hit = KSet::interval(1, ell - 1);
                    let members: Vec<KSet> = enumerate_ksets(p, 10_000)
                        .unwrap()
                        .into_iter()
                        .filter(|m| !m.is_disjoint(hit))
                        .collect();
                    let f = Family::new(p, members).unwrap();
                    let expected = binomial_u64(n as u64, k as i64)
                        - binomial_u64((n - ell + 1) as u64, k as i64);
                    assert_eq!(f.len() as u64, expected);
                    assert!(matching_number(&f).nu <= (ell - 1) as usize);
                }
            }
        }
    }

    #[test]
    fn sunflower_examples() {
        let f = family(7, &[&[1, 2, 3], &[1, 4, 5], &[1, 6, 7], &[2, 4, 6]]);
        let s = find_sunflower(&f, 1, 3).unwrap().unwrap();
        assert_eq!(s.kernel, KSet::from_elements(&[1]));
        assert_eq!(s.member_indices, vec![0, 1, 2]);
        assert!(s.verify(&f));

        let disjoint = family(9, &[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        assert_eq!(find_sunflower(&disjoint, 1, 2).unwrap(), None);
        // empty kernel: pairwise disjoint members
        assert_eq!(
            find_sunflower(&disjoint, 0, 3)
                .unwrap()
                .unwrap()
                .petal_count,
            3
        );

        let built = construct_sunflower(13, 4, 2, 5).unwrap();
        let s = find_sunflower(&built, 2, 5).unwrap().unwrap();
        assert_eq!(s.kernel, KSet::interval(1, 2));
        assert_eq!(s.petal_count, 5);
        assert!(find_sunflower(&built, 4, 1).is_err());
    }

    #[test]
    fn sunflower_requires_exact_kernel() {
        // {1,2,3},{1,2,4},{1,5,6}: pairwise intersections {1,2},{1},{1}
        let f = family(6, &[&[1, 2, 3], &[1, 2, 4], &[1, 5, 6]]);
        assert_eq!(find_sunflower(&f, 1, 3).unwrap(), None);
        let s = find_sunflower(&f, 1, 2).unwrap().unwrap();
        assert_eq!(s.member_indices, vec![0, 2]);
    }

    #[test]
    fn decompose_examples() {
        let f = family(6, &[&[1, 2, 3], &[1, 2, 4], &[1, 3, 5], &[2, 3, 6]]);
        let d = kernel_decompose(&f, KSet::from_elements(&[1, 2])).unwrap();
        assert_eq!(
            d.f_t.members(),
            &[
                KSet::from_elements(&[1, 2, 3]),
                KSet::from_elements(&[1, 2, 4])
            ]
        );
        assert_eq!(d.f_minus[&1].members(), &[KSet::from_elements(&[2, 3, 6])]);
        assert_eq!(d.f_minus[&2].members(), &[KSet::from_elements(&[1, 3, 5])]);
        assert!(d.leftover.is_empty());
        assert!(d.verify(&f));
        assert_eq!(d.total(), f.len());

        let star = construct_star(7, 3, 2).unwrap();
        let d = kernel_decompose(&star, KSet::interval(1, 2)).unwrap();
        assert_eq!(d.f_t, star);
        assert!(d.f_minus.values().all(Family::is_empty) && d.leftover.is_empty());

        let far = family(8, &[&[4, 5, 6], &[6, 7, 8]]);
        let d = kernel_decompose(&far, KSet::interval(1, 2)).unwrap();
        assert_eq!(d.leftover, far);
        assert!(d.verify(&far));
        assert!(kernel_decompose(&far, KSet::EMPTY).is_err());
    }

    #[test]
    fn audit_on_construction() {
        let f = construct_thm6(12, 4, 2, 3).unwrap();
        // 2k + ℓ - 2 = 9 petals of size 2 need 20 elements; n = 12 is Case 2
        let r = lemma_audit(&f, 2, 3).unwrap();
        assert_eq!(r.case, AuditCase::NoSunflower);

        let big = construct_thm6(20, 4, 2, 3).unwrap();
        let r = lemma_audit(&big, 2, 3).unwrap();
        assert_eq!(
            match &r.case {
                AuditCase::Sunflower { kernel, .. } => kernel.clone(),
                _ => panic!("expected a sunflower"),
            },
            vec![1, 2]
        );
        assert_eq!(r.checks.len(), 3);
        r.ensure_passed().unwrap();
        let sizes = r.decomposition.unwrap();
        assert_eq!(
            sizes.f_t + sizes.f_minus.values().sum::<usize>() + sizes.leftover,
            big.len()
        );
        assert_eq!(sizes.leftover, 0);
    }

    #[test]
    fn audit_reports_failures_without_asserting() {
        // a large sunflower plus one member far from its kernel
        let mut members = construct_sunflower(40, 3, 2, 10).unwrap().into_members();
        members.push(KSet::from_elements(&[30, 31, 32]));
        let f = Family::new(GroundParams::new(40, 3).unwrap(), members).unwrap();
        let r = lemma_audit(&f, 2, 3).unwrap();
        assert!(!r.all_passed());
        assert_eq!(r.checks[0].witness, Some(vec![f.len() - 1]));
        assert!(r.ensure_passed().is_err());
    }
}
