use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use super::*;
use crate::constructions::{gen_example1, gen_thm1, gen_thm2, gen_thm5};
use crate::equilibria::{is_pure_nash, replay};
use crate::rational::{int, rat};

fn instance_strategy(max_m: usize, max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        proptest::collection::vec(proptest::collection::vec(0i64..8, n), m).prop_map(|rows| {
            Instance::new(
                rows.into_iter()
                    .map(|r| r.into_iter().map(int).collect())
                    .collect(),
            )
            .unwrap()
        })
    })
}

fn two_machine_strategy(max_n: usize) -> impl Strategy<Value = Instance> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(proptest::collection::vec(0i64..8, n), 2).prop_map(|rows| {
            Instance::new(
                rows.into_iter()
                    .map(|r| r.into_iter().map(int).collect())
                    .collect(),
            )
            .unwrap()
        })
    })
}

fn cost_at(inst: &Instance, leaf: &[usize], player: usize) -> Rational {
    let mut load = inst.initial_loads()[leaf[player]].clone();
    for (job, &machine) in leaf.iter().enumerate() {
        if machine == leaf[player] {
            load += inst.time(machine, job);
        }
    }
    load
}

/// Union over all trees of their outcome sets, one history at a time: an
/// outcome below child `c` survives when, for every other child, some
/// reachable outcome there costs the mover at least as much.
fn reachable(
    inst: &Instance,
    history: &mut Vec<Option<usize>>,
    memo: &mut BTreeMap<Vec<Option<usize>>, BTreeSet<Vec<usize>>>,
) -> BTreeSet<Vec<usize>> {
    if let Some(found) = memo.get(history) {
        return found.clone();
    }
    let free: Vec<usize> = (0..history.len())
        .filter(|&j| history[j].is_none())
        .collect();
    let mut out = BTreeSet::new();
    if free.is_empty() {
        out.insert(history.iter().map(|s| s.unwrap()).collect());
    }
    for &j in &free {
        let children: Vec<BTreeSet<Vec<usize>>> = (0..inst.machines())
            .map(|c| {
                history[j] = Some(c);
                let r = reachable(inst, history, memo);
                history[j] = None;
                r
            })
            .collect();
        let worst: Vec<Rational> = children
            .iter()
            .map(|set| set.iter().map(|o| cost_at(inst, o, j)).max().unwrap())
            .collect();
        for (c, set) in children.iter().enumerate() {
            for o in set {
                let cost = cost_at(inst, o, j);
                if (0..children.len())
                    .filter(|&d| d != c)
                    .all(|d| cost <= worst[d])
                {
                    out.insert(o.clone());
                }
            }
        }
    }
    memo.insert(history.clone(), out.clone());
    out
}

fn reachable_min_makespan(inst: &Instance) -> Rational {
    let all = reachable(inst, &mut vec![None; inst.jobs()], &mut BTreeMap::new());
    all.iter()
        .map(|leaf| inst.makespan(&Schedule::new(leaf.clone())).unwrap())
        .min()
        .unwrap()
}

/// Every valid tree below `free`, in canonical order.
fn all_trees(m: usize, free: &[usize]) -> Vec<Arc<TreeNode>> {
    if free.is_empty() {
        return vec![TreeNode::leaf()];
    }
    let mut trees = Vec::new();
    for (k, &player) in free.iter().enumerate() {
        let rest: Vec<usize> = free
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, &j)| j)
            .collect();
        let subtrees = all_trees(m, &rest);
        let mut pick = vec![0usize; m];
        loop {
            trees.push(TreeNode::decision(
                player,
                pick.iter().map(|&i| subtrees[i].clone()).collect(),
            ));
            let Some(pos) = (0..m).rev().find(|&c| pick[c] + 1 < subtrees.len()) else {
                break;
            };
            pick[pos] += 1;
            for p in &mut pick[pos + 1..] {
                *p = 0;
            }
        }
    }
    trees
}

/// Plain scan over every tree: (first minimizing tree, its best outcome makespan, tree count).
fn naive_adaptive(inst: &Instance) -> (AdaptiveTree, Rational, usize) {
    let free: Vec<usize> = (0..inst.jobs()).collect();
    let trees = all_trees(inst.machines(), &free);
    let count = trees.len();
    let mut best: Option<(AdaptiveTree, Rational)> = None;
    for root in trees {
        let tree = AdaptiveTree::new(inst.jobs(), inst.machines(), root).unwrap();
        let value = spe_outcome_set(inst, &tree)
            .unwrap()
            .best()
            .makespan
            .clone();
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((tree, value));
        }
    }
    let (tree, value) = best.unwrap();
    (tree, value, count)
}

fn assert_witness(inst: &Instance, report: &MeasureReport) {
    let replayed = replay(inst, &report.tree, &report.outcome.path).unwrap();
    assert_eq!(replayed.makespan, report.makespan);
    assert_eq!(
        inst.makespan(&report.outcome.schedule).unwrap(),
        report.makespan
    );
    assert!(spe_outcome_set(inst, &report.tree)
        .unwrap()
        .contains(&report.outcome.schedule));
    assert_eq!(
        report.value,
        Ratio::of(&report.makespan, &report.opt_makespan)
    );
    if let Some(order) = &report.order {
        assert_eq!(order.to_tree(inst.machines()), report.tree);
    }
}

#[test]
fn tree_counts() {
    assert_eq!(adaptive_tree_count(3, 3), BigUint::from(24u32));
    assert_eq!(adaptive_tree_count(4, 2), BigUint::from(576u32));
    assert_eq!(adaptive_tree_count(5, 2), BigUint::from(1_658_880u32));
    for m in 1..5 {
        assert_eq!(adaptive_tree_count(1, m), BigUint::one());
    }
    for (n, m) in [(2, 2), (3, 2), (3, 3), (4, 2), (2, 4)] {
        let free: Vec<usize> = (0..n).collect();
        assert_eq!(
            adaptive_tree_count(n, m),
            BigUint::from(all_trees(m, &free).len())
        );
    }
}

/// The stated instance has an exact tie for the last mover (`6 - eps` on M1
/// and M3 after J1 takes M1), so a favorable tie rule reaches the optimum.
/// Adversarial ties, or a tie-free perturbation of `p11`, give `59/40`.
#[test]
fn thm5_adaptive() {
    let inst = gen_thm5(&rat(1, 10)).unwrap();
    let (_, value, count) = naive_adaptive(&inst);
    assert_eq!(count, 24);
    assert_eq!(value, int(4));
    assert_eq!(reachable_min_makespan(&inst), int(4));
    let best = adaptive_spos(&inst).unwrap();
    assert!(best.value.is_one());
    assert_witness(&inst, &best);

    let worst = adaptive_spos_with(&inst, Ties::Worst, DEFAULT_TREE_BUDGET).unwrap();
    assert_eq!(worst.value, Ratio::Finite(rat(59, 40)));
    assert_eq!(worst.makespan, rat(59, 10));
    assert_witness(&inst, &worst);
    let free: Vec<usize> = (0..3).collect();
    let plain = all_trees(3, &free)
        .into_iter()
        .map(|root| {
            let tree = AdaptiveTree::new(3, 3, root).unwrap();
            spe_outcome_set(&inst, &tree)
                .unwrap()
                .worst()
                .makespan
                .clone()
        })
        .min()
        .unwrap();
    assert_eq!(plain, rat(59, 10));

    let eps = rat(1, 10);
    let perturbed = Instance::new(vec![
        vec![int(4) - &eps / int(2), int(2), int(2)],
        vec![int(4), int(3), int(3)],
        vec![int(6), int(6) - &eps, int(6) - &eps],
    ])
    .unwrap();
    let report = adaptive_spos(&perturbed).unwrap();
    assert_eq!(report.value, Ratio::Finite(rat(59, 40)));
    assert_eq!(naive_adaptive(&perturbed).1, rat(59, 10));
}

#[test]
fn thm1_fixed_order() {
    let inst = gen_thm1(&rat(1, 100)).unwrap();
    let report = spoa_fixed(&inst, &PlayerOrder::identity(5)).unwrap();
    assert_eq!(report.value, Ratio::Finite(rat(387, 100)));
    assert_witness(&inst, &report);
    let best = spos(&inst).unwrap();
    assert!(best.value <= Ratio::Finite(rat(7, 2)));
    assert_witness(&inst, &best);
}

#[test]
fn thm2_fixed_order() {
    let inst = gen_thm2(4).unwrap();
    let report = spoa_fixed(&inst, &PlayerOrder::identity(11)).unwrap();
    assert_eq!(report.value, Ratio::Finite(int(6)));
}

#[test]
fn example1_measures() {
    let inst = gen_example1(&int(5)).unwrap();
    assert!(spos(&inst).unwrap().value.is_one());
    assert!(adaptive_spos(&inst).unwrap().value.is_one());
    let prices = poa_pos(&inst).unwrap().unwrap();
    assert_eq!(
        (prices.poa, prices.pos),
        (Ratio::Finite(int(5)), Ratio::Finite(int(1)))
    );
    assert_eq!(prices.equilibria, 2);
    let prices = poa_pos(&gen_example1(&int(100)).unwrap()).unwrap().unwrap();
    assert_eq!(
        (prices.poa, prices.pos),
        (Ratio::Finite(int(100)), Ratio::Finite(int(1)))
    );
}

#[test]
fn single_job_measures_are_one() {
    let inst = Instance::from_ints(&[&[3], &[2]]).unwrap();
    assert!(spoa_fixed(&inst, &PlayerOrder::identity(1))
        .unwrap()
        .value
        .is_one());
    assert!(spos(&inst).unwrap().value.is_one());
    assert!(adaptive_spos(&inst).unwrap().value.is_one());
    let prices = poa_pos(&inst).unwrap().unwrap();
    assert!(prices.poa.is_one() && prices.pos.is_one());
}

#[test]
fn zero_optimum() {
    let inst = Instance::from_ints(&[&[0, 0], &[0, 0]]).unwrap();
    assert!(spoa_fixed(&inst, &PlayerOrder::identity(2))
        .unwrap()
        .value
        .is_one());
    let loaded =
        Instance::with_initial_loads(vec![vec![int(0)], vec![int(0)]], vec![int(0), int(0)])
            .unwrap();
    assert!(spos(&loaded).unwrap().value.is_one());
}

#[test]
fn limits() {
    let inst = Instance::new(vec![vec![int(1); 8], vec![int(1); 8]]).unwrap();
    assert!(matches!(spos(&inst), Err(Error::TooLarge(_))));
    assert!(matches!(adaptive_spos(&inst), Err(Error::TooLarge(_))));
    let small = Instance::from_ints(&[&[1, 2, 3], &[3, 2, 1]]).unwrap();
    assert!(matches!(
        adaptive_spos_with(&small, Ties::Best, 11),
        Err(Error::TooLarge(_))
    ));
    assert!(adaptive_spos_with(&small, Ties::Best, 12).is_ok());
    assert!(matches!(
        spoa_fixed(&small, &PlayerOrder::identity(2)),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn two_machine_five_jobs_is_optimal() {
    let inst = Instance::from_ints(&[&[3, 7, 2, 5, 4], &[4, 1, 6, 5, 2]]).unwrap();
    let report = adaptive_spos(&inst).unwrap();
    assert!(report.value.is_one());
    assert_witness(&inst, &report);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adaptive_matches_plain_scan(inst in instance_strategy(3, 3)) {
        let report = adaptive_spos(&inst).unwrap();
        let (tree, value, _) = naive_adaptive(&inst);
        prop_assert_eq!(&report.makespan, &value);
        prop_assert_eq!(&report.tree, &tree);
        assert_witness(&inst, &report);
    }

    #[test]
    fn adaptive_matches_reachable_outcomes(inst in instance_strategy(3, 4)) {
        let report = adaptive_spos(&inst).unwrap();
        prop_assert_eq!(&report.makespan, &reachable_min_makespan(&inst));
    }

    #[test]
    fn two_machine_adaptive_is_optimal(inst in two_machine_strategy(4)) {
        prop_assert!(adaptive_spos(&inst).unwrap().value.is_one());
    }

    #[test]
    fn worst_ties_dominate(inst in instance_strategy(3, 3)) {
        let best = adaptive_spos(&inst).unwrap();
        let worst = adaptive_spos_with(&inst, Ties::Worst, DEFAULT_TREE_BUDGET).unwrap();
        prop_assert!(best.value <= worst.value);
        assert_witness(&inst, &worst);
        let fixed = spoa_fixed(&inst, &PlayerOrder::identity(inst.jobs())).unwrap();
        prop_assert!(spos_with(&inst, Ties::Worst, 7).unwrap().value <= fixed.value);
    }

    #[test]
    fn measure_chain(inst in two_machine_strategy(4)) {
        let adaptive = adaptive_spos(&inst).unwrap();
        let ordered = spos(&inst).unwrap();
        let fixed = spoa_fixed(&inst, &PlayerOrder::identity(inst.jobs())).unwrap();
        prop_assert!(adaptive.value <= ordered.value);
        prop_assert!(ordered.value <= fixed.value);
        prop_assert!(Ratio::Finite(int(1)) <= adaptive.value);
        assert_witness(&inst, &ordered);
        assert_witness(&inst, &fixed);
    }

    #[test]
    fn nash_prices(inst in instance_strategy(3, 4)) {
        if let Some(prices) = poa_pos(&inst).unwrap() {
            prop_assert!(Ratio::Finite(int(1)) <= prices.pos);
            prop_assert!(prices.pos <= prices.poa);
            prop_assert!(is_pure_nash(&inst, &prices.best).unwrap());
            prop_assert!(is_pure_nash(&inst, &prices.worst).unwrap());
            prop_assert_eq!(inst.makespan(&prices.best).unwrap(), prices.best_makespan);
        }
    }
}
