//! End-to-end use of the public API: text instances in, reports out.

use seqsched_core::constructions::{gen_thm1, gen_thm5, thm4_tree};
use seqsched_core::equilibria::{replay, spe, spe_outcome_set, PreferLowest};
use seqsched_core::lpsearch::{round_trip, search, SearchOptions};
use seqsched_core::measures::{adaptive_spos, spoa_fixed, spos};
use seqsched_core::optimum::opt;
use seqsched_core::rational::{int, rat};
use seqsched_core::tree::{AdaptiveTree, PlayerOrder};
use seqsched_core::{Instance, Ratio};

const THREE_JOBS: &str = "\
# two machines, three jobs
2 3
3 1 2
1 3 2
";

#[test]
fn text_instance_through_every_solver() {
    let inst = Instance::parse(THREE_JOBS).unwrap();
    assert_eq!(Instance::parse(&inst.to_text()).unwrap(), inst);

    let optimum = opt(&inst).unwrap();
    assert_eq!(optimum.makespan, int(3));

    let order = PlayerOrder::parse("1,2,3").unwrap();
    let tree = order.to_tree(2);
    let set = spe_outcome_set(&inst, &tree).unwrap();
    let chosen = spe(&inst, &tree, &PreferLowest).unwrap();
    assert!(set.contains(&chosen.schedule));
    assert_eq!(replay(&inst, &tree, &chosen.path).unwrap().schedule, chosen.schedule);

    let anarchy = spoa_fixed(&inst, &order).unwrap();
    let stability = spos(&inst).unwrap();
    let adaptive = adaptive_spos(&inst).unwrap();
    assert_eq!(anarchy.makespan, set.worst().makespan);
    assert!(adaptive.value <= stability.value && stability.value <= anarchy.value);
}

#[test]
fn witness_trees_survive_their_text_form() {
    let inst = gen_thm5(&rat(1, 10)).unwrap();
    let report = adaptive_spos(&inst).unwrap();
    let text = report.tree.preorder();
    let parsed = AdaptiveTree::parse_preorder(&text, inst.jobs(), inst.machines()).unwrap();
    assert_eq!(parsed, report.tree);
    let set = spe_outcome_set(&inst, &parsed).unwrap();
    assert_eq!(set.best().makespan, report.makespan);
}

#[test]
fn construction_tree_on_the_anarchy_instance() {
    let inst = gen_thm1(&rat(1, 100)).unwrap();
    let built = thm4_tree(&inst).unwrap();
    let outcome = spe(&inst, &built.tree, &built.rule()).unwrap();
    assert_eq!(outcome.makespan, opt(&inst).unwrap().makespan);
    let fixed = spoa_fixed(&inst, &PlayerOrder::identity(5)).unwrap();
    assert_eq!(fixed.value, Ratio::Finite(rat(387, 100)));
}

#[test]
fn search_witnesses_are_genuine_instances() {
    let report = search(3, &SearchOptions::default()).unwrap();
    let best = report.best.as_ref().unwrap();
    assert_eq!(best.value, int(3));
    for candidate in &report.improvements {
        assert!(round_trip(candidate).unwrap());
        let text = candidate.witness.to_text();
        assert_eq!(Instance::parse(&text).unwrap(), candidate.witness);
    }
}
