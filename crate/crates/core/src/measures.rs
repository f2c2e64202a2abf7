//! Inefficiency measures of a single instance.
//!
//! Tie conventions: the fixed-order anarchy ratio takes the worst outcome
//! over arbitrary ties, the two stability ratios the best one.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::equilibria::{
    combine, pure_nash, spe_outcome_set, SpeOutcome, DEFAULT_OUTCOME_SET_LEAVES,
};
use crate::error::{Error, Result};
use crate::instance::{Instance, PartialSchedule, Schedule};
use crate::optimum::opt;
use crate::rational::{Ratio, Rational};
use crate::tree::{permutations, AdaptiveTree, PlayerOrder, TreeNode};

/// Which outcome of a tree's outcome set a stability measure uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Ties {
    /// Ties resolved in favor of the designer (the default).
    #[default]
    Best,
    /// Ties resolved adversarially.
    Worst,
}

impl Ties {
    fn pick<'a>(self, outcomes: impl Iterator<Item = &'a SpeOutcome>) -> &'a SpeOutcome {
        outcomes
            .reduce(|a, b| match self {
                Ties::Best if b.makespan < a.makespan => b,
                Ties::Worst if b.makespan > a.makespan => b,
                _ => a,
            })
            .expect("nonempty outcome set")
    }
}

/// Default job limit for the all-orders enumeration.
pub const DEFAULT_SPOS_MAX_JOBS: usize = 7;

/// Default cap on the number of adaptive trees.
pub const DEFAULT_TREE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureReport {
    /// `makespan / opt_makespan`.
    pub value: Ratio,
    pub makespan: Rational,
    pub opt_makespan: Rational,
    /// The order attaining the value, when the witness is a fixed order.
    pub order: Option<PlayerOrder>,
    pub tree: AdaptiveTree,
    pub outcome: SpeOutcome,
}

impl MeasureReport {
    fn new(
        opt_makespan: Rational,
        order: Option<PlayerOrder>,
        tree: AdaptiveTree,
        outcome: SpeOutcome,
    ) -> Self {
        MeasureReport {
            value: Ratio::of(&outcome.makespan, &opt_makespan),
            makespan: outcome.makespan.clone(),
            opt_makespan,
            order,
            tree,
            outcome,
        }
    }
}

/// Worst outcome over arbitrary ties for a fixed order.
pub fn spoa_fixed(inst: &Instance, order: &PlayerOrder) -> Result<MeasureReport> {
    if order.len() != inst.jobs() {
        return Err(Error::InvalidArgument(format!(
            "order has {} players, instance has {} jobs",
            order.len(),
            inst.jobs()
        )));
    }
    let optimum = opt(inst)?;
    let tree = order.to_tree(inst.machines());
    let set = spe_outcome_set(inst, &tree)?;
    let worst = set.worst().clone();
    Ok(MeasureReport::new(
        optimum.makespan,
        Some(order.clone()),
        tree,
        worst,
    ))
}

pub fn spos(inst: &Instance) -> Result<MeasureReport> {
    spos_with(inst, Ties::Best, DEFAULT_SPOS_MAX_JOBS)
}

/// Best order, each order judged by the outcome `ties` selects. The witness
/// is the first order in lexicographic order attaining the minimum.
pub fn spos_with(inst: &Instance, ties: Ties, max_jobs: usize) -> Result<MeasureReport> {
    if inst.jobs() > max_jobs {
        return Err(Error::TooLarge(format!(
            "{}! orders exceed the limit of {max_jobs} jobs",
            inst.jobs()
        )));
    }
    let optimum = opt(inst)?;
    let orders = permutations(inst.jobs());
    let best = orders
        .par_iter()
        .enumerate()
        .map(|(index, order)| {
            let tree = PlayerOrder::new(order.clone())?.to_tree(inst.machines());
            let set = spe_outcome_set(inst, &tree)?;
            Ok((ties.pick(set.iter()).clone(), index))
        })
        .try_reduce_with(|a, b| {
            Ok(if (&b.0.makespan, b.1) < (&a.0.makespan, a.1) {
                b
            } else {
                a
            })
        })
        .expect("at least one order")?;
    let order = PlayerOrder::new(orders[best.1].clone())?;
    let tree = order.to_tree(inst.machines());
    Ok(MeasureReport::new(
        optimum.makespan,
        Some(order),
        tree,
        best.0,
    ))
}

/// Number of valid adaptive trees: `f(0) = 1`, `f(r) = r * f(r-1)^m`.
pub fn adaptive_tree_count(jobs: usize, machines: usize) -> BigUint {
    let mut count = BigUint::one();
    for r in 1..=jobs {
        count = BigUint::from(r) * num_traits::pow(count, machines);
    }
    count
}

pub fn adaptive_spos(inst: &Instance) -> Result<MeasureReport> {
    adaptive_spos_with(inst, Ties::Best, DEFAULT_TREE_BUDGET)
}

/// Best adaptive tree, each tree judged by the outcome `ties` selects. The
/// witness is the first tree in canonical order (root player ascending, then
/// subtrees in machine order) attaining the minimum.
///
/// Trees are enumerated through their subtrees: at every history only the
/// distinct outcome sets of its subtrees matter to the parent, so one
/// representative per distinct set (the first in canonical order) is kept.
/// The set of a tree is a function of the sets of its children, and
/// combinations are visited in canonical order, so every tree is accounted
/// for and the first minimizer is found exactly.
pub fn adaptive_spos_with(inst: &Instance, ties: Ties, budget: u64) -> Result<MeasureReport> {
    let count = adaptive_tree_count(inst.jobs(), inst.machines());
    if count.to_u64().is_none_or(|c| c > budget) {
        return Err(Error::TooLarge(format!(
            "{count} adaptive trees exceed the budget of {budget}"
        )));
    }
    let leaves = crate::equilibria::leaf_count(inst.machines(), inst.jobs());
    if leaves > DEFAULT_OUTCOME_SET_LEAVES {
        return Err(Error::TooLarge(format!("{leaves} leaves per tree")));
    }
    let optimum = opt(inst)?;
    let mut classes = TreeClasses {
        inst,
        memo: HashMap::new(),
    };
    let root = classes.at(
        &PartialSchedule::empty(inst.jobs()),
        &mut inst.initial_loads().to_vec(),
        &mut Vec::new(),
    );

    let mut best: Option<(&TreeClass, &Rational)> = None;
    for class in root.iter() {
        let candidate = &ties
            .pick(class.outcomes.iter().map(|o| o.as_ref()))
            .makespan;
        if best.is_none_or(|(_, b)| candidate < b) {
            best = Some((class, candidate));
        }
    }
    let (class, _) = best.expect("at least one tree");
    let tree = AdaptiveTree::new(inst.jobs(), inst.machines(), class.tree.clone())?;
    // shared leaves carry the path of whichever order reached them first
    let set = spe_outcome_set(inst, &tree)?;
    let outcome = ties.pick(set.iter()).clone();
    Ok(MeasureReport::new(optimum.makespan, None, tree, outcome))
}

struct TreeClass {
    outcomes: Vec<Arc<SpeOutcome>>,
    tree: Arc<TreeNode>,
}

struct TreeClasses<'a> {
    inst: &'a Instance,
    memo: HashMap<PartialSchedule, Arc<Vec<TreeClass>>>,
}

impl TreeClasses<'_> {
    fn at(
        &mut self,
        history: &PartialSchedule,
        loads: &mut Vec<Rational>,
        path: &mut Vec<(usize, usize)>,
    ) -> Arc<Vec<TreeClass>> {
        if let Some(found) = self.memo.get(history) {
            return found.clone();
        }
        let free: Vec<usize> = history.unassigned().collect();
        let result = if free.is_empty() {
            let schedule = history.to_schedule().expect("complete");
            let leaf = SpeOutcome::at_leaf(schedule, loads.clone(), path.clone());
            vec![TreeClass {
                outcomes: vec![Arc::new(leaf)],
                tree: TreeNode::leaf(),
            }]
        } else {
            let mut found: Vec<TreeClass> = Vec::new();
            let mut seen: HashMap<Vec<Schedule>, ()> = HashMap::new();
            for &player in &free {
                let mut child_classes = Vec::with_capacity(self.inst.machines());
                for machine in 0..self.inst.machines() {
                    let time = self.inst.time(machine, player).clone();
                    loads[machine] += &time;
                    path.push((player, machine));
                    child_classes.push(self.at(&history.with(player, machine), loads, path));
                    path.pop();
                    loads[machine] -= &time;
                }
                // odometer over child class choices, first child most significant
                let mut pick = vec![0usize; child_classes.len()];
                loop {
                    let sets = pick
                        .iter()
                        .zip(&child_classes)
                        .map(|(&k, classes)| classes[k].outcomes.clone())
                        .collect();
                    let outcomes = combine(player, sets);
                    let key: Vec<Schedule> = outcomes.iter().map(|o| o.schedule.clone()).collect();
                    if seen.insert(key, ()).is_none() {
                        let children = pick
                            .iter()
                            .zip(&child_classes)
                            .map(|(&k, c)| c[k].tree.clone())
                            .collect();
                        found.push(TreeClass {
                            outcomes,
                            tree: TreeNode::decision(player, children),
                        });
                    }
                    let Some(pos) = (0..pick.len())
                        .rev()
                        .find(|&c| pick[c] + 1 < child_classes[c].len())
                    else {
                        break;
                    };
                    pick[pos] += 1;
                    for p in &mut pick[pos + 1..] {
                        *p = 0;
                    }
                }
            }
            found
        };
        let result = Arc::new(result);
        self.memo.insert(history.clone(), result.clone());
        result
    }
}

/// Worst and best pure Nash equilibria relative to the optimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NashPrices {
    pub poa: Ratio,
    pub pos: Ratio,
    pub worst: Schedule,
    pub worst_makespan: Rational,
    pub best: Schedule,
    pub best_makespan: Rational,
    pub opt_makespan: Rational,
    pub equilibria: usize,
}

/// `None` when the instance has no pure Nash equilibrium.
pub fn poa_pos(inst: &Instance) -> Result<Option<NashPrices>> {
    let optimum = opt(inst)?;
    let equilibria = pure_nash(inst)?;
    let mut scored = Vec::with_capacity(equilibria.len());
    for s in &equilibria {
        scored.push((inst.makespan(s)?, s));
    }
    let Some(worst) = scored.iter().reduce(|a, b| if b.0 > a.0 { b } else { a }) else {
        return Ok(None);
    };
    let best = scored
        .iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("nonempty");
    Ok(Some(NashPrices {
        poa: Ratio::of(&worst.0, &optimum.makespan),
        pos: Ratio::of(&best.0, &optimum.makespan),
        worst: worst.1.clone(),
        worst_makespan: worst.0.clone(),
        best: best.1.clone(),
        best_makespan: best.0.clone(),
        opt_makespan: optimum.makespan,
        equilibria: equilibria.len(),
    }))
}

#[cfg(test)]
mod tests;
