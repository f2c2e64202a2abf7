//! Subgame-perfect equilibria by backward induction.
//!
//! [`spe`] resolves exact cost ties with a deterministic [`TieBreakRule`].
//! [`spe_outcome_set`] instead collects every leaf that some arbitrary,
//! history-dependent tie rule can lead to.

mod nash;
pub mod rules;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::instance::{max_load, Instance, PartialSchedule, Schedule};
use crate::rational::Rational;
use crate::tree::{AdaptiveTree, TreeNode};

pub use nash::{is_pure_nash, pure_nash, pure_nash_with_budget};
pub use rules::{
    named_rule, Candidate, PreferHighest, PreferLowest, PreferRecommended, ScriptedRule, Thm2Rule,
    TieBreakRule,
};

/// Default cap on the number of leaves an outcome-set pass may touch
/// (`2^12` for two machines).
pub const DEFAULT_OUTCOME_SET_LEAVES: u64 = 4096;

/// An equilibrium leaf together with everything derived from it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpeOutcome {
    pub schedule: Schedule,
    pub loads: Vec<Rational>,
    pub makespan: Rational,
    /// `costs[j]` is the final load of job `j`'s machine.
    pub costs: Vec<Rational>,
    /// `(player, machine)` moves from the root down to this leaf.
    pub path: Vec<(usize, usize)>,
}

impl SpeOutcome {
    pub(crate) fn at_leaf(
        schedule: Schedule,
        loads: Vec<Rational>,
        path: Vec<(usize, usize)>,
    ) -> Self {
        let costs = schedule
            .as_slice()
            .iter()
            .map(|&i| loads[i].clone())
            .collect();
        SpeOutcome {
            makespan: max_load(&loads),
            schedule,
            loads,
            costs,
            path,
        }
    }

    pub fn cost(&self, player: usize) -> &Rational {
        &self.costs[player]
    }
}

/// Node-visit counters of one backward-induction pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpeStats {
    pub internal_nodes: u64,
    pub leaves: u64,
    pub tie_decisions: u64,
}

/// The move chosen at one internal node, identified by the machine choices
/// leading to it from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDecision {
    pub route: Vec<usize>,
    pub player: usize,
    pub machine: usize,
}

fn check_tree(inst: &Instance, tree: &AdaptiveTree) -> Result<()> {
    if tree.jobs() != inst.jobs() || tree.machines() != inst.machines() {
        return Err(Error::InvalidTree(format!(
            "tree is for {} jobs on {} machines, instance has {} jobs on {} machines",
            tree.jobs(),
            tree.machines(),
            inst.jobs(),
            inst.machines()
        )));
    }
    Ok(())
}

/// The subgame-perfect equilibrium outcome under `rule`.
pub fn spe(inst: &Instance, tree: &AdaptiveTree, rule: &dyn TieBreakRule) -> Result<SpeOutcome> {
    spe_with_stats(inst, tree, rule).map(|(outcome, _)| outcome)
}

pub fn spe_with_stats(
    inst: &Instance,
    tree: &AdaptiveTree,
    rule: &dyn TieBreakRule,
) -> Result<(SpeOutcome, SpeStats)> {
    check_tree(inst, tree)?;
    let mut solver = Solver::new(inst, rule, false);
    let outcome = solver.solve(tree.root())?;
    Ok((outcome, solver.stats))
}

/// Equilibrium outcome plus the decision taken at every internal node, on
/// and off the equilibrium path, in preorder.
pub fn spe_profile(
    inst: &Instance,
    tree: &AdaptiveTree,
    rule: &dyn TieBreakRule,
) -> Result<(SpeOutcome, Vec<NodeDecision>)> {
    check_tree(inst, tree)?;
    let mut solver = Solver::new(inst, rule, true);
    let outcome = solver.solve(tree.root())?;
    Ok((outcome, solver.decisions))
}

struct Solver<'a> {
    inst: &'a Instance,
    rule: &'a dyn TieBreakRule,
    history: PartialSchedule,
    loads: Vec<Rational>,
    path: Vec<(usize, usize)>,
    record: bool,
    decisions: Vec<NodeDecision>,
    stats: SpeStats,
}

impl<'a> Solver<'a> {
    fn new(inst: &'a Instance, rule: &'a dyn TieBreakRule, record: bool) -> Self {
        Solver {
            inst,
            rule,
            history: PartialSchedule::empty(inst.jobs()),
            loads: inst.initial_loads().to_vec(),
            path: Vec::with_capacity(inst.jobs()),
            record,
            decisions: Vec::new(),
            stats: SpeStats::default(),
        }
    }

    fn solve(&mut self, node: &TreeNode) -> Result<SpeOutcome> {
        let (player, children) = match node {
            TreeNode::Leaf => {
                self.stats.leaves += 1;
                let schedule = self
                    .history
                    .to_schedule()
                    .expect("tree covers every player");
                return Ok(SpeOutcome::at_leaf(
                    schedule,
                    self.loads.clone(),
                    self.path.clone(),
                ));
            }
            TreeNode::Decision { player, children } => (*player, children),
        };
        self.stats.internal_nodes += 1;
        let decision_slot = self.decisions.len();
        if self.record {
            let route = self.path.iter().map(|&(_, i)| i).collect();
            self.decisions.push(NodeDecision {
                route,
                player,
                machine: usize::MAX,
            });
        }

        let mut continuations = Vec::with_capacity(children.len());
        for (machine, child) in children.iter().enumerate() {
            let time = self.inst.time(machine, player);
            self.loads[machine] += time;
            self.history.set(player, machine);
            self.path.push((player, machine));
            let result = self.solve(child);
            self.path.pop();
            self.history.unset(player);
            self.loads[machine] -= time;
            continuations.push(result?);
        }

        let best = continuations
            .iter()
            .map(|o| o.cost(player))
            .min()
            .expect("m >= 1")
            .clone();
        let tied: Vec<Candidate<'_>> = continuations
            .iter()
            .enumerate()
            .filter(|(_, o)| *o.cost(player) == best)
            .map(|(machine, outcome)| Candidate { machine, outcome })
            .collect();
        let chosen = if tied.len() == 1 {
            tied[0].machine
        } else {
            self.stats.tie_decisions += 1;
            let pick = self.rule.choose(player, &self.history, &tied);
            if !tied.iter().any(|c| c.machine == pick) {
                return Err(Error::RuleViolation {
                    player: player + 1,
                    machine: pick + 1,
                });
            }
            pick
        };
        if self.record {
            self.decisions[decision_slot].machine = chosen;
        }
        Ok(continuations.swap_remove(chosen))
    }
}

/// Every equilibrium outcome reachable under some arbitrary tie-rule
/// profile, sorted by schedule. Never empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSet {
    outcomes: Vec<Arc<SpeOutcome>>,
}

impl OutcomeSet {
    pub(crate) fn from_sorted(outcomes: Vec<Arc<SpeOutcome>>) -> Self {
        debug_assert!(!outcomes.is_empty());
        OutcomeSet { outcomes }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SpeOutcome> {
        self.outcomes.iter().map(|o| o.as_ref())
    }

    pub fn contains(&self, schedule: &Schedule) -> bool {
        self.outcomes
            .binary_search_by(|o| o.schedule.cmp(schedule))
            .is_ok()
    }

    /// Largest makespan; ties go to the smallest schedule.
    pub fn worst(&self) -> &SpeOutcome {
        self.iter()
            .reduce(|a, b| if b.makespan > a.makespan { b } else { a })
            .expect("outcome sets are nonempty")
    }

    /// Smallest makespan; ties go to the smallest schedule.
    pub fn best(&self) -> &SpeOutcome {
        self.iter()
            .reduce(|a, b| if b.makespan < a.makespan { b } else { a })
            .expect("outcome sets are nonempty")
    }

    pub fn schedules(&self) -> Vec<Schedule> {
        self.iter().map(|o| o.schedule.clone()).collect()
    }
}

pub(crate) fn leaf_count(machines: usize, jobs: usize) -> u64 {
    crate::optimum::completions(machines, jobs)
}

pub fn spe_outcome_set(inst: &Instance, tree: &AdaptiveTree) -> Result<OutcomeSet> {
    spe_outcome_set_with_bound(inst, tree, DEFAULT_OUTCOME_SET_LEAVES)
}

pub fn spe_outcome_set_with_bound(
    inst: &Instance,
    tree: &AdaptiveTree,
    max_leaves: u64,
) -> Result<OutcomeSet> {
    check_tree(inst, tree)?;
    let leaves = leaf_count(inst.machines(), inst.jobs());
    if leaves > max_leaves {
        return Err(Error::TooLarge(format!(
            "outcome set over {leaves} leaves exceeds the bound of {max_leaves}"
        )));
    }
    let mut walk = SetWalk {
        inst,
        history: PartialSchedule::empty(inst.jobs()),
        loads: inst.initial_loads().to_vec(),
        path: Vec::with_capacity(inst.jobs()),
    };
    Ok(OutcomeSet::from_sorted(walk.solve(tree.root())))
}

struct SetWalk<'a> {
    inst: &'a Instance,
    history: PartialSchedule,
    loads: Vec<Rational>,
    path: Vec<(usize, usize)>,
}

impl SetWalk<'_> {
    fn solve(&mut self, node: &TreeNode) -> Vec<Arc<SpeOutcome>> {
        let (player, children) = match node {
            TreeNode::Leaf => {
                let schedule = self
                    .history
                    .to_schedule()
                    .expect("tree covers every player");
                return vec![Arc::new(SpeOutcome::at_leaf(
                    schedule,
                    self.loads.clone(),
                    self.path.clone(),
                ))];
            }
            TreeNode::Decision { player, children } => (*player, children),
        };
        let mut child_sets = Vec::with_capacity(children.len());
        for (machine, child) in children.iter().enumerate() {
            let time = self.inst.time(machine, player);
            self.loads[machine] += time;
            self.history.set(player, machine);
            self.path.push((player, machine));
            child_sets.push(self.solve(child));
            self.path.pop();
            self.history.unset(player);
            self.loads[machine] -= time;
        }
        combine(player, child_sets)
    }
}

/// One node of the outcome-set recursion. An outcome of child `c` can be
/// selected iff, pairing it with the most expensive (for the mover) outcome
/// of every other child, it is an argmin; so its cost must not exceed
/// `min_{c' != c} max cost(V_{c'})`.
pub(crate) fn combine(
    player: usize,
    child_sets: Vec<Vec<Arc<SpeOutcome>>>,
) -> Vec<Arc<SpeOutcome>> {
    let worst: Vec<&Rational> = child_sets
        .iter()
        .map(|set| {
            set.iter()
                .map(|o| o.cost(player))
                .max()
                .expect("nonempty child set")
        })
        .collect();
    let mut merged = Vec::new();
    for (c, set) in child_sets.iter().enumerate() {
        let threshold = worst
            .iter()
            .enumerate()
            .filter(|&(d, _)| d != c)
            .map(|(_, w)| *w)
            .min();
        merged.extend(
            set.iter()
                .filter(|o| threshold.is_none_or(|t| o.cost(player) <= t))
                .cloned(),
        );
    }
    // Children differ in the mover's machine, so their leaves never coincide.
    merged.sort_by(|a, b| a.schedule.cmp(&b.schedule));
    merged
}

/// Replays `outcome.path` through `tree`, checking that the moves match the
/// tree's players, and returns the reached leaf's loads.
pub fn replay(inst: &Instance, tree: &AdaptiveTree, path: &[(usize, usize)]) -> Result<SpeOutcome> {
    check_tree(inst, tree)?;
    let mut node = tree.root().as_ref();
    let mut sched = PartialSchedule::empty(inst.jobs());
    for &(player, machine) in path {
        match node {
            TreeNode::Decision {
                player: p,
                children,
            } if *p == player && machine < children.len() => {
                sched.set(player, machine);
                node = children[machine].as_ref();
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "move J{}->M{} does not match the tree",
                    player + 1,
                    machine + 1
                )))
            }
        }
    }
    if !matches!(node, TreeNode::Leaf) {
        return Err(Error::InvalidArgument("path stops before a leaf".into()));
    }
    let schedule = sched.to_schedule().expect("full path");
    let loads = inst.loads(&sched)?;
    Ok(SpeOutcome::at_leaf(schedule, loads, path.to_vec()))
}
