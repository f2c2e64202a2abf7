//! Instance families with known equilibrium behaviour, and the two ordering
//! constructions for two machines: a fixed two-group order and an adaptive
//! punishment tree that steers play to the optimum.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::equilibria::PreferRecommended;
use crate::error::{Error, Result};
use crate::instance::{max_load, Instance, PartialSchedule};
use crate::optimum::{constrained_opt, opt, Optimum};
use crate::rational::{int, rat, Rational};
use crate::tree::{AdaptiveTree, PlayerOrder, TreeNode};

/// Five jobs on two machines whose fixed-order equilibrium (ties toward M1)
/// costs `4 - 13 eps` against an optimum of 1. Requires `0 <= eps < 1/13`.
pub fn gen_thm1(eps: &Rational) -> Result<Instance> {
    if *eps < Rational::zero() || *eps >= rat(1, 13) {
        return Err(Error::InvalidArgument(
            "eps must satisfy 0 <= eps < 1/13".into(),
        ));
    }
    let e = |a: i64, b: i64| int(a) - eps * int(b);
    Instance::new(vec![
        vec![e(3, 11), eps.clone(), eps.clone(), e(1, 2), e(2, 8)],
        vec![eps.clone(), e(2, 9), e(2, 8), e(1, 2), e(1, 2)],
    ])
}

/// The `3k - 1` job family whose worst-tie equilibrium has makespan `k + 2`
/// while the optimum is 1. Requires `k >= 2`.
pub fn gen_thm2(k: usize) -> Result<Instance> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must be at least 2"
        )));
    }
    let k = k as i64;
    let mut m1 = Vec::new();
    let mut m2 = Vec::new();
    for t in 0..k - 1 {
        for (a, b) in [(k - t + 1, 0), (0, k - t), (0, k - t)] {
            m1.push(int(a));
            m2.push(int(b));
        }
    }
    for (a, b) in [(1, 1), (2, 1)] {
        m1.push(int(a));
        m2.push(int(b));
    }
    Instance::new(vec![m1, m2])
}

/// Three jobs on three machines with no optimal adaptive order.
/// Requires `0 <= eps < 1`.
pub fn gen_thm5(eps: &Rational) -> Result<Instance> {
    if *eps < Rational::zero() || *eps >= Rational::one() {
        return Err(Error::InvalidArgument(
            "eps must satisfy 0 <= eps < 1".into(),
        ));
    }
    Instance::new(vec![
        vec![int(4) - eps, int(2), int(2)],
        vec![int(4), int(3), int(3)],
        vec![int(6), int(6) - eps, int(6) - eps],
    ])
}

/// Identical machines with initial loads `(0, 2, 6)` and jobs `7, 5, 5`.
pub fn gen_appendix_d() -> Instance {
    Instance::with_initial_loads(
        vec![vec![int(7), int(5), int(5)]; 3],
        vec![int(0), int(2), int(6)],
    )
    .expect("valid constant instance")
}

/// Two jobs, two machines: `M1 = (1, l)`, `M2 = (l, 1)`. Requires `l >= 1`.
pub fn gen_example1(l: &Rational) -> Result<Instance> {
    if *l < Rational::one() {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    Instance::new(vec![vec![int(1), l.clone()], vec![l.clone(), int(1)]])
}

fn require_two_machines(inst: &Instance) -> Result<()> {
    if inst.machines() != 2 {
        return Err(Error::InvalidArgument(format!(
            "construction needs exactly 2 machines, instance has {}",
            inst.machines()
        )));
    }
    Ok(())
}

/// The two job groups of the canonical optimum: the smaller group first
/// (M1's jobs on equal size), each ascending.
pub fn thm3_groups(inst: &Instance) -> Result<(Vec<usize>, Vec<usize>)> {
    require_two_machines(inst)?;
    let o = opt(inst)?;
    let on_m1 = o.schedule.jobs_on(0);
    let on_m2 = o.schedule.jobs_on(1);
    Ok(if on_m2.len() < on_m1.len() {
        (on_m2, on_m1)
    } else {
        (on_m1, on_m2)
    })
}

/// First the smaller optimum group, then the other one.
pub fn thm3_order(inst: &Instance) -> Result<PlayerOrder> {
    let (first, second) = thm3_groups(inst)?;
    PlayerOrder::new(first.into_iter().chain(second).collect())
}

/// How the mover of a punishment-tree node was picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Selection {
    /// No free job sits on the lighter machine; the lowest free job moves.
    Unconstrained,
    /// The lowest free job on the lighter machine, which forced onto the
    /// busier one leaves that machine at or above the current optimum.
    Forced,
    /// A job the forced optimum moves from the busier to the lighter machine.
    Displaced,
    /// The rule's pick would gain by deviating (or none exists), so another
    /// free job or the other optimal machine is used.
    Fallback,
}

/// Annotation of one node of the punishment tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thm4Node {
    pub player: usize,
    pub recommended: usize,
    /// Constrained optimum of the node's history.
    pub optimum: Optimum,
    pub selection: Selection,
}

/// Adaptive tree whose every history carries its constrained optimum and the
/// machine recommended to the node's player.
#[derive(Debug, Clone)]
pub struct Thm4Tree {
    pub tree: AdaptiveTree,
    pub nodes: HashMap<PartialSchedule, Thm4Node>,
}

impl Thm4Tree {
    /// Tie rule that follows the recommendations.
    pub fn rule(&self) -> PreferRecommended {
        PreferRecommended::new(
            self.nodes
                .iter()
                .map(|(h, node)| (h.clone(), node.recommended))
                .collect(),
        )
    }

    pub fn root(&self) -> &Thm4Node {
        &self.nodes[&PartialSchedule::empty(self.tree.jobs())]
    }

    /// Number of nodes whose mover came from the fallback.
    pub fn fallbacks(&self) -> usize {
        self.nodes
            .values()
            .filter(|n| n.selection == Selection::Fallback)
            .count()
    }

    /// Parenthesized preorder with recommendations, e.g. `(J1>M2 . .)`.
    pub fn annotated_preorder(&self) -> String {
        let mut out = String::new();
        self.walk(&mut |event| match event {
            Visit::Leaf => out.push('.'),
            Visit::Enter(node) => {
                out.push_str(&format!("(J{}>M{}", node.player + 1, node.recommended + 1))
            }
            Visit::Child => out.push(' '),
            Visit::Exit => out.push(')'),
        });
        out
    }

    fn walk(&self, visit: &mut dyn FnMut(Visit<'_>)) {
        fn go(
            t: &Thm4Tree,
            node: &TreeNode,
            history: &mut PartialSchedule,
            visit: &mut dyn FnMut(Visit<'_>),
        ) {
            match node {
                TreeNode::Leaf => visit(Visit::Leaf),
                TreeNode::Decision { player, children } => {
                    visit(Visit::Enter(&t.nodes[history]));
                    for (machine, child) in children.iter().enumerate() {
                        visit(Visit::Child);
                        history.set(*player, machine);
                        go(t, child, history, visit);
                        history.unset(*player);
                    }
                    visit(Visit::Exit);
                }
            }
        }
        let mut history = PartialSchedule::empty(self.tree.jobs());
        go(self, self.tree.root(), &mut history, visit);
    }
}

enum Visit<'a> {
    Leaf,
    Enter(&'a Thm4Node),
    Child,
    Exit,
}

/// The selection rule at one history.
///
/// With `hi` the busiest machine of the constrained optimum (lower index on
/// ties) and `lo` the other one: if no free job sits on `lo`, the lowest free
/// job moves. Otherwise take the lowest free job `J'` on `lo` and force it to
/// `hi`; if `hi` then ends at or above the current optimum `J'` moves, else the
/// lowest job that the forced optimum moved from `hi` to `lo` moves.
pub fn thm4_select(inst: &Instance, history: &PartialSchedule) -> Result<Thm4Node> {
    require_two_machines(inst)?;
    let optimum = constrained_opt(inst, history)?;
    let free: Vec<usize> = history.unassigned().collect();
    let first_free = *free
        .first()
        .ok_or_else(|| Error::InvalidArgument("history already assigns every job".into()))?;
    let loads = inst.loads(&optimum.schedule.to_partial())?;
    let hi = if loads[1] > loads[0] { 1 } else { 0 };
    let lo = 1 - hi;
    let machine_of = |job: usize| optimum.schedule.machine_of(job);

    let Some(&forced) = free.iter().find(|&&j| machine_of(j) == lo) else {
        return Ok(Thm4Node {
            player: first_free,
            recommended: machine_of(first_free),
            optimum,
            selection: Selection::Unconstrained,
        });
    };
    let deviated = constrained_opt(inst, &history.with(forced, hi))?;
    let deviated_loads = inst.loads(&deviated.schedule.to_partial())?;
    let (player, selection) = if deviated_loads[hi] >= optimum.makespan {
        (forced, Selection::Forced)
    } else {
        let displaced = *free
            .iter()
            .find(|&&j| deviated.schedule.machine_of(j) == lo && machine_of(j) == hi)
            .ok_or_else(|| {
                Error::Internal(format!(
                    "history {history}: forcing J{} onto M{} leaves M{} below {} but moves no job to M{}",
                    forced + 1,
                    hi + 1,
                    hi + 1,
                    crate::rational::format_rational(&optimum.makespan),
                    lo + 1
                ))
            })?;
        (displaced, Selection::Displaced)
    };
    Ok(Thm4Node {
        player,
        recommended: machine_of(player),
        optimum,
        selection,
    })
}

/// Builds the punishment tree. At every node the rule's pick is kept when
/// following the recommendation costs her no more than deviating, given the
/// play the two subtrees produce; otherwise the lowest free job with that
/// property moves and the node is marked as a fallback. Identical histories
/// reached along different routes share one subtree.
pub fn thm4_tree(inst: &Instance) -> Result<Thm4Tree> {
    build_thm4(inst, true)
}

/// The selection rule alone, without the deviation check.
pub fn thm4_tree_unchecked(inst: &Instance) -> Result<Thm4Tree> {
    build_thm4(inst, false)
}

fn build_thm4(inst: &Instance, checked: bool) -> Result<Thm4Tree> {
    require_two_machines(inst)?;
    let mut builder = Thm4Builder {
        inst,
        checked,
        nodes: HashMap::new(),
        subtrees: HashMap::new(),
    };
    let (root, _) = builder.build(&PartialSchedule::empty(inst.jobs()))?;
    let tree = AdaptiveTree::new(inst.jobs(), 2, root)?;
    let mut result = Thm4Tree {
        tree,
        nodes: builder.nodes,
    };
    // keep only the histories the tree actually contains
    let mut reachable = HashMap::new();
    let mut history = PartialSchedule::empty(inst.jobs());
    collect(
        &result,
        result.tree.root().clone(),
        &mut history,
        &mut reachable,
    );
    result.nodes = reachable;
    Ok(result)
}

fn collect(
    t: &Thm4Tree,
    node: Arc<TreeNode>,
    history: &mut PartialSchedule,
    out: &mut HashMap<PartialSchedule, Thm4Node>,
) {
    if let TreeNode::Decision { player, children } = node.as_ref() {
        out.insert(history.clone(), t.nodes[history].clone());
        for (machine, child) in children.iter().enumerate() {
            history.set(*player, machine);
            collect(t, child.clone(), history, out);
            history.unset(*player);
        }
    }
}

/// Subtree plus the loads its play ends with.
type Built = (
    Arc<TreeNode>,
    Arc<(crate::instance::Schedule, Vec<Rational>)>,
);

struct Thm4Builder<'a> {
    inst: &'a Instance,
    checked: bool,
    nodes: HashMap<PartialSchedule, Thm4Node>,
    subtrees: HashMap<PartialSchedule, Built>,
}

impl Thm4Builder<'_> {
    fn build(&mut self, history: &PartialSchedule) -> Result<Built> {
        if let Some(found) = self.subtrees.get(history) {
            return Ok(found.clone());
        }
        let built = if history.is_complete() {
            let schedule = history.to_schedule().expect("complete history");
            let loads = self.inst.loads(history)?;
            (TreeNode::leaf(), Arc::new((schedule, loads)))
        } else {
            self.decide(history)?
        };
        self.subtrees.insert(history.clone(), built.clone());
        Ok(built)
    }

    fn decide(&mut self, history: &PartialSchedule) -> Result<Built> {
        let rule = match thm4_select(self.inst, history) {
            Ok(node) => Some(node),
            Err(Error::Internal(_)) if self.checked => None,
            Err(e) => return Err(e),
        };
        let optimum = match &rule {
            Some(node) => node.optimum.clone(),
            None => constrained_opt(self.inst, history)?,
        };
        let candidates: Vec<(usize, Selection)> = rule
            .iter()
            .map(|node| (node.player, node.selection))
            .chain(history.unassigned().map(|j| (j, Selection::Fallback)))
            .collect();
        for (player, selection) in candidates {
            let canonical = optimum.schedule.machine_of(player);
            let children = [
                self.build(&history.with(player, 0))?,
                self.build(&history.with(player, 1))?,
            ];
            let cost = |c: usize| children[c].1 .1[c].clone();
            if !self.checked {
                let played = if cost(canonical) <= cost(1 - canonical) {
                    canonical
                } else {
                    1 - canonical
                };
                return Ok(self.finish(
                    history, player, canonical, optimum, selection, &children, played,
                ));
            }
            // the canonical machine first, then any other optimal continuation
            for recommended in [canonical, 1 - canonical] {
                let reaches_optimum = max_load(&children[recommended].1 .1) == optimum.makespan;
                if reaches_optimum && cost(recommended) <= cost(1 - recommended) {
                    let (selection, optimum) = if recommended == canonical {
                        (selection, optimum)
                    } else {
                        let schedule = children[recommended].1 .0.clone();
                        (
                            Selection::Fallback,
                            Optimum {
                                makespan: optimum.makespan,
                                schedule,
                            },
                        )
                    };
                    return Ok(self.finish(
                        history,
                        player,
                        recommended,
                        optimum,
                        selection,
                        &children,
                        recommended,
                    ));
                }
            }
        }
        Err(Error::Internal(format!(
            "history {history}: every free job gains by deviating"
        )))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &mut self,
        history: &PartialSchedule,
        player: usize,
        recommended: usize,
        optimum: Optimum,
        selection: Selection,
        children: &[Built; 2],
        played: usize,
    ) -> Built {
        self.nodes.insert(
            history.clone(),
            Thm4Node {
                player,
                recommended,
                optimum,
                selection,
            },
        );
        let node = TreeNode::decision(player, children.iter().map(|c| c.0.clone()).collect());
        (node, children[played].1.clone())
    }
}

/// One unilateral deviation from the constrained optimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation {
    pub machine: usize,
    /// Constrained optimum with the job forced onto `machine`.
    pub optimum: Optimum,
    pub loads: Vec<Rational>,
    /// The deviating job's cost there.
    pub cost: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobDeviations {
    pub job: usize,
    pub opt_machine: usize,
    pub opt_cost: Rational,
    pub deviations: Vec<Deviation>,
}

impl JobDeviations {
    /// True iff some deviation is strictly cheaper than following the optimum.
    pub fn improves(&self) -> bool {
        self.deviations.iter().any(|d| d.cost < self.opt_cost)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationReport {
    pub optimum: Optimum,
    pub loads: Vec<Rational>,
    pub jobs: Vec<JobDeviations>,
}

impl DeviationReport {
    /// True iff no job is deterred by the punishment argument, i.e. every job
    /// has a strictly improving deviation.
    pub fn every_job_improves(&self) -> bool {
        self.jobs.iter().all(JobDeviations::improves)
    }
}

/// For the empty history: each job's cost in the constrained optimum versus
/// its cost in the constrained optimum after forcing it elsewhere.
pub fn deviation_check(inst: &Instance) -> Result<DeviationReport> {
    let root = PartialSchedule::empty(inst.jobs());
    let optimum = constrained_opt(inst, &root)?;
    let loads = inst.loads(&optimum.schedule.to_partial())?;
    let mut jobs = Vec::new();
    for job in 0..inst.jobs() {
        let opt_machine = optimum.schedule.machine_of(job);
        let mut deviations = Vec::new();
        for machine in (0..inst.machines()).filter(|&i| i != opt_machine) {
            let forced = constrained_opt(inst, &root.with(job, machine))?;
            let forced_loads = inst.loads(&forced.schedule.to_partial())?;
            let cost = forced_loads[machine].clone();
            deviations.push(Deviation {
                machine,
                optimum: forced,
                loads: forced_loads,
                cost,
            });
        }
        jobs.push(JobDeviations {
            job,
            opt_machine,
            opt_cost: loads[opt_machine].clone(),
            deviations,
        });
    }
    Ok(DeviationReport {
        optimum,
        loads,
        jobs,
    })
}

pub fn appendix_d_check() -> Result<DeviationReport> {
    deviation_check(&gen_appendix_d())
}
