//! LP-driven search for bad two-machine instances under a fixed order.
//!
//! For every equilibrium structure and every choice of optimum leaf, the
//! processing times become LP variables: the structure's decisions turn
//! into linear best-response constraints, the optimum leaf's loads are
//! capped at 1, and the equilibrium makespan is maximized. Variable
//! `i * n + j` is the time of job `j` on machine `i`.

mod simplex;
mod structure;

use rayon::prelude::*;

pub use simplex::{simplex_solve, LpProblem, LpResult, LpStatus};
pub use structure::{
    count_structures, enumerate_structures, internal_nodes, is_extreme_leaf, leaf_of,
    leaf_schedule, leaves, monotone_patterns, node_of, obs1_consistent, EnumerationOptions,
    StructureStream, TreeStructure, MAX_JOBS,
};

use num_traits::{One, Zero};

use crate::equilibria::{spe_outcome_set, spe_profile, TieBreakRule};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::Rational;
use crate::tree::PlayerOrder;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum TieMode {
    /// The chosen branch costs the mover at most as much as the other one.
    #[default]
    Weak,
    /// The chosen branch is cheaper by at least the given margin.
    Strict(Rational),
}

/// Coefficients of `machine`'s load at `leaf`.
fn load_expr(jobs: usize, leaf: usize, machine: usize) -> Vec<Rational> {
    let schedule = leaf_schedule(jobs, leaf);
    let mut row = vec![Rational::zero(); 2 * jobs];
    for (job, &m) in schedule.as_slice().iter().enumerate() {
        if m == machine {
            row[machine * jobs + job] = Rational::one();
        }
    }
    row
}

/// Coefficients of `player`'s cost at `leaf`.
fn cost_expr(jobs: usize, leaf: usize, player: usize) -> Vec<Rational> {
    load_expr(jobs, leaf, leaf_schedule(jobs, leaf).machine_of(player))
}

pub fn build_lp(
    structure: &TreeStructure,
    opt_leaf: usize,
    objective_machine: usize,
    tie_mode: &TieMode,
) -> Result<LpProblem> {
    let n = structure.jobs();
    if opt_leaf >= leaves(n) || is_extreme_leaf(n, opt_leaf) {
        return Err(Error::InvalidArgument(format!(
            "optimum leaf {opt_leaf} is extreme or out of range"
        )));
    }
    if opt_leaf == structure.equilibrium_leaf() {
        return Err(Error::InvalidArgument(format!(
            "optimum leaf {opt_leaf} is the equilibrium leaf"
        )));
    }
    if objective_machine > 1 {
        return Err(Error::InvalidArgument(
            "objective machine must be 0 or 1".into(),
        ));
    }
    let bound = match tie_mode {
        TieMode::Weak => Rational::zero(),
        TieMode::Strict(eps) => -eps.clone(),
    };
    let mut lp = LpProblem::new(
        2 * n,
        load_expr(n, structure.equilibrium_leaf(), objective_machine),
    );
    for node in 0..internal_nodes(n) {
        let player = structure::depth_of(node);
        let chosen = structure.leaf_below(2 * node + 1 + structure.choice(node));
        let other = structure.leaf_below(2 * node + 2 - structure.choice(node));
        let row = cost_expr(n, chosen, player)
            .into_iter()
            .zip(cost_expr(n, other, player))
            .map(|(a, b)| a - b)
            .collect();
        lp.add_row(row, bound.clone());
    }
    for machine in 0..2 {
        lp.add_row(load_expr(n, opt_leaf, machine), Rational::one());
    }
    Ok(lp)
}

/// Optimum leaves a search considers for a structure, ascending.
pub fn admissible_opt_leaves(structure: &TreeStructure) -> Vec<usize> {
    let n = structure.jobs();
    let eq = structure.equilibrium_leaf();
    (0..leaves(n))
        .filter(|&l| l != eq && !is_extreme_leaf(n, l))
        .collect()
}

/// LP point as a two-machine instance.
pub fn point_to_instance(jobs: usize, point: &[Rational]) -> Result<Instance> {
    Instance::new(vec![point[..jobs].to_vec(), point[jobs..2 * jobs].to_vec()])
}

/// Structure of the identity-order equilibrium of a two-machine instance.
pub fn structure_from_spe(inst: &Instance, rule: &dyn TieBreakRule) -> Result<TreeStructure> {
    if inst.machines() != 2 {
        return Err(Error::InvalidArgument(
            "structures need exactly 2 machines".into(),
        ));
    }
    let tree = PlayerOrder::identity(inst.jobs()).to_tree(2);
    let (_, decisions) = spe_profile(inst, &tree, rule)?;
    let mut bits = 0u64;
    for d in decisions {
        bits |= (d.machine as u64) << node_of(&d.route);
    }
    TreeStructure::new(inst.jobs(), bits)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub value: Rational,
    /// Stream position of the structure.
    pub position: u64,
    pub structure: TreeStructure,
    pub opt_leaf: usize,
    pub objective_machine: usize,
    pub point: Vec<Rational>,
    pub witness: Instance,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnboundedLp {
    pub position: u64,
    pub structure: TreeStructure,
    pub opt_leaf: usize,
    pub objective_machine: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    pub enumeration: EnumerationOptions,
    pub tie_mode: TieMode,
    /// `(i, k)`: only stream positions congruent to `i` modulo `k`.
    pub shard: (u64, u64),
    /// Stream position to start from.
    pub cursor: u64,
    /// Stop after this many structures and report where to resume.
    pub max_structures: Option<u64>,
    /// Examine only this structure (filters off), optionally at one leaf.
    pub only: Option<(TreeStructure, Option<usize>)>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            enumeration: EnumerationOptions::default(),
            tie_mode: TieMode::Weak,
            shard: (0, 1),
            cursor: 0,
            max_structures: None,
            only: None,
        }
    }
}

/// Examples of unbounded LPs kept in a report.
pub const UNBOUNDED_EXAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SearchReport {
    pub best: Option<Candidate>,
    /// Every strict improvement, in stream order.
    pub improvements: Vec<Candidate>,
    pub unbounded_count: u64,
    pub unbounded: Vec<UnboundedLp>,
    pub infeasible_count: u64,
    pub structures: u64,
    pub lps: u64,
    /// Where to resume when the structure budget ran out.
    pub next_cursor: Option<u64>,
}

#[derive(Default)]
struct StructureOutcome {
    best: Option<Candidate>,
    unbounded: Vec<UnboundedLp>,
    infeasible: u64,
    lps: u64,
}

fn evaluate(
    position: u64,
    structure: TreeStructure,
    leaves: &[usize],
    tie_mode: &TieMode,
) -> Result<StructureOutcome> {
    let mut out = StructureOutcome::default();
    for &leaf in leaves {
        for machine in 0..2 {
            let lp = build_lp(&structure, leaf, machine, tie_mode)?;
            let result = simplex_solve(&lp);
            out.lps += 1;
            match result.status {
                LpStatus::Infeasible => out.infeasible += 1,
                LpStatus::Unbounded => out.unbounded.push(UnboundedLp {
                    position,
                    structure,
                    opt_leaf: leaf,
                    objective_machine: machine,
                }),
                LpStatus::Optimal => {
                    let value = result.value.expect("optimal value");
                    if out.best.as_ref().is_none_or(|b| value > b.value) {
                        let point = result.point.expect("optimal point");
                        out.best = Some(Candidate {
                            witness: point_to_instance(structure.jobs(), &point)?,
                            value,
                            position,
                            structure,
                            opt_leaf: leaf,
                            objective_machine: machine,
                            point,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Structures handed to the worker pool at once.
const CHUNK: usize = 512;

pub fn search(jobs: usize, options: &SearchOptions) -> Result<SearchReport> {
    search_with(jobs, options, &mut |_| {})
}

/// Search, calling `on_improvement` for every strict improvement in stream
/// order. Equal values keep the earlier structure, then the smaller leaf,
/// then M1. Results do not depend on the number of worker threads.
pub fn search_with(
    jobs: usize,
    options: &SearchOptions,
    on_improvement: &mut dyn FnMut(&Candidate),
) -> Result<SearchReport> {
    let (shard, shards) = options.shard;
    if shards == 0 || shard >= shards {
        return Err(Error::InvalidArgument(format!(
            "bad shard {shard}/{shards}"
        )));
    }
    if let TieMode::Strict(eps) = &options.tie_mode {
        if *eps <= Rational::zero() {
            return Err(Error::InvalidArgument(
                "strict margin must be positive".into(),
            ));
        }
    }
    let mut report = SearchReport::default();
    if let Some((structure, leaf)) = &options.only {
        if structure.jobs() != jobs {
            return Err(Error::InvalidArgument(
                "restricted structure has the wrong depth".into(),
            ));
        }
        let leaves = match leaf {
            Some(l) => vec![*l],
            None => admissible_opt_leaves(structure),
        };
        let out = evaluate(0, *structure, &leaves, &options.tie_mode)?;
        merge(&mut report, out, on_improvement);
        report.structures = 1;
        return Ok(report);
    }

    let mut stream = enumerate_structures(jobs, options.enumeration)?.starting_at(options.cursor);
    let budget = options.max_structures.unwrap_or(u64::MAX);
    loop {
        let mut chunk = Vec::with_capacity(CHUNK);
        while chunk.len() < CHUNK && report.structures + (chunk.len() as u64) < budget {
            match stream.next() {
                Some((position, s)) if position % shards == shard => chunk.push((position, s)),
                Some(_) => {}
                None => break,
            }
        }
        if chunk.is_empty() {
            break;
        }
        let outcomes: Vec<Result<StructureOutcome>> = chunk
            .par_iter()
            .map(|&(position, s)| {
                evaluate(position, s, &admissible_opt_leaves(&s), &options.tie_mode)
            })
            .collect();
        report.structures += chunk.len() as u64;
        for out in outcomes {
            merge(&mut report, out?, on_improvement);
        }
        if report.structures >= budget {
            // resume after the last structure examined, if anything is left
            let mut rest = stream.clone();
            if rest.any(|(position, _)| position % shards == shard) {
                report.next_cursor = Some(stream.position());
            }
            break;
        }
    }
    Ok(report)
}

fn merge(
    report: &mut SearchReport,
    out: StructureOutcome,
    on_improvement: &mut dyn FnMut(&Candidate),
) {
    report.lps += out.lps;
    report.infeasible_count += out.infeasible;
    report.unbounded_count += out.unbounded.len() as u64;
    let room = UNBOUNDED_EXAMPLES.saturating_sub(report.unbounded.len());
    report
        .unbounded
        .extend(out.unbounded.into_iter().take(room));
    if let Some(c) = out.best {
        if report.best.as_ref().is_none_or(|b| c.value > b.value) {
            on_improvement(&c);
            report.improvements.push(c.clone());
            report.best = Some(c);
        }
    }
}

/// Checks a candidate against the equilibrium solver: the identity-order
/// outcome set of the witness contains the structure's equilibrium leaf,
/// its makespan is at least the LP value, and the optimum leaf's loads are
/// at most 1.
pub fn round_trip(candidate: &Candidate) -> Result<bool> {
    let n = candidate.structure.jobs();
    let inst = &candidate.witness;
    let tree = PlayerOrder::identity(n).to_tree(2);
    let set = spe_outcome_set(inst, &tree)?;
    let eq = leaf_schedule(n, candidate.structure.equilibrium_leaf());
    let opt_loads = inst.loads(&leaf_schedule(n, candidate.opt_leaf).to_partial())?;
    Ok(set.contains(&eq)
        && inst.makespan(&eq)? >= candidate.value
        && opt_loads.iter().all(|l| *l <= Rational::one()))
}
