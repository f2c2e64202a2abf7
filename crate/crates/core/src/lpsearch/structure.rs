//! Fixed-order equilibrium structures on two machines.
//!
//! A structure fixes the branch taken at each of the `2^n - 1` internal
//! nodes of the depth-`n` binary tree of the identity order. Nodes are
//! numbered in level order: the root is 0 and node `i` has children `2i + 1`
//! (M1) and `2i + 2` (M2). Bit `i` of the encoding is set when node `i`
//! chooses M2. Leaves are numbered left to right, so the bits of a leaf index
//! read from the most significant one are the machines of J1, J2, and so on.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::instance::Schedule;

/// Largest depth the 64-bit encoding holds.
pub const MAX_JOBS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeStructure {
    jobs: usize,
    bits: u64,
}

impl TreeStructure {
    pub fn new(jobs: usize, bits: u64) -> Result<Self> {
        check_jobs(jobs)?;
        let nodes = internal_nodes(jobs);
        if nodes < 64 && bits >> nodes != 0 {
            return Err(Error::InvalidArgument(format!(
                "structure bits exceed {nodes} nodes"
            )));
        }
        Ok(TreeStructure { jobs, bits })
    }

    pub fn from_hex(jobs: usize, text: &str) -> Result<Self> {
        let digits = text.trim().trim_start_matches("0x");
        let bits = u64::from_str_radix(digits, 16)
            .map_err(|_| Error::InvalidArgument(format!("bad structure hex `{text}`")))?;
        TreeStructure::new(jobs, bits)
    }

    pub fn to_hex(&self) -> String {
        format!("{:x}", self.bits)
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Branch chosen at `node`: 0 for M1, 1 for M2.
    pub fn choice(&self, node: usize) -> usize {
        (self.bits >> node & 1) as usize
    }

    /// Leaf reached from `node` by following chosen branches.
    pub fn leaf_below(&self, node: usize) -> usize {
        let mut i = node;
        while i < internal_nodes(self.jobs) {
            i = 2 * i + 1 + self.choice(i);
        }
        i - internal_nodes(self.jobs)
    }

    pub fn equilibrium_leaf(&self) -> usize {
        self.leaf_below(0)
    }

    /// Swap the machines everywhere.
    pub fn mirror(&self) -> TreeStructure {
        let nodes = internal_nodes(self.jobs);
        let mut bits = 0u64;
        for node in 0..nodes {
            let depth = depth_of(node);
            let first = (1usize << depth) - 1;
            let twin = first + ((1usize << depth) - 1 - (node - first));
            bits |= ((1 - self.choice(node)) as u64) << twin;
        }
        TreeStructure {
            jobs: self.jobs,
            bits,
        }
    }
}

fn check_jobs(jobs: usize) -> Result<()> {
    if jobs == 0 || jobs > MAX_JOBS {
        return Err(Error::TooLarge(format!(
            "structures need 1 <= n <= {MAX_JOBS}, got {jobs}"
        )));
    }
    Ok(())
}

pub fn internal_nodes(jobs: usize) -> usize {
    (1usize << jobs) - 1
}

pub fn leaves(jobs: usize) -> usize {
    1usize << jobs
}

pub(crate) fn depth_of(node: usize) -> usize {
    (usize::BITS - 1 - (node + 1).leading_zeros()) as usize
}

/// Schedule at a leaf.
pub fn leaf_schedule(jobs: usize, leaf: usize) -> Schedule {
    Schedule::new((0..jobs).map(|j| leaf >> (jobs - 1 - j) & 1).collect())
}

pub fn leaf_of(schedule: &Schedule) -> usize {
    schedule.as_slice().iter().fold(0, |acc, &m| acc << 1 | m)
}

/// Level-order node reached after the given machine choices.
pub fn node_of(route: &[usize]) -> usize {
    route.iter().fold(0, |node, &m| 2 * node + 1 + m)
}

pub fn is_extreme_leaf(jobs: usize, leaf: usize) -> bool {
    leaf == 0 || leaf == leaves(jobs) - 1
}

/// Last-layer consistency: with `S` the set of earlier players on M2 at a
/// last-layer node, the nodes choosing M1 must be closed under supersets
/// of `S`.
pub fn obs1_consistent(structure: &TreeStructure) -> bool {
    let upper = upper_bits(structure.jobs);
    is_down_set(structure.bits >> upper, structure.jobs - 1)
}

/// True iff the set of points (bit `p` = point `p`) is closed under subsets.
fn is_down_set(mask: u64, vars: usize) -> bool {
    (0..1usize << vars)
        .filter(|&p| mask >> p & 1 == 1)
        .all(|p| (0..vars).all(|v| p >> v & 1 == 0 || mask >> (p & !(1 << v)) & 1 == 1))
}

fn upper_bits(jobs: usize) -> usize {
    (1usize << (jobs - 1)) - 1
}

/// All last-layer patterns whose M2 nodes form a down-set, ascending.
pub fn monotone_patterns(vars: usize) -> &'static [u64] {
    static CACHE: [OnceLock<Vec<u64>>; MAX_JOBS] = [const { OnceLock::new() }; MAX_JOBS];
    CACHE[vars].get_or_init(|| {
        let mut out = if vars == 0 {
            vec![0, 1]
        } else {
            let half = 1u32 << (vars - 1);
            let lower = monotone_patterns(vars - 1);
            let mut out = Vec::new();
            for &g0 in lower {
                for &g1 in lower {
                    if g1 & !g0 == 0 {
                        out.push(g0 | g1 << half);
                    }
                }
            }
            out
        };
        out.sort_unstable();
        out
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnumerationOptions {
    pub prune_obs1: bool,
    pub prune_mirror: bool,
    pub exclude_extreme_eq_leaf: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            prune_obs1: true,
            prune_mirror: true,
            exclude_extreme_eq_leaf: true,
        }
    }
}

impl EnumerationOptions {
    pub const NONE: EnumerationOptions = EnumerationOptions {
        prune_obs1: false,
        prune_mirror: false,
        exclude_extreme_eq_leaf: false,
    };

    pub fn obs1_only() -> Self {
        EnumerationOptions {
            prune_obs1: true,
            ..Self::NONE
        }
    }
}

/// Every structure as one stream. Position `u * P + q` stands for the
/// structure with upper-layer bits `u` and the `q`-th last-layer pattern;
/// `P` is the number of patterns considered.
#[derive(Debug, Clone)]
pub struct StructureStream {
    jobs: usize,
    options: EnumerationOptions,
    upper: usize,
    patterns: PatternSet,
    position: u64,
    end: u64,
}

#[derive(Debug, Clone, Copy)]
enum PatternSet {
    Monotone(&'static [u64]),
    All(u64),
}

impl PatternSet {
    fn len(&self) -> u64 {
        match self {
            PatternSet::Monotone(p) => p.len() as u64,
            PatternSet::All(count) => *count,
        }
    }

    fn get(&self, q: u64) -> u64 {
        match self {
            PatternSet::Monotone(p) => p[q as usize],
            PatternSet::All(_) => q,
        }
    }
}

pub fn enumerate_structures(jobs: usize, options: EnumerationOptions) -> Result<StructureStream> {
    check_jobs(jobs)?;
    let upper = upper_bits(jobs);
    let patterns = if options.prune_obs1 {
        PatternSet::Monotone(monotone_patterns(jobs - 1))
    } else {
        PatternSet::All(1u64 << (1usize << (jobs - 1)))
    };
    let end = (1u64 << upper)
        .checked_mul(patterns.len())
        .ok_or_else(|| Error::TooLarge(format!("{jobs} jobs overflow the stream position")))?;
    Ok(StructureStream {
        jobs,
        options,
        upper,
        patterns,
        position: 0,
        end,
    })
}

impl StructureStream {
    /// Resume at a raw stream position.
    pub fn starting_at(mut self, position: u64) -> Self {
        self.position = position.min(self.end);
        self
    }

    /// Number of raw positions, before filters.
    pub fn positions(&self) -> u64 {
        self.end
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn structure_at(&self, position: u64) -> TreeStructure {
        let per = self.patterns.len();
        let (u, q) = (position / per, position % per);
        TreeStructure {
            jobs: self.jobs,
            bits: u | self.patterns.get(q) << self.upper,
        }
    }

    fn accepts(&self, s: &TreeStructure) -> bool {
        if self.options.prune_mirror && s.choice(0) == 1 {
            return false;
        }
        !(self.options.exclude_extreme_eq_leaf && is_extreme_leaf(self.jobs, s.equilibrium_leaf()))
    }
}

impl Iterator for StructureStream {
    type Item = (u64, TreeStructure);

    fn next(&mut self) -> Option<Self::Item> {
        while self.position < self.end {
            let position = self.position;
            self.position += 1;
            let s = self.structure_at(position);
            if self.accepts(&s) {
                return Some((position, s));
            }
        }
        None
    }
}

/// Number of structures the filters admit, without listing them.
pub fn count_structures(jobs: usize, options: EnumerationOptions) -> Result<u64> {
    let stream = enumerate_structures(jobs, options)?;
    if jobs == 1 {
        // the root is also the last layer
        return Ok(stream.count() as u64);
    }
    let upper = stream.upper;
    let patterns: Vec<u64> = match stream.patterns {
        PatternSet::Monotone(p) => p.to_vec(),
        PatternSet::All(_) => Vec::new(),
    };
    let total_patterns = stream.patterns.len();
    let last_layer = 1usize << (jobs - 1);
    // patterns choosing M1 at each last-layer node
    let m1_at: Vec<u64> = (0..last_layer)
        .map(|p| {
            if options.prune_obs1 {
                patterns.iter().filter(|&&g| g >> p & 1 == 0).count() as u64
            } else {
                total_patterns / 2
            }
        })
        .collect();
    let mut count = 0u64;
    for u in 0..1u64 << upper {
        let partial = TreeStructure { jobs, bits: u };
        if options.prune_mirror && partial.choice(0) == 1 {
            continue;
        }
        if !options.exclude_extreme_eq_leaf {
            count += total_patterns;
            continue;
        }
        // the last-layer node reached through the upper bits
        let mut node = 0usize;
        while node < upper {
            node = 2 * node + 1 + partial.choice(node);
        }
        let p = node - upper;
        count += match p {
            _ if p == 0 && p == last_layer - 1 => 0,
            0 => total_patterns - m1_at[p],
            _ if p == last_layer - 1 => m1_at[p],
            _ => total_patterns,
        };
    }
    Ok(count)
}
