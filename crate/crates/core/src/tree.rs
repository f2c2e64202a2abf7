//! Decision trees of the sequential game.
//!
//! Internal nodes name the player who moves there and have one child per
//! machine. Subtrees are reference counted, so the tree of a fixed order
//! shares one subtree per depth and stays linear in size.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TreeNode {
    Leaf,
    Decision {
        player: usize,
        children: Vec<Arc<TreeNode>>,
    },
}

impl TreeNode {
    pub fn leaf() -> Arc<TreeNode> {
        Arc::new(TreeNode::Leaf)
    }

    pub fn decision(player: usize, children: Vec<Arc<TreeNode>>) -> Arc<TreeNode> {
        Arc::new(TreeNode::Decision { player, children })
    }

    pub fn player(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf => None,
            TreeNode::Decision { player, .. } => Some(*player),
        }
    }

    pub fn child(&self, machine: usize) -> Option<&Arc<TreeNode>> {
        match self {
            TreeNode::Leaf => None,
            TreeNode::Decision { children, .. } => children.get(machine),
        }
    }

    fn write_preorder(&self, out: &mut String) {
        match self {
            TreeNode::Leaf => out.push('.'),
            TreeNode::Decision { player, children } => {
                out.push_str(&format!("(J{}", player + 1));
                for child in children {
                    out.push(' ');
                    child.write_preorder(out);
                }
                out.push(')');
            }
        }
    }
}

/// A complete `m`-ary decision tree in which every root-to-leaf path names
/// each of the `n` players exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdaptiveTree {
    jobs: usize,
    machines: usize,
    root: Arc<TreeNode>,
}

impl AdaptiveTree {
    /// Validates the path-coverage and arity invariants.
    pub fn new(jobs: usize, machines: usize, root: Arc<TreeNode>) -> Result<Self> {
        if machines == 0 {
            return Err(Error::InvalidTree(
                "at least one machine is required".into(),
            ));
        }
        let mut seen = vec![false; jobs];
        check_node(&root, machines, &mut seen, 0)?;
        Ok(AdaptiveTree {
            jobs,
            machines,
            root,
        })
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn root(&self) -> &Arc<TreeNode> {
        &self.root
    }

    /// Parenthesized preorder form: a leaf is `.`, a node is `(Jp c1 c2 ...)`.
    pub fn preorder(&self) -> String {
        let mut out = String::new();
        self.root.write_preorder(&mut out);
        out
    }

    /// Number of internal nodes counted per root-to-leaf path (shared
    /// subtrees counted once per occurrence).
    pub fn internal_nodes(&self) -> u64 {
        fn walk(node: &TreeNode) -> u64 {
            match node {
                TreeNode::Leaf => 0,
                TreeNode::Decision { children, .. } => {
                    1 + children.iter().map(|c| walk(c)).sum::<u64>()
                }
            }
        }
        walk(&self.root)
    }

    /// Parses the preorder form written by [`AdaptiveTree::preorder`].
    pub fn parse_preorder(text: &str, jobs: usize, machines: usize) -> Result<Self> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let root = parse_node(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::InvalidTree("trailing tokens after tree".into()));
        }
        AdaptiveTree::new(jobs, machines, root)
    }
}

impl fmt::Display for AdaptiveTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.preorder())
    }
}

fn check_node(node: &TreeNode, machines: usize, seen: &mut [bool], depth: usize) -> Result<()> {
    match node {
        TreeNode::Leaf => match seen.iter().position(|s| !s) {
            Some(j) => Err(Error::InvalidTree(format!(
                "a path of length {depth} never reaches player J{}",
                j + 1
            ))),
            None => Ok(()),
        },
        TreeNode::Decision { player, children } => {
            if *player >= seen.len() {
                return Err(Error::InvalidTree(format!(
                    "unknown player J{}",
                    player + 1
                )));
            }
            if seen[*player] {
                return Err(Error::InvalidTree(format!(
                    "player J{} moves twice on one path",
                    player + 1
                )));
            }
            if children.len() != machines {
                return Err(Error::InvalidTree(format!(
                    "node of J{} has {} children, expected {machines}",
                    player + 1,
                    children.len()
                )));
            }
            seen[*player] = true;
            let result = children
                .iter()
                .try_for_each(|c| check_node(c, machines, seen, depth + 1));
            seen[*player] = false;
            result
        }
    }
}

fn tokenize(text: &str) -> Vec<String> {
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    spaced.split_whitespace().map(str::to_string).collect()
}

fn parse_node(tokens: &[String], pos: &mut usize) -> Result<Arc<TreeNode>> {
    let bad = |msg: &str| Error::InvalidTree(msg.to_string());
    match tokens.get(*pos).map(String::as_str) {
        Some(".") => {
            *pos += 1;
            Ok(TreeNode::leaf())
        }
        Some("(") => {
            *pos += 1;
            let label = tokens
                .get(*pos)
                .ok_or_else(|| bad("unexpected end of tree"))?;
            let player: usize = label
                .trim_start_matches(['J', 'j'])
                .parse()
                .ok()
                .filter(|&p| p >= 1)
                .ok_or_else(|| bad(&format!("bad player label `{label}`")))?;
            *pos += 1;
            let mut children = Vec::new();
            while tokens.get(*pos).map(String::as_str) != Some(")") {
                if *pos >= tokens.len() {
                    return Err(bad("unbalanced parentheses"));
                }
                children.push(parse_node(tokens, pos)?);
            }
            *pos += 1;
            Ok(TreeNode::decision(player - 1, children))
        }
        Some(other) => Err(bad(&format!("unexpected token `{other}`"))),
        None => Err(bad("empty tree")),
    }
}

/// A fixed permutation of the players.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlayerOrder(Vec<usize>);

impl PlayerOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &j in &order {
            if j >= order.len() || seen[j] {
                return Err(Error::InvalidArgument(format!(
                    "order {:?} is not a permutation of 1..{}",
                    order.iter().map(|j| j + 1).collect::<Vec<_>>(),
                    order.len()
                )));
            }
            seen[j] = true;
        }
        Ok(PlayerOrder(order))
    }

    pub fn identity(jobs: usize) -> Self {
        PlayerOrder((0..jobs).collect())
    }

    /// Parses a comma-separated, one-based list such as `1,5,2,3,4`.
    pub fn parse(text: &str) -> Result<Self> {
        let order = text
            .split(',')
            .map(|t| t.trim())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.trim_start_matches(['J', 'j'])
                    .parse::<usize>()
                    .ok()
                    .filter(|&j| j >= 1)
                    .map(|j| j - 1)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad player `{t}` in order")))
            })
            .collect::<Result<Vec<_>>>()?;
        PlayerOrder::new(order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The tree in which every node at depth `d` belongs to `order[d]`.
    pub fn to_tree(&self, machines: usize) -> AdaptiveTree {
        let mut node = TreeNode::leaf();
        for &player in self.0.iter().rev() {
            node = TreeNode::decision(player, vec![node; machines]);
        }
        AdaptiveTree {
            jobs: self.0.len(),
            machines,
            root: node,
        }
    }
}

impl fmt::Display for PlayerOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|j| (j + 1).to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n)
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .expect("pivot exists");
        current.swap(i - 1, j);
        current[i..].reverse();
    }
}
