//! Deterministic tie-breaking rules.
//!
//! A rule is consulted only when two or more machines give the mover exactly
//! the same final cost. It sees the mover, the assignment of everyone who
//! moved before, and the tied candidates with their continuation outcomes.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::instance::PartialSchedule;

use super::SpeOutcome;

/// One tied option: moving to `machine` leads to `outcome`.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub machine: usize,
    pub outcome: &'a SpeOutcome,
}

pub trait TieBreakRule: Send + Sync {
    /// Picks one of `candidates` (at least two, in ascending machine order).
    fn choose(
        &self,
        player: usize,
        history: &PartialSchedule,
        candidates: &[Candidate<'_>],
    ) -> usize;

    fn name(&self) -> String;
}

impl fmt::Debug for dyn TieBreakRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn lowest(candidates: &[Candidate<'_>]) -> usize {
    candidates
        .iter()
        .map(|c| c.machine)
        .min()
        .expect("nonempty candidates")
}

fn prefer(machine: usize, candidates: &[Candidate<'_>]) -> usize {
    if candidates.iter().any(|c| c.machine == machine) {
        machine
    } else {
        lowest(candidates)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PreferLowest;

impl TieBreakRule for PreferLowest {
    fn choose(&self, _: usize, _: &PartialSchedule, candidates: &[Candidate<'_>]) -> usize {
        lowest(candidates)
    }

    fn name(&self) -> String {
        "lowest".into()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PreferHighest;

impl TieBreakRule for PreferHighest {
    fn choose(&self, _: usize, _: &PartialSchedule, candidates: &[Candidate<'_>]) -> usize {
        candidates
            .iter()
            .map(|c| c.machine)
            .max()
            .expect("nonempty candidates")
    }

    fn name(&self) -> String {
        "highest".into()
    }
}

/// Resolves ties toward a recommended machine per history; histories
/// without a recommendation (or whose recommendation is not tied) fall back
/// to the lowest tied machine.
#[derive(Debug, Clone, Default)]
pub struct PreferRecommended {
    recommended: HashMap<PartialSchedule, usize>,
}

impl PreferRecommended {
    pub fn new(recommended: HashMap<PartialSchedule, usize>) -> Self {
        PreferRecommended { recommended }
    }

    pub fn recommendation(&self, history: &PartialSchedule) -> Option<usize> {
        self.recommended.get(history).copied()
    }
}

impl TieBreakRule for PreferRecommended {
    fn choose(&self, _: usize, history: &PartialSchedule, candidates: &[Candidate<'_>]) -> usize {
        match self.recommended.get(history) {
            Some(&machine) => prefer(machine, candidates),
            None => lowest(candidates),
        }
    }

    fn name(&self) -> String {
        "recommended".into()
    }
}

/// The tie preferences of the linear lower-bound family on `n = 3k - 1`
/// jobs and two machines.
///
/// Jobs come in blocks `(a, b, c) = (J3t+1, J3t+2, J3t+3)` for
/// `t = 0..k-2`, followed by two final jobs `x = J3k-2` and `y = J3k-1`.
/// A block's zero-cost machines are `a -> M2`, `b -> M1`, `c -> M1`. While
/// every earlier block sat on its zero-cost machines, a block plays the rules
/// of the first block of the smaller instance:
///
/// * `a` breaks ties toward M1;
/// * `b` and `c` break ties away from `a`'s machine;
/// * `x` looks at the first block that left its zero-cost machines: toward M2
///   when that block's `b` is on M2, toward M1 when only its `c` is on M2;
/// * `y` breaks ties toward M2.
///
/// The last block together with `x` and `y` is the five-job base instance.
/// Once every earlier block sat on its zero-cost machines, ties there follow
/// the strict preferences of the perturbed five-job instance (`eps = 1/100`,
/// exact ties toward M1) at the same local history. Every other tie goes
/// to M2.
#[derive(Debug, Clone)]
pub struct Thm2Rule {
    k: usize,
    base: HashMap<Vec<usize>, usize>,
}

impl Thm2Rule {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!(
                "block count k = {k} must be at least 2"
            )));
        }
        Ok(Thm2Rule {
            k,
            base: base_preferences()?,
        })
    }

    fn zero_machine(offset: usize) -> usize {
        if offset == 0 {
            1
        } else {
            0
        }
    }

    fn block_is_zero(&self, block: usize, history: &PartialSchedule) -> bool {
        (0..3).all(|offset| history.get(3 * block + offset) == Some(Self::zero_machine(offset)))
    }

    fn preference(&self, player: usize, history: &PartialSchedule) -> usize {
        const M1: usize = 0;
        const M2: usize = 1;
        let blocks = self.k - 1;
        let base_start = 3 * (blocks - 1);
        if player >= base_start && (0..blocks - 1).all(|t| self.block_is_zero(t, history)) {
            let route: Vec<usize> = (base_start..player)
                .map(|j| history.get(j).expect("earlier movers are placed"))
                .collect();
            return self.base.get(&route).copied().unwrap_or(M2);
        }
        if player < 3 * blocks {
            let block = player / 3;
            if !(0..block).all(|t| self.block_is_zero(t, history)) {
                return M2;
            }
            return match player % 3 {
                0 => M1,
                _ => match history.get(3 * block) {
                    Some(a_machine) => 1 - a_machine,
                    None => M2,
                },
            };
        }
        if player == 3 * blocks {
            let Some(block) = (0..blocks).find(|&t| !self.block_is_zero(t, history)) else {
                return M2;
            };
            if history.get(3 * block + 1) == Some(M2) {
                return M2;
            }
            if history.get(3 * block + 2) == Some(M2) {
                return M1;
            }
        }
        M2
    }
}

/// Decisions of the perturbed five-job instance, keyed by the machines
/// chosen so far.
fn base_preferences() -> Result<HashMap<Vec<usize>, usize>> {
    let inst = crate::constructions::gen_thm1(&crate::rational::rat(1, 100))?;
    let tree = crate::tree::PlayerOrder::identity(inst.jobs()).to_tree(inst.machines());
    let (_, decisions) = super::spe_profile(&inst, &tree, &PreferLowest)?;
    Ok(decisions
        .into_iter()
        .map(|d| (d.route, d.machine))
        .collect())
}

impl TieBreakRule for Thm2Rule {
    fn choose(
        &self,
        player: usize,
        history: &PartialSchedule,
        candidates: &[Candidate<'_>],
    ) -> usize {
        prefer(self.preference(player, history), candidates)
    }

    fn name(&self) -> String {
        format!("thm2:{}", self.k)
    }
}

/// A table of `player <j> when <pattern> prefer <i>` lines. The first line
/// whose player and pattern match and whose machine is tied wins; otherwise
/// the lowest tied machine is taken.
///
/// A pattern is `*` or a comma-separated list of `J<j>=M<i>` requirements on
/// the earlier movers (`J<j>=-` requires `J<j>` not to have moved yet).
#[derive(Debug, Clone, Default)]
pub struct ScriptedRule {
    entries: Vec<ScriptEntry>,
}

#[derive(Debug, Clone)]
struct ScriptEntry {
    player: usize,
    pattern: Vec<(usize, Option<usize>)>,
    machine: usize,
}

impl ScriptedRule {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 6
                || tokens[0] != "player"
                || tokens[2] != "when"
                || tokens[4] != "prefer"
            {
                return Err(err(format!(
                    "expected `player <j> when <pattern> prefer <i>`, found `{line}`"
                )));
            }
            let player = parse_index(tokens[1], 'J')
                .ok_or_else(|| err(format!("bad player `{}`", tokens[1])))?;
            let machine = parse_index(tokens[5], 'M')
                .ok_or_else(|| err(format!("bad machine `{}`", tokens[5])))?;
            let mut pattern = Vec::new();
            if tokens[3] != "*" {
                for item in tokens[3].split(',') {
                    let (job, target) = item
                        .split_once('=')
                        .ok_or_else(|| err(format!("bad requirement `{item}`")))?;
                    let job =
                        parse_index(job, 'J').ok_or_else(|| err(format!("bad job `{job}`")))?;
                    let target = if target == "-" {
                        None
                    } else {
                        Some(
                            parse_index(target, 'M')
                                .ok_or_else(|| err(format!("bad machine `{target}`")))?,
                        )
                    };
                    pattern.push((job, target));
                }
            }
            entries.push(ScriptEntry {
                player,
                pattern,
                machine,
            });
        }
        Ok(ScriptedRule { entries })
    }
}

fn parse_index(token: &str, prefix: char) -> Option<usize> {
    token
        .trim_start_matches([prefix, prefix.to_ascii_lowercase()])
        .parse::<usize>()
        .ok()
        .filter(|&v| v >= 1)
        .map(|v| v - 1)
}

impl TieBreakRule for ScriptedRule {
    fn choose(
        &self,
        player: usize,
        history: &PartialSchedule,
        candidates: &[Candidate<'_>],
    ) -> usize {
        self.entries
            .iter()
            .filter(|e| e.player == player)
            .filter(|e| {
                e.pattern
                    .iter()
                    .all(|&(job, target)| job < history.jobs() && history.get(job) == target)
            })
            .map(|e| e.machine)
            .find(|&machine| candidates.iter().any(|c| c.machine == machine))
            .unwrap_or_else(|| lowest(candidates))
    }

    fn name(&self) -> String {
        "scripted".into()
    }
}

/// Resolves a CLI rule name: `lowest`, `highest`, `thm2:<k>`.
/// `recommended` needs a recommendation map and is built by the caller.
pub fn named_rule(name: &str) -> Result<Arc<dyn TieBreakRule>> {
    match name {
        "lowest" => Ok(Arc::new(PreferLowest)),
        "highest" => Ok(Arc::new(PreferHighest)),
        other => {
            if let Some(k) = other.strip_prefix("thm2:") {
                let k = k
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("bad block count in `{other}`")))?;
                return Ok(Arc::new(Thm2Rule::new(k)?));
            }
            Err(Error::InvalidArgument(format!(
                "unknown tie rule `{other}`"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Schedule;
    use crate::rational::int;

    fn dummy() -> SpeOutcome {
        SpeOutcome::at_leaf(Schedule::new(vec![0]), vec![int(1), int(0)], vec![(0, 0)])
    }

    #[test]
    fn builtin_preferences() {
        let o = dummy();
        let both = [
            Candidate {
                machine: 0,
                outcome: &o,
            },
            Candidate {
                machine: 1,
                outcome: &o,
            },
        ];
        let h = PartialSchedule::empty(1);
        assert_eq!(PreferLowest.choose(0, &h, &both), 0);
        assert_eq!(PreferHighest.choose(0, &h, &both), 1);
        let mut map = HashMap::new();
        map.insert(h.clone(), 1);
        assert_eq!(PreferRecommended::new(map).choose(0, &h, &both), 1);
    }

    #[test]
    fn scripted_table() {
        let rule = ScriptedRule::parse(
            "# ties of J2\nplayer 2 when J1=M1 prefer 2\nplayer J2 when * prefer M1\n",
        )
        .unwrap();
        let o = dummy();
        let both = [
            Candidate {
                machine: 0,
                outcome: &o,
            },
            Candidate {
                machine: 1,
                outcome: &o,
            },
        ];
        let mut h = PartialSchedule::empty(2);
        assert_eq!(rule.choose(1, &h, &both), 0);
        h.set(0, 0);
        assert_eq!(rule.choose(1, &h, &both), 1);
        assert_eq!(rule.choose(0, &h, &both), 0);
        assert!(ScriptedRule::parse("player 1 prefers 2").is_err());
    }

    #[test]
    fn thm2_preferences_of_the_first_block() {
        let rule = Thm2Rule::new(3).unwrap();
        let mut h = PartialSchedule::empty(8);
        assert_eq!(rule.preference(0, &h), 0);
        h.set(0, 0);
        assert_eq!(rule.preference(1, &h), 1);
        h.set(1, 0);
        assert_eq!(rule.preference(2, &h), 1);
        h.set(0, 1);
        assert_eq!(rule.preference(1, &h), 0);
        // first block left its zero-cost machines through its third job
        let h = PartialSchedule::from_slots(vec![
            Some(0),
            Some(0),
            Some(1),
            Some(1),
            Some(0),
            Some(0),
            None,
            None,
        ]);
        assert_eq!(rule.preference(6, &h), 0);
        let h = PartialSchedule::from_slots(vec![
            Some(0),
            Some(1),
            Some(0),
            Some(1),
            Some(0),
            Some(0),
            None,
            None,
        ]);
        assert_eq!(rule.preference(6, &h), 1);
        assert_eq!(rule.preference(7, &h), 1);
        assert!(Thm2Rule::new(1).is_err());
    }

    #[test]
    fn thm2_base_block_follows_perturbed_instance() {
        let rule = Thm2Rule::new(2).unwrap();
        assert_eq!(rule.preference(0, &PartialSchedule::empty(5)), 0);
        // after J1 on M2, the perturbed instance sends J2 to M2 as well
        assert_eq!(
            rule.preference(1, &PartialSchedule::from_pairs(5, &[(0, 1)]).unwrap()),
            1
        );
    }

    #[test]
    fn named_rules() {
        assert_eq!(named_rule("lowest").unwrap().name(), "lowest");
        assert_eq!(named_rule("thm2:3").unwrap().name(), "thm2:3");
        assert!(named_rule("thm2:1").is_err());
        assert!(named_rule("random").is_err());
    }
}
