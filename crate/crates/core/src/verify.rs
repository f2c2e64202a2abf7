//! One-shot reproduction of the published results, as a pass/fail table.
//!
//! Every check compares exact values. The instance generators are injected
//! through [`Fixtures`] so that a deliberately broken generator can be shown
//! to fail its check.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constructions::{
    deviation_check, gen_appendix_d, gen_example1, gen_thm1, gen_thm2, gen_thm5, thm3_groups,
    thm3_order, thm4_tree, thm4_tree_unchecked,
};
use crate::equilibria::{is_pure_nash, pure_nash, spe, spe_outcome_set, PreferLowest, Thm2Rule};
use crate::error::Result;
use crate::instance::{Instance, Schedule};
use crate::lpsearch::{
    build_lp, count_structures, leaf_of, round_trip, search, simplex_solve, structure_from_spe,
    EnumerationOptions, LpProblem, LpStatus, SearchOptions, TieMode,
};
use crate::measures::{
    adaptive_spos, adaptive_spos_with, poa_pos, spoa_fixed, spos, Ties, DEFAULT_TREE_BUDGET,
};
use crate::optimum::{constrained_opt, opt};
use crate::rational::{format_rational, int, rat, Ratio, Rational};
use crate::tree::{permutations, PlayerOrder};
use crate::PartialSchedule;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// One line per check. Elapsed times only when `timing` is set, so that
    /// reports are otherwise byte-identical across runs.
    pub fn render(&self, timing: bool) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.pass { "PASS" } else { "FAIL" };
            let _ = write!(
                out,
                "{status} {}: expected {}; computed {}",
                c.name, c.expected, c.computed
            );
            if timing {
                let _ = write!(out, " [{:.3}s]", c.elapsed.as_secs_f64());
            }
            out.push('\n');
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.checks.len());
        out
    }
}

/// Generators the checks run on.
#[derive(Debug, Clone, Copy)]
pub struct Fixtures {
    pub thm1: fn(&Rational) -> Result<Instance>,
    pub thm2: fn(usize) -> Result<Instance>,
    pub thm5: fn(&Rational) -> Result<Instance>,
    pub appendix_d: fn() -> Instance,
    pub example1: fn(&Rational) -> Result<Instance>,
    /// Seed of the random instance streams.
    pub seed: u64,
}

impl Default for Fixtures {
    fn default() -> Self {
        Fixtures {
            thm1: gen_thm1,
            thm2: gen_thm2,
            thm5: gen_thm5,
            appendix_d: gen_appendix_d,
            example1: gen_example1,
            seed: 2024,
        }
    }
}

/// Runs every check with the real generators.
pub fn verify_paper() -> VerificationReport {
    verify_with(&Fixtures::default())
}

pub fn verify_with(fixtures: &Fixtures) -> VerificationReport {
    let checks: [fn(&Fixtures) -> Check; 10] = [
        check_thm1,
        check_thm2,
        check_thm3,
        check_thm4,
        check_thm5,
        check_appendix_d,
        check_example1,
        check_structure_counts,
        check_lp,
        check_measure_chain,
    ];
    VerificationReport {
        checks: checks.iter().map(|check| check(fixtures)).collect(),
    }
}

/// Runs `body`, which returns `(computed, pass)`; errors count as failures.
fn timed(name: &str, expected: &str, body: impl FnOnce() -> Result<(String, bool)>) -> Check {
    let start = Instant::now();
    let (computed, pass) = match body() {
        Ok(r) => r,
        Err(e) => (format!("error: {e}"), false),
    };
    Check {
        name: name.to_string(),
        expected: expected.to_string(),
        computed,
        pass,
        elapsed: start.elapsed(),
    }
}

fn q(value: &Rational) -> String {
    format_rational(value)
}

fn ratio(value: &Ratio) -> String {
    match value {
        Ratio::Finite(r) => q(r),
        Ratio::Unbounded => "unbounded".into(),
    }
}

/// Random two-machine (or `machines`-machine) instance with integer times
/// in `[0, 10]`.
fn random_instance(rng: &mut ChaCha8Rng, machines: usize, jobs: usize) -> Instance {
    let rows = (0..machines)
        .map(|_| (0..jobs).map(|_| int(rng.gen_range(0..=10))).collect())
        .collect();
    Instance::new(rows).expect("rectangular")
}

pub fn check_thm1(fx: &Fixtures) -> Check {
    timed(
        "thm1 fixed-order lower bound",
        "schedule (M1,M2,M1,M2,M2), makespan 387/100, opt 1, spoa 387/100",
        || {
            let inst = (fx.thm1)(&rat(1, 100))?;
            let outcome = spe(&inst, &PlayerOrder::identity(5).to_tree(2), &PreferLowest)?;
            let optimum = opt(&inst)?.makespan;
            let spoa = spoa_fixed(&inst, &PlayerOrder::identity(5))?.value;
            let pass = outcome.schedule.as_slice() == [0, 1, 0, 1, 1]
                && outcome.makespan == rat(387, 100)
                && optimum == int(1)
                && spoa == Ratio::Finite(rat(387, 100));
            let computed = format!(
                "schedule {}, makespan {}, opt {}, spoa {}",
                outcome.schedule,
                q(&outcome.makespan),
                q(&optimum),
                ratio(&spoa)
            );
            Ok((computed, pass))
        },
    )
}

pub fn check_thm2(fx: &Fixtures) -> Check {
    timed(
        "thm2 linear lower bound",
        "k=2,3,4: worst outcome k+2, opt 1, scripted rule k+2",
        || {
            let mut parts = Vec::new();
            let mut pass = true;
            for k in 2..=4 {
                let inst = (fx.thm2)(k)?;
                let tree = PlayerOrder::identity(inst.jobs()).to_tree(2);
                let worst = spe_outcome_set(&inst, &tree)?.worst().makespan.clone();
                let optimum = opt(&inst)?.makespan;
                let scripted = spe(&inst, &tree, &Thm2Rule::new(k)?)?.makespan;
                let target = int(k as i64 + 2);
                pass &= worst == target && optimum == int(1) && scripted == target;
                parts.push(format!(
                    "k={k}: worst {}, opt {}, scripted {}",
                    q(&worst),
                    q(&optimum),
                    q(&scripted)
                ));
            }
            Ok((parts.join("; "), pass))
        },
    )
}

pub fn check_thm3(fx: &Fixtures) -> Check {
    timed(
        "thm3 two-group orders",
        "200 instances, n in 4..7: best outcome <= (n/2+1) opt; n <= 5: every within-group order <= (|G1|+1) opt",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(fx.seed ^ 3);
            let (mut violations, mut orders) = (0u64, 0u64);
            for _ in 0..200 {
                let n = rng.gen_range(4..=7);
                let inst = random_instance(&mut rng, 2, n);
                let optimum = opt(&inst)?.makespan;
                let tree = thm3_order(&inst)?.to_tree(2);
                let best = spe_outcome_set(&inst, &tree)?.best().makespan.clone();
                if best > rat(n as i64 + 2, 2) * &optimum {
                    violations += 1;
                }
                if n <= 5 {
                    let (first, second) = thm3_groups(&inst)?;
                    let bound = int(first.len() as i64 + 1) * &optimum;
                    for a in permutations(first.len()) {
                        for b in permutations(second.len()) {
                            let order: Vec<usize> =
                                a.iter().map(|&i| first[i]).chain(b.iter().map(|&i| second[i])).collect();
                            let tree = PlayerOrder::new(order)?.to_tree(2);
                            orders += 1;
                            if spe_outcome_set(&inst, &tree)?.best().makespan > bound {
                                violations += 1;
                            }
                        }
                    }
                }
            }
            Ok((format!("{violations} violations over 200 instances and {orders} within-group orders"), violations == 0))
        },
    )
}

pub fn check_thm4(fx: &Fixtures) -> Check {
    timed(
        "thm4 adaptive optimum on two machines",
        "200 instances, n <= 7: punishment tree reaches opt; n <= 5: adaptive spos 1",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(fx.seed ^ 4);
            let (mut violations, mut enumerated, mut fallbacks, mut literal_misses) =
                (0u64, 0u64, 0usize, 0u64);
            for _ in 0..200 {
                let n = rng.gen_range(1..=7);
                let inst = random_instance(&mut rng, 2, n);
                let optimum = opt(&inst)?.makespan;
                let built = thm4_tree(&inst)?;
                fallbacks += built.fallbacks();
                if spe(&inst, &built.tree, &built.rule())?.makespan != optimum {
                    violations += 1;
                }
                // the bare selection rule, for information only
                let literal = thm4_tree_unchecked(&inst)
                    .and_then(|t| spe(&inst, &t.tree, &t.rule()))
                    .map(|o| o.makespan == optimum);
                if !matches!(literal, Ok(true)) {
                    literal_misses += 1;
                }
                if n <= 5 {
                    enumerated += 1;
                    if !adaptive_spos(&inst)?.value.is_one() {
                        violations += 1;
                    }
                }
            }
            Ok((
                format!(
                    "{violations} violations over 200 instances ({enumerated} fully enumerated); \
                     {fallbacks} fallback nodes; bare selection rule misses {literal_misses}"
                ),
                violations == 0,
            ))
        },
    )
}

pub fn check_thm5(fx: &Fixtures) -> Check {
    timed(
        "thm5 three-machine adaptive lower bound",
        "adaptive spos 59/40, witness makespan 59/10, 24 trees",
        || {
            let eps = rat(1, 10);
            let inst = (fx.thm5)(&eps)?;
            let report = adaptive_spos(&inst)?;
            let trees = crate::measures::adaptive_tree_count(inst.jobs(), inst.machines());
            let pass = report.value == Ratio::Finite(rat(59, 40))
                && report.makespan == rat(59, 10)
                && trees == 24u32.into()
                && rat(59, 40) >= rat(3, 2) - &eps / int(8);
            let worst = adaptive_spos_with(&inst, Ties::Worst, DEFAULT_TREE_BUDGET)?;
            let computed = format!(
                "adaptive spos {}, witness makespan {}, opt {}, {} trees \
                 (with adversarial ties {}, witness makespan {})",
                ratio(&report.value),
                q(&report.makespan),
                q(&report.opt_makespan),
                trees,
                ratio(&worst.value),
                q(&worst.makespan)
            );
            Ok((computed, pass))
        },
    )
}

pub fn check_appendix_d(fx: &Fixtures) -> Check {
    timed(
        "three-machine deviations",
        "opt 10, loads (10,9,6); every job improves by deviating (costs 9->7, 10->7, 10->7)",
        || {
            let inst = (fx.appendix_d)();
            let optimum = constrained_opt(&inst, &PartialSchedule::empty(inst.jobs()))?;
            let report = deviation_check(&inst)?;
            let cheapest: Vec<(Rational, Rational)> = report
                .jobs
                .iter()
                .map(|j| {
                    (
                        j.opt_cost.clone(),
                        j.deviations
                            .iter()
                            .map(|d| d.cost.clone())
                            .min()
                            .unwrap_or_default(),
                    )
                })
                .collect();
            let expected = [(int(9), int(7)), (int(10), int(7)), (int(10), int(7))];
            let pass = optimum.makespan == int(10)
                && report.loads == [int(10), int(9), int(6)]
                && report.every_job_improves()
                && cheapest == expected;
            let loads: Vec<String> = report.loads.iter().map(q).collect();
            let costs: Vec<String> = cheapest
                .iter()
                .map(|(a, b)| format!("{}->{}", q(a), q(b)))
                .collect();
            let computed = format!(
                "opt {}, loads ({}); every job improves: {} (costs {})",
                q(&optimum.makespan),
                loads.join(","),
                report.every_job_improves(),
                costs.join(", ")
            );
            Ok((computed, pass))
        },
    )
}

pub fn check_example1(fx: &Fixtures) -> Check {
    timed(
        "example 1 unbounded anarchy",
        "nash {(M1,M2),(M2,M1)}; (poa, pos) = (5, 1) and (100, 1)",
        || {
            let inst = (fx.example1)(&int(5))?;
            let nash = pure_nash(&inst)?;
            let mut parts = vec![format!(
                "nash {{{}}}",
                nash.iter()
                    .map(|s| s.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )];
            let mut pass = nash == [Schedule::new(vec![0, 1]), Schedule::new(vec![1, 0])];
            for l in [5, 100] {
                let prices = poa_pos(&(fx.example1)(&int(l))?)?;
                match prices {
                    Some(p) => {
                        pass &= p.poa == Ratio::Finite(int(l)) && p.pos == Ratio::Finite(int(1));
                        parts.push(format!("l={l}: ({}, {})", ratio(&p.poa), ratio(&p.pos)));
                    }
                    None => {
                        pass = false;
                        parts.push(format!("l={l}: no pure Nash"));
                    }
                }
            }
            Ok((parts.join("; "), pass))
        },
    )
}

pub fn check_structure_counts(_: &Fixtures) -> Check {
    timed(
        "structure counts",
        "obs1-consistent 48, 2560, 5505024; unpruned n=5 2147483648",
        || {
            let obs1 = EnumerationOptions::obs1_only();
            let counts: Vec<u64> = (3..=5)
                .map(|n| count_structures(n, obs1))
                .collect::<Result<_>>()?;
            let listed = crate::lpsearch::enumerate_structures(4, obs1)?.count() as u64;
            let total = count_structures(5, EnumerationOptions::NONE)?;
            let pass = counts == [48, 2560, 5_505_024] && listed == 2560 && total == 1 << 31;
            Ok((
                format!(
                    "{}, {}, {}; unpruned n=5 {total}",
                    counts[0], counts[1], counts[2]
                ),
                pass,
            ))
        },
    )
}

fn lp(objective: &[i64], rows: &[(&[i64], i64)]) -> LpProblem {
    let mut lp = LpProblem::new(objective.len(), objective.iter().map(|&v| int(v)).collect());
    for (row, bound) in rows {
        lp.add_row(row.iter().map(|&v| int(v)).collect(), int(*bound));
    }
    lp
}

pub fn check_lp(fx: &Fixtures) -> Check {
    timed(
        "LP search",
        "simplex 4/4; eps=0 table feasible with objective 4; restricted search >= 4; n<=3 pruning sound, witnesses re-verify",
        || {
            let mut simplex_ok = 0;
            let r = simplex_solve(&lp(&[1, 0], &[(&[1, 1], 1)]));
            simplex_ok += usize::from(r.value == Some(int(1)));
            let r = simplex_solve(&lp(&[3, 5], &[(&[1, 0], 4), (&[0, 2], 12), (&[3, 2], 18)]));
            simplex_ok += usize::from(r.value == Some(int(36)) && r.point == Some(vec![int(2), int(6)]));
            simplex_ok += usize::from(simplex_solve(&lp(&[1], &[(&[1], -1)])).status == LpStatus::Infeasible);
            simplex_ok += usize::from(simplex_solve(&lp(&[1], &[])).status == LpStatus::Unbounded);

            let inst = (fx.thm1)(&rat(1, 100))?;
            let structure = structure_from_spe(&inst, &PreferLowest)?;
            let leaf = leaf_of(&opt(&inst)?.schedule);
            let table = (fx.thm1)(&int(0))?;
            let point: Vec<Rational> = table.rows().iter().flatten().cloned().collect();
            let weak = build_lp(&structure, leaf, 1, &TieMode::Weak)?;
            let feasible = weak.is_feasible(&point);
            let objective = weak.objective_at(&point);
            let restricted = search(5, &SearchOptions { only: Some((structure, Some(leaf))), ..Default::default() })?;
            let restricted_value = restricted.best.as_ref().map(|c| c.value.clone()).unwrap_or_default();

            let mut sound = true;
            let mut maxima = Vec::new();
            for n in 1..=3 {
                let on = search(n, &SearchOptions::default())?;
                let off = search(
                    n,
                    &SearchOptions {
                        enumeration: EnumerationOptions { prune_obs1: false, ..EnumerationOptions::default() },
                        ..Default::default()
                    },
                )?;
                let value = |r: &crate::lpsearch::SearchReport| r.best.as_ref().map(|c| c.value.clone());
                sound &= value(&on) == value(&off);
                for c in on.improvements.iter().chain(&off.improvements) {
                    sound &= round_trip(c)?;
                }
                maxima.push(value(&on).map_or("none".to_string(), |v| q(&v)));
            }
            let pass = simplex_ok == 4 && feasible && objective == int(4) && restricted_value >= int(4) && sound;
            let computed = format!(
                "simplex {simplex_ok}/4; feasible {feasible}, objective {}; restricted search {}; n=1..3 maxima {} sound {sound}",
                q(&objective),
                q(&restricted_value),
                maxima.join(",")
            );
            Ok((computed, pass))
        },
    )
}

pub fn check_measure_chain(fx: &Fixtures) -> Check {
    timed(
        "measure chain and Nash optimum",
        "100 instances: adaptive <= spos <= spoa; 100 instances: some optimum is Nash",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(fx.seed ^ 10);
            let mut violations = 0u64;
            for _ in 0..100 {
                let n = rng.gen_range(1..=5);
                let inst = random_instance(&mut rng, 2, n);
                let a = adaptive_spos(&inst)?.value;
                let s = spos(&inst)?.value;
                let f = spoa_fixed(&inst, &PlayerOrder::identity(n))?.value;
                if !(a <= s && s <= f) {
                    violations += 1;
                }
            }
            let mut no_nash_optimum = 0u64;
            for _ in 0..100 {
                let m = rng.gen_range(1..=3);
                let n = rng.gen_range(1..=4);
                let inst = random_instance(&mut rng, m, n);
                if !has_nash_optimum(&inst)? {
                    no_nash_optimum += 1;
                }
            }
            Ok((
                format!("{violations} chain violations; {no_nash_optimum} instances without a Nash optimum"),
                violations == 0 && no_nash_optimum == 0,
            ))
        },
    )
}

fn has_nash_optimum(inst: &Instance) -> Result<bool> {
    let best = opt(inst)?.makespan;
    let (m, n) = (inst.machines(), inst.jobs());
    let mut digits = vec![0usize; n];
    loop {
        let s = Schedule::new(digits.clone());
        if inst.makespan(&s)? == best && is_pure_nash(inst, &s)? {
            return Ok(true);
        }
        let Some(pos) = (0..n).rev().find(|&j| digits[j] + 1 < m) else {
            return Ok(false);
        };
        digits[pos] += 1;
        for d in &mut digits[pos + 1..] {
            *d = 0;
        }
    }
}
