//! Exact (constrained) minimum makespan by exhaustive branch and bound.
//!
//! The witness is canonical: among all minimizers, the one whose assignment
//! vector is lexicographically smallest. Jobs are branched in index order and
//! machines in index order, so the first minimizer reached is the canonical
//! one; later candidates replace it only when strictly better.

use crate::error::{Error, Result};
use crate::instance::{max_load, Instance, PartialSchedule, Schedule};
use crate::rational::Rational;

/// Default cap on `m^r` leaf evaluations, `r` the number of free jobs.
pub const DEFAULT_LEAF_BUDGET: u64 = 100_000_000;

/// Minimum makespan with its canonical witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Optimum {
    pub makespan: Rational,
    pub schedule: Schedule,
}

pub fn opt(inst: &Instance) -> Result<Optimum> {
    constrained_opt(inst, &PartialSchedule::empty(inst.jobs()))
}

pub fn constrained_opt(inst: &Instance, fixed: &PartialSchedule) -> Result<Optimum> {
    constrained_opt_with_budget(inst, fixed, DEFAULT_LEAF_BUDGET)
}

/// Number of completions `m^free`, saturating.
pub(crate) fn completions(machines: usize, free: usize) -> u64 {
    (machines as u64)
        .checked_pow(free as u32)
        .unwrap_or(u64::MAX)
}

pub fn constrained_opt_with_budget(
    inst: &Instance,
    fixed: &PartialSchedule,
    budget: u64,
) -> Result<Optimum> {
    let mut loads = inst.loads(fixed)?;
    let free: Vec<usize> = fixed.unassigned().collect();
    let count = completions(inst.machines(), free.len());
    if count > budget {
        return Err(Error::TooLarge(format!(
            "{}^{} = {} completions exceed the budget of {budget}",
            inst.machines(),
            free.len(),
            if count == u64::MAX {
                "more than 2^64".to_string()
            } else {
                count.to_string()
            }
        )));
    }

    let mut search = Search {
        inst,
        free: &free,
        assignment: fixed.clone(),
        best: None,
    };
    let start = max_load(&loads);
    search.descend(0, &mut loads, &start);
    let (makespan, schedule) = search.best.expect("at least one completion exists");
    Ok(Optimum { makespan, schedule })
}

struct Search<'a> {
    inst: &'a Instance,
    free: &'a [usize],
    assignment: PartialSchedule,
    best: Option<(Rational, Schedule)>,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, loads: &mut [Rational], current: &Rational) {
        if let Some((best, _)) = &self.best {
            // Loads only grow, so this branch cannot beat the incumbent strictly.
            if current >= best {
                return;
            }
        }
        if depth == self.free.len() {
            let schedule = self.assignment.to_schedule().expect("complete at leaf");
            self.best = Some((current.clone(), schedule));
            return;
        }
        let job = self.free[depth];
        for machine in 0..self.inst.machines() {
            loads[machine] += self.inst.time(machine, job);
            let next = if loads[machine] > *current {
                loads[machine].clone()
            } else {
                current.clone()
            };
            self.assignment.set(job, machine);
            self.descend(depth + 1, loads, &next);
            self.assignment.unset(job);
            loads[machine] -= self.inst.time(machine, job);
        }
    }
}

/// Two-machine variant that scans the `2^r` subsets of free jobs directly.
/// Kept as an independent route for cross-checking the general search.
pub fn constrained_opt_two_machines(inst: &Instance, fixed: &PartialSchedule) -> Result<Optimum> {
    if inst.machines() != 2 {
        return Err(Error::InvalidArgument(
            "two-machine search needs m = 2".into(),
        ));
    }
    let base = inst.loads(fixed)?;
    let free: Vec<usize> = fixed.unassigned().collect();
    if free.len() > 40 {
        return Err(Error::TooLarge(format!("{} free jobs", free.len())));
    }
    let mut best: Option<(Rational, Vec<usize>)> = None;
    for mask in 0u64..(1u64 << free.len()) {
        let mut loads = base.clone();
        // Bit (r-1-k) of `mask` is the machine of free job k, so ascending masks
        // visit assignments in lexicographic order.
        let machines: Vec<usize> = (0..free.len())
            .map(|k| ((mask >> (free.len() - 1 - k)) & 1) as usize)
            .collect();
        for (k, &job) in free.iter().enumerate() {
            loads[machines[k]] += inst.time(machines[k], job);
        }
        let makespan = max_load(&loads);
        if best.as_ref().is_none_or(|(b, _)| makespan < *b) {
            best = Some((makespan, machines));
        }
    }
    let (makespan, machines) = best.expect("nonempty enumeration");
    let mut sched = fixed.clone();
    for (k, &job) in free.iter().enumerate() {
        sched.set(job, machines[k]);
    }
    Ok(Optimum {
        makespan,
        schedule: sched.to_schedule().expect("complete"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn thm1(eps: Rational) -> Instance {
        let e = |a: i64, b: i64| int(a) - &eps * int(b);
        Instance::new(vec![
            vec![e(3, 11), eps.clone(), eps.clone(), e(1, 2), e(2, 8)],
            vec![eps.clone(), e(2, 9), e(2, 8), e(1, 2), e(1, 2)],
        ])
        .unwrap()
    }

    fn appendix_d() -> Instance {
        Instance::with_initial_loads(
            vec![vec![int(7), int(5), int(5)]; 3],
            vec![int(0), int(2), int(6)],
        )
        .unwrap()
    }

    /// Plain enumeration of every completion, in lexicographic order.
    fn brute_force(inst: &Instance, fixed: &PartialSchedule) -> (Rational, Schedule) {
        let free: Vec<usize> = fixed.unassigned().collect();
        let m = inst.machines();
        let mut best: Option<(Rational, Schedule)> = None;
        for code in 0..m.pow(free.len() as u32) {
            let mut sched = fixed.clone();
            let mut rest = code;
            for &job in free.iter().rev() {
                sched.set(job, rest % m);
                rest /= m;
            }
            let s = sched.to_schedule().unwrap();
            let ms = inst.makespan(&s).unwrap();
            if best.as_ref().is_none_or(|(b, _)| ms < *b) {
                best = Some((ms, s));
            }
        }
        best.unwrap()
    }

    #[test]
    fn thm1_optimum_is_one() {
        let inst = thm1(rat(1, 100));
        let o = opt(&inst).unwrap();
        assert_eq!(o.makespan, int(1));
        assert_eq!(o.schedule, Schedule::new(vec![1, 0, 0, 0, 1]));
    }

    #[test]
    fn three_machine_optimum() {
        let eps = rat(1, 10);
        let inst = Instance::new(vec![
            vec![int(4) - &eps, int(2), int(2)],
            vec![int(4), int(3), int(3)],
            vec![int(6), int(6) - &eps, int(6) - &eps],
        ])
        .unwrap();
        let o = opt(&inst).unwrap();
        assert_eq!(o.makespan, int(4));
        assert_eq!(o.schedule, Schedule::new(vec![1, 0, 0]));
    }

    #[test]
    fn single_job_picks_faster_machine() {
        let inst = Instance::from_ints(&[&[2], &[3]]).unwrap();
        let o = opt(&inst).unwrap();
        assert_eq!((o.makespan, o.schedule), (int(2), Schedule::new(vec![0])));
    }

    #[test]
    fn identical_machines_with_initial_loads() {
        let inst = appendix_d();
        let o = opt(&inst).unwrap();
        assert_eq!(o.makespan, int(10));
        assert_eq!(o.schedule, Schedule::new(vec![1, 0, 0]));
        assert_eq!(
            inst.loads(&o.schedule.to_partial()).unwrap(),
            vec![int(10), int(9), int(6)]
        );

        let fixed = PartialSchedule::from_pairs(3, &[(0, 0)]).unwrap();
        let (expected, _) = brute_force(&inst, &fixed);
        assert_eq!(expected, int(11));
        assert_eq!(constrained_opt(&inst, &fixed).unwrap().makespan, int(11));
    }

    #[test]
    fn complete_fixed_schedule_is_its_own_optimum() {
        let inst = thm1(rat(1, 100));
        let s = Schedule::new(vec![0, 1, 0, 1, 1]);
        let o = constrained_opt(&inst, &s.to_partial()).unwrap();
        assert_eq!(o.makespan, rat(387, 100));
        assert_eq!(o.schedule, s);
    }

    #[test]
    fn budget_is_enforced() {
        let inst = Instance::new(vec![vec![int(1); 30]; 3]).unwrap();
        assert!(matches!(opt(&inst), Err(Error::TooLarge(_))));
        let small = Instance::new(vec![vec![int(1); 4]; 3]).unwrap();
        assert!(constrained_opt_with_budget(&small, &PartialSchedule::empty(4), 80).is_err());
        assert!(constrained_opt_with_budget(&small, &PartialSchedule::empty(4), 81).is_ok());
    }

    #[test]
    fn empty_instance() {
        let inst =
            Instance::with_initial_loads(vec![vec![], vec![]], vec![int(3), int(1)]).unwrap();
        let o = opt(&inst).unwrap();
        assert_eq!(o.makespan, int(3));
        assert_eq!(o.schedule.jobs(), 0);
    }

    proptest::proptest! {
        #[test]
        fn matches_brute_force(
            m in 1usize..4,
            n in 0usize..6,
            vals in proptest::collection::vec(0i64..10, 18),
            fix in proptest::collection::vec(proptest::option::of(0usize..3), 6),
        ) {
            let p = (0..m).map(|i| (0..n).map(|j| int(vals[i * 6 + j])).collect()).collect();
            let inst = Instance::new(p).unwrap();
            let mut fixed = PartialSchedule::empty(n);
            for j in 0..n {
                if let Some(i) = fix[j] { if i < m { fixed.set(j, i); } }
            }
            let got = constrained_opt(&inst, &fixed).unwrap();
            let (ms, witness) = brute_force(&inst, &fixed);
            proptest::prop_assert_eq!(&got.makespan, &ms);
            proptest::prop_assert_eq!(&got.schedule, &witness);
            if m == 2 {
                let fast = constrained_opt_two_machines(&inst, &fixed).unwrap();
                proptest::prop_assert_eq!(fast, got.clone());
            }
            // every complete schedule is at least the optimum
            let empty = opt(&inst).unwrap();
            proptest::prop_assert!(empty.makespan <= got.makespan);
        }

        #[test]
        fn scaling_scales_the_optimum(
            vals in proptest::collection::vec(0i64..10, 10),
            num in 1i64..20,
            den in 1i64..20,
        ) {
            let p = (0..2).map(|i| (0..5).map(|j| int(vals[i * 5 + j])).collect()).collect();
            let inst = Instance::new(p).unwrap();
            let c = rat(num, den);
            let a = opt(&inst).unwrap();
            let b = opt(&inst.scaled(&c)).unwrap();
            proptest::prop_assert_eq!(b.makespan, a.makespan * &c);
            proptest::prop_assert_eq!(b.schedule, a.schedule);
        }
    }
}
