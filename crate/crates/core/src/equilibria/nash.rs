//! Pure Nash equilibria of the simultaneous-move game.

use crate::error::{Error, Result};
use crate::instance::{Instance, Schedule};
use crate::optimum::{completions, DEFAULT_LEAF_BUDGET};

/// True iff no job can strictly lower its cost by moving alone. After a move
/// the job pays the target machine's load plus its own time there.
pub fn is_pure_nash(inst: &Instance, sched: &Schedule) -> Result<bool> {
    let loads = inst.loads(&sched.to_partial())?;
    for job in 0..inst.jobs() {
        let here = sched.machine_of(job);
        for target in (0..inst.machines()).filter(|&i| i != here) {
            if &loads[target] + inst.time(target, job) < loads[here] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All pure Nash schedules in lexicographic order.
pub fn pure_nash(inst: &Instance) -> Result<Vec<Schedule>> {
    pure_nash_with_budget(inst, DEFAULT_LEAF_BUDGET)
}

pub fn pure_nash_with_budget(inst: &Instance, budget: u64) -> Result<Vec<Schedule>> {
    let (m, n) = (inst.machines(), inst.jobs());
    let total = completions(m, n);
    if total > budget {
        return Err(Error::TooLarge(format!(
            "{m}^{n} schedules exceed the budget of {budget}"
        )));
    }
    let mut found = Vec::new();
    let mut digits = vec![0usize; n];
    loop {
        let sched = Schedule::new(digits.clone());
        if is_pure_nash(inst, &sched)? {
            found.push(sched);
        }
        // odometer with the last job varying fastest
        let Some(pos) = (0..n).rev().find(|&j| digits[j] + 1 < m) else {
            return Ok(found);
        };
        digits[pos] += 1;
        for d in &mut digits[pos + 1..] {
            *d = 0;
        }
    }
}
