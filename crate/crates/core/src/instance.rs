//! Instances, (partial) schedules and machine loads.
//!
//! Machines and jobs are indexed from zero internally and printed from one
//! (`M1`, `J1`) everywhere a human reads them.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{format_rational, is_nonnegative, parse_rational, Rational};

/// Processing-time matrix `p[i][j]` (job `j` on machine `i`) plus per-machine
/// initial loads.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    p: Vec<Vec<Rational>>,
    initial_loads: Vec<Rational>,
    jobs: usize,
}

impl Instance {
    /// Builds an instance from `m` rows of `n` times each, all initial loads zero.
    pub fn new(p: Vec<Vec<Rational>>) -> Result<Self> {
        let m = p.len();
        Self::with_initial_loads(p, vec![Rational::zero(); m])
    }

    pub fn with_initial_loads(p: Vec<Vec<Rational>>, initial_loads: Vec<Rational>) -> Result<Self> {
        let m = p.len();
        if m == 0 {
            return Err(Error::InvalidInstance(
                "at least one machine is required".into(),
            ));
        }
        let jobs = p[0].len();
        if let Some(i) = p.iter().position(|row| row.len() != jobs) {
            return Err(Error::InvalidInstance(format!(
                "row M{} has {} entries, expected {jobs}",
                i + 1,
                p[i].len()
            )));
        }
        if initial_loads.len() != m {
            return Err(Error::InvalidInstance(format!(
                "{} initial loads given for {m} machines",
                initial_loads.len()
            )));
        }
        for (i, row) in p.iter().enumerate() {
            if let Some(j) = row.iter().position(|v| !is_nonnegative(v)) {
                return Err(Error::InvalidInstance(format!(
                    "negative time p[M{}][J{}]",
                    i + 1,
                    j + 1
                )));
            }
        }
        if let Some(i) = initial_loads.iter().position(|v| !is_nonnegative(v)) {
            return Err(Error::InvalidInstance(format!(
                "negative initial load on M{}",
                i + 1
            )));
        }
        Ok(Instance {
            p,
            initial_loads,
            jobs,
        })
    }

    /// Builds an instance from integer rows; convenient in tests and generators.
    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|row| row.iter().map(|&v| crate::rational::int(v)).collect())
                .collect(),
        )
    }

    pub fn machines(&self) -> usize {
        self.p.len()
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    /// Time of job `job` on machine `machine`.
    pub fn time(&self, machine: usize, job: usize) -> &Rational {
        &self.p[machine][job]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.p
    }

    pub fn initial_loads(&self) -> &[Rational] {
        &self.initial_loads
    }

    /// Every time and initial load multiplied by `factor`.
    pub fn scaled(&self, factor: &Rational) -> Instance {
        Instance {
            p: self
                .p
                .iter()
                .map(|row| row.iter().map(|v| v * factor).collect())
                .collect(),
            initial_loads: self.initial_loads.iter().map(|v| v * factor).collect(),
            jobs: self.jobs,
        }
    }

    /// Per-machine loads of a (partial) schedule, including initial loads.
    pub fn loads(&self, sched: &PartialSchedule) -> Result<Vec<Rational>> {
        sched.check(self)?;
        let mut loads = self.initial_loads.clone();
        for (job, machine) in sched.assigned() {
            loads[machine] += &self.p[machine][job];
        }
        Ok(loads)
    }

    pub fn makespan(&self, sched: &Schedule) -> Result<Rational> {
        Ok(max_load(&self.loads(&sched.to_partial())?))
    }

    /// Parses the text instance format (see [`Instance::to_text`]).
    pub fn parse(text: &str) -> Result<Instance> {
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (header_line, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing `m n` header".into()))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(parse_err(
                header_line,
                format!("expected `m n`, found `{header}`"),
            ));
        }
        let dim = |tok: &str| {
            tok.parse::<usize>()
                .map_err(|_| parse_err(header_line, format!("bad dimension `{tok}`")))
        };
        let (m, n) = (dim(dims[0])?, dim(dims[1])?);
        if m == 0 {
            return Err(parse_err(
                header_line,
                "at least one machine is required".into(),
            ));
        }

        let parse_values = |line: usize, tokens: &[&str]| -> Result<Vec<Rational>> {
            tokens
                .iter()
                .map(|tok| {
                    let v = parse_rational(tok).map_err(|e| parse_err(line, e.to_string()))?;
                    if !is_nonnegative(&v) {
                        return Err(parse_err(line, format!("negative value `{tok}`")));
                    }
                    Ok(v)
                })
                .collect()
        };

        let mut p = Vec::with_capacity(m);
        if n == 0 {
            p.resize(m, Vec::new());
        } else {
            for row in 0..m {
                let (line, content) = lines.next().ok_or_else(|| {
                    parse_err(header_line, format!("expected {m} rows, found {row}"))
                })?;
                let tokens: Vec<&str> = content.split_whitespace().collect();
                if tokens.first() == Some(&"initial_loads") {
                    return Err(parse_err(line, format!("expected {m} rows, found {row}")));
                }
                if tokens.len() != n {
                    return Err(parse_err(
                        line,
                        format!("expected {n} values, found {}", tokens.len()),
                    ));
                }
                p.push(parse_values(line, &tokens)?);
            }
        }

        let mut initial = vec![Rational::zero(); m];
        if let Some((line, content)) = lines.next() {
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if tokens[0] != "initial_loads" {
                return Err(parse_err(line, format!("unexpected line `{content}`")));
            }
            if tokens.len() != m + 1 {
                return Err(parse_err(
                    line,
                    format!("expected {m} initial loads, found {}", tokens.len() - 1),
                ));
            }
            initial = parse_values(line, &tokens[1..])?;
        }
        if let Some((line, content)) = lines.next() {
            return Err(parse_err(line, format!("trailing content `{content}`")));
        }
        Instance::with_initial_loads(p, initial)
    }

    /// Canonical text form. Initial loads are written only when some is nonzero.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.machines(), self.jobs());
        for row in &self.p {
            let tokens: Vec<String> = row.iter().map(format_rational).collect();
            out.push_str(&tokens.join(" "));
            out.push('\n');
        }
        if self.initial_loads.iter().any(|v| !v.is_zero()) {
            let tokens: Vec<String> = self.initial_loads.iter().map(format_rational).collect();
            out.push_str("initial_loads ");
            out.push_str(&tokens.join(" "));
            out.push('\n');
        }
        out
    }
}

pub fn max_load(loads: &[Rational]) -> Rational {
    loads.iter().max().cloned().unwrap_or_else(Rational::zero)
}

/// Assignment of a subset of the jobs to machines (`None` = not yet placed).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialSchedule {
    slots: Vec<Option<usize>>,
}

impl PartialSchedule {
    pub fn empty(jobs: usize) -> Self {
        PartialSchedule {
            slots: vec![None; jobs],
        }
    }

    pub fn from_slots(slots: Vec<Option<usize>>) -> Self {
        PartialSchedule { slots }
    }

    /// Builds from `(job, machine)` pairs; a job listed twice is an error.
    pub fn from_pairs(jobs: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut sched = PartialSchedule::empty(jobs);
        for &(job, machine) in pairs {
            if job >= jobs {
                return Err(Error::InvalidSchedule(format!(
                    "job J{} out of range",
                    job + 1
                )));
            }
            if sched.slots[job].is_some() {
                return Err(Error::InvalidSchedule(format!(
                    "job J{} assigned twice",
                    job + 1
                )));
            }
            sched.slots[job] = Some(machine);
        }
        Ok(sched)
    }

    pub fn jobs(&self) -> usize {
        self.slots.len()
    }

    pub fn get(&self, job: usize) -> Option<usize> {
        self.slots[job]
    }

    pub fn slots(&self) -> &[Option<usize>] {
        &self.slots
    }

    pub fn set(&mut self, job: usize, machine: usize) {
        self.slots[job] = Some(machine);
    }

    pub fn unset(&mut self, job: usize) {
        self.slots[job] = None;
    }

    /// Returns a copy with `job` placed on `machine`.
    pub fn with(&self, job: usize, machine: usize) -> Self {
        let mut next = self.clone();
        next.slots[job] = Some(machine);
        next
    }

    pub fn assigned(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(j, s)| s.map(|i| (j, i)))
    }

    pub fn unassigned(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_none())
            .map(|(j, _)| j)
    }

    pub fn is_complete(&self) -> bool {
        self.slots.iter().all(Option::is_some)
    }

    pub fn to_schedule(&self) -> Option<Schedule> {
        self.slots
            .iter()
            .copied()
            .collect::<Option<Vec<_>>>()
            .map(Schedule::new)
    }

    pub fn check(&self, inst: &Instance) -> Result<()> {
        if self.slots.len() != inst.jobs() {
            return Err(Error::InvalidSchedule(format!(
                "schedule covers {} jobs, instance has {}",
                self.slots.len(),
                inst.jobs()
            )));
        }
        if let Some((job, machine)) = self.assigned().find(|&(_, i)| i >= inst.machines()) {
            return Err(Error::InvalidSchedule(format!(
                "job J{} on machine M{}, instance has {} machines",
                job + 1,
                machine + 1,
                inst.machines()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for PartialSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .assigned()
            .map(|(j, i)| format!("J{}->M{}", j + 1, i + 1))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Complete assignment: `machine_of[j]` is the machine of job `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Schedule {
    machine_of: Vec<usize>,
}

impl Schedule {
    pub fn new(machine_of: Vec<usize>) -> Self {
        Schedule { machine_of }
    }

    pub fn machine_of(&self, job: usize) -> usize {
        self.machine_of[job]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.machine_of
    }

    pub fn jobs(&self) -> usize {
        self.machine_of.len()
    }

    pub fn to_partial(&self) -> PartialSchedule {
        PartialSchedule {
            slots: self.machine_of.iter().map(|&i| Some(i)).collect(),
        }
    }

    /// Jobs placed on `machine`, ascending.
    pub fn jobs_on(&self, machine: usize) -> Vec<usize> {
        (0..self.jobs())
            .filter(|&j| self.machine_of[j] == machine)
            .collect()
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .machine_of
            .iter()
            .map(|i| format!("M{}", i + 1))
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn example1(l: i64) -> Instance {
        Instance::from_ints(&[&[1, l], &[l, 1]]).unwrap()
    }

    #[test]
    fn loads_of_swapped_example() {
        let inst = example1(5);
        let sched = PartialSchedule::from_pairs(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(inst.loads(&sched).unwrap(), vec![int(5), int(5)]);
    }

    #[test]
    fn empty_schedule_gives_initial_loads() {
        let inst = Instance::with_initial_loads(
            vec![vec![int(7), int(5), int(5)]; 3],
            vec![int(0), int(2), int(6)],
        )
        .unwrap();
        assert_eq!(
            inst.loads(&PartialSchedule::empty(3)).unwrap(),
            vec![int(0), int(2), int(6)]
        );
        let sched = PartialSchedule::from_pairs(3, &[(0, 1)]).unwrap();
        assert_eq!(inst.loads(&sched).unwrap(), vec![int(0), int(9), int(6)]);
    }

    #[test]
    fn out_of_range_machine_is_rejected() {
        let inst = example1(5);
        let sched = PartialSchedule::from_pairs(2, &[(0, 2)]).unwrap();
        assert!(matches!(inst.loads(&sched), Err(Error::InvalidSchedule(_))));
        assert!(PartialSchedule::from_pairs(2, &[(0, 0), (0, 1)]).is_err());
    }

    #[test]
    fn single_job_makespan() {
        let inst = Instance::from_ints(&[&[7]]).unwrap();
        assert_eq!(inst.makespan(&Schedule::new(vec![0])).unwrap(), int(7));
    }

    #[test]
    fn parses_example_file() {
        let inst = Instance::parse("2 2\n1 5\n5 1\n").unwrap();
        assert_eq!(inst, example1(5));
        let inst = Instance::parse("# one job\n1 1\n2/3\n").unwrap();
        assert_eq!(inst.time(0, 0), &rat(2, 3));
        let inst = Instance::parse("1 2\n0.01 1.5\n").unwrap();
        assert_eq!(inst.rows()[0], vec![rat(1, 100), rat(3, 2)]);
    }

    #[test]
    fn parses_initial_loads() {
        let text = "3 3\n7 5 5\n7 5 5\n7 5 5\ninitial_loads 0 2 6\n";
        let inst = Instance::parse(text).unwrap();
        assert_eq!(inst.initial_loads(), &[int(0), int(2), int(6)]);
        assert_eq!(inst.to_text(), text);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("2 2\n1 5\n5 x\n", 3),
            ("2 2\n1 5\n5\n", 3),
            ("2 2\n1 -5\n5 1\n", 2),
            ("# c\n2\n", 2),
            ("2 2\n1 5\n", 1),
            ("2 2\n1 5\n5 1\ninitial_loads 1\n", 4),
            ("2 2\n1 5\n5 1\nfoo\n", 4),
        ];
        for (text, line) in cases {
            match Instance::parse(text) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn zero_job_instance_round_trips() {
        let inst = Instance::new(vec![vec![], vec![]]).unwrap();
        assert_eq!(Instance::parse(&inst.to_text()).unwrap(), inst);
    }

    #[test]
    fn canonical_form_of_decimal_input() {
        let inst = Instance::parse("1 3\n0.50 4/2 3\n").unwrap();
        assert_eq!(inst.to_text(), "1 3\n1/2 2 3\n");
    }

    proptest::proptest! {
        #[test]
        fn text_round_trip(
            m in 1usize..4,
            n in 0usize..5,
            vals in proptest::collection::vec((0i64..50, 1i64..12), 16),
            loads in proptest::collection::vec((0i64..20, 1i64..5), 3),
        ) {
            let p = (0..m)
                .map(|i| (0..n).map(|j| { let (a, b) = vals[i * 5 + j]; rat(a, b) }).collect())
                .collect();
            let initial = (0..m).map(|i| rat(loads[i].0, loads[i].1)).collect();
            let inst = Instance::with_initial_loads(p, initial).unwrap();
            proptest::prop_assert_eq!(Instance::parse(&inst.to_text()).unwrap(), inst);
        }

        #[test]
        fn loads_are_additive(
            vals in proptest::collection::vec(0i64..20, 12),
            assignment in proptest::collection::vec(0usize..3, 4),
            job in 0usize..4,
            machine in 0usize..3,
        ) {
            let p = (0..3).map(|i| (0..4).map(|j| int(vals[i * 4 + j])).collect()).collect();
            let inst = Instance::new(p).unwrap();
            let mut fixed = PartialSchedule::empty(4);
            for (j, &i) in assignment.iter().enumerate() {
                if j != job { fixed.set(j, i); }
            }
            let before = inst.loads(&fixed).unwrap();
            let after = inst.loads(&fixed.with(job, machine)).unwrap();
            for i in 0..3 {
                let expected = if i == machine { &before[i] + inst.time(i, job) } else { before[i].clone() };
                proptest::prop_assert_eq!(&after[i], &expected);
            }
        }
    }
}
