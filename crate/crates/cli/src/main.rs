//! `seqsched`: command-line front end for the sequential scheduling solver.

mod output;

use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use seqsched_core::constructions::{
    deviation_check, gen_appendix_d, gen_example1, gen_thm1, gen_thm2, gen_thm5, thm3_groups,
    thm3_order, thm4_tree,
};
use seqsched_core::equilibria::{named_rule, spe, spe_outcome_set, ScriptedRule, TieBreakRule};
use seqsched_core::lpsearch::{
    count_structures, search_with, EnumerationOptions, SearchOptions, TieMode, TreeStructure,
};
use seqsched_core::measures::{
    adaptive_spos_with, poa_pos, spoa_fixed, spos_with, Ties, DEFAULT_SPOS_MAX_JOBS,
    DEFAULT_TREE_BUDGET,
};
use seqsched_core::optimum::{constrained_opt, opt};
use seqsched_core::rational::{format_rational, int, parse_rational};
use seqsched_core::tree::{AdaptiveTree, PlayerOrder};
use seqsched_core::verify::verify_paper;
use seqsched_core::{Error, Instance, PartialSchedule, Rational};

use output::Report;

#[derive(Parser)]
#[command(
    name = "seqsched",
    version,
    about = "Sequential machine-scheduling games, solved exactly"
)]
struct Cli {
    /// Print bare `key=value` lines without decimal approximations.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads (default: all cores for searches, one otherwise).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Instance file; `-` or absent reads standard input.
    instance: Option<PathBuf>,
}

#[derive(Args)]
struct TreeChoice {
    /// One-based player order, e.g. `1,2,3`.
    #[arg(long, conflicts_with = "tree")]
    order: Option<String>,

    /// Adaptive tree in parenthesized preorder, e.g. `(J1 (J2 . .) (J2 . .))`.
    #[arg(long)]
    tree: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Subgame-perfect equilibrium under a deterministic tie rule.
    Spe {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        choice: TreeChoice,
        /// `lowest`, `highest` or `thm2:<k>`.
        #[arg(long, default_value = "lowest", conflicts_with = "rules")]
        tie: String,
        /// Scripted tie table, one `player <j> when <pattern> prefer <i>` per line.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Every equilibrium outcome reachable under some tie resolution.
    SpeSet {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        choice: TreeChoice,
    },
    /// Minimum makespan.
    Opt {
        #[command(flatten)]
        input: Input,
    },
    /// Minimum makespan with some jobs fixed.
    ConstrainedOpt {
        #[command(flatten)]
        input: Input,
        /// One-based `job:machine` pairs, e.g. `1:2,3:1`.
        #[arg(long, default_value = "")]
        fixed: String,
    },
    /// Pure Nash equilibria with the prices of anarchy and stability.
    Nash {
        #[command(flatten)]
        input: Input,
    },
    /// Worst equilibrium of a fixed order against the optimum.
    Spoa {
        #[command(flatten)]
        input: Input,
        /// One-based player order (default: identity).
        #[arg(long)]
        order: Option<String>,
    },
    /// Best fixed order.
    Spos {
        #[command(flatten)]
        input: Input,
        /// Judge each order by its worst equilibrium instead of its best.
        #[arg(long)]
        worst_ties: bool,
        #[arg(long, default_value_t = DEFAULT_SPOS_MAX_JOBS)]
        max_jobs: usize,
    },
    /// Best adaptive tree.
    AdaptiveSpos {
        #[command(flatten)]
        input: Input,
        /// Judge each tree by its worst equilibrium instead of its best.
        #[arg(long)]
        worst_ties: bool,
        #[arg(long, default_value_t = DEFAULT_TREE_BUDGET)]
        budget: u64,
    },
    /// Two-machine order grouping jobs by their faster machine.
    OrderThm3 {
        #[command(flatten)]
        input: Input,
    },
    /// Two-machine adaptive tree whose recommended equilibrium is optimal.
    TreeThm4 {
        #[command(flatten)]
        input: Input,
        /// Also report the worst equilibrium over arbitrary ties.
        #[arg(long)]
        worst_ties: bool,
    },
    /// Deviation analysis of the constrained optimum at the root.
    CheckAppendixD {
        /// Instance file (default: the built-in three-machine instance).
        instance: Option<PathBuf>,
    },
    /// Emit a lower-bound instance.
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Write to this file instead of standard output.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// LP search for bad two-machine instances.
    LpSearch {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        no_prune_obs1: bool,
        #[arg(long)]
        no_mirror: bool,
        /// Keep structures whose equilibrium leaf is an extreme leaf.
        #[arg(long)]
        keep_extreme: bool,
        /// Strict SPE inequalities with this margin.
        #[arg(long)]
        strict_eps: Option<String>,
        /// `i/k`: only stream positions congruent to i modulo k.
        #[arg(long, default_value = "0/1")]
        shard: String,
        /// Stream position to resume from.
        #[arg(long, default_value_t = 0)]
        cursor: u64,
        #[arg(long)]
        max_structures: Option<u64>,
        /// Examine one structure (hex), ignoring the filters.
        #[arg(long)]
        structure: Option<String>,
        /// Directory for the log and one witness instance per improvement.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Number of tree structures with and without pruning.
    CountStructures {
        #[arg(long)]
        n: usize,
    },
    /// Run every verification check.
    VerifyPaper {
        /// Show elapsed time per check.
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Subcommand)]
enum Family {
    Thm1 {
        #[arg(long, default_value = "1/100")]
        eps: String,
    },
    Thm2 {
        #[arg(long)]
        k: usize,
    },
    Thm5 {
        #[arg(long, default_value = "1/10")]
        eps: String,
    },
    AppendixD,
    Example1 {
        #[arg(long, default_value = "5")]
        l: String,
    },
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::InvalidArgument(_)
            | Error::InvalidInstance(_)
            | Error::InvalidSchedule(_)
            | Error::InvalidTree(_) => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

fn read_text(path: Option<&Path>) -> std::result::Result<String, Failure> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| usage(format!("stdin: {e}")))?;
            Ok(text)
        }
    }
}

fn load(input: &Input) -> std::result::Result<Instance, Failure> {
    Ok(Instance::parse(&read_text(input.instance.as_deref())?)?)
}

fn rational_arg(text: &str) -> std::result::Result<Rational, Failure> {
    parse_rational(text).map_err(|e| usage(e.to_string()))
}

fn order_arg(text: Option<&str>, inst: &Instance) -> std::result::Result<PlayerOrder, Failure> {
    match text {
        Some(t) => Ok(PlayerOrder::parse(t)?),
        None => Ok(PlayerOrder::identity(inst.jobs())),
    }
}

fn tree_arg(choice: &TreeChoice, inst: &Instance) -> std::result::Result<AdaptiveTree, Failure> {
    match &choice.tree {
        Some(t) => Ok(AdaptiveTree::parse_preorder(
            t,
            inst.jobs(),
            inst.machines(),
        )?),
        None => Ok(order_arg(choice.order.as_deref(), inst)?.to_tree(inst.machines())),
    }
}

fn fixed_arg(text: &str, jobs: usize) -> std::result::Result<PartialSchedule, Failure> {
    let mut pairs = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (j, i) = part
            .split_once(':')
            .ok_or_else(|| usage(format!("expected `job:machine`, found `{part}`")))?;
        let index = |t: &str| {
            t.trim()
                .trim_start_matches(['J', 'j', 'M', 'm'])
                .parse::<usize>()
                .ok()
                .filter(|&v| v >= 1)
                .map(|v| v - 1)
                .ok_or_else(|| usage(format!("bad index `{t}`")))
        };
        pairs.push((index(j)?, index(i)?));
    }
    Ok(PartialSchedule::from_pairs(jobs, &pairs)?)
}

fn ties(worst: bool) -> Ties {
    if worst {
        Ties::Worst
    } else {
        Ties::Best
    }
}

fn set_threads(threads: Option<usize>, parallel_default: bool) -> std::result::Result<(), Failure> {
    let count = match threads {
        Some(0) => return Err(usage("--threads must be positive")),
        Some(t) => t,
        None if parallel_default => return Ok(()),
        None => 1,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(count)
        .build_global()
        .map_err(|e| usage(e.to_string()))
}

fn run(cli: Cli) -> Outcome {
    let parallel = matches!(
        cli.command,
        Command::LpSearch { .. } | Command::Spos { .. } | Command::AdaptiveSpos { .. }
    );
    set_threads(cli.threads, parallel)?;
    let mut out = Report::new(cli.json);
    let ok = match cli.command {
        Command::Spe {
            input,
            choice,
            tie,
            rules,
        } => {
            let inst = load(&input)?;
            let tree = tree_arg(&choice, &inst)?;
            let rule: Arc<dyn TieBreakRule> = match rules {
                Some(path) => Arc::new(ScriptedRule::parse(&read_text(Some(&path))?)?),
                None if tie == "recommended" => {
                    return Err(usage(
                        "recommended ties need a recommendation map; use tree-thm4",
                    ))
                }
                None => named_rule(&tie)?,
            };
            let outcome = spe(&inst, &tree, rule.as_ref())?;
            out.line("schedule", &outcome.schedule);
            out.value("makespan", &outcome.makespan);
            out.values("loads", &outcome.loads);
            out.values("costs", &outcome.costs);
            out.line("tree", &tree);
            true
        }
        Command::SpeSet { input, choice } => {
            let inst = load(&input)?;
            let tree = tree_arg(&choice, &inst)?;
            let set = spe_outcome_set(&inst, &tree)?;
            out.line("outcomes", set.len());
            for o in set.iter() {
                out.line(
                    "outcome",
                    format!("{} makespan {}", o.schedule, format_rational(&o.makespan)),
                );
            }
            out.value("best", &set.best().makespan);
            out.value("worst", &set.worst().makespan);
            true
        }
        Command::Opt { input } => {
            let inst = load(&input)?;
            let o = opt(&inst)?;
            out.value("opt", &o.makespan);
            out.line("schedule", &o.schedule);
            true
        }
        Command::ConstrainedOpt { input, fixed } => {
            let inst = load(&input)?;
            let fixed = fixed_arg(&fixed, inst.jobs())?;
            let o = constrained_opt(&inst, &fixed)?;
            out.value("opt", &o.makespan);
            out.line("schedule", &o.schedule);
            out.values("loads", &inst.loads(&o.schedule.to_partial())?);
            true
        }
        Command::Nash { input } => {
            let inst = load(&input)?;
            match poa_pos(&inst)? {
                None => {
                    out.line("equilibria", 0);
                    let o = opt(&inst)?;
                    out.value("opt", &o.makespan);
                }
                Some(prices) => {
                    out.ratio("value", &prices.poa);
                    out.value("makespan", &prices.worst_makespan);
                    out.value("opt", &prices.opt_makespan);
                    out.ratio("poa", &prices.poa);
                    out.ratio("pos", &prices.pos);
                    out.line("equilibria", prices.equilibria);
                    out.line("worst", &prices.worst);
                    out.line("best", &prices.best);
                }
            }
            true
        }
        Command::Spoa { input, order } => {
            let inst = load(&input)?;
            let order = order_arg(order.as_deref(), &inst)?;
            let r = spoa_fixed(&inst, &order)?;
            measure(&mut out, &r);
            true
        }
        Command::Spos {
            input,
            worst_ties,
            max_jobs,
        } => {
            let inst = load(&input)?;
            let r = spos_with(&inst, ties(worst_ties), max_jobs)?;
            measure(&mut out, &r);
            true
        }
        Command::AdaptiveSpos {
            input,
            worst_ties,
            budget,
        } => {
            let inst = load(&input)?;
            let r = adaptive_spos_with(&inst, ties(worst_ties), budget)?;
            measure(&mut out, &r);
            true
        }
        Command::OrderThm3 { input } => {
            let inst = load(&input)?;
            let (g1, g2) = thm3_groups(&inst)?;
            let order = thm3_order(&inst)?;
            let one_based = |g: &[usize]| -> String {
                let parts: Vec<String> = g.iter().map(|j| (j + 1).to_string()).collect();
                format!("({})", parts.join(","))
            };
            out.line("g1", one_based(&g1));
            out.line("g2", one_based(&g2));
            out.line("order", &order);
            let set = spe_outcome_set(&inst, &order.to_tree(inst.machines()))?;
            let optimum = opt(&inst)?.makespan;
            let best = &set.best().makespan;
            let bound = int(g1.len() as i64 + 1) * &optimum;
            out.value("makespan", best);
            out.value("opt", &optimum);
            out.value("bound", &bound);
            best <= &bound
        }
        Command::TreeThm4 { input, worst_ties } => {
            let inst = load(&input)?;
            let built = thm4_tree(&inst)?;
            let outcome = spe(&inst, &built.tree, &built.rule())?;
            let optimum = opt(&inst)?.makespan;
            out.value("makespan", &outcome.makespan);
            out.value("opt", &optimum);
            out.line("schedule", &outcome.schedule);
            out.line("fallbacks", built.fallbacks());
            out.line("tree", built.annotated_preorder());
            if worst_ties {
                let set = spe_outcome_set(&inst, &built.tree)?;
                out.value("worst", &set.worst().makespan);
            }
            outcome.makespan == optimum
        }
        Command::CheckAppendixD { instance } => {
            let inst = match instance {
                Some(path) => Instance::parse(&read_text(Some(&path))?)?,
                None => gen_appendix_d(),
            };
            let report = deviation_check(&inst)?;
            out.value("opt", &report.optimum.makespan);
            out.line("schedule", &report.optimum.schedule);
            out.values("loads", &report.loads);
            for job in &report.jobs {
                for d in &job.deviations {
                    out.line(
                        &format!("J{}", job.job + 1),
                        format!(
                            "M{} cost {} -> M{} cost {}{}",
                            job.opt_machine + 1,
                            format_rational(&job.opt_cost),
                            d.machine + 1,
                            format_rational(&d.cost),
                            if d.cost < job.opt_cost {
                                " improves"
                            } else {
                                ""
                            }
                        ),
                    );
                }
            }
            out.line("every_job_improves", report.every_job_improves());
            true
        }
        Command::Gen { family, out: path } => {
            let inst = match family {
                Family::Thm1 { eps } => gen_thm1(&rational_arg(&eps)?)?,
                Family::Thm2 { k } => gen_thm2(k)?,
                Family::Thm5 { eps } => gen_thm5(&rational_arg(&eps)?)?,
                Family::AppendixD => gen_appendix_d(),
                Family::Example1 { l } => gen_example1(&rational_arg(&l)?)?,
            };
            match path {
                Some(p) => fs::write(&p, inst.to_text())
                    .map_err(|e| usage(format!("{}: {e}", p.display())))?,
                None => out.raw(&inst.to_text()),
            }
            true
        }
        Command::LpSearch {
            n,
            no_prune_obs1,
            no_mirror,
            keep_extreme,
            strict_eps,
            shard,
            cursor,
            max_structures,
            structure,
            out: dir,
        } => {
            let (i, k) = shard
                .split_once('/')
                .and_then(|(i, k)| Some((i.parse::<u64>().ok()?, k.parse::<u64>().ok()?)))
                .filter(|&(i, k)| k > 0 && i < k)
                .ok_or_else(|| usage(format!("bad shard `{shard}`, expected i/k with i < k")))?;
            let options = SearchOptions {
                enumeration: EnumerationOptions {
                    prune_obs1: !no_prune_obs1,
                    prune_mirror: !no_mirror,
                    exclude_extreme_eq_leaf: !keep_extreme,
                },
                tie_mode: match strict_eps {
                    Some(e) => TieMode::Strict(rational_arg(&e)?),
                    None => TieMode::Weak,
                },
                shard: (i, k),
                cursor,
                max_structures,
                only: match structure {
                    Some(hex) => Some((TreeStructure::from_hex(n, &hex)?, None)),
                    None => None,
                },
            };
            if let Some(d) = &dir {
                fs::create_dir_all(d).map_err(|e| usage(format!("{}: {e}", d.display())))?;
            }
            let mut log = String::new();
            let mut written = 0usize;
            let mut io_error = None;
            let report = search_with(n, &options, &mut |c| {
                let line = format!(
                    "value={} structure={} optleaf={}",
                    format_rational(&c.value),
                    c.structure.to_hex(),
                    c.opt_leaf
                );
                println!("{line}");
                log.push_str(&line);
                log.push('\n');
                if let Some(d) = &dir {
                    written += 1;
                    let path = d.join(format!("witness-{written:04}.txt"));
                    if let Err(e) = fs::write(&path, c.witness.to_text()) {
                        io_error.get_or_insert(format!("{}: {e}", path.display()));
                    }
                }
            })?;
            if let Some(d) = &dir {
                fs::write(d.join("search.log"), &log)
                    .map_err(|e| usage(format!("{}: {e}", d.display())))?;
            }
            if let Some(e) = io_error {
                return Err(usage(e));
            }
            match &report.best {
                Some(best) => {
                    out.value("best", &best.value);
                    out.line("structure", best.structure.to_hex());
                    out.line("optleaf", best.opt_leaf);
                    out.line("machine", format!("M{}", best.objective_machine + 1));
                    out.raw(&format!("witness:\n{}", best.witness.to_text()));
                }
                None => out.line("best", "none"),
            }
            out.line("structures", report.structures);
            out.line("lps", report.lps);
            out.line("infeasible", report.infeasible_count);
            out.line("unbounded", report.unbounded_count);
            if let Some(next) = report.next_cursor {
                out.line("next_cursor", next);
            }
            true
        }
        Command::CountStructures { n } => {
            out.line("total", count_structures(n, EnumerationOptions::NONE)?);
            out.line(
                "obs1",
                count_structures(n, EnumerationOptions::obs1_only())?,
            );
            out.line(
                "pruned",
                count_structures(n, EnumerationOptions::default())?,
            );
            true
        }
        Command::VerifyPaper { timing } => {
            let report = verify_paper();
            out.raw(&report.render(timing));
            report.all_pass()
        }
    };
    out.print();
    Ok(ok)
}

fn measure(out: &mut Report, r: &seqsched_core::measures::MeasureReport) {
    out.ratio("value", &r.value);
    out.value("makespan", &r.makespan);
    out.value("opt", &r.opt_makespan);
    if let Some(order) = &r.order {
        out.line("order", order);
    }
    out.line("schedule", &r.outcome.schedule);
    out.line("tree", &r.tree);
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
