use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_seqsched"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn seqsched");
    // commands that fail early may close stdin before reading it
    let _ = child.stdin.take().unwrap().write_all(stdin.as_bytes());
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn gen(args: &[&str]) -> String {
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    let out = run(&full, "");
    assert!(out.status.success());
    stdout(&out)
}

fn has_line(text: &str, prefix: &str) -> bool {
    text.lines().any(|l| l.starts_with(prefix))
}

#[test]
fn opt_of_example1() {
    let inst = gen(&["example1", "--l", "5"]);
    let out = run(&["opt"], &inst);
    assert_eq!(out.status.code(), Some(0));
    assert!(has_line(&stdout(&out), "opt=1 "), "{}", stdout(&out));
}

#[test]
fn spe_on_thm1_with_lowest_ties() {
    let inst = gen(&["thm1", "--eps", "1/100"]);
    let out = run(&["spe", "--order", "1,2,3,4,5", "--tie", "lowest"], &inst);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(has_line(&text, "makespan=387/100 (3.87000)"), "{text}");
    assert!(has_line(&text, "schedule=(M1,M2,M1,M2,M2)"), "{text}");
}

#[test]
fn thm2_instance_pipes_into_opt() {
    let inst = gen(&["thm2", "--k", "2"]);
    let out = run(&["opt", "-"], &inst);
    assert!(has_line(&stdout(&out), "opt=1 "));
}

#[test]
fn machine_readable_output_drops_approximations() {
    let inst = gen(&["example1", "--l", "100"]);
    let text = stdout(&run(&["nash", "--json"], &inst));
    assert!(text.contains("poa=100\npos=1\n"), "{text}");
    assert!(has_line(&text, "worst=(M2,M1)"));
    assert!(!text.contains(" ("));
}

#[test]
fn measures_print_value_makespan_and_opt() {
    let inst = gen(&["thm1", "--eps", "1/100"]);
    let text = stdout(&run(&["spoa", "--json"], &inst));
    assert!(
        text.contains("value=387/100\nmakespan=387/100\nopt=1\n"),
        "{text}"
    );
    assert!(has_line(&text, "tree=(J1 "));

    let inst = gen(&["thm5", "--eps", "1/10"]);
    let text = stdout(&run(&["adaptive-spos", "--json", "--worst-ties"], &inst));
    assert!(
        text.contains("value=59/40\nmakespan=59/10\nopt=4\n"),
        "{text}"
    );
}

#[test]
fn constructions_on_two_machines() {
    let inst = gen(&["thm1", "--eps", "1/100"]);
    let out = run(&["tree-thm4"], &inst);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("makespan=1 "));

    let out = run(&["order-thm3"], &inst);
    assert_eq!(out.status.code(), Some(0));
    assert!(has_line(&stdout(&out), "order="));
}

#[test]
fn appendix_d_every_job_improves() {
    let out = run(&["check-appendix-d"], "");
    let text = stdout(&out);
    assert!(has_line(&text, "opt=10 "));
    assert!(has_line(&text, "loads=(10,9,6)"));
    assert!(has_line(&text, "every_job_improves=true"));
}

#[test]
fn constrained_opt_respects_fixed_jobs() {
    let inst = gen(&["example1", "--l", "5"]);
    let text = stdout(&run(
        &["constrained-opt", "--fixed", "1:2", "--json"],
        &inst,
    ));
    assert!(text.contains("opt=5\nschedule=(M2,M1)\n"), "{text}");
}

#[test]
fn structure_counts() {
    let text = stdout(&run(&["count-structures", "--n", "3"], ""));
    assert!(has_line(&text, "total=128"), "{text}");
    assert!(has_line(&text, "obs1=48"), "{text}");
}

#[test]
fn lp_search_logs_improvements_and_witnesses() {
    let dir = std::env::temp_dir().join(format!("seqsched-lp-{}", std::process::id()));
    let out = run(
        &[
            "lp-search",
            "--n",
            "3",
            "--threads",
            "2",
            "--out",
            dir.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let logged: Vec<&str> = text.lines().filter(|l| l.starts_with("value=")).collect();
    assert!(!logged.is_empty());
    assert!(logged[0].contains(" structure=") && logged[0].contains(" optleaf="));
    assert!(has_line(&text, "best=3 "), "{text}");
    let log = std::fs::read_to_string(dir.join("search.log")).unwrap();
    assert_eq!(log.lines().count(), logged.len());
    assert!(dir.join("witness-0001.txt").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn lp_search_output_is_thread_independent() {
    let a = stdout(&run(&["lp-search", "--n", "3", "--threads", "1"], ""));
    let b = stdout(&run(&["lp-search", "--n", "3", "--threads", "4"], ""));
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate"], "").status.code(), Some(2));
    assert_eq!(run(&["opt"], "2 1\n1 2\n").status.code(), Some(2));
    assert_eq!(run(&["opt", "/no/such/file"], "").status.code(), Some(2));
    assert_eq!(
        run(&["gen", "thm1", "--eps", "x"], "").status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["lp-search", "--n", "3", "--shard", "2/2"], "")
            .status
            .code(),
        Some(2)
    );
    // 8! orders exceed the default job limit
    let inst = gen(&["thm2", "--k", "2"]);
    let big = format!("2 8\n{}\n{}\n", ["1"; 8].join(" "), ["1"; 8].join(" "));
    assert_eq!(run(&["spos"], &big).status.code(), Some(1));
    assert_eq!(
        run(&["spe", "--tie", "recommended"], &inst).status.code(),
        Some(2)
    );
}
