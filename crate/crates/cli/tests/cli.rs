use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn olframe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_olframe"))
        .args(args)
        .current_dir(root())
        .stdin(Stdio::null())
        .output()
        .unwrap()
}

fn transcript(dir: &Path, text: &str) -> String {
    let p = dir.join("t.txt");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn shipped_scenarios_pass() {
    for (t, kb) in [("jacob", "jacob"), ("motors", "motors"), ("jacob_open", "jacob_open")] {
        let o = olframe(&["run", &format!("scenarios/{t}.txt"), "--kb", &format!("fixtures/{kb}")]);
        assert_eq!(o.status.code(), Some(0), "{t}: {}", stderr(&o));
    }
}

#[test]
fn mismatches_exit_3_with_a_diff() {
    let dir = tempfile::tempdir().unwrap();
    let t = transcript(dir.path(), "say Jacob find the blue ball\nexpect ambiguity 2\n");
    let o = olframe(&["run", &t, "--kb", "fixtures/jacob"]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("- expected: ambiguity 2"), "{err}");
    assert!(err.contains("+ actual:   plans_ready 1, plan_executed colored_ball_search"), "{err}");
}

#[test]
fn unanswered_inquiries_fail_instead_of_blocking() {
    let dir = tempfile::tempdir().unwrap();
    let t = transcript(dir.path(), "say Jacob find the red cube\nsay Jacob find the blue ball\n");
    let o = olframe(&["run", &t, "--kb", "fixtures/jacob"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("never answered"));
    let t = transcript(dir.path(), "say Jacob find the red cube\nexpect inquiry \"the red cube\"\n");
    assert_eq!(olframe(&["run", &t, "--kb", "fixtures/jacob"]).status.code(), Some(3));
}

#[test]
fn rejected_directives_are_protocol_errors_unless_expected() {
    let dir = tempfile::tempdir().unwrap();
    let t = transcript(dir.path(), "choose 0\n");
    assert_eq!(olframe(&["run", &t, "--kb", "fixtures/jacob"]).status.code(), Some(4));
    let t = transcript(dir.path(), "choose 0\nexpect error no_pending_choice\nanswer 0\nexpect error\n");
    let o = olframe(&["run", &t, "--kb", "fixtures/jacob"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = transcript(dir.path(), "say Jacob start motor nine\nchoose 7\nexpect error index_out_of_range\nchoose 0\n");
    assert_eq!(olframe(&["run", &t, "--kb", "fixtures/motors"]).status.code(), Some(0));
}

#[test]
fn malformed_transcripts_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let t = transcript(dir.path(), "say hi\nteleport now\n");
    let o = olframe(&["run", &t, "--kb", "fixtures/jacob"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn kb_errors_exit_2() {
    let o = olframe(&["run", "scenarios/jacob.txt", "--kb", "fixtures/broken"]);
    assert_eq!(o.status.code(), Some(2));
    let o = olframe(&["validate", "fixtures/broken"]);
    assert_eq!(o.status.code(), Some(2));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("UnresolvedReference"), "{out}");
    let o = olframe(&["validate", "fixtures/jacob"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(olframe(&["run"]).status.code(), Some(1));
    assert_eq!(olframe(&["--help"]).status.code(), Some(0));
    assert_eq!(
        olframe(&["run", "scenarios/jacob.txt", "--kb", "fixtures/jacob", "--lang", "EN!"]).status.code(),
        Some(1)
    );
}

#[test]
fn auto_policy_executes_the_first_plan() {
    let dir = tempfile::tempdir().unwrap();
    let t = transcript(
        dir.path(),
        "say Jacob start motor nine\nexpect plans_ready 2\nexpect plan_executed start_internal_motor\n",
    );
    let o = olframe(&["run", &t, "--kb", "fixtures/motors", "--policy", "auto"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn no_exec_only_reports_plans() {
    let dir = tempfile::tempdir().unwrap();
    let t = transcript(dir.path(), "say Jacob find the blue ball\nexpect plans_ready 1\n");
    let o = olframe(&["run", &t, "--kb", "fixtures/jacob", "--no-exec"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("plan_executed"));
}

#[test]
fn trace_records_join_the_log() {
    let o = olframe(&["run", "scenarios/jacob.txt", "--kb", "fixtures/jacob", "--trace"]);
    let out = String::from_utf8_lossy(&o.stdout);
    let first_trace = out
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .find(|v| v.get("trace").is_some())
        .unwrap();
    assert_eq!(first_trace["trace"]["raw_combinations"], 96);
    assert_eq!(first_trace["trace"]["combinations"], 1);
}

#[test]
fn event_logs_are_byte_identical_across_runs() {
    for (t, kb) in [("jacob", "jacob"), ("motors", "motors")] {
        let runs: Vec<Vec<u8>> = (0..3)
            .map(|_| olframe(&["run", &format!("scenarios/{t}.txt"), "--kb", &format!("fixtures/{kb}")]).stdout)
            .collect();
        assert!(!runs[0].is_empty());
        assert!(runs.windows(2).all(|w| w[0] == w[1]), "{t}");
    }
}

#[test]
fn repl_and_batch_logs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let repl_log = dir.path().join("repl.jsonl");
    let batch_log = dir.path().join("batch.jsonl");
    let mut child = Command::new(env!("CARGO_BIN_EXE_olframe"))
        .args(["repl", "--kb", "fixtures/jacob_open", "--log"])
        .arg(&repl_log)
        .current_dir(root())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"Jacob find the red cube\nsense cube.n.01\ndefine type=physical_object\n:trace\nJacob find the yellow cube\n:quit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let shown = String::from_utf8_lossy(&out.stdout);
    assert!(shown.contains("what is \"the red cube\"?"), "{shown}");
    assert!(shown.contains("answer rejected"), "{shown}");
    assert!(shown.contains("colored_object_detector.search"), "{shown}");

    let o = olframe(&[
        "run",
        "scenarios/jacob_open.txt",
        "--kb",
        "fixtures/jacob_open",
        "--log",
        batch_log.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&repl_log).unwrap(), fs::read(&batch_log).unwrap());
}

#[test]
fn persist_kb_keeps_learned_concepts() {
    let dir = tempfile::tempdir().unwrap();
    let kb = dir.path().join("kb");
    fs::create_dir(&kb).unwrap();
    for e in fs::read_dir(root().join("fixtures/jacob_open")).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), kb.join(e.file_name())).unwrap();
    }
    let kb_arg = kb.to_str().unwrap();
    let o = olframe(&["run", "scenarios/jacob_open.txt", "--kb", kb_arg, "--persist-kb"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(kb.join("learned.jsonl").exists());
    let t = transcript(dir.path(), "say Jacob find the red cube\nexpect plans_ready 1\n");
    let o = olframe(&["run", &t, "--kb", kb_arg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(olframe(&["validate", kb_arg]).status.code(), Some(0));
}
